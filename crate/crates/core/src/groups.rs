//! Finite groups given by permutation generators or multiplication tables.
//!
//! Permutations act on the right: `(a)(fg) = ((a)f)g`, so a product `fg`
//! means "apply `f`, then `g`". Element index 0 is always the identity.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default cap on the order of a permutation group closure.
pub const DEFAULT_PERM_CAP: usize = 10080;
/// Default cap on the order of a table group.
pub const DEFAULT_TABLE_CAP: usize = 512;
/// Largest `n` accepted by [`symmetric_group`].
pub const MAX_SYMMETRIC_DEGREE: usize = 8;
/// Permutation groups up to this order get a materialised multiplication table.
const TABLE_MATERIALIZE_LIMIT: usize = 1024;
/// Tables up to this order are checked for associativity over all triples.
const EXHAUSTIVE_ASSOC_LIMIT: usize = 256;

/// Minimal group interface used by word evaluation and almost-homomorphisms.
pub trait Group {
    type Elem: Clone + Eq;
    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
}

/// Size caps for group construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub perm_closure: usize,
    pub table_order: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { perm_closure: DEFAULT_PERM_CAP, table_order: DEFAULT_TABLE_CAP }
    }
}

/// A permutation of `{1, ..., n}`, stored 0-based: `images[i]` is `(i)f`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm { images: (0..n as u32).collect() }
    }

    /// Builds a permutation from 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::Malformed(format!("not a permutation of 0..{n}: {images:?}")));
            }
            seen[x] = true;
        }
        Ok(Perm { images })
    }

    /// Builds a permutation from 1-based images, as in `[2, 1, 3]`.
    pub fn from_one_based(images: &[usize]) -> Result<Perm> {
        if images.contains(&0) {
            return Err(Error::Malformed("1-based images must be positive".into()));
        }
        Perm::from_images(images.iter().map(|&x| (x - 1) as u32).collect())
    }

    /// Parses cycle notation such as `(1 2)(3 4 5)` or `(1,2)`; `()` and `e`
    /// are the identity.
    pub fn parse_cycles(text: &str, n: usize) -> Result<Perm> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut moved = vec![false; n];
        let t = text.trim();
        if t == "e" || t.is_empty() {
            return Ok(Perm { images });
        }
        let mut rest = t;
        while !rest.is_empty() {
            rest = rest.trim_start();
            if rest.is_empty() {
                break;
            }
            if !rest.starts_with('(') {
                return Err(Error::Malformed(format!("expected '(' in cycle notation {text:?}")));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| Error::Malformed(format!("unclosed cycle in {text:?}")))?;
            let body = &rest[1..close];
            let points: Vec<usize> = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::Malformed(format!("bad point {s:?} in {text:?}")))
                })
                .collect::<Result<_>>()?;
            for &p in &points {
                if p == 0 || p > n {
                    return Err(Error::Malformed(format!("point {p} outside 1..={n} in {text:?}")));
                }
                if moved[p - 1] {
                    return Err(Error::Malformed(format!("point {p} repeated in {text:?}")));
                }
                moved[p - 1] = true;
            }
            for (k, &p) in points.iter().enumerate() {
                let q = points[(k + 1) % points.len()];
                images[p - 1] = (q - 1) as u32;
            }
            rest = &rest[close + 1..];
        }
        Ok(Perm { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    /// `(i)f`, 0-based.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// The product `self * other`: apply `self` first, then `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm { images: self.images.iter().map(|&i| other.images[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Perm { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|(i, &j)| *i as u32 == j).count()
    }

    pub fn moved_points(&self) -> usize {
        self.degree() - self.fixed_points()
    }

    /// Disjoint cycles of length >= 2, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = self.apply(start);
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = self.apply(j);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Sorted lengths of the non-trivial cycles.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable();
        t
    }

    pub fn is_even(&self) -> bool {
        self.cycles().iter().map(|c| c.len() - 1).sum::<usize>() % 2 == 0
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let pts: Vec<String> = c.iter().map(|p| (p + 1).to_string()).collect();
            write!(f, "({})", pts.join(" "))?;
        }
        Ok(())
    }
}

/// The pairing `[n] x [n] -> [n^2]`, `(i, j) -> (i-1)n + j` (1-based), used to
/// embed `S_n x S_n` into `S_{n^2}` via `(i, j) -> ((i)f, (j)g)`.
pub fn square_embed(f: &Perm, g: &Perm) -> Result<Perm> {
    let n = f.degree();
    if g.degree() != n {
        return Err(Error::DegreeMismatch { left: n, right: g.degree() });
    }
    let mut images = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            images.push((f.apply(i) * n + g.apply(j)) as u32);
        }
    }
    Ok(Perm { images })
}

/// The full symmetric group of a given degree, acting on permutations directly.
/// Used for targets too large to enumerate (e.g. after amplification).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetricAction {
    pub degree: usize,
}

impl Group for SymmetricAction {
    type Elem = Perm;

    fn identity(&self) -> Perm {
        Perm::identity(self.degree)
    }

    fn op(&self, a: &Perm, b: &Perm) -> Perm {
        a.then(b)
    }

    fn inverse(&self, a: &Perm) -> Perm {
        a.inverse()
    }
}

#[derive(Debug, Clone)]
struct PermData {
    degree: usize,
    elems: Vec<Perm>,
    index: HashMap<Perm, u32>,
}

/// A finite group with elements indexed `0..order`, index 0 the identity.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    label: String,
    order: usize,
    table: Option<Vec<u32>>,
    perms: Option<PermData>,
    inv: Vec<u32>,
    gens: Vec<usize>,
    classes: OnceLock<ClassPartition>,
}

impl Group for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        0
    }

    fn op(&self, a: &usize, b: &usize) -> usize {
        self.mul(*a, *b)
    }

    fn inverse(&self, a: &usize) -> usize {
        self.inv(*a)
    }
}

impl FiniteGroup {
    fn from_perms(label: String, degree: usize, elems: Vec<Perm>, index: HashMap<Perm, u32>, gens: Vec<usize>) -> Self {
        let order = elems.len();
        let inv: Vec<u32> = elems.iter().map(|p| index[&p.inverse()]).collect();
        let table = (order <= TABLE_MATERIALIZE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(order * order);
            for a in &elems {
                for b in &elems {
                    t.push(index[&a.then(b)]);
                }
            }
            t
        });
        FiniteGroup {
            label,
            order,
            table,
            perms: Some(PermData { degree, elems, index }),
            inv,
            gens,
            classes: OnceLock::new(),
        }
    }

    /// Wraps an already validated table.
    fn from_table_unchecked(label: String, order: usize, table: Vec<u32>, gens: Option<Vec<usize>>) -> Self {
        let mut inv = vec![0u32; order];
        for a in 0..order {
            for b in 0..order {
                if table[a * order + b] == 0 {
                    inv[a] = b as u32;
                    break;
                }
            }
        }
        let mut g = FiniteGroup {
            label,
            order,
            table: Some(table),
            perms: None,
            inv,
            gens: Vec::new(),
            classes: OnceLock::new(),
        };
        g.gens = match gens {
            Some(gs) => gs,
            None => greedy_generators(&g),
        };
        g
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Indices of a generating set.
    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        if let Some(t) = &self.table {
            return t[a * self.order + b] as usize;
        }
        let p = self.perms.as_ref().expect("group without table has permutations");
        p.index[&p.elems[a].then(&p.elems[b])] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// `h^-1 g h`.
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(self.inv(h), g), h)
    }

    pub fn is_abelian(&self) -> bool {
        self.gens
            .iter()
            .enumerate()
            .all(|(i, &a)| self.gens[i + 1..].iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Degree of the permutation representation, if any.
    pub fn degree(&self) -> Option<usize> {
        self.perms.as_ref().map(|p| p.degree)
    }

    pub fn perm(&self, i: usize) -> Option<&Perm> {
        self.perms.as_ref().map(|p| &p.elems[i])
    }

    pub fn index_of_perm(&self, p: &Perm) -> Option<usize> {
        self.perms.as_ref().and_then(|d| d.index.get(p)).map(|&i| i as usize)
    }

    /// Cycle notation for permutation groups, the index otherwise.
    pub fn element_label(&self, i: usize) -> String {
        match self.perm(i) {
            Some(p) => p.to_string(),
            None => i.to_string(),
        }
    }

    /// Inverse of [`FiniteGroup::element_label`].
    pub fn parse_element(&self, text: &str) -> Result<usize> {
        let t = text.trim();
        match &self.perms {
            Some(d) => {
                let p = Perm::parse_cycles(t, d.degree)?;
                self.index_of_perm(&p).ok_or_else(|| Error::NotAnElement(t.to_string()))
            }
            None => {
                let i: usize = t
                    .parse()
                    .map_err(|_| Error::Malformed(format!("expected an element index, got {t:?}")))?;
                if i >= self.order {
                    return Err(Error::NotAnElement(t.to_string()));
                }
                Ok(i)
            }
        }
    }

    /// Multiplication table rows (materialised on demand for large groups).
    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        (0..self.order).map(|a| (0..self.order).map(|b| self.mul(a, b)).collect()).collect()
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn classes(&self) -> &ClassPartition {
        self.classes.get_or_init(|| ClassPartition::compute(self))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Subgroup generated by `elements`, as an element set.
    pub fn closure_set(&self, elements: &[usize]) -> ElementSet {
        let mut set = ElementSet::new(self.order);
        set.insert(0);
        let gens: Vec<usize> = elements.iter().copied().filter(|&g| g != 0).collect();
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    }

    /// Conjugacy class of `g` in the subgroup generated by `gens`.
    pub fn class_in_subgroup(&self, g: usize, gens: &[usize]) -> ElementSet {
        let mut set = ElementSet::new(self.order);
        set.insert(g);
        let mut queue = VecDeque::from([g]);
        while let Some(x) = queue.pop_front() {
            for &h in gens {
                let y = self.conj(x, h);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    }

    /// Brute-force product of element sets `A B`.
    pub fn set_product(&self, a: &ElementSet, b: &ElementSet) -> ElementSet {
        let mut out = ElementSet::new(self.order);
        let bs: Vec<usize> = b.iter().collect();
        for x in a.iter() {
            for &y in &bs {
                out.insert(self.mul(x, y));
            }
        }
        out
    }

    /// Normal closure of `elements`.
    pub fn normal_closure(&self, elements: &[usize]) -> ElementSet {
        let mut conjugates = ElementSet::new(self.order);
        for &g in elements {
            conjugates.union_with(&self.class_in_subgroup(g, &self.gens));
        }
        let gens: Vec<usize> = conjugates.iter().collect();
        self.closure_set(&gens)
    }

    /// Terms of the lower central series `G = G_0 > G_1 = [G_0, G] > ...`
    /// until it stabilises.
    pub fn lower_central_series(&self) -> Vec<ElementSet> {
        let mut series = vec![ElementSet::full(self.order)];
        loop {
            let last = series.last().expect("nonempty");
            let mut comms = Vec::new();
            for a in last.iter() {
                for &b in &self.gens {
                    let c = self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b));
                    comms.push(c);
                }
            }
            // [G_i, G] is normal, so the normal closure of the generator commutators suffices
            let next = self.normal_closure(&comms);
            if next == *last {
                return series;
            }
            series.push(next);
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last().expect("nonempty").len() == 1
    }

    pub fn center(&self) -> ElementSet {
        let mut z = ElementSet::new(self.order);
        for g in 0..self.order {
            if self.gens.iter().all(|&h| self.mul(g, h) == self.mul(h, g)) {
                z.insert(g);
            }
        }
        z
    }
}

fn greedy_generators(g: &FiniteGroup) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = g.closure_set(&[]);
    for x in 1..g.order {
        if !span.contains(x) {
            gens.push(x);
            span = g.closure_set(&gens);
            if span.len() == g.order {
                break;
            }
        }
    }
    gens
}

/// The subgroup of `S_n` generated by `generators`, enumerated breadth-first
/// from the identity by right multiplication with the generators in input
/// order.
pub fn perm_group(n: usize, generators: &[Perm], cap: usize) -> Result<FiniteGroup> {
    perm_group_labeled(n, generators, cap, format!("perm{n}"))
}

fn perm_group_labeled(n: usize, generators: &[Perm], cap: usize, label: String) -> Result<FiniteGroup> {
    for g in generators {
        if g.degree() != n {
            return Err(Error::DegreeMismatch { left: n, right: g.degree() });
        }
    }
    let id = Perm::identity(n);
    let mut elems = vec![id.clone()];
    let mut index: HashMap<Perm, u32> = HashMap::from([(id, 0)]);
    let mut gens: Vec<usize> = Vec::new();
    let mut head = 0;
    while head < elems.len() {
        let x = elems[head].clone();
        head += 1;
        for g in generators {
            let y = x.then(g);
            if !index.contains_key(&y) {
                if elems.len() >= cap {
                    return Err(Error::SizeLimit { what: "permutation group closure".into(), cap });
                }
                index.insert(y.clone(), elems.len() as u32);
                elems.push(y);
            }
        }
    }
    for g in generators {
        let i = index[g] as usize;
        if i != 0 && !gens.contains(&i) {
            gens.push(i);
        }
    }
    Ok(FiniteGroup::from_perms(label, n, elems, index, gens))
}

/// `S_n` with elements in lexicographic order of their image sequences.
pub fn symmetric_group(n: usize) -> Result<FiniteGroup> {
    if n == 0 || n > MAX_SYMMETRIC_DEGREE {
        return Err(Error::Malformed(format!(
            "symmetric group degree must be in 1..={MAX_SYMMETRIC_DEGREE}, got {n}"
        )));
    }
    let mut elems = Vec::new();
    let mut cur: Vec<u32> = (0..n as u32).collect();
    loop {
        elems.push(Perm { images: cur.clone() });
        if !next_permutation(&mut cur) {
            break;
        }
    }
    let index: HashMap<Perm, u32> = elems.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
    let mut gen_perms = Vec::new();
    if n >= 2 {
        gen_perms.push(Perm::parse_cycles("(1 2)", n)?);
    }
    if n >= 3 {
        gen_perms.push(Perm { images: (0..n as u32).map(|i| (i + 1) % n as u32).collect() });
    }
    let gens = gen_perms.iter().map(|p| index[p] as usize).collect();
    Ok(FiniteGroup::from_perms(format!("S{n}"), n, elems, index, gens))
}

fn next_permutation(v: &mut [u32]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A group from its multiplication table (`table[a][b] = a*b`, 0 the identity).
/// Every group axiom is checked; violations carry a witness.
pub fn table_group(table: &[Vec<usize>], label: &str, cap: usize) -> Result<FiniteGroup> {
    let m = table.len();
    if m == 0 {
        return Err(Error::InvalidTable { axiom: "nonempty", witness: "empty table".into() });
    }
    if m > cap {
        return Err(Error::SizeLimit { what: format!("table order {m}"), cap });
    }
    for (a, row) in table.iter().enumerate() {
        if row.len() != m {
            return Err(Error::InvalidTable {
                axiom: "square",
                witness: format!("row {a} has {} entries, expected {m}", row.len()),
            });
        }
        if let Some(b) = row.iter().position(|&x| x >= m) {
            return Err(Error::InvalidTable {
                axiom: "closure",
                witness: format!("({a}, {b}) -> {}", row[b]),
            });
        }
    }
    for a in 0..m {
        if table[0][a] != a || table[a][0] != a {
            return Err(Error::InvalidTable {
                axiom: "identity",
                witness: format!("(0, {a}) -> {}, ({a}, 0) -> {}", table[0][a], table[a][0]),
            });
        }
    }
    let mut seen = vec![usize::MAX; m];
    for a in 0..m {
        for b in 0..m {
            let x = table[a][b];
            if seen[x] == a {
                return Err(Error::InvalidTable {
                    axiom: "latin square (rows)",
                    witness: format!("row {a} repeats {x} at column {b}"),
                });
            }
            seen[x] = a;
        }
    }
    seen.fill(usize::MAX);
    for b in 0..m {
        for a in 0..m {
            let x = table[a][b];
            if seen[x] == b {
                return Err(Error::InvalidTable {
                    axiom: "latin square (columns)",
                    witness: format!("column {b} repeats {x} at row {a}"),
                });
            }
            seen[x] = b;
        }
    }
    let flat: Vec<u32> = table.iter().flatten().map(|&x| x as u32).collect();
    let at = |a: usize, b: usize| flat[a * m + b] as usize;
    let check = |a: usize, b: usize, c: usize| -> Result<()> {
        if at(at(a, b), c) != at(a, at(b, c)) {
            return Err(Error::InvalidTable {
                axiom: "associativity",
                witness: format!("({a}, {b}, {c})"),
            });
        }
        Ok(())
    };
    let g = FiniteGroup::from_table_unchecked(label.to_string(), m, flat.clone(), None);
    if m <= EXHAUSTIVE_ASSOC_LIMIT {
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    check(a, b, c)?;
                }
            }
        }
    } else {
        // Light's test: associativity on (x, s, y) for s in a generating set.
        // The generators are found by right-multiplication closure, which spans
        // the whole magma when it reaches every element.
        for &s in g.generators() {
            for a in 0..m {
                for c in 0..m {
                    check(a, s, c)?;
                }
            }
        }
    }
    for a in 0..m {
        let i = g.inv(a);
        if at(a, i) != 0 || at(i, a) != 0 {
            return Err(Error::InvalidTable { axiom: "inverse", witness: format!("element {a}") });
        }
    }
    Ok(g)
}

/// Direct product with element `(i, j)` at index `i * |H| + j`.
pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup, cap: usize) -> Result<FiniteGroup> {
    let (m, n) = (g.order(), h.order());
    let order = m * n;
    if order > cap {
        return Err(Error::SizeLimit { what: format!("direct product order {order}"), cap });
    }
    let mut table = Vec::with_capacity(order * order);
    for a in 0..order {
        for b in 0..order {
            let (a1, a2) = (a / n, a % n);
            let (b1, b2) = (b / n, b % n);
            table.push((g.mul(a1, b1) * n + h.mul(a2, b2)) as u32);
        }
    }
    Ok(FiniteGroup::from_table_unchecked(format!("{}x{}", g.label(), h.label()), order, table, None))
}

/// A subgroup together with its inclusion into the ambient group.
#[derive(Debug)]
pub struct Subgroup {
    pub group: FiniteGroup,
    /// `inclusion[i]` is the ambient index of subgroup element `i`.
    pub inclusion: Vec<usize>,
}

/// The subgroup of `g` generated by `elements`, ordered breadth-first from the
/// identity by right multiplication with the elements in input order.
pub fn image_subgroup(g: &FiniteGroup, elements: &[usize], cap: usize) -> Result<Subgroup> {
    if let Some(&bad) = elements.iter().find(|&&x| x >= g.order()) {
        return Err(Error::NotAnElement(bad.to_string()));
    }
    let label = format!("<{}>", elements.iter().map(|&x| g.element_label(x)).collect::<Vec<_>>().join(", "));
    if let Some(d) = &g.perms {
        let gens: Vec<Perm> = elements.iter().map(|&x| d.elems[x].clone()).collect();
        let sub = perm_group_labeled(d.degree, &gens, cap, label)?;
        let inclusion = (0..sub.order())
            .map(|i| g.index_of_perm(sub.perm(i).expect("perm group")).expect("closed"))
            .collect();
        return Ok(Subgroup { group: sub, inclusion });
    }
    let mut inclusion = vec![0usize];
    let mut local: HashMap<usize, u32> = HashMap::from([(0, 0)]);
    let mut head = 0;
    while head < inclusion.len() {
        let x = inclusion[head];
        head += 1;
        for &s in elements {
            let y = g.mul(x, s);
            if !local.contains_key(&y) {
                if inclusion.len() >= cap {
                    return Err(Error::SizeLimit { what: "subgroup closure".into(), cap });
                }
                local.insert(y, inclusion.len() as u32);
                inclusion.push(y);
            }
        }
    }
    let m = inclusion.len();
    let mut table = Vec::with_capacity(m * m);
    for &a in &inclusion {
        for &b in &inclusion {
            table.push(local[&g.mul(a, b)]);
        }
    }
    let mut gens = Vec::new();
    for s in elements {
        let i = local[s] as usize;
        if i != 0 && !gens.contains(&i) {
            gens.push(i);
        }
    }
    let group = FiniteGroup::from_table_unchecked(label, m, table, Some(gens));
    Ok(Subgroup { group, inclusion })
}

/// A set of element indices of one group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    bits: Vec<u64>,
    universe: usize,
}

impl ElementSet {
    pub fn new(universe: usize) -> Self {
        ElementSet { bits: vec![0; universe.div_ceil(64)], universe }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = ElementSet::new(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    pub fn from_iter(universe: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = ElementSet::new(universe);
        for i in items {
            s.insert(i);
        }
        s
    }

    /// Returns true if `i` was not already present.
    pub fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.bits[w] & b == 0;
        self.bits[w] |= b;
        fresh
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.bits[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &ElementSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word & (1u64 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

/// The partition of a group into conjugacy classes. Class ids are ordered by
/// the smallest element index in each class, so the identity class is 0.
#[derive(Debug, Clone)]
pub struct ClassPartition {
    class_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl ClassPartition {
    fn compute(g: &FiniteGroup) -> Self {
        let n = g.order();
        let mut class_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if class_of[start] != usize::MAX {
                continue;
            }
            let id = members.len();
            class_of[start] = id;
            let mut orbit = vec![start];
            let mut head = 0;
            while head < orbit.len() {
                let x = orbit[head];
                head += 1;
                for &h in g.generators() {
                    let y = g.conj(x, h);
                    if class_of[y] == usize::MAX {
                        class_of[y] = id;
                        orbit.push(y);
                    }
                }
            }
            orbit.sort_unstable();
            members.push(orbit);
        }
        let labels = class_labels(g, &members);
        ClassPartition { class_of, members, labels }
    }

    pub fn num_classes(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    /// Smallest member index.
    pub fn rep(&self, c: usize) -> usize {
        self.members[c][0]
    }

    pub fn size(&self, c: usize) -> usize {
        self.members[c].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn label(&self, c: usize) -> &str {
        &self.labels[c]
    }

    /// Resolves a class label such as `C2`, `C2,2` or the generic `K<id>`.
    pub fn find(&self, label: &str) -> Option<usize> {
        let l = label.trim();
        if let Some(c) = self.labels.iter().position(|x| x == l) {
            return Some(c);
        }
        l.strip_prefix('K')
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&c| c < self.num_classes())
    }

    pub fn element_set(&self, c: usize, universe: usize) -> ElementSet {
        ElementSet::from_iter(universe, self.members[c].iter().copied())
    }
}

/// Cycle-type labels (`C1`, `C2`, `C2,2`, ...) for permutation groups, with a
/// `#k` suffix when several classes share a cycle type; `K<id>` otherwise.
fn class_labels(g: &FiniteGroup, members: &[Vec<usize>]) -> Vec<String> {
    if g.perms.is_none() {
        return (0..members.len()).map(|c| format!("K{c}")).collect();
    }
    let base: Vec<String> = members
        .iter()
        .map(|m| {
            let t = g.perm(m[0]).expect("perm group").cycle_type();
            if t.is_empty() {
                "C1".to_string()
            } else {
                let parts: Vec<String> = t.iter().map(|l| l.to_string()).collect();
                format!("C{}", parts.join(","))
            }
        })
        .collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    base.iter()
        .map(|b| {
            let k = seen.entry(b.as_str()).or_insert(0);
            *k += 1;
            if *k == 1 {
                b.clone()
            } else {
                format!("{b}#{k}")
            }
        })
        .collect()
}

/// Classes meeting `A * B`, computed from one fixed representative of `A`.
/// The set of classes of `A * B` is conjugation invariant, so `a0 * B` meets
/// every class that `A * B` meets.
pub fn class_product(g: &FiniteGroup, a: usize, b: usize) -> BTreeSet<usize> {
    let p = g.classes();
    let a0 = p.rep(a);
    p.members(b).iter().map(|&y| p.class_of(g.mul(a0, y))).collect()
}

/// Classes meeting `[c1] [c2] ... [ck]`.
pub fn iterated_class_product(g: &FiniteGroup, classes: &[usize]) -> BTreeSet<usize> {
    let Some((&first, rest)) = classes.split_first() else {
        return BTreeSet::from([0]);
    };
    let mut cur = BTreeSet::from([first]);
    for &c in rest {
        cur = cur.iter().flat_map(|&x| class_product(g, x, c)).collect();
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    pub(crate) fn z_n(n: usize) -> FiniteGroup {
        let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        table_group(&rows, &format!("Z{n}"), DEFAULT_TABLE_CAP).unwrap()
    }

    fn q8() -> FiniteGroup {
        crate::catalog::builtin("Q8").unwrap()
    }

    fn cyc(s: &str, n: usize) -> Perm {
        Perm::parse_cycles(s, n).unwrap()
    }

    fn rand_perm(rng: &mut impl Rng, n: usize) -> Perm {
        let mut v: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            v.swap(i, rng.gen_range(0..=i));
        }
        Perm::from_images(v).unwrap()
    }

    /// Partition by conjugating every element by every element.
    fn brute_classes(g: &FiniteGroup) -> Vec<BTreeSet<usize>> {
        let mut out: Vec<BTreeSet<usize>> = Vec::new();
        for x in 0..g.order() {
            if out.iter().any(|c| c.contains(&x)) {
                continue;
            }
            out.push((0..g.order()).map(|h| g.conj(x, h)).collect());
        }
        out
    }

    fn assert_group_axioms(g: &FiniteGroup) {
        let n = g.order();
        for a in 0..n {
            assert_eq!(g.mul(0, a), a);
            assert_eq!(g.mul(a, 0), a);
            assert_eq!(g.mul(a, g.inv(a)), 0);
            let row: BTreeSet<usize> = (0..n).map(|b| g.mul(a, b)).collect();
            let col: BTreeSet<usize> = (0..n).map(|b| g.mul(b, a)).collect();
            assert_eq!(row.len(), n);
            assert_eq!(col.len(), n);
        }
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn perm_basics() {
        let p = cyc("(1 2)(3 4 5)", 5);
        assert_eq!(p.to_string(), "(1 2)(3 4 5)");
        assert_eq!(p.cycle_type(), vec![2, 3]);
        assert_eq!(p.fixed_points(), 0);
        assert!(!p.is_even());
        assert_eq!(p.then(&p.inverse()), Perm::identity(5));
        assert_eq!(cyc("(1,2)", 3), cyc("(1 2)", 3));
        assert_eq!(cyc("()", 4), Perm::identity(4));
        assert!(Perm::parse_cycles("(1 2 1)", 3).is_err());
        assert!(Perm::parse_cycles("(1 4)", 3).is_err());
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert_eq!(Perm::from_one_based(&[2, 1, 3]).unwrap(), cyc("(1 2)", 3));
        // right action: (1 2) then (1 2 3) sends 1 -> 2 -> 3
        assert_eq!(cyc("(1 2)", 3).then(&cyc("(1 2 3)", 3)), cyc("(1 3)", 3));
    }

    #[test]
    fn perm_group_examples() {
        assert_eq!(perm_group(3, &[cyc("(1 2)", 3), cyc("(1 2 3)", 3)], DEFAULT_PERM_CAP).unwrap().order(), 6);
        let s5 = perm_group(5, &[cyc("(1 2)", 5), cyc("(1 2 3 4 5)", 5)], DEFAULT_PERM_CAP).unwrap();
        assert_eq!(s5.order(), 120);
        assert_eq!(perm_group(4, &[], DEFAULT_PERM_CAP).unwrap().order(), 1);
        let err = perm_group(5, &[cyc("(1 2)", 5), cyc("(1 2 3 4 5)", 5)], 100).unwrap_err();
        assert_eq!(err, Error::SizeLimit { what: "permutation group closure".into(), cap: 100 });
        assert!(err.to_string().contains("100"));
        assert!(matches!(perm_group(4, &[cyc("(1 2)", 3)], 10), Err(Error::DegreeMismatch { .. })));
        assert_group_axioms(&s5);
    }

    #[test]
    fn symmetric_group_examples() {
        assert_eq!(symmetric_group(1).unwrap().order(), 1);
        let s4 = symmetric_group(4).unwrap();
        assert_eq!(s4.order(), 24);
        assert_eq!(s4.classes().num_classes(), 5);
        let s5 = symmetric_group(5).unwrap();
        assert_eq!(s5.order(), 120);
        assert_eq!(s5.classes().num_classes(), 7);
        assert!(symmetric_group(0).is_err());
        assert!(symmetric_group(9).is_err());
        // lexicographic order of image sequences
        for i in 1..s4.order() {
            assert!(s4.perm(i - 1).unwrap() < s4.perm(i).unwrap());
        }
        assert!(s4.perm(0).unwrap().is_identity());
    }

    #[test]
    fn s5_class_labels_follow_first_occurrence() {
        let s5 = symmetric_group(5).unwrap();
        let p = s5.classes();
        let labels: Vec<&str> = (0..7).map(|c| p.label(c)).collect();
        assert_eq!(labels, ["C1", "C2", "C3", "C2,2", "C4", "C2,3", "C5"]);
        assert_eq!(p.sizes(), vec![1, 10, 20, 15, 30, 20, 24]);
        assert_eq!(p.find("C2,2"), Some(3));
        assert_eq!(p.find("K6"), Some(6));
        assert_eq!(p.find("C7"), None);
    }

    #[test]
    fn table_group_examples() {
        let triv = table_group(&[vec![0]], "1", DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(triv.order(), 1);
        let z4 = z_n(4);
        assert_eq!(z4.order(), 4);
        assert!(z4.is_abelian());
        assert_eq!(z4.classes().sizes(), vec![1, 1, 1, 1]);
        let q = q8();
        assert_eq!(q.order(), 8);
        let mut sizes = q.classes().sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 2, 2, 2]);
    }

    #[test]
    fn table_group_rejects_with_witness() {
        let bad_id = vec![vec![1, 0], vec![0, 1]];
        assert!(matches!(table_group(&bad_id, "x", 10), Err(Error::InvalidTable { axiom: "identity", .. })));
        let not_latin = vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 0, 1]];
        assert!(matches!(
            table_group(&not_latin, "x", 10),
            Err(Error::InvalidTable { axiom: "latin square (rows)", .. })
        ));
        // a loop of order 5 that is not associative
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        match table_group(&loop5, "loop", 10) {
            Err(Error::InvalidTable { axiom: "associativity", witness }) => assert!(witness.starts_with('(')),
            other => panic!("expected associativity failure, got {other:?}"),
        }
        assert!(matches!(table_group(&[vec![0, 1], vec![1]], "x", 10), Err(Error::InvalidTable { axiom: "square", .. })));
        assert!(matches!(table_group(&[vec![0, 1], vec![1, 2]], "x", 10), Err(Error::InvalidTable { axiom: "closure", .. })));
        assert!(matches!(table_group(&[vec![0]], "x", 0), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn light_test_path_accepts_large_tables() {
        let n = 300;
        let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        assert_eq!(table_group(&rows, "Z300", DEFAULT_TABLE_CAP).unwrap().order(), 300);
        // flip the intercalate on rows/cols {1, 151}: still a latin square with
        // identity, no longer associative
        let mut bad = rows.clone();
        bad[1][1] = 152;
        bad[1][151] = 2;
        bad[151][1] = 2;
        bad[151][151] = 152;
        let err = table_group(&bad, "bad", DEFAULT_TABLE_CAP).unwrap_err();
        assert!(matches!(err, Error::InvalidTable { axiom: "associativity", .. }), "{err:?}");
    }

    #[test]
    fn classes_match_brute_force() {
        let groups = [symmetric_group(3).unwrap(), symmetric_group(4).unwrap(), q8(), z_n(6)];
        for g in &groups {
            let p = g.classes();
            let brute = brute_classes(g);
            assert_eq!(p.num_classes(), brute.len(), "{}", g.label());
            for c in 0..p.num_classes() {
                let mine: BTreeSet<usize> = p.members(c).iter().copied().collect();
                assert!(brute.contains(&mine));
            }
            for c in 1..p.num_classes() {
                assert!(p.rep(c - 1) < p.rep(c));
            }
            assert_eq!(p.members(0), &[0]);
            assert_eq!(p.sizes().iter().sum::<usize>(), g.order());
        }
        let s3 = symmetric_group(3).unwrap();
        assert_eq!(s3.classes().sizes(), vec![1, 3, 2]);
    }

    #[test]
    fn class_product_examples() {
        let s5 = symmetric_group(5).unwrap();
        let p = s5.classes();
        let id = |l: &str| p.find(l).unwrap();
        for b in 0..p.num_classes() {
            assert_eq!(class_product(&s5, 0, b), BTreeSet::from([b]));
        }
        assert_eq!(class_product(&s5, id("C2"), id("C2")), BTreeSet::from([id("C1"), id("C3"), id("C2,2")]));
        assert_eq!(class_product(&s5, id("C2"), id("C3")), BTreeSet::from([id("C2"), id("C4"), id("C2,3")]));
        assert_eq!(iterated_class_product(&s5, &[id("C3")]), BTreeSet::from([id("C3")]));
        assert_eq!(
            iterated_class_product(&s5, &[id("C2"), id("C2"), id("C2")]),
            BTreeSet::from([id("C2"), id("C4"), id("C2,3")])
        );
        let z4 = z_n(4);
        assert_eq!(iterated_class_product(&z4, &[1, 1]), BTreeSet::from([2]));
    }

    #[test]
    fn class_product_matches_double_loop() {
        for g in [symmetric_group(4).unwrap(), q8()] {
            let p = g.classes();
            for a in 0..p.num_classes() {
                for b in 0..p.num_classes() {
                    let brute: BTreeSet<usize> = p
                        .members(a)
                        .iter()
                        .flat_map(|&x| p.members(b).iter().map(move |&y| (x, y)))
                        .map(|(x, y)| p.class_of(g.mul(x, y)))
                        .collect();
                    assert_eq!(class_product(&g, a, b), brute);
                }
            }
        }
    }

    #[test]
    fn square_embed_examples() {
        let e3 = Perm::identity(3);
        assert_eq!(square_embed(&e3, &e3).unwrap(), Perm::identity(9));
        let f = cyc("(1 2)", 2);
        let e2 = Perm::identity(2);
        // codes (1,1)=1 (1,2)=2 (2,1)=3 (2,2)=4
        assert_eq!(square_embed(&f, &e2).unwrap(), cyc("(1 3)(2 4)", 4));
        assert!(matches!(square_embed(&f, &e3), Err(Error::DegreeMismatch { .. })));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (f, g) = (rand_perm(&mut rng, 5), rand_perm(&mut rng, 5));
            assert_eq!(square_embed(&f, &g).unwrap().fixed_points(), f.fixed_points() * g.fixed_points());
        }
    }

    #[test]
    fn square_embed_is_homomorphic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let (f1, f2, g1, g2) =
                (rand_perm(&mut rng, 4), rand_perm(&mut rng, 4), rand_perm(&mut rng, 4), rand_perm(&mut rng, 4));
            let lhs = square_embed(&f1.then(&f2), &g1.then(&g2)).unwrap();
            let rhs = square_embed(&f1, &g1).unwrap().then(&square_embed(&f2, &g2).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn image_subgroup_examples() {
        let s5 = symmetric_group(5).unwrap();
        let triv = image_subgroup(&s5, &[0], DEFAULT_PERM_CAP).unwrap();
        assert_eq!(triv.group.order(), 1);
        let c5 = s5.parse_element("(1 2 3 4 5)").unwrap();
        let sub = image_subgroup(&s5, &[c5], DEFAULT_PERM_CAP).unwrap();
        assert_eq!(sub.group.order(), 5);
        assert!(sub.group.is_abelian());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(sub.inclusion[sub.group.mul(i, j)], s5.mul(sub.inclusion[i], sub.inclusion[j]));
            }
        }
        let s4 = symmetric_group(4).unwrap();
        let gens = [s4.parse_element("(1 2)").unwrap(), s4.parse_element("(1 2 3 4)").unwrap()];
        assert_eq!(image_subgroup(&s4, &gens, DEFAULT_PERM_CAP).unwrap().group.order(), 24);
        let q = q8();
        let sub = image_subgroup(&q, &[2], DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(sub.group.order(), q.closure_set(&[2]).len());
        assert_group_axioms(&sub.group);
        assert!(matches!(image_subgroup(&q, &[99], 10), Err(Error::NotAnElement(_))));
    }

    #[test]
    fn direct_product_and_series() {
        let z2 = z_n(2);
        let v4 = direct_product(&z2, &z2, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(v4.order(), 4);
        assert!(v4.is_abelian());
        assert_eq!(v4.mul(2, 1), 3);
        assert_group_axioms(&v4);
        assert!(v4.is_nilpotent());
        assert!(q8().is_nilpotent());
        assert!(!symmetric_group(3).unwrap().is_nilpotent());
        assert_eq!(q8().center().len(), 2);
        let s4 = symmetric_group(4).unwrap();
        let series: Vec<usize> = s4.lower_central_series().iter().map(ElementSet::len).collect();
        assert_eq!(series, vec![24, 12]);
        let t = s4.parse_element("(1 2)").unwrap();
        assert_eq!(s4.normal_closure(&[t]).len(), 24);
        let c3 = s4.parse_element("(1 2 3)").unwrap();
        assert_eq!(s4.normal_closure(&[c3]).len(), 12);
    }
}
