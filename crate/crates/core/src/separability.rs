//! Separation of a normal subgroup by a homomorphism, membership in products
//! of conjugacy classes, and the closure experiments built on them.
//!
//! `N` is only ever seen through a finite quotient model ([`NOracle`]), so
//! every verdict here is exact.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::catalog::{parse_group, to_table_text};
use crate::error::{Error, Result};
use crate::groups::{iterated_class_product, Caps, ElementSet, FiniteGroup};
use crate::metrics::{MetricTarget, Norm, NormValue};
use crate::words::{ball, ball_size, evaluate, GenImages, Word};

/// Largest ball enumerated by [`check_separation`].
pub const MAX_BALL_WORDS: u128 = 1 << 22;
/// Largest tuple space searched in exhaustive mode.
pub const EXHAUSTIVE_TUPLE_LIMIT: u128 = 20_000_000;
/// Tuples per parallel batch; also the granularity of the log.
pub const BATCH_SIZE: usize = 4096;

/// Membership oracle for `N = ker(F -> Q)`.
#[derive(Debug, Clone)]
pub struct NOracle<'a> {
    quotient: &'a FiniteGroup,
    model: GenImages<usize>,
}

impl<'a> NOracle<'a> {
    pub fn new(quotient: &'a FiniteGroup, model: GenImages<usize>) -> Result<Self> {
        if let Some(&bad) = model.images().iter().find(|&&x| x >= quotient.order()) {
            return Err(Error::NotAnElement(format!("{bad} in {}", quotient.label())));
        }
        Ok(NOracle { quotient, model })
    }

    pub fn rank(&self) -> usize {
        self.model.rank()
    }

    pub fn quotient(&self) -> &'a FiniteGroup {
        self.quotient
    }

    pub fn model(&self) -> &GenImages<usize> {
        &self.model
    }

    /// The coset `[w]_N`, as an element of the quotient.
    pub fn image(&self, w: &Word) -> Result<usize> {
        evaluate(w, &self.model, self.quotient)
    }

    pub fn contains(&self, w: &Word) -> Result<bool> {
        Ok(self.image(w)? == 0)
    }

    pub fn same_coset(&self, a: &Word, b: &Word) -> Result<bool> {
        Ok(self.image(a)? == self.image(b)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub word: Word,
    pub distance: NormValue,
    /// Whether the word lies in `N` (and so should have landed below `eps`).
    pub in_n: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationVerdict {
    pub r: usize,
    pub eps: NormValue,
    pub delta: NormValue,
    pub words_checked: usize,
    pub violations: Vec<Violation>,
}

impl SeparationVerdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SeparationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "r = {}, eps = {}, delta = {}", self.r, self.eps, self.delta)?;
        writeln!(f, "words checked: {}", self.words_checked)?;
        for v in &self.violations {
            let side = if v.in_n { "in N, needs < eps" } else { "outside N, needs > delta" };
            writeln!(f, "violation: {} at distance {} ({side})", v.word, v.distance)?;
        }
        writeln!(f, "verdict: {}", if self.pass() { "separated" } else { "not separated" })
    }
}

/// Checks that `gi` `(r, eps, delta)`-separates `N`: words of length at most
/// `r` in `N` land strictly within `eps` of the identity, all others strictly
/// beyond `delta`.
pub fn check_separation<T: MetricTarget>(
    target: &T,
    gi: &GenImages<T::Elem>,
    oracle: &NOracle,
    r: usize,
    eps: NormValue,
    delta: NormValue,
) -> Result<SeparationVerdict> {
    if !eps.lt(delta) {
        return Err(Error::Malformed(format!("need eps < delta, got {eps} and {delta}")));
    }
    if gi.rank() != oracle.rank() {
        return Err(Error::RankMismatch { left: gi.rank(), right: oracle.rank() });
    }
    let size = ball_size(gi.rank(), r);
    if size > MAX_BALL_WORDS {
        return Err(Error::SizeLimit { what: format!("ball of radius {r} ({size} words)"), cap: MAX_BALL_WORDS as usize });
    }
    let words = ball(gi.rank(), r);
    let e = target.identity();
    let checked: Vec<Option<Violation>> = words
        .par_iter()
        .map(|w| {
            let d = target.dist(&evaluate(w, gi, target)?, &e);
            let in_n = oracle.contains(w)?;
            let ok = if in_n { d.lt(eps) } else { d.gt(delta) };
            Ok((!ok).then(|| Violation { word: w.clone(), distance: d, in_n }))
        })
        .collect::<Result<_>>()?;
    Ok(SeparationVerdict { r, eps, delta, words_checked: words.len(), violations: checked.into_iter().flatten().collect() })
}

/// Whether `h` lies in `[hs_1] [hs_2] ... [hs_k]`, decided on classes.
pub fn class_product_membership(g: &FiniteGroup, h: usize, hs: &[usize]) -> bool {
    let p = g.classes();
    let classes: Vec<usize> = hs.iter().map(|&x| p.class_of(x)).collect();
    iterated_class_product(g, &classes).contains(&p.class_of(h))
}

/// Product of element sets `S_1 S_2 ... S_k`, with `{e}` for `k = 0`.
pub fn element_set_product(g: &FiniteGroup, sets: &[ElementSet]) -> ElementSet {
    let mut acc = ElementSet::from_iter(g.order(), [0]);
    for s in sets {
        acc = g.set_product(&acc, s);
    }
    acc
}

/// Whether `h` lies in `[hs_1] ... [hs_k]`, by enumerating elements.
pub fn brute_force_membership(g: &FiniteGroup, h: usize, hs: &[usize]) -> bool {
    let p = g.classes();
    let sets: Vec<ElementSet> = hs.iter().map(|&x| p.element_set(p.class_of(x), g.order())).collect();
    element_set_product(g, &sets).contains(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleReport {
    /// `||h||`
    pub lhs: NormValue,
    /// `sum ||hs_i||`
    pub rhs: NormValue,
}

impl TriangleReport {
    pub fn pass(&self) -> bool {
        self.lhs.le(self.rhs)
    }
}

/// For `h` in `[hs_1] ... [hs_k]`, a bi-invariant norm must satisfy
/// `||h|| <= sum ||hs_i||`. A failure means the norm is broken.
pub fn triangle_bound_check(g: &FiniteGroup, norm: &Norm, h: usize, hs: &[usize]) -> Result<TriangleReport> {
    if !class_product_membership(g, h, hs) {
        return Err(Error::Inapplicable(format!(
            "{} is not in the product of the classes of the given elements",
            g.element_label(h)
        )));
    }
    let rhs = hs.iter().fold(NormValue::zero(), |acc, &x| acc.add(norm.value(x)));
    Ok(TriangleReport { lhs: norm.value(h), rhs })
}

/// The words `g_1, ..., g_k` and `w` of a closure experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureProblem {
    pub g_words: Vec<Word>,
    pub w: Word,
}

impl ClosureProblem {
    pub fn new(g_words: Vec<Word>, w: Word) -> Result<Self> {
        if let Some(g) = g_words.iter().find(|g| g.rank() != w.rank()) {
            return Err(Error::RankMismatch { left: g.rank(), right: w.rank() });
        }
        Ok(ClosureProblem { g_words, w })
    }

    pub fn rank(&self) -> usize {
        self.w.rank()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Every tuple of generator images.
    Exhaustive,
    /// `count` uniform tuples per group from a ChaCha8 stream seeded by `seed`.
    Sampled { count: u64, seed: u64 },
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchMode::Exhaustive => write!(f, "exhaustive"),
            SearchMode::Sampled { count, seed } => write!(f, "sampled:{count} seed {seed}"),
        }
    }
}

/// Parses `exhaustive` or `sampled:<count>`; sampling requires a seed.
pub fn parse_mode(text: &str, seed: Option<u64>) -> Result<SearchMode> {
    let text = text.trim();
    if text == "exhaustive" {
        return Ok(SearchMode::Exhaustive);
    }
    let count = text
        .strip_prefix("sampled:")
        .ok_or_else(|| Error::Malformed(format!("unknown mode {text:?}, expected exhaustive or sampled:<count>")))?;
    let count = u64::from_str(count.trim()).map_err(|_| Error::Malformed(format!("bad sample count {count:?}")))?;
    let seed = seed.ok_or_else(|| Error::Malformed("sampled mode requires an explicit seed".into()))?;
    Ok(SearchMode::Sampled { count, seed })
}

/// A catalog slot: a loaded group, or a reference that could not be used.
#[derive(Debug)]
pub enum CatalogEntry {
    Loaded(FiniteGroup),
    Unavailable { reference: String, reason: String },
}

impl CatalogEntry {
    pub fn label(&self) -> &str {
        match self {
            CatalogEntry::Loaded(g) => g.label(),
            CatalogEntry::Unavailable { reference, .. } => reference,
        }
    }
}

/// One line of the closure log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosureRecord {
    Batch {
        run_id: String,
        group: String,
        batch: usize,
        tuples_tested: u64,
        memberships: u64,
        witnesses: u64,
    },
    Skipped {
        run_id: String,
        group: String,
        reason: String,
    },
    Witness {
        run_id: String,
        group: String,
        tuple: u64,
        images: Vec<String>,
        w_image: String,
        g_images: Vec<String>,
        class_sizes: Vec<usize>,
        image_order: usize,
        product_size: usize,
    },
    Summary {
        run_id: String,
        groups_searched: usize,
        groups_skipped: usize,
        tuples_tested: u64,
        memberships: u64,
        witnesses: u64,
        verdict: String,
    },
}

/// A homomorphism under which `phi(w)` misses `[phi(g_1)]^I ... [phi(g_k)]^I`,
/// `I` the image. Only produced after element-level re-verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureWitness {
    /// Position of the target group in the catalog.
    pub group_index: usize,
    pub group_label: String,
    pub hom: GenImages<usize>,
    pub w_image: usize,
    pub g_images: Vec<usize>,
    /// Classes of the `phi(g_i)` in the image subgroup, as sorted elements.
    pub classes: Vec<Vec<usize>>,
    pub image_order: usize,
    pub product_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureOutcome {
    pub run_id: String,
    pub records: Vec<ClosureRecord>,
    pub witness: Option<ClosureWitness>,
    pub tuples_tested: u64,
    pub memberships: u64,
}

impl ClosureOutcome {
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialise"));
            out.push('\n');
        }
        out
    }
}

/// Run identifier: a hash of everything that determines the log.
pub fn run_id(problem: &ClosureProblem, labels: &[&str], mode: SearchMode) -> String {
    let mut h = Sha256::new();
    h.update(format!("rank {}\n", problem.rank()));
    for g in &problem.g_words {
        h.update(format!("g {g}\n"));
    }
    h.update(format!("w {}\n", problem.w));
    for l in labels {
        h.update(format!("catalog {l}\n"));
    }
    h.update(format!("mode {mode}\n"));
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

struct TupleOutcome {
    member: bool,
    w_image: usize,
    g_images: Vec<usize>,
    classes: Vec<ElementSet>,
}

fn test_tuple(g: &FiniteGroup, problem: &ClosureProblem, images: &[usize]) -> Result<TupleOutcome> {
    let gi = GenImages::new(images.to_vec())?;
    let w_image = evaluate(&problem.w, &gi, g)?;
    let g_images = problem.g_words.iter().map(|x| evaluate(x, &gi, g)).collect::<Result<Vec<_>>>()?;
    let gens: Vec<usize> = images.iter().copied().filter(|&x| x != 0).collect();
    let classes: Vec<ElementSet> = g_images.iter().map(|&x| g.class_in_subgroup(x, &gens)).collect();
    let member = match classes.split_last() {
        None => w_image == 0,
        Some((last, init)) => {
            let prefix = element_set_product(g, init);
            let found = prefix.iter().any(|p| last.contains(g.mul(g.inv(p), w_image)));
            found
        }
    };
    Ok(TupleOutcome { member, w_image, g_images, classes })
}

fn tuple_images(mut t: u64, m: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for slot in out.iter_mut().rev() {
        *slot = (t % m as u64) as usize;
        t /= m as u64;
    }
    out
}

/// Searches homomorphisms `F -> H` over the catalog, in catalog order, for
/// one under which `phi(w)` leaves the product of the image classes of the
/// `phi(g_i)`. Stops at the first witness.
pub fn closure_search(
    problem: &ClosureProblem,
    catalog: &[CatalogEntry],
    mode: SearchMode,
    run_id_override: Option<&str>,
) -> Result<ClosureOutcome> {
    let labels: Vec<&str> = catalog.iter().map(|e| e.label()).collect();
    let run_id = run_id_override.map_or_else(|| run_id(problem, &labels, mode), str::to_string);
    let rank = problem.rank();
    let mut records = Vec::new();
    let (mut searched, mut skipped, mut tested_total, mut member_total) = (0usize, 0usize, 0u64, 0u64);
    let mut rng = match mode {
        SearchMode::Sampled { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        SearchMode::Exhaustive => None,
    };
    let mut witness = None;

    'groups: for (gidx, entry) in catalog.iter().enumerate() {
        let g = match entry {
            CatalogEntry::Loaded(g) => g,
            CatalogEntry::Unavailable { reference, reason } => {
                skipped += 1;
                records.push(ClosureRecord::Skipped { run_id: run_id.clone(), group: reference.clone(), reason: reason.clone() });
                continue;
            }
        };
        let m = g.order();
        let total: u64 = match mode {
            SearchMode::Exhaustive => {
                let space = (m as u128).checked_pow(rank as u32).unwrap_or(u128::MAX);
                if space > EXHAUSTIVE_TUPLE_LIMIT {
                    skipped += 1;
                    records.push(ClosureRecord::Skipped {
                        run_id: run_id.clone(),
                        group: g.label().to_string(),
                        reason: format!("{space} tuples exceed the exhaustive limit {EXHAUSTIVE_TUPLE_LIMIT}; use sampled mode"),
                    });
                    continue;
                }
                space as u64
            }
            SearchMode::Sampled { count, .. } => count,
        };
        searched += 1;
        let mut start = 0u64;
        let mut batch = 0usize;
        while start < total {
            let end = (start + BATCH_SIZE as u64).min(total);
            let tuples: Vec<Vec<usize>> = match rng.as_mut() {
                None => (start..end).map(|t| tuple_images(t, m, rank)).collect(),
                Some(r) => (start..end).map(|_| (0..rank).map(|_| r.gen_range(0..m)).collect()).collect(),
            };
            let results: Vec<bool> =
                tuples.par_iter().map(|t| test_tuple(g, problem, t).map(|o| o.member)).collect::<Result<_>>()?;
            let first_miss = results.iter().position(|&b| !b);
            let tested = first_miss.map_or(results.len(), |i| i + 1) as u64;
            let members = results[..tested as usize].iter().filter(|&&b| b).count() as u64;
            tested_total += tested;
            member_total += members;
            records.push(ClosureRecord::Batch {
                run_id: run_id.clone(),
                group: g.label().to_string(),
                batch,
                tuples_tested: tested,
                memberships: members,
                witnesses: u64::from(first_miss.is_some()),
            });
            if let Some(i) = first_miss {
                let images = tuples[i].clone();
                let w = verified_witness(g, gidx, problem, &images)?;
                records.push(ClosureRecord::Witness {
                    run_id: run_id.clone(),
                    group: g.label().to_string(),
                    tuple: start + i as u64,
                    images: images.iter().map(|&x| g.element_label(x)).collect(),
                    w_image: g.element_label(w.w_image),
                    g_images: w.g_images.iter().map(|&x| g.element_label(x)).collect(),
                    class_sizes: w.classes.iter().map(Vec::len).collect(),
                    image_order: w.image_order,
                    product_size: w.product_size,
                });
                witness = Some(w);
                break 'groups;
            }
            start = end;
            batch += 1;
        }
    }
    records.push(ClosureRecord::Summary {
        run_id: run_id.clone(),
        groups_searched: searched,
        groups_skipped: skipped,
        tuples_tested: tested_total,
        memberships: member_total,
        witnesses: u64::from(witness.is_some()),
        verdict: if witness.is_some() { "witness" } else { "exhausted" }.to_string(),
    });
    Ok(ClosureOutcome { run_id, records, witness, tuples_tested: tested_total, memberships: member_total })
}

/// Recomputes the full element-set product before accepting a witness.
fn verified_witness(g: &FiniteGroup, gidx: usize, problem: &ClosureProblem, images: &[usize]) -> Result<ClosureWitness> {
    let o = test_tuple(g, problem, images)?;
    let product = element_set_product(g, &o.classes);
    if o.member || product.contains(o.w_image) {
        return Err(Error::CertificateRefused(format!(
            "candidate witness in {} failed element-level re-verification",
            g.label()
        )));
    }
    let gens: Vec<usize> = images.to_vec();
    Ok(ClosureWitness {
        group_index: gidx,
        group_label: g.label().to_string(),
        hom: GenImages::new(images.to_vec())?,
        w_image: o.w_image,
        g_images: o.g_images,
        classes: o.classes.iter().map(|c| c.iter().collect()).collect(),
        image_order: g.closure_set(&gens).len(),
        product_size: product.len(),
    })
}

/// An ascending chain `S ⊆ S^2 ⊆ ...` and where it stops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub sizes: Vec<usize>,
    /// Least `n` with `S^n = S^(n+1)`.
    pub n_star: usize,
    pub stabilized: ElementSet,
}

fn power_chain(g: &FiniteGroup, s: &ElementSet) -> Chain {
    let mut cur = s.clone();
    let mut sizes = vec![cur.len()];
    loop {
        let next = g.set_product(&cur, s);
        if next == cur {
            return Chain { n_star: sizes.len(), sizes, stabilized: cur };
        }
        sizes.push(next.len());
        cur = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationReport {
    /// `S = [g_1][g_1^-1] ... [g_k][g_k^-1]`, taken literally.
    pub literal: Chain,
    /// `S' = {e} ∪ [g_1] ∪ [g_1^-1] ∪ ... ∪ [g_k] ∪ [g_k^-1]`.
    pub variant: Chain,
    pub normal_closure: ElementSet,
}

impl StabilizationReport {
    pub fn literal_is_normal_closure(&self) -> bool {
        self.literal.stabilized == self.normal_closure
    }

    pub fn variant_is_normal_closure(&self) -> bool {
        self.variant.stabilized == self.normal_closure
    }

    pub fn variants_agree(&self) -> bool {
        self.literal.stabilized == self.variant.stabilized
    }
}

impl fmt::Display for StabilizationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes = |c: &Chain| c.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(f, "literal S: chain sizes {}, n* = {}, stabilized size {}", sizes(&self.literal), self.literal.n_star, self.literal.stabilized.len())?;
        writeln!(f, "variant S': chain sizes {}, n* = {}, stabilized size {}", sizes(&self.variant), self.variant.n_star, self.variant.stabilized.len())?;
        writeln!(f, "normal closure size {}", self.normal_closure.len())?;
        writeln!(f, "literal = normal closure: {}", self.literal_is_normal_closure())?;
        writeln!(f, "variant = normal closure: {}", self.variant_is_normal_closure())?;
        writeln!(f, "literal = variant: {}", self.variants_agree())
    }
}

/// Iterates `S^n` for the literal product of the classes of the `g_i` and
/// their inverses, and for the symmetrised union `S'`.
pub fn stabilization(g: &FiniteGroup, elements: &[usize]) -> Result<StabilizationReport> {
    if let Some(&bad) = elements.iter().find(|&&x| x >= g.order()) {
        return Err(Error::NotAnElement(format!("{bad} in {}", g.label())));
    }
    let p = g.classes();
    let class_set = |x: usize| p.element_set(p.class_of(x), g.order());
    let mut factors = Vec::new();
    let mut union = ElementSet::from_iter(g.order(), [0]);
    for &x in elements {
        let (c, ci) = (class_set(x), class_set(g.inv(x)));
        union.union_with(&c);
        union.union_with(&ci);
        factors.push(c);
        factors.push(ci);
    }
    let s = element_set_product(g, &factors);
    Ok(StabilizationReport {
        literal: power_chain(g, &s),
        variant: power_chain(g, &union),
        normal_closure: g.normal_closure(elements),
    })
}

/// A self-contained record of a homomorphism `F -> H` under which `phi(w)`
/// lies outside `[phi(g_1)]^I ... [phi(g_k)]^I`, `I` the image.
#[derive(Debug)]
pub struct NonmemberCertificate {
    pub problem: ClosureProblem,
    pub group: FiniteGroup,
    pub hom: GenImages<usize>,
}

const CERT_HEADER: &str = "nonmember-certificate v1";

/// A group in catalog format: generators for permutation groups, the table
/// otherwise.
pub fn group_text(g: &FiniteGroup) -> String {
    match g.degree() {
        Some(n) => {
            let mut s = format!("perm {n} {}\n", g.label().replace(char::is_whitespace, "_"));
            for &x in g.generators() {
                s.push_str(&g.element_label(x));
                s.push('\n');
            }
            s
        }
        None => to_table_text(g),
    }
}

/// Outcome of replaying a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateCheck {
    pub valid: bool,
    pub w_image: String,
    pub image_order: usize,
    pub product_size: usize,
}

impl fmt::Display for CertificateCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "phi(w) = {}", self.w_image)?;
        writeln!(f, "image subgroup order {}, class product size {}", self.image_order, self.product_size)?;
        writeln!(f, "certificate: {}", if self.valid { "valid" } else { "refuted" })
    }
}

impl NonmemberCertificate {
    /// Recomputes everything by element enumeration.
    pub fn check(&self) -> Result<CertificateCheck> {
        let g = &self.group;
        let images = self.hom.images();
        let w_image = evaluate(&self.problem.w, &self.hom, g)?;
        let gens: Vec<usize> = images.iter().copied().filter(|&x| x != 0).collect();
        let classes = self
            .problem
            .g_words
            .iter()
            .map(|x| Ok(g.class_in_subgroup(evaluate(x, &self.hom, g)?, &gens)))
            .collect::<Result<Vec<_>>>()?;
        let product = element_set_product(g, &classes);
        Ok(CertificateCheck {
            valid: !product.contains(w_image),
            w_image: g.element_label(w_image),
            image_order: g.closure_set(&gens).len(),
            product_size: product.len(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{CERT_HEADER}\nrank {}\n", self.problem.rank());
        for g in &self.problem.g_words {
            s.push_str(&format!("g {g}\n"));
        }
        s.push_str(&format!("w {}\ngroup begin\n", self.problem.w));
        s.push_str(&group_text(&self.group));
        s.push_str("group end\n");
        for &x in self.hom.images() {
            s.push_str(&format!("image {}\n", self.group.element_label(x)));
        }
        s
    }

    pub fn parse(text: &str, caps: Caps) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, CERT_HEADER)) => {}
            Some((ln, other)) => return Err(err(ln, format!("expected {CERT_HEADER:?}, found {other:?}"))),
            None => return Err(err(1, "empty certificate".into())),
        }
        let mut rank = None;
        let (mut g_words, mut w, mut images) = (Vec::new(), None, Vec::new());
        let mut group_lines: Option<Vec<&str>> = None;
        let mut group = None;
        let mut group_line = 0;
        for (ln, l) in lines {
            if let Some(buf) = group_lines.as_mut() {
                if l == "group end" {
                    let g = parse_group(&buf.join("\n"), caps).map_err(|e| err(group_line, format!("embedded group: {e}")))?;
                    group = Some(g);
                    group_lines = None;
                } else {
                    buf.push(l);
                }
                continue;
            }
            let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let rest = rest.trim();
            let need_rank = || rank.ok_or_else(|| err(ln, "rank must come first".into()));
            match key {
                "rank" => rank = Some(rest.parse::<usize>().map_err(|_| err(ln, format!("bad rank {rest:?}")))?),
                "g" => g_words.push(Word::parse(rest, need_rank()?).map_err(|e| err(ln, e.to_string()))?),
                "w" => w = Some(Word::parse(rest, need_rank()?).map_err(|e| err(ln, e.to_string()))?),
                "group" if rest == "begin" => {
                    group_lines = Some(Vec::new());
                    group_line = ln;
                }
                "image" => {
                    let g: &FiniteGroup = group.as_ref().ok_or_else(|| err(ln, "image before group".into()))?;
                    images.push(g.parse_element(rest).map_err(|e| err(ln, e.to_string()))?);
                }
                _ => return Err(err(ln, format!("unknown field {key:?}"))),
            }
        }
        if group_lines.is_some() {
            return Err(err(group_line, "unterminated group block".into()));
        }
        let w = w.ok_or_else(|| err(0, "missing w".into()))?;
        let group = group.ok_or_else(|| err(0, "missing group".into()))?;
        if images.len() != w.rank() {
            return Err(err(0, format!("expected {} images, found {}", w.rank(), images.len())));
        }
        let problem = ClosureProblem::new(g_words, w)?;
        Ok(NonmemberCertificate { problem, group, hom: GenImages::new(images)? })
    }
}

/// Packages one homomorphism as a certificate that `w` lies outside the
/// closure of `[g_1]^F ... [g_k]^F`, refusing if membership holds.
pub fn profinite_nonmember_certificate(
    problem: &ClosureProblem,
    group: FiniteGroup,
    hom: GenImages<usize>,
) -> Result<NonmemberCertificate> {
    if hom.rank() != problem.rank() {
        return Err(Error::RankMismatch { left: hom.rank(), right: problem.rank() });
    }
    if let Some(&bad) = hom.images().iter().find(|&&x| x >= group.order()) {
        return Err(Error::NotAnElement(format!("{bad} in {}", group.label())));
    }
    let cert = NonmemberCertificate { problem: problem.clone(), group, hom };
    let check = cert.check()?;
    if !check.valid {
        return Err(Error::CertificateRefused(format!("phi(w) = {} lies in the class product", check.w_image)));
    }
    Ok(cert)
}
