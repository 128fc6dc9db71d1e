//! Bi-invariant norms on finite groups.
//!
//! A norm is a class function `||.||` with `||e|| = 0`, `||g^-1|| = ||g||`
//! and `||gh|| <= ||g|| + ||h||`; it induces the bi-invariant metric
//! `d(a, b) = ||a b^-1||`. Values that vanish off the identity are allowed
//! (semimetrics); [`norm_kernel`] recovers the normal subgroup they vanish on.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{image_subgroup, ElementSet, FiniteGroup, Group, Perm, Subgroup, SymmetricAction, DEFAULT_PERM_CAP};

/// Tolerance for comparisons involving real (non-exact) values.
pub const TOLERANCE: f64 = 1e-12;

/// A nonnegative norm value: exact where the arithmetic is exact, real where
/// square roots force it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormValue {
    Exact(Rational64),
    Real(f64),
}

impl NormValue {
    pub fn zero() -> Self {
        NormValue::Exact(Rational64::zero())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        NormValue::Exact(Rational64::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            NormValue::Exact(r) => r.to_f64().expect("finite"),
            NormValue::Real(x) => x,
        }
    }

    pub fn as_exact(self) -> Option<Rational64> {
        match self {
            NormValue::Exact(r) => Some(r),
            NormValue::Real(_) => None,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            NormValue::Exact(r) => r.is_zero(),
            NormValue::Real(x) => x.abs() <= TOLERANCE,
        }
    }

    pub fn add(self, other: NormValue) -> NormValue {
        match (self, other) {
            (NormValue::Exact(a), NormValue::Exact(b)) => NormValue::Exact(a + b),
            _ => NormValue::Real(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(self, other: NormValue) -> NormValue {
        match (self, other) {
            (NormValue::Exact(a), NormValue::Exact(b)) => NormValue::Exact(a - b),
            _ => NormValue::Real(self.to_f64() - other.to_f64()),
        }
    }

    pub fn scale(self, k: Rational64) -> NormValue {
        match self {
            NormValue::Exact(a) => NormValue::Exact(a * k),
            NormValue::Real(x) => NormValue::Real(x * k.to_f64().expect("finite")),
        }
    }

    /// Exact comparison when both sides are exact; otherwise values within
    /// [`TOLERANCE`] compare equal.
    pub fn compare(self, other: NormValue) -> Ordering {
        match (self, other) {
            (NormValue::Exact(a), NormValue::Exact(b)) => a.cmp(&b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= TOLERANCE {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn lt(self, other: NormValue) -> bool {
        self.compare(other) == Ordering::Less
    }

    pub fn le(self, other: NormValue) -> bool {
        self.compare(other) != Ordering::Greater
    }

    pub fn gt(self, other: NormValue) -> bool {
        self.compare(other) == Ordering::Greater
    }

    pub fn max(self, other: NormValue) -> NormValue {
        if other.gt(self) {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: NormValue) -> NormValue {
        if other.lt(self) {
            other
        } else {
            self
        }
    }
}

impl From<Rational64> for NormValue {
    fn from(r: Rational64) -> Self {
        NormValue::Exact(r)
    }
}

impl fmt::Display for NormValue {
    /// Exact values as `p/q`, reals with 12 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Exact(r) => write!(f, "{r}"),
            NormValue::Real(x) => write!(f, "{}", format_sig12(*x)),
        }
    }
}

pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-6..=12).contains(&mag) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Parses `p/q`, an integer, or a decimal such as `0.25` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational64> {
    let t = text.trim();
    let bad = || Error::Malformed(format!("expected a rational number, got {t:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i64.pow(frac.len() as u32);
        let num: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let whole = Rational64::from_integer(int.abs()) + Rational64::new(num, den);
        return Ok(if negative { -whole } else { whole });
    }
    t.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}

/// Normalised Hamming norm of a permutation: moved points over degree.
pub fn hamming_norm(f: &Perm) -> NormValue {
    NormValue::ratio(f.moved_points() as i64, f.degree() as i64)
}

/// Normalised Hamming distance `|{a : (a)f != (a)g}| / n`, computed pointwise.
pub fn hamming_distance(f: &Perm, g: &Perm) -> NormValue {
    let differ = f.images().iter().zip(g.images()).filter(|(a, b)| a != b).count();
    NormValue::ratio(differ as i64, f.degree() as i64)
}

/// A class function on a finite group, stored per conjugacy class.
#[derive(Debug, Clone)]
pub struct Norm {
    label: String,
    class_values: Vec<NormValue>,
    class_of: Vec<usize>,
}

impl Norm {
    pub fn from_class_values(g: &FiniteGroup, class_values: Vec<NormValue>, label: impl Into<String>) -> Result<Norm> {
        let p = g.classes();
        if class_values.len() != p.num_classes() {
            return Err(Error::Malformed(format!(
                "{} class values for {} classes",
                class_values.len(),
                p.num_classes()
            )));
        }
        if let Some(v) = class_values.iter().find(|v| v.lt(NormValue::zero())) {
            return Err(Error::NotASemimetric(format!("negative value {v}")));
        }
        Ok(Norm {
            label: label.into(),
            class_values,
            class_of: (0..g.order()).map(|x| p.class_of(x)).collect(),
        })
    }

    /// Builds a norm from per-element values, which must be class functions.
    pub fn from_element_values(g: &FiniteGroup, values: &[NormValue], label: impl Into<String>) -> Result<Norm> {
        let p = g.classes();
        let mut class_values = Vec::with_capacity(p.num_classes());
        for c in 0..p.num_classes() {
            let v = values[p.rep(c)];
            if let Some(&x) = p.members(c).iter().find(|&&x| values[x].compare(v) != Ordering::Equal) {
                return Err(Error::NotASemimetric(format!(
                    "value differs inside class {}: {} vs {}",
                    p.label(c),
                    g.element_label(p.rep(c)),
                    g.element_label(x)
                )));
            }
            class_values.push(v);
        }
        Norm::from_class_values(g, class_values, label)
    }

    pub fn zero(g: &FiniteGroup) -> Norm {
        let k = g.classes().num_classes();
        Norm::from_class_values(g, vec![NormValue::zero(); k], "zero").expect("valid")
    }

    /// Normalised Hamming norm on a permutation group.
    pub fn hamming(g: &FiniteGroup) -> Result<Norm> {
        if g.degree().is_none() {
            return Err(Error::WrongTarget(format!("{} is not a permutation group", g.label())));
        }
        let p = g.classes();
        let vals = (0..p.num_classes()).map(|c| hamming_norm(g.perm(p.rep(c)).expect("perm"))).collect();
        Norm::from_class_values(g, vals, "hamming")
    }

    /// The character norm `sqrt((2 chi(e) - chi(g) - conj(chi(g))) / chi(e))`.
    pub fn character(g: &FiniteGroup, cd: &CharacterData) -> Result<Norm> {
        let p = g.classes();
        if cd.chi.len() != p.num_classes() {
            return Err(Error::InvalidCharacter(format!(
                "{} values for {} classes of {}",
                cd.chi.len(),
                p.num_classes(),
                g.label()
            )));
        }
        let vals = (0..p.num_classes()).map(|c| cd.norm_of_class(c)).collect::<Result<Vec<_>>>()?;
        Norm::from_class_values(g, vals, format!("character {}", cd.label))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, g: usize) -> NormValue {
        self.class_values[self.class_of[g]]
    }

    pub fn class_value(&self, c: usize) -> NormValue {
        self.class_values[c]
    }

    pub fn class_values(&self) -> &[NormValue] {
        &self.class_values
    }

    pub fn element_values(&self) -> Vec<NormValue> {
        self.class_of.iter().map(|&c| self.class_values[c]).collect()
    }

    pub fn scaled(&self, k: Rational64) -> Norm {
        Norm {
            label: format!("{k} * {}", self.label),
            class_values: self.class_values.iter().map(|v| v.scale(k)).collect(),
            class_of: self.class_of.clone(),
        }
    }

    /// Smallest value over non-identity classes, if any.
    pub fn min_nonidentity(&self) -> Option<NormValue> {
        self.class_values[1..].iter().copied().reduce(NormValue::min)
    }
}

/// `d(a, b) = ||a b^-1||`.
pub fn induced_metric(g: &FiniteGroup, norm: &Norm, a: usize, b: usize) -> NormValue {
    norm.value(g.mul(a, g.inv(b)))
}

/// A character given per conjugacy class.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterData {
    pub label: String,
    pub chi: Vec<Complex64>,
}

impl CharacterData {
    pub fn new(label: impl Into<String>, chi: Vec<Complex64>) -> Result<Self> {
        let cd = CharacterData { label: label.into(), chi };
        let e = *cd.chi.first().ok_or_else(|| Error::InvalidCharacter("no values".into()))?;
        if e.im.abs() > TOLERANCE || e.re <= 0.0 {
            return Err(Error::InvalidCharacter(format!("chi(e) = {e} is not real and positive")));
        }
        for c in 0..cd.chi.len() {
            cd.norm_of_class(c)?;
        }
        Ok(cd)
    }

    /// Parses `char <group-label> <#classes>` followed by one `re im` line
    /// per class id.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty character file".into() })?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 3 || f[0] != "char" {
            return Err(Error::Parse { line: hl, msg: format!("bad header {header:?}") });
        }
        let k: usize = f[2].parse().map_err(|_| Error::Parse { line: hl, msg: "bad class count".into() })?;
        let mut chi = Vec::with_capacity(k);
        for (ln, l) in lines {
            let parts: Vec<f64> = l
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|_| Error::Parse { line: ln, msg: format!("bad number {s:?}") }))
                .collect::<Result<_>>()?;
            match parts.as_slice() {
                [re] => chi.push(Complex64::new(*re, 0.0)),
                [re, im] => chi.push(Complex64::new(*re, *im)),
                _ => return Err(Error::Parse { line: ln, msg: "expected `re im`".into() }),
            }
        }
        if chi.len() != k {
            return Err(Error::Parse { line: hl, msg: format!("expected {k} class lines, found {}", chi.len()) });
        }
        CharacterData::new(f[1], chi)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("char {} {}\n", self.label, self.chi.len());
        for z in &self.chi {
            s.push_str(&format!("{} {}\n", z.re, z.im));
        }
        s
    }

    fn norm_of_class(&self, c: usize) -> Result<NormValue> {
        let e = self.chi[0].re;
        let v = self.chi[c];
        let radicand = (2.0 * e - (v + v.conj()).re) / e;
        if radicand < -TOLERANCE {
            return Err(Error::InvalidCharacter(format!("negative radicand {radicand} at class {c}")));
        }
        Ok(NormValue::Real(radicand.max(0.0).sqrt()))
    }
}

/// The fixed-point character of a permutation group, shipped for `S_n` as
/// `catalog/fixpt_S<n>.chr`.
pub fn bundled_fixed_point_character(n: usize) -> Option<CharacterData> {
    let text = match n {
        2 => include_str!("../catalog/fixpt_S2.chr"),
        3 => include_str!("../catalog/fixpt_S3.chr"),
        4 => include_str!("../catalog/fixpt_S4.chr"),
        5 => include_str!("../catalog/fixpt_S5.chr"),
        6 => include_str!("../catalog/fixpt_S6.chr"),
        7 => include_str!("../catalog/fixpt_S7.chr"),
        _ => return None,
    };
    Some(CharacterData::parse(text).expect("bundled character file is valid"))
}

/// `||g||_chi` for element `g`.
pub fn character_norm(g: &FiniteGroup, cd: &CharacterData, x: usize) -> Result<NormValue> {
    let c = g.classes().class_of(x);
    if c >= cd.chi.len() {
        return Err(Error::InvalidCharacter(format!("no value for class {c}")));
    }
    cd.norm_of_class(c)
}

/// Outcome of one norm property check.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomCheck {
    pub property: u8,
    pub name: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Pass/fail for each of the five norm properties.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<u8> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.property).collect()
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "property {} ({}): {}", c.property, c.name, if c.pass { "pass" } else { "FAIL" })?;
            if let Some(w) = &c.witness {
                write!(f, "  witness: {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Checks the five norm properties exhaustively on per-element values:
/// nonnegativity, `||e|| = 0`, inverse symmetry, conjugation invariance over
/// all pairs, and the triangle inequality over all pairs.
pub fn verify_norm_axioms(g: &FiniteGroup, values: &[NormValue]) -> AxiomReport {
    assert_eq!(values.len(), g.order(), "one value per element");
    let n = g.order();
    let lbl = |x: usize| g.element_label(x);
    let mut checks = Vec::with_capacity(5);

    let neg = (0..n).find(|&x| values[x].lt(NormValue::zero()));
    checks.push(AxiomCheck {
        property: 1,
        name: "nonnegative",
        pass: neg.is_none(),
        witness: neg.map(|x| format!("||{}|| = {}", lbl(x), values[x])),
    });

    let id_ok = values[0].is_zero();
    checks.push(AxiomCheck {
        property: 2,
        name: "identity is zero",
        pass: id_ok,
        witness: (!id_ok).then(|| format!("||e|| = {}", values[0])),
    });

    let inv = (0..n).find(|&x| values[x].compare(values[g.inv(x)]) != Ordering::Equal);
    checks.push(AxiomCheck {
        property: 3,
        name: "inverse symmetric",
        pass: inv.is_none(),
        witness: inv.map(|x| {
            format!("||{}|| = {} but ||{}|| = {}", lbl(x), values[x], lbl(g.inv(x)), values[g.inv(x)])
        }),
    });

    let conj = (0..n).into_par_iter().find_map_first(|x| {
        (0..n)
            .find(|&h| values[g.conj(x, h)].compare(values[x]) != Ordering::Equal)
            .map(|h| (x, h))
    });
    checks.push(AxiomCheck {
        property: 4,
        name: "conjugation invariant",
        pass: conj.is_none(),
        witness: conj.map(|(x, h)| {
            let y = g.conj(x, h);
            format!("||{}|| = {} but its conjugate ||{}|| = {}", lbl(x), values[x], lbl(y), values[y])
        }),
    });

    let tri = (0..n).into_par_iter().find_map_first(|a| {
        (0..n).find(|&b| !values[g.mul(a, b)].le(values[a].add(values[b]))).map(|b| (a, b))
    });
    checks.push(AxiomCheck {
        property: 5,
        name: "triangle inequality",
        pass: tri.is_none(),
        witness: tri.map(|(a, b)| {
            format!(
                "||{} * {}|| = {} > {} + {}",
                lbl(a),
                lbl(b),
                values[g.mul(a, b)],
                values[a],
                values[b]
            )
        }),
    });

    AxiomReport { checks }
}

/// The normal subgroup `{g : ||g|| = 0}`, checked for closure under products,
/// inverses and conjugation.
pub fn norm_kernel(g: &FiniteGroup, norm: &Norm) -> Result<Subgroup> {
    let kernel: Vec<usize> = (0..g.order()).filter(|&x| norm.value(x).is_zero()).collect();
    let set = ElementSet::from_iter(g.order(), kernel.iter().copied());
    if !set.contains(0) {
        return Err(Error::NotASemimetric("the identity has nonzero norm".into()));
    }
    for &a in &kernel {
        if !set.contains(g.inv(a)) {
            return Err(Error::NotASemimetric(format!("kernel not closed under inverse at {}", g.element_label(a))));
        }
        for &b in &kernel {
            if !set.contains(g.mul(a, b)) {
                return Err(Error::NotASemimetric(format!(
                    "kernel not closed under product at ({}, {})",
                    g.element_label(a),
                    g.element_label(b)
                )));
            }
        }
        for &h in g.generators() {
            if !set.contains(g.conj(a, h)) {
                return Err(Error::NotASemimetric(format!(
                    "kernel not normal: {} conjugated by {}",
                    g.element_label(a),
                    g.element_label(h)
                )));
            }
        }
    }
    let sub = image_subgroup(g, &kernel, DEFAULT_PERM_CAP.max(g.order()))?;
    debug_assert_eq!(sub.group.order(), kernel.len());
    Ok(sub)
}

/// A group with a bi-invariant metric: the target of almost-homomorphisms and
/// separation checks.
pub trait MetricTarget: Group<Elem: Send + Sync + fmt::Debug> + Sync {
    fn dist(&self, a: &Self::Elem, b: &Self::Elem) -> NormValue;
    fn describe(&self) -> String;
    fn element_text(&self, a: &Self::Elem) -> String;
}

/// A finite group with a norm, metrised by `d(a, b) = ||a b^-1||`.
#[derive(Debug, Clone, Copy)]
pub struct NormedGroup<'a> {
    pub group: &'a FiniteGroup,
    pub norm: &'a Norm,
}

impl Group for NormedGroup<'_> {
    type Elem = usize;

    fn identity(&self) -> usize {
        0
    }

    fn op(&self, a: &usize, b: &usize) -> usize {
        self.group.mul(*a, *b)
    }

    fn inverse(&self, a: &usize) -> usize {
        self.group.inv(*a)
    }
}

impl MetricTarget for NormedGroup<'_> {
    fn dist(&self, a: &usize, b: &usize) -> NormValue {
        induced_metric(self.group, self.norm, *a, *b)
    }

    fn describe(&self) -> String {
        format!("{} with {}", self.group.label(), self.norm.label())
    }

    fn element_text(&self, a: &usize) -> String {
        self.group.element_label(*a)
    }
}

/// `S_n` of any degree with the normalised Hamming metric.
impl MetricTarget for SymmetricAction {
    fn dist(&self, a: &Perm, b: &Perm) -> NormValue {
        hamming_distance(a, b)
    }

    fn describe(&self) -> String {
        format!("S{} with hamming", self.degree)
    }

    fn element_text(&self, a: &Perm) -> String {
        a.to_string()
    }
}
