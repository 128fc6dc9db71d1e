//! Almost-homomorphisms: measured defect and margin, amplification into
//! `S_n x S_n < S_{n^2}`, and the passage between almost-homomorphisms of
//! `F/N` and homomorphisms of `F` that separate `N`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_rational::{Ratio, Rational64};
use num_traits::{CheckedMul, One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{square_embed, FiniteGroup, Perm, SymmetricAction};
use crate::metrics::{MetricTarget, NormValue};
use crate::separability::{check_separation, NOracle};
use crate::words::{ball, evaluate, GenImages, Word};

/// Degree cap for iterated amplification, `6^4`.
pub const DEFAULT_DEGREE_CAP: usize = 1296;

/// A finite subset `Φ` of a group with the products that stay inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMulSet {
    labels: Vec<String>,
    products: BTreeMap<(usize, usize), usize>,
    identity: Option<usize>,
}

impl PartialMulSet {
    pub fn new(labels: Vec<String>, products: BTreeMap<(usize, usize), usize>, identity: Option<usize>) -> Result<Self> {
        let n = labels.len();
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != n {
            return Err(Error::Malformed("labels must be distinct".into()));
        }
        if identity.is_some_and(|e| e >= n) || products.iter().any(|(&(a, b), &c)| a >= n || b >= n || c >= n) {
            return Err(Error::Malformed("label index out of range".into()));
        }
        if let Some(e) = identity {
            for (&(a, b), &c) in &products {
                if (a == e && c != b) || (b == e && c != a) {
                    return Err(Error::Malformed(format!("product ({a}, {b}) -> {c} contradicts the identity label")));
                }
            }
        }
        Ok(PartialMulSet { labels, products, identity })
    }

    /// All of `g` with its full table.
    pub fn from_group(g: &FiniteGroup) -> Self {
        let all: Vec<usize> = (0..g.order()).collect();
        Self::from_subset(g, &all).expect("distinct elements")
    }

    /// The given elements of `g`, recording `(i, j) -> k` when `a_i a_j = a_k`.
    pub fn from_subset(g: &FiniteGroup, elements: &[usize]) -> Result<Self> {
        let pos: HashMap<usize, usize> = elements.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut products = BTreeMap::new();
        for (i, &a) in elements.iter().enumerate() {
            for (j, &b) in elements.iter().enumerate() {
                if let Some(&k) = pos.get(&g.mul(a, b)) {
                    products.insert((i, j), k);
                }
            }
        }
        let labels = elements.iter().map(|&x| g.element_label(x)).collect();
        Self::new(labels, products, pos.get(&0).copied())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn products(&self) -> &BTreeMap<(usize, usize), usize> {
        &self.products
    }

    pub fn identity(&self) -> Option<usize> {
        self.identity
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A map `φ: Φ -> H` into a metric group.
#[derive(Debug, Clone)]
pub struct AlmostHom<T: MetricTarget> {
    domain: PartialMulSet,
    target: T,
    map: Vec<T::Elem>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub eps: NormValue,
    pub alpha: NormValue,
    pub pass: bool,
}

/// Measured defect and margin with verdicts for given thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct AhomReport {
    pub size: usize,
    pub products: usize,
    pub target: String,
    pub defect: NormValue,
    /// `None` when every label is the identity.
    pub margin: Option<NormValue>,
    pub identity_ok: bool,
    pub verdicts: Vec<Verdict>,
}

impl AhomReport {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

impl fmt::Display for AhomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "|Phi| = {}, products = {}", self.size, self.products)?;
        writeln!(f, "target: {}", self.target)?;
        writeln!(f, "defect: {}", self.defect)?;
        match self.margin {
            Some(m) => writeln!(f, "margin: {m}")?,
            None => writeln!(f, "margin: undefined (no non-identity labels)")?,
        }
        writeln!(f, "identity maps to e: {}", if self.identity_ok { "yes" } else { "no" })?;
        for v in &self.verdicts {
            let word = if v.pass { "almost-homomorphism" } else { "not an almost-homomorphism" };
            writeln!(f, "verdict (eps = {}, alpha = {}): {word}", v.eps, v.alpha)?;
        }
        Ok(())
    }
}

impl<T: MetricTarget> AlmostHom<T> {
    pub fn new(domain: PartialMulSet, target: T, map: Vec<T::Elem>) -> Result<Self> {
        if map.len() != domain.len() {
            return Err(Error::Malformed(format!("{} labels but {} images", domain.len(), map.len())));
        }
        Ok(AlmostHom { domain, target, map })
    }

    pub fn domain(&self) -> &PartialMulSet {
        &self.domain
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn map(&self) -> &[T::Elem] {
        &self.map
    }

    pub fn image(&self, i: usize) -> &T::Elem {
        &self.map[i]
    }

    pub fn set_image(&mut self, i: usize, value: T::Elem) {
        self.map[i] = value;
    }

    /// `max d(φ(a)φ(b), φ(ab))` over recorded products; 0 if there are none.
    pub fn defect(&self) -> NormValue {
        let triples: Vec<(&(usize, usize), &usize)> = self.domain.products.iter().collect();
        triples
            .par_iter()
            .map(|(&(a, b), &c)| self.target.dist(&self.target.op(&self.map[a], &self.map[b]), &self.map[c]))
            .reduce(NormValue::zero, NormValue::max)
    }

    /// `min d(φ(a), e)` over labels other than the identity.
    pub fn margin(&self) -> Result<NormValue> {
        let e = self.target.identity();
        (0..self.domain.len())
            .filter(|&i| Some(i) != self.domain.identity)
            .map(|i| self.target.dist(&self.map[i], &e))
            .reduce(NormValue::min)
            .ok_or(Error::UndefinedMargin)
    }

    pub fn identity_ok(&self) -> bool {
        self.domain.identity.is_none_or(|i| self.map[i] == self.target.identity())
    }

    /// Measures once and judges each `(eps, alpha)`: defect `< eps`, margin
    /// `> alpha`, identity to identity.
    pub fn report(&self, thresholds: &[(NormValue, NormValue)]) -> Result<AhomReport> {
        if let Some((e, a)) = thresholds.iter().find(|(e, a)| !e.gt(NormValue::zero()) || !a.gt(NormValue::zero())) {
            return Err(Error::Malformed(format!("thresholds must be positive, got eps = {e}, alpha = {a}")));
        }
        let defect = self.defect();
        let margin = match self.margin() {
            Ok(m) => Some(m),
            Err(Error::UndefinedMargin) => None,
            Err(e) => return Err(e),
        };
        let identity_ok = self.identity_ok();
        let verdicts = thresholds
            .iter()
            .map(|&(eps, alpha)| Verdict {
                eps,
                alpha,
                pass: identity_ok && defect.lt(eps) && margin.is_none_or(|m| m.gt(alpha)),
            })
            .collect();
        Ok(AhomReport {
            size: self.domain.len(),
            products: self.domain.products.len(),
            target: self.target.describe(),
            defect,
            margin,
            identity_ok,
            verdicts,
        })
    }

    pub fn is_ahom(&self, eps: NormValue, alpha: NormValue) -> Result<AhomReport> {
        self.report(&[(eps, alpha)])
    }
}

/// The inclusion of a permutation group into its symmetric group, with `Φ`
/// the whole group.
pub fn identity_embedding(g: &FiniteGroup) -> Result<AlmostHom<SymmetricAction>> {
    let degree = g.degree().ok_or_else(|| Error::WrongTarget(format!("{} is not a permutation group", g.label())))?;
    let map = (0..g.order()).map(|i| g.perm(i).expect("perm group").clone()).collect();
    AlmostHom::new(PartialMulSet::from_group(g), SymmetricAction { degree }, map)
}

/// `a -> φ(a) x φ(a)` in `S_{n^2}`. By `1 - h(f x f, g x g) = (1 - h(f, g))^2`
/// the new defect is `2ε - ε^2` and the new margin `2α - α^2`.
pub fn amplify(ah: &AlmostHom<SymmetricAction>) -> Result<AlmostHom<SymmetricAction>> {
    let map = ah.map.par_iter().map(|p| square_embed(p, p)).collect::<Result<Vec<Perm>>>()?;
    let degree = ah.target.degree * ah.target.degree;
    AlmostHom::new(ah.domain.clone(), SymmetricAction { degree }, map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplifyStep {
    pub degree: usize,
    pub defect: NormValue,
    pub margin: NormValue,
    /// `2ε - ε^2` and `2α - α^2` from the previous step's measurements.
    pub defect_bound: Option<NormValue>,
    pub margin_bound: Option<NormValue>,
}

impl AmplifyStep {
    pub fn within_bounds(&self) -> bool {
        self.defect_bound.is_none_or(|b| self.defect.le(b)) && self.margin_bound.is_none_or(|b| self.margin.compare(b).is_ge())
    }
}

#[derive(Debug, Clone)]
pub struct AmplifyRun {
    pub result: AlmostHom<SymmetricAction>,
    /// Amplifications performed.
    pub steps: usize,
    /// Least `t` with `1 - (1 - α)^(2^t) >= target`.
    pub required_steps: usize,
    /// Measurements after 0, 1, ..., `steps` amplifications.
    pub history: Vec<AmplifyStep>,
    /// Stopped at the degree cap before reaching the target.
    pub partial: bool,
}

impl fmt::Display for AmplifyRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, s) in self.history.iter().enumerate() {
            write!(f, "t = {t}: degree {}, defect {}, margin {}", s.degree, s.defect, s.margin)?;
            if let (Some(d), Some(m)) = (s.defect_bound, s.margin_bound) {
                write!(f, " (bounds: defect <= {d}, margin >= {m})")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "required steps: {}", self.required_steps)?;
        if self.partial {
            writeln!(f, "stopped at the degree cap after {} steps; achieved margin {}", self.steps, self.history[self.steps].margin)
        } else {
            writeln!(f, "target reached after {} steps", self.steps)
        }
    }
}

fn complement_power_reaches(q: Rational64, goal: Rational64) -> usize {
    // smallest t with q^(2^t) <= goal, for 0 <= q < 1
    let to_i128 = |r: Rational64| Ratio::new(i128::from(*r.numer()), i128::from(*r.denom()));
    let (mut exact, goal_exact) = (Some(to_i128(q)), to_i128(goal));
    let mut approx = q.to_f64().expect("finite");
    let goal_f = goal.to_f64().expect("finite");
    let mut t = 0;
    loop {
        let reached = match &exact {
            Some(x) => *x <= goal_exact,
            None => approx <= goal_f,
        };
        if reached {
            return t;
        }
        exact = exact.and_then(|x| x.checked_mul(&x));
        approx *= approx;
        t += 1;
    }
}

/// Least `t` such that `t` amplifications take margin `alpha` to `target`.
pub fn required_steps(alpha: Rational64, target: Rational64) -> Result<usize> {
    let one = Rational64::one();
    if target >= one {
        return Err(Error::Malformed(format!("target margin must be below 1, got {target}")));
    }
    if alpha <= Rational64::from_integer(0) || alpha > one {
        return Err(Error::Malformed(format!("margin must lie in (0, 1], got {alpha}")));
    }
    Ok(complement_power_reaches(one - alpha, one - target))
}

fn exact(v: NormValue) -> Result<Rational64> {
    v.as_exact().ok_or_else(|| Error::WrongTarget("Hamming values are exact".into()))
}

/// Amplifies until the margin reaches `target` or the next degree would
/// exceed `degree_cap`.
pub fn iterate_amplify(ah: &AlmostHom<SymmetricAction>, target: Rational64, degree_cap: usize) -> Result<AmplifyRun> {
    let defect = ah.defect();
    let margin = ah.margin()?;
    if !margin.gt(defect) {
        return Err(Error::Inapplicable(format!("margin {margin} must exceed defect {defect}")));
    }
    let required = required_steps(exact(margin)?, target)?;
    let mut history = vec![AmplifyStep { degree: ah.target.degree, defect, margin, defect_bound: None, margin_bound: None }];
    let mut cur = ah.clone();
    let mut partial = false;
    for _ in 0..required {
        let next_degree = cur.target.degree.checked_mul(cur.target.degree).unwrap_or(usize::MAX);
        if next_degree > degree_cap {
            partial = true;
            break;
        }
        let prev = history.last().expect("nonempty").clone();
        cur = amplify(&cur)?;
        let two = Rational64::from_integer(2);
        let (e, a) = (exact(prev.defect)?, exact(prev.margin)?);
        history.push(AmplifyStep {
            degree: next_degree,
            defect: cur.defect(),
            margin: cur.margin()?,
            defect_bound: Some(NormValue::Exact(two * e - e * e)),
            margin_bound: Some(NormValue::Exact(two * a - a * a)),
        });
    }
    Ok(AmplifyRun { steps: history.len() - 1, result: cur, required_steps: required, history, partial })
}

/// Coset labels `[w]_N` for the words of `ball(n, r)`, each represented by
/// its first word in ball order (shortest, then lexicographically least).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetDomain {
    pub set: PartialMulSet,
    pub reps: Vec<Word>,
    /// The coset of each label, as an element of the quotient.
    pub cosets: Vec<usize>,
}

pub fn coset_domain(oracle: &NOracle, r: usize) -> Result<CosetDomain> {
    let mut reps = Vec::new();
    let mut cosets = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::new();
    for w in ball(oracle.rank(), r) {
        let c = oracle.image(&w)?;
        if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(c) {
            slot.insert(reps.len());
            reps.push(w);
            cosets.push(c);
        }
    }
    let q = oracle.quotient();
    let mut products = BTreeMap::new();
    for (i, &a) in cosets.iter().enumerate() {
        for (j, &b) in cosets.iter().enumerate() {
            if let Some(&k) = index.get(&q.mul(a, b)) {
                products.insert((i, j), k);
            }
        }
    }
    let labels = reps.iter().map(|w| format!("[{w}]")).collect();
    let set = PartialMulSet::new(labels, products, index.get(&0).copied())?;
    Ok(CosetDomain { set, reps, cosets })
}

/// An almost-homomorphism whose domain is a set of cosets of `N`.
#[derive(Debug, Clone)]
pub struct CosetAlmostHom<T: MetricTarget> {
    pub ah: AlmostHom<T>,
    pub reps: Vec<Word>,
    pub cosets: Vec<usize>,
}

impl<T: MetricTarget> CosetAlmostHom<T> {
    pub fn new(domain: CosetDomain, target: T, map: Vec<T::Elem>) -> Result<Self> {
        Ok(CosetAlmostHom { ah: AlmostHom::new(domain.set, target, map)?, reps: domain.reps, cosets: domain.cosets })
    }

    fn label_of(&self, oracle: &NOracle, w: &Word) -> Result<usize> {
        let c = oracle.image(w)?;
        self.cosets
            .iter()
            .position(|&x| x == c)
            .ok_or_else(|| Error::Inapplicable(format!("the coset of {w} is not among the labels")))
    }
}

/// Restricts a homomorphism that `(3r, eps, alpha)`-separates `N` to the
/// cosets of `ball(n, r)`. Any `w_i w_j w_k^-1` has length at most `3r`, so
/// the result is a `(Φ, eps, alpha)`-homomorphism.
pub fn separating_to_ahom<T: MetricTarget>(
    target: T,
    gi: &GenImages<T::Elem>,
    oracle: &NOracle,
    r: usize,
    eps: NormValue,
    alpha: NormValue,
) -> Result<CosetAlmostHom<T>> {
    let verdict = check_separation(&target, gi, oracle, 3 * r, eps, alpha)?;
    if let Some(v) = verdict.violations.first() {
        let side = if v.in_n { "in N but not within eps" } else { "outside N but not beyond alpha" };
        return Err(Error::SeparationPrecondition {
            word: v.word.to_string(),
            detail: format!("distance {} ({side}) at radius {}", v.distance, 3 * r),
        });
    }
    let domain = coset_domain(oracle, r)?;
    let map = domain.reps.iter().map(|w| evaluate(w, gi, &target)).collect::<Result<Vec<_>>>()?;
    CosetAlmostHom::new(domain, target, map)
}

/// `d(φ~(w), φ([w]_N))` against `(2|w| - 1) ε^`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordError {
    pub word: Word,
    pub error: NormValue,
    pub bound: NormValue,
}

impl WordError {
    pub fn holds(&self) -> bool {
        self.error.le(self.bound)
    }
}

/// The homomorphism `φ~` with `φ~(x_i) = φ([x_i]_N)`.
pub fn extracted_hom<T: MetricTarget>(cah: &CosetAlmostHom<T>, oracle: &NOracle) -> Result<GenImages<T::Elem>> {
    let images = (1..=oracle.rank())
        .map(|i| {
            let x = Word::generator(oracle.rank(), i)?;
            Ok(cah.ah.image(cah.label_of(oracle, &x)?).clone())
        })
        .collect::<Result<Vec<_>>>()?;
    GenImages::new(images)
}

/// Word errors of `φ~` over `ball(n, r)`.
pub fn word_errors<T: MetricTarget>(cah: &CosetAlmostHom<T>, oracle: &NOracle, r: usize) -> Result<Vec<WordError>> {
    let gi = extracted_hom(cah, oracle)?;
    let eps_hat = cah.ah.defect();
    let t = cah.ah.target();
    ball(oracle.rank(), r)
        .into_iter()
        .map(|w| {
            let k = cah.label_of(oracle, &w)?;
            let error = t.dist(&evaluate(&w, &gi, t)?, cah.ah.image(k));
            let bound = eps_hat.scale(Rational64::from_integer((2 * w.len() as i64 - 1).max(0)));
            Ok(WordError { word: w, error, bound })
        })
        .collect()
}

/// `φ~` with its certified separation: words of length at most `r` in `N`
/// land within `eps_bound` of `e`, the others at least `delta_bound` away.
/// Both bounds are non-strict because the measured `ε^` is attained.
#[derive(Debug, Clone)]
pub struct SeparationCertificate<E> {
    pub hom: GenImages<E>,
    pub r: usize,
    pub eps_hat: NormValue,
    pub alpha_hat: NormValue,
    /// `2 r ε^`
    pub eps_bound: NormValue,
    /// `α^ - 2 r ε^`
    pub delta_bound: NormValue,
    pub words_checked: usize,
    /// Words that broke a bound on direct evaluation.
    pub failures: Vec<String>,
}

impl<E> SeparationCertificate<E> {
    pub fn verified(&self) -> bool {
        self.failures.is_empty()
    }
}

impl<E> fmt::Display for SeparationCertificate<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "measured defect {}, margin {}", self.eps_hat, self.alpha_hat)?;
        writeln!(f, "certified: words of length <= {} in N within {} of e, others at least {} away", self.r, self.eps_bound, self.delta_bound)?;
        writeln!(f, "words checked: {}", self.words_checked)?;
        for x in &self.failures {
            writeln!(f, "failure: {x}")?;
        }
        writeln!(f, "re-verification: {}", if self.verified() { "ok" } else { "FAILED" })
    }
}

/// Extends `φ` to `F` through the generators and certifies that it
/// `(r, 2rε^, α^ - 2rε^)`-separates `N`, then re-checks every word of
/// `ball(n, r)` by evaluation.
pub fn ahom_to_separating<T: MetricTarget>(
    cah: &CosetAlmostHom<T>,
    oracle: &NOracle,
    r: usize,
) -> Result<SeparationCertificate<T::Elem>> {
    let hom = extracted_hom(cah, oracle)?;
    let eps_hat = cah.ah.defect();
    let alpha_hat = cah.ah.margin()?;
    let eps_bound = eps_hat.scale(Rational64::from_integer(2 * r as i64));
    if !alpha_hat.gt(eps_bound) {
        return Err(Error::SeparationGap { margin: alpha_hat.to_string(), bound: eps_bound.to_string() });
    }
    let delta_bound = alpha_hat.sub(eps_bound);
    let t = cah.ah.target();
    let e = t.identity();
    let mut failures = Vec::new();
    let errors = word_errors(cah, oracle, r)?;
    for we in &errors {
        if !we.holds() {
            failures.push(format!("{}: word error {} exceeds {}", we.word, we.error, we.bound));
        }
        let d = t.dist(&evaluate(&we.word, &hom, t)?, &e);
        if oracle.contains(&we.word)? {
            if !d.le(eps_bound) {
                failures.push(format!("{} in N at distance {d} > {eps_bound}", we.word));
            }
        } else if d.lt(delta_bound) {
            failures.push(format!("{} outside N at distance {d} < {delta_bound}", we.word));
        }
    }
    Ok(SeparationCertificate { hom, r, eps_hat, alpha_hat, eps_bound, delta_bound, words_checked: errors.len(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::symmetric_group;
    use crate::metrics::{hamming_distance, Norm, NormedGroup};
    use crate::separability::check_separation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str, n: usize) -> Perm {
        Perm::parse_cycles(s, n).unwrap()
    }

    fn corrupted_s3() -> AlmostHom<SymmetricAction> {
        let s3 = symmetric_group(3).unwrap();
        let mut ah = identity_embedding(&s3).unwrap();
        let i = ah.domain().find("(1,2)").or_else(|| ah.domain().find("(1 2)")).unwrap();
        ah.set_image(i, p("(1 3)", 3));
        ah
    }

    fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Perm {
        let mut v: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            v.swap(i, rng.gen_range(0..=i));
        }
        Perm::from_images(v).unwrap()
    }

    #[test]
    fn partial_mul_set_validation() {
        let s3 = symmetric_group(3).unwrap();
        let full = PartialMulSet::from_group(&s3);
        assert_eq!((full.len(), full.products().len(), full.identity()), (6, 36, Some(0)));
        let t = s3.parse_element("(1 2)").unwrap();
        let sub = PartialMulSet::from_subset(&s3, &[0, t]).unwrap();
        assert_eq!(sub.products().len(), 4);
        let c = s3.parse_element("(1 2 3)").unwrap();
        let no_e = PartialMulSet::from_subset(&s3, &[c]).unwrap();
        assert!(no_e.products().is_empty() && no_e.identity().is_none());
        assert!(PartialMulSet::new(vec!["a".into(), "a".into()], BTreeMap::new(), None).is_err());
        let bad = BTreeMap::from([((0, 1), 0)]);
        assert!(PartialMulSet::new(vec!["e".into(), "a".into()], bad, Some(0)).is_err());
    }

    #[test]
    fn defect_and_margin_examples() {
        let s3 = symmetric_group(3).unwrap();
        let id = identity_embedding(&s3).unwrap();
        assert_eq!(id.defect(), NormValue::zero());
        assert_eq!(id.margin().unwrap(), NormValue::ratio(2, 3));
        let s5 = symmetric_group(5).unwrap();
        let id5 = identity_embedding(&s5).unwrap();
        assert_eq!(id5.margin().unwrap(), NormValue::ratio(2, 5));

        let bad = corrupted_s3();
        // exhaustive scan of the corrupted table
        let mut worst = NormValue::zero();
        for (&(a, b), &c) in bad.domain().products() {
            worst = worst.max(hamming_distance(&bad.image(a).then(bad.image(b)), bad.image(c)));
        }
        assert_eq!(bad.defect(), worst);
        assert_eq!(bad.defect(), NormValue::ratio(1, 1));

        let mut zero = identity_embedding(&s3).unwrap();
        zero.set_image(1, Perm::identity(3));
        assert_eq!(zero.margin().unwrap(), NormValue::zero());

        let empty = AlmostHom::new(
            PartialMulSet::new(vec!["e".into()], BTreeMap::new(), Some(0)).unwrap(),
            SymmetricAction { degree: 3 },
            vec![Perm::identity(3)],
        )
        .unwrap();
        assert_eq!(empty.defect(), NormValue::zero());
        assert_eq!(empty.margin(), Err(Error::UndefinedMargin));
        assert!(empty.is_ahom(NormValue::ratio(1, 2), NormValue::ratio(1, 2)).unwrap().pass());
    }

    #[test]
    fn is_ahom_examples() {
        let s5 = symmetric_group(5).unwrap();
        let id5 = identity_embedding(&s5).unwrap();
        assert!(id5.is_ahom(NormValue::ratio(1, 100), NormValue::ratio(1, 3)).unwrap().pass());
        let sofic = id5.is_ahom(NormValue::ratio(3, 10), NormValue::ratio(7, 10)).unwrap();
        assert!(!sofic.pass());
        assert_eq!(sofic.margin, Some(NormValue::ratio(2, 5)));

        let bad = corrupted_s3();
        let m = bad.margin().unwrap();
        let below = m.scale(Rational64::new(1, 2));
        assert!(bad.is_ahom(NormValue::ratio(3, 2), below).unwrap().pass());
        assert!(!bad.is_ahom(NormValue::ratio(3, 2), m).unwrap().pass());
        assert!(!bad.is_ahom(NormValue::ratio(1, 2), below).unwrap().pass());
        assert!(bad.is_ahom(NormValue::zero(), below).is_err());

        let mut e_moved = identity_embedding(&symmetric_group(3).unwrap()).unwrap();
        e_moved.set_image(0, p("(1 2)", 3));
        let rep = e_moved.is_ahom(NormValue::ratio(2, 1), NormValue::ratio(1, 100)).unwrap();
        assert!(!rep.identity_ok && !rep.pass());
        let text = rep.to_string();
        assert!(text.contains("|Phi| = 6") && text.contains("identity maps to e: no"));
    }

    #[test]
    fn amplification_identity_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [5, 6] {
            for _ in 0..1000 {
                let (f, g) = (random_perm(&mut rng, n), random_perm(&mut rng, n));
                let lhs = NormValue::ratio(1, 1).sub(hamming_distance(&square_embed(&g, &g).unwrap(), &square_embed(&f, &f).unwrap()));
                let c = Rational64::one() - hamming_distance(&f, &g).as_exact().unwrap();
                assert_eq!(lhs, NormValue::Exact(c * c));
            }
        }
    }

    #[test]
    fn amplify_exact_and_corrupted() {
        let s3 = symmetric_group(3).unwrap();
        let amp = amplify(&identity_embedding(&s3).unwrap()).unwrap();
        assert_eq!(amp.target().degree, 9);
        assert_eq!(amp.defect(), NormValue::zero());
        assert_eq!(amp.margin().unwrap(), NormValue::ratio(8, 9));

        let s4 = symmetric_group(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let mut ah = identity_embedding(&s4).unwrap();
            for _ in 0..rng.gen_range(1..=3) {
                let i = rng.gen_range(1..24);
                ah.set_image(i, random_perm(&mut rng, 4));
            }
            let (e, a) = (ah.defect().as_exact().unwrap(), ah.margin().unwrap().as_exact().unwrap());
            let two = Rational64::from_integer(2);
            let amp = amplify(&ah).unwrap();
            assert!(amp.defect().le(NormValue::Exact(two * e - e * e)));
            assert!(!amp.margin().unwrap().lt(NormValue::Exact(two * a - a * a)));
        }
    }

    #[test]
    fn iterated_amplification() {
        assert_eq!(required_steps(Rational64::new(1, 2), Rational64::new(9, 10)).unwrap(), 2);
        assert_eq!(required_steps(Rational64::new(1, 2), Rational64::new(1, 2)).unwrap(), 0);
        assert_eq!(required_steps(Rational64::new(1, 2), Rational64::new(1, 3)).unwrap(), 0);
        assert_eq!(required_steps(Rational64::new(1, 1000), Rational64::new(999_999, 1_000_000)).unwrap(), 14);
        assert!(required_steps(Rational64::new(1, 2), Rational64::one()).is_err());

        // margin 1/2: the transposition (1 2) of S_4 restricted to {e, (1 2)}
        let s4 = symmetric_group(4).unwrap();
        let t = s4.parse_element("(1 2)").unwrap();
        let dom = PartialMulSet::from_subset(&s4, &[0, t]).unwrap();
        let ah = AlmostHom::new(dom, SymmetricAction { degree: 4 }, vec![Perm::identity(4), p("(1 2)", 4)]).unwrap();
        let run = iterate_amplify(&ah, Rational64::new(9, 10), DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!((run.steps, run.required_steps, run.partial), (2, 2, false));
        let margins: Vec<NormValue> = run.history.iter().map(|s| s.margin).collect();
        assert_eq!(margins, vec![NormValue::ratio(1, 2), NormValue::ratio(3, 4), NormValue::ratio(15, 16)]);
        assert!(run.history.iter().all(|s| s.defect.is_zero() && s.within_bounds()));
        assert_eq!(run.result.target().degree, 256);

        let stay = iterate_amplify(&ah, Rational64::new(1, 3), DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(stay.steps, 0);
        assert_eq!(stay.result.map(), ah.map());

        let capped = iterate_amplify(&ah, Rational64::new(99, 100), DEFAULT_DEGREE_CAP).unwrap();
        assert!(capped.partial);
        assert_eq!((capped.steps, capped.required_steps), (2, 3));
        assert!(capped.to_string().contains("degree cap"));

        let corrupted = corrupted_s3();
        assert!(matches!(iterate_amplify(&corrupted, Rational64::new(9, 10), DEFAULT_DEGREE_CAP), Err(Error::Inapplicable(_))));
    }

    fn s3_setup() -> (FiniteGroup, GenImages<usize>) {
        let s3 = symmetric_group(3).unwrap();
        let gi = GenImages::new(vec![s3.parse_element("(1 2)").unwrap(), s3.parse_element("(1 2 3)").unwrap()]).unwrap();
        (s3, gi)
    }

    #[test]
    fn coset_labels_for_s3() {
        let (s3, gi) = s3_setup();
        let o = NOracle::new(&s3, gi).unwrap();
        let d = coset_domain(&o, 1).unwrap();
        let reps: Vec<String> = d.reps.iter().map(|w| w.to_string()).collect();
        assert_eq!(reps, vec!["e", "x", "y", "Y"]);
        assert_eq!(d.set.identity(), Some(0));
        assert_eq!(coset_domain(&o, 2).unwrap().reps.len(), 6);
    }

    #[test]
    fn separating_to_ahom_examples() {
        let (s3, gi) = s3_setup();
        let h = Norm::hamming(&s3).unwrap();
        let t = NormedGroup { group: &s3, norm: &h };
        let o = NOracle::new(&s3, gi.clone()).unwrap();
        let (eps, alpha) = (NormValue::ratio(1, 10), NormValue::ratio(1, 2));
        let cah = separating_to_ahom(t, &gi, &o, 1, eps, alpha).unwrap();
        assert_eq!(cah.ah.domain().len(), 4);
        assert_eq!(cah.ah.defect(), NormValue::zero());
        assert!(cah.ah.is_ahom(eps, alpha).unwrap().pass());
        let cah2 = separating_to_ahom(t, &gi, &o, 2, eps, alpha).unwrap();
        assert_eq!(cah2.ah.margin().unwrap(), h.min_nonidentity().unwrap());

        let err = separating_to_ahom(t, &gi, &o, 1, eps, NormValue::ratio(7, 10)).unwrap_err();
        assert!(matches!(err, Error::SeparationPrecondition { ref word, .. } if word == "x"), "{err}");

        let z1 = crate::catalog::builtin("Z1").unwrap();
        let trivial = NOracle::new(&z1, GenImages::new(vec![0, 0]).unwrap()).unwrap();
        let zn = Norm::zero(&z1);
        let tz = NormedGroup { group: &z1, norm: &zn };
        let one = separating_to_ahom(tz, &GenImages::new(vec![0, 0]).unwrap(), &trivial, 2, eps, alpha).unwrap();
        assert_eq!(one.ah.domain().labels(), &["[e]".to_string()]);
        assert!(one.ah.is_ahom(eps, alpha).unwrap().pass());
    }

    #[test]
    fn round_trip_reproduces_evaluations() {
        let (s3, gi) = s3_setup();
        let h = Norm::hamming(&s3).unwrap();
        let t = NormedGroup { group: &s3, norm: &h };
        let o = NOracle::new(&s3, gi.clone()).unwrap();
        let (eps, alpha) = (NormValue::ratio(1, 10), NormValue::ratio(1, 2));
        for r in 1..=3 {
            let cah = separating_to_ahom(t, &gi, &o, r, eps, alpha).unwrap();
            let cert = ahom_to_separating(&cah, &o, r).unwrap();
            assert!(cert.verified(), "{cert}");
            assert_eq!(cert.hom, gi);
            for w in ball(2, r) {
                assert_eq!(evaluate(&w, &cert.hom, &s3).unwrap(), evaluate(&w, &gi, &s3).unwrap());
            }
            let v = check_separation(&t, &cert.hom, &o, r, eps, alpha).unwrap();
            assert!(v.pass());
        }
        let cah = separating_to_ahom(t, &gi, &o, 1, eps, alpha).unwrap();
        let cert = ahom_to_separating(&cah, &o, 0).unwrap();
        assert_eq!(cert.words_checked, 1);
        assert!(cert.verified());
    }

    #[test]
    fn exact_coset_embedding_r3() {
        let (s3, gi) = s3_setup();
        let o = NOracle::new(&s3, gi).unwrap();
        let d = coset_domain(&o, 3).unwrap();
        let map: Vec<Perm> = d.cosets.iter().map(|&c| s3.perm(c).unwrap().clone()).collect();
        let cah = CosetAlmostHom::new(d, SymmetricAction { degree: 3 }, map).unwrap();
        let cert = ahom_to_separating(&cah, &o, 3).unwrap();
        assert_eq!((cert.eps_hat, cert.words_checked), (NormValue::zero(), 53));
        assert!(cert.verified());
        for w in ball(2, 3) {
            let d = hamming_distance(&evaluate(&w, &cert.hom, &SymmetricAction { degree: 3 }).unwrap(), &Perm::identity(3));
            if o.contains(&w).unwrap() {
                assert!(d.is_zero());
            } else {
                assert!(!d.lt(NormValue::ratio(2, 3)));
            }
        }
    }

    #[test]
    fn corrupted_word_error_bounds() {
        let s4 = symmetric_group(4).unwrap();
        let model = GenImages::new(vec![s4.parse_element("(1 2)").unwrap(), s4.parse_element("(1 2 3 4)").unwrap()]).unwrap();
        let o = NOracle::new(&s4, model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut degraded = 0;
        for _ in 0..50 {
            let d = coset_domain(&o, 3).unwrap();
            let mut map: Vec<Perm> = d.cosets.iter().map(|&c| s4.perm(c).unwrap().clone()).collect();
            for _ in 0..rng.gen_range(1..=2) {
                let i = rng.gen_range(1..map.len());
                map[i] = random_perm(&mut rng, 4);
            }
            let cah = CosetAlmostHom::new(d, SymmetricAction { degree: 4 }, map).unwrap();
            let errs = word_errors(&cah, &o, 3).unwrap();
            assert_eq!(errs.len(), 53);
            assert!(errs.iter().all(WordError::holds));
            match ahom_to_separating(&cah, &o, 1) {
                Ok(cert) => assert!(cert.verified(), "{cert}"),
                Err(Error::SeparationGap { .. }) => degraded += 1,
                Err(e) => panic!("{e}"),
            }
        }
        assert!(degraded > 0);
    }
}
