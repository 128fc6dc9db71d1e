//! Reduced words in a finitely generated free group `F = <x1, ..., xn>`.
//!
//! Letters are signed generator indices: `+i` is `x_i`, `-i` is `x_i^-1`.
//! Every `Word` is kept in reduced form.
//!
//! Text syntax: `x1`, `X1` (uppercase is the inverse), or the shorthand
//! `x`, `y`, `X`, `Y` when the rank is at most 2. A letter or a parenthesised
//! group may carry a power `^k` (negative `k` inverts). `e` and `1` denote
//! the identity. Whitespace, `*` and `.` are ignored.

use std::fmt;

use crate::error::{Error, Result};
use crate::groups::Group;

/// A reduced word of a free group of the given rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: usize,
    letters: Vec<i32>,
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        Word { rank, letters: Vec::new() }
    }

    /// The generator `x_i` (1-based).
    pub fn generator(rank: usize, i: usize) -> Result<Self> {
        Word::reduce(&[i as i32], rank)
    }

    /// Freely reduces `letters`. Fails if an index is zero or exceeds `rank`.
    pub fn reduce(letters: &[i32], rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Malformed("free group rank must be positive".into()));
        }
        let mut out: Vec<i32> = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l.unsigned_abs() as usize > rank {
                return Err(Error::Malformed(format!(
                    "letter index {l} out of range for rank {rank}"
                )));
            }
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word { rank, letters: out })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    /// Reduced length `|w|`.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    fn check_rank(&self, other: &Word) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Word) -> Result<Word> {
        self.check_rank(other)?;
        // cancel across the seam only; both sides are already reduced
        let mut k = 0;
        let (a, b) = (&self.letters, &other.letters);
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == -b[k] {
            k += 1;
        }
        let mut letters = Vec::with_capacity(a.len() + b.len() - 2 * k);
        letters.extend_from_slice(&a[..a.len() - k]);
        letters.extend_from_slice(&b[k..]);
        Ok(Word { rank: self.rank, letters })
    }

    pub fn inv(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// `c^-1 a c`.
    pub fn conj(&self, c: &Word) -> Result<Word> {
        c.inv().mul(self)?.mul(c)
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut acc = Word::identity(self.rank);
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base).expect("same rank");
        }
        acc
    }

    /// Parses the text syntax described in the module docs.
    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        if rank == 0 {
            return Err(Error::Malformed("free group rank must be positive".into()));
        }
        let chars: Vec<char> = text.chars().collect();
        let mut p = WordParser { chars: &chars, pos: 0, rank };
        let letters = p.sequence()?;
        p.skip_ws();
        if p.pos != chars.len() {
            return Err(Error::Malformed(format!(
                "unexpected '{}' at offset {} in word {text:?}",
                chars[p.pos], p.pos
            )));
        }
        Word::reduce(&letters, rank)
    }
}

struct WordParser<'a> {
    chars: &'a [char],
    pos: usize,
    rank: usize,
}

impl WordParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && matches!(self.chars[self.pos], ' ' | '\t' | '*' | '.') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sequence(&mut self) -> Result<Vec<i32>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some(')') => return Ok(out),
                Some(_) => {
                    let atom = self.atom()?;
                    let power = self.power()?;
                    let unit = if power < 0 { invert(&atom) } else { atom };
                    for _ in 0..power.unsigned_abs() {
                        out.extend_from_slice(&unit);
                    }
                }
            }
        }
    }

    fn atom(&mut self) -> Result<Vec<i32>> {
        let c = self.peek().expect("caller checked");
        self.pos += 1;
        match c {
            '(' => {
                let inner = self.sequence()?;
                if self.peek() != Some(')') {
                    return Err(Error::Malformed("unbalanced parenthesis in word".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            'e' | '1' => Ok(Vec::new()),
            'x' | 'X' | 'y' | 'Y' => {
                let sign = if c.is_uppercase() { -1 } else { 1 };
                let digits_start = self.pos;
                while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                    self.pos += 1;
                }
                let index = if self.pos > digits_start {
                    if c.eq_ignore_ascii_case(&'y') {
                        return Err(Error::Malformed("'y' takes no index; use x2".into()));
                    }
                    let s: String = self.chars[digits_start..self.pos].iter().collect();
                    s.parse::<usize>()
                        .map_err(|_| Error::Malformed(format!("bad generator index {s}")))?
                } else if c.eq_ignore_ascii_case(&'y') {
                    if self.rank > 2 {
                        return Err(Error::Malformed(
                            "shorthand 'y' is only allowed for rank <= 2".into(),
                        ));
                    }
                    2
                } else {
                    1
                };
                if index == 0 || index > self.rank {
                    return Err(Error::Malformed(format!(
                        "generator index {index} out of range for rank {}",
                        self.rank
                    )));
                }
                Ok(vec![sign * index as i32])
            }
            other => Err(Error::Malformed(format!("unexpected character '{other}' in word"))),
        }
    }

    fn power(&mut self) -> Result<i64> {
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.pos += 1;
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|d| d.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        let k: i64 = s.parse().map_err(|_| Error::Malformed(format!("bad exponent '{s}'")))?;
        if k.unsigned_abs() > 10_000 {
            return Err(Error::Malformed(format!("exponent {k} too large")));
        }
        Ok(k)
    }
}

fn invert(letters: &[i32]) -> Vec<i32> {
    letters.iter().rev().map(|l| -l).collect()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            let idx = l.unsigned_abs();
            let name = if self.rank <= 2 {
                match (idx, l > 0) {
                    (1, true) => "x".to_string(),
                    (1, false) => "X".to_string(),
                    (_, true) => "y".to_string(),
                    (_, false) => "Y".to_string(),
                }
            } else if l > 0 {
                format!("x{idx}")
            } else {
                format!("X{idx}")
            };
            write!(f, "{name}")?;
            if run > 1 {
                write!(f, "^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Position of a letter in the order `x1 < X1 < x2 < X2 < ...`.
fn letter_key(l: i32) -> u32 {
    2 * (l.unsigned_abs() - 1) + u32::from(l < 0)
}

/// Size of the ball of radius `r` in the free group of rank `n`.
pub fn ball_size(rank: usize, r: usize) -> u128 {
    let n = rank as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * n;
    for _ in 1..=r {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(2 * n - 1);
    }
    total
}

/// All reduced words of length at most `r`, ordered by length and then
/// lexicographically with `x1 < X1 < x2 < X2 < ...`.
pub fn ball(rank: usize, r: usize) -> Vec<Word> {
    assert!(rank > 0, "free group rank must be positive");
    let mut alphabet: Vec<i32> = (1..=rank as i32).flat_map(|i| [i, -i]).collect();
    alphabet.sort_by_key(|&l| letter_key(l));
    let mut out = Vec::with_capacity(ball_size(rank, r).min(1 << 24) as usize);
    let mut prefix = Vec::with_capacity(r);
    for len in 0..=r {
        sphere_rec(rank, len, &alphabet, &mut prefix, &mut out);
    }
    out
}

fn sphere_rec(rank: usize, len: usize, alphabet: &[i32], prefix: &mut Vec<i32>, out: &mut Vec<Word>) {
    if prefix.len() == len {
        out.push(Word { rank, letters: prefix.clone() });
        return;
    }
    for &l in alphabet {
        if prefix.last() == Some(&-l) {
            continue;
        }
        prefix.push(l);
        sphere_rec(rank, len, alphabet, prefix, out);
        prefix.pop();
    }
}

/// Generator images defining a homomorphism `F -> H`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenImages<E = usize> {
    images: Vec<E>,
}

impl<E: Clone> GenImages<E> {
    pub fn new(images: Vec<E>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Malformed("a homomorphism needs at least one generator image".into()));
        }
        Ok(GenImages { images })
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[E] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &E {
        &self.images[i - 1]
    }
}

/// Image of `w` under the homomorphism sending `x_i` to `gi.images[i-1]`.
/// Letters are multiplied left to right.
pub fn evaluate<G: Group>(w: &Word, gi: &GenImages<G::Elem>, group: &G) -> Result<G::Elem> {
    if w.rank() != gi.rank() {
        return Err(Error::RankMismatch { left: w.rank(), right: gi.rank() });
    }
    let inverses: Vec<G::Elem> = gi.images.iter().map(|y| group.inverse(y)).collect();
    let mut acc = group.identity();
    for &l in w.letters() {
        let idx = l.unsigned_abs() as usize - 1;
        let y = if l > 0 { &gi.images[idx] } else { &inverses[idx] };
        acc = group.op(&acc, y);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{symmetric_group, Perm};
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert!(Word::reduce(&[1, -1], 2).unwrap().is_identity());
        assert_eq!(Word::reduce(&[1, 2, -2, 2], 2).unwrap().letters(), &[1, 2]);
        let g1 = Word::reduce(&[-1, -1, -2, -2, -2], 2).unwrap();
        assert_eq!(g1.len(), 5);
        assert_eq!(g1.letters(), &[-1, -1, -2, -2, -2]);
        assert!(matches!(Word::reduce(&[3], 2), Err(Error::Malformed(_))));
        assert!(matches!(Word::reduce(&[0], 2), Err(Error::Malformed(_))));
    }

    #[test]
    fn mul_examples() {
        assert!(w("xy^2").mul(&w("Y^2X")).unwrap().is_identity());
        assert_eq!(w("x").mul(&w("y")).unwrap().len(), 2);
        let tail = w("xyxyxyxyxy");
        let p = w("X^2").mul(&tail).unwrap();
        assert_eq!(p, w("Xyxyxyxyxy"));
        assert_eq!(p.len(), 10);
        assert_eq!(w("X^2(xy)^5").len(), 10);
        let three = Word::parse("x1", 3).unwrap();
        assert!(matches!(w("x").mul(&three), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn inv_and_conj_examples() {
        assert!(Word::identity(2).inv().is_identity());
        assert_eq!(w("xy").inv(), w("YX"));
        assert_eq!(w("X^2Y^3").inv(), w("y^3x^2"));
        assert_eq!(w("x").conj(&Word::identity(2)).unwrap(), w("x"));
        assert!(Word::identity(2).conj(&w("y")).unwrap().is_identity());
        let c = w("x").conj(&w("y")).unwrap();
        assert_eq!(c, w("Yxy"));
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("X^2 Y^3").letters(), &[-1, -1, -2, -2, -2]);
        assert_eq!(w("x^-2").letters(), &[-1, -1]);
        assert_eq!(w("e").len(), 0);
        assert_eq!(w("x1X2").letters(), &[1, -2]);
        assert_eq!(w("X^2(xy)^5").to_string(), "Xyxyxyxyxy");
        assert_eq!(w("X^2Y^3").to_string(), "X^2Y^3");
        let r3 = Word::parse("x3^2 X1", 3).unwrap();
        assert_eq!(r3.to_string(), "x3^2X1");
        assert_eq!(Word::parse(&r3.to_string(), 3).unwrap(), r3);
        assert!(Word::parse("y", 3).is_err());
        assert!(Word::parse("x3", 2).is_err());
        assert!(Word::parse("(xy", 2).is_err());
        assert!(Word::parse("xq", 2).is_err());
    }

    #[test]
    fn ball_examples() {
        assert_eq!(ball(2, 0), vec![Word::identity(2)]);
        let b1 = ball(2, 1);
        assert_eq!(b1.len(), 5);
        assert_eq!(b1.iter().map(|w| w.to_string()).collect::<Vec<_>>(), ["e", "x", "X", "y", "Y"]);
        assert_eq!(ball(2, 2).len(), 17);
        assert_eq!(ball(2, 3).len(), 53);
    }

    #[test]
    fn ball_size_matches_enumeration() {
        for n in 1u32..=3 {
            for r in 0..=5 {
                let closed = 1 + (1..=r as u32).map(|l| 2 * n * (2 * n - 1).pow(l - 1)).sum::<u32>();
                assert_eq!(ball(n as usize, r).len() as u32, closed, "n={n} r={r}");
                assert_eq!(ball_size(n as usize, r), closed as u128);
            }
        }
    }

    #[test]
    fn ball_is_sorted_and_distinct() {
        let b = ball(2, 4);
        let key = |w: &Word| (w.len(), w.letters().iter().map(|&l| letter_key(l)).collect::<Vec<_>>());
        for pair in b.windows(2) {
            assert!(key(&pair[0]) < key(&pair[1]));
        }
    }

    #[test]
    fn group_axioms_on_ball() {
        let b = ball(2, 3);
        let e = Word::identity(2);
        for a in &b {
            assert_eq!(a.mul(&e).unwrap(), *a);
            assert_eq!(e.mul(a).unwrap(), *a);
            assert!(a.mul(&a.inv()).unwrap().is_identity());
            assert_eq!(a.inv().len(), a.len());
        }
        // associativity on a strided sample of triples keeps this under a second
        for a in b.iter().step_by(3) {
            for bb in b.iter().step_by(2) {
                for c in b.iter().step_by(5) {
                    let l = a.mul(bb).unwrap().mul(c).unwrap();
                    let r = a.mul(&bb.mul(c).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let s3 = symmetric_group(3).unwrap();
        let t = s3.index_of_perm(&Perm::parse_cycles("(1 2)", 3).unwrap()).unwrap();
        let c = s3.index_of_perm(&Perm::parse_cycles("(1 2 3)", 3).unwrap()).unwrap();
        let gi = GenImages::new(vec![t, c]).unwrap();
        assert_eq!(evaluate(&Word::identity(2), &gi, &s3).unwrap(), 0);
        let xy = evaluate(&w("xy"), &gi, &s3).unwrap();
        // right action: 1 -> 2 -> 3, 3 -> 3 -> 1, 2 -> 1 -> 2
        assert_eq!(s3.perm(xy).unwrap().to_string(), "(1 3)");
        assert_eq!(evaluate(&w("X^2Y^3"), &gi, &s3).unwrap(), 0);
        let bad = GenImages::new(vec![t]).unwrap();
        assert!(matches!(evaluate(&w("x"), &bad, &s3), Err(Error::RankMismatch { .. })));
    }

    fn raw_letters() -> impl Strategy<Value = Vec<i32>> {
        prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..=12)
    }

    proptest! {
        #[test]
        fn reduce_idempotent_and_shrinking(letters in raw_letters()) {
            let r = Word::reduce(&letters, 2).unwrap();
            prop_assert!(r.len() <= letters.len());
            prop_assert_eq!(Word::reduce(r.letters(), 2).unwrap(), r.clone());
            for pair in r.letters().windows(2) {
                prop_assert_ne!(pair[0], -pair[1]);
            }
            prop_assert_eq!(Word::parse(&r.to_string(), 2).unwrap(), r);
        }
    }

    #[test]
    fn evaluate_is_multiplicative() {
        use rand::{Rng, SeedableRng};
        let s5 = symmetric_group(5).unwrap();
        let b = ball(2, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let a = &b[rng.gen_range(0..b.len())];
            let c = &b[rng.gen_range(0..b.len())];
            let gi = GenImages::new(vec![rng.gen_range(0..120), rng.gen_range(0..120)]).unwrap();
            let lhs = evaluate(&a.mul(c).unwrap(), &gi, &s5).unwrap();
            let rhs = s5.mul(evaluate(a, &gi, &s5).unwrap(), evaluate(c, &gi, &s5).unwrap());
            assert_eq!(lhs, rhs);
        }
    }
}
