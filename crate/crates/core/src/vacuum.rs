//! Vacuum projector extension of the free algebra.
//!
//! The extended algebra is generated by the measurement operators and one
//! extra symbol `V`, with `V V = V` and `V† = V`. Every extended word is kept
//! in the normal form `A_0 V A_1 V ... V A_k` where the `A_j` are plain words
//! and no interior `A_j` is the identity. An invariant state extends by
//! factorisation, `ρ(A V B) = ρ(A) ρ(B)`, so the value of a normal-form word
//! is the product of the values of its segments.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;

use crate::algebra::{AlgebraElement, Index, Word};
use crate::error::{Error, Result};
use crate::gaussian::State;
use crate::gns::{random_coefficient, random_word, GramReport};

/// Default lower bound on `ρ(X† X)` for conditioning.
pub const CONDITION_TOL: f64 = 1e-12;

/// `A_0 V A_1 V ... V A_k` in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedWord {
    segments: Vec<Word>,
}

impl ExtendedWord {
    /// Normalises by dropping identity segments between two projectors.
    pub fn from_segments(segments: Vec<Word>) -> Self {
        assert!(!segments.is_empty(), "an extended word has at least one segment");
        let last = segments.len() - 1;
        let segments = segments
            .into_iter()
            .enumerate()
            .filter(|(k, w)| *k == 0 || *k == last || !w.is_identity())
            .map(|(_, w)| w)
            .collect();
        ExtendedWord { segments }
    }

    pub fn plain(w: Word) -> Self {
        ExtendedWord { segments: vec![w] }
    }

    pub fn identity() -> Self {
        Self::plain(Word::identity())
    }

    /// The projector `V` alone.
    pub fn projector() -> Self {
        ExtendedWord {
            segments: vec![Word::identity(), Word::identity()],
        }
    }

    pub fn segments(&self) -> &[Word] {
        &self.segments
    }

    pub fn projector_count(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn is_plain(&self) -> bool {
        self.segments.len() == 1
    }

    pub fn concat(&self, other: &ExtendedWord) -> ExtendedWord {
        let mut segments = self.segments.clone();
        let joint = segments.pop().expect("non-empty").concat(&other.segments[0]);
        segments.push(joint);
        segments.extend(other.segments[1..].iter().cloned());
        Self::from_segments(segments)
    }

    /// Reverses the segments and takes the adjoint of each; `V† = V`.
    pub fn adjoint(&self) -> ExtendedWord {
        ExtendedWord {
            segments: self.segments.iter().rev().map(Word::adjoint).collect(),
        }
    }

    /// Parses words such as `M1*V*M2`, `V*M1*M2*V` or `1`.
    pub fn parse(text: &str, resolve: impl Fn(&str) -> Option<Index>) -> Result<Self> {
        let mut segments = vec![Vec::new()];
        for token in text.split('*').map(str::trim) {
            match token {
                "V" => segments.push(Vec::new()),
                "1" | "" => {}
                _ => {
                    let name = token
                        .strip_prefix('M')
                        .ok_or_else(|| Error::Parse(format!("expected `M<tag>` or `V`, found `{token}`")))?;
                    let i = resolve(name).ok_or_else(|| Error::UnknownIndex(name.to_string()))?;
                    segments.last_mut().expect("non-empty").push(i);
                }
            }
        }
        Ok(Self::from_segments(segments.into_iter().map(Word::new).collect()))
    }
}

impl From<Word> for ExtendedWord {
    fn from(w: Word) -> Self {
        ExtendedWord::plain(w)
    }
}

impl fmt::Display for ExtendedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, w) in self.segments.iter().enumerate() {
            if k > 0 {
                parts.push("V".to_string());
            }
            if !w.is_identity() {
                parts.push(w.to_string());
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// Complex-linear combination of extended words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtendedElement {
    terms: BTreeMap<ExtendedWord, Complex64>,
}

impl ExtendedElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(c: Complex64, w: ExtendedWord) -> Self {
        let mut out = Self::zero();
        out.add_term(c, w);
        out
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Complex64, ExtendedWord)>) -> Self {
        let mut out = Self::zero();
        for (c, w) in terms {
            out.add_term(c, w);
        }
        out
    }

    pub fn add_term(&mut self, c: Complex64, w: ExtendedWord) {
        match self.terms.entry(w) {
            Entry::Vacant(slot) => {
                if !c.is_zero() {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExtendedWord, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (c.conj(), w.adjoint())))
    }
}

impl From<&AlgebraElement> for ExtendedElement {
    fn from(a: &AlgebraElement) -> Self {
        Self::from_terms(a.terms().map(|(w, c)| (*c, ExtendedWord::plain(w.clone()))))
    }
}

impl From<ExtendedWord> for ExtendedElement {
    fn from(w: ExtendedWord) -> Self {
        Self::term(Complex64::one(), w)
    }
}

impl Add<&ExtendedElement> for &ExtendedElement {
    type Output = ExtendedElement;

    fn add(self, rhs: &ExtendedElement) -> ExtendedElement {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(*c, w.clone());
        }
        out
    }
}

impl Sub<&ExtendedElement> for &ExtendedElement {
    type Output = ExtendedElement;

    fn sub(self, rhs: &ExtendedElement) -> ExtendedElement {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(-*c, w.clone());
        }
        out
    }
}

impl Mul<&ExtendedElement> for &ExtendedElement {
    type Output = ExtendedElement;

    fn mul(self, rhs: &ExtendedElement) -> ExtendedElement {
        let mut out = ExtendedElement::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &rhs.terms {
                out.add_term(ca * cb, wa.concat(wb));
            }
        }
        out
    }
}

/// `ρ_G(A_0 V A_1 ... V A_k) = Π_j ρ(A_j)`.
pub fn extended_expect<S: State + ?Sized>(s: &S, w: &ExtendedWord) -> Result<Complex64> {
    w.segments()
        .iter()
        .try_fold(Complex64::one(), |acc, seg| Ok(acc * s.expect_word(seg)?))
}

/// Linear extension of [`extended_expect`].
pub fn extended_expect_element<S: State + ?Sized>(s: &S, a: &ExtendedElement) -> Result<Complex64> {
    a.terms()
        .try_fold(Complex64::zero(), |acc, (w, c)| Ok(acc + c * extended_expect(s, w)?))
}

/// `(ρ(M_i V M_j), ρ(V M_i M_j))`. For a mean-zero base state the first entry
/// is zero and the second is `(i^c, j)`, so a nonzero two-point value shows
/// `[M_i, V] ≠ 0` even when the base algebra is commutative.
pub fn commutation_witness<S: State + ?Sized>(s: &S, i: &Index, j: &Index) -> Result<(Complex64, Complex64)> {
    let mi = Word::generator(i.clone());
    let mj = Word::generator(j.clone());
    let split = ExtendedWord::from_segments(vec![mi.clone(), mj.clone()]);
    let left = ExtendedWord::from_segments(vec![Word::identity(), mi.concat(&mj)]);
    Ok((extended_expect(s, &split)?, extended_expect(s, &left)?))
}

/// `A ↦ ρ_G(X† A X) / ρ_G(X† X)`.
#[derive(Debug, Clone)]
pub struct ConditionedState<S> {
    base: S,
    conditioner: ExtendedElement,
    conditioner_adjoint: ExtendedElement,
    normalization: f64,
}

/// Conditions `s` on `x` with the default tolerance.
pub fn condition<S: State>(s: S, x: &AlgebraElement) -> Result<ConditionedState<S>> {
    condition_with_tolerance(s, x, CONDITION_TOL)
}

pub fn condition_with_tolerance<S: State>(s: S, x: &AlgebraElement, tol: f64) -> Result<ConditionedState<S>> {
    let norm = s.expect(&(&x.adjoint() * x))?;
    if norm.re.is_nan() || norm.re <= tol {
        return Err(Error::NullConditioner(norm.re));
    }
    let conditioner = ExtendedElement::from(x);
    Ok(ConditionedState {
        base: s,
        conditioner_adjoint: conditioner.adjoint(),
        conditioner,
        normalization: norm.re,
    })
}

impl<S: State> ConditionedState<S> {
    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Value on an element of the extended algebra.
    pub fn expect_extended(&self, a: &ExtendedElement) -> Result<Complex64> {
        let sandwich = &(&self.conditioner_adjoint * a) * &self.conditioner;
        Ok(extended_expect_element(&self.base, &sandwich)? / self.normalization)
    }
}

impl<S: State> State for ConditionedState<S> {
    fn expect_word(&self, w: &Word) -> Result<Complex64> {
        self.expect_extended(&ExtendedWord::plain(w.clone()).into())
    }
}

/// Gram matrix `⟨w_a, w_b⟩ = ρ_G(w_a† w_b)` of a list of extended words.
pub fn extended_gram<S: State + ?Sized>(words: &[ExtendedWord], s: &S, tolerance: f64) -> Result<GramReport> {
    let adjoints: Vec<ExtendedWord> = words.iter().map(ExtendedWord::adjoint).collect();
    GramReport::from_entries(words.len(), tolerance, |a, b| {
        extended_expect(s, &adjoints[a].concat(&words[b]))
    })
}

/// Distinct normal-form extended words with at most `projectors` copies of
/// `V` and segments drawn from `segments`.
pub fn extended_basis(segments: &[Word], projectors: usize) -> Vec<ExtendedWord> {
    let mut out: Vec<ExtendedWord> = Vec::new();
    let mut layer: Vec<Vec<Word>> = segments.iter().map(|w| vec![w.clone()]).collect();
    for k in 0..=projectors {
        for segs in &layer {
            let w = ExtendedWord::from_segments(segs.clone());
            if !out.contains(&w) {
                out.push(w);
            }
        }
        if k == projectors {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|segs| {
                segments.iter().map(move |s| {
                    let mut next = segs.clone();
                    next.push(s.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// Random extended element: one to three terms, each with up to two
/// projectors and segments of length `<= max_segment_len`.
pub fn random_extended_element<R: Rng + ?Sized>(
    alphabet: &[Index],
    max_segment_len: usize,
    rng: &mut R,
) -> ExtendedElement {
    let terms = rng.random_range(1..=3);
    ExtendedElement::from_terms((0..terms).map(|_| {
        let projectors = rng.random_range(0..=2);
        let segs = (0..=projectors)
            .map(|_| random_word(alphabet, max_segment_len, rng))
            .collect();
        (random_coefficient(rng), ExtendedWord::from_segments(segs))
    }))
}

/// Smallest `Re ρ_G(A† A)` over `trials` random extended elements.
pub fn extended_positivity_probe<S: State + ?Sized, R: Rng + ?Sized>(
    s: &S,
    alphabet: &[Index],
    trials: usize,
    max_segment_len: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a = random_extended_element(alphabet, max_segment_len, rng);
        let v = extended_expect_element(s, &(&a.adjoint() * &a))?;
        worst = worst.min(v.re);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{GaussianKernel, GaussianState};

    fn k2() -> GaussianState {
        GaussianState::new(GaussianKernel::real(&[&[1.0, 0.5], &[0.5, 1.0]]).unwrap()).unwrap()
    }

    fn resolve(s: &str) -> Option<Index> {
        s.parse::<i64>().ok().map(Index::new)
    }

    fn ew(s: &str) -> ExtendedWord {
        ExtendedWord::parse(s, resolve).unwrap()
    }

    #[test]
    fn projector_alone() {
        assert_eq!(
            extended_expect(&k2(), &ExtendedWord::projector()).unwrap(),
            Complex64::one()
        );
        assert_eq!(ew("V"), ExtendedWord::projector());
    }

    #[test]
    fn split_pair_factorises_to_zero() {
        assert_eq!(extended_expect(&k2(), &ew("M1*V*M2")).unwrap(), Complex64::zero());
    }

    #[test]
    fn sandwiched_pair() {
        let v = extended_expect(&k2(), &ew("V*M1*M2*V")).unwrap();
        assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn idempotence_and_adjoint() {
        assert_eq!(ew("V*V"), ew("V"));
        assert_eq!(ew("M1*V*V*V*M2"), ew("M1*V*M2"));
        assert_eq!(
            ExtendedWord::projector().concat(&ExtendedWord::projector()),
            ExtendedWord::projector()
        );
        let (a, ac) = Index::pair("a", "ac");
        let b = Index::new("b");
        let w = ExtendedWord::from_segments(vec![Word::generator(a.clone()), Word::new(vec![b.clone(), a])]);
        let adj = w.adjoint();
        assert_eq!(
            adj,
            ExtendedWord::from_segments(vec![Word::new(vec![ac.clone(), b]), Word::generator(ac)])
        );
        assert_eq!(ew("V*M1").to_string(), "V*M1");
        assert_eq!(ew("1").to_string(), "1");
    }

    #[test]
    fn witness_values() {
        let (i1, i2) = (Index::new(1), Index::new(2));
        let (split, joined) = commutation_witness(&k2(), &i1, &i2).unwrap();
        assert_eq!(split, Complex64::zero());
        assert!((joined - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let (split, joined) = commutation_witness(&k2(), &i1, &i1).unwrap();
        assert_eq!((split, joined), (Complex64::zero(), Complex64::one()));

        let diag = GaussianState::new(GaussianKernel::real(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(
            commutation_witness(&diag, &i1, &i2).unwrap(),
            (Complex64::zero(), Complex64::zero())
        );
    }

    #[test]
    fn conditioning_on_identity_is_trivial() {
        let c = condition(k2(), &AlgebraElement::one()).unwrap();
        let w = Word::new(vec![Index::new(1), Index::new(2)]);
        assert_eq!(c.expect_word(&w).unwrap(), k2().expect_word(&w).unwrap());
    }

    #[test]
    fn conditioning_on_m1() {
        let x = AlgebraElement::generator(Index::new(1));
        let c = condition(k2(), &x).unwrap();
        assert_eq!(c.normalization(), 1.0);
        let v = c.expect_word(&Word::new(vec![Index::new(2), Index::new(2)])).unwrap();
        // M1 M2 M2 M1: (1,2)(2,1) + (1,2)(2,1) + (1,1)(2,2)
        assert!((v - Complex64::new(1.5, 0.0)).norm() < 1e-15);
        assert!((c.expect(&AlgebraElement::one()).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn null_conditioner_rejected() {
        let degenerate = GaussianState::new(GaussianKernel::real(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap()).unwrap();
        let x = &AlgebraElement::generator(Index::new(1)) - &AlgebraElement::generator(Index::new(2));
        assert!(matches!(condition(degenerate, &x), Err(Error::NullConditioner(_))));
        assert!(matches!(
            condition(k2(), &AlgebraElement::zero()),
            Err(Error::NullConditioner(_))
        ));
    }

    #[test]
    fn extended_basis_normal_forms() {
        let segs = [Word::identity(), Word::generator(Index::new(1))];
        let basis = extended_basis(&segs, 1);
        let names: Vec<String> = basis.iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["1", "M1", "V", "V*M1", "M1*V", "M1*V*M1"]);
    }
}
