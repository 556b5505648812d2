//! The free associative *-algebra generated by indexed measurement operators.
//!
//! Elements are finite complex-linear combinations of ordered words. No
//! commutation relations are ever applied here: relations between generators
//! only show up through the states that evaluate them.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pruning threshold for coefficients that come out of floating point work.
pub const NUMERIC_PRUNE_EPS: f64 = 1e-14;

/// Opaque identifier of a measurement label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Int(i64),
    Name(Arc<str>),
    /// Structural hash of a wavepacket test function.
    Packet(u64),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(n) => write!(f, "{n}"),
            Label::Name(s) => f.write_str(s),
            Label::Packet(h) => write!(f, "wp{h:016x}"),
        }
    }
}

impl From<i64> for Label {
    fn from(n: i64) -> Self {
        Label::Int(n)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Name(Arc::from(s))
    }
}

/// A measurement index together with its involution partner `i^c`.
///
/// Equality, ordering and hashing look at the tag only.
#[derive(Debug, Clone)]
pub struct Index {
    tag: Label,
    partner: Label,
}

impl Index {
    /// An index that is its own involution partner.
    pub fn new(tag: impl Into<Label>) -> Self {
        let tag = tag.into();
        Index {
            partner: tag.clone(),
            tag,
        }
    }

    /// A pair `(a, a^c)` of distinct indices exchanged by the involution.
    pub fn pair(a: impl Into<Label>, b: impl Into<Label>) -> (Index, Index) {
        let (a, b) = (a.into(), b.into());
        (
            Index {
                tag: a.clone(),
                partner: b.clone(),
            },
            Index { tag: b, partner: a },
        )
    }

    pub(crate) fn with_partner(tag: Label, partner: Label) -> Self {
        Index { tag, partner }
    }

    pub fn tag(&self) -> &Label {
        &self.tag
    }

    pub fn partner(&self) -> &Label {
        &self.partner
    }

    /// `i ↦ i^c`.
    pub fn involve(&self) -> Index {
        Index {
            tag: self.partner.clone(),
            partner: self.tag.clone(),
        }
    }

    pub fn is_self_conjugate(&self) -> bool {
        self.tag == self.partner
    }
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
    }
}

impl Eq for Index {}

impl Hash for Index {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tag.hash(state);
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tag.cmp(&other.tag)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.tag.fmt(f)
    }
}

/// An ordered product `M_{i_1} M_{i_2} ... M_{i_N}`; the empty word is `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Index>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(i: Index) -> Self {
        Word(vec![i])
    }

    pub fn new(factors: Vec<Index>) -> Self {
        Word(factors)
    }

    pub fn factors(&self) -> &[Index] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut factors = Vec::with_capacity(self.len() + other.len());
        factors.extend_from_slice(&self.0);
        factors.extend_from_slice(&other.0);
        Word(factors)
    }

    /// Reverses the factors and maps each index through the involution.
    pub fn adjoint(&self) -> Word {
        Word(self.0.iter().rev().map(Index::involve).collect())
    }

    /// Parses `M1*M2*Mfoo` (or `1` for the identity). `resolve` maps the text
    /// after each `M` to an index.
    pub fn parse(text: &str, resolve: impl Fn(&str) -> Option<Index>) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Word::identity());
        }
        let mut factors = Vec::new();
        for token in text.split('*') {
            let token = token.trim();
            if token == "1" {
                continue;
            }
            let name = token
                .strip_prefix('M')
                .ok_or_else(|| Error::Parse(format!("expected `M<tag>`, found `{token}`")))?;
            let index = resolve(name).ok_or_else(|| Error::UnknownIndex(name.to_string()))?;
            factors.push(index);
        }
        Ok(Word(factors))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded order: shorter words first, then lexicographic by tag.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str("*")?;
            }
            write!(f, "M{i}")?;
        }
        Ok(())
    }
}

impl FromIterator<Index> for Word {
    fn from_iter<T: IntoIterator<Item = Index>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// A finite complex-linear combination of words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<Word, Complex64>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_word(Word::identity())
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::term(c, Word::identity())
    }

    pub fn from_word(w: Word) -> Self {
        Self::term(Complex64::new(1.0, 0.0), w)
    }

    pub fn generator(i: Index) -> Self {
        Self::from_word(Word::generator(i))
    }

    pub fn term(c: Complex64, w: Word) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(w, c);
        }
        AlgebraElement { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Complex64, Word)>) -> Self {
        let mut out = AlgebraElement::zero();
        for (c, w) in terms {
            out.add_term(c, w);
        }
        out
    }

    pub fn add_term(&mut self, c: Complex64, w: Word) {
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(w) {
            Entry::Vacant(slot) => {
                if c != zero {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == zero {
                    slot.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> Complex64 {
        self.terms.get(w).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Longest word length, or `None` for the zero element.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).max()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, v)| (v * c, w.clone())))
    }

    /// Anti-linear, order reversing, `M_i ↦ M_{i^c}`.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, v)| (v.conj(), w.adjoint())))
    }

    /// Drops every coefficient with modulus `<= eps`.
    pub fn prune(&self, eps: f64) -> Self {
        AlgebraElement {
            terms: self
                .terms
                .iter()
                .filter(|(_, v)| v.norm() > eps)
                .map(|(w, v)| (w.clone(), *v))
                .collect(),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).terms.values().all(|v| v.norm() <= tol)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (w, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}{:+}i)·{}", c.re, c.im, w)?;
        }
        Ok(())
    }
}

impl From<Word> for AlgebraElement {
    fn from(w: Word) -> Self {
        AlgebraElement::from_word(w)
    }
}

impl Add<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;

    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(*c, w.clone());
        }
        out
    }
}

impl Sub<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(-*c, w.clone());
        }
        out
    }
}

impl Mul<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &rhs.terms {
                out.add_term(ca * cb, wa.concat(wb));
            }
        }
        out
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $m(self, rhs: AlgebraElement) -> AlgebraElement {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $m(self, rhs: &AlgebraElement) -> AlgebraElement {
                (&self).$m(rhs)
            }
        }
        impl $tr<AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;
            fn $m(self, rhs: AlgebraElement) -> AlgebraElement {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        -&self
    }
}

impl Mul<AlgebraElement> for Complex64 {
    type Output = AlgebraElement;

    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        rhs.scale(self)
    }
}

impl Mul<&AlgebraElement> for Complex64 {
    type Output = AlgebraElement;

    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        rhs.scale(self)
    }
}

/// `M_i` as an algebra element.
pub fn m(i: &Index) -> AlgebraElement {
    AlgebraElement::generator(i.clone())
}
