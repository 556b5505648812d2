//! Finite windows onto the GNS construction.
//!
//! A state `ρ` turns the free algebra into a pre-Hilbert space with
//! `⟨A, B⟩ = ρ(A† B)`. On the span of words of bounded length that inner
//! product is the Gram matrix; positivity of the state is exactly
//! positive semi-definiteness of every such matrix. Quotienting the null space
//! gives finite pieces of the representation space, and left multiplication
//! by a generator maps the degree-`d` piece into the degree-`d+1` piece
//! without truncation.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Index, Word};
use crate::error::{Error, Result};
use crate::gaussian::State;
use crate::linalg::{self, CMatrix};

/// Default absolute tolerance for counting null eigenvalues.
pub const GRAM_TOL: f64 = 1e-10;

/// Relative eigenvalue threshold below which a direction is quotiented out.
pub const QUOTIENT_REL_TOL: f64 = 1e-10;

/// All words of length `<= degree` over an index list, identity first.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    indices: Vec<Index>,
    degree: usize,
    words: Vec<Word>,
}

/// Words of length `<= d` in graded-lexicographic order (letters ordered as
/// in `indices`), identity first. Repeated indices are ignored.
pub fn build_basis(indices: &[Index], d: usize) -> MonomialBasis {
    let mut letters: Vec<Index> = Vec::with_capacity(indices.len());
    for i in indices {
        if !letters.contains(i) {
            letters.push(i.clone());
        }
    }
    let mut words = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..d {
        if letters.is_empty() {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|w| letters.iter().map(move |i| w.concat(&Word::generator(i.clone()))))
            .collect();
        words.extend(layer.iter().cloned());
    }
    MonomialBasis {
        indices: letters,
        degree: d,
        words,
    }
}

impl MonomialBasis {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.words.iter().position(|x| x == w)
    }
}

/// Gram matrix of a family of vectors with its spectrum.
#[derive(Debug, Clone)]
pub struct GramReport {
    pub gram: CMatrix,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub null_dimension: usize,
    pub tolerance: f64,
}

/// JSON face of a [`GramReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSummary {
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    pub null_dimension: usize,
    pub tolerance: f64,
}

impl GramReport {
    /// Builds the report from an entry function `(a, b) ↦ ⟨v_a, v_b⟩`.
    pub fn from_entries(n: usize, tolerance: f64, entry: impl Fn(usize, usize) -> Result<Complex64>) -> Result<Self> {
        let mut gram = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                gram[(a, b)] = entry(a, b)?;
            }
        }
        Ok(Self::from_matrix(gram, tolerance))
    }

    pub fn from_matrix(gram: CMatrix, tolerance: f64) -> Self {
        let (eigenvalues, _) = linalg::hermitian_eigen(&gram);
        let null_dimension = eigenvalues.iter().filter(|l| l.abs() <= tolerance).count();
        GramReport {
            gram,
            eigenvalues,
            null_dimension,
            tolerance,
        }
    }

    pub fn dimension(&self) -> usize {
        self.gram.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -self.tolerance
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.gram).0
    }

    pub fn summary(&self) -> GramSummary {
        GramSummary {
            dimension: self.dimension(),
            eigenvalues: self.eigenvalues.clone(),
            null_dimension: self.null_dimension,
            tolerance: self.tolerance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("plain data serializes")
    }
}

/// `G_ab = ρ(w_a† w_b)` with the default tolerance.
pub fn gram<S: State + ?Sized>(basis: &MonomialBasis, s: &S) -> Result<GramReport> {
    gram_with_tolerance(basis, s, GRAM_TOL)
}

pub fn gram_with_tolerance<S: State + ?Sized>(basis: &MonomialBasis, s: &S, tolerance: f64) -> Result<GramReport> {
    let words = basis.words();
    let adjoints: Vec<Word> = words.iter().map(Word::adjoint).collect();
    GramReport::from_entries(words.len(), tolerance, |a, b| {
        s.expect_word(&adjoints[a].concat(&words[b]))
    })
}

/// Orthonormal coordinates on the quotient of a span by the Gram null space.
#[derive(Debug, Clone)]
struct Quotient {
    /// Column `r` holds the coefficients of the `r`-th orthonormal vector.
    coords: CMatrix,
}

impl Quotient {
    fn new(report: &GramReport) -> Result<Self> {
        let (values, vectors) = linalg::hermitian_eigen(&report.gram);
        let largest = values.last().copied().unwrap_or(0.0).max(0.0);
        let min = values.first().copied().unwrap_or(0.0);
        if min < -report.tolerance * largest.max(1.0) {
            return Err(Error::IndefiniteGram(min));
        }
        let threshold = QUOTIENT_REL_TOL * largest;
        let kept: Vec<usize> = (0..values.len())
            .filter(|&k| values[k] > threshold && values[k] > 0.0)
            .collect();
        let n = report.gram.nrows();
        let coords = CMatrix::from_fn(n, kept.len(), |a, r| vectors[(a, kept[r])] / values[kept[r]].sqrt());
        Ok(Quotient { coords })
    }

    fn dim(&self) -> usize {
        self.coords.ncols()
    }
}

/// Left-multiplication operators of a state on finite quotient spaces.
///
/// `maps[i]` sends the degree-`d` quotient `H_d` into the degree-`(d+1)`
/// quotient `H_{d+1}`; `embedding` is the isometric inclusion `H_d → H_{d+1}`.
#[derive(Debug, Clone)]
pub struct Representation {
    pub basis: MonomialBasis,
    pub maps: BTreeMap<Index, CMatrix>,
    pub embedding: CMatrix,
    /// Coordinates of the identity word in `H_d`.
    pub cyclic_vector: DVector<Complex64>,
}

/// Builds the representation on the span of `basis` (degree `d`) using
/// Gram data up to word length `2d + 2`.
pub fn represent<S: State + ?Sized>(basis: &MonomialBasis, s: &S) -> Result<Representation> {
    represent_with_tolerance(basis, s, GRAM_TOL)
}

pub fn represent_with_tolerance<S: State + ?Sized>(
    basis: &MonomialBasis,
    s: &S,
    tolerance: f64,
) -> Result<Representation> {
    let upper = build_basis(basis.indices(), basis.degree() + 1);
    let big = gram_with_tolerance(&upper, s, tolerance)?;
    let n = basis.len();
    // basis words are a prefix of the upper basis in graded order
    debug_assert!(basis.words().iter().zip(upper.words()).all(|(a, b)| a == b));
    let small = GramReport::from_matrix(big.gram.view((0, 0), (n, n)).into_owned(), tolerance);

    let lower_q = Quotient::new(&small)?;
    let upper_q = Quotient::new(&big)?;
    let c = &lower_q.coords;
    let d_adj = upper_q.coords.adjoint();

    let cross = big.gram.columns(0, n).into_owned();
    let embedding = &d_adj * &cross * c;

    let mut maps = BTreeMap::new();
    for i in basis.indices() {
        let cols: Vec<usize> = basis
            .words()
            .iter()
            .map(|w| {
                upper
                    .position(&Word::generator(i.clone()).concat(w))
                    .expect("left multiples of degree-d words lie in the degree d+1 basis")
            })
            .collect();
        let x = CMatrix::from_fn(upper.len(), n, |b, a| big.gram[(b, cols[a])]);
        maps.insert(i.clone(), &d_adj * x * c);
    }

    let cyclic_vector = DVector::from_fn(lower_q.dim(), |r, _| {
        (0..n).map(|a| c[(a, r)].conj() * small.gram[(a, 0)]).sum()
    });

    Ok(Representation {
        basis: basis.clone(),
        maps,
        embedding,
        cyclic_vector,
    })
}

impl Representation {
    /// Dimension of the degree-`d` quotient.
    pub fn dimension(&self) -> usize {
        self.embedding.ncols()
    }

    /// Dimension of the degree-`(d+1)` quotient.
    pub fn output_dimension(&self) -> usize {
        self.embedding.nrows()
    }

    /// `π(1)` on `H_d`.
    pub fn identity(&self) -> CMatrix {
        self.embedding.adjoint() * &self.embedding
    }

    /// `π(w) Ω` in `H_{d+1}` coordinates, for `|w| <= d + 1`.
    pub fn apply_to_cyclic(&self, w: &Word) -> Result<DVector<Complex64>> {
        if w.len() > self.basis.degree() + 1 {
            return Err(Error::InvalidParameter(format!(
                "word of length {} exceeds representation degree {} + 1",
                w.len(),
                self.basis.degree()
            )));
        }
        let mut v = self.cyclic_vector.clone();
        let mut lifted = &self.embedding * &v;
        for (step, i) in w.factors().iter().rev().enumerate() {
            if step > 0 {
                v = self.embedding.adjoint() * &lifted;
            }
            let map = self.maps.get(i).ok_or_else(|| Error::UnknownIndex(i.to_string()))?;
            lifted = map * &v;
        }
        Ok(lifted)
    }

    /// `⟨Ω, π(w) Ω⟩`.
    pub fn vacuum_expectation(&self, w: &Word) -> Result<Complex64> {
        let omega = &self.embedding * &self.cyclic_vector;
        let v = self.apply_to_cyclic(w)?;
        Ok(omega.dotc(&v))
    }
}

/// Smallest `Re ρ(A† A)` seen over `trials` random elements `A` with one to
/// four terms, words of length `<= max_len` over `alphabet` and complex
/// Gaussian coefficients. `+∞` when `trials == 0`.
pub fn positivity_probe<S: State + ?Sized, R: Rng + ?Sized>(
    s: &S,
    alphabet: &[Index],
    trials: usize,
    max_len: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a = random_element(alphabet, max_len, rng);
        let value = s.expect(&(&a.adjoint() * &a))?;
        worst = worst.min(value.re);
    }
    Ok(worst)
}

/// Random element with one to four terms over `alphabet`.
pub fn random_element<R: Rng + ?Sized>(alphabet: &[Index], max_len: usize, rng: &mut R) -> AlgebraElement {
    let terms = rng.random_range(1..=4);
    AlgebraElement::from_terms((0..terms).map(|_| (random_coefficient(rng), random_word(alphabet, max_len, rng))))
}

pub fn random_word<R: Rng + ?Sized>(alphabet: &[Index], max_len: usize, rng: &mut R) -> Word {
    if alphabet.is_empty() {
        return Word::identity();
    }
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())].clone())
        .collect()
}

/// Standard complex normal via Box–Muller.
pub fn random_coefficient<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    let r = (-u.ln()).sqrt();
    Complex64::from_polar(r, std::f64::consts::TAU * v)
}
