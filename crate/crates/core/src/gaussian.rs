//! Mean-zero Gaussian states on the free algebra.
//!
//! A Gaussian state is fixed by a positive semi-definite sesquilinear kernel
//! `(i, j)` on a finite index list closed under the involution. Two-point
//! values are `ρ(M_i M_j) = (i^c, j)`; longer words expand as a sum over
//! perfect matchings (pairs taken in word order), which is the coefficient
//! extraction of the exponential generating function
//! `exp[-Σ λ_m² (i_m^c, i_m)/2 - Σ_{m<n} λ_m λ_n (i_m^c, i_n)]`.

use std::collections::HashMap;
use std::ops::Add;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::algebra::{AlgebraElement, Index, Label, Word};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Longest word the perfect-matching expansion will accept (11!! = 10395 terms).
pub const MAX_WICK_LEN: usize = 12;

/// Eigenvalue tolerance used for positivity of kernels.
pub const PSD_TOL: f64 = 1e-10;

/// Relative tolerance for Hermiticity of a kernel matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// An expectation functional on the free algebra.
pub trait State {
    /// Value on a single ordered word.
    fn expect_word(&self, w: &Word) -> Result<Complex64>;

    /// Linear extension to arbitrary elements.
    fn expect(&self, a: &AlgebraElement) -> Result<Complex64> {
        a.terms()
            .try_fold(Complex64::zero(), |acc, (w, c)| Ok(acc + c * self.expect_word(w)?))
    }
}

impl<S: State + ?Sized> State for &S {
    fn expect_word(&self, w: &Word) -> Result<Complex64> {
        (**self).expect_word(w)
    }
}

/// `ρ(a)` for any state.
pub fn expect<S: State + ?Sized>(s: &S, a: &AlgebraElement) -> Result<Complex64> {
    s.expect(a)
}

/// Sesquilinear pairing `(i, j)` over a finite, involution-closed index list.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    indices: Vec<Index>,
    position: HashMap<Label, usize>,
    matrix: CMatrix,
}

impl GaussianKernel {
    /// Checks shape, uniqueness, closure under the involution and Hermiticity.
    /// Positivity is checked separately, see [`GaussianKernel::ensure_psd`].
    pub fn new(indices: Vec<Index>, matrix: CMatrix) -> Result<Self> {
        let n = indices.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                indices: n,
            });
        }
        let mut position = HashMap::with_capacity(n);
        for (k, i) in indices.iter().enumerate() {
            if position.insert(i.tag().clone(), k).is_some() {
                return Err(Error::DuplicateIndex(i.to_string()));
            }
        }
        for i in &indices {
            if !position.contains_key(i.partner()) {
                return Err(Error::NotClosedUnderInvolution(i.to_string()));
            }
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("kernel matrix entry".into()));
        }
        let (defect, row, col) = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL * linalg::max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian {
                row,
                col,
                deviation: defect,
            });
        }
        Ok(GaussianKernel {
            indices,
            position,
            matrix,
        })
    }

    /// Kernel over integer indices `1..=n`, each its own partner.
    pub fn trivial(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let indices = (1..=n as i64).map(Index::new).collect();
        let mut matrix = CMatrix::zeros(n, n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape {
                    rows: n,
                    cols: row.len(),
                    indices: n,
                });
            }
            for (c, v) in row.iter().enumerate() {
                matrix[(r, c)] = *v;
            }
        }
        Self::new(indices, matrix)
    }

    /// Real symmetric kernel over integer indices `1..=n`.
    pub fn real(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::trivial(&rows)
    }

    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: &Index) -> bool {
        self.position.contains_key(i.tag())
    }

    /// Looks an index up by the text of its tag.
    pub fn find(&self, tag: &str) -> Option<Index> {
        self.indices.iter().find(|i| i.tag().to_string() == tag).cloned()
    }

    fn pos(&self, i: &Label) -> Result<usize> {
        self.position
            .get(i)
            .copied()
            .ok_or_else(|| Error::UnknownIndex(i.to_string()))
    }

    /// The raw pairing `(i, j)`.
    pub fn pair(&self, i: &Index, j: &Index) -> Result<Complex64> {
        Ok(self.matrix[(self.pos(i.tag())?, self.pos(j.tag())?)])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub fn ensure_psd(&self, tol: f64) -> Result<()> {
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -tol {
            Err(Error::NotPositive { min_eigenvalue })
        } else {
            Ok(())
        }
    }

    /// Matrix of `(i_m^c, i_n)` for the letters of `w`.
    fn contraction_table(&self, w: &Word) -> Result<DMatrix<Complex64>> {
        let f = w.factors();
        let left: Vec<usize> = f.iter().map(|i| self.pos(i.partner())).collect::<Result<_>>()?;
        let right: Vec<usize> = f.iter().map(|i| self.pos(i.tag())).collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(f.len(), f.len(), |m, n| {
            self.matrix[(left[m], right[n])]
        }))
    }
}

/// `ρ(M_i M_j) = (i^c, j)`.
pub fn two_point(k: &GaussianKernel, i: &Index, j: &Index) -> Result<Complex64> {
    k.pair(&i.involve(), j)
}

/// Sum over perfect matchings of `{0, .., n-1}` of the product of
/// `pair(m, n)` over matched pairs with `m < n`. Zero for odd `n`.
pub fn perfect_matching_sum<T>(n: usize, pair: impl Fn(usize, usize) -> T) -> T
where
    T: Clone + Zero + One + Add<Output = T>,
{
    if n % 2 == 1 {
        return T::zero();
    }
    if n == 0 {
        return T::one();
    }
    assert!(n < 32, "matching sum over {n} points");
    let full = (1u32 << n) - 1;
    let mut memo: HashMap<u32, T> = HashMap::new();
    matching_rec(full, &pair, &mut memo)
}

fn matching_rec<T>(mask: u32, pair: &impl Fn(usize, usize) -> T, memo: &mut HashMap<u32, T>) -> T
where
    T: Clone + Zero + One + Add<Output = T>,
{
    if mask == 0 {
        return T::one();
    }
    if let Some(v) = memo.get(&mask) {
        return v.clone();
    }
    let first = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << first);
    let mut total = T::zero();
    let mut scan = rest;
    while scan != 0 {
        let second = scan.trailing_zeros() as usize;
        scan &= !(1 << second);
        let sub = matching_rec(rest & !(1 << second), pair, memo);
        total = total + pair(first, second) * sub;
    }
    memo.insert(mask, total.clone());
    total
}

/// `ρ(M_{i_1} ... M_{i_N})` for the Gaussian state with kernel `k`.
pub fn wick_expect(k: &GaussianKernel, w: &Word) -> Result<Complex64> {
    let n = w.len();
    if n > MAX_WICK_LEN {
        return Err(Error::WordTooLong {
            len: n,
            cap: MAX_WICK_LEN,
        });
    }
    if n % 2 == 1 {
        // still validate the letters
        k.contraction_table(w)?;
        return Ok(Complex64::zero());
    }
    let table = k.contraction_table(w)?;
    Ok(perfect_matching_sum(n, |m, p| table[(m, p)]))
}

/// Closed-form value of the generating function at real parameters.
pub fn generating_function(k: &GaussianKernel, indices: &[Index], lambdas: &[f64]) -> Result<Complex64> {
    if indices.len() != lambdas.len() {
        return Err(Error::LengthMismatch {
            indices: indices.len(),
            lambdas: lambdas.len(),
        });
    }
    let mut exponent = Complex64::zero();
    for (m, (im, lm)) in indices.iter().zip(lambdas).enumerate() {
        exponent -= lm * lm * two_point(k, im, im)? / 2.0;
        for (jn, ln) in indices.iter().zip(lambdas).skip(m + 1) {
            exponent -= lm * ln * two_point(k, im, jn)?;
        }
    }
    Ok(exponent.exp())
}

/// `ρ(M_{i_1} ... M_{i_N})` read off the generating function: the coefficient
/// of `λ_1 λ_2 ... λ_N` in its Taylor series, divided by `i^N`.
///
/// Works on multilinear truncated power series (one bit per parameter), so it
/// never enumerates matchings. Used as the independent check of
/// [`wick_expect`].
pub fn moment_from_generating_function(k: &GaussianKernel, w: &Word) -> Result<Complex64> {
    let n = w.len();
    if n > MAX_WICK_LEN {
        return Err(Error::WordTooLong {
            len: n,
            cap: MAX_WICK_LEN,
        });
    }
    let table = k.contraction_table(w)?;
    let size = 1usize << n;
    // exponent series: only cross terms survive multilinear truncation
    let mut q = vec![Complex64::zero(); size];
    for a in 0..n {
        for b in a + 1..n {
            q[(1 << a) | (1 << b)] -= table[(a, b)];
        }
    }
    // exp(q) = Σ q^r / r!, q has no constant term so r ≤ n/2
    let mut result = vec![Complex64::zero(); size];
    result[0] = Complex64::new(1.0, 0.0);
    let mut power = result.clone();
    for r in 1..=n / 2 {
        let mut next = vec![Complex64::zero(); size];
        for (ma, va) in power.iter().enumerate() {
            if va.is_zero() {
                continue;
            }
            for (mb, vb) in q.iter().enumerate() {
                if ma & mb == 0 && !vb.is_zero() {
                    next[ma | mb] += va * vb;
                }
            }
        }
        power = next;
        let inv_fact = 1.0 / (1..=r).map(|x| x as f64).product::<f64>();
        for (acc, v) in result.iter_mut().zip(&power) {
            *acc += v * inv_fact;
        }
    }
    let coeff = result[size - 1];
    Ok(coeff / Complex64::i().powu(n as u32))
}

/// `(i^c, j) - (j^c, i)`: the scalar with `ρ(A [M_i, M_j] B) = c ρ(A B)`.
pub fn commutator_factor(k: &GaussianKernel, i: &Index, j: &Index) -> Result<Complex64> {
    Ok(two_point(k, i, j)? - two_point(k, j, i)?)
}

/// The Gaussian state of a kernel.
#[derive(Debug, Clone)]
pub struct GaussianState {
    kernel: GaussianKernel,
}

impl GaussianState {
    /// Requires a positive semi-definite kernel (eigenvalues ≥ −[`PSD_TOL`]).
    pub fn new(kernel: GaussianKernel) -> Result<Self> {
        kernel.ensure_psd(PSD_TOL)?;
        Ok(GaussianState { kernel })
    }

    /// Skips the positivity check. The result is a linear, normalized,
    /// adjoint-compatible functional that need not be positive.
    pub fn new_unchecked(kernel: GaussianKernel) -> Self {
        GaussianState { kernel }
    }

    pub fn kernel(&self) -> &GaussianKernel {
        &self.kernel
    }

    pub fn indices(&self) -> &[Index] {
        self.kernel.indices()
    }
}

impl State for GaussianState {
    fn expect_word(&self, w: &Word) -> Result<Complex64> {
        wick_expect(&self.kernel, w)
    }
}
