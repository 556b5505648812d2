//! Koopman-style operators on phase space.
//!
//! Phase space has coordinates `(q_1..q_n, p_1..p_n)`. Observables are
//! polynomials in those coordinates. Two operators are attached to every
//! symbol `u`:
//!
//! * `Y_u f = u f` (multiplication, all commute),
//! * `Z_u f = {u, f}` (bracket derivation).
//!
//! With `Z_u` acting as `{u, ·}` the relations `[Y_u, Y_v] = 0`,
//! `[Z_u, Y_v] = Y_{u,v}` and `[Z_u, Z_v] = Z_{u,v}` hold without sign
//! corrections; [`bracket_residuals`] checks all three.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::{self, Debug};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{FromPrimitive, Num};
use rand::Rng;

use crate::algebra::Index;
use crate::error::{Error, Result};
use crate::gaussian::GaussianKernel;

/// Scalars usable as polynomial coefficients.
pub trait Coefficient: Clone + PartialEq + Debug + fmt::Display + Num + FromPrimitive {}

impl<T: Clone + PartialEq + Debug + fmt::Display + Num + FromPrimitive> Coefficient for T {}

/// Coefficients that can be read as a real number when evaluating flows.
pub trait RealValue {
    fn real_value(&self) -> Option<f64>;
}

impl RealValue for f64 {
    fn real_value(&self) -> Option<f64> {
        Some(*self)
    }
}

impl RealValue for Complex64 {
    fn real_value(&self) -> Option<f64> {
        (self.im == 0.0).then_some(self.re)
    }
}

impl RealValue for Rational64 {
    fn real_value(&self) -> Option<f64> {
        Some(*self.numer() as f64 / *self.denom() as f64)
    }
}

/// Polynomial on a `2n`-dimensional phase space.
///
/// Exponent vectors list the powers of `q_1..q_n` followed by `p_1..p_n`.
#[derive(Clone, PartialEq)]
pub struct Polynomial<C = Complex64> {
    n: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

pub type PhaseSpacePolynomial = Polynomial<Complex64>;

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C) -> Self {
        Self::monomial(n, vec![0; 2 * n], c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, C::one())
    }

    /// `c · Π x_k^{e_k}`.
    pub fn monomial(n: usize, exponents: Vec<u32>, c: C) -> Self {
        assert_eq!(exponents.len(), 2 * n, "exponent vector length");
        let mut out = Self::zero(n);
        out.add_term(exponents, c);
        out
    }

    fn coordinate(n: usize, slot: usize) -> Self {
        let mut e = vec![0; 2 * n];
        e[slot] = 1;
        Self::monomial(n, e, C::one())
    }

    /// The coordinate function `q_i` (zero based).
    pub fn q(n: usize, i: usize) -> Self {
        assert!(i < n);
        Self::coordinate(n, i)
    }

    /// The coordinate function `p_i` (zero based).
    pub fn p(n: usize, i: usize) -> Self {
        assert!(i < n);
        Self::coordinate(n, n + i)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
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

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> C {
        self.terms.get(exponents).cloned().unwrap_or_else(C::zero)
    }

    fn add_term(&mut self, exponents: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exponents) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                let sum = slot.get().clone() + c;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(C::zero() - C::one())
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to coordinate slot `k`
    /// (`0..n` are the `q`s, `n..2n` the `p`s).
    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[k] -= 1;
            let factor = C::from_u32(e[k]).expect("exponent fits the coefficient type");
            out.add_term(d, c.clone() * factor);
        }
        out
    }

    pub fn dq(&self, i: usize) -> Self {
        self.derivative(i)
    }

    pub fn dp(&self, i: usize) -> Self {
        self.derivative(self.n + i)
    }

    /// Maps every coefficient, dropping those that become zero.
    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut out = Polynomial::<D>::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }
}

impl<C: Coefficient + RealValue> Polynomial<C> {
    /// Real-valued view of the polynomial, for numerical evaluation.
    /// Fails if any coefficient is not real.
    pub fn to_real(&self) -> Result<RealPolynomial> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                c.real_value()
                    .map(|v| (e.clone(), v))
                    .ok_or_else(|| Error::InvalidParameter("flow generator must be real-valued".into()))
            })
            .collect::<Result<_>>()?;
        Ok(RealPolynomial { n: self.n, terms })
    }
}

impl<C: Coefficient> Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coefficient> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            for (slot, &pow) in e.iter().enumerate() {
                if pow == 0 {
                    continue;
                }
                let (name, idx) = if slot < self.n {
                    ('q', slot)
                } else {
                    ('p', slot - self.n)
                };
                write!(f, "·{name}{}", idx + 1)?;
                if pow > 1 {
                    write!(f, "^{pow}")?;
                }
            }
        }
        Ok(())
    }
}

/// Real polynomial in evaluation-friendly form.
#[derive(Debug, Clone)]
pub struct RealPolynomial {
    n: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl RealPolynomial {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), 2 * self.n);
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&pow, &xi)| acc * xi.powi(pow as i32)))
            .sum()
    }

    fn derivative(&self, k: usize) -> RealPolynomial {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[k] > 0)
            .map(|(e, c)| {
                let mut d = e.clone();
                d[k] -= 1;
                (d, c * e[k] as f64)
            })
            .collect();
        RealPolynomial { n: self.n, terms }
    }
}

/// `{u, v} = Σ_i ∂u/∂q_i ∂v/∂p_i − ∂u/∂p_i ∂v/∂q_i`.
pub fn poisson<C: Coefficient>(u: &Polynomial<C>, v: &Polynomial<C>) -> Result<Polynomial<C>> {
    u.check_dim(v)?;
    let mut out = Polynomial::zero(u.n);
    for i in 0..u.n {
        out = out.add(&u.dq(i).mul(&v.dp(i))?)?;
        out = out.sub(&u.dp(i).mul(&v.dq(i))?)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KoopmanKind {
    /// Multiplication by the symbol.
    Y,
    /// Bracket derivation `f ↦ {u, f}`.
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KoopmanOperator<C: Coefficient = Complex64> {
    pub kind: KoopmanKind,
    pub symbol: Polynomial<C>,
}

impl<C: Coefficient> KoopmanOperator<C> {
    pub fn y(symbol: Polynomial<C>) -> Self {
        KoopmanOperator {
            kind: KoopmanKind::Y,
            symbol,
        }
    }

    pub fn z(symbol: Polynomial<C>) -> Self {
        KoopmanOperator {
            kind: KoopmanKind::Z,
            symbol,
        }
    }

    pub fn apply(&self, f: &Polynomial<C>) -> Result<Polynomial<C>> {
        match self.kind {
            KoopmanKind::Y => self.symbol.mul(f),
            KoopmanKind::Z => poisson(&self.symbol, f),
        }
    }
}

pub fn apply<C: Coefficient>(op: &KoopmanOperator<C>, f: &Polynomial<C>) -> Result<Polynomial<C>> {
    op.apply(f)
}

/// `(A B − B A) f`.
fn commutator_on<C: Coefficient>(
    a: &KoopmanOperator<C>,
    b: &KoopmanOperator<C>,
    f: &Polynomial<C>,
) -> Result<Polynomial<C>> {
    a.apply(&b.apply(f)?)?.sub(&b.apply(&a.apply(f)?)?)
}

/// Residuals of the three operator relations applied to a test polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketResiduals<C: Coefficient = Complex64> {
    /// `[Y_u, Y_v] f`
    pub yy: Polynomial<C>,
    /// `([Z_u, Y_v] − Y_{u,v}) f`
    pub zy: Polynomial<C>,
    /// `([Z_u, Z_v] − Z_{u,v}) f`
    pub zz: Polynomial<C>,
}

impl<C: Coefficient> BracketResiduals<C> {
    pub fn all_zero(&self) -> bool {
        self.yy.is_zero() && self.zy.is_zero() && self.zz.is_zero()
    }
}

pub fn bracket_residuals<C: Coefficient>(
    u: &Polynomial<C>,
    v: &Polynomial<C>,
    f: &Polynomial<C>,
) -> Result<BracketResiduals<C>> {
    u.check_dim(v)?;
    u.check_dim(f)?;
    let (yu, yv) = (KoopmanOperator::y(u.clone()), KoopmanOperator::y(v.clone()));
    let (zu, zv) = (KoopmanOperator::z(u.clone()), KoopmanOperator::z(v.clone()));
    let uv = poisson(u, v)?;
    let yy = commutator_on(&yu, &yv, f)?;
    let zy = commutator_on(&zu, &yv, f)?.sub(&KoopmanOperator::y(uv.clone()).apply(f)?)?;
    let zz = commutator_on(&zu, &zv, f)?.sub(&KoopmanOperator::z(uv).apply(f)?)?;
    Ok(BracketResiduals { yy, zy, zz })
}

/// `{u,{v,w}} + {v,{w,u}} + {w,{u,v}}`.
pub fn jacobi_residual<C: Coefficient>(
    u: &Polynomial<C>,
    v: &Polynomial<C>,
    w: &Polynomial<C>,
) -> Result<Polynomial<C>> {
    let a = poisson(u, &poisson(v, w)?)?;
    let b = poisson(v, &poisson(w, u)?)?;
    let c = poisson(w, &poisson(u, v)?)?;
    a.add(&b)?.add(&c)
}

/// Random polynomial with small rational coefficients, all monomials of total
/// degree `<= max_degree` drawn independently (about half of them zero).
pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, n: usize, max_degree: u32) -> Polynomial<Rational64> {
    let mut out = Polynomial::zero(n);
    for e in exponents_up_to(2 * n, max_degree) {
        if rng.random_bool(0.5) {
            let num = rng.random_range(-5i64..=5);
            let den = rng.random_range(1i64..=3);
            out.add_term(e, Rational64::new(num, den));
        }
    }
    out
}

/// All exponent vectors of length `vars` with total degree `<= max_degree`.
pub fn exponents_up_to(vars: usize, max_degree: u32) -> Vec<Vec<u32>> {
    fn rec(vars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == vars {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(vars, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, max_degree, &mut Vec::with_capacity(vars), &mut out);
    out
}

/// Default fixed step of the flow integrator.
pub const DEFAULT_FLOW_STEP: f64 = 1e-3;

/// A one-parameter group element `exp(t · op)`.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub generator: KoopmanOperator<Complex64>,
    pub time: f64,
}

impl FlowSpec {
    pub fn new(generator: KoopmanOperator<Complex64>, time: f64) -> Self {
        FlowSpec { generator, time }
    }

    /// Step count giving a step no larger than [`DEFAULT_FLOW_STEP`].
    pub fn default_steps(&self) -> usize {
        ((self.time.abs() / DEFAULT_FLOW_STEP).ceil() as usize).max(1)
    }
}

/// Result of sampling a flow at a list of points.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowSample {
    /// Z-flows: images of the points under Hamilton's flow of the symbol.
    Points(Vec<Vec<f64>>),
    /// Y-flows: the pointwise multipliers `exp(t u(x))`.
    Multipliers(Vec<f64>),
}

/// Samples a flow.
///
/// For `Z_u` the points are transported by Hamilton's equations
/// `dq/dt = ∂u/∂p`, `dp/dt = −∂u/∂q` for time `t`, using `steps` steps of the
/// two-stage Gauss–Legendre method (order 4, symplectic). In terms of
/// observables, `exp(t Z_u) f = f ∘ Φ_{−t}`.
///
/// For `Y_u` no transport happens: the group element multiplies functions by
/// `exp(t u)` pointwise, so the multiplier values are returned instead.
pub fn flow_sample(spec: &FlowSpec, points: &[Vec<f64>], steps: usize) -> Result<FlowSample> {
    let u = spec.generator.symbol.to_real()?;
    let dim = 2 * u.dimension();
    for x in points {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: x.len(),
            });
        }
    }
    match spec.generator.kind {
        KoopmanKind::Y => {
            let values = points
                .iter()
                .map(|x| {
                    let v = (spec.time * u.eval(x)).exp();
                    finite(v, "Y-flow multiplier")
                })
                .collect::<Result<_>>()?;
            Ok(FlowSample::Multipliers(values))
        }
        KoopmanKind::Z => {
            let field = HamiltonField::new(&u);
            let mapped = points
                .iter()
                .map(|x| {
                    let rhs = |y: &[f64], out: &mut [f64]| field.velocity(y, out);
                    gauss_legendre(rhs, x, spec.time, steps)
                })
                .collect::<Result<_>>()?;
            Ok(FlowSample::Points(mapped))
        }
    }
}

/// Image of one point under a Z-flow together with the Jacobian of the
/// discrete flow map, obtained by integrating the variational equations with
/// the same method.
pub fn flow_jacobian(spec: &FlowSpec, point: &[f64], steps: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if spec.generator.kind != KoopmanKind::Z {
        return Err(Error::InvalidParameter("Jacobian is defined for Z-flows only".into()));
    }
    let u = spec.generator.symbol.to_real()?;
    let dim = 2 * u.dimension();
    if point.len() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: point.len(),
        });
    }
    let field = HamiltonField::new(&u);
    let mut state = point.to_vec();
    for r in 0..dim {
        for c in 0..dim {
            state.push(if r == c { 1.0 } else { 0.0 });
        }
    }
    let rhs = |y: &[f64], out: &mut [f64]| {
        let (x, m) = y.split_at(dim);
        let (dx, dm) = out.split_at_mut(dim);
        field.velocity(x, dx);
        // dM/dt = J Hess(u) M
        let jh = field.j_hessian(x);
        for r in 0..dim {
            for c in 0..dim {
                dm[r * dim + c] = (0..dim).map(|k| jh[(r, k)] * m[k * dim + c]).sum();
            }
        }
    };
    let out = gauss_legendre(rhs, &state, spec.time, steps)?;
    let jac = DMatrix::from_row_slice(dim, dim, &out[dim..]);
    Ok((out[..dim].to_vec(), jac))
}

/// `max |Mᵀ J M − J|` for a phase-space Jacobian.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let j = symplectic_form(m.nrows() / 2);
    (m.transpose() * &j * m - j).amax()
}

/// The canonical form `J = [[0, I], [−I, 0]]` on `(q, p)`.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if c == r + n {
            1.0
        } else if r == c + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// Exact affine flow `x ↦ A x + b` of a symbol of degree at most two,
/// computed with a matrix exponential.
pub fn exact_quadratic_flow<C: Coefficient + RealValue>(
    u: &Polynomial<C>,
    time: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if u.degree().unwrap_or(0) > 2 {
        return Err(Error::InvalidParameter(
            "exact flow needs a symbol of degree <= 2".into(),
        ));
    }
    let u = u.to_real()?;
    let dim = 2 * u.dimension();
    // generator of the augmented linear system on (x, 1)
    let field = HamiltonField::new(&u);
    let origin = vec![0.0; dim];
    let mut drift = vec![0.0; dim];
    field.velocity(&origin, &mut drift);
    let jh = field.j_hessian(&origin);
    let mut gen = DMatrix::zeros(dim + 1, dim + 1);
    gen.view_mut((0, 0), (dim, dim)).copy_from(&jh);
    for r in 0..dim {
        gen[(r, dim)] = drift[r];
    }
    let e = (gen * time).exp();
    let a = e.view((0, 0), (dim, dim)).into_owned();
    let b = DVector::from_fn(dim, |r, _| e[(r, dim)]);
    Ok((a, b))
}

/// Hamiltonian vector field `J ∇u` with symbolic first and second derivatives.
struct HamiltonField {
    n: usize,
    grad: Vec<RealPolynomial>,
    hess: Vec<Vec<RealPolynomial>>,
}

impl HamiltonField {
    fn new(u: &RealPolynomial) -> Self {
        let dim = 2 * u.n;
        let grad: Vec<_> = (0..dim).map(|k| u.derivative(k)).collect();
        let hess = grad
            .iter()
            .map(|g| (0..dim).map(|k| g.derivative(k)).collect())
            .collect();
        HamiltonField { n: u.n, grad, hess }
    }

    fn velocity(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            out[i] = self.grad[n + i].eval(x);
            out[n + i] = -self.grad[i].eval(x);
        }
    }

    fn j_hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let dim = 2 * n;
        DMatrix::from_fn(dim, dim, |r, c| {
            if r < n {
                self.hess[n + r][c].eval(x)
            } else {
                -self.hess[r - n][c].eval(x)
            }
        })
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Fixed-step two-stage Gauss–Legendre integration with fixed-point stage
/// iteration.
fn gauss_legendre(rhs: impl Fn(&[f64], &mut [f64]), x0: &[f64], time: f64, steps: usize) -> Result<Vec<f64>> {
    const S3: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
    const A: [[f64; 2]; 2] = [[0.25, 0.25 - S3], [0.25 + S3, 0.25]];
    const MAX_ITER: usize = 200;

    let steps = steps.max(1);
    let h = time / steps as f64;
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut k = [vec![0.0; d], vec![0.0; d]];
    let mut stage = vec![0.0; d];
    let mut next = [vec![0.0; d], vec![0.0; d]];
    for _ in 0..steps {
        let [k0, k1] = &mut k;
        rhs(&x, k0);
        k1.copy_from_slice(k0);
        let mut converged = false;
        for _ in 0..MAX_ITER {
            for s in 0..2 {
                for r in 0..d {
                    stage[r] = x[r] + h * (A[s][0] * k[0][r] + A[s][1] * k[1][r]);
                }
                rhs(&stage, &mut next[s]);
            }
            let mut change = 0.0f64;
            let mut scale = 1.0f64;
            for s in 0..2 {
                for r in 0..d {
                    change = change.max((next[s][r] - k[s][r]).abs());
                    scale = scale.max(next[s][r].abs());
                }
            }
            std::mem::swap(&mut k, &mut next);
            if !change.is_finite() {
                return Err(Error::NonFinite("flow stage".into()));
            }
            if change <= 1e-15 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonFinite("flow stage iteration diverged".into()));
        }
        for r in 0..d {
            x[r] += 0.5 * h * (k[0][r] + k[1][r]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("flow state".into()));
        }
    }
    Ok(x)
}

/// Gaussian kernel of the classical Gibbs state of
/// `H = p²/2m + m ω² q²/2` at temperature `kT`, over the self-conjugate
/// indices `q` and `p`.
pub fn gibbs_oscillator_kernel(mass: f64, frequency: f64, kt: f64) -> Result<GaussianKernel> {
    for (name, v) in [("mass", mass), ("frequency", frequency), ("kT", kt)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let qq = kt / (mass * frequency * frequency);
    let pp = mass * kt;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(qq, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(pp, 0.0),
        ],
    );
    GaussianKernel::new(vec![Index::new("q"), Index::new("p")], m)
}
