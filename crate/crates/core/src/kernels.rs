//! Two-point kernels of a free scalar field of mass `m` in 1+1 dimensions,
//! evaluated on Gaussian wavepacket test functions.
//!
//! Conventions: points are `y = (t, x)`, momenta `p = (ω, k)`, the metric is
//! `η = diag(1, -1)` and the Fourier transform is
//! `F(ω, k) = ∫ dt dx e^{i(ωt - kx)} f(t, x)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Index, Label};
use crate::error::{Error, Result};
use crate::gaussian::GaussianKernel;
use crate::linalg::CMatrix;
use crate::quadrature::{integrate_pieces, QuadratureOptions};

/// Integrand envelope that fixes the momentum cutoff.
pub const CUTOFF_ENVELOPE: f64 = 1e-12;

const MAX_CUTOFF: f64 = 1e6;
const MAX_INITIAL_PIECES: usize = 4000;

fn eta() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

fn minkowski(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a[0] * b[0] - a[1] * b[1]
}

/// One Gaussian component
/// `A exp(-½ (y-c)ᵀ W⁻¹ (y-c) - i p₀ᵀ η (y-c))`.
///
/// The width matrix `W` is a general symmetric positive-definite matrix
/// because boosts turn an isotropic packet into a sheared one.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketComponent {
    amplitude: Complex64,
    center: Vector2<f64>,
    width: Matrix2<f64>,
    wavevector: Vector2<f64>,
}

impl PacketComponent {
    /// Isotropic component of width `sigma` in both `t` and `x`.
    pub fn new(amplitude: Complex64, center: [f64; 2], sigma: f64, wavevector: [f64; 2]) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "packet width must be positive, got {sigma}"
            )));
        }
        Self::with_width(amplitude, center, Matrix2::identity() * (sigma * sigma), wavevector)
    }

    pub fn with_width(
        amplitude: Complex64,
        center: [f64; 2],
        width: Matrix2<f64>,
        wavevector: [f64; 2],
    ) -> Result<Self> {
        let finite = amplitude.re.is_finite()
            && amplitude.im.is_finite()
            && center.iter().chain(wavevector.iter()).all(|v| v.is_finite())
            && width.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("wavepacket parameters".into()));
        }
        if (width[(0, 1)] - width[(1, 0)]).abs() > 1e-12 * width.amax() {
            return Err(Error::InvalidParameter("width matrix must be symmetric".into()));
        }
        if !(width[(0, 0)] > 0.0 && width.determinant() > 0.0) {
            return Err(Error::InvalidParameter("width matrix must be positive definite".into()));
        }
        let sym = 0.5 * (width[(0, 1)] + width[(1, 0)]);
        let width = Matrix2::new(width[(0, 0)], sym, sym, width[(1, 1)]);
        Ok(PacketComponent {
            amplitude,
            center: Vector2::from(center),
            width,
            wavevector: Vector2::from(wavevector),
        })
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn center(&self) -> [f64; 2] {
        [self.center[0], self.center[1]]
    }

    pub fn width(&self) -> &Matrix2<f64> {
        &self.width
    }

    pub fn wavevector(&self) -> [f64; 2] {
        [self.wavevector[0], self.wavevector[1]]
    }

    pub fn eval(&self, t: f64, x: f64) -> Complex64 {
        let d = Vector2::new(t, x) - self.center;
        let inv = self.width.try_inverse().expect("width is positive definite");
        let quad = d.dot(&(inv * d));
        let phase = minkowski(&self.wavevector, &d);
        self.amplitude * Complex64::new(-0.5 * quad, -phase).exp()
    }

    pub fn fourier(&self, omega: f64, k: f64) -> Complex64 {
        let p = Vector2::new(omega, k);
        let d = p - self.wavevector;
        let eta = eta();
        let quad = d.dot(&(eta * self.width * eta * d));
        let phase = minkowski(&p, &self.center);
        self.amplitude * (2.0 * PI * self.width.determinant().sqrt()) * Complex64::new(-0.5 * quad, phase).exp()
    }

    fn fourier_modulus(&self, omega: f64, k: f64) -> f64 {
        let d = Vector2::new(omega, k) - self.wavevector;
        let eta = eta();
        let quad = d.dot(&(eta * self.width * eta * d));
        self.amplitude.norm() * 2.0 * PI * self.width.determinant().sqrt() * (-0.5 * quad).exp()
    }

    pub fn conj(&self) -> Self {
        PacketComponent {
            amplitude: self.amplitude.conj(),
            wavevector: -self.wavevector,
            ..self.clone()
        }
    }

    fn transformed(&self, lambda: &Matrix2<f64>, shift: &Vector2<f64>) -> Self {
        PacketComponent {
            amplitude: self.amplitude,
            center: lambda * self.center + shift,
            width: lambda * self.width * lambda.transpose(),
            wavevector: lambda * self.wavevector,
        }
    }
}

/// A finite sum of Gaussian components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Wavepacket {
    components: Vec<PacketComponent>,
}

impl Wavepacket {
    pub fn new(components: Vec<PacketComponent>) -> Self {
        Wavepacket { components }
    }

    /// Unit-amplitude isotropic packet.
    pub fn gaussian(center: [f64; 2], sigma: f64, wavevector: [f64; 2]) -> Result<Self> {
        Ok(Self::new(vec![PacketComponent::new(
            Complex64::new(1.0, 0.0),
            center,
            sigma,
            wavevector,
        )?]))
    }

    pub fn components(&self) -> &[PacketComponent] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Wavepacket {
            components: self
                .components
                .iter()
                .map(|comp| PacketComponent {
                    amplitude: comp.amplitude * c,
                    ..comp.clone()
                })
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Wavepacket {
            components: self.components.iter().map(PacketComponent::conj).collect(),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> Complex64 {
        self.components.iter().map(|c| c.eval(t, x)).sum()
    }

    pub fn fourier(&self, omega: f64, k: f64) -> Complex64 {
        self.components.iter().map(|c| c.fourier(omega, k)).sum()
    }

    fn fourier_bound(&self, omega: f64, k: f64) -> f64 {
        self.components.iter().map(|c| c.fourier_modulus(omega, k)).sum()
    }

    /// `x ↦ -x`.
    pub fn reflect_space(&self) -> Self {
        let r = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        Wavepacket {
            components: self
                .components
                .iter()
                .map(|c| c.transformed(&r, &Vector2::zeros()))
                .collect(),
        }
    }

    /// Structural hash of the parameter list (FNV-1a over the IEEE bits).
    pub fn structural_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |v: f64| {
            // -0.0 and 0.0 describe the same packet
            let v = if v == 0.0 { 0.0 } else { v };
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        for c in &self.components {
            feed(c.amplitude.re);
            feed(c.amplitude.im);
            feed(c.center[0]);
            feed(c.center[1]);
            feed(c.width[(0, 0)]);
            feed(c.width[(0, 1)]);
            feed(c.width[(1, 1)]);
            feed(c.wavevector[0]);
            feed(c.wavevector[1]);
        }
        h
    }

    /// Index labelling this packet; its partner is the conjugate packet.
    pub fn index(&self) -> Index {
        Index::with_partner(
            Label::Packet(self.structural_hash()),
            Label::Packet(self.conj().structural_hash()),
        )
    }

    pub fn is_real(&self) -> bool {
        self.index().is_self_conjugate()
    }
}

impl Add for &Wavepacket {
    type Output = Wavepacket;
    fn add(self, rhs: &Wavepacket) -> Wavepacket {
        let mut components = self.components.clone();
        components.extend(rhs.components.iter().cloned());
        Wavepacket { components }
    }
}

impl Add for Wavepacket {
    type Output = Wavepacket;
    fn add(self, rhs: Wavepacket) -> Wavepacket {
        &self + &rhs
    }
}

impl Neg for &Wavepacket {
    type Output = Wavepacket;
    fn neg(self) -> Wavepacket {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &Wavepacket {
    type Output = Wavepacket;
    fn sub(self, rhs: &Wavepacket) -> Wavepacket {
        self + &(-rhs)
    }
}

impl Mul<&Wavepacket> for Complex64 {
    type Output = Wavepacket;
    fn mul(self, rhs: &Wavepacket) -> Wavepacket {
        rhs.scale(self)
    }
}

/// Element `(Λ(χ), a)` of the 1+1-D Poincaré group acting as `y ↦ Λy + a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareElement {
    pub rapidity: f64,
    pub translation: [f64; 2],
}

impl PoincareElement {
    pub fn new(rapidity: f64, translation: [f64; 2]) -> Self {
        PoincareElement { rapidity, translation }
    }

    pub fn identity() -> Self {
        Self::new(0.0, [0.0, 0.0])
    }

    pub fn boost(rapidity: f64) -> Self {
        Self::new(rapidity, [0.0, 0.0])
    }

    pub fn translation(at: f64, ax: f64) -> Self {
        Self::new(0.0, [at, ax])
    }

    pub fn lorentz(&self) -> Matrix2<f64> {
        let (s, c) = (self.rapidity.sinh(), self.rapidity.cosh());
        Matrix2::new(c, s, s, c)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &PoincareElement) -> PoincareElement {
        let a = self.lorentz() * Vector2::from(other.translation) + Vector2::from(self.translation);
        PoincareElement::new(self.rapidity + other.rapidity, [a[0], a[1]])
    }

    pub fn inverse(&self) -> PoincareElement {
        let back = PoincareElement::boost(-self.rapidity);
        let a = -(back.lorentz() * Vector2::from(self.translation));
        PoincareElement::new(-self.rapidity, [a[0], a[1]])
    }

    pub fn apply(&self, point: [f64; 2]) -> [f64; 2] {
        let y = self.lorentz() * Vector2::from(point) + Vector2::from(self.translation);
        [y[0], y[1]]
    }
}

/// `(g·f)(y) = f(g⁻¹ y)`.
pub fn poincare_act(g: &PoincareElement, f: &Wavepacket) -> Wavepacket {
    let lambda = g.lorentz();
    let shift = Vector2::from(g.translation);
    Wavepacket {
        components: f.components.iter().map(|c| c.transformed(&lambda, &shift)).collect(),
    }
}

/// Parameters of the free field and, optionally, of a thermal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldKernelSpec {
    mass: f64,
    hbar: f64,
    beta: f64,
    rest_frame: [f64; 2],
    quadrature: QuadratureOptions,
}

impl FieldKernelSpec {
    pub fn vacuum(mass: f64, hbar: f64) -> Result<Self> {
        Self::new(mass, hbar, f64::INFINITY)
    }

    pub fn thermal(mass: f64, hbar: f64, beta: f64) -> Result<Self> {
        if beta.is_infinite() {
            return Err(Error::InvalidParameter("thermal kernel needs a finite beta".into()));
        }
        Self::new(mass, hbar, beta)
    }

    /// `beta = f64::INFINITY` selects the vacuum.
    pub fn new(mass: f64, hbar: f64, beta: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        Ok(FieldKernelSpec {
            mass,
            hbar,
            beta,
            rest_frame: [1.0, 0.0],
            quadrature: QuadratureOptions::default(),
        })
    }

    /// Sets the rest frame of the heat bath; `u` is normalized to `u·u = 1`.
    pub fn with_rest_frame(mut self, u: [f64; 2]) -> Result<Self> {
        let norm2 = u[0] * u[0] - u[1] * u[1];
        if !(u[0] > 0.0 && norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rest frame must be future time-like, got ({}, {})",
                u[0], u[1]
            )));
        }
        let n = norm2.sqrt();
        self.rest_frame = [u[0] / n, u[1] / n];
        Ok(self)
    }

    pub fn with_quadrature(mut self, opts: QuadratureOptions) -> Self {
        self.quadrature = opts;
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rest_frame(&self) -> [f64; 2] {
        self.rest_frame
    }

    pub fn is_vacuum(&self) -> bool {
        self.beta.is_infinite()
    }

    /// The same field with the heat bath removed.
    pub fn vacuum_part(&self) -> Self {
        FieldKernelSpec {
            beta: f64::INFINITY,
            ..*self
        }
    }

    fn omega(&self, k: f64) -> f64 {
        k.hypot(self.mass)
    }

    /// Bose occupation of the positive-shell mode with momentum `k`.
    fn occupation(&self, k: f64) -> f64 {
        if self.is_vacuum() {
            return 0.0;
        }
        let p = Vector2::new(self.omega(k), k);
        let energy = minkowski(&Vector2::from(self.rest_frame), &p);
        1.0 / (self.beta * self.hbar * energy).exp_m1()
    }

    fn max_occupation(&self) -> f64 {
        if self.is_vacuum() {
            0.0
        } else {
            1.0 / (self.beta * self.hbar * self.mass).exp_m1()
        }
    }
}

/// Picks the cutoff `K` and an initial panel count from the packets'
/// momentum-space envelopes.
fn cutoff(spec: &FieldKernelSpec, packets: &[&Wavepacket]) -> Result<(f64, usize)> {
    let comps = || packets.iter().flat_map(|p| p.components.iter());
    let bose = 1.0 + 2.0 * spec.max_occupation();
    // both shells per packet, so mixed products such as |F(-p)| |G(p)| in the
    // commutator are covered too
    let envelope = |k: f64| {
        let w = spec.omega(k);
        let product: f64 = packets
            .iter()
            .map(|p| p.fourier_bound(w, k) + p.fourier_bound(-w, -k))
            .product();
        spec.hbar * bose * product / (4.0 * PI * w)
    };
    let below = |k: f64| envelope(k) < CUTOFF_ENVELOPE && envelope(-k) < CUTOFF_ENVELOPE;

    let reach = comps()
        .map(|c| c.wavevector[0].abs() + c.wavevector[1].abs())
        .fold(0.0, f64::max);
    let mut k_max = 1.0 + reach;
    loop {
        if k_max > MAX_CUTOFF {
            return Err(Error::Quadrature {
                lower: -k_max,
                upper: k_max,
                error: envelope(k_max).max(envelope(-k_max)),
                evaluations: 0,
            });
        }
        if below(k_max) && (1..=64).all(|j| below(k_max * (1.0 + 3.0 * j as f64 / 64.0))) {
            break;
        }
        k_max *= 1.5;
    }

    // resolve both the momentum width and the phase oscillation e^{i p·Δc}
    let narrowest = comps()
        .map(|c| {
            let lmax = c.width.symmetric_eigenvalues().max();
            1.0 / lmax.sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    let centers: Vec<Vector2<f64>> = comps().map(|c| c.center).collect();
    let mut spread: f64 = 0.0;
    for a in &centers {
        for b in &centers {
            spread = spread.max((a[0] - b[0]).abs() + (a[1] - b[1]).abs());
        }
    }
    let panel = narrowest.min(2.0 * PI / (1.0 + spread));
    let pieces = ((2.0 * k_max / panel).ceil() as usize).clamp(1, MAX_INITIAL_PIECES);
    Ok((k_max, pieces))
}

fn shell_integral(
    spec: &FieldKernelSpec,
    packets: &[&Wavepacket],
    integrand: impl Fn(f64, f64, f64) -> Complex64,
) -> Result<Complex64> {
    if packets.iter().any(|p| p.is_zero()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (k_max, pieces) = cutoff(spec, packets)?;
    let f = |k: f64| {
        let w = spec.omega(k);
        integrand(k, w, spec.occupation(k)) * (spec.hbar / (4.0 * PI * w))
    };
    let r = integrate_pieces(f, -k_max, k_max, pieces, &spec.quadrature)?;
    log::trace!(
        "shell integral K={k_max:.3} panels={} evals={} err={:e}",
        r.intervals,
        r.evaluations,
        r.error
    );
    Ok(r.value)
}

/// `ℏ ∫ dk/(4π ω_k) F*(ω_k, k) G(ω_k, k)`, ignoring any temperature in `spec`.
pub fn vacuum_kernel(spec: &FieldKernelSpec, f: &Wavepacket, g: &Wavepacket) -> Result<Complex64> {
    let spec = spec.vacuum_part();
    shell_integral(&spec, &[f, g], |k, w, _| f.fourier(w, k).conj() * g.fourier(w, k))
}

/// Thermal kernel with Bose occupation on both mass-shell branches in the
/// rest frame of `spec`.
pub fn thermal_kernel(spec: &FieldKernelSpec, f: &Wavepacket, g: &Wavepacket) -> Result<Complex64> {
    if spec.is_vacuum() {
        return Err(Error::InvalidParameter("thermal kernel needs a finite beta".into()));
    }
    shell_integral(spec, &[f, g], |k, w, n| {
        let plus = f.fourier(w, k).conj() * g.fourier(w, k);
        let minus = f.fourier(-w, -k).conj() * g.fourier(-w, -k);
        plus * (1.0 + n) + minus * n
    })
}

/// Vacuum or thermal kernel according to `spec`.
pub fn kernel(spec: &FieldKernelSpec, f: &Wavepacket, g: &Wavepacket) -> Result<Complex64> {
    if spec.is_vacuum() {
        vacuum_kernel(spec, f, g)
    } else {
        thermal_kernel(spec, f, g)
    }
}

/// `(f*, g) - (g*, f)` under the kernel selected by `spec`, evaluated as a
/// single integral so that the occupation terms cancel pointwise.
pub fn commutator_kernel(spec: &FieldKernelSpec, f: &Wavepacket, g: &Wavepacket) -> Result<Complex64> {
    let (fc, gc) = (f.conj(), g.conj());
    shell_integral(spec, &[f, g], |k, w, n| {
        let pair = |a: &Wavepacket, b: &Wavepacket| {
            let plus = a.fourier(w, k).conj() * b.fourier(w, k);
            let minus = a.fourier(-w, -k).conj() * b.fourier(-w, -k);
            plus * (1.0 + n) + minus * n
        };
        pair(&fc, g) - pair(&gc, f)
    })
}

/// Materializes the kernel on `packets` together with their conjugates so
/// that the index set is closed under the involution.
pub fn kernel_as_gaussian(spec: &FieldKernelSpec, packets: &[Wavepacket]) -> Result<GaussianKernel> {
    let mut members: Vec<(Index, Wavepacket)> = Vec::new();
    let mut push = |p: Wavepacket| {
        let i = p.index();
        if !members.iter().any(|(j, _)| *j == i) {
            members.push((i, p));
        }
    };
    for p in packets {
        push(p.clone());
    }
    for p in packets {
        push(p.conj());
    }
    let n = members.len();
    let mut matrix = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = kernel(spec, &members[a].1, &members[b].1)?;
            if a == b {
                matrix[(a, a)] = Complex64::new(v.re, 0.0);
            } else {
                matrix[(a, b)] = v;
                matrix[(b, a)] = v.conj();
            }
        }
    }
    GaussianKernel::new(members.into_iter().map(|(i, _)| i).collect(), matrix)
}

/// `max |(g f_a, g f_b) - (f_a, f_b)|` over all pairs of `packets`: zero
/// exactly when `g` preserves the kernel on them.
pub fn invariance_defect(spec: &FieldKernelSpec, packets: &[Wavepacket], g: &PoincareElement) -> Result<f64> {
    let moved: Vec<Wavepacket> = packets.iter().map(|p| poincare_act(g, p)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..packets.len() {
        for b in a..packets.len() {
            let before = kernel(spec, &packets[a], &packets[b])?;
            let after = kernel(spec, &moved[a], &moved[b])?;
            worst = worst.max((after - before).norm());
        }
    }
    Ok(worst)
}

/// Complex matrix as nested `[re, im]` pairs.
pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    serde_json::json!(rows)
}
