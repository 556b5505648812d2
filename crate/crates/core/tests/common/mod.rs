#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qcmt::gaussian::two_point;
use qcmt::kernels::Wavepacket;
use qcmt::linalg::CMatrix;
use qcmt::{AlgebraElement, GaussianKernel, Index, Word};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn k3() -> GaussianKernel {
    GaussianKernel::real(&[&[1.0, 0.5, 0.2], &[0.5, 1.0, 0.3], &[0.2, 0.3, 1.0]]).unwrap()
}

pub fn k2() -> GaussianKernel {
    GaussianKernel::real(&[&[1.0, 0.5], &[0.5, 1.0]]).unwrap()
}

pub fn word(k: &GaussianKernel, text: &str) -> Word {
    Word::parse(text, |s| k.find(s)).unwrap()
}

/// All words of length `<= max_len` over `alphabet`.
pub fn all_words(alphabet: &[Index], max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut layer = vec![Vec::<Index>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for i in alphabet {
                let mut v = w.clone();
                v.push(i.clone());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(Word::new));
        layer = next;
    }
    out
}

type Series = HashMap<Vec<u8>, Complex64>;

fn series_mul(a: &Series, b: &Series, max_total: usize) -> Series {
    let mut out = Series::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            if e.iter().map(|&v| v as usize).sum::<usize>() > max_total || e.iter().any(|&v| v > 1) {
                continue;
            }
            *out.entry(e).or_default() += ca * cb;
        }
    }
    out
}

/// Coefficient of `λ_1 … λ_N` in the full Taylor series of
/// `exp[-Σ λ_m² (i_m^c, i_m)/2 - Σ_{m<n} λ_m λ_n (i_m^c, i_n)]`, divided by
/// `i^N`. Monomials with some power above one are dropped as soon as they
/// appear, since exponents only grow under multiplication.
pub fn generating_function_oracle(k: &GaussianKernel, w: &Word) -> Complex64 {
    let f = w.factors();
    let n = f.len();
    let mut exponent = Series::new();
    for m in 0..n {
        let mut e = vec![0u8; n];
        e[m] = 2;
        *exponent.entry(e).or_default() -= two_point(k, &f[m], &f[m]).unwrap() * 0.5;
        for q in m + 1..n {
            let mut e = vec![0u8; n];
            e[m] = 1;
            e[q] = 1;
            *exponent.entry(e).or_default() -= two_point(k, &f[m], &f[q]).unwrap();
        }
    }
    let mut total = Series::new();
    total.insert(vec![0u8; n], c(1.0, 0.0));
    let mut power = total.clone();
    let mut factorial = 1.0;
    for r in 1..=n / 2 {
        power = series_mul(&power, &exponent, n);
        factorial *= r as f64;
        for (e, v) in &power {
            *total.entry(e.clone()).or_default() += v / factorial;
        }
    }
    let coeff = total.get(&vec![1u8; n]).copied().unwrap_or_default();
    coeff / Complex64::i().powu(n as u32)
}

/// Brute-force Wick sum enumerating pairings recursively.
pub fn pairing_oracle(k: &GaussianKernel, w: &Word) -> Complex64 {
    fn rec(k: &GaussianKernel, f: &[Index], rest: &[usize]) -> Complex64 {
        if rest.is_empty() {
            return c(1.0, 0.0);
        }
        let first = rest[0];
        let mut sum = c(0.0, 0.0);
        for pos in 1..rest.len() {
            let partner = rest[pos];
            let remaining: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != partner).collect();
            sum += two_point(k, &f[first], &f[partner]).unwrap() * rec(k, f, &remaining);
        }
        sum
    }
    let f = w.factors();
    if f.len() % 2 == 1 {
        return c(0.0, 0.0);
    }
    let all: Vec<usize> = (0..f.len()).collect();
    rec(k, f, &all)
}

/// Hermitian PSD kernel `B B†` from row-major entries of `B`.
pub fn kernel_from_factor(n: usize, entries: &[(f64, f64)], paired: bool) -> GaussianKernel {
    let b = CMatrix::from_fn(n, n, |r, col| {
        let (re, im) = entries[r * n + col];
        c(re, im)
    });
    let m = &b * b.adjoint();
    let indices: Vec<Index> = if paired {
        let mut v = Vec::new();
        for p in 0..n / 2 {
            let (a, b) = Index::pair(format!("a{p}").as_str(), format!("b{p}").as_str());
            v.push(a);
            v.push(b);
        }
        if n % 2 == 1 {
            v.push(Index::new("z"));
        }
        v
    } else {
        (1..=n as i64).map(Index::new).collect()
    };
    GaussianKernel::new(indices, m).unwrap()
}

pub fn factor_entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
}

/// Elements with small integer coefficients, so that products are exact in
/// floating point and laws can be compared with `==`.
pub fn element(alphabet: Vec<Index>, max_len: usize) -> impl Strategy<Value = AlgebraElement> {
    let n = alphabet.len();
    proptest::collection::vec(
        ((-3i32..=3, -3i32..=3), proptest::collection::vec(0..n, 0..=max_len)),
        1..4,
    )
    .prop_map(move |terms| {
        AlgebraElement::from_terms(terms.into_iter().map(|((re, im), w)| {
            (
                c(re as f64, im as f64),
                w.into_iter().map(|x| alphabet[x].clone()).collect::<Word>(),
            )
        }))
    })
}

pub fn max_coefficient(a: &AlgebraElement) -> f64 {
    a.terms().map(|(_, v)| v.norm()).fold(0.0, f64::max)
}

/// Field parameters for the kernel oracles.
#[derive(Clone, Copy)]
pub struct Field {
    pub mass: f64,
    pub hbar: f64,
    pub beta: f64,
    pub rest: [f64; 2],
}

impl Field {
    pub fn vacuum(mass: f64) -> Self {
        Field {
            mass,
            hbar: 1.0,
            beta: f64::INFINITY,
            rest: [1.0, 0.0],
        }
    }

    pub fn thermal(mass: f64, beta: f64) -> Self {
        Field {
            beta,
            ..Self::vacuum(mass)
        }
    }

    fn occupation(&self, omega: f64, k: f64) -> f64 {
        if self.beta.is_infinite() {
            0.0
        } else {
            let e = self.rest[0] * omega - self.rest[1] * k;
            1.0 / ((self.beta * self.hbar * e).exp() - 1.0)
        }
    }
}

/// Trapezoid rule with `n` intervals on `[-cut, cut]` applied to the mode
/// sum `ℏ ∫ dk/(4πω) [(1+n) F*(p)G(p) + n F*(-p)G(-p)]`.
pub fn kernel_oracle(field: Field, f: &Wavepacket, g: &Wavepacket, cut: f64, n: usize) -> Complex64 {
    let h = 2.0 * cut / n as f64;
    let mut sum = c(0.0, 0.0);
    for j in 0..=n {
        let k = -cut + h * j as f64;
        let w = (k * k + field.mass * field.mass).sqrt();
        let occ = field.occupation(w, k);
        let plus = f.fourier(w, k).conj() * g.fourier(w, k);
        let minus = f.fourier(-w, -k).conj() * g.fourier(-w, -k);
        let weight = if j == 0 || j == n { 0.5 } else { 1.0 };
        sum += (plus * (1.0 + occ) + minus * occ) * (weight * field.hbar / (4.0 * PI * w));
    }
    sum * h
}

/// Kernel oracle at `n` and `2n` intervals; returns the finer value and
/// asserts the two agree to `agree`.
pub fn kernel_oracle_checked(field: Field, f: &Wavepacket, g: &Wavepacket, agree: f64) -> Complex64 {
    let coarse = kernel_oracle(field, f, g, 40.0, 8_000);
    let fine = kernel_oracle(field, f, g, 40.0, 16_000);
    assert!(
        (coarse - fine).norm() < agree,
        "oracle not converged: {coarse} vs {fine}"
    );
    fine
}

pub fn commutator_oracle(field: Field, f: &Wavepacket, g: &Wavepacket) -> Complex64 {
    kernel_oracle_checked(field, &f.conj(), g, 1e-12) - kernel_oracle_checked(field, &g.conj(), f, 1e-12)
}
