//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Estimated error above which the result is rejected.
    pub fail_above: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            fail_above: 1e-8,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the total estimate meets the tolerance.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    integrate_pieces(f, a, b, 1, opts)
}

/// Like [`integrate`], but starts from `pieces` equal panels so that features
/// narrower than `[a, b]` are not missed by the first rule.
pub fn integrate_pieces(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    pieces: usize,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter(format!("integration interval [{a}, {b}]")));
    }
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut panels: Vec<Panel> = (0..pieces)
        .map(|j| {
            let lo = a + h * j as f64;
            let hi = if j + 1 == pieces { b } else { a + h * (j + 1) as f64 };
            gk15(&f, lo, hi)
        })
        .collect();
    let mut evaluations = 15 * pieces;
    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonFinite("quadrature integrand".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target || panels.len() >= opts.max_intervals {
            if error > opts.fail_above {
                return Err(Error::Quadrature {
                    lower: a,
                    upper: b,
                    error,
                    evaluations,
                });
            }
            return Ok(QuadratureResult {
                value,
                error,
                evaluations,
                intervals: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(k, _)| k)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // cannot bisect further in floating point
            return Err(Error::Quadrature {
                lower: a,
                upper: b,
                error,
                evaluations,
            });
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
        evaluations += 30;
    }
}
