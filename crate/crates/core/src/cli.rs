//! Config-driven runners behind the `qcmt` binary.
//!
//! A run reads one JSON [`ExperimentConfig`], evaluates a [`Mode`] and
//! produces an [`Artifact`]: a JSON [`RunReport`] for `verify`, `gram` and
//! `witness`, a CSV table for `moments` and `boost-scan`. Exit codes are
//! [`EXIT_PASS`], [`EXIT_CHECK_FAILED`], [`EXIT_CONFIG`] and
//! [`EXIT_NUMERICAL`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{AlgebraElement, Index, Label, Word};
use crate::error::Error;
use crate::gaussian::{moment_from_generating_function, two_point, wick_expect, GaussianKernel, GaussianState, State};
use crate::gns::{build_basis, gram, positivity_probe, random_coefficient, random_element, GRAM_TOL};
use crate::kernels::{
    commutator_kernel, kernel, kernel_as_gaussian, matrix_to_json, poincare_act, FieldKernelSpec, PacketComponent,
    PoincareElement, Wavepacket,
};
use crate::koopman::{bracket_residuals, gibbs_oscillator_kernel, jacobi_residual, random_polynomial};
use crate::vacuum::{commutation_witness, extended_expect, extended_positivity_probe, ExtendedWord};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_DEGREE: usize = 2;
pub const DEFAULT_MAX_WORD_LEN: usize = 6;

/// Bound on vacuum-kernel changes under boosts.
pub const BOOST_TOL: f64 = 1e-6;
/// Bound on the commutator kernel at the configured separations.
pub const MICROCAUSALITY_TOL: f64 = 1e-6;
/// Bound on the difference between thermal and vacuum commutators.
pub const BETA_INDEPENDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Verify,
    Moments,
    Gram,
    BoostScan,
    Witness,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Verify => "verify",
            Mode::Moments => "moments",
            Mode::Gram => "gram",
            Mode::BoostScan => "boost-scan",
            Mode::Witness => "witness",
        })
    }
}

/// A complex number written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexEntry {
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexEntry::Real(re) => Complex64::new(re, 0.0),
            ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn unit_amplitude() -> ComplexEntry {
    ComplexEntry::Real(1.0)
}

fn unit_hbar() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSource {
    /// Kernel matrix given entry by entry. Labels default to `1..=n`;
    /// `involution` lists pairs `[a, b]` with `a^c = b`, all other labels are
    /// self-conjugate.
    Explicit {
        matrix: Vec<Vec<ComplexEntry>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        involution: Vec<[String; 2]>,
    },
    GibbsOscillator {
        mass: f64,
        frequency: f64,
        kt: f64,
    },
    /// Free field of mass `mass`; `beta` absent means the vacuum.
    Field {
        mass: f64,
        #[serde(default = "unit_hbar")]
        hbar: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rest_frame: Option<[f64; 2]>,
    },
}

impl KernelSource {
    /// The 3×3 real kernel used when no kernel is configured.
    pub fn default_explicit() -> Self {
        let rows = [[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]];
        KernelSource::Explicit {
            matrix: rows
                .iter()
                .map(|r| r.iter().map(|&v| ComplexEntry::Real(v)).collect())
                .collect(),
            labels: None,
            involution: Vec::new(),
        }
    }
}

/// Single-component isotropic wavepacket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub name: String,
    #[serde(default = "unit_amplitude")]
    pub amplitude: ComplexEntry,
    pub center: [f64; 2],
    pub sigma: f64,
    #[serde(default)]
    pub wavevector: [f64; 2],
}

impl PacketConfig {
    pub fn packet(&self) -> crate::Result<Wavepacket> {
        Ok(Wavepacket::new(vec![PacketComponent::new(
            self.amplitude.value(),
            self.center,
            self.sigma,
            self.wavevector,
        )?]))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSource>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub packets: Vec<PacketConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub words: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rapidities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub betas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub separations: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_word_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOLERANCE)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn degree(&self) -> usize {
        self.degree.unwrap_or(DEFAULT_DEGREE)
    }

    pub fn max_word_len(&self) -> usize {
        self.max_word_len.unwrap_or(DEFAULT_MAX_WORD_LEN)
    }

    /// The config with every default made explicit, as echoed in reports.
    pub fn resolved(&self, mode: Mode) -> Self {
        let mut c = self.clone();
        c.mode = Some(mode);
        c.kernel.get_or_insert_with(KernelSource::default_explicit);
        c.seed = Some(self.seed());
        c.tolerance = Some(self.tolerance());
        c.trials = Some(self.trials());
        c.degree = Some(self.degree());
        c.max_word_len = Some(self.max_word_len());
        c
    }

    /// Checks the fields every mode shares and the ones `mode` requires.
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("field `{field}`: {why}")));
        if let Some(m) = self.mode {
            if m != mode {
                return bad("mode", &format!("config is for `{m}` but `{mode}` was requested"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return bad("tolerance", "must be a positive number");
            }
        }
        if let Some(d) = self.degree {
            if d > 4 {
                return bad("degree", "at most 4 is supported");
            }
        }
        if let Some(l) = self.max_word_len {
            if l > crate::gaussian::MAX_WICK_LEN {
                return bad("max_word_len", "exceeds the Wick length cap");
            }
        }
        if self.rapidities.iter().any(|r| !r.is_finite()) {
            return bad("rapidities", "must be finite");
        }
        if self.separations.iter().any(|r| !r.is_finite()) {
            return bad("separations", "must be finite");
        }
        if self.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return bad("betas", "must be positive and finite");
        }
        let is_field = matches!(self.kernel, Some(KernelSource::Field { .. }));
        if !self.packets.is_empty() && !is_field {
            return bad("packets", "only meaningful with a `field` kernel");
        }
        if is_field && self.packets.is_empty() {
            return bad("packets", "a `field` kernel needs at least one packet");
        }
        match mode {
            Mode::Moments if self.words.is_empty() => bad("words", "required for `moments`"),
            Mode::BoostScan => {
                let Some(KernelSource::Field { beta, .. }) = &self.kernel else {
                    return bad("kernel", "`boost-scan` needs a `field` kernel");
                };
                if beta.is_none() {
                    return bad("kernel.beta", "`boost-scan` needs a finite beta for the thermal column");
                }
                if self.rapidities.is_empty() {
                    return bad("rapidities", "required for `boost-scan`");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Library errors surfacing during a run are numerical unless they are about
/// the configuration itself.
fn classify(e: Error) -> CliError {
    match e {
        Error::UnknownIndex(_)
        | Error::NotClosedUnderInvolution(_)
        | Error::Shape { .. }
        | Error::DuplicateIndex(_)
        | Error::InvalidParameter(_)
        | Error::NotHermitian { .. }
        | Error::Parse(_) => CliError::Config(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest deviation seen; `null` in JSON when not finite.
    pub worst_residual: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, worst: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: worst <= threshold,
            worst_residual: worst,
            threshold,
            detail: detail.into(),
        }
    }

    /// Passes when `value >= -threshold`; the residual is the violation.
    fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: value >= -threshold,
            worst_residual: (-value).max(0.0),
            threshold,
            detail: detail.into(),
        }
    }
}

/// Machine-readable outcome. Wall-clock timing is logged rather than stored
/// so that identical runs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
    pub config: ExperimentConfig,
}

impl RunReport {
    fn new(mode: Mode, config: &ExperimentConfig, checks: Vec<Check>, data: serde_json::Value) -> Self {
        RunReport {
            mode,
            seed: config.seed(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            data,
            config: config.resolved(mode),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub report: RunReport,
    /// CSV body for the table-producing modes.
    pub table: Option<String>,
    /// Set when some row could not be computed.
    pub numerical_failure: bool,
}

impl Artifact {
    pub fn exit_code(&self) -> i32 {
        if self.numerical_failure {
            EXIT_NUMERICAL
        } else if !self.report.passed {
            EXIT_CHECK_FAILED
        } else {
            EXIT_PASS
        }
    }

    /// The bytes written to the output: the table if there is one, else the
    /// JSON report.
    pub fn body(&self) -> String {
        self.table.clone().unwrap_or_else(|| self.report.to_json())
    }
}

/// Resolved kernel plus the names words may refer to.
struct Setup {
    kernel: GaussianKernel,
    names: Vec<(String, Index)>,
    field: Option<Field>,
}

struct Field {
    spec: FieldKernelSpec,
    packets: Vec<(String, Wavepacket)>,
}

impl Setup {
    fn build(config: &ExperimentConfig) -> Result<Self, CliError> {
        let source = config.kernel.clone().unwrap_or_else(KernelSource::default_explicit);
        match source {
            KernelSource::Explicit {
                matrix,
                labels,
                involution,
            } => {
                let n = matrix.len();
                if let Some(row) = matrix.iter().position(|r| r.len() != n) {
                    return Err(CliError::Config(format!(
                        "field `kernel.matrix`: row {row} is not of length {n}"
                    )));
                }
                let labels = labels.unwrap_or_else(|| (1..=n).map(|k| k.to_string()).collect());
                if labels.len() != n {
                    return Err(CliError::Config(format!(
                        "field `kernel.labels`: {} labels for a {n}x{n} matrix",
                        labels.len()
                    )));
                }
                let label = |s: &str| -> Label {
                    match s.parse::<i64>() {
                        Ok(v) => Label::from(v),
                        Err(_) => Label::from(s),
                    }
                };
                let mut indices: Vec<Index> = labels.iter().map(|s| Index::new(label(s))).collect();
                for [a, b] in &involution {
                    let pos = |s: &String| {
                        labels
                            .iter()
                            .position(|l| l == s)
                            .ok_or_else(|| CliError::Config(format!("field `kernel.involution`: unknown label `{s}`")))
                    };
                    let (pa, pb) = (pos(a)?, pos(b)?);
                    let (ia, ib) = Index::pair(label(a), label(b));
                    indices[pa] = ia;
                    indices[pb] = ib;
                }
                let m = crate::linalg::CMatrix::from_fn(n, n, |r, c| matrix[r][c].value());
                let kernel =
                    GaussianKernel::new(indices, m).map_err(|e| CliError::Config(format!("field `kernel`: {e}")))?;
                let names = labels.iter().cloned().zip(kernel.indices().iter().cloned()).collect();
                Ok(Setup {
                    kernel,
                    names,
                    field: None,
                })
            }
            KernelSource::GibbsOscillator { mass, frequency, kt } => {
                let kernel = gibbs_oscillator_kernel(mass, frequency, kt)
                    .map_err(|e| CliError::Config(format!("field `kernel`: {e}")))?;
                let names = vec![("q".to_string(), Index::new("q")), ("p".to_string(), Index::new("p"))];
                Ok(Setup {
                    kernel,
                    names,
                    field: None,
                })
            }
            KernelSource::Field {
                mass,
                hbar,
                beta,
                rest_frame,
            } => {
                let mut spec = FieldKernelSpec::new(mass, hbar, beta.unwrap_or(f64::INFINITY))
                    .map_err(|e| CliError::Config(format!("field `kernel`: {e}")))?;
                if let Some(u) = rest_frame {
                    spec = spec
                        .with_rest_frame(u)
                        .map_err(|e| CliError::Config(format!("field `kernel.rest_frame`: {e}")))?;
                }
                let mut packets = Vec::new();
                let mut names = Vec::new();
                for (k, p) in config.packets.iter().enumerate() {
                    let packet = p
                        .packet()
                        .map_err(|e| CliError::Config(format!("field `packets[{k}]`: {e}")))?;
                    if names.iter().any(|(n, _)| n == &p.name) {
                        return Err(CliError::Config(format!(
                            "field `packets[{k}].name`: duplicate `{}`",
                            p.name
                        )));
                    }
                    names.push((p.name.clone(), packet.index()));
                    names.push((format!("{}^c", p.name), packet.conj().index()));
                    packets.push((p.name.clone(), packet));
                }
                let raw: Vec<Wavepacket> = packets.iter().map(|(_, p)| p.clone()).collect();
                let kernel = kernel_as_gaussian(&spec, &raw).map_err(classify)?;
                Ok(Setup {
                    kernel,
                    names,
                    field: Some(Field { spec, packets }),
                })
            }
        }
    }

    fn resolve(&self, name: &str) -> Option<Index> {
        self.names
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, i)| i.clone())
            .or_else(|| self.kernel.find(name))
    }

    /// Generators in the order they were declared, conjugates included.
    fn alphabet(&self) -> Vec<Index> {
        let mut out: Vec<Index> = Vec::new();
        for (_, i) in &self.names {
            if !out.contains(i) {
                out.push(i.clone());
            }
        }
        for i in self.kernel.indices() {
            if !out.contains(i) {
                out.push(i.clone());
            }
        }
        out
    }

    fn pair_names(&self, config: &ExperimentConfig) -> Result<(Index, Index), CliError> {
        if let Some([a, b]) = &config.pair {
            let look = |s: &String| {
                self.resolve(s)
                    .ok_or_else(|| CliError::Config(format!("field `pair`: unknown index `{s}`")))
            };
            return Ok((look(a)?, look(b)?));
        }
        let alphabet = self.alphabet();
        match alphabet.as_slice() {
            [] => Err(CliError::Config("field `pair`: the kernel has no indices".into())),
            [only] => Ok((only.clone(), only.clone())),
            [a, b, ..] => Ok((a.clone(), b.clone())),
        }
    }
}

impl Field {
    fn pair(&self, config: &ExperimentConfig) -> Result<(Wavepacket, Wavepacket), CliError> {
        let find = |name: &str| -> Result<Wavepacket, CliError> {
            if let Some((_, p)) = self.packets.iter().find(|(n, _)| n == name) {
                return Ok(p.clone());
            }
            if let Some(base) = name.strip_suffix("^c") {
                if let Some((_, p)) = self.packets.iter().find(|(n, _)| n == base) {
                    return Ok(p.conj());
                }
            }
            Err(CliError::Config(format!("field `pair`: unknown packet `{name}`")))
        };
        match &config.pair {
            Some([a, b]) => Ok((find(a)?, find(b)?)),
            None => {
                let first = self.packets[0].1.clone();
                let second = self
                    .packets
                    .get(1)
                    .map(|(_, p)| p.clone())
                    .unwrap_or_else(|| first.clone());
                Ok((first, second))
            }
        }
    }
}

fn max_coefficient(a: &AlgebraElement) -> f64 {
    a.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

fn words_up_to(alphabet: &[Index], max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..max_len {
        if alphabet.is_empty() {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|w| alphabet.iter().map(move |i| w.concat(&Word::generator(i.clone()))))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn algebra_laws_check(alphabet: &[Index], trials: usize, tol: f64, rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let a = random_element(alphabet, 3, rng);
        let b = random_element(alphabet, 3, rng);
        let c = random_element(alphabet, 3, rng);
        let (l, m) = (random_coefficient(rng), random_coefficient(rng));
        let assoc = &(&(&a * &b) * &c) - &(&a * &(&b * &c));
        let anti_hom = &(&a * &b).adjoint() - &(&b.adjoint() * &a.adjoint());
        let lin = (&a.scale(l) + &b.scale(m)).adjoint();
        let anti_lin = &lin - &(&a.adjoint().scale(l.conj()) + &b.adjoint().scale(m.conj()));
        let involutive = &a.adjoint().adjoint() - &a;
        for r in [assoc, anti_hom, anti_lin, involutive] {
            worst = worst.max(max_coefficient(&r));
        }
    }
    Check::at_most(
        "algebra_laws",
        worst,
        tol,
        format!("{trials} random triples: associativity, adjoint anti-homomorphism, anti-linearity, involution"),
    )
}

fn wick_check(setup: &Setup, max_len: usize, tol: f64) -> Result<Check, CliError> {
    let words = words_up_to(setup.kernel.indices(), max_len);
    let mut worst: f64 = 0.0;
    for w in &words {
        let a = wick_expect(&setup.kernel, w).map_err(classify)?;
        let b = moment_from_generating_function(&setup.kernel, w).map_err(classify)?;
        worst = worst.max((a - b).norm());
    }
    Ok(Check::at_most(
        "wick_vs_generating_function",
        worst,
        tol,
        format!("{} words of length <= {max_len}", words.len()),
    ))
}

fn koopman_check(trials: usize, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let mut failures = 0usize;
    for _ in 0..trials {
        let n = rng.random_range(1..=2);
        let u = random_polynomial(rng, n, 3);
        let v = random_polynomial(rng, n, 3);
        let f = random_polynomial(rng, n, 3);
        let r = bracket_residuals(&u, &v, &f).map_err(classify)?;
        let j = jacobi_residual(&u, &v, &f).map_err(classify)?;
        if !(r.all_zero() && j.is_zero()) {
            failures += 1;
        }
    }
    Ok(Check::at_most(
        "koopman_brackets",
        failures as f64,
        0.0,
        format!("{trials} random rational triples, degree <= 3, n <= 2; residual counts failing triples"),
    ))
}

fn state_axioms_check(
    s: &GaussianState,
    alphabet: &[Index],
    trials: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Check, CliError> {
    let one = s.expect(&AlgebraElement::one()).map_err(classify)?;
    let mut worst = (one - Complex64::new(1.0, 0.0)).norm();
    for _ in 0..trials {
        let a = random_element(alphabet, 4, rng);
        let b = random_element(alphabet, 4, rng);
        let (l, m) = (random_coefficient(rng), random_coefficient(rng));
        let ra = s.expect(&a).map_err(classify)?;
        let rb = s.expect(&b).map_err(classify)?;
        let adj = s.expect(&a.adjoint()).map_err(classify)?;
        let comb = s.expect(&(&a.scale(l) + &b.scale(m))).map_err(classify)?;
        let scale = 1.0 + ra.norm() + rb.norm();
        worst = worst
            .max((adj - ra.conj()).norm() / scale)
            .max((comb - (l * ra + m * rb)).norm() / (scale * (1.0 + l.norm() + m.norm())));
    }
    Ok(Check::at_most(
        "state_axioms",
        worst,
        tol,
        format!("normalization plus {trials} random pairs: linearity, adjoint compatibility"),
    ))
}

fn run_verify(config: &ExperimentConfig, setup: &Setup) -> Result<Artifact, CliError> {
    let tol = config.tolerance();
    let trials = config.trials();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let alphabet = setup.alphabet();
    if alphabet.is_empty() {
        log::warn!("empty index set: kernel-dependent checks pass vacuously");
    }
    let state = GaussianState::new_unchecked(setup.kernel.clone());
    let mut checks = vec![
        algebra_laws_check(&alphabet, trials, tol, &mut rng),
        wick_check(setup, config.max_word_len(), tol)?,
        koopman_check(trials, &mut rng)?,
        state_axioms_check(&state, &alphabet, trials, tol, &mut rng)?,
    ];

    let basis = build_basis(setup.kernel.indices(), config.degree());
    let g = gram(&basis, &state).map_err(classify)?;
    checks.push(Check::at_least(
        "gram_psd",
        g.min_eigenvalue().min(0.0),
        GRAM_TOL,
        format!("basis of {} words up to degree {}", basis.len(), config.degree()),
    ));
    let probe = positivity_probe(&state, &alphabet, trials, 3, &mut rng).map_err(classify)?;
    checks.push(Check::at_least(
        "positivity_probe",
        probe.min(0.0),
        GRAM_TOL,
        format!("{trials} random elements"),
    ));
    let ext = extended_positivity_probe(&state, &alphabet, trials, 2, &mut rng).map_err(classify)?;
    checks.push(Check::at_least(
        "extended_positivity",
        ext.min(0.0),
        GRAM_TOL,
        format!("{trials} random extended elements"),
    ));

    if let Some(field) = &setup.field {
        checks.extend(field_checks(config, field)?);
    }

    Ok(Artifact {
        report: RunReport::new(Mode::Verify, config, checks, serde_json::Value::Null),
        table: None,
        numerical_failure: false,
    })
}

fn field_checks(config: &ExperimentConfig, field: &Field) -> Result<Vec<Check>, CliError> {
    let (f, g) = field.pair(config)?;
    let vacuum = field.spec.vacuum_part();
    let mut out = Vec::new();

    let rapidities = if config.rapidities.is_empty() {
        vec![0.5]
    } else {
        config.rapidities.clone()
    };
    let base = kernel(&vacuum, &f, &g).map_err(classify)?;
    let mut worst: f64 = 0.0;
    for &chi in &rapidities {
        let b = PoincareElement::boost(chi);
        let moved = kernel(&vacuum, &poincare_act(&b, &f), &poincare_act(&b, &g)).map_err(classify)?;
        worst = worst.max((moved - base).norm());
    }
    out.push(Check::at_most(
        "vacuum_boost_invariance",
        worst,
        BOOST_TOL,
        format!("rapidities {rapidities:?}"),
    ));

    let separations = if config.separations.is_empty() {
        vec![10.0]
    } else {
        config.separations.clone()
    };
    let mut worst: f64 = 0.0;
    for &dx in &separations {
        let shifted = poincare_act(&PoincareElement::translation(0.0, dx), &g);
        worst = worst.max(commutator_kernel(&vacuum, &f, &shifted).map_err(classify)?.norm());
    }
    out.push(Check::at_most(
        "microcausality",
        worst,
        MICROCAUSALITY_TOL,
        format!("second packet shifted in space by {separations:?}"),
    ));

    let mut betas = config.betas.clone();
    if betas.is_empty() {
        betas.push(if field.spec.is_vacuum() { 1.0 } else { field.spec.beta() });
    }
    let reference = commutator_kernel(&vacuum, &f, &g).map_err(classify)?;
    let mut worst: f64 = 0.0;
    for &beta in &betas {
        let spec = FieldKernelSpec::new(field.spec.mass(), field.spec.hbar(), beta)
            .and_then(|s| s.with_rest_frame(field.spec.rest_frame()))
            .map_err(|e| CliError::Config(format!("field `betas`: {e}")))?;
        worst = worst.max((commutator_kernel(&spec, &f, &g).map_err(classify)? - reference).norm());
    }
    out.push(Check::at_most(
        "commutator_beta_independence",
        worst,
        BETA_INDEPENDENCE_TOL,
        format!("betas {betas:?}"),
    ));
    Ok(out)
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or large magnitudes; `-0` prints as `0`.
fn fmt_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{v:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn run_moments(config: &ExperimentConfig, setup: &Setup) -> Result<Artifact, CliError> {
    let state = GaussianState::new_unchecked(setup.kernel.clone());
    if !setup.kernel.is_psd(crate::gaussian::PSD_TOL) {
        log::warn!("kernel is not positive semi-definite; moments are formal");
    }
    let resolve = |s: &str| setup.resolve(s);
    let mut rows = Vec::new();
    let mut failed = 0usize;
    for text in &config.words {
        let w = ExtendedWord::parse(text, resolve)
            .map_err(|e| CliError::Config(format!("field `words`: `{text}`: {e}")))?;
        let value = if w.is_plain() {
            state.expect_word(&w.segments()[0])
        } else {
            extended_expect(&state, &w)
        };
        match value {
            Ok(v) => rows.push(vec![text.trim().to_string(), fmt_number(v.re), fmt_number(v.im)]),
            Err(e) => {
                log::error!("word `{text}`: {e}");
                failed += 1;
                rows.push(vec![text.trim().to_string(), "error".into(), "error".into()]);
            }
        }
    }
    let table = csv_table(&["word", "re", "im"], &rows)?;
    let checks = vec![Check::at_most(
        "moments_evaluated",
        failed as f64,
        0.0,
        format!("{} words", config.words.len()),
    )];
    Ok(Artifact {
        report: RunReport::new(Mode::Moments, config, checks, serde_json::Value::Null),
        table: Some(table),
        numerical_failure: failed > 0,
    })
}

fn run_gram(config: &ExperimentConfig, setup: &Setup) -> Result<Artifact, CliError> {
    let state = GaussianState::new_unchecked(setup.kernel.clone());
    let basis = build_basis(setup.kernel.indices(), config.degree());
    let g = gram(&basis, &state).map_err(classify)?;
    let names: Vec<String> = basis
        .words()
        .iter()
        .map(|w| {
            let parts: Vec<String> = w
                .factors()
                .iter()
                .map(|i| {
                    let name = setup
                        .names
                        .iter()
                        .find(|(_, j)| j == i)
                        .map(|(n, _)| n.clone())
                        .unwrap_or_else(|| i.to_string());
                    format!("M{name}")
                })
                .collect();
            if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join("*")
            }
        })
        .collect();
    let checks = vec![Check::at_least(
        "gram_psd",
        g.min_eigenvalue().min(0.0),
        GRAM_TOL,
        format!("basis of {} words up to degree {}", basis.len(), config.degree()),
    )];
    let data = json!({
        "basis": names,
        "summary": g.summary(),
        "gram": matrix_to_json(&g.gram),
        "kernel": matrix_to_json(setup.kernel.matrix()),
    });
    Ok(Artifact {
        report: RunReport::new(Mode::Gram, config, checks, data),
        table: None,
        numerical_failure: false,
    })
}

fn run_boost_scan(config: &ExperimentConfig, setup: &Setup) -> Result<Artifact, CliError> {
    let field = setup
        .field
        .as_ref()
        .ok_or_else(|| CliError::Config("field `kernel`: `boost-scan` needs a `field` kernel".into()))?;
    let (f, g) = field.pair(config)?;
    let vacuum = field.spec.vacuum_part();
    let thermal = field.spec;
    let base_v = kernel(&vacuum, &f, &g).map_err(classify)?;
    let base_t = kernel(&thermal, &f, &g).map_err(classify)?;
    let mut rows = Vec::new();
    let mut failed = 0usize;
    let mut worst_vacuum: f64 = 0.0;
    for &chi in &config.rapidities {
        let b = PoincareElement::boost(chi);
        let (bf, bg) = (poincare_act(&b, &f), poincare_act(&b, &g));
        let row = kernel(&vacuum, &bf, &bg)
            .and_then(|v| Ok(((v - base_v).norm(), (kernel(&thermal, &bf, &bg)? - base_t).norm())));
        match row {
            Ok((dv, dt)) => {
                worst_vacuum = worst_vacuum.max(dv);
                rows.push(vec![fmt_number(chi), fmt_number(dv), fmt_number(dt)]);
            }
            Err(e) => {
                log::error!("rapidity {chi}: {e}");
                failed += 1;
                rows.push(vec![fmt_number(chi), "error".into(), "error".into()]);
            }
        }
    }
    let table = csv_table(&["rapidity", "vacuum_deviation", "thermal_deviation"], &rows)?;
    let checks = vec![Check::at_most(
        "vacuum_boost_invariance",
        worst_vacuum,
        BOOST_TOL,
        format!("{} rapidities", config.rapidities.len()),
    )];
    Ok(Artifact {
        report: RunReport::new(Mode::BoostScan, config, checks, serde_json::Value::Null),
        table: Some(table),
        numerical_failure: failed > 0,
    })
}

fn run_witness(config: &ExperimentConfig, setup: &Setup) -> Result<Artifact, CliError> {
    let state = GaussianState::new_unchecked(setup.kernel.clone());
    let (i, j) = setup.pair_names(config)?;
    let (split, projected) = commutation_witness(&state, &i, &j).map_err(classify)?;
    let expected = two_point(&setup.kernel, &i, &j).map_err(classify)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let trials = config.trials();
    let probe = extended_positivity_probe(&state, &setup.alphabet(), trials, 2, &mut rng).map_err(classify)?;
    let checks = vec![
        Check::at_most(
            "witness_values",
            split.norm().max((projected - expected).norm()),
            config.tolerance(),
            "rho(Mi V Mj) = 0 and rho(V Mi Mj) = (i^c, j)",
        ),
        Check::at_least(
            "extended_positivity",
            probe.min(0.0),
            GRAM_TOL,
            format!("{trials} random extended elements"),
        ),
    ];
    let data = json!({
        "split": [split.re, split.im],
        "projected": [projected.re, projected.im],
        "separation": (projected - split).norm(),
        "noncommuting": (projected - split).norm() > config.tolerance(),
        "probe_minimum": if probe.is_finite() { json!(probe) } else { serde_json::Value::Null },
    });
    Ok(Artifact {
        report: RunReport::new(Mode::Witness, config, checks, data),
        table: None,
        numerical_failure: false,
    })
}

/// Runs `mode` on an already-loaded config.
pub fn run(mode: Mode, config: &ExperimentConfig) -> Result<Artifact, CliError> {
    config.validate(mode)?;
    let setup = Setup::build(config)?;
    match mode {
        Mode::Verify => run_verify(config, &setup),
        Mode::Moments => run_moments(config, &setup),
        Mode::Gram => run_gram(config, &setup),
        Mode::BoostScan => run_boost_scan(config, &setup),
        Mode::Witness => run_witness(config, &setup),
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

/// Loads, runs and writes; returns the process exit code.
pub fn execute(mode: Mode, inv: &Invocation) -> i32 {
    let started = Instant::now();
    let result = (|| {
        let mut config = match &inv.config {
            Some(p) => ExperimentConfig::from_path(p)?,
            None => ExperimentConfig::default(),
        };
        if inv.seed.is_some() {
            config.seed = inv.seed;
        }
        if inv.tolerance.is_some() {
            config.tolerance = inv.tolerance;
        }
        let artifact = run(mode, &config)?;
        let body = artifact.body();
        match inv.out.as_ref().or(config.output.as_ref()) {
            Some(path) => std::fs::write(path, &body)
                .map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))?,
            None => print!("{body}"),
        }
        Ok::<_, CliError>(artifact)
    })();
    let elapsed = started.elapsed().as_secs_f64();
    match result {
        Ok(a) => {
            for c in a.report.checks.iter() {
                let level = if c.passed { log::Level::Info } else { log::Level::Warn };
                log::log!(
                    level,
                    "{}: {} (worst {:e}, threshold {:e})",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.worst_residual,
                    c.threshold
                );
            }
            log::info!("{mode} finished in {elapsed:.3} s");
            a.exit_code()
        }
        Err(e) => {
            log::error!("{e}");
            eprintln!("qcmt {mode}: {e}");
            e.exit_code()
        }
    }
}
