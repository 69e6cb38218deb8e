//! Gelfand and Kolmogorov widths: exact ellipsoid values, brute-force
//! searches over subspaces, the section-radius lower bounds and their
//! empirical calibration.

use std::cell::RefCell;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bodies::{induced_ball, linear_image, Body, MultiplierSpec};
use crate::error::{Error, Result};
use crate::linalg::{norm2, random_subspace_with, varrho, Matrix, Subspace};
use crate::manifolds::{ManifoldParams, SpectralData};
use crate::optim::{maximize_on_sphere, nelder_mead, NelderMeadOptions};
use crate::ortho::{conjugate_exponent, trig_system, OrthonormalSystem};
use crate::parallel::{derive_seed, label_hash, map_indexed, stream_rng, Execution};
use crate::stochastic::{expectation_norm, section_radius, EstimateWithCI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthKind {
    Gelfand,
    Kolmogorov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthMethod {
    Exact,
    BruteForce,
    LowerBoundThm1,
    LowerBoundThm2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthResult {
    pub kind: WidthKind,
    pub m: usize,
    pub value: f64,
    pub method: WidthMethod,
    /// Frame of the optimal subspace found (the approximating subspace for
    /// Kolmogorov widths, the section subspace for Gelfand widths).
    pub witness: Option<Vec<Vec<f64>>>,
}

/// A universal constant fitted on training trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConstant {
    pub context: String,
    pub value: f64,
    pub trials: usize,
}

impl CalibrationConstant {
    pub fn new(context: impl Into<String>, value: f64, trials: usize) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!("constant must be positive, got {value}")));
        }
        Ok(Self {
            context: context.into(),
            value,
            trials,
        })
    }

    /// `C = 1`, for evaluating a bound without a constant.
    pub fn unit(context: impl Into<String>) -> Self {
        Self {
            context: context.into(),
            value: 1.0,
            trials: 0,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            ..self.clone()
        }
    }
}

/// Kolmogorov width `d_m` of the ellipsoid with the given semiaxes in the
/// Euclidean norm: the `(m+1)`-th semiaxis, or 0 when `m = n`.
pub fn ellipsoid_kolmogorov_exact(semiaxes: &[f64], m: usize) -> Result<f64> {
    if semiaxes.iter().any(|a| !(*a > 0.0)) || semiaxes.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("semiaxes must be positive and descending".into()));
    }
    if m > semiaxes.len() {
        return Err(Error::BadOrder(format!("order {m} exceeds dimension {}", semiaxes.len())));
    }
    Ok(semiaxes.get(m).copied().unwrap_or(0.0))
}

/// Largest dimension for brute-force width searches.
pub const MAX_BRUTE_FORCE_DIM: usize = 5;
/// Default number of random subspaces scored per search.
pub const DEFAULT_WIDTH_RESTARTS: usize = 256;
/// Best candidates refined by Nelder–Mead.
pub const REFINED_CANDIDATES: usize = 4;

fn check_width_args(v: &Body, z: &Body, m: usize) -> Result<()> {
    let n = v.dim();
    if n == 0 || n > MAX_BRUTE_FORCE_DIM {
        return Err(Error::BadDimensions(format!(
            "brute-force widths need 1 <= n <= {MAX_BRUTE_FORCE_DIM}, got {n}"
        )));
    }
    if z.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.dim() });
    }
    if m > n {
        return Err(Error::BadOrder(format!("order {m} exceeds dimension {n}")));
    }
    Ok(())
}

/// Subspace spanned by `q_j + Σ_i X[i,j]·q_{k+i}`, `j < k`: a chart of the
/// Grassmannian around `span(q_0..q_k)`.
fn chart_subspace(basis: &[Vec<f64>], k: usize, x: &[f64]) -> Result<Subspace> {
    let n = basis.len();
    let vectors: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut v = basis[j].clone();
            for i in 0..n - k {
                crate::linalg::axpy(x[i * k + j], &basis[k + i], &mut v);
            }
            v
        })
        .collect();
    Subspace::orthonormalize(&vectors)
}

/// Minimizes `objective` over k-dimensional subspaces of ℝⁿ: scores
/// `candidates` Haar subspaces, then refines the best few in a chart.
/// The objective receives a hint (its previous maximizer) and a seed.
fn grassmann_search<F>(n: usize, k: usize, candidates: usize, seed: u64, objective: F) -> Result<(f64, Subspace)>
where
    F: Fn(&Subspace, Option<&[f64]>, u64) -> (f64, Vec<f64>) + Sync + Send,
{
    let scored: Vec<(f64, Subspace)> = map_indexed(candidates.max(1), Execution::default(), |i| {
        let mut rng = stream_rng(seed, i as u64);
        let l = random_subspace_with(&mut rng, n, k).expect("valid dimensions");
        let (v, _) = objective(&l, None, derive_seed(seed, 1_000_000 + i as u64));
        (v, l)
    });
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.total_cmp(&scored[b].0));
    let top: Vec<usize> = order.into_iter().take(REFINED_CANDIDATES).collect();

    let refined: Vec<(f64, Subspace)> = map_indexed(top.len(), Execution::default(), |t| {
        let (start_val, start) = &scored[top[t]];
        let basis = start.completed_basis();
        let hint: RefCell<Option<Vec<f64>>> = RefCell::new(None);
        let calls = RefCell::new(0u64);
        let f = |x: &[f64]| -> f64 {
            let Ok(l) = chart_subspace(&basis, k, x) else {
                return f64::INFINITY;
            };
            let c = {
                let mut c = calls.borrow_mut();
                *c += 1;
                *c
            };
            let h = hint.borrow().clone();
            let (v, arg) = objective(&l, h.as_deref(), derive_seed(seed, (2_000_000 + t as u64) << 20 | c));
            *hint.borrow_mut() = Some(arg);
            v
        };
        let opts = NelderMeadOptions {
            f_tol: 1e-10,
            x_tol: 1e-6,
            max_evals: 500,
            initial_step: 0.2,
            restarts: 2,
        };
        let best = nelder_mead(f, &vec![0.0; k * (n - k)], &opts);
        if best.value < *start_val {
            (best.value, chart_subspace(&basis, k, &best.x).expect("chart point is regular"))
        } else {
            (*start_val, start.clone())
        }
    });
    Ok(refined
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one candidate"))
}

fn inner_options() -> NelderMeadOptions {
    NelderMeadOptions {
        f_tol: 1e-12,
        x_tol: 1e-8,
        max_evals: 400,
        initial_step: 0.1,
        restarts: 1,
    }
}

/// Distance from `x` to the subspace `l` in the norm of `z`.
fn distance_to_subspace(z: &Body, l: &Subspace, x: &[f64]) -> f64 {
    let coords = l.coordinates(x);
    let residual: Vec<f64> = x.iter().zip(l.embed(&coords)).map(|(a, b)| a - b).collect();
    if z.is_euclidean() {
        return norm2(&residual);
    }
    let scale = norm2(x).max(1e-300);
    let f = |c: &[f64]| {
        let y = l.embed(c);
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        z.gauge(&d)
    };
    let opts = NelderMeadOptions {
        initial_step: 0.1 * scale,
        x_tol: 1e-10 * scale,
        f_tol: 1e-13 * scale,
        max_evals: 1000,
        restarts: 1,
    };
    nelder_mead(f, &coords, &opts).value.min(z.gauge(&residual))
}

/// Random starts used by the inner maximization of a Kolmogorov search.
const INNER_STARTS: usize = 6;

/// `sup_{x∈V} dist_Z(x, L)` by multistart ascent on the sphere.
fn kolmogorov_deviation(v: &Body, z: &Body, l: &Subspace, hint: Option<&[f64]>, seed: u64) -> (f64, Vec<f64>) {
    let n = v.dim();
    let mut rng = stream_rng(seed, 0);
    let mut starts: Vec<Vec<f64>> = hint.map(|h| vec![h.to_vec()]).unwrap_or_default();
    let random = if hint.is_some() { 2 } else { INNER_STARTS };
    starts.extend((0..random).map(|_| crate::linalg::gaussian_vector(&mut rng, n)));
    let f = |u: &[f64]| distance_to_subspace(z, l, u) / v.gauge(u);
    maximize_on_sphere(f, &starts, &inner_options())
}

/// `rad(V|Z) = sup_{x∈V} ‖x‖_Z`.
fn body_radius(v: &Body, z: &Body, restarts: usize, seed: u64) -> Result<f64> {
    section_radius(v, z, &Subspace::full(v.dim()), restarts.max(crate::stochastic::MIN_RESTARTS), seed)
}

/// Brute-force Kolmogorov width `d_m(V, Z)`; an upper bound on the true
/// width.
pub fn brute_force_kolmogorov(v: &Body, z: &Body, m: usize, restarts: usize, seed: u64) -> Result<WidthResult> {
    check_width_args(v, z, m)?;
    let n = v.dim();
    let (value, witness) = if m == n {
        (0.0, Some(Subspace::full(n)))
    } else if m == 0 {
        (body_radius(v, z, restarts, seed)?, None)
    } else {
        let (val, l) = grassmann_search(n, m, restarts, seed, |l, hint, s| kolmogorov_deviation(v, z, l, hint, s))?;
        (val, Some(l))
    };
    Ok(WidthResult {
        kind: WidthKind::Kolmogorov,
        m,
        value,
        method: WidthMethod::BruteForce,
        witness: witness.map(|l| l.frame().to_vec()),
    })
}

/// Restarts of the section-radius maximization inside a Gelfand search.
const GELFAND_INNER_RESTARTS: usize = 8;

/// Brute-force Gelfand width `d^m(V, Z)`: the smallest section radius over
/// codimension-`m` subspaces found.
pub fn brute_force_gelfand(v: &Body, z: &Body, m: usize, restarts: usize, seed: u64) -> Result<WidthResult> {
    check_width_args(v, z, m)?;
    let n = v.dim();
    let (value, witness) = if m == n {
        (0.0, None)
    } else if m == 0 {
        (body_radius(v, z, restarts, seed)?, Some(Subspace::full(n)))
    } else {
        let (val, l) = grassmann_search(n, n - m, restarts, seed, |l, _, s| {
            let r = section_radius(v, z, l, GELFAND_INNER_RESTARTS, s).unwrap_or(f64::INFINITY);
            (r, Vec::new())
        })?;
        (val, Some(l))
    };
    Ok(WidthResult {
        kind: WidthKind::Gelfand,
        m,
        value,
        method: WidthMethod::BruteForce,
        witness: witness.map(|l| l.frame().to_vec()),
    })
}

/// Linear cowidth `λ^m = 2·d^m`.
pub fn linear_cowidth(gelfand: &WidthResult) -> f64 {
    2.0 * gelfand.value
}

/// Tolerance of [`duality_check`].
pub const DUALITY_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityOutcome {
    pub kolmogorov: f64,
    pub gelfand_adjoint: f64,
    pub holds: bool,
}

/// Compares `d_m(A·B₂ⁿ, B₂ⁿ)` with `d^m(Aᵀ·B₂ⁿ, B₂ⁿ)`.
pub fn duality_check(a: &Matrix, m: usize) -> Result<bool> {
    Ok(duality_check_with(a, m, DEFAULT_WIDTH_RESTARTS, 0)?.holds)
}

pub fn duality_check_with(a: &Matrix, m: usize, restarts: usize, seed: u64) -> Result<DualityOutcome> {
    let n = a.rows();
    let b = Body::euclidean(n);
    let k = brute_force_kolmogorov(&linear_image(&b, a)?, &b, m, restarts, seed)?;
    let g = brute_force_gelfand(&linear_image(&b, &a.transpose())?, &b, m, restarts, seed)?;
    Ok(DualityOutcome {
        kolmogorov: k.value,
        gelfand_adjoint: g.value,
        holds: (k.value - g.value).abs() <= DUALITY_TOL,
    })
}

fn check_nonincreasing(lambdas: &[f64]) -> Result<()> {
    match lambdas.windows(2).position(|w| w[1].abs() > w[0].abs()) {
        Some(i) => Err(Error::NotMonotone(i + 1)),
        None => Ok(()),
    }
}

/// `sup_{‖α‖₂≤1} ‖Λα − S_m(Λα)‖₂ = |λ_{m+1}|` for `|λ|` nonincreasing.
pub fn fourier_tail_sup(lambdas: &[f64], m: usize) -> Result<f64> {
    check_nonincreasing(lambdas)?;
    lambdas
        .get(m)
        .map(|v| v.abs())
        .ok_or_else(|| Error::BadOrder(format!("order {m} needs {} multipliers", m + 1)))
}

/// [`fourier_tail_sup`] for a multiplier truncated against a spectrum.
pub fn fourier_tail_sup_spec(spec: &MultiplierSpec, spectral: &SpectralData, m: usize) -> Result<f64> {
    fourier_tail_sup(&spec.entries(spectral, m + 1)?, m)
}

/// Direct maximization of `‖Λα − S_mΛα‖₂` over the unit sphere of ℝⁿ.
pub fn fourier_tail_numeric(lambdas: &[f64], m: usize, seed: u64) -> Result<f64> {
    check_nonincreasing(lambdas)?;
    let n = lambdas.len();
    if m >= n {
        return Err(Error::BadOrder(format!("order {m} needs {} multipliers", m + 1)));
    }
    let f = |u: &[f64]| lambdas[m..].iter().zip(&u[m..]).map(|(l, a)| (l * a).powi(2)).sum::<f64>().sqrt();
    let mut rng = stream_rng(seed, 0);
    let starts: Vec<Vec<f64>> = (0..8).map(|_| crate::linalg::gaussian_vector(&mut rng, n)).collect();
    Ok(maximize_on_sphere(f, &starts, &NelderMeadOptions::default()).0)
}

fn check_theorem_exponent(p: f64) -> Result<()> {
    if !(p >= 2.0) || p.is_infinite() {
        return Err(Error::InvalidArgument(format!("theorem bounds need 2 <= p < inf, got {p}")));
    }
    Ok(())
}

/// Section-radius lower bound `C·ϱ(A)·E[‖·‖_{B_(J,p)}]^{−3/2}`.
pub fn thm1_lower_bound(
    a: &Matrix,
    system: &Arc<OrthonormalSystem>,
    p: f64,
    c: &CalibrationConstant,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_theorem_exponent(p)?;
    let rho = varrho(a)?;
    let e = expectation_norm(&induced_ball(system.clone(), p)?, samples, seed)?;
    Ok(c.value * rho * thm1_factor(e.value))
}

/// `E^{−3/2}`.
pub fn thm1_factor(e_p: f64) -> f64 {
    e_p.powf(-1.5)
}

/// `(E_{q′}·E_p)^{−n/s}`.
pub fn thm2_factor(e_q_dual: f64, e_p: f64, n: usize, s: usize) -> f64 {
    (e_q_dual * e_p).powf(-(n as f64) / s as f64)
}

/// Section-radius lower bound with dual exponent `C·ϱ(A)·(E[‖·‖_{B_(J,q′)}]·E[‖·‖_{B_(J,p)}])^{−n/s}`.
#[allow(clippy::too_many_arguments)]
pub fn thm2_lower_bound(
    a: &Matrix,
    system: &Arc<OrthonormalSystem>,
    p: f64,
    q: f64,
    s: usize,
    c: &CalibrationConstant,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_theorem_exponent(p)?;
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::InvalidArgument(format!("q must lie in (1, 2], got {q}")));
    }
    let n = system.n();
    if s == 0 || s > n {
        return Err(Error::BadDimensions(format!("section dimension {s} outside 1..={n}")));
    }
    let rho = varrho(a)?;
    let e_p = expectation_norm(&induced_ball(system.clone(), p)?, samples, seed)?;
    let e_q = expectation_norm(&induced_ball(system.clone(), conjugate_exponent(q))?, samples, derive_seed(seed, 1))?;
    Ok(c.value * rho * thm2_factor(e_q.value, e_p.value, n, s))
}

/// Section dimension for the first bound: `r = ⌈2n/3⌉`.
pub fn thm1_section_dim(n: usize) -> usize {
    (2 * n).div_ceil(3)
}

/// Section dimension for the two-exponent bound: `s = ⌈n/2⌉`.
pub fn thm2_section_dim(n: usize) -> usize {
    n.div_ceil(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum Theorem {
    One,
    Two { q: f64 },
}

impl Theorem {
    pub fn label(&self) -> String {
        match self {
            Theorem::One => "thm1".into(),
            Theorem::Two { q } => format!("thm2(q={q})"),
        }
    }
}

/// Knobs for randomized theorem trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    /// Random sections per trial; the trial radius is their minimum.
    pub subspaces: usize,
    /// Restarts per section-radius search.
    pub restarts: usize,
    /// Samples per expectation estimate.
    pub expectation_samples: usize,
    /// Range of the diagonal entries of `A`.
    pub diag_low: f64,
    pub diag_high: f64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            subspaces: 4,
            restarts: 8,
            expectation_samples: 20_000,
            diag_low: 0.5,
            diag_high: 2.0,
        }
    }
}

/// A fixed `(theorem, n, p)` configuration with its expectations.
#[derive(Debug, Clone)]
pub struct TheoremSetting {
    pub theorem: Theorem,
    pub n: usize,
    pub p: f64,
    pub section_dim: usize,
    pub system: Arc<OrthonormalSystem>,
    pub e_p: EstimateWithCI,
    pub e_q_dual: Option<EstimateWithCI>,
    /// Bound divided by `C·ϱ(A)`.
    pub factor: f64,
}

/// The first `n` trigonometric functions.
pub fn trig_system_of_size(n: usize) -> Result<Arc<OrthonormalSystem>> {
    Ok(Arc::new(trig_system(n / 2).truncated(n)?))
}

impl TheoremSetting {
    pub fn new(theorem: Theorem, n: usize, p: f64, opts: &TrialOptions, seed: u64) -> Result<Self> {
        check_theorem_exponent(p)?;
        let system = trig_system_of_size(n)?;
        let e_p = expectation_norm(&induced_ball(system.clone(), p)?, opts.expectation_samples, seed)?;
        let (section_dim, e_q_dual, factor) = match theorem {
            Theorem::One => (thm1_section_dim(n), None, thm1_factor(e_p.value)),
            Theorem::Two { q } => {
                if !(q > 1.0 && q <= 2.0) {
                    return Err(Error::InvalidArgument(format!("q must lie in (1, 2], got {q}")));
                }
                let s = thm2_section_dim(n);
                let e_q = expectation_norm(
                    &induced_ball(system.clone(), conjugate_exponent(q))?,
                    opts.expectation_samples,
                    derive_seed(seed, 1),
                )?;
                (s, Some(e_q), thm2_factor(e_q.value, e_p.value, n, s))
            }
        };
        Ok(Self {
            theorem,
            n,
            p,
            section_dim,
            system,
            e_p,
            e_q_dual,
            factor,
        })
    }

    /// Target gauge `W` of the section radius.
    pub fn target(&self) -> Result<Body> {
        match self.theorem {
            Theorem::One => induced_ball(self.system.clone(), 1.0),
            Theorem::Two { q } => induced_ball(self.system.clone(), q),
        }
    }

    /// One randomized trial: a random diagonal `A` and the smallest section
    /// radius over random subspaces of the theorem's dimension.
    pub fn trial(&self, seed: u64, opts: &TrialOptions) -> Result<TheoremTrial> {
        let mut rng = stream_rng(seed, 0);
        let diag: Vec<f64> = (0..self.n)
            .map(|_| rng.random_range(opts.diag_low..=opts.diag_high))
            .collect();
        let a = Matrix::diag(&diag);
        let rho = varrho(&a)?;
        let v = linear_image(&induced_ball(self.system.clone(), self.p)?, &a)?;
        let w = self.target()?;
        let mut min_radius = f64::INFINITY;
        for i in 0..opts.subspaces.max(1) {
            let l = random_subspace_with(&mut rng, self.n, self.section_dim)?;
            let r = section_radius(&v, &w, &l, opts.restarts, derive_seed(seed, 1 + i as u64))?;
            min_radius = min_radius.min(r);
        }
        Ok(TheoremTrial {
            theorem: self.theorem,
            n: self.n,
            p: self.p,
            seed,
            diag,
            rho,
            factor: self.factor,
            min_radius,
            ratio: min_radius / (rho * self.factor),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremTrial {
    pub theorem: Theorem,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub diag: Vec<f64>,
    pub rho: f64,
    pub factor: f64,
    /// Smallest section radius found over the sampled subspaces.
    pub min_radius: f64,
    /// `min_radius/(ϱ·factor)`: the largest `C` this trial admits.
    pub ratio: f64,
}

impl TheoremTrial {
    pub fn bound(&self, c: &CalibrationConstant) -> f64 {
        c.value * self.rho * self.factor
    }

    /// `min_radius − bound`; negative means a violation.
    pub fn margin(&self, c: &CalibrationConstant) -> f64 {
        self.min_radius - self.bound(c)
    }
}

/// Safety factor applied to the smallest training ratio.
pub const CALIBRATION_SAFETY: f64 = 0.5;

/// `C = CALIBRATION_SAFETY · min ratio` over training trials.
pub fn calibrate(context: &str, trials: &[TheoremTrial]) -> Result<CalibrationConstant> {
    let min = trials.iter().map(|t| t.ratio).fold(f64::INFINITY, f64::min);
    CalibrationConstant::new(context, CALIBRATION_SAFETY * min, trials.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub trials: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

/// Counts trials whose smallest sampled radius falls below the bound.
pub fn validate(c: &CalibrationConstant, trials: &[TheoremTrial]) -> ValidationSummary {
    let margins: Vec<f64> = trials.iter().map(|t| t.margin(c)).collect();
    ValidationSummary {
        trials: trials.len(),
        violations: margins.iter().filter(|m| **m < 0.0).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Grid of a calibrate-then-validate study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub theorems: Vec<Theorem>,
    pub ns: Vec<usize>,
    pub ps: Vec<f64>,
    pub train_seeds: std::ops::Range<u64>,
    pub test_seeds: std::ops::Range<u64>,
    pub options: TrialOptions,
}

/// One constant fitted on the training seeds of every configuration, then
/// frozen and checked on the test seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremStudy {
    pub constant: CalibrationConstant,
    pub training: Vec<TheoremTrial>,
    pub validation: Vec<TheoremTrial>,
    pub summary: ValidationSummary,
}

/// Runs a [`StudyPlan`]; configuration and trial seeds derive from `seed`.
pub fn theorem_study(context: &str, plan: &StudyPlan, seed: u64) -> Result<TheoremStudy> {
    let mut configs = Vec::new();
    for theorem in &plan.theorems {
        for &n in &plan.ns {
            for &p in &plan.ps {
                configs.push((*theorem, n, p));
            }
        }
    }
    let settings: Vec<Result<TheoremSetting>> = map_indexed(configs.len(), Execution::default(), |i| {
        let (theorem, n, p) = configs[i];
        let label = format!("{}-n{n}-p{p}", theorem.label());
        TheoremSetting::new(theorem, n, p, &plan.options, derive_seed(seed, label_hash(&label)))
    });
    let settings = settings.into_iter().collect::<Result<Vec<_>>>()?;
    let run = |seeds: &std::ops::Range<u64>| -> Result<Vec<TheoremTrial>> {
        let jobs: Vec<(usize, u64)> = (0..settings.len())
            .flat_map(|i| seeds.clone().map(move |s| (i, s)))
            .collect();
        map_indexed(jobs.len(), Execution::default(), |j| {
            let (i, s) = jobs[j];
            let base = derive_seed(seed, label_hash(&format!("trial-{}-n{}-p{}", settings[i].theorem.label(), settings[i].n, settings[i].p)));
            settings[i].trial(derive_seed(base, s), &plan.options).map(|mut t| {
                t.seed = s;
                t
            })
        })
        .into_iter()
        .collect()
    };
    let training = run(&plan.train_seeds)?;
    let constant = calibrate(context, &training)?;
    let validation = run(&plan.test_seeds)?;
    let summary = validate(&constant, &validation);
    Ok(TheoremStudy {
        constant,
        training,
        validation,
        summary,
    })
}

/// Least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-log scaling of Sobolev widths over the orders `τ_{N_lo} ..= τ_{N_hi}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevScaling {
    pub manifold: String,
    pub gamma: f64,
    pub expected_slope: f64,
    pub orders: Vec<usize>,
    /// `d_m = λ_{m+1}` of the truncated multiplier ellipsoid.
    pub exact_widths: Vec<f64>,
    /// `ϱ(Λ_m) = λ_m`, the p = q = 2 lower bound with unit constants.
    pub bound_values: Vec<f64>,
    /// `λ(m^{2/d})`.
    pub curve_values: Vec<f64>,
    pub exact_slope: f64,
    pub bound_slope: f64,
    pub curve_slope: f64,
}

/// Fits width scaling for `λ(θ) = θ^{−γ/2}` at every order between `τ_{N_lo}`
/// and `τ_{N_hi}`; the expected slope is `−γ/d`.
pub fn sobolev_width_order(params: &ManifoldParams, gamma: f64, n_lo: usize, n_hi: usize) -> Result<SobolevScaling> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    if n_lo == 0 || n_hi <= n_lo {
        return Err(Error::InvalidArgument(format!("bad range [{n_lo}, {n_hi}]")));
    }
    let spectral = SpectralData::new(*params, n_hi + 1)?;
    let lo = spectral.tau(n_lo).expect("tabulated") as usize;
    let hi = spectral.tau(n_hi).expect("tabulated") as usize;
    let spec = crate::manifolds::sobolev_multiplier(params, gamma)?;
    let lambdas = spec.entries(&spectral, hi + 1)?;
    let d = params.d as f64;
    let orders: Vec<usize> = (lo..=hi).collect();
    let exact_widths: Vec<f64> = orders.iter().map(|&m| lambdas[m]).collect();
    let bound_values: Vec<f64> = orders.iter().map(|&m| lambdas[m - 1]).collect();
    let curve_values: Vec<f64> = orders
        .iter()
        .map(|&m| spec.lambda((m as f64).powf(2.0 / d)).expect("spectral profile"))
        .collect();
    let logs = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    let lx: Vec<f64> = orders.iter().map(|&m| (m as f64).ln()).collect();
    Ok(SobolevScaling {
        manifold: params.name(),
        gamma,
        expected_slope: -gamma / d,
        exact_slope: least_squares_slope(&lx, &logs(&exact_widths)),
        bound_slope: least_squares_slope(&lx, &logs(&bound_values)),
        curve_slope: least_squares_slope(&lx, &logs(&curve_values)),
        orders,
        exact_widths,
        bound_values,
        curve_values,
    })
}

/// Euclidean norm of the residual `x − P_L x`; exposed for oracles.
pub fn euclidean_residual(l: &Subspace, x: &[f64]) -> f64 {
    let p = l.embed(&l.coordinates(x));
    norm2(&x.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldParams;

    fn ellipsoid(axes: &[f64]) -> Body {
        linear_image(&Body::euclidean(axes.len()), &Matrix::diag(axes)).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(ellipsoid_kolmogorov_exact(&[3.0, 2.0, 1.0], 1).unwrap(), 2.0);
        assert_eq!(ellipsoid_kolmogorov_exact(&[3.0, 2.0, 1.0], 3).unwrap(), 0.0);
        assert_eq!(ellipsoid_kolmogorov_exact(&[1.0, 1.0, 1.0], 0).unwrap(), 1.0);
        assert!(matches!(ellipsoid_kolmogorov_exact(&[1.0], 2), Err(Error::BadOrder(_))));
        assert!(ellipsoid_kolmogorov_exact(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn brute_force_matches_exact_on_321() {
        let v = ellipsoid(&[3.0, 2.0, 1.0]);
        let b = Body::euclidean(3);
        for m in 0..=3 {
            let exact = ellipsoid_kolmogorov_exact(&[3.0, 2.0, 1.0], m).unwrap();
            let k = brute_force_kolmogorov(&v, &b, m, 64, 1).unwrap();
            let g = brute_force_gelfand(&v, &b, m, 64, 1).unwrap();
            assert!((k.value - exact).abs() < 1e-3, "m={m}: kolmogorov {}", k.value);
            assert!((g.value - exact).abs() < 1e-3, "m={m}: gelfand {}", g.value);
        }
    }

    #[test]
    fn ball_in_itself() {
        let b = Body::euclidean(2);
        let k = brute_force_kolmogorov(&b, &b, 1, 32, 2).unwrap();
        assert!((k.value - 1.0).abs() < 1e-6);
        assert_eq!(brute_force_gelfand(&b, &b, 2, 32, 2).unwrap().value, 0.0);
    }

    #[test]
    fn duality_examples() {
        let a = Matrix::diag(&[3.0, 2.0, 1.0]);
        assert!(duality_check_with(&a, 1, 64, 0).unwrap().holds);
        assert!(duality_check_with(&Matrix::identity(3), 2, 32, 0).unwrap().holds);
        assert!(duality_check_with(&a, 3, 32, 0).unwrap().holds);
    }

    #[test]
    fn fourier_tail_examples() {
        let lam: Vec<f64> = (1..=4).map(|k| 1.0 / k as f64).collect();
        assert_eq!(fourier_tail_sup(&lam, 1).unwrap(), 0.5);
        assert_eq!(fourier_tail_sup(&lam, 0).unwrap(), 1.0);
        for m in 0..4 {
            let num = fourier_tail_numeric(&lam, m, 3).unwrap();
            assert!((num - lam[m]).abs() < 1e-9, "m={m}: {num}");
        }
        assert!(matches!(fourier_tail_sup(&[1.0, 2.0], 0), Err(Error::NotMonotone(1))));
    }

    #[test]
    fn theorem_bound_examples() {
        let sys = trig_system_of_size(3).unwrap();
        let unit = CalibrationConstant::unit("test");
        let v = thm1_lower_bound(&Matrix::identity(3), &sys, 2.0, &unit, 2000, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let half = thm1_lower_bound(&Matrix::diag(&[1.0, 1.0, 0.5]), &sys, 2.0, &unit, 2000, 1).unwrap();
        assert!((half - 0.5).abs() < 1e-9);
        let p4 = thm1_lower_bound(&Matrix::identity(3), &sys, 4.0, &unit, 20_000, 1).unwrap();
        let lemma3 = crate::stochastic::lemma3_bound(4.0).unwrap();
        assert!(p4 >= lemma3.powf(-1.5) - 1e-2);
        let t2 = thm2_lower_bound(&Matrix::identity(3), &sys, 2.0, 2.0, 3, &unit, 2000, 1).unwrap();
        assert!((t2 - 1.0).abs() < 1e-9);
        assert!(thm1_lower_bound(&Matrix::diag(&[1.0, 0.0, 1.0]), &sys, 2.0, &unit, 2000, 1).is_err());
        assert!(thm2_lower_bound(&Matrix::identity(3), &sys, 2.0, 1.0, 2, &unit, 2000, 1).is_err());
    }

    #[test]
    fn calibration_protocol() {
        let opts = TrialOptions {
            subspaces: 2,
            ..TrialOptions::default()
        };
        let setting = TheoremSetting::new(Theorem::One, 3, 2.0, &opts, 7).unwrap();
        let train: Vec<TheoremTrial> = (0..3).map(|s| setting.trial(s, &opts).unwrap()).collect();
        let c = calibrate("thm1", &train).unwrap();
        let test: Vec<TheoremTrial> = (10..13).map(|s| setting.trial(s, &opts).unwrap()).collect();
        assert_eq!(validate(&c, &train).violations, 0);
        assert!(validate(&c.scaled(10.0), &train).violations > 0);
        assert_eq!(validate(&c, &test).trials, 3);
    }

    #[test]
    fn sobolev_slopes_on_s2() {
        let s2 = ManifoldParams::sphere(2).unwrap();
        for gamma in [1.0, 2.0] {
            let fit = sobolev_width_order(&s2, gamma, 4, 12).unwrap();
            assert!((fit.curve_slope - fit.expected_slope).abs() < 1e-12);
            assert!((fit.exact_slope - fit.expected_slope).abs() < 0.05, "{}", fit.exact_slope);
            assert!((fit.bound_slope - fit.expected_slope).abs() < 0.05, "{}", fit.bound_slope);
        }
        let flat = sobolev_width_order(&s2, 1e-6, 4, 12).unwrap();
        assert!(flat.exact_slope.abs() < 1e-5);
    }

    #[test]
    fn least_squares_slope_of_line() {
        assert!((least_squares_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
