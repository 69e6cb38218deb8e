//! The verification suite: one randomized check per inequality.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::bodies::{induced_ball, linear_image, Body, MultiplierSpec};
use crate::error::{Error, Result};
use crate::linalg::{random_subspace_with, varrho, Matrix};
use crate::manifolds::{eigenvalue, weyl_drift, weyl_ratio, ManifoldFamily, ManifoldParams, SpectralData};
use crate::ortho::conjugate_exponent;
use crate::parallel::{derive_seed, label_hash, map_indexed, stream_rng, Execution};
use crate::stochastic::{
    affine_section_volume, brunn_section_check, expectation_norm, greedy_net, hit_or_miss_volume, lemma3_bound,
    mc_volume_ratio, projection_volume_ratio, unit_ball_volume,
};
use crate::widths::{
    duality_check_with, fourier_tail_numeric, fourier_tail_sup, sobolev_width_order, theorem_study, trig_system_of_size,
    StudyPlan, Theorem, TrialOptions,
};

/// Slack for checks whose two sides coincide exactly in theory.
pub const EQUALITY_FLOOR: f64 = 1e-9;

/// Names of the checks run by [`verify_all`], in report order.
pub const CHECK_NAMES: [&str; 15] = [
    "mmm-chain",
    "lemma1-projection",
    "lemma2a",
    "lemma2b",
    "eq111",
    "eq333-urysohn",
    "santalo",
    "brunn-sections",
    "lemma3-expectation",
    "thm1-radius",
    "thm2-radius",
    "duality",
    "fourier-tail",
    "weyl-ratio",
    "sobolev-slope",
];

/// Checks available individually but not part of [`verify_all`].
pub const EXTRA_CHECKS: [&str; 1] = ["santalo-2d"];

/// What each check asserts.
pub fn anchor(check: &str) -> Option<&'static str> {
    Some(match check {
        "mmm-chain" => "packing and covering numbers: m(2δ) ≤ n(δ) ≤ m(δ)",
        "lemma1-projection" => "projections of A·B₂ⁿ: Vol_s ≤ 3ⁿ·ϱ^(s−n)·det A·Vol_s(B₂ˢ)",
        "lemma2a" => "projections of B_(J,p), 1 < p ≤ 2: Vol_s ≤ (5/2)ⁿ·E[‖·‖_(J,p′)]ⁿ·Vol_s(B₂ˢ)",
        "lemma2b" => "projections of B_(J,1): Vol_s ≤ Cⁿ·Vol_s(B₂ˢ)",
        "eq111" => "Vol(V)/Vol(B₂ⁿ) = ∫ ‖u‖_V^(−n) dμ(u)",
        "eq333-urysohn" => "Vol(V)/Vol(B₂ⁿ) ≥ E[‖·‖_V]^(−n)",
        "santalo" | "santalo-2d" => "volume product: Vol(V)·Vol(Vᵒ) ≤ Vol(B₂ⁿ)²",
        "brunn-sections" => "parallel sections: Vol_s(V ∩ (z+L)) ≤ Vol_s(V ∩ L)",
        "lemma3-expectation" => "E[‖·‖_(J,p)] ≤ 2^(1/2)·π^(−1/2p)·Γ((p+1)/2)^(1/p) for 2 ≤ p < ∞",
        "thm1-radius" => "sections of dimension ⌈2n/3⌉: rad(A·B_(J,p) ∩ L | B_(J,1)) ≥ C·ϱ·E_p^(−3/2)",
        "thm2-radius" => "sections of dimension ⌈n/2⌉: rad(A·B_(J,p) ∩ L | B_(J,q)) ≥ C·ϱ·(E_q′·E_p)^(−n/s)",
        "duality" => "Kolmogorov width of A equals Gelfand width of Aᵀ",
        "fourier-tail" => "sup ‖Λα − S_mΛα‖₂ = |λ_(m+1)| for nonincreasing |λ|",
        "weyl-ratio" => "eigenvalue counting: τ_N ≍ θ_N^(d/2)",
        "sobolev-slope" => "Sobolev widths decay like m^(−γ/d)",
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub anchor: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest slack over trials; negative slack is a violation.
    pub worst_margin: f64,
    pub pass: bool,
}

/// One trial of a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub check: String,
    pub trial: usize,
    pub case: String,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub report: VerificationReport,
    pub rows: Vec<TrialRow>,
}

struct Tally {
    check: &'static str,
    rows: Vec<TrialRow>,
}

impl Tally {
    fn new(check: &'static str) -> Self {
        Self { check, rows: Vec::new() }
    }

    fn record(&mut self, case: impl Into<String>, value: f64, bound: f64, margin: f64, ok: bool) {
        self.rows.push(TrialRow {
            check: self.check.to_owned(),
            trial: self.rows.len(),
            case: case.into(),
            value,
            bound,
            margin,
            ok,
        });
    }

    fn finish(self) -> CheckOutcome {
        let violations = self.rows.iter().filter(|r| !r.ok).count();
        let worst_margin = self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        CheckOutcome {
            report: VerificationReport {
                check: self.check.to_owned(),
                anchor: anchor(self.check).unwrap_or_default().to_owned(),
                trials: self.rows.len(),
                violations,
                worst_margin,
                pass: violations == 0 && !self.rows.is_empty(),
            },
            rows: self.rows,
        }
    }
}

/// Seed of `check` under the master seed.
pub fn check_seed(seed: u64, check: &str) -> u64 {
    derive_seed(seed, label_hash(check))
}

/// Runs one named check. Errors inside a check are reported as a failed
/// trial, never thrown; only an unknown name is an error.
pub fn run_check(name: &str, seed: u64) -> Result<CheckOutcome> {
    let check: &'static str = CHECK_NAMES
        .iter()
        .chain(EXTRA_CHECKS.iter())
        .find(|c| **c == name)
        .ok_or_else(|| Error::Config(format!("unknown check `{name}`")))?;
    let s = check_seed(seed, check);
    let mut tally = Tally::new(check);
    let result = match check {
        "mmm-chain" => mmm_chain(&mut tally, s),
        "lemma1-projection" => lemma1_projection(&mut tally, s),
        "lemma2a" => lemma2a(&mut tally, s),
        "lemma2b" => lemma2b(&mut tally, s),
        "eq111" => eq111(&mut tally, s),
        "eq333-urysohn" => eq333(&mut tally, s),
        "santalo" => santalo(&mut tally, s, true),
        "santalo-2d" => santalo(&mut tally, s, false),
        "brunn-sections" => brunn(&mut tally, s),
        "lemma3-expectation" => lemma3(&mut tally, s),
        "thm1-radius" => theorem_radius(&mut tally, s, &[Theorem::One], 1.0),
        "thm2-radius" => theorem_radius(&mut tally, s, &thm2_variants(), 1.0),
        "duality" => duality(&mut tally, s),
        "fourier-tail" => fourier_tail(&mut tally, s),
        "weyl-ratio" => weyl(&mut tally),
        "sobolev-slope" => sobolev(&mut tally),
        _ => unreachable!("names are filtered above"),
    };
    if let Err(e) = result {
        tally.record(format!("error: {e}"), f64::NAN, f64::NAN, f64::NEG_INFINITY, false);
    }
    Ok(tally.finish())
}

/// Runs all checks concurrently; reports come back in [`CHECK_NAMES`]
/// order.
pub fn verify_all(seed: u64) -> Vec<CheckOutcome> {
    map_indexed(CHECK_NAMES.len(), Execution::default(), |i| {
        run_check(CHECK_NAMES[i], seed).expect("known check")
    })
}

/// The thm1/thm2 radius check with the calibrated constant multiplied by
/// `inflation`; an inflated constant must produce violations.
pub fn theorem_radius_check(theorem_two: bool, seed: u64, inflation: f64) -> Result<CheckOutcome> {
    let (check, theorems) = if theorem_two {
        ("thm2-radius", thm2_variants())
    } else {
        ("thm1-radius", vec![Theorem::One])
    };
    let mut tally = Tally::new(check);
    theorem_radius(&mut tally, check_seed(seed, check), &theorems, inflation)?;
    Ok(tally.finish())
}

fn thm2_variants() -> Vec<Theorem> {
    [1.25, 1.5, 2.0].map(|q| Theorem::Two { q }).to_vec()
}

fn random_diag<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.5..=2.0)).collect()
}

fn mmm_chain(t: &mut Tally, seed: u64) -> Result<()> {
    let bodies = [("B2^2", Body::euclidean(2)), ("Binf^2", Body::cube(2))];
    let reference = Body::euclidean(2);
    for (name, body) in &bodies {
        for delta in [0.25, 0.5, 1.0] {
            for s in 0..4u64 {
                let r = greedy_net(body, &reference, delta, derive_seed(seed, label_hash(name) ^ s ^ delta.to_bits()))?;
                let (m2, n, m1) = (r.packing_points_2delta.len(), r.net_points.len(), r.packing_points.len());
                let margin = (n as f64 - m2 as f64).min(m1 as f64 - n as f64);
                t.record(format!("{name} delta={delta} seed={s} m2d={m2} n={n} md={m1}"), n as f64, m1 as f64, margin, r.chain_holds());
            }
        }
    }
    Ok(())
}

fn lemma1_projection(t: &mut Tally, seed: u64) -> Result<()> {
    let mut rng = stream_rng(seed, 0);
    for n in [3usize, 4] {
        for trial in 0..3 {
            let a = Matrix::diag(&random_diag(&mut rng, n));
            let s = rng.random_range(1..n);
            let l = random_subspace_with(&mut rng, n, s)?;
            let v = linear_image(&Body::euclidean(n), &a)?;
            let est = projection_volume_ratio(&v, &l, &Body::euclidean(s), 20_000, derive_seed(seed, 100 + trial as u64 + 10 * n as u64))?;
            let bound = 3f64.powi(n as i32) * varrho(&a)?.powi(s as i32 - n as i32) * a.determinant()?.abs();
            t.record(format!("n={n} s={s}"), est.value, bound, (bound - est.value) / bound, est.lower() <= bound);
        }
    }
    Ok(())
}

fn lemma2a(t: &mut Tally, seed: u64) -> Result<()> {
    let n = 3;
    let system = trig_system_of_size(n)?;
    let mut rng = stream_rng(seed, 0);
    for p in [1.5, 2.0] {
        let e = expectation_norm(&induced_ball(system.clone(), conjugate_exponent(p))?, 20_000, derive_seed(seed, p.to_bits()))?;
        let v = induced_ball(system.clone(), p)?;
        for trial in 0..3u64 {
            let s = rng.random_range(1..n);
            let l = random_subspace_with(&mut rng, n, s)?;
            let est = projection_volume_ratio(&v, &l, &Body::euclidean(s), 2000, derive_seed(seed, trial ^ p.to_bits().rotate_left(7)))?;
            let root = est.value.powf(1.0 / n as f64);
            let bound = 2.5 * e.value;
            let ok = est.lower().max(0.0).powf(1.0 / n as f64) <= 2.5 * e.upper();
            t.record(format!("p={p} s={s}"), root, bound, bound - root, ok);
        }
    }
    Ok(())
}

/// Value of the constant in the `B_(J,1)` projection bound.
pub const LEMMA2B_CONSTANT: f64 = 8.0;

fn lemma2b(t: &mut Tally, seed: u64) -> Result<()> {
    let mut rng = stream_rng(seed, 0);
    for n in [3usize, 5] {
        let v = induced_ball(trig_system_of_size(n)?, 1.0)?;
        for trial in 0..2u64 {
            let s = n.div_ceil(2);
            let l = random_subspace_with(&mut rng, n, s)?;
            let est = projection_volume_ratio(&v, &l, &Body::euclidean(s), 1500, derive_seed(seed, trial + 10 * n as u64))?;
            let root = est.value.powf(1.0 / n as f64);
            let ok = est.lower().max(0.0).powf(1.0 / n as f64) <= LEMMA2B_CONSTANT;
            t.record(format!("n={n} s={s}"), root, LEMMA2B_CONSTANT, LEMMA2B_CONSTANT - root, ok);
        }
    }
    Ok(())
}

/// Relative agreement required between the two volume routes.
pub const VOLUME_ROUTE_TOL: f64 = 0.05;

fn eq111(t: &mut Tally, seed: u64) -> Result<()> {
    let cases = [
        ("Binf^2", Body::cube(2), 4.0 / PI),
        ("diag(2,1)B2^2", linear_image(&Body::euclidean(2), &Matrix::diag(&[2.0, 1.0]))?, 2.0),
    ];
    for (i, (name, body, target)) in cases.iter().enumerate() {
        let sphere = mc_volume_ratio(body, &Body::euclidean(2), 20_000, derive_seed(seed, i as u64))?;
        let box_route = hit_or_miss_volume(body, 200_000, derive_seed(seed, 10 + i as u64))?.value / unit_ball_volume(2);
        let diff = (sphere.value - box_route).abs() / box_route;
        t.record(format!("{name} routes"), sphere.value, box_route, VOLUME_ROUTE_TOL - diff, diff <= VOLUME_ROUTE_TOL);
        let diff = (sphere.value - target).abs() / target;
        t.record(format!("{name} analytic"), sphere.value, *target, VOLUME_ROUTE_TOL - diff, diff <= VOLUME_ROUTE_TOL);
    }
    Ok(())
}

fn eq333(t: &mut Tally, seed: u64) -> Result<()> {
    for n in [3usize, 5] {
        let system = trig_system_of_size(n)?;
        for p in [2.0, 4.0, 8.0] {
            let v = induced_ball(system.clone(), p)?;
            let s = derive_seed(seed, n as u64 ^ p.to_bits());
            let ratio = mc_volume_ratio(&v, &Body::euclidean(n), 20_000, s)?;
            let e = expectation_norm(&v, 20_000, s)?;
            let ni = n as i32;
            let bound = e.value.powi(-ni);
            let bound_hw = n as f64 * e.value.powi(-ni - 1) * e.half_width;
            let ok = ratio.upper() + EQUALITY_FLOOR >= bound - bound_hw;
            t.record(format!("n={n} p={p}"), ratio.value, bound, ratio.value - bound, ok);
        }
    }
    Ok(())
}

fn santalo(t: &mut Tally, seed: u64, monte_carlo: bool) -> Result<()> {
    // Exact planar case: square and diamond.
    let product = 4.0 * 2.0;
    let ball = PI * PI;
    t.record("Binf^2 x B1^2 exact", product, ball, ball - product, product <= ball);
    if !monte_carlo {
        return Ok(());
    }
    let n = 3;
    let system = trig_system_of_size(n)?;
    for p in [1.5f64, 2.0, 4.0] {
        for s in 0..2u64 {
            let base = derive_seed(seed, p.to_bits() ^ s);
            let v = mc_volume_ratio(&induced_ball(system.clone(), p)?, &Body::euclidean(n), 8000, base)?;
            let polar = mc_volume_ratio(&Body::induced_polar(system.clone(), p)?, &Body::euclidean(n), 4000, derive_seed(base, 1))?;
            let product = v.value * polar.value;
            let slack = v.value * polar.half_width + polar.value * v.half_width + EQUALITY_FLOOR;
            t.record(format!("trig n=3 p={p} seed={s}"), product, 1.0, 1.0 - product, product - slack <= 1.0);
        }
    }
    Ok(())
}

fn brunn(t: &mut Tally, seed: u64) -> Result<()> {
    let bodies = [
        ("B(J,4) n=3", induced_ball(trig_system_of_size(3)?, 4.0)?),
        ("diag(2,1,0.5)B2^3", linear_image(&Body::euclidean(3), &Matrix::diag(&[2.0, 1.0, 0.5]))?),
    ];
    let mut rng = stream_rng(seed, 0);
    for (name, v) in &bodies {
        for trial in 0..2u64 {
            let l = random_subspace_with(&mut rng, 3, 2)?;
            let normal = l.complement().expect("proper subspace").frame()[0].clone();
            let offsets: Vec<Vec<f64>> = [0.2, 0.4].iter().map(|c| normal.iter().map(|x| c * x).collect()).collect();
            let s = derive_seed(seed, label_hash(name) ^ trial);
            let ok = brunn_section_check(v, &l, &offsets, 20_000, s)?;
            let central = affine_section_volume(v, &l, &[0.0; 3], 20_000, s)?.value;
            let largest = offsets
                .iter()
                .map(|z| affine_section_volume(v, &l, z, 20_000, s).map(|e| e.value))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            t.record(format!("{name} trial={trial}"), largest, central, central - largest, ok);
        }
    }
    Ok(())
}

fn lemma3(t: &mut Tally, seed: u64) -> Result<()> {
    for n in [3usize, 5, 9] {
        let system = trig_system_of_size(n)?;
        for p in [2.0, 4.0, 8.0] {
            let e = expectation_norm(&induced_ball(system.clone(), p)?, 20_000, derive_seed(seed, n as u64 ^ p.to_bits()))?;
            let bound = lemma3_bound(p)?;
            t.record(format!("n={n} p={p}"), e.value, bound, bound - e.value, e.lower() <= bound + EQUALITY_FLOOR);
        }
    }
    Ok(())
}

fn theorem_radius(t: &mut Tally, seed: u64, theorems: &[Theorem], inflation: f64) -> Result<()> {
    let plan = StudyPlan {
        theorems: theorems.to_vec(),
        ns: vec![3, 4],
        ps: vec![2.0, 4.0],
        train_seeds: 0..5,
        test_seeds: 5..10,
        options: TrialOptions {
            subspaces: 3,
            expectation_samples: 10_000,
            ..TrialOptions::default()
        },
    };
    let study = theorem_study(t.check, &plan, seed)?;
    let c = study.constant.scaled(inflation);
    for trial in &study.validation {
        let bound = trial.bound(&c);
        t.record(
            format!("{} n={} p={} seed={} C={:.6}", trial.theorem.label(), trial.n, trial.p, trial.seed, c.value),
            trial.min_radius,
            bound,
            trial.margin(&c),
            trial.margin(&c) >= 0.0,
        );
    }
    Ok(())
}

fn duality(t: &mut Tally, seed: u64) -> Result<()> {
    let mut rng = stream_rng(seed, 0);
    for trial in 0..3u64 {
        let mut d = random_diag(&mut rng, 3);
        d.sort_by(|a, b| b.total_cmp(a));
        let a = Matrix::diag(&d);
        for m in 1..3 {
            let out = duality_check_with(&a, m, 64, derive_seed(seed, trial * 8 + m as u64))?;
            let gap = (out.kolmogorov - out.gelfand_adjoint).abs();
            t.record(
                format!("diag({:.3},{:.3},{:.3}) m={m}", d[0], d[1], d[2]),
                out.kolmogorov,
                out.gelfand_adjoint,
                crate::widths::DUALITY_TOL - gap,
                out.holds,
            );
        }
    }
    Ok(())
}

fn fourier_tail(t: &mut Tally, seed: u64) -> Result<()> {
    let spectral = SpectralData::new(ManifoldParams::sphere(2)?, 6)?;
    let profiles = [("sobolev gamma=1", MultiplierSpec::power(1.0)), ("sobolev gamma=2", MultiplierSpec::power(2.0))];
    for (name, spec) in &profiles {
        let lambdas = spec.entries(&spectral, 12)?;
        for m in 0..lambdas.len() {
            let exact = fourier_tail_sup(&lambdas, m)?;
            let numeric = fourier_tail_numeric(&lambdas, m, derive_seed(seed, m as u64))?;
            let ok = (numeric - lambdas[m]).abs() <= 1e-6 * lambdas[m];
            let margin = 0.0 - (exact - lambdas[m].abs()).abs();
            t.record(format!("{name} m={m}"), exact, lambdas[m].abs(), margin, ok);
        }
    }
    Ok(())
}

/// `N·|w(N+1)/w(N) − 1|` must stay below this over the window.
pub const WEYL_STEP_LIMIT: f64 = 3.0;

fn weyl(t: &mut Tally) -> Result<()> {
    for family in ManifoldFamily::ALL {
        let params = ManifoldParams::new(family, family.default_dim())?;
        let ratios = (20..=61).map(|n| weyl_ratio(&params, n)).collect::<Result<Vec<_>>>()?;
        let step = ratios
            .windows(2)
            .enumerate()
            .map(|(i, w)| (20 + i) as f64 * (w[1] / w[0] - 1.0).abs())
            .fold(0.0, f64::max);
        t.record(format!("{params} ratio steps"), step, WEYL_STEP_LIMIT, WEYL_STEP_LIMIT - step, step <= WEYL_STEP_LIMIT);
        let early = weyl_drift(&params, 20, 60)?;
        let late = weyl_drift(&params, 60, 120)?;
        t.record(format!("{params} drift shrinks"), late, early, early - late, late < early);
        let theta = (10..=60usize)
            .map(|n| (n as f64) * (eigenvalue(&params, n + 1) / eigenvalue(&params, n) - 1.0))
            .fold(0.0, f64::max);
        t.record(format!("{params} theta steps"), theta, 3.0, 3.0 - theta, theta <= 3.0);
    }
    Ok(())
}

/// Allowed deviation of fitted log-log slopes.
pub const SLOPE_TOL: f64 = 0.05;

fn sobolev(t: &mut Tally) -> Result<()> {
    let s2 = ManifoldParams::sphere(2)?;
    for gamma in [1.0, 2.0] {
        let fit = sobolev_width_order(&s2, gamma, 4, 12)?;
        for (what, slope) in [("exact", fit.exact_slope), ("bound", fit.bound_slope)] {
            let dev = (slope - fit.expected_slope).abs();
            t.record(format!("S^2 gamma={gamma} {what}"), slope, fit.expected_slope, SLOPE_TOL - dev, dev <= SLOPE_TOL);
        }
    }
    Ok(())
}
