//! Experiment harness: configuration, the verification suite and task
//! runners that turn a config into CSV and JSON reports.

pub mod checks;
pub mod config;
pub mod report;

use serde::Serialize;
use serde_json::json;

pub use checks::{run_check, verify_all, CheckOutcome, TrialRow, VerificationReport, CHECK_NAMES};
pub use config::{BodySpec, Exponent, ExperimentConfig, ManifoldSpec, SystemSpec, Task};
pub use report::{to_csv, RunOutput};

use crate::bodies::Body;
use crate::error::Result;
use crate::linalg::{random_subspace_with, Matrix};
use crate::manifolds::{ManifoldFamily, ManifoldParams};
use crate::parallel::{derive_seed, stream_rng};
use crate::stochastic::{
    expectation_norm, hit_or_miss_volume, lemma3_bound, mc_volume_ratio, section_radius, unit_ball_volume,
    DEFAULT_RESTARTS,
};
use crate::widths::{
    brute_force_gelfand, brute_force_kolmogorov, ellipsoid_kolmogorov_exact, sobolev_width_order, DEFAULT_WIDTH_RESTARTS,
};
use config::required;

/// Default Monte-Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 20_000;
/// Accuracy demanded of brute-force widths against the exact oracle.
pub const WIDTH_TOL: f64 = 1e-3;

/// Runs one configured task.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    match config.task {
        Task::Expect => run_expect(config),
        Task::Volume => run_volume(config),
        Task::Radius => run_radius(config),
        Task::Widths => run_widths(config),
        Task::Verify => run_verify(config),
        Task::Scaling => run_scaling(config),
    }
}

fn output(task: Task, csv: String, summary: serde_json::Value, pass: bool) -> RunOutput {
    RunOutput {
        task,
        csv,
        summary,
        pass,
    }
}

#[derive(Serialize)]
struct ExpectRow {
    system: String,
    n: usize,
    p: Exponent,
    samples: usize,
    seed: u64,
    estimate: f64,
    half_width: f64,
    lemma3_bound: Option<f64>,
    holds: bool,
}

fn run_expect(c: &ExperimentConfig) -> Result<RunOutput> {
    let system = c.system.clone().unwrap_or_default().build()?;
    let p = c.p.unwrap_or(Exponent(2.0));
    let samples = c.samples.unwrap_or(DEFAULT_SAMPLES);
    let est = expectation_norm(&crate::bodies::induced_ball(system.clone(), p.0)?, samples, c.seed)?;
    let bound = lemma3_bound(p.0).ok();
    let holds = bound.is_none_or(|b| est.lower() <= b);
    let row = ExpectRow {
        system: system.name().to_owned(),
        n: system.n(),
        p,
        samples,
        seed: c.seed,
        estimate: est.value,
        half_width: est.half_width,
        lemma3_bound: bound,
        holds,
    };
    let summary = json!({ "task": "expect", "pass": holds, "result": row });
    Ok(output(Task::Expect, to_csv(&[&row])?, summary, holds))
}

#[derive(Serialize)]
struct VolumeRow {
    body: String,
    reference: String,
    route: &'static str,
    samples: usize,
    value: f64,
    half_width: f64,
}

/// Relative agreement required between volume routes in a volume task.
pub const VOLUME_AGREEMENT: f64 = 0.05;

fn run_volume(c: &ExperimentConfig) -> Result<RunOutput> {
    let body = required(&c.body, "body", c.task)?.build()?;
    let n = body.dim();
    let reference = match &c.target {
        Some(t) => t.build()?,
        None => Body::euclidean(n),
    };
    let samples = c.samples.unwrap_or(DEFAULT_SAMPLES);
    let sphere = mc_volume_ratio(&body, &reference, samples, c.seed)?;
    let mut rows = vec![VolumeRow {
        body: body.label(),
        reference: reference.label(),
        route: "sphere_integral",
        samples,
        value: sphere.value,
        half_width: sphere.half_width,
    }];
    let mut pass = true;
    if reference.is_euclidean() {
        let box_samples = 10 * samples;
        let hm = hit_or_miss_volume(&body, box_samples, derive_seed(c.seed, 1))?;
        let ball = unit_ball_volume(n);
        rows.push(VolumeRow {
            body: body.label(),
            reference: reference.label(),
            route: "hit_or_miss",
            samples: box_samples,
            value: hm.value / ball,
            half_width: hm.half_width / ball,
        });
        pass = (sphere.value - hm.value / ball).abs() <= VOLUME_AGREEMENT * hm.value / ball;
    }
    let summary = json!({ "task": "volume", "pass": pass, "routes": rows });
    Ok(output(Task::Volume, to_csv(&rows)?, summary, pass))
}

#[derive(Serialize)]
struct RadiusRow {
    trial: usize,
    section_dim: usize,
    radius: f64,
}

fn run_radius(c: &ExperimentConfig) -> Result<RunOutput> {
    let body = required(&c.body, "body", c.task)?.build()?;
    let n = body.dim();
    let target = match &c.target {
        Some(t) => t.build()?,
        None => Body::euclidean(n),
    };
    let s = c.section_dim.unwrap_or(n);
    let restarts = c.restarts.unwrap_or(DEFAULT_RESTARTS);
    let mut rng = stream_rng(c.seed, 0);
    let mut rows = Vec::new();
    for trial in 0..c.trials.unwrap_or(8) {
        let l = random_subspace_with(&mut rng, n, s)?;
        let radius = section_radius(&body, &target, &l, restarts, derive_seed(c.seed, 1 + trial as u64))?;
        rows.push(RadiusRow {
            trial,
            section_dim: s,
            radius,
        });
    }
    let min = rows.iter().map(|r| r.radius).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.radius).fold(0.0, f64::max);
    let summary = json!({
        "task": "radius",
        "pass": true,
        "body": body.descriptor(),
        "target": target.descriptor(),
        "section_dim": s,
        "trials": rows.len(),
        "min_radius": min,
        "max_radius": max,
    });
    Ok(output(Task::Radius, to_csv(&rows)?, summary, true))
}

#[derive(Serialize)]
struct WidthRow {
    m: usize,
    exact: f64,
    kolmogorov: f64,
    gelfand: f64,
    max_error: f64,
}

fn run_widths(c: &ExperimentConfig) -> Result<RunOutput> {
    let mut axes: Vec<f64> = required(&c.diag, "diag", c.task)?.iter().map(|a| a.abs()).collect();
    axes.sort_by(|a, b| b.total_cmp(a));
    let n = axes.len();
    let v = crate::bodies::linear_image(&Body::euclidean(n), &Matrix::diag(&axes))?;
    let z = Body::euclidean(n);
    let restarts = c.restarts.unwrap_or(DEFAULT_WIDTH_RESTARTS);
    let mut rows = Vec::new();
    for m in 0..=n {
        let exact = ellipsoid_kolmogorov_exact(&axes, m)?;
        let k = brute_force_kolmogorov(&v, &z, m, restarts, derive_seed(c.seed, 2 * m as u64))?.value;
        let g = brute_force_gelfand(&v, &z, m, restarts, derive_seed(c.seed, 2 * m as u64 + 1))?.value;
        rows.push(WidthRow {
            m,
            exact,
            kolmogorov: k,
            gelfand: g,
            max_error: (k - exact).abs().max((g - exact).abs()),
        });
    }
    let pass = rows.iter().all(|r| r.max_error <= WIDTH_TOL);
    let summary = json!({ "task": "widths", "pass": pass, "semiaxes": axes, "tolerance": WIDTH_TOL, "rows": rows });
    Ok(output(Task::Widths, to_csv(&rows)?, summary, pass))
}

/// Runs the named check, or every check for `"all"`.
pub fn verify(check: &str, seed: u64) -> Result<RunOutput> {
    let outcomes = if check == "all" {
        verify_all(seed)
    } else {
        vec![run_check(check, seed)?]
    };
    let rows: Vec<&TrialRow> = outcomes.iter().flat_map(|o| &o.rows).collect();
    let reports: Vec<&VerificationReport> = outcomes.iter().map(|o| &o.report).collect();
    let pass = reports.iter().all(|r| r.pass);
    let summary = json!({ "task": "verify", "seed": seed, "pass": pass, "reports": reports });
    Ok(output(Task::Verify, to_csv(&rows)?, summary, pass))
}

fn run_verify(c: &ExperimentConfig) -> Result<RunOutput> {
    verify(c.check.as_deref().unwrap_or("all"), c.seed)
}

#[derive(Serialize)]
struct ScalingRow {
    m: usize,
    exact_width: f64,
    lower_bound: f64,
    curve: f64,
}

fn run_scaling(c: &ExperimentConfig) -> Result<RunOutput> {
    let params = match &c.manifold {
        Some(m) => m.build()?,
        None => ManifoldParams::new(ManifoldFamily::Sphere, 2)?,
    };
    let gamma = c.gamma.unwrap_or(1.0);
    let [lo, hi] = c.n_range.unwrap_or([4, 12]);
    let fit = sobolev_width_order(&params, gamma, lo, hi)?;
    let rows: Vec<ScalingRow> = (0..fit.orders.len())
        .map(|i| ScalingRow {
            m: fit.orders[i],
            exact_width: fit.exact_widths[i],
            lower_bound: fit.bound_values[i],
            curve: fit.curve_values[i],
        })
        .collect();
    let tol = checks::SLOPE_TOL;
    let pass = (fit.exact_slope - fit.expected_slope).abs() <= tol && (fit.bound_slope - fit.expected_slope).abs() <= tol;
    let summary = json!({
        "task": "scaling",
        "pass": pass,
        "manifold": fit.manifold,
        "gamma": gamma,
        "n_range": [lo, hi],
        "expected_slope": fit.expected_slope,
        "exact_slope": fit.exact_slope,
        "bound_slope": fit.bound_slope,
        "curve_slope": fit.curve_slope,
        "tolerance": tol,
    });
    Ok(output(Task::Scaling, to_csv(&rows)?, summary, pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn parse(s: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(s, "test").unwrap()
    }

    #[test]
    fn expect_task_row() {
        let out = run(&parse(r#"{"task":"expect","seed":1,"system":{"family":"trig","n":3},"p":4}"#)).unwrap();
        assert!(out.pass);
        assert!(out.csv.starts_with("system,n,p,samples,seed,estimate,half_width,lemma3_bound,holds\n"));
    }

    #[test]
    fn widths_task_column() {
        let out = run(&parse(r#"{"task":"widths","seed":1,"diag":[3,2,1],"restarts":64}"#)).unwrap();
        assert!(out.pass, "{}", out.csv);
        let exact: Vec<f64> = out.csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(exact, vec![3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn volume_and_scaling_tasks() {
        let out = run(&parse(r#"{"task":"volume","seed":2,"body":{"kind":"cube","n":2}}"#)).unwrap();
        assert!(out.pass, "{}", out.csv);
        let out = run(&parse(r#"{"task":"scaling","seed":0,"gamma":2}"#)).unwrap();
        assert!(out.pass, "{}", out.summary);
    }

    #[test]
    fn radius_task_on_ellipsoid() {
        let out = run(&parse(r#"{"task":"radius","seed":2,"body":{"kind":"ellipsoid","axes":[2,1,0.5]},"section_dim":3,"trials":2}"#))
            .unwrap();
        assert!((out.summary["min_radius"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn missing_fields_are_config_errors() {
        let err = run(&parse(r#"{"task":"volume","seed":2}"#)).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(verify("nope", 0).is_err());
    }

    #[test]
    fn verify_single_check_is_deterministic() {
        let a = verify("santalo-2d", 7).unwrap();
        let b = verify("santalo-2d", 7).unwrap();
        assert_eq!(a.csv, b.csv);
        assert!(a.pass);
    }
}
