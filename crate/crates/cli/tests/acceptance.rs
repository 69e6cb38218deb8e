//! Acceptance criteria. Runs sequentially so the wall-clock budgets are
//! meaningful; prints one line per criterion and exits nonzero on failure.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use widthlab_core::bodies::{induced_ball, linear_image, Body};
use widthlab_core::linalg::Matrix;
use widthlab_core::manifolds::{eigenvalue, weyl_drift, ManifoldFamily, ManifoldParams};
use widthlab_core::parallel::derive_seed;
use widthlab_core::stochastic::{
    expectation_norm, greedy_net, hit_or_miss_volume, lemma3_bound, mc_volume_ratio, unit_ball_volume,
};
use widthlab_core::widths::{
    brute_force_kolmogorov, duality_check_with, ellipsoid_kolmogorov_exact, sobolev_width_order, theorem_study,
    trig_system_of_size, StudyPlan, Theorem, TrialOptions, DEFAULT_WIDTH_RESTARTS,
};

const VOLUME_ROUTE_TOL: f64 = 0.05;
const LEMMA3_EQUALITY_TOL: f64 = 1e-6;
const EQUALITY_FLOOR: f64 = 1e-9;
const WIDTH_TOL: f64 = 1e-3;
const SLOPE_TOL: f64 = 0.05;
const WEYL_DRIFT_LIMIT: f64 = 0.20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion(id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed <= b);
    let pass = out.pass && in_budget;
    let budget_note = match budget {
        Some(b) => format!(" [{:.1}s of {}s]", elapsed.as_secs_f64(), b.as_secs()),
        None => format!(" [{:.1}s]", elapsed.as_secs_f64()),
    };
    println!(
        "criterion {id:>2} {} {name}: {}{budget_note}",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn volume_identity() -> Outcome {
    let cases = [
        ("Binf^2", Body::cube(2), 4.0 / PI),
        ("diag(2,1)B2^2", linear_image(&Body::euclidean(2), &Matrix::diag(&[2.0, 1.0])).unwrap(), 2.0),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (i, (name, body, target)) in cases.iter().enumerate() {
        let sphere = mc_volume_ratio(body, &Body::euclidean(2), 50_000, 100 + i as u64).unwrap().value;
        let boxed = hit_or_miss_volume(body, 400_000, 200 + i as u64).unwrap().value / unit_ball_volume(2);
        let routes = (sphere - boxed).abs() / boxed;
        let analytic = (sphere - target).abs() / target;
        pass &= routes <= VOLUME_ROUTE_TOL && analytic <= VOLUME_ROUTE_TOL;
        notes.push(format!("{name} sphere={sphere:.4} box={boxed:.4} target={target:.4}"));
    }
    outcome(pass, notes.join("; "))
}

fn expectation_bound() -> Outcome {
    let mut violations = 0;
    let mut worst_eq: f64 = 0.0;
    for n in [3usize, 5, 9] {
        let system = trig_system_of_size(n).unwrap();
        for p in [2.0, 4.0, 8.0] {
            let e = expectation_norm(&induced_ball(system.clone(), p).unwrap(), 20_000, derive_seed(n as u64, p.to_bits()))
                .unwrap();
            let bound = lemma3_bound(p).unwrap();
            if e.value > bound + e.half_width {
                violations += 1;
            }
            if p == 2.0 {
                let gap = (e.value - 1.0).abs().max((bound - 1.0).abs());
                worst_eq = worst_eq.max(gap);
                if gap > LEMMA3_EQUALITY_TOL + e.half_width {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("violations={violations}, |E-1| at p=2 <= {worst_eq:.2e}"))
}

fn santalo() -> Outcome {
    let exact_ok = 4.0 * 2.0 <= PI * PI;
    let system = trig_system_of_size(3).unwrap();
    let mut violations = 0;
    let mut max_product: f64 = 0.0;
    for p in [1.5, 2.0, 4.0] {
        let v = induced_ball(system.clone(), p).unwrap();
        let polar = Body::induced_polar(system.clone(), p).unwrap();
        for seed in 0..20u64 {
            let a = mc_volume_ratio(&v, &Body::euclidean(3), 8000, derive_seed(seed, 1)).unwrap();
            let b = mc_volume_ratio(&polar, &Body::euclidean(3), 4000, derive_seed(seed, 2)).unwrap();
            let product = a.value * b.value;
            let slack = a.value * b.half_width + b.value * a.half_width + EQUALITY_FLOOR;
            max_product = max_product.max(product);
            if product - slack > 1.0 {
                violations += 1;
            }
        }
    }
    outcome(
        exact_ok && violations == 0,
        format!("exact 8 <= pi^2: {exact_ok}; MC violations={violations}/60, max product={max_product:.4}"),
    )
}

fn urysohn() -> Outcome {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for n in [3usize, 5, 9] {
        let system = trig_system_of_size(n).unwrap();
        for p in [2.0, 4.0, 8.0] {
            let v = induced_ball(system.clone(), p).unwrap();
            let seed = derive_seed(n as u64, p.to_bits());
            let ratio = mc_volume_ratio(&v, &Body::euclidean(n), 20_000, seed).unwrap();
            let e = expectation_norm(&v, 20_000, seed).unwrap();
            let ni = n as i32;
            let bound = e.value.powi(-ni);
            let bound_hw = n as f64 * e.value.powi(-ni - 1) * e.half_width;
            worst = worst.min(ratio.value - bound);
            if ratio.upper() + EQUALITY_FLOOR < bound - bound_hw {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("violations={violations}/9, worst ratio-bound={worst:.3e}"))
}

fn net_chain() -> Outcome {
    let reference = Body::euclidean(2);
    let mut violations = 0;
    let mut runs = 0;
    for body in [Body::euclidean(2), Body::cube(2)] {
        for delta in [0.25, 0.5, 1.0] {
            for seed in 0..20u64 {
                let r = greedy_net(&body, &reference, delta, derive_seed(seed, delta.to_bits())).unwrap();
                runs += 1;
                if !r.chain_holds() {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("violations={violations}/{runs}"))
}

fn widths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut duality_failures = 0;
    let mut cases = 0;
    for n in [3usize, 4] {
        for trial in 0..10u64 {
            let diag: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..=2.0)).collect();
            let a = Matrix::diag(&diag);
            let mut axes = diag.clone();
            axes.sort_by(|x, y| y.total_cmp(x));
            for m in 0..=n {
                let exact = ellipsoid_kolmogorov_exact(&axes, m).unwrap();
                let seed = derive_seed(trial, (n * 16 + m) as u64);
                // For diagonal A the adjoint body is the same ellipsoid, so
                // the duality run yields both widths.
                let d = duality_check_with(&a, m, DEFAULT_WIDTH_RESTARTS, seed).unwrap();
                worst = worst.max((d.kolmogorov - exact).abs()).max((d.gelfand_adjoint - exact).abs());
                if !d.holds {
                    duality_failures += 1;
                }
                cases += 1;
            }
        }
    }
    // One direct Kolmogorov run on a non-diagonal matrix guards the
    // diagonal shortcut above.
    let a = Matrix::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.0, 1.0, 0.3], vec![0.0, 0.0, 0.5]]).unwrap();
    let sv = a.singular_values();
    let k = brute_force_kolmogorov(&linear_image(&Body::euclidean(3), &a).unwrap(), &Body::euclidean(3), 1, DEFAULT_WIDTH_RESTARTS, 1)
        .unwrap()
        .value;
    let general = (k - sv[1]).abs();
    outcome(
        worst <= WIDTH_TOL && duality_failures == 0 && general <= WIDTH_TOL,
        format!("20 matrices, {cases} (A,m) cases, max |error|={worst:.2e}, duality failures={duality_failures}, non-diagonal error={general:.2e}"),
    )
}

fn section_radius_bounds() -> Outcome {
    let options = TrialOptions::default();
    let plan = |theorems: Vec<Theorem>| StudyPlan {
        theorems,
        ns: vec![3, 4, 5, 6],
        ps: vec![2.0, 4.0],
        train_seeds: 0..10,
        test_seeds: 10..60,
        options,
    };
    let one = theorem_study("thm1", &plan(vec![Theorem::One]), 1).unwrap();
    let two = theorem_study("thm2", &plan([1.25, 1.5, 2.0].map(|q| Theorem::Two { q }).to_vec()), 2).unwrap();
    let inflated_one = widthlab_core::widths::validate(&one.constant.scaled(10.0), &one.validation);
    let pass = one.summary.violations == 0 && two.summary.violations == 0 && inflated_one.violations > 0;
    outcome(
        pass,
        format!(
            "thm1 C={:.4} violations={}/{}; thm2 C={:.4} violations={}/{}; 10x C gives {} violations",
            one.constant.value,
            one.summary.violations,
            one.summary.trials,
            two.constant.value,
            two.summary.violations,
            two.summary.trials,
            inflated_one.violations
        ),
    )
}

fn sobolev() -> Outcome {
    let s2 = ManifoldParams::sphere(2).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for gamma in [1.0, 2.0] {
        let fit = sobolev_width_order(&s2, gamma, 4, 12).unwrap();
        pass &= (fit.exact_slope - fit.expected_slope).abs() <= SLOPE_TOL;
        pass &= (fit.bound_slope - fit.expected_slope).abs() <= SLOPE_TOL;
        notes.push(format!(
            "gamma={gamma}: expected {:.3}, widths {:.3}, bound {:.3}",
            fit.expected_slope, fit.exact_slope, fit.bound_slope
        ));
    }
    outcome(pass, notes.join("; "))
}

fn spectral_counting() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for family in ManifoldFamily::ALL {
        let params = ManifoldParams::new(family, family.default_dim()).unwrap();
        let drift = weyl_drift(&params, 20, 60).unwrap();
        let theta_ok = (10..=200usize).all(|n| eigenvalue(&params, n + 1) / eigenvalue(&params, n) - 1.0 <= 3.0 / n as f64);
        pass &= drift < WEYL_DRIFT_LIMIT && theta_ok;
        notes.push(format!("{params} drift={drift:.3}{}", if theta_ok { "" } else { " theta-ratio FAIL" }));
    }
    outcome(pass, notes.join(", "))
}

fn run_verify(out: &Path, threads: &str) -> (std::process::Output, Vec<u8>, Vec<u8>) {
    let output = Command::new(env!("CARGO_BIN_EXE_widthlab"))
        .args(["verify", "--all", "--seed", "7", "--out"])
        .arg(out)
        .env("WIDTHLAB_THREADS", threads)
        .output()
        .expect("binary runs");
    let csv = std::fs::read(out.join("verify.csv")).unwrap_or_default();
    let json = std::fs::read(out.join("verify.json")).unwrap_or_default();
    (output, csv, json)
}

fn determinism() -> Outcome {
    let base = std::env::temp_dir().join(format!("widthlab-acceptance-{}", std::process::id()));
    let (a, b) = (base.join("first"), base.join("second"));
    let (out_a, csv_a, json_a) = run_verify(&a, "1");
    let (out_b, csv_b, json_b) = run_verify(&b, "2");
    let _ = std::fs::remove_dir_all(&base);
    let same = !csv_a.is_empty() && csv_a == csv_b && json_a == json_b && out_a.stdout == out_b.stdout;
    outcome(
        same && out_a.status.code() == out_b.status.code(),
        format!(
            "csv {} bytes, json {} bytes, identical={same}, exit codes {:?}/{:?}",
            csv_a.len(),
            json_a.len(),
            out_a.status.code(),
            out_b.status.code()
        ),
    )
}

fn main() {
    let results = [
        criterion(1, "volume identity", secs(30), volume_identity),
        criterion(2, "expectation bound", secs(60), expectation_bound),
        criterion(3, "volume product", None, santalo),
        criterion(4, "volume vs expectation", None, urysohn),
        criterion(5, "net chain", secs(60), net_chain),
        criterion(6, "width oracles", secs(180), widths),
        criterion(7, "section-radius lower bounds", secs(300), section_radius_bounds),
        criterion(8, "Sobolev scaling", secs(60), sobolev),
        criterion(9, "spectral counting", None, spectral_counting),
        criterion(10, "determinism", None, determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
