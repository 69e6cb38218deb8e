//! Derivative-free local optimization.

use crate::linalg::{axpy, dot, normalized, scale, unit_vector};

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter below this.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Number of restarts from the best vertex after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            x_tol: 1e-9,
            max_evals: 4000,
            initial_step: 0.1,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `f` from `x0` with the Nelder–Mead simplex method (standard
/// coefficients), restarting a fresh simplex at the best point `restarts`
/// times.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = Minimum {
        x: x0.to_vec(),
        value: f(x0),
        evals: 1,
    };
    if x0.is_empty() {
        return best;
    }
    let mut step = opts.initial_step;
    for _ in 0..=opts.restarts {
        let run = nelder_mead_once(&f, &best.x, step, opts);
        let improved = run.value < best.value - opts.f_tol;
        best.evals += run.evals;
        if run.value <= best.value {
            best.x = run.x;
            best.value = run.value;
        }
        if !improved {
            break;
        }
        step *= 0.5;
    }
    best
}

fn nelder_mead_once<F>(f: &F, x0: &[f64], step: f64, opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();
    let mut evals = dim + 1;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[dim] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && diameter <= opts.x_tol {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for v in &simplex[..dim] {
            axpy(1.0 / dim as f64, v, &mut centroid);
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = sanitize(f(&reflected));
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = sanitize(f(&expanded));
            evals += 1;
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let (contracted, fc) = if fr < values[dim] {
                let c = along(-0.5);
                let fc = sanitize(f(&c));
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = sanitize(f(&c));
                (c, fc)
            };
            evals += 1;
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=dim {
                    simplex[i] = simplex[i]
                        .iter()
                        .zip(&best)
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    values[i] = sanitize(f(&simplex[i]));
                }
                evals += dim;
            }
        }
    }
    let (i, &value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty simplex");
    Minimum {
        x: simplex[i].clone(),
        value,
        evals,
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Orthonormal basis of the tangent space of the unit sphere at `u`.
pub fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let mut w = unit_vector(n, k);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        if let Some(q) = normalized(&w) {
            if crate::linalg::norm2(&w) > 1e-6 {
                basis.push(q.clone());
                out.push(q);
            }
        }
        if out.len() + 1 == n {
            break;
        }
    }
    out
}

/// Maximizes a 0-homogeneous function on the unit sphere of ℝᵈ by
/// Nelder–Mead in tangent coordinates, once from each start. Returns the best
/// value and unit direction found.
pub fn maximize_on_sphere<F>(f: F, starts: &[Vec<f64>], opts: &NelderMeadOptions) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let mut best_val = f64::NEG_INFINITY;
    let mut best_dir = Vec::new();
    for start in starts {
        let Some(mut u) = normalized(start) else {
            continue;
        };
        let mut val = f(&u);
        if u.len() > 1 {
            // Re-centre the chart at the current point a few times so the
            // parameterization stays well conditioned.
            for _ in 0..4 {
                let tangent = tangent_basis(&u);
                let base = u.clone();
                let chart = |z: &[f64]| -> Vec<f64> {
                    let mut x = base.clone();
                    for (c, t) in z.iter().zip(&tangent) {
                        axpy(*c, t, &mut x);
                    }
                    scale(1.0 / crate::linalg::norm2(&x), &x)
                };
                let m = nelder_mead(|z| -f(&chart(z)), &vec![0.0; tangent.len()], opts);
                let new_val = -m.value;
                let moved = m.x.iter().map(|c| c.abs()).fold(0.0, f64::max);
                if new_val > val {
                    u = chart(&m.x);
                    val = new_val;
                }
                if moved < 1e-6 {
                    break;
                }
            }
        }
        if val > best_val {
            best_val = val;
            best_dir = u;
        }
    }
    (best_val, best_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evals: 20000,
            restarts: 4,
            ..Default::default()
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m);
    }

    #[test]
    fn sphere_maximum_of_quadratic_form() {
        // max of xᵀDx on S² with D = diag(1, 5, 2) is 5.
        let f = |u: &[f64]| u[0] * u[0] + 5.0 * u[1] * u[1] + 2.0 * u[2] * u[2];
        let (v, dir) = maximize_on_sphere(f, &[vec![1.0, 0.2, 0.3]], &NelderMeadOptions::default());
        assert!((v - 5.0).abs() < 1e-9);
        assert!(dir[1].abs() > 0.999);
    }

    #[test]
    fn tangent_basis_is_orthonormal_complement() {
        let u = normalized(&[1.0, 2.0, 2.0]).unwrap();
        let t = tangent_basis(&u);
        assert_eq!(t.len(), 2);
        for a in &t {
            assert!(dot(a, &u).abs() < 1e-12);
        }
        assert!(dot(&t[0], &t[1]).abs() < 1e-12);
    }
}
