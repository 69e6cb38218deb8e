//! Orthonormal systems on probability spaces, evaluated through quadrature.
//!
//! A system stores its function values on the quadrature nodes, so the
//! induced norm `‖α‖_(J,p) = ‖Σ αₖφₖ‖_p` reduces to a weighted sum over
//! nodes. Quadratures are exact on products of two system functions, which
//! makes the `p = 2` norm equal to the Euclidean norm of the coefficients.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of trapezoid nodes for the trigonometric system.
pub const TRIG_MIN_NODES: usize = 256;
/// Largest spherical-harmonic degree supported.
pub const SPHERE_MAX_DEGREE: usize = 12;

/// Nodes and nonnegative weights of a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("quadrature weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "quadrature weights sum to {total}, not 1"
            )));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] (weights sum to 2).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Fully normalized associated Legendre values `Q_l^m(t)` for `0 ≤ m ≤ l ≤
/// lmax`, where `Q_l^m = √((2l+1)(l−m)!/(l+m)!)·P_l^m` (no Condon–Shortley
/// phase). Indexed as `out[l][m]`.
fn normalized_legendre(lmax: usize, t: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - t * t).max(0.0).sqrt();
    let mut q: Vec<Vec<f64>> = (0..=lmax).map(|l| vec![0.0; l + 1]).collect();
    q[0][0] = 1.0;
    for m in 1..=lmax {
        q[m][m] = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * q[m - 1][m - 1];
    }
    for m in 0..lmax {
        q[m + 1][m] = ((2 * m + 3) as f64).sqrt() * t * q[m][m];
    }
    for m in 0..=lmax {
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            q[l][m] = a * (t * q[l - 1][m] - b * q[l - 2][m]);
        }
    }
    q
}

/// Family of an orthonormal system; fixes how function `k` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemFamily {
    /// `1, √2 cos θ, √2 sin θ, √2 cos 2θ, …` on [0, 2π).
    Trig { max_degree: usize },
    /// Real spherical harmonics on S², normalized surface measure; points
    /// are `[polar, azimuth]`, functions ordered by degree then order
    /// `m = −l..=l`.
    SphereHarmonics { max_degree: usize },
}

impl SystemFamily {
    pub fn len(&self) -> usize {
        match *self {
            SystemFamily::Trig { max_degree } => 2 * max_degree + 1,
            SystemFamily::SphereHarmonics { max_degree } => (max_degree + 1) * (max_degree + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Degree of family function `k` (trigonometric frequency or harmonic
    /// degree `l`).
    pub fn degree(&self, k: usize) -> usize {
        match self {
            SystemFamily::Trig { .. } => k.div_ceil(2),
            SystemFamily::SphereHarmonics { .. } => (k as f64).sqrt().floor() as usize,
        }
    }

    /// Evaluates family function `k` at `point`.
    pub fn evaluate(&self, k: usize, point: &[f64]) -> f64 {
        match *self {
            SystemFamily::Trig { .. } => {
                let theta = point[0];
                if k == 0 {
                    1.0
                } else {
                    let j = k.div_ceil(2) as f64;
                    if k % 2 == 1 {
                        2f64.sqrt() * (j * theta).cos()
                    } else {
                        2f64.sqrt() * (j * theta).sin()
                    }
                }
            }
            SystemFamily::SphereHarmonics { .. } => {
                let l = self.degree(k);
                let q = normalized_legendre(l, point[0].cos());
                sphere_value(&q, l, k as isize - (l * l + l) as isize, point[1])
            }
        }
    }

    /// Values of every family function at `point`.
    fn evaluate_all(&self, point: &[f64]) -> Vec<f64> {
        match *self {
            SystemFamily::Trig { .. } => (0..self.len()).map(|k| self.evaluate(k, point)).collect(),
            SystemFamily::SphereHarmonics { max_degree } => {
                let q = normalized_legendre(max_degree, point[0].cos());
                let mut out = Vec::with_capacity(self.len());
                for l in 0..=max_degree {
                    for m in -(l as isize)..=(l as isize) {
                        out.push(sphere_value(&q, l, m, point[1]));
                    }
                }
                out
            }
        }
    }

    /// Upper bounds on `sup |φₖ|` over the whole domain, one per function.
    fn sup_norms(&self) -> Vec<f64> {
        match *self {
            SystemFamily::Trig { max_degree } => (0..2 * max_degree + 1)
                .map(|k| if k == 0 { 1.0 } else { 2f64.sqrt() })
                .collect(),
            SystemFamily::SphereHarmonics { max_degree } => {
                // |Y| = √2·|Q_l^m(t)|·|trig| for m > 0, so the sup is a 1-D
                // maximum over the polar angle, taken on a fine grid.
                let grid = 8192;
                let mut best: Vec<Vec<f64>> = (0..=max_degree).map(|l| vec![0.0; l + 1]).collect();
                for i in 0..=grid {
                    let q = normalized_legendre(max_degree, (PI * i as f64 / grid as f64).cos());
                    for (row, qrow) in best.iter_mut().zip(&q) {
                        for (b, v) in row.iter_mut().zip(qrow) {
                            *b = b.max(v.abs());
                        }
                    }
                }
                let mut out = Vec::with_capacity(self.len());
                for (l, row) in best.iter().enumerate() {
                    for m in -(l as isize)..=(l as isize) {
                        let factor = if m == 0 { 1.0 } else { 2f64.sqrt() };
                        out.push(factor * row[m.unsigned_abs()]);
                    }
                }
                out
            }
        }
    }
}

fn sphere_value(q: &[Vec<f64>], l: usize, m: isize, azimuth: f64) -> f64 {
    let am = m.unsigned_abs();
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => q[l][0],
        std::cmp::Ordering::Greater => 2f64.sqrt() * q[l][am] * (am as f64 * azimuth).cos(),
        std::cmp::Ordering::Less => 2f64.sqrt() * q[l][am] * (am as f64 * azimuth).sin(),
    }
}

/// A finite orthonormal system `{φₖ}` on a probability space given by a
/// quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalSystem {
    name: String,
    family: SystemFamily,
    /// Family function index of each system member.
    indices: Vec<usize>,
    quadrature: QuadratureRule,
    /// Node-major table: `values[i * n + k] = φₖ(ωᵢ)`.
    values: Vec<f64>,
    sup_norms: Vec<f64>,
}

/// JSON form of a system.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SystemRecord {
    pub name: String,
    pub n: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub sup_norms: Vec<f64>,
}

/// Trigonometric system of degree `max_degree` with the default node count
/// `max(4·max_degree + 1, 256)`.
pub fn trig_system(max_degree: usize) -> OrthonormalSystem {
    trig_system_with_nodes(max_degree, (4 * max_degree + 1).max(TRIG_MIN_NODES))
        .expect("default node count is admissible")
}

/// Trigonometric system on `nodes` equally spaced trapezoid nodes; needs
/// `nodes ≥ 4·max_degree + 1`.
pub fn trig_system_with_nodes(max_degree: usize, nodes: usize) -> Result<OrthonormalSystem> {
    if nodes < 4 * max_degree + 1 {
        return Err(Error::InvalidArgument(format!(
            "trig system of degree {max_degree} needs at least {} nodes",
            4 * max_degree + 1
        )));
    }
    let pts: Vec<Vec<f64>> = (0..nodes)
        .map(|j| vec![2.0 * PI * j as f64 / nodes as f64])
        .collect();
    let quad = QuadratureRule::new(pts, vec![1.0 / nodes as f64; nodes])?;
    Ok(OrthonormalSystem::build(
        format!("trig{max_degree}"),
        SystemFamily::Trig { max_degree },
        quad,
    ))
}

/// Real spherical harmonics of degree ≤ `max_degree` on S² (`n = (L+1)²`),
/// with a Gauss–Legendre × uniform-azimuth product rule.
pub fn sphere_harmonics_system(max_degree: usize) -> Result<OrthonormalSystem> {
    if max_degree > SPHERE_MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "spherical harmonics supported up to degree {SPHERE_MAX_DEGREE}"
        )));
    }
    let n_polar = 2 * max_degree + 4;
    let n_azimuth = 4 * max_degree + 4;
    let (t, w) = gauss_legendre(n_polar);
    let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    for (ti, wi) in t.iter().zip(&w) {
        for j in 0..n_azimuth {
            let az = 2.0 * PI * (j as f64 + 0.5) / n_azimuth as f64;
            nodes.push(vec![ti.acos(), az]);
            weights.push(wi / 2.0 / n_azimuth as f64);
        }
    }
    // Renormalize away the last-bit rounding of the Gauss weights.
    let total: f64 = weights.iter().sum();
    for wi in &mut weights {
        *wi /= total;
    }
    let quad = QuadratureRule::new(nodes, weights)?;
    Ok(OrthonormalSystem::build(
        format!("sphere{max_degree}"),
        SystemFamily::SphereHarmonics { max_degree },
        quad,
    ))
}

impl OrthonormalSystem {
    fn build(name: String, family: SystemFamily, quadrature: QuadratureRule) -> Self {
        let n = family.len();
        let mut values = Vec::with_capacity(quadrature.len() * n);
        for node in quadrature.nodes() {
            values.extend(family.evaluate_all(node));
        }
        let mut sup_norms = family.sup_norms();
        for (k, s) in sup_norms.iter_mut().enumerate() {
            let node_max = (0..quadrature.len())
                .map(|i| values[i * n + k].abs())
                .fold(0.0, f64::max);
            *s = s.max(node_max);
        }
        Self {
            name,
            family,
            indices: (0..n).collect(),
            quadrature,
            values,
            sup_norms,
        }
    }

    /// The subsystem made of the listed members (in the given order).
    pub fn subsystem(&self, members: &[usize]) -> Result<Self> {
        let n = self.n();
        if members.is_empty() {
            return Err(Error::BadDimensions("subsystem needs at least one function".into()));
        }
        if let Some(&bad) = members.iter().find(|&&k| k >= n) {
            return Err(Error::BadDimensions(format!("member {bad} out of range for n={n}")));
        }
        let m = members.len();
        let mut values = Vec::with_capacity(self.quadrature.len() * m);
        for i in 0..self.quadrature.len() {
            values.extend(members.iter().map(|&k| self.values[i * n + k]));
        }
        Ok(Self {
            name: format!("{}[{}]", self.name, m),
            family: self.family,
            indices: members.iter().map(|&k| self.indices[k]).collect(),
            quadrature: self.quadrature.clone(),
            values,
            sup_norms: members.iter().map(|&k| self.sup_norms[k]).collect(),
        })
    }

    /// The first `n` members.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n() {
            return Err(Error::BadDimensions(format!(
                "cannot truncate a system of size {} to {n}",
                self.n()
            )));
        }
        let mut s = self.subsystem(&(0..n).collect::<Vec<_>>())?;
        s.name = format!("{}:{n}", self.name);
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn family(&self) -> SystemFamily {
        self.family
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    pub fn sup_norms(&self) -> &[f64] {
        &self.sup_norms
    }

    /// Values of all members at quadrature node `i`.
    pub fn node_values(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }

    /// Evaluates member `k` at an arbitrary domain point.
    pub fn evaluate(&self, k: usize, point: &[f64]) -> f64 {
        self.family.evaluate(self.indices[k], point)
    }

    /// Values `t^α(ωᵢ) = Σ αₖ φₖ(ωᵢ)` at every node.
    pub fn synthesize(&self, alpha: &[f64]) -> Vec<f64> {
        (0..self.quadrature.len())
            .map(|i| crate::linalg::dot(self.node_values(i), alpha))
            .collect()
    }

    /// Largest deviation of the quadrature Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let g: f64 = self
                    .quadrature
                    .weights()
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * self.values[i * n + a] * self.values[i * n + b])
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// `‖α‖_(J,p)`; `p = f64::INFINITY` gives the maximum over nodes.
    pub fn lp_norm(&self, alpha: &[f64], p: f64) -> Result<f64> {
        if alpha.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: alpha.len(),
            });
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
        }
        Ok(self.lp_norm_unchecked(alpha, p))
    }

    /// [`lp_norm`](Self::lp_norm) without argument validation.
    pub fn lp_norm_unchecked(&self, alpha: &[f64], p: f64) -> f64 {
        let n = self.n();
        let w = self.quadrature.weights();
        let vals = &self.values;
        let f_at = |i: usize| -> f64 {
            let row = &vals[i * n..(i + 1) * n];
            row.iter().zip(alpha).map(|(a, b)| a * b).sum::<f64>()
        };
        let nodes = w.len();
        if p.is_infinite() {
            return (0..nodes).map(|i| f_at(i).abs()).fold(0.0, f64::max);
        }
        let acc: f64 = if p == 1.0 {
            (0..nodes).map(|i| w[i] * f_at(i).abs()).sum()
        } else if p == 2.0 {
            (0..nodes).map(|i| w[i] * f_at(i).powi(2)).sum()
        } else if p.fract() == 0.0 && p <= 64.0 {
            let e = p as i32;
            (0..nodes).map(|i| w[i] * f_at(i).abs().powi(e)).sum()
        } else if (2.0 * p).fract() == 0.0 && p <= 64.0 {
            let e = p.floor() as i32;
            (0..nodes)
                .map(|i| {
                    let a = f_at(i).abs();
                    w[i] * a.powi(e) * a.sqrt()
                })
                .sum()
        } else {
            (0..nodes).map(|i| w[i] * f_at(i).abs().powf(p)).sum()
        };
        if p == 1.0 {
            acc
        } else if p == 2.0 {
            acc.sqrt()
        } else {
            acc.powf(1.0 / p)
        }
    }

    pub fn record(&self) -> SystemRecord {
        SystemRecord {
            name: self.name.clone(),
            n: self.n(),
            nodes: self.quadrature.nodes().to_vec(),
            weights: self.quadrature.weights().to_vec(),
            sup_norms: self.sup_norms.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("system record serializes")
    }
}

/// Conjugate exponent `p′` with `1/p + 1/p′ = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// A proportional-size sub-family with uniformly bounded sup-norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssentialSubsystem {
    pub parent: String,
    pub indices: Vec<usize>,
    /// Largest sup-norm among the selected functions.
    pub bound: f64,
    /// Requested fraction of the parent size.
    pub fraction: f64,
}

/// Selects the `⌈C·n⌉` members of smallest sup-norm.
pub fn essential_subsystem(system: &OrthonormalSystem, fraction: f64) -> Result<EssentialSubsystem> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n = system.n();
    let m = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| system.sup_norms[a].total_cmp(&system.sup_norms[b]));
    let mut indices: Vec<usize> = order[..m].to_vec();
    indices.sort_unstable();
    let bound = indices.iter().map(|&k| system.sup_norms[k]).fold(0.0, f64::max);
    Ok(EssentialSubsystem {
        parent: system.name.clone(),
        indices,
        bound,
        fraction,
    })
}

/// Largest allowed growth of the sup-norm bound across a size scan.
pub const ESSENTIAL_GROWTH_LIMIT: f64 = 2.0;

/// Builds the system at each size, selects its essential subsystem and
/// fails with `CannotSatisfy` when the bound grows by more than
/// [`ESSENTIAL_GROWTH_LIMIT`] over the scan.
pub fn essential_bound_scan<F>(build: F, sizes: &[usize], fraction: f64) -> Result<Vec<EssentialSubsystem>>
where
    F: Fn(usize) -> Result<OrthonormalSystem>,
{
    let subs: Vec<EssentialSubsystem> = sizes
        .iter()
        .map(|&s| build(s).and_then(|sys| essential_subsystem(&sys, fraction)))
        .collect::<Result<_>>()?;
    if let (Some(first), Some(worst)) = (
        subs.first().map(|s| s.bound),
        subs.iter().map(|s| s.bound).reduce(f64::max),
    ) {
        if worst > ESSENTIAL_GROWTH_LIMIT * first {
            return Err(Error::CannotSatisfy(format!(
                "sup-norm bound grows from {first} to {worst} across sizes {sizes:?}"
            )));
        }
    }
    Ok(subs)
}
