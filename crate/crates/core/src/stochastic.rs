//! Monte-Carlo geometry on the Haar sphere: expectations of gauges, volume
//! ratios, δ-nets and section radii.
//!
//! Volumes are always ratios. For a star body `V ⊂ ℝⁿ`,
//! `Vol(V)/Vol(B₂ⁿ) = ∫_{S^{n−1}} ‖u‖_V^{−n} dμ(u)`, so a ratio against any
//! reference body is a ratio of two sphere integrals over the same sample.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bodies::Body;
use crate::error::{Error, Result};
use crate::linalg::{dot, gaussian_vector, Subspace};
use crate::optim::{maximize_on_sphere, NelderMeadOptions};
use crate::parallel::{map_chunks, stream_rng, Execution, CHUNK};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// Smallest sample count accepted by [`expectation_norm`].
pub const MIN_EXPECTATION_SAMPLES: usize = 1000;
/// Largest dimension for sphere-integral volume estimates.
pub const MAX_VOLUME_DIM: usize = 10;
/// Largest section or projection dimension.
pub const MAX_SECTION_DIM: usize = 8;
/// Relative CI half-width above which a volume estimate is rejected.
pub const MAX_RELATIVE_HALF_WIDTH: f64 = 0.25;

/// A Monte-Carlo estimate with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
}

impl EstimateWithCI {
    pub fn lower(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }

    /// Estimate of `f(value)` for a monotone `f` with derivative `df` at the
    /// value (delta method).
    pub fn map(&self, value: f64, derivative: f64) -> Self {
        Self {
            value,
            half_width: (derivative * self.half_width).abs(),
            ..*self
        }
    }
}

fn haar_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut g = gaussian_vector(rng, n);
        let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 0.0 {
            g.iter_mut().for_each(|v| *v /= r);
            return g;
        }
    }
}

/// `count` Haar-distributed unit vectors in ℝⁿ.
pub fn haar_sphere_sample(n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::BadDimensions("sphere sampling needs n >= 1".into()));
    }
    let chunks = map_chunks(count, CHUNK, Execution::default(), |c, _, len| {
        let mut rng = stream_rng(seed, c as u64);
        (0..len).map(|_| haar_point(&mut rng, n)).collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Sums `f(u)` over `samples` Haar points, chunk by chunk.
fn sphere_sums<const K: usize, F>(n: usize, samples: usize, seed: u64, exec: Execution, f: F) -> [f64; K]
where
    F: Fn(&[f64]) -> [f64; K] + Sync + Send,
{
    let parts = map_chunks(samples, CHUNK, exec, |c, _, len| {
        let mut rng = stream_rng(seed, c as u64);
        let mut acc = [0.0; K];
        for _ in 0..len {
            let u = haar_point(&mut rng, n);
            for (a, v) in acc.iter_mut().zip(f(&u)) {
                *a += v;
            }
        }
        acc
    });
    let mut total = [0.0; K];
    for part in parts {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    total
}

fn mean_estimate(sum: f64, sum_sq: f64, samples: usize, seed: u64) -> EstimateWithCI {
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum_sq / m - mean * mean) * m / (m - 1.0).max(1.0)).max(0.0);
    EstimateWithCI {
        value: mean,
        half_width: Z95 * (var / m).sqrt(),
        samples,
        seed,
    }
}

/// `E[‖·‖_V]` over the Haar sphere.
pub fn expectation_norm(v: &Body, samples: usize, seed: u64) -> Result<EstimateWithCI> {
    expectation_norm_with(v, samples, seed, Execution::default())
}

pub fn expectation_norm_with(v: &Body, samples: usize, seed: u64, exec: Execution) -> Result<EstimateWithCI> {
    if samples < MIN_EXPECTATION_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "expectation needs at least {MIN_EXPECTATION_SAMPLES} samples, got {samples}"
        )));
    }
    let [s, s2] = sphere_sums(v.dim(), samples, seed, exec, |u| {
        let g = v.gauge(u);
        [g, g * g]
    });
    Ok(mean_estimate(s, s2, samples, seed))
}

/// Upper bound `2^{1/2} π^{−1/(2p)} Γ((p+1)/2)^{1/p}` on the expected
/// `B_(J,p)` gauge, for `2 ≤ p < ∞`.
pub fn lemma3_bound(p: f64) -> Result<f64> {
    if !(p >= 2.0) || p.is_infinite() {
        return Err(Error::InvalidArgument(format!("bound needs 2 <= p < inf, got {p}")));
    }
    if p == 2.0 {
        return Ok(1.0);
    }
    Ok((0.5 * 2f64.ln() - std::f64::consts::PI.ln() / (2.0 * p) + ln_gamma((p + 1.0) / 2.0) / p).exp())
}

/// `Vol(B₂ⁿ) = π^{n/2}/Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    (h * std::f64::consts::PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// `Vol(V)/Vol(reference)` by the sphere integral of `‖u‖^{−n}`.
pub fn mc_volume_ratio(v: &Body, reference: &Body, samples: usize, seed: u64) -> Result<EstimateWithCI> {
    mc_volume_ratio_with(v, reference, samples, seed, Execution::default())
}

pub fn mc_volume_ratio_with(
    v: &Body,
    reference: &Body,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<EstimateWithCI> {
    let n = v.dim();
    if reference.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: reference.dim(),
        });
    }
    if n == 0 || n > MAX_VOLUME_DIM {
        return Err(Error::BadDimensions(format!(
            "volume ratios need 1 <= n <= {MAX_VOLUME_DIM}, got {n}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("volume ratio needs at least 2 samples".into()));
    }
    let e = n as i32;
    let euclidean_ref = matches!(reference.kind(), crate::bodies::BodyKind::Euclidean);
    let [sx, sy, sxx, syy, sxy] = sphere_sums(n, samples, seed, exec, |u| {
        let x = v.gauge(u).powi(-e);
        let y = if euclidean_ref { 1.0 } else { reference.gauge(u).powi(-e) };
        [x, y, x * x, y * y, x * y]
    });
    let m = samples as f64;
    let (mx, my) = (sx / m, sy / m);
    let r = mx / my;
    // Delta method for a ratio of means: Var(X − rY)/(m·E[Y]²).
    let var_d = (sxx / m - 2.0 * r * sxy / m + r * r * syy / m) - (mx - r * my).powi(2);
    let var_d = var_d.max(0.0) * m / (m - 1.0);
    let half = Z95 * (var_d / m).sqrt() / my;
    if !r.is_finite() || half > MAX_RELATIVE_HALF_WIDTH * r {
        return Err(Error::VarianceBlowup {
            value: r,
            half_width: half,
        });
    }
    Ok(EstimateWithCI {
        value: r,
        half_width: half,
        samples,
        seed,
    })
}

/// Absolute volume of `V` by uniform sampling of the box `[−R, R]ⁿ`.
pub fn hit_or_miss_volume(v: &Body, samples: usize, seed: u64) -> Result<EstimateWithCI> {
    let n = v.dim();
    let r = v.euclidean_radius_bound();
    let box_volume = (2.0 * r).powi(n as i32);
    let hits: usize = map_chunks(samples, CHUNK, Execution::default(), |c, _, len| {
        let mut rng = stream_rng(seed, c as u64);
        let mut x = vec![0.0; n];
        (0..len)
            .filter(|_| {
                x.iter_mut().for_each(|xi| *xi = rng.random_range(-r..=r));
                v.gauge(&x) <= 1.0
            })
            .count()
    })
    .into_iter()
    .sum();
    Ok(proportion_estimate(hits, samples, seed).map_scaled(box_volume))
}

fn proportion_estimate(hits: usize, samples: usize, seed: u64) -> EstimateWithCI {
    let m = samples.max(1) as f64;
    let f = hits as f64 / m;
    EstimateWithCI {
        value: f,
        half_width: Z95 * (f * (1.0 - f) / m).sqrt(),
        samples,
        seed,
    }
}

impl EstimateWithCI {
    fn map_scaled(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            half_width: self.half_width * c,
            ..self
        }
    }
}

fn check_section_dim(l: &Subspace) -> Result<()> {
    if l.dim() > MAX_SECTION_DIM {
        return Err(Error::BadDimensions(format!(
            "sections are limited to dimension {MAX_SECTION_DIM}, got {}",
            l.dim()
        )));
    }
    Ok(())
}

/// `Vol_s(V ∩ L)/Vol_s(reference)`; the reference lives in the coordinates
/// of `L`.
pub fn section_volume_ratio(v: &Body, l: &Subspace, reference: &Body, samples: usize, seed: u64) -> Result<EstimateWithCI> {
    check_section_dim(l)?;
    mc_volume_ratio(&v.section(l)?, reference, samples, seed)
}

/// `Vol_s(P_L V)/Vol_s(reference)`; the reference lives in the coordinates
/// of `L`.
pub fn projection_volume_ratio(
    v: &Body,
    l: &Subspace,
    reference: &Body,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithCI> {
    check_section_dim(l)?;
    mc_volume_ratio(&v.projection(l)?, reference, samples, seed)
}

/// Largest dimension accepted by [`greedy_net`].
pub const MAX_NET_DIM: usize = 6;
/// Net size at which [`greedy_net`] gives up.
pub const MAX_NET_POINTS: usize = 1_000_000;
/// Fresh points used to certify coverage.
pub const COVERAGE_CHECK_POINTS: usize = 10_000;
/// Fraction of fresh points that must be covered.
pub const COVERAGE_TARGET: f64 = 0.999;

/// Options for [`greedy_net`].
#[derive(Debug, Clone, Copy)]
pub struct NetOptions {
    /// Number of candidate points sampled uniformly in `V`.
    pub pool: usize,
    /// Rounds of adding uncovered check points to the pool.
    pub refinements: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            pool: 20_000,
            refinements: 3,
        }
    }
}

/// A δ-net and a δ-separated set drawn from the same candidate pool.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetReport {
    pub delta: f64,
    /// Smaller of the farthest-point net and the maximal packing (which is
    /// itself a δ-net of the pool).
    pub net_points: Vec<Vec<f64>>,
    /// Random-order maximal δ-separated subset of the pool.
    pub packing_points: Vec<Vec<f64>>,
    /// Maximal 2δ-separated subset of the same pool.
    pub packing_points_2delta: Vec<Vec<f64>>,
    /// Fraction of fresh uniform points within δ of the net.
    pub coverage: f64,
    pub certified: bool,
}

impl NetReport {
    /// `m(2δ) ≤ n(δ) ≤ m(δ)` with the sizes in this report.
    pub fn chain_holds(&self) -> bool {
        let n = self.net_points.len();
        self.packing_points_2delta.len() <= n && n <= self.packing_points.len()
    }
}

fn uniform_in_body<R: Rng + ?Sized>(rng: &mut R, v: &Body, r: f64) -> Vec<f64> {
    let n = v.dim();
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-r..=r)).collect();
        if v.gauge(&x) <= 1.0 {
            return x;
        }
    }
}

fn random_order_packing<R: Rng + ?Sized>(
    rng: &mut R,
    pool: &[Vec<f64>],
    reference: &Body,
    delta: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    for &i in &order {
        let x = &pool[i];
        if chosen.iter().all(|c| dist(reference, x, c) >= delta) {
            chosen.push(x.clone());
            if chosen.len() > MAX_NET_POINTS {
                return Err(Error::Saturation(MAX_NET_POINTS));
            }
        }
    }
    Ok(chosen)
}

fn dist(reference: &Body, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    reference.gauge(&d)
}

/// Farthest-point net: starts at the pool point of least gauge and keeps
/// adding the pool point farthest from the net until every pool point is
/// within δ.
fn farthest_point_net(v: &Body, pool: &[Vec<f64>], reference: &Body, delta: f64) -> Result<Vec<usize>> {
    let start = (0..pool.len())
        .min_by(|&a, &b| v.gauge(&pool[a]).total_cmp(&v.gauge(&pool[b])))
        .expect("non-empty pool");
    let mut net = vec![start];
    let mut nearest: Vec<f64> = pool.iter().map(|x| dist(reference, x, &pool[start])).collect();
    loop {
        let (far, &d) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty pool");
        if d <= delta {
            return Ok(net);
        }
        if net.len() >= MAX_NET_POINTS {
            return Err(Error::Saturation(MAX_NET_POINTS));
        }
        net.push(far);
        for (i, x) in pool.iter().enumerate() {
            let di = dist(reference, x, &pool[far]);
            if di < nearest[i] {
                nearest[i] = di;
            }
        }
    }
}

/// Greedy δ-net of `V` in the `reference` gauge, with δ- and 2δ-packings
/// of the same pool and a sampled coverage certificate.
pub fn greedy_net(v: &Body, reference: &Body, delta: f64, seed: u64) -> Result<NetReport> {
    greedy_net_with(v, reference, delta, seed, NetOptions::default())
}

pub fn greedy_net_with(v: &Body, reference: &Body, delta: f64, seed: u64, opts: NetOptions) -> Result<NetReport> {
    let n = v.dim();
    if n == 0 || n > MAX_NET_DIM {
        return Err(Error::BadDimensions(format!("nets need 1 <= n <= {MAX_NET_DIM}, got {n}")));
    }
    if reference.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: reference.dim(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let r = v.euclidean_radius_bound();
    let mut rng = stream_rng(seed, 0);
    let mut pool: Vec<Vec<f64>> = (0..opts.pool.max(1)).map(|_| uniform_in_body(&mut rng, v, r)).collect();

    let mut round = 0;
    let (net, coverage) = loop {
        let net_idx = farthest_point_net(v, &pool, reference, delta)?;
        let net: Vec<Vec<f64>> = net_idx.iter().map(|&i| pool[i].clone()).collect();
        let mut check_rng = stream_rng(seed, 1 + round as u64);
        let fresh: Vec<Vec<f64>> = (0..COVERAGE_CHECK_POINTS)
            .map(|_| uniform_in_body(&mut check_rng, v, r))
            .collect();
        let uncovered: Vec<Vec<f64>> = fresh
            .into_iter()
            .filter(|x| net.iter().all(|c| dist(reference, x, c) > delta))
            .collect();
        let coverage = 1.0 - uncovered.len() as f64 / COVERAGE_CHECK_POINTS as f64;
        if coverage >= COVERAGE_TARGET || round >= opts.refinements {
            break (net, coverage);
        }
        pool.extend(uncovered);
        round += 1;
    };

    let mut pack_rng = stream_rng(seed, 1000);
    let packing = random_order_packing(&mut pack_rng, &pool, reference, delta)?;
    let packing_2 = random_order_packing(&mut pack_rng, &pool, reference, 2.0 * delta)?;
    let net_points = if packing.len() < net.len() { packing.clone() } else { net };
    Ok(NetReport {
        delta,
        net_points,
        packing_points: packing,
        packing_points_2delta: packing_2,
        coverage,
        certified: coverage >= COVERAGE_TARGET,
    })
}

/// Default number of restarts for [`section_radius`].
pub const DEFAULT_RESTARTS: usize = 64;
/// Fewest restarts accepted by [`section_radius`].
pub const MIN_RESTARTS: usize = 8;

/// `rad(V∩L | W∩L) = sup{‖x‖_W : x ∈ V ∩ L}`.
///
/// Exact when `V` is an ellipsoid and `W` Euclidean; otherwise the best of
/// `restarts` locally refined starts, which is a lower bound on the true
/// radius.
pub fn section_radius(v: &Body, w: &Body, l: &Subspace, restarts: usize, seed: u64) -> Result<f64> {
    if restarts < MIN_RESTARTS {
        return Err(Error::InvalidArgument(format!(
            "section radius needs at least {MIN_RESTARTS} restarts, got {restarts}"
        )));
    }
    if v.dim() != l.ambient_dim() || w.dim() != l.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: l.ambient_dim(),
            got: v.dim().max(w.dim()),
        });
    }
    if let (Some(m), true) = (v.ellipsoid_matrix(), w.is_euclidean()) {
        return ellipsoid_section_radius(&m, l);
    }
    let s = l.dim();
    let ratio = |y: &[f64]| {
        let x = l.embed(y);
        w.gauge(&x) / v.gauge(&x)
    };
    if s == 1 {
        return Ok(ratio(&[1.0]));
    }
    let mut rng = stream_rng(seed, 0);
    let mut pool: Vec<(f64, Vec<f64>)> = (0..restarts * 8)
        .map(|_| {
            let u = haar_point(&mut rng, s);
            (ratio(&u), u)
        })
        .collect();
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    let starts: Vec<Vec<f64>> = pool.into_iter().take(restarts).map(|(_, u)| u).collect();
    let opts = NelderMeadOptions {
        f_tol: 1e-12,
        x_tol: 1e-8,
        max_evals: 1500,
        initial_step: 0.05,
        restarts: 1,
    };
    Ok(maximize_on_sphere(ratio, &starts, &opts).0)
}

/// `1/√λ_min(UᵀM⁻ᵀM⁻¹U)` for `V = M·B₂ⁿ`.
fn ellipsoid_section_radius(m: &crate::linalg::Matrix, l: &Subspace) -> Result<f64> {
    let m_inv = m.inverse()?;
    let images: Vec<Vec<f64>> = l.frame().iter().map(|u| m_inv.mul_vec(u)).collect();
    let s = l.dim();
    let mut q = crate::linalg::Matrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            q[(i, j)] = dot(&images[i], &images[j]);
        }
    }
    let (vals, _) = q.symmetric_eigen()?;
    Ok(1.0 / vals[0].sqrt())
}

/// Volume of the affine section `V ∩ (z + L)` by hit-or-miss in the
/// coordinates of `L`.
pub fn affine_section_volume(v: &Body, l: &Subspace, z: &[f64], samples: usize, seed: u64) -> Result<EstimateWithCI> {
    let s = l.dim();
    let r = v.euclidean_radius_bound();
    let box_volume = (2.0 * r).powi(s as i32);
    let hits: usize = map_chunks(samples, CHUNK, Execution::default(), |c, _, len| {
        let mut rng = stream_rng(seed, c as u64);
        let mut y = vec![0.0; s];
        (0..len)
            .filter(|_| {
                y.iter_mut().for_each(|yi| *yi = rng.random_range(-r..=r));
                let mut x = l.embed(&y);
                x.iter_mut().zip(z).for_each(|(a, b)| *a += b);
                v.gauge(&x) <= 1.0
            })
            .count()
    })
    .into_iter()
    .sum();
    Ok(proportion_estimate(hits, samples, seed).map_scaled(box_volume))
}

/// Checks that no parallel section `V ∩ (z + L)` is larger than the central
/// one beyond twice the combined CI half-width. Every offset must be
/// orthogonal to `L`.
pub fn brunn_section_check(v: &Body, l: &Subspace, offsets: &[Vec<f64>], samples: usize, seed: u64) -> Result<bool> {
    let n = l.ambient_dim();
    for z in offsets {
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
        let along = l.coordinates(z);
        let scale = z.iter().map(|v| v.abs()).fold(1.0, f64::max);
        if along.iter().any(|c| c.abs() > 1e-9 * scale) {
            return Err(Error::InvalidArgument("offsets must be orthogonal to the subspace".into()));
        }
    }
    // The same sample points serve every offset, so equal sections give
    // equal counts.
    let central = affine_section_volume(v, l, &vec![0.0; n], samples, seed)?;
    for z in offsets {
        let off = affine_section_volume(v, l, z, samples, seed)?;
        if central.value < off.value - 2.0 * central.half_width.hypot(off.half_width) {
            return Ok(false);
        }
    }
    Ok(true)
}
