//! Laplace–Beltrami spectra of the compact two-point homogeneous spaces.
//!
//! Each family is described by Jacobi parameters `(α, β)` with
//! `α = (d−2)/2`. Eigenvalues are `θ_k = k(k+α+β+1)`; the real projective
//! spaces keep only the even sphere degrees. Eigenspace dimensions come from
//! the Jacobi-polynomial formula
//!
//! ```text
//! dim H_k = (2k+α+β+1)/(α+β+1) · (α+β+1)_k (α+1)_k / (k! (β+1)_k)
//! ```
//!
//! evaluated in exact integer arithmetic.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bodies::MultiplierSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldFamily {
    Sphere,
    RealProjective,
    ComplexProjective,
    QuaternionicProjective,
    CayleyPlane,
}

impl ManifoldFamily {
    pub const ALL: [ManifoldFamily; 5] = [
        ManifoldFamily::Sphere,
        ManifoldFamily::RealProjective,
        ManifoldFamily::ComplexProjective,
        ManifoldFamily::QuaternionicProjective,
        ManifoldFamily::CayleyPlane,
    ];

    /// Twice the Jacobi parameter β for dimension `d`.
    fn doubled_beta(self, d: usize) -> usize {
        match self {
            ManifoldFamily::Sphere | ManifoldFamily::RealProjective => d - 2,
            ManifoldFamily::ComplexProjective => 0,
            ManifoldFamily::QuaternionicProjective => 2,
            ManifoldFamily::CayleyPlane => 6,
        }
    }

    fn admits(self, d: usize) -> bool {
        match self {
            ManifoldFamily::Sphere | ManifoldFamily::RealProjective => d >= 2,
            ManifoldFamily::ComplexProjective => d >= 4 && d.is_multiple_of(2),
            ManifoldFamily::QuaternionicProjective => d >= 8 && d.is_multiple_of(4),
            ManifoldFamily::CayleyPlane => d == 16,
        }
    }

    /// Smallest admissible dimension.
    pub fn default_dim(self) -> usize {
        match self {
            ManifoldFamily::Sphere | ManifoldFamily::RealProjective => 2,
            ManifoldFamily::ComplexProjective => 4,
            ManifoldFamily::QuaternionicProjective => 8,
            ManifoldFamily::CayleyPlane => 16,
        }
    }
}

/// Largest supported manifold dimension.
pub const MAX_MANIFOLD_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldParams {
    pub family: ManifoldFamily,
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Only even sphere degrees survive (real projective spaces).
    pub even_only: bool,
}

impl ManifoldParams {
    pub fn new(family: ManifoldFamily, d: usize) -> Result<Self> {
        if !family.admits(d) || d > MAX_MANIFOLD_DIM {
            return Err(Error::InvalidArgument(format!(
                "dimension {d} is not admissible for {family:?}"
            )));
        }
        Ok(Self {
            family,
            d,
            alpha: (d as f64 - 2.0) / 2.0,
            beta: family.doubled_beta(d) as f64 / 2.0,
            even_only: family == ManifoldFamily::RealProjective,
        })
    }

    pub fn sphere(d: usize) -> Result<Self> {
        Self::new(ManifoldFamily::Sphere, d)
    }

    pub fn cayley_plane() -> Self {
        Self::new(ManifoldFamily::CayleyPlane, 16).expect("d = 16 is admissible")
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Sphere degree carried by spectral index `k`.
    fn degree(&self, k: usize) -> usize {
        if self.even_only {
            2 * k
        } else {
            k
        }
    }
}

impl fmt::Display for ManifoldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            ManifoldFamily::Sphere => write!(f, "S^{}", self.d),
            ManifoldFamily::RealProjective => write!(f, "P^{}(R)", self.d),
            ManifoldFamily::ComplexProjective => write!(f, "P^{}(C)", self.d),
            ManifoldFamily::QuaternionicProjective => write!(f, "P^{}(H)", self.d),
            ManifoldFamily::CayleyPlane => write!(f, "P^16(Cay)"),
        }
    }
}

/// `θ_k`; for real projective spaces index `k` means sphere degree `2k`.
pub fn eigenvalue(params: &ManifoldParams, k: usize) -> f64 {
    let j = params.degree(k) as f64;
    j * (j + params.alpha + params.beta + 1.0)
}

/// Exact `dim H_k`. Fails only if the value overflows `u128`.
pub fn eigenspace_dim(params: &ManifoldParams, k: usize) -> Result<u128> {
    let j = params.degree(k) as u64;
    // Doubled Jacobi parameters keep every factor integral; the powers of 2
    // cancel between numerator and denominator.
    let a2 = params.d as u64 - 2;
    let b2 = params.family.doubled_beta(params.d) as u64;
    let mut num = BigUint::from(4 * j + a2 + b2 + 2);
    let mut den = BigUint::from(a2 + b2 + 2);
    for i in 0..j {
        num *= (a2 + b2 + 2 + 2 * i) * (a2 + 2 + 2 * i);
        den *= (2 * i + 2) * (b2 + 2 + 2 * i);
    }
    let q = &num / &den;
    debug_assert!(&q * &den == num, "dimension formula must be integral");
    u128::try_from(q).map_err(|_| Error::InvalidArgument(format!("dim H_{k} overflows u128")))
}

/// Eigenvalues, eigenspace dimensions and cumulative counts up to a degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    params: ManifoldParams,
    theta: Vec<f64>,
    dims: Vec<u128>,
    tau: Vec<u128>,
}

impl SpectralData {
    /// Tabulates indices `0..=max_index`.
    pub fn new(params: ManifoldParams, max_index: usize) -> Result<Self> {
        let theta = (0..=max_index).map(|k| eigenvalue(&params, k)).collect();
        let dims: Vec<u128> = (0..=max_index)
            .map(|k| eigenspace_dim(&params, k))
            .collect::<Result<_>>()?;
        let mut tau = Vec::with_capacity(dims.len());
        let mut acc: u128 = 0;
        for d in &dims {
            acc = acc
                .checked_add(*d)
                .ok_or_else(|| Error::InvalidArgument("cumulative dimension overflows".into()))?;
            tau.push(acc);
        }
        Ok(Self { params, theta, dims, tau })
    }

    /// Smallest table whose cumulative count reaches `n` functions.
    pub fn covering(params: ManifoldParams, n: usize) -> Result<Self> {
        let mut k = 0;
        let mut acc: u128 = 0;
        while acc < n as u128 {
            acc += eigenspace_dim(&params, k)?;
            k += 1;
        }
        Self::new(params, k.saturating_sub(1))
    }

    pub fn params(&self) -> &ManifoldParams {
        &self.params
    }

    pub fn max_index(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn theta(&self, k: usize) -> Option<f64> {
        self.theta.get(k).copied()
    }

    pub fn dim(&self, k: usize) -> Option<u128> {
        self.dims.get(k).copied()
    }

    /// `τ_N = Σ_{k≤N} dim H_k`.
    pub fn tau(&self, n: usize) -> Option<u128> {
        self.tau.get(n).copied()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn dims(&self) -> &[u128] {
        &self.dims
    }

    /// CSV table with header `k,theta,dim,tau`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,theta,dim,tau\n");
        for k in 0..self.theta.len() {
            let _ = writeln!(out, "{k},{},{},{}", self.theta[k], self.dims[k], self.tau[k]);
        }
        out
    }
}

/// `τ_N / θ_N^{d/2}`.
pub fn weyl_ratio(params: &ManifoldParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("weyl ratio needs N >= 1".into()));
    }
    let data = SpectralData::new(*params, n)?;
    let tau = data.tau(n).expect("tabulated") as f64;
    Ok(tau / eigenvalue(params, n).powf(params.d as f64 / 2.0))
}

/// `max/min − 1` of the Weyl ratio over `N ∈ [lo, hi]`.
pub fn weyl_drift(params: &ManifoldParams, lo: usize, hi: usize) -> Result<f64> {
    if lo == 0 || hi < lo {
        return Err(Error::InvalidArgument(format!("bad range [{lo}, {hi}]")));
    }
    let data = SpectralData::new(*params, hi)?;
    let power = params.d as f64 / 2.0;
    let ratios: Vec<f64> = (lo..=hi)
        .map(|n| data.tau(n).expect("tabulated") as f64 / data.theta(n).expect("tabulated").powf(power))
        .collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max / min - 1.0)
}

/// Sobolev multiplier `λ(θ) = θ^{−γ/2}` on the nonconstant spectrum. The
/// profile is the same for every family; the spectrum enters on truncation.
pub fn sobolev_multiplier(_params: &ManifoldParams, gamma: f64) -> Result<MultiplierSpec> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(MultiplierSpec::power(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::truncate_multiplier;

    fn all_families() -> Vec<ManifoldParams> {
        ManifoldFamily::ALL
            .iter()
            .map(|f| ManifoldParams::new(*f, f.default_dim()).unwrap())
            .collect()
    }

    #[test]
    fn eigenvalue_examples() {
        let s2 = ManifoldParams::sphere(2).unwrap();
        assert_eq!(eigenvalue(&s2, 3), 12.0);
        let cay = ManifoldParams::cayley_plane();
        assert_eq!((cay.alpha, cay.beta), (7.0, 3.0));
        assert_eq!(eigenvalue(&cay, 1), 12.0);
        for p in all_families() {
            assert_eq!(eigenvalue(&p, 0), 0.0);
        }
        let rp3 = ManifoldParams::new(ManifoldFamily::RealProjective, 3).unwrap();
        // θ at index 1 is sphere degree 2: 2·(2+3−1)
        assert_eq!(eigenvalue(&rp3, 1), 8.0);
    }

    #[test]
    fn dimension_examples() {
        let s2 = ManifoldParams::sphere(2).unwrap();
        for k in 0..30 {
            assert_eq!(eigenspace_dim(&s2, k).unwrap(), 2 * k as u128 + 1);
        }
        let data = SpectralData::new(s2, 20).unwrap();
        for n in 0..=20 {
            assert_eq!(data.tau(n).unwrap(), (n as u128 + 1).pow(2));
        }
        let s3 = ManifoldParams::sphere(3).unwrap();
        assert_eq!(eigenspace_dim(&s3, 1).unwrap(), 4);
        let cp2 = ManifoldParams::new(ManifoldFamily::ComplexProjective, 4).unwrap();
        assert_eq!(eigenspace_dim(&cp2, 1).unwrap(), 8);
        let cay = ManifoldParams::cayley_plane();
        assert_eq!(eigenspace_dim(&cay, 1).unwrap(), 26);
        assert_eq!(eigenspace_dim(&cay, 2).unwrap(), 324);
    }

    fn binomial(n: u128, k: u128) -> u128 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sphere_dimensions_match_binomial_formula() {
        for d in 2..8usize {
            let p = ManifoldParams::sphere(d).unwrap();
            for k in 0..15u128 {
                let expected = binomial(k + d as u128, d as u128)
                    - if k >= 2 { binomial(k + d as u128 - 2, d as u128) } else { 0 };
                assert_eq!(eigenspace_dim(&p, k as usize).unwrap(), expected, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn real_projective_uses_even_degrees() {
        let rp = ManifoldParams::new(ManifoldFamily::RealProjective, 2).unwrap();
        let s = ManifoldParams::sphere(2).unwrap();
        for k in 0..10 {
            assert_eq!(eigenspace_dim(&rp, k).unwrap(), eigenspace_dim(&s, 2 * k).unwrap());
        }
    }

    #[test]
    fn admissibility() {
        assert!(ManifoldParams::new(ManifoldFamily::ComplexProjective, 5).is_err());
        assert!(ManifoldParams::new(ManifoldFamily::QuaternionicProjective, 10).is_err());
        assert!(ManifoldParams::new(ManifoldFamily::CayleyPlane, 8).is_err());
        assert!(ManifoldParams::new(ManifoldFamily::Sphere, 1).is_err());
        assert!(ManifoldParams::new(ManifoldFamily::QuaternionicProjective, 12).is_ok());
    }

    #[test]
    fn weyl_ratio_examples() {
        let s2 = ManifoldParams::sphere(2).unwrap();
        assert!((weyl_ratio(&s2, 10).unwrap() - 121.0 / 110.0).abs() < 1e-12);
        assert!((weyl_ratio(&s2, 100).unwrap() - 101.0 / 100.0).abs() < 1e-12);
        for p in all_families() {
            let r = weyl_ratio(&p, 1).unwrap();
            assert!(r.is_finite() && r > 0.0);
        }
    }

    #[test]
    fn dimension_growth_order() {
        for p in all_families() {
            let ratios: Vec<f64> = (10..=40)
                .map(|k| eigenspace_dim(&p, k).unwrap() as f64 / (k as f64).powi(p.d as i32 - 1))
                .collect();
            let max = ratios.iter().copied().fold(0.0, f64::max);
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            // P^16(Cay) carries a (1 + 11/k)^{15}-type correction, so its band
            // over this range is wide (about 88x) though still fixed.
            assert!(min > 0.0 && max / min < 100.0, "{p}: {min}..{max}");
        }
    }

    #[test]
    fn eigenvalue_ratio_tends_to_one() {
        for p in all_families() {
            for n in 10..200 {
                let r = eigenvalue(&p, n + 1) / eigenvalue(&p, n);
                assert!((r - 1.0).abs() < 3.0 / n as f64, "{p} N={n}");
            }
        }
    }

    #[test]
    fn sobolev_first_block() {
        let s2 = ManifoldParams::sphere(2).unwrap();
        let spec = sobolev_multiplier(&s2, 2.0).unwrap();
        let data = SpectralData::new(s2, 3).unwrap();
        let m = truncate_multiplier(&spec, &data, 3).unwrap();
        assert_eq!(m.as_diagonal().unwrap(), vec![0.5; 3]);
        assert!(sobolev_multiplier(&s2, 0.0).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let data = SpectralData::new(ManifoldParams::sphere(2).unwrap(), 2).unwrap();
        assert_eq!(data.to_csv(), "k,theta,dim,tau\n0,0,1,1\n1,2,3,4\n2,6,5,9\n");
    }
}
