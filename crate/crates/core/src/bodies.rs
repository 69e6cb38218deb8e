//! Convex origin-symmetric bodies given by their gauge (Minkowski functional).

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2, Matrix, Subspace};
use crate::manifolds::SpectralData;
use crate::optim::{maximize_on_sphere, nelder_mead, NelderMeadOptions};
use crate::ortho::{conjugate_exponent, OrthonormalSystem};
use crate::parallel::{label_hash, stream_rng};

/// A convex origin-symmetric body in ℝⁿ.
#[derive(Debug, Clone)]
pub struct Body {
    dim: usize,
    kind: BodyKind,
}

#[derive(Debug, Clone)]
pub enum BodyKind {
    /// Unit Euclidean ball B₂ⁿ.
    Euclidean,
    /// Unit cube, the ℓ∞ ball.
    Cube,
    /// Cross-polytope, the ℓ₁ ball.
    CrossPolytope,
    /// `B_(J,p)`: unit ball of `α ↦ ‖Σ αₖφₖ‖_p`.
    Induced { system: Arc<OrthonormalSystem>, p: f64 },
    /// Polar of `B_(J,p)`; its gauge is the support function of `B_(J,p)`.
    InducedPolar { system: Arc<OrthonormalSystem>, p: f64 },
    /// `A·V`.
    LinearImage { base: Box<Body>, a: Matrix, a_inv: Matrix },
    /// `V ∩ L`, in the frame coordinates of `L`.
    Section { base: Box<Body>, subspace: Subspace },
    /// `P_L V`, in the frame coordinates of `L`.
    Projection {
        base: Box<Body>,
        subspace: Subspace,
        complement: Option<Subspace>,
        /// Inverse Gram matrix of the projected ellipsoid, when `V` is one.
        ellipsoid_inv: Option<Matrix>,
    },
}

impl Body {
    pub fn euclidean(n: usize) -> Self {
        Self { dim: n, kind: BodyKind::Euclidean }
    }

    pub fn cube(n: usize) -> Self {
        Self { dim: n, kind: BodyKind::Cube }
    }

    pub fn cross_polytope(n: usize) -> Self {
        Self { dim: n, kind: BodyKind::CrossPolytope }
    }

    /// Polar body of `B_(J,p)`.
    pub fn induced_polar(system: impl Into<Arc<OrthonormalSystem>>, p: f64) -> Result<Self> {
        let system = system.into();
        check_exponent(p)?;
        Ok(Self {
            dim: system.n(),
            kind: BodyKind::InducedPolar { system, p },
        })
    }

    /// The section `V ∩ L` as a body in the coordinates of `L`.
    pub fn section(&self, subspace: &Subspace) -> Result<Self> {
        self.check_subspace(subspace)?;
        Ok(Self {
            dim: subspace.dim(),
            kind: BodyKind::Section {
                base: Box::new(self.clone()),
                subspace: subspace.clone(),
            },
        })
    }

    /// The projection `P_L V` as a body in the coordinates of `L`.
    pub fn projection(&self, subspace: &Subspace) -> Result<Self> {
        self.check_subspace(subspace)?;
        let ellipsoid_inv = match self.ellipsoid_matrix() {
            Some(m) => {
                // P_L(M·B₂ⁿ) = {y : yᵀ(UᵀMMᵀU)⁻¹y ≤ 1} in L-coordinates.
                let mt_u: Vec<Vec<f64>> = subspace
                    .frame()
                    .iter()
                    .map(|u| m.transpose().mul_vec(u))
                    .collect();
                let s = subspace.dim();
                let mut g = Matrix::zeros(s, s);
                for i in 0..s {
                    for j in 0..s {
                        g[(i, j)] = dot(&mt_u[i], &mt_u[j]);
                    }
                }
                Some(g.inverse()?)
            }
            None => None,
        };
        Ok(Self {
            dim: subspace.dim(),
            kind: BodyKind::Projection {
                base: Box::new(self.clone()),
                subspace: subspace.clone(),
                complement: subspace.complement(),
                ellipsoid_inv,
            },
        })
    }

    fn check_subspace(&self, subspace: &Subspace) -> Result<()> {
        if subspace.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: subspace.ambient_dim(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// The Minkowski functional `‖x‖_V`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            BodyKind::Euclidean => norm2(x),
            BodyKind::Cube => x.iter().map(|v| v.abs()).fold(0.0, f64::max),
            BodyKind::CrossPolytope => x.iter().map(|v| v.abs()).sum(),
            BodyKind::Induced { system, p } => system.lp_norm_unchecked(x, *p),
            BodyKind::InducedPolar { system, p } => dual_gauge_unchecked(system, *p, x),
            BodyKind::LinearImage { base, a_inv, .. } => base.gauge(&a_inv.mul_vec(x)),
            BodyKind::Section { base, subspace } => base.gauge(&subspace.embed(x)),
            BodyKind::Projection {
                base,
                subspace,
                complement,
                ellipsoid_inv,
            } => {
                if let Some(g) = ellipsoid_inv {
                    return dot(x, &g.mul_vec(x)).max(0.0).sqrt();
                }
                let point = subspace.embed(x);
                let Some(comp) = complement else {
                    return base.gauge(&point);
                };
                // ‖y‖_{PV} = min over the fibre {y + w : w ⊥ L} of ‖·‖_V.
                let fibre = |z: &[f64]| {
                    let mut v = point.clone();
                    for (c, w) in z.iter().zip(comp.frame()) {
                        linalg::axpy(*c, w, &mut v);
                    }
                    base.gauge(&v)
                };
                let scale = norm2(x).max(1e-300);
                let opts = NelderMeadOptions {
                    initial_step: 0.25 * scale,
                    x_tol: 1e-10 * scale,
                    f_tol: 1e-13 * scale,
                    max_evals: 2000,
                    restarts: 2,
                };
                nelder_mead(fibre, &vec![0.0; comp.dim()], &opts).value
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.gauge(x) <= 1.0
    }

    /// `R` with `V ⊆ R·B₂ⁿ`.
    pub fn euclidean_radius_bound(&self) -> f64 {
        let n = self.dim as f64;
        match &self.kind {
            BodyKind::Euclidean | BodyKind::CrossPolytope => 1.0,
            BodyKind::Cube => n.sqrt(),
            BodyKind::Induced { system, p } => {
                if *p >= 2.0 {
                    1.0
                } else {
                    // ‖α‖₂² = ⟨f, f⟩ ≤ ‖f‖_∞‖f‖₁ ≤ M√n‖α‖₂‖f‖_p.
                    max_sup(system) * n.sqrt()
                }
            }
            BodyKind::InducedPolar { system, p } => {
                if *p <= 2.0 {
                    1.0
                } else {
                    // h(x) ≥ ‖x‖₂²/‖x‖_(J,∞) ≥ ‖x‖₂/(M√n).
                    max_sup(system) * n.sqrt()
                }
            }
            BodyKind::LinearImage { base, a, .. } => a.spectral_norm() * base.euclidean_radius_bound(),
            BodyKind::Section { base, .. } | BodyKind::Projection { base, .. } => base.euclidean_radius_bound(),
        }
    }

    /// True when the gauge is exactly the Euclidean norm.
    pub fn is_euclidean(&self) -> bool {
        match &self.kind {
            BodyKind::Euclidean => true,
            BodyKind::Induced { p, .. } | BodyKind::InducedPolar { p, .. } => *p == 2.0,
            _ => false,
        }
    }

    /// `M` with `V = M·B₂ⁿ`, when `V` is an ellipsoid.
    pub fn ellipsoid_matrix(&self) -> Option<Matrix> {
        match &self.kind {
            BodyKind::Euclidean => Some(Matrix::identity(self.dim)),
            BodyKind::Induced { p, .. } | BodyKind::InducedPolar { p, .. } if *p == 2.0 => {
                Some(Matrix::identity(self.dim))
            }
            BodyKind::LinearImage { base, a, .. } => {
                base.ellipsoid_matrix().and_then(|m| a.matmul(&m).ok())
            }
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// JSON descriptor `{kind, system, p, a}`.
    pub fn descriptor(&self) -> Value {
        match &self.kind {
            BodyKind::Euclidean => json!({"kind": "euclidean", "n": self.dim}),
            BodyKind::Cube => json!({"kind": "cube", "n": self.dim}),
            BodyKind::CrossPolytope => json!({"kind": "cross_polytope", "n": self.dim}),
            BodyKind::Induced { system, p } => {
                json!({"kind": "induced", "system": system.name(), "p": p_value(*p)})
            }
            BodyKind::InducedPolar { system, p } => {
                json!({"kind": "induced_polar", "system": system.name(), "p": p_value(*p)})
            }
            BodyKind::LinearImage { base, a, .. } => {
                let matrix = match a.as_diagonal() {
                    Some(d) => json!({"diagonal": d}),
                    None => json!({"dense": a.to_rows()}),
                };
                json!({"kind": "linear_image", "base": base.descriptor(), "a": matrix})
            }
            BodyKind::Section { base, subspace } => {
                json!({"kind": "section", "base": base.descriptor(), "frame": subspace.frame()})
            }
            BodyKind::Projection { base, subspace, .. } => {
                json!({"kind": "projection", "base": base.descriptor(), "frame": subspace.frame()})
            }
        }
    }
}

fn p_value(p: f64) -> Value {
    if p.is_infinite() {
        json!("inf")
    } else {
        json!(p)
    }
}

fn max_sup(system: &OrthonormalSystem) -> f64 {
    system.sup_norms().iter().copied().fold(0.0, f64::max)
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim;
        match &self.kind {
            BodyKind::Euclidean => write!(f, "B2^{n}"),
            BodyKind::Cube => write!(f, "Binf^{n}"),
            BodyKind::CrossPolytope => write!(f, "B1^{n}"),
            BodyKind::Induced { system, p } => write!(f, "B({},{p})", system.name()),
            BodyKind::InducedPolar { system, p } => write!(f, "B({},{p})^o", system.name()),
            BodyKind::LinearImage { base, .. } => write!(f, "A*{base}"),
            BodyKind::Section { base, subspace } => write!(f, "{base}|L{}", subspace.dim()),
            BodyKind::Projection { base, subspace, .. } => write!(f, "P_L{}({base})", subspace.dim()),
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")))
    }
}

/// `B_(J,p)` for the given system.
pub fn induced_ball(system: impl Into<Arc<OrthonormalSystem>>, p: f64) -> Result<Body> {
    let system = system.into();
    check_exponent(p)?;
    Ok(Body {
        dim: system.n(),
        kind: BodyKind::Induced { system, p },
    })
}

/// `A·V`; the gauge is `x ↦ ‖A⁻¹x‖_V`.
pub fn linear_image(base: &Body, a: &Matrix) -> Result<Body> {
    if a.rows() != base.dim || a.cols() != base.dim {
        return Err(Error::DimensionMismatch {
            expected: base.dim,
            got: a.rows(),
        });
    }
    let a_inv = a.inverse()?;
    Ok(Body {
        dim: base.dim,
        kind: BodyKind::LinearImage {
            base: Box::new(base.clone()),
            a: a.clone(),
            a_inv,
        },
    })
}

/// Support function `h(x) = max{⟨x, y⟩ : ‖y‖_(J,p) ≤ 1}` of `B_(J,p)`.
pub fn dual_gauge(system: &OrthonormalSystem, p: f64, x: &[f64]) -> Result<f64> {
    check_exponent(p)?;
    if x.len() != system.n() {
        return Err(Error::DimensionMismatch {
            expected: system.n(),
            got: x.len(),
        });
    }
    Ok(dual_gauge_unchecked(system, p, x))
}

/// Number of random starts for the `p ∈ {1, ∞}` support-function search.
pub const DUAL_RESTARTS: usize = 32;

fn dual_gauge_unchecked(system: &OrthonormalSystem, p: f64, x: &[f64]) -> f64 {
    let r = norm2(x);
    if r == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        return r;
    }
    if p > 1.0 && p.is_finite() {
        return dual_gauge_newton(system, p, x);
    }
    // p ∈ {1, ∞}: maximize the 0-homogeneous ratio ⟨x, u⟩/‖u‖ over the sphere.
    let n = x.len();
    let mut rng = stream_rng(label_hash("dual-gauge"), n as u64);
    let mut starts = vec![x.to_vec()];
    starts.extend((1..DUAL_RESTARTS).map(|_| linalg::gaussian_vector(&mut rng, n)));
    let ratio = |u: &[f64]| dot(x, u) / system.lp_norm_unchecked(u, p);
    let opts = NelderMeadOptions {
        f_tol: 1e-14,
        x_tol: 1e-10,
        ..NelderMeadOptions::default()
    };
    maximize_on_sphere(ratio, &starts, &opts).0.max(0.0)
}

/// For `1 < p < ∞` the concave problem `max_y ⟨x,y⟩ − ‖y‖_p^p/p` has value
/// `h(x)^{p′}/p′`; it is solved by damped Newton.
fn dual_gauge_newton(system: &OrthonormalSystem, p: f64, x: &[f64]) -> f64 {
    let n = x.len();
    let weights = system.quadrature().weights();
    let gp = |y: &[f64]| system.lp_norm_unchecked(y, p).powf(p);
    let psi = |y: &[f64]| dot(x, y) - gp(y) / p;

    // Best point on the ray through x.
    let u: Vec<f64> = x.iter().map(|v| v / norm2(x)).collect();
    let t = (dot(x, &u) / gp(&u)).powf(1.0 / (p - 1.0));
    let mut y: Vec<f64> = u.iter().map(|v| t * v).collect();
    let mut value = psi(&y);

    for _ in 0..200 {
        let f = system.synthesize(&y);
        let fmax = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let floor = 1e-8 * fmax;
        let mut grad = x.to_vec();
        let mut hess = Matrix::zeros(n, n);
        for (i, (&fi, &wi)) in f.iter().zip(weights).enumerate() {
            let row = system.node_values(i);
            let a = fi.abs();
            let g = wi * a.powf(p - 1.0) * fi.signum();
            let h = wi * (p - 1.0) * a.max(floor).powf(p - 2.0);
            for j in 0..n {
                grad[j] -= g * row[j];
                for k in j..n {
                    hess[(j, k)] += h * row[j] * row[k];
                }
            }
        }
        for j in 0..n {
            for k in 0..j {
                hess[(j, k)] = hess[(k, j)];
            }
        }
        let mut dir = hess.solve(&grad).unwrap_or_else(|_| grad.clone());
        let mut decrement = dot(&grad, &dir);
        if !(decrement > 0.0) {
            dir = grad.clone();
            decrement = dot(&grad, &grad);
        }
        // Below this the line search only sees roundoff.
        if decrement <= 1e-15 * (1.0 + value.abs()) {
            break;
        }
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-12 {
            let trial: Vec<f64> = y.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let v = psi(&trial);
            if v >= value + 1e-4 * step * decrement {
                y = trial;
                value = v;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let q = conjugate_exponent(p);
    (q * value.max(0.0)).powf(1.0 / q)
}

/// Shape of a multiplier sequence.
#[derive(Clone)]
pub enum MultiplierProfile {
    /// `λ(θ) = θ^{−γ/2}`.
    Power { gamma: f64 },
    /// `λ ≡ c`.
    Constant(f64),
    /// Explicit `λ₁, λ₂, …`, independent of the spectrum.
    Sequence(Vec<f64>),
    /// Arbitrary `λ(θ)`.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for MultiplierProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiplierProfile::Power { gamma } => write!(f, "Power {{ gamma: {gamma} }}"),
            MultiplierProfile::Constant(c) => write!(f, "Constant({c})"),
            MultiplierProfile::Sequence(v) => write!(f, "Sequence({v:?})"),
            MultiplierProfile::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// A multiplier operator `Λ` acting diagonally on eigenspaces.
#[derive(Debug, Clone)]
pub struct MultiplierSpec {
    pub profile: MultiplierProfile,
    /// First spectral index included (1 skips the constants).
    pub start_index: usize,
    /// Declares `λ` decreasing; truncations are then checked to be
    /// nonincreasing.
    pub class_a: bool,
}

impl MultiplierSpec {
    /// Sobolev-type `θ^{−γ/2}` on the nonconstant spectrum.
    pub fn power(gamma: f64) -> Self {
        Self {
            profile: MultiplierProfile::Power { gamma },
            start_index: 1,
            class_a: true,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            profile: MultiplierProfile::Constant(c),
            start_index: 0,
            class_a: false,
        }
    }

    pub fn sequence(values: Vec<f64>, class_a: bool) -> Self {
        Self {
            profile: MultiplierProfile::Sequence(values),
            start_index: 0,
            class_a,
        }
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static, start_index: usize, class_a: bool) -> Self {
        Self {
            profile: MultiplierProfile::Function(Arc::new(f)),
            start_index,
            class_a,
        }
    }

    /// `λ(θ)` for spectral profiles; `None` for explicit sequences.
    pub fn lambda(&self, theta: f64) -> Option<f64> {
        match &self.profile {
            MultiplierProfile::Power { gamma } => Some(theta.powf(-gamma / 2.0)),
            MultiplierProfile::Constant(c) => Some(*c),
            MultiplierProfile::Sequence(_) => None,
            MultiplierProfile::Function(f) => Some(f(theta)),
        }
    }

    /// The first `n` diagonal entries `λ₁, …, λ_n`.
    pub fn entries(&self, spectral: &SpectralData, n: usize) -> Result<Vec<f64>> {
        let out = match &self.profile {
            MultiplierProfile::Sequence(v) => {
                if n > v.len() {
                    return Err(Error::SpectrumExhausted {
                        requested: n,
                        available: v.len(),
                    });
                }
                v[..n].to_vec()
            }
            _ => {
                let mut out = Vec::with_capacity(n);
                for k in self.start_index..=spectral.max_index() {
                    if out.len() >= n {
                        break;
                    }
                    let lam = self.lambda(spectral.theta(k).expect("tabulated")).expect("spectral profile");
                    let copies = spectral.dim(k).expect("tabulated");
                    let need = (n - out.len()) as u128;
                    out.extend(std::iter::repeat_n(lam, copies.min(need) as usize));
                }
                if out.len() < n {
                    return Err(Error::SpectrumExhausted {
                        requested: n,
                        available: out.len(),
                    });
                }
                out
            }
        };
        if let Some(bad) = out.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("multiplier entry {bad} is not positive")));
        }
        if self.class_a {
            if let Some(i) = out.windows(2).position(|w| w[1] > w[0]) {
                return Err(Error::NotMonotone(i + 1));
            }
        }
        Ok(out)
    }
}

/// `Λ_n = diag{λ₁, …, λ_n}`, eigenvalue blocks repeated by multiplicity.
pub fn truncate_multiplier(spec: &MultiplierSpec, spectral: &SpectralData, n: usize) -> Result<Matrix> {
    Ok(Matrix::diag(&spec.entries(spectral, n)?))
}
