//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bodies::{induced_ball, linear_image, Body};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::manifolds::{ManifoldFamily, ManifoldParams};
use crate::ortho::{sphere_harmonics_system, trig_system, OrthonormalSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Expect,
    Volume,
    Radius,
    Widths,
    Verify,
    Scaling,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Expect => "expect",
            Task::Volume => "volume",
            Task::Radius => "radius",
            Task::Widths => "widths",
            Task::Verify => "verify",
            Task::Scaling => "scaling",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::Config(format!("unknown task `{s}`")))
    }
}

/// A Lebesgue exponent; accepts numbers and the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an exponent >= 1 or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                if v >= 1.0 {
                    Ok(Exponent(v))
                } else {
                    Err(E::invalid_value(de::Unexpected::Float(v), &self))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                match v {
                    "inf" | "infinity" => Ok(Exponent(f64::INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// The first `n` functions of `1, √2cos x, √2sin x, …`.
    Trig { n: usize },
    /// Real spherical harmonics up to `max_degree`, optionally truncated.
    SphereHarmonics {
        max_degree: usize,
        #[serde(default)]
        n: Option<usize>,
    },
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec::Trig { n: 3 }
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<Arc<OrthonormalSystem>> {
        let system = match *self {
            SystemSpec::Trig { n } => {
                if n == 0 {
                    return Err(Error::Config("system.n must be positive".into()));
                }
                trig_system(n / 2).truncated(n)?
            }
            SystemSpec::SphereHarmonics { max_degree, n } => {
                let full = sphere_harmonics_system(max_degree)?;
                match n {
                    Some(n) => full.truncated(n)?,
                    None => full,
                }
            }
        };
        Ok(Arc::new(system))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Euclidean {
        n: usize,
    },
    Cube {
        n: usize,
    },
    CrossPolytope {
        n: usize,
    },
    /// `diag(axes)·B₂ⁿ`.
    Ellipsoid {
        axes: Vec<f64>,
    },
    /// `diag(diag)·B_(J,p)`, or `B_(J,p)` without `diag`.
    Induced {
        system: SystemSpec,
        p: Exponent,
        #[serde(default)]
        diag: Option<Vec<f64>>,
    },
    Polar {
        system: SystemSpec,
        p: Exponent,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<Body> {
        Ok(match self {
            BodySpec::Euclidean { n } => Body::euclidean(*n),
            BodySpec::Cube { n } => Body::cube(*n),
            BodySpec::CrossPolytope { n } => Body::cross_polytope(*n),
            BodySpec::Ellipsoid { axes } => linear_image(&Body::euclidean(axes.len()), &Matrix::diag(axes))?,
            BodySpec::Induced { system, p, diag } => {
                let base = induced_ball(system.build()?, p.0)?;
                match diag {
                    Some(d) => linear_image(&base, &Matrix::diag(d))?,
                    None => base,
                }
            }
            BodySpec::Polar { system, p } => Body::induced_polar(system.build()?, p.0)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub family: ManifoldFamily,
    #[serde(default)]
    pub d: Option<usize>,
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<ManifoldParams> {
        ManifoldParams::new(self.family, self.d.unwrap_or(self.family.default_dim()))
    }
}

/// One experiment. Only `task` and `seed` are always required; each task
/// reads the fields it needs and supplies defaults for the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub body: Option<BodySpec>,
    /// Reference body for volumes, target gauge for radii and widths.
    #[serde(default)]
    pub target: Option<BodySpec>,
    #[serde(default)]
    pub p: Option<Exponent>,
    #[serde(default)]
    pub q: Option<Exponent>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Inclusive `[N_lo, N_hi]` for spectral scaling.
    #[serde(default)]
    pub n_range: Option<[usize; 2]>,
    #[serde(default)]
    pub manifold: Option<ManifoldSpec>,
    /// Diagonal of `A` for width tables.
    #[serde(default)]
    pub diag: Option<Vec<f64>>,
    #[serde(default)]
    pub section_dim: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub trials: Option<usize>,
    /// Verification check name, or `"all"`.
    #[serde(default)]
    pub check: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses JSON text; `origin` prefixes diagnostics.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Minimal config for a task.
    pub fn for_task(task: Task, seed: u64) -> Self {
        Self {
            task,
            seed,
            system: None,
            body: None,
            target: None,
            p: None,
            q: None,
            gamma: None,
            n: None,
            n_range: None,
            manifold: None,
            diag: None,
            section_dim: None,
            samples: None,
            restarts: None,
            trials: None,
            check: None,
            output: None,
        }
    }
}

pub(crate) fn required<T: Clone>(value: &Option<T>, field: &str, task: Task) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Config(format!("field `{field}` is required for task {}", task.name())))
}
