//! Problem abstraction: replicate generator plus region indicator.
//!
//! A [`Model`] only has to draw replicates and say whether a point lies in
//! the region. Everything else (probability oracles, boundary projection,
//! acceleration, exact p-value) is an optional capability; a model that
//! lacks one returns [`Error::Unsupported`] rather than an approximation.

mod custom;
mod exponential;
mod spherical;

use serde::{Deserialize, Serialize};

pub use custom::CustomModel;
pub use exponential::ExponentialMeanModel;
pub use spherical::{SphericalGeometry, SphericalNormalModel};

use crate::error::{Error, Result};
use crate::resample::ScaleTuple;
use crate::statfun::StreamRng;

/// A point in the transformed observation space (`y = √n·x̄` or a replicate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Usage("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!(
                "point has non-finite coordinates: {coords:?}"
            )));
        }
        Ok(Self(coords))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    /// `(r, 0, …, 0)` in dimension `p`.
    pub fn on_axis(r: f64, p: usize) -> Result<Self> {
        let mut v = vec![0.0; p.max(1)];
        v[0] = r;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// What a model can do beyond sampling and region membership.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub project_to_boundary: bool,
    pub acceleration: bool,
    pub exact_pvalue: bool,
    pub one_step_prob: bool,
    pub k_step_prob: bool,
    pub boundary_sampling: bool,
}

impl Capabilities {
    pub const ALL: Self = Self {
        project_to_boundary: true,
        acceleration: true,
        exact_pvalue: true,
        one_step_prob: true,
        k_step_prob: true,
        boundary_sampling: true,
    };
}

/// A parametric bootstrap problem.
///
/// `sample_replicate` draws `Y* ~ f(·; center, τ)`. For the scale to carry its
/// usual meaning, an implementation should behave like the mean of `n/τ²`
/// i.i.d. observations rescaled by `√n`; this is the plug-in author's
/// responsibility and is not checked.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;

    /// Dimension `p` of the observation.
    fn dim(&self) -> usize;

    /// Base sample size `n`.
    fn sample_size(&self) -> f64;

    fn sample_replicate(&self, center: &Point, tau: f64, rng: &mut StreamRng) -> Result<Point>;

    /// Region membership; boundary points count as inside.
    fn in_region(&self, point: &Point) -> Result<bool>;

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }

    /// `η̂(y)`, the nearest boundary point.
    fn project_to_boundary(&self, _y: &Point) -> Result<Point> {
        Err(self.unsupported("project_to_boundary"))
    }

    /// Acceleration constant `â`.
    fn acceleration(&self) -> Result<f64> {
        Err(self.unsupported("acceleration"))
    }

    /// Exact p-value `α̂∞(y)`.
    fn exact_pvalue(&self, _y: &Point) -> Result<f64> {
        Err(self.unsupported("exact_pvalue"))
    }

    /// `α̃₁(y, τ) = Pr{Y* ∈ R; y, τ}` without Monte Carlo error.
    fn one_step_prob(&self, _y: &Point, _tau: f64) -> Result<f64> {
        Err(self.unsupported("one_step_prob"))
    }

    /// `α̃_k(y, τ₁, …, τ_k)` without Monte Carlo error.
    fn k_step_prob(&self, _y: &Point, _scales: &ScaleTuple) -> Result<f64> {
        Err(self.unsupported("k_step_prob"))
    }

    /// A point on the boundary used as the true parameter in coverage runs.
    fn boundary_point(&self) -> Result<Point> {
        Err(self.unsupported("boundary_sampling"))
    }

    fn unsupported(&self, capability: &'static str) -> Error {
        Error::Unsupported {
            model: self.name().to_string(),
            capability,
        }
    }

    fn check_dim(&self, point: &Point) -> Result<()> {
        if point.dim() != self.dim() {
            return Err(Error::Usage(format!(
                "model `{}` has dimension {}, point has {}",
                self.name(),
                self.dim(),
                point.dim()
            )));
        }
        Ok(())
    }
}
