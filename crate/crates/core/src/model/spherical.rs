use crate::error::{Error, Result};
use crate::resample::ScaleTuple;
use crate::statfun::{noncentral_chisq_cdf, noncentral_chisq_sf, normal_draw, StreamRng};

use super::{Capabilities, Model, Point};

/// `Y ~ N_p(η, I_p)` with the ball `‖η‖ ≤ √n` as the region.
#[derive(Debug, Clone)]
pub struct SphericalNormalModel {
    p: usize,
    n: f64,
    name: String,
}

/// Closed-form geometry of the spherical boundary at `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalGeometry {
    /// Signed distance `‖y‖ − √n`.
    pub v: f64,
    /// Trace of the curvature matrix.
    pub d1: f64,
    /// Trace of its square.
    pub d2: f64,
    /// `d1 − v·d2`.
    pub c: f64,
}

impl SphericalNormalModel {
    pub fn new(p: usize, n: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Usage("dimension p must be >= 1".into()));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Usage(format!(
                "sample size must be positive, got {n}"
            )));
        }
        Ok(Self {
            p,
            n,
            name: format!("spherical(p={p},n={n})"),
        })
    }

    /// Observation `y = √n·x̄` placed on the first axis, from `‖x̄‖²`.
    pub fn observation_from_xbar_norm2(&self, xbar_norm2: f64) -> Result<Point> {
        if !(xbar_norm2 >= 0.0) {
            return Err(Error::Usage(format!("‖x̄‖² must be >= 0, got {xbar_norm2}")));
        }
        Point::on_axis((self.n * xbar_norm2).sqrt(), self.p)
    }

    pub fn observation_from_xbar(&self, xbar: &[f64]) -> Result<Point> {
        let y = Point::new(xbar.iter().map(|x| self.n.sqrt() * x).collect())?;
        self.check_dim(&y)?;
        Ok(y)
    }

    pub fn geometry(&self, y: &Point) -> Result<SphericalGeometry> {
        self.check_dim(y)?;
        let r = y.norm();
        if r == 0.0 {
            return Err(Error::UndefinedProjection("y is the origin".into()));
        }
        let pm1 = (self.p - 1) as f64;
        let v = r - self.n.sqrt();
        let d1 = pm1 / (2.0 * self.n.sqrt());
        let d2 = pm1 / (4.0 * self.n);
        Ok(SphericalGeometry {
            v,
            d1,
            d2,
            c: d1 - v * d2,
        })
    }
}

impl Model for SphericalNormalModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.p
    }

    fn sample_size(&self) -> f64 {
        self.n
    }

    fn sample_replicate(&self, center: &Point, tau: f64, rng: &mut StreamRng) -> Result<Point> {
        self.check_dim(center)?;
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {tau}")));
        }
        let coords = center
            .coords()
            .iter()
            .map(|c| c + tau * normal_draw(rng))
            .collect();
        Point::new(coords)
    }

    fn in_region(&self, point: &Point) -> Result<bool> {
        self.check_dim(point)?;
        Ok(point.norm2() <= self.n)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::ALL
    }

    fn project_to_boundary(&self, y: &Point) -> Result<Point> {
        self.check_dim(y)?;
        let r = y.norm();
        if r == 0.0 {
            return Err(Error::UndefinedProjection("y is the origin".into()));
        }
        let s = self.n.sqrt() / r;
        Point::new(y.coords().iter().map(|c| c * s).collect())
    }

    fn acceleration(&self) -> Result<f64> {
        Ok(0.0)
    }

    fn exact_pvalue(&self, y: &Point) -> Result<f64> {
        self.check_dim(y)?;
        noncentral_chisq_sf(self.p as u32, self.n, y.norm2())
    }

    fn one_step_prob(&self, y: &Point, tau: f64) -> Result<f64> {
        self.check_dim(y)?;
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {tau}")));
        }
        let t2 = tau * tau;
        noncentral_chisq_cdf(self.p as u32, y.norm2() / t2, self.n / t2)
    }

    fn k_step_prob(&self, y: &Point, scales: &ScaleTuple) -> Result<f64> {
        // Normal chains collapse: Y^(k) ~ N(y, Σ τᵢ² I).
        self.one_step_prob(y, scales.total_variance().sqrt())
    }

    fn boundary_point(&self) -> Result<Point> {
        Point::on_axis(self.n.sqrt(), self.p)
    }
}
