use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::resample::ScaleTuple;
use crate::statfun::{gamma_draw, gamma_reg_lower, gamma_reg_upper, ln_gamma, StreamRng};

use super::{Capabilities, Model, Point};

/// `Y = √n·X̄` for i.i.d. exponential observations: `Y ~ Gamma(shape n,
/// mean η)`, with region `η ≤ √n` (mean parameter `μ ≤ 1`).
///
/// A replicate at scale `τ` is `Gamma(shape n/τ², mean y)`.
#[derive(Debug, Clone)]
pub struct ExponentialMeanModel {
    n: f64,
    name: String,
    quad: QuadOptions,
}

impl ExponentialMeanModel {
    pub fn new(n: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Usage(format!(
                "sample size must be positive, got {n}"
            )));
        }
        Ok(Self {
            n,
            name: format!("exponential(n={n})"),
            quad: QuadOptions {
                abs_tol: 1e-10,
                rel_tol: 1e-10,
                max_intervals: 400,
            },
        })
    }

    pub fn with_quadrature(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    pub fn observation_from_xbar(&self, xbar: f64) -> Result<Point> {
        Point::scalar(self.n.sqrt() * xbar)
    }

    fn threshold(&self) -> f64 {
        self.n.sqrt()
    }

    fn positive_center(&self, y: &Point) -> Result<f64> {
        self.check_dim(y)?;
        let c = y.coords()[0];
        if !(c > 0.0) {
            return Err(Error::Domain(format!(
                "gamma replicates need a positive mean, got {c}"
            )));
        }
        Ok(c)
    }

    fn prob_scalar(&self, y: f64, taus: &[f64]) -> Result<f64> {
        let shape = self.n / (taus[0] * taus[0]);
        if taus.len() == 1 {
            return gamma_reg_lower(shape, self.threshold() * shape / y);
        }
        // ∫ α̃_{k−1}(y*, τ₂, …) Gamma(y*; shape, mean y) dy*, over u = ln y*.
        let scale = y / shape;
        let log_norm = -ln_gamma(shape) - shape * scale.ln();
        let rest = &taus[1..];
        let centre = y.ln();
        let lo = centre - (12.0 / shape.sqrt() + 40.0 / shape);
        let hi = centre + (1.0 + (12.0 * shape.sqrt() + 40.0) / shape).ln();
        let r = integrate(
            |u| {
                let ys = u.exp();
                let dens = (log_norm + shape * u - ys / scale).exp();
                if dens == 0.0 {
                    return Ok(0.0);
                }
                Ok(dens * self.prob_scalar(ys, rest)?)
            },
            lo,
            hi,
            self.quad,
        )?;
        Ok(r.value.clamp(0.0, 1.0))
    }
}

impl Model for ExponentialMeanModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        1
    }

    fn sample_size(&self) -> f64 {
        self.n
    }

    fn sample_replicate(&self, center: &Point, tau: f64, rng: &mut StreamRng) -> Result<Point> {
        let mean = self.positive_center(center)?;
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {tau}")));
        }
        let shape = self.n / (tau * tau);
        Point::scalar(gamma_draw(rng, shape, mean / shape)?)
    }

    fn in_region(&self, point: &Point) -> Result<bool> {
        self.check_dim(point)?;
        Ok(point.coords()[0] <= self.threshold())
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::ALL
    }

    fn project_to_boundary(&self, y: &Point) -> Result<Point> {
        self.check_dim(y)?;
        Point::scalar(self.threshold())
    }

    /// `â = −φ¹¹¹/6` with `φ¹¹¹ = −2/√n`.
    fn acceleration(&self) -> Result<f64> {
        Ok(1.0 / (3.0 * self.n.sqrt()))
    }

    fn exact_pvalue(&self, y: &Point) -> Result<f64> {
        self.check_dim(y)?;
        let c = y.coords()[0];
        if c <= 0.0 {
            return Ok(1.0);
        }
        // Pr{Y ≥ y} for Y ~ Gamma(shape n, mean √n), i.e. rate √n.
        gamma_reg_upper(self.n, c * self.n.sqrt())
    }

    fn one_step_prob(&self, y: &Point, tau: f64) -> Result<f64> {
        let c = self.positive_center(y)?;
        let scales = ScaleTuple::one(tau)?;
        self.prob_scalar(c, scales.taus())
    }

    fn k_step_prob(&self, y: &Point, scales: &ScaleTuple) -> Result<f64> {
        let c = self.positive_center(y)?;
        self.prob_scalar(c, scales.taus())
    }

    fn boundary_point(&self) -> Result<Point> {
        Point::scalar(self.threshold())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceleration_values() {
        let a10 = ExponentialMeanModel::new(10.0)
            .unwrap()
            .acceleration()
            .unwrap();
        assert!((a10 - 0.105_409).abs() < 1e-5);
        let a100 = ExponentialMeanModel::new(100.0)
            .unwrap()
            .acceleration()
            .unwrap();
        assert!((a100 - 0.033_333).abs() < 1e-6);
    }

    #[test]
    fn boundary_inclusive_and_projection() {
        let m = ExponentialMeanModel::new(10.0).unwrap();
        let b = Point::scalar(10f64.sqrt()).unwrap();
        assert!(m.in_region(&b).unwrap());
        let p = m.project_to_boundary(&Point::scalar(7.3).unwrap()).unwrap();
        assert_eq!(p.coords()[0], 10f64.sqrt());
    }

    #[test]
    fn nonpositive_center_is_domain_error() {
        let m = ExponentialMeanModel::new(10.0).unwrap();
        let mut rng = crate::statfun::RandomStream::new(1).rng();
        let y = Point::scalar(-1.0).unwrap();
        assert!(matches!(
            m.sample_replicate(&y, 1.0, &mut rng),
            Err(Error::Domain(_))
        ));
        assert!(matches!(m.one_step_prob(&y, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn exact_pvalue_of_worked_example() {
        let m = ExponentialMeanModel::new(10.0).unwrap();
        let y = m.observation_from_xbar(1.571).unwrap();
        assert!((m.exact_pvalue(&y).unwrap() - 0.05).abs() < 5e-4);
    }

    #[test]
    fn two_step_tends_to_one_step_as_second_scale_vanishes() {
        let m = ExponentialMeanModel::new(10.0).unwrap();
        let y = m.observation_from_xbar(1.571).unwrap();
        let t1 = (10.0_f64 / 6.0).sqrt();
        let one = m.one_step_prob(&y, t1).unwrap();
        let two = m
            .k_step_prob(&y, &ScaleTuple::new(&[t1, 1e-4]).unwrap())
            .unwrap();
        assert!((one - two).abs() < 1e-5, "{one} vs {two}");
    }
}
