use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::statfun::{std_normal_pdf, z_value};

use super::ScaleTuple;

/// Lower bound applied to oracle probabilities before the z transform.
pub const ORACLE_ALPHA_FLOOR: f64 = 1e-15;

/// One cell of the multiscale grid: its scales, the chain count and the
/// transformed probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCell<T = f64> {
    pub scales: ScaleTuple<T>,
    /// Replicates run (Monte Carlo) or the nominal count used for weights.
    pub b: usize,
    /// Chains ending in the region; `None` for oracle cells.
    pub count: Option<u64>,
    pub alpha: T,
    pub z: T,
    pub var_z: T,
}

/// `(α, z, var_z)` from a count: the count is clamped to `[0.5, B − 0.5]`,
/// `z = −Φ⁻¹(α)` and `var_z = α(1−α) / (B φ(z)²)` by the delta method.
pub fn transform_cell<T: Scalar>(count: u64, b: usize) -> Result<(T, T, T)> {
    let bf = T::from_count(b);
    let half = T::lit(0.5);
    let c = T::lit(count as f64).max(half).min(bf - half);
    let alpha = c / bf;
    let z = z_value(alpha)?;
    Ok((alpha, z, delta_variance(alpha, z, bf)))
}

fn delta_variance<T: Scalar>(alpha: T, z: T, b: T) -> T {
    let dens = std_normal_pdf(z);
    alpha * (T::one() - alpha) / (b * dens * dens)
}

impl<T: Scalar> BootstrapCell<T> {
    pub fn from_count(scales: ScaleTuple<T>, count: u64, b: usize) -> Result<Self> {
        let (alpha, z, var_z) = transform_cell(count, b)?;
        Ok(Self {
            scales,
            b,
            count: Some(count),
            alpha,
            z,
            var_z,
        })
    }

    /// Cell holding an exact probability; `nominal_b` only sets the variance.
    pub fn from_probability(scales: ScaleTuple<T>, alpha: T, nominal_b: usize) -> Result<Self> {
        let floor = T::lit(ORACLE_ALPHA_FLOOR);
        let clamped = alpha.max(floor).min(T::one() - floor);
        let z = z_value(clamped)?;
        Ok(Self {
            scales,
            b: nominal_b,
            count: None,
            alpha,
            z,
            var_z: delta_variance(clamped, z, T::from_count(nominal_b)),
        })
    }

    pub fn k(&self) -> usize {
        self.scales.k()
    }

    /// Variance of z for a single replicate, `B · var_z`.
    pub fn unit_variance(&self) -> T {
        self.var_z * T::from_count(self.b)
    }

    pub fn cast<U: Scalar>(&self) -> BootstrapCell<U> {
        BootstrapCell {
            scales: self.scales.cast(),
            b: self.b,
            count: self.count,
            alpha: U::lit(self.alpha.to_f64_lossy()),
            z: U::lit(self.z.to_f64_lossy()),
            var_z: U::lit(self.var_z.to_f64_lossy()),
        }
    }
}
