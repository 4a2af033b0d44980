use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Scales `(τ₁[, τ₂[, τ₃]])` of one multistep cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleTuple<T = f64> {
    taus: [T; 3],
    k: usize,
}

impl<T: Scalar> ScaleTuple<T> {
    pub fn new(taus: &[T]) -> Result<Self> {
        if taus.is_empty() || taus.len() > 3 {
            return Err(Error::Usage(format!(
                "a scale tuple has 1 to 3 scales, got {}",
                taus.len()
            )));
        }
        if let Some(bad) = taus.iter().find(|t| !(**t > T::zero()) || !t.is_finite()) {
            return Err(Error::Domain(format!("scales must be positive, got {bad}")));
        }
        let mut arr = [T::zero(); 3];
        arr[..taus.len()].copy_from_slice(taus);
        Ok(Self {
            taus: arr,
            k: taus.len(),
        })
    }

    /// Scale tuple built from squared scales `τᵢ²`.
    pub fn from_squares(tau2: &[T]) -> Result<Self> {
        let taus: Vec<T> = tau2.iter().map(|t| t.sqrt()).collect();
        Self::new(&taus)
    }

    pub fn one(tau: T) -> Result<Self> {
        Self::new(&[tau])
    }

    /// Number of steps.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn taus(&self) -> &[T] {
        &self.taus[..self.k]
    }

    pub fn first(&self) -> T {
        self.taus[0]
    }

    /// The remaining steps after the first, if any.
    pub fn tail(&self) -> Option<Self> {
        (self.k > 1).then(|| Self::new(&self.taus[1..self.k]).expect("tail of valid tuple"))
    }

    /// `Σ τᵢ²`, the variance scale of the collapsed normal chain.
    pub fn total_variance(&self) -> T {
        self.taus().iter().fold(T::zero(), |acc, &t| acc + t * t)
    }

    pub fn cast<U: Scalar>(&self) -> ScaleTuple<U> {
        let taus: Vec<U> = self
            .taus()
            .iter()
            .map(|t| U::lit(t.to_f64_lossy()))
            .collect();
        ScaleTuple::new(&taus).expect("cast of valid tuple")
    }
}

impl<T: Scalar> fmt::Display for ScaleTuple<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau=(")?;
        for (i, t) in self.taus().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t:.6}")?;
        }
        write!(f, ")")
    }
}

/// Ordered grid of cells and the number of chains run per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePlan {
    cells: Vec<ScaleTuple>,
    replicates_per_cell: usize,
}

/// Ratios `n′/n` of the one-step grid (`n₁ = 3, 6, 10, 15, 21` at `n = 10`).
pub const FIRST_STEP_RATIOS: [f64; 5] = [0.3, 0.6, 1.0, 1.5, 2.1];
/// Ratios used for the second and third steps (`n₂, n₃ ∈ {6, 15}` at `n = 10`).
pub const LATER_STEP_RATIOS: [f64; 2] = [0.6, 1.5];

impl ScalePlan {
    pub fn new(cells: Vec<ScaleTuple>, replicates_per_cell: usize) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Usage("scale plan has no cells".into()));
        }
        if replicates_per_cell < 100 {
            return Err(Error::Usage(format!(
                "at least 100 replicates per cell are required, got {replicates_per_cell}"
            )));
        }
        if cells.windows(2).any(|w| w[0].k() > w[1].k()) {
            return Err(Error::Usage(
                "cells must be ordered by step count (1-step, then 2-step, then 3-step)".into(),
            ));
        }
        Ok(Self {
            cells,
            replicates_per_cell,
        })
    }

    /// The 5 + 10 + 20 cell grid: `τ₁² = 1/r` for `r` in
    /// [`FIRST_STEP_RATIOS`], `τ₂², τ₃² = 1/r` for `r` in [`LATER_STEP_RATIOS`].
    pub fn default_for(n: f64, replicates_per_cell: usize) -> Result<Self> {
        if !(n >= 2.0) {
            return Err(Error::Usage(format!("sample size must be >= 2, got {n}")));
        }
        let t1: Vec<f64> = FIRST_STEP_RATIOS
            .iter()
            .map(|r| (n / (r * n)).sqrt())
            .collect();
        let t2: Vec<f64> = LATER_STEP_RATIOS
            .iter()
            .map(|r| (n / (r * n)).sqrt())
            .collect();
        let mut cells = Vec::with_capacity(35);
        for &a in &t1 {
            cells.push(ScaleTuple::new(&[a])?);
        }
        for &a in &t1 {
            for &b in &t2 {
                cells.push(ScaleTuple::new(&[a, b])?);
            }
        }
        for &a in &t1 {
            for &b in &t2 {
                for &c in &t2 {
                    cells.push(ScaleTuple::new(&[a, b, c])?);
                }
            }
        }
        Self::new(cells, replicates_per_cell)
    }

    pub fn cells(&self) -> &[ScaleTuple] {
        &self.cells
    }

    pub fn replicates_per_cell(&self) -> usize {
        self.replicates_per_cell
    }

    pub fn with_replicates(mut self, b: usize) -> Result<Self> {
        self.replicates_per_cell = b;
        Self::new(self.cells, b)
    }

    /// Cells with at most `k` steps (a prefix, by the ordering invariant).
    pub fn up_to_steps(&self, k: usize) -> &[ScaleTuple] {
        let end = self
            .cells
            .iter()
            .position(|c| c.k() > k)
            .unwrap_or(self.cells.len());
        &self.cells[..end]
    }

    /// Number of cells with exactly 1, 2 and 3 steps.
    pub fn step_counts(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for c in &self.cells {
            out[c.k() - 1] += 1;
        }
        out
    }

    /// Reads a scale grid from CSV with columns `tau1,tau2,tau3`
    /// (scales, not squares; empty for absent steps).
    pub fn from_scales_csv<R: std::io::Read>(
        reader: R,
        replicates_per_cell: usize,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut cells = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut taus = Vec::new();
            for field in rec.iter().take(3) {
                if field.is_empty() {
                    break;
                }
                let t: f64 = field.parse().map_err(|_| {
                    Error::Parse(format!(
                        "scales row {}: `{field}` is not a number",
                        line + 1
                    ))
                })?;
                taus.push(t);
            }
            cells.push(ScaleTuple::new(&taus)?);
        }
        cells.sort_by_key(|c| c.k());
        Self::new(cells, replicates_per_cell)
    }

    pub fn from_scales_file(path: &Path, replicates_per_cell: usize) -> Result<Self> {
        Self::from_scales_csv(std::fs::File::open(path)?, replicates_per_cell)
    }
}

/// Convenience wrapper for [`ScalePlan::default_for`].
pub fn default_scale_plan(n: f64, replicates_per_cell: usize) -> Result<ScalePlan> {
    ScalePlan::default_for(n, replicates_per_cell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_at_n10() {
        let plan = default_scale_plan(10.0, 10_000).unwrap();
        let t1sq: Vec<f64> = plan
            .up_to_steps(1)
            .iter()
            .map(|c| c.first().powi(2))
            .collect();
        let expect = [10.0 / 3.0, 10.0 / 6.0, 1.0, 10.0 / 15.0, 10.0 / 21.0];
        for (a, b) in t1sq.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let inv: Vec<f64> = plan
            .up_to_steps(1)
            .iter()
            .map(|c| 1.0 / c.first())
            .collect();
        for (a, b) in inv.iter().zip([0.55, 0.78, 1.0, 1.23, 1.45]) {
            assert!((a - b).abs() < 0.01);
        }
        let later: Vec<f64> = plan.cells()[5..7]
            .iter()
            .map(|c| c.taus()[1].powi(2))
            .collect();
        assert!((later[0] - 10.0 / 6.0).abs() < 1e-12);
        assert!((later[1] - 10.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn cell_counts_any_n() {
        for n in [2.0, 10.0, 1000.0] {
            let plan = default_scale_plan(n, 100).unwrap();
            assert_eq!(plan.step_counts(), [5, 10, 20]);
            assert_eq!(plan.up_to_steps(2).len(), 15);
            assert_eq!(plan.cells().len(), 35);
        }
    }

    #[test]
    fn invalid_tuples_and_plans() {
        assert!(ScaleTuple::new(&[1.0, 0.0]).is_err());
        assert!(ScaleTuple::<f64>::new(&[]).is_err());
        assert!(ScaleTuple::new(&[1.0, 1.0, 1.0, 1.0]).is_err());
        let c = ScaleTuple::new(&[1.0]).unwrap();
        assert!(ScalePlan::new(vec![c], 99).is_err());
        assert!(ScalePlan::new(vec![], 100).is_err());
        let two = ScaleTuple::new(&[1.0, 1.0]).unwrap();
        assert!(ScalePlan::new(vec![two, c], 100).is_err());
        assert!(default_scale_plan(1.0, 100).is_err());
    }

    #[test]
    fn scales_csv() {
        let text = "tau1,tau2,tau3\n1.0,0.5,\n2.0,,\n1.0,1.0,1.0\n";
        let plan = ScalePlan::from_scales_csv(text.as_bytes(), 200).unwrap();
        assert_eq!(plan.step_counts(), [1, 1, 1]);
        assert_eq!(plan.cells()[0].taus(), &[2.0]);
    }
}
