use crate::error::Result;
use crate::statfun::StreamRng;

use super::{Model, Point};

type Sampler = dyn Fn(&Point, f64, &mut StreamRng) -> Result<Point> + Send + Sync;
type Region = dyn Fn(&Point) -> bool + Send + Sync;

/// A model assembled from a replicate generator and a region indicator.
///
/// No optional capability is available: oracle mode, ABC and the exact
/// p-value are rejected with [`crate::Error::Unsupported`].
pub struct CustomModel {
    name: String,
    dim: usize,
    n: f64,
    sampler: Box<Sampler>,
    region: Box<Region>,
}

impl CustomModel {
    pub fn new<S, R>(name: impl Into<String>, dim: usize, n: f64, sampler: S, region: R) -> Self
    where
        S: Fn(&Point, f64, &mut StreamRng) -> Result<Point> + Send + Sync + 'static,
        R: Fn(&Point) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            n,
            sampler: Box::new(sampler),
            region: Box::new(region),
        }
    }
}

impl std::fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

impl Model for CustomModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_size(&self) -> f64 {
        self.n
    }

    fn sample_replicate(&self, center: &Point, tau: f64, rng: &mut StreamRng) -> Result<Point> {
        self.check_dim(center)?;
        let out = (self.sampler)(center, tau, rng)?;
        self.check_dim(&out)?;
        Ok(out)
    }

    fn in_region(&self, point: &Point) -> Result<bool> {
        self.check_dim(point)?;
        Ok((self.region)(point))
    }
}
