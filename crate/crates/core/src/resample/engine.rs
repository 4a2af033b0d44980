use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Model, Point};
use crate::statfun::RandomStream;

use super::{BootstrapCell, BootstrapTable, ScalePlan, ScaleTuple};

/// How cell probabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Count chains ending in the region; every draw is addressed by
    /// `(seed, cell, chain, step)`.
    MonteCarlo { seed: u64 },
    /// Use the model's probability oracles; the plan's replicate count is
    /// only a nominal B for the variances.
    Oracle,
}

/// Runs `f` on a pool capped at `workers` threads, or on the global pool.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Usage(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn run_chain(
    model: &dyn Model,
    y: &Point,
    scales: &ScaleTuple,
    chain: &RandomStream,
) -> Result<bool> {
    let mut point = y.clone();
    for (step, &tau) in scales.taus().iter().enumerate() {
        let mut rng = chain.child(step as u64).rng();
        point = model.sample_replicate(&point, tau, &mut rng)?;
    }
    model.in_region(&point)
}

/// Runs `b` replicate chains `y → y* → (y**) → (y***)`, one draw per step,
/// and counts those ending in the region. Chain `i` uses `stream.child(i)`.
pub fn run_cell(
    model: &dyn Model,
    y: &Point,
    scales: &ScaleTuple,
    b: usize,
    stream: &RandomStream,
) -> Result<BootstrapCell> {
    if b == 0 {
        return Err(Error::Usage("a cell needs at least one replicate".into()));
    }
    model.check_dim(y)?;
    let count = (0..b as u64)
        .into_par_iter()
        .map(|i| run_chain(model, y, scales, &stream.child(i)).map(u64::from))
        .try_reduce(|| 0, |a, c| Ok(a + c))?;
    BootstrapCell::from_count(*scales, count, b)
}

/// Oracle counterpart of [`run_cell`].
pub fn oracle_cell(
    model: &dyn Model,
    y: &Point,
    scales: &ScaleTuple,
    nominal_b: usize,
) -> Result<BootstrapCell> {
    let alpha = model.k_step_prob(y, scales)?;
    BootstrapCell::from_probability(*scales, alpha, nominal_b)
}

fn wrap(cell: usize, scales: &ScaleTuple, e: Error) -> Error {
    match e {
        Error::Unsupported { .. } => e,
        other => Error::Cell {
            cell,
            scales: scales.to_string(),
            source: Box::new(other),
        },
    }
}

/// Evaluates every cell of `plan` at observation `y`.
///
/// The result depends only on the model, `y`, the plan and the mode; worker
/// count and scheduling never change it.
pub fn build_table(
    model: &dyn Model,
    y: &Point,
    plan: &ScalePlan,
    mode: Mode,
    workers: Option<usize>,
) -> Result<BootstrapTable> {
    model.check_dim(y)?;
    let b = plan.replicates_per_cell();
    let cells = with_workers(workers, || -> Result<Vec<BootstrapCell>> {
        match mode {
            Mode::MonteCarlo { seed } => {
                let root = RandomStream::new(seed);
                plan.cells()
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        run_cell(model, y, s, b, &root.child(i as u64)).map_err(|e| wrap(i, s, e))
                    })
                    .collect()
            }
            Mode::Oracle => plan
                .cells()
                .par_iter()
                .enumerate()
                .map(|(i, s)| oracle_cell(model, y, s, b).map_err(|e| wrap(i, s, e)))
                .collect(),
        }
    })??;
    Ok(BootstrapTable {
        cells,
        master_seed: match mode {
            Mode::MonteCarlo { seed } => Some(seed),
            Mode::Oracle => None,
        },
        model: model.name().to_string(),
        observation: y.coords().to_vec(),
    })
}
