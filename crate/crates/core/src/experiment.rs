//! Reproduction runs: Table-2 style rows, z-value curves and coverage.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, solve_on_axis, AnalysisOptions, Ridge};
use crate::error::{Error, ErrorKind, Result};
use crate::fit::{fit_multistep, FitOrder, LinearFit};
use crate::model::{ExponentialMeanModel, Model, Point, SphericalNormalModel};
use crate::pvalue::{self, Method};
use crate::resample::{with_workers, BootstrapTable, Mode, ScalePlan};
use crate::statfun::RandomStream;

/// Built-in models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinKind {
    Spherical { p: usize },
    Exponential,
}

impl BuiltinKind {
    pub fn build(self, n: f64) -> Result<Box<dyn Model>> {
        Ok(match self {
            BuiltinKind::Spherical { p } => Box::new(SphericalNormalModel::new(p, n)?),
            BuiltinKind::Exponential => Box::new(ExponentialMeanModel::new(n)?),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            BuiltinKind::Spherical { .. } => "normal",
            BuiltinKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BuiltinKind {
    type Err = Error;

    /// `normal`/`spherical` (dimension 4 unless set later) or `exponential`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "spherical" => Ok(BuiltinKind::Spherical { p: 4 }),
            "exponential" | "exp" => Ok(BuiltinKind::Exponential),
            other => Err(Error::Usage(format!(
                "unknown model `{other}` (expected spherical or exponential)"
            ))),
        }
    }
}

/// The twelve `(model, target, n)` combinations of the reference table.
pub fn reference_rows() -> Vec<(BuiltinKind, f64, f64)> {
    let mut rows = Vec::new();
    for kind in [BuiltinKind::Spherical { p: 4 }, BuiltinKind::Exponential] {
        for target in [0.05, 0.95] {
            for n in [10.0, 100.0, 1000.0] {
                rows.push((kind, target, n));
            }
        }
    }
    rows
}

/// One row of p-values in percent, with standard errors in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub model: String,
    pub target: f64,
    pub n: f64,
    pub p0: f64,
    pub abc: f64,
    pub p1: f64,
    pub p1_se: f64,
    pub p2: f64,
    pub p2_se: f64,
    pub p3: f64,
    pub p3_se: f64,
    pub ridge_p2: f64,
    pub ridge_p2_se: f64,
    pub ridge_p3: f64,
    pub ridge_p3_se: f64,
    pub exact: f64,
}

/// Computes a row at the observation whose exact p-value is `target`.
pub fn table2_row(
    kind: BuiltinKind,
    n: f64,
    target: f64,
    replicates: usize,
    mode: Mode,
    workers: Option<usize>,
) -> Result<Table2Row> {
    let model = kind.build(n)?;
    let y = solve_on_axis(model.as_ref(), target)?;
    let opts = AnalysisOptions {
        plan: ScalePlan::default_for(n, replicates)?,
        mode,
        methods: Method::ALL.to_vec(),
        ridge: Ridge::Zero,
        workers,
    };
    let a = analyze(model.as_ref(), &y, &opts)?;
    let pct = |m: Method| -> (f64, f64) {
        let r = a.report(m).expect("all methods requested");
        (100.0 * r.alpha, 100.0 * r.se_alpha.unwrap_or(f64::NAN))
    };
    let ridge2 = pvalue::p2(&fit_multistep(
        &a.table.cells,
        FitOrder::Two,
        &Ridge::Default.weights(FitOrder::Two),
        None,
    )?)?;
    let ridge3 = pvalue::p3(&fit_multistep(
        &a.table.cells,
        FitOrder::Three,
        &Ridge::Default.weights(FitOrder::Three),
        None,
    )?)?;
    let (p1, p1_se) = pct(Method::P1);
    let (p2, p2_se) = pct(Method::P2);
    let (p3, p3_se) = pct(Method::P3);
    Ok(Table2Row {
        model: kind.label().to_string(),
        target,
        n,
        p0: pct(Method::P0).0,
        abc: pct(Method::Abc).0,
        p1,
        p1_se,
        p2,
        p2_se,
        p3,
        p3_se,
        ridge_p2: 100.0 * ridge2.alpha,
        ridge_p2_se: 100.0 * ridge2.se_alpha.unwrap_or(f64::NAN),
        ridge_p3: 100.0 * ridge3.alpha,
        ridge_p3_se: 100.0 * ridge3.se_alpha.unwrap_or(f64::NAN),
        exact: pct(Method::Exact).0,
    })
}

pub fn write_table2_csv<W: Write>(rows: &[Table2Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// A point of the z-value curve against `1/τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    /// `cell` for an observed one-step cell, `grid` for the fitted curve.
    pub kind: String,
    pub inv_tau: f64,
    pub z: Option<f64>,
    pub se_z: Option<f64>,
    pub fitted: f64,
}

/// One row per one-step cell plus `grid` evenly spaced fitted values
/// spanning `[0, 1.25·max 1/τ]` (excluding 0).
pub fn curve_rows(table: &BootstrapTable, fit: &LinearFit, grid: usize) -> Vec<CurveRow> {
    let mut rows: Vec<CurveRow> = table
        .cells_with_steps(1)
        .map(|c| {
            let x = 1.0 / c.scales.first();
            CurveRow {
                kind: "cell".into(),
                inv_tau: x,
                z: Some(c.z),
                se_z: Some(c.var_z.sqrt()),
                fitted: fit.fitted_at_inverse(x),
            }
        })
        .collect();
    let top = rows.iter().map(|r| r.inv_tau).fold(0.0, f64::max) * 1.25;
    for i in 1..=grid {
        let x = top * i as f64 / grid as f64;
        rows.push(CurveRow {
            kind: "grid".into(),
            inv_tau: x,
            z: None,
            se_z: None,
            fitted: fit.fitted_at_inverse(x),
        });
    }
    rows
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Stream tag of the coverage observations.
pub const COVERAGE_STREAM: u64 = 0xC0FE;

#[derive(Debug, Clone)]
pub struct CoverageOptions {
    pub method: Method,
    pub level: f64,
    pub trials: usize,
    pub seed: u64,
    pub analysis: AnalysisOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub method: Method,
    pub level: f64,
    pub trials: usize,
    /// Trials whose pipeline failed numerically; excluded from the rate.
    pub failures: usize,
    pub rejections: usize,
    pub rate: f64,
    pub se: f64,
}

/// Frequency of `α̂(Y) < level` over independent `Y` drawn at the model's
/// boundary point.
///
/// Trial `i` draws `Y` from stream `[COVERAGE_STREAM, i]` of `seed`; in Monte
/// Carlo mode its table uses a seed drawn from the same stream.
pub fn coverage(model: &dyn Model, opts: &CoverageOptions) -> Result<CoverageResult> {
    if opts.trials == 0 {
        return Err(Error::Usage("coverage needs at least one trial".into()));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::Usage(format!(
            "level must be in (0, 1), got {}",
            opts.level
        )));
    }
    let eta = model.boundary_point()?;
    let mut inner = opts.analysis.clone();
    inner.methods = vec![opts.method];
    inner.workers = None;

    let trial = |i: usize| -> Result<Option<bool>> {
        let mut rng = RandomStream::with_path(opts.seed, &[COVERAGE_STREAM, i as u64]).rng();
        let y = model.sample_replicate(&eta, 1.0, &mut rng)?;
        let mut run = inner.clone();
        if let Mode::MonteCarlo { .. } = run.mode {
            run.mode = Mode::MonteCarlo { seed: rng.random() };
        }
        match analyze(model, &y, &run) {
            Ok(a) => Ok(Some(a.reports[0].alpha < opts.level)),
            Err(e) if e.kind() == ErrorKind::Numerical => Ok(None),
            Err(e) => Err(e),
        }
    };
    let outcomes: Vec<Option<bool>> = with_workers(opts.analysis.workers, || {
        (0..opts.trials)
            .into_par_iter()
            .map(trial)
            .collect::<Result<Vec<_>>>()
    })??;

    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    let valid = opts.trials - failures;
    if valid == 0 {
        return Err(Error::Numerical("every coverage trial failed".into()));
    }
    let rejections = outcomes.iter().filter(|o| **o == Some(true)).count();
    let rate = rejections as f64 / valid as f64;
    Ok(CoverageResult {
        method: opts.method,
        level: opts.level,
        trials: opts.trials,
        failures,
        rejections,
        rate,
        se: (rate * (1.0 - rate) / valid as f64).sqrt(),
    })
}

pub fn write_coverage_csv<W: Write>(results: &[CoverageResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Observation helper shared by the command line: `‖x̄‖²` or `x̄`.
pub fn observation(
    kind: BuiltinKind,
    n: f64,
    xbar_norm2: Option<f64>,
    xbar: Option<&[f64]>,
) -> Result<Point> {
    match kind {
        BuiltinKind::Spherical { p } => {
            let m = SphericalNormalModel::new(p, n)?;
            match (xbar_norm2, xbar) {
                (Some(r2), None) => m.observation_from_xbar_norm2(r2),
                (None, Some(x)) => m.observation_from_xbar(x),
                _ => Err(Error::Usage("give exactly one of ‖x̄‖² or x̄".into())),
            }
        }
        BuiltinKind::Exponential => {
            let m = ExponentialMeanModel::new(n)?;
            match (xbar_norm2, xbar) {
                (None, Some([x])) => m.observation_from_xbar(*x),
                _ => Err(Error::Usage(
                    "the exponential model takes a single x̄".into(),
                )),
            }
        }
    }
}
