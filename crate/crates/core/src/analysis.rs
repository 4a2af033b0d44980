//! End-to-end analysis of one observation: table, fits and p-values.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{
    default_ridge_weights, fit_multistep, fit_onestep, FitOrder, GammaFit, LinearFit,
};
use crate::model::{Model, Point};
use crate::pvalue::{self, Method, PValueReport, Provenance};
use crate::resample::{build_table, run_cell, BootstrapTable, Mode, ScalePlan, ScaleTuple};
use crate::statfun::RandomStream;

/// Stream index reserved for the ABC cell at the projected point.
pub const ABC_STREAM: u64 = u64::MAX;

/// Ridge penalty applied to the multistep fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Ridge {
    Zero,
    /// `(0, 0, 0.01, …)`.
    Default,
    /// Six weights; the three-coefficient fit uses the first three.
    Weights(Vec<f64>),
}

impl Ridge {
    pub fn weights(&self, order: FitOrder) -> Vec<f64> {
        let m = order.parameters();
        match self {
            Ridge::Zero => vec![0.0; m],
            Ridge::Default => default_ridge_weights(order),
            Ridge::Weights(w) => w.iter().copied().take(m).collect(),
        }
    }
}

impl FromStr for Ridge {
    type Err = Error;

    /// `default`, `none`/`0`, or six comma-separated weights.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "default" => return Ok(Ridge::Default),
            "none" | "zero" | "0" => return Ok(Ridge::Zero),
            _ => {}
        }
        let w = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(format!("bad ridge weights `{s}`")))?;
        if w.len() != 6 || w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Parse(format!(
                "ridge needs six nonnegative weights, got `{s}`"
            )));
        }
        Ok(Ridge::Weights(w))
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub plan: ScalePlan,
    pub mode: Mode,
    pub methods: Vec<Method>,
    pub ridge: Ridge,
    pub workers: Option<usize>,
}

/// Everything computed for one observation.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub table: BootstrapTable,
    pub onestep: Option<LinearFit>,
    pub gamma3: Option<GammaFit>,
    pub gamma6: Option<GammaFit>,
    pub reports: Vec<PValueReport>,
}

/// Builds the table for `y` and analyzes it.
pub fn analyze(model: &dyn Model, y: &Point, opts: &AnalysisOptions) -> Result<Analysis> {
    let plan = plan_for(&opts.plan, &opts.methods)?;
    let table = build_table(model, y, &plan, opts.mode, opts.workers)?;
    analyze_table(table, model, y, opts)
}

/// The part of `plan` the requested methods need.
fn plan_for(plan: &ScalePlan, methods: &[Method]) -> Result<ScalePlan> {
    let steps = methods
        .iter()
        .map(|m| match m {
            Method::P3 => 3,
            Method::P2 => 2,
            Method::P0 | Method::Abc | Method::P1 => 1,
            Method::Exact => 0,
        })
        .max()
        .unwrap_or(0);
    let mut cells = plan.up_to_steps(steps.max(1)).to_vec();
    if steps <= 1
        && methods
            .iter()
            .all(|m| matches!(m, Method::P0 | Method::Abc | Method::Exact))
    {
        cells.retain(|c| (c.first() - 1.0).abs() <= 1e-9);
        if cells.is_empty() {
            cells.push(ScaleTuple::one(1.0)?);
        }
    }
    ScalePlan::new(cells, plan.replicates_per_cell())
}

/// Fits and p-values for an existing table (built here or imported).
pub fn analyze_table(
    table: BootstrapTable,
    model: &dyn Model,
    y: &Point,
    opts: &AnalysisOptions,
) -> Result<Analysis> {
    let wants = |m: Method| opts.methods.contains(&m);
    let prov = |fit: &str| Provenance {
        model: model.name().to_string(),
        table: table_id(&table),
        fit: fit.to_string(),
    };
    let cells = &table.cells;
    let mut reports = Vec::new();

    let onestep = if wants(Method::P1) {
        Some(fit_onestep(cells)?)
    } else {
        None
    };
    let gamma3 = if wants(Method::P2) {
        Some(fit_multistep(
            cells,
            FitOrder::Two,
            &opts.ridge.weights(FitOrder::Two),
            None,
        )?)
    } else {
        None
    };
    let gamma6 = if wants(Method::P3) {
        Some(fit_multistep(
            cells,
            FitOrder::Three,
            &opts.ridge.weights(FitOrder::Three),
            None,
        )?)
    } else {
        None
    };

    for &method in &opts.methods {
        let report =
            match method {
                Method::P0 => pvalue::p0(cells)?.with_provenance(prov("")),
                Method::Abc => {
                    let z0_y = pvalue::p0(cells)?.z;
                    let z0_proj =
                        projected_unit_z(model, y, opts, table.cells.first().map_or(0, |c| c.b))?;
                    pvalue::abc(z0_y, z0_proj, model.acceleration()?)?.with_provenance(prov(""))
                }
                Method::P1 => pvalue::p1(onestep.as_ref().expect("fitted above"))
                    .with_provenance(prov("onestep")),
                Method::P2 => pvalue::p2(gamma3.as_ref().expect("fitted above"))?
                    .with_provenance(prov("gamma3")),
                Method::P3 => pvalue::p3(gamma6.as_ref().expect("fitted above"))?
                    .with_provenance(prov("gamma6")),
                Method::Exact => pvalue::exact(model.exact_pvalue(y)?)?.with_provenance(prov("")),
            };
        reports.push(report);
    }
    Ok(Analysis {
        table,
        onestep,
        gamma3,
        gamma6,
        reports,
    })
}

fn table_id(table: &BootstrapTable) -> String {
    match table.master_seed {
        Some(seed) => format!("{} seed={seed}", table.model),
        None => format!("{} oracle", table.model),
    }
}

/// `ẑ₀(η̂(y))`: a one-step `τ = 1` cell at the projection of `y`.
fn projected_unit_z(model: &dyn Model, y: &Point, opts: &AnalysisOptions, b: usize) -> Result<f64> {
    let eta = model.project_to_boundary(y)?;
    let unit = ScaleTuple::one(1.0)?;
    match opts.mode {
        Mode::Oracle => {
            let alpha = model.one_step_prob(&eta, 1.0)?;
            Ok(crate::resample::BootstrapCell::from_probability(unit, alpha, b.max(1))?.z)
        }
        Mode::MonteCarlo { seed } => {
            let stream = RandomStream::new(seed).child(ABC_STREAM);
            let b = if b == 0 {
                opts.plan.replicates_per_cell()
            } else {
                b
            };
            crate::resample::with_workers(opts.workers, || {
                run_cell(model, &eta, &unit, b, &stream)
            })?
            .map(|c| c.z)
        }
    }
}

impl Analysis {
    pub fn report(&self, method: Method) -> Option<&PValueReport> {
        self.reports.iter().find(|r| r.method == method)
    }
}

/// One row of the fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub fit: String,
    pub coefficient: String,
    pub estimate: f64,
    pub std_error: f64,
    pub rss: f64,
    pub iterations: usize,
}

/// Column order of the fit CSV.
pub const FIT_HEADER: [&str; 6] = [
    "fit",
    "coefficient",
    "estimate",
    "std_error",
    "rss",
    "iterations",
];

pub fn coefficient_rows(analysis: &Analysis) -> Vec<CoefficientRow> {
    let mut rows = Vec::new();
    if let Some(f) = &analysis.onestep {
        let se = f.cov.diag();
        for (name, est, var) in [("v", f.v_hat, se[0]), ("c", f.c_hat, se[1])] {
            rows.push(CoefficientRow {
                fit: "onestep".into(),
                coefficient: name.into(),
                estimate: est,
                std_error: var.max(0.0).sqrt(),
                rss: f.rss,
                iterations: 0,
            });
        }
    }
    for (label, fit) in [("gamma3", &analysis.gamma3), ("gamma6", &analysis.gamma6)] {
        if let Some(f) = fit {
            for (i, (est, se)) in f.gamma.iter().zip(f.std_errors()).enumerate() {
                rows.push(CoefficientRow {
                    fit: label.into(),
                    coefficient: format!("gamma{}", i + 1),
                    estimate: *est,
                    std_error: se,
                    rss: f.rss,
                    iterations: f.iterations,
                });
            }
        }
    }
    rows
}

pub fn write_fit_csv<W: Write>(analysis: &Analysis, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(FIT_HEADER)?;
    for row in coefficient_rows(analysis) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fit_json<W: Write>(analysis: &Analysis, out: W) -> Result<()> {
    #[derive(Serialize)]
    struct FitJson<'a> {
        onestep: &'a Option<LinearFit>,
        gamma3: &'a Option<GammaFit>,
        gamma6: &'a Option<GammaFit>,
        coefficients: Vec<CoefficientRow>,
    }
    serde_json::to_writer_pretty(
        out,
        &FitJson {
            onestep: &analysis.onestep,
            gamma3: &analysis.gamma3,
            gamma6: &analysis.gamma6,
            coefficients: coefficient_rows(analysis),
        },
    )?;
    Ok(())
}

/// Observation on the ray `t·direction` whose exact p-value equals `target`.
///
/// The exact p-value must decrease along the ray, from above `target` near
/// `t = 0`.
pub fn solve_observation(model: &dyn Model, direction: &[f64], target: f64) -> Result<Point> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!(
            "target p-value must be in (0, 1), got {target}"
        )));
    }
    let at = |t: f64| -> Result<(Point, f64)> {
        let y = Point::new(direction.iter().map(|d| d * t).collect())?;
        let p = model.exact_pvalue(&y)?;
        Ok((y, p))
    };
    let mut lo = 0.0;
    let mut hi = model.sample_size().sqrt().max(1.0);
    while at(hi)?.1 > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numerical("cannot bracket the target p-value".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)?.1 > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(at(0.5 * (lo + hi))?.0)
}

/// Solves the first coordinate of a point of dimension `dim`.
pub fn solve_on_axis(model: &dyn Model, target: f64) -> Result<Point> {
    let mut dir = vec![0.0; model.dim()];
    dir[0] = 1.0;
    solve_observation(model, &dir, target)
}
