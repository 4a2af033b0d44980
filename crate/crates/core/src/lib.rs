//! Multiscale and multistep bootstrap p-values for the problem of regions.
//!
//! The numerical kernels (special functions, scale features, regression
//! surfaces, fits, p-value formulas) are generic over [`Scalar`]; models,
//! Monte Carlo and quadrature work in `f64`.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod model;
pub mod pvalue;
pub mod quad;
pub mod resample;
pub mod scalar;
pub mod statfun;

pub use analysis::{
    analyze, analyze_table, solve_observation, solve_on_axis, Analysis, AnalysisOptions, Ridge,
};
pub use error::{Error, ErrorKind, Result};
pub use experiment::{
    coverage, table2_row, BuiltinKind, CoverageOptions, CoverageResult, Table2Row,
};
pub use fit::{fit_multistep, fit_onestep, FitOrder};
pub use model::{CustomModel, ExponentialMeanModel, Model, Point, SphericalNormalModel};
pub use pvalue::{Method, Provenance};
pub use resample::{build_table, BootstrapTable, Mode, ScalePlan, ScaleTuple};
pub use scalar::Scalar;

pub type BootstrapCellF64 = resample::BootstrapCell<f64>;
pub type BootstrapCellF32 = resample::BootstrapCell<f32>;
pub type ScaleTupleF64 = resample::ScaleTuple<f64>;
pub type ScaleTupleF32 = resample::ScaleTuple<f32>;
pub type ScaleFeaturesF64 = fit::ScaleFeatures<f64>;
pub type ScaleFeaturesF32 = fit::ScaleFeatures<f32>;
pub type LinearFitF64 = fit::LinearFit<f64>;
pub type LinearFitF32 = fit::LinearFit<f32>;
pub type GammaFitF64 = fit::GammaFit<f64>;
pub type GammaFitF32 = fit::GammaFit<f32>;
pub type PValueReportF64 = pvalue::PValueReport<f64>;
pub type PValueReportF32 = pvalue::PValueReport<f32>;
