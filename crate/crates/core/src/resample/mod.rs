//! Multistep-multiscale Monte Carlo engine.

mod cell;
mod engine;
mod plan;
mod table;

pub use cell::{transform_cell, BootstrapCell, ORACLE_ALPHA_FLOOR};
pub use engine::{build_table, oracle_cell, run_cell, with_workers, Mode};
pub use plan::{default_scale_plan, ScalePlan, ScaleTuple, FIRST_STEP_RATIOS, LATER_STEP_RATIOS};
pub use table::{BootstrapTable, TABLE_HEADER};
