//! One-step and multistep regressions of z-values on the scales.

mod features;
mod linalg;
mod linear;
mod multistep;
mod surface;

pub use features::{scale_features, ScaleFeatures};
pub use linalg::Matrix;
pub use linear::{fit_onestep, LinearFit};
pub use multistep::{default_init, default_ridge_weights, fit_multistep, GammaFit};
pub use surface::{
    eval_surface, zeta2, zeta2_gradient, zeta3, zeta3_gradient, FitOrder, GAMMA1_FLOOR,
};
