//! Special functions, sampling primitives and addressable random streams.

mod gamma;
mod noncentral;
mod normal;
mod rng;

pub use gamma::{gamma_reg_lower, gamma_reg_pq, gamma_reg_upper, ln_gamma};
pub use noncentral::{noncentral_chisq_cdf, noncentral_chisq_sf};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf, z_value};
pub use rng::{gamma_draw, normal_draw, sample_gamma, sample_std_normal, RandomStream, StreamRng};
