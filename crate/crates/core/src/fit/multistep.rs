//! Penalized weighted nonlinear fit of `ζ₂` / `ζ₃`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::BootstrapCell;
use crate::scalar::Scalar;

use super::features::{scale_features, ScaleFeatures};
use super::linalg::Matrix;
use super::linear::fit_onestep;
use super::surface::{eval_surface, FitOrder, GAMMA1_FLOOR};

const MAX_ITERATIONS: usize = 200;
const DAMPING_START: f64 = 1e-3;
const DAMPING_LIMIT: f64 = 1e16;
const RELATIVE_TOL: f64 = 1e-12;

/// Result of [`fit_multistep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaFit<T = f64> {
    pub order: FitOrder,
    pub gamma: Vec<T>,
    pub cov: Matrix<T>,
    pub ridge_weights: Vec<T>,
    /// `Σ (zᵢ − ζᵢ)² / var_zᵢ`.
    pub rss: T,
    /// Penalized objective at the optimum, on the per-replicate scale.
    pub objective: T,
    pub iterations: usize,
    pub gradient_norm: T,
    pub cells: usize,
}

impl<T: Scalar> GammaFit<T> {
    pub fn std_errors(&self) -> Vec<T> {
        self.cov
            .diag()
            .into_iter()
            .map(|v| v.max(T::zero()).sqrt())
            .collect()
    }
}

/// `ω = (0, 0, 0.01, …)` with `m` entries.
pub fn default_ridge_weights<T: Scalar>(order: FitOrder) -> Vec<T> {
    let mut w = vec![T::lit(0.01); order.parameters()];
    w[0] = T::zero();
    w[1] = T::zero();
    w
}

/// `γ₁ = v̂` of the one-step fit, kept away from zero; other coefficients zero.
pub fn default_init<T: Scalar>(cells: &[BootstrapCell<T>], order: FitOrder) -> Result<Vec<T>> {
    let v = fit_onestep(cells)?.v_hat;
    let floor = T::lit(1e-3);
    let g1 = if v.abs() >= floor {
        v
    } else if v < T::zero() {
        -floor
    } else {
        floor
    };
    let mut g = vec![T::zero(); order.parameters()];
    g[0] = g1;
    Ok(g)
}

struct Design<T> {
    features: Vec<ScaleFeatures<T>>,
    z: Vec<T>,
    /// Per-replicate weights `1/(B·var_z)`.
    u: Vec<T>,
    var: Vec<T>,
}

impl<T: Scalar> Design<T> {
    fn objective(&self, order: FitOrder, gamma: &[T], ridge: &[T]) -> T {
        let mut f = T::zero();
        for i in 0..self.z.len() {
            let r = self.z[i] - eval_surface(order, gamma, &self.features[i]).0;
            f += self.u[i] * r * r;
        }
        gamma
            .iter()
            .zip(ridge)
            .fold(f, |acc, (&g, &w)| acc + w * g * g)
    }

    /// `(JᵀUJ + Ω, −∇f/2, J)` at `gamma`, with `J = ∂ζ/∂γ`.
    fn linearize(
        &self,
        order: FitOrder,
        gamma: &[T],
        ridge: &[T],
    ) -> (Matrix<T>, Vec<T>, Vec<Vec<T>>) {
        let m = gamma.len();
        let mut a = Matrix::zeros(m);
        let mut g = vec![T::zero(); m];
        let mut jac = Vec::with_capacity(self.z.len());
        for i in 0..self.z.len() {
            let (val, d) = eval_surface(order, gamma, &self.features[i]);
            let r = self.z[i] - val;
            for p in 0..m {
                g[p] += self.u[i] * d[p] * r;
                for q in 0..m {
                    a[(p, q)] += self.u[i] * d[p] * d[q];
                }
            }
            jac.push(d);
        }
        for p in 0..m {
            a[(p, p)] += ridge[p];
            g[p] -= ridge[p] * gamma[p];
        }
        (a, g, jac)
    }
}

/// Minimizes `Σ uᵢ(zᵢ − ζ(γ; τᵢ))² + Σ ωⱼγⱼ²` by Levenberg–Marquardt, with
/// `uᵢ = 1/(Bᵢ var_zᵢ)`.
///
/// Order two uses the cells with at most two steps, order three uses all.
pub fn fit_multistep<T: Scalar>(
    cells: &[BootstrapCell<T>],
    order: FitOrder,
    ridge_weights: &[T],
    init: Option<&[T]>,
) -> Result<GammaFit<T>> {
    let m = order.parameters();
    if ridge_weights.len() != m {
        return Err(Error::Usage(format!(
            "expected {m} ridge weights, got {}",
            ridge_weights.len()
        )));
    }
    if ridge_weights
        .iter()
        .any(|w| !(*w >= T::zero()) || !w.is_finite())
    {
        return Err(Error::Domain("ridge weights must be nonnegative".into()));
    }
    let used: Vec<&BootstrapCell<T>> = cells
        .iter()
        .filter(|c| c.k() <= order.max_steps())
        .collect();
    if used.len() < m {
        return Err(Error::DegenerateDesign(format!(
            "{m} coefficients need at least {m} cells, got {}",
            used.len()
        )));
    }
    let mut design = Design {
        features: Vec::with_capacity(used.len()),
        z: Vec::with_capacity(used.len()),
        u: Vec::with_capacity(used.len()),
        var: Vec::with_capacity(used.len()),
    };
    for c in &used {
        let unit = c.unit_variance();
        if !(unit > T::zero()) || !unit.is_finite() || !c.z.is_finite() {
            return Err(Error::Domain(format!(
                "cell {} has no usable z-value",
                c.scales
            )));
        }
        design.features.push(scale_features(&c.scales));
        design.z.push(c.z);
        design.u.push(unit.recip());
        design.var.push(c.var_z);
    }

    let mut gamma = match init {
        Some(g) if g.len() == m => g.to_vec(),
        Some(g) => {
            return Err(Error::Usage(format!(
                "expected {m} initial values, got {}",
                g.len()
            )));
        }
        None => default_init(cells, order)?,
    };
    let floor = T::lit(GAMMA1_FLOOR);
    if gamma[0].abs() < floor {
        return Err(Error::NearSingularGamma {
            value: gamma[0].to_f64_lossy(),
        });
    }

    let tol = T::lit(RELATIVE_TOL).max(T::epsilon() * T::lit(16.0));
    let mut f = design.objective(order, &gamma, ridge_weights);
    let mut lambda = T::lit(DAMPING_START);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (a, g, _) = design.linearize(order, &gamma, ridge_weights);
        let mut accepted = false;
        while lambda <= T::lit(DAMPING_LIMIT) {
            let mut damped = a.clone();
            for p in 0..m {
                let d = a[(p, p)];
                damped[(p, p)] = d + lambda * d.max(T::min_positive_value());
            }
            let Ok(step) = damped.solve_spd(&g) else {
                lambda *= T::lit(10.0);
                continue;
            };
            let trial: Vec<T> = gamma.iter().zip(&step).map(|(&x, &s)| x + s).collect();
            let f_new = if trial[0].abs() >= floor {
                design.objective(order, &trial, ridge_weights)
            } else {
                T::infinity()
            };
            if f_new.is_finite() && f_new <= f {
                let decrease = f - f_new;
                gamma = trial;
                f = f_new;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                accepted = true;
                if decrease <= tol * f || f <= T::min_positive_value() {
                    converged = true;
                }
                break;
            }
            lambda *= T::lit(10.0);
        }
        if !accepted {
            // no damped step improves the objective: stationary to working precision
            converged = true;
        }
        if converged {
            break;
        }
    }

    let (a, g, jac) = design.linearize(order, &gamma, ridge_weights);
    let gradient_norm = g.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt() * T::lit(2.0);
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            gamma: gamma.iter().map(|g| g.to_f64_lossy()).collect(),
            gradient_norm: gradient_norm.to_f64_lossy(),
        });
    }
    if gamma[0].abs() < floor * T::lit(1.01) {
        return Err(Error::NearSingularGamma {
            value: gamma[0].to_f64_lossy(),
        });
    }

    // sandwich A⁻¹ (Jᵀ diag(uᵢ² var_zᵢ) J) A⁻¹
    let a_inv = a.inverse_spd()?;
    let mut meat = Matrix::zeros(m);
    for (i, d) in jac.iter().enumerate() {
        let w = design.u[i] * design.u[i] * design.var[i];
        for p in 0..m {
            for q in 0..m {
                meat[(p, q)] += w * d[p] * d[q];
            }
        }
    }
    let cov = a_inv.mul(&meat).mul(&a_inv);

    let rss = (0..design.z.len()).fold(T::zero(), |acc, i| {
        let r = design.z[i] - eval_surface(order, &gamma, &design.features[i]).0;
        acc + r * r / design.var[i]
    });
    Ok(GammaFit {
        order,
        gamma,
        cov,
        ridge_weights: ridge_weights.to_vec(),
        rss,
        objective: f,
        iterations,
        gradient_norm,
        cells: used.len(),
    })
}
