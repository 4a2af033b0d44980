//! Bootstrap probabilities and corrected p-values with standard errors.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{FitOrder, GammaFit, LinearFit, GAMMA1_FLOOR};
use crate::resample::BootstrapCell;
use crate::scalar::Scalar;
use crate::statfun::{std_normal_pdf, std_normal_sf};

/// Smallest admissible `|1 − a(z₀(y) − z₀(η̂))|`.
pub const ABC_DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Plain bootstrap probability at `τ = 1`.
    P0,
    Abc,
    P1,
    P2,
    P3,
    Exact,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::P0,
        Method::Abc,
        Method::P1,
        Method::P2,
        Method::P3,
        Method::Exact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::P0 => "p0",
            Method::Abc => "abc",
            Method::P1 => "p1",
            Method::P2 => "p2",
            Method::P3 => "p3",
            Method::Exact => "exact",
        }
    }

    /// Parses a comma-separated list; `all` expands to every method.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Method::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Parse("empty method list".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown method `{s}` (expected p0, abc, p1, p2, p3 or exact)"
                ))
            })
    }
}

/// Where a report's inputs came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub table: String,
    pub fit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueReport<T = f64> {
    pub method: Method,
    pub alpha: T,
    pub z: T,
    /// `φ(z)·se_z`; absent for the ABC and exact p-values.
    pub se_alpha: Option<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> PValueReport<T> {
    /// Report for `α = Φ(−z)` with `se_alpha = φ(z)·se_z`.
    pub fn from_z(method: Method, z: T, se_z: Option<T>) -> Self {
        Self {
            method,
            alpha: std_normal_sf(z),
            z,
            se_alpha: se_z.map(|s| std_normal_pdf(z) * s),
            provenance: Provenance::default(),
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

fn near_unit(tau: f64) -> bool {
    (tau - 1.0).abs() <= 1e-9
}

/// `α̂₀`, the one-step cell at `τ = 1`.
pub fn p0<T: Scalar>(cells: &[BootstrapCell<T>]) -> Result<PValueReport<T>> {
    let cell = cells
        .iter()
        .find(|c| c.k() == 1 && near_unit(c.scales.first().to_f64_lossy()))
        .ok_or_else(|| Error::MissingCell("no one-step cell with tau = 1".into()))?;
    Ok(PValueReport {
        method: Method::P0,
        alpha: cell.alpha,
        z: cell.z,
        se_alpha: Some(std_normal_pdf(cell.z) * cell.var_z.sqrt()),
        provenance: Provenance::default(),
    })
}

/// `ẑ_abc = d/(1 − a·d) − z₀(η̂)` with `d = z₀(y) − z₀(η̂)`.
pub fn z_abc<T: Scalar>(z0_y: T, z0_proj: T, a: T) -> Result<T> {
    let d = z0_y - z0_proj;
    let den = T::one() - a * d;
    if !(den.abs() >= T::lit(ABC_DENOMINATOR_FLOOR)) {
        return Err(Error::AbcSingularity(den.to_f64_lossy()));
    }
    Ok(d / den - z0_proj)
}

pub fn abc<T: Scalar>(z0_y: T, z0_proj: T, a: T) -> Result<PValueReport<T>> {
    Ok(PValueReport::from_z(
        Method::Abc,
        z_abc(z0_y, z0_proj, a)?,
        None,
    ))
}

/// `α̂₁ = Φ(−(v̂ − ĉ))`.
pub fn p1<T: Scalar>(fit: &LinearFit<T>) -> PValueReport<T> {
    PValueReport::from_z(
        Method::P1,
        fit.z1(),
        Some(fit.var_z1().max(T::zero()).sqrt()),
    )
}

fn check_gamma1<T: Scalar>(g1: T) -> Result<()> {
    if !(g1.abs() >= T::lit(GAMMA1_FLOOR)) {
        return Err(Error::NearSingularGamma {
            value: g1.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `ẑ₂ = γ₁(1 + γ₃) + γ₂/γ₁`.
pub fn corrected_z2<T: Scalar>(g: &[T; 3]) -> Result<T> {
    check_gamma1(g[0])?;
    Ok(g[0] * (T::one() + g[2]) + g[1] / g[0])
}

pub fn corrected_z2_gradient<T: Scalar>(g: &[T; 3]) -> [T; 3] {
    [T::one() + g[2] - g[1] / (g[0] * g[0]), g[0].recip(), g[0]]
}

/// `ẑ₃ = γ₁(1 + γ₃ + 4γ₃² + γ₆) + (γ₂ + γ₃²/2 + γ₄ + γ₅)/γ₁`.
pub fn corrected_z3<T: Scalar>(g: &[T; 6]) -> Result<T> {
    check_gamma1(g[0])?;
    let q = g[1] + g[2] * g[2] * T::lit(0.5) + g[3] + g[4];
    Ok(g[0] * (T::one() + g[2] + T::lit(4.0) * g[2] * g[2] + g[5]) + q / g[0])
}

pub fn corrected_z3_gradient<T: Scalar>(g: &[T; 6]) -> [T; 6] {
    let q = g[1] + g[2] * g[2] * T::lit(0.5) + g[3] + g[4];
    let inv = g[0].recip();
    [
        T::one() + g[2] + T::lit(4.0) * g[2] * g[2] + g[5] - q * inv * inv,
        inv,
        g[0] * (T::one() + T::lit(8.0) * g[2]) + g[2] * inv,
        inv,
        inv,
        g[0],
    ]
}

fn expect_order<T: Scalar>(fit: &GammaFit<T>, order: FitOrder) -> Result<()> {
    if fit.order != order || fit.gamma.len() != order.parameters() {
        return Err(Error::Usage(format!(
            "expected a fit with {} coefficients, got {}",
            order.parameters(),
            fit.gamma.len()
        )));
    }
    Ok(())
}

/// `α̂₂` from a three-coefficient fit.
pub fn p2<T: Scalar>(fit: &GammaFit<T>) -> Result<PValueReport<T>> {
    expect_order(fit, FitOrder::Two)?;
    let g = [fit.gamma[0], fit.gamma[1], fit.gamma[2]];
    let z = corrected_z2(&g)?;
    let se = fit
        .cov
        .quad_form(&corrected_z2_gradient(&g))
        .max(T::zero())
        .sqrt();
    Ok(PValueReport::from_z(Method::P2, z, Some(se)))
}

/// `α̂₃` from a six-coefficient fit.
pub fn p3<T: Scalar>(fit: &GammaFit<T>) -> Result<PValueReport<T>> {
    expect_order(fit, FitOrder::Three)?;
    let g: [T; 6] = std::array::from_fn(|i| fit.gamma[i]);
    let z = corrected_z3(&g)?;
    let se = fit
        .cov
        .quad_form(&corrected_z3_gradient(&g))
        .max(T::zero())
        .sqrt();
    Ok(PValueReport::from_z(Method::P3, z, Some(se)))
}

/// Report for a probability known exactly.
pub fn exact<T: Scalar>(alpha: T) -> Result<PValueReport<T>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::Domain(format!(
            "probability outside [0, 1]: {alpha}"
        )));
    }
    let floor = T::lit(crate::resample::ORACLE_ALPHA_FLOOR);
    let z = crate::statfun::z_value(alpha.max(floor).min(T::one() - floor))?;
    Ok(PValueReport {
        method: Method::Exact,
        alpha,
        z,
        se_alpha: None,
        provenance: Provenance::default(),
    })
}

/// Predicted two-step minus one-step z-value at the combined scale:
/// `a·τ₁²τ₂²(v² − (τ₁² + τ₂²)) / (τ₁² + τ₂²)^{5/2}`.
pub fn two_step_shift<T: Scalar>(a: T, v: T, tau1: T, tau2: T) -> Result<T> {
    if !(tau1 > T::zero() && tau2 > T::zero()) {
        return Err(Error::Domain("scales must be positive".into()));
    }
    let (t1, t2) = (tau1 * tau1, tau2 * tau2);
    let s = t1 + t2;
    Ok(a * t1 * t2 * (v * v - s) / (s * s * s.sqrt()))
}

/// Column order of the p-value CSV.
pub const PVALUE_HEADER: [&str; 4] = ["method", "alpha", "z", "se_alpha"];

pub fn write_reports_csv<T: Scalar, W: Write>(reports: &[PValueReport<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PVALUE_HEADER)?;
    for r in reports {
        w.write_record([
            r.method.to_string(),
            r.alpha.to_string(),
            r.z.to_string(),
            r.se_alpha.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
