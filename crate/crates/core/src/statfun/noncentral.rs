//! Noncentral chi-square distribution function as a Poisson mixture of
//! central chi-square CDFs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::gamma::{gamma_reg_pq, ln_gamma};

const TRUNCATION: f64 = 1e-14;
const MAX_TERMS: usize = 1_000_000;

#[derive(Clone, Copy)]
enum Tail {
    Lower,
    Upper,
}

/// `Pr{χ²_df(noncentrality) ≤ x}`.
///
/// Both tails are summed directly; above one half the complement of the
/// other tail is returned.
pub fn noncentral_chisq_cdf<T: Scalar>(df: u32, noncentrality: T, x: T) -> Result<T> {
    let p = mixture(df, noncentrality, x, Tail::Lower)?;
    if p > T::lit(0.5) {
        return Ok(T::one() - mixture(df, noncentrality, x, Tail::Upper)?);
    }
    Ok(p)
}

/// `Pr{χ²_df(noncentrality) > x}`.
pub fn noncentral_chisq_sf<T: Scalar>(df: u32, noncentrality: T, x: T) -> Result<T> {
    let q = mixture(df, noncentrality, x, Tail::Upper)?;
    if q > T::lit(0.5) {
        return Ok(T::one() - mixture(df, noncentrality, x, Tail::Lower)?);
    }
    Ok(q)
}

fn mixture<T: Scalar>(df: u32, nc: T, x: T, tail: Tail) -> Result<T> {
    if df == 0 {
        return Err(Error::Domain(
            "chi-square degrees of freedom must be positive".into(),
        ));
    }
    if nc.is_nan() || nc < T::zero() || !nc.is_finite() {
        return Err(Error::Domain(format!(
            "noncentrality must be >= 0, got {nc}"
        )));
    }
    if x.is_nan() || x < T::zero() {
        return Err(Error::Domain(format!(
            "chi-square argument must be >= 0, got {x}"
        )));
    }
    if x == T::zero() {
        return Ok(match tail {
            Tail::Lower => T::zero(),
            Tail::Upper => T::one(),
        });
    }
    let half = T::lit(0.5);
    let a0 = T::from_count(df as usize) * half;
    let hx = x * half;
    let pick = |a: T| -> Result<T> {
        let (p, q) = gamma_reg_pq(a, hx)?;
        Ok(match tail {
            Tail::Lower => p,
            Tail::Upper => q,
        })
    };
    let lambda = nc * half;
    if lambda == T::zero() {
        return pick(a0);
    }

    // Start at the Poisson mode and walk outwards.
    let mode = lambda.floor();
    let mode_idx = mode.to_usize().unwrap_or(0);
    let w_mode = (-lambda + mode * lambda.ln() - ln_gamma(mode + T::one())).exp();
    let tol = T::lit(TRUNCATION);

    let mut sum = w_mode * pick(a0 + mode)?;

    // Upward: shapes grow; P decreases, Q increases in the shape.
    let mut w = w_mode;
    let mut j = mode_idx;
    for _ in 0..MAX_TERMS {
        j += 1;
        let jf = T::from_count(j);
        w *= lambda / jf;
        let term_cdf = pick(a0 + jf)?;
        sum += w * term_cdf;
        let ratio = lambda / (jf + T::one());
        let rest_bound = if ratio < T::one() {
            let bound_cdf = match tail {
                Tail::Lower => term_cdf,
                Tail::Upper => T::one(),
            };
            w * ratio / (T::one() - ratio) * bound_cdf
        } else {
            T::infinity()
        };
        if rest_bound <= tol * sum || rest_bound < T::min_positive_value() {
            break;
        }
    }

    // Downward towards j = 0.
    let mut w = w_mode;
    let mut j = mode_idx;
    while j > 0 {
        let jf = T::from_count(j);
        w *= jf / lambda;
        j -= 1;
        let term_cdf = pick(a0 + T::from_count(j))?;
        sum += w * term_cdf;
        let ratio = T::from_count(j) / lambda;
        let bound_cdf = match tail {
            Tail::Lower => T::one(),
            Tail::Upper => term_cdf,
        };
        let rest_bound = w * ratio / (T::one() - ratio) * bound_cdf;
        if rest_bound <= tol * sum || rest_bound < T::min_positive_value() {
            break;
        }
    }
    Ok(sum.min(T::one()).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statfun::gamma_reg_lower;

    #[test]
    fn central_exponential_case() {
        let p = noncentral_chisq_cdf(2, 0.0_f64, 2.0 * 2.0_f64.ln()).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
    }

    #[test]
    fn spherical_example_values() {
        let upper = noncentral_chisq_cdf(4, 10.0_f64, 26.80).unwrap();
        assert!((upper - 0.95).abs() < 5e-4);
        let a0 = noncentral_chisq_cdf(4, 26.80_f64, 10.0).unwrap();
        assert!((a0 - 0.0085).abs() < 5e-4);
    }

    #[test]
    fn zero_noncentrality_is_central() {
        for df in 1..8 {
            for &x in &[0.1, 1.0, 3.3, 10.0, 40.0] {
                let a = noncentral_chisq_cdf(df, 0.0_f64, x).unwrap();
                let b = gamma_reg_lower(df as f64 / 2.0, x / 2.0).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tails_sum_to_one() {
        for &(nc, x) in &[(10.0, 26.8), (2221.0, 2100.0), (0.3, 0.01), (500.0, 900.0)] {
            let lo = noncentral_chisq_cdf::<f64>(4, nc, x).unwrap();
            let hi = noncentral_chisq_sf::<f64>(4, nc, x).unwrap();
            assert!((lo + hi - 1.0).abs() < 1e-12, "nc = {nc}, x = {x}");
        }
    }

    #[test]
    fn series_oracle_large_noncentrality() {
        // Brute force: every Poisson term from 0 to 4000.
        let (df, nc, x) = (4_u32, 2221.6_f64, 2100.0_f64);
        let lambda = nc / 2.0;
        let mut sum = 0.0;
        for j in 0..4000 {
            let jf = j as f64;
            let w = (-lambda + jf * lambda.ln() - ln_gamma(jf + 1.0)).exp();
            sum += w * gamma_reg_lower(df as f64 / 2.0 + jf, x / 2.0).unwrap();
        }
        let got = noncentral_chisq_cdf(df, nc, x).unwrap();
        assert!(((got - sum) / sum).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(noncentral_chisq_cdf(0, 1.0_f64, 1.0).is_err());
        assert!(noncentral_chisq_cdf(2, -1.0_f64, 1.0).is_err());
        assert_eq!(noncentral_chisq_cdf(3, 5.0_f64, 0.0).unwrap(), 0.0);
    }
}
