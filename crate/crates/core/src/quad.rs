//! Globally adaptive 7/15-point Gauss–Kronrod quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 500,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod<F>(f: &mut F, lo: f64, hi: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(centre - half * x)?;
        let f2 = f(centre + half * x)?;
        k += w * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        lo,
        hi,
        value: k * half,
        error: ((k - g) * half).abs(),
    })
}

/// Integrates `f` over `[lo, hi]`, bisecting the worst segment until the
/// summed error estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain("quadrature bounds must be finite".into()));
    }
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let mut segments = vec![kronrod(&mut f, lo, hi)?];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::Numerical(format!(
                "quadrature reached {} intervals with error estimate {error:e}",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        segments.push(kronrod(&mut f, seg.lo, mid)?);
        segments.push(kronrod(&mut f, mid, seg.hi)?);
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_low_degree_polynomials() {
        let r = integrate(
            |x| Ok(x.powi(12) - 3.0 * x.powi(7)),
            -1.0,
            2.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = (2f64.powi(13) + 1.0) / 13.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!((r.value - exact).abs() < 1e-9 * exact.abs());
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn smooth_and_peaked_integrands() {
        let r = integrate(|x| Ok(x.exp()), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - (std::f64::consts::E - 1.0)).abs() < 1e-13);
        // narrow Gaussian bump
        let s = 0.05;
        let r = integrate(
            |x| Ok((-(x - 0.3) * (x - 0.3) / (2.0 * s * s)).exp()),
            -1.0,
            1.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate(
            |_| Err(Error::Numerical("x".into())),
            0.0,
            1.0,
            QuadOptions::default(),
        );
        assert!(r.is_err());
    }
}
