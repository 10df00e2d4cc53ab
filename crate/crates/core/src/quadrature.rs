//! Numerical integration: adaptive Gauss–Kronrod (7/15) in one and two
//! dimensions, plus fixed composite rules used for covariance integrals.

use crate::error::{invalid, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Returns a `Quadrature` error carrying the achieved estimate if the
/// tolerance is not met within `max_intervals` subdivisions.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("integration limits must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    // (a, b, value, error)
    let (v0, e0) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target || !err.is_finite() {
            if !total.is_finite() {
                return Err(Error::Quadrature {
                    value: total,
                    achieved: f64::INFINITY,
                });
            }
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                evaluations,
            });
        }
        if parts.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                value: total,
                achieved: err / total.abs().max(f64::MIN_POSITIVE),
            });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, mid);
        let (v2, e2) = gk15(&mut f, mid, pb);
        evaluations += 30;
        parts.push((pa, mid, v1, e1));
        parts.push((mid, pb, v2, e2));
    }
}

/// Iterated integral `∫_{ax}^{bx} ∫_{ay}^{by} f(x, y) dy dx`.
///
/// The inner integral runs at a tolerance ten times tighter than the outer
/// one so inner errors do not dominate the outer estimate.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    opts: QuadOptions,
) -> Result<QuadResult> {
    let inner_opts = QuadOptions {
        rel_tol: opts.rel_tol * 0.1,
        abs_tol: opts.abs_tol * 0.1,
        ..opts
    };
    let mut inner_err = 0.0;
    let mut inner_evals = 0usize;
    let mut failure: Option<Error> = None;
    let outer = integrate(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            match integrate(|y| f(x, y), ay, by, inner_opts) {
                Ok(r) => {
                    inner_err += r.abs_error;
                    inner_evals += r.evaluations;
                    r.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        ax,
        bx,
        opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(QuadResult {
        value: outer.value,
        abs_error: outer.abs_error,
        evaluations: inner_evals,
    })
}

/// Midpoint nodes and weights for `n` equal cells on `[a, b]`.
pub fn midpoint_rule(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    (0..n).map(|k| (a + (k as f64 + 0.5) * h, h)).collect()
}
