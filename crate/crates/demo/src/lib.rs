//! Browser bindings for three interactive views: the eigenvalue spectrum of
//! an AOA covariance, path correlation against |J0|, and σ²(D).
//!
//! Every function returns a flat `Float64Array`-compatible vector; the page
//! splits it into series.

use std::f64::consts::TAU;

use dmimo::covariance::{covariance_ula_analytic, effective_rank, rank_bound_random, rank_bound_ula};
use dmimo::experiments::path_correlation_curve;
use dmimo::filtering::{bessel_j0, sigma_sq, NetworkLoss, SigmaMode};
use dmimo::scenario::{make_disk_network, make_random_linear, make_ula, ClusterSet};
use wasm_bindgen::prelude::*;

const LAMBDA: f64 = 0.15;

fn js_err(e: dmimo::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Layout: `[effective_rank, bound, λ₁/λ₁ (dB), λ₂/λ₁ (dB), ...]`, with
/// eigenvalues floored at -200 dB.
#[wasm_bindgen]
pub fn eigen_spectrum(
    m: usize,
    spacing_wl: f64,
    theta_min_deg: f64,
    theta_max_deg: f64,
    random_array: bool,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    spectrum(m, spacing_wl, theta_min_deg, theta_max_deg, random_array, seed as u64).map_err(js_err)
}

fn spectrum(m: usize, spacing_wl: f64, tmin: f64, tmax: f64, random: bool, seed: u64) -> dmimo::Result<Vec<f64>> {
    let d = spacing_wl * LAMBDA;
    let geom = if random {
        make_random_linear(m, d, LAMBDA, seed)?
    } else {
        make_ula(m, d, LAMBDA)?
    };
    let clusters = ClusterSet::from_degrees(&[(tmin, tmax)])?;
    let report = effective_rank(&covariance_ula_analytic(&geom, &clusters, 1.0, None)?, 1e-5)?;
    let bound = if random {
        rank_bound_random(&clusters, d, LAMBDA, m)
    } else {
        rank_bound_ula(&clusters, d, LAMBDA, m)
    };
    let top = report.eigenvalues[0].max(f64::MIN_POSITIVE);
    let mut out = vec![report.effective_rank as f64, bound];
    out.extend(
        report
            .eigenvalues
            .iter()
            .map(|v| (10.0 * (v / top).log10()).max(-200.0)),
    );
    Ok(out)
}

/// Layout: `[D/λ, correlation, |J0(2πD/λ)|]` triples for `points` spacings
/// from 0 to `d_max_wl`.
#[wasm_bindgen]
pub fn bessel_correlation(m: usize, d_max_wl: f64, points: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    correlation(m, d_max_wl, points, seed as u64).map_err(js_err)
}

fn correlation(m: usize, d_max_wl: f64, points: usize, seed: u64) -> dmimo::Result<Vec<f64>> {
    let n = points.max(2);
    let xs: Vec<f64> = (0..n).map(|k| d_max_wl * k as f64 / (n - 1) as f64).collect();
    let geom = make_disk_network(m, 500.0, LAMBDA, seed)?;
    let spacings: Vec<f64> = xs.iter().map(|x| x * LAMBDA).collect();
    let c = path_correlation_curve(&geom, &spacings)?;
    Ok(xs
        .iter()
        .zip(&c)
        .flat_map(|(&x, &v)| [x, v, bessel_j0(TAU * x).abs()])
        .collect())
}

/// Layout: `[D, σ²(D)]` pairs for `points` distances from 0 to `d_max`
/// (unit α, disk radius 500 m).
#[wasm_bindgen]
pub fn sigma_sq_curve(r: f64, gamma: f64, d_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    sigma_curve(r, gamma, d_max, points).map_err(js_err)
}

fn sigma_curve(r: f64, gamma: f64, d_max: f64, points: usize) -> dmimo::Result<Vec<f64>> {
    let net = NetworkLoss {
        cell_radius: 500.0,
        alpha: 1.0,
        gamma,
        mode: SigmaMode::FirstPrinciples,
    };
    let n = points.max(2);
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let d = d_max * k as f64 / (n - 1) as f64;
        out.push(d);
        out.push(sigma_sq(d, &net, r)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts() {
        let s = spectrum(64, 0.5, 70.0, 110.0, false, 1).unwrap();
        assert_eq!(s.len(), 66);
        assert_eq!(s[2], 0.0);
        assert!(s[0] >= 1.0 && s[0] <= 64.0);
        let c = correlation(200, 1.0, 5, 1).unwrap();
        assert_eq!(c.len(), 15);
        assert!((c[1] - 1.0).abs() < 1e-12 && (c[2] - 1.0).abs() < 1e-12);
        let g = sigma_curve(15.0, 2.5, 300.0, 4).unwrap();
        assert_eq!(g.len(), 8);
        assert!(g[1] > g[7]);
    }
}
