//! Runtime property suite: Penrose identities of the pseudoinverse on random
//! rank-deficient matrices, and MMSE never losing to LS on average over a
//! set of estimation scenarios.

use crate::channel::{draw_multipath_channel, draw_one_ring_channel, PathLossModel};
use crate::covariance::{covariance_one_ring, covariance_ula_analytic, CovarianceMatrix};
use crate::error::Result;
use crate::estimation::{ls_estimate, simulate_pilot_rx, MmseEstimator, PilotConfig};
use crate::linalg::{adjoint, c64, frobenius, mul, norm_sqr, pseudo_inverse, sub, CMatrix};
use crate::rng::{complex_gaussian, derive_seed, derive_seed2, rng_from_seed};
use crate::scenario::{make_disk_network, make_random_linear, place_scatterers_ring, ClusterSet, Point};
use rand::Rng;

pub const PENROSE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Worst relative residual of the four Penrose identities over `count`
/// random complex matrices of random shape and deficient rank.
pub fn penrose_worst_residual(count: usize, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let m = rng.random_range(2..40usize);
        let n = rng.random_range(2..40usize);
        let rank = rng.random_range(1..m.min(n));
        let b = CMatrix::from_fn(m, rank, |_, _| complex_gaussian(&mut rng, 1.0));
        let c = CMatrix::from_fn(rank, n, |_, _| complex_gaussian(&mut rng, 1.0));
        let a = mul(&b, &c);
        let x = pseudo_inverse(&a, 1e-10)?;
        let ax = mul(&a, &x);
        let xa = mul(&x, &a);
        let rel = |p: &CMatrix, q: &CMatrix| frobenius(&sub(p, q)) / frobenius(q).max(f64::MIN_POSITIVE);
        for r in [
            rel(&mul(&ax, &a), &a),
            rel(&mul(&xa, &x), &x),
            rel(&adjoint(&ax), &ax),
            rel(&adjoint(&xa), &xa),
        ] {
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

type Sampler = Box<dyn Fn(u64) -> Result<(Vec<c64>, Vec<c64>)>>;

/// One estimation scenario: desired and interfering covariances plus a
/// channel sampler for each.
struct Scenario {
    name: String,
    rd: CovarianceMatrix,
    ri: CovarianceMatrix,
    noise: f64,
    tau: usize,
    draw: Sampler,
}

fn scenarios(seed: u64) -> Result<Vec<Scenario>> {
    let lambda = 0.15;
    let mut out = Vec::new();
    for (i, &(m, snr_db, d_int, tau)) in [
        (32usize, 10.0, (0.0, 30.0), 4usize),
        (64, 20.0, (20.0, 60.0), 8),
        (48, 0.0, (100.0, 140.0), 16),
    ]
    .iter()
    .enumerate()
    {
        let geom = make_random_linear(m, lambda / 2.0, lambda, derive_seed2(seed, 0, i as u64))?;
        let cd = ClusterSet::from_degrees(&[(40.0, 80.0)])?;
        let ci = ClusterSet::from_degrees(&[d_int])?;
        let rd = covariance_ula_analytic(&geom, &cd, 1.0, None)?;
        let ri = covariance_ula_analytic(&geom, &ci, 1.0, None)?;
        let g = geom.clone();
        out.push(Scenario {
            name: format!("multipath M={m} snr={snr_db}dB tau={tau}"),
            rd,
            ri,
            noise: 10f64.powf(-snr_db / 10.0),
            tau,
            draw: Box::new(move |s| {
                Ok((
                    draw_multipath_channel(&g, &cd, 20, 1.0, derive_seed(s, 0))?.h,
                    draw_multipath_channel(&g, &ci, 20, 1.0, derive_seed(s, 1))?.h,
                ))
            }),
        });
    }
    let geom = make_disk_network(40, 100.0, lambda, derive_seed(seed, 9))?;
    let loss = PathLossModel::disabled();
    let (u1, u2, r) = (Point::ORIGIN, Point::new(20.0, 0.0), 1.0);
    let rd = covariance_one_ring(&geom, u1, r, &loss, None)?;
    let ri = covariance_one_ring(&geom, u2, r, &loss, None)?;
    out.push(Scenario {
        name: "one-ring M=40 r=1m".into(),
        rd,
        ri,
        noise: 0.1,
        tau: 8,
        draw: Box::new(move |s| {
            let s1 = place_scatterers_ring(u1, r, 30, derive_seed(s, 0))?;
            let s2 = place_scatterers_ring(u2, r, 30, derive_seed(s, 1))?;
            Ok((
                draw_one_ring_channel(&geom, &s1, &loss, derive_seed(s, 2))?.h,
                draw_one_ring_channel(&geom, &s2, &loss, derive_seed(s, 3))?.h,
            ))
        }),
    });
    Ok(out)
}

/// Mean normalized error (linear) of LS and MMSE for each scenario.
pub fn mmse_vs_ls(trials: usize, seed: u64) -> Result<Vec<(String, f64, f64)>> {
    let mut out = Vec::new();
    for (i, sc) in scenarios(seed)?.into_iter().enumerate() {
        let pilot = PilotConfig::random_phase(sc.tau, sc.noise, derive_seed2(seed, 1, i as u64))?;
        let mmse = MmseEstimator::new(&pilot, &[&sc.rd, &sc.ri])?;
        let (mut ls_err, mut mmse_err) = (0.0, 0.0);
        for t in 0..trials {
            let s = derive_seed2(seed, 2 + i as u64, t as u64);
            let (h1, h2) = (sc.draw)(s)?;
            let y = simulate_pilot_rx(&[&h1, &h2], &pilot, derive_seed(s, 99))?;
            let e = |h_hat: &[c64]| {
                let d: Vec<c64> = h_hat.iter().zip(&h1).map(|(a, b)| a - b).collect();
                norm_sqr(&d) / norm_sqr(&h1)
            };
            ls_err += e(&ls_estimate(&y, &pilot)?.h_hat);
            mmse_err += e(&mmse.estimate(&y)?.h_hat);
        }
        out.push((sc.name, ls_err / trials as f64, mmse_err / trials as f64));
    }
    Ok(out)
}

pub fn run(seed: u64) -> Result<Vec<Check>> {
    let worst = penrose_worst_residual(100, seed)?;
    let mut checks = vec![Check {
        name: "penrose identities (100 rank-deficient matrices)".into(),
        passed: worst <= PENROSE_TOL,
        detail: format!("worst relative residual {worst:.3e} (tolerance {PENROSE_TOL:e})"),
    }];
    for (name, ls, mmse) in mmse_vs_ls(100, seed)? {
        checks.push(Check {
            name: format!("mmse <= ls: {name}"),
            passed: mmse <= ls,
            detail: format!("LS {:.2} dB, MMSE {:.2} dB", 10.0 * ls.log10(), 10.0 * mmse.log10()),
        });
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let checks = run(1).unwrap();
        assert_eq!(checks.len(), 5);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
