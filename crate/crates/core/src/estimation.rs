//! Pilot phase simulation and channel estimators.
//!
//! All users share the pilot `s` (the contaminated case). The received block
//! is `Y = Σb h_b sᵀ + N`, an `M × τ` matrix, and both estimators work on the
//! despread vector `Y s*`.

use std::fmt;

use crate::channel::ChannelRealization;
use crate::covariance::CovarianceMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c64, hermitize, solve_hermitian_pd, CMatrix};
use crate::rng::{complex_gaussian, rng_from_seed, uniform_phase};

pub use crate::linalg::pseudo_inverse;

/// Reported instead of −∞ when the estimate is exact.
pub const MSE_FLOOR_DB: f64 = -300.0;

/// Relative singular-value cutoff for the pseudoinverse in the noiseless
/// error covariance.
pub const PINV_TOL: f64 = 1e-10;

impl AsRef<[c64]> for ChannelRealization {
    fn as_ref(&self) -> &[c64] {
        &self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotConfig {
    s: Vec<c64>,
    /// Noise variance per complex entry.
    pub noise_var: f64,
}

impl PilotConfig {
    /// Checks the power constraint `sᴴs = τ`.
    pub fn new(s: Vec<c64>, noise_var: f64) -> Result<Self> {
        if s.is_empty() {
            return Err(invalid("pilot length τ must be at least 1"));
        }
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(invalid(format!("noise variance must be ≥ 0, got {noise_var}")));
        }
        let tau = s.len() as f64;
        let power = linalg::norm_sqr(&s);
        if (power - tau).abs() > 1e-9 * tau {
            return Err(invalid(format!("pilot power sᴴs = {power} differs from τ = {tau}")));
        }
        Ok(Self { s, noise_var })
    }

    /// Constant-modulus pilot with i.i.d. uniform phases.
    pub fn random_phase(tau: usize, noise_var: f64, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let s = (0..tau)
            .map(|_| c64::from_polar(1.0, uniform_phase(&mut rng)))
            .collect();
        Self::new(s, noise_var)
    }

    pub fn sequence(&self) -> &[c64] {
        &self.s
    }

    pub fn tau(&self) -> usize {
        self.s.len()
    }

    pub fn with_noise_var(&self, noise_var: f64) -> Result<Self> {
        Self::new(self.s.clone(), noise_var)
    }

    /// `Y s*`.
    pub fn despread(&self, y: &CMatrix) -> Result<Vec<c64>> {
        if y.ncols() != self.tau() {
            return Err(Error::DimensionMismatch {
                expected: self.tau(),
                got: y.ncols(),
            });
        }
        let sc: Vec<c64> = self.s.iter().map(|z| z.conj()).collect();
        Ok(linalg::mat_vec(y, &sc))
    }

    /// `sᵀs* = sᴴs`.
    fn energy(&self) -> f64 {
        linalg::norm_sqr(&self.s)
    }
}

/// Per-antenna noise variance giving the requested cell-edge SNR, where
/// cell-edge SNR is `α/((L + r)^γ·σ²)` for unit transmit power.
pub fn noise_var_from_cell_edge_snr(alpha: f64, cell_radius: f64, r: f64, gamma: f64, snr_db: f64) -> f64 {
    alpha * (cell_radius + r).powf(-gamma) / 10f64.powf(snr_db / 10.0)
}

/// `Y = Σb h_b sᵀ + N` with `N` circular Gaussian of variance `σ²` per entry.
pub fn simulate_pilot_rx<C: AsRef<[c64]>>(channels: &[C], pilot: &PilotConfig, seed: u64) -> Result<CMatrix> {
    let m = channels
        .first()
        .map(|h| h.as_ref().len())
        .ok_or_else(|| invalid("no channels"))?;
    let mut sum = vec![c64::new(0.0, 0.0); m];
    for h in channels {
        let h = h.as_ref();
        if h.len() != m {
            return Err(invalid(format!("channel length {} differs from {m}", h.len())));
        }
        for (acc, z) in sum.iter_mut().zip(h) {
            *acc += z;
        }
    }
    let tau = pilot.tau();
    let mut y = CMatrix::from_fn(m, tau, |i, t| sum[i] * pilot.s[t]);
    if pilot.noise_var > 0.0 {
        let mut rng = rng_from_seed(seed);
        for t in 0..tau {
            for i in 0..m {
                y[(i, t)] += complex_gaussian(&mut rng, pilot.noise_var);
            }
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationMethod {
    Ls,
    Mmse,
    Subspace,
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimationMethod::Ls => "ls",
            EstimationMethod::Mmse => "mmse",
            EstimationMethod::Subspace => "subspace",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub h_hat: Vec<c64>,
    pub method: EstimationMethod,
    /// Filled by [`EstimationResult::with_truth`].
    pub mse_db: Option<f64>,
    /// Condition estimate of the MMSE system matrix.
    pub condition: Option<f64>,
}

impl EstimationResult {
    pub fn with_truth(mut self, h: &[c64]) -> Result<Self> {
        self.mse_db = Some(estimation_mse_db(&self.h_hat, h)?);
        Ok(self)
    }
}

/// `ĥ = Y s*/(sᴴs)`.
pub fn ls_estimate(y: &CMatrix, pilot: &PilotConfig) -> Result<EstimationResult> {
    let e = pilot.energy();
    if e == 0.0 {
        return Err(invalid("zero pilot"));
    }
    let h_hat = pilot.despread(y)?.into_iter().map(|z| z / e).collect();
    Ok(EstimationResult {
        h_hat,
        method: EstimationMethod::Ls,
        mse_db: None,
        condition: None,
    })
}

fn mmse_system(pilot: &PilotConfig, r_all: &[&CovarianceMatrix]) -> Result<CMatrix> {
    let first = r_all
        .first()
        .ok_or_else(|| invalid("MMSE needs at least the target covariance"))?;
    let m = first.dim();
    let tau = pilot.energy();
    let mut a = CMatrix::zeros(m, m);
    for r in r_all {
        if r.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: r.dim(),
            });
        }
        a += &r.matrix;
    }
    let mut a = linalg::scale(&a, tau);
    for i in 0..m {
        a[(i, i)] += c64::new(pilot.noise_var, 0.0);
    }
    hermitize(&mut a);
    Ok(a)
}

/// `ĥ₁ = R₁·(σ²I + τ·Σb R_b)⁻¹·Y s*`, with `r_all[0] = R₁`. Solved by
/// factorization, with a pseudo-solve when the system is singular.
pub fn mmse_estimate(y: &CMatrix, pilot: &PilotConfig, r_all: &[&CovarianceMatrix]) -> Result<EstimationResult> {
    let a = mmse_system(pilot, r_all)?;
    if y.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: y.nrows(),
        });
    }
    let ys = pilot.despread(y)?;
    let (x, out) = linalg::solve_hermitian_pd_vec(&a, &ys)?;
    let h_hat = linalg::mat_vec(&r_all[0].matrix, &x);
    Ok(EstimationResult {
        h_hat,
        method: EstimationMethod::Mmse,
        mse_db: None,
        condition: Some(out.condition),
    })
}

/// MMSE estimator with the filter `R₁(σ²I + τΣR_b)⁻¹` precomputed, for
/// Monte Carlo loops that reuse the same covariances.
#[derive(Debug, Clone)]
pub struct MmseEstimator {
    filter: CMatrix,
    pilot: PilotConfig,
    pub condition: f64,
}

impl MmseEstimator {
    pub fn new(pilot: &PilotConfig, r_all: &[&CovarianceMatrix]) -> Result<Self> {
        let a = mmse_system(pilot, r_all)?;
        // (A⁻¹R₁)ᴴ = R₁A⁻¹ since both are Hermitian.
        let out = solve_hermitian_pd(&a, &r_all[0].matrix)?;
        Ok(Self {
            filter: linalg::adjoint(&out.x),
            pilot: pilot.clone(),
            condition: out.condition,
        })
    }

    pub fn estimate(&self, y: &CMatrix) -> Result<EstimationResult> {
        if y.nrows() != self.filter.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.filter.nrows(),
                got: y.nrows(),
            });
        }
        let ys = self.pilot.despread(y)?;
        Ok(EstimationResult {
            h_hat: linalg::mat_vec(&self.filter, &ys),
            method: EstimationMethod::Mmse,
            mse_db: None,
            condition: Some(self.condition),
        })
    }
}

/// `C_e = R_d − R_d (R_d + R_i)† R_d`.
pub fn error_covariance_noiseless(rd: &CovarianceMatrix, ri: &CovarianceMatrix) -> Result<CMatrix> {
    if rd.dim() != ri.dim() {
        return Err(invalid(format!("dimension mismatch: {} vs {}", rd.dim(), ri.dim())));
    }
    let sum = &rd.matrix + &ri.matrix;
    let pinv = pseudo_inverse(&sum, PINV_TOL)?;
    let mut ce = &rd.matrix - linalg::mul(&linalg::mul(&rd.matrix, &pinv), &rd.matrix);
    hermitize(&mut ce);
    Ok(ce)
}

/// `10·log₁₀(‖ĥ − h‖²/‖h‖²)`, floored at [`MSE_FLOOR_DB`].
pub fn estimation_mse_db(h_hat: &[c64], h: &[c64]) -> Result<f64> {
    if h_hat.len() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: h_hat.len(),
        });
    }
    let hn = linalg::norm_sqr(h);
    if hn == 0.0 {
        return Err(invalid("true channel is zero"));
    }
    let err: f64 = h_hat.iter().zip(h).map(|(a, b)| (a - b).norm_sqr()).sum();
    if err == 0.0 {
        return Ok(MSE_FLOOR_DB);
    }
    Ok((10.0 * (err / hn).log10()).max(MSE_FLOOR_DB))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_multipath_channel, steering_vector_ula};
    use crate::covariance::covariance_ula_analytic;
    use crate::linalg::{frobenius, outer};
    use crate::rng::derive_seed;
    use crate::scenario::{make_random_linear, make_ula, ClusterSet};
    use proptest::prelude::*;

    fn vec_close(a: &[c64], b: &[c64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn some_channel(m: usize, seed: u64) -> Vec<c64> {
        let mut rng = rng_from_seed(seed);
        (0..m).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
    }

    #[test]
    fn pilot_power_constraint() {
        assert!(PilotConfig::new(vec![c64::new(2.0, 0.0)], 0.1).is_err());
        assert!(PilotConfig::new(vec![], 0.1).is_err());
        let p = PilotConfig::random_phase(16, 0.0, 1).unwrap();
        assert!((linalg::norm_sqr(p.sequence()) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_rx_and_ls() {
        let p = PilotConfig::random_phase(8, 0.0, 2).unwrap();
        let h1 = some_channel(5, 3);
        let h2 = some_channel(5, 4);
        let y = simulate_pilot_rx(&[&h1[..]], &p, 0).unwrap();
        for i in 0..5 {
            for t in 0..8 {
                assert!((y[(i, t)] - h1[i] * p.sequence()[t]).norm() < 1e-15);
            }
        }
        assert!(vec_close(&ls_estimate(&y, &p).unwrap().h_hat, &h1, 1e-13));
        let y2 = simulate_pilot_rx(&[&h1[..], &h2[..]], &p, 0).unwrap();
        let sum: Vec<c64> = h1.iter().zip(&h2).map(|(a, b)| a + b).collect();
        assert!(vec_close(&ls_estimate(&y2, &p).unwrap().h_hat, &sum, 1e-13));
        assert!(simulate_pilot_rx(&[&h1[..], &h2[..3]], &p, 0).is_err());
    }

    #[test]
    fn noise_energy_and_ls_noise_power() {
        let (m, tau, var) = (50, 16, 0.3);
        let p = PilotConfig::random_phase(tau, var, 5).unwrap();
        let zero = vec![c64::new(0.0, 0.0); m];
        let n = 400;
        let mut energy = 0.0;
        let mut ls_power = 0.0;
        for t in 0..n {
            let y = simulate_pilot_rx(&[&zero[..]], &p, derive_seed(7, t)).unwrap();
            energy += frobenius(&y).powi(2);
            ls_power += linalg::norm_sqr(&ls_estimate(&y, &p).unwrap().h_hat);
        }
        let energy = energy / n as f64;
        assert!((energy / (m as f64 * tau as f64 * var) - 1.0).abs() < 0.02);
        // ‖Y s*/τ‖² has mean M σ²/τ; relative SE is 1/√(M n).
        let ls_power = ls_power / n as f64;
        assert!((ls_power / (m as f64 * var / tau as f64) - 1.0).abs() < 0.03);
        let y1 = simulate_pilot_rx(&[&zero[..]], &p, 11).unwrap();
        assert_eq!(y1, simulate_pilot_rx(&[&zero[..]], &p, 11).unwrap());
    }

    #[test]
    fn mmse_limits() {
        let m = 6;
        let h = some_channel(m, 8);
        let mut rng = rng_from_seed(9);
        let a = CMatrix::from_fn(m, m, |_, _| complex_gaussian(&mut rng, 1.0));
        let r = CovarianceMatrix::from_matrix(linalg::mul_adj_right(&a, &a), 0).unwrap();
        let p = PilotConfig::random_phase(4, 1e-12, 10).unwrap();
        let y = simulate_pilot_rx(&[&h[..]], &p, 1).unwrap();
        let mmse = mmse_estimate(&y, &p, &[&r]).unwrap().h_hat;
        let ls = ls_estimate(&y, &p).unwrap().h_hat;
        assert!(vec_close(&mmse, &ls, 1e-6));

        // R₁ = I: scalar shrinkage τ/(σ² + τ).
        let p = PilotConfig::random_phase(4, 2.0, 10).unwrap();
        let y = simulate_pilot_rx(&[&h[..]], &p, 1).unwrap();
        let id = CovarianceMatrix::from_matrix(linalg::identity(m), 0).unwrap();
        let mmse = mmse_estimate(&y, &p, &[&id]).unwrap().h_hat;
        let ls = ls_estimate(&y, &p).unwrap().h_hat;
        let shrunk: Vec<c64> = ls.iter().map(|z| z * (4.0 / 6.0)).collect();
        assert!(vec_close(&mmse, &shrunk, 1e-12));
        let pre = MmseEstimator::new(&p, &[&id]).unwrap().estimate(&y).unwrap().h_hat;
        assert!(vec_close(&pre, &mmse, 1e-12));
    }

    #[test]
    fn mmse_singular_noiseless_uses_pseudo_solve() {
        let g = make_ula(8, 0.075, 0.15).unwrap();
        let a = steering_vector_ula(&g, 1.0).unwrap();
        let r = CovarianceMatrix::from_matrix(outer(&a, &a), 0).unwrap();
        let p = PilotConfig::random_phase(4, 0.0, 3).unwrap();
        let h: Vec<c64> = a.iter().map(|z| z * c64::new(0.3, -0.2)).collect();
        let y = simulate_pilot_rx(&[&h[..]], &p, 0).unwrap();
        let est = mmse_estimate(&y, &p, &[&r]).unwrap();
        assert!(est.condition.unwrap().is_infinite());
        assert!(vec_close(&est.h_hat, &h, 1e-10));
    }

    #[test]
    fn pseudo_inverse_examples() {
        let id = linalg::identity(3);
        assert!(frobenius(&(&pseudo_inverse(&id, 1e-12).unwrap() - &id)) < 1e-14);
    }

    #[test]
    fn error_covariance_examples() {
        let g = make_ula(10, 0.075, 0.15).unwrap();
        let a = steering_vector_ula(&g, 0.8).unwrap();
        let rd = CovarianceMatrix::from_matrix(outer(&a, &a), 0).unwrap();
        let ce = error_covariance_noiseless(&rd, &CovarianceMatrix::zeros(10)).unwrap();
        assert!(frobenius(&ce) < 1e-10 * frobenius(&rd.matrix));
        // Rd = Ri = aaᴴ: aaᴴ − aaᴴ(2aaᴴ)†aaᴴ = aaᴴ/2.
        let ce = error_covariance_noiseless(&rd, &rd).unwrap();
        let half = linalg::scale(&rd.matrix, 0.5);
        assert!(frobenius(&(&ce - &half)) < 1e-10 * frobenius(&half));
        assert!(error_covariance_noiseless(&rd, &CovarianceMatrix::zeros(3)).is_err());
    }

    #[test]
    fn mse_db_examples() {
        let h = some_channel(4, 1);
        assert_eq!(estimation_mse_db(&h, &h).unwrap(), MSE_FLOOR_DB);
        let zero = vec![c64::new(0.0, 0.0); 4];
        assert!(estimation_mse_db(&zero, &h).unwrap().abs() < 1e-12);
        let twice: Vec<c64> = h.iter().map(|z| z * 2.0).collect();
        assert!(estimation_mse_db(&twice, &h).unwrap().abs() < 1e-12);
        assert!(estimation_mse_db(&h, &zero).is_err());
    }

    #[test]
    fn mmse_beats_ls_on_average() {
        let l = 0.15;
        let g = make_random_linear(32, l / 2.0, l, 4).unwrap();
        let cd = ClusterSet::from_degrees(&[(20.0, 50.0)]).unwrap();
        let ci = ClusterSet::from_degrees(&[(60.0, 90.0)]).unwrap();
        let rd = covariance_ula_analytic(&g, &cd, 1.0, None).unwrap();
        let ri = covariance_ula_analytic(&g, &ci, 1.0, None).unwrap();
        let p = PilotConfig::random_phase(16, 0.1, 1).unwrap();
        let est = MmseEstimator::new(&p, &[&rd, &ri]).unwrap();
        let (mut ls, mut mm) = (0.0, 0.0);
        for t in 0..200u64 {
            let h1 = draw_multipath_channel(&g, &cd, 20, 1.0, derive_seed(1, t)).unwrap();
            let h2 = draw_multipath_channel(&g, &ci, 20, 1.0, derive_seed(2, t)).unwrap();
            let y = simulate_pilot_rx(&[&h1, &h2], &p, derive_seed(3, t)).unwrap();
            ls += estimation_mse_db(&ls_estimate(&y, &p).unwrap().h_hat, &h1.h).unwrap();
            mm += estimation_mse_db(&est.estimate(&y).unwrap().h_hat, &h1.h).unwrap();
        }
        assert!(mm < ls, "mmse {mm} ls {ls}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn mmse_scale_equivariant(seed in any::<u64>(), c in 0.01f64..100.0) {
            let m = 8;
            let mut rng = rng_from_seed(seed);
            let a = CMatrix::from_fn(m, 3, |_, _| complex_gaussian(&mut rng, 1.0));
            let b = CMatrix::from_fn(m, 3, |_, _| complex_gaussian(&mut rng, 1.0));
            let r1 = CovarianceMatrix::from_matrix(linalg::mul_adj_right(&a, &a), 0).unwrap();
            let r2 = CovarianceMatrix::from_matrix(linalg::mul_adj_right(&b, &b), 0).unwrap();
            let h1 = some_channel(m, seed ^ 1);
            let h2 = some_channel(m, seed ^ 2);
            let p = PilotConfig::random_phase(4, 0.5, seed).unwrap();
            let y = simulate_pilot_rx(&[&h1[..], &h2[..]], &p, seed).unwrap();
            let base = mmse_estimate(&y, &p, &[&r1, &r2]).unwrap().h_hat;
            // Channels and noise amplitude scaled by c, covariances and noise
            // power by c².
            let pc = p.with_noise_var(0.5 * c * c).unwrap();
            let yc = linalg::scale(&y, c);
            let scaled = mmse_estimate(&yc, &pc, &[&r1.scaled(c * c), &r2.scaled(c * c)]).unwrap().h_hat;
            let expect: Vec<c64> = base.iter().map(|z| z * c).collect();
            let tol = 1e-8 * linalg::norm_sqr(&expect).sqrt().max(1e-12);
            prop_assert!(vec_close(&scaled, &expect, tol));
        }

        #[test]
        fn error_covariance_is_psd_and_bounded(seed in any::<u64>()) {
            let m = 10;
            let mut rng = rng_from_seed(seed);
            let a = CMatrix::from_fn(m, 4, |_, _| complex_gaussian(&mut rng, 1.0));
            let b = CMatrix::from_fn(m, 3, |_, _| complex_gaussian(&mut rng, 1.0));
            let rd = CovarianceMatrix::from_matrix(linalg::mul_adj_right(&a, &a), 0).unwrap();
            let ri = CovarianceMatrix::from_matrix(linalg::mul_adj_right(&b, &b), 0).unwrap();
            let ce = CovarianceMatrix::from_matrix(error_covariance_noiseless(&rd, &ri).unwrap(), 0).unwrap();
            let ev = linalg::hermitian_eigenvalues(&ce.matrix).unwrap();
            let lmax_d = linalg::hermitian_eigenvalues(&rd.matrix).unwrap()[0];
            prop_assert!(ev.iter().all(|&v| v >= -1e-8 * lmax_d));
            prop_assert!(ev[0] <= lmax_d * (1.0 + 1e-8));
        }
    }
}
