//! Interference analysis and receive filtering for distributed arrays.
//!
//! Matched-filter SIR bounds (Krasikov envelope for nearby users, path-loss
//! correlation `σ²(D)` for distant users), the normalized cross-correlation
//! limit law, and the receivers compared in the rate experiments: MRC on
//! LS/MMSE estimates, a covariance-based MMSE combiner, and MRC after
//! projecting onto the interference-free eigenspace.

mod bessel;

use std::f64::consts::{PI, TAU};

use crate::channel::PathLossModel;
use crate::covariance::CovarianceMatrix;
use crate::error::{invalid, Error, Result};
use crate::estimation::PilotConfig;
use crate::linalg::{self, c64, dot, dot_h, norm_sqr, CMatrix};
use crate::quadrature::{integrate, integrate_2d, QuadOptions};
use crate::rng::{derive_seed, rng_from_seed, uniform_phase};
use crate::scenario::{sample_disk, Point};

pub use bessel::bessel_j0;

/// Stand-in for an infinite SIR so tables stay totally ordered.
pub const SIR_INFINITY: f64 = 1e30;

/// Default relative cutoff for non-negligible interference eigenvalues.
pub const DEFAULT_SUBSPACE_THRESHOLD: f64 = 1e-5;

/// `|h₁ᴴh₁|²/|h₂ᴴh₁|²`, or [`SIR_INFINITY`] for orthogonal channels.
pub fn matched_filter_sir(h1: &[c64], h2: &[c64]) -> Result<f64> {
    if h1.len() != h2.len() {
        return Err(Error::DimensionMismatch {
            expected: h1.len(),
            got: h2.len(),
        });
    }
    let s = norm_sqr(h1);
    if s == 0.0 {
        return Err(invalid("desired channel is zero"));
    }
    let i = dot_h(h2, h1).norm_sqr();
    if i == 0.0 {
        return Ok(SIR_INFINITY);
    }
    Ok((s * s / i).min(SIR_INFINITY))
}

/// `|h₂ᴴh₁|/(‖h₁‖‖h₂‖)`.
pub fn path_correlation(h1p: &[c64], h2q: &[c64]) -> Result<f64> {
    if h1p.len() != h2q.len() {
        return Err(Error::DimensionMismatch {
            expected: h1p.len(),
            got: h2q.len(),
        });
    }
    let (a, b) = (norm_sqr(h1p), norm_sqr(h2q));
    if a == 0.0 || b == 0.0 {
        return Err(invalid("path correlation of a zero vector"));
    }
    Ok((dot_h(h2q, h1p).norm() / (a * b).sqrt()).min(1.0))
}

/// Prefactor convention for `σ²(D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaMode {
    /// `E{β₂β₁}` with one factor of `α` per path gain (`α²` overall).
    #[default]
    FirstPrinciples,
    /// Single `α` prefactor; equals the first-principles value when `α = 1`.
    LinearAlpha,
}

/// Path-loss parameters of the disk network used by `σ²(D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkLoss {
    /// Radius `L` of the antenna disk.
    pub cell_radius: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mode: SigmaMode,
}

impl NetworkLoss {
    pub fn alpha_eff(&self) -> f64 {
        match self.mode {
            SigmaMode::FirstPrinciples => self.alpha * self.alpha,
            SigmaMode::LinearAlpha => self.alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirBoundInput {
    /// Inter-user distance `D_u`.
    pub du: f64,
    pub r: f64,
    pub wavelength: f64,
    pub m: usize,
    pub network: NetworkLoss,
}

/// Smallest `D_u − 2r` for which the Krasikov bound holds:
/// `√(3 + 3^{2/3})·λ/(4π)` (about 0.17936·λ).
pub fn krasikov_validity_threshold(wavelength: f64) -> f64 {
    (3.0 + 9f64.cbrt()).sqrt() * wavelength / (4.0 * PI)
}

/// Lower bound on the matched-filter SIR for two users whose scattering
/// rings are `D_u − 2r` apart: with `x = 2π(D_u − 2r)/λ`,
/// `π((4x² − 3)^{3/2} − 3)/(16x² − 20)`.
pub fn krasikov_sir_bound(input: &SirBoundInput) -> Result<f64> {
    let gap = input.du - 2.0 * input.r;
    let threshold = krasikov_validity_threshold(input.wavelength);
    if !(gap > threshold) {
        return Err(Error::Domain(format!(
            "Krasikov bound needs D_u − 2r > {:.5}·λ (D_u > {:.6} m), got D_u = {} m",
            threshold / input.wavelength,
            threshold + 2.0 * input.r,
            input.du
        )));
    }
    let x = TAU * gap / input.wavelength;
    let x2 = x * x;
    Ok(PI * ((4.0 * x2 - 3.0).powf(1.5) - 3.0) / (16.0 * x2 - 20.0))
}

/// Path-loss correlation
/// `σ²(D) = α_eff · 2/(πL²) ∫₀^L ∫₀^π ρ / ((ρ + r)^γ (√(D² + ρ² − 2ρD cos φ) + r)^γ) dφ dρ`,
/// by nested adaptive Gauss–Kronrod to relative tolerance 1e-7.
pub fn sigma_sq(d: f64, net: &NetworkLoss, r: f64) -> Result<f64> {
    sigma_sq_with(
        d,
        net,
        r,
        QuadOptions {
            rel_tol: 1e-7,
            abs_tol: 0.0,
            max_intervals: 4000,
        },
    )
}

pub fn sigma_sq_with(d: f64, net: &NetworkLoss, r: f64, opts: QuadOptions) -> Result<f64> {
    let l = net.cell_radius;
    if !(d >= 0.0) || !(l > 0.0) || !(r > 0.0) || !(net.gamma > 0.0) || !(net.alpha > 0.0) {
        return Err(invalid(format!(
            "σ² needs D ≥ 0, L > 0, r > 0, α > 0, γ > 0 (D={d}, L={l}, r={r}, α={}, γ={})",
            net.alpha, net.gamma
        )));
    }
    let g = net.gamma;
    let scale = net.alpha_eff() * 2.0 / (PI * l * l);
    if d == 0.0 {
        // φ-independent: π ∫ ρ/(ρ + r)^{2γ} dρ
        let v = integrate(|rho| rho * (rho + r).powf(-2.0 * g), 0.0, l, opts)?;
        return Ok(scale * PI * v.value);
    }
    let f = |rho: f64, phi: f64| {
        let dist = (d * d + rho * rho - 2.0 * rho * d * phi.cos()).max(0.0).sqrt();
        rho * (rho + r).powf(-g) * (dist + r).powf(-g)
    };
    // The integrand peaks at (ρ, φ) = (D, 0); split the radial range there.
    let mut total = 0.0;
    let breaks: Vec<f64> = if d < l { vec![0.0, d, l] } else { vec![0.0, l] };
    for w in breaks.windows(2) {
        total += integrate_2d(f, (w[0], w[1]), (0.0, PI), opts)?.value;
    }
    Ok(scale * total)
}

/// `M·C²/σ²(D_u − 2r)`.
pub fn sir_bound_distant(input: &SirBoundInput, c: f64) -> Result<f64> {
    if input.m == 0 || !(c > 0.0) {
        return Err(invalid("distant-user bound needs M ≥ 1 and C > 0"));
    }
    let gap = input.du - 2.0 * input.r;
    if !(gap >= 0.0) {
        return Err(invalid(format!("scattering rings overlap: D_u − 2r = {gap}")));
    }
    let s2 = sigma_sq(gap, &input.network, input.r)?;
    if !(s2 > 0.0) {
        return Err(invalid("σ²(D_u − 2r) is not positive"));
    }
    Ok(input.m as f64 * c * c / s2)
}

/// Setup for sampling `|h₂qᴴh₁p|²/(σ²(D)·M)`: scatterer `p` of user 1 at
/// the origin, scatterer `q` of user 2 at `(D, 0)`, antennas uniform in the
/// disk of radius `L` around the origin, redrawn for every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCorrScenario {
    pub m: usize,
    pub spacing: f64,
    pub r: f64,
    pub wavelength: f64,
    pub network: NetworkLoss,
}

pub fn crosscorr_limit_samples(sc: &CrossCorrScenario, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if sc.m == 0 || trials == 0 {
        return Err(invalid("need M ≥ 1 and at least one trial"));
    }
    let loss = PathLossModel::new(sc.network.alpha, sc.network.gamma)?;
    let s2 = sigma_sq(
        sc.spacing,
        &NetworkLoss {
            mode: SigmaMode::FirstPrinciples,
            ..sc.network
        },
        sc.r,
    )?;
    let s1 = Point::ORIGIN;
    let s2p = Point::new(sc.spacing, 0.0);
    let k = -TAU / sc.wavelength;
    crate::par::try_map_indexed(trials, |t| {
        let mut rng = rng_from_seed(derive_seed(seed, t as u64));
        let phi1 = uniform_phase(&mut rng);
        let phi2 = uniform_phase(&mut rng);
        let mut acc = c64::new(0.0, 0.0);
        for _ in 0..sc.m {
            let a = sample_disk(&mut rng, Point::ORIGIN, sc.network.cell_radius);
            let d1 = a.dist(s1) + sc.r;
            let d2 = a.dist(s2p) + sc.r;
            let h1 = c64::from_polar(crate::channel::path_loss(d1 - sc.r, sc.r, &loss)?.sqrt(), k * d1 + phi1);
            let h2 = c64::from_polar(crate::channel::path_loss(d2 - sc.r, sc.r, &loss)?.sqrt(), k * d2 + phi2);
            acc += h2.conj() * h1;
        }
        Ok(acc.norm_sqr() / (s2 * sc.m as f64))
    })
}

/// Kolmogorov–Smirnov distance between the samples and the exponential law
/// with the same mean. Returns `(statistic, fitted mean)`.
pub fn ks_exponential(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() || samples.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(invalid("KS test needs nonnegative finite samples"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return Err(invalid("samples are all zero"));
    }
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = 1.0 - (-x / mean).exp();
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok((d, mean))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamformerMethod {
    MrcLs,
    MrcMmse,
    MmseBf,
    SubspaceMrc,
}

impl BeamformerMethod {
    pub fn name(self) -> &'static str {
        match self {
            BeamformerMethod::MrcLs => "ls+mrc",
            BeamformerMethod::MrcMmse => "mmse+mrc",
            BeamformerMethod::MmseBf => "mmse+mmse",
            BeamformerMethod::SubspaceMrc => "subspace-mrc",
        }
    }
}

/// Receive row vector `w`; the combiner output is `w·y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerWeights {
    pub w: Vec<c64>,
    pub method: BeamformerMethod,
    /// `M − m` for the subspace receiver.
    pub subspace_dim: Option<usize>,
}

/// Rows of `Uᴴ` spanning the eigenspace of `R_I` with eigenvalues at or
/// below `threshold·λ_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFilter {
    /// `(M − m) × M`.
    pub w1: CMatrix,
    /// Number of interference eigenvalues above the cutoff.
    pub interference_rank: usize,
}

pub fn subspace_filter(r_i: &CovarianceMatrix, threshold: f64) -> Result<SubspaceFilter> {
    build_subspace_filter(r_i, threshold, 0)
}

/// Like [`subspace_filter`] but always keeps at least `min_rows` of the
/// weakest eigenmodes, so the receiver still avoids the strongest
/// interference directions when no eigenvalue is negligible.
pub fn subspace_filter_min_rows(r_i: &CovarianceMatrix, threshold: f64, min_rows: usize) -> Result<SubspaceFilter> {
    build_subspace_filter(r_i, threshold, min_rows)
}

fn build_subspace_filter(r_i: &CovarianceMatrix, threshold: f64, min_rows: usize) -> Result<SubspaceFilter> {
    if !(threshold >= 0.0) {
        return Err(invalid("subspace threshold must be nonnegative"));
    }
    let m_dim = r_i.dim();
    let eig = linalg::hermitian_eigen(&r_i.matrix)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut m = if lmax > 0.0 {
        eig.values.iter().filter(|&&v| v > threshold * lmax).count()
    } else {
        0
    };
    if m_dim - m < min_rows {
        m = m_dim - min_rows.min(m_dim);
    }
    if m == m_dim {
        return Err(Error::EmptyFilter { dim: m_dim });
    }
    let w1 = CMatrix::from_fn(m_dim - m, m_dim, |row, col| eig.vectors[(col, m + row)].conj());
    Ok(SubspaceFilter {
        w1,
        interference_rank: m,
    })
}

/// Subspace MRC: `ĥ̲₁ = W₁ Y s*/(sᵀs*)` and `w = ĥ̲₁ᴴ W₁`.
pub fn subspace_mrc_receiver(filter: &SubspaceFilter, y: &CMatrix, pilot: &PilotConfig) -> Result<BeamformerWeights> {
    if y.nrows() != filter.w1.ncols() {
        return Err(Error::DimensionMismatch {
            expected: filter.w1.ncols(),
            got: y.nrows(),
        });
    }
    let ys = pilot.despread(y)?;
    let energy = norm_sqr(pilot.sequence());
    let projected: Vec<c64> = linalg::mat_vec(&filter.w1, &ys)
        .into_iter()
        .map(|z| z / energy)
        .collect();
    // w = ĥ̲ᴴ W₁, i.e. wᵀ = W₁ᵀ conj(ĥ̲)
    let conj: Vec<c64> = projected.iter().map(|z| z.conj()).collect();
    let w1 = &filter.w1;
    let w = (0..w1.ncols())
        .map(|j| (0..w1.nrows()).map(|i| conj[i] * w1[(i, j)]).sum())
        .collect();
    Ok(BeamformerWeights {
        w,
        method: BeamformerMethod::SubspaceMrc,
        subspace_dim: Some(w1.nrows()),
    })
}

/// MRC on a channel estimate: `w = ĥᴴ`.
pub fn mrc_weights(h_hat: &[c64], method: BeamformerMethod) -> BeamformerWeights {
    BeamformerWeights {
        w: h_hat.iter().map(|z| z.conj()).collect(),
        method,
        subspace_dim: None,
    }
}

/// `w = ĥᴴ(σ²I + R_int)⁻¹`, via a Hermitian solve.
pub fn mmse_beamformer(h_hat: &[c64], r_int: &CovarianceMatrix, noise_var: f64) -> Result<BeamformerWeights> {
    MmseCombiner::new(r_int, noise_var)?.weights(h_hat)
}

/// Factor-once form of [`mmse_beamformer`] for repeated use with the same
/// interference covariance.
#[derive(Debug, Clone)]
pub struct MmseCombiner {
    inverse: CMatrix,
}

impl MmseCombiner {
    pub fn new(r_int: &CovarianceMatrix, noise_var: f64) -> Result<Self> {
        if !(noise_var >= 0.0) {
            return Err(invalid("noise variance must be nonnegative"));
        }
        let m = r_int.dim();
        let mut a = r_int.matrix.clone();
        for i in 0..m {
            a[(i, i)] += c64::new(noise_var, 0.0);
        }
        let out = linalg::solve_hermitian_pd(&a, &linalg::identity(m))?;
        Ok(Self { inverse: out.x })
    }

    pub fn weights(&self, h_hat: &[c64]) -> Result<BeamformerWeights> {
        if h_hat.len() != self.inverse.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.inverse.nrows(),
                got: h_hat.len(),
            });
        }
        // (A⁻¹ĥ)ᴴ = ĥᴴA⁻¹ for Hermitian A.
        let x = linalg::mat_vec(&self.inverse, h_hat);
        Ok(BeamformerWeights {
            w: x.iter().map(|z| z.conj()).collect(),
            method: BeamformerMethod::MmseBf,
            subspace_dim: None,
        })
    }
}

/// `|w h₁|²/(Σ_{k≥2}|w h_k|² + σ²‖w‖²)` with `channels[0]` the target.
pub fn uplink_sinr<C: AsRef<[c64]>>(w: &BeamformerWeights, channels: &[C], noise_var: f64) -> Result<f64> {
    let wn = norm_sqr(&w.w);
    if wn == 0.0 {
        return Err(invalid("zero beamformer"));
    }
    let first = channels.first().ok_or_else(|| invalid("no channels"))?.as_ref();
    if first.len() != w.w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.w.len(),
            got: first.len(),
        });
    }
    let signal = dot(&w.w, first).norm_sqr();
    let mut interference = 0.0;
    for h in &channels[1..] {
        let h = h.as_ref();
        if h.len() != w.w.len() {
            return Err(Error::DimensionMismatch {
                expected: w.w.len(),
                got: h.len(),
            });
        }
        interference += dot(&w.w, h).norm_sqr();
    }
    let denom = interference + noise_var * wn;
    if denom == 0.0 {
        return Ok(if signal > 0.0 { SIR_INFINITY } else { 0.0 });
    }
    Ok((signal / denom).min(SIR_INFINITY))
}

/// `Σk log₂(1 + SINR_k)`.
pub fn sum_rate(sinrs: &[f64]) -> Result<f64> {
    if let Some(bad) = sinrs.iter().find(|s| !(**s >= 0.0)) {
        return Err(invalid(format!("SINR must be nonnegative, got {bad}")));
    }
    Ok(sinrs.iter().map(|s| (1.0 + s).log2()).sum())
}

/// Sum-rate divided by the number of cells.
pub fn per_cell_rate(sinrs: &[f64], cells: usize) -> Result<f64> {
    if cells == 0 {
        return Err(invalid("cell count must be positive"));
    }
    Ok(sum_rate(sinrs)? / cells as f64)
}
