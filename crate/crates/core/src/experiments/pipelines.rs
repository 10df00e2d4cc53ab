//! One function per experiment. Each returns the data rows plus
//! experiment-specific metadata; `run_experiment` adds the common header.

use std::f64::consts::TAU;

use crate::channel::{draw_multipath_channel, draw_one_ring_channel, PathLossModel};
use crate::covariance::{
    covariance_monte_carlo, covariance_one_ring, covariance_segment, covariance_ula_analytic, effective_rank,
    rank_bound_distributed, rank_bound_random, rank_bound_segment, rank_bound_ula, CovarianceMatrix,
};
use crate::error::{config, Result};
use crate::estimation::{
    estimation_mse_db, ls_estimate, noise_var_from_cell_edge_snr, simulate_pilot_rx, MmseEstimator, PilotConfig,
};
use crate::filtering::{
    bessel_j0, crosscorr_limit_samples, ks_exponential, mrc_weights, path_correlation, sigma_sq,
    subspace_filter_min_rows, subspace_mrc_receiver, uplink_sinr, BeamformerMethod, BeamformerWeights,
    CrossCorrScenario, MmseCombiner, NetworkLoss, SigmaMode, SubspaceFilter,
};
use crate::linalg::{c64, pairwise_sum, CMatrix};
use crate::par::try_map_indexed;
use crate::rng::{derive_seed, derive_seed2};
use crate::scenario::{
    make_disk_network, make_hex_network_with, make_random_linear, make_ula, place_scatterers_ring, ArrayGeometry,
    ClusterSet, Point, UserPlacement,
};

use super::config::ExperimentConfig;
use super::table::ResultTable;

const BEAMFORMERS: [BeamformerMethod; 4] = [
    BeamformerMethod::MrcLs,
    BeamformerMethod::MrcMmse,
    BeamformerMethod::MmseBf,
    BeamformerMethod::SubspaceMrc,
];

fn counts(cfg: &ExperimentConfig, key: &str) -> Result<Vec<usize>> {
    cfg.list(key)?
        .iter()
        .map(|&x| {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(config(key, format!("entries must be positive integers, got {x}")))
            }
        })
        .collect()
}

fn positive_grid(cfg: &ExperimentConfig, key: &str) -> Result<Vec<f64>> {
    let xs = cfg.list(key)?;
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0)) {
        return Err(config(key, format!("entries must be positive, got {x}")));
    }
    Ok(xs.to_vec())
}

fn nonnegative_grid(cfg: &ExperimentConfig, key: &str) -> Result<Vec<f64>> {
    let xs = cfg.list(key)?;
    if let Some(x) = xs.iter().find(|x| !(**x >= 0.0)) {
        return Err(config(key, format!("entries must be nonnegative, got {x}")));
    }
    Ok(xs.to_vec())
}

fn at_least_one(cfg: &ExperimentConfig, key: &str) -> Result<usize> {
    let n = cfg.count(key)?;
    if n == 0 {
        return Err(config(key, "must be at least 1"));
    }
    Ok(n)
}

fn interval_deg(cfg: &ExperimentConfig, key: &str) -> Result<(f64, f64)> {
    match cfg.list(key)? {
        [a, b] => Ok((*a, *b)),
        _ => Err(config(key, "expected [start, end] in degrees")),
    }
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

fn rank_ratio(rank: usize, bound: f64) -> f64 {
    if bound > 0.0 {
        rank as f64 / bound
    } else {
        f64::NAN
    }
}

pub(super) fn rank_vs_m(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let ms = counts(cfg, "M_grid")?;
    let lambda = cfg.num("lambda")?;
    let spacing = cfg.num("spacing_wl")? * lambda;
    let clusters = ClusterSet::from_degrees(&[(cfg.num("theta_min_deg")?, cfg.num("theta_max_deg")?)])
        .map_err(|e| config("theta_min_deg", e.to_string()))?;
    let threshold = cfg.num("threshold")?;
    let ula = cfg.text("array")? == "ula";
    let rows = try_map_indexed(ms.len(), |i| {
        let m = ms[i];
        let geom = if ula {
            make_ula(m, spacing, lambda)?
        } else {
            make_random_linear(m, spacing, lambda, derive_seed(cfg.seed, i as u64))?
        };
        let cov = covariance_ula_analytic(&geom, &clusters, 1.0, None)?;
        let rank = effective_rank(&cov, threshold)?.effective_rank;
        let bound = if ula {
            rank_bound_ula(&clusters, spacing, lambda, m)
        } else {
            rank_bound_random(&clusters, spacing, lambda, m)
        };
        Ok(vec![
            m.into(),
            rank.into(),
            bound.into(),
            rank_ratio(rank, bound).into(),
        ])
    })?;
    let mut t = ResultTable::new(&["M", "effective_rank", "bound", "rank_over_bound"]);
    rows.into_iter().for_each(|r| t.push(r));
    t.meta("covariance", "midpoint quadrature over the AOA interval, beta = 1");
    Ok(t)
}

pub(super) fn pilot_decontamination(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let ms = counts(cfg, "M_grid")?;
    let lambda = cfg.num("lambda")?;
    let spacing = cfg.num("spacing_wl")? * lambda;
    let desired = ClusterSet::from_degrees(&[interval_deg(cfg, "desired_deg")?])
        .map_err(|e| config("desired_deg", e.to_string()))?;
    let interferer = ClusterSet::from_degrees(&[interval_deg(cfg, "interferer_deg")?])
        .map_err(|e| config("interferer_deg", e.to_string()))?;
    let paths = at_least_one(cfg, "P")?;
    let tau = at_least_one(cfg, "tau")?;
    let trials = at_least_one(cfg, "trials")?;
    let noise = 10f64.powf(-cfg.num("snr_db")? / 10.0);
    const METHODS: [&str; 4] = ["ls", "mmse", "ls-interference-free", "mmse-interference-free"];

    let mut t = ResultTable::new(&["M", "method", "mse_db", "trials"]);
    for (i, &m) in ms.iter().enumerate() {
        let geom = make_random_linear(m, spacing, lambda, derive_seed2(cfg.seed, i as u64, 0))?;
        let r1 = covariance_ula_analytic(&geom, &desired, 1.0, None)?;
        let r2 = covariance_ula_analytic(&geom, &interferer, 1.0, None)?;
        let pilot = PilotConfig::random_phase(tau, noise, derive_seed2(cfg.seed, i as u64, 1))?;
        let mmse = MmseEstimator::new(&pilot, &[&r1, &r2])?;
        let mmse_free = MmseEstimator::new(&pilot, &[&r1])?;
        let per_trial = try_map_indexed(trials, |k| {
            let base = derive_seed2(cfg.seed, i as u64, 2 + k as u64);
            let h1 = draw_multipath_channel(&geom, &desired, paths, 1.0, derive_seed(base, 0))?;
            let h2 = draw_multipath_channel(&geom, &interferer, paths, 1.0, derive_seed(base, 1))?;
            // Same noise draw with and without the interferer.
            let y = simulate_pilot_rx(&[&h1, &h2], &pilot, derive_seed(base, 2))?;
            let y0 = simulate_pilot_rx(&[&h1], &pilot, derive_seed(base, 2))?;
            Ok([
                estimation_mse_db(&ls_estimate(&y, &pilot)?.h_hat, &h1.h)?,
                estimation_mse_db(&mmse.estimate(&y)?.h_hat, &h1.h)?,
                estimation_mse_db(&ls_estimate(&y0, &pilot)?.h_hat, &h1.h)?,
                estimation_mse_db(&mmse_free.estimate(&y0)?.h_hat, &h1.h)?,
            ])
        })?;
        for (j, name) in METHODS.iter().enumerate() {
            let v: Vec<f64> = per_trial.iter().map(|x| x[j]).collect();
            t.push(vec![m.into(), (*name).into(), mean(&v).into(), trials.into()]);
        }
    }
    t.meta("mse_db", "mean over trials of the per-trial normalized error in dB");
    t.meta("noise_var", noise);
    t.meta("beta", "1 for both users");
    Ok(t)
}

pub(super) fn rank_vs_r(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let radii = positive_grid(cfg, "r_grid")?;
    let m = at_least_one(cfg, "M")?;
    let lambda = cfg.num("lambda")?;
    let threshold = cfg.num("threshold")?;
    let loss = if cfg.flag("path_loss")? {
        PathLossModel::new(cfg.num("alpha")?, cfg.num("gamma")?)?
    } else {
        PathLossModel::disabled()
    };
    let monte_carlo = cfg.text("covariance")? == "monte-carlo";
    let draws = match cfg.count("mc_draws")? {
        0 => 10 * m,
        n => n,
    };
    let paths = at_least_one(cfg, "P")?;
    let geom = make_disk_network(m, cfg.num("L")?, lambda, derive_seed(cfg.seed, 0))?;
    let mut t = ResultTable::new(&["r", "effective_rank", "bound", "rank_over_bound"]);
    for (i, &r) in radii.iter().enumerate() {
        let cov = if monte_carlo {
            let base = derive_seed(cfg.seed, 1 + i as u64);
            covariance_monte_carlo(
                |k| {
                    let s = derive_seed(base, k as u64);
                    let scat = place_scatterers_ring(Point::ORIGIN, r, paths, derive_seed(s, 0))?;
                    Ok(draw_one_ring_channel(&geom, &scat, &loss, derive_seed(s, 1))?.h)
                },
                draws,
            )?
        } else {
            covariance_one_ring(&geom, Point::ORIGIN, r, &loss, None)?
        };
        let rank = effective_rank(&cov, threshold)?.effective_rank;
        let bound = rank_bound_distributed(r, lambda);
        t.push(vec![
            r.into(),
            rank.into(),
            bound.into(),
            rank_ratio(rank, bound).into(),
        ]);
    }
    if monte_carlo {
        t.meta("mc_draws_resolved", draws);
    }
    t.meta("user", "origin");
    Ok(t)
}

pub(super) fn segment_rank(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let lengths = positive_grid(cfg, "length_grid")?;
    let m = at_least_one(cfg, "M")?;
    let lambda = cfg.num("lambda")?;
    let threshold = cfg.num("threshold")?;
    let geom = make_disk_network(m, cfg.num("L")?, lambda, derive_seed(cfg.seed, 0))?;
    let loss = PathLossModel::disabled();
    let mut t = ResultTable::new(&[
        "length",
        "length_over_lambda",
        "effective_rank",
        "bound",
        "rank_over_bound",
    ]);
    for &len in &lengths {
        let cov = covariance_segment(&geom, Point::ORIGIN, len, 0.0, &loss, None)?;
        let rank = effective_rank(&cov, threshold)?.effective_rank;
        let bound = rank_bound_segment(len, lambda);
        t.push(vec![
            len.into(),
            (len / lambda).into(),
            rank.into(),
            bound.into(),
            rank_ratio(rank, bound).into(),
        ]);
    }
    t.meta("segment", "from the origin along +x, path loss disabled");
    Ok(t)
}

/// `|h₂ᴴh₁|/(‖h₁‖‖h₂‖)` for a scatterer at the origin and one at `(D, 0)`,
/// without path loss, for each spacing `D`.
pub fn path_correlation_curve(geom: &ArrayGeometry, spacings: &[f64]) -> Result<Vec<f64>> {
    let k = -TAU / geom.wavelength;
    let path = |s: Point| -> Vec<c64> {
        geom.positions
            .iter()
            .map(|a| c64::from_polar(1.0, k * a.dist(s)))
            .collect()
    };
    let h1 = path(Point::ORIGIN);
    spacings
        .iter()
        .map(|&d| path_correlation(&h1, &path(Point::new(d, 0.0))))
        .collect()
}

pub(super) fn path_correlation_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let ms = counts(cfg, "M_grid")?;
    let lambda = cfg.num("lambda")?;
    let radius = cfg.num("L")?;
    let (dmax, step) = (cfg.num("D_max_wl")?, cfg.num("D_step_wl")?);
    if !(step > 0.0) {
        return Err(config("D_step_wl", "must be positive"));
    }
    if !(dmax >= 0.0) {
        return Err(config("D_max_wl", "must be nonnegative"));
    }
    let trials = at_least_one(cfg, "trials")?;
    let n = (dmax / step + 1e-9).floor() as usize + 1;
    let spacings_wl: Vec<f64> = (0..n).map(|j| j as f64 * step).collect();
    let spacings: Vec<f64> = spacings_wl.iter().map(|x| x * lambda).collect();
    let mut t = ResultTable::new(&["M", "D_over_lambda", "correlation", "bessel_abs"]);
    for (i, &m) in ms.iter().enumerate() {
        let curves = try_map_indexed(trials, |k| {
            let geom = make_disk_network(m, radius, lambda, derive_seed2(cfg.seed, i as u64, k as u64))?;
            path_correlation_curve(&geom, &spacings)
        })?;
        for (j, &x) in spacings_wl.iter().enumerate() {
            let v: Vec<f64> = curves.iter().map(|c| c[j]).collect();
            t.push(vec![
                m.into(),
                x.into(),
                mean(&v).into(),
                bessel_j0(TAU * x).abs().into(),
            ]);
        }
    }
    t.meta("path_loss", "disabled");
    Ok(t)
}

pub(super) fn sigma_sq_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let ds = nonnegative_grid(cfg, "D_grid")?;
    let net = NetworkLoss {
        cell_radius: cfg.num("L")?,
        alpha: cfg.num("alpha")?,
        gamma: cfg.num("gamma")?,
        mode: match cfg.text("sigma_mode")? {
            "linear-alpha" => SigmaMode::LinearAlpha,
            _ => SigmaMode::FirstPrinciples,
        },
    };
    let r = cfg.num("r")?;
    let values = try_map_indexed(ds.len(), |i| sigma_sq(ds[i], &net, r))?;
    let mut t = ResultTable::new(&["D", "sigma_sq"]);
    for (d, s) in ds.iter().zip(values) {
        t.push(vec![(*d).into(), s.into()]);
    }
    Ok(t)
}

pub(super) fn crosscorr_dist(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let ds = nonnegative_grid(cfg, "D_grid")?;
    let samples = at_least_one(cfg, "samples")?;
    let sc = |d: f64| -> Result<CrossCorrScenario> {
        Ok(CrossCorrScenario {
            m: at_least_one(cfg, "M")?,
            spacing: d,
            r: cfg.num("r")?,
            wavelength: cfg.num("lambda")?,
            network: NetworkLoss {
                cell_radius: cfg.num("L")?,
                alpha: cfg.num("alpha")?,
                gamma: cfg.num("gamma")?,
                mode: SigmaMode::FirstPrinciples,
            },
        })
    };
    let mut t = ResultTable::new(&["D", "samples", "mean", "ks_statistic", "ks_critical_95"]);
    for (i, &d) in ds.iter().enumerate() {
        let xs = crosscorr_limit_samples(&sc(d)?, samples, derive_seed(cfg.seed, i as u64))?;
        let (ks, m) = ks_exponential(&xs)?;
        t.push(vec![
            d.into(),
            samples.into(),
            m.into(),
            ks.into(),
            (1.358 / (samples as f64).sqrt()).into(),
        ]);
    }
    t.meta("statistic", "|h2q^H h1p|^2 / (sigma^2(D) M)");
    Ok(t)
}

/// Shared layout of the two-user distributed experiments: user 1 at the
/// origin, user 2 at `(D, 0)`, antennas uniform in the disk.
struct TwoUser {
    distances: Vec<f64>,
    m: usize,
    radius: f64,
    r: f64,
    paths: usize,
    loss: PathLossModel,
    noise: f64,
    tau: usize,
    trials: usize,
    geometries: usize,
    lambda: f64,
}

impl TwoUser {
    fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let (alpha, gamma) = (cfg.num("alpha")?, cfg.num("gamma")?);
        let radius = cfg.num("L")?;
        let r = cfg.num("r")?;
        Ok(Self {
            distances: nonnegative_grid(cfg, "distance_grid")?,
            m: at_least_one(cfg, "M")?,
            radius,
            r,
            paths: at_least_one(cfg, "P")?,
            loss: PathLossModel::new(alpha, gamma)?,
            noise: noise_var_from_cell_edge_snr(alpha, radius, r, gamma, cfg.num("snr_db")?),
            tau: at_least_one(cfg, "tau")?,
            trials: at_least_one(cfg, "trials")?,
            geometries: at_least_one(cfg, "geometries")?,
            lambda: cfg.num("lambda")?,
        })
    }

    fn geometry(&self, seed: u64, g: usize) -> Result<ArrayGeometry> {
        make_disk_network(self.m, self.radius, self.lambda, derive_seed2(seed, 0, g as u64))
    }

    fn pilot(&self, seed: u64, g: usize) -> Result<PilotConfig> {
        PilotConfig::random_phase(self.tau, self.noise, derive_seed2(seed, 1, g as u64))
    }

    fn covariance(&self, geom: &ArrayGeometry, user: Point) -> Result<CovarianceMatrix> {
        covariance_one_ring(geom, user, self.r, &self.loss, None)
    }

    /// Channels of both users and the received pilot block for one trial.
    fn trial(
        &self,
        geom: &ArrayGeometry,
        pilot: &PilotConfig,
        user2: Point,
        base: u64,
    ) -> Result<(Vec<c64>, Vec<c64>, CMatrix)> {
        let s1 = place_scatterers_ring(Point::ORIGIN, self.r, self.paths, derive_seed(base, 0))?;
        let s2 = place_scatterers_ring(user2, self.r, self.paths, derive_seed(base, 1))?;
        let h1 = draw_one_ring_channel(geom, &s1, &self.loss, derive_seed(base, 2))?.h;
        let h2 = draw_one_ring_channel(geom, &s2, &self.loss, derive_seed(base, 3))?.h;
        let y = simulate_pilot_rx(&[&h1, &h2], pilot, derive_seed(base, 4))?;
        Ok((h1, h2, y))
    }

    fn trial_seed(seed: u64, g: usize, i: usize, k: usize) -> u64 {
        derive_seed2(derive_seed(seed, 2 + g as u64), i as u64, k as u64)
    }

    fn metadata(&self, t: &mut ResultTable) {
        t.meta("noise_var", self.noise);
        t.meta("snr_definition", "alpha / ((L + r)^gamma noise_var)");
        t.meta("users", "user 1 at the origin, user 2 at (distance, 0)");
    }
}

pub(super) fn mse_vs_distance(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let s = TwoUser::from_config(cfg)?;
    let nd = s.distances.len();
    // [distance][method] -> per-trial dB values over all geometries
    let mut acc = vec![[Vec::new(), Vec::new()]; nd];
    for g in 0..s.geometries {
        let geom = s.geometry(cfg.seed, g)?;
        let pilot = s.pilot(cfg.seed, g)?;
        let r1 = s.covariance(&geom, Point::ORIGIN)?;
        for (i, &d) in s.distances.iter().enumerate() {
            let user2 = Point::new(d, 0.0);
            let r2 = s.covariance(&geom, user2)?;
            let mmse = MmseEstimator::new(&pilot, &[&r1, &r2])?;
            let per_trial = try_map_indexed(s.trials, |k| {
                let (h1, _, y) = s.trial(&geom, &pilot, user2, TwoUser::trial_seed(cfg.seed, g, i, k))?;
                Ok([
                    estimation_mse_db(&ls_estimate(&y, &pilot)?.h_hat, &h1)?,
                    estimation_mse_db(&mmse.estimate(&y)?.h_hat, &h1)?,
                ])
            })?;
            for x in per_trial {
                acc[i][0].push(x[0]);
                acc[i][1].push(x[1]);
            }
        }
    }
    let mut t = ResultTable::new(&["distance", "method", "mse_db", "trials"]);
    for (i, &d) in s.distances.iter().enumerate() {
        for (j, name) in ["ls", "mmse"].iter().enumerate() {
            t.push(vec![
                d.into(),
                (*name).into(),
                mean(&acc[i][j]).into(),
                acc[i][j].len().into(),
            ]);
        }
    }
    s.metadata(&mut t);
    t.meta(
        "mse_db",
        "mean over trials and layouts of the per-trial normalized error of user 1 in dB",
    );
    Ok(t)
}

/// Per-user receiver state: MMSE estimator for the user's own channel,
/// MMSE combiner and subspace filter against the other users.
struct Receiver {
    mmse: MmseEstimator,
    combiner: MmseCombiner,
    filter: SubspaceFilter,
}

impl Receiver {
    fn new(
        pilot: &PilotConfig,
        own: &CovarianceMatrix,
        interference: &CovarianceMatrix,
        threshold: f64,
        min_rows: usize,
    ) -> Result<Self> {
        Ok(Self {
            mmse: MmseEstimator::new(pilot, &[own, interference])?,
            combiner: MmseCombiner::new(interference, pilot.noise_var)?,
            filter: subspace_filter_min_rows(interference, threshold, min_rows)?,
        })
    }

    /// SINR of every method in [`BEAMFORMERS`] order. `channels[0]` is the
    /// user's own channel.
    fn sinrs(&self, y: &CMatrix, pilot: &PilotConfig, channels: &[&[c64]]) -> Result<[f64; 4]> {
        let ls = ls_estimate(y, pilot)?.h_hat;
        let mmse = self.mmse.estimate(y)?.h_hat;
        let weights: [BeamformerWeights; 4] = [
            mrc_weights(&ls, BeamformerMethod::MrcLs),
            mrc_weights(&mmse, BeamformerMethod::MrcMmse),
            self.combiner.weights(&mmse)?,
            subspace_mrc_receiver(&self.filter, y, pilot)?,
        ];
        let mut out = [0.0; 4];
        for (o, w) in out.iter_mut().zip(&weights) {
            *o = uplink_sinr(w, channels, pilot.noise_var)?;
        }
        Ok(out)
    }
}

fn rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

pub(super) fn sumrate_vs_distance(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let s = TwoUser::from_config(cfg)?;
    let threshold = cfg.num("threshold")?;
    let min_rows = cfg.count("min_filter_rows")?;
    let nd = s.distances.len();
    let mut acc: Vec<[Vec<f64>; 4]> = vec![Default::default(); nd];
    for g in 0..s.geometries {
        let geom = s.geometry(cfg.seed, g)?;
        let pilot = s.pilot(cfg.seed, g)?;
        let r1 = s.covariance(&geom, Point::ORIGIN)?;
        for (i, &d) in s.distances.iter().enumerate() {
            let user2 = Point::new(d, 0.0);
            let r2 = s.covariance(&geom, user2)?;
            let rx1 = Receiver::new(&pilot, &r1, &r2, threshold, min_rows)?;
            let rx2 = Receiver::new(&pilot, &r2, &r1, threshold, min_rows)?;
            let per_trial = try_map_indexed(s.trials, |k| {
                let (h1, h2, y) = s.trial(&geom, &pilot, user2, TwoUser::trial_seed(cfg.seed, g, i, k))?;
                let a = rx1.sinrs(&y, &pilot, &[&h1, &h2])?;
                let b = rx2.sinrs(&y, &pilot, &[&h2, &h1])?;
                Ok([0, 1, 2, 3].map(|j| rate(a[j]) + rate(b[j])))
            })?;
            for x in per_trial {
                for j in 0..4 {
                    acc[i][j].push(x[j]);
                }
            }
        }
    }
    let mut t = ResultTable::new(&["distance", "method", "sum_rate", "trials"]);
    for (i, &d) in s.distances.iter().enumerate() {
        for (j, method) in BEAMFORMERS.iter().enumerate() {
            t.push(vec![
                d.into(),
                method.name().into(),
                mean(&acc[i][j]).into(),
                acc[i][j].len().into(),
            ]);
        }
    }
    s.metadata(&mut t);
    t.meta(
        "sum_rate",
        "log2(1 + SINR) summed over both users, averaged over trials and layouts (bit/s/Hz)",
    );
    Ok(t)
}

pub(super) fn percell_rate_vs_r(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let radii = positive_grid(cfg, "r_grid")?;
    let m_per_cell = at_least_one(cfg, "M_per_cell")?;
    let radius = cfg.num("L")?;
    let paths = at_least_one(cfg, "P")?;
    let (alpha, gamma) = (cfg.num("alpha")?, cfg.num("gamma")?);
    let loss = PathLossModel::new(alpha, gamma)?;
    let snr_db = cfg.num("snr_db")?;
    let tau = at_least_one(cfg, "tau")?;
    let trials = at_least_one(cfg, "trials")?;
    let geometries = at_least_one(cfg, "geometries")?;
    let lambda = cfg.num("lambda")?;
    let threshold = cfg.num("threshold")?;
    let min_rows = cfg.count("min_filter_rows")?;
    let placement = match cfg.text("user_placement")? {
        "cell-edge" => UserPlacement::CellEdge,
        _ => UserPlacement::Uniform,
    };

    let mut t = ResultTable::new(&["r", "method", "per_cell_rate", "trials"]);
    for (i, &r) in radii.iter().enumerate() {
        let noise = noise_var_from_cell_edge_snr(alpha, radius, r, gamma, snr_db);
        let mut acc: [Vec<f64>; 4] = Default::default();
        for g in 0..geometries {
            // Antennas and users depend only on the layout seed, so every r
            // sees the same network.
            let net = make_hex_network_with(
                radius,
                m_per_cell,
                lambda,
                r,
                paths,
                placement,
                derive_seed2(cfg.seed, 0, g as u64),
            )?;
            let cells = net.num_cells();
            let users: Vec<Point> = net.cells.iter().map(|c| c.user).collect();
            let all = net.all_antennas()?;
            let pilot = PilotConfig::random_phase(tau, noise, derive_seed2(cfg.seed, 1, g as u64))?;
            let receivers = try_map_indexed(cells, |b| {
                let geom = &net.cells[b].antennas;
                let covs = users
                    .iter()
                    .map(|&u| covariance_one_ring(geom, u, r, &loss, None))
                    .collect::<Result<Vec<_>>>()?;
                let others: Vec<&CovarianceMatrix> = (0..cells).filter(|&k| k != b).map(|k| &covs[k]).collect();
                let interference = CovarianceMatrix::sum(&others)?;
                Receiver::new(&pilot, &covs[b], &interference, threshold, min_rows)
            })?;
            let base = derive_seed2(derive_seed(cfg.seed, 2 + g as u64), i as u64, 0);
            let per_trial = try_map_indexed(trials, |k| {
                let ts = derive_seed(base, 1 + k as u64);
                // Full-network channel of every user; cell b sees a slice.
                let h: Vec<Vec<c64>> = (0..cells)
                    .map(|u| {
                        let scat = place_scatterers_ring(users[u], r, paths, derive_seed2(ts, 0, u as u64))?;
                        Ok(draw_one_ring_channel(&all, &scat, &loss, derive_seed2(ts, 1, u as u64))?.h)
                    })
                    .collect::<Result<_>>()?;
                let mut rates = [0.0; 4];
                for (b, rx) in receivers.iter().enumerate() {
                    let span = b * m_per_cell..(b + 1) * m_per_cell;
                    let mut local: Vec<&[c64]> = vec![&h[b][span.clone()]];
                    local.extend((0..cells).filter(|&u| u != b).map(|u| &h[u][span.clone()]));
                    let y = simulate_pilot_rx(&local, &pilot, derive_seed2(ts, 2, b as u64))?;
                    let sinr = rx.sinrs(&y, &pilot, &local)?;
                    for j in 0..4 {
                        rates[j] += rate(sinr[j]) / cells as f64;
                    }
                }
                Ok(rates)
            })?;
            for x in per_trial {
                for j in 0..4 {
                    acc[j].push(x[j]);
                }
            }
        }
        for (j, method) in BEAMFORMERS.iter().enumerate() {
            t.push(vec![
                r.into(),
                method.name().into(),
                mean(&acc[j]).into(),
                acc[j].len().into(),
            ]);
        }
    }
    t.meta("cells", 7);
    t.meta(
        "snr_definition",
        "alpha / ((L + r)^gamma noise_var), L = hexagon circumradius",
    );
    t.meta(
        "processing",
        "per cell: each cell estimates and decodes its own user from its own antennas",
    );
    t.meta(
        "per_cell_rate",
        "sum over cells of log2(1 + SINR) divided by the cell count, averaged over trials and layouts",
    );
    Ok(t)
}
