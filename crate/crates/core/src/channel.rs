//! Steering vectors and random channel realizations.
//!
//! Two channel families are provided: the classical multipath model on a
//! linear array (angles drawn from a [`ClusterSet`]) and the one-ring model
//! for antennas spread over the plane, where each path bounces off one local
//! scatterer around the user.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::rng::{rng_from_seed, uniform_phase};
use crate::scenario::{ArrayGeometry, ArrayKind, ClusterSet, ScattererSet};

/// Large-scale fading `β = α/(d + r)^γ`, or 1 when disabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub alpha: f64,
    pub gamma: f64,
    pub enabled: bool,
}

impl PathLossModel {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!(
                "path loss needs α > 0 and γ > 0, got α={alpha}, γ={gamma}"
            )));
        }
        Ok(Self {
            alpha,
            gamma,
            enabled: true,
        })
    }

    /// All path gains equal to one.
    pub fn disabled() -> Self {
        Self {
            alpha: 1.0,
            gamma: 1.0,
            enabled: false,
        }
    }
}

pub fn path_loss(d: f64, r: f64, loss: &PathLossModel) -> Result<f64> {
    if !(d >= 0.0) || !(r >= 0.0) {
        return Err(invalid(format!("path loss needs d ≥ 0 and r ≥ 0, got d={d}, r={r}")));
    }
    if d + r == 0.0 {
        return Err(invalid("path loss undefined at d + r = 0"));
    }
    Ok(gain(d + r, loss))
}

#[inline]
fn gain(dist: f64, loss: &PathLossModel) -> f64 {
    if loss.enabled {
        loss.alpha * dist.powf(-loss.gamma)
    } else {
        1.0
    }
}

/// `a(θ)` for a ULA: entry `m` is `exp(−j2π·m·D·cos θ/λ)`, `m = 0..M`.
pub fn steering_vector_ula(geom: &ArrayGeometry, theta: f64) -> Result<Vec<c64>> {
    let d = match (geom.kind, geom.spacing) {
        (ArrayKind::Ula, Some(d)) => d,
        _ => return Err(invalid("steering_vector_ula needs a ULA geometry")),
    };
    let k = -TAU * d * theta.cos() / geom.wavelength;
    Ok((0..geom.len()).map(|m| c64::from_polar(1.0, k * m as f64)).collect())
}

/// `a(θ)` for any linear geometry: entry `m` is `exp(−j2π·d_m·cos θ/λ)`.
pub fn steering_vector_positions(geom: &ArrayGeometry, theta: f64) -> Result<Vec<c64>> {
    if !geom.is_linear() {
        return Err(invalid("steering vectors need a linear (y = 0) geometry"));
    }
    let k = -TAU * theta.cos() / geom.wavelength;
    Ok(geom.positions.iter().map(|p| c64::from_polar(1.0, k * p.x)).collect())
}

/// How per-path phases are chosen. `Fixed` is a test hook that pins every
/// path phase to the same value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PhaseMode {
    #[default]
    Random,
    Fixed(f64),
}

impl PhaseMode {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            PhaseMode::Random => uniform_phase(rng),
            PhaseMode::Fixed(phi) => phi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawOptions {
    pub phase: PhaseMode,
    /// Keep the `P × M` matrix of per-path vectors.
    pub keep_paths: bool,
}

impl Default for DrawOptions {
    fn default() -> Self {
        Self {
            phase: PhaseMode::Random,
            keep_paths: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<c64>,
    /// Row `p` is the path vector `h_p`, with `h = (1/√P)·Σp h_p`.
    pub per_path: Option<CMatrix>,
    pub user: usize,
    pub seed: u64,
}

impl ChannelRealization {
    pub fn from_vector(h: Vec<c64>) -> Self {
        Self {
            h,
            per_path: None,
            user: 0,
            seed: 0,
        }
    }

    pub fn with_user(mut self, user: usize) -> Self {
        self.user = user;
        self
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn path(&self, p: usize) -> Option<Vec<c64>> {
        self.per_path
            .as_ref()
            .map(|m| (0..m.ncols()).map(|j| m[(p, j)]).collect())
    }

    /// One row per antenna: `index,real,imag`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "real", "imag"])?;
        for (i, z) in self.h.iter().enumerate() {
            w.write_record([i.to_string(), format!("{:.16e}", z.re), format!("{:.16e}", z.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        self.write_csv(file).map_err(|source| Error::Csv {
            path: path.into(),
            source,
        })
    }
}

/// `h = √(β/P)·Σp a(θp)·e^{jφp}` with `θp` uniform on the clusters.
pub fn draw_multipath_channel(
    geom: &ArrayGeometry,
    clusters: &ClusterSet,
    p: usize,
    beta: f64,
    seed: u64,
) -> Result<ChannelRealization> {
    draw_multipath_channel_with(
        geom,
        clusters,
        p,
        beta,
        seed,
        DrawOptions {
            keep_paths: false,
            ..Default::default()
        },
    )
}

pub fn draw_multipath_channel_with(
    geom: &ArrayGeometry,
    clusters: &ClusterSet,
    p: usize,
    beta: f64,
    seed: u64,
    opts: DrawOptions,
) -> Result<ChannelRealization> {
    if p == 0 {
        return Err(invalid("P must be at least 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("β must be positive, got {beta}")));
    }
    if !geom.is_linear() {
        return Err(invalid("multipath channel needs a linear geometry"));
    }
    let m = geom.len();
    let mut rng = rng_from_seed(seed);
    let amp = beta.sqrt();
    let scale = 1.0 / (p as f64).sqrt();
    let mut h = vec![c64::new(0.0, 0.0); m];
    let mut per_path = opts.keep_paths.then(|| CMatrix::zeros(p, m));
    let k = -TAU / geom.wavelength;
    for path in 0..p {
        let theta = clusters.sample(&mut rng);
        let phi = opts.phase.draw(&mut rng);
        let kc = k * theta.cos();
        for (i, pos) in geom.positions.iter().enumerate() {
            let v = c64::from_polar(amp, kc * pos.x + phi);
            h[i] += v * scale;
            if let Some(pp) = per_path.as_mut() {
                pp[(path, i)] = v;
            }
        }
    }
    Ok(ChannelRealization {
        h,
        per_path,
        user: 0,
        seed,
    })
}

/// One-ring channel: path `p` has entries
/// `√β_pm · exp(−j2π(d_pm + r)/λ) · exp(jφ_p)` and `h = (1/√P)·Σp h_p`.
pub fn draw_one_ring_channel(
    geom: &ArrayGeometry,
    scat: &ScattererSet,
    loss: &PathLossModel,
    seed: u64,
) -> Result<ChannelRealization> {
    draw_one_ring_channel_with(geom, scat, loss, seed, DrawOptions::default())
}

pub fn draw_one_ring_channel_with(
    geom: &ArrayGeometry,
    scat: &ScattererSet,
    loss: &PathLossModel,
    seed: u64,
    opts: DrawOptions,
) -> Result<ChannelRealization> {
    let p = scat.len();
    if p == 0 {
        return Err(invalid("scatterer set is empty"));
    }
    let m = geom.len();
    let r = scat.ring_radius;
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (p as f64).sqrt();
    let k = -TAU / geom.wavelength;
    let coincidence = 1e-9 * geom.wavelength;
    let mut h = vec![c64::new(0.0, 0.0); m];
    let mut per_path = opts.keep_paths.then(|| CMatrix::zeros(p, m));
    for (path, s) in scat.scatterers.iter().enumerate() {
        let phi = opts.phase.draw(&mut rng);
        for (i, pos) in geom.positions.iter().enumerate() {
            let d = pos.dist(*s);
            if loss.enabled && d <= coincidence {
                return Err(Error::DegenerateGeometry(format!(
                    "antenna {i} coincides with scatterer {path}"
                )));
            }
            let v = c64::from_polar(gain(d + r, loss).sqrt(), k * (d + r) + phi);
            h[i] += v * scale;
            if let Some(pp) = per_path.as_mut() {
                pp[(path, i)] = v;
            }
        }
    }
    Ok(ChannelRealization {
        h,
        per_path,
        user: 0,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot_h, norm_sqr};
    use crate::rng::derive_seed;
    use crate::scenario::{
        make_disk_network, make_random_linear, make_ula, place_scatterers_ring, ArrayGeometry, Point,
    };
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn close(a: c64, b: c64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn ula_steering_examples() {
        let lambda = 0.15;
        let g = make_ula(5, lambda / 2.0, lambda).unwrap();
        assert!(steering_vector_ula(&g, FRAC_PI_2)
            .unwrap()
            .iter()
            .all(|z| close(*z, c64::new(1.0, 0.0), 1e-12)));
        let two = make_ula(2, lambda / 2.0, lambda).unwrap();
        let a = steering_vector_ula(&two, FRAC_PI_3).unwrap();
        assert!(close(a[0], c64::new(1.0, 0.0), 1e-15));
        assert!(close(a[1], c64::new(0.0, -1.0), 1e-12));
        let e = steering_vector_ula(&g, 0.0).unwrap();
        for (m, z) in e.iter().enumerate() {
            let s = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!(close(*z, c64::new(s, 0.0), 1e-12));
        }
        let disk = make_disk_network(3, 1.0, 0.1, 1).unwrap();
        assert!(steering_vector_ula(&disk, 0.3).is_err());
        assert!(steering_vector_positions(&disk, 0.3).is_err());
    }

    #[test]
    fn positions_match_ula() {
        let g = make_ula(16, 0.06, 0.15).unwrap();
        for &t in &[0.1, 1.0, 2.5] {
            let a = steering_vector_ula(&g, t).unwrap();
            let b = steering_vector_positions(&g, t).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(close(*x, *y, 1e-12));
            }
        }
    }

    #[test]
    fn path_loss_examples() {
        let l = PathLossModel::new(1.0, 2.5).unwrap();
        assert_eq!(path_loss(0.0, 1.0, &l).unwrap(), 1.0);
        let outdoor = PathLossModel::new(1e7, 2.5).unwrap();
        let v = path_loss(485.0, 15.0, &outdoor).unwrap();
        assert!((v / (1e7 / 500f64.powf(2.5)) - 1.0).abs() < 1e-14);
        let double = PathLossModel::new(2e7, 2.5).unwrap();
        assert!((path_loss(485.0, 15.0, &double).unwrap() / v - 2.0).abs() < 1e-14);
        assert!(path_loss(0.0, 0.0, &l).is_err());
        assert_eq!(path_loss(3.0, 1.0, &PathLossModel::disabled()).unwrap(), 1.0);
        assert!(PathLossModel::new(0.0, 2.0).is_err());
    }

    #[test]
    fn multipath_single_fixed_path() {
        let g = make_ula(8, 0.075, 0.15).unwrap();
        let clusters = ClusterSet::new(vec![(0.7, 0.7)]).unwrap();
        let opts = DrawOptions {
            phase: PhaseMode::Fixed(0.0),
            keep_paths: true,
        };
        let ch = draw_multipath_channel_with(&g, &clusters, 1, 4.0, 3, opts).unwrap();
        let a = steering_vector_ula(&g, 0.7).unwrap();
        for (x, y) in ch.h.iter().zip(&a) {
            assert!(close(*x, y * 2.0, 1e-12));
        }
        assert_eq!(ch, draw_multipath_channel_with(&g, &clusters, 1, 4.0, 3, opts).unwrap());
        assert!(draw_multipath_channel(&g, &clusters, 0, 1.0, 3).is_err());
    }

    #[test]
    fn multipath_mean_power() {
        let g = make_random_linear(32, 0.075, 0.15, 1).unwrap();
        let clusters = ClusterSet::from_degrees(&[(70.0, 110.0)]).unwrap();
        let n = 10_000;
        let total: f64 = (0..n)
            .map(|t| {
                norm_sqr(
                    &draw_multipath_channel(&g, &clusters, 5, 2.0, derive_seed(9, t))
                        .unwrap()
                        .h,
                )
            })
            .sum();
        let mean = total / n as f64;
        assert!((mean / (2.0 * 32.0) - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn one_ring_unit_modulus_and_phase_formula() {
        let lambda = 0.15;
        let g = make_disk_network(20, 50.0, lambda, 4).unwrap();
        let scat = place_scatterers_ring(Point::new(3.0, 1.0), 5.0, 7, 8).unwrap();
        let opts = DrawOptions {
            phase: PhaseMode::Fixed(0.0),
            keep_paths: true,
        };
        let ch = draw_one_ring_channel_with(&g, &scat, &PathLossModel::disabled(), 1, opts).unwrap();
        let pp = ch.per_path.as_ref().unwrap();
        for (p, s) in scat.scatterers.iter().enumerate() {
            for (m, pos) in g.positions.iter().enumerate() {
                let d = pos.dist(*s);
                let expect = c64::from_polar(1.0, -TAU * (d + 5.0) / lambda);
                assert!(close(pp[(p, m)], expect, 1e-9));
            }
        }
        // h = (1/√P) Σ rows
        for m in 0..20 {
            let s: c64 = (0..7).map(|p| pp[(p, m)]).sum::<c64>() / 7f64.sqrt();
            assert!(close(s, ch.h[m], 1e-12));
        }
        let random = draw_one_ring_channel(&g, &scat, &PathLossModel::disabled(), 2).unwrap();
        assert!(random
            .per_path
            .unwrap()
            .col_iter()
            .flat_map(|c| c.iter().copied().collect::<Vec<_>>())
            .all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn one_ring_mean_power_loss_disabled() {
        let g = make_disk_network(40, 100.0, 0.15, 4).unwrap();
        let n = 10_000u64;
        let total: f64 = (0..n)
            .map(|t| {
                let s = place_scatterers_ring(Point::ORIGIN, 15.0, 10, derive_seed(1, t)).unwrap();
                norm_sqr(
                    &draw_one_ring_channel_with(
                        &g,
                        &s,
                        &PathLossModel::disabled(),
                        derive_seed(2, t),
                        DrawOptions {
                            keep_paths: false,
                            ..Default::default()
                        },
                    )
                    .unwrap()
                    .h,
                )
            })
            .sum();
        assert!((total / n as f64 / 40.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn one_ring_single_path_modulus() {
        let g = ArrayGeometry::from_positions(vec![Point::new(100.0, 0.0)], 0.15, ArrayKind::Disk).unwrap();
        let scat = ScattererSet {
            center: Point::new(-15.0, 0.0),
            ring_radius: 15.0,
            scatterers: vec![Point::ORIGIN],
            layout: crate::scenario::ScattererLayout::Ring,
            segment_length: None,
        };
        let loss = PathLossModel::new(1e7, 2.5).unwrap();
        let ch = draw_one_ring_channel(&g, &scat, &loss, 5).unwrap();
        assert!((ch.h[0].norm() - (1e7 / 115f64.powf(2.5)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coincident_antenna_is_rejected() {
        let g = ArrayGeometry::from_positions(vec![Point::new(15.0, 0.0)], 0.15, ArrayKind::Disk).unwrap();
        let scat = ScattererSet {
            center: Point::ORIGIN,
            ring_radius: 15.0,
            scatterers: vec![Point::new(15.0, 0.0)],
            layout: crate::scenario::ScattererLayout::Ring,
            segment_length: None,
        };
        let loss = PathLossModel::new(1.0, 2.0).unwrap();
        assert!(matches!(
            draw_one_ring_channel(&g, &scat, &loss, 0),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(draw_one_ring_channel(&g, &scat, &PathLossModel::disabled(), 0).is_ok());
    }

    #[test]
    fn independent_users_are_uncorrelated() {
        let g = make_disk_network(4, 20.0, 0.15, 2).unwrap();
        let n = 10_000u64;
        let mut acc = [[c64::new(0.0, 0.0); 4]; 4];
        for t in 0..n {
            let s1 = place_scatterers_ring(Point::new(-5.0, 0.0), 2.0, 3, derive_seed(1, t)).unwrap();
            let s2 = place_scatterers_ring(Point::new(5.0, 0.0), 2.0, 3, derive_seed(2, t)).unwrap();
            let l = PathLossModel::disabled();
            let h1 = draw_one_ring_channel(&g, &s1, &l, derive_seed(3, t)).unwrap().h;
            let h2 = draw_one_ring_channel(&g, &s2, &l, derive_seed(4, t)).unwrap().h;
            for i in 0..4 {
                for j in 0..4 {
                    acc[i][j] += h1[i] * h2[j].conj();
                }
            }
        }
        let bound = 5.0 / (n as f64).sqrt();
        for row in acc {
            for z in row {
                assert!((z / n as f64).norm() < bound);
            }
        }
    }

    #[test]
    fn realization_csv() {
        let ch = ChannelRealization::from_vector(vec![c64::new(1.0, -2.0)]);
        let mut buf = Vec::new();
        ch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "0,1.0000000000000000e0,-2.0000000000000000e0"
        );
    }

    proptest! {
        #[test]
        fn steering_entries_unit_modulus(theta in 0.0..PI, seed in any::<u64>(), m in 1usize..64) {
            let g = make_random_linear(m, 0.07, 0.15, seed).unwrap();
            let a = steering_vector_positions(&g, theta).unwrap();
            prop_assert!(a.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            prop_assert!((dot_h(&a, &a).re - m as f64).abs() < 1e-9);
        }

        #[test]
        fn phases_scale_invariant(seed in any::<u64>(), c in 0.1f64..10.0) {
            let lambda = 0.15;
            let g = make_disk_network(6, 10.0, lambda, seed).unwrap();
            let s = place_scatterers_ring(Point::new(1.0, 2.0), 1.5, 3, seed).unwrap();
            let gs = ArrayGeometry::from_positions(
                g.positions.iter().map(|p| Point::new(p.x * c, p.y * c)).collect(), lambda * c, ArrayKind::Disk).unwrap();
            let ss = ScattererSet {
                center: Point::new(c, 2.0 * c),
                ring_radius: 1.5 * c,
                scatterers: s.scatterers.iter().map(|p| Point::new(p.x * c, p.y * c)).collect(),
                layout: s.layout,
                segment_length: None,
            };
            let l = PathLossModel::disabled();
            let a = draw_one_ring_channel(&g, &s, &l, seed).unwrap().h;
            let b = draw_one_ring_channel(&gs, &ss, &l, seed).unwrap().h;
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).norm() < 1e-6);
            }
        }
    }
}
