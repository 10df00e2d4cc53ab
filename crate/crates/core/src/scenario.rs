//! Seeded geometries: antenna arrays, AOA clusters, scatterer layouts and
//! the 7-cell hexagonal network.
//!
//! Coordinates are 2D meters. Linear arrays sit on the x-axis.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn polar(center: Point, radius: f64, angle: f64) -> Self {
        Self {
            x: center.x + radius * angle.cos(),
            y: center.y + radius * angle.sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Ula,
    RandomLinear,
    Disk,
    MultiCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub positions: Vec<Point>,
    pub wavelength: f64,
    pub kind: ArrayKind,
    /// `D` for a ULA, mean spacing `D̄` for a random linear array.
    pub spacing: Option<f64>,
}

impl ArrayGeometry {
    pub fn from_positions(positions: Vec<Point>, wavelength: f64, kind: ArrayKind) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("array needs at least one antenna"));
        }
        check_positive("wavelength", wavelength)?;
        if positions.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(invalid("antenna coordinates must be finite"));
        }
        Ok(Self {
            positions,
            wavelength,
            kind,
            spacing: None,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// All antennas on the x-axis.
    pub fn is_linear(&self) -> bool {
        self.positions.iter().all(|p| p.y == 0.0)
    }

    /// Extent along the x-axis.
    pub fn aperture(&self) -> f64 {
        let (lo, hi) = self
            .positions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.x), hi.max(p.x))
            });
        hi - lo
    }

    /// One row per antenna: `index,x,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "x", "y"])?;
        for (i, p) in self.positions.iter().enumerate() {
            w.write_record([i.to_string(), format!("{:.16e}", p.x), format!("{:.16e}", p.y)])?;
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

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_count(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Uniform linear array with antenna `m` at `x = m·D`, `m = 0..M`.
pub fn make_ula(m: usize, d: f64, wavelength: f64) -> Result<ArrayGeometry> {
    check_count("M", m)?;
    check_positive("D", d)?;
    check_positive("wavelength", wavelength)?;
    let positions = (0..m).map(|i| Point::new(i as f64 * d, 0.0)).collect();
    Ok(ArrayGeometry {
        positions,
        wavelength,
        kind: ArrayKind::Ula,
        spacing: Some(d),
    })
}

/// Linear array with positions i.i.d. uniform on `[0, M·D̄]`.
pub fn make_random_linear(m: usize, mean_spacing: f64, wavelength: f64, seed: u64) -> Result<ArrayGeometry> {
    check_count("M", m)?;
    check_positive("mean spacing", mean_spacing)?;
    check_positive("wavelength", wavelength)?;
    let aperture = m as f64 * mean_spacing;
    let mut rng = rng_from_seed(seed);
    let positions = (0..m)
        .map(|_| Point::new(rng.random::<f64>() * aperture, 0.0))
        .collect();
    Ok(ArrayGeometry {
        positions,
        wavelength,
        kind: ArrayKind::RandomLinear,
        spacing: Some(mean_spacing),
    })
}

/// `M` antennas area-uniform over the disk of radius `L` centred at the
/// origin.
pub fn make_disk_network(m: usize, radius: f64, wavelength: f64, seed: u64) -> Result<ArrayGeometry> {
    make_disk_network_at(Point::ORIGIN, m, radius, wavelength, seed)
}

pub fn make_disk_network_at(center: Point, m: usize, radius: f64, wavelength: f64, seed: u64) -> Result<ArrayGeometry> {
    check_count("M", m)?;
    check_positive("L", radius)?;
    check_positive("wavelength", wavelength)?;
    let mut rng = rng_from_seed(seed);
    let positions = (0..m).map(|_| sample_disk(&mut rng, center, radius)).collect();
    Ok(ArrayGeometry {
        positions,
        wavelength,
        kind: ArrayKind::Disk,
        spacing: None,
    })
}

pub fn sample_disk<R: Rng + ?Sized>(rng: &mut R, center: Point, radius: f64) -> Point {
    let rho = radius * rng.random::<f64>().sqrt();
    let phi = rng.random::<f64>() * TAU;
    Point::polar(center, rho, phi)
}

/// Union of disjoint AOA intervals in `[0, π]` with uniform density.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    intervals: Vec<(f64, f64)>,
}

impl ClusterSet {
    /// Intervals must be sorted, pairwise disjoint and inside `[0, π]`.
    /// Zero-width intervals (point masses) are accepted.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(invalid("cluster set needs at least one interval"));
        }
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite()) || a > b || a < 0.0 || b > PI {
                return Err(invalid(format!("AOA interval [{a}, {b}] is not inside [0, π]")));
            }
        }
        for w in intervals.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(invalid("AOA intervals must be sorted and pairwise disjoint"));
            }
        }
        Ok(Self { intervals })
    }

    pub fn from_degrees(intervals: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            intervals
                .iter()
                .map(|&(a, b)| (a.to_radians(), b.to_radians()))
                .collect(),
        )
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Lebesgue measure of the union in radians.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// `Σq (cos θq_min − cos θq_max)`.
    pub fn cos_extent(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| a.cos() - b.cos()).sum()
    }

    /// Draws one AOA uniformly over the union. If every interval is a point,
    /// the points are equally likely.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.measure();
        if total <= 0.0 {
            let k = rng.random_range(0..self.intervals.len());
            return self.intervals[k].0;
        }
        let mut u = rng.random::<f64>() * total;
        for &(a, b) in &self.intervals {
            let w = b - a;
            if u < w {
                return a + u;
            }
            u -= w;
        }
        self.intervals.last().map(|iv| iv.1).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScattererLayout {
    Ring,
    Segment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScattererSet {
    pub center: Point,
    /// Enters the channel phase and path loss as `d + r`.
    pub ring_radius: f64,
    pub scatterers: Vec<Point>,
    pub layout: ScattererLayout,
    pub segment_length: Option<f64>,
}

impl ScattererSet {
    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    /// Overrides the radius term used by the channel model (segments default
    /// to 0).
    pub fn with_ring_radius(mut self, r: f64) -> Self {
        self.ring_radius = r;
        self
    }
}

/// `P` scatterers at i.i.d. uniform angles on the circle of radius `r`.
pub fn place_scatterers_ring(center: Point, r: f64, p: usize, seed: u64) -> Result<ScattererSet> {
    check_positive("r", r)?;
    check_count("P", p)?;
    let mut rng = rng_from_seed(seed);
    let scatterers = (0..p)
        .map(|_| Point::polar(center, r, rng.random::<f64>() * TAU))
        .collect();
    Ok(ScattererSet {
        center,
        ring_radius: r,
        scatterers,
        layout: ScattererLayout::Ring,
        segment_length: None,
    })
}

/// `P` scatterers at i.i.d. uniform offsets in `[0, L̃]` along +x from
/// `origin`.
pub fn place_scatterers_segment(origin: Point, length: f64, p: usize, seed: u64) -> Result<ScattererSet> {
    check_positive("segment length", length)?;
    check_count("P", p)?;
    let mut rng = rng_from_seed(seed);
    let scatterers = (0..p)
        .map(|_| Point::new(origin.x + rng.random::<f64>() * length, origin.y))
        .collect();
    Ok(ScattererSet {
        center: origin,
        ring_radius: 0.0,
        scatterers,
        layout: ScattererLayout::Segment,
        segment_length: Some(length),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UserPlacement {
    /// Uniform over the hexagonal cell.
    #[default]
    Uniform,
    /// Uniform on the cell boundary.
    CellEdge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub center: Point,
    pub antennas: ArrayGeometry,
    pub user: Point,
    pub scatterers: ScattererSet,
}

/// Hexagonal multi-cell layout. Cells are flat-topped hexagons with
/// circumradius `L`, so neighbouring centres are `√3·L` apart and a user on a
/// vertex is at distance `L` from its cell centre.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCellScenario {
    pub cell_radius: f64,
    pub cells: Vec<Cell>,
    pub placement: UserPlacement,
}

impl MultiCellScenario {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Every antenna of the network, cell by cell.
    pub fn all_antennas(&self) -> Result<ArrayGeometry> {
        let positions = self
            .cells
            .iter()
            .flat_map(|c| c.antennas.positions.iter().copied())
            .collect();
        ArrayGeometry::from_positions(positions, self.cells[0].antennas.wavelength, ArrayKind::MultiCell)
    }
}

pub fn hex_cell_centers(radius: f64) -> Vec<Point> {
    let spacing = 3f64.sqrt() * radius;
    std::iter::once(Point::ORIGIN)
        .chain((0..6).map(|k| Point::polar(Point::ORIGIN, spacing, (30.0 + 60.0 * k as f64).to_radians())))
        .collect()
}

/// Point-in-hexagon test for a flat-topped hexagon of circumradius `radius`.
pub fn in_hexagon(p: Point, center: Point, radius: f64) -> bool {
    let dx = (p.x - center.x).abs();
    let dy = (p.y - center.y).abs();
    let s3 = 3f64.sqrt();
    dy <= 0.5 * s3 * radius && s3 * dx + dy <= s3 * radius
}

pub fn sample_hexagon<R: Rng + ?Sized>(rng: &mut R, center: Point, radius: f64) -> Point {
    let h = 0.5 * 3f64.sqrt() * radius;
    loop {
        let p = Point::new(
            center.x + (2.0 * rng.random::<f64>() - 1.0) * radius,
            center.y + (2.0 * rng.random::<f64>() - 1.0) * h,
        );
        if in_hexagon(p, center, radius) {
            return p;
        }
    }
}

fn sample_hexagon_edge<R: Rng + ?Sized>(rng: &mut R, center: Point, radius: f64) -> Point {
    let side = rng.random_range(0..6usize) as f64;
    let t: f64 = rng.random();
    let a = Point::polar(center, radius, (60.0 * side).to_radians());
    let b = Point::polar(center, radius, (60.0 * (side + 1.0)).to_radians());
    Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
}

pub fn make_hex_network(
    radius: f64,
    m_per_cell: usize,
    wavelength: f64,
    r: f64,
    p: usize,
    seed: u64,
) -> Result<MultiCellScenario> {
    make_hex_network_with(radius, m_per_cell, wavelength, r, p, UserPlacement::Uniform, seed)
}

pub fn make_hex_network_with(
    radius: f64,
    m_per_cell: usize,
    wavelength: f64,
    r: f64,
    p: usize,
    placement: UserPlacement,
    seed: u64,
) -> Result<MultiCellScenario> {
    check_positive("L", radius)?;
    check_positive("wavelength", wavelength)?;
    check_positive("r", r)?;
    check_count("M_per_cell", m_per_cell)?;
    check_count("P", p)?;
    let cells = hex_cell_centers(radius)
        .into_iter()
        .enumerate()
        .map(|(b, center)| {
            let cell_seed = derive_seed(seed, b as u64);
            let mut rng = rng_from_seed(derive_seed(cell_seed, 0));
            let positions = (0..m_per_cell)
                .map(|_| sample_hexagon(&mut rng, center, radius))
                .collect();
            let antennas = ArrayGeometry::from_positions(positions, wavelength, ArrayKind::MultiCell)?;
            let user = match placement {
                UserPlacement::Uniform => sample_hexagon(&mut rng, center, radius),
                UserPlacement::CellEdge => sample_hexagon_edge(&mut rng, center, radius),
            };
            let scatterers = place_scatterers_ring(user, r, p, derive_seed(cell_seed, 1))?;
            Ok(Cell {
                center,
                antennas,
                user,
                scatterers,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiCellScenario {
        cell_radius: radius,
        cells,
        placement,
    })
}
