//! Low-rank covariance models and interference handling for large-scale
//! MIMO arrays.
//!
//! The crate covers three array regimes: uniform linear arrays, linear arrays
//! with random antenna placement, and antennas scattered over a 2D network
//! (distributed arrays) with users surrounded by a one-ring of scatterers.
//! For each regime it synthesizes channels, builds channel covariances and
//! measures their effective rank against closed-form bounds. On top of that
//! it provides covariance-aided (MMSE) pilot decontamination, matched-filter
//! SIR analysis and a subspace-projection MRC receiver.
//!
//! Module map:
//!
//! - [`scenario`]: seeded geometries (arrays, clusters, scatterers, hex cells)
//! - [`channel`]: steering vectors and channel realizations
//! - [`covariance`]: covariance matrices, effective rank, rank bounds
//! - [`estimation`]: pilot phase, LS / MMSE estimators, MSE metric
//! - [`filtering`]: SIR bounds, path-loss correlation, beamformers, rates
//! - [`experiments`]: config-driven experiment pipelines producing CSV tables
//!
//! Everything random is a pure function of an explicit `u64` seed.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod covariance;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod filtering;
pub mod linalg;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};
pub use linalg::{c64, CMatrix};
