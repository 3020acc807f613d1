//! Time-optimal navigation in a current with space-dependent ship speed.
//!
//! Navigation data `(h, W, |u|ₕ)` on a 2D chart induce a Randers metric whose
//! geodesics are the time-optimal paths. This crate builds that metric,
//! differentiates it exactly, integrates its geodesic spray and runs the
//! comparison experiments (indicatrices, reachable sets, shooting, transit
//! times) on top.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod randers;
pub mod spray;
pub mod svg;

pub use error::{Error, Result};
pub use geometry::{NavigationData, Point2, Rect, ScalarField, Tangent2, VectorField};
pub use randers::RandersMetric;
