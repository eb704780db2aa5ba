//! Hunting an invisible rabbit on the integer line.
//!
//! A rabbit starts at an unknown point and hops along an unknown parametric
//! trajectory; the hunter throws one hammer per step and only learns of a
//! hit. This crate provides:
//!
//! * [`model`]: rabbit trajectories (linear, polynomial, real-valued, planar
//!   lattice) and hit predicates;
//! * [`enumeration`]: explicit bijections `N⁺ ↔ Z^d`, including the square
//!   spiral on `Z²`;
//! * [`strategy`] and [`envelope`]: the diagonal hunter and the seeded
//!   envelope-sampling hunter;
//! * [`analysis`]: exact survival curves, truncated means, Raabe ratios and
//!   series diagnostics;
//! * [`simulation`]: single hunts and reproducible Monte Carlo batches;
//! * [`export`] and [`cli`]: files, manifests and the `rabbit-hunt` binary.

pub mod analysis;
pub mod cli;
pub mod enumeration;
pub mod envelope;
pub mod error;
pub mod export;
pub mod model;
mod precise;
pub mod simulation;
pub mod strategy;

pub use error::{Error, Result};
pub use model::{Integer, LatticeRabbit2D, LinearRabbit, Point, PolynomialRabbit, RabbitModel, RealLinearRabbit, TimeStep};
