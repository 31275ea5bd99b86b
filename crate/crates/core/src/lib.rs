//! Geometry of two-qubit state manifolds generated by an anisotropic Heisenberg
//! Hamiltonian in a longitudinal field, with an optional weak transverse field.
//!
//! The crate builds the Hamiltonian and its closed-form eigensystem, evaluates the
//! seven families of evolved states, computes their Fubini–Study metric both
//! numerically and in closed form, runs a finite-difference curvature engine on
//! metric fields, carries first-order perturbation theory through to the metric,
//! and measures concurrence along the families.

#![forbid(unsafe_code)]

pub mod curvature;
pub mod error;
pub mod families;
pub mod fubini_study;
pub mod hamiltonian;
pub mod model;
pub mod entanglement;
pub mod perturbation;

pub use error::{Error, Result};
