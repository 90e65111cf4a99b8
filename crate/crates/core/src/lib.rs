#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Desk-scale laboratory for the homogenization of level-set fronts
//! `u_t + a(x/eps, omega) |Du| = 0` driven by sign-changing random
//! velocities.
//!
//! The pipeline runs, in order: random media ([`env_media`]), component
//! decomposition ([`topology`]), point-source travel times ([`metric`]), ray
//! averaging ([`averaging`]), the effective Hamiltonian by convex duality
//! ([`effective`]), front evolution ([`evolution`]) and the convergence
//! experiments ([`convergence`], [`experiment`]).

pub mod averaging;
pub mod convergence;
pub mod distance;
pub mod effective;
pub mod env_media;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod grid;
pub mod metric;
pub mod ray;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
