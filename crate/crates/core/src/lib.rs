//! Torsion-minimizing compatible linear connections for Randers metrics.
//!
//! A Randers metric `F = alpha + beta` (Riemannian norm plus 1-form) is
//! *generalized Berwald* when some linear connection transports tangent
//! vectors without changing their Finslerian length. This crate decides
//! that property, computes the *extremal* compatible connection — the one
//! whose torsion has pointwise minimal norm — and verifies the result along
//! two fully independent routes:
//!
//! * [`connection`] evaluates the closed-form torsion blocks in an adapted
//!   frame built by [`frame`] over the pointwise data of [`geometry`];
//! * [`oracle`] assembles the raw compatibility equations from sampled
//!   tangent vectors and extracts the minimum-norm solution and the kernel
//!   with a rank-revealing factorization;
//! * [`transport`] integrates the parallel-transport ODE with the resulting
//!   connection field and measures the length drift that compatibility
//!   forbids.
//!
//! Metric components are symbolic expressions ([`expr`]) differentiated by
//! forward-mode dual numbers, so every first derivative in the pipeline is
//! exact.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature for embedded use. All types are immutable after
//! construction and the per-point pipeline is pure, so points may be
//! processed concurrently.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod connection;
pub mod error;
pub mod expr;
pub mod frame;
pub mod geometry;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod torsion;
pub mod transport;

pub use error::CoreError;
