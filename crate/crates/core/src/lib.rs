//! Spectral criteria for Bose–Einstein condensation on graphs.
//!
//! Finite truncations of infinite graphs carry quasi-free and generalized
//! coherent states of the CCR algebra, each determined by a covariance form
//! S on a doubled one-particle space. The spectrum of the induced operator
//! S (always contained in [0,1]) classifies the state:
//!
//! - faithful  ⇔ no eigenvalue 0,
//! - factor    ⇔ no eigenvalue 1/2,
//! - pure      ⇔ S is a basis projection (spectrum ⊂ {0,1}).
//!
//! On a graph with transient adjacency operator the thermal two-point
//! function ⟨g,f⟩₀ + D q̄(g)q(f), with q the pairing against a
//! Perron–Frobenius weight, is a KMS state; D > 0 (condensation) makes the
//! state non-factor through an eigenvalue 1/2, and the state splits into a
//! Gaussian mixture of mutually disjoint coherent states. All statements
//! about the infinite object are rendered as trends along a declared
//! filtration of finite test subspaces.

pub mod ccr;
pub mod decomposition;
pub mod equivalence;
pub mod graphs;
pub mod linalg;
pub mod spectral;
pub mod structure;
pub mod tol;

mod error;

pub use error::{CoreError, Result};
