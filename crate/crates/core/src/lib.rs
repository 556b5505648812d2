//! Measurement algebras, Gaussian states and their numerics.
//!
//! * [`algebra`]: free *-algebra of indexed measurement operators.
//! * [`gaussian`]: mean-zero Gaussian states, Wick expansion and the
//!   generating function.
//! * [`koopman`]: phase-space polynomials, Poisson bracket and the
//!   multiplication/derivation operator pair with their flows.
//! * [`gns`]: Gram matrices, positivity probes and finite GNS representations.
//! * [`vacuum`]: the vacuum projector extension and conditioned states.
//! * [`kernels`]: 1+1-D scalar field kernels on wavepacket test functions.
//! * [`cli`]: config-driven verification and experiment runners.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod gns;
pub mod kernels;
pub mod koopman;
pub mod linalg;
pub mod quadrature;
pub mod vacuum;

pub use algebra::{AlgebraElement, Index, Label, Word};
pub use error::{Error, Result};
pub use gaussian::{GaussianKernel, GaussianState, State};
