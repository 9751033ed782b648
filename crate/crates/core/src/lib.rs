//! Qubit channels, CHSH-breaking criteria and see-saw search for channel
//! activation of CHSH nonlocality.
//!
//! * [`linalg`]: dense complex matrices, partial traces, eigendecomposition,
//!   seeded random states.
//! * [`channels`]: depolarizing, amplitude-damping, loss and erasure channels
//!   in Kraus form, plus the Bloch affine picture.
//! * [`chsh`]: Bell operators, the Horodecki value and analytic thresholds.
//! * [`seesaw`]: the alternating optimizer.
//! * [`protocols`]: single-channel, unidirectional and bidirectional
//!   activation, super-activation and parameter sweeps.

pub mod channels;
pub mod chsh;
pub mod error;
pub mod linalg;
pub mod protocols;
pub mod seesaw;

pub use error::{Error, Result};
