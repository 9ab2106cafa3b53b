//! Fine-scale statistics of real-valued vector sequences.
//!
//! The crate computes the pair correlation of `{alpha . a(x)}` over the
//! lattice box `B(r, N) = Z^r ∩ [0, N]^r`, additive energies and the joint
//! Diophantine count that control it, Selberg majorants and minorants of
//! the window indicator, and Monte Carlo moments over the measure with
//! density `2 sin^2(x/2) / (pi x^2)`.
//!
//! ```
//! use finescale_core::energy::additive_energy;
//!
//! let e = additive_energy(&[1.0, 2.0, 3.0], 1.0).unwrap();
//! assert_eq!(e.count, 19);
//! ```

pub mod energy;
pub mod error;
pub mod experiments;
pub mod moments;
pub mod mu;
pub mod numeric;
mod par;
pub mod selberg;
pub mod sequences;
pub mod statistics;

pub use error::{Error, Result};
