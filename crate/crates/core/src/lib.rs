//! Real-valued graph Fourier transform for speech frames and the
//! mask-based enhancement pipeline built on it.
//!
//! A frame of `N` samples is treated as a signal on the k-neighbor cyclic
//! shift graph. The left singular matrix `Ψ` of that graph's adjacency is a
//! real orthogonal basis, so the transform of a real frame is real and a
//! single real mask can scale it. The pipeline is
//! frame → `Ψ y` → mask → `Ψᵀ` → overlap-add.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio_io;
pub mod enhance;
pub mod error;
pub mod fixtures;
pub mod framing;
pub mod graph_basis;
pub mod metrics;
pub mod numfmt;
pub mod transform;

pub use error::{Error, Result};
