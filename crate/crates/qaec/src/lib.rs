//! Density-matrix simulation of dissipative quantum neural networks (DQNNs)
//! applied to quantum error correction.
//!
//! The crate provides:
//!
//! * [`linalg`] — complex matrix algebra on multi-qubit registers (tensor
//!   products, partial traces, targeted unitaries, fidelity, Hermitian
//!   exponentials, Haar-random unitaries).
//! * [`noise`] — bit-flip, depolarizing, spatially correlated, erasure and
//!   collective-dephasing channels.
//! * [`codes`] — stabilizer codes (3-qubit repetition, 4-qubit erasure,
//!   5-qubit perfect code) with syndrome-based recovery maps.
//! * [`dqnn`] — the network model: per-neuron unitaries, layer-to-layer
//!   channels, self-inverse decoders, optional internal noise.
//! * [`training`] — forward/backpropagation of update matrices, Nadam
//!   optimization, minibatching and restarts.
//! * [`tomography`] — chi-matrix process tomography and channel distances.
//! * [`experiments`] — drivers for validation curves, erasure collections,
//!   encoding discovery and the noisy-memory phase diagram.

pub mod codes;
pub mod dqnn;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod noise;
pub mod tomography;
pub mod training;

pub use error::{Error, Result};
