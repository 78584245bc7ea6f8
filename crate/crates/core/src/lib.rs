//! Extreme learning machines realized by an XL-MIMO link.
//!
//! The fading channel between a `d+1`-antenna transmitter and an `N_r`-antenna
//! receiver plays the role of a random, untrained hidden layer. Each receive
//! element applies a Rapp soft-threshold, and the analog combining vector `w`
//! is the only trained parameter, fitted in closed form as the minimum-norm
//! least-squares solution `w = G^+ t`.
//!
//! Modules:
//! - [`numkernel`]: dense matrices, seeded Gaussian sampling, SVD, pseudoinverse.
//! - [`channel`]: Ricean sampling, AR(1) evolution, AWGN and SNR calibration.
//! - [`activation`]: the Rapp nonlinearity, its analytic peak, and the sigmoid.
//! - [`elm`]: hidden-matrix construction, training, prediction, online re-training
//!   and the digital ELM baseline.
//! - [`data`]: CSV and IDX ingestion, dataset transforms, splitting and standardization.
//! - [`experiments`]: configuration-driven seed sweeps with CSV output.

pub mod activation;
pub mod channel;
pub mod data;
pub mod elm;
pub mod error;
pub mod experiments;
pub mod numkernel;

pub use error::{Error, Result};
