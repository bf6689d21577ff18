//! Robust linear beamforming for a two-hop MIMO relaying broadcast channel
//! with imperfect channel estimation.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the network configuration and draws channel realizations
//!   (estimated channels plus estimation-error directions).
//! * [`spectra`] wraps the SVD / Hermitian eigendecompositions and the Haar
//!   moment identities used by the regularization factor designs.
//! * [`beamformers`] builds the robust SVD-RZF and MMSE-RZF designs along with
//!   the baseline schemes they are compared against.
//! * [`metrics`] evaluates effective channels, noise powers, SINRs and rates.
//! * [`harness`] drives Monte Carlo sweeps and the figure presets.

pub mod beamformers;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod spectra;

pub use beamformers::{AlphaMode, BeamformerDesign, PowerControl, Scheme};
pub use error::{Error, Result};
pub use harness::{AverageDomain, ExperimentSpec, ResultRow, ResultTable, SweepAxis};
pub use metrics::{EigExpectations, SinrReport};
pub use model::{ChannelRealization, RelayChannels, SystemConfig};
pub use spectra::{BackwardSvd, GramEig};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
/// Dense, column-major complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
