//! Triple-beam fingerprint engine for massive MIMO-OFDM localization.
//!
//! The crate synthesizes multipath channels on a uniform planar array,
//! moves them into the angle-delay-Doppler beam domain, computes
//! fingerprints, and provides the dataset, storage and baseline tooling
//! built on top of them.

pub mod analysis;
pub mod baseline;
pub mod beamspace;
pub mod channel;
pub mod error;
pub mod export;
pub mod fingerprint;
pub mod grid;
pub mod manifest;
pub mod preprocess;
pub mod scene;
pub mod store;
pub mod tensor;

pub use beamspace::{TbTensor, TransformSet};
pub use channel::{ArrayGeometry, MultipathSet, OfdmConfig, PathParams, SftTensor};
pub use error::{Error, FormatError, Result};
pub use fingerprint::{Tbf, TbfMeta};
pub use tensor::C64;
pub use manifest::Manifest;
pub use scene::{FingerprintRecord, Scene};
pub use store::TensorBlob;
