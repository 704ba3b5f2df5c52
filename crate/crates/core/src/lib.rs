//! Lung-sound crackle classification pipeline.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`ingest`] reads WAV recordings and cycle annotations, slices labelled
//!   respiratory cycles and applies resampling, clipping, wavelet denoising
//!   and amplitude normalisation.
//! * [`decompose`] splits a cycle into bands with EMD, EEMD, a db8 DWT, a
//!   chained EMD/EEMD→DWT, or passes it through unchanged.
//! * [`features`] computes statistical, higher-order, spectral and MFCC
//!   features per band and assembles a [`features::FeatureMatrix`].
//! * [`select`] reduces feature width with a χ² filter, PCA or an autoencoder.
//! * [`neural`] is the small feedforward engine behind the MLP and autoencoder.
//! * [`classify`] holds the six classifiers behind one fit/predict contract.
//! * [`eval`] provides metrics, stratified cross-validation, grid search and
//!   the full experiment matrix.
//! * [`synth`] writes a labelled synthetic corpus in the on-disk input format.

pub mod classify;
pub mod decompose;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod label;
pub mod neural;
pub mod rng;
pub mod select;
pub mod synth;

pub use error::{Error, Result};
pub use label::{Label, LabelScheme};
