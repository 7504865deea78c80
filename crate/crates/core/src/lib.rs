//! Radar micro-Doppler personal identification.
//!
//! The pipeline runs in four stages, each in its own module:
//!
//! * [`synth`] renders real-valued pulse-compressed UWB echoes of synthetic
//!   walkers that approach a chair and sit down.
//! * [`dsp`] turns those echoes into 32×100 8-bit micro-Doppler images
//!   (analytic signal along range, background subtraction, range-gated STFT).
//! * [`cnn`] is a two-layer convolutional network with frozen random filters
//!   and a trainable 2,040×N fully-connected softmax classifier.
//! * [`eval`] implements stratified k-fold cross-validation repeated over many
//!   seeds, confusion matrices and summary statistics.
//!
//! [`params`] holds the radar constants and the sizing rules every array
//! dimension derives from; [`formats`] holds the on-disk file formats.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cnn;
pub mod config;
pub mod dsp;
mod error;
pub mod eval;
pub mod formats;
mod label;
pub mod params;
pub mod seed;
pub mod synth;

pub use cnn::{ClassScores, CnnModel, Hyperparams};
pub use dsp::{AnalyticSeries, RawFrameSeries, Spectrogram, SpectrogramImage};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, FoldPlan, Metrics, TrialStats};
pub use label::Label;
pub use params::{RadarParams, VelocityAxis};
pub use synth::{GaitProfile, ScattererTrack, Scenario};
