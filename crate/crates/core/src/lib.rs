//! Core engines for anomaly detection on quasi-periodic signals.
//!
//! The crate is organised as a pipeline:
//!
//! * [`signals`] — synthetic waveform generators (test tones, motor stator
//!   currents with rotor-fault modulation), dq-frame helpers and CSV series I/O.
//! * [`encoding`] — normalisation, uniform quantisation and sliding-window
//!   extraction that turn a real-valued series into level patterns.
//! * [`immune`] — a negative-selection detector engine: randomly generated
//!   detectors are censored against the encoded "self" data and later matched
//!   against monitored windows by Euclidean distance.
//! * [`grammar`] — a context-driven production-rule learner over codified
//!   input/output pairs, with teacher-forced prediction and a weighted
//!   edit-distance monitor.
//! * [`report`] — serialisable monitoring reports shared by the CLI and tests.

pub mod encoding;
pub mod grammar;
pub mod immune;
pub mod report;
pub mod signals;
