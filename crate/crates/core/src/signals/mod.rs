//! Signal sources and series plumbing.
//!
//! Everything downstream works on a [`SignalSeries`]: a uniformly sampled,
//! finite-valued waveform. This module provides synthetic generators (pure
//! tones and rotor-fault motor currents), the amplitude-invariant dq
//! projection used to reduce three-phase currents to a scalar magnitude, and
//! CSV import/export.

mod csv;
mod motor;

pub use csv::{read_series, write_pair, write_series, ColumnLayout, ReadError, SeriesData};
pub use motor::{gen_motor_current, gen_motor_dq_series, LoadStage, MotorScenario};

use thiserror::Error;

/// Ratio applied to the base frequency by [`SignalKind::FreqShifted`].
pub const FREQ_SHIFT_RATIO: f64 = 1.1;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("{name} must be finite and positive (got {value})")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite (got {value})")]
    NotFinite { name: &'static str, value: f64 },
    #[error("a series needs at least one sample")]
    Empty,
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("load stages must not be empty")]
    NoStages,
    #[error("load stage {index}: {reason}")]
    BadStage { index: usize, reason: String },
    #[error("modulation depth must lie in [0, 1) (got {0})")]
    BadModulationDepth(f64),
    #[error("noise level must be finite and non-negative (got {0})")]
    BadNoiseLevel(f64),
    #[error("rotor flux must be a non-zero finite value")]
    ZeroRotorFlux,
    #[error("rotor time constant must be finite and positive (got {0})")]
    BadTimeConstant(f64),
    #[error("cannot concatenate series: {0}")]
    Concat(String),
}

/// A uniformly sampled signal: a fixed time step, at least one sample, all
/// values finite. The label is a free-form origin note (generator name, file
/// path, ...) and never participates in computations.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    dt: f64,
    samples: Vec<f64>,
    label: String,
}

impl SignalSeries {
    pub fn new(dt: f64, samples: Vec<f64>, label: impl Into<String>) -> Result<Self, SignalError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SignalError::NotPositive {
                name: "dt",
                value: dt,
            });
        }
        if samples.is_empty() {
            return Err(SignalError::Empty);
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SignalError::NonFiniteSample { index });
        }
        Ok(Self {
            dt,
            samples,
            label: label.into(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction a series holds at least one sample
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Time of sample `index` relative to the start of the series.
    pub fn time_at(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }
}

/// Waveform shapes understood by [`gen_signal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// `A·sin(2πft)`
    Sine,
    /// `A·sin(2π·1.1f·t)` — the base frequency raised by 10%.
    FreqShifted,
    /// `0.5A·sin(2πft) + 0.5A·sin(2π·2f·t)` — fundamental plus second harmonic.
    Composite,
}

impl SignalKind {
    fn label(self) -> &'static str {
        match self {
            SignalKind::Sine => "sine",
            SignalKind::FreqShifted => "freq-shifted",
            SignalKind::Composite => "composite",
        }
    }
}

pub(crate) fn phase(freq_hz: f64, t: f64) -> f64 {
    std::f64::consts::TAU * freq_hz * t
}

/// Generate `n` samples of a test waveform, sampled every `dt` seconds.
pub fn gen_signal(
    kind: SignalKind,
    amplitude: f64,
    base_freq_hz: f64,
    dt: f64,
    n: usize,
) -> Result<SignalSeries, SignalError> {
    if !amplitude.is_finite() {
        return Err(SignalError::NotFinite {
            name: "amplitude",
            value: amplitude,
        });
    }
    if !(base_freq_hz.is_finite() && base_freq_hz > 0.0) {
        return Err(SignalError::NotPositive {
            name: "base_freq_hz",
            value: base_freq_hz,
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SignalError::NotPositive {
            name: "dt",
            value: dt,
        });
    }
    if n == 0 {
        return Err(SignalError::Empty);
    }
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            match kind {
                SignalKind::Sine => amplitude * phase(base_freq_hz, t).sin(),
                SignalKind::FreqShifted => {
                    amplitude * phase(FREQ_SHIFT_RATIO * base_freq_hz, t).sin()
                }
                SignalKind::Composite => {
                    0.5 * amplitude * phase(base_freq_hz, t).sin()
                        + 0.5 * amplitude * phase(2.0 * base_freq_hz, t).sin()
                }
            }
        })
        .collect();
    SignalSeries::new(dt, samples, kind.label())
}

/// Parameters of the rotor-referred dq model used by [`rotating_frame_speed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqFrameParams {
    /// Rotor electrical angular speed (rad/s).
    pub rotor_speed: f64,
    /// Mutual inductance between stator and rotor windings.
    pub mutual_inductance: f64,
    /// Rotor time constant (s); must be positive.
    pub rotor_time_constant: f64,
    /// Rotor flux magnitude; must be non-zero.
    pub rotor_flux: f64,
    /// Stator current component on the quadrature axis.
    pub q_axis_current: f64,
}

/// Angular speed of the rotating dq reference frame:
/// rotor speed plus the slip term `(M/τ)·(i_q/ψ)`.
pub fn rotating_frame_speed(p: &DqFrameParams) -> Result<f64, SignalError> {
    if !(p.rotor_time_constant.is_finite() && p.rotor_time_constant > 0.0) {
        return Err(SignalError::BadTimeConstant(p.rotor_time_constant));
    }
    if p.rotor_flux == 0.0 || !p.rotor_flux.is_finite() {
        return Err(SignalError::ZeroRotorFlux);
    }
    Ok(p.rotor_speed
        + (p.mutual_inductance / p.rotor_time_constant) * (p.q_axis_current / p.rotor_flux))
}

/// Amplitude-invariant projection of a three-phase triple onto the rotating
/// d/q axes at angle `theta`. For a balanced triple of amplitude `A` the
/// returned vector has magnitude `A` regardless of `theta`.
pub fn park_dq(i_a: f64, i_b: f64, i_c: f64, theta: f64) -> (f64, f64) {
    const SHIFT: f64 = 2.0 * std::f64::consts::FRAC_PI_3;
    let d = (2.0 / 3.0)
        * (i_a * theta.cos() + i_b * (theta - SHIFT).cos() + i_c * (theta + SHIFT).cos());
    let q = -(2.0 / 3.0)
        * (i_a * theta.sin() + i_b * (theta - SHIFT).sin() + i_c * (theta + SHIFT).sin());
    (d, q)
}

/// Splice several series with identical time steps into one continuous record.
pub fn concat_series(parts: &[SignalSeries]) -> Result<SignalSeries, SignalError> {
    let first = parts
        .first()
        .ok_or_else(|| SignalError::Concat("no series given".into()))?;
    let mut samples = Vec::with_capacity(parts.iter().map(SignalSeries::len).sum());
    let mut labels = Vec::with_capacity(parts.len());
    for part in parts {
        let rel = (part.dt() - first.dt()).abs() / first.dt();
        if rel > 1e-12 {
            return Err(SignalError::Concat(format!(
                "time steps differ ({} vs {})",
                first.dt(),
                part.dt()
            )));
        }
        samples.extend_from_slice(part.samples());
        labels.push(part.label().to_string());
    }
    SignalSeries::new(first.dt(), samples, labels.join("+"))
}
