//! Turning real-valued series into discrete level patterns.
//!
//! A sample is first normalised into the unit interval — optionally through
//! `|x|` — by an affine map fixed at training time, then quantised onto
//! `2^bits` uniform levels. Overlapping windows of `window` consecutive levels
//! (stride one) form the patterns that both detection engines consume.
//! Out-of-range samples clamp to the interval edges and are counted rather
//! than rejected, so monitoring never fails on excursions beyond the trained
//! range.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signals::SignalSeries;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("bits must lie in 1..=16 (got {0})")]
    BadBits(u8),
    #[error("window must be at least 1")]
    BadWindow,
    #[error("invalid range: v_min {v_min} must be below v_max {v_max} and both finite")]
    BadRange { v_min: f64, v_max: f64 },
    #[error("{name} must be finite (got {value})")]
    NotFinite { name: &'static str, value: f64 },
    #[error("normalised value must lie in [0, 1] (got {0})")]
    OutOfUnit(f64),
    #[error("level {level} exceeds the maximum {max} for this bit width")]
    LevelOutOfRange { level: u16, max: u16 },
    #[error("series of {len} samples is shorter than one window of {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("pattern holds {got} levels but the window is {expected}")]
    WindowMismatch { expected: usize, got: usize },
    #[error("headroom must be finite and non-negative (got {0})")]
    BadHeadroom(f64),
    #[error("cannot fit a range to an empty sample set")]
    EmptyFit,
}

/// The trained front-end: bit width, window length, input range and the
/// optional absolute-value step. Persisted verbatim inside every model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    pub bits: u8,
    pub window: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub take_abs: bool,
}

impl EncodingConfig {
    pub fn new(
        bits: u8,
        window: usize,
        v_min: f64,
        v_max: f64,
        take_abs: bool,
    ) -> Result<Self, EncodeError> {
        let cfg = Self {
            bits,
            window,
            v_min,
            v_max,
            take_abs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Choose the range from training data, padding both ends with
    /// `headroom` times the observed span so that mild excursions during
    /// monitoring stay inside the map.
    pub fn fit(
        samples: &[f64],
        bits: u8,
        window: usize,
        take_abs: bool,
        headroom: f64,
    ) -> Result<Self, EncodeError> {
        if !(headroom.is_finite() && headroom >= 0.0) {
            return Err(EncodeError::BadHeadroom(headroom));
        }
        if samples.is_empty() {
            return Err(EncodeError::EmptyFit);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &raw in samples {
            if !raw.is_finite() {
                return Err(EncodeError::NotFinite {
                    name: "sample",
                    value: raw,
                });
            }
            let x = if take_abs { raw.abs() } else { raw };
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let span = hi - lo;
        let pad = if span > 0.0 {
            headroom * span
        } else {
            // constant data: synthesise a span so the range stays valid
            hi.abs().max(1.0) * headroom.max(0.05)
        };
        Self::new(bits, window, lo - pad, hi + pad, take_abs)
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        if !(1..=16).contains(&self.bits) {
            return Err(EncodeError::BadBits(self.bits));
        }
        if self.window == 0 {
            return Err(EncodeError::BadWindow);
        }
        if !(self.v_min.is_finite() && self.v_max.is_finite() && self.v_min < self.v_max) {
            return Err(EncodeError::BadRange {
                v_min: self.v_min,
                v_max: self.v_max,
            });
        }
        Ok(())
    }

    /// Highest level representable at this bit width (`2^bits − 1`).
    pub fn max_level(&self) -> u16 {
        max_level(self.bits)
    }
}

fn max_level(bits: u8) -> u16 {
    ((1u32 << bits) - 1) as u16
}

/// Map `x` into `[0, 1]`, clamping at the edges. The `clamped` flag reports
/// whether clamping actually occurred.
pub(crate) fn normalize_tracked(x: f64, cfg: &EncodingConfig) -> Result<(f64, bool), EncodeError> {
    if !x.is_finite() {
        return Err(EncodeError::NotFinite {
            name: "sample",
            value: x,
        });
    }
    let v = if cfg.take_abs { x.abs() } else { x };
    let raw = (v - cfg.v_min) / (cfg.v_max - cfg.v_min);
    let clamped = !(0.0..=1.0).contains(&raw);
    Ok((raw.clamp(0.0, 1.0), clamped))
}

/// Normalise a sample into the unit interval under `cfg`.
pub fn normalize(x: f64, cfg: &EncodingConfig) -> Result<f64, EncodeError> {
    cfg.validate()?;
    normalize_tracked(x, cfg).map(|(u, _)| u)
}

/// Quantise a unit-interval value onto `2^bits − 1` steps, rounding to the
/// nearest level with ties away from zero.
pub fn quantize(u: f64, bits: u8) -> Result<u16, EncodeError> {
    if !(1..=16).contains(&bits) {
        return Err(EncodeError::BadBits(bits));
    }
    if !u.is_finite() || !(0.0..=1.0).contains(&u) {
        return Err(EncodeError::OutOfUnit(u));
    }
    Ok((u * max_level(bits) as f64).round() as u16)
}

/// Map a level back to the unit interval: `level / (2^bits − 1)`.
pub fn decode(level: u16, bits: u8) -> Result<f64, EncodeError> {
    if !(1..=16).contains(&bits) {
        return Err(EncodeError::BadBits(bits));
    }
    let max = max_level(bits);
    if level > max {
        return Err(EncodeError::LevelOutOfRange { level, max });
    }
    Ok(level as f64 / max as f64)
}

/// A window of quantised levels together with the bit width that scales it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    levels: Vec<u16>,
    bits: u8,
}

impl Pattern {
    pub fn new(levels: Vec<u16>, cfg: &EncodingConfig) -> Result<Self, EncodeError> {
        cfg.validate()?;
        if levels.len() != cfg.window {
            return Err(EncodeError::WindowMismatch {
                expected: cfg.window,
                got: levels.len(),
            });
        }
        let max = cfg.max_level();
        for &level in &levels {
            if level > max {
                return Err(EncodeError::LevelOutOfRange { level, max });
            }
        }
        Ok(Self {
            levels,
            bits: cfg.bits,
        })
    }

    pub(crate) fn from_raw(levels: Vec<u16>, bits: u8) -> Self {
        Self { levels, bits }
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Decoded unit-interval coordinates of this pattern.
    pub fn decoded(&self) -> impl Iterator<Item = f64> + '_ {
        let max = max_level(self.bits) as f64;
        self.levels.iter().map(move |&l| l as f64 / max)
    }
}

/// All length-`window` windows of a series, plus the clamp count accumulated
/// while normalising.
#[derive(Debug, Clone)]
pub struct WindowSet {
    pub patterns: Vec<Pattern>,
    pub clamped: usize,
}

/// Encode a series and slice it into overlapping windows with stride one:
/// a series of `n` samples yields `n − window + 1` patterns.
pub fn make_windows(series: &SignalSeries, cfg: &EncodingConfig) -> Result<WindowSet, EncodeError> {
    cfg.validate()?;
    let n = series.len();
    if n < cfg.window {
        return Err(EncodeError::SeriesTooShort {
            len: n,
            window: cfg.window,
        });
    }
    let mut clamped = 0usize;
    let mut levels = Vec::with_capacity(n);
    for &x in series.samples() {
        let (u, was_clamped) = normalize_tracked(x, cfg)?;
        if was_clamped {
            clamped += 1;
        }
        levels.push(quantize(u, cfg.bits)?);
    }
    let patterns = levels
        .windows(cfg.window)
        .map(|w| Pattern::from_raw(w.to_vec(), cfg.bits))
        .collect();
    Ok(WindowSet { patterns, clamped })
}
