//! Synthetic stator-current scenarios.
//!
//! A [`MotorScenario`] describes piecewise-constant load stages applied to a
//! machine supplied at a fixed frequency. A healthy machine draws a plain
//! sinusoidal current whose amplitude follows the load; a broken rotor bar
//! amplitude-modulates the current at twice the slip frequency.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{phase, SignalError, SignalSeries};

/// One constant-load interval of a [`MotorScenario`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadStage {
    /// Stage length in seconds; must be positive.
    pub duration_s: f64,
    /// Current amplitude drawn under this load; must be positive.
    pub amplitude: f64,
    /// Per-unit slip in `[0, 0.2]`.
    pub slip: f64,
}

impl LoadStage {
    pub fn new(duration_s: f64, amplitude: f64, slip: f64) -> Self {
        Self {
            duration_s,
            amplitude,
            slip,
        }
    }
}

/// A supply frequency, a sequence of load stages and an optional rotor fault.
///
/// With `broken_bar` set, the stator current is amplitude-modulated by
/// `modulation_depth` at twice the slip frequency of the active stage;
/// otherwise the modulation depth is ignored. Gaussian sensor noise of
/// standard deviation `noise_std` is added when non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorScenario {
    pub supply_frequency_hz: f64,
    pub load_stages: Vec<LoadStage>,
    pub broken_bar: bool,
    pub modulation_depth: f64,
    pub noise_std: f64,
}

impl MotorScenario {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.supply_frequency_hz.is_finite() && self.supply_frequency_hz > 0.0) {
            return Err(SignalError::NotPositive {
                name: "supply_frequency_hz",
                value: self.supply_frequency_hz,
            });
        }
        if self.load_stages.is_empty() {
            return Err(SignalError::NoStages);
        }
        for (index, stage) in self.load_stages.iter().enumerate() {
            if !(stage.duration_s.is_finite() && stage.duration_s > 0.0) {
                return Err(SignalError::BadStage {
                    index,
                    reason: format!("duration must be positive (got {})", stage.duration_s),
                });
            }
            if !(stage.amplitude.is_finite() && stage.amplitude > 0.0) {
                return Err(SignalError::BadStage {
                    index,
                    reason: format!("amplitude must be positive (got {})", stage.amplitude),
                });
            }
            if !(stage.slip.is_finite() && (0.0..=0.2).contains(&stage.slip)) {
                return Err(SignalError::BadStage {
                    index,
                    reason: format!("slip must lie in [0, 0.2] (got {})", stage.slip),
                });
            }
        }
        if !(self.modulation_depth.is_finite() && (0.0..1.0).contains(&self.modulation_depth)) {
            return Err(SignalError::BadModulationDepth(self.modulation_depth));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(SignalError::BadNoiseLevel(self.noise_std));
        }
        Ok(())
    }

    /// Number of samples each stage contributes at time step `dt`
    /// (duration rounded to the nearest sample; every stage must cover at
    /// least one).
    pub fn stage_sample_counts(&self, dt: f64) -> Result<Vec<usize>, SignalError> {
        self.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SignalError::NotPositive {
                name: "dt",
                value: dt,
            });
        }
        self.load_stages
            .iter()
            .enumerate()
            .map(|(index, stage)| {
                let n = (stage.duration_s / dt).round() as usize;
                if n == 0 {
                    Err(SignalError::BadStage {
                        index,
                        reason: format!(
                            "duration {} s is shorter than one sample",
                            stage.duration_s
                        ),
                    })
                } else {
                    Ok(n)
                }
            })
            .collect()
    }

    /// Half-open sample ranges `[start, end)` covered by each stage.
    pub fn stage_sample_ranges(&self, dt: f64) -> Result<Vec<std::ops::Range<usize>>, SignalError> {
        let counts = self.stage_sample_counts(dt)?;
        let mut start = 0;
        Ok(counts
            .into_iter()
            .map(|n| {
                let range = start..start + n;
                start += n;
                range
            })
            .collect())
    }

    fn effective_modulation(&self) -> f64 {
        if self.broken_bar {
            self.modulation_depth
        } else {
            0.0
        }
    }

    /// Instantaneous current amplitude at time `t` within `stage`.
    fn envelope(&self, stage: &LoadStage, t: f64) -> f64 {
        let m = self.effective_modulation();
        stage.amplitude * (1.0 + m * phase(2.0 * stage.slip * self.supply_frequency_hz, t).sin())
    }
}

fn noise_source(std: f64, seed: u64) -> Option<(ChaCha8Rng, Normal<f64>)> {
    if std > 0.0 {
        let normal = Normal::new(0.0, std).expect("validated noise level");
        Some((ChaCha8Rng::seed_from_u64(seed), normal))
    } else {
        None
    }
}

/// Synthesize the single-phase stator current of a scenario. Time runs
/// continuously across stage boundaries, so only the envelope — never the
/// carrier phase — jumps at a load change. Identical seeds reproduce the
/// series bit for bit.
pub fn gen_motor_current(
    scenario: &MotorScenario,
    dt: f64,
    seed: u64,
) -> Result<SignalSeries, SignalError> {
    let counts = scenario.stage_sample_counts(dt)?;
    let total: usize = counts.iter().sum();
    let mut noise = noise_source(scenario.noise_std, seed);
    let mut samples = Vec::with_capacity(total);
    let mut k = 0usize;
    for (stage, n) in scenario.load_stages.iter().zip(counts) {
        for _ in 0..n {
            let t = k as f64 * dt;
            let mut value =
                scenario.envelope(stage, t) * phase(scenario.supply_frequency_hz, t).sin();
            if let Some((rng, normal)) = noise.as_mut() {
                value += normal.sample(rng);
            }
            samples.push(value);
            k += 1;
        }
    }
    SignalSeries::new(
        dt,
        samples,
        if scenario.broken_bar {
            "motor-faulty"
        } else {
            "motor-normal"
        },
    )
}

/// Synthesize the paired series used by the language engine: the
/// piecewise-constant load command `u` and the dq current magnitude `y`.
///
/// The three phase currents are built from the scenario envelope (with
/// independent per-phase noise), projected through [`super::park_dq`] at the
/// supply angle, and collapsed to `sqrt(i_d² + i_q²)`.
pub fn gen_motor_dq_series(
    scenario: &MotorScenario,
    dt: f64,
    seed: u64,
) -> Result<(SignalSeries, SignalSeries), SignalError> {
    const SHIFT: f64 = 2.0 * std::f64::consts::FRAC_PI_3;
    let counts = scenario.stage_sample_counts(dt)?;
    let total: usize = counts.iter().sum();
    let mut noise = noise_source(scenario.noise_std, seed);
    let mut command = Vec::with_capacity(total);
    let mut magnitude = Vec::with_capacity(total);
    let mut k = 0usize;
    for (stage, n) in scenario.load_stages.iter().zip(counts) {
        for _ in 0..n {
            let t = k as f64 * dt;
            let env = scenario.envelope(stage, t);
            let theta = phase(scenario.supply_frequency_hz, t);
            let mut i_a = env * theta.sin();
            let mut i_b = env * (theta - SHIFT).sin();
            let mut i_c = env * (theta + SHIFT).sin();
            if let Some((rng, normal)) = noise.as_mut() {
                i_a += normal.sample(rng);
                i_b += normal.sample(rng);
                i_c += normal.sample(rng);
            }
            let (d, q) = super::park_dq(i_a, i_b, i_c, theta);
            command.push(stage.amplitude);
            magnitude.push((d * d + q * q).sqrt());
            k += 1;
        }
    }
    Ok((
        SignalSeries::new(dt, command, "load-command")?,
        SignalSeries::new(dt, magnitude, "dq-magnitude")?,
    ))
}
