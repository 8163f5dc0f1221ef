//! Negative-selection detector engine.
//!
//! Training draws random level patterns and keeps only those lying strictly
//! further than the matching threshold `md·√window` (in decoded unit-cube
//! coordinates) from every training window *and* every detector kept so far.
//! The censored survivors therefore cover the complement of the trained
//! region: during monitoring, any window that falls strictly within the
//! threshold of a detector is reported as an activation. By construction a
//! window of the training data itself can never activate a detector.
//!
//! All threshold comparisons are performed on squared distances so that
//! generation and matching use the exact same arithmetic; a distance exactly
//! at the threshold neither matches nor qualifies a candidate.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{make_windows, EncodeError, EncodingConfig, Pattern};
use crate::signals::SignalSeries;

#[derive(Debug, Error)]
pub enum ImmuneError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("patterns use different encodings ({0})")]
    ConfigMismatch(String),
    #[error("matching fraction must lie strictly between 0 and 1 (got {0})")]
    BadMatchingFraction(f64),
    #[error("detector count must be at least 1")]
    BadDetectorCount,
    #[error("attempt budget must be at least 1")]
    BadAttemptBudget,
    #[error("self set must not be empty")]
    EmptySelfSet,
    #[error(
        "generation budget of {attempts} attempts exhausted after placing {placed} of {requested} detectors"
    )]
    Exhausted {
        placed: usize,
        requested: usize,
        attempts: u64,
    },
    #[error("sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("run length {r} must lie in 1..={len}")]
    BadRunLength { r: usize, len: usize },
    #[error("malformed detector set: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Generation parameters. `max_attempts` bounds the total number of candidate
/// draws for a whole run; `None` means `10000 × detector_count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmuneParams {
    #[serde(rename = "d")]
    pub detector_count: usize,
    #[serde(rename = "md")]
    pub matching_fraction: f64,
    pub seed: u64,
    #[serde(skip)]
    pub max_attempts: Option<u64>,
}

impl ImmuneParams {
    pub fn new(detector_count: usize, matching_fraction: f64, seed: u64) -> Self {
        Self {
            detector_count,
            matching_fraction,
            seed,
            max_attempts: None,
        }
    }

    pub fn validate(&self) -> Result<(), ImmuneError> {
        if self.detector_count == 0 {
            return Err(ImmuneError::BadDetectorCount);
        }
        check_fraction(self.matching_fraction)?;
        if self.max_attempts == Some(0) {
            return Err(ImmuneError::BadAttemptBudget);
        }
        Ok(())
    }

    pub fn attempt_budget(&self) -> u64 {
        self.max_attempts
            .unwrap_or(10_000 * self.detector_count as u64)
    }
}

fn check_fraction(md: f64) -> Result<(), ImmuneError> {
    if !(md.is_finite() && 0.0 < md && md < 1.0) {
        return Err(ImmuneError::BadMatchingFraction(md));
    }
    Ok(())
}

fn check_compatible(p: &Pattern, q: &Pattern) -> Result<(), ImmuneError> {
    if p.bits() != q.bits() || p.len() != q.len() {
        return Err(ImmuneError::ConfigMismatch(format!(
            "{} bits × {} levels vs {} bits × {} levels",
            p.bits(),
            p.len(),
            q.bits(),
            q.len()
        )));
    }
    Ok(())
}

fn distance_squared(p: &Pattern, q: &Pattern) -> f64 {
    p.decoded()
        .zip(q.decoded())
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Euclidean distance between two patterns in decoded `[0,1]^w` coordinates.
pub fn euclidean_distance(p: &Pattern, q: &Pattern) -> Result<f64, ImmuneError> {
    check_compatible(p, q)?;
    Ok(distance_squared(p, q).sqrt())
}

/// Squared matching threshold for patterns of length `window`: `(md·√w)²`.
fn threshold_squared(md: f64, window: usize) -> f64 {
    md * md * window as f64
}

/// Whether two patterns match: distance strictly below `md·√w`, the fraction
/// `md` of the unit-cube diagonal. Exact equality is not a match.
pub fn matches(p: &Pattern, q: &Pattern, md: f64) -> Result<bool, ImmuneError> {
    check_fraction(md)?;
    check_compatible(p, q)?;
    Ok(distance_squared(p, q) < threshold_squared(md, p.len()))
}

/// Legacy bit-string rule: two equal-length sequences match when they agree
/// on at least `r` contiguous positions.
pub fn r_contiguous_match<T: PartialEq>(p: &[T], q: &[T], r: usize) -> Result<bool, ImmuneError> {
    if p.len() != q.len() {
        return Err(ImmuneError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if r == 0 || r > p.len() {
        return Err(ImmuneError::BadRunLength { r, len: p.len() });
    }
    let mut run = 0usize;
    for (a, b) in p.iter().zip(q) {
        if a == b {
            run += 1;
            if run >= r {
                return Ok(true);
            }
        } else {
            run = 0;
        }
    }
    Ok(false)
}

/// A censored detector: an identifier and the pattern it guards.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    id: u32,
    pattern: Pattern,
}

impl Detector {
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }
}

/// A trained detector set: the censored detectors plus everything needed to
/// reproduce the encoding they were trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSet {
    detectors: Vec<Detector>,
    params: ImmuneParams,
    encoding: EncodingConfig,
    self_size: usize,
}

/// Persisted shape of a [`DetectorSet`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorSetDoc {
    encoding: EncodingConfig,
    params: ImmuneParams,
    detectors: Vec<Vec<u16>>,
}

impl DetectorSet {
    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn params(&self) -> &ImmuneParams {
        &self.params
    }

    pub fn encoding(&self) -> &EncodingConfig {
        &self.encoding
    }

    /// Number of censoring patterns used at generation time
    /// (not persisted; reads 0 after a load).
    pub fn self_size(&self) -> usize {
        self.self_size
    }

    /// Matching threshold `md·√window` in decoded coordinates.
    pub fn threshold(&self) -> f64 {
        self.params.matching_fraction * (self.encoding.window as f64).sqrt()
    }

    pub fn to_json(&self) -> String {
        let doc = DetectorSetDoc {
            encoding: self.encoding,
            params: self.params,
            detectors: self
                .detectors
                .iter()
                .map(|d| d.pattern.levels().to_vec())
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("detector set serialises");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ImmuneError> {
        let doc: DetectorSetDoc = serde_json::from_str(text)?;
        doc.encoding.validate()?;
        doc.params.validate()?;
        let detectors = doc
            .detectors
            .into_iter()
            .enumerate()
            .map(|(id, levels)| {
                Ok(Detector {
                    id: id as u32,
                    pattern: Pattern::new(levels, &doc.encoding)?,
                })
            })
            .collect::<Result<Vec<_>, ImmuneError>>()?;
        Ok(Self {
            detectors,
            params: doc.params,
            encoding: doc.encoding,
            self_size: 0,
        })
    }
}

/// Generate a censored detector set against `self_set`.
///
/// Candidates are drawn with uniformly random levels. A candidate survives
/// only if its distance to every self pattern and every previously accepted
/// detector strictly exceeds the matching threshold. Runs are deterministic
/// for a given seed. When the attempt budget runs out first, the error
/// reports how many detectors had been placed.
pub fn generate_detectors(
    self_set: &[Pattern],
    params: &ImmuneParams,
    cfg: &EncodingConfig,
) -> Result<DetectorSet, ImmuneError> {
    cfg.validate()?;
    params.validate()?;
    if self_set.is_empty() {
        return Err(ImmuneError::EmptySelfSet);
    }
    let reference = Pattern::from_raw(vec![0; cfg.window], cfg.bits);
    for p in self_set {
        check_compatible(p, &reference)?;
    }
    // duplicate windows censor identically; keep one of each
    let unique: Vec<&Pattern> = self_set
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let thr2 = threshold_squared(params.matching_fraction, cfg.window);
    let budget = params.attempt_budget();
    let max_level = cfg.max_level();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut detectors: Vec<Detector> = Vec::with_capacity(params.detector_count);
    let mut attempts = 0u64;
    while detectors.len() < params.detector_count {
        if attempts >= budget {
            return Err(ImmuneError::Exhausted {
                placed: detectors.len(),
                requested: params.detector_count,
                attempts: budget,
            });
        }
        attempts += 1;
        let candidate = Pattern::from_raw(
            (0..cfg.window)
                .map(|_| rng.random_range(0..=max_level))
                .collect(),
            cfg.bits,
        );
        let clear_of = |other: &Pattern| distance_squared(&candidate, other) > thr2;
        if unique.iter().all(|p| clear_of(p)) && detectors.iter().all(|d| clear_of(&d.pattern)) {
            detectors.push(Detector {
                id: detectors.len() as u32,
                pattern: candidate,
            });
        }
    }
    Ok(DetectorSet {
        detectors,
        params: *params,
        encoding: *cfg,
        self_size: self_set.len(),
    })
}

/// One detector firing on one monitored window.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationEvent {
    pub window_index: usize,
    pub detector_id: u32,
    pub distance: f64,
}

/// Everything a monitoring pass produces: every (window, detector) match in
/// scan order, the per-detector activation histogram (zero counts included),
/// the number of windows examined and the clamp count from encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorOutcome {
    pub events: Vec<ActivationEvent>,
    pub histogram: BTreeMap<u32, u64>,
    pub window_count: usize,
    pub clamped: usize,
}

/// Slide the trained encoding over a series and record every detector match.
pub fn monitor(series: &SignalSeries, set: &DetectorSet) -> Result<MonitorOutcome, ImmuneError> {
    let windows = make_windows(series, &set.encoding)?;
    let thr2 = threshold_squared(set.params.matching_fraction, set.encoding.window);
    let mut histogram: BTreeMap<u32, u64> = set.detectors.iter().map(|d| (d.id, 0u64)).collect();
    let mut events = Vec::new();
    for (window_index, window) in windows.patterns.iter().enumerate() {
        for detector in &set.detectors {
            let d2 = distance_squared(window, &detector.pattern);
            if d2 < thr2 {
                events.push(ActivationEvent {
                    window_index,
                    detector_id: detector.id,
                    distance: d2.sqrt(),
                });
                *histogram
                    .get_mut(&detector.id)
                    .expect("histogram covers all ids") += 1;
            }
        }
    }
    Ok(MonitorOutcome {
        events,
        histogram,
        window_count: windows.patterns.len(),
        clamped: windows.clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gen_signal, SignalKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(bits: u8, window: usize) -> EncodingConfig {
        EncodingConfig::new(bits, window, -1.0, 1.0, false).unwrap()
    }

    fn pat(levels: &[u16], c: &EncodingConfig) -> Pattern {
        Pattern::new(levels.to_vec(), c).unwrap()
    }

    #[test]
    fn distance_along_a_single_axis_is_the_decoded_difference() {
        let c = cfg(8, 7);
        let p = pat(&[0, 0, 0, 0, 0, 0, 0], &c);
        let q = pat(&[51, 0, 0, 0, 0, 0, 0], &c);
        assert_relative_eq!(euclidean_distance(&p, &q).unwrap(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn opposite_corners_span_the_cube_diagonal() {
        let c = cfg(8, 7);
        let p = pat(&[0; 7], &c);
        let q = pat(&[255; 7], &c);
        assert_eq!(euclidean_distance(&p, &q).unwrap(), 7.0f64.sqrt());
    }

    #[test]
    fn distance_requires_identical_encodings() {
        let a = pat(&[0, 0, 0], &cfg(8, 3));
        let b = pat(&[0, 0, 0], &cfg(4, 3));
        assert!(euclidean_distance(&a, &b).is_err());
        let c = pat(&[0, 0], &cfg(8, 2));
        assert!(euclidean_distance(&a, &c).is_err());
        assert!(matches(&a, &b, 0.2).is_err());
    }

    #[test]
    fn matching_is_strictly_below_the_threshold() {
        // md·√7 ≈ 0.5291503; 127/255 ≈ 0.498 is inside, 136/255 ≈ 0.533 outside
        let c = cfg(8, 7);
        let origin = pat(&[0; 7], &c);
        let near = pat(&[127, 0, 0, 0, 0, 0, 0], &c);
        let far = pat(&[136, 0, 0, 0, 0, 0, 0], &c);
        assert!(matches(&origin, &near, 0.2).unwrap());
        assert!(!matches(&origin, &far, 0.2).unwrap());
        assert!(matches(&origin, &near, 1.5).is_err());
        assert!(matches(&origin, &near, 0.0).is_err());
    }

    #[test]
    fn distance_exactly_at_the_threshold_neither_matches_nor_separates() {
        // one bit, four levels: distance 1.0 equals md·√4 exactly for md = 0.5
        let c = EncodingConfig::new(1, 4, 0.0, 1.0, false).unwrap();
        let p = pat(&[0, 0, 0, 0], &c);
        let q = pat(&[1, 0, 0, 0], &c);
        let d2 = {
            let d = euclidean_distance(&p, &q).unwrap();
            d * d
        };
        let thr2 = 0.5 * 0.5 * 4.0;
        assert_eq!(d2, thr2);
        assert!(!matches(&p, &q, 0.5).unwrap()); // not a match...
        assert!(d2 <= thr2); // ...and not clear of the self region either
    }

    #[test]
    fn contiguous_run_rule() {
        let p = b"10110";
        let q = b"10010";
        assert!(r_contiguous_match(p, q, 1).unwrap());
        assert!(r_contiguous_match(p, q, 2).unwrap());
        assert!(!r_contiguous_match(p, q, 3).unwrap());
        assert!(r_contiguous_match(p, p, 5).unwrap());
        assert!(!r_contiguous_match(b"ab", b"ba", 1).unwrap());
        assert!(r_contiguous_match(p, b"1011", 2).is_err());
        assert!(r_contiguous_match(p, q, 0).is_err());
        assert!(r_contiguous_match(p, q, 6).is_err());
    }

    fn small_self() -> (Vec<Pattern>, EncodingConfig) {
        let c = cfg(8, 3);
        let series = gen_signal(SignalKind::Sine, 1.0, 1.0, 0.05, 40).unwrap();
        let ws = make_windows(&series, &c).unwrap();
        (ws.patterns, c)
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (self_set, c) = small_self();
        let params = ImmuneParams::new(5, 0.2, 9);
        let a = generate_detectors(&self_set, &params, &c).unwrap();
        let b = generate_detectors(&self_set, &params, &c).unwrap();
        assert_eq!(a, b);
        let other = generate_detectors(&self_set, &ImmuneParams::new(5, 0.2, 10), &c).unwrap();
        assert_ne!(a, other);
        assert_eq!(a.self_size(), self_set.len());
        assert_eq!(a.detectors().len(), 5);
    }

    #[test]
    fn detectors_keep_their_distance_from_self_and_each_other() {
        let (self_set, c) = small_self();
        let params = ImmuneParams::new(8, 0.25, 3);
        let set = generate_detectors(&self_set, &params, &c).unwrap();
        let thr = set.threshold();
        for d in set.detectors() {
            for s in &self_set {
                assert!(euclidean_distance(d.pattern(), s).unwrap() > thr);
            }
        }
        for (i, a) in set.detectors().iter().enumerate() {
            for b in &set.detectors()[i + 1..] {
                assert!(euclidean_distance(a.pattern(), b.pattern()).unwrap() > thr);
            }
        }
    }

    #[test]
    fn impossible_request_reports_partial_placement() {
        // one-bit single-level space: only two patterns exist, and with
        // md = 0.9 the second detector can never clear the first
        let c = EncodingConfig::new(1, 1, 0.0, 1.0, false).unwrap();
        let self_set = vec![pat(&[0], &c)];
        let params = ImmuneParams {
            detector_count: 2,
            matching_fraction: 0.9,
            seed: 1,
            max_attempts: Some(500),
        };
        match generate_detectors(&self_set, &params, &c) {
            Err(ImmuneError::Exhausted {
                placed,
                requested,
                attempts,
            }) => {
                assert_eq!(placed, 1);
                assert_eq!(requested, 2);
                assert_eq!(attempts, 500);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn generation_validates_inputs() {
        let (self_set, c) = small_self();
        assert!(generate_detectors(&[], &ImmuneParams::new(1, 0.2, 0), &c).is_err());
        assert!(generate_detectors(&self_set, &ImmuneParams::new(0, 0.2, 0), &c).is_err());
        assert!(generate_detectors(&self_set, &ImmuneParams::new(1, 1.0, 0), &c).is_err());
        let mismatched = cfg(4, 3);
        assert!(generate_detectors(&self_set, &ImmuneParams::new(1, 0.2, 0), &mismatched).is_err());
    }

    #[test]
    fn monitoring_the_training_series_stays_silent() {
        let c = cfg(8, 7);
        let series = gen_signal(SignalKind::Sine, 1.0, 1.0, 0.01, 300).unwrap();
        let ws = make_windows(&series, &c).unwrap();
        let set = generate_detectors(&ws.patterns, &ImmuneParams::new(10, 0.2, 4), &c).unwrap();
        let outcome = monitor(&series, &set).unwrap();
        assert_eq!(outcome.events.len(), 0);
        assert_eq!(outcome.window_count, 294);
        assert!(outcome.histogram.values().all(|&n| n == 0));
        assert_eq!(outcome.histogram.len(), 10);
    }

    #[test]
    fn events_arrive_in_scan_order_with_consistent_histogram() {
        // Train on a small-amplitude tone, then monitor a large-amplitude one:
        // the excursion beyond the trained envelope reliably reaches detectors.
        let c = EncodingConfig::new(8, 7, -1.1, 1.1, false).unwrap();
        let series = gen_signal(SignalKind::Sine, 0.3, 1.0, 0.01, 300).unwrap();
        let ws = make_windows(&series, &c).unwrap();
        let set = generate_detectors(&ws.patterns, &ImmuneParams::new(15, 0.2, 1), &c).unwrap();
        let faulty = gen_signal(SignalKind::Sine, 1.0, 1.0, 0.01, 300).unwrap();
        let outcome = monitor(&faulty, &set).unwrap();
        assert!(
            !outcome.events.is_empty(),
            "amplitude excursion should activate detectors"
        );
        for pair in outcome.events.windows(2) {
            assert!(
                pair[0].window_index < pair[1].window_index
                    || (pair[0].window_index == pair[1].window_index
                        && pair[0].detector_id < pair[1].detector_id)
            );
        }
        let total: u64 = outcome.histogram.values().sum();
        assert_eq!(total as usize, outcome.events.len());
        for e in &outcome.events {
            assert!(e.distance < set.threshold());
        }
    }

    #[test]
    fn detector_set_round_trips_through_json() {
        let (self_set, c) = small_self();
        let set = generate_detectors(&self_set, &ImmuneParams::new(6, 0.2, 11), &c).unwrap();
        let text = set.to_json();
        let back = DetectorSet::from_json(&text).unwrap();
        assert_eq!(back.detectors(), set.detectors());
        assert_eq!(back.params(), set.params());
        assert_eq!(back.encoding(), set.encoding());
        assert_eq!(back.self_size(), 0); // training-time metadata, not persisted
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(DetectorSet::from_json("{").is_err());
        assert!(DetectorSet::from_json("{}").is_err());
        let (self_set, c) = small_self();
        let set = generate_detectors(&self_set, &ImmuneParams::new(2, 0.2, 1), &c).unwrap();
        let tampered = set.to_json().replace("\"bits\": 8", "\"bits\": 99");
        assert!(DetectorSet::from_json(&tampered).is_err());
        let extra = set
            .to_json()
            .replace("\"params\"", "\"unexpected\": 1, \"params\"");
        assert!(DetectorSet::from_json(&extra).is_err());
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_triangular(
            a in proptest::collection::vec(0u16..=255, 5),
            b in proptest::collection::vec(0u16..=255, 5),
            c_levels in proptest::collection::vec(0u16..=255, 5),
        ) {
            let c = cfg(8, 5);
            let p = pat(&a, &c);
            let q = pat(&b, &c);
            let r = pat(&c_levels, &c);
            let pq = euclidean_distance(&p, &q).unwrap();
            let qp = euclidean_distance(&q, &p).unwrap();
            prop_assert_eq!(pq, qp);
            let pr = euclidean_distance(&p, &r).unwrap();
            let qr = euclidean_distance(&q, &r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-12);
            prop_assert_eq!(euclidean_distance(&p, &p).unwrap(), 0.0);
        }

        #[test]
        fn run_rule_agrees_with_naive_scan(
            raw_a in proptest::collection::vec(0u8..2, 19),
            raw_b in proptest::collection::vec(0u8..2, 19),
            len in 1usize..=19,
            r_seed in 0usize..19,
        ) {
            let a = &raw_a[..len];
            let b = &raw_b[..len];
            let r = 1 + r_seed % len;
            let naive = (0..=len - r).any(|i| (i..i + r).all(|j| a[j] == b[j]));
            prop_assert_eq!(r_contiguous_match(a, b, r).unwrap(), naive);
        }
    }
}
