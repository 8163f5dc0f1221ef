//! Machine-readable monitoring reports.
//!
//! A report echoes the full effective configuration of a run next to its
//! results, so a saved report is auditable on its own. Measured values are
//! rounded to nine significant digits before serialisation; configuration
//! values are echoed bit-exactly. Reports carry no timestamps or absolute
//! paths, so identical runs serialise byte-identically.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::EncodingConfig;
use crate::grammar::{EditCosts, Grammar, LanguageMonitorConfig, LanguageOutcome};
use crate::immune::{DetectorSet, ImmuneParams, MonitorOutcome};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("inconsistent report: {0}")]
    Invalid(String),
}

/// Round to nine significant digits (reports quote measurements at this
/// resolution; configuration echoes stay bit-exact).
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}")
        .parse()
        .expect("scientific notation reparses")
}

/// Overall outcome of a monitoring run: `fault` exactly when at least one
/// activation event or fault segment exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Normal,
    Fault,
}

impl Verdict {
    pub fn from_fault(fault: bool) -> Self {
        if fault {
            Verdict::Fault
        } else {
            Verdict::Normal
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Normal => "normal",
            Verdict::Fault => "fault",
        })
    }
}

/// One detector activation, as quoted in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationRecord {
    pub window_index: usize,
    pub detector_id: u32,
    pub distance: f64,
}

/// Event totals for one labelled stretch of windows (`end_window` exclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmuneStageSummary {
    pub label: String,
    pub start_window: usize,
    pub end_window: usize,
    pub events: u64,
}

/// Report of one negative-selection monitoring run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmuneReport {
    pub input: String,
    pub model: String,
    pub encoding: EncodingConfig,
    pub params: ImmuneParams,
    pub threshold: f64,
    pub window_count: usize,
    pub clamped: usize,
    pub total_events: usize,
    pub first_detection: Option<usize>,
    #[serde(with = "detector_histogram")]
    pub histogram: BTreeMap<u32, u64>,
    pub events: Vec<ActivationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<ImmuneStageSummary>>,
    pub verdict: Verdict,
}

impl ImmuneReport {
    pub fn new(
        input: impl Into<String>,
        model: impl Into<String>,
        set: &DetectorSet,
        outcome: &MonitorOutcome,
    ) -> Self {
        let events: Vec<ActivationRecord> = outcome
            .events
            .iter()
            .map(|e| ActivationRecord {
                window_index: e.window_index,
                detector_id: e.detector_id,
                distance: sig9(e.distance),
            })
            .collect();
        Self {
            input: input.into(),
            model: model.into(),
            encoding: *set.encoding(),
            params: *set.params(),
            threshold: sig9(set.threshold()),
            window_count: outcome.window_count,
            clamped: outcome.clamped,
            total_events: events.len(),
            first_detection: events.first().map(|e| e.window_index),
            histogram: outcome.histogram.clone(),
            events,
            stages: None,
            verdict: Verdict::from_fault(!outcome.events.is_empty()),
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        if self.total_events != self.events.len() {
            return Err(ReportError::Invalid(format!(
                "total_events {} but {} events listed",
                self.total_events,
                self.events.len()
            )));
        }
        if self.first_detection != self.events.first().map(|e| e.window_index) {
            return Err(ReportError::Invalid(
                "first_detection disagrees with events".into(),
            ));
        }
        let counted: u64 = self.histogram.values().sum();
        if counted != self.total_events as u64 {
            return Err(ReportError::Invalid(format!(
                "histogram counts {counted} events, report lists {}",
                self.total_events
            )));
        }
        if self.verdict != Verdict::from_fault(self.total_events > 0) {
            return Err(ReportError::Invalid(
                "verdict must be fault exactly when events exist".into(),
            ));
        }
        Ok(())
    }
}

/// JSON object keys are strings, so the per-detector histogram spells its ids
/// out explicitly; this also keeps the map readable inside the tagged report
/// envelope, whose buffered deserialisation has no numeric-key shortcut.
mod detector_histogram {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, u64>, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_map(map.iter().map(|(id, count)| (id.to_string(), *count)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<u32, u64>, D::Error> {
        let raw = BTreeMap::<String, u64>::deserialize(de)?;
        raw.into_iter()
            .map(|(key, count)| match key.parse::<u32>() {
                Ok(id) => Ok((id, count)),
                Err(_) => Err(D::Error::custom(format!("invalid detector id key {key:?}"))),
            })
            .collect()
    }
}

/// Distance statistics for one labelled stretch of segments
/// (`end_segment` exclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarStageSummary {
    pub label: String,
    pub start_segment: usize,
    pub end_segment: usize,
    pub mean_distance: f64,
    pub max_distance: f64,
    pub faults: usize,
}

/// One monitored word, as quoted in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub index: usize,
    pub distance: f64,
    pub fault: bool,
}

/// Echo of the edit-operation weights in force during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditCostsEcho {
    pub substitute: f64,
    pub insert: f64,
    pub delete: f64,
}

impl From<&EditCosts> for EditCostsEcho {
    fn from(costs: &EditCosts) -> Self {
        Self {
            substitute: costs.substitute(),
            insert: costs.insert(),
            delete: costs.delete(),
        }
    }
}

/// Report of one grammatical monitoring run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarReport {
    pub input: String,
    pub model: String,
    pub input_cfg: EncodingConfig,
    pub output_cfg: EncodingConfig,
    pub max_depth: usize,
    pub production_count: usize,
    pub monitor: LanguageMonitorConfig,
    pub costs: EditCostsEcho,
    pub segment_count: usize,
    pub clamped_inputs: usize,
    pub clamped_outputs: usize,
    pub total_faults: usize,
    pub first_fault: Option<usize>,
    pub segments: Vec<SegmentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<GrammarStageSummary>>,
    pub verdict: Verdict,
}

impl GrammarReport {
    pub fn new(
        input: impl Into<String>,
        model: impl Into<String>,
        grammar: &Grammar,
        monitor: &LanguageMonitorConfig,
        costs: &EditCosts,
        outcome: &LanguageOutcome,
    ) -> Self {
        let segments: Vec<SegmentRecord> = outcome
            .segments
            .iter()
            .map(|s| SegmentRecord {
                index: s.index,
                distance: sig9(s.distance),
                fault: s.fault,
            })
            .collect();
        let total_faults = outcome.fault_count();
        Self {
            input: input.into(),
            model: model.into(),
            input_cfg: *grammar.input_cfg(),
            output_cfg: *grammar.output_cfg(),
            max_depth: grammar.max_depth(),
            production_count: grammar.productions().len(),
            monitor: *monitor,
            costs: costs.into(),
            segment_count: segments.len(),
            clamped_inputs: outcome.clamped_inputs,
            clamped_outputs: outcome.clamped_outputs,
            total_faults,
            first_fault: segments.iter().find(|s| s.fault).map(|s| s.index),
            segments,
            stages: None,
            verdict: Verdict::from_fault(total_faults > 0),
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        if self.segment_count != self.segments.len() {
            return Err(ReportError::Invalid(format!(
                "segment_count {} but {} segments listed",
                self.segment_count,
                self.segments.len()
            )));
        }
        let faults = self.segments.iter().filter(|s| s.fault).count();
        if faults != self.total_faults {
            return Err(ReportError::Invalid(format!(
                "total_faults {} but {faults} fault segments listed",
                self.total_faults
            )));
        }
        if self.first_fault != self.segments.iter().find(|s| s.fault).map(|s| s.index) {
            return Err(ReportError::Invalid(
                "first_fault disagrees with segments".into(),
            ));
        }
        if self.verdict != Verdict::from_fault(self.total_faults > 0) {
            return Err(ReportError::Invalid(
                "verdict must be fault exactly when fault segments exist".into(),
            ));
        }
        Ok(())
    }
}

/// A monitoring report from either engine, tagged by `engine` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum MonitorReport {
    Immune(ImmuneReport),
    Grammar(GrammarReport),
}

impl MonitorReport {
    pub fn verdict(&self) -> Verdict {
        match self {
            MonitorReport::Immune(r) => r.verdict,
            MonitorReport::Grammar(r) => r.verdict,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialises");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let report: Self = serde_json::from_str(text)?;
        match &report {
            MonitorReport::Immune(r) => r.validate()?,
            MonitorReport::Grammar(r) => r.validate()?,
        }
        Ok(report)
    }
}
