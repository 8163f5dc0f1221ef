//! Human-readable and plot-ready views of a saved report.

use std::fmt::Write as _;

use sentinel_core::encoding::EncodingConfig;
use sentinel_core::report::{GrammarReport, ImmuneReport, MonitorReport, Verdict};

fn encoding_text(cfg: &EncodingConfig) -> String {
    let abs = if cfg.take_abs {
        ", absolute values"
    } else {
        ""
    };
    format!(
        "{} bits, window {}, range [{}, {}]{}",
        cfg.bits, cfg.window, cfg.v_min, cfg.v_max, abs
    )
}

fn verdict_text(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::Normal => "NORMAL",
        Verdict::Fault => "FAULT",
    }
}

/// Render a report as indented key/value text.
pub fn render_text(report: &MonitorReport) -> String {
    match report {
        MonitorReport::Immune(r) => immune_text(r),
        MonitorReport::Grammar(r) => grammar_text(r),
    }
}

fn immune_text(r: &ImmuneReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "negative-selection monitoring report");
    let _ = writeln!(out, "  input:      {}", r.input);
    let _ = writeln!(out, "  model:      {}", r.model);
    let _ = writeln!(out, "  encoding:   {}", encoding_text(&r.encoding));
    let _ = writeln!(
        out,
        "  detectors:  {} (matching fraction {}, seed {})",
        r.params.detector_count, r.params.matching_fraction, r.params.seed
    );
    let _ = writeln!(out, "  radius:     {}", r.threshold);
    let _ = writeln!(
        out,
        "  windows:    {} ({} samples clamped)",
        r.window_count, r.clamped
    );
    match r.first_detection {
        Some(first) => {
            let _ = writeln!(
                out,
                "  events:     {} (first at window {first})",
                r.total_events
            );
        }
        None => {
            let _ = writeln!(out, "  events:     0");
        }
    }
    let mut busiest: Vec<(&u32, &u64)> = r.histogram.iter().filter(|(_, n)| **n > 0).collect();
    busiest.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    if !busiest.is_empty() {
        let line = busiest
            .iter()
            .take(3)
            .map(|(id, n)| format!("#{id} ×{n}"))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "  busiest:    {line}");
    }
    if let Some(stages) = &r.stages {
        let _ = writeln!(out, "  stages:");
        for stage in stages {
            let _ = writeln!(
                out,
                "    {:<28} windows {:>6}..{:<6} events {:>6}",
                stage.label, stage.start_window, stage.end_window, stage.events
            );
        }
    }
    let _ = writeln!(out, "  verdict:    {}", verdict_text(r.verdict));
    out
}

fn grammar_text(r: &GrammarReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "grammatical monitoring report");
    let _ = writeln!(out, "  input:      {}", r.input);
    let _ = writeln!(out, "  model:      {}", r.model);
    let _ = writeln!(out, "  level grid: {}", encoding_text(&r.input_cfg));
    let _ = writeln!(
        out,
        "  grammar:    {} productions, context depth <= {}",
        r.production_count, r.max_depth
    );
    let _ = writeln!(
        out,
        "  monitor:    word length {}, fault threshold {}",
        r.monitor.word_length, r.monitor.threshold
    );
    let _ = writeln!(
        out,
        "  costs:      substitute {}, insert {}, delete {}",
        r.costs.substitute, r.costs.insert, r.costs.delete
    );
    let _ = writeln!(
        out,
        "  segments:   {} ({} input / {} output samples clamped)",
        r.segment_count, r.clamped_inputs, r.clamped_outputs
    );
    match r.first_fault {
        Some(first) => {
            let _ = writeln!(
                out,
                "  faults:     {} (first at segment {first})",
                r.total_faults
            );
        }
        None => {
            let _ = writeln!(out, "  faults:     0");
        }
    }
    if let Some(stages) = &r.stages {
        let _ = writeln!(out, "  stages:");
        for stage in stages {
            let _ = writeln!(
                out,
                "    {:<28} segments {:>4}..{:<4} mean {:>12} max {:>5} faults {:>4}",
                stage.label,
                stage.start_segment,
                stage.end_segment,
                stage.mean_distance,
                stage.max_distance,
                stage.faults
            );
        }
    }
    let _ = writeln!(out, "  verdict:    {}", verdict_text(r.verdict));
    out
}

/// Render the plot-ready trace of a report: per-window activation counts for
/// the negative-selection engine, per-segment distances for the grammar.
pub fn render_trace(report: &MonitorReport) -> String {
    match report {
        MonitorReport::Immune(r) => {
            let mut counts = vec![0u64; r.window_count];
            for event in &r.events {
                if let Some(slot) = counts.get_mut(event.window_index) {
                    *slot += 1;
                }
            }
            let mut out = String::from("window_index,activations\n");
            for (index, count) in counts.iter().enumerate() {
                let _ = writeln!(out, "{index},{count}");
            }
            out
        }
        MonitorReport::Grammar(r) => {
            let mut out = String::from("segment_index,distance\n");
            for segment in &r.segments {
                let _ = writeln!(out, "{},{}", segment.index, segment.distance);
            }
            out
        }
    }
}
