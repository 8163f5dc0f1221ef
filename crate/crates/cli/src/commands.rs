//! Implementations of the individual subcommands.

use std::fs;
use std::path::Path;

use anyhow::Context;
use log::{debug, info};

use sentinel_core::encoding::{make_windows, EncodingConfig};
use sentinel_core::grammar::{
    infer_grammar, monitor_language, EditCosts, Grammar, LanguageMonitorConfig, SegmentOutcome,
};
use sentinel_core::immune::{
    generate_detectors, monitor, ActivationEvent, DetectorSet, ImmuneParams,
};
use sentinel_core::report::{sig9, GrammarReport, ImmuneReport, MonitorReport, Verdict};
use sentinel_core::signals::{
    gen_signal, read_series, write_pair, write_series, ColumnLayout, SignalKind, SignalSeries,
};

use crate::{
    experiments, GenArgs, GenSource, MonitorGrammarArgs, MonitorImmuneArgs, ReportArgs, ToneArgs,
    TrainGrammarArgs, TrainImmuneArgs,
};

/// Echo a path exactly as the user supplied it (reports must not leak
/// absolute local paths when given relative ones).
fn path_text(path: &Path) -> String {
    path.display().to_string()
}

fn read_single(path: &Path, dt: Option<f64>) -> anyhow::Result<SignalSeries> {
    read_series(path, ColumnLayout::Auto, dt)
        .and_then(|data| data.single())
        .with_context(|| format!("reading series {}", path.display()))
}

fn read_pair_file(path: &Path, dt: Option<f64>) -> anyhow::Result<(SignalSeries, SignalSeries)> {
    read_series(path, ColumnLayout::Auto, dt)
        .and_then(|data| data.pair())
        .with_context(|| format!("reading series pair {}", path.display()))
}

fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Normal => 0,
        Verdict::Fault => 2,
    }
}

pub(crate) fn write_events_csv(path: &Path, events: &[ActivationEvent]) -> anyhow::Result<()> {
    let mut text = String::from("window_index,detector_id,distance\n");
    for event in events {
        text.push_str(&format!(
            "{},{},{}\n",
            event.window_index,
            event.detector_id,
            sig9(event.distance)
        ));
    }
    fs::write(path, text).with_context(|| format!("writing events {}", path.display()))
}

pub(crate) fn write_segments_csv(path: &Path, segments: &[SegmentOutcome]) -> anyhow::Result<()> {
    let mut text = String::from("segment_index,distance,fault\n");
    for segment in segments {
        text.push_str(&format!(
            "{},{},{}\n",
            segment.index,
            sig9(segment.distance),
            u8::from(segment.fault)
        ));
    }
    fs::write(path, text).with_context(|| format!("writing segments {}", path.display()))
}

pub fn gen(args: &GenArgs) -> anyhow::Result<()> {
    match &args.source {
        GenSource::Sine(tone) => write_tone(SignalKind::Sine, tone),
        GenSource::FreqShifted(tone) => write_tone(SignalKind::FreqShifted, tone),
        GenSource::Composite(tone) => write_tone(SignalKind::Composite, tone),
        GenSource::Motor(motor) => {
            let series =
                experiments::motor_current(motor.profile, motor.dt, motor.noise, motor.seed)?;
            write_series(&motor.out, &series)
                .with_context(|| format!("writing {}", motor.out.display()))?;
            info!("wrote {} samples to {}", series.len(), motor.out.display());
            Ok(())
        }
        GenSource::MotorDq(motor) => {
            let (input, output) =
                experiments::motor_pair(motor.profile, motor.dt, motor.noise, motor.seed)?;
            write_pair(&motor.out, &input, &output)
                .with_context(|| format!("writing {}", motor.out.display()))?;
            info!(
                "wrote {} sample pairs to {}",
                input.len(),
                motor.out.display()
            );
            Ok(())
        }
    }
}

fn write_tone(kind: SignalKind, tone: &ToneArgs) -> anyhow::Result<()> {
    let series = gen_signal(kind, tone.amp, tone.freq, tone.dt, tone.n)?;
    write_series(&tone.out, &series).with_context(|| format!("writing {}", tone.out.display()))?;
    info!("wrote {} samples to {}", series.len(), tone.out.display());
    Ok(())
}

pub fn train_immune(args: &TrainImmuneArgs) -> anyhow::Result<()> {
    let series = read_single(&args.self_series, args.dt)?;
    let cfg = match (args.min, args.max) {
        (Some(lo), Some(hi)) => EncodingConfig::new(args.bits, args.window, lo, hi, args.abs)?,
        _ => EncodingConfig::fit(
            series.samples(),
            args.bits,
            args.window,
            args.abs,
            args.headroom,
        )?,
    };
    debug!(
        "encoding: {} bits, window {}, range [{}, {}]",
        cfg.bits, cfg.window, cfg.v_min, cfg.v_max
    );
    let windows = make_windows(&series, &cfg)?;
    if windows.clamped > 0 {
        info!(
            "{} training samples were clamped to the encoding range",
            windows.clamped
        );
    }
    let mut params = ImmuneParams::new(args.detectors, args.md, args.seed);
    params.max_attempts = args.max_attempts;
    let set = generate_detectors(&windows.patterns, &params, &cfg)?;
    fs::write(&args.out, set.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    info!(
        "placed {} detectors (activation radius {}) into {}",
        set.detectors().len(),
        sig9(set.threshold()),
        args.out.display()
    );
    Ok(())
}

pub fn monitor_immune(args: &MonitorImmuneArgs) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&args.model)
        .with_context(|| format!("reading model {}", args.model.display()))?;
    let set = DetectorSet::from_json(&text)
        .with_context(|| format!("loading detector set {}", args.model.display()))?;
    let series = read_single(&args.input, args.dt)?;
    let outcome = monitor(&series, &set)?;
    let report = MonitorReport::Immune(ImmuneReport::new(
        path_text(&args.input),
        path_text(&args.model),
        &set,
        &outcome,
    ));
    fs::write(&args.out, report.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    write_events_csv(&args.events, &outcome.events)?;
    info!(
        "{} windows, {} activations; report {}, events {}",
        outcome.window_count,
        outcome.events.len(),
        args.out.display(),
        args.events.display()
    );
    Ok(exit_code(report.verdict()))
}

pub fn train_grammar(args: &TrainGrammarArgs) -> anyhow::Result<()> {
    let (input, output) = read_pair_file(&args.pair, args.dt)?;
    let cfg = match (args.min, args.max) {
        (Some(lo), Some(hi)) => EncodingConfig::new(args.bits, 1, lo, hi, false)?,
        _ => {
            // Both channels share one level grid, so fit it over both.
            let mut all = input.samples().to_vec();
            all.extend_from_slice(output.samples());
            EncodingConfig::fit(&all, args.bits, 1, false, args.headroom)?
        }
    };
    debug!(
        "level grid: {} bits, range [{}, {}]",
        cfg.bits, cfg.v_min, cfg.v_max
    );
    let grammar = infer_grammar(&input, &output, &cfg, &cfg, args.depth)?;
    fs::write(&args.out, grammar.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    info!(
        "learned {} productions (context depth ≤ {}) into {}",
        grammar.productions().len(),
        grammar.max_depth(),
        args.out.display()
    );
    Ok(())
}

pub fn monitor_grammar(args: &MonitorGrammarArgs) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&args.model)
        .with_context(|| format!("reading model {}", args.model.display()))?;
    let grammar = Grammar::from_json(&text)
        .with_context(|| format!("loading grammar {}", args.model.display()))?;
    let (input, output) = read_pair_file(&args.input, args.dt)?;
    let mcfg = LanguageMonitorConfig::new(args.word, args.threshold)?;
    let costs = EditCosts::new(args.sub, args.ins, args.del)?;
    let outcome = monitor_language(&grammar, &input, &output, &mcfg, &costs)?;
    let report = MonitorReport::Grammar(GrammarReport::new(
        path_text(&args.input),
        path_text(&args.model),
        &grammar,
        &mcfg,
        &costs,
        &outcome,
    ));
    fs::write(&args.out, report.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    write_segments_csv(&args.segments, &outcome.segments)?;
    info!(
        "{} segments, {} faults; report {}, segments {}",
        outcome.segments.len(),
        outcome.fault_count(),
        args.out.display(),
        args.segments.display()
    );
    Ok(exit_code(report.verdict()))
}

pub fn render_report(args: &ReportArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading report {}", args.input.display()))?;
    let report = MonitorReport::from_json(&text)
        .with_context(|| format!("loading report {}", args.input.display()))?;
    let rendered = crate::render::render_text(&report);
    match &args.out {
        Some(path) => {
            fs::write(path, &rendered).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{rendered}"),
    }
    if let Some(path) = &args.csv {
        fs::write(path, crate::render::render_trace(&report))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
