//! CSV import/export for signal series.
//!
//! The on-disk format is deliberately small: comma-separated numeric columns,
//! an optional single header line, `.` as the decimal separator. Layouts are
//! `time,value` and `time,u,y` (timestamps first), or the same without the
//! time column, in which case the caller must supply the time step. Written
//! files always carry a header and render numbers with nine significant
//! digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use super::{SignalError, SignalSeries};

/// Relative tolerance for deciding that timestamps are uniformly spaced.
const DT_RELATIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Expected column arrangement of an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnLayout {
    /// Decide from the column count of the first data row:
    /// 1 → `ValueOnly`, 2 → `TimeValue`, 3 → `TimeInputOutput`.
    #[default]
    Auto,
    /// `time,value`
    TimeValue,
    /// `time,u,y`
    TimeInputOutput,
    /// a single value column; the time step must be supplied
    ValueOnly,
    /// `u,y` without timestamps; the time step must be supplied
    InputOutputOnly,
}

impl ColumnLayout {
    fn columns(self) -> usize {
        match self {
            ColumnLayout::Auto => 0,
            ColumnLayout::TimeValue => 2,
            ColumnLayout::TimeInputOutput => 3,
            ColumnLayout::ValueOnly => 1,
            ColumnLayout::InputOutputOnly => 2,
        }
    }

    fn has_time(self) -> bool {
        matches!(
            self,
            ColumnLayout::TimeValue | ColumnLayout::TimeInputOutput
        )
    }
}

/// Result of [`read_series`]: a single series or an input/output pair.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesData {
    Single(SignalSeries),
    Pair {
        input: SignalSeries,
        output: SignalSeries,
    },
}

impl SeriesData {
    pub fn single(self) -> Result<SignalSeries, ReadError> {
        match self {
            SeriesData::Single(s) => Ok(s),
            SeriesData::Pair { .. } => Err(ReadError::Format(
                "expected a single-value series, found an input/output pair".into(),
            )),
        }
    }

    pub fn pair(self) -> Result<(SignalSeries, SignalSeries), ReadError> {
        match self {
            SeriesData::Pair { input, output } => Ok((input, output)),
            SeriesData::Single(_) => Err(ReadError::Format(
                "expected an input/output pair, found a single-value series".into(),
            )),
        }
    }
}

struct Row {
    line: usize,
    values: Vec<f64>,
}

fn parse_rows(text: &str) -> Result<Vec<Row>, ReadError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = trimmed
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        match parsed {
            Ok(values) => rows.push(Row { line, values }),
            Err(e) => {
                // tolerate one non-numeric leading line as a header
                if rows.is_empty() && line == first_content_line(text) {
                    continue;
                }
                return Err(ReadError::Parse {
                    line,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

fn first_content_line(text: &str) -> usize {
    for (idx, raw) in text.lines().enumerate() {
        if !raw.trim().is_empty() {
            return idx + 1;
        }
    }
    0
}

/// Derive the time step from a timestamp column, insisting on uniform spacing.
fn infer_dt(rows: &[Row]) -> Result<f64, ReadError> {
    if rows.len() < 2 {
        return Err(ReadError::Format(
            "cannot infer the time step from fewer than two rows; pass it explicitly".into(),
        ));
    }
    let dt = rows[1].values[0] - rows[0].values[0];
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ReadError::Format(format!(
            "timestamps must increase (first step is {dt})"
        )));
    }
    for pair in rows.windows(2) {
        let step = pair[1].values[0] - pair[0].values[0];
        if ((step - dt) / dt).abs() > DT_RELATIVE_TOLERANCE {
            return Err(ReadError::Parse {
                line: pair[1].line,
                reason: format!("timestamps are not uniformly spaced ({step} after {dt})"),
            });
        }
    }
    Ok(dt)
}

/// Read a series file. `dt_override` replaces (and is required in place of)
/// an inferred time step for layouts without timestamps.
pub fn read_series(
    path: &Path,
    layout: ColumnLayout,
    dt_override: Option<f64>,
) -> Result<SeriesData, ReadError> {
    let text = fs::read_to_string(path)?;
    let rows = parse_rows(&text)?;
    if rows.is_empty() {
        return Err(ReadError::Format(format!(
            "{}: no data rows",
            path.display()
        )));
    }

    let layout = match layout {
        ColumnLayout::Auto => match rows[0].values.len() {
            1 => ColumnLayout::ValueOnly,
            2 => ColumnLayout::TimeValue,
            3 => ColumnLayout::TimeInputOutput,
            n => {
                return Err(ReadError::Parse {
                    line: rows[0].line,
                    reason: format!("expected 1-3 columns, found {n}"),
                })
            }
        },
        explicit => explicit,
    };
    for row in &rows {
        if row.values.len() != layout.columns() {
            return Err(ReadError::Parse {
                line: row.line,
                reason: format!(
                    "expected {} columns, found {}",
                    layout.columns(),
                    row.values.len()
                ),
            });
        }
    }

    let dt = if layout.has_time() {
        // validate spacing even when the caller overrides the value
        let inferred = if rows.len() >= 2 {
            Some(infer_dt(&rows)?)
        } else {
            None
        };
        match (dt_override, inferred) {
            (Some(dt), _) => dt,
            (None, Some(dt)) => dt,
            (None, None) => {
                return Err(ReadError::Format(
                    "cannot infer the time step from a single row; pass it explicitly".into(),
                ))
            }
        }
    } else {
        dt_override.ok_or_else(|| {
            ReadError::Format("this layout has no timestamps; the time step is required".into())
        })?
    };

    let label = path.display().to_string();
    let column = |index: usize| rows.iter().map(|r| r.values[index]).collect::<Vec<_>>();
    match layout {
        ColumnLayout::TimeValue => Ok(SeriesData::Single(SignalSeries::new(dt, column(1), label)?)),
        ColumnLayout::ValueOnly => Ok(SeriesData::Single(SignalSeries::new(dt, column(0), label)?)),
        ColumnLayout::TimeInputOutput => Ok(SeriesData::Pair {
            input: SignalSeries::new(dt, column(1), format!("{label}#u"))?,
            output: SignalSeries::new(dt, column(2), format!("{label}#y"))?,
        }),
        ColumnLayout::InputOutputOnly => Ok(SeriesData::Pair {
            input: SignalSeries::new(dt, column(0), format!("{label}#u"))?,
            output: SignalSeries::new(dt, column(1), format!("{label}#y"))?,
        }),
        ColumnLayout::Auto => unreachable!("resolved above"),
    }
}

/// Format a number with nine significant digits, as used by all emitted CSV.
pub(crate) fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Write a `time,value` file.
pub fn write_series(path: &Path, series: &SignalSeries) -> std::io::Result<()> {
    let mut out = String::with_capacity(series.len() * 24 + 16);
    out.push_str("time,value\n");
    for (k, &v) in series.samples().iter().enumerate() {
        out.push_str(&fmt9(series.time_at(k)));
        out.push(',');
        out.push_str(&fmt9(v));
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())
}

/// Write a `time,u,y` file from two series sharing a time base.
pub fn write_pair(
    path: &Path,
    input: &SignalSeries,
    output: &SignalSeries,
) -> Result<(), ReadError> {
    if input.len() != output.len() {
        return Err(ReadError::Format(format!(
            "paired series differ in length ({} vs {})",
            input.len(),
            output.len()
        )));
    }
    if ((input.dt() - output.dt()) / input.dt()).abs() > 1e-12 {
        return Err(ReadError::Format(format!(
            "paired series differ in time step ({} vs {})",
            input.dt(),
            output.dt()
        )));
    }
    let mut out = String::with_capacity(input.len() * 36 + 16);
    out.push_str("time,u,y\n");
    for k in 0..input.len() {
        out.push_str(&fmt9(input.time_at(k)));
        out.push(',');
        out.push_str(&fmt9(input.samples()[k]));
        out.push(',');
        out.push_str(&fmt9(output.samples()[k]));
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes()).map_err(ReadError::Io)
}
