//! File formats: law-family JSON, run-series CSV/JSON, schedule and
//! partition JSON, trajectory/frontier CSV, and fit-report JSON.
//!
//! Everything parses from in-memory text and serializes back to text, so the
//! functions here double as the untrusted-input boundary (they are the fuzz
//! targets). Wire structs reject unknown keys; semantic validation is
//! delegated to the domain constructors, so a file that parses always yields
//! a usable value.
//!
//! All JSON emitted here prints floats with 17 significant digits
//! (`{:.16e}`), enough to round-trip any f64, so identical inputs produce
//! byte-identical output on every platform.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{FitError, FitReport, RunSeries};
use crate::law::{CostUnit, LawError, LawFamily, PowerLaw};
use crate::trajectory::{FrontierPoint, Trajectory, TrajectoryError};
use crate::traverse::{
    ErrorPartition, Schedule, ScheduleKind, Segment, Transition, TraverseError, Trigger,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV line {line}: {detail}")]
    Csv { line: u64, detail: String },
    #[error("CSV header must be exactly 'compute,error', got '{0}'")]
    CsvHeader(String),
    #[error("unknown schedule kind '{0}' (expected greedy, linear, logarithmic, or explicit)")]
    UnknownScheduleKind(String),
    #[error("unknown trigger type '{0}' (expected 'error' or 'compute')")]
    UnknownTriggerType(String),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Traverse(#[from] TraverseError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

// ---------------------------------------------------------------------------
// JSON emission with fixed float formatting

struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize a JSON value with floats at 17 significant digits, so output is
/// byte-identical across platforms and lossless on re-parse.
pub fn json_to_string_fixed(value: &serde_json::Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    value
        .serialize(&mut ser)
        .expect("serializing a Value to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

fn to_fixed_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("wire structs serialize to plain JSON");
    json_to_string_fixed(&v)
}

// ---------------------------------------------------------------------------
// Law family JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LawWire {
    shape: String,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyWire {
    cost_unit: CostUnit,
    shape_parameter: String,
    laws: Vec<LawWire>,
}

/// Parse `{"cost_unit", "shape_parameter", "laws": [{"shape","a","b","c","d"}]}`.
///
/// Unknown keys are rejected. The order laws appear in the file becomes the
/// family's shape order (used for tie-breaks and monotonicity checks).
pub fn family_from_json(text: &str) -> Result<LawFamily, IoError> {
    let wire: FamilyWire = serde_json::from_str(text)?;
    let laws = wire
        .laws
        .iter()
        .map(|l| PowerLaw::new(l.a, l.b, l.c, l.d, l.shape.clone(), wire.cost_unit))
        .collect::<Result<Vec<_>, _>>()?;
    let order = wire.laws.into_iter().map(|l| l.shape).collect();
    Ok(LawFamily::new(wire.shape_parameter, laws, Some(order))?)
}

pub fn family_to_json(family: &LawFamily) -> String {
    json_to_string_fixed(&family_to_value(family))
}

/// Family as a JSON value, for embedding in larger CLI payloads.
pub fn family_to_value(family: &LawFamily) -> serde_json::Value {
    // emit laws in shape order so parse(emit(f)) preserves it
    let ordered: Vec<&PowerLaw> = match family.shape_order() {
        Some(order) => order
            .iter()
            .map(|label| family.get(label).expect("order labels are validated"))
            .collect(),
        None => family.laws().iter().collect(),
    };
    let wire = FamilyWire {
        cost_unit: family.cost_unit(),
        shape_parameter: family.shape_parameter().to_string(),
        laws: ordered
            .into_iter()
            .map(|l| LawWire {
                shape: l.shape_label().to_string(),
                a: l.a(),
                b: l.b(),
                c: l.c(),
                d: l.d(),
            })
            .collect(),
    };
    serde_json::to_value(&wire).expect("wire structs serialize to plain JSON")
}

// ---------------------------------------------------------------------------
// Run series CSV / JSON

/// Parse a two-column CSV with the exact header `compute,error`. The shape
/// label and cost unit are not part of the file (one configuration per
/// file), so the caller supplies them — typically from the file name.
///
/// Errors carry 1-based line numbers; the header is line 1.
pub fn run_series_from_csv(
    text: &str,
    shape_label: &str,
    cost_unit: CostUnit,
) -> Result<RunSeries, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?;
    let fields: Vec<&str> = headers.iter().collect();
    if fields != ["compute", "error"] {
        return Err(IoError::CsvHeader(fields.join(",")));
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(IoError::Csv {
                line,
                detail: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let parse = |index: usize, name: &str| -> Result<f64, IoError> {
            record[index].parse::<f64>().map_err(|_| IoError::Csv {
                line,
                detail: format!("{name} '{}' is not a number", &record[index]),
            })
        };
        let compute = parse(0, "compute")?;
        let error = parse(1, "error")?;
        if !compute.is_finite() || compute <= 0.0 {
            return Err(IoError::Csv {
                line,
                detail: format!("compute must be finite and positive, got {compute}"),
            });
        }
        if !error.is_finite() || error <= 0.0 {
            return Err(IoError::Csv {
                line,
                detail: format!("error must be finite and positive, got {error}"),
            });
        }
        points.push((compute, error));
    }
    Ok(RunSeries::new(
        shape_label,
        cost_unit,
        points,
        BTreeMap::new(),
    )?)
}

fn csv_error(e: csv::Error) -> IoError {
    let line = match e.position() {
        Some(p) => p.line(),
        None => 0,
    };
    IoError::Csv {
        line,
        detail: e.to_string(),
    }
}

pub fn run_series_to_csv(series: &RunSeries) -> String {
    let mut out = String::from("compute,error\n");
    for &(compute, error) in series.points() {
        out.push_str(&format!("{compute:.16e},{error:.16e}\n"));
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesWire {
    shape: String,
    cost_unit: CostUnit,
    points: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

/// Parse `{"shape", "cost_unit", "points": [[C, E], ...]}` with an optional
/// `"metadata"` string map.
pub fn run_series_from_json(text: &str) -> Result<RunSeries, IoError> {
    let wire: SeriesWire = serde_json::from_str(text)?;
    Ok(RunSeries::new(
        wire.shape,
        wire.cost_unit,
        wire.points,
        wire.metadata,
    )?)
}

pub fn run_series_to_json(series: &RunSeries) -> String {
    let wire = SeriesWire {
        shape: series.shape_label().to_string(),
        cost_unit: series.cost_unit(),
        points: series.points().to_vec(),
        metadata: series.metadata().clone(),
    };
    to_fixed_json(&wire)
}

// ---------------------------------------------------------------------------
// Schedule JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionWire {
    shape: String,
    trigger_type: String,
    value: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleWire {
    kind: String,
    initial: String,
    transitions: Vec<TransitionWire>,
}

fn kind_to_str(kind: ScheduleKind) -> &'static str {
    kind.as_str()
}

fn kind_from_str(s: &str) -> Result<ScheduleKind, IoError> {
    match s {
        "greedy" => Ok(ScheduleKind::Greedy),
        "linear" => Ok(ScheduleKind::Linear),
        "logarithmic" => Ok(ScheduleKind::Logarithmic),
        "explicit" => Ok(ScheduleKind::Explicit),
        other => Err(IoError::UnknownScheduleKind(other.to_string())),
    }
}

/// Parse `{"kind", "initial", "transitions": [{"shape", "trigger_type":
/// "error"|"compute", "value"}]}` and validate trigger ordering.
pub fn schedule_from_json(text: &str) -> Result<Schedule, IoError> {
    let wire: ScheduleWire = serde_json::from_str(text)?;
    let kind = kind_from_str(&wire.kind)?;
    let transitions = wire
        .transitions
        .into_iter()
        .map(|t| {
            let trigger = match t.trigger_type.as_str() {
                "error" => Trigger::Error(t.value),
                "compute" => Trigger::Compute(t.value),
                other => return Err(IoError::UnknownTriggerType(other.to_string())),
            };
            Ok(Transition {
                shape: t.shape,
                trigger,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(Schedule::new(kind, wire.initial, transitions)?)
}

pub fn schedule_to_json(schedule: &Schedule) -> String {
    json_to_string_fixed(&schedule_to_value(schedule))
}

/// Schedule as a JSON value, for embedding in larger CLI payloads.
pub fn schedule_to_value(schedule: &Schedule) -> serde_json::Value {
    let wire = ScheduleWire {
        kind: kind_to_str(schedule.kind()).to_string(),
        initial: schedule.initial().to_string(),
        transitions: schedule
            .transitions()
            .iter()
            .map(|t| TransitionWire {
                shape: t.shape.clone(),
                trigger_type: match t.trigger {
                    Trigger::Error(_) => "error".to_string(),
                    Trigger::Compute(_) => "compute".to_string(),
                },
                value: t.trigger.value(),
            })
            .collect(),
    };
    serde_json::to_value(&wire).expect("wire structs serialize to plain JSON")
}

// ---------------------------------------------------------------------------
// Partition JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentWire {
    e_high: f64,
    e_low: f64,
    shape: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionWire {
    segments: Vec<SegmentWire>,
}

/// Parse `{"segments": [{"e_high", "e_low", "shape"}]}`; segments must be
/// contiguous and strictly descending.
pub fn partition_from_json(text: &str) -> Result<ErrorPartition, IoError> {
    let wire: PartitionWire = serde_json::from_str(text)?;
    let segments = wire
        .segments
        .into_iter()
        .map(|s| Segment {
            e_high: s.e_high,
            e_low: s.e_low,
            shape: s.shape,
        })
        .collect();
    Ok(ErrorPartition::new(segments)?)
}

pub fn partition_to_json(partition: &ErrorPartition) -> String {
    json_to_string_fixed(&partition_to_value(partition))
}

/// Partition as a JSON value, for embedding in larger CLI payloads.
pub fn partition_to_value(partition: &ErrorPartition) -> serde_json::Value {
    let wire = PartitionWire {
        segments: partition
            .segments()
            .iter()
            .map(|s| SegmentWire {
                e_high: s.e_high,
                e_low: s.e_low,
                shape: s.shape.clone(),
            })
            .collect(),
    };
    serde_json::to_value(&wire).expect("wire structs serialize to plain JSON")
}

// ---------------------------------------------------------------------------
// Trajectory and frontier output

pub fn trajectory_to_csv(trajectory: &Trajectory) -> String {
    let mut out = String::from("compute,error,shape\n");
    for sample in trajectory.samples() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{}\n",
            sample.compute, sample.error, sample.shape
        ));
    }
    out
}

#[derive(Serialize)]
struct SampleWire<'a> {
    compute: f64,
    error: f64,
    shape: &'a str,
}

#[derive(Serialize)]
struct MarkWire<'a> {
    compute: f64,
    error: f64,
    from: &'a str,
    to: &'a str,
}

#[derive(Serialize)]
struct TrajectoryWire<'a> {
    samples: Vec<SampleWire<'a>>,
    transitions: Vec<MarkWire<'a>>,
    total_compute: f64,
    final_error: f64,
}

pub fn trajectory_to_json(trajectory: &Trajectory) -> String {
    json_to_string_fixed(&trajectory_to_value(trajectory))
}

/// Trajectory as a JSON value, for embedding in larger CLI payloads.
pub fn trajectory_to_value(trajectory: &Trajectory) -> serde_json::Value {
    let wire = TrajectoryWire {
        samples: trajectory
            .samples()
            .iter()
            .map(|s| SampleWire {
                compute: s.compute,
                error: s.error,
                shape: &s.shape,
            })
            .collect(),
        transitions: trajectory
            .transitions()
            .iter()
            .map(|m| MarkWire {
                compute: m.compute,
                error: m.error,
                from: &m.from,
                to: &m.to,
            })
            .collect(),
        total_compute: trajectory.total_compute(),
        final_error: trajectory.final_error(),
    };
    serde_json::to_value(&wire).expect("wire structs serialize to plain JSON")
}

pub fn frontier_to_csv(points: &[FrontierPoint]) -> String {
    let mut out = String::from("compute,error,shape\n");
    for p in points {
        out.push_str(&format!(
            "{:.16e},{:.16e},{}\n",
            p.compute, p.error, p.shape
        ));
    }
    out
}

#[derive(Serialize)]
struct FrontierPointWire<'a> {
    compute: f64,
    error: f64,
    shape: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<&'a str>,
    scheduled_error: f64,
}

pub fn frontier_to_json(points: &[FrontierPoint]) -> String {
    json_to_string_fixed(&frontier_to_value(points))
}

/// Frontier as a JSON value, for embedding in larger CLI payloads.
pub fn frontier_to_value(points: &[FrontierPoint]) -> serde_json::Value {
    let wire: Vec<FrontierPointWire> = points
        .iter()
        .map(|p| FrontierPointWire {
            compute: p.compute,
            error: p.error,
            shape: &p.shape,
            family: p.family.as_deref(),
            scheduled_error: p.scheduled_error,
        })
        .collect();
    serde_json::to_value(&wire).expect("wire structs serialize to plain JSON")
}

// ---------------------------------------------------------------------------
// Fit report JSON

#[derive(Serialize)]
struct StartWire {
    b_start: f64,
    c_start: f64,
    d_start: f64,
    objective_value: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct FitReportWire<'a> {
    shape: &'a str,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    objective_value: f64,
    rmse: f64,
    resampled_points: usize,
    iterations: usize,
    converged: bool,
    suspicious: bool,
    starts: Vec<StartWire>,
}

pub fn fit_report_to_json(report: &FitReport) -> String {
    json_to_string_fixed(&fit_report_to_value(report))
}

/// Fit report (winning law plus every start's objective) as a JSON value.
pub fn fit_report_to_value(report: &FitReport) -> serde_json::Value {
    let wire = FitReportWire {
        shape: report.law.shape_label(),
        a: report.law.a(),
        b: report.law.b(),
        c: report.law.c(),
        d: report.law.d(),
        objective_value: report.objective_value,
        rmse: report.rmse,
        resampled_points: report.resampled_points.len(),
        iterations: report.iterations,
        converged: report.converged,
        suspicious: report.suspicious,
        starts: report
            .starts
            .iter()
            .map(|s| StartWire {
                b_start: s.b_start,
                c_start: s.c_start,
                d_start: s.d_start,
                objective_value: s.objective_value,
                iterations: s.iterations,
                converged: s.converged,
            })
            .collect(),
    };
    serde_json::to_value(&wire).expect("wire structs serialize to plain JSON")
}
