//! The six subcommands. Each returns the JSON payload for standard output
//! or a [`CliError`] carrying the exit-code class.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use lawtraverse::fit::{fit, FitConfig, ResidualSpace, RunSeries};
use lawtraverse::flops::{
    carbon, distill_step_flops, train_step_flops, FlopsError, HardwareRun, ShapeSpec,
    DEFAULT_CARBON_INTENSITY, DEFAULT_PUE,
};
use lawtraverse::io::{
    family_from_json, family_to_json, family_to_value, fit_report_to_value, frontier_to_csv,
    frontier_to_value, json_to_string_fixed, partition_to_value, run_series_from_csv,
    run_series_from_json, schedule_from_json, schedule_to_value, trajectory_to_csv,
    trajectory_to_value,
};
use lawtraverse::law::{CostUnit, LawFamily, PowerLaw};
use lawtraverse::trajectory::{
    frontier, simulate, to_step_schedule, FrontierPoint, SimEnd, Trajectory, TrajectoryError,
};
use lawtraverse::traverse::{
    baseline_schedule, greedy_schedule, partition, BaselineKind, DEFAULT_GRID_POINTS,
    DEFAULT_MIN_FRACTION,
};

use crate::config::Defaults;
use crate::svg::LogLogPlot;
use crate::{CarbonArgs, CliError, FitArgs, FlopsArgs, FrontierArgs, ScheduleArgs, SimulateArgs};

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|err| CliError::Usage(format!("{}: {err}", path.display())))
}

fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|err| CliError::Usage(format!("{}: {err}", path.display())))
}

fn load_family(path: &Path) -> Result<LawFamily, CliError> {
    family_from_json(&read_input(path)?)
        .map_err(|err| CliError::Usage(format!("{}: {err}", path.display())))
}

// ---------------------------------------------------------------------------
// fit

fn parse_space(space: Option<&str>) -> Result<ResidualSpace, CliError> {
    match space {
        None | Some("linear") => Ok(ResidualSpace::Linear),
        Some("log") => Ok(ResidualSpace::Log),
        Some(other) => Err(CliError::Usage(format!(
            "--space must be 'linear' or 'log', got '{other}'"
        ))),
    }
}

/// A run file is JSON when named .json, or when extension-less but starting
/// with an object brace; everything else is treated as `compute,error` CSV
/// labelled by the file stem.
fn parse_series(path: &Path, text: &str) -> Result<RunSeries, CliError> {
    let extension = path.extension().and_then(|e| e.to_str());
    let is_json = matches!(extension, Some("json"))
        || (extension.is_none() && text.trim_start().starts_with('{'));
    let wrap =
        |err: lawtraverse::io::IoError| CliError::Usage(format!("{}: {err}", path.display()));
    if is_json {
        run_series_from_json(text).map_err(wrap)
    } else {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: cannot derive a shape label from the file name",
                    path.display()
                ))
            })?;
        run_series_from_csv(text, stem, CostUnit::Flops).map_err(wrap)
    }
}

pub fn cmd_fit(args: &FitArgs, defaults: &Defaults) -> Result<String, CliError> {
    let mut config = FitConfig::default();
    config.huber_delta = args.delta.or(defaults.delta).unwrap_or(config.huber_delta);
    config.resample_bins = args.bins.or(defaults.bins).unwrap_or(config.resample_bins);
    config.residual_space = parse_space(args.space.as_deref().or(defaults.space.as_deref()))?;
    let shape_parameter = args
        .shape_parameter
        .clone()
        .or_else(|| defaults.shape_parameter.clone())
        .unwrap_or_else(|| "shape".to_string());

    let mut series_list: Vec<RunSeries> = Vec::with_capacity(args.files.len());
    let mut sources: BTreeMap<String, &PathBuf> = BTreeMap::new();
    for path in &args.files {
        let text = read_input(path)?;
        let series = parse_series(path, &text)?;
        let label = series.shape_label().to_string();
        if let Some(first) = sources.get(&label) {
            return Err(CliError::Usage(format!(
                "duplicate shape label '{label}': {} and {}",
                first.display(),
                path.display()
            )));
        }
        sources.insert(label, path);
        series_list.push(series);
    }

    let mut laws: Vec<PowerLaw> = Vec::with_capacity(series_list.len());
    let mut reports: Vec<Value> = Vec::with_capacity(series_list.len());
    for series in &series_list {
        let report = fit(series, &config).map_err(|err| {
            CliError::Domain(format!("fitting '{}': {err}", series.shape_label()))
        })?;
        eprintln!(
            "lawtraverse: fitted '{}': a={:.6e} b={:.6} c={:.6} d={:.6e} rmse={:.3e}{}",
            series.shape_label(),
            report.law.a(),
            report.law.b(),
            report.law.c(),
            report.law.d(),
            report.rmse,
            if report.suspicious {
                " (suspicious: inspect the per-start objectives)"
            } else {
                ""
            }
        );
        reports.push(fit_report_to_value(&report));
        laws.push(report.law);
    }
    let family = LawFamily::new(shape_parameter, laws, None)
        .map_err(|err| CliError::Domain(err.to_string()))?;
    if let Some(out) = &args.out {
        write_output(out, &(family_to_json(&family) + "\n"))?;
        eprintln!("lawtraverse: wrote family to {}", out.display());
    }
    Ok(json_to_string_fixed(&json!({
        "family": family_to_value(&family),
        "reports": reports,
    })))
}

// ---------------------------------------------------------------------------
// schedule

fn parse_step_costs(text: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut costs = BTreeMap::new();
    for entry in text.split(',') {
        let Some((label, value)) = entry.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--steps-with entries look like 'label=flops', got '{entry}'"
            )));
        };
        let flops: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("--steps-with: '{value}' is not a number")))?;
        if costs.insert(label.to_string(), flops).is_some() {
            return Err(CliError::Usage(format!(
                "--steps-with names shape '{label}' twice"
            )));
        }
    }
    Ok(costs)
}

fn step_schedule_error(err: TrajectoryError) -> CliError {
    match err {
        TrajectoryError::MissingStepCost(_) | TrajectoryError::BadStepCost(_) => {
            CliError::Usage(err.to_string())
        }
        other => CliError::Domain(other.to_string()),
    }
}

pub fn cmd_schedule(args: &ScheduleArgs, defaults: &Defaults) -> Result<String, CliError> {
    let family = load_family(&args.family)?;
    let e_start = args.e_start.unwrap_or_else(|| family.max_start_error());
    let e_end = args.e_end.unwrap_or_else(|| {
        let bottom = family.min_asymptote();
        bottom + 1e-6 * (e_start - bottom)
    });
    let grid = args.grid.or(defaults.grid).unwrap_or(DEFAULT_GRID_POINTS);
    let min_fraction = args
        .min_fraction
        .or(defaults.min_fraction)
        .unwrap_or(DEFAULT_MIN_FRACTION);

    let mut payload = serde_json::Map::new();
    let schedule = match args.baseline.as_deref() {
        Some(kind) => {
            let kind = match kind {
                "linear" => BaselineKind::Linear,
                "log" => BaselineKind::Logarithmic,
                other => {
                    return Err(CliError::Usage(format!(
                        "--baseline must be 'linear' or 'log', got '{other}'"
                    )))
                }
            };
            let budget = args.budget.ok_or_else(|| {
                CliError::Usage("--budget is required with --baseline".to_string())
            })?;
            let shapes: Vec<String> = match family.shape_order() {
                Some(order) => order.to_vec(),
                None => family
                    .laws()
                    .iter()
                    .map(|l| l.shape_label().to_string())
                    .collect(),
            };
            baseline_schedule(kind, &shapes, budget, min_fraction)
                .map_err(|err| CliError::Domain(err.to_string()))?
        }
        None => {
            let p = partition(&family, (e_start, e_end), grid, None)
                .map_err(|err| CliError::Domain(err.to_string()))?;
            payload.insert("partition".to_string(), partition_to_value(&p));
            greedy_schedule(&p)
        }
    };
    payload.insert("schedule".to_string(), schedule_to_value(&schedule));

    if let Some(map_text) = &args.steps_with {
        let costs = parse_step_costs(map_text)?;
        let steps =
            to_step_schedule(&schedule, &family, &costs, e_start).map_err(step_schedule_error)?;
        let steps: Vec<Value> = steps
            .iter()
            .map(|(shape, at_step)| json!({"shape": shape, "at_step": at_step}))
            .collect();
        payload.insert("steps".to_string(), Value::Array(steps));
    }
    Ok(json_to_string_fixed(&Value::Object(payload)))
}

// ---------------------------------------------------------------------------
// simulate

fn trajectory_svg(trajectory: &Trajectory) -> String {
    let mut plot = LogLogPlot::new("Composed run", "compute", "error");
    let mut leg: Vec<(f64, f64)> = Vec::new();
    let mut current: Option<&str> = None;
    for sample in trajectory.samples() {
        if current != Some(sample.shape.as_str()) {
            if let Some(shape) = current {
                if !leg.is_empty() {
                    plot.add_series(shape, std::mem::take(&mut leg));
                }
            }
            current = Some(sample.shape.as_str());
        }
        leg.push((sample.compute, sample.error));
    }
    if let Some(shape) = current {
        if !leg.is_empty() {
            plot.add_series(shape, leg);
        }
    }
    for mark in trajectory.transitions() {
        plot.add_marker(mark.compute, mark.error);
    }
    plot.render()
}

pub fn cmd_simulate(args: &SimulateArgs, defaults: &Defaults) -> Result<String, CliError> {
    let family = load_family(&args.family)?;
    let schedule = schedule_from_json(&read_input(&args.schedule)?)
        .map_err(|err| CliError::Usage(format!("{}: {err}", args.schedule.display())))?;
    let end = match (args.target_error, args.total_compute) {
        (Some(error), None) => SimEnd::TargetError(error),
        (None, Some(compute)) => SimEnd::TotalCompute(compute),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --target-error or --total-compute is required".to_string(),
            ))
        }
    };
    // from-scratch start on the schedule's first shape, unless overridden;
    // an unknown initial shape falls through to simulate's own diagnostics
    let e_start = args.e_start.unwrap_or_else(|| {
        family
            .get(schedule.initial())
            .map(|law| law.start_error())
            .unwrap_or_else(|| family.max_start_error())
    });
    let samples = args.samples.or(defaults.samples).unwrap_or(257);
    let trajectory = simulate(&family, &schedule, e_start, samples, end)
        .map_err(|err| CliError::Domain(err.to_string()))?;

    let final_error = trajectory.final_error();
    let static_best = family
        .laws()
        .iter()
        .filter(|law| law.is_reachable(final_error))
        .map(|law| law.inverse(final_error).expect("reachable error inverts"))
        .fold(f64::INFINITY, f64::min);
    let savings_vs_static = if !static_best.is_finite() {
        Value::Null
    } else if trajectory.total_compute() == 0.0 {
        json!(0.0)
    } else {
        json!(1.0 - trajectory.total_compute() / static_best)
    };
    let transitions: Vec<Value> = trajectory
        .transitions()
        .iter()
        .map(|mark| {
            json!({
                "from": mark.from,
                "to": mark.to,
                "compute": mark.compute,
                "error": mark.error,
            })
        })
        .collect();

    if let Some(path) = &args.csv {
        write_output(path, &trajectory_to_csv(&trajectory))?;
        eprintln!("lawtraverse: wrote trajectory CSV to {}", path.display());
    }
    if let Some(path) = &args.svg {
        write_output(path, &trajectory_svg(&trajectory))?;
        eprintln!("lawtraverse: wrote plot to {}", path.display());
    }
    Ok(json_to_string_fixed(&json!({
        "summary": {
            "e_start": e_start,
            "final_error": final_error,
            "total_compute": trajectory.total_compute(),
            "transitions": transitions,
            "savings_vs_static": savings_vs_static,
        },
        "trajectory": trajectory_to_value(&trajectory),
    })))
}

// ---------------------------------------------------------------------------
// frontier

/// Compute at which a law has closed all but 2% of its error window.
fn saturation_compute(law: &PowerLaw) -> f64 {
    let error = law.asymptote() + 0.02 * (law.start_error() - law.asymptote());
    law.inverse(error).expect("strictly inside the window")
}

fn frontier_svg(points: &[FrontierPoint]) -> String {
    let mut plot = LogLogPlot::new("Compute-optimal frontier", "compute", "error");
    plot.add_series(
        "static best",
        points.iter().map(|p| (p.compute, p.error)).collect(),
    );
    plot.add_series(
        "scheduled",
        points
            .iter()
            .map(|p| (p.compute, p.scheduled_error))
            .collect(),
    );
    plot.render()
}

pub fn cmd_frontier(args: &FrontierArgs, defaults: &Defaults) -> Result<String, CliError> {
    let mut families = Vec::with_capacity(args.families.len());
    for path in &args.families {
        families.push(load_family(path)?);
    }
    let points = args.points.or(defaults.points).unwrap_or(33);
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".to_string()));
    }
    let grid_max = args.grid_max.unwrap_or_else(|| {
        families
            .iter()
            .flat_map(|f| f.laws())
            .map(saturation_compute)
            .fold(1.0_f64, f64::max)
    });
    let grid_min = args.grid_min.unwrap_or(grid_max * 1e-4);
    if !(grid_min.is_finite() && grid_max.is_finite() && 0.0 < grid_min && grid_min < grid_max) {
        return Err(CliError::Usage(format!(
            "need 0 < --grid-min < --grid-max, got {grid_min} and {grid_max}"
        )));
    }
    let (ln_lo, ln_hi) = (grid_min.ln(), grid_max.ln());
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            if i == 0 {
                grid_min
            } else if i == points - 1 {
                grid_max
            } else {
                (ln_lo + (ln_hi - ln_lo) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect();
    let frontier_points =
        frontier(&families, &grid).map_err(|err| CliError::Domain(err.to_string()))?;

    if let Some(path) = &args.csv {
        write_output(path, &frontier_to_csv(&frontier_points))?;
        eprintln!("lawtraverse: wrote frontier CSV to {}", path.display());
    }
    if let Some(path) = &args.svg {
        write_output(path, &frontier_svg(&frontier_points))?;
        eprintln!("lawtraverse: wrote plot to {}", path.display());
    }
    Ok(json_to_string_fixed(&json!({
        "frontier": frontier_to_value(&frontier_points),
    })))
}

// ---------------------------------------------------------------------------
// flops and carbon

pub fn cmd_flops(args: &FlopsArgs) -> Result<String, CliError> {
    let spec: ShapeSpec = args
        .shape
        .parse()
        .map_err(|err: FlopsError| CliError::Usage(err.to_string()))?;
    let forward = spec.forward_flops(args.include_embedding);
    let mut payload = serde_json::Map::new();
    payload.insert("shape".to_string(), json!(spec.to_string()));
    payload.insert("forward_flops".to_string(), json!(forward));
    if let Some(batch) = args.batch {
        let step =
            train_step_flops(forward, batch).map_err(|err| CliError::Usage(err.to_string()))?;
        payload.insert("batch".to_string(), json!(batch));
        payload.insert("train_step_flops".to_string(), json!(step));
    }
    if let Some(teacher) = &args.teacher {
        let teacher_spec: ShapeSpec = teacher
            .parse()
            .map_err(|err: FlopsError| CliError::Usage(format!("--teacher: {err}")))?;
        let teacher_forward = teacher_spec.forward_flops(args.include_embedding);
        let step = distill_step_flops(forward, teacher_forward, args.batch.unwrap_or(1))
            .map_err(|err| CliError::Usage(err.to_string()))?;
        payload.insert("teacher".to_string(), json!(teacher_spec.to_string()));
        payload.insert("teacher_forward_flops".to_string(), json!(teacher_forward));
        payload.insert("distill_step_flops".to_string(), json!(step));
    }
    Ok(json_to_string_fixed(&Value::Object(payload)))
}

pub fn cmd_carbon(args: &CarbonArgs, defaults: &Defaults) -> Result<String, CliError> {
    let pue = args.pue.or(defaults.pue).unwrap_or(DEFAULT_PUE);
    let intensity = args
        .intensity
        .or(defaults.intensity)
        .unwrap_or(DEFAULT_CARBON_INTENSITY);
    let run = HardwareRun::with_overheads(args.gpu_hours, args.watts, pue, intensity)
        .map_err(|err| CliError::Usage(err.to_string()))?;
    let estimate = carbon(&run);
    Ok(json_to_string_fixed(&json!({
        "gpu_hours": args.gpu_hours,
        "watts": args.watts,
        "pue": pue,
        "carbon_intensity": intensity,
        "megawatt_hours": estimate.megawatt_hours,
        "tonnes_co2eq": estimate.tonnes_co2eq,
    })))
}
