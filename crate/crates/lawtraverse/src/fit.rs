//! Fitting `E = a(C+d)^(-b) + c` to measured training runs.
//!
//! The pipeline deliberately avoids anything stochastic so that a fit is a
//! pure function of its inputs:
//!
//! 1. resample the run onto log-equidistant compute bins (geometric-mean
//!    compute, arithmetic-mean error per bin) so dense late-training logging
//!    doesn't dominate the loss;
//! 2. rescale compute by the geometric mean of the resampled computes to keep
//!    the optimizer's coordinates O(1) regardless of whether compute is
//!    measured in samples or exa-FLOPs;
//! 3. minimize a Huber loss over a fixed grid of starting points with
//!    Nelder-Mead, parameterizing `a`, `b`, `d` (and `c` when free) by their
//!    logarithms so positivity is structural;
//! 4. polish the winning start with progressively finer restarts, then map
//!    the parameters back to the original compute scale.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::law::{CostUnit, LawError, PowerLaw};

mod simplex;
use simplex::{nelder_mead, SimplexResult};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("run series must contain at least one measurement")]
    Empty,
    #[error("invalid measurement (compute={compute}, error={error}) at index {index}: {reason}")]
    InvalidPoint {
        index: usize,
        compute: f64,
        error: f64,
        reason: &'static str,
    },
    #[error("need at least {need} resampled points to fit four parameters, got {got}")]
    InsufficientData { got: usize, need: usize },
    #[error("no optimizer start produced a finite objective")]
    AllStartsFailed,
    #[error(transparent)]
    Law(#[from] LawError),
}

/// Measurements from one training run: (compute, error) pairs for a single
/// model shape. Stored sorted by compute.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    shape_label: String,
    cost_unit: CostUnit,
    points: Vec<(f64, f64)>,
    metadata: BTreeMap<String, String>,
}

impl RunSeries {
    pub fn new(
        shape_label: impl Into<String>,
        cost_unit: CostUnit,
        points: Vec<(f64, f64)>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self, FitError> {
        if points.is_empty() {
            return Err(FitError::Empty);
        }
        for (index, &(compute, error)) in points.iter().enumerate() {
            if !compute.is_finite() || compute <= 0.0 {
                return Err(FitError::InvalidPoint {
                    index,
                    compute,
                    error,
                    reason: "compute must be finite and positive",
                });
            }
            if !error.is_finite() || error <= 0.0 {
                return Err(FitError::InvalidPoint {
                    index,
                    compute,
                    error,
                    reason: "error must be finite and positive",
                });
            }
        }
        let mut points = points;
        points.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite computes"));
        Ok(Self {
            shape_label: shape_label.into(),
            cost_unit,
            points,
            metadata,
        })
    }

    pub fn shape_label(&self) -> &str {
        &self.shape_label
    }

    pub fn cost_unit(&self) -> CostUnit {
        self.cost_unit
    }

    /// Points sorted by compute.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }
}

/// Space in which residuals are measured before the Huber loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualSpace {
    Linear,
    Log,
}

/// Knobs for [`fit`]. [`FitConfig::default`] reproduces the reference
/// protocol; every field is overridable for experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Quadratic-to-linear crossover of the Huber loss.
    pub huber_delta: f64,
    /// Number of log-equidistant compute bins for resampling.
    pub resample_bins: usize,
    pub residual_space: ResidualSpace,
    /// Per-start Nelder-Mead iteration cap.
    pub max_iterations: usize,
    /// Simplex function-value spread below which a start counts as converged.
    pub tolerance: f64,
    /// Initial guesses for the decay exponent `b`.
    pub b_starts: Vec<f64>,
    /// Initial guesses for the asymptote `c`, as fractions of the smallest
    /// resampled error. A fraction of exactly zero pins `c = 0` for that
    /// start instead of optimizing it.
    pub c_start_fractions: Vec<f64>,
    /// Initial guesses for the offset `d`, in rescaled compute units.
    pub d_starts: Vec<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            huber_delta: 1e-3,
            resample_bins: 64,
            residual_space: ResidualSpace::Linear,
            max_iterations: 2000,
            tolerance: 1e-12,
            b_starts: vec![0.2, 0.5, 1.0, 1.5],
            c_start_fractions: vec![0.0, 0.5, 0.9],
            d_starts: vec![0.1, 1.0, 10.0],
        }
    }
}

/// Outcome of one optimizer start, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartResult {
    pub b_start: f64,
    pub c_start: f64,
    pub d_start: f64,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A fitted law plus everything needed to judge whether to trust it.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub law: PowerLaw,
    /// Huber objective of the winning start, after polish.
    pub objective_value: f64,
    /// Root-mean-square residual over the resampled points, in the
    /// configured residual space.
    pub rmse: f64,
    /// The log-equidistant resampling the fit actually saw.
    pub resampled_points: Vec<(f64, f64)>,
    pub starts: Vec<StartResult>,
    /// Total Nelder-Mead iterations spent on the winner (including polish).
    pub iterations: usize,
    pub converged: bool,
    /// True when the winning parameters sit at implausible extremes (`b` or
    /// rescaled `d` far outside usual ranges), which usually means the data
    /// does not constrain the law.
    pub suspicious: bool,
}

/// Collapse a run onto at most `bins` log-equidistant compute bins.
///
/// Each occupied bin contributes one point: the geometric mean of its
/// computes and the arithmetic mean of its errors. A run whose computes are
/// all identical collapses to a single point. Output is sorted by compute.
pub fn resample_log_equidistant(points: &[(f64, f64)], bins: usize) -> Vec<(f64, f64)> {
    assert!(bins >= 1, "need at least one bin");
    if points.is_empty() {
        return Vec::new();
    }
    let ln_min = points
        .iter()
        .map(|p| p.0.ln())
        .fold(f64::INFINITY, f64::min);
    let ln_max = points
        .iter()
        .map(|p| p.0.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let range = ln_max - ln_min;

    // (sum of ln compute, sum of error, count) per bin
    let mut acc: Vec<(f64, f64, usize)> = vec![(0.0, 0.0, 0); bins];
    for &(compute, error) in points {
        let idx = if range > 0.0 {
            (((compute.ln() - ln_min) / range * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        acc[idx].0 += compute.ln();
        acc[idx].1 += error;
        acc[idx].2 += 1;
    }
    acc.iter()
        .filter(|(_, _, n)| *n > 0)
        .map(|&(ln_sum, err_sum, n)| ((ln_sum / n as f64).exp(), err_sum / n as f64))
        .collect()
}

/// Huber loss: quadratic within `delta` of zero, linear outside.
pub fn huber(residual: f64, delta: f64) -> f64 {
    let r = residual.abs();
    if r <= delta {
        0.5 * r * r
    } else {
        delta * (r - 0.5 * delta)
    }
}

/// Mean Huber loss of the law `(a, b, c, d)` over `points`. Returns infinity
/// when a log-space residual is requested and the prediction is nonpositive,
/// so the optimizer simply avoids that region.
pub fn objective(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    points: &[(f64, f64)],
    space: ResidualSpace,
    delta: f64,
) -> f64 {
    let mut total = 0.0;
    for &(compute, error) in points {
        let predicted = a * (compute + d).powf(-b) + c;
        if !predicted.is_finite() {
            return f64::INFINITY;
        }
        let residual = match space {
            ResidualSpace::Linear => predicted - error,
            ResidualSpace::Log => {
                if predicted <= 0.0 {
                    return f64::INFINITY;
                }
                predicted.ln() - error.ln()
            }
        };
        total += huber(residual, delta);
    }
    total / points.len() as f64
}

/// Decoded optimizer coordinates in the rescaled compute frame.
struct Decoded {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

fn decode(theta: &[f64], pinned_c: bool) -> Decoded {
    if pinned_c {
        Decoded {
            a: theta[0].exp(),
            b: theta[1].exp(),
            c: 0.0,
            d: theta[2].exp(),
        }
    } else {
        Decoded {
            a: theta[0].exp(),
            b: theta[1].exp(),
            c: theta[2].exp(),
            d: theta[3].exp(),
        }
    }
}

const MIN_RESAMPLED_POINTS: usize = 6;
const INITIAL_SIMPLEX_STEP: f64 = 0.25;
const POLISH_ROUNDS: usize = 8;

/// Fit a saturating power law to `series` under `config`.
///
/// Deterministic: the same series and config always produce the same report,
/// bit for bit. Ties between starts with equal objective go to the smaller
/// fitted `b`, then to grid order.
pub fn fit(series: &RunSeries, config: &FitConfig) -> Result<FitReport, FitError> {
    let resampled = resample_log_equidistant(series.points(), config.resample_bins);
    if resampled.len() < MIN_RESAMPLED_POINTS {
        return Err(FitError::InsufficientData {
            got: resampled.len(),
            need: MIN_RESAMPLED_POINTS,
        });
    }

    // rescale compute by the geometric mean so optimizer coordinates are O(1)
    let scale = (resampled.iter().map(|p| p.0.ln()).sum::<f64>() / resampled.len() as f64).exp();
    let scaled: Vec<(f64, f64)> = resampled.iter().map(|&(c, e)| (c / scale, e)).collect();

    let min_error = scaled.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let (first_compute, first_error) = scaled[0];

    struct Candidate {
        start: StartResult,
        theta: Vec<f64>,
        pinned_c: bool,
        value: f64,
        b: f64,
        iterations: usize,
        converged: bool,
    }

    let mut candidates: Vec<Candidate> = Vec::new();
    for &b0 in &config.b_starts {
        for &c_frac in &config.c_start_fractions {
            let c0 = c_frac * min_error;
            let pinned_c = c0 == 0.0;
            for &d0 in &config.d_starts {
                // choose a0 so the model passes through the first resampled
                // point at the start: a0 = (E1 - c0) (C1 + d0)^b0
                let a0 = (first_error - c0) * (first_compute + d0).powf(b0);
                if !(a0 > 0.0 && a0.is_finite()) {
                    continue;
                }
                let theta0 = if pinned_c {
                    vec![a0.ln(), b0.ln(), d0.ln()]
                } else {
                    vec![a0.ln(), b0.ln(), c0.ln(), d0.ln()]
                };
                let f = |theta: &[f64]| {
                    let p = decode(theta, pinned_c);
                    objective(
                        p.a,
                        p.b,
                        p.c,
                        p.d,
                        &scaled,
                        config.residual_space,
                        config.huber_delta,
                    )
                };
                let r = nelder_mead(
                    f,
                    &theta0,
                    INITIAL_SIMPLEX_STEP,
                    config.tolerance,
                    config.max_iterations,
                );
                if !r.value.is_finite() {
                    continue;
                }
                let b_fitted = decode(&r.point, pinned_c).b;
                candidates.push(Candidate {
                    start: StartResult {
                        b_start: b0,
                        c_start: c0,
                        d_start: d0,
                        objective_value: r.value,
                        iterations: r.iterations,
                        converged: r.converged,
                    },
                    theta: r.point,
                    pinned_c,
                    value: r.value,
                    b: b_fitted,
                    iterations: r.iterations,
                    converged: r.converged,
                });
            }
        }
    }
    if candidates.is_empty() {
        return Err(FitError::AllStartsFailed);
    }

    // winner: smallest objective, ties to smaller fitted b, then grid order
    let mut winner_idx = 0;
    for i in 1..candidates.len() {
        let (w, c) = (&candidates[winner_idx], &candidates[i]);
        if c.value < w.value || (c.value == w.value && c.b < w.b) {
            winner_idx = i;
        }
    }

    let pinned_c = candidates[winner_idx].pinned_c;
    let mut theta = candidates[winner_idx].theta.clone();
    let mut value = candidates[winner_idx].value;
    let mut iterations = candidates[winner_idx].iterations;
    let mut converged = candidates[winner_idx].converged;

    // polish: restart from the winner with progressively finer simplexes so
    // the final parameters do not depend on which coarse basin step the
    // original start happened to take
    let f = |theta: &[f64]| {
        let p = decode(theta, pinned_c);
        objective(
            p.a,
            p.b,
            p.c,
            p.d,
            &scaled,
            config.residual_space,
            config.huber_delta,
        )
    };
    let mut step = INITIAL_SIMPLEX_STEP;
    for _ in 0..POLISH_ROUNDS {
        step *= 0.1;
        let r: SimplexResult =
            nelder_mead(f, &theta, step, config.tolerance, config.max_iterations);
        iterations += r.iterations;
        let improvement = value - r.value;
        if r.value < value {
            theta = r.point;
            value = r.value;
            converged = r.converged;
        }
        if improvement <= (1e-12 * value.abs()).max(1e-18) {
            break;
        }
    }

    let p = decode(&theta, pinned_c);
    // undo the compute rescaling: C' = C/s means a = a' s^b and d = d' s
    let law = PowerLaw::new(
        p.a * scale.powf(p.b),
        p.b,
        p.c,
        p.d * scale,
        series.shape_label(),
        series.cost_unit(),
    )?;

    let mut sq_sum = 0.0;
    for &(compute, error) in &scaled {
        let predicted = p.a * (compute + p.d).powf(-p.b) + p.c;
        let residual = match config.residual_space {
            ResidualSpace::Linear => predicted - error,
            ResidualSpace::Log => predicted.ln() - error.ln(),
        };
        sq_sum += residual * residual;
    }
    let rmse = (sq_sum / scaled.len() as f64).sqrt();

    let suspicious = !(0.01..=20.0).contains(&p.b) || !(1e-6..=1e6).contains(&p.d);

    Ok(FitReport {
        law,
        objective_value: value,
        rmse,
        resampled_points: resampled,
        starts: candidates.into_iter().map(|c| c.start).collect(),
        iterations,
        converged,
        suspicious,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from_law(law: &PowerLaw, computes: &[f64]) -> RunSeries {
        let points = computes
            .iter()
            .map(|&c| (c, law.evaluate(c).unwrap()))
            .collect();
        RunSeries::new(law.shape_label(), law.cost_unit(), points, BTreeMap::new()).unwrap()
    }

    fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn run_series_validates_and_sorts() {
        let s = RunSeries::new(
            "V",
            CostUnit::Flops,
            vec![(10.0, 0.5), (1.0, 0.9), (5.0, 0.7)],
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(s.points(), &[(1.0, 0.9), (5.0, 0.7), (10.0, 0.5)]);

        assert!(matches!(
            RunSeries::new("V", CostUnit::Flops, vec![], BTreeMap::new()),
            Err(FitError::Empty)
        ));
        assert!(matches!(
            RunSeries::new("V", CostUnit::Flops, vec![(0.0, 0.5)], BTreeMap::new()),
            Err(FitError::InvalidPoint { index: 0, .. })
        ));
        assert!(matches!(
            RunSeries::new(
                "V",
                CostUnit::Flops,
                vec![(1.0, 0.5), (2.0, f64::NAN)],
                BTreeMap::new()
            ),
            Err(FitError::InvalidPoint { index: 1, .. })
        ));
    }

    #[test]
    fn resample_merges_within_bins() {
        let pts = vec![(1.0, 0.8), (1.1, 0.9), (100.0, 0.3)];
        let out = resample_log_equidistant(&pts, 2);
        assert_eq!(out.len(), 2);
        // first two points share the low bin: geometric-mean compute sqrt(1.1)
        assert!((out[0].0 - 1.1f64.sqrt()).abs() < 1e-12, "got {}", out[0].0);
        assert!((out[0].1 - 0.85).abs() < 1e-12);
        assert!((out[1].0 - 100.0).abs() / 100.0 < 1e-12);
        assert_eq!(out[1].1, 0.3);
    }

    #[test]
    fn resample_handles_degenerate_range() {
        let out = resample_log_equidistant(&[(5.0, 0.4), (5.0, 0.6)], 16);
        assert_eq!(out.len(), 1);
        assert!((out[0].0 - 5.0).abs() < 1e-12);
        assert!((out[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resample_keeps_isolated_points() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| (10f64.powi(i), 1.0 / (i + 1) as f64))
            .collect();
        let out = resample_log_equidistant(&pts, 1000);
        assert_eq!(out.len(), 10);
        for (orig, res) in pts.iter().zip(&out) {
            assert!((orig.0 - res.0).abs() / orig.0 < 1e-12);
            assert_eq!(orig.1, res.1);
        }
    }

    #[test]
    fn huber_crossover() {
        // below delta: quadratic
        assert!((huber(5e-4, 1e-3) - 1.25e-7).abs() < 1e-20);
        // above delta: linear with matched value and slope
        assert!((huber(2e-3, 1e-3) - 1.5e-6).abs() < 1e-20);
        assert_eq!(huber(-2e-3, 1e-3), huber(2e-3, 1e-3));
        assert_eq!(huber(0.0, 1e-3), 0.0);
    }

    #[test]
    fn objective_is_zero_on_exact_model() {
        let pts = vec![(1.0, 0.5), (3.0, 0.25)];
        let v = objective(1.0, 1.0, 0.0, 1.0, &pts, ResidualSpace::Linear, 1e-3);
        assert_eq!(v, 0.0);
        let v = objective(1.0, 1.0, 0.0, 1.0, &pts, ResidualSpace::Log, 1e-3);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn objective_rejects_nonpositive_predictions_in_log_space() {
        // prediction can't go nonpositive with c>=0, but a pathological probe
        // during optimization can overflow; emulate with huge b
        let pts = vec![(1e300, 0.5)];
        let v = objective(1.0, 1e3, 0.0, 1.0, &pts, ResidualSpace::Log, 1e-3);
        assert!(v.is_infinite());
    }

    #[test]
    fn fit_requires_enough_resampled_points() {
        let s = RunSeries::new(
            "V",
            CostUnit::Flops,
            vec![(1.0, 0.9), (2.0, 0.8), (4.0, 0.7), (8.0, 0.6), (16.0, 0.5)],
            BTreeMap::new(),
        )
        .unwrap();
        assert!(matches!(
            fit(&s, &FitConfig::default()),
            Err(FitError::InsufficientData { got: 5, need: 6 })
        ));
    }

    #[test]
    fn fit_recovers_noiseless_law() {
        let truth = PowerLaw::new(0.8, 1.0, 0.1, 1.0, "V", CostUnit::Flops).unwrap();
        let series = series_from_law(&truth, &log_spaced(0.01, 1e4, 40));
        let report = fit(&series, &FitConfig::default()).unwrap();
        let l = &report.law;
        assert!(
            (l.a() - 0.8).abs() / 0.8 < 1e-4,
            "a={} objective={}",
            l.a(),
            report.objective_value
        );
        assert!((l.b() - 1.0).abs() < 1e-4, "b={}", l.b());
        assert!((l.c() - 0.1).abs() < 1e-4, "c={}", l.c());
        assert!((l.d() - 1.0).abs() / 1.0 < 1e-3, "d={}", l.d());
        assert!(report.objective_value < 1e-12);
        assert!(report.rmse < 1e-5);
        assert!(!report.suspicious);
        assert_eq!(report.starts.len(), 36);
    }

    #[test]
    fn fit_recovers_zero_asymptote_law() {
        let truth = PowerLaw::new(2.0, 0.5, 0.0, 10.0, "V", CostUnit::Samples).unwrap();
        let series = series_from_law(&truth, &log_spaced(1.0, 1e6, 50));
        let report = fit(&series, &FitConfig::default()).unwrap();
        let l = &report.law;
        assert!((l.a() - 2.0).abs() / 2.0 < 1e-3, "a={}", l.a());
        assert!((l.b() - 0.5).abs() < 1e-3, "b={}", l.b());
        assert!(l.c() < 1e-3, "c={}", l.c());
        assert!((l.d() - 10.0).abs() / 10.0 < 1e-2, "d={}", l.d());
        assert_eq!(l.cost_unit(), CostUnit::Samples);
    }

    #[test]
    fn fit_is_deterministic() {
        let truth = PowerLaw::new(0.8, 1.0, 0.1, 1.0, "V", CostUnit::Flops).unwrap();
        let series = series_from_law(&truth, &log_spaced(0.01, 1e4, 40));
        let r1 = fit(&series, &FitConfig::default()).unwrap();
        let r2 = fit(&series, &FitConfig::default()).unwrap();
        assert_eq!(r1.law.a().to_bits(), r2.law.a().to_bits());
        assert_eq!(r1.law.b().to_bits(), r2.law.b().to_bits());
        assert_eq!(r1.law.c().to_bits(), r2.law.c().to_bits());
        assert_eq!(r1.law.d().to_bits(), r2.law.d().to_bits());
        assert_eq!(r1.objective_value.to_bits(), r2.objective_value.to_bits());
    }

    #[test]
    fn fit_shape_invariants_under_compute_rescaling() {
        // measuring compute in different units must not change the exponent
        // or the asymptote, and must scale d linearly
        let truth = PowerLaw::new(0.8, 1.0, 0.1, 1.0, "V", CostUnit::Flops).unwrap();
        let base = series_from_law(&truth, &log_spaced(0.01, 1e4, 40));
        let k = 1e6;
        let scaled_points: Vec<(f64, f64)> =
            base.points().iter().map(|&(c, e)| (c * k, e)).collect();
        let scaled = RunSeries::new("V", CostUnit::Flops, scaled_points, BTreeMap::new()).unwrap();

        let r1 = fit(&base, &FitConfig::default()).unwrap();
        let r2 = fit(&scaled, &FitConfig::default()).unwrap();
        assert!(
            ((r1.law.b() - r2.law.b()) / r1.law.b()).abs() < 1e-6,
            "b: {} vs {}",
            r1.law.b(),
            r2.law.b()
        );
        assert!(
            (r1.law.c() - r2.law.c()).abs() / r1.law.c().max(1e-12) < 1e-6,
            "c: {} vs {}",
            r1.law.c(),
            r2.law.c()
        );
        assert!(((r2.law.d() / r1.law.d()) - k).abs() / k < 1e-5);
    }

    #[test]
    fn fit_log_residual_space() {
        let truth = PowerLaw::new(1.5, 0.7, 0.05, 2.0, "V", CostUnit::Tokens).unwrap();
        let series = series_from_law(&truth, &log_spaced(0.1, 1e5, 48));
        let config = FitConfig {
            residual_space: ResidualSpace::Log,
            ..FitConfig::default()
        };
        let report = fit(&series, &config).unwrap();
        assert!((report.law.b() - 0.7).abs() < 1e-3, "b={}", report.law.b());
        assert!((report.law.c() - 0.05).abs() < 1e-3, "c={}", report.law.c());
    }
}
