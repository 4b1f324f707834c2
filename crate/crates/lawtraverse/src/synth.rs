//! Synthetic run generation, a brute-force greedy oracle, and fixture
//! families.
//!
//! [`generate`] samples noisy measurements from a known law so the fitter can
//! be tested against ground truth. [`greedy_micro_step_oracle`] descends the
//! error axis in tiny discrete steps, always paying the cheapest law for the
//! next step — a derivative-free reference that the analytic partition and
//! scheduled-compute results must agree with. [`preset_family`] returns
//! hand-written fixture families whose coefficients are invented but whose
//! qualitative structure matches measured behavior: cheap-but-shallow shapes
//! win early, expensive-but-deep shapes win late.
//!
//! # Randomness
//!
//! All noise comes from a ChaCha8 stream keyed with [`SynthSpec`]'s seed via
//! `seed_from_u64`, turned into standard normals by the Box–Muller transform
//! (cosine branch). Each normal draw consumes exactly two `u64` words from
//! the stream, so output is bit-identical across platforms and runs.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::fit::{FitError, RunSeries};
use crate::law::{LawError, LawFamily, PowerLaw};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("point count must be at least 2, got {0}")]
    BadCount(usize),
    #[error("compute range must satisfy 0 < min < max, got ({0}, {1})")]
    BadComputeRange(f64, f64),
    #[error("noise std must be nonnegative and finite, got {0}")]
    BadSigma(f64),
    #[error("clip bounds must satisfy 0 < lower < upper, got ({0}, {1})")]
    BadClip(f64, f64),
    #[error("error range must satisfy e_start > e_end, got ({0}, {1})")]
    BadErrorRange(f64, f64),
    #[error("micro step must be positive and finite, got {0}")]
    BadMicroStep(f64),
    #[error("unknown preset '{0}'; valid names: {names}", names = PRESET_NAMES.join(", "))]
    UnknownPreset(String),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Where the Gaussian noise is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSpace {
    /// Additive on the error value itself.
    Linear,
    /// Additive on ln(error), i.e. multiplicative — suited to loss-valued
    /// series spanning decades.
    Log,
}

/// Recipe for a synthetic measurement series: a generating law, a log-spaced
/// compute grid, and a seeded noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    law: PowerLaw,
    count: usize,
    compute_range: (f64, f64),
    sigma: f64,
    clip: (f64, f64),
    noise_space: NoiseSpace,
    seed: u64,
}

impl SynthSpec {
    /// Defaults: noise added linearly, values clipped into `[1e-9, 1.0]`
    /// (error-valued series live in (0, 1]). Override with [`with_clip`] /
    /// [`with_noise_space`] for loss-valued fixtures.
    ///
    /// [`with_clip`]: SynthSpec::with_clip
    /// [`with_noise_space`]: SynthSpec::with_noise_space
    pub fn new(
        law: PowerLaw,
        count: usize,
        compute_range: (f64, f64),
        sigma: f64,
        seed: u64,
    ) -> Result<Self, SynthError> {
        if count < 2 {
            return Err(SynthError::BadCount(count));
        }
        let (lo, hi) = compute_range;
        if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || lo >= hi {
            return Err(SynthError::BadComputeRange(lo, hi));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(SynthError::BadSigma(sigma));
        }
        Ok(Self {
            law,
            count,
            compute_range,
            sigma,
            clip: (1e-9, 1.0),
            noise_space: NoiseSpace::Linear,
            seed,
        })
    }

    pub fn with_clip(mut self, lower: f64, upper: f64) -> Result<Self, SynthError> {
        if !lower.is_finite() || lower <= 0.0 || upper.is_nan() || upper <= lower {
            return Err(SynthError::BadClip(lower, upper));
        }
        self.clip = (lower, upper);
        Ok(self)
    }

    pub fn with_noise_space(mut self, space: NoiseSpace) -> Self {
        self.noise_space = space;
        self
    }

    pub fn law(&self) -> &PowerLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `u64` → uniform in `(0, 1]`: top 53 bits, shifted up by one step so
/// `ln(u)` is always finite.
fn unit_open_closed(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `u64` → uniform in `[0, 1)`.
fn unit_closed_open(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal via Box–Muller; consumes exactly two stream words.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = unit_open_closed(rng.next_u64());
    let u2 = unit_closed_open(rng.next_u64());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Sample a [`SynthSpec`]'s law on a log-spaced compute grid and add seeded
/// noise.
///
/// With `sigma = 0` the points lie exactly on the law. Identical inputs give
/// bit-identical series on every platform; see the module notes on the PRNG.
pub fn generate(spec: &SynthSpec) -> Result<RunSeries, SynthError> {
    let (c_lo, c_hi) = spec.compute_range;
    let ln_lo = c_lo.ln();
    let ln_hi = c_hi.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let frac = i as f64 / (spec.count - 1) as f64;
        let compute = if i == 0 {
            c_lo
        } else if i + 1 == spec.count {
            c_hi
        } else {
            (ln_lo + frac * (ln_hi - ln_lo)).exp()
        };
        let clean = spec.law.eval_unchecked(compute);
        let noise = standard_normal(&mut rng) * spec.sigma;
        let noisy = match spec.noise_space {
            NoiseSpace::Linear => clean + noise,
            NoiseSpace::Log => (clean.ln() + noise).exp(),
        };
        points.push((compute, noisy.clamp(spec.clip.0, spec.clip.1)));
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("generator".to_string(), "synthetic".to_string());
    metadata.insert("seed".to_string(), spec.seed.to_string());
    metadata.insert("sigma".to_string(), format!("{}", spec.sigma));
    Ok(RunSeries::new(
        spec.law.shape_label(),
        spec.law.cost_unit(),
        points,
        metadata,
    )?)
}

/// Default micro-step: 1e-4 of the marched error range.
pub fn default_micro_step(e_start: f64, e_end: f64) -> f64 {
    1e-4 * (e_start - e_end)
}

/// A shape handoff observed by the micro-step oracle, recorded at the error
/// level where the new shape first won a step.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroTransition {
    pub error: f64,
    pub from: String,
    pub to: String,
}

/// Outcome of a micro-step descent.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroStepTrace {
    /// Shape that won the first step; `None` when no law was reachable even
    /// at the starting error.
    pub initial: Option<String>,
    pub transitions: Vec<MicroTransition>,
    pub total_compute: f64,
    /// Error level actually reached; equals the requested end on success.
    pub final_error: f64,
    /// False when the march stalled early because no law covered some error.
    pub complete: bool,
}

/// Brute-force greedy descent: march the error from `e_start` down to
/// `e_end` in steps of `delta_e`, and for each step pay the law with the
/// smallest compute increment `inverse(P, E−δ) − inverse(P, E)`.
///
/// No derivatives are involved, so this is an independent check of the
/// slope-based partition: boundaries agree within one step and total compute
/// converges to the scheduled integral as `delta_e` shrinks. A law is a
/// candidate for a step only while the step stays inside its reachable
/// window. If at some level no law is reachable the march stops and returns
/// a partial trace with `complete = false`.
pub fn greedy_micro_step_oracle(
    family: &LawFamily,
    e_start: f64,
    e_end: f64,
    delta_e: f64,
) -> Result<MicroStepTrace, SynthError> {
    if !e_start.is_finite() || !e_end.is_finite() || e_start <= e_end {
        return Err(SynthError::BadErrorRange(e_start, e_end));
    }
    if !delta_e.is_finite() || delta_e <= 0.0 {
        return Err(SynthError::BadMicroStep(delta_e));
    }

    let mut initial: Option<String> = None;
    let mut current: Option<String> = None;
    let mut transitions = Vec::new();
    let mut total = 0.0;
    let mut e = e_start;
    let mut step: u64 = 0;
    while e > e_end {
        step += 1;
        let e_next = (e_start - step as f64 * delta_e).max(e_end);
        let mut best: Option<(f64, &str)> = None;
        for law in family.laws() {
            if !law.is_reachable(e) || e_next <= law.asymptote() {
                continue;
            }
            let spent = law.inverse_unchecked(e_next) - law.inverse_clamped(e)?;
            let better = match best {
                None => true,
                Some((best_spent, best_label)) => {
                    spent < best_spent
                        || (spent == best_spent
                            && family.tie_rank(law.shape_label()) < family.tie_rank(best_label))
                }
            };
            if better {
                best = Some((spent, law.shape_label()));
            }
        }
        let Some((spent, label)) = best else {
            return Ok(MicroStepTrace {
                initial,
                transitions,
                total_compute: total,
                final_error: e,
                complete: false,
            });
        };
        total += spent.max(0.0);
        match &current {
            None => initial = Some(label.to_string()),
            Some(prev) if prev != label => transitions.push(MicroTransition {
                error: e,
                from: prev.clone(),
                to: label.to_string(),
            }),
            _ => {}
        }
        current = Some(label.to_string());
        e = e_next;
    }
    Ok(MicroStepTrace {
        initial,
        transitions,
        total_compute: total,
        final_error: e,
        complete: true,
    })
}

pub const PRESET_NAMES: [&str; 5] = ["vit_patch", "lm_context", "width", "batch", "objective"];

/// Hand-written fixture families for tests and demos.
///
/// Coefficients are invented — no measured fits are published to copy — but
/// each family is built so the qualitative story holds: shapes start from
/// nearly the same zero-compute error (the coarsest a hair above the rest,
/// so it owns the domain top outright), coarser/cheaper shapes decay fast
/// toward a high floor, finer/costlier shapes decay slowly toward a low one,
/// and the greedy schedule therefore walks the shape order monotonically.
///
/// * `"vit_patch"` — patch sizes 24→4; the patch-4 floor sits *above*
///   patch-8's, reproducing the observed non-monotonicity of asymptotes at
///   very small patches (patch 4 is never compute-optimal).
/// * `"lm_context"` — context lengths 128→2048; short contexts win at high
///   loss, long contexts at low loss. Loss-valued (not clipped to 1).
/// * `"width"` — widths 128→1024.
/// * `"batch"` — batch sizes 32→512, sample-count cost axis.
/// * `"objective"` — plain training first, distillation for the final drop.
pub fn preset_family(name: &str) -> Result<LawFamily, SynthError> {
    use crate::law::CostUnit::{Flops, Samples, Tokens};
    let (shape_parameter, unit, rows): (&str, _, &[(&str, f64, f64, f64)]) = match name {
        "vit_patch" => (
            "patch",
            Flops,
            // (label, a, b, c); start errors a + c share a common value of
            // 1.0 except the coarsest patch, deliberately a touch higher so
            // the top of the domain belongs to it outright (float sums of
            // the "equal" starts differ in the last ulp)
            &[
                ("24", 0.62, 2.20, 0.40),
                ("16", 0.70, 1.60, 0.30),
                ("12", 0.78, 1.15, 0.22),
                ("8", 0.84, 0.80, 0.16),
                ("4", 0.80, 0.75, 0.20),
            ],
        ),
        "lm_context" => (
            "context",
            Tokens,
            // loss-valued; common start 7.0, shortest context slightly above
            &[
                ("128", 2.9, 1.8, 4.2),
                ("512", 3.6, 1.1, 3.4),
                ("2048", 4.2, 0.7, 2.8),
            ],
        ),
        "width" => (
            "width",
            Flops,
            // common start 1.2, narrowest slightly above
            &[
                ("128", 0.67, 2.0, 0.55),
                ("256", 0.78, 1.4, 0.42),
                ("512", 0.87, 1.0, 0.33),
                ("1024", 0.93, 0.7, 0.27),
            ],
        ),
        "batch" => (
            "batch",
            Samples,
            // common start 1.1, smallest batch slightly above
            &[
                ("32", 0.62, 1.9, 0.50),
                ("128", 0.70, 1.2, 0.40),
                ("512", 0.76, 0.8, 0.34),
            ],
        ),
        "objective" => (
            "objective",
            Flops,
            // common start 0.9, plain training slightly above
            &[("scratch", 0.60, 1.7, 0.32), ("distill", 0.68, 0.9, 0.22)],
        ),
        other => return Err(SynthError::UnknownPreset(other.to_string())),
    };
    let laws = rows
        .iter()
        .map(|&(label, a, b, c)| PowerLaw::new(a, b, c, 1.0, label, unit))
        .collect::<Result<Vec<_>, _>>()?;
    let order = rows.iter().map(|r| r.0.to_string()).collect();
    Ok(LawFamily::new(shape_parameter, laws, Some(order))?)
}
