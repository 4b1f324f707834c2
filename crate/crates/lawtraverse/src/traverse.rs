//! Partitioning the error axis by which law buys error reduction cheapest.
//!
//! At any error level E, the law with the largest (least negative) inverse
//! slope q = dC/dE needs the least compute for the next sliver of error
//! reduction. Sweeping E downward and always following the argmax yields a
//! partition of the error axis into segments, each owned by one shape, and
//! the partition reads directly as a shape schedule: train the first shape
//! until its segment's lower boundary, switch, repeat.

use thiserror::Error;

use crate::law::{LawFamily, PowerLaw};

#[derive(Debug, Error)]
pub enum TraverseError {
    #[error("error range must be descending and finite: start={start}, end={end}")]
    BadRange { start: f64, end: f64 },
    #[error("partition grid needs at least 16 points, got {0}")]
    GridTooCoarse(usize),
    #[error("refinement tolerance must be positive, got {0}")]
    BadRefineTol(f64),
    #[error("no law in the family is reachable anywhere in ({end}, {start}]")]
    EmptyDomain { start: f64, end: f64 },
    #[error(
        "segments must be contiguous and descending: segment {index} spans ({e_high}, {e_low})"
    )]
    BadSegments {
        index: usize,
        e_high: f64,
        e_low: f64,
    },
    #[error("partition must contain at least one segment")]
    NoSegments,
    #[error("baseline schedules need at least two shapes, got {0}")]
    TooFewShapes(usize),
    #[error("total budget must be positive and finite, got {0}")]
    BadBudget(f64),
    #[error("min_fraction must be in (0, 1), got {0}")]
    BadMinFraction(f64),
    #[error("schedule triggers must share one type and be strictly ordered (descending error / ascending compute)")]
    BadTriggers,
    #[error("monotonicity check needs a family with an explicit shape_order")]
    MissingShapeOrder,
    #[error("schedule references shape '{0}' which is not in the family")]
    UnknownShape(String),
}

/// Condition that fires a shape switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trigger {
    /// Switch when the error first reaches this level (descending).
    Error(f64),
    /// Switch when cumulative compute reaches this level (ascending).
    Compute(f64),
}

impl Trigger {
    pub fn value(&self) -> f64 {
        match *self {
            Trigger::Error(v) | Trigger::Compute(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub shape: String,
    pub trigger: Trigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Greedy,
    Linear,
    Logarithmic,
    Explicit,
}

impl ScheduleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleKind::Greedy => "greedy",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Logarithmic => "logarithmic",
            ScheduleKind::Explicit => "explicit",
        }
    }
}

/// An ordered plan of shape switches: an initial shape plus transitions fired
/// by error or compute thresholds. All triggers in one schedule share a type.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    initial: String,
    transitions: Vec<Transition>,
}

impl Schedule {
    pub fn new(
        kind: ScheduleKind,
        initial: impl Into<String>,
        transitions: Vec<Transition>,
    ) -> Result<Self, TraverseError> {
        let mut prev: Option<Trigger> = None;
        for t in &transitions {
            if !t.trigger.value().is_finite() {
                return Err(TraverseError::BadTriggers);
            }
            match (prev, t.trigger) {
                (None, _) => {}
                (Some(Trigger::Error(a)), Trigger::Error(b)) if b < a => {}
                (Some(Trigger::Compute(a)), Trigger::Compute(b)) if b > a => {}
                _ => return Err(TraverseError::BadTriggers),
            }
            prev = Some(t.trigger);
        }
        Ok(Self {
            kind,
            initial: initial.into(),
            transitions,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Shapes in activation order: initial, then each transition's target.
    pub fn shapes(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.initial.as_str())
            .chain(self.transitions.iter().map(|t| t.shape.as_str()))
    }
}

/// One stretch of the error axis owned by a single shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub e_high: f64,
    pub e_low: f64,
    pub shape: String,
}

/// Contiguous, descending segments tiling the error interval
/// `[e_end, e_start]`. Within each segment the named shape maximizes the
/// inverse slope q among all reachable laws.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPartition {
    segments: Vec<Segment>,
    e_start: f64,
    e_end: f64,
}

impl ErrorPartition {
    /// Validates contiguity: each segment descends and starts exactly where
    /// the previous one ended.
    pub fn new(segments: Vec<Segment>) -> Result<Self, TraverseError> {
        if segments.is_empty() {
            return Err(TraverseError::NoSegments);
        }
        for (index, s) in segments.iter().enumerate() {
            let ok = s.e_high.is_finite()
                && s.e_low.is_finite()
                && s.e_high > s.e_low
                && (index == 0 || segments[index - 1].e_low == s.e_high);
            if !ok {
                return Err(TraverseError::BadSegments {
                    index,
                    e_high: s.e_high,
                    e_low: s.e_low,
                });
            }
        }
        let e_start = segments[0].e_high;
        let e_end = segments[segments.len() - 1].e_low;
        Ok(Self {
            segments,
            e_start,
            e_end,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Top of the partition domain (highest covered error).
    pub fn e_start(&self) -> f64 {
        self.e_start
    }

    /// Bottom of the partition domain (lowest covered error).
    pub fn e_end(&self) -> f64 {
        self.e_end
    }

    /// The segment containing `error`. Each segment owns `(e_low, e_high]`
    /// (the last also owns its `e_low`), so a boundary error belongs to the
    /// lower segment — the shape that takes over at that error.
    pub fn segment_at(&self, error: f64) -> Option<&Segment> {
        if error > self.e_start || error < self.e_end {
            return None;
        }
        self.segments
            .iter()
            .find(|s| error > s.e_low || (error == s.e_low && s.e_low == self.e_end))
    }
}

/// Shapes whose law can actually sit at `error`: those with
/// `c < error <= start_error`. The inverse slope is defined exactly on this
/// set. May be empty.
pub fn candidate_set(family: &LawFamily, error: f64) -> Vec<String> {
    family
        .laws()
        .iter()
        .filter(|l| l.is_reachable(error))
        .map(|l| l.shape_label().to_string())
        .collect()
}

/// The reachable law with maximal inverse slope at `error` (ties broken by
/// family shape order, else lexicographically).
fn winner(family: &LawFamily, error: f64) -> Option<&PowerLaw> {
    let mut best: Option<(&PowerLaw, f64)> = None;
    for law in family.laws() {
        if !law.is_reachable(error) {
            continue;
        }
        let q = law.inverse_slope_unchecked(error);
        best = match best {
            None => Some((law, q)),
            Some((bl, bq)) => {
                if q > bq
                    || (q == bq
                        && family.tie_rank(law.shape_label()) < family.tie_rank(bl.shape_label()))
                {
                    Some((law, q))
                } else {
                    Some((bl, bq))
                }
            }
        };
    }
    best.map(|(l, _)| l)
}

/// How grid errors are spaced when scanning for boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    /// Uniform in error.
    Uniform,
    /// Uniform in log(error − c_ref), where c_ref is the largest asymptote
    /// strictly below the domain. Concentrates points near the asymptote,
    /// where q varies fastest. Falls back to uniform when no such asymptote
    /// exists.
    LogOffset,
}

pub const DEFAULT_GRID_POINTS: usize = 512;

/// Scan `(e_start, e_end)` descending on a grid, find where the argmax of the
/// inverse slope changes, and refine each change point by bisection.
///
/// The partition domain is the topmost contiguous stretch of the range where
/// at least one law is reachable; errors above every start error or below a
/// gap in coverage are excluded. `refine_tol` defaults to `1e-6 * e_start`.
pub fn partition(
    family: &LawFamily,
    error_range: (f64, f64),
    grid_points: usize,
    refine_tol: Option<f64>,
) -> Result<ErrorPartition, TraverseError> {
    partition_with_spacing(
        family,
        error_range,
        grid_points,
        refine_tol,
        GridSpacing::Uniform,
    )
}

/// [`partition`] with an explicit grid spacing.
pub fn partition_with_spacing(
    family: &LawFamily,
    (e_start, e_end): (f64, f64),
    grid_points: usize,
    refine_tol: Option<f64>,
    spacing: GridSpacing,
) -> Result<ErrorPartition, TraverseError> {
    if !e_start.is_finite() || !e_end.is_finite() || e_start <= e_end {
        return Err(TraverseError::BadRange {
            start: e_start,
            end: e_end,
        });
    }
    if grid_points < 16 {
        return Err(TraverseError::GridTooCoarse(grid_points));
    }
    let tol = refine_tol.unwrap_or(1e-6 * e_start.abs());
    if tol.is_nan() || tol <= 0.0 {
        return Err(TraverseError::BadRefineTol(tol));
    }

    let (top, bot) = domain(family, e_start, e_end).ok_or(TraverseError::EmptyDomain {
        start: e_start,
        end: e_end,
    })?;

    // log-offset spacing needs an anchor asymptote strictly below the domain
    let c_ref = match spacing {
        GridSpacing::Uniform => None,
        GridSpacing::LogOffset => family
            .laws()
            .iter()
            .map(|l| l.c())
            .filter(|&c| c < bot)
            .fold(None, |acc: Option<f64>, c| {
                Some(acc.map_or(c, |a| a.max(c)))
            }),
    };

    let segments = build_segments(family, top, bot, grid_points, tol, c_ref, 0);
    ErrorPartition::new(segments)
}

/// Topmost contiguous sub-interval of `[e_end, e_start]` where some law is
/// reachable. Returns (top, bottom), or None when nothing is reachable.
fn domain(family: &LawFamily, e_start: f64, e_end: f64) -> Option<(f64, f64)> {
    // merge the per-law reachable windows (c, start_error]
    let mut windows: Vec<(f64, f64)> = family
        .laws()
        .iter()
        .map(|l| (l.c(), l.start_error()))
        .collect();
    windows.sort_by(|p, q| p.partial_cmp(q).expect("finite law parameters"));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in windows {
        match merged.last_mut() {
            // half-open windows (lo, hi] chain even when they only touch
            Some((_, mhi)) if lo <= *mhi => *mhi = mhi.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    // pick the highest merged block that intersects (e_end, e_start]
    for &(lo, hi) in merged.iter().rev() {
        let top = hi.min(e_start);
        if top <= lo || top < e_end {
            continue;
        }
        let bot = if e_end > lo {
            e_end
        } else {
            // the block is open at its asymptote; stop a hair above it
            lo + 1e-12 * (top - lo)
        };
        if top > bot {
            return Some((top, bot));
        }
    }
    None
}

fn grid_error(top: f64, bot: f64, c_ref: Option<f64>, k: usize, n: usize) -> f64 {
    let f = k as f64 / (n - 1) as f64;
    match c_ref {
        None => top - f * (top - bot),
        Some(c) => {
            let ln_top = (top - c).ln();
            let ln_bot = (bot - c).ln();
            c + (ln_top - f * (ln_top - ln_bot)).exp()
        }
    }
}

/// Bisect the winner-change point in `(lo, hi)`, where the winner at `hi` is
/// `hi_label` and the winner at `lo` is not.
fn refine_boundary(family: &LawFamily, mut hi: f64, mut lo: f64, hi_label: &str, tol: f64) -> f64 {
    debug_assert!(hi > lo);
    let mut rounds = 0;
    while hi - lo > tol && rounds < 200 {
        let mid = 0.5 * (hi + lo);
        let mid_label = winner(family, mid).map(|l| l.shape_label());
        if mid_label == Some(hi_label) {
            hi = mid;
        } else {
            lo = mid;
        }
        rounds += 1;
    }
    0.5 * (hi + lo)
}

const VERIFY_PROBES: usize = 8;
const MAX_REFINE_DEPTH: usize = 4;

fn build_segments(
    family: &LawFamily,
    top: f64,
    bot: f64,
    grid_points: usize,
    tol: f64,
    c_ref: Option<f64>,
    depth: usize,
) -> Vec<Segment> {
    let label_at = |e: f64| -> &str {
        winner(family, e)
            .expect("domain construction guarantees a reachable law")
            .shape_label()
    };

    // sample the grid plus every level where the candidate set itself
    // changes (a law's start error or asymptote): thin winner stripes often
    // start at such an event, far from any grid point on skewed ranges
    let mut levels: Vec<f64> = (1..grid_points)
        .map(|k| grid_error(top, bot, c_ref, k, grid_points))
        .collect();
    for law in family.laws() {
        for event in [law.start_error(), law.asymptote()] {
            if event > bot && event < top {
                levels.push(event);
            }
        }
    }
    levels.sort_by(|x, y| y.partial_cmp(x).expect("levels are finite"));
    levels.dedup();

    let mut raw: Vec<Segment> = Vec::new();
    let mut seg_high = top;
    let mut seg_label = label_at(top);
    let mut prev_e = top;
    for e in levels {
        let label = label_at(e);
        // one grid interval can hide several changes (e.g. a law entering at
        // its start error, winning a thin stripe, and handing off again), so
        // after each refinement resume from just below the boundary instead
        // of trusting the far grid point's winner
        let mut guard = 0;
        while seg_label != label && guard < 16 {
            guard += 1;
            let boundary = refine_boundary(family, prev_e, e, seg_label, tol);
            raw.push(Segment {
                e_high: seg_high,
                e_low: boundary,
                shape: seg_label.to_string(),
            });
            seg_high = boundary;
            let below = (boundary - 0.5 * tol).max(e);
            seg_label = if below > e { label_at(below) } else { label };
            prev_e = below;
        }
        prev_e = e;
    }
    raw.push(Segment {
        e_high: seg_high,
        e_low: bot,
        shape: seg_label.to_string(),
    });

    // verify each segment interior; a mismatch means the grid stepped over a
    // double crossing, so rebuild that stretch at effectively finer resolution
    let mut out: Vec<Segment> = Vec::new();
    for seg in raw {
        let mut clean = true;
        if depth < MAX_REFINE_DEPTH {
            let span = seg.e_high - seg.e_low;
            let mut probes: Vec<f64> = (1..=VERIFY_PROBES)
                .map(|j| seg.e_high - span * j as f64 / (VERIFY_PROBES + 1) as f64)
                .collect();
            // thin stripes hug boundaries, so also probe geometrically close
            // to both ends (skipping offsets inside the refinement fuzz)
            for k in 2..=5 {
                let offset = span * 10f64.powi(-k);
                if offset > tol {
                    probes.push(seg.e_high - offset);
                    probes.push(seg.e_low + offset);
                }
            }
            for e in probes {
                if label_at(e) != seg.shape {
                    clean = false;
                    break;
                }
            }
        }
        let pieces = if clean {
            vec![seg]
        } else {
            build_segments(
                family,
                seg.e_high,
                seg.e_low,
                grid_points,
                tol,
                c_ref,
                depth + 1,
            )
        };
        for p in pieces {
            match out.last_mut() {
                Some(last) if last.shape == p.shape => last.e_low = p.e_low,
                _ => out.push(p),
            }
        }
    }
    out
}

/// Read a partition as a schedule: start on the first segment's shape and
/// switch at each internal boundary.
pub fn greedy_schedule(partition: &ErrorPartition) -> Schedule {
    let segments = partition.segments();
    let transitions = segments[1..]
        .iter()
        .map(|s| Transition {
            shape: s.shape.clone(),
            trigger: Trigger::Error(s.e_high),
        })
        .collect();
    Schedule::new(ScheduleKind::Greedy, segments[0].shape.clone(), transitions)
        .expect("partition boundaries are strictly descending")
}

/// True iff the schedule's shape sequence is strictly monotone under the
/// family's `shape_order` (in either direction). Diagnostic only.
pub fn is_monotone(schedule: &Schedule, family: &LawFamily) -> Result<bool, TraverseError> {
    let order = family
        .shape_order()
        .ok_or(TraverseError::MissingShapeOrder)?;
    let mut positions = Vec::new();
    for shape in schedule.shapes() {
        let pos = order
            .iter()
            .position(|l| l == shape)
            .ok_or_else(|| TraverseError::UnknownShape(shape.to_string()))?;
        positions.push(pos);
    }
    let increasing = positions.windows(2).all(|w| w[0] < w[1]);
    let decreasing = positions.windows(2).all(|w| w[0] > w[1]);
    Ok(increasing || decreasing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Linear,
    Logarithmic,
}

pub const DEFAULT_MIN_FRACTION: f64 = 1e-3;

/// Non-adaptive reference schedules: split `total_budget` across `shapes`
/// either evenly or geometrically (switch points equally spaced in log
/// compute between `min_fraction * total_budget` and `total_budget`).
pub fn baseline_schedule(
    kind: BaselineKind,
    shapes: &[String],
    total_budget: f64,
    min_fraction: f64,
) -> Result<Schedule, TraverseError> {
    if shapes.len() < 2 {
        return Err(TraverseError::TooFewShapes(shapes.len()));
    }
    if !total_budget.is_finite() || total_budget <= 0.0 {
        return Err(TraverseError::BadBudget(total_budget));
    }
    if !(min_fraction > 0.0 && min_fraction < 1.0) {
        return Err(TraverseError::BadMinFraction(min_fraction));
    }
    let m = shapes.len();
    let mut transitions = Vec::with_capacity(m - 1);
    for (k, shape) in shapes.iter().enumerate().skip(1) {
        let cut = match kind {
            BaselineKind::Linear => k as f64 / m as f64 * total_budget,
            BaselineKind::Logarithmic => {
                let lo = min_fraction * total_budget;
                lo * (total_budget / lo).powf(k as f64 / m as f64)
            }
        };
        transitions.push(Transition {
            shape: shape.clone(),
            trigger: Trigger::Compute(cut),
        });
    }
    let schedule_kind = match kind {
        BaselineKind::Linear => ScheduleKind::Linear,
        BaselineKind::Logarithmic => ScheduleKind::Logarithmic,
    };
    Schedule::new(schedule_kind, shapes[0].clone(), transitions)
}
