//! Saturating power laws `E = a(C + d)^(-b) + c` and families of them.
//!
//! A law maps invested compute to predicted error; the inverse maps a target
//! error back to the compute required. The derivative of the inverse is the
//! marginal compute cost per unit of error decrement, which is what the
//! scheduler in [`crate::traverse`] maximizes over a family.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unit of the compute axis shared by every law in a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostUnit {
    Flops,
    Tokens,
    Samples,
    Seconds,
}

impl std::fmt::Display for CostUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CostUnit::Flops => "flops",
            CostUnit::Tokens => "tokens",
            CostUnit::Samples => "samples",
            CostUnit::Seconds => "seconds",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum LawError {
    #[error("invalid law parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("compute must be nonnegative, got {0}")]
    NegativeCompute(f64),
    #[error("error {error} is unreachable for law '{shape}': at or below asymptote {asymptote}")]
    UnreachableError {
        shape: String,
        error: f64,
        asymptote: f64,
    },
    #[error("error {error} is above the start error {start} of law '{shape}' (would need negative compute)")]
    AboveStartError {
        shape: String,
        error: f64,
        start: f64,
    },
    #[error("law family must contain at least one law")]
    EmptyFamily,
    #[error("duplicate shape label '{0}' in law family")]
    DuplicateShapeLabel(String),
    #[error("law '{shape}' has cost unit {unit} but the family uses {family_unit}")]
    MixedCostUnits {
        shape: String,
        unit: CostUnit,
        family_unit: CostUnit,
    },
    #[error("shape order entry '{0}' does not match any law in the family")]
    UnknownOrderLabel(String),
    #[error("shape order must list every law exactly once ({got} entries for {expected} laws)")]
    IncompleteOrder { got: usize, expected: usize },
}

fn check_positive(name: &'static str, value: f64) -> Result<(), LawError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(LawError::InvalidParameter {
            name,
            value,
            reason: "must be a finite positive real",
        });
    }
    Ok(())
}

/// One fitted law `E = a(C + d)^(-b) + c`.
///
/// `a` scales the reducible error, `b` is the decay exponent, `c` the
/// irreducible asymptote and `d` a compute offset in the same unit as the
/// compute axis. The reachable error window is `(c, start_error]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLaw {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    shape_label: String,
    cost_unit: CostUnit,
}

impl PowerLaw {
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        shape_label: impl Into<String>,
        cost_unit: CostUnit,
    ) -> Result<Self, LawError> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        check_positive("d", d)?;
        if !c.is_finite() || c < 0.0 {
            return Err(LawError::InvalidParameter {
                name: "c",
                value: c,
                reason: "must be a finite nonnegative real",
            });
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            shape_label: shape_label.into(),
            cost_unit,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn shape_label(&self) -> &str {
        &self.shape_label
    }

    pub fn cost_unit(&self) -> CostUnit {
        self.cost_unit
    }

    /// Predicted error after `compute`; strictly decreasing, bounded below by `c`.
    pub fn evaluate(&self, compute: f64) -> Result<f64, LawError> {
        if compute.is_nan() || compute < 0.0 {
            return Err(LawError::NegativeCompute(compute));
        }
        Ok(self.eval_unchecked(compute))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, compute: f64) -> f64 {
        self.a * (compute + self.d).powf(-self.b) + self.c
    }

    /// Compute needed to reach `error`; defined on `(c, start_error]`.
    pub fn inverse(&self, error: f64) -> Result<f64, LawError> {
        self.check_reachable(error)?;
        if error > self.start_error() {
            return Err(LawError::AboveStartError {
                shape: self.shape_label.clone(),
                error,
                start: self.start_error(),
            });
        }
        Ok(self.inverse_unchecked(error))
    }

    /// Like [`inverse`](Self::inverse) but errors above the start error map to
    /// zero compute instead of failing. Errors at or below the asymptote are
    /// still rejected.
    pub fn inverse_clamped(&self, error: f64) -> Result<f64, LawError> {
        self.check_reachable(error)?;
        if error >= self.start_error() {
            return Ok(0.0);
        }
        Ok(self.inverse_unchecked(error))
    }

    #[inline]
    pub(crate) fn inverse_unchecked(&self, error: f64) -> f64 {
        (self.a / (error - self.c)).powf(1.0 / self.b) - self.d
    }

    /// Derivative of the inverse at `error`: the (negative) marginal compute
    /// cost per unit error decrement. `|slope|` grows without bound as the
    /// error approaches the asymptote.
    pub fn inverse_slope(&self, error: f64) -> Result<f64, LawError> {
        self.check_reachable(error)?;
        if error > self.start_error() {
            return Err(LawError::AboveStartError {
                shape: self.shape_label.clone(),
                error,
                start: self.start_error(),
            });
        }
        Ok(self.inverse_slope_unchecked(error))
    }

    #[inline]
    pub(crate) fn inverse_slope_unchecked(&self, error: f64) -> f64 {
        let t = error - self.c;
        -(self.a / t).powf(1.0 / self.b) / (self.b * t)
    }

    /// Predicted error at zero compute, `a d^(-b) + c`; the top of the
    /// reachable window. Identical to `evaluate(0)`.
    pub fn start_error(&self) -> f64 {
        self.eval_unchecked(0.0)
    }

    /// Irreducible error `c` approached with infinite compute.
    pub fn asymptote(&self) -> f64 {
        self.c
    }

    /// True iff `error` lies in the reachable window `(c, start_error]`.
    pub fn is_reachable(&self, error: f64) -> bool {
        error > self.c && error <= self.start_error()
    }

    fn check_reachable(&self, error: f64) -> Result<(), LawError> {
        if !error.is_finite() || error <= self.c {
            return Err(LawError::UnreachableError {
                shape: self.shape_label.clone(),
                error,
                asymptote: self.c,
            });
        }
        Ok(())
    }
}

/// A set of laws over one shape parameter (patch size, context length,
/// width, ...) sharing a cost unit.
#[derive(Debug, Clone, PartialEq)]
pub struct LawFamily {
    shape_parameter: String,
    laws: Vec<PowerLaw>,
    cost_unit: CostUnit,
    shape_order: Option<Vec<String>>,
}

impl LawFamily {
    /// `shape_order`, when given, must list every shape label exactly once;
    /// it fixes tie-breaks and the direction used by monotonicity checks.
    pub fn new(
        shape_parameter: impl Into<String>,
        laws: Vec<PowerLaw>,
        shape_order: Option<Vec<String>>,
    ) -> Result<Self, LawError> {
        let first_unit = laws.first().ok_or(LawError::EmptyFamily)?.cost_unit();
        let mut seen: Vec<&str> = Vec::with_capacity(laws.len());
        for law in &laws {
            if law.cost_unit() != first_unit {
                return Err(LawError::MixedCostUnits {
                    shape: law.shape_label().to_string(),
                    unit: law.cost_unit(),
                    family_unit: first_unit,
                });
            }
            if seen.contains(&law.shape_label()) {
                return Err(LawError::DuplicateShapeLabel(law.shape_label().to_string()));
            }
            seen.push(law.shape_label());
        }
        if let Some(order) = &shape_order {
            if order.len() != laws.len() {
                return Err(LawError::IncompleteOrder {
                    got: order.len(),
                    expected: laws.len(),
                });
            }
            for label in order {
                if !seen.contains(&label.as_str()) {
                    return Err(LawError::UnknownOrderLabel(label.clone()));
                }
            }
        }
        Ok(Self {
            shape_parameter: shape_parameter.into(),
            laws,
            cost_unit: first_unit,
            shape_order,
        })
    }

    pub fn shape_parameter(&self) -> &str {
        &self.shape_parameter
    }

    pub fn laws(&self) -> &[PowerLaw] {
        &self.laws
    }

    pub fn cost_unit(&self) -> CostUnit {
        self.cost_unit
    }

    pub fn shape_order(&self) -> Option<&[String]> {
        self.shape_order.as_deref()
    }

    pub fn get(&self, shape_label: &str) -> Option<&PowerLaw> {
        self.laws.iter().find(|l| l.shape_label() == shape_label)
    }

    /// Tie-break rank of a label: its position in `shape_order` when present,
    /// otherwise labels compare lexicographically.
    pub(crate) fn tie_rank<'a>(&self, label: &'a str) -> TieRank<'a> {
        match &self.shape_order {
            Some(order) => {
                TieRank::Ordered(order.iter().position(|l| l == label).unwrap_or(usize::MAX))
            }
            None => TieRank::Lexicographic(label),
        }
    }

    /// Highest start error over the family (top of the union of windows).
    pub fn max_start_error(&self) -> f64 {
        self.laws
            .iter()
            .map(|l| l.start_error())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest asymptote over the family (no error below it is reachable).
    pub fn min_asymptote(&self) -> f64 {
        self.laws
            .iter()
            .map(|l| l.asymptote())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum TieRank<'a> {
    Ordered(usize),
    Lexicographic(&'a str),
}
