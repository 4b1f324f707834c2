//! FLOP accounting for transformer shapes and the carbon estimator.
//!
//! Costs are multiply-accumulate counts (1 MAC = 1 FLOP). Per block a token
//! costs `4 d²` for the attention projections, `2 mlp_ratio d²` for the MLP,
//! and the quadratic attention interaction costs `2 n² d` per block, giving
//!
//! ```text
//! F = L · [ (4 + 2·mlp_ratio) · n · d² + 2 · n² · d ]
//! ```
//!
//! per forward pass. Classification/readout heads and the token embedding
//! are excluded by default; the patch-embedding MACs (`n p² c d`) can be
//! added with a flag. A backward pass costs twice the forward pass, so one
//! optimizer step is `3 · F · batch`. Head counts never enter: per-head
//! dimensions partition the width `d`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FlopsError {
    #[error("{name} must be positive, got {value}")]
    InvalidDimension { name: &'static str, value: i64 },
    #[error("mlp_ratio must be positive and finite, got {0}")]
    InvalidMlpRatio(f64),
    #[error("patch {patch} yields zero tokens on a {h}x{w} image")]
    NoTokens { patch: u32, h: u32, w: u32 },
    #[error("forward FLOPs must be positive and finite, got {0}")]
    InvalidForwardFlops(f64),
    #[error("teacher forward FLOPs must be nonnegative and finite, got {0}")]
    InvalidTeacherFlops(f64),
    #[error("batch must be positive")]
    ZeroBatch,
    #[error("{name} must be {constraint}, got {value}")]
    InvalidHardware {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("bad shape string: {0}")]
    BadShapeString(String),
}

pub const DEFAULT_MLP_RATIO: f64 = 4.0;

/// A vision transformer shape: patches of a fixed image feed a stack of
/// `depth` blocks of width `width`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViTShape {
    width: u32,
    depth: u32,
    patch: u32,
    image: (u32, u32, u32),
    mlp_ratio: f64,
}

impl ViTShape {
    pub fn new(
        width: u32,
        depth: u32,
        patch: u32,
        image: (u32, u32, u32),
        mlp_ratio: f64,
    ) -> Result<Self, FlopsError> {
        for (name, value) in [
            ("width", width),
            ("depth", depth),
            ("patch", patch),
            ("image height", image.0),
            ("image width", image.1),
            ("image channels", image.2),
        ] {
            if value == 0 {
                return Err(FlopsError::InvalidDimension {
                    name,
                    value: value as i64,
                });
            }
        }
        if !mlp_ratio.is_finite() || mlp_ratio <= 0.0 {
            return Err(FlopsError::InvalidMlpRatio(mlp_ratio));
        }
        let shape = Self {
            width,
            depth,
            patch,
            image,
            mlp_ratio,
        };
        if shape.tokens() == 0 {
            return Err(FlopsError::NoTokens {
                patch,
                h: image.0,
                w: image.1,
            });
        }
        Ok(shape)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn patch(&self) -> u32 {
        self.patch
    }

    pub fn image(&self) -> (u32, u32, u32) {
        self.image
    }

    pub fn mlp_ratio(&self) -> f64 {
        self.mlp_ratio
    }

    /// Sequence length: `floor(h/p) * floor(w/p)`.
    pub fn tokens(&self) -> u64 {
        (self.image.0 / self.patch) as u64 * (self.image.1 / self.patch) as u64
    }

    /// MACs of one forward pass over one image. `include_embedding` adds the
    /// patch-projection term `n p² c d`.
    pub fn forward_flops(&self, include_embedding: bool) -> f64 {
        let body = transformer_body_flops(
            self.tokens() as f64,
            self.width as f64,
            self.depth as f64,
            self.mlp_ratio,
        );
        if include_embedding {
            let n = self.tokens() as f64;
            let p = self.patch as f64;
            let c = self.image.2 as f64;
            body + n * p * p * c * self.width as f64
        } else {
            body
        }
    }
}

/// A language model shape: `context` tokens through `depth` blocks of width
/// `width`. Attention uses the full `2 n² d` interaction (no causal halving).
#[derive(Debug, Clone, PartialEq)]
pub struct LMShape {
    width: u32,
    depth: u32,
    context: u32,
    mlp_ratio: f64,
}

impl LMShape {
    pub fn new(width: u32, depth: u32, context: u32, mlp_ratio: f64) -> Result<Self, FlopsError> {
        for (name, value) in [("width", width), ("depth", depth), ("context", context)] {
            if value == 0 {
                return Err(FlopsError::InvalidDimension {
                    name,
                    value: value as i64,
                });
            }
        }
        if !mlp_ratio.is_finite() || mlp_ratio <= 0.0 {
            return Err(FlopsError::InvalidMlpRatio(mlp_ratio));
        }
        Ok(Self {
            width,
            depth,
            context,
            mlp_ratio,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn context(&self) -> u32 {
        self.context
    }

    pub fn mlp_ratio(&self) -> f64 {
        self.mlp_ratio
    }

    /// MACs of one forward pass over one sequence. Token embedding lookup and
    /// the output head are excluded.
    pub fn forward_flops(&self) -> f64 {
        transformer_body_flops(
            self.context as f64,
            self.width as f64,
            self.depth as f64,
            self.mlp_ratio,
        )
    }
}

fn transformer_body_flops(n: f64, d: f64, depth: f64, mlp_ratio: f64) -> f64 {
    depth * ((4.0 + 2.0 * mlp_ratio) * n * d * d + 2.0 * n * n * d)
}

/// MACs per image of a ViT forward pass under the default accounting
/// (embedding excluded).
pub fn vit_forward_flops(shape: &ViTShape) -> f64 {
    shape.forward_flops(false)
}

/// MACs per sequence of an LM forward pass.
pub fn lm_forward_flops(shape: &LMShape) -> f64 {
    shape.forward_flops()
}

/// MACs of one optimizer step: forward plus a backward pass at twice the
/// forward cost, times the batch.
pub fn train_step_flops(forward_flops: f64, batch: u64) -> Result<f64, FlopsError> {
    if !forward_flops.is_finite() || forward_flops <= 0.0 {
        return Err(FlopsError::InvalidForwardFlops(forward_flops));
    }
    if batch == 0 {
        return Err(FlopsError::ZeroBatch);
    }
    Ok(3.0 * forward_flops * batch as f64)
}

/// MACs of one distillation step: the student trains (forward + 2x backward)
/// while the teacher only runs forward.
pub fn distill_step_flops(
    student_forward: f64,
    teacher_forward: f64,
    batch: u64,
) -> Result<f64, FlopsError> {
    if !student_forward.is_finite() || student_forward <= 0.0 {
        return Err(FlopsError::InvalidForwardFlops(student_forward));
    }
    if !teacher_forward.is_finite() || teacher_forward < 0.0 {
        return Err(FlopsError::InvalidTeacherFlops(teacher_forward));
    }
    if batch == 0 {
        return Err(FlopsError::ZeroBatch);
    }
    Ok((3.0 * student_forward + teacher_forward) * batch as f64)
}

pub const DEFAULT_PUE: f64 = 1.1;
/// kg CO2-equivalent per kWh.
pub const DEFAULT_CARBON_INTENSITY: f64 = 0.385;

/// Energy accounting inputs for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareRun {
    gpu_hours: f64,
    avg_watts: f64,
    pue: f64,
    carbon_intensity: f64,
}

impl HardwareRun {
    /// Defaults: PUE 1.1, grid intensity 0.385 kg CO2eq/kWh.
    pub fn new(gpu_hours: f64, avg_watts: f64) -> Result<Self, FlopsError> {
        Self::with_overheads(gpu_hours, avg_watts, DEFAULT_PUE, DEFAULT_CARBON_INTENSITY)
    }

    pub fn with_overheads(
        gpu_hours: f64,
        avg_watts: f64,
        pue: f64,
        carbon_intensity: f64,
    ) -> Result<Self, FlopsError> {
        if !gpu_hours.is_finite() || gpu_hours < 0.0 {
            return Err(FlopsError::InvalidHardware {
                name: "gpu_hours",
                constraint: "nonnegative and finite",
                value: gpu_hours,
            });
        }
        for (name, value) in [
            ("avg_watts", avg_watts),
            ("pue", pue),
            ("carbon_intensity", carbon_intensity),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(FlopsError::InvalidHardware {
                    name,
                    constraint: "positive and finite",
                    value,
                });
            }
        }
        Ok(Self {
            gpu_hours,
            avg_watts,
            pue,
            carbon_intensity,
        })
    }

    pub fn gpu_hours(&self) -> f64 {
        self.gpu_hours
    }

    pub fn avg_watts(&self) -> f64 {
        self.avg_watts
    }

    pub fn pue(&self) -> f64 {
        self.pue
    }

    pub fn carbon_intensity(&self) -> f64 {
        self.carbon_intensity
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarbonEstimate {
    pub megawatt_hours: f64,
    pub tonnes_co2eq: f64,
}

/// Energy drawn and carbon emitted: watt-hours are GPU-hours times average
/// draw times the datacenter PUE overhead; tonnes follow from the grid's
/// intensity (kg/kWh over a thousand kWh per MWh and kg per tonne cancel to
/// a straight multiply).
pub fn carbon(run: &HardwareRun) -> CarbonEstimate {
    let megawatt_hours = run.gpu_hours * run.avg_watts * run.pue / 1e6;
    CarbonEstimate {
        megawatt_hours,
        tonnes_co2eq: megawatt_hours * run.carbon_intensity,
    }
}

/// A parsed shape of either architecture, as written on the command line:
/// `vit:d=768,L=12,p=8,img=120x120x3` or `lm:d=768,L=12,n=1024`, with an
/// optional `mlp=` ratio in both.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    Vit(ViTShape),
    Lm(LMShape),
}

impl ShapeSpec {
    pub fn forward_flops(&self, include_embedding: bool) -> f64 {
        match self {
            ShapeSpec::Vit(v) => v.forward_flops(include_embedding),
            ShapeSpec::Lm(l) => l.forward_flops(),
        }
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeSpec::Vit(v) => {
                write!(
                    f,
                    "vit:d={},L={},p={},img={}x{}x{}",
                    v.width, v.depth, v.patch, v.image.0, v.image.1, v.image.2
                )?;
                if v.mlp_ratio != DEFAULT_MLP_RATIO {
                    write!(f, ",mlp={}", v.mlp_ratio)?;
                }
                Ok(())
            }
            ShapeSpec::Lm(l) => {
                write!(f, "lm:d={},L={},n={}", l.width, l.depth, l.context)?;
                if l.mlp_ratio != DEFAULT_MLP_RATIO {
                    write!(f, ",mlp={}", l.mlp_ratio)?;
                }
                Ok(())
            }
        }
    }
}

/// In JSON a shape is its compact string form.
impl serde::Serialize for ShapeSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ShapeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn bad(detail: impl Into<String>) -> FlopsError {
    FlopsError::BadShapeString(detail.into())
}

fn parse_u32(key: &str, value: &str) -> Result<u32, FlopsError> {
    value
        .parse::<u32>()
        .map_err(|_| bad(format!("{key}= wants a positive integer, got '{value}'")))
}

impl FromStr for ShapeSpec {
    type Err = FlopsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (arch, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected 'vit:...' or 'lm:...'"))?;

        let mut width = None;
        let mut depth = None;
        let mut patch = None;
        let mut image = None;
        let mut context = None;
        let mut mlp_ratio = None;
        for field in rest.split(',') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(format!("field '{field}' is not key=value")))?;
            let duplicate = |slot: bool| -> Result<(), FlopsError> {
                if slot {
                    Err(bad(format!("duplicate key '{key}'")))
                } else {
                    Ok(())
                }
            };
            match key {
                "d" => {
                    duplicate(width.is_some())?;
                    width = Some(parse_u32(key, value)?);
                }
                "L" => {
                    duplicate(depth.is_some())?;
                    depth = Some(parse_u32(key, value)?);
                }
                "p" => {
                    duplicate(patch.is_some())?;
                    patch = Some(parse_u32(key, value)?);
                }
                "n" => {
                    duplicate(context.is_some())?;
                    context = Some(parse_u32(key, value)?);
                }
                "img" => {
                    duplicate(image.is_some())?;
                    let dims: Vec<&str> = value.split('x').collect();
                    if dims.len() != 3 {
                        return Err(bad(format!("img= wants HxWxC, got '{value}'")));
                    }
                    image = Some((
                        parse_u32("img", dims[0])?,
                        parse_u32("img", dims[1])?,
                        parse_u32("img", dims[2])?,
                    ));
                }
                "mlp" => {
                    duplicate(mlp_ratio.is_some())?;
                    let v: f64 = value
                        .parse()
                        .map_err(|_| bad(format!("mlp= wants a number, got '{value}'")))?;
                    mlp_ratio = Some(v);
                }
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        let mlp_ratio = mlp_ratio.unwrap_or(DEFAULT_MLP_RATIO);
        let want =
            |name: &str, opt: Option<u32>| opt.ok_or_else(|| bad(format!("missing {name}=")));

        match arch {
            "vit" => {
                if context.is_some() {
                    return Err(bad("n= is a language-model key; vit wants p= and img="));
                }
                let shape = ViTShape::new(
                    want("d", width)?,
                    want("L", depth)?,
                    want("p", patch)?,
                    image.ok_or_else(|| bad("missing img="))?,
                    mlp_ratio,
                )?;
                Ok(ShapeSpec::Vit(shape))
            }
            "lm" => {
                if patch.is_some() || image.is_some() {
                    return Err(bad("p=/img= are vision keys; lm wants n="));
                }
                let shape = LMShape::new(
                    want("d", width)?,
                    want("L", depth)?,
                    want("n", context)?,
                    mlp_ratio,
                )?;
                Ok(ShapeSpec::Lm(shape))
            }
            other => Err(bad(format!("unknown architecture '{other}'"))),
        }
    }
}
