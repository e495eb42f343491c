//! MM-loss: the adversarial terms of all targets are averaged while the
//! regression (L1) term only counts the closest target,
//!
//! ```text
//! L = (lambda / M) * sum_j gan_j + min_j L1(pred, y_j)
//! ```
//!
//! The discriminator is abstracted behind [`DiscriminatorOracle`]; adversarial
//! terms enter the kernel as plain numbers.

mod trainer;

pub use trainer::{
    three_line_fixture, train_toy, Aggregation, TinyModel, ToyExample, ToyReport, TrainConfig,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::SoftMap;

/// Real-valued row-major grid (predictions, targets, gradients).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {width}x{height} grid",
                values.len()
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: u32, height: u32, v: f64) -> Self {
        Self {
            width,
            height,
            values: vec![v; width as usize * height as usize],
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values must lie in [0, 1].
    pub fn to_soft_map(&self) -> Result<SoftMap> {
        SoftMap::new(self.width, self.height, self.values.clone())
    }
}

impl From<&SoftMap> for Grid {
    fn from(m: &SoftMap) -> Self {
        Grid {
            width: m.width(),
            height: m.height(),
            values: m.values().to_vec(),
        }
    }
}

fn same_shape(a: &Grid, b: &Grid) -> Result<()> {
    crate::error::check_dims(a.dims(), b.dims())
}

/// The targets y(1)..y(M) of one training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    targets: Vec<Grid>,
}

impl TargetSet {
    pub fn new(targets: Vec<Grid>) -> Result<Self> {
        let first = targets.first().ok_or(Error::Empty("target set"))?;
        for t in &targets[1..] {
            same_shape(first, t)?;
        }
        Ok(Self { targets })
    }

    pub fn targets(&self) -> &[Grid] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dims(&self) -> (u32, u32) {
        self.targets[0].dims()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GanVariant {
    /// Generator minimizes log(1 - D(fake)).
    Original,
    /// Generator minimizes -log D(fake).
    NonSaturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub lambda: f64,
    pub epsilon_log: f64,
    pub gan_variant: GanVariant,
}

impl LossConfig {
    pub const DEFAULT_EPSILON_LOG: f64 = 1e-12;

    pub fn new(lambda: f64, gan_variant: GanVariant) -> Result<Self> {
        let cfg = Self {
            lambda,
            epsilon_log: Self::DEFAULT_EPSILON_LOG,
            gan_variant,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.epsilon_log > 0.0 && self.epsilon_log < 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "epsilon_log must be in (0, 1e-6), got {}",
                self.epsilon_log
            )));
        }
        Ok(())
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            epsilon_log: Self::DEFAULT_EPSILON_LOG,
            gan_variant: GanVariant::Original,
        }
    }
}

/// Mean absolute difference.
pub fn l1_term(pred: &Grid, target: &Grid) -> Result<f64> {
    same_shape(pred, target)?;
    let sum: f64 = pred.values.iter().zip(&target.values).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// Generator-side adversarial term for a discriminator score on the fake.
/// Log arguments are clamped below by `epsilon_log`.
pub fn gan_generator_term(d_fake: f64, cfg: &LossConfig) -> f64 {
    match cfg.gan_variant {
        GanVariant::Original => (1.0 - d_fake).max(cfg.epsilon_log).ln(),
        GanVariant::NonSaturating => -d_fake.max(cfg.epsilon_log).ln(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub gan_terms: Vec<f64>,
    pub l1_terms: Vec<f64>,
    /// Lowest index among the minimal L1 terms.
    pub argmin_index: usize,
    pub total: f64,
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Combines precomputed per-target terms into the MM-loss.
pub fn combine_terms(gan_terms: Vec<f64>, l1_terms: Vec<f64>, cfg: &LossConfig) -> Result<LossBreakdown> {
    if l1_terms.is_empty() {
        return Err(Error::Empty("target set"));
    }
    if gan_terms.len() != l1_terms.len() {
        return Err(Error::InvalidArgument(format!(
            "{} adversarial terms for {} targets",
            gan_terms.len(),
            l1_terms.len()
        )));
    }
    let m = l1_terms.len() as f64;
    // start from the first term so that M = 1 reproduces lambda * g + l1 bit for bit
    let gan_sum = gan_terms[1..].iter().fold(gan_terms[0], |acc, g| acc + g);
    let argmin_index = argmin(&l1_terms);
    let total = (cfg.lambda / m) * gan_sum + l1_terms[argmin_index];
    Ok(LossBreakdown {
        gan_terms,
        l1_terms,
        argmin_index,
        total,
    })
}

pub fn mm_loss_eval(pred: &Grid, ts: &TargetSet, gan_terms: &[f64], cfg: &LossConfig) -> Result<LossBreakdown> {
    cfg.validate()?;
    let l1 = ts
        .targets
        .iter()
        .map(|t| l1_term(pred, t))
        .collect::<Result<Vec<_>>>()?;
    combine_terms(gan_terms.to_vec(), l1, cfg)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient of the MM-loss with respect to the prediction:
/// `lambda * gan_grad + sign(pred - y_argmin) / n`. Only the closest target
/// contributes to the L1 part.
pub fn mm_loss_grad(pred: &Grid, ts: &TargetSet, gan_grad: &Grid, cfg: &LossConfig) -> Result<Grid> {
    cfg.validate()?;
    same_shape(pred, gan_grad)?;
    let l1 = ts
        .targets
        .iter()
        .map(|t| l1_term(pred, t))
        .collect::<Result<Vec<_>>>()?;
    let target = &ts.targets[argmin(&l1)];
    let n = pred.len() as f64;
    let values = pred
        .values
        .iter()
        .zip(&target.values)
        .zip(&gan_grad.values)
        .map(|((p, y), g)| cfg.lambda * g + sign(p - y) / n)
        .collect();
    Grid::new(pred.width, pred.height, values)
}

/// A discriminator seen as a black box: its score on a candidate output and
/// the gradient of that score with respect to the candidate.
pub trait DiscriminatorOracle {
    fn score(&self, sample: &Grid) -> f64;
    fn score_gradient(&self, sample: &Grid) -> Grid;
}

/// `D(y) = sigmoid(<w, y> + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticDiscriminator {
    pub weights: Grid,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl DiscriminatorOracle for LogisticDiscriminator {
    fn score(&self, sample: &Grid) -> f64 {
        let z: f64 = self.weights.values.iter().zip(&sample.values).map(|(w, y)| w * y).sum();
        sigmoid(z + self.bias)
    }

    fn score_gradient(&self, sample: &Grid) -> Grid {
        let d = self.score(sample);
        let values = self.weights.values.iter().map(|w| d * (1.0 - d) * w).collect();
        Grid::new(self.weights.width, self.weights.height, values).expect("same shape as weights")
    }
}

/// Per-target cGAN terms `log D(y_j) + g(D(pred))`, where `g` is the
/// generator term of the configured variant.
pub fn gan_terms(oracle: &dyn DiscriminatorOracle, pred: &Grid, ts: &TargetSet, cfg: &LossConfig) -> Vec<f64> {
    let fake = gan_generator_term(oracle.score(pred), cfg);
    ts.targets
        .iter()
        .map(|y| oracle.score(y).max(cfg.epsilon_log).ln() + fake)
        .collect()
}

/// Gradient of the generator term with respect to the prediction; zero where
/// the log clamp is active.
pub fn gan_generator_grad(oracle: &dyn DiscriminatorOracle, pred: &Grid, cfg: &LossConfig) -> Grid {
    let d = oracle.score(pred);
    let dd = oracle.score_gradient(pred);
    let scale = match cfg.gan_variant {
        GanVariant::Original if 1.0 - d > cfg.epsilon_log => -1.0 / (1.0 - d),
        GanVariant::NonSaturating if d > cfg.epsilon_log => -1.0 / d,
        _ => 0.0,
    };
    let values = dd.values.iter().map(|g| scale * g).collect();
    Grid::new(dd.width, dd.height, values).expect("same shape")
}
