//! A deliberately tiny model for checking how the aggregation over targets
//! shapes the learned output: one free logit per pixel and per input, trained
//! by full-batch gradient descent on the L1 part of the loss.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{l1_term, Grid, TargetSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Regress towards the closest target only.
    Min,
    /// Regress towards every target with equal weight.
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyExample {
    pub input: usize,
    pub targets: TargetSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: Aggregation,
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(mode: Aggregation) -> Self {
        Self {
            mode,
            steps: 2000,
            learning_rate: 100.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TinyModel {
    width: u32,
    height: u32,
    logits: BTreeMap<usize, Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
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

impl TinyModel {
    pub fn predict(&self, input: usize) -> Option<Grid> {
        let logits = self.logits.get(&input)?;
        let values = logits.iter().map(|&z| sigmoid(z)).collect();
        Some(Grid::new(self.width, self.height, values).expect("shape is fixed"))
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

/// Gradient of the aggregated L1 loss with respect to the prediction.
fn l1_grad(pred: &[f64], targets: &TargetSet, mode: Aggregation) -> Vec<f64> {
    let n = pred.len() as f64;
    let ys = targets.targets();
    let pred_grid = Grid {
        width: targets.dims().0,
        height: targets.dims().1,
        values: pred.to_vec(),
    };
    match mode {
        Aggregation::Min => {
            let l1: Vec<f64> = ys.iter().map(|y| l1_term(&pred_grid, y).expect("same shape")).collect();
            let y = &ys[super::argmin(&l1)];
            pred.iter().zip(y.values()).map(|(p, t)| sign(p - t) / n).collect()
        }
        Aggregation::Mean => {
            let m = ys.len() as f64;
            (0..pred.len())
                .map(|i| ys.iter().map(|y| sign(pred[i] - y.values()[i])).sum::<f64>() / (m * n))
                .collect()
        }
    }
}

pub fn train_toy(examples: &[ToyExample], cfg: &TrainConfig) -> Result<TinyModel> {
    let first = examples.first().ok_or(Error::Empty("training set"))?;
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    let (width, height) = first.targets.dims();
    for ex in examples {
        crate::error::check_dims((width, height), ex.targets.dims())?;
    }
    let n = width as usize * height as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut logits = BTreeMap::new();
    for ex in examples {
        logits
            .entry(ex.input)
            .or_insert_with(|| (0..n).map(|_| rng.random_range(-0.01..0.01)).collect::<Vec<f64>>());
    }

    for _ in 0..cfg.steps {
        let mut grads: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for ex in examples {
            let z = &logits[&ex.input];
            let pred: Vec<f64> = z.iter().map(|&v| sigmoid(v)).collect();
            let g = l1_grad(&pred, &ex.targets, cfg.mode);
            let acc = grads.entry(ex.input).or_insert_with(|| vec![0.0; n]);
            for i in 0..n {
                acc[i] += g[i] * pred[i] * (1.0 - pred[i]);
            }
        }
        for (input, g) in grads {
            let z = logits.get_mut(&input).expect("initialized");
            for (zi, gi) in z.iter_mut().zip(g) {
                *zi -= cfg.learning_rate * gi;
            }
        }
    }

    Ok(TinyModel { width, height, logits })
}

/// One input whose three targets are horizontal lines on rows 2, 5 and 8 of
/// a 10x10 grid.
pub fn three_line_fixture() -> ToyExample {
    let targets = [2u32, 5, 8]
        .iter()
        .map(|&row| {
            let values = (0..100u32).map(|i| if i / 10 == row { 1.0 } else { 0.0 }).collect();
            Grid::new(10, 10, values).expect("10x10")
        })
        .collect();
    ToyExample {
        input: 0,
        targets: TargetSet::new(targets).expect("non-empty"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyReport {
    pub mode: Aggregation,
    pub steps: usize,
    /// L1 distance from the prediction to each target.
    pub l1_per_target: Vec<f64>,
    pub final_min_l1: f64,
    /// Targets reproduced within the reporting tolerance.
    pub reproduced: Vec<usize>,
    /// Pixels above 0.5 in the prediction.
    pub pixels_above_half: usize,
}

impl ToyReport {
    pub const REPRODUCE_TOL: f64 = 0.02;

    pub fn new(model: &TinyModel, example: &ToyExample, cfg: &TrainConfig) -> Result<Self> {
        let pred = model
            .predict(example.input)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown input {}", example.input)))?;
        let l1_per_target = example
            .targets
            .targets()
            .iter()
            .map(|y| l1_term(&pred, y))
            .collect::<Result<Vec<_>>>()?;
        let min_l1 = l1_per_target.iter().copied().fold(f64::INFINITY, f64::min);
        let reproduced = l1_per_target
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= Self::REPRODUCE_TOL)
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            mode: cfg.mode,
            steps: cfg.steps,
            l1_per_target,
            final_min_l1: min_l1,
            reproduced,
            pixels_above_half: pred.values().iter().filter(|&&v| v > 0.5).count(),
        })
    }
}
