//! Synthetic players used to check that the automatic acceptance rule tells
//! careful tracing apart from random scribbling.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::{generate_field, Boundary, FieldParams};
use super::session::{classify_submission, SessionStatus};
use crate::error::Result;
use crate::stroke::{rasterize_drawing, resample_stroke, Drawing, Point, Stroke};

pub const SCENE_SIZE: u32 = 256;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A random scene of three contours: a rectangle, an ellipse and an open
/// zig-zag, all inside a `SCENE_SIZE` square.
pub fn synthetic_scene(seed: u64) -> Result<Drawing> {
    let mut rng = rng_for(seed, 1);
    let s = f64::from(SCENE_SIZE);

    let (w, h) = (rng.random_range(60.0..110.0), rng.random_range(60.0..110.0));
    let (x0, y0) = (rng.random_range(10.0..s - 10.0 - w), rng.random_range(10.0..s - 10.0 - h));
    let rect = vec![
        Point::new(x0, y0),
        Point::new(x0 + w, y0),
        Point::new(x0 + w, y0 + h),
        Point::new(x0, y0 + h),
        Point::new(x0, y0),
    ];

    let (rx, ry) = (rng.random_range(30.0..55.0), rng.random_range(30.0..55.0));
    let (cx, cy) = (rng.random_range(10.0 + rx..s - 10.0 - rx), rng.random_range(10.0 + ry..s - 10.0 - ry));
    let ellipse = (0..=48)
        .map(|i| {
            let a = TAU * f64::from(i) / 48.0;
            Point::new(cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect();

    let zigzag = (0..6)
        .map(|i| Point::new(10.0 + f64::from(i) * (s - 20.0) / 5.0, rng.random_range(10.0..s - 10.0)))
        .collect();

    let strokes = [rect, ellipse, zigzag]
        .into_iter()
        .enumerate()
        .map(|(i, pts)| Stroke::new(i as u32, pts))
        .collect::<Result<Vec<_>>>()?;
    Drawing::new(format!("scene-{seed}"), SCENE_SIZE, SCENE_SIZE, None, strokes)
}

fn total_length(d: &Drawing) -> f64 {
    d.strokes().iter().map(Stroke::length).sum()
}

/// Follows every true contour with a small hand tremor.
pub fn tracer_drawing(scene: &Drawing, seed: u64, jitter: f64) -> Result<Drawing> {
    let mut rng = rng_for(seed, 2);
    let mut strokes = Vec::new();
    for s in scene.strokes() {
        let dense = resample_stroke(s, 3.0)?;
        let pts: Vec<Point> = dense
            .points()
            .iter()
            .map(|p| Point::new(p.x + rng.random_range(-jitter..=jitter), p.y + rng.random_range(-jitter..=jitter)))
            .collect();
        strokes.push(Stroke::new(s.order_index(), pts)?);
    }
    Drawing::new(scene.image_id(), scene.width(), scene.height(), Some("tracer".into()), strokes)
}

/// Random-walk strokes with the same total ink as the scene's contours.
pub fn scribbler_drawing(scene: &Drawing, seed: u64) -> Result<Drawing> {
    let mut rng = rng_for(seed, 3);
    let (w, h) = (f64::from(scene.width()), f64::from(scene.height()));
    let n_strokes = scene.strokes().len().max(1);
    let per_stroke = total_length(scene) / n_strokes as f64;
    let step = 3.0;
    let mut strokes = Vec::new();
    for i in 0..n_strokes {
        let mut p = Point::new(rng.random_range(0.0..w), rng.random_range(0.0..h));
        let mut heading = rng.random_range(0.0..TAU);
        let mut pts = vec![p];
        let mut ink = 0.0;
        while ink < per_stroke {
            heading += rng.random_range(-0.5..0.5);
            let next = Point::new((p.x + step * heading.cos()).clamp(0.0, w), (p.y + step * heading.sin()).clamp(0.0, h));
            if next == p {
                // stuck in a corner
                heading += std::f64::consts::PI;
                continue;
            }
            ink += p.distance(&next);
            pts.push(next);
            p = next;
        }
        strokes.push(Stroke::new(i as u32, pts)?);
    }
    Drawing::new(scene.image_id(), scene.width(), scene.height(), Some("scribbler".into()), strokes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub trials_per_agent: usize,
    pub tracer_accepted: usize,
    pub scribbler_rejected: usize,
    pub accuracy: f64,
    pub tracer_fractions: Vec<f64>,
    pub scribbler_fractions: Vec<f64>,
}

/// Plays one tracer and one scribbler on each of `seeds` random scenes and
/// reports how often the verdict is right.
pub fn separation_experiment(seeds: std::ops::Range<u64>, params: &FieldParams, cutoff: f64) -> Result<SeparationReport> {
    let mut report = SeparationReport {
        trials_per_agent: 0,
        tracer_accepted: 0,
        scribbler_rejected: 0,
        accuracy: 0.0,
        tracer_fractions: Vec::new(),
        scribbler_fractions: Vec::new(),
    };
    for seed in seeds {
        let scene = synthetic_scene(seed)?;
        let boundary = rasterize_drawing(&scene, 1.0)?;
        let field = generate_field(scene.image_id(), Boundary::Binary(&boundary), params, seed)?;

        let t = classify_submission(&tracer_drawing(&scene, seed, 1.0)?, &field, cutoff)?;
        report.tracer_fractions.push(t.score_fraction);
        report.tracer_accepted += usize::from(t.status == SessionStatus::Accepted);

        let s = classify_submission(&scribbler_drawing(&scene, seed)?, &field, cutoff)?;
        report.scribbler_fractions.push(s.score_fraction);
        report.scribbler_rejected += usize::from(s.status == SessionStatus::Rejected);

        report.trials_per_agent += 1;
    }
    let correct = report.tracer_accepted + report.scribbler_rejected;
    report.accuracy = correct as f64 / (2 * report.trials_per_agent).max(1) as f64;
    Ok(report)
}
