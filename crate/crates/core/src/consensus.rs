//! Stroke-level consensus across the drawings of one image.
//!
//! A stroke survives when, for every other drawing, at least `rho` of its
//! rasterized pixels find a partner in that drawing's raster under the
//! pixel matcher. Strokes are never split: a kept stroke is the input stroke.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{match_pixel_sets, Tolerance};
use crate::raster::Pixel;
use crate::stroke::{rasterize_drawing, rasterize_stroke, Drawing, Stroke};

/// Strokes rasterizing to fewer pixels than this only need one matching peer.
pub const SHORT_STROKE_PIXELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum ConsensusMode {
    /// Kept strokes of one designated drawing.
    Reference(usize),
    /// Kept strokes of every drawing, renumbered in drawing order.
    Union,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusOptions {
    pub rho: f64,
    pub mode: ConsensusMode,
    /// Repeat the pass against the surviving strokes until nothing changes.
    pub iterate_to_fixpoint: bool,
}

impl Default for ConsensusOptions {
    fn default() -> Self {
        Self {
            rho: 0.75,
            mode: ConsensusMode::Reference(0),
            iterate_to_fixpoint: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    /// Per drawing, indices (into `strokes()`) of the strokes kept.
    pub kept: Vec<Vec<usize>>,
    pub consensus_drawing: Drawing,
    /// `per_stroke_fractions[i][s][j]`: match fraction of stroke `s` of
    /// drawing `i` against drawing `j`; 1.0 on `j == i`.
    pub per_stroke_fractions: Vec<Vec<Vec<f64>>>,
}

fn pixels(m: &crate::raster::BinaryMap) -> Vec<Pixel> {
    m.on_pixels().collect()
}

fn fraction(stroke_pixels: &[Pixel], other_pixels: &[Pixel], tol: &Tolerance) -> f64 {
    if stroke_pixels.is_empty() {
        return 0.0;
    }
    let r = match_pixel_sets(stroke_pixels, other_pixels, tol.d_max());
    r.n_matched() as f64 / stroke_pixels.len() as f64
}

/// Fraction of `s`'s rasterized pixels (in a `dims` frame, scale 1) matched
/// against the raster of `other`.
pub fn stroke_match_fraction(s: &Stroke, dims: (u32, u32), other: &Drawing, tol: &Tolerance) -> Result<f64> {
    crate::error::check_dims(other.dims(), dims)?;
    let sp = pixels(&rasterize_stroke(s, dims.0, dims.1));
    let op = pixels(&rasterize_drawing(other, 1.0)?);
    Ok(fraction(&sp, &op, tol))
}

pub fn consensus_drawings(ds: &[Drawing], tol: &Tolerance, opts: &ConsensusOptions) -> Result<ConsensusResult> {
    if ds.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "consensus needs at least 2 drawings, got {}",
            ds.len()
        )));
    }
    let first = &ds[0];
    for d in &ds[1..] {
        if d.image_id() != first.image_id() {
            return Err(Error::InvalidArgument(format!(
                "mixed image ids {:?} and {:?}",
                first.image_id(),
                d.image_id()
            )));
        }
        crate::error::check_dims(first.dims(), d.dims())?;
    }
    if !(opts.rho > 0.0 && opts.rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("rho must be in (0, 1], got {}", opts.rho)));
    }
    if let ConsensusMode::Reference(r) = opts.mode {
        if r >= ds.len() {
            return Err(Error::InvalidArgument(format!(
                "reference drawing {r} out of {} drawings",
                ds.len()
            )));
        }
    }
    let (w, h) = first.dims();
    let stroke_pixels: Vec<Vec<Vec<Pixel>>> = ds
        .iter()
        .map(|d| d.strokes().iter().map(|s| pixels(&rasterize_stroke(s, w, h))).collect())
        .collect();

    let mut kept: Vec<Vec<bool>> = ds.iter().map(|d| vec![true; d.strokes().len()]).collect();
    let mut fractions;
    loop {
        // rasters of the currently kept strokes of each drawing
        let targets: Vec<Vec<Pixel>> = ds
            .iter()
            .zip(&kept)
            .map(|(d, k)| {
                let strokes = d.strokes().iter().zip(k).filter(|(_, &k)| k).map(|(s, _)| s.clone());
                let sub = d.with_strokes(strokes.collect()).expect("subset of a valid drawing");
                pixels(&rasterize_drawing(&sub, 1.0).expect("scale 1 is valid"))
            })
            .collect();
        fractions = stroke_pixels
            .iter()
            .enumerate()
            .map(|(i, strokes)| {
                strokes
                    .iter()
                    .map(|sp| {
                        (0..ds.len())
                            .map(|j| if i == j { 1.0 } else { fraction(sp, &targets[j], tol) })
                            .collect::<Vec<f64>>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let mut changed = false;
        for (i, strokes) in fractions.iter().enumerate() {
            for (s, row) in strokes.iter().enumerate() {
                if !kept[i][s] {
                    continue;
                }
                let mut peers = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &f)| f);
                let keep = if stroke_pixels[i][s].len() < SHORT_STROKE_PIXELS {
                    peers.any(|f| f >= opts.rho)
                } else {
                    peers.all(|f| f >= opts.rho)
                };
                if !keep {
                    kept[i][s] = false;
                    changed = true;
                }
            }
        }
        if !opts.iterate_to_fixpoint || !changed {
            break;
        }
    }

    let kept_idx: Vec<Vec<usize>> = kept
        .iter()
        .map(|k| k.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect())
        .collect();
    let consensus_drawing = match opts.mode {
        ConsensusMode::Reference(r) => {
            let strokes = kept_idx[r].iter().map(|&s| ds[r].strokes()[s].clone()).collect();
            ds[r].with_strokes(strokes)?
        }
        ConsensusMode::Union => {
            let strokes = kept_idx
                .iter()
                .enumerate()
                .flat_map(|(i, k)| k.iter().map(move |&s| &ds[i].strokes()[s]))
                .enumerate()
                .map(|(n, s)| s.with_order_index(n as u32))
                .collect();
            Drawing::new(first.image_id(), w, h, None, strokes)?
        }
    };
    Ok(ConsensusResult {
        kept: kept_idx,
        consensus_drawing,
        per_stroke_fractions: fractions,
    })
}

/// The drawings restricted to the strokes `r` kept.
pub fn kept_drawings(ds: &[Drawing], r: &ConsensusResult) -> Result<Vec<Drawing>> {
    ds.iter()
        .zip(&r.kept)
        .map(|(d, k)| d.with_strokes(k.iter().map(|&s| d.strokes()[s].clone()).collect()))
        .collect()
}
