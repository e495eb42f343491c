//! Dataset-level boundary benchmark: per-image counts across thresholds and
//! ODS / OIS aggregation over summed counts.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::matching::{f1, match_pixels, PrecisionRecall, Tolerance};
use crate::raster::{nms, thin, threshold, BinaryMap, SoftMap};
use crate::stroke::{rasterize_drawing, Drawing};

/// 0.01, 0.02, ..., 0.99.
pub fn default_thresholds() -> Vec<f64> {
    (1..=99).map(|k| k as f64 / 100.0).collect()
}

#[derive(Debug, Clone)]
pub enum Prediction {
    /// Confidence map, binarized per threshold.
    Soft(SoftMap),
    /// Vector drawing, rasterized once and scored at the pseudo-threshold 0.
    Drawing(Drawing),
}

impl Prediction {
    fn dims(&self) -> (u32, u32) {
        match self {
            Prediction::Soft(m) => m.dims(),
            Prediction::Drawing(d) => d.dims(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Suppress non-maxima of soft maps before thresholding.
    pub nms: bool,
    /// Thin binarized soft maps before matching.
    pub thin: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { nms: true, thin: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCounts {
    pub t: f64,
    pub n_pred: usize,
    pub n_gt: usize,
    pub n_matched: usize,
}

impl ThresholdCounts {
    fn metrics(&self) -> PrecisionRecall {
        PrecisionRecall::from_counts(self.n_matched, self.n_pred, self.n_gt)
            .expect("matched counts never exceed either side")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEval {
    pub image_id: String,
    /// Strictly increasing in `t`.
    pub counts: Vec<ThresholdCounts>,
}

impl ImageEval {
    /// Index of the best-F1 threshold (lowest threshold on ties).
    pub fn best_index(&self) -> usize {
        best_f1_index(self.counts.iter().map(|c| c.metrics().f1()))
    }
}

fn best_f1_index(f1s: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, f) in f1s.enumerate() {
        if f > best.1 {
            best = (i, f);
        }
    }
    best.0
}

fn validate_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::Empty("threshold list"));
    }
    if let Some(t) = thresholds.iter().find(|t| !(0.0..1.0).contains(*t)) {
        return Err(Error::InvalidArgument(format!("threshold {t} outside [0, 1)")));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("thresholds must be strictly increasing".into()));
    }
    Ok(())
}

/// Scores one prediction against the (consensus) ground-truth drawing.
pub fn evaluate_prediction(
    pred: &Prediction,
    gt: &Drawing,
    tol: &Tolerance,
    thresholds: &[f64],
    opts: &EvalOptions,
) -> Result<ImageEval> {
    check_dims(gt.dims(), pred.dims())?;
    let gt_map = rasterize_drawing(gt, 1.0)?;
    let n_gt = gt_map.count_on();
    let score = |t: f64, binary: &BinaryMap| -> Result<ThresholdCounts> {
        let r = match_pixels(binary, &gt_map, tol)?;
        Ok(ThresholdCounts {
            t,
            n_pred: binary.count_on(),
            n_gt,
            n_matched: r.n_matched(),
        })
    };
    let counts = match pred {
        Prediction::Drawing(d) => vec![score(0.0, &rasterize_drawing(d, 1.0)?)?],
        Prediction::Soft(m) => {
            validate_thresholds(thresholds)?;
            let suppressed = if opts.nms { nms(m) } else { m.clone() };
            let mut counts: Vec<ThresholdCounts> = Vec::with_capacity(thresholds.len());
            let mut previous: Option<BinaryMap> = None;
            for &t in thresholds {
                let b = threshold(&suppressed, t)?;
                let b = if opts.thin { thin(&b) } else { b };
                // neighbouring thresholds often give the same map
                let c = match (&previous, counts.last()) {
                    (Some(p), Some(last)) if *p == b => ThresholdCounts { t, ..*last },
                    _ => score(t, &b)?,
                };
                counts.push(c);
                previous = Some(b);
            }
            counts
        }
    };
    Ok(ImageEval {
        image_id: gt.image_id().to_owned(),
        counts,
    })
}

/// Evaluates many (prediction, ground truth) pairs in parallel, each with a
/// tolerance of `diagonal_fraction` of its own diagonal.
pub fn evaluate_many(
    jobs: &[(Prediction, Drawing)],
    diagonal_fraction: f64,
    thresholds: &[f64],
    opts: &EvalOptions,
) -> Result<Vec<ImageEval>> {
    jobs.par_iter()
        .map(|(pred, gt)| {
            let tol = Tolerance::from_diagonal(gt.width(), gt.height(), diagonal_fraction)?;
            evaluate_prediction(pred, gt, &tol, thresholds, opts)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdsMetrics {
    pub t: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OisMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Aggregate metrics at one threshold, from counts summed over images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub t: f64,
    pub n_pred: usize,
    pub n_gt: usize,
    pub n_matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub ods: OdsMetrics,
    pub ois: OisMetrics,
    pub per_threshold: Vec<ThresholdSummary>,
    pub per_image: Vec<ImageEval>,
}

fn summarize(t: f64, n_matched: usize, n_pred: usize, n_gt: usize) -> ThresholdSummary {
    let pr = PrecisionRecall::from_counts(n_matched, n_pred, n_gt).expect("summed counts stay consistent");
    ThresholdSummary {
        t,
        n_pred,
        n_gt,
        n_matched,
        precision: pr.precision,
        recall: pr.recall,
        f1: f1(pr.precision, pr.recall),
    }
}

/// ODS: best single threshold for the summed counts. OIS: each image at its
/// own best threshold, counts summed. Both micro-average.
pub fn aggregate(per_image: Vec<ImageEval>) -> Result<EvalSummary> {
    let first = per_image.first().ok_or(Error::Empty("image evaluations"))?;
    let grid: Vec<f64> = first.counts.iter().map(|c| c.t).collect();
    if grid.is_empty() {
        return Err(Error::Empty("threshold grid"));
    }
    for e in &per_image {
        if e.counts.len() != grid.len() || e.counts.iter().zip(&grid).any(|(c, t)| c.t != *t) {
            return Err(Error::InvalidArgument(format!(
                "image {:?} was evaluated on a different threshold grid",
                e.image_id
            )));
        }
        if let Some(c) = e.counts.iter().find(|c| c.n_matched > c.n_pred.min(c.n_gt)) {
            return Err(Error::InvalidArgument(format!(
                "image {:?} has {} matches at t={}",
                e.image_id, c.n_matched, c.t
            )));
        }
    }

    let per_threshold: Vec<ThresholdSummary> = grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let (m, p, g) = per_image.iter().fold((0, 0, 0), |(m, p, g), e| {
                let c = &e.counts[k];
                (m + c.n_matched, p + c.n_pred, g + c.n_gt)
            });
            summarize(t, m, p, g)
        })
        .collect();
    let best = &per_threshold[best_f1_index(per_threshold.iter().map(|s| s.f1))];
    let ods = OdsMetrics {
        t: best.t,
        precision: best.precision,
        recall: best.recall,
        f1: best.f1,
    };

    let (m, p, g) = per_image.iter().fold((0, 0, 0), |(m, p, g), e| {
        let c = &e.counts[e.best_index()];
        (m + c.n_matched, p + c.n_pred, g + c.n_gt)
    });
    let o = summarize(f64::NAN, m, p, g);
    let ois = OisMetrics {
        precision: o.precision,
        recall: o.recall,
        f1: o.f1,
    };
    Ok(EvalSummary {
        ods,
        ois,
        per_threshold,
        per_image,
    })
}

/// Per-threshold aggregate table as CSV.
pub fn write_threshold_csv<W: Write>(summary: &EvalSummary, mut out: W) -> std::io::Result<()> {
    writeln!(out, "threshold,n_pred,n_gt,n_matched,precision,recall,f1")?;
    for s in &summary.per_threshold {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            s.t, s.n_pred, s.n_gt, s.n_matched, s.precision, s.recall, s.f1
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke::{Point, Stroke};

    fn counts(t: f64, m: usize, p: usize, g: usize) -> ThresholdCounts {
        ThresholdCounts { t, n_pred: p, n_gt: g, n_matched: m }
    }

    fn image(id: &str, c: Vec<ThresholdCounts>) -> ImageEval {
        ImageEval { image_id: id.into(), counts: c }
    }

    fn gt_drawing() -> Drawing {
        let s = |i, a: (f64, f64), b: (f64, f64)| {
            Stroke::new(i, vec![Point::new(a.0, a.1), Point::new(b.0, b.1)]).unwrap()
        };
        Drawing::new("g", 16, 16, None, vec![s(0, (2.0, 2.0), (13.0, 2.0)), s(1, (3.0, 5.0), (3.0, 14.0))]).unwrap()
    }

    #[test]
    fn perfect_drawing_prediction() {
        let gt = gt_drawing();
        let tol = Tolerance::default_for(16, 16);
        let e = evaluate_prediction(&Prediction::Drawing(gt.clone()), &gt, &tol, &default_thresholds(), &EvalOptions::default())
            .unwrap();
        assert_eq!(e.counts.len(), 1);
        let c = e.counts[0];
        assert_eq!(c.t, 0.0);
        assert_eq!((c.n_matched, c.n_pred), (c.n_gt, c.n_gt));
        let s = aggregate(vec![e]).unwrap();
        assert_eq!(s.ods.f1, 1.0);
    }

    #[test]
    fn perfect_soft_prediction() {
        let gt = gt_drawing();
        let soft = rasterize_drawing(&gt, 1.0).unwrap().to_soft();
        let tol = Tolerance::default_for(16, 16);
        let e = evaluate_prediction(&Prediction::Soft(soft), &gt, &tol, &default_thresholds(), &EvalOptions::default())
            .unwrap();
        assert!(e.counts.iter().all(|c| c.n_matched == c.n_gt && c.n_pred == c.n_gt));
        assert_eq!(aggregate(vec![e]).unwrap().ods.f1, 1.0);
    }

    #[test]
    fn blank_prediction_has_zero_recall() {
        let gt = gt_drawing();
        let tol = Tolerance::default_for(16, 16);
        let e = evaluate_prediction(&Prediction::Soft(SoftMap::zeros(16, 16)), &gt, &tol, &default_thresholds(), &EvalOptions::default())
            .unwrap();
        assert!(e.counts.iter().all(|c| c.n_pred == 0 && c.n_matched == 0 && c.n_gt > 0));
        let s = aggregate(vec![e]).unwrap();
        assert_eq!(s.ods.recall, 0.0);
        assert_eq!(s.ods.f1, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let gt = gt_drawing();
        let tol = Tolerance::default_for(16, 16);
        let o = EvalOptions::default();
        let pred = Prediction::Soft(SoftMap::zeros(16, 16));
        assert!(evaluate_prediction(&pred, &gt, &tol, &[], &o).is_err());
        assert!(evaluate_prediction(&pred, &gt, &tol, &[0.5, 0.2], &o).is_err());
        assert!(evaluate_prediction(&pred, &gt, &tol, &[1.0], &o).is_err());
        let small = Prediction::Soft(SoftMap::zeros(8, 16));
        assert!(evaluate_prediction(&small, &gt, &tol, &[0.5], &o).is_err());
        assert!(aggregate(vec![]).is_err());
        let mismatch = vec![
            image("a", vec![counts(0.3, 1, 1, 1)]),
            image("b", vec![counts(0.4, 1, 1, 1)]),
        ];
        assert!(aggregate(mismatch).is_err());
    }

    #[test]
    fn single_image_ods_equals_ois() {
        let s = aggregate(vec![image("a", vec![counts(0.2, 5, 10, 8), counts(0.5, 4, 5, 8), counts(0.8, 1, 1, 8)])]).unwrap();
        assert_eq!(s.ods.f1, s.ois.f1);
        assert_eq!(s.ods.precision, s.ois.precision);
        assert_eq!(s.ods.recall, s.ois.recall);
    }

    #[test]
    fn per_image_optimum_dominates() {
        // image a peaks at 0.3, image b at 0.7
        let a = image("a", vec![counts(0.3, 9, 10, 10), counts(0.7, 2, 2, 10)]);
        let b = image("b", vec![counts(0.3, 8, 40, 10), counts(0.7, 8, 9, 10)]);
        assert_eq!(a.best_index(), 0);
        assert_eq!(b.best_index(), 1);
        let s = aggregate(vec![a, b]).unwrap();
        assert!(s.ois.f1 >= s.ods.f1);
        assert!(s.ois.f1 > s.ods.f1);
    }

    #[test]
    fn three_image_fixture_by_hand() {
        let grid = [0.25, 0.5, 0.75];
        let imgs = vec![
            image("a", vec![counts(grid[0], 8, 16, 10), counts(grid[1], 7, 9, 10), counts(grid[2], 3, 3, 10)]),
            image("b", vec![counts(grid[0], 20, 40, 20), counts(grid[1], 18, 24, 20), counts(grid[2], 10, 11, 20)]),
            image("c", vec![counts(grid[0], 5, 6, 5), counts(grid[1], 2, 2, 5), counts(grid[2], 0, 0, 5)]),
        ];
        // summed counts per threshold:
        //   0.25: m=33 p=62 g=35 -> P=.5323 R=.9429 F=.6804
        //   0.50: m=27 p=35 g=35 -> P=R=F=.7714
        //   0.75: m=13 p=14 g=35 -> P=.9286 R=.3714 F=.5306
        // per-image best: a@0.5 (F .7368), b@0.5 (F .8182), c@0.25 (F .9091)
        //   sums m=30 p=39 g=35 -> P=.7692 R=.8571 F=.8108
        let s = aggregate(imgs).unwrap();
        assert_eq!(s.ods.t, 0.5);
        assert!((s.ods.f1 - 27.0 / 35.0).abs() < 1e-12);
        let (p, r) = (30.0 / 39.0, 30.0 / 35.0);
        assert!((s.ois.precision - p).abs() < 1e-12);
        assert!((s.ois.recall - r).abs() < 1e-12);
        assert!((s.ois.f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
        assert!((s.per_threshold[0].f1 - 2.0 * (33.0 / 62.0) * (33.0 / 35.0) / (33.0 / 62.0 + 33.0 / 35.0)).abs() < 1e-12);
    }

    #[test]
    fn micro_average_differs_from_macro_average() {
        // one tiny perfect image and one large poor image
        let imgs = vec![image("small", vec![counts(0.5, 1, 1, 1)]), image("large", vec![counts(0.5, 10, 100, 100)])];
        let s = aggregate(imgs).unwrap();
        let micro = 11.0 / 101.0;
        let macro_f1 = (1.0 + 0.1) / 2.0;
        assert!((s.ods.f1 - micro).abs() < 1e-12);
        assert!((s.ods.f1 - macro_f1).abs() > 0.1);
    }

    #[test]
    fn csv_has_one_row_per_threshold() {
        let s = aggregate(vec![image("a", vec![counts(0.25, 1, 2, 2), counts(0.5, 1, 1, 2)])]).unwrap();
        let mut buf = Vec::new();
        write_threshold_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("0.5,1,2,1,1.000000,0.500000,"));
    }
}
