#![allow(dead_code)]

use contourbench::raster::{BinaryMap, Pixel};
use contourbench::stroke::{Drawing, Point, Stroke};
use rand::Rng;

/// Best (cardinality, cost) over all matchings, by DP over the set of used
/// ground-truth pixels.
pub fn brute_force_matching(pred: &[Pixel], gt: &[Pixel], d_max: f64) -> (usize, f64) {
    assert!(gt.len() <= 16);
    let better = |a: (usize, f64), b: (usize, f64)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    let full = 1usize << gt.len();
    let mut best: Vec<Option<(usize, f64)>> = vec![None; full];
    best[0] = Some((0, 0.0));
    for p in pred {
        let mut next = best.clone();
        for mask in 0..full {
            let Some(cur) = best[mask] else { continue };
            for (j, g) in gt.iter().enumerate() {
                if mask & (1 << j) != 0 || p.distance(g) > d_max {
                    continue;
                }
                let cand = (cur.0 + 1, cur.1 + p.distance(g));
                let slot = &mut next[mask | (1 << j)];
                if slot.is_none_or(|s| better(cand, s)) {
                    *slot = Some(cand);
                }
            }
        }
        best = next;
    }
    best.into_iter()
        .flatten()
        .fold((0, 0.0), |acc, c| if better(c, acc) { c } else { acc })
}

/// Squared distance from every pixel to the nearest on-pixel, by scanning.
pub fn brute_force_edt(m: &BinaryMap) -> Vec<Option<u64>> {
    let on: Vec<Pixel> = m.on_pixels().collect();
    let mut out = Vec::with_capacity(m.width() as usize * m.height() as usize);
    for y in 0..m.height() {
        for x in 0..m.width() {
            let p = Pixel::new(x, y);
            out.push(on.iter().map(|q| p.sq_distance(q)).min());
        }
    }
    out
}

pub fn random_map(rng: &mut impl Rng, w: u32, h: u32, density: f64) -> BinaryMap {
    let bits = (0..w * h).map(|_| rng.random_bool(density)).collect();
    BinaryMap::from_bits(w, h, bits).unwrap()
}

/// `n` distinct random pixels of a `w`x`h` frame.
pub fn random_pixels(rng: &mut impl Rng, w: u32, h: u32, n: usize) -> Vec<Pixel> {
    let mut out: Vec<Pixel> = Vec::new();
    while out.len() < n {
        let p = Pixel::new(rng.random_range(0..w), rng.random_range(0..h));
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

pub fn random_stroke(rng: &mut impl Rng, order: u32, w: u32, h: u32) -> Stroke {
    loop {
        let n = rng.random_range(2..6);
        let pts = (0..n)
            .map(|_| Point::new(rng.random_range(0.0..f64::from(w)), rng.random_range(0.0..f64::from(h))))
            .collect();
        if let Ok(s) = Stroke::new(order, pts) {
            return s;
        }
    }
}

/// Copy of `d` with every control point moved by up to `jitter` and one
/// extra random stroke per `extra`.
pub fn annotator_copy(rng: &mut impl Rng, d: &Drawing, jitter: f64, extra: usize) -> Drawing {
    let mut strokes: Vec<Stroke> = d
        .strokes()
        .iter()
        .map(|s| {
            let pts = s
                .points()
                .iter()
                .map(|p| {
                    Point::new(
                        p.x + rng.random_range(-jitter..=jitter),
                        p.y + rng.random_range(-jitter..=jitter),
                    )
                })
                .collect();
            Stroke::new(s.order_index(), pts).unwrap()
        })
        .collect();
    let next = strokes.len() as u32;
    for k in 0..extra {
        strokes.push(random_stroke(rng, next + k as u32, d.width(), d.height()));
    }
    Drawing::new(d.image_id(), d.width(), d.height(), None, strokes).unwrap()
}
