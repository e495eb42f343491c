//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher lower
//! envelope of parabolas), computed in integer squared distances.

use super::BinaryMap;

/// Squared distance to the nearest on-pixel, per pixel. `None` when the
/// source map has no on-pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    width: u32,
    height: u32,
    sq: Vec<Option<u64>>,
}

impl DistanceField {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn sq_distance(&self, x: u32, y: u32) -> Option<u64> {
        self.sq[y as usize * self.width as usize + x as usize]
    }

    /// Euclidean distance; `f64::INFINITY` when the source map was empty.
    pub fn distance(&self, x: u32, y: u32) -> f64 {
        self.sq_distance(x, y).map_or(f64::INFINITY, |d| (d as f64).sqrt())
    }

    pub fn sq_distances(&self) -> &[Option<u64>] {
        &self.sq
    }
}

pub fn distance_transform(m: &BinaryMap) -> DistanceField {
    let (w, h) = (m.width() as usize, m.height() as usize);

    // vertical pass: distance to the nearest on-pixel in the same column
    let mut col: Vec<Option<u64>> = vec![None; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if m.bits()[y * w + x] {
                last = Some(y);
            }
            col[y * w + x] = last.map(|l| (y - l) as u64);
        }
        let mut next: Option<usize> = None;
        for y in (0..h).rev() {
            if m.bits()[y * w + x] {
                next = Some(y);
            }
            if let Some(n) = next {
                let d = (n - y) as u64;
                let slot = &mut col[y * w + x];
                *slot = Some(slot.map_or(d, |c| c.min(d)));
            }
        }
    }

    // horizontal pass: lower envelope of parabolas (q - p)^2 + col(p)^2
    let mut sq = vec![None; w * h];
    let mut sites: Vec<i64> = Vec::with_capacity(w);
    let mut bounds: Vec<f64> = Vec::with_capacity(w + 1);
    for y in 0..h {
        let row = &col[y * w..(y + 1) * w];
        let f = |p: i64| -> i64 {
            let c = row[p as usize].expect("only finite sites enter the envelope") as i64;
            c * c
        };
        sites.clear();
        bounds.clear();
        for q in 0..w as i64 {
            if row[q as usize].is_none() {
                continue;
            }
            loop {
                let Some(&v) = sites.last() else {
                    sites.push(q);
                    bounds.push(f64::NEG_INFINITY);
                    break;
                };
                let s = ((f(q) + q * q) - (f(v) + v * v)) as f64 / (2 * (q - v)) as f64;
                if s <= *bounds.last().unwrap() {
                    sites.pop();
                    bounds.pop();
                } else {
                    sites.push(q);
                    bounds.push(s);
                    break;
                }
            }
        }
        if sites.is_empty() {
            continue;
        }
        let mut k = 0;
        for q in 0..w as i64 {
            while k + 1 < sites.len() && bounds[k + 1] < q as f64 {
                k += 1;
            }
            let v = sites[k];
            sq[y * w + q as usize] = Some(((q - v) * (q - v) + f(v)) as u64);
        }
    }
    DistanceField {
        width: m.width(),
        height: m.height(),
        sq,
    }
}
