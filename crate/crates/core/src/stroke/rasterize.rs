use super::{Drawing, Point, Stroke};
use crate::error::{Error, Result};
use crate::raster::BinaryMap;

/// Integer pixels of the 8-connected digital line from `a` to `b`
/// (Bresenham / midpoint form, endpoints included).
pub fn digital_line(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x, y));
        if (x, y) == b {
            return out;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn output_dims(d: &Drawing, scale: f64) -> Result<(u32, u32)> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    let w = (f64::from(d.width()) * scale).round();
    let h = (f64::from(d.height()) * scale).round();
    if w < 1.0 || h < 1.0 || w > f64::from(u32::MAX) || h > f64::from(u32::MAX) {
        return Err(Error::InvalidArgument(format!(
            "scale {scale} gives a {w}x{h} raster"
        )));
    }
    Ok((w as u32, h as u32))
}

fn to_pixel(p: &Point, scale: f64, w: u32, h: u32) -> (i64, i64) {
    let x = (p.x * scale).round() as i64;
    let y = (p.y * scale).round() as i64;
    (x.clamp(0, i64::from(w) - 1), y.clamp(0, i64::from(h) - 1))
}

fn render<'a>(strokes: impl IntoIterator<Item = &'a Stroke>, w: u32, h: u32, scale: f64) -> BinaryMap {
    let mut map = BinaryMap::new(w, h);
    for s in strokes {
        let pixels: Vec<_> = s.points().iter().map(|p| to_pixel(p, scale, w, h)).collect();
        map.set(pixels[0].0 as u32, pixels[0].1 as u32, true);
        for seg in pixels.windows(2) {
            for (x, y) in digital_line(seg[0], seg[1]) {
                map.set(x as u32, y as u32, true);
            }
        }
    }
    map
}

/// Renders every stroke as one-pixel-wide 8-connected lines, without
/// anti-aliasing. Point `(x, y)` lands on pixel `round(x * scale), round(y * scale)`,
/// clamped into the raster.
pub fn rasterize_drawing(d: &Drawing, scale: f64) -> Result<BinaryMap> {
    let (w, h) = output_dims(d, scale)?;
    Ok(render(d.strokes(), w, h, scale))
}

/// Renders a single stroke of `d`'s image frame at scale 1.
pub fn rasterize_stroke(s: &Stroke, width: u32, height: u32) -> BinaryMap {
    render([s], width, height, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn drawing(strokes: &[&[(f64, f64)]]) -> Drawing {
        let strokes = strokes
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Stroke::new(i as u32, s.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
            })
            .collect();
        Drawing::new("t", 8, 8, None, strokes).unwrap()
    }

    fn on_pixels(m: &BinaryMap) -> BTreeSet<(u32, u32)> {
        m.on_pixels().map(|p| (p.x, p.y)).collect()
    }

    #[test]
    fn axis_aligned_line() {
        let m = rasterize_drawing(&drawing(&[&[(0.0, 0.0), (3.0, 0.0)]]), 1.0).unwrap();
        assert_eq!(on_pixels(&m), BTreeSet::from([(0, 0), (1, 0), (2, 0), (3, 0)]));
    }

    #[test]
    fn empty_drawing_is_blank() {
        let m = rasterize_drawing(&drawing(&[]), 1.0).unwrap();
        assert_eq!(m.count_on(), 0);
        assert_eq!(m.dims(), (8, 8));
    }

    #[test]
    fn output_dims_follow_scale() {
        let m = rasterize_drawing(&drawing(&[]), 0.5).unwrap();
        assert_eq!(m.dims(), (4, 4));
        assert!(rasterize_drawing(&drawing(&[]), 0.01).is_err());
        assert!(rasterize_drawing(&drawing(&[]), 0.0).is_err());
    }

    /// Samples the segment every 0.01 px along its major axis and keeps, per
    /// major-axis column, the pixel whose centre is closest to the true line.
    fn dense_sampling_line(a: (f64, f64), b: (f64, f64)) -> BTreeSet<(i64, i64)> {
        let len = ((b.0 - a.0).abs()).max((b.1 - a.1).abs());
        let steps = (len / 0.01).round() as usize;
        let x_major = (b.0 - a.0).abs() >= (b.1 - a.1).abs();
        let line_dist = |px: f64, py: f64| {
            ((b.1 - a.1) * px - (b.0 - a.0) * py + b.0 * a.1 - b.1 * a.0).abs()
        };
        let mut best: std::collections::BTreeMap<i64, ((i64, i64), f64)> = Default::default();
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let p = (
                (a.0 + t * (b.0 - a.0)).round() as i64,
                (a.1 + t * (b.1 - a.1)).round() as i64,
            );
            let key = if x_major { p.0 } else { p.1 };
            let d = line_dist(p.0 as f64, p.1 as f64);
            let e = best.entry(key).or_insert((p, d));
            if d < e.1 {
                *e = (p, d);
            }
        }
        best.into_values().map(|(p, _)| p).collect()
    }

    #[test]
    fn oblique_line_matches_dense_sampling() {
        let m = rasterize_drawing(&drawing(&[&[(0.0, 0.0), (3.0, 2.0)]]), 1.0).unwrap();
        let got: BTreeSet<(i64, i64)> =
            on_pixels(&m).into_iter().map(|(x, y)| (x as i64, y as i64)).collect();
        let want = dense_sampling_line((0.0, 0.0), (3.0, 2.0));
        assert_eq!(got, want);
        assert_eq!(want, BTreeSet::from([(0, 0), (1, 1), (2, 1), (3, 2)]));
    }

    #[test]
    fn digital_lines_in_every_octant_are_8_connected() {
        for &(bx, by) in &[(7, 2), (2, 7), (-2, 7), (-7, 2), (-7, -2), (-2, -7), (2, -7), (7, -2), (5, 5), (0, -4)] {
            let line = digital_line((0, 0), (bx, by));
            assert_eq!(line.first(), Some(&(0, 0)));
            assert_eq!(line.last(), Some(&(bx, by)));
            assert_eq!(line.len() as i64, bx.abs().max(by.abs()) + 1);
            for w in line.windows(2) {
                assert!((w[0].0 - w[1].0).abs() <= 1 && (w[0].1 - w[1].1).abs() <= 1);
            }
        }
    }
}
