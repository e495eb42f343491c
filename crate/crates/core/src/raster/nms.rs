use super::SoftMap;

/// Non-maximum suppression across the boundary direction.
///
/// The gradient comes from 3x3 Sobel kernels with replicated borders and is
/// quantized to one of four orientations (0, 45, 90, 135 degrees). A value
/// survives iff it is `>=` both neighbours along that orientation; outside
/// the map reads as 0. Pixels with zero gradient use the horizontal
/// orientation.
pub fn nms(m: &SoftMap) -> SoftMap {
    let (w, h) = (i64::from(m.width()), i64::from(m.height()));
    let at = |x: i64, y: i64| m.get(x.clamp(0, w - 1) as u32, y.clamp(0, h - 1) as u32);
    let at_or_zero = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            m.get(x as u32, y as u32)
        }
    };
    let mut out = Vec::with_capacity(m.values().len());
    for y in 0..h {
        for x in 0..w {
            let v = m.get(x as u32, y as u32);
            if v == 0.0 {
                out.push(0.0);
                continue;
            }
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let (dx, dy) = quantize(gx, gy);
            let keep = v >= at_or_zero(x + dx, y + dy) && v >= at_or_zero(x - dx, y - dy);
            out.push(if keep { v } else { 0.0 });
        }
    }
    SoftMap::new(m.width(), m.height(), out).expect("suppression keeps values in range")
}

/// Neighbour step along the gradient, in image coordinates (y down).
fn quantize(gx: f64, gy: f64) -> (i64, i64) {
    if gx == 0.0 && gy == 0.0 {
        return (1, 0);
    }
    let mut deg = gy.atan2(gx).to_degrees();
    if deg < 0.0 {
        deg += 180.0;
    }
    if deg >= 180.0 {
        deg -= 180.0;
    }
    match deg {
        d if !(22.5..157.5).contains(&d) => (1, 0),
        d if d < 67.5 => (1, 1),
        d if d < 112.5 => (0, 1),
        _ => (-1, 1),
    }
}
