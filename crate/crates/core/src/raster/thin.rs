//! Zhang–Suen two-subcycle thinning.

use std::collections::VecDeque;

use super::BinaryMap;

/// Offsets of P2..P9, clockwise from north.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Thins `m` to a one-pixel-wide skeleton, iterating both subcycles until
/// neither removes a pixel.
///
/// Classic Zhang–Suen can erase a component entirely (2x2 blocks, two-pixel
/// thick diagonals). When a subcycle would remove every pixel of an
/// 8-connected component, its first pixel in raster order is kept.
pub fn thin(m: &BinaryMap) -> BinaryMap {
    let mut cur = m.clone();
    loop {
        let a = subcycle(&mut cur, true);
        let b = subcycle(&mut cur, false);
        if !a && !b {
            return cur;
        }
    }
}

fn subcycle(m: &mut BinaryMap, first: bool) -> bool {
    let (w, h) = m.dims();
    let mut marked = vec![false; m.bits().len()];
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            if m.get(x, y) && deletable(m, x, y, first) {
                marked[(y * w + x) as usize] = true;
                any = true;
            }
        }
    }
    if !any {
        return false;
    }
    keep_one_per_vanishing_component(m, &mut marked);
    let mut changed = false;
    for (i, del) in marked.iter().enumerate() {
        if *del {
            m.set(i as u32 % w, i as u32 / w, false);
            changed = true;
        }
    }
    changed
}

fn deletable(m: &BinaryMap, x: u32, y: u32, first: bool) -> bool {
    let p: [bool; 8] = RING.map(|(dx, dy)| m.get_signed(i64::from(x) + dx, i64::from(y) + dy));
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let [p2, _, p4, _, p6, _, p8, _] = p;
    if first {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}

fn keep_one_per_vanishing_component(m: &BinaryMap, marked: &mut [bool]) {
    let w = m.width();
    let mut seen = vec![false; marked.len()];
    let mut queue = VecDeque::new();
    for start in 0..marked.len() {
        if seen[start] || !m.bits()[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut all_marked = true;
        while let Some(i) = queue.pop_front() {
            all_marked &= marked[i];
            let (x, y) = (i64::from(i as u32 % w), i64::from(i as u32 / w));
            for (dx, dy) in RING {
                let (nx, ny) = (x + dx, y + dy);
                if m.get_signed(nx, ny) {
                    let j = (ny as u32 * w + nx as u32) as usize;
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        // `start` is the component's first pixel in raster order
        if all_marked {
            marked[start] = false;
        }
    }
}
