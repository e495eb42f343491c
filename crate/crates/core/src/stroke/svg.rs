//! SVG import. Only `path` elements built from M/L/C commands (absolute or
//! relative) and `polyline` elements are understood; cubic segments are
//! flattened by recursive subdivision.

use svgtypes::{PathParser, PathSegment, PointsParser};

use super::{Drawing, Point, Stroke};
use crate::error::{Error, Result};

/// Default maximum chord deviation when flattening cubic segments, in pixels.
pub const DEFAULT_FLATTEN_TOL: f64 = 0.25;

const MAX_SUBDIVISION_DEPTH: u32 = 24;

pub fn import_svg(text: &str, image_id: &str) -> Result<Drawing> {
    import_svg_with_tolerance(text, image_id, DEFAULT_FLATTEN_TOL)
}

/// Imports an SVG document; each path (sub-path) or polyline becomes one
/// stroke, numbered in document order.
pub fn import_svg_with_tolerance(text: &str, image_id: &str, flatten_tol: f64) -> Result<Drawing> {
    if flatten_tol.is_nan() || flatten_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "flatten tolerance must be positive, got {flatten_tol}"
        )));
    }
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::Svg(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(Error::Svg(format!("root element is <{}>", root.tag_name().name())));
    }
    let width = dimension(&root, "width")?;
    let height = dimension(&root, "height")?;

    let mut polylines: Vec<Vec<Point>> = Vec::new();
    for node in root.descendants().filter(|n| n.is_element()) {
        if node.attribute("transform").is_some() {
            return Err(Error::UnsupportedSvg("transform attribute".into()));
        }
        match node.tag_name().name() {
            "path" => {
                let d = node
                    .attribute("d")
                    .ok_or_else(|| Error::Svg("<path> without a d attribute".into()))?;
                polylines.extend(flatten_path(d, flatten_tol)?);
            }
            "polyline" => {
                let pts = node.attribute("points").unwrap_or("");
                polylines.push(PointsParser::from(pts).map(|(x, y)| Point::new(x, y)).collect());
            }
            "svg" | "g" | "title" | "desc" | "metadata" | "defs" => {}
            other => return Err(Error::UnsupportedSvg(format!("<{other}> element"))),
        }
    }
    let strokes = polylines
        .into_iter()
        .enumerate()
        .map(|(i, pts)| Stroke::new(i as u32, pts))
        .collect::<Result<Vec<_>>>()?;
    Drawing::new(image_id, width, height, None, strokes)
}

fn dimension(node: &roxmltree::Node<'_, '_>, name: &str) -> Result<u32> {
    let raw = node
        .attribute(name)
        .ok_or_else(|| Error::Svg(format!("missing {name} attribute")))?;
    let number = raw.trim().trim_end_matches("px");
    let v: f64 = number
        .parse()
        .map_err(|_| Error::Svg(format!("{name}={raw:?} is not a pixel length")))?;
    if v.is_nan() || v < 0.5 || v > f64::from(u32::MAX) {
        return Err(Error::Svg(format!("{name}={raw:?} is not a positive size")));
    }
    Ok(v.round() as u32)
}

fn flatten_path(d: &str, tol: f64) -> Result<Vec<Vec<Point>>> {
    let mut out: Vec<Vec<Point>> = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    let mut pos = Point::new(0.0, 0.0);
    let resolve = |abs: bool, pos: Point, x: f64, y: f64| {
        if abs {
            Point::new(x, y)
        } else {
            Point::new(pos.x + x, pos.y + y)
        }
    };
    for seg in PathParser::from(d) {
        let seg = seg.map_err(|e| Error::Svg(e.to_string()))?;
        match seg {
            PathSegment::MoveTo { abs, x, y } => {
                if current.len() > 1 {
                    out.push(std::mem::take(&mut current));
                }
                pos = resolve(abs, pos, x, y);
                current = vec![pos];
            }
            PathSegment::LineTo { abs, x, y } => {
                pos = resolve(abs, pos, x, y);
                current.push(pos);
            }
            PathSegment::CurveTo { abs, x1, y1, x2, y2, x, y } => {
                let c1 = resolve(abs, pos, x1, y1);
                let c2 = resolve(abs, pos, x2, y2);
                let end = resolve(abs, pos, x, y);
                flatten_cubic([pos, c1, c2, end], tol, 0, &mut current);
                pos = end;
            }
            other => {
                return Err(Error::UnsupportedSvg(format!("path command {other:?}")));
            }
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&Point::new(a.x + t * dx, a.y + t * dy))
}

/// Appends the flattened cubic (excluding its start point) to `out`.
///
/// The curve lies in the convex hull of its control points, so once both
/// inner control points are within `tol` of the chord the chord is within
/// `tol` of the curve.
fn flatten_cubic(c: [Point; 4], tol: f64, depth: u32, out: &mut Vec<Point>) {
    let flat = segment_distance(c[1], c[0], c[3]).max(segment_distance(c[2], c[0], c[3])) <= tol;
    if flat || depth >= MAX_SUBDIVISION_DEPTH {
        out.push(c[3]);
        return;
    }
    let m01 = c[0].lerp(&c[1], 0.5);
    let m12 = c[1].lerp(&c[2], 0.5);
    let m23 = c[2].lerp(&c[3], 0.5);
    let m012 = m01.lerp(&m12, 0.5);
    let m123 = m12.lerp(&m23, 0.5);
    let mid = m012.lerp(&m123, 0.5);
    flatten_cubic([c[0], m01, m012, mid], tol, depth + 1, out);
    flatten_cubic([mid, m123, m23, c[3]], tol, depth + 1, out);
}
