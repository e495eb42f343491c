//! Vector drawings: points, strokes, drawings and their canonical JSON form.
//!
//! A [`Drawing`] is the unit of annotation. Its strokes keep drawing order
//! through `order_index` and every point is clamped into the image frame on
//! construction, so downstream code never sees coordinates outside
//! `[0, width] x [0, height]`.

mod dataset;
mod rasterize;
mod svg;

pub use dataset::{read_drawing, Dataset, ImageEntry};
pub use rasterize::{digital_line, rasterize_drawing, rasterize_stroke};
pub use svg::{import_svg, import_svg_with_tolerance, DEFAULT_FLATTEN_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A control point in image coordinates (origin top-left, pixels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// An ordered polyline with at least two points and no consecutive duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    order_index: u32,
    points: Vec<Point>,
}

impl Stroke {
    /// Builds a stroke, dropping consecutive duplicate points.
    pub fn new(order_index: u32, points: Vec<Point>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidDrawing(format!(
                "stroke {order_index} has non-finite point ({}, {})",
                p.x, p.y
            )));
        }
        let mut points = points;
        points.dedup();
        if points.len() < 2 {
            return Err(Error::InvalidDrawing(format!(
                "stroke {order_index} has fewer than 2 distinct points"
            )));
        }
        Ok(Self {
            order_index,
            points,
        })
    }

    pub fn order_index(&self) -> u32 {
        self.order_index
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Total polyline length in pixels.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// The same polyline under a different drawing-order index.
    pub fn with_order_index(&self, order_index: u32) -> Stroke {
        Stroke {
            order_index,
            points: self.points.clone(),
        }
    }
}

/// One annotator's drawing of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Drawing {
    image_id: String,
    width: u32,
    height: u32,
    annotator_id: Option<String>,
    strokes: Vec<Stroke>,
}

impl Drawing {
    /// Builds a drawing: clamps points into the frame, sorts strokes by
    /// `order_index` and rejects duplicate indices.
    pub fn new(
        image_id: impl Into<String>,
        width: u32,
        height: u32,
        annotator_id: Option<String>,
        strokes: Vec<Stroke>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDrawing(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        let (w, h) = (f64::from(width), f64::from(height));
        let mut clamped = Vec::with_capacity(strokes.len());
        for s in strokes {
            let points = s
                .points
                .iter()
                // `+ 0.0` turns -0.0 into 0.0
                .map(|p| Point::new(p.x.clamp(0.0, w) + 0.0, p.y.clamp(0.0, h) + 0.0))
                .collect();
            clamped.push(Stroke::new(s.order_index, points)?);
        }
        clamped.sort_by_key(|s| s.order_index);
        if let Some(w) = clamped
            .windows(2)
            .find(|w| w[0].order_index == w[1].order_index)
        {
            return Err(Error::InvalidDrawing(format!(
                "duplicate order_index {}",
                w[0].order_index
            )));
        }
        Ok(Self {
            image_id: image_id.into(),
            width,
            height,
            annotator_id,
            strokes: clamped,
        })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn annotator_id(&self) -> Option<&str> {
        self.annotator_id.as_deref()
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn control_point_count(&self) -> usize {
        self.strokes.iter().map(|s| s.points.len()).sum()
    }

    /// A drawing of the same image holding only the given strokes.
    pub fn with_strokes(&self, strokes: Vec<Stroke>) -> Result<Drawing> {
        Drawing::new(
            self.image_id.clone(),
            self.width,
            self.height,
            self.annotator_id.clone(),
            strokes,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct StrokeDoc {
    order_index: u32,
    points: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct DrawingDoc {
    image_id: String,
    width: i64,
    height: i64,
    #[serde(default)]
    annotator_id: Option<String>,
    strokes: Vec<StrokeDoc>,
}

impl DrawingDoc {
    fn from_drawing(d: &Drawing) -> Self {
        DrawingDoc {
            image_id: d.image_id.clone(),
            width: i64::from(d.width),
            height: i64::from(d.height),
            annotator_id: d.annotator_id.clone(),
            strokes: d
                .strokes
                .iter()
                .map(|s| StrokeDoc {
                    order_index: s.order_index,
                    points: s.points.clone(),
                })
                .collect(),
        }
    }

    fn into_drawing(self) -> Result<Drawing> {
        let dim = |v: i64, name: &str| {
            u32::try_from(v).ok().filter(|&v| v > 0).ok_or_else(|| {
                Error::InvalidDrawing(format!("{name} must be a positive integer, got {v}"))
            })
        };
        let width = dim(self.width, "width")?;
        let height = dim(self.height, "height")?;
        let strokes = self
            .strokes
            .into_iter()
            .map(|s| Stroke::new(s.order_index, s.points))
            .collect::<Result<Vec<_>>>()?;
        Drawing::new(self.image_id, width, height, self.annotator_id, strokes)
    }
}

impl Serialize for Drawing {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DrawingDoc::from_drawing(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Drawing {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        DrawingDoc::deserialize(deserializer)?
            .into_drawing()
            .map_err(serde::de::Error::custom)
    }
}

/// Parses a canonical drawing JSON document, enforcing the drawing
/// invariants (clamping, duplicate-point removal, stroke ordering).
pub fn parse_drawing(text: &str) -> Result<Drawing> {
    let doc: DrawingDoc = serde_json::from_str(text)?;
    doc.into_drawing()
}

/// Serializes a drawing to its canonical single-line JSON form.
///
/// Key order follows the schema and floats use the shortest representation
/// that parses back to the same value, so output is byte-stable.
pub fn serialize_drawing(d: &Drawing) -> String {
    serde_json::to_string(&DrawingDoc::from_drawing(d)).expect("drawing documents always serialize")
}

/// Resamples a stroke so that consecutive points are at most `spacing` apart
/// along the polyline.
///
/// Every input vertex is kept and each segment is split into equal pieces,
/// which makes the operation idempotent. A stroke no longer than `spacing`
/// collapses to its two endpoints.
pub fn resample_stroke(s: &Stroke, spacing: f64) -> Result<Stroke> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spacing must be positive and finite, got {spacing}"
        )));
    }
    let first = s.points[0];
    let last = *s.points.last().expect("strokes have at least two points");
    if s.length() <= spacing {
        return Stroke::new(s.order_index, vec![first, last]);
    }
    let mut out = vec![first];
    for w in s.points.windows(2) {
        let pieces = (w[0].distance(&w[1]) / spacing).ceil().max(1.0) as usize;
        for k in 1..pieces {
            out.push(w[0].lerp(&w[1], k as f64 / pieces as f64));
        }
        out.push(w[1]);
    }
    Stroke::new(s.order_index, out)
}

/// Collection-level means used to sanity-check a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawingStats {
    pub n_drawings: usize,
    pub mean_strokes: f64,
    pub mean_control_points: f64,
}

pub fn drawing_stats<'a, I>(drawings: I) -> Result<DrawingStats>
where
    I: IntoIterator<Item = &'a Drawing>,
{
    let (n, strokes, points) = drawings
        .into_iter()
        .fold((0usize, 0usize, 0usize), |(n, s, p), d| {
            (n + 1, s + d.strokes.len(), p + d.control_point_count())
        });
    if n == 0 {
        return Err(Error::Empty("drawing collection"));
    }
    Ok(DrawingStats {
        n_drawings: n,
        mean_strokes: strokes as f64 / n as f64,
        mean_control_points: points as f64 / n as f64,
    })
}
