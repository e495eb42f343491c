//! Binary and soft boundary maps and the pixel-level primitives applied to
//! them before benchmarking: thresholding, thinning, non-maximum suppression
//! and the exact Euclidean distance transform.

mod edt;
mod nms;
mod thin;

pub use edt::{distance_transform, DistanceField};
pub use nms::nms;
pub use thin::thin;

use std::path::Path;

use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer pixel coordinate, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: u32,
    pub y: u32,
}

impl Pixel {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    pub fn sq_distance(&self, other: &Pixel) -> u64 {
        let dx = i64::from(self.x) - i64::from(other.x);
        let dy = i64::from(self.y) - i64::from(other.y);
        (dx * dx + dy * dy) as u64
    }

    pub fn distance(&self, other: &Pixel) -> f64 {
        (self.sq_distance(other) as f64).sqrt()
    }
}

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMap {
    /// All-off map.
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "{} bits for a {width}x{height} map",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: impl IntoIterator<Item = Pixel>) -> Result<Self> {
        let mut m = Self::new(width, height);
        for p in pixels {
            if p.x >= width || p.y >= height {
                return Err(Error::InvalidArgument(format!(
                    "pixel ({}, {}) outside {width}x{height}",
                    p.x, p.y
                )));
            }
            m.set(p.x, p.y, true);
        }
        Ok(m)
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.idx(x, y)]
    }

    /// Out-of-bounds coordinates read as off.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && x < i64::from(self.width)
            && y < i64::from(self.height)
            && self.get(x as u32, y as u32)
    }

    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        let i = self.idx(x, y);
        self.bits[i] = on;
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// On-pixels in row-major order.
    pub fn on_pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| Pixel::new((i % w) as u32, (i / w) as u32))
    }

    pub fn is_subset_of(&self, other: &BinaryMap) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Reads a PNG; any non-zero luma is on.
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)?.into_luma8();
        let (w, h) = img.dimensions();
        Ok(Self {
            width: w,
            height: h,
            bits: img.pixels().map(|p| p.0[0] > 0).collect(),
        })
    }

    /// Writes a PNG with values {0, 255}.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let img = GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([if self.get(x, y) { 255 } else { 0 }])
        });
        img.save(path)?;
        Ok(())
    }

    /// The same map as a soft map with values {0, 1}.
    pub fn to_soft(&self) -> SoftMap {
        SoftMap {
            width: self.width,
            height: self.height,
            values: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Row-major confidence map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl SoftMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {width}x{height} map",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("soft value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, values })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width as usize * height as usize],
        }
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Loads an 8-bit grayscale PNG, dividing by 255.
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)?.into_luma8();
        let (w, h) = img.dimensions();
        Ok(Self {
            width: w,
            height: h,
            values: img.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
        })
    }

    /// Saves as 8-bit grayscale, `round(255 * v)`.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let img = GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([(self.get(x, y) * 255.0).round() as u8])
        });
        img.save(path)?;
        Ok(())
    }
}

/// Pixels strictly above `t` are on.
pub fn threshold(m: &SoftMap, t: f64) -> Result<BinaryMap> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("threshold {t} outside [0, 1)")));
    }
    Ok(BinaryMap {
        width: m.width,
        height: m.height,
        bits: m.values.iter().map(|&v| v > t).collect(),
    })
}
