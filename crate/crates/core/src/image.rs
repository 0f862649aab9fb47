//! Grayscale raster, sliding-window access and block tiling.
//!
//! Intensities live in `[0, 1]` as `f64`. Every sliding-window operation in
//! the crate resolves out-of-bounds coordinates by clamping to the nearest
//! edge pixel, so each pixel owns a full window and derived maps keep the
//! size of their source image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    /// Builds an image, rejecting empty dimensions, a wrong pixel count, or
    /// intensities outside `[0, 1]` (NaN included).
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("dimensions", "width and height must be at least 1"));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(
                "pixels",
                format!("expected {} values, got {}", width * height, pixels.len()),
            ));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid("pixels", format!("intensity {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, pixels })
    }

    /// Constant image.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from a per-pixel function `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Constructor for values already known to be in range.
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        debug_assert!(pixels.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Total pixel count.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with replicate (clamp-to-edge) padding.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    pub fn ensure_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    /// Copies a rectangular region into a new image.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Image> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::invalid(
                "crop",
                format!(
                    "region {width}x{height} at ({x0}, {y0}) exceeds {}x{}",
                    self.width, self.height
                ),
            ));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            let row = y * self.width;
            pixels.extend_from_slice(&self.pixels[row + x0..row + x0 + width]);
        }
        Ok(Image::from_raw(width, height, pixels))
    }

    /// Largest absolute per-pixel difference.
    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Mean intensity.
    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Population standard deviation of all intensities.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.pixels.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.pixels.len() as f64;
        var.sqrt()
    }
}

/// How sliding windows treat coordinates outside the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorderPolicy {
    /// Clamp to the nearest edge pixel.
    #[default]
    Replicate,
}

/// Square window of odd side length centred on a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct WindowSpec {
    side: usize,
    border: BorderPolicy,
}

impl WindowSpec {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 || side.is_multiple_of(2) {
            return Err(Error::invalid(
                "window",
                format!("side must be a positive odd integer, got {side}"),
            ));
        }
        Ok(Self {
            side,
            border: BorderPolicy::Replicate,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Half-width `(side - 1) / 2`.
    pub fn radius(&self) -> usize {
        (self.side - 1) / 2
    }

    /// Number of values in one window.
    pub fn area(&self) -> usize {
        self.side * self.side
    }

    pub fn border(&self) -> BorderPolicy {
        self.border
    }
}

impl TryFrom<usize> for WindowSpec {
    type Error = Error;

    fn try_from(side: usize) -> Result<Self> {
        WindowSpec::new(side)
    }
}

impl From<WindowSpec> for usize {
    fn from(w: WindowSpec) -> usize {
        w.side
    }
}

/// Returns the `side²` intensities of the window centred on `(x, y)`, row by
/// row, with clamp-to-edge padding.
///
/// # Panics
/// If `(x, y)` lies outside the image.
pub fn window_at(img: &Image, x: usize, y: usize, spec: WindowSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(spec.area());
    window_into(img, x, y, spec.radius(), &mut out);
    out
}

/// Fills `out` with the window of radius `radius` around `(x, y)`.
pub(crate) fn window_into(img: &Image, x: usize, y: usize, radius: usize, out: &mut Vec<f64>) {
    assert!(x < img.width && y < img.height, "pixel ({x}, {y}) outside image");
    out.clear();
    let r = radius as isize;
    let (x, y) = (x as isize, y as isize);
    let w = img.width as isize;
    let h = img.height as isize;
    for dy in -r..=r {
        let row = (y + dy).clamp(0, h - 1) as usize * img.width;
        if x - r >= 0 && x + r < w {
            let start = row + (x - r) as usize;
            out.extend_from_slice(&img.pixels[start..start + 2 * radius + 1]);
        } else {
            for dx in -r..=r {
                out.push(img.pixels[row + (x + dx).clamp(0, w - 1) as usize]);
            }
        }
    }
}

/// One rectangular tile of a [`BlockGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Non-overlapping tiling of an image; blocks on the right and bottom edges
/// are truncated when the image size is not a multiple of the block size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGrid {
    pub block_h: usize,
    pub block_w: usize,
    pub rows: usize,
    pub cols: usize,
    blocks: Vec<Block>,
}

impl BlockGrid {
    /// Blocks in row-major order; the position in this slice is the block index.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

pub fn partition_blocks(img: &Image, block_h: usize, block_w: usize) -> Result<BlockGrid> {
    if block_h == 0 || block_w == 0 {
        return Err(Error::invalid("block", "block dimensions must be at least 1"));
    }
    let rows = img.height.div_ceil(block_h);
    let cols = img.width.div_ceil(block_w);
    let mut blocks = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let x = c * block_w;
            let y = r * block_h;
            blocks.push(Block {
                x,
                y,
                width: block_w.min(img.width - x),
                height: block_h.min(img.height - y),
            });
        }
    }
    Ok(BlockGrid {
        block_h,
        block_w,
        rows,
        cols,
        blocks,
    })
}
