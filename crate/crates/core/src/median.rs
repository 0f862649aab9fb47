//! Median filtering and the recursive threshold loop.
//!
//! A pass of the loop filters the current iterate and then merges the result
//! with the *original* noisy source: pixels the filter barely moved revert to
//! the source, the rest take the filtered value. The merged image becomes the
//! next iterate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{window_into, Image, WindowSpec};

/// Parameters of the recursive threshold loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionConfig {
    pub window: WindowSpec,
    pub threshold: f64,
    /// Total filter applications; `k` recursions means `k + 1` passes.
    pub passes: usize,
}

impl RecursionConfig {
    pub fn new(window: WindowSpec, threshold: f64, passes: usize) -> Result<Self> {
        let cfg = Self {
            window,
            threshold,
            passes,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_threshold("threshold", self.threshold)?;
        if self.passes == 0 {
            return Err(Error::invalid("passes", "at least one pass is required"));
        }
        Ok(())
    }

    /// Number of feedback recursions, `passes - 1`.
    pub fn recursions(&self) -> usize {
        self.passes - 1
    }
}

pub(crate) fn validate_threshold(field: &'static str, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(field, format!("threshold must be in [0, 1], got {t}")));
    }
    Ok(())
}

/// Central order statistic of an odd-length list.
pub fn median_of_window(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median of an empty window"));
    }
    if values.len().is_multiple_of(2) {
        return Err(Error::invalid(
            "window",
            format!("median needs an odd number of values, got {}", values.len()),
        ));
    }
    let mut buf = values.to_vec();
    Ok(select_median(&mut buf))
}

#[inline]
fn select_median(buf: &mut [f64]) -> f64 {
    let mid = (buf.len() - 1) / 2;
    *buf.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// One median pass with clamp-to-edge borders. Reads `img`, writes a new image.
pub fn median_filter_pass(img: &Image, window: WindowSpec) -> Image {
    let radius = window.radius();
    if radius == 0 {
        return img.clone();
    }
    let mut out = Vec::with_capacity(img.len());
    let mut buf = Vec::with_capacity(window.area());
    for y in 0..img.height() {
        for x in 0..img.width() {
            window_into(img, x, y, radius, &mut buf);
            out.push(select_median(&mut buf));
        }
    }
    Image::from_raw(img.width(), img.height(), out)
}

/// Per pixel: keep `source` where `|source - filtered| <= threshold`,
/// otherwise take `filtered`. A zero threshold therefore only keeps pixels
/// the filter left unchanged, which is the same as taking `filtered`.
pub fn threshold_merge(source: &Image, filtered: &Image, threshold: f64) -> Result<Image> {
    source.ensure_same_dims(filtered)?;
    let pixels = source
        .pixels()
        .iter()
        .zip(filtered.pixels())
        .map(|(&a, &b)| if (a - b).abs() <= threshold { a } else { b })
        .collect();
    Ok(Image::from_raw(source.width(), source.height(), pixels))
}

/// Runs the recursive threshold loop with an arbitrary denoising filter.
pub fn recursive_threshold_denoise<F>(source: &Image, dnf: F, cfg: &RecursionConfig) -> Result<Image>
where
    F: FnMut(&Image) -> Result<Image>,
{
    recursive_threshold_denoise_with(source, dnf, cfg, |_, _| {})
}

/// As [`recursive_threshold_denoise`], calling `on_pass(pass, iterate)` after
/// each pass (1-based).
pub fn recursive_threshold_denoise_with<F, P>(
    source: &Image,
    mut dnf: F,
    cfg: &RecursionConfig,
    mut on_pass: P,
) -> Result<Image>
where
    F: FnMut(&Image) -> Result<Image>,
    P: FnMut(usize, &Image),
{
    cfg.validate()?;
    let mut current = source.clone();
    for pass in 1..=cfg.passes {
        let filtered = dnf(&current)?;
        current = threshold_merge(source, &filtered, cfg.threshold)?;
        on_pass(pass, &current);
    }
    Ok(current)
}

/// Recursive threshold median filter.
pub fn recursive_median(source: &Image, cfg: &RecursionConfig) -> Result<Image> {
    let window = cfg.window;
    recursive_threshold_denoise(source, |img| Ok(median_filter_pass(img, window)), cfg)
}
