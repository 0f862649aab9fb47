//! Structural similarity of images and of their entropy maps.
//!
//! Intensities are scaled by [`SsimSpec::intensity_scale`] (255 by default)
//! before the local statistic is evaluated, so the stability constants keep
//! their usual 8-bit values. The global score is the mean of the local score
//! over one clamp-padded window per pixel.

use serde::{Deserialize, Serialize};

use crate::entropy::{dilate, entropy_map, EntropySpec};
use crate::error::{Error, Result};
use crate::image::{window_into, Image, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimSpec {
    pub window: WindowSpec,
    pub c1: f64,
    pub c2: f64,
    pub intensity_scale: f64,
}

impl Default for SsimSpec {
    fn default() -> Self {
        Self {
            window: WindowSpec::new(7).expect("7 is odd"),
            c1: (0.01f64 * 255.0).powi(2),
            c2: (0.03f64 * 255.0).powi(2),
            intensity_scale: 255.0,
        }
    }
}

/// Local SSIM of two equally sized windows with population moments.
pub fn ssim_local(win_x: &[f64], win_y: &[f64], spec: &SsimSpec) -> Result<f64> {
    if win_x.len() != win_y.len() {
        return Err(Error::DimensionMismatch {
            expected: (win_x.len(), 1),
            found: (win_y.len(), 1),
        });
    }
    if win_x.is_empty() {
        return Err(Error::Empty("ssim window"));
    }
    Ok(local_unchecked(win_x, win_y, spec))
}

fn local_unchecked(win_x: &[f64], win_y: &[f64], spec: &SsimSpec) -> f64 {
    let s = spec.intensity_scale;
    let n = win_x.len() as f64;
    let mx = win_x.iter().map(|v| v * s).sum::<f64>() / n;
    let my = win_y.iter().map(|v| v * s).sum::<f64>() / n;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for (a, b) in win_x.iter().zip(win_y) {
        let dx = a * s - mx;
        let dy = b * s - my;
        vx += dx * dx;
        vy += dy * dy;
        cxy += dx * dy;
    }
    vx /= n;
    vy /= n;
    cxy /= n;
    let num = (2.0 * mx * my + spec.c1) * (2.0 * cxy + spec.c2);
    let den = (mx * mx + my * my + spec.c1) * (vx + vy + spec.c2);
    num / den
}

/// Mean local SSIM over every pixel-centred window.
pub fn ssim_global(x: &Image, y: &Image, spec: &SsimSpec) -> Result<f64> {
    x.ensure_same_dims(y)?;
    let radius = spec.window.radius();
    let mut wx = Vec::with_capacity(spec.window.area());
    let mut wy = Vec::with_capacity(spec.window.area());
    let mut sum = NeumaierSum::default();
    for row in 0..x.height() {
        for col in 0..x.width() {
            window_into(x, col, row, radius, &mut wx);
            window_into(y, col, row, radius, &mut wy);
            sum.add(local_unchecked(&wx, &wy, spec));
        }
    }
    Ok(sum.total() / x.len() as f64)
}

/// Compensated summation, so the global mean does not depend on magnitude ordering.
#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Kernel side and iteration count used for dilated maps.
pub const DILATION_KERNEL: usize = 5;
pub const DILATION_ITERATIONS: usize = 1;

/// SSIM between the entropy maps of `clean` and `restored`, optionally after
/// dilating both maps.
pub fn ssim_map_metric(
    clean: &Image,
    restored: &Image,
    espec: &EntropySpec,
    sspec: &SsimSpec,
    dilated: bool,
) -> Result<f64> {
    clean.ensure_same_dims(restored)?;
    let mut a = entropy_map(clean, espec)?;
    let mut b = entropy_map(restored, espec)?;
    if dilated {
        a = dilate(&a, DILATION_KERNEL, DILATION_ITERATIONS)?;
        b = dilate(&b, DILATION_KERNEL, DILATION_ITERATIONS)?;
    }
    ssim_global(&a.to_image(), &b.to_image(), sspec)
}

/// Relative difference in percent: `100 |s1 - s2| / ((s1 + s2) / 2)`.
pub fn delta_ssim(s1: f64, s2: f64) -> Result<f64> {
    let mean = (s1 + s2) / 2.0;
    if mean == 0.0 {
        return Err(Error::Undefined("relative difference of values with zero mean"));
    }
    Ok(100.0 * (s1 - s2).abs() / mean)
}

/// All similarity figures for one restored image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsimReport {
    pub ssim_img: f64,
    pub ssim_map_standard: f64,
    pub ssim_map_dilated: f64,
    /// Relative difference between `ssim_img` and `ssim_map_standard`, percent.
    pub delta_pct: f64,
    pub provenance: serde_json::Value,
}

/// Computes image SSIM, standard and dilated map SSIM, and their relative difference.
pub fn ssim_report(
    clean: &Image,
    restored: &Image,
    espec: &EntropySpec,
    sspec: &SsimSpec,
    provenance: serde_json::Value,
) -> Result<SsimReport> {
    clean.ensure_same_dims(restored)?;
    let ssim_img = ssim_global(clean, restored, sspec)?;
    let map_clean = entropy_map(clean, espec)?;
    let map_restored = entropy_map(restored, espec)?;
    let ssim_map_standard = ssim_global(&map_clean.to_image(), &map_restored.to_image(), sspec)?;
    let dil_clean = dilate(&map_clean, DILATION_KERNEL, DILATION_ITERATIONS)?;
    let dil_restored = dilate(&map_restored, DILATION_KERNEL, DILATION_ITERATIONS)?;
    let ssim_map_dilated = ssim_global(&dil_clean.to_image(), &dil_restored.to_image(), sspec)?;
    let delta_pct = delta_ssim(ssim_img, ssim_map_standard).unwrap_or(f64::NAN);
    Ok(SsimReport {
        ssim_img,
        ssim_map_standard,
        ssim_map_dilated,
        delta_pct,
        provenance,
    })
}
