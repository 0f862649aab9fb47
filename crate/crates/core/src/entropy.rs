//! Two-dimensional sample entropy maps.
//!
//! Each pixel receives the sample entropy of the window centred on it
//! (clamp-to-edge padding), then the whole map is min-max normalized to
//! `[0, 1]`. Maps can be dilated to raise their contrast before comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{window_into, Image, WindowSpec};

/// How the tolerance coefficient `r` becomes an absolute distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceMode {
    /// `r * std(image)` with the population standard deviation of the whole image.
    #[default]
    ImageStd,
    /// `r` used as an intensity difference directly.
    Absolute,
}

/// Value returned when the match-count ratio is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedPolicy {
    /// No `(m+1)` matches: `ln(U_m)`, the largest value observable for the
    /// patch. No `m` matches: 0.
    #[default]
    Cap,
    /// Any undefined ratio maps to 0.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySpec {
    pub window: WindowSpec,
    /// Embedding dimension.
    pub m: usize,
    /// Sampling delay between pattern elements.
    pub tau: usize,
    /// Tolerance coefficient.
    pub r: f64,
    #[serde(default)]
    pub r_mode: ToleranceMode,
    #[serde(default)]
    pub undefined_policy: UndefinedPolicy,
}

impl Default for EntropySpec {
    fn default() -> Self {
        Self {
            window: WindowSpec::new(5).expect("5 is odd"),
            m: 1,
            tau: 1,
            r: 0.2,
            r_mode: ToleranceMode::ImageStd,
            undefined_policy: UndefinedPolicy::Cap,
        }
    }
}

impl EntropySpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m", "embedding dimension must be at least 1"));
        }
        if self.tau == 0 {
            return Err(Error::invalid("tau", "sampling delay must be at least 1"));
        }
        if !(self.r > 0.0) {
            return Err(Error::invalid(
                "r",
                format!("tolerance must be positive, got {}", self.r),
            ));
        }
        if self.m * self.tau >= self.window.side() {
            return Err(Error::invalid(
                "window",
                format!(
                    "side {} too small for patterns of size {} with delay {}",
                    self.window.side(),
                    self.m + 1,
                    self.tau
                ),
            ));
        }
        Ok(())
    }

    /// Absolute tolerance used for `img`.
    pub fn tolerance_for(&self, img: &Image) -> f64 {
        match self.r_mode {
            ToleranceMode::ImageStd => self.r * img.std_dev(),
            ToleranceMode::Absolute => self.r,
        }
    }
}

/// Counts ordered pairs of distinct `size x size` patterns (elements spaced
/// `tau` apart) whose Chebyshev distance is within `tol`.
fn count_matches(patch: &[f64], side: usize, size: usize, tau: usize, tol: f64) -> u64 {
    let span = (size - 1) * tau;
    if span >= side {
        return 0;
    }
    let per_axis = side - span;
    let origins: Vec<usize> = (0..per_axis)
        .flat_map(|i| (0..per_axis).map(move |j| i * side + j))
        .collect();
    let offsets: Vec<usize> = (0..size)
        .flat_map(|a| (0..size).map(move |b| a * tau * side + b * tau))
        .collect();
    let mut count = 0u64;
    for (k, &p) in origins.iter().enumerate() {
        for &q in &origins[k + 1..] {
            if offsets.iter().all(|&o| (patch[p + o] - patch[q + o]).abs() <= tol) {
                count += 1;
            }
        }
    }
    2 * count
}

/// Sample entropy `-ln(U_{m+1} / U_m)` of a square patch given row by row.
///
/// `tolerance` is the absolute Chebyshev distance (already scaled by any
/// image statistic); `spec.r` and `spec.r_mode` are not consulted here.
pub fn sampen2d(patch: &[f64], side: usize, spec: &EntropySpec, tolerance: f64) -> Result<f64> {
    if patch.len() != side * side {
        return Err(Error::invalid(
            "patch",
            format!("expected {} values for side {side}, got {}", side * side, patch.len()),
        ));
    }
    if spec.m == 0 || spec.tau == 0 {
        return Err(Error::invalid("m", "embedding dimension and delay must be at least 1"));
    }
    if spec.m * spec.tau >= side {
        return Err(Error::invalid(
            "patch",
            format!("side {side} too small for patterns of size {}", spec.m + 1),
        ));
    }
    let um = count_matches(patch, side, spec.m, spec.tau, tolerance);
    let um1 = count_matches(patch, side, spec.m + 1, spec.tau, tolerance);
    Ok(ratio_entropy(um, um1, spec.undefined_policy))
}

fn ratio_entropy(um: u64, um1: u64, policy: UndefinedPolicy) -> f64 {
    match (um, um1, policy) {
        (0, _, _) => 0.0,
        (_, 0, UndefinedPolicy::Zero) => 0.0,
        (um, 0, UndefinedPolicy::Cap) => (um as f64).ln(),
        (um, um1, _) => -((um1 as f64) / (um as f64)).ln(),
    }
}

/// Fast path for `m = 1, tau = 1`, the configuration used for all maps:
/// 1x1 patterns are single values, 2x2 patterns are adjacent quads.
fn sampen_m1(patch: &[f64], side: usize, tol: f64, quads: &mut Vec<[f64; 4]>, policy: UndefinedPolicy) -> f64 {
    let mut um = 0u64;
    for (k, &a) in patch.iter().enumerate() {
        for &b in &patch[k + 1..] {
            if (a - b).abs() <= tol {
                um += 1;
            }
        }
    }
    quads.clear();
    for i in 0..side - 1 {
        for j in 0..side - 1 {
            let p = i * side + j;
            quads.push([patch[p], patch[p + 1], patch[p + side], patch[p + side + 1]]);
        }
    }
    let mut um1 = 0u64;
    for (k, a) in quads.iter().enumerate() {
        for b in &quads[k + 1..] {
            if (a[0] - b[0]).abs() <= tol
                && (a[1] - b[1]).abs() <= tol
                && (a[2] - b[2]).abs() <= tol
                && (a[3] - b[3]).abs() <= tol
            {
                um1 += 1;
            }
        }
    }
    ratio_entropy(2 * um, 2 * um1, policy)
}

/// Same-size grid of values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl EntropyMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Views the map as an image so it can be saved or compared with SSIM.
    pub fn to_image(&self) -> Image {
        Image::from_raw(self.width, self.height, self.values.clone())
    }

    /// Wraps an image whose values are already normalized.
    pub fn from_image(img: &Image) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            values: img.pixels().to_vec(),
        }
    }

    /// Full-precision CSV: a header, then one `x,y,entropy` row per pixel.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24 + 16);
        out.push_str("x,y,entropy\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{},{v:?}\n", i % self.width, i / self.width));
        }
        out
    }
}

/// Per-pixel sample entropy before normalization.
pub fn raw_entropy_map(img: &Image, spec: &EntropySpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let tol = spec.tolerance_for(img);
    let side = spec.window.side();
    let radius = spec.window.radius();
    let mut buf = Vec::with_capacity(spec.window.area());
    let mut quads = Vec::with_capacity(side * side);
    let mut raw = Vec::with_capacity(img.len());
    for y in 0..img.height() {
        for x in 0..img.width() {
            window_into(img, x, y, radius, &mut buf);
            let v = if spec.m == 1 && spec.tau == 1 {
                sampen_m1(&buf, side, tol, &mut quads, spec.undefined_policy)
            } else {
                sampen2d(&buf, side, spec, tol)?
            };
            raw.push(v);
        }
    }
    Ok(raw)
}

/// Entropy map min-max normalized to `[0, 1]`; a constant raw map becomes all zeros.
pub fn entropy_map(img: &Image, spec: &EntropySpec) -> Result<EntropyMap> {
    let raw = raw_entropy_map(img, spec)?;
    Ok(EntropyMap {
        width: img.width(),
        height: img.height(),
        values: min_max_normalize(raw),
    })
}

fn min_max_normalize(mut values: Vec<f64>) -> Vec<f64> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let span = hi - lo;
    if span > 0.0 {
        for v in &mut values {
            *v = ((*v - lo) / span).clamp(0.0, 1.0);
        }
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
    }
    values
}

/// Grayscale dilation: maximum over a `kernel_side` square neighbourhood,
/// applied `iterations` times.
pub fn dilate(map: &EntropyMap, kernel_side: usize, iterations: usize) -> Result<EntropyMap> {
    let kernel = WindowSpec::new(kernel_side)?;
    if iterations == 0 {
        return Err(Error::invalid("iterations", "at least one iteration is required"));
    }
    let mut current = map.to_image();
    let mut buf = Vec::with_capacity(kernel.area());
    for _ in 0..iterations {
        let mut out = Vec::with_capacity(current.len());
        for y in 0..current.height() {
            for x in 0..current.width() {
                window_into(&current, x, y, kernel.radius(), &mut buf);
                out.push(buf.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
        current = Image::from_raw(current.width(), current.height(), out);
    }
    Ok(EntropyMap::from_image(&current))
}
