//! Salt-and-pepper noise injection and measurement.
//!
//! All randomness comes from a ChaCha8 stream seeded with [`NoiseSpec::seed`],
//! so a given `(image, spec)` pair always yields the same noisy image.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// Amplitude model of the impulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Pepper uniform in `[0, 0.1]`, salt uniform in `[0.9, 1]`.
    Interval,
    /// Pepper exactly 0, salt exactly 1.
    Fixed,
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(NoiseModel::Interval),
            "fixed" => Ok(NoiseModel::Fixed),
            other => Err(Error::invalid("model", format!("unknown noise model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    /// Percentage of corrupted pixels, in `[0, 100]`.
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(model: NoiseModel, level: f64, seed: u64) -> Result<Self> {
        let spec = Self { model, level, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.level) {
            return Err(Error::invalid(
                "level",
                format!("noise level must be in [0, 100], got {}", self.level),
            ));
        }
        Ok(())
    }

    /// Number of corrupted pixels for an image of `n` pixels, rounding half up.
    pub fn corrupted_count(&self, n: usize) -> usize {
        ((self.level / 100.0 * n as f64) + 0.5).floor() as usize
    }
}

/// Where the impulses landed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NoiseLayout {
    pub salt: Vec<usize>,
    pub pepper: Vec<usize>,
}

impl NoiseLayout {
    pub fn corrupted(&self) -> usize {
        self.salt.len() + self.pepper.len()
    }
}

/// Corrupts exactly `round(level/100 * n)` distinct pixels.
pub fn inject_sp_noise(img: &Image, spec: &NoiseSpec) -> Result<Image> {
    inject_sp_noise_with_layout(img, spec).map(|(img, _)| img)
}

/// As [`inject_sp_noise`], also returning the corrupted positions.
///
/// The corrupted set is split as evenly as possible, with the odd pixel
/// going to salt. Under the interval model a draw equal to the original
/// intensity is redrawn, so every listed position really changes. Under the
/// fixed model a pixel that already holds 0 or 1 may be selected and stay
/// unchanged.
pub fn inject_sp_noise_with_layout(img: &Image, spec: &NoiseSpec) -> Result<(Image, NoiseLayout)> {
    spec.validate()?;
    let n = img.len();
    let count = spec.corrupted_count(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let positions = index::sample(&mut rng, n, count).into_vec();
    let n_salt = count.div_ceil(2);
    let (salt, pepper) = positions.split_at(n_salt);

    let mut pixels = img.pixels().to_vec();
    for &p in salt {
        pixels[p] = match spec.model {
            NoiseModel::Fixed => 1.0,
            NoiseModel::Interval => draw_distinct(&mut rng, 0.9, pixels[p]),
        };
    }
    for &p in pepper {
        pixels[p] = match spec.model {
            NoiseModel::Fixed => 0.0,
            NoiseModel::Interval => draw_distinct(&mut rng, 0.0, pixels[p]),
        };
    }
    let layout = NoiseLayout {
        salt: salt.to_vec(),
        pepper: pepper.to_vec(),
    };
    Ok((Image::from_raw(img.width(), img.height(), pixels), layout))
}

fn draw_distinct(rng: &mut ChaCha8Rng, low: f64, original: f64) -> f64 {
    loop {
        let v = rng.gen_range(low..=low + 0.1);
        if v != original {
            return v;
        }
    }
}

/// Percentage of pixels that differ between `clean` and `noisy`.
pub fn measure_noise_level(clean: &Image, noisy: &Image) -> Result<f64> {
    clean.ensure_same_dims(noisy)?;
    let differing = clean
        .pixels()
        .iter()
        .zip(noisy.pixels())
        .filter(|(a, b)| a != b)
        .count();
    Ok(100.0 * differing as f64 / clean.len() as f64)
}
