//! Two-scale (2MF) and multi-level (MFs-AE) composite pipelines.
//!
//! Both start from recursive threshold median filters that all read the same
//! noisy source, then merge a sharper small-window result with a smoother
//! large-window one using the threshold rule.

use serde::{Deserialize, Serialize};

use crate::autoencoder::{ae_fuse, AeConfig};
use crate::error::{Error, Result};
use crate::image::{Image, WindowSpec};
use crate::median::{recursive_median, threshold_merge, validate_threshold, RecursionConfig};

fn check_scales(w1: WindowSpec, w2: WindowSpec) -> Result<()> {
    if w1.side() >= w2.side() {
        return Err(Error::invalid(
            "w1",
            format!("w1 ({}) must be smaller than w2 ({})", w1.side(), w2.side()),
        ));
    }
    Ok(())
}

fn check_passes(passes: usize) -> Result<()> {
    if passes == 0 {
        return Err(Error::invalid("passes", "at least one pass is required"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoMfConfig {
    pub w1: WindowSpec,
    pub w2: WindowSpec,
    pub thr1_w1: f64,
    pub thr1_w2: f64,
    /// Threshold of the final merge.
    pub thr2: f64,
    pub passes: usize,
}

impl TwoMfConfig {
    pub fn validate(&self) -> Result<()> {
        check_scales(self.w1, self.w2)?;
        validate_threshold("thr1_w1", self.thr1_w1)?;
        validate_threshold("thr1_w2", self.thr1_w2)?;
        validate_threshold("thr2", self.thr2)?;
        check_passes(self.passes)
    }

    pub fn small(&self) -> RecursionConfig {
        RecursionConfig {
            window: self.w1,
            threshold: self.thr1_w1,
            passes: self.passes,
        }
    }

    pub fn large(&self) -> RecursionConfig {
        RecursionConfig {
            window: self.w2,
            threshold: self.thr1_w2,
            passes: self.passes,
        }
    }
}

/// Intermediate and final images of a 2MF run.
#[derive(Debug, Clone)]
pub struct TwoMfOutput {
    pub out_w1: Image,
    pub out_w2: Image,
    pub output: Image,
}

pub fn denoise_2mf(source: &Image, cfg: &TwoMfConfig) -> Result<Image> {
    denoise_2mf_detailed(source, cfg).map(|o| o.output)
}

pub fn denoise_2mf_detailed(source: &Image, cfg: &TwoMfConfig) -> Result<TwoMfOutput> {
    cfg.validate()?;
    let out_w1 = recursive_median(source, &cfg.small())?;
    let out_w2 = recursive_median(source, &cfg.large())?;
    let output = threshold_merge(&out_w1, &out_w2, cfg.thr2)?;
    Ok(TwoMfOutput { out_w1, out_w2, output })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfsAeConfig {
    pub w1: WindowSpec,
    pub w2: WindowSpec,
    pub thr_min: f64,
    pub thr_max: f64,
    pub thr_step: f64,
    pub thr_w2: f64,
    pub passes: usize,
    pub ae: AeConfig,
    pub thr_final: f64,
}

impl MfsAeConfig {
    pub fn validate(&self) -> Result<()> {
        check_scales(self.w1, self.w2)?;
        validate_threshold("thr_min", self.thr_min)?;
        validate_threshold("thr_max", self.thr_max)?;
        validate_threshold("thr_w2", self.thr_w2)?;
        validate_threshold("thr_final", self.thr_final)?;
        if !(self.thr_step > 0.0) {
            return Err(Error::invalid("thr_step", "ladder step must be positive"));
        }
        if self.thr_max < self.thr_min {
            return Err(Error::invalid("thr_max", "ladder maximum is below its minimum"));
        }
        check_passes(self.passes)?;
        self.ae.validate()?;
        if self.ladder().len() < 2 {
            return Err(Error::invalid(
                "thr_step",
                "threshold ladder must have at least two rungs",
            ));
        }
        Ok(())
    }

    /// Thresholds of the small-window filter bank, both endpoints included.
    pub fn ladder(&self) -> Vec<f64> {
        threshold_ladder(self.thr_min, self.thr_max, self.thr_step)
    }
}

/// `floor((max - min) / step) + 1` evenly spaced thresholds starting at `min`.
///
/// The count tolerates representation error in decimal inputs, and each rung
/// is snapped to a 1e-12 grid so 0.08..0.15 by 0.01 gives exactly eight
/// values that print as written.
pub fn threshold_ladder(min: f64, max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || max < min {
        return Vec::new();
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

/// Intermediate and final images of an MFs-AE run.
#[derive(Debug, Clone)]
pub struct MfsAeOutput {
    /// One image per ladder threshold, in ladder order.
    pub bank: Vec<Image>,
    pub out_w2: Image,
    pub fused: Image,
    pub output: Image,
}

pub fn denoise_mfs_ae(source: &Image, cfg: &MfsAeConfig) -> Result<Image> {
    denoise_mfs_ae_detailed(source, cfg).map(|o| o.output)
}

pub fn denoise_mfs_ae_detailed(source: &Image, cfg: &MfsAeConfig) -> Result<MfsAeOutput> {
    cfg.validate()?;
    let bank = cfg
        .ladder()
        .into_iter()
        .map(|threshold| {
            recursive_median(
                source,
                &RecursionConfig {
                    window: cfg.w1,
                    threshold,
                    passes: cfg.passes,
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let out_w2 = recursive_median(
        source,
        &RecursionConfig {
            window: cfg.w2,
            threshold: cfg.thr_w2,
            passes: cfg.passes,
        },
    )?;
    mfs_ae_from_branches(bank, out_w2, cfg)
}

/// Steps 2 and 3 of MFs-AE given precomputed filter outputs.
pub fn mfs_ae_from_branches(bank: Vec<Image>, out_w2: Image, cfg: &MfsAeConfig) -> Result<MfsAeOutput> {
    let fused = ae_fuse(&bank, &cfg.ae)?;
    let output = threshold_merge(&fused, &out_w2, cfg.thr_final)?;
    Ok(MfsAeOutput {
        bank,
        out_w2,
        fused,
        output,
    })
}
