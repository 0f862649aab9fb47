//! Scheme selection, JSON configuration and the shipped presets.

use serde::{Deserialize, Serialize};

use crate::autoencoder::{ae_denoise_image, AeConfig, Optimizer};
use crate::error::{Error, Result};
use crate::image::{Image, WindowSpec};
use crate::median::{recursive_median, recursive_threshold_denoise, validate_threshold, RecursionConfig};
use crate::schemes::{denoise_2mf, denoise_mfs_ae, MfsAeConfig, TwoMfConfig};

/// Recursive threshold loop around the block autoencoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeSchemeConfig {
    pub ae: AeConfig,
    pub threshold: f64,
    pub passes: usize,
}

impl AeSchemeConfig {
    pub fn validate(&self) -> Result<()> {
        self.ae.validate()?;
        validate_threshold("threshold", self.threshold)?;
        if self.passes == 0 {
            return Err(Error::invalid("passes", "at least one pass is required"));
        }
        Ok(())
    }

    pub fn recursion(&self) -> RecursionConfig {
        RecursionConfig {
            window: self.ae.window,
            threshold: self.threshold,
            passes: self.passes,
        }
    }
}

/// Recursive AE denoising: every pass retrains every block from scratch.
pub fn recursive_ae(source: &Image, cfg: &AeSchemeConfig) -> Result<Image> {
    cfg.validate()?;
    recursive_threshold_denoise(source, |img| ae_denoise_image(img, &cfg.ae), &cfg.recursion())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Mf,
    Ae,
    #[serde(rename = "2mf")]
    TwoMf,
    MfsAe,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Mf => "mf",
            SchemeKind::Ae => "ae",
            SchemeKind::TwoMf => "2mf",
            SchemeKind::MfsAe => "mfs-ae",
        }
    }

    /// Top-level fields a configuration file must provide.
    pub fn required_fields(self) -> &'static [&'static str] {
        match self {
            SchemeKind::Mf => &["window", "threshold", "passes"],
            SchemeKind::Ae => &[
                "ae.block_h",
                "ae.block_w",
                "ae.window",
                "ae.epochs",
                "ae.learning_rate",
                "ae.compression_ratio",
                "ae.seed",
                "threshold",
                "passes",
            ],
            SchemeKind::TwoMf => &["w1", "w2", "thr1_w1", "thr1_w2", "thr2", "passes"],
            SchemeKind::MfsAe => &[
                "w1",
                "w2",
                "thr_min",
                "thr_max",
                "thr_step",
                "thr_w2",
                "passes",
                "ae.block_h",
                "ae.block_w",
                "ae.window",
                "ae.epochs",
                "ae.learning_rate",
                "ae.compression_ratio",
                "ae.seed",
                "thr_final",
            ],
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mf" => Ok(SchemeKind::Mf),
            "ae" => Ok(SchemeKind::Ae),
            "2mf" => Ok(SchemeKind::TwoMf),
            "mfs-ae" | "mfs_ae" => Ok(SchemeKind::MfsAe),
            other => Err(Error::invalid("scheme", format!("unknown scheme {other:?}"))),
        }
    }
}

/// A fully specified denoising scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "config", rename_all = "kebab-case")]
pub enum SchemeConfig {
    Mf(RecursionConfig),
    Ae(AeSchemeConfig),
    #[serde(rename = "2mf")]
    TwoMf(TwoMfConfig),
    MfsAe(MfsAeConfig),
}

impl SchemeConfig {
    /// Parses the JSON body of a configuration file for `kind` and validates it.
    pub fn from_json(kind: SchemeKind, json: &str) -> Result<Self> {
        let parse_err = |e: serde_json::Error| Error::invalid("config", e.to_string());
        let cfg = match kind {
            SchemeKind::Mf => SchemeConfig::Mf(serde_json::from_str(json).map_err(parse_err)?),
            SchemeKind::Ae => SchemeConfig::Ae(serde_json::from_str(json).map_err(parse_err)?),
            SchemeKind::TwoMf => SchemeConfig::TwoMf(serde_json::from_str(json).map_err(parse_err)?),
            SchemeKind::MfsAe => SchemeConfig::MfsAe(serde_json::from_str(json).map_err(parse_err)?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeConfig::Mf(_) => SchemeKind::Mf,
            SchemeConfig::Ae(_) => SchemeKind::Ae,
            SchemeConfig::TwoMf(_) => SchemeKind::TwoMf,
            SchemeConfig::MfsAe(_) => SchemeKind::MfsAe,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SchemeConfig::Mf(c) => c.validate(),
            SchemeConfig::Ae(c) => c.validate(),
            SchemeConfig::TwoMf(c) => c.validate(),
            SchemeConfig::MfsAe(c) => c.validate(),
        }
    }

    /// The scheme-specific body, as written to a configuration file.
    pub fn body_json(&self) -> serde_json::Value {
        let v = match self {
            SchemeConfig::Mf(c) => serde_json::to_value(c),
            SchemeConfig::Ae(c) => serde_json::to_value(c),
            SchemeConfig::TwoMf(c) => serde_json::to_value(c),
            SchemeConfig::MfsAe(c) => serde_json::to_value(c),
        };
        v.expect("configs serialize")
    }

    /// Overrides every autoencoder seed in the configuration.
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            SchemeConfig::Ae(c) => c.ae.seed = seed,
            SchemeConfig::MfsAe(c) => c.ae.seed = seed,
            SchemeConfig::Mf(_) | SchemeConfig::TwoMf(_) => {}
        }
        self
    }

    pub fn run(&self, source: &Image) -> Result<Image> {
        match self {
            SchemeConfig::Mf(c) => recursive_median(source, c),
            SchemeConfig::Ae(c) => recursive_ae(source, c),
            SchemeConfig::TwoMf(c) => denoise_2mf(source, c),
            SchemeConfig::MfsAe(c) => denoise_mfs_ae(source, c),
        }
    }
}

/// Parameter sets of the published experiments.
pub mod presets {
    use super::*;

    fn w(side: usize) -> WindowSpec {
        WindowSpec::new(side).expect("preset windows are odd")
    }

    /// Low-resolution comparison: 5x5 median, threshold 0.2, ten recursions.
    pub fn table1_mf() -> RecursionConfig {
        RecursionConfig {
            window: w(5),
            threshold: 0.2,
            passes: 11,
        }
    }

    /// Low-resolution comparison: 50x50 blocks, 5x5 shifts, 20 epochs,
    /// learning rate 0.001, hidden layer half the input, ten recursions.
    pub fn table1_ae() -> AeSchemeConfig {
        AeSchemeConfig {
            ae: AeConfig {
                block_h: 50,
                block_w: 50,
                window: w(5),
                epochs: 20,
                learning_rate: 0.001,
                compression_ratio: 0.5,
                seed: 0,
                optimizer: Optimizer::default(),
            },
            threshold: 0.2,
            passes: 11,
        }
    }

    /// Two-scale scheme: 3x3 and 5x5 at 0.1, final merge 0.2, 25 recursions.
    pub fn table2_2mf() -> TwoMfConfig {
        TwoMfConfig {
            w1: w(3),
            w2: w(5),
            thr1_w1: 0.1,
            thr1_w2: 0.1,
            thr2: 0.2,
            passes: 26,
        }
    }

    /// Multi-level scheme: eight 3x3 filters at 0.08..0.15, 5x5 at 0.1,
    /// fusion on 50x50 blocks with single-pixel windows, 100 epochs,
    /// learning rate 0.001, hidden layer 0.4 of the input, final merge 0.25.
    pub fn table3_mfs_ae() -> MfsAeConfig {
        MfsAeConfig {
            w1: w(3),
            w2: w(5),
            thr_min: 0.08,
            thr_max: 0.15,
            thr_step: 0.01,
            thr_w2: 0.1,
            passes: 26,
            ae: AeConfig {
                block_h: 50,
                block_w: 50,
                window: w(1),
                epochs: 100,
                learning_rate: 0.001,
                compression_ratio: 0.4,
                seed: 0,
                optimizer: Optimizer::default(),
            },
            thr_final: 0.25,
        }
    }

    /// Single median filter with the multi-level scheme's recursion settings.
    pub fn table3_mf(side: usize) -> RecursionConfig {
        RecursionConfig {
            window: w(side),
            threshold: 0.1,
            passes: 26,
        }
    }

    /// Every preset as `(file stem, scheme)`.
    pub fn all() -> Vec<(&'static str, SchemeConfig)> {
        vec![
            ("table1_mf", SchemeConfig::Mf(table1_mf())),
            ("table1_ae", SchemeConfig::Ae(table1_ae())),
            ("table2_2mf", SchemeConfig::TwoMf(table2_2mf())),
            ("table3_mf3x3", SchemeConfig::Mf(table3_mf(3))),
            ("table3_mf5x5", SchemeConfig::Mf(table3_mf(5))),
            ("table3_mfs_ae", SchemeConfig::MfsAe(table3_mfs_ae())),
        ]
    }
}
