//! Salt-and-pepper denoising with recursive threshold median filters and
//! block autoencoders, evaluated by SSIM of images and of their
//! sample-entropy maps.
//!
//! The building blocks:
//!
//! * [`image`] and [`io`]: grayscale rasters, clamp-padded windows, block tiling, PGM/PNG.
//! * [`noise`]: seeded interval and fixed impulse noise.
//! * [`median`]: median pass, threshold merge, recursive threshold loop.
//! * [`autoencoder`]: per-block three-layer autoencoder and multi-image fusion.
//! * [`schemes`]: 2MF and MFs-AE pipelines.
//! * [`entropy`] and [`ssim`]: entropy maps, dilation, SSIM and relative differences.
//! * [`bench`], [`config`] and [`manifest`]: scheme presets, the sweeps behind the CLI and run records.

pub mod assets;
pub mod autoencoder;
pub mod bench;
pub mod config;
pub mod entropy;
pub mod error;
pub mod image;
pub mod io;
pub mod manifest;
pub mod median;
pub mod noise;
pub mod schemes;
pub mod ssim;

pub use crate::autoencoder::{ae_denoise_image, ae_fuse, AeConfig, AeNetwork, Optimizer};
pub use crate::entropy::{dilate, entropy_map, EntropyMap, EntropySpec};
pub use crate::error::{Error, Result};
pub use crate::image::{partition_blocks, window_at, BlockGrid, Image, WindowSpec};
pub use crate::io::{load_image, save_image};
pub use crate::median::{
    median_filter_pass, median_of_window, recursive_median, recursive_threshold_denoise, threshold_merge,
    RecursionConfig,
};
pub use crate::noise::{inject_sp_noise, measure_noise_level, NoiseModel, NoiseSpec};
pub use crate::schemes::{denoise_2mf, denoise_mfs_ae, MfsAeConfig, TwoMfConfig};
pub use crate::ssim::{delta_ssim, ssim_global, ssim_local, ssim_map_metric, SsimReport, SsimSpec};
