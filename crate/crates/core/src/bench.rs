//! Benchmark sweeps: SSIM curves against noise level, threshold and pass
//! count, and the multi-seed scheme comparison on Lena.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::autoencoder::{ae_denoise_image, AeConfig};
use crate::config::{presets, AeSchemeConfig};
use crate::entropy::{dilate, entropy_map, EntropySpec};
use crate::error::Result;
use crate::image::{Image, WindowSpec};
use crate::median::{
    median_filter_pass, recursive_median, recursive_threshold_denoise_with, threshold_merge, RecursionConfig,
};
use crate::noise::{inject_sp_noise, NoiseModel, NoiseSpec};
use crate::schemes::{mfs_ae_from_branches, MfsAeConfig, TwoMfConfig};
use crate::ssim::{ssim_global, SsimSpec, DILATION_ITERATIONS, DILATION_KERNEL};

/// Similarity of one restored image to the clean reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub ssim_img: f64,
    pub ssim_map: f64,
    pub ssim_map_dilated: f64,
}

/// Scores restorations against one clean image, computing its entropy maps once.
pub struct Scorer {
    clean: Image,
    clean_map: Image,
    clean_map_dilated: Image,
    espec: EntropySpec,
    sspec: SsimSpec,
}

impl Scorer {
    pub fn new(clean: &Image, espec: EntropySpec, sspec: SsimSpec) -> Result<Self> {
        let map = entropy_map(clean, &espec)?;
        let dilated = dilate(&map, DILATION_KERNEL, DILATION_ITERATIONS)?;
        Ok(Self {
            clean: clean.clone(),
            clean_map: map.to_image(),
            clean_map_dilated: dilated.to_image(),
            espec,
            sspec,
        })
    }

    pub fn clean(&self) -> &Image {
        &self.clean
    }

    pub fn ssim_img(&self, restored: &Image) -> Result<f64> {
        ssim_global(&self.clean, restored, &self.sspec)
    }

    pub fn score(&self, restored: &Image) -> Result<Scores> {
        let ssim_img = self.ssim_img(restored)?;
        let map = entropy_map(restored, &self.espec)?;
        let dilated = dilate(&map, DILATION_KERNEL, DILATION_ITERATIONS)?;
        Ok(Scores {
            ssim_img,
            ssim_map: ssim_global(&self.clean_map, &map.to_image(), &self.sspec)?,
            ssim_map_dilated: ssim_global(&self.clean_map_dilated, &dilated.to_image(), &self.sspec)?,
        })
    }
}

/// One row of a curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub mu_sp: f64,
    pub seed: u64,
    pub scheme: String,
    pub passes: usize,
    pub threshold: f64,
    pub ssim_img: f64,
    pub ssim_map: f64,
    pub ssim_map_dilated: f64,
}

pub const CURVE_CSV_HEADER: &str = "mu_sp,seed,scheme,passes,threshold,ssim_img,ssim_map,ssim_map_dilated";

impl CurveRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.mu_sp,
            self.seed,
            self.scheme,
            self.passes,
            self.threshold,
            self.ssim_img,
            self.ssim_map,
            self.ssim_map_dilated
        )
    }
}

/// Renders rows as CSV with a header, sorted by `(scheme, threshold, mu_sp, passes, seed)`.
pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut sorted: Vec<&CurveRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.threshold.total_cmp(&b.threshold))
            .then(a.mu_sp.total_cmp(&b.mu_sp))
            .then(a.passes.cmp(&b.passes))
            .then(a.seed.cmp(&b.seed))
    });
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Filter inside the recursive loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFilter {
    Mf(WindowSpec),
    Ae(AeSchemeConfig),
}

impl CurveFilter {
    fn name(&self) -> &'static str {
        match self {
            CurveFilter::Mf(_) => "mf",
            CurveFilter::Ae(_) => "ae",
        }
    }

    fn window(&self) -> WindowSpec {
        match self {
            CurveFilter::Mf(w) => *w,
            CurveFilter::Ae(c) => c.ae.window,
        }
    }

    fn apply(&self, img: &Image, seed: u64) -> Result<Image> {
        match self {
            CurveFilter::Mf(w) => Ok(median_filter_pass(img, *w)),
            CurveFilter::Ae(c) => ae_denoise_image(img, &AeConfig { seed, ..c.ae }),
        }
    }
}

/// Runs the recursive loop once for `max(record)` passes and scores the
/// iterates whose pass number is listed in `record`.
#[allow(clippy::too_many_arguments)]
pub fn trace_scores(
    scorer: &Scorer,
    noisy: &Image,
    filter: &CurveFilter,
    threshold: f64,
    record: &[usize],
    seed: u64,
    mu_sp: f64,
) -> Result<Vec<CurveRow>> {
    let passes = record.iter().copied().max().unwrap_or(1);
    let cfg = RecursionConfig::new(filter.window(), threshold, passes)?;
    let mut kept = Vec::new();
    recursive_threshold_denoise_with(
        noisy,
        |img| filter.apply(img, seed),
        &cfg,
        |pass, img| {
            if record.contains(&pass) {
                kept.push((pass, img.clone()));
            }
        },
    )?;
    kept.into_iter()
        .map(|(pass, img)| {
            let s = scorer.score(&img)?;
            Ok(CurveRow {
                mu_sp,
                seed,
                scheme: filter.name().to_string(),
                passes: pass,
                threshold,
                ssim_img: s.ssim_img,
                ssim_map: s.ssim_map,
                ssim_map_dilated: s.ssim_map_dilated,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CurvesOptions {
    pub seeds: Vec<u64>,
    pub model: NoiseModel,
    pub include_ae: bool,
    pub mf_window: WindowSpec,
    pub ae: AeSchemeConfig,
}

impl Default for CurvesOptions {
    fn default() -> Self {
        let mf = presets::table1_mf();
        Self {
            seeds: vec![0],
            model: NoiseModel::Interval,
            include_ae: true,
            mf_window: mf.window,
            ae: presets::table1_ae(),
        }
    }
}

/// The three curve families.
#[derive(Debug, Clone, Default)]
pub struct Curves {
    /// SSIM against noise level 5..70 %, with and without threshold, passes 1, 2 and 6.
    pub noise: Vec<CurveRow>,
    /// SSIM against threshold 0..0.5 at 23.3 % noise, passes 1, 6 and 11.
    pub threshold: Vec<CurveRow>,
    /// SSIM against pass count 1..16 at 66.6 % noise, threshold 0.2.
    pub passes: Vec<CurveRow>,
}

pub fn noise_levels() -> Vec<f64> {
    (1..=14).map(|i| 5.0 * i as f64).collect()
}

pub fn threshold_grid() -> Vec<f64> {
    (0..=10).map(|i| (i as f64 * 0.05 * 100.0).round() / 100.0).collect()
}

pub fn run_curves(clean: &Image, opts: &CurvesOptions, espec: EntropySpec, sspec: SsimSpec) -> Result<Curves> {
    let scorer = Scorer::new(clean, espec, sspec)?;
    let mut filters = vec![CurveFilter::Mf(opts.mf_window)];
    if opts.include_ae {
        filters.push(CurveFilter::Ae(opts.ae));
    }
    let mut curves = Curves::default();
    for &seed in &opts.seeds {
        for mu in noise_levels() {
            let noisy = inject_sp_noise(clean, &NoiseSpec::new(opts.model, mu, seed)?)?;
            for f in &filters {
                for thr in [0.0, 0.2] {
                    curves
                        .noise
                        .extend(trace_scores(&scorer, &noisy, f, thr, &[1, 2, 6], seed, mu)?);
                }
            }
        }
        let noisy = inject_sp_noise(clean, &NoiseSpec::new(opts.model, 23.3, seed)?)?;
        for f in &filters {
            for thr in threshold_grid() {
                curves
                    .threshold
                    .extend(trace_scores(&scorer, &noisy, f, thr, &[1, 6, 11], seed, 23.3)?);
            }
        }
        let noisy = inject_sp_noise(clean, &NoiseSpec::new(opts.model, 66.6, seed)?)?;
        let all: Vec<usize> = (1..=16).collect();
        for f in &filters {
            curves
                .passes
                .extend(trace_scores(&scorer, &noisy, f, 0.2, &all, seed, 66.6)?);
        }
    }
    Ok(curves)
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub ssim_img: Stat,
    pub ssim_map: Stat,
    pub ssim_map_dilated: Stat,
}

impl Aggregate {
    pub fn of(scores: &[Scores]) -> Self {
        let pick = |f: fn(&Scores) -> f64| Stat::of(&scores.iter().map(f).collect::<Vec<_>>());
        Self {
            count: scores.len(),
            ssim_img: pick(|s| s.ssim_img),
            ssim_map: pick(|s| s.ssim_map),
            ssim_map_dilated: pick(|s| s.ssim_map_dilated),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub scores: BTreeMap<String, Scores>,
}

/// Multi-seed comparison of single median filters, 2MF and MFs-AE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub suite: String,
    pub model: NoiseModel,
    pub level: f64,
    pub width: usize,
    pub height: usize,
    pub seeds: Vec<u64>,
    pub mf3x3: RecursionConfig,
    pub mf5x5: RecursionConfig,
    pub two_mf: TwoMfConfig,
    pub mfs_ae: MfsAeConfig,
    pub runs: Vec<SeedRun>,
    pub aggregate: BTreeMap<String, Aggregate>,
}

impl ComparisonReport {
    pub fn mean_ssim_img(&self, scheme: &str) -> f64 {
        self.aggregate[scheme].ssim_img.mean
    }

    pub fn scores(&self, scheme: &str) -> Vec<Scores> {
        self.runs.iter().map(|r| r.scores[scheme]).collect()
    }
}

pub const SCHEME_KEYS: [&str; 4] = ["mf3x3", "mf5x5", "2mf", "mfs_ae"];

/// Settings of the Lena comparison. The autoencoder seed of each run is the
/// noise seed.
#[derive(Debug, Clone)]
pub struct ComparisonOptions {
    pub suite: String,
    pub model: NoiseModel,
    pub level: f64,
    pub seeds: Vec<u64>,
    pub mf3x3: RecursionConfig,
    pub mf5x5: RecursionConfig,
    pub two_mf: TwoMfConfig,
    pub mfs_ae: MfsAeConfig,
}

impl ComparisonOptions {
    pub fn new(suite: &str, model: NoiseModel, level: f64, seeds: Vec<u64>) -> Self {
        Self {
            suite: suite.to_string(),
            model,
            level,
            seeds,
            mf3x3: presets::table3_mf(3),
            mf5x5: presets::table3_mf(5),
            two_mf: presets::table2_2mf(),
            mfs_ae: presets::table3_mfs_ae(),
        }
    }

    /// Fixed noise at 61 %.
    pub fn table4(seeds: Vec<u64>) -> Self {
        Self::new("table4", NoiseModel::Fixed, 61.0, seeds)
    }

    /// Interval noise at 61 %.
    pub fn fig12(seeds: Vec<u64>) -> Self {
        Self::new("fig12", NoiseModel::Interval, 61.0, seeds)
    }
}

/// Recursive median results keyed by `(side, threshold bits, passes)`, so
/// filters shared between schemes run once per noisy image.
#[derive(Default)]
struct MedianCache {
    done: HashMap<(usize, u64, usize), Image>,
}

impl MedianCache {
    fn get(&mut self, source: &Image, cfg: &RecursionConfig) -> Result<Image> {
        let key = (cfg.window.side(), cfg.threshold.to_bits(), cfg.passes);
        if let Some(img) = self.done.get(&key) {
            return Ok(img.clone());
        }
        let img = recursive_median(source, cfg)?;
        self.done.insert(key, img.clone());
        Ok(img)
    }
}

/// Restored images of every compared scheme for one noisy input.
pub struct ComparisonImages {
    pub mf3x3: Image,
    pub mf5x5: Image,
    pub two_mf: Image,
    pub mfs_ae: Image,
}

pub fn comparison_images(noisy: &Image, opts: &ComparisonOptions, seed: u64) -> Result<ComparisonImages> {
    opts.two_mf.validate()?;
    opts.mfs_ae.validate()?;
    let mut cache = MedianCache::default();
    let mf3x3 = cache.get(noisy, &opts.mf3x3)?;
    let mf5x5 = cache.get(noisy, &opts.mf5x5)?;
    let small = cache.get(noisy, &opts.two_mf.small())?;
    let large = cache.get(noisy, &opts.two_mf.large())?;
    let two_mf = threshold_merge(&small, &large, opts.two_mf.thr2)?;

    let cfg = MfsAeConfig {
        ae: AeConfig { seed, ..opts.mfs_ae.ae },
        ..opts.mfs_ae
    };
    let bank = cfg
        .ladder()
        .into_iter()
        .map(|threshold| {
            cache.get(
                noisy,
                &RecursionConfig {
                    window: cfg.w1,
                    threshold,
                    passes: cfg.passes,
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let out_w2 = cache.get(
        noisy,
        &RecursionConfig {
            window: cfg.w2,
            threshold: cfg.thr_w2,
            passes: cfg.passes,
        },
    )?;
    let mfs_ae = mfs_ae_from_branches(bank, out_w2, &cfg)?.output;
    Ok(ComparisonImages {
        mf3x3,
        mf5x5,
        two_mf,
        mfs_ae,
    })
}

pub fn run_comparison(
    clean: &Image,
    opts: &ComparisonOptions,
    espec: EntropySpec,
    sspec: SsimSpec,
) -> Result<ComparisonReport> {
    let scorer = Scorer::new(clean, espec, sspec)?;
    let mut runs = Vec::with_capacity(opts.seeds.len());
    for &seed in &opts.seeds {
        let noisy = inject_sp_noise(clean, &NoiseSpec::new(opts.model, opts.level, seed)?)?;
        let imgs = comparison_images(&noisy, opts, seed)?;
        let mut scores = BTreeMap::new();
        scores.insert("mf3x3".to_string(), scorer.score(&imgs.mf3x3)?);
        scores.insert("mf5x5".to_string(), scorer.score(&imgs.mf5x5)?);
        scores.insert("2mf".to_string(), scorer.score(&imgs.two_mf)?);
        scores.insert("mfs_ae".to_string(), scorer.score(&imgs.mfs_ae)?);
        runs.push(SeedRun { seed, scores });
    }
    let aggregate = SCHEME_KEYS
        .iter()
        .map(|&k| {
            let s: Vec<Scores> = runs.iter().map(|r| r.scores[k]).collect();
            (k.to_string(), Aggregate::of(&s))
        })
        .collect();
    Ok(ComparisonReport {
        suite: opts.suite.clone(),
        model: opts.model,
        level: opts.level,
        width: clean.width(),
        height: clean.height(),
        seeds: opts.seeds.clone(),
        mf3x3: opts.mf3x3,
        mf5x5: opts.mf5x5,
        two_mf: opts.two_mf,
        mfs_ae: opts.mfs_ae,
        runs,
        aggregate,
    })
}
