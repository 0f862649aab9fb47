use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use spdenoise::assets;
use spdenoise::bench::{self, ComparisonOptions, CurvesOptions};
use spdenoise::config::{SchemeConfig, SchemeKind};
use spdenoise::entropy::{dilate, entropy_map, EntropySpec};
use spdenoise::manifest::{write_json, RunManifest};
use spdenoise::noise::{inject_sp_noise_with_layout, NoiseModel, NoiseSpec};
use spdenoise::ssim::{ssim_report, SsimSpec, DILATION_ITERATIONS, DILATION_KERNEL};
use spdenoise::{load_image, save_image, Error, Image};

/// Salt-and-pepper noise injection, denoising and SSIM evaluation.
///
/// Image arguments accept PNG or binary PGM paths, or `builtin:lena` and
/// `builtin:cap_edge` for the bundled test images.
#[derive(Parser, Debug)]
#[command(name = "spdenoise", version)]
struct Cli {
    /// Seed for noise injection and autoencoder initialisation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scheme configuration JSON (denoise).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; relative output paths are placed inside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Corrupt an image with salt-and-pepper noise.
    Noise {
        input: String,
        output: PathBuf,
        #[arg(long, default_value = "interval")]
        model: NoiseModel,
        /// Percentage of corrupted pixels, 0 to 100.
        #[arg(long)]
        level: f64,
    },
    /// Restore a noisy image with one of the schemes.
    Denoise {
        input: String,
        output: PathBuf,
        #[arg(long)]
        scheme: SchemeKind,
        /// Clean reference; enables the SSIM report.
        #[arg(long)]
        clean: Option<String>,
        /// Where to write the SSIM report (stdout when omitted).
        #[arg(long, requires = "clean")]
        report: Option<PathBuf>,
    },
    /// Compute the normalised sample-entropy map of an image.
    EntropyMap {
        input: String,
        output: PathBuf,
        /// Apply a 5x5 max filter once.
        #[arg(long)]
        dilate: bool,
        /// Also write the full-precision map as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare a restored image with its clean reference.
    Ssim { clean: String, restored: String },
    /// Regenerate the benchmark curves and tables.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Number of seeds, starting at --seed (default 0).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Test image (defaults: cap_edge for curves, lena for the tables).
        #[arg(long)]
        image: Option<String>,
        /// Skip the autoencoder in the curves suite.
        #[arg(long)]
        no_ae: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Suite {
    Curves,
    Table4,
    Fig12,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Curves => "curves",
            Suite::Table4 => "table4",
            Suite::Fig12 => "fig12",
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_input(spec: &str) -> CliResult<Image> {
    match spec {
        "builtin:lena" => Ok(assets::lena()),
        "builtin:cap_edge" => Ok(assets::cap_edge()),
        path => Ok(load_image(path)?),
    }
}

struct Ctx {
    seed: Option<u64>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    args: Vec<String>,
}

impl Ctx {
    fn output_path(&self, path: &Path) -> CliResult<PathBuf> {
        let full = match &self.out {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        };
        if let Some(parent) = full.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::Io {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
        Ok(full)
    }

    fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, self.args.clone())
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn cmd_noise(ctx: &Ctx, input: &str, output: &Path, model: NoiseModel, level: f64) -> CliResult<()> {
    let seed = ctx.seed.unwrap_or(0);
    let spec = NoiseSpec::new(model, level, seed)?;
    let clean = load_input(input)?;
    let mut m = ctx.manifest("noise");
    let (noisy, layout) = m.time("inject", || inject_sp_noise_with_layout(&clean, &spec))?;
    let out = ctx.output_path(output)?;
    save_image(&noisy, &out)?;
    m.config = json!({ "noise": spec, "corrupted": layout.corrupted(), "salt": layout.salt, "pepper": layout.pepper });
    m.inputs = vec![input.to_string()];
    m.outputs = vec![display(&out)];
    m.seeds = vec![seed];
    m.write(sidecar(&out))?;
    eprintln!("corrupted {} of {} pixels", layout.corrupted(), clean.len());
    Ok(())
}

fn read_scheme(ctx: &Ctx, kind: SchemeKind) -> CliResult<SchemeConfig> {
    let Some(path) = &ctx.config else {
        return Err(CliError::Usage(format!(
            "--config is required for scheme {}; required fields: {}",
            kind.name(),
            kind.required_fields().join(", ")
        )));
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let cfg = SchemeConfig::from_json(kind, &text).map_err(|e| {
        CliError::Usage(format!(
            "{}: {e}; required fields: {}",
            path.display(),
            kind.required_fields().join(", ")
        ))
    })?;
    Ok(match ctx.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn passes_of(cfg: &SchemeConfig) -> usize {
    match cfg {
        SchemeConfig::Mf(c) => c.passes,
        SchemeConfig::Ae(c) => c.passes,
        SchemeConfig::TwoMf(c) => c.passes,
        SchemeConfig::MfsAe(c) => c.passes,
    }
}

fn cmd_denoise(
    ctx: &Ctx,
    input: &str,
    output: &Path,
    kind: SchemeKind,
    clean: Option<&str>,
    report: Option<&Path>,
) -> CliResult<()> {
    let cfg = read_scheme(ctx, kind)?;
    let noisy = load_input(input)?;
    let clean_img = clean.map(load_input).transpose()?;
    if let Some(c) = &clean_img {
        c.ensure_same_dims(&noisy)?;
    }
    let passes = passes_of(&cfg);
    eprintln!("scheme {}: {} passes ({} recursions)", kind.name(), passes, passes - 1);
    let mut m = ctx.manifest("denoise");
    let restored = m.time("denoise", || cfg.run(&noisy))?;
    let out = ctx.output_path(output)?;
    save_image(&restored, &out)?;
    m.config = json!({
        "scheme": kind.name(),
        "scheme_config": cfg.body_json(),
        "passes": passes,
        "recursions": passes - 1,
        "entropy": EntropySpec::default(),
        "ssim": SsimSpec::default(),
    });
    m.inputs = std::iter::once(input.to_string())
        .chain(clean.map(str::to_string))
        .collect();
    m.outputs = vec![display(&out)];
    if let SchemeConfig::Ae(c) = &cfg {
        m.seeds = vec![c.ae.seed];
    } else if let SchemeConfig::MfsAe(c) = &cfg {
        m.seeds = vec![c.ae.seed];
    }
    if let Some(c) = &clean_img {
        let provenance = json!({ "input": input, "clean": clean, "scheme": kind.name(), "config": cfg.body_json() });
        let rep = m.time("report", || {
            ssim_report(c, &restored, &EntropySpec::default(), &SsimSpec::default(), provenance)
        })?;
        match report {
            Some(p) => {
                let p = ctx.output_path(p)?;
                write_json(&p, &rep)?;
                m.outputs.push(display(&p));
            }
            None => println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes")),
        }
    }
    m.write(sidecar(&out))?;
    Ok(())
}

fn cmd_entropy_map(ctx: &Ctx, input: &str, output: &Path, dilated: bool, csv: Option<&Path>) -> CliResult<()> {
    let img = load_input(input)?;
    let spec = EntropySpec::default();
    let mut m = ctx.manifest("entropy-map");
    let map = m.time("entropy_map", || -> spdenoise::Result<_> {
        let map = entropy_map(&img, &spec)?;
        if dilated {
            dilate(&map, DILATION_KERNEL, DILATION_ITERATIONS)
        } else {
            Ok(map)
        }
    })?;
    let out = ctx.output_path(output)?;
    save_image(&map.to_image(), &out)?;
    m.outputs = vec![display(&out)];
    if let Some(csv) = csv {
        let p = ctx.output_path(csv)?;
        std::fs::write(&p, map.to_csv()).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?;
        m.outputs.push(display(&p));
    }
    m.config = json!({
        "entropy": spec,
        "dilation": if dilated { json!({ "kernel": DILATION_KERNEL, "iterations": DILATION_ITERATIONS }) } else { json!(null) },
    });
    m.inputs = vec![input.to_string()];
    m.write(sidecar(&out))?;
    Ok(())
}

fn cmd_ssim(ctx: &Ctx, clean: &str, restored: &str) -> CliResult<()> {
    let a = load_input(clean)?;
    let b = load_input(restored)?;
    let provenance = json!({ "clean": clean, "restored": restored });
    let mut m = ctx.manifest("ssim");
    let rep = m.time("report", || {
        ssim_report(&a, &b, &EntropySpec::default(), &SsimSpec::default(), provenance)
    })?;
    println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    if ctx.out.is_some() {
        let p = ctx.output_path(Path::new("ssim_report.json"))?;
        write_json(&p, &rep)?;
        m.config = json!({ "entropy": EntropySpec::default(), "ssim": SsimSpec::default() });
        m.inputs = vec![clean.to_string(), restored.to_string()];
        m.outputs = vec![display(&p)];
        m.write(sidecar(&p))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| {
        CliError::Lib(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn cmd_bench(ctx: &Ctx, suite: Suite, count: u64, image: Option<&str>, no_ae: bool) -> CliResult<()> {
    if ctx.config.is_some() {
        return Err(CliError::Usage(
            "bench runs the shipped presets; --config is not accepted".into(),
        ));
    }
    if count == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let base = ctx.seed.unwrap_or(0);
    let seeds: Vec<u64> = (base..base + count).collect();
    let image_name = image.unwrap_or(match suite {
        Suite::Curves => "builtin:cap_edge",
        Suite::Table4 | Suite::Fig12 => "builtin:lena",
    });
    let clean = load_input(image_name)?;
    let dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let (espec, sspec) = (EntropySpec::default(), SsimSpec::default());
    let mut m = ctx.manifest("bench");
    m.inputs = vec![image_name.to_string()];
    m.seeds = seeds.clone();
    match suite {
        Suite::Curves => {
            let opts = CurvesOptions {
                seeds,
                include_ae: !no_ae,
                ..CurvesOptions::default()
            };
            let curves = m.time("curves", || bench::run_curves(&clean, &opts, espec, sspec))?;
            for (name, rows) in [
                ("curves_noise.csv", &curves.noise),
                ("curves_threshold.csv", &curves.threshold),
                ("curves_passes.csv", &curves.passes),
            ] {
                let p = dir.join(name);
                write_text(&p, &bench::curves_csv(rows))?;
                m.outputs.push(display(&p));
            }
            m.config = json!({
                "model": opts.model,
                "include_ae": opts.include_ae,
                "mf_window": opts.mf_window,
                "ae": opts.ae,
                "noise_levels": bench::noise_levels(),
                "thresholds": bench::threshold_grid(),
                "entropy": espec,
                "ssim": sspec,
            });
        }
        Suite::Table4 | Suite::Fig12 => {
            let opts = match suite {
                Suite::Table4 => ComparisonOptions::table4(seeds),
                _ => ComparisonOptions::fig12(seeds),
            };
            let report = m.time(suite.name(), || bench::run_comparison(&clean, &opts, espec, sspec))?;
            let p = dir.join(format!("{}.json", suite.name()));
            write_json(&p, &report)?;
            m.outputs.push(display(&p));
            m.config = json!({ "entropy": espec, "ssim": sspec, "schemes": {
                "mf3x3": opts.mf3x3, "mf5x5": opts.mf5x5, "2mf": opts.two_mf, "mfs_ae": opts.mfs_ae,
            }, "model": opts.model, "level": opts.level });
            for (k, agg) in &report.aggregate {
                eprintln!(
                    "{k:>7}: ssim_img {:.4} ± {:.4}  ssim_map {:.4}  dilated {:.4}",
                    agg.ssim_img.mean, agg.ssim_img.std, agg.ssim_map.mean, agg.ssim_map_dilated.mean
                );
            }
        }
    }
    m.write(dir.join(format!("{}_manifest.json", suite.name())))?;
    Ok(())
}

fn run(cli: Cli, args: Vec<String>) -> CliResult<()> {
    let ctx = Ctx {
        seed: cli.seed,
        config: cli.config,
        out: cli.out,
        args,
    };
    match &cli.command {
        Command::Noise {
            input,
            output,
            model,
            level,
        } => cmd_noise(&ctx, input, output, *model, *level),
        Command::Denoise {
            input,
            output,
            scheme,
            clean,
            report,
        } => cmd_denoise(&ctx, input, output, *scheme, clean.as_deref(), report.as_deref()),
        Command::EntropyMap {
            input,
            output,
            dilate,
            csv,
        } => cmd_entropy_map(&ctx, input, output, *dilate, csv.as_deref()),
        Command::Ssim { clean, restored } => cmd_ssim(&ctx, clean, restored),
        Command::Bench {
            suite,
            seeds,
            image,
            no_ae,
        } => cmd_bench(&ctx, *suite, *seeds, image.as_deref(), *no_ae),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = std::env::args().skip(1).collect();
    match run(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
