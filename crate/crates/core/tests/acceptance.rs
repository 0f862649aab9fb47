//! End-to-end acceptance checks. Each test prints one `criterion N:` line
//! with PASS or FAIL and the measured values, then asserts.
//!
//! The Lena comparisons train one autoencoder per 50x50 block and take
//! several minutes per seed; they are computed once and shared.

mod common;

use std::sync::OnceLock;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdenoise::bench::{run_comparison, ComparisonOptions, ComparisonReport, Scorer, Scores};
use spdenoise::config::{presets, recursive_ae};
use spdenoise::median::recursive_threshold_denoise_with;
use spdenoise::*;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

fn verdict(n: usize, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {status} {detail}");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn comparison(opts: ComparisonOptions) -> ComparisonReport {
    let report = run_comparison(&assets::lena(), &opts, EntropySpec::default(), SsimSpec::default()).unwrap();
    for run in &report.runs {
        let line: Vec<String> = run
            .scores
            .iter()
            .map(|(k, s)| format!("{k}={:.4}/{:.4}/{:.4}", s.ssim_img, s.ssim_map, s.ssim_map_dilated))
            .collect();
        eprintln!("  {} seed {}: {}", report.suite, run.seed, line.join(" "));
    }
    report
}

fn fixed_runs() -> &'static ComparisonReport {
    static R: OnceLock<ComparisonReport> = OnceLock::new();
    R.get_or_init(|| comparison(ComparisonOptions::table4(SEEDS.to_vec())))
}

fn interval_runs() -> &'static ComparisonReport {
    static R: OnceLock<ComparisonReport> = OnceLock::new();
    R.get_or_init(|| comparison(ComparisonOptions::fig12(SEEDS.to_vec())))
}

fn noisy(clean: &Image, level: f64, seed: u64) -> Image {
    inject_sp_noise(clean, &NoiseSpec::new(NoiseModel::Interval, level, seed).unwrap()).unwrap()
}

fn acceptance_images() -> [(&'static str, Image); 2] {
    [("lena", assets::lena()), ("cap_edge", assets::cap_edge())]
}

#[test]
fn criterion_1_fixed_noise_scores() {
    let r = fixed_runs();
    let (mf5, two, ae) = (
        r.mean_ssim_img("mf5x5"),
        r.mean_ssim_img("2mf"),
        r.mean_ssim_img("mfs_ae"),
    );
    let pass = within(mf5, 0.84, 0.03) && within(two, 0.85, 0.03) && within(ae, 0.87, 0.04);
    verdict(
        1,
        pass,
        &format!("mean ssim_img mf5x5={mf5:.4} (0.84±0.03) 2mf={two:.4} (0.85±0.03) mfs_ae={ae:.4} (0.87±0.04)"),
    );
}

#[test]
fn criterion_2_interval_noise_scores() {
    let (f, i) = (fixed_runs(), interval_runs());
    let (mf3, mf5, ae) = (
        i.mean_ssim_img("mf3x3"),
        i.mean_ssim_img("mf5x5"),
        i.mean_ssim_img("mfs_ae"),
    );
    let in_band = within(mf3, 0.80, 0.03) && within(mf5, 0.82, 0.03) && within(ae, 0.83, 0.04);
    let dominated: Vec<String> = spdenoise::bench::SCHEME_KEYS
        .iter()
        .filter(|k| f.mean_ssim_img(k) < i.mean_ssim_img(k))
        .map(|k| k.to_string())
        .collect();
    verdict(
        2,
        in_band && dominated.is_empty(),
        &format!(
            "mean ssim_img mf3x3={mf3:.4} (0.80±0.03) mf5x5={mf5:.4} (0.82±0.03) mfs_ae={ae:.4} (0.83±0.04); \
             schemes where interval beats fixed: {dominated:?}"
        ),
    );
}

#[test]
fn criterion_3_entropy_map_ordering() {
    let r = interval_runs();
    let m = |k: &str, f: fn(&Scores) -> f64| mean(r.scores(k).iter().map(f));
    let std = [
        m("mfs_ae", |s| s.ssim_map),
        m("mf5x5", |s| s.ssim_map),
        m("mf3x3", |s| s.ssim_map),
    ];
    let dil = [
        m("mfs_ae", |s| s.ssim_map_dilated),
        m("mf5x5", |s| s.ssim_map_dilated),
        m("mf3x3", |s| s.ssim_map_dilated),
    ];
    let ordered = |v: &[f64; 3]| v[0] > v[1] && v[1] > v[2];
    let close = |v: &[f64; 3], t: [f64; 3]| v.iter().zip(t).all(|(&a, b)| within(a, b, 0.06));
    let d_std = delta_ssim(std[0], std[1]).unwrap();
    let d_dil = delta_ssim(dil[0], dil[1]).unwrap();
    let pass = ordered(&std)
        && ordered(&dil)
        && close(&std, [0.45, 0.43, 0.42])
        && close(&dil, [0.38, 0.36, 0.34])
        && d_dil > d_std;
    verdict(
        3,
        pass,
        &format!(
            "standard mfs_ae/mf5x5/mf3x3={:.4}/{:.4}/{:.4} (0.45/0.43/0.42±0.06), \
             dilated={:.4}/{:.4}/{:.4} (0.38/0.36/0.34±0.06), delta dilated={d_dil:.2}% vs standard={d_std:.2}%",
            std[0], std[1], std[2], dil[0], dil[1], dil[2]
        ),
    );
}

#[test]
fn criterion_4_thresholding_benefit() {
    let levels = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0];
    let spec = SsimSpec::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, clean) in acceptance_images() {
        for &level in &levels {
            let mut plain = Vec::new();
            let mut merged = Vec::new();
            for seed in SEEDS {
                let n = noisy(&clean, level, seed);
                let filtered = median_filter_pass(&n, w(5));
                merged.push(ssim_global(&clean, &threshold_merge(&n, &filtered, 0.2).unwrap(), &spec).unwrap());
                plain.push(ssim_global(&clean, &filtered, &spec).unwrap());
            }
            let (p, t) = (mean(plain), mean(merged));
            let mut ok = t > p;
            if level <= 10.0 {
                ok &= p <= 0.85 && t >= 0.93;
            }
            pass &= ok;
            detail.push(format!(
                "{name}@{level}%: none={p:.4} thr={t:.4}{}",
                if ok { "" } else { " x" }
            ));
        }
    }
    verdict(4, pass, &detail.join(", "));
}

#[test]
fn criterion_5_recursion_stabilizes() {
    let cfg = RecursionConfig::new(w(5), 0.2, 16).unwrap();
    let spec = SsimSpec::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, clean) in acceptance_images() {
        let mut gains = Vec::new();
        let mut changes = Vec::new();
        for seed in SEEDS {
            let n = noisy(&clean, 66.6, seed);
            let mut kept = Vec::new();
            recursive_threshold_denoise_with(
                &n,
                |img| Ok(median_filter_pass(img, w(5))),
                &cfg,
                |pass, img| {
                    if [1, 2, 15, 16].contains(&pass) {
                        kept.push(img.clone());
                    }
                },
            )
            .unwrap();
            let s = |img: &Image| ssim_global(&clean, img, &spec).unwrap();
            gains.push(s(&kept[1]) - s(&kept[0]));
            changes.push(kept[3].max_abs_diff(&kept[2]).unwrap());
        }
        let gain = mean(gains);
        let worst = changes.iter().cloned().fold(0.0, f64::max);
        let ok = gain >= 0.05 && worst < 1.0 / 255.0;
        pass &= ok;
        let per_seed: Vec<String> = changes.iter().map(|c| format!("{c:.5}")).collect();
        detail.push(format!(
            "{name}: pass-2 gain={gain:.4} (>=0.05), change 15->16 per seed=[{}] (<{:.5})",
            per_seed.join(" "),
            1.0 / 255.0
        ));
    }
    verdict(5, pass, &detail.join("; "));
}

#[test]
fn criterion_6_median_beats_autoencoder() {
    let clean = assets::cap_edge();
    let scorer = Scorer::new(&clean, EntropySpec::default(), SsimSpec::default()).unwrap();
    let mut mf = Vec::new();
    let mut ae = Vec::new();
    for seed in SEEDS {
        let n = noisy(&clean, 46.6, seed);
        mf.push(
            scorer
                .score(&recursive_median(&n, &presets::table1_mf()).unwrap())
                .unwrap(),
        );
        let mut cfg = presets::table1_ae();
        cfg.ae.seed = seed;
        ae.push(scorer.score(&recursive_ae(&n, &cfg).unwrap()).unwrap());
    }
    let img = |v: &[Scores]| mean(v.iter().map(|s| s.ssim_img));
    let map = |v: &[Scores]| mean(v.iter().map(|s| s.ssim_map));
    let gap = img(&mf) - img(&ae);
    let map_below = mf
        .iter()
        .chain(&ae)
        .all(|s| s.ssim_map < s.ssim_img && s.ssim_map_dilated < s.ssim_img);
    let pass = gap >= 0.2 && map(&mf) > map(&ae) && map_below;
    verdict(
        6,
        pass,
        &format!(
            "ssim_img mf={:.4} ae={:.4} gap={gap:.4} (>=0.2), ssim_map mf={:.4} ae={:.4}, maps below image score: {map_below}",
            img(&mf),
            img(&ae),
            map(&mf),
            map(&ae)
        ),
    );
}

/// Pixels whose clean 7x7 neighbourhood varies by less than 0.05.
fn smooth_mask(clean: &Image) -> Vec<bool> {
    let spec = w(7);
    let mut mask = Vec::with_capacity(clean.len());
    for y in 0..clean.height() {
        for x in 0..clean.width() {
            let win = window_at(clean, x, y, spec);
            let (lo, hi) = win
                .iter()
                .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            mask.push(hi - lo < 0.05);
        }
    }
    mask
}

fn islands(restored: &Image, mask: &[bool]) -> usize {
    restored
        .pixels()
        .iter()
        .zip(mask)
        .filter(|&(&v, &smooth)| smooth && (v <= 0.1 || v >= 0.9))
        .count()
}

#[test]
fn criterion_7_islands() {
    let clean = assets::cap_edge();
    let mask = smooth_mask(&clean);
    let mut small = Vec::new();
    let mut large = Vec::new();
    for seed in SEEDS {
        let n = noisy(&clean, 66.6, seed);
        for (side, out) in [(3, &mut small), (5, &mut large)] {
            let restored = recursive_median(&n, &RecursionConfig::new(w(side), 0.1, 25).unwrap()).unwrap();
            out.push(islands(&restored, &mask));
        }
    }
    let small_mean = mean(small.iter().map(|&c| c as f64));
    let pass = small_mean >= 1.0 && large.iter().all(|&c| c == 0);
    verdict(
        7,
        pass,
        &format!(
            "smooth pixels={} island pixels per seed 3x3={small:?} 5x5={large:?}",
            mask.iter().filter(|&&m| m).count()
        ),
    );
}

#[test]
fn criterion_8_oracles() {
    let mut failures = Vec::new();
    let mut record = |what: &str, check: Check| {
        if let Err(e) = check {
            failures.push(format!("{what}: {e}"));
        }
    };

    let mut fixtures = 0;
    for width in 1..=16 {
        for height in 1..=16 {
            for side in [1, 3, 5, 7] {
                record(
                    "median",
                    check_median(width, height, side, (width * 31 + height) as u64),
                );
                fixtures += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut patches = 0;
    for side in 2..=7 {
        for (m, tau) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            if m * tau >= side {
                continue;
            }
            for _ in 0..10 {
                let patch: Vec<f64> = (0..side * side).map(|_| rng.gen_range(0..6) as f64 / 5.0).collect();
                record("sampen", check_sampen(&patch, side, m, tau, rng.gen_range(0.05..0.4)));
                patches += 1;
            }
        }
    }
    let constant = spdenoise::entropy::sampen2d(&[0.4; 25], 5, &EntropySpec::default(), 0.01).unwrap();
    record(
        "sampen constant",
        if (constant - 2.5f64.ln()).abs() < 1e-12 && (constant - 0.916).abs() < 5e-4 {
            Ok(())
        } else {
            Err(format!("{constant}"))
        },
    );

    for seed in 0..50 {
        let len = 1 + (seed as usize * 7) % 60;
        record(
            "ssim windows",
            check_ssim_windows(
                random_image(len, 1, seed).pixels(),
                random_image(len, 1, seed + 100).pixels(),
            ),
        );
        record(
            "ssim images",
            check_ssim_images(&random_image(9, 7, seed), &random_image(9, 7, seed + 200)),
        );
    }

    for seed in 0..20 {
        record("gradients", check_gradients(5, 2, 1 + seed as usize % 4, seed));
    }

    for i in 0..100 {
        let model = if i % 2 == 0 {
            NoiseModel::Interval
        } else {
            NoiseModel::Fixed
        };
        record(
            "noise count",
            check_noise_count(rng.gen_range(0.0..=100.0), rng.gen(), model),
        );
    }

    for seed in 0..10 {
        record("threshold zero", check_threshold_zero(seed));
    }

    verdict(
        8,
        failures.is_empty(),
        &format!(
            "{fixtures} median fixtures, {patches} entropy patches, 100 SSIM pairs, 20 gradient nets, \
             100 noise draws, 10 zero-threshold runs; failures: {failures:?}"
        ),
    );
}
