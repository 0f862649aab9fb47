//! Independent reference implementations and check batteries shared by the
//! oracle tests and the acceptance suite.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spdenoise::autoencoder::{AeNetwork, Optimizer};
use spdenoise::entropy::{sampen2d, EntropySpec, UndefinedPolicy};
use spdenoise::median::recursive_threshold_denoise;
use spdenoise::schemes::{denoise_2mf_detailed, denoise_mfs_ae_detailed};
use spdenoise::{
    ae_denoise_image, median_filter_pass, recursive_median, ssim_global, ssim_local, AeConfig, Image, MfsAeConfig,
    NoiseModel, NoiseSpec, RecursionConfig, SsimSpec, TwoMfConfig, WindowSpec,
};

pub type Check = Result<(), String>;

pub fn w(side: usize) -> WindowSpec {
    WindowSpec::new(side).unwrap()
}

pub fn random_image(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..width * height).map(|_| rng.gen::<f64>()).collect();
    Image::new(width, height, pixels).unwrap()
}

/// Clamp-to-edge read written without the library's window helpers.
fn clamped(img: &Image, x: isize, y: isize) -> f64 {
    let xi = x.max(0).min(img.width() as isize - 1) as usize;
    let yi = y.max(0).min(img.height() as isize - 1) as usize;
    img.pixels()[yi * img.width() + xi]
}

fn neighbourhood(img: &Image, x: usize, y: usize, side: usize) -> Vec<f64> {
    let r = (side / 2) as isize;
    let mut out = Vec::with_capacity(side * side);
    for dy in -r..=r {
        for dx in -r..=r {
            out.push(clamped(img, x as isize + dx, y as isize + dy));
        }
    }
    out
}

/// Median filter by full sort of every neighbourhood.
pub fn median_oracle(img: &Image, side: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(img.len());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let mut v = neighbourhood(img, x, y, side);
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            out.push(v[v.len() / 2]);
        }
    }
    out
}

/// Sample entropy by materializing every pattern and comparing all ordered pairs.
pub fn sampen_oracle(patch: &[f64], side: usize, m: usize, tau: usize, tol: f64, cap: bool) -> f64 {
    let patterns = |size: usize| -> Vec<Vec<f64>> {
        let span = (size - 1) * tau;
        let mut out = Vec::new();
        if span >= side {
            return out;
        }
        for oy in 0..side - span {
            for ox in 0..side - span {
                let mut p = Vec::new();
                for a in 0..size {
                    for b in 0..size {
                        p.push(patch[(oy + a * tau) * side + ox + b * tau]);
                    }
                }
                out.push(p);
            }
        }
        out
    };
    let count = |ps: &[Vec<f64>]| -> usize {
        let mut c = 0;
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                if i != j {
                    let d = ps[i].iter().zip(&ps[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if d <= tol {
                        c += 1;
                    }
                }
            }
        }
        c
    };
    let um = count(&patterns(m));
    let um1 = count(&patterns(m + 1));
    if um == 0 {
        0.0
    } else if um1 == 0 {
        if cap {
            (um as f64).ln()
        } else {
            0.0
        }
    } else {
        -(um1 as f64 / um as f64).ln()
    }
}

/// SSIM of two windows straight from the defining formula with 8-bit constants.
pub fn ssim_formula(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xs: Vec<f64> = x.iter().map(|v| v * 255.0).collect();
    let ys: Vec<f64> = y.iter().map(|v| v * 255.0).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let vx = xs.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>() / n;
    let vy = ys.iter().map(|b| (b - my) * (b - my)).sum::<f64>() / n;
    let cxy = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

/// Mean of per-pixel 7x7 SSIM windows.
pub fn ssim_global_oracle(a: &Image, b: &Image) -> f64 {
    let mut total = 0.0;
    for y in 0..a.height() {
        for x in 0..a.width() {
            total += ssim_formula(&neighbourhood(a, x, y, 7), &neighbourhood(b, x, y, 7));
        }
    }
    total / a.len() as f64
}

pub fn check_median(width: usize, height: usize, side: usize, seed: u64) -> Check {
    let img = random_image(width, height, seed);
    let got = median_filter_pass(&img, w(side));
    if got.pixels() != median_oracle(&img, side).as_slice() {
        return Err(format!("median mismatch {width}x{height} side {side} seed {seed}"));
    }
    Ok(())
}

pub fn check_sampen(patch: &[f64], side: usize, m: usize, tau: usize, tol: f64) -> Check {
    for (policy, cap) in [(UndefinedPolicy::Cap, true), (UndefinedPolicy::Zero, false)] {
        let spec = EntropySpec {
            window: w(5),
            m,
            tau,
            undefined_policy: policy,
            ..EntropySpec::default()
        };
        let got = sampen2d(patch, side, &spec, tol).map_err(|e| e.to_string())?;
        let want = sampen_oracle(patch, side, m, tau, tol, cap);
        if (got - want).abs() > 1e-12 {
            return Err(format!(
                "sampen {got} vs oracle {want} (side {side}, m {m}, tau {tau}, tol {tol})"
            ));
        }
    }
    Ok(())
}

pub fn check_ssim_windows(x: &[f64], y: &[f64]) -> Check {
    let spec = SsimSpec::default();
    let got = ssim_local(x, y, &spec).map_err(|e| e.to_string())?;
    let want = ssim_formula(x, y);
    if (got - want).abs() > 1e-10 {
        return Err(format!("ssim_local {got} vs formula {want}"));
    }
    let sym = ssim_local(y, x, &spec).map_err(|e| e.to_string())?;
    if (got - sym).abs() > 1e-12 {
        return Err(format!("ssim_local not symmetric: {got} vs {sym}"));
    }
    if ssim_local(x, x, &spec).map_err(|e| e.to_string())? != 1.0 {
        return Err("ssim_local(x, x) != 1".into());
    }
    Ok(())
}

pub fn check_ssim_images(a: &Image, b: &Image) -> Check {
    let spec = SsimSpec::default();
    let got = ssim_global(a, b, &spec).map_err(|e| e.to_string())?;
    let want = ssim_global_oracle(a, b);
    if (got - want).abs() > 1e-10 {
        return Err(format!("ssim_global {got} vs oracle {want}"));
    }
    let sym = ssim_global(b, a, &spec).map_err(|e| e.to_string())?;
    if (got - sym).abs() > 1e-12 {
        return Err(format!("ssim_global asymmetric {got} vs {sym}"));
    }
    if ssim_global(a, a, &spec).map_err(|e| e.to_string())? != 1.0 {
        return Err("ssim_global(x, x) != 1".into());
    }
    Ok(())
}

/// Compares every analytic gradient entry of a small f64 network with
/// central finite differences.
pub fn check_gradients(input: usize, hidden: usize, rows: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = AeNetwork::<f64>::random(input, hidden, seed);
    for b in net.b1.iter_mut().chain(net.b2.iter_mut()) {
        *b = rng.gen_range(-0.5..0.5);
    }
    let patterns: Vec<Vec<f64>> = (0..rows).map(|_| (0..input).map(|_| rng.gen()).collect()).collect();
    let (_, grads) = net.gradients(&patterns).map_err(|e| e.to_string())?;
    let h = 1e-6;
    let analytic = [&grads.w1, &grads.b1, &grads.w2, &grads.b2];
    for (part, g) in analytic.iter().enumerate() {
        for i in 0..g.len() {
            let mut plus = net.clone();
            let mut minus = net.clone();
            *param_mut(&mut plus, part, i) += h;
            *param_mut(&mut minus, part, i) -= h;
            let lp = plus.loss(&patterns).map_err(|e| e.to_string())?;
            let lm = minus.loss(&patterns).map_err(|e| e.to_string())?;
            let numeric = (lp - lm) / (2.0 * h);
            let a = g[i];
            let scale = a.abs().max(numeric.abs());
            if scale > 1e-9 && (a - numeric).abs() / scale > 1e-4 {
                return Err(format!("part {part} index {i}: analytic {a} vs numeric {numeric}"));
            }
        }
    }
    Ok(())
}

fn param_mut(n: &mut AeNetwork<f64>, part: usize, i: usize) -> &mut f64 {
    match part {
        0 => &mut n.w1[i],
        1 => &mut n.b1[i],
        2 => &mut n.w2[i],
        _ => &mut n.b2[i],
    }
}

/// Checks the corrupted count and salt/pepper split against closed-form counts.
pub fn check_noise_count(level: f64, seed: u64, model: NoiseModel) -> Check {
    let clean = Image::from_fn(37, 23, |x, y| 0.25 + 0.5 * ((x * 7 + y * 3) % 11) as f64 / 10.0).unwrap();
    let n = clean.len();
    let spec = NoiseSpec::new(model, level, seed).map_err(|e| e.to_string())?;
    let noisy = spdenoise::inject_sp_noise(&clean, &spec).map_err(|e| e.to_string())?;
    let expected = (level / 100.0 * n as f64 + 0.5).floor() as usize;
    let changed: Vec<f64> = clean
        .pixels()
        .iter()
        .zip(noisy.pixels())
        .filter(|(a, b)| a != b)
        .map(|(_, &b)| b)
        .collect();
    if changed.len() != expected {
        return Err(format!(
            "{model:?} level {level} seed {seed}: {} corrupted, expected {expected}",
            changed.len()
        ));
    }
    let salt = changed.iter().filter(|&&v| v >= 0.9).count();
    let pepper = changed.iter().filter(|&&v| v <= 0.1).count();
    if salt + pepper != expected || salt != expected.div_ceil(2) {
        return Err(format!(
            "{model:?} level {level} seed {seed}: salt {salt} pepper {pepper}"
        ));
    }
    if model == NoiseModel::Fixed && changed.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err("fixed model produced non-extreme values".into());
    }
    Ok(())
}

pub fn small_ae(seed: u64) -> AeConfig {
    AeConfig {
        block_h: 6,
        block_w: 5,
        window: w(3),
        epochs: 5,
        learning_rate: 1e-3,
        compression_ratio: 0.5,
        seed,
        optimizer: Optimizer::default(),
    }
}

/// Zero thresholds reduce every scheme to its filtered branch, bit for bit.
pub fn check_threshold_zero(seed: u64) -> Check {
    let noisy = random_image(13, 11, seed);
    let mf = RecursionConfig::new(w(3), 0.0, 1).unwrap();
    if recursive_median(&noisy, &mf).unwrap() != median_filter_pass(&noisy, w(3)) {
        return Err("MF with zero threshold differs from one plain pass".into());
    }
    let ae = small_ae(seed);
    let via_loop = recursive_threshold_denoise(
        &noisy,
        |img| ae_denoise_image(img, &ae),
        &RecursionConfig::new(w(3), 0.0, 1).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    if via_loop != ae_denoise_image(&noisy, &ae).map_err(|e| e.to_string())? {
        return Err("AE with zero threshold differs from one plain pass".into());
    }
    let two = TwoMfConfig {
        w1: w(3),
        w2: w(5),
        thr1_w1: 0.1,
        thr1_w2: 0.15,
        thr2: 0.0,
        passes: 3,
    };
    let out = denoise_2mf_detailed(&noisy, &two).map_err(|e| e.to_string())?;
    if out.output != out.out_w2 || out.out_w2 != recursive_median(&noisy, &two.large()).unwrap() {
        return Err("2MF with zero final threshold differs from its large-window branch".into());
    }
    let mfs = MfsAeConfig {
        w1: w(3),
        w2: w(5),
        thr_min: 0.08,
        thr_max: 0.1,
        thr_step: 0.01,
        thr_w2: 0.1,
        passes: 2,
        ae: AeConfig {
            window: w(1),
            ..small_ae(seed)
        },
        thr_final: 0.0,
    };
    let out = denoise_mfs_ae_detailed(&noisy, &mfs).map_err(|e| e.to_string())?;
    let w2 = recursive_median(&noisy, &RecursionConfig::new(w(5), 0.1, 2).unwrap()).unwrap();
    if out.output != w2 {
        return Err("MFs-AE with zero final threshold differs from its large-window branch".into());
    }
    Ok(())
}
