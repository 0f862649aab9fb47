mod common;

use common::*;
use proptest::prelude::*;
use spdenoise::autoencoder::{build_shift_training_set, denoise_block, train_ae, Optimizer};
use spdenoise::entropy::{raw_entropy_map, EntropyMap, ToleranceMode};
use spdenoise::schemes::denoise_2mf_detailed;
use spdenoise::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn outputs_stay_in_range(seed: u64, thr in 0.0f64..0.5, passes in 1usize..4) {
        let img = random_image(12, 9, seed);
        let out = recursive_median(&img, &RecursionConfig::new(w(3), thr, passes).unwrap()).unwrap();
        prop_assert!(out.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn merge_selects_source_or_filtered(seed: u64, thr in 0.0f64..1.0) {
        let a = random_image(8, 8, seed);
        let b = random_image(8, 8, seed ^ 1);
        let c = threshold_merge(&a, &b, thr).unwrap();
        for ((&ci, &ai), &bi) in c.pixels().iter().zip(a.pixels()).zip(b.pixels()) {
            let want = if (ai - bi).abs() <= thr { ai } else { bi };
            prop_assert_eq!(ci, want);
        }
    }

    #[test]
    fn two_mf_pixels_come_from_a_branch(seed: u64) {
        let img = random_image(14, 10, seed);
        let cfg = TwoMfConfig { w1: w(3), w2: w(5), thr1_w1: 0.1, thr1_w2: 0.1, thr2: 0.2, passes: 3 };
        let out = denoise_2mf_detailed(&img, &cfg).unwrap();
        for ((&o, &a), &b) in out.output.pixels().iter().zip(out.out_w1.pixels()).zip(out.out_w2.pixels()) {
            prop_assert!(o == a || o == b);
        }
    }

    #[test]
    fn median_iteration_settles(seed: u64, side in prop::sample::select(vec![3usize, 5])) {
        prop_assert!(settle(random_image(32, 32, seed), side, 300).is_some());
    }

    #[test]
    fn dilation_is_extensive(seed: u64) {
        let img = random_image(11, 7, seed);
        let map = entropy_map(&img, &EntropySpec::default()).unwrap();
        let d = dilate(&map, 5, 1).unwrap();
        prop_assert!(d.values().iter().zip(map.values()).all(|(a, b)| a >= b));
    }

    #[test]
    fn entropy_map_normalized(seed: u64) {
        let img = random_image(10, 10, seed);
        let map = entropy_map(&img, &EntropySpec::default()).unwrap();
        let max = map.values().iter().cloned().fold(f64::MIN, f64::max);
        let min = map.values().iter().cloned().fold(f64::MAX, f64::min);
        prop_assert_eq!(min, 0.0);
        prop_assert!(max == 1.0 || max == 0.0);
        prop_assert_eq!((map.width(), map.height()), img.dims());
    }

    #[test]
    fn entropy_map_translation_equivariant(seed: u64, dx in 0usize..4, dy in 0usize..4) {
        let big = random_image(24, 24, seed);
        let spec = EntropySpec { r_mode: ToleranceMode::Absolute, ..EntropySpec::default() };
        let a = big.crop(0, 0, 18, 18).unwrap();
        let b = big.crop(dx, dy, 18, 18).unwrap();
        let ra = raw_entropy_map(&a, &spec).unwrap();
        let rb = raw_entropy_map(&b, &spec).unwrap();
        // Compare pixels whose 5x5 windows lie inside both crops.
        for y in 2 + dy..16 {
            for x in 2 + dx..16 {
                let (xb, yb) = (x - dx, y - dy);
                if xb >= 2 && yb >= 2 {
                    prop_assert_eq!(ra[y * 18 + x], rb[yb * 18 + xb]);
                }
            }
        }
    }

    #[test]
    fn ae_outputs_in_open_unit_interval(seed: u64) {
        let img = random_image(9, 8, seed);
        let out = ae_denoise_image(&img, &small_ae(seed)).unwrap();
        prop_assert!(out.pixels().iter().all(|&v| v > 0.0 && v < 1.0));
    }
}

#[derive(Debug, PartialEq)]
enum Settled {
    Root,
    TwoCycle,
}

/// Iterates the plain median filter until it reaches a fixed point or a
/// period-two oscillation.
fn settle(img: Image, side: usize, max_passes: usize) -> Option<Settled> {
    let mut prev = img;
    let mut cur = median_filter_pass(&prev, w(side));
    for _ in 0..max_passes {
        let next = median_filter_pass(&cur, w(side));
        if next == cur {
            return Some(Settled::Root);
        }
        if next == prev {
            return Some(Settled::TwoCycle);
        }
        prev = std::mem::replace(&mut cur, next);
    }
    None
}

#[test]
fn median_iteration_mostly_reaches_a_root() {
    // In 2-D a 3x3 median can lock into a two-pass oscillation on a few
    // pixels; 5x5 reached a root on every image tried.
    let roots = |side| {
        (0..100)
            .filter(|&s| settle(random_image(32, 32, s), side, 300) == Some(Settled::Root))
            .count()
    };
    assert!(roots(3) >= 90, "3x3 roots: {}", roots(3));
    assert_eq!(roots(5), 100);
}

#[test]
fn recursion_is_deterministic() {
    let img = random_image(20, 15, 3);
    let cfg = small_ae(9);
    assert_eq!(
        ae_denoise_image(&img, &cfg).unwrap(),
        ae_denoise_image(&img, &cfg).unwrap()
    );
    let noisy = inject_sp_noise(&img, &NoiseSpec::new(NoiseModel::Interval, 30.0, 5).unwrap()).unwrap();
    assert_eq!(
        noisy,
        inject_sp_noise(&img, &NoiseSpec::new(NoiseModel::Interval, 30.0, 5).unwrap()).unwrap()
    );
    let fuse_cfg = AeConfig { window: w(1), ..cfg };
    let variants = vec![img.clone(), noisy.clone(), img.clone()];
    assert_eq!(
        ae_fuse(&variants, &fuse_cfg).unwrap(),
        ae_fuse(&variants, &fuse_cfg).unwrap()
    );
}

#[test]
fn blocks_are_order_independent() {
    let img = random_image(17, 13, 4);
    let cfg = small_ae(21);
    let whole = ae_denoise_image(&img, &cfg).unwrap();
    let grid = partition_blocks(&img, cfg.block_h, cfg.block_w).unwrap();
    let mut out = vec![f64::NAN; img.len()];
    for (index, &block) in grid.blocks().iter().enumerate().rev() {
        let values = denoise_block(&img, block, index, &cfg).unwrap();
        for r in 0..block.height {
            for c in 0..block.width {
                out[(block.y + r) * img.width() + block.x + c] = values[r * block.width + c].clamp(0.0, 1.0);
            }
        }
    }
    assert_eq!(whole.pixels(), out.as_slice());
}

#[test]
fn loss_non_increasing_with_small_steps() {
    let patterns = vec![
        vec![0.2, 0.7, 0.4, 0.9],
        vec![0.3, 0.6, 0.5, 0.8],
        vec![0.1, 0.9, 0.3, 0.7],
    ];
    for optimizer in [Optimizer::Gd, Optimizer::default()] {
        let cfg = AeConfig {
            block_h: 2,
            block_w: 2,
            window: w(1),
            epochs: 200,
            learning_rate: 1e-3,
            compression_ratio: 0.5,
            seed: 5,
            optimizer,
        };
        let trained = train_ae::<f64>(&patterns, &cfg).unwrap();
        let mut prev = trained.initial_loss;
        for &l in &trained.losses {
            assert!(l <= prev + 1e-15, "{optimizer:?}: {l} > {prev}");
            prev = l;
        }
        assert!(trained.final_loss() < trained.initial_loss);
    }
}

#[test]
fn constant_pattern_loss_decreases() {
    let cfg = AeConfig {
        block_h: 3,
        block_w: 3,
        window: w(1),
        epochs: 50,
        learning_rate: 1e-2,
        compression_ratio: 0.4,
        seed: 2,
        optimizer: Optimizer::Gd,
    };
    let trained = train_ae::<f64>(&[vec![0.7; 9]], &cfg).unwrap();
    assert_eq!(trained.losses.len(), 50);
    assert!(trained.losses.windows(2).all(|p| p[1] <= p[0]));
}

#[test]
fn identical_variants_fuse_to_their_content() {
    let img = Image::from_fn(10, 10, |x, y| 0.3 + 0.04 * ((x + y) % 5) as f64).unwrap();
    let cfg = AeConfig {
        block_h: 10,
        block_w: 10,
        window: w(1),
        epochs: 300,
        learning_rate: 1e-2,
        compression_ratio: 0.4,
        seed: 1,
        optimizer: Optimizer::default(),
    };
    let fused = ae_fuse(&[img.clone(), img.clone(), img.clone()], &cfg).unwrap();
    let mae: f64 = fused
        .pixels()
        .iter()
        .zip(img.pixels())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / img.len() as f64;
    assert!(mae < 0.05, "mean abs error {mae}");
}

#[test]
fn fusion_training_set_cardinality() {
    let img = random_image(12, 12, 1);
    let grid = partition_blocks(&img, 5, 5).unwrap();
    let block = grid.blocks()[0];
    for side in [1usize, 3, 5] {
        let set: Vec<_> = (0..8)
            .flat_map(|_| build_shift_training_set(&img, block, w(side)))
            .collect();
        assert_eq!(set.len(), 8 * side * side);
    }
}

#[test]
fn noisy_ssim_falls_with_noise_level() {
    let clean = assets::cap_edge();
    let spec = SsimSpec::default();
    let mut prev = f64::INFINITY;
    for level in [10.0, 20.0, 30.0, 40.0, 50.0, 60.0] {
        let mean: f64 = (0..5)
            .map(|seed| {
                let noisy =
                    inject_sp_noise(&clean, &NoiseSpec::new(NoiseModel::Interval, level, seed).unwrap()).unwrap();
                ssim_global(&clean, &noisy, &spec).unwrap()
            })
            .sum::<f64>()
            / 5.0;
        assert!(mean < prev, "level {level}: {mean} >= {prev}");
        prev = mean;
    }
}

#[test]
fn dilating_a_single_peak() {
    let mut values = vec![0.0; 81];
    values[40] = 1.0;
    let map = EntropyMap::from_image(&Image::new(9, 9, values).unwrap());
    let d = dilate(&map, 5, 1).unwrap();
    for y in 0..9 {
        for x in 0..9 {
            let inside = (2..=6).contains(&x) && (2..=6).contains(&y);
            assert_eq!(d.get(x, y), if inside { 1.0 } else { 0.0 });
        }
    }
}
