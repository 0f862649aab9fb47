//! Three-layer sigmoid autoencoder trained block by block.
//!
//! An image is tiled into non-overlapping blocks. Each block gets a freshly
//! initialized network whose input and output layers have one neuron per
//! block pixel. The training set is the block itself plus copies shifted by
//! every offset inside an `m x m` window; the denoised block is the network's
//! reconstruction of the unshifted block. Networks live only for one block.
//!
//! Networks are generic over the float type. Image-level operations use
//! `f32`, which halves the cost of the matrix products.

use matrixmultiply::{dgemm, sgemm};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{partition_blocks, Block, Image, WindowSpec};

/// Floating-point type a network can be trained in.
pub trait Real: Float + Default + std::fmt::Debug + Send + Sync + 'static {
    /// `c = alpha * a * b + beta * c` on strided row/column layouts.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        a_strides: (isize, isize),
        b: &[Self],
        b_strides: (isize, isize),
        beta: Self,
        c: &mut [Self],
        c_strides: (isize, isize),
    );

    fn lit(v: f64) -> Self;
}

macro_rules! impl_real {
    ($t:ty, $gemm:ident) => {
        impl Real for $t {
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                (rsa, csa): (isize, isize),
                b: &[Self],
                (rsb, csb): (isize, isize),
                beta: Self,
                c: &mut [Self],
                (rsc, csc): (isize, isize),
            ) {
                debug_assert!(extent(m, k, rsa, csa) <= a.len());
                debug_assert!(extent(k, n, rsb, csb) <= b.len());
                debug_assert!(extent(m, n, rsc, csc) <= c.len());
                // SAFETY: the extents checked above keep every strided access
                // inside the slices, and `c` does not alias `a` or `b`.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        beta,
                        c.as_mut_ptr(),
                        rsc,
                        csc,
                    )
                }
            }

            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }
        }
    };
}

impl_real!(f32, sgemm);
impl_real!(f64, dgemm);

fn extent(rows: usize, cols: usize, rs: isize, cs: isize) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    ((rows - 1) as isize * rs + (cols - 1) as isize * cs) as usize + 1
}

/// Weight update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    /// Plain full-batch gradient descent.
    Gd,
    /// Adam with bias correction.
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    pub block_h: usize,
    pub block_w: usize,
    /// Shift window; side `m` yields `m²` training patterns per image.
    pub window: WindowSpec,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Hidden size as a fraction of the input size.
    pub compression_ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub optimizer: Optimizer,
}

impl AeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_h == 0 || self.block_w == 0 {
            return Err(Error::invalid("block_h", "block dimensions must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "at least one epoch is required"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(
                "learning_rate",
                format!("must be positive, got {}", self.learning_rate),
            ));
        }
        if !(self.compression_ratio > 0.0 && self.compression_ratio <= 1.0) {
            return Err(Error::invalid(
                "compression_ratio",
                format!("must be in (0, 1], got {}", self.compression_ratio),
            ));
        }
        if let Optimizer::Adam { beta1, beta2, epsilon } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(epsilon > 0.0) {
                return Err(Error::invalid(
                    "optimizer",
                    "adam needs betas in [0, 1) and epsilon > 0",
                ));
            }
        }
        Ok(())
    }

    /// Hidden layer size for `input` neurons: `max(1, round(ratio * input))`.
    pub fn hidden_size(&self, input: usize) -> usize {
        ((self.compression_ratio * input as f64).round() as usize).max(1)
    }

    /// Copy of this configuration with the seed used for block `index`.
    pub fn for_block(&self, index: usize) -> AeConfig {
        AeConfig {
            seed: block_seed(self.seed, index),
            ..*self
        }
    }
}

/// Per-block seed depending only on the base seed and the block index.
pub fn block_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64 + 1))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// Encoder `input -> hidden` and decoder `hidden -> input`, sigmoid on both layers.
#[derive(Debug, Clone, PartialEq)]
pub struct AeNetwork<T: Real = f32> {
    input: usize,
    hidden: usize,
    /// Encoder weights, `hidden x input`, row-major.
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    /// Decoder weights, `input x hidden`, row-major.
    pub w2: Vec<T>,
    pub b2: Vec<T>,
}

/// Loss gradients with the same layout as [`AeNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T: Real> {
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: Vec<T>,
}

impl<T: Real> Gradients<T> {
    fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w1: vec![T::zero(); hidden * input],
            b1: vec![T::zero(); hidden],
            w2: vec![T::zero(); input * hidden],
            b2: vec![T::zero(); input],
        }
    }

    fn parts_mut(&mut self) -> [&mut Vec<T>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }
}

/// Activations of one forward pass over a batch.
struct Forward<T> {
    hidden: Vec<T>,
    output: Vec<T>,
}

impl<T: Real> AeNetwork<T> {
    /// All weights and biases zero.
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            input,
            hidden,
            w1: vec![T::zero(); hidden * input],
            b1: vec![T::zero(); hidden],
            w2: vec![T::zero(); input * hidden],
            b2: vec![T::zero(); input],
        }
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn random(input: usize, hidden: usize, seed: u64) -> Self {
        let mut net = Self::zeros(input, hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit = (6.0 / (input + hidden) as f64).sqrt();
        for w in net.w1.iter_mut().chain(net.w2.iter_mut()) {
            *w = T::lit(rng.gen_range(-limit..=limit));
        }
        net
    }

    pub fn input_size(&self) -> usize {
        self.input
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    fn forward(&self, x: &[T], rows: usize) -> Forward<T> {
        let (n, h) = (self.input, self.hidden);
        let mut hidden = Vec::with_capacity(rows * h);
        for _ in 0..rows {
            hidden.extend_from_slice(&self.b1);
        }
        T::gemm(
            rows,
            n,
            h,
            T::one(),
            x,
            (n as isize, 1),
            &self.w1,
            (1, n as isize),
            T::one(),
            &mut hidden,
            (h as isize, 1),
        );
        hidden.iter_mut().for_each(|z| *z = sigmoid(*z));

        let mut output = Vec::with_capacity(rows * n);
        for _ in 0..rows {
            output.extend_from_slice(&self.b2);
        }
        T::gemm(
            rows,
            h,
            n,
            T::one(),
            &hidden,
            (h as isize, 1),
            &self.w2,
            (1, h as isize),
            T::one(),
            &mut output,
            (n as isize, 1),
        );
        output.iter_mut().for_each(|z| *z = sigmoid(*z));
        Forward { hidden, output }
    }

    /// Mean squared reconstruction error over a row-major batch.
    fn batch_loss(x: &[T], output: &[T]) -> f64 {
        let sum: f64 = x
            .iter()
            .zip(output)
            .map(|(&a, &b)| {
                let d = (b - a).to_f64().unwrap_or(f64::NAN);
                d * d
            })
            .sum();
        sum / x.len() as f64
    }

    /// Loss and analytic gradients for a row-major batch of `rows` patterns.
    fn backward(&self, x: &[T], rows: usize, fwd: &Forward<T>, grads: &mut Gradients<T>) -> f64 {
        let (n, h) = (self.input, self.hidden);
        let loss = Self::batch_loss(x, &fwd.output);
        let scale = T::lit(2.0 / (rows * n) as f64);

        // d loss / d output pre-activation
        let d_out: Vec<T> = fwd
            .output
            .iter()
            .zip(x)
            .map(|(&y, &t)| (y - t) * scale * y * (T::one() - y))
            .collect();

        T::gemm(
            n,
            rows,
            h,
            T::one(),
            &d_out,
            (1, n as isize),
            &fwd.hidden,
            (h as isize, 1),
            T::zero(),
            &mut grads.w2,
            (h as isize, 1),
        );
        column_sums(&d_out, rows, n, &mut grads.b2);

        let mut d_hidden = vec![T::zero(); rows * h];
        T::gemm(
            rows,
            n,
            h,
            T::one(),
            &d_out,
            (n as isize, 1),
            &self.w2,
            (h as isize, 1),
            T::zero(),
            &mut d_hidden,
            (h as isize, 1),
        );
        for (d, &a) in d_hidden.iter_mut().zip(&fwd.hidden) {
            *d = *d * a * (T::one() - a);
        }

        T::gemm(
            h,
            rows,
            n,
            T::one(),
            &d_hidden,
            (1, h as isize),
            x,
            (n as isize, 1),
            T::zero(),
            &mut grads.w1,
            (n as isize, 1),
        );
        column_sums(&d_hidden, rows, h, &mut grads.b1);
        loss
    }

    /// Mean squared reconstruction error of the network on `patterns`.
    pub fn loss(&self, patterns: &[Vec<f64>]) -> Result<f64> {
        let x = self.pack(patterns)?;
        let fwd = self.forward(&x, patterns.len());
        Ok(Self::batch_loss(&x, &fwd.output))
    }

    /// Loss and its gradient with respect to every weight and bias.
    pub fn gradients(&self, patterns: &[Vec<f64>]) -> Result<(f64, Gradients<T>)> {
        let x = self.pack(patterns)?;
        let fwd = self.forward(&x, patterns.len());
        let mut grads = Gradients::zeros(self.input, self.hidden);
        let loss = self.backward(&x, patterns.len(), &fwd, &mut grads);
        Ok((loss, grads))
    }

    /// `sigmoid(W2 · sigmoid(W1 · x + b1) + b2)`.
    pub fn reconstruct(&self, pattern: &[f64]) -> Result<Vec<f64>> {
        let x = self.pack(&[pattern.to_vec()])?;
        let fwd = self.forward(&x, 1);
        Ok(fwd.output.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Reconstructs several patterns in one batch.
    pub fn reconstruct_batch(&self, patterns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let x = self.pack(patterns)?;
        let fwd = self.forward(&x, patterns.len());
        Ok(fwd
            .output
            .chunks(self.input)
            .map(|row| row.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect())
    }

    fn pack(&self, patterns: &[Vec<f64>]) -> Result<Vec<T>> {
        let mut x = Vec::with_capacity(patterns.len() * self.input);
        for p in patterns {
            if p.len() != self.input {
                return Err(Error::invalid(
                    "pattern",
                    format!("expected length {}, got {}", self.input, p.len()),
                ));
            }
            x.extend(p.iter().map(|&v| T::lit(v)));
        }
        Ok(x)
    }

    fn parts_mut(&mut self) -> [&mut Vec<T>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }
}

fn column_sums<T: Real>(m: &[T], rows: usize, cols: usize, out: &mut [T]) {
    out.iter_mut().for_each(|v| *v = T::zero());
    for r in 0..rows {
        for (o, &v) in out.iter_mut().zip(&m[r * cols..(r + 1) * cols]) {
            *o = *o + v;
        }
    }
}

/// A trained network and its loss history.
#[derive(Debug, Clone)]
pub struct TrainedAe<T: Real = f32> {
    pub network: AeNetwork<T>,
    /// Loss of the freshly initialized network.
    pub initial_loss: f64,
    /// `losses[e]` is the loss after `e + 1` epochs.
    pub losses: Vec<f64>,
}

impl<T: Real> TrainedAe<T> {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("at least one epoch")
    }
}

struct AdamState<T: Real> {
    m: Gradients<T>,
    v: Gradients<T>,
    step: i32,
}

/// Trains a fresh network on `patterns` with full-batch updates.
pub fn train_ae<T: Real>(patterns: &[Vec<f64>], cfg: &AeConfig) -> Result<TrainedAe<T>> {
    cfg.validate()?;
    let first = patterns.first().ok_or(Error::Empty("autoencoder training set"))?;
    let input = first.len();
    if input == 0 {
        return Err(Error::Empty("autoencoder pattern"));
    }
    let mut net = AeNetwork::<T>::random(input, cfg.hidden_size(input), cfg.seed);
    let x = net.pack(patterns)?;
    let rows = patterns.len();
    let mut grads = Gradients::zeros(input, net.hidden);
    let mut adam = match cfg.optimizer {
        Optimizer::Adam { .. } => Some(AdamState {
            m: Gradients::zeros(input, net.hidden),
            v: Gradients::zeros(input, net.hidden),
            step: 0,
        }),
        Optimizer::Gd => None,
    };
    let lr = T::lit(cfg.learning_rate);
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut initial_loss = f64::NAN;

    for epoch in 0..cfg.epochs {
        let fwd = net.forward(&x, rows);
        let loss = net.backward(&x, rows, &fwd, &mut grads);
        if epoch == 0 {
            initial_loss = loss;
        } else {
            losses.push(loss);
        }
        match (&mut adam, cfg.optimizer) {
            (Some(state), Optimizer::Adam { beta1, beta2, epsilon }) => {
                state.step += 1;
                let (b1, b2) = (T::lit(beta1), T::lit(beta2));
                let (a1, a2) = (T::one() - b1, T::one() - b2);
                // Bias corrections folded into the step size and epsilon.
                let c1 = 1.0 - beta1.powi(state.step);
                let c2 = 1.0 - beta2.powi(state.step);
                let step = T::lit(cfg.learning_rate * c2.sqrt() / c1);
                let eps = T::lit(epsilon * c2.sqrt());
                let params = net.parts_mut();
                let gs = grads.parts_mut();
                let ms = state.m.parts_mut();
                let vs = state.v.parts_mut();
                for (((p, g), m), v) in params.into_iter().zip(gs).zip(ms).zip(vs) {
                    for (((pi, &gi), mi), vi) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *mi = b1 * *mi + a1 * gi;
                        *vi = b2 * *vi + a2 * gi * gi;
                        *pi = *pi - step * *mi / (vi.sqrt() + eps);
                    }
                }
            }
            _ => {
                for (p, g) in net.parts_mut().into_iter().zip(grads.parts_mut()) {
                    for (pi, &gi) in p.iter_mut().zip(g.iter()) {
                        *pi = *pi - lr * gi;
                    }
                }
            }
        }
    }
    let fwd = net.forward(&x, rows);
    losses.push(AeNetwork::<T>::batch_loss(&x, &fwd.output));
    Ok(TrainedAe {
        network: net,
        initial_loss,
        losses,
    })
}

/// The block content at every shift `(dx, dy)` with `|dx|, |dy| <= (m-1)/2`,
/// each flattened row by row. Shifts past the border use clamp-to-edge padding.
/// The unshifted block is the centre entry, index `(m² - 1) / 2`.
pub fn build_shift_training_set(img: &Image, block: Block, window: WindowSpec) -> Vec<Vec<f64>> {
    let k = window.radius() as isize;
    let mut patterns = Vec::with_capacity(window.area());
    for dy in -k..=k {
        for dx in -k..=k {
            let mut p = Vec::with_capacity(block.len());
            for r in 0..block.height {
                for c in 0..block.width {
                    p.push(img.get_clamped((block.x + c) as isize + dx, (block.y + r) as isize + dy));
                }
            }
            patterns.push(p);
        }
    }
    patterns
}

fn block_pixels(img: &Image, block: Block) -> Vec<f64> {
    let mut p = Vec::with_capacity(block.len());
    for r in 0..block.height {
        let start = (block.y + r) * img.width() + block.x;
        p.extend_from_slice(&img.pixels()[start..start + block.width]);
    }
    p
}

fn write_block(out: &mut [f64], width: usize, block: Block, values: &[f64]) {
    for r in 0..block.height {
        let start = (block.y + r) * width + block.x;
        for (dst, &v) in out[start..start + block.width]
            .iter_mut()
            .zip(&values[r * block.width..(r + 1) * block.width])
        {
            *dst = v.clamp(0.0, 1.0);
        }
    }
}

/// Denoises every block with its own freshly trained network.
pub fn ae_denoise_image(img: &Image, cfg: &AeConfig) -> Result<Image> {
    cfg.validate()?;
    let grid = partition_blocks(img, cfg.block_h, cfg.block_w)?;
    let mut out = vec![0.0; img.len()];
    for (index, &block) in grid.blocks().iter().enumerate() {
        let restored = denoise_block(img, block, index, cfg)?;
        write_block(&mut out, img.width(), block, &restored);
    }
    Ok(Image::from_raw(img.width(), img.height(), out))
}

/// Restores one block of `img`; `index` selects the block's seed.
pub fn denoise_block(img: &Image, block: Block, index: usize, cfg: &AeConfig) -> Result<Vec<f64>> {
    let patterns = build_shift_training_set(img, block, cfg.window);
    let trained = train_ae::<f32>(&patterns, &cfg.for_block(index))?;
    trained.network.reconstruct(&block_pixels(img, block))
}

/// Fuses several same-size images block by block: one network per block is
/// trained on the shift sets of all variants, and the fused block is the
/// mean of the variants' reconstructions.
pub fn ae_fuse(variants: &[Image], cfg: &AeConfig) -> Result<Image> {
    cfg.validate()?;
    if variants.len() < 2 {
        return Err(Error::invalid("variants", "fusion needs at least two images"));
    }
    let first = &variants[0];
    for v in &variants[1..] {
        first.ensure_same_dims(v)?;
    }
    let grid = partition_blocks(first, cfg.block_h, cfg.block_w)?;
    let mut out = vec![0.0; first.len()];
    for (index, &block) in grid.blocks().iter().enumerate() {
        let patterns: Vec<Vec<f64>> = variants
            .iter()
            .flat_map(|v| build_shift_training_set(v, block, cfg.window))
            .collect();
        let trained = train_ae::<f32>(&patterns, &cfg.for_block(index))?;
        let unshifted: Vec<Vec<f64>> = variants.iter().map(|v| block_pixels(v, block)).collect();
        let recon = trained.network.reconstruct_batch(&unshifted)?;
        let n = recon.len() as f64;
        let mean: Vec<f64> = (0..block.len())
            .map(|i| recon.iter().map(|r| r[i]).sum::<f64>() / n)
            .collect();
        write_block(&mut out, first.width(), block, &mean);
    }
    Ok(Image::from_raw(first.width(), first.height(), out))
}
