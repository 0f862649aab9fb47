//! Bundled test images.

use crate::image::Image;
use crate::io::decode_image;

static LENA_PNG: &[u8] = include_bytes!("../assets/lena.png");

/// The 512x512 grayscale Lena test image.
pub fn lena() -> Image {
    decode_image(LENA_PNG).expect("bundled lena.png is 8-bit grayscale")
}

/// Width and height of [`cap_edge`].
pub const CAP_EDGE_DIMS: (usize, usize) = (100, 150);

/// Synthetic 100x150 scene: a shaded mushroom-like cap with a sharp
/// elliptical rim and a stem over a smooth vertical gradient. All intensities
/// lie in `[0.25, 0.85]`, so impulse residue is easy to tell apart from
/// scene content.
pub fn cap_edge() -> Image {
    let (w, h) = CAP_EDGE_DIMS;
    Image::from_fn(w, h, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let background = 0.30 + 0.20 * yf / (h - 1) as f64 + 0.03 * (xf / 9.0).sin();
        let (cx, cy, ax, ay) = (50.0, 58.0, 42.0, 32.0);
        let u = (xf - cx) / ax;
        let v = (yf - cy) / ay;
        let in_cap = u * u + v * v <= 1.0 && yf <= cy + 6.0;
        let in_stem = (40.0..=60.0).contains(&xf) && yf > cy + 6.0 && yf <= 132.0;
        if in_cap {
            0.80 - 0.12 * u * u - 0.05 * (v + 1.0) / 2.0
        } else if in_stem {
            0.64 + 0.03 * (yf / 7.0).sin()
        } else {
            background
        }
    })
    .expect("synthetic intensities are in range")
}
