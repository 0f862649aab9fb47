//! 8-bit grayscale PGM (P5) and PNG reading and writing.

use std::path::Path;

use image::{ColorType, DynamicImage, GrayImage, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::image::Image;

/// Reads an 8-bit grayscale PGM or PNG and maps `[0, 255]` onto `[0, 1]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => return Err(Error::Format(format!("{other:?} files are not supported"))),
        None => return Err(Error::Format(format!("unrecognised file {}", path.display()))),
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    })?;
    from_dynamic(decoded)
}

/// Decodes an in-memory PGM or PNG.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::Format(e.to_string()))?;
    from_dynamic(decoded)
}

fn from_dynamic(decoded: DynamicImage) -> Result<Image> {
    if decoded.color() != ColorType::L8 {
        return Err(Error::Format(format!(
            "expected 8-bit grayscale, found {:?}",
            decoded.color()
        )));
    }
    let gray = decoded.into_luma8();
    let (w, h) = gray.dimensions();
    let pixels = gray.into_raw().into_iter().map(|b| b as f64 / 255.0).collect();
    Ok(Image::from_raw(w as usize, h as usize, pixels))
}

/// Quantizes an intensity to a byte: `round(i * 255)`.
#[inline]
pub fn quantize(i: f64) -> u8 {
    (i * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Writes an 8-bit grayscale image. Files ending in `.pgm` are written as
/// binary P5 with maxval 255; everything else as PNG.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pgm") => ImageFormat::Pnm,
        _ => ImageFormat::Png,
    };
    if format == ImageFormat::Pnm {
        let mut bytes = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
        bytes.extend(img.pixels().iter().map(|&v| quantize(v)));
        return std::fs::write(path, bytes).map_err(|e| Error::io(path, e));
    }
    to_gray(img).save_with_format(path, format).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    })
}

fn to_gray(img: &Image) -> GrayImage {
    let bytes = img.pixels().iter().map(|&v| quantize(v)).collect();
    GrayImage::from_raw(img.width() as u32, img.height() as u32, bytes).expect("buffer length matches dimensions")
}

/// Encodes an image as PNG bytes.
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let mut out = std::io::Cursor::new(Vec::new());
    to_gray(img)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(out.into_inner())
}
