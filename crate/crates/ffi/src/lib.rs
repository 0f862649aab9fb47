//! C ABI over the spdenoise toolkit.
//!
//! Images cross the boundary as opaque [`SpdImage`] handles holding
//! row-major intensities in `[0, 1]`. Every fallible call returns an
//! [`SpdStatus`]; on failure [`spd_last_error_message`] describes the cause.
//! Handles returned through `out` parameters are owned by the caller and
//! released with [`spd_image_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spdenoise::bench::Scorer;
use spdenoise::config::{presets, recursive_ae, AeSchemeConfig};
use spdenoise::{
    dilate, entropy_map, inject_sp_noise, load_image, median_filter_pass, recursive_median, save_image, ssim_global,
    AeConfig, EntropySpec, Error, Image, MfsAeConfig, NoiseModel, NoiseSpec, Optimizer, RecursionConfig, SsimSpec,
    TwoMfConfig, WindowSpec,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Io = 4,
    Format = 5,
    Undefined = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdNoiseModel {
    /// Pepper in `[0, 0.1]`, salt in `[0.9, 1]`.
    Interval = 0,
    /// Pepper exactly 0, salt exactly 1.
    Fixed = 1,
}

/// Opaque grayscale image.
pub struct SpdImage(Image);

/// Block autoencoder settings. `use_adam = false` selects plain gradient
/// descent; Adam runs with betas 0.9 / 0.999 and epsilon 1e-7.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpdAeParams {
    pub block_h: usize,
    pub block_w: usize,
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub compression_ratio: f64,
    pub seed: u64,
    pub use_adam: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpdTwoMfParams {
    pub w1: usize,
    pub w2: usize,
    pub thr1_w1: f64,
    pub thr1_w2: f64,
    pub thr2: f64,
    pub passes: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpdMfsAeParams {
    pub w1: usize,
    pub w2: usize,
    pub thr_min: f64,
    pub thr_max: f64,
    pub thr_step: f64,
    pub thr_w2: f64,
    pub passes: usize,
    pub ae: SpdAeParams,
    pub thr_final: f64,
}

/// Image SSIM and SSIM of the standard and dilated entropy maps.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpdScores {
    pub ssim_img: f64,
    pub ssim_map: f64,
    pub ssim_map_dilated: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SpdStatus {
    match err {
        Error::Io { .. } => SpdStatus::Io,
        Error::Format(_) => SpdStatus::Format,
        Error::DimensionMismatch { .. } => SpdStatus::DimensionMismatch,
        Error::InvalidParameter { .. } | Error::Empty(_) => SpdStatus::InvalidArgument,
        Error::Undefined(_) => SpdStatus::Undefined,
    }
}

struct Fail(SpdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Fail>;

fn null(what: &str) -> Fail {
    Fail(SpdStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> SpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SpdStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SpdStatus::Panic
        }
    }
}

unsafe fn image<'a>(ptr: *const SpdImage, what: &str) -> FfiResult<&'a Image> {
    // SAFETY: callers pass handles obtained from this library.
    unsafe { ptr.as_ref() }.map(|h| &h.0).ok_or_else(|| null(what))
}

unsafe fn emit(out: *mut *mut SpdImage, img: Image) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: `out` is non-null and points to writable storage per the API contract.
    unsafe { *out = Box::into_raw(Box::new(SpdImage(img))) };
    Ok(())
}

unsafe fn path_arg(ptr: *const c_char) -> FfiResult<String> {
    if ptr.is_null() {
        return Err(null("path"));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    let s = unsafe { CStr::from_ptr(ptr) };
    s.to_str()
        .map(str::to_string)
        .map_err(|_| Fail(SpdStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

fn window(side: usize) -> FfiResult<WindowSpec> {
    Ok(WindowSpec::new(side)?)
}

impl SpdAeParams {
    fn to_config(self) -> FfiResult<AeConfig> {
        Ok(AeConfig {
            block_h: self.block_h,
            block_w: self.block_w,
            window: window(self.window)?,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            compression_ratio: self.compression_ratio,
            seed: self.seed,
            optimizer: if self.use_adam {
                Optimizer::default()
            } else {
                Optimizer::Gd
            },
        })
    }

    fn from_config(c: &AeConfig) -> Self {
        Self {
            block_h: c.block_h,
            block_w: c.block_w,
            window: c.window.side(),
            epochs: c.epochs,
            learning_rate: c.learning_rate,
            compression_ratio: c.compression_ratio,
            seed: c.seed,
            use_adam: matches!(c.optimizer, Optimizer::Adam { .. }),
        }
    }
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn spd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn spd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an image from `width * height` row-major intensities in `[0, 1]`.
///
/// # Safety
/// `pixels` must point to `width * height` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_image_new(
    width: usize,
    height: usize,
    pixels: *const f64,
    out: *mut *mut SpdImage,
) -> SpdStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(null("pixels"));
        }
        let len = width
            .checked_mul(height)
            .ok_or_else(|| Fail(SpdStatus::InvalidArgument, "image size overflows".into()))?;
        // SAFETY: the caller guarantees `len` readable values.
        let values = unsafe { std::slice::from_raw_parts(pixels, len) }.to_vec();
        unsafe { emit(out, Image::new(width, height, values)?) }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `img` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn spd_image_free(img: *mut SpdImage) {
    if !img.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(img) });
    }
}

/// Width in pixels, 0 for null.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spd_image_width(img: *const SpdImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |h| h.0.width())
}

/// Height in pixels, 0 for null.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spd_image_height(img: *const SpdImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |h| h.0.height())
}

/// Copies the intensities into `dst`, which must hold `len >= width * height` doubles.
///
/// # Safety
/// `img` must be a live handle and `dst` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spd_image_copy_pixels(img: *const SpdImage, dst: *mut f64, len: usize) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        if dst.is_null() {
            return Err(null("dst"));
        }
        if len < img.len() {
            return Err(Fail(
                SpdStatus::InvalidArgument,
                format!("buffer holds {len} values, image has {}", img.len()),
            ));
        }
        // SAFETY: `dst` holds at least `img.len()` doubles.
        unsafe { std::ptr::copy_nonoverlapping(img.pixels().as_ptr(), dst, img.len()) };
        Ok(())
    })
}

/// Loads an 8-bit grayscale PNG or PGM.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_image_load(path: *const c_char, out: *mut *mut SpdImage) -> SpdStatus {
    guard(|| {
        let path = unsafe { path_arg(path) }?;
        unsafe { emit(out, load_image(path)?) }
    })
}

/// Saves as binary PGM when the path ends in `.pgm`, PNG otherwise.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spd_image_save(img: *const SpdImage, path: *const c_char) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let path = unsafe { path_arg(path) }?;
        Ok(save_image(img, path)?)
    })
}

/// Corrupts `level` percent of the pixels with salt-and-pepper noise.
///
/// # Safety
/// `img` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_add_noise(
    img: *const SpdImage,
    model: SpdNoiseModel,
    level: f64,
    seed: u64,
    out: *mut *mut SpdImage,
) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let model = match model {
            SpdNoiseModel::Interval => NoiseModel::Interval,
            SpdNoiseModel::Fixed => NoiseModel::Fixed,
        };
        let noisy = inject_sp_noise(img, &NoiseSpec::new(model, level, seed)?)?;
        unsafe { emit(out, noisy) }
    })
}

/// One plain median pass with a square window of odd side `window`.
///
/// # Safety
/// `img` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_median_pass(img: *const SpdImage, window: usize, out: *mut *mut SpdImage) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let filtered = median_filter_pass(img, self::window(window)?);
        unsafe { emit(out, filtered) }
    })
}

/// Recursive threshold median filter: `passes` median passes, each merged
/// with the input image under `threshold`.
///
/// # Safety
/// `img` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_recursive_median(
    img: *const SpdImage,
    window: usize,
    threshold: f64,
    passes: usize,
    out: *mut *mut SpdImage,
) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let cfg = RecursionConfig::new(self::window(window)?, threshold, passes)?;
        let restored = recursive_median(img, &cfg)?;
        unsafe { emit(out, restored) }
    })
}

/// Recursive threshold loop around the block autoencoder.
///
/// # Safety
/// `img` and `params` must be valid and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_recursive_ae(
    img: *const SpdImage,
    params: *const SpdAeParams,
    threshold: f64,
    passes: usize,
    out: *mut *mut SpdImage,
) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let params = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        let cfg = AeSchemeConfig {
            ae: params.to_config()?,
            threshold,
            passes,
        };
        let restored = recursive_ae(img, &cfg)?;
        unsafe { emit(out, restored) }
    })
}

/// Defaults of the two-window median scheme.
#[no_mangle]
pub extern "C" fn spd_two_mf_params_default() -> SpdTwoMfParams {
    let c = presets::table2_2mf();
    SpdTwoMfParams {
        w1: c.w1.side(),
        w2: c.w2.side(),
        thr1_w1: c.thr1_w1,
        thr1_w2: c.thr1_w2,
        thr2: c.thr2,
        passes: c.passes,
    }
}

/// Two recursive median filters of different window size merged under a
/// final threshold.
///
/// # Safety
/// `img` and `params` must be valid and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_denoise_2mf(
    img: *const SpdImage,
    params: *const SpdTwoMfParams,
    out: *mut *mut SpdImage,
) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let p = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        let cfg = TwoMfConfig {
            w1: window(p.w1)?,
            w2: window(p.w2)?,
            thr1_w1: p.thr1_w1,
            thr1_w2: p.thr1_w2,
            thr2: p.thr2,
            passes: p.passes,
        };
        let restored = spdenoise::denoise_2mf(img, &cfg)?;
        unsafe { emit(out, restored) }
    })
}

/// Defaults of the median bank plus autoencoder fusion scheme.
#[no_mangle]
pub extern "C" fn spd_mfs_ae_params_default() -> SpdMfsAeParams {
    let c = presets::table3_mfs_ae();
    SpdMfsAeParams {
        w1: c.w1.side(),
        w2: c.w2.side(),
        thr_min: c.thr_min,
        thr_max: c.thr_max,
        thr_step: c.thr_step,
        thr_w2: c.thr_w2,
        passes: c.passes,
        ae: SpdAeParams::from_config(&c.ae),
        thr_final: c.thr_final,
    }
}

/// Defaults of the single-image autoencoder.
#[no_mangle]
pub extern "C" fn spd_ae_params_default() -> SpdAeParams {
    SpdAeParams::from_config(&presets::table1_ae().ae)
}

/// Bank of small-window median filters fused by the block autoencoder,
/// merged with a large-window median filter.
///
/// # Safety
/// `img` and `params` must be valid and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_denoise_mfs_ae(
    img: *const SpdImage,
    params: *const SpdMfsAeParams,
    out: *mut *mut SpdImage,
) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let p = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        let cfg = MfsAeConfig {
            w1: window(p.w1)?,
            w2: window(p.w2)?,
            thr_min: p.thr_min,
            thr_max: p.thr_max,
            thr_step: p.thr_step,
            thr_w2: p.thr_w2,
            passes: p.passes,
            ae: p.ae.to_config()?,
            thr_final: p.thr_final,
        };
        let restored = spdenoise::denoise_mfs_ae(img, &cfg)?;
        unsafe { emit(out, restored) }
    })
}

/// Mean SSIM of two equally sized images.
///
/// # Safety
/// `a` and `b` must be live handles and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn spd_ssim(a: *const SpdImage, b: *const SpdImage, out: *mut f64) -> SpdStatus {
    guard(|| {
        let (a, b) = unsafe { (image(a, "a")?, image(b, "b")?) };
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ssim_global(a, b, &SsimSpec::default())?;
        Ok(())
    })
}

/// Image SSIM plus SSIM of the standard and dilated entropy maps.
///
/// # Safety
/// `clean` and `restored` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spd_scores(
    clean: *const SpdImage,
    restored: *const SpdImage,
    out: *mut SpdScores,
) -> SpdStatus {
    guard(|| {
        let (clean, restored) = unsafe { (image(clean, "clean")?, image(restored, "restored")?) };
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        clean.ensure_same_dims(restored)?;
        let s = Scorer::new(clean, EntropySpec::default(), SsimSpec::default())?.score(restored)?;
        *out = SpdScores {
            ssim_img: s.ssim_img,
            ssim_map: s.ssim_map,
            ssim_map_dilated: s.ssim_map_dilated,
        };
        Ok(())
    })
}

/// Normalised sample-entropy map, optionally dilated by a 5x5 max filter.
///
/// # Safety
/// `img` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn spd_entropy_map(img: *const SpdImage, dilated: bool, out: *mut *mut SpdImage) -> SpdStatus {
    guard(|| {
        let img = unsafe { image(img, "img") }?;
        let mut map = entropy_map(img, &EntropySpec::default())?;
        if dilated {
            map = dilate(
                &map,
                spdenoise::ssim::DILATION_KERNEL,
                spdenoise::ssim::DILATION_ITERATIONS,
            )?;
        }
        unsafe { emit(out, map.to_image()) }
    })
}
