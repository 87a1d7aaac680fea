//! 8-bit image output and target loading.

use std::path::Path;

use image::{ImageBuffer, Rgb};
use nca_core::analysis::resize_bilinear;
use nca_core::{CellGrid, Image};

use super::FormatError;

/// `round(255 · clamp(v, 0, 1))` with halves rounded up; NaN maps to 0.
pub fn quantize(v: f32) -> u8 {
    if v.is_nan() {
        return 0;
    }
    let scaled = f64::from(v.clamp(0.0, 1.0)) * 255.0;
    (scaled + 0.5).floor() as u8
}

pub fn to_rgb8(img: &Image) -> Vec<u8> {
    img.data.iter().map(|&v| quantize(v)).collect()
}

/// Streaming frame: `u32` width, `u32` height (little-endian), then RGBA8
/// rows with opaque alpha.
pub fn rgba8_frame(grid: &CellGrid) -> Vec<u8> {
    let (h, w, c) = (grid.height(), grid.width(), grid.channels());
    let mut out = Vec::with_capacity(8 + 4 * h * w);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for cell in grid.data().chunks_exact(c) {
        out.extend(cell[..3].iter().map(|&v| quantize(v)));
        out.push(255);
    }
    out
}

fn rgb_buffer(img: &Image) -> ImageBuffer<Rgb<u8>, Vec<u8>> {
    ImageBuffer::from_raw(img.width as u32, img.height as u32, to_rgb8(img)).expect("buffer sized from image")
}

pub fn save_png(img: &Image, path: impl AsRef<Path>) -> Result<(), FormatError> {
    rgb_buffer(img).save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// PNG file contents in memory.
pub fn encode_png(img: &Image) -> Result<Vec<u8>, FormatError> {
    let mut out = std::io::Cursor::new(Vec::new());
    rgb_buffer(img).write_to(&mut out, image::ImageFormat::Png)?;
    Ok(out.into_inner())
}

/// Loads an RGB image with values in `[0, 1]`, bilinearly resized to
/// `height × width` when its size differs.
pub fn load_target(path: impl AsRef<Path>, height: usize, width: usize) -> Result<Image, FormatError> {
    let rgb = image::open(path)?.to_rgb8();
    let data = rgb.as_raw().iter().map(|&b| f32::from(b) / 255.0).collect();
    let img = Image::new(rgb.height() as usize, rgb.width() as usize, data)?;
    Ok(resize_bilinear(&img, height, width))
}
