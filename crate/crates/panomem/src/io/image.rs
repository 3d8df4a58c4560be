use std::path::Path;

use panomem_core::EquirectImage;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};

fn to_u8(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode(path: &Path, width: usize, height: usize, color: png::ColorType, depth: png::BitDepth, data: &[u8]) -> Result<()> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(depth);
        let mut w = enc.write_header().map_err(|e| Error::format(path, e.to_string()))?;
        w.write_image_data(data).map_err(|e| Error::format(path, e.to_string()))?;
    }
    write_bytes(path, &out)
}

/// Writes 8-bit RGB from an arbitrary `width × height` buffer.
pub fn write_rgb_png(path: &Path, width: usize, height: usize, rgb: &[[f32; 3]]) -> Result<()> {
    let data: Vec<u8> = rgb.iter().flatten().map(|&c| to_u8(c)).collect();
    encode(path, width, height, png::ColorType::Rgb, png::BitDepth::Eight, &data)
}

/// 8-bit RGB PNG. Colors are clamped to `[0, 1]` and rounded.
pub fn write_png(path: &Path, img: &EquirectImage) -> Result<()> {
    write_rgb_png(path, img.width(), img.height(), &img.rgb)
}

/// Reads any PNG as RGB in `[0, 1]`, returning `(width, height, pixels)`.
pub fn read_rgb_png(path: &Path) -> Result<(usize, usize, Vec<[f32; 3]>)> {
    let bytes = read_bytes(path)?;
    let img = ::image::load_from_memory_with_format(&bytes, ::image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let rgb = img
        .pixels()
        .map(|p| [p[0] as f32 / 255.0, p[1] as f32 / 255.0, p[2] as f32 / 255.0])
        .collect();
    Ok((w, h, rgb))
}

/// Reads a panorama. A 16:9 frame is treated as letterboxed and its central
/// 2:1 band is kept.
pub fn read_png(path: &Path) -> Result<EquirectImage> {
    let (w, h, rgb) = read_rgb_png(path)?;
    if w > 0 && w % 2 == 0 && h == w / 2 {
        Ok(EquirectImage::from_rgb(w, h, rgb)?)
    } else if w > 0 && w % 2 == 0 && h == w * 9 / 16 {
        unletterbox(w, h, &rgb)
    } else {
        Err(Error::format(path, format!("{w}×{h} is not a 2:1 equirectangular panorama")))
    }
}

/// Pads a 2:1 panorama with black rows to `height`, centered.
pub fn letterbox(img: &EquirectImage, height: usize) -> Result<(usize, usize, Vec<[f32; 3]>)> {
    let (w, h) = (img.width(), img.height());
    if height < h {
        return Err(Error::usage(format!("letterbox height {height} is below the panorama height {h}")));
    }
    let top = (height - h) / 2;
    let mut rgb = vec![[0.0f32; 3]; w * height];
    rgb[top * w..(top + h) * w].copy_from_slice(&img.rgb);
    Ok((w, height, rgb))
}

/// Inverse of [`letterbox`].
pub fn unletterbox(width: usize, height: usize, rgb: &[[f32; 3]]) -> Result<EquirectImage> {
    let band = width / 2;
    if height < band || rgb.len() != width * height {
        return Err(Error::usage("buffer is not a letterboxed panorama"));
    }
    let top = (height - band) / 2;
    Ok(EquirectImage::from_rgb(width, band, rgb[top * width..(top + band) * width].to_vec())?)
}

/// 1-bit grayscale PNG; white marks `true`.
pub fn write_mask_png(path: &Path, width: usize, height: usize, mask: &[bool]) -> Result<()> {
    if mask.len() != width * height {
        return Err(Error::usage("mask length does not match dimensions"));
    }
    let stride = width.div_ceil(8);
    let mut data = vec![0u8; stride * height];
    for (i, &m) in mask.iter().enumerate() {
        if m {
            let (r, c) = (i / width, i % width);
            data[r * stride + c / 8] |= 0x80 >> (c % 8);
        }
    }
    encode(path, width, height, png::ColorType::Grayscale, png::BitDepth::One, &data)
}

pub fn read_mask_png(path: &Path) -> Result<(usize, usize, Vec<bool>)> {
    let bytes = read_bytes(path)?;
    let img = ::image::load_from_memory_with_format(&bytes, ::image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok((w, h, img.pixels().map(|p| p[0] >= 128).collect()))
}
