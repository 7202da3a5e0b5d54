//! PNG persistence: heatmaps as 8-bit grayscale, overlays as 8-bit RGB.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use image::{GrayImage, ImageFormat, ImageReader, RgbImage as RgbBuffer};

use super::augment::RgbImage;
use crate::error::{Error, Result};
use crate::heatmap::{dequantize, quantize, ByteGrid, Heatmap};
use crate::types::ImageDims;

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_byte_grid_png(grid: &ByteGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img = GrayImage::from_raw(grid.dims.width, grid.dims.height, grid.data.clone())
        .expect("grid length matches dims");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(image_err(path))
}

/// Reads any PNG and converts it to 8-bit grayscale.
pub fn read_byte_grid_png(path: impl AsRef<Path>) -> Result<ByteGrid> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = ImageReader::new(BufReader::new(file));
    reader.set_format(ImageFormat::Png);
    let img = reader.decode().map_err(image_err(path))?.into_luma8();
    let dims = ImageDims::new(img.width(), img.height())?;
    ByteGrid::new(dims, img.into_raw())
}

/// Quantizes to 8 bits and writes a single-channel PNG.
pub fn write_heatmap_png(h: &Heatmap, path: impl AsRef<Path>) -> Result<()> {
    write_byte_grid_png(&quantize(h), path)
}

pub fn read_heatmap_png(path: impl AsRef<Path>) -> Result<Heatmap> {
    Ok(dequantize(&read_byte_grid_png(path)?))
}

pub fn write_rgb_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf = RgbBuffer::from_raw(img.dims.width, img.dims.height, img.to_interleaved())
        .expect("plane lengths match dims");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(image_err(path))
}
