//! Heatmap → landmark decoding: Otsu threshold, opening, connected
//! components, oversized-blob cutting, then one centroid per region.

pub mod components;
pub mod cut;
pub mod mask;
pub mod morphology;
pub mod otsu;

use crate::error::{Error, Result};
use crate::heatmap::Heatmap;
use crate::types::{LandmarkSet, Point2D};

pub use components::{label_components, label_map, BoundingBox, Connectivity, LabelMap, Region};
pub use cut::{cut_oversized, CutOrientation};
pub use mask::BinaryMask;
pub use morphology::{
    dilate, dilate_with_border, erode, erode_with_border, open, Border, ElementShape,
    StructuringElement,
};
pub use otsu::{otsu_threshold, otsu_threshold_grid, otsu_threshold_histogram, OtsuResult};

/// Area ratio to the frame's mean region area above which a region is cut.
///
/// A single landmark's blob varies by up to ~1.21x the frame mean with its
/// sub-pixel offset, while two merged landmarks next to two or more isolated
/// ones sit at >= ~1.37x.
pub const DEFAULT_CUT_AREA_FACTOR: f64 = 1.35;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeConfig {
    pub opening_element: StructuringElement,
    pub opening_iterations: u32,
    pub connectivity: Connectivity,
    pub cut_area_factor: f64,
    pub cut_orientation: CutOrientation,
    /// Regions smaller than this (px²) are dropped before cutting.
    pub min_region_area: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            opening_element: StructuringElement::default(),
            opening_iterations: 1,
            connectivity: Connectivity::Eight,
            cut_area_factor: DEFAULT_CUT_AREA_FACTOR,
            cut_orientation: CutOrientation::AcrossLongAxis,
            min_region_area: 0,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.opening_iterations == 0 {
            return Err(Error::InvalidParameter(
                "opening_iterations must be positive".into(),
            ));
        }
        if !(self.cut_area_factor.is_finite() && self.cut_area_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cut_area_factor must be positive, got {}",
                self.cut_area_factor
            )));
        }
        Ok(())
    }
}

/// Every intermediate product of one decode, for inspection and overlays.
#[derive(Debug, Clone)]
pub struct DecodeTrace {
    pub threshold: u8,
    pub thresholded: BinaryMask,
    pub opened: BinaryMask,
    /// Components of the opened mask after the minimum-area filter.
    pub before_cut: LabelMap,
    pub cut: BinaryMask,
    pub after_cut: LabelMap,
    pub points: Vec<Point2D>,
}

pub fn decode_trace(h: &Heatmap, cfg: &DecodeConfig) -> Result<DecodeTrace> {
    cfg.validate()?;
    let OtsuResult { threshold, mask } = otsu_threshold(h);
    let opened = open(&mask, &cfg.opening_element, cfg.opening_iterations);

    let mut filtered = opened.clone();
    let mut before_cut = label_map(&opened, cfg.connectivity);
    if cfg.min_region_area > 0 {
        let small: Vec<bool> = std::iter::once(false)
            .chain(
                before_cut
                    .regions
                    .iter()
                    .map(|r| r.pixel_count < cfg.min_region_area),
            )
            .collect();
        if small.iter().any(|&s| s) {
            for (bit, &label) in filtered.bits_mut().iter_mut().zip(&before_cut.labels) {
                if small[label as usize] {
                    *bit = false;
                }
            }
            before_cut = label_map(&filtered, cfg.connectivity);
        }
    }

    let cut = cut_oversized(&filtered, &before_cut, cfg);
    let after_cut = label_map(&cut, cfg.connectivity);
    let points = after_cut.regions.iter().map(|r| r.centroid).collect();
    Ok(DecodeTrace {
        threshold,
        thresholded: mask,
        opened,
        before_cut,
        cut,
        after_cut,
        points,
    })
}

/// Decodes a heatmap into landmarks (frame id left empty).
pub fn decode(h: &Heatmap, cfg: &DecodeConfig) -> Result<LandmarkSet> {
    decode_frame("", h, cfg)
}

pub fn decode_frame(frame_id: &str, h: &Heatmap, cfg: &DecodeConfig) -> Result<LandmarkSet> {
    let trace = decode_trace(h, cfg)?;
    Ok(LandmarkSet {
        frame_id: frame_id.to_string(),
        dims: h.dims(),
        points: trace.points,
    })
}
