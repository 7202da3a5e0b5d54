//! Splitting of oversized blobs that usually hold two merged landmarks.

use serde::{Deserialize, Serialize};

use super::components::LabelMap;
use super::mask::BinaryMask;
use super::DecodeConfig;

/// Which axis-aligned line is carved through an oversized region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutOrientation {
    /// Tall regions get a horizontal line, wide or square ones a vertical
    /// line, splitting the region across its longer side.
    #[default]
    AcrossLongAxis,
    /// Tall regions get a vertical line, wide or square ones a horizontal line.
    AlongLongAxis,
}

/// Carves a 1-px background line through the rounded centroid of every
/// region whose area exceeds `cut_area_factor` times the mean region area.
///
/// Only pixels of the cut region are cleared. Single pass: the pieces are
/// not re-examined.
pub fn cut_oversized(m: &BinaryMask, labels: &LabelMap, cfg: &DecodeConfig) -> BinaryMask {
    let mut out = m.clone();
    let regions = &labels.regions;
    if regions.is_empty() {
        return out;
    }
    let mean = regions.iter().map(|r| r.pixel_count as f64).sum::<f64>() / regions.len() as f64;
    let limit = cfg.cut_area_factor * mean;

    for region in regions.iter().filter(|r| r.pixel_count as f64 > limit) {
        let bbox = region.bbox;
        let tall = bbox.height() > bbox.width();
        let horizontal = match cfg.cut_orientation {
            CutOrientation::AcrossLongAxis => tall,
            CutOrientation::AlongLongAxis => !tall,
        };
        if horizontal {
            let y = region.centroid.y.round() as usize;
            for x in bbox.min_x as usize..=bbox.max_x as usize {
                if labels.label_at(x, y) == region.label {
                    out.set(x, y, false);
                }
            }
        } else {
            let x = region.centroid.x.round() as usize;
            for y in bbox.min_y as usize..=bbox.max_y as usize {
                if labels.label_at(x, y) == region.label {
                    out.set(x, y, false);
                }
            }
        }
    }
    out
}
