//! Binary erosion, dilation and opening.
//!
//! Pixels beyond the frame read as [`Border::Background`] unless stated
//! otherwise, so erosion eats inward from the frame edge.

use serde::{Deserialize, Serialize};

use super::mask::BinaryMask;
use crate::error::{Error, Result};

/// Value assumed for pixels outside the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Border {
    #[default]
    Background,
    Foreground,
}

impl Border {
    fn value(self) -> bool {
        matches!(self, Border::Foreground)
    }

    pub fn flipped(self) -> Self {
        match self {
            Border::Background => Border::Foreground,
            Border::Foreground => Border::Background,
        }
    }
}

/// Named element families usable from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementShape {
    Square,
    Cross,
    Disk,
}

/// A neighbourhood given as integer offsets. Always contains `(0, 0)` and
/// is closed under negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(i32, i32)>,
}

impl StructuringElement {
    pub fn from_offsets(offsets: impl IntoIterator<Item = (i32, i32)>) -> Result<Self> {
        let mut offsets: Vec<(i32, i32)> = offsets.into_iter().collect();
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.binary_search(&(0, 0)).is_err() {
            return Err(Error::InvalidParameter(
                "structuring element must contain the origin".into(),
            ));
        }
        if let Some(&(dx, dy)) = offsets
            .iter()
            .find(|&&(dx, dy)| offsets.binary_search(&(-dx, -dy)).is_err())
        {
            return Err(Error::InvalidParameter(format!(
                "structuring element is not symmetric: ({dx}, {dy}) has no mirror"
            )));
        }
        Ok(Self { offsets })
    }

    /// `size`×`size` square; `size` must be odd.
    pub fn square(size: u32) -> Result<Self> {
        Self::shaped(ElementShape::Square, size)
    }

    pub fn shaped(shape: ElementShape, size: u32) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "structuring element size must be odd and positive, got {size}"
            )));
        }
        let r = (size / 2) as i32;
        let mut offsets = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let keep = match shape {
                    ElementShape::Square => true,
                    ElementShape::Cross => dx == 0 || dy == 0,
                    ElementShape::Disk => dx * dx + dy * dy <= r * r,
                };
                if keep {
                    offsets.push((dx, dy));
                }
            }
        }
        Self::from_offsets(offsets)
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square(3).expect("3x3 square is valid")
    }
}

/// Combines `acc[p] op= src[p + (dx, dy)]` for every pixel, row by row.
fn accumulate_shift(
    acc: &mut [bool],
    src: &BinaryMask,
    dx: i64,
    dy: i64,
    outside: bool,
    and: bool,
) {
    let dims = src.dims();
    let (w, h) = (dims.width as i64, dims.height as i64);
    let bits = src.bits();
    for y in 0..h {
        let sy = y + dy;
        let row = &mut acc[(y * w) as usize..((y + 1) * w) as usize];
        if sy < 0 || sy >= h {
            for cell in row.iter_mut() {
                if and {
                    *cell &= outside;
                } else {
                    *cell |= outside;
                }
            }
            continue;
        }
        let src_row = &bits[(sy * w) as usize..((sy + 1) * w) as usize];
        for (x, cell) in row.iter_mut().enumerate() {
            let sx = x as i64 + dx;
            let v = if sx < 0 || sx >= w {
                outside
            } else {
                src_row[sx as usize]
            };
            if and {
                *cell &= v;
            } else {
                *cell |= v;
            }
        }
    }
}

pub fn erode_with_border(m: &BinaryMask, se: &StructuringElement, border: Border) -> BinaryMask {
    let mut out = BinaryMask::full(m.dims());
    for &(dx, dy) in se.offsets() {
        accumulate_shift(out.bits_mut(), m, dx as i64, dy as i64, border.value(), true);
    }
    out
}

pub fn dilate_with_border(m: &BinaryMask, se: &StructuringElement, border: Border) -> BinaryMask {
    let mut out = BinaryMask::empty(m.dims());
    for &(dx, dy) in se.offsets() {
        // Reflected element; identical for symmetric elements.
        accumulate_shift(out.bits_mut(), m, -dx as i64, -dy as i64, border.value(), false);
    }
    out
}

/// Pixel stays foreground iff every element offset lands on foreground.
pub fn erode(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode_with_border(m, se, Border::Background)
}

/// Pixel becomes foreground iff some element offset lands on foreground.
pub fn dilate(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    dilate_with_border(m, se, Border::Background)
}

/// Erodes `iterations` times, then dilates `iterations` times.
///
/// For `iterations = 1` this is the classical opening and is idempotent.
pub fn open(m: &BinaryMask, se: &StructuringElement, iterations: u32) -> BinaryMask {
    let mut cur = m.clone();
    for _ in 0..iterations {
        cur = erode(&cur, se);
    }
    for _ in 0..iterations {
        cur = dilate(&cur, se);
    }
    cur
}
