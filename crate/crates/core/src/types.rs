//! Frame geometry shared by every pipeline stage.
//!
//! Pixel `(px, py)` is centred on the integer coordinate `(px, py)`, so a
//! landmark at `(10.0, 10.0)` sits exactly on pixel `(10, 10)` and a region's
//! centroid is the plain mean of its member pixel indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Image extent in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

impl ImageDims {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index of pixel `(x, y)`.
    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width as usize + x
    }

    /// Half-open containment: `0 <= x < width`, `0 <= y < height`.
    #[inline]
    pub fn contains(&self, p: Point2D) -> bool {
        p.x.is_finite()
            && p.y.is_finite()
            && p.x >= 0.0
            && p.y >= 0.0
            && p.x < self.width as f64
            && p.y < self.height as f64
    }

    pub(crate) fn ensure_same(&self, other: &ImageDims) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            });
        }
        Ok(())
    }
}

/// A sub-pixel image location.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance_squared(&self, other: &Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, other: &Point2D) -> f64 {
        self.distance_squared(other).sqrt()
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// A frame's landmarks. The list length varies per frame and may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    pub frame_id: String,
    pub dims: ImageDims,
    pub points: Vec<Point2D>,
}

impl LandmarkSet {
    /// Builds a set, rejecting the first point that is not inside the frame.
    pub fn new(frame_id: impl Into<String>, dims: ImageDims, points: Vec<Point2D>) -> Result<Self> {
        let set = Self {
            frame_id: frame_id.into(),
            dims,
            points,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn empty(frame_id: impl Into<String>, dims: ImageDims) -> Self {
        Self {
            frame_id: frame_id.into(),
            dims,
            points: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        match self.points.iter().position(|p| !self.dims.contains(*p)) {
            Some(index) => {
                let p = self.points[index];
                Err(Error::OutOfFrame {
                    index,
                    x: p.x,
                    y: p.y,
                    width: self.dims.width,
                    height: self.dims.height,
                })
            }
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_boundary_is_exclusive() {
        let dims = ImageDims::new(512, 288).unwrap();
        assert!(dims.contains(Point2D::new(511.999, 287.5)));
        assert!(!dims.contains(Point2D::new(512.0, 100.0)));
        assert!(!dims.contains(Point2D::new(-0.001, 100.0)));
        assert!(!dims.contains(Point2D::new(f64::NAN, 1.0)));
    }

    #[test]
    fn out_of_frame_reports_index() {
        let dims = ImageDims::new(20, 10).unwrap();
        let err = LandmarkSet::new(
            "f",
            dims,
            vec![Point2D::new(1.0, 1.0), Point2D::new(3.0, 10.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfFrame { index: 1, .. }));
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(ImageDims::new(0, 4).is_err());
        assert!(ImageDims::new(4, 0).is_err());
    }
}
