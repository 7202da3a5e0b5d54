//! Joint image/landmark augmentation.
//!
//! Geometric steps run in the order horizontal flip, vertical flip,
//! rotation, and move image and points with the same transform. Points are
//! mapped exactly and dropped when they leave the frame. Photometric steps
//! (brightness, contrast) only touch pixels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ImageDims, LandmarkSet, Point2D};

/// Largest rotation magnitude in degrees.
pub const MAX_ROTATION_DEG: f64 = 40.0;

/// Three row-major 8-bit planes (R, G, B).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub dims: ImageDims,
    pub planes: [Vec<u8>; 3],
}

impl RgbImage {
    pub fn new(dims: ImageDims, planes: [Vec<u8>; 3]) -> Result<Self> {
        if planes.iter().any(|p| p.len() != dims.len()) {
            return Err(Error::InvalidParameter(format!(
                "every plane must hold {} bytes",
                dims.len()
            )));
        }
        Ok(Self { dims, planes })
    }

    pub fn black(dims: ImageDims) -> Self {
        Self {
            dims,
            planes: [vec![0; dims.len()], vec![0; dims.len()], vec![0; dims.len()]],
        }
    }

    /// Interleaved RGB bytes, as image encoders expect.
    pub fn to_interleaved(&self) -> Vec<u8> {
        (0..self.dims.len())
            .flat_map(|i| [self.planes[0][i], self.planes[1][i], self.planes[2][i]])
            .collect()
    }

    pub fn from_interleaved(dims: ImageDims, data: &[u8]) -> Result<Self> {
        if data.len() != dims.len() * 3 {
            return Err(Error::InvalidParameter(format!(
                "interleaved RGB needs {} bytes, got {}",
                dims.len() * 3,
                data.len()
            )));
        }
        let mut planes = [Vec::new(), Vec::new(), Vec::new()];
        for (c, plane) in planes.iter_mut().enumerate() {
            *plane = data.iter().skip(c).step_by(3).copied().collect();
        }
        Ok(Self { dims, planes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub flip_h: bool,
    pub flip_v: bool,
    /// Rotation about the frame centre, degrees in `[-40, 40]`.
    pub rotation_deg: f64,
    /// Added to every channel, as a fraction of full scale.
    pub brightness_delta: f64,
    /// Contrast gain about mid-grey; 1 leaves pixels unchanged.
    pub contrast_gain: f64,
    /// Seed these parameters were drawn from.
    pub seed: u64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            flip_h: false,
            flip_v: false,
            rotation_deg: 0.0,
            brightness_delta: 0.0,
            contrast_gain: 1.0,
            seed: 0,
        }
    }
}

impl AugmentParams {
    pub fn validate(&self) -> Result<()> {
        // Negated so NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.rotation_deg.abs() <= MAX_ROTATION_DEG) {
            return Err(Error::InvalidParameter(format!(
                "rotation {} outside ±{MAX_ROTATION_DEG}°",
                self.rotation_deg
            )));
        }
        if !(self.contrast_gain.is_finite() && self.contrast_gain > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "contrast gain must be positive, got {}",
                self.contrast_gain
            )));
        }
        if !self.brightness_delta.is_finite() {
            return Err(Error::InvalidParameter("brightness delta must be finite".into()));
        }
        Ok(())
    }

    fn is_photometric_identity(&self) -> bool {
        self.brightness_delta == 0.0 && self.contrast_gain == 1.0
    }
}

/// Which augmentations [`sample_augment_params_with`] may draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentToggles {
    pub flips: bool,
    /// Rotations are drawn uniformly from `[-max, max]`; 0 disables them.
    pub rotation_max_deg: f64,
    pub photometric: bool,
}

impl Default for AugmentToggles {
    fn default() -> Self {
        Self {
            flips: true,
            rotation_max_deg: MAX_ROTATION_DEG,
            photometric: true,
        }
    }
}

/// Output of [`augment`].
#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub image: RgbImage,
    pub landmarks: LandmarkSet,
    /// Points that left the frame and were removed.
    pub dropped: usize,
}

/// Full default augmentation draw.
pub fn sample_augment_params(seed: u64) -> AugmentParams {
    sample_augment_params_with(seed, &AugmentToggles::default())
}

/// Each flip with probability 0.5, rotation uniform in the allowed range,
/// brightness and contrast jitter each applied with probability 0.5.
pub fn sample_augment_params_with(seed: u64, toggles: &AugmentToggles) -> AugmentParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flip_h = rng.random_bool(0.5);
    let flip_v = rng.random_bool(0.5);
    let max = toggles.rotation_max_deg.clamp(0.0, MAX_ROTATION_DEG);
    let rotation = rng.random_range(-1.0..=1.0) * max;
    let brightness = rng.random_bool(0.5).then(|| rng.random_range(-0.2..=0.2));
    let contrast = rng.random_bool(0.5).then(|| rng.random_range(0.8..=1.2));
    AugmentParams {
        flip_h: toggles.flips && flip_h,
        flip_v: toggles.flips && flip_v,
        rotation_deg: rotation,
        brightness_delta: brightness.filter(|_| toggles.photometric).unwrap_or(0.0),
        contrast_gain: contrast.filter(|_| toggles.photometric).unwrap_or(1.0),
        seed,
    }
}

/// Rotation centre: the middle of the pixel grid.
fn centre(dims: ImageDims) -> (f64, f64) {
    ((dims.width as f64 - 1.0) / 2.0, (dims.height as f64 - 1.0) / 2.0)
}

/// Rotates `p` by `degrees` about the frame centre in pixel coordinates
/// (x right, y down), so positive angles turn clockwise on screen.
pub fn rotate_point(p: Point2D, dims: ImageDims, degrees: f64) -> Point2D {
    let (cx, cy) = centre(dims);
    let (s, c) = degrees.to_radians().sin_cos();
    let (dx, dy) = (p.x - cx, p.y - cy);
    Point2D::new(cx + c * dx - s * dy, cy + s * dx + c * dy)
}

fn flip_image(img: &RgbImage, horizontal: bool) -> RgbImage {
    let (w, h) = (img.dims.width as usize, img.dims.height as usize);
    let mut out = img.clone();
    for (src, dst) in img.planes.iter().zip(out.planes.iter_mut()) {
        for y in 0..h {
            for x in 0..w {
                let (sx, sy) = if horizontal { (w - 1 - x, y) } else { (x, h - 1 - y) };
                dst[y * w + x] = src[sy * w + sx];
            }
        }
    }
    out
}

/// Inverse-maps every output pixel and samples bilinearly; samples outside
/// the source grid are black.
pub fn rotate_image(img: &RgbImage, degrees: f64) -> RgbImage {
    let dims = img.dims;
    let (w, h) = (dims.width as usize, dims.height as usize);
    let mut out = RgbImage::black(dims);
    for y in 0..h {
        for x in 0..w {
            let src = rotate_point(Point2D::new(x as f64, y as f64), dims, -degrees);
            if !(src.x >= 0.0 && src.y >= 0.0 && src.x <= (w - 1) as f64 && src.y <= (h - 1) as f64)
            {
                continue;
            }
            let (x0, y0) = (src.x.floor() as usize, src.y.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
            let (fx, fy) = (src.x - x0 as f64, src.y - y0 as f64);
            for (plane, dst) in img.planes.iter().zip(out.planes.iter_mut()) {
                let at = |xx: usize, yy: usize| plane[yy * w + xx] as f64;
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                dst[y * w + x] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    out
}

fn adjust_photometric(img: &mut RgbImage, brightness_delta: f64, contrast_gain: f64) {
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        let out = (v as f64 - 127.5) * contrast_gain + 127.5 + 255.0 * brightness_delta;
        *slot = out.round().clamp(0.0, 255.0) as u8;
    }
    for plane in &mut img.planes {
        for px in plane.iter_mut() {
            *px = lut[*px as usize];
        }
    }
}

/// Applies `params` to an image and its landmarks.
pub fn augment(img: &RgbImage, pts: &LandmarkSet, params: &AugmentParams) -> Result<Augmented> {
    params.validate()?;
    img.dims.ensure_same(&pts.dims)?;
    pts.validate()?;
    let dims = img.dims;
    let (w, h) = (dims.width as f64, dims.height as f64);

    let mut image = img.clone();
    let mut points = pts.points.clone();
    if params.flip_h {
        image = flip_image(&image, true);
        points.iter_mut().for_each(|p| p.x = w - 1.0 - p.x);
    }
    if params.flip_v {
        image = flip_image(&image, false);
        points.iter_mut().for_each(|p| p.y = h - 1.0 - p.y);
    }
    if params.rotation_deg != 0.0 {
        image = rotate_image(&image, params.rotation_deg);
        points
            .iter_mut()
            .for_each(|p| *p = rotate_point(*p, dims, params.rotation_deg));
    }
    if !params.is_photometric_identity() {
        adjust_photometric(&mut image, params.brightness_delta, params.contrast_gain);
    }

    let before = points.len();
    points.retain(|p| dims.contains(*p));
    let dropped = before - points.len();
    Ok(Augmented {
        image,
        landmarks: LandmarkSet {
            frame_id: pts.frame_id.clone(),
            dims,
            points,
        },
        dropped,
    })
}
