//! Single-channel Gaussian heatmaps: every landmark of a frame is rendered
//! into the same grid, whatever the landmark count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ImageDims, LandmarkSet, Point2D};

/// Smoothing term of the soft dice score; makes empty-vs-empty equal 1.0.
pub const DICE_EPSILON: f64 = 1e-6;

/// How overlapping kernels are merged into one grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelCombine {
    /// Pixel value is the largest kernel response. Peaks stay at `amplitude`.
    #[default]
    Max,
    /// Kernel responses are added and the total is clamped to 1.0.
    Sum,
}

/// Shape of the kernel drawn at each landmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    /// Standard deviation in pixels.
    pub sigma: f64,
    /// Peak value, in `(0, 1]`.
    pub amplitude: f64,
    /// Support radius in multiples of `sigma`; the kernel is zero beyond it.
    pub truncation_radius: f64,
    pub combine: KernelCombine,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            amplitude: 1.0,
            truncation_radius: 3.0,
            combine: KernelCombine::Max,
        }
    }
}

impl GaussianSpec {
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be in (0, 1], got {}",
                self.amplitude
            )));
        }
        if !(self.truncation_radius.is_finite() && self.truncation_radius >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation_radius must be >= 1, got {}",
                self.truncation_radius
            )));
        }
        Ok(())
    }

    /// Support radius in pixels.
    pub fn support_radius(&self) -> f64 {
        self.truncation_radius * self.sigma
    }
}

/// Row-major intensity grid with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    dims: ImageDims,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn zeros(dims: ImageDims) -> Self {
        Self {
            dims,
            values: vec![0.0; dims.len()],
        }
    }

    /// Wraps a grid, checking its size and value range.
    pub fn from_values(dims: ImageDims, values: Vec<f64>) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::InvalidParameter(format!(
                "heatmap grid has {} values, expected {}",
                values.len(),
                dims.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!(
                "heatmap value {} at index {i} outside [0, 1]",
                values[i]
            )));
        }
        Ok(Self { dims, values })
    }

    /// Wraps a grid after clamping every value into `[0, 1]` (NaN becomes 0).
    pub fn from_values_clamped(dims: ImageDims, mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Self::from_values(dims, values)
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.dims.index(x, y)]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Renders every landmark of `points` into one heatmap.
pub fn render_heatmap(points: &LandmarkSet, spec: &GaussianSpec) -> Result<Heatmap> {
    points.validate()?;
    let weighted: Vec<(Point2D, f64)> = points
        .points
        .iter()
        .map(|&p| (p, spec.amplitude))
        .collect();
    render_weighted(points.dims, &weighted, spec)
}

/// Renders kernels with individual peak heights; `spec.amplitude` is ignored.
pub fn render_weighted(
    dims: ImageDims,
    kernels: &[(Point2D, f64)],
    spec: &GaussianSpec,
) -> Result<Heatmap> {
    spec.validate()?;
    for (index, (p, amplitude)) in kernels.iter().enumerate() {
        if !dims.contains(*p) {
            return Err(Error::OutOfFrame {
                index,
                x: p.x,
                y: p.y,
                width: dims.width,
                height: dims.height,
            });
        }
        if !(0.0..=1.0).contains(amplitude) {
            return Err(Error::InvalidParameter(format!(
                "kernel {index} amplitude {amplitude} outside [0, 1]"
            )));
        }
    }

    let mut grid = vec![0.0f64; dims.len()];
    let radius = spec.support_radius();
    let radius_sq = radius * radius;
    let two_var = 2.0 * spec.sigma * spec.sigma;
    let (w, h) = (dims.width as i64, dims.height as i64);

    for &(p, amplitude) in kernels {
        let x0 = ((p.x - radius).ceil() as i64).max(0);
        let x1 = ((p.x + radius).floor() as i64).min(w - 1);
        let y0 = ((p.y - radius).ceil() as i64).max(0);
        let y1 = ((p.y + radius).floor() as i64).min(h - 1);
        for py in y0..=y1 {
            let dy = py as f64 - p.y;
            let row = py as usize * w as usize;
            for px in x0..=x1 {
                let dx = px as f64 - p.x;
                let d2 = dx * dx + dy * dy;
                if d2 > radius_sq {
                    continue;
                }
                let v = amplitude * (-d2 / two_var).exp();
                let cell = &mut grid[row + px as usize];
                match spec.combine {
                    KernelCombine::Max => *cell = cell.max(v),
                    KernelCombine::Sum => *cell = (*cell + v).min(1.0),
                }
            }
        }
    }
    Ok(Heatmap { dims, values: grid })
}

/// Soft dice: `(2·Σab + ε) / (Σa² + Σb² + ε)` with `ε = DICE_EPSILON`.
pub fn dice_score(a: &Heatmap, b: &Heatmap) -> Result<f64> {
    a.dims.ensure_same(&b.dims)?;
    let (mut inter, mut sa, mut sb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.values.iter().zip(&b.values) {
        inter += x * y;
        sa += x * x;
        sb += y * y;
    }
    Ok((2.0 * inter + DICE_EPSILON) / (sa + sb + DICE_EPSILON))
}

/// An 8-bit single-channel grid, the persisted form of a heatmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteGrid {
    pub dims: ImageDims,
    pub data: Vec<u8>,
}

impl ByteGrid {
    pub fn new(dims: ImageDims, data: Vec<u8>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidParameter(format!(
                "byte grid has {} values, expected {}",
                data.len(),
                dims.len()
            )));
        }
        Ok(Self { dims, data })
    }

    /// 256-bin histogram of the grid.
    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &v in &self.data {
            hist[v as usize] += 1;
        }
        hist
    }
}

/// Maps `v` to `floor(v·255 + 0.5)`, i.e. round half up.
#[inline]
pub fn quantize_value(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn quantize(h: &Heatmap) -> ByteGrid {
    ByteGrid {
        dims: h.dims,
        data: h.values.iter().map(|&v| quantize_value(v)).collect(),
    }
}

pub fn dequantize(grid: &ByteGrid) -> Heatmap {
    Heatmap {
        dims: grid.dims,
        values: grid.data.iter().map(|&g| g as f64 / 255.0).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dims(w: u32, h: u32) -> ImageDims {
        ImageDims::new(w, h).unwrap()
    }

    fn set(w: u32, h: u32, pts: &[(f64, f64)]) -> LandmarkSet {
        LandmarkSet::new("t", dims(w, h), pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    /// Evaluates every kernel at every pixel and keeps the maximum.
    fn brute_force(points: &[(f64, f64)], d: ImageDims, spec: &GaussianSpec) -> Vec<f64> {
        let r = spec.truncation_radius * spec.sigma;
        let mut out = Vec::with_capacity(d.len());
        for py in 0..d.height {
            for px in 0..d.width {
                let mut best = 0.0f64;
                for &(x, y) in points {
                    let d2 = (px as f64 - x).powi(2) + (py as f64 - y).powi(2);
                    if d2.sqrt() <= r {
                        best = best.max(spec.amplitude * (-d2 / (2.0 * spec.sigma.powi(2))).exp());
                    }
                }
                out.push(best);
            }
        }
        out
    }

    #[test]
    fn empty_set_renders_zeros() {
        let h = render_heatmap(&set(17, 9, &[]), &GaussianSpec::default()).unwrap();
        assert!(h.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_kernel_closed_form() {
        let h = render_heatmap(&set(32, 32, &[(10.0, 10.0)]), &GaussianSpec::with_sigma(2.0)).unwrap();
        assert_eq!(h.get(10, 10), 1.0);
        assert!((h.get(12, 10) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((h.get(12, 10) - 0.6065).abs() < 1e-4);
        // 3σ = 6 px support: (16,10) is on the boundary, (17,10) beyond it.
        assert!(h.get(16, 10) > 0.0);
        assert_eq!(h.get(17, 10), 0.0);
    }

    #[test]
    fn two_kernels_match_brute_force() {
        let spec = GaussianSpec::with_sigma(2.0);
        let pts = [(10.0, 10.0), (13.0, 10.0)];
        let h = render_heatmap(&set(40, 24, &pts), &spec).unwrap();
        let oracle = brute_force(&pts, dims(40, 24), &spec);
        for (a, b) in h.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        // Pixels between the two centres take the nearer kernel.
        assert!((h.get(11, 10) - (-1.0f64 / 8.0).exp()).abs() < 1e-15);
        assert!((h.get(12, 10) - (-1.0f64 / 8.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn out_of_frame_point_rejected() {
        let bad = LandmarkSet {
            frame_id: "x".into(),
            dims: dims(10, 10),
            points: vec![Point2D::new(1.0, 1.0), Point2D::new(10.0, 2.0)],
        };
        let err = render_heatmap(&bad, &GaussianSpec::default()).unwrap_err();
        assert!(matches!(err, Error::OutOfFrame { index: 1, .. }));
    }

    #[test]
    fn sum_mode_clamps() {
        let spec = GaussianSpec {
            combine: KernelCombine::Sum,
            ..GaussianSpec::default()
        };
        let h = render_heatmap(&set(20, 20, &[(5.0, 5.0), (6.0, 5.0)]), &spec).unwrap();
        assert_eq!(h.max_value(), 1.0);
        let expected = ((-1.0f64 / 8.0).exp() + (-4.0f64 / 8.0).exp()).min(1.0);
        assert!((h.get(7, 5) - expected).abs() < 1e-12);
    }

    #[test]
    fn invalid_spec_rejected() {
        for spec in [
            GaussianSpec::with_sigma(0.0),
            GaussianSpec {
                amplitude: 1.5,
                ..Default::default()
            },
            GaussianSpec {
                truncation_radius: 0.5,
                ..Default::default()
            },
        ] {
            assert!(spec.validate().is_err());
        }
    }

    #[test]
    fn dice_identity_and_disjoint() {
        let spec = GaussianSpec::default();
        let a = render_heatmap(&set(64, 32, &[(10.0, 10.0)]), &spec).unwrap();
        let b = render_heatmap(&set(64, 32, &[(50.0, 20.0)]), &spec).unwrap();
        assert!((dice_score(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        assert!(dice_score(&a, &b).unwrap() < 1e-6);
        let z = Heatmap::zeros(dims(64, 32));
        assert_eq!(dice_score(&z, &z).unwrap(), 1.0);
    }

    #[test]
    fn dice_shifted_kernel_matches_direct_sum() {
        let spec = GaussianSpec::with_sigma(2.0);
        let a = render_heatmap(&set(48, 32, &[(20.0, 16.0)]), &spec).unwrap();
        let b = render_heatmap(&set(48, 32, &[(24.0, 16.0)]), &spec).unwrap();
        let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
        for y in 0..32 {
            for x in 0..48 {
                ab += a.get(x, y) * b.get(x, y);
                aa += a.get(x, y) * a.get(x, y);
                bb += b.get(x, y) * b.get(x, y);
            }
        }
        let expected = (2.0 * ab + 1e-6) / (aa + bb + 1e-6);
        let got = dice_score(&a, &b).unwrap();
        assert!((got - expected).abs() < 1e-12);
        // Continuous limit: exp(-d²/(4σ²)) = exp(-1) for d = 2σ.
        assert!((got - (-1.0f64).exp()).abs() < 0.02);
    }

    #[test]
    fn dice_dimension_mismatch() {
        let a = Heatmap::zeros(dims(4, 4));
        let b = Heatmap::zeros(dims(4, 5));
        assert!(matches!(
            dice_score(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quantize_endpoints_and_half() {
        assert_eq!(quantize_value(1.0), 255);
        assert_eq!(quantize_value(0.0), 0);
        assert_eq!(quantize_value(0.5), 128);
        let g = ByteGrid::new(dims(1, 1), vec![128]).unwrap();
        assert!((dequantize(&g).get(0, 0) - 0.501_960_784_313_725_5).abs() < 1e-15);
    }

    #[test]
    fn from_values_range_checked() {
        assert!(Heatmap::from_values(dims(2, 1), vec![0.0, 1.01]).is_err());
        assert!(Heatmap::from_values(dims(2, 1), vec![0.0]).is_err());
        let h = Heatmap::from_values_clamped(dims(2, 1), vec![-3.0, f64::NAN]).unwrap();
        assert_eq!(h.values(), &[0.0, 0.0]);
    }

    fn points_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..48.0, 0.0f64..32.0), 0..8)
    }

    proptest! {
        #[test]
        fn render_stays_in_unit_range(pts in points_strategy(), sigma in 0.5f64..6.0) {
            let h = render_heatmap(&set(48, 32, &pts), &GaussianSpec::with_sigma(sigma)).unwrap();
            prop_assert!(h.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn render_permutation_invariant(pts in points_strategy(), rot in 0usize..8) {
            let spec = GaussianSpec::default();
            let mut shuffled = pts.clone();
            if !shuffled.is_empty() {
                let k = rot % shuffled.len();
                shuffled.rotate_left(k);
                shuffled.reverse();
            }
            let a = render_heatmap(&set(48, 32, &pts), &spec).unwrap();
            let b = render_heatmap(&set(48, 32, &shuffled), &spec).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }

        #[test]
        fn render_matches_brute_force(pts in points_strategy(), sigma in 0.5f64..4.0) {
            let spec = GaussianSpec::with_sigma(sigma);
            let h = render_heatmap(&set(48, 32, &pts), &spec).unwrap();
            let oracle = brute_force(&pts, dims(48, 32), &spec);
            for (a, b) in h.values().iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn isolated_peak_is_local_max(x in 8.0f64..40.0, y in 8.0f64..24.0) {
            let h = render_heatmap(&set(48, 32, &[(x, y)]), &GaussianSpec::default()).unwrap();
            let (nx, ny) = (x.round() as usize, y.round() as usize);
            let peak = h.get(nx, ny);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let v = h.get((nx as i64 + dx) as usize, (ny as i64 + dy) as usize);
                    prop_assert!(v <= peak);
                }
            }
        }

        #[test]
        fn quantize_round_trip_error(values in prop::collection::vec(0.0f64..=1.0, 12)) {
            let h = Heatmap::from_values(dims(4, 3), values).unwrap();
            let back = dequantize(&quantize(&h));
            for (a, b) in h.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1.0 / 510.0 + 1e-12);
            }
        }

        #[test]
        fn dequantize_quantize_idempotent(data in prop::collection::vec(any::<u8>(), 12)) {
            let g = ByteGrid::new(dims(3, 4), data).unwrap();
            prop_assert_eq!(quantize(&dequantize(&g)), g);
        }

        #[test]
        fn dice_symmetric(a in points_strategy(), b in points_strategy()) {
            let spec = GaussianSpec::default();
            let ha = render_heatmap(&set(48, 32, &a), &spec).unwrap();
            let hb = render_heatmap(&set(48, 32, &b), &spec).unwrap();
            prop_assert_eq!(dice_score(&ha, &hb).unwrap(), dice_score(&hb, &ha).unwrap());
            if !a.is_empty() {
                prop_assert!(dice_score(&ha, &ha).unwrap() >= 1.0 - 1e-6);
            }
        }
    }
}
