//! Reference implementations used only by tests. Each one is written the
//! slow, obvious way and shares no code path with the library.

#![allow(dead_code)]

use std::collections::VecDeque;

use num::{BigInt, BigRational, Zero};
use suturemap::decode::{BinaryMask, Connectivity, StructuringElement};
use suturemap::types::{ImageDims, Point2D};

/// Exhaustive Otsu search in exact rational arithmetic.
///
/// Class 0 is `v <= t`; ties keep the smallest `t`; with no valid split the
/// threshold is the highest occupied value.
pub fn otsu_oracle(values: &[u8]) -> u8 {
    let n = values.len();
    let total = BigRational::from_integer(BigInt::from(n));
    let mut best: Option<(u8, BigRational)> = None;
    for t in 0..=255u8 {
        let (c0, c1): (Vec<u8>, Vec<u8>) = values.iter().partition(|&&v| v <= t);
        if c0.is_empty() || c1.is_empty() {
            continue;
        }
        let mean = |c: &[u8]| {
            let s: u64 = c.iter().map(|&v| v as u64).sum();
            BigRational::new(BigInt::from(s), BigInt::from(c.len()))
        };
        let w0 = BigRational::from_integer(BigInt::from(c0.len())) / &total;
        let w1 = BigRational::from_integer(BigInt::from(c1.len())) / &total;
        let diff = mean(&c0) - mean(&c1);
        let var = w0 * w1 * &diff * &diff;
        if best.as_ref().is_none_or(|(_, b)| var > *b) {
            best = Some((t, var));
        }
    }
    match best {
        Some((t, v)) => {
            assert!(!v.is_zero());
            t
        }
        None => values.iter().copied().max().unwrap_or(255),
    }
}

pub fn naive_erode(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let d = m.dims();
    let mut out = BinaryMask::empty(d);
    for y in 0..d.height as i64 {
        for x in 0..d.width as i64 {
            let all = se
                .offsets()
                .iter()
                .all(|&(dx, dy)| m.get_or(x + dx as i64, y + dy as i64, false));
            out.set(x as usize, y as usize, all);
        }
    }
    out
}

pub fn naive_dilate(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let d = m.dims();
    let mut out = BinaryMask::empty(d);
    for y in 0..d.height as i64 {
        for x in 0..d.width as i64 {
            let any = se
                .offsets()
                .iter()
                .any(|&(dx, dy)| m.get_or(x - dx as i64, y - dy as i64, false));
            out.set(x as usize, y as usize, any);
        }
    }
    out
}

pub fn naive_open(m: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    naive_dilate(&naive_erode(m, se), se)
}

/// A component found by breadth-first flood fill, in row-major seed order.
#[derive(Debug, Clone, PartialEq)]
pub struct FloodRegion {
    pub pixels: Vec<(usize, usize)>,
    pub area: usize,
    pub centroid: Point2D,
    pub bbox: (usize, usize, usize, usize),
}

pub fn flood_fill_regions(m: &BinaryMask, conn: Connectivity) -> Vec<FloodRegion> {
    let d = m.dims();
    let (w, h) = (d.width as i64, d.height as i64);
    let mut seen = vec![false; d.len()];
    let mut out = Vec::new();
    let steps: &[(i64, i64)] = match conn {
        Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Connectivity::Eight => &[
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ],
    };
    for sy in 0..h {
        for sx in 0..w {
            let si = (sy * w + sx) as usize;
            if seen[si] || !m.get(sx as usize, sy as usize) {
                continue;
            }
            seen[si] = true;
            let mut queue = VecDeque::from([(sx, sy)]);
            let mut pixels = Vec::new();
            while let Some((x, y)) = queue.pop_front() {
                pixels.push((x as usize, y as usize));
                for &(dx, dy) in steps {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let ni = (ny * w + nx) as usize;
                    if !seen[ni] && m.get(nx as usize, ny as usize) {
                        seen[ni] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            pixels.sort_by_key(|&(x, y)| (y, x));
            let area = pixels.len();
            let cx = pixels.iter().map(|p| p.0 as f64).sum::<f64>() / area as f64;
            let cy = pixels.iter().map(|p| p.1 as f64).sum::<f64>() / area as f64;
            let bbox = (
                pixels.iter().map(|p| p.0).min().unwrap(),
                pixels.iter().map(|p| p.1).min().unwrap(),
                pixels.iter().map(|p| p.0).max().unwrap(),
                pixels.iter().map(|p| p.1).max().unwrap(),
            );
            out.push(FloodRegion {
                pixels,
                area,
                centroid: Point2D::new(cx, cy),
                bbox,
            });
        }
    }
    out
}

/// Maximum number of one-to-one pairs with distance accepted by `accepts`,
/// by exhaustive search over subsets of ground-truth points.
pub fn max_matching(pred: &[Point2D], gt: &[Point2D], accepts: impl Fn(f64) -> bool) -> usize {
    fn go(
        i: usize,
        used: u32,
        pred: &[Point2D],
        gt: &[Point2D],
        accepts: &dyn Fn(f64) -> bool,
    ) -> usize {
        if i == pred.len() {
            return 0;
        }
        let mut best = go(i + 1, used, pred, gt, accepts);
        for (j, g) in gt.iter().enumerate() {
            if used & (1 << j) == 0 && accepts(pred[i].distance(g)) {
                best = best.max(1 + go(i + 1, used | (1 << j), pred, gt, accepts));
            }
        }
        best
    }
    assert!(gt.len() <= 16);
    go(0, 0, pred, gt, &accepts)
}

pub fn random_mask(rng: &mut impl rand::Rng, dims: ImageDims, density: f64) -> BinaryMask {
    let bits = (0..dims.len()).map(|_| rng.random_bool(density)).collect();
    BinaryMask::from_bits(dims, bits).unwrap()
}
