//! Global Otsu threshold over the 256-bin histogram of a quantized heatmap.
//!
//! Foreground is every pixel whose 8-bit value is strictly greater than the
//! threshold. Ties in between-class variance go to the smallest threshold.
//! A histogram with a single occupied bin has no valid split; the threshold
//! is then that bin and the foreground is empty.

use super::mask::BinaryMask;
use crate::heatmap::{quantize, ByteGrid, Heatmap};

/// Chosen threshold and the resulting foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtsuResult {
    pub threshold: u8,
    pub mask: BinaryMask,
}

pub fn otsu_threshold(h: &Heatmap) -> OtsuResult {
    otsu_threshold_grid(&quantize(h))
}

pub fn otsu_threshold_grid(grid: &ByteGrid) -> OtsuResult {
    let threshold = otsu_threshold_histogram(&grid.histogram());
    let bits = grid.data.iter().map(|&v| v > threshold).collect();
    let mask = BinaryMask::from_bits(grid.dims, bits).expect("grid and mask share dims");
    OtsuResult { threshold, mask }
}

/// Pixel counts above this bound fall back to floating-point comparison.
const EXACT_LIMIT: u64 = 1 << 24;

/// Threshold maximizing `ω0·ω1·(μ0 − μ1)²` where class 0 is `v <= t`.
///
/// The variance equals `(N·s0 − n0·S)² / (n0·n1·N²)`, so candidates are
/// ranked by `D² / (n0·n1)` with `D = N·s0 − n0·S`, compared exactly in
/// integer arithmetic. Exact for up to 2^24 pixels.
pub fn otsu_threshold_histogram(hist: &[u64; 256]) -> u8 {
    let total: u64 = hist.iter().sum();
    let sum_all: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let exact = total <= EXACT_LIMIT;

    let mut best: Option<(u8, Score)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (t, &count) in hist.iter().enumerate() {
        n0 += count;
        s0 += t as u64 * count;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (total as i128 * s0 as i128 - n0 as i128 * sum_all as i128).unsigned_abs();
        let score = if exact {
            Score::Exact {
                d_sq: d * d,
                denom: n0 * n1,
            }
        } else {
            Score::Approx((d as f64).powi(2) / (n0 as f64 * n1 as f64))
        };
        match &best {
            Some((_, b)) if !score.greater_than(b) => {}
            _ => best = Some((t as u8, score)),
        }
    }

    match best {
        Some((t, _)) => t,
        // Single occupied bin (or empty histogram): threshold at the top
        // occupied value so nothing is foreground.
        None => hist.iter().rposition(|&c| c > 0).unwrap_or(255) as u8,
    }
}

#[derive(Debug, Clone, Copy)]
enum Score {
    Exact { d_sq: u128, denom: u64 },
    Approx(f64),
}

impl Score {
    fn greater_than(&self, other: &Score) -> bool {
        match (*self, *other) {
            (Score::Exact { d_sq: a, denom: p }, Score::Exact { d_sq: b, denom: q }) => {
                // a/p > b/q  <=>  a·q > b·p
                mul_wide(a, q) > mul_wide(b, p)
            }
            (Score::Approx(a), Score::Approx(b)) => a > b,
            _ => unreachable!("score kinds are never mixed"),
        }
    }
}

/// 192-bit product as big-endian limbs, so tuple ordering is numeric ordering.
fn mul_wide(a: u128, b: u64) -> (u64, u64, u64) {
    let lo = (a as u64) as u128 * b as u128;
    let hi = (a >> 64) * b as u128;
    let mid = (lo >> 64) + (hi as u64) as u128;
    let top = (hi >> 64) + (mid >> 64);
    (top as u64, mid as u64, lo as u64)
}
