//! Synthetic scenes and heatmap corruption, standing in for the imperfect
//! output of a trained network so the decode and scoring stages can be
//! stress-tested against known ground truth.
//!
//! All randomness comes from explicit seeds.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::decode::{decode_frame, DecodeConfig};
use crate::error::{Error, Result};
use crate::evaluation::{
    accumulate_frames, aggregate_folds, match_points, FoldRow, MatchConfig, MatchReport, Metrics,
    MetricSummary,
};
use crate::heatmap::{render_weighted, GaussianSpec, Heatmap};
use crate::types::{ImageDims, LandmarkSet, Point2D};

/// Rejection-sampling attempts allowed per point.
const ATTEMPTS_PER_POINT: usize = 10_000;

/// Spurious kernels look exactly like landmark kernels.
const CLUTTER_SPEC: GaussianSpec = GaussianSpec {
    sigma: 2.0,
    amplitude: 1.0,
    truncation_radius: 3.0,
    combine: crate::heatmap::KernelCombine::Max,
};

// Stream tweaks so one seed drives independent generators.
const DROPOUT_STREAM: u64 = 0x6a09_e667_f3bc_c908;
const DEGRADE_STREAM: u64 = 0xbb67_ae85_84ca_a73b;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneConstraints {
    pub dims: ImageDims,
    pub min_points: usize,
    pub max_points: usize,
    /// Minimum pairwise distance in pixels.
    pub min_separation: f64,
    /// Minimum distance from every point to the outermost pixel centres.
    pub border_margin: f64,
    pub seed: u64,
}

impl Default for SceneConstraints {
    fn default() -> Self {
        Self {
            dims: ImageDims {
                width: 512,
                height: 288,
            },
            min_points: 0,
            max_points: 15,
            min_separation: 14.0,
            border_margin: 6.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DegradationParams {
    /// Std of additive Gaussian noise, intensity units.
    pub noise_sigma: f64,
    /// Std of the Gaussian blur in pixels.
    pub blur_sigma: f64,
    /// Each kernel's peak is scaled by `1 - amplitude_jitter·u`, `u ~ U[0,1)`.
    pub amplitude_jitter: f64,
    /// Probability that a landmark's kernel is not rendered.
    pub dropout_prob: f64,
    /// Number of spurious kernels added to empty parts of the grid.
    pub clutter_count: usize,
    pub seed: u64,
}

impl DegradationParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!("{what} out of range: {v}")))
        };
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma", self.noise_sigma);
        }
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return bad("blur_sigma", self.blur_sigma);
        }
        if !(0.0..1.0).contains(&self.amplitude_jitter) {
            return bad("amplitude_jitter", self.amplitude_jitter);
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return bad("dropout_prob", self.dropout_prob);
        }
        Ok(())
    }
}

/// Uniform rejection sampling of a landmark set under `c`.
pub fn sample_scene(c: &SceneConstraints) -> Result<LandmarkSet> {
    if c.min_points > c.max_points {
        return Err(Error::InfeasibleScene(format!(
            "min_points {} exceeds max_points {}",
            c.min_points, c.max_points
        )));
    }
    if !(c.min_separation >= 0.0 && c.border_margin >= 0.0) {
        return Err(Error::InfeasibleScene(
            "separation and margin must be non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let n = rng.random_range(c.min_points..=c.max_points);
    let (x_lo, x_hi) = (c.border_margin, c.dims.width as f64 - 1.0 - c.border_margin);
    let (y_lo, y_hi) = (c.border_margin, c.dims.height as f64 - 1.0 - c.border_margin);
    if n > 0 && (x_lo > x_hi || y_lo > y_hi) {
        return Err(Error::InfeasibleScene(format!(
            "border margin {} leaves no room in a {}x{} frame",
            c.border_margin, c.dims.width, c.dims.height
        )));
    }

    let sep_sq = c.min_separation * c.min_separation;
    let mut points: Vec<Point2D> = Vec::with_capacity(n);
    while points.len() < n {
        let placed = (0..ATTEMPTS_PER_POINT).find_map(|_| {
            let p = Point2D::new(rng.random_range(x_lo..=x_hi), rng.random_range(y_lo..=y_hi));
            points
                .iter()
                .all(|q| q.distance_squared(&p) >= sep_sq)
                .then_some(p)
        });
        match placed {
            Some(p) => points.push(p),
            None => {
                return Err(Error::InfeasibleScene(format!(
                    "could not place point {} of {n} with separation {}",
                    points.len() + 1,
                    c.min_separation
                )))
            }
        }
    }
    LandmarkSet::new(format!("scene_{}", c.seed), c.dims, points)
}

fn blur_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Separable Gaussian blur with clamp-to-edge borders.
pub fn gaussian_blur(values: &[f64], dims: ImageDims, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return values.to_vec();
    }
    let kernel = blur_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (dims.width as i64, dims.height as i64);
    let mut tmp = vec![0.0; values.len()];
    for y in 0..h {
        for x in 0..w {
            tmp[(y * w + x) as usize] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * values[(y * w + (x + i as i64 - r).clamp(0, w - 1)) as usize])
                .sum();
        }
    }
    let mut out = vec![0.0; values.len()];
    for y in 0..h {
        for x in 0..w {
            out[(y * w + x) as usize] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp[((y + i as i64 - r).clamp(0, h - 1) * w + x) as usize])
                .sum();
        }
    }
    out
}

/// Blur, additive noise, then clutter kernels, clamped back into `[0, 1]`.
///
/// Clutter kernels are only placed where the input heatmap and earlier
/// clutter have no support, so they never merge with real landmarks.
/// `amplitude_jitter` and `dropout_prob` act on kernels before rendering
/// and are ignored here; see [`trial`].
pub fn degrade(h: &Heatmap, p: &DegradationParams) -> Result<Heatmap> {
    p.validate()?;
    if p.noise_sigma == 0.0 && p.blur_sigma == 0.0 && p.clutter_count == 0 {
        return Ok(h.clone());
    }
    let dims = h.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ DEGRADE_STREAM);
    let mut values = gaussian_blur(h.values(), dims, p.blur_sigma);

    if p.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, p.noise_sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }

    if p.clutter_count > 0 {
        let support = CLUTTER_SPEC.support_radius();
        let mut placed: Vec<Point2D> = Vec::new();
        for _ in 0..p.clutter_count {
            let spot = (0..ATTEMPTS_PER_POINT).find_map(|_| {
                let c = Point2D::new(
                    rng.random_range(0.0..dims.width as f64),
                    rng.random_range(0.0..dims.height as f64),
                );
                let clear_of_clutter = placed
                    .iter()
                    .all(|q| q.distance(&c) > 2.0 * support);
                (clear_of_clutter && window_is_zero(h, c, 2.0 * support)).then_some(c)
            });
            match spot {
                Some(c) => placed.push(c),
                None => log::debug!("no free spot for clutter kernel"),
            }
        }
        let kernels: Vec<(Point2D, f64)> = placed.iter().map(|&c| (c, 1.0)).collect();
        let clutter = render_weighted(dims, &kernels, &CLUTTER_SPEC)?;
        for (v, c) in values.iter_mut().zip(clutter.values()) {
            *v = v.max(*c);
        }
    }
    Heatmap::from_values_clamped(dims, values)
}

fn window_is_zero(h: &Heatmap, c: Point2D, radius: f64) -> bool {
    let dims = h.dims();
    let x0 = (c.x - radius).floor().max(0.0) as usize;
    let y0 = (c.y - radius).floor().max(0.0) as usize;
    let x1 = ((c.x + radius).ceil() as usize).min(dims.width as usize - 1);
    let y1 = ((c.y + radius).ceil() as usize).min(dims.height as usize - 1);
    (y0..=y1).all(|y| (x0..=x1).all(|x| h.get(x, y) == 0.0))
}

/// Everything a single synthetic trial needs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialSetup {
    pub scene: SceneConstraints,
    pub gaussian: GaussianSpec,
    pub degradation: DegradationParams,
    pub decode: DecodeConfig,
    pub matching: MatchConfig,
}

impl TrialSetup {
    /// Copy with both the scene and the degradation seeded by `seed`.
    pub fn seeded(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.scene.seed = seed;
        s.degradation.seed = seed;
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub ground_truth: LandmarkSet,
    pub predicted: LandmarkSet,
    pub report: MatchReport,
    pub metrics: Metrics,
}

/// Scene → per-kernel dropout and amplitude jitter → render → degrade →
/// decode → match against the full ground truth.
pub fn trial(setup: &TrialSetup) -> Result<TrialOutcome> {
    let gt = sample_scene(&setup.scene)?;
    let p = &setup.degradation;
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ DROPOUT_STREAM);
    let kernels: Vec<(Point2D, f64)> = gt
        .points
        .iter()
        .filter_map(|&pt| {
            let dropped = rng.random_bool(p.dropout_prob);
            let u: f64 = rng.random();
            let amplitude = setup.gaussian.amplitude * (1.0 - p.amplitude_jitter * u);
            (!dropped).then_some((pt, amplitude))
        })
        .collect();
    let clean = render_weighted(gt.dims, &kernels, &setup.gaussian)?;
    let degraded = degrade(&clean, p)?;
    let predicted = decode_frame(&gt.frame_id, &degraded, &setup.decode)?;
    let report = match_points(&predicted, &gt, &setup.matching)?;
    let metrics = Metrics::from_report(&report);
    Ok(TrialOutcome {
        ground_truth: gt,
        predicted,
        report,
        metrics,
    })
}

/// One line of a trial results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub n_points: usize,
    pub noise_sigma: f64,
    pub blur_sigma: f64,
    pub amplitude_jitter: f64,
    pub dropout_prob: f64,
    pub clutter_count: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub sensitivity: f64,
    pub f1: f64,
}

impl TrialRow {
    pub fn new(setup: &TrialSetup, outcome: &TrialOutcome) -> Self {
        let d = &setup.degradation;
        Self {
            seed: setup.scene.seed,
            n_points: outcome.ground_truth.len(),
            noise_sigma: d.noise_sigma,
            blur_sigma: d.blur_sigma,
            amplitude_jitter: d.amplitude_jitter,
            dropout_prob: d.dropout_prob,
            clutter_count: d.clutter_count,
            tp: outcome.report.tp,
            fp: outcome.report.fp,
            fn_: outcome.report.fn_,
            precision: outcome.metrics.precision,
            sensitivity: outcome.metrics.sensitivity,
            f1: outcome.metrics.f1,
        }
    }

    fn report(&self) -> MatchReport {
        MatchReport {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            pairs: Vec::new(),
        }
    }
}

/// Pooled metrics over a batch, plus mean ± std over scorable trials.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub trials: usize,
    pub pooled: Metrics,
    /// `None` when no trial had predictions or ground truth.
    pub spread: Option<MetricSummary>,
}

pub fn summarize_trials(rows: &[TrialRow]) -> BatchSummary {
    let reports: Vec<MatchReport> = rows.iter().map(TrialRow::report).collect();
    let pooled = Metrics::from_report(&accumulate_frames(&reports));
    let scorable: Vec<FoldRow> = rows
        .iter()
        .zip(&reports)
        .filter(|(_, r)| Metrics::is_scorable(r))
        .map(|(row, _)| FoldRow {
            fold_id: row.seed.to_string(),
            metrics: Metrics {
                precision: row.precision,
                sensitivity: row.sensitivity,
                f1: row.f1,
            },
        })
        .collect();
    BatchSummary {
        trials: rows.len(),
        pooled,
        spread: aggregate_folds(scorable).ok(),
    }
}

/// Writes trial rows as comma-separated text with a header line.
pub fn write_trial_rows<W: Write>(rows: &[TrialRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::InvalidParameter(format!("csv write failed: {e}"));
    if rows.is_empty() {
        w.write_record([
            "seed",
            "n_points",
            "noise_sigma",
            "blur_sigma",
            "amplitude_jitter",
            "dropout_prob",
            "clutter_count",
            "tp",
            "fp",
            "fn",
            "precision",
            "sensitivity",
            "f1",
        ])
        .map_err(err)?;
    }
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv write failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::decode;
    use crate::heatmap::render_heatmap;

    fn constraints(min: usize, max: usize, seed: u64) -> SceneConstraints {
        SceneConstraints {
            min_points: min,
            max_points: max,
            seed,
            ..SceneConstraints::default()
        }
    }

    #[test]
    fn empty_range_gives_empty_scene() {
        assert!(sample_scene(&constraints(0, 0, 3)).unwrap().is_empty());
    }

    #[test]
    fn separation_and_margin_hold() {
        for seed in 0..50 {
            let c = constraints(10, 10, seed);
            let s = sample_scene(&c).unwrap();
            assert_eq!(s.len(), 10);
            for (i, a) in s.points.iter().enumerate() {
                assert!(a.x >= 6.0 && a.y >= 6.0 && a.x <= 505.0 && a.y <= 281.0);
                for b in &s.points[i + 1..] {
                    assert!(a.distance(b) >= 14.0);
                }
            }
        }
    }

    #[test]
    fn scenes_are_seeded() {
        let c = constraints(0, 15, 99);
        assert_eq!(sample_scene(&c).unwrap(), sample_scene(&c).unwrap());
    }

    #[test]
    fn impossible_constraints_fail() {
        let c = SceneConstraints {
            min_separation: 400.0,
            ..constraints(5, 5, 0)
        };
        assert!(matches!(sample_scene(&c), Err(Error::InfeasibleScene(_))));
        let c = SceneConstraints {
            border_margin: 200.0,
            ..constraints(1, 1, 0)
        };
        assert!(sample_scene(&c).is_err());
        assert!(sample_scene(&constraints(3, 2, 0)).is_err());
    }

    #[test]
    fn zero_params_identity() {
        let s = sample_scene(&constraints(5, 5, 1)).unwrap();
        let h = render_heatmap(&s, &GaussianSpec::default()).unwrap();
        assert_eq!(degrade(&h, &DegradationParams::default()).unwrap(), h);
    }

    #[test]
    fn noise_statistics() {
        let dims = ImageDims::new(512, 288).unwrap();
        let h = Heatmap::from_values(dims, vec![0.5; dims.len()]).unwrap();
        let p = DegradationParams {
            noise_sigma: 0.05,
            seed: 11,
            ..Default::default()
        };
        let out = degrade(&h, &p).unwrap();
        let diffs: Vec<f64> = out.values().iter().zip(h.values()).map(|(a, b)| a - b).collect();
        assert!(diffs.iter().all(|d| d.abs() <= 1.0));
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std - 0.05).abs() <= 0.005, "empirical std {std}");
    }

    #[test]
    fn degrade_clamps() {
        let dims = ImageDims::new(64, 64).unwrap();
        let h = Heatmap::from_values(dims, vec![0.9; dims.len()]).unwrap();
        let p = DegradationParams {
            noise_sigma: 0.5,
            blur_sigma: 1.5,
            clutter_count: 2,
            seed: 5,
            ..Default::default()
        };
        assert!(degrade(&h, &p)
            .unwrap()
            .values()
            .iter()
            .all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn blur_preserves_constant_and_mass() {
        let dims = ImageDims::new(40, 30).unwrap();
        let flat = vec![0.25; dims.len()];
        for v in gaussian_blur(&flat, dims, 2.0) {
            assert!((v - 0.25).abs() < 1e-12);
        }
        let mut spike = vec![0.0; dims.len()];
        spike[dims.index(20, 15)] = 1.0;
        let total: f64 = gaussian_blur(&spike, dims, 1.5).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clutter_yields_spurious_detections() {
        let dims = ImageDims::new(512, 288).unwrap();
        let p = DegradationParams {
            clutter_count: 3,
            seed: 21,
            ..Default::default()
        };
        let out = degrade(&Heatmap::zeros(dims), &p).unwrap();
        let found = decode(&out, &DecodeConfig::default()).unwrap();
        assert!(!found.is_empty() && found.len() <= 3, "{} points", found.len());
    }

    #[test]
    fn clean_trial_is_perfect() {
        let setup = TrialSetup {
            scene: constraints(1, 15, 0),
            ..TrialSetup::default()
        };
        for seed in 0..20 {
            let out = trial(&setup.seeded(seed)).unwrap();
            assert_eq!(out.report.fp, 0);
            assert_eq!(out.report.fn_, 0);
        }
    }

    #[test]
    fn summary_of_empty_batch() {
        let s = summarize_trials(&[]);
        assert_eq!(s.trials, 0);
        assert!(s.spread.is_none());
        let mut buf = Vec::new();
        write_trial_rows(&[], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("seed,n_points"));
    }
}
