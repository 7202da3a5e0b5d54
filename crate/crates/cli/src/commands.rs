//! Subcommand bodies. Each returns `Ok(false)` when some items failed but
//! the batch still ran to completion.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use suturemap::config::PipelineConfig;
use suturemap::dataset::{
    read_heatmap_png, read_labels, split_by_surgery, write_heatmap_png, write_labels,
    write_rgb_png, Domain, FoldSplit, LabelRecord, RgbImage,
};
use suturemap::evaluation::{accumulate_frames, aggregate_folds, FoldRow, MatchReport, Metrics, MetricSummary};
use suturemap::heatmap::{quantize, Heatmap};
use suturemap::synth::{summarize_trials, trial, write_trial_rows, DegradationParams, SceneConstraints, TrialRow, TrialSetup};
use suturemap::types::{ImageDims, LandmarkSet, Point2D};
use suturemap::{decode_frame, match_points, render_heatmap};

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    frames: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    file: String,
    surgery: String,
    domain: Domain,
    n_points: usize,
}

/// Frame ids become file names, so they must not escape the directory.
fn file_name_for(id: &str) -> Result<String> {
    if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
        bail!("frame id {id:?} cannot be used as a file name");
    }
    Ok(format!("{id}.png"))
}

pub fn encode(labels: &Path, out_dir: &Path, cfg: &PipelineConfig) -> Result<bool> {
    let records = read_labels(labels)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let spec = cfg.gaussian();
    let names = records
        .iter()
        .map(|r| file_name_for(r.frame_id()))
        .collect::<Result<Vec<_>>>()?;
    records
        .par_iter()
        .zip(&names)
        .try_for_each(|(r, name)| -> Result<()> {
            let h = render_heatmap(&r.landmarks, &spec)?;
            write_heatmap_png(&h, out_dir.join(name))?;
            Ok(())
        })?;
    let manifest = Manifest {
        frames: records
            .iter()
            .zip(names)
            .map(|(r, file)| ManifestEntry {
                id: r.frame_id().to_string(),
                file,
                surgery: r.surgery_id.clone(),
                domain: r.domain,
                n_points: r.landmarks.len(),
            })
            .collect(),
    };
    let path = out_dir.join(MANIFEST);
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    println!("encoded {} frames into {}", records.len(), out_dir.display());
    Ok(true)
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

const GREEN: [u8; 3] = [0, 200, 0];
const RED: [u8; 3] = [230, 0, 0];
const YELLOW: [u8; 3] = [240, 220, 0];
const MAGENTA: [u8; 3] = [220, 0, 220];

fn draw_marker(img: &mut RgbImage, p: Point2D, color: [u8; 3]) {
    let d = img.dims;
    let (cx, cy) = (p.x.round() as i64, p.y.round() as i64);
    for k in -3i64..=3 {
        for (x, y) in [(cx + k, cy), (cx, cy + k)] {
            if x >= 0 && y >= 0 && x < d.width as i64 && y < d.height as i64 {
                let i = d.index(x as usize, y as usize);
                for (plane, c) in img.planes.iter_mut().zip(color) {
                    plane[i] = c;
                }
            }
        }
    }
}

/// Grey heatmap with crosses: predictions magenta, or TP green / FP red /
/// FN yellow when ground truth is known.
fn overlay(h: &Heatmap, pred: &LandmarkSet, gt: Option<&LandmarkSet>, cfg: &PipelineConfig) -> Result<RgbImage> {
    let grey = quantize(h).data;
    let mut img = RgbImage::new(h.dims(), [grey.clone(), grey.clone(), grey])?;
    match gt {
        None => pred.points.iter().for_each(|&p| draw_marker(&mut img, p, MAGENTA)),
        Some(gt) => {
            let r = match_points(pred, gt, &cfg.matching())?;
            let tp: BTreeSet<usize> = r.pairs.iter().map(|p| p.pred_index).collect();
            let found: BTreeSet<usize> = r.pairs.iter().map(|p| p.gt_index).collect();
            for (i, &p) in gt.points.iter().enumerate() {
                if !found.contains(&i) {
                    draw_marker(&mut img, p, YELLOW);
                }
            }
            for (i, &p) in pred.points.iter().enumerate() {
                draw_marker(&mut img, p, if tp.contains(&i) { GREEN } else { RED });
            }
        }
    }
    Ok(img)
}

fn read_manifest(dir: &Path) -> Result<BTreeMap<String, ManifestEntry>> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let m: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(m.frames.into_iter().map(|e| (e.id.clone(), e)).collect())
}

pub fn decode(
    dir: &Path,
    out: &Path,
    gt_path: Option<&Path>,
    overlay_dir: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<bool> {
    let decode_cfg = cfg.decode()?;
    let manifest = read_manifest(dir)?;
    let gt: BTreeMap<String, LandmarkSet> = match gt_path {
        Some(p) => read_labels(p)?
            .into_iter()
            .map(|r| (r.frame_id().to_string(), r.landmarks))
            .collect(),
        None => BTreeMap::new(),
    };
    if let Some(d) = overlay_dir {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let files = png_files(dir)?;
    let results: Vec<Result<LabelRecord>> = files
        .par_iter()
        .map(|path| -> Result<LabelRecord> {
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .with_context(|| format!("{}: file name is not UTF-8", path.display()))?;
            let h = read_heatmap_png(path)?;
            let pred = decode_frame(id, &h, &decode_cfg)?;
            if let Some(d) = overlay_dir {
                let img = overlay(&h, &pred, gt.get(id), cfg)?;
                write_rgb_png(&img, d.join(file_name_for(id)?))?;
            }
            let (surgery, domain) = manifest
                .get(id)
                .map_or(("unknown".to_string(), Domain::Sim), |e| (e.surgery.clone(), e.domain));
            Ok(LabelRecord::new(surgery, domain, pred))
        })
        .collect();

    let mut records = Vec::new();
    let mut failed = 0;
    for (path, r) in files.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e:#}", path.display());
            }
        }
    }
    write_labels(&records, out)?;
    println!("decoded {} of {} heatmaps into {}", records.len(), files.len(), out.display());
    Ok(failed == 0)
}

fn by_id(records: Vec<LabelRecord>) -> BTreeMap<String, LabelRecord> {
    records.into_iter().map(|r| (r.frame_id().to_string(), r)).collect()
}

pub fn evaluate(
    pred_path: &Path,
    gt_path: &Path,
    folds: Option<&Path>,
    csv: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<bool> {
    let pred = by_id(read_labels(pred_path)?);
    let gt = by_id(read_labels(gt_path)?);
    let only_pred: Vec<&String> = pred.keys().filter(|k| !gt.contains_key(*k)).collect();
    let only_gt: Vec<&String> = gt.keys().filter(|k| !pred.contains_key(*k)).collect();
    if !only_pred.is_empty() || !only_gt.is_empty() {
        for id in &only_pred {
            eprintln!("frame {id}: in predictions only");
        }
        for id in &only_gt {
            eprintln!("frame {id}: in ground truth only");
        }
        eprintln!(
            "error: frame ids differ ({} prediction-only, {} ground-truth-only)",
            only_pred.len(),
            only_gt.len()
        );
        return Ok(false);
    }
    if gt.is_empty() {
        bail!("no frames to evaluate");
    }
    let split = folds.map(FoldSplit::read).transpose()?;
    let matching = cfg.matching();
    let mut per_fold: BTreeMap<usize, Vec<MatchReport>> = BTreeMap::new();
    for (id, g) in &gt {
        let fold = match &split {
            Some(s) => s
                .fold_of(&g.surgery_id)
                .with_context(|| format!("frame {id}: surgery {} is not in the fold manifest", g.surgery_id))?,
            None => 0,
        };
        let r = match_points(&pred[id].landmarks, &g.landmarks, &matching)
            .with_context(|| format!("frame {id}"))?;
        per_fold.entry(fold).or_default().push(r);
    }
    let rows: Vec<FoldRow> = per_fold
        .iter()
        .map(|(fold, reports)| FoldRow {
            fold_id: if split.is_some() { format!("f{}", fold + 1) } else { "all".into() },
            metrics: Metrics::from_report(&accumulate_frames(reports)),
        })
        .collect();
    let summary = aggregate_folds(rows)?;
    print!("{summary}");
    if let Some(path) = csv {
        write_summary_csv(&summary, path)?;
    }
    Ok(true)
}

fn write_summary_csv(summary: &MetricSummary, path: &Path) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    summary.write_csv(file)?;
    Ok(())
}

pub fn aggregate(metrics: &Path) -> Result<bool> {
    let file = fs::File::open(metrics).with_context(|| format!("opening {}", metrics.display()))?;
    let rows = MetricSummary::read_fold_rows(file)?;
    print!("{}", aggregate_folds(rows)?);
    Ok(true)
}

pub fn split(labels: &Path, k: usize, seed: u64, out: &Path) -> Result<bool> {
    let records = read_labels(labels)?;
    let split = split_by_surgery(&records, k, seed)?;
    split.write(out)?;
    let counts = split.fold_counts(&records)?;
    print!("{:<12}", "Split");
    counts.iter().for_each(|c| print!(" {:>6}", format!("f{}", c.fold + 1)));
    println!();
    print!("{:<12}", "Train");
    counts.iter().for_each(|c| print!(" {:>6}", c.train));
    println!();
    print!("{:<12}", "Validation");
    counts.iter().for_each(|c| print!(" {:>6}", c.validation));
    println!();
    Ok(true)
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Number of trials; trial i uses seed `--seed + i`.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Results table (comma-separated, one row per trial).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512)]
    width: u32,
    #[arg(long, default_value_t = 288)]
    height: u32,
    #[arg(long, default_value_t = 0)]
    min_points: usize,
    #[arg(long, default_value_t = 15)]
    max_points: usize,
    /// Minimum pairwise landmark distance, px.
    #[arg(long, default_value_t = 14.0)]
    separation: f64,
    /// Minimum landmark distance from the frame edge, px.
    #[arg(long, default_value_t = 6.0)]
    margin: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    blur: f64,
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    #[arg(long, default_value_t = 0)]
    clutter: usize,
}

pub fn synth(a: &SynthArgs, seed: u64, cfg: &PipelineConfig) -> Result<bool> {
    let setup = TrialSetup {
        scene: SceneConstraints {
            dims: ImageDims::new(a.width, a.height)?,
            min_points: a.min_points,
            max_points: a.max_points,
            min_separation: a.separation,
            border_margin: a.margin,
            seed,
        },
        gaussian: cfg.gaussian(),
        degradation: DegradationParams {
            noise_sigma: a.noise,
            blur_sigma: a.blur,
            amplitude_jitter: a.jitter,
            dropout_prob: a.dropout,
            clutter_count: a.clutter,
            seed,
        },
        decode: cfg.decode()?,
        matching: cfg.matching(),
    };
    setup.degradation.validate()?;
    let rows = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let s = setup.seeded(seed.wrapping_add(i));
            let outcome = trial(&s).with_context(|| format!("trial with seed {}", s.scene.seed))?;
            Ok(TrialRow::new(&s, &outcome))
        })
        .collect::<Result<Vec<_>>>()?;
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_trial_rows(&rows, file)?;

    let s = summarize_trials(&rows);
    println!("trials: {}", s.trials);
    let p = s.pooled;
    println!(
        "pooled: precision {:.2}  sensitivity {:.2}  f1 {:.2}",
        p.precision, p.sensitivity, p.f1
    );
    if let Some(spread) = s.spread {
        let (m, d) = (spread.mean, spread.std);
        println!(
            "per trial (μ ± σ over {} scorable): precision {:.2} ± {:.2}  sensitivity {:.2} ± {:.2}  f1 {:.2} ± {:.2}",
            spread.per_fold.len(),
            m.precision,
            d.precision,
            m.sensitivity,
            d.sensitivity,
            m.f1,
            d.f1
        );
    }
    Ok(true)
}
