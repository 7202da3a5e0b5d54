//! Python bindings. Errors surface as `ValueError`, or `OSError` for file
//! access.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use suturemap::dataset::{self, Domain};
use suturemap::decode::{self as dec, Connectivity, DecodeConfig};
use suturemap::evaluation::{self as ev, FoldRow, MatchConfig, Metrics};
use suturemap::heatmap::{self as hm, GaussianSpec, KernelCombine};
use suturemap::synth::{self, DegradationParams, SceneConstraints, TrialSetup};
use suturemap::types::{ImageDims, Point2D};
use suturemap::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Image { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for suturemap::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn connectivity(n: u8) -> PyResult<Connectivity> {
    Connectivity::try_from(n).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A single-channel grid with values in [0, 1], row-major.
#[pyclass(module = "suturemap", frozen)]
struct Heatmap(hm::Heatmap);

#[pymethods]
impl Heatmap {
    #[new]
    fn new(width: u32, height: u32, values: Vec<f64>) -> PyResult<Self> {
        let dims = ImageDims::new(width, height).py()?;
        Ok(Self(hm::Heatmap::from_values(dims, values).py()?))
    }

    #[staticmethod]
    fn zeros(width: u32, height: u32) -> PyResult<Self> {
        Ok(Self(hm::Heatmap::zeros(ImageDims::new(width, height).py()?)))
    }

    /// Reads an 8-bit grayscale PNG.
    #[staticmethod]
    fn from_png(path: &str) -> PyResult<Self> {
        Ok(Self(dataset::read_heatmap_png(path).py()?))
    }

    fn to_png(&self, path: &str) -> PyResult<()> {
        dataset::write_heatmap_png(&self.0, path).py()
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.dims().width
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.dims().height
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    /// Value of the pixel centred at integer `(x, y)`.
    fn get(&self, x: usize, y: usize) -> PyResult<f64> {
        let d = self.0.dims();
        if x >= d.width as usize || y >= d.height as usize {
            return Err(PyValueError::new_err(format!("({x}, {y}) outside {}x{}", d.width, d.height)));
        }
        Ok(self.0.get(x, y))
    }

    fn max_value(&self) -> f64 {
        self.0.max_value()
    }

    /// Pixel values quantized to 0..=255.
    fn quantize(&self) -> Vec<u8> {
        hm::quantize(&self.0).data
    }

    fn __repr__(&self) -> String {
        format!("Heatmap({}x{})", self.width(), self.height())
    }
}

/// Landmarks of one frame; the number of points varies and may be zero.
#[pyclass(module = "suturemap", frozen)]
struct LandmarkSet(suturemap::LandmarkSet);

#[pymethods]
impl LandmarkSet {
    #[new]
    #[pyo3(signature = (width, height, points, frame_id = String::new()))]
    fn new(width: u32, height: u32, points: Vec<(f64, f64)>, frame_id: String) -> PyResult<Self> {
        let dims = ImageDims::new(width, height).py()?;
        let pts = points.into_iter().map(Point2D::from).collect();
        Ok(Self(suturemap::LandmarkSet::new(frame_id, dims, pts).py()?))
    }

    #[getter]
    fn frame_id(&self) -> &str {
        &self.0.frame_id
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.dims.width
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.dims.height
    }

    #[getter]
    fn points(&self) -> Vec<(f64, f64)> {
        self.0.points.iter().map(|p| (p.x, p.y)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("LandmarkSet({:?}, {} points)", self.0.frame_id, self.0.len())
    }
}

/// A labelled frame: surgery, domain ("sim" or "intraop") and landmarks.
#[pyclass(module = "suturemap", frozen)]
struct LabelRecord(dataset::LabelRecord);

#[pymethods]
impl LabelRecord {
    #[new]
    fn new(surgery_id: String, domain: &str, landmarks: PyRef<'_, LandmarkSet>) -> PyResult<Self> {
        let domain = match domain {
            "sim" => Domain::Sim,
            "intraop" => Domain::Intraop,
            other => return Err(PyValueError::new_err(format!("unknown domain {other:?}"))),
        };
        Ok(Self(dataset::LabelRecord::new(surgery_id, domain, landmarks.0.clone())))
    }

    #[getter]
    fn surgery_id(&self) -> &str {
        &self.0.surgery_id
    }

    #[getter]
    fn domain(&self) -> &'static str {
        match self.0.domain {
            Domain::Sim => "sim",
            Domain::Intraop => "intraop",
        }
    }

    #[getter]
    fn landmarks(&self) -> LandmarkSet {
        LandmarkSet(self.0.landmarks.clone())
    }
}

/// Match counts and the accepted prediction/ground-truth pairs.
#[pyclass(module = "suturemap", frozen)]
struct MatchReport(ev::MatchReport);

#[pymethods]
impl MatchReport {
    #[getter]
    fn tp(&self) -> usize {
        self.0.tp
    }

    #[getter]
    fn fp(&self) -> usize {
        self.0.fp
    }

    #[getter(r#fn)]
    fn fn_(&self) -> usize {
        self.0.fn_
    }

    /// `(pred_index, gt_index, distance)` triples.
    #[getter]
    fn pairs(&self) -> Vec<(usize, usize, f64)> {
        self.0
            .pairs
            .iter()
            .map(|p| (p.pred_index, p.gt_index, p.distance))
            .collect()
    }

    #[getter]
    fn precision(&self) -> f64 {
        Metrics::from_report(&self.0).precision
    }

    #[getter]
    fn sensitivity(&self) -> f64 {
        Metrics::from_report(&self.0).sensitivity
    }

    #[getter]
    fn f1(&self) -> f64 {
        Metrics::from_report(&self.0).f1
    }

    fn __repr__(&self) -> String {
        format!("MatchReport(tp={}, fp={}, fn={})", self.0.tp, self.0.fp, self.0.fn_)
    }
}

#[pyfunction]
#[pyo3(signature = (landmarks, sigma = 2.0, amplitude = 1.0, truncation_radius = 3.0, combine = "max"))]
fn render_heatmap(
    landmarks: PyRef<'_, LandmarkSet>,
    sigma: f64,
    amplitude: f64,
    truncation_radius: f64,
    combine: &str,
) -> PyResult<Heatmap> {
    let combine = match combine {
        "max" => KernelCombine::Max,
        "sum" => KernelCombine::Sum,
        other => return Err(PyValueError::new_err(format!("unknown combine {other:?}"))),
    };
    let spec = GaussianSpec {
        sigma,
        amplitude,
        truncation_radius,
        combine,
    };
    Ok(Heatmap(hm::render_heatmap(&landmarks.0, &spec).py()?))
}

#[pyfunction]
#[pyo3(signature = (
    heatmap,
    frame_id = "",
    connectivity = 8,
    opening_iterations = 1,
    cut_area_factor = suturemap::decode::DEFAULT_CUT_AREA_FACTOR,
    min_region_area = 1,
))]
fn decode(
    heatmap: PyRef<'_, Heatmap>,
    frame_id: &str,
    connectivity: u8,
    opening_iterations: u32,
    cut_area_factor: f64,
    min_region_area: usize,
) -> PyResult<LandmarkSet> {
    let cfg = DecodeConfig {
        connectivity: self::connectivity(connectivity)?,
        opening_iterations,
        cut_area_factor,
        min_region_area,
        ..DecodeConfig::default()
    };
    Ok(LandmarkSet(dec::decode_frame(frame_id, &heatmap.0, &cfg).py()?))
}

/// Otsu threshold of 8-bit values; foreground is `value > threshold`.
#[pyfunction]
fn otsu_threshold(values: Vec<u8>) -> u8 {
    let mut hist = [0u64; 256];
    values.iter().for_each(|&v| hist[v as usize] += 1);
    dec::otsu_threshold_histogram(&hist)
}

#[pyfunction]
#[pyo3(signature = (pred, gt, radius = 6.0, strict = true))]
fn match_points(
    pred: PyRef<'_, LandmarkSet>,
    gt: PyRef<'_, LandmarkSet>,
    radius: f64,
    strict: bool,
) -> PyResult<MatchReport> {
    let cfg = MatchConfig { radius, strict };
    Ok(MatchReport(ev::match_points(&pred.0, &gt.0, &cfg).py()?))
}

/// Mean and population std over `(fold_id, precision, sensitivity, f1)` rows.
#[pyfunction]
fn aggregate_folds<'py>(py: Python<'py>, rows: Vec<(String, f64, f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let rows = rows
        .into_iter()
        .map(|(fold_id, precision, sensitivity, f1)| FoldRow {
            fold_id,
            metrics: Metrics {
                precision,
                sensitivity,
                f1,
            },
        })
        .collect();
    let s = ev::aggregate_folds(rows).py()?;
    let out = PyDict::new(py);
    let triple = |m: Metrics| (m.precision, m.sensitivity, m.f1);
    out.set_item("mean", triple(s.mean))?;
    out.set_item("std", triple(s.std))?;
    Ok(out)
}

#[pyfunction]
fn read_labels(path: &str) -> PyResult<Vec<LabelRecord>> {
    Ok(dataset::read_labels(path).py()?.into_iter().map(LabelRecord).collect())
}

#[pyfunction]
fn write_labels(records: Vec<PyRef<'_, LabelRecord>>, path: &str) -> PyResult<()> {
    let records: Vec<_> = records.iter().map(|r| r.0.clone()).collect();
    dataset::write_labels(&records, path).py()
}

#[pyfunction]
#[pyo3(signature = (seed = 0, width = 512, height = 288, min_points = 0, max_points = 15, min_separation = 14.0, border_margin = 6.0))]
fn sample_scene(
    seed: u64,
    width: u32,
    height: u32,
    min_points: usize,
    max_points: usize,
    min_separation: f64,
    border_margin: f64,
) -> PyResult<LandmarkSet> {
    let c = SceneConstraints {
        dims: ImageDims::new(width, height).py()?,
        min_points,
        max_points,
        min_separation,
        border_margin,
        seed,
    };
    Ok(LandmarkSet(synth::sample_scene(&c).py()?))
}

/// One seeded synthetic trial on the default scene, decoder and radius.
#[pyfunction]
#[pyo3(signature = (seed = 0, noise_sigma = 0.0, blur_sigma = 0.0, amplitude_jitter = 0.0, dropout_prob = 0.0, clutter_count = 0))]
fn trial<'py>(
    py: Python<'py>,
    seed: u64,
    noise_sigma: f64,
    blur_sigma: f64,
    amplitude_jitter: f64,
    dropout_prob: f64,
    clutter_count: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let setup = TrialSetup {
        degradation: DegradationParams {
            noise_sigma,
            blur_sigma,
            amplitude_jitter,
            dropout_prob,
            clutter_count,
            seed,
        },
        ..TrialSetup::default()
    };
    let o = synth::trial(&setup.seeded(seed)).py()?;
    let out = PyDict::new(py);
    out.set_item("ground_truth", LandmarkSet(o.ground_truth))?;
    out.set_item("predicted", LandmarkSet(o.predicted))?;
    out.set_item("precision", o.metrics.precision)?;
    out.set_item("sensitivity", o.metrics.sensitivity)?;
    out.set_item("f1", o.metrics.f1)?;
    out.set_item("report", MatchReport(o.report))?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "suturemap")]
fn suturemap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Heatmap>()?;
    m.add_class::<LandmarkSet>()?;
    m.add_class::<LabelRecord>()?;
    m.add_class::<MatchReport>()?;
    m.add_function(wrap_pyfunction!(render_heatmap, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(otsu_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(match_points, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_folds, m)?)?;
    m.add_function(wrap_pyfunction!(read_labels, m)?)?;
    m.add_function(wrap_pyfunction!(write_labels, m)?)?;
    m.add_function(wrap_pyfunction!(sample_scene, m)?)?;
    m.add_function(wrap_pyfunction!(trial, m)?)?;
    Ok(())
}
