//! Variable-count landmark detection tooling without the network: render
//! landmark sets into one-channel Gaussian heatmaps, decode heatmaps back
//! into points, and score predictions by radius-thresholded matching.
//!
//! Decoding runs, in order:
//!
//! 1. **Otsu** threshold on the 8-bit histogram.
//! 2. **Opening** with a small structuring element to drop speckle and bridges.
//! 3. **Connected components** with area, bounding box and centroid.
//! 4. **Cutting** of regions much larger than the frame's mean region.
//! 5. **Centroids** of the final regions become the predicted landmarks.

pub mod config;
pub mod dataset;
pub mod decode;
pub mod error;
pub mod evaluation;
pub mod heatmap;
pub mod synth;
pub mod types;

pub use decode::{decode, decode_frame, DecodeConfig};
pub use error::{Error, Result};
pub use evaluation::{match_points, MatchConfig, MatchReport, Metrics, MetricSummary};
pub use heatmap::{render_heatmap, GaussianSpec, Heatmap};
pub use types::{ImageDims, LandmarkSet, Point2D};
