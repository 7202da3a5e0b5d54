//! Flat key/value pipeline configuration (TOML). Every key is optional;
//! unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::augment::AugmentToggles;
use crate::decode::{Connectivity, CutOrientation, DecodeConfig, ElementShape, StructuringElement};
use crate::error::{Error, Result};
use crate::evaluation::MatchConfig;
use crate::heatmap::{GaussianSpec, KernelCombine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sigma: f64,
    pub amplitude: f64,
    pub truncation_radius: f64,
    pub kernel_combine: KernelCombine,

    pub opening_shape: ElementShape,
    pub opening_size: u32,
    pub opening_iterations: u32,
    pub connectivity: Connectivity,
    pub cut_area_factor: f64,
    pub cut_orientation: CutOrientation,
    pub min_region_area: usize,

    pub radius: f64,
    pub strict: bool,

    pub augment_flips: bool,
    pub augment_rotation_deg: f64,
    pub augment_photometric: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let g = GaussianSpec::default();
        let d = DecodeConfig::default();
        let m = MatchConfig::default();
        let a = AugmentToggles::default();
        Self {
            sigma: g.sigma,
            amplitude: g.amplitude,
            truncation_radius: g.truncation_radius,
            kernel_combine: g.combine,
            opening_shape: ElementShape::Square,
            opening_size: 3,
            opening_iterations: d.opening_iterations,
            connectivity: d.connectivity,
            cut_area_factor: d.cut_area_factor,
            cut_orientation: d.cut_orientation,
            min_region_area: d.min_region_area,
            radius: m.radius,
            strict: m.strict,
            augment_flips: a.flips,
            augment_rotation_deg: a.rotation_max_deg,
            augment_photometric: a.photometric,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.gaussian().validate()?;
        self.decode()?.validate()?;
        self.matching().validate()?;
        if !(0.0..=crate::dataset::augment::MAX_ROTATION_DEG).contains(&self.augment_rotation_deg) {
            return Err(Error::Config(format!(
                "augment_rotation_deg must be within [0, 40], got {}",
                self.augment_rotation_deg
            )));
        }
        Ok(())
    }

    pub fn gaussian(&self) -> GaussianSpec {
        GaussianSpec {
            sigma: self.sigma,
            amplitude: self.amplitude,
            truncation_radius: self.truncation_radius,
            combine: self.kernel_combine,
        }
    }

    pub fn decode(&self) -> Result<DecodeConfig> {
        Ok(DecodeConfig {
            opening_element: StructuringElement::shaped(self.opening_shape, self.opening_size)?,
            opening_iterations: self.opening_iterations,
            connectivity: self.connectivity,
            cut_area_factor: self.cut_area_factor,
            cut_orientation: self.cut_orientation,
            min_region_area: self.min_region_area,
        })
    }

    pub fn matching(&self) -> MatchConfig {
        MatchConfig {
            radius: self.radius,
            strict: self.strict,
        }
    }

    pub fn augment_toggles(&self) -> AugmentToggles {
        AugmentToggles {
            flips: self.augment_flips,
            rotation_max_deg: self.augment_rotation_deg,
            photometric: self.augment_photometric,
        }
    }

    /// The effective configuration as a commented TOML document that
    /// [`PipelineConfig::from_toml_str`] reads back unchanged.
    pub fn to_commented_toml(&self) -> String {
        let value = toml::Value::try_from(self).expect("config serializes");
        let table = value.as_table().expect("config is a table");
        let mut out = String::from("# Effective pipeline configuration.\n");
        for (section, keys) in SECTIONS {
            out.push_str(&format!("\n# --- {section} ---\n"));
            for (key, help) in *keys {
                out.push_str(&format!("# {help}\n{key} = {}\n", table[*key]));
            }
        }
        out
    }
}

type Section = (&'static str, &'static [(&'static str, &'static str)]);

const SECTIONS: &[Section] = &[
    (
        "heatmap encoding",
        &[
            ("sigma", "Gaussian kernel standard deviation, px"),
            ("amplitude", "kernel peak value, (0, 1]"),
            ("truncation_radius", "kernel support radius in multiples of sigma"),
            ("kernel_combine", "overlapping kernels: \"max\" or \"sum\" (clamped)"),
        ],
    ),
    (
        "decoding",
        &[
            ("opening_shape", "structuring element: \"square\", \"cross\" or \"disk\""),
            ("opening_size", "structuring element width, odd"),
            ("opening_iterations", "erosions, then as many dilations"),
            ("connectivity", "pixel adjacency for components: 4 or 8"),
            ("cut_area_factor", "cut regions larger than this times the mean region area"),
            ("cut_orientation", "\"across-long-axis\" or \"along-long-axis\""),
            ("min_region_area", "drop regions smaller than this (px²) before cutting"),
        ],
    ),
    (
        "evaluation",
        &[
            ("radius", "match radius, px"),
            ("strict", "true: distance < radius; false: distance <= radius"),
        ],
    ),
    (
        "augmentation",
        &[
            ("augment_flips", "random horizontal/vertical flips"),
            ("augment_rotation_deg", "maximum rotation magnitude, degrees (<= 40)"),
            ("augment_photometric", "random brightness/contrast jitter"),
        ],
    ),
];
