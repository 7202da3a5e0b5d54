//! Label files, heatmap images, fold splits and augmentation.

pub mod augment;
pub mod labels;
pub mod png;
pub mod split;

pub use augment::{
    augment, rotate_point, sample_augment_params, sample_augment_params_with, AugmentParams,
    AugmentToggles, Augmented, RgbImage,
};
pub use labels::{
    read_label_document, read_labels, write_label_document, write_labels, Domain, LabelDocument,
    LabelRecord,
};
pub use png::{read_heatmap_png, write_heatmap_png, write_rgb_png};
pub use split::{split_by_surgery, FoldCounts, FoldSplit};
