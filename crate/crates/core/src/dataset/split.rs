//! Surgery-level k-fold splitting: all frames of a surgery share one fold.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::labels::LabelRecord;
use crate::error::{Error, Result};

/// Fold manifest, persisted as `{"k": .., "assignment": {surgery: fold}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub k: usize,
    pub assignment: BTreeMap<String, usize>,
}

/// Frame counts of one fold used as validation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldCounts {
    pub fold: usize,
    pub train: usize,
    pub validation: usize,
}

/// Frames per surgery, in first-appearance order.
fn surgery_sizes(records: &[LabelRecord]) -> Vec<(String, usize)> {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut sizes: Vec<(String, usize)> = Vec::new();
    for r in records {
        match index.get(r.surgery_id.as_str()) {
            Some(&i) => sizes[i].1 += 1,
            None => {
                index.insert(&r.surgery_id, sizes.len());
                sizes.push((r.surgery_id.clone(), 1));
            }
        }
    }
    sizes
}

/// Assigns surgeries to `k` folds, largest surgery first into the fold with
/// the fewest frames so far (lowest index on ties). `seed` only orders
/// surgeries of equal size.
pub fn split_by_surgery(records: &[LabelRecord], k: usize, seed: u64) -> Result<FoldSplit> {
    let mut sizes = surgery_sizes(records);
    if k == 0 || k > sizes.len() {
        return Err(Error::InfeasibleSplit {
            k,
            surgeries: sizes.len(),
        });
    }
    sizes.sort_by(|a, b| a.0.cmp(&b.0));
    sizes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    sizes.sort_by_key(|s| std::cmp::Reverse(s.1));

    let mut load = vec![0usize; k];
    let mut assignment = BTreeMap::new();
    for (surgery, n) in sizes {
        let fold = (0..k).min_by_key(|&f| (load[f], f)).expect("k > 0");
        load[fold] += n;
        assignment.insert(surgery, fold);
    }
    Ok(FoldSplit { k, assignment })
}

impl FoldSplit {
    pub fn fold_of(&self, surgery_id: &str) -> Option<usize> {
        self.assignment.get(surgery_id).copied()
    }

    /// Checks that folds are in range and none is empty.
    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.k];
        for (surgery, &fold) in &self.assignment {
            if fold >= self.k {
                return Err(Error::InvalidParameter(format!(
                    "surgery {surgery} assigned to fold {fold}, but k = {}",
                    self.k
                )));
            }
            used[fold] = true;
        }
        if let Some(empty) = used.iter().position(|u| !u) {
            return Err(Error::InvalidParameter(format!("fold {empty} is empty")));
        }
        Ok(())
    }

    /// Train/validation frame counts per fold. Fails if a record's surgery
    /// has no fold.
    pub fn fold_counts(&self, records: &[LabelRecord]) -> Result<Vec<FoldCounts>> {
        let mut validation = vec![0usize; self.k];
        for r in records {
            let fold = self.fold_of(&r.surgery_id).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "frame {} belongs to unassigned surgery {}",
                    r.frame_id(),
                    r.surgery_id
                ))
            })?;
            validation[fold] += 1;
        }
        let total = records.len();
        Ok(validation
            .into_iter()
            .enumerate()
            .map(|(fold, v)| FoldCounts {
                fold,
                train: total - v,
                validation: v,
            })
            .collect())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let split: FoldSplit = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        split.validate()?;
        Ok(split)
    }
}
