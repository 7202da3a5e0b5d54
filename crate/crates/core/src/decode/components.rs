//! Connected-component labelling with a two-pass union-find scan.

use std::convert::TryFrom;

use serde::{Deserialize, Serialize};

use super::mask::BinaryMask;
use crate::types::{ImageDims, Point2D};

/// Pixel adjacency used when grouping foreground pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_x: u32,
    pub min_y: u32,
    pub max_x: u32,
    pub max_y: u32,
}

impl BoundingBox {
    pub fn width(&self) -> u32 {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> u32 {
        self.max_y - self.min_y + 1
    }

    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= self.min_x as f64
            && p.x <= self.max_x as f64
            && p.y >= self.min_y as f64
            && p.y <= self.max_y as f64
    }
}

/// One connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// 1-based, in row-major order of each region's first pixel.
    pub label: u32,
    pub pixel_count: usize,
    pub bbox: BoundingBox,
    /// Mean of member pixel coordinates.
    pub centroid: Point2D,
}

/// Per-pixel labels (0 = background) together with region statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    pub dims: ImageDims,
    pub labels: Vec<u32>,
    pub regions: Vec<Region>,
}

impl LabelMap {
    #[inline]
    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[self.dims.index(x, y)]
    }

    pub fn region(&self, label: u32) -> Option<&Region> {
        label
            .checked_sub(1)
            .and_then(|i| self.regions.get(i as usize))
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // Slot 0 is reserved for background.
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Labels all foreground components of `m`.
pub fn label_map(m: &BinaryMask, connectivity: Connectivity) -> LabelMap {
    let dims = m.dims();
    let (w, h) = (dims.width as usize, dims.height as usize);
    let mut provisional = vec![0u32; dims.len()];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            let mut label = 0u32;
            let consider = |nx: usize, ny: usize, label: &mut u32, sets: &mut DisjointSet| {
                let n = provisional[ny * w + nx];
                if n != 0 {
                    *label = if *label == 0 { n } else { sets.union(*label, n) };
                }
            };
            if x > 0 {
                consider(x - 1, y, &mut label, &mut sets);
            }
            if y > 0 {
                consider(x, y - 1, &mut label, &mut sets);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        consider(x - 1, y - 1, &mut label, &mut sets);
                    }
                    if x + 1 < w {
                        consider(x + 1, y - 1, &mut label, &mut sets);
                    }
                }
            }
            if label == 0 {
                label = sets.make();
            }
            provisional[y * w + x] = label;
        }
    }

    // Second pass: resolve roots, number them in order of first appearance.
    let mut final_of_root = vec![0u32; sets.parent.len()];
    let mut labels = vec![0u32; dims.len()];
    let mut acc: Vec<Accum> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = provisional[y * w + x];
            if p == 0 {
                continue;
            }
            let root = sets.find(p) as usize;
            if final_of_root[root] == 0 {
                acc.push(Accum::new(x as u32, y as u32));
                final_of_root[root] = acc.len() as u32;
            }
            let label = final_of_root[root];
            labels[y * w + x] = label;
            acc[label as usize - 1].add(x as u32, y as u32);
        }
    }

    let regions = acc
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.finish(i as u32 + 1))
        .collect();
    LabelMap {
        dims,
        labels,
        regions,
    }
}

/// Region statistics of every foreground component.
pub fn label_components(m: &BinaryMask, connectivity: Connectivity) -> Vec<Region> {
    label_map(m, connectivity).regions
}

struct Accum {
    count: usize,
    sum_x: u64,
    sum_y: u64,
    bbox: BoundingBox,
}

impl Accum {
    fn new(x: u32, y: u32) -> Self {
        Self {
            count: 0,
            sum_x: 0,
            sum_y: 0,
            bbox: BoundingBox {
                min_x: x,
                min_y: y,
                max_x: x,
                max_y: y,
            },
        }
    }

    fn add(&mut self, x: u32, y: u32) {
        self.count += 1;
        self.sum_x += x as u64;
        self.sum_y += y as u64;
        self.bbox.min_x = self.bbox.min_x.min(x);
        self.bbox.min_y = self.bbox.min_y.min(y);
        self.bbox.max_x = self.bbox.max_x.max(x);
        self.bbox.max_y = self.bbox.max_y.max(y);
    }

    fn finish(self, label: u32) -> Region {
        let n = self.count as f64;
        Region {
            label,
            pixel_count: self.count,
            bbox: self.bbox,
            centroid: Point2D::new(self.sum_x as f64 / n, self.sum_y as f64 / n),
        }
    }
}
