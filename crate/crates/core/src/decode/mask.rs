use crate::error::{Error, Result};
use crate::types::ImageDims;

/// Row-major foreground/background grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    dims: ImageDims,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(dims: ImageDims) -> Self {
        Self {
            dims,
            bits: vec![false; dims.len()],
        }
    }

    pub fn full(dims: ImageDims) -> Self {
        Self {
            dims,
            bits: vec![true; dims.len()],
        }
    }

    pub fn from_bits(dims: ImageDims, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims.len() {
            return Err(Error::InvalidParameter(format!(
                "mask has {} cells, expected {}",
                bits.len(),
                dims.len()
            )));
        }
        Ok(Self { dims, bits })
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[self.dims.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        let i = self.dims.index(x, y);
        self.bits[i] = value;
    }

    /// Value at signed coordinates, `outside` for positions beyond the frame.
    #[inline]
    pub fn get_or(&self, x: i64, y: i64, outside: bool) -> bool {
        if x < 0 || y < 0 || x >= self.dims.width as i64 || y >= self.dims.height as i64 {
            outside
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            dims: self.dims,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// True when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims == other.dims && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }
}
