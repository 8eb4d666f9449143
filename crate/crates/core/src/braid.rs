//! Fixed-length braid words.
//!
//! A word on `n` strands is a list of `L` signed crossing codes. Letter `+i`
//! is a clockwise crossing of strands `i` and `i+1` counted from the bottom,
//! `-i` the anticlockwise one, and `0` an empty slot. The length never
//! changes: moves only rewrite letters in place.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A braid word with a fixed number of slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    /// Validates and stores `letters` verbatim.
    pub fn new(strands: usize, slots: usize, letters: Vec<i32>) -> Result<Self> {
        if strands < 2 {
            return Err(Error::TooFewStrands(strands));
        }
        if slots == 0 {
            return Err(Error::NoSlots);
        }
        if letters.len() != slots {
            return Err(Error::LengthMismatch {
                expected: slots,
                got: letters.len(),
            });
        }
        let max = (strands - 1) as i32;
        if let Some((index, &letter)) = letters.iter().enumerate().find(|(_, e)| e.abs() > max) {
            return Err(Error::LetterOutOfRange {
                index,
                letter,
                strands,
            });
        }
        Ok(Self { strands, letters })
    }

    /// The word with no crossings.
    pub fn trivial(strands: usize, slots: usize) -> Result<Self> {
        Self::new(strands, slots, vec![0; slots])
    }

    /// Right-pads `letters` with empty slots up to `slots`.
    pub fn padded(strands: usize, slots: usize, mut letters: Vec<i32>) -> Result<Self> {
        if letters.len() > slots {
            return Err(Error::LengthMismatch {
                expected: slots,
                got: letters.len(),
            });
        }
        letters.resize(slots, 0);
        Self::new(strands, slots, letters)
    }

    pub(crate) fn from_parts_unchecked(strands: usize, letters: Vec<i32>) -> Self {
        debug_assert!(letters
            .iter()
            .all(|e| (e.unsigned_abs() as usize) < strands));
        Self { strands, letters }
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn slots(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<i32> {
        self.letters
    }

    /// True iff every slot is empty.
    pub fn is_trivial_diagram(&self) -> bool {
        self.letters.iter().all(|&e| e == 0)
    }

    /// Number of nonzero letters.
    pub fn crossing_count(&self) -> usize {
        self.letters.iter().filter(|&&e| e != 0).count()
    }

    /// Letters followed by the mask, as network input.
    pub fn to_features(
        &self,
        mask: &[bool],
        action_count: usize,
        encoding: Encoding,
    ) -> Result<FeatureVector> {
        if mask.len() != action_count {
            return Err(Error::MaskLength {
                expected: action_count,
                got: mask.len(),
            });
        }
        let scale = match encoding {
            Encoding::Scaled => 1.0 / (self.strands - 1) as f64,
            Encoding::Raw => 1.0,
        };
        let mut values = Vec::with_capacity(self.letters.len() + mask.len());
        values.extend(self.letters.iter().map(|&e| e as f64 * scale));
        values.extend(mask.iter().map(|&m| if m { 1.0 } else { 0.0 }));
        Ok(FeatureVector { values })
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

/// How letters are presented to the network.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Letters divided by `n - 1`, so they lie in `[-1, 1]`.
    #[default]
    Scaled,
    /// Raw signed integers.
    Raw,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Scaled => "scaled",
            Encoding::Raw => "raw",
        })
    }
}

/// Encoded letters (`L` entries) followed by the binary mask (`A` entries).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
