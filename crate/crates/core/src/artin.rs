//! Exact triviality test through the Artin action of `B_n` on the free group `F_n`.
//!
//! Free-group letters are nonzero integers: `k` is the generator `x_k` and `-k`
//! its inverse. Braid letters act left to right by substitution:
//!
//! ```text
//! σ_i      : x_i -> x_i x_{i+1} x_i^-1,   x_{i+1} -> x_i
//! σ_i^-1   : x_i -> x_{i+1},              x_{i+1} -> x_{i+1}^-1 x_i x_{i+1}
//! ```
//!
//! and every other generator is fixed. Since the action is faithful, a braid
//! is trivial iff every generator is mapped to itself.

use std::time::{Duration, Instant};

use crate::braid::BraidWord;
use crate::error::{Error, Result};

/// Default cap on the length of an intermediate free word.
pub const DEFAULT_LETTER_LIMIT: usize = 10_000_000;

/// A freely reduced word in the free group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FreeWord(Vec<i32>);

impl FreeWord {
    /// Freely reduces `raw`. Entries must be nonzero with `|x| <= rank`.
    pub fn reduce(raw: &[i32], rank: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(raw.len());
        for (index, &letter) in raw.iter().enumerate() {
            if letter == 0 || letter.unsigned_abs() as usize > rank {
                return Err(Error::BadFreeLetter {
                    index,
                    letter,
                    rank,
                });
            }
            push_reduced(&mut out, letter);
        }
        Ok(Self(out))
    }

    /// The word `x_k` (1-based).
    pub fn generator(k: usize) -> Self {
        Self(vec![k as i32])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reversed and negated; already reduced.
    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|x| -x).collect())
    }
}

#[inline]
fn push_reduced(out: &mut Vec<i32>, letter: i32) {
    if out.last() == Some(&-letter) {
        out.pop();
    } else {
        out.push(letter);
    }
}

/// Appends the image of free letter `x` under braid letter `g` to `out`, reducing as it goes.
#[inline]
fn push_image(out: &mut Vec<i32>, g: i32, x: i32) {
    let i = g.abs();
    let j = x.abs();
    let image: &[i32] = match (g > 0, j - i) {
        (true, 0) => &[i, i + 1, -i],
        (true, 1) => &[i],
        (false, 0) => &[i + 1],
        (false, 1) => &[-(i + 1), i, i + 1],
        _ => {
            push_reduced(out, x);
            return;
        }
    };
    if x > 0 {
        for &y in image {
            push_reduced(out, y);
        }
    } else {
        for &y in image.iter().rev() {
            push_reduced(out, -y);
        }
    }
}

fn check_generator(g: i32, strands: usize) -> Result<()> {
    if g == 0 || g.unsigned_abs() as usize > strands - 1 {
        return Err(Error::BadGenerator {
            generator: g,
            strands,
        });
    }
    Ok(())
}

/// Substitutes braid letter `g` (nonzero, `|g| <= n-1`) into `w`.
pub fn apply_braid_letter(strands: usize, g: i32, w: &FreeWord) -> Result<FreeWord> {
    check_generator(g, strands)?;
    let mut out = Vec::with_capacity(w.len() + 2);
    for &x in &w.0 {
        push_image(&mut out, g, x);
    }
    Ok(FreeWord(out))
}

/// Images of `x_1..x_n` under the automorphism induced by a braid word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidImage {
    images: Vec<FreeWord>,
}

impl BraidImage {
    /// The identity automorphism of `F_n`.
    pub fn identity(strands: usize) -> Self {
        Self {
            images: (1..=strands).map(FreeWord::generator).collect(),
        }
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(k, w)| w.0.len() == 1 && w.0[0] == k as i32 + 1)
    }

    /// Applies the letters of `word` (zeros skipped) to every image.
    pub fn then(&self, word: &BraidWord) -> Self {
        Self {
            images: self
                .images
                .iter()
                .map(|w| act(word.letters(), w.0.clone(), usize::MAX).expect("no letter limit"))
                .collect(),
        }
    }
}

fn act(letters: &[i32], start: Vec<i32>, limit: usize) -> Result<FreeWord> {
    let mut cur = start;
    let mut next = Vec::with_capacity(cur.len() * 3);
    for &g in letters.iter().filter(|&&g| g != 0) {
        next.clear();
        for &x in &cur {
            push_image(&mut next, g, x);
        }
        if next.len() > limit {
            return Err(Error::ResourceLimit { limit });
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(FreeWord(cur))
}

/// Artin image of `b`; zeros act as the identity.
pub fn braid_image(b: &BraidWord) -> BraidImage {
    BraidImage::identity(b.strands()).then(b)
}

/// True iff `b` represents the identity braid.
pub fn is_trivial(b: &BraidWord) -> bool {
    Oracle::unlimited().check(b).expect("no letter limit")
}

/// Result of a timed triviality check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimedCheck {
    pub trivial: bool,
    pub elapsed: Duration,
}

/// [`is_trivial`] plus its monotonic wall-clock duration.
pub fn timed_check(b: &BraidWord) -> TimedCheck {
    let start = Instant::now();
    let trivial = is_trivial(b);
    TimedCheck {
        trivial,
        elapsed: start.elapsed(),
    }
}

/// Triviality checker with a cap on intermediate free-word length.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    letter_limit: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            letter_limit: DEFAULT_LETTER_LIMIT,
        }
    }
}

impl Oracle {
    pub fn with_letter_limit(letter_limit: usize) -> Self {
        Self { letter_limit }
    }

    pub fn unlimited() -> Self {
        Self {
            letter_limit: usize::MAX,
        }
    }

    /// Returns [`Error::ResourceLimit`] instead of an answer when an image outgrows the cap.
    pub fn check(&self, b: &BraidWord) -> Result<bool> {
        // Stops at the first generator whose image is not itself.
        for k in 1..=b.strands() as i32 {
            let image = act(b.letters(), vec![k], self.letter_limit)?;
            if image.0 != [k] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn timed_check(&self, b: &BraidWord) -> Result<TimedCheck> {
        let start = Instant::now();
        let trivial = self.check(b)?;
        Ok(TimedCheck {
            trivial,
            elapsed: start.elapsed(),
        })
    }
}
