//! Reidemeister-type moves on fixed-length braid words.
//!
//! Every move rewrites a window of two or three consecutive slots without
//! changing the braid it represents. The action grid is a rectangle of
//! `kinds x slots`; `id = kind_index * slots + position`. Positions whose
//! window would run past the end exist in the grid and are always masked.

use std::fmt;

use crate::braid::BraidWord;
use crate::error::{Error, Result};

/// Bumped whenever the kind order below changes; part of the checkpoint digest.
pub const KIND_ORDER_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    /// `(a, -a) -> (0, 0)`.
    Cancel,
    /// Swap two letters that commute: far generators, or a letter and an empty slot.
    Commute,
    /// `(a, b, a) -> (b, a, b)` for adjacent generators of equal sign.
    BraidSame,
    /// `(a, b, -a) -> (-b, a, b)`.
    BraidConjL,
    /// `(-a, b, a) -> (b, a, -b)`.
    BraidConjR,
    /// `(0, 0) -> (g, -g)`.
    Insert(i32),
}

impl MoveKind {
    /// Kinds in grid order. Insertions, when enabled, follow as `+1, -1, +2, -2, ...`.
    pub fn catalogue(strands: usize, insertion: bool) -> Vec<MoveKind> {
        let mut kinds = vec![
            MoveKind::Cancel,
            MoveKind::Commute,
            MoveKind::BraidSame,
            MoveKind::BraidConjL,
            MoveKind::BraidConjR,
        ];
        if insertion {
            for g in 1..strands as i32 {
                kinds.push(MoveKind::Insert(g));
                kinds.push(MoveKind::Insert(-g));
            }
        }
        kinds
    }

    pub fn window(self) -> usize {
        match self {
            MoveKind::Cancel | MoveKind::Commute | MoveKind::Insert(_) => 2,
            MoveKind::BraidSame | MoveKind::BraidConjL | MoveKind::BraidConjR => 3,
        }
    }

    pub fn is_mixing(self) -> bool {
        matches!(
            self,
            MoveKind::Commute | MoveKind::BraidSame | MoveKind::BraidConjL | MoveKind::BraidConjR
        )
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveKind::Cancel => f.write_str("CANCEL"),
            MoveKind::Commute => f.write_str("COMMUTE"),
            MoveKind::BraidSame => f.write_str("BRAID_SAME"),
            MoveKind::BraidConjL => f.write_str("BRAID_CONJ_L"),
            MoveKind::BraidConjR => f.write_str("BRAID_CONJ_R"),
            MoveKind::Insert(g) => write!(f, "INSERT({g:+})"),
        }
    }
}

/// A move kind anchored at the leftmost slot of its window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MoveAction {
    pub kind: MoveKind,
    pub position: usize,
}

impl fmt::Display for MoveAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind, self.position)
    }
}

fn adjacent_same_sign(a: i32, b: i32) -> bool {
    a != 0 && b != 0 && a.signum() == b.signum() && (a.abs() - b.abs()).abs() == 1
}

/// True iff `action` matches `w` at its position. Windows past the end never match.
pub fn applicable(w: &BraidWord, action: MoveAction) -> bool {
    let p = action.position;
    let s = w.letters();
    if p + action.kind.window() > s.len() {
        return false;
    }
    match action.kind {
        MoveKind::Cancel => s[p] != 0 && s[p + 1] == -s[p],
        MoveKind::Commute => {
            let (a, b) = (s[p], s[p + 1]);
            a != b && (a == 0 || b == 0 || (a.abs() - b.abs()).abs() >= 2)
        }
        MoveKind::BraidSame => s[p] == s[p + 2] && adjacent_same_sign(s[p], s[p + 1]),
        MoveKind::BraidConjL => s[p + 2] == -s[p] && adjacent_same_sign(s[p], s[p + 1]),
        MoveKind::BraidConjR => s[p] == -s[p + 2] && adjacent_same_sign(s[p + 2], s[p + 1]),
        MoveKind::Insert(g) => {
            g != 0 && (g.unsigned_abs() as usize) < w.strands() && s[p] == 0 && s[p + 1] == 0
        }
    }
}

/// Applies `action`, returning a fresh word of the same length.
pub fn apply(w: &BraidWord, action: MoveAction) -> Result<BraidWord> {
    if !applicable(w, action) {
        return Err(Error::Inapplicable {
            action: action.to_string(),
            word: w.letters().to_vec(),
        });
    }
    let p = action.position;
    let mut s = w.letters().to_vec();
    match action.kind {
        MoveKind::Cancel => {
            s[p] = 0;
            s[p + 1] = 0;
        }
        MoveKind::Commute => s.swap(p, p + 1),
        MoveKind::BraidSame => {
            let (a, b) = (s[p], s[p + 1]);
            s[p..p + 3].copy_from_slice(&[b, a, b]);
        }
        MoveKind::BraidConjL => {
            let (a, b) = (s[p], s[p + 1]);
            s[p..p + 3].copy_from_slice(&[-b, a, b]);
        }
        MoveKind::BraidConjR => {
            let (a, b) = (s[p + 2], s[p + 1]);
            s[p..p + 3].copy_from_slice(&[b, a, -b]);
        }
        MoveKind::Insert(g) => {
            s[p] = g;
            s[p + 1] = -g;
        }
    }
    Ok(BraidWord::from_parts_unchecked(w.strands(), s))
}

/// The flat action grid for a given word shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionTable {
    strands: usize,
    slots: usize,
    insertion: bool,
    kinds: Vec<MoveKind>,
}

impl ActionTable {
    pub fn new(strands: usize, slots: usize, insertion: bool) -> Self {
        Self {
            strands,
            slots,
            insertion,
            kinds: MoveKind::catalogue(strands, insertion),
        }
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn insertion(&self) -> bool {
        self.insertion
    }

    pub fn kinds(&self) -> &[MoveKind] {
        &self.kinds
    }

    /// Grid size `A = kinds * slots`.
    pub fn len(&self) -> usize {
        self.kinds.len() * self.slots
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn action(&self, id: usize) -> Result<MoveAction> {
        if id >= self.len() {
            return Err(Error::UnknownAction {
                id,
                size: self.len(),
            });
        }
        Ok(MoveAction {
            kind: self.kinds[id / self.slots],
            position: id % self.slots,
        })
    }

    pub fn id_of(&self, action: MoveAction) -> Option<usize> {
        let k = self.kinds.iter().position(|&k| k == action.kind)?;
        (action.position < self.slots).then_some(k * self.slots + action.position)
    }

    pub fn iter(&self) -> impl Iterator<Item = MoveAction> + '_ {
        self.kinds.iter().flat_map(move |&kind| {
            (0..self.slots).map(move |position| MoveAction { kind, position })
        })
    }

    pub fn applicable(&self, w: &BraidWord, id: usize) -> Result<bool> {
        Ok(applicable(w, self.action(id)?))
    }

    pub fn apply(&self, w: &BraidWord, id: usize) -> Result<BraidWord> {
        apply(w, self.action(id)?)
    }

    /// Applicability of every action, in grid order.
    pub fn mask(&self, w: &BraidWord) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        self.mask_into(w, &mut mask);
        mask
    }

    /// Like [`ActionTable::mask`], reusing `out`.
    pub fn mask_into(&self, w: &BraidWord, out: &mut [bool]) {
        let s = w.letters();
        let l = self.slots;
        debug_assert_eq!(s.len(), l);
        out.fill(false);
        for (k, &kind) in self.kinds.iter().enumerate() {
            let w_len = kind.window();
            if w_len > l {
                continue;
            }
            for p in 0..=l - w_len {
                out[k * l + p] = applicable(w, MoveAction { kind, position: p });
            }
        }
    }

    /// True when `w` has the shape this grid was built for.
    pub fn fits(&self, w: &BraidWord) -> bool {
        w.strands() == self.strands && w.slots() == self.slots
    }
}
