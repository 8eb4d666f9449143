//! Random trivial braids built by scrambling the empty word.
//!
//! Crossings enter as inserted `(g, -g)` pairs; after each insertion a batch
//! of commutations and braid relations shuffles the word. Every step
//! preserves the group element, so the output is trivial by construction.
//! The Artin oracle is run over every generated record as an independent
//! check.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`). Record `i` of a dataset
//! uses the generator seeded with the dataset seed on stream `i`, so output
//! is portable and does not depend on how records are scheduled.

use std::io::Write;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artin;
use crate::braid::BraidWord;
use crate::dataset::Record;
use crate::error::{Error, Result};
use crate::moves::{self, ActionTable, MoveAction, MoveKind};

pub const DEFAULT_RETRIES: u32 = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub strands: usize,
    pub slots: usize,
    pub crossings: usize,
    pub mix_steps: usize,
    pub seed: u64,
    pub retries: u32,
}

impl GenParams {
    pub fn new(
        strands: usize,
        slots: usize,
        crossings: usize,
        mix_steps: usize,
        seed: u64,
    ) -> Self {
        Self {
            strands,
            slots,
            crossings,
            mix_steps,
            seed,
            retries: DEFAULT_RETRIES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.strands < 2 {
            return bad(format!("need at least 2 strands, got {}", self.strands));
        }
        if self.slots == 0 {
            return bad("need at least one slot".into());
        }
        if !self.crossings.is_multiple_of(2) {
            return bad(format!("crossings must be even, got {}", self.crossings));
        }
        if self.crossings > self.slots {
            return bad(format!(
                "{} crossings do not fit in {} slots",
                self.crossings, self.slots
            ));
        }
        if self.retries == 0 {
            return bad("retry budget must be positive".into());
        }
        Ok(())
    }

    /// Generator for record `index` of a dataset built from these params.
    pub fn record_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    fn mixes_per_insertion(&self) -> usize {
        let pairs = self.crossings / 2;
        if pairs == 0 {
            0
        } else {
            self.mix_steps.div_ceil(pairs)
        }
    }
}

/// One scrambled trivial braid with exactly `crossings` nonzero letters.
pub fn scramble<R: Rng + ?Sized>(params: &GenParams, rng: &mut R) -> Result<BraidWord> {
    params.validate()?;
    let mixers: Vec<MoveAction> = ActionTable::new(params.strands, params.slots, false)
        .iter()
        .filter(|a| a.kind.is_mixing())
        .collect();
    for _ in 0..params.retries {
        if let Some(word) = attempt(params, &mixers, rng)? {
            return Ok(word);
        }
    }
    Err(Error::GenerationFailed {
        retries: params.retries,
    })
}

fn attempt<R: Rng + ?Sized>(
    params: &GenParams,
    mixers: &[MoveAction],
    rng: &mut R,
) -> Result<Option<BraidWord>> {
    let (n, l) = (params.strands, params.slots);
    let mut word = BraidWord::trivial(n, l)?;
    let mut candidates = Vec::with_capacity(mixers.len());
    for _ in 0..params.crossings / 2 {
        let free: Vec<usize> = (0..l.saturating_sub(1))
            .filter(|&p| word.letters()[p] == 0 && word.letters()[p + 1] == 0)
            .collect();
        let Some(&position) = free.choose(rng) else {
            return Ok(None);
        };
        let g = rng.random_range(1..n as i32) * if rng.random_bool(0.5) { 1 } else { -1 };
        word = moves::apply(
            &word,
            MoveAction {
                kind: MoveKind::Insert(g),
                position,
            },
        )?;
        for _ in 0..params.mixes_per_insertion() {
            candidates.clear();
            candidates.extend(
                mixers
                    .iter()
                    .copied()
                    .filter(|&a| moves::applicable(&word, a)),
            );
            let Some(&a) = candidates.choose(rng) else {
                break;
            };
            word = moves::apply(&word, a)?;
        }
    }
    // CANCEL is never chosen, so the count cannot drop.
    if word.crossing_count() != params.crossings {
        return Ok(None);
    }
    Ok(Some(word))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub count: usize,
    pub params: GenParams,
    pub seed: u64,
    /// Fraction of records the oracle certified trivial; 1.0 unless something is broken.
    pub verified_fraction: f64,
}

/// Generates `count` records in parallel (output is independent of scheduling).
pub fn generate(count: usize, params: &GenParams) -> Result<Vec<BraidWord>> {
    params.validate()?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            scramble(params, &mut params.record_rng(i as u64)).map_err(|e| Error::Record {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Writes `count` JSONL records to `sink` and verifies each with the oracle.
pub fn generate_dataset<W: Write>(
    count: usize,
    params: &GenParams,
    sink: &mut W,
) -> Result<DatasetSummary> {
    if count == 0 {
        return Err(Error::InvalidParams("count must be at least 1".into()));
    }
    let words = generate(count, params)?;
    let verified = words.par_iter().filter(|w| artin::is_trivial(w)).count();
    for w in &words {
        serde_json::to_writer(&mut *sink, &Record::from(w))?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(DatasetSummary {
        count,
        params: params.clone(),
        seed: params.seed,
        verified_fraction: verified as f64 / count as f64,
    })
}

/// Fraction of `words` that repeated left-most cancellation alone reduces to the empty diagram.
pub fn cancel_only_fraction(words: &[BraidWord]) -> f64 {
    if words.is_empty() {
        return 0.0;
    }
    let solved = words.iter().filter(|w| cancel_only_solves(w)).count();
    solved as f64 / words.len() as f64
}

fn cancel_only_solves(w: &BraidWord) -> bool {
    let mut s = w.letters().to_vec();
    loop {
        let Some(p) = (0..s.len().saturating_sub(1)).find(|&p| s[p] != 0 && s[p + 1] == -s[p])
        else {
            return s.iter().all(|&e| e == 0);
        };
        s[p] = 0;
        s[p + 1] = 0;
    }
}
