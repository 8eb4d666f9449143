//! Running a policy on braid words.

use rand::Rng;

use crate::braid::{BraidWord, Encoding};
use crate::env::{BraidEnv, DoneReason};
use crate::error::{Error, Result};
use crate::moves::{ActionTable, MoveAction};
use crate::policy::{Checkpoint, PolicyNet, SelectMode};

/// One step of a sampled episode.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub features: Vec<f64>,
    pub mask: Vec<bool>,
    pub action: usize,
    pub reward: f64,
}

/// A finished episode; the unit of a policy-gradient update.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    pub steps: Vec<TraceStep>,
    pub done: DoneReason,
}

impl EpisodeTrace {
    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn solved(&self) -> bool {
        self.done == DoneReason::Solved
    }
}

/// Plays one episode from the environment's current state.
pub fn run_episode<R: Rng + ?Sized>(
    net: &PolicyNet,
    env: &mut BraidEnv,
    encoding: Encoding,
    mode: SelectMode,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let mut steps = Vec::new();
    let actions = env.table().len();
    while env.done().is_none() {
        let mask = env.mask().to_vec();
        let features = env
            .state()
            .to_features(&mask, actions, encoding)?
            .into_values();
        let action = net.forward(&features, &mask)?.select(mode, rng);
        let out = env.step(action)?;
        steps.push(TraceStep {
            features,
            mask,
            action,
            reward: out.reward,
        });
    }
    Ok(EpisodeTrace {
        steps,
        done: env.done().expect("loop exits when done"),
    })
}

/// Outcome of a greedy run.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub start: BraidWord,
    pub finish: BraidWord,
    pub moves: Vec<(MoveAction, BraidWord)>,
    pub solved: bool,
    pub dead_end: bool,
}

impl Rollout {
    pub fn steps(&self) -> usize {
        self.moves.len()
    }
}

/// Greedy untangler built from a checkpoint.
pub struct Solver<'a> {
    net: &'a PolicyNet,
    table: ActionTable,
    encoding: Encoding,
}

impl<'a> Solver<'a> {
    pub fn new(checkpoint: &'a Checkpoint) -> Self {
        Self {
            net: &checkpoint.net,
            table: checkpoint.config.table(),
            encoding: checkpoint.config.encoding,
        }
    }

    pub fn from_parts(net: &'a PolicyNet, table: ActionTable, encoding: Encoding) -> Self {
        Self {
            net,
            table,
            encoding,
        }
    }

    pub fn table(&self) -> &ActionTable {
        &self.table
    }

    pub fn check_fits(&self, w: &BraidWord) -> Result<()> {
        if !self.table.fits(w) {
            return Err(Error::Incompatible(format!(
                "word has n={} L={}, model expects n={} L={}",
                w.strands(),
                w.slots(),
                self.table.strands(),
                self.table.slots()
            )));
        }
        Ok(())
    }

    /// Applies the highest-probability legal move until the word is empty,
    /// no move applies, or `max_steps` moves have been made.
    pub fn solve(&self, start: &BraidWord, max_steps: usize) -> Result<Rollout> {
        self.check_fits(start)?;
        let mut word = start.clone();
        let mut mask = vec![false; self.table.len()];
        let mut moves = Vec::new();
        let mut dead_end = false;
        while !word.is_trivial_diagram() && moves.len() < max_steps {
            self.table.mask_into(&word, &mut mask);
            if !mask.contains(&true) {
                dead_end = true;
                break;
            }
            let features = word.to_features(&mask, mask.len(), self.encoding)?;
            let logits = self.net.logits(features.values(), &mask)?;
            let id = crate::policy::argmax_valid(&logits, &mask);
            let action = self.table.action(id)?;
            word = crate::moves::apply(&word, action)?;
            moves.push((action, word.clone()));
        }
        Ok(Rollout {
            start: start.clone(),
            solved: word.is_trivial_diagram(),
            finish: word,
            moves,
            dead_end,
        })
    }

    /// `(solved, steps taken)` without recording the trajectory.
    pub fn solve_steps(&self, start: &BraidWord, max_steps: usize) -> Result<(bool, usize)> {
        self.check_fits(start)?;
        let mut word = start.clone();
        let mut mask = vec![false; self.table.len()];
        let mut steps = 0;
        while !word.is_trivial_diagram() {
            if steps == max_steps {
                return Ok((false, steps));
            }
            self.table.mask_into(&word, &mut mask);
            if !mask.contains(&true) {
                return Ok((false, steps));
            }
            let features = word.to_features(&mask, mask.len(), self.encoding)?;
            let logits = self.net.logits(features.values(), &mask)?;
            let id = crate::policy::argmax_valid(&logits, &mask);
            word = crate::moves::apply(&word, self.table.action(id)?)?;
            steps += 1;
        }
        Ok((true, steps))
    }
}
