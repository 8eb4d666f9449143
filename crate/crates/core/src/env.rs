//! Episodic untangling environment.
//!
//! Every move costs `step_reward`; reaching the empty diagram adds
//! `success_reward`. Episodes end when solved, at `max_steps`, or when no
//! move applies.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::braid::BraidWord;
use crate::error::{Error, Result};
use crate::moves::ActionTable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub step_reward: f64,
    pub success_reward: f64,
    pub max_steps: usize,
    pub gamma: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            step_reward: -1.0,
            success_reward: 100.0,
            max_steps: 50,
            gamma: 0.99,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidEnvConfig(m));
        if !(self.step_reward < 0.0 && self.success_reward > 0.0) {
            return bad(format!(
                "need step_reward < 0 < success_reward, got {} and {}",
                self.step_reward, self.success_reward
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if self.success_reward <= self.max_steps as f64 * self.step_reward.abs() {
            return bad(format!(
                "success_reward {} must exceed max_steps * |step_reward| = {}",
                self.success_reward,
                self.max_steps as f64 * self.step_reward.abs()
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoneReason {
    Solved,
    StepLimit,
    DeadEnd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub next_state: BraidWord,
    pub reward: f64,
    pub done: Option<DoneReason>,
}

impl StepOutcome {
    pub fn is_done(&self) -> bool {
        self.done.is_some()
    }
}

pub struct BraidEnv {
    config: EnvConfig,
    table: Arc<ActionTable>,
    word: BraidWord,
    steps: usize,
    done: Option<DoneReason>,
    mask: Vec<bool>,
}

impl BraidEnv {
    /// Starts in `start`, which must fit `table`.
    pub fn new(config: EnvConfig, table: Arc<ActionTable>, start: BraidWord) -> Result<Self> {
        config.validate()?;
        let mut env = Self {
            config,
            mask: vec![false; table.len()],
            table,
            word: start.clone(),
            steps: 0,
            done: None,
        };
        env.reset(start)?;
        Ok(env)
    }

    pub fn reset(&mut self, start: BraidWord) -> Result<&BraidWord> {
        if !self.table.fits(&start) {
            return Err(Error::Incompatible(format!(
                "word has n={} L={}, environment expects n={} L={}",
                start.strands(),
                start.slots(),
                self.table.strands(),
                self.table.slots()
            )));
        }
        self.word = start;
        self.steps = 0;
        self.refresh();
        self.done = if self.word.is_trivial_diagram() {
            Some(DoneReason::Solved)
        } else if !self.mask.contains(&true) {
            Some(DoneReason::DeadEnd)
        } else {
            None
        };
        Ok(&self.word)
    }

    fn refresh(&mut self) {
        self.table.mask_into(&self.word, &mut self.mask);
    }

    pub fn state(&self) -> &BraidWord {
        &self.word
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn done(&self) -> Option<DoneReason> {
        self.done
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn table(&self) -> &ActionTable {
        &self.table
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done.is_some() {
            return Err(Error::EpisodeFinished);
        }
        let next = self.table.apply(&self.word, action)?;
        debug_assert_eq!(
            crate::artin::braid_image(&next),
            crate::artin::braid_image(&self.word),
            "move {action} changed the braid"
        );
        self.word = next;
        self.steps += 1;
        self.refresh();

        let mut reward = self.config.step_reward;
        self.done = if self.word.is_trivial_diagram() {
            reward += self.config.success_reward;
            Some(DoneReason::Solved)
        } else if self.steps >= self.config.max_steps {
            Some(DoneReason::StepLimit)
        } else if !self.mask.contains(&true) {
            Some(DoneReason::DeadEnd)
        } else {
            None
        };
        Ok(StepOutcome {
            next_state: self.word.clone(),
            reward,
            done: self.done,
        })
    }
}

/// Discounted returns `G_t = sum_k gamma^(k-t) r_k`, computed right to left.
pub fn returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (g, &r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *g = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moves::{MoveAction, MoveKind};

    fn env_for(letters: &[i32], n: usize) -> BraidEnv {
        let w = BraidWord::new(n, letters.len(), letters.to_vec()).unwrap();
        let table = Arc::new(ActionTable::new(n, letters.len(), false));
        BraidEnv::new(EnvConfig::default(), table, w).unwrap()
    }

    fn id(env: &BraidEnv, kind: MoveKind, position: usize) -> usize {
        env.table().id_of(MoveAction { kind, position }).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(EnvConfig::default().validate().is_ok());
        let c = EnvConfig {
            success_reward: 50.0,
            ..EnvConfig::default()
        };
        assert!(c.validate().is_err());
        let c = EnvConfig {
            gamma: 0.0,
            ..EnvConfig::default()
        };
        assert!(c.validate().is_err());
        let c = EnvConfig {
            step_reward: 0.5,
            ..EnvConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn reset_clears_counters() {
        let mut env = env_for(&[2, 3, 3, -3, -3, 1, 3, -1, -2, -3, -2, 3], 4);
        assert_eq!(env.state().crossing_count(), 12);
        assert_eq!(env.steps(), 0);
        assert!(env.done().is_none());
        let a = id(&env, MoveKind::Cancel, 2);
        env.step(a).unwrap();
        assert_eq!(env.steps(), 1);
        let start = BraidWord::new(4, 12, vec![2, 3, 3, -3, -3, 1, 3, -1, -2, -3, -2, 3]).unwrap();
        env.reset(start.clone()).unwrap();
        assert_eq!(env.steps(), 0);
        assert_eq!(env.state(), &start);
    }

    #[test]
    fn zero_word_is_terminal_at_reset() {
        let mut env = env_for(&[0, 0, 0, 0], 3);
        assert_eq!(env.done(), Some(DoneReason::Solved));
        assert!(matches!(env.step(0), Err(Error::EpisodeFinished)));
    }

    #[test]
    fn solving_step_pays_the_bonus() {
        let mut env = env_for(&[1, -1, 0, 0, 0, 0], 4);
        let out = env.step(id(&env, MoveKind::Cancel, 0)).unwrap();
        assert!(out.next_state.is_trivial_diagram());
        assert_eq!(out.reward, 99.0);
        assert_eq!(out.done, Some(DoneReason::Solved));
        assert!(matches!(env.step(0), Err(Error::EpisodeFinished)));
    }

    #[test]
    fn ordinary_step() {
        let mut env = env_for(&[1, 2, 1, 0, 0, 0], 4);
        let out = env.step(id(&env, MoveKind::BraidSame, 0)).unwrap();
        assert_eq!(out.reward, -1.0);
        assert!(!out.is_done());
    }

    #[test]
    fn step_limit() {
        let mut env = env_for(&[1, 2, 1, 0, 0, 0], 4);
        let braid = id(&env, MoveKind::BraidSame, 0);
        let mut total = 0.0;
        let mut last = None;
        for _ in 0..50 {
            let out = env.step(braid).unwrap();
            total += out.reward;
            last = out.done;
        }
        assert_eq!(last, Some(DoneReason::StepLimit));
        assert_eq!(total, -50.0);
        assert_eq!(env.steps(), 50);
        assert!(env.step(braid).is_err());
    }

    #[test]
    fn inapplicable_action_is_rejected() {
        let mut env = env_for(&[1, 2, 1, 0, 0, 0], 4);
        let cancel = id(&env, MoveKind::Cancel, 0);
        assert!(matches!(env.step(cancel), Err(Error::Inapplicable { .. })));
        assert_eq!(env.steps(), 0);
    }

    #[test]
    fn dead_end_detected() {
        // A lone crossing in a single pair of slots: nothing applies.
        let env = env_for(&[1, 2], 3);
        assert_eq!(env.done(), Some(DoneReason::DeadEnd));
    }

    #[test]
    fn wrong_shape_is_rejected() {
        let mut env = env_for(&[1, -1, 0, 0], 3);
        assert!(env.reset(BraidWord::trivial(4, 4).unwrap()).is_err());
    }

    #[test]
    fn discounted_returns() {
        assert_eq!(returns(&[-1.0, 99.0], 1.0), vec![98.0, 99.0]);
        assert_eq!(returns(&[-1.0, -1.0, -1.0], 1.0), vec![-3.0, -2.0, -1.0]);
        let g = returns(&[-1.0, 99.0], 0.99);
        assert!((g[0] - 97.01).abs() < 1e-12);
        assert_eq!(g[1], 99.0);
    }
}
