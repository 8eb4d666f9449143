//! REINFORCE training loop, greedy evaluation and parameter sweeps.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{run_episode, Solver};
use crate::artin;
use crate::braid::{BraidWord, Encoding};
use crate::dataset::Dataset;
use crate::env::{returns, BraidEnv, EnvConfig};
use crate::error::{Error, Result};
use crate::policy::{
    policy_gradient, Adam, Checkpoint, ModelConfig, Params, PolicyNet, SelectMode, StepSample,
};
use crate::scramble::{self, GenParams};

pub const METRICS_HEADER: &str = "iteration,untangle_rate,mean_steps,mean_return,elapsed_s";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub episodes_per_iteration: usize,
    pub env: EnvConfig,
    pub lr: f64,
    pub baseline_decay: f64,
    pub eval_every: usize,
    pub eval_set_size: usize,
    pub seed: u64,
    pub insertion: bool,
    pub encoding: Encoding,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            episodes_per_iteration: 2,
            env: EnvConfig::default(),
            lr: 1e-3,
            baseline_decay: 0.99,
            eval_every: 500,
            eval_set_size: 500,
            seed: 0,
            insertion: false,
            encoding: Encoding::Scaled,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidTrainConfig(m.into()));
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if self.episodes_per_iteration == 0 {
            return bad("episodes_per_iteration must be at least 1");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be a positive number");
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return bad("baseline_decay must lie in [0, 1)");
        }
        if self.eval_every == 0 {
            return bad("eval_every must be at least 1");
        }
        if self.eval_set_size == 0 {
            return bad("eval_set_size must be at least 1");
        }
        self.env.validate()
    }

    pub fn model_config(&self, strands: usize, slots: usize) -> ModelConfig {
        ModelConfig {
            strands,
            slots,
            insertion: self.insertion,
            encoding: self.encoding,
        }
    }
}

/// One evaluation row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iteration: usize,
    pub untangle_rate: f64,
    /// Mean over solved braids only; NaN when none was solved.
    pub mean_steps: f64,
    pub mean_return: f64,
    pub elapsed_s: f64,
}

impl MetricsRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.3}",
            self.iteration, self.untangle_rate, self.mean_steps, self.mean_return, self.elapsed_s
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: Vec<MetricsRow>,
}

impl Metrics {
    pub fn last(&self) -> Option<&MetricsRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, sink: &mut W) -> Result<()> {
        writeln!(sink, "{METRICS_HEADER}")?;
        for r in &self.rows {
            writeln!(sink, "{}", r.csv_line())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub metrics: Metrics,
    pub episodes: usize,
}

/// Trains from scratch. See [`train_with`] for progress reporting.
pub fn train(cfg: &TrainConfig, dataset: &Dataset) -> Result<TrainOutcome> {
    train_with(cfg, dataset, |_| {})
}

/// Trains a fresh network on `dataset`, calling `on_row` after each evaluation.
///
/// Each iteration samples `episodes_per_iteration` braids uniformly from the
/// training split, rolls them out with sampled actions, and takes one Adam
/// step on the averaged REINFORCE gradient. The baseline is an exponential
/// moving average of episode returns, seeded with the first iteration's mean.
/// Evaluations run greedily on at most `eval_set_size` held-out braids at
/// iteration 0, every `eval_every` iterations, and after the last iteration.
pub fn train_with(
    cfg: &TrainConfig,
    dataset: &Dataset,
    mut on_row: impl FnMut(&MetricsRow),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let model = cfg.model_config(dataset.strands(), dataset.slots());
    let table = Arc::new(model.table());
    let (train_split, held_out) = dataset.split();
    let eval_set = &held_out[..held_out.len().min(cfg.eval_set_size)];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = PolicyNet::init(model.dims(), rng.random::<u64>())?;
    let mut opt = Adam::new(&net, cfg.lr);
    let mut env = BraidEnv::new(cfg.env.clone(), table.clone(), train_split[0].clone())?;
    let mut grads = Params::zeros(net.dims());
    let mut baseline: Option<f64> = None;
    let mut metrics = Metrics::default();
    let mut episodes = 0;
    let start = Instant::now();

    let mut record = |iteration: usize, net: &PolicyNet, metrics: &mut Metrics| -> Result<()> {
        let report = evaluate_net(net, &model, eval_set, &cfg.env)?;
        let row = MetricsRow {
            iteration,
            untangle_rate: report.untangle_rate,
            mean_steps: report.mean_steps,
            mean_return: report.mean_return,
            elapsed_s: start.elapsed().as_secs_f64(),
        };
        on_row(&row);
        metrics.rows.push(row);
        Ok(())
    };

    for iteration in 0..cfg.iterations {
        if iteration % cfg.eval_every == 0 {
            record(iteration, &net, &mut metrics)?;
        }

        let mut traces = Vec::with_capacity(cfg.episodes_per_iteration);
        for _ in 0..cfg.episodes_per_iteration {
            let start = &train_split[rng.random_range(0..train_split.len())];
            env.reset(start.clone())?;
            traces.push(run_episode(
                &net,
                &mut env,
                model.encoding,
                SelectMode::Sample,
                &mut rng,
            )?);
            episodes += 1;
        }
        let totals: Vec<f64> = traces.iter().map(|t| t.total_reward()).collect();
        let b = *baseline.get_or_insert_with(|| totals.iter().sum::<f64>() / totals.len() as f64);

        grads.iter_mut().for_each(|v| *v = 0.0);
        for trace in &traces {
            let g = returns(&trace.rewards(), cfg.env.gamma);
            let samples: Vec<StepSample<'_>> = trace
                .steps
                .iter()
                .zip(&g)
                .map(|(s, &ret)| StepSample {
                    features: &s.features,
                    mask: &s.mask,
                    action: s.action,
                    ret,
                })
                .collect();
            policy_gradient(&net, &samples, b, &mut grads)?;
        }
        grads.scale(1.0 / traces.len() as f64);
        opt.step(&mut net, &grads).map_err(|e| Error::Diverged {
            iteration,
            reason: e.to_string(),
        })?;
        if !net.params().is_finite() {
            return Err(Error::Diverged {
                iteration,
                reason: "non-finite parameter after update".into(),
            });
        }

        let mut avg = b;
        for r in totals {
            avg = cfg.baseline_decay * avg + (1.0 - cfg.baseline_decay) * r;
        }
        baseline = Some(avg);
    }
    record(cfg.iterations, &net, &mut metrics)?;

    Ok(TrainOutcome {
        checkpoint: Checkpoint::new(model, net)?,
        metrics,
        episodes,
    })
}

/// Result of greedy evaluation on one braid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BraidOutcome {
    pub solved: bool,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub untangle_rate: f64,
    /// Mean over solved braids only; NaN when none was solved.
    pub mean_steps: f64,
    pub mean_return: f64,
    pub outcomes: Vec<BraidOutcome>,
}

impl EvalReport {
    pub fn solved(&self) -> usize {
        self.outcomes.iter().filter(|o| o.solved).count()
    }
}

/// Greedy evaluation with the default reward scheme and the given step budget.
pub fn evaluate(
    checkpoint: &Checkpoint,
    words: &[BraidWord],
    max_steps: usize,
) -> Result<EvalReport> {
    let env = EnvConfig {
        max_steps,
        ..EnvConfig::default()
    };
    evaluate_with(checkpoint, words, &env)
}

/// Greedy evaluation; returns use the rewards in `env` and are undiscounted.
pub fn evaluate_with(
    checkpoint: &Checkpoint,
    words: &[BraidWord],
    env: &EnvConfig,
) -> Result<EvalReport> {
    evaluate_net(&checkpoint.net, &checkpoint.config, words, env)
}

fn evaluate_net(
    net: &PolicyNet,
    model: &ModelConfig,
    words: &[BraidWord],
    env: &EnvConfig,
) -> Result<EvalReport> {
    let solver = Solver::from_parts(net, model.table(), model.encoding);
    let outcomes = words
        .par_iter()
        .map(|w| {
            let (solved, steps) = solver.solve_steps(w, env.max_steps)?;
            if solved && !artin::is_trivial(w) {
                return Err(Error::Inconsistent(format!(
                    "policy emptied {w}, which the oracle rejects"
                )));
            }
            Ok(BraidOutcome { solved, steps })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(outcomes, env))
}

fn summarize(outcomes: Vec<BraidOutcome>, env: &EnvConfig) -> EvalReport {
    let total = outcomes.len().max(1) as f64;
    let solved: Vec<&BraidOutcome> = outcomes.iter().filter(|o| o.solved).collect();
    let mean_steps = if solved.is_empty() {
        f64::NAN
    } else {
        solved.iter().map(|o| o.steps as f64).sum::<f64>() / solved.len() as f64
    };
    let mean_return = outcomes
        .iter()
        .map(|o| env.step_reward * o.steps as f64 + if o.solved { env.success_reward } else { 0.0 })
        .sum::<f64>()
        / total;
    EvalReport {
        untangle_rate: solved.len() as f64 / total,
        mean_steps,
        mean_return,
        outcomes,
    }
}

pub const SWEEP_HEADER: &str = "axis,value,untangle_rate,mean_steps,mean_return";

/// What a sweep varies.
#[derive(Clone, Copy, Debug)]
pub enum SweepAxis<'a> {
    /// Generates `count` braids per crossing count from `family`, trains on
    /// each with the given config, and evaluates on the held-out split.
    Crossings {
        cfg: &'a TrainConfig,
        family: &'a GenParams,
        count: usize,
    },
    /// Evaluates one checkpoint under each step budget.
    MaxSteps {
        checkpoint: &'a Checkpoint,
        words: &'a [BraidWord],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: usize,
    pub untangle_rate: f64,
    pub mean_steps: f64,
    pub mean_return: f64,
}

impl SweepRow {
    fn new(axis: &str, value: usize, r: &EvalReport) -> Self {
        Self {
            axis: axis.into(),
            value,
            untangle_rate: r.untangle_rate,
            mean_steps: r.mean_steps,
            mean_return: r.mean_return,
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.axis, self.value, self.untangle_rate, self.mean_steps, self.mean_return
        )
    }
}

pub fn sweep(axis: SweepAxis<'_>, values: &[usize]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidParams(
            "sweep needs at least one value".into(),
        ));
    }
    match axis {
        SweepAxis::MaxSteps { checkpoint, words } => values
            .iter()
            .map(|&m| {
                Ok(SweepRow::new(
                    "max_steps",
                    m,
                    &evaluate(checkpoint, words, m)?,
                ))
            })
            .collect(),
        SweepAxis::Crossings { cfg, family, count } => values
            .iter()
            .map(|&c| {
                let params = GenParams {
                    crossings: c,
                    ..family.clone()
                };
                let data = Dataset::new(scramble::generate(count, &params)?)?;
                let out = train(cfg, &data)?;
                let (_, held_out) = data.split();
                let report = evaluate_with(&out.checkpoint, held_out, &cfg.env)?;
                Ok(SweepRow::new("crossings", c, &report))
            })
            .collect(),
    }
}
