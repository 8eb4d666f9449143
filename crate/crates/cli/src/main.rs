use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use untangle_core::agent::Solver;
use untangle_core::artin::{Oracle, DEFAULT_LETTER_LIMIT};
use untangle_core::benchmark::{self, BenchConfig};
use untangle_core::dataset::parse_records;
use untangle_core::scramble::{self, GenParams};
use untangle_core::trainer::{self, TrainConfig};
use untangle_core::{BraidWord, Checkpoint, Dataset, Encoding, EnvConfig};

/// Train and run a braid-untangling policy.
#[derive(Parser)]
#[command(name = "untangle", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print nothing on stdout; the exit status carries the result.
    #[arg(long, global = true)]
    quiet: bool,
    /// Emit one JSON object per output line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a JSONL dataset of scrambled trivial braids.
    Gen(GenArgs),
    /// Train a policy on a dataset.
    Train(TrainArgs),
    /// Greedy untangle rate of a model on a dataset.
    Eval(EvalArgs),
    /// Untangle one word (or every word in a file) with a model.
    Solve(SolveArgs),
    /// Decide triviality with the Artin action.
    Check(CheckArgs),
    /// Compare untangling time against the triviality check.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Slots per word.
    #[arg(long = "len")]
    slots: usize,
    #[arg(long)]
    crossings: usize,
    /// Random braid/commute moves mixed in after the insertions.
    #[arg(long, default_value_t = 20)]
    mix: usize,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = scramble::DEFAULT_RETRIES)]
    retries: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long, default_value_t = 50)]
    max_steps: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    step_reward: f64,
    #[arg(long, default_value_t = 100.0)]
    success_reward: f64,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
}

impl EnvArgs {
    fn config(&self) -> EnvConfig {
        EnvConfig {
            step_reward: self.step_reward,
            success_reward: self.success_reward,
            max_steps: self.max_steps,
            gamma: self.gamma,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 2)]
    episodes: usize,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.99)]
    baseline_decay: f64,
    #[arg(long, default_value_t = 500)]
    eval_every: usize,
    #[arg(long, default_value_t = 500)]
    eval_size: usize,
    /// Add pair-insertion moves to the action space.
    #[arg(long)]
    insertion: bool,
    #[arg(long, value_enum, default_value_t = EncodingArg::Scaled)]
    encoding: EncodingArg,
    #[arg(long)]
    out: PathBuf,
    /// Metrics CSV destination.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EncodingArg {
    Scaled,
    Raw,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Scaled => Encoding::Scaled,
            EncodingArg::Raw => Encoding::Raw,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 50)]
    max_steps: usize,
}

/// A word given inline (`'[1,-1]' --n 2`) or a JSONL file.
#[derive(Args)]
struct WordSource {
    /// JSON integer array, e.g. '[1,-1,0]'.
    #[arg(
        allow_hyphen_values = true,
        required_unless_present = "data",
        conflicts_with = "data"
    )]
    word: Option<String>,
    /// Strand count for an inline word.
    #[arg(long, requires = "word")]
    n: Option<usize>,
    #[arg(long)]
    data: Option<PathBuf>,
}

impl WordSource {
    /// Inline words are as long as written unless `slots` asks for padding.
    fn load(&self, slots: Option<usize>) -> Result<Vec<BraidWord>> {
        if let Some(path) = &self.data {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            return Ok(parse_records(
                BufReader::new(file),
                &path.display().to_string(),
            )?);
        }
        let text = self.word.as_deref().expect("clap requires word or data");
        let Some(n) = self.n else {
            bail!("an inline word needs --n");
        };
        let letters: Vec<i32> =
            serde_json::from_str(text).context("word must be a JSON integer array")?;
        let word = match slots {
            Some(l) if letters.len() <= l => BraidWord::padded(n, l, letters)?,
            Some(l) => bail!("word has {} letters, model holds {l}", letters.len()),
            None => BraidWord::new(n, letters.len(), letters)?,
        };
        Ok(vec![word])
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    source: WordSource,
    #[arg(long, default_value_t = 50)]
    max_steps: usize,
    /// Print every move as `KIND@pos word`.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: WordSource,
    /// Abort once an image word grows past this many letters.
    #[arg(long, default_value_t = DEFAULT_LETTER_LIMIT)]
    letter_limit: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 12, 16, 20])]
    crossings: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 20)]
    mix: usize,
    #[arg(long, default_value_t = 50)]
    max_steps: usize,
    /// Timed runs per braid; the fastest counts.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit statuses: 0 success, 1 negative verdict, 2 usage or contract error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    Yes,
    No,
}

struct Output {
    json: bool,
    quiet: bool,
}

impl Output {
    fn emit(&self, text: impl FnOnce() -> String, value: Value) {
        if self.quiet {
            return;
        }
        if self.json {
            println!("{value}");
        } else {
            println!("{}", text());
        }
    }

    fn progress(&self, text: impl FnOnce() -> String, value: Value) {
        if self.quiet {
            return;
        }
        if self.json {
            println!("{value}");
        } else {
            eprintln!("{}", text());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Output {
        json: cli.json,
        quiet: cli.quiet,
    };
    match run(&cli, &out) {
        Ok(Verdict::Yes) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(1),
        Err(e) => {
            if cli.json {
                eprintln!("{}", json!({ "error": format!("{e:#}") }));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, out: &Output) -> Result<Verdict> {
    match &cli.command {
        Command::Gen(a) => gen(a, cli.seed, out),
        Command::Train(a) => train(a, cli.seed, out),
        Command::Eval(a) => eval(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Check(a) => check(a, out),
        Command::Bench(a) => bench(a, cli.seed, out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn gen(a: &GenArgs, seed: u64, out: &Output) -> Result<Verdict> {
    let params = GenParams {
        retries: a.retries,
        ..GenParams::new(a.n, a.slots, a.crossings, a.mix, seed)
    };
    params.validate()?;
    if a.count == 0 {
        bail!("--count must be at least 1");
    }
    let mut sink = create(&a.out)?;
    let summary = scramble::generate_dataset(a.count, &params, &mut sink)?;
    sink.flush()?;
    if summary.verified_fraction < 1.0 {
        bail!(
            "only {:.4} of generated braids verified trivial",
            summary.verified_fraction
        );
    }
    out.emit(
        || {
            format!(
                "wrote {} braids (n={} L={} C={}) to {}, all verified trivial",
                summary.count,
                a.n,
                a.slots,
                a.crossings,
                a.out.display()
            )
        },
        json!({ "out": a.out, "summary": summary }),
    );
    Ok(Verdict::Yes)
}

fn train(a: &TrainArgs, seed: u64, out: &Output) -> Result<Verdict> {
    let cfg = TrainConfig {
        iterations: a.iters,
        episodes_per_iteration: a.episodes,
        env: a.env.config(),
        lr: a.lr,
        baseline_decay: a.baseline_decay,
        eval_every: a.eval_every,
        eval_set_size: a.eval_size,
        seed,
        insertion: a.insertion,
        encoding: a.encoding.into(),
    };
    cfg.validate()?;
    let data = Dataset::read(&a.data).with_context(|| format!("reading {}", a.data.display()))?;
    let result = trainer::train_with(&cfg, &data, |row| {
        out.progress(|| row.csv_line(), json!({ "metrics": row }));
    })?;
    result.checkpoint.save(&a.out)?;
    if let Some(path) = &a.metrics {
        let mut sink = create(path)?;
        result.metrics.write_csv(&mut sink)?;
        sink.flush()?;
    }
    let last = result
        .metrics
        .last()
        .expect("training always records a final row");
    out.emit(
        || {
            format!(
                "trained {} episodes; held-out untangle rate {:.3}; model saved to {}",
                result.episodes,
                last.untangle_rate,
                a.out.display()
            )
        },
        json!({ "model": a.out, "episodes": result.episodes, "final": last }),
    );
    Ok(Verdict::Yes)
}

fn eval(a: &EvalArgs, out: &Output) -> Result<Verdict> {
    let ck = Checkpoint::load(&a.model)?;
    let data = Dataset::read(&a.data).with_context(|| format!("reading {}", a.data.display()))?;
    let report = trainer::evaluate(&ck, data.words(), a.max_steps)?;
    out.emit(
        || {
            format!(
                "untangle rate {:.4} ({}/{}), mean steps {:.2}, mean return {:.2}",
                report.untangle_rate,
                report.solved(),
                report.outcomes.len(),
                report.mean_steps,
                report.mean_return
            )
        },
        json!({
            "untangle_rate": report.untangle_rate,
            "solved": report.solved(),
            "total": report.outcomes.len(),
            "mean_steps": report.mean_steps,
            "mean_return": report.mean_return,
        }),
    );
    Ok(Verdict::Yes)
}

fn solve(a: &SolveArgs, out: &Output) -> Result<Verdict> {
    let ck = Checkpoint::load(&a.model)?;
    let words = a.source.load(Some(ck.config.slots))?;
    let solver = Solver::new(&ck);
    for w in &words {
        solver.check_fits(w)?;
    }
    let mut all = true;
    for w in &words {
        let r = solver.solve(w, a.max_steps)?;
        if a.trace {
            for (action, after) in &r.moves {
                out.emit(
                    || format!("{action} {after}"),
                    json!({ "move": action.to_string(), "word": after.letters() }),
                );
            }
        }
        let status = if r.solved { "solved" } else { "unsolved" };
        out.emit(
            || format!("{status} in {} steps: {w}", r.steps()),
            json!({ "word": w.letters(), "status": status, "steps": r.steps() }),
        );
        all &= r.solved;
    }
    Ok(if all { Verdict::Yes } else { Verdict::No })
}

fn check(a: &CheckArgs, out: &Output) -> Result<Verdict> {
    let oracle = Oracle::with_letter_limit(a.letter_limit);
    let words = a.source.load(None)?;
    let mut all = true;
    for w in &words {
        let trivial = match oracle.check(w) {
            Ok(t) => t,
            Err(e @ untangle_core::Error::ResourceLimit { .. }) => {
                out.emit(
                    || "resource-limit".into(),
                    json!({ "word": w.letters(), "verdict": "resource-limit" }),
                );
                return Err(e.into());
            }
            Err(e) => return Err(e.into()),
        };
        let verdict = if trivial { "trivial" } else { "nontrivial" };
        let text = if words.len() == 1 {
            verdict.to_string()
        } else {
            format!("{verdict} {w}")
        };
        out.emit(|| text, json!({ "word": w.letters(), "verdict": verdict }));
        all &= trivial;
    }
    Ok(if all { Verdict::Yes } else { Verdict::No })
}

fn bench(a: &BenchArgs, seed: u64, out: &Output) -> Result<Verdict> {
    let ck = Checkpoint::load(&a.model)?;
    if a.crossings.is_empty() {
        bail!("--crossings needs at least one value");
    }
    for &c in &a.crossings {
        GenParams::new(ck.config.strands, ck.config.slots, c, a.mix, seed).validate()?;
    }
    let cfg = BenchConfig {
        crossings: a.crossings.clone(),
        samples: a.samples,
        mix_steps: a.mix,
        max_steps: a.max_steps,
        repeats: a.repeats,
        seed,
    };
    let rows = benchmark::bench_compare(&ck, &cfg)?;
    match &a.out {
        Some(path) => {
            let mut sink = create(path)?;
            benchmark::write_bench_csv(&rows, &mut sink)?;
            sink.flush()?;
        }
        None if !out.quiet && !out.json => {
            benchmark::write_bench_csv(&rows, &mut io::stdout().lock())?;
        }
        None => {}
    }
    if out.json {
        for r in &rows {
            out.emit(String::new, json!({ "bench": r }));
        }
    }
    let cross = benchmark::crossover(&rows);
    let message = match cross {
        Some(c) => format!("network median beats the oracle from {c} crossings"),
        None => "network median never beats the oracle in this range".to_string(),
    };
    if a.out.is_some() || out.json {
        out.emit(|| message, json!({ "crossover": cross }));
    } else if !out.quiet {
        eprintln!("{message}");
    }
    Ok(Verdict::Yes)
}
