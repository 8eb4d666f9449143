//! Timing comparison between greedy untangling and the oracle, and exact
//! shortest-solution search for small words.

use std::collections::{HashSet, VecDeque};
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::Solver;
use crate::artin;
use crate::braid::BraidWord;
use crate::error::{Error, Result};
use crate::moves::ActionTable;
use crate::policy::Checkpoint;
use crate::scramble::{self, GenParams};

pub const BENCH_HEADER: &str =
    "crossings,samples,nn_mean_us,nn_median_us,oracle_mean_us,oracle_median_us,nn_solve_rate";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub crossings: Vec<usize>,
    pub samples: usize,
    pub mix_steps: usize,
    pub max_steps: usize,
    /// Each braid is timed this many times and the fastest run kept.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            crossings: vec![8, 12, 16, 20],
            samples: 100,
            mix_steps: 20,
            max_steps: 50,
            repeats: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub crossings: usize,
    pub samples: usize,
    /// NN timings cover solved instances only; NaN when none was solved.
    pub nn_mean_us: f64,
    pub nn_median_us: f64,
    pub oracle_mean_us: f64,
    pub oracle_median_us: f64,
    pub nn_solve_rate: f64,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:.3},{:.3},{:.3},{:.3},{}",
            self.crossings,
            self.samples,
            self.nn_mean_us,
            self.nn_median_us,
            self.oracle_mean_us,
            self.oracle_median_us,
            self.nn_solve_rate
        )
    }
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], sink: &mut W) -> Result<()> {
    writeln!(sink, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(sink, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Smallest crossing count at which the network's median time beats the oracle's.
pub fn crossover(rows: &[BenchRow]) -> Option<usize> {
    rows.iter()
        .find(|r| r.nn_median_us < r.oracle_median_us)
        .map(|r| r.crossings)
}

/// Braids used for crossing count `c`; the seed depends on `c` so rows are independent.
pub fn bench_words(
    checkpoint: &Checkpoint,
    cfg: &BenchConfig,
    crossings: usize,
) -> Result<Vec<BraidWord>> {
    let params = GenParams::new(
        checkpoint.config.strands,
        checkpoint.config.slots,
        crossings,
        cfg.mix_steps,
        cfg.seed ^ (crossings as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    scramble::generate(cfg.samples, &params)
}

/// One row per requested crossing count. Generation is untimed; both timed
/// sections run on the calling thread. NN time includes mask computation,
/// feature encoding, the forward pass and applying the chosen move. Each
/// braid contributes its fastest of `repeats` runs to keep scheduler noise
/// out of the medians.
pub fn bench_compare(checkpoint: &Checkpoint, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.samples == 0 || cfg.repeats == 0 {
        return Err(Error::InvalidParams(
            "samples and repeats must be at least 1".into(),
        ));
    }
    let solver = Solver::new(checkpoint);
    let mut rows = Vec::with_capacity(cfg.crossings.len());
    for &c in &cfg.crossings {
        let words = bench_words(checkpoint, cfg, c)?;
        let mut nn = Vec::new();
        let mut oracle = Vec::with_capacity(words.len());
        for w in &words {
            let mut solved = false;
            let mut nn_best = Duration::MAX;
            let mut oracle_best = Duration::MAX;
            for _ in 0..cfg.repeats {
                let t = Instant::now();
                solved = solver.solve_steps(w, cfg.max_steps)?.0;
                nn_best = nn_best.min(t.elapsed());
                let check = artin::timed_check(w);
                if !check.trivial {
                    return Err(Error::Inconsistent(format!(
                        "generated braid {w} is not trivial"
                    )));
                }
                oracle_best = oracle_best.min(check.elapsed);
            }
            if solved {
                nn.push(nn_best);
            }
            oracle.push(oracle_best);
        }
        let (nn_mean_us, nn_median_us) = mean_median_us(&mut nn);
        let (oracle_mean_us, oracle_median_us) = mean_median_us(&mut oracle);
        rows.push(BenchRow {
            crossings: c,
            samples: words.len(),
            nn_mean_us,
            nn_median_us,
            oracle_mean_us,
            oracle_median_us,
            nn_solve_rate: nn.len() as f64 / words.len() as f64,
        });
    }
    Ok(rows)
}

fn mean_median_us(times: &mut [Duration]) -> (f64, f64) {
    if times.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    times.sort_unstable();
    let us = |d: Duration| d.as_secs_f64() * 1e6;
    let mean = times.iter().map(|&d| us(d)).sum::<f64>() / times.len() as f64;
    let mid = times.len() / 2;
    let median = if times.len().is_multiple_of(2) {
        (us(times[mid - 1]) + us(times[mid])) / 2.0
    } else {
        us(times[mid])
    };
    (mean, median)
}

/// Fewest moves (default move set) taking `w` to the empty diagram, or `None`
/// if more than `depth_cap` are needed.
pub fn bfs_optimal(w: &BraidWord, depth_cap: usize) -> Option<usize> {
    if w.is_trivial_diagram() {
        return Some(0);
    }
    let table = ActionTable::new(w.strands(), w.slots(), false);
    let mut seen = HashSet::from([w.clone()]);
    let mut queue = VecDeque::from([(w.clone(), 0usize)]);
    let mut mask = vec![false; table.len()];
    while let Some((word, depth)) = queue.pop_front() {
        if depth == depth_cap {
            continue;
        }
        table.mask_into(&word, &mut mask);
        for id in (0..table.len()).filter(|&id| mask[id]) {
            let next = table.apply(&word, id).expect("masked action applies");
            if next.is_trivial_diagram() {
                return Some(depth + 1);
            }
            if seen.insert(next.clone()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub nn_steps: Option<usize>,
    pub optimal_steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    /// Mean of `nn_steps - optimal_steps` over braids both solved; NaN if none.
    pub mean_gap: f64,
}

impl GapReport {
    /// Rows where the network beat the exact search, which would mean a bug.
    pub fn violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| match (r.nn_steps, r.optimal_steps) {
                (Some(nn), Some(opt)) => nn < opt,
                (Some(_), None) => true,
                _ => false,
            })
            .count()
    }
}

/// Compares greedy step counts against [`bfs_optimal`]. `depth_cap` should be
/// at least `max_steps` so that every greedy solution is inside the search.
pub fn optimality_gap(
    checkpoint: &Checkpoint,
    words: &[BraidWord],
    max_steps: usize,
    depth_cap: usize,
) -> Result<GapReport> {
    let solver = Solver::new(checkpoint);
    let rows = words
        .par_iter()
        .map(|w| {
            let (solved, steps) = solver.solve_steps(w, max_steps)?;
            Ok(GapRow {
                nn_steps: solved.then_some(steps),
                optimal_steps: bfs_optimal(w, depth_cap),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = rows
        .iter()
        .filter_map(|r| Some(r.nn_steps? as f64 - r.optimal_steps? as f64))
        .collect();
    let mean_gap = if gaps.is_empty() {
        f64::NAN
    } else {
        gaps.iter().sum::<f64>() / gaps.len() as f64
    };
    Ok(GapReport { rows, mean_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::Encoding;
    use crate::moves::apply;
    use crate::policy::{ModelConfig, PolicyNet};

    fn word(n: usize, letters: &[i32]) -> BraidWord {
        BraidWord::new(n, letters.len(), letters.to_vec()).unwrap()
    }

    /// Iterative deepening DFS without a visited set.
    fn iddfs(w: &BraidWord, cap: usize) -> Option<usize> {
        fn dfs(w: &BraidWord, table: &ActionTable, left: usize) -> bool {
            if w.is_trivial_diagram() {
                return true;
            }
            left > 0
                && table.iter().any(|a| {
                    crate::moves::applicable(w, a) && dfs(&apply(w, a).unwrap(), table, left - 1)
                })
        }
        let table = ActionTable::new(w.strands(), w.slots(), false);
        (0..=cap).find(|&d| dfs(w, &table, d))
    }

    #[test]
    fn small_examples() {
        assert_eq!(bfs_optimal(&BraidWord::trivial(3, 4).unwrap(), 0), Some(0));
        assert_eq!(bfs_optimal(&word(2, &[1, -1, 0, 0]), 5), Some(1));
        assert_eq!(bfs_optimal(&word(2, &[1, 0, -1, 0]), 5), Some(2));
        assert_eq!(bfs_optimal(&word(2, &[1, 0, -1, 0]), 1), None);
    }

    #[test]
    fn agrees_with_iterative_deepening() {
        for c in [2, 4] {
            let words = scramble::generate(40, &GenParams::new(3, 5, c, 6, 11)).unwrap();
            for w in &words {
                assert_eq!(bfs_optimal(w, 6), iddfs(w, 6), "{w}");
            }
        }
    }

    fn model(n: usize, l: usize) -> Checkpoint {
        let cfg = ModelConfig {
            strands: n,
            slots: l,
            insertion: false,
            encoding: Encoding::Scaled,
        };
        Checkpoint::new(cfg, PolicyNet::init(cfg.dims(), 5).unwrap()).unwrap()
    }

    #[test]
    fn gap_is_never_negative() {
        let ck = model(3, 6);
        let words = scramble::generate(30, &GenParams::new(3, 6, 4, 6, 2)).unwrap();
        let report = optimality_gap(&ck, &words, 20, 20).unwrap();
        assert_eq!(report.violations(), 0);
        let zero = optimality_gap(&ck, &[BraidWord::trivial(3, 6).unwrap()], 20, 20).unwrap();
        assert_eq!(
            zero.rows[0],
            GapRow {
                nn_steps: Some(0),
                optimal_steps: Some(0)
            }
        );
    }

    #[test]
    fn one_row_per_crossing_count() {
        let ck = model(4, 8);
        let cfg = BenchConfig {
            crossings: vec![0, 2, 4],
            samples: 5,
            mix_steps: 4,
            max_steps: 20,
            repeats: 2,
            seed: 1,
        };
        let rows = bench_compare(&ck, &cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].nn_solve_rate, 1.0);
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.nn_solve_rate));
            assert!(r.oracle_mean_us >= 0.0 && r.oracle_median_us >= 0.0);
        }
        let mut out = Vec::new();
        write_bench_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), BENCH_HEADER);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn median_of_even_count() {
        let mut t = [3, 1, 2, 10].map(Duration::from_micros);
        let (mean, median) = mean_median_us(&mut t);
        assert!((mean - 4.0).abs() < 1e-9);
        assert!((median - 2.5).abs() < 1e-9);
    }
}
