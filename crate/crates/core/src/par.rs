//! Monte Carlo execution: per-replication RNG streams and a chunked fold
//! whose result does not depend on the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Replications folded together before any merge. Fixed so that the
/// floating-point summation order never depends on scheduling.
pub const CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exec {
    Sequential,
    /// Rayon pool; `workers = None` uses the global pool. Falls back to
    /// sequential execution when built without the `parallel` feature.
    Parallel {
        workers: Option<usize>,
    },
}

impl Default for Exec {
    fn default() -> Self {
        Exec::Parallel { workers: None }
    }
}

impl Exec {
    pub fn with_workers(workers: Option<usize>) -> Exec {
        match workers {
            Some(1) => Exec::Sequential,
            w => Exec::Parallel { workers: w },
        }
    }
}

/// Independent stream `rep` of the generator seeded with `seed`.
pub fn rep_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn fold_chunk<A, I, S>(range: std::ops::Range<usize>, init: &I, step: &S) -> Result<A>
where
    I: Fn() -> A,
    S: Fn(&mut A, usize) -> Result<()>,
{
    let mut acc = init();
    for rep in range {
        step(&mut acc, rep)?;
    }
    Ok(acc)
}

/// Folds `step` over replications `0..n_rep` in chunks of [`CHUNK`], then
/// merges chunk accumulators left to right.
pub fn fold_reps<A, I, S, M>(exec: Exec, n_rep: usize, init: I, step: S, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, usize) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let chunks: Vec<std::ops::Range<usize>> =
        (0..n_rep.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n_rep)).collect();
    let parts = run_chunks(exec, chunks, &init, &step)?;
    let mut it = parts.into_iter();
    let mut acc = it.next().unwrap_or_else(&init);
    for part in it {
        merge(&mut acc, part);
    }
    Ok(acc)
}

/// Per-replication results in index order.
pub fn map_reps<T, F>(exec: Exec, n_rep: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    fold_reps(
        exec,
        n_rep,
        Vec::new,
        |acc: &mut Vec<T>, rep| {
            acc.push(f(rep)?);
            Ok(())
        },
        |acc, mut part| acc.append(&mut part),
    )
}

#[cfg(feature = "parallel")]
fn run_chunks<A, I, S>(exec: Exec, chunks: Vec<std::ops::Range<usize>>, init: &I, step: &S) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, usize) -> Result<()> + Sync,
{
    use rayon::prelude::*;
    match exec {
        Exec::Sequential => chunks.into_iter().map(|r| fold_chunk(r, init, step)).collect(),
        Exec::Parallel { workers } => {
            let run = || chunks.into_par_iter().map(|r| fold_chunk(r, init, step)).collect::<Result<Vec<A>>>();
            match workers {
                None => run(),
                Some(w) => rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| crate::error::Error::config(format!("cannot start worker pool: {e}")))?
                    .install(run),
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_chunks<A, I, S>(_exec: Exec, chunks: Vec<std::ops::Range<usize>>, init: &I, step: &S) -> Result<Vec<A>>
where
    I: Fn() -> A,
    S: Fn(&mut A, usize) -> Result<()>,
{
    chunks.into_iter().map(|r| fold_chunk(r, init, step)).collect()
}
