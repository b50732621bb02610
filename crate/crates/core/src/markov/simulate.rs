//! Seeded Monte-Carlo simulation of a finite Markov chain.
//!
//! Path `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, so
//! results depend only on `(seed, path index)` and are identical on every
//! platform.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::TransitionMatrix;
use crate::error::{Error, Result};
use crate::linalg::DenseVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub n: usize,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    /// `counts[k][i][j]`: paths moving `i → j` at step `k + 1`.
    pub counts: Vec<Vec<Vec<u64>>>,
    /// Row-normalized `counts`; rows never visited are zero.
    pub frequencies: Vec<Vec<Vec<f64>>>,
    /// Empirical law after `k` steps, `k = 0..=steps`.
    pub laws: Vec<Vec<f64>>,
    /// `initial · P^k`.
    pub expected_laws: Vec<Vec<f64>>,
    /// Largest `|law − expected| / √(expected(1 − expected)/paths)` over
    /// steps and states with `0 < expected < 1`.
    pub max_law_z: f64,
    /// Same statistic for transition frequencies against `P`.
    pub max_transition_z: f64,
}

fn sampler(weights: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights.iter().map(|w| w.max(0.0))).map_err(|e| Error::domain(format!("cannot sample row: {e}")))
}

fn validate_distribution(initial: &DenseVector, n: usize) -> Result<()> {
    if initial.dim() != n {
        return Err(Error::domain(format!("initial law has {} entries, expected {n}", initial.dim())));
    }
    if let Some((i, v)) = initial.as_slice().iter().enumerate().find(|(_, v)| **v < -1e-12) {
        return Err(Error::domain(format!("initial law has negative entry {v} at {i}")));
    }
    if (initial.sum() - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("initial law sums to {}", initial.sum())));
    }
    Ok(())
}

pub fn simulate_chain(
    p: &TransitionMatrix,
    initial: &DenseVector,
    steps: usize,
    paths: usize,
    seed: u64,
) -> Result<SimulationReport> {
    let n = p.n();
    validate_distribution(initial, n)?;
    let pm = p.matrix();
    let start = sampler(initial.as_slice())?;
    let rows: Vec<WeightedIndex<f64>> = (0..n).map(|i| sampler(pm.row(i))).collect::<Result<_>>()?;

    let mut counts = vec![vec![vec![0u64; n]; n]; steps];
    let mut visits = vec![vec![0u64; n]; steps + 1];
    for path in 0..paths {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path as u64);
        let mut state = start.sample(&mut rng);
        visits[0][state] += 1;
        for k in 0..steps {
            let next = rows[state].sample(&mut rng);
            counts[k][state][next] += 1;
            visits[k + 1][next] += 1;
            state = next;
        }
    }

    let total = paths.max(1) as f64;
    let laws: Vec<Vec<f64>> = visits.iter().map(|v| v.iter().map(|&c| c as f64 / total).collect()).collect();
    let mut expected_laws = vec![initial.as_slice().to_vec()];
    for _ in 0..steps {
        let prev = DenseVector::from(expected_laws.last().expect("nonempty").clone());
        expected_laws.push(pm.left_mul_vec(&prev)?.into_vec());
    }
    let z = |obs: f64, exp: f64, trials: f64| {
        if exp <= 0.0 || exp >= 1.0 || trials == 0.0 {
            0.0
        } else {
            (obs - exp).abs() / (exp * (1.0 - exp) / trials).sqrt()
        }
    };
    let mut max_law_z: f64 = 0.0;
    for (law, exp) in laws.iter().zip(&expected_laws) {
        for (o, e) in law.iter().zip(exp) {
            max_law_z = max_law_z.max(z(*o, *e, total));
        }
    }
    let mut max_transition_z: f64 = 0.0;
    let frequencies: Vec<Vec<Vec<f64>>> = counts
        .iter()
        .map(|step| {
            step.iter()
                .enumerate()
                .map(|(i, row)| {
                    let visits: u64 = row.iter().sum();
                    row.iter()
                        .enumerate()
                        .map(|(j, &c)| {
                            let f = if visits == 0 { 0.0 } else { c as f64 / visits as f64 };
                            max_transition_z = max_transition_z.max(z(f, pm[(i, j)], visits as f64));
                            f
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(SimulationReport {
        n,
        steps,
        paths,
        seed,
        counts,
        frequencies,
        laws,
        expected_laws,
        max_law_z,
        max_transition_z,
    })
}
