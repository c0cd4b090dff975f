//! Attention-planner scaling benchmark.

use std::time::Instant;

use gap_planner::{count_candidates, plan};
use rand::Rng;
use serde::{Deserialize, Serialize};
use swarm_core::{seeded_stream, Vec3};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub n: usize,
    pub candidates: u128,
    pub mean_s: f64,
    pub std_s: f64,
    pub repeats: usize,
}

/// Times `plan` over random circular configurations per swarm size.
///
/// Sizes beyond 10 are gated behind `allow_large`: the candidate count is
/// `(n-1)!` and runtimes explode factorially.
pub fn gap_benchmark(
    n_list: &[usize],
    repeats: usize,
    seed: u64,
    allow_large: bool,
) -> Result<Vec<BenchmarkRow>, HarnessError> {
    if repeats == 0 {
        return Err(HarnessError::Invalid("benchmark needs at least one repeat".into()));
    }
    for &n in n_list {
        if n < 2 {
            return Err(HarnessError::Invalid(format!("swarm size {n} is below the minimum of 2")));
        }
        if n > 10 && !allow_large {
            return Err(HarnessError::Invalid(format!(
                "swarm size {n} exceeds 10; pass allow_large to accept the factorial runtime"
            )));
        }
    }

    let mut rng = seeded_stream(seed, "gap-benchmark");
    let mut rows = Vec::new();
    for &n in n_list {
        let mut times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            // Circular formation with random phase, mild radial jitter and
            // tangential velocities at a random speed.
            let phase0: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let speed: f64 = rng.random_range(0.5..2.0);
            let mut positions = Vec::with_capacity(n);
            let mut velocities = Vec::with_capacity(n);
            for i in 0..n {
                let phase = phase0 + std::f64::consts::TAU * i as f64 / n as f64;
                let radius = 1.0 + rng.random_range(-0.05..0.05);
                positions.push(Vec3::new(radius * phase.cos(), radius * phase.sin(), 0.0));
                velocities.push(Vec3::new(-speed * phase.sin(), speed * phase.cos(), 0.0));
            }
            let start = Instant::now();
            let _ = plan(&positions, &velocities, 1.0, 1.0)?;
            times.push(start.elapsed().as_secs_f64());
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / times.len() as f64;
        rows.push(BenchmarkRow {
            n,
            candidates: count_candidates(n, true),
            mean_s: mean,
            std_s: var.sqrt(),
            repeats,
        });
    }
    Ok(rows)
}
