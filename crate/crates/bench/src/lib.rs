//! Fixed scenario corpora shared by the benchmarks.

use seqpar_core::{random_scenario, Degeneracy, Scenario, ScenarioSpec};

/// `count` seeded scenarios of the given size and degeneracy.
pub fn corpus(d: usize, m: usize, n: usize, r: usize, degeneracy: Degeneracy, count: u64) -> Vec<Scenario> {
    (0..count)
        .map(|seed| {
            random_scenario(&ScenarioSpec::new(d, m, n, r, seed, degeneracy))
                .expect("benchmark corpus generation")
        })
        .collect()
}
