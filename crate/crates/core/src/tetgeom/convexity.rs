//! Random search for two realizable length vectors whose midpoint is not
//! realizable, showing that the space of hyperideal edge lengths is not convex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::shape::angles_from_lengths;
use super::Six;

/// Most witnesses kept in a report; the count keeps going.
const MAX_WITNESSES: usize = 8;
/// Lengths are drawn log-uniformly from `[LOG_MIN, LOG_MAX]` in log space.
const LOG_MIN: f64 = -4.0;
const LOG_MAX: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityWitness {
    pub first: Six,
    pub second: Six,
    pub midpoint: Six,
    /// Why the midpoint was rejected.
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub seed: u64,
    pub trials: usize,
    /// Candidate draws discarded because they were not admissible.
    pub rejected_draws: usize,
    pub witness_count: usize,
    pub witnesses: Vec<ConvexityWitness>,
}

fn draw(rng: &mut ChaCha8Rng) -> Six {
    std::array::from_fn(|_| rng.random_range(LOG_MIN..LOG_MAX).exp())
}

fn draw_admissible(rng: &mut ChaCha8Rng, rejected: &mut usize) -> Six {
    loop {
        let x = draw(rng);
        if angles_from_lengths(&x).is_ok() {
            return x;
        }
        *rejected += 1;
    }
}

/// Tests `trials` midpoints of random admissible pairs.
pub fn probe_length_space_convexity(trials: usize, seed: u64) -> ConvexityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConvexityReport { seed, trials, ..Default::default() };
    for _ in 0..trials {
        let first = draw_admissible(&mut rng, &mut report.rejected_draws);
        let second = draw_admissible(&mut rng, &mut report.rejected_draws);
        let midpoint: Six = std::array::from_fn(|i| 0.5 * (first[i] + second[i]));
        if let Err(err) = angles_from_lengths(&midpoint) {
            report.witness_count += 1;
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(ConvexityWitness { first, second, midpoint, reason: err.to_string() });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_empty() {
        let r = probe_length_space_convexity(0, 3);
        assert_eq!(r.witness_count, 0);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn seeded_probe_is_reproducible() {
        assert_eq!(probe_length_space_convexity(200, 11), probe_length_space_convexity(200, 11));
    }
}
