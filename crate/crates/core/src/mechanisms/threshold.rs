use rand::Rng;
use serde::{Deserialize, Serialize};

use super::laplace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountMode {
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdNoise {
    Laplace,
    /// Exact comparisons; for tests and diagnostics only. Not private.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdOutcome {
    Above,
    Below,
    Halted,
}

/// AboveThreshold over a stream of sensitivity-1 queries, paying only for
/// counted outcomes. The query that would push the counter past `max_count`
/// returns `Halted`, as does every later one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    pub threshold: f64,
    pub epsilon: f64,
    pub max_count: u64,
    pub mode: CountMode,
    pub noise: ThresholdNoise,
    counter: u64,
    halted: bool,
    queries: u64,
}

impl ThresholdState {
    pub fn new(threshold: f64, epsilon: f64, max_count: u64, mode: CountMode) -> Self {
        ThresholdState {
            threshold,
            epsilon,
            max_count,
            mode,
            noise: ThresholdNoise::Laplace,
            counter: 0,
            halted: false,
            queries: 0,
        }
    }

    pub fn noise_free(mut self) -> Self {
        self.noise = ThresholdNoise::None;
        self
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    /// Queries answered with `Above` or `Below`.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn test<R: Rng + ?Sized>(&mut self, value: f64, rng: &mut R) -> ThresholdOutcome {
        if self.halted {
            return ThresholdOutcome::Halted;
        }
        let noisy = match self.noise {
            ThresholdNoise::Laplace => value + laplace(1.0 / self.epsilon, rng),
            ThresholdNoise::None => value,
        };
        let outcome = if noisy >= self.threshold {
            ThresholdOutcome::Above
        } else {
            ThresholdOutcome::Below
        };
        let counted = matches!(
            (self.mode, outcome),
            (CountMode::Above, ThresholdOutcome::Above) | (CountMode::Below, ThresholdOutcome::Below)
        );
        if counted {
            if self.counter == self.max_count {
                self.halted = true;
                return ThresholdOutcome::Halted;
            }
            self.counter += 1;
        }
        self.queries += 1;
        outcome
    }
}

pub fn above_threshold<R: Rng + ?Sized>(state: &mut ThresholdState, value: f64, rng: &mut R) -> ThresholdOutcome {
    state.test(value, rng)
}
