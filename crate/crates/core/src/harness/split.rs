use crate::hypothesis::{HypothesisClass, LabeledSequence};

/// Tail bound for a uniform subset of size `t` deviating from the population
/// mean `mean` by more than a `delta` fraction: `2·exp(−δ²·t·mean/3)`.
pub fn chernoff_without_replacement(delta: f64, t: usize, mean: f64) -> f64 {
    2.0 * (-delta * delta * t as f64 * mean / 3.0).exp()
}

fn rate(mistakes: usize, len: usize) -> f64 {
    mistakes as f64 / len as f64
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b).abs() / b
    }
}

/// Largest `|err_A(h) − err_P(h)| / err_P(h)` over blocks `A` and members `h`.
/// Zero population error counts as deviation 0 only if the block error is 0 too.
pub fn max_relative_deviation(class: &HypothesisClass, population: &LabeledSequence, blocks: &[LabeledSequence]) -> f64 {
    if population.is_empty() {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for h in class.iter() {
        let p = rate(h.mistakes_on(population), population.len());
        for b in blocks.iter().filter(|b| !b.is_empty()) {
            worst = worst.max(relative(rate(h.mistakes_on(b), b.len()), p));
        }
    }
    worst
}

/// Largest `|err_{A_i}(h) − err_{A_j}(h)| / err_{A_j}(h)` over ordered block
/// pairs and members; the blocks agree within `(1 ± τ)` iff this is `≤ τ`.
pub fn max_pairwise_deviation(class: &HypothesisClass, blocks: &[LabeledSequence]) -> f64 {
    let mut worst: f64 = 0.0;
    for h in class.iter() {
        let rates: Vec<f64> = blocks
            .iter()
            .filter(|b| !b.is_empty())
            .map(|b| rate(h.mistakes_on(b), b.len()))
            .collect();
        for a in &rates {
            for b in &rates {
                worst = worst.max(relative(*a, *b));
            }
        }
    }
    worst
}
