//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! `PASS`/`FAIL` line per criterion and exits non-zero if any failed.
//!
//! Reference values come from brute-force oracles defined here, not from the
//! library's memoized code paths.

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use littlestone_dp::decomposition::{
    greedy_decomposition, validate_tree, Decomposer, DecompositionParams, DecompositionTree, EssentialMode,
};
use littlestone_dp::erm::{erm_learn, ErmConfig, ErmOutput, LabeledDistribution};
use littlestone_dp::harness::{generate_stream, run_halving_baseline, run_soa_baseline, AdversaryOrder};
use littlestone_dp::hypothesis::{ldim, soa_hypothesis};
use littlestone_dp::mechanisms::{
    check_sparse_privacy_precondition, dp_audit, sparse_distribution, sparse_sample, CandidateList, CountMode,
    PrivacyParams, ThresholdOutcome, ThresholdState,
};
use littlestone_dp::online::{private_online_learn, OnlineConfig};
use littlestone_dp::{Domain, Hypothesis, HypothesisClass, LabeledExample, LabeledSequence};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Brute-force oracles over bit-encoded classes.

fn naive_ldim(members: &[u64], n: usize) -> i32 {
    if members.is_empty() {
        return -1;
    }
    let mut best = 0;
    for x in 0..n {
        let (ones, zeros): (Vec<u64>, Vec<u64>) = members.iter().partition(|&&b| b >> x & 1 == 1);
        if !ones.is_empty() && !zeros.is_empty() {
            best = best.max(1 + naive_ldim(&ones, n).min(naive_ldim(&zeros, n)));
        }
    }
    best
}

/// `naive_ldim` with a table keyed by the sorted member list.
fn memo_ldim(members: &[u64], n: usize, memo: &mut HashMap<Vec<u64>, i32>) -> i32 {
    if members.is_empty() {
        return -1;
    }
    let mut key = members.to_vec();
    key.sort_unstable();
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut best = 0;
    for x in 0..n {
        let (ones, zeros): (Vec<u64>, Vec<u64>) = members.iter().partition(|&&b| b >> x & 1 == 1);
        if !ones.is_empty() && !zeros.is_empty() {
            best = best.max(1 + memo_ldim(&ones, n, memo).min(memo_ldim(&zeros, n, memo)));
        }
    }
    memo.insert(key, best);
    best
}

/// Predicts 1 only when the 1-restriction has strictly larger dimension.
fn naive_soa(members: &[u64], n: usize) -> u64 {
    let mut out = 0;
    for x in 0..n {
        let (ones, zeros): (Vec<u64>, Vec<u64>) = members.iter().partition(|&&b| b >> x & 1 == 1);
        if naive_ldim(&ones, n) > naive_ldim(&zeros, n) {
            out |= 1 << x;
        }
    }
    out
}

/// Restricting along SOA labels depends only on the point set, so checking
/// every subset of size at most `k` covers every sequence of `k` points.
fn naive_irreducible(members: &[u64], n: usize, k: u64) -> bool {
    let l = naive_ldim(members, n);
    let f = naive_soa(members, n);
    (0u64..1 << n).filter(|s| s.count_ones() as u64 <= k).all(|s| {
        let rest: Vec<u64> = members.iter().copied().filter(|&b| (b ^ f) & s == 0).collect();
        naive_ldim(&rest, n) == l
    })
}

fn bits(class: &HypothesisClass) -> Vec<u64> {
    class.iter().map(|h| h.bits()).collect()
}

fn class_of(domain: Domain, bits: &[u64]) -> HypothesisClass {
    HypothesisClass::new(domain, bits.iter().map(|&b| Hypothesis::from_bits(domain, b))).unwrap()
}

fn random_class(r: &mut ChaCha8Rng, n: usize, m: usize) -> HypothesisClass {
    let domain = Domain::new(n).unwrap();
    let m = m.min(1 << n);
    let mut all: Vec<u64> = (0..1u64 << n).collect();
    all.shuffle(r);
    class_of(domain, &all[..m])
}

// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let mut r = rng(101);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = r.gen_range(1..=6);
        let m = r.gen_range(1..=20);
        let c = random_class(&mut r, n, m);
        if ldim(&c) != naive_ldim(&bits(&c), n) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("200 classes, {mismatches} mismatches"))
}

fn criterion_2() -> Outcome {
    let mut r = rng(102);
    let (mut soa_bad, mut halving_bad, mut worst_soa) = (0, 0, 0);
    for _ in 0..100 {
        let n = r.gen_range(2..=16);
        let m = r.gen_range(1..=40usize).min(1 << n.min(20));
        let c = if n <= 12 {
            random_class(&mut r, n, m)
        } else {
            let domain = Domain::new(n).unwrap();
            let mut set = std::collections::BTreeSet::new();
            while set.len() < m {
                set.insert(r.gen::<u64>() & domain.full_mask());
            }
            class_of(domain, &set.into_iter().collect::<Vec<_>>())
        };
        let target = c.members()[r.gen_range(0..c.len())];
        let t = r.gen_range(1..=500);
        let order = if r.gen_bool(0.5) { AdversaryOrder::Uniform } else { AdversaryOrder::RandomPerm };
        let s = generate_stream(&target, &order, t, &mut r).unwrap();
        let d = memo_ldim(&bits(&c), n, &mut HashMap::new());
        match run_soa_baseline(&c, &s) {
            Ok(run) if run.mistakes as i32 <= d => worst_soa = worst_soa.max(run.mistakes),
            _ => soa_bad += 1,
        }
        let log2 = (c.len() as f64).log2().floor() as usize;
        match run_halving_baseline(&c, &s) {
            Ok(run) if run.mistakes <= log2 => {}
            _ => halving_bad += 1,
        }
    }
    outcome(
        soa_bad == 0 && halving_bad == 0,
        format!("100 streams, SOA violations {soa_bad}, halving violations {halving_bad}"),
    )
}

fn potential(params: DecompositionParams, depth: usize, l: i32) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(params.p) * (BigInt::one() << params.d) - BigInt::from(depth));
    if l >= 0 {
        num_traits::pow(base, l as usize)
    } else {
        num_traits::pow(base.recip(), (-l) as usize)
    }
}

fn criterion_3() -> Outcome {
    let mut r = rng(103);
    let (mut invalid, mut leaf_bad, mut potential_bad, mut leaf_reducible) = (0, 0, 0, 0);
    for _ in 0..100 {
        let n = r.gen_range(2..=7);
        let m = r.gen_range(1..=20);
        let c = random_class(&mut r, n, m);
        let l = naive_ldim(&bits(&c), n).max(0) as u32;
        let d = l + r.gen_range(0..=1);
        let p = r.gen_range(1..=3);
        let params = DecompositionParams::new(p, d).unwrap();
        let tree = greedy_decomposition(&c, params).unwrap();
        if !validate_tree(&tree, &c).unwrap().is_valid() {
            invalid += 1;
        }
        if tree.leaf_count() as u64 > params.leaf_count_bound() {
            leaf_bad += 1;
        }
        for id in tree.preorder() {
            let node = tree.node(id);
            let nl = naive_ldim(&bits(&node.class), n);
            if let Some([a, b]) = node.children {
                let (na, nb) = (tree.node(a), tree.node(b));
                let sum = potential(params, na.depth(), naive_ldim(&bits(&na.class), n))
                    + potential(params, nb.depth(), naive_ldim(&bits(&nb.class), n));
                if sum > potential(params, node.depth(), nl) {
                    potential_bad += 1;
                }
            } else if nl >= 0 && !naive_irreducible(&bits(&node.class), n, params.irreducibility_budget(nl)) {
                leaf_reducible += 1;
            }
        }
    }
    outcome(
        invalid + leaf_bad + potential_bad + leaf_reducible == 0,
        format!(
            "100 trees: invalid {invalid}, leaf-count {leaf_bad}, potential {potential_bad}, brute-force reducible leaves {leaf_reducible}"
        ),
    )
}

// ---------------------------------------------------------------------------

struct Info {
    ddim: i32,
    tree: DecompositionTree,
    /// SOAs of dimension-`ddim` leaves of the canonical optimal tree.
    top_soas: Vec<Hypothesis>,
    essential: Vec<Hypothesis>,
}

struct InfoCache {
    dec: Decomposer,
    map: HashMap<(Vec<u64>, u64, u32), Info>,
}

impl InfoCache {
    fn get(&mut self, class: &HypothesisClass, p: u64, d: u32) -> &Info {
        let key = (bits(class), p, d);
        if !self.map.contains_key(&key) {
            let params = DecompositionParams::new(p, d).unwrap();
            let ddim = self.dec.ddim(class, params).unwrap();
            let tree = self.dec.optimal_tree(class, params).unwrap();
            let top_soas = tree.leaf_soas(ddim).into_iter().map(|(h, _)| h).collect();
            let essential = self.dec.essential(class, params, EssentialMode::Exact).unwrap().hypotheses;
            self.map.insert(
                key.clone(),
                Info {
                    ddim,
                    tree,
                    top_soas,
                    essential,
                },
            );
        }
        &self.map[&key]
    }
}

fn criterion_4() -> Outcome {
    let (mut pairs, mut item1, mut item2, mut walk, mut c2, mut c3, mut c4, mut c1) = (0u64, 0, 0, 0, 0, 0, 0, 0);
    let mut first_failure = String::new();
    for n in 1..=4usize {
        let domain = Domain::new(n).unwrap();
        let mut cache = InfoCache {
            dec: Decomposer::new(domain),
            map: HashMap::new(),
        };
        let cube: Vec<u64> = (0..1u64 << n).collect();
        let max_h = cube.len().min(6);
        for size in 1..=max_h {
            for h_bits in combinations(&cube, size) {
                let h = class_of(domain, &h_bits);
                let d = naive_ldim(&h_bits, n).max(0) as u32;
                for p in [1u64, 2] {
                    let (h_p, h_tree, h_top, h_ess) = {
                        let i = cache.get(&h, p, d);
                        (i.ddim, i.tree.clone(), i.top_soas.clone(), i.essential.clone())
                    };
                    let h_2p = cache.get(&h, 2 * p, d).ddim;
                    // Essential-set bounds on H alone.
                    if h_ess.len() as u64 > DecompositionParams::new(p, d).unwrap().leaf_count_bound() {
                        c1 += 1;
                    }
                    if h_2p == h_p && h_ess.is_empty() {
                        c3 += 1;
                    }
                    if h_p == 0 && h_ess != h.members() {
                        c4 += 1;
                    }
                    for mask in 1u64..1 << size {
                        pairs += 1;
                        let g_bits: Vec<u64> =
                            (0..size).filter(|i| mask >> i & 1 == 1).map(|i| h_bits[i]).collect();
                        let g = class_of(domain, &g_bits);
                        let g_2p = cache.get(&g, 2 * p, d);
                        if g_2p.ddim > h_p {
                            item1 += 1;
                            if first_failure.is_empty() {
                                first_failure = format!("monotone: G={g_bits:?} H={h_bits:?} p={p} d={d}");
                            }
                            continue;
                        }
                        if g_2p.ddim == h_p {
                            let t = h_p;
                            let g_top = g_2p.top_soas.clone();
                            for f in &g_top {
                                if !h_top.contains(f) {
                                    item2 += 1;
                                    if first_failure.is_empty() {
                                        first_failure = format!("soa match: G={g_bits:?} H={h_bits:?} p={p} d={d} f={f}");
                                    }
                                }
                                let cap = (2 * p as usize) << (d as i32 - t).max(0);
                                let (u, _) = h_tree.traverse_with_soa(f, cap);
                                let node = h_tree.node(u);
                                let ok = node.is_leaf()
                                    && node.ldim == t
                                    && soa_hypothesis(&node.class).ok().as_ref() == Some(f);
                                if !ok {
                                    walk += 1;
                                }
                            }
                        }
                        let g_p = cache.get(&g, p, d);
                        if g_p.ddim == h_p && !g_p.essential.iter().all(|f| h_ess.contains(f)) {
                            c2 += 1;
                            if first_failure.is_empty() {
                                first_failure = format!("inclusion: G={g_bits:?} H={h_bits:?} p={p} d={d}");
                            }
                        }
                    }
                }
            }
        }
    }
    let total = item1 + item2 + walk + c1 + c2 + c3 + c4;
    outcome(
        total == 0,
        format!(
            "{pairs} nested pairs: ddim monotone {item1}, top-leaf SOA match {item2}, walk {walk}; essential size {c1}, inclusion {c2}, non-empty {c3}, t=0 {c4}{}",
            if first_failure.is_empty() { String::new() } else { format!("; first: {first_failure}") }
        ),
    )
}

fn combinations(items: &[u64], k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[u64], k: usize, start: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let domain = Domain::new(2).unwrap();
    let (a, b) = (Hypothesis::from_bits(domain, 1), Hypothesis::from_bits(domain, 2));
    let lists = vec![
        CandidateList::new([a, b], 2),
        CandidateList::new([a, b], 2),
        CandidateList::new([a], 2),
    ];
    let (eps, bottom) = (1.0f64, 1.0f64);
    // Closed form: weights e^{ε·3}, e^{ε·2}, e^{ε·B}.
    let w = [(3.0 * eps).exp(), (2.0 * eps).exp(), (bottom * eps).exp()];
    let z: f64 = w.iter().sum();
    let expected: Vec<f64> = w.iter().map(|x| x / z).collect();
    let slot = |c: Option<Hypothesis>| match c {
        Some(h) if h == a => 0,
        Some(_) => 1,
        None => 2,
    };
    let law_ok = sparse_distribution(&lists, eps, bottom)
        .map(|law| law.len() == 3 && law.iter().all(|l| (l.2 - expected[slot(l.0)]).abs() < 1e-12))
        .unwrap_or(false);
    let draws = 100_000;
    let mut counts = [0u64; 3];
    let mut r = rng(105);
    for _ in 0..draws {
        counts[slot(sparse_sample(&lists, eps, bottom, &mut r).unwrap().choice)] += 1;
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    let max_dev = freq.iter().zip(&expected).map(|(f, e)| (f - e).abs()).fold(0.0, f64::max);
    let chi2: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&c, e)| {
            let exp = e * draws as f64;
            (c as f64 - exp).powi(2) / exp
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(2.0).unwrap().cdf(chi2);
    outcome(
        law_ok && max_dev <= 0.01 && p_value > 0.001,
        format!("max deviation {max_dev:.4}, chi-square {chi2:.3}, p = {p_value:.4}, closed form matches: {law_ok}"),
    )
}

fn criterion_6() -> Outcome {
    let domain = Domain::new(2).unwrap();
    let hyp = |b| Hypothesis::from_bits(domain, b);
    let (eps, delta, cap) = (2.5, 0.1, 2u64);
    let bottom = 10.0 * (cap as f64 / delta).ln() / eps;
    let compliant = check_sparse_privacy_precondition(cap, eps, delta, bottom);
    let full: Vec<CandidateList> = (0..14)
        .map(|i| CandidateList::new([hyp(1), hyp(2 + (i % 2))], cap as usize))
        .collect();
    let fewer = full[1..].to_vec();
    let trials = 50_000;
    let sampler = |l: &Vec<CandidateList>, r: &mut ChaCha8Rng| {
        sparse_sample(l, eps, bottom, r).unwrap().choice.map(|h| h.bits())
    };
    let report = dp_audit("sparse_sample", sampler, (&full, &fewer), trials, 2.0 * eps, delta, &mut rng(106));

    // Noiseless argmax on neighbors that swap one list.
    let a = vec![
        CandidateList::new([hyp(1)], 1),
        CandidateList::new([hyp(1)], 1),
        CandidateList::new([hyp(2)], 1),
    ];
    let mut b = a.clone();
    b[1] = CandidateList::new([hyp(2)], 1);
    let argmax = |l: &Vec<CandidateList>, _: &mut ChaCha8Rng| {
        let law = sparse_distribution(l, 1.0, f64::NEG_INFINITY).unwrap();
        law.iter().max_by(|x, y| x.1.total_cmp(&y.1)).and_then(|o| o.0.map(|h| h.bits()))
    };
    let control = dp_audit("argmax", argmax, (&a, &b), trials, 1.0, 0.01, &mut rng(107));
    outcome(
        compliant && !report.violated() && control.violated(),
        format!(
            "sampler max violation {:.4} ({}), control flagged: {}",
            report.max_violation,
            report.bucket,
            control.violated()
        ),
    )
}

fn criterion_7() -> Outcome {
    let eps = 1.0;
    let trials = 100_000;
    let mut r = rng(107);
    let mut parts = Vec::new();
    let mut pass = true;
    for mult in [1.0, 2.0, 4.0] {
        let m = mult / eps;
        let mut above = 0;
        for _ in 0..trials {
            let mut s = ThresholdState::new(0.0, eps, 1, CountMode::Above);
            if s.test(-m, &mut r) == ThresholdOutcome::Above {
                above += 1;
            }
        }
        let f = above as f64 / trials as f64;
        let reference = 0.5 * (-eps * m).exp();
        let ratio = f / reference;
        pass &= (0.5..=2.0).contains(&ratio);
        parts.push(format!("m={m}: {f:.5} vs {reference:.5}"));
    }
    outcome(pass, parts.join(", "))
}

// ---------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let class = HypothesisClass::thresholds(Domain::new(8).unwrap());
    let d = naive_ldim(&bits(&class), 8) as u32;
    let config = ErmConfig::desk(d);
    let alpha = 0.2;
    let seeds = 50;
    let (mut accurate, mut successes, mut witness_ok, mut ledger_ok, mut bottoms) = (0, 0, 0, 0, 0);
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let mut r = rng(1000 + seed);
        let target = class.members()[r.gen_range(0..class.len())];
        let sample = LabeledDistribution::uniform(target).sample(12_000, &mut r).unwrap();
        let run = erm_learn(&class, &sample, &config, &mut r).unwrap();
        if run.ledger.within_target() {
            ledger_ok += 1;
        }
        match &run.output {
            ErmOutput::Hypothesis(h) => {
                successes += 1;
                let err = h.mistakes_on(&sample) as f64 / sample.len() as f64;
                worst = worst.max(err);
                if err <= 2.0 * alpha {
                    accurate += 1;
                }
                let verified = run
                    .transcript
                    .verify_witness(h, &class, &sample, d)
                    .ok()
                    .flatten()
                    .is_some_and(|c| c.holds());
                if verified {
                    witness_ok += 1;
                }
            }
            _ => bottoms += 1,
        }
    }
    let rate = accurate as f64 / seeds as f64;
    outcome(
        rate >= 0.95 && witness_ok == successes && ledger_ok == seeds,
        format!(
            "{seeds} seeds: err <= 2α in {accurate} (worst {worst:.4}), no output {bottoms}, witnesses {witness_ok}/{successes}, ledger within target {ledger_ok}/{seeds}"
        ),
    )
}

fn uniform_stream(target: &Hypothesis, t: usize, r: &mut ChaCha8Rng) -> LabeledSequence {
    (0..t)
        .map(|_| {
            let x = r.gen_range(0..target.len());
            LabeledExample::new(x, target.value(x))
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let class = HypothesisClass::thresholds(Domain::new(16).unwrap());
    let d = naive_ldim(&bits(&class), 16) as u32;
    let config = OnlineConfig::desk(2000, PrivacyParams::new(1.0, 0.01).unwrap(), d);
    let seeds = 20;
    let (mut nonempty, mut j_ok, mut retained, mut within, mut clean_tail) = (0, 0, 0, 0, 0);
    let mut worst = 0;
    for seed in 0..seeds {
        let mut r = rng(2000 + seed);
        let target = class.members()[r.gen_range(0..class.len())];
        let stream = uniform_stream(&target, 2000, &mut r);
        let run = private_online_learn(&class, &stream, &config, Some(target), &mut r).unwrap();
        let trains: Vec<_> = run.log.trains.iter().filter(|t| !t.stage_tests.is_empty()).collect();
        // Recompute the final teacher classes from the collections.
        let last_j = run.summary.j_star.min(d + 1);
        let final_classes: Vec<HypothesisClass> = (0..run.teachers.k())
            .map(|i| {
                littlestone_dp::online::define_class(
                    &class,
                    run.teachers.teacher(i),
                    last_j,
                    d,
                    &littlestone_dp::rational::ratio(1, 10),
                )
            })
            .collect();
        if trains.iter().all(|t| t.min_class > 0) && final_classes.iter().all(|c| !c.is_empty()) {
            nonempty += 1;
        }
        if run.log.max_j_star() <= d + 1 && run.log.steps.iter().all(|s| s.j_star <= d + 1) {
            j_ok += 1;
        }
        if trains.iter().all(|t| t.target_retained == Some(true)) && final_classes.iter().all(|c| c.contains(&target)) {
            retained += 1;
        }
        worst = worst.max(run.summary.mistakes);
        if run.summary.mistakes as u64 <= config.mistake_budget() {
            within += 1;
        }
        if run.log.mistakes_after_last_retrain() == 0 {
            clean_tail += 1;
        }
    }
    let pass = nonempty == seeds
        && j_ok == seeds
        && retained == seeds
        && within as f64 >= 0.95 * seeds as f64
        && clean_tail as f64 >= 0.90 * seeds as f64;
    outcome(
        pass,
        format!(
            "{seeds} seeds: non-empty {nonempty}, j* bound {j_ok}, h* retained {retained}, mistakes <= {} in {within} (worst {worst}), clean after last retrain {clean_tail}",
            config.mistake_budget()
        ),
    )
}

fn criterion_10() -> Outcome {
    // Dynamics under noise-free tests.
    let class = HypothesisClass::thresholds(Domain::new(16).unwrap());
    let d = naive_ldim(&bits(&class), 16) as u32;
    let mut config = OnlineConfig::desk(2000, PrivacyParams::new(1.0, 0.01).unwrap(), d);
    config.noise_free_tests = true;
    let (mut transitions, mut held) = (0, 0);
    for seed in 0..20 {
        let mut r = rng(3000 + seed);
        let target = class.members()[r.gen_range(0..class.len())];
        let stream = uniform_stream(&target, 2000, &mut r);
        let run = private_online_learn(&class, &stream, &config, Some(target), &mut r).unwrap();
        let sampled: Vec<_> = run.log.trains.iter().filter(|t| t.p_bottom.is_some()).collect();
        for w in sampled.windows(2) {
            transitions += 1;
            if w[1].p_bottom.unwrap() >= 1.1 * w[0].p_bottom.unwrap() || w[1].j_star > w[0].j_star {
                held += 1;
            }
        }
    }
    let (instances, fact_bad) = fact_exhaustive();
    outcome(
        transitions > 0 && held == transitions && fact_bad == 0,
        format!("growth held in {held}/{transitions} transitions; rule-out fact: {fact_bad} violations over {instances} instances"),
    )
}

/// For an essential `f` of `H` with `err_A(f) ≥ 1/8` and `p ≥ n ≥ d`, `f`
/// must not be essential to `{h ∈ H : err_A(h) ≤ 1/10}`.
fn fact_exhaustive() -> (u64, u64) {
    let (mut instances, mut bad) = (0u64, 0u64);
    for n_pts in 1..=3usize {
        let domain = Domain::new(n_pts).unwrap();
        let mut dec = Decomposer::new(domain);
        let cube: Vec<u64> = (0..1u64 << n_pts).collect();
        let examples: Vec<(usize, bool)> = (0..n_pts).flat_map(|x| [(x, false), (x, true)]).collect();
        for size in 1..=cube.len().min(4) {
            for h_bits in combinations(&cube, size) {
                let h = class_of(domain, &h_bits);
                let l = naive_ldim(&h_bits, n_pts).max(0) as usize;
                for n in l.max(1)..=2 {
                    for d in l..=n {
                        for p in [n as u64, n as u64 + 1] {
                            let params = DecompositionParams::new(p, d as u32).unwrap();
                            let ess_h = dec.essential(&h, params, EssentialMode::Exact).unwrap();
                            for a in sequences(&examples, n) {
                                let err = |f: &Hypothesis| f.mistakes_on(&a) as f64 / n as f64;
                                let g = h.filter(|x| 10 * x.mistakes_on(&a) <= n);
                                let ess_g = dec.essential(&g, params, EssentialMode::Exact).unwrap();
                                for f in ess_h.hypotheses.iter().filter(|f| err(f) >= 0.125) {
                                    instances += 1;
                                    if ess_g.contains(f) {
                                        bad += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    (instances, bad)
}

fn sequences(examples: &[(usize, bool)], n: usize) -> Vec<LabeledSequence> {
    let mut out = vec![LabeledSequence::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                examples.iter().map(move |&(x, y)| {
                    let mut t = s.clone();
                    t.push(LabeledExample::new(x, y));
                    t
                })
            })
            .collect();
    }
    out
}

// ---------------------------------------------------------------------------

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "LDim oracle equivalence", Duration::from_secs(60), criterion_1),
        (2, "SOA and halving baseline bounds", Duration::from_secs(60), criterion_2),
        (3, "greedy decomposition validity, leaf count, potential", Duration::from_secs(300), criterion_3),
        (4, "nested-pair decomposition dimension and essential sets", Duration::from_secs(600), criterion_4),
        (5, "sparse sampler distribution", Duration::from_secs(600), criterion_5),
        (6, "privacy audit of the sparse sampler", Duration::from_secs(600), criterion_6),
        (7, "AboveThreshold tail frequencies", Duration::from_secs(600), criterion_7),
        (8, "private ERM desk run", Duration::from_secs(600), criterion_8),
        (9, "private online desk run", Duration::from_secs(1200), criterion_9),
        (10, "online growth dynamics and rule-out fact", Duration::from_secs(1200), criterion_10),
    ];
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut stdout = std::io::stdout();
    let (mut passed, mut failed) = (0, 0);
    for &(id, name, limit, f) in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.0)) {
        let start = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| outcome(false, "panicked"));
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        writeln!(
            stdout,
            "criterion {id:>2} {}: {name} [{:.1}s, limit {}s] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail
        )
        .unwrap();
        stdout.flush().unwrap();
        if pass {
            passed += 1;
        } else {
            failed += 1;
        }
    }
    writeln!(stdout, "acceptance: {passed} passed, {failed} failed").unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
