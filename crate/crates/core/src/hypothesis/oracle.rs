//! Memoized Littlestone dimension, SOA and irreducibility over interned classes.
//!
//! Every class reachable by restriction is interned once and addressed by a
//! [`ClassId`]. Restrictions, dimensions, SOA vectors and shortest reducing
//! sequences are cached per id, so search code built on top of the oracle
//! (decomposition trees, essential sets) pays for each class only once.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{Domain, DomainPoint, Hypothesis, HypothesisClass};
use crate::error::{Error, Result};

pub type ClassId = u32;

#[derive(Debug, Clone)]
enum Reduction {
    Irreducible,
    /// Shortest sequence of points whose SOA-labeled restriction drops the dimension.
    Witness(Vec<usize>),
}

#[derive(Debug)]
struct Entry {
    members: Box<[u64]>,
    ldim: Option<i32>,
    soa: Option<u64>,
    children: Box<[Option<ClassId>]>,
    reduction: Option<Reduction>,
}

/// Interning table plus memo tables for one domain.
///
/// Not shared across threads; give each worker its own oracle.
#[derive(Debug)]
pub struct ClassOracle {
    domain: Domain,
    entries: Vec<Entry>,
    index: HashMap<Box<[u64]>, ClassId>,
}

impl ClassOracle {
    pub fn new(domain: Domain) -> Self {
        ClassOracle {
            domain,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Number of distinct classes seen so far.
    pub fn interned(&self) -> usize {
        self.entries.len()
    }

    pub fn intern(&mut self, class: &HypothesisClass) -> Result<ClassId> {
        if class.domain() != self.domain {
            return Err(Error::LengthMismatch {
                expected: self.domain.size(),
                found: class.domain().size(),
            });
        }
        Ok(self.intern_bits(class.encoding()))
    }

    fn intern_bits(&mut self, bits: Vec<u64>) -> ClassId {
        if let Some(&id) = self.index.get(bits.as_slice()) {
            return id;
        }
        let id = self.entries.len() as ClassId;
        let key: Box<[u64]> = bits.into_boxed_slice();
        self.entries.push(Entry {
            members: key.clone(),
            ldim: None,
            soa: None,
            children: vec![None; 2 * self.domain.size()].into_boxed_slice(),
            reduction: None,
        });
        self.index.insert(key, id);
        id
    }

    pub fn class(&self, id: ClassId) -> HypothesisClass {
        HypothesisClass::from_sorted_bits(self.domain, &self.entries[id as usize].members)
    }

    pub fn size(&self, id: ClassId) -> usize {
        self.entries[id as usize].members.len()
    }

    pub fn member_bits(&self, id: ClassId) -> &[u64] {
        &self.entries[id as usize].members
    }

    pub fn contains(&self, id: ClassId, h: &Hypothesis) -> bool {
        let members = &self.entries[id as usize].members;
        // Members are sorted in canonical order, not numeric order.
        members
            .binary_search_by(|b| b.reverse_bits().cmp(&h.bits().reverse_bits()))
            .is_ok()
    }

    /// Points on which the members disagree, as a bit mask.
    pub fn splitting_mask(&self, id: ClassId) -> u64 {
        let members = &self.entries[id as usize].members;
        let (any, all) = members
            .iter()
            .fold((0u64, u64::MAX), |(any, all), &b| (any | b, all & b));
        if members.is_empty() {
            0
        } else {
            any & !all & self.domain.full_mask()
        }
    }

    pub fn splitting_points(&self, id: ClassId) -> Vec<usize> {
        bits_of(self.splitting_mask(id)).collect()
    }

    pub fn restrict(&mut self, id: ClassId, x: usize, label: bool) -> ClassId {
        let slot = 2 * x + label as usize;
        if let Some(child) = self.entries[id as usize].children[slot] {
            return child;
        }
        let bits: Vec<u64> = self.entries[id as usize]
            .members
            .iter()
            .copied()
            .filter(|b| ((b >> x) & 1 == 1) == label)
            .collect();
        let child = if bits.len() == self.entries[id as usize].members.len() {
            id
        } else {
            self.intern_bits(bits)
        };
        self.entries[id as usize].children[slot] = Some(child);
        child
    }

    pub fn restrict_labeled(&mut self, id: ClassId, seq: &[(usize, bool)]) -> ClassId {
        seq.iter().fold(id, |c, &(x, b)| self.restrict(c, x, b))
    }

    /// Littlestone dimension, with `LDim(∅) = -1`.
    pub fn ldim(&mut self, id: ClassId) -> i32 {
        if let Some(v) = self.entries[id as usize].ldim {
            return v;
        }
        let size = self.size(id);
        let value = match size {
            0 => -1,
            1 => 0,
            _ => {
                // A complete mistake tree of depth t needs 2^t leaves.
                let ceiling = (usize::BITS - 1 - size.leading_zeros()) as i32;
                let mut best = 0;
                for x in self.splitting_points(id) {
                    let zero = self.restrict(id, x, false);
                    let v0 = self.ldim(zero);
                    if v0 < best {
                        continue;
                    }
                    let one = self.restrict(id, x, true);
                    let v1 = self.ldim(one);
                    best = best.max(1 + v0.min(v1));
                    if best == ceiling {
                        break;
                    }
                }
                best
            }
        };
        self.entries[id as usize].ldim = Some(value);
        value
    }

    /// `SOA_H` materialized over the whole domain.
    pub fn soa(&mut self, id: ClassId) -> Result<Hypothesis> {
        if let Some(bits) = self.entries[id as usize].soa {
            return Ok(Hypothesis::from_bits(self.domain, bits));
        }
        if self.size(id) == 0 {
            return Err(Error::UndefinedSoa);
        }
        let dim = self.ldim(id);
        let mut bits = 0u64;
        for x in 0..self.domain.size() {
            let zero = self.restrict(id, x, false);
            if self.ldim(zero) != dim {
                bits |= 1 << x;
            }
        }
        self.entries[id as usize].soa = Some(bits);
        Ok(Hypothesis::from_bits(self.domain, bits))
    }

    pub fn soa_at(&mut self, id: ClassId, x: DomainPoint) -> Result<bool> {
        self.domain.check(x)?;
        Ok(self.soa(id)?.value(x.0))
    }

    fn reduction(&mut self, id: ClassId) -> Reduction {
        if let Some(r) = &self.entries[id as usize].reduction {
            return r.clone();
        }
        let result = self.search_reduction(id);
        self.entries[id as usize].reduction = Some(result.clone());
        result
    }

    /// Breadth-first search over SOA-labeled restrictions, deduplicated by class.
    ///
    /// Labels come from the SOA of the class under test, so the restricted class
    /// depends only on the set of chosen points; repeats and points on which the
    /// current class is unanimous never change it and are skipped.
    fn search_reduction(&mut self, id: ClassId) -> Reduction {
        let dim = self.ldim(id);
        if dim <= 0 {
            return Reduction::Irreducible;
        }
        let soa = self.soa(id).expect("non-empty class");
        let mut seen = HashSet::from([id]);
        let mut queue = VecDeque::from([(id, Vec::<usize>::new())]);
        while let Some((class, path)) = queue.pop_front() {
            for x in self.splitting_points(class) {
                let next = self.restrict(class, x, soa.value(x));
                if !seen.insert(next) {
                    continue;
                }
                let mut next_path = path.clone();
                next_path.push(x);
                if self.ldim(next) < dim {
                    return Reduction::Witness(next_path);
                }
                queue.push_back((next, next_path));
            }
        }
        Reduction::Irreducible
    }

    /// A shortest sequence `x_1..x_j` (`j <= k`, no repeats) whose restriction by
    /// `(x_i, SOA_H(x_i))` lowers the dimension, or `None` if `H` is
    /// `k`-irreducible.
    pub fn find_reducing_sequence(&mut self, id: ClassId, k: u64) -> Option<Vec<DomainPoint>> {
        if k == 0 || self.ldim(id) <= 0 {
            return None;
        }
        match self.reduction(id) {
            Reduction::Witness(seq) if seq.len() as u64 <= k => {
                Some(seq.into_iter().map(DomainPoint).collect())
            }
            _ => None,
        }
    }

    pub fn is_irreducible(&mut self, id: ClassId, k: u64) -> bool {
        if k == 0 || self.ldim(id) <= 0 {
            return true;
        }
        // Restricting to every splitting point leaves at most the SOA itself
        // (dimension <= 0 < LDim), so budgets that large always reduce.
        if k >= self.splitting_mask(id).count_ones() as u64 {
            return false;
        }
        self.find_reducing_sequence(id, k).is_none()
    }
}

pub(crate) fn bits_of(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

pub fn ldim(class: &HypothesisClass) -> i32 {
    let mut oracle = ClassOracle::new(class.domain());
    let id = oracle.intern(class).expect("same domain");
    oracle.ldim(id)
}

/// `SOA_H(x)`: 0 exactly when `LDim(H|_{(x,0)}) = LDim(H)`.
pub fn soa(class: &HypothesisClass, x: DomainPoint) -> Result<bool> {
    let mut oracle = ClassOracle::new(class.domain());
    let id = oracle.intern(class)?;
    oracle.soa_at(id, x)
}

pub fn soa_hypothesis(class: &HypothesisClass) -> Result<Hypothesis> {
    let mut oracle = ClassOracle::new(class.domain());
    let id = oracle.intern(class)?;
    oracle.soa(id)
}

pub fn find_reducing_sequence(class: &HypothesisClass, k: u64) -> Option<Vec<DomainPoint>> {
    let mut oracle = ClassOracle::new(class.domain());
    let id = oracle.intern(class).expect("same domain");
    oracle.find_reducing_sequence(id, k)
}

pub fn is_irreducible(class: &HypothesisClass, k: u64) -> bool {
    let mut oracle = ClassOracle::new(class.domain());
    let id = oracle.intern(class).expect("same domain");
    oracle.is_irreducible(id, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{restrict, restrict_seq, LabeledExample};

    fn dom(n: usize) -> Domain {
        Domain::new(n).unwrap()
    }

    /// Exponential recursion straight from the mistake-tree definition.
    fn naive_ldim(class: &HypothesisClass) -> i32 {
        if class.is_empty() {
            return -1;
        }
        let mut best = 0;
        for x in 0..class.domain().size() {
            let a = restrict(class, LabeledExample::new(x, false)).unwrap();
            let b = restrict(class, LabeledExample::new(x, true)).unwrap();
            if !a.is_empty() && !b.is_empty() {
                best = best.max(1 + naive_ldim(&a).min(naive_ldim(&b)));
            }
        }
        best
    }

    #[test]
    fn ldim_basic_values() {
        let d = dom(4);
        assert_eq!(ldim(&HypothesisClass::empty(d)), -1);
        let single = HypothesisClass::new(d, [Hypothesis::constant(d, true)]).unwrap();
        assert_eq!(ldim(&single), 0);
        for n in 1..=5 {
            assert_eq!(ldim(&HypothesisClass::full_cube(dom(n)).unwrap()), n as i32);
        }
    }

    #[test]
    fn thresholds_match_naive_recursion() {
        let t7 = HypothesisClass::thresholds(dom(7));
        let expected = naive_ldim(&t7);
        assert_eq!(expected, 3);
        assert_eq!(ldim(&t7), expected);
    }

    #[test]
    fn soa_of_constants() {
        let d = dom(4);
        let zeros = HypothesisClass::new(d, [Hypothesis::constant(d, false)]).unwrap();
        let ones = HypothesisClass::new(d, [Hypothesis::constant(d, true)]).unwrap();
        for x in d.points() {
            assert!(!soa(&zeros, x).unwrap());
            assert!(soa(&ones, x).unwrap());
        }
        assert!(matches!(
            soa_hypothesis(&HypothesisClass::empty(d)),
            Err(Error::UndefinedSoa)
        ));
    }

    #[test]
    fn soa_hypothesis_matches_pointwise_soa() {
        let t4 = HypothesisClass::thresholds(dom(4));
        let f = soa_hypothesis(&t4).unwrap();
        for x in t4.domain().points() {
            assert_eq!(f.value(x.0), soa(&t4, x).unwrap());
        }
        // Pointwise recomputation from the definition.
        let dim = naive_ldim(&t4);
        for x in 0..4 {
            let zero = restrict(&t4, LabeledExample::new(x, false)).unwrap();
            assert_eq!(f.value(x), naive_ldim(&zero) != dim);
        }
        let h = Hypothesis::threshold(dom(4), 2);
        let single = HypothesisClass::new(dom(4), [h]).unwrap();
        assert_eq!(soa_hypothesis(&single).unwrap(), h);
    }

    #[test]
    fn dimension_zero_pair_is_reducible() {
        let d = dom(3);
        let a: Hypothesis = "010".parse().unwrap();
        let b: Hypothesis = "011".parse().unwrap();
        let class = HypothesisClass::new(d, [a, b]).unwrap();
        assert_eq!(ldim(&class), 1);
        let seq = find_reducing_sequence(&class, 3).expect("reducible");
        let f = soa_hypothesis(&class).unwrap();
        let restricted = restrict_seq(&class, &f.label_points(&seq)).unwrap();
        assert!(ldim(&restricted) < ldim(&class));
    }

    /// Exhaustive check over every point sequence without repeats of length <= k.
    fn brute_force_reducible(class: &HypothesisClass, k: usize) -> bool {
        let dim = naive_ldim(class);
        if dim <= 0 {
            return false;
        }
        let f = soa_hypothesis(class).unwrap();
        let n = class.domain().size();
        (1u64..1 << n).any(|set| {
            set.count_ones() as usize <= k && {
                let pts: Vec<DomainPoint> = bits_of(set).map(DomainPoint).collect();
                naive_ldim(&restrict_seq(class, &f.label_points(&pts)).unwrap()) < dim
            }
        })
    }

    #[test]
    fn full_cube_irreducibility_matches_exhaustive_check() {
        for n in 1..=3 {
            let cube = HypothesisClass::full_cube(dom(n)).unwrap();
            for k in 0..=n {
                assert_eq!(
                    is_irreducible(&cube, k as u64),
                    !brute_force_reducible(&cube, k),
                    "n={n} k={k}"
                );
            }
            // Fixing any one coordinate already drops the cube's dimension.
            assert!(!is_irreducible(&cube, 1));
        }
    }

    #[test]
    fn k_zero_is_always_irreducible() {
        let cube = HypothesisClass::full_cube(dom(3)).unwrap();
        assert!(is_irreducible(&cube, 0));
        assert!(find_reducing_sequence(&cube, 0).is_none());
    }

    #[test]
    fn oracle_interns_restrictions_once() {
        let t = HypothesisClass::thresholds(dom(6));
        let mut o = ClassOracle::new(t.domain());
        let id = o.intern(&t).unwrap();
        let a = o.restrict(id, 2, true);
        let b = o.restrict(id, 2, true);
        assert_eq!(a, b);
        assert_eq!(o.class(a).len(), 3);
        assert!(o.contains(a, &Hypothesis::threshold(t.domain(), 1)));
        assert!(!o.contains(a, &Hypothesis::threshold(t.domain(), 4)));
    }

    #[test]
    fn random_classes_match_brute_force_irreducibility() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..150 {
            let n = rng.gen_range(2..=4);
            let d = dom(n);
            let m = rng.gen_range(2..=8);
            let class =
                HypothesisClass::new(d, (0..m).map(|_| Hypothesis::from_bits(d, rng.gen())))
                    .unwrap();
            for k in 0..=n {
                assert_eq!(
                    is_irreducible(&class, k as u64),
                    !brute_force_reducible(&class, k)
                );
            }
        }
    }
}
