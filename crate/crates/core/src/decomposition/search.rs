use std::collections::{HashMap, VecDeque};

use super::tree::DecompositionTree;
use super::DecompositionParams;
use crate::error::{Error, Result};
use crate::hypothesis::{ClassId, ClassOracle, Domain, Hypothesis, HypothesisClass};

const INF: i32 = i32::MAX;

/// Hard caps for the exact search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_domain: usize,
    pub max_class: usize,
    pub max_expansions: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_domain: 10,
            max_class: 64,
            max_expansions: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub enum EssentialMode {
    #[default]
    Exact,
    /// SOAs of top-dimension leaves of the greedy tree. Not an essential set
    /// in general; flagged on the result.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialSet {
    /// Sorted, distinct.
    pub hypotheses: Vec<Hypothesis>,
    /// For each hypothesis, a dimension-`t` leaf class whose SOA it is.
    pub witnesses: Vec<HypothesisClass>,
    /// The decomposition dimension the members witness.
    pub t: i32,
    pub approximate: bool,
}

impl EssentialSet {
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn contains(&self, h: &Hypothesis) -> bool {
        self.hypotheses.binary_search(h).is_ok()
    }

    pub fn witness(&self, h: &Hypothesis) -> Option<&HypothesisClass> {
        self.hypotheses
            .binary_search(h)
            .ok()
            .map(|i| &self.witnesses[i])
    }

    fn from_pairs(mut pairs: Vec<(Hypothesis, HypothesisClass)>, t: i32, approximate: bool) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (hypotheses, witnesses) = pairs.into_iter().unzip();
        EssentialSet {
            hypotheses,
            witnesses,
            t,
            approximate,
        }
    }
}

#[derive(Default)]
struct Memo {
    base: HashMap<(ClassId, u32), i32>,
    forbid: HashMap<(ClassId, u32), i32>,
}

/// A forbidden top-dimension leaf SOA, used when testing essentialness.
#[derive(Clone, Copy)]
struct Forbid {
    bits: u64,
    t: i32,
}

/// Decomposition engine with a shared class oracle and per-class caches.
/// Reuse one instance across many calls on related classes.
pub struct Decomposer {
    oracle: ClassOracle,
    budget: SearchBudget,
    expansions: u64,
    ddim_cache: HashMap<(ClassId, DecompositionParams), i32>,
    essential_cache: HashMap<(ClassId, DecompositionParams, EssentialMode), EssentialSet>,
}

impl Decomposer {
    pub fn new(domain: Domain) -> Self {
        Self::with_budget(domain, SearchBudget::default())
    }

    pub fn with_budget(domain: Domain, budget: SearchBudget) -> Self {
        Decomposer {
            oracle: ClassOracle::new(domain),
            budget,
            expansions: 0,
            ddim_cache: HashMap::new(),
            essential_cache: HashMap::new(),
        }
    }

    pub fn oracle(&mut self) -> &mut ClassOracle {
        &mut self.oracle
    }

    pub fn budget(&self) -> SearchBudget {
        self.budget
    }

    /// Node expansions spent by the most recent exact search.
    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    fn checked_root(&mut self, class: &HypothesisClass, params: DecompositionParams) -> Result<ClassId> {
        let id = self.oracle.intern(class)?;
        let l = self.oracle.ldim(id);
        if l > params.d as i32 {
            return Err(Error::Parameter(format!(
                "class has Littlestone dimension {l} above d = {}",
                params.d
            )));
        }
        Ok(id)
    }

    /// With `p ≥ |X|` every class of positive dimension is reducible within
    /// budget and every path fits under the leaf depth bound, so the optimum
    /// splits down to singletons.
    fn trivially_zero(&self, params: DecompositionParams) -> bool {
        params.p >= self.oracle.domain().size() as u64
    }

    fn budget_error(&mut self, class: &HypothesisClass, params: DecompositionParams, what: String) -> Error {
        let upper_bound = if class.domain().size() <= 16 {
            self.greedy(class, params).ok().map(|t| t.degree())
        } else {
            None
        };
        Error::BudgetExceeded { what, upper_bound }
    }

    fn check_size(&mut self, class: &HypothesisClass, params: DecompositionParams) -> Result<()> {
        let n = class.domain().size();
        if n > self.budget.max_domain {
            let what = format!("domain size {n} above cap {}", self.budget.max_domain);
            return Err(self.budget_error(class, params, what));
        }
        if class.len() > self.budget.max_class {
            let what = format!("class size {} above cap {}", class.len(), self.budget.max_class);
            return Err(self.budget_error(class, params, what));
        }
        Ok(())
    }

    /// Greedy construction: repeatedly pick a reducible leaf (breadth-first)
    /// and install the restriction path of its shortest witness, following
    /// the leaf's own SOA labels.
    pub fn greedy(&mut self, class: &HypothesisClass, params: DecompositionParams) -> Result<DecompositionTree> {
        let root = self.checked_root(class, params)?;
        let mut tree = DecompositionTree::with_root(params, class.clone(), self.oracle.ldim(root));
        let mut ids = vec![root];
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            let c = ids[node];
            let l = self.oracle.ldim(c);
            if l < 1 {
                continue;
            }
            let k = params.irreducibility_budget(l);
            let Some(witness) = self.oracle.find_reducing_sequence(c, k) else {
                continue;
            };
            let f = self.oracle.soa(c)?;
            let mut cur = node;
            let mut cur_class = c;
            for x in witness {
                let kids = tree.split(&mut self.oracle, cur, x.0);
                let c0 = self.oracle.restrict(cur_class, x.0, false);
                let c1 = self.oracle.restrict(cur_class, x.0, true);
                ids.resize(tree.len(), 0);
                ids[kids[0]] = c0;
                ids[kids[1]] = c1;
                let y = f.value(x.0) as usize;
                queue.push_back(kids[1 - y]);
                cur = kids[y];
                cur_class = ids[cur];
            }
            queue.push_back(cur);
        }
        Ok(tree)
    }

    /// Exact decomposition dimension.
    pub fn ddim(&mut self, class: &HypothesisClass, params: DecompositionParams) -> Result<i32> {
        let root = self.checked_root(class, params)?;
        if let Some(&v) = self.ddim_cache.get(&(root, params)) {
            return Ok(v);
        }
        let v = if self.trivially_zero(params) {
            self.oracle.ldim(root).min(0)
        } else {
            self.check_size(class, params)?;
            self.expansions = 0;
            let mut memo = Memo::default();
            match self.best(params, root, 0, None, &mut memo) {
                Ok(INF) => return Err(Error::Infeasible("no valid decomposition exists".into())),
                Ok(v) => v,
                Err(Error::BudgetExceeded { what, .. }) => {
                    return Err(self.budget_error(class, params, what))
                }
                Err(e) => return Err(e),
            }
        };
        self.ddim_cache.insert((root, params), v);
        Ok(v)
    }

    /// One optimal tree, canonical: a leaf when that is optimal, otherwise the
    /// smallest split point achieving the optimum.
    pub fn optimal_tree(&mut self, class: &HypothesisClass, params: DecompositionParams) -> Result<DecompositionTree> {
        let root = self.checked_root(class, params)?;
        if !self.trivially_zero(params) {
            self.check_size(class, params)?;
        }
        self.expansions = 0;
        let mut memo = Memo::default();
        let mut tree = DecompositionTree::with_root(params, class.clone(), self.oracle.ldim(root));
        match self.build(params, &mut tree, 0, root, &mut memo) {
            Err(Error::BudgetExceeded { what, .. }) => Err(self.budget_error(class, params, what)),
            Err(e) => Err(e),
            Ok(()) => Ok(tree),
        }
    }

    /// Hypotheses that appear as a top-dimension leaf SOA in every optimal tree.
    pub fn essential(
        &mut self,
        class: &HypothesisClass,
        params: DecompositionParams,
        mode: EssentialMode,
    ) -> Result<EssentialSet> {
        let root = self.checked_root(class, params)?;
        if let Some(hit) = self.essential_cache.get(&(root, params, mode)) {
            return Ok(hit.clone());
        }
        let set = self.compute_essential(class, root, params, mode)?;
        self.essential_cache.insert((root, params, mode), set.clone());
        Ok(set)
    }

    fn compute_essential(
        &mut self,
        class: &HypothesisClass,
        root: ClassId,
        params: DecompositionParams,
        mode: EssentialMode,
    ) -> Result<EssentialSet> {
        if class.is_empty() {
            return Ok(EssentialSet::from_pairs(Vec::new(), -1, mode == EssentialMode::Approximate));
        }
        if mode == EssentialMode::Approximate {
            let tree = self.greedy(class, params)?;
            let t = tree.degree();
            let pairs = tree
                .leaf_soas(t)
                .into_iter()
                .map(|(f, id)| (f, tree.node(id).class.clone()))
                .collect();
            return Ok(EssentialSet::from_pairs(pairs, t, true));
        }
        let t = self.ddim(class, params)?;
        if t == 0 {
            // Every degree-0 tree ends in the singletons of the class.
            let pairs = class
                .iter()
                .map(|h| (*h, HypothesisClass::new(class.domain(), [*h]).expect("same domain")))
                .collect();
            return Ok(EssentialSet::from_pairs(pairs, 0, false));
        }
        let tree = self.optimal_tree(class, params)?;
        let candidates = tree.leaf_soas(t);
        self.expansions = 0;
        let mut memo = Memo::default();
        let mut pairs = Vec::new();
        for (f, leaf) in candidates {
            memo.forbid.clear();
            let forbid = Forbid { bits: f.bits(), t };
            let v = match self.best(params, root, 0, Some(forbid), &mut memo) {
                Err(Error::BudgetExceeded { what, .. }) => {
                    return Err(self.budget_error(class, params, what))
                }
                other => other?,
            };
            if v > t {
                pairs.push((f, tree.node(leaf).class.clone()));
            }
        }
        Ok(EssentialSet::from_pairs(pairs, t, false))
    }

    fn leaf_value(&mut self, params: DecompositionParams, c: ClassId, depth: u32, forbid: Option<Forbid>) -> Result<i32> {
        let l = self.oracle.ldim(c);
        if depth as u64 > params.leaf_depth_bound(l) {
            return Ok(INF);
        }
        if !self.oracle.is_irreducible(c, params.irreducibility_budget(l)) {
            return Ok(INF);
        }
        if let Some(fb) = forbid {
            if l == fb.t && self.oracle.soa(c)?.bits() == fb.bits {
                return Ok(INF);
            }
        }
        Ok(l)
    }

    /// Minimum degree over valid subtrees rooted at class `c` placed at
    /// `depth`. Under a forbid, values above `t` are clamped to `t + 1`.
    fn best(
        &mut self,
        params: DecompositionParams,
        c: ClassId,
        depth: u32,
        forbid: Option<Forbid>,
        memo: &mut Memo,
    ) -> Result<i32> {
        if let Some(fb) = forbid {
            let base = self.best(params, c, depth, None, memo)?;
            if base != fb.t {
                return Ok(base.min(fb.t + 1));
            }
            if let Some(&v) = memo.forbid.get(&(c, depth)) {
                return Ok(v);
            }
        } else if let Some(&v) = memo.base.get(&(c, depth)) {
            return Ok(v);
        }

        self.expansions += 1;
        if self.expansions > self.budget.max_expansions {
            return Err(Error::BudgetExceeded {
                what: format!("node expansions above cap {}", self.budget.max_expansions),
                upper_bound: None,
            });
        }

        let l = self.oracle.ldim(c);
        let value = if l < 0 {
            -1
        } else if depth as u64 > params.node_depth_bound(l) {
            INF
        } else {
            let floor = 0;
            let mut incumbent = self.leaf_value(params, c, depth, forbid)?;
            if let Some(fb) = forbid {
                incumbent = incumbent.min(fb.t + 1);
            }
            if incumbent > floor {
                for x in self.oracle.splitting_points(c) {
                    let c0 = self.oracle.restrict(c, x, false);
                    let v0 = self.best(params, c0, depth + 1, forbid, memo)?;
                    if v0 >= incumbent {
                        continue;
                    }
                    let c1 = self.oracle.restrict(c, x, true);
                    let v1 = self.best(params, c1, depth + 1, forbid, memo)?;
                    let v = v0.max(v1);
                    if v < incumbent {
                        incumbent = v;
                        if v <= floor {
                            break;
                        }
                    }
                }
            }
            incumbent
        };
        match forbid {
            Some(_) => memo.forbid.insert((c, depth), value),
            None => memo.base.insert((c, depth), value),
        };
        Ok(value)
    }

    fn build(
        &mut self,
        params: DecompositionParams,
        tree: &mut DecompositionTree,
        node: usize,
        c: ClassId,
        memo: &mut Memo,
    ) -> Result<()> {
        let depth = tree.node(node).depth() as u32;
        let v = self.best(params, c, depth, None, memo)?;
        if v == INF {
            return Err(Error::Infeasible("no valid decomposition exists".into()));
        }
        if v < 0 || self.leaf_value(params, c, depth, None)? == v {
            return Ok(());
        }
        for x in self.oracle.splitting_points(c) {
            let c0 = self.oracle.restrict(c, x, false);
            let v0 = self.best(params, c0, depth + 1, None, memo)?;
            if v0 > v {
                continue;
            }
            let c1 = self.oracle.restrict(c, x, true);
            let v1 = self.best(params, c1, depth + 1, None, memo)?;
            if v0.max(v1) == v {
                let kids = tree.split(&mut self.oracle, node, x);
                self.build(params, tree, kids[0], c0, memo)?;
                self.build(params, tree, kids[1], c1, memo)?;
                return Ok(());
            }
        }
        Err(Error::Infeasible("optimal split not found during reconstruction".into()))
    }
}

pub fn greedy_decomposition(class: &HypothesisClass, params: DecompositionParams) -> Result<DecompositionTree> {
    Decomposer::new(class.domain()).greedy(class, params)
}

pub fn ddim(class: &HypothesisClass, params: DecompositionParams) -> Result<i32> {
    Decomposer::new(class.domain()).ddim(class, params)
}

pub fn optimal_decomposition(class: &HypothesisClass, params: DecompositionParams) -> Result<DecompositionTree> {
    Decomposer::new(class.domain()).optimal_tree(class, params)
}

pub fn essential_hypotheses(
    class: &HypothesisClass,
    params: DecompositionParams,
    mode: EssentialMode,
) -> Result<EssentialSet> {
    Decomposer::new(class.domain()).essential(class, params, mode)
}

/// Littlestone dimension of `{SOA_G : G ⊆ H non-empty, G (d+1)-irreducible}`,
/// by enumerating every subset of `H`. Refuses classes above `cap` members.
pub fn ldim_of_soa_class(class: &HypothesisClass, d: u32, cap: usize) -> Result<i32> {
    if class.len() > cap.min(24) {
        return Err(Error::BudgetExceeded {
            what: format!("class size {} above enumeration cap {}", class.len(), cap.min(24)),
            upper_bound: None,
        });
    }
    let mut oracle = ClassOracle::new(class.domain());
    let members = class.members();
    let mut soas = Vec::new();
    for mask in 1u32..(1u32 << members.len()) {
        let subset = HypothesisClass::new(
            class.domain(),
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, h)| *h),
        )?;
        let g = oracle.intern(&subset)?;
        if oracle.is_irreducible(g, d as u64 + 1) {
            soas.push(oracle.soa(g)?);
        }
    }
    let hat = HypothesisClass::new(class.domain(), soas)?;
    let id = oracle.intern(&hat)?;
    Ok(oracle.ldim(id))
}
