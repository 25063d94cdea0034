//! `(p, d)`-decomposition trees: construction, validation, the exact
//! decomposition dimension and essential hypotheses.

mod search;
mod tree;

pub use search::{
    ddim, essential_hypotheses, greedy_decomposition, ldim_of_soa_class, optimal_decomposition,
    Decomposer, EssentialMode, EssentialSet, SearchBudget,
};
pub use tree::{
    traverse_with_soa, validate_tree, DecompositionNode, DecompositionTree, NodeId,
    ValidationReport, Violation,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decomposition parameters. `d` bounds the Littlestone dimension of the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub p: u64,
    pub d: u32,
}

fn pow2_saturating(e: u32) -> u64 {
    if e >= 64 {
        u64::MAX
    } else {
        1u64 << e
    }
}

impl DecompositionParams {
    pub fn new(p: u64, d: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::Parameter("p must be positive".into()));
        }
        if d > 62 {
            return Err(Error::Parameter(format!("d = {d} is too large")));
        }
        Ok(DecompositionParams { p, d })
    }

    /// `d - l`, where empty classes use `l = -1`.
    fn gap(&self, ldim: i32) -> u32 {
        (self.d as i64 - ldim.max(-1) as i64).max(0) as u32
    }

    /// Depth allowed for any node whose class has dimension `ldim`:
    /// `p (2^{d-l+1} - 1)`.
    pub fn node_depth_bound(&self, ldim: i32) -> u64 {
        self.p
            .saturating_mul(pow2_saturating(self.gap(ldim) + 1).saturating_sub(1))
    }

    /// Depth allowed for a leaf: `p (2^{d-l} - 1)`.
    pub fn leaf_depth_bound(&self, ldim: i32) -> u64 {
        self.p
            .saturating_mul(pow2_saturating(self.gap(ldim)).saturating_sub(1))
    }

    /// Irreducibility requirement at a leaf: `p 2^{d-l}`.
    pub fn irreducibility_budget(&self, ldim: i32) -> u64 {
        self.p.saturating_mul(pow2_saturating(self.gap(ldim)))
    }

    /// Leaf-count bound `p^d 2^{d^2}`, saturating.
    pub fn leaf_count_bound(&self) -> u64 {
        let mut acc = 1u64;
        for _ in 0..self.d {
            acc = acc.saturating_mul(self.p);
        }
        acc.saturating_mul(pow2_saturating(self.d.saturating_mul(self.d)))
    }
}
