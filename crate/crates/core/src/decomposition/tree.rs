use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::DecompositionParams;
use crate::error::{Error, Result};
use crate::hypothesis::{
    restrict_seq, ClassOracle, DomainPoint, Hypothesis, HypothesisClass, LabeledExample,
    LabeledSequence,
};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionNode {
    /// Split point; absent at leaves.
    pub label: Option<DomainPoint>,
    /// Children along the `(x, 0)` and `(x, 1)` edges.
    pub children: Option<[NodeId; 2]>,
    /// Edge sequence from the root (the node's `S_v`).
    pub path: LabeledSequence,
    pub class: HypothesisClass,
    pub ldim: i32,
}

impl DecompositionNode {
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Arena-backed decomposition tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTree {
    pub params: DecompositionParams,
    nodes: Vec<DecompositionNode>,
}

impl DecompositionTree {
    pub(crate) fn with_root(params: DecompositionParams, class: HypothesisClass, ldim: i32) -> Self {
        DecompositionTree {
            params,
            nodes: vec![DecompositionNode {
                label: None,
                children: None,
                path: LabeledSequence::new(),
                class,
                ldim,
            }],
        }
    }

    /// Turns leaf `id` into an internal node split on `x`; returns the children.
    pub(crate) fn split(&mut self, oracle: &mut ClassOracle, id: NodeId, x: usize) -> [NodeId; 2] {
        debug_assert!(self.nodes[id].is_leaf());
        let parent_class = oracle
            .intern(&self.nodes[id].class)
            .expect("tree classes share the oracle domain");
        let mut kids = [0; 2];
        for (slot, label) in [false, true].into_iter().enumerate() {
            let child = oracle.restrict(parent_class, x, label);
            let mut path = self.nodes[id].path.clone();
            path.push(LabeledExample::new(x, label));
            kids[slot] = self.nodes.len();
            self.nodes.push(DecompositionNode {
                label: None,
                children: None,
                path,
                class: oracle.class(child),
                ldim: oracle.ldim(child),
            });
        }
        self.nodes[id].label = Some(DomainPoint(x));
        self.nodes[id].children = Some(kids);
        kids
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn root_class(&self) -> &HypothesisClass {
        &self.nodes[0].class
    }

    pub fn node(&self, id: NodeId) -> &DecompositionNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node ids in pre-order, `0`-edge child first.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            out.push(id);
            if let Some([zero, one]) = self.nodes[id].children {
                stack.push(one);
                stack.push(zero);
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&id| self.nodes[id].is_leaf())
            .collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Largest leaf dimension; empty leaves do not count. `-1` if every leaf is empty.
    pub fn degree(&self) -> i32 {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| n.ldim)
            .max()
            .unwrap_or(-1)
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth()).max().unwrap_or(0)
    }

    /// SOA hypotheses of the non-empty leaves with dimension `t`, with the leaf class.
    pub fn leaf_soas(&self, t: i32) -> Vec<(Hypothesis, NodeId)> {
        let mut oracle = ClassOracle::new(self.root_class().domain());
        self.leaves()
            .into_iter()
            .filter(|&id| self.nodes[id].ldim == t && !self.nodes[id].class.is_empty())
            .map(|id| {
                let c = oracle.intern(&self.nodes[id].class).expect("same domain");
                (oracle.soa(c).expect("non-empty leaf"), id)
            })
            .collect()
    }

    /// `Φ(u) = (p·2^d − depth(u))^{LDim(H_u)}`, exactly.
    pub fn potential(&self, id: NodeId) -> BigRational {
        let node = &self.nodes[id];
        let base = BigInt::from(self.params.p) * (BigInt::one() << self.params.d)
            - BigInt::from(node.depth());
        let base = BigRational::from_integer(base);
        if node.ldim >= 0 {
            num_traits::pow(base, node.ldim as usize)
        } else {
            num_traits::pow(base.recip(), (-node.ldim) as usize)
        }
    }

    /// Internal nodes whose children's potentials sum above their own.
    pub fn potential_violations(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&id| match self.nodes[id].children {
                Some([a, b]) => self.potential(a) + self.potential(b) > self.potential(id),
                None => false,
            })
            .collect()
    }

    /// Indented pre-order dump: `depth point|LEAF edge ldim` per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.preorder() {
            let n = &self.nodes[id];
            let point = n
                .label
                .map(|x| x.0.to_string())
                .unwrap_or_else(|| "LEAF".into());
            let edge = n
                .path
                .as_slice()
                .last()
                .map(|e| format!("({},{})", e.point.0, e.label as u8))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:indent$}{} {} {} {}",
                "",
                n.depth(),
                point,
                edge,
                n.ldim,
                indent = 2 * n.depth()
            );
        }
        out
    }

    /// Reads a dump back against the root class. Declared dimensions are kept
    /// as written so the validator can flag mismatches.
    pub fn parse_dump(
        text: &str,
        root_class: &HypothesisClass,
        params: DecompositionParams,
    ) -> Result<Self> {
        let mut nodes: Vec<DecompositionNode> = Vec::new();
        // Stack of (node id, depth) along the current root path.
        let mut stack: Vec<NodeId> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fields: Vec<&str> = raw.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line, message };
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let depth: usize = fields[0]
                .parse()
                .map_err(|_| err(format!("bad depth {:?}", fields[0])))?;
            let label = match fields[1] {
                "LEAF" => None,
                p => Some(DomainPoint(
                    p.parse().map_err(|_| err(format!("bad point {p:?}")))?,
                )),
            };
            let ldim: i32 = fields[3]
                .parse()
                .map_err(|_| err(format!("bad ldim {:?}", fields[3])))?;
            if let Some(x) = label {
                root_class.domain().check(x).map_err(|e| err(e.to_string()))?;
            }
            if depth == 0 {
                if !nodes.is_empty() || fields[2] != "-" {
                    return Err(err("malformed root line".into()));
                }
                nodes.push(DecompositionNode {
                    label,
                    children: None,
                    path: LabeledSequence::new(),
                    class: root_class.clone(),
                    ldim,
                });
                stack.push(0);
                continue;
            }
            stack.truncate(depth);
            let Some(&parent) = stack.last() else {
                return Err(err("node without a parent".into()));
            };
            if stack.len() != depth {
                return Err(err("depth jumps by more than one".into()));
            }
            let edge = fields[2]
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .and_then(|s| s.split_once(','))
                .ok_or_else(|| err(format!("bad edge {:?}", fields[2])))?;
            let x: usize = edge
                .0
                .parse()
                .map_err(|_| err(format!("bad edge point {:?}", edge.0)))?;
            let b = match edge.1 {
                "0" => false,
                "1" => true,
                other => return Err(err(format!("bad edge label {other:?}"))),
            };
            if nodes[parent].label != Some(DomainPoint(x)) {
                return Err(err("edge point differs from the parent's split point".into()));
            }
            let mut path = nodes[parent].path.clone();
            path.push(LabeledExample::new(x, b));
            let id = nodes.len();
            let slot = b as usize;
            let kids = nodes[parent].children.get_or_insert([usize::MAX; 2]);
            if kids[slot] != usize::MAX {
                return Err(err("duplicate child edge".into()));
            }
            kids[slot] = id;
            nodes.push(DecompositionNode {
                label,
                children: None,
                class: restrict_seq(root_class, &path)?,
                path,
                ldim,
            });
            stack.push(id);
        }
        if nodes.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "empty tree dump".into(),
            });
        }
        Ok(DecompositionTree { params, nodes })
    }

    /// Follow `(x, f(x))` from the root for at most `step_cap` steps.
    pub fn traverse_with_soa(&self, f: &Hypothesis, step_cap: usize) -> (NodeId, LabeledSequence) {
        let mut id = 0;
        let mut seq = LabeledSequence::new();
        while seq.len() < step_cap {
            let node = &self.nodes[id];
            let (Some(x), Some(kids)) = (node.label, node.children) else {
                break;
            };
            if kids[0] == usize::MAX || kids[1] == usize::MAX {
                break;
            }
            let y = f.value(x.0);
            seq.push(LabeledExample { point: x, label: y });
            id = kids[y as usize];
        }
        (id, seq)
    }
}

/// Use SOA-guided descent through `tree` and return the endpoint plus edges walked.
pub fn traverse_with_soa(
    tree: &DecompositionTree,
    f: &Hypothesis,
    step_cap: usize,
) -> (NodeId, LabeledSequence) {
    tree.traverse_with_soa(f, step_cap)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Structure {
        node: NodeId,
        message: String,
    },
    DimensionExceeded {
        ldim: i32,
        d: u32,
    },
    InternalDepth {
        node: NodeId,
        depth: usize,
        ldim: i32,
        bound: u64,
    },
    LeafDepth {
        node: NodeId,
        depth: usize,
        ldim: i32,
        bound: u64,
    },
    Reducible {
        node: NodeId,
        k: u64,
        witness: Vec<DomainPoint>,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Structure { node, message } => write!(f, "node {node}: {message}"),
            Violation::DimensionExceeded { ldim, d } => {
                write!(f, "root dimension {ldim} exceeds d = {d}")
            }
            Violation::InternalDepth {
                node,
                depth,
                ldim,
                bound,
            } => write!(
                f,
                "node {node}: depth {depth} exceeds node bound {bound} at ldim {ldim}"
            ),
            Violation::LeafDepth {
                node,
                depth,
                ldim,
                bound,
            } => write!(
                f,
                "leaf {node}: depth {depth} exceeds leaf bound {bound} at ldim {ldim}"
            ),
            Violation::Reducible { node, k, witness } => {
                write!(f, "leaf {node}: class is {k}-reducible via {witness:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
    pub nodes_checked: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the depth and irreducibility conditions of a `(p, d)`-decomposition
/// plus the structural invariants, reporting the first violation in pre-order.
pub fn validate_tree(tree: &DecompositionTree, class: &HypothesisClass) -> Result<ValidationReport> {
    if tree.root_class() != class {
        return Err(Error::Parameter(
            "tree root class differs from the class under validation".into(),
        ));
    }
    let params = tree.params;
    let mut oracle = ClassOracle::new(class.domain());
    let root = oracle.intern(class)?;
    let root_dim = oracle.ldim(root);
    let mut report = ValidationReport {
        violation: None,
        nodes_checked: 0,
    };
    if root_dim > params.d as i32 {
        report.violation = Some(Violation::DimensionExceeded {
            ldim: root_dim,
            d: params.d,
        });
        return Ok(report);
    }
    for id in tree.preorder() {
        report.nodes_checked += 1;
        if let Some(v) = check_node(tree, &mut oracle, id) {
            report.violation = Some(v);
            break;
        }
    }
    Ok(report)
}

fn check_node(tree: &DecompositionTree, oracle: &mut ClassOracle, id: NodeId) -> Option<Violation> {
    let node = tree.node(id);
    let params = tree.params;
    let structure = |message: String| Some(Violation::Structure { node: id, message });

    let expected = restrict_seq(tree.root_class(), &node.path).ok()?;
    if expected != node.class {
        return structure("class differs from the root class restricted by the path".into());
    }
    let c = oracle.intern(&node.class).ok()?;
    let dim = oracle.ldim(c);
    if dim != node.ldim {
        return structure(format!("declared ldim {} but class has {dim}", node.ldim));
    }
    match (node.label, node.children) {
        (None, None) => {}
        (Some(x), Some(kids)) => {
            for (slot, &kid) in kids.iter().enumerate() {
                if kid == usize::MAX || kid >= tree.len() {
                    return structure("internal node is missing a child".into());
                }
                let child = tree.node(kid);
                let edge = child.path.as_slice().last();
                let ok = child.path.len() == node.path.len() + 1
                    && child.path.as_slice()[..node.path.len()] == *node.path.as_slice()
                    && edge == Some(&LabeledExample::new(x.0, slot == 1));
                if !ok {
                    return structure(format!("child {kid} is not on edge ({}, {slot})", x.0));
                }
            }
        }
        _ => return structure("label and children disagree".into()),
    }

    let depth = node.depth();
    let bound = params.node_depth_bound(dim);
    if depth as u64 > bound {
        return Some(Violation::InternalDepth {
            node: id,
            depth,
            ldim: dim,
            bound,
        });
    }
    if node.is_leaf() {
        let bound = params.leaf_depth_bound(dim);
        if depth as u64 > bound {
            return Some(Violation::LeafDepth {
                node: id,
                depth,
                ldim: dim,
                bound,
            });
        }
        let k = params.irreducibility_budget(dim);
        if let Some(witness) = oracle.find_reducing_sequence(c, k) {
            return Some(Violation::Reducible {
                node: id,
                k,
                witness,
            });
        }
    }
    None
}
