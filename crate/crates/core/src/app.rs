//! Application model: structured trees of VNFs and their expectation
//! annotations.
//!
//! A request's forwarding graph is a structured tree over four
//! combinators:
//!
//! ```text
//!   seq(S1, .., Sk)          components run one after another
//!   par(S1, .., Sk)          components fork and join
//!   sel(p1: S1, .., pk: Sk)  exactly one component runs, branch i with
//!                            probability p_i (sum p_i = 1)
//!   loop(q; S)               S repeats; after each pass it runs again
//!                            with probability q (0 <= q < 1)
//! ```
//!
//! Expectations are folded over this structure. A loop body executes
//! `it(q) = q / (1 - q)` times in expectation, and every leaf carries a
//! `node_weight` equal to the product of the selection probabilities and
//! loop multipliers of its ancestors — the expected number of times the
//! leaf runs per request. The traffic on the edge into a leaf is scaled
//! by the same factor, so `edge_weight == node_weight` of the downstream
//! leaf. Loop back-edges are not modelled separately; their traffic is
//! absorbed into the multiplier on body leaves and body-internal edges.

use std::fmt;

use crate::error::ModelError;

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub String);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
    };
}

id_newtype!(
    /// Identifier of a VNF type in the catalog.
    TypeId
);
id_newtype!(
    /// Identifier of a request (application).
    RequestId
);

pub(crate) use id_newtype;

/// Position of a leaf within a request tree, counted in execution
/// (depth-first) order starting at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafId(pub usize);

impl fmt::Display for LeafId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Catalog entry for one VNF type.
#[derive(Debug, Clone, PartialEq)]
pub struct VnfType {
    pub type_id: TypeId,
    /// License fee per deployed instance, in dollars.
    pub license_cost: f64,
    /// Traffic an instance can absorb per period, in bits.
    pub processing_capacity_bits: f64,
    /// vCPUs one instance occupies on its host node.
    pub resource_requirement: u32,
    /// How many instances of this type may be deployed.
    pub instance_count: u32,
    /// Processing delay on a cloud node, in ms per normalised traffic unit.
    pub processing_delay_cloud_ms: f64,
    /// Processing delay on a fog node, in ms per normalised traffic unit.
    pub processing_delay_fog_ms: f64,
}

/// One node of a structured tree.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// A single VNF of the given type.
    Vnf(TypeId),
    /// Children execute one after another.
    Seq(Vec<TreeNode>),
    /// Children execute concurrently and join.
    Par(Vec<TreeNode>),
    /// Exactly one child executes; entry `i` holds `(p_i, child)`.
    Sel(Vec<(f64, TreeNode)>),
    /// Body repeats with continuation probability `q` after each pass.
    Loop { q: f64, body: Box<TreeNode> },
}

/// A request's forwarding graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredTree {
    pub root: TreeNode,
}

/// Expected number of loop-body executions for continuation
/// probability `q`: `it(q) = q / (1 - q)`.
///
/// The body runs `n` times with probability `(1 - q) q^n`, so the mean
/// is the geometric-series expectation.
pub fn expected_iterations(q: f64) -> Result<f64, ModelError> {
    if !(0.0..1.0).contains(&q) {
        return Err(ModelError::LoopProbabilityOutOfRange(q));
    }
    Ok(q / (1.0 - q))
}

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

impl TreeNode {
    /// Leaf type ids in execution (depth-first) order.
    pub fn leaf_types(&self) -> Vec<&TypeId> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a TypeId>) {
        match self {
            TreeNode::Vnf(t) => out.push(t),
            TreeNode::Seq(cs) | TreeNode::Par(cs) => {
                for c in cs {
                    c.collect_leaves(out);
                }
            }
            TreeNode::Sel(cs) => {
                for (_, c) in cs {
                    c.collect_leaves(out);
                }
            }
            TreeNode::Loop { body, .. } => body.collect_leaves(out),
        }
    }

    /// Structural validation: non-empty combinators, selection
    /// probabilities summing to one, loop probabilities in `[0, 1)`.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            TreeNode::Vnf(_) => Ok(()),
            TreeNode::Seq(cs) | TreeNode::Par(cs) => {
                if cs.is_empty() {
                    return Err(ModelError::EmptyStructure);
                }
                cs.iter().try_for_each(TreeNode::validate)
            }
            TreeNode::Sel(cs) => {
                if cs.is_empty() {
                    return Err(ModelError::EmptyStructure);
                }
                let sum: f64 = cs.iter().map(|(p, _)| *p).sum();
                if cs.iter().any(|(p, _)| !(0.0..=1.0).contains(p))
                    || (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE
                {
                    return Err(ModelError::SelectionProbabilitiesInvalid(sum));
                }
                cs.iter().try_for_each(|(_, c)| c.validate())
            }
            TreeNode::Loop { q, body } => {
                if !(0.0..1.0).contains(q) {
                    return Err(ModelError::LoopProbabilityOutOfRange(*q));
                }
                body.validate()
            }
        }
    }

    /// True if no descendant introduces randomness (no `Sel`, no `Loop`
    /// with positive continuation probability).
    pub fn is_deterministic(&self) -> bool {
        match self {
            TreeNode::Vnf(_) => true,
            TreeNode::Seq(cs) | TreeNode::Par(cs) => cs.iter().all(TreeNode::is_deterministic),
            TreeNode::Sel(_) => false,
            TreeNode::Loop { q, body } => *q == 0.0 && body.is_deterministic(),
        }
    }
}

impl StructuredTree {
    pub fn new(root: TreeNode) -> Self {
        Self { root }
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_types().len()
    }

    pub fn leaf_types(&self) -> Vec<&TypeId> {
        self.root.leaf_types()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.root.validate()
    }
}

/// A placement request: one application instance arriving from a set of
/// access devices with a fixed traffic load.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub request_id: RequestId,
    pub tree: StructuredTree,
    /// Traffic load `A` injected per period, in bits.
    pub traffic_bits: f64,
    /// Devices the first VNF communicates with. Non-empty.
    pub devices: Vec<crate::infra::DeviceId>,
}

impl Request {
    /// The entry leaf: first leaf in execution order.
    pub fn first_leaf(&self) -> LeafId {
        LeafId(0)
    }
}

/// Expectation annotation for one leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafAnnotation {
    pub leaf: LeafId,
    pub type_id: TypeId,
    /// Expected executions of this leaf per request: the product of all
    /// ancestor selection probabilities and loop multipliers.
    pub node_weight: f64,
    /// The leaf whose output feeds this one, if any. Entry leaves of the
    /// whole tree have no predecessor (they receive device traffic).
    pub predecessor: Option<LeafId>,
    /// Multiplier on the traffic of the edge (predecessor -> leaf);
    /// always equals the downstream leaf's `node_weight`.
    pub edge_weight: f64,
}

/// Computes `node_weight`, predecessor and `edge_weight` for every leaf
/// of the tree, in execution order.
///
/// Predecessors follow the linearised control flow:
/// * within a `seq`, the entry leaf of each child follows the exit leaf
///   of the previous child;
/// * all branches of a `par` or `sel` share the block's predecessor, and
///   the block's exit is the exit of its last declared branch;
/// * a loop body's entry follows the node preceding the loop, and the
///   loop's exit is its body's exit.
pub fn annotate_leaves(tree: &StructuredTree) -> Result<Vec<LeafAnnotation>, ModelError> {
    tree.validate()?;
    let mut out = Vec::new();
    walk(&tree.root, 1.0, None, &mut out)?;
    Ok(out)
}

fn walk(
    node: &TreeNode,
    weight: f64,
    pred: Option<LeafId>,
    out: &mut Vec<LeafAnnotation>,
) -> Result<Option<LeafId>, ModelError> {
    match node {
        TreeNode::Vnf(t) => {
            let leaf = LeafId(out.len());
            out.push(LeafAnnotation {
                leaf,
                type_id: t.clone(),
                node_weight: weight,
                predecessor: pred,
                edge_weight: weight,
            });
            Ok(Some(leaf))
        }
        TreeNode::Seq(cs) => {
            let mut cur = pred;
            for c in cs {
                if let Some(exit) = walk(c, weight, cur, out)? {
                    cur = Some(exit);
                }
            }
            Ok(cur)
        }
        TreeNode::Par(cs) => {
            let mut exit = None;
            for c in cs {
                if let Some(e) = walk(c, weight, pred, out)? {
                    exit = Some(e);
                }
            }
            Ok(exit)
        }
        TreeNode::Sel(cs) => {
            let mut exit = None;
            for (p, c) in cs {
                if let Some(e) = walk(c, weight * p, pred, out)? {
                    exit = Some(e);
                }
            }
            Ok(exit)
        }
        TreeNode::Loop { q, body } => {
            let it = expected_iterations(*q)?;
            walk(body, weight * it, pred, out)
        }
    }
}

/// One problem found by [`validate_request`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Checks a request against a VNF catalog. Returns every violation
/// found; an empty list means the request is valid.
pub fn validate_request(request: &Request, catalog: &[VnfType]) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    if let Err(e) = request.tree.validate() {
        issues.push(ValidationIssue {
            field: "tree".into(),
            message: e.to_string(),
        });
    }
    for t in request.tree.leaf_types() {
        if !catalog.iter().any(|v| &v.type_id == t) {
            issues.push(ValidationIssue {
                field: "tree".into(),
                message: format!("VNF type `{t}` is not in the catalog"),
            });
        }
    }
    if request.tree.leaf_count() == 0 {
        issues.push(ValidationIssue {
            field: "tree".into(),
            message: "tree has no VNF leaves".into(),
        });
    }
    if request.traffic_bits <= 0.0 || request.traffic_bits.is_nan() {
        issues.push(ValidationIssue {
            field: "traffic_bits".into(),
            message: format!("traffic load must be positive, got {}", request.traffic_bits),
        });
    }
    if request.devices.is_empty() {
        issues.push(ValidationIssue {
            field: "devices".into(),
            message: "request must name at least one access device".into(),
        });
    }
    issues
}
