//! 0/1 linear model of the placement problem, with LP-format exchange.
//!
//! The model mirrors the evaluation module exactly: binary deployment
//! and assignment variables carry the cost coefficients, binary edge
//! variables carry communication terms, and continuous `z` variables
//! realize the component-wise maxima of parallel blocks. Products of
//! assignment pairs are linearized through auxiliary binaries `q`
//! (`q <= a`, `q <= b`, `q >= a + b - 1`, `q >= 0`), the edge variable
//! is lower-bounded by every product and upper-bounded by their sum, so
//! every 0/1 point satisfying the rows prices communication exactly.
//!
//! Conventions that keep the model faithful to the evaluator:
//!
//! * the device edge variable equals the summed entry assignments of a
//!   node (an equality per node and device), because a per-instance
//!   equality would be infeasible whenever a type has several copies;
//! * link capacities accumulate raw per-request traffic, not
//!   probability-weighted traffic — conservative accounting;
//! * no product variables are created for same-node pairs: co-located
//!   neighbours communicate for free, so all edge variables stay 0;
//! * node pairs without a direct link get an exclusion row instead of
//!   product rows, which renders unreachable splits infeasible;
//! * leaf weights inside a parallel branch stay inside that branch's
//!   `z` rows; selection and loop multipliers outside the block scale
//!   the `z` variable where it is referenced.
//!
//! Exported LP text is deterministic; parsing an export and exporting
//! again reproduces the bytes. A CSV manifest maps variable indices to
//! names and human-readable meanings for audits.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::app::{
    annotate_leaves, expected_iterations, LeafAnnotation, LeafId, Request, RequestId, TreeNode,
    TypeId,
};
use crate::error::MilpError;
use crate::eval::Placement;
use crate::infra::{DeviceId, Endpoint, Infrastructure, NodeId, Tier, VnfInstanceRef};

/// Role of a variable in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Instance deployed on a node (binary).
    Deploy,
    /// Request leaf served by an instance on a node (binary).
    Assign,
    /// Inter-VNF edge of a request mapped onto a link (binary).
    Edge,
    /// Entry of a request attached to a device link at a node (binary).
    Device,
    /// Product auxiliary tying an edge variable to an assignment pair
    /// (binary).
    Product,
    /// Component maximum of a parallel block (continuous, >= 0).
    ParMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub meaning: String,
}

/// One linearized product: the variable at `index` must equal
/// `v[source] * v[target]` in any satisfying 0/1 point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Product {
    pub index: usize,
    pub source: usize,
    pub target: usize,
}

/// One parallel block: the variable at `index` is the maximum of the
/// branch expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ParGroup {
    pub index: usize,
    pub branches: Vec<Vec<(usize, f64)>>,
}

/// Dense, bijectively indexed variable families plus the metadata
/// needed to propagate implied auxiliary values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableSpace {
    vars: Vec<Variable>,
    products: Vec<Product>,
    par_groups: Vec<ParGroup>,
    deploy_map: BTreeMap<(TypeId, u32, NodeId), usize>,
    assign_map: BTreeMap<(RequestId, usize, u32, NodeId), usize>,
    assign_info: Vec<(RequestId, usize, TypeId, u32, NodeId, usize)>,
    edge_map: BTreeMap<(RequestId, usize, usize), usize>,
    device_map: BTreeMap<(RequestId, NodeId, DeviceId), usize>,
}

impl VariableSpace {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, index: usize) -> &Variable {
        &self.vars[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Variable> {
        self.vars.iter()
    }

    pub fn count_of(&self, kind: VarKind) -> usize {
        self.vars.iter().filter(|v| v.kind == kind).count()
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn par_groups(&self) -> &[ParGroup] {
        &self.par_groups
    }
}

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

impl Rel {
    fn token(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Ge => ">=",
            Rel::Eq => "=",
        }
    }
}

/// One constraint row: `terms rel rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub family: String,
    pub terms: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

/// Minimization model: `objective` is a dense coefficient vector over
/// the variable space.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: VariableSpace,
    pub constraints: Vec<Row>,
    pub objective: Vec<f64>,
}

impl MilpModel {
    pub fn rows_in_family(&self, family: &str) -> Vec<&Row> {
        self.constraints.iter().filter(|r| r.family == family).collect()
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

// ---------------------------------------------------------------- builder

struct Builder<'a> {
    infra: &'a Infrastructure,
    requests: &'a [Request],
    alpha: f64,
    ann: Vec<Vec<LeafAnnotation>>,
    space: VariableSpace,
    rows: Vec<Row>,
    par_rows: Vec<Row>,
    obj: BTreeMap<usize, f64>,
    family_seq: BTreeMap<&'static str, usize>,
    /// Indices of node-to-node links, ascending.
    node_links: Vec<usize>,
    /// Members of each edge variable's product sum.
    edge_members: BTreeMap<usize, Vec<usize>>,
}

impl<'a> Builder<'a> {
    fn new(
        infra: &'a Infrastructure,
        requests: &'a [Request],
        alpha: f64,
    ) -> Result<Self, MilpError> {
        let ann = requests
            .iter()
            .map(|r| annotate_leaves(&r.tree))
            .collect::<Result<Vec<_>, _>>()
            .map_err(MilpError::Model)?;
        let node_links = infra
            .links
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!((&l.a, &l.b), (Endpoint::Node(_), Endpoint::Node(_))))
            .map(|(i, _)| i)
            .collect();
        Ok(Builder {
            infra,
            requests,
            alpha,
            ann,
            space: VariableSpace::default(),
            rows: Vec::new(),
            par_rows: Vec::new(),
            obj: BTreeMap::new(),
            family_seq: BTreeMap::new(),
            node_links,
            edge_members: BTreeMap::new(),
        })
    }

    fn push_var(&mut self, name: String, kind: VarKind, meaning: String) -> usize {
        let index = self.space.vars.len();
        self.space.vars.push(Variable { name, kind, meaning });
        index
    }

    fn push_row(&mut self, family: &'static str, terms: Vec<(usize, f64)>, rel: Rel, rhs: f64) {
        let mut combined: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, c) in terms {
            *combined.entry(i).or_insert(0.0) += c;
        }
        let terms: Vec<(usize, f64)> =
            combined.into_iter().filter(|(_, c)| *c != 0.0).collect();
        if terms.is_empty() {
            return;
        }
        let seq = self.family_seq.entry(family).or_insert(0);
        let name = format!("{family}_{seq}");
        *seq += 1;
        self.rows.push(Row {
            name,
            family: family.to_string(),
            terms,
            rel,
            rhs,
        });
    }

    fn add_obj(&mut self, index: usize, coeff: f64) {
        if coeff != 0.0 {
            *self.obj.entry(index).or_insert(0.0) += coeff;
        }
    }

    fn link_idx_between(&self, a: &Endpoint, b: &Endpoint) -> Option<usize> {
        self.infra.links.iter().position(|l| l.joins(a, b))
    }

    fn instance_count(&self, t: &TypeId) -> u32 {
        self.infra.vnf_type(t).map(|v| v.instance_count).unwrap_or(0)
    }

    fn type_of(&self, ri: usize, leaf: usize) -> &TypeId {
        &self.ann[ri][leaf].type_id
    }

    // ------------------------------------------------------------ variables

    fn make_variables(&mut self) -> Result<(), MilpError> {
        // deployments: catalog order, copies, nodes in declaration order
        for t in &self.infra.catalog {
            for k in 0..t.instance_count {
                for n in &self.infra.nodes {
                    let name = format!(
                        "xd_{}_{}_{}",
                        sanitize(t.type_id.as_str()),
                        k,
                        sanitize(n.node_id.as_str())
                    );
                    let meaning =
                        format!("deploy {} copy {} on {}", t.type_id, k, n.node_id);
                    let idx = self.push_var(name, VarKind::Deploy, meaning);
                    self.space
                        .deploy_map
                        .insert((t.type_id.clone(), k, n.node_id.clone()), idx);
                }
            }
        }
        // assignments: per leaf, only instances of the leaf's own type
        for (ri, r) in self.requests.iter().enumerate() {
            for leaf in 0..self.ann[ri].len() {
                let t = self.type_of(ri, leaf).clone();
                for k in 0..self.instance_count(&t) {
                    for n in self.infra.nodes.clone() {
                        let name = format!(
                            "xa_{}_{}_{}_{}_{}",
                            sanitize(r.request_id.as_str()),
                            leaf,
                            sanitize(t.as_str()),
                            k,
                            sanitize(n.node_id.as_str())
                        );
                        let meaning = format!(
                            "assign {} leaf {} to {} copy {} on {}",
                            r.request_id, leaf, t, k, n.node_id
                        );
                        let idx = self.push_var(name, VarKind::Assign, meaning);
                        self.space.assign_map.insert(
                            (r.request_id.clone(), leaf, k, n.node_id.clone()),
                            idx,
                        );
                        self.space.assign_info.push((
                            r.request_id.clone(),
                            leaf,
                            t.clone(),
                            k,
                            n.node_id.clone(),
                            idx,
                        ));
                    }
                }
            }
        }
        // inter-VNF edges onto node-to-node links
        for (ri, r) in self.requests.iter().enumerate() {
            for leaf in 0..self.ann[ri].len() {
                let Some(pred) = self.ann[ri][leaf].predecessor else {
                    continue;
                };
                for &li in &self.node_links.clone() {
                    let name = format!(
                        "ye_{}_{}_{}_l{}",
                        sanitize(r.request_id.as_str()),
                        pred.0,
                        leaf,
                        li
                    );
                    let meaning = format!(
                        "edge {} {}->{} rides link {}",
                        r.request_id, pred.0, leaf, self.infra.links[li].link_id
                    );
                    let idx = self.push_var(name, VarKind::Edge, meaning);
                    self.space
                        .edge_map
                        .insert((r.request_id.clone(), leaf, li), idx);
                }
            }
        }
        // device attachments
        for r in self.requests {
            for n in &self.infra.nodes.clone() {
                for d in &r.devices {
                    let name = format!(
                        "yd_{}_{}_{}",
                        sanitize(r.request_id.as_str()),
                        sanitize(n.node_id.as_str()),
                        sanitize(d.as_str())
                    );
                    let meaning = format!(
                        "entry of {} at {} uses the {} device link",
                        r.request_id, n.node_id, d
                    );
                    let idx = self.push_var(name, VarKind::Device, meaning);
                    self.space
                        .device_map
                        .insert((r.request_id.clone(), n.node_id.clone(), d.clone()), idx);
                }
            }
        }
        // products per edge, ordered node pair with a link, instance pair
        for (ri, r) in self.requests.iter().enumerate() {
            for leaf in 0..self.ann[ri].len() {
                let Some(pred) = self.ann[ri][leaf].predecessor else {
                    continue;
                };
                let pred_t = self.type_of(ri, pred.0).clone();
                let leaf_t = self.type_of(ri, leaf).clone();
                for s in self.infra.nodes.clone() {
                    for t in self.infra.nodes.clone() {
                        if s.node_id == t.node_id {
                            continue;
                        }
                        let Some(li) = self.link_idx_between(
                            &Endpoint::Node(s.node_id.clone()),
                            &Endpoint::Node(t.node_id.clone()),
                        ) else {
                            continue;
                        };
                        for i in 0..self.instance_count(&pred_t) {
                            for j in 0..self.instance_count(&leaf_t) {
                                let name = format!(
                                    "q_{}_{}_{}_{}_{}_{}_{}",
                                    sanitize(r.request_id.as_str()),
                                    pred.0,
                                    leaf,
                                    i,
                                    sanitize(s.node_id.as_str()),
                                    j,
                                    sanitize(t.node_id.as_str())
                                );
                                let meaning = format!(
                                    "{} edge {}->{}: copy {} at {} feeds copy {} at {}",
                                    r.request_id, pred.0, leaf, i, s.node_id, j, t.node_id
                                );
                                let idx = self.push_var(name, VarKind::Product, meaning);
                                let source = self.space.assign_map
                                    [&(r.request_id.clone(), pred.0, i, s.node_id.clone())];
                                let target = self.space.assign_map
                                    [&(r.request_id.clone(), leaf, j, t.node_id.clone())];
                                self.space.products.push(Product { index: idx, source, target });
                                let y = self.space.edge_map
                                    [&(r.request_id.clone(), leaf, li)];
                                self.edge_members.entry(y).or_default().push(idx);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------ constraints

    fn make_constraints(&mut self) {
        // node capacity over deployments
        for n in self.infra.nodes.clone() {
            let mut terms = Vec::new();
            for t in &self.infra.catalog.clone() {
                for k in 0..t.instance_count {
                    let idx =
                        self.space.deploy_map[&(t.type_id.clone(), k, n.node_id.clone())];
                    terms.push((idx, t.resource_requirement as f64));
                }
            }
            self.push_row("node_capacity", terms, Rel::Le, n.usable_vcpu());
        }
        // link capacity: raw traffic per mapped edge and device attachment
        for (li, l) in self.infra.links.clone().into_iter().enumerate() {
            let mut terms = Vec::new();
            for (ri, r) in self.requests.iter().enumerate() {
                for leaf in 0..self.ann[ri].len() {
                    if let Some(&y) =
                        self.space.edge_map.get(&(r.request_id.clone(), leaf, li))
                    {
                        terms.push((y, r.traffic_bits));
                    }
                }
                if let (Endpoint::Device(d), Endpoint::Node(n))
                | (Endpoint::Node(n), Endpoint::Device(d)) = (&l.a, &l.b)
                {
                    if let Some(&y) = self.space.device_map.get(&(
                        r.request_id.clone(),
                        n.clone(),
                        d.clone(),
                    )) {
                        terms.push((y, r.traffic_bits));
                    }
                }
            }
            self.push_row("link_capacity", terms, Rel::Le, l.usable_bits());
        }
        // device attachment follows the entry assignment
        for r in self.requests {
            let entry_type = self
                .ann
                .iter()
                .zip(self.requests)
                .find(|(_, rr)| rr.request_id == r.request_id)
                .map(|(a, _)| a[0].type_id.clone())
                .expect("request present");
            for n in self.infra.nodes.clone() {
                for d in &r.devices {
                    let y = self.space.device_map
                        [&(r.request_id.clone(), n.node_id.clone(), d.clone())];
                    let mut terms = vec![(y, 1.0)];
                    for k in 0..self.instance_count(&entry_type) {
                        let xa = self.space.assign_map
                            [&(r.request_id.clone(), 0, k, n.node_id.clone())];
                        terms.push((xa, -1.0));
                    }
                    self.push_row("device_attach", terms, Rel::Eq, 0.0);
                    let has_link = self
                        .link_idx_between(
                            &Endpoint::Device(d.clone()),
                            &Endpoint::Node(n.node_id.clone()),
                        )
                        .is_some();
                    if !has_link {
                        self.push_row("device_forbidden", vec![(y, 1.0)], Rel::Eq, 0.0);
                    }
                }
            }
        }
        // unreachable node pairs exclude the split assignment outright
        for (ri, r) in self.requests.iter().enumerate() {
            for leaf in 0..self.ann[ri].len() {
                let Some(pred) = self.ann[ri][leaf].predecessor else {
                    continue;
                };
                let pred_t = self.type_of(ri, pred.0).clone();
                let leaf_t = self.type_of(ri, leaf).clone();
                for s in self.infra.nodes.clone() {
                    for t in self.infra.nodes.clone() {
                        if s.node_id == t.node_id
                            || self
                                .link_idx_between(
                                    &Endpoint::Node(s.node_id.clone()),
                                    &Endpoint::Node(t.node_id.clone()),
                                )
                                .is_some()
                        {
                            continue;
                        }
                        let mut terms = Vec::new();
                        for i in 0..self.instance_count(&pred_t) {
                            terms.push((
                                self.space.assign_map
                                    [&(r.request_id.clone(), pred.0, i, s.node_id.clone())],
                                1.0,
                            ));
                        }
                        for j in 0..self.instance_count(&leaf_t) {
                            terms.push((
                                self.space.assign_map
                                    [&(r.request_id.clone(), leaf, j, t.node_id.clone())],
                                1.0,
                            ));
                        }
                        self.push_row("route_missing", terms, Rel::Le, 1.0);
                    }
                }
            }
        }
        // five rows per product member, then the edge upper bound
        for p in self.space.products.clone() {
            let y = self
                .edge_members
                .iter()
                .find(|(_, ms)| ms.contains(&p.index))
                .map(|(y, _)| *y)
                .expect("every product belongs to an edge");
            self.push_row("edge_product_src", vec![(p.index, 1.0), (p.source, -1.0)], Rel::Le, 0.0);
            self.push_row("edge_product_dst", vec![(p.index, 1.0), (p.target, -1.0)], Rel::Le, 0.0);
            self.push_row(
                "edge_product_pair",
                vec![(p.index, 1.0), (p.source, -1.0), (p.target, -1.0)],
                Rel::Ge,
                -1.0,
            );
            self.push_row("edge_product_nonneg", vec![(p.index, 1.0)], Rel::Ge, 0.0);
            self.push_row("edge_above_product", vec![(y, 1.0), (p.index, -1.0)], Rel::Ge, 0.0);
        }
        for (y, members) in self.edge_members.clone() {
            let mut terms = vec![(y, 1.0)];
            for m in members {
                terms.push((m, -1.0));
            }
            self.push_row("edge_below_products", terms, Rel::Le, 0.0);
        }
        // per-instance throughput
        for t in self.infra.catalog.clone() {
            for k in 0..t.instance_count {
                let mut terms = Vec::new();
                for (ri, r) in self.requests.iter().enumerate() {
                    for leaf in 0..self.ann[ri].len() {
                        if self.ann[ri][leaf].type_id != t.type_id {
                            continue;
                        }
                        for n in &self.infra.nodes {
                            let xa = self.space.assign_map
                                [&(r.request_id.clone(), leaf, k, n.node_id.clone())];
                            terms.push((xa, r.traffic_bits));
                        }
                    }
                }
                self.push_row("instance_capacity", terms, Rel::Le, t.processing_capacity_bits);
            }
        }
        // an instance sits on at most one node
        for t in self.infra.catalog.clone() {
            for k in 0..t.instance_count {
                let terms: Vec<(usize, f64)> = self
                    .infra
                    .nodes
                    .iter()
                    .map(|n| {
                        (
                            self.space.deploy_map[&(t.type_id.clone(), k, n.node_id.clone())],
                            1.0,
                        )
                    })
                    .collect();
                self.push_row("instance_single_node", terms, Rel::Le, 1.0);
            }
        }
        // every leaf is served exactly once
        for (ri, r) in self.requests.iter().enumerate() {
            for leaf in 0..self.ann[ri].len() {
                let t = self.type_of(ri, leaf).clone();
                let mut terms = Vec::new();
                for k in 0..self.instance_count(&t) {
                    for n in &self.infra.nodes {
                        terms.push((
                            self.space.assign_map
                                [&(r.request_id.clone(), leaf, k, n.node_id.clone())],
                            1.0,
                        ));
                    }
                }
                self.push_row("leaf_assignment", terms, Rel::Eq, 1.0);
            }
        }
        // serving requires the instance deployed on that node
        for info in self.space.assign_info.clone() {
            let (_, _, t, k, n, xa) = info;
            let xd = self.space.deploy_map[&(t, k, n)];
            self.push_row("assign_requires_deploy", vec![(xa, 1.0), (xd, -1.0)], Rel::Le, 0.0);
        }
        // every used type has a deployed instance
        for (ri, r) in self.requests.iter().enumerate() {
            let used: BTreeSet<TypeId> = self.ann[ri].iter().map(|a| a.type_id.clone()).collect();
            for t in used {
                let mut terms = Vec::new();
                for k in 0..self.instance_count(&t) {
                    for n in &self.infra.nodes {
                        terms.push((
                            self.space.deploy_map[&(t.clone(), k, n.node_id.clone())],
                            1.0,
                        ));
                    }
                }
                let _ = r;
                self.push_row("type_coverage", terms, Rel::Ge, 1.0);
            }
        }
    }

    // ------------------------------------------------------------ objective

    fn make_objective(&mut self) -> Result<(), MilpError> {
        let alpha = self.alpha;
        // cost side: processing, licenses, communication, device links
        for info in self.space.assign_info.clone() {
            let (rid, leaf, _, _, node, xa) = info;
            let ri = self.requests.iter().position(|r| r.request_id == rid).unwrap();
            let w = self.ann[ri][leaf].node_weight;
            let n = self.infra.node(&node).expect("node exists");
            let u = self
                .infra
                .vnf_type(self.type_of(ri, leaf))
                .expect("type exists")
                .resource_requirement as f64;
            self.add_obj(xa, alpha * w * n.cost_per_vcpu * u);
        }
        for ((t, _, _), &xd) in self.space.deploy_map.clone().iter() {
            let license = self.infra.vnf_type(t).expect("type exists").license_cost;
            self.add_obj(xd, alpha * license);
        }
        for ((rid, leaf, li), &y) in self.space.edge_map.clone().iter() {
            let ri = self.requests.iter().position(|r| r.request_id == *rid).unwrap();
            let ew = self.ann[ri][*leaf].edge_weight;
            let l = &self.infra.links[*li];
            self.add_obj(y, alpha * ew * self.requests[ri].traffic_bits * l.cost_per_bit);
        }
        for ((rid, node, dev), &y) in self.space.device_map.clone().iter() {
            let ri = self.requests.iter().position(|r| r.request_id == *rid).unwrap();
            let a_bits = self.requests[ri].traffic_bits;
            let a_norm = a_bits / self.infra.delay_unit_bits;
            if let Some(li) = self.link_idx_between(
                &Endpoint::Device(dev.clone()),
                &Endpoint::Node(node.clone()),
            ) {
                let l = &self.infra.links[li];
                self.add_obj(y, alpha * a_bits * l.cost_per_bit);
                self.add_obj(y, (1.0 - alpha) * a_norm * l.delay_ms);
            }
        }
        // makespan side: fold each tree, spawning z variables under Par
        for ri in 0..self.requests.len() {
            let root = self.requests[ri].tree.root.clone();
            let mut counter = 0usize;
            let mut par_seq = 0usize;
            let mut proc = Vec::new();
            let mut com = Vec::new();
            self.walk(ri, &root, 1.0, &mut counter, &mut par_seq, &mut proc, &mut com)?;
            for (idx, c) in proc.into_iter().chain(com) {
                self.add_obj(idx, (1.0 - alpha) * c);
            }
        }
        Ok(())
    }

    /// Accumulates makespan expressions relative to the innermost
    /// enclosing parallel branch (or the request root).
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        ri: usize,
        node: &TreeNode,
        mult: f64,
        counter: &mut usize,
        par_seq: &mut usize,
        proc: &mut Vec<(usize, f64)>,
        com: &mut Vec<(usize, f64)>,
    ) -> Result<(), MilpError> {
        match node {
            TreeNode::Vnf(_) => {
                let leaf = *counter;
                *counter += 1;
                let rid = self.requests[ri].request_id.clone();
                let a_norm = self.requests[ri].traffic_bits / self.infra.delay_unit_bits;
                let t = self.type_of(ri, leaf).clone();
                let vt = self.infra.vnf_type(&t).expect("type exists").clone();
                for k in 0..vt.instance_count {
                    for n in self.infra.nodes.clone() {
                        let xa =
                            self.space.assign_map[&(rid.clone(), leaf, k, n.node_id.clone())];
                        let d = match n.tier {
                            Tier::Cloud => vt.processing_delay_cloud_ms,
                            Tier::Fog => vt.processing_delay_fog_ms,
                        };
                        proc.push((xa, mult * a_norm * d));
                    }
                }
                if self.ann[ri][leaf].predecessor.is_some() {
                    for &li in &self.node_links.clone() {
                        let y = self.space.edge_map[&(rid.clone(), leaf, li)];
                        com.push((y, mult * a_norm * self.infra.links[li].delay_ms));
                    }
                }
            }
            TreeNode::Seq(cs) => {
                for c in cs {
                    self.walk(ri, c, mult, counter, par_seq, proc, com)?;
                }
            }
            TreeNode::Sel(cs) => {
                for (p, c) in cs {
                    self.walk(ri, c, mult * p, counter, par_seq, proc, com)?;
                }
            }
            TreeNode::Loop { q, body } => {
                let it = expected_iterations(*q).map_err(MilpError::Model)?;
                self.walk(ri, body, mult * it, counter, par_seq, proc, com)?;
            }
            TreeNode::Par(cs) => {
                let rid = sanitize(self.requests[ri].request_id.as_str());
                let seq = *par_seq;
                *par_seq += 1;
                let z_proc = self.push_var(
                    format!("z_{rid}_p{seq}_proc"),
                    VarKind::ParMax,
                    format!(
                        "processing makespan of parallel block {seq} in {}",
                        self.requests[ri].request_id
                    ),
                );
                let z_com = self.push_var(
                    format!("z_{rid}_p{seq}_com"),
                    VarKind::ParMax,
                    format!(
                        "communication makespan of parallel block {seq} in {}",
                        self.requests[ri].request_id
                    ),
                );
                let mut proc_branches = Vec::new();
                let mut com_branches = Vec::new();
                for c in cs {
                    let mut bp = Vec::new();
                    let mut bc = Vec::new();
                    self.walk(ri, c, 1.0, counter, par_seq, &mut bp, &mut bc)?;
                    proc_branches.push(bp);
                    com_branches.push(bc);
                }
                for (z, branches) in [(z_proc, &proc_branches), (z_com, &com_branches)] {
                    for b in branches.iter() {
                        let mut terms = vec![(z, 1.0)];
                        for &(i, c) in b {
                            terms.push((i, -c));
                        }
                        let seq = self.family_seq.entry("par_branch").or_insert(0);
                        let name = format!("par_branch_{seq}");
                        *seq += 1;
                        self.par_rows.push(Row {
                            name,
                            family: "par_branch".to_string(),
                            terms,
                            rel: Rel::Ge,
                            rhs: 0.0,
                        });
                    }
                    self.space.par_groups.push(ParGroup {
                        index: z,
                        branches: branches.clone(),
                    });
                }
                proc.push((z_proc, mult));
                com.push((z_com, mult));
            }
        }
        Ok(())
    }

    fn finish(mut self) -> MilpModel {
        self.rows.append(&mut self.par_rows);
        let mut objective = vec![0.0; self.space.vars.len()];
        for (i, c) in self.obj {
            objective[i] = c;
        }
        MilpModel {
            variables: self.space,
            constraints: self.rows,
            objective,
        }
    }
}

/// Builds the full 0/1 model for the blend weight `alpha`.
pub fn build_model(
    infra: &Infrastructure,
    requests: &[Request],
    alpha: f64,
) -> Result<MilpModel, MilpError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(MilpError::AlphaOutOfRange(alpha));
    }
    let mut b = Builder::new(infra, requests, alpha)?;
    b.make_variables()?;
    b.make_constraints();
    b.make_objective()?;
    Ok(b.finish())
}

// ---------------------------------------------------------------- evaluation

/// Overwrites auxiliary entries with their implied values: products
/// become the product of their parents, parallel maxima become the
/// largest branch expression (at least 0).
fn propagate(model: &MilpModel, v: &mut [f64]) {
    for p in &model.variables.products {
        v[p.index] = v[p.source] * v[p.target];
    }
    for g in &model.variables.par_groups {
        v[g.index] = g
            .branches
            .iter()
            .map(|b| b.iter().map(|&(i, c)| c * v[i]).sum::<f64>())
            .fold(0.0, f64::max);
    }
}

/// Objective value of an assignment vector after propagating implied
/// auxiliary values.
pub fn objective_at(model: &MilpModel, vector: &[f64]) -> Result<f64, MilpError> {
    if vector.len() != model.variables.len() {
        return Err(MilpError::DimensionMismatch {
            expected: model.variables.len(),
            got: vector.len(),
        });
    }
    let mut w = vector.to_vec();
    propagate(model, &mut w);
    Ok(model.objective.iter().zip(&w).map(|(c, x)| c * x).sum())
}

/// Names of the constraint rows an assignment vector violates.
pub fn violated_rows(model: &MilpModel, vector: &[f64], tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    for row in &model.constraints {
        let lhs: f64 = row.terms.iter().map(|&(i, c)| c * vector[i]).sum();
        let slack = tol * (1.0 + row.rhs.abs());
        let violated = match row.rel {
            Rel::Le => lhs > row.rhs + slack,
            Rel::Ge => lhs < row.rhs - slack,
            Rel::Eq => (lhs - row.rhs).abs() > slack,
        };
        if violated {
            out.push(row.name.clone());
        }
    }
    out
}

/// Encodes a placement as an assignment vector, with auxiliary values
/// propagated.
pub fn encode_placement(
    model: &MilpModel,
    placement: &Placement,
    requests: &[Request],
    infra: &Infrastructure,
) -> Result<Vec<f64>, MilpError> {
    let mut v = vec![0.0; model.variables.len()];
    let missing = |what: String| MilpError::Model(crate::error::ModelError::Invalid(what));
    for (inst, node) in &placement.deployed {
        let idx = model
            .variables
            .deploy_map
            .get(&(inst.type_id.clone(), inst.instance_index, node.clone()))
            .ok_or_else(|| missing(format!("no deployment variable for {inst} on {node}")))?;
        v[*idx] = 1.0;
    }
    for r in requests {
        let ann = annotate_leaves(&r.tree).map_err(MilpError::Model)?;
        for a in &ann {
            let (inst, node) = placement
                .assignment(&r.request_id, a.leaf)
                .ok_or_else(|| missing(format!("{} leaf {} unassigned", r.request_id, a.leaf.0)))?;
            let idx = model
                .variables
                .assign_map
                .get(&(r.request_id.clone(), a.leaf.0, inst.instance_index, node.clone()))
                .ok_or_else(|| {
                    missing(format!("no assignment variable for {} leaf {}", r.request_id, a.leaf.0))
                })?;
            v[*idx] = 1.0;
            if let Some(pred) = a.predecessor {
                let (_, pred_node) = placement
                    .assignment(&r.request_id, pred)
                    .ok_or_else(|| missing(format!("{} leaf {} unassigned", r.request_id, pred.0)))?;
                if pred_node != node {
                    if let Some(li) = infra.links.iter().position(|l| {
                        l.joins(
                            &Endpoint::Node(pred_node.clone()),
                            &Endpoint::Node(node.clone()),
                        )
                    }) {
                        if let Some(&y) = model
                            .variables
                            .edge_map
                            .get(&(r.request_id.clone(), a.leaf.0, li))
                        {
                            v[y] = 1.0;
                        }
                    }
                    // a missing link leaves every edge variable at 0;
                    // the route_missing rows flag the vector instead
                }
            }
        }
        if let Some((_, entry_node)) = placement.assignment(&r.request_id, LeafId(0)) {
            for d in &r.devices {
                if let Some(&y) = model.variables.device_map.get(&(
                    r.request_id.clone(),
                    entry_node.clone(),
                    d.clone(),
                )) {
                    v[y] = 1.0;
                }
            }
        }
    }
    propagate(model, &mut v);
    Ok(v)
}

/// Reads a placement back out of an assignment vector (entries above
/// one half count as set).
pub fn decode_vector(model: &MilpModel, vector: &[f64]) -> Placement {
    let mut p = Placement::default();
    for ((t, k, node), &idx) in &model.variables.deploy_map {
        if vector[idx] > 0.5 {
            p.deployed.insert((
                VnfInstanceRef {
                    type_id: t.clone(),
                    instance_index: *k,
                },
                node.clone(),
            ));
        }
    }
    for (rid, leaf, t, k, node, idx) in &model.variables.assign_info {
        if vector[*idx] > 0.5 {
            p.assignments.insert(
                (rid.clone(), LeafId(*leaf)),
                (
                    VnfInstanceRef {
                        type_id: t.clone(),
                        instance_index: *k,
                    },
                    node.clone(),
                ),
            );
        }
    }
    p
}

// ---------------------------------------------------------------- LP exchange

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn fmt_terms(out: &mut String, terms: &[(usize, f64)], names: &VariableSpace) {
    let mut first = true;
    for &(i, c) in terms {
        if c == 0.0 {
            continue;
        }
        let name = &names.vars[i].name;
        if first {
            if c < 0.0 {
                out.push_str(&format!(" - {} {}", fmt_num(-c), name));
            } else {
                out.push_str(&format!(" {} {}", fmt_num(c), name));
            }
            first = false;
        } else if c < 0.0 {
            out.push_str(&format!(" - {} {}", fmt_num(-c), name));
        } else {
            out.push_str(&format!(" + {} {}", fmt_num(c), name));
        }
    }
}

/// Renders the model as deterministic LP-format text.
pub fn render_lp(model: &MilpModel) -> String {
    let mut s = String::new();
    s.push_str("Minimize\n obj:");
    let obj_terms: Vec<(usize, f64)> = model
        .objective
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (i, *c))
        .collect();
    fmt_terms(&mut s, &obj_terms, &model.variables);
    s.push_str("\nSubject To\n");
    for row in &model.constraints {
        s.push_str(&format!(" {}:", row.name));
        fmt_terms(&mut s, &row.terms, &model.variables);
        s.push_str(&format!(" {} {}\n", row.rel.token(), fmt_num(row.rhs)));
    }
    let continuous: Vec<&Variable> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::ParMax)
        .collect();
    if !continuous.is_empty() {
        s.push_str("Bounds\n");
        for v in continuous {
            s.push_str(&format!(" {} >= 0\n", v.name));
        }
    }
    s.push_str("Binary\n");
    for v in model.variables.iter().filter(|v| v.kind != VarKind::ParMax) {
        s.push_str(&format!(" {}\n", v.name));
    }
    s.push_str("End\n");
    s
}

/// Writes the LP text to a file and returns it.
pub fn export_lp(model: &MilpModel, path: &Path) -> Result<String, MilpError> {
    let text = render_lp(model);
    std::fs::write(path, &text).map_err(|source| MilpError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text)
}

fn kind_from_name(name: &str) -> VarKind {
    match name.split('_').next().unwrap_or("") {
        "xd" => VarKind::Deploy,
        "xa" => VarKind::Assign,
        "ye" => VarKind::Edge,
        "yd" => VarKind::Device,
        "q" => VarKind::Product,
        "z" => VarKind::ParMax,
        _ => VarKind::Deploy,
    }
}

fn parse_terms(
    tokens: &[&str],
    names: &BTreeMap<String, usize>,
    line: usize,
) -> Result<Vec<(usize, f64)>, MilpError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut pending: Option<f64> = None;
    for tok in tokens {
        match *tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            t => {
                if let Some(c) = pending.take() {
                    let idx = *names.get(t).ok_or_else(|| MilpError::Parse {
                        line,
                        message: format!("unknown variable `{t}`"),
                    })?;
                    terms.push((idx, c));
                    sign = 1.0;
                } else {
                    let c: f64 = t.parse().map_err(|_| MilpError::Parse {
                        line,
                        message: format!("expected coefficient, got `{t}`"),
                    })?;
                    pending = Some(sign * c);
                }
            }
        }
    }
    if pending.is_some() {
        return Err(MilpError::Parse {
            line,
            message: "dangling coefficient".to_string(),
        });
    }
    Ok(terms)
}

/// Parses LP text produced by [`render_lp`] back into a model.
///
/// The parsed model supports re-export and plain dot products; the
/// propagation metadata of built models (products, parallel groups) is
/// not represented in LP text, so it is empty here.
pub fn parse_lp(text: &str) -> Result<MilpModel, MilpError> {
    #[derive(PartialEq)]
    enum Section {
        Start,
        Objective,
        Rows,
        Bounds,
        Binary,
        End,
    }
    let lines: Vec<&str> = text.lines().collect();

    // first pass: variable order is Binary section, then Bounds section
    let mut binary_names: Vec<String> = Vec::new();
    let mut bound_names: Vec<String> = Vec::new();
    let mut section = Section::Start;
    for l in &lines {
        match l.trim() {
            "Bounds" => section = Section::Bounds,
            "Binary" => section = Section::Binary,
            "End" => section = Section::End,
            "Minimize" | "Subject To" => section = Section::Start,
            t if section == Section::Binary => binary_names.push(t.to_string()),
            t if section == Section::Bounds => {
                let name = t.split_whitespace().next().unwrap_or("").to_string();
                bound_names.push(name);
            }
            _ => {}
        }
    }
    let mut space = VariableSpace::default();
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    for n in binary_names {
        let idx = space.vars.len();
        names.insert(n.clone(), idx);
        space.vars.push(Variable {
            kind: kind_from_name(&n),
            meaning: n.clone(),
            name: n,
        });
    }
    for n in bound_names {
        let idx = space.vars.len();
        names.insert(n.clone(), idx);
        space.vars.push(Variable {
            kind: VarKind::ParMax,
            meaning: n.clone(),
            name: n,
        });
    }

    // second pass: objective and constraint rows
    let mut objective = vec![0.0; space.vars.len()];
    let mut constraints = Vec::new();
    let mut section = Section::Start;
    for (ln, l) in lines.iter().enumerate() {
        let line_no = ln + 1;
        match l.trim() {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Binary" => {
                section = Section::Binary;
                continue;
            }
            "End" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                let rest = l.trim().strip_prefix("obj:").ok_or_else(|| MilpError::Parse {
                    line: line_no,
                    message: "expected `obj:`".to_string(),
                })?;
                let tokens: Vec<&str> = rest.split_whitespace().collect();
                for (i, c) in parse_terms(&tokens, &names, line_no)? {
                    objective[i] += c;
                }
                section = Section::Rows; // a single objective line
            }
            Section::Rows => {
                let t = l.trim();
                if t.is_empty() {
                    continue;
                }
                let (name, rest) = t.split_once(':').ok_or_else(|| MilpError::Parse {
                    line: line_no,
                    message: "expected `name:`".to_string(),
                })?;
                let tokens: Vec<&str> = rest.split_whitespace().collect();
                if tokens.len() < 2 {
                    return Err(MilpError::Parse {
                        line: line_no,
                        message: "row too short".to_string(),
                    });
                }
                let rel = match tokens[tokens.len() - 2] {
                    "<=" => Rel::Le,
                    ">=" => Rel::Ge,
                    "=" => Rel::Eq,
                    other => {
                        return Err(MilpError::Parse {
                            line: line_no,
                            message: format!("unknown relation `{other}`"),
                        })
                    }
                };
                let rhs: f64 =
                    tokens[tokens.len() - 1].parse().map_err(|_| MilpError::Parse {
                        line: line_no,
                        message: "bad right-hand side".to_string(),
                    })?;
                let terms = parse_terms(&tokens[..tokens.len() - 2], &names, line_no)?;
                let family = name
                    .rsplit_once('_')
                    .map(|(f, _)| f.to_string())
                    .unwrap_or_default();
                constraints.push(Row {
                    name: name.to_string(),
                    family,
                    terms,
                    rel,
                    rhs,
                });
            }
            _ => {}
        }
    }
    Ok(MilpModel {
        variables: space,
        constraints,
        objective,
    })
}

/// Writes the audit manifest: one CSV line per variable with its dense
/// index, LP name and meaning.
pub fn write_variable_manifest(model: &MilpModel, path: &Path) -> Result<(), MilpError> {
    let to_io = |e: csv::Error| MilpError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    w.write_record(["index", "name", "meaning"]).map_err(to_io)?;
    for (i, v) in model.variables.iter().enumerate() {
        w.write_record([i.to_string(), v.name.clone(), v.meaning.clone()])
            .map_err(to_io)?;
    }
    w.flush().map_err(|e| MilpError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
