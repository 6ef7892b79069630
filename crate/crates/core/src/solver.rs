//! Exact solvers: branch-and-bound, brute-force oracle, random baseline.
//!
//! The branch-and-bound assigns one `(request, leaf)` slot per search
//! level in a fixed order (request order, then descending vCPU
//! requirement, then leaf index — fail-first). Candidates for a slot
//! are `(instance, node)` pairs ordered by tier preference (fog first
//! when `1 - alpha > alpha`, cloud first otherwise), then node id, then
//! instance index. A deterministic greedy descent seeds the incumbent.
//!
//! The lower bound of a partial assignment adds, to the exactly
//! committed part: per unassigned leaf the cheapest possible processing
//! cost, one license per still-uncovered type, and a makespan fold in
//! which unassigned leaves take their fastest tier and edges to
//! unassigned neighbours take zero delay. Every term under-estimates
//! its final value and the folds are monotone, so the bound is
//! admissible; pruning additionally requires the bound to clear the
//! incumbent by a small epsilon so float reassociation can never prune
//! an exact tie.
//!
//! Parallel runs fan the top-level branches out to worker threads.
//! Branches never share an incumbent and split the node budget evenly,
//! which makes every branch computation — and therefore the reduced
//! result, including under budget exhaustion — identical to the
//! sequential run by construction.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::app::{annotate_leaves, expected_iterations, LeafId, Request, TreeNode};
use crate::error::SolveError;
use crate::eval::{check_feasibility, system_objective, ObjectiveValue, Placement};
use crate::infra::{Infrastructure, Tier, VnfInstanceRef};

/// Outcome classification of a solve run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Search space exhausted; the returned placement is optimal.
    Optimal,
    /// A feasible placement with no optimality claim (random baseline).
    Feasible,
    /// No feasible placement exists.
    Infeasible,
    /// The exploration budget ran out; best incumbent attached if any.
    BudgetExhausted,
}

/// One logged search node for bound audits.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub node_index: u64,
    pub depth: usize,
    /// Candidate indices from the root to this node, `/`-separated.
    pub path: String,
    pub lower_bound: f64,
    pub incumbent: Option<f64>,
}

/// Result of any solver entry point.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub placement: Option<Placement>,
    pub objective: Option<ObjectiveValue>,
    /// Candidate applications performed (excluding the greedy seed).
    pub nodes_explored: u64,
    /// Candidate indices of the returned placement's search path
    /// (exact solver only; empty otherwise).
    pub incumbent_path: Vec<usize>,
    /// Populated when tracing was requested.
    pub trace: Vec<TraceRow>,
}

impl SolveResult {
    pub fn objective_value(&self) -> Option<f64> {
        self.objective.as_ref().map(|o| o.objective)
    }

    pub fn cost_total(&self) -> Option<f64> {
        self.objective.as_ref().map(|o| o.cost)
    }

    pub fn makespan_total(&self) -> Option<f64> {
        self.objective.as_ref().map(|o| o.makespan_sum)
    }

    fn empty(status: SolveStatus) -> Self {
        SolveResult {
            status,
            placement: None,
            objective: None,
            nodes_explored: 0,
            incumbent_path: Vec::new(),
            trace: Vec::new(),
        }
    }
}

/// Tuning knobs for [`solve_exact`].
#[derive(Debug, Clone)]
pub struct SolveParams {
    /// Cap on candidate applications; `None` searches exhaustively.
    /// Split evenly across top-level branches.
    pub node_budget: Option<u64>,
    /// Worker threads for top-level branches; 0 uses the hardware
    /// parallelism. Results are identical for every worker count.
    pub workers: usize,
    /// Record a [`TraceRow`] per explored node.
    pub collect_trace: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            node_budget: None,
            workers: 1,
            collect_trace: false,
        }
    }
}

/// Writes trace rows as CSV (`node_index,depth,path,lower_bound,incumbent`).
pub fn write_trace_csv(rows: &[TraceRow], path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["node_index", "depth", "path", "lower_bound", "incumbent"])?;
    for r in rows {
        w.write_record([
            r.node_index.to_string(),
            r.depth.to_string(),
            r.path.clone(),
            format!("{}", r.lower_bound),
            r.incumbent.map(|v| format!("{v}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- compiled model

/// Structure skeleton with leaf slots, folded over for makespan bounds.
enum Shape {
    Leaf(usize),
    Seq(Vec<Shape>),
    Par(Vec<Shape>),
    Sel(Vec<(f64, Shape)>),
    Loop(f64, Box<Shape>),
}

fn compile_shape(node: &TreeNode, counter: &mut usize) -> Result<Shape, SolveError> {
    Ok(match node {
        TreeNode::Vnf(_) => {
            let s = Shape::Leaf(*counter);
            *counter += 1;
            s
        }
        TreeNode::Seq(cs) => Shape::Seq(
            cs.iter()
                .map(|c| compile_shape(c, counter))
                .collect::<Result<_, _>>()?,
        ),
        TreeNode::Par(cs) => Shape::Par(
            cs.iter()
                .map(|c| compile_shape(c, counter))
                .collect::<Result<_, _>>()?,
        ),
        TreeNode::Sel(cs) => Shape::Sel(
            cs.iter()
                .map(|(p, c)| Ok::<_, SolveError>((*p, compile_shape(c, counter)?)))
                .collect::<Result<_, _>>()?,
        ),
        TreeNode::Loop { q, body } => {
            let it = expected_iterations(*q).map_err(SolveError::Model)?;
            Shape::Loop(it, Box::new(compile_shape(body, counter)?))
        }
    })
}

/// Folds `(processing, communication)` milliseconds over a shape.
fn fold_shape(shape: &Shape, term: &impl Fn(usize) -> (f64, f64)) -> (f64, f64) {
    match shape {
        Shape::Leaf(i) => term(*i),
        Shape::Seq(cs) => cs
            .iter()
            .map(|c| fold_shape(c, term))
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1)),
        Shape::Par(cs) => cs
            .iter()
            .map(|c| fold_shape(c, term))
            .fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1))),
        Shape::Sel(cs) => cs.iter().fold((0.0, 0.0), |a, (p, c)| {
            let b = fold_shape(c, term);
            (a.0 + p * b.0, a.1 + p * b.1)
        }),
        Shape::Loop(it, body) => {
            let b = fold_shape(body, term);
            (it * b.0, it * b.1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    type_idx: usize,
    /// Flattened instance id over (type, instance index).
    iid: usize,
    inst_idx: u32,
    node: usize,
}

struct CompiledLeaf {
    type_idx: usize,
    weight: f64,
    edge_weight: f64,
    pred: Option<usize>,
    succs: Vec<usize>,
}

struct DeviceAttachment {
    /// Total expected device-link cost of entering at this node.
    cost: f64,
    /// Total device-link delay (already traffic-normalized).
    delay_ms: f64,
    /// (link index, unweighted bits) per device link.
    loads: Vec<(usize, f64)>,
}

struct CompiledRequest {
    traffic_bits: f64,
    a_norm: f64,
    leaves: Vec<CompiledLeaf>,
    shape: Shape,
    /// Per node: entry-attachment terms, or `None` when a device link
    /// is missing.
    device: Vec<Option<DeviceAttachment>>,
    min_device_delay: f64,
}

struct Model<'a> {
    infra: &'a Infrastructure,
    requests: &'a [Request],
    alpha: f64,
    node_gamma: Vec<f64>,
    node_cap: Vec<f64>,
    link_cap: Vec<f64>,
    /// `node_link[a][b]` is the direct link's index, if any.
    node_link: Vec<Vec<Option<usize>>>,
    /// Per type: license, capacity, vCPU, instance count, iid offset.
    type_license: Vec<f64>,
    type_capacity: Vec<f64>,
    type_u: Vec<f64>,
    inst_total: usize,
    /// `delay_ms[type][node]`, tier-resolved.
    delay_ms: Vec<Vec<f64>>,
    min_delay_ms: Vec<f64>,
    reqs: Vec<CompiledRequest>,
    req_offset: Vec<usize>,
    /// Search order of global slots.
    order: Vec<(usize, usize)>,
    /// Candidates per search position.
    candidates: Vec<Vec<Candidate>>,
    /// Cheapest processing cost per global slot.
    min_proc_cost: Vec<f64>,
    /// True when some slot has no candidate at all.
    dead_slot: bool,
}

fn type_index_of(infra: &Infrastructure) -> BTreeMap<&str, usize> {
    infra
        .catalog
        .iter()
        .enumerate()
        .map(|(i, t)| (t.type_id.as_str(), i))
        .collect()
}

fn compile<'a>(
    infra: &'a Infrastructure,
    requests: &'a [Request],
    alpha: f64,
) -> Result<Model<'a>, SolveError> {
    let n_nodes = infra.nodes.len();
    let node_gamma: Vec<f64> = infra.nodes.iter().map(|n| n.cost_per_vcpu).collect();
    let node_cap: Vec<f64> = infra.nodes.iter().map(|n| n.usable_vcpu()).collect();
    let link_cap: Vec<f64> = infra.links.iter().map(|l| l.usable_bits()).collect();

    let node_pos: BTreeMap<&str, usize> = infra
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.node_id.as_str(), i))
        .collect();
    let mut node_link = vec![vec![None; n_nodes]; n_nodes];
    for (li, l) in infra.links.iter().enumerate() {
        if let (crate::infra::Endpoint::Node(a), crate::infra::Endpoint::Node(b)) = (&l.a, &l.b) {
            let (ia, ib) = (node_pos[a.as_str()], node_pos[b.as_str()]);
            node_link[ia][ib] = Some(li);
            node_link[ib][ia] = Some(li);
        }
    }

    let type_idx = type_index_of(infra);
    let mut type_inst_offset = Vec::with_capacity(infra.catalog.len());
    let mut inst_total = 0usize;
    for t in &infra.catalog {
        type_inst_offset.push(inst_total);
        inst_total += t.instance_count as usize;
    }
    let delay_ms: Vec<Vec<f64>> = infra
        .catalog
        .iter()
        .map(|t| {
            infra
                .nodes
                .iter()
                .map(|n| match n.tier {
                    Tier::Cloud => t.processing_delay_cloud_ms,
                    Tier::Fog => t.processing_delay_fog_ms,
                })
                .collect()
        })
        .collect();
    let min_delay_ms: Vec<f64> = delay_ms
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();

    // candidate node order: preferred tier, then declared node id order
    let fog_first = (1.0 - alpha) > alpha;
    let mut ordered_nodes: Vec<usize> = (0..n_nodes).collect();
    ordered_nodes.sort_by_key(|&i| {
        let n = &infra.nodes[i];
        let tier_rank = match (n.tier, fog_first) {
            (Tier::Fog, true) | (Tier::Cloud, false) => 0,
            _ => 1,
        };
        (tier_rank, n.node_id.clone())
    });

    let mut reqs = Vec::with_capacity(requests.len());
    let mut req_offset = Vec::with_capacity(requests.len());
    let mut offset = 0usize;
    for r in requests {
        req_offset.push(offset);
        let ann = annotate_leaves(&r.tree).map_err(SolveError::Model)?;
        let mut leaves: Vec<CompiledLeaf> = ann
            .iter()
            .map(|a| {
                let ti = *type_idx.get(a.type_id.as_str()).ok_or_else(|| {
                    SolveError::Model(crate::error::ModelError::UnknownVnfType(
                        a.type_id.to_string(),
                    ))
                })?;
                Ok(CompiledLeaf {
                    type_idx: ti,
                    weight: a.node_weight,
                    edge_weight: a.edge_weight,
                    pred: a.predecessor.map(|p| p.0),
                    succs: Vec::new(),
                })
            })
            .collect::<Result<_, SolveError>>()?;
        for i in 0..leaves.len() {
            if let Some(p) = leaves[i].pred {
                leaves[p].succs.push(i);
            }
        }
        let mut counter = 0usize;
        let shape = compile_shape(&r.tree.root, &mut counter)?;
        let a_norm = r.traffic_bits / infra.delay_unit_bits;

        let device: Vec<Option<DeviceAttachment>> = (0..n_nodes)
            .map(|ni| {
                let mut att = DeviceAttachment {
                    cost: 0.0,
                    delay_ms: 0.0,
                    loads: Vec::new(),
                };
                for d in &r.devices {
                    let found = infra.links.iter().enumerate().find(|(_, l)| {
                        l.joins(
                            &crate::infra::Endpoint::Device(d.clone()),
                            &crate::infra::Endpoint::Node(infra.nodes[ni].node_id.clone()),
                        )
                    });
                    match found {
                        Some((li, l)) => {
                            att.cost += r.traffic_bits * l.cost_per_bit;
                            att.delay_ms += a_norm * l.delay_ms;
                            att.loads.push((li, r.traffic_bits));
                        }
                        None => return None,
                    }
                }
                Some(att)
            })
            .collect();
        let min_device_delay = device
            .iter()
            .flatten()
            .map(|a| a.delay_ms)
            .fold(f64::INFINITY, f64::min);

        reqs.push(CompiledRequest {
            traffic_bits: r.traffic_bits,
            a_norm,
            leaves,
            shape,
            device,
            min_device_delay,
        });
        offset += ann.len();
    }
    let total_slots = offset;

    // search order: request, descending vCPU requirement, leaf index
    let type_u: Vec<f64> = infra
        .catalog
        .iter()
        .map(|t| t.resource_requirement as f64)
        .collect();
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(total_slots);
    for (ri, cr) in reqs.iter().enumerate() {
        let mut slots: Vec<usize> = (0..cr.leaves.len()).collect();
        slots.sort_by(|&a, &b| {
            let ua = type_u[cr.leaves[a].type_idx];
            let ub = type_u[cr.leaves[b].type_idx];
            ub.partial_cmp(&ua).unwrap().then(a.cmp(&b))
        });
        order.extend(slots.into_iter().map(|l| (ri, l)));
    }

    let mut candidates = Vec::with_capacity(order.len());
    let mut min_proc_cost = vec![0.0; total_slots];
    let mut dead_slot = false;
    for &(ri, li) in &order {
        let leaf = &reqs[ri].leaves[li];
        let t = &infra.catalog[leaf.type_idx];
        let u = t.resource_requirement as f64;
        let mut cands = Vec::new();
        let mut min_gamma = f64::INFINITY;
        for &ni in &ordered_nodes {
            if node_cap[ni] + 1e-9 < u {
                continue;
            }
            // entry leaf must reach every device of its request
            if li == 0 && reqs[ri].device[ni].is_none() {
                continue;
            }
            min_gamma = min_gamma.min(node_gamma[ni]);
            for k in 0..t.instance_count {
                cands.push(Candidate {
                    type_idx: leaf.type_idx,
                    iid: type_inst_offset[leaf.type_idx] + k as usize,
                    inst_idx: k,
                    node: ni,
                });
            }
        }
        if cands.is_empty() {
            dead_slot = true;
        }
        min_proc_cost[req_offset[ri] + li] = if min_gamma.is_finite() {
            leaf.weight * u * min_gamma
        } else {
            0.0
        };
        candidates.push(cands);
    }

    Ok(Model {
        infra,
        requests,
        alpha,
        node_gamma,
        node_cap,
        link_cap,
        node_link,
        type_license: infra.catalog.iter().map(|t| t.license_cost).collect(),
        type_capacity: infra
            .catalog
            .iter()
            .map(|t| t.processing_capacity_bits)
            .collect(),
        type_u,
        inst_total,
        delay_ms,
        min_delay_ms,
        reqs,
        req_offset,
        order,
        candidates,
        min_proc_cost,
        dead_slot,
    })
}

// ---------------------------------------------------------------- search state

const CAPACITY_SLACK: f64 = 1e-9;

#[derive(Clone)]
struct State {
    chosen: Vec<Option<Candidate>>,
    inst_node: Vec<Option<usize>>,
    inst_refs: Vec<u32>,
    inst_load: Vec<f64>,
    node_used: Vec<f64>,
    link_load: Vec<f64>,
    type_deployed: Vec<u32>,
    type_unassigned: Vec<u32>,
    cost_committed: f64,
    future_proc_min: f64,
    mk_lb: Vec<f64>,
}

struct Frame {
    slot: usize,
    cand: Candidate,
    deployed_now: bool,
    link_deltas: Vec<(usize, f64)>,
    cost_delta: f64,
    proc_min_delta: f64,
    req_idx: usize,
    mk_old: f64,
}

impl State {
    fn new(m: &Model<'_>) -> State {
        let total_slots: usize = m.reqs.iter().map(|r| r.leaves.len()).sum();
        let mut type_unassigned = vec![0u32; m.infra.catalog.len()];
        for r in &m.reqs {
            for l in &r.leaves {
                type_unassigned[l.type_idx] += 1;
            }
        }
        let mut st = State {
            chosen: vec![None; total_slots],
            inst_node: vec![None; m.inst_total],
            inst_refs: vec![0; m.inst_total],
            inst_load: vec![0.0; m.inst_total],
            node_used: vec![0.0; m.infra.nodes.len()],
            link_load: vec![0.0; m.infra.links.len()],
            type_deployed: vec![0; m.infra.catalog.len()],
            type_unassigned,
            cost_committed: 0.0,
            future_proc_min: m.min_proc_cost.iter().sum(),
            mk_lb: vec![0.0; m.reqs.len()],
        };
        for ri in 0..m.reqs.len() {
            st.mk_lb[ri] = st.makespan_bound(m, ri);
        }
        st
    }

    /// Expected-makespan lower bound of one request under the current
    /// partial assignment: exact terms where both endpoints are known,
    /// fastest-tier and zero-delay optimism elsewhere.
    fn makespan_bound(&self, m: &Model<'_>, ri: usize) -> f64 {
        let cr = &m.reqs[ri];
        let base = m.req_offset[ri];
        let term = |li: usize| -> (f64, f64) {
            let leaf = &cr.leaves[li];
            match self.chosen[base + li] {
                Some(c) => {
                    let proc = cr.a_norm * m.delay_ms[leaf.type_idx][c.node];
                    let com = match leaf.pred.and_then(|p| self.chosen[base + p]) {
                        Some(pc) if pc.node != c.node => {
                            match m.node_link[pc.node][c.node] {
                                Some(li) => cr.a_norm * m.infra.links[li].delay_ms,
                                None => 0.0, // unreachable: apply() requires the link
                            }
                        }
                        _ => 0.0,
                    };
                    (proc, com)
                }
                None => (cr.a_norm * m.min_delay_ms[leaf.type_idx], 0.0),
            }
        };
        let (proc, com) = fold_shape(&cr.shape, &term);
        let device = match self.chosen[base] {
            Some(c) => cr.device[c.node]
                .as_ref()
                .map(|a| a.delay_ms)
                .unwrap_or(0.0),
            None => {
                if cr.min_device_delay.is_finite() {
                    cr.min_device_delay
                } else {
                    0.0
                }
            }
        };
        proc + com + device
    }

    /// Gathers the link loads and expected communication cost a
    /// candidate would add; `None` when a needed link is missing.
    fn connection_deltas(
        &self,
        m: &Model<'_>,
        ri: usize,
        li: usize,
        cand: &Candidate,
    ) -> Option<(Vec<(usize, f64)>, f64)> {
        let cr = &m.reqs[ri];
        let base = m.req_offset[ri];
        let mut loads: Vec<(usize, f64)> = Vec::new();
        let mut cost = 0.0;
        let add = |link: usize, bits: f64, loads: &mut Vec<(usize, f64)>| {
            if let Some(e) = loads.iter_mut().find(|(l, _)| *l == link) {
                e.1 += bits;
            } else {
                loads.push((link, bits));
            }
        };
        let leaf = &cr.leaves[li];
        if let Some(p) = leaf.pred {
            if let Some(pc) = self.chosen[base + p] {
                if pc.node != cand.node {
                    let link = m.node_link[pc.node][cand.node]?;
                    add(link, cr.traffic_bits, &mut loads);
                    cost += leaf.edge_weight * cr.traffic_bits * m.infra.links[link].cost_per_bit;
                }
            }
        }
        for &s in &leaf.succs {
            if let Some(sc) = self.chosen[base + s] {
                if sc.node != cand.node {
                    let link = m.node_link[cand.node][sc.node]?;
                    add(link, cr.traffic_bits, &mut loads);
                    cost += cr.leaves[s].edge_weight
                        * cr.traffic_bits
                        * m.infra.links[link].cost_per_bit;
                }
            }
        }
        if li == 0 {
            let att = cr.device[cand.node].as_ref()?;
            for &(link, bits) in &att.loads {
                add(link, bits, &mut loads);
            }
            cost += att.cost;
        }
        Some((loads, cost))
    }

    /// Full feasibility check of a candidate against the current state.
    fn candidate_ok(&self, m: &Model<'_>, pos: usize, cand: &Candidate) -> bool {
        let (ri, li) = m.order[pos];
        let u = m.type_u[cand.type_idx];
        match self.inst_node[cand.iid] {
            Some(n) => {
                if n != cand.node {
                    return false;
                }
            }
            None => {
                // instance indices are interchangeable: use them in order
                if cand.inst_idx > 0 && self.inst_node[cand.iid - 1].is_none() {
                    return false;
                }
                if self.node_used[cand.node] + u > m.node_cap[cand.node] + CAPACITY_SLACK {
                    return false;
                }
            }
        }
        if self.inst_load[cand.iid] + m.reqs[ri].traffic_bits
            > m.type_capacity[cand.type_idx] + CAPACITY_SLACK
        {
            return false;
        }
        match self.connection_deltas(m, ri, li, cand) {
            None => false,
            Some((loads, _)) => loads
                .iter()
                .all(|&(l, bits)| self.link_load[l] + bits <= m.link_cap[l] + CAPACITY_SLACK),
        }
    }

    fn apply(&mut self, m: &Model<'_>, pos: usize, cand: Candidate) -> Frame {
        let (ri, li) = m.order[pos];
        let slot = m.req_offset[ri] + li;
        let cr = &m.reqs[ri];
        let leaf = &cr.leaves[li];
        let (link_deltas, comm_cost) = self
            .connection_deltas(m, ri, li, &cand)
            .expect("apply() follows a candidate_ok() check");

        let mut cost_delta =
            leaf.weight * m.node_gamma[cand.node] * m.type_u[cand.type_idx] + comm_cost;
        let deployed_now = self.inst_node[cand.iid].is_none();
        if deployed_now {
            self.inst_node[cand.iid] = Some(cand.node);
            self.node_used[cand.node] += m.type_u[cand.type_idx];
            self.type_deployed[cand.type_idx] += 1;
            cost_delta += m.type_license[cand.type_idx];
        }
        self.inst_refs[cand.iid] += 1;
        self.inst_load[cand.iid] += cr.traffic_bits;
        for &(l, bits) in &link_deltas {
            self.link_load[l] += bits;
        }
        self.chosen[slot] = Some(cand);
        self.type_unassigned[cand.type_idx] -= 1;
        self.cost_committed += cost_delta;
        let proc_min_delta = m.min_proc_cost[slot];
        self.future_proc_min -= proc_min_delta;
        let mk_old = self.mk_lb[ri];
        self.mk_lb[ri] = self.makespan_bound(m, ri);
        Frame {
            slot,
            cand,
            deployed_now,
            link_deltas,
            cost_delta,
            proc_min_delta,
            req_idx: ri,
            mk_old,
        }
    }

    fn undo(&mut self, m: &Model<'_>, f: Frame) {
        self.mk_lb[f.req_idx] = f.mk_old;
        self.future_proc_min += f.proc_min_delta;
        self.cost_committed -= f.cost_delta;
        self.type_unassigned[f.cand.type_idx] += 1;
        self.chosen[f.slot] = None;
        for &(l, bits) in &f.link_deltas {
            self.link_load[l] -= bits;
        }
        self.inst_load[f.cand.iid] -= m.reqs[f.req_idx].traffic_bits;
        self.inst_refs[f.cand.iid] -= 1;
        if f.deployed_now {
            self.inst_node[f.cand.iid] = None;
            self.node_used[f.cand.node] -= m.type_u[f.cand.type_idx];
            self.type_deployed[f.cand.type_idx] -= 1;
        }
    }

    /// Admissible lower bound on the objective of any completion.
    fn bound(&self, m: &Model<'_>) -> f64 {
        let mut future_licenses = 0.0;
        for t in 0..m.type_license.len() {
            if self.type_deployed[t] == 0 && self.type_unassigned[t] > 0 {
                future_licenses += m.type_license[t];
            }
        }
        let cost = self.cost_committed + self.future_proc_min + future_licenses;
        let mk: f64 = self.mk_lb.iter().sum();
        m.alpha * cost + (1.0 - m.alpha) * mk
    }

    fn materialize(&self, m: &Model<'_>) -> Placement {
        let mut p = Placement::default();
        for (ri, r) in m.requests.iter().enumerate() {
            let base = m.req_offset[ri];
            for li in 0..m.reqs[ri].leaves.len() {
                let c = self.chosen[base + li].expect("complete assignment");
                let inst = VnfInstanceRef {
                    type_id: m.infra.catalog[c.type_idx].type_id.clone(),
                    instance_index: c.inst_idx,
                };
                let node = m.infra.nodes[c.node].node_id.clone();
                p.deployed.insert((inst.clone(), node.clone()));
                p.assignments
                    .insert((r.request_id.clone(), LeafId(li)), (inst, node));
            }
        }
        p
    }
}

// ---------------------------------------------------------------- search driver

/// Pruning requires clearing the incumbent by this margin, so float
/// reassociation between the incremental and recomputed objective can
/// never prune an exact tie.
fn prune_epsilon(best: f64) -> f64 {
    1e-7 + 1e-9 * best.abs()
}

#[derive(Clone)]
struct Incumbent {
    value: f64,
    placement: Placement,
    objective: ObjectiveValue,
    path: Vec<usize>,
}

struct BranchCtx<'m, 'a> {
    m: &'m Model<'a>,
    best: Option<Incumbent>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    trace: Option<Vec<TraceRow>>,
    path: Vec<usize>,
}

impl BranchCtx<'_, '_> {
    fn complete(&mut self, st: &State) {
        let inc_value = self.bound_exact(st);
        if let Some(b) = &self.best {
            if inc_value >= b.value + prune_epsilon(b.value) {
                return;
            }
        }
        let placement = st.materialize(self.m);
        let objective = system_objective(&placement, self.m.requests, self.m.infra, self.m.alpha)
            .expect("search state only materializes evaluable placements");
        let better = match &self.best {
            Some(b) => objective.objective < b.value,
            None => true,
        };
        if better {
            self.best = Some(Incumbent {
                value: objective.objective,
                placement,
                objective,
                path: self.path.clone(),
            });
        }
    }

    fn bound_exact(&self, st: &State) -> f64 {
        st.bound(self.m)
    }

    fn dfs(&mut self, st: &mut State, pos: usize) {
        if self.exhausted {
            return;
        }
        if pos == self.m.order.len() {
            self.complete(st);
            return;
        }
        for ci in 0..self.m.candidates[pos].len() {
            let cand = self.m.candidates[pos][ci];
            if !st.candidate_ok(self.m, pos, &cand) {
                continue;
            }
            let frame = st.apply(self.m, pos, cand);
            self.nodes += 1;
            self.path.push(ci);
            let lb = st.bound(self.m);
            if let Some(rows) = &mut self.trace {
                rows.push(TraceRow {
                    node_index: self.nodes,
                    depth: pos + 1,
                    path: join_path(&self.path),
                    lower_bound: lb,
                    incumbent: self.best.as_ref().map(|b| b.value),
                });
            }
            let prune = match &self.best {
                Some(b) => lb >= b.value + prune_epsilon(b.value),
                None => false,
            };
            if !prune {
                self.dfs(st, pos + 1);
            }
            self.path.pop();
            st.undo(self.m, frame);
            if self.nodes >= self.budget {
                self.exhausted = true;
            }
            if self.exhausted {
                return;
            }
        }
    }
}

fn join_path(path: &[usize]) -> String {
    path.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

/// Deterministic greedy descent: first feasible candidate per slot.
fn greedy_seed(m: &Model<'_>) -> Option<Incumbent> {
    let mut st = State::new(m);
    let mut path = Vec::with_capacity(m.order.len());
    for pos in 0..m.order.len() {
        let ci = (0..m.candidates[pos].len())
            .find(|&ci| st.candidate_ok(m, pos, &m.candidates[pos][ci]))?;
        st.apply(m, pos, m.candidates[pos][ci]);
        path.push(ci);
    }
    let placement = st.materialize(m);
    let objective = system_objective(&placement, m.requests, m.infra, m.alpha).ok()?;
    Some(Incumbent {
        value: objective.objective,
        placement,
        objective,
        path,
    })
}

struct BranchOutcome {
    branch: usize,
    best: Option<Incumbent>,
    nodes: u64,
    exhausted: bool,
    trace: Vec<TraceRow>,
}

fn run_branch(
    m: &Model<'_>,
    base: &State,
    branch: usize,
    seed: &Option<Incumbent>,
    budget: u64,
    collect_trace: bool,
) -> BranchOutcome {
    let cand = m.candidates[0][branch];
    let mut st = base.clone();
    if !st.candidate_ok(m, 0, &cand) {
        return BranchOutcome {
            branch,
            best: None,
            nodes: 0,
            exhausted: false,
            trace: Vec::new(),
        };
    }
    let mut ctx = BranchCtx {
        m,
        best: seed.clone(),
        nodes: 0,
        budget,
        exhausted: false,
        trace: collect_trace.then(Vec::new),
        path: Vec::new(),
    };
    st.apply(m, 0, cand);
    ctx.nodes += 1;
    ctx.path.push(branch);
    let lb = st.bound(m);
    if let Some(rows) = &mut ctx.trace {
        rows.push(TraceRow {
            node_index: ctx.nodes,
            depth: 1,
            path: join_path(&ctx.path),
            lower_bound: lb,
            incumbent: ctx.best.as_ref().map(|b| b.value),
        });
    }
    let prune = match &ctx.best {
        Some(b) => lb >= b.value + prune_epsilon(b.value),
        None => false,
    };
    if !prune && ctx.nodes < ctx.budget {
        ctx.dfs(&mut st, 1);
    } else if ctx.nodes >= ctx.budget {
        ctx.exhausted = true;
    }
    // a seeded incumbent that was never improved belongs to no branch
    let improved = match (&ctx.best, seed) {
        (Some(b), Some(s)) => b.value < s.value,
        (Some(_), None) => true,
        (None, _) => false,
    };
    BranchOutcome {
        branch,
        best: improved.then(|| ctx.best.clone().unwrap()),
        nodes: ctx.nodes,
        exhausted: ctx.exhausted,
        trace: ctx.trace.unwrap_or_default(),
    }
}

/// Exact branch-and-bound minimization of
/// `alpha * cost + (1 - alpha) * makespan_sum`.
///
/// Deterministic for fixed inputs: identical placements, node counts
/// and traces for every worker count, with or without a budget.
pub fn solve_exact(
    infra: &Infrastructure,
    requests: &[Request],
    alpha: f64,
    params: &SolveParams,
) -> Result<SolveResult, SolveError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SolveError::AlphaOutOfRange(alpha));
    }
    let m = compile(infra, requests, alpha)?;
    if m.order.is_empty() {
        // no leaves at all: the empty placement is optimal
        let objective = system_objective(&Placement::default(), requests, infra, alpha)
            .map_err(SolveError::Eval)?;
        return Ok(SolveResult {
            status: SolveStatus::Optimal,
            placement: Some(Placement::default()),
            objective: Some(objective),
            nodes_explored: 0,
            incumbent_path: Vec::new(),
            trace: Vec::new(),
        });
    }
    if m.dead_slot || m.candidates[0].is_empty() {
        return Ok(SolveResult::empty(SolveStatus::Infeasible));
    }

    let seed = greedy_seed(&m);
    let base = State::new(&m);
    let branches = m.candidates[0].len();
    let per_branch_budget = match params.node_budget {
        Some(b) => (b / branches as u64).max(1),
        None => u64::MAX,
    };

    let workers = if params.workers == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        params.workers
    }
    .min(branches)
    .max(1);

    let mut outcomes: Vec<BranchOutcome> = if workers <= 1 {
        (0..branches)
            .map(|b| run_branch(&m, &base, b, &seed, per_branch_budget, params.collect_trace))
            .collect()
    } else {
        let mut collected = Vec::with_capacity(branches);
        std::thread::scope(|scope| {
            let m = &m;
            let base = &base;
            let seed = &seed;
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        let mut out = Vec::new();
                        let mut b = w;
                        while b < branches {
                            out.push(run_branch(
                                m,
                                base,
                                b,
                                seed,
                                per_branch_budget,
                                params.collect_trace,
                            ));
                            b += workers;
                        }
                        out
                    })
                })
                .collect();
            for h in handles {
                collected.extend(h.join().expect("solver worker panicked"));
            }
        });
        collected.sort_by_key(|o| o.branch);
        collected
    };

    // deterministic reduction in branch order; strict improvement keeps
    // the first optimum in depth-first order
    let mut best = seed;
    let mut nodes = 0u64;
    let mut exhausted = false;
    let mut trace = Vec::new();
    for o in outcomes.iter_mut() {
        nodes += o.nodes;
        exhausted |= o.exhausted;
        if let Some(b) = o.best.take() {
            let better = match &best {
                Some(cur) => b.value < cur.value,
                None => true,
            };
            if better {
                best = Some(b);
            }
        }
        trace.append(&mut o.trace);
    }
    for (i, row) in trace.iter_mut().enumerate() {
        row.node_index = i as u64 + 1;
    }

    let status = if exhausted {
        SolveStatus::BudgetExhausted
    } else if best.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    Ok(match best {
        Some(b) => SolveResult {
            status,
            placement: Some(b.placement),
            objective: Some(b.objective),
            nodes_explored: nodes,
            incumbent_path: b.path,
            trace,
        },
        None => SolveResult {
            nodes_explored: nodes,
            trace,
            ..SolveResult::empty(status)
        },
    })
}

/// [`solve_exact`] with candidate nodes restricted to one tier.
pub fn solve_restricted(
    infra: &Infrastructure,
    requests: &[Request],
    alpha: f64,
    tier: Tier,
    params: &SolveParams,
) -> Result<SolveResult, SolveError> {
    let restricted = infra.restricted_to(tier);
    solve_exact(&restricted, requests, alpha, params)
}

/// One open leaf slot during exhaustive enumeration: owning request index,
/// leaf, and the candidate (instance, node-index) pairs it may bind to.
type OracleSlot = (usize, LeafId, Vec<(VnfInstanceRef, usize)>);

/// Exhaustive oracle: enumerates every complete assignment in
/// declaration order, filters by the evaluation module's feasibility
/// checker, and returns the minimum. Shares no search machinery with
/// [`solve_exact`] — this is its correctness witness at desk scale.
pub fn solve_bruteforce(
    infra: &Infrastructure,
    requests: &[Request],
    alpha: f64,
    cap: u128,
) -> Result<SolveResult, SolveError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SolveError::AlphaOutOfRange(alpha));
    }
    // candidate lists in plain declaration order, one per (request, leaf)
    let mut slots: Vec<OracleSlot> = Vec::new();
    let mut space: u128 = 1;
    for (ri, r) in requests.iter().enumerate() {
        let ann = annotate_leaves(&r.tree).map_err(SolveError::Model)?;
        for a in &ann {
            let t = infra
                .vnf_type(&a.type_id)
                .ok_or_else(|| {
                    SolveError::Model(crate::error::ModelError::UnknownVnfType(
                        a.type_id.to_string(),
                    ))
                })?;
            let mut cands = Vec::new();
            for k in 0..t.instance_count {
                for n in &infra.nodes {
                    cands.push((
                        VnfInstanceRef {
                            type_id: t.type_id.clone(),
                            instance_index: k,
                        },
                        infra.nodes.iter().position(|x| x.node_id == n.node_id).unwrap(),
                    ));
                }
            }
            space = space.saturating_mul(cands.len() as u128);
            if space > cap {
                return Err(SolveError::SpaceTooLarge { space, cap });
            }
            slots.push((ri, a.leaf, cands));
        }
    }

    let mut counters = vec![0usize; slots.len()];
    let mut best: Option<(f64, Placement, ObjectiveValue)> = None;
    let mut explored = 0u64;
    loop {
        explored += 1;
        let mut p = Placement::default();
        for ((ri, leaf, cands), &ci) in slots.iter().zip(&counters) {
            let (inst, ni) = &cands[ci];
            let node = infra.nodes[*ni].node_id.clone();
            p.deployed.insert((inst.clone(), node.clone()));
            p.assignments
                .insert((requests[*ri].request_id.clone(), *leaf), (inst.clone(), node));
        }
        if check_feasibility(&p, requests, infra).is_empty() {
            let obj = system_objective(&p, requests, infra, alpha).map_err(SolveError::Eval)?;
            let better = match &best {
                Some((v, _, _)) => obj.objective < *v,
                None => true,
            };
            if better {
                best = Some((obj.objective, p, obj));
            }
        }
        // odometer increment
        let mut i = slots.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            counters[i] += 1;
            if counters[i] < slots[i].2.len() {
                break;
            }
            counters[i] = 0;
            if i == 0 {
                i = usize::MAX; // full wrap: enumeration done
                break;
            }
        }
        if slots.is_empty() || i == usize::MAX {
            break;
        }
    }

    Ok(match best {
        Some((_, placement, objective)) => SolveResult {
            status: SolveStatus::Optimal,
            placement: Some(placement),
            objective: Some(objective),
            nodes_explored: explored,
            incumbent_path: Vec::new(),
            trace: Vec::new(),
        },
        None => SolveResult {
            nodes_explored: explored,
            ..SolveResult::empty(SolveStatus::Infeasible)
        },
    })
}

/// Rejection-samples uniform complete assignments until one passes the
/// feasibility checker. Never claims optimality.
pub fn random_feasible(
    infra: &Infrastructure,
    requests: &[Request],
    alpha: f64,
    seed: u64,
    max_tries: u64,
) -> Result<SolveResult, SolveError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SolveError::AlphaOutOfRange(alpha));
    }
    let mut slots: Vec<(usize, LeafId, &crate::app::VnfType)> = Vec::new();
    for (ri, r) in requests.iter().enumerate() {
        let ann = annotate_leaves(&r.tree).map_err(SolveError::Model)?;
        for a in &ann {
            let t = infra.vnf_type(&a.type_id).ok_or_else(|| {
                SolveError::Model(crate::error::ModelError::UnknownVnfType(
                    a.type_id.to_string(),
                ))
            })?;
            slots.push((ri, a.leaf, t));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for tries in 1..=max_tries {
        let mut p = Placement::default();
        for (ri, leaf, t) in &slots {
            let k = rng.random_range(0..t.instance_count);
            let ni = rng.random_range(0..infra.nodes.len());
            let inst = VnfInstanceRef {
                type_id: t.type_id.clone(),
                instance_index: k,
            };
            let node = infra.nodes[ni].node_id.clone();
            p.deployed.insert((inst.clone(), node.clone()));
            p.assignments
                .insert((requests[*ri].request_id.clone(), *leaf), (inst, node));
        }
        if check_feasibility(&p, requests, infra).is_empty() {
            let objective = system_objective(&p, requests, infra, alpha).map_err(SolveError::Eval)?;
            return Ok(SolveResult {
                status: SolveStatus::Feasible,
                placement: Some(p),
                objective: Some(objective),
                nodes_explored: tries,
                incumbent_path: Vec::new(),
                trace: Vec::new(),
            });
        }
    }
    Ok(SolveResult {
        nodes_explored: max_tries,
        ..SolveResult::empty(SolveStatus::BudgetExhausted)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::{RequestId, StructuredTree, TypeId, VnfType};
    use crate::infra::{ComputeNode, DeviceId, Endpoint, Link, LinkClass, NodeId};

    const A: f64 = 640_000.0;

    fn vnf_type(id: &str, u: u32, d_cloud: f64, d_fog: f64) -> VnfType {
        VnfType {
            type_id: TypeId::from(id),
            license_cost: 100.0,
            processing_capacity_bits: 1e7,
            resource_requirement: u,
            instance_count: 1,
            processing_delay_cloud_ms: d_cloud,
            processing_delay_fog_ms: d_fog,
        }
    }

    fn link(a: Endpoint, b: Endpoint, class: LinkClass, cost_per_gb: f64, delay: f64) -> Link {
        Link {
            link_id: format!("{a}__{b}"),
            a,
            b,
            class,
            bandwidth_bits: 1e9,
            cost_per_bit: cost_per_gb / 1e9,
            delay_ms: delay,
            usage_threshold: 1.0,
        }
    }

    /// One cloud and one fog node with one device, fully linked.
    fn tiny_infra(catalog: Vec<VnfType>) -> Infrastructure {
        let c = NodeId::from("c1");
        let f = NodeId::from("f1");
        let d = DeviceId::from("d1");
        Infrastructure {
            nodes: vec![
                ComputeNode {
                    node_id: c.clone(),
                    tier: Tier::Cloud,
                    capacity_vcpu: 8,
                    cost_per_vcpu: 0.1,
                    usage_threshold: 1.0,
                },
                ComputeNode {
                    node_id: f.clone(),
                    tier: Tier::Fog,
                    capacity_vcpu: 3,
                    cost_per_vcpu: 6.0,
                    usage_threshold: 1.0,
                },
            ],
            links: vec![
                link(
                    Endpoint::Node(c.clone()),
                    Endpoint::Node(f.clone()),
                    LinkClass::CloudFog,
                    3.0,
                    20.0,
                ),
                link(
                    Endpoint::Device(d.clone()),
                    Endpoint::Node(c),
                    LinkClass::IotCloud,
                    4.0,
                    25.0,
                ),
                link(Endpoint::Device(d), Endpoint::Node(f), LinkClass::IotFog, 1.0, 1.5),
            ],
            devices: vec![DeviceId::from("d1")],
            catalog,
            delay_unit_bits: A,
        }
    }

    fn request(id: &str, tree: TreeNode) -> Request {
        Request {
            request_id: RequestId::from(id),
            tree: StructuredTree::new(tree),
            traffic_bits: A,
            devices: vec![DeviceId::from("d1")],
        }
    }

    fn node_of<'p>(res: &'p SolveResult, req: &str, leaf: usize) -> &'p str {
        res.placement
            .as_ref()
            .unwrap()
            .assignment(&RequestId::from(req), LeafId(leaf))
            .unwrap()
            .1
            .as_str()
    }

    #[test]
    fn pure_cost_picks_cloud_and_pure_makespan_picks_fog() {
        let infra = tiny_infra(vec![vnf_type("a", 2, 3.12, 0.03)]);
        let reqs = vec![request("r1", TreeNode::Vnf(TypeId::from("a")))];
        let cost = solve_exact(&infra, &reqs, 1.0, &SolveParams::default()).unwrap();
        assert_eq!(cost.status, SolveStatus::Optimal);
        assert_eq!(node_of(&cost, "r1", 0), "c1");
        let fast = solve_exact(&infra, &reqs, 0.0, &SolveParams::default()).unwrap();
        assert_eq!(node_of(&fast, "r1", 0), "f1");
        // cloud: 2 vCPU at $0.1 + license + device link
        assert!((cost.cost_total().unwrap() - 100.20256).abs() < 1e-9);
        // fog: 0.03 ms processing + 1.5 ms device hop
        assert!((fast.makespan_total().unwrap() - 1.53).abs() < 1e-9);
    }

    #[test]
    fn capacity_shortfall_is_reported_infeasible() {
        let infra = tiny_infra(vec![vnf_type("big1", 8, 1.0, 1.0), vnf_type("big2", 8, 1.0, 1.0)]);
        let reqs = vec![request(
            "r1",
            TreeNode::Seq(vec![
                TreeNode::Vnf(TypeId::from("big1")),
                TreeNode::Vnf(TypeId::from("big2")),
            ]),
        )];
        let res = solve_exact(&infra, &reqs, 0.5, &SolveParams::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Infeasible);
        let oracle = solve_bruteforce(&infra, &reqs, 0.5, 10_000).unwrap();
        assert_eq!(oracle.status, SolveStatus::Infeasible);
    }

    #[test]
    fn empty_request_set_is_trivially_optimal() {
        let infra = tiny_infra(vec![vnf_type("a", 1, 1.0, 1.0)]);
        let exact = solve_exact(&infra, &[], 0.5, &SolveParams::default()).unwrap();
        let oracle = solve_bruteforce(&infra, &[], 0.5, 10).unwrap();
        for res in [exact, oracle] {
            assert_eq!(res.status, SolveStatus::Optimal);
            assert_eq!(res.objective_value().unwrap(), 0.0);
            assert!(res.placement.unwrap().assignments.is_empty());
        }
    }

    #[test]
    fn oracle_cap_refuses_oversized_spaces() {
        let infra = tiny_infra(vec![vnf_type("a", 1, 1.0, 1.0), vnf_type("b", 1, 1.0, 1.0)]);
        let reqs = vec![request(
            "r1",
            TreeNode::Seq(vec![
                TreeNode::Vnf(TypeId::from("a")),
                TreeNode::Vnf(TypeId::from("b")),
            ]),
        )];
        let err = solve_bruteforce(&infra, &reqs, 0.5, 3).unwrap_err();
        assert!(matches!(err, SolveError::SpaceTooLarge { space: 4, cap: 3 }));
    }

    #[test]
    fn exact_matches_oracle_on_a_two_request_instance() {
        let infra = tiny_infra(vec![
            vnf_type("a", 2, 3.12, 0.03),
            vnf_type("b", 1, 3.12, 0.03),
            vnf_type("c", 3, 3.12, 0.03),
        ]);
        let reqs = vec![
            request(
                "r1",
                TreeNode::Seq(vec![
                    TreeNode::Vnf(TypeId::from("a")),
                    TreeNode::Sel(vec![
                        (0.4, TreeNode::Vnf(TypeId::from("b"))),
                        (0.6, TreeNode::Vnf(TypeId::from("c"))),
                    ]),
                ]),
            ),
            request(
                "r2",
                TreeNode::Seq(vec![
                    TreeNode::Vnf(TypeId::from("b")),
                    TreeNode::Vnf(TypeId::from("a")),
                ]),
            ),
        ];
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let exact = solve_exact(&infra, &reqs, alpha, &SolveParams::default()).unwrap();
            let oracle = solve_bruteforce(&infra, &reqs, alpha, 100_000).unwrap();
            assert_eq!(exact.status, SolveStatus::Optimal);
            assert_eq!(oracle.status, SolveStatus::Optimal);
            let (e, o) = (exact.objective_value().unwrap(), oracle.objective_value().unwrap());
            assert!((e - o).abs() < 1e-9, "alpha {alpha}: exact {e} vs oracle {o}");
        }
    }

    #[test]
    fn worker_count_never_changes_the_result() {
        let scenario = crate::infra::generate_scenario(0);
        let app1 = &scenario.requests[..1];
        let single = solve_exact(
            &scenario.infra,
            app1,
            0.5,
            &SolveParams {
                workers: 1,
                ..SolveParams::default()
            },
        )
        .unwrap();
        let multi = solve_exact(
            &scenario.infra,
            app1,
            0.5,
            &SolveParams {
                workers: 4,
                ..SolveParams::default()
            },
        )
        .unwrap();
        assert_eq!(single, multi);
        assert_eq!(single.status, SolveStatus::Optimal);

        // identical even when the budget bites mid-search
        let tight = SolveParams {
            node_budget: Some(40),
            workers: 1,
            ..SolveParams::default()
        };
        let a = solve_exact(&scenario.infra, app1, 0.5, &tight).unwrap();
        let b = solve_exact(
            &scenario.infra,
            app1,
            0.5,
            &SolveParams {
                workers: 3,
                ..tight
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.status, SolveStatus::BudgetExhausted);
    }

    #[test]
    fn tier_restriction_dominance_holds_on_the_reference_scenario() {
        let scenario = crate::infra::generate_scenario(0);
        let app1 = &scenario.requests[..1];
        let params = SolveParams::default();
        let hybrid = solve_exact(&scenario.infra, app1, 0.5, &params).unwrap();
        let cloud = solve_restricted(&scenario.infra, app1, 0.5, Tier::Cloud, &params).unwrap();
        let fog = solve_restricted(&scenario.infra, app1, 0.5, Tier::Fog, &params).unwrap();
        let h = hybrid.objective_value().unwrap();
        let c = cloud.objective_value().unwrap();
        let f = fog.objective_value().unwrap();
        assert!(h <= c + 1e-9 && h <= f + 1e-9, "hybrid {h}, cloud {c}, fog {f}");
        assert!(cloud.cost_total().unwrap() <= fog.cost_total().unwrap());
        assert!(fog.makespan_total().unwrap() <= cloud.makespan_total().unwrap());
    }

    #[test]
    fn random_baseline_is_reproducible_and_dominated() {
        let infra = tiny_infra(vec![vnf_type("a", 2, 3.12, 0.03), vnf_type("b", 1, 3.12, 0.03)]);
        let reqs = vec![request(
            "r1",
            TreeNode::Seq(vec![
                TreeNode::Vnf(TypeId::from("a")),
                TreeNode::Vnf(TypeId::from("b")),
            ]),
        )];
        let optimal = solve_exact(&infra, &reqs, 0.5, &SolveParams::default())
            .unwrap()
            .objective_value()
            .unwrap();
        for seed in 0..10 {
            let r1 = random_feasible(&infra, &reqs, 0.5, seed, 1000).unwrap();
            let r2 = random_feasible(&infra, &reqs, 0.5, seed, 1000).unwrap();
            assert_eq!(r1, r2);
            assert_eq!(r1.status, SolveStatus::Feasible);
            assert!(r1.objective_value().unwrap() >= optimal - 1e-9);
        }
    }

    #[test]
    fn random_baseline_reports_exhaustion_when_nothing_fits() {
        let mut infra = tiny_infra(vec![vnf_type("a", 2, 1.0, 1.0)]);
        for n in &mut infra.nodes {
            n.capacity_vcpu = 1;
        }
        let reqs = vec![request("r1", TreeNode::Vnf(TypeId::from("a")))];
        let res = random_feasible(&infra, &reqs, 0.5, 7, 50).unwrap();
        assert_eq!(res.status, SolveStatus::BudgetExhausted);
        assert!(res.placement.is_none());
        assert_eq!(res.nodes_explored, 50);
    }

    #[test]
    fn trace_rows_on_the_winning_path_stay_below_the_optimum() {
        let scenario = crate::infra::generate_scenario(1);
        let app1 = &scenario.requests[..1];
        let res = solve_exact(
            &scenario.infra,
            app1,
            0.5,
            &SolveParams {
                collect_trace: true,
                ..SolveParams::default()
            },
        )
        .unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        let opt = res.objective_value().unwrap();
        assert!(!res.trace.is_empty());
        assert!(!res.incumbent_path.is_empty());
        for d in 1..=res.incumbent_path.len() {
            let prefix = join_path(&res.incumbent_path[..d]);
            let row = res
                .trace
                .iter()
                .find(|r| r.path == prefix)
                .unwrap_or_else(|| panic!("no trace row for winning prefix {prefix}"));
            assert!(
                row.lower_bound <= opt + 1e-6,
                "bound {} exceeds optimum {opt} at {prefix}",
                row.lower_bound
            );
        }
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let infra = tiny_infra(vec![vnf_type("a", 1, 1.0, 1.0)]);
        let reqs = vec![request("r1", TreeNode::Vnf(TypeId::from("a")))];
        assert!(matches!(
            solve_exact(&infra, &reqs, 1.5, &SolveParams::default()),
            Err(SolveError::AlphaOutOfRange(_))
        ));
        assert!(matches!(
            solve_bruteforce(&infra, &reqs, -0.1, 100),
            Err(SolveError::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn shared_instances_are_reused_when_cheaper() {
        // both requests use type `s`; two instances exist, but cost
        // minimization shares one copy on the cloud node
        let mut catalog = vec![vnf_type("s", 2, 3.12, 0.03)];
        catalog[0].instance_count = 2;
        let infra = tiny_infra(catalog);
        let reqs = vec![
            request("r1", TreeNode::Vnf(TypeId::from("s"))),
            request("r2", TreeNode::Vnf(TypeId::from("s"))),
        ];
        let res = solve_exact(&infra, &reqs, 1.0, &SolveParams::default()).unwrap();
        let p = res.placement.as_ref().unwrap();
        assert_eq!(p.deployed.len(), 1, "one shared deployment expected");
        // one license, two processing charges, two device attachments
        assert!((res.cost_total().unwrap() - (100.0 + 2.0 * 0.2 + 2.0 * 0.00256)).abs() < 1e-9);
        let oracle = solve_bruteforce(&infra, &reqs, 1.0, 100_000).unwrap();
        assert!((res.objective_value().unwrap() - oracle.objective_value().unwrap()).abs() < 1e-9);
    }
}
