//! Placement evaluation: expected cost, expected makespan, feasibility.
//!
//! Cost of one request splits into three parts:
//!
//! ```text
//!   processing     sum over leaves of node_weight * gamma_node * vcpu
//!   deployment     one license per distinct instance the request uses
//!   communication  sum over inter-node edges of
//!                      edge_weight * A * cost_per_bit
//!                  plus the device links of the entry VNF, once
//! ```
//!
//! Makespan folds the tree structurally, tracking the processing and
//! communication components separately: sequences add, parallel blocks
//! take the component-wise maximum, selections average by branch
//! probability and loops scale by the expected iteration count. A
//! leaf's term is its processing delay plus the delay of its incoming
//! edge (zero when co-located); device-link delay is added once at the
//! request level.
//!
//! The *system* objective deduplicates deployment: each deployed
//! instance pays its license once even when several requests share it.
//! Per-request breakdowns attribute the full license to every using
//! request, which is what the per-application reports show. Both views
//! are exposed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::app::{annotate_leaves, LeafAnnotation, LeafId, Request, RequestId, TreeNode, TypeId};
use crate::error::EvalError;
use crate::infra::{Endpoint, Infrastructure, NodeId, Tier, VnfInstanceRef};

/// A complete or partial placement decision.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Placement {
    /// Leaf assignments: which instance on which node serves each leaf.
    pub assignments: BTreeMap<(RequestId, LeafId), (VnfInstanceRef, NodeId)>,
    /// Deployed instances. Every assigned pair must appear here; an
    /// instance appears on at most one node.
    pub deployed: BTreeSet<(VnfInstanceRef, NodeId)>,
}

impl Placement {
    pub fn assignment(&self, request: &RequestId, leaf: LeafId) -> Option<&(VnfInstanceRef, NodeId)> {
        self.assignments.get(&(request.clone(), leaf))
    }

    /// Node hosting a leaf, if assigned.
    pub fn node_of(&self, request: &RequestId, leaf: LeafId) -> Option<&NodeId> {
        self.assignment(request, leaf).map(|(_, n)| n)
    }
}

/// Expected monetary cost of one request, in dollars.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub processing: f64,
    pub deployment: f64,
    pub communication: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.processing + self.deployment + self.communication
    }
}

/// Expected makespan of one request, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MakespanBreakdown {
    pub processing_ms: f64,
    pub communication_ms: f64,
}

impl MakespanBreakdown {
    pub fn total_ms(&self) -> f64 {
        self.processing_ms + self.communication_ms
    }
}

fn lookup_assignment<'a>(
    placement: &'a Placement,
    request: &Request,
    leaf: LeafId,
) -> Result<&'a (VnfInstanceRef, NodeId), EvalError> {
    placement
        .assignment(&request.request_id, leaf)
        .ok_or_else(|| EvalError::UnassignedLeaf {
            request: request.request_id.to_string(),
            leaf: leaf.0,
        })
}

fn processing_delay_ms(infra: &Infrastructure, type_id: &TypeId, node: &NodeId) -> Result<f64, EvalError> {
    let t = infra.vnf_type(type_id).ok_or_else(|| EvalError::UnknownReference {
        kind: "VNF type",
        id: type_id.to_string(),
    })?;
    let n = infra.node(node).ok_or_else(|| EvalError::UnknownReference {
        kind: "node",
        id: node.to_string(),
    })?;
    Ok(match n.tier {
        Tier::Cloud => t.processing_delay_cloud_ms,
        Tier::Fog => t.processing_delay_fog_ms,
    })
}

fn link_metric(
    infra: &Infrastructure,
    request: &Request,
    from: &Endpoint,
    to: &Endpoint,
) -> Result<(f64, f64), EvalError> {
    match infra.link_between(from, to)? {
        Some(l) => Ok((l.cost_per_bit, l.delay_ms)),
        None => Err(EvalError::NoRoute {
            request: request.request_id.to_string(),
            from: from.to_string(),
            to: to.to_string(),
        }),
    }
}

/// Expected cost of `request` under `placement`. The placement must
/// cover every leaf of the request.
pub fn cost_of(
    placement: &Placement,
    request: &Request,
    infra: &Infrastructure,
) -> Result<CostBreakdown, EvalError> {
    let ann = annotate_leaves(&request.tree)?;
    let mut out = CostBreakdown::default();
    let mut used: BTreeSet<&(VnfInstanceRef, NodeId)> = BTreeSet::new();

    for a in &ann {
        let pair = lookup_assignment(placement, request, a.leaf)?;
        let (inst, node_id) = pair;
        let node = infra.node(node_id).ok_or_else(|| EvalError::UnknownReference {
            kind: "node",
            id: node_id.to_string(),
        })?;
        let ty = infra
            .vnf_type(&inst.type_id)
            .ok_or_else(|| EvalError::UnknownReference {
                kind: "VNF type",
                id: inst.type_id.to_string(),
            })?;
        out.processing += a.node_weight * node.cost_per_vcpu * ty.resource_requirement as f64;
        used.insert(pair);

        if let Some(pred) = a.predecessor {
            let (_, pred_node) = lookup_assignment(placement, request, pred)?;
            if pred_node != node_id {
                let (cost_per_bit, _) = link_metric(
                    infra,
                    request,
                    &Endpoint::Node(pred_node.clone()),
                    &Endpoint::Node(node_id.clone()),
                )?;
                out.communication += a.edge_weight * request.traffic_bits * cost_per_bit;
            }
        }
    }

    for (inst, _) in used {
        let ty = infra
            .vnf_type(&inst.type_id)
            .ok_or_else(|| EvalError::UnknownReference {
                kind: "VNF type",
                id: inst.type_id.to_string(),
            })?;
        out.deployment += ty.license_cost;
    }

    let (_, first_node) = lookup_assignment(placement, request, request.first_leaf())?;
    for d in &request.devices {
        let (cost_per_bit, _) = link_metric(
            infra,
            request,
            &Endpoint::Device(d.clone()),
            &Endpoint::Node(first_node.clone()),
        )?;
        out.communication += request.traffic_bits * cost_per_bit;
    }
    Ok(out)
}

/// Expected makespan of `request` under `placement`.
pub fn makespan_of(
    placement: &Placement,
    request: &Request,
    infra: &Infrastructure,
) -> Result<MakespanBreakdown, EvalError> {
    let ann = annotate_leaves(&request.tree)?;
    let a_norm = request.traffic_bits / infra.delay_unit_bits;
    let mut counter = 0usize;
    let (proc, com) = fold_makespan(
        &request.tree.root,
        &mut counter,
        &ann,
        placement,
        request,
        infra,
        a_norm,
    )?;

    let (_, first_node) = lookup_assignment(placement, request, request.first_leaf())?;
    let mut device_ms = 0.0;
    for d in &request.devices {
        let (_, delay) = link_metric(
            infra,
            request,
            &Endpoint::Device(d.clone()),
            &Endpoint::Node(first_node.clone()),
        )?;
        device_ms += a_norm * delay;
    }
    Ok(MakespanBreakdown {
        processing_ms: proc,
        communication_ms: com + device_ms,
    })
}

/// Folds (processing, communication) makespan over the tree. `counter`
/// walks the leaves in execution order, matching the annotation order.
fn fold_makespan(
    node: &TreeNode,
    counter: &mut usize,
    ann: &[LeafAnnotation],
    placement: &Placement,
    request: &Request,
    infra: &Infrastructure,
    a_norm: f64,
) -> Result<(f64, f64), EvalError> {
    match node {
        TreeNode::Vnf(_) => {
            let a = &ann[*counter];
            *counter += 1;
            let (_, node_id) = lookup_assignment(placement, request, a.leaf)?;
            let proc = a_norm * processing_delay_ms(infra, &a.type_id, node_id)?;
            let mut com = 0.0;
            if let Some(pred) = a.predecessor {
                let (_, pred_node) = lookup_assignment(placement, request, pred)?;
                if pred_node != node_id {
                    let (_, delay) = link_metric(
                        infra,
                        request,
                        &Endpoint::Node(pred_node.clone()),
                        &Endpoint::Node(node_id.clone()),
                    )?;
                    com = a_norm * delay;
                }
            }
            Ok((proc, com))
        }
        TreeNode::Seq(cs) => {
            let mut acc = (0.0, 0.0);
            for c in cs {
                let (p, m) = fold_makespan(c, counter, ann, placement, request, infra, a_norm)?;
                acc.0 += p;
                acc.1 += m;
            }
            Ok(acc)
        }
        TreeNode::Par(cs) => {
            let mut acc = (0.0_f64, 0.0_f64);
            for c in cs {
                let (p, m) = fold_makespan(c, counter, ann, placement, request, infra, a_norm)?;
                acc.0 = acc.0.max(p);
                acc.1 = acc.1.max(m);
            }
            Ok(acc)
        }
        TreeNode::Sel(cs) => {
            let mut acc = (0.0, 0.0);
            for (p, c) in cs {
                let (pr, cm) = fold_makespan(c, counter, ann, placement, request, infra, a_norm)?;
                acc.0 += p * pr;
                acc.1 += p * cm;
            }
            Ok(acc)
        }
        TreeNode::Loop { q, body } => {
            let it = crate::app::expected_iterations(*q)?;
            let (p, m) = fold_makespan(body, counter, ann, placement, request, infra, a_norm)?;
            Ok((it * p, it * m))
        }
    }
}

/// System-wide objective with per-request detail.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    /// `alpha * cost + (1 - alpha) * makespan_sum`.
    pub objective: f64,
    /// Total cost with each deployed instance's license counted once.
    pub cost: f64,
    /// Sum of per-request expected makespans, in ms.
    pub makespan_sum: f64,
    pub per_request: Vec<(RequestId, CostBreakdown, MakespanBreakdown)>,
}

/// Evaluates the weighted system objective of a complete placement.
///
/// Deployment is charged per deployed instance (shared instances pay
/// one license), while the per-request breakdowns attribute the full
/// license to each using request.
pub fn system_objective(
    placement: &Placement,
    requests: &[Request],
    infra: &Infrastructure,
    alpha: f64,
) -> Result<ObjectiveValue, EvalError> {
    let mut cost = 0.0;
    let mut makespan_sum = 0.0;
    let mut per_request = Vec::with_capacity(requests.len());
    for r in requests {
        let c = cost_of(placement, r, infra)?;
        let m = makespan_of(placement, r, infra)?;
        cost += c.processing + c.communication;
        makespan_sum += m.total_ms();
        per_request.push((r.request_id.clone(), c, m));
    }
    for (inst, _) in &placement.deployed {
        let ty = infra
            .vnf_type(&inst.type_id)
            .ok_or_else(|| EvalError::UnknownReference {
                kind: "VNF type",
                id: inst.type_id.to_string(),
            })?;
        cost += ty.license_cost;
    }
    Ok(ObjectiveValue {
        objective: alpha * cost + (1.0 - alpha) * makespan_sum,
        cost,
        makespan_sum,
        per_request,
    })
}

/// One feasibility violation, with enough numbers to read off the slack.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnassignedLeaf {
        request: RequestId,
        leaf: LeafId,
    },
    UnknownReference {
        detail: String,
    },
    AssignmentNotDeployed {
        request: RequestId,
        leaf: LeafId,
        instance: VnfInstanceRef,
        node: NodeId,
    },
    InstanceOnMultipleNodes {
        instance: VnfInstanceRef,
        nodes: Vec<NodeId>,
    },
    NodeCapacityExceeded {
        node: NodeId,
        used_vcpu: f64,
        usable_vcpu: f64,
    },
    InstanceCapacityExceeded {
        instance: VnfInstanceRef,
        node: NodeId,
        load_bits: f64,
        usable_bits: f64,
    },
    LinkCapacityExceeded {
        link_id: String,
        load_bits: f64,
        usable_bits: f64,
    },
    MissingRoute {
        request: RequestId,
        from: String,
        to: String,
    },
    MissingDeployment {
        type_id: TypeId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnassignedLeaf { request, leaf } => {
                write!(f, "leaf {leaf} of `{request}` is unassigned")
            }
            Violation::UnknownReference { detail } => write!(f, "unknown reference: {detail}"),
            Violation::AssignmentNotDeployed {
                request,
                leaf,
                instance,
                node,
            } => write!(
                f,
                "leaf {leaf} of `{request}` uses {instance} on `{node}` which is not deployed"
            ),
            Violation::InstanceOnMultipleNodes { instance, nodes } => {
                write!(f, "{instance} deployed on several nodes: {nodes:?}")
            }
            Violation::NodeCapacityExceeded {
                node,
                used_vcpu,
                usable_vcpu,
            } => write!(
                f,
                "node `{node}` over capacity: {used_vcpu} of {usable_vcpu} vCPU (slack {})",
                usable_vcpu - used_vcpu
            ),
            Violation::InstanceCapacityExceeded {
                instance,
                node,
                load_bits,
                usable_bits,
            } => write!(
                f,
                "{instance} on `{node}` overloaded: {load_bits} of {usable_bits} bits (slack {})",
                usable_bits - load_bits
            ),
            Violation::LinkCapacityExceeded {
                link_id,
                load_bits,
                usable_bits,
            } => write!(
                f,
                "link `{link_id}` overloaded: {load_bits} of {usable_bits} bits (slack {})",
                usable_bits - load_bits
            ),
            Violation::MissingRoute { request, from, to } => {
                write!(f, "`{request}` needs a link between `{from}` and `{to}`")
            }
            Violation::MissingDeployment { type_id } => {
                write!(f, "no deployed instance of required type `{type_id}`")
            }
        }
    }
}

/// Checks a placement against every structural and capacity constraint:
/// complete assignment, assignments backed by deployments, one node per
/// instance, node vCPU capacity, per-instance traffic capacity, link
/// bandwidth, route existence, and coverage of every required type.
pub fn check_feasibility(
    placement: &Placement,
    requests: &[Request],
    infra: &Infrastructure,
) -> Vec<Violation> {
    let mut out = Vec::new();

    // deployments: references resolve, one node per instance
    let mut nodes_of: BTreeMap<&VnfInstanceRef, Vec<&NodeId>> = BTreeMap::new();
    for (inst, node) in &placement.deployed {
        match infra.vnf_type(&inst.type_id) {
            None => out.push(Violation::UnknownReference {
                detail: format!("VNF type `{}`", inst.type_id),
            }),
            Some(t) if inst.instance_index >= t.instance_count => {
                out.push(Violation::UnknownReference {
                    detail: format!(
                        "instance {} of `{}` (only {} exist)",
                        inst.instance_index, inst.type_id, t.instance_count
                    ),
                })
            }
            Some(_) => {}
        }
        if infra.node(node).is_none() {
            out.push(Violation::UnknownReference {
                detail: format!("node `{node}`"),
            });
        }
        nodes_of.entry(inst).or_default().push(node);
    }
    for (inst, nodes) in &nodes_of {
        if nodes.len() > 1 {
            out.push(Violation::InstanceOnMultipleNodes {
                instance: (*inst).clone(),
                nodes: nodes.iter().map(|n| (*n).clone()).collect(),
            });
        }
    }

    // per-request assignment structure + load accumulation
    let mut node_used: BTreeMap<&NodeId, f64> = BTreeMap::new();
    for (inst, node) in &placement.deployed {
        if let Some(t) = infra.vnf_type(&inst.type_id) {
            *node_used.entry(node).or_default() += t.resource_requirement as f64;
        }
    }
    let mut inst_load: BTreeMap<&(VnfInstanceRef, NodeId), f64> = BTreeMap::new();
    let mut link_load: BTreeMap<&str, f64> = BTreeMap::new();
    let mut used_types: BTreeSet<&TypeId> = BTreeSet::new();

    for r in requests {
        let ann = match annotate_leaves(&r.tree) {
            Ok(a) => a,
            Err(e) => {
                out.push(Violation::UnknownReference {
                    detail: format!("request `{}`: {e}", r.request_id),
                });
                continue;
            }
        };
        for t in r.tree.leaf_types() {
            used_types.insert(t);
        }
        let mut complete = true;
        for a in &ann {
            let Some(pair) = placement.assignment(&r.request_id, a.leaf) else {
                out.push(Violation::UnassignedLeaf {
                    request: r.request_id.clone(),
                    leaf: a.leaf,
                });
                complete = false;
                continue;
            };
            let (inst, node) = pair;
            if inst.type_id != a.type_id {
                out.push(Violation::UnknownReference {
                    detail: format!(
                        "leaf {} of `{}` is type `{}` but assigned {}",
                        a.leaf, r.request_id, a.type_id, inst
                    ),
                });
            }
            if !placement.deployed.contains(pair) {
                out.push(Violation::AssignmentNotDeployed {
                    request: r.request_id.clone(),
                    leaf: a.leaf,
                    instance: inst.clone(),
                    node: node.clone(),
                });
            }
            *inst_load.entry(pair).or_default() += r.traffic_bits;
        }
        if !complete {
            continue;
        }
        // inter-node edges
        for a in &ann {
            let (_, node) = placement.assignment(&r.request_id, a.leaf).unwrap();
            if let Some(pred) = a.predecessor {
                let (_, pred_node) = placement.assignment(&r.request_id, pred).unwrap();
                if pred_node != node {
                    match infra.link_between(
                        &Endpoint::Node(pred_node.clone()),
                        &Endpoint::Node(node.clone()),
                    ) {
                        Ok(Some(l)) => *link_load.entry(&l.link_id).or_default() += r.traffic_bits,
                        Ok(None) => out.push(Violation::MissingRoute {
                            request: r.request_id.clone(),
                            from: pred_node.to_string(),
                            to: node.to_string(),
                        }),
                        Err(e) => out.push(Violation::UnknownReference {
                            detail: e.to_string(),
                        }),
                    }
                }
            }
        }
        // device links of the entry VNF
        let (_, first_node) = placement.assignment(&r.request_id, r.first_leaf()).unwrap();
        for d in &r.devices {
            match infra.link_between(
                &Endpoint::Device(d.clone()),
                &Endpoint::Node(first_node.clone()),
            ) {
                Ok(Some(l)) => *link_load.entry(&l.link_id).or_default() += r.traffic_bits,
                Ok(None) => out.push(Violation::MissingRoute {
                    request: r.request_id.clone(),
                    from: d.to_string(),
                    to: first_node.to_string(),
                }),
                Err(e) => out.push(Violation::UnknownReference {
                    detail: e.to_string(),
                }),
            }
        }
    }

    for (node_id, used) in node_used {
        if let Some(n) = infra.node(node_id) {
            if used > n.usable_vcpu() + 1e-9 {
                out.push(Violation::NodeCapacityExceeded {
                    node: node_id.clone(),
                    used_vcpu: used,
                    usable_vcpu: n.usable_vcpu(),
                });
            }
        }
    }
    for ((inst, node), load) in inst_load {
        if let Some(t) = infra.vnf_type(&inst.type_id) {
            let usable = t.processing_capacity_bits;
            if load > usable + 1e-9 {
                out.push(Violation::InstanceCapacityExceeded {
                    instance: inst.clone(),
                    node: node.clone(),
                    load_bits: load,
                    usable_bits: usable,
                });
            }
        }
    }
    for (link_id, load) in link_load {
        if let Some(l) = infra.links.iter().find(|l| l.link_id == link_id) {
            if load > l.usable_bits() + 1e-9 {
                out.push(Violation::LinkCapacityExceeded {
                    link_id: link_id.to_owned(),
                    load_bits: load,
                    usable_bits: l.usable_bits(),
                });
            }
        }
    }
    for t in used_types {
        if infra.vnf_type(t).is_some()
            && !placement.deployed.iter().any(|(i, _)| &i.type_id == t)
        {
            out.push(Violation::MissingDeployment { type_id: t.clone() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::{StructuredTree, VnfType};
    use crate::infra::{ComputeNode, DeviceId, Link, LinkClass};

    const A: f64 = 640_000.0; // 80 KB in bits

    fn vnf_type(id: &str, u: u32, d_cloud: f64, d_fog: f64) -> VnfType {
        VnfType {
            type_id: TypeId::from(id),
            license_cost: 100.0,
            processing_capacity_bits: 1e7,
            resource_requirement: u,
            instance_count: 2,
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

    /// One cloud node, one fog node, one device, all three links.
    fn tiny_infra(catalog: Vec<VnfType>) -> Infrastructure {
        let cloud = NodeId::from("c1");
        let fog = NodeId::from("f1");
        let dev = DeviceId::from("d1");
        Infrastructure {
            nodes: vec![
                ComputeNode {
                    node_id: cloud.clone(),
                    tier: Tier::Cloud,
                    capacity_vcpu: 16,
                    cost_per_vcpu: 0.1,
                    usage_threshold: 1.0,
                },
                ComputeNode {
                    node_id: fog.clone(),
                    tier: Tier::Fog,
                    capacity_vcpu: 8,
                    cost_per_vcpu: 6.0,
                    usage_threshold: 1.0,
                },
            ],
            links: vec![
                link(
                    Endpoint::Node(cloud.clone()),
                    Endpoint::Node(fog.clone()),
                    LinkClass::CloudFog,
                    3.0,
                    20.0,
                ),
                link(
                    Endpoint::Device(dev.clone()),
                    Endpoint::Node(cloud),
                    LinkClass::IotCloud,
                    4.0,
                    25.0,
                ),
                link(
                    Endpoint::Device(dev),
                    Endpoint::Node(fog),
                    LinkClass::IotFog,
                    1.0,
                    1.5,
                ),
            ],
            devices: vec![DeviceId::from("d1")],
            catalog,
            delay_unit_bits: A,
        }
    }

    fn request(tree: TreeNode) -> Request {
        Request {
            request_id: RequestId::from("r1"),
            tree: StructuredTree::new(tree),
            traffic_bits: A,
            devices: vec![DeviceId::from("d1")],
        }
    }

    fn assign(on: &[(&str, u32, &str)]) -> Placement {
        let mut p = Placement::default();
        for (leaf, (ty, idx, node)) in on.iter().enumerate() {
            let inst = VnfInstanceRef {
                type_id: TypeId::from(*ty),
                instance_index: *idx,
            };
            let node = NodeId::from(*node);
            p.deployed.insert((inst.clone(), node.clone()));
            p.assignments
                .insert((RequestId::from("r1"), LeafId(leaf)), (inst, node));
        }
        p
    }

    #[test]
    fn single_vnf_on_cloud_costs_match_hand_calculation() {
        let infra = tiny_infra(vec![vnf_type("a", 2, 3.12, 0.03)]);
        let req = request(TreeNode::Vnf(TypeId::from("a")));
        let p = assign(&[("a", 0, "c1")]);
        let c = cost_of(&p, &req, &infra).unwrap();
        // 2 vCPU * $0.1, one license, device link: 640000 bits * 4 $/Gb
        assert!((c.processing - 0.2).abs() < 1e-12);
        assert!((c.deployment - 100.0).abs() < 1e-12);
        assert!((c.communication - 0.00256).abs() < 1e-12);
        let m = makespan_of(&p, &req, &infra).unwrap();
        assert!((m.processing_ms - 3.12).abs() < 1e-12);
        assert!((m.communication_ms - 25.0).abs() < 1e-12);
        assert!((m.total_ms() - 28.12).abs() < 1e-12);
    }

    #[test]
    fn colocated_chain_pays_only_the_device_hop() {
        let catalog = (0..6).map(|i| vnf_type(&format!("t{i}"), 1, 3.12, 0.03)).collect();
        let infra = tiny_infra(catalog);
        let req = request(TreeNode::Seq(
            (0..6).map(|i| TreeNode::Vnf(TypeId(format!("t{i}")))).collect(),
        ));
        let p = assign(&[
            ("t0", 0, "c1"),
            ("t1", 0, "c1"),
            ("t2", 0, "c1"),
            ("t3", 0, "c1"),
            ("t4", 0, "c1"),
            ("t5", 0, "c1"),
        ]);
        let m = makespan_of(&p, &req, &infra).unwrap();
        // six stages at 3.12 ms plus the 25 ms device hop
        assert!((m.total_ms() - 43.72).abs() < 1e-9);
        let c = cost_of(&p, &req, &infra).unwrap();
        assert!((c.communication - 0.00256).abs() < 1e-12);
        assert_eq!(c.deployment, 600.0);
    }

    #[test]
    fn crossing_an_edge_adds_link_cost_and_delay() {
        let infra = tiny_infra(vec![vnf_type("a", 1, 1.0, 1.0), vnf_type("b", 1, 1.0, 1.0)]);
        let req = request(TreeNode::Seq(vec![
            TreeNode::Vnf(TypeId::from("a")),
            TreeNode::Vnf(TypeId::from("b")),
        ]));
        let same = assign(&[("a", 0, "c1"), ("b", 0, "c1")]);
        let split = assign(&[("a", 0, "c1"), ("b", 0, "f1")]);
        let c_same = cost_of(&same, &req, &infra).unwrap();
        let c_split = cost_of(&split, &req, &infra).unwrap();
        // 640000 bits at 3 $/Gb across the cloud-fog link
        assert!((c_split.communication - c_same.communication - 0.00192).abs() < 1e-12);
        let m_same = makespan_of(&same, &req, &infra).unwrap();
        let m_split = makespan_of(&split, &req, &infra).unwrap();
        assert!((m_split.communication_ms - m_same.communication_ms - 20.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_takes_component_maxima() {
        let infra = tiny_infra(vec![vnf_type("slow", 1, 20.0, 20.0), vnf_type("fast", 1, 10.0, 10.0)]);
        let req = request(TreeNode::Par(vec![
            TreeNode::Vnf(TypeId::from("fast")),
            TreeNode::Vnf(TypeId::from("slow")),
        ]));
        let p = assign(&[("fast", 0, "c1"), ("slow", 0, "c1")]);
        let m = makespan_of(&p, &req, &infra).unwrap();
        assert!((m.processing_ms - 20.0).abs() < 1e-12);
    }

    #[test]
    fn selection_averages_and_loop_scales() {
        let infra = tiny_infra(vec![
            vnf_type("slow", 1, 20.0, 20.0),
            vnf_type("fast", 1, 10.0, 10.0),
            vnf_type("body", 1, 9.0, 9.0),
        ]);
        let sel = request(TreeNode::Sel(vec![
            (0.5, TreeNode::Vnf(TypeId::from("fast"))),
            (0.5, TreeNode::Vnf(TypeId::from("slow"))),
        ]));
        let p = assign(&[("fast", 0, "c1"), ("slow", 0, "c1")]);
        let m = makespan_of(&p, &sel, &infra).unwrap();
        assert!((m.processing_ms - 15.0).abs() < 1e-12);

        let lp = request(TreeNode::Loop {
            q: 0.25,
            body: Box::new(TreeNode::Vnf(TypeId::from("body"))),
        });
        let pb = assign(&[("body", 0, "c1")]);
        let m = makespan_of(&pb, &lp, &infra).unwrap();
        // a 9 ms body at one third expected iterations
        assert!((m.processing_ms - 3.0).abs() < 1e-12);
    }

    #[test]
    fn weights_scale_processing_cost() {
        let infra = tiny_infra(vec![vnf_type("a", 2, 1.0, 1.0), vnf_type("b", 2, 1.0, 1.0)]);
        let req = request(TreeNode::Sel(vec![
            (0.3, TreeNode::Vnf(TypeId::from("a"))),
            (0.7, TreeNode::Vnf(TypeId::from("b"))),
        ]));
        let p = assign(&[("a", 0, "f1"), ("b", 0, "f1")]);
        let c = cost_of(&p, &req, &infra).unwrap();
        // 0.3 * 6 * 2 + 0.7 * 6 * 2 = 12; unweighted licenses
        assert!((c.processing - 12.0).abs() < 1e-12);
        assert_eq!(c.deployment, 200.0);
    }

    #[test]
    fn communication_scales_linearly_with_traffic() {
        let infra = tiny_infra(vec![vnf_type("a", 1, 1.0, 1.0), vnf_type("b", 1, 1.0, 1.0)]);
        let mut req = request(TreeNode::Seq(vec![
            TreeNode::Vnf(TypeId::from("a")),
            TreeNode::Vnf(TypeId::from("b")),
        ]));
        let p = assign(&[("a", 0, "c1"), ("b", 0, "f1")]);
        let c1 = cost_of(&p, &req, &infra).unwrap();
        let m1 = makespan_of(&p, &req, &infra).unwrap();
        req.traffic_bits *= 2.0;
        let c2 = cost_of(&p, &req, &infra).unwrap();
        let m2 = makespan_of(&p, &req, &infra).unwrap();
        assert!((c2.communication - 2.0 * c1.communication).abs() < 1e-12);
        assert!((m2.communication_ms - 2.0 * m1.communication_ms).abs() < 1e-9);
        assert_eq!(c2.processing, c1.processing);
    }

    #[test]
    fn shared_instances_pay_once_in_the_system_total() {
        let infra = tiny_infra(vec![vnf_type("a", 1, 1.0, 1.0)]);
        let mut r1 = request(TreeNode::Vnf(TypeId::from("a")));
        let mut r2 = request(TreeNode::Vnf(TypeId::from("a")));
        r1.request_id = RequestId::from("r1");
        r2.request_id = RequestId::from("r2");
        let inst = VnfInstanceRef {
            type_id: TypeId::from("a"),
            instance_index: 0,
        };
        let node = NodeId::from("c1");
        let mut p = Placement::default();
        p.deployed.insert((inst.clone(), node.clone()));
        p.assignments
            .insert((r1.request_id.clone(), LeafId(0)), (inst.clone(), node.clone()));
        p.assignments
            .insert((r2.request_id.clone(), LeafId(0)), (inst, node));

        let c1 = cost_of(&p, &r1, &infra).unwrap();
        let c2 = cost_of(&p, &r2, &infra).unwrap();
        assert_eq!(c1.deployment, 100.0);
        assert_eq!(c2.deployment, 100.0);

        let requests = vec![r1, r2];
        let v = system_objective(&p, &requests, &infra, 1.0).unwrap();
        let attributed: f64 = v.per_request.iter().map(|(_, c, _)| c.total()).sum();
        // one shared license in the system view, two in the attributed view
        assert!((attributed - v.cost - 100.0).abs() < 1e-9);
        assert!((v.objective - v.cost).abs() < 1e-12);
    }

    #[test]
    fn objective_blends_cost_and_makespan() {
        let infra = tiny_infra(vec![vnf_type("a", 2, 3.12, 0.03)]);
        let req = request(TreeNode::Vnf(TypeId::from("a")));
        let p = assign(&[("a", 0, "c1")]);
        let v = system_objective(&p, &[req], &infra, 0.5).unwrap();
        assert!((v.cost - 100.20256).abs() < 1e-9);
        assert!((v.makespan_sum - 28.12).abs() < 1e-9);
        assert!((v.objective - 0.5 * (100.20256 + 28.12)).abs() < 1e-9);
    }

    #[test]
    fn feasibility_flags_each_kind_of_violation() {
        let mut catalog = vec![vnf_type("a", 6, 1.0, 1.0), vnf_type("b", 6, 1.0, 1.0)];
        catalog[0].processing_capacity_bits = A; // one request saturates it
        let infra = tiny_infra(catalog);
        let mut r1 = request(TreeNode::Vnf(TypeId::from("a")));
        let mut r2 = request(TreeNode::Vnf(TypeId::from("a")));
        r1.request_id = RequestId::from("r1");
        r2.request_id = RequestId::from("r2");
        let inst = VnfInstanceRef {
            type_id: TypeId::from("a"),
            instance_index: 0,
        };
        let fog = NodeId::from("f1");
        let mut p = Placement::default();
        p.deployed.insert((inst.clone(), fog.clone()));
        p.assignments
            .insert((r1.request_id.clone(), LeafId(0)), (inst.clone(), fog.clone()));
        p.assignments
            .insert((r2.request_id.clone(), LeafId(0)), (inst.clone(), fog.clone()));
        // second deployment of `b` overloads the 8-vCPU fog node
        let inst_b = VnfInstanceRef {
            type_id: TypeId::from("b"),
            instance_index: 0,
        };
        p.deployed.insert((inst_b, fog));

        let violations = check_feasibility(&p, &[r1, r2], &infra);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::NodeCapacityExceeded { used_vcpu, .. } if *used_vcpu == 12.0)));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::InstanceCapacityExceeded { .. })));
        // `b` is deployed but not required; no missing-deployment report
        assert!(!violations
            .iter()
            .any(|v| matches!(v, Violation::MissingDeployment { .. })));
    }

    #[test]
    fn feasibility_flags_structural_problems() {
        let infra = tiny_infra(vec![vnf_type("a", 1, 1.0, 1.0), vnf_type("b", 1, 1.0, 1.0)]);
        let req = request(TreeNode::Seq(vec![
            TreeNode::Vnf(TypeId::from("a")),
            TreeNode::Vnf(TypeId::from("b")),
        ]));
        // leaf 1 unassigned; leaf 0 assigned but not deployed
        let mut p = Placement::default();
        p.assignments.insert(
            (req.request_id.clone(), LeafId(0)),
            (
                VnfInstanceRef {
                    type_id: TypeId::from("a"),
                    instance_index: 0,
                },
                NodeId::from("c1"),
            ),
        );
        let violations = check_feasibility(&p, std::slice::from_ref(&req), &infra);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::UnassignedLeaf { leaf: LeafId(1), .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::AssignmentNotDeployed { .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::MissingDeployment { type_id } if type_id.as_str() == "b")));

        let err = cost_of(&p, &req, &infra).unwrap_err();
        assert!(matches!(err, EvalError::UnassignedLeaf { leaf: 1, .. }));
    }
}
