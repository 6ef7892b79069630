//! Seeded generator of deliberately small placement instances.
//!
//! Every instance stays inside an exhaustively enumerable envelope —
//! at most two requests of at most four leaves each, at most four
//! nodes, at most two instances per type — so the brute-force oracle
//! can cross-check the branch-and-bound in bulk, including in debug
//! builds. Draws whose full assignment space would exceed
//! [`SPACE_CAP`] are resampled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::app::{Request, RequestId, StructuredTree, TreeNode, TypeId, VnfType};
use crate::infra::{
    class_params, classify, ComputeNode, DeviceId, Endpoint, Infrastructure, Link, NodeId, Tier,
};

/// Ready-to-solve instance bundled with its blend weight.
#[derive(Debug, Clone)]
pub struct TestInstance {
    pub infra: Infrastructure,
    pub requests: Vec<Request>,
    pub alpha: f64,
}

/// Largest exhaustive assignment space an instance may have.
pub const SPACE_CAP: u128 = 20_000;

/// Exhaustive assignment space: (instances x nodes) per leaf, multiplied.
pub fn enumeration_space(instance: &TestInstance) -> u128 {
    let nodes = instance.infra.nodes.len() as u128;
    let mut space: u128 = 1;
    for r in &instance.requests {
        for type_id in r.tree.leaf_types() {
            let inst = instance
                .infra
                .vnf_type(type_id)
                .map(|t| t.instance_count as u128)
                .unwrap_or(1);
            space = space.saturating_mul(inst * nodes);
        }
    }
    space
}

/// Draws a small random instance. Same seed, same instance.
pub fn small_instance(seed: u64) -> TestInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let instance = draw(&mut rng);
        if enumeration_space(&instance) <= SPACE_CAP {
            return instance;
        }
    }
}

fn draw(rng: &mut ChaCha8Rng) -> TestInstance {
    let n_cloud = rng.random_range(1..=2usize);
    let n_fog = rng.random_range(1..=2usize);
    let mut nodes = Vec::new();
    for i in 0..n_cloud {
        nodes.push(ComputeNode {
            node_id: NodeId::from(format!("c{}", i + 1)),
            tier: Tier::Cloud,
            capacity_vcpu: rng.random_range(4..=8),
            cost_per_vcpu: if rng.random::<f64>() < 0.5 { 0.1 } else { 0.2 },
            usage_threshold: 1.0,
        });
    }
    for i in 0..n_fog {
        nodes.push(ComputeNode {
            node_id: NodeId::from(format!("f{}", i + 1)),
            tier: Tier::Fog,
            capacity_vcpu: rng.random_range(2..=4),
            cost_per_vcpu: rng.random_range(4.0..8.0),
            usage_threshold: 1.0,
        });
    }

    let device = DeviceId::from("d1");
    let mut links = Vec::new();
    let mut push_link = |a: Endpoint, b: Endpoint, a_tier: Option<Tier>, b_tier: Option<Tier>, rng: &mut ChaCha8Rng| {
        let class = classify(a_tier, b_tier);
        let p = class_params(class);
        let delay = rng.random_range(p.delay_range_ms.0..=p.delay_range_ms.1);
        links.push(Link {
            link_id: format!("{a}__{b}"),
            a,
            b,
            class,
            bandwidth_bits: p.bandwidth_bits,
            cost_per_bit: p.cost_per_gb / 1e9,
            delay_ms: delay,
            usage_threshold: 1.0,
        });
    };
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            push_link(
                Endpoint::Node(nodes[i].node_id.clone()),
                Endpoint::Node(nodes[j].node_id.clone()),
                Some(nodes[i].tier),
                Some(nodes[j].tier),
                rng,
            );
        }
    }
    for n in &nodes {
        push_link(
            Endpoint::Device(device.clone()),
            Endpoint::Node(n.node_id.clone()),
            None,
            Some(n.tier),
            rng,
        );
    }

    let n_types = rng.random_range(1..=3usize);
    let catalog: Vec<VnfType> = (0..n_types)
        .map(|i| VnfType {
            type_id: TypeId::from(format!("t{}", i + 1)),
            license_cost: if rng.random::<f64>() < 0.5 { 50.0 } else { 100.0 },
            // occasionally tight, so per-instance throughput can bind
            processing_capacity_bits: if rng.random::<f64>() < 0.25 { 1_000_000.0 } else { 1e7 },
            resource_requirement: rng.random_range(1..=3),
            instance_count: if rng.random::<f64>() < 0.3 { 2 } else { 1 },
            processing_delay_cloud_ms: rng.random_range(2.0..4.0),
            processing_delay_fog_ms: rng.random_range(0.02..0.05),
        })
        .collect();
    let type_ids: Vec<TypeId> = catalog.iter().map(|t| t.type_id.clone()).collect();

    let n_requests = rng.random_range(1..=2usize);
    let requests: Vec<Request> = (0..n_requests)
        .map(|i| {
            let leaves = rng.random_range(1..=4usize);
            Request {
                request_id: RequestId::from(format!("r{}", i + 1)),
                tree: StructuredTree::new(random_tree(rng, &type_ids, leaves, 0)),
                traffic_bits: rng.random_range(320_000.0..1_280_000.0),
                devices: vec![device.clone()],
            }
        })
        .collect();

    let alpha = [0.0, 0.25, 0.5, 0.75, 1.0][rng.random_range(0..5usize)];

    TestInstance {
        infra: Infrastructure {
            nodes,
            links,
            devices: vec![device],
            catalog,
            delay_unit_bits: crate::infra::REFERENCE_TRAFFIC_BITS,
        },
        requests,
        alpha,
    }
}

/// Random structured tree with exactly `leaves` leaf slots.
fn random_tree(rng: &mut ChaCha8Rng, types: &[TypeId], leaves: usize, depth: usize) -> TreeNode {
    let leaf = |rng: &mut ChaCha8Rng| {
        TreeNode::Vnf(types[rng.random_range(0..types.len())].clone())
    };
    if leaves == 1 || depth >= 2 {
        if leaves == 1 {
            return leaf(rng);
        }
        // depth capped: flatten what remains into a chain
        return TreeNode::Seq((0..leaves).map(|_| leaf(rng)).collect());
    }
    match rng.random_range(0..4u8) {
        0 | 1 => {
            // sequential or parallel block with 2..=3 children
            let k = rng.random_range(2..=leaves.min(3));
            let shares = split(rng, leaves, k);
            let children: Vec<TreeNode> = shares
                .into_iter()
                .map(|s| random_tree(rng, types, s, depth + 1))
                .collect();
            if rng.random::<f64>() < 0.5 {
                TreeNode::Seq(children)
            } else {
                TreeNode::Par(children)
            }
        }
        2 => {
            let p = rng.random_range(0.2..0.8);
            let left = leaves / 2;
            TreeNode::Sel(vec![
                (p, random_tree(rng, types, left.max(1), depth + 1)),
                (1.0 - p, random_tree(rng, types, (leaves - left.max(1)).max(1), depth + 1)),
            ])
        }
        _ => TreeNode::Loop {
            q: rng.random_range(0.1..0.5),
            body: Box::new(random_tree(rng, types, leaves, depth + 1)),
        },
    }
}

/// Splits `total` into `k` positive parts.
fn split(rng: &mut ChaCha8Rng, total: usize, k: usize) -> Vec<usize> {
    let mut parts = vec![1usize; k];
    for _ in 0..(total - k) {
        parts[rng.random_range(0..k)] += 1;
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::validate_request;
    use crate::solver::{solve_bruteforce, solve_exact, SolveParams, SolveStatus};

    #[test]
    fn instances_stay_inside_the_enumerable_envelope() {
        for seed in 0..50 {
            let inst = small_instance(seed);
            assert!(inst.infra.nodes.len() <= 4);
            assert!(inst.requests.len() <= 2);
            inst.infra.validate().unwrap();
            for r in &inst.requests {
                assert!(r.tree.leaf_count() <= 4);
                assert!(validate_request(r, &inst.infra.catalog).is_empty());
            }
            for t in &inst.infra.catalog {
                assert!(t.instance_count <= 2);
            }
            assert!(enumeration_space(&inst) <= SPACE_CAP);
        }
    }

    #[test]
    fn same_seed_reproduces_the_same_instance() {
        for seed in [0, 7, 99] {
            let a = small_instance(seed);
            let b = small_instance(seed);
            assert_eq!(a.alpha, b.alpha);
            assert_eq!(
                a.infra.nodes.iter().map(|n| n.node_id.clone()).collect::<Vec<_>>(),
                b.infra.nodes.iter().map(|n| n.node_id.clone()).collect::<Vec<_>>()
            );
            assert_eq!(a.requests.len(), b.requests.len());
            for (ra, rb) in a.requests.iter().zip(&b.requests) {
                assert_eq!(ra.traffic_bits, rb.traffic_bits);
                assert_eq!(ra.tree.leaf_types(), rb.tree.leaf_types());
            }
        }
    }

    #[test]
    fn generation_covers_branching_shapes_and_both_outcomes() {
        let mut saw_sel = false;
        let mut saw_loop = false;
        let mut saw_par = false;
        let mut optimal = 0;
        let mut infeasible = 0;
        for seed in 0..60 {
            let inst = small_instance(seed);
            for r in &inst.requests {
                scan(&r.tree.root, &mut saw_sel, &mut saw_loop, &mut saw_par);
            }
            let res =
                solve_exact(&inst.infra, &inst.requests, inst.alpha, &SolveParams::default())
                    .unwrap();
            match res.status {
                SolveStatus::Optimal => optimal += 1,
                SolveStatus::Infeasible => infeasible += 1,
                other => panic!("unexpected status {other:?}"),
            }
            if seed < 10 {
                let oracle =
                    solve_bruteforce(&inst.infra, &inst.requests, inst.alpha, SPACE_CAP).unwrap();
                assert_eq!(res.status, oracle.status, "seed {seed}");
            }
        }
        assert!(saw_sel && saw_loop && saw_par, "tree shapes not all covered");
        assert!(optimal >= 30, "only {optimal} feasible instances");
        assert!(infeasible >= 1, "no infeasible instance generated");
    }

    fn scan(node: &TreeNode, sel: &mut bool, lp: &mut bool, par: &mut bool) {
        match node {
            TreeNode::Vnf(_) => {}
            TreeNode::Seq(cs) => cs.iter().for_each(|c| scan(c, sel, lp, par)),
            TreeNode::Par(cs) => {
                *par = true;
                cs.iter().for_each(|c| scan(c, sel, lp, par));
            }
            TreeNode::Sel(cs) => {
                *sel = true;
                cs.iter().for_each(|(_, c)| scan(c, sel, lp, par));
            }
            TreeNode::Loop { body, .. } => {
                *lp = true;
                scan(body, sel, lp, par);
            }
        }
    }
}
