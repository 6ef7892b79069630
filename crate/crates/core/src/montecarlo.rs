//! Stochastic validation of the analytic expectations.
//!
//! Each sample realises the random structure of a request: selections
//! draw one branch, loops draw a geometric iteration count
//! (`P(N = n) = (1 - q) * q^n`), parallel blocks run every branch and
//! take the component-wise maximum of their realised times, sequences
//! add. Every visit of a leaf charges its processing term and the
//! metric of its incoming edge, so by Wald's identity the sample means
//! converge to the closed-form expectations leaf weight by leaf weight.
//!
//! One caveat is inherent to the model: the analytic makespan folds a
//! parallel block as the maximum of *expected* branch times, while the
//! sampler averages the maximum of *realised* times. When a branch
//! contains a selection or loop the analytic value is therefore a
//! lower bound (Jensen's inequality), and [`compare_to_analytic`]
//! switches to a one-sided test. Costs are additive and stay unbiased
//! either way.
//!
//! Sampling is reproducible and order-independent: sample `i` always
//! reads stream `i` of the seeded cipher, no matter how samples are
//! scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::app::{annotate_leaves, LeafAnnotation, Request, TreeNode};
use crate::error::EvalError;
use crate::eval::{cost_of, makespan_of, Placement};
use crate::infra::{Endpoint, Infrastructure, Tier};

/// Hard cap on realised loop iterations per draw; draws hitting the cap
/// are truncated and counted.
pub const MAX_LOOP_ITERATIONS: u64 = 10_000;

/// Reports with fewer samples than this are flagged inconclusive.
pub const MIN_CONCLUSIVE_SAMPLES: u64 = 1_000;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStats {
    pub mean: f64,
    pub std_error: f64,
}

/// Aggregated outcome of a simulation run for one request.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub samples: u64,
    /// Variable (processing + communication) cost per execution;
    /// licenses are capital and excluded from the realised traces.
    pub variable_cost: MetricStats,
    pub makespan_ms: MetricStats,
    /// Visit count per leaf, summed over all samples.
    pub leaf_visits: Vec<u64>,
    /// Loop draws cut off at [`MAX_LOOP_ITERATIONS`].
    pub loop_truncations: u64,
}

/// One realised execution of a placed request.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    /// Variable (processing + communication) cost of this realisation.
    pub variable_cost: f64,
    pub makespan_ms: f64,
    /// How many times each leaf ran; deterministic subtrees always 1.
    pub visits: Vec<u64>,
    pub truncated_loops: u64,
}

/// Whether the analytic makespan is an exact expectation or only a
/// lower bound of the simulated mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasDirection {
    Unbiased,
    AnalyticIsLowerBound,
}

/// Classifies the makespan comparison for a tree: parallel blocks whose
/// branches contain selections or loops make the analytic fold a lower
/// bound of the true expectation.
pub fn makespan_bias(tree: &TreeNode) -> BiasDirection {
    fn is_random(n: &TreeNode) -> bool {
        match n {
            TreeNode::Vnf(_) => false,
            TreeNode::Seq(cs) | TreeNode::Par(cs) => cs.iter().any(is_random),
            TreeNode::Sel(_) | TreeNode::Loop { .. } => true,
        }
    }
    fn has_random_par(n: &TreeNode) -> bool {
        match n {
            TreeNode::Vnf(_) => false,
            TreeNode::Seq(cs) => cs.iter().any(has_random_par),
            TreeNode::Par(cs) => cs.iter().any(is_random) || cs.iter().any(has_random_par),
            TreeNode::Sel(cs) => cs.iter().any(|(_, c)| has_random_par(c)),
            TreeNode::Loop { body, .. } => has_random_par(body),
        }
    }
    if has_random_par(tree) {
        BiasDirection::AnalyticIsLowerBound
    } else {
        BiasDirection::Unbiased
    }
}

fn leaf_count(node: &TreeNode) -> usize {
    match node {
        TreeNode::Vnf(_) => 1,
        TreeNode::Seq(cs) | TreeNode::Par(cs) => cs.iter().map(leaf_count).sum(),
        TreeNode::Sel(cs) => cs.iter().map(|(_, c)| leaf_count(c)).sum(),
        TreeNode::Loop { body, .. } => leaf_count(body),
    }
}

struct SampleCtx<'a> {
    ann: &'a [LeafAnnotation],
    placement: &'a Placement,
    request: &'a Request,
    infra: &'a Infrastructure,
    a_norm: f64,
}

/// Per-realisation totals: (proc_ms, com_ms, proc_cost, com_cost).
type Realised = (f64, f64, f64, f64);

fn realise(
    node: &TreeNode,
    counter: &mut usize,
    ctx: &SampleCtx<'_>,
    rng: &mut ChaCha8Rng,
    out: &mut ExecutionTrace,
) -> Result<Realised, EvalError> {
    match node {
        TreeNode::Vnf(_) => {
            let a = &ctx.ann[*counter];
            *counter += 1;
            out.visits[a.leaf.0] += 1;
            let (inst, node_id) = ctx
                .placement
                .assignment(&ctx.request.request_id, a.leaf)
                .ok_or_else(|| EvalError::UnassignedLeaf {
                    request: ctx.request.request_id.to_string(),
                    leaf: a.leaf.0,
                })?;
            let ty = ctx
                .infra
                .vnf_type(&inst.type_id)
                .ok_or_else(|| EvalError::UnknownReference {
                    kind: "VNF type",
                    id: inst.type_id.to_string(),
                })?;
            let n = ctx
                .infra
                .node(node_id)
                .ok_or_else(|| EvalError::UnknownReference {
                    kind: "node",
                    id: node_id.to_string(),
                })?;
            let delay = match n.tier {
                Tier::Cloud => ty.processing_delay_cloud_ms,
                Tier::Fog => ty.processing_delay_fog_ms,
            };
            let proc_ms = ctx.a_norm * delay;
            let proc_cost = n.cost_per_vcpu * ty.resource_requirement as f64;
            let mut com_ms = 0.0;
            let mut com_cost = 0.0;
            if let Some(pred) = a.predecessor {
                let (_, pred_node) = ctx
                    .placement
                    .assignment(&ctx.request.request_id, pred)
                    .ok_or_else(|| EvalError::UnassignedLeaf {
                        request: ctx.request.request_id.to_string(),
                        leaf: pred.0,
                    })?;
                if pred_node != node_id {
                    let link = ctx
                        .infra
                        .link_between(
                            &Endpoint::Node(pred_node.clone()),
                            &Endpoint::Node(node_id.clone()),
                        )?
                        .ok_or_else(|| EvalError::NoRoute {
                            request: ctx.request.request_id.to_string(),
                            from: pred_node.to_string(),
                            to: node_id.to_string(),
                        })?;
                    com_ms = ctx.a_norm * link.delay_ms;
                    com_cost = ctx.request.traffic_bits * link.cost_per_bit;
                }
            }
            Ok((proc_ms, com_ms, proc_cost, com_cost))
        }
        TreeNode::Seq(cs) => {
            let mut acc = (0.0, 0.0, 0.0, 0.0);
            for c in cs {
                let r = realise(c, counter, ctx, rng, out)?;
                acc = (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2, acc.3 + r.3);
            }
            Ok(acc)
        }
        TreeNode::Par(cs) => {
            let mut acc = (0.0_f64, 0.0_f64, 0.0, 0.0);
            for c in cs {
                let r = realise(c, counter, ctx, rng, out)?;
                acc = (acc.0.max(r.0), acc.1.max(r.1), acc.2 + r.2, acc.3 + r.3);
            }
            Ok(acc)
        }
        TreeNode::Sel(cs) => {
            let draw: f64 = rng.random();
            let mut cumulative = 0.0;
            let mut chosen = cs.len() - 1;
            for (i, (p, _)) in cs.iter().enumerate() {
                cumulative += p;
                if draw < cumulative {
                    chosen = i;
                    break;
                }
            }
            let mut acc = (0.0, 0.0, 0.0, 0.0);
            for (i, (_, c)) in cs.iter().enumerate() {
                if i == chosen {
                    acc = realise(c, counter, ctx, rng, out)?;
                } else {
                    *counter += leaf_count(c);
                }
            }
            Ok(acc)
        }
        TreeNode::Loop { q, body } => {
            let mut iterations = 0u64;
            while rng.random::<f64>() < *q {
                iterations += 1;
                if iterations == MAX_LOOP_ITERATIONS {
                    out.truncated_loops += 1;
                    break;
                }
            }
            let body_start = *counter;
            let mut acc = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..iterations {
                *counter = body_start;
                let r = realise(body, counter, ctx, rng, out)?;
                acc = (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2, acc.3 + r.3);
            }
            *counter = body_start + leaf_count(body);
            Ok(acc)
        }
    }
}

/// Realises one execution of `request` under `placement` with the given
/// generator. Device-link terms are deterministic and charged as in the
/// analytic evaluation; licenses are not part of the realised cost.
pub fn sample_with_rng(
    placement: &Placement,
    request: &Request,
    infra: &Infrastructure,
    rng: &mut ChaCha8Rng,
) -> Result<ExecutionTrace, EvalError> {
    let ann = annotate_leaves(&request.tree)?;
    let mut out = ExecutionTrace {
        variable_cost: 0.0,
        makespan_ms: 0.0,
        visits: vec![0; ann.len()],
        truncated_loops: 0,
    };
    let ctx = SampleCtx {
        ann: &ann,
        placement,
        request,
        infra,
        a_norm: request.traffic_bits / infra.delay_unit_bits,
    };
    let mut counter = 0usize;
    let (proc_ms, com_ms, proc_cost, com_cost) =
        realise(&request.tree.root, &mut counter, &ctx, rng, &mut out)?;

    let (_, first_node) = placement
        .assignment(&request.request_id, request.first_leaf())
        .ok_or_else(|| EvalError::UnassignedLeaf {
            request: request.request_id.to_string(),
            leaf: request.first_leaf().0,
        })?;
    let mut device_ms = 0.0;
    let mut device_cost = 0.0;
    for d in &request.devices {
        let link = infra
            .link_between(&Endpoint::Device(d.clone()), &Endpoint::Node(first_node.clone()))?
            .ok_or_else(|| EvalError::NoRoute {
                request: request.request_id.to_string(),
                from: d.to_string(),
                to: first_node.to_string(),
            })?;
        device_ms += ctx.a_norm * link.delay_ms;
        device_cost += request.traffic_bits * link.cost_per_bit;
    }

    out.variable_cost = proc_cost + com_cost + device_cost;
    out.makespan_ms = proc_ms + com_ms + device_ms;
    Ok(out)
}

/// Realises one execution from a bare seed (stream 0 of the cipher, so
/// it equals the first sample of [`simulate_request`] with that seed).
pub fn sample_execution(
    placement: &Placement,
    request: &Request,
    infra: &Infrastructure,
    seed: u64,
) -> Result<ExecutionTrace, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    sample_with_rng(placement, request, infra, &mut rng)
}

/// Runs `samples` independent realisations. Sample `i` uses stream `i`
/// of a cipher seeded with `seed`, so results do not depend on
/// evaluation order.
pub fn simulate_request(
    placement: &Placement,
    request: &Request,
    infra: &Infrastructure,
    samples: u64,
    seed: u64,
) -> Result<SimulationReport, EvalError> {
    let ann = annotate_leaves(&request.tree)?;
    let mut visits = vec![0u64; ann.len()];
    let mut truncations = 0u64;
    let mut cost = Welford::default();
    let mut makespan = Welford::default();
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let s = sample_with_rng(placement, request, infra, &mut rng)?;
        cost.push(s.variable_cost);
        makespan.push(s.makespan_ms);
        for (v, s) in visits.iter_mut().zip(&s.visits) {
            *v += s;
        }
        truncations += s.truncated_loops;
    }
    Ok(SimulationReport {
        samples,
        variable_cost: cost.stats(),
        makespan_ms: makespan.stats(),
        leaf_visits: visits,
        loop_truncations: truncations,
    })
}

/// Numerically stable online mean and variance.
#[derive(Debug, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn stats(&self) -> MetricStats {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n as f64 - 1.0) / self.n as f64).sqrt()
        } else {
            0.0
        };
        MetricStats {
            mean: self.mean,
            std_error,
        }
    }
}

/// One metric's agreement verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementCheck {
    pub analytic: f64,
    pub simulated: f64,
    pub std_error: f64,
    pub direction: BiasDirection,
    /// False when the run had fewer than [`MIN_CONCLUSIVE_SAMPLES`].
    pub conclusive: bool,
    pub agrees: bool,
}

/// Verdict for one simulated request, with the underlying report.
#[derive(Debug, Clone, PartialEq)]
pub struct McValidation {
    pub report: SimulationReport,
    pub cost: AgreementCheck,
    pub makespan: AgreementCheck,
}

/// Tolerance floor guards the zero-variance (fully deterministic) case.
const ABSOLUTE_FLOOR: f64 = 1e-9;

/// Simulates `samples` executions and compares the means with the
/// analytic evaluation. Variable costs are tested two-sided at three
/// standard errors; makespans switch to a one-sided test when the tree
/// makes the analytic fold a lower bound. Runs under
/// [`MIN_CONCLUSIVE_SAMPLES`] are reported but flagged inconclusive.
pub fn compare_to_analytic(
    placement: &Placement,
    request: &Request,
    infra: &Infrastructure,
    samples: u64,
    seed: u64,
) -> Result<McValidation, EvalError> {
    let report = simulate_request(placement, request, infra, samples, seed)?;
    let analytic = cost_of(placement, request, infra)?;
    let analytic_cost = analytic.processing + analytic.communication;
    let analytic_makespan = makespan_of(placement, request, infra)?.total_ms();
    let direction = makespan_bias(&request.tree.root);
    let conclusive = report.samples >= MIN_CONCLUSIVE_SAMPLES;

    let cost_tol = (3.0 * report.variable_cost.std_error).max(ABSOLUTE_FLOOR);
    let cost = AgreementCheck {
        analytic: analytic_cost,
        simulated: report.variable_cost.mean,
        std_error: report.variable_cost.std_error,
        direction: BiasDirection::Unbiased,
        conclusive,
        agrees: (report.variable_cost.mean - analytic_cost).abs() <= cost_tol,
    };

    let mk_tol = (3.0 * report.makespan_ms.std_error).max(ABSOLUTE_FLOOR);
    let agrees = match direction {
        BiasDirection::Unbiased => (report.makespan_ms.mean - analytic_makespan).abs() <= mk_tol,
        BiasDirection::AnalyticIsLowerBound => {
            report.makespan_ms.mean + mk_tol >= analytic_makespan
        }
    };
    let makespan = AgreementCheck {
        analytic: analytic_makespan,
        simulated: report.makespan_ms.mean,
        std_error: report.makespan_ms.std_error,
        direction,
        conclusive,
        agrees,
    };
    Ok(McValidation {
        report,
        cost,
        makespan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::{LeafId, RequestId, StructuredTree, TypeId, VnfType};
    use crate::infra::{ComputeNode, DeviceId, Link, LinkClass, NodeId, VnfInstanceRef};

    const A: f64 = 640_000.0;

    fn vnf_type(id: &str, u: u32, d: f64) -> VnfType {
        VnfType {
            type_id: TypeId::from(id),
            license_cost: 100.0,
            processing_capacity_bits: 1e7,
            resource_requirement: u,
            instance_count: 2,
            processing_delay_cloud_ms: d,
            processing_delay_fog_ms: d,
        }
    }

    fn two_node_infra(catalog: Vec<VnfType>) -> Infrastructure {
        let c1 = NodeId::from("c1");
        let f1 = NodeId::from("f1");
        let d1 = DeviceId::from("d1");
        Infrastructure {
            nodes: vec![
                ComputeNode {
                    node_id: c1.clone(),
                    tier: Tier::Cloud,
                    capacity_vcpu: 32,
                    cost_per_vcpu: 0.1,
                    usage_threshold: 1.0,
                },
                ComputeNode {
                    node_id: f1.clone(),
                    tier: Tier::Fog,
                    capacity_vcpu: 32,
                    cost_per_vcpu: 6.0,
                    usage_threshold: 1.0,
                },
            ],
            links: vec![
                Link {
                    link_id: "c1__f1".into(),
                    a: Endpoint::Node(c1.clone()),
                    b: Endpoint::Node(f1.clone()),
                    class: LinkClass::CloudFog,
                    bandwidth_bits: 1e12,
                    cost_per_bit: 3e-9,
                    delay_ms: 20.0,
                    usage_threshold: 1.0,
                },
                Link {
                    link_id: "d1__c1".into(),
                    a: Endpoint::Device(d1.clone()),
                    b: Endpoint::Node(c1),
                    class: LinkClass::IotCloud,
                    bandwidth_bits: 1e12,
                    cost_per_bit: 4e-9,
                    delay_ms: 25.0,
                    usage_threshold: 1.0,
                },
                Link {
                    link_id: "d1__f1".into(),
                    a: Endpoint::Device(d1),
                    b: Endpoint::Node(f1),
                    class: LinkClass::IotFog,
                    bandwidth_bits: 1e12,
                    cost_per_bit: 1e-9,
                    delay_ms: 1.5,
                    usage_threshold: 1.0,
                },
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

    fn assign(on: &[(&str, &str)]) -> Placement {
        let mut p = Placement::default();
        for (leaf, (ty, node)) in on.iter().enumerate() {
            let inst = VnfInstanceRef {
                type_id: TypeId::from(*ty),
                instance_index: 0,
            };
            let node = NodeId::from(*node);
            p.deployed.insert((inst.clone(), node.clone()));
            p.assignments
                .insert((RequestId::from("r1"), LeafId(leaf)), (inst, node));
        }
        p
    }

    #[test]
    fn deterministic_tree_reproduces_the_analytic_values_exactly() {
        let infra = two_node_infra(vec![vnf_type("a", 1, 5.0), vnf_type("b", 2, 7.0)]);
        let req = request(TreeNode::Seq(vec![
            TreeNode::Vnf(TypeId::from("a")),
            TreeNode::Vnf(TypeId::from("b")),
        ]));
        let p = assign(&[("a", "c1"), ("b", "f1")]);
        let v = compare_to_analytic(&p, &req, &infra, 64, 7).unwrap();
        assert_eq!(v.report.variable_cost.std_error, 0.0);
        assert_eq!(v.report.makespan_ms.std_error, 0.0);
        assert!(v.cost.agrees && v.makespan.agrees);
        assert!((v.cost.simulated - v.cost.analytic).abs() < 1e-9);
        assert!((v.makespan.simulated - v.makespan.analytic).abs() < 1e-9);
        assert!(!v.cost.conclusive); // below the sample floor
        assert!(v.report.leaf_visits.iter().all(|&n| n == 64));
    }

    #[test]
    fn single_sample_comparison_equals_the_bare_trace() {
        let infra = two_node_infra(vec![vnf_type("body", 1, 9.0)]);
        let req = request(TreeNode::Loop {
            q: 0.5,
            body: Box::new(TreeNode::Vnf(TypeId::from("body"))),
        });
        let p = assign(&[("body", "c1")]);
        let trace = sample_execution(&p, &req, &infra, 77).unwrap();
        let v = compare_to_analytic(&p, &req, &infra, 1, 77).unwrap();
        assert_eq!(v.report.variable_cost.mean, trace.variable_cost);
        assert_eq!(v.report.makespan_ms.mean, trace.makespan_ms);
        assert_eq!(v.report.leaf_visits, trace.visits);
    }

    #[test]
    fn loop_visit_rate_matches_expected_iterations() {
        let infra = two_node_infra(vec![vnf_type("pre", 1, 1.0), vnf_type("body", 1, 9.0)]);
        let req = request(TreeNode::Seq(vec![
            TreeNode::Vnf(TypeId::from("pre")),
            TreeNode::Loop {
                q: 0.25,
                body: Box::new(TreeNode::Vnf(TypeId::from("body"))),
            },
        ]));
        let p = assign(&[("pre", "c1"), ("body", "c1")]);
        let n = 20_000u64;
        let report = simulate_request(&p, &req, &infra, n, 11).unwrap();
        assert_eq!(report.leaf_visits[0], n);
        let rate = report.leaf_visits[1] as f64 / n as f64;
        // Var(N) = q / (1-q)^2 = 4/9, so three sigma is about 0.014
        assert!((rate - 1.0 / 3.0).abs() < 0.02, "rate {rate}");
        let v = compare_to_analytic(&p, &req, &infra, n, 11).unwrap();
        assert!(v.cost.agrees && v.makespan.agrees && v.cost.conclusive);
        assert_eq!(v.makespan.direction, BiasDirection::Unbiased);
    }

    #[test]
    fn selection_visit_rates_match_branch_probabilities() {
        let infra = two_node_infra(vec![
            vnf_type("pre", 1, 1.0),
            vnf_type("x", 1, 4.0),
            vnf_type("y", 1, 8.0),
        ]);
        let req = request(TreeNode::Seq(vec![
            TreeNode::Vnf(TypeId::from("pre")),
            TreeNode::Sel(vec![
                (0.3, TreeNode::Vnf(TypeId::from("x"))),
                (0.7, TreeNode::Vnf(TypeId::from("y"))),
            ]),
        ]));
        let p = assign(&[("pre", "c1"), ("x", "c1"), ("y", "f1")]);
        let n = 20_000u64;
        let report = simulate_request(&p, &req, &infra, n, 3).unwrap();
        let rx = report.leaf_visits[1] as f64 / n as f64;
        let ry = report.leaf_visits[2] as f64 / n as f64;
        assert!((rx - 0.3).abs() < 0.02, "x rate {rx}");
        assert!((ry - 0.7).abs() < 0.02, "y rate {ry}");
        assert_eq!(report.leaf_visits[1] + report.leaf_visits[2], n);
        let v = compare_to_analytic(&p, &req, &infra, n, 3).unwrap();
        assert!(v.cost.agrees && v.makespan.agrees);
    }

    #[test]
    fn parallel_with_random_branch_is_flagged_and_tested_one_sided() {
        let infra = two_node_infra(vec![
            vnf_type("fixed", 1, 10.0),
            vnf_type("short", 1, 0.0),
            vnf_type("long", 1, 20.0),
        ]);
        let req = request(TreeNode::Par(vec![
            TreeNode::Vnf(TypeId::from("fixed")),
            TreeNode::Sel(vec![
                (0.5, TreeNode::Vnf(TypeId::from("short"))),
                (0.5, TreeNode::Vnf(TypeId::from("long"))),
            ]),
        ]));
        let p = assign(&[("fixed", "c1"), ("short", "c1"), ("long", "c1")]);
        assert_eq!(makespan_bias(&req.tree.root), BiasDirection::AnalyticIsLowerBound);
        let v = compare_to_analytic(&p, &req, &infra, 20_000, 5).unwrap();
        // realised mean sits near 15 ms while the analytic fold gives 10 ms
        assert!(v.makespan.simulated > v.makespan.analytic + 3.0 * v.makespan.std_error);
        assert!(v.makespan.agrees, "one-sided test accepts the lower bound");
        assert!(v.cost.agrees, "cost stays unbiased under parallel blocks");
    }

    #[test]
    fn runaway_loops_are_truncated_and_counted() {
        let infra = two_node_infra(vec![vnf_type("body", 1, 0.001)]);
        let req = request(TreeNode::Loop {
            q: 0.9999,
            body: Box::new(TreeNode::Vnf(TypeId::from("body"))),
        });
        let p = assign(&[("body", "c1")]);
        let report = simulate_request(&p, &req, &infra, 50, 2).unwrap();
        assert!(report.loop_truncations > 0);
        assert!(report.leaf_visits[0] <= 50 * MAX_LOOP_ITERATIONS);
    }

    #[test]
    fn same_seed_reproduces_and_streams_decorrelate() {
        let infra = two_node_infra(vec![vnf_type("body", 1, 9.0)]);
        let req = request(TreeNode::Loop {
            q: 0.5,
            body: Box::new(TreeNode::Vnf(TypeId::from("body"))),
        });
        let p = assign(&[("body", "c1")]);
        let a = simulate_request(&p, &req, &infra, 500, 42).unwrap();
        let b = simulate_request(&p, &req, &infra, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_request(&p, &req, &infra, 500, 43).unwrap();
        assert_ne!(a.leaf_visits, c.leaf_visits);
        // prefix property: the first k streams are the same samples
        let prefix = simulate_request(&p, &req, &infra, 100, 42).unwrap();
        assert_eq!(prefix.samples, 100);
        assert!(prefix.leaf_visits[0] <= a.leaf_visits[0]);
    }

    #[test]
    fn nested_loop_and_selection_converge_to_the_folded_weights() {
        // mirrors the navigation stage of the reference scenario
        let infra = two_node_infra(vec![
            vnf_type("nav", 1, 3.12),
            vnf_type("avoid", 1, 3.12),
            vnf_type("lane", 1, 3.12),
            vnf_type("brake", 1, 3.12),
        ]);
        let req = request(TreeNode::Seq(vec![
            TreeNode::Vnf(TypeId::from("nav")),
            TreeNode::Loop {
                q: 0.25,
                body: Box::new(TreeNode::Seq(vec![
                    TreeNode::Vnf(TypeId::from("avoid")),
                    TreeNode::Sel(vec![
                        (0.5, TreeNode::Vnf(TypeId::from("lane"))),
                        (0.5, TreeNode::Vnf(TypeId::from("brake"))),
                    ]),
                ])),
            },
        ]));
        let p = assign(&[("nav", "f1"), ("avoid", "f1"), ("lane", "c1"), ("brake", "f1")]);
        let n = 30_000u64;
        let report = simulate_request(&p, &req, &infra, n, 9).unwrap();
        let rates: Vec<f64> = report
            .leaf_visits
            .iter()
            .map(|v| *v as f64 / n as f64)
            .collect();
        assert!((rates[1] - 1.0 / 3.0).abs() < 0.02, "avoid {}", rates[1]);
        assert!((rates[2] - 1.0 / 6.0).abs() < 0.015, "lane {}", rates[2]);
        assert!((rates[3] - 1.0 / 6.0).abs() < 0.015, "brake {}", rates[3]);
        let v = compare_to_analytic(&p, &req, &infra, n, 9).unwrap();
        assert!(v.cost.agrees, "cost {:?}", v.cost);
        assert!(v.makespan.agrees, "makespan {:?}", v.makespan);
        assert_eq!(v.makespan.direction, BiasDirection::Unbiased);
    }
}
