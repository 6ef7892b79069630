//! Infrastructure model: compute nodes, links, devices and the seeded
//! reference scenario generator.
//!
//! All traffic quantities are carried in bits internally. Link cost
//! coefficients are dollars per bit; link and processing delays are
//! milliseconds per *normalised* traffic unit (see
//! [`Infrastructure::delay_unit_bits`]), so a request whose load equals
//! one normalisation unit experiences the configured delay verbatim.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::app::{id_newtype, Request, RequestId, StructuredTree, TreeNode, TypeId, VnfType};
use crate::error::ModelError;

id_newtype!(
    /// Identifier of a compute node.
    NodeId
);
id_newtype!(
    /// Identifier of an access (IoT) device.
    DeviceId
);

/// Placement tier of a compute node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Cloud,
    Fog,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Cloud => "cloud",
            Tier::Fog => "fog",
        })
    }
}

/// One compute node of the substrate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeNode {
    pub node_id: NodeId,
    pub tier: Tier,
    /// Total vCPUs.
    pub capacity_vcpu: u32,
    /// Dollars per occupied vCPU.
    pub cost_per_vcpu: f64,
    /// Fraction of the capacity the operator allows to be used (mu).
    pub usage_threshold: f64,
}

impl ComputeNode {
    /// vCPUs that may actually be occupied.
    pub fn usable_vcpu(&self) -> f64 {
        self.usage_threshold * self.capacity_vcpu as f64
    }
}

/// Category of a link, derived from its endpoint kinds and tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkClass {
    CloudCloud,
    FogFog,
    CloudFog,
    IotCloud,
    IotFog,
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkClass::CloudCloud => "cloud-cloud",
            LinkClass::FogFog => "fog-fog",
            LinkClass::CloudFog => "cloud-fog",
            LinkClass::IotCloud => "iot-cloud",
            LinkClass::IotFog => "iot-fog",
        })
    }
}

/// A link endpoint: either a compute node or an access device.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Node(NodeId),
    Device(DeviceId),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Node(n) => f.write_str(n.as_str()),
            Endpoint::Device(d) => f.write_str(d.as_str()),
        }
    }
}

/// An undirected link between two endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub link_id: String,
    pub a: Endpoint,
    pub b: Endpoint,
    pub class: LinkClass,
    /// Traffic the link can carry per period, in bits.
    pub bandwidth_bits: f64,
    /// Dollars per bit routed over this link.
    pub cost_per_bit: f64,
    /// Milliseconds per normalised traffic unit.
    pub delay_ms: f64,
    /// Fraction of the bandwidth that may be used (mu).
    pub usage_threshold: f64,
}

impl Link {
    pub fn usable_bits(&self) -> f64 {
        self.usage_threshold * self.bandwidth_bits
    }

    pub fn joins(&self, x: &Endpoint, y: &Endpoint) -> bool {
        (&self.a == x && &self.b == y) || (&self.a == y && &self.b == x)
    }
}

/// A deployable copy of a VNF type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VnfInstanceRef {
    pub type_id: TypeId,
    pub instance_index: u32,
}

impl fmt::Display for VnfInstanceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.type_id, self.instance_index)
    }
}

/// The substrate: nodes, links, devices and the VNF catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Infrastructure {
    pub nodes: Vec<ComputeNode>,
    pub links: Vec<Link>,
    pub devices: Vec<DeviceId>,
    pub catalog: Vec<VnfType>,
    /// Bits that count as one traffic unit for delay terms. Processing
    /// and link delays are expressed per this unit, so a request with
    /// `traffic_bits == delay_unit_bits` experiences them verbatim.
    pub delay_unit_bits: f64,
}

impl Infrastructure {
    pub fn node(&self, id: &NodeId) -> Option<&ComputeNode> {
        self.nodes.iter().find(|n| &n.node_id == id)
    }

    pub fn vnf_type(&self, id: &TypeId) -> Option<&VnfType> {
        self.catalog.iter().find(|t| &t.type_id == id)
    }

    pub fn has_device(&self, id: &DeviceId) -> bool {
        self.devices.contains(id)
    }

    fn endpoint_known(&self, e: &Endpoint) -> bool {
        match e {
            Endpoint::Node(n) => self.node(n).is_some(),
            Endpoint::Device(d) => self.has_device(d),
        }
    }

    /// The link joining two distinct endpoints, if one exists.
    ///
    /// Lookup is symmetric. Unknown endpoints and identical endpoints
    /// are errors; a missing link between known endpoints is `Ok(None)`.
    pub fn link_between(&self, x: &Endpoint, y: &Endpoint) -> Result<Option<&Link>, ModelError> {
        if x == y {
            return Err(ModelError::SelfLink(x.to_string()));
        }
        for e in [x, y] {
            if !self.endpoint_known(e) {
                return Err(match e {
                    Endpoint::Node(n) => ModelError::UnknownNode(n.to_string()),
                    Endpoint::Device(d) => ModelError::UnknownDevice(d.to_string()),
                });
            }
        }
        Ok(self.links.iter().find(|l| l.joins(x, y)))
    }

    /// Structural validation: endpoint references resolve, no self
    /// links, at most one link per endpoint pair, positive capacities.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.node_id.as_str().to_owned()) {
                return Err(ModelError::Invalid(format!(
                    "duplicate node id `{}`",
                    n.node_id
                )));
            }
        }
        for d in &self.devices {
            if !ids.insert(d.as_str().to_owned()) {
                return Err(ModelError::Invalid(format!("duplicate id `{d}`")));
            }
        }
        let mut seen_types = BTreeSet::new();
        for t in &self.catalog {
            if !seen_types.insert(t.type_id.as_str().to_owned()) {
                return Err(ModelError::Invalid(format!(
                    "duplicate VNF type `{}`",
                    t.type_id
                )));
            }
            if t.instance_count == 0 {
                return Err(ModelError::Invalid(format!(
                    "VNF type `{}` has zero deployable instances",
                    t.type_id
                )));
            }
        }
        let mut pairs = BTreeSet::new();
        for l in &self.links {
            if l.a == l.b {
                return Err(ModelError::SelfLink(l.a.to_string()));
            }
            for e in [&l.a, &l.b] {
                if !self.endpoint_known(e) {
                    return Err(match e {
                        Endpoint::Node(n) => ModelError::UnknownNode(n.to_string()),
                        Endpoint::Device(d) => ModelError::UnknownDevice(d.to_string()),
                    });
                }
            }
            let key = if l.a <= l.b {
                (l.a.clone(), l.b.clone())
            } else {
                (l.b.clone(), l.a.clone())
            };
            if !pairs.insert(key) {
                return Err(ModelError::DuplicateLink(l.a.to_string(), l.b.to_string()));
            }
        }
        Ok(())
    }

    /// A copy of the substrate restricted to one compute tier: nodes of
    /// that tier, all devices, and every link whose node endpoints
    /// survive the cut.
    pub fn restricted_to(&self, tier: Tier) -> Infrastructure {
        let nodes: Vec<ComputeNode> = self.nodes.iter().filter(|n| n.tier == tier).cloned().collect();
        let keep = |e: &Endpoint| match e {
            Endpoint::Node(id) => nodes.iter().any(|n| &n.node_id == id),
            Endpoint::Device(_) => true,
        };
        Infrastructure {
            links: self
                .links
                .iter()
                .filter(|l| keep(&l.a) && keep(&l.b))
                .cloned()
                .collect(),
            nodes,
            devices: self.devices.clone(),
            catalog: self.catalog.clone(),
            delay_unit_bits: self.delay_unit_bits,
        }
    }

    /// Sum of usable vCPUs over nodes of a tier.
    pub fn usable_vcpu(&self, tier: Tier) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.tier == tier)
            .map(ComputeNode::usable_vcpu)
            .sum()
    }
}

/// A substrate plus the requests to place on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub infra: Infrastructure,
    pub requests: Vec<Request>,
}

// ─── Reference scenario ─────────────────────────────────────────────────

/// Bits per kilobyte (decimal).
pub const BITS_PER_KB: f64 = 8_000.0;
/// Reference request load: 80 KB per period.
pub const REFERENCE_TRAFFIC_BITS: f64 = 80.0 * BITS_PER_KB;

pub(crate) struct ClassParams {
    pub(crate) bandwidth_bits: f64,
    pub(crate) cost_per_gb: f64,
    pub(crate) delay_range_ms: (f64, f64),
}

pub(crate) fn class_params(class: LinkClass) -> ClassParams {
    let (bw_mbps, cost_per_gb, delay) = match class {
        LinkClass::IotFog => (54.0, 1.0, (1.0, 2.0)),
        LinkClass::FogFog => (100.0, 2.0, (0.5, 1.2)),
        LinkClass::CloudFog => (10_000.0, 3.0, (15.0, 35.0)),
        LinkClass::IotCloud => (10_000.0, 4.0, (15.0, 35.0)),
        LinkClass::CloudCloud => (100_000.0, 0.1, (0.64, 0.64)),
    };
    ClassParams {
        bandwidth_bits: bw_mbps * 1e6,
        cost_per_gb,
        delay_range_ms: delay,
    }
}

pub(crate) fn classify(a_tier: Option<Tier>, b_tier: Option<Tier>) -> LinkClass {
    match (a_tier, b_tier) {
        (Some(Tier::Cloud), Some(Tier::Cloud)) => LinkClass::CloudCloud,
        (Some(Tier::Fog), Some(Tier::Fog)) => LinkClass::FogFog,
        (Some(_), Some(_)) => LinkClass::CloudFog,
        (None, Some(Tier::Cloud)) | (Some(Tier::Cloud), None) => LinkClass::IotCloud,
        _ => LinkClass::IotFog,
    }
}

/// The one VNF type used by both pipeline applications.
pub const SHARED_TYPE: &str = "historical_storage";

/// Names of the VNF types of the three reference applications. The
/// first two applications are plain six-stage pipelines that share
/// their final `historical_storage` stage; the third is the seven-leaf
/// driving pipeline with one selection and one loop.
const APP1_TYPES: [&str; 6] = [
    "seismic_ingest",
    "signal_filter",
    "event_detector",
    "magnitude_estimator",
    "alert_dispatcher",
    "historical_storage",
];
const APP2_TYPES: [&str; 6] = [
    "water_level_ingest",
    "flow_analyzer",
    "flood_predictor",
    "zone_mapper",
    "warning_publisher",
    "historical_storage",
];
const APP3_TYPES: [&str; 7] = [
    "object_detection",
    "object_tracking",
    "object_recognition",
    "smart_navigation",
    "collision_avoidance",
    "lane_change",
    "emergency_brake",
];

/// Builds the reference scenario: two cloud nodes (8 vCPU, $0.1/vCPU),
/// three fog nodes (3 vCPU, $6/vCPU), five access devices, full
/// connectivity, and three applications of 80 KB each.
///
/// Per-class bandwidths, link costs and delay ranges follow the table
/// in the module tests; per-link delays and per-type vCPU requirements
/// are drawn from the seeded generator, so equal seeds give identical
/// scenarios.
///
/// Requirement draws start uniform on 1..=4 and are then repaired
/// downwards deterministically until (a) every application fits the fog
/// tier on its own (first-fit-decreasing packing into the fog nodes)
/// and (b) the two pipeline applications jointly fit the cloud tier.
/// Without the repair, single-tier placements — which the evaluation
/// battery compares against — would almost always be infeasible.
pub fn generate_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mk_node = |id: &str, tier: Tier, cap: u32, cost: f64| ComputeNode {
        node_id: NodeId::from(id),
        tier,
        capacity_vcpu: cap,
        cost_per_vcpu: cost,
        usage_threshold: 1.0,
    };
    let nodes = vec![
        mk_node("cloud1", Tier::Cloud, 8, 0.1),
        mk_node("cloud2", Tier::Cloud, 8, 0.1),
        mk_node("fog1", Tier::Fog, 3, 6.0),
        mk_node("fog2", Tier::Fog, 3, 6.0),
        mk_node("fog3", Tier::Fog, 3, 6.0),
    ];
    let devices: Vec<DeviceId> = (1..=5).map(|i| DeviceId(format!("dev{i}"))).collect();

    // Full connectivity. Node-node links first (in declaration order of
    // the endpoint pair), then device-node links; each link draws its
    // delay from the class range in this fixed order.
    let mut links = Vec::new();
    let tier_of = |id: &NodeId| nodes.iter().find(|n| &n.node_id == id).map(|n| n.tier);
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let (a, b) = (nodes[i].node_id.clone(), nodes[j].node_id.clone());
            let class = classify(tier_of(&a), tier_of(&b));
            links.push(draw_link(
                &mut rng,
                Endpoint::Node(a),
                Endpoint::Node(b),
                class,
            ));
        }
    }
    for d in &devices {
        for n in &nodes {
            let class = classify(None, Some(n.tier));
            links.push(draw_link(
                &mut rng,
                Endpoint::Device(d.clone()),
                Endpoint::Node(n.node_id.clone()),
                class,
            ));
        }
    }

    // Catalog: union of the applications' types, in first-use order.
    let mut type_names: Vec<&str> = Vec::new();
    for name in APP1_TYPES.iter().chain(&APP2_TYPES).chain(&APP3_TYPES) {
        if !type_names.contains(name) {
            type_names.push(name);
        }
    }
    let mut requirements: Vec<u32> = type_names
        .iter()
        .map(|_| rng.random_range(1..=4u32))
        .collect();
    repair_requirements(&mut requirements, &type_names, &nodes);

    // The storage stage appears in both pipeline applications; two
    // instances exist so reusing one copy is a choice, not a constraint.
    let catalog: Vec<VnfType> = type_names
        .iter()
        .zip(&requirements)
        .map(|(name, &u)| VnfType {
            type_id: TypeId::from(*name),
            license_cost: 100.0,
            processing_capacity_bits: 1e7,
            resource_requirement: u,
            instance_count: if *name == SHARED_TYPE { 2 } else { 1 },
            processing_delay_cloud_ms: 3.12,
            processing_delay_fog_ms: 0.03,
        })
        .collect();

    let infra = Infrastructure {
        nodes,
        links,
        devices: devices.clone(),
        catalog,
        delay_unit_bits: REFERENCE_TRAFFIC_BITS,
    };
    infra.validate().expect("reference scenario is well-formed");

    let chain = |names: &[&str]| {
        StructuredTree::new(TreeNode::Seq(
            names.iter().map(|n| TreeNode::Vnf(TypeId::from(*n))).collect(),
        ))
    };
    let vnf = |n: &str| TreeNode::Vnf(TypeId::from(n));
    let app3_tree = StructuredTree::new(TreeNode::Seq(vec![
        vnf("object_detection"),
        vnf("object_tracking"),
        vnf("object_recognition"),
        vnf("smart_navigation"),
        TreeNode::Loop {
            q: 0.25,
            body: Box::new(TreeNode::Seq(vec![
                vnf("collision_avoidance"),
                TreeNode::Sel(vec![
                    (0.5, vnf("lane_change")),
                    (0.5, vnf("emergency_brake")),
                ]),
            ])),
        },
    ]));

    let mk_req = |id: &str, tree: StructuredTree, devs: &[usize]| Request {
        request_id: RequestId::from(id),
        tree,
        traffic_bits: REFERENCE_TRAFFIC_BITS,
        devices: devs.iter().map(|&i| devices[i].clone()).collect(),
    };
    let requests = vec![
        mk_req("app1", chain(&APP1_TYPES), &[0, 1]),
        mk_req("app2", chain(&APP2_TYPES), &[2, 3]),
        mk_req("app3", app3_tree, &[4]),
    ];

    Scenario { infra, requests }
}

fn draw_link(rng: &mut ChaCha8Rng, a: Endpoint, b: Endpoint, class: LinkClass) -> Link {
    let p = class_params(class);
    let (lo, hi) = p.delay_range_ms;
    let delay_ms = if lo == hi { lo } else { rng.random_range(lo..hi) };
    Link {
        link_id: format!("{a}__{b}"),
        a,
        b,
        class,
        bandwidth_bits: p.bandwidth_bits,
        cost_per_bit: p.cost_per_gb / 1e9,
        delay_ms,
        usage_threshold: 1.0,
    }
}

/// First-fit-decreasing bin packing of vCPU demands into node capacities.
pub fn packs_into(demands: &[u32], capacities: &[f64]) -> bool {
    let mut sorted: Vec<u32> = demands.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut free: Vec<f64> = capacities.to_vec();
    'outer: for d in sorted {
        for f in &mut free {
            if *f >= d as f64 {
                *f -= d as f64;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Deterministic downward repair of drawn requirements. Decrements the
/// largest offending requirement (ties: smallest index) until every app
/// packs into the fog nodes alone and the two pipeline apps jointly fit
/// the cloud tier.
fn repair_requirements(req: &mut [u32], names: &[&str], nodes: &[ComputeNode]) {
    let fog_caps: Vec<f64> = nodes
        .iter()
        .filter(|n| n.tier == Tier::Fog)
        .map(ComputeNode::usable_vcpu)
        .collect();
    let cloud_total: f64 = nodes
        .iter()
        .filter(|n| n.tier == Tier::Cloud)
        .map(ComputeNode::usable_vcpu)
        .sum();
    let idx_of = |name: &str| names.iter().position(|n| *n == name).unwrap();

    let apps: [Vec<usize>; 3] = [
        APP1_TYPES.iter().map(|n| idx_of(n)).collect(),
        APP2_TYPES.iter().map(|n| idx_of(n)).collect(),
        APP3_TYPES.iter().map(|n| idx_of(n)).collect(),
    ];
    for members in &apps {
        loop {
            let demands: Vec<u32> = members.iter().map(|&i| req[i]).collect();
            if packs_into(&demands, &fog_caps) {
                break;
            }
            decrement_largest(req, members);
        }
    }
    let joint_union: Vec<usize> = {
        let mut v: Vec<usize> = apps[0].clone();
        for &i in &apps[1] {
            if !v.contains(&i) {
                v.push(i);
            }
        }
        v
    };
    // Worst-case joint demand counts the shared stage once per app
    // (covers the variant where each app runs its own copy).
    let joint_demand = |req: &[u32]| -> f64 {
        apps[0]
            .iter()
            .chain(&apps[1])
            .map(|&i| req[i] as f64)
            .sum()
    };
    while joint_demand(req) > cloud_total {
        decrement_largest(req, &joint_union);
    }
}

fn decrement_largest(req: &mut [u32], members: &[usize]) {
    let &target = members
        .iter()
        .filter(|&&i| req[i] > 1)
        .max_by_key(|&&i| (req[i], std::cmp::Reverse(i)))
        .expect("requirements cannot be repaired below one vCPU each");
    req[target] -= 1;
}
