//! Human-readable scenario files and the structured-tree grammar.
//!
//! Scenarios are TOML documents. Every physical quantity carries its
//! unit in the field name (`bandwidth_mbps`, `cost_per_gb`, `delay_ms`,
//! `traffic_kb`, `processing_capacity_mbits`, `capacity_vcpu`), so the
//! file format is unambiguous even without this documentation. Unknown
//! fields are rejected and diagnostics point at the offending line.
//!
//! Application structures use a compact grammar inside the `tree`
//! field:
//!
//! ```text
//!   node  :=  TYPE_ID
//!          |  seq(node, node, ...)
//!          |  par(node, node, ...)
//!          |  sel(P1: node, P2: node, ...)     P_i sum to 1
//!          |  loop(Q; node)                    0 <= Q < 1
//! ```
//!
//! `seq` runs children in order, `par` in parallel, `sel` picks one
//! child by probability, and `loop` repeats its body with continuation
//! probability `Q`. Rendering a parsed tree reproduces an equivalent
//! string, so scenarios survive load/save round trips.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::app::{Request, RequestId, StructuredTree, TreeNode, TypeId, VnfType};
use crate::error::{ConfigError, ModelError};
use crate::infra::{
    class_params, classify, ComputeNode, DeviceId, Endpoint, Infrastructure, Link, NodeId, Tier,
    BITS_PER_KB, REFERENCE_TRAFFIC_BITS,
};
use crate::solver::SolveParams;

const BITS_PER_MBIT: f64 = 1e6;
const BITS_PER_GB: f64 = 1e9;

fn default_threshold() -> f64 {
    1.0
}

fn default_instances() -> u32 {
    1
}

/// Declarative scenario: infrastructure, applications, blend weight
/// and solver knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Objective blend: `alpha * cost + (1 - alpha) * makespan`.
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "SolverSection::is_default")]
    pub solver: SolverSection,
    pub nodes: Vec<NodeSection>,
    pub links: Vec<LinkSection>,
    #[serde(default)]
    pub devices: Vec<String>,
    pub vnf_types: Vec<VnfTypeSection>,
    pub requests: Vec<RequestSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl SolverSection {
    fn is_default(&self) -> bool {
        *self == SolverSection::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierName {
    Cloud,
    Fog,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    pub tier: TierName,
    pub capacity_vcpu: u32,
    pub cost_per_vcpu: f64,
    #[serde(default = "default_threshold")]
    pub usage_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    /// Node or device id.
    pub a: String,
    /// Node or device id.
    pub b: String,
    pub bandwidth_mbps: f64,
    pub cost_per_gb: f64,
    pub delay_ms: f64,
    #[serde(default = "default_threshold")]
    pub usage_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnfTypeSection {
    pub id: String,
    pub license_cost: f64,
    pub processing_capacity_mbits: f64,
    pub resource_vcpu: u32,
    #[serde(default = "default_instances")]
    pub instances: u32,
    pub delay_cloud_ms: f64,
    pub delay_fog_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestSection {
    pub id: String,
    pub traffic_kb: f64,
    pub devices: Vec<String>,
    /// Structure in the tree grammar (see the module documentation).
    pub tree: String,
}

/// A fully validated scenario ready to solve.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub infra: Infrastructure,
    pub requests: Vec<Request>,
    pub alpha: f64,
    pub solve: SolveParams,
}

// ---------------------------------------------------------------- tree grammar

/// Parses the tree grammar; errors carry the byte offset of the fault.
pub fn parse_tree(text: &str) -> Result<TreeNode, (usize, String)> {
    let mut p = TreeParser {
        s: text.as_bytes(),
        pos: 0,
    };
    let node = p.node()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err((p.pos, "unexpected trailing input".to_string()));
    }
    Ok(node)
}

/// Renders a tree back into the grammar; `parse_tree` inverts it.
pub fn render_tree(node: &TreeNode) -> String {
    match node {
        TreeNode::Vnf(t) => t.to_string(),
        TreeNode::Seq(cs) => format!(
            "seq({})",
            cs.iter().map(render_tree).collect::<Vec<_>>().join(", ")
        ),
        TreeNode::Par(cs) => format!(
            "par({})",
            cs.iter().map(render_tree).collect::<Vec<_>>().join(", ")
        ),
        TreeNode::Sel(cs) => format!(
            "sel({})",
            cs.iter()
                .map(|(p, c)| format!("{p}: {}", render_tree(c)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        TreeNode::Loop { q, body } => format!("loop({q}; {})", render_tree(body)),
    }
}

struct TreeParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl TreeParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), (usize, String)> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err((self.pos, format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String, (usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'-')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err((start, "expected an identifier".to_string()));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos])
            .expect("ascii subset")
            .to_string())
    }

    fn number(&mut self) -> Result<f64, (usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || c == b'-' || c == b'+')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii subset");
        text.parse()
            .map_err(|_| (start, format!("`{text}` is not a number")))
    }

    fn node(&mut self) -> Result<TreeNode, (usize, String)> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ident()?;
        self.skip_ws();
        let opens = self.peek() == Some(b'(');
        match (name.as_str(), opens) {
            ("seq", true) => Ok(TreeNode::Seq(self.child_list()?)),
            ("par", true) => Ok(TreeNode::Par(self.child_list()?)),
            ("sel", true) => {
                self.expect(b'(')?;
                let mut children = Vec::new();
                loop {
                    let p = self.number()?;
                    self.expect(b':')?;
                    children.push((p, self.node()?));
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        _ => break,
                    }
                }
                self.expect(b')')?;
                Ok(TreeNode::Sel(children))
            }
            ("loop", true) => {
                self.expect(b'(')?;
                let q = self.number()?;
                self.expect(b';')?;
                let body = Box::new(self.node()?);
                self.expect(b')')?;
                Ok(TreeNode::Loop { q, body })
            }
            ("seq" | "par" | "sel" | "loop", false) => {
                Err((self.pos, format!("operator `{name}` needs `(`")))
            }
            (_, true) => Err((at, format!("unknown operator `{name}`"))),
            (_, false) => Ok(TreeNode::Vnf(TypeId::from(name))),
        }
    }

    fn child_list(&mut self) -> Result<Vec<TreeNode>, (usize, String)> {
        self.expect(b'(')?;
        let mut children = vec![self.node()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    children.push(self.node()?);
                }
                _ => break,
            }
        }
        self.expect(b')')?;
        Ok(children)
    }
}

// ---------------------------------------------------------------- conversion

/// Converts a parsed file into validated domain objects.
pub fn to_domain(cfg: &ScenarioConfig) -> Result<LoadedScenario, ConfigError> {
    if !(0.0..=1.0).contains(&cfg.alpha) {
        return Err(ConfigError::Field {
            field: "alpha".to_string(),
            message: format!("must lie in [0, 1], got {}", cfg.alpha),
        });
    }
    let nodes: Vec<ComputeNode> = cfg
        .nodes
        .iter()
        .map(|n| ComputeNode {
            node_id: NodeId::from(n.id.clone()),
            tier: match n.tier {
                TierName::Cloud => Tier::Cloud,
                TierName::Fog => Tier::Fog,
            },
            capacity_vcpu: n.capacity_vcpu,
            cost_per_vcpu: n.cost_per_vcpu,
            usage_threshold: n.usage_threshold,
        })
        .collect();
    let tier_of = |id: &str| -> Option<Tier> {
        nodes
            .iter()
            .find(|n| n.node_id.as_str() == id)
            .map(|n| n.tier)
    };
    let endpoint_of = |id: &str| -> Result<Endpoint, ConfigError> {
        if tier_of(id).is_some() {
            Ok(Endpoint::Node(NodeId::from(id)))
        } else if cfg.devices.iter().any(|d| d == id) {
            Ok(Endpoint::Device(DeviceId::from(id)))
        } else {
            Err(ConfigError::Field {
                field: "links".to_string(),
                message: format!("endpoint `{id}` is neither a node nor a device"),
            })
        }
    };
    let links: Vec<Link> = cfg
        .links
        .iter()
        .map(|l| {
            let a = endpoint_of(&l.a)?;
            let b = endpoint_of(&l.b)?;
            let class = classify(tier_of(&l.a), tier_of(&l.b));
            Ok(Link {
                link_id: format!("{a}__{b}"),
                a,
                b,
                class,
                bandwidth_bits: l.bandwidth_mbps * BITS_PER_MBIT,
                cost_per_bit: l.cost_per_gb / BITS_PER_GB,
                delay_ms: l.delay_ms,
                usage_threshold: l.usage_threshold,
            })
        })
        .collect::<Result<_, ConfigError>>()?;
    let catalog: Vec<VnfType> = cfg
        .vnf_types
        .iter()
        .map(|t| VnfType {
            type_id: TypeId::from(t.id.clone()),
            license_cost: t.license_cost,
            processing_capacity_bits: t.processing_capacity_mbits * BITS_PER_MBIT,
            resource_requirement: t.resource_vcpu,
            instance_count: t.instances,
            processing_delay_cloud_ms: t.delay_cloud_ms,
            processing_delay_fog_ms: t.delay_fog_ms,
        })
        .collect();
    let infra = Infrastructure {
        nodes,
        links,
        devices: cfg.devices.iter().map(|d| DeviceId::from(d.clone())).collect(),
        catalog,
        delay_unit_bits: REFERENCE_TRAFFIC_BITS,
    };
    infra.validate().map_err(ConfigError::Model)?;

    let mut requests = Vec::with_capacity(cfg.requests.len());
    for r in &cfg.requests {
        let root = parse_tree(&r.tree).map_err(|(offset, message)| ConfigError::Tree {
            request: r.id.clone(),
            offset,
            message,
        })?;
        let tree = StructuredTree::new(root);
        tree.validate().map_err(ConfigError::Model)?;
        for d in &r.devices {
            if !infra.has_device(&DeviceId::from(d.clone())) {
                return Err(ConfigError::Model(ModelError::UnknownDevice(d.clone())));
            }
        }
        let request = Request {
            request_id: RequestId::from(r.id.clone()),
            tree,
            traffic_bits: r.traffic_kb * BITS_PER_KB,
            devices: r.devices.iter().map(|d| DeviceId::from(d.clone())).collect(),
        };
        let issues = crate::app::validate_request(&request, &infra.catalog);
        if let Some(first) = issues.first() {
            return Err(ConfigError::Field {
                field: format!("requests.{}", r.id),
                message: first.to_string(),
            });
        }
        requests.push(request);
    }

    Ok(LoadedScenario {
        infra,
        requests,
        alpha: cfg.alpha,
        solve: SolveParams {
            node_budget: cfg.solver.node_budget,
            workers: cfg.solver.workers.unwrap_or(1),
            collect_trace: false,
        },
    })
}

/// Rebuilds a config from domain objects (for saving scenarios).
pub fn from_domain(infra: &Infrastructure, requests: &[Request], alpha: f64) -> ScenarioConfig {
    ScenarioConfig {
        alpha,
        solver: SolverSection::default(),
        nodes: infra
            .nodes
            .iter()
            .map(|n| NodeSection {
                id: n.node_id.to_string(),
                tier: match n.tier {
                    Tier::Cloud => TierName::Cloud,
                    Tier::Fog => TierName::Fog,
                },
                capacity_vcpu: n.capacity_vcpu,
                cost_per_vcpu: n.cost_per_vcpu,
                usage_threshold: n.usage_threshold,
            })
            .collect(),
        links: infra
            .links
            .iter()
            .map(|l| LinkSection {
                a: endpoint_id(&l.a),
                b: endpoint_id(&l.b),
                bandwidth_mbps: l.bandwidth_bits / BITS_PER_MBIT,
                cost_per_gb: l.cost_per_bit * BITS_PER_GB,
                delay_ms: l.delay_ms,
                usage_threshold: l.usage_threshold,
            })
            .collect(),
        devices: infra.devices.iter().map(|d| d.to_string()).collect(),
        vnf_types: infra
            .catalog
            .iter()
            .map(|t| VnfTypeSection {
                id: t.type_id.to_string(),
                license_cost: t.license_cost,
                processing_capacity_mbits: t.processing_capacity_bits / BITS_PER_MBIT,
                resource_vcpu: t.resource_requirement,
                instances: t.instance_count,
                delay_cloud_ms: t.processing_delay_cloud_ms,
                delay_fog_ms: t.processing_delay_fog_ms,
            })
            .collect(),
        requests: requests
            .iter()
            .map(|r| RequestSection {
                id: r.request_id.to_string(),
                traffic_kb: r.traffic_bits / BITS_PER_KB,
                devices: r.devices.iter().map(|d| d.to_string()).collect(),
                tree: render_tree(&r.tree.root),
            })
            .collect(),
    }
}

fn endpoint_id(e: &Endpoint) -> String {
    match e {
        Endpoint::Node(n) => n.to_string(),
        Endpoint::Device(d) => d.to_string(),
    }
}

/// Parses TOML text into a config (schema-validated, unknown fields
/// rejected).
pub fn from_toml_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Serializes a config as TOML.
pub fn to_toml_string(cfg: &ScenarioConfig) -> Result<String, ConfigError> {
    toml::to_string_pretty(cfg).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Reads and fully validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    to_domain(&from_toml_str(&text)?)
}

/// Writes a scenario file.
pub fn save_scenario(cfg: &ScenarioConfig, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, to_toml_string(cfg)?).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Default parameters for links of a given class, exposed for scenario
/// authoring tools.
pub fn link_defaults(class: crate::infra::LinkClass) -> (f64, f64) {
    let p = class_params(class);
    (p.bandwidth_bits / BITS_PER_MBIT, p.cost_per_gb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infra::generate_scenario;
    use crate::solver::{solve_exact, SolveParams};

    const TINY: &str = r#"
alpha = 0.5
devices = ["d1"]

[[nodes]]
id = "c1"
tier = "cloud"
capacity_vcpu = 8
cost_per_vcpu = 0.1

[[nodes]]
id = "f1"
tier = "fog"
capacity_vcpu = 3
cost_per_vcpu = 6.0

[[links]]
a = "c1"
b = "f1"
bandwidth_mbps = 10000.0
cost_per_gb = 3.0
delay_ms = 20.0

[[links]]
a = "d1"
b = "c1"
bandwidth_mbps = 10000.0
cost_per_gb = 4.0
delay_ms = 25.0

[[links]]
a = "d1"
b = "f1"
bandwidth_mbps = 54.0
cost_per_gb = 1.0
delay_ms = 1.5

[[vnf_types]]
id = "filter"
license_cost = 100.0
processing_capacity_mbits = 10.0
resource_vcpu = 2
delay_cloud_ms = 3.12
delay_fog_ms = 0.03

[[vnf_types]]
id = "detect"
license_cost = 100.0
processing_capacity_mbits = 10.0
resource_vcpu = 1
delay_cloud_ms = 3.12
delay_fog_ms = 0.03

[[requests]]
id = "app"
traffic_kb = 80.0
devices = ["d1"]
tree = "seq(filter, loop(0.25; sel(0.5: detect, 0.5: filter)))"
"#;

    #[test]
    fn tiny_file_loads_with_converted_units() {
        let loaded = to_domain(&from_toml_str(TINY).unwrap()).unwrap();
        assert_eq!(loaded.alpha, 0.5);
        assert_eq!(loaded.infra.nodes.len(), 2);
        let fog_link = loaded
            .infra
            .link_between(
                &Endpoint::Device(DeviceId::from("d1")),
                &Endpoint::Node(NodeId::from("f1")),
            )
            .unwrap()
            .unwrap();
        assert_eq!(fog_link.bandwidth_bits, 54e6);
        assert_eq!(fog_link.cost_per_bit, 1.0 / 1e9);
        let r = &loaded.requests[0];
        assert_eq!(r.traffic_bits, 640_000.0);
        assert_eq!(r.tree.leaf_count(), 3);
        // the file is solvable end to end
        let res = solve_exact(&loaded.infra, &loaded.requests, loaded.alpha, &loaded.solve)
            .unwrap();
        assert!(res.placement.is_some());
    }

    #[test]
    fn unknown_fields_are_rejected_with_a_located_message() {
        let bad = TINY.replace("capacity_vcpu = 8", "capacity_vcpu = 8\nvcpus = 8");
        let err = from_toml_str(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("vcpus"), "{msg}");
        assert!(msg.contains("line"), "diagnostic should cite a line: {msg}");
    }

    #[test]
    fn unit_suffixes_are_part_of_the_schema() {
        let bad = TINY.replace("delay_ms = 20.0", "delay = 20.0");
        assert!(from_toml_str(&bad).is_err());
        let bad = TINY.replace("traffic_kb = 80.0", "traffic = 80.0");
        assert!(from_toml_str(&bad).is_err());
    }

    #[test]
    fn tree_grammar_parses_nesting_and_round_trips() {
        let text = "seq(a, loop(0.25; seq(b, sel(0.5: c, 0.5: d))), par(e, f))";
        let tree = parse_tree(text).unwrap();
        match &tree {
            TreeNode::Seq(cs) => {
                assert_eq!(cs.len(), 3);
                assert!(matches!(cs[0], TreeNode::Vnf(_)));
                assert!(matches!(cs[1], TreeNode::Loop { .. }));
                assert!(matches!(cs[2], TreeNode::Par(_)));
            }
            other => panic!("expected seq, got {other:?}"),
        }
        let rendered = render_tree(&tree);
        assert_eq!(parse_tree(&rendered).unwrap(), tree);
        assert_eq!(rendered, "seq(a, loop(0.25; seq(b, sel(0.5: c, 0.5: d))), par(e, f))");
    }

    #[test]
    fn tree_grammar_errors_carry_byte_offsets() {
        let err = parse_tree("seq(a, sel(0.5 c))").unwrap_err();
        assert_eq!(err.0, 15, "offset should point at the missing colon");
        let err = parse_tree("seq(a").unwrap_err();
        assert!(err.1.contains(")"));
        let err = parse_tree("blend(a, b)").unwrap_err();
        assert!(err.1.contains("unknown operator"));
        // a bad loop probability fails domain validation, not parsing
        let cfg = from_toml_str(
            &TINY.replace("loop(0.25;", "loop(1.5;"),
        )
        .unwrap();
        let err = to_domain(&cfg).unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Model(ModelError::LoopProbabilityOutOfRange(_))
        ));
    }

    #[test]
    fn unknown_references_are_rejected() {
        let cfg = from_toml_str(&TINY.replace("devices = [\"d1\"]\ntree", "devices = [\"ghost\"]\ntree")).unwrap();
        assert!(matches!(
            to_domain(&cfg),
            Err(ConfigError::Model(ModelError::UnknownDevice(_)))
        ));
        let cfg = from_toml_str(&TINY.replace("b = \"f1\"\nbandwidth_mbps = 54.0", "b = \"f9\"\nbandwidth_mbps = 54.0")).unwrap();
        assert!(matches!(to_domain(&cfg), Err(ConfigError::Field { .. })));
    }

    #[test]
    fn alpha_out_of_range_is_a_field_error() {
        let cfg = from_toml_str(&TINY.replace("alpha = 0.5", "alpha = 1.5")).unwrap();
        assert!(matches!(to_domain(&cfg), Err(ConfigError::Field { field, .. }) if field == "alpha"));
    }

    #[test]
    fn reference_scenario_survives_a_save_load_round_trip() {
        let scenario = generate_scenario(3);
        let cfg = from_domain(&scenario.infra, &scenario.requests, 0.5);
        let text = to_toml_string(&cfg).unwrap();
        let loaded = to_domain(&from_toml_str(&text).unwrap()).unwrap();
        assert_eq!(loaded.infra.nodes.len(), scenario.infra.nodes.len());
        assert_eq!(loaded.infra.links.len(), scenario.infra.links.len());
        assert_eq!(loaded.infra.catalog.len(), scenario.infra.catalog.len());
        assert_eq!(loaded.requests.len(), scenario.requests.len());
        for (a, b) in loaded.requests.iter().zip(&scenario.requests) {
            assert_eq!(a.request_id, b.request_id);
            assert_eq!(render_tree(&a.tree.root), render_tree(&b.tree.root));
            assert_eq!(a.traffic_bits, b.traffic_bits);
        }
        // objective parity on a one-request solve across the round trip
        let before = solve_exact(
            &scenario.infra,
            &scenario.requests[..1],
            0.5,
            &SolveParams::default(),
        )
        .unwrap();
        let after = solve_exact(&loaded.infra, &loaded.requests[..1], 0.5, &SolveParams::default())
            .unwrap();
        let (b, a) = (
            before.objective_value().unwrap(),
            after.objective_value().unwrap(),
        );
        assert!((b - a).abs() < 1e-9 * (1.0 + b.abs()), "{b} vs {a}");
    }

    #[test]
    fn files_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.toml");
        let scenario = generate_scenario(0);
        let cfg = from_domain(&scenario.infra, &scenario.requests, 0.25);
        save_scenario(&cfg, &path).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(loaded.alpha, 0.25);
        assert_eq!(loaded.requests.len(), scenario.requests.len());
        let missing = load_scenario(&dir.path().join("absent.toml"));
        assert!(matches!(missing, Err(ConfigError::Io { .. })));
    }
}
