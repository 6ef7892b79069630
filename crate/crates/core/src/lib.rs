//! fogweave-core: exact placement of structured service chains across
//! cloud and fog infrastructure.
//!
//! Applications are modelled as structured trees of VNFs (sequence,
//! parallel, probabilistic selection, probabilistic loop). The engine
//! places every VNF of every request onto compute nodes of a hybrid
//! cloud/fog substrate, minimising a weighted sum of expected monetary
//! cost and expected makespan:
//!
//! ```text
//!     minimise   alpha * total_cost + (1 - alpha) * total_makespan
//! ```
//!
//! The crate provides:
//!
//! * [`app`] — application trees, expected-iteration math, leaf weights;
//! * [`infra`] — substrate model and a seeded reference scenario generator;
//! * [`eval`] — cost/makespan evaluation and feasibility checking;
//! * [`solver`] — exact branch-and-bound, a brute-force oracle, a random
//!   baseline and tier-restricted solves;
//! * [`milp`] — 0/1 linear model builder with LP-format export;
//! * [`montecarlo`] — stochastic execution sampler that validates the
//!   analytic expectations;
//! * [`experiments`] — scripted evaluation battery with CSV output;
//! * [`config`] — human-readable scenario files and the tree grammar.

pub mod app;
pub mod config;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod infra;
pub mod milp;
pub mod montecarlo;
pub mod solver;
pub mod testgen;

pub use app::{
    annotate_leaves, expected_iterations, LeafAnnotation, LeafId, Request, RequestId,
    StructuredTree, TreeNode, TypeId, VnfType,
};
pub use config::{
    from_domain, from_toml_str, load_scenario, parse_tree, render_tree, save_scenario,
    to_domain, to_toml_string, LoadedScenario, ScenarioConfig,
};
pub use error::{ConfigError, EvalError, MilpError, ModelError, SolveError};
pub use milp::{build_model, export_lp, objective_at, parse_lp, render_lp, MilpModel};
pub use eval::{
    check_feasibility, cost_of, makespan_of, system_objective, CostBreakdown, MakespanBreakdown,
    ObjectiveValue, Placement, Violation,
};
pub use experiments::{
    run_all, run_alpha_sweep, run_random_comparison, run_sharing_comparison,
    run_tier_comparison, write_reports, AssertionRecord, ExperimentReport, DEFAULT_ALPHA_GRID,
};
pub use solver::{
    random_feasible, solve_bruteforce, solve_exact, solve_restricted, SolveParams, SolveResult,
    SolveStatus,
};

pub use infra::{
    generate_scenario, ComputeNode, DeviceId, Endpoint, Infrastructure, Link, LinkClass, NodeId,
    Scenario, Tier, VnfInstanceRef,
};
