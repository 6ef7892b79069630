//! Shared fixtures for the criterion benchmarks.

use fogweave_core::eval::Placement;
use fogweave_core::infra::{generate_scenario, Scenario};
use fogweave_core::solver::{solve_exact, SolveParams};

/// The reference scenario used by every benchmark.
pub fn scenario() -> Scenario {
    generate_scenario(0)
}

/// An optimal placement of the first application, for benchmarks that
/// need a solved input.
pub fn solved_app1(scenario: &Scenario) -> Placement {
    solve_exact(
        &scenario.infra,
        &scenario.requests[..1],
        0.5,
        &SolveParams::default(),
    )
    .expect("reference solve runs")
    .placement
    .expect("reference scenario is feasible")
}
