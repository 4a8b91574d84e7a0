//! Scenario generation, the brute-force oracle, and the method-comparison
//! harness.

mod compare;
mod generate;
mod oracle;

pub use compare::{rows_to_csv, run_comparison, CompareOptions, ComparisonRow, Method};
pub use generate::{
    default_network, generate, load_scenario, scenario_from_str, star_network, Case, GenerateError,
    ScenarioSpec,
};
pub use oracle::{brute_force_optimal, OracleError, OracleLimits};
