//! Scenario I/O, batch sweeps and exhaustive search.

pub mod scenario;
pub mod search;
pub mod sweep;

pub use scenario::{parse_scenario, AgentSpec, Scenario};
pub use search::{
    all_placements, exhaustive_search, representative_placements, search_placements, Counterexample, SearchConfig,
    SearchReport, Verdict,
};
pub use sweep::{fit_chirality, parse_sweep, run_batch, ChiralityFit, SweepCell, SweepReport, SweepRow, SweepSpec, SweepSummary};
