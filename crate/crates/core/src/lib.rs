//! Equilibrium computation for two-player restraint-signaling games.
//!
//! State A privately knows whether it is restrained or aggressive and sends a
//! costly signal `m`. State B observes the signal and either launches a
//! preventive conflict or waits. If it waits, State A acquires a decisive
//! strategic advantage and chooses whether to exploit it.
//!
//! The crate is organised around that game:
//!
//! * [`game`] holds the parameter space, the four cost mechanisms and the
//!   payoff table.
//! * [`closed_form`] checks the analytic pooling, separating and type-shift
//!   conditions and reports their slack.
//! * [`oracle`] brute-forces weak perfect Bayesian equilibria on a finite
//!   signal grid and cross-checks the analytic verdicts.
//! * [`sweep`] classifies parameter grids into equilibrium regions.
//! * [`montecarlo`] simulates play when a restrained type can drift to
//!   aggression before the advantage arrives.

pub mod closed_form;
pub mod error;
pub mod game;
pub mod montecarlo;
pub mod oracle;
pub mod sweep;

mod numeric;

pub use closed_form::{
    classify, pooling_exists, separating_exists, type_shift_refrain, Clause, ConditionReport,
    EquilibriumReport, TypeShiftReport, TOL,
};
pub use error::{Error, Result};
pub use game::{
    payoff, Mechanism, MechanismSpec, ModelParams, Outcome, PayoffPair, TypeLabel, Variant,
};
pub use montecarlo::{
    simulate, simulate_with_trials, DriftMode, OutcomeCounts, PriorWeightedStats, SimConfig,
    SimResult, TrialRecord,
};
pub use oracle::{
    find_all_pbe, find_all_pbe_with_budget, is_weak_pbe, oracle_verdict,
    verify_against_closed_form, BeliefAssignment, Discrepancy, DiscreteGame, PbeCertificate,
    PbeClass, PerType, StrategyProfile, T2Action, Verdict, DEFAULT_PROFILE_BUDGET,
};
pub use sweep::{
    boundary_trace, run_sweep, Axis, BoundaryPoint, Classification, GridSpec, RegionRow, Symbol,
    CSV_HEADER, DEFAULT_ORACLE_FRACTION,
};
