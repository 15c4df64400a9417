//! Semi-device-independent verification of Bell and GHZ states.
//!
//! The library answers four questions about a verification experiment in
//! which a trusted party holds a single qubit and everyone else may
//! collude:
//!
//! * **How well can a cheat do?** [`guessing`] computes the adversary's
//!   best passing probability γ against a measurement strategy μ — exact
//!   closed forms for the named protocols, a lattice-plus-refinement
//!   numeric oracle for arbitrary strategies, an exact subset-enumeration
//!   solver for centrally symmetric discrete strategies, and the Helstrom
//!   bound for explicit prepared states.
//! * **What do multiparty tests look like?** [`ghz`] builds the test
//!   distribution for GHZ verification with a dishonest coalition, checks
//!   test compatibility, and reduces the multiparty game to an effective
//!   single-qubit strategy.
//! * **Does simulation agree?** [`simulator`] plays the adversarial games
//!   trial by trial — honest targets, fixed prepared states, extremal
//!   product cheats, and tagged mixtures — reproducibly and in parallel,
//!   with optional JSON-lines transcripts and statistical verdicts.
//! * **How many rounds are needed?** [`planner`] turns error and
//!   confidence targets into sample sizes and compares protocols.
//!
//! Supporting modules: [`qcore`] (complex matrices, states, eigensolver,
//! entanglement measures), [`strategy`] (measurement strategies μ and the
//! named protocol catalog), [`special`] (elliptic integral, error
//! function), [`quad`] (quadrature rules), and [`error`].

pub mod error;
pub mod ghz;
pub mod guessing;
pub mod planner;
pub mod qcore;
pub mod quad;
pub mod simulator;
pub mod special;
pub mod strategy;

pub use error::{Error, Result};
pub use ghz::{
    compatibility_oracle, effective_strategy, evaluate_test, generate_test, is_compatible,
    GhzStrategy, GhzTest, PartyLayout, PhaseLaw,
};
pub use guessing::{
    g_closed, g_oracle, g_star, g_star_center_symmetric, g_value, gamma_fidelity, gamma_hat,
    gamma_of_state, gamma_star, gme_threshold, helstrom, xi_bounds, GuessReport, HelstromResult,
    MaximizerDegeneracy, Method, ORACLE_TOL,
};
pub use planner::{
    comparison_csv, comparison_table, robustness_trace_distance, samples_di_mermin,
    samples_di_quadratic, samples_sdi, samples_standard, PlanRequest, PlanResult, Scenario,
};
pub use qcore::{concurrence, concurrence_pure, DensityOperator, PureState, TwoQubitState};
pub use simulator::{
    play_bell, play_bell_transcript, play_ghz, play_ghz_transcript, sweep_concurrence, verdict,
    AdversaryModel, GameRecord, SweepRow, VerdictReport,
};
pub use strategy::{
    Atom, BlochVector, Protocol, ProtocolName, ProtocolParams, Strategy, StrategyKind,
};
