//! Optimal commitment for Alice in the Alice-Bob-Alice scoring-rule market.
//!
//! Alice commits to a signaling scheme over her private signal; Bob, who holds
//! his own signal, trades on what she announces. The game is constant-sum, so
//! Alice's best commitment minimizes Bob's expected gain. This crate computes
//! that commitment exactly for piecewise-linear expected-score functions, and
//! to within a chosen `delta` via posterior grids for general ones.

pub mod belief;
pub mod cli;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod fptas;
pub mod instance;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod random;
pub mod report;
pub mod scoring;
pub mod simplex;

pub use belief::{
    alice_total_utility, bob_utility_from_v_eb, bob_utility_from_w_a, bob_utility_of_scheme,
    posterior_e_given_s, posterior_e_given_sb, prob_b_given_s, sender_objective,
    PosteriorDistribution, SupportKind,
};
pub use error::{Error, Result};
pub use instance::{
    marginals_and_conditionals, total_value_v, validate_instance, Instance, JointPrior,
    OutcomeSpaces, SignalingScheme, Violation,
};
pub use report::{CheckReport, Classification, Method, SolveReport};
pub use scoring::{DecisionProblem, HolderParams, Piece, ScoreKind, ScoreRule, ScoreSpec};
