//! Small named instances over binary E, A and B.

use crate::instance::{Instance, JointPrior, OutcomeSpaces};
use crate::scoring::ScoreSpec;

fn binary(prior: JointPrior, score: ScoreSpec) -> Instance {
    Instance {
        spaces: OutcomeSpaces::numbered(2, 2, 2),
        prior,
        score,
    }
}

/// `A`, `B` uniform and independent, `E = A xor B`.
pub fn xor(score: ScoreSpec) -> Instance {
    binary(
        JointPrior::from_fn(2, 2, 2, |e, a, b| if e == a ^ b { 0.25 } else { 0.0 }),
        score,
    )
}

/// `E = A = B`, uniform.
pub fn copy(score: ScoreSpec) -> Instance {
    binary(
        JointPrior::from_fn(2, 2, 2, |e, a, b| if e == a && a == b { 0.5 } else { 0.0 }),
        score,
    )
}

/// `E`, `A`, `B` mutually independent and uniform.
pub fn independent(score: ScoreSpec) -> Instance {
    binary(JointPrior::from_fn(2, 2, 2, |_, _, _| 0.125), score)
}
