//! Seeded random instances and schemes for property checks.

use rand::Rng;

use crate::instance::{JointPrior, SignalingScheme};
use crate::scoring::{Piece, ScoreSpec};
use crate::simplex::sample_uniform;

/// A prior drawn uniformly from the simplex over `E x A x B`.
pub fn random_prior<R: Rng>(rng: &mut R, ne: usize, na: usize, nb: usize) -> JointPrior {
    let w = sample_uniform(rng, ne * na * nb);
    JointPrior::from_fn(ne, na, nb, |e, a, b| w[(e * na + a) * nb + b])
}

/// Max-affine `G` with 1 to 4 pieces, every coefficient uniform in `[-1, 1]`.
pub fn random_piecewise<R: Rng>(rng: &mut R, ne: usize) -> ScoreSpec {
    let k = rng.gen_range(1..=4);
    let pieces = (0..k)
        .map(|_| {
            let r = (0..ne).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            Piece::new(r, rng.gen_range(-1.0..=1.0))
        })
        .collect();
    ScoreSpec::piecewise(pieces)
}

/// A scheme with 1 to `max_signals` signals; each Alice outcome's mass is
/// split across signals by a uniform draw from the simplex.
pub fn random_scheme<R: Rng>(rng: &mut R, prior: &JointPrior, max_signals: usize) -> SignalingScheme {
    let mu = prior.alice_marginal();
    let m = rng.gen_range(1..=max_signals.max(1));
    let mut pi = vec![vec![0.0; mu.len()]; m];
    for (a, &ma) in mu.iter().enumerate() {
        let split = sample_uniform(rng, m);
        for s in 0..m {
            pi[s][a] = ma * split[s];
        }
    }
    SignalingScheme {
        labels: (0..m).map(|s| s.to_string()).collect(),
        pi,
    }
}
