//! Posterior calculus and the utility functionals of the commitment game.
//!
//! A signal `s` rescales each Alice outcome by `rho_s(a) = pi(s, a) / mu(a)`,
//! so `Pr(e, b, s) = sum_a rho_s(a) mu(e, a, b)`. Everything below is read off
//! that joint.

use crate::error::{Error, Result};
use crate::instance::{marginals_and_conditionals, JointPrior, SignalingScheme};
use crate::scoring::{DecisionProblem, ScoreSpec};
use crate::simplex::SIMPLEX_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportKind {
    OverE,
    OverA,
    /// Flattened `[e][b]`.
    OverEtimesB,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDistribution {
    pub support: SupportKind,
    pub weights: Vec<f64>,
}

impl PosteriorDistribution {
    pub fn new(support: SupportKind, weights: Vec<f64>) -> Result<Self> {
        if !crate::simplex::is_on_simplex(&weights, SIMPLEX_TOL) {
            return Err(Error::InvalidArgument(format!(
                "weights {weights:?} are not a distribution"
            )));
        }
        Ok(PosteriorDistribution { support, weights })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

fn check_signal(scheme: &SignalingScheme, s: usize) -> Result<()> {
    if s >= scheme.n_signals() {
        return Err(Error::InvalidArgument(format!(
            "signal index {s} out of range ({} signals)",
            scheme.n_signals()
        )));
    }
    Ok(())
}

/// Unnormalized `Pr(e, b, S = s)` flattened `[e][b]` for the signal row `pi_s`.
pub(crate) fn joint_eb(prior: &JointPrior, mu_a: &[f64], pi_s: &[f64]) -> Vec<f64> {
    let (ne, na, nb) = prior.dims();
    let mut q = vec![0.0; ne * nb];
    for a in 0..na {
        if mu_a[a] <= 0.0 || pi_s[a] == 0.0 {
            continue;
        }
        let rho = pi_s[a] / mu_a[a];
        for e in 0..ne {
            for b in 0..nb {
                q[e * nb + b] += rho * prior.get(e, a, b);
            }
        }
    }
    q
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// `Pr(e | s)`.
pub fn posterior_e_given_s(
    prior: &JointPrior,
    scheme: &SignalingScheme,
    s: usize,
) -> Result<PosteriorDistribution> {
    check_signal(scheme, s)?;
    let (ne, _, nb) = prior.dims();
    let q = joint_eb(prior, &prior.alice_marginal(), &scheme.pi[s]);
    let pe: Vec<f64> = (0..ne).map(|e| q[e * nb..(e + 1) * nb].iter().sum()).collect();
    if pe.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroProbabilitySignal {
            signal: scheme.labels[s].clone(),
        });
    }
    Ok(PosteriorDistribution {
        support: SupportKind::OverE,
        weights: normalized(pe),
    })
}

/// `Pr(e | s, b)`.
pub fn posterior_e_given_sb(
    prior: &JointPrior,
    scheme: &SignalingScheme,
    s: usize,
    b: usize,
) -> Result<PosteriorDistribution> {
    check_signal(scheme, s)?;
    let (ne, _, nb) = prior.dims();
    if b >= nb {
        return Err(Error::InvalidArgument(format!("bob outcome {b} out of range")));
    }
    let q = joint_eb(prior, &prior.alice_marginal(), &scheme.pi[s]);
    let col: Vec<f64> = (0..ne).map(|e| q[e * nb + b]).collect();
    if col.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroProbabilityPair {
            signal: scheme.labels[s].clone(),
            bob: b,
        });
    }
    Ok(PosteriorDistribution {
        support: SupportKind::OverE,
        weights: normalized(col),
    })
}

/// `Pr(b | s)` as a plain vector over Bob's outcomes.
pub fn prob_b_given_s(prior: &JointPrior, scheme: &SignalingScheme, s: usize) -> Result<Vec<f64>> {
    check_signal(scheme, s)?;
    let (ne, _, nb) = prior.dims();
    let q = joint_eb(prior, &prior.alice_marginal(), &scheme.pi[s]);
    let pb: Vec<f64> = (0..nb).map(|b| (0..ne).map(|e| q[e * nb + b]).sum()).collect();
    if pb.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroProbabilitySignal {
            signal: scheme.labels[s].clone(),
        });
    }
    Ok(normalized(pb))
}

fn finite_g(score: &ScoreSpec, p: &[f64], what: &str) -> Result<f64> {
    let g = score.eval_g(p);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::NonFiniteScore(what.to_string()))
    }
}

/// Unnormalized form of `u_B(v)`: accepts any nonnegative `q` over `E x B` and
/// returns `|q| * u_B(q / |q|)`, which is zero for `q = 0`.
pub(crate) fn bob_gain_unnormalized(score: &ScoreSpec, q: &[f64], ne: usize, nb: usize) -> Result<f64> {
    let mut col = vec![0.0; ne];
    let mut pe = vec![0.0; ne];
    let mut acc = 0.0;
    for b in 0..nb {
        let mut lam = 0.0;
        for e in 0..ne {
            col[e] = q[e * nb + b];
            lam += col[e];
            pe[e] += col[e];
        }
        if lam <= 0.0 {
            continue;
        }
        for x in &mut col {
            *x /= lam;
        }
        acc += lam * finite_g(score, &col, "G at a posterior given (s, b)")?;
    }
    let total: f64 = pe.iter().sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    for x in &mut pe {
        *x /= total;
    }
    Ok(acc - total * finite_g(score, &pe, "G at a posterior given s")?)
}

/// Bob's expected utility `E_{s,b} G(p_{s,b}) - E_s G(p_s)` under a truthfully known scheme.
pub fn bob_utility_of_scheme(
    prior: &JointPrior,
    score: &ScoreSpec,
    scheme: &SignalingScheme,
) -> Result<f64> {
    let (ne, _, nb) = prior.dims();
    let mu_a = prior.alice_marginal();
    let mut acc = 0.0;
    for row in &scheme.pi {
        if row.iter().sum::<f64>() <= 0.0 {
            continue;
        }
        let q = joint_eb(prior, &mu_a, row);
        acc += bob_gain_unnormalized(score, &q, ne, nb)?;
    }
    Ok(acc)
}

/// Alice's sender objective, the negation of Bob's utility.
pub fn sender_objective(
    prior: &JointPrior,
    score: &ScoreSpec,
    scheme: &SignalingScheme,
) -> Result<f64> {
    Ok(-bob_utility_of_scheme(prior, score, scheme)?)
}

/// Sender objective written through the decision problem: Bob best-responds to
/// `p_s` and then to `p_{s,b}`.
pub fn sender_objective_decision_form(
    prior: &JointPrior,
    decision: &DecisionProblem,
    scheme: &SignalingScheme,
) -> Result<f64> {
    let mut acc = 0.0;
    for s in 0..scheme.n_signals() {
        let mass = scheme.signal_mass(s);
        if mass <= 0.0 {
            continue;
        }
        let ps = posterior_e_given_s(prior, scheme, s)?;
        acc += mass * decision.value(&ps.weights);
        let pb = prob_b_given_s(prior, scheme, s)?;
        for (b, &w) in pb.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let psb = posterior_e_given_sb(prior, scheme, s, b)?;
            acc -= mass * w * decision.value(&psb.weights);
        }
    }
    Ok(acc)
}

/// `u_B(w)` for a posterior `w` over Alice's outcomes, via the conditional table.
///
/// `w` must vanish wherever `mu(a) = 0`.
pub fn bob_utility_from_w_a(prior: &JointPrior, score: &ScoreSpec, w: &[f64]) -> Result<f64> {
    let (ne, na, nb) = prior.dims();
    if w.len() != na || !crate::simplex::is_on_simplex(w, SIMPLEX_TOL) {
        return Err(Error::InvalidArgument(format!(
            "w = {w:?} is not a distribution over {na} alice outcomes"
        )));
    }
    let t = marginals_and_conditionals(prior);
    if let Some(a) = (0..na).find(|&a| w[a] > 0.0 && t.a[a] <= 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "w puts mass {} on alice outcome {a}, which has prior probability 0",
            w[a]
        )));
    }
    let live: Vec<usize> = (0..na).filter(|&a| w[a] > 0.0).collect();
    let pe: Vec<f64> = (0..ne)
        .map(|e| live.iter().map(|&a| w[a] * t.e_given_a[e][a].unwrap()).sum())
        .collect();
    let mut acc = -finite_g(score, &pe, "G at the posterior w")?;
    for b in 0..nb {
        let pb: f64 = live.iter().map(|&a| w[a] * t.b_given_a[a][b].unwrap()).sum();
        if pb <= 0.0 {
            continue;
        }
        let post: Vec<f64> = (0..ne)
            .map(|e| {
                live.iter()
                    .map(|&a| {
                        let mb = t.b_given_a[a][b].unwrap();
                        if mb > 0.0 {
                            w[a] * mb * t.e_given_ab[e][a][b].unwrap()
                        } else {
                            0.0
                        }
                    })
                    .sum::<f64>()
                    / pb
            })
            .collect();
        acc += pb * finite_g(score, &post, "G at the posterior given (w, b)")?;
    }
    Ok(acc)
}

/// `u_B(v) = sum_b lambda_b G(v_{., b} / lambda_b) - G(sum_b v_{., b})` for `v`
/// over `E x B` flattened `[e][b]`.
pub fn bob_utility_from_v_eb(score: &ScoreSpec, v: &[f64], ne: usize, nb: usize) -> Result<f64> {
    if v.len() != ne * nb || !crate::simplex::is_on_simplex(v, SIMPLEX_TOL) {
        return Err(Error::InvalidArgument(format!(
            "v has {} entries, expected a distribution over {ne}x{nb}",
            v.len()
        )));
    }
    bob_gain_unnormalized(score, v, ne, nb)
}

/// Alice's expected market payoff
/// `E[R(p_S, E) - R(p, E) + R(p_{A,B}, E) - R(p_{S,B}, E)]`, summed over outcomes.
pub fn alice_total_utility(
    prior: &JointPrior,
    score: &ScoreSpec,
    scheme: &SignalingScheme,
) -> Result<f64> {
    let (ne, na, nb) = prior.dims();
    let mu_a = prior.alice_marginal();
    let p = prior.event_marginal();
    let mut p_ab = vec![vec![vec![0.0; ne]; nb]; na];
    for a in 0..na {
        for b in 0..nb {
            let m: f64 = (0..ne).map(|e| prior.get(e, a, b)).sum();
            if m > 0.0 {
                for e in 0..ne {
                    p_ab[a][b][e] = prior.get(e, a, b) / m;
                }
            }
        }
    }
    let mut acc = 0.0;
    for row in &scheme.pi {
        if row.iter().sum::<f64>() <= 0.0 {
            continue;
        }
        let q = joint_eb(prior, &mu_a, row);
        let mut p_s: Vec<f64> = (0..ne).map(|e| q[e * nb..(e + 1) * nb].iter().sum()).collect();
        let ms: f64 = p_s.iter().sum();
        for x in &mut p_s {
            *x /= ms;
        }
        let p_sb: Vec<Vec<f64>> = (0..nb)
            .map(|b| {
                let m: f64 = (0..ne).map(|e| q[e * nb + b]).sum();
                (0..ne)
                    .map(|e| if m > 0.0 { q[e * nb + b] / m } else { 0.0 })
                    .collect()
            })
            .collect();
        for a in 0..na {
            if mu_a[a] <= 0.0 || row[a] <= 0.0 {
                continue;
            }
            let rho = row[a] / mu_a[a];
            for e in 0..ne {
                for b in 0..nb {
                    let m = rho * prior.get(e, a, b);
                    if m <= 0.0 {
                        continue;
                    }
                    let r = score.score(&p_s, e)? - score.score(&p, e)?
                        + score.score(&p_ab[a][b], e)?
                        - score.score(&p_sb[b], e)?;
                    acc += m * r;
                }
            }
        }
    }
    Ok(acc)
}

/// Closed-form evaluator of `u_B(w)` reused across many `w`: holds `mu(e, b | a)`
/// for the Alice outcomes in `support`.
pub(crate) struct WaEvaluator {
    ne: usize,
    nb: usize,
    /// `[k][e * nb + b]` for the k-th supported Alice outcome.
    cond: Vec<Vec<f64>>,
}

impl WaEvaluator {
    pub(crate) fn new(prior: &JointPrior, support: &[usize]) -> Self {
        let (ne, _, nb) = prior.dims();
        let mu = prior.alice_marginal();
        let cond = support
            .iter()
            .map(|&a| {
                let mut c = vec![0.0; ne * nb];
                for e in 0..ne {
                    for b in 0..nb {
                        c[e * nb + b] = prior.get(e, a, b) / mu[a];
                    }
                }
                c
            })
            .collect();
        WaEvaluator { ne, nb, cond }
    }

    /// `u_B(w)` where `w[k]` weights the k-th supported outcome.
    pub(crate) fn eval(&self, score: &ScoreSpec, w: &[f64], buf: &mut Vec<f64>) -> Result<f64> {
        buf.clear();
        buf.resize(self.ne * self.nb, 0.0);
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            for (x, c) in buf.iter_mut().zip(&self.cond[k]) {
                *x += wk * c;
            }
        }
        bob_gain_unnormalized(score, buf, self.ne, self.nb)
    }
}
