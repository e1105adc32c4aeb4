//! Brute-force commitment oracle and the cross-belief market simulator.
//!
//! The oracle shares nothing with the LP solvers beyond payoff evaluation: it
//! walks every scheme whose columns are multiples of `step * mu(a)`.

use rayon::prelude::*;

use crate::belief::{bob_utility_of_scheme, joint_eb, sender_objective, PosteriorDistribution, SupportKind};
use crate::error::{Error, Result};
use crate::instance::{total_value_v, JointPrior, SignalingScheme};
use crate::report::{CheckReport, Diagnostics, Method, SolveReport};
use crate::scoring::ScoreSpec;
use crate::simplex::{binomial, l1};

pub const ORACLE_MAX_ALICE: usize = 3;
pub const ORACLE_MAX_SIGNALS: usize = 3;
pub const ORACLE_MAX_STEPS: usize = 100;
pub const ORACLE_CAP_SCHEMES: u128 = 200_000_000;
/// Report divergence mass above which the first deviation inequality must be strict.
pub const DIVERGENCE_MASS_TOL: f64 = 1e-6;
const CHAIN_TOL: f64 = 1e-9;

/// Bob's utility from a single signal row, the quantity the oracle sums.
fn row_gain(prior: &JointPrior, score: &ScoreSpec, row: &[f64]) -> Result<f64> {
    let one = SignalingScheme {
        labels: vec!["s".into()],
        pi: vec![row.to_vec()],
    };
    bob_utility_of_scheme(prior, score, &one)
}

struct Search<'a> {
    gains: &'a [f64],
    n: usize,
    na: usize,
    m: usize,
}

impl Search<'_> {
    fn index(&self, c: &[usize]) -> usize {
        c.iter().fold(0, |i, &x| i * (self.n + 1) + x)
    }

    /// Best completion given the rows chosen so far and the units left per `a`.
    fn best(&self, left: &mut [usize], chosen: &mut Vec<usize>, acc: f64, out: &mut (f64, Vec<usize>)) {
        if chosen.len() + 1 == self.m {
            let idx = self.index(left);
            let total = acc + self.gains[idx];
            if total < out.0 {
                chosen.push(idx);
                *out = (total, chosen.clone());
                chosen.pop();
            }
            return;
        }
        let mut c = vec![0usize; self.na];
        loop {
            let idx = self.index(&c);
            for (l, &x) in left.iter_mut().zip(&c) {
                *l -= x;
            }
            chosen.push(idx);
            self.best(left, chosen, acc + self.gains[idx], out);
            chosen.pop();
            for (l, &x) in left.iter_mut().zip(&c) {
                *l += x;
            }
            // next c with c <= left coordinatewise
            let mut j = self.na;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                if c[j] < left[j] {
                    c[j] += 1;
                    break;
                }
                c[j] = 0;
            }
        }
    }
}

fn decode(idx: usize, n: usize, na: usize) -> Vec<usize> {
    let mut c = vec![0; na];
    let mut i = idx;
    for a in (0..na).rev() {
        c[a] = i % (n + 1);
        i /= n + 1;
    }
    c
}

/// Exhaustive search over schemes with at most `max_signals` signals whose
/// entries are multiples of `grid_step * mu(a)`.
pub fn oracle_optimal(
    prior: &JointPrior,
    score: &ScoreSpec,
    grid_step: f64,
    max_signals: usize,
) -> Result<SolveReport> {
    let na = prior.n_alice();
    if na > ORACLE_MAX_ALICE || max_signals == 0 || max_signals > ORACLE_MAX_SIGNALS {
        return Err(Error::PreconditionViolated(format!(
            "oracle handles at most {ORACLE_MAX_ALICE} alice outcomes and 1..={ORACLE_MAX_SIGNALS} signals"
        )));
    }
    let steps = 1.0 / grid_step;
    let n = steps.round() as usize;
    if !(grid_step > 0.0) || (steps - n as f64).abs() > 1e-9 || n == 0 || n > ORACLE_MAX_STEPS {
        return Err(Error::PreconditionViolated(format!(
            "grid_step must be 1/n with n <= {ORACLE_MAX_STEPS}, got {grid_step}"
        )));
    }
    let schemes = binomial((n + max_signals - 1) as u64, (max_signals - 1) as u64).saturating_pow(na as u32);
    if schemes > ORACLE_CAP_SCHEMES {
        return Err(Error::SizeCapExceeded {
            what: "oracle schemes",
            required: schemes,
            cap: ORACLE_CAP_SCHEMES,
        });
    }
    let mu = prior.alice_marginal();
    let row_of = |c: &[usize]| -> Vec<f64> { c.iter().zip(&mu).map(|(&x, m)| x as f64 * m / n as f64).collect() };
    let n_rows = (n + 1).pow(na as u32);
    let gains: Vec<f64> = (0..n_rows)
        .into_par_iter()
        .map(|i| row_gain(prior, score, &row_of(&decode(i, n, na))))
        .collect::<Result<_>>()?;

    let search = Search {
        gains: &gains,
        n,
        na,
        m: max_signals,
    };
    let (best_val, best_rows) = if max_signals == 1 {
        let idx = search.index(&vec![n; na]);
        (gains[idx], vec![idx])
    } else {
        (0..n_rows)
            .into_par_iter()
            .map(|first| {
                let c = decode(first, n, na);
                let mut left: Vec<usize> = c.iter().map(|&x| n - x).collect();
                let mut out = (f64::INFINITY, Vec::new());
                let mut chosen = vec![first];
                search.best(&mut left, &mut chosen, gains[first], &mut out);
                out
            })
            .reduce(
                || (f64::INFINITY, Vec::new()),
                |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            )
    };

    let mut labels = Vec::new();
    let mut pi = Vec::new();
    for &idx in &best_rows {
        let row = row_of(&decode(idx, n, na));
        if row.iter().sum::<f64>() > 0.0 {
            labels.push(format!("g{}", labels.len()));
            pi.push(row);
        }
    }
    let scheme = SignalingScheme { labels, pi };
    let bob = bob_utility_of_scheme(prior, score, &scheme)?;

    // How far the objective moves when one grid unit of one alice outcome
    // shifts between two signals of the optimum.
    let mut modulus: f64 = 0.0;
    let counts: Vec<Vec<usize>> = best_rows.iter().map(|&i| decode(i, n, na)).collect();
    for a in 0..na {
        for s in 0..counts.len() {
            for t in 0..counts.len() {
                if s == t || counts[s][a] == 0 {
                    continue;
                }
                let mut c = counts.clone();
                c[s][a] -= 1;
                c[t][a] += 1;
                let moved: f64 = c.iter().map(|r| gains[search.index(r)]).sum();
                modulus = modulus.max((moved - best_val).abs());
            }
        }
    }

    let mut diag = Diagnostics::new();
    diag.insert("grid_step".into(), grid_step);
    diag.insert("max_signals".into(), max_signals as f64);
    diag.insert("schemes_searched".into(), schemes as f64);
    diag.insert("search_objective".into(), -best_val);
    diag.insert("grid_modulus".into(), modulus);
    let v = total_value_v(prior, score)?;
    Ok(SolveReport::new(scheme, bob, v, Method::Oracle, diag))
}

/// Bob's round-2 report and whether it came from the off-path rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BobReport {
    pub posterior: PosteriorDistribution,
    pub off_path: bool,
}

/// `Pr(e | s, b)` under the believed scheme. If the believed scheme gives
/// `(s, b)` zero probability, or has no signal labelled `s`, Bob falls back to
/// the prior: `Pr(e | b)`, or `Pr(e)` when `b` itself is impossible.
pub fn bob_report(prior: &JointPrior, believed: &SignalingScheme, s: &str, b: usize) -> Result<BobReport> {
    let (ne, _, nb) = prior.dims();
    if b >= nb {
        return Err(Error::InvalidArgument(format!("bob outcome {b} out of range")));
    }
    let mu = prior.alice_marginal();
    if let Some(si) = believed.index_of(s) {
        let q = joint_eb(prior, &mu, &believed.pi[si]);
        let col: Vec<f64> = (0..ne).map(|e| q[e * nb + b]).collect();
        let m: f64 = col.iter().sum();
        if m > 0.0 {
            return Ok(BobReport {
                posterior: PosteriorDistribution::new(SupportKind::OverE, col.iter().map(|x| x / m).collect())?,
                off_path: false,
            });
        }
    }
    let eb = prior.event_bob_marginal();
    let col: Vec<f64> = (0..ne).map(|e| eb[e][b]).collect();
    let m: f64 = col.iter().sum();
    let w = if m > 0.0 {
        col.iter().map(|x| x / m).collect()
    } else {
        prior.event_marginal()
    };
    Ok(BobReport {
        posterior: PosteriorDistribution::new(SupportKind::OverE, w)?,
        off_path: true,
    })
}

/// Payoffs when Alice draws from `actual` while Bob believes `believed`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossBeliefPayoff {
    pub believed: SignalingScheme,
    pub actual: SignalingScheme,
    pub bob_utility: f64,
    pub alice_utility: f64,
    pub off_path_mass: f64,
    /// Probability of `(s, b)` pairs where Bob's report differs from the true posterior.
    pub divergence_mass: f64,
}

/// `u_B(believed; actual)` and Alice's matching payoff.
///
/// Signals are matched by label. Alice reports the true posterior of her signal
/// in round 1 and, having learnt `B`, reports `p_{A,B}` in round 3.
pub fn cross_belief_utilities(
    prior: &JointPrior,
    score: &ScoreSpec,
    believed: &SignalingScheme,
    actual: &SignalingScheme,
) -> Result<CrossBeliefPayoff> {
    let (ne, na, nb) = prior.dims();
    let mu = prior.alice_marginal();
    let p = prior.event_marginal();
    let mut bob = 0.0;
    let mut alice = 0.0;
    let mut off_path = 0.0;
    let mut divergence = 0.0;
    for (si, row) in actual.pi.iter().enumerate() {
        let q = joint_eb(prior, &mu, row);
        let ms: f64 = q.iter().sum();
        if ms <= 0.0 {
            continue;
        }
        let p_s: Vec<f64> = (0..ne).map(|e| q[e * nb..(e + 1) * nb].iter().sum::<f64>() / ms).collect();
        for b in 0..nb {
            let msb: f64 = (0..ne).map(|e| q[e * nb + b]).sum();
            if msb <= 0.0 {
                continue;
            }
            let truth: Vec<f64> = (0..ne).map(|e| q[e * nb + b] / msb).collect();
            let rep = bob_report(prior, believed, &actual.labels[si], b)?;
            let report = rep.posterior.as_slice();
            if rep.off_path {
                off_path += msb;
            }
            if l1(report, &truth) > 1e-9 {
                divergence += msb;
            }
            for e in 0..ne {
                let m = q[e * nb + b];
                if m <= 0.0 {
                    continue;
                }
                let r_bob = score.score(report, e)?;
                let r_s = score.score(&p_s, e)?;
                bob += m * (r_bob - r_s);
                // alice's round-3 payoff splits by her own outcome
                let mut round3 = 0.0;
                for a in 0..na {
                    if mu[a] <= 0.0 || row[a] <= 0.0 {
                        continue;
                    }
                    let mab = prior.get(e, a, b) * row[a] / mu[a];
                    if mab <= 0.0 {
                        continue;
                    }
                    let tot: f64 = (0..ne).map(|e2| prior.get(e2, a, b)).sum();
                    let p_ab: Vec<f64> = (0..ne).map(|e2| prior.get(e2, a, b) / tot).collect();
                    round3 += mab * score.score(&p_ab, e)?;
                }
                alice += m * (r_s - score.score(&p, e)? - r_bob) + round3;
            }
        }
    }
    Ok(CrossBeliefPayoff {
        believed: believed.clone(),
        actual: actual.clone(),
        bob_utility: bob,
        alice_utility: alice,
        off_path_mass: off_path.min(1.0),
        divergence_mass: divergence.min(1.0),
    })
}

/// The chain `u_B(pi; pi*) <= u_B(pi*; pi*) <= u_B(pi; pi)` for a scheme `pi*`
/// that is weakly better for Alice than `pi`. With a strictly proper rule the
/// first step is strict once Bob's misled reports carry enough mass.
pub fn deviation_check(
    prior: &JointPrior,
    score: &ScoreSpec,
    pi: &SignalingScheme,
    pi_star: &SignalingScheme,
) -> Result<CheckReport> {
    let obj = sender_objective(prior, score, pi)?;
    let obj_star = sender_objective(prior, score, pi_star)?;
    if obj_star < obj - CHAIN_TOL {
        return Err(Error::PreconditionViolated(format!(
            "pi* has sender objective {obj_star}, below pi's {obj}"
        )));
    }
    let cross = cross_belief_utilities(prior, score, pi, pi_star)?;
    let honest_star = cross_belief_utilities(prior, score, pi_star, pi_star)?.bob_utility;
    let honest = cross_belief_utilities(prior, score, pi, pi)?.bob_utility;
    let mut rep = CheckReport::new("deviation_chain");
    rep.value("u_B(pi;pi_star)", cross.bob_utility);
    rep.value("u_B(pi_star;pi_star)", honest_star);
    rep.value("u_B(pi;pi)", honest);
    rep.value("divergence_mass", cross.divergence_mass);
    rep.value("off_path_mass", cross.off_path_mass);
    if cross.bob_utility > honest_star + CHAIN_TOL {
        rep.fail(format!(
            "u_B(pi;pi*) = {} exceeds u_B(pi*;pi*) = {honest_star}",
            cross.bob_utility
        ));
    }
    if honest_star > honest + CHAIN_TOL {
        rep.fail(format!("u_B(pi*;pi*) = {honest_star} exceeds u_B(pi;pi) = {honest}"));
    }
    let strict_expected = score.is_smooth() && cross.divergence_mass > DIVERGENCE_MASS_TOL;
    rep.value("strict_expected", if strict_expected { 1.0 } else { 0.0 });
    if strict_expected && cross.bob_utility >= honest_star {
        rep.fail("misled reports did not lower Bob's utility strictly");
    }
    Ok(rep)
}
