//! Exact optimal commitment for piecewise-linear `G`.
//!
//! Two routes to the same optimum live here. [`build_obedience_lp`] writes the
//! revelation-principle program over recommendation profiles `(i0, {i_b})`
//! verbatim; it is exact but its row count grows like `k^{|B|+2}`.
//! [`solve_exact`] instead uses that the sender objective `f(w) = -u_B(w)` over
//! Alice-posteriors `w` is linear on every cell of the arrangement cut out by
//! piece-tie hyperplanes, so its concave envelope at the prior is attained on
//! arrangement vertices. The resulting LP has one row per supported Alice
//! outcome. The chosen posteriors are then relabelled by their best-response
//! profiles, merged, and certified against the full obedience system.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::belief::{self, WaEvaluator};
use crate::error::{Error, Result};
use crate::instance::{marginals_and_conditionals, JointPrior, SignalingScheme};
use crate::lp::{solve_lp, LinearProgram};
use crate::report::{CheckReport, Classification, Diagnostics, Method, SolveReport};
use crate::scoring::{default_tangent_points, DecisionProblem, ScoreSpec};
use crate::simplex::{for_each_combination, solve_square};

pub const DEFAULT_CAP_LP_VARS: u128 = 2_000_000;
/// Dense obedience LPs larger than this many coefficients are refused.
const CAP_DENSE_ENTRIES: u128 = 25_000_000;
pub const OBEDIENCE_TOL: f64 = 1e-7;
pub const CLASSIFY_TOL: f64 = 1e-7;
const MASS_PRUNE: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

/// A signal that recommends `i0` to a decision maker without Bob's signal and
/// `ib[b]` to one who has seen `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecommendationSignal {
    pub i0: usize,
    pub ib: Vec<usize>,
}

impl RecommendationSignal {
    /// Label such as `"2|0,1"`.
    pub fn label(&self) -> String {
        let ib: Vec<String> = self.ib.iter().map(|i| i.to_string()).collect();
        format!("{}|{}", self.i0, ib.join(","))
    }
}

impl fmt::Display for RecommendationSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone)]
pub struct ExactOptions {
    pub cap_lp_vars: u128,
    /// Grid resolution for the default tangent points of a smooth score.
    pub tangent_k: u32,
    pub tangent_points: Option<Vec<Vec<f64>>>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            cap_lp_vars: DEFAULT_CAP_LP_VARS,
            tangent_k: 20,
            tangent_points: None,
        }
    }
}

fn revelation_size(k: usize, n_bob: usize) -> u128 {
    (0..=n_bob).fold(1u128, |acc, _| acc.saturating_mul(k as u128))
}

fn check_cap(k: usize, n_bob: usize, n_alice: usize, cap: u128) -> Result<u128> {
    let signals = revelation_size(k, n_bob);
    let vars = signals.saturating_mul(n_alice as u128);
    if vars > cap {
        return Err(Error::SizeCapExceeded {
            what: "obedience LP variables",
            required: vars,
            cap,
        });
    }
    Ok(signals)
}

/// All `k^{|B|+1}` recommendation profiles in lexicographic order of `(i0, i_b...)`.
pub fn build_revelation_signals(
    k: usize,
    n_bob: usize,
    n_alice: usize,
    cap_lp_vars: u128,
) -> Result<Vec<RecommendationSignal>> {
    if k == 0 {
        return Err(Error::InvalidArgument("decision problem has no actions".into()));
    }
    let count = check_cap(k, n_bob, n_alice, cap_lp_vars)? as usize;
    let mut out = Vec::with_capacity(count);
    let mut digits = vec![0usize; n_bob + 1];
    for _ in 0..count {
        out.push(RecommendationSignal {
            i0: digits[0],
            ib: digits[1..].to_vec(),
        });
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < k {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// The revelation-principle LP with its row bookkeeping.
#[derive(Debug, Clone)]
pub struct ObedienceLp {
    pub lp: LinearProgram,
    pub signals: Vec<RecommendationSignal>,
    pub n_alice: usize,
    pub unconditional_rows: usize,
    pub conditional_rows: usize,
    pub marginal_rows: usize,
}

impl ObedienceLp {
    /// Reads `pi(s, a) = x[s * |A| + a]` back into a scheme, dropping empty signals.
    pub fn scheme_from_solution(&self, x: &[f64]) -> (SignalingScheme, Vec<RecommendationSignal>) {
        let na = self.n_alice;
        let mut labels = Vec::new();
        let mut pi = Vec::new();
        let mut recs = Vec::new();
        for (s, rec) in self.signals.iter().enumerate() {
            let row: Vec<f64> = x[s * na..(s + 1) * na].to_vec();
            if row.iter().sum::<f64>() > MASS_PRUNE {
                labels.push(rec.label());
                pi.push(row);
                recs.push(rec.clone());
            }
        }
        (SignalingScheme { labels, pi }, recs)
    }
}

/// `mu(e | a)` as `[a][e]` and `mu(e, b | a)` as `[b][a][e]`, zero where `mu(a) = 0`.
fn conditional_matrices(prior: &JointPrior) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
    let (ne, na, nb) = prior.dims();
    let t = marginals_and_conditionals(prior);
    let m0 = (0..na)
        .map(|a| (0..ne).map(|e| t.e_given_a[e][a].unwrap_or(0.0)).collect())
        .collect();
    let mb = (0..nb)
        .map(|b| {
            (0..na)
                .map(|a| (0..ne).map(|e| t.eb_given_a[e][a][b].unwrap_or(0.0)).collect())
                .collect()
        })
        .collect();
    (m0, mb)
}

fn diff_dot(u: &DecisionProblem, i: usize, j: usize, m: &[f64]) -> f64 {
    u.utilities[i]
        .iter()
        .zip(&u.utilities[j])
        .zip(m)
        .map(|((x, y), w)| (x - y) * w)
        .sum()
}

/// The obedience LP: maximize the sender objective over `pi(s, a)` for every
/// recommendation profile `s`, subject to obedience of `i0` and of each `i_b`
/// (one `<=` row per alternative action, the recommended one included) and the
/// marginal rows `sum_s pi(s, a) = mu(a)`.
pub fn build_obedience_lp(
    prior: &JointPrior,
    decision: &DecisionProblem,
    cap_lp_vars: u128,
) -> Result<ObedienceLp> {
    let (ne, na, nb) = prior.dims();
    let k = decision.actions();
    if decision.events() != ne {
        return Err(Error::InvalidArgument(format!(
            "decision problem covers {} events, prior has {ne}",
            decision.events()
        )));
    }
    let signals = build_revelation_signals(k, nb, na, cap_lp_vars)?;
    let ns = signals.len();
    let n = ns * na;
    let rows = (k * ns + k * nb * ns + na) as u128;
    if rows.saturating_mul(n as u128) > CAP_DENSE_ENTRIES {
        return Err(Error::SizeCapExceeded {
            what: "obedience LP coefficients",
            required: rows.saturating_mul(n as u128),
            cap: CAP_DENSE_ENTRIES,
        });
    }
    let (m0, mb) = conditional_matrices(prior);
    let mu = prior.alice_marginal();

    let mut lp = LinearProgram::new(n);
    let mut c = vec![0.0; n];
    for (s, rec) in signals.iter().enumerate() {
        for a in 0..na {
            let mut v: f64 = decision.utilities[rec.i0].iter().zip(&m0[a]).map(|(u, m)| u * m).sum();
            for b in 0..nb {
                v -= decision.utilities[rec.ib[b]]
                    .iter()
                    .zip(&mb[b][a])
                    .map(|(u, m)| u * m)
                    .sum::<f64>();
            }
            c[s * na + a] = v;
        }
    }
    lp.set_objective(c);
    for (s, rec) in signals.iter().enumerate() {
        for i in 0..k {
            lp.push_le_with(0.0, |row| {
                for a in 0..na {
                    row[s * na + a] = diff_dot(decision, i, rec.i0, &m0[a]);
                }
            });
        }
    }
    for (s, rec) in signals.iter().enumerate() {
        for b in 0..nb {
            for i in 0..k {
                lp.push_le_with(0.0, |row| {
                    for a in 0..na {
                        row[s * na + a] = diff_dot(decision, i, rec.ib[b], &mb[b][a]);
                    }
                });
            }
        }
    }
    for (a, &m) in mu.iter().enumerate() {
        lp.push_eq_with(m, |row| {
            for s in 0..ns {
                row[s * na + a] = 1.0;
            }
        });
    }
    Ok(ObedienceLp {
        lp,
        signals,
        n_alice: na,
        unconditional_rows: k * ns,
        conditional_rows: k * nb * ns,
        marginal_rows: na,
    })
}

/// Lowest-index maximizer of `U_i . q`, treating values within `TIE_TOL` of the max as ties.
fn best_response(decision: &DecisionProblem, q: &[f64]) -> usize {
    let vals: Vec<f64> = (0..decision.actions()).map(|i| decision.expected(i, q)).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + top.abs();
    vals.iter().position(|&v| v >= top - TIE_TOL * scale).unwrap_or(0)
}

/// Best-response profile of signal `s` (lowest index on ties; `i_b = i0` when
/// `(s, b)` has probability zero).
pub fn recommendation_profile(
    prior: &JointPrior,
    decision: &DecisionProblem,
    scheme: &SignalingScheme,
    s: usize,
) -> Result<RecommendationSignal> {
    let (ne, _, nb) = prior.dims();
    let q = belief::joint_eb(prior, &prior.alice_marginal(), &scheme.pi[s]);
    let pe: Vec<f64> = (0..ne).map(|e| q[e * nb..(e + 1) * nb].iter().sum()).collect();
    if pe.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroProbabilitySignal {
            signal: scheme.labels[s].clone(),
        });
    }
    let i0 = best_response(decision, &pe);
    let ib = (0..nb)
        .map(|b| {
            let col: Vec<f64> = (0..ne).map(|e| q[e * nb + b]).collect();
            if col.iter().sum::<f64>() > 0.0 {
                best_response(decision, &col)
            } else {
                i0
            }
        })
        .collect();
    Ok(RecommendationSignal { i0, ib })
}

/// Sums the rows of signals that share a recommendation profile. The first
/// occurrence keeps its position.
pub fn merge_equivalent_signals(
    scheme: &SignalingScheme,
    recommendations: &[RecommendationSignal],
) -> (SignalingScheme, Vec<RecommendationSignal>) {
    let mut index: BTreeMap<&RecommendationSignal, usize> = BTreeMap::new();
    let mut labels = Vec::new();
    let mut pi: Vec<Vec<f64>> = Vec::new();
    let mut recs = Vec::new();
    for (s, rec) in recommendations.iter().enumerate() {
        match index.get(rec) {
            Some(&t) => {
                for (x, y) in pi[t].iter_mut().zip(&scheme.pi[s]) {
                    *x += y;
                }
            }
            None => {
                index.insert(rec, pi.len());
                labels.push(rec.label());
                pi.push(scheme.pi[s].clone());
                recs.push(rec.clone());
            }
        }
    }
    (SignalingScheme { labels, pi }, recs)
}

/// Checks that every recommended action is a best response, unconditionally
/// and after each Bob outcome, within `tol` in normalized-posterior terms.
pub fn certify_obedience(
    prior: &JointPrior,
    decision: &DecisionProblem,
    scheme: &SignalingScheme,
    recommendations: &[RecommendationSignal],
    tol: f64,
) -> CheckReport {
    let (ne, _, nb) = prior.dims();
    let mu_a = prior.alice_marginal();
    let mut rep = CheckReport::new("obedience");
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for (s, rec) in recommendations.iter().enumerate() {
        if scheme.signal_mass(s) <= 1e-10 {
            continue;
        }
        let q = belief::joint_eb(prior, &mu_a, &scheme.pi[s]);
        let pe: Vec<f64> = (0..ne).map(|e| q[e * nb..(e + 1) * nb].iter().sum()).collect();
        let tot: f64 = pe.iter().sum();
        let pe: Vec<f64> = pe.iter().map(|x| x / tot).collect();
        let gap = decision.value(&pe) - decision.expected(rec.i0, &pe);
        worst = worst.max(gap);
        checked += 1;
        if gap > tol {
            rep.fail(format!(
                "signal {}: i0 = {} trails the best action by {gap:e}",
                scheme.labels[s], rec.i0
            ));
        }
        for b in 0..nb {
            let col: Vec<f64> = (0..ne).map(|e| q[e * nb + b]).collect();
            let m: f64 = col.iter().sum();
            if m <= 1e-10 {
                continue;
            }
            let p: Vec<f64> = col.iter().map(|x| x / m).collect();
            let gap = decision.value(&p) - decision.expected(rec.ib[b], &p);
            worst = worst.max(gap);
            checked += 1;
            if gap > tol {
                rep.fail(format!(
                    "signal {} given b = {b}: i_b = {} trails the best action by {gap:e}",
                    scheme.labels[s], rec.ib[b]
                ));
            }
        }
    }
    rep.value("worst_gap", worst);
    rep.value("posteriors_checked", checked as f64);
    rep
}

/// The piecewise score actually optimized: `score` itself, or its tangent-plane
/// linearization when smooth. The flag says whether linearization happened.
pub fn piecewise_for(
    score: &ScoreSpec,
    n_events: usize,
    opts: &ExactOptions,
) -> Result<(ScoreSpec, bool)> {
    if !score.is_smooth() {
        return Ok((score.clone(), false));
    }
    let pts = match &opts.tangent_points {
        Some(p) => p.clone(),
        None => default_tangent_points(score, n_events, opts.tangent_k),
    };
    Ok((score.linearize(&pts)?, true))
}

/// Pairs of pieces that tie at the maximum somewhere on the event simplex.
fn tying_pairs(decision: &DecisionProblem) -> Result<Vec<(usize, usize)>> {
    let k = decision.actions();
    let ne = decision.events();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let diff: Vec<f64> = (0..ne)
                .map(|e| decision.utilities[i][e] - decision.utilities[j][e])
                .collect();
            if diff.iter().all(|x| x.abs() <= 1e-12) {
                continue;
            }
            let mut lp = LinearProgram::new(ne);
            lp.add_eq(&vec![1.0; ne], 1.0);
            lp.add_eq(&diff, 0.0);
            for l in 0..k {
                if l == i {
                    continue;
                }
                let row: Vec<f64> = (0..ne)
                    .map(|e| decision.utilities[l][e] - decision.utilities[i][e])
                    .collect();
                lp.add_le(&row, 0.0);
            }
            if let crate::lp::LpOutcome::Optimal(_) = solve_lp(&lp)? {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

struct Candidates {
    points: Vec<Vec<f64>>,
    hyperplanes: usize,
}

/// Vertices, inside `Delta(A')`, of the arrangement of tie hyperplanes and
/// coordinate facets. Coordinates are over the supported outcomes `support`.
fn arrangement_vertices(
    prior: &JointPrior,
    decision: &DecisionProblem,
    support: &[usize],
    cap: u128,
) -> Result<Candidates> {
    let d = support.len();
    let (m0, mb) = conditional_matrices(prior);
    let pairs = tying_pairs(decision)?;

    let mut planes: Vec<Vec<f64>> = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |n: Vec<f64>, planes: &mut Vec<Vec<f64>>| {
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-12 {
            return;
        }
        let mut u: Vec<f64> = n.iter().map(|x| x / norm).collect();
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-9) {
            if *first < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let key: Vec<i64> = u.iter().map(|x| (x * 1e9).round() as i64).collect();
        if seen.insert(key) {
            planes.push(u);
        }
    };
    for t in 0..d {
        let mut e = vec![0.0; d];
        e[t] = 1.0;
        push(e, &mut planes);
    }
    for &(i, j) in &pairs {
        push(
            support.iter().map(|&a| diff_dot(decision, i, j, &m0[a])).collect(),
            &mut planes,
        );
        for m in &mb {
            push(
                support.iter().map(|&a| diff_dot(decision, i, j, &m[a])).collect(),
                &mut planes,
            );
        }
    }

    let h = planes.len();
    let combos = crate::simplex::binomial(h as u64, (d - 1) as u64);
    if combos > cap {
        return Err(Error::SizeCapExceeded {
            what: "candidate posteriors",
            required: combos,
            cap,
        });
    }

    let mut points = Vec::new();
    let mut keys = HashSet::new();
    let mut add = |w: Vec<f64>, points: &mut Vec<Vec<f64>>| {
        let key: Vec<i64> = w.iter().map(|x| (x * 1e10).round() as i64).collect();
        if keys.insert(key) {
            points.push(w);
        }
    };
    let mu = prior.alice_marginal();
    let mu_s: Vec<f64> = support.iter().map(|&a| mu[a]).collect();
    let tot: f64 = mu_s.iter().sum();
    add(mu_s.iter().map(|x| x / tot).collect(), &mut points);

    for_each_combination(h, d - 1, |idx| {
        let mut a: Vec<Vec<f64>> = idx.iter().map(|&p| planes[p].clone()).collect();
        a.push(vec![1.0; d]);
        let mut rhs = vec![0.0; d];
        rhs[d - 1] = 1.0;
        if let Some(mut w) = solve_square(a, rhs) {
            if w.iter().all(|&x| x >= -1e-10) {
                w.iter_mut().for_each(|x| *x = x.max(0.0));
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                add(w, &mut points);
            }
        }
    });
    Ok(Candidates {
        points,
        hyperplanes: h,
    })
}

/// Alice's optimal commitment for a piecewise-linear `G` (smooth scores are
/// linearized first).
pub fn solve_exact(prior: &JointPrior, score: &ScoreSpec, opts: &ExactOptions) -> Result<SolveReport> {
    let (ne, na, nb) = prior.dims();
    let (pw, linearized) = piecewise_for(score, ne, opts)?;
    let decision = pw.decision_problem()?;
    let k = decision.actions();
    let revelation = check_cap(k, nb, na, opts.cap_lp_vars)?;

    let support = prior.alice_support();
    let cands = arrangement_vertices(prior, &decision, &support, opts.cap_lp_vars)?;
    let ev = WaEvaluator::new(prior, &support);
    let mut buf = Vec::new();
    let values: Vec<f64> = cands
        .points
        .iter()
        .map(|w| ev.eval(&pw, w, &mut buf).map(|u| -u))
        .collect::<Result<_>>()?;

    let mu = prior.alice_marginal();
    let nc = cands.points.len();
    let mut lp = LinearProgram::new(nc);
    lp.set_objective(values);
    for (t, &a) in support.iter().enumerate() {
        lp.push_eq_with(mu[a], |row| {
            for (j, w) in cands.points.iter().enumerate() {
                row[j] = w[t];
            }
        });
    }
    let sol = solve_lp(&lp)?.into_optimal().map_err(|e| {
        Error::NumericalFailure(format!("concavification LP did not solve: {e}"))
    })?;

    let mut pi = Vec::new();
    for (j, &lam) in sol.x.iter().enumerate() {
        if lam <= MASS_PRUNE {
            continue;
        }
        let mut row = vec![0.0; na];
        for (t, &a) in support.iter().enumerate() {
            row[a] = lam * cands.points[j][t];
        }
        pi.push(row);
    }
    for (a, &m) in mu.iter().enumerate() {
        let col: f64 = pi.iter().map(|r| r[a]).sum();
        if col > 0.0 {
            pi.iter_mut().for_each(|r| r[a] *= m / col);
        }
    }
    let raw = SignalingScheme {
        labels: (0..pi.len()).map(|s| format!("c{s}")).collect(),
        pi,
    };
    let recs = (0..raw.n_signals())
        .map(|s| recommendation_profile(prior, &decision, &raw, s))
        .collect::<Result<Vec<_>>>()?;
    let (scheme, recs) = merge_equivalent_signals(&raw, &recs);
    let scheme = scheme.pruned(MASS_PRUNE);

    let cert = certify_obedience(prior, &decision, &scheme, &recs, OBEDIENCE_TOL);
    if !cert.passed {
        return Err(Error::NumericalFailure(format!(
            "returned scheme fails obedience: {}",
            cert.violations.join("; ")
        )));
    }
    let bob = belief::bob_utility_of_scheme(prior, &pw, &scheme)?;
    if (-bob - sol.objective).abs() > OBEDIENCE_TOL {
        return Err(Error::NumericalFailure(format!(
            "scheme achieves {} but the LP optimum is {}",
            -bob,
            sol.objective
        )));
    }

    let mut diag = Diagnostics::new();
    diag.insert("pieces".into(), k as f64);
    diag.insert("revelation_signals".into(), revelation as f64);
    diag.insert("revelation_lp_vars".into(), (revelation * na as u128) as f64);
    diag.insert("hyperplanes".into(), cands.hyperplanes as f64);
    diag.insert("lp_cols".into(), nc as f64);
    diag.insert("lp_rows".into(), support.len() as f64);
    diag.insert("lp_objective".into(), sol.objective);
    diag.insert("lp_iterations".into(), sol.iterations as f64);
    diag.insert("duality_gap".into(), sol.duality_gap);
    diag.insert("obedience_worst_gap".into(), cert.values["worst_gap"]);
    diag.insert("signals".into(), scheme.n_signals() as f64);
    diag.insert("linearized".into(), if linearized { 1.0 } else { 0.0 });
    if linearized {
        diag.insert("tangent_points".into(), k as f64);
        diag.insert(
            "bob_utility_smooth".into(),
            belief::bob_utility_of_scheme(prior, score, &scheme)?,
        );
    }

    let v = crate::instance::total_value_v(prior, &pw)?;
    let mut report = SolveReport::new(scheme, bob, v, Method::Exact, diag);
    report.classification = classify_against(prior, &pw, sol.objective)?;
    Ok(report)
}

fn classify_against(prior: &JointPrior, pw: &ScoreSpec, optimum: f64) -> Result<Classification> {
    let na = prior.n_alice();
    let labels: Vec<String> = (0..na).map(|a| a.to_string()).collect();
    let full = SignalingScheme::full_reveal(prior, &labels).pruned(0.0);
    let none = SignalingScheme::no_reveal(prior);
    let f = belief::sender_objective(prior, pw, &full)?;
    let n = belief::sender_objective(prior, pw, &none)?;
    let full_ok = f >= optimum - CLASSIFY_TOL;
    let none_ok = n >= optimum - CLASSIFY_TOL;
    Ok(match (full_ok, none_ok) {
        (true, true) => Classification::Indifferent,
        (true, false) => Classification::Substitutes,
        (false, true) => Classification::Complements,
        (false, false) => Classification::Neither,
    })
}

/// Substitutes when full revelation is optimal, complements when no revelation is.
pub fn classify_substitutes(
    prior: &JointPrior,
    score: &ScoreSpec,
    opts: &ExactOptions,
) -> Result<Classification> {
    Ok(solve_exact(prior, score, opts)?.classification)
}
