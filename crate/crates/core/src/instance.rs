//! Instance model: outcome spaces, the joint prior `mu(e, a, b)`, signaling
//! schemes, validation and marginal/conditional extraction.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::scoring::ScoreSpec;

/// Tolerance on the total mass of a prior.
pub const PRIOR_SUM_TOL: f64 = 1e-9;
/// Tolerance on `sum_s pi(s, a) = mu(a)`.
pub const MARGINAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSpaces {
    pub events: Vec<String>,
    pub alice: Vec<String>,
    pub bob: Vec<String>,
}

impl OutcomeSpaces {
    pub fn new(events: Vec<String>, alice: Vec<String>, bob: Vec<String>) -> Self {
        OutcomeSpaces { events, alice, bob }
    }

    /// Labels `"0".."n-1"` for each space.
    pub fn numbered(ne: usize, na: usize, nb: usize) -> Self {
        let lab = |n: usize| (0..n).map(|i| i.to_string()).collect();
        OutcomeSpaces::new(lab(ne), lab(na), lab(nb))
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.events.len(), self.alice.len(), self.bob.len())
    }
}

/// `mu(e, a, b)` stored flat in `[e][a][b]` order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPrior {
    ne: usize,
    na: usize,
    nb: usize,
    p: Vec<f64>,
}

impl JointPrior {
    /// Builds a prior from a rectangular `[e][a][b]` tensor. Only the shape is
    /// checked here; mass violations are reported by [`validate_instance`].
    pub fn from_nested(t: &[Vec<Vec<f64>>]) -> Result<Self> {
        let ne = t.len();
        let na = t.first().map_or(0, |x| x.len());
        let nb = t.first().and_then(|x| x.first()).map_or(0, |x| x.len());
        let mut p = Vec::with_capacity(ne * na * nb);
        for (e, row) in t.iter().enumerate() {
            if row.len() != na {
                return Err(Error::Parse(format!(
                    "prior[{e}]: expected {na} alice entries, got {}",
                    row.len()
                )));
            }
            for (a, col) in row.iter().enumerate() {
                if col.len() != nb {
                    return Err(Error::Parse(format!(
                        "prior[{e}][{a}]: expected {nb} bob entries, got {}",
                        col.len()
                    )));
                }
                p.extend_from_slice(col);
            }
        }
        Ok(JointPrior { ne, na, nb, p })
    }

    pub fn from_fn(ne: usize, na: usize, nb: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut p = Vec::with_capacity(ne * na * nb);
        for e in 0..ne {
            for a in 0..na {
                for b in 0..nb {
                    p.push(f(e, a, b));
                }
            }
        }
        JointPrior { ne, na, nb, p }
    }

    #[inline]
    pub fn get(&self, e: usize, a: usize, b: usize) -> f64 {
        self.p[(e * self.na + a) * self.nb + b]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.ne, self.na, self.nb)
    }

    pub fn n_events(&self) -> usize {
        self.ne
    }

    pub fn n_alice(&self) -> usize {
        self.na
    }

    pub fn n_bob(&self) -> usize {
        self.nb
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.ne)
            .map(|e| {
                (0..self.na)
                    .map(|a| (0..self.nb).map(|b| self.get(e, a, b)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum()
    }

    /// `mu(a)`.
    pub fn alice_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.na];
        for e in 0..self.ne {
            for (a, ma) in m.iter_mut().enumerate() {
                for b in 0..self.nb {
                    *ma += self.get(e, a, b);
                }
            }
        }
        m
    }

    /// `mu(e)`.
    pub fn event_marginal(&self) -> Vec<f64> {
        (0..self.ne)
            .map(|e| {
                (0..self.na)
                    .flat_map(|a| (0..self.nb).map(move |b| (a, b)))
                    .map(|(a, b)| self.get(e, a, b))
                    .sum()
            })
            .collect()
    }

    /// `mu(e, b)` as `[e][b]`.
    pub fn event_bob_marginal(&self) -> Vec<Vec<f64>> {
        (0..self.ne)
            .map(|e| {
                (0..self.nb)
                    .map(|b| (0..self.na).map(|a| self.get(e, a, b)).sum())
                    .collect()
            })
            .collect()
    }

    /// Indices of Alice outcomes with positive prior mass.
    pub fn alice_support(&self) -> Vec<usize> {
        self.alice_marginal()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(a, _)| a)
            .collect()
    }
}

/// A complete game instance: labels, prior and score.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub spaces: OutcomeSpaces,
    pub prior: JointPrior,
    pub score: ScoreSpec,
}

impl Instance {
    /// Validates and bundles the parts.
    pub fn new(spaces: OutcomeSpaces, prior: JointPrior, score: ScoreSpec) -> Result<Self> {
        validate_instance(&spaces, &prior, &score).into_result()?;
        Ok(Instance {
            spaces,
            prior,
            score,
        })
    }

    pub fn with_score(&self, score: ScoreSpec) -> Instance {
        Instance {
            score,
            ..self.clone()
        }
    }
}

/// A semantic problem with an instance. Violations are data, not failures.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionMismatch(String),
    BadLabels(String),
    NegativeMass {
        e: usize,
        a: usize,
        b: usize,
        value: f64,
    },
    NonFiniteMass {
        e: usize,
        a: usize,
        b: usize,
    },
    SumNotOne(f64),
    MalformedScore(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch(m) => write!(f, "dimension mismatch: {m}"),
            Violation::BadLabels(m) => write!(f, "bad labels: {m}"),
            Violation::NegativeMass { e, a, b, value } => {
                write!(f, "negative mass at prior[{e}][{a}][{b}] = {value}")
            }
            Violation::NonFiniteMass { e, a, b } => {
                write!(f, "non-finite mass at prior[{e}][{a}][{b}]")
            }
            Violation::SumNotOne(s) => write!(f, "sum != 1: prior sums to {s}"),
            Violation::MalformedScore(m) => write!(f, "malformed score: {m}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationOutcome {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationOutcome {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self.violations))
        }
    }
}

fn check_labels(kind: &str, labels: &[String], min: usize, out: &mut Vec<Violation>) {
    if labels.len() < min {
        out.push(Violation::BadLabels(format!(
            "{kind} needs at least {min} labels, got {}",
            labels.len()
        )));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if l.is_empty() {
            out.push(Violation::BadLabels(format!("{kind} has an empty label")));
        } else if !seen.insert(l.as_str()) {
            out.push(Violation::BadLabels(format!("{kind} label {l:?} repeated")));
        }
    }
}

/// Checks dimensions, mass, labels and the score spec, collecting every violation.
pub fn validate_instance(
    spaces: &OutcomeSpaces,
    prior: &JointPrior,
    score: &ScoreSpec,
) -> ValidationOutcome {
    let mut out = ValidationOutcome::default();
    check_labels("events", &spaces.events, 2, &mut out.violations);
    check_labels("alice_signals", &spaces.alice, 1, &mut out.violations);
    check_labels("bob_signals", &spaces.bob, 1, &mut out.violations);

    if spaces.dims() != prior.dims() {
        out.violations.push(Violation::DimensionMismatch(format!(
            "labels give {:?} but prior has shape {:?}",
            spaces.dims(),
            prior.dims()
        )));
    }

    let (ne, na, nb) = prior.dims();
    let mut finite = true;
    for e in 0..ne {
        for a in 0..na {
            for b in 0..nb {
                let v = prior.get(e, a, b);
                if !v.is_finite() {
                    finite = false;
                    out.violations.push(Violation::NonFiniteMass { e, a, b });
                } else if v < 0.0 {
                    out.violations
                        .push(Violation::NegativeMass { e, a, b, value: v });
                }
            }
        }
    }
    if finite {
        let s = prior.total_mass();
        if (s - 1.0).abs() > PRIOR_SUM_TOL {
            out.violations.push(Violation::SumNotOne(s));
        }
    }

    let (errs, warns) = score.problems(ne);
    out.violations
        .extend(errs.into_iter().map(Violation::MalformedScore));
    out.warnings.extend(warns);
    if out.violations.is_empty() {
        if let Some(l) = score.bound {
            let seen = score.sampled_max_abs(ne, 256, 0x5eed);
            if seen > l + 1e-9 {
                out.violations.push(Violation::MalformedScore(format!(
                    "claimed bound L = {l} but |G| reaches {seen}"
                )));
            }
        }
    }
    out
}

/// Marginals and conditionals of a prior. `None` marks a conditional whose
/// conditioning event has probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    /// `mu(a)`
    pub a: Vec<f64>,
    /// `mu(b)`
    pub b: Vec<f64>,
    /// `mu(e)`
    pub e: Vec<f64>,
    /// `mu(e, b)` as `[e][b]`
    pub eb: Vec<Vec<f64>>,
    /// `mu(b | a)` as `[a][b]`
    pub b_given_a: Vec<Vec<Option<f64>>>,
    /// `mu(e | a)` as `[e][a]`
    pub e_given_a: Vec<Vec<Option<f64>>>,
    /// `mu(e | a, b)` as `[e][a][b]`
    pub e_given_ab: Vec<Vec<Vec<Option<f64>>>>,
    /// `mu(e, b | a)` as `[e][a][b]`
    pub eb_given_a: Vec<Vec<Vec<Option<f64>>>>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

pub fn marginals_and_conditionals(prior: &JointPrior) -> ConditionalTable {
    let (ne, na, nb) = prior.dims();
    let mu_a = prior.alice_marginal();
    let mu_e = prior.event_marginal();
    let eb = prior.event_bob_marginal();
    let mu_b: Vec<f64> = (0..nb).map(|b| (0..ne).map(|e| eb[e][b]).sum()).collect();
    let mu_ab: Vec<Vec<f64>> = (0..na)
        .map(|a| (0..nb).map(|b| (0..ne).map(|e| prior.get(e, a, b)).sum()).collect())
        .collect();
    let mu_ea: Vec<Vec<f64>> = (0..ne)
        .map(|e| (0..na).map(|a| (0..nb).map(|b| prior.get(e, a, b)).sum()).collect())
        .collect();

    ConditionalTable {
        b_given_a: (0..na)
            .map(|a| (0..nb).map(|b| ratio(mu_ab[a][b], mu_a[a])).collect())
            .collect(),
        e_given_a: (0..ne)
            .map(|e| (0..na).map(|a| ratio(mu_ea[e][a], mu_a[a])).collect())
            .collect(),
        e_given_ab: (0..ne)
            .map(|e| {
                (0..na)
                    .map(|a| {
                        (0..nb)
                            .map(|b| ratio(prior.get(e, a, b), mu_ab[a][b]))
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        eb_given_a: (0..ne)
            .map(|e| {
                (0..na)
                    .map(|a| (0..nb).map(|b| ratio(prior.get(e, a, b), mu_a[a])).collect())
                    .collect()
            })
            .collect(),
        a: mu_a,
        b: mu_b,
        e: mu_e,
        eb,
    }
}

/// `V = E_{A,B} G(p_{A,B}) - G(p)`: the constant sum of Alice's and Bob's utilities.
pub fn total_value_v(prior: &JointPrior, score: &ScoreSpec) -> Result<f64> {
    let (ne, na, nb) = prior.dims();
    let g0 = score.eval_g(&prior.event_marginal());
    if !g0.is_finite() {
        return Err(Error::NonFiniteScore("G at the prior".into()));
    }
    let mut acc = 0.0;
    let mut post = vec![0.0; ne];
    for a in 0..na {
        for b in 0..nb {
            let m: f64 = (0..ne).map(|e| prior.get(e, a, b)).sum();
            if m <= 0.0 {
                continue;
            }
            for (e, pe) in post.iter_mut().enumerate() {
                *pe = prior.get(e, a, b) / m;
            }
            let g = score.eval_g(&post);
            if !g.is_finite() {
                return Err(Error::NonFiniteScore(format!(
                    "G at the posterior given a={a}, b={b}"
                )));
            }
            acc += m * g;
        }
    }
    Ok(acc - g0)
}

/// `pi[s][a] = Pr[S = s, A = a]` with a label per signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalingScheme {
    pub labels: Vec<String>,
    pub pi: Vec<Vec<f64>>,
}

impl SignalingScheme {
    pub fn new(labels: Vec<String>, pi: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != pi.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} signal rows",
                labels.len(),
                pi.len()
            )));
        }
        let w = pi.first().map_or(0, |r| r.len());
        if pi.iter().any(|r| r.len() != w) {
            return Err(Error::InvalidArgument("ragged scheme matrix".into()));
        }
        let mut seen = HashSet::new();
        if let Some(l) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidArgument(format!("signal label {l:?} repeated")));
        }
        Ok(SignalingScheme { labels, pi })
    }

    /// Signal `s = a`, revealing Alice's outcome. Labels are Alice's labels.
    pub fn full_reveal(prior: &JointPrior, alice_labels: &[String]) -> Self {
        let mu = prior.alice_marginal();
        let na = mu.len();
        let pi = (0..na)
            .map(|s| (0..na).map(|a| if a == s { mu[a] } else { 0.0 }).collect())
            .collect();
        SignalingScheme {
            labels: alice_labels.to_vec(),
            pi,
        }
    }

    /// A single constant signal.
    pub fn no_reveal(prior: &JointPrior) -> Self {
        SignalingScheme {
            labels: vec!["none".to_string()],
            pi: vec![prior.alice_marginal()],
        }
    }

    pub fn n_signals(&self) -> usize {
        self.pi.len()
    }

    pub fn n_alice(&self) -> usize {
        self.pi.first().map_or(0, |r| r.len())
    }

    /// `Pr[S = s]`.
    pub fn signal_mass(&self, s: usize) -> f64 {
        self.pi[s].iter().sum()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Checks nonnegativity and `sum_s pi(s, a) = mu(a)` within [`MARGINAL_TOL`].
    pub fn validate_against(&self, prior: &JointPrior) -> Result<()> {
        let mu = prior.alice_marginal();
        if self.pi.is_empty() {
            return Err(Error::InvalidArgument("scheme has no signals".into()));
        }
        if self.n_alice() != mu.len() {
            return Err(Error::InvalidArgument(format!(
                "scheme covers {} alice outcomes, prior has {}",
                self.n_alice(),
                mu.len()
            )));
        }
        for (s, row) in self.pi.iter().enumerate() {
            for (a, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "pi[{s}][{a}] = {v} is not a nonnegative probability"
                    )));
                }
            }
        }
        for (a, &m) in mu.iter().enumerate() {
            let col: f64 = self.pi.iter().map(|r| r[a]).sum();
            if (col - m).abs() > MARGINAL_TOL {
                return Err(Error::InvalidArgument(format!(
                    "signals for alice outcome {a} carry mass {col}, prior has {m}"
                )));
            }
        }
        Ok(())
    }

    /// Drops signals whose total mass is at most `tol`.
    pub fn pruned(&self, tol: f64) -> SignalingScheme {
        let keep: Vec<usize> = (0..self.n_signals())
            .filter(|&s| self.signal_mass(s) > tol)
            .collect();
        SignalingScheme {
            labels: keep.iter().map(|&s| self.labels[s].clone()).collect(),
            pi: keep.iter().map(|&s| self.pi[s].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn xor_is_valid() {
        let inst = fixtures::xor(ScoreSpec::quadratic());
        let v = validate_instance(&inst.spaces, &inst.prior, &inst.score);
        assert!(v.is_valid(), "{:?}", v);
    }

    #[test]
    fn negative_and_unnormalized_mass_are_reported() {
        let inst = fixtures::xor(ScoreSpec::quadratic());
        let mut t = inst.prior.to_nested();
        t[0][0][0] = -0.1;
        t[1][0][1] = 0.6;
        let p = JointPrior::from_nested(&t).unwrap();
        let v = validate_instance(&inst.spaces, &p, &inst.score);
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::NegativeMass { .. })));

        let mut t = inst.prior.to_nested();
        t[0][0][0] = 0.15;
        let p = JointPrior::from_nested(&t).unwrap();
        let v = validate_instance(&inst.spaces, &p, &inst.score);
        assert_eq!(v.violations.len(), 1);
        match &v.violations[0] {
            Violation::SumNotOne(s) => assert!((s - 0.9).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_prior_is_rejected() {
        let t = vec![vec![vec![0.5, 0.0]], vec![vec![0.5]]];
        let err = JointPrior::from_nested(&t).unwrap_err();
        assert!(err.to_string().contains("prior[1][0]"));
    }

    #[test]
    fn dimension_and_score_mismatch_reported() {
        let inst = fixtures::xor(ScoreSpec::quadratic());
        let spaces = OutcomeSpaces::numbered(3, 2, 2);
        let bad = ScoreSpec::piecewise(vec![crate::scoring::Piece::new(vec![1.0], 0.0)]);
        let v = validate_instance(&spaces, &inst.prior, &bad);
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::DimensionMismatch(_))));
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::MalformedScore(_))));
    }

    #[test]
    fn false_bound_is_a_violation() {
        let inst = fixtures::xor(ScoreSpec::quadratic().with_bound(0.6));
        let v = validate_instance(&inst.spaces, &inst.prior, &inst.score);
        assert!(!v.is_valid());
    }

    #[test]
    fn xor_conditionals() {
        let inst = fixtures::xor(ScoreSpec::quadratic());
        let c = marginals_and_conditionals(&inst.prior);
        assert!((c.a[0] - 0.5).abs() < 1e-15);
        assert_eq!(c.e_given_ab[0][0][0], Some(1.0));
        assert_eq!(c.e_given_ab[1][0][0], Some(0.0));
    }

    #[test]
    fn independent_conditionals() {
        let inst = fixtures::independent(ScoreSpec::quadratic());
        let c = marginals_and_conditionals(&inst.prior);
        for e in 0..2 {
            for a in 0..2 {
                assert!((c.e_given_a[e][a].unwrap() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_mass_conditioning_is_undefined() {
        let prior = JointPrior::from_fn(2, 2, 2, |e, a, _| if a == 0 { 0.25 * (e + 1) as f64 / 1.5 } else { 0.0 });
        let c = marginals_and_conditionals(&prior);
        assert_eq!(c.a[1], 0.0);
        assert_eq!(c.e_given_a[0][1], None);
        assert_eq!(c.e_given_ab[1][1][0], None);
        assert_eq!(c.b_given_a[1][1], None);
        assert!(c.e_given_a[0][0].is_some());
    }

    #[test]
    fn total_value_examples() {
        let q = ScoreSpec::quadratic();
        let xor = fixtures::xor(q.clone());
        assert!((total_value_v(&xor.prior, &q).unwrap() - 0.5).abs() < 1e-12);
        let copy = fixtures::copy(q.clone());
        assert!((total_value_v(&copy.prior, &q).unwrap() - 0.5).abs() < 1e-12);
        let ind = fixtures::independent(q.clone());
        for s in [q, ScoreSpec::log(), ScoreSpec::spherical()] {
            assert!(total_value_v(&ind.prior, &s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn scheme_validation() {
        let inst = fixtures::xor(ScoreSpec::quadratic());
        let full = SignalingScheme::full_reveal(&inst.prior, &inst.spaces.alice);
        full.validate_against(&inst.prior).unwrap();
        SignalingScheme::no_reveal(&inst.prior)
            .validate_against(&inst.prior)
            .unwrap();
        let bad = SignalingScheme::new(vec!["x".into()], vec![vec![0.5, 0.4]]).unwrap();
        assert!(bad.validate_against(&inst.prior).is_err());
        assert!(SignalingScheme::new(vec!["x".into(), "x".into()], vec![vec![0.5], vec![0.5]]).is_err());
    }
}
