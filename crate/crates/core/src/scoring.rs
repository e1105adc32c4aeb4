//! Proper scoring rules through their expected-score functions `G`.
//!
//! Every strictly proper rule `R` is determined by a convex `G` with
//! `R(w'; e) = G(w') + <grad G(w'), delta_e - w'>`. Piecewise-linear `G`
//! (a maximum of affine pieces) is the bridge to finite decision problems:
//! piece `i` becomes action `i` with utility `U[i][e] = r_e + b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::simplex::{self, dot, l1};

/// Tolerance for "two pieces are identical" when flagging duplicates.
const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    Quadratic,
    Log,
    Spherical,
    PiecewiseLinear,
}

/// One affine piece `p -> r . p + b` of a piecewise-linear `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub r: Vec<f64>,
    pub b: f64,
}

impl Piece {
    pub fn new(r: Vec<f64>, b: f64) -> Self {
        Piece { r, b }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        dot(&self.r, p) + self.b
    }
}

/// Local Hoelder constants: `|G(x) - G(y)| <= alpha |x - y|_1^beta` for `|x - y|_1 <= c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderParams {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoreRule {
    /// `G(w) = |w|_2^2`, the Brier/quadratic rule.
    Quadratic,
    /// `G(w) = sum w_e ln w_e`, natural log.
    Log,
    /// `G(w) = |w|_2`.
    Spherical,
    PiecewiseLinear(Vec<Piece>),
}

/// A convex expected-score function plus the continuity data the FPTAS solvers need.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSpec {
    pub rule: ScoreRule,
    pub holder: Option<HolderParams>,
    /// Claimed bound `L` with `|G| <= L` on the simplex.
    pub bound: Option<f64>,
}

impl ScoreSpec {
    pub fn quadratic() -> Self {
        Self::from_rule(ScoreRule::Quadratic)
    }

    pub fn log() -> Self {
        Self::from_rule(ScoreRule::Log)
    }

    pub fn spherical() -> Self {
        Self::from_rule(ScoreRule::Spherical)
    }

    pub fn piecewise(pieces: Vec<Piece>) -> Self {
        Self::from_rule(ScoreRule::PiecewiseLinear(pieces))
    }

    pub fn from_rule(rule: ScoreRule) -> Self {
        ScoreSpec {
            rule,
            holder: None,
            bound: None,
        }
    }

    pub fn with_holder(mut self, holder: HolderParams) -> Self {
        self.holder = Some(holder);
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn kind(&self) -> ScoreKind {
        match self.rule {
            ScoreRule::Quadratic => ScoreKind::Quadratic,
            ScoreRule::Log => ScoreKind::Log,
            ScoreRule::Spherical => ScoreKind::Spherical,
            ScoreRule::PiecewiseLinear(_) => ScoreKind::PiecewiseLinear,
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self.rule, ScoreRule::PiecewiseLinear(_))
    }

    pub fn pieces(&self) -> Option<&[Piece]> {
        match &self.rule {
            ScoreRule::PiecewiseLinear(p) => Some(p),
            _ => None,
        }
    }

    /// `G(p)`. Log uses the convention `0 ln 0 = 0`, so boundary points are finite.
    pub fn eval_g(&self, p: &[f64]) -> f64 {
        match &self.rule {
            ScoreRule::Quadratic => dot(p, p),
            ScoreRule::Log => p
                .iter()
                .map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 })
                .sum(),
            ScoreRule::Spherical => dot(p, p).sqrt(),
            ScoreRule::PiecewiseLinear(pieces) => pieces
                .iter()
                .map(|pc| pc.eval(p))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Index of the piece attaining `G(p)`; ties resolve to the lowest index.
    pub fn active_piece(&self, p: &[f64]) -> Option<usize> {
        let pieces = self.pieces()?;
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, pc) in pieces.iter().enumerate() {
            let v = pc.eval(p);
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        Some(best)
    }

    /// A (sub)gradient of `G` at `p`, as a vector in the ambient space.
    pub fn gradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        match &self.rule {
            ScoreRule::Quadratic => Ok(p.iter().map(|x| 2.0 * x).collect()),
            ScoreRule::Log => {
                if p.iter().any(|&x| x <= 0.0) {
                    return Err(Error::NonFiniteScore(
                        "log score gradient at a boundary point".into(),
                    ));
                }
                Ok(p.iter().map(|x| x.ln() + 1.0).collect())
            }
            ScoreRule::Spherical => {
                let n = dot(p, p).sqrt();
                Ok(p.iter().map(|x| x / n).collect())
            }
            ScoreRule::PiecewiseLinear(pieces) => {
                let i = self.active_piece(p).expect("piecewise");
                Ok(pieces[i].r.clone())
            }
        }
    }

    /// The scoring rule `R(report, e)` induced by `G`.
    pub fn score(&self, report: &[f64], e: usize) -> Result<f64> {
        match &self.rule {
            ScoreRule::Quadratic => Ok(2.0 * report[e] - dot(report, report)),
            ScoreRule::Log => {
                if report[e] <= 0.0 {
                    Err(Error::NonFiniteScore(format!(
                        "log score of outcome {e} reported with probability 0"
                    )))
                } else {
                    Ok(report[e].ln())
                }
            }
            ScoreRule::Spherical => Ok(report[e] / dot(report, report).sqrt()),
            ScoreRule::PiecewiseLinear(pieces) => {
                let i = self.active_piece(report).expect("piecewise");
                Ok(pieces[i].r[e] + pieces[i].b)
            }
        }
    }

    /// Expected score `R(report; belief) = E_{e ~ belief} R(report, e)`.
    ///
    /// Outcomes with zero belief mass are skipped, so a log report of 0 on an
    /// impossible outcome stays finite.
    pub fn expected_score(&self, report: &[f64], belief: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (e, &w) in belief.iter().enumerate() {
            if w > 0.0 {
                acc += w * self.score(report, e)?;
            }
        }
        Ok(acc)
    }

    /// Decision problem with `U[i][e] = r^i_e + b^i`; max-affine in the belief reproduces `G`.
    pub fn decision_problem(&self) -> Result<DecisionProblem> {
        let pieces = self.pieces().ok_or_else(|| {
            Error::InvalidArgument("decision problem requires a piecewise-linear score".into())
        })?;
        if pieces.is_empty() {
            return Err(Error::InvalidArgument("piecewise score has no pieces".into()));
        }
        Ok(DecisionProblem {
            utilities: pieces
                .iter()
                .map(|pc| pc.r.iter().map(|r| r + pc.b).collect())
                .collect(),
        })
    }

    /// Max of the tangent planes of a smooth `G` at `tangent_points`.
    ///
    /// The result lower-bounds `G` and touches it at every tangent point.
    pub fn linearize(&self, tangent_points: &[Vec<f64>]) -> Result<ScoreSpec> {
        if !self.is_smooth() {
            return Err(Error::InvalidArgument(
                "linearization expects a smooth built-in score".into(),
            ));
        }
        if tangent_points.is_empty() {
            return Err(Error::InvalidArgument("no tangent points".into()));
        }
        let mut pieces = Vec::with_capacity(tangent_points.len());
        for (index, p) in tangent_points.iter().enumerate() {
            if self.kind() == ScoreKind::Log && p.iter().any(|&x| x <= 0.0) {
                return Err(Error::BoundaryTangent { index });
            }
            let grad = self.gradient(p)?;
            let b = self.eval_g(p) - dot(&grad, p);
            pieces.push(Piece::new(grad, b));
        }
        Ok(ScoreSpec::piecewise(pieces))
    }

    /// Hoelder constants: user-supplied ones, else a built-in default.
    ///
    /// Defaults: quadratic (2, 1, 0.5); log from 1/2-niceness of `x ln x`;
    /// piecewise Lipschitz with `alpha = max_i (max_e U - min_e U) / 2`.
    /// Spherical has no default.
    pub fn holder_params(&self, n_events: usize) -> Option<HolderParams> {
        if let Some(h) = self.holder {
            return Some(h);
        }
        match &self.rule {
            ScoreRule::Quadratic => Some(HolderParams {
                alpha: 2.0,
                beta: 1.0,
                c: 0.5,
            }),
            ScoreRule::Log => {
                let (alpha, beta) = holder_from_niceness(0.5, n_events.max(2));
                Some(HolderParams {
                    alpha,
                    beta,
                    c: 0.99,
                })
            }
            ScoreRule::Spherical => None,
            ScoreRule::PiecewiseLinear(pieces) => {
                let spread = pieces
                    .iter()
                    .map(|pc| {
                        let u: Vec<f64> = pc.r.iter().map(|r| r + pc.b).collect();
                        let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let lo = u.iter().cloned().fold(f64::INFINITY, f64::min);
                        0.5 * (hi - lo)
                    })
                    .fold(0.0, f64::max);
                Some(HolderParams {
                    alpha: spread.max(f64::EPSILON),
                    beta: 1.0,
                    c: 0.99,
                })
            }
        }
    }

    /// Bound `L` with `|G| <= L`: user-supplied, else a valid default for the rule.
    pub fn bound_l(&self, n_events: usize) -> f64 {
        if let Some(l) = self.bound {
            return l;
        }
        match &self.rule {
            ScoreRule::Quadratic | ScoreRule::Spherical => 1.0,
            ScoreRule::Log => (n_events.max(2) as f64).ln(),
            ScoreRule::PiecewiseLinear(pieces) => pieces
                .iter()
                .flat_map(|pc| pc.r.iter().map(move |r| (r + pc.b).abs()))
                .fold(f64::EPSILON, f64::max),
        }
    }

    /// Structural problems with the spec for an event space of size `n_events`,
    /// and non-fatal warnings (duplicate pieces).
    pub fn problems(&self, n_events: usize) -> (Vec<String>, Vec<String>) {
        let mut errs = Vec::new();
        let mut warns = Vec::new();
        if let ScoreRule::PiecewiseLinear(pieces) = &self.rule {
            if pieces.is_empty() {
                errs.push("piecewise score needs at least one piece".into());
            }
            for (i, pc) in pieces.iter().enumerate() {
                if pc.r.len() != n_events {
                    errs.push(format!(
                        "piece {i}: r has {} entries, expected {n_events}",
                        pc.r.len()
                    ));
                }
                if !pc.b.is_finite() || pc.r.iter().any(|x| !x.is_finite()) {
                    errs.push(format!("piece {i}: non-finite coefficient"));
                }
            }
            for i in 0..pieces.len() {
                for j in 0..i {
                    if pieces[i].r.len() == pieces[j].r.len()
                        && (pieces[i].b - pieces[j].b).abs() <= DUPLICATE_TOL
                        && l1(&pieces[i].r, &pieces[j].r) <= DUPLICATE_TOL
                    {
                        warns.push(format!("piece {i} duplicates piece {j}"));
                    }
                }
            }
        }
        if let Some(h) = self.holder {
            if !(h.alpha > 0.0 && h.alpha.is_finite()) {
                errs.push(format!("holder alpha must be > 0, got {}", h.alpha));
            }
            if !(h.beta > 0.0 && h.beta <= 1.0) {
                errs.push(format!("holder beta must be in (0, 1], got {}", h.beta));
            }
            if !(h.c > 0.0 && h.c < 1.0) {
                errs.push(format!("holder c must be in (0, 1), got {}", h.c));
            }
        }
        if let Some(l) = self.bound {
            if !(l > 0.0 && l.is_finite()) {
                errs.push(format!("bound L must be > 0, got {l}"));
            }
        }
        (errs, warns)
    }

    /// Largest `|G(p)|` seen over simplex vertices, the barycenter and random samples.
    pub fn sampled_max_abs(&self, n_events: usize, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for e in 0..n_events {
            let mut v = vec![0.0; n_events];
            v[e] = 1.0;
            worst = worst.max(self.eval_g(&v).abs());
        }
        worst = worst.max(self.eval_g(&vec![1.0 / n_events as f64; n_events]).abs());
        for _ in 0..samples {
            let p = simplex::sample_uniform(&mut rng, n_events);
            worst = worst.max(self.eval_g(&p).abs());
        }
        worst
    }
}

/// Finite decision problem: action `i` pays `utilities[i][e]` when the event is `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    pub utilities: Vec<Vec<f64>>,
}

impl DecisionProblem {
    pub fn actions(&self) -> usize {
        self.utilities.len()
    }

    pub fn events(&self) -> usize {
        self.utilities.first().map_or(0, |u| u.len())
    }

    pub fn expected(&self, action: usize, belief: &[f64]) -> f64 {
        dot(&self.utilities[action], belief)
    }

    /// Maximum expected utility; equals `G(belief)` for the originating score.
    pub fn value(&self, belief: &[f64]) -> f64 {
        (0..self.actions())
            .map(|i| self.expected(i, belief))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Optimal action, lowest index on ties.
    pub fn best_action(&self, belief: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..self.actions() {
            let v = self.expected(i, belief);
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        best
    }
}

/// `(alpha, beta) = (n^(1 - lambda), lambda)` for a `lambda`-nice separable `G` on `n` outcomes.
pub fn holder_from_niceness(lambda: f64, n: usize) -> (f64, f64) {
    assert!(lambda > 0.0 && lambda <= 1.0, "lambda must be in (0, 1]");
    assert!(n >= 2, "dimension must be at least 2");
    ((n as f64).powf(1.0 - lambda), lambda)
}

/// Tangent points used when a smooth score must be linearized: the whole
/// `K`-uniform grid, minus boundary points for the log rule.
pub fn default_tangent_points(score: &ScoreSpec, n_events: usize, k: u32) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let skip_boundary = score.kind() == ScoreKind::Log;
    simplex::for_each_composition(n_events, k, |c| {
        if skip_boundary && c.contains(&0) {
            return;
        }
        out.push(c.iter().map(|&x| x as f64 / k as f64).collect());
    });
    out
}

/// Samples `sample_pairs` pairs at l1 distance at most `c` and tests the
/// claimed Hoelder inequality with slack `1e-9`.
pub fn check_holder(
    score: &ScoreSpec,
    n_events: usize,
    sample_pairs: usize,
    rng_seed: u64,
) -> Result<CheckReport> {
    let h = score.holder.ok_or_else(|| {
        Error::PreconditionViolated("check_holder needs explicit holder parameters".into())
    })?;
    let mut report = CheckReport::new("holder");
    report.value("alpha", h.alpha);
    report.value("beta", h.beta);
    report.value("c", h.c);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst_excess = f64::NEG_INFINITY;
    for t in 0..sample_pairs {
        // Every fourth pair starts at a vertex, where curvature-driven failures show up.
        let x = if t % 4 == 0 {
            let mut v = vec![0.0; n_events];
            v[rng.gen_range(0..n_events)] = 1.0;
            v
        } else {
            simplex::sample_uniform(&mut rng, n_events)
        };
        let target = simplex::sample_uniform(&mut rng, n_events);
        let dist = l1(&x, &target);
        let y = if dist <= h.c {
            target
        } else {
            let s = h.c * rng.gen::<f64>() / dist;
            x.iter().zip(&target).map(|(a, b)| a + s * (b - a)).collect()
        };
        let gap = (score.eval_g(&x) - score.eval_g(&y)).abs();
        let allowed = h.alpha * l1(&x, &y).powf(h.beta);
        let excess = gap - allowed;
        worst_excess = worst_excess.max(excess);
        if excess > 1e-9 && report.witness.is_none() {
            report.fail(format!(
                "|G(x)-G(y)| = {gap:.6e} exceeds alpha*|x-y|^beta = {allowed:.6e}"
            ));
            report.witness = Some((x, y));
        }
    }
    report.value("worst_excess", worst_excess);
    report.value("pairs", sample_pairs as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_g_examples() {
        let q = ScoreSpec::quadratic();
        assert_abs_diff_eq!(q.eval_g(&[0.5, 0.5]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q.eval_g(&[1.0, 0.0]), 1.0, epsilon = 1e-15);
        let lg = ScoreSpec::log();
        assert_abs_diff_eq!(lg.eval_g(&[0.5, 0.5]), -std::f64::consts::LN_2, epsilon = 1e-12);
        assert_eq!(lg.eval_g(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn score_examples() {
        let q = ScoreSpec::quadratic();
        assert_abs_diff_eq!(q.score(&[0.7, 0.3], 0).unwrap(), 0.82, epsilon = 1e-12);
        let lg = ScoreSpec::log();
        for e in 0..2 {
            assert_abs_diff_eq!(
                lg.score(&[0.5, 0.5], e).unwrap(),
                -0.693147,
                epsilon = 1e-6
            );
        }
        assert!(matches!(
            lg.score(&[1.0, 0.0], 1),
            Err(Error::NonFiniteScore(_))
        ));
    }

    #[test]
    fn properness_identity_for_every_rule() {
        let pw = ScoreSpec::piecewise(vec![
            Piece::new(vec![1.0, -1.0, 0.2], 0.0),
            Piece::new(vec![-1.0, 1.0, 0.0], 0.1),
        ]);
        let w = [0.2, 0.5, 0.3];
        for s in [
            ScoreSpec::quadratic(),
            ScoreSpec::log(),
            ScoreSpec::spherical(),
            pw,
        ] {
            let r = s.expected_score(&w, &w).unwrap();
            assert_abs_diff_eq!(r, s.eval_g(&w), epsilon = 1e-12);
        }
    }

    #[test]
    fn decision_problem_from_pieces() {
        let s = ScoreSpec::piecewise(vec![
            Piece::new(vec![1.0, -1.0], 0.0),
            Piece::new(vec![-1.0, 1.0], 0.0),
        ]);
        let d = s.decision_problem().unwrap();
        assert_eq!(d.utilities, vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(d.value(&[0.5, 0.5]), 0.0);
        assert_eq!(s.eval_g(&[0.5, 0.5]), 0.0);

        let zero = ScoreSpec::piecewise(vec![Piece::new(vec![0.0, 0.0], 0.0)]);
        let dz = zero.decision_problem().unwrap();
        assert_eq!(dz.utilities, vec![vec![0.0, 0.0]]);
        assert_eq!(zero.eval_g(&[0.3, 0.7]), 0.0);
    }

    #[test]
    fn piece_ties_go_to_lowest_index() {
        let s = ScoreSpec::piecewise(vec![
            Piece::new(vec![1.0, -1.0], 0.0),
            Piece::new(vec![-1.0, 1.0], 0.0),
        ]);
        assert_eq!(s.active_piece(&[0.5, 0.5]), Some(0));
        assert_eq!(s.score(&[0.5, 0.5], 1).unwrap(), -1.0);
    }

    #[test]
    fn duplicate_pieces_are_flagged_not_rejected() {
        let s = ScoreSpec::piecewise(vec![
            Piece::new(vec![1.0, 0.0], 0.0),
            Piece::new(vec![1.0, 0.0], 0.0),
        ]);
        let (errs, warns) = s.problems(2);
        assert!(errs.is_empty());
        assert_eq!(warns.len(), 1);
    }

    #[test]
    fn tangent_linearization_examples() {
        let q = ScoreSpec::quadratic();
        let one = q.linearize(&[vec![0.5, 0.5]]).unwrap();
        let pc = &one.pieces().unwrap()[0];
        assert_eq!(pc.r, vec![1.0, 1.0]);
        assert_abs_diff_eq!(pc.b, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(one.eval_g(&[0.5, 0.5]), 0.5, epsilon = 1e-12);
        // single supporting plane underestimates a strictly convex G elsewhere
        assert!(one.eval_g(&[0.8, 0.2]) < q.eval_g(&[0.8, 0.2]) - 1e-6);

        let three = q
            .linearize(&[vec![0.25, 0.75], vec![0.5, 0.5], vec![0.75, 0.25]])
            .unwrap();
        // planes at 0.25/0.5/0.75 evaluate to 0.275/0.5/0.475 at (0.6, 0.4)
        assert_abs_diff_eq!(three.eval_g(&[0.6, 0.4]), 0.5, epsilon = 1e-12);
        assert!(three.eval_g(&[0.6, 0.4]) <= 0.52);
    }

    #[test]
    fn log_tangent_on_boundary_is_rejected() {
        let err = ScoreSpec::log()
            .linearize(&[vec![0.5, 0.5], vec![1.0, 0.0]])
            .unwrap_err();
        assert_eq!(err, Error::BoundaryTangent { index: 1 });
    }

    #[test]
    fn default_tangent_grid_sizes() {
        assert_eq!(default_tangent_points(&ScoreSpec::quadratic(), 2, 20).len(), 21);
        assert_eq!(default_tangent_points(&ScoreSpec::log(), 2, 20).len(), 19);
    }

    #[test]
    fn holder_check_examples() {
        let good = ScoreSpec::quadratic().with_holder(HolderParams {
            alpha: 2.0,
            beta: 1.0,
            c: 0.5,
        });
        assert!(check_holder(&good, 2, 2000, 1).unwrap().passed);

        let bad = ScoreSpec::quadratic().with_holder(HolderParams {
            alpha: 0.1,
            beta: 1.0,
            c: 0.5,
        });
        let rep = check_holder(&bad, 2, 2000, 1).unwrap();
        assert!(!rep.passed);
        let (x, y) = rep.witness.unwrap();
        let gap = (bad.eval_g(&x) - bad.eval_g(&y)).abs();
        assert!(gap > 0.1 * l1(&x, &y) + 1e-9);

        // the hand-picked pair (1,0) vs (0.9,0.1): |dG| = 1 - 0.82 = 0.18 > 0.1 * 0.2
        let dg = (bad.eval_g(&[1.0, 0.0]) - bad.eval_g(&[0.9, 0.1])).abs();
        assert_abs_diff_eq!(dg, 0.18, epsilon = 1e-12);

        // zero-distance pairs always satisfy the bound
        let x = [0.3, 0.7];
        assert!((bad.eval_g(&x) - bad.eval_g(&x)).abs() <= 0.1 * 0.0);
    }

    #[test]
    fn niceness_to_holder() {
        assert_eq!(holder_from_niceness(1.0, 2), (1.0, 1.0));
        let (a, b) = holder_from_niceness(0.5, 4);
        assert_abs_diff_eq!(a, 2.0, epsilon = 1e-12);
        assert_eq!(b, 0.5);
        for n in 2..10 {
            assert_eq!(holder_from_niceness(1.0, n).0, 1.0);
        }
    }

    #[test]
    fn niceness_of_builtin_separable_parts() {
        // quadratic: g(x) = x^2 - x
        let g = |x: f64| x * x - x;
        assert_eq!(g(0.0), 0.0);
        assert_eq!(g(1.0), 0.0);
        for i in 1..=1000 {
            let eps = i as f64 / 1000.0;
            assert!(g(eps).abs().max(g(1.0 - eps).abs()) <= eps + 1e-15);
        }
        // log: g(x) = x ln x is 0.9-nice only once eps is below ~2.9e-16,
        // and 1/2-nice on all of (0, 1].
        let h = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
        for eps in [1e-16, 1e-20, 1e-50, 1e-100, 1e-300] {
            assert!(h(eps).abs().max(h(1.0 - eps).abs()) <= eps.powf(0.9));
        }
        assert!(h(0.01).abs() > 0.01f64.powf(0.9));
        for i in 1..=1000 {
            let eps = i as f64 / 1000.0;
            assert!(h(eps).abs().max(h(1.0 - eps).abs()) <= eps.sqrt());
        }
        // convexity by midpoint test
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let d = 0.004;
            assert!(h(x) <= 0.5 * (h(x - d) + h(x + d)) + 1e-15);
            assert!(g(x) <= 0.5 * (g(x - d) + g(x + d)) + 1e-15);
        }
    }

    #[test]
    fn default_bounds_hold_on_samples() {
        for (s, n) in [
            (ScoreSpec::quadratic(), 3),
            (ScoreSpec::log(), 4),
            (ScoreSpec::spherical(), 3),
        ] {
            assert!(s.sampled_max_abs(n, 500, 9) <= s.bound_l(n) + 1e-12);
        }
    }
}
