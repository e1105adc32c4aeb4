//! Dense revised simplex.
//!
//! Problems are `maximize c.x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  x >= 0`,
//! with constraint rows stored row-major. The solver runs a two-phase method
//! over slack and artificial columns that are never materialized, keeps a
//! dense basis inverse updated by elementary row operations and rebuilt by
//! Gauss-Jordan every [`REFACTOR_EVERY`] pivots. Pricing is Dantzig's rule,
//! switching to Bland's rule after a run of degenerate pivots.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    eq: Vec<f64>,
    eq_rhs: Vec<f64>,
    le: Vec<f64>,
    le_rhs: Vec<f64>,
}

impl LinearProgram {
    /// An LP over `n` nonnegative variables with zero objective.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            objective: vec![0.0; n],
            ..Default::default()
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn n_eq(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn n_le(&self) -> usize {
        self.le_rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_objective(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.n, "objective length");
        self.objective = c;
    }

    pub fn objective_mut(&mut self) -> &mut [f64] {
        &mut self.objective
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) {
        assert_eq!(row.len(), self.n, "row length");
        self.eq.extend_from_slice(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: &[f64], rhs: f64) {
        assert_eq!(row.len(), self.n, "row length");
        self.le.extend_from_slice(row);
        self.le_rhs.push(rhs);
    }

    /// `row . x >= rhs`, stored as `-row . x <= -rhs`.
    pub fn add_ge(&mut self, row: &[f64], rhs: f64) {
        let neg: Vec<f64> = row.iter().map(|x| -x).collect();
        self.add_le(&neg, -rhs);
    }

    /// Appends a row built in place, avoiding a temporary when `n` is large.
    pub fn push_eq_with(&mut self, rhs: f64, fill: impl FnOnce(&mut [f64])) {
        let start = self.eq.len();
        self.eq.resize(start + self.n, 0.0);
        fill(&mut self.eq[start..]);
        self.eq_rhs.push(rhs);
    }

    pub fn push_le_with(&mut self, rhs: f64, fill: impl FnOnce(&mut [f64])) {
        let start = self.le.len();
        self.le.resize(start + self.n, 0.0);
        fill(&mut self.le[start..]);
        self.le_rhs.push(rhs);
    }

    pub fn eq_row(&self, i: usize) -> &[f64] {
        &self.eq[i * self.n..(i + 1) * self.n]
    }

    pub fn le_row(&self, i: usize) -> &[f64] {
        &self.le[i * self.n..(i + 1) * self.n]
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn le_rhs(&self) -> &[f64] {
        &self.le_rhs
    }

    /// Row `i` of the stacked system, equalities first.
    fn row(&self, i: usize) -> &[f64] {
        if i < self.n_eq() {
            self.eq_row(i)
        } else {
            self.le_row(i - self.n_eq())
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        if i < self.n_eq() {
            self.eq_rhs[i]
        } else {
            self.le_rhs[i - self.n_eq()]
        }
    }

    fn check(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if self.objective.len() != self.n
            || self.eq.len() != self.n * self.n_eq()
            || self.le.len() != self.n * self.n_le()
        {
            return Err(Error::InvalidArgument("inconsistent LP dimensions".into()));
        }
        if !(finite(&self.objective)
            && finite(&self.eq)
            && finite(&self.le)
            && finite(&self.eq_rhs)
            && finite(&self.le_rhs))
        {
            return Err(Error::InvalidArgument("LP has non-finite coefficients".into()));
        }
        Ok(())
    }

    /// Plain-text dump: the objective, then one constraint per line as
    /// space-separated coefficients followed by the relation and right-hand side.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "max {}", join(&self.objective));
        for i in 0..self.n_eq() {
            let _ = writeln!(out, "{} = {}", join(self.eq_row(i)), self.eq_rhs[i]);
        }
        for i in 0..self.n_le() {
            let _ = writeln!(out, "{} <= {}", join(self.le_row(i)), self.le_rhs[i]);
        }
        out
    }

    /// Largest violation of the constraints (and of `x >= 0`) at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for i in 0..self.n_eq() {
            worst = worst.max((dot(self.eq_row(i)) - self.eq_rhs[i]).abs());
        }
        for i in 0..self.n_le() {
            worst = worst.max(dot(self.le_row(i)) - self.le_rhs[i]);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual values, equality rows first, in the sign convention of the original rows.
    pub duals: Vec<f64>,
    /// `|c.x - b.y|`.
    pub duality_gap: f64,
    /// `max |x_j * reduced_cost_j|` and `|y_i * slack_i|` over rows.
    pub cs_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    /// The optimal solution, with infeasibility and unboundedness as errors.
    pub fn into_optimal(self) -> Result<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Ok(s),
            LpOutcome::Infeasible => Err(Error::Infeasible),
            LpOutcome::Unbounded => Err(Error::Unbounded),
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.check()?;
    Simplex::new(lp).run()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    /// +1 or -1 per row; rows with negative right-hand side are negated.
    sign: Vec<f64>,
    b: Vec<f64>,
    /// Row of each artificial column.
    art_row: Vec<usize>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    cap: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.n_eq() + lp.n_le();
        let n = lp.n;
        let sign: Vec<f64> = (0..m)
            .map(|i| if lp.rhs(i) < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let b: Vec<f64> = (0..m).map(|i| sign[i] * lp.rhs(i)).collect();
        let n_le = lp.n_le();
        let mut art_row = Vec::new();
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            if i >= lp.n_eq() && sign[i] > 0.0 {
                basis.push(n + (i - lp.n_eq()));
            } else {
                basis.push(n + n_le + art_row.len());
                art_row.push(i);
            }
        }
        let total = n + n_le + art_row.len();
        let mut is_basic = vec![false; total];
        for &j in &basis {
            is_basic[j] = true;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Simplex {
            lp,
            m,
            n,
            sign,
            xb: b.clone(),
            b,
            art_row,
            basis,
            is_basic,
            binv,
            iterations: 0,
            cap: 50 * (m + n).max(1),
        }
    }

    fn n_le(&self) -> usize {
        self.lp.n_le()
    }

    fn n_total(&self) -> usize {
        self.n + self.n_le() + self.art_row.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n + self.n_le()
    }

    /// Column `j` of the sign-adjusted constraint matrix.
    fn column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        if j < self.n {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.sign[i] * self.lp.row(i)[j];
            }
        } else if j < self.n + self.n_le() {
            let r = self.lp.n_eq() + (j - self.n);
            out[r] = self.sign[r];
        } else {
            out[self.art_row[j - self.n - self.n_le()]] = 1.0;
        }
    }

    fn cost(&self, j: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if self.is_artificial(j) {
                    -1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if j < self.n {
                    self.lp.objective[j]
                } else {
                    0.0
                }
            }
        }
    }

    /// `y = c_B B^-1`.
    fn duals(&self, phase: Phase) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            let c = self.cost(j, phase);
            if c != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for (yi, r) in y.iter_mut().zip(row) {
                    *yi += c * r;
                }
            }
        }
        y
    }

    /// Reduced costs `c_j - y . A_j` of every structural column.
    fn structural_reduced_costs(&self, y: &[f64], phase: Phase) -> Vec<f64> {
        let mut d: Vec<f64> = match phase {
            Phase::One => vec![0.0; self.n],
            Phase::Two => self.lp.objective.clone(),
        };
        for (i, &yi) in y.iter().enumerate() {
            let w = yi * self.sign[i];
            if w == 0.0 {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(self.lp.row(i)) {
                *dj -= w * a;
            }
        }
        d
    }

    fn reduced_cost_aux(&self, j: usize, y: &[f64], phase: Phase) -> f64 {
        if j < self.n + self.n_le() {
            let r = self.lp.n_eq() + (j - self.n);
            -(y[r] * self.sign[r])
        } else {
            self.cost(j, phase) - y[self.art_row[j - self.n - self.n_le()]]
        }
    }

    /// Picks an entering column, or `None` at optimality.
    fn price(&self, phase: Phase, bland: bool) -> Option<usize> {
        let y = self.duals(phase);
        let d = self.structural_reduced_costs(&y, phase);
        let allow_art = phase == Phase::One;
        let mut best: Option<(usize, f64)> = None;
        let total = if allow_art {
            self.n_total()
        } else {
            self.n + self.n_le()
        };
        for j in 0..total {
            if self.is_basic[j] {
                continue;
            }
            let dj = if j < self.n {
                d[j]
            } else {
                self.reduced_cost_aux(j, &y, phase)
            };
            if dj > COST_TOL {
                if bland {
                    return Some(j);
                }
                if best.map_or(true, |(_, v)| dj > v) {
                    best = Some((j, dj));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn ftran(&self, col: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|k| {
                self.binv[k * m..(k + 1) * m]
                    .iter()
                    .zip(col)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn pivot(&mut self, leave: usize, enter: usize, alpha: &[f64]) {
        let m = self.m;
        let p = alpha[leave];
        for c in 0..m {
            self.binv[leave * m + c] /= p;
        }
        self.xb[leave] /= p;
        for k in 0..m {
            if k == leave || alpha[k] == 0.0 {
                continue;
            }
            let f = alpha[k];
            for c in 0..m {
                self.binv[k * m + c] -= f * self.binv[leave * m + c];
            }
            self.xb[k] -= f * self.xb[leave];
        }
        self.is_basic[self.basis[leave]] = false;
        self.is_basic[enter] = true;
        self.basis[leave] = enter;
        self.iterations += 1;
        if self.iterations % REFACTOR_EVERY == 0 {
            self.refactor();
        }
    }

    /// Rebuilds `B^-1` and `x_B` from the basis by Gauss-Jordan with partial pivoting.
    fn refactor(&mut self) {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                a[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (piv, big) = (c..m)
                .map(|r| (r, a[r * m + c].abs()))
                .fold((c, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if big < 1e-14 {
                // Keep the updated inverse; a singular rebuild would only make things worse.
                return;
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let p = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= p;
                inv[c * m + k] /= p;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        self.xb = self.ftran(&self.b.clone());
    }

    /// Runs the simplex loop for `phase`. Returns false when unbounded.
    fn optimize(&mut self, phase: Phase) -> Result<bool> {
        let mut degenerate = 0usize;
        let mut col = vec![0.0; self.m];
        loop {
            if self.iterations >= self.cap {
                return Err(Error::NumericalFailure(format!(
                    "simplex hit the iteration cap of {}",
                    self.cap
                )));
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let Some(enter) = self.price(phase, bland) else {
                return Ok(true);
            };
            self.column(enter, &mut col);
            let alpha = self.ftran(&col);
            let mut leave: Option<(usize, f64)> = None;
            for k in 0..self.m {
                let pinned = phase == Phase::Two && self.is_artificial(self.basis[k]);
                if pinned && alpha[k].abs() > PIVOT_TOL {
                    // An artificial kept on a redundant row must stay at zero.
                    leave = Some((k, 0.0));
                    break;
                }
                if alpha[k] <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[k].max(0.0) / alpha[k];
                leave = match leave {
                    None => Some((k, ratio)),
                    Some((l, r)) => {
                        let better = if bland {
                            ratio < r - 1e-12
                                || (ratio <= r + 1e-12 && self.basis[k] < self.basis[l])
                        } else {
                            ratio < r - 1e-12 || (ratio <= r + 1e-12 && alpha[k] > alpha[l])
                        };
                        if better {
                            Some((k, ratio))
                        } else {
                            Some((l, r))
                        }
                    }
                };
            }
            let Some((leave, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(leave, enter, &alpha);
        }
    }

    /// Pivots basic artificials out wherever some real column has a usable entry.
    fn drive_out_artificials(&mut self) {
        let mut col = vec![0.0; self.m];
        for k in 0..self.m {
            if !self.is_artificial(self.basis[k]) {
                continue;
            }
            let row = &self.binv[k * self.m..(k + 1) * self.m];
            let mut best: Option<(usize, f64)> = None;
            // Slack columns first: they give the cheapest entries to evaluate.
            for j in (self.n..self.n + self.n_le()).chain(0..self.n) {
                if self.is_basic[j] {
                    continue;
                }
                self.column(j, &mut col);
                let v: f64 = row.iter().zip(&col).map(|(a, b)| a * b).sum();
                if v.abs() > 1e-7 && best.map_or(true, |(_, b)| v.abs() > b) {
                    best = Some((j, v.abs()));
                    if v.abs() > 1e-2 {
                        break;
                    }
                }
            }
            if let Some((j, _)) = best {
                self.column(j, &mut col);
                let alpha = self.ftran(&col);
                self.pivot(k, j, &alpha);
            }
        }
    }

    fn run(mut self) -> Result<LpOutcome> {
        if !self.art_row.is_empty() {
            self.optimize(Phase::One)?;
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.xb)
                .filter(|(&j, _)| self.is_artificial(j))
                .map(|(_, &x)| x)
                .sum();
            if infeas > FEAS_TOL {
                return Ok(LpOutcome::Infeasible);
            }
            self.drive_out_artificials();
        }
        if !self.optimize(Phase::Two)? {
            return Ok(LpOutcome::Unbounded);
        }
        self.refactor();
        Ok(LpOutcome::Optimal(self.solution()))
    }

    fn solution(&self) -> LpSolution {
        let lp = self.lp;
        let mut x = vec![0.0; self.n];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                x[j] = self.xb[k].max(0.0);
            }
        }
        let y = self.duals(Phase::Two);
        let d = self.structural_reduced_costs(&y, Phase::Two);
        let duals: Vec<f64> = y.iter().zip(&self.sign).map(|(a, s)| a * s).collect();
        let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let dual_obj: f64 = (0..self.m).map(|i| duals[i] * lp.rhs(i)).sum();
        let mut cs = x
            .iter()
            .zip(&d)
            .fold(0.0f64, |w, (xj, dj)| w.max((xj * dj).abs()));
        for (r, yi) in duals.iter().enumerate().skip(lp.n_eq()) {
            let lhs: f64 = lp.row(r).iter().zip(&x).map(|(a, b)| a * b).sum();
            cs = cs.max((yi * (lp.rhs(r) - lhs)).abs());
        }
        LpSolution {
            x,
            objective,
            duals,
            duality_gap: (objective - dual_obj).abs(),
            cs_residual: cs,
            iterations: self.iterations,
        }
    }
}
