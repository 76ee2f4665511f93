//! Dense two-phase primal simplex.
//!
//! Every DEA evaluation in this crate reduces to a small dense linear
//! program (a few hundred columns, a handful of rows), so the solver
//! favours robustness over speed: a plain tableau, Bland's pivoting rule
//! throughout (DEA programs are highly degenerate), and explicit
//! feasibility tolerances.

use crate::error::{Error, Result};

/// Pivot elements smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Constraint violations within this tolerance count as feasible.
pub const FEAS_TOL: f64 = 1e-8;

const MAX_ITER_FACTOR: usize = 200;

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One linear constraint `coeffs . x <relation> rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }
}

/// Per-variable bounds. Lower defaults to zero, upper to none.
#[derive(Debug, Clone)]
pub struct Bound {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Default for Bound {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: None,
        }
    }
}

/// Minimization problem `min c.x  s.t.  constraints, bounds`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Empty means: every variable in `[0, +inf)`.
    pub bounds: Vec<Bound>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, constraints: Vec<Constraint>) -> Self {
        Self {
            objective,
            constraints,
            bounds: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::MalformedLp("objective has no variables".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::MalformedLp(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() {
                return Err(Error::MalformedLp(format!("constraint {i} has non-finite rhs")));
            }
            if c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::MalformedLp(format!(
                    "constraint {i} has non-finite coefficients"
                )));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedLp("objective has non-finite coefficients".into()));
        }
        if !self.bounds.is_empty() && self.bounds.len() != n {
            return Err(Error::MalformedLp(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if !b.lower.is_finite() {
                return Err(Error::MalformedLp(format!("variable {j} has non-finite lower bound")));
            }
            if let Some(u) = b.upper {
                if !u.is_finite() || u < b.lower {
                    return Err(Error::MalformedLp(format!("variable {j} has bad upper bound")));
                }
            }
        }
        Ok(())
    }
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `primal` is meaningful only when `status == Optimal`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, n: usize) -> Self {
        Self {
            status,
            objective_value: f64::NAN,
            primal: vec![0.0; n],
        }
    }
}

/// Solve a linear program with the two-phase primal simplex.
///
/// Infeasible and unbounded problems are reported through
/// [`LpSolution::status`]; only malformed input is an `Err`.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let n = problem.objective.len();

    // Shift non-zero lower bounds to zero and turn upper bounds into rows,
    // so the tableau only ever sees x >= 0.
    let lowers: Vec<f64> = if problem.bounds.is_empty() {
        vec![0.0; n]
    } else {
        problem.bounds.iter().map(|b| b.lower).collect()
    };

    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(problem.constraints.len());
    for c in &problem.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lowers).map(|(a, l)| a * l).sum();
        rows.push((c.coeffs.clone(), c.relation, c.rhs - shift));
    }
    if !problem.bounds.is_empty() {
        for (j, b) in problem.bounds.iter().enumerate() {
            if let Some(u) = b.upper {
                let mut coeffs = vec![0.0; n];
                coeffs[j] = 1.0;
                rows.push((coeffs, Relation::Le, u - b.lower));
            }
        }
    }

    let mut tab = Tableau::build(n, &rows);
    if tab.has_artificials() {
        match tab.run_phase1() {
            Phase1::Feasible => {}
            Phase1::Infeasible => {
                return Ok(LpSolution::non_optimal(LpStatus::Infeasible, n));
            }
        }
    }

    tab.load_objective(&problem.objective);
    if !tab.run_simplex() {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, n));
    }

    let mut primal = tab.primal(n);
    for (x, l) in primal.iter_mut().zip(&lowers) {
        *x += l;
    }
    let objective_value = problem
        .objective
        .iter()
        .zip(&primal)
        .map(|(c, x)| c * x)
        .sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value,
        primal,
    })
}

enum Phase1 {
    Feasible,
    Infeasible,
}

/// Simplex tableau in standard form: rows `Ax = b` with `b >= 0`,
/// variables `x >= 0`, objective kept priced-out in the last row.
struct Tableau {
    /// Structural variable count (the caller's variables).
    n_struct: usize,
    /// Total columns excluding the rhs.
    n_total: usize,
    /// First artificial column, if any.
    art_start: usize,
    m: usize,
    /// (m + 1) x (n_total + 1); last row is the objective, last column the rhs.
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn build(n: usize, rows: &[(Vec<f64>, Relation, f64)]) -> Self {
        let m = rows.len();
        // One slack or surplus column per inequality, plus one artificial per
        // row that lacks an identity column after sign normalization.
        let mut n_slack = 0;
        for (_, rel, _) in rows {
            if *rel != Relation::Eq {
                n_slack += 1;
            }
        }
        let mut need_art = vec![false; m];
        for (i, (_, rel, rhs)) in rows.iter().enumerate() {
            let flip = *rhs < 0.0;
            let effective = match (rel, flip) {
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
                (Relation::Eq, _) => Relation::Eq,
            };
            need_art[i] = effective != Relation::Le;
        }
        let n_art = need_art.iter().filter(|x| **x).count();
        let n_total = n + n_slack + n_art;
        let width = n_total + 1;
        let mut a = vec![0.0; (m + 1) * width];
        let mut basis = vec![0usize; m];

        let mut slack_col = n;
        let mut art_col = n + n_slack;
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, v) in coeffs.iter().enumerate() {
                a[i * width + j] = sign * v;
            }
            a[i * width + n_total] = sign * rhs;
            match rel {
                Relation::Le | Relation::Ge => {
                    let dir = if *rel == Relation::Le { 1.0 } else { -1.0 };
                    a[i * width + slack_col] = sign * dir;
                    if !need_art[i] {
                        basis[i] = slack_col;
                    }
                    slack_col += 1;
                }
                Relation::Eq => {}
            }
            if need_art[i] {
                a[i * width + art_col] = 1.0;
                basis[i] = art_col;
                art_col += 1;
            }
        }

        Self {
            n_struct: n,
            n_total,
            art_start: n + n_slack,
            m,
            a,
            basis,
        }
    }

    fn has_artificials(&self) -> bool {
        self.art_start < self.n_total
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.n_total + 1) + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * (self.n_total + 1) + c] = v;
    }

    /// Load `min sum(artificials)` into the objective row, priced out
    /// against the current basis.
    fn load_phase1_objective(&mut self) {
        let width = self.n_total + 1;
        for c in 0..width {
            self.set(self.m, c, 0.0);
        }
        for c in self.art_start..self.n_total {
            self.set(self.m, c, 1.0);
        }
        for r in 0..self.m {
            if self.basis[r] >= self.art_start {
                for c in 0..width {
                    let v = self.at(self.m, c) - self.at(r, c);
                    self.set(self.m, c, v);
                }
            }
        }
    }

    fn run_phase1(&mut self) -> Phase1 {
        self.load_phase1_objective();
        // Phase-1 objective is bounded below by zero, so the loop can only
        // terminate at an optimum.
        let ok = self.run_simplex();
        debug_assert!(ok, "phase 1 cannot be unbounded");
        let value = -self.at(self.m, self.n_total);
        if value > FEAS_TOL {
            return Phase1::Infeasible;
        }
        self.evict_basic_artificials();
        Phase1::Feasible
    }

    /// After a feasible phase 1, pivot any artificial still in the basis out
    /// on a structural/slack column; rows with no such column are redundant
    /// and get neutralized in place.
    fn evict_basic_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.art_start {
                continue;
            }
            let mut col = None;
            for c in 0..self.art_start {
                if self.at(r, c).abs() > PIVOT_TOL {
                    col = Some(c);
                    break;
                }
            }
            match col {
                Some(c) => self.pivot(r, c),
                None => {
                    // Redundant row: zero it so no later pivot can touch it.
                    let width = self.n_total + 1;
                    for c in 0..width {
                        self.set(r, c, 0.0);
                    }
                }
            }
        }
    }

    /// Replace the objective row with `min c.x`, priced out.
    fn load_objective(&mut self, c_struct: &[f64]) {
        let width = self.n_total + 1;
        for c in 0..width {
            self.set(self.m, c, 0.0);
        }
        for (j, v) in c_struct.iter().enumerate() {
            self.set(self.m, j, *v);
        }
        for r in 0..self.m {
            let b = self.basis[r];
            let cb = if b < self.n_struct { c_struct[b] } else { 0.0 };
            if cb != 0.0 {
                for c in 0..width {
                    let v = self.at(self.m, c) - cb * self.at(r, c);
                    self.set(self.m, c, v);
                }
            }
        }
    }

    /// Bland's rule simplex loop. Returns false when unbounded.
    fn run_simplex(&mut self) -> bool {
        let max_iter = MAX_ITER_FACTOR * (self.m + self.n_total + 1);
        for _ in 0..max_iter {
            // Entering: lowest-index column with a negative reduced cost.
            // Artificial columns start basic and may only ever leave.
            let mut entering = None;
            for c in 0..self.art_start {
                if self.at(self.m, c) < -PIVOT_TOL {
                    entering = Some(c);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };

            // Leaving: minimum ratio, ties broken by lowest basis index.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let pivot = self.at(r, col);
                if pivot > PIVOT_TOL {
                    let ratio = self.at(r, self.n_total) / pivot;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - PIVOT_TOL
                                || (ratio < bratio + PIVOT_TOL && self.basis[r] < self.basis[br])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, col);
        }
        // Bland's rule precludes cycling; running out of iterations means the
        // cap is too small for the instance, which we treat as a logic error.
        panic!("simplex iteration cap exceeded");
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.n_total + 1;
        let p = self.at(row, col);
        for c in 0..width {
            let v = self.at(row, c) / p;
            self.set(row, c, v);
        }
        for r in 0..=self.m {
            if r == row {
                continue;
            }
            let f = self.at(r, col);
            if f != 0.0 {
                for c in 0..width {
                    let v = self.at(r, c) - f * self.at(row, c);
                    self.set(r, c, v);
                }
                self.set(r, col, 0.0);
            }
        }
        self.basis[row] = col;
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for r in 0..self.m {
            let b = self.basis[r];
            if b < n {
                x[b] = self.at(r, self.n_total);
            }
        }
        x
    }
}

/// Check a point against a problem's constraints and bounds.
/// Used by callers (and tests) to validate reported optima independently.
pub fn max_violation(problem: &LpProblem, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for c in &problem.constraints {
        let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        let gap = match c.relation {
            Relation::Le => lhs - c.rhs,
            Relation::Ge => c.rhs - lhs,
            Relation::Eq => (lhs - c.rhs).abs(),
        };
        worst = worst.max(gap);
    }
    for (j, &v) in x.iter().enumerate() {
        let (lo, hi) = if problem.bounds.is_empty() {
            (0.0, None)
        } else {
            (problem.bounds[j].lower, problem.bounds[j].upper)
        };
        worst = worst.max(lo - v);
        if let Some(u) = hi {
            worst = worst.max(v - u);
        }
    }
    worst
}
