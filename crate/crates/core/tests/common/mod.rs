//! Shared test support: independent oracles (LP vertex enumeration, DEA
//! grid search, LSDV) and deterministic synthetic-data generators. Nothing
//! here touches the solver paths it is used to check.

#![allow(dead_code)]

use tfpanel::dea::{DmuBundle, Rts};
use tfpanel::lp::{Bound, LpProblem, Relation};
use tfpanel::panel::Record;

// ---------------------------------------------------------------------------
// Deterministic RNG (LCG; good enough for fixture synthesis and instance
// generation, and independent of the crate's rand stack).

pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

// ---------------------------------------------------------------------------
// LP vertex-enumeration oracle. Valid for problems whose feasible set is
// bounded (the generator below always includes `sum x <= U`), where the
// optimum of a feasible LP is attained at a vertex.

pub enum OracleStatus {
    Optimal(f64),
    Infeasible,
}

/// Enumerate all vertices (intersections of n active constraints, including
/// non-negativity and bound rows) and minimize the objective over the
/// feasible ones.
pub fn vertex_oracle(problem: &LpProblem) -> OracleStatus {
    let n = problem.objective.len();

    // Collect every constraint as `g . x (<=|=|>=) h` rows plus bounds.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = problem
        .constraints
        .iter()
        .map(|c| (c.coeffs.clone(), c.relation, c.rhs))
        .collect();
    for j in 0..n {
        let mut g = vec![0.0; n];
        g[j] = 1.0;
        let (lo, hi) = if problem.bounds.is_empty() {
            (0.0, None)
        } else {
            (problem.bounds[j].lower, problem.bounds[j].upper)
        };
        rows.push((g.clone(), Relation::Ge, lo));
        if let Some(u) = hi {
            rows.push((g, Relation::Le, u));
        }
    }

    let feasible = |x: &[f64]| -> bool {
        rows.iter().all(|(g, rel, h)| {
            let lhs: f64 = g.iter().zip(x).map(|(a, v)| a * v).sum();
            match rel {
                Relation::Le => lhs <= h + 1e-7,
                Relation::Ge => lhs >= h - 1e-7,
                Relation::Eq => (lhs - h).abs() <= 1e-7,
            }
        })
    };

    let mut best: Option<f64> = None;
    let m = rows.len();
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        // Solve the n x n system of the selected rows as equalities.
        if let Some(x) = solve_square(&subset.iter().map(|&i| rows[i].0.clone()).collect::<Vec<_>>(), &subset.iter().map(|&i| rows[i].2).collect::<Vec<_>>()) {
            if feasible(&x) {
                let value: f64 = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(match best {
                    None => value,
                    Some(b) => b.min(value),
                });
            }
        }
        // Next combination of size n out of m, lexicographic.
        let mut i = n;
        loop {
            if i == 0 {
                return match best {
                    Some(v) => OracleStatus::Optimal(v),
                    None => OracleStatus::Infeasible,
                };
            }
            i -= 1;
            if subset[i] != i + m - n {
                subset[i] += 1;
                for k in (i + 1)..n {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
#[allow(clippy::needless_range_loop)]
fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .expect("finite")
        })?;
        if m[pivot_row][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, pivot_row);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        let v = m[col][c];
                        m[r][c] -= f * v;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Random bounded LP: up to 5 variables, up to 5 random rows plus one
/// `sum x <= U` row, non-negative variables. Infeasible instances occur
/// naturally; unbounded ones cannot.
pub fn random_bounded_lp(rng: &mut Lcg) -> LpProblem {
    let n = 1 + rng.below(5);
    let m = 1 + rng.below(5);
    let mut constraints = Vec::new();
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.range(-3.0, 3.0)).collect();
        let relation = match rng.below(5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs = rng.range(-2.0, 4.0);
        constraints.push(tfpanel::lp::Constraint::new(coeffs, relation, rhs));
    }
    constraints.push(tfpanel::lp::Constraint::new(
        vec![1.0; n],
        Relation::Le,
        rng.range(2.0, 10.0),
    ));
    let objective: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
    let mut p = LpProblem::new(objective, constraints);
    if rng.below(4) == 0 {
        p.bounds = (0..n)
            .map(|_| Bound {
                lower: 0.0,
                upper: Some(rng.range(0.5, 3.0)),
            })
            .collect();
    }
    p
}

// ---------------------------------------------------------------------------
// DEA grid oracles: beam-refined grid search over the intensity weights.
// Slacks (respectively the projection point) are determined by lambda, so
// the search space is just the lambda box / simplex.

struct DeaData {
    x0: Vec<f64>,
    yg0: Vec<f64>,
    yb0: Vec<f64>,
    xs: Vec<Vec<f64>>,
    ygs: Vec<Vec<f64>>,
    ybs: Vec<Vec<f64>>,
}

impl DeaData {
    fn new(dmu: &DmuBundle, reference: &[DmuBundle]) -> Self {
        Self {
            x0: dmu.inputs.clone(),
            yg0: dmu.good_outputs.clone(),
            yb0: dmu.bad_outputs.clone(),
            xs: reference.iter().map(|b| b.inputs.clone()).collect(),
            ygs: reference.iter().map(|b| b.good_outputs.clone()).collect(),
            ybs: reference.iter().map(|b| b.bad_outputs.clone()).collect(),
        }
    }

    fn combine(&self, lambda: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = self.x0.len();
        let s1 = self.yg0.len();
        let s2 = self.yb0.len();
        let mut xl = vec![0.0; m];
        let mut ygl = vec![0.0; s1];
        let mut ybl = vec![0.0; s2];
        for (j, &w) in lambda.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (acc, v) in xl.iter_mut().zip(&self.xs[j]) {
                *acc += w * v;
            }
            for (acc, v) in ygl.iter_mut().zip(&self.ygs[j]) {
                *acc += w * v;
            }
            for (acc, v) in ybl.iter_mut().zip(&self.ybs[j]) {
                *acc += w * v;
            }
        }
        (xl, ygl, ybl)
    }

    /// SBM ratio at lambda; `None` when the implied slacks are infeasible.
    fn sbm_value(&self, lambda: &[f64]) -> Option<f64> {
        const TOL: f64 = 1e-7;
        let (xl, ygl, ybl) = self.combine(lambda);
        let m = self.x0.len() as f64;
        let denom_dims = (self.yg0.len() + self.yb0.len()) as f64;
        let mut in_term = 0.0;
        for (x0, xl) in self.x0.iter().zip(&xl) {
            let slack = x0 - xl;
            if slack < -TOL {
                return None;
            }
            in_term += slack.max(0.0) / x0;
        }
        let mut out_term = 0.0;
        for (y0, yl) in self.yg0.iter().zip(&ygl) {
            let slack = yl - y0;
            if slack < -TOL {
                return None;
            }
            out_term += slack.max(0.0) / y0;
        }
        for (y0, yl) in self.yb0.iter().zip(&ybl) {
            let slack = y0 - yl;
            if slack < -TOL {
                return None;
            }
            out_term += slack.max(0.0) / y0;
        }
        Some((1.0 - in_term / m) / (1.0 + out_term / denom_dims))
    }

    /// Super-efficiency ratio at lambda (always feasible for lambda >= 0,
    /// except where the good-output combination vanishes).
    fn super_value(&self, lambda: &[f64]) -> Option<f64> {
        let (xl, ygl, ybl) = self.combine(lambda);
        let expand_dims = (self.x0.len() + self.yb0.len()) as f64;
        let mut expand = 0.0;
        for (x0, xl) in self.x0.iter().zip(&xl) {
            expand += xl.max(*x0) / x0;
        }
        for (y0, yl) in self.yb0.iter().zip(&ybl) {
            expand += yl.max(*y0) / y0;
        }
        let mut contract = 0.0;
        for (y0, yl) in self.yg0.iter().zip(&ygl) {
            let proj = yl.min(*y0);
            if proj <= 0.0 {
                return None;
            }
            contract += proj / y0;
        }
        Some((expand / expand_dims) / (contract / self.yg0.len() as f64))
    }
}

/// Exact SBM oracle: the SBM objective is linear-fractional over the
/// lambda polytope (slacks are implied by lambda), so its minimum sits at a
/// polytope vertex. Enumerate all vertices by brute force and take the
/// smallest ratio. Entirely independent of the simplex path.
pub fn sbm_vertex_oracle(dmu: &DmuBundle, reference: &[DmuBundle], rts: Rts) -> Option<f64> {
    let data = DeaData::new(dmu, reference);
    let n = reference.len();

    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    let m = data.x0.len();
    for i in 0..m {
        let g: Vec<f64> = (0..n).map(|j| data.xs[j][i]).collect();
        rows.push((g, Relation::Le, data.x0[i]));
    }
    for r in 0..data.yg0.len() {
        let g: Vec<f64> = (0..n).map(|j| data.ygs[j][r]).collect();
        rows.push((g, Relation::Ge, data.yg0[r]));
    }
    for k in 0..data.yb0.len() {
        let g: Vec<f64> = (0..n).map(|j| data.ybs[j][k]).collect();
        rows.push((g, Relation::Le, data.yb0[k]));
    }
    for j in 0..n {
        let mut g = vec![0.0; n];
        g[j] = 1.0;
        rows.push((g, Relation::Ge, 0.0));
    }
    if rts == Rts::Vrs {
        rows.push((vec![1.0; n], Relation::Eq, 1.0));
    }

    let feasible = |lambda: &[f64]| -> bool {
        rows.iter().all(|(g, rel, h)| {
            let lhs: f64 = g.iter().zip(lambda).map(|(a, v)| a * v).sum();
            match rel {
                Relation::Le => lhs <= h + 1e-7,
                Relation::Ge => lhs >= h - 1e-7,
                Relation::Eq => (lhs - h).abs() <= 1e-7,
            }
        })
    };

    let total = rows.len();
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&i| rows[i].2).collect();
        if let Some(lambda) = solve_square(&a, &b) {
            if feasible(&lambda) {
                if let Some(v) = data.sbm_value(&lambda) {
                    best = Some(match best {
                        None => v,
                        Some(cur) => cur.min(v),
                    });
                }
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != i + total - n {
                subset[i] += 1;
                for k in (i + 1)..n {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum DeaModel {
    Super,
}

/// Beam-refined grid minimization over the lambda space. Under VRS the last
/// coordinate is implied by the simplex constraint.
fn grid_minimize(
    data: &DeaData,
    model: DeaModel,
    rts: Rts,
    upper: &[f64],
    seeds: &[Vec<f64>],
) -> Option<f64> {
    let dims = match rts {
        Rts::Crs => data.xs.len(),
        Rts::Vrs => data.xs.len().saturating_sub(1),
    };
    let eval = |point: &[f64]| -> Option<f64> {
        let lambda: Vec<f64> = match rts {
            Rts::Crs => point.to_vec(),
            Rts::Vrs => {
                let partial: f64 = point.iter().sum();
                if partial > 1.0 + 1e-12 {
                    return None;
                }
                let mut l = point.to_vec();
                l.push((1.0 - partial).max(0.0));
                l
            }
        };
        match model {
            DeaModel::Super => data.super_value(&lambda),
        }
    };

    if dims == 0 {
        // VRS with one reference unit: lambda is forced to 1.
        return eval(&[]);
    }

    const POINTS: usize = 7;
    const BEAM: usize = 6;
    const LEVELS: usize = 18;

    let upper: Vec<f64> = match rts {
        Rts::Crs => upper.to_vec(),
        Rts::Vrs => vec![1.0; dims],
    };

    // Beam of (value, center, half_widths).
    let mut beam: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    let push = |beam: &mut Vec<(f64, Vec<f64>, Vec<f64>)>, v: f64, c: Vec<f64>, h: Vec<f64>| {
        beam.push((v, c, h));
        beam.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        beam.truncate(BEAM);
    };

    let init_center: Vec<f64> = upper.iter().map(|u| u / 2.0).collect();
    let init_half: Vec<f64> = upper.iter().map(|u| u / 2.0).collect();
    if let Some(v) = eval(&init_center) {
        push(&mut beam, v, init_center.clone(), init_half.clone());
    }
    for s in seeds {
        let point: Vec<f64> = s[..dims].to_vec();
        if let Some(v) = eval(&point) {
            let h: Vec<f64> = upper.iter().map(|u| u / (POINTS as f64)).collect();
            push(&mut beam, v, point, h);
        }
    }
    // Ensure at least one box covers the whole region even if the center
    // was infeasible.
    if beam.is_empty() {
        beam.push((f64::INFINITY, init_center, init_half));
    }

    let mut best = f64::INFINITY;
    for _ in 0..LEVELS {
        let mut next: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        for (_, center, half) in &beam {
            let mut point = vec![0.0; dims];
            let mut index = vec![0usize; dims];
            loop {
                for d in 0..dims {
                    let lo = (center[d] - half[d]).max(0.0);
                    let hi = (center[d] + half[d]).min(upper[d]);
                    let f = index[d] as f64 / (POINTS - 1) as f64;
                    point[d] = lo + (hi - lo) * f;
                }
                if let Some(v) = eval(&point) {
                    best = best.min(v);
                    push(
                        &mut next,
                        v,
                        point.clone(),
                        half.iter().map(|h| h * 1.6 * 2.0 / (POINTS - 1) as f64).collect(),
                    );
                }
                // Advance the mixed-radix counter.
                let mut d = 0;
                loop {
                    if d == dims {
                        break;
                    }
                    index[d] += 1;
                    if index[d] < POINTS {
                        break;
                    }
                    index[d] = 0;
                    d += 1;
                }
                if d == dims {
                    break;
                }
            }
        }
        if !next.is_empty() {
            beam = next;
        }
    }
    best.is_finite().then_some(best)
}

/// Independent super-efficiency oracle over a reference that excludes the
/// DMU: beam-refined grid search (the super ratio is defined at almost
/// every lambda >= 0, so the landscape has no thin feasible slab).
pub fn super_grid_oracle(dmu: &DmuBundle, reference: &[DmuBundle], rts: Rts) -> Option<f64> {
    let data = DeaData::new(dmu, reference);
    let n = reference.len();
    let upper: Vec<f64> = (0..n)
        .map(|j| {
            let mut u: f64 = 0.0;
            for (y0, yj) in data.yg0.iter().zip(&data.ygs[j]) {
                u = u.max(y0 / yj);
            }
            (4.0 * u).max(1.0)
        })
        .collect();
    let seeds: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut s = vec![0.0; n];
            s[j] = 1.0;
            s
        })
        .collect();
    grid_minimize(&data, DeaModel::Super, rts, &upper, &seeds)
}

/// Random 4-DMU instance (2 inputs, 1 good, 1 bad) in which the last unit
/// is constructed to be weakly dominated by the third.
pub fn random_dmu_instance(rng: &mut Lcg, period: i32) -> Vec<DmuBundle> {
    let fresh = |rng: &mut Lcg, name: &str| {
        DmuBundle::new(
            name,
            period,
            vec![rng.range(0.5, 2.5), rng.range(0.5, 2.5)],
            vec![rng.range(0.5, 2.5)],
            vec![rng.range(0.5, 2.5)],
        )
        .unwrap()
    };
    let a = fresh(rng, "A");
    let b = fresh(rng, "B");
    let c = fresh(rng, "C");
    // D: weakly dominated by C, strictly worse in the first input.
    let d = DmuBundle::new(
        "D",
        period,
        vec![
            c.inputs[0] * rng.range(1.05, 1.5),
            c.inputs[1] * rng.range(1.0, 1.4),
        ],
        vec![c.good_outputs[0] * rng.range(0.7, 1.0)],
        vec![c.bad_outputs[0] * rng.range(1.0, 1.4)],
    )
    .unwrap();
    vec![a, b, c, d]
}

// ---------------------------------------------------------------------------
// LSDV oracle: least squares with explicit entity dummies, solved through
// nalgebra's QR. Slope coefficients must match the within estimator.

pub fn lsdv_slopes(
    y: &[f64],
    x: &[f64],
    p: usize,
    entity_of: &[usize],
    n_entities: usize,
) -> Vec<f64> {
    let n = y.len();
    let width = p + n_entities;
    let mut design = nalgebra::DMatrix::zeros(n, width);
    for row in 0..n {
        for j in 0..p {
            design[(row, j)] = x[row * p + j];
        }
        design[(row, p + entity_of[row])] = 1.0;
    }
    let yv = nalgebra::DVector::from_column_slice(y);
    let xtx = design.transpose() * &design;
    let xty = design.transpose() * yv;
    let coef = xtx.lu().solve(&xty).expect("full-rank LSDV design");
    (0..p).map(|j| coef[j]).collect()
}

// ---------------------------------------------------------------------------
// Synthetic panel generator: same shape as the bundled fixture, sized to
// order. Emits long-form records plus entity group labels.

pub struct SyntheticPanel {
    pub records: Vec<Record>,
    pub groups: Vec<(String, String, String)>,
}

pub fn synthetic_panel(n_entities: usize, n_periods: usize, seed: u64) -> SyntheticPanel {
    let mut rng = Lcg(seed);
    let mut records = Vec::new();
    let mut groups = Vec::new();
    for i in 0..n_entities {
        let entity = format!("C{:03}", i + 1);
        let scale = 1.0 + 0.35 * (i % 12) as f64;
        let growth = 0.01 + 0.004 * (i % 12) as f64;
        let eff0 = 0.65 + 0.05 * ((i * 5) % 7) as f64;
        for t_idx in 0..n_periods {
            let period = 2000 + t_idx as i32;
            let t = t_idx as f64;
            let u = |rng: &mut Lcg| 0.9 + 0.2 * rng.uniform();
            let k = 120.0 * scale * (1.0 + growth).powf(t) * u(&mut rng);
            let l = 11.0 * scale.powf(0.8) * (1.0 + 0.5 * growth).powf(t) * u(&mut rng);
            let e = 22.0 * scale * (1.0 - 0.004 * (i % 12) as f64).powf(t) * u(&mut rng);
            let eff = eff0 * (1.0 + 0.012 * t);
            let gdp = 3.1 * k.powf(0.35) * l.powf(0.40) * e.powf(0.25) * eff * u(&mut rng);
            let co2 = e * (0.75 + 0.025 * (i % 12) as f64) * 0.985f64.powf(t) * u(&mut rng);
            let ei = 55.0 * scale * 1.03f64.powf(t) * (0.8 + 0.4 * rng.uniform());
            let fdi = 240.0 * (rng.uniform() - 0.45) * scale;
            let popden = 70.0 + 16.0 * (i % 12) as f64 + 1.2 * t + 4.0 * rng.uniform();
            let ind = 18.0 + 11.0 * rng.uniform() + 0.3 * t;
            let slog_fdi = fdi.signum() * (1.0 + fdi.abs()).ln();
            let noise_scale = 11.0 + 0.4 * slog_fdi;
            let sign = if (t_idx + i) % 2 == 0 { 1.0 } else { -1.0 };
            let eps = sign * noise_scale * (0.9 + 0.05 * rng.uniform());
            let pm25 = (16.0 + 60.0 * co2 / gdp + eps).max(1.0);
            let tech = 9.0 * ((i % 12) as f64 + 1.0) * (1.0 + 0.05 * t) * u(&mut rng);
            let newenergy = 4.0 + 2.1 * ((i * 7) % 12) as f64 + rng.uniform();
            for (name, value) in [
                ("K", k),
                ("L", l),
                ("E", e),
                ("GDP", gdp),
                ("CO2", co2),
                ("PM25", pm25),
                ("EI", ei),
                ("FDI", fdi),
                ("POPDEN", popden),
                ("IND", ind),
                ("TECH", tech),
                ("NEWENERGY", newenergy),
            ] {
                records.push(Record::new(entity.clone(), period, name, value));
            }
        }
        let income = match (i / 3) % 4 {
            0 => "low",
            1 => "lower-middle",
            2 => "upper-middle",
            _ => "high",
        };
        let trade = if i % 2 == 0 { "importer" } else { "exporter" };
        groups.push((entity.clone(), "income".into(), income.into()));
        groups.push((entity, "trade".into(), trade.into()));
    }
    SyntheticPanel { records, groups }
}

/// Write a synthetic panel to CSV files in `dir` and return the paths.
pub fn write_synthetic_csvs(
    panel: &SyntheticPanel,
    dir: &std::path::Path,
) -> (std::path::PathBuf, std::path::PathBuf) {
    let panel_path = dir.join("panel.csv");
    let groups_path = dir.join("groups.csv");
    let mut w = csv::Writer::from_path(&panel_path).unwrap();
    w.write_record(["entity", "period", "variable", "value"]).unwrap();
    for r in &panel.records {
        w.write_record([
            r.entity.as_str(),
            &r.period.to_string(),
            r.variable.as_str(),
            &format!("{:.6}", r.value),
        ])
        .unwrap();
    }
    w.flush().unwrap();
    let mut w = csv::Writer::from_path(&groups_path).unwrap();
    w.write_record(["entity", "scheme", "label"]).unwrap();
    for (entity, scheme, label) in &panel.groups {
        w.write_record([entity, scheme, label]).unwrap();
    }
    w.flush().unwrap();
    (panel_path, groups_path)
}

/// Path to the bundled fixtures directory.
pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
