//! Dense two-phase tableau simplex with Bland's rule.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
/// Pivot-growth estimate above which the basis is treated as singular.
const CONDITION_LIMIT: f64 = 1e13;

/// `maximize c^T x` subject to `A x <= b` and optional per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Rows of `A` satisfied with equality at `x`.
    pub active_rows: Vec<usize>,
}

impl LpProblem {
    /// All variables nonnegative and unbounded above.
    pub fn new(c: Vec<f64>) -> Self {
        let n = c.len();
        LpProblem {
            c,
            a: Vec::new(),
            b: Vec::new(),
            lower: vec![Some(0.0); n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.a.push(row);
        self.b.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.lower.len().min(self.upper.len()),
            });
        }
        if self.a.len() != self.b.len() {
            return Err(Error::LengthMismatch {
                expected: self.a.len(),
                got: self.b.len(),
            });
        }
        if let Some(row) = self.a.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: row.len(),
            });
        }
        let finite = self.c.iter().chain(self.b.iter()).chain(self.a.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite LP data".into()));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if let (Some(l), Some(u)) = (l, u) {
                if l > u {
                    return Err(Error::LpInfeasible);
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.check()?;
        let std = Standardized::new(self);
        let y = solve_standard(&std.c, &std.a, &std.b)?;
        let x = std.recover(&y);
        let objective = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
        let active_rows = self
            .a
            .iter()
            .zip(&self.b)
            .enumerate()
            .filter(|(_, (row, &b))| {
                let lhs: f64 = row.iter().zip(&x).map(|(a, x)| a * x).sum();
                (lhs - b).abs() <= 1e-7 * (1.0 + b.abs())
            })
            .map(|(i, _)| i)
            .collect();
        Ok(LpSolution {
            x,
            objective,
            active_rows,
        })
    }
}

/// How an original variable maps to nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum Map {
    /// `x = shift + y`
    Shift(usize, f64),
    /// `x = shift - y`
    Flip(usize, f64),
    /// `x = y+ - y-`
    Split(usize, usize),
}

struct Standardized {
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    maps: Vec<Map>,
}

impl Standardized {
    fn new(lp: &LpProblem) -> Self {
        let mut maps = Vec::with_capacity(lp.num_vars());
        let mut cols = 0;
        for (l, u) in lp.lower.iter().zip(&lp.upper) {
            let m = match (*l, *u) {
                (Some(l), _) => Map::Shift(cols, l),
                (None, Some(u)) => Map::Flip(cols, u),
                (None, None) => {
                    cols += 1;
                    Map::Split(cols - 1, cols)
                }
            };
            cols += 1;
            maps.push(m);
        }
        let transform = |row: &[f64]| -> (Vec<f64>, f64) {
            let mut out = vec![0.0; cols];
            let mut constant = 0.0;
            for (&v, m) in row.iter().zip(&maps) {
                match *m {
                    Map::Shift(k, s) => {
                        out[k] += v;
                        constant += v * s;
                    }
                    Map::Flip(k, s) => {
                        out[k] -= v;
                        constant += v * s;
                    }
                    Map::Split(p, q) => {
                        out[p] += v;
                        out[q] -= v;
                    }
                }
            }
            (out, constant)
        };
        let (c, _) = transform(&lp.c);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (row, &rhs) in lp.a.iter().zip(&lp.b) {
            let (r, k) = transform(row);
            a.push(r);
            b.push(rhs - k);
        }
        for (var, (l, u)) in lp.lower.iter().zip(&lp.upper).enumerate() {
            if let (Some(l), Some(u)) = (l, u) {
                if let Map::Shift(k, _) = maps[var] {
                    let mut r = vec![0.0; cols];
                    r[k] = 1.0;
                    a.push(r);
                    b.push(u - l);
                }
            }
        }
        Standardized { c, a, b, maps }
    }

    fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                Map::Shift(k, s) => s + y[k],
                Map::Flip(k, s) => s - y[k],
                Map::Split(p, q) => y[p] - y[q],
            })
            .collect()
    }
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    min_pivot: f64,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.t[r][col];
        self.min_pivot = self.min_pivot.min(p.abs());
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        self.basis[r] = col;
    }

    fn condition_estimate(&self) -> f64 {
        let max = self
            .t
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        max / self.min_pivot.max(f64::MIN_POSITIVE)
    }

    /// Maximizes `obj . y` over the columns in `allowed`, starting from the
    /// current basic feasible solution. Bland's rule: lowest-index entering
    /// column with positive reduced gain, lowest basis index among ratio ties.
    fn optimize(&mut self, obj: &[f64], allowed: usize) -> Result<()> {
        loop {
            let reduced = |j: usize| -> f64 {
                obj[j] - self.basis.iter().zip(&self.t).map(|(&b, row)| obj[b] * row[j]).sum::<f64>()
            };
            let entering = (0..allowed).find(|&j| !self.basis.contains(&j) && reduced(j) > PIVOT_TOL);
            let Some(col) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_TOL {
                    let ratio = row[self.cols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12
                                || ((ratio - best).abs() <= 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(Error::LpUnbounded) };
            self.pivot(r, col);
            let cond = self.condition_estimate();
            if cond > CONDITION_LIMIT {
                return Err(Error::SingularBasis { condition: cond });
            }
        }
    }
}

/// `maximize c.y` s.t. `A y <= b`, `y >= 0`.
fn solve_standard(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = c.len();
    let m = a.len();
    // columns: n structural, m slacks, then one artificial per negative row
    let negatives: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negatives.len();
    let cols = n + m + n_art;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = sign;
        t[i][cols] = sign * b[i];
        if sign < 0.0 {
            t[i][n + m + art] = 1.0;
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau {
        t,
        basis,
        cols,
        min_pivot: 1.0,
    };
    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for v in &mut phase1[n + m..] {
            *v = -1.0;
        }
        tab.optimize(&phase1, cols)?;
        let infeasibility: f64 = tab
            .basis
            .iter()
            .zip(&tab.t)
            .filter(|(&b, _)| b >= n + m)
            .map(|(_, row)| row[cols])
            .sum();
        if infeasibility > 1e-7 * (1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
            return Err(Error::LpInfeasible);
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..m {
            if tab.basis[r] >= n + m {
                if let Some(col) = (0..n + m).find(|&j| tab.t[r][j].abs() > PIVOT_TOL) {
                    tab.pivot(r, col);
                }
            }
        }
        let (keep_t, keep_b): (Vec<_>, Vec<_>) = tab
            .t
            .into_iter()
            .zip(tab.basis)
            .filter(|(_, b)| *b < n + m)
            .unzip();
        tab.t = keep_t;
        tab.basis = keep_b;
    }
    let mut obj = vec![0.0; cols];
    obj[..n].copy_from_slice(c);
    tab.optimize(&obj, n + m)?;
    let mut y = vec![0.0; n];
    for (&bv, row) in tab.basis.iter().zip(&tab.t) {
        if bv < n {
            y[bv] = row[cols].max(0.0);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_variable_two_caps() {
        let mut lp = LpProblem::new(vec![1.0]);
        lp.add_le(vec![1.0], 3.0);
        lp.add_le(vec![1.0], 5.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert_eq!(s.active_rows, vec![0]);
    }

    #[test]
    fn classic_two_variable() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LpProblem::new(vec![3.0, 5.0]);
        lp.add_le(vec![1.0, 0.0], 4.0);
        lp.add_le(vec![0.0, 2.0], 12.0);
        lp.add_le(vec![3.0, 2.0], 18.0);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!((s.objective - 36.0).abs() < 1e-9);
    }

    #[test]
    fn ge_rows_need_phase_one() {
        // max -x - y, x + y >= 2, x >= 0.5
        let mut lp = LpProblem::new(vec![-1.0, -1.0]);
        lp.add_ge(vec![1.0, 1.0], 2.0);
        lp.add_ge(vec![1.0, 0.0], 0.5);
        let s = lp.solve().unwrap();
        assert!((s.objective + 2.0).abs() < 1e-9);
    }

    #[test]
    fn free_and_flipped_variables() {
        // max -x, x free, x >= -3 written as a row
        let mut lp = LpProblem::new(vec![-1.0]);
        lp.set_bounds(0, None, None);
        lp.add_ge(vec![1.0], -3.0);
        assert!((lp.solve().unwrap().x[0] + 3.0).abs() < 1e-9);
        let mut lp = LpProblem::new(vec![1.0]);
        lp.set_bounds(0, None, Some(-2.0));
        assert!((lp.solve().unwrap().x[0] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpProblem::new(vec![1.0]);
        lp.add_le(vec![1.0], 1.0);
        lp.add_ge(vec![1.0], 2.0);
        assert!(matches!(lp.solve(), Err(Error::LpInfeasible)));
        let lp = LpProblem::new(vec![1.0]);
        assert!(matches!(lp.solve(), Err(Error::LpUnbounded)));
    }

    #[test]
    fn degenerate_does_not_cycle() {
        // Beale's cycling example
        let mut lp = LpProblem::new(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0);
        lp.add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0);
        lp.add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.05).abs() < 1e-9);
    }

    /// Best objective over all vertices formed by `n` tight constraints.
    fn vertex_oracle(lp: &LpProblem) -> Option<f64> {
        let n = lp.num_vars();
        let mut rows: Vec<(Vec<f64>, f64)> = lp.a.iter().cloned().zip(lp.b.iter().copied()).collect();
        for v in 0..n {
            let mut e = vec![0.0; n];
            e[v] = 1.0;
            if let Some(u) = lp.upper[v] {
                rows.push((e.clone(), u));
            }
            if let Some(l) = lp.lower[v] {
                rows.push((e.iter().map(|x| -x).collect(), -l));
            }
        }
        let feasible = |x: &[f64]| {
            rows.iter()
                .all(|(r, b)| r.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() <= b + 1e-7)
        };
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn rec(
            start: usize,
            depth: usize,
            pick: &mut Vec<usize>,
            rows: &[(Vec<f64>, f64)],
            f: &mut dyn FnMut(&[usize]),
        ) {
            if depth == pick.len() {
                f(pick);
                return;
            }
            for k in start..rows.len() {
                pick[depth] = k;
                rec(k + 1, depth + 1, pick, rows, f);
            }
        }
        let mut visit = |sel: &[usize]| {
            let mut m: Vec<Vec<f64>> = sel
                .iter()
                .map(|&k| {
                    let mut r = rows[k].0.clone();
                    r.push(rows[k].1);
                    r
                })
                .collect();
            // Gaussian elimination with partial pivoting
            for col in 0..n {
                let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
                if m[p][col].abs() < 1e-10 {
                    return;
                }
                m.swap(col, p);
                for i in 0..n {
                    if i != col {
                        let f = m[i][col] / m[col][col];
                        let pivot_row = m[col].clone();
                        for (v, pr) in m[i].iter_mut().zip(&pivot_row) {
                            *v -= f * pr;
                        }
                    }
                }
            }
            let x: Vec<f64> = (0..n).map(|i| m[i][n] / m[i][i]).collect();
            if feasible(&x) {
                let obj: f64 = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(obj, |b: f64| b.max(obj)));
            }
        };
        rec(0, 0, &mut pick, &rows, &mut visit);
        best
    }

    fn arb_lp() -> impl Strategy<Value = LpProblem> {
        (1usize..=6, 1usize..=15).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(-5.0f64..5.0, n),
                proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, n), m),
                proptest::collection::vec(-3.0f64..3.0, n),
                proptest::collection::vec(0.0f64..4.0, m),
                proptest::collection::vec(0u8..3, n),
            )
                .prop_map(|(c, a, x0, slack, kinds)| {
                    // every LP is feasible at x0 and boxed, hence bounded
                    let b = a
                        .iter()
                        .zip(&slack)
                        .map(|(r, s)| r.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>() + s)
                        .collect();
                    let (lower, upper) = kinds
                        .iter()
                        .zip(&x0)
                        .map(|(k, &x)| match k {
                            0 => (Some(x.min(0.0) - 1.0), Some(x.max(0.0) + 4.0)),
                            1 => (Some(-6.0), Some(6.0)),
                            _ => (Some(x.floor() - 2.0), Some(x.ceil() + 1.0)),
                        })
                        .unzip();
                    LpProblem { c, a, b, lower, upper }
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn matches_vertex_enumeration(lp in arb_lp()) {
            let s = lp.solve().unwrap();
            let oracle = vertex_oracle(&lp).unwrap();
            prop_assert!((s.objective - oracle).abs() < 1e-7 * (1.0 + oracle.abs()),
                "simplex {} vs oracle {}", s.objective, oracle);
        }
    }
}
