//! Small dense two-phase simplex (Bland's rule) for the separation problems
//! in [`crate::regions`]. Sized for a few thousand constraints at most.

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

/// One two-sided row `lower ≤ coeffs · x ≤ upper` over free variables.
#[derive(Clone, Debug)]
pub struct BoundedRow {
    pub coeffs: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations over columns `< allowed`; returns false on
    /// unboundedness.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.obj[j] < -PIVOT_EPS) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-15
                                || (ratio <= br + 1e-15 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }

    fn set_objective(&mut self, costs: &[f64]) {
        self.obj = vec![0.0; self.width + 1];
        self.obj[..costs.len()].copy_from_slice(costs);
        for i in 0..self.rows.len() {
            let cb = self.obj[self.basis[i]];
            if cb != 0.0 {
                let row = self.rows[i].clone();
                for (v, rv) in self.obj.iter_mut().zip(&row) {
                    *v -= cb * rv;
                }
            }
        }
    }
}

/// Minimizes `c · x` subject to `a x ≤ b`, `x ≥ 0`.
pub fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let needs_art: Vec<bool> = b.iter().map(|&bi| bi < 0.0).collect();
    let k = needs_art.iter().filter(|&&x| x).count();
    let width = n + m + k;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        let sign = if needs_art[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = sign;
        row[width] = sign * b[i];
        if needs_art[i] {
            row[n + m + art] = 1.0;
            basis.push(n + m + art);
            art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis,
        width,
    };

    if k > 0 {
        let mut phase1 = vec![0.0; width];
        for v in phase1.iter_mut().skip(n + m) {
            *v = 1.0;
        }
        t.set_objective(&phase1);
        t.optimize(width);
        if -t.obj[width] > FEAS_EPS {
            return LpOutcome::Infeasible;
        }
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(col) = (0..n + m).find(|&j| t.rows[i][j].abs() > PIVOT_EPS) {
                    t.pivot(i, col);
                }
            }
        }
    }

    t.set_objective(c);
    if !t.optimize(n + m) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.rhs(i);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, objective }
}

/// Finds a point of `{x : lower_i ≤ coeffs_i · x ≤ upper_i}` over free
/// variables, or `None` when the system is infeasible.
pub fn feasible_point(rows: &[BoundedRow], nvars: usize) -> Option<Vec<f64>> {
    // x = p - q with p, q ≥ 0
    let mut a = Vec::with_capacity(2 * rows.len());
    let mut b = Vec::with_capacity(2 * rows.len());
    for r in rows {
        let mut up = Vec::with_capacity(2 * nvars);
        up.extend(r.coeffs.iter().copied());
        up.extend(r.coeffs.iter().map(|v| -v));
        a.push(up.clone());
        b.push(r.upper);
        a.push(up.iter().map(|v| -v).collect());
        b.push(-r.lower);
    }
    match solve(&vec![0.0; 2 * nvars], &a, &b) {
        LpOutcome::Optimal { x, .. } => Some((0..nvars).map(|j| x[j] - x[nvars + j]).collect()),
        _ => None,
    }
}
