//! Small dense two-phase simplex solver with Bland's rule.
//!
//! Solves `max cᵀy` subject to `A y ≤ b`, `y ≥ 0`, where `b` may have
//! negative entries. Sized for the handful of variables and constraints that
//! come up when bounding integration polytopes.

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>, // constraint rows, last entry is the rhs
    obj: Vec<f64>,       // reduced costs (negated for maximisation), last entry is -value
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current objective row. Returns false when unbounded.
    fn optimise(&mut self, allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let entering = (0..self.ncols).find(|&j| allowed(j) && self.obj[j] < -EPS);
            let Some(c) = entering else { return true };
            let rhs = self.ncols;
            let mut best: Option<(f64, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[rhs] / row[c];
                    match best {
                        None => best = Some((ratio, i)),
                        Some((br, bi)) => {
                            if ratio < br - EPS
                                || (ratio <= br + EPS && self.basis[i] < self.basis[bi])
                            {
                                best = Some((ratio, i));
                            }
                        }
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r)) => self.pivot(r, c),
            }
        }
    }

    fn set_objective(&mut self, c: &[f64]) {
        // Row encodes z - cᵀy = 0; eliminate basic columns.
        self.obj = vec![0.0; self.ncols + 1];
        for (j, &cj) in c.iter().enumerate() {
            self.obj[j] = -cj;
        }
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            let f = self.obj[b];
            if f != 0.0 {
                for (v, rv) in self.obj.iter_mut().zip(&self.rows[i]) {
                    *v -= f * rv;
                }
            }
        }
    }
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let nv = c.len();
    let nr = a.len();
    let flipped: Vec<bool> = b.iter().map(|&bi| bi < 0.0).collect();
    let na = flipped.iter().filter(|&&f| f).count();
    let ncols = nv + nr + na;
    let mut rows = Vec::with_capacity(nr);
    let mut basis = Vec::with_capacity(nr);
    let mut art = nv + nr;
    for i in 0..nr {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for j in 0..nv {
            row[j] = sign * a[i][j];
        }
        row[nv + i] = sign;
        row[ncols] = sign * b[i];
        if flipped[i] {
            row[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(nv + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis,
        ncols,
    };
    let is_art = |j: usize| j >= nv + nr;

    if na > 0 {
        let mut phase1 = vec![0.0; ncols];
        for (j, p) in phase1.iter_mut().enumerate() {
            if is_art(j) {
                *p = -1.0;
            }
        }
        t.set_objective(&phase1);
        t.optimise(&|_| true);
        let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if t.obj[ncols] < -1e-9 * scale {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..t.rows.len() {
            if is_art(t.basis[r]) {
                if let Some(c) = (0..nv + nr).find(|&j| t.rows[r][j].abs() > EPS) {
                    t.pivot(r, c);
                }
            }
        }
    }
    let mut full_c = vec![0.0; ncols];
    full_c[..nv].copy_from_slice(c);
    t.set_objective(&full_c);
    if !t.optimise(&|j| !is_art(j)) {
        return LpOutcome::Unbounded;
    }
    let mut point = vec![0.0; nv];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < nv {
            point[bv] = t.rows[r][ncols];
        }
    }
    let value = c.iter().zip(&point).map(|(x, y)| x * y).sum();
    LpOutcome::Optimal { value, point }
}
