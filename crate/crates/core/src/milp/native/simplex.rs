//! Dense bounded revised simplex.
//!
//! Every row `r` gets a logical column `w_r = a_r·x` whose bounds encode the
//! row relation, so the working system is `A x − w = 0` with bounds on every
//! column. Rows that the starting point violates get an artificial column;
//! phase 1 drives the artificials to zero. The basis inverse is kept
//! explicitly and refactorized every [`REFACTOR_EVERY`] pivots.
//!
//! Pricing is Dantzig's rule; after [`DEGENERATE_STREAK`] consecutive
//! degenerate pivots the solver switches to Bland's rule (lowest eligible
//! index enters, lowest index leaves on ties) until a pivot makes progress.

use crate::milp::model::{MixedIntegerProgram, Relation, Sense};
use crate::milp::{SolveStatus, SolverSolution, FEAS_TOL};

const REFACTOR_EVERY: usize = 50;
const DEGENERATE_STREAK: usize = 30;
const DJ_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const BIG: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColState {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free column sitting at zero.
    Zero,
}

/// A program in working form, reusable across branch-and-bound nodes.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    n: usize,
    m: usize,
    /// Sparse columns of the structural part, indexed by row.
    cols: Vec<Vec<(usize, f64)>>,
    pub(crate) lower: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    /// Internal minimization costs (negated for maximize programs).
    cost: Vec<f64>,
    sign: f64,
    offset: f64,
}

impl StandardForm {
    pub(crate) fn new(p: &MixedIntegerProgram) -> Self {
        let n = p.num_vars();
        let m = p.num_rows();
        let mut cols = vec![Vec::new(); n];
        let mut row_lower = Vec::with_capacity(m);
        let mut row_upper = Vec::with_capacity(m);
        for (r, row) in p.rows.iter().enumerate() {
            for &(v, a) in &row.coeffs {
                cols[v.0].push((r, a));
            }
            let (lo, hi) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            row_lower.push(lo);
            row_upper.push(hi);
        }
        // merge duplicate entries within a column
        for c in &mut cols {
            c.sort_by_key(|&(r, _)| r);
            c.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        StandardForm {
            n,
            m,
            cols,
            lower: p.vars.iter().map(|v| v.lower).collect(),
            upper: p.vars.iter().map(|v| v.upper).collect(),
            row_lower,
            row_upper,
            cost: p.vars.iter().map(|v| sign * v.cost).collect(),
            sign,
            offset: p.objective_offset,
        }
    }
}

struct Work<'a> {
    sf: &'a StandardForm,
    m: usize,
    ncols: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Artificial column signs (0 when the row has no artificial).
    art_sign: Vec<f64>,
    x: Vec<f64>,
    state: Vec<ColState>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    iterations: usize,
    iteration_limit: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl<'a> Work<'a> {
    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let (n, m) = (self.sf.n, self.m);
        if j < n {
            out.extend_from_slice(&self.sf.cols[j]);
        } else if j < n + m {
            out.push((j - n, -1.0));
        } else {
            out.push((j - n - m, self.art_sign[j - n - m]));
        }
    }

    fn setup(sf: &'a StandardForm, iteration_limit: usize) -> Self {
        let (n, m) = (sf.n, sf.m);
        let ncols = n + 2 * m;
        let mut lower = sf.lower.clone();
        let mut upper = sf.upper.clone();
        lower.extend_from_slice(&sf.row_lower);
        upper.extend_from_slice(&sf.row_upper);
        lower.extend(std::iter::repeat(0.0).take(m));
        upper.extend(std::iter::repeat(0.0).take(m));

        let mut x = vec![0.0; ncols];
        let mut state = vec![ColState::Lower; ncols];
        for j in 0..n {
            let (lo, hi) = (lower[j], upper[j]);
            if lo.is_finite() {
                x[j] = lo;
                state[j] = ColState::Lower;
            } else if hi.is_finite() {
                x[j] = hi;
                state[j] = ColState::Upper;
            } else {
                x[j] = 0.0;
                state[j] = ColState::Zero;
            }
        }
        let mut activity = vec![0.0; m];
        for j in 0..n {
            if x[j] != 0.0 {
                for &(r, a) in &sf.cols[j] {
                    activity[r] += a * x[j];
                }
            }
        }
        let mut art_sign = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            let w = n + r;
            let art = n + m + r;
            let act = activity[r];
            let (lo, hi) = (lower[w], upper[w]);
            if act >= lo - FEAS_TOL && act <= hi + FEAS_TOL {
                basis[r] = w;
                state[w] = ColState::Basic;
                x[w] = act;
                binv[r * m + r] = -1.0;
                state[art] = ColState::Lower;
            } else {
                let target = if act < lo { lo } else { hi };
                x[w] = target;
                state[w] = if act < lo { ColState::Lower } else { ColState::Upper };
                // a·x − w + σ·art = 0  ⇒  art = (w − a·x)/σ
                let sigma = if target - act >= 0.0 { 1.0 } else { -1.0 };
                art_sign[r] = sigma;
                x[art] = (target - act) / sigma;
                upper[art] = f64::INFINITY;
                basis[r] = art;
                state[art] = ColState::Basic;
                binv[r * m + r] = 1.0 / sigma;
            }
        }
        Work {
            sf,
            m,
            ncols,
            lower,
            upper,
            art_sign,
            x,
            state,
            basis,
            binv,
            iterations: 0,
            iteration_limit,
        }
    }

    fn cost_of(&self, j: usize, phase1: bool) -> f64 {
        let (n, m) = (self.sf.n, self.m);
        if phase1 {
            if j >= n + m {
                1.0
            } else {
                0.0
            }
        } else if j < n {
            self.sf.cost[j]
        } else {
            0.0
        }
    }

    fn duals(&self, phase1: bool) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = self.cost_of(self.basis[i], phase1);
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += cb * row[k];
                }
            }
        }
        y
    }

    fn refactor(&mut self) -> bool {
        let m = self.m;
        if m == 0 {
            return true;
        }
        // dense basis matrix B (column i = column of basis[i])
        let mut b = vec![0.0; m * m];
        let mut col = Vec::new();
        for i in 0..m {
            self.column(self.basis[i], &mut col);
            for &(r, a) in &col {
                b[r * m + i] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        // Gauss-Jordan with partial pivoting
        for c in 0..m {
            let mut piv = c;
            let mut best = b[c * m + c].abs();
            for r in (c + 1)..m {
                let v = b[r * m + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-12 {
                return false;
            }
            if piv != c {
                for k in 0..m {
                    b.swap(c * m + k, piv * m + k);
                    inv.swap(c * m + k, piv * m + k);
                }
            }
            let d = b[c * m + c];
            for k in 0..m {
                b[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = b[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            b[r * m + k] -= f * b[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        // recompute basic values: B x_B = −N x_N
        let mut rhs = vec![0.0; m];
        for j in 0..self.ncols {
            if self.state[j] != ColState::Basic && self.x[j] != 0.0 {
                self.column(j, &mut col);
                for &(r, a) in &col {
                    rhs[r] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x[self.basis[i]] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
        true
    }

    fn run(&mut self, phase1: bool) -> Outcome {
        let m = self.m;
        let mut col = Vec::new();
        let mut alpha = vec![0.0; m];
        let mut degenerate = 0usize;
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= self.iteration_limit {
                return Outcome::IterationLimit;
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let y = self.duals(phase1);

            // pricing
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ncols {
                let st = self.state[j];
                if st == ColState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                self.column(j, &mut col);
                let dj = self.cost_of(j, phase1) - col.iter().map(|&(r, a)| y[r] * a).sum::<f64>();
                let dir = match st {
                    ColState::Lower if dj < -DJ_TOL => 1.0,
                    ColState::Upper if dj > DJ_TOL => -1.0,
                    ColState::Zero if dj.abs() > DJ_TOL => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return Outcome::Optimal;
            };

            // alpha = B^-1 a_q
            self.column(q, &mut col);
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                alpha[i] = col.iter().map(|&(r, a)| row[r] * a).sum();
            }

            // ratio test
            let mut step = f64::INFINITY;
            let mut leave: Option<usize> = None;
            let (lq, uq) = (self.lower[q], self.upper[q]);
            if lq.is_finite() && uq.is_finite() {
                step = uq - lq;
            }
            for i in 0..m {
                let rate = -dir * alpha[i];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let bi = self.basis[i];
                let xb = self.x[bi];
                let lim = if rate < 0.0 {
                    let lo = self.lower[bi];
                    if !lo.is_finite() {
                        continue;
                    }
                    ((xb - lo) / -rate).max(0.0)
                } else {
                    let hi = self.upper[bi];
                    if !hi.is_finite() {
                        continue;
                    }
                    ((hi - xb) / rate).max(0.0)
                };
                let better = match leave {
                    _ if lim < step - 1e-12 => true,
                    Some(l) if (lim - step).abs() <= 1e-12 => {
                        if bland {
                            bi < self.basis[l]
                        } else {
                            alpha[i].abs() > alpha[l].abs()
                        }
                    }
                    None if (lim - step).abs() <= 1e-12 => true,
                    _ => false,
                };
                if better {
                    step = lim;
                    leave = Some(i);
                }
            }
            if !step.is_finite() || step > BIG {
                return Outcome::Unbounded;
            }
            self.iterations += 1;
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            // update values
            self.x[q] += dir * step;
            for i in 0..m {
                let bi = self.basis[i];
                self.x[bi] -= dir * alpha[i] * step;
            }
            match leave {
                None => {
                    // bound flip of the entering column
                    if dir > 0.0 {
                        self.x[q] = uq;
                        self.state[q] = ColState::Upper;
                    } else {
                        self.x[q] = lq;
                        self.state[q] = ColState::Lower;
                    }
                }
                Some(r) => {
                    let out = self.basis[r];
                    let rate = -dir * alpha[r];
                    if rate < 0.0 {
                        self.x[out] = self.lower[out];
                        self.state[out] = ColState::Lower;
                    } else {
                        self.x[out] = self.upper[out];
                        self.state[out] = ColState::Upper;
                    }
                    let piv = alpha[r];
                    {
                        let (head, tail) = self.binv.split_at_mut(r * m);
                        let (prow, rest) = tail.split_at_mut(m);
                        for v in prow.iter_mut() {
                            *v /= piv;
                        }
                        for i in 0..r {
                            let f = alpha[i];
                            if f != 0.0 {
                                let row = &mut head[i * m..(i + 1) * m];
                                for k in 0..m {
                                    row[k] -= f * prow[k];
                                }
                            }
                        }
                        for i in (r + 1)..m {
                            let f = alpha[i];
                            if f != 0.0 {
                                let off = (i - r - 1) * m;
                                let row = &mut rest[off..off + m];
                                for k in 0..m {
                                    row[k] -= f * prow[k];
                                }
                            }
                        }
                    }
                    self.basis[r] = q;
                    self.state[q] = ColState::Basic;
                    since_refactor += 1;
                    if since_refactor >= REFACTOR_EVERY {
                        since_refactor = 0;
                        if !self.refactor() {
                            // numerically singular basis: fall back to Bland and continue
                            degenerate = DEGENERATE_STREAK;
                        }
                    }
                }
            }
        }
    }
}

/// Solves the LP described by `sf` (integrality ignored).
pub(crate) fn solve_standard(sf: &StandardForm, iteration_limit: usize) -> SolverSolution {
    let (n, m) = (sf.n, sf.m);
    let sense = if sf.sign > 0.0 {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    for j in 0..n {
        if sf.lower[j] > sf.upper[j] + FEAS_TOL {
            return SolverSolution::without_solution(SolveStatus::Infeasible, sense);
        }
    }
    let mut w = Work::setup(sf, iteration_limit);

    let needs_phase1 = w.art_sign.iter().any(|&s| s != 0.0);
    if needs_phase1 {
        match w.run(true) {
            Outcome::IterationLimit => {
                let mut s = SolverSolution::without_solution(SolveStatus::IterationLimit, sense);
                s.iterations = w.iterations as u64;
                return s;
            }
            Outcome::Unbounded => unreachable!("phase 1 objective is bounded below by zero"),
            Outcome::Optimal => {}
        }
        w.refactor();
        let infeas: f64 = (n + m..n + 2 * m).map(|j| w.x[j].abs()).sum();
        if infeas > FEAS_TOL * (1.0 + m as f64).sqrt() {
            let mut s = SolverSolution::without_solution(SolveStatus::Infeasible, sense);
            s.iterations = w.iterations as u64;
            return s;
        }
        for j in n + m..n + 2 * m {
            w.lower[j] = 0.0;
            w.upper[j] = 0.0;
            if w.state[j] != ColState::Basic {
                w.x[j] = 0.0;
                w.state[j] = ColState::Lower;
            }
        }
    }
    let outcome = w.run(false);
    w.refactor();
    let iterations = w.iterations as u64;
    match outcome {
        Outcome::IterationLimit => {
            let mut s = SolverSolution::without_solution(SolveStatus::IterationLimit, sense);
            s.iterations = iterations;
            return s;
        }
        Outcome::Unbounded => {
            let mut s = SolverSolution::without_solution(SolveStatus::Unbounded, sense);
            s.iterations = iterations;
            return s;
        }
        Outcome::Optimal => {}
    }
    let mut x: Vec<f64> = w.x[..n].to_vec();
    for j in 0..n {
        x[j] = x[j].clamp(sf.lower[j], sf.upper[j]);
    }
    let internal: f64 = (0..n).map(|j| sf.cost[j] * x[j]).sum();
    let objective = sf.sign * internal + sf.offset;
    let y = w.duals(false);
    let duals: Vec<f64> = y.iter().map(|&v| sf.sign * v).collect();
    SolverSolution {
        status: SolveStatus::Optimal,
        objective,
        bound: objective,
        x,
        duals: Some(duals),
        relative_gap: 0.0,
        nodes: 0,
        iterations,
    }
}
