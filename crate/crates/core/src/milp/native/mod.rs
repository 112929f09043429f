//! Native LP and MILP solver.

mod simplex;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use simplex::{solve_standard, StandardForm};

use super::model::{MixedIntegerProgram, Sense};
use super::{relative_gap, SolveOptions, SolveStatus, SolverSolution, INT_TOL};

/// Solves the LP relaxation of `lp` (integrality flags are ignored).
pub fn solve_lp(lp: &MixedIntegerProgram, opts: &SolveOptions) -> SolverSolution {
    let sf = StandardForm::new(lp);
    solve_standard(&sf, opts.iteration_limit)
}

struct Node {
    /// Internal minimization bound inherited from the parent relaxation.
    bound: f64,
    seq: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap pops the greatest element: smallest bound, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Best-first branch-and-bound on the most fractional column.
pub fn solve_mip(mip: &MixedIntegerProgram, opts: &SolveOptions) -> SolverSolution {
    let mut sf = StandardForm::new(mip);
    let sign = match mip.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let int_cols: Vec<usize> = (0..mip.num_vars()).filter(|&j| mip.vars[j].integer).collect();
    for &j in &int_cols {
        sf.lower[j] = sf.lower[j].ceil();
        sf.upper[j] = sf.upper[j].floor();
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        lower: sf.lower.clone(),
        upper: sf.upper.clone(),
    });
    let mut seq = 1u64;
    // internal (minimization) incumbent
    let mut inc_val = f64::INFINITY;
    let mut inc_x: Vec<f64> = Vec::new();
    let mut nodes = 0u64;
    let mut iterations = 0u64;
    let mut stopped_early = false;
    let mut limit_hit = false;
    let mut open_bound = f64::NEG_INFINITY;

    while let Some(node) = heap.pop() {
        if node.bound >= inc_val - 1e-9 * inc_val.abs().max(1.0) {
            continue;
        }
        if inc_val.is_finite() {
            let gap = (inc_val - node.bound).max(0.0)
                / (sign * inc_val + mip.objective_offset).abs().max(1.0);
            if gap <= opts.rel_gap {
                open_bound = node.bound;
                stopped_early = true;
                break;
            }
        }
        if nodes as usize >= opts.node_limit {
            open_bound = node.bound;
            limit_hit = true;
            break;
        }
        nodes += 1;
        sf.lower.clone_from(&node.lower);
        sf.upper.clone_from(&node.upper);
        let sol = solve_standard(&sf, opts.iteration_limit);
        iterations += sol.iterations;
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => continue,
            status => {
                let mut out = SolverSolution::without_solution(status, mip.sense);
                out.nodes = nodes;
                out.iterations = iterations;
                return out;
            }
        }
        let val = sign * (sol.objective - mip.objective_offset);
        if val >= inc_val - 1e-9 * inc_val.abs().max(1.0) {
            continue;
        }
        let mut branch: Option<(usize, f64)> = None;
        let mut best_frac = 0.0;
        for &j in &int_cols {
            let v = sol.x[j];
            let f = (v - v.floor()).min(v.ceil() - v);
            if f > INT_TOL && f > best_frac + 1e-12 {
                best_frac = f;
                branch = Some((j, v));
            }
        }
        match branch {
            None => {
                inc_val = val;
                let mut x = sol.x;
                for &j in &int_cols {
                    x[j] = x[j].round();
                }
                inc_x = x;
            }
            Some((j, v)) => {
                let mut down_upper = node.upper.clone();
                down_upper[j] = v.floor();
                heap.push(Node {
                    bound: val,
                    seq,
                    lower: node.lower.clone(),
                    upper: down_upper,
                });
                seq += 1;
                let mut up_lower = node.lower;
                up_lower[j] = v.ceil();
                heap.push(Node {
                    bound: val,
                    seq,
                    lower: up_lower,
                    upper: node.upper,
                });
                seq += 1;
            }
        }
    }
    if inc_x.is_empty() {
        let status = if limit_hit {
            SolveStatus::IterationLimit
        } else {
            SolveStatus::Infeasible
        };
        let mut out = SolverSolution::without_solution(status, mip.sense);
        out.nodes = nodes;
        out.iterations = iterations;
        return out;
    }
    let remaining = heap
        .iter()
        .map(|n| n.bound)
        .fold(f64::INFINITY, f64::min);
    let internal_bound = if stopped_early || limit_hit {
        open_bound.min(remaining).min(inc_val)
    } else {
        inc_val
    };
    let objective = sign * inc_val + mip.objective_offset;
    let bound = if internal_bound.is_finite() {
        sign * internal_bound + mip.objective_offset
    } else {
        sign * f64::NEG_INFINITY
    };
    let gap = relative_gap(mip.sense, objective, bound);
    let status = if limit_hit {
        SolveStatus::IterationLimit
    } else if gap <= 1e-12 {
        SolveStatus::Optimal
    } else {
        SolveStatus::GapReached
    };
    SolverSolution {
        status,
        objective,
        bound,
        x: inc_x,
        duals: None,
        relative_gap: gap,
        nodes,
        iterations,
    }
}
