use std::num::NonZeroU32;

use highs::{HessianFormat, HighsModelStatus, HighsSolutionStatus, RowProblem};

use super::model::{MixedIntegerProgram, Relation, Sense};
use super::{relative_gap, SolveOptions, SolveStatus, SolverSolution};
use crate::error::Result;

/// Solves `mip` with HiGHS. The program is always passed as a minimization;
/// maximization objectives are negated on the way in and out.
pub(crate) fn solve(mip: &MixedIntegerProgram, opts: &SolveOptions) -> Result<SolverSolution> {
    let sign = match mip.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    if mip.num_vars() == 0 {
        let infeasible = mip.rows.iter().any(|r| r.violation(&[]) > super::FEAS_TOL);
        if infeasible {
            return Ok(SolverSolution::without_solution(SolveStatus::Infeasible, mip.sense));
        }
        return Ok(SolverSolution {
            status: SolveStatus::Optimal,
            objective: mip.objective_offset,
            bound: mip.objective_offset,
            x: Vec::new(),
            duals: Some(vec![0.0; mip.num_rows()]),
            relative_gap: 0.0,
            nodes: 0,
            iterations: 0,
        });
    }

    let mut pb = RowProblem::new();
    let cols: Vec<_> = mip
        .vars
        .iter()
        .map(|v| pb.add_column_with_integrality(sign * v.cost, v.lower..=v.upper, v.integer))
        .collect();
    for row in &mip.rows {
        let factors: Vec<_> = row.coeffs.iter().map(|&(v, a)| (cols[v.0], a)).collect();
        match row.relation {
            Relation::Le => pb.add_row(..=row.rhs, factors),
            Relation::Ge => pb.add_row(row.rhs.., factors),
            Relation::Eq => pb.add_row(row.rhs..=row.rhs, factors),
        }
    }
    let mut model = pb.optimise(highs::Sense::Minimise);
    if std::env::var_os("PSES_HIGHS_LOG").is_none() {
        model.make_quiet();
    }
    model.set_threads(NonZeroU32::new(1).unwrap());
    model.set_option("random_seed", 0);
    model.set_option("mip_rel_gap", opts.rel_gap);
    model.set_option("mip_abs_gap", 1e-9);
    model.set_option("mip_feasibility_tolerance", 1e-8);
    model.set_option("mip_max_nodes", opts.node_limit.min(i32::MAX as usize) as i32);
    if let Some(t) = opts.time_limit {
        model.set_option("time_limit", t);
    }
    if !mip.quadratic.is_empty() {
        let mut diag = vec![0.0; mip.num_vars()];
        for &(v, q) in &mip.quadratic {
            diag[v.0] += sign * q;
        }
        let columns: Vec<Vec<(usize, f64)>> = diag
            .iter()
            .enumerate()
            .map(|(j, &q)| if q != 0.0 { vec![(j, q)] } else { Vec::new() })
            .collect();
        model.pass_hessian(HessianFormat::Triangular, columns);
    }
    let solved = model.solve();
    let status = solved.status();
    let nodes = solved.int_info_value(c"mip_node_count").unwrap_or(0).max(0) as u64;
    let iterations = solved.simplex_iteration_count().max(0) as u64;
    let has_point = solved.primal_solution_status() == HighsSolutionStatus::Feasible;

    let status = match status {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
            SolveStatus::Infeasible
        }
        HighsModelStatus::Unbounded => SolveStatus::Unbounded,
        _ => SolveStatus::IterationLimit,
    };
    if !has_point || matches!(status, SolveStatus::Infeasible | SolveStatus::Unbounded) {
        let mut out = SolverSolution::without_solution(status, mip.sense);
        out.nodes = nodes;
        out.iterations = iterations;
        return Ok(out);
    }

    let sol = solved.get_solution();
    let mut x = sol.columns().to_vec();
    for (xi, v) in x.iter_mut().zip(&mip.vars) {
        if v.integer {
            *xi = xi.round();
        }
        *xi = xi.clamp(v.lower, v.upper);
    }
    let objective = mip.objective_value(&x);
    let (bound, duals) = if mip.is_lp() {
        let duals = sol.dual_rows().iter().map(|&d| sign * d).collect();
        (objective, Some(duals))
    } else {
        let internal = solved
            .double_info_value(c"mip_dual_bound")
            .unwrap_or(f64::NEG_INFINITY);
        let b = sign * internal + mip.objective_offset;
        // guard against tiny inconsistencies between the reported bound and the recomputed objective
        let b = match mip.sense {
            Sense::Minimize => b.min(objective),
            Sense::Maximize => b.max(objective),
        };
        (b, None)
    };
    let gap = relative_gap(mip.sense, objective, bound);
    let status = match status {
        SolveStatus::Optimal if gap > 1e-9 => SolveStatus::GapReached,
        s => s,
    };
    Ok(SolverSolution {
        status,
        objective,
        bound,
        x,
        duals,
        relative_gap: gap,
        nodes,
        iterations,
    })
}
