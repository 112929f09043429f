//! Radiality constraints and spanning-forest oracles.
//!
//! A line set is radial when it forms a spanning forest in which every tree
//! contains exactly one substation. The MILP block combines a cardinality
//! row, parent indicators, and a single-commodity fictitious flow in which
//! each non-substation node consumes one unit.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::instance::NetworkInstance;
use crate::milp::{
    solve_mip, LinExpr, MixedIntegerProgram, Relation, Sense, SolveOptions, VarId,
};

#[derive(Debug, Clone)]
pub struct RadialityBlock {
    pub z: Vec<VarId>,
    /// Per line: `[y(from, to), y(to, from)]`; `y(i, j) = 1` when `j` is the parent of `i`.
    pub y_parent: Vec<[VarId; 2]>,
    pub flow: Vec<VarId>,
    pub demand: Vec<f64>,
    pub big_m: f64,
}

/// Adds the radiality block to `mip` and returns its variables.
pub fn build_radiality_constraints(inst: &NetworkInstance, mip: &mut MixedIntegerProgram) -> RadialityBlock {
    let n = inst.num_nodes();
    let subs = inst.substation_nodes();
    let big_m = n as f64;
    let demand: Vec<f64> = (0..n)
        .map(|i| if inst.is_substation(i) { 0.0 } else { 1.0 })
        .collect();

    let mut z = Vec::with_capacity(inst.num_lines());
    let mut y_parent = Vec::with_capacity(inst.num_lines());
    let mut flow = Vec::with_capacity(inst.num_lines());
    for (l, line) in inst.lines.iter().enumerate() {
        let zl = mip.add_binary(format!("z[{l}]"));
        let fwd = mip.add_binary(format!("ypar[{},{}]", line.from, line.to));
        let bwd = mip.add_binary(format!("ypar[{},{}]", line.to, line.from));
        // y(i, j) + y(j, i) = z
        mip.add_row(
            format!("orient[{l}]"),
            vec![(fwd, 1.0), (bwd, 1.0), (zl, -1.0)],
            Relation::Eq,
            0.0,
        );
        // a substation never has a parent
        if inst.is_substation(line.from) {
            mip.fix(fwd, 0.0);
        }
        if inst.is_substation(line.to) {
            mip.fix(bwd, 0.0);
        }
        let f = mip.add_var(format!("F[{l}]"), -big_m, big_m);
        mip.add_row(format!("fcap+[{l}]"), vec![(f, 1.0), (zl, -big_m)], Relation::Le, 0.0);
        mip.add_row(format!("fcap-[{l}]"), vec![(f, -1.0), (zl, -big_m)], Relation::Le, 0.0);
        z.push(zl);
        y_parent.push([fwd, bwd]);
        flow.push(f);
    }
    mip.add_row(
        "card",
        z.iter().map(|&v| (v, 1.0)).collect(),
        Relation::Eq,
        (n - subs.len()) as f64,
    );
    for i in 0..n {
        if inst.is_substation(i) {
            continue;
        }
        let mut parents = LinExpr::new();
        let mut balance = LinExpr::new();
        for l in inst.lines_at(i) {
            let line = &inst.lines[l];
            if line.from == i {
                parents.add(y_parent[l][0], 1.0);
                balance.add(flow[l], -1.0);
            } else {
                parents.add(y_parent[l][1], 1.0);
                balance.add(flow[l], 1.0);
            }
        }
        mip.add_row(format!("parent[{i}]"), parents.compact(), Relation::Eq, 1.0);
        mip.add_row(format!("fbal[{i}]"), balance.compact(), Relation::Eq, demand[i]);
    }
    RadialityBlock {
        z,
        y_parent,
        flow,
        demand,
        big_m,
    }
}

/// Orients the built lines away from the substations, or `None` when they
/// are not radial.
pub fn orient(inst: &NetworkInstance, z: &[bool]) -> Option<Vec<[bool; 2]>> {
    let n = inst.num_nodes();
    if z.len() != inst.num_lines() {
        return None;
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (l, line) in inst.lines.iter().enumerate() {
        if z[l] {
            adj[line.from].push((line.to, l));
            adj[line.to].push((line.from, l));
        }
    }
    let mut seen = vec![false; n];
    let mut parent_line = vec![usize::MAX; n];
    let mut out = vec![[false, false]; inst.num_lines()];
    let mut used_edges = 0usize;
    for root in inst.substation_nodes() {
        if seen[root] {
            // two substations in one tree
            return None;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, l) in &adj[u] {
                if l == parent_line[u] {
                    continue;
                }
                if seen[v] {
                    return None;
                }
                seen[v] = true;
                parent_line[v] = l;
                used_edges += 1;
                // u is the parent of v
                if inst.lines[l].from == u {
                    out[l][1] = true;
                } else {
                    out[l][0] = true;
                }
                queue.push_back(v);
            }
        }
    }
    let built = z.iter().filter(|&&b| b).count();
    if seen.iter().all(|&s| s) && used_edges == built {
        Some(out)
    } else {
        None
    }
}

/// True iff the built lines form a spanning forest with exactly one
/// substation per tree.
pub fn is_radial(z: &[bool], inst: &NetworkInstance) -> bool {
    orient(inst, z).is_some()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Largest number of line subsets the brute-force enumerator will examine.
pub const ENUMERATION_SUBSET_CAP: f64 = 5.0e7;

/// All radial line sets, by brute force over subsets of the right size.
/// Errors when more than `limit` topologies exist or the subset space is too large.
pub fn enumerate_radial_topologies(inst: &NetworkInstance, limit: usize) -> Result<Vec<Vec<bool>>> {
    let m = inst.num_lines();
    let n = inst.num_nodes();
    let k = n.checked_sub(inst.substation_nodes().len()).unwrap_or(0);
    if k > m {
        return Ok(Vec::new());
    }
    let subsets = binomial(m, k);
    if subsets > ENUMERATION_SUBSET_CAP {
        return Err(Error::CombinatorialLimitExceeded(format!(
            "{subsets:.0} subsets of {k} lines out of {m}"
        )));
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut z = vec![false; m];
        for &i in &idx {
            z[i] = true;
        }
        if is_radial(&z, inst) {
            if out.len() == limit {
                return Err(Error::CombinatorialLimitExceeded(format!(
                    "more than {limit} radial topologies"
                )));
            }
            out.push(z);
        }
        // advance to the next k-combination
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Every `z` admitted by the radiality MILP, found by re-solving with a
/// no-good cut after each solution.
pub fn milp_feasible_topologies(
    inst: &NetworkInstance,
    limit: usize,
    opts: &SolveOptions,
) -> Result<Vec<Vec<bool>>> {
    let mut mip = MixedIntegerProgram::new(Sense::Minimize);
    let block = build_radiality_constraints(inst, &mut mip);
    let mut out = Vec::new();
    loop {
        let sol = solve_mip(&mip, 0.0, opts)?;
        if !sol.status.has_solution() {
            if sol.status == crate::milp::SolveStatus::Infeasible {
                return Ok(out);
            }
            return Err(Error::solver(sol.status, "enumerating radial topologies"));
        }
        if out.len() == limit {
            return Err(Error::CombinatorialLimitExceeded(format!(
                "more than {limit} radial topologies"
            )));
        }
        let z: Vec<bool> = block.z.iter().map(|&v| sol.value(v) > 0.5).collect();
        let mut cut = LinExpr::new();
        let mut rhs = 1.0;
        for (l, &built) in z.iter().enumerate() {
            if built {
                cut.add(block.z[l], -1.0);
                rhs -= 1.0;
            } else {
                cut.add(block.z[l], 1.0);
            }
        }
        mip.add_row(format!("nogood[{}]", out.len()), cut.compact(), Relation::Ge, rhs);
        out.push(z);
    }
}
