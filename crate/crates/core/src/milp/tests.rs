use proptest::prelude::*;

use super::*;

fn both() -> [SolveOptions; 2] {
    [
        SolveOptions::with_backend(Backend::Native),
        SolveOptions::with_backend(Backend::Highs),
    ]
}

/// Best objective over all vertices of `{x : rows, lower ≤ x ≤ upper}` for a
/// program with finite bounds, by solving every n×n subsystem of active
/// hyperplanes.
fn vertex_enumeration(p: &MixedIntegerProgram) -> Option<f64> {
    let n = p.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &p.rows {
        let mut a = vec![0.0; n];
        for &(v, c) in &r.coeffs {
            a[v.0] += c;
        }
        planes.push((a, r.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), p.vars[j].lower));
        planes.push((e, p.vars[j].upper));
    }
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_square(&idx.iter().map(|&k| planes[k].clone()).collect::<Vec<_>>()) {
            if p.max_violation(&x) <= 1e-7 {
                let v = p.objective_value(&x);
                best = Some(match (best, p.sense) {
                    (None, _) => v,
                    (Some(b), Sense::Minimize) => b.min(v),
                    (Some(b), Sense::Maximize) => b.max(v),
                });
            }
        }
        // next combination
        let m = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(eqs: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = eqs.len();
    let mut a: Vec<Vec<f64>> = eqs
        .iter()
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(*b);
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Lagrangian dual objective built from reported row duals, plus the worst
/// dual-feasibility violation (sign conventions of `∂obj/∂rhs`).
fn dual_check(p: &MixedIntegerProgram, y: &[f64]) -> (f64, f64) {
    let s = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut dual = p.objective_offset;
    let mut infeas: f64 = 0.0;
    let mut reduced: Vec<f64> = p.vars.iter().map(|v| v.cost).collect();
    for (r, &yr) in p.rows.iter().zip(y) {
        dual += r.rhs * yr;
        for &(v, a) in &r.coeffs {
            reduced[v.0] -= a * yr;
        }
        let ys = s * yr;
        infeas = infeas.max(match r.relation {
            Relation::Le => ys,
            Relation::Ge => -ys,
            Relation::Eq => 0.0,
        });
    }
    for (v, &d) in p.vars.iter().zip(&reduced) {
        let ds = s * d;
        let bound = if ds > 0.0 { v.lower } else { v.upper };
        if ds.abs() > 1e-9 {
            if bound.is_finite() {
                dual += d * bound;
            } else {
                infeas = infeas.max(ds.abs());
            }
        }
    }
    (dual, infeas)
}

#[test]
fn lower_bound_row_has_unit_dual() {
    for o in both() {
        let mut p = MixedIntegerProgram::new(Sense::Minimize);
        let x = p.add_var("x", f64::NEG_INFINITY, 10.0);
        p.set_cost(x, 1.0);
        p.add_row("lb", vec![(x, 1.0)], Relation::Ge, 3.0);
        let s = solve_lp(&p, &o).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-9);
        assert!((s.duals.unwrap()[0] - 1.0).abs() < 1e-9, "{:?}", o.backend);
    }
}

#[test]
fn simplex_probability_lp() {
    for o in both() {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let a = p.add_var("p1", 0.0, f64::INFINITY);
        let b = p.add_var("p2", 0.0, f64::INFINITY);
        p.set_cost(a, 1.0);
        p.set_cost(b, 2.0);
        p.add_row("sum", vec![(a, 1.0), (b, 1.0)], Relation::Le, 1.0);
        let s = solve_lp(&p, &o).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-9);
        assert!(s.x[0].abs() < 1e-9 && (s.x[1] - 1.0).abs() < 1e-9);
        assert!((s.duals.unwrap()[0] - 2.0).abs() < 1e-9);
    }
}

#[test]
fn textbook_lp_duals() {
    for o in both() {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let x = p.add_var("x", 0.0, f64::INFINITY);
        let y = p.add_var("y", 0.0, f64::INFINITY);
        p.set_cost(x, 3.0);
        p.set_cost(y, 2.0);
        p.add_row("a", vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0);
        p.add_row("b", vec![(x, 1.0), (y, 3.0)], Relation::Le, 7.0);
        p.add_row("c", vec![(x, 1.0)], Relation::Le, 3.0);
        let s = solve_lp(&p, &o).unwrap();
        assert!((s.objective - 11.0).abs() < 1e-9);
        let d = s.duals.unwrap();
        assert!((d[0] - 2.0).abs() < 1e-9 && d[1].abs() < 1e-9 && (d[2] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn infeasible_and_unbounded_detected() {
    for o in both() {
        let mut p = MixedIntegerProgram::new(Sense::Minimize);
        let x = p.add_var("x", 0.0, 1.0);
        p.add_row("r", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&p, &o).unwrap().status, SolveStatus::Infeasible);

        let mut q = MixedIntegerProgram::new(Sense::Maximize);
        let x = q.add_var("x", 0.0, f64::INFINITY);
        let y = q.add_var("y", 0.0, f64::INFINITY);
        q.set_cost(x, 1.0);
        q.add_row("r", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&q, &o).unwrap().status, SolveStatus::Unbounded);
    }
}

#[test]
fn degenerate_lp_with_redundant_equalities() {
    let mut p = MixedIntegerProgram::new(Sense::Minimize);
    let x: Vec<_> = (0..5).map(|j| p.add_var(format!("x{j}"), 0.0, 3.0)).collect();
    for (j, &c) in [-1.0, -2.0, 0.5, -1.5, 1.0].iter().enumerate() {
        p.set_cost(x[j], c);
    }
    let all: Vec<_> = x.iter().map(|&v| (v, 1.0)).collect();
    let all2: Vec<_> = x.iter().map(|&v| (v, 2.0)).collect();
    p.add_row("sum", all, Relation::Eq, 4.0);
    p.add_row("sum2", all2, Relation::Eq, 8.0);
    p.add_row("d1", vec![(x[0], 1.0), (x[1], 1.0)], Relation::Le, 2.0);
    p.add_row("d2", vec![(x[1], 1.0), (x[3], 1.0)], Relation::Le, 2.0);
    p.add_row("d3", vec![(x[0], 1.0), (x[1], 1.0), (x[3], 1.0)], Relation::Le, 2.0);
    p.add_row("d4", vec![(x[1], 1.0), (x[2], -1.0)], Relation::Le, 2.0);
    let oracle = vertex_enumeration(&p).unwrap();
    for o in both() {
        let s = solve_lp(&p, &o).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - oracle).abs() < 1e-7, "{} vs {oracle}", s.objective);
        assert!(p.max_violation(&s.x) < 1e-7);
    }
}

/// Beale's classic example cycles under Dantzig pricing without an
/// anti-cycling rule.
#[test]
fn beale_cycling_example_terminates() {
    let mut p = MixedIntegerProgram::new(Sense::Minimize);
    let x: Vec<_> = (0..4).map(|j| p.add_var(format!("x{j}"), 0.0, f64::INFINITY)).collect();
    for (j, &c) in [-0.75, 150.0, -0.02, 6.0].iter().enumerate() {
        p.set_cost(x[j], c);
    }
    p.add_row("r1", vec![(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)], Relation::Le, 0.0);
    p.add_row("r2", vec![(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)], Relation::Le, 0.0);
    p.add_row("r3", vec![(x[2], 1.0)], Relation::Le, 1.0);
    let s = solve_lp(&p, &SolveOptions::with_backend(Backend::Native)).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective + 0.05).abs() < 1e-9, "{}", s.objective);
}

#[test]
fn knapsack_matches_enumeration() {
    let mut p = MixedIntegerProgram::new(Sense::Maximize);
    let a = p.add_binary("a");
    let b = p.add_binary("b");
    p.set_cost(a, 5.0);
    p.set_cost(b, 4.0);
    p.add_row("cap", vec![(a, 3.0), (b, 2.0)], Relation::Le, 4.0);
    let mut best = f64::NEG_INFINITY;
    for ma in 0..2 {
        for mb in 0..2 {
            if 3 * ma + 2 * mb <= 4 {
                best = best.max((5 * ma + 4 * mb) as f64);
            }
        }
    }
    assert_eq!(best, 5.0);
    for o in both() {
        let s = solve_mip(&p, 0.0, &o).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - best).abs() < 1e-9);
        assert!(s.bound >= best - 1e-9);
    }
}

#[test]
fn full_gap_returns_valid_bound() {
    let mut p = MixedIntegerProgram::new(Sense::Minimize);
    let v: Vec<_> = (0..8).map(|j| p.add_binary(format!("b{j}"))).collect();
    for (j, &x) in v.iter().enumerate() {
        p.set_cost(x, 1.0 + j as f64 * 0.37);
    }
    p.add_row("cover", v.iter().map(|&x| (x, 2.0)).collect(), Relation::Ge, 5.0);
    let s = solve_mip(&p, 1.0, &SolveOptions::with_backend(Backend::Native)).unwrap();
    assert!(s.status.has_solution());
    assert!(s.relative_gap <= 1.0);
    // optimum picks the three cheapest columns
    let opt = 1.0 + 1.37 + 1.74;
    assert!(s.bound <= opt + 1e-9 && s.objective >= opt - 1e-9);
    let exact = solve_mip(&p, 0.0, &SolveOptions::with_backend(Backend::Native)).unwrap();
    assert!((exact.objective - opt).abs() < 1e-9);
    assert!(s.nodes <= exact.nodes);
}

#[test]
fn rejects_out_of_range_gap() {
    let p = MixedIntegerProgram::new(Sense::Minimize);
    assert!(solve_mip(&p, 1.5, &SolveOptions::default()).is_err());
}

#[test]
fn lp_export_lists_every_section() {
    let mut p = MixedIntegerProgram::new(Sense::Minimize);
    let a = p.add_binary("a");
    let b = p.add_var("flow(1,2)", f64::NEG_INFINITY, f64::INFINITY);
    p.set_cost(a, 2.0);
    p.add_row("link", vec![(a, 1.0), (b, -1.0)], Relation::Le, 0.0);
    let text = to_lp_format(&p);
    for section in ["Minimize", "Subject To", "Bounds", "General", "End"] {
        assert!(text.contains(section), "{section} missing:\n{text}");
    }
    assert!(text.contains("free"));
}

fn random_lp() -> impl Strategy<Value = MixedIntegerProgram> {
    (2usize..5, 1usize..5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5i32..6, n),
            prop::collection::vec(prop::collection::vec(-3i32..4, n), m),
            prop::collection::vec(0i32..8, m),
            prop::collection::vec(1i32..5, n),
            prop::collection::vec(0usize..3, m),
            any::<bool>(),
        )
            .prop_map(move |(c, a, b, ub, rel, max)| {
                let mut p = MixedIntegerProgram::new(if max { Sense::Maximize } else { Sense::Minimize });
                let x: Vec<_> = (0..n).map(|j| p.add_var(format!("x{j}"), 0.0, ub[j] as f64)).collect();
                for j in 0..n {
                    p.set_cost(x[j], c[j] as f64);
                }
                for r in 0..m {
                    let coeffs = (0..n).map(|j| (x[j], a[r][j] as f64)).collect();
                    let relation = [Relation::Le, Relation::Ge, Relation::Eq][rel[r]];
                    // Ge/Eq rows may be infeasible; that case is checked too
                    let rhs = if relation == Relation::Le { b[r] as f64 } else { b[r] as f64 / 4.0 };
                    p.add_row(format!("r{r}"), coeffs, relation, rhs);
                }
                p
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn native_lp_matches_vertex_enumeration_and_duality(p in random_lp()) {
        let s = solve_lp(&p, &SolveOptions::with_backend(Backend::Native)).unwrap();
        match vertex_enumeration(&p) {
            None => prop_assert_eq!(s.status, SolveStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(s.status, SolveStatus::Optimal);
                prop_assert!((s.objective - v).abs() < 1e-6, "{} vs {}", s.objective, v);
                prop_assert!(p.max_violation(&s.x) < 1e-7);
                let (dual, infeas) = dual_check(&p, s.duals.as_ref().unwrap());
                prop_assert!((dual - s.objective).abs() < 1e-6, "dual {} primal {}", dual, s.objective);
                prop_assert!(infeas < 1e-7);
            }
        }
    }

    #[test]
    fn native_and_highs_agree_on_mips(p in random_lp(), mask in prop::collection::vec(any::<bool>(), 5)) {
        let mut p = p;
        for (j, v) in p.vars.iter_mut().enumerate() {
            v.integer = mask[j];
        }
        let a = solve_mip(&p, 0.0, &SolveOptions::with_backend(Backend::Native)).unwrap();
        let b = solve_mip(&p, 0.0, &SolveOptions::with_backend(Backend::Highs)).unwrap();
        prop_assert_eq!(a.status.has_solution(), b.status.has_solution());
        if a.status.has_solution() {
            prop_assert!((a.objective - b.objective).abs() < 1e-6, "{} vs {}", a.objective, b.objective);
            prop_assert!(p.max_violation(&a.x) < 1e-6);
        }
    }

    #[test]
    fn mip_bound_brackets_enumerated_optimum(
        w in prop::collection::vec(1i32..9, 8),
        v in prop::collection::vec(1i32..9, 8),
        cap in 5i32..30,
        gap in 0.0f64..0.5,
    ) {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let x: Vec<_> = (0..8).map(|j| p.add_binary(format!("x{j}"))).collect();
        for j in 0..8 {
            p.set_cost(x[j], v[j] as f64);
        }
        p.add_row("cap", (0..8).map(|j| (x[j], w[j] as f64)).collect(), Relation::Le, cap as f64);
        let mut best = 0;
        for mask in 0u32..256 {
            let (mut ww, mut vv) = (0, 0);
            for j in 0..8 {
                if mask >> j & 1 == 1 {
                    ww += w[j];
                    vv += v[j];
                }
            }
            if ww <= cap {
                best = best.max(vv);
            }
        }
        let best = best as f64;
        let s = solve_mip(&p, gap, &SolveOptions::with_backend(Backend::Native)).unwrap();
        prop_assert!(s.status.has_solution());
        prop_assert!(s.bound >= best - 1e-7 && s.objective <= best + 1e-7);
        prop_assert!(s.relative_gap <= gap + 1e-12);
        prop_assert!((s.bound - s.objective) / s.objective.abs().max(1.0) <= gap + 1e-9);
    }
}
