use proptest::prelude::*;
use serde_json::Value;

use super::builtin::graph_instance;
use super::*;

/// Present value of `years` level payments of one unit.
fn present_value_factor(rate: f64, years: u32) -> f64 {
    (1..=years).map(|k| (1.0 + rate).powi(-(k as i32))).sum()
}

#[test]
fn annuity_examples() {
    let a = annualization_factor(0.05, 20).unwrap();
    assert!((a - 0.0802426).abs() < 1e-6);
    assert!((a * present_value_factor(0.05, 20) - 1.0).abs() < 1e-12);
    assert!((annualization_factor(0.05, 1).unwrap() - 1.05).abs() < 1e-15);
    let b = annualization_factor(0.05, 30).unwrap();
    assert!((b - 0.0650514).abs() < 1e-6);
    assert!((b * present_value_factor(0.05, 30) - 1.0).abs() < 1e-12);
}

#[test]
fn annuity_domain_errors() {
    assert!(annualization_factor(0.0, 20).is_err());
    assert!(annualization_factor(1.0, 20).is_err());
    assert!(annualization_factor(-0.1, 20).is_err());
    assert!(annualization_factor(0.05, 0).is_err());
}

fn single_line_instance() -> NetworkInstance {
    let mut inst = graph_instance(2, &[(0, 1)], &[0]);
    inst.lines[0].cost_1e4_cny = 100.0;
    inst.lines[0].salt_1e4_cny_per_yr = 3.0;
    inst.finance.line_life_yr = 20;
    inst
}

#[test]
fn investment_examples() {
    let inst = single_line_instance();
    let empty = PlanningDecision::empty(&inst);
    assert_eq!(investment_cost(&empty, &inst).unwrap().total(), 0.0);

    let built = PlanningDecision::from_build(&inst, vec![true], vec![]).unwrap();
    let c = investment_cost(&built, &inst).unwrap();
    let oracle = 100.0 / present_value_factor(0.05, 20) + 3.0;
    assert!((c.total() - oracle).abs() < 1e-9);
    assert!((c.total() - 11.0243).abs() < 1e-4);
}

#[test]
fn station_investment_example() {
    let mut inst = demo6();
    inst.finance.pses_life_yr = 25;
    for c in &mut inst.pses {
        c.cost_1e4_cny = 344.5;
        c.salt_1e4_cny_per_yr = 0.02 * 344.5;
    }
    let mut d = PlanningDecision::empty(&inst);
    d.y[0] = true;
    let c = investment_cost(&d, &inst).unwrap();
    let oracle = 344.5 / present_value_factor(0.05, 25) + 6.89;
    assert!((c.total() - oracle).abs() < 1e-9);
    assert!((c.pses - 344.5 / present_value_factor(0.05, 25)).abs() < 1e-9);
}

#[test]
fn investment_dimension_mismatch() {
    let inst = single_line_instance();
    let d = PlanningDecision {
        z: vec![true, false],
        y: vec![],
        y_parent: vec![[false, true]; 2],
    };
    assert!(matches!(investment_cost(&d, &inst), Err(Error::DimensionMismatch(_))));
}

#[test]
fn bundled_instances_validate() {
    for b in BuiltinInstance::ALL {
        let d = validate_instance(&b.load());
        assert!(d.is_empty(), "{}: {d:?}", b.name());
    }
}

#[test]
fn zero_resistance_is_named() {
    let mut inst = demo6();
    inst.lines[3].r_ohm = 0.0;
    let d = validate_instance(&inst);
    assert_eq!(d.len(), 1, "{d:?}");
    assert!(d[0].contains("line 3") && d[0].contains("r_ohm"));
}

#[test]
fn collapsed_voltage_band_is_reported() {
    let mut inst = demo6();
    inst.nodes[2].v_min_pu = inst.nodes[2].v_max_pu;
    let d = validate_instance(&inst);
    assert_eq!(d.len(), 1, "{d:?}");
    assert!(d[0].contains("node 2") && d[0].contains("voltage band"));
}

#[test]
fn bad_profiles_and_areas_are_reported() {
    let mut inst = demo6();
    inst.nodes[1].p_load_mw.pop();
    inst.areas[0].nodes.push(4);
    inst.finance.discount_rate = 1.5;
    let d = validate_instance(&inst);
    assert!(d.iter().any(|m| m.contains("node 1") && m.contains("profile length")));
    assert!(d.iter().any(|m| m.contains("node 4 belongs to areas")));
    assert!(d.iter().any(|m| m.contains("discount rate")));
}

#[test]
fn ess_round_trip_must_lose_energy() {
    let mut inst = demo6();
    inst.pses[0].ess.as_mut().unwrap().mu_ch = 1.0;
    inst.pses[0].ess.as_mut().unwrap().mu_dch = 1.0;
    let d = validate_instance(&inst);
    assert!(d.iter().any(|m| m.contains("round-trip")), "{d:?}");
}

#[test]
fn load_coverage_precheck() {
    let mut inst = demo6();
    inst.nodes[0].substation.as_mut().unwrap().p_max_mw = 1.0;
    let d = validate_instance(&inst);
    assert!(d.iter().any(|m| m.contains("exceeds substation capacity")), "{d:?}");
}

fn assert_json_close(a: &Value, b: &Value, path: &str) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{path}: {x} vs {y}");
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{path}: length");
            for (k, (u, v)) in x.iter().zip(y).enumerate() {
                assert_json_close(u, v, &format!("{path}[{k}]"));
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.len(), y.len(), "{path}: keys");
            for (k, u) in x {
                assert_json_close(u, &y[k], &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(a, b, "{path}"),
    }
}

#[test]
fn shipped_demo6_matches_generator() {
    let shipped: Value = serde_json::from_str(BuiltinInstance::Demo6.json()).unwrap();
    let fresh = serde_json::to_value(generate_demo6()).unwrap();
    assert_json_close(&fresh, &shipped, "demo6");
}

#[test]
fn shipped_coastal47_matches_generator() {
    let shipped: Value = serde_json::from_str(BuiltinInstance::Coastal47Synthetic.json()).unwrap();
    let fresh = serde_json::to_value(generate_coastal47().unwrap()).unwrap();
    assert_json_close(&fresh, &shipped, "coastal47");
}

#[test]
fn coastal47_shape() {
    let inst = coastal47_synthetic();
    assert_eq!(inst.num_nodes(), 47);
    assert_eq!(inst.num_intervals(), 24);
    assert_eq!(inst.num_scenarios(), 10);
    assert_eq!(inst.areas.len(), 4);
    assert!(crate::topology::enumerate_radial_topologies(&inst, 1).is_err());
}

#[test]
fn coarsening_preserves_daily_energy() {
    let inst = coastal47_synthetic();
    let c = coarsen(&inst, 4, 3).unwrap();
    assert!(validate_instance(&c).is_empty());
    assert_eq!(c.num_scenarios(), 3);
    assert!((c.uncertainty.pi0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let energy = |i: &NetworkInstance| -> f64 {
        i.nodes.iter().flat_map(|n| &n.p_load_mw).sum::<f64>() * i.horizon.eta_grid_h_per_yr
    };
    assert!((energy(&inst) - energy(&c)).abs() < 1e-6 * energy(&inst));
    assert!(coarsen(&inst, 5, 3).is_err());
    assert!(coarsen(&inst, 4, 11).is_err());
}

#[test]
fn builtin_names_parse() {
    for b in BuiltinInstance::ALL {
        assert_eq!(b.name().parse::<BuiltinInstance>().unwrap(), b);
    }
    assert!("nope".parse::<BuiltinInstance>().is_err());
}

proptest! {
    #[test]
    fn annuity_inverts_present_value(rate in 0.001f64..0.999, years in 1u32..80) {
        let a = annualization_factor(rate, years).unwrap();
        prop_assert!((a * present_value_factor(rate, years) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn investment_monotone(bits in prop::collection::vec(any::<bool>(), 12), flip in 0usize..12) {
        let inst = demo6();
        let (m, k) = (inst.num_lines(), inst.pses.len());
        let mut d = PlanningDecision {
            z: bits[..m].to_vec(),
            y: bits[m..m + k].to_vec(),
            y_parent: vec![[false, false]; m],
        };
        let before = investment_cost(&d, &inst).unwrap().total();
        if flip < m { d.z[flip] = true } else { d.y[(flip - m) % k] = true }
        let after = investment_cost(&d, &inst).unwrap().total();
        prop_assert!(after >= before - 1e-12);
    }
}
