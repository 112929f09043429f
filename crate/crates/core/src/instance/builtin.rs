//! Bundled instances and their generators.
//!
//! `demo6` is small enough for every brute-force oracle. `coastal47` is a
//! synthetic 47-node, four-area coastal feeder system; its figures follow
//! published case-study parameters where those exist (tariffs, station
//! capital cost, emission intensity, subsidies) and are generated elsewhere.
//! The shipped JSON files are the authoritative data; the generators exist
//! so the files can be rebuilt and are checked against them in tests.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::uncertainty::ev::{EvFleetModel, EvScenario, EvSpec};

const DEMO6_JSON: &str = include_str!("../../data/demo6.json");
const COASTAL47_JSON: &str = include_str!("../../data/coastal47_synthetic.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinInstance {
    Demo6,
    Coastal47Synthetic,
}

impl BuiltinInstance {
    pub const ALL: [BuiltinInstance; 2] = [BuiltinInstance::Demo6, BuiltinInstance::Coastal47Synthetic];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinInstance::Demo6 => "demo6",
            BuiltinInstance::Coastal47Synthetic => "coastal47-synthetic",
        }
    }

    pub fn load(self) -> NetworkInstance {
        match self {
            BuiltinInstance::Demo6 => demo6(),
            BuiltinInstance::Coastal47Synthetic => coastal47_synthetic(),
        }
    }

    pub fn json(self) -> &'static str {
        match self {
            BuiltinInstance::Demo6 => DEMO6_JSON,
            BuiltinInstance::Coastal47Synthetic => COASTAL47_JSON,
        }
    }
}

impl FromStr for BuiltinInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "demo6" => Ok(BuiltinInstance::Demo6),
            "coastal47" | "coastal47-synthetic" | "coastal47_synthetic" => {
                Ok(BuiltinInstance::Coastal47Synthetic)
            }
            _ => Err(Error::Domain(format!("unknown bundled instance `{s}`"))),
        }
    }
}

pub fn demo6() -> NetworkInstance {
    NetworkInstance::from_json(DEMO6_JSON).expect("bundled demo6.json parses")
}

pub fn coastal47_synthetic() -> NetworkInstance {
    NetworkInstance::from_json(COASTAL47_JSON).expect("bundled coastal47_synthetic.json parses")
}

/// 1 CNY/W upfront PV subsidy, spread over the station lifetime.
const PV_UPFRONT_SUBSIDY_1E4_CNY_PER_MW: f64 = 100.0;
/// 0.05 CNY/kWh generation subsidy.
const PSES_PV_PEAK_MW: f64 = 0.075;
const PV_ENERGY_SUBSIDY: f64 = 0.005;
const LINE_SALT_COEFF: f64 = 0.03;
const STATION_SALT_COEFF: f64 = 0.02;
const THERMAL_INTENSITY: f64 = 0.85;

fn annuity(f: &FinanceSpec, years: u32) -> f64 {
    annualization_factor(f.discount_rate, years).expect("valid bundled finance data")
}

fn line(from: usize, to: usize, length_km: f64, base_kv: f64, smax_mva: f64, cost_per_km: f64, f: &FinanceSpec) -> LineSpec {
    let cost = cost_per_km * length_km;
    LineSpec {
        from,
        to,
        r_ohm: 0.27 * length_km,
        x_ohm: 0.35 * length_km,
        smax_mva,
        base_kv,
        length_km,
        cost_1e4_cny: cost,
        salt_1e4_cny_per_yr: LINE_SALT_COEFF * annuity(f, f.line_life_yr) * cost,
    }
}

fn tou_24() -> Vec<f64> {
    (0..24)
        .map(|h| match h {
            0..=7 => 0.025,
            10 | 11 | 14..=18 => 0.111,
            _ => 0.065,
        })
        .collect()
}

/// Smallest instance carrying only a graph: one interval, no loads, no
/// stations. Used to exercise topology code.
pub fn graph_instance(n: usize, edges: &[(usize, usize)], substations: &[usize]) -> NetworkInstance {
    let finance = FinanceSpec {
        discount_rate: 0.05,
        line_life_yr: 20,
        pses_life_yr: 20,
    };
    let nodes = (0..n)
        .map(|i| NodeSpec {
            name: format!("n{i}"),
            p_load_mw: vec![0.0],
            q_load_mvar: vec![0.0],
            v_min_pu: 0.9,
            v_max_pu: 1.1,
            substation: substations.contains(&i).then(|| SubstationSpec {
                p_min_mw: -10.0,
                p_max_mw: 10.0,
                q_min_mvar: -10.0,
                q_max_mvar: 10.0,
                voltage_pu: Some(1.0),
            }),
        })
        .collect();
    let lines = edges
        .iter()
        .map(|&(a, b)| line(a, b, 1.0, 10.0, 5.0, 10.0, &finance))
        .collect();
    let members: Vec<usize> = (0..n).filter(|i| !substations.contains(i)).collect();
    let unit = |cap: f64, price: f64, e: f64| GenUnitSpec {
        cap_mw: vec![cap],
        price_1e4_cny_per_mwh: vec![price],
        intensity_t_per_mwh: vec![e],
    };
    NetworkInstance {
        nodes,
        lines,
        areas: if members.is_empty() {
            Vec::new()
        } else {
            vec![AreaSpec {
                name: "all".into(),
                nodes: members,
                carbon_price_1e4_cny_per_t: 0.005,
                pses_min: 0,
                pses_max: 0,
            }]
        },
        pses: Vec::new(),
        units: UnitsSpec {
            thermal: unit(10.0, 0.045, THERMAL_INTENSITY),
            tidal: unit(0.0, 0.038, 0.0),
        },
        tariffs: TariffSpec {
            tou_1e4_cny_per_mwh: vec![0.065],
            ev_1e4_cny_per_mwh: vec![0.065],
        },
        horizon: HorizonSpec {
            intervals: 1,
            eta_grid_h_per_yr: 365.0 * 24.0,
        },
        finance,
        uncertainty: UncertaintySpec {
            pi0: vec![1.0],
            alpha1: 0.9,
            alpha_inf: 0.9,
            ev_scenarios_mw: vec![vec![0.0]],
            p_dev_mw: Vec::new(),
            q_dev_mvar: Vec::new(),
            pv_dev_mw: Vec::new(),
        },
        conventional_station: None,
    }
}

fn station(
    node: usize,
    cost: f64,
    pv: Vec<f64>,
    pv_cap: f64,
    ess: EssSpec,
    ev_share: f64,
    feeder_end: bool,
    f: &FinanceSpec,
) -> PsesCandidate {
    let a = annuity(f, f.pses_life_yr);
    PsesCandidate {
        node,
        cost_1e4_cny: cost,
        salt_1e4_cny_per_yr: STATION_SALT_COEFF * a * cost,
        pv_max_mw: pv,
        ess: Some(ess),
        ev_share,
        feeder_end,
        fixed_subsidy_1e4_cny_per_yr: PV_UPFRONT_SUBSIDY_1E4_CNY_PER_MW * pv_cap * a,
        pv_subsidy_1e4_cny_per_mwh: PV_ENERGY_SUBSIDY,
    }
}

fn deviation(node: usize, down: Vec<f64>, up: Vec<f64>) -> NodeDeviation {
    NodeDeviation { node, down, up }
}

/// Six nodes, four intervals of six hours, two EV scenarios and four
/// uncertain box dimensions (16 corners).
pub fn generate_demo6() -> NetworkInstance {
    let t_len = 4;
    let finance = FinanceSpec {
        discount_rate: 0.05,
        line_life_yr: 20,
        pses_life_yr: 30,
    };
    let shape = [0.55, 0.85, 0.75, 1.0];
    let base = [0.0, 0.8, 0.6, 0.7, 0.5, 0.9];
    let nodes = (0..6)
        .map(|i| NodeSpec {
            name: format!("bus{i}"),
            p_load_mw: shape.iter().map(|s| s * base[i]).collect(),
            q_load_mvar: shape.iter().map(|s| 0.3 * s * base[i]).collect(),
            v_min_pu: 0.93,
            v_max_pu: 1.07,
            substation: (i == 0).then(|| SubstationSpec {
                p_min_mw: -2.0,
                p_max_mw: 10.0,
                q_min_mvar: -5.0,
                q_max_mvar: 5.0,
                voltage_pu: Some(1.0),
            }),
        })
        .collect();
    let topo = [
        (0, 1, 2.0),
        (0, 2, 2.5),
        (1, 2, 1.5),
        (1, 3, 2.0),
        (2, 4, 2.0),
        (3, 4, 1.5),
        (3, 5, 2.5),
        (4, 5, 2.0),
    ];
    let lines = topo
        .iter()
        .map(|&(a, b, len)| line(a, b, len, 10.0, 6.0, 12.0, &finance))
        .collect();
    let ess = EssSpec {
        p_min_mw: 0.0,
        p_ch_max_mw: 0.4,
        p_dch_max_mw: 0.4,
        e_min_mwh: 0.1,
        e_max_mwh: 1.2,
        mu_ch: 0.95,
        mu_dch: 0.95,
        e_initial_mwh: 0.4,
    };
    let pv_shape = [0.0, 0.5, 0.9, 0.1];
    let pses = [(2, false), (3, false), (4, true), (5, true)]
        .iter()
        .map(|&(node, end)| {
            let pv: Vec<f64> = pv_shape.iter().map(|s| s * 1.0).collect();
            station(node, 60.0, pv, 1.0, ess.clone(), 0.5, end, &finance)
        })
        .collect();
    let tou = vec![0.025, 0.065, 0.111, 0.111];
    NetworkInstance {
        nodes,
        lines,
        areas: vec![
            AreaSpec {
                name: "A".into(),
                nodes: vec![1, 3, 5],
                carbon_price_1e4_cny_per_t: 0.005,
                pses_min: 1,
                pses_max: 1,
            },
            AreaSpec {
                name: "B".into(),
                nodes: vec![2, 4],
                carbon_price_1e4_cny_per_t: 0.004,
                pses_min: 1,
                pses_max: 1,
            },
        ],
        pses,
        units: UnitsSpec {
            thermal: GenUnitSpec {
                cap_mw: vec![20.0; t_len],
                price_1e4_cny_per_mwh: vec![0.045; t_len],
                intensity_t_per_mwh: vec![THERMAL_INTENSITY; t_len],
            },
            tidal: GenUnitSpec {
                cap_mw: vec![1.5, 0.5, 1.5, 0.5],
                price_1e4_cny_per_mwh: vec![0.038; t_len],
                intensity_t_per_mwh: vec![0.0; t_len],
            },
        },
        tariffs: TariffSpec {
            tou_1e4_cny_per_mwh: tou.clone(),
            ev_1e4_cny_per_mwh: tou,
        },
        horizon: HorizonSpec {
            intervals: t_len,
            eta_grid_h_per_yr: 365.0 * 6.0,
        },
        finance: finance.clone(),
        uncertainty: UncertaintySpec {
            pi0: vec![0.6, 0.4],
            alpha1: 0.9,
            alpha_inf: 0.9,
            ev_scenarios_mw: vec![vec![0.3, 0.2, 0.4, 0.9], vec![0.5, 0.3, 0.6, 1.4]],
            p_dev_mw: vec![
                deviation(1, vec![0.0, 0.0, 0.0, 0.05], vec![0.0, 0.0, 0.0, 0.15]),
                deviation(5, vec![0.0, 0.0, 0.0, 0.1], vec![0.0, 0.0, 0.0, 0.2]),
            ],
            q_dev_mvar: Vec::new(),
            pv_dev_mw: vec![
                deviation(3, vec![0.0, 0.0, 0.3, 0.0], vec![0.0; t_len]),
                deviation(4, vec![0.0, 0.2, 0.0, 0.0], vec![0.0; t_len]),
            ],
        },
        conventional_station: Some(ConventionalStationSpec {
            cost_1e4_cny: 35.0,
            salt_1e4_cny_per_yr: STATION_SALT_COEFF * annuity(&finance, 20) * 35.0,
            life_yr: 20,
        }),
    }
}

const COASTAL_SEED: u64 = 47;
const LOAD_SHAPE_24: [f64; 24] = [
    0.55, 0.50, 0.48, 0.47, 0.48, 0.52, 0.60, 0.72, 0.85, 0.92, 0.95, 0.97, 0.93, 0.90, 0.92, 0.94,
    0.96, 0.98, 1.00, 0.99, 0.93, 0.82, 0.70, 0.60,
];

/// EV fleet behind the coastal instance's scenario profiles: each entry is
/// a group of about ten vehicles that share a charging window.
pub fn coastal47_fleet() -> EvFleetModel {
    let mut rng = ChaCha8Rng::seed_from_u64(COASTAL_SEED + 1);
    let tou = tou_24();
    let scenarios = (0..10)
        .map(|s| {
            let evening_mean = 17.0 + 0.35 * s as f64;
            let scale = 0.8 + 0.05 * s as f64;
            let groups = 54 + s;
            let mut evs = Vec::with_capacity(groups);
            for g in 0..groups {
                let daytime = g % 3 == 0;
                let arrive: usize = if daytime {
                    rng.gen_range(7..=10)
                } else {
                    let a: f64 = evening_mean + rng.gen_range(-2.0..2.0);
                    (a.round() as usize).min(21)
                };
                let dwell: usize = if daytime { rng.gen_range(6..=9) } else { rng.gen_range(4..=8) };
                let depart = (arrive + dwell).min(24);
                let window: Vec<usize> = (arrive..depart).collect();
                let p_max = 0.1;
                let deliverable = window.len() as f64 * p_max;
                let need = (scale * rng.gen_range(0.15..0.5)).min(0.9 * deliverable);
                evs.push(EvSpec {
                    window,
                    e_initial_mwh: 0.0,
                    e_target_mwh: need,
                    e_capacity_mwh: 0.8,
                    p_max_mw: p_max,
                });
            }
            let mut random_mw = vec![0.0; 24];
            for ev in &evs {
                // uncontrolled share charges at full power on arrival
                let mut left = 0.5 * (ev.e_target_mwh - ev.e_initial_mwh);
                for &t in &ev.window {
                    let p = left.min(ev.p_max_mw);
                    random_mw[t] += p;
                    left -= p;
                    if left <= 0.0 {
                        break;
                    }
                }
            }
            let mu: f64 = evs.iter().map(|e| e.e_target_mwh - e.e_initial_mwh).sum();
            EvScenario {
                evs,
                random_mw,
                mu,
                mu_min: 0.8 * mu,
                mu_max: 1.2 * mu,
            }
        })
        .collect();
    EvFleetModel {
        tariff_1e4_cny_per_mwh: tou,
        dt_hours: 1.0,
        sigma2: 1.0,
        scenarios,
    }
}

struct FeederLayout {
    trunk: Vec<usize>,
    lateral: Vec<usize>,
}

/// 47 nodes (one substation, four feeders), 24 hourly intervals and ten EV
/// scenarios.
pub fn generate_coastal47() -> Result<NetworkInstance> {
    let t_len = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(COASTAL_SEED);
    let finance = FinanceSpec {
        discount_rate: 0.05,
        line_life_yr: 20,
        pses_life_yr: 25,
    };
    let sizes = [12usize, 12, 11, 11];
    let mut feeders = Vec::new();
    let mut next = 1;
    for &size in &sizes {
        let trunk_len = size - 3;
        let trunk: Vec<usize> = (next..next + trunk_len).collect();
        let lateral: Vec<usize> = (next + trunk_len..next + size).collect();
        next += size;
        feeders.push(FeederLayout { trunk, lateral });
    }
    let n = next;

    let mut nodes = vec![NodeSpec {
        name: "substation".into(),
        p_load_mw: vec![0.0; t_len],
        q_load_mvar: vec![0.0; t_len],
        v_min_pu: 0.9,
        v_max_pu: 1.1,
        substation: Some(SubstationSpec {
            p_min_mw: -5.0,
            p_max_mw: 30.0,
            q_min_mvar: -10.0,
            q_max_mvar: 15.0,
            voltage_pu: Some(1.02),
        }),
    }];
    for i in 1..n {
        let base: f64 = rng.gen_range(0.15..0.35);
        nodes.push(NodeSpec {
            name: format!("bus{i}"),
            p_load_mw: LOAD_SHAPE_24.iter().map(|s| s * base).collect(),
            q_load_mvar: LOAD_SHAPE_24.iter().map(|s| 0.4 * s * base).collect(),
            v_min_pu: 0.9,
            v_max_pu: 1.1,
            substation: None,
        });
    }

    let mut lines = Vec::new();
    let mut add = |a: usize, b: usize, lo: f64, hi: f64, smax: f64, rng: &mut ChaCha8Rng| {
        let len: f64 = rng.gen_range(lo..hi);
        let len = (len * 100.0).round() / 100.0;
        lines.push(line(a, b, len, 10.0, smax, 23.3, &finance));
    };
    for f in &feeders {
        let t = &f.trunk;
        let l = &f.lateral;
        add(0, t[0], 0.6, 1.0, 10.0, &mut rng);
        for w in t.windows(2) {
            add(w[0], w[1], 0.6, 1.2, 8.0, &mut rng);
        }
        add(t[2], l[0], 0.6, 1.2, 5.0, &mut rng);
        add(l[0], l[1], 0.6, 1.2, 5.0, &mut rng);
        add(l[1], l[2], 0.6, 1.2, 5.0, &mut rng);
        // loop-forming alternatives inside the feeder
        add(t[1], l[0], 0.8, 1.4, 5.0, &mut rng);
        add(t[5], l[2], 0.8, 1.4, 5.0, &mut rng);
        add(t[t.len() - 3], t[t.len() - 1], 1.0, 1.6, 8.0, &mut rng);
    }
    for k in 0..feeders.len() - 1 {
        let a = *feeders[k].trunk.last().unwrap();
        let b = *feeders[k + 1].lateral.last().unwrap();
        add(a, b, 1.5, 2.5, 5.0, &mut rng);
    }

    let pv_shape: Vec<f64> = (0..t_len)
        .map(|h| {
            let x = (h as f64 + 0.5 - 6.0) / 12.0;
            if (0.0..=1.0).contains(&x) {
                ((std::f64::consts::PI * x).sin() * 1e4).round() / 1e4
            } else {
                0.0
            }
        })
        .collect();
    let ess = EssSpec {
        p_min_mw: 0.0,
        p_ch_max_mw: 0.2,
        p_dch_max_mw: 0.3,
        e_min_mwh: 0.15,
        e_max_mwh: 1.5,
        mu_ch: 0.95,
        mu_dch: 0.95,
        e_initial_mwh: 0.6,
    };
    let mut pses = Vec::new();
    for f in &feeders {
        for (node, end) in [(f.trunk[3], false), (*f.trunk.last().unwrap(), true)] {
            let pv = pv_shape.iter().map(|s| s * PSES_PV_PEAK_MW).collect();
            pses.push(station(node, 344.5, pv, PSES_PV_PEAK_MW, ess.clone(), 0.25, end, &finance));
        }
    }

    let fleet = coastal47_fleet();
    let ev_scenarios_mw = fleet
        .scenario_profiles()?
        .into_iter()
        .map(|p| p.into_iter().map(|v| (v * 1e6).round() / 1e6).collect())
        .collect();
    let raw: Vec<f64> = (0..10).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let mut pi0: Vec<f64> = raw.iter().map(|w| (w / total * 1e4).round() / 1e4).collect();
    let drift: f64 = 1.0 - pi0.iter().sum::<f64>();
    pi0[0] += drift;

    let mut p_dev = Vec::new();
    for f in &feeders {
        let i = f.lateral[2];
        let p = &nodes[i].p_load_mw;
        p_dev.push(deviation(
            i,
            p.iter().map(|v| (0.1 * v * 1e6).round() / 1e6).collect(),
            p.iter().map(|v| (0.2 * v * 1e6).round() / 1e6).collect(),
        ));
    }
    let pv_dev = pses
        .iter()
        .map(|c| {
            deviation(
                c.node,
                c.pv_max_mw.iter().map(|v| (0.3 * v * 1e6).round() / 1e6).collect(),
                vec![0.0; t_len],
            )
        })
        .collect();

    let tidal_cap = (0..t_len)
        .map(|h| {
            let phase = 2.0 * std::f64::consts::PI * (h as f64 + 0.5) / 12.42;
            ((4.5 + 4.5 * phase.sin()) * 1e4).round() / 1e4
        })
        .collect();
    let tou = tou_24();
    let area_names = ["north", "east", "south", "west"];
    let carbon = [0.005, 0.004, 0.003, 0.004];
    let areas = feeders
        .iter()
        .enumerate()
        .map(|(k, f)| AreaSpec {
            name: area_names[k].into(),
            nodes: f.trunk.iter().chain(&f.lateral).copied().collect(),
            carbon_price_1e4_cny_per_t: carbon[k],
            pses_min: 1,
            pses_max: 1,
        })
        .collect();
    Ok(NetworkInstance {
        nodes,
        lines,
        areas,
        pses,
        units: UnitsSpec {
            thermal: GenUnitSpec {
                cap_mw: vec![30.0; t_len],
                price_1e4_cny_per_mwh: vec![0.04; t_len],
                intensity_t_per_mwh: vec![THERMAL_INTENSITY; t_len],
            },
            tidal: GenUnitSpec {
                cap_mw: tidal_cap,
                price_1e4_cny_per_mwh: vec![0.038; t_len],
                intensity_t_per_mwh: vec![0.0; t_len],
            },
        },
        tariffs: TariffSpec {
            tou_1e4_cny_per_mwh: tou.clone(),
            ev_1e4_cny_per_mwh: tou,
        },
        horizon: HorizonSpec {
            intervals: t_len,
            eta_grid_h_per_yr: 365.0,
        },
        finance: finance.clone(),
        uncertainty: UncertaintySpec {
            pi0,
            alpha1: 0.99,
            alpha_inf: 0.99,
            ev_scenarios_mw,
            p_dev_mw: p_dev,
            q_dev_mvar: Vec::new(),
            pv_dev_mw: pv_dev,
        },
        conventional_station: Some(ConventionalStationSpec {
            cost_1e4_cny: 187.0,
            salt_1e4_cny_per_yr: STATION_SALT_COEFF * annuity(&finance, 20) * 187.0,
            life_yr: 20,
        }),
    })
}

fn block_mean(v: &[f64], factor: usize) -> Vec<f64> {
    v.chunks(factor).map(|c| c.iter().sum::<f64>() / factor as f64).collect()
}

/// Reduced copy of `inst`: profiles are averaged over blocks of
/// `T / intervals` consecutive intervals and only the `scenarios` most
/// probable EV scenarios are kept, with renormalized probabilities.
pub fn coarsen(inst: &NetworkInstance, intervals: usize, scenarios: usize) -> Result<NetworkInstance> {
    let t = inst.num_intervals();
    if intervals == 0 || t % intervals != 0 {
        return Err(Error::Domain(format!("{intervals} does not divide {t} intervals")));
    }
    let s_len = inst.num_scenarios();
    if scenarios == 0 || scenarios > s_len {
        return Err(Error::Domain(format!("cannot keep {scenarios} of {s_len} scenarios")));
    }
    let k = t / intervals;
    let bm = |v: &Vec<f64>| block_mean(v, k);
    let mut out = inst.clone();
    for n in &mut out.nodes {
        n.p_load_mw = bm(&n.p_load_mw);
        n.q_load_mvar = bm(&n.q_load_mvar);
    }
    for c in &mut out.pses {
        c.pv_max_mw = bm(&c.pv_max_mw);
    }
    for u in [&mut out.units.thermal, &mut out.units.tidal] {
        u.cap_mw = bm(&u.cap_mw);
        u.price_1e4_cny_per_mwh = bm(&u.price_1e4_cny_per_mwh);
        u.intensity_t_per_mwh = bm(&u.intensity_t_per_mwh);
    }
    out.tariffs.tou_1e4_cny_per_mwh = bm(&out.tariffs.tou_1e4_cny_per_mwh);
    out.tariffs.ev_1e4_cny_per_mwh = bm(&out.tariffs.ev_1e4_cny_per_mwh);
    out.horizon.intervals = intervals;
    out.horizon.eta_grid_h_per_yr *= k as f64;
    let u = &mut out.uncertainty;
    for devs in [&mut u.p_dev_mw, &mut u.q_dev_mvar, &mut u.pv_dev_mw] {
        for d in devs.iter_mut() {
            d.down = bm(&d.down);
            d.up = bm(&d.up);
        }
    }
    let mut order: Vec<usize> = (0..s_len).collect();
    order.sort_by(|&a, &b| inst.uncertainty.pi0[b].total_cmp(&inst.uncertainty.pi0[a]).then(a.cmp(&b)));
    let mut keep = order[..scenarios].to_vec();
    keep.sort_unstable();
    let mass: f64 = keep.iter().map(|&s| inst.uncertainty.pi0[s]).sum();
    u.pi0 = keep.iter().map(|&s| inst.uncertainty.pi0[s] / mass).collect();
    u.ev_scenarios_mw = keep
        .iter()
        .map(|&s| block_mean(&inst.uncertainty.ev_scenarios_mw[s], k))
        .collect();
    Ok(out)
}

/// Shape of a randomly generated small instance.
#[derive(Debug, Clone, Copy)]
pub struct RandomInstanceSpec {
    pub nodes: usize,
    pub intervals: usize,
    pub scenarios: usize,
    pub stations: usize,
    /// Extra lines beyond a spanning tree.
    pub extra_lines: usize,
    /// Uncertain box dimensions with nonzero width.
    pub box_dims: usize,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        RandomInstanceSpec {
            nodes: 5,
            intervals: 3,
            scenarios: 2,
            stations: 2,
            extra_lines: 2,
            box_dims: 2,
        }
    }
}

/// Seeded small instance with one substation at node 0, a connected
/// candidate graph, storage-equipped station candidates and a single area.
pub fn random_instance(seed: u64, spec: RandomInstanceSpec) -> NetworkInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.nodes.max(2);
    let t_len = spec.intervals.max(1);
    let r = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> f64 { (rng.gen_range(lo..hi) * 1e4f64).round() / 1e4 };
    let finance = FinanceSpec {
        discount_rate: 0.05,
        line_life_yr: 20,
        pses_life_yr: 20,
    };
    let nodes: Vec<NodeSpec> = (0..n)
        .map(|i| {
            let base = if i == 0 { 0.0 } else { r(&mut rng, 0.1, 0.8) };
            let p: Vec<f64> = (0..t_len).map(|_| base * r(&mut rng, 0.6, 1.0)).collect();
            NodeSpec {
                name: format!("n{i}"),
                q_load_mvar: p.iter().map(|v| 0.3 * v).collect(),
                p_load_mw: p,
                v_min_pu: 0.9,
                v_max_pu: 1.1,
                substation: (i == 0).then(|| SubstationSpec {
                    p_min_mw: -10.0,
                    p_max_mw: 20.0,
                    q_min_mvar: -10.0,
                    q_max_mvar: 10.0,
                    voltage_pu: Some(1.0),
                }),
            }
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    let mut tries = 0;
    while edges.len() < n - 1 + spec.extra_lines && tries < 100 {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !edges.iter().any(|&(u, v)| (u, v) == (a, b) || (u, v) == (b, a)) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let lines = edges
        .iter()
        .map(|&(a, b)| {
            let len = r(&mut rng, 0.5, 2.0);
            line(a, b, len, 10.0, 4.0, 12.0, &finance)
        })
        .collect();
    let mut hosts: Vec<usize> = (1..n).collect();
    for i in (1..hosts.len()).rev() {
        let j = rng.gen_range(0..=i);
        hosts.swap(i, j);
    }
    hosts.truncate(spec.stations.min(n - 1));
    hosts.sort_unstable();
    let share = if hosts.is_empty() { 0.0 } else { 1.0 / hosts.len() as f64 };
    let pses: Vec<PsesCandidate> = hosts
        .iter()
        .map(|&node| {
            let cap = r(&mut rng, 0.3, 1.0);
            let pv = (0..t_len).map(|_| cap * r(&mut rng, 0.0, 1.0)).collect();
            let pmax = r(&mut rng, 0.2, 0.6);
            let emax = r(&mut rng, 0.5, 2.0);
            let ess = EssSpec {
                p_min_mw: 0.0,
                p_ch_max_mw: pmax,
                p_dch_max_mw: pmax,
                e_min_mwh: 0.0,
                e_max_mwh: emax,
                mu_ch: r(&mut rng, 0.85, 0.98),
                mu_dch: r(&mut rng, 0.85, 0.98),
                e_initial_mwh: (0.5 * emax * 1e4).round() / 1e4,
            };
            let cost = r(&mut rng, 20.0, 60.0);
            station(node, cost, pv, cap, ess, share, false, &finance)
        })
        .collect();
    let tou: Vec<f64> = (0..t_len).map(|_| r(&mut rng, 0.02, 0.12)).collect();
    let s_len = spec.scenarios.max(1);
    let raw: Vec<f64> = (0..s_len).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let pi0: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let ev_scenarios_mw = (0..s_len)
        .map(|_| (0..t_len).map(|_| r(&mut rng, 0.0, 1.0)).collect())
        .collect();
    let mut p_dev = Vec::new();
    let mut pv_dev: Vec<NodeDeviation> = Vec::new();
    let mut used = std::collections::BTreeSet::new();
    for _ in 0..spec.box_dims {
        let t = rng.gen_range(0..t_len);
        if !pses.is_empty() && rng.gen_bool(0.4) {
            let k = rng.gen_range(0..pses.len());
            if !used.insert((1, k, t)) {
                continue;
            }
            let node = pses[k].node;
            let width = (pses[k].pv_max_mw[t] * 0.5 * 1e4).round() / 1e4;
            if width <= 0.0 {
                continue;
            }
            match pv_dev.iter_mut().find(|d| d.node == node) {
                Some(d) => d.down[t] = width,
                None => {
                    let mut down = vec![0.0; t_len];
                    down[t] = width;
                    pv_dev.push(deviation(node, down, vec![0.0; t_len]));
                }
            }
        } else {
            let node = rng.gen_range(1..n);
            if !used.insert((0, node, t)) {
                continue;
            }
            let (dn, up) = (r(&mut rng, 0.0, 0.2), r(&mut rng, 0.05, 0.4));
            match p_dev.iter_mut().find(|d: &&mut NodeDeviation| d.node == node) {
                Some(d) => {
                    d.down[t] = dn;
                    d.up[t] = up;
                }
                None => {
                    let mut down = vec![0.0; t_len];
                    let mut upv = vec![0.0; t_len];
                    down[t] = dn;
                    upv[t] = up;
                    p_dev.push(deviation(node, down, upv));
                }
            }
        }
    }
    let members: Vec<usize> = (1..n).collect();
    NetworkInstance {
        nodes,
        lines,
        areas: vec![AreaSpec {
            name: "all".into(),
            nodes: members,
            carbon_price_1e4_cny_per_t: 0.005,
            pses_min: usize::from(!pses.is_empty()),
            pses_max: pses.len(),
        }],
        pses,
        units: UnitsSpec {
            thermal: GenUnitSpec {
                cap_mw: vec![30.0; t_len],
                price_1e4_cny_per_mwh: vec![0.045; t_len],
                intensity_t_per_mwh: vec![THERMAL_INTENSITY; t_len],
            },
            tidal: GenUnitSpec {
                cap_mw: (0..t_len).map(|_| r(&mut rng, 0.0, 2.0)).collect(),
                price_1e4_cny_per_mwh: vec![0.038; t_len],
                intensity_t_per_mwh: vec![0.0; t_len],
            },
        },
        tariffs: TariffSpec {
            ev_1e4_cny_per_mwh: tou.clone(),
            tou_1e4_cny_per_mwh: tou,
        },
        horizon: HorizonSpec {
            intervals: t_len,
            eta_grid_h_per_yr: 365.0 * 24.0 / t_len as f64,
        },
        finance,
        uncertainty: UncertaintySpec {
            pi0,
            alpha1: 0.9,
            alpha_inf: 0.9,
            ev_scenarios_mw,
            p_dev_mw: p_dev,
            q_dev_mvar: Vec::new(),
            pv_dev_mw: pv_dev,
        },
        conventional_station: None,
    }
}
