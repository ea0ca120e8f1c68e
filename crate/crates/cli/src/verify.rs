//! Self-check battery: property spot-checks against exact oracles, one
//! pass/fail line per check. Returns the number of failures.

use std::f64::consts::LN_2;

use rand::Rng;

use radbound::bounds::{bound, estimate, slack};
use radbound::exact::{
    brute_force_log2_z, exact_weighted_rademacher, grid_exact_ln_z, TabularWeightModel,
};
use radbound::gumbel::gumbel_slack;
use radbound::logsum::ln_sum_exp;
use radbound::rng::{derive_seed, substream};
use radbound::satcount::{brute_force_model_count, delta_sat, CnfFormula};
use radbound::spinglass::GridIsingModel;
use radbound::types::{sample_rademacher, to_unary, BoundConfig, WeightModel};

type Check = Box<dyn Fn(u64) -> Result<String, String>>;

pub fn run(seed: u64) -> usize {
    let checks: Vec<(&str, Check)> = vec![
        ("slack-arithmetic", Box::new(slack_arithmetic)),
        ("slack-concentration", Box::new(slack_concentration)),
        ("tabular-sandwich", Box::new(tabular_sandwich)),
        ("graph-cut-exactness", Box::new(graph_cut_exactness)),
        ("sat-delta-exactness", Box::new(sat_delta_exactness)),
        ("grid-dp-consistency", Box::new(grid_dp_consistency)),
        ("gumbel-slack-arithmetic", Box::new(gumbel_slack_arithmetic)),
        ("scale-equivariance", Box::new(scale_equivariance)),
        ("ln-view-consistency", Box::new(ln_view_consistency)),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check(seed) {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    failures
}

fn random_tabular(n: usize, seed: u64) -> TabularWeightModel {
    let mut rng = substream(seed, 120, 0);
    let weights: Vec<f64> = (0..1usize << n).map(|_| rng.random::<f64>()).collect();
    TabularWeightModel::from_weights(&weights).unwrap()
}

fn slack_arithmetic(_seed: u64) -> Result<String, String> {
    // Pinned values catch a dropped 1/k inside the deviation term.
    let checks = [
        (slack(6, 1), 6.0),
        (slack(4, 24), 1.0),
        (slack(49, 5), 7.668115805072326),
    ];
    for (got, want) in checks {
        if (got - want).abs() > 1e-9 {
            return Err(format!("slack value {got}, expected {want}"));
        }
    }
    Ok("sqrt(6n/k) at three pinned points".into())
}

fn slack_concentration(seed: u64) -> Result<String, String> {
    let n = 8;
    let model = random_tabular(n, derive_seed(seed, 121, 0));
    let r = exact_weighted_rademacher(&model).map_err(|e| e.to_string())?;
    let mut singles = 0usize;
    for t in 0..100u64 {
        let cfg = BoundConfig::new(1, derive_seed(seed, 122, t)).unwrap();
        let est = estimate(&model, &cfg).map_err(|e| e.to_string())?;
        if (est.delta_bar - r).abs() <= slack(n, 1) {
            singles += 1;
        }
    }
    let mut batches = 0usize;
    for t in 0..30u64 {
        let cfg = BoundConfig::new(25, derive_seed(seed, 123, t)).unwrap();
        let est = estimate(&model, &cfg).map_err(|e| e.to_string())?;
        if (est.delta_bar - r).abs() <= slack(n, 25) {
            batches += 1;
        }
    }
    let detail = format!("single {singles}/100, k=25 batch {batches}/30");
    if singles >= 95 && batches >= 29 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tabular_sandwich(seed: u64) -> Result<String, String> {
    let mut lb_ok = 0usize;
    let mut ub_ok = 0usize;
    let trials = 100u64;
    for t in 0..trials {
        let model = random_tabular(10, derive_seed(seed, 124, t));
        let cfg = BoundConfig::new(1, derive_seed(seed, 125, t)).unwrap();
        let r = bound(&model, &cfg).map_err(|e| e.to_string())?;
        let z = brute_force_log2_z(&model);
        if r.psi_lb <= z + 1e-9 {
            lb_ok += 1;
        }
        if z <= r.psi_ub + 1e-9 {
            ub_ok += 1;
        }
    }
    let detail = format!("lb {lb_ok}/{trials}, ub {ub_ok}/{trials}");
    if lb_ok as f64 >= 0.93 * trials as f64 && ub_ok as f64 >= 0.93 * trials as f64 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn graph_cut_exactness(seed: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    for t in 0..10u64 {
        let model = GridIsingModel::generate(3, 3, 1.0 + t as f64 * 0.4, derive_seed(seed, 126, t))
            .map_err(|e| e.to_string())?;
        let c = sample_rademacher(9, &mut substream(derive_seed(seed, 127, t), 128, 0)).unwrap();
        let u = to_unary(&c);
        let got = model.map_oracle(&u).map_err(|e| e.to_string())?;
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << 9) {
            let x: Vec<i8> = (0..9).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            best = best.max(u.total(&x) + model.log2_weight(&x));
        }
        worst = worst.max((got.value - best).abs());
    }
    let detail = format!("max |cut - brute| = {worst:.2e} over 10 grids");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sat_delta_exactness(seed: u64) -> Result<String, String> {
    let n = 10;
    for t in 0..10u64 {
        let mut rng = substream(derive_seed(seed, 129, t), 130, 0);
        let f = loop {
            let clauses: Vec<Vec<i32>> = (0..30)
                .map(|_| {
                    let mut vars: Vec<i32> = Vec::new();
                    while vars.len() < 3 {
                        let v = rng.random_range(1..=n as i32);
                        if !vars.contains(&v) {
                            vars.push(v);
                        }
                    }
                    vars.iter()
                        .map(|&v| if rng.random::<bool>() { v } else { -v })
                        .collect()
                })
                .collect();
            let f = CnfFormula::new(n, clauses).unwrap();
            if brute_force_model_count(&f).unwrap() > 0 {
                break f;
            }
        };
        let c = sample_rademacher(n, &mut rng).unwrap();
        let (v, witness) = delta_sat(&f, &c).map_err(|e| e.to_string())?;
        let mut best = i64::MIN;
        for mask in 0u32..(1 << n) {
            let x: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            if f.is_satisfied_by(&x) {
                best = best.max(c.dot(&x) as i64);
            }
        }
        if v != best || !f.is_satisfied_by(&witness) {
            return Err(format!("trial {t}: solver {v} vs exhaustive {best}"));
        }
    }
    Ok("10 random 10-var 3-CNFs exact".into())
}

fn grid_dp_consistency(seed: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    for (t, (rows, cols)) in [(2usize, 2usize), (3, 3), (2, 4)].iter().enumerate() {
        let model =
            GridIsingModel::generate(*rows, *cols, 2.0, derive_seed(seed, 131, t as u64))
                .map_err(|e| e.to_string())?;
        let n = rows * cols;
        let mut thetas = Vec::with_capacity(1 << n);
        for mask in 0u32..(1u32 << n) {
            let x: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            thetas.push(model.theta(&x));
        }
        let brute = ln_sum_exp(&thetas);
        let dp = grid_exact_ln_z(&model).map_err(|e| e.to_string())?;
        worst = worst.max((dp - brute).abs());
    }
    let detail = format!("max |dp - brute| = {worst:.2e}");
    if worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gumbel_slack_arithmetic(_seed: u64) -> Result<String, String> {
    let eps = gumbel_slack(4, 2, 2.0 / std::f64::consts::E);
    if (eps - 8.0).abs() < 1e-9 {
        Ok(format!("eps_g(4,2,2/e) = {eps}"))
    } else {
        Err(format!("eps_g(4,2,2/e) = {eps}, expected 8"))
    }
}

fn scale_equivariance(seed: u64) -> Result<String, String> {
    let base = random_tabular(8, derive_seed(seed, 132, 0));
    let c = sample_rademacher(8, &mut substream(derive_seed(seed, 133, 0), 134, 0)).unwrap();
    let u = to_unary(&c);
    let reference = base.perturbed_max(&u).map_err(|e| e.to_string())?;
    for a in [0.5f64, 2.0, 10.0] {
        let table: Vec<f64> = base.log2_weights().iter().map(|l| l + a.log2()).collect();
        let scaled = TabularWeightModel::from_log2_weights(table).unwrap();
        let got = scaled.perturbed_max(&u).map_err(|e| e.to_string())?;
        if (got.value - a.log2() - reference.value).abs() > 1e-9 || got.state != reference.state {
            return Err(format!("scale {a} broke equivariance"));
        }
    }
    Ok("a in {1/2, 2, 10} shift the oracle by exactly log2 a".into())
}

fn ln_view_consistency(seed: u64) -> Result<String, String> {
    let model = random_tabular(8, derive_seed(seed, 135, 0));
    let cfg = BoundConfig::new(3, derive_seed(seed, 136, 0)).unwrap();
    let r = bound(&model, &cfg).map_err(|e| e.to_string())?;
    let v = r.ln_view();
    if v.delta_bar == r.delta_bar * LN_2 && v.psi_lb == r.psi_lb * LN_2 && v.psi_ub == r.psi_ub * LN_2
    {
        Ok("ln view is exactly log2 x ln 2".into())
    } else {
        Err("ln view mismatch".into())
    }
}
