//! End-to-end bounds over CNF indicator weights: the pipeline must
//! sandwich log₂(model count) at the advertised rate.

use rand::Rng;

use radbound::bounds::bound;
use radbound::rng::{derive_seed, substream};
use radbound::satcount::{brute_force_model_count, CnfFormula, CnfWeightModel};
use radbound::types::BoundConfig;

fn random_satisfiable_3cnf(num_vars: usize, num_clauses: usize, seed: u64) -> CnfFormula {
    let mut rng = substream(seed, 90, 0);
    loop {
        let clauses: Vec<Vec<i32>> = (0..num_clauses)
            .map(|_| {
                let mut vars: Vec<i32> = Vec::new();
                while vars.len() < 3 {
                    let v = rng.random_range(1..=num_vars as i32);
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
                vars.iter()
                    .map(|&v| if rng.random::<bool>() { v } else { -v })
                    .collect()
            })
            .collect();
        let f = CnfFormula::new(num_vars, clauses).unwrap();
        if brute_force_model_count(&f).unwrap() > 0 {
            return f;
        }
    }
}

#[test]
fn bounds_sandwich_model_counts() {
    let n = 12;
    let trials = 200u64;
    let mut ok = 0usize;
    for t in 0..trials {
        let f = random_satisfiable_3cnf(n, 30, derive_seed(0x5A7, t, 0));
        let count = brute_force_model_count(&f).unwrap();
        let log2_count = (count as f64).log2();
        let model = CnfWeightModel(f);
        let cfg = BoundConfig::new(1, derive_seed(0x5A70, t, 0)).unwrap();
        let r = bound(&model, &cfg).unwrap();
        if r.psi_lb <= log2_count + 1e-9 && log2_count <= r.psi_ub + 1e-9 {
            ok += 1;
        }
    }
    let rate = ok as f64 / trials as f64;
    assert!(rate >= 0.93, "sandwich rate {rate}");
}

#[test]
fn unconstrained_formula_is_sandwiched_with_equality_above() {
    // No clauses: every assignment satisfies, so log₂ Z = n exactly and
    // δ(c, w) = n for every c.
    let n = 10;
    let f = CnfFormula::new(n, vec![]).unwrap();
    let model = CnfWeightModel(f);
    let mut ok = 0usize;
    let trials = 50u64;
    for t in 0..trials {
        let cfg = BoundConfig::new(1, derive_seed(0x5A71, t, 0)).unwrap();
        let r = bound(&model, &cfg).unwrap();
        assert_eq!(r.delta_bar, n as f64);
        if r.psi_lb <= n as f64 && n as f64 <= r.psi_ub {
            ok += 1;
        }
    }
    assert!(ok as f64 / trials as f64 >= 0.93, "rate {}/{trials}", ok);
}

#[test]
fn unsat_formula_propagates_through_the_pipeline() {
    let f = CnfFormula::new(2, vec![vec![1], vec![-1]]).unwrap();
    let model = CnfWeightModel(f);
    let cfg = BoundConfig::new(1, 3).unwrap();
    assert!(matches!(
        bound(&model, &cfg),
        Err(radbound::Error::Unsat)
    ));
}
