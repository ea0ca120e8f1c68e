//! CNF bound tables: per instance, means and standard deviations of the
//! estimator and both bound families over independent trials.
//!
//! The perturbed maximization runs on the built-in branch-and-bound by
//! default. With `--maxsat-cmd` the sign-perturbed problems are exported
//! as WCNF and solved externally; Gumbel columns then stay internal and
//! are skipped for instances too large to enumerate comfortably.

use std::path::PathBuf;
use std::process::Command;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use radbound::bounds::bound;
use radbound::error::Error;
use radbound::gumbel::{gumbel_report, GumbelConfig};
use radbound::rng::derive_seed;
use radbound::satcount::{
    brute_force_model_count, export_wcnf, parse_dimacs, parse_maxsat_assignment,
    parse_maxsat_result, CnfFormula, CnfWeightModel, MAX_COUNT_VARS,
};
use radbound::types::{BoundConfig, BoundReport, Maximizer, RealUnaryPerturbation, WeightModel};

const STREAM_BOUND: u64 = 0x61;
const STREAM_GUMBEL: u64 = 0x62;
const GUMBEL_ALPHA: f64 = 0.05;

pub struct SatParams {
    pub seed: u64,
    pub k: usize,
    pub trials: u64,
    pub paths: Vec<PathBuf>,
    pub maxsat_cmd: Option<String>,
}

/// Sign-perturbed oracle backed by an external MaxSAT solver. Only the
/// ±1 perturbations of the estimator can be encoded with unit soft
/// clauses, so real-valued unaries are refused.
struct ExternalCnfModel {
    formula: CnfFormula,
    template: String,
}

impl ExternalCnfModel {
    fn recover_signs(&self, u: &RealUnaryPerturbation) -> radbound::Result<Vec<i8>> {
        u.per_variable()
            .iter()
            .map(|&(lo, hi)| {
                if lo == -hi && (hi == 1.0 || hi == -1.0) {
                    Ok(if hi > 0.0 { 1i8 } else { -1i8 })
                } else {
                    Err(Error::InvalidParameter(
                        "external MaxSAT oracle supports ±1 sign perturbations only".into(),
                    ))
                }
            })
            .collect()
    }
}

impl WeightModel for ExternalCnfModel {
    fn dimension(&self) -> usize {
        self.formula.num_vars()
    }

    fn perturbed_max(&self, u: &RealUnaryPerturbation) -> radbound::Result<Maximizer> {
        let n = self.formula.num_vars();
        let signs = self.recover_signs(u)?;
        let c = radbound::types::PerturbationVector::new(signs)?;
        let file = tempfile::Builder::new()
            .prefix("radbound")
            .suffix(".wcnf")
            .tempfile()?;
        export_wcnf(&self.formula, &c, file.path())?;
        let rendered = self
            .template
            .replace("{}", &file.path().display().to_string());
        let output = Command::new("sh").arg("-c").arg(&rendered).output()?;
        let stdout = String::from_utf8_lossy(&output.stdout);
        let cost = parse_maxsat_result(&stdout)?;
        let value = n as f64 - 2.0 * cost as f64;
        let state = parse_maxsat_assignment(&stdout, n)?;
        // Cross-check the solver's cost against its own model.
        if !self.formula.is_satisfied_by(&state) || (c.dot(&state) - value).abs() > 1e-9 {
            return Err(Error::UnknownResult);
        }
        Ok(Maximizer { value, state })
    }

    fn log2_w_min(&self) -> Option<f64> {
        Some(0.0)
    }

    fn log2_w_max(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[derive(Serialize, Clone, Copy)]
struct MeanStd {
    mean: f64,
    std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    };
    MeanStd { mean, std }
}

#[derive(Serialize)]
struct InstanceRow {
    name: String,
    num_vars: usize,
    num_clauses: usize,
    /// ln of the exact model count when enumerable, absent otherwise.
    ln_z: Option<f64>,
    status: &'static str,
    delta_bar_ln: Option<MeanStd>,
    psi_ub_ln: Option<MeanStd>,
    theta_ub: Option<MeanStd>,
    psi_lb_ln: Option<MeanStd>,
    theta_lb: Option<MeanStd>,
    reports: Vec<BoundReport>,
}

fn instance_row(params: &SatParams, index: usize, path: &PathBuf) -> Result<InstanceRow> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let formula = parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
    let num_vars = formula.num_vars();
    let num_clauses = formula.num_clauses();

    let ln_z = if num_vars <= MAX_COUNT_VARS {
        let count = brute_force_model_count(&formula)?;
        if count == 0 {
            return Ok(InstanceRow {
                name,
                num_vars,
                num_clauses,
                ln_z: None,
                status: "unsat",
                delta_bar_ln: None,
                psi_ub_ln: None,
                theta_ub: None,
                psi_lb_ln: None,
                theta_lb: None,
                reports: Vec::new(),
            });
        }
        Some((count as f64).ln())
    } else {
        None
    };

    let external = params.maxsat_cmd.as_ref().map(|template| ExternalCnfModel {
        formula: formula.clone(),
        template: template.clone(),
    });
    let internal = CnfWeightModel(formula.clone());
    let delta_model: &dyn WeightModel = match &external {
        Some(m) => m,
        None => &internal,
    };
    // Real-valued Gumbel unaries cannot go through the WCNF encoding;
    // with an external solver configured they stay on the internal
    // search, which is only reasonable at enumerable sizes.
    let gumbel_model: Option<&dyn WeightModel> = if external.is_none() || num_vars <= MAX_COUNT_VARS
    {
        Some(&internal)
    } else {
        None
    };

    let mut reports = Vec::with_capacity(params.trials as usize);
    let mut deltas = Vec::new();
    let mut psi_ubs = Vec::new();
    let mut psi_lbs = Vec::new();
    let mut theta_ubs = Vec::new();
    let mut theta_lbs = Vec::new();
    for t in 0..params.trials {
        let idx = (index as u64) << 32 | t;
        let cfg = BoundConfig::new(params.k, derive_seed(params.seed, STREAM_BOUND, idx))?;
        let report = match bound(delta_model, &cfg) {
            Ok(r) => r,
            Err(Error::Unsat) => {
                return Ok(InstanceRow {
                    name,
                    num_vars,
                    num_clauses,
                    ln_z,
                    status: "unsat",
                    delta_bar_ln: None,
                    psi_ub_ln: None,
                    theta_ub: None,
                    psi_lb_ln: None,
                    theta_lb: None,
                    reports: Vec::new(),
                })
            }
            Err(e) => return Err(e.into()),
        };
        let v = report.ln_view();
        deltas.push(v.delta_bar);
        psi_lbs.push(v.psi_lb);
        psi_ubs.push(v.psi_ub);
        if let Some(model) = gumbel_model {
            let gcfg = GumbelConfig::new(
                params.k,
                GUMBEL_ALPHA,
                derive_seed(params.seed, STREAM_GUMBEL, idx),
            )?;
            let g = gumbel_report(model, &gcfg)?;
            theta_ubs.push(g.theta_ub);
            theta_lbs.push(g.theta_lb);
        }
        reports.push(report);
    }

    Ok(InstanceRow {
        name,
        num_vars,
        num_clauses,
        ln_z,
        status: "ok",
        delta_bar_ln: Some(mean_std(&deltas)),
        psi_ub_ln: Some(mean_std(&psi_ubs)),
        theta_ub: (!theta_ubs.is_empty()).then(|| mean_std(&theta_ubs)),
        psi_lb_ln: Some(mean_std(&psi_lbs)),
        theta_lb: (!theta_lbs.is_empty()).then(|| mean_std(&theta_lbs)),
        reports,
    })
}

fn compute_rows(params: &SatParams) -> Result<Vec<InstanceRow>> {
    params
        .paths
        .par_iter()
        .enumerate()
        .map(|(i, path)| instance_row(params, i, path))
        .collect()
}

fn csv_opt(v: Option<MeanStd>) -> (String, String) {
    match v {
        Some(ms) => (format!("{}", ms.mean), format!("{}", ms.std)),
        None => (String::new(), String::new()),
    }
}

pub fn run_csv(params: &SatParams) -> Result<String> {
    let rows = compute_rows(params)?;
    let mut out = String::from(
        "name,num_vars,num_clauses,ln_z,delta_bar_ln,delta_bar_ln_std,psi_ub_ln,psi_ub_ln_std,\
         theta_ub,theta_ub_std,psi_lb_ln,psi_lb_ln_std,theta_lb,theta_lb_std,status\n",
    );
    for r in &rows {
        let ln_z = r.ln_z.map(|v| format!("{v}")).unwrap_or_default();
        let (d, ds) = csv_opt(r.delta_bar_ln);
        let (ub, ubs) = csv_opt(r.psi_ub_ln);
        let (tu, tus) = csv_opt(r.theta_ub);
        let (lb, lbs) = csv_opt(r.psi_lb_ln);
        let (tl, tls) = csv_opt(r.theta_lb);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.num_vars,
            r.num_clauses,
            ln_z,
            d,
            ds,
            ub,
            ubs,
            tu,
            tus,
            lb,
            lbs,
            tl,
            tls,
            r.status
        ));
    }
    Ok(out)
}

#[derive(Serialize)]
struct SatDoc {
    mode: &'static str,
    seed: u64,
    k: usize,
    trials: u64,
    rows: Vec<InstanceRow>,
}

pub fn run_json(params: &SatParams) -> Result<String> {
    let rows = compute_rows(params)?;
    let doc = SatDoc {
        mode: "sat-bounds",
        seed: params.seed,
        k: params.k,
        trials: params.trials,
        rows,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}
