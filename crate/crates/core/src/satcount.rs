//! Indicator weight functions from CNF formulas.
//!
//! For w(x) = 1 iff x satisfies F, the perturbed maximization
//! max_{x ⊨ F} ⟨c,x⟩ equals n − 2·min_{x ⊨ F} Hamming(c, x): a partial
//! MaxSAT problem with hard clauses F and unit soft clauses x_i = c_i.
//! The built-in solver is an exact branch-and-bound with unit propagation;
//! a WCNF writer and MaxSAT output parser cover external solvers.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{Maximizer, PerturbationVector, RealUnaryPerturbation, WeightModel};

/// A CNF formula over variables 1..=num_vars. Literals are signed indices.
/// Clauses are normalized on construction: duplicate literals dropped,
/// tautological clauses removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut normalized = Vec::with_capacity(clauses.len());
        for clause in clauses {
            if clause.is_empty() {
                return Err(Error::InvalidParameter("empty clause".into()));
            }
            let mut seen: Vec<i32> = Vec::with_capacity(clause.len());
            let mut tautological = false;
            for lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(Error::InvalidParameter(format!(
                        "literal {lit} out of range for {num_vars} variables"
                    )));
                }
                if seen.contains(&-lit) {
                    tautological = true;
                }
                if !seen.contains(&lit) {
                    seen.push(lit);
                }
            }
            if !tautological {
                normalized.push(seen);
            }
        }
        Ok(Self {
            num_vars,
            clauses: normalized,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Evaluates the formula at a ±1 state (x_i = +1 means variable i true).
    pub fn is_satisfied_by(&self, x: &[i8]) -> bool {
        debug_assert_eq!(x.len(), self.num_vars);
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let v = x[lit.unsigned_abs() as usize - 1];
                (lit > 0) == (v > 0)
            })
        })
    }
}

/// Parses DIMACS CNF: `p cnf V C` header, `c` comment lines, clauses
/// terminated by 0 (possibly spanning lines). A line starting with `%`
/// ends the input (common benchmark trailer).
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "duplicate header".into(),
                });
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[1] != "cnf" {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected `p cnf <vars> <clauses>`".into(),
                });
            }
            let vars = toks[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: "bad variable count".into(),
            })?;
            let count = toks[3].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: "bad clause count".into(),
            })?;
            header = Some((vars, count));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(Error::Parse {
                line: line_no,
                msg: "clause before header".into(),
            });
        };
        last_line = line_no;
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad literal `{tok}`"),
            })?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "empty clause".into(),
                    });
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > vars {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("literal {lit} exceeds declared {vars} variables"),
                    });
                }
                current.push(lit);
            }
        }
    }

    let Some((vars, declared)) = header else {
        return Err(Error::Parse {
            line: 1,
            msg: "missing `p cnf` header".into(),
        });
    };
    if !current.is_empty() {
        return Err(Error::Parse {
            line: last_line,
            msg: "unterminated clause".into(),
        });
    }
    if clauses.len() != declared {
        return Err(Error::Parse {
            line: last_line.max(1),
            msg: format!("header declares {declared} clauses, found {}", clauses.len()),
        });
    }
    CnfFormula::new(vars, clauses)
}

/// Exact branch-and-bound maximizer of Σ_i u_i(x_i) over satisfying
/// assignments. Branches on the variable occurring in the most unsatisfied
/// clauses, propagates units at every node, and prunes with the admissible
/// bound "current value plus the best case for every unassigned variable".
pub fn max_weighted(f: &CnfFormula, u: &RealUnaryPerturbation) -> Result<Maximizer> {
    if u.len() != f.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: f.num_vars(),
            got: u.len(),
        });
    }
    let mut search = Search {
        formula: f,
        unary: u,
        assign: vec![0i8; f.num_vars()],
        // penalty = Σ over assigned vars of (best side − chosen side);
        // pruning on penalty alone is the admissible bound, since every
        // unassigned variable can still take its best side for free.
        penalty: 0.0,
        best_penalty: f64::INFINITY,
        best_state: None,
    };
    search.recurse();
    match search.best_state {
        Some(state) => Ok(Maximizer {
            value: u.total(&state),
            state,
        }),
        None => Err(Error::Unsat),
    }
}

struct Search<'a> {
    formula: &'a CnfFormula,
    unary: &'a RealUnaryPerturbation,
    assign: Vec<i8>,
    penalty: f64,
    best_penalty: f64,
    best_state: Option<Vec<i8>>,
}

impl Search<'_> {
    fn set(&mut self, var: usize, spin: i8, trail: &mut Vec<usize>) {
        let best = self
            .unary
            .value_for(var, -1)
            .max(self.unary.value_for(var, 1));
        self.assign[var] = spin;
        self.penalty += best - self.unary.value_for(var, spin);
        trail.push(var);
    }

    fn undo(&mut self, trail: &[usize]) {
        for &var in trail {
            let best = self
                .unary
                .value_for(var, -1)
                .max(self.unary.value_for(var, 1));
            self.penalty -= best - self.unary.value_for(var, self.assign[var]);
            self.assign[var] = 0;
        }
    }

    /// Unit propagation to fixpoint. Returns false on conflict.
    fn propagate(&mut self, trail: &mut Vec<usize>) -> bool {
        loop {
            let mut forced: Option<(usize, i8)> = None;
            for clause in self.formula.clauses() {
                let mut satisfied = false;
                let mut unassigned: Option<i32> = None;
                let mut unassigned_count = 0;
                for &lit in clause {
                    let v = self.assign[lit.unsigned_abs() as usize - 1];
                    if v == 0 {
                        unassigned_count += 1;
                        unassigned = Some(lit);
                    } else if (lit > 0) == (v > 0) {
                        satisfied = true;
                        break;
                    }
                }
                if satisfied {
                    continue;
                }
                match unassigned_count {
                    0 => return false,
                    1 => {
                        let lit = unassigned.expect("counted one unassigned literal");
                        forced = Some((
                            lit.unsigned_abs() as usize - 1,
                            if lit > 0 { 1 } else { -1 },
                        ));
                        break;
                    }
                    _ => {}
                }
            }
            match forced {
                Some((var, spin)) => self.set(var, spin, trail),
                None => return true,
            }
        }
    }

    /// The unassigned variable occurring in the most unsatisfied clauses,
    /// or None when every clause is already satisfied.
    fn pick_branch_var(&self) -> Option<usize> {
        let mut counts = vec![0usize; self.formula.num_vars()];
        let mut any = false;
        for clause in self.formula.clauses() {
            let satisfied = clause.iter().any(|&lit| {
                let v = self.assign[lit.unsigned_abs() as usize - 1];
                v != 0 && (lit > 0) == (v > 0)
            });
            if satisfied {
                continue;
            }
            any = true;
            for &lit in clause {
                let var = lit.unsigned_abs() as usize - 1;
                if self.assign[var] == 0 {
                    counts[var] += 1;
                }
            }
        }
        if !any {
            return None;
        }
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
            .map(|(i, _)| i)
    }

    fn recurse(&mut self) {
        let mut trail = Vec::new();
        if !self.propagate(&mut trail) {
            self.undo(&trail);
            return;
        }
        if self.penalty >= self.best_penalty {
            self.undo(&trail);
            return;
        }
        match self.pick_branch_var() {
            None => {
                // All clauses satisfied: finish free variables at their
                // best side (zero added penalty) and record the solution.
                let state: Vec<i8> = self
                    .assign
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        if v != 0 {
                            v
                        } else if self.unary.value_for(i, 1) > self.unary.value_for(i, -1) {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect();
                self.best_penalty = self.penalty;
                self.best_state = Some(state);
            }
            Some(var) => {
                let first: i8 = if self.unary.value_for(var, 1) > self.unary.value_for(var, -1) {
                    1
                } else {
                    -1
                };
                for spin in [first, -first] {
                    let mut branch_trail = Vec::new();
                    self.set(var, spin, &mut branch_trail);
                    self.recurse();
                    self.undo(&branch_trail);
                }
            }
        }
        self.undo(&trail);
    }
}

/// δ(c, w) for the indicator weight of the formula: the exact maximum of
/// ⟨c,x⟩ over satisfying assignments, always an integer of parity n.
pub fn delta_sat(f: &CnfFormula, c: &PerturbationVector) -> Result<(i64, Vec<i8>)> {
    if c.len() != f.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: f.num_vars(),
            got: c.len(),
        });
    }
    let max = max_weighted(f, &crate::types::to_unary(c))?;
    let value = max.value.round() as i64;
    debug_assert!((max.value - value as f64).abs() < 1e-9);
    Ok((value, max.state))
}

/// Writes the perturbed problem as partial weighted CNF: hard clauses get
/// the top weight n+1, and one unit soft clause of weight 1 per variable
/// asserts x_i = c_i. The optimum soft cost s recovers δ = n − 2s.
pub fn write_wcnf(f: &CnfFormula, c: &PerturbationVector, out: &mut impl Write) -> Result<()> {
    if c.len() != f.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: f.num_vars(),
            got: c.len(),
        });
    }
    let n = f.num_vars();
    let top = n + 1;
    writeln!(out, "p wcnf {} {} {}", n, f.num_clauses() + n, top)?;
    for clause in f.clauses() {
        write!(out, "{top}")?;
        for lit in clause {
            write!(out, " {lit}")?;
        }
        writeln!(out, " 0")?;
    }
    for (i, &ci) in c.entries().iter().enumerate() {
        let lit = if ci > 0 { i as i64 + 1 } else { -(i as i64 + 1) };
        writeln!(out, "1 {lit} 0")?;
    }
    Ok(())
}

/// [`write_wcnf`] to a file path.
pub fn export_wcnf(f: &CnfFormula, c: &PerturbationVector, path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_wcnf(f, c, &mut file)?;
    file.flush()?;
    Ok(())
}

/// Extracts the optimum cost from MaxSAT solver output: the last `o <cost>`
/// line before `s OPTIMUM FOUND`. `s UNSATISFIABLE` signals unsat.
pub fn parse_maxsat_result(text: &str) -> Result<u64> {
    let mut last_o: Option<u64> = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("o ") {
            if let Ok(v) = rest.trim().parse() {
                last_o = Some(v);
            }
        } else if line.starts_with("s OPTIMUM FOUND") {
            return last_o.ok_or(Error::UnknownResult);
        } else if line.starts_with("s UNSATISFIABLE") {
            return Err(Error::Unsat);
        }
    }
    Err(Error::UnknownResult)
}

/// Extracts the model from solver `v` lines, accepting both literal lists
/// and the 0/1-string format. Returns a ±1 state.
pub fn parse_maxsat_assignment(text: &str, num_vars: usize) -> Result<Vec<i8>> {
    let mut tokens: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('v') {
            tokens.extend(rest.split_whitespace());
        }
    }
    if tokens.is_empty() {
        return Err(Error::UnknownResult);
    }
    let mut state = vec![0i8; num_vars];
    if tokens.len() == 1 && tokens[0].chars().all(|ch| ch == '0' || ch == '1') {
        let bits = tokens[0];
        if bits.len() != num_vars {
            return Err(Error::UnknownResult);
        }
        for (i, ch) in bits.chars().enumerate() {
            state[i] = if ch == '1' { 1 } else { -1 };
        }
        return Ok(state);
    }
    for tok in tokens {
        let lit: i64 = tok.parse().map_err(|_| Error::UnknownResult)?;
        if lit == 0 {
            continue;
        }
        let var = lit.unsigned_abs() as usize;
        if var > num_vars {
            return Err(Error::UnknownResult);
        }
        state[var - 1] = if lit > 0 { 1 } else { -1 };
    }
    if state.contains(&0) {
        return Err(Error::UnknownResult);
    }
    Ok(state)
}

/// Maximum formula size for exhaustive counting.
pub const MAX_COUNT_VARS: usize = 24;

/// Exact number of satisfying assignments by enumeration.
pub fn brute_force_model_count(f: &CnfFormula) -> Result<u64> {
    let n = f.num_vars();
    if n > MAX_COUNT_VARS {
        return Err(Error::DimensionTooLarge {
            n,
            cap: MAX_COUNT_VARS,
        });
    }
    // Bitmask clause evaluation: clause satisfied iff it has a positive
    // literal set or a negative literal unset.
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|clause| {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for &lit in clause {
                let bit = 1u32 << (lit.unsigned_abs() - 1);
                if lit > 0 {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg)
        })
        .collect();
    let mut count = 0u64;
    for m in 0u32..(1u32 << n) {
        if masks.iter().all(|&(pos, neg)| m & pos != 0 || !m & neg != 0) {
            count += 1;
        }
    }
    Ok(count)
}

/// The indicator weight model of a formula: w(x) = 1 iff x ⊨ F, so
/// log₂ w_min = log₂ w_max = 0.
#[derive(Debug, Clone)]
pub struct CnfWeightModel(pub CnfFormula);

impl WeightModel for CnfWeightModel {
    fn dimension(&self) -> usize {
        self.0.num_vars()
    }

    fn perturbed_max(&self, u: &RealUnaryPerturbation) -> Result<Maximizer> {
        max_weighted(&self.0, u)
    }

    fn log2_w_min(&self) -> Option<f64> {
        Some(0.0)
    }

    fn log2_w_max(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::types::sample_rademacher;
    use rand::Rng;

    #[test]
    fn parse_minimal_file() {
        let f = parse_dimacs("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(f.num_vars(), 1);
        assert_eq!(f.clauses(), &[vec![1]]);
    }

    #[test]
    fn parse_two_clauses() {
        let f = parse_dimacs("p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
        assert_eq!(f.num_clauses(), 2);
        assert_eq!(f.clauses()[1], vec![-1]);
    }

    #[test]
    fn parse_detects_clause_count_mismatch() {
        let err = parse_dimacs("p cnf 3 3\n1 0\n2 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn parse_detects_out_of_range_literal() {
        let err = parse_dimacs("p cnf 2 1\n3 0\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parse_skips_comments_and_spans_lines() {
        let f = parse_dimacs("c header\np cnf 3 2\n1 2\n3 0 -1 0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, 2, 3], vec![-1]]);
    }

    #[test]
    fn tautological_clauses_are_normalized_away() {
        let f = CnfFormula::new(2, vec![vec![1, -1], vec![2]]).unwrap();
        assert_eq!(f.clauses(), &[vec![2]]);
    }

    #[test]
    fn delta_on_unconstrained_formula_follows_c() {
        let f = CnfFormula::new(5, vec![]).unwrap();
        let c = sample_rademacher(5, &mut substream(3, 1, 0)).unwrap();
        let (v, x) = delta_sat(&f, &c).unwrap();
        assert_eq!(v, 5);
        assert_eq!(x, c.entries());
    }

    #[test]
    fn delta_on_pinned_formula_is_dot_product() {
        // Unit clauses force x = (+1, -1, +1).
        let f = CnfFormula::new(3, vec![vec![1], vec![-2], vec![3]]).unwrap();
        let c = PerturbationVector::new(vec![-1, -1, 1]).unwrap();
        let (v, x) = delta_sat(&f, &c).unwrap();
        assert_eq!(x, vec![1, -1, 1]);
        assert_eq!(v, c.dot(&x) as i64);
    }

    fn random_3cnf(num_vars: usize, num_clauses: usize, seed: u64) -> CnfFormula {
        let mut rng = substream(seed, 8, 0);
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
    fn delta_matches_exhaustive_scan() {
        for trial in 0..10 {
            let f = random_3cnf(12, 36, 100 + trial);
            let c = sample_rademacher(12, &mut substream(200 + trial, 1, 0)).unwrap();
            let (v, x) = delta_sat(&f, &c).unwrap();
            assert!(f.is_satisfied_by(&x));
            assert_eq!(v, c.dot(&x) as i64);
            let mut best = i64::MIN;
            for mask in 0u32..(1 << 12) {
                let y: Vec<i8> = (0..12).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
                if f.is_satisfied_by(&y) {
                    best = best.max(c.dot(&y) as i64);
                }
            }
            assert_eq!(v, best, "trial {trial}");
        }
    }

    #[test]
    fn delta_parity_invariant() {
        for trial in 0..10 {
            let f = random_3cnf(10, 30, 300 + trial);
            let c = sample_rademacher(10, &mut substream(400 + trial, 1, 0)).unwrap();
            let (v, _) = delta_sat(&f, &c).unwrap();
            let gap = 10 - v;
            assert!((0..=20).contains(&gap) && gap % 2 == 0, "gap = {gap}");
        }
    }

    #[test]
    fn unsat_formula_signals() {
        let f = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        let c = PerturbationVector::new(vec![1]).unwrap();
        assert!(matches!(delta_sat(&f, &c), Err(Error::Unsat)));
    }

    #[test]
    fn wcnf_single_variable_layout() {
        let f = CnfFormula::new(1, vec![vec![1]]).unwrap();
        let c = PerturbationVector::new(vec![1]).unwrap();
        let mut buf = Vec::new();
        write_wcnf(&f, &c, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p wcnf 1 2 2\n2 1 0\n1 1 0\n");
    }

    #[test]
    fn wcnf_has_one_soft_clause_per_variable() {
        let f = random_3cnf(8, 20, 17);
        let c = sample_rademacher(8, &mut substream(18, 1, 0)).unwrap();
        let mut buf = Vec::new();
        write_wcnf(&f, &c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let soft = text.lines().filter(|l| l.starts_with("1 ")).count();
        assert_eq!(soft, 8);
    }

    #[test]
    fn maxsat_output_single_o_line() {
        assert_eq!(parse_maxsat_result("o 3\ns OPTIMUM FOUND\n").unwrap(), 3);
    }

    #[test]
    fn maxsat_output_takes_last_o_line() {
        assert_eq!(parse_maxsat_result("o 5\no 3\ns OPTIMUM FOUND\n").unwrap(), 3);
    }

    #[test]
    fn maxsat_output_unsat_and_missing_status() {
        assert!(matches!(
            parse_maxsat_result("s UNSATISFIABLE\n"),
            Err(Error::Unsat)
        ));
        assert!(matches!(
            parse_maxsat_result("o 2\n"),
            Err(Error::UnknownResult)
        ));
    }

    #[test]
    fn maxsat_assignment_both_formats() {
        let lits = parse_maxsat_assignment("v 1 -2 3 0\n", 3).unwrap();
        assert_eq!(lits, vec![1, -1, 1]);
        let bits = parse_maxsat_assignment("v 101\n", 3).unwrap();
        assert_eq!(bits, vec![1, -1, 1]);
    }

    #[test]
    fn count_unconstrained() {
        let f = CnfFormula::new(4, vec![]).unwrap();
        assert_eq!(brute_force_model_count(&f).unwrap(), 16);
    }

    #[test]
    fn count_contradiction() {
        let f = CnfFormula::new(2, vec![vec![1], vec![-1]]).unwrap();
        assert_eq!(brute_force_model_count(&f).unwrap(), 0);
    }

    #[test]
    fn count_matches_second_enumeration() {
        let f = random_3cnf(10, 30, 55);
        let fast = brute_force_model_count(&f).unwrap();
        // Independent order and evaluation path.
        let mut slow = 0u64;
        for mask in (0u32..(1 << 10)).rev() {
            let x: Vec<i8> = (0..10).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            if f.is_satisfied_by(&x) {
                slow += 1;
            }
        }
        assert_eq!(fast, slow);
    }
}
