//! Grid Ising models with random local fields and non-negative couplings,
//! and their exact MAP oracle under per-variable perturbations.
//!
//! The potential is θ(x) = Σ_i θ_i x_i + Σ_(i,j) θ_ij x_i x_j over the
//! 4-neighbor grid, with weight w(x) = exp θ(x). Non-negative couplings
//! make −log w submodular, so the perturbed maximization reduces to a
//! minimum s-t cut. Potentials are stored in natural-log units and
//! converted to log₂ only at the oracle boundary.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::maxflow::{FlowNetwork, Node};
use crate::rng::{substream, STREAM_MODEL_GEN};
use crate::types::{Maximizer, RealUnaryPerturbation, WeightModel};

/// An N×M spin glass on the 4-neighbor grid. Nodes are indexed row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIsingModel {
    rows: usize,
    cols: usize,
    theta_local: Vec<f64>, // row-major, rows*cols entries
    horiz: Vec<f64>,       // (r,c)-(r,c+1), rows*(cols-1) entries
    vert: Vec<f64>,        // (r,c)-(r+1,c), (rows-1)*cols entries
}

impl GridIsingModel {
    pub fn new(
        rows: usize,
        cols: usize,
        theta_local: Vec<f64>,
        horiz: Vec<f64>,
        vert: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension);
        }
        if theta_local.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: theta_local.len(),
            });
        }
        if horiz.len() != rows * (cols - 1) {
            return Err(Error::DimensionMismatch {
                expected: rows * (cols - 1),
                got: horiz.len(),
            });
        }
        if vert.len() != (rows - 1) * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows - 1) * cols,
                got: vert.len(),
            });
        }
        if theta_local.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("local field must be finite".into()));
        }
        if horiz.iter().chain(vert.iter()).any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(Error::InvalidParameter(
                "couplings must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            theta_local,
            horiz,
            vert,
        })
    }

    /// Fields uniform on [−1,1], couplings uniform on [0, coupling_max);
    /// deterministic per seed.
    pub fn generate(rows: usize, cols: usize, coupling_max: f64, seed: u64) -> Result<Self> {
        if coupling_max < 0.0 || !coupling_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling_max must be finite and non-negative, got {coupling_max}"
            )));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut rng = substream(seed, STREAM_MODEL_GEN, 0);
        let theta_local = (0..rows * cols)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let mut draw_coupling = |count: usize| -> Vec<f64> {
            (0..count)
                .map(|_| {
                    if coupling_max == 0.0 {
                        0.0
                    } else {
                        rng.random_range(0.0..coupling_max)
                    }
                })
                .collect()
        };
        let horiz = draw_coupling(rows * (cols - 1));
        let vert = draw_coupling((rows - 1) * cols);
        Self::new(rows, cols, theta_local, horiz, vert)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    pub fn node_index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn theta_local(&self, r: usize, c: usize) -> f64 {
        self.theta_local[self.node_index(r, c)]
    }

    /// Coupling on the edge (r,c)-(r,c+1).
    pub fn coupling_h(&self, r: usize, c: usize) -> f64 {
        self.horiz[r * (self.cols - 1) + c]
    }

    /// Coupling on the edge (r,c)-(r+1,c).
    pub fn coupling_v(&self, r: usize, c: usize) -> f64 {
        self.vert[r * self.cols + c]
    }

    /// Grid edges as (i, j, θ_ij) with i < j in row-major node indexing:
    /// all horizontal edges first, then all vertical edges.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let horiz = (0..self.rows).flat_map(move |r| {
            (0..self.cols - 1).map(move |c| {
                (
                    self.node_index(r, c),
                    self.node_index(r, c + 1),
                    self.coupling_h(r, c),
                )
            })
        });
        let vert = (0..self.rows.saturating_sub(1)).flat_map(move |r| {
            (0..self.cols).map(move |c| {
                (
                    self.node_index(r, c),
                    self.node_index(r + 1, c),
                    self.coupling_v(r, c),
                )
            })
        });
        horiz.chain(vert)
    }

    pub fn edge_count(&self) -> usize {
        self.horiz.len() + self.vert.len()
    }

    /// θ(x) in natural-log units.
    pub fn theta(&self, x: &[i8]) -> f64 {
        assert_eq!(x.len(), self.n(), "state length must match the grid");
        let local: f64 = self
            .theta_local
            .iter()
            .zip(x)
            .map(|(&t, &s)| t * f64::from(s))
            .sum();
        let pair: f64 = self
            .edges()
            .map(|(i, j, t)| t * f64::from(x[i]) * f64::from(x[j]))
            .sum();
        local + pair
    }

    /// log₂ w(x) = θ(x)/ln 2.
    pub fn log2_weight(&self, x: &[i8]) -> f64 {
        self.theta(x) / LN_2
    }

    /// Exact maximizer of Σ_i u_i(x_i) + log₂ w(x) by reduction to a
    /// minimum s-t cut on the grid.
    pub fn map_oracle(&self, u: &RealUnaryPerturbation) -> Result<Maximizer> {
        let n = self.n();
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }

        // Maximize F(x) = Σ_i g_i(x_i) + Σ_e q_e x_i x_j (log₂ units,
        // q_e >= 0), i.e. minimize the energy E = -F. With binary labels
        // b_i (b=1 for x=+1, sink side), the pairwise energy is
        // -q + 2q·[b_i != b_j]: a pair of opposing arcs with capacity 2q.
        // Unary energy differences become terminal arcs.
        let mut net = FlowNetwork::new(n);
        for i in 0..n {
            let h = self.theta_local[i] / LN_2;
            let e_plus = -(u.value_for(i, 1) + h); // energy of b_i = 1
            let e_minus = -(u.value_for(i, -1) - h); // energy of b_i = 0
            let d = e_plus - e_minus;
            if d > 0.0 {
                net.add_arc(Node::Source, Node::Inner(i), d)?;
            } else {
                net.add_arc(Node::Inner(i), Node::Sink, -d)?;
            }
        }
        for (i, j, t) in self.edges() {
            let q = t / LN_2;
            if q > 0.0 {
                net.add_arc(Node::Inner(i), Node::Inner(j), 2.0 * q)?;
                net.add_arc(Node::Inner(j), Node::Inner(i), 2.0 * q)?;
            }
        }

        let result = net.max_flow();
        let state: Vec<i8> = result
            .source_side
            .iter()
            .map(|&on_source| if on_source { -1 } else { 1 })
            .collect();
        // The cut pins down the state; recomputing the objective at the
        // state keeps the returned value exactly attained.
        let value = u.total(&state) + self.log2_weight(&state);
        Ok(Maximizer { value, state })
    }

    /// log₂ w_max via the oracle with zero perturbation.
    pub fn log2_w_max(&self) -> f64 {
        let zeros = RealUnaryPerturbation::zeros(self.n()).expect("n >= 1");
        self.map_oracle(&zeros)
            .expect("zero perturbation is always valid")
            .value
    }

    /// A certified lower bound on log₂ min_x w(x):
    /// (−Σ_i |θ_i| − Σ_ij θ_ij)/ln 2. All weights here are strictly positive.
    pub fn log2_w_min_lower_bound(&self) -> f64 {
        let fields: f64 = self.theta_local.iter().map(|t| t.abs()).sum();
        let couplings: f64 = self.horiz.iter().chain(self.vert.iter()).sum();
        (-fields - couplings) / LN_2
    }

    /// Plain-text serialization: `rows cols` header, row-major θ_i one grid
    /// row per line, then one `i j theta_ij` line per edge. Floats use the
    /// shortest round-trip representation.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| format!("{}", self.theta_local(r, c)))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        for (i, j, t) in self.edges() {
            out.push_str(&format!("{i} {j} {t}\n"));
        }
        out
    }

    /// Parses the [`GridIsingModel::to_text`] format. Edges may appear in
    /// any order but the 4-neighbor grid must be covered exactly once.
    pub fn from_text(text: &str) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text.lines().enumerate();

        let (line_no, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty input".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(parse_err(line_no + 1, "expected `rows cols` header".into()));
        }
        let rows: usize = dims[0]
            .parse()
            .map_err(|_| parse_err(line_no + 1, "bad row count".into()))?;
        let cols: usize = dims[1]
            .parse()
            .map_err(|_| parse_err(line_no + 1, "bad column count".into()))?;
        if rows == 0 || cols == 0 {
            return Err(parse_err(line_no + 1, "grid must be non-empty".into()));
        }

        let mut theta_local = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(rows + 1, "missing field rows".into()))?;
            let mut count = 0;
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(line_no + 1, format!("bad field value `{tok}`")))?;
                theta_local.push(v);
                count += 1;
            }
            if count != cols {
                return Err(parse_err(
                    line_no + 1,
                    format!("expected {cols} field values, got {count}"),
                ));
            }
        }

        let mut horiz = vec![f64::NAN; rows * (cols - 1)];
        let mut vert = vec![f64::NAN; (rows - 1) * cols];
        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(parse_err(line_no + 1, "expected `i j theta` edge".into()));
            }
            let i: usize = toks[0]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad edge endpoint".into()))?;
            let j: usize = toks[1]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad edge endpoint".into()))?;
            let t: f64 = toks[2]
                .parse()
                .map_err(|_| parse_err(line_no + 1, "bad coupling value".into()))?;
            let (a, b) = (i.min(j), i.max(j));
            let (r, c) = (a / cols, a % cols);
            let slot = if b == a + 1 && c + 1 < cols {
                &mut horiz[r * (cols - 1) + c]
            } else if b == a + cols && r + 1 < rows {
                &mut vert[r * cols + c]
            } else {
                return Err(parse_err(
                    line_no + 1,
                    format!("({i}, {j}) is not a grid edge"),
                ));
            };
            if !slot.is_nan() {
                return Err(parse_err(line_no + 1, format!("duplicate edge ({i}, {j})")));
            }
            *slot = t;
        }
        if horiz.iter().chain(vert.iter()).any(|t| t.is_nan()) {
            return Err(parse_err(0, "edge list does not cover the grid".into()));
        }
        Self::new(rows, cols, theta_local, horiz, vert)
    }
}

impl WeightModel for GridIsingModel {
    fn dimension(&self) -> usize {
        self.n()
    }

    fn perturbed_max(&self, u: &RealUnaryPerturbation) -> Result<Maximizer> {
        self.map_oracle(u)
    }

    fn log2_w_min(&self) -> Option<f64> {
        Some(self.log2_w_min_lower_bound())
    }

    fn log2_w_max(&self) -> Option<f64> {
        Some(self.log2_w_max())
    }
}
