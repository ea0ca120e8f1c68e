//! Exact maximum flow / minimum cut on sparse directed graphs.
//!
//! Dinic's algorithm: repeated BFS level graphs with blocking-flow DFS.
//! Augmenting-path search suits the workload here (small grid-shaped
//! networks solved many times). Capacities are real-valued; residuals
//! below [`FLOW_EPS`] count as exhausted.

use crate::error::{Error, Result};

/// Residuals below this are treated as zero.
pub const FLOW_EPS: f64 = 1e-12;

/// Endpoint of an arc: one of the two distinguished terminals or an
/// inner node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Source,
    Sink,
    Inner(usize),
}

/// Value and cut certificate of a solved network.
#[derive(Debug, Clone)]
pub struct MaxFlowResult {
    pub flow_value: f64,
    /// Per inner node: true if the node lies on the source side of the
    /// returned minimum cut (the maximal source side: nodes with no
    /// residual path to the sink).
    pub source_side: Vec<bool>,
}

/// A directed flow network with implicit source/sink terminals.
/// Every arc is stored with a paired reverse arc for residual bookkeeping.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    inner_count: usize,
    to: Vec<u32>,
    cap: Vec<f64>,      // residual capacities, mutated by max_flow
    orig_cap: Vec<f64>, // as-built capacities, for cut certificates
    adj: Vec<Vec<u32>>, // per node (inner nodes, then source, then sink)
}

impl FlowNetwork {
    pub fn new(inner_count: usize) -> Self {
        Self {
            inner_count,
            to: Vec::new(),
            cap: Vec::new(),
            orig_cap: Vec::new(),
            adj: vec![Vec::new(); inner_count + 2],
        }
    }

    fn node_id(&self, node: Node) -> Result<usize> {
        match node {
            Node::Source => Ok(self.inner_count),
            Node::Sink => Ok(self.inner_count + 1),
            Node::Inner(i) if i < self.inner_count => Ok(i),
            Node::Inner(i) => Err(Error::InvalidParameter(format!(
                "node index {i} out of range (inner count {})",
                self.inner_count
            ))),
        }
    }

    /// Adds a directed arc with the given capacity (reverse capacity 0).
    pub fn add_arc(&mut self, from: Node, to: Node, cap: f64) -> Result<usize> {
        if cap < 0.0 || !cap.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "arc capacity must be finite and non-negative, got {cap}"
            )));
        }
        let u = self.node_id(from)?;
        let v = self.node_id(to)?;
        if u == v {
            return Err(Error::InvalidParameter("self-loop arc".into()));
        }
        let id = self.to.len();
        self.to.push(v as u32);
        self.cap.push(cap);
        self.orig_cap.push(cap);
        self.adj[u].push(id as u32);
        self.to.push(u as u32);
        self.cap.push(0.0);
        self.orig_cap.push(0.0);
        self.adj[v].push((id + 1) as u32);
        Ok(id)
    }

    fn bfs_levels(&self, source: usize, sink: usize) -> Option<Vec<i32>> {
        let mut level = vec![-1i32; self.inner_count + 2];
        level[source] = 0;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e as usize] as usize;
                if level[v] < 0 && self.cap[e as usize] > FLOW_EPS {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[sink] >= 0).then_some(level)
    }

    fn blocking_dfs(
        &mut self,
        u: usize,
        sink: usize,
        pushed: f64,
        level: &[i32],
        iter: &mut [usize],
    ) -> f64 {
        if u == sink {
            return pushed;
        }
        while iter[u] < self.adj[u].len() {
            let e = self.adj[u][iter[u]] as usize;
            let v = self.to[e] as usize;
            if level[v] == level[u] + 1 && self.cap[e] > FLOW_EPS {
                let d = self.blocking_dfs(v, sink, pushed.min(self.cap[e]), level, iter);
                if d > FLOW_EPS {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            iter[u] += 1;
        }
        0.0
    }

    /// Computes the maximum flow and a minimum-cut certificate.
    ///
    /// Deterministic: traversal follows arc insertion order. Consumes the
    /// residual capacities; call on a freshly built network.
    pub fn max_flow(&mut self) -> MaxFlowResult {
        let source = self.inner_count;
        let sink = self.inner_count + 1;
        let mut flow = 0.0;
        while let Some(level) = self.bfs_levels(source, sink) {
            let mut iter = vec![0usize; self.inner_count + 2];
            loop {
                let pushed = self.blocking_dfs(source, sink, f64::INFINITY, &level, &mut iter);
                if pushed <= FLOW_EPS {
                    break;
                }
                flow += pushed;
            }
        }

        // Maximal source side: nodes that cannot reach the sink through
        // residual arcs. Computed by walking residual arcs backwards.
        let mut reaches_sink = vec![false; self.inner_count + 2];
        reaches_sink[sink] = true;
        let mut queue = std::collections::VecDeque::from([sink]);
        while let Some(v) = queue.pop_front() {
            for &f in &self.adj[v] {
                // Arc f is v->u; its pair f^1 is the arc u->v whose residual
                // decides whether u can step into v.
                let u = self.to[f as usize] as usize;
                if !reaches_sink[u] && self.cap[(f ^ 1) as usize] > FLOW_EPS {
                    reaches_sink[u] = true;
                    queue.push_back(u);
                }
            }
        }
        let source_side = (0..self.inner_count).map(|i| !reaches_sink[i]).collect();
        MaxFlowResult {
            flow_value: flow,
            source_side,
        }
    }

    /// Total as-built capacity of arcs crossing from the source side to the
    /// sink side of the given labeling (terminals implicit).
    pub fn cut_capacity(&self, source_side: &[bool]) -> f64 {
        let side = |id: usize| {
            if id == self.inner_count {
                true
            } else if id == self.inner_count + 1 {
                false
            } else {
                source_side[id]
            }
        };
        let mut total = 0.0;
        for (u, arcs) in self.adj.iter().enumerate() {
            for &e in arcs {
                let v = self.to[e as usize] as usize;
                if side(u) && !side(v) {
                    total += self.orig_cap[e as usize];
                }
            }
        }
        total
    }

    pub fn inner_count(&self) -> usize {
        self.inner_count
    }
}
