//! Read-only adjacency structure with O(1) degree access.
//!
//! Vertices are `0..n`. Arcs are stored in CSR form; an undirected edge is
//! stored as two arcs of equal weight. The original edge list is kept so a
//! graph serializes back to the exact file it was parsed from.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::oracle::BoolMatrix;

/// Default exponent `c` of the weight cap `n^c`.
pub const DEFAULT_WEIGHT_EXPONENT: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("negative weight {weight} on edge ({u}, {v})")]
    NegativeWeight { u: usize, v: usize, weight: i64 },
    #[error("weight {weight} on edge ({u}, {v}) exceeds cap {cap}")]
    WeightTooLarge {
        u: usize,
        v: usize,
        weight: u64,
        cap: u64,
    },
    #[error("graph too large: {0}")]
    TooLarge(String),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    /// `None` for unweighted graphs.
    pub w: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    weighted: bool,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Option<Vec<u64>>,
    edges: Vec<Edge>,
}

/// Maximum and average out-degree. The average is kept exact as `sum / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeStats {
    pub max_degree: usize,
    pub degree_sum: u64,
    pub n: usize,
}

impl DegreeStats {
    pub fn avg_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.degree_sum as f64 / self.n as f64
        }
    }
}

fn weight_cap(n: usize, exponent: u32) -> u64 {
    (n.max(1) as u64).saturating_pow(exponent)
}

impl Graph {
    pub fn from_edge_list(
        n: usize,
        edges: &[(usize, usize)],
        directed: bool,
    ) -> Result<Self, GraphError> {
        let raw: Vec<(usize, usize, Option<i64>)> =
            edges.iter().map(|&(u, v)| (u, v, None)).collect();
        Self::build(n, &raw, directed, DEFAULT_WEIGHT_EXPONENT)
    }

    pub fn from_weighted_edge_list(
        n: usize,
        edges: &[(usize, usize, i64)],
        directed: bool,
    ) -> Result<Self, GraphError> {
        Self::from_weighted_edge_list_with_exponent(n, edges, directed, DEFAULT_WEIGHT_EXPONENT)
    }

    /// Weighted construction with weights capped at `n^exponent`.
    pub fn from_weighted_edge_list_with_exponent(
        n: usize,
        edges: &[(usize, usize, i64)],
        directed: bool,
        exponent: u32,
    ) -> Result<Self, GraphError> {
        let raw: Vec<_> = edges.iter().map(|&(u, v, w)| (u, v, Some(w))).collect();
        Self::build_weighted(n, &raw, directed, exponent, true)
    }

    fn build(
        n: usize,
        edges: &[(usize, usize, Option<i64>)],
        directed: bool,
        exponent: u32,
    ) -> Result<Self, GraphError> {
        Self::build_weighted(n, edges, directed, exponent, false)
    }

    fn build_weighted(
        n: usize,
        raw: &[(usize, usize, Option<i64>)],
        directed: bool,
        exponent: u32,
        weighted: bool,
    ) -> Result<Self, GraphError> {
        if n > u32::MAX as usize - 1 {
            return Err(GraphError::TooLarge(format!("{n} vertices")));
        }
        let cap = weight_cap(n, exponent);
        let mut edges = Vec::with_capacity(raw.len());
        for &(u, v, w) in raw {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            let w = match (weighted, w) {
                (false, _) => None,
                (true, w) => {
                    let w = w.unwrap_or(1);
                    if w < 0 {
                        return Err(GraphError::NegativeWeight { u, v, weight: w });
                    }
                    let w = w as u64;
                    if w > cap {
                        return Err(GraphError::WeightTooLarge {
                            u,
                            v,
                            weight: w,
                            cap,
                        });
                    }
                    Some(w)
                }
            };
            edges.push(Edge {
                u: u as u32,
                v: v as u32,
                w,
            });
        }

        let arc_count = if directed {
            edges.len()
        } else {
            2 * edges.len()
        };
        let mut offsets = vec![0usize; n + 1];
        for e in &edges {
            offsets[e.u as usize + 1] += 1;
            if !directed {
                offsets[e.v as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; arc_count];
        let mut weights = weighted.then(|| vec![0u64; arc_count]);
        let mut put = |from: u32, to: u32, w: Option<u64>| {
            let slot = &mut fill[from as usize];
            targets[*slot] = to;
            if let (Some(ws), Some(w)) = (weights.as_mut(), w) {
                ws[*slot] = w;
            }
            *slot += 1;
        };
        for e in &edges {
            put(e.u, e.v, e.w);
            if !directed {
                put(e.v, e.u, e.w);
            }
        }
        Ok(Self {
            n,
            directed,
            weighted,
            offsets,
            targets,
            weights,
            edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges as given (undirected edges count once).
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Number of stored arcs (both orientations for undirected graphs).
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Arc index range of `v`'s adjacency list.
    #[inline]
    pub fn arcs(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    #[inline]
    pub fn target(&self, arc: usize) -> usize {
        self.targets[arc] as usize
    }

    /// Arc weight; 1 on unweighted graphs.
    #[inline]
    pub fn weight(&self, arc: usize) -> u64 {
        self.weights.as_ref().map_or(1, |w| w[arc])
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.arcs(v)]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn degree_stats(&self) -> DegreeStats {
        DegreeStats {
            max_degree: (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0),
            degree_sum: self.targets.len() as u64,
            n: self.n,
        }
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.edges.len() * 12);
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.n,
            self.edges.len(),
            if self.directed {
                "directed"
            } else {
                "undirected"
            },
            if self.weighted {
                "weighted"
            } else {
                "unweighted"
            }
        );
        for e in &self.edges {
            match e.w {
                Some(w) => writeln!(out, "{} {} {}", e.u, e.v, w),
                None => writeln!(out, "{} {}", e.u, e.v),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Parses the text format: a header `n m directed|undirected weighted|unweighted`
    /// followed by `m` edge lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line, message: String| GraphError::Parse { line, message };

        let (hline, header) = lines
            .next()
            .ok_or_else(|| err(0, "missing header".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 {
            return Err(err(
                hline,
                format!("expected 4 header fields, found {}", h.len()),
            ));
        }
        let n: usize = h[0]
            .parse()
            .map_err(|e| err(hline, format!("bad vertex count: {e}")))?;
        let m: usize = h[1]
            .parse()
            .map_err(|e| err(hline, format!("bad edge count: {e}")))?;
        let directed = match h[2] {
            "directed" => true,
            "undirected" => false,
            other => {
                return Err(err(
                    hline,
                    format!("expected directed|undirected, found {other:?}"),
                ))
            }
        };
        let weighted = match h[3] {
            "weighted" => true,
            "unweighted" => false,
            other => {
                return Err(err(
                    hline,
                    format!("expected weighted|unweighted, found {other:?}"),
                ))
            }
        };

        let mut raw = Vec::with_capacity(m);
        for (lineno, line) in lines {
            if raw.len() == m {
                return Err(err(lineno, format!("more than {m} edge lines")));
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let want = if weighted { 3 } else { 2 };
            if f.len() != want {
                return Err(err(
                    lineno,
                    format!("expected {want} fields, found {}", f.len()),
                ));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| err(lineno, format!("bad vertex {s:?}: {e}")))
            };
            let u = num(f[0])?;
            let v = num(f[1])?;
            let w = if weighted {
                Some(
                    f[2].parse::<i64>()
                        .map_err(|e| err(lineno, format!("bad weight {:?}: {e}", f[2])))?,
                )
            } else {
                None
            };
            raw.push((u, v, w));
        }
        if raw.len() != m {
            return Err(err(
                0,
                format!("header announces {m} edges, found {}", raw.len()),
            ));
        }
        Self::build_weighted(n, &raw, directed, DEFAULT_WEIGHT_EXPONENT, weighted)
    }
}

/// A `k`-clique on vertices `0..k` whose edge `{k-2, k-1}` is replaced by a
/// path through `k²` inner vertices `k..k+k²`. Vertex 0 is the intended source.
pub fn gen_clique_path(k: usize) -> Result<Graph, GraphError> {
    if k < 3 {
        return Err(GraphError::InvalidParameter(format!(
            "clique-path needs k >= 3, got {k}"
        )));
    }
    let inner = k * k;
    let mut edges = Vec::with_capacity(k * (k - 1) / 2 + inner);
    for u in 0..k {
        for v in u + 1..k {
            if (u, v) != (k - 2, k - 1) {
                edges.push((u, v));
            }
        }
    }
    let mut prev = k - 2;
    for p in k..k + inner {
        edges.push((prev, p));
        prev = p;
    }
    edges.push((prev, k - 1));
    Graph::from_edge_list(k + inner, &edges, false)
}

/// Undirected star with center 0 and spike `i` joined by weight `weights[i-1]`.
pub fn gen_star(n: usize, weights: &[i64]) -> Result<Graph, GraphError> {
    if n == 0 || weights.len() != n - 1 {
        return Err(GraphError::InvalidParameter(format!(
            "star on {n} vertices needs {} weights, got {}",
            n.saturating_sub(1),
            weights.len()
        )));
    }
    let edges: Vec<_> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (0, i + 1, w))
        .collect();
    Graph::from_weighted_edge_list(n, &edges, false)
}

/// Tripartite graph of a boolean product instance plus `2d²` isolated vertices.
///
/// Layout: `I = [0,d)`, `J = [d,2d)`, `K = [2d,3d)`, isolated `[3d, 3d+2d²)`.
pub fn gen_bmm_graph(a: &BoolMatrix, b: &BoolMatrix) -> Result<Graph, GraphError> {
    let d = a.dim();
    if d == 0 || b.dim() != d {
        return Err(GraphError::InvalidParameter(format!(
            "matrix dimensions {} and {} must match and be positive",
            a.dim(),
            b.dim()
        )));
    }
    let mut edges = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if a.get(i, j) {
                edges.push((i, d + j));
            }
        }
    }
    for j in 0..d {
        for k in 0..d {
            if b.get(j, k) {
                edges.push((d + j, 2 * d + k));
            }
        }
    }
    Graph::from_edge_list(2 * d * d + 3 * d, &edges, false)
}

/// `n - 2` isolated vertices followed by a single edge `{n-2, n-1}`.
pub fn gen_isolated_plus_edge(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidParameter(format!(
            "isolated-edge needs n >= 2, got {n}"
        )));
    }
    Graph::from_edge_list(n, &[(n - 2, n - 1)], false)
}

/// Uniform simple graph with exactly `m` edges, no self-loops.
///
/// Weights are uniform in `[0, max_weight]` when `max_weight > 0`; otherwise
/// the graph is unweighted. Deterministic for a given seed.
pub fn gen_random(
    n: usize,
    m: usize,
    directed: bool,
    max_weight: u64,
    seed: u64,
) -> Result<Graph, GraphError> {
    let n64 = n as u64;
    let pairs = if directed {
        n64 * n64.saturating_sub(1)
    } else {
        n64 * n64.saturating_sub(1) / 2
    };
    if m as u64 > pairs {
        return Err(GraphError::InvalidParameter(format!(
            "{m} edges do not fit into a simple graph on {n} vertices (max {pairs})"
        )));
    }
    if pairs > usize::MAX as u64 {
        return Err(GraphError::TooLarge(format!("{n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, pairs as usize, m).into_vec();
    picked.sort_unstable();
    let decode = |idx: usize| -> (usize, usize) {
        if directed {
            let u = idx / (n - 1);
            let r = idx % (n - 1);
            (u, if r >= u { r + 1 } else { r })
        } else {
            // Row u holds pairs (u, u+1..n); rows shrink by one.
            let mut u = 0;
            let mut rest = idx;
            while rest >= n - 1 - u {
                rest -= n - 1 - u;
                u += 1;
            }
            (u, u + 1 + rest)
        }
    };
    if max_weight > 0 {
        let edges: Vec<_> = picked
            .into_iter()
            .map(|i| {
                let (u, v) = decode(i);
                (u, v, rng.gen_range(0..=max_weight) as i64)
            })
            .collect();
        Graph::from_weighted_edge_list(n, &edges, directed)
    } else {
        let edges: Vec<_> = picked.into_iter().map(decode).collect();
        Graph::from_edge_list(n, &edges, directed)
    }
}
