//! Brute-force ground truth, stream validators, and the boolean matrix
//! product computed through reachable distance enumeration.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::enumerators::{apsd_reachable, Distance, DistanceTriple, EnumError, OutputMode};
use crate::graph::{gen_bmm_graph, Graph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("matrix dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("matrix parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Enum(#[from] EnumError),
}

/// Square boolean matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    d: usize,
    bits: Vec<bool>,
}

impl BoolMatrix {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            bits: vec![false; d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self, OracleError> {
        let d = rows.len();
        let mut bits = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(OracleError::DimensionMismatch(d, row.len()));
            }
            bits.extend(row);
        }
        Ok(Self { d, bits })
    }

    /// Each entry set independently with probability `density`.
    pub fn random(d: usize, density: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            d,
            bits: (0..d * d)
                .map(|_| rng.gen_bool(density.clamp(0.0, 1.0)))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[i * self.d + j] = value;
    }

    /// First line `d`, then `d` lines of `d` characters `0`/`1`.
    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(OracleError::Parse {
            line: 1,
            message: "missing dimension line".into(),
        })?;
        let d: usize = header.parse().map_err(|_| OracleError::Parse {
            line: hline,
            message: format!("bad dimension {header:?}"),
        })?;
        let mut rows = Vec::with_capacity(d);
        for (line, row) in lines {
            if rows.len() == d {
                return Err(OracleError::Parse {
                    line,
                    message: "more rows than the declared dimension".into(),
                });
            }
            let parsed: Result<Vec<bool>, _> = row
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(OracleError::Parse {
                        line,
                        message: format!("unexpected character {other:?}"),
                    }),
                })
                .collect();
            let parsed = parsed?;
            if parsed.len() != d {
                return Err(OracleError::Parse {
                    line,
                    message: format!("row has {} entries, expected {d}", parsed.len()),
                });
            }
            rows.push(parsed);
        }
        if rows.len() != d {
            return Err(OracleError::Parse {
                line: text.lines().count(),
                message: format!("found {} rows, expected {d}", rows.len()),
            });
        }
        Self::from_rows(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.d);
        for i in 0..self.d {
            out.extend((0..self.d).map(|j| if self.get(i, j) { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

/// Direct triple-loop boolean product.
pub fn bool_product(a: &BoolMatrix, b: &BoolMatrix) -> Result<BoolMatrix, OracleError> {
    if a.dim() != b.dim() {
        return Err(OracleError::DimensionMismatch(a.dim(), b.dim()));
    }
    let d = a.dim();
    let mut c = BoolMatrix::zeros(d);
    for i in 0..d {
        for k in 0..d {
            c.set(i, k, (0..d).any(|j| a.get(i, j) && b.get(j, k)));
        }
    }
    Ok(c)
}

/// Boolean product read off the distance-2 pairs of the tripartite graph.
pub fn bmm_multiply(a: &BoolMatrix, b: &BoolMatrix) -> Result<BoolMatrix, OracleError> {
    if a.dim() != b.dim() {
        return Err(OracleError::DimensionMismatch(a.dim(), b.dim()));
    }
    let d = a.dim();
    let mut c = BoolMatrix::zeros(d);
    if d == 0 {
        return Ok(c);
    }
    let graph = Arc::new(gen_bmm_graph(a, b)?);
    let mut e = apsd_reachable(&graph, true);
    while let Some(t) = e.pull()? {
        if t.source < d && (2 * d..3 * d).contains(&t.target) && t.distance == Distance::Finite(2) {
            c.set(t.source, t.target - 2 * d, true);
        }
    }
    Ok(c)
}

/// Exact all-pairs distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<Distance>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> Distance {
        self.entries[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[Distance] {
        &self.entries[u * self.n..(u + 1) * self.n]
    }

    /// One BFS (unweighted) or binary-heap Dijkstra (weighted) per vertex.
    pub fn from_searches(graph: &Graph) -> Self {
        let n = graph.n();
        let mut entries = Vec::with_capacity(n * n);
        for s in 0..n {
            let row = if graph.is_weighted() {
                dijkstra_row(graph, s)
            } else {
                bfs_row(graph, s)
            };
            entries.extend(
                row.into_iter()
                    .map(|d| d.map_or(Distance::Infinite, Distance::Finite)),
            );
        }
        Self { n, entries }
    }

    /// Floyd-Warshall with `None` as an absorbing infinity.
    pub fn floyd_warshall(graph: &Graph) -> Self {
        let n = graph.n();
        let mut d: Vec<Option<u64>> = vec![None; n * n];
        for v in 0..n {
            d[v * n + v] = Some(0);
        }
        for u in 0..n {
            for a in graph.arcs(u) {
                let (v, w) = (graph.target(a), graph.weight(a));
                let cell = &mut d[u * n + v];
                if cell.is_none_or(|old| w < old) {
                    *cell = Some(w);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = d[i * n + k] else { continue };
                for j in 0..n {
                    let Some(kj) = d[k * n + j] else { continue };
                    let via = ik.saturating_add(kj);
                    let cell = &mut d[i * n + j];
                    if cell.is_none_or(|old| via < old) {
                        *cell = Some(via);
                    }
                }
            }
        }
        Self {
            n,
            entries: d
                .into_iter()
                .map(|x| x.map_or(Distance::Infinite, Distance::Finite))
                .collect(),
        }
    }
}

/// The default oracle.
pub fn brute_force_matrix(graph: &Graph) -> DistanceMatrix {
    DistanceMatrix::from_searches(graph)
}

fn bfs_row(graph: &Graph, s: usize) -> Vec<Option<u64>> {
    let mut dist = vec![None; graph.n()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in graph.neighbors(u) {
            let v = v as usize;
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn dijkstra_row(graph: &Graph, s: usize) -> Vec<Option<u64>> {
    let mut dist: Vec<Option<u64>> = vec![None; graph.n()];
    let mut heap = BinaryHeap::from([Reverse((0u64, s))]);
    dist[s] = Some(0);
    while let Some(Reverse((du, u))) = heap.pop() {
        if dist[u].is_some_and(|d| d < du) {
            continue;
        }
        for a in graph.arcs(u) {
            let (v, nd) = (graph.target(a), du + graph.weight(a));
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    OutOfRange,
    Unexpected,
    WrongDistance {
        expected: Distance,
        got: Distance,
    },
    Duplicate,
    /// Both `(u, v)` and `(v, u)` emitted under de-duplication.
    BothOrientations,
    Order {
        previous: DistanceTriple,
    },
    Missing,
}

/// First problem found in an emitted stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Stream position, or `None` for a missing pair.
    pub position: Option<usize>,
    pub pair: (usize, usize),
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (u, v) = self.pair;
        match self.position {
            Some(p) => write!(f, "triple #{p} for pair ({u}, {v}): ")?,
            None => write!(f, "pair ({u}, {v}): ")?,
        }
        match &self.kind {
            ViolationKind::OutOfRange => write!(f, "vertex out of range"),
            ViolationKind::Unexpected => write!(f, "not part of this output type"),
            ViolationKind::WrongDistance { expected, got } => {
                write!(f, "distance {got}, expected {expected}")
            }
            ViolationKind::Duplicate => write!(f, "emitted twice"),
            ViolationKind::BothOrientations => write!(f, "both orientations emitted under dedup"),
            ViolationKind::Order { previous } => write!(f, "out of order after {previous}"),
            ViolationKind::Missing => write!(f, "missing"),
        }
    }
}

impl std::error::Error for Violation {}

/// Checks an all-pairs stream against `matrix` under `mode`.
pub fn validate(
    triples: &[DistanceTriple],
    matrix: &DistanceMatrix,
    mode: OutputMode,
    dedup: bool,
) -> Result<(), Violation> {
    check(triples, matrix, mode, dedup, None)
}

/// Checks a single-source stream; its distances must be non-decreasing.
pub fn validate_single_source(
    triples: &[DistanceTriple],
    matrix: &DistanceMatrix,
    source: usize,
    mode: OutputMode,
) -> Result<(), Violation> {
    check(triples, matrix, mode, false, Some(source))
}

fn check(
    triples: &[DistanceTriple],
    matrix: &DistanceMatrix,
    mode: OutputMode,
    dedup: bool,
    single: Option<usize>,
) -> Result<(), Violation> {
    let n = matrix.n();
    let mut seen = vec![false; n * n];
    let fail = |position, pair, kind| {
        Err(Violation {
            position,
            pair,
            kind,
        })
    };
    let sorted_order = mode.sorted || single.is_some();
    let mut prev: Option<DistanceTriple> = None;
    for (i, &t) in triples.iter().enumerate() {
        let pair = (t.source, t.target);
        let (u, v) = pair;
        if u >= n || v >= n {
            return fail(Some(i), pair, ViolationKind::OutOfRange);
        }
        let expected = matrix.get(u, v);
        if single.is_some_and(|s| s != u)
            || (mode.no_self && u == v)
            || (mode.reachable_only && expected == Distance::Infinite)
        {
            return fail(Some(i), pair, ViolationKind::Unexpected);
        }
        if t.distance != expected {
            return fail(
                Some(i),
                pair,
                ViolationKind::WrongDistance {
                    expected,
                    got: t.distance,
                },
            );
        }
        if seen[u * n + v] {
            return fail(Some(i), pair, ViolationKind::Duplicate);
        }
        if dedup && seen[v * n + u] {
            return fail(Some(i), pair, ViolationKind::BothOrientations);
        }
        seen[u * n + v] = true;
        if let Some(p) = prev {
            let bad = if sorted_order {
                t.distance < p.distance
            } else if mode.row_wise {
                t.source < p.source || (t.source == p.source && t.distance < p.distance)
            } else {
                false
            };
            if bad {
                return fail(Some(i), pair, ViolationKind::Order { previous: p });
            }
        }
        prev = Some(t);
    }
    let rows: Box<dyn Iterator<Item = usize>> = match single {
        Some(s) => Box::new(std::iter::once(s)),
        None => Box::new(0..n),
    };
    for u in rows {
        for v in 0..n {
            if (mode.no_self && u == v)
                || (mode.reachable_only && matrix.get(u, v) == Distance::Infinite)
            {
                continue;
            }
            let present = seen[u * n + v] || (dedup && seen[v * n + u]);
            if !present {
                return fail(None, (u, v), ViolationKind::Missing);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_random;
    use crate::DistanceTriple as T;

    fn path3() -> Graph {
        Graph::from_edge_list(3, &[(0, 1), (1, 2)], false).unwrap()
    }

    fn all_triples(m: &DistanceMatrix) -> Vec<T> {
        let mut out = Vec::new();
        for u in 0..m.n() {
            for v in 0..m.n() {
                out.push(T::new(u, v, m.get(u, v)));
            }
        }
        out
    }

    #[test]
    fn path_row() {
        let m = brute_force_matrix(&path3());
        assert_eq!(
            m.row(0),
            &[
                Distance::Finite(0),
                Distance::Finite(1),
                Distance::Finite(2)
            ]
        );
    }

    #[test]
    fn empty_graph_is_infinite_off_diagonal() {
        let g = Graph::from_edge_list(3, &[], false).unwrap();
        let m = brute_force_matrix(&g);
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(m.get(u, v) == Distance::Infinite, u != v);
            }
        }
    }

    #[test]
    fn oracles_agree_on_random_graphs() {
        for seed in 0..12 {
            let directed = seed % 2 == 0;
            let max_w = if seed % 3 == 0 { 0 } else { 20 };
            let g = gen_random(25, 60, directed, max_w, seed).unwrap();
            assert_eq!(
                DistanceMatrix::from_searches(&g),
                DistanceMatrix::floyd_warshall(&g),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn triangle_inequality() {
        let g = gen_random(20, 50, true, 9, 3).unwrap();
        let m = brute_force_matrix(&g);
        for u in 0..20 {
            for v in 0..20 {
                for w in 0..20 {
                    if let (Distance::Finite(a), Distance::Finite(b)) = (m.get(u, w), m.get(w, v)) {
                        assert!(m.get(u, v) <= Distance::Finite(a + b));
                    }
                }
            }
        }
    }

    #[test]
    fn validate_accepts_correct_and_flags_missing() {
        let m = brute_force_matrix(&path3());
        let mut ts = all_triples(&m);
        assert_eq!(validate(&ts, &m, OutputMode::default(), false), Ok(()));
        ts.remove(4);
        let err = validate(&ts, &m, OutputMode::default(), false).unwrap_err();
        assert_eq!((err.pair, err.kind), ((1, 1), ViolationKind::Missing));
    }

    #[test]
    fn validate_flags_sorted_swap() {
        let m = brute_force_matrix(&path3());
        let mut ts = all_triples(&m);
        ts.sort_by_key(|t| t.distance);
        assert_eq!(validate(&ts, &m, OutputMode::sorted(), false), Ok(()));
        let last = ts.len() - 1;
        ts.swap(0, last);
        let err = validate(&ts, &m, OutputMode::sorted(), false).unwrap_err();
        assert!(matches!(err.kind, ViolationKind::Order { .. }), "{err}");
    }

    #[test]
    fn validate_flags_duplicates_and_wrong_distances() {
        let m = brute_force_matrix(&path3());
        let mut ts = all_triples(&m);
        ts.push(ts[1]);
        assert_eq!(
            validate(&ts, &m, OutputMode::default(), false)
                .unwrap_err()
                .kind,
            ViolationKind::Duplicate
        );
        let mut ts = all_triples(&m);
        ts[2].distance = Distance::Finite(7);
        assert!(matches!(
            validate(&ts, &m, OutputMode::default(), false)
                .unwrap_err()
                .kind,
            ViolationKind::WrongDistance { .. }
        ));
    }

    #[test]
    fn validate_dedup_rules() {
        let m = brute_force_matrix(&path3());
        let ts: Vec<T> = all_triples(&m)
            .into_iter()
            .filter(|t| t.source <= t.target)
            .collect();
        assert_eq!(ts.len(), 6);
        assert_eq!(validate(&ts, &m, OutputMode::default(), true), Ok(()));
        let full = all_triples(&m);
        assert_eq!(
            validate(&full, &m, OutputMode::default(), true)
                .unwrap_err()
                .kind,
            ViolationKind::BothOrientations
        );
    }

    #[test]
    fn matrix_text_round_trip() {
        let a = BoolMatrix::random(5, 0.4, 11);
        assert_eq!(BoolMatrix::parse(&a.to_text()).unwrap(), a);
        assert!(BoolMatrix::parse("2\n10\n1\n").is_err());
        assert!(BoolMatrix::parse("2\n10\n").is_err());
        assert!(BoolMatrix::parse("1\n2\n").is_err());
    }

    #[test]
    fn bmm_small_cases() {
        let one = BoolMatrix::from_rows(vec![vec![true]]).unwrap();
        assert_eq!(bmm_multiply(&one, &one).unwrap(), one);
        let z = BoolMatrix::zeros(4);
        let r = BoolMatrix::random(4, 0.5, 2);
        assert_eq!(bmm_multiply(&z, &r).unwrap(), z);
        assert_eq!(
            bmm_multiply(&BoolMatrix::identity(2), &BoolMatrix::identity(2)).unwrap(),
            BoolMatrix::identity(2)
        );
        assert!(matches!(
            bmm_multiply(&z, &one),
            Err(OracleError::DimensionMismatch(4, 1))
        ));
    }

    #[test]
    fn bmm_matches_direct_product_d16() {
        for seed in 0..4 {
            let a = BoolMatrix::random(16, 0.15, seed);
            let b = BoolMatrix::random(16, 0.15, seed + 100);
            assert_eq!(bmm_multiply(&a, &b).unwrap(), bool_product(&a, &b).unwrap());
        }
    }
}
