//! Single-source search machines advanced one bounded tick at a time.

use std::collections::VecDeque;

use crate::graph::Graph;
use crate::lazyarray::LazyArray;
use crate::metering::StepCounter;
use crate::pq::{ceil_log2, AddressablePQ, Handle};

/// Outcome of one engine tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStep {
    /// A new vertex whose distance is final. Never the source itself.
    Found {
        target: usize,
        distance: u64,
    },
    Pending,
    Finished,
}

/// A resumable single-source shortest-distance search.
///
/// Implementations report each reachable vertex other than the source
/// exactly once, in non-decreasing distance order, and charge every unit of
/// work to `steps`. A single call to [`step`](Self::step) must stay within
/// [`max_step_cost`](Self::max_step_cost) steps.
///
/// Because delay guarantees depend on the backend, each engine states its own
/// per-output budget formulas.
pub trait SearchEngine: Send {
    /// Forgets the previous search. O(1) steps.
    fn prepare(&mut self, steps: &mut StepCounter);

    /// Begins a search from `source` on a prepared engine.
    fn start(&mut self, graph: &Graph, source: usize, steps: &mut StepCounter);

    fn step(&mut self, graph: &Graph, steps: &mut StepCounter) -> SearchStep;

    /// Whether `v` has been reached by the current search. Complete once
    /// the search is finished.
    fn reached(&self, v: usize, steps: &mut StepCounter) -> bool;

    fn max_step_cost(&self) -> u64;

    /// Budget per output when work is amortized over the average degree.
    fn average_budget(&self, c: u64, degree_sum: u64, n: usize) -> u64;

    /// Budget per output when work is charged against a maximum degree.
    fn delta_budget(&self, c: u64, max_degree: usize, n: usize) -> u64;

    /// Drops buffers that are only needed while the search runs.
    fn release(&mut self) {}
}

/// Builds a fresh engine for a graph; allocation is charged to `steps`.
pub type EngineFactory = dyn Fn(&Graph, &mut StepCounter) -> Box<dyn SearchEngine> + Send + Sync;

/// The default engine for `graph`: BFS if unweighted, Dijkstra otherwise.
pub fn default_engine(graph: &Graph, steps: &mut StepCounter) -> Box<dyn SearchEngine> {
    if graph.is_weighted() {
        Box::new(DijkstraEngine::new(graph.n(), steps))
    } else {
        Box::new(BfsEngine::new(graph.n(), steps))
    }
}

fn alloc<T: Copy>(n: usize, steps: &mut StepCounter) -> LazyArray<T> {
    LazyArray::alloc(n, steps).expect("vertex count fits a lazy array")
}

#[derive(Debug)]
pub struct BfsEngine {
    dist: LazyArray<u32>,
    frontier: VecDeque<(u32, u32)>,
    /// Vertex being expanded, its next arc, and its distance.
    current: Option<(usize, usize, u32)>,
}

impl BfsEngine {
    pub fn new(n: usize, steps: &mut StepCounter) -> Self {
        Self {
            dist: alloc(n, steps),
            frontier: VecDeque::with_capacity(n),
            current: None,
        }
    }
}

impl SearchEngine for BfsEngine {
    fn prepare(&mut self, steps: &mut StepCounter) {
        self.dist.clear(steps);
        self.frontier.clear();
        self.current = None;
    }

    fn start(&mut self, _graph: &Graph, source: usize, steps: &mut StepCounter) {
        self.dist.set(source, 0, steps);
        steps.step();
        self.frontier.push_back((source as u32, 0));
    }

    fn step(&mut self, graph: &Graph, steps: &mut StepCounter) -> SearchStep {
        if let Some((u, arc, du)) = self.current {
            if arc < graph.arcs(u).end {
                steps.step();
                self.current = Some((u, arc + 1, du));
                let t = graph.target(arc);
                if self.dist.get(t, steps).is_none() {
                    self.dist.set(t, du + 1, steps);
                    steps.step();
                    self.frontier.push_back((t as u32, du + 1));
                    return SearchStep::Found {
                        target: t,
                        distance: u64::from(du + 1),
                    };
                }
                return SearchStep::Pending;
            }
        }
        steps.step();
        match self.frontier.pop_front() {
            Some((u, du)) => {
                let u = u as usize;
                self.current = Some((u, graph.arcs(u).start, du));
                SearchStep::Pending
            }
            None => {
                self.current = None;
                SearchStep::Finished
            }
        }
    }

    fn reached(&self, v: usize, steps: &mut StepCounter) -> bool {
        self.dist.get(v, steps).is_some()
    }

    fn max_step_cost(&self) -> u64 {
        4
    }

    fn average_budget(&self, c: u64, degree_sum: u64, n: usize) -> u64 {
        let n = n.max(1) as u64;
        (c * (degree_sum + n)).div_ceil(n)
    }

    fn delta_budget(&self, c: u64, max_degree: usize, _n: usize) -> u64 {
        c * (max_degree as u64 + 1)
    }

    fn release(&mut self) {
        self.frontier = VecDeque::new();
    }
}

const SETTLED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Cell {
    dist: u64,
    /// Heap handle, or `SETTLED`.
    handle: u32,
}

#[derive(Debug)]
pub struct DijkstraEngine {
    cells: LazyArray<Cell>,
    heap: AddressablePQ<u32>,
    current: Option<(usize, usize, u64)>,
    log_n: u64,
}

impl DijkstraEngine {
    pub fn new(n: usize, steps: &mut StepCounter) -> Self {
        Self {
            cells: alloc(n, steps),
            heap: AddressablePQ::with_capacity(n),
            current: None,
            log_n: ceil_log2(n as u64),
        }
    }
}

impl SearchEngine for DijkstraEngine {
    fn prepare(&mut self, steps: &mut StepCounter) {
        self.cells.clear(steps);
        self.heap.clear();
        self.current = None;
    }

    fn start(&mut self, graph: &Graph, source: usize, steps: &mut StepCounter) {
        self.cells.set(
            source,
            Cell {
                dist: 0,
                handle: SETTLED,
            },
            steps,
        );
        self.current = Some((source, graph.arcs(source).start, 0));
    }

    fn step(&mut self, graph: &Graph, steps: &mut StepCounter) -> SearchStep {
        if let Some((u, arc, du)) = self.current {
            if arc < graph.arcs(u).end {
                steps.step();
                self.current = Some((u, arc + 1, du));
                let t = graph.target(arc);
                let nd = du + graph.weight(arc);
                match self.cells.get(t, steps) {
                    None => {
                        let h = self.heap.insert(nd, t as u32, steps);
                        self.cells.set(
                            t,
                            Cell {
                                dist: nd,
                                handle: h.index() as u32,
                            },
                            steps,
                        );
                    }
                    Some(c) if c.handle != SETTLED && nd < c.dist => {
                        let h = handle_from(c.handle);
                        self.heap
                            .decrease_key(h, nd, steps)
                            .expect("tentative vertices stay live");
                        self.cells.set(
                            t,
                            Cell {
                                dist: nd,
                                handle: c.handle,
                            },
                            steps,
                        );
                    }
                    Some(_) => {}
                }
                return SearchStep::Pending;
            }
        }
        steps.step();
        match self.heap.extract_min(steps) {
            Some((d, u)) => {
                let u = u as usize;
                self.cells.set(
                    u,
                    Cell {
                        dist: d,
                        handle: SETTLED,
                    },
                    steps,
                );
                self.current = Some((u, graph.arcs(u).start, d));
                SearchStep::Found {
                    target: u,
                    distance: d,
                }
            }
            None => {
                self.current = None;
                SearchStep::Finished
            }
        }
    }

    fn reached(&self, v: usize, steps: &mut StepCounter) -> bool {
        self.cells.get(v, steps).is_some()
    }

    fn max_step_cost(&self) -> u64 {
        2 * self.log_n + 4
    }

    fn average_budget(&self, c: u64, degree_sum: u64, n: usize) -> u64 {
        let n = n.max(1) as u64;
        (c * (degree_sum + n) * (1 + self.log_n)).div_ceil(n)
    }

    fn delta_budget(&self, c: u64, max_degree: usize, _n: usize) -> u64 {
        c * (max_degree as u64 * (1 + self.log_n) + self.log_n + 1)
    }

    fn release(&mut self) {
        self.heap.release();
    }
}

fn handle_from(raw: u32) -> Handle {
    Handle::from_index(raw as usize)
}
