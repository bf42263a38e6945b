//! All-pairs enumeration with delay bounded by the average degree.
//!
//! Cheap triples (self-distances, or edges and fans of isolated vertices
//! when self-distances are excluded) are streamed first. Their budget pays
//! for scanning degrees; after that one search per start vertex runs, on
//! two engines that take turns so that the idle one can be reset in O(1).

use std::collections::VecDeque;
use std::sync::Arc;

use super::{
    Cx, DedupOrder, DistanceTriple, EngineFactory, EnumOptions, Machine, SearchEngine, SearchStep,
    Tick,
};
use crate::graph::Graph;
use crate::lazyarray::LazyArray;
use crate::metering::StepCounter;
use crate::pq::ceil_log2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum HeadKind {
    /// `(v, v, 0)` for every vertex.
    SelfDistances,
    /// Unweighted, no self: every distinct out-neighbor at distance 1.
    Edges,
    /// Weighted, no self: the lightest out-arc of every vertex.
    MinimumEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cursor {
    Vertex,
    Fan(usize),
    Arcs(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Next,
    Search,
    Sweep(usize),
    Done,
}

pub(crate) struct HeadStartMachine {
    kind: HeadKind,
    n: usize,

    head_pos: usize,
    cursor: Cursor,
    head_done: bool,
    /// Vertices by non-decreasing degree (weighted, no self).
    order: Vec<u32>,
    marks: Option<LazyArray<u32>>,
    best: Option<(u64, u32)>,
    /// Target of the pre-emitted lightest arc per vertex.
    lightest: Option<LazyArray<u32>>,
    starts: VecDeque<u32>,

    scan_pos: usize,
    degree_sum: u64,
    scan_done: bool,
    flat_pulls: u64,

    engines: [Box<dyn SearchEngine>; 2],
    searches: u64,
    next_vertex: usize,
    source: usize,
    stage: Stage,

    c: u64,
    flat_budget: u64,
    cap: usize,
    base: f64,
}

impl HeadStartMachine {
    pub(crate) fn new(
        graph: &Arc<Graph>,
        kind: HeadKind,
        options: &EnumOptions,
        factory: &EngineFactory,
        steps: &mut StepCounter,
    ) -> Self {
        let n = graph.n();
        let mut engines = [factory(graph, steps), factory(graph, steps)];
        engines[0].prepare(steps);
        engines[1].prepare(steps);
        let alloc = |steps: &mut StepCounter| {
            LazyArray::alloc(n, steps).expect("vertex count fits a lazy array")
        };
        let stats = graph.degree_stats();
        let avg = stats.degree_sum as f64 / n.max(1) as f64;
        let base = if graph.is_weighted() {
            avg + ceil_log2(n as u64) as f64
        } else {
            avg
        };
        let mut m = Self {
            kind,
            n,
            head_pos: 0,
            cursor: Cursor::Vertex,
            head_done: false,
            order: Vec::new(),
            marks: (kind == HeadKind::Edges).then(|| alloc(steps)),
            best: None,
            lightest: (kind == HeadKind::MinimumEdges).then(|| alloc(steps)),
            starts: VecDeque::new(),
            scan_pos: 0,
            degree_sum: 0,
            scan_done: false,
            flat_pulls: 0,
            engines,
            searches: 0,
            next_vertex: 0,
            source: 0,
            stage: Stage::Next,
            c: options.apsd_constant,
            flat_budget: options.head_constant,
            cap: options.queue_factor * n + 2,
            base,
        };
        if kind != HeadKind::SelfDistances {
            m.starts = VecDeque::with_capacity(n);
        }
        if kind == HeadKind::MinimumEdges {
            m.sort_by_degree(graph, steps);
        } else if n <= 2 {
            while !m.scan_done {
                m.scan_tick(graph, steps);
            }
        } else {
            m.flat_pulls = (n / 2) as u64;
        }
        m
    }

    /// Stable counting sort of the vertices by degree; also sums degrees.
    fn sort_by_degree(&mut self, graph: &Graph, steps: &mut StepCounter) {
        let n = self.n;
        let mut max_deg = 0;
        for v in 0..n {
            steps.step();
            max_deg = max_deg.max(graph.degree(v));
            self.degree_sum += graph.degree(v) as u64;
        }
        let mut start = vec![0usize; max_deg + 2];
        for v in 0..n {
            start[graph.degree(v) + 1] += 1;
        }
        for d in 0..=max_deg {
            steps.step();
            start[d + 1] += start[d];
        }
        let mut order = vec![0u32; n];
        for v in 0..n {
            steps.step();
            let slot = &mut start[graph.degree(v)];
            order[*slot] = v as u32;
            *slot += 1;
        }
        self.order = order;
        self.scan_pos = n;
        self.scan_done = true;
    }

    fn scan_tick(&mut self, graph: &Graph, steps: &mut StepCounter) {
        if self.scan_pos == self.n {
            self.scan_done = true;
            return;
        }
        steps.step();
        self.degree_sum += graph.degree(self.scan_pos) as u64;
        self.scan_pos += 1;
        if self.scan_pos == self.n {
            self.scan_done = true;
        }
    }

    fn head_vertex(&self) -> usize {
        match self.kind {
            HeadKind::MinimumEdges => self.order[self.head_pos] as usize,
            _ => self.head_pos,
        }
    }

    fn head_tick(&mut self, cx: &mut Cx<'_>) {
        if self.head_pos == self.n {
            self.head_done = true;
            return;
        }
        let s = self.head_vertex();
        match (self.kind, self.cursor) {
            (HeadKind::SelfDistances, _) => {
                cx.steps.step();
                cx.emit(DistanceTriple::finite(s, s, 0));
                self.head_pos += 1;
            }
            (_, Cursor::Vertex) => {
                cx.steps.step();
                if cx.graph.degree(s) == 0 {
                    self.cursor = Cursor::Fan(0);
                } else {
                    self.best = None;
                    self.cursor = Cursor::Arcs(cx.graph.arcs(s).start);
                }
            }
            (_, Cursor::Fan(t)) => {
                cx.steps.step();
                if t == self.n {
                    self.advance_head();
                } else {
                    if t != s {
                        cx.emit(DistanceTriple::infinite(s, t));
                    }
                    self.cursor = Cursor::Fan(t + 1);
                }
            }
            (HeadKind::Edges, Cursor::Arcs(a)) => {
                cx.steps.step();
                if a == cx.graph.arcs(s).end {
                    cx.steps.step();
                    self.starts.push_back(s as u32);
                    self.advance_head();
                } else {
                    let t = cx.graph.target(a);
                    let marks = self.marks.as_mut().expect("edge head keeps marks");
                    if t != s && marks.get(t, cx.steps) != Some(s as u32) {
                        marks.set(t, s as u32, cx.steps);
                        cx.emit(DistanceTriple::finite(s, t, 1));
                    }
                    self.cursor = Cursor::Arcs(a + 1);
                }
            }
            (HeadKind::MinimumEdges, Cursor::Arcs(a)) => {
                cx.steps.step();
                if a == cx.graph.arcs(s).end {
                    if let Some((w, t)) = self.best {
                        let lightest = self.lightest.as_mut().expect("weighted head keeps minima");
                        lightest.set(s, t, cx.steps);
                        cx.emit(DistanceTriple::finite(s, t as usize, w));
                    }
                    cx.steps.step();
                    self.starts.push_back(s as u32);
                    self.advance_head();
                } else {
                    let (t, w) = (cx.graph.target(a), cx.graph.weight(a));
                    if t != s && self.best.is_none_or(|(bw, _)| w < bw) {
                        self.best = Some((w, t as u32));
                    }
                    self.cursor = Cursor::Arcs(a + 1);
                }
            }
        }
        if self.head_pos == self.n {
            self.head_done = true;
        }
    }

    fn advance_head(&mut self) {
        self.head_pos += 1;
        self.cursor = Cursor::Vertex;
    }

    fn next_start(&mut self) -> Option<usize> {
        match self.kind {
            HeadKind::SelfDistances => (self.next_vertex < self.n).then(|| {
                self.next_vertex += 1;
                self.next_vertex - 1
            }),
            _ => self.starts.pop_front().map(|v| v as usize),
        }
    }

    fn search_tick(&mut self, cx: &mut Cx<'_>) -> Tick {
        let active = (self.searches % 2) as usize;
        match self.stage {
            Stage::Next => {
                cx.steps.step();
                match self.next_start() {
                    Some(s) => {
                        // This engine was prepared during the previous search.
                        self.searches += 1;
                        let active = (self.searches % 2) as usize;
                        self.source = s;
                        self.engines[active].start(cx.graph, s, cx.steps);
                        self.engines[1 - active].prepare(cx.steps);
                        self.stage = Stage::Search;
                    }
                    None => {
                        for e in &mut self.engines {
                            e.release();
                        }
                        self.stage = Stage::Done;
                        return Tick::Done;
                    }
                }
            }
            Stage::Search => match self.engines[active].step(cx.graph, cx.steps) {
                SearchStep::Found { target, distance } => {
                    let skip = match self.kind {
                        HeadKind::SelfDistances => false,
                        HeadKind::Edges => distance == 1,
                        HeadKind::MinimumEdges => {
                            let lightest =
                                self.lightest.as_ref().expect("weighted head keeps minima");
                            lightest.get(self.source, cx.steps) == Some(target as u32)
                        }
                    };
                    if !skip {
                        cx.emit(DistanceTriple::finite(self.source, target, distance));
                    }
                }
                SearchStep::Pending => {}
                SearchStep::Finished => self.stage = Stage::Sweep(0),
            },
            Stage::Sweep(v) => {
                cx.steps.step();
                if v == self.n {
                    self.stage = Stage::Next;
                } else {
                    if v != self.source && !self.engines[active].reached(v, cx.steps) {
                        cx.emit(DistanceTriple::infinite(self.source, v));
                    }
                    self.stage = Stage::Sweep(v + 1);
                }
            }
            Stage::Done => return Tick::Done,
        }
        Tick::Busy
    }
}

impl Machine for HeadStartMachine {
    fn tick(&mut self, cx: &mut Cx<'_>) -> Tick {
        if !self.head_done && cx.queue_is_empty() {
            self.head_tick(cx);
        } else if !self.scan_done {
            self.scan_tick(cx.graph, cx.steps);
        } else if !self.head_done {
            self.head_tick(cx);
        } else {
            return self.search_tick(cx);
        }
        Tick::Busy
    }

    fn budget(&self, pull: u64) -> u64 {
        if pull < self.flat_pulls || !self.scan_done {
            self.flat_budget
        } else {
            self.engines[0].average_budget(self.c, self.degree_sum, self.n)
        }
    }

    fn overshoot(&self) -> u64 {
        self.engines[0].max_step_cost() + 6
    }

    fn queue_cap(&self) -> Option<usize> {
        Some(self.cap)
    }

    fn bound_base(&self) -> f64 {
        self.base
    }

    fn phase(&self) -> &'static str {
        if !self.head_done || !self.scan_done {
            "head-start"
        } else {
            match self.stage {
                Stage::Next | Stage::Search => "search",
                Stage::Sweep(_) => "sweep",
                Stage::Done => "done",
            }
        }
    }

    fn dedup_order(&self) -> DedupOrder {
        match self.kind {
            HeadKind::MinimumEdges => DedupOrder::DegreeThenId,
            _ => DedupOrder::Id,
        }
    }

    fn variant(&self) -> &'static str {
        match self.kind {
            HeadKind::SelfDistances => "apsd-unconstrained",
            HeadKind::Edges => "apsd-noself",
            HeadKind::MinimumEdges => "apsd-noself-weighted",
        }
    }
}
