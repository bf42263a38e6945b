//! All-pairs enumeration in globally non-decreasing distance order.
//!
//! One persistent search instance per start vertex. Unweighted instances sit
//! in a FIFO pool: the instance at the front runs until it finds a distance
//! above the one currently being emitted, then parks that triple and moves
//! to the back. Weighted instances are kept in a heap keyed by the distance
//! of their parked triple.

use std::collections::VecDeque;
use std::sync::Arc;

use super::{
    default_engine, Cx, DedupOrder, DistanceTriple, EnumOptions, Machine, SearchEngine, SearchStep,
    Tick,
};
use crate::graph::Graph;
use crate::lazyarray::LazyArray;
use crate::metering::StepCounter;
use crate::pq::{ceil_log2, AddressablePQ};

struct Instance {
    engine: Box<dyn SearchEngine>,
    pending: Option<(u32, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Prologue,
    Loop,
    /// Unreached targets of the instance at position `i` of `starts`.
    Sweep {
        i: usize,
        v: usize,
    },
    /// Infinite distances out of isolated vertices.
    Fans {
        i: usize,
        t: usize,
    },
    Done,
}

pub(crate) struct SortedMachine {
    weighted: bool,
    no_self: bool,
    reachable_only: bool,
    n: usize,
    stage: Stage,

    // Prologue: cheap triples, degree scan, and instance set-up.
    head_pos: usize,
    head_arc: Option<usize>,
    head_done: bool,
    marks: Option<LazyArray<u32>>,
    scan_pos: usize,
    scan_done: bool,
    max_degree: usize,
    flat_pulls: u64,
    init_pos: usize,
    init_arc: Option<(usize, Option<u64>)>,
    init_done: bool,

    /// Vertices owning an instance, in id order.
    starts: Vec<u32>,
    /// Vertices without out-arcs (only tracked without self-distances).
    isolated: Vec<u32>,
    instances: Vec<Option<Instance>>,

    pool: VecDeque<u32>,
    tracker: u64,
    scheduler: AddressablePQ<u32>,
    current: Option<(crate::pq::Handle, usize)>,

    c: u64,
    flat_budget: u64,
    log_n: u64,
    base: f64,
}

impl SortedMachine {
    pub(crate) fn new(
        graph: &Arc<Graph>,
        no_self: bool,
        reachable_only: bool,
        options: &EnumOptions,
        steps: &mut StepCounter,
    ) -> Self {
        let n = graph.n();
        let weighted = graph.is_weighted();
        let log_n = ceil_log2(n as u64);
        let delta = graph.degree_stats().max_degree as f64;
        let base = if weighted {
            delta * (1.0 + log_n as f64) + log_n as f64
        } else {
            delta
        };
        let mut m = Self {
            weighted,
            no_self,
            reachable_only,
            n,
            stage: Stage::Prologue,
            head_pos: 0,
            head_arc: None,
            head_done: false,
            marks: None,
            scan_pos: 0,
            scan_done: false,
            max_degree: 0,
            flat_pulls: 0,
            init_pos: 0,
            init_arc: None,
            init_done: false,
            starts: Vec::new(),
            isolated: Vec::new(),
            instances: (0..n).map(|_| None).collect(),
            pool: VecDeque::new(),
            tracker: if no_self { 2 } else { 1 },
            scheduler: AddressablePQ::new(),
            current: None,
            c: options.sorted_constant,
            flat_budget: options.head_constant,
            log_n,
            base,
        };
        if no_self {
            // Split vertices by whether they have out-arcs; find the maximum degree.
            for v in 0..n {
                steps.step();
                let d = graph.degree(v);
                m.max_degree = m.max_degree.max(d);
                if d == 0 {
                    m.isolated.push(v as u32);
                } else {
                    m.starts.push(v as u32);
                }
            }
            m.scan_done = true;
            if weighted {
                m.init_all(graph, steps);
            } else {
                m.marks = Some(LazyArray::alloc(n, steps).expect("vertex count fits a lazy array"));
            }
        } else {
            m.starts = (0..n as u32).collect();
            if n <= 2 {
                for v in 0..n {
                    steps.step();
                    m.max_degree = m.max_degree.max(graph.degree(v));
                }
                m.scan_done = true;
            } else {
                m.flat_pulls = (n / 2) as u64;
            }
        }
        m.pool = VecDeque::with_capacity(m.starts.len());
        m
    }

    fn new_instance(&mut self, graph: &Graph, s: usize, steps: &mut StepCounter) {
        let mut engine = default_engine(graph, steps);
        engine.prepare(steps);
        engine.start(graph, s, steps);
        self.instances[s] = Some(Instance {
            engine,
            pending: None,
        });
    }

    /// Sets up every weighted instance and the scheduler in one pass.
    fn init_all(&mut self, graph: &Graph, steps: &mut StepCounter) {
        let mut entries = Vec::with_capacity(self.starts.len());
        for i in 0..self.starts.len() {
            let s = self.starts[i] as usize;
            self.new_instance(graph, s, steps);
            let mut best: Option<u64> = None;
            for a in graph.arcs(s) {
                steps.step();
                if graph.target(a) != s {
                    best = Some(best.map_or(graph.weight(a), |b| b.min(graph.weight(a))));
                }
            }
            if let Some(w) = best {
                entries.push((w, s as u32));
            }
        }
        self.scheduler = AddressablePQ::from_entries(entries, steps);
        self.head_done = true;
        self.init_done = true;
        self.stage = Stage::Loop;
    }

    fn scan_tick(&mut self, graph: &Graph, steps: &mut StepCounter) {
        steps.step();
        if self.scan_pos < self.n {
            self.max_degree = self.max_degree.max(graph.degree(self.scan_pos));
            self.scan_pos += 1;
        }
        if self.scan_pos == self.n {
            self.scan_done = true;
        }
    }

    fn head_tick(&mut self, cx: &mut Cx<'_>) {
        cx.steps.step();
        if !self.no_self {
            if self.head_pos < self.n {
                cx.emit(DistanceTriple::finite(self.head_pos, self.head_pos, 0));
                self.head_pos += 1;
            }
            self.head_done = self.head_pos == self.n;
            return;
        }
        // Distinct out-neighbors of every vertex with arcs.
        let Some(&s) = self.starts.get(self.head_pos) else {
            self.head_done = true;
            return;
        };
        let s = s as usize;
        let arcs = cx.graph.arcs(s);
        let a = self.head_arc.unwrap_or(arcs.start);
        if a == arcs.end {
            self.head_pos += 1;
            self.head_arc = None;
            self.head_done = self.head_pos == self.starts.len();
            return;
        }
        let t = cx.graph.target(a);
        let marks = self.marks.as_mut().expect("edge head keeps marks");
        if t != s && marks.get(t, cx.steps) != Some(s as u32) {
            marks.set(t, s as u32, cx.steps);
            cx.emit(DistanceTriple::finite(s, t, 1));
        }
        self.head_arc = Some(a + 1);
    }

    fn init_tick(&mut self, graph: &Graph, steps: &mut StepCounter) {
        steps.step();
        let Some(&s) = self.starts.get(self.init_pos) else {
            self.init_done = true;
            return;
        };
        let s = s as usize;
        if !self.weighted {
            self.new_instance(graph, s, steps);
            steps.step();
            self.pool.push_back(s as u32);
            self.init_pos += 1;
        } else {
            match self.init_arc {
                None => {
                    self.new_instance(graph, s, steps);
                    self.init_arc = Some((graph.arcs(s).start, None));
                }
                Some((a, best)) if a < graph.arcs(s).end => {
                    let t = graph.target(a);
                    let w = graph.weight(a);
                    let best = if t != s {
                        Some(best.map_or(w, |b| b.min(w)))
                    } else {
                        best
                    };
                    self.init_arc = Some((a + 1, best));
                }
                Some((_, best)) => {
                    if let Some(w) = best {
                        self.scheduler.insert(w, s as u32, steps);
                    }
                    self.init_arc = None;
                    self.init_pos += 1;
                }
            }
        }
        if self.init_pos == self.starts.len() {
            self.init_done = true;
        }
    }

    fn instance(&mut self, s: usize) -> &mut Instance {
        self.instances[s]
            .as_mut()
            .expect("scheduled vertices own an instance")
    }

    fn pool_tick(&mut self, cx: &mut Cx<'_>) -> bool {
        cx.steps.step();
        let Some(&s) = self.pool.front() else {
            return false;
        };
        let s = s as usize;
        let no_self = self.no_self;
        let tracker = self.tracker;
        let inst = self.instance(s);
        if let Some((t, d)) = inst.pending.take() {
            cx.emit(DistanceTriple::finite(s, t as usize, d));
            self.tracker = d;
            return true;
        }
        match inst.engine.step(cx.graph, cx.steps) {
            SearchStep::Found { target, distance } => {
                if no_self && distance <= 1 {
                    // emitted by the head start
                } else if distance > tracker {
                    inst.pending = Some((target as u32, distance));
                    cx.steps.add(2);
                    self.pool.pop_front();
                    self.pool.push_back(s as u32);
                } else {
                    cx.emit(DistanceTriple::finite(s, target, distance));
                }
            }
            SearchStep::Pending => {}
            SearchStep::Finished => {
                inst.engine.release();
                self.pool.pop_front();
            }
        }
        true
    }

    fn heap_tick(&mut self, cx: &mut Cx<'_>) -> bool {
        match self.current {
            None => {
                cx.steps.step();
                let Some((h, key, s)) = self.scheduler.extract_min_handle(cx.steps) else {
                    return false;
                };
                let s = s as usize;
                self.current = Some((h, s));
                if let Some((t, d)) = self.instance(s).pending.take() {
                    debug_assert_eq!(d, key);
                    cx.emit(DistanceTriple::finite(s, t as usize, d));
                }
            }
            Some((h, s)) => {
                let inst = self.instance(s);
                match inst.engine.step(cx.graph, cx.steps) {
                    SearchStep::Found { target, distance } => {
                        inst.pending = Some((target as u32, distance));
                        self.scheduler
                            .reinsert(h, distance, cx.steps)
                            .expect("extracted instances are re-queued once");
                        self.current = None;
                    }
                    SearchStep::Pending => {}
                    SearchStep::Finished => {
                        inst.engine.release();
                        self.current = None;
                    }
                }
            }
        }
        true
    }

    fn after_loop(&self) -> Stage {
        if self.reachable_only {
            Stage::Done
        } else {
            Stage::Sweep { i: 0, v: 0 }
        }
    }

    fn after_sweep(&self) -> Stage {
        if self.no_self && !self.reachable_only {
            Stage::Fans { i: 0, t: 0 }
        } else {
            Stage::Done
        }
    }
}

impl Machine for SortedMachine {
    fn tick(&mut self, cx: &mut Cx<'_>) -> Tick {
        match self.stage {
            Stage::Prologue => {
                if !self.head_done && cx.queue_is_empty() {
                    self.head_tick(cx);
                } else if !self.scan_done {
                    self.scan_tick(cx.graph, cx.steps);
                } else if !self.init_done {
                    self.init_tick(cx.graph, cx.steps);
                } else if !self.head_done {
                    self.head_tick(cx);
                } else {
                    self.stage = Stage::Loop;
                }
            }
            Stage::Loop => {
                let progressed = if self.weighted {
                    self.heap_tick(cx)
                } else {
                    self.pool_tick(cx)
                };
                if !progressed {
                    self.stage = self.after_loop();
                }
            }
            Stage::Sweep { i, v } => {
                cx.steps.step();
                match self.starts.get(i) {
                    None => self.stage = self.after_sweep(),
                    Some(&s) if v == self.n => {
                        self.instances[s as usize] = None;
                        self.stage = Stage::Sweep { i: i + 1, v: 0 };
                    }
                    Some(&s) => {
                        let s = s as usize;
                        let steps = &mut *cx.steps;
                        if v != s
                            && !self.instances[s]
                                .as_ref()
                                .is_some_and(|x| x.engine.reached(v, steps))
                        {
                            cx.emit(DistanceTriple::infinite(s, v));
                        }
                        self.stage = Stage::Sweep { i, v: v + 1 };
                    }
                }
            }
            Stage::Fans { i, t } => {
                cx.steps.step();
                match self.isolated.get(i) {
                    None => self.stage = Stage::Done,
                    Some(_) if t == self.n => self.stage = Stage::Fans { i: i + 1, t: 0 },
                    Some(&s) => {
                        if t != s as usize {
                            cx.emit(DistanceTriple::infinite(s as usize, t));
                        }
                        self.stage = Stage::Fans { i, t: t + 1 };
                    }
                }
            }
            Stage::Done => {}
        }
        if self.stage == Stage::Done {
            Tick::Done
        } else {
            Tick::Busy
        }
    }

    fn budget(&self, pull: u64) -> u64 {
        if pull < self.flat_pulls || !self.scan_done {
            return self.flat_budget;
        }
        let log_n = self.log_n;
        if self.weighted {
            self.c * (self.max_degree as u64 * (1 + log_n) + log_n + 1)
        } else {
            self.c * (self.max_degree as u64 + 1)
        }
    }

    fn overshoot(&self) -> u64 {
        let engine = if self.weighted { 2 * self.log_n + 4 } else { 4 };
        engine + 3 * self.log_n + 8
    }

    fn bound_base(&self) -> f64 {
        self.base
    }

    fn phase(&self) -> &'static str {
        match self.stage {
            Stage::Prologue => "head-start",
            Stage::Loop => "search",
            Stage::Sweep { .. } => "sweep",
            Stage::Fans { .. } => "fans",
            Stage::Done => "done",
        }
    }

    fn dedup_order(&self) -> DedupOrder {
        // Fans of isolated vertices come after every other infinite triple.
        if self.no_self {
            DedupOrder::IsolatedLast
        } else {
            DedupOrder::Id
        }
    }

    fn variant(&self) -> &'static str {
        match (self.weighted, self.no_self) {
            (false, false) => "apsd-sorted",
            (false, true) => "apsd-sorted-noself",
            (true, false) => "apsd-sorted-weighted",
            (true, true) => "apsd-sorted-noself-weighted",
        }
    }
}
