//! Single-source searches run one source after another.

use std::sync::Arc;

use super::{
    default_engine, Cx, DistanceTriple, EnumOptions, Machine, OutputMode, SearchEngine, SearchStep,
    Tick,
};
use crate::graph::Graph;
use crate::metering::StepCounter;
use crate::pq::ceil_log2;

pub(crate) enum Sources {
    Single(usize),
    All,
    List(Vec<u32>),
}

impl Sources {
    fn get(&self, i: usize, n: usize) -> Option<usize> {
        match self {
            Sources::Single(s) => (i == 0).then_some(*s),
            Sources::All => (i < n).then_some(i),
            Sources::List(list) => list.get(i).map(|&v| v as usize),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Start,
    Search,
    Sweep(usize),
    Next,
    Done,
}

pub(crate) struct RowMachine {
    engine: Box<dyn SearchEngine>,
    sources: Sources,
    index: usize,
    source: usize,
    stage: Stage,
    no_self: bool,
    reachable_only: bool,
    /// Largest degree among vertices seen so far.
    max_seen: usize,
    c: u64,
    n: usize,
    cap: Option<usize>,
    base: f64,
    name: &'static str,
}

impl RowMachine {
    pub(crate) fn new(
        graph: &Arc<Graph>,
        sources: Sources,
        mode: OutputMode,
        options: &EnumOptions,
        name: &'static str,
        steps: &mut StepCounter,
    ) -> Self {
        let n = graph.n();
        let engine = default_engine(graph, steps);
        let first = sources.get(0, n);
        let delta = graph.degree_stats().max_degree as f64;
        let log_n = ceil_log2(n as u64) as f64;
        let base = if graph.is_weighted() {
            delta * (1.0 + log_n) + log_n
        } else {
            delta
        };
        Self {
            engine,
            index: 0,
            source: first.unwrap_or(0),
            stage: if first.is_some() {
                Stage::Start
            } else {
                Stage::Done
            },
            cap: (!matches!(sources, Sources::Single(_))).then_some(options.queue_factor * n + 2),
            sources,
            no_self: mode.no_self,
            reachable_only: mode.reachable_only,
            max_seen: 0,
            c: options.sssd_constant,
            n,
            base,
            name,
        }
    }

    fn see(&mut self, graph: &Graph, v: usize) {
        self.max_seen = self.max_seen.max(graph.degree(v));
    }
}

impl Machine for RowMachine {
    fn tick(&mut self, cx: &mut Cx<'_>) -> Tick {
        match self.stage {
            Stage::Start => {
                let s = self.source;
                self.see(cx.graph, s);
                self.engine.prepare(cx.steps);
                self.engine.start(cx.graph, s, cx.steps);
                if !self.no_self {
                    cx.emit(DistanceTriple::finite(s, s, 0));
                }
                self.stage = Stage::Search;
            }
            Stage::Search => match self.engine.step(cx.graph, cx.steps) {
                SearchStep::Found { target, distance } => {
                    self.see(cx.graph, target);
                    cx.emit(DistanceTriple::finite(self.source, target, distance));
                }
                SearchStep::Pending => {}
                SearchStep::Finished => {
                    self.stage = if self.reachable_only {
                        Stage::Next
                    } else {
                        Stage::Sweep(0)
                    };
                }
            },
            Stage::Sweep(v) => {
                cx.steps.step();
                if v == self.n {
                    self.stage = Stage::Next;
                } else {
                    if v != self.source && !self.engine.reached(v, cx.steps) {
                        cx.emit(DistanceTriple::infinite(self.source, v));
                    }
                    self.stage = Stage::Sweep(v + 1);
                }
            }
            Stage::Next => {
                cx.steps.step();
                self.index += 1;
                match self.sources.get(self.index, self.n) {
                    Some(s) => {
                        self.source = s;
                        self.stage = Stage::Start;
                    }
                    None => {
                        self.engine.release();
                        self.stage = Stage::Done;
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

    fn budget(&self, _pull: u64) -> u64 {
        let b = self.engine.delta_budget(self.c, self.max_seen, self.n);
        if self.no_self {
            2 * b
        } else {
            b
        }
    }

    fn overshoot(&self) -> u64 {
        self.engine.max_step_cost() + 4
    }

    fn queue_cap(&self) -> Option<usize> {
        self.cap
    }

    fn bound_base(&self) -> f64 {
        self.base
    }

    fn phase(&self) -> &'static str {
        match self.stage {
            Stage::Start | Stage::Search => "search",
            Stage::Sweep(_) => "sweep",
            Stage::Next => "next-source",
            Stage::Done => "done",
        }
    }

    fn variant(&self) -> &'static str {
        self.name
    }
}
