//! Pull-based distance enumerators with instrumented per-pull budgets.
//!
//! Every enumerator is a resumable [`Machine`] plus a FIFO solution queue.
//! A pull runs the machine until the step budget for that pull is spent,
//! then pops the queue. An empty queue at that point, while the machine
//! still has work left, is reported as [`EnumError::ScheduleUnderflow`].

mod engine;
mod head_start;
mod single_source;
mod sorted;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::metering::StepCounter;

pub use engine::{
    default_engine, BfsEngine, DijkstraEngine, EngineFactory, SearchEngine, SearchStep,
};

use head_start::{HeadKind, HeadStartMachine};
use single_source::{RowMachine, Sources};
use sorted::SortedMachine;

/// A shortest distance, with unreachable pairs at infinity.
///
/// `Infinite` orders after every finite distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Distance {
    Finite(u64),
    Infinite,
}

impl Distance {
    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Distance {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inf" {
            Ok(Distance::Infinite)
        } else {
            s.parse().map(Distance::Finite)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistanceTriple {
    pub source: usize,
    pub target: usize,
    pub distance: Distance,
}

impl DistanceTriple {
    pub fn new(source: usize, target: usize, distance: Distance) -> Self {
        Self {
            source,
            target,
            distance,
        }
    }

    pub fn finite(source: usize, target: usize, distance: u64) -> Self {
        Self::new(source, target, Distance::Finite(distance))
    }

    pub fn infinite(source: usize, target: usize) -> Self {
        Self::new(source, target, Distance::Infinite)
    }
}

/// Formats as `u v d`, with `inf` for unreachable pairs.
impl fmt::Display for DistanceTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.source, self.target, self.distance)
    }
}

/// Which triples are emitted, and in what order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputMode {
    /// Group by source vertex in id order, distances non-decreasing per row.
    pub row_wise: bool,
    /// Omit `(v, v, 0)`.
    pub no_self: bool,
    /// Omit unreachable pairs.
    pub reachable_only: bool,
    /// Globally non-decreasing distances.
    pub sorted: bool,
}

impl OutputMode {
    pub fn sorted() -> Self {
        Self {
            sorted: true,
            ..Self::default()
        }
    }

    pub fn validate(self) -> Result<(), EnumError> {
        if self.row_wise && self.sorted {
            return Err(EnumError::InvalidMode(
                "row-wise and sorted output exclude each other".into(),
            ));
        }
        Ok(())
    }

    /// The 12 valid flag combinations.
    pub fn all_valid() -> Vec<OutputMode> {
        (0u8..16)
            .map(|b| OutputMode {
                row_wise: b & 1 != 0,
                no_self: b & 2 != 0,
                reachable_only: b & 4 != 0,
                sorted: b & 8 != 0,
            })
            .filter(|m| m.validate().is_ok())
            .collect()
    }
}

impl fmt::Display for OutputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flags: Vec<&str> = [
            (self.row_wise, "row-wise"),
            (self.no_self, "no-self"),
            (self.reachable_only, "reachable"),
            (self.sorted, "sorted"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if flags.is_empty() {
            f.write_str("unconstrained")
        } else {
            f.write_str(&flags.join("+"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("source vertex {vertex} out of range for {n} vertices")]
    InvalidSource { vertex: usize, n: usize },
    #[error("unweighted enumeration requested on a weighted graph")]
    WeightedGraph,
    #[error("de-duplication requires an undirected graph")]
    DirectedGraph,
    #[error("invalid output mode: {0}")]
    InvalidMode(String),
    #[error("solution queue empty after the step budget of pull {pull} ({steps} steps)")]
    ScheduleUnderflow { pull: u64, steps: u64 },
}

/// Budget constants. The defaults are what the test corpus runs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumOptions {
    /// Per-output multiplier for single-source and row-wise machines.
    pub sssd_constant: u64,
    /// Per-output multiplier for the average-degree machines.
    pub apsd_constant: u64,
    /// Per-output multiplier for the sorted machines.
    pub sorted_constant: u64,
    /// Flat budget of the first `n / 2` pulls while degrees are scanned.
    pub head_constant: u64,
    /// The queue holds at most `queue_factor * n + 2` triples for the
    /// linear-space machines.
    pub queue_factor: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            sssd_constant: 8,
            apsd_constant: 10,
            sorted_constant: 12,
            head_constant: 12,
            queue_factor: 2,
        }
    }
}

/// Tie-break used to keep one orientation of each undirected pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupOrder {
    /// Keep `(u, v)` iff `u < v`.
    Id,
    /// Keep `(u, v)` iff `(deg u, u) < (deg v, v)`.
    DegreeThenId,
    /// Id order, with vertices of degree zero after all others.
    IsolatedLast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tick {
    Busy,
    Done,
}

/// FIFO of computed but not yet emitted triples.
#[derive(Debug, Default)]
pub struct SolutionQueue {
    items: VecDeque<DistanceTriple>,
    peak: usize,
}

impl SolutionQueue {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    fn push(&mut self, t: DistanceTriple, steps: &mut StepCounter) {
        steps.step();
        self.items.push_back(t);
        self.peak = self.peak.max(self.items.len());
    }

    fn pop(&mut self, steps: &mut StepCounter) -> Option<DistanceTriple> {
        steps.step();
        self.items.pop_front()
    }
}

/// What a machine sees during one tick.
pub struct Cx<'a> {
    pub graph: &'a Graph,
    pub steps: &'a mut StepCounter,
    queue: &'a mut SolutionQueue,
    dedup: Option<DedupOrder>,
}

impl Cx<'_> {
    /// Queues a triple, dropping it if de-duplication keeps the other orientation.
    pub fn emit(&mut self, t: DistanceTriple) {
        if let Some(order) = self.dedup {
            self.steps.step();
            if t.source != t.target {
                let (u, v) = (t.source, t.target);
                let keep = match order {
                    DedupOrder::Id => u < v,
                    DedupOrder::DegreeThenId => {
                        (self.graph.degree(u), u) < (self.graph.degree(v), v)
                    }
                    DedupOrder::IsolatedLast => {
                        (self.graph.degree(u) == 0, u) < (self.graph.degree(v) == 0, v)
                    }
                };
                if !keep {
                    return;
                }
            }
        }
        self.queue.push(t, self.steps);
    }

    pub fn queue_is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

/// A resumable enumeration schedule.
///
/// `tick` does a bounded amount of work (at most [`overshoot`](Self::overshoot)
/// steps) and may emit triples through the context.
pub trait Machine: Send {
    fn tick(&mut self, cx: &mut Cx<'_>) -> Tick;

    /// Step budget for the pull with the given 0-based index.
    fn budget(&self, pull: u64) -> u64;

    /// Upper bound on the steps of a single tick.
    fn overshoot(&self) -> u64;

    /// Cap on the solution queue; the machine idles while the queue is full.
    fn queue_cap(&self) -> Option<usize> {
        None
    }

    /// The degree term the delay of this machine is measured against.
    fn bound_base(&self) -> f64;

    /// Name of the current stage, used to break down delays.
    fn phase(&self) -> &'static str;

    fn dedup_order(&self) -> DedupOrder {
        DedupOrder::Id
    }

    fn variant(&self) -> &'static str;
}

/// Step accounting for the most recent pull.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PullStats {
    pub steps: u64,
    pub declared_bound: u64,
    pub phase: &'static str,
}

/// A stream of distance triples.
pub struct Enumerator {
    graph: Arc<Graph>,
    machine: Box<dyn Machine>,
    queue: SolutionQueue,
    steps: StepCounter,
    dedup: Option<DedupOrder>,
    pulls: u64,
    machine_done: bool,
    ended: bool,
    preprocessing_steps: u64,
    last: PullStats,
    bound_violations: u64,
}

impl fmt::Debug for Enumerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Enumerator")
            .field("variant", &self.machine.variant())
            .field("pulls", &self.pulls)
            .field("queued", &self.queue.len())
            .field("ended", &self.ended)
            .finish()
    }
}

impl Enumerator {
    /// Wraps a machine. Steps already on `steps` count as preprocessing.
    pub fn from_machine(graph: Arc<Graph>, machine: Box<dyn Machine>, steps: StepCounter) -> Self {
        Self {
            graph,
            machine,
            queue: SolutionQueue::default(),
            preprocessing_steps: steps.total(),
            steps,
            dedup: None,
            pulls: 0,
            machine_done: false,
            ended: false,
            last: PullStats::default(),
            bound_violations: 0,
        }
    }

    /// Emits one orientation of every unordered pair.
    pub fn dedup_undirected(mut self) -> Result<Self, EnumError> {
        if self.graph.is_directed() {
            return Err(EnumError::DirectedGraph);
        }
        self.dedup = Some(self.machine.dedup_order());
        Ok(self)
    }

    fn budget_multiplier(&self) -> u64 {
        if self.dedup.is_some() {
            2
        } else {
            1
        }
    }

    /// Next triple, or `None` once the stream is exhausted.
    pub fn pull(&mut self) -> Result<Option<DistanceTriple>, EnumError> {
        self.steps.mark();
        if self.ended {
            self.last = PullStats {
                steps: 0,
                declared_bound: 0,
                phase: "end",
            };
            return Ok(None);
        }
        let phase = self.machine.phase();
        let mult = self.budget_multiplier();
        let cap = if self.dedup.is_some() {
            None
        } else {
            self.machine.queue_cap()
        };
        let mut budget = self.machine.budget(self.pulls) * mult;
        while !self.machine_done && self.steps.since_mark() < budget {
            if cap.is_some_and(|c| self.queue.len() >= c) {
                break;
            }
            let mut cx = Cx {
                graph: &self.graph,
                steps: &mut self.steps,
                queue: &mut self.queue,
                dedup: self.dedup,
            };
            if self.machine.tick(&mut cx) == Tick::Done {
                self.machine_done = true;
            }
            budget = self.machine.budget(self.pulls) * mult;
        }
        let declared = budget + self.machine.overshoot() * mult + 1;
        let popped = self.queue.pop(&mut self.steps);
        let spent = self.steps.since_mark();
        self.last = PullStats {
            steps: spent,
            declared_bound: declared,
            phase,
        };
        let pull = self.pulls;
        self.pulls += 1;
        if spent > declared {
            self.bound_violations += 1;
        }
        match popped {
            Some(t) => Ok(Some(t)),
            None if self.machine_done => {
                self.ended = true;
                Ok(None)
            }
            None => Err(EnumError::ScheduleUnderflow { pull, steps: spent }),
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn variant(&self) -> &'static str {
        self.machine.variant()
    }

    pub fn last_pull(&self) -> PullStats {
        self.last
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn bound_base(&self) -> f64 {
        self.machine.bound_base()
    }

    pub fn bound_violations(&self) -> u64 {
        self.bound_violations
    }

    pub fn preprocessing_steps(&self) -> u64 {
        self.preprocessing_steps
    }

    pub fn peak_queue(&self) -> usize {
        self.queue.peak()
    }

    pub fn lazy_cells(&self) -> u64 {
        self.steps.lazy_cells()
    }

    pub fn total_steps(&self) -> u64 {
        self.steps.total()
    }

    pub fn is_deduplicated(&self) -> bool {
        self.dedup.is_some()
    }
}

impl Iterator for Enumerator {
    type Item = Result<DistanceTriple, EnumError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.pull().transpose()
    }
}

fn check_source(graph: &Graph, source: usize) -> Result<(), EnumError> {
    if source >= graph.n() {
        return Err(EnumError::InvalidSource {
            vertex: source,
            n: graph.n(),
        });
    }
    Ok(())
}

/// Distances from `source` in BFS order, unreachable vertices last.
pub fn sssd_unweighted(graph: &Arc<Graph>, source: usize) -> Result<Enumerator, EnumError> {
    if graph.is_weighted() {
        return Err(EnumError::WeightedGraph);
    }
    sssd_constrained(graph, source, OutputMode::default())
}

/// Distances from `source` in Dijkstra settle order, unreachable vertices last.
pub fn sssd_weighted(graph: &Arc<Graph>, source: usize) -> Result<Enumerator, EnumError> {
    sssd_constrained(graph, source, OutputMode::default())
}

/// Single-source distances honoring `no_self` and `reachable_only`.
///
/// The output is always sorted; `row_wise` and `sorted` are accepted and
/// have no further effect.
pub fn sssd_constrained(
    graph: &Arc<Graph>,
    source: usize,
    mode: OutputMode,
) -> Result<Enumerator, EnumError> {
    sssd_constrained_with(graph, source, mode, &EnumOptions::default())
}

pub fn sssd_constrained_with(
    graph: &Arc<Graph>,
    source: usize,
    mode: OutputMode,
    options: &EnumOptions,
) -> Result<Enumerator, EnumError> {
    check_source(graph, source)?;
    let mut steps = StepCounter::new();
    let m = RowMachine::new(
        graph,
        Sources::Single(source),
        mode,
        options,
        "sssd",
        &mut steps,
    );
    Ok(Enumerator::from_machine(graph.clone(), Box::new(m), steps))
}

/// Single-source enumeration for every vertex in id order.
pub fn apsd_rowwise(graph: &Arc<Graph>, mode: OutputMode) -> Enumerator {
    apsd_rowwise_with(graph, mode, &EnumOptions::default())
}

pub fn apsd_rowwise_with(
    graph: &Arc<Graph>,
    mode: OutputMode,
    options: &EnumOptions,
) -> Enumerator {
    if mode.reachable_only && mode.no_self {
        return apsd_reachable_with(graph, true, options);
    }
    let mut steps = StepCounter::new();
    let m = RowMachine::new(
        graph,
        Sources::All,
        mode,
        options,
        "apsd-rowwise",
        &mut steps,
    );
    Enumerator::from_machine(graph.clone(), Box::new(m), steps)
}

/// All `n²` triples with delay proportional to the average degree.
pub fn apsd_unconstrained(graph: &Arc<Graph>) -> Enumerator {
    apsd_unconstrained_with(graph, &EnumOptions::default())
}

pub fn apsd_unconstrained_with(graph: &Arc<Graph>, options: &EnumOptions) -> Enumerator {
    apsd_unconstrained_with_engine(graph, options, &default_engine)
}

/// Unconstrained enumeration over a caller-supplied search backend.
///
/// The backend's own [`SearchEngine::average_budget`] sets the delay.
pub fn apsd_unconstrained_with_engine(
    graph: &Arc<Graph>,
    options: &EnumOptions,
    factory: &EngineFactory,
) -> Enumerator {
    let mut steps = StepCounter::new();
    let m = HeadStartMachine::new(graph, HeadKind::SelfDistances, options, factory, &mut steps);
    Enumerator::from_machine(graph.clone(), Box::new(m), steps)
}

/// All `n² - n` non-self triples.
pub fn apsd_noself(graph: &Arc<Graph>) -> Enumerator {
    apsd_noself_with(graph, &EnumOptions::default())
}

pub fn apsd_noself_with(graph: &Arc<Graph>, options: &EnumOptions) -> Enumerator {
    let kind = if graph.is_weighted() {
        HeadKind::MinimumEdges
    } else {
        HeadKind::Edges
    };
    let mut steps = StepCounter::new();
    let m = HeadStartMachine::new(graph, kind, options, &default_engine, &mut steps);
    Enumerator::from_machine(graph.clone(), Box::new(m), steps)
}

/// Row-wise enumeration of finite distances only.
pub fn apsd_reachable(graph: &Arc<Graph>, no_self: bool) -> Enumerator {
    apsd_reachable_with(graph, no_self, &EnumOptions::default())
}

pub fn apsd_reachable_with(graph: &Arc<Graph>, no_self: bool, options: &EnumOptions) -> Enumerator {
    let mode = OutputMode {
        row_wise: true,
        no_self,
        reachable_only: true,
        sorted: false,
    };
    let mut steps = StepCounter::new();
    let sources = if no_self {
        // Vertices without arcs contribute nothing.
        let mut list = Vec::new();
        for v in 0..graph.n() {
            steps.step();
            if graph.degree(v) > 0 {
                list.push(v as u32);
            }
        }
        Sources::List(list)
    } else {
        Sources::All
    };
    let m = RowMachine::new(graph, sources, mode, options, "apsd-reachable", &mut steps);
    Enumerator::from_machine(graph.clone(), Box::new(m), steps)
}

/// All triples in globally non-decreasing distance order.
pub fn apsd_sorted(graph: &Arc<Graph>) -> Enumerator {
    apsd_sorted_mode(graph, false, false, &EnumOptions::default())
}

/// Sorted enumeration without self-distances.
pub fn apsd_sorted_noself(graph: &Arc<Graph>) -> Enumerator {
    apsd_sorted_mode(graph, true, false, &EnumOptions::default())
}

pub fn apsd_sorted_mode(
    graph: &Arc<Graph>,
    no_self: bool,
    reachable_only: bool,
    options: &EnumOptions,
) -> Enumerator {
    let mut steps = StepCounter::new();
    let m = SortedMachine::new(graph, no_self, reachable_only, options, &mut steps);
    Enumerator::from_machine(graph.clone(), Box::new(m), steps)
}

/// Picks the enumerator for `mode`, or the single-source one if `source` is given.
pub fn enumerate(
    graph: &Arc<Graph>,
    mode: OutputMode,
    source: Option<usize>,
) -> Result<Enumerator, EnumError> {
    enumerate_with(graph, mode, source, &EnumOptions::default())
}

pub fn enumerate_with(
    graph: &Arc<Graph>,
    mode: OutputMode,
    source: Option<usize>,
    options: &EnumOptions,
) -> Result<Enumerator, EnumError> {
    mode.validate()?;
    if let Some(s) = source {
        return sssd_constrained_with(graph, s, mode, options);
    }
    Ok(if mode.row_wise {
        apsd_rowwise_with(graph, mode, options)
    } else if mode.sorted {
        apsd_sorted_mode(graph, mode.no_self, mode.reachable_only, options)
    } else if mode.reachable_only {
        apsd_reachable_with(graph, mode.no_self, options)
    } else if mode.no_self {
        apsd_noself_with(graph, options)
    } else {
        apsd_unconstrained_with(graph, options)
    })
}
