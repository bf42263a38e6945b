mod common;

use std::sync::Arc;

use common::{check_source, corpus_graph};
use distenum::enumerators::{Cx, Machine, Tick};
use distenum::metering::run_metered;
use distenum::{
    enumerate, gen_clique_path, DistanceTriple, Enumerator, Graph, OutputMode, StepCounter,
};

/// Emits `(0, i, i)` for `i < count`, spending `cost` steps per tick.
struct Counting {
    next: usize,
    count: usize,
    cost: u64,
}

impl Machine for Counting {
    fn tick(&mut self, cx: &mut Cx<'_>) -> Tick {
        if self.next == self.count {
            return Tick::Done;
        }
        cx.steps.add(self.cost);
        cx.emit(DistanceTriple::finite(0, self.next, self.next as u64));
        self.next += 1;
        Tick::Busy
    }

    fn budget(&self, _pull: u64) -> u64 {
        self.cost + 1
    }

    fn overshoot(&self) -> u64 {
        self.cost + 1
    }

    fn bound_base(&self) -> f64 {
        1.0
    }

    fn phase(&self) -> &'static str {
        "count"
    }

    fn variant(&self) -> &'static str {
        "counting"
    }
}

fn counting(count: usize, cost: u64) -> Enumerator {
    let graph = Arc::new(Graph::from_edge_list(count.max(1), &[], true).unwrap());
    Enumerator::from_machine(
        graph,
        Box::new(Counting {
            next: 0,
            count,
            cost,
        }),
        StepCounter::new(),
    )
}

#[test]
fn empty_machine_costs_one_pop() {
    let (out, r) = run_metered(&mut counting(0, 3)).unwrap();
    assert!(out.is_empty());
    assert_eq!(
        (r.pulls, r.outputs, r.max_delay, r.total_delay_steps),
        (1, 0, 1, 1)
    );
}

#[test]
fn metered_steps_are_exactly_the_machine_steps() {
    let (out, r) = run_metered(&mut counting(5, 3)).unwrap();
    assert_eq!(out.len(), 5);
    // per output: 3 work + 1 push + 1 pop; end of stream: 1 pop
    assert_eq!(r.total_delay_steps, 5 * 5 + 1);
    assert_eq!(r.max_delay, 5);
    assert_eq!(r.bound_violations, 0);
    assert_eq!(r.per_phase_max.get("count"), Some(&5));
}

#[test]
fn metering_adds_no_steps() {
    let graph = Arc::new(gen_clique_path(6).unwrap());
    for mode in OutputMode::all_valid() {
        let mut metered = enumerate(&graph, mode, None).unwrap();
        let (_, report) = run_metered(&mut metered).unwrap();
        let mut plain = enumerate(&graph, mode, None).unwrap();
        while plain.pull().unwrap().is_some() {}
        assert_eq!(metered.total_steps(), plain.total_steps(), "{mode}");
        assert_eq!(
            report.total_delay_steps + report.preprocessing_steps,
            plain.total_steps(),
            "{mode}"
        );
    }
}

#[test]
fn runs_are_deterministic() {
    for i in [3, 10, 17] {
        let graph = Arc::new(corpus_graph(i));
        for mode in OutputMode::all_valid() {
            let a = run_metered(&mut enumerate(&graph, mode, None).unwrap()).unwrap();
            let b = run_metered(&mut enumerate(&graph, mode, None).unwrap()).unwrap();
            assert_eq!(a, b, "graph {i} {mode}");
        }
    }
}

#[test]
fn report_formats() {
    let (_, r) = run_metered(&mut counting(3, 2)).unwrap();
    let kv = r.to_key_value();
    assert!(kv.lines().all(|l| l.split_once('=').is_some()));
    assert!(kv.contains("variant=counting\n"));
    assert!(kv.contains("phase_max.count=4\n"));
    let records = r.to_records();
    assert!(
        records
            .lines()
            .any(|l| l == r#"{"field":"max_delay","value":4}"#),
        "{records}"
    );
}

#[test]
fn single_source_streams_on_the_corpus() {
    let modes = [
        OutputMode::default(),
        OutputMode {
            no_self: true,
            ..Default::default()
        },
        OutputMode {
            reachable_only: true,
            ..Default::default()
        },
        OutputMode {
            no_self: true,
            reachable_only: true,
            ..Default::default()
        },
    ];
    for i in 0..40 {
        let graph = Arc::new(corpus_graph(i));
        for s in [0, graph.n() / 2, graph.n() - 1] {
            for mode in modes {
                check_source(&graph, s, mode).unwrap();
            }
        }
    }
}
