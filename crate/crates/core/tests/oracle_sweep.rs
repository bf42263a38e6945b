mod common;

use std::sync::Arc;

use common::{check_mode, check_source, corpus_graph};
use distenum::OutputMode;

#[test]
fn every_mode_matches_oracle_on_random_graphs() {
    let mut failures = Vec::new();
    for i in 0..60 {
        let g = Arc::new(corpus_graph(i));
        for mode in OutputMode::all_valid() {
            for dedup in [false, true] {
                if dedup && g.is_directed() {
                    continue;
                }
                if let Err(e) = check_mode(&g, mode, dedup) {
                    failures.push(format!(
                        "graph {i} (n={}, m={}, weighted={}): {e}",
                        g.n(),
                        g.m(),
                        g.is_weighted()
                    ));
                }
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} failures:\n{}",
        failures.len(),
        failures[..failures.len().min(30)].join("\n")
    );
}

#[test]
fn single_source_modes_match_oracle() {
    let mut failures = Vec::new();
    for i in 0..40 {
        let g = Arc::new(corpus_graph(i));
        for mode in [
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
        ] {
            for s in [0, g.n() / 2, g.n() - 1] {
                if let Err(e) = check_source(&g, s, mode) {
                    failures.push(format!("graph {i}: {e}"));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
