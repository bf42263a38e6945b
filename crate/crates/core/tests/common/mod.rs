#![allow(dead_code)]

use std::sync::Arc;

use distenum::metering::run_metered;
use distenum::oracle::{validate, validate_single_source};
use distenum::{brute_force_matrix, enumerate, gen_random, DelayReport, Graph, OutputMode};

/// Random graph number `i` of the shared corpus (n ≤ 60).
pub fn corpus_graph(i: u64) -> Graph {
    let n = 1 + (i * 7919 % 60) as usize;
    let directed = i.is_multiple_of(2);
    let max_m = if directed {
        n * (n - 1)
    } else {
        n * (n - 1) / 2
    };
    // sparse, medium and dense graphs
    let m = match i % 3 {
        0 => n.min(max_m),
        1 => (3 * n).min(max_m),
        _ => (max_m / 3).min(max_m),
    };
    let max_w = if i % 4 < 2 { 0 } else { (n as u64).pow(3) };
    gen_random(n, m, directed, max_w, i).unwrap()
}

/// Runs `mode` (plus dedup when asked) and checks the stream against the oracle.
pub fn check_mode(
    graph: &Arc<Graph>,
    mode: OutputMode,
    dedup: bool,
) -> Result<DelayReport, String> {
    let matrix = brute_force_matrix(graph);
    let mut e = enumerate(graph, mode, None).map_err(|e| e.to_string())?;
    if dedup {
        e = e.dedup_undirected().map_err(|e| e.to_string())?;
    }
    let (triples, report) =
        run_metered(&mut e).map_err(|e| format!("{mode} dedup={dedup}: {e}"))?;
    validate(&triples, &matrix, mode, dedup).map_err(|v| format!("{mode} dedup={dedup}: {v}"))?;
    if report.bound_violations > 0 {
        return Err(format!(
            "{mode} dedup={dedup}: {} pulls over the declared bound",
            report.bound_violations
        ));
    }
    Ok(report)
}

pub fn check_source(
    graph: &Arc<Graph>,
    source: usize,
    mode: OutputMode,
) -> Result<DelayReport, String> {
    let matrix = brute_force_matrix(graph);
    let mut e = enumerate(graph, mode, Some(source)).map_err(|e| e.to_string())?;
    let (triples, report) =
        run_metered(&mut e).map_err(|e| format!("source {source} {mode}: {e}"))?;
    validate_single_source(&triples, &matrix, source, mode)
        .map_err(|v| format!("source {source} {mode}: {v}"))?;
    if report.bound_violations > 0 {
        return Err(format!(
            "source {source} {mode}: {} pulls over the declared bound",
            report.bound_violations
        ));
    }
    Ok(report)
}
