//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{check_mode, corpus_graph};
use distenum::metering::run_metered;
use distenum::{
    apsd_noself, apsd_sorted_noself, bmm_multiply, bool_product, enumerate, gen_bmm_graph,
    gen_clique_path, gen_isolated_plus_edge, gen_random, gen_star, sssd_unweighted, sssd_weighted,
    BoolMatrix, DelayReport, EnumError, Graph, LazyArray, OutputMode, StepCounter,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SWEEP_GRAPHS: u64 = 200;
const SWEEP_LIMIT: Duration = Duration::from_secs(120);
const BMM_LIMIT: Duration = Duration::from_secs(60);
const FIT_SPREAD: f64 = 2.0;
const LOWER_SPREAD: f64 = 3.0;
const QUEUE_C: f64 = 3.0;
const LAZY_C: f64 = 4.0;
const SORTED_LAZY_C: f64 = 2.0;
const PRE_NOSELF_C: f64 = 4.0;
const PRE_SORTED_C: f64 = 8.0;
const DEDUP_SLACK: u64 = 512;

fn report(graph: &Arc<Graph>, mode: OutputMode) -> Result<DelayReport, EnumError> {
    let mut e = enumerate(graph, mode, None)?;
    run_metered(&mut e).map(|(_, r)| r)
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn sweep() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for i in 0..SWEEP_GRAPHS {
        let graph = Arc::new(corpus_graph(i));
        for mode in OutputMode::all_valid() {
            for dedup in [false, true] {
                if dedup && graph.is_directed() {
                    continue;
                }
                check_mode(&graph, mode, dedup).map_err(|e| format!("graph {i}: {e}"))?;
                runs += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > SWEEP_LIMIT {
        return Err(format!("{runs} runs took {elapsed:.1?}"));
    }
    Ok(format!(
        "{runs} runs on {SWEEP_GRAPHS} graphs in {elapsed:.1?}"
    ))
}

fn families() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for k in [3, 4, 8, 16, 32] {
        out.push((format!("clique-path k={k}"), gen_clique_path(k).unwrap()));
    }
    for n in [2, 3, 10, 500, 2000] {
        out.push((
            format!("isolated+edge n={n}"),
            gen_isolated_plus_edge(n).unwrap(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [1, 2, 100, 2000] {
        let w: Vec<i64> = (1..n)
            .map(|_| rng.gen_range(0..=(n as i64).pow(3)))
            .collect();
        out.push((format!("star n={n}"), gen_star(n, &w).unwrap()));
    }
    for d in [1, 2, 8, 16] {
        let a = BoolMatrix::random(d, 0.3, d as u64);
        let b = BoolMatrix::random(d, 0.3, d as u64 + 1);
        out.push((format!("bmm d={d}"), gen_bmm_graph(&a, &b).unwrap()));
    }
    for (n, m, directed, w) in [
        (2000, 8000, false, 0),
        (2000, 3000, true, 0),
        (1000, 4000, false, 1_000_000),
    ] {
        out.push((
            format!("random n={n} m={m}"),
            gen_random(n, m, directed, w, n as u64).unwrap(),
        ));
    }
    out
}

fn no_underflow() -> Outcome {
    let mut runs = 0;
    for i in 0..SWEEP_GRAPHS {
        let graph = Arc::new(corpus_graph(i));
        for mode in OutputMode::all_valid() {
            for dedup in [false, true] {
                if dedup && graph.is_directed() {
                    continue;
                }
                let mut e = enumerate(&graph, mode, None).unwrap();
                if dedup {
                    e = e.dedup_undirected().unwrap();
                }
                run_metered(&mut e).map_err(|e| format!("corpus graph {i} {mode}: {e}"))?;
                runs += 1;
            }
        }
    }
    for (name, graph) in families() {
        let graph = Arc::new(graph);
        for mode in OutputMode::all_valid() {
            for dedup in [false, true] {
                if dedup && graph.is_directed() {
                    continue;
                }
                let mut e = enumerate(&graph, mode, None).unwrap();
                if dedup {
                    e = e.dedup_undirected().unwrap();
                }
                let r =
                    run_metered(&mut e).map_err(|e| format!("{name} {mode} dedup={dedup}: {e}"))?;
                if r.1.bound_violations > 0 {
                    return Err(format!(
                        "{name} {mode} dedup={dedup}: {} bound violations",
                        r.1.bound_violations
                    ));
                }
                runs += 1;
            }
        }
        for s in [0, graph.n() - 1] {
            let mut e = enumerate(&graph, OutputMode::default(), Some(s)).unwrap();
            run_metered(&mut e).map_err(|e| format!("{name} source {s}: {e}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} runs without underflow"))
}

fn delay_upper_bounds() -> Outcome {
    let families: Vec<(&str, Vec<Graph>)> = vec![
        (
            "clique-path",
            [8, 16, 32]
                .iter()
                .map(|&k| gen_clique_path(k).unwrap())
                .collect(),
        ),
        (
            "random",
            [100, 200, 400]
                .iter()
                .map(|&n| gen_random(n, 4 * n, false, 0, 11).unwrap())
                .collect(),
        ),
        (
            "random-directed",
            [100, 200, 400]
                .iter()
                .map(|&n| gen_random(n, 4 * n, true, 0, 12).unwrap())
                .collect(),
        ),
        (
            "random-weighted",
            [100, 200, 400]
                .iter()
                .map(|&n| gen_random(n, 4 * n, false, (n as u64).pow(3), 13).unwrap())
                .collect(),
        ),
    ];
    let mut worst = (1.0, String::new());
    for (family, graphs) in families {
        let graphs: Vec<_> = graphs.into_iter().map(Arc::new).collect();
        for mode in OutputMode::all_valid() {
            let mut fits = Vec::new();
            let mut variant = String::new();
            for g in &graphs {
                let r = report(g, mode).map_err(|e| e.to_string())?;
                fits.push(r.fitted_constant);
                variant = r.variant;
            }
            let s = spread(&fits);
            let label = format!("{family} {mode} ({variant}) fits {fits:.1?}");
            if s >= FIT_SPREAD {
                return Err(format!("{label}: spread {s:.2}"));
            }
            if s > worst.0 {
                worst = (s, label);
            }
        }
    }
    Ok(format!("largest spread {:.2}: {}", worst.0, worst.1))
}

fn lower_bound() -> Outcome {
    let mut ratios = Vec::new();
    for k in [8, 16, 32] {
        let graph = Arc::new(gen_clique_path(k).unwrap());
        let (_, r) =
            run_metered(&mut sssd_unweighted(&graph, 0).unwrap()).map_err(|e| e.to_string())?;
        ratios.push(r.max_delay as f64 / k as f64);
    }
    let s = spread(&ratios);
    if s < LOWER_SPREAD && ratios.iter().all(|&r| r > 0.0) {
        Ok(format!("max_delay/k = {ratios:.2?}, spread {s:.2}"))
    } else {
        Err(format!("max_delay/k = {ratios:.2?}, spread {s:.2}"))
    }
}

fn separation() -> Outcome {
    let graph = Arc::new(gen_clique_path(32).unwrap());
    let unconstrained = report(&graph, OutputMode::default()).map_err(|e| e.to_string())?;
    let rowwise = report(
        &graph,
        OutputMode {
            row_wise: true,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let detail = format!(
        "unconstrained {} vs row-wise {}",
        unconstrained.max_delay, rowwise.max_delay
    );
    if 2 * unconstrained.max_delay <= rowwise.max_delay {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn space_bounds() -> Outcome {
    let mut linear_worst: f64 = 0.0;
    let mut queue_worst: f64 = 0.0;
    let mut sorted_worst: f64 = 0.0;
    for n in [100, 200, 400] {
        for (directed, w) in [(false, 0), (true, 0), (false, 1_000_000)] {
            let graph = Arc::new(gen_random(n, 4 * n, directed, w, n as u64).unwrap());
            for mode in OutputMode::all_valid() {
                let r = report(&graph, mode).map_err(|e| e.to_string())?;
                let nf = n as f64;
                let lazy = r.lazy_cells_allocated as f64;
                if mode.sorted {
                    sorted_worst = sorted_worst.max(lazy / (nf * nf));
                    if lazy > SORTED_LAZY_C * nf * nf {
                        return Err(format!("{mode} n={n}: {lazy} lazy cells"));
                    }
                    continue;
                }
                linear_worst = linear_worst.max(lazy / nf);
                queue_worst = queue_worst.max(r.peak_queue as f64 / nf);
                if lazy > LAZY_C * nf {
                    return Err(format!("{mode} n={n}: {lazy} lazy cells"));
                }
                if r.peak_queue as f64 > QUEUE_C * nf {
                    return Err(format!("{mode} n={n}: peak queue {}", r.peak_queue));
                }
            }
        }
    }
    Ok(format!(
        "peak_queue/n <= {queue_worst:.2}, lazy/n <= {linear_worst:.2}, sorted lazy/n^2 <= {sorted_worst:.2}"
    ))
}

fn bmm() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut pairs = 0;
    for d in [1, 2, 4, 8, 16, 32] {
        for _ in 0..100 {
            let density = rng.gen_range(0.0..0.5);
            let a = BoolMatrix::random(d, density, rng.gen());
            let b = BoolMatrix::random(d, density, rng.gen());
            let got = bmm_multiply(&a, &b).map_err(|e| e.to_string())?;
            if got != bool_product(&a, &b).unwrap() {
                return Err(format!("mismatch at d={d}"));
            }
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > BMM_LIMIT {
        return Err(format!("{pairs} pairs took {elapsed:.1?}"));
    }
    Ok(format!("{pairs} pairs in {elapsed:.1?}"))
}

fn sorting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for i in 0..50 {
        let n = rng.gen_range(1..=1000);
        let max_w = (n as i64).pow(3).max(1);
        let weights: Vec<i64> = (1..n).map(|_| rng.gen_range(0..=max_w)).collect();
        let star = Arc::new(gen_star(n, &weights).unwrap());
        let (out, _) =
            run_metered(&mut sssd_weighted(&star, 0).unwrap()).map_err(|e| e.to_string())?;
        let got: Vec<u64> = out
            .iter()
            .filter(|t| t.target != 0)
            .map(|t| t.distance.finite().unwrap())
            .collect();
        let mut expected: Vec<u64> = weights.iter().map(|&w| w as u64).collect();
        expected.sort_unstable();
        if got != expected {
            return Err(format!("vector {i} (n={n}) not sorted"));
        }
    }
    Ok("50 weight vectors sorted".into())
}

fn lazy_contract() -> Outcome {
    let mut small = StepCounter::new();
    LazyArray::<u64>::alloc(1 << 10, &mut small).unwrap();
    let mut large = StepCounter::new();
    LazyArray::<u64>::alloc(1 << 22, &mut large).unwrap();
    if small.total() != large.total() {
        return Err(format!("alloc cost {} vs {}", small.total(), large.total()));
    }

    let cap = 4096;
    let patterns: Vec<Vec<u32>> = vec![
        vec![0; cap],
        (0..cap as u32).collect(),
        (0..cap as u32).rev().collect(),
        (0..cap).map(|i| (i % 3) as u32).collect(),
        vec![u32::MAX; cap],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (p, backing) in patterns.into_iter().enumerate() {
        let mut steps = StepCounter::new();
        let mut arr = LazyArray::<u32>::from_backing(backing, &mut steps).unwrap();
        let mut written = HashMap::new();
        for _ in 0..200 {
            let x = rng.gen_range(0..cap);
            arr.write(x, x as u32, &mut steps).unwrap();
            written.insert(x, x as u32);
        }
        for x in 0..cap {
            if arr.read(x, &mut steps).unwrap() != written.get(&x).copied() {
                return Err(format!("garbage pattern {p}: cell {x} misread"));
            }
        }
    }

    for seq in 0..10 {
        let cap = rng.gen_range(1..2000);
        let mut steps = StepCounter::new();
        let mut arr = LazyArray::<u64>::alloc(cap, &mut steps).unwrap();
        let mut map: HashMap<usize, u64> = HashMap::new();
        for _ in 0..10_000 {
            let x = rng.gen_range(0..cap);
            match rng.gen_range(0..100) {
                0 => {
                    arr.clear(&mut steps);
                    map.clear();
                }
                1..=40 => {
                    let v = rng.gen();
                    arr.write(x, v, &mut steps).unwrap();
                    map.insert(x, v);
                }
                _ => {
                    if arr.read(x, &mut steps).unwrap() != map.get(&x).copied() {
                        return Err(format!("sequence {seq}: read of {x} disagrees with map"));
                    }
                }
            }
        }
    }
    Ok(format!(
        "alloc cost {} at both sizes; 5 garbage patterns; 10 x 10^4 ops",
        small.total()
    ))
}

fn preprocessing() -> Outcome {
    let mut noself_worst: f64 = 0.0;
    let mut sorted_worst: f64 = 0.0;
    for n in [100, 200, 400] {
        for directed in [false, true] {
            let graph =
                Arc::new(gen_random(n, 4 * n, directed, (n as u64).pow(3), n as u64 + 3).unwrap());
            let a = apsd_noself(&graph).preprocessing_steps() as f64 / n as f64;
            let b =
                apsd_sorted_noself(&graph).preprocessing_steps() as f64 / (graph.m() + n) as f64;
            noself_worst = noself_worst.max(a);
            sorted_worst = sorted_worst.max(b);
        }
    }
    let detail =
        format!("no-self <= {noself_worst:.2}·n, sorted no-self <= {sorted_worst:.2}·(m+n)");
    if noself_worst <= PRE_NOSELF_C && sorted_worst <= PRE_SORTED_C {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dedup() -> Outcome {
    let modes: Vec<OutputMode> = OutputMode::all_valid()
        .into_iter()
        .filter(|m| !m.reachable_only)
        .collect();
    let mut worst = 0.0f64;
    let mut excess = i64::MIN;
    for i in 0..50u64 {
        let n = 2 + (i as usize * 13) % 80;
        let max_m = n * (n - 1) / 2;
        let w = if i % 2 == 0 { 0 } else { (n as u64).pow(3) };
        let graph = Arc::new(gen_random(n, (2 * n).min(max_m), false, w, 1000 + i).unwrap());
        for &mode in &modes {
            let plain = report(&graph, mode).map_err(|e| e.to_string())?;
            let mut e = enumerate(&graph, mode, None)
                .unwrap()
                .dedup_undirected()
                .unwrap();
            let (out, r) = run_metered(&mut e).map_err(|e| format!("graph {i} {mode}: {e}"))?;
            let pairs = out.iter().filter(|t| t.source != t.target).count();
            let selfs = out.len() - pairs;
            let expected_selfs = if mode.no_self { 0 } else { n };
            if pairs != n * (n - 1) / 2 || selfs != expected_selfs {
                return Err(format!(
                    "graph {i} {mode}: {pairs} pairs and {selfs} self triples"
                ));
            }
            excess = excess.max(r.max_delay as i64 - 2 * plain.max_delay as i64);
            if r.max_delay > 2 * plain.max_delay + DEDUP_SLACK {
                return Err(format!(
                    "graph {i} {mode}: delay {} vs {}",
                    r.max_delay, plain.max_delay
                ));
            }
            worst = worst.max(r.max_delay as f64 / plain.max_delay.max(1) as f64);
        }
    }
    Ok(format!(
        "50 graphs x {} modes; worst delay ratio {worst:.2}, worst excess over 2x {excess}",
        modes.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence sweep", sweep),
        ("no schedule underflow", no_underflow),
        ("delay upper bounds", delay_upper_bounds),
        ("lower-bound family", lower_bound),
        ("unconstrained vs row-wise separation", separation),
        ("space bounds", space_bounds),
        ("BMM reduction", bmm),
        ("sorting equivalence", sorting),
        ("lazy array contract", lazy_contract),
        ("preprocessing bounds", preprocessing),
        ("undirected dedup", dedup),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
