use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use distenum::metering::run_metered_with;
use distenum::oracle::{validate, validate_single_source};
use distenum::{
    bmm_multiply, bool_product, brute_force_matrix, enumerate as build, gen_bmm_graph,
    gen_clique_path, gen_isolated_plus_edge, gen_random, gen_star, BoolMatrix, DelayReport,
    DistanceTriple, Enumerator, Graph, OutputMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{
    BenchArgs, BmmArgs, EnumerateArgs, Family, Fault, Format, GenerateArgs, ModeFlags, VerifyArgs,
};

#[derive(Debug)]
pub enum Failure {
    /// Exit code 1.
    Invalid(String),
    /// Exit code 2.
    Usage(String),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| usage(format!("standard input: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn load_graph(path: &Path) -> Result<Arc<Graph>, Failure> {
    let text = read_input(path)?;
    Graph::parse(&text)
        .map(Arc::new)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<BoolMatrix, Failure> {
    let text = read_input(path)?;
    BoolMatrix::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(usage(e)),
                _ => Ok(()),
            }
        }
    }
}

fn require<T>(value: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
    value.ok_or_else(|| usage(format!("{family} needs --{flag}")))
}

fn random_weights(n: usize, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = (n as i64).saturating_pow(3).max(1);
    (1..n).map(|_| rng.gen_range(0..=cap)).collect()
}

pub fn generate(a: &GenerateArgs) -> CmdResult {
    let graph = match a.family {
        Family::CliquePath => gen_clique_path(require(a.k, "k", "clique-path")?),
        Family::Star => {
            let n = require(a.n, "n", "star")?;
            let weights = a
                .weights
                .clone()
                .unwrap_or_else(|| random_weights(n, a.seed));
            gen_star(n, &weights)
        }
        Family::Bmm => {
            let (ma, mb) = match (&a.a, &a.b) {
                (Some(pa), Some(pb)) => (load_matrix(pa)?, load_matrix(pb)?),
                _ => {
                    let d = require(a.d, "d", "bmm")?;
                    if !(0.0..=1.0).contains(&a.density) {
                        return Err(usage(format!("density {} outside [0, 1]", a.density)));
                    }
                    (
                        BoolMatrix::random(d, a.density, a.seed),
                        BoolMatrix::random(d, a.density, a.seed ^ 0x5bd1e995),
                    )
                }
            };
            gen_bmm_graph(&ma, &mb)
        }
        Family::IsolatedEdge => gen_isolated_plus_edge(require(a.n, "n", "isolated-edge")?),
        Family::Random => {
            let n = require(a.n, "n", "random")?;
            let m = require(a.m, "m", "random")?;
            gen_random(n, m, a.directed, a.max_weight, a.seed)
        }
    }
    .map_err(usage)?;
    write_output(a.out.as_deref(), &graph.to_text())
}

fn open_enumerator(
    graph: &Arc<Graph>,
    flags: &ModeFlags,
    source: Option<usize>,
) -> Result<Enumerator, Failure> {
    if flags.dedup && source.is_some() {
        return Err(usage("--dedup applies to all-pairs enumeration only"));
    }
    let e = build(graph, flags.mode(), source).map_err(usage)?;
    if flags.dedup {
        e.dedup_undirected().map_err(usage)
    } else {
        Ok(e)
    }
}

pub fn enumerate(a: &EnumerateArgs) -> CmdResult {
    let graph = load_graph(&a.graph)?;
    let mut e = open_enumerator(&graph, &a.flags, a.source)?;
    let mut out = BufWriter::new(io::stdout().lock());
    let mut io_error: Option<io::Error> = None;
    let report = run_metered_with(&mut e, |t| {
        if io_error.is_none() {
            if let Err(err) = writeln!(out, "{t}") {
                io_error = Some(err);
            }
        }
    })
    .map_err(|e| Failure::Invalid(e.to_string()))?;
    if io_error.is_none() {
        io_error = out.flush().err();
    }
    match io_error {
        Some(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(usage(e)),
        _ => {}
    }
    if a.report {
        eprint!("{}", report.to_key_value());
    }
    Ok(())
}

fn inject(triples: &mut Vec<DistanceTriple>, fault: Fault) {
    if triples.is_empty() {
        return;
    }
    let mid = triples.len() / 2;
    match fault {
        Fault::Drop => {
            triples.remove(mid);
        }
        Fault::Duplicate => triples.push(triples[mid]),
        Fault::Corrupt => {
            let t = &mut triples[mid];
            t.distance = match t.distance {
                distenum::Distance::Finite(d) => distenum::Distance::Finite(d + 1),
                distenum::Distance::Infinite => distenum::Distance::Finite(0),
            };
        }
        Fault::Swap => {
            let t = &mut triples[mid];
            std::mem::swap(&mut t.source, &mut t.target);
            if t.source == t.target {
                t.target = (t.target + 1) % 2;
            }
        }
    }
}

fn verify_one(
    graph: &Arc<Graph>,
    flags: &ModeFlags,
    source: Option<usize>,
    fault: Option<Fault>,
) -> Result<usize, Failure> {
    let mut e = open_enumerator(graph, flags, source)?;
    let mut triples = Vec::new();
    run_metered_with(&mut e, |t| triples.push(t)).map_err(|e| Failure::Invalid(e.to_string()))?;
    if let Some(f) = fault {
        inject(&mut triples, f);
    }
    let matrix = brute_force_matrix(graph);
    let mode = flags.mode();
    let verdict = match source {
        Some(s) => validate_single_source(&triples, &matrix, s, mode),
        None => validate(&triples, &matrix, mode, flags.dedup),
    };
    verdict
        .map(|()| triples.len())
        .map_err(|v| Failure::Invalid(format!("{mode}: {v}")))
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    let graph = load_graph(&a.graph)?;
    let modes: Vec<OutputMode> = if a.all_modes {
        OutputMode::all_valid()
    } else {
        vec![a.flags.mode()]
    };
    let mut out = String::new();
    for mode in modes {
        let flags = ModeFlags {
            row_wise: mode.row_wise,
            no_self: mode.no_self,
            reachable: mode.reachable_only,
            sorted: mode.sorted,
            dedup: a.flags.dedup,
        };
        match verify_one(&graph, &flags, a.source, a.inject_fault) {
            Ok(count) => {
                let _ = writeln!(
                    out,
                    "ok {mode}{} ({count} triples)",
                    if flags.dedup { "+dedup" } else { "" }
                );
            }
            Err(Failure::Invalid(msg)) => {
                write_output(None, &out)?;
                println!("violation {msg}");
                return Err(Failure::Invalid("verification failed".into()));
            }
            Err(other) => return Err(other),
        }
    }
    write_output(None, &out)
}

fn bench_graph(a: &BenchArgs, size: usize) -> Result<Graph, Failure> {
    let seed = a.seed.wrapping_add(size as u64);
    match a.family {
        Family::CliquePath => gen_clique_path(size),
        Family::Star => gen_star(size, &random_weights(size, seed)),
        Family::Bmm => gen_bmm_graph(
            &BoolMatrix::random(size, 0.3, seed),
            &BoolMatrix::random(size, 0.3, !seed),
        ),
        Family::IsolatedEdge => gen_isolated_plus_edge(size),
        Family::Random => {
            let max_m = if a.directed {
                size * size.saturating_sub(1)
            } else {
                size * size.saturating_sub(1) / 2
            };
            let w = if a.weighted {
                (size as u64).saturating_pow(3)
            } else {
                0
            };
            gen_random(
                size,
                (a.edges_per_vertex * size).min(max_m),
                a.directed,
                w,
                seed,
            )
        }
    }
    .map_err(usage)
}

struct Row {
    report: DelayReport,
    max_degree: usize,
    avg_degree: f64,
    best_ms: f64,
    valid: Option<bool>,
}

fn run_bench(a: &BenchArgs, size: usize) -> Result<Row, Failure> {
    let graph = Arc::new(bench_graph(a, size)?);
    let stats = graph.degree_stats();
    let mut best_ms = f64::INFINITY;
    let mut first: Option<DelayReport> = None;
    let mut valid = None;
    for _ in 0..a.repeats.max(1) {
        let mut e = open_enumerator(&graph, &a.flags, a.source)?;
        let mut triples = Vec::new();
        let start = Instant::now();
        let report = run_metered_with(&mut e, |t| {
            if a.check {
                triples.push(t)
            }
        })
        .map_err(|e| Failure::Invalid(e.to_string()))?;
        best_ms = best_ms.min(start.elapsed().as_secs_f64() * 1e3);
        if a.check && valid.is_none() {
            let matrix = brute_force_matrix(&graph);
            let verdict = match a.source {
                Some(s) => validate_single_source(&triples, &matrix, s, a.flags.mode()),
                None => validate(&triples, &matrix, a.flags.mode(), a.flags.dedup),
            };
            valid = Some(verdict.is_ok());
        }
        match &first {
            None => first = Some(report),
            Some(f)
                if f.total_delay_steps != report.total_delay_steps
                    || f.max_delay != report.max_delay =>
            {
                return Err(Failure::Invalid(format!(
                    "size {size}: step counts differ between repeats"
                )));
            }
            Some(_) => {}
        }
    }
    Ok(Row {
        report: first.expect("at least one repeat"),
        max_degree: stats.max_degree,
        avg_degree: stats.avg_degree(),
        best_ms,
        valid,
    })
}

pub fn bench(a: &BenchArgs) -> CmdResult {
    if a.sizes.is_empty() {
        return Err(usage("--sizes is empty"));
    }
    let mut rows = Vec::new();
    for &size in &a.sizes {
        rows.push(run_bench(a, size)?);
    }
    let mut out = String::new();
    match a.format {
        Format::Table => {
            let _ = writeln!(
                out,
                "{:>8} {:>9} {:>6} {:>8} {:>10} {:>9} {:>10} {:>9} {:>11} {:>10} {:>10} {:>5}  variant",
                "n", "m", "delta", "avg_deg", "max_delay", "mean", "fitted", "base", "peak_queue", "lazy_cells", "ms", "ok"
            );
            for r in &rows {
                let p = &r.report;
                let ok = match r.valid {
                    Some(true) => "yes",
                    Some(false) => "NO",
                    None => "-",
                };
                let _ = writeln!(
                    out,
                    "{:>8} {:>9} {:>6} {:>8.2} {:>10} {:>9.2} {:>10.2} {:>9.2} {:>11} {:>10} {:>10.1} {:>5}  {}",
                    p.n,
                    p.m,
                    r.max_degree,
                    r.avg_degree,
                    p.max_delay,
                    p.mean_delay,
                    p.fitted_constant,
                    p.bound_base,
                    p.peak_queue,
                    p.lazy_cells_allocated,
                    r.best_ms,
                    ok,
                    p.variant
                );
            }
        }
        Format::Kv => {
            for (i, r) in rows.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&r.report.to_key_value());
            }
        }
        Format::Records => {
            for r in &rows {
                out.push_str(&r.report.to_records());
            }
        }
    }
    write_output(None, &out)?;
    if rows.iter().any(|r| r.valid == Some(false)) {
        return Err(Failure::Invalid("oracle check failed".into()));
    }
    Ok(())
}

pub fn bmm(a: &BmmArgs) -> CmdResult {
    let ma = load_matrix(&a.a)?;
    let mb = load_matrix(&a.b)?;
    if ma.dim() != mb.dim() {
        return Err(usage(format!(
            "dimension mismatch: {} vs {}",
            ma.dim(),
            mb.dim()
        )));
    }
    let product = bmm_multiply(&ma, &mb).map_err(usage)?;
    write_output(a.out.as_deref(), &product.to_text())?;
    if a.check {
        let direct = bool_product(&ma, &mb).map_err(usage)?;
        if direct != product {
            return Err(Failure::Invalid(
                "product differs from the direct product".into(),
            ));
        }
        eprintln!("check ok");
    }
    Ok(())
}
