//! Command-line surface: `solve`, `verify`, `bound`, `gen`, `bench`.
//!
//! Exit codes: 0 success (and feasible for `verify`), 1 I/O or parse
//! failure, 2 size-limit refusal, 3 infeasible solution in `verify`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bounds::{
    bound_report, rat_json, rat_to_f64, rat_to_string, rat_u64, tour_certificate, BoundReport,
};
use crate::graph::Instance;
use crate::instgen::{self, StructuredKind};
use crate::itp;
use crate::oracle;
use crate::tour::{solution_from_json, solution_to_json, validate_solution, SolutionJson};
use crate::tsp;

#[derive(Parser)]
#[command(
    name = "gcvrp",
    about = "Capacitated vehicle routing on unweighted graphs: solve, bound, verify, generate, benchmark",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TSP construction plus tour partitioning on an instance.
    Solve(SolveArgs),
    /// Check a solution file: feasibility, per-tour certificates, lower bound.
    Verify(VerifyArgs),
    /// Print the exact lower bounds of an instance.
    Bound(BoundArgs),
    /// Generate instances.
    Gen {
        #[command(subcommand)]
        family: GenCommand,
    },
    /// Benchmark solver variants over an instance family, emitting CSV.
    Bench {
        #[command(subcommand)]
        family: BenchCommand,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (.gcvrp).
    instance: PathBuf,
    /// TSP construction to partition.
    #[arg(long, value_enum, default_value_t = Method::Christofides)]
    method: Method,
    /// Write the solution JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Vertex limit for the exact TSP method.
    #[arg(long, default_value_t = tsp::DEFAULT_EXACT_TSP_VERTEX_LIMIT)]
    limit_exact: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Christofides,
    DoubleTree,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Christofides => "christofides",
            Method::DoubleTree => "double-tree",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file (.gcvrp).
    instance: PathBuf,
    /// Solution file (JSON).
    solution: PathBuf,
    /// Emit a machine-readable JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// Instance file (.gcvrp).
    instance: PathBuf,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Depot-cycle family on which the structure bound is tight.
    Tight {
        /// Cycle capacity (odd, >= 3).
        #[arg(long)]
        k: usize,
        /// Terminal count (positive multiple of k).
        #[arg(long)]
        n: usize,
        /// Write the instance here (plus a `<out>.meta.json` sidecar).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random connected graph.
    Random {
        #[arg(long)]
        vertices: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        capacity: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministic fixture graphs.
    Structured {
        #[arg(long, value_enum)]
        shape: Shape,
        /// Terminal/leaf count for path, star and cycle.
        #[arg(long)]
        size: Option<usize>,
        /// Grid rows.
        #[arg(long)]
        rows: Option<usize>,
        /// Grid columns.
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        capacity: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Path,
    Star,
    Cycle,
    Grid,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Tight-family sweep over capacities and cycle counts.
    Tight {
        /// Comma-separated odd capacities, e.g. `3,5`.
        #[arg(long, default_value = "3,5")]
        k_list: String,
        /// Comma-separated cycle counts; each pairs with every k as n = c*k.
        #[arg(long, default_value = "2,3,4")]
        cycles: String,
        #[command(flatten)]
        common: BenchCommon,
    },
    /// Seeded random instances.
    Random {
        /// Number of instances; instance i uses seed base_seed + i.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Terminal counts are drawn from 1..=max_n.
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, default_value_t = 42)]
        base_seed: u64,
        #[command(flatten)]
        common: BenchCommon,
    },
}

#[derive(Args)]
struct BenchCommon {
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Terminal limit for the oracle column.
    #[arg(long, default_value_t = oracle::DEFAULT_ORACLE_TERMINAL_LIMIT)]
    limit_oracle: usize,
    /// Fill the runtime_ms column. Off by default so CSV output is
    /// byte-identical across runs with the same seed.
    #[arg(long)]
    timing: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Gen { family } => cmd_gen(family),
        Command::Bench { family } => cmd_bench(family),
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))?;
    let inst =
        Instance::parse(&text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    if inst.capacity_clamped() {
        eprintln!(
            "warning: requested capacity {} exceeds terminal count {}; clamped to {}",
            inst.requested_capacity(),
            inst.num_terminals(),
            inst.capacity()
        );
    }
    Ok(inst)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn print_bounds(report: &BoundReport) {
    println!(
        "rad = {} (~{:.6})",
        rat_to_string(&report.rad),
        rat_to_f64(&report.rad)
    );
    println!(
        "structure_bound = {} (~{:.6})",
        rat_to_string(&report.structure_bound),
        rat_to_f64(&report.structure_bound)
    );
}

fn cmd_solve(args: SolveArgs) -> Result<i32, Failure> {
    let inst = load_instance(&args.instance)?;
    let tour = match args.method {
        Method::Exact => tsp::exact_tsp_with_limit(&inst, args.limit_exact)
            .map_err(|e| Failure::new(2, e.to_string()))?,
        Method::Christofides => tsp::christofides(&inst),
        Method::DoubleTree => tsp::double_tree(&inst),
    };
    let (sol, report) =
        itp::itp_with_report(&inst, &tour).map_err(|e| Failure::new(1, e.to_string()))?;
    let bounds = bound_report(&inst);
    let cost = sol.total_cost();
    println!(
        "instance: {} (n={}, k={})",
        args.instance.display(),
        inst.num_terminals(),
        inst.capacity()
    );
    println!(
        "tsp method: {}; tour cost: {}",
        args.method.name(),
        tour.cost()
    );
    println!(
        "itp offset: {} of {}; solution cost: {}",
        report.chosen_offset,
        report.offset_costs.len(),
        cost
    );
    print_bounds(&bounds);
    println!(
        "ag_bound = {} (~{:.6}); ag_bound_ok = {}",
        rat_to_string(&report.ag_bound),
        rat_to_f64(&report.ag_bound),
        report.ag_bound_ok
    );
    let ratio = rat_u64(cost) / bounds.structure_bound.clone();
    println!(
        "cost/structure_bound = {} (~{:.6})",
        rat_to_string(&ratio),
        rat_to_f64(&ratio)
    );
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&solution_to_json(inst.capacity(), &sol))
            .expect("solution serializes");
        fs::write(out, json + "\n")
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", out.display())))?;
        println!("solution written to {}", out.display());
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Failure> {
    let inst = load_instance(&args.instance)?;
    let text = fs::read_to_string(&args.solution)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", args.solution.display())))?;
    let json: SolutionJson = serde_json::from_str(&text)
        .map_err(|e| Failure::new(1, format!("solution schema: {e}")))?;
    if json.capacity != inst.capacity() {
        return Err(Failure::new(
            1,
            format!(
                "solution capacity {} does not match instance capacity {}",
                json.capacity,
                inst.capacity()
            ),
        ));
    }
    let sol =
        solution_from_json(&json).map_err(|e| Failure::new(1, format!("solution schema: {e}")))?;
    let report = validate_solution(&inst, &sol);
    let bounds = bound_report(&inst);
    let certificates: Vec<_> = sol
        .tours
        .iter()
        .map(|t| tour_certificate(&inst, t).ok())
        .collect();
    let bound_ok = rat_u64(report.total_cost) >= bounds.structure_bound;
    if args.json {
        let doc = serde_json::json!({
            "feasible": report.is_feasible(),
            "total_cost": report.total_cost,
            "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "rad": rat_json(&bounds.rad),
            "structure_bound": rat_json(&bounds.structure_bound),
            "cost_at_least_structure_bound": bound_ok,
            "certificates": certificates
                .iter()
                .map(|c| c.as_ref().map(|c| c.to_json()).unwrap_or(serde_json::Value::Null))
                .collect::<Vec<_>>(),
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("report serializes")
        );
    } else {
        println!(
            "solution: {} tours, total cost {}",
            sol.tours.len(),
            report.total_cost
        );
        for v in &report.violations {
            println!("violation: {v}");
        }
        println!("tour  |U|  D  R  delta  witnesses  cost_bound  cost");
        for (i, cert) in certificates.iter().enumerate() {
            match cert {
                Some(c) => println!(
                    "{i}  {}  {}  {}  {}  {}  {}  {}",
                    c.covered.len(),
                    c.dist_sum,
                    c.peak_dist,
                    rat_to_string(&c.delta),
                    c.witness_covered_count,
                    rat_to_string(&c.cost_bound),
                    c.tour_cost
                ),
                None => println!("{i}  (no certificate: tour invalid or empty)"),
            }
        }
        print_bounds(&bounds);
        println!("total cost >= structure_bound: {bound_ok}");
        println!(
            "verdict: {}",
            if report.is_feasible() {
                "FEASIBLE"
            } else {
                "INFEASIBLE"
            }
        );
    }
    Ok(if report.is_feasible() { 0 } else { 3 })
}

fn cmd_bound(args: BoundArgs) -> Result<i32, Failure> {
    let inst = load_instance(&args.instance)?;
    let report = bound_report(&inst);
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report.to_json()).expect("report serializes")
        );
    } else {
        println!("n = {}, k = {}", report.n, report.k);
        print_bounds(&report);
    }
    Ok(0)
}

fn cmd_gen(family: GenCommand) -> Result<i32, Failure> {
    let (instance, meta, out) = match family {
        GenCommand::Tight { k, n, out } => {
            let fam = instgen::tight_instance(k, n).map_err(|e| Failure::new(1, e.to_string()))?;
            let meta = serde_json::json!({
                "family": "tight",
                "k": k,
                "n": n,
                "cycles": fam.cycles.len(),
                "analytic_opt": fam.analytic_opt,
                "analytic_rad": rat_json(&fam.analytic_rad),
            });
            (fam.instance, meta, out)
        }
        GenCommand::Random {
            vertices,
            edge_prob,
            seed,
            capacity,
            out,
        } => {
            let inst = instgen::random_connected(vertices, edge_prob, seed, capacity)
                .map_err(|e| Failure::new(1, e.to_string()))?;
            let meta = serde_json::json!({
                "family": "random",
                "vertices": vertices,
                "edge_prob": edge_prob,
                "seed": seed,
                "capacity": inst.capacity(),
            });
            (inst, meta, out)
        }
        GenCommand::Structured {
            shape,
            size,
            rows,
            cols,
            capacity,
            out,
        } => {
            let need_size = |size: Option<usize>, what: &str| {
                size.ok_or_else(|| Failure::new(1, format!("--size is required for {what}")))
            };
            let kind = match shape {
                Shape::Path => StructuredKind::Path(need_size(size, "path")?),
                Shape::Star => StructuredKind::Star(need_size(size, "star")?),
                Shape::Cycle => StructuredKind::Cycle(need_size(size, "cycle")?),
                Shape::Grid => {
                    let rows =
                        rows.ok_or_else(|| Failure::new(1, "--rows is required for grid"))?;
                    let cols =
                        cols.ok_or_else(|| Failure::new(1, "--cols is required for grid"))?;
                    StructuredKind::Grid(rows, cols)
                }
            };
            let inst =
                instgen::structured(kind, capacity).map_err(|e| Failure::new(1, e.to_string()))?;
            let meta = serde_json::json!({
                "family": "structured",
                "shape": match shape {
                    Shape::Path => "path",
                    Shape::Star => "star",
                    Shape::Cycle => "cycle",
                    Shape::Grid => "grid",
                },
                "capacity": inst.capacity(),
            });
            (inst, meta, out)
        }
    };
    write_or_print(&out, &instance.to_gcvrp())?;
    if let Some(path) = &out {
        let sidecar = PathBuf::from(format!("{}.meta.json", path.display()));
        let body = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        fs::write(&sidecar, body + "\n")
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", sidecar.display())))?;
    }
    Ok(0)
}

struct BenchCase {
    id: String,
    instance: Instance,
}

const BENCH_HEADER: &str = "instance_id,n,k,rad,structure_bound,itp_christofides,itp_doubletree,oracle_opt,ratio_vs_oracle,ratio_vs_bound,ag_bound_ok,runtime_ms";

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>, Failure> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| Failure::new(1, format!("invalid {what} entry `{tok}`")))
        })
        .collect()
}

fn cmd_bench(family: BenchCommand) -> Result<i32, Failure> {
    let (cases, common) = match family {
        BenchCommand::Tight {
            k_list,
            cycles,
            common,
        } => {
            let ks = parse_list(&k_list, "--k-list")?;
            let cycle_counts = parse_list(&cycles, "--cycles")?;
            let mut cases = Vec::new();
            for &k in &ks {
                for &c in &cycle_counts {
                    let n = c * k;
                    let fam = instgen::tight_instance(k, n)
                        .map_err(|e| Failure::new(1, e.to_string()))?;
                    cases.push(BenchCase {
                        id: format!("tight-k{k}-n{n}"),
                        instance: fam.instance,
                    });
                }
            }
            (cases, common)
        }
        BenchCommand::Random {
            count,
            max_n,
            edge_prob,
            base_seed,
            common,
        } => {
            if max_n < 1 {
                return Err(Failure::new(1, "--max-n must be at least 1"));
            }
            let mut cases = Vec::new();
            for i in 0..count {
                let seed = base_seed + i as u64;
                let mut rng = instgen::SplitMix64::new(seed);
                let n = 1 + rng.next_below(max_n as u64) as usize;
                let capacity = 1 + rng.next_below(n as u64) as usize;
                let inst = instgen::random_connected(n + 1, edge_prob, seed, capacity)
                    .map_err(|e| Failure::new(1, e.to_string()))?;
                cases.push(BenchCase {
                    id: format!("random-s{seed}"),
                    instance: inst,
                });
            }
            (cases, common)
        }
    };

    let pool = build_pool()?;
    let rows: Vec<String> = pool.install(|| {
        cases
            .par_iter()
            .map(|case| bench_row(case, common.limit_oracle, common.timing))
            .collect()
    });
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    write_or_print(&common.out, &csv)?;
    Ok(0)
}

fn build_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("GCVRP_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            Failure::new(
                1,
                format!("GCVRP_THREADS must be a positive integer, got `{raw}`"),
            )
        })?;
        if threads == 0 {
            return Err(Failure::new(1, "GCVRP_THREADS must be a positive integer"));
        }
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Failure::new(1, format!("cannot build thread pool: {e}")))
}

fn bench_row(case: &BenchCase, limit_oracle: usize, timing: bool) -> String {
    let inst = &case.instance;
    let start = Instant::now();
    let chr_tour = tsp::christofides(inst);
    let (_, chr_report) = itp::itp_with_report(inst, &chr_tour).expect("tour fits its instance");
    let dbl_tour = tsp::double_tree(inst);
    let (_, dbl_report) = itp::itp_with_report(inst, &dbl_tour).expect("tour fits its instance");
    let bounds = bound_report(inst);
    let chr_cost = chr_report.min_cost();
    let oracle_opt = if inst.num_terminals() <= limit_oracle {
        Some(
            oracle::exact_cvrp_with_limit(inst, limit_oracle)
                .expect("within limit")
                .total_cost(),
        )
    } else {
        None
    };
    let ratio_vs_oracle = oracle_opt
        .map(|opt| rat_to_string(&(rat_u64(chr_cost) / rat_u64(opt))))
        .unwrap_or_default();
    let ratio_vs_bound = rat_to_string(&(rat_u64(chr_cost) / bounds.structure_bound.clone()));
    let runtime = if timing {
        start.elapsed().as_millis().to_string()
    } else {
        String::new()
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        case.id,
        inst.num_terminals(),
        inst.capacity(),
        rat_to_string(&bounds.rad),
        rat_to_string(&bounds.structure_bound),
        chr_cost,
        dbl_report.min_cost(),
        oracle_opt.map(|o| o.to_string()).unwrap_or_default(),
        ratio_vs_oracle,
        ratio_vs_bound,
        chr_report.ag_bound_ok && dbl_report.ag_bound_ok,
        runtime
    )
}
