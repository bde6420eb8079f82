//! `homden`: build bipartite graphs, chain hypergraphs, and product kernels;
//! compute homomorphism densities over step graphons; and run the seeded
//! verification checks.
//!
//! Exit codes: 0 on success (and on passing checks), 1 when a check or
//! comparison fails (the report is still written), 2 on usage errors and
//! infeasible requests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use homden::qarith::{format_rat, parse_decimal_rat};
use homden::reflection::reflection_hypergraph_capped;
use homden::value::DEFAULT_TERM_CAP;
use homden::{
    blowup_spec, g_chain, g_chain_spec, h_chain, h_chain_spec, hyper_density_kernel,
    hyper_density_oracle, partite_isomorphic, product_kernel, run_check, run_negative_control,
    BipartiteGraph, CheckConfig, CheckId, EvalMode, Evaluator, KernelRef, PartiteHypergraph,
    ProductKernel, ReflectionSpec, StepGraphon, StepKernel, TolerancePolicy, WeightVector,
};

#[derive(Parser)]
#[command(
    name = "homden",
    version,
    about = "Homomorphism densities of bipartite graphs and chain hypergraphs over step graphons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a named graph, hypergraph, graphon, or kernel as JSON.
    #[command(subcommand)]
    Construct(Construct),
    /// Compute a homomorphism density.
    #[command(subcommand)]
    Density(Density),
    /// Run a named verification check and write its report.
    Check(CheckArgs),
    /// Print the smallest blow-up exponent with which a graph satisfies the
    /// degree divisibility conditions.
    Minp {
        /// Graph JSON file.
        input: PathBuf,
    },
    /// Build the companion graph whose disjoint union with the input has a
    /// degree profile meeting the divisibility conditions.
    Companion {
        /// Graph JSON file.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coset constructions from reflection-group specs.
    #[command(subcommand)]
    Reflect(Reflect),
}

#[derive(Subcommand)]
enum Construct {
    /// Möbius–Kantor graph: K_{5,5} minus a 10-cycle.
    Mobius(OutArg),
    /// Möbius–Kantor graph with every right vertex doubled.
    MobiusSquared(OutArg),
    /// Containment graph between [m] and its r-subsets.
    Incidence {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Containment graph between [m] and all nonempty subsets of size <= r.
    Downset {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Complete bipartite graph K_{a,b}.
    Complete {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Even cycle C_{2k}, bipartitioned by parity.
    Cycle {
        /// Half the cycle length (k >= 2).
        #[arg(long)]
        half: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// p-fold blow-up of a graph's right class.
    Blowup {
        /// Graph JSON file.
        input: PathBuf,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Disjoint union of two graphs.
    Union {
        input: PathBuf,
        other: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Chain hypergraph over the single host [r].
    GChain {
        #[arg(long)]
        r: usize,
        /// Degree weights, e.g. "2,1" or "1:2,2:1".
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Chain hypergraph with one host per r-subset of [m].
    HChain {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Product kernel pairing the level-0 variable with each chain level.
    Kernel {
        /// Step graphon JSON file.
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Random step graphon drawn from a seed.
    RandomGraphon {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        blocks: usize,
        #[arg(long = "denom-bound", default_value_t = 6)]
        denom_bound: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// One-block graphon with a single value.
    ConstantGraphon {
        /// Value in [0,1], e.g. "1/2" or "0.25".
        value: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum Density {
    /// Plain homomorphism density t_H(W) as an exact rational.
    Hom {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        graphon: PathBuf,
        /// Use the brute-force all-vertex oracle instead of the fast path.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        cap: Option<u128>,
    },
    /// Edge density t_{K_2}(W).
    Edge {
        #[arg(long)]
        graphon: PathBuf,
    },
    /// Weighted density: degree-k right vertices contribute their
    /// neighborhood factor raised to the degree-k weight.
    Weighted {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long)]
        cap: Option<u128>,
    },
    /// p-th moment of the rooted density over the left class; equals the
    /// density of the p-fold blow-up.
    Rooted {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long)]
        power: u64,
        #[arg(long)]
        cap: Option<u128>,
    },
    /// Chain-hypergraph density under a product or step kernel.
    Hyper {
        #[arg(long)]
        hypergraph: PathBuf,
        /// Kernel JSON: a product kernel (weights/values/exponents) or a
        /// plain step kernel (arity/weights/values).
        #[arg(long)]
        kernel: PathBuf,
        /// Evaluate by brute force over all classes.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long)]
        cap: Option<u128>,
    },
}

#[derive(Subcommand)]
enum Reflect {
    /// Spec whose coset hypergraph is the single-host chain hypergraph.
    GSpec {
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Spec whose coset hypergraph is the multi-host chain hypergraph.
    HSpec {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Extend a spec with a commuting blow-up factor on one class.
    BlowupSpec {
        /// Spec JSON file.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        class: usize,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build the coset hypergraph of a spec.
    Build {
        #[arg(long)]
        spec: PathBuf,
        /// Group-order cap.
        #[arg(long)]
        cap: Option<u128>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compare a spec's coset hypergraph against a hypergraph file; exits 1
    /// when they are not isomorphic as partite hypergraphs.
    Compare {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cap: Option<u128>,
    },
}

#[derive(Args)]
struct OutArg {
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModeArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// In exact mode, permit fractional powers whenever the operand has an
    /// exact root of the required order.
    #[arg(long)]
    power_compat: bool,
    /// Mantissa bits for float mode.
    #[arg(long, default_value_t = 128)]
    precision: u32,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    Exact,
    Float,
}

impl ModeArgs {
    fn eval_mode(&self) -> EvalMode {
        match self.mode {
            ModeArg::Exact => EvalMode::Exact {
                power_compatible: self.power_compat,
            },
            ModeArg::Float => EvalMode::Float {
                precision_bits: self.precision,
            },
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    /// Check name (see --list), or "negative_control".
    name: Option<String>,
    /// List the available checks.
    #[arg(long)]
    list: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Largest number of graphon blocks per trial.
    #[arg(long, default_value_t = 3)]
    blocks: usize,
    /// Largest denominator for random graphon entries.
    #[arg(long = "denom-bound", default_value_t = 6)]
    denom_bound: u64,
    /// Relative tolerance for float margins, e.g. "1e-9".
    #[arg(long)]
    tolerance: Option<String>,
    /// Force an arithmetic mode (default: each check's own).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    power_compat: bool,
    #[arg(long, default_value_t = 128)]
    precision: u32,
    /// Worker threads for trials.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Term cap for density evaluations.
    #[arg(long)]
    cap: Option<u128>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Construct(what) => {
            run_construct(what)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Density(what) => {
            run_density(what)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check(args) => run_check_cmd(args),
        Command::Minp { input } => {
            let graph: BipartiteGraph = load_json(&input)?;
            print_stdout(&format!("{}\n", graph.minimal_blowup_exponent()?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Companion { input, out } => {
            let graph: BipartiteGraph = load_json(&input)?;
            emit_json(&OutArg { out }, &graph.companion_graph()?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reflect(what) => run_reflect(what),
    }
}

fn run_construct(what: Construct) -> Result<()> {
    match what {
        Construct::Mobius(out) => emit_json(&out, &BipartiteGraph::mobius_kantor()),
        Construct::MobiusSquared(out) => {
            emit_json(&out, &BipartiteGraph::mobius_kantor().blow_up(2)?)
        }
        Construct::Incidence { m, r, out } => emit_json(&out, &BipartiteGraph::incidence(m, r)?),
        Construct::Downset { m, r, out } => emit_json(&out, &BipartiteGraph::downset(m, r)?),
        Construct::Complete { a, b, out } => {
            emit_json(&out, &BipartiteGraph::complete_bipartite(a, b)?)
        }
        Construct::Cycle { half, out } => emit_json(&out, &BipartiteGraph::even_cycle(half)?),
        Construct::Blowup { input, p, out } => {
            let graph: BipartiteGraph = load_json(&input)?;
            emit_json(&out, &graph.blow_up(p)?)
        }
        Construct::Union { input, other, out } => {
            let a: BipartiteGraph = load_json(&input)?;
            let b: BipartiteGraph = load_json(&other)?;
            emit_json(&out, &a.disjoint_union(&b))
        }
        Construct::GChain { r, alpha, out } => {
            let alpha = WeightVector::parse(&alpha)?;
            emit_json(&out, &g_chain(r, &alpha)?)
        }
        Construct::HChain { m, r, alpha, out } => {
            let alpha = WeightVector::parse(&alpha)?;
            emit_json(&out, &h_chain(m, r, &alpha)?)
        }
        Construct::Kernel {
            graphon,
            m,
            r,
            alpha,
            out,
        } => {
            let base: StepGraphon = load_json(&graphon)?;
            let alpha = WeightVector::parse(&alpha)?;
            emit_json(&out, &product_kernel(&base, m, r, &alpha)?)
        }
        Construct::RandomGraphon {
            seed,
            blocks,
            denom_bound,
            out,
        } => emit_json(&out, &StepGraphon::random(seed, blocks, denom_bound)),
        Construct::ConstantGraphon { value, out } => {
            let c = parse_decimal_rat(&value)?;
            emit_json(&out, &StepGraphon::constant(c)?)
        }
    }
}

fn run_density(what: Density) -> Result<()> {
    match what {
        Density::Hom {
            graph,
            graphon,
            oracle,
            cap,
        } => {
            let h: BipartiteGraph = load_json(&graph)?;
            let w: StepGraphon = load_json(&graphon)?;
            let cap = cap.unwrap_or(DEFAULT_TERM_CAP);
            let t = if oracle {
                w.hom_density_oracle(&h, cap)?
            } else {
                w.hom_density_capped(&h, cap)?
            };
            print_stdout(&format!("{}\n", format_rat(&t)));
            Ok(())
        }
        Density::Edge { graphon } => {
            let w: StepGraphon = load_json(&graphon)?;
            print_stdout(&format!("{}\n", format_rat(&w.edge_density())));
            Ok(())
        }
        Density::Weighted {
            graph,
            graphon,
            alpha,
            mode,
            cap,
        } => {
            let h: BipartiteGraph = load_json(&graph)?;
            let w: StepGraphon = load_json(&graphon)?;
            let alpha = WeightVector::parse(&alpha)?;
            let mut ev = Evaluator::new(mode.eval_mode(), cap.unwrap_or(DEFAULT_TERM_CAP));
            let t = w.weighted_density(&h, &alpha, &mut ev)?;
            print_stdout(&format!("{}\n", t.to_wire()));
            Ok(())
        }
        Density::Rooted {
            graph,
            graphon,
            power,
            cap,
        } => {
            let h: BipartiteGraph = load_json(&graph)?;
            let w: StepGraphon = load_json(&graphon)?;
            let t = w.rooted_power_mean(&h, power, cap.unwrap_or(DEFAULT_TERM_CAP))?;
            print_stdout(&format!("{}\n", format_rat(&t)));
            Ok(())
        }
        Density::Hyper {
            hypergraph,
            kernel,
            oracle,
            mode,
            cap,
        } => {
            let g: PartiteHypergraph = load_json(&hypergraph)?;
            let kernel = load_kernel(&kernel)?;
            let kernel_ref = match &kernel {
                KernelFile::Product(k) => KernelRef::Product(k),
                KernelFile::Step(k) => KernelRef::Step(k),
            };
            let mut ev = Evaluator::new(mode.eval_mode(), cap.unwrap_or(DEFAULT_TERM_CAP));
            let t = if oracle {
                hyper_density_oracle(&g, kernel_ref, &mut ev)?
            } else {
                hyper_density_kernel(&g, kernel_ref, &mut ev)?
            };
            print_stdout(&format!("{}\n", t.to_wire()));
            Ok(())
        }
    }
}

fn run_check_cmd(args: CheckArgs) -> Result<ExitCode> {
    if args.list {
        let mut listing = String::new();
        for id in CheckId::ALL {
            listing.push_str(&format!("{:<24} {}\n", id.as_str(), id.summary()));
        }
        listing.push_str(&format!(
            "{:<24} {}\n",
            "negative_control", "deliberately false bound; a healthy harness fails it"
        ));
        print_stdout(&listing);
        return Ok(ExitCode::SUCCESS);
    }
    let name = args
        .name
        .as_deref()
        .ok_or_else(|| anyhow!("missing check name (try --list)"))?;
    let relative_tolerance = match &args.tolerance {
        Some(text) => {
            let tol = parse_decimal_rat(text)?;
            if tol <= homden::Rat::from_integer(0.into()) {
                bail!("tolerance must be positive, got {text}");
            }
            tol
        }
        None => TolerancePolicy::default().relative_tolerance,
    };
    let mode = args.mode.map(|m| match m {
        ModeArg::Exact => EvalMode::Exact {
            power_compatible: args.power_compat,
        },
        ModeArg::Float => EvalMode::Float {
            precision_bits: args.precision,
        },
    });
    let config = CheckConfig {
        trials: args.trials,
        max_blocks: args.blocks,
        denominator_bound: args.denom_bound,
        term_cap: args.cap.unwrap_or(DEFAULT_TERM_CAP),
        jobs: args.jobs,
        tolerance: TolerancePolicy {
            mode,
            relative_tolerance,
        },
    };
    let report = if name == "negative_control" {
        run_negative_control(args.seed, &config)?
    } else {
        let id = CheckId::parse(name)
            .ok_or_else(|| anyhow!("unknown check {name:?} (try --list)"))?;
        run_check(id, args.seed, &config)?
    };
    let doc = match args.format {
        FormatArg::Json => report.to_json()?,
        FormatArg::Csv => report.to_csv()?,
    };
    match &args.out {
        Some(path) => {
            fs::write(path, &doc).with_context(|| format!("writing {}", path.display()))?;
            eprintln!(
                "{}: {} ({} records, min margin {})",
                report.check,
                if report.pass { "pass" } else { "FAIL" },
                report.records.len(),
                report.min_margin
            );
        }
        None => print_stdout(&format!("{doc}\n")),
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_reflect(what: Reflect) -> Result<ExitCode> {
    match what {
        Reflect::GSpec { r, out } => {
            emit_json(&out, &g_chain_spec(r)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Reflect::HSpec { m, r, out } => {
            emit_json(&out, &h_chain_spec(m, r)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Reflect::BlowupSpec {
            spec,
            class,
            p,
            out,
        } => {
            let base: ReflectionSpec = load_json(&spec)?;
            emit_json(&out, &blowup_spec(&base, class, p)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Reflect::Build { spec, cap, out } => {
            let spec: ReflectionSpec = load_json(&spec)?;
            let graph = build_cosets(&spec, cap)?;
            emit_json(&out, &graph)?;
            Ok(ExitCode::SUCCESS)
        }
        Reflect::Compare { spec, graph, cap } => {
            let spec: ReflectionSpec = load_json(&spec)?;
            let direct: PartiteHypergraph = load_json(&graph)?;
            let mirrored = build_cosets(&spec, cap)?;
            match partite_isomorphic(&direct, &mirrored)? {
                Some(mapping) => {
                    print_stdout(&format!("{}\n", serde_json::to_string(&mapping)?));
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    eprintln!("not isomorphic");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn build_cosets(spec: &ReflectionSpec, cap: Option<u128>) -> Result<PartiteHypergraph> {
    let graph = match cap {
        Some(cap) => reflection_hypergraph_capped(spec, cap)?,
        None => homden::reflection_hypergraph(spec)?,
    };
    Ok(graph)
}

enum KernelFile {
    Product(ProductKernel),
    Step(StepKernel),
}

fn load_kernel(path: &Path) -> Result<KernelFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(product) = serde_json::from_str::<ProductKernel>(&text) {
        return Ok(KernelFile::Product(product));
    }
    let step = serde_json::from_str::<StepKernel>(&text)
        .with_context(|| format!("{} is neither a product nor a step kernel", path.display()))?;
    Ok(KernelFile::Step(step))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit_json<T: serde::Serialize>(out: &OutArg, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match &out.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print_stdout(&text);
            Ok(())
        }
    }
}

/// Prints to stdout, treating a closed pipe (`homden check ... | head`) as a
/// normal early exit instead of a panic.
fn print_stdout(text: &str) {
    use std::io::Write;
    let mut out = io::stdout().lock();
    if let Err(err) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if err.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {err}");
        std::process::exit(2);
    }
}
