//! `strongcluster`: generate graphs, cluster and decompose them, verify the
//! results and measure round counts.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use strongcluster::artifact::{to_pretty, Artifact, ClusteringJson, DecompositionJson, MisJson};
use strongcluster::congest::{round_budget, run_protocol_on, SimConfig, ROUNDS_PER_B6_BOUND};
use strongcluster::decomposition::{cluster_within, network_decomposition_with, ClusterRun};
use strongcluster::edgelist;
use strongcluster::exec::{self, Execution};
use strongcluster::gen::{generate, Family, FamilySpec, IdScheme};
use strongcluster::verify::{check_clustering, check_decomposition, check_mis, Report};
use strongcluster::{mis_via_decomposition, Backend, Graph, IdAssignment, NodeSet};

const TRACE_DIR_VAR: &str = "STRONGCLUSTER_TRACE_DIR";

#[derive(Parser)]
#[command(
    name = "strongcluster",
    version,
    about = "Deterministic strong-diameter clustering"
)]
struct Cli {
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a graph and emit the clustering as JSON.
    Cluster {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = BackendArg::Reference)]
        backend: BackendArg,
        #[command(flatten)]
        out: Output,
    },
    /// Network decomposition by repeated clustering.
    Decompose {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = BackendArg::Reference)]
        backend: BackendArg,
        #[command(flatten)]
        out: Output,
    },
    /// Maximal independent set built color by color on a decomposition.
    Mis {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Output,
    },
    /// Check a JSON artifact against its graph.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        artifact: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Emit a generated graph as an edge list.
    Gen {
        #[command(flatten)]
        source: Source,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sweep a family over sizes and emit CSV.
    Bench {
        #[arg(long)]
        family: String,
        /// Comma-separated node counts.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = IdsArg::Index)]
        ids: IdsArg,
        #[arg(long, value_enum, default_value_t = BackendArg::Simulated)]
        backend: BackendArg,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    /// Edge-list file.
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    /// path, cycle, grid, complete, tree, hypercube, gnp, star or edgeless.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability for gnp.
    #[arg(long)]
    p: Option<f64>,
    /// Children per node for tree.
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = IdsArg::Index)]
    ids: IdsArg,
    /// Identifier width; defaults to ceil(log2 n).
    #[arg(long)]
    bits: Option<u32>,
}

#[derive(Args)]
struct Output {
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Run the matching checks and fail on any violation.
    #[arg(long)]
    verify: bool,
    /// Write trace logs (to $STRONGCLUSTER_TRACE_DIR or ./strongcluster-trace).
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Reference,
    Simulated,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum IdsArg {
    Index,
    Reversed,
    Permuted,
    Scattered,
}

impl From<IdsArg> for IdScheme {
    fn from(a: IdsArg) -> Self {
        match a {
            IdsArg::Index => IdScheme::Index,
            IdsArg::Reversed => IdScheme::Reversed,
            IdsArg::Permuted => IdScheme::Permuted,
            IdsArg::Scattered => IdScheme::Scattered,
        }
    }
}

/// Exit status 2 with a message.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Res<T> = Result<T, UsageError>;

fn family_of(name: &str, n: usize, p: Option<f64>, arity: Option<usize>) -> Res<Family> {
    let f = Family::sized(name, n)?;
    Ok(match f {
        Family::Gnp { n, p: default } => Family::Gnp {
            n,
            p: p.unwrap_or(default),
        },
        Family::Tree { n, arity: default } => Family::Tree {
            n,
            arity: arity.unwrap_or(default),
        },
        other => other,
    })
}

fn load(src: &Source) -> Res<(Graph, IdAssignment)> {
    let (g, ids) = match (&src.input, &src.family) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            edgelist::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, Some(name)) => {
            let n = src.n.ok_or("--family needs --n")?;
            let family = family_of(name, n, src.p, src.arity)?;
            generate(&FamilySpec::new(family).seed(src.seed).ids(src.ids.into()))?
        }
        (None, None) => return Err(UsageError("give --input or --family".into())),
    };
    match src.bits {
        Some(b) => Ok((g, IdAssignment::new(ids.as_slice().to_vec(), b)?)),
        None => Ok((g, ids)),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn trace_dir() -> Res<PathBuf> {
    let dir = std::env::var_os(TRACE_DIR_VAR)
        .map_or_else(|| PathBuf::from("strongcluster-trace"), PathBuf::from);
    fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    Ok(dir)
}

fn write_traces(run: &ClusterRun, ids: &IdAssignment, prefix: &str) -> Res<()> {
    let dir = trace_dir()?;
    for ph in run.phases.iter().filter(|ph| !ph.step_traces.is_empty()) {
        fs::write(
            dir.join(format!("{prefix}-phase-{}.log", ph.phase)),
            ph.trace_log(ids),
        )?;
    }
    if let (Some(t), Some(stats)) = (&run.transcript, &run.stats) {
        fs::write(
            dir.join(format!("{prefix}-rounds.log")),
            t.render_rounds(stats.rounds),
        )?;
        if !t.messages.is_empty() {
            fs::write(
                dir.join(format!("{prefix}-messages.log")),
                t.render_messages(),
            )?;
        }
    }
    Ok(())
}

fn report_failures(r: &Report) {
    for c in r.failures() {
        eprintln!("FAIL {}: {}", c.name, c.witness.as_deref().unwrap_or(""));
    }
}

fn sim_config(exec: Execution, trace: bool) -> SimConfig {
    SimConfig {
        exec,
        log_messages: trace,
        ..SimConfig::default()
    }
}

fn cluster(exec: Execution, source: &Source, backend: BackendArg, out: &Output) -> Res<ExitCode> {
    let (g, ids) = load(source)?;
    let all = NodeSet::full(g.node_count());
    let cfg = sim_config(exec, out.trace);
    let reference = (backend != BackendArg::Simulated)
        .then(|| cluster_within(&g, &ids, &all, Backend::Reference, &cfg))
        .transpose()?;
    let simulated = (backend != BackendArg::Reference)
        .then(|| cluster_within(&g, &ids, &all, Backend::Simulated, &cfg))
        .transpose()?;
    let main = reference.as_ref().or(simulated.as_ref()).unwrap();
    let mut json = ClusteringJson::new(
        &g,
        &main.clustering,
        simulated.as_ref().and_then(|s| s.stats.as_ref()),
    );
    let mut status = ExitCode::SUCCESS;
    if let (Some(r), Some(s)) = (&reference, &simulated) {
        let same = r.clustering == s.clustering;
        json.equivalence = Some(if same { "PASS" } else { "FAIL" }.into());
        if !same {
            eprintln!("executors disagree");
            status = ExitCode::from(1);
        }
    }
    if out.trace {
        if let Some(r) = &reference {
            write_traces(r, &ids, "reference")?;
        }
        if let Some(s) = &simulated {
            write_traces(s, &ids, "simulated")?;
        }
    }
    emit(out.output.as_deref(), &to_pretty(&json))?;
    if out.verify {
        let r = check_clustering(&g, &ids, &main.clustering);
        if !r.all_pass() {
            report_failures(&r);
            status = ExitCode::from(1);
        }
    }
    Ok(status)
}

fn decompose(source: &Source, backend: BackendArg, out: &Output) -> Res<ExitCode> {
    let (g, ids) = load(source)?;
    let b = match backend {
        BackendArg::Simulated => Backend::Simulated,
        BackendArg::Reference => Backend::Reference,
        BackendArg::Both => {
            return Err(UsageError(
                "decompose takes --backend reference or simulated".into(),
            ))
        }
    };
    let d = network_decomposition_with(&g, &ids, b)?;
    emit(
        out.output.as_deref(),
        &to_pretty(&DecompositionJson::from(&d)),
    )?;
    if out.verify {
        let r = check_decomposition(&g, &ids, &d);
        if !r.all_pass() {
            report_failures(&r);
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn mis(source: &Source, out: &Output) -> Res<ExitCode> {
    let (g, ids) = load(source)?;
    let d = network_decomposition_with(&g, &ids, Backend::Reference)?;
    let set = mis_via_decomposition(&g, &ids, &d);
    emit(
        out.output.as_deref(),
        &to_pretty(&MisJson {
            n: g.node_count(),
            mis: set.clone(),
        }),
    )?;
    if out.verify {
        let r = check_mis(&g, &ids, &set);
        if !r.all_pass() {
            report_failures(&r);
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(source: &Source, artifact: &Path, json: bool) -> Res<ExitCode> {
    let (g, ids) = load(source)?;
    let text = fs::read_to_string(artifact).map_err(|e| format!("{}: {e}", artifact.display()))?;
    let parsed = Artifact::parse(&text).map_err(|e| format!("{}: {e}", artifact.display()))?;
    let report = match parsed {
        Artifact::Clustering(c) => {
            let mut r = check_clustering(&g, &ids, &c.to_clustering());
            r.record(
                "coverage-field",
                (c.coverage != c.to_clustering().coverage())
                    .then(|| format!("coverage field says {}", c.coverage)),
            );
            r
        }
        Artifact::Decomposition(d) => {
            let mut r = check_decomposition(&g, &ids, &d.to_decomposition());
            r.record(
                "colors-field",
                (d.colors != d.terminals.len()).then(|| format!("colors field says {}", d.colors)),
            );
            r
        }
        Artifact::Mis(m) => {
            let mut r = check_mis(&g, &ids, &m.mis);
            r.record(
                "shape",
                (m.n != g.node_count()).then(|| format!("artifact has n={}", m.n)),
            );
            r
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    } else {
        print!("{}", report.render_text());
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[allow(clippy::too_many_arguments)]
fn bench(
    exec: Execution,
    family: &str,
    sizes: &[usize],
    seed: u64,
    ids: IdsArg,
    backend: BackendArg,
    output: Option<&Path>,
) -> Res<ExitCode> {
    if backend == BackendArg::Both {
        return Err(UsageError(
            "bench takes --backend reference or simulated".into(),
        ));
    }
    let specs = sizes
        .iter()
        .map(|&n| {
            Ok(FamilySpec::new(family_of(family, n, None, None)?)
                .seed(seed)
                .ids(ids.into()))
        })
        .collect::<Res<Vec<_>>>()?;
    // Instances run in parallel; each simulation then runs sequentially.
    let rows = exec::map(
        exec,
        &specs,
        |spec| -> Result<(usize, f64, String), String> {
            let (g, ids) = generate(spec).map_err(|e| e.to_string())?;
            let all = NodeSet::full(g.node_count());
            let b = ids.bits();
            let (clustering, rounds) = if backend == BackendArg::Simulated {
                let run =
                    run_protocol_on(&g, &ids, &all, &sim_config(Execution::Sequential, false))
                        .map_err(|e| e.to_string())?;
                (run.clustering, run.stats.rounds)
            } else {
                let run = cluster_within(&g, &ids, &all, Backend::Reference, &SimConfig::default())
                    .map_err(|e| e.to_string())?;
                (run.clustering, round_budget(g.node_count(), b))
            };
            let diam = clustering.max_diameter_observed(&g).unwrap_or(0);
            let ratio = rounds as f64 / (b as f64).powi(6);
            let n = g.node_count();
            Ok((
                n,
                ratio,
                format!(
                    "{n},{b},{},{diam},{rounds},{ratio:.4}\n",
                    clustering.coverage()
                ),
            ))
        },
    );
    let mut csv = String::from("n,b,coverage,max_diameter,rounds,rounds_per_b6\n");
    let mut worst: Option<(usize, f64)> = None;
    for row in rows {
        let (n, ratio, line) = row?;
        if n >= 16 && worst.is_none_or(|(_, w)| ratio > w) {
            worst = Some((n, ratio));
        }
        csv.push_str(&line);
    }
    emit(output, &csv)?;
    if let Some((n, w)) = worst {
        eprintln!("max rounds/b^6 for n >= 16: {w:.4} at n={n} (bound {ROUNDS_PER_B6_BOUND})");
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Res<ExitCode> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Cluster {
            source,
            backend,
            out,
        } => cluster(exec, source, *backend, out),
        Command::Decompose {
            source,
            backend,
            out,
        } => decompose(source, *backend, out),
        Command::Mis { source, out } => mis(source, out),
        Command::Verify {
            source,
            artifact,
            json,
        } => verify(source, artifact, *json),
        Command::Gen { source, output } => {
            let (g, ids) = load(source)?;
            emit(output.as_deref(), &edgelist::render(&g, &ids))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            family,
            sizes,
            seed,
            ids,
            backend,
            output,
        } => bench(
            exec,
            family,
            sizes,
            *seed,
            *ids,
            *backend,
            output.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
