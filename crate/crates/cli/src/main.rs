use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use fracdeg::acceptance;
use fracdeg::certificates::{
    cert_complete_bipartite, cert_even_cycle, cert_linear_forest_reduction, cert_odd_cycle,
    cert_path,
};
use fracdeg::engine::{verify_certificate, Certificate, Mode};
use fracdeg::graph::{parse_graph, serialize_graph, Graph, GraphFamily, GraphFormat};
use fracdeg::oracle::{
    build_cover, check_dp_colorable, check_stdp_implication, cover_from_json, find_transversal,
    multipartite_bound, multipartite_order_scan, CoverSpec, DpStrategy, DpVerdict,
};
use fracdeg::search::{decide_uniform, ratio_scan, Answer, SearchConfig};

const EXIT_YES: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(name = "fracdeg", version, about = "Shield/target degeneracy toolkit")]
struct Cli {
    /// Graph file format for input and output.
    #[arg(long, global = true, default_value = "edge_json")]
    format: GraphFormat,
    /// Worker threads for independent grid points and cover batches.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Force a single thread so witnesses are stable across runs.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Search budget in expanded states.
    #[arg(
        long,
        global = true,
        env = "FRACDEG_BUDGET",
        default_value_t = 10_000_000
    )]
    budget: u64,
    /// Write the run manifest here instead of standard error.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph from a named family.
    Gen(GenArgs),
    /// Decide uniform (s, t)-degeneracy by exhaustive search.
    Decide(DecideArgs),
    /// Emit a constructive certificate for a graph family.
    Certify(CertifyArgs),
    /// Replay a certificate on a graph.
    Verify(VerifyArgs),
    /// Minimal uniform shield for t = 1..t_max.
    Scan(ScanArgs),
    /// DP-coloring oracle.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct GenArgs {
    /// path, cycle, complete, complete-bipartite, complete-multipartite,
    /// single-vertex or edgeless.
    #[arg(long)]
    family: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    parts: Vec<usize>,
    /// Replace every edge by a path with this many edges.
    #[arg(long)]
    subdivide: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
}

impl From<TypeArg> for Mode {
    fn from(t: TypeArg) -> Mode {
        match t {
            TypeArg::Three => Mode::Type3,
            TypeArg::Four => Mode::Type4,
        }
    }
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    s: u32,
    #[arg(long)]
    t: u32,
    #[arg(long = "type", value_enum, default_value = "4")]
    mode: TypeArg,
    /// Write the certificate here on a yes answer.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertFamily {
    EvenCycle,
    OddCycle,
    Path,
    CompleteBipartite,
    LinearForest,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    family: CertFamily,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Input graph (linear-forest only).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Independent set to delete (linear-forest only).
    #[arg(long, value_delimiter = ',')]
    x: Vec<usize>,
    /// Certificate output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Graph output file, in `--format`.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    t_max: u32,
    #[arg(long = "type", value_enum, default_value = "4")]
    mode: TypeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct DpArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop an exhaustive run after this many covers.
    #[arg(long)]
    max_covers: Option<u64>,
}

impl DpArgs {
    fn strategy(&self, default: StrategyArg) -> DpStrategy {
        match self.strategy.unwrap_or(default) {
            StrategyArg::Exhaustive => DpStrategy::ExhaustiveNormalized,
            StrategyArg::Sampled => DpStrategy::Sampled {
                count: self.samples,
                seed: self.seed,
            },
        }
    }
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Look for a b-fold transversal in one cover.
    Transversal {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        /// Cover JSON file; without it a random cover from `--seed` is used.
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide (a, b)-DP-colorability (exhaustive by default).
    Check(DpArgs),
    /// Hunt for a cover without a transversal (sampled by default).
    Refute(DpArgs),
    /// Check that type-3 (s, t)-degeneracy gives (s + t, t)-DP-colorability.
    Stdp {
        #[command(flatten)]
        dp: StdpArgs,
    },
    /// Fractional DP upper bound for a complete multipartite graph.
    Multipartite {
        #[arg(long, value_delimiter = ',', required = true)]
        parts: Vec<usize>,
        /// Also try every ordering of the parts (exploratory).
        #[arg(long)]
        order_scan: bool,
    },
}

#[derive(Args)]
struct StdpArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    s: u32,
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_covers: Option<u64>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run only this criterion.
    #[arg(long)]
    criterion: Option<u8>,
}

/// JSON lines for standard output plus the exit code.
struct Outcome {
    lines: Vec<Value>,
    code: u8,
    seed: Option<u64>,
}

impl Outcome {
    fn one(line: Value, code: u8) -> Self {
        Outcome {
            lines: vec![line],
            code,
            seed: None,
        }
    }

    fn seeded(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

fn read_graph(path: &Path, format: GraphFormat) -> Result<Graph> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed =
        parse_graph(&bytes, format).with_context(|| format!("parsing {}", path.display()))?;
    if parsed.has_duplicate_warning() {
        eprintln!(
            "warning: {} duplicate edge(s) dropped from {}",
            parsed.duplicate_edges,
            path.display()
        );
    }
    Ok(parsed.graph)
}

fn write_graph(path: &Path, g: &Graph, format: GraphFormat) -> Result<()> {
    fs::write(path, serialize_graph(g, format)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn graph_json(g: &Graph) -> Value {
    json!({"n": g.n(), "edges": g.edges().map(|(u, v)| [u, v]).collect::<Vec<_>>()})
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing --{flag}"))
}

fn search_config(cli: &Cli, mode: Mode) -> SearchConfig {
    SearchConfig {
        max_states: cli.budget,
        ..SearchConfig::with_mode(mode)
    }
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> Result<Outcome> {
    let fam = match a.family.as_str() {
        "path" | "cycle" => GraphFamily::from_kind(&a.family, &[need(a.k, "k")?])?,
        "complete" => GraphFamily::CompleteMultipartite {
            parts: vec![1; need(a.n, "n")?],
        },
        "complete-bipartite" | "complete_bipartite" => {
            GraphFamily::from_kind(&a.family, &[need(a.m, "m")?, need(a.n, "n")?])?
        }
        "complete-multipartite" | "complete_multipartite" => {
            GraphFamily::from_kind(&a.family, &a.parts)?
        }
        "edgeless" => GraphFamily::from_kind(&a.family, &[need(a.n, "n")?])?,
        other => GraphFamily::from_kind(other, &[])?,
    };
    let mut g = fam.build()?;
    if let Some(len) = a.subdivide {
        g = g.subdivide_uniform(len)?;
    }
    if let Some(out) = &a.out {
        write_graph(out, &g, cli.format)?;
    }
    let line = match cli.format {
        GraphFormat::EdgeJson => graph_json(&g),
        GraphFormat::Graph6 => {
            let text = String::from_utf8(serialize_graph(&g, GraphFormat::Graph6)?)?;
            json!({"n": g.n(), "graph6": text.trim_end()})
        }
    };
    Ok(Outcome::one(line, EXIT_YES))
}

fn cmd_decide(cli: &Cli, a: &DecideArgs) -> Result<Outcome> {
    let g = read_graph(&a.graph, cli.format)?;
    let out = decide_uniform(&g, a.s, a.t, &search_config(cli, a.mode.into()))?;
    let code = match &out.answer {
        Answer::Yes(c) => {
            if let Some(path) = &a.out {
                write_json(path, c)?;
            }
            EXIT_YES
        }
        Answer::No => EXIT_NO,
        Answer::BudgetExhausted => EXIT_UNDECIDED,
    };
    Ok(Outcome::one(serde_json::to_value(&out)?, code))
}

fn cmd_certify(cli: &Cli, a: &CertifyArgs) -> Result<Outcome> {
    let (g, cert) = match a.family {
        CertFamily::EvenCycle => {
            let r = need(a.r, "r")? as usize;
            let k = 2 * r;
            (
                GraphFamily::Cycle { k }.build()?,
                cert_even_cycle(r, need(a.t, "t")?)?,
            )
        }
        CertFamily::OddCycle => {
            let r = need(a.r, "r")?;
            let k = 2 * r as usize + 1;
            (GraphFamily::Cycle { k }.build()?, cert_odd_cycle(r)?)
        }
        CertFamily::Path => {
            let k = need(a.k, "k")?;
            (
                GraphFamily::Path { k }.build()?,
                cert_path(k, need(a.r, "r")?)?,
            )
        }
        CertFamily::CompleteBipartite => {
            let (m, n) = (need(a.m, "m")?, need(a.n, "n")?);
            let g = GraphFamily::CompleteBipartite { m, n }.build()?;
            (g, cert_complete_bipartite(m, n, need(a.t, "t")?)?)
        }
        CertFamily::LinearForest => {
            let g = read_graph(need(a.graph.as_deref(), "graph")?, cli.format)?;
            let cert = cert_linear_forest_reduction(&g, &a.x, need(a.r, "r")?)?;
            (g, cert)
        }
    };
    if let Some(path) = &a.graph_out {
        write_graph(path, &g, cli.format)?;
    }
    let line = match &a.out {
        Some(path) => {
            write_json(path, &cert)?;
            json!({"out": path, "n": g.n(), "ops": cert.ops.len(), "mode": cert.mode})
        }
        None => json!({"graph": graph_json(&g), "certificate": cert}),
    };
    Ok(Outcome::one(line, EXIT_YES))
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    let g = read_graph(&a.graph, cli.format)?;
    let text =
        fs::read_to_string(&a.cert).with_context(|| format!("reading {}", a.cert.display()))?;
    let cert: Certificate = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            let line = json!({"verdict": "malformed", "reason": e.to_string()});
            return Ok(Outcome::one(line, EXIT_NO));
        }
    };
    let v = verify_certificate(&g, &cert);
    let code = if v.verdict.is_complete() {
        EXIT_YES
    } else {
        EXIT_NO
    };
    let mut line = serde_json::to_value(&v.verdict)?;
    line["ops"] = json!(cert.ops.len());
    line["mode"] = json!(cert.mode);
    Ok(Outcome::one(line, code))
}

fn cmd_scan(cli: &Cli, a: &ScanArgs) -> Result<Outcome> {
    let g = read_graph(&a.graph, cli.format)?;
    let table = ratio_scan(&g, a.t_max, &search_config(cli, a.mode.into()))?;
    let code = if table.rows.iter().all(|r| r.s_min.is_some()) {
        EXIT_YES
    } else {
        EXIT_UNDECIDED
    };
    Ok(Outcome::one(serde_json::to_value(&table)?, code))
}

fn dp_exit(v: &DpVerdict) -> u8 {
    match v {
        DpVerdict::Holds => EXIT_YES,
        DpVerdict::Refuted(_) => EXIT_NO,
        DpVerdict::Inconclusive { .. } => EXIT_UNDECIDED,
    }
}

fn cmd_oracle(cli: &Cli, cmd: &OracleCommand) -> Result<Outcome> {
    match cmd {
        OracleCommand::Transversal {
            graph,
            a,
            b,
            cover,
            seed,
        } => {
            let g = read_graph(graph, cli.format)?;
            let (cover, seed) = match cover {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    (cover_from_json(&g, &serde_json::from_str(&text)?)?, None)
                }
                None => (
                    build_cover(&g, *a, &CoverSpec::Random { seed: *seed })?,
                    Some(*seed),
                ),
            };
            if cover.a() != *a {
                bail!("cover has fold {}, expected --a {a}", cover.a());
            }
            if *b == 0 || b > a {
                bail!("--b must be between 1 and --a");
            }
            let found = find_transversal(&cover, *b);
            let code = if found.is_some() { EXIT_YES } else { EXIT_NO };
            let line = json!({"found": found.is_some(), "transversal": found, "cover": cover});
            Ok(Outcome::one(line, code).seeded(seed))
        }
        OracleCommand::Check(d) | OracleCommand::Refute(d) => {
            let default = match cmd {
                OracleCommand::Check(_) => StrategyArg::Exhaustive,
                _ => StrategyArg::Sampled,
            };
            let g = read_graph(&d.graph, cli.format)?;
            let strategy = d.strategy(default);
            let r = check_dp_colorable(&g, d.a, d.b, strategy, d.max_covers.unwrap_or(u64::MAX))?;
            let seed = matches!(strategy, DpStrategy::Sampled { .. }).then_some(d.seed);
            Ok(Outcome::one(serde_json::to_value(&r)?, dp_exit(&r.verdict)).seeded(seed))
        }
        OracleCommand::Stdp { dp } => {
            let g = read_graph(&dp.graph, cli.format)?;
            let strategy = match dp.strategy.unwrap_or(StrategyArg::Exhaustive) {
                StrategyArg::Exhaustive => DpStrategy::ExhaustiveNormalized,
                StrategyArg::Sampled => DpStrategy::Sampled {
                    count: dp.samples,
                    seed: dp.seed,
                },
            };
            let r = check_stdp_implication(
                &g,
                dp.s,
                dp.t,
                strategy,
                dp.max_covers.unwrap_or(u64::MAX),
                &search_config(cli, Mode::Type3),
            )?;
            let code = if r.counterexample {
                EXIT_NO
            } else if r.degenerate == "budget_exhausted" {
                EXIT_UNDECIDED
            } else {
                match &r.dp {
                    Some(c) => dp_exit(&c.verdict),
                    None => EXIT_YES,
                }
            };
            let seed = matches!(strategy, DpStrategy::Sampled { .. }).then_some(dp.seed);
            Ok(Outcome::one(serde_json::to_value(&r)?, code).seeded(seed))
        }
        OracleCommand::Multipartite { parts, order_scan } => {
            let b = multipartite_bound(parts)?;
            let mut line = serde_json::to_value(&b)?;
            if *order_scan {
                let scan = multipartite_order_scan(parts)?;
                let best = scan.iter().map(|x| x.bound).fold(f64::INFINITY, f64::min);
                line["order_scan"] =
                    json!({"exploratory": true, "best_bound": best, "orders": scan});
            }
            Ok(Outcome::one(line, EXIT_YES))
        }
    }
}

fn cmd_selftest(a: &SelftestArgs) -> Result<Outcome> {
    let results = match a.criterion {
        Some(id) => {
            vec![acceptance::run_criterion(id).ok_or_else(|| anyhow!("no criterion {id}"))?]
        }
        None => acceptance::run_all(),
    };
    for r in &results {
        eprintln!("{r}");
    }
    let code = if results.iter().all(|r| r.passed) {
        EXIT_YES
    } else {
        EXIT_NO
    };
    let lines = results
        .iter()
        .map(serde_json::to_value)
        .collect::<Result<_, _>>()?;
    Ok(Outcome {
        lines,
        code,
        seed: None,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let threads = if cli.deterministic { Some(1) } else { cli.jobs };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Decide(a) => cmd_decide(cli, a),
        Command::Certify(a) => cmd_certify(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Scan(a) => cmd_scan(cli, a),
        Command::Oracle(c) => cmd_oracle(cli, c),
        Command::Selftest(a) => cmd_selftest(a),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Gen(_) => "gen",
        Command::Decide(_) => "decide",
        Command::Certify(_) => "certify",
        Command::Verify(_) => "verify",
        Command::Scan(_) => "scan",
        Command::Oracle(OracleCommand::Transversal { .. }) => "oracle transversal",
        Command::Oracle(OracleCommand::Check(_)) => "oracle check",
        Command::Oracle(OracleCommand::Refute(_)) => "oracle refute",
        Command::Oracle(OracleCommand::Stdp { .. }) => "oracle stdp",
        Command::Oracle(OracleCommand::Multipartite { .. }) => "oracle multipartite",
        Command::Selftest(_) => "selftest",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut stdout = String::new();
    for line in &outcome.lines {
        stdout.push_str(&line.to_string());
        stdout.push('\n');
    }
    print!("{stdout}");
    let manifest = json!({
        "command": command_name(&cli.command),
        "parameters": std::env::args().skip(1).collect::<Vec<_>>(),
        "seed": outcome.seed,
        "budget": cli.budget,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "wall_time_ms": start.elapsed().as_millis() as u64,
        "result_digest": hex::encode(Sha256::digest(stdout.as_bytes())),
        "exit_code": outcome.code,
    });
    match &cli.manifest {
        Some(path) => {
            if let Err(e) = write_json(path, &manifest) {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
        None => eprintln!("{manifest}"),
    }
    ExitCode::from(outcome.code)
}
