//! Command-line front end. Every subcommand prints a JSON [`RunReport`];
//! exit code 0 means every requested check passed, 1 means a check failed
//! (the report is still printed), 2 means the arguments or inputs were bad.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bcd::{build_bcd, verify_bcd, BcdError, BufferedCopDecomposition};
use crate::cover::{build_cover, preset_q, verify_cover_with, CoverError, PartitionCover, Preset};
use crate::embed::{distortion_report, embed_full, embed_minor_free_3eps, EmbedError, PairSelection};
use crate::generators::{generate, Family, FamilySpec, WeightMode};
use crate::graph::{all_pairs, WeightedGraph};
use crate::partition::{color_cover, to_sparse_partition_with, verify_coloring, verify_sparse_partition, SparsePartition};
use crate::suite::run_acceptance;

#[derive(Debug, Parser)]
#[command(name = "sparse-cover", version, about = "Sparse covers and l-infinity embeddings for minor-free graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a graph from a minor-free family.
    Gen(GenArgs),
    /// Build and verify a buffered cop decomposition.
    Decompose(DecomposeArgs),
    /// Build and verify a sparse partition cover.
    Cover(CoverArgs),
    /// Clip a cover into a sparse partition and check the cover's coloring.
    Partition(PartitionArgs),
    /// Embed a graph into l-infinity and measure its distortion.
    Embed(EmbedArgs),
    /// Check a stored decomposition, cover or partition against a graph.
    Verify(VerifyArgs),
    /// Run a named test suite.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    size: usize,
    /// unit, uniform:LO:HI or exponential
    #[arg(long, default_value = "unit")]
    weights: WeightMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct DecomposeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    delta: f64,
    /// Defaults to delta / r.
    #[arg(long)]
    gamma: Option<f64>,
    /// Defaults to r - 1.
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CoverArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value = "A")]
    preset: Preset,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Overrides the preset's q.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    #[value(name = "3eps")]
    ThreeEps,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct EmbedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    mode: Mode,
    /// Edge subdivision factor for 3eps mode; defaults to ceil(1/epsilon).
    #[arg(long)]
    pieces: Option<usize>,
    /// Coordinates as CSV; a JSON sidecar goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("artifact").required(true).multiple(true).args(["cover", "bcd", "partition"])))]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    cover: Option<PathBuf>,
    #[arg(long)]
    bcd: Option<PathBuf>,
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Report destination; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Acceptance,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Report destination; the table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Machine-readable outcome of one command. Deterministic for fixed inputs:
/// wall time goes to stderr only.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    /// sha256 of each input file, keyed by role.
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, Value>,
    pub measured: BTreeMap<String, Value>,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport { command: command.to_string(), ..Default::default() }
    }

    fn param(&mut self, key: &str, v: impl Serialize) {
        self.parameters.insert(key.into(), json!(v));
    }

    fn measure(&mut self, key: &str, v: impl Serialize) {
        self.measured.insert(key.into(), json!(v));
    }

    fn check(&mut self, key: &str, ok: bool) {
        self.checks.insert(key.into(), ok);
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }

    fn input(&mut self, role: &str, path: &Path) -> anyhow::Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.insert(role.into(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    fn finish(mut self) -> Self {
        self.passed = self.failures.is_empty() && self.checks.values().all(|&ok| ok);
        self
    }
}

/// Marks an error as the caller's fault (exit code 2).
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn bcd_err(e: BcdError) -> anyhow::Error {
    match e {
        BcdError::BadParameters(_) | BcdError::Io { .. } | BcdError::Json(_) => usage(e.to_string()),
        other => anyhow!(other),
    }
}

fn cover_err(e: CoverError) -> anyhow::Error {
    match e {
        CoverError::BadParameters(_) | CoverError::Io { .. } | CoverError::Json(_) => usage(e.to_string()),
        CoverError::Bcd(b) => bcd_err(b),
        other => anyhow!(other),
    }
}

fn embed_err(e: EmbedError) -> anyhow::Error {
    match e {
        EmbedError::BadParameters(_) | EmbedError::TooLarge { .. } | EmbedError::Graph(_) => usage(e.to_string()),
        EmbedError::Cover(c) => cover_err(c),
        other => anyhow!(other),
    }
}

fn load_graph(rep: &mut RunReport, path: &Path) -> anyhow::Result<WeightedGraph> {
    let bytes = rep.input("graph", path)?;
    let text = String::from_utf8(bytes).map_err(|_| usage(format!("{} is not UTF-8", path.display())))?;
    WeightedGraph::from_json_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(rep: &mut RunReport, role: &str, path: &Path) -> anyhow::Result<T> {
    let bytes = rep.input(role, path)?;
    serde_json::from_slice(&bytes).map_err(|e| usage(format!("{}: malformed {role} json: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Parses `argv` (including the program name), runs the command, prints the
/// report, and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let (name, report_out) = match &cli.command {
        Command::Gen(_) => ("gen", None),
        Command::Decompose(_) => ("decompose", None),
        Command::Cover(_) => ("cover", None),
        Command::Partition(_) => ("partition", None),
        Command::Embed(_) => ("embed", None),
        Command::Verify(a) => ("verify", a.out.clone()),
        Command::Report(a) => ("report", a.out.clone()),
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Cover(a) => cmd_cover(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}");
            return 2;
        }
        Err(e) => {
            let mut r = RunReport::new(name);
            r.fail(format!("{e:#}"));
            r.finish()
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match report_out {
        Some(path) => {
            if let Err(e) = write_file(&path, &text) {
                eprintln!("error: {e:#}");
                return 2;
            }
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    if report.passed {
        0
    } else {
        1
    }
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("gen");
    rep.param("family", a.family);
    rep.param("size", a.size);
    rep.param("weights", a.weights);
    rep.param("seed", a.seed);
    let spec = FamilySpec { family: a.family, size: a.size, weights: a.weights, seed: a.seed };
    let gen = generate(&spec).map_err(|e| usage(e.to_string()))?;
    write_file(&a.out, &gen.graph.to_json_string())?;
    rep.measure("n", gen.graph.n());
    rep.measure("m", gen.graph.edges().len());
    rep.measure("r", gen.r);
    Ok(rep.finish())
}

fn cmd_decompose(a: DecomposeArgs) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("decompose");
    let g = load_graph(&mut rep, &a.graph)?;
    let gamma = match (a.gamma, a.r) {
        (Some(gm), _) => gm,
        (None, Some(r)) if r >= 2 => a.delta / r as f64,
        _ => return Err(usage("give --gamma, or --r >= 2 to default it to delta / r")),
    };
    let w = match (a.w, a.r) {
        (Some(w), _) => w,
        (None, Some(r)) if r >= 2 => r - 1,
        _ => return Err(usage("give --w, or --r >= 2 to default it to r - 1")),
    };
    rep.param("delta", a.delta);
    rep.param("gamma", gamma);
    rep.param("w", w);
    let d = build_bcd(&g, a.delta, gamma, w).map_err(bcd_err)?;
    write_file(&a.out, &d.to_json_string())?;
    bcd_checks(&mut rep, &g, &d);
    Ok(rep.finish())
}

fn bcd_checks(rep: &mut RunReport, g: &WeightedGraph, d: &BufferedCopDecomposition) {
    let n = g.n();
    if let Some(v) = d.supernodes.iter().flat_map(|s| &s.vertices).find(|&&v| v >= n) {
        rep.check("partition", false);
        rep.fail(format!("vertex {v} out of range for a graph on {n} vertices"));
        return;
    }
    let v = verify_bcd(g, d);
    rep.measure("supernodes", v.supernodes);
    rep.measure("radius", v.measured_radius);
    rep.measure("gamma", d.measured.gamma);
    rep.measure("w", v.max_adjacent_ancestors.max(v.max_skeleton_leaves));
    rep.check("partition", v.partition_ok);
    rep.check("tree", v.tree_ok);
    rep.check("ancestors", v.ancestors_ok);
    rep.check("skeleton", v.skeleton_ok);
    rep.check("radius", v.radius_ok);
    rep.check("buffer", v.buffer_ok);
    rep.failures.extend(v.failures);
}

fn cmd_cover(a: CoverArgs) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("cover");
    let g = load_graph(&mut rep, &a.graph)?;
    let q = match a.q {
        Some(q) => q,
        None => preset_q(a.preset, a.r, a.epsilon).map_err(cover_err)?,
    };
    rep.param("r", a.r);
    rep.param("preset", a.preset);
    rep.param("epsilon", a.epsilon);
    rep.param("q", q);
    rep.param("delta", a.delta);
    let c = build_cover(&g, a.r, q, a.delta).map_err(cover_err)?;
    write_file(&a.out, &c.to_json_string())?;
    cover_checks(&mut rep, &g, &all_pairs(&g), &c);
    Ok(rep.finish())
}

fn cover_checks(rep: &mut RunReport, g: &WeightedGraph, apsp: &[Vec<f64>], c: &PartitionCover) {
    rep.measure("beta", c.beta);
    rep.measure("s", c.s);
    rep.measure("diam", c.diam);
    if let Some(p) = &c.provenance {
        rep.measure("radius", p.radius);
        rep.measure("s_bound", p.s_bound);
    }
    let v = verify_cover_with(g, apsp, c);
    rep.measure("max_strong_diameter", v.max_strong_diameter);
    rep.measure("padding_radius", v.padding_radius);
    rep.measure("rho_star", v.rho_star);
    rep.check("partitions", v.partitions_ok);
    rep.check("diameter", v.diameter_ok);
    rep.check("padding", v.padding_ok);
    rep.check("count", v.count_ok);
    rep.failures.extend(v.failures);
}

fn cmd_partition(a: PartitionArgs) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("partition");
    let g = load_graph(&mut rep, &a.graph)?;
    let c: PartitionCover = load_json(&mut rep, "cover", &a.cover)?;
    let apsp = all_pairs(&g);
    let cv = verify_cover_with(&g, &apsp, &c);
    if !cv.partitions_ok {
        return Err(usage(format!("cover does not match the graph: {}", cv.failures.join("; "))));
    }
    let p = to_sparse_partition_with(&g, &apsp, &c);
    write_file(&a.out, &serde_json::to_string_pretty(&p).expect("partition serializes"))?;
    partition_checks(&mut rep, &g, &apsp, &p);
    let col = color_cover(&c);
    let cr = verify_coloring(&g, &apsp, &c, &col);
    rep.measure("k", col.k);
    rep.check("coloring", cr.passes());
    for x in &cr.conflicts {
        rep.fail(format!(
            "color {}: clusters {:?} and {:?} are neighbors via vertices {} and {}",
            x.color, x.first, x.second, x.x, x.y
        ));
    }
    Ok(rep.finish())
}

fn partition_checks(rep: &mut RunReport, g: &WeightedGraph, apsp: &[Vec<f64>], p: &SparsePartition) {
    rep.measure("alpha", p.alpha);
    rep.measure("tau", p.tau);
    rep.measure("s", p.s);
    rep.measure("diam", p.diam);
    rep.measure("tau_exceeds_s", p.tau_exceeds_s);
    let v = verify_sparse_partition(g, apsp, p);
    rep.measure("max_weak_diameter", v.max_weak_diameter);
    rep.check("partition", v.is_partition);
    rep.check("weak_diameter", v.diameter_ok);
    rep.failures.extend(v.failures);
}

fn cmd_embed(a: EmbedArgs) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("embed");
    let g = load_graph(&mut rep, &a.graph)?;
    rep.param("r", a.r);
    rep.param("epsilon", a.epsilon);
    rep.param("mode", if a.mode == Mode::Full { "full" } else { "3eps" });
    let (embedding, provenance) = match a.mode {
        Mode::Full => {
            let run = embed_full(&g, a.r, a.epsilon).map_err(embed_err)?;
            let prov = json!({
                "mode": "full",
                "q": run.q,
                "beta": run.scheme.beta,
                "fit_attempts": run.fit_attempts,
                "steps": run.steps,
                "top": run.top,
                "tau": run.tau,
                "dimension_formula": run.dimension_formula(),
                "measured_padding": run.measured_padding(),
            });
            (run.embedding, prov)
        }
        Mode::ThreeEps => {
            let run = embed_minor_free_3eps(&g, a.r, a.epsilon, a.pieces).map_err(embed_err)?;
            rep.param("pieces", run.pieces);
            let prov = json!({
                "mode": "3eps",
                "pieces": run.pieces,
                "subdivided_vertices": run.subdivided.n(),
                "q": run.inner.q,
                "beta": run.inner.scheme.beta,
                "steps": run.inner.steps,
                "top": run.inner.top,
                "tau": run.inner.tau,
                "certificate": run.certificate,
            });
            (run.embedding, prov)
        }
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&a.out)
        .with_context(|| format!("cannot write {}", a.out.display()))?;
    for row in &embedding.coords {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    let mut sidecar = a.out.clone().into_os_string();
    sidecar.push(".json");
    let side = json!({ "k": embedding.dim, "rho": embedding.rho, "xi": embedding.xi, "provenance": provenance });
    write_file(Path::new(&sidecar), &serde_json::to_string_pretty(&side).expect("sidecar serializes"))?;

    let d = distortion_report(&all_pairs(&g), &embedding.coords, PairSelection::All);
    rep.measure("k", embedding.dim);
    rep.measure("rho", embedding.rho);
    rep.measure("xi", embedding.xi);
    rep.measure("expansion", d.expansion);
    rep.measure("contraction", d.contraction);
    rep.measure("distortion", d.distortion);
    rep.check("expansion", d.expansion <= embedding.rho * (1.0 + 1e-9));
    rep.check("contraction", d.contraction <= embedding.xi * (1.0 + 1e-9));
    Ok(rep.finish())
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("verify");
    let g = load_graph(&mut rep, &a.graph)?;
    if let Some(path) = &a.bcd {
        let d: BufferedCopDecomposition = load_json(&mut rep, "bcd", path)?;
        bcd_checks(&mut rep, &g, &d);
    }
    if let Some(path) = &a.cover {
        let c: PartitionCover = load_json(&mut rep, "cover", path)?;
        cover_checks(&mut rep, &g, &all_pairs(&g), &c);
    }
    if let Some(path) = &a.partition {
        let p: SparsePartition = load_json(&mut rep, "partition", path)?;
        partition_checks(&mut rep, &g, &all_pairs(&g), &p);
    }
    Ok(rep.finish())
}

fn cmd_report(a: ReportArgs) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("report");
    rep.param("suite", match a.suite {
        Suite::Acceptance => "acceptance",
    });
    let results = run_acceptance(|r| println!("{}", r.line()));
    for r in &results {
        rep.check(&format!("{:02}-{}", r.id, r.name.replace(' ', "-")), r.passed);
        rep.measure(&format!("{:02}", r.id), &r.detail);
        if !r.passed {
            rep.fail(format!("criterion {}: {}", r.id, r.detail));
        }
    }
    Ok(rep.finish())
}
