//! Command line front end: `align`, `transform`, `eval` and `stats`.
//!
//! Exit codes: 0 success, 2 I/O failure, 3 malformed input, 4 bad
//! configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::candidates::{connection_stats, BilingualDict, CandidateSet};
use crate::constraints::{AlignContext, ConstraintPack, DEFAULT_SUPPORT_CLAMP};
use crate::error::{Error, Result};
use crate::evaluation::{coverage, precision, Coverage, EvalLevel, EvalReport, GoldStandard};
use crate::relaxation::{self, InitMode, Mapping, RelaxConfig};
use crate::taxonomy::{ClosureIndex, NodeId, TaxonomyGraph};

#[derive(Debug, Parser)]
#[command(
    name = "taxalign",
    version,
    about = "Align a source taxonomy to a target taxonomy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run relaxation labeling and write the selected mapping.
    Align(AlignArgs),
    /// Apply taxonomy transforms and write the result.
    Transform(TransformArgs),
    /// Score a mapping file against a gold standard.
    Eval(EvalArgs),
    /// Report bilingual-connection coverage and polysemy.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct TransformFlags {
    /// Insert a virtual top above every root of the source taxonomy.
    #[arg(long)]
    add_top: bool,
    /// Word carried by the virtual top node.
    #[arg(long, default_value = "top")]
    top_word: String,
    /// Target node the virtual top is pinned to.
    #[arg(long, value_name = "TARGET_ID")]
    top_attach: Option<String>,
    /// Merge same-word sibling nodes. Runs before --add-top.
    #[arg(long)]
    collapse_senses: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum InitArg {
    Uniform,
    Random,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    dict: PathBuf,
    /// Constraint pack, e.g. `AA*`, `II*` or a single code such as `IAE`.
    #[arg(long)]
    constraints: String,
    /// Mapping output file.
    #[arg(long)]
    out: PathBuf,
    /// Also write the final weight of every candidate connection.
    #[arg(long)]
    dump_weights: Option<PathBuf>,
    /// Run manifest path; defaults to `<out>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Fix a source node to a single target node, as `SOURCE_ID=TARGET_ID`.
    #[arg(long = "pin", value_name = "SOURCE_ID=TARGET_ID")]
    pins: Vec<String>,
    #[command(flatten)]
    transforms: TransformFlags,
    #[arg(long, value_enum, default_value = "uniform")]
    init: InitArg,
    /// Seed of the random initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_SUPPORT_CLAMP)]
    s_max: f64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    transforms: TransformFlags,
    /// Merge map output; defaults to `<output>.merge` when collapsing.
    #[arg(long)]
    merge_map: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    File,
    Node,
    Both,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    mapping: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, value_enum, default_value = "file")]
    level: LevelArg,
    /// Target taxonomy, needed for file-level scoring of node-level gold.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Write the machine-readable report here.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    dict: PathBuf,
    #[command(flatten)]
    transforms: TransformFlags,
    #[arg(long)]
    tsv: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Align(a) => cmd_align(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("taxalign: {e}");
            e.exit_code()
        }
    }
}

fn with_context(path: &Path, err: Error) -> Error {
    match err {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    }
}

fn load_taxonomy(path: &Path) -> Result<TaxonomyGraph> {
    TaxonomyGraph::load_path(path).map_err(|e| with_context(path, e))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Source taxonomy after transforms, with the merge map (identity when not
/// collapsing) and the virtual top id when one was added.
struct Prepared {
    graph: TaxonomyGraph,
    merge_map: Option<BTreeMap<NodeId, NodeId>>,
    top: Option<NodeId>,
}

fn apply_transforms(graph: TaxonomyGraph, flags: &TransformFlags) -> Prepared {
    let (graph, merge_map) = if flags.collapse_senses {
        let (g, m) = graph.collapse_sense_siblings();
        (g, Some(m))
    } else {
        (graph, None)
    };
    let (graph, top) = if flags.add_top {
        let (g, id) = graph.add_virtual_top(&flags.top_word);
        (g, Some(id))
    } else {
        (graph, None)
    };
    Prepared {
        graph,
        merge_map,
        top,
    }
}

fn collect_pins(
    raw: &[String],
    prepared: &Prepared,
    flags: &TransformFlags,
) -> Result<BTreeMap<NodeId, NodeId>> {
    let mut pins = BTreeMap::new();
    for p in raw {
        let (s, t) = p
            .split_once('=')
            .filter(|(s, t)| !s.is_empty() && !t.is_empty())
            .ok_or_else(|| Error::Config(format!("pin must be SOURCE_ID=TARGET_ID, got `{p}`")))?;
        let s = NodeId::from(s);
        let s = match &prepared.merge_map {
            Some(m) => m.get(&s).cloned().unwrap_or(s),
            None => s,
        };
        pins.insert(s, NodeId::from(t));
    }
    if let (Some(top), Some(attach)) = (&prepared.top, &flags.top_attach) {
        pins.insert(top.clone(), NodeId::new(attach.as_str()));
    }
    Ok(pins)
}

#[derive(Debug, Serialize)]
struct Inputs<'a> {
    source: &'a Path,
    target: &'a Path,
    dict: &'a Path,
}

#[derive(Debug, Serialize)]
struct Outputs<'a> {
    mapping: &'a Path,
    weights: Option<&'a Path>,
    manifest: &'a Path,
}

/// Everything needed to replay an `align` run.
#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    engine: &'static str,
    engine_version: &'static str,
    command: &'static str,
    inputs: Inputs<'a>,
    transforms: &'a TransformFlags,
    pins: &'a BTreeMap<NodeId, NodeId>,
    init: InitArg,
    seed: u64,
    config: &'a RelaxConfig,
    outputs: Outputs<'a>,
    wall_clock_ms: u128,
    iterations: usize,
    converged: bool,
    coverage: Coverage,
    warnings: Vec<String>,
}

fn cmd_align(args: AlignArgs) -> Result<()> {
    let started = Instant::now();
    let pack = ConstraintPack::expand(&args.constraints)?;
    let source = load_taxonomy(&args.source)?;
    let target = load_taxonomy(&args.target)?;
    let dict = BilingualDict::load_path(&args.dict).map_err(|e| with_context(&args.dict, e))?;

    let prepared = apply_transforms(source, &args.transforms);
    if args.transforms.top_attach.is_some() && !args.transforms.add_top {
        return Err(Error::Config("--top-attach requires --add-top".into()));
    }
    let pins = collect_pins(&args.pins, &prepared, &args.transforms)?;
    let source = prepared.graph;

    let cand = CandidateSet::generate(&source, &target, &dict, &pins)?;
    let (src_closure, tgt_closure) = (ClosureIndex::build(&source), ClosureIndex::build(&target));
    let ctx = AlignContext::new(&src_closure, &tgt_closure, &cand);

    let mut cfg = RelaxConfig::new(pack);
    cfg.init = match args.init {
        InitArg::Uniform => InitMode::Uniform,
        InitArg::Random => InitMode::Random { seed: args.seed },
    };
    cfg.epsilon = args.epsilon;
    cfg.max_iters = args.max_iters;
    cfg.s_max = args.s_max;
    cfg.threads = args.threads;
    let outcome = relaxation::run(&ctx, &cfg, &source, &target)?;

    write_file(&args.out, |w| outcome.mapping.write(w))?;
    if let Some(path) = &args.dump_weights {
        write_file(path, |w| {
            outcome.weights.write_dump(w, &cand, &source, &target)
        })?;
    }

    let mut warnings = Vec::new();
    if !outcome.trace.converged {
        let last = outcome.trace.deltas.last().copied().unwrap_or(f64::NAN);
        warnings.push(format!(
            "did not converge within {} iterations (last max delta {last:e})",
            cfg.max_iters
        ));
    }
    for w in &warnings {
        eprintln!("taxalign: warning: {w}");
    }
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".manifest.json"));
    let manifest = RunManifest {
        engine: env!("CARGO_PKG_NAME"),
        engine_version: env!("CARGO_PKG_VERSION"),
        command: "align",
        inputs: Inputs {
            source: &args.source,
            target: &args.target,
            dict: &args.dict,
        },
        transforms: &args.transforms,
        pins: &pins,
        init: args.init,
        seed: args.seed,
        config: &cfg,
        outputs: Outputs {
            mapping: &args.out,
            weights: args.dump_weights.as_deref(),
            manifest: &manifest_path,
        },
        wall_clock_ms: started.elapsed().as_millis(),
        iterations: outcome.trace.iterations_run,
        converged: outcome.trace.converged,
        coverage: coverage(&outcome.trace, &cand),
        warnings,
    };
    write_file(&manifest_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    if !args.transforms.add_top && !args.transforms.collapse_senses {
        return Err(Error::Config(
            "transform needs --add-top and/or --collapse-senses".into(),
        ));
    }
    let graph = load_taxonomy(&args.input)?;
    let prepared = apply_transforms(graph, &args.transforms);
    write_file(&args.output, |w| prepared.graph.write(w))?;
    if let Some(map) = &prepared.merge_map {
        let path = args
            .merge_map
            .clone()
            .unwrap_or_else(|| with_suffix(&args.output, ".merge"));
        write_file(&path, |w| {
            for (from, to) in map {
                writeln!(w, "{from}\t{to}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn read_mapping(path: &Path) -> Result<Mapping> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Mapping::load(io::BufReader::new(file)).map_err(|e| with_context(path, e))
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let mapping = read_mapping(&args.mapping)?;
    let gold = GoldStandard::load_path(&args.gold).map_err(|e| with_context(&args.gold, e))?;
    let target = args.target.as_deref().map(load_taxonomy).transpose()?;
    let levels: &[EvalLevel] = match args.level {
        LevelArg::File => &[EvalLevel::File],
        LevelArg::Node => &[EvalLevel::Node],
        LevelArg::Both => &[EvalLevel::File, EvalLevel::Node],
    };
    let report = EvalReport {
        precision: levels
            .iter()
            .map(|&l| precision(&mapping, &gold, l, target.as_ref()))
            .collect::<Result<_>>()?,
        ..Default::default()
    };
    print!("{}", report.render_text());
    if let Some(path) = &args.tsv {
        write_file(path, |w| w.write_all(report.render_tsv().as_bytes()))?;
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let source = load_taxonomy(&args.source)?;
    let target = load_taxonomy(&args.target)?;
    let dict = BilingualDict::load_path(&args.dict).map_err(|e| with_context(&args.dict, e))?;
    let prepared = apply_transforms(source, &args.transforms);
    let pins = collect_pins(&[], &prepared, &args.transforms)?;
    let cand = CandidateSet::generate(&prepared.graph, &target, &dict, &pins)?;
    let report = EvalReport {
        connection: Some(connection_stats(&cand)),
        ..Default::default()
    };
    print!("{}", report.render_text());
    if let Some(path) = &args.tsv {
        write_file(path, |w| w.write_all(report.render_tsv().as_bytes()))?;
    }
    Ok(())
}
