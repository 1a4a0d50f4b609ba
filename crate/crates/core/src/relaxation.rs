//! Relaxation labeling solver.
//!
//! Every connected source node is a variable whose labels are its candidate
//! target nodes. Weights start uniform (or seeded random) and are updated
//! synchronously with
//!
//! ```text
//! w'[i][j] = w[i][j] * (1 + S(i,j)) / sum_k w[i][k] * (1 + S(i,k))
//! ```
//!
//! until the largest per-weight change drops below `epsilon` or `max_iters`
//! steps have run. Supports are all computed against the incoming weights,
//! so the result does not depend on evaluation order or thread count.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::constraints::{AlignContext, Connection, ConstraintPack, DEFAULT_SUPPORT_CLAMP};
use crate::error::{Error, Result};
use crate::taxonomy::{NodeId, TaxonomyGraph};

/// Two weights closer than this are reported as a tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum InitMode {
    Uniform,
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxConfig {
    pub pack: ConstraintPack,
    pub init: InitMode,
    /// Stop once the largest absolute weight change of a step is below this.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Upper clamp applied to every support value.
    pub s_max: f64,
    /// Worker threads for support computation; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl RelaxConfig {
    pub fn new(pack: ConstraintPack) -> Self {
        RelaxConfig {
            pack,
            init: InitMode::Uniform,
            epsilon: 1e-4,
            max_iters: 500,
            s_max: DEFAULT_SUPPORT_CLAMP,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.s_max.is_nan() || self.s_max < 0.0 {
            return Err(Error::Config(format!(
                "s_max must be >= 0, got {}",
                self.s_max
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if self.pack.is_empty() {
            return Err(Error::Config("constraint pack is empty".into()));
        }
        Ok(())
    }
}

/// Per-source-node weight vectors aligned with the candidate lists. Nodes
/// without candidates have empty rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    rows: Vec<Vec<f64>>,
}

impl WeightTable {
    pub fn uniform(cand: &CandidateSet) -> Self {
        let rows = (0..cand.len())
            .map(|s| {
                let k = cand.candidates(s).len();
                vec![1.0 / k as f64; k]
            })
            .collect();
        WeightTable { rows }
    }

    /// Builds a table from explicit rows. Each non-empty row is normalized.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|mut r| {
                let sum: f64 = r.iter().sum();
                if sum > 0.0 {
                    r.iter_mut().for_each(|x| *x /= sum);
                }
                r
            })
            .collect();
        WeightTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Weight of the `pos`-th candidate of `src`.
    pub fn weight(&self, src: usize, pos: usize) -> f64 {
        self.rows[src][pos]
    }

    pub fn row(&self, src: usize) -> &[f64] {
        &self.rows[src]
    }

    /// Weight of connection `conn`, or `None` if it is not a candidate.
    pub fn connection_weight(&self, cand: &CandidateSet, conn: Connection) -> Option<f64> {
        cand.position(conn.src, conn.tgt)
            .map(|p| self.rows[conn.src][p])
    }

    /// Writes `src_id<TAB>tgt_id<TAB>weight` lines sorted by source then
    /// target id, with six decimals.
    pub fn write_dump<W: Write>(
        &self,
        mut out: W,
        cand: &CandidateSet,
        source: &TaxonomyGraph,
        target: &TaxonomyGraph,
    ) -> io::Result<()> {
        for (s, row) in self.rows.iter().enumerate() {
            for (&t, w) in cand.candidates(s).iter().zip(row) {
                writeln!(out, "{}\t{}\t{:.6}", source.id(s), target.id(t), w)?;
            }
        }
        Ok(())
    }
}

/// Initial weights. Single-candidate rows always hold `1.0`.
pub fn init_weights(cand: &CandidateSet, cfg: &RelaxConfig) -> WeightTable {
    match cfg.init {
        InitMode::Uniform => WeightTable::uniform(cand),
        InitMode::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = (0..cand.len())
                .map(|s| match cand.candidates(s).len() {
                    0 => Vec::new(),
                    1 => vec![1.0],
                    // 1 - U[0,1) lies in (0, 1], never zero
                    k => (0..k).map(|_| 1.0 - rng.gen::<f64>()).collect(),
                })
                .collect();
            WeightTable::from_rows(rows)
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub weights: WeightTable,
    pub max_delta: f64,
    /// Variables whose weights changed in this step.
    pub changed: Vec<usize>,
}

/// Supports of every label of `src` against the weights `w`.
pub fn label_supports(
    ctx: &AlignContext<'_>,
    cfg: &RelaxConfig,
    w: &WeightTable,
    src: usize,
) -> Vec<f64> {
    ctx.candidates
        .candidates(src)
        .iter()
        .map(|&t| ctx.support(&cfg.pack, Connection::new(src, t), w, cfg.s_max))
        .collect()
}

/// Applies the update to one row. Returns `None` when the row is left as is
/// (all supports equal, which is the identity update).
fn update_row(row: &[f64], supports: &[f64]) -> Option<Vec<f64>> {
    if supports.windows(2).all(|p| p[0] == p[1]) {
        return None;
    }
    let mut next: Vec<f64> = row
        .iter()
        .zip(supports)
        .map(|(w, s)| w * (1.0 + s))
        .collect();
    let norm: f64 = next.iter().sum();
    next.iter_mut().for_each(|x| *x /= norm);
    (next.as_slice() != row).then_some(next)
}

/// One synchronous update of every polysemous variable. Runs on the current
/// rayon pool.
pub fn step(ctx: &AlignContext<'_>, cfg: &RelaxConfig, w: &WeightTable) -> StepOutcome {
    let vars: Vec<usize> = ctx.candidates.polysemous().collect();
    let updates: Vec<(usize, Option<Vec<f64>>)> = vars
        .par_iter()
        .map(|&s| {
            let supports = label_supports(ctx, cfg, w, s);
            (s, update_row(w.row(s), &supports))
        })
        .collect();

    let mut weights = w.clone();
    let mut max_delta = 0.0f64;
    let mut changed = Vec::new();
    for (s, next) in updates {
        if let Some(next) = next {
            for (a, b) in next.iter().zip(w.row(s)) {
                max_delta = max_delta.max((a - b).abs());
            }
            weights.rows[s] = next;
            changed.push(s);
        }
    }
    StepOutcome {
        weights,
        max_delta,
        changed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxTrace {
    pub iterations_run: usize,
    /// Largest weight change of each step, in order.
    pub deltas: Vec<f64>,
    /// Source node indices whose weights changed at least once.
    pub touched: BTreeSet<usize>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingStatus {
    Monosemous,
    Resolved,
    Tied,
    Untouched,
    NoTranslation,
}

impl MappingStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MappingStatus::Monosemous => "monosemous",
            MappingStatus::Resolved => "resolved",
            MappingStatus::Tied => "tied",
            MappingStatus::Untouched => "untouched",
            MappingStatus::NoTranslation => "no-translation",
        }
    }

    /// Whether the node had two or more candidates.
    pub fn is_polysemous(self) -> bool {
        matches!(
            self,
            MappingStatus::Resolved | MappingStatus::Tied | MappingStatus::Untouched
        )
    }
}

impl fmt::Display for MappingStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MappingStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "monosemous" => MappingStatus::Monosemous,
            "resolved" => MappingStatus::Resolved,
            "tied" => MappingStatus::Tied,
            "untouched" => MappingStatus::Untouched,
            "no-translation" => MappingStatus::NoTranslation,
            _ => return Err(Error::Format(format!("unknown mapping status `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub source: NodeId,
    pub selected: Option<NodeId>,
    /// Semantic file of the selected target node.
    pub selected_file: Option<String>,
    pub weight: f64,
    pub status: MappingStatus,
    pub candidates: usize,
}

/// Selected target per source node, sorted by source id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    entries: Vec<MappingEntry>,
}

const MAPPING_HEADER: &str = "# source\ttarget\tweight\tstatus\tfile\tcandidates";

impl Mapping {
    pub fn from_entries(mut entries: Vec<MappingEntry>) -> Self {
        entries.sort_by(|a, b| a.source.cmp(&b.source));
        Mapping { entries }
    }

    pub fn entries(&self) -> &[MappingEntry] {
        &self.entries
    }

    pub fn get(&self, source: &str) -> Option<&MappingEntry> {
        self.entries
            .binary_search_by(|e| e.source.as_str().cmp(source))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tab-separated mapping file; `-` marks an absent field.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{MAPPING_HEADER}")?;
        for e in &self.entries {
            writeln!(
                out,
                "{}\t{}\t{:.6}\t{}\t{}\t{}",
                e.source,
                e.selected.as_ref().map_or("-", NodeId::as_str),
                e.weight,
                e.status,
                e.selected_file.as_deref().unwrap_or("-"),
                e.candidates
            )?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            if f.len() != 6 {
                return Err(Error::parse(lineno, "mapping line must have 6 fields"));
            }
            let opt = |s: &str| (s != "-").then(|| s.to_string());
            entries.push(MappingEntry {
                source: NodeId::from(f[0]),
                selected: opt(f[1]).map(NodeId::new),
                weight: f[2]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad weight `{}`", f[2])))?,
                status: f[3]
                    .parse()
                    .map_err(|e: Error| Error::parse(lineno, e.to_string()))?,
                selected_file: opt(f[4]),
                candidates: f[5]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad candidate count `{}`", f[5])))?,
            });
        }
        Ok(Mapping::from_entries(entries))
    }
}

#[derive(Debug, Clone)]
pub struct RelaxOutcome {
    pub weights: WeightTable,
    pub mapping: Mapping,
    pub trace: RelaxTrace,
}

/// Runs relaxation to convergence and selects one target per source node.
pub fn run(
    ctx: &AlignContext<'_>,
    cfg: &RelaxConfig,
    source: &TaxonomyGraph,
    target: &TaxonomyGraph,
) -> Result<RelaxOutcome> {
    run_observed(ctx, cfg, source, target, |_, _, _| {})
}

/// Like [`run`], calling `observe(iteration, weights, max_delta)` after each
/// step.
pub fn run_observed(
    ctx: &AlignContext<'_>,
    cfg: &RelaxConfig,
    source: &TaxonomyGraph,
    target: &TaxonomyGraph,
    observe: impl FnMut(usize, &WeightTable, f64) + Send,
) -> Result<RelaxOutcome> {
    cfg.validate()?;
    let (weights, trace) = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| iterate(ctx, cfg, observe)),
        None => iterate(ctx, cfg, observe),
    };
    let mapping = select(ctx.candidates, &weights, &trace, source, target);
    Ok(RelaxOutcome {
        weights,
        mapping,
        trace,
    })
}

fn iterate(
    ctx: &AlignContext<'_>,
    cfg: &RelaxConfig,
    mut observe: impl FnMut(usize, &WeightTable, f64),
) -> (WeightTable, RelaxTrace) {
    let mut weights = init_weights(ctx.candidates, cfg);
    let mut trace = RelaxTrace {
        iterations_run: 0,
        deltas: Vec::new(),
        touched: BTreeSet::new(),
        converged: false,
    };
    for iter in 1..=cfg.max_iters {
        let out = step(ctx, cfg, &weights);
        weights = out.weights;
        trace.iterations_run = iter;
        trace.deltas.push(out.max_delta);
        trace.touched.extend(out.changed);
        observe(iter, &weights, out.max_delta);
        if out.max_delta < cfg.epsilon {
            trace.converged = true;
            break;
        }
    }
    (weights, trace)
}

/// Argmax per variable; ties go to the smallest target id.
fn select(
    cand: &CandidateSet,
    weights: &WeightTable,
    trace: &RelaxTrace,
    source: &TaxonomyGraph,
    target: &TaxonomyGraph,
) -> Mapping {
    let entries = (0..cand.len())
        .map(|s| {
            let labels = cand.candidates(s);
            let row = weights.row(s);
            let mut entry = MappingEntry {
                source: source.id(s).clone(),
                selected: None,
                selected_file: None,
                weight: 0.0,
                status: MappingStatus::NoTranslation,
                candidates: labels.len(),
            };
            if labels.is_empty() {
                return entry;
            }
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let top: Vec<usize> = (0..row.len())
                .filter(|&j| best - row[j] < TIE_TOLERANCE)
                .collect();
            let pick = top[0];
            entry.selected = Some(target.id(labels[pick]).clone());
            entry.selected_file = target.node(labels[pick]).semfile.clone();
            entry.weight = row[pick];
            entry.status = if labels.len() == 1 {
                MappingStatus::Monosemous
            } else if !trace.touched.contains(&s) {
                MappingStatus::Untouched
            } else if top.len() > 1 {
                MappingStatus::Tied
            } else {
                MappingStatus::Resolved
            };
            entry
        })
        .collect();
    Mapping::from_entries(entries)
}

/// Work estimate of one iteration: variables times constraint applications.
pub fn cost_estimate(n_vars: usize, n_constraint_applications: usize) -> u128 {
    n_vars as u128 * n_constraint_applications as u128
}
