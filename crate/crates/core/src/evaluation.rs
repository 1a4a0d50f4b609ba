//! Coverage, precision and baseline figures against a gold standard.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::candidates::{CandidateSet, ConnectionStats};
use crate::error::{Error, Result};
use crate::relaxation::{Mapping, MappingStatus, RelaxTrace};
use crate::taxonomy::{NodeId, TaxonomyGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoldAnswer {
    Node(NodeId),
    File(String),
}

/// How trustworthy the source hierarchy around a node is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quality {
    /// Hierarchy well built and filed under the right semantic file.
    TaxonomyOkFileOk,
    /// Hierarchy well built but filed under the wrong semantic file.
    TaxonomyOkFileWrong,
    /// Hierarchy wrongly built; excluded from precision.
    TaxonomyWrong,
}

impl FromStr for Quality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Quality::TaxonomyOkFileOk),
            "oknf" => Ok(Quality::TaxonomyOkFileWrong),
            "nok" => Ok(Quality::TaxonomyWrong),
            _ => Err(Error::Format(format!("unknown quality tag `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldEntry {
    pub answer: GoldAnswer,
    pub quality: Quality,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldStandard {
    entries: BTreeMap<NodeId, GoldEntry>,
}

impl GoldStandard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: impl Into<String>, answer: GoldAnswer, quality: Quality) {
        self.entries
            .insert(NodeId::new(source), GoldEntry { answer, quality });
    }

    pub fn get(&self, source: &str) -> Option<&GoldEntry> {
        self.entries.get(source)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `src_id<TAB>node:<id>|file:<tag>[<TAB>ok|oknf|nok]` lines.
    /// A missing quality column means `ok`.
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut gold = GoldStandard::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            if !(2..=3).contains(&f.len()) || f[0].is_empty() {
                return Err(Error::parse(
                    lineno,
                    "gold line must be `src_id<TAB>gold[<TAB>quality]`",
                ));
            }
            let answer = match f[1].split_once(':') {
                Some(("node", id)) if !id.is_empty() => GoldAnswer::Node(NodeId::from(id)),
                Some(("file", tag)) if !tag.is_empty() => GoldAnswer::File(tag.to_string()),
                _ => {
                    return Err(Error::parse(
                        lineno,
                        format!("gold must be `node:<id>` or `file:<tag>`, got `{}`", f[1]),
                    ))
                }
            };
            let quality = match f.get(2) {
                Some(q) => q
                    .parse()
                    .map_err(|e: Error| Error::parse(lineno, e.to_string()))?,
                None => Quality::TaxonomyOkFileOk,
            };
            gold.insert(f[0], answer, quality);
        }
        Ok(gold)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        GoldStandard::load(BufReader::new(file))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalLevel {
    File,
    Node,
}

impl FromStr for EvalLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "file" => Ok(EvalLevel::File),
            "node" => Ok(EvalLevel::Node),
            _ => Err(Error::Config(format!("unknown evaluation level `{s}`"))),
        }
    }
}

/// Right answers out of evaluated ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn pct(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.correct as f64 / self.total as f64)
    }

    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
    }

    fn plus(self, other: Tally) -> Tally {
        Tally {
            correct: self.correct + other.correct,
            total: self.total + other.total,
        }
    }
}

/// Precision over one population of nodes, split by quality tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionTable {
    pub ok_file_ok: Tally,
    pub ok_file_wrong: Tally,
    /// Nodes tagged as wrongly built, left out of both tallies.
    pub excluded: usize,
    pub ties: usize,
}

impl PrecisionTable {
    /// Precision over every well-built node, recomputed from the parts.
    pub fn total(&self) -> Tally {
        self.ok_file_ok.plus(self.ok_file_wrong)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub level: EvalLevel,
    /// Nodes with two or more candidates.
    pub polysemous: PrecisionTable,
    pub monosemous: PrecisionTable,
    /// Nodes with at least one candidate.
    pub all: PrecisionTable,
    /// Connected nodes that could not be judged (no usable gold entry).
    pub unevaluated: usize,
}

/// Maps gold answers to semantic files for file-level evaluation.
fn gold_file<'a>(
    answer: &'a GoldAnswer,
    target: Option<&'a TaxonomyGraph>,
) -> Result<Option<&'a str>> {
    match answer {
        GoldAnswer::File(tag) => Ok(Some(tag)),
        GoldAnswer::Node(id) => {
            let target = target.ok_or_else(|| {
                Error::Config("file-level evaluation of node gold needs the target taxonomy".into())
            })?;
            let node = target
                .get(id.as_str())
                .ok_or_else(|| Error::Reference(id.to_string()))?;
            Ok(node.semfile.as_deref())
        }
    }
}

/// Scores `mapping` against `gold`. `target` is only read to resolve the
/// semantic file of node-level gold answers at file level.
pub fn precision(
    mapping: &Mapping,
    gold: &GoldStandard,
    level: EvalLevel,
    target: Option<&TaxonomyGraph>,
) -> Result<PrecisionReport> {
    let mut poly = PrecisionTable::default();
    let mut mono = PrecisionTable::default();
    let mut unevaluated = 0;
    for e in mapping.entries() {
        if e.status == MappingStatus::NoTranslation {
            continue;
        }
        let table = if e.status.is_polysemous() {
            &mut poly
        } else {
            &mut mono
        };
        let Some(g) = gold.get(e.source.as_str()) else {
            unevaluated += 1;
            continue;
        };
        if g.quality == Quality::TaxonomyWrong {
            table.excluded += 1;
            continue;
        }
        let correct = match level {
            EvalLevel::Node => match &g.answer {
                GoldAnswer::Node(id) => e.selected.as_ref() == Some(id),
                GoldAnswer::File(_) => {
                    unevaluated += 1;
                    continue;
                }
            },
            EvalLevel::File => match gold_file(&g.answer, target)? {
                Some(f) => e.selected_file.as_deref() == Some(f),
                None => false,
            },
        };
        if e.status == MappingStatus::Tied {
            table.ties += 1;
        }
        match g.quality {
            Quality::TaxonomyOkFileOk => table.ok_file_ok.add(correct),
            Quality::TaxonomyOkFileWrong => table.ok_file_wrong.add(correct),
            Quality::TaxonomyWrong => unreachable!(),
        }
    }
    let all = PrecisionTable {
        ok_file_ok: poly.ok_file_ok.plus(mono.ok_file_ok),
        ok_file_wrong: poly.ok_file_wrong.plus(mono.ok_file_wrong),
        excluded: poly.excluded + mono.excluded,
        ties: poly.ties + mono.ties,
    };
    Ok(PrecisionReport {
        level,
        polysemous: poly,
        monosemous: mono,
        all,
        unevaluated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub count: usize,
    pub connected: usize,
    pub pct: Option<f64>,
}

/// Connected nodes whose weights were changed by some constraint.
pub fn coverage(trace: &RelaxTrace, cand: &CandidateSet) -> Coverage {
    let connected = cand.connected().count();
    let count = trace
        .touched
        .iter()
        .filter(|&&s| s < cand.len() && !cand.candidates(s).is_empty())
        .count();
    Coverage {
        count,
        connected,
        pct: (connected > 0).then(|| 100.0 * count as f64 / connected as f64),
    }
}

/// Expected accuracy of picking a candidate uniformly at random, averaged
/// over connected nodes that have a usable gold entry (wrongly-built
/// hierarchies excluded). `None` if no node qualifies.
pub fn baseline_random(
    cand: &CandidateSet,
    gold: &GoldStandard,
    level: EvalLevel,
    source: &TaxonomyGraph,
    target: &TaxonomyGraph,
) -> Result<Option<f64>> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in cand.connected() {
        let Some(g) = gold.get(source.id(s).as_str()) else {
            continue;
        };
        if g.quality == Quality::TaxonomyWrong {
            continue;
        }
        let labels = cand.candidates(s);
        let good = match (level, &g.answer) {
            (EvalLevel::Node, GoldAnswer::Node(id)) => {
                labels.iter().filter(|&&t| target.id(t) == id).count()
            }
            (EvalLevel::Node, GoldAnswer::File(_)) => continue,
            (EvalLevel::File, answer) => match gold_file(answer, Some(target))? {
                Some(f) => labels
                    .iter()
                    .filter(|&&t| target.node(t).semfile.as_deref() == Some(f))
                    .count(),
                None => 0,
            },
        };
        sum += good as f64 / labels.len() as f64;
        n += 1;
    }
    Ok((n > 0).then(|| sum / n as f64))
}

/// Everything `eval`/`align` report, rendered as aligned text or TSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub connection: Option<ConnectionStats>,
    pub coverage: Option<Coverage>,
    pub precision: Vec<PrecisionReport>,
    pub baseline: Option<f64>,
}

fn pct(p: Option<f64>) -> String {
    p.map_or_else(|| "n/a".to_string(), |p| format!("{p:.0}%"))
}

fn cell(t: Tally) -> String {
    format!("{}/{} ({})", t.correct, t.total, pct(t.pct()))
}

fn level_name(level: EvalLevel) -> &'static str {
    match level {
        EvalLevel::File => "file",
        EvalLevel::Node => "node",
    }
}

impl EvalReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.connection {
            let _ = writeln!(out, "Bilingual connection");
            let _ = writeln!(out, "  nodes                {}", c.nodes);
            let _ = writeln!(
                out,
                "  with connection      {} ({})",
                c.connected,
                pct(c.pct_with_connection)
            );
            let _ = writeln!(
                out,
                "  polysemous           {} ({})",
                c.polysemous,
                pct(c.pct_polysemous_of_connected)
            );
            let _ = writeln!(
                out,
                "  mean polysemy        {}",
                c.mean_polysemy.map_or("n/a".into(), |m| format!("{m:.2}"))
            );
            out.push('\n');
        }
        if let Some(c) = &self.coverage {
            let _ = writeln!(out, "Coverage");
            let _ = writeln!(out, "  {:<12} {:>14}", "constraints", "covered");
            let _ = writeln!(
                out,
                "  {:<12} {:>14}",
                self.label,
                format!("{} ({})", c.count, pct(c.pct))
            );
            out.push('\n');
        }
        for p in &self.precision {
            let _ = writeln!(out, "Precision ({} level)", level_name(p.level));
            let _ = writeln!(
                out,
                "  {:<12} {:>18} {:>18} {:>18} {:>7} {:>6}",
                "over", "T_OK,F_OK", "T_OK,F_NOK", "total T_OK", "T_NOK", "ties"
            );
            for (name, t) in [("polysemous", &p.polysemous), ("all", &p.all)] {
                let _ = writeln!(
                    out,
                    "  {:<12} {:>18} {:>18} {:>18} {:>7} {:>6}",
                    name,
                    cell(t.ok_file_ok),
                    cell(t.ok_file_wrong),
                    cell(t.total()),
                    t.excluded,
                    t.ties
                );
            }
            if p.unevaluated > 0 {
                let _ = writeln!(out, "  unevaluated: {}", p.unevaluated);
            }
            out.push('\n');
        }
        if let Some(b) = self.baseline {
            let _ = writeln!(out, "Random baseline: {:.1}%", 100.0 * b);
        }
        out
    }

    /// `section<TAB>row<TAB>column<TAB>value` lines.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("section\trow\tcolumn\tvalue\n");
        let num = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.4}"));
        if let Some(c) = &self.connection {
            let _ = writeln!(out, "connection\tall\tnodes\t{}", c.nodes);
            let _ = writeln!(out, "connection\tall\tconnected\t{}", c.connected);
            let _ = writeln!(out, "connection\tall\tpolysemous\t{}", c.polysemous);
            let _ = writeln!(
                out,
                "connection\tall\tpct_connected\t{}",
                num(c.pct_with_connection)
            );
            let _ = writeln!(
                out,
                "connection\tall\tpct_polysemous\t{}",
                num(c.pct_polysemous_of_connected)
            );
            let _ = writeln!(
                out,
                "connection\tall\tmean_polysemy\t{}",
                num(c.mean_polysemy)
            );
        }
        if let Some(c) = &self.coverage {
            let _ = writeln!(out, "coverage\t{}\tcount\t{}", self.label, c.count);
            let _ = writeln!(out, "coverage\t{}\tconnected\t{}", self.label, c.connected);
            let _ = writeln!(out, "coverage\t{}\tpct\t{}", self.label, num(c.pct));
        }
        for p in &self.precision {
            let section = format!("precision_{}", level_name(p.level));
            for (name, t) in [("polysemous", &p.polysemous), ("all", &p.all)] {
                for (col, tally) in [
                    ("tok_fok", t.ok_file_ok),
                    ("tok_fnok", t.ok_file_wrong),
                    ("tok", t.total()),
                ] {
                    let _ = writeln!(out, "{section}\t{name}\t{col}_correct\t{}", tally.correct);
                    let _ = writeln!(out, "{section}\t{name}\t{col}_total\t{}", tally.total);
                    let _ = writeln!(out, "{section}\t{name}\t{col}_pct\t{}", num(tally.pct()));
                }
                let _ = writeln!(out, "{section}\t{name}\ttnok\t{}", t.excluded);
                let _ = writeln!(out, "{section}\t{name}\tties\t{}", t.ties);
            }
            let _ = writeln!(out, "{section}\tall\tunevaluated\t{}", p.unevaluated);
        }
        if let Some(b) = self.baseline {
            let _ = writeln!(out, "baseline\tall\texpected_accuracy\t{b:.6}");
        }
        out
    }
}
