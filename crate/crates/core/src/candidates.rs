//! Candidate connections: which target nodes each source node may map to,
//! derived through a bilingual word dictionary.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{NodeId, TaxonomyGraph};

/// Lookup key for a word: trimmed, lowercased, inner whitespace runs
/// replaced by `_` (so "Bird of  prey" and "bird_of_prey" agree).
pub fn normalize_word(word: &str) -> String {
    word.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

/// Source word to target word multimap. Both sides are stored normalized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BilingualDict {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl BilingualDict {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a translation pair. Returns `false` if it was already present.
    pub fn insert(&mut self, src: &str, tgt: &str) -> bool {
        self.entries
            .entry(normalize_word(src))
            .or_default()
            .insert(normalize_word(tgt))
    }

    /// Reads `src_word<TAB>tgt_word` lines; `#` starts a comment line.
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut dict = BilingualDict::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            match fields.as_slice() {
                [src, tgt] if !src.trim().is_empty() && !tgt.trim().is_empty() => {
                    dict.insert(src, tgt);
                }
                _ => {
                    return Err(Error::parse(
                        lineno,
                        "dictionary line must be `src_word<TAB>tgt_word`",
                    ))
                }
            }
        }
        Ok(dict)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        BilingualDict::load(BufReader::new(file))
    }

    /// Translations of `word`, looked up after normalization.
    pub fn translations(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(&normalize_word(word))
    }

    /// Number of distinct translation pairs.
    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectionStatus {
    NoTranslation,
    Monosemous,
    Polysemous,
}

/// Candidate target nodes of every source node, as target indices sorted
/// ascending (which is lexicographic target-id order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    lists: Vec<Vec<usize>>,
    pinned: Vec<bool>,
    target_len: usize,
}

impl CandidateSet {
    /// Candidates of each source node: every target node whose word or synonym
    /// members contain a translation of the source word. Pinned source nodes
    /// get their pinned target as the single candidate.
    pub fn generate(
        src: &TaxonomyGraph,
        tgt: &TaxonomyGraph,
        dict: &BilingualDict,
        pins: &BTreeMap<NodeId, NodeId>,
    ) -> Result<Self> {
        let mut by_word: HashMap<String, Vec<usize>> = HashMap::new();
        for (t, node) in tgt.nodes().iter().enumerate() {
            for w in node.words() {
                by_word.entry(normalize_word(w)).or_default().push(t);
            }
        }

        let mut lists: Vec<Vec<usize>> = src
            .nodes()
            .iter()
            .map(|node| {
                let mut cands: Vec<usize> = dict
                    .translations(&node.word)
                    .into_iter()
                    .flatten()
                    .filter_map(|tr| by_word.get(tr))
                    .flatten()
                    .copied()
                    .collect();
                cands.sort_unstable();
                cands.dedup();
                cands
            })
            .collect();

        let mut pinned = vec![false; src.len()];
        for (s, t) in pins {
            let si = src
                .index_of(s.as_str())
                .ok_or_else(|| Error::Reference(s.to_string()))?;
            let ti = tgt
                .index_of(t.as_str())
                .ok_or_else(|| Error::Reference(t.to_string()))?;
            lists[si] = vec![ti];
            pinned[si] = true;
        }
        Ok(CandidateSet {
            lists,
            pinned,
            target_len: tgt.len(),
        })
    }

    /// Builds a set from explicit per-source lists of target indices.
    pub fn from_lists(target_len: usize, lists: Vec<Vec<usize>>) -> Self {
        let lists: Vec<Vec<usize>> = lists
            .into_iter()
            .map(|mut l| {
                assert!(
                    l.iter().all(|&t| t < target_len),
                    "target index out of range"
                );
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        CandidateSet {
            pinned: vec![false; lists.len()],
            lists,
            target_len,
        }
    }

    /// Number of source nodes.
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn candidates(&self, src: usize) -> &[usize] {
        &self.lists[src]
    }

    /// Position of `tgt` in the candidate list of `src`.
    pub fn position(&self, src: usize, tgt: usize) -> Option<usize> {
        self.lists[src].binary_search(&tgt).ok()
    }

    pub fn is_pinned(&self, src: usize) -> bool {
        self.pinned[src]
    }

    pub fn status(&self, src: usize) -> ConnectionStatus {
        match self.lists[src].len() {
            0 => ConnectionStatus::NoTranslation,
            1 => ConnectionStatus::Monosemous,
            _ => ConnectionStatus::Polysemous,
        }
    }

    /// Source nodes with at least one candidate.
    pub fn connected(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&s| !self.lists[s].is_empty())
    }

    /// Source nodes with two or more candidates.
    pub fn polysemous(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&s| self.lists[s].len() > 1)
    }

    /// Total number of (source, candidate) pairs.
    pub fn pair_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

/// Bilingual-connection coverage and polysemy figures. Percentages are
/// `None` when their denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionStats {
    pub nodes: usize,
    pub connected: usize,
    pub polysemous: usize,
    pub pct_with_connection: Option<f64>,
    pub pct_polysemous_of_connected: Option<f64>,
    pub mean_polysemy: Option<f64>,
}

pub fn connection_stats(c: &CandidateSet) -> ConnectionStats {
    let nodes = c.len();
    let connected = c.connected().count();
    let polysemous = c.polysemous().count();
    let pairs = c.pair_count();
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    ConnectionStats {
        nodes,
        connected,
        polysemous,
        pct_with_connection: ratio(connected, nodes).map(|r| 100.0 * r),
        pct_polysemous_of_connected: ratio(polysemous, connected).map(|r| 100.0 * r),
        mean_polysemy: ratio(pairs, connected),
    }
}
