//! Hypernym taxonomies: loading, validation, transforms and closure queries.
//!
//! A [`TaxonomyGraph`] keeps its nodes sorted by id, so node indices follow
//! the lexicographic order of ids. Every ordered output of the crate (weight
//! dumps, candidate lists, mapping files) relies on that.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base id of the node inserted by [`TaxonomyGraph::add_virtual_top`].
pub const VIRTUAL_TOP_ID: &str = "__TOP__";

/// Caller-supplied node identifier, unique within one taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A taxonomy node: a dictionary sense on the source side, a synset on the
/// target side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxNode {
    pub id: NodeId,
    pub word: String,
    /// Dictionary sense index, 1-based.
    pub sense: Option<u32>,
    /// Semantic-file tag such as `noun.animal`.
    pub semfile: Option<String>,
    /// Synonym words; for synsets, the other members.
    pub syn: Vec<String>,
}

impl TaxNode {
    pub fn new(id: impl Into<String>, word: impl Into<String>) -> Self {
        TaxNode {
            id: NodeId::new(id),
            word: word.into(),
            sense: None,
            semfile: None,
            syn: Vec::new(),
        }
    }

    pub fn with_sense(mut self, sense: u32) -> Self {
        self.sense = Some(sense);
        self
    }

    pub fn with_semfile(mut self, semfile: impl Into<String>) -> Self {
        self.semfile = Some(semfile.into());
        self
    }

    pub fn with_syn<I, S>(mut self, syn: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.syn = syn.into_iter().map(Into::into).collect();
        self
    }

    /// The primary word followed by the synonym members.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.word.as_str()).chain(self.syn.iter().map(String::as_str))
    }
}

/// Directed acyclic hypernym graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyGraph {
    nodes: Vec<TaxNode>,
    index: HashMap<NodeId, usize>,
    hypernyms: Vec<Vec<usize>>,
    hyponyms: Vec<Vec<usize>>,
    edge_count: usize,
}

impl TaxonomyGraph {
    /// Builds and validates a graph from nodes and `(hypernym, hyponym)` edges.
    pub fn new(mut nodes: Vec<TaxNode>, edges: Vec<(NodeId, NodeId)>) -> Result<Self> {
        for node in &nodes {
            validate_node(node)?;
        }
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = nodes.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Duplicate(w[0].id.to_string()));
        }
        let index: HashMap<NodeId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();

        let mut hypernyms = vec![Vec::new(); nodes.len()];
        let mut hyponyms = vec![Vec::new(); nodes.len()];
        for (hyper, hypo) in &edges {
            let h = *index
                .get(hyper)
                .ok_or_else(|| Error::Reference(hyper.to_string()))?;
            let c = *index
                .get(hypo)
                .ok_or_else(|| Error::Reference(hypo.to_string()))?;
            hypernyms[c].push(h);
            hyponyms[h].push(c);
        }
        let mut edge_count = 0;
        for list in hypernyms.iter_mut().chain(hyponyms.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        for list in &hypernyms {
            edge_count += list.len();
        }

        let graph = TaxonomyGraph {
            nodes,
            index,
            hypernyms,
            hyponyms,
            edge_count,
        };
        graph.check_acyclic()?;
        Ok(graph)
    }

    /// Reads the tab-separated taxonomy format (`N` and `E` records).
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "N" => {
                    let node = parse_node(&fields, lineno)?;
                    if seen.insert(node.id.0.clone(), lineno).is_some() {
                        return Err(Error::Duplicate(node.id.0));
                    }
                    nodes.push(node);
                }
                "E" => {
                    if fields.len() != 3 || fields[1].is_empty() || fields[2].is_empty() {
                        return Err(Error::parse(
                            lineno,
                            "edge record must be `E<TAB>hypernym<TAB>hyponym`",
                        ));
                    }
                    for id in &fields[1..] {
                        if !seen.contains_key(*id) {
                            return Err(Error::Reference((*id).to_string()));
                        }
                    }
                    edges.push((NodeId::from(fields[1]), NodeId::from(fields[2])));
                }
                other => {
                    return Err(Error::parse(
                        lineno,
                        format!("unknown record type `{other}`"),
                    ))
                }
            }
        }
        TaxonomyGraph::new(nodes, edges)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        TaxonomyGraph::load(BufReader::new(file))
    }

    /// Writes the graph in the same format [`TaxonomyGraph::load`] reads.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for node in &self.nodes {
            write!(out, "N\t{}\t{}", node.id, node.word)?;
            if let Some(k) = node.sense {
                write!(out, "\tsense={k}")?;
            }
            if let Some(f) = &node.semfile {
                write!(out, "\tfile={f}")?;
            }
            if !node.syn.is_empty() {
                write!(out, "\tsyn={}", node.syn.join(","))?;
            }
            writeln!(out)?;
        }
        for (h, c) in self.edges() {
            writeln!(out, "E\t{}\t{}", self.nodes[h].id, self.nodes[c].id)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[TaxNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &TaxNode {
        &self.nodes[idx]
    }

    pub fn id(&self, idx: usize) -> &NodeId {
        &self.nodes[idx].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&TaxNode> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    /// Direct hypernyms of `idx`, sorted by index.
    pub fn hypernyms(&self, idx: usize) -> &[usize] {
        &self.hypernyms[idx]
    }

    /// Direct hyponyms of `idx`, sorted by index.
    pub fn hyponyms(&self, idx: usize) -> &[usize] {
        &self.hyponyms[idx]
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.hypernyms[i].is_empty())
            .collect()
    }

    /// All `(hypernym, hyponym)` edges ordered by hypernym then hyponym.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.hyponyms
            .iter()
            .enumerate()
            .flat_map(|(h, cs)| cs.iter().map(move |&c| (h, c)))
    }

    /// Nodes ordered so that every hypernym precedes its hyponyms. Ties are
    /// broken by index.
    pub fn topological_order(&self) -> Vec<usize> {
        kahn(&self.hypernyms, &self.hyponyms).0
    }

    fn check_acyclic(&self) -> Result<()> {
        let (order, indegree) = kahn(&self.hypernyms, &self.hyponyms);
        if order.len() == self.len() {
            return Ok(());
        }
        // Every leftover node has a leftover hypernym; walking upwards must
        // revisit a node, and that node lies on a cycle.
        let start = (0..self.len()).find(|&i| indegree[i] > 0).unwrap();
        let mut visited = vec![false; self.len()];
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            cur = *self.hypernyms[cur]
                .iter()
                .find(|&&p| indegree[p] > 0)
                .expect("leftover node without leftover hypernym");
        }
        Err(Error::Cycle(self.nodes[cur].id.to_string()))
    }

    /// Adds a fresh node above every current root. Returns the new graph and
    /// the id given to the inserted node. The id is `__TOP__`, suffixed with
    /// a counter if that id is taken.
    pub fn add_virtual_top(&self, top_word: &str) -> (TaxonomyGraph, NodeId) {
        let mut top_id = NodeId::new(VIRTUAL_TOP_ID);
        let mut counter = 0;
        while self.index.contains_key(&top_id) {
            counter += 1;
            top_id = NodeId::new(format!("{VIRTUAL_TOP_ID}{counter}"));
        }
        let mut nodes = self.nodes.clone();
        nodes.push(TaxNode::new(top_id.as_str(), top_word));
        let mut edges: Vec<(NodeId, NodeId)> = self
            .edges()
            .map(|(h, c)| (self.id(h).clone(), self.id(c).clone()))
            .collect();
        edges.extend(
            self.roots()
                .into_iter()
                .map(|r| (top_id.clone(), self.id(r).clone())),
        );
        let graph = TaxonomyGraph::new(nodes, edges).expect("virtual top keeps the graph valid");
        (graph, top_id)
    }

    /// Merges nodes that share a word and have the same (non-empty) set of
    /// immediate hypernyms. Merging proceeds top-down, so siblings that only
    /// become siblings after their parents merged are collapsed too, and the
    /// result is a fixed point.
    ///
    /// The surviving id of a merged group is its lexicographically smallest
    /// member id. The returned map sends every original id to its survivor.
    pub fn collapse_sense_siblings(&self) -> (TaxonomyGraph, BTreeMap<NodeId, NodeId>) {
        let mut label = vec![usize::MAX; self.len()];
        let mut groups: HashMap<(&str, Vec<usize>), usize> = HashMap::new();
        for n in self.topological_order() {
            let mut parents: Vec<usize> = self.hypernyms[n].iter().map(|&p| label[p]).collect();
            parents.sort_unstable();
            parents.dedup();
            if parents.is_empty() {
                label[n] = n;
                continue;
            }
            let key = (self.nodes[n].word.as_str(), parents);
            label[n] = *groups.entry(key).or_insert(n);
        }

        // Nodes are index-sorted by id, so the first member seen is the
        // smallest id of its group.
        let mut survivor = vec![usize::MAX; self.len()];
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (n, &l) in label.iter().enumerate() {
            members.entry(l).or_default().push(n);
        }
        let mut nodes = Vec::with_capacity(members.len());
        for group in members.values() {
            let head = group[0];
            for &m in group {
                survivor[m] = head;
            }
            let mut node = self.nodes[head].clone();
            if group.len() > 1 {
                node.sense = None;
                for &m in &group[1..] {
                    for w in &self.nodes[m].syn {
                        if !node.syn.contains(w) {
                            node.syn.push(w.clone());
                        }
                    }
                }
            }
            nodes.push(node);
        }
        let edges: Vec<(NodeId, NodeId)> = self
            .edges()
            .map(|(h, c)| (self.id(survivor[h]).clone(), self.id(survivor[c]).clone()))
            .collect();
        let merge_map = (0..self.len())
            .map(|n| (self.id(n).clone(), self.id(survivor[n]).clone()))
            .collect();
        let graph =
            TaxonomyGraph::new(nodes, edges).expect("merging siblings keeps the graph acyclic");
        (graph, merge_map)
    }
}

fn validate_node(node: &TaxNode) -> Result<()> {
    if node.id.0.is_empty() {
        return Err(Error::Format("empty node id".into()));
    }
    if node.word.trim().is_empty() {
        return Err(Error::Format(format!(
            "node `{}` has an empty word",
            node.id
        )));
    }
    if node.sense == Some(0) {
        return Err(Error::Format(format!(
            "node `{}` has sense 0; senses start at 1",
            node.id
        )));
    }
    Ok(())
}

fn parse_node(fields: &[&str], lineno: usize) -> Result<TaxNode> {
    if fields.len() < 3 || fields[1].is_empty() || fields[2].trim().is_empty() {
        return Err(Error::parse(
            lineno,
            "node record must be `N<TAB>id<TAB>word[<TAB>key=value]...`",
        ));
    }
    let mut node = TaxNode::new(fields[1], fields[2]);
    for field in &fields[3..] {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected key=value, got `{field}`")))?;
        match key {
            "sense" => {
                let k: u32 = value
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad sense `{value}`")))?;
                if k == 0 {
                    return Err(Error::parse(lineno, "sense must be >= 1"));
                }
                node.sense = Some(k);
            }
            "file" if !value.is_empty() => node.semfile = Some(value.to_string()),
            "syn" => {
                node.syn = value
                    .split(',')
                    .map(str::trim)
                    .filter(|w| !w.is_empty())
                    .map(str::to_string)
                    .collect();
            }
            _ => return Err(Error::parse(lineno, format!("unknown attribute `{field}`"))),
        }
    }
    Ok(node)
}

/// Kahn's algorithm. Roots are seeded in index order and children are
/// released in index order. Returns the order and the
/// residual in-degrees (non-zero only for nodes on or below a cycle).
fn kahn(hypernyms: &[Vec<usize>], hyponyms: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let mut indegree: Vec<usize> = hypernyms.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..indegree.len()).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(n) = queue.pop_front() {
        order.push(n);
        for &c in &hyponyms[n] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    (order, indegree)
}

/// Precomputed hypernym/hyponym closures of one taxonomy. All lists are
/// sorted by node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureIndex {
    ancestors: Vec<Vec<usize>>,
    descendants: Vec<Vec<usize>>,
    hypernyms: Vec<Vec<usize>>,
    hyponyms: Vec<Vec<usize>>,
}

impl ClosureIndex {
    pub fn build(g: &TaxonomyGraph) -> Self {
        let order = g.topological_order();
        let mut ancestors: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
        for &n in &order {
            let mut acc = Vec::new();
            for &p in g.hypernyms(n) {
                acc.push(p);
                acc.extend_from_slice(&ancestors[p]);
            }
            acc.sort_unstable();
            acc.dedup();
            ancestors[n] = acc;
        }
        let mut descendants: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
        for &n in order.iter().rev() {
            let mut acc = Vec::new();
            for &c in g.hyponyms(n) {
                acc.push(c);
                acc.extend_from_slice(&descendants[c]);
            }
            acc.sort_unstable();
            acc.dedup();
            descendants[n] = acc;
        }
        ClosureIndex {
            ancestors,
            descendants,
            hypernyms: g.hypernyms.clone(),
            hyponyms: g.hyponyms.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.ancestors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ancestors.is_empty()
    }

    pub fn ancestors(&self, n: usize) -> &[usize] {
        &self.ancestors[n]
    }

    pub fn descendants(&self, n: usize) -> &[usize] {
        &self.descendants[n]
    }

    pub fn immediate_hypernyms(&self, n: usize) -> &[usize] {
        &self.hypernyms[n]
    }

    pub fn immediate_hyponyms(&self, n: usize) -> &[usize] {
        &self.hyponyms[n]
    }

    pub fn is_ancestor(&self, candidate: usize, of: usize) -> bool {
        self.ancestors[of].binary_search(&candidate).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(src: &str) -> Result<TaxonomyGraph> {
        TaxonomyGraph::load(src.as_bytes())
    }

    fn ids(g: &TaxonomyGraph, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| g.id(i).to_string()).collect()
    }

    const SOURCE_FRAGMENT: &str = "\
# animal / ave / faisan / rapaz
N\tanimal\tanimal\tsense=1\tfile=noun.animal
N\tave\tave\tsense=1
N\tfaisan\tfaisan\tsense=1
N\trapaz\trapaz\tsense=2
E\tanimal\tave
E\tave\tfaisan
E\tave\trapaz
";

    #[test]
    fn minimal_file() {
        let g = load("N\ta\tanimal\nN\tb\tave\nE\ta\tb\n").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(ids(&g, &g.roots()), ["a"]);
    }

    #[test]
    fn self_loop_is_cycle() {
        let err = load("N\ta\tanimal\nE\ta\ta\n").unwrap_err();
        assert!(matches!(err, Error::Cycle(ref id) if id == "a"), "{err}");
    }

    #[test]
    fn cycle_names_a_node_on_the_cycle() {
        let err = load("N\tr\tr\nN\ta\ta\nN\tb\tb\nN\tc\tc\nE\tr\ta\nE\ta\tb\nE\tb\tc\nE\tc\ta\n")
            .unwrap_err();
        match err {
            Error::Cycle(id) => assert!(["a", "b", "c"].contains(&id.as_str())),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load("N\ta\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            load("# c\nN\ta\tx\nX\ta\n").unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
        assert!(matches!(
            load("N\ta\tx\tsense=0\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            load("N\ta\tx\tcolour=red\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            load("N\ta\tx\nN\ta\ty\n").unwrap_err(),
            Error::Duplicate(ref id) if id == "a"
        ));
        assert!(matches!(
            load("N\ta\tx\nE\ta\tb\n").unwrap_err(),
            Error::Reference(ref id) if id == "b"
        ));
        // edges must come after the nodes they reference
        assert!(matches!(
            load("N\ta\tx\nE\ta\tb\nN\tb\ty\n").unwrap_err(),
            Error::Reference(_)
        ));
    }

    #[test]
    fn attributes_are_parsed_and_written_back() {
        let text = "N\tb1\tbird\tsense=1\tfile=noun.animal\tsyn=bird,fowl\nN\tb2\tave\n";
        let g = load(text).unwrap();
        let n = g.get("b1").unwrap();
        assert_eq!(n.sense, Some(1));
        assert_eq!(n.semfile.as_deref(), Some("noun.animal"));
        assert_eq!(n.syn, ["bird", "fowl"]);
        let mut out = Vec::new();
        g.write(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn source_fragment_layout() {
        let g = load(SOURCE_FRAGMENT).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(ids(&g, &g.roots()), ["animal"]);

        let c = ClosureIndex::build(&g);
        let rapaz = g.index_of("rapaz").unwrap();
        assert_eq!(ids(&g, c.ancestors(rapaz)), ["animal", "ave"]);
        assert_eq!(ids(&g, c.immediate_hypernyms(rapaz)), ["ave"]);
        assert!(c.ancestors(g.index_of("animal").unwrap()).is_empty());
        assert_eq!(
            ids(&g, c.descendants(g.index_of("animal").unwrap())),
            ["ave", "faisan", "rapaz"]
        );
    }

    #[test]
    fn chain_closure() {
        let g = load("N\ta\ta\nN\tb\tb\nN\tc\tc\nE\ta\tb\nE\tb\tc\n").unwrap();
        let c = ClosureIndex::build(&g);
        let ci = g.index_of("c").unwrap();
        assert_eq!(ids(&g, c.ancestors(ci)), ["a", "b"]);
        assert_eq!(ids(&g, c.immediate_hypernyms(ci)), ["b"]);
    }

    #[test]
    fn virtual_top_over_forest() {
        let g = load(
            "N\tr1\tave\tfile=noun.animal\nN\tr2\tpez\tfile=noun.animal\nN\tx\tfaisan\nE\tr1\tx\n",
        )
        .unwrap();
        let (t, top) = g.add_virtual_top("animal");
        assert_eq!(top.as_str(), VIRTUAL_TOP_ID);
        assert_eq!(t.len(), g.len() + 1);
        assert_eq!(ids(&t, &t.roots()), [VIRTUAL_TOP_ID]);
        let ti = t.index_of(VIRTUAL_TOP_ID).unwrap();
        assert_eq!(ids(&t, t.hyponyms(ti)), ["r1", "r2"]);
    }

    #[test]
    fn virtual_top_on_single_root_and_collision() {
        let g = load("N\t__TOP__\troot\nN\tb\tb\nE\t__TOP__\tb\n").unwrap();
        let (t, top) = g.add_virtual_top("top");
        assert_eq!(top.as_str(), "__TOP__1");
        assert_eq!(ids(&t, &t.roots()), ["__TOP__1"]);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn collapse_siblings_with_same_word() {
        let g = load(
            "N\tp\tentidad\nN\tb1\tbanco\tsense=1\nN\tb2\tbanco\tsense=2\tsyn=bench\n\
             N\tc1\tx\nN\tc2\ty\nE\tp\tb1\nE\tp\tb2\nE\tb1\tc1\nE\tb2\tc2\n",
        )
        .unwrap();
        let (m, map) = g.collapse_sense_siblings();
        assert_eq!(m.len(), 4);
        assert_eq!(map[&NodeId::from("b2")].as_str(), "b1");
        let b = m.index_of("b1").unwrap();
        assert_eq!(ids(&m, m.hyponyms(b)), ["c1", "c2"]);
        assert_eq!(m.node(b).sense, None);
        assert_eq!(m.node(b).syn, ["bench"]);
    }

    #[test]
    fn collapse_keeps_different_parents_apart() {
        let g = load("N\tp\tp\nN\tq\tq\nN\tb1\tbanco\nN\tb2\tbanco\nE\tp\tb1\nE\tq\tb2\n").unwrap();
        let (m, _) = g.collapse_sense_siblings();
        assert_eq!(m.len(), 4);
    }

    /// 10 nodes, two mergeable pairs (one of them only after the first merge).
    #[test]
    fn collapse_fixture_recount() {
        let text = "\
N\troot\tanimal
N\tave1\tave\tsense=1
N\tave2\tave\tsense=2
N\tpez\tpez
N\tr1\trapaz\tsense=1
N\tr2\trapaz\tsense=2
N\tf\tfaisan
N\tt\ttrucha
N\tx1\tloro
N\tx2\tloro
E\troot\tave1
E\troot\tave2
E\troot\tpez
E\tave1\tr1
E\tave2\tr2
E\tave1\tf
E\tpez\tt
E\tpez\tx1
E\tf\tx2
";
        let g = load(text).unwrap();
        assert_eq!((g.len(), g.edge_count()), (10, 9));
        let (m, map) = g.collapse_sense_siblings();
        // ave1+ave2, then r1+r2 under the merged ave; loro stays split.
        assert_eq!(m.len(), 8);
        // root->ave, root->pez, ave->r1, ave->f, pez->t, pez->x1, f->x2
        assert_eq!(m.edge_count(), 7);
        assert_eq!(map.len(), 10);
        assert_eq!(map[&NodeId::from("r2")].as_str(), "r1");
        let (again, _) = m.collapse_sense_siblings();
        assert_eq!(again.len(), m.len());
        assert_eq!(again.edge_count(), m.edge_count());
    }
}
