//! Structural constraints over hypernym/hyponym relations.
//!
//! A rule is written with three letters `XYZ`:
//!
//! * `X`: how the relation is read in the source taxonomy, `I` for immediate
//!   hypernyms/hyponyms only, `A` for any ancestor/descendant;
//! * `Y`: the same for the target taxonomy;
//! * `Z`: which relation must be connected, `E` hypernym, `O` hyponym, or `B`
//!   both at once.
//!
//! A connection `(s, t)` is supported by every other candidate connection
//! `(s', t')` where `s'` relates to `s` the way `t'` relates to `t`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::error::{Error, Result};
use crate::relaxation::WeightTable;
use crate::taxonomy::ClosureIndex;

/// Default upper bound on a support value.
pub const DEFAULT_SUPPORT_CLAMP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    Immediate,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Hypernym,
    Hyponym,
    Both,
}

impl Scope {
    fn letter(self) -> char {
        match self {
            Scope::Immediate => 'I',
            Scope::Any => 'A',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Scope::Immediate),
            'A' => Some(Scope::Any),
            _ => None,
        }
    }
}

impl Direction {
    fn letter(self) -> char {
        match self {
            Direction::Hypernym => 'E',
            Direction::Hyponym => 'O',
            Direction::Both => 'B',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'E' => Some(Direction::Hypernym),
            'O' => Some(Direction::Hyponym),
            'B' => Some(Direction::Both),
            _ => None,
        }
    }
}

/// One `XYZ` constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintRule {
    pub src_scope: Scope,
    pub tgt_scope: Scope,
    pub direction: Direction,
}

impl ConstraintRule {
    pub const fn new(src_scope: Scope, tgt_scope: Scope, direction: Direction) -> Self {
        ConstraintRule {
            src_scope,
            tgt_scope,
            direction,
        }
    }

    /// Canonical upper-case code, e.g. `IAE`.
    pub fn code(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConstraintRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}",
            self.src_scope.letter(),
            self.tgt_scope.letter(),
            self.direction.letter()
        )
    }
}

impl FromStr for ConstraintRule {
    type Err = Error;

    /// Parses a three-letter code, case-insensitively.
    fn from_str(code: &str) -> Result<Self> {
        let chars: Vec<char> = code.trim().chars().collect();
        let bad = || Error::Format(format!("invalid constraint code `{code}`"));
        if chars.len() != 3 {
            return Err(bad());
        }
        Ok(ConstraintRule {
            src_scope: Scope::from_letter(chars[0]).ok_or_else(bad)?,
            tgt_scope: Scope::from_letter(chars[1]).ok_or_else(bad)?,
            direction: Direction::from_letter(chars[2]).ok_or_else(bad)?,
        })
    }
}

/// Rules applied together, each with a strength multiplier (1.0 unless set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintPack {
    rules: Vec<ConstraintRule>,
    strengths: Vec<f64>,
}

impl ConstraintPack {
    pub fn new(rules: Vec<ConstraintRule>) -> Self {
        let strengths = vec![1.0; rules.len()];
        ConstraintPack { rules, strengths }
    }

    /// Expands `XY*` into `{XYE, XYO, XYB}`; a full code gives a one-rule pack.
    /// Comma-separated items are combined, dropping repeated rules.
    pub fn expand(pattern: &str) -> Result<Self> {
        if pattern.contains(',') {
            let mut rules: Vec<ConstraintRule> = Vec::new();
            for part in pattern.split(',') {
                for r in ConstraintPack::expand(part)?.rules {
                    if !rules.contains(&r) {
                        rules.push(r);
                    }
                }
            }
            return Ok(ConstraintPack::new(rules));
        }
        let p = pattern.trim();
        if let Some(prefix) = p.strip_suffix('*') {
            let chars: Vec<char> = prefix.chars().collect();
            let bad = || Error::Format(format!("invalid constraint pattern `{pattern}`"));
            if chars.len() != 2 {
                return Err(bad());
            }
            let src_scope = Scope::from_letter(chars[0]).ok_or_else(bad)?;
            let tgt_scope = Scope::from_letter(chars[1]).ok_or_else(bad)?;
            let rules = [Direction::Hypernym, Direction::Hyponym, Direction::Both]
                .into_iter()
                .map(|d| ConstraintRule::new(src_scope, tgt_scope, d))
                .collect();
            Ok(ConstraintPack::new(rules))
        } else {
            Ok(ConstraintPack::new(vec![p.parse()?]))
        }
    }

    pub fn rules(&self) -> &[ConstraintRule] {
        &self.rules
    }

    pub fn strength(&self, i: usize) -> f64 {
        self.strengths[i]
    }

    pub fn set_strength(&mut self, rule: ConstraintRule, strength: f64) {
        for (r, s) in self.rules.iter().zip(self.strengths.iter_mut()) {
            if *r == rule {
                *s = strength;
            }
        }
    }

    /// Multiplies every strength by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ConstraintPack {
            rules: self.rules.clone(),
            strengths: self.strengths.iter().map(|s| s * factor).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Pattern the pack was expanded from when it is a full `XY*` pack,
    /// otherwise the comma-joined rule codes.
    pub fn label(&self) -> String {
        if let [a, b, c] = self.rules.as_slice() {
            if a.src_scope == b.src_scope
                && b.src_scope == c.src_scope
                && a.tgt_scope == b.tgt_scope
                && b.tgt_scope == c.tgt_scope
                && [a.direction, b.direction, c.direction]
                    == [Direction::Hypernym, Direction::Hyponym, Direction::Both]
            {
                return format!("{}{}*", a.src_scope.letter(), a.tgt_scope.letter());
            }
        }
        self.rules
            .iter()
            .map(ConstraintRule::code)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl FromStr for ConstraintPack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintPack::expand(s)
    }
}

/// A candidate connection between a source node and a target node, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Connection {
    pub src: usize,
    pub tgt: usize,
}

impl Connection {
    pub fn new(src: usize, tgt: usize) -> Self {
        Connection { src, tgt }
    }
}

/// Everything support computation reads: both closures and the candidates.
#[derive(Debug, Clone, Copy)]
pub struct AlignContext<'a> {
    pub source: &'a ClosureIndex,
    pub target: &'a ClosureIndex,
    pub candidates: &'a CandidateSet,
}

#[derive(Clone, Copy)]
enum Side {
    Up,
    Down,
}

impl<'a> AlignContext<'a> {
    pub fn new(
        source: &'a ClosureIndex,
        target: &'a ClosureIndex,
        candidates: &'a CandidateSet,
    ) -> Self {
        AlignContext {
            source,
            target,
            candidates,
        }
    }

    fn related(closure: &'a ClosureIndex, node: usize, scope: Scope, side: Side) -> &'a [usize] {
        match (scope, side) {
            (Scope::Immediate, Side::Up) => closure.immediate_hypernyms(node),
            (Scope::Any, Side::Up) => closure.ancestors(node),
            (Scope::Immediate, Side::Down) => closure.immediate_hyponyms(node),
            (Scope::Any, Side::Down) => closure.descendants(node),
        }
    }

    /// Calls `visit(s', position of t' in candidates(s'), t')` for every
    /// supporter on one side, in ascending `(s', t')` order.
    fn for_each_on_side(
        &self,
        rule: ConstraintRule,
        side: Side,
        conn: Connection,
        mut visit: impl FnMut(usize, usize, usize),
    ) {
        let src_related = Self::related(self.source, conn.src, rule.src_scope, side);
        let tgt_related = Self::related(self.target, conn.tgt, rule.tgt_scope, side);
        if src_related.is_empty() || tgt_related.is_empty() {
            return;
        }
        for &s in src_related {
            for (pos, &t) in self.candidates.candidates(s).iter().enumerate() {
                if tgt_related.binary_search(&t).is_ok() {
                    visit(s, pos, t);
                }
            }
        }
    }

    fn side_connections(
        &self,
        rule: ConstraintRule,
        side: Side,
        conn: Connection,
    ) -> Vec<Connection> {
        let mut out = Vec::new();
        self.for_each_on_side(rule, side, conn, |s, _, t| out.push(Connection::new(s, t)));
        out
    }

    fn side_weight(
        &self,
        rule: ConstraintRule,
        side: Side,
        conn: Connection,
        w: &WeightTable,
    ) -> f64 {
        let mut sum = 0.0;
        self.for_each_on_side(rule, side, conn, |s, pos, _| sum += w.weight(s, pos));
        sum
    }

    /// Connections that support `conn` under `rule`, sorted. A `B` rule yields
    /// the union of both sides, or nothing unless both sides are non-empty.
    pub fn supporters(&self, rule: ConstraintRule, conn: Connection) -> Vec<Connection> {
        match rule.direction {
            Direction::Hypernym => self.side_connections(rule, Side::Up, conn),
            Direction::Hyponym => self.side_connections(rule, Side::Down, conn),
            Direction::Both => {
                let up = self.side_connections(rule, Side::Up, conn);
                if up.is_empty() {
                    return up;
                }
                let down = self.side_connections(rule, Side::Down, conn);
                if down.is_empty() {
                    return down;
                }
                let mut all = up;
                all.extend(down);
                all.sort_unstable();
                all.dedup();
                all
            }
        }
    }

    /// Weighted support of `conn` under one rule, before strength and clamp.
    /// For `B` rules this is the smaller of the hypernym-side and hyponym-side
    /// weight sums.
    pub fn rule_support(&self, rule: ConstraintRule, conn: Connection, w: &WeightTable) -> f64 {
        match rule.direction {
            Direction::Hypernym => self.side_weight(rule, Side::Up, conn, w),
            Direction::Hyponym => self.side_weight(rule, Side::Down, conn, w),
            Direction::Both => {
                let up = self.side_weight(rule, Side::Up, conn, w);
                if up == 0.0 {
                    return 0.0;
                }
                up.min(self.side_weight(rule, Side::Down, conn, w))
            }
        }
    }

    /// Total support of `conn`: strength-weighted sum of rule supports,
    /// clamped to `[0, s_max]`.
    pub fn support(
        &self,
        pack: &ConstraintPack,
        conn: Connection,
        w: &WeightTable,
        s_max: f64,
    ) -> f64 {
        let total: f64 = pack
            .rules()
            .iter()
            .enumerate()
            .map(|(i, &rule)| pack.strength(i) * self.rule_support(rule, conn, w))
            .sum();
        total.clamp(0.0, s_max)
    }
}
