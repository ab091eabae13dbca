//! Formula syntax shared by LTL, CTL and ATL.
//!
//! A single AST covers all three logics: temporal nodes optionally carry a
//! coalition. LTL formulas carry none, CTL/ATL state formulas carry one on
//! every temporal node. Size is the number of *distinct* subformulas (a DAG
//! count), and `bin_count` the number of distinct binary subformulas.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unary operator alphabet for fragment specifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Not,
    Next,
    Eventually,
    Globally,
}

/// Temporal unary operators (the non-`Not` part of [`UnaryOp`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TempUnOp {
    Next,
    Eventually,
    Globally,
}

impl TempUnOp {
    pub fn as_unary(self) -> UnaryOp {
        match self {
            TempUnOp::Next => UnaryOp::Next,
            TempUnOp::Eventually => UnaryOp::Eventually,
            TempUnOp::Globally => UnaryOp::Globally,
        }
    }

    /// Dual operator: X is self-dual, F and G swap.
    pub fn dual(self) -> TempUnOp {
        match self {
            TempUnOp::Next => TempUnOp::Next,
            TempUnOp::Eventually => TempUnOp::Globally,
            TempUnOp::Globally => TempUnOp::Eventually,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            TempUnOp::Next => 'X',
            TempUnOp::Eventually => 'F',
            TempUnOp::Globally => 'G',
        }
    }
}

/// Binary temporal operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinTempOp {
    Until,
    Release,
    WeakUntil,
    MightyRelease,
}

impl BinTempOp {
    pub fn symbol(self) -> char {
        match self {
            BinTempOp::Until => 'U',
            BinTempOp::Release => 'R',
            BinTempOp::WeakUntil => 'W',
            BinTempOp::MightyRelease => 'M',
        }
    }

    pub const ALL: [BinTempOp; 4] = [
        BinTempOp::Until,
        BinTempOp::Release,
        BinTempOp::WeakUntil,
        BinTempOp::MightyRelease,
    ];
}

/// The ten binary logical operators: the five classical ones and their
/// negations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinLogicOp {
    Or,
    And,
    Implies,
    ImpliedBy,
    Iff,
    NotOr,
    NotAnd,
    NotImplies,
    NotImpliedBy,
    NotIff,
}

impl BinLogicOp {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BinLogicOp::Or => a || b,
            BinLogicOp::And => a && b,
            BinLogicOp::Implies => !a || b,
            BinLogicOp::ImpliedBy => a || !b,
            BinLogicOp::Iff => a == b,
            BinLogicOp::NotOr => !(a || b),
            BinLogicOp::NotAnd => !(a && b),
            BinLogicOp::NotImplies => a && !b,
            BinLogicOp::NotImpliedBy => !a && b,
            BinLogicOp::NotIff => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinLogicOp::Or => "|",
            BinLogicOp::And => "&",
            BinLogicOp::Implies => "->",
            BinLogicOp::ImpliedBy => "<-",
            BinLogicOp::Iff => "<->",
            BinLogicOp::NotOr => "!|",
            BinLogicOp::NotAnd => "!&",
            BinLogicOp::NotImplies => "!->",
            BinLogicOp::NotImpliedBy => "!<-",
            BinLogicOp::NotIff => "!<->",
        }
    }

    pub const ALL: [BinLogicOp; 10] = [
        BinLogicOp::Or,
        BinLogicOp::And,
        BinLogicOp::Implies,
        BinLogicOp::ImpliedBy,
        BinLogicOp::Iff,
        BinLogicOp::NotOr,
        BinLogicOp::NotAnd,
        BinLogicOp::NotImplies,
        BinLogicOp::NotImpliedBy,
        BinLogicOp::NotIff,
    ];
}

/// A coalition of agents, indices 1-based. For CTL (one agent) the only
/// coalitions are `{}` (printed `A`) and `{1}` (printed `E`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Coalition(pub BTreeSet<u8>);

impl Coalition {
    pub fn empty() -> Coalition {
        Coalition(BTreeSet::new())
    }

    pub fn of(agents: &[u8]) -> Coalition {
        Coalition(agents.iter().copied().collect())
    }

    pub fn solo(agent: u8) -> Coalition {
        Coalition::of(&[agent])
    }

    /// All agents `1..=k`.
    pub fn grand(k: u8) -> Coalition {
        Coalition((1..=k).collect())
    }

    pub fn contains(&self, agent: u8) -> bool {
        self.0.contains(&agent)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_agent(&self) -> u8 {
        self.0.iter().next_back().copied().unwrap_or(0)
    }

    /// Complement within `1..=k`.
    pub fn complement(&self, k: u8) -> Coalition {
        Coalition((1..=k).filter(|a| !self.0.contains(a)).collect())
    }

    /// All `2^k` coalitions over agents `1..=k`, in deterministic order.
    pub fn all(k: u8) -> Vec<Coalition> {
        let agents: Vec<u8> = (1..=k).collect();
        let mut out = Vec::with_capacity(1 << k);
        for mask in 0u32..(1 << k) {
            let set: BTreeSet<u8> = agents
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| *a)
                .collect();
            out.push(Coalition(set));
        }
        out.sort();
        out
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ">")
    }
}

/// Formula node. Structural equality is syntactic: no reordering of
/// commutative operators, matching the paper's purely syntactic size measure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Prop(String),
    Not(Box<Formula>),
    TemporalUnary {
        coalition: Option<Coalition>,
        op: TempUnOp,
        child: Box<Formula>,
    },
    LogicalBinary {
        op: BinLogicOp,
        left: Box<Formula>,
        right: Box<Formula>,
    },
    TemporalBinary {
        coalition: Option<Coalition>,
        op: BinTempOp,
        left: Box<Formula>,
        right: Box<Formula>,
    },
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }

    pub fn not(child: Formula) -> Formula {
        Formula::Not(Box::new(child))
    }

    pub fn temporal(coalition: Option<Coalition>, op: TempUnOp, child: Formula) -> Formula {
        Formula::TemporalUnary {
            coalition,
            op,
            child: Box::new(child),
        }
    }

    pub fn next(child: Formula) -> Formula {
        Formula::temporal(None, TempUnOp::Next, child)
    }

    pub fn eventually(child: Formula) -> Formula {
        Formula::temporal(None, TempUnOp::Eventually, child)
    }

    pub fn globally(child: Formula) -> Formula {
        Formula::temporal(None, TempUnOp::Globally, child)
    }

    pub fn logical(op: BinLogicOp, left: Formula, right: Formula) -> Formula {
        Formula::LogicalBinary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn or(left: Formula, right: Formula) -> Formula {
        Formula::logical(BinLogicOp::Or, left, right)
    }

    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::logical(BinLogicOp::And, left, right)
    }

    pub fn temporal_binary(
        coalition: Option<Coalition>,
        op: BinTempOp,
        left: Formula,
        right: Formula,
    ) -> Formula {
        Formula::TemporalBinary {
            coalition,
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn until(left: Formula, right: Formula) -> Formula {
        Formula::temporal_binary(None, BinTempOp::Until, left, right)
    }

    /// The set `SubF(phi)` of subformulas, duplicates collapsed.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut set = BTreeSet::new();
        self.collect_subformulas(&mut set);
        set
    }

    fn collect_subformulas(&self, set: &mut BTreeSet<Formula>) {
        if set.contains(self) {
            return;
        }
        match self {
            Formula::Prop(_) => {}
            Formula::Not(c) => c.collect_subformulas(set),
            Formula::TemporalUnary { child, .. } => child.collect_subformulas(set),
            Formula::LogicalBinary { left, right, .. }
            | Formula::TemporalBinary { left, right, .. } => {
                left.collect_subformulas(set);
                right.collect_subformulas(set);
            }
        }
        set.insert(self.clone());
    }

    /// DAG size: `|SubF(phi)|`.
    pub fn size(&self) -> usize {
        self.subformulas().len()
    }

    /// Number of nodes in the syntax tree (no sharing). Upper-bounds `size`.
    pub fn tree_size(&self) -> usize {
        match self {
            Formula::Prop(_) => 1,
            Formula::Not(c) => 1 + c.tree_size(),
            Formula::TemporalUnary { child, .. } => 1 + child.tree_size(),
            Formula::LogicalBinary { left, right, .. }
            | Formula::TemporalBinary { left, right, .. } => {
                1 + left.tree_size() + right.tree_size()
            }
        }
    }

    /// `|phi|_Bin`: number of distinct binary-operator subformulas.
    pub fn bin_count(&self) -> usize {
        self.subformulas()
            .iter()
            .filter(|f| {
                matches!(
                    f,
                    Formula::LogicalBinary { .. } | Formula::TemporalBinary { .. }
                )
            })
            .count()
    }

    /// `Prop(phi)`: proposition names occurring in the formula.
    pub fn props(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        self.collect_props(&mut set);
        set
    }

    fn collect_props(&self, set: &mut BTreeSet<String>) {
        match self {
            Formula::Prop(p) => {
                set.insert(p.clone());
            }
            Formula::Not(c) => c.collect_props(set),
            Formula::TemporalUnary { child, .. } => child.collect_props(set),
            Formula::LogicalBinary { left, right, .. }
            | Formula::TemporalBinary { left, right, .. } => {
                left.collect_props(set);
                right.collect_props(set);
            }
        }
    }

    /// True when no temporal node carries a coalition (an LTL formula).
    pub fn is_ltl(&self) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Not(c) => c.is_ltl(),
            Formula::TemporalUnary {
                coalition, child, ..
            } => coalition.is_none() && child.is_ltl(),
            Formula::LogicalBinary { left, right, .. } => left.is_ltl() && right.is_ltl(),
            Formula::TemporalBinary {
                coalition,
                left,
                right,
                ..
            } => coalition.is_none() && left.is_ltl() && right.is_ltl(),
        }
    }

    /// True when every temporal node carries a coalition (a CTL/ATL state
    /// formula).
    pub fn is_state_formula(&self) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Not(c) => c.is_state_formula(),
            Formula::TemporalUnary {
                coalition, child, ..
            } => coalition.is_some() && child.is_state_formula(),
            Formula::LogicalBinary { left, right, .. } => {
                left.is_state_formula() && right.is_state_formula()
            }
            Formula::TemporalBinary {
                coalition,
                left,
                right,
                ..
            } => coalition.is_some() && left.is_state_formula() && right.is_state_formula(),
        }
    }

    /// Largest agent index mentioned in any coalition (0 when none).
    pub fn max_agent(&self) -> u8 {
        match self {
            Formula::Prop(_) => 0,
            Formula::Not(c) => c.max_agent(),
            Formula::TemporalUnary {
                coalition, child, ..
            } => coalition
                .as_ref()
                .map(|c| c.max_agent())
                .unwrap_or(0)
                .max(child.max_agent()),
            Formula::LogicalBinary { left, right, .. } => left.max_agent().max(right.max_agent()),
            Formula::TemporalBinary {
                coalition,
                left,
                right,
                ..
            } => coalition
                .as_ref()
                .map(|c| c.max_agent())
                .unwrap_or(0)
                .max(left.max_agent())
                .max(right.max_agent()),
        }
    }

    pub fn in_fragment(&self, fragment: &FragmentSpec) -> bool {
        self.operators_allowed(fragment)
            && fragment
                .bin_budget
                .map(|n| self.bin_count() <= n as usize)
                .unwrap_or(true)
    }

    fn operators_allowed(&self, fragment: &FragmentSpec) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Not(c) => {
                fragment.unary.contains(&UnaryOp::Not) && c.operators_allowed(fragment)
            }
            Formula::TemporalUnary { op, child, .. } => {
                fragment.unary.contains(&op.as_unary()) && child.operators_allowed(fragment)
            }
            Formula::LogicalBinary { op, left, right } => {
                fragment.bin_logic.contains(op)
                    && left.operators_allowed(fragment)
                    && right.operators_allowed(fragment)
            }
            Formula::TemporalBinary {
                op, left, right, ..
            } => {
                fragment.bin_temp.contains(op)
                    && left.operators_allowed(fragment)
                    && right.operators_allowed(fragment)
            }
        }
    }

    /// `f_{L-C}`: add an existential quantifier (coalition `{1}`) before every
    /// temporal operator, turning an LTL formula into a CTL one. Size is
    /// preserved.
    pub fn ltl_to_state(&self) -> Formula {
        match self {
            Formula::Prop(p) => Formula::Prop(p.clone()),
            Formula::Not(c) => Formula::not(c.ltl_to_state()),
            Formula::TemporalUnary { op, child, .. } => {
                Formula::temporal(Some(Coalition::solo(1)), *op, child.ltl_to_state())
            }
            Formula::LogicalBinary { op, left, right } => {
                Formula::logical(*op, left.ltl_to_state(), right.ltl_to_state())
            }
            Formula::TemporalBinary {
                op, left, right, ..
            } => Formula::temporal_binary(
                Some(Coalition::solo(1)),
                *op,
                left.ltl_to_state(),
                right.ltl_to_state(),
            ),
        }
    }

    /// `f_{C-L}`: drop all quantifiers. Size never increases (it may shrink
    /// when quantified duplicates collapse).
    pub fn state_to_ltl(&self) -> Formula {
        match self {
            Formula::Prop(p) => Formula::Prop(p.clone()),
            Formula::Not(c) => Formula::not(c.state_to_ltl()),
            Formula::TemporalUnary { op, child, .. } => {
                Formula::temporal(None, *op, child.state_to_ltl())
            }
            Formula::LogicalBinary { op, left, right } => {
                Formula::logical(*op, left.state_to_ltl(), right.state_to_ltl())
            }
            Formula::TemporalBinary {
                op, left, right, ..
            } => Formula::temporal_binary(None, *op, left.state_to_ltl(), right.state_to_ltl()),
        }
    }
}

/// An operator fragment plus a budget on binary-operator uses. A formula is
/// in-fragment iff every operator it uses is allowed and its `bin_count` does
/// not exceed the budget (`None` means unbounded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentSpec {
    pub unary: BTreeSet<UnaryOp>,
    pub bin_temp: BTreeSet<BinTempOp>,
    pub bin_logic: BTreeSet<BinLogicOp>,
    pub bin_budget: Option<u32>,
}

impl FragmentSpec {
    pub fn new(
        unary: impl IntoIterator<Item = UnaryOp>,
        bin_temp: impl IntoIterator<Item = BinTempOp>,
        bin_logic: impl IntoIterator<Item = BinLogicOp>,
        bin_budget: Option<u32>,
    ) -> FragmentSpec {
        FragmentSpec {
            unary: unary.into_iter().collect(),
            bin_temp: bin_temp.into_iter().collect(),
            bin_logic: bin_logic.into_iter().collect(),
            bin_budget,
        }
    }

    /// Unary-only fragment with no binary operators at all.
    pub fn unary_only(unary: impl IntoIterator<Item = UnaryOp>) -> FragmentSpec {
        FragmentSpec::new(unary, [], [], Some(0))
    }

    pub fn temporal_unary_ops(&self) -> Vec<TempUnOp> {
        [TempUnOp::Next, TempUnOp::Eventually, TempUnOp::Globally]
            .into_iter()
            .filter(|op| self.unary.contains(&op.as_unary()))
            .collect()
    }

    pub fn allows_not(&self) -> bool {
        self.unary.contains(&UnaryOp::Not)
    }

    /// Parse the CLI fragment syntax, e.g. `U=F,G;Bt=;Bl=or;n=0`.
    /// Omitted sections default to empty (and `n` to unbounded).
    pub fn parse(text: &str) -> Result<FragmentSpec, ParseError> {
        let mut spec = FragmentSpec::new([], [], [], None);
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| ParseError {
                position: 0,
                message: format!("fragment section `{part}` is missing `=`"),
            })?;
            let items = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>();
            match key.trim() {
                "U" => {
                    for item in items {
                        spec.unary.insert(match item {
                            "!" | "not" => UnaryOp::Not,
                            "X" => UnaryOp::Next,
                            "F" => UnaryOp::Eventually,
                            "G" => UnaryOp::Globally,
                            other => {
                                return Err(ParseError {
                                    position: 0,
                                    message: format!("unknown unary operator `{other}`"),
                                })
                            }
                        });
                    }
                }
                "Bt" => {
                    for item in items {
                        spec.bin_temp.insert(match item {
                            "U" => BinTempOp::Until,
                            "R" => BinTempOp::Release,
                            "W" => BinTempOp::WeakUntil,
                            "M" => BinTempOp::MightyRelease,
                            other => {
                                return Err(ParseError {
                                    position: 0,
                                    message: format!("unknown temporal binary operator `{other}`"),
                                })
                            }
                        });
                    }
                }
                "Bl" => {
                    for item in items {
                        spec.bin_logic.insert(match item {
                            "or" | "|" => BinLogicOp::Or,
                            "and" | "&" => BinLogicOp::And,
                            "imp" | "->" => BinLogicOp::Implies,
                            "impby" | "<-" => BinLogicOp::ImpliedBy,
                            "iff" | "<->" => BinLogicOp::Iff,
                            "nor" | "!|" => BinLogicOp::NotOr,
                            "nand" | "!&" => BinLogicOp::NotAnd,
                            "nimp" | "!->" => BinLogicOp::NotImplies,
                            "nimpby" | "!<-" => BinLogicOp::NotImpliedBy,
                            "niff" | "!<->" => BinLogicOp::NotIff,
                            other => {
                                return Err(ParseError {
                                    position: 0,
                                    message: format!("unknown logical binary operator `{other}`"),
                                })
                            }
                        });
                    }
                }
                "n" => {
                    let v = value.trim();
                    spec.bin_budget = if v == "inf" || v == "infinity" {
                        None
                    } else {
                        Some(v.parse().map_err(|_| ParseError {
                            position: 0,
                            message: format!("invalid binary budget `{v}`"),
                        })?)
                    };
                }
                other => {
                    return Err(ParseError {
                        position: 0,
                        message: format!("unknown fragment section `{other}`"),
                    })
                }
            }
        }
        Ok(spec)
    }
}

/// Parse error with a byte position into the input text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Parser<'a> {
        Parser {
            input: input.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.input.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, expected: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == expected => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.error(format!(
                "expected `{}`, found `{}`",
                expected as char, c as char
            ))),
            None => Err(self.error(format!("expected `{}`, found end of input", expected as char))),
        }
    }

    /// Binary operators form a single precedence class and associate to the
    /// right; unary operators bind tighter.
    fn parse_formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.parse_unary()?;
        self.skip_ws();
        if let Some(op) = self.try_binary_op()? {
            let right = self.parse_formula()?;
            Ok(match op {
                BinOpToken::Logic(op) => Formula::logical(op, left, right),
                BinOpToken::Temporal(op) => Formula::temporal_binary(None, op, left, right),
            })
        } else {
            Ok(left)
        }
    }

    fn try_binary_op(&mut self) -> Result<Option<BinOpToken>, ParseError> {
        let start = self.pos;
        let negated = if self.peek() == Some(b'!') {
            // `!` here can only begin a negated binary operator.
            self.pos += 1;
            true
        } else {
            false
        };
        let op = match self.peek() {
            Some(b'|') => {
                self.pos += 1;
                Some(if negated {
                    BinLogicOp::NotOr
                } else {
                    BinLogicOp::Or
                })
            }
            Some(b'&') => {
                self.pos += 1;
                Some(if negated {
                    BinLogicOp::NotAnd
                } else {
                    BinLogicOp::And
                })
            }
            Some(b'-') if self.peek_at(1) == Some(b'>') => {
                self.pos += 2;
                Some(if negated {
                    BinLogicOp::NotImplies
                } else {
                    BinLogicOp::Implies
                })
            }
            Some(b'<') if self.peek_at(1) == Some(b'-') => {
                if self.peek_at(2) == Some(b'>') {
                    self.pos += 3;
                    Some(if negated {
                        BinLogicOp::NotIff
                    } else {
                        BinLogicOp::Iff
                    })
                } else {
                    self.pos += 2;
                    Some(if negated {
                        BinLogicOp::NotImpliedBy
                    } else {
                        BinLogicOp::ImpliedBy
                    })
                }
            }
            _ => None,
        };
        if let Some(op) = op {
            return Ok(Some(BinOpToken::Logic(op)));
        }
        if negated {
            return Err(self.error("`!` in operator position must begin a negated binary operator"));
        }
        // Temporal binary operators, without coalition (LTL infix form).
        let op = match self.peek() {
            Some(b'U') => Some(BinTempOp::Until),
            Some(b'R') => Some(BinTempOp::Release),
            Some(b'W') => Some(BinTempOp::WeakUntil),
            Some(b'M') => Some(BinTempOp::MightyRelease),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            return Ok(Some(BinOpToken::Temporal(op)));
        }
        self.pos = start;
        Ok(None)
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(Formula::not(self.parse_unary()?))
            }
            Some(b'X') => {
                self.pos += 1;
                Ok(Formula::next(self.parse_unary()?))
            }
            Some(b'F') => {
                self.pos += 1;
                Ok(Formula::eventually(self.parse_unary()?))
            }
            Some(b'G') => {
                self.pos += 1;
                Ok(Formula::globally(self.parse_unary()?))
            }
            Some(b'A') => {
                self.pos += 1;
                self.parse_quantified(Coalition::empty())
            }
            Some(b'E') => {
                self.pos += 1;
                self.parse_quantified(Coalition::solo(1))
            }
            Some(b'<') => {
                let coalition = self.parse_coalition()?;
                self.parse_quantified(coalition)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_formula()?;
                self.skip_ws();
                self.eat(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_lowercase() => self.parse_prop(),
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn parse_coalition(&mut self) -> Result<Coalition, ParseError> {
        self.eat(b'<')?;
        let mut agents = BTreeSet::new();
        self.skip_ws();
        while self.peek() != Some(b'>') {
            let start = self.pos;
            let mut value: u32 = 0;
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    value = value * 10 + (c - b'0') as u32;
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.pos == start {
                return Err(self.error("expected an agent index"));
            }
            if value == 0 || value > u8::MAX as u32 {
                self.pos = start;
                return Err(self.error(format!("agent index {value} out of range")));
            }
            agents.insert(value as u8);
            self.skip_ws();
            if self.peek() == Some(b',') {
                self.pos += 1;
                self.skip_ws();
            }
        }
        self.eat(b'>')?;
        Ok(Coalition(agents))
    }

    /// After a coalition (or `A`/`E` sugar): either a temporal unary operator,
    /// or a parenthesized binary temporal formula.
    fn parse_quantified(&mut self, coalition: Coalition) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'X') => {
                self.pos += 1;
                Ok(Formula::temporal(
                    Some(coalition),
                    TempUnOp::Next,
                    self.parse_unary()?,
                ))
            }
            Some(b'F') => {
                self.pos += 1;
                Ok(Formula::temporal(
                    Some(coalition),
                    TempUnOp::Eventually,
                    self.parse_unary()?,
                ))
            }
            Some(b'G') => {
                self.pos += 1;
                Ok(Formula::temporal(
                    Some(coalition),
                    TempUnOp::Globally,
                    self.parse_unary()?,
                ))
            }
            Some(b'(') => {
                self.pos += 1;
                let left = self.parse_unary()?;
                self.skip_ws();
                let op = match self.bump() {
                    Some(b'U') => BinTempOp::Until,
                    Some(b'R') => BinTempOp::Release,
                    Some(b'W') => BinTempOp::WeakUntil,
                    Some(b'M') => BinTempOp::MightyRelease,
                    _ => {
                        self.pos -= 1;
                        return Err(
                            self.error("expected a binary temporal operator after the coalition")
                        );
                    }
                };
                let right = self.parse_formula()?;
                self.skip_ws();
                self.eat(b')')?;
                Ok(Formula::temporal_binary(Some(coalition), op, left, right))
            }
            _ => Err(self.error("expected a temporal operator after the coalition")),
        }
    }

    fn parse_prop(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.input[start..self.pos])
            .expect("ascii slice")
            .to_string();
        Ok(Formula::Prop(name))
    }
}

enum BinOpToken {
    Logic(BinLogicOp),
    Temporal(BinTempOp),
}

/// Parse the textual grammar. Propositions are `[a-z][A-Za-z0-9_]*`; unary
/// operators `! X F G`; binary operators `| & -> <- <-> !| !& !-> !<- !<->`
/// and `U R W M`; coalition prefixes `<i,...>` with `A`/`E` sugar for
/// `<>`/`<1>`. Unary binds tighter than binary and binary operators are
/// right-associative.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser::new(text);
    let formula = parser.parse_formula()?;
    parser.skip_ws();
    if parser.pos != parser.input.len() {
        return Err(parser.error("trailing input after formula"));
    }
    Ok(formula)
}

fn coalition_prefix(coalition: &Coalition) -> String {
    if coalition.is_empty() {
        "A".to_string()
    } else if coalition.0.len() == 1 && coalition.contains(1) {
        "E".to_string()
    } else {
        coalition.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Prop(p) => write!(f, "{p}"),
            Formula::Not(c) => {
                if matches!(
                    **c,
                    Formula::LogicalBinary { .. } | Formula::TemporalBinary { coalition: None, .. }
                ) {
                    write!(f, "!({c})")
                } else {
                    write!(f, "!{c}")
                }
            }
            Formula::TemporalUnary {
                coalition,
                op,
                child,
            } => {
                if let Some(coalition) = coalition {
                    write!(f, "{} {}", coalition_prefix(coalition), op.symbol())?;
                } else {
                    write!(f, "{}", op.symbol())?;
                }
                if matches!(
                    **child,
                    Formula::LogicalBinary { .. } | Formula::TemporalBinary { coalition: None, .. }
                ) {
                    write!(f, " ({child})")
                } else {
                    write!(f, " {child}")
                }
            }
            Formula::LogicalBinary { op, left, right } => {
                if matches!(
                    **left,
                    Formula::LogicalBinary { .. } | Formula::TemporalBinary { coalition: None, .. }
                ) {
                    write!(f, "({left}) {} {right}", op.symbol())
                } else {
                    write!(f, "{left} {} {right}", op.symbol())
                }
            }
            Formula::TemporalBinary {
                coalition,
                op,
                left,
                right,
            } => {
                if let Some(coalition) = coalition {
                    write!(
                        f,
                        "{}({left} {} {right})",
                        coalition_prefix(coalition),
                        op.symbol()
                    )
                } else if matches!(
                    **left,
                    Formula::LogicalBinary { .. } | Formula::TemporalBinary { coalition: None, .. }
                ) {
                    write!(f, "({left}) {} {right}", op.symbol())
                } else {
                    write!(f, "{left} {} {right}", op.symbol())
                }
            }
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Formula {
        Formula::prop(name)
    }

    #[test]
    fn subformulas_collapse_duplicates() {
        assert_eq!(p("p").subformulas().len(), 1);
        let or = Formula::or(p("p"), p("p"));
        assert_eq!(or.subformulas().len(), 2);
        // a1 | (a2 | a3), right-nested over distinct propositions.
        let chain = Formula::or(p("a1"), Formula::or(p("a2"), p("a3")));
        assert_eq!(chain.subformulas().len(), 5);
    }

    #[test]
    fn size_of_disjunction_chain_is_2r_minus_1() {
        for r in 1..=6 {
            let mut formula = p(&format!("a{r}"));
            for i in (1..r).rev() {
                formula = Formula::or(p(&format!("a{i}")), formula);
            }
            assert_eq!(formula.size(), 2 * r - 1);
        }
        assert_eq!(Formula::and(p("p"), p("p")).size(), 2);
    }

    #[test]
    fn bin_count_counts_distinct_binary_nodes() {
        assert_eq!(p("p").bin_count(), 0);
        let shared = Formula::or(p("p"), p("q"));
        let twice = Formula::and(shared.clone(), shared);
        assert_eq!(twice.bin_count(), 2);
        let chain = Formula::or(p("a1"), Formula::or(p("a2"), p("a3")));
        assert_eq!(chain.bin_count(), 2);
    }

    #[test]
    fn props_are_collected() {
        assert_eq!(p("p").props(), ["p".to_string()].into());
        assert_eq!(Formula::not(p("b1")).props(), ["b1".to_string()].into());
        assert_eq!(p("a1").props(), ["a1".to_string()].into());
    }

    #[test]
    fn in_fragment_checks_operators_and_budget() {
        let f_only = FragmentSpec::unary_only([UnaryOp::Eventually]);
        assert!(Formula::eventually(p("p")).in_fragment(&f_only));
        assert!(!Formula::until(p("p"), p("q")).in_fragment(&f_only));
        let iff_only = FragmentSpec::new([], [], [BinLogicOp::Iff], Some(0));
        assert!(!Formula::logical(BinLogicOp::Iff, p("p"), p("q")).in_fragment(&iff_only));
    }

    #[test]
    fn translations_match_definitions() {
        assert_eq!(p("p").ltl_to_state(), p("p"));
        let fp = Formula::eventually(p("p"));
        let efp = Formula::temporal(Some(Coalition::solo(1)), TempUnOp::Eventually, p("p"));
        assert_eq!(fp.ltl_to_state(), efp);
        assert_eq!(fp.ltl_to_state().size(), fp.size());
        let puq = Formula::until(p("p"), p("q"));
        assert_eq!(
            puq.ltl_to_state(),
            Formula::temporal_binary(Some(Coalition::solo(1)), BinTempOp::Until, p("p"), p("q"))
        );
        assert_eq!(efp.state_to_ltl(), fp);
        assert_eq!(p("p").state_to_ltl(), p("p"));
    }

    #[test]
    fn state_to_ltl_may_shrink_size() {
        // E X p | A X p collapses to X p | X p once quantifiers are dropped.
        let ex = Formula::temporal(Some(Coalition::solo(1)), TempUnOp::Next, p("p"));
        let ax = Formula::temporal(Some(Coalition::empty()), TempUnOp::Next, p("p"));
        let both = Formula::or(ex, ax);
        assert_eq!(both.size(), 4);
        assert_eq!(both.state_to_ltl().size(), 3);
    }

    #[test]
    fn parse_examples_from_grammar() {
        assert_eq!(
            parse_formula("<1>F p").unwrap(),
            Formula::temporal(Some(Coalition::solo(1)), TempUnOp::Eventually, p("p"))
        );
        assert_eq!(
            parse_formula("A G p").unwrap(),
            Formula::temporal(Some(Coalition::empty()), TempUnOp::Globally, p("p"))
        );
        let parsed = parse_formula("(a1 | a2)").unwrap();
        assert_eq!(parsed, Formula::or(p("a1"), p("a2")));
        assert_eq!(parse_formula(&parsed.to_string()).unwrap(), parsed);
        assert_eq!(
            parse_formula("E(p U q)").unwrap(),
            Formula::temporal_binary(Some(Coalition::solo(1)), BinTempOp::Until, p("p"), p("q"))
        );
        assert_eq!(
            parse_formula("p !<-> q").unwrap(),
            Formula::logical(BinLogicOp::NotIff, p("p"), p("q"))
        );
    }

    #[test]
    fn binary_operators_are_right_associative() {
        let parsed = parse_formula("a | b & c").unwrap();
        assert_eq!(parsed, Formula::or(p("a"), Formula::and(p("b"), p("c"))));
    }

    #[test]
    fn parse_rejects_garbage_with_position() {
        let err = parse_formula("p |").unwrap_err();
        assert!(err.position >= 2);
        assert!(parse_formula("<0>F p").is_err());
        assert!(parse_formula("p ? q").is_err());
    }

    #[test]
    fn coalition_out_of_range_is_rejected() {
        assert!(parse_formula("<999>F p").is_err());
    }
}
