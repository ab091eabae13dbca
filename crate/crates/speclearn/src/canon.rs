//! Prefix rewrite systems and the bounded template enumerations behind the
//! specialized learners: canonical unary-operator sequences for LTL, the
//! negation-removal map for turn-based ATL, quantifier dominance for CTL,
//! and the alternation families and sketches for two-agent ATL.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{BinLogicOp, Coalition, Formula, TempUnOp, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("sequence contains a coalition operator where an LTL operator was expected")]
    NotLtl,
    #[error("sequence contains an LTL operator where a coalition operator was expected")]
    NotState,
}

/// One operator of a unary prefix: negation, or a (possibly quantified)
/// temporal operator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrefixOp {
    Not,
    Temporal {
        coalition: Option<Coalition>,
        op: TempUnOp,
    },
}

impl PrefixOp {
    pub fn ltl(op: TempUnOp) -> PrefixOp {
        PrefixOp::Temporal {
            coalition: None,
            op,
        }
    }

    pub fn quantified(coalition: Coalition, op: TempUnOp) -> PrefixOp {
        PrefixOp::Temporal {
            coalition: Some(coalition),
            op,
        }
    }

    /// Dual operator over agents `1..=k`: complement the coalition, dualize
    /// the temporal operator.
    pub fn dual(&self, k: u8) -> PrefixOp {
        match self {
            PrefixOp::Not => PrefixOp::Not,
            PrefixOp::Temporal { coalition, op } => PrefixOp::Temporal {
                coalition: coalition.as_ref().map(|c| c.complement(k)),
                op: op.dual(),
            },
        }
    }
}

/// A sequence of prefix operators, applied left to right (leftmost is the
/// outermost operator of the resulting formula).
pub type OpSequence = Vec<PrefixOp>;

pub fn apply_sequence(seq: &[PrefixOp], body: Formula) -> Formula {
    let mut out = body;
    for op in seq.iter().rev() {
        out = match op {
            PrefixOp::Not => Formula::not(out),
            PrefixOp::Temporal { coalition, op } => Formula::temporal(coalition.clone(), *op, out),
        };
    }
    out
}

/// Split a formula into its longest unary prefix and the remaining body.
pub fn split_prefix(formula: &Formula) -> (OpSequence, Formula) {
    let mut seq = Vec::new();
    let mut cur = formula;
    loop {
        match cur {
            Formula::Not(c) => {
                seq.push(PrefixOp::Not);
                cur = c;
            }
            Formula::TemporalUnary {
                coalition,
                op,
                child,
            } => {
                seq.push(PrefixOp::Temporal {
                    coalition: coalition.clone(),
                    op: *op,
                });
                cur = child;
            }
            _ => return (seq, cur.clone()),
        }
    }
}

pub fn display_sequence(seq: &[PrefixOp]) -> String {
    if seq.is_empty() {
        return "<empty>".to_string();
    }
    seq.iter()
        .map(|op| match op {
            PrefixOp::Not => "!".to_string(),
            PrefixOp::Temporal {
                coalition: None,
                op,
            } => op.symbol().to_string(),
            PrefixOp::Temporal {
                coalition: Some(c),
                op,
            } => {
                let prefix = if c.is_empty() {
                    "A".to_string()
                } else if c.0.len() == 1 && c.contains(1) {
                    "E".to_string()
                } else {
                    c.to_string()
                };
                format!("{prefix}{}", op.symbol())
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn fg_blocks(unary: &BTreeSet<UnaryOp>) -> Vec<OpSequence> {
    use TempUnOp::{Eventually as F, Globally as G};
    let not = PrefixOp::Not;
    let f = PrefixOp::ltl(F);
    let g = PrefixOp::ltl(G);
    let has_f = unary.contains(&UnaryOp::Eventually);
    let has_g = unary.contains(&UnaryOp::Globally);
    let has_not = unary.contains(&UnaryOp::Not);
    let mut blocks: Vec<OpSequence> = vec![vec![]];
    if has_f && has_g {
        blocks.push(vec![f.clone()]);
        blocks.push(vec![g.clone()]);
        blocks.push(vec![f.clone(), g.clone()]);
        blocks.push(vec![g, f]);
    } else if has_f && has_not {
        // Single-operator case table, extended with the leading-negation
        // block `! F`: the class of `! F phi` has no equal-length
        // representative otherwise.
        blocks.push(vec![f.clone()]);
        blocks.push(vec![not.clone(), f.clone()]);
        blocks.push(vec![not.clone(), f.clone(), not.clone()]);
        blocks.push(vec![f.clone(), not.clone(), f.clone()]);
        blocks.push(vec![not.clone(), f.clone(), not, f]);
    } else if has_g && has_not {
        blocks.push(vec![g.clone()]);
        blocks.push(vec![not.clone(), g.clone()]);
        blocks.push(vec![not.clone(), g.clone(), not.clone()]);
        blocks.push(vec![g.clone(), not.clone(), g.clone()]);
        blocks.push(vec![not.clone(), g.clone(), not, g]);
    } else if has_f {
        blocks.push(vec![f]);
    } else if has_g {
        blocks.push(vec![g]);
    }
    blocks
}

/// `SeqQt_LTL(U)`: every canonical prefix `X-block . FG-block . not-block`
/// of length at most `max_len`. The number of sequences grows linearly with
/// `max_len`.
pub fn seqqt_ltl(unary: &BTreeSet<UnaryOp>, max_len: usize) -> Vec<OpSequence> {
    let has_x = unary.contains(&UnaryOp::Next);
    let has_not = unary.contains(&UnaryOp::Not);
    let mut tails: Vec<OpSequence> = Vec::new();
    for block in fg_blocks(unary) {
        tails.push(block.clone());
        if has_not {
            let mut with_not = block;
            with_not.push(PrefixOp::Not);
            tails.push(with_not);
        }
    }
    let mut out: BTreeSet<OpSequence> = BTreeSet::new();
    for tail in tails {
        if tail.len() > max_len {
            continue;
        }
        let max_x = if has_x { max_len - tail.len() } else { 0 };
        for k in 0..=max_x {
            let mut seq = vec![PrefixOp::ltl(TempUnOp::Next); k];
            seq.extend(tail.iter().cloned());
            out.insert(seq);
        }
    }
    let mut out: Vec<OpSequence> = out.into_iter().collect();
    out.sort_by(|a, b| (a.len(), display_sequence(a)).cmp(&(b.len(), display_sequence(b))));
    out
}

/// Semantic class of an LTL unary prefix: `X^k . w . !^b` with `w` a reduced
/// word over `{F, G}`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct LtlPrefixClass {
    x_count: usize,
    word: Vec<TempUnOp>,
    negated: bool,
}

fn ltl_prefix_class(seq: &[PrefixOp]) -> Result<LtlPrefixClass, CanonError> {
    let mut x_count = 0usize;
    let mut word = Vec::new();
    let mut parity = false;
    for op in seq {
        match op {
            PrefixOp::Not => parity = !parity,
            PrefixOp::Temporal {
                coalition: Some(_), ..
            } => return Err(CanonError::NotLtl),
            PrefixOp::Temporal {
                coalition: None,
                op,
            } => match op {
                // X commutes with everything: F X = X F, G X = X G, ! X = X !.
                TempUnOp::Next => x_count += 1,
                TempUnOp::Eventually => {
                    word.push(if parity {
                        TempUnOp::Globally
                    } else {
                        TempUnOp::Eventually
                    });
                }
                TempUnOp::Globally => {
                    word.push(if parity {
                        TempUnOp::Eventually
                    } else {
                        TempUnOp::Globally
                    });
                }
            },
        }
    }
    Ok(LtlPrefixClass {
        x_count,
        word: reduce_fg_word(word),
        negated: parity,
    })
}

/// Reduce a word over `{F, G}` by `FF = F`, `GG = G`, `FGF = GF`, `GFG = FG`
/// to one of `e, F, G, FG, GF`.
fn reduce_fg_word(mut word: Vec<TempUnOp>) -> Vec<TempUnOp> {
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < word.len() {
            if word[i] == word[i + 1] {
                word.remove(i + 1);
                changed = true;
            } else {
                i += 1;
            }
        }
        if word.len() >= 3 {
            // strictly alternating at this point: drop the head window
            word.remove(0);
            changed = true;
        }
        if !changed {
            return word;
        }
    }
}

/// Canonical representative of `Qt` within `SeqQt_LTL(U)`: an equivalent
/// sequence (for every body formula) that is never longer than `Qt`.
pub fn ltl_canonicalize_prefix(
    seq: &[PrefixOp],
    unary: &BTreeSet<UnaryOp>,
) -> Result<OpSequence, CanonError> {
    let class = ltl_prefix_class(seq)?;
    let has_f = unary.contains(&UnaryOp::Eventually);
    let has_g = unary.contains(&UnaryOp::Globally);
    let mut out = vec![PrefixOp::ltl(TempUnOp::Next); class.x_count];
    if (has_f && has_g) || class.word.is_empty() {
        for op in &class.word {
            out.push(PrefixOp::ltl(*op));
        }
        if class.negated {
            out.push(PrefixOp::Not);
        }
    } else {
        // Single-operator fragment: express the dual through negations,
        // keeping the alternating minimal form.
        let base = if has_f {
            TempUnOp::Eventually
        } else {
            TempUnOp::Globally
        };
        let mut parity = false;
        for op in &class.word {
            let want = *op != base;
            if parity != want {
                out.push(PrefixOp::Not);
                parity = want;
            }
            out.push(PrefixOp::ltl(base));
        }
        if parity != class.negated {
            out.push(PrefixOp::Not);
        }
    }
    Ok(out)
}

/// `UnNeg`: remove negations from a sequence of quantified operators over
/// agents `1..=k`, flipping operators to their duals under odd negation
/// depth. Returns the negation-free sequence and the residual bit to apply
/// to the body. Never lengthens the sequence.
pub fn unneg(seq: &[PrefixOp], x: bool, k: u8) -> Result<(OpSequence, bool), CanonError> {
    match seq.split_first() {
        None => Ok((Vec::new(), x)),
        Some((PrefixOp::Not, rest)) => unneg(rest, !x, k),
        Some((op @ PrefixOp::Temporal { coalition, .. }, rest)) => {
            if coalition.is_none() {
                return Err(CanonError::NotState);
            }
            let (mut tail, out_x) = unneg(rest, x, k)?;
            let head = if x { op.dual(k) } else { op.clone() };
            let mut out = vec![head];
            out.append(&mut tail);
            Ok((out, out_x))
        }
    }
}

/// CTL path quantifier: `Exists` is coalition `{1}`, `Forall` the empty
/// coalition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn coalition(self) -> Coalition {
        match self {
            Quantifier::Exists => Coalition::solo(1),
            Quantifier::Forall => Coalition::empty(),
        }
    }
}

/// Dominating quantifier for stacked `F` operators: existential wins.
pub fn dom_f(q1: Quantifier, q2: Quantifier) -> Quantifier {
    if q1 == Quantifier::Exists || q2 == Quantifier::Exists {
        Quantifier::Exists
    } else {
        Quantifier::Forall
    }
}

/// Dominating quantifier for stacked `G` operators: universal wins.
pub fn dom_g(q1: Quantifier, q2: Quantifier) -> Quantifier {
    if q1 == Quantifier::Forall || q2 == Quantifier::Forall {
        Quantifier::Forall
    } else {
        Quantifier::Exists
    }
}

type PairOp = (Quantifier, TempUnOp);

fn dom_for(op: TempUnOp, q1: Quantifier, q2: Quantifier) -> Quantifier {
    match op {
        TempUnOp::Eventually => dom_f(q1, q2),
        TempUnOp::Globally => dom_g(q1, q2),
        TempUnOp::Next => unreachable!("dominance applies to F and G only"),
    }
}

/// True when some rewrite rule shortens the word: adjacent same-operator
/// collapse, the four-window dominance law, or the `EF .. AG` / `AG .. EF`
/// absorption.
fn ctl_word_reducible(word: &[PairOp]) -> bool {
    use Quantifier::{Exists, Forall};
    use TempUnOp::{Eventually as F, Globally as G};
    for i in 0..word.len() {
        if i + 1 < word.len() && word[i].1 == word[i + 1].1 {
            return true;
        }
        if i + 3 < word.len() {
            let (q1, h1) = word[i];
            let (q2, h2) = word[i + 1];
            let (q3, h3) = word[i + 2];
            let (q4, h4) = word[i + 3];
            // Q1 H Q2 H' Q3 H Q4 H' collapses to Q1 H Q4 H' when Q1
            // dominates for H and Q4 dominates for H'.
            if h1 == h3 && h2 == h4 && h1 != h2 && dom_for(h1, q1, q3) == q1 && dom_for(h2, q2, q4) == q4
            {
                return true;
            }
        }
        for j in i + 2..word.len() {
            if word[i] == (Exists, F) && word[j] == (Forall, G) {
                return true;
            }
            if word[i] == (Forall, G) && word[j] == (Exists, F) {
                return true;
            }
        }
    }
    false
}

/// Reduce a `{E,A} x {F,G}` word by the dominance laws, applying the first
/// applicable rule from the left until none fires.
pub(crate) fn ctl_reduce_word(mut word: Vec<PairOp>) -> Vec<PairOp> {
    use Quantifier::{Exists, Forall};
    use TempUnOp::{Eventually as F, Globally as G};
    'outer: loop {
        for i in 0..word.len() {
            if i + 1 < word.len() && word[i].1 == word[i + 1].1 {
                let merged = (dom_for(word[i].1, word[i].0, word[i + 1].0), word[i].1);
                word.splice(i..i + 2, [merged]);
                continue 'outer;
            }
        }
        for i in 0..word.len() {
            for j in i + 2..word.len() {
                let absorb = (word[i] == (Exists, F) && word[j] == (Forall, G))
                    || (word[i] == (Forall, G) && word[j] == (Exists, F));
                if absorb {
                    word.drain(i + 1..j);
                    continue 'outer;
                }
            }
        }
        for i in 0..word.len().saturating_sub(3) {
            let (q1, h1) = word[i];
            let (q2, h2) = word[i + 1];
            let (q3, h3) = word[i + 2];
            let (q4, h4) = word[i + 3];
            if h1 == h3
                && h2 == h4
                && h1 != h2
                && dom_for(h1, q1, q3) == q1
                && dom_for(h2, q2, q4) == q4
            {
                word.splice(i..i + 4, [(q1, h1), (q4, h4)]);
                continue 'outer;
            }
        }
        return word;
    }
}

/// Semantic class of a CTL-no-X prefix: the reduced quantifier word plus the
/// residual parity next to the body (negations pushed inward through the
/// quantifier duals).
pub(crate) fn ctl_prefix_class(
    seq: &[PrefixOp],
) -> Result<(Vec<(Quantifier, TempUnOp)>, bool), CanonError> {
    let mut parity = false;
    let mut word = Vec::new();
    for op in seq {
        match op {
            PrefixOp::Not => parity = !parity,
            PrefixOp::Temporal {
                coalition: Some(c),
                op,
            } => {
                if *op == TempUnOp::Next {
                    return Err(CanonError::NotLtl);
                }
                let q = if c.is_empty() {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let (q, op) = if parity {
                    let q = match q {
                        Quantifier::Exists => Quantifier::Forall,
                        Quantifier::Forall => Quantifier::Exists,
                    };
                    (q, op.dual())
                } else {
                    (q, *op)
                };
                word.push((q, op));
            }
            PrefixOp::Temporal {
                coalition: None, ..
            } => return Err(CanonError::NotState),
        }
    }
    Ok((ctl_reduce_word(word), parity))
}

/// The finite complete prefix set for CTL without `X`: every irreducible
/// `{E,A} x {F,G}` word of length at most 8, with an optional leading and
/// trailing negation. Every CTL-no-X unary prefix is equivalent to a member.
pub fn ctl_nox_prefixes() -> Vec<OpSequence> {
    use Quantifier::{Exists, Forall};
    use TempUnOp::{Eventually as F, Globally as G};
    let ops: [PairOp; 4] = [(Exists, F), (Forall, F), (Exists, G), (Forall, G)];
    let mut words: Vec<Vec<PairOp>> = vec![vec![]];
    let mut frontier: Vec<Vec<PairOp>> = vec![vec![]];
    for _ in 0..8 {
        let mut next = Vec::new();
        for w in &frontier {
            for op in ops {
                let mut extended = w.clone();
                extended.push(op);
                if !ctl_word_reducible(&extended) {
                    next.push(extended);
                }
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let mut out = Vec::new();
    for w in words {
        let core: OpSequence = w
            .iter()
            .map(|(q, h)| PrefixOp::quantified(q.coalition(), *h))
            .collect();
        for leading in [false, true] {
            for trailing in [false, true] {
                let mut seq = Vec::new();
                if leading {
                    seq.push(PrefixOp::Not);
                }
                seq.extend(core.iter().cloned());
                if trailing {
                    seq.push(PrefixOp::Not);
                }
                out.push(seq);
            }
        }
    }
    out.sort_by(|a, b| (a.len(), display_sequence(a)).cmp(&(b.len(), display_sequence(b))));
    out.dedup();
    out
}

/// `Quant_Alt^H` for two agents: the empty sequence, the grand and empty
/// coalitions once, and every alternation of `<1>H` and `<2>H`, truncated at
/// `max_len`. Member count grows linearly with `max_len`.
pub fn atl2_quant_alt(op: TempUnOp, max_len: usize) -> Vec<OpSequence> {
    let one = PrefixOp::quantified(Coalition::solo(1), op);
    let two = PrefixOp::quantified(Coalition::solo(2), op);
    let mut out: Vec<OpSequence> = vec![vec![]];
    if max_len >= 1 {
        out.push(vec![PrefixOp::quantified(Coalition::empty(), op)]);
        out.push(vec![PrefixOp::quantified(Coalition::of(&[1, 2]), op)]);
        for start in [one.clone(), two.clone()] {
            let mut seq = vec![start];
            while seq.len() <= max_len {
                out.push(seq.clone());
                let next = if *seq.last().unwrap() == one {
                    two.clone()
                } else {
                    one.clone()
                };
                seq.push(next);
            }
        }
    }
    out.sort_by(|a, b| (a.len(), display_sequence(a)).cmp(&(b.len(), display_sequence(b))));
    out.dedup();
    out
}

/// A formula template whose leaves are unfilled proposition holes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Sketch {
    pub prefix: OpSequence,
    pub body: SketchBody,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SketchBody {
    Hole,
    Binary {
        op: BinLogicOp,
        left: Box<Sketch>,
        right: Box<Sketch>,
    },
}

impl Sketch {
    pub fn hole(prefix: OpSequence) -> Sketch {
        Sketch {
            prefix,
            body: SketchBody::Hole,
        }
    }

    pub fn holes(&self) -> usize {
        match &self.body {
            SketchBody::Hole => 1,
            SketchBody::Binary { left, right, .. } => left.holes() + right.holes(),
        }
    }

    pub fn bin_nodes(&self) -> usize {
        match &self.body {
            SketchBody::Hole => 0,
            SketchBody::Binary { left, right, .. } => 1 + left.bin_nodes() + right.bin_nodes(),
        }
    }

    /// Fill the holes left to right with the given proposition names.
    pub fn instantiate(&self, props: &[&str]) -> Formula {
        let mut idx = 0;
        let formula = self.instantiate_at(props, &mut idx);
        assert_eq!(idx, props.len(), "proposition count must equal hole count");
        formula
    }

    fn instantiate_at(&self, props: &[&str], idx: &mut usize) -> Formula {
        let body = match &self.body {
            SketchBody::Hole => {
                let p = props[*idx];
                *idx += 1;
                Formula::prop(p)
            }
            SketchBody::Binary { op, left, right } => {
                let l = left.instantiate_at(props, idx);
                let r = right.instantiate_at(props, idx);
                Formula::logical(*op, l, r)
            }
        };
        apply_sequence(&self.prefix, body)
    }

    /// Smallest size over instantiations: filling every hole with the same
    /// proposition maximizes subformula sharing.
    pub fn min_size(&self) -> usize {
        let props = vec!["p"; self.holes()];
        self.instantiate(&props).size()
    }
}

impl std::fmt::Display for Sketch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if !self.prefix.is_empty() {
            write!(f, "{} ", display_sequence(&self.prefix))?;
        }
        match &self.body {
            SketchBody::Hole => write!(f, "?"),
            SketchBody::Binary { op, left, right } => {
                write!(f, "({left} {} {right})", op.symbol())
            }
        }
    }
}

/// `Rel^{ATL(2)}(B^l, H, n, B)`: sketches built from `Quant_Alt^H` prefixes
/// with at most `n` binary nodes, keeping only those instantiable within
/// size `B`.
pub fn atl2_sketches(
    bin_logic: &BTreeSet<BinLogicOp>,
    op: TempUnOp,
    n: u32,
    bound: u32,
) -> Vec<Sketch> {
    let max_prefix = bound.saturating_sub(1) as usize;
    let prefixes = atl2_quant_alt(op, max_prefix);
    let mut by_budget: Vec<Vec<Sketch>> = Vec::new();
    let level0: Vec<Sketch> = prefixes
        .iter()
        .map(|qt| Sketch::hole(qt.clone()))
        .filter(|s| s.min_size() <= bound as usize)
        .collect();
    by_budget.push(level0);
    for budget in 1..=n {
        let mut level = Vec::new();
        for left_budget in 0..budget {
            let right_budget = budget - 1 - left_budget;
            for left in &by_budget[left_budget as usize] {
                for right in &by_budget[right_budget as usize] {
                    for &op_l in bin_logic {
                        for qt in &prefixes {
                            let sketch = Sketch {
                                prefix: qt.clone(),
                                body: SketchBody::Binary {
                                    op: op_l,
                                    left: Box::new(left.clone()),
                                    right: Box::new(right.clone()),
                                },
                            };
                            if sketch.min_size() <= bound as usize {
                                level.push(sketch);
                            }
                        }
                    }
                }
            }
        }
        by_budget.push(level);
    }
    let mut out: Vec<Sketch> = by_budget.into_iter().flatten().collect();
    out.sort_by(|a, b| {
        (a.min_size(), a.to_string()).cmp(&(b.min_size(), b.to_string()))
    });
    out.dedup();
    out
}

/// `LTL_Unif` formulas over the given propositions: canonical prefixes from
/// `SeqQt_LTL` between binary logical operators, with size at most `bound`
/// and at most `budget` binary nodes. Deterministically ordered by size.
pub fn ltl_unif_enumerate(
    props: &BTreeSet<String>,
    unary: &BTreeSet<UnaryOp>,
    bin_logic: &BTreeSet<BinLogicOp>,
    budget: u32,
    bound: u32,
) -> Vec<Formula> {
    let prefixes = seqqt_ltl(unary, bound.saturating_sub(1) as usize);
    let mut by_budget: Vec<Vec<Formula>> = Vec::new();
    let mut level0 = Vec::new();
    for qt in &prefixes {
        for p in props {
            let f = apply_sequence(qt, Formula::prop(p.clone()));
            if f.size() <= bound as usize {
                level0.push(f);
            }
        }
    }
    by_budget.push(level0);
    for level in 1..=budget {
        let mut formulas = Vec::new();
        for left_budget in 0..level {
            let right_budget = level - 1 - left_budget;
            for left in &by_budget[left_budget as usize] {
                for right in &by_budget[right_budget as usize] {
                    for &op in bin_logic {
                        let combined = Formula::logical(op, left.clone(), right.clone());
                        if combined.size() > bound as usize {
                            continue;
                        }
                        for qt in &prefixes {
                            let f = apply_sequence(qt, combined.clone());
                            if f.size() <= bound as usize && f.bin_count() <= budget as usize {
                                formulas.push(f);
                            }
                        }
                    }
                }
            }
        }
        by_budget.push(formulas);
    }
    let set: BTreeSet<Formula> = by_budget.into_iter().flatten().collect();
    let mut out: Vec<Formula> = set.into_iter().collect();
    out.sort_by(|a, b| (a.size(), a.clone()).cmp(&(b.size(), b.clone())));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> PrefixOp {
        PrefixOp::ltl(TempUnOp::Eventually)
    }

    fn g() -> PrefixOp {
        PrefixOp::ltl(TempUnOp::Globally)
    }

    fn x() -> PrefixOp {
        PrefixOp::ltl(TempUnOp::Next)
    }

    fn ops(list: &[UnaryOp]) -> BTreeSet<UnaryOp> {
        list.iter().copied().collect()
    }

    #[test]
    fn seqqt_for_f_and_g_contains_the_case_table() {
        let set = seqqt_ltl(&ops(&[UnaryOp::Eventually, UnaryOp::Globally]), 2);
        let expect: Vec<OpSequence> = vec![
            vec![],
            vec![f()],
            vec![g()],
            vec![f(), g()],
            vec![g(), f()],
        ];
        for e in &expect {
            assert!(set.contains(e), "missing {}", display_sequence(e));
        }
    }

    #[test]
    fn seqqt_for_f_without_not_is_just_f() {
        let set = seqqt_ltl(&ops(&[UnaryOp::Eventually]), 3);
        assert_eq!(set, vec![vec![], vec![f()]]);
    }

    #[test]
    fn seqqt_count_is_linear_in_length() {
        let all = ops(&[
            UnaryOp::Not,
            UnaryOp::Next,
            UnaryOp::Eventually,
            UnaryOp::Globally,
        ]);
        let counts: Vec<usize> = (4..10).map(|l| seqqt_ltl(&all, l).len()).collect();
        let deltas: Vec<usize> = counts.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(deltas.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
    }

    #[test]
    fn canonicalize_ff_and_fgf() {
        let u = ops(&[UnaryOp::Eventually, UnaryOp::Globally]);
        assert_eq!(ltl_canonicalize_prefix(&[f(), f()], &u).unwrap(), vec![f()]);
        assert_eq!(
            ltl_canonicalize_prefix(&[f(), g(), f()], &u).unwrap(),
            vec![g(), f()]
        );
    }

    #[test]
    fn canonicalize_moves_x_outward() {
        let u = ops(&[UnaryOp::Next, UnaryOp::Eventually]);
        assert_eq!(
            ltl_canonicalize_prefix(&[f(), x(), x()], &u).unwrap(),
            vec![x(), x(), f()]
        );
    }

    #[test]
    fn canonicalize_single_op_fragment_uses_negations() {
        let u = ops(&[UnaryOp::Not, UnaryOp::Eventually]);
        // !F! (the G class) is already minimal.
        assert_eq!(
            ltl_canonicalize_prefix(&[PrefixOp::Not, f(), PrefixOp::Not], &u).unwrap(),
            vec![PrefixOp::Not, f(), PrefixOp::Not]
        );
        // !F stays two operators long.
        assert_eq!(
            ltl_canonicalize_prefix(&[PrefixOp::Not, f()], &u).unwrap(),
            vec![PrefixOp::Not, f()]
        );
        // !!FF collapses to F.
        assert_eq!(
            ltl_canonicalize_prefix(&[PrefixOp::Not, PrefixOp::Not, f(), f()], &u).unwrap(),
            vec![f()]
        );
    }

    #[test]
    fn unneg_matches_the_hand_trace() {
        let seq = vec![
            PrefixOp::Not,
            PrefixOp::quantified(Coalition::solo(1), TempUnOp::Eventually),
            PrefixOp::Not,
        ];
        let (out, residual) = unneg(&seq, false, 2).unwrap();
        assert_eq!(
            out,
            vec![PrefixOp::quantified(Coalition::solo(2), TempUnOp::Globally)]
        );
        assert!(!residual);
        assert_eq!(unneg(&[], false, 2).unwrap(), (vec![], false));
    }

    #[test]
    fn dual_of_1f_with_three_agents() {
        let op = PrefixOp::quantified(Coalition::solo(1), TempUnOp::Eventually);
        assert_eq!(
            op.dual(3),
            PrefixOp::quantified(Coalition::of(&[2, 3]), TempUnOp::Globally)
        );
    }

    #[test]
    fn dominance_tables() {
        use Quantifier::{Exists, Forall};
        assert_eq!(dom_f(Exists, Forall), Exists);
        assert_eq!(dom_g(Exists, Forall), Forall);
        assert_eq!(dom_f(Forall, Forall), Forall);
        assert_eq!(dom_g(Exists, Exists), Exists);
    }

    #[test]
    fn ctl_prefixes_contain_ef_ag_but_not_ef_ef() {
        let prefixes = ctl_nox_prefixes();
        let ef_ag = vec![
            PrefixOp::quantified(Coalition::solo(1), TempUnOp::Eventually),
            PrefixOp::quantified(Coalition::empty(), TempUnOp::Globally),
        ];
        assert!(prefixes.contains(&ef_ag));
        let ef_ef = vec![
            PrefixOp::quantified(Coalition::solo(1), TempUnOp::Eventually),
            PrefixOp::quantified(Coalition::solo(1), TempUnOp::Eventually),
        ];
        assert!(!prefixes.contains(&ef_ef));
        assert!(prefixes.iter().all(|s| s.len() <= 10));
    }

    #[test]
    fn quant_alt_members_alternate() {
        let members = atl2_quant_alt(TempUnOp::Eventually, 3);
        let one_two_one = vec![
            PrefixOp::quantified(Coalition::solo(1), TempUnOp::Eventually),
            PrefixOp::quantified(Coalition::solo(2), TempUnOp::Eventually),
            PrefixOp::quantified(Coalition::solo(1), TempUnOp::Eventually),
        ];
        assert!(members.contains(&one_two_one));
        let counts: Vec<usize> = (1..7)
            .map(|l| atl2_quant_alt(TempUnOp::Eventually, l).len())
            .collect();
        let deltas: Vec<usize> = counts.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(deltas.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
    }

    #[test]
    fn atl2_sketches_at_budget_zero() {
        let sketches = atl2_sketches(&BTreeSet::new(), TempUnOp::Eventually, 0, 2);
        let rendered: Vec<String> = sketches.iter().map(|s| s.to_string()).collect();
        assert_eq!(rendered.len(), 5);
        assert!(rendered.contains(&"?".to_string()));
        assert!(rendered.contains(&"AF ?".to_string()));
        assert!(rendered.contains(&"EF ?".to_string()));
        assert!(rendered.contains(&"<2>F ?".to_string()));
        assert!(rendered.contains(&"<1,2>F ?".to_string()));
    }

    #[test]
    fn atl2_sketches_with_or_contain_the_disjunction() {
        let sketches = atl2_sketches(&[BinLogicOp::Or].into(), TempUnOp::Eventually, 1, 3);
        assert!(sketches.iter().any(|s| s.to_string() == "(? | ?)"));
    }

    #[test]
    fn ltl_unif_smallest_cases() {
        let props: BTreeSet<String> = ["p".to_string()].into();
        let formulas = ltl_unif_enumerate(
            &props,
            &ops(&[UnaryOp::Eventually]),
            &BTreeSet::new(),
            0,
            2,
        );
        let rendered: Vec<String> = formulas.iter().map(|f| f.to_string()).collect();
        assert_eq!(rendered, vec!["p", "F p"]);
    }
}
