//! Model checking: LTL on lasso words, CTL on Kripke structures, ATL on
//! concurrent game structures, plus a strategy-enumeration oracle on small
//! turn-based structures for cross-validation.
//!
//! Temporal operators are solved by fixpoints over explicit position sets:
//! suffix classes for words, states for structures. `R`, `W` and `M` on words
//! follow the defining clauses (`R` as the dual of `U`, `W` as `U or G`, `M`
//! as `R and F`); on game structures they use the fixpoints derived from
//! `a R b = b W (a & b)` and `a M b = b U (a & b)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::formula::{BinTempOp, Coalition, Formula, TempUnOp};
use crate::models::{KripkeStructure, Model, TurnBasedStructure, UPWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("proposition `{0}` is not declared by the model")]
    UndeclaredProp(String),
    #[error("coalition mentions agent {agent} but the model has {agents} agent(s)")]
    CoalitionOutOfRange { agent: u8, agents: u8 },
    #[error("formula/model mismatch: {0}")]
    FormulaModelMismatch(String),
    #[error("oracle guard exceeded: {0}")]
    OracleGuard(String),
}

/// Undeclared propositions are an error in strict mode and false in lenient
/// mode. The reductions rely on exact proposition sets, so strict is the
/// default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropMode {
    #[default]
    Strict,
    Lenient,
}

/// Fixed-width bit set over evaluation positions (suffix classes or states).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Bits {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Bits {
        let mut b = Bits {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        b.mask_tail();
        b
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn intersect_with(&mut self, other: &Bits) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
    }

    pub fn invert(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.mask_tail();
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_vec(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// Memoized truth per subformula and evaluation position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatTable {
    /// Number of positions: suffix classes for words, states otherwise.
    pub positions: usize,
    pub rows: BTreeMap<Formula, Vec<bool>>,
}

impl SatTable {
    pub fn get(&self, formula: &Formula, position: usize) -> Option<bool> {
        self.rows.get(formula).map(|row| row[position])
    }
}

enum Kind<'m> {
    Word {
        word: &'m UPWord,
        /// Successor class of each 0-based class index.
        succ: Vec<usize>,
    },
    Kripke(&'m KripkeStructure),
    TurnBased(&'m TurnBasedStructure),
    Cgs {
        /// Per state: every `(profile, target)` pair of the delta table.
        moves: Vec<Vec<(Vec<u32>, usize)>>,
        agents: u8,
        labels: Vec<&'m crate::models::Letter>,
    },
}

/// Low-level evaluation surface shared by `eval_*`, the learners and the
/// self-test suites. Positions are 0-based internally.
pub struct ModelEval<'m> {
    model: &'m Model,
    kind: Kind<'m>,
    positions: usize,
    initial: Vec<usize>,
    agents: u8,
}

impl<'m> ModelEval<'m> {
    pub fn new(model: &'m Model) -> ModelEval<'m> {
        match model {
            Model::Word(w) => {
                let m = w.class_count();
                let succ = (1..=m).map(|c| w.class_successor(c) - 1).collect();
                ModelEval {
                    model,
                    kind: Kind::Word { word: w, succ },
                    positions: m,
                    initial: vec![0],
                    agents: 0,
                }
            }
            Model::Kripke(k) => ModelEval {
                model,
                kind: Kind::Kripke(k),
                positions: k.states.len(),
                initial: k.initial.clone(),
                agents: 1,
            },
            Model::TurnBased(t) => ModelEval {
                model,
                kind: Kind::TurnBased(t),
                positions: t.states.len(),
                initial: t.initial.clone(),
                agents: t.agents,
            },
            Model::Cgs(c) => {
                let mut moves = vec![Vec::new(); c.states.len()];
                for e in &c.delta {
                    moves[e.state].push((e.profile.clone(), e.to));
                }
                for m in &mut moves {
                    m.sort();
                }
                ModelEval {
                    model,
                    kind: Kind::Cgs {
                        moves,
                        agents: c.agents,
                        labels: c.states.iter().map(|s| &s.label).collect(),
                    },
                    positions: c.states.len(),
                    initial: c.initial.clone(),
                    agents: c.agents,
                }
            }
        }
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_word(&self) -> bool {
        matches!(self.kind, Kind::Word { .. })
    }

    pub fn prop_bits(&self, name: &str, mode: PropMode) -> Result<Bits, EvalError> {
        if !self.model.props().contains(name) {
            match mode {
                PropMode::Strict => return Err(EvalError::UndeclaredProp(name.to_string())),
                PropMode::Lenient => return Ok(Bits::zeros(self.positions)),
            }
        }
        let mut bits = Bits::zeros(self.positions);
        for i in 0..self.positions {
            let holds = match &self.kind {
                Kind::Word { word, .. } => word.class_letter(i + 1).contains(name),
                Kind::Kripke(k) => k.states[i].label.contains(name),
                Kind::TurnBased(t) => t.states[i].label.contains(name),
                Kind::Cgs { labels, .. } => labels[i].contains(name),
            };
            bits.set(i, holds);
        }
        Ok(bits)
    }

    fn check_coalition(&self, coalition: &Coalition) -> Result<(), EvalError> {
        let max = coalition.max_agent();
        if max > self.agents {
            return Err(EvalError::CoalitionOutOfRange {
                agent: max,
                agents: self.agents,
            });
        }
        Ok(())
    }

    /// Controllable predecessor: positions where coalition `a` has a joint
    /// action such that every completion lands in `z`. On turn-based
    /// structures this degenerates to an exists/forall split on the owner.
    pub fn cpre(&self, a: &Coalition, z: &Bits) -> Result<Bits, EvalError> {
        self.check_coalition(a)?;
        let mut out = Bits::zeros(self.positions);
        match &self.kind {
            Kind::Word { .. } => {
                return Err(EvalError::FormulaModelMismatch(
                    "coalition operators cannot be evaluated on words".to_string(),
                ))
            }
            Kind::Kripke(k) => {
                for (i, s) in k.states.iter().enumerate() {
                    let ok = if a.is_empty() {
                        s.succ.iter().all(|&q| z.get(q))
                    } else {
                        s.succ.iter().any(|&q| z.get(q))
                    };
                    out.set(i, ok);
                }
            }
            Kind::TurnBased(t) => {
                for (i, s) in t.states.iter().enumerate() {
                    let ok = if a.contains(s.owner) {
                        s.succ.iter().any(|&q| z.get(q))
                    } else {
                        s.succ.iter().all(|&q| z.get(q))
                    };
                    out.set(i, ok);
                }
            }
            Kind::Cgs { moves, agents, .. } => {
                let members: Vec<usize> =
                    (1..=*agents).filter(|x| a.contains(*x)).map(|x| (x - 1) as usize).collect();
                for (i, entries) in moves.iter().enumerate() {
                    // Group full profiles by their projection onto the
                    // coalition's agents; the coalition controls exactly that
                    // projection.
                    let mut groups: BTreeMap<Vec<u32>, bool> = BTreeMap::new();
                    for (profile, to) in entries {
                        let key: Vec<u32> = members.iter().map(|&m| profile[m]).collect();
                        let entry = groups.entry(key).or_insert(true);
                        *entry &= z.get(*to);
                    }
                    out.set(i, groups.values().any(|&all_in| all_in));
                }
            }
        }
        Ok(out)
    }

    fn word_next(&self, child: &Bits) -> Bits {
        let Kind::Word { succ, .. } = &self.kind else {
            unreachable!()
        };
        let mut out = Bits::zeros(self.positions);
        for (i, &s) in succ.iter().enumerate() {
            out.set(i, child.get(s));
        }
        out
    }

    fn word_until(&self, left: &Bits, right: &Bits) -> Bits {
        // mu Z. right | (left & X Z)
        let mut z = right.clone();
        loop {
            let mut step = self.word_next(&z);
            step.intersect_with(left);
            step.union_with(right);
            if step == z {
                return z;
            }
            z = step;
        }
    }

    fn word_eventually(&self, child: &Bits) -> Bits {
        self.word_until(&Bits::ones(self.positions), child)
    }

    fn word_globally(&self, child: &Bits) -> Bits {
        // nu Z. child & X Z
        let mut z = child.clone();
        loop {
            let mut step = self.word_next(&z);
            step.intersect_with(child);
            if step == z {
                return z;
            }
            z = step;
        }
    }

    pub fn apply_temporal_unary(
        &self,
        coalition: Option<&Coalition>,
        op: TempUnOp,
        child: &Bits,
    ) -> Result<Bits, EvalError> {
        match (coalition, self.is_word()) {
            (None, true) => Ok(match op {
                TempUnOp::Next => self.word_next(child),
                TempUnOp::Eventually => self.word_eventually(child),
                TempUnOp::Globally => self.word_globally(child),
            }),
            (Some(a), false) => match op {
                TempUnOp::Next => self.cpre(a, child),
                TempUnOp::Eventually => {
                    // mu Z. child | Cpre(Z)
                    let mut z = child.clone();
                    loop {
                        let mut step = self.cpre(a, &z)?;
                        step.union_with(child);
                        if step == z {
                            return Ok(z);
                        }
                        z = step;
                    }
                }
                TempUnOp::Globally => {
                    // nu Z. child & Cpre(Z)
                    let mut z = child.clone();
                    loop {
                        let mut step = self.cpre(a, &z)?;
                        step.intersect_with(child);
                        if step == z {
                            return Ok(z);
                        }
                        z = step;
                    }
                }
            },
            (None, false) => Err(EvalError::FormulaModelMismatch(
                "temporal operator without coalition evaluated on a structure".to_string(),
            )),
            (Some(_), true) => Err(EvalError::FormulaModelMismatch(
                "coalition operator evaluated on a word".to_string(),
            )),
        }
    }

    pub fn apply_temporal_binary(
        &self,
        coalition: Option<&Coalition>,
        op: BinTempOp,
        left: &Bits,
        right: &Bits,
    ) -> Result<Bits, EvalError> {
        match (coalition, self.is_word()) {
            (None, true) => Ok(match op {
                BinTempOp::Until => self.word_until(left, right),
                BinTempOp::Release => {
                    // not (not left U not right)
                    let mut nl = left.clone();
                    nl.invert();
                    let mut nr = right.clone();
                    nr.invert();
                    let mut out = self.word_until(&nl, &nr);
                    out.invert();
                    out
                }
                BinTempOp::WeakUntil => {
                    // (left U right) | G left
                    let mut out = self.word_until(left, right);
                    out.union_with(&self.word_globally(left));
                    out
                }
                BinTempOp::MightyRelease => {
                    // (left R right) & F left
                    let mut out =
                        self.apply_temporal_binary(None, BinTempOp::Release, left, right)?;
                    out.intersect_with(&self.word_eventually(left));
                    out
                }
            }),
            (Some(a), false) => match op {
                BinTempOp::Until => {
                    // mu Z. right | (left & Cpre(Z))
                    let mut z = right.clone();
                    loop {
                        let mut step = self.cpre(a, &z)?;
                        step.intersect_with(left);
                        step.union_with(right);
                        if step == z {
                            return Ok(z);
                        }
                        z = step;
                    }
                }
                BinTempOp::Release => {
                    // nu Z. right & (left | Cpre(Z))
                    let mut z = right.clone();
                    loop {
                        let mut step = self.cpre(a, &z)?;
                        step.union_with(left);
                        step.intersect_with(right);
                        if step == z {
                            return Ok(z);
                        }
                        z = step;
                    }
                }
                BinTempOp::WeakUntil => {
                    // nu Z. right | (left & Cpre(Z))
                    let mut z = Bits::ones(self.positions);
                    loop {
                        let mut step = self.cpre(a, &z)?;
                        step.intersect_with(left);
                        step.union_with(right);
                        if step == z {
                            return Ok(z);
                        }
                        z = step;
                    }
                }
                BinTempOp::MightyRelease => {
                    // a M b = b U (a & b): mu Z. (left & right) | (right & Cpre(Z))
                    let mut both = left.clone();
                    both.intersect_with(right);
                    let mut z = both.clone();
                    loop {
                        let mut step = self.cpre(a, &z)?;
                        step.intersect_with(right);
                        step.union_with(&both);
                        if step == z {
                            return Ok(z);
                        }
                        z = step;
                    }
                }
            },
            (None, false) => Err(EvalError::FormulaModelMismatch(
                "temporal operator without coalition evaluated on a structure".to_string(),
            )),
            (Some(_), true) => Err(EvalError::FormulaModelMismatch(
                "coalition operator evaluated on a word".to_string(),
            )),
        }
    }

    /// Truth of `formula` at every position, memoized per subformula.
    pub fn eval_bits(&self, formula: &Formula, mode: PropMode) -> Result<Bits, EvalError> {
        let mut memo = BTreeMap::new();
        self.eval_memo(formula, mode, &mut memo)
    }

    fn eval_memo(
        &self,
        formula: &Formula,
        mode: PropMode,
        memo: &mut BTreeMap<Formula, Bits>,
    ) -> Result<Bits, EvalError> {
        if let Some(bits) = memo.get(formula) {
            return Ok(bits.clone());
        }
        let bits = match formula {
            Formula::Prop(p) => self.prop_bits(p, mode)?,
            Formula::Not(c) => {
                let mut bits = self.eval_memo(c, mode, memo)?;
                bits.invert();
                bits
            }
            Formula::TemporalUnary {
                coalition,
                op,
                child,
            } => {
                let child = self.eval_memo(child, mode, memo)?;
                self.apply_temporal_unary(coalition.as_ref(), *op, &child)?
            }
            Formula::LogicalBinary { op, left, right } => {
                let l = self.eval_memo(left, mode, memo)?;
                let r = self.eval_memo(right, mode, memo)?;
                let mut bits = Bits::zeros(self.positions);
                for i in 0..self.positions {
                    bits.set(i, op.apply(l.get(i), r.get(i)));
                }
                bits
            }
            Formula::TemporalBinary {
                coalition,
                op,
                left,
                right,
            } => {
                let l = self.eval_memo(left, mode, memo)?;
                let r = self.eval_memo(right, mode, memo)?;
                self.apply_temporal_binary(coalition.as_ref(), *op, &l, &r)?
            }
        };
        memo.insert(formula.clone(), bits.clone());
        Ok(bits)
    }

    /// The model accepts when every initial position satisfies the formula
    /// (for words: the suffix at position 1).
    pub fn accepted(&self, bits: &Bits) -> bool {
        self.initial.iter().all(|&q| bits.get(q))
    }
}

/// Truth of `w |= formula` for a coalition-free formula.
pub fn eval_ltl(formula: &Formula, word: &UPWord) -> Result<bool, EvalError> {
    eval_ltl_with(formula, word, PropMode::Strict)
}

pub fn eval_ltl_with(
    formula: &Formula,
    word: &UPWord,
    mode: PropMode,
) -> Result<bool, EvalError> {
    if !formula.is_ltl() {
        return Err(EvalError::FormulaModelMismatch(
            "formula carries coalitions but the model is a word".to_string(),
        ));
    }
    let model = Model::Word(word.clone());
    let eval = ModelEval::new(&model);
    let bits = eval.eval_bits(formula, mode)?;
    Ok(eval.accepted(&bits))
}

/// Truth of `q |= formula` on a structure.
pub fn eval_state(formula: &Formula, model: &Model, state: usize) -> Result<bool, EvalError> {
    eval_state_with(formula, model, state, PropMode::Strict)
}

pub fn eval_state_with(
    formula: &Formula,
    model: &Model,
    state: usize,
    mode: PropMode,
) -> Result<bool, EvalError> {
    let eval = ModelEval::new(model);
    let bits = eval.eval_bits(formula, mode)?;
    Ok(bits.get(state))
}

/// Truth of `model |= formula`: every initial state (for words: the word
/// itself) satisfies the formula.
pub fn eval_model(formula: &Formula, model: &Model) -> Result<bool, EvalError> {
    eval_model_with(formula, model, PropMode::Strict)
}

pub fn eval_model_with(
    formula: &Formula,
    model: &Model,
    mode: PropMode,
) -> Result<bool, EvalError> {
    match model {
        Model::Word(_) => {
            if !formula.is_ltl() {
                return Err(EvalError::FormulaModelMismatch(
                    "formula carries coalitions but the model is a word".to_string(),
                ));
            }
        }
        _ => {
            if !formula.is_state_formula() {
                return Err(EvalError::FormulaModelMismatch(
                    "formula has coalition-free temporal operators but the model is a structure"
                        .to_string(),
                ));
            }
        }
    }
    let eval = ModelEval::new(model);
    let bits = eval.eval_bits(formula, mode)?;
    Ok(eval.accepted(&bits))
}

/// Controllable predecessor of a state set, exposed for experimentation.
pub fn cpre(model: &Model, coalition: &Coalition, z: &Bits) -> Result<Bits, EvalError> {
    ModelEval::new(model).cpre(coalition, z)
}

/// Full memoized truth table of a formula on a model.
pub fn sat_table(formula: &Formula, model: &Model) -> Result<SatTable, EvalError> {
    let eval = ModelEval::new(model);
    let mut memo = BTreeMap::new();
    eval.eval_memo(formula, PropMode::Strict, &mut memo)?;
    Ok(SatTable {
        positions: eval.positions(),
        rows: memo.into_iter().map(|(f, b)| (f, b.to_vec())).collect(),
    })
}

const ORACLE_MAX_STATES: usize = 8;
const ORACLE_MAX_STRATEGIES: u64 = 1_000_000;

/// Independent oracle for ATL on small turn-based structures: at every
/// strategic node, enumerate the coalition's memoryless strategies and check
/// the path condition on the fixed subgraph by explicit graph search.
/// Memoryless strategies suffice because turn-based reachability/safety
/// games are positionally determined.
pub fn oracle_eval_turn_based(
    formula: &Formula,
    t: &TurnBasedStructure,
    state: usize,
) -> Result<bool, EvalError> {
    if t.states.len() > ORACLE_MAX_STATES {
        return Err(EvalError::OracleGuard(format!(
            "structure has {} states, oracle allows at most {ORACLE_MAX_STATES}",
            t.states.len()
        )));
    }
    let row = oracle_row(formula, t)?;
    Ok(row[state])
}

fn oracle_row(formula: &Formula, t: &TurnBasedStructure) -> Result<Vec<bool>, EvalError> {
    let n = t.states.len();
    match formula {
        Formula::Prop(p) => {
            if !t.props.contains(p) {
                return Err(EvalError::UndeclaredProp(p.clone()));
            }
            Ok(t.states.iter().map(|s| s.label.contains(p)).collect())
        }
        Formula::Not(c) => Ok(oracle_row(c, t)?.into_iter().map(|b| !b).collect()),
        Formula::LogicalBinary { op, left, right } => {
            let l = oracle_row(left, t)?;
            let r = oracle_row(right, t)?;
            Ok((0..n).map(|i| op.apply(l[i], r[i])).collect())
        }
        Formula::TemporalUnary {
            coalition: Some(a),
            op,
            child,
        } => {
            let child = oracle_row(child, t)?;
            let check = move |graph: &SubGraph, q: usize| match op {
                TempUnOp::Next => graph.succ(q).iter().all(|&s| child[s]),
                TempUnOp::Eventually => graph.all_paths_reach(q, &child),
                TempUnOp::Globally => graph.all_reachable_satisfy(q, &child),
            };
            oracle_strategic(t, a, check)
        }
        Formula::TemporalBinary {
            coalition: Some(a),
            op,
            left,
            right,
        } => {
            let l = oracle_row(left, t)?;
            let r = oracle_row(right, t)?;
            let n_states = n;
            let check = move |graph: &SubGraph, q: usize| {
                match op {
                    // all paths: stay in `l` until an `r` position, which must come
                    BinTempOp::Until => graph.all_paths_until(q, &l, &r, true),
                    // r R l... careful with operand order: a R b = b W (a & b)
                    BinTempOp::Release => {
                        let both: Vec<bool> = (0..n_states).map(|i| l[i] && r[i]).collect();
                        graph.all_paths_until(q, &r, &both, false)
                    }
                    BinTempOp::WeakUntil => graph.all_paths_until(q, &l, &r, false),
                    BinTempOp::MightyRelease => {
                        let both: Vec<bool> = (0..n_states).map(|i| l[i] && r[i]).collect();
                        graph.all_paths_until(q, &r, &both, true)
                    }
                }
            };
            oracle_strategic(t, a, check)
        }
        Formula::TemporalUnary { coalition: None, .. }
        | Formula::TemporalBinary { coalition: None, .. } => Err(EvalError::FormulaModelMismatch(
            "oracle evaluates state formulas only".to_string(),
        )),
    }
}

/// Successor lists after fixing a memoryless strategy for the coalition.
struct SubGraph {
    succ: Vec<Vec<usize>>,
}

impl SubGraph {
    fn succ(&self, q: usize) -> &[usize] {
        &self.succ[q]
    }

    fn reachable(&self, q: usize, traversable: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut seen = vec![false; self.succ.len()];
        let mut stack = vec![q];
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            out.push(s);
            if traversable(s) {
                for &next in &self.succ[s] {
                    stack.push(next);
                }
            }
        }
        out
    }

    /// Every path from `q` satisfies `G target`.
    fn all_reachable_satisfy(&self, q: usize, target: &[bool]) -> bool {
        self.reachable(q, |_| true).into_iter().all(|s| target[s])
    }

    /// Every path from `q` satisfies `F target`: no lasso can stay inside
    /// the complement of `target`.
    fn all_paths_reach(&self, q: usize, target: &[bool]) -> bool {
        if target[q] {
            return true;
        }
        let region: Vec<usize> = self
            .reachable(q, |s| !target[s])
            .into_iter()
            .filter(|&s| !target[s])
            .collect();
        !self.has_cycle_within(&region)
    }

    /// Every path from `q` satisfies `hold U goal` (`must_reach` true) or
    /// `hold W goal` (`must_reach` false): walking through non-`goal`
    /// positions, `hold` may never fail, and for the strong form no lasso may
    /// avoid `goal` forever.
    fn all_paths_until(&self, q: usize, hold: &[bool], goal: &[bool], must_reach: bool) -> bool {
        let region: Vec<usize> = self
            .reachable(q, |s| !goal[s])
            .into_iter()
            .filter(|&s| !goal[s])
            .collect();
        if region.iter().any(|&s| !hold[s]) {
            return false;
        }
        if must_reach && self.has_cycle_within(&region) {
            return false;
        }
        true
    }

    fn has_cycle_within(&self, region: &[usize]) -> bool {
        // Kahn-style elimination: repeatedly drop region states with no
        // surviving region successor; anything left lies on a cycle.
        let mut alive = vec![false; self.succ.len()];
        for &s in region {
            alive[s] = true;
        }
        loop {
            let mut changed = false;
            for &s in region {
                if alive[s] && !self.succ[s].iter().any(|&n| alive[n]) {
                    alive[s] = false;
                    changed = true;
                }
            }
            if !changed {
                return region.iter().any(|&s| alive[s]);
            }
        }
    }
}

fn oracle_strategic(
    t: &TurnBasedStructure,
    coalition: &Coalition,
    check: impl Fn(&SubGraph, usize) -> bool,
) -> Result<Vec<bool>, EvalError> {
    let max = coalition.max_agent();
    if max > t.agents {
        return Err(EvalError::CoalitionOutOfRange {
            agent: max,
            agents: t.agents,
        });
    }
    let owned: Vec<usize> = t
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| coalition.contains(s.owner))
        .map(|(i, _)| i)
        .collect();
    let mut total: u64 = 1;
    for &q in &owned {
        total = total.saturating_mul(t.states[q].succ.len() as u64);
        if total > ORACLE_MAX_STRATEGIES {
            return Err(EvalError::OracleGuard(format!(
                "more than {ORACLE_MAX_STRATEGIES} memoryless strategies"
            )));
        }
    }
    let n = t.states.len();
    let mut result = vec![false; n];
    let mut choice = vec![0usize; owned.len()];
    loop {
        let succ: Vec<Vec<usize>> = t
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| match owned.iter().position(|&o| o == i) {
                Some(slot) => vec![s.succ[choice[slot]]],
                None => s.succ.clone(),
            })
            .collect();
        let graph = SubGraph { succ };
        for q in 0..n {
            if !result[q] && check(&graph, q) {
                result[q] = true;
            }
        }
        // advance the mixed-radix strategy counter
        let mut slot = 0;
        loop {
            if slot == owned.len() {
                return Ok(result);
            }
            choice[slot] += 1;
            if choice[slot] < t.states[owned[slot]].succ.len() {
                break;
            }
            choice[slot] = 0;
            slot += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Formula};
    use crate::models::{letter, trivial_structure, TbState};

    fn word(props: &[&str], u: Vec<crate::models::Letter>, v: Vec<crate::models::Letter>) -> UPWord {
        UPWord::new(props.iter().map(|p| p.to_string()), u, v)
    }

    #[test]
    fn prop_on_constant_word() {
        let w = word(&["p"], vec![], vec![letter(&["p"])]);
        assert!(eval_ltl(&Formula::prop("p"), &w).unwrap());
    }

    #[test]
    fn strict_mode_rejects_undeclared_props() {
        let w = word(&["p"], vec![], vec![letter(&["p"])]);
        let q = Formula::prop("q");
        assert!(matches!(
            eval_ltl(&q, &w),
            Err(EvalError::UndeclaredProp(_))
        ));
        assert!(!eval_ltl_with(&q, &w, PropMode::Lenient).unwrap());
    }

    #[test]
    fn until_on_lasso_word() {
        // w = {p} {p} . ({q})^omega: p U q holds, q U p does not.
        let w = word(
            &["p", "q"],
            vec![letter(&["p"]), letter(&["p"])],
            vec![letter(&["q"])],
        );
        assert!(eval_ltl(&parse_formula("p U q").unwrap(), &w).unwrap());
        // The right operand never holds on ({q})^omega, so U fails there.
        let only_q = word(&["p", "q"], vec![], vec![letter(&["q"])]);
        assert!(!eval_ltl(&parse_formula("q U p").unwrap(), &only_q).unwrap());
        assert!(eval_ltl(&parse_formula("F q").unwrap(), &w).unwrap());
        assert!(!eval_ltl(&parse_formula("G p").unwrap(), &w).unwrap());
        assert!(eval_ltl(&parse_formula("X X G q").unwrap(), &w).unwrap());
    }

    #[test]
    fn release_weak_mighty_follow_their_clauses() {
        // w = ({q}) ({p,q}) . ({p})^omega
        let w = word(
            &["p", "q"],
            vec![letter(&["q"]), letter(&["p", "q"])],
            vec![letter(&["p"])],
        );
        // p R q: q must hold until (and including when) p joins.
        assert!(eval_ltl(&parse_formula("p R q").unwrap(), &w).unwrap());
        // q W p and q U p agree here since p eventually holds.
        assert!(eval_ltl(&parse_formula("q W p").unwrap(), &w).unwrap());
        assert!(eval_ltl(&parse_formula("q U p").unwrap(), &w).unwrap());
        // p M q needs p & q at the release point.
        assert!(eval_ltl(&parse_formula("p M q").unwrap(), &w).unwrap());
        let never_p = word(&["p", "q"], vec![], vec![letter(&["q"])]);
        assert!(eval_ltl(&parse_formula("p R q").unwrap(), &never_p).unwrap());
        assert!(!eval_ltl(&parse_formula("p M q").unwrap(), &never_p).unwrap());
        assert!(eval_ltl(&parse_formula("q W p").unwrap(), &never_p).unwrap());
    }

    #[test]
    fn trivial_game_satisfies_coalition_eventually() {
        let t = trivial_structure(letter(&["p"]), 2);
        let m = Model::TurnBased(t);
        let f = parse_formula("<1>F p").unwrap();
        assert!(eval_state(&f, &m, 0).unwrap());
        assert!(eval_model(&parse_formula("p").unwrap(), &m).unwrap());
    }

    #[test]
    fn two_state_choice_gadget() {
        // Agent 1 owns the initial pbar state and can move to the p sink.
        let t = TurnBasedStructure {
            props: letter(&["p", "pbar"]).into_iter().collect(),
            agents: 2,
            initial: vec![0],
            states: vec![
                TbState {
                    name: None,
                    label: letter(&["pbar"]),
                    owner: 1,
                    succ: vec![0, 1],
                },
                TbState {
                    name: None,
                    label: letter(&["p"]),
                    owner: 1,
                    succ: vec![1],
                },
            ],
        };
        let m = Model::TurnBased(t);
        assert!(eval_state(&parse_formula("<1>F p").unwrap(), &m, 0).unwrap());
        assert!(!eval_state(&parse_formula("<2>F p").unwrap(), &m, 0).unwrap());
        // Agent 1 owns the state, so coalition {2} cannot pin it to pbar.
        assert!(!eval_state(&parse_formula("<2>G pbar").unwrap(), &m, 0).unwrap());
    }

    #[test]
    fn coalition_out_of_range_is_reported() {
        let t = trivial_structure(letter(&["p"]), 1);
        let m = Model::TurnBased(t);
        let f = parse_formula("<2>F p").unwrap();
        assert!(matches!(
            eval_state(&f, &m, 0),
            Err(EvalError::CoalitionOutOfRange { .. })
        ));
    }

    #[test]
    fn oracle_agrees_on_choice_gadget() {
        let t = TurnBasedStructure {
            props: letter(&["p", "pbar"]).into_iter().collect(),
            agents: 2,
            initial: vec![0],
            states: vec![
                TbState {
                    name: None,
                    label: letter(&["pbar"]),
                    owner: 1,
                    succ: vec![0, 1],
                },
                TbState {
                    name: None,
                    label: letter(&["p"]),
                    owner: 2,
                    succ: vec![1],
                },
            ],
        };
        let f = parse_formula("<1>F p").unwrap();
        assert!(oracle_eval_turn_based(&f, &t, 0).unwrap());
        let g = parse_formula("<2>F p").unwrap();
        assert!(!oracle_eval_turn_based(&g, &t, 0).unwrap());
        let m = Model::TurnBased(t.clone());
        assert_eq!(
            oracle_eval_turn_based(&f, &t, 0).unwrap(),
            eval_state(&f, &m, 0).unwrap()
        );
    }

    #[test]
    fn oracle_guard_rejects_large_structures() {
        let mut states = Vec::new();
        for i in 0..9 {
            states.push(TbState {
                name: None,
                label: letter(&["p"]),
                owner: 1,
                succ: vec![i],
            });
        }
        let t = TurnBasedStructure {
            props: letter(&["p"]).into_iter().collect(),
            agents: 1,
            initial: vec![0],
            states,
        };
        assert!(matches!(
            oracle_eval_turn_based(&parse_formula("E F p").unwrap(), &t, 0),
            Err(EvalError::OracleGuard(_))
        ));
    }

    #[test]
    fn sat_table_covers_every_subformula() {
        let w = word(&["p"], vec![letter(&[])], vec![letter(&["p"])]);
        let f = parse_formula("F p").unwrap();
        let table = sat_table(&f, &Model::Word(w)).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.get(&f, 0), Some(true));
    }
}
