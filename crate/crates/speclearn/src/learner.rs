//! Deciding learning instances: does a formula of the fragment, of size at
//! most `B`, accept every positive model and reject every negative one?
//!
//! `learn_generic` is the exhaustive guess-and-check decision procedure; the
//! `learn_ltl_unary`, `learn_ctl_no_x` and `learn_atl2_single` learners run
//! the polynomial template enumerations and agree with it on their domains.

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{
    self, apply_sequence, atl2_sketches, ltl_unif_enumerate, OpSequence, PrefixOp, Quantifier,
};
use crate::checker::{self, Bits, EvalError, ModelEval, PropMode};
use crate::formula::{BinLogicOp, BinTempOp, Coalition, Formula, FragmentSpec, TempUnOp, UnaryOp};
use crate::models::Model;

/// Which logic an instance lives in; fixes the model class and the coalition
/// universe of candidate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Logic {
    Ltl,
    Ctl,
    Atl(u8),
}

impl Logic {
    pub fn agents(&self) -> u8 {
        match self {
            Logic::Ltl => 0,
            Logic::Ctl => 1,
            Logic::Atl(k) => *k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("invalid learning instance: {0}")]
    InvalidInstance(String),
    #[error("fragment violation: {0}")]
    FragmentViolation(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A learning instance: proposition set, positive and negative models, size
/// bound and operator fragment. The bound is a plain integer here; the
/// complexity claims around these problems presume it written in unary
/// (i.e. small).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningInstance {
    pub logic: Logic,
    pub props: BTreeSet<String>,
    pub positives: Vec<Model>,
    pub negatives: Vec<Model>,
    pub bound: u32,
    pub fragment: FragmentSpec,
}

impl LearningInstance {
    pub fn models(&self) -> impl Iterator<Item = &Model> {
        self.positives.iter().chain(self.negatives.iter())
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        if self.bound == 0 {
            return Err(LearnError::InvalidInstance(
                "size bound must be at least 1".to_string(),
            ));
        }
        if let Logic::Atl(0) = self.logic {
            return Err(LearnError::InvalidInstance(
                "ATL needs at least one agent".to_string(),
            ));
        }
        for model in self.models() {
            let kind_ok = match (self.logic, model) {
                (Logic::Ltl, Model::Word(_)) => true,
                (Logic::Ctl, Model::Kripke(_)) => true,
                (Logic::Ctl, Model::TurnBased(t)) => t.agents == 1,
                (Logic::Ctl, Model::Cgs(c)) => c.agents == 1,
                (Logic::Atl(k), Model::TurnBased(t)) => t.agents == k,
                (Logic::Atl(k), Model::Cgs(c)) => c.agents == k,
                (Logic::Atl(k), Model::Kripke(_)) => k == 1,
                _ => false,
            };
            if !kind_ok {
                return Err(LearnError::InvalidInstance(format!(
                    "{:?} instance cannot hold a {} model",
                    self.logic,
                    model.kind()
                )));
            }
            if model.props() != &self.props {
                return Err(LearnError::InvalidInstance(
                    "model proposition set differs from the instance's".to_string(),
                ));
            }
            if let Err(violations) = model.validate() {
                return Err(LearnError::InvalidInstance(violations.join("; ")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    Negative,
    /// The candidate cap was hit before a conclusion; never a wrong answer.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnStats {
    pub candidates: u64,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnResult {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Formula>,
    pub stats: LearnStats,
}

impl LearnResult {
    fn conclude(verdict: Verdict, witness: Option<Formula>, candidates: u64, start: Instant) -> LearnResult {
        LearnResult {
            verdict,
            witness,
            stats: LearnStats {
                candidates,
                elapsed_ms: start.elapsed().as_millis(),
            },
        }
    }
}

/// Does `formula` accept every positive model and reject every negative one?
pub fn separates(formula: &Formula, instance: &LearningInstance) -> Result<bool, LearnError> {
    for model in &instance.positives {
        if !checker::eval_model(formula, model)? {
            return Ok(false);
        }
    }
    for model in &instance.negatives {
        if checker::eval_model(formula, model)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy)]
pub struct LearnOptions {
    /// Explicit inconclusive verdict once this many candidates were examined.
    pub candidate_cap: u64,
}

impl Default for LearnOptions {
    fn default() -> LearnOptions {
        LearnOptions {
            candidate_cap: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum UnCand {
    Not,
    Temporal(Option<Coalition>, TempUnOp),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum BinCand {
    Logic(BinLogicOp),
    Temporal(Option<Coalition>, BinTempOp),
}

fn coalition_universe(logic: Logic) -> Vec<Option<Coalition>> {
    match logic {
        Logic::Ltl => vec![None],
        Logic::Ctl => Coalition::all(1).into_iter().map(Some).collect(),
        Logic::Atl(k) => Coalition::all(k).into_iter().map(Some).collect(),
    }
}

/// Candidate operator order: `!` first, then temporal operators `X < F < G`
/// with coalitions ascending, then logical binaries in declaration order,
/// then binary temporal operators. Together with ascending size and sorted
/// propositions this fixes the enumeration order, so witnesses are
/// reproducible.
fn fragment_universe(instance: &LearningInstance) -> (Vec<UnCand>, Vec<BinCand>) {
    let coalitions = coalition_universe(instance.logic);
    let mut unary = Vec::new();
    if instance.fragment.allows_not() {
        unary.push(UnCand::Not);
    }
    for op in instance.fragment.temporal_unary_ops() {
        for c in &coalitions {
            unary.push(UnCand::Temporal(c.clone(), op));
        }
    }
    let mut binary = Vec::new();
    for op in &instance.fragment.bin_logic {
        binary.push(BinCand::Logic(*op));
    }
    for op in &instance.fragment.bin_temp {
        for c in &coalitions {
            binary.push(BinCand::Temporal(c.clone(), *op));
        }
    }
    (unary, binary)
}

struct Engine<'a> {
    instance: &'a LearningInstance,
    evals: Vec<ModelEval<'a>>,
    n_pos: usize,
}

type Signature = Vec<Bits>;

struct Entry {
    formula: Formula,
    sig: Signature,
}

impl<'a> Engine<'a> {
    fn new(instance: &'a LearningInstance) -> Engine<'a> {
        let evals = instance.models().map(ModelEval::new).collect();
        Engine {
            instance,
            evals,
            n_pos: instance.positives.len(),
        }
    }

    fn prop_sig(&self, name: &str) -> Result<Signature, LearnError> {
        self.evals
            .iter()
            .map(|e| e.prop_bits(name, PropMode::Strict).map_err(LearnError::from))
            .collect()
    }

    fn apply_unary(&self, op: &UnCand, child: &Signature) -> Result<Signature, LearnError> {
        let mut out = Vec::with_capacity(child.len());
        for (eval, bits) in self.evals.iter().zip(child) {
            out.push(match op {
                UnCand::Not => {
                    let mut b = bits.clone();
                    b.invert();
                    b
                }
                UnCand::Temporal(c, op) => eval.apply_temporal_unary(c.as_ref(), *op, bits)?,
            });
        }
        Ok(out)
    }

    fn apply_binary(
        &self,
        op: &BinCand,
        left: &Signature,
        right: &Signature,
    ) -> Result<Signature, LearnError> {
        let mut out = Vec::with_capacity(left.len());
        for ((eval, l), r) in self.evals.iter().zip(left).zip(right) {
            out.push(match op {
                BinCand::Logic(op) => {
                    let mut bits = Bits::zeros(l.len());
                    for i in 0..l.len() {
                        bits.set(i, op.apply(l.get(i), r.get(i)));
                    }
                    bits
                }
                BinCand::Temporal(c, op) => eval.apply_temporal_binary(c.as_ref(), *op, l, r)?,
            });
        }
        Ok(out)
    }

    fn is_separator(&self, sig: &Signature) -> bool {
        self.evals
            .iter()
            .zip(sig)
            .enumerate()
            .all(|(i, (eval, bits))| eval.accepted(bits) == (i < self.n_pos))
    }
}

fn assert_sound(result: &LearnResult, instance: &LearningInstance) {
    if result.verdict == Verdict::Positive {
        let witness = result.witness.as_ref().expect("positive result carries a witness");
        assert!(
            witness.size() <= instance.bound as usize,
            "witness exceeds the size bound"
        );
        assert!(
            witness.in_fragment(&instance.fragment),
            "witness leaves the fragment"
        );
        assert!(
            separates(witness, instance).unwrap_or(false),
            "witness does not separate the sample"
        );
    }
}

/// Exhaustive bottom-up enumeration of fragment formulas by tree size, with
/// observational dedup: two candidates with identical truth signatures
/// across all models (and the same binary-use count, when a budget applies)
/// are interchangeable, so only the first in enumeration order is kept.
/// Witnesses requiring proper subformula sharing to fit the bound are not
/// enumerated; every reduction witness in this crate is sharing-free.
pub fn learn_generic(instance: &LearningInstance) -> Result<LearnResult, LearnError> {
    learn_generic_with(instance, LearnOptions::default())
}

pub fn learn_generic_with(
    instance: &LearningInstance,
    options: LearnOptions,
) -> Result<LearnResult, LearnError> {
    let start = Instant::now();
    instance.validate()?;
    let (unary, binary) = fragment_universe(instance);
    let result = run_engine(instance, &unary, &binary, options, start)?;
    assert_sound(&result, instance);
    Ok(result)
}

fn run_engine(
    instance: &LearningInstance,
    unary: &[UnCand],
    binary: &[BinCand],
    options: LearnOptions,
    start: Instant,
) -> Result<LearnResult, LearnError> {
    let engine = Engine::new(instance);
    let bound = instance.bound as usize;
    let budget = instance.fragment.bin_budget;
    let mut pools: Vec<Vec<Entry>> = vec![Vec::new()];
    let mut seen: HashSet<(Signature, u32)> = HashSet::new();
    let mut candidates: u64 = 0;

    enum Step {
        Found(Formula),
        CapHit,
        Continue,
    }

    for size in 1..=bound {
        let mut level: Vec<Entry> = Vec::new();
        let mut outcome = Step::Continue;
        {
            let mut consider = |formula: Formula, sig: Signature, level: &mut Vec<Entry>| -> Step {
                candidates += 1;
                let bin = formula.bin_count() as u32;
                let within_budget = budget.map(|n| bin <= n).unwrap_or(true);
                if within_budget {
                    let key = (sig.clone(), if budget.is_some() { bin } else { 0 });
                    if seen.insert(key) {
                        if engine.is_separator(&sig) {
                            return Step::Found(formula);
                        }
                        level.push(Entry { formula, sig });
                    }
                }
                if candidates >= options.candidate_cap {
                    Step::CapHit
                } else {
                    Step::Continue
                }
            };

            'level: {
                if size == 1 {
                    for p in &instance.props {
                        let sig = engine.prop_sig(p)?;
                        match consider(Formula::prop(p.clone()), sig, &mut level) {
                            Step::Continue => {}
                            other => {
                                outcome = other;
                                break 'level;
                            }
                        }
                    }
                }
                for op in unary {
                    for child in &pools[size - 1] {
                        let sig = engine.apply_unary(op, &child.sig)?;
                        let formula = match op {
                            UnCand::Not => Formula::not(child.formula.clone()),
                            UnCand::Temporal(c, t) => {
                                Formula::temporal(c.clone(), *t, child.formula.clone())
                            }
                        };
                        match consider(formula, sig, &mut level) {
                            Step::Continue => {}
                            other => {
                                outcome = other;
                                break 'level;
                            }
                        }
                    }
                }
                for op in binary {
                    for left_size in 1..size.saturating_sub(1) {
                        let right_size = size - 1 - left_size;
                        for left in &pools[left_size] {
                            for right in &pools[right_size] {
                                let sig = engine.apply_binary(op, &left.sig, &right.sig)?;
                                let formula = match op {
                                    BinCand::Logic(o) => Formula::logical(
                                        *o,
                                        left.formula.clone(),
                                        right.formula.clone(),
                                    ),
                                    BinCand::Temporal(c, o) => Formula::temporal_binary(
                                        c.clone(),
                                        *o,
                                        left.formula.clone(),
                                        right.formula.clone(),
                                    ),
                                };
                                match consider(formula, sig, &mut level) {
                                    Step::Continue => {}
                                    other => {
                                        outcome = other;
                                        break 'level;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        match outcome {
            Step::Found(witness) => {
                return Ok(LearnResult::conclude(
                    Verdict::Positive,
                    Some(witness),
                    candidates,
                    start,
                ))
            }
            Step::CapHit => {
                return Ok(LearnResult::conclude(
                    Verdict::Inconclusive,
                    None,
                    candidates,
                    start,
                ))
            }
            Step::Continue => {}
        }
        pools.push(level);
    }
    Ok(LearnResult::conclude(
        Verdict::Negative,
        None,
        candidates,
        start,
    ))
}

/// Check a fixed list of candidate formulas in order.
fn scan_candidates(
    instance: &LearningInstance,
    candidates: impl IntoIterator<Item = Formula>,
    options: LearnOptions,
    start: Instant,
) -> Result<LearnResult, LearnError> {
    let engine = Engine::new(instance);
    let mut examined: u64 = 0;
    let mut memo: std::collections::BTreeMap<Formula, Bits> = Default::default();
    let _ = &mut memo;
    for formula in candidates {
        examined += 1;
        if examined > options.candidate_cap {
            return Ok(LearnResult::conclude(
                Verdict::Inconclusive,
                None,
                examined,
                start,
            ));
        }
        let mut sig = Vec::with_capacity(engine.evals.len());
        for eval in &engine.evals {
            sig.push(eval.eval_bits(&formula, PropMode::Strict)?);
        }
        if engine.is_separator(&sig) {
            return Ok(LearnResult::conclude(
                Verdict::Positive,
                Some(formula),
                examined,
                start,
            ));
        }
    }
    Ok(LearnResult::conclude(
        Verdict::Negative,
        None,
        examined,
        start,
    ))
}

/// LTL learning without binary temporal operators: enumerate the polynomial
/// `LTL_Unif` candidate set (canonical prefixes between binary logical
/// operators). Equivalent in verdict to `learn_generic` on this domain.
pub fn learn_ltl_unary(instance: &LearningInstance) -> Result<LearnResult, LearnError> {
    let start = Instant::now();
    instance.validate()?;
    if instance.logic != Logic::Ltl {
        return Err(LearnError::FragmentViolation(
            "learn_ltl_unary expects an LTL instance".to_string(),
        ));
    }
    if !instance.fragment.bin_temp.is_empty() {
        return Err(LearnError::FragmentViolation(
            "learn_ltl_unary does not handle binary temporal operators".to_string(),
        ));
    }
    let Some(budget) = instance.fragment.bin_budget else {
        return Err(LearnError::FragmentViolation(
            "learn_ltl_unary needs a finite binary budget".to_string(),
        ));
    };
    let candidates = ltl_unif_enumerate(
        &instance.props,
        &instance.fragment.unary,
        &instance.fragment.bin_logic,
        budget,
        instance.bound,
    );
    let result = scan_candidates(instance, candidates, LearnOptions::default(), start)?;
    assert_sound(&result, instance);
    Ok(result)
}

/// Bound `B_n` for CTL-no-X formulas with at most `n` binary operators:
/// prefixes collapse to at most 8 quantifier blocks plus two negations, and
/// the per-budget bound follows the recursion `B_{n+1} = 2 B_n + B + 1`.
fn ctl_no_x_bound(n: u32) -> u64 {
    const BLOCK: u64 = 10;
    let mut b: u64 = BLOCK + 1;
    for _ in 0..n {
        b = b.saturating_mul(2).saturating_add(BLOCK + 1);
    }
    b
}

/// Enumerate canonical CTL-no-X prefixes over the given operators, one
/// representative per semantic class, breadth-first by length. The class
/// space is finite, so this terminates on its own.
fn ctl_prefix_reps(universe: &[PrefixOp], max_len: usize) -> Vec<OpSequence> {
    let mut seen: BTreeSet<(Vec<(Quantifier, TempUnOp)>, bool)> = BTreeSet::new();
    let mut all: Vec<OpSequence> = Vec::new();
    let mut frontier: Vec<OpSequence> = vec![vec![]];
    seen.insert(canon::ctl_prefix_class(&[]).expect("empty prefix"));
    all.push(vec![]);
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            for op in universe {
                let mut extended = seq.clone();
                extended.push(op.clone());
                let key = canon::ctl_prefix_class(&extended).expect("universe is X-free");
                if seen.insert(key) {
                    all.push(extended.clone());
                    next.push(extended);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    all
}

/// CTL learning without the next operator: bounded-template enumeration over
/// canonical `{E,A} x {F,G}` prefixes. Equivalent in verdict to
/// `learn_generic` on this domain.
pub fn learn_ctl_no_x(instance: &LearningInstance) -> Result<LearnResult, LearnError> {
    let start = Instant::now();
    instance.validate()?;
    if instance.logic != Logic::Ctl {
        return Err(LearnError::FragmentViolation(
            "learn_ctl_no_x expects a CTL instance".to_string(),
        ));
    }
    if instance.fragment.unary.contains(&UnaryOp::Next) {
        return Err(LearnError::FragmentViolation(
            "learn_ctl_no_x does not handle the next operator".to_string(),
        ));
    }
    if !instance.fragment.bin_temp.is_empty() {
        return Err(LearnError::FragmentViolation(
            "learn_ctl_no_x does not handle binary temporal operators".to_string(),
        ));
    }
    let Some(budget) = instance.fragment.bin_budget else {
        return Err(LearnError::FragmentViolation(
            "learn_ctl_no_x needs a finite binary budget".to_string(),
        ));
    };
    let bound = (instance.bound as u64).min(ctl_no_x_bound(budget)) as u32;

    let mut universe = Vec::new();
    if instance.fragment.allows_not() {
        universe.push(PrefixOp::Not);
    }
    for op in instance.fragment.temporal_unary_ops() {
        for q in [Quantifier::Exists, Quantifier::Forall] {
            universe.push(PrefixOp::quantified(q.coalition(), op));
        }
    }
    let prefixes = ctl_prefix_reps(&universe, bound.saturating_sub(1) as usize);

    // Same recursion as the LTL_Unif set, with quantified prefixes.
    let mut by_budget: Vec<Vec<Formula>> = Vec::new();
    let mut level0 = Vec::new();
    for qt in &prefixes {
        for p in &instance.props {
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
                    for &op in &instance.fragment.bin_logic {
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
    let mut candidates: Vec<Formula> = set.into_iter().collect();
    candidates.sort_by(|a, b| (a.size(), a.clone()).cmp(&(b.size(), b.clone())));

    let result = scan_candidates(instance, candidates, LearnOptions::default(), start)?;
    assert_sound(&result, instance);
    Ok(result)
}

/// Two-agent ATL learning with a single temporal operator (`F` or `G`) and
/// no negation: loop over the `Rel^{ATL(2)}` sketches, instantiate every
/// hole with every proposition, and check separation. Polynomially many
/// candidates for a fixed binary budget.
pub fn learn_atl2_single(
    instance: &LearningInstance,
    op: TempUnOp,
) -> Result<LearnResult, LearnError> {
    let start = Instant::now();
    instance.validate()?;
    if instance.logic != Logic::Atl(2) {
        return Err(LearnError::FragmentViolation(
            "learn_atl2_single expects a two-agent ATL instance".to_string(),
        ));
    }
    if instance.fragment.temporal_unary_ops() != vec![op] || instance.fragment.allows_not() {
        return Err(LearnError::FragmentViolation(format!(
            "fragment must allow exactly the operator {}",
            op.symbol()
        )));
    }
    if !instance.fragment.bin_temp.is_empty() {
        return Err(LearnError::FragmentViolation(
            "learn_atl2_single does not handle binary temporal operators".to_string(),
        ));
    }
    let Some(budget) = instance.fragment.bin_budget else {
        return Err(LearnError::FragmentViolation(
            "learn_atl2_single needs a finite binary budget".to_string(),
        ));
    };
    let sketches = atl2_sketches(&instance.fragment.bin_logic, op, budget, instance.bound);
    let props: Vec<&str> = instance.props.iter().map(String::as_str).collect();
    let engine = Engine::new(instance);
    let mut examined: u64 = 0;
    for sketch in &sketches {
        let holes = sketch.holes();
        let mut assignment = vec![0usize; holes];
        loop {
            let chosen: Vec<&str> = assignment.iter().map(|&i| props[i]).collect();
            let formula = sketch.instantiate(&chosen);
            if formula.size() <= instance.bound as usize {
                examined += 1;
                let mut sig = Vec::with_capacity(engine.evals.len());
                for eval in &engine.evals {
                    sig.push(eval.eval_bits(&formula, PropMode::Strict)?);
                }
                if engine.is_separator(&sig) {
                    let result =
                        LearnResult::conclude(Verdict::Positive, Some(formula), examined, start);
                    assert_sound(&result, instance);
                    return Ok(result);
                }
            }
            // advance the proposition assignment, last hole fastest
            let mut slot = holes;
            loop {
                if slot == 0 {
                    break;
                }
                slot -= 1;
                assignment[slot] += 1;
                if assignment[slot] < props.len() {
                    break;
                }
                assignment[slot] = 0;
            }
            if assignment.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(LearnResult::conclude(
        Verdict::Negative,
        None,
        examined,
        start,
    ))
}

/// Specialized search for the two-agent `F`/`G` reduction bundles: only
/// "promising" formulas (operators `<1>F`, `<2>F`, `<1>G` over a single
/// proposition) can separate those samples, so only chains over that
/// operator set are enumerated. Sound for any two-agent instance; complete
/// for the generated bundles.
pub fn learn_atl2_promising(instance: &LearningInstance) -> Result<LearnResult, LearnError> {
    let start = Instant::now();
    instance.validate()?;
    if instance.logic != Logic::Atl(2) {
        return Err(LearnError::FragmentViolation(
            "learn_atl2_promising expects a two-agent ATL instance".to_string(),
        ));
    }
    let unary = vec![
        UnCand::Temporal(Some(Coalition::solo(1)), TempUnOp::Eventually),
        UnCand::Temporal(Some(Coalition::solo(2)), TempUnOp::Eventually),
        UnCand::Temporal(Some(Coalition::solo(1)), TempUnOp::Globally),
    ];
    let result = run_engine(instance, &unary, &[], LearnOptions::default(), start)?;
    assert_sound(&result, instance);
    Ok(result)
}

const DAG_MODE_MAX_BOUND: u32 = 6;

/// DAG-complete cross-check mode: enumerate formulas as sequences of
/// distinct nodes over earlier nodes, so witnesses that need subformula
/// sharing to meet the bound are found too. Exponential; guarded to small
/// bounds.
pub fn learn_generic_dag(instance: &LearningInstance) -> Result<LearnResult, LearnError> {
    let start = Instant::now();
    instance.validate()?;
    if instance.bound > DAG_MODE_MAX_BOUND {
        return Err(LearnError::InvalidInstance(format!(
            "DAG-complete mode supports bounds up to {DAG_MODE_MAX_BOUND}"
        )));
    }
    let (unary, binary) = fragment_universe(instance);
    let engine = Engine::new(instance);
    let budget = instance.fragment.bin_budget;
    let mut candidates: u64 = 0;
    let cap = LearnOptions::default().candidate_cap;

    // Iterative deepening over the number of distinct subformulas.
    for total in 1..=instance.bound as usize {
        let mut nodes: Vec<Formula> = Vec::new();
        if let Some(witness) = dag_search(
            instance,
            &engine,
            &unary,
            &binary,
            budget,
            total,
            &mut nodes,
            &mut candidates,
            cap,
        )? {
            let result = LearnResult::conclude(Verdict::Positive, Some(witness), candidates, start);
            assert_sound(&result, instance);
            return Ok(result);
        }
        if candidates >= cap {
            return Ok(LearnResult::conclude(
                Verdict::Inconclusive,
                None,
                candidates,
                start,
            ));
        }
    }
    Ok(LearnResult::conclude(
        Verdict::Negative,
        None,
        candidates,
        start,
    ))
}

#[allow(clippy::too_many_arguments)]
fn dag_search(
    instance: &LearningInstance,
    engine: &Engine,
    unary: &[UnCand],
    binary: &[BinCand],
    budget: Option<u32>,
    total: usize,
    nodes: &mut Vec<Formula>,
    candidates: &mut u64,
    cap: u64,
) -> Result<Option<Formula>, LearnError> {
    if *candidates >= cap {
        return Ok(None);
    }
    if nodes.len() == total {
        let root = nodes.last().expect("total >= 1");
        *candidates += 1;
        // every listed node must really be a subformula of the root
        if root.size() != total {
            return Ok(None);
        }
        if let Some(n) = budget {
            if root.bin_count() > n as usize {
                return Ok(None);
            }
        }
        let mut sig = Vec::with_capacity(engine.evals.len());
        for eval in &engine.evals {
            sig.push(eval.eval_bits(root, PropMode::Strict)?);
        }
        if engine.is_separator(&sig) {
            return Ok(Some(root.clone()));
        }
        return Ok(None);
    }
    let mut extensions: Vec<Formula> = Vec::new();
    for p in &instance.props {
        extensions.push(Formula::prop(p.clone()));
    }
    for op in unary {
        for child in nodes.iter() {
            extensions.push(match op {
                UnCand::Not => Formula::not(child.clone()),
                UnCand::Temporal(c, t) => Formula::temporal(c.clone(), *t, child.clone()),
            });
        }
    }
    for op in binary {
        for left in nodes.iter() {
            for right in nodes.iter() {
                extensions.push(match op {
                    BinCand::Logic(o) => Formula::logical(*o, left.clone(), right.clone()),
                    BinCand::Temporal(c, o) => {
                        Formula::temporal_binary(c.clone(), *o, left.clone(), right.clone())
                    }
                });
            }
        }
    }
    for ext in extensions {
        if nodes.contains(&ext) {
            continue;
        }
        nodes.push(ext);
        if let Some(w) = dag_search(
            instance, engine, unary, binary, budget, total, nodes, candidates, cap,
        )? {
            return Ok(Some(w));
        }
        nodes.pop();
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{letter, UPWord};

    fn word_instance(
        props: &[&str],
        positives: Vec<UPWord>,
        negatives: Vec<UPWord>,
        bound: u32,
        fragment: FragmentSpec,
    ) -> LearningInstance {
        LearningInstance {
            logic: Logic::Ltl,
            props: props.iter().map(|p| p.to_string()).collect(),
            positives: positives.into_iter().map(Model::Word).collect(),
            negatives: negatives.into_iter().map(Model::Word).collect(),
            bound,
            fragment,
        }
    }

    fn constant(props: &[&str], label: &[&str]) -> UPWord {
        UPWord::constant(props.iter().map(|p| p.to_string()), letter(label))
    }

    #[test]
    fn separates_p_on_trivial_words() {
        let instance = word_instance(
            &["p"],
            vec![constant(&["p"], &["p"])],
            vec![constant(&["p"], &[])],
            1,
            FragmentSpec::unary_only([]),
        );
        assert!(separates(&Formula::prop("p"), &instance).unwrap());
        let same = word_instance(
            &["p"],
            vec![constant(&["p"], &["p"])],
            vec![constant(&["p"], &["p"])],
            1,
            FragmentSpec::unary_only([]),
        );
        assert!(!separates(&Formula::prop("p"), &same).unwrap());
    }

    #[test]
    fn learn_generic_finds_p() {
        let instance = word_instance(
            &["p"],
            vec![constant(&["p"], &["p"])],
            vec![constant(&["p"], &[])],
            1,
            FragmentSpec::unary_only([]),
        );
        let result = learn_generic(&instance).unwrap();
        assert_eq!(result.verdict, Verdict::Positive);
        assert_eq!(result.witness.unwrap(), Formula::prop("p"));
    }

    #[test]
    fn learn_generic_rejects_bound_zero() {
        let instance = word_instance(
            &["p"],
            vec![],
            vec![],
            0,
            FragmentSpec::unary_only([]),
        );
        assert!(matches!(
            learn_generic(&instance),
            Err(LearnError::InvalidInstance(_))
        ));
    }

    #[test]
    fn learn_ltl_unary_finds_xp() {
        // positive ({p})^w, negative ({p} {})^w: p holds at position 1 on
        // both words, so X p is the minimal separator at bound 2.
        let neg = UPWord::new(
            ["p".to_string()],
            vec![],
            vec![letter(&["p"]), letter(&[])],
        );
        let instance = word_instance(
            &["p"],
            vec![constant(&["p"], &["p"])],
            vec![neg],
            2,
            FragmentSpec::unary_only([UnaryOp::Next]),
        );
        let result = learn_ltl_unary(&instance).unwrap();
        assert_eq!(result.verdict, Verdict::Positive);
        assert_eq!(result.witness.unwrap().to_string(), "X p");
        let generic = learn_generic(&instance).unwrap();
        assert_eq!(generic.verdict, Verdict::Positive);
    }

    #[test]
    fn learn_ltl_unary_finds_p_at_bound_one() {
        let instance = word_instance(
            &["p"],
            vec![constant(&["p"], &["p"])],
            vec![constant(&["p"], &[])],
            1,
            FragmentSpec::unary_only([UnaryOp::Next]),
        );
        let result = learn_ltl_unary(&instance).unwrap();
        assert_eq!(result.verdict, Verdict::Positive);
        assert_eq!(result.witness.unwrap(), Formula::prop("p"));
    }

    #[test]
    fn candidate_cap_yields_inconclusive() {
        let instance = word_instance(
            &["p", "q"],
            vec![constant(&["p", "q"], &["p"])],
            vec![constant(&["p", "q"], &["p"])], // unseparable
            4,
            FragmentSpec::new(
                [UnaryOp::Not, UnaryOp::Next],
                [],
                [BinLogicOp::Or],
                None,
            ),
        );
        let result = learn_generic_with(
            &instance,
            LearnOptions {
                candidate_cap: 3,
            },
        )
        .unwrap();
        assert_eq!(result.verdict, Verdict::Inconclusive);
        assert!(result.witness.is_none());
    }

    #[test]
    fn dag_mode_agrees_with_tree_mode_on_small_instances() {
        let neg = UPWord::new(
            ["p".to_string()],
            vec![letter(&[])],
            vec![letter(&["p"])],
        );
        let instance = word_instance(
            &["p"],
            vec![constant(&["p"], &["p"])],
            vec![neg],
            3,
            FragmentSpec::new([UnaryOp::Next, UnaryOp::Eventually], [], [], Some(0)),
        );
        let tree = learn_generic(&instance).unwrap();
        let dag = learn_generic_dag(&instance).unwrap();
        assert_eq!(tree.verdict, dag.verdict);
    }

    #[test]
    fn dag_mode_finds_shared_witnesses() {
        // p <-> p is a tautology of DAG size 2 but tree size 3: with
        // bound 2 only the DAG mode can find a tautology.
        let instance = word_instance(
            &["p"],
            vec![
                constant(&["p"], &["p"]),
                constant(&["p"], &[]),
            ],
            vec![],
            2,
            FragmentSpec::new([], [], [BinLogicOp::Iff], Some(1)),
        );
        let tree = learn_generic(&instance).unwrap();
        let dag = learn_generic_dag(&instance).unwrap();
        assert_eq!(tree.verdict, Verdict::Negative);
        assert_eq!(dag.verdict, Verdict::Positive);
        assert_eq!(dag.witness.unwrap().to_string(), "p <-> p");
    }
}
