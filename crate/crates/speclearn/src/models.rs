//! The three model classes: ultimately periodic words (LTL), Kripke
//! structures (CTL) and concurrent game structures (ATL), plus turn-based
//! structures as a constrained constructor for the latter.
//!
//! Models are immutable after construction; evaluation never mutates them.
//! States are dense integer ids with an optional display name so gadget
//! dumps stay readable.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// A letter is a set of propositions. Serialized as a sorted array.
pub type Letter = BTreeSet<String>;

pub fn letter(props: &[&str]) -> Letter {
    props.iter().map(|p| p.to_string()).collect()
}

/// Ultimately periodic word `u . v^omega`. The loop `v` is nonempty; the
/// prefix `u` may be empty. Size is `|u| + |v|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UPWord {
    pub props: BTreeSet<String>,
    pub u: Vec<Letter>,
    pub v: Vec<Letter>,
}

impl UPWord {
    pub fn new(
        props: impl IntoIterator<Item = String>,
        u: Vec<Letter>,
        v: Vec<Letter>,
    ) -> UPWord {
        UPWord {
            props: props.into_iter().collect(),
            u,
            v,
        }
    }

    /// A size-1 word `alpha^omega`.
    pub fn constant(props: impl IntoIterator<Item = String>, alpha: Letter) -> UPWord {
        UPWord::new(props, Vec::new(), vec![alpha])
    }

    pub fn size(&self) -> usize {
        self.u.len() + self.v.len()
    }

    /// Number of distinct suffix classes, `|u| + |v|`.
    pub fn class_count(&self) -> usize {
        self.size()
    }

    /// Letter at 1-based position `i`, using lasso arithmetic.
    pub fn letter_at(&self, i: usize) -> &Letter {
        assert!(i >= 1, "word positions are 1-based");
        &self.class_letter(self.suffix_class(i))
    }

    /// Canonical class of the suffix starting at 1-based position `i`: a
    /// value in `[1, |u|+|v|]` such that equal classes have identical
    /// suffixes.
    pub fn suffix_class(&self, i: usize) -> usize {
        assert!(i >= 1, "word positions are 1-based");
        if i <= self.u.len() {
            i
        } else {
            self.u.len() + 1 + (i - self.u.len() - 1) % self.v.len()
        }
    }

    /// Letter of a suffix class in `[1, |u|+|v|]`.
    pub fn class_letter(&self, class: usize) -> &Letter {
        if class <= self.u.len() {
            &self.u[class - 1]
        } else {
            &self.v[class - self.u.len() - 1]
        }
    }

    /// Class reached one step after `class`.
    pub fn class_successor(&self, class: usize) -> usize {
        if class < self.class_count() {
            class + 1
        } else {
            self.u.len() + 1
        }
    }

    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut violations = Vec::new();
        if self.v.is_empty() {
            violations.push("word loop `v` must be nonempty".to_string());
        }
        for (part, letters) in [("u", &self.u), ("v", &self.v)] {
            for (i, l) in letters.iter().enumerate() {
                for p in l {
                    if !self.props.contains(p) {
                        violations.push(format!(
                            "letter {part}[{i}] mentions undeclared proposition `{p}`"
                        ));
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub label: Letter,
    pub succ: Vec<usize>,
}

/// Kripke structure: total successor relation, proposition labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KripkeStructure {
    pub props: BTreeSet<String>,
    pub initial: Vec<usize>,
    pub states: Vec<KState>,
}

impl KripkeStructure {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut violations = Vec::new();
        let n = self.states.len();
        if self.initial.is_empty() {
            violations.push("initial state set must be nonempty".to_string());
        }
        for &q in &self.initial {
            if q >= n {
                violations.push(format!("initial state {q} out of range"));
            }
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.succ.is_empty() {
                violations.push(format!("state {i} has no successor"));
            }
            for &q in &s.succ {
                if q >= n {
                    violations.push(format!("state {i} has out-of-range successor {q}"));
                }
            }
            for p in &s.label {
                if !self.props.contains(p) {
                    violations.push(format!("state {i} labeled with undeclared proposition `{p}`"));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgsState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub label: Letter,
    /// `actions[a-1]` is the number of actions available to agent `a`.
    pub actions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaEntry {
    pub state: usize,
    /// One 1-based action per agent.
    pub profile: Vec<u32>,
    pub to: usize,
}

/// Concurrent game structure over agents `1..=k`: every state's successor is
/// chosen by a joint action of all agents. `delta` is an explicit table over
/// the action tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcurrentGameStructure {
    pub props: BTreeSet<String>,
    pub agents: u8,
    pub initial: Vec<usize>,
    pub states: Vec<CgsState>,
    pub delta: Vec<DeltaEntry>,
}

impl ConcurrentGameStructure {
    /// All joint action profiles at state `q`, in lexicographic order.
    pub fn profiles(&self, q: usize) -> Vec<Vec<u32>> {
        let counts = &self.states[q].actions;
        let mut out = vec![Vec::new()];
        for &d in counts {
            let mut next = Vec::with_capacity(out.len() * d as usize);
            for prefix in &out {
                for a in 1..=d {
                    let mut p = prefix.clone();
                    p.push(a);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    pub fn successor(&self, q: usize, profile: &[u32]) -> Option<usize> {
        self.delta
            .iter()
            .find(|e| e.state == q && e.profile == profile)
            .map(|e| e.to)
    }

    /// Lookup table `(state, profile) -> successor` for evaluation loops.
    pub fn delta_map(&self) -> BTreeMap<(usize, Vec<u32>), usize> {
        self.delta
            .iter()
            .map(|e| ((e.state, e.profile.clone()), e.to))
            .collect()
    }

    /// Size measure `|Q_Act| + |Prop|`.
    pub fn size(&self) -> usize {
        self.delta.len() + self.props.len()
    }

    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut violations = Vec::new();
        let n = self.states.len();
        if self.initial.is_empty() {
            violations.push("initial state set must be nonempty".to_string());
        }
        for &q in &self.initial {
            if q >= n {
                violations.push(format!("initial state {q} out of range"));
            }
        }
        let table = self.delta_map();
        for (i, s) in self.states.iter().enumerate() {
            if s.actions.len() != self.agents as usize {
                violations.push(format!(
                    "state {i} lists {} action counts for {} agents",
                    s.actions.len(),
                    self.agents
                ));
                continue;
            }
            for (a, &d) in s.actions.iter().enumerate() {
                if d == 0 {
                    violations.push(format!("state {i} gives agent {} zero actions", a + 1));
                }
            }
            for p in &s.label {
                if !self.props.contains(p) {
                    violations.push(format!("state {i} labeled with undeclared proposition `{p}`"));
                }
            }
            if s.actions.iter().all(|&d| d > 0) {
                for profile in self.profiles(i) {
                    match table.get(&(i, profile.clone())) {
                        None => violations.push(format!(
                            "delta is not total: no entry for state {i}, profile {profile:?}"
                        )),
                        Some(&to) if to >= n => violations.push(format!(
                            "delta entry for state {i}, profile {profile:?} targets out-of-range state {to}"
                        )),
                        _ => {}
                    }
                }
            }
        }
        for e in &self.delta {
            if e.state >= n {
                violations.push(format!("delta entry references out-of-range state {}", e.state));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TbState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub label: Letter,
    pub owner: u8,
    pub succ: Vec<usize>,
}

/// Turn-based game structure: each state is owned by one agent who alone
/// picks the successor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnBasedStructure {
    pub props: BTreeSet<String>,
    pub agents: u8,
    pub initial: Vec<usize>,
    pub states: Vec<TbState>,
}

impl TurnBasedStructure {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut violations = Vec::new();
        let n = self.states.len();
        if self.initial.is_empty() {
            violations.push("initial state set must be nonempty".to_string());
        }
        for &q in &self.initial {
            if q >= n {
                violations.push(format!("initial state {q} out of range"));
            }
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.owner == 0 || s.owner > self.agents {
                violations.push(format!("state {i} owned by out-of-range agent {}", s.owner));
            }
            if s.succ.is_empty() {
                violations.push(format!("state {i} has no successor"));
            }
            for &q in &s.succ {
                if q >= n {
                    violations.push(format!("state {i} has out-of-range successor {q}"));
                }
            }
            for p in &s.label {
                if !self.props.contains(p) {
                    violations.push(format!("state {i} labeled with undeclared proposition `{p}`"));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Every state has itself as a successor.
    pub fn is_self_looping(&self) -> bool {
        self.states
            .iter()
            .enumerate()
            .all(|(i, s)| s.succ.contains(&i))
    }
}

/// The trivial structure `T(S)`: a single self-looping state labeled `S`,
/// usable with any agent count.
pub fn trivial_structure(labels: Letter, agents: u8) -> TurnBasedStructure {
    let props = labels.iter().cloned().collect();
    TurnBasedStructure {
        props,
        agents,
        initial: vec![0],
        states: vec![TbState {
            name: None,
            label: labels,
            owner: 1,
            succ: vec![0],
        }],
    }
}

/// `(n, S)`-properness: every state is labeled `S + {p}` or `S + {pbar}`.
pub fn is_proper(t: &TurnBasedStructure, s: &Letter, p: &str, pbar: &str) -> bool {
    let mut with_p = s.clone();
    with_p.insert(p.to_string());
    let mut with_pbar = s.clone();
    with_pbar.insert(pbar.to_string());
    t.states
        .iter()
        .all(|st| st.label == with_p || st.label == with_pbar)
}

/// The Kripke structure `K_w`: one state per word position, a single lasso,
/// labels copied from the letters. Initial state is the first prefix state
/// (or the first loop state when `u` is empty).
pub fn kripke_from_word(w: &UPWord) -> KripkeStructure {
    let k = w.u.len();
    let n = w.v.len();
    let total = k + n;
    let mut states = Vec::with_capacity(total);
    for (i, l) in w.u.iter().enumerate() {
        let next = i + 1; // position k-1 moves into the loop at index k
        states.push(KState {
            name: Some(format!("qu{}", i + 1)),
            label: l.clone(),
            succ: vec![next],
        });
    }
    for (i, l) in w.v.iter().enumerate() {
        let next = if i + 1 < n { k + i + 1 } else { k };
        states.push(KState {
            name: Some(format!("qv{}", i + 1)),
            label: l.clone(),
            succ: vec![next],
        });
    }
    KripkeStructure {
        props: w.props.clone(),
        initial: vec![0],
        states,
    }
}

/// View a turn-based structure as a CGS: the owner of each state gets one
/// action per successor, everyone else exactly one, and the transition
/// follows the owner's choice.
pub fn turn_based_to_cgs(t: &TurnBasedStructure) -> ConcurrentGameStructure {
    let mut states = Vec::with_capacity(t.states.len());
    let mut delta = Vec::new();
    for (i, s) in t.states.iter().enumerate() {
        let mut actions = vec![1u32; t.agents as usize];
        actions[(s.owner - 1) as usize] = s.succ.len() as u32;
        states.push(CgsState {
            name: s.name.clone(),
            label: s.label.clone(),
            actions,
        });
        for (choice, &to) in s.succ.iter().enumerate() {
            let mut profile = vec![1u32; t.agents as usize];
            profile[(s.owner - 1) as usize] = choice as u32 + 1;
            delta.push(DeltaEntry {
                state: i,
                profile,
                to,
            });
        }
    }
    ConcurrentGameStructure {
        props: t.props.clone(),
        agents: t.agents,
        initial: t.initial.clone(),
        states,
        delta,
    }
}

/// View a Kripke structure as a one-agent CGS.
pub fn kripke_to_cgs(k: &KripkeStructure) -> ConcurrentGameStructure {
    let t = kripke_to_turn_based(k);
    turn_based_to_cgs(&t)
}

/// A Kripke structure is a one-agent turn-based structure.
pub fn kripke_to_turn_based(k: &KripkeStructure) -> TurnBasedStructure {
    TurnBasedStructure {
        props: k.props.clone(),
        agents: 1,
        initial: k.initial.clone(),
        states: k
            .states
            .iter()
            .map(|s| TbState {
                name: s.name.clone(),
                label: s.label.clone(),
                owner: 1,
                succ: s.succ.clone(),
            })
            .collect(),
    }
}

/// Any of the model classes, tagged for JSON interchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Word(UPWord),
    Kripke(KripkeStructure),
    Cgs(ConcurrentGameStructure),
    TurnBased(TurnBasedStructure),
}

impl Model {
    pub fn props(&self) -> &BTreeSet<String> {
        match self {
            Model::Word(w) => &w.props,
            Model::Kripke(k) => &k.props,
            Model::Cgs(c) => &c.props,
            Model::TurnBased(t) => &t.props,
        }
    }

    pub fn validate(&self) -> Result<(), Vec<String>> {
        match self {
            Model::Word(w) => w.validate(),
            Model::Kripke(k) => k.validate(),
            Model::Cgs(c) => c.validate(),
            Model::TurnBased(t) => t.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Word(_) => "word",
            Model::Kripke(_) => "kripke",
            Model::Cgs(_) => "cgs",
            Model::TurnBased(_) => "turn_based",
        }
    }

    /// Rewrite every state label (used by the binary-operator wrappers).
    /// Words are rewritten letter by letter.
    pub fn map_labels(
        &self,
        props: BTreeSet<String>,
        f: impl Fn(&Letter) -> Letter,
    ) -> Model {
        match self {
            Model::Word(w) => Model::Word(UPWord {
                props,
                u: w.u.iter().map(&f).collect(),
                v: w.v.iter().map(&f).collect(),
            }),
            Model::Kripke(k) => Model::Kripke(KripkeStructure {
                props,
                initial: k.initial.clone(),
                states: k
                    .states
                    .iter()
                    .map(|s| KState {
                        name: s.name.clone(),
                        label: f(&s.label),
                        succ: s.succ.clone(),
                    })
                    .collect(),
            }),
            Model::Cgs(c) => Model::Cgs(ConcurrentGameStructure {
                props,
                agents: c.agents,
                initial: c.initial.clone(),
                states: c
                    .states
                    .iter()
                    .map(|s| CgsState {
                        name: s.name.clone(),
                        label: f(&s.label),
                        actions: s.actions.clone(),
                    })
                    .collect(),
                delta: c.delta.clone(),
            }),
            Model::TurnBased(t) => Model::TurnBased(TurnBasedStructure {
                props,
                agents: t.agents,
                initial: t.initial.clone(),
                states: t
                    .states
                    .iter()
                    .map(|s| TbState {
                        name: s.name.clone(),
                        label: f(&s.label),
                        owner: s.owner,
                        succ: s.succ.clone(),
                    })
                    .collect(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kripke_from_constant_word_is_one_self_loop() {
        let w = UPWord::constant(["p".to_string()], letter(&["p"]));
        let k = kripke_from_word(&w);
        assert_eq!(k.states.len(), 1);
        assert_eq!(k.states[0].succ, vec![0]);
        assert_eq!(k.states[0].label, letter(&["p"]));
        assert_eq!(k.initial, vec![0]);
    }

    #[test]
    fn kripke_from_word_with_prefix_is_chain_then_loop() {
        let w = UPWord::new(["p".to_string()], vec![letter(&[])], vec![letter(&["p"])]);
        let k = kripke_from_word(&w);
        assert_eq!(k.states.len(), 2);
        assert_eq!(k.states[0].succ, vec![1]);
        assert_eq!(k.states[1].succ, vec![1]);
        assert_eq!(k.initial, vec![0]);
        assert!(k.validate().is_ok());
    }

    #[test]
    fn word_indexing_uses_lasso_arithmetic() {
        // w = ab . (c)^omega encoded over single-proposition letters.
        let w = UPWord::new(
            ["a".to_string(), "b".to_string(), "c".to_string()],
            vec![letter(&["a"]), letter(&["b"])],
            vec![letter(&["c"])],
        );
        assert_eq!(w.letter_at(5), &letter(&["c"]));
        assert_eq!(w.suffix_class(w.size() + 1), w.u.len() + 1);
        let constant = UPWord::constant(["p".to_string()], letter(&["p"]));
        for i in 1..10 {
            assert_eq!(constant.suffix_class(i), 1);
        }
    }

    #[test]
    fn validate_rejects_malformed_models() {
        let k = KripkeStructure {
            props: ["p".to_string()].into(),
            initial: vec![0],
            states: vec![KState {
                name: None,
                label: letter(&["p"]),
                succ: vec![],
            }],
        };
        assert!(k.validate().is_err());

        let c = ConcurrentGameStructure {
            props: ["p".to_string()].into(),
            agents: 1,
            initial: vec![0],
            states: vec![CgsState {
                name: None,
                label: letter(&[]),
                actions: vec![0],
            }],
            delta: vec![],
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn turn_based_to_cgs_gives_owner_the_choices() {
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
        let c = turn_based_to_cgs(&t);
        assert!(c.validate().is_ok());
        assert_eq!(c.states[0].actions, vec![2, 1]);
        assert_eq!(c.states[1].actions, vec![1, 1]);
        assert_eq!(c.successor(0, &[2, 1]), Some(1));
        // Non-owner agents always have exactly one action.
        for (i, s) in t.states.iter().enumerate() {
            for a in 1..=2u8 {
                if a != s.owner {
                    assert_eq!(c.states[i].actions[(a - 1) as usize], 1);
                }
            }
        }
    }

    #[test]
    fn trivial_structure_is_proper_single_state() {
        let t = trivial_structure(letter(&["p"]), 3);
        assert!(t.validate().is_ok());
        assert!(t.is_self_looping());
        assert_eq!(t.states.len(), 1);
        assert!(is_proper(&t, &letter(&[]), "p", "pbar"));
    }

    #[test]
    fn model_json_round_trips_and_rejects_unknown_fields() {
        let w = Model::Word(UPWord::constant(["p".to_string()], letter(&["p"])));
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<Model>(&text).unwrap(), w);
        let bad = r#"{"type":"word","props":["p"],"u":[],"v":[["p"]],"extra":1}"#;
        assert!(serde_json::from_str::<Model>(bad).is_err());
    }
}
