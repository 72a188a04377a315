//! Extended R-automata: counters with increments, resets, copies and a
//! max-propagating preorder.

pub mod copy;
pub mod runs;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{input, Error, Result};
use crate::fa::Nfa;

/// An instruction on one counter. Counter indices are 0-based in memory and
/// 1-based in text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instruction {
    Nop,
    Inc,
    /// Reset; the set names counters this one is placed below when they are nonzero.
    Reset(BTreeSet<usize>),
    /// Take the (updated) value of another counter.
    Copy(usize),
}

impl Instruction {
    /// `0` or `1`.
    pub fn is_plain(&self) -> bool {
        matches!(self, Instruction::Nop | Instruction::Inc)
    }

    pub fn reset() -> Instruction {
        Instruction::Reset(BTreeSet::new())
    }

    fn parse(text: &str) -> Result<Instruction> {
        let t = text.trim();
        let bad = || Error::Input(format!("bad instruction `{t}`"));
        match t {
            "0" => return Ok(Instruction::Nop),
            "1" => return Ok(Instruction::Inc),
            _ => {}
        }
        if let Some(src) = t.strip_prefix('*') {
            let j: usize = src.trim().parse().map_err(|_| bad())?;
            if j == 0 {
                return Err(bad());
            }
            return Ok(Instruction::Copy(j - 1));
        }
        let inner = t
            .strip_prefix("r{")
            .and_then(|s| s.strip_suffix('}'))
            .or_else(|| (t == "r").then_some(""))
            .ok_or_else(bad)?;
        let mut set = BTreeSet::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let j: usize = part.parse().map_err(|_| bad())?;
            if j == 0 {
                return Err(bad());
            }
            set.insert(j - 1);
        }
        Ok(Instruction::Reset(set))
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Nop => write!(f, "0"),
            Instruction::Inc => write!(f, "1"),
            Instruction::Copy(j) => write!(f, "*{}", j + 1),
            Instruction::Reset(a) => {
                let parts: Vec<String> = a.iter().map(|j| (j + 1).to_string()).collect();
                write!(f, "r{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Effect(pub Vec<Instruction>);

impl Effect {
    pub fn zero(n: usize) -> Effect {
        Effect(vec![Instruction::Nop; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_copy(&self) -> bool {
        self.0.iter().any(|i| matches!(i, Instruction::Copy(_)))
    }

    /// Parses `1,0`, `r{},*1`, `0,r{1,2}`.
    pub fn parse(text: &str) -> Result<Effect> {
        let mut parts = Vec::new();
        let mut depth = 0usize;
        let mut cur = String::new();
        for ch in text.chars() {
            match ch {
                '{' => depth += 1,
                '}' => depth = depth.saturating_sub(1),
                _ => {}
            }
            if ch == ',' && depth == 0 {
                parts.push(std::mem::take(&mut cur));
            } else {
                cur.push(ch);
            }
        }
        parts.push(cur);
        Ok(Effect(parts.iter().map(|p| Instruction::parse(p)).collect::<Result<_>>()?))
    }

    /// Checks length and counter references against `n` counters.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return input(format!("effect `{self}` has {} entries, expected {n}", self.0.len()));
        }
        for (i, ins) in self.0.iter().enumerate() {
            match ins {
                Instruction::Copy(j) if *j == i => return input(format!("counter {} copied into itself", i + 1)),
                Instruction::Copy(j) if *j >= n => return input(format!("copy from unknown counter {}", j + 1)),
                Instruction::Reset(a) if a.iter().any(|&j| j >= n) => {
                    return input(format!("reset set names an unknown counter in `{self}`"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The effect with every copy replaced by `0`.
    pub fn without_copies(&self) -> Effect {
        Effect(
            self.0
                .iter()
                .map(|i| if matches!(i, Instruction::Copy(_)) { Instruction::Nop } else { i.clone() })
                .collect(),
        )
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `v ⊞ t`: plain instructions first, then copies read the updated sources.
pub fn apply_effect(v: &[u64], t: &Effect) -> Vec<u64> {
    let plain = |i: usize| match &t.0[i] {
        Instruction::Nop | Instruction::Copy(_) => v[i],
        Instruction::Inc => v[i] + 1,
        Instruction::Reset(_) => 0,
    };
    (0..v.len())
        .map(|i| match t.0[i] {
            Instruction::Copy(j) => plain(j),
            _ => plain(i),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EraTransition {
    pub source: usize,
    pub letter: usize,
    pub effect: Effect,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedRAutomaton {
    states: Vec<String>,
    alphabet: Vec<String>,
    counters: usize,
    initial: usize,
    accepting: Vec<bool>,
    /// States entered without the max step.
    auxiliary: Vec<bool>,
    restricted: bool,
    transitions: Vec<EraTransition>,
    out: Vec<Vec<usize>>,
}

impl ExtendedRAutomaton {
    pub fn builder(counters: usize) -> EraBuilder {
        EraBuilder { counters, ..EraBuilder::default() }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        states: Vec<String>,
        alphabet: Vec<String>,
        counters: usize,
        initial: usize,
        accepting: Vec<bool>,
        auxiliary: Vec<bool>,
        restricted: bool,
        mut transitions: Vec<EraTransition>,
    ) -> ExtendedRAutomaton {
        transitions.sort();
        transitions.dedup();
        let mut out = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            out[t.source].push(i);
        }
        ExtendedRAutomaton { states, alphabet, counters, initial, accepting, auxiliary, restricted, transitions, out }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn counters(&self) -> usize {
        self.counters
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    pub fn is_auxiliary(&self, s: usize) -> bool {
        self.auxiliary[s]
    }

    pub fn restricted_max(&self) -> bool {
        self.restricted
    }

    pub fn transitions(&self) -> &[EraTransition] {
        &self.transitions
    }

    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = (usize, &EraTransition)> + '_ {
        self.out[s].iter().map(move |&i| (i, &self.transitions[i]))
    }

    pub fn letter_index(&self, letter: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == letter)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn encode<S: AsRef<str>>(&self, word: &[S]) -> Option<Vec<usize>> {
        word.iter().map(|a| self.letter_index(a.as_ref())).collect()
    }

    pub fn has_copies(&self) -> bool {
        self.transitions.iter().any(|t| t.effect.has_copy())
    }

    pub fn with_restricted_max(mut self, restricted: bool) -> Self {
        self.restricted = restricted;
        self
    }

    pub fn initial_configuration(&self) -> Configuration {
        let n = self.counters;
        Configuration { state: self.initial, p: vec![0; n], m: vec![0; n], n: vec![0; n], order: Preorder::identity(n) }
    }

    /// The successor through one transition.
    pub fn fire(&self, conf: &Configuration, t: &EraTransition) -> Configuration {
        let n = apply_effect(&conf.n, &t.effect);
        let order = update_preorder(&conf.order, &t.effect, &n);
        let next = Configuration {
            state: t.target,
            p: apply_effect(&conf.p, &t.effect),
            m: apply_effect(&conf.m, &t.effect),
            n,
            order,
        };
        if self.auxiliary[t.target] {
            next
        } else {
            max_fixpoint(&next, self.restricted)
        }
    }

    /// One successor per matching transition.
    pub fn step(&self, conf: &Configuration, letter: &str) -> Vec<Configuration> {
        let Some(a) = self.letter_index(letter) else {
            return Vec::new();
        };
        self.outgoing(conf.state).filter(|(_, t)| t.letter == a).map(|(_, t)| self.fire(conf, t)).collect()
    }

    /// The automaton with counters dropped.
    pub fn language_nfa(&self) -> Nfa {
        let mut nfa = Nfa::new(self.alphabet.clone());
        for s in 0..self.states.len() {
            nfa.add_state(self.accepting[s]);
        }
        nfa.set_initial(self.initial);
        for t in &self.transitions {
            nfa.add_transition(t.source, t.letter, t.target);
        }
        nfa
    }

    /// States are pairs of a state and an N̄-vector with entries at most `bound`.
    pub fn b_language_nfa(&self, bound: u64, budget: usize) -> Result<Nfa> {
        let mut nfa = Nfa::new(self.alphabet.clone());
        let start = (self.initial, vec![0u64; self.counters]);
        let mut index: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
        index.insert(start.clone(), nfa.add_state(self.accepting[self.initial]));
        let mut queue = VecDeque::from([start]);
        while let Some((s, v)) = queue.pop_front() {
            let i = index[&(s, v.clone())];
            for (_, t) in self.outgoing(s) {
                let v2 = apply_effect(&v, &t.effect);
                if v2.iter().any(|&x| x > bound) {
                    continue;
                }
                let key = (t.target, v2);
                let j = match index.get(&key) {
                    Some(&j) => j,
                    None => {
                        if index.len() >= budget {
                            return Err(Error::Budget { what: "bounded language", limit: budget });
                        }
                        let j = nfa.add_state(self.accepting[t.target]);
                        index.insert(key.clone(), j);
                        queue.push_back(key);
                        j
                    }
                };
                nfa.add_transition(i, t.letter, j);
            }
        }
        Ok(nfa)
    }

    /// The least bound under which `word` is accepted; `None` when it is not accepted at all.
    pub fn min_bound<S: AsRef<str>>(&self, word: &[S]) -> Option<u64> {
        self.min_bound_indices(&self.encode(word)?)
    }

    /// Keeps, per state, the Pareto-minimal pairs of N̄-vector and running maximum.
    pub fn min_bound_indices(&self, word: &[usize]) -> Option<u64> {
        let mut front: HashMap<usize, Vec<(Vec<u64>, u64)>> =
            HashMap::from([(self.initial, vec![(vec![0; self.counters], 0)])]);
        for &a in word {
            let mut next: HashMap<usize, Vec<(Vec<u64>, u64)>> = HashMap::new();
            for (&s, entries) in &front {
                for (_, t) in self.outgoing(s).filter(|(_, t)| t.letter == a) {
                    for (v, mx) in entries {
                        let v2 = apply_effect(v, &t.effect);
                        let mx2 = v2.iter().copied().max().unwrap_or(0).max(*mx);
                        insert_minimal(next.entry(t.target).or_default(), (v2, mx2));
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            front = next;
        }
        front
            .iter()
            .filter(|(&s, _)| self.accepting[s])
            .flat_map(|(_, e)| e.iter().map(|(_, m)| *m))
            .min()
    }
}

fn dominates(a: &(Vec<u64>, u64), b: &(Vec<u64>, u64)) -> bool {
    a.1 <= b.1 && a.0.iter().zip(&b.0).all(|(x, y)| x <= y)
}

fn insert_minimal(set: &mut Vec<(Vec<u64>, u64)>, e: (Vec<u64>, u64)) {
    if set.iter().any(|o| dominates(o, &e)) {
        return;
    }
    set.retain(|o| !dominates(&e, o));
    set.push(e);
}

impl fmt::Display for ExtendedRAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "counters {}", self.counters)?;
        writeln!(f, "alphabet {}", self.alphabet.join(" "))?;
        writeln!(f, "initial {}", self.states[self.initial])?;
        let names = |flags: &[bool]| -> Vec<&str> {
            (0..self.states.len()).filter(|&s| flags[s]).map(|s| self.states[s].as_str()).collect()
        };
        writeln!(f, "accepting {}", names(&self.accepting).join(" "))?;
        if self.restricted {
            writeln!(f, "restricted")?;
        }
        let aux = names(&self.auxiliary);
        if !aux.is_empty() {
            writeln!(f, "auxiliary {}", aux.join(" "))?;
        }
        for t in &self.transitions {
            writeln!(
                f,
                "trans {} -> {} on {} eff {}",
                self.states[t.source], self.states[t.target], self.alphabet[t.letter], t.effect
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct EraBuilder {
    counters: usize,
    alphabet: Vec<String>,
    initial: Option<String>,
    accepting: Vec<String>,
    auxiliary: Vec<String>,
    restricted: bool,
    transitions: Vec<(String, String, String, String)>,
}

impl EraBuilder {
    pub fn alphabet<S: AsRef<str>>(mut self, letters: impl IntoIterator<Item = S>) -> Self {
        self.alphabet.extend(letters.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn initial(mut self, s: &str) -> Self {
        self.initial = Some(s.to_string());
        self
    }

    pub fn accepting<S: AsRef<str>>(mut self, states: impl IntoIterator<Item = S>) -> Self {
        self.accepting.extend(states.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    /// States entered without the max step.
    pub fn auxiliary<S: AsRef<str>>(mut self, states: impl IntoIterator<Item = S>) -> Self {
        self.auxiliary.extend(states.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn restricted(mut self, on: bool) -> Self {
        self.restricted = on;
        self
    }

    /// `effect` uses the text syntax, e.g. `"r{},*1"`.
    pub fn transition(mut self, from: &str, to: &str, letter: &str, effect: &str) -> Self {
        self.transitions.push((from.into(), to.into(), letter.into(), effect.into()));
        self
    }

    pub fn build(self) -> Result<ExtendedRAutomaton> {
        let mut alphabet = self.alphabet;
        alphabet.sort();
        alphabet.dedup();
        let initial = self.initial.ok_or_else(|| Error::Input("no initial state".into()))?;
        let mut states = vec![initial.clone()];
        let mut index: HashMap<String, usize> = HashMap::from([(initial, 0)]);
        let mut intern = |name: &str, states: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                states.push(name.to_string());
                states.len() - 1
            })
        };
        let mut transitions = Vec::new();
        for (from, to, letter, eff) in &self.transitions {
            let source = intern(from, &mut states);
            let target = intern(to, &mut states);
            let letter = alphabet
                .iter()
                .position(|a| a == letter)
                .ok_or_else(|| Error::Input(format!("letter `{letter}` is not in the alphabet")))?;
            let effect = Effect::parse(eff)?;
            effect.validate(self.counters)?;
            transitions.push(EraTransition { source, letter, effect, target });
        }
        let acc: Vec<usize> = self.accepting.iter().map(|s| intern(s, &mut states)).collect();
        let aux: Vec<usize> = self.auxiliary.iter().map(|s| intern(s, &mut states)).collect();
        let mut accepting = vec![false; states.len()];
        acc.into_iter().for_each(|s| accepting[s] = true);
        let mut auxiliary = vec![false; states.len()];
        aux.into_iter().for_each(|s| auxiliary[s] = true);
        Ok(ExtendedRAutomaton::from_parts(
            states,
            alphabet,
            self.counters,
            0,
            accepting,
            auxiliary,
            self.restricted,
            transitions,
        ))
    }
}

/// A reflexive, transitive relation on counters, kept closed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Preorder {
    n: usize,
    rel: Vec<bool>,
}

impl Preorder {
    pub fn identity(n: usize) -> Preorder {
        let mut rel = vec![false; n * n];
        for i in 0..n {
            rel[i * n + i] = true;
        }
        Preorder { n, rel }
    }

    /// The closure of the given `i ≲ j` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Preorder {
        let mut p = Preorder::identity(n);
        for &(i, j) in pairs {
            p.rel[i * n + j] = true;
        }
        p.close();
        p
    }

    fn close(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.rel[i * n + i] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if self.rel[i * n + k] {
                    for j in 0..n {
                        if self.rel[k * n + j] {
                            self.rel[i * n + j] = true;
                        }
                    }
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.rel[i * self.n + j]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        self.le(i, j) && !self.le(j, i)
    }

    pub fn equiv(&self, i: usize, j: usize) -> bool {
        self.le(i, j) && self.le(j, i)
    }

    /// All `i ≲ j` pairs with `i != j`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && self.le(i, j)).collect()
    }
}

/// The preorder after effect `t`, given the updated N̄-vector.
pub fn update_preorder(order: &Preorder, t: &Effect, n_post: &[u64]) -> Preorder {
    let n = order.n;
    let mut next = Preorder { n, rel: vec![false; n * n] };
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (&t.0[i], &t.0[j]);
            let kept = order.le(i, j)
                && pi.is_plain()
                && pj.is_plain()
                && !(order.le(j, i) && *pi == Instruction::Inc && *pj == Instruction::Nop);
            let below = matches!(pi, Instruction::Reset(a) if a.contains(&j) && n_post[j] > 0);
            let copied = *pi == Instruction::Copy(j) || *pj == Instruction::Copy(i);
            next.rel[i * n + j] = kept || below || copied;
        }
    }
    next.close();
    next
}

/// A full configuration: state, the P̄, M̄, N̄ vectors and the preorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub p: Vec<u64>,
    pub m: Vec<u64>,
    pub n: Vec<u64>,
    pub order: Preorder,
}

/// Propagates `M` and `P` along strict preorder edges until stable.
pub fn max_fixpoint(conf: &Configuration, restricted: bool) -> Configuration {
    max_fixpoint_rounds(conf, restricted).0
}

/// Also returns the number of rounds that changed something.
pub fn max_fixpoint_rounds(conf: &Configuration, restricted: bool) -> (Configuration, usize) {
    let n = conf.n.len();
    let order = &conf.order;
    let mut cur = conf.clone();
    let mut rounds = 0;
    loop {
        let (p, m) = (cur.p.clone(), cur.m.clone());
        for j in 0..n {
            let below: Vec<usize> = (0..n).filter(|&i| order.lt(i, j)).collect();
            for &i in &below {
                cur.m[j] = cur.m[j].max(m[i] + 1);
            }
            for (a, &k) in below.iter().enumerate() {
                for &l in &below[a + 1..] {
                    if restricted && (0..n).any(|x| order.le(x, k) && order.le(x, l)) {
                        continue;
                    }
                    cur.p[j] = cur.p[j].max(p[k] + p[l]);
                }
            }
        }
        if cur.p == p && cur.m == m {
            return (cur, rounds);
        }
        rounds += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fa::words_up_to;
    use crate::samples;
    use proptest::prelude::*;

    fn eff(s: &str) -> Effect {
        Effect::parse(s).unwrap()
    }

    #[test]
    fn instruction_text_round_trip() {
        let e = eff("r{},*1,0,1,r{1,2}");
        assert_eq!(e.0[0], Instruction::reset());
        assert_eq!(e.0[1], Instruction::Copy(0));
        assert_eq!(e.0[4], Instruction::Reset(BTreeSet::from([0, 1])));
        assert_eq!(e.to_string(), "r{},*1,0,1,r{1,2}");
        assert!(Effect::parse("2").is_err());
        assert!(Effect::parse("*0").is_err());
        assert!(eff("*1,0").validate(2).is_err());
        assert!(eff("0,*3").validate(2).is_err());
        assert!(eff("0").validate(2).is_err());
    }

    #[test]
    fn box_plus() {
        assert_eq!(apply_effect(&[1, 5, 7], &eff("1,*1,*2")), vec![2, 2, 5]);
        assert_eq!(apply_effect(&[4, 9], &eff("0,0")), vec![4, 9]);
        assert_eq!(apply_effect(&[3], &eff("r{}")), vec![0]);
        assert_eq!(apply_effect(&[1, 0], &eff("r{},*1")), vec![0, 0]);
    }

    #[test]
    fn preorder_update_example() {
        // 6 < 1~2 < 3 and 5 < 4 < 3 (1-based)
        let before = Preorder::from_pairs(6, &[(0, 1), (1, 0), (5, 0), (0, 2), (4, 3), (3, 2)]);
        let t = eff("0,1,0,*2,0,r{5}");
        let after = update_preorder(&before, &t, &[1, 1, 1, 1, 1, 0]);
        let expected = Preorder::from_pairs(6, &[(0, 1), (0, 2), (1, 2), (4, 2), (5, 4), (3, 1), (1, 3)]);
        assert_eq!(after, expected);
        assert!(after.lt(0, 1));
        assert!(after.equiv(3, 1));
        assert!(after.lt(5, 4));
    }

    #[test]
    fn identity_effect_keeps_preorder() {
        let p = Preorder::from_pairs(3, &[(0, 1), (1, 2)]);
        assert_eq!(update_preorder(&p, &Effect::zero(3), &[0, 0, 0]), p);
    }

    #[test]
    fn reset_below_zero_counter_adds_nothing() {
        let p = Preorder::identity(2);
        let after = update_preorder(&p, &eff("r{2},0"), &[0, 0]);
        assert!(!after.le(0, 1));
    }

    fn conf3(p: [u64; 3], order: Preorder) -> Configuration {
        Configuration { state: 0, p: p.to_vec(), m: p.to_vec(), n: vec![0; 3], order }
    }

    #[test]
    fn fixpoint_sums() {
        let order = Preorder::from_pairs(3, &[(0, 2), (1, 2)]);
        let out = max_fixpoint(&conf3([10, 13, 0], order.clone()), false);
        assert_eq!((out.p[2], out.m[2]), (23, 14));
        let same = max_fixpoint(&conf3([10, 13, 0], order), true);
        assert_eq!(same.p[2], 23);
    }

    #[test]
    fn restriction_blocks_only_sums() {
        // counter 4 sits below both 1 and 2
        let order = Preorder::from_pairs(4, &[(0, 2), (1, 2), (3, 0), (3, 1)]);
        let c = Configuration { state: 0, p: vec![10, 13, 0, 0], m: vec![10, 13, 0, 0], n: vec![0; 4], order };
        let out = max_fixpoint(&c, true);
        assert_eq!((out.p[2], out.m[2]), (0, 14));
        let free = max_fixpoint(&c, false);
        assert_eq!(free.p[2], 23);
    }

    #[test]
    fn fixpoint_without_order_is_identity() {
        let c = conf3([1, 2, 3], Preorder::identity(3));
        assert_eq!(max_fixpoint_rounds(&c, false), (c.clone(), 0));
    }

    #[test]
    fn gadget_steps() {
        let r = samples::copy_reset();
        let c0 = r.initial_configuration();
        let c1 = r.step(&c0, "a");
        let s1 = c1.iter().find(|c| r.states()[c.state] == "s1").unwrap();
        assert_eq!((&s1.n, &s1.m, &s1.p), (&vec![1, 0], &vec![1, 0], &vec![1, 0]));
        let c2 = r.step(s1, "b");
        let s2 = c2.iter().find(|c| r.states()[c.state] == "s2").unwrap();
        assert_eq!(s2.n, vec![0, 0]);
        assert!(r.step(&c0, "b").is_empty());
    }

    fn in_ab_star_a_star(w: &[usize]) -> bool {
        w.first() == Some(&0) && {
            let bs = w[1..].iter().take_while(|&&a| a == 1).count();
            w[1 + bs..].iter().all(|&a| a == 0)
        }
    }

    #[test]
    fn gadget_languages() {
        let r = samples::copy_reset();
        let all = r.language_nfa();
        let two = r.b_language_nfa(2, 1000).unwrap();
        for w in words_up_to(2, 6) {
            let in_l = in_ab_star_a_star(&w);
            let bs = w.iter().skip(1).take_while(|&&a| a == 1).count();
            assert_eq!(all.accepts_indices(&w), in_l);
            assert_eq!(two.accepts_indices(&w), in_l && bs <= 3, "{w:?}");
        }
    }

    #[test]
    fn gadget_min_bounds() {
        let r = samples::copy_reset();
        let got: Vec<Option<u64>> = (0..5)
            .map(|m| {
                let mut w = vec!["a"];
                w.extend(std::iter::repeat_n("b", m));
                w.push("a");
                r.min_bound(&w)
            })
            .collect();
        assert_eq!(got, [1, 1, 1, 2, 3].map(Some));
        assert_eq!(r.min_bound(&["b"]), None);
        assert_eq!(r.min_bound(&["z"]), None);
    }

    #[test]
    fn empty_word_bound() {
        let r = ExtendedRAutomaton::builder(1).alphabet(["a"]).initial("s").accepting(["s"]).build().unwrap();
        assert_eq!(r.min_bound::<&str>(&[]), Some(0));
    }

    #[test]
    fn zero_bound_with_forced_increment() {
        let r = ExtendedRAutomaton::builder(1)
            .alphabet(["a"])
            .initial("s")
            .accepting(["t"])
            .transition("s", "t", "a", "1")
            .build()
            .unwrap();
        assert!(r.b_language_nfa(0, 10).unwrap().shortest_accepted().is_none());
        assert!(r.b_language_nfa(1, 10).unwrap().accepts(&["a"]));
    }

    #[test]
    fn builder_rejects_self_copy() {
        let bad = ExtendedRAutomaton::builder(2).alphabet(["a"]).initial("s").transition("s", "s", "a", "*1,0");
        assert!(bad.build().is_err());
    }

    #[test]
    fn display_parses_back() {
        let r = samples::copy_reset();
        let text = r.to_string();
        assert!(text.contains("trans s1 -> s2 on b eff r{},*1"));
    }

    fn arb_instruction(n: usize) -> impl Strategy<Value = Instruction> {
        prop_oneof![
            Just(Instruction::Nop),
            Just(Instruction::Inc),
            prop::collection::btree_set(0..n, 0..=n).prop_map(Instruction::Reset),
            (0..n).prop_map(Instruction::Copy),
        ]
    }

    fn arb_effect(n: usize) -> impl Strategy<Value = Effect> {
        prop::collection::vec(arb_instruction(n), n).prop_map(|mut v| {
            for (i, ins) in v.iter_mut().enumerate() {
                if *ins == Instruction::Copy(i) {
                    *ins = Instruction::Nop;
                }
            }
            Effect(v)
        })
    }

    proptest! {
        #[test]
        fn box_plus_two_phase(v in prop::collection::vec(0u64..20, 4), t in arb_effect(4)) {
            let mut mid = v.clone();
            for (i, ins) in t.0.iter().enumerate() {
                match ins {
                    Instruction::Inc => mid[i] += 1,
                    Instruction::Reset(_) => mid[i] = 0,
                    _ => {}
                }
            }
            let mut out = mid.clone();
            for (i, ins) in t.0.iter().enumerate() {
                if let Instruction::Copy(j) = ins {
                    out[i] = mid[*j];
                }
            }
            prop_assert_eq!(apply_effect(&v, &t), out);
        }

        #[test]
        fn effect_text_round_trip(t in arb_effect(3)) {
            prop_assert_eq!(Effect::parse(&t.to_string()).unwrap(), t);
        }

        #[test]
        fn update_yields_preorder(t in arb_effect(4), pairs in prop::collection::vec((0usize..4, 0usize..4), 0..6),
                                  n in prop::collection::vec(0u64..2, 4)) {
            let p = update_preorder(&Preorder::from_pairs(4, &pairs), &t, &n);
            for i in 0..4 {
                prop_assert!(p.le(i, i));
                for j in 0..4 {
                    for k in 0..4 {
                        prop_assert!(!(p.le(i, j) && p.le(j, k)) || p.le(i, k));
                    }
                }
            }
        }
    }
}
