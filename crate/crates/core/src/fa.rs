//! Nondeterministic finite automata: subset construction, equivalence with
//! shortest counterexamples, and silent-letter removal.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{input, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    alphabet: Vec<String>,
    /// `delta[state][letter]` is a sorted target list.
    delta: Vec<Vec<Vec<usize>>>,
    initial: usize,
    accepting: Vec<bool>,
}

/// Outcome of an equivalence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equal,
    /// A shortest word in exactly one of the two languages.
    Differ { word: Vec<String>, in_left: bool },
}

impl Equivalence {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equivalence::Equal)
    }
}

impl Nfa {
    /// An automaton with no states; the first added state becomes initial.
    pub fn new(alphabet: Vec<String>) -> Nfa {
        Nfa { alphabet, delta: Vec::new(), initial: 0, accepting: Vec::new() }
    }

    pub fn add_state(&mut self, accepting: bool) -> usize {
        self.delta.push(vec![Vec::new(); self.alphabet.len()]);
        self.accepting.push(accepting);
        self.delta.len() - 1
    }

    pub fn add_transition(&mut self, from: usize, letter: usize, to: usize) {
        let targets = &mut self.delta[from][letter];
        if let Err(pos) = targets.binary_search(&to) {
            targets.insert(pos, to);
        }
    }

    pub fn set_initial(&mut self, state: usize) {
        self.initial = state;
    }

    pub fn set_accepting(&mut self, state: usize, accepting: bool) {
        self.accepting[state] = accepting;
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn letter_index(&self, letter: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == letter)
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    pub fn successors(&self, s: usize, letter: usize) -> &[usize] {
        &self.delta[s][letter]
    }

    pub fn is_deterministic(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(|t| t.len() == 1))
    }

    fn start_set(&self) -> BTreeSet<usize> {
        if self.delta.is_empty() {
            BTreeSet::new()
        } else {
            BTreeSet::from([self.initial])
        }
    }

    fn post(&self, set: &BTreeSet<usize>, letter: usize) -> BTreeSet<usize> {
        set.iter().flat_map(|&s| self.delta[s][letter].iter().copied()).collect()
    }

    pub fn accepts_indices(&self, word: &[usize]) -> bool {
        let mut set = self.start_set();
        for &a in word {
            set = self.post(&set, a);
        }
        set.iter().any(|&s| self.accepting[s])
    }

    /// Unknown letters reject.
    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        let idx: Option<Vec<usize>> = word.iter().map(|a| self.letter_index(a.as_ref())).collect();
        idx.is_some_and(|w| self.accepts_indices(&w))
    }

    /// Complete deterministic automaton by subset construction; the empty subset is the sink.
    pub fn determinize(&self, budget: usize) -> Result<Nfa> {
        let mut dfa = Nfa::new(self.alphabet.clone());
        let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::new();
        let mut subsets: Vec<BTreeSet<usize>> = Vec::new();
        let start = self.start_set();
        index.insert(start.clone(), 0);
        dfa.add_state(start.iter().any(|&s| self.accepting[s]));
        subsets.push(start);
        let mut i = 0;
        while i < subsets.len() {
            for a in 0..self.alphabet.len() {
                let next = self.post(&subsets[i], a);
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if subsets.len() >= budget {
                            return Err(Error::Budget { what: "determinization", limit: budget });
                        }
                        let j = dfa.add_state(next.iter().any(|&s| self.accepting[s]));
                        index.insert(next.clone(), j);
                        subsets.push(next);
                        j
                    }
                };
                dfa.add_transition(i, a, j);
            }
            i += 1;
        }
        Ok(dfa)
    }

    pub fn complement(&self, budget: usize) -> Result<Nfa> {
        let mut dfa = self.determinize(budget)?;
        for s in 0..dfa.num_states() {
            dfa.accepting[s] = !dfa.accepting[s];
        }
        Ok(dfa)
    }

    /// Synchronous product accepting the intersection. Alphabets must coincide.
    pub fn intersect(&self, other: &Nfa) -> Result<Nfa> {
        let other = other.aligned_to(&self.alphabet)?;
        let mut out = Nfa::new(self.alphabet.clone());
        if self.delta.is_empty() || other.delta.is_empty() {
            return Ok(out);
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let start = (self.initial, other.initial);
        index.insert(start, out.add_state(self.accepting[start.0] && other.accepting[start.1]));
        queue.push_back(start);
        while let Some((p, q)) = queue.pop_front() {
            let i = index[&(p, q)];
            for a in 0..self.alphabet.len() {
                for &p2 in &self.delta[p][a] {
                    for &q2 in &other.delta[q][a] {
                        let j = *index.entry((p2, q2)).or_insert_with(|| {
                            queue.push_back((p2, q2));
                            out.add_state(self.accepting[p2] && other.accepting[q2])
                        });
                        out.add_transition(i, a, j);
                    }
                }
            }
        }
        Ok(out)
    }

    /// A shortest accepted word, or `None` for the empty language.
    pub fn shortest_accepted(&self) -> Option<Vec<String>> {
        if self.delta.is_empty() {
            return None;
        }
        let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut seen = vec![false; self.num_states()];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            if self.accepting[s] {
                let mut word = Vec::new();
                let mut cur = s;
                while let Some(&(prev, a)) = parent.get(&cur) {
                    word.push(self.alphabet[a].clone());
                    cur = prev;
                }
                word.reverse();
                return Some(word);
            }
            for a in 0..self.alphabet.len() {
                for &t in &self.delta[s][a] {
                    if !seen[t] {
                        seen[t] = true;
                        parent.insert(t, (s, a));
                        queue.push_back(t);
                    }
                }
            }
        }
        None
    }

    /// Relabels letters to follow `alphabet`; both must hold the same letters.
    pub fn aligned_to(&self, alphabet: &[String]) -> Result<Nfa> {
        let mut a1: Vec<&String> = self.alphabet.iter().collect();
        let mut a2: Vec<&String> = alphabet.iter().collect();
        a1.sort();
        a2.sort();
        if a1 != a2 {
            return input("automata over different alphabets");
        }
        if self.alphabet == alphabet {
            return Ok(self.clone());
        }
        let map: Vec<usize> = alphabet.iter().map(|l| self.letter_index(l).unwrap()).collect();
        let delta = self
            .delta
            .iter()
            .map(|row| map.iter().map(|&old| row[old].clone()).collect())
            .collect();
        Ok(Nfa { alphabet: alphabet.to_vec(), delta, initial: self.initial, accepting: self.accepting.clone() })
    }

    /// Projection erasing `silent`.
    pub fn remove_silent(&self, silent: &str) -> Result<Nfa> {
        let Some(d) = self.letter_index(silent) else {
            return input(format!("`{silent}` is not in the alphabet"));
        };
        let closure = |s: usize| -> BTreeSet<usize> {
            let mut seen = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(p) = stack.pop() {
                for &q in &self.delta[p][d] {
                    if seen.insert(q) {
                        stack.push(q);
                    }
                }
            }
            seen
        };
        let keep: Vec<usize> = (0..self.alphabet.len()).filter(|&a| a != d).collect();
        let mut out = Nfa::new(keep.iter().map(|&a| self.alphabet[a].clone()).collect());
        let closures: Vec<BTreeSet<usize>> = (0..self.num_states()).map(closure).collect();
        for cl in &closures {
            out.add_state(cl.iter().any(|&p| self.accepting[p]));
        }
        for (s, cl) in closures.iter().enumerate() {
            for (na, &a) in keep.iter().enumerate() {
                for &p in cl {
                    for &q in &self.delta[p][a] {
                        out.add_transition(s, na, q);
                    }
                }
            }
        }
        out.initial = self.initial;
        Ok(out)
    }
}

/// Breadth-first search over the product of the two subset constructions.
/// `budget` bounds the number of explored subset pairs.
pub fn equivalent(left: &Nfa, right: &Nfa, budget: usize) -> Result<Equivalence> {
    let right = right.aligned_to(&left.alphabet)?;
    type Pair = (BTreeSet<usize>, BTreeSet<usize>);
    let start: Pair = (left.start_set(), right.start_set());
    let mut parent: HashMap<Pair, Option<(Pair, usize)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        let in_l = pair.0.iter().any(|&s| left.accepting[s]);
        let in_r = pair.1.iter().any(|&s| right.accepting[s]);
        if in_l != in_r {
            let mut word = Vec::new();
            let mut cur = pair;
            while let Some(Some((prev, a))) = parent.get(&cur).cloned() {
                word.push(left.alphabet[a].clone());
                cur = prev;
            }
            word.reverse();
            return Ok(Equivalence::Differ { word, in_left: in_l });
        }
        for a in 0..left.alphabet.len() {
            let next = (left.post(&pair.0, a), right.post(&pair.1, a));
            if !parent.contains_key(&next) {
                if parent.len() >= budget {
                    return Err(Error::Budget { what: "equivalence check", limit: budget });
                }
                parent.insert(next.clone(), Some((pair.clone(), a)));
                queue.push_back(next);
            }
        }
    }
    Ok(Equivalence::Equal)
}

/// All words over `letters` letters of length at most `max_len`, shortest first.
pub fn words_up_to(letters: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters);
        for w in &layer {
            for a in 0..letters {
                let mut w2: Vec<usize> = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
