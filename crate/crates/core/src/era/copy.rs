//! Copy elimination: every copy becomes a reset, guessing which of the two
//! equal counters keeps the value. Parent pointers record the guesses and
//! effects that would contradict them lead to an error sink.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{EraTransition, Effect, ExtendedRAutomaton, Instruction};
use crate::error::{Error, Result};

/// Parent pointers over logical counters plus the map from logical
/// counters to the physical counters of the copy-free automaton.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointerState {
    pub pointers: Vec<Option<usize>>,
    pub perm: Vec<usize>,
}

impl PointerState {
    pub fn initial(n: usize) -> PointerState {
        PointerState { pointers: vec![None; n], perm: (0..n).collect() }
    }
}

/// Length of the pointer chain from `counter`; a cycle is an invariant violation.
pub fn rank(pointers: &[Option<usize>], counter: usize) -> Result<usize> {
    let mut cur = counter;
    for r in 0..=pointers.len() {
        match pointers[cur] {
            None => return Ok(r),
            Some(next) => cur = next,
        }
    }
    Err(Error::Invariant(format!("parent pointers form a cycle through counter {}", counter + 1)))
}

/// One way of simulating an effect without copies.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    /// Copy-free effect on physical counters.
    pub effect: Effect,
    pub state: PointerState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simulation {
    /// The effect contradicts the pointers.
    Error,
    Branches(Vec<Branch>),
}

enum Step {
    Plain(Effect),
    /// `target` takes the value of `source`.
    Copy { target: usize, source: usize },
    /// Logical counter `k` moves to `sigma[k]`.
    Rotate(Vec<usize>),
}

/// The plain part first, then tree copies leaf-first in ascending order, then cycles as rotations.
fn split(t: &Effect) -> Vec<Step> {
    let n = t.len();
    let mut steps = vec![Step::Plain(t.without_copies())];
    let mut edges: Vec<Option<usize>> = t.0.iter().map(|i| if let Instruction::Copy(j) = i { Some(*j) } else { None }).collect();
    loop {
        let leaf = (0..n).find(|&j| edges[j].is_some() && !edges.iter().any(|e| *e == Some(j)));
        let Some(j) = leaf else { break };
        steps.push(Step::Copy { target: j, source: edges[j].unwrap() });
        edges[j] = None;
    }
    if edges.iter().any(Option::is_some) {
        let mut sigma: Vec<usize> = (0..n).collect();
        for (target, src) in edges.iter().enumerate() {
            if let Some(s) = src {
                sigma[*s] = target;
            }
        }
        steps.push(Step::Rotate(sigma));
    }
    steps
}

struct Partial {
    effect: Vec<Instruction>,
    state: PointerState,
}

/// Simulates `t` from pointer state `from`.
pub fn simulate(t: &Effect, from: &PointerState) -> Simulation {
    let n = t.len();
    let mut partials = vec![Partial { effect: vec![Instruction::Nop; n], state: from.clone() }];
    for step in split(t) {
        let mut next = Vec::new();
        for Partial { mut effect, mut state } in partials {
            match &step {
                Step::Plain(e) => {
                    let bad = (0..n).any(|k| {
                        e.0[k].is_plain() && state.pointers[k].is_some_and(|l| !e.0[l].is_plain())
                    });
                    if bad {
                        return Simulation::Error;
                    }
                    for k in 0..n {
                        effect[state.perm[k]] = match &e.0[k] {
                            Instruction::Reset(a) => {
                                state.pointers[k] = None;
                                Instruction::Reset(a.iter().map(|&x| state.perm[x]).collect())
                            }
                            other => other.clone(),
                        };
                    }
                    next.push(Partial { effect, state });
                }
                &Step::Copy { target: i, source: j } => {
                    if (0..n).any(|k| k != i && state.pointers[k] == Some(i)) {
                        return Simulation::Error;
                    }
                    effect[state.perm[i]] = Instruction::reset();
                    // keep the value in j
                    let mut keep_j = state.clone();
                    keep_j.pointers[i] = Some(j);
                    next.push(Partial { effect: effect.clone(), state: keep_j });
                    // keep the value in i
                    let mut keep_i = state;
                    keep_i.perm.swap(i, j);
                    keep_i.pointers[i] = keep_i.pointers[j];
                    for p in keep_i.pointers.iter_mut() {
                        if *p == Some(j) {
                            *p = Some(i);
                        }
                    }
                    keep_i.pointers[j] = Some(i);
                    next.push(Partial { effect, state: keep_i });
                }
                Step::Rotate(sigma) => {
                    let mut rotated = PointerState { pointers: vec![None; n], perm: vec![0; n] };
                    for k in 0..n {
                        rotated.perm[sigma[k]] = state.perm[k];
                        rotated.pointers[sigma[k]] = state.pointers[k].map(|l| sigma[l]);
                    }
                    next.push(Partial { effect, state: rotated });
                }
            }
        }
        partials = next;
    }
    let mut branches: Vec<Branch> =
        partials.into_iter().map(|p| Branch { effect: Effect(p.effect), state: p.state }).collect();
    branches.sort();
    branches.dedup();
    Simulation::Branches(branches)
}

/// The copy-free automaton with a record of what each state and transition simulates.
#[derive(Clone, Debug)]
pub struct CopyFree {
    pub automaton: ExtendedRAutomaton,
    /// Original state and pointer state per state; `None` is the error sink.
    pub states: Vec<Option<(usize, PointerState)>>,
    /// Original transition per transition; `None` for error-sink edges.
    pub origin: Vec<Option<usize>>,
}

impl CopyFree {
    pub fn error_sink(&self) -> Option<usize> {
        self.states.iter().position(Option::is_none)
    }
}

/// Builds the reachable part of the copy-free automaton.
pub fn eliminate_copies(r: &ExtendedRAutomaton, budget: usize) -> Result<CopyFree> {
    let n = r.counters();
    let mut states: Vec<Option<(usize, PointerState)>> = Vec::new();
    let mut index: HashMap<Option<(usize, PointerState)>, usize> = HashMap::new();
    let mut raw: Vec<(EraTransition, Option<usize>)> = Vec::new();
    let start = Some((r.initial(), PointerState::initial(n)));
    index.insert(start.clone(), 0);
    states.push(start);
    let mut queue = VecDeque::from([0usize]);
    let mut intern = |key: Option<(usize, PointerState)>,
                      states: &mut Vec<Option<(usize, PointerState)>>,
                      queue: &mut VecDeque<usize>|
     -> Result<usize> {
        if let Some(&i) = index.get(&key) {
            return Ok(i);
        }
        if states.len() >= budget {
            return Err(Error::Budget { what: "copy elimination", limit: budget });
        }
        states.push(key.clone());
        index.insert(key, states.len() - 1);
        queue.push_back(states.len() - 1);
        Ok(states.len() - 1)
    };
    while let Some(i) = queue.pop_front() {
        let Some((s, ps)) = states[i].clone() else {
            for a in 0..r.alphabet().len() {
                raw.push((EraTransition { source: i, letter: a, effect: Effect::zero(n), target: i }, None));
            }
            continue;
        };
        for (ti, t) in r.outgoing(s) {
            match simulate(&t.effect, &ps) {
                Simulation::Error => {
                    let sink = intern(None, &mut states, &mut queue)?;
                    raw.push((EraTransition { source: i, letter: t.letter, effect: Effect::zero(n), target: sink }, Some(ti)));
                }
                Simulation::Branches(bs) => {
                    for b in bs {
                        let j = intern(Some((t.target, b.state)), &mut states, &mut queue)?;
                        raw.push((EraTransition { source: i, letter: t.letter, effect: b.effect, target: j }, Some(ti)));
                    }
                }
            }
        }
    }
    let name = |st: &Option<(usize, PointerState)>| match st {
        None => "ERROR".to_string(),
        Some((s, ps)) => {
            let ptr: Vec<String> =
                ps.pointers.iter().map(|p| p.map_or("-".to_string(), |x| (x + 1).to_string())).collect();
            let perm: Vec<String> = ps.perm.iter().map(|x| (x + 1).to_string()).collect();
            format!("{}#{}#{}", r.states()[*s], ptr.join("."), perm.join("."))
        }
    };
    let accepting: Vec<bool> = states.iter().map(|st| st.as_ref().is_some_and(|(s, _)| r.is_accepting(*s))).collect();
    let auxiliary: Vec<bool> = states.iter().map(|st| st.as_ref().is_some_and(|(s, _)| r.is_auxiliary(*s))).collect();
    // keep the origin aligned with the sorted transition list
    let mut seen = BTreeSet::new();
    raw.retain(|(t, _)| seen.insert(t.clone()));
    raw.sort_by(|a, b| a.0.cmp(&b.0));
    let origin = raw.iter().map(|(_, o)| *o).collect();
    let automaton = ExtendedRAutomaton::from_parts(
        states.iter().map(name).collect(),
        r.alphabet().to_vec(),
        n,
        0,
        accepting,
        auxiliary,
        r.restricted_max(),
        raw.into_iter().map(|(t, _)| t).collect(),
    );
    Ok(CopyFree { automaton, states, origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    fn ptrs(v: &[Option<usize>]) -> Vec<Option<usize>> {
        // 1-based to 0-based
        v.iter().map(|p| p.map(|x| x - 1)).collect()
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&[None, None], 1).unwrap(), 0);
        let chain = ptrs(&[Some(2), Some(3), None]);
        assert_eq!((0..3).map(|c| rank(&chain, c).unwrap()).collect::<Vec<_>>(), vec![2, 1, 0]);
        assert!(rank(&ptrs(&[Some(2), Some(1)]), 0).is_err());
    }

    #[test]
    fn two_choices_for_one_copy() {
        let from = PointerState { pointers: ptrs(&[Some(2), Some(5), None, Some(1), None]), perm: (0..5).collect() };
        let t = Effect::parse("1,0,*2,r,1").unwrap();
        let Simulation::Branches(bs) = simulate(&t, &from) else { panic!("error sink") };
        assert_eq!(bs.len(), 2);
        let expected = Effect::parse("1,0,r,r,1").unwrap();
        let keep_2 = bs.iter().find(|b| b.state.perm == vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(keep_2.effect, expected);
        assert_eq!(keep_2.state.pointers, ptrs(&[Some(2), Some(5), Some(2), None, None]));
        assert_eq!(rank(&keep_2.state.pointers, 2).unwrap(), rank(&keep_2.state.pointers, 1).unwrap() + 1);
        let keep_3 = bs.iter().find(|b| b.state.perm == vec![0, 2, 1, 3, 4]).unwrap();
        assert_eq!(keep_3.effect, expected);
        assert_eq!(keep_3.state.pointers, ptrs(&[Some(3), Some(3), Some(5), None, None]));
        // physical values (2,5,7,4,8): the logical counter 3 now holds the old value of 2
        let phys = crate::era::apply_effect(&[2, 5, 7, 4, 8], &keep_3.effect);
        let logical: Vec<u64> = keep_3.state.perm.iter().map(|&p| phys[p]).collect();
        assert_eq!(logical, vec![3, 0, 5, 0, 9]);
    }

    #[test]
    fn contradicted_pointer_goes_to_sink() {
        // counter 1 points at 2, which gets reset while 1 stays
        let from = PointerState { pointers: ptrs(&[Some(2), None]), perm: vec![0, 1] };
        assert_eq!(simulate(&Effect::parse("0,r").unwrap(), &from), Simulation::Error);
    }

    #[test]
    fn swap_rotates_values() {
        let t = Effect::parse("*2,*1").unwrap();
        let Simulation::Branches(bs) = simulate(&t, &PointerState::initial(2)) else { panic!() };
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].state.perm, vec![1, 0]);
        assert_eq!(bs[0].effect, Effect::zero(2));
    }

    #[test]
    fn copy_free_input_is_unchanged() {
        let r = ExtendedRAutomaton::builder(2)
            .alphabet(["a", "b"])
            .initial("p")
            .accepting(["q"])
            .transition("p", "q", "a", "1,0")
            .transition("q", "q", "b", "r{},1")
            .build()
            .unwrap();
        let hat = eliminate_copies(&r, 1000).unwrap();
        assert_eq!(hat.automaton.states().len(), 2);
        assert!(hat.error_sink().is_none());
        for w in crate::fa::words_up_to(2, 5) {
            assert_eq!(hat.automaton.min_bound_indices(&w), r.min_bound_indices(&w));
        }
    }

    #[test]
    fn gadget_without_copies() {
        let r = samples::copy_reset();
        let hat = eliminate_copies(&r, 1000).unwrap();
        assert!(!hat.automaton.has_copies());
        for w in crate::fa::words_up_to(2, 6) {
            let (c, ch) = (r.min_bound_indices(&w), hat.automaton.min_bound_indices(&w));
            match (c, ch) {
                (Some(c), Some(ch)) => assert!(ch <= c && c <= 2 * ch),
                (None, None) => {}
                _ => panic!("languages differ on {w:?}"),
            }
        }
    }
}
