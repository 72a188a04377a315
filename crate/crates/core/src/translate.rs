//! From a timed automaton to a δ-free extended R-automaton whose counters
//! bound the fractional distances between clocks in units of ε.

use std::collections::BTreeSet;

use crate::era::{EraTransition, Effect, ExtendedRAutomaton, Instruction};
use crate::error::{input, Error, Result};
use crate::region::{EdgeLabel, RegionGraph};
use crate::ta::{Atom, Cmp, Guard, TimedAutomaton, Transition, DELTA};

/// Splits every transition into one transition per clock, each resetting at most one clock.
/// A word `w` is accepted by the input iff `w` with each letter repeated `|C|` times is accepted by the output.
pub fn remove_multiple_resets(ta: &TimedAutomaton) -> TimedAutomaton {
    let steps = ta.clocks().len().max(1);
    let mut locations = ta.locations().to_vec();
    let mut accepting: Vec<bool> = (0..locations.len()).map(|l| ta.is_accepting(l)).collect();
    let mut transitions = Vec::new();
    for (ti, t) in ta.transitions().iter().enumerate() {
        let mut chain = vec![t.source];
        for k in 1..steps {
            locations.push(format!("{}~{}~{}", ta.locations()[t.source], ti, k));
            accepting.push(false);
            chain.push(locations.len() - 1);
        }
        chain.push(t.target);
        for k in 0..steps {
            let guard = match t.resets.first() {
                Some(&first) if k > 0 => Guard::new(vec![
                    Atom { clock: first, cmp: Cmp::Le, constant: 0 },
                    Atom { clock: first, cmp: Cmp::Ge, constant: 0 },
                ]),
                _ => t.guard.clone(),
            };
            let resets = t.resets.get(k).map(|&c| vec![c]).unwrap_or_default();
            transitions.push(Transition { source: chain[k], letter: t.letter, guard, resets, target: chain[k + 1] });
        }
    }
    TimedAutomaton::from_parts(
        locations,
        ta.alphabet().to_vec(),
        ta.clocks().to_vec(),
        ta.initial(),
        accepting,
        transitions,
    )
}

/// Role of an ERA state built from a region graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateTag {
    /// A region-graph node.
    Complete { node: usize },
    /// The first or second intermediate state of a discrete edge.
    Auxiliary { edge: usize, index: u8 },
}

/// Index of the counter `C_xy` among `clocks` clocks.
pub fn counter_index(clocks: usize, x: usize, y: usize) -> usize {
    debug_assert!(x != y);
    x * (clocks - 1) + if y < x { y } else { y - 1 }
}

/// `(x, y)` for every counter, in index order.
pub fn counter_pairs(clocks: usize) -> Vec<(usize, usize)> {
    (0..clocks).flat_map(|x| (0..clocks).filter(move |&y| y != x).map(move |y| (x, y))).collect()
}

struct Plan {
    c: usize,
    steps: [Vec<Instruction>; 3],
}

impl Plan {
    fn new(c: usize) -> Plan {
        let n = c * (c - 1);
        Plan { c, steps: [vec![Instruction::Nop; n], vec![Instruction::Nop; n], vec![Instruction::Nop; n]] }
    }

    fn idx(&self, x: usize, y: usize) -> usize {
        counter_index(self.c, x, y)
    }

    fn set(&mut self, x: usize, y: usize, ins: [Instruction; 3]) {
        let i = self.idx(x, y);
        for (k, e) in ins.into_iter().enumerate() {
            self.steps[k][i] = e;
        }
    }

    fn copy(&mut self, (x, y): (usize, usize), (fx, fy): (usize, usize), step: usize) {
        let mut ins = [Instruction::Nop, Instruction::Nop, Instruction::Nop];
        ins[step] = Instruction::Copy(self.idx(fx, fy));
        if step == 0 {
            ins[1] = Instruction::Inc;
        }
        self.set(x, y, ins);
    }

    fn reset_then_inc(&mut self, (x, y): (usize, usize), below: &[(usize, usize)]) {
        let set: BTreeSet<usize> = below.iter().filter(|(u, v)| u != v).map(|&(u, v)| self.idx(u, v)).collect();
        self.set(x, y, [Instruction::Nop, Instruction::Reset(set), Instruction::Inc]);
    }

    fn effects(self) -> [Effect; 3] {
        let [a, b, c] = self.steps;
        [Effect(a), Effect(b), Effect(c)]
    }
}

/// The three effects for a discrete edge from a region with the given
/// blocks (and zero flag) that resets clock `x`.
fn reset_effects(c: usize, blocks: &[Vec<usize>], zero_first: bool, x: usize) -> [Effect; 3] {
    let n = c * (c - 1);
    let zero = || [Effect::zero(n), Effect::zero(n), Effect::zero(n)];
    let pos = |u: usize| blocks.iter().position(|b| b.contains(&u)).unwrap();
    if zero_first && pos(x) == 0 {
        return zero();
    }
    let others: Vec<usize> = (0..c).filter(|&u| u != x).collect();
    let mut plan = Plan::new(c);
    let first_of = |b: usize| blocks[b].iter().copied().find(|&u| u != x);

    if zero_first {
        let a = first_of(0).unwrap();
        plan.set(a, x, [Instruction::reset(), Instruction::Nop, Instruction::Nop]);
        plan.set(x, a, [Instruction::reset(), Instruction::Nop, Instruction::Nop]);
        for &u in others.iter().filter(|&&u| u != a) {
            if pos(u) == 0 {
                plan.set(u, x, [Instruction::reset(), Instruction::Nop, Instruction::Nop]);
                plan.set(x, u, [Instruction::reset(), Instruction::Nop, Instruction::Nop]);
            } else {
                let cu = Instruction::Copy(plan.idx(u, a));
                plan.set(u, x, [cu, Instruction::Nop, Instruction::Nop]);
                let cx = Instruction::Copy(plan.idx(a, u));
                plan.set(x, u, [cx, Instruction::Nop, Instruction::Nop]);
            }
        }
        return plan.effects();
    }

    let px = pos(x);
    let last = blocks.len() - 1;
    let alone = blocks[px].len() == 1;
    if blocks.len() == 1 {
        // every other clock shares the fraction of x
        let rep = others[0];
        plan.set(x, rep, [Instruction::Inc, Instruction::Nop, Instruction::Nop]);
        plan.reset_then_inc((rep, x), &[]);
        for &u in others.iter().filter(|&&u| u != rep) {
            plan.copy((x, u), (x, rep), 2);
            plan.copy((u, x), (rep, x), 2);
        }
    } else if alone && px == 0 {
        let a = first_of(1).unwrap();
        let d = first_of(last).unwrap();
        for &u in &others {
            plan.set(x, u, [Instruction::Inc, Instruction::Nop, Instruction::Nop]);
        }
        let mut below = vec![(d, a)];
        for &u in others.iter().filter(|&&u| u != d) {
            if pos(u) == last {
                plan.copy((u, x), (d, x), 2);
            } else {
                plan.copy((u, x), (u, d), 0);
                below.push((u, x));
            }
        }
        plan.reset_then_inc((d, x), &below);
    } else if alone && px == last {
        let a = first_of(0).unwrap();
        let d = first_of(last - 1).unwrap();
        for &u in &others {
            plan.set(u, x, [Instruction::Inc, Instruction::Nop, Instruction::Nop]);
        }
        let mut below = vec![(d, a)];
        for &u in others.iter().filter(|&&u| u != a) {
            if pos(u) == 0 {
                plan.copy((x, u), (x, a), 2);
            } else {
                plan.copy((x, u), (a, u), 0);
                below.push((x, u));
            }
        }
        plan.reset_then_inc((x, a), &below);
    } else {
        let a = first_of(0).unwrap();
        let d = first_of(last).unwrap();
        let mut below_a = vec![(d, a)];
        let mut below_d = vec![(d, a)];
        for &u in others.iter().filter(|&&u| u != a) {
            if pos(u) == 0 {
                plan.copy((x, u), (x, a), 2);
            } else {
                plan.copy((x, u), (a, u), 0);
                below_a.push((x, u));
            }
        }
        for &u in others.iter().filter(|&&u| u != d) {
            if pos(u) == last {
                plan.copy((u, x), (d, x), 2);
            } else {
                plan.copy((u, x), (u, d), 0);
                below_d.push((u, x));
            }
        }
        plan.reset_then_inc((x, a), &below_a);
        plan.reset_then_inc((d, x), &below_d);
    }
    plan.effects()
}

/// The region-graph automaton with counters `C_xy`, one state per node and
/// two auxiliary states per discrete edge. Max is applied only on entering
/// node states and uses the restricted sum rule.
pub fn build_era(graph: &RegionGraph) -> Result<(ExtendedRAutomaton, Vec<StateTag>)> {
    let c = graph.clocks().len();
    if c < 2 {
        return input("the counter construction needs at least two clocks");
    }
    let n = c * (c - 1);
    let mut alphabet = graph.alphabet().to_vec();
    alphabet.push(DELTA.to_string());
    let delta = alphabet.len() - 1;
    let mut states: Vec<String> = (0..graph.nodes().len()).map(|i| graph.node_label(i)).collect();
    let mut tags: Vec<StateTag> = (0..states.len()).map(|node| StateTag::Complete { node }).collect();
    let mut transitions = Vec::new();
    for (e, edge) in graph.edges().iter().enumerate() {
        match edge.label {
            EdgeLabel::Delta => transitions.push(EraTransition {
                source: edge.from,
                letter: delta,
                effect: Effect::zero(n),
                target: edge.to,
            }),
            EdgeLabel::Letter(a) => {
                if edge.resets.len() > 1 {
                    return input("a region-graph edge resets more than one clock");
                }
                let source = &graph.nodes()[edge.from].1;
                let effects = match edge.resets.first() {
                    None => [Effect::zero(n), Effect::zero(n), Effect::zero(n)],
                    Some(&x) => reset_effects(c, source.blocks(), source.has_zero_block(), x),
                };
                let q1 = states.len();
                states.push(format!("aux{e}.1"));
                tags.push(StateTag::Auxiliary { edge: e, index: 1 });
                states.push(format!("aux{e}.2"));
                tags.push(StateTag::Auxiliary { edge: e, index: 2 });
                let chain = [edge.from, q1, q1 + 1, edge.to];
                for (k, effect) in effects.into_iter().enumerate() {
                    transitions.push(EraTransition { source: chain[k], letter: a, effect, target: chain[k + 1] });
                }
            }
        }
    }
    let accepting = tags
        .iter()
        .map(|t| matches!(t, StateTag::Complete { node } if graph.is_accepting(*node)))
        .collect();
    let auxiliary = tags.iter().map(|t| matches!(t, StateTag::Auxiliary { .. })).collect();
    let era = ExtendedRAutomaton::from_parts(states, alphabet, n, 0, accepting, auxiliary, true, transitions);
    Ok((era, tags))
}

/// Removes the silent letter: each δ-path followed by a letter transition
/// becomes one transition. δ-transitions must carry the zero effect.
pub fn remove_delta(r: &ExtendedRAutomaton) -> Result<ExtendedRAutomaton> {
    let Some(d) = r.letter_index(DELTA) else {
        return Ok(r.clone());
    };
    for t in r.transitions().iter().filter(|t| t.letter == d) {
        if t.effect.0.iter().any(|i| *i != Instruction::Nop) {
            return Err(Error::Invariant(format!("δ-transition with effect {}", t.effect)));
        }
    }
    let remap = |a: usize| if a > d { a - 1 } else { a };
    let ns = r.states().len();
    let mut accepting = vec![false; ns];
    let mut transitions = Vec::new();
    for s in 0..ns {
        let mut closure = BTreeSet::from([s]);
        let mut stack = vec![s];
        while let Some(p) = stack.pop() {
            for (_, t) in r.outgoing(p).filter(|(_, t)| t.letter == d) {
                if closure.insert(t.target) {
                    stack.push(t.target);
                }
            }
        }
        accepting[s] = closure.iter().any(|&p| r.is_accepting(p));
        for &p in &closure {
            for (_, t) in r.outgoing(p).filter(|(_, t)| t.letter != d) {
                transitions.push(EraTransition {
                    source: s,
                    letter: remap(t.letter),
                    effect: t.effect.clone(),
                    target: t.target,
                });
            }
        }
    }
    let alphabet = r.alphabet().iter().filter(|a| *a != DELTA).cloned().collect();
    let auxiliary = (0..ns).map(|s| r.is_auxiliary(s)).collect();
    Ok(ExtendedRAutomaton::from_parts(
        r.states().to_vec(),
        alphabet,
        r.counters(),
        r.initial(),
        accepting,
        auxiliary,
        r.restricted_max(),
        transitions,
    ))
}

fn edge_chains(graph: &RegionGraph, era: &ExtendedRAutomaton, tags: &[StateTag]) -> Result<Vec<Vec<usize>>> {
    let mut chains = vec![Vec::new(); graph.edges().len()];
    let mut parts = vec![[None; 3]; graph.edges().len()];
    for (i, t) in era.transitions().iter().enumerate() {
        match (tags[t.source], tags[t.target]) {
            (StateTag::Complete { .. }, StateTag::Auxiliary { edge, index: 1 }) => parts[edge][0] = Some(i),
            (StateTag::Auxiliary { edge, index: 1 }, _) => parts[edge][1] = Some(i),
            (StateTag::Auxiliary { edge, index: 2 }, _) => parts[edge][2] = Some(i),
            _ => {}
        }
    }
    for (e, edge) in graph.edges().iter().enumerate() {
        chains[e] = match edge.label {
            EdgeLabel::Delta => era
                .outgoing(edge.from)
                .filter(|(_, t)| t.target == edge.to && era.alphabet()[t.letter] == DELTA)
                .map(|(i, _)| i)
                .take(1)
                .collect(),
            EdgeLabel::Letter(_) => parts[e].iter().flatten().copied().collect(),
        };
        let want = if edge.label == EdgeLabel::Delta { 1 } else { 3 };
        if chains[e].len() != want {
            return Err(Error::Invariant(format!("region edge {e} has {} counter transitions", chains[e].len())));
        }
    }
    Ok(chains)
}

/// Repeats every letter `factor` times.
pub fn expand<S: AsRef<str>>(word: &[S], factor: usize) -> Vec<String> {
    word.iter().flat_map(|a| std::iter::repeat_n(a.as_ref().to_string(), factor)).collect()
}

/// Inverse of [`expand`].
pub fn contract<S: AsRef<str>>(word: &[S], factor: usize) -> Result<Vec<String>> {
    if factor == 0 || word.len() % factor != 0 {
        return Err(Error::Format(format!("length {} is not a multiple of {factor}", word.len())));
    }
    word.chunks(factor)
        .map(|block| {
            let first = block[0].as_ref();
            if block.iter().all(|a| a.as_ref() == first) {
                Ok(first.to_string())
            } else {
                Err(Error::Format(format!("block `{}` is not constant", block.iter().map(|a| a.as_ref()).collect::<Vec<_>>().join(" "))))
            }
        })
        .collect()
}

pub fn triple<S: AsRef<str>>(word: &[S]) -> Vec<String> {
    expand(word, 3)
}

pub fn untriple<S: AsRef<str>>(word: &[S]) -> Result<Vec<String>> {
    contract(word, 3)
}

/// Every stage from a timed automaton with at least two clocks to the δ-free automaton.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub original: TimedAutomaton,
    pub single_reset: TimedAutomaton,
    pub graph: RegionGraph,
    pub era: ExtendedRAutomaton,
    pub tags: Vec<StateTag>,
    pub era_no_delta: ExtendedRAutomaton,
    /// Indices into `era.transitions()` simulating each region-graph edge.
    pub chains: Vec<Vec<usize>>,
}

impl Pipeline {
    pub fn build(ta: &TimedAutomaton) -> Result<Pipeline> {
        if ta.clocks().len() < 2 {
            return input("the pipeline needs at least two clocks");
        }
        let single_reset = remove_multiple_resets(ta);
        let graph = RegionGraph::build(&single_reset);
        let (era, tags) = build_era(&graph)?;
        let era_no_delta = remove_delta(&era)?;
        let chains = edge_chains(&graph, &era, &tags)?;
        Ok(Pipeline { original: ta.clone(), single_reset, graph, era, tags, era_no_delta, chains })
    }

    pub fn clocks(&self) -> usize {
        self.original.clocks().len()
    }

    /// Letters of the δ-free automaton per letter of the timed automaton.
    pub fn factor(&self) -> usize {
        3 * self.clocks()
    }

    /// `C_xy` by clock names.
    pub fn counter(&self, x: &str, y: &str) -> Option<usize> {
        let (i, j) = (self.original.clock_index(x)?, self.original.clock_index(y)?);
        (i != j).then(|| counter_index(self.clocks(), i, j))
    }

    pub fn counter_names(&self) -> Vec<String> {
        let names = self.original.clocks();
        counter_pairs(self.clocks()).into_iter().map(|(x, y)| format!("C_{}{}", names[x], names[y])).collect()
    }

    /// Maps complete ERA states to region-graph nodes.
    pub fn node_of(&self, state: usize) -> Option<usize> {
        match self.tags[state] {
            StateTag::Complete { node } => Some(node),
            StateTag::Auxiliary { .. } => None,
        }
    }
}
