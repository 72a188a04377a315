//! Generators and co-simulation shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsa::era::{apply_effect, Configuration, Effect, ExtendedRAutomaton, Instruction};
use tsa::region::{frac_distance, EdgeLabel, FracRel, Region};
use tsa::ta::{ClockValuation, TimedAutomaton};
use tsa::translate::{counter_index, Pipeline};
use tsa::Rational64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_instruction(rng: &mut impl Rng, n: usize, i: usize, copies: bool) -> Instruction {
    match rng.gen_range(0..if copies { 5 } else { 4 }) {
        0 | 1 => Instruction::Nop,
        2 => Instruction::Inc,
        3 => Instruction::Reset((0..n).filter(|_| rng.gen_bool(0.3)).collect()),
        _ => {
            let j = rng.gen_range(0..n);
            if j == i {
                Instruction::Nop
            } else {
                Instruction::Copy(j)
            }
        }
    }
}

pub fn random_effect(rng: &mut impl Rng, n: usize, copies: bool) -> Effect {
    Effect((0..n).map(|i| random_instruction(rng, n, i, copies)).collect())
}

/// Alphabet {a, b}, at most `max_states` states, at most three counters, copies allowed.
pub fn random_era(rng: &mut impl Rng, max_states: usize) -> ExtendedRAutomaton {
    let n = rng.gen_range(1..=3);
    let states = rng.gen_range(1..=max_states);
    let mut b = ExtendedRAutomaton::builder(n).alphabet(["a", "b"]).initial("s0");
    let names: Vec<String> = (0..states).map(|s| format!("s{s}")).collect();
    let acc: Vec<&String> = names.iter().filter(|_| rng.gen_bool(0.5)).collect();
    b = b.accepting(acc.iter().map(|s| s.as_str()));
    let edges = rng.gen_range(states..=states + 3);
    for _ in 0..edges {
        let from = &names[rng.gen_range(0..states)];
        let to = &names[rng.gen_range(0..states)];
        let letter = if rng.gen_bool(0.5) { "a" } else { "b" };
        let eff = random_effect(rng, n, true).to_string();
        b = b.transition(from, to, letter, &eff);
    }
    b.build().unwrap()
}

fn random_guard(rng: &mut impl Rng, clocks: &[&str], max_c: u32) -> String {
    let ops = ["<", "<=", ">", ">=", "="];
    let atoms: Vec<String> = (0..rng.gen_range(0..=2))
        .map(|_| {
            let c = clocks.choose(rng).unwrap();
            let op = ops.choose(rng).unwrap();
            format!("{c}{op}{}", rng.gen_range(0..=max_c))
        })
        .collect();
    if atoms.is_empty() {
        "true".into()
    } else {
        atoms.join(" & ")
    }
}

/// Alphabet {a, b}, at most `max_locs` locations, constants at most `max_c`.
pub fn random_ta(rng: &mut impl Rng, clocks: &[&str], max_locs: usize, max_c: u32) -> TimedAutomaton {
    let locs = rng.gen_range(1..=max_locs);
    let names: Vec<String> = (0..locs).map(|l| format!("l{l}")).collect();
    let mut b = TimedAutomaton::builder().clocks(clocks.iter().copied()).alphabet(["a", "b"]).initial("l0");
    let acc: Vec<&String> = names.iter().filter(|_| rng.gen_bool(0.5)).collect();
    b = b.accepting(acc.iter().map(|s| s.as_str()));
    for _ in 0..rng.gen_range(locs..=locs + 3) {
        let from = &names[rng.gen_range(0..locs)];
        let to = &names[rng.gen_range(0..locs)];
        let letter = if rng.gen_bool(0.5) { "a" } else { "b" };
        let guard = random_guard(rng, clocks, max_c);
        let resets: Vec<&str> = clocks.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
        b = b.edge(from, to, letter, &guard, &resets);
    }
    b.build().unwrap()
}

pub fn idx(c: usize, x: usize, y: usize) -> usize {
    counter_index(c, x, y)
}

/// Counter-transitivity on the P̄ values of a complete configuration in region `d`.
pub fn transitivity_violation(d: &Region, p: &[u64]) -> Option<String> {
    let c = d.clocks();
    for x in 0..c {
        for y in (0..c).filter(|&y| y != x) {
            let (xy, yx) = (p[idx(c, x, y)], p[idx(c, y, x)]);
            if d.satisfies(x, FracRel::Eq, y) {
                if xy != 0 {
                    return Some(format!("(ii) C_{x}{y} = {xy} with equal fractions"));
                }
                for u in (0..c).filter(|&u| u != x && u != y) {
                    if p[idx(c, x, u)] != p[idx(c, y, u)] || p[idx(c, u, x)] != p[idx(c, u, y)] {
                        return Some(format!("(ii) clocks {x},{y} tie but differ through {u}"));
                    }
                }
            } else if xy < 1 || yx < 1 {
                return Some(format!("(iii) C_{x}{y} = {xy}, C_{y}{x} = {yx} with distinct fractions"));
            }
            for z in (0..c).filter(|&z| z != x && z != y) {
                if d.between(x, y, z) && xy + p[idx(c, y, z)] > p[idx(c, x, z)] {
                    return Some(format!("(i) C_{x}{y} + C_{y}{z} > C_{x}{z} in {p:?}"));
                }
            }
        }
    }
    None
}

/// Checks the max step of one complete-to-complete move.
/// `before` is the previous complete P̄, `pre_max` the P̄ after the effects and `after` the final one.
pub fn max_step_violation(d: &Region, before: &[u64], pre_max: &[u64], after: &[u64]) -> Option<String> {
    let c = d.clocks();
    for u in 0..c {
        for v in (0..c).filter(|&v| v != u) {
            let i = idx(c, u, v);
            if after[i] == pre_max[i] {
                continue;
            }
            if !(d.satisfies(v, FracRel::Lt, u) && !d.is_zero(v)) {
                return Some(format!("max changed C_{u}{v} outside fr(v) < fr(u), fr(v) > 0"));
            }
            if after[i] != before[i] + 1 {
                return Some(format!("max moved C_{u}{v} from {} to {}", before[i], after[i]));
            }
            let split = (0..c).filter(|&w| w != u && w != v).any(|w| after[i] == after[idx(c, u, w)] + after[idx(c, w, v)]);
            if !split {
                return Some(format!("max value of C_{u}{v} is not a sum through a third clock"));
            }
        }
    }
    None
}

/// Fires the chain of region-graph edge `e`; returns the final configuration and the P̄ before the max step.
pub fn fire_chain(p: &Pipeline, conf: &Configuration, e: usize) -> (Configuration, Vec<u64>) {
    let chain = &p.chains[e];
    let mut cur = conf.clone();
    let mut pre = Vec::new();
    for (k, &ti) in chain.iter().enumerate() {
        let t = &p.era.transitions()[ti];
        if k + 1 == chain.len() {
            pre = apply_effect(&cur.p, &t.effect);
        }
        cur = p.era.fire(&cur, t);
    }
    (cur, pre)
}

/// Visits every complete configuration reachable in at most `depth` edges of the region graph,
/// with the previous complete configuration and the P̄ before the max step.
pub fn for_each_complete_step(
    p: &Pipeline,
    depth: usize,
    mut visit: impl FnMut(Option<(&Configuration, &[u64])>, &Configuration, usize),
) -> usize {
    let start = p.era.initial_configuration();
    visit(None, &start, 0);
    let mut seen: HashSet<(usize, Configuration)> = HashSet::from([(0, start.clone())]);
    let mut layer = vec![(0usize, start)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (node, conf) in &layer {
            for e in p.graph.outgoing(*node) {
                let ei = p.graph.edges().iter().position(|x| x == e).unwrap();
                let (c2, pre) = fire_chain(p, conf, ei);
                visit(Some((conf, &pre)), &c2, e.to);
                if seen.insert((e.to, c2.clone())) {
                    next.push((e.to, c2));
                }
            }
        }
        layer = next;
    }
    seen.len()
}

fn valuation(ticks: &[u64], k: u32) -> ClockValuation {
    ClockValuation::new(ticks.iter().map(|&t| Rational64::new(t as i64, k as i64)).collect()).unwrap()
}

/// Walks every ε-sampled run of the single-reset automaton with at most `steps`
/// discrete steps alongside the counter automaton, calling `check` at every
/// concrete state with the complete configuration of its region.
pub fn cosimulate(
    p: &Pipeline,
    k: u32,
    steps: usize,
    mut check: impl FnMut(&ClockValuation, &Configuration, usize),
) -> usize {
    let ta = &p.single_reset;
    let g = &p.graph;
    let kmax = g.max_constant();
    let cap = (kmax as u64 + 1) * k as u64;
    let clamp = |t: u64| if t > cap { cap + t % k as u64 } else { t };
    let delta_edge = |node: usize| g.edges().iter().position(|e| e.from == node && e.label == EdgeLabel::Delta);
    let c = ta.clocks().len();
    let start = (ta.initial(), vec![0u64; c], 0usize, p.era.initial_configuration());
    check(&valuation(&start.1, k), &start.3, 0);
    let mut seen = HashSet::from([start.clone()]);
    let mut layer = vec![start];
    for _ in 0..steps {
        let mut next = Vec::new();
        for (loc, ticks, node, conf) in &layer {
            let (mut ticks, mut node, mut conf) = (ticks.clone(), *node, conf.clone());
            for delay in 0..=cap {
                if delay > 0 {
                    ticks.iter_mut().for_each(|t| *t = clamp(*t + 1));
                    let target = Region::of(&valuation(&ticks, k), kmax);
                    for guard in 0.. {
                        if g.nodes()[node].1 == target {
                            break;
                        }
                        assert!(guard < 64, "time successors never reach {target:?}");
                        let e = delta_edge(node).expect("time successor edge");
                        conf = fire_chain(p, &conf, e).0;
                        node = g.edges()[e].to;
                    }
                    check(&valuation(&ticks, k), &conf, node);
                }
                let v = valuation(&ticks, k);
                for t in ta.transitions().iter().filter(|t| t.source == *loc) {
                    if !t.guard.satisfied_by(&v).unwrap() {
                        continue;
                    }
                    let v2 = v.reset(&t.resets);
                    let to = g.node(t.target, &Region::of(&v2, kmax)).expect("reachable region");
                    let e = g
                        .edges()
                        .iter()
                        .position(|e| {
                            e.from == node && e.label == EdgeLabel::Letter(t.letter) && e.to == to && e.resets == t.resets
                        })
                        .expect("region edge");
                    let c2 = fire_chain(p, &conf, e).0;
                    let mut t2 = ticks.clone();
                    t.resets.iter().for_each(|&x| t2[x] = 0);
                    check(&v2, &c2, to);
                    let s = (t.target, t2, to, c2);
                    if seen.insert(s.clone()) {
                        next.push(s);
                    }
                }
            }
        }
        layer = next;
    }
    seen.len()
}

/// ⟨ν⟩_xy ≥ C_xy·ε for all clock pairs.
pub fn cost_violation(v: &ClockValuation, conf: &Configuration, k: u32) -> Option<String> {
    let c = v.len();
    for x in 0..c {
        for y in (0..c).filter(|&y| y != x) {
            let dist = frac_distance(v, x, y).unwrap();
            let need = Rational64::new(conf.p[idx(c, x, y)] as i64, k as i64);
            if dist < need {
                return Some(format!("distance {x}->{y} is {dist} below {need} at {:?}", v.values()));
            }
        }
    }
    None
}
