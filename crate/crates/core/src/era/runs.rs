//! Exhaustive run enumeration and value traces, used to check the bounds of
//! the configuration semantics on small automata.

use super::{Configuration, Effect, ExtendedRAutomaton, Instruction};

/// Largest `N`, `M` and `P` entries seen along a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunMaxima {
    pub n: u64,
    pub m: u64,
    pub p: u64,
}

impl RunMaxima {
    fn absorb(self, c: &Configuration) -> RunMaxima {
        let top = |v: &[u64]| v.iter().copied().max().unwrap_or(0);
        RunMaxima { n: self.n.max(top(&c.n)), m: self.m.max(top(&c.m)), p: self.p.max(top(&c.p)) }
    }
}

/// Calls `visit` on every run of length at most `max_len` from the initial
/// configuration, with the configurations, the transition indices taken and
/// the maxima so far.
pub fn for_each_run<F>(r: &ExtendedRAutomaton, max_len: usize, mut visit: F)
where
    F: FnMut(&[Configuration], &[usize], RunMaxima),
{
    let c0 = r.initial_configuration();
    let mut confs = vec![c0.clone()];
    let mut taken = Vec::new();
    walk(r, max_len, &mut confs, &mut taken, RunMaxima::default().absorb(&c0), &mut visit);
}

fn walk<F>(
    r: &ExtendedRAutomaton,
    left: usize,
    confs: &mut Vec<Configuration>,
    taken: &mut Vec<usize>,
    maxima: RunMaxima,
    visit: &mut F,
) where
    F: FnMut(&[Configuration], &[usize], RunMaxima),
{
    visit(confs, taken, maxima);
    if left == 0 {
        return;
    }
    let cur = confs.last().unwrap().clone();
    for (i, t) in r.outgoing(cur.state) {
        let next = r.fire(&cur, t);
        let mx = maxima.absorb(&next);
        confs.push(next);
        taken.push(i);
        walk(r, left - 1, confs, taken, mx, visit);
        confs.pop();
        taken.pop();
    }
}

/// All maximal value traces starting with `counter` before the effect
/// `effects[0]`. Entry `k` of a trace is the counter holding the value after
/// `k` effects.
pub fn value_traces(effects: &[&Effect], counter: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![counter];
    extend(effects, &mut cur, &mut out);
    out
}

fn extend(effects: &[&Effect], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let pos = cur.len() - 1;
    if pos == effects.len() {
        out.push(cur.clone());
        return;
    }
    let a = *cur.last().unwrap();
    let t = effects[pos];
    let mut next: Vec<usize> = Vec::new();
    if t.0[a].is_plain() {
        next.push(a);
    }
    next.extend((0..t.len()).filter(|&b| t.0[b] == Instruction::Copy(a)));
    if next.is_empty() {
        out.push(cur.clone());
        return;
    }
    for b in next {
        cur.push(b);
        extend(effects, cur, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn counts_runs() {
        let r = samples::copy_reset();
        let mut runs = 0;
        for_each_run(&r, 2, |_, _, _| runs += 1);
        // ε, a(s1), a(s2), ab(s1), ab(s2), aa(s2)
        assert_eq!(runs, 6);
    }

    #[test]
    fn maxima_follow_counters() {
        let r = samples::copy_reset();
        let mut top = 0;
        for_each_run(&r, 4, |_, _, mx| top = top.max(mx.n));
        // a b b b through the s1 loop
        assert_eq!(top, 3);
    }

    #[test]
    fn traces_follow_copies() {
        let e1 = Effect::parse("0,*1").unwrap();
        let e2 = Effect::parse("r{},1").unwrap();
        let traces = value_traces(&[&e1, &e2], 0);
        assert_eq!(traces, vec![vec![0, 0], vec![0, 1, 1]]);
    }
}
