//! Regions with fractional parts tracked above the largest constant, and the region graph.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::Zero;

use crate::error::Result;
use crate::fa::Nfa;
use crate::ta::{ClockValuation, Cmp, Guard, SamplingRate, TimedAutomaton, DELTA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntPart {
    Exact(u32),
    /// Strictly above the largest constant.
    Above,
}

/// Comparison of fractional parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FracRel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

/// A canonical region: integral parts plus the ordered blocks of equal fractional parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    ints: Vec<IntPart>,
    /// Each block is sorted by clock index. Ordered by increasing fractional part.
    blocks: Vec<Vec<usize>>,
    /// The first block has fractional part 0.
    zero_first: bool,
}

fn floor(v: Rational64) -> i64 {
    v.floor().to_integer()
}

impl Region {
    /// The region of the all-zero valuation.
    pub fn initial(clocks: usize) -> Region {
        Region {
            ints: vec![IntPart::Exact(0); clocks],
            blocks: if clocks == 0 { vec![] } else { vec![(0..clocks).collect()] },
            zero_first: clocks > 0,
        }
    }

    pub fn of(v: &ClockValuation, k: u32) -> Region {
        let mut ints = Vec::with_capacity(v.len());
        let mut fracs: Vec<(Rational64, usize)> = Vec::with_capacity(v.len());
        for (c, &x) in v.values().iter().enumerate() {
            let i = floor(x);
            ints.push(if x > Rational64::from_integer(k as i64) { IntPart::Above } else { IntPart::Exact(i as u32) });
            fracs.push((x - Rational64::from_integer(i), c));
        }
        fracs.sort();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut last: Option<Rational64> = None;
        for (f, c) in &fracs {
            if last == Some(*f) {
                blocks.last_mut().unwrap().push(*c);
            } else {
                blocks.push(vec![*c]);
                last = Some(*f);
            }
        }
        let zero_first = fracs.first().is_some_and(|(f, _)| f.is_zero());
        Region { ints, blocks, zero_first }
    }

    pub fn clocks(&self) -> usize {
        self.ints.len()
    }

    pub fn int_part(&self, x: usize) -> IntPart {
        self.ints[x]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn has_zero_block(&self) -> bool {
        self.zero_first
    }

    /// Index of the block holding `x`.
    pub fn position(&self, x: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&x)).expect("clock in region")
    }

    pub fn is_zero(&self, x: usize) -> bool {
        self.zero_first && self.position(x) == 0
    }

    /// Number of blocks with nonzero fractional part.
    pub fn nonzero_blocks(&self) -> usize {
        self.blocks.len() - usize::from(self.zero_first)
    }

    pub fn satisfies(&self, x: usize, rel: FracRel, y: usize) -> bool {
        let (px, py) = (self.position(x), self.position(y));
        match rel {
            FracRel::Lt => px < py,
            FracRel::Le => px <= py,
            FracRel::Eq => px == py,
            FracRel::Ge => px >= py,
            FracRel::Gt => px > py,
            FracRel::Ne => px != py,
        }
    }

    /// Moving right from `x` with wrap-around, `y` is met strictly before `z`.
    pub fn between(&self, x: usize, y: usize, z: usize) -> bool {
        let n = self.blocks.len();
        let (px, py, pz) = (self.position(x), self.position(y), self.position(z));
        if px == py || py == pz {
            return false;
        }
        (py + n - px) % n < (pz + n - px) % n
    }

    pub fn time_successor(&self, k: u32) -> Region {
        let mut next = self.clone();
        if self.blocks.is_empty() {
            return next;
        }
        if self.zero_first {
            next.zero_first = false;
            for &c in &self.blocks[0] {
                if next.ints[c] == IntPart::Exact(k) {
                    next.ints[c] = IntPart::Above;
                }
            }
        } else {
            let top = next.blocks.pop().unwrap();
            for &c in &top {
                next.ints[c] = match next.ints[c] {
                    IntPart::Exact(i) if i < k => IntPart::Exact(i + 1),
                    _ => IntPart::Above,
                };
            }
            next.blocks.insert(0, top);
            next.zero_first = true;
        }
        next
    }

    pub fn satisfies_guard(&self, g: &Guard) -> bool {
        g.atoms().iter().all(|a| {
            let c = a.constant;
            match self.ints[a.clock] {
                IntPart::Above => matches!(a.cmp, Cmp::Gt | Cmp::Ge),
                IntPart::Exact(i) => {
                    let z = self.is_zero(a.clock);
                    match a.cmp {
                        Cmp::Lt => i < c,
                        Cmp::Le => if z { i <= c } else { i < c },
                        Cmp::Gt => if z { i > c } else { i >= c },
                        Cmp::Ge => i >= c,
                    }
                }
            }
        })
    }

    pub fn reset(&self, clocks: &[usize]) -> Region {
        if clocks.is_empty() {
            return self.clone();
        }
        let mut next = self.clone();
        for b in next.blocks.iter_mut() {
            b.retain(|c| !clocks.contains(c));
        }
        if next.zero_first && next.blocks[0].is_empty() {
            next.zero_first = false;
        }
        next.blocks.retain(|b| !b.is_empty());
        if !next.zero_first {
            next.blocks.insert(0, Vec::new());
            next.zero_first = true;
        }
        next.blocks[0].extend_from_slice(clocks);
        next.blocks[0].sort();
        for &c in clocks {
            next.ints[c] = IntPart::Exact(0);
        }
        next
    }

    /// Whether the region holds a valuation whose clocks are all multiples of `rate`.
    pub fn sampled_nonempty(&self, rate: SamplingRate) -> bool {
        self.nonzero_blocks() < rate.denominator() as usize
    }

    /// Renders the region as a chain such as `0=x<y<1`.
    pub fn label(&self, clocks: &[String], k: u32) -> String {
        let names = |b: &[usize]| b.iter().map(|&c| clocks[c].as_str()).collect::<Vec<_>>().join("=");
        let mut groups: Vec<(u32, usize, Vec<usize>)> = Vec::new();
        for (pos, b) in self.blocks.iter().enumerate() {
            let mut by_int: HashMap<u32, Vec<usize>> = HashMap::new();
            for &c in b {
                if let IntPart::Exact(i) = self.ints[c] {
                    by_int.entry(i).or_default().push(c);
                }
            }
            for (i, cs) in by_int {
                groups.push((i, pos, cs));
            }
        }
        groups.sort();
        let mut out = String::from("0");
        let mut cur = 0u32;
        let mut open = false;
        for (i, pos, cs) in &groups {
            let zero = self.zero_first && *pos == 0;
            if zero {
                if *i == cur && !open {
                    let _ = write!(out, "={}", names(cs));
                } else {
                    for l in cur + 1..*i {
                        let _ = write!(out, "<{l}");
                    }
                    let _ = write!(out, "<{}={}", names(cs), i);
                    cur = *i;
                    open = false;
                }
            } else {
                if *i > cur {
                    for l in cur + 1..=*i {
                        let _ = write!(out, "<{l}");
                    }
                    cur = *i;
                }
                let _ = write!(out, "<{}", names(cs));
                open = true;
            }
        }
        if open {
            let _ = write!(out, "<{}", cur + 1);
        }
        let above: Vec<usize> = (0..self.clocks()).filter(|&c| self.ints[c] == IntPart::Above).collect();
        if !above.is_empty() {
            for c in above {
                let _ = write!(out, ",{}>{}", clocks[c], k);
            }
            out.push_str("[fr:");
            if self.zero_first {
                out.push_str("0=");
            } else {
                out.push_str("0<");
            }
            let parts: Vec<String> = self.blocks.iter().map(|b| names(b)).collect();
            out.push_str(&parts.join("<"));
            out.push(']');
        }
        out
    }
}

/// The region of `v` with respect to the automaton's largest constant.
pub fn region_of(ta: &TimedAutomaton, v: &ClockValuation) -> Region {
    Region::of(v, ta.max_constant())
}

/// Wrap-around distance from the fractional part of `x` rightward to that of `y`.
pub fn frac_distance(v: &ClockValuation, x: usize, y: usize) -> Result<Rational64> {
    let fx = v.get(x)?.fract();
    let fy = v.get(y)?.fract();
    Ok(if fy >= fx { fy - fx } else { Rational64::from_integer(1) - (fx - fy) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Delta,
    Letter(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionEdge {
    pub from: usize,
    pub label: EdgeLabel,
    pub to: usize,
    /// Clocks reset by the underlying transition (empty for δ).
    pub resets: Vec<usize>,
}

/// Reachable part of the region graph; node 0 is the initial node.
#[derive(Clone, Debug)]
pub struct RegionGraph {
    locations: Vec<String>,
    alphabet: Vec<String>,
    clocks: Vec<String>,
    max_constant: u32,
    accepting: Vec<bool>,
    nodes: Vec<(usize, Region)>,
    edges: Vec<RegionEdge>,
    out: Vec<Vec<usize>>,
    index: HashMap<(usize, Region), usize>,
}

impl RegionGraph {
    pub fn build(ta: &TimedAutomaton) -> RegionGraph {
        let k = ta.max_constant();
        let n = ta.clocks().len();
        let mut nodes: Vec<(usize, Region)> = vec![(ta.initial(), Region::initial(n))];
        let mut index: HashMap<(usize, Region), usize> = HashMap::from([(nodes[0].clone(), 0)]);
        let mut edges: BTreeSet<RegionEdge> = BTreeSet::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (loc, region) = nodes[i].clone();
            let mut succ: Vec<(EdgeLabel, usize, Region, Vec<usize>)> = Vec::new();
            if n > 0 {
                succ.push((EdgeLabel::Delta, loc, region.time_successor(k), vec![]));
            }
            for t in ta.transitions().iter().filter(|t| t.source == loc) {
                if region.satisfies_guard(&t.guard) {
                    succ.push((EdgeLabel::Letter(t.letter), t.target, region.reset(&t.resets), t.resets.clone()));
                }
            }
            for (label, l2, r2, resets) in succ {
                let key = (l2, r2);
                let to = match index.get(&key) {
                    Some(&j) => j,
                    None => {
                        nodes.push(key.clone());
                        index.insert(key, nodes.len() - 1);
                        queue.push_back(nodes.len() - 1);
                        nodes.len() - 1
                    }
                };
                edges.insert(RegionEdge { from: i, label, to, resets });
            }
        }
        let edges: Vec<RegionEdge> = edges.into_iter().collect();
        let mut out = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            out[edge.from].push(e);
        }
        RegionGraph {
            locations: ta.locations().to_vec(),
            alphabet: ta.alphabet().to_vec(),
            clocks: ta.clocks().to_vec(),
            max_constant: k,
            accepting: (0..ta.locations().len()).map(|l| ta.is_accepting(l)).collect(),
            nodes,
            edges,
            out,
            index,
        }
    }

    pub fn nodes(&self) -> &[(usize, Region)] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RegionEdge] {
        &self.edges
    }

    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = &RegionEdge> + '_ {
        self.out[node].iter().map(move |&e| &self.edges[e])
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn clocks(&self) -> &[String] {
        &self.clocks
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn max_constant(&self) -> u32 {
        self.max_constant
    }

    pub fn is_accepting(&self, node: usize) -> bool {
        self.accepting[self.nodes[node].0]
    }

    pub fn region_label(&self, node: usize) -> String {
        self.nodes[node].1.label(&self.clocks, self.max_constant)
    }

    /// `q|R`, e.g. `q1|0=x<y<1`.
    pub fn node_label(&self, node: usize) -> String {
        format!("{}|{}", self.locations[self.nodes[node].0], self.region_label(node))
    }

    /// The node of a location and region, if reachable.
    pub fn node(&self, location: usize, region: &Region) -> Option<usize> {
        self.index.get(&(location, region.clone())).copied()
    }

    pub fn find(&self, location: &str, region_label: &str) -> Option<usize> {
        (0..self.nodes.len()).find(|&i| self.locations[self.nodes[i].0] == location && self.region_label(i) == region_label)
    }

    fn delta_closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(i) = stack.pop() {
            for e in self.outgoing(i) {
                if e.label == EdgeLabel::Delta && set.insert(e.to) {
                    stack.push(e.to);
                }
            }
        }
    }

    /// Nodes reachable from the initial node by δ-edges.
    pub fn initial_set(&self) -> BTreeSet<usize> {
        let mut set = BTreeSet::from([0]);
        self.delta_closure(&mut set);
        set
    }

    pub fn step(&self, set: &BTreeSet<usize>, letter: usize) -> BTreeSet<usize> {
        let mut next = BTreeSet::new();
        for &i in set {
            for e in self.outgoing(i) {
                if e.label == EdgeLabel::Letter(letter) {
                    next.insert(e.to);
                }
            }
        }
        self.delta_closure(&mut next);
        next
    }

    pub fn accepts(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().any(|&i| self.is_accepting(i))
    }

    /// Dense-time membership of an untimed word.
    pub fn member<S: AsRef<str>>(&self, word: &[S]) -> bool {
        let mut set = self.initial_set();
        for a in word {
            let Some(l) = self.alphabet.iter().position(|x| x == a.as_ref()) else {
                return false;
            };
            set = self.step(&set, l);
        }
        self.accepts(&set)
    }

    /// The graph as an automaton over the alphabet extended by `δ` (the last letter).
    pub fn to_nfa(&self) -> Nfa {
        let mut letters = self.alphabet.clone();
        letters.push(DELTA.to_string());
        let delta = letters.len() - 1;
        let mut nfa = Nfa::new(letters);
        for i in 0..self.nodes.len() {
            nfa.add_state(self.is_accepting(i));
        }
        for e in &self.edges {
            let l = match e.label {
                EdgeLabel::Delta => delta,
                EdgeLabel::Letter(a) => a,
            };
            nfa.add_transition(e.from, l, e.to);
        }
        nfa
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph regions {\n  rankdir=LR;\n");
        for i in 0..self.nodes.len() {
            let shape = if self.is_accepting(i) { "doublecircle" } else { "ellipse" };
            let _ = writeln!(s, "  n{i} [label=\"{}\", shape={shape}];", self.node_label(i));
        }
        for e in &self.edges {
            let l = match e.label {
                EdgeLabel::Delta => DELTA,
                EdgeLabel::Letter(a) => self.alphabet[a].as_str(),
            };
            let _ = writeln!(s, "  n{} -> n{} [label=\"{l}\"];", e.from, e.to);
        }
        s.push_str("}\n");
        s
    }
}

/// Dense membership computed on the region graph.
pub fn dense_member<S: AsRef<str>>(ta: &TimedAutomaton, word: &[S]) -> bool {
    RegionGraph::build(ta).member(word)
}
