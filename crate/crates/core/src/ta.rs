//! Timed automata, their dense semantics and the ε-sampled membership oracle.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::error::{input, Error, Result};

/// The reserved silent letter.
pub const DELTA: &str = "δ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Lt,
    Le,
    Ge,
    Gt,
}

impl Cmp {
    pub fn is_strict(self) -> bool {
        matches!(self, Cmp::Lt | Cmp::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    pub fn holds<T: Ord>(self, lhs: T, rhs: T) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

/// `clock ⋈ constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub clock: usize,
    pub cmp: Cmp,
    pub constant: u32,
}

/// A conjunction of atoms. The empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guard {
    atoms: Vec<Atom>,
}

impl Guard {
    pub fn tt() -> Guard {
        Guard::default()
    }

    pub fn new(mut atoms: Vec<Atom>) -> Guard {
        atoms.sort();
        atoms.dedup();
        Guard { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn max_constant(&self) -> u32 {
        self.atoms.iter().map(|a| a.constant).max().unwrap_or(0)
    }

    /// Parses `true` or `x<1 & y=1`. `=` expands to `<=` and `>=`.
    pub fn parse(text: &str, clocks: &[String]) -> Result<Guard> {
        let text = text.trim();
        if text == "true" {
            return Ok(Guard::tt());
        }
        let mut atoms = Vec::new();
        for part in text.split('&') {
            let part = part.trim();
            let (pos, op) = ["<=", ">=", "<", ">", "="]
                .iter()
                .find_map(|op| part.find(op).map(|p| (p, *op)))
                .ok_or_else(|| Error::Input(format!("no comparison in atom `{part}`")))?;
            let name = part[..pos].trim();
            let rhs = part[pos + op.len()..].trim();
            let clock = clocks
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Input(format!("unknown clock `{name}`")))?;
            let constant: u32 = rhs
                .parse()
                .map_err(|_| Error::Input(format!("bad constant `{rhs}` in `{part}`")))?;
            let cmps: &[Cmp] = match op {
                "<" => &[Cmp::Lt],
                "<=" => &[Cmp::Le],
                ">=" => &[Cmp::Ge],
                ">" => &[Cmp::Gt],
                _ => &[Cmp::Le, Cmp::Ge],
            };
            for &cmp in cmps {
                atoms.push(Atom { clock, cmp, constant });
            }
        }
        Ok(Guard::new(atoms))
    }

    pub fn satisfied_by(&self, v: &ClockValuation) -> Result<bool> {
        for a in &self.atoms {
            let value = v.get(a.clock)?;
            if !a.cmp.holds(value, Rational64::from_integer(a.constant as i64)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn render(&self, clocks: &[String]) -> String {
        if self.atoms.is_empty() {
            return "true".to_string();
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("{}{}{}", clocks[a.clock], a.cmp.symbol(), a.constant))
            .collect();
        parts.join(" & ")
    }
}

/// Non-negative exact clock values, indexed like the automaton's clocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClockValuation(Vec<Rational64>);

impl ClockValuation {
    pub fn zero(clocks: usize) -> ClockValuation {
        ClockValuation(vec![Rational64::zero(); clocks])
    }

    pub fn new(values: Vec<Rational64>) -> Result<ClockValuation> {
        if values.iter().any(|v| v.is_negative()) {
            return input("clock values must be non-negative");
        }
        Ok(ClockValuation(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, clock: usize) -> Result<Rational64> {
        self.0
            .get(clock)
            .copied()
            .ok_or_else(|| Error::Input(format!("clock #{clock} has no value")))
    }

    pub fn values(&self) -> &[Rational64] {
        &self.0
    }

    pub fn delayed(&self, d: Rational64) -> ClockValuation {
        ClockValuation(self.0.iter().map(|v| v + d).collect())
    }

    pub fn reset(&self, clocks: &[usize]) -> ClockValuation {
        let mut out = self.clone();
        for &c in clocks {
            out.0[c] = Rational64::zero();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: usize,
    pub letter: usize,
    pub guard: Guard,
    /// Sorted clock indices.
    pub resets: Vec<usize>,
    pub target: usize,
}

/// A timed automaton over sorted clocks and a sorted alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedAutomaton {
    locations: Vec<String>,
    alphabet: Vec<String>,
    clocks: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    transitions: Vec<Transition>,
}

impl TimedAutomaton {
    pub fn builder() -> TaBuilder {
        TaBuilder::default()
    }

    pub(crate) fn from_parts(
        locations: Vec<String>,
        alphabet: Vec<String>,
        clocks: Vec<String>,
        initial: usize,
        accepting: Vec<bool>,
        mut transitions: Vec<Transition>,
    ) -> TimedAutomaton {
        transitions.sort();
        transitions.dedup();
        TimedAutomaton { locations, alphabet, clocks, initial, accepting, transitions }
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn clocks(&self) -> &[String] {
        &self.clocks
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, location: usize) -> bool {
        self.accepting[location]
    }

    pub fn accepting(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.locations.len()).filter(|&l| self.accepting[l])
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn letter_index(&self, letter: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == letter)
    }

    pub fn clock_index(&self, clock: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c == clock)
    }

    pub fn location_index(&self, loc: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == loc)
    }

    /// The largest constant in any guard.
    pub fn max_constant(&self) -> u32 {
        self.transitions.iter().map(|t| t.guard.max_constant()).max().unwrap_or(0)
    }

    /// True when every guard atom is non-strict.
    pub fn is_closed(&self) -> bool {
        self.transitions
            .iter()
            .all(|t| t.guard.atoms().iter().all(|a| !a.cmp.is_strict()))
    }

    pub fn initial_state(&self) -> ConcreteState {
        ConcreteState {
            location: self.initial,
            valuation: ClockValuation::zero(self.clocks.len()),
        }
    }

    /// Maps a word of letter names to indices; `None` if a letter is outside the alphabet.
    pub fn encode<S: AsRef<str>>(&self, word: &[S]) -> Option<Vec<usize>> {
        word.iter().map(|a| self.letter_index(a.as_ref())).collect()
    }

    /// All states reached by firing an `letter`-transition from `s` without delay.
    pub fn discrete_step(&self, s: &ConcreteState, letter: &str) -> Result<Vec<ConcreteState>> {
        if s.valuation.len() != self.clocks.len() {
            return input("valuation does not match the automaton's clocks");
        }
        let Some(a) = self.letter_index(letter) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for t in self.transitions.iter().filter(|t| t.source == s.location && t.letter == a) {
            if t.guard.satisfied_by(&s.valuation)? {
                out.push(ConcreteState {
                    location: t.target,
                    valuation: s.valuation.reset(&t.resets),
                });
            }
        }
        Ok(out)
    }
}

impl fmt::Display for TimedAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "clocks {}", self.clocks.join(" "))?;
        writeln!(f, "alphabet {}", self.alphabet.join(" "))?;
        writeln!(f, "initial {}", self.locations[self.initial])?;
        let acc: Vec<&str> = self.accepting().map(|l| self.locations[l].as_str()).collect();
        writeln!(f, "accepting {}", acc.join(" "))?;
        for t in &self.transitions {
            let resets = if t.resets.is_empty() {
                "-".to_string()
            } else {
                t.resets.iter().map(|&c| self.clocks[c].as_str()).collect::<Vec<_>>().join(" ")
            };
            writeln!(
                f,
                "trans {} -> {} on {} when {} reset {}",
                self.locations[t.source],
                self.locations[t.target],
                self.alphabet[t.letter],
                t.guard.render(&self.clocks),
                resets
            )?;
        }
        Ok(())
    }
}

/// Collects names and validates them in [`TaBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct TaBuilder {
    clocks: Vec<String>,
    alphabet: Vec<String>,
    initial: Option<String>,
    accepting: Vec<String>,
    edges: Vec<(String, String, String, String, Vec<String>)>,
}

impl TaBuilder {
    pub fn clocks<S: AsRef<str>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.clocks.extend(names.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn alphabet<S: AsRef<str>>(mut self, letters: impl IntoIterator<Item = S>) -> Self {
        self.alphabet.extend(letters.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn initial(mut self, loc: &str) -> Self {
        self.initial = Some(loc.to_string());
        self
    }

    pub fn accepting<S: AsRef<str>>(mut self, locs: impl IntoIterator<Item = S>) -> Self {
        self.accepting.extend(locs.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    /// `guard` uses the text syntax, e.g. `"x<1 & y=1"` or `"true"`.
    pub fn edge(mut self, from: &str, to: &str, letter: &str, guard: &str, resets: &[&str]) -> Self {
        self.edges.push((
            from.to_string(),
            to.to_string(),
            letter.to_string(),
            guard.to_string(),
            resets.iter().map(|s| s.to_string()).collect(),
        ));
        self
    }

    pub fn build(self) -> Result<TimedAutomaton> {
        let mut clocks = self.clocks;
        clocks.sort();
        clocks.dedup();
        let mut alphabet = self.alphabet;
        alphabet.sort();
        alphabet.dedup();
        if alphabet.iter().any(|a| a == DELTA) {
            return input(format!("`{DELTA}` is reserved and cannot be a letter"));
        }
        let initial = self.initial.ok_or_else(|| Error::Input("no initial location".into()))?;
        let mut locations = vec![initial.clone()];
        let mut index: HashMap<String, usize> = HashMap::from([(initial, 0)]);
        let mut intern = |name: &str, locations: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                locations.push(name.to_string());
                locations.len() - 1
            })
        };
        let mut transitions = Vec::new();
        for (from, to, letter, guard, resets) in &self.edges {
            let source = intern(from, &mut locations);
            let target = intern(to, &mut locations);
            let letter = alphabet
                .iter()
                .position(|a| a == letter)
                .ok_or_else(|| Error::Input(format!("letter `{letter}` is not in the alphabet")))?;
            let guard = Guard::parse(guard, &clocks)?;
            let mut rs = BTreeSet::new();
            for r in resets {
                let c = clocks
                    .iter()
                    .position(|c| c == r)
                    .ok_or_else(|| Error::Input(format!("unknown clock `{r}` in reset")))?;
                rs.insert(c);
            }
            transitions.push(Transition { source, letter, guard, resets: rs.into_iter().collect(), target });
        }
        let acc_ids: Vec<usize> = self.accepting.iter().map(|l| intern(l, &mut locations)).collect();
        let mut accepting = vec![false; locations.len()];
        for l in acc_ids {
            accepting[l] = true;
        }
        Ok(TimedAutomaton::from_parts(locations, alphabet, clocks, 0, accepting, transitions))
    }
}

/// A location paired with a clock valuation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConcreteState {
    pub location: usize,
    pub valuation: ClockValuation,
}

impl ConcreteState {
    pub fn time_step(&self, d: Rational64) -> Result<ConcreteState> {
        if d.is_negative() {
            return input("negative delay");
        }
        Ok(ConcreteState { location: self.location, valuation: self.valuation.delayed(d) })
    }
}

/// ε = 1/k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SamplingRate {
    k: u32,
}

impl SamplingRate {
    pub fn new(k: u32) -> Result<SamplingRate> {
        if k == 0 {
            return input("sampling rate 1/0");
        }
        Ok(SamplingRate { k })
    }

    /// Parses `1/k`.
    pub fn parse(text: &str) -> Result<SamplingRate> {
        let bad = || Error::Input(format!("sampling rate must look like 1/k, got `{text}`"));
        let (num, den) = text.trim().split_once('/').ok_or_else(bad)?;
        if num.trim() != "1" {
            return Err(bad());
        }
        SamplingRate::new(den.trim().parse().map_err(|_| bad())?)
    }

    pub fn denominator(self) -> u32 {
        self.k
    }

    pub fn epsilon(self) -> Rational64 {
        Rational64::new(1, self.k as i64)
    }
}

impl fmt::Display for SamplingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_states: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_states: 1 << 20 }
    }
}

/// Tick count standing for any value above the largest constant.
pub const ABOVE: u32 = u32::MAX;

/// A sampled state: each clock is a number of ε-ticks, clamped to [`ABOVE`] past the largest constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SampledState {
    pub location: usize,
    pub ticks: Vec<u32>,
}

/// One step of a sampled run: wait `delay` ticks, then read `letter`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledStep {
    pub delay: u32,
    pub letter: String,
    pub state: SampledState,
}

/// Breadth-first membership for the ε-sampled semantics.
///
/// Sets hold the states reached right after a discrete step; delays are
/// explored when the next letter is read.
pub struct SampledOracle<'a> {
    ta: &'a TimedAutomaton,
    k: u32,
    horizon: u32,
    limits: SearchLimits,
}

impl<'a> SampledOracle<'a> {
    pub fn new(ta: &'a TimedAutomaton, rate: SamplingRate, limits: SearchLimits) -> Self {
        let k = rate.denominator();
        SampledOracle { ta, k, horizon: ta.max_constant().saturating_mul(k), limits }
    }

    pub fn initial(&self) -> BTreeSet<SampledState> {
        BTreeSet::from([SampledState { location: self.ta.initial, ticks: vec![0; self.ta.clocks.len()] }])
    }

    pub fn accepts(&self, set: &BTreeSet<SampledState>) -> bool {
        set.iter().any(|s| self.ta.accepting[s.location])
    }

    fn tick(&self, s: &SampledState) -> SampledState {
        let ticks = s
            .ticks
            .iter()
            .map(|&t| if t == ABOVE || t >= self.horizon { ABOVE } else { t + 1 })
            .collect();
        SampledState { location: s.location, ticks }
    }

    fn holds(&self, g: &Guard, s: &SampledState) -> bool {
        g.atoms().iter().all(|a| {
            let t = s.ticks[a.clock];
            if t == ABOVE {
                matches!(a.cmp, Cmp::Gt | Cmp::Ge)
            } else {
                a.cmp.holds(t as u64, a.constant as u64 * self.k as u64)
            }
        })
    }

    /// The states reachable from `s` by waiting; ends once the clamped state repeats.
    pub fn delays(&self, s: &SampledState) -> Vec<SampledState> {
        let mut out = vec![s.clone()];
        loop {
            let next = self.tick(out.last().unwrap());
            if &next == out.last().unwrap() {
                return out;
            }
            out.push(next);
        }
    }

    fn fire(&self, s: &SampledState, letter: usize) -> Vec<SampledState> {
        self.ta
            .transitions
            .iter()
            .filter(|t| t.source == s.location && t.letter == letter && self.holds(&t.guard, s))
            .map(|t| {
                let mut ticks = s.ticks.clone();
                for &c in &t.resets {
                    ticks[c] = 0;
                }
                SampledState { location: t.target, ticks }
            })
            .collect()
    }

    pub fn step(&self, set: &BTreeSet<SampledState>, letter: usize) -> Result<BTreeSet<SampledState>> {
        let mut out = BTreeSet::new();
        for s in set {
            for d in self.delays(s) {
                out.extend(self.fire(&d, letter));
            }
            if out.len() > self.limits.max_states {
                return Err(Error::Budget { what: "sampled membership", limit: self.limits.max_states });
            }
        }
        Ok(out)
    }

    pub fn member<S: AsRef<str>>(&self, word: &[S]) -> Result<bool> {
        let Some(word) = self.ta.encode(word) else {
            return Ok(false);
        };
        let mut set = self.initial();
        for a in word {
            set = self.step(&set, a)?;
            if set.is_empty() {
                return Ok(false);
            }
        }
        Ok(self.accepts(&set))
    }

    /// An accepting sampled run over `word`, if one exists.
    pub fn witness<S: AsRef<str>>(&self, word: &[S]) -> Result<Option<Vec<SampledStep>>> {
        let Some(letters) = self.ta.encode(word) else {
            return Ok(None);
        };
        let init = self.initial().into_iter().next().unwrap();
        // layers[i]: state -> (predecessor, delay)
        let mut layers: Vec<HashMap<SampledState, (SampledState, u32)>> = Vec::new();
        let mut frontier = vec![init.clone()];
        for &a in &letters {
            let mut layer: HashMap<SampledState, (SampledState, u32)> = HashMap::new();
            for s in &frontier {
                for (d, delayed) in self.delays(s).into_iter().enumerate() {
                    for next in self.fire(&delayed, a) {
                        layer.entry(next).or_insert_with(|| (s.clone(), d as u32));
                    }
                }
            }
            if layer.len() > self.limits.max_states {
                return Err(Error::Budget { what: "sampled run", limit: self.limits.max_states });
            }
            frontier = layer.keys().cloned().collect();
            frontier.sort();
            layers.push(layer);
        }
        let Some(mut cur) = frontier.into_iter().find(|s| self.ta.accepting[s.location]) else {
            return Ok(None);
        };
        let mut steps = Vec::new();
        for (i, layer) in layers.iter().enumerate().rev() {
            let (prev, delay) = layer[&cur].clone();
            steps.push(SampledStep { delay, letter: self.ta.alphabet[letters[i]].clone(), state: cur });
            cur = prev;
        }
        steps.reverse();
        Ok(Some(steps))
    }
}

/// Whether `word` is accepted under ε-sampled semantics.
pub fn sampled_member<S: AsRef<str>>(
    ta: &TimedAutomaton,
    rate: SamplingRate,
    word: &[S],
    limits: SearchLimits,
) -> Result<bool> {
    SampledOracle::new(ta, rate, limits).member(word)
}
