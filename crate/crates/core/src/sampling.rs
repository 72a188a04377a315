//! The verdict engine: does sampling at ε = 1/k keep the untimed language?

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::era::ExtendedRAutomaton;
use crate::error::{Error, Result};
use crate::fa::{equivalent, Equivalence};
use crate::region::RegionGraph;
use crate::ta::{SampledOracle, SamplingRate, SearchLimits, TimedAutomaton};
use crate::translate::{contract, expand, Pipeline};

/// Search parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisConfig {
    /// Bounds tried in order, each checked with a language-equivalence test.
    pub bounds: Vec<u64>,
    /// Longest timed-automaton word enumerated by the lasso search and the verifier.
    pub word_cap: usize,
    /// State budget for each automaton construction and oracle query.
    pub state_budget: usize,
    /// Pump count up to which evidence is checked.
    pub k_check: usize,
    /// Most accepted words the lasso search splits into prefix, loop and suffix.
    pub lasso_words: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bounds: (0..7).map(|i| 1 << i).collect(),
            word_cap: 8,
            state_budget: 1 << 20,
            k_check: 8,
            lasso_words: 2000,
        }
    }
}

impl AnalysisConfig {
    /// Powers of two up to `max` (at least 1).
    pub fn with_max_bound(mut self, max: u64) -> Self {
        self.bounds = std::iter::successors(Some(1u64), |b| b.checked_mul(2)).take_while(|&b| b <= max.max(1)).collect();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() || self.bounds.contains(&0) {
            return Err(Error::Input("bounds must be positive and non-empty".into()));
        }
        if self.word_cap == 0 || self.state_budget == 0 || self.k_check == 0 {
            return Err(Error::Input("word cap, state budget and k_check must be positive".into()));
        }
        Ok(())
    }
}

/// How a positive verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ZeroClock,
    OneClock,
    Closed,
    Limitedness,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ZeroClock => "zero-clock",
            Method::OneClock => "one-clock",
            Method::Closed => "closed",
            Method::Limitedness => "limitedness",
        })
    }
}

/// A word family `prefix · pump^k · suffix` (timed-automaton letters) whose
/// least counter bound in the δ-free automaton grows with `k`.
///
/// This is empirical: growth is only checked for `k` up to `bounds.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub prefix: Vec<String>,
    pub pump: Vec<String>,
    pub suffix: Vec<String>,
    /// `bounds[k-1]` is the least bound accepting the expanded word with `k` pumps.
    pub bounds: Vec<u64>,
    /// Letters of the counter automaton per timed-automaton letter.
    pub factor: usize,
}

impl Evidence {
    pub fn word(&self, k: usize) -> Vec<String> {
        let mut w = self.prefix.clone();
        for _ in 0..k {
            w.extend(self.pump.iter().cloned());
        }
        w.extend(self.suffix.iter().cloned());
        w
    }

    /// Recomputes the least bounds on `r`.
    pub fn recheck(&self, r: &ExtendedRAutomaton) -> Vec<Option<u64>> {
        (1..=self.bounds.len()).map(|k| r.min_bound(&expand(&self.word(k), self.factor))).collect()
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |w: &[String]| if w.is_empty() { "ε".to_string() } else { w.join(" ") };
        write!(f, "({})·({})^k·({}), min bounds {:?}", part(&self.prefix), part(&self.pump), part(&self.suffix), self.bounds)
    }
}

/// A bound that lost words, with the shortest lost word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundAttempt {
    pub bound: u64,
    /// In timed-automaton letters when the word contracts cleanly, otherwise in counter-automaton letters.
    pub lost_word: Option<Vec<String>>,
    /// Set when the attempt ran out of budget.
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Sampling at `rate` keeps the language. `bound` is set for the limitedness method.
    Samplable { rate: SamplingRate, bound: Option<u64>, method: Method },
    NotSamplable { evidence: Evidence },
    /// No bound in the schedule worked and no growing family was found.
    Unknown { max_bound: u64 },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Samplable { .. } => "samplable",
            Verdict::NotSamplable { .. } => "not_samplable",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

/// The verdict together with the bounds that were tried.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub verdict: Verdict,
    pub attempts: Vec<BoundAttempt>,
}

pub fn analyze(ta: &TimedAutomaton, cfg: &AnalysisConfig) -> Result<Analysis> {
    cfg.validate()?;
    let fast = |rate, method| {
        Ok(Analysis {
            verdict: Verdict::Samplable { rate: SamplingRate::new(rate)?, bound: None, method },
            attempts: Vec::new(),
        })
    };
    match ta.clocks().len() {
        0 => return fast(1, Method::ZeroClock),
        1 => return fast(2, Method::OneClock),
        _ if ta.is_closed() => return fast(1, Method::Closed),
        _ => {}
    }
    let p = Pipeline::build(ta)?;
    let r = &p.era_no_delta;
    let full = r.language_nfa();
    let mut attempts = Vec::new();
    for &b in &cfg.bounds {
        let outcome = r
            .b_language_nfa(b, cfg.state_budget)
            .and_then(|nb| equivalent(&nb, &full, cfg.state_budget));
        match outcome {
            Ok(Equivalence::Equal) => {
                let k = u32::try_from(4 * b).map_err(|_| Error::Input(format!("bound {b} too large")))?;
                return Ok(Analysis {
                    verdict: Verdict::Samplable { rate: SamplingRate::new(k)?, bound: Some(b), method: Method::Limitedness },
                    attempts,
                });
            }
            Ok(Equivalence::Differ { word, .. }) => {
                let word = contract(&word, p.factor()).unwrap_or(word);
                attempts.push(BoundAttempt { bound: b, lost_word: Some(word), exhausted: false });
            }
            Err(Error::Budget { .. }) => {
                attempts.push(BoundAttempt { bound: b, lost_word: None, exhausted: true });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let verdict = match pumping_evidence(&p, cfg) {
        Some(evidence) => Verdict::NotSamplable { evidence },
        None => Verdict::Unknown { max_bound: attempts.last().map_or(0, |a| a.bound) },
    };
    Ok(Analysis { verdict, attempts })
}

/// Accepted timed-automaton words in length-lexicographic order, through the region graph.
fn accepted_words(g: &RegionGraph, max_len: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(Vec::new(), g.initial_set())]);
    while let Some((w, set)) = queue.pop_front() {
        if g.accepts(&set) {
            out.push(w.clone());
            if out.len() >= limit {
                break;
            }
        }
        if w.len() == max_len {
            continue;
        }
        for a in 0..g.alphabet().len() {
            let next = g.step(&set, a);
            if !next.is_empty() {
                let mut w2 = w.clone();
                w2.push(a);
                queue.push_back((w2, next));
            }
        }
    }
    out
}

/// Looks for `u v^k x` with least bound at least `k` and strictly increasing for `k ≤ k_check`.
pub fn pumping_evidence(p: &Pipeline, cfg: &AnalysisConfig) -> Option<Evidence> {
    let letters = p.original.alphabet();
    let r = &p.era_no_delta;
    let f = p.factor();
    let names = |w: &[usize]| -> Vec<String> { w.iter().map(|&a| letters[a].clone()).collect() };
    let mut tried = BTreeSet::new();
    let g = RegionGraph::build(&p.original);
    for w in accepted_words(&g, cfg.word_cap, cfg.lasso_words) {
        for i in 0..w.len() {
            for j in i + 1..=w.len() {
                let (u, v, x) = (&w[..i], &w[i..j], &w[j..]);
                if !tried.insert((u.to_vec(), v.to_vec(), x.to_vec())) {
                    continue;
                }
                let mut cand =
                    Evidence { prefix: names(u), pump: names(v), suffix: names(x), bounds: Vec::new(), factor: f };
                let mut last = 0;
                for k in 1..=cfg.k_check {
                    match r.min_bound(&expand(&cand.word(k), f)) {
                        Some(b) if b >= k as u64 && (k == 1 || b > last) => {
                            cand.bounds.push(b);
                            last = b;
                        }
                        _ => break,
                    }
                }
                if cand.bounds.len() == cfg.k_check {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// One oracle comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub rate: SamplingRate,
    pub word: Vec<String>,
    pub dense: bool,
    /// `None` when the sampled oracle ran out of budget.
    pub sampled: Option<bool>,
}

impl Check {
    pub fn agrees(&self) -> bool {
        self.sampled == Some(self.dense)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// For a negative verdict: per tested rate, a word in the dense language but not the sampled one.
    pub witnesses: Vec<(SamplingRate, Option<Vec<String>>)>,
}

impl VerificationReport {
    /// A positive verdict is confirmed when every check agrees; a negative one when every rate has a witness.
    pub fn confirms(&self, verdict: &Verdict) -> bool {
        match verdict {
            Verdict::Samplable { .. } => self.checks.iter().all(Check::agrees),
            Verdict::NotSamplable { .. } => !self.witnesses.is_empty() && self.witnesses.iter().all(|(_, w)| w.is_some()),
            Verdict::Unknown { .. } => false,
        }
    }
}

/// The rates at which a negative verdict is cross-checked.
pub const WITNESS_RATES: [u32; 3] = [2, 3, 4];

/// Re-checks a verdict with the dense (region graph) and sampled oracles.
pub fn verify_verdict(ta: &TimedAutomaton, verdict: &Verdict, cfg: &AnalysisConfig) -> Result<VerificationReport> {
    let limits = SearchLimits { max_states: cfg.state_budget };
    let g = RegionGraph::build(ta);
    let letters = ta.alphabet();
    let names = |w: &[usize]| -> Vec<String> { w.iter().map(|&a| letters[a].clone()).collect() };
    let mut report = VerificationReport::default();
    let check = |oracle: &SampledOracle, rate, word: Vec<String>| -> Result<Check> {
        let sampled = match oracle.member(&word) {
            Ok(m) => Some(m),
            Err(Error::Budget { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Check { rate, dense: g.member(&word), word, sampled })
    };
    match verdict {
        Verdict::Samplable { rate, .. } => {
            let oracle = SampledOracle::new(ta, *rate, limits);
            for w in crate::fa::words_up_to(letters.len(), cfg.word_cap) {
                report.checks.push(check(&oracle, *rate, names(&w))?);
            }
        }
        Verdict::NotSamplable { evidence } => {
            for k in WITNESS_RATES {
                let rate = SamplingRate::new(k)?;
                let oracle = SampledOracle::new(ta, rate, limits);
                let cap = 2 * k as usize + 3;
                let family = (0..=cfg.k_check).map(|i| evidence.word(i)).filter(|w| w.len() <= cap);
                let others = accepted_words(&g, cap, usize::MAX).into_iter().map(|w| names(&w));
                let mut found = None;
                for w in family.chain(others) {
                    let c = check(&oracle, rate, w)?;
                    let lost = c.dense && c.sampled == Some(false);
                    report.checks.push(c.clone());
                    if lost {
                        found = Some(c.word);
                        break;
                    }
                }
                report.witnesses.push((rate, found));
            }
        }
        Verdict::Unknown { .. } => {}
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn fast_paths() {
        let cfg = AnalysisConfig::default();
        let zero = TimedAutomaton::builder().alphabet(["a"]).initial("p").accepting(["p"]).edge("p", "p", "a", "true", &[]).build().unwrap();
        let v = analyze(&zero, &cfg).unwrap().verdict;
        assert_eq!(v, Verdict::Samplable { rate: SamplingRate::new(1).unwrap(), bound: None, method: Method::ZeroClock });
        let one = TimedAutomaton::builder()
            .clocks(["x"])
            .alphabet(["a"])
            .initial("p")
            .accepting(["p"])
            .edge("p", "p", "a", "x>0 & x<1", &["x"])
            .build()
            .unwrap();
        let v = analyze(&one, &cfg).unwrap().verdict;
        assert!(matches!(v, Verdict::Samplable { rate, method: Method::OneClock, .. } if rate.denominator() == 2));
        let v = analyze(&samples::shrinking_gap_closed(), &cfg).unwrap().verdict;
        assert!(matches!(v, Verdict::Samplable { rate, method: Method::Closed, .. } if rate.denominator() == 1));
    }

    #[test]
    fn gap_is_not_samplable() {
        let cfg = AnalysisConfig { bounds: vec![1, 2, 4], ..AnalysisConfig::default() };
        let a = analyze(&samples::shrinking_gap(), &cfg).unwrap();
        assert_eq!(a.attempts.len(), 3);
        assert!(a.attempts.iter().all(|t| t.lost_word.is_some()));
        let Verdict::NotSamplable { evidence } = &a.verdict else { panic!("{:?}", a.verdict) };
        let p = Pipeline::build(&samples::shrinking_gap()).unwrap();
        let again: Vec<u64> = evidence.recheck(&p.era_no_delta).into_iter().map(Option::unwrap).collect();
        assert_eq!(again, evidence.bounds);
        assert!(again.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bounded_two_clock_automaton_is_samplable() {
        // x and y are reset together, so their fractional parts never separate
        let ta = TimedAutomaton::builder()
            .clocks(["x", "y"])
            .alphabet(["a"])
            .initial("p")
            .accepting(["p"])
            .edge("p", "p", "a", "x>0 & y<1", &["x", "y"])
            .build()
            .unwrap();
        let cfg = AnalysisConfig::default();
        let a = analyze(&ta, &cfg).unwrap();
        let Verdict::Samplable { rate, method: Method::Limitedness, bound: Some(b) } = a.verdict else {
            panic!("{:?}", a.verdict)
        };
        assert_eq!(rate.denominator() as u64, 4 * b);
        let cfg = AnalysisConfig { word_cap: 5, ..cfg };
        assert!(verify_verdict(&ta, &a.verdict, &cfg).unwrap().confirms(&a.verdict));
    }

    #[test]
    fn verifier_finds_short_witnesses() {
        let ta = samples::shrinking_gap();
        let cfg = AnalysisConfig { bounds: vec![1], ..AnalysisConfig::default() };
        let a = analyze(&ta, &cfg).unwrap();
        let report = verify_verdict(&ta, &a.verdict, &cfg).unwrap();
        assert!(report.confirms(&a.verdict));
        for (rate, w) in &report.witnesses {
            let w = w.as_ref().unwrap();
            assert!(w.len() <= 2 * rate.denominator() as usize + 3);
        }
    }

    #[test]
    fn unknown_carries_attempts() {
        let cfg = AnalysisConfig { bounds: vec![1], word_cap: 1, ..AnalysisConfig::default() };
        let a = analyze(&samples::shrinking_gap(), &cfg).unwrap();
        assert_eq!(a.verdict, Verdict::Unknown { max_bound: 1 });
        assert!(!verify_verdict(&samples::shrinking_gap(), &a.verdict, &cfg).unwrap().confirms(&a.verdict));
    }

    #[test]
    fn budget_gives_unknown_not_error() {
        let cfg = AnalysisConfig { state_budget: 3, word_cap: 1, ..AnalysisConfig::default() };
        let a = analyze(&samples::shrinking_gap(), &cfg).unwrap();
        assert!(a.attempts[0].exhausted);
        assert!(matches!(a.verdict, Verdict::Unknown { .. }));
    }

    #[test]
    fn config_checks() {
        assert!(analyze(&samples::shrinking_gap(), &AnalysisConfig { bounds: vec![], ..Default::default() }).is_err());
        assert_eq!(AnalysisConfig::default().with_max_bound(10).bounds, vec![1, 2, 4, 8]);
        assert_eq!(AnalysisConfig::default().bounds.last(), Some(&64));
    }

    #[test]
    fn deterministic() {
        let cfg = AnalysisConfig { bounds: vec![1, 2], ..AnalysisConfig::default() };
        let ta = samples::shrinking_gap();
        assert_eq!(analyze(&ta, &cfg).unwrap(), analyze(&ta, &cfg).unwrap());
    }
}
