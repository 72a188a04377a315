//! Decide whether sampling time at rate ε = 1/k keeps the untimed language of a
//! timed automaton.
//!
//! The pipeline splits multi-clock resets, builds the region graph, turns it into
//! an extended R-automaton whose counters track fractional distances between
//! clocks, removes the silent letter and searches for a bound `B` on the
//! counters that does not lose words. Such a bound gives ε = 1/(4B).
//!
//! ```
//! use tsa::sampling::{analyze, AnalysisConfig, Verdict};
//!
//! let ta = tsa::samples::shrinking_gap();
//! let report = analyze(&ta, &AnalysisConfig::default()).unwrap();
//! assert!(matches!(report.verdict, Verdict::NotSamplable { .. }));
//! ```

pub mod era;
pub mod fa;
pub mod format;
pub mod region;
pub mod samples;
pub mod sampling;
pub mod ta;
pub mod translate;

mod error;

pub use error::{Error, Result};
pub use num_rational::Rational64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/timed-automata.md")]
    mod timed_automata {}
    #[doc = include_str!("../../../book/src/regions.md")]
    mod regions {}
    #[doc = include_str!("../../../book/src/counter-automata.md")]
    mod counter_automata {}
    #[doc = include_str!("../../../book/src/translation.md")]
    mod translation {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
