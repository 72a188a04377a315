//! Small automata used in the guide and the tests.

use crate::era::ExtendedRAutomaton;
use crate::ta::TimedAutomaton;

/// Accepts `a(ba)*` densely. Each `ba` loop forces the value of `y` at the
/// `a` to drop strictly, so ε-sampling with ε = 1/k only keeps `a(ba)^m` for
/// `m <= k - 2`.
pub fn shrinking_gap() -> TimedAutomaton {
    TimedAutomaton::builder()
        .clocks(["x", "y"])
        .alphabet(["a", "b"])
        .initial("q0")
        .accepting(["q1"])
        .edge("q0", "q1", "a", "x<1 & y<1", &["x"])
        .edge("q1", "q2", "b", "y=1", &["y"])
        .edge("q2", "q1", "a", "y>0 & x<1", &["x"])
        .build()
        .expect("well-formed")
}

/// [`shrinking_gap`] with every strict comparison made non-strict.
pub fn shrinking_gap_closed() -> TimedAutomaton {
    TimedAutomaton::builder()
        .clocks(["x", "y"])
        .alphabet(["a", "b"])
        .initial("q0")
        .accepting(["q1"])
        .edge("q0", "q1", "a", "x<=1 & y<=1", &["x"])
        .edge("q1", "q2", "b", "y=1", &["y"])
        .edge("q2", "q1", "a", "y>=0 & x<=1", &["x"])
        .build()
        .expect("well-formed")
}

/// Two counters. Accepts `ab*a*`; with bound 2 only `a(ε+b+bb+bbb)a*`.
pub fn copy_reset() -> ExtendedRAutomaton {
    ExtendedRAutomaton::builder(2)
        .alphabet(["a", "b"])
        .initial("s0")
        .accepting(["s1", "s2"])
        .transition("s0", "s1", "a", "1,0")
        .transition("s1", "s1", "b", "0,1")
        .transition("s1", "s2", "b", "r{},*1")
        .transition("s0", "s2", "a", "0,1")
        .transition("s2", "s2", "a", "0,r{1}")
        .build()
        .expect("well-formed")
}
