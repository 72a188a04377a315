//! Line-based text formats for timed automata and extended R-automata.
//!
//! ```text
//! clocks x y
//! alphabet a b
//! initial q0
//! accepting q1
//! trans q0 -> q1 on a when x<1 & y<1 reset x
//! ```
//!
//! Extended R-automata use `counters n`, optional `restricted` and
//! `auxiliary s..` lines, and `trans s0 -> s1 on a eff 1,r{2}`.
//! `#` starts a comment.

use crate::era::ExtendedRAutomaton;
use crate::error::{Error, Result};
use crate::ta::TimedAutomaton;

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Moves an error from a builder call onto the line that caused it.
fn at(line: usize, e: Error) -> Error {
    match e {
        Error::Input(msg) => parse_err(line, msg),
        other => other,
    }
}

/// Splits `s0 -> s1 on a <kw> rest` into its parts.
fn split_trans<'a>(line: usize, rest: &'a str, kw: &str) -> Result<(&'a str, &'a str, &'a str, &'a str)> {
    let mut words = rest.splitn(5, char::is_whitespace).filter(|w| !w.is_empty());
    let from = words.next();
    let arrow = words.next();
    let to = words.next();
    let on = words.next();
    let (Some(from), Some("->"), Some(to), Some("on")) = (from, arrow, to, on) else {
        return Err(parse_err(line, "expected `trans <from> -> <to> on <letter> ...`"));
    };
    let tail = words.next().unwrap_or("").trim();
    let (letter, body) = tail
        .split_once(char::is_whitespace)
        .ok_or_else(|| parse_err(line, format!("expected `{kw}` after the letter")))?;
    let body = body.trim();
    let body = body
        .strip_prefix(kw)
        .filter(|b| b.is_empty() || b.starts_with(char::is_whitespace))
        .ok_or_else(|| parse_err(line, format!("expected `{kw}` after the letter")))?;
    Ok((from, to, letter, body.trim()))
}

/// Parses the timed-automaton format.
pub fn parse_ta(text: &str) -> Result<TimedAutomaton> {
    let mut b = TimedAutomaton::builder();
    let mut seen_initial = None;
    let mut edges = Vec::new();
    for (n, line) in lines(text) {
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let names = rest.split_whitespace();
        match kw {
            "clocks" => b = b.clocks(names),
            "alphabet" => b = b.alphabet(names),
            "accepting" => b = b.accepting(names),
            "initial" => {
                let mut it = names;
                let (Some(q), None) = (it.next(), it.next()) else {
                    return Err(parse_err(n, "`initial` takes exactly one location"));
                };
                if seen_initial.replace(n).is_some() {
                    return Err(parse_err(n, "duplicate `initial`"));
                }
                b = b.initial(q);
            }
            "trans" => {
                let (from, to, letter, body) = split_trans(n, rest, "when")?;
                let (guard, resets) = body
                    .split_once(" reset")
                    .map(|(g, r)| (g.trim(), r.trim()))
                    .ok_or_else(|| parse_err(n, "expected `reset` (use `reset -` for none)"))?;
                if guard.is_empty() {
                    return Err(parse_err(n, "empty guard (use `when true`)"));
                }
                let resets: Vec<&str> = resets.split_whitespace().filter(|r| *r != "-").collect();
                edges.push((n, from, to, letter, guard, resets));
            }
            other => return Err(parse_err(n, format!("unknown declaration `{other}`"))),
        }
    }
    if seen_initial.is_none() {
        return Err(parse_err(0, "missing `initial`"));
    }
    // build after each edge so a bad guard, letter or clock reports its own line
    for (n, from, to, letter, guard, resets) in &edges {
        b.clone().edge(from, to, letter, guard, resets).build().map_err(|e| at(*n, e))?;
        b = b.edge(from, to, letter, guard, resets);
    }
    b.build().map_err(|e| at(0, e))
}

/// Parses the extended R-automaton format.
pub fn parse_era(text: &str) -> Result<ExtendedRAutomaton> {
    let mut counters = None;
    let mut alphabet: Vec<&str> = Vec::new();
    let mut initial = None;
    let mut accepting: Vec<&str> = Vec::new();
    let mut auxiliary: Vec<&str> = Vec::new();
    let mut restricted = false;
    let mut trans = Vec::new();
    for (n, line) in lines(text) {
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match kw {
            "counters" => {
                let c: usize = rest.trim().parse().map_err(|_| parse_err(n, "`counters` takes a number"))?;
                counters = Some(c);
            }
            "alphabet" => alphabet.extend(rest.split_whitespace()),
            "accepting" => accepting.extend(rest.split_whitespace()),
            "auxiliary" => auxiliary.extend(rest.split_whitespace()),
            "restricted" if rest.trim().is_empty() => restricted = true,
            "initial" => {
                let mut it = rest.split_whitespace();
                let (Some(q), None) = (it.next(), it.next()) else {
                    return Err(parse_err(n, "`initial` takes exactly one state"));
                };
                if initial.replace(q).is_some() {
                    return Err(parse_err(n, "duplicate `initial`"));
                }
            }
            "trans" => {
                let (from, to, letter, eff) = split_trans(n, rest, "eff")?;
                if eff.is_empty() {
                    return Err(parse_err(n, "missing effect"));
                }
                trans.push((n, from, to, letter, eff.replace(char::is_whitespace, "")));
            }
            other => return Err(parse_err(n, format!("unknown declaration `{other}`"))),
        }
    }
    let counters = counters.ok_or_else(|| parse_err(0, "missing `counters`"))?;
    let initial = initial.ok_or_else(|| parse_err(0, "missing `initial`"))?;
    let base = ExtendedRAutomaton::builder(counters)
        .alphabet(alphabet)
        .initial(initial)
        .accepting(accepting)
        .auxiliary(auxiliary)
        .restricted(restricted);
    let mut b = base.clone();
    for (n, from, to, letter, eff) in &trans {
        base.clone().transition(from, to, letter, eff).build().map_err(|e| at(*n, e))?;
        b = b.transition(from, to, letter, eff);
    }
    b.build().map_err(|e| at(0, e))
}

/// Splits a whitespace-separated word. The empty string is the empty word.
pub fn parse_word(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}
