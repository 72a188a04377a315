use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tsa::format::{parse_ta, parse_word};
use tsa::region::RegionGraph;
use tsa::sampling::{analyze, verify_verdict, AnalysisConfig, Analysis, Verdict, VerificationReport};
use tsa::ta::{SampledOracle, SamplingRate, SearchLimits, TimedAutomaton, ABOVE};
use tsa::translate::Pipeline;

const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "tsa", version, about = "Sampling analysis for timed automata")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether some rate 1/k keeps the untimed language.
    /// Exit code 0 samplable, 1 not samplable, 2 unknown, 3 input error.
    Analyze {
        file: PathBuf,
        /// Largest bound tried (powers of two from 1).
        #[arg(long, default_value_t = 64)]
        max_bound: u64,
        /// Longest word enumerated by the lasso search and the verifier.
        #[arg(long, default_value_t = 8)]
        word_cap: usize,
        /// Pump count up to which evidence is checked.
        #[arg(long, default_value_t = 8)]
        k_check: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print an accepting sampled run for a word.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        epsilon: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Dense or sampled membership of a word.
    Member {
        file: PathBuf,
        #[command(flatten)]
        mode: MemberMode,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Print the region graph.
    Regions {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Print the counter automaton built from the region graph.
    Era {
        file: PathBuf,
        /// Only print the automaton with silent transitions removed.
        #[arg(long)]
        no_delta: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MemberMode {
    #[arg(long)]
    dense: bool,
    #[arg(long)]
    epsilon: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn load(path: &PathBuf) -> Result<TimedAutomaton, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_ta(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cmd: Cmd) -> Result<u8, String> {
    let err = |e: tsa::Error| e.to_string();
    match cmd {
        Cmd::Analyze { file, max_bound, word_cap, k_check, json } => {
            let ta = load(&file)?;
            let cfg = AnalysisConfig { word_cap, k_check, ..AnalysisConfig::default() }.with_max_bound(max_bound);
            let analysis = analyze(&ta, &cfg).map_err(err)?;
            let report = verify_verdict(&ta, &analysis.verdict, &cfg).map_err(err)?;
            if json {
                let out = serde_json::to_string_pretty(&JsonVerdict::new(&analysis, &report)).map_err(|e| e.to_string())?;
                println!("{out}");
            } else {
                print_analysis(&analysis, &report);
            }
            Ok(match analysis.verdict {
                Verdict::Samplable { .. } => 0,
                Verdict::NotSamplable { .. } => 1,
                Verdict::Unknown { .. } => 2,
            })
        }
        Cmd::Simulate { file, epsilon, word } => {
            let ta = load(&file)?;
            let rate = SamplingRate::parse(&epsilon).map_err(err)?;
            let word = checked_word(&ta, &word)?;
            let oracle = SampledOracle::new(&ta, rate, SearchLimits::default());
            match oracle.witness(&word).map_err(err)? {
                Some(steps) => {
                    let k = rate.denominator();
                    let show = |ticks: &[u32]| -> String {
                        ta.clocks()
                            .iter()
                            .zip(ticks)
                            .map(|(c, &t)| if t == ABOVE { format!("{c}>{}", ta.max_constant()) } else { format!("{c}={t}/{k}") })
                            .collect::<Vec<_>>()
                            .join(" ")
                    };
                    println!("start {} {}", ta.locations()[ta.initial()], show(&vec![0; ta.clocks().len()]));
                    for s in steps {
                        println!(
                            "wait {}/{k} read {} -> {} {}",
                            s.delay,
                            s.letter,
                            ta.locations()[s.state.location],
                            show(&s.state.ticks)
                        );
                    }
                    Ok(0)
                }
                None => {
                    println!("no {rate}-sampled run accepts the word");
                    Ok(1)
                }
            }
        }
        Cmd::Member { file, mode, word } => {
            let ta = load(&file)?;
            let word = checked_word(&ta, &word)?;
            let accepted = match mode.epsilon {
                Some(e) => {
                    let rate = SamplingRate::parse(&e).map_err(err)?;
                    SampledOracle::new(&ta, rate, SearchLimits::default()).member(&word).map_err(err)?
                }
                None => RegionGraph::build(&ta).member(&word),
            };
            println!("{}", if accepted { "accepted" } else { "rejected" });
            Ok(if accepted { 0 } else { 1 })
        }
        Cmd::Regions { file, dot } => {
            let ta = load(&file)?;
            let g = RegionGraph::build(&ta);
            if dot {
                print!("{}", g.to_dot());
            } else {
                for i in 0..g.nodes().len() {
                    let acc = if g.is_accepting(i) { " accepting" } else { "" };
                    println!("n{i} {}{acc}", g.node_label(i));
                }
                for e in g.edges() {
                    let label = match e.label {
                        tsa::region::EdgeLabel::Delta => tsa::ta::DELTA.to_string(),
                        tsa::region::EdgeLabel::Letter(a) => g.alphabet()[a].clone(),
                    };
                    let resets: Vec<&str> = e.resets.iter().map(|&c| g.clocks()[c].as_str()).collect();
                    let resets = if resets.is_empty() { String::new() } else { format!(" reset {}", resets.join(" ")) };
                    println!("n{} -> n{} on {label}{resets}", e.from, e.to);
                }
            }
            Ok(0)
        }
        Cmd::Era { file, no_delta } => {
            let ta = load(&file)?;
            let p = Pipeline::build(&ta).map_err(err)?;
            let names: Vec<String> =
                p.counter_names().iter().enumerate().map(|(i, n)| format!("{}={n}", i + 1)).collect();
            println!("# counters {}", names.join(" "));
            println!("# one letter of the timed automaton is {} letters here", p.factor());
            if !no_delta {
                println!("# with silent transitions; states not listed as auxiliary are complete");
                print!("{}", p.era);
                println!();
            }
            println!("# silent transitions removed");
            print!("{}", p.era_no_delta);
            Ok(0)
        }
    }
}

fn checked_word(ta: &TimedAutomaton, text: &str) -> Result<Vec<String>, String> {
    let word = parse_word(text);
    if let Some(bad) = word.iter().find(|a| ta.letter_index(a).is_none()) {
        return Err(format!("letter `{bad}` is not in the alphabet"));
    }
    Ok(word)
}

fn print_analysis(a: &Analysis, report: &VerificationReport) {
    match &a.verdict {
        Verdict::Samplable { rate, bound, method } => {
            let b = bound.map(|b| format!(", bound {b}")).unwrap_or_default();
            println!("SAMPLABLE epsilon={rate} ({method}{b})");
        }
        Verdict::NotSamplable { evidence } => {
            println!("NOT_SAMPLABLE");
            println!("evidence (checked up to k={}): {evidence}", evidence.bounds.len());
        }
        Verdict::Unknown { max_bound } => println!("UNKNOWN (tried bounds up to {max_bound})"),
    }
    for t in &a.attempts {
        match &t.lost_word {
            Some(w) => println!("bound {} loses: {}", t.bound, show_word(w)),
            None => println!("bound {}: budget exhausted", t.bound),
        }
    }
    for (rate, w) in &report.witnesses {
        match w {
            Some(w) => println!("epsilon={rate}: {} is accepted densely but not sampled", show_word(w)),
            None => println!("epsilon={rate}: no lost word found"),
        }
    }
    if matches!(a.verdict, Verdict::Samplable { .. }) {
        let bad = report.checks.iter().filter(|c| !c.agrees()).count();
        println!("oracle check: {} words, {bad} disagreements", report.checks.len());
    }
}

fn show_word(w: &[String]) -> String {
    if w.is_empty() {
        "ε".into()
    } else {
        w.join(" ")
    }
}

#[derive(Serialize)]
struct JsonVerdict {
    verdict: &'static str,
    epsilon: Option<String>,
    bound: Option<u64>,
    method: Option<String>,
    evidence: Vec<serde_json::Value>,
    checks: Vec<JsonCheck>,
}

#[derive(Serialize)]
struct JsonCheck {
    epsilon: String,
    word: Vec<String>,
    dense: bool,
    sampled: Option<bool>,
}

impl JsonVerdict {
    fn new(a: &Analysis, report: &VerificationReport) -> JsonVerdict {
        let (epsilon, bound, method) = match &a.verdict {
            Verdict::Samplable { rate, bound, method } => (Some(rate.to_string()), *bound, Some(method.to_string())),
            _ => (None, None, None),
        };
        let mut evidence = Vec::new();
        if let Verdict::NotSamplable { evidence: e } = &a.verdict {
            evidence.push(serde_json::json!({
                "prefix": e.prefix, "pump": e.pump, "suffix": e.suffix, "min_bounds": e.bounds,
            }));
            for (rate, w) in &report.witnesses {
                evidence.push(serde_json::json!({ "epsilon": rate.to_string(), "lost_word": w }));
            }
        }
        for t in &a.attempts {
            evidence.push(serde_json::json!({ "bound": t.bound, "lost_word": t.lost_word, "exhausted": t.exhausted }));
        }
        let checks = report
            .checks
            .iter()
            .map(|c| JsonCheck { epsilon: c.rate.to_string(), word: c.word.clone(), dense: c.dense, sampled: c.sampled })
            .collect();
        JsonVerdict { verdict: a.verdict.name(), epsilon, bound, method, evidence, checks }
    }
}
