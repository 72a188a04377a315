mod common;

use common::*;
use proptest::prelude::*;
use tsa::era::runs::for_each_run;
use tsa::era::ExtendedRAutomaton;
use tsa::fa::words_up_to;

/// Two counters, no copies: N never exceeds 1 but M reaches 2.
#[test]
fn max_rule_outgrows_b_to_the_n() {
    let r = ExtendedRAutomaton::builder(2)
        .alphabet(["a"])
        .initial("s0")
        .accepting(["s3"])
        .transition("s0", "s1", "a", "0,1")
        .transition("s1", "s2", "a", "r{2},0")
        .transition("s2", "s3", "a", "1,0")
        .build()
        .unwrap();
    let mut last = None;
    for_each_run(&r, 3, |confs, _, mx| {
        if confs.len() == 4 {
            last = Some((confs[3].clone(), mx));
        }
    });
    let (c, mx) = last.unwrap();
    assert_eq!(c.n, vec![1, 1]);
    assert_eq!(c.m, vec![1, 2]);
    assert_eq!((mx.n, mx.m), (1, 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn p_stays_below_two_to_the_m(seed in any::<u64>()) {
        let r = random_era(&mut rng(seed), 3);
        for_each_run(&r, 6, |confs, _, _| {
            let c = confs.last().unwrap();
            for i in 0..r.counters() {
                assert!(c.p[i] <= 1 << c.m[i], "{c:?}");
                assert!(c.n[i] <= c.m[i] && c.n[i] <= c.p[i], "{c:?}");
            }
        });
    }

    #[test]
    fn bound_languages_are_nested(seed in any::<u64>()) {
        let r = random_era(&mut rng(seed), 4);
        let all = r.language_nfa();
        let nfas: Vec<_> = (0..4).map(|b| r.b_language_nfa(b, 1 << 16).unwrap()).collect();
        for w in words_up_to(2, 5) {
            let c = r.min_bound_indices(&w);
            prop_assert_eq!(all.accepts_indices(&w), c.is_some());
            for (b, nfa) in nfas.iter().enumerate() {
                prop_assert_eq!(nfa.accepts_indices(&w), c.is_some_and(|c| c <= b as u64));
            }
        }
    }

    #[test]
    fn era_text_round_trips(seed in any::<u64>()) {
        let r = random_era(&mut rng(seed), 4);
        let back = tsa::format::parse_era(&r.to_string()).unwrap();
        for w in words_up_to(2, 4) {
            prop_assert_eq!(back.min_bound_indices(&w), r.min_bound_indices(&w));
        }
    }
}
