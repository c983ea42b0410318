use std::collections::BTreeSet;

use proptest::prelude::*;

use genlim::adversaries::{enumeration_adversary, stream_adversary};
use genlim::classes::{finite_tailed, Hypothesis, HypothesisClass};
use genlim::closure::closure_set;
use genlim::game::{recompute_mistakes, run_generation_game};
use genlim::generators::{replay, uniform_generator, Generator};
use genlim::space::Example;

/// Members over {1..4} with an infinite negative tail: label bit 4 picks odd
/// (1) or even (0) negatives.
fn tailed(codes: &[u8]) -> HypothesisClass {
    let members: Vec<(Vec<i64>, u64)> = codes
        .iter()
        .map(|&c| ((1..=4).filter(|i| c >> (i - 1) & 1 == 1).collect(), (c >> 4) as u64))
        .collect();
    finite_tailed(4, 2, &members).unwrap()
}

fn codes() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::btree_set(0u8..32, 2..6).prop_map(|s| s.into_iter().collect())
}

fn support_prefix(h: &Hypothesis, n: usize) -> Vec<Example> {
    h.support().take(n).collect()
}

fn stream(h: &Hypothesis, picks: &[usize]) -> Vec<Example> {
    let pool = support_prefix(h, 12);
    picks.iter().map(|&i| pool[i % pool.len()]).collect()
}

fn outputs(g: &dyn Generator, xs: &[Example]) -> Vec<String> {
    replay(g, xs).iter().map(|r| format!("{r:?}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn replay_is_deterministic(codes in codes(), m in 0usize..6, cap in 0u64..5, picks in prop::collection::vec(0usize..12, 1..20)) {
        let class = tailed(&codes);
        let h = class.members().unwrap()[m % codes.len()].clone();
        let xs = stream(&h, &picks);
        let g = uniform_generator(&class, cap, 50);
        prop_assert_eq!(outputs(&g, &xs), outputs(&g, &xs));
    }

    #[test]
    fn outputs_depend_only_on_the_prefix(codes in codes(), m in 0usize..6, cap in 0u64..5, picks in prop::collection::vec(0usize..12, 2..20), cut in 1usize..20) {
        let class = tailed(&codes);
        let h = class.members().unwrap()[m % codes.len()].clone();
        let xs = stream(&h, &picks);
        let cut = cut.min(xs.len());
        let g = uniform_generator(&class, cap, 50);
        let full = outputs(&g, &xs);
        prop_assert_eq!(&full[..cut], &outputs(&g, &xs[..cut])[..]);
    }

    #[test]
    fn longer_horizon_extends_transcript(codes in codes(), m in 0usize..6, cap in 0u64..5, h1 in 1u64..10, extra in 0u64..10) {
        let class = tailed(&codes);
        let h = class.members().unwrap()[m % codes.len()].clone();
        let g = uniform_generator(&class, cap, 50);
        let short = run_generation_game(&g, &mut enumeration_adversary(&h), h1).unwrap();
        let long = run_generation_game(&g, &mut enumeration_adversary(&h), h1 + extra).unwrap();
        prop_assert!(short.rounds.len() <= long.rounds.len());
        prop_assert_eq!(&short.rounds[..], &long.rounds[..short.rounds.len()]);
    }

    #[test]
    fn mistakes_recompute_from_target(codes in codes(), m in 0usize..6, cap in 0u64..5, picks in prop::collection::vec(0usize..12, 1..15)) {
        let class = tailed(&codes);
        let h = class.members().unwrap()[m % codes.len()].clone();
        let xs = stream(&h, &picks);
        let n = xs.len() as u64;
        let g = uniform_generator(&class, cap, 50);
        let tr = run_generation_game(&g, &mut stream_adversary(&h, xs), n).unwrap();
        let bits: Vec<bool> = tr.rounds.iter().map(|r| r.mistake).collect();
        prop_assert_eq!(recompute_mistakes(&h, &tr.rounds), bits);
        for (i, r) in tr.rounds.iter().enumerate() {
            let distinct: BTreeSet<Example> = tr.rounds[..=i].iter().map(|r| r.x).collect();
            prop_assert_eq!(r.distinct_count, distinct.len() as u64);
        }
    }

    #[test]
    fn version_space_shrinks_as_positives_grow(codes in codes(), m in 0usize..6, picks in prop::collection::vec(0usize..12, 1..10)) {
        let class = tailed(&codes);
        let h = class.members().unwrap()[m % codes.len()].clone();
        let xs = stream(&h, &picks);
        let mut prev: Option<BTreeSet<String>> = None;
        for k in 0..=xs.len() {
            let vs: BTreeSet<String> = class.version_space(&xs[..k]).unwrap()
                .iter().map(|g| g.descriptor().to_string()).collect();
            prop_assert!(vs.contains(h.descriptor()));
            if let Some(p) = &prev {
                prop_assert!(vs.is_subset(p));
            }
            prev = Some(vs);
        }
    }

    #[test]
    fn closure_contains_prefix_and_grows(codes in codes(), m in 0usize..6, picks in prop::collection::vec(0usize..12, 1..8)) {
        let class = tailed(&codes);
        let h = class.members().unwrap()[m % codes.len()].clone();
        let xs = stream(&h, &picks);
        let window: Vec<Example> = (-10..=4).map(Example::Int).collect();
        let mut prev: Option<Vec<bool>> = None;
        for k in 1..=xs.len() {
            let c = closure_set(&class, &xs[..k], 50).unwrap();
            prop_assert!(!c.is_bot());
            for x in &xs[..k] {
                prop_assert!(c.contains(x));
            }
            let now: Vec<bool> = window.iter().map(|x| c.contains(x)).collect();
            if let Some(p) = &prev {
                for (a, b) in now.iter().zip(p) {
                    prop_assert!(*a || !b);
                }
            }
            prev = Some(now);
        }
    }
}
