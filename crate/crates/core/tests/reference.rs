mod common;

use common::{random_contract, random_implementation, random_lts_contract};
use dopetest::engine::replay_strategy;
use dopetest::oracle::{ioco_check_bounded, robustly_clean_bounded, IocoVerdict};
use dopetest::sut::{LtsPlayer, ReplaySut};
use dopetest::{
    build_reference_bounded, check_satisfiable_bounded, dt_run, random_strategy, Contract, NodeBudget, RunConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn satisfiable(seed: u64, depth: usize) -> Option<Contract> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = if rng.gen_bool(0.5) { random_contract(&mut rng) } else { random_lts_contract(&mut rng) };
    check_satisfiable_bounded(&c, depth, NodeBudget::default())
        .unwrap()
        .is_satisfiable()
        .then_some(c)
}

#[test]
fn reference_is_robustly_clean_and_ioco_to_itself() {
    let mut seen = 0;
    for seed in 0..60 {
        let depth = 3;
        let Some(c) = satisfiable(seed, depth) else { continue };
        seen += 1;
        let reference = build_reference_bounded(&c, depth, NodeBudget::default()).unwrap();
        let lts = reference.to_lts();
        let clean = robustly_clean_bounded(&lts, &c, depth, NodeBudget::default()).unwrap();
        assert!(clean.is_clean(), "seed {seed}: {clean:?}");
        assert_eq!(ioco_check_bounded(&lts, &reference), IocoVerdict::ConformsUpTo { depth });
    }
    assert!(seen >= 10, "only {seen} satisfiable contracts");
}

#[test]
fn reference_construction_is_deterministic() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_contract(&mut rng);
        let a = build_reference_bounded(&c, 3, NodeBudget::default()).unwrap().dump();
        let b = build_reference_bounded(&c, 3, NodeBudget::default()).unwrap().dump();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn failing_runs_replay_identically(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_contract(&mut rng);
        let lts = random_implementation(&mut rng, &c);
        let bound = rng.gen_range(1..=6);
        let mut strategy = random_strategy(seed).with_near_probability(0.9);
        let run = dt_run(&c, &mut LtsPlayer::new(lts, seed), &mut strategy, RunConfig::new(bound)).unwrap();
        prop_assert!(run.history.len() <= bound);
        if run.verdict.is_fail() {
            let h = run.history.clone();
            let again = dt_run(&c, &mut ReplaySut::new(h.clone()), &mut replay_strategy(h), RunConfig::new(bound)).unwrap();
            prop_assert_eq!(again, run);
        }
    }

    #[test]
    fn runs_never_exceed_the_bound(seed in any::<u64>(), bound in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_lts_contract(&mut rng);
        let lts = random_implementation(&mut rng, &c);
        let mut strategy = random_strategy(seed).with_near_probability(0.5);
        let run = dt_run(&c, &mut LtsPlayer::new(lts, seed), &mut strategy, RunConfig::new(bound)).unwrap();
        prop_assert!(run.history.len() <= bound);
    }
}
