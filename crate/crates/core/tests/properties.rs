use proptest::prelude::*;
use rand::Rng;

use coexplore_core::cxt;
use coexplore_core::exploration::ExplorationState;
use coexplore_core::expert::{ei_standard, expert_join, expert_meet, knowledge_leq, Interaction};
use coexplore_core::oracle::{closure_by_models, kripke_oracle, OracleMode};
use coexplore_core::strategy::Question;
use coexplore_core::synth;
use coexplore_core::sweeps::{simulate_with, sound_in};
use coexplore_core::{
    Answer, AttrSet, Collaboration, Exec, Implication, StandardInteraction, StrategyConfig, StrategyKind,
    Theory,
};

fn set(bits: u64, m: usize) -> AttrSet {
    AttrSet::from_bits(bits & ((1u64 << m) - 1))
}

fn random_theory(rng: &mut impl Rng, m: usize, size: usize) -> Theory {
    let attrs = synth::attribute_names(m);
    let mut t = Theory::new(attrs);
    for _ in 0..size {
        let p = set(rng.random(), m);
        let c = set(rng.random(), m);
        t.push(Implication::new(p, c)).unwrap();
    }
    t
}

fn any_kind() -> impl Strategy<Value = StrategyKind> {
    prop::sample::select(StrategyKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn info_order_is_a_partial_order(seed: u64, g in 1usize..5, m in 1usize..5) {
        let mut r = synth::rng(seed);
        let base = synth::random_universe(&mut r, g, m, 0.5);
        let a = synth::weaken(&mut r, &base, 0.3);
        let b = synth::weaken(&mut r, &a, 0.3);
        let c = synth::weaken(&mut r, &b, 0.3);
        prop_assert!(a.info_leq(&a).unwrap());
        prop_assert!(b.info_leq(&a).unwrap() && c.info_leq(&b).unwrap());
        prop_assert!(c.info_leq(&a).unwrap());
        if a.info_leq(&b).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        let x = synth::random_incomplete(&mut r, g, m);
        let y = synth::random_incomplete(&mut r, g, m);
        if x.info_leq(&y).unwrap() && y.info_leq(&x).unwrap() {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn closure_is_a_closure_operator(seed: u64, m in 1usize..7, size in 0usize..8, a: u64, b: u64) {
        let mut r = synth::rng(seed);
        let t = random_theory(&mut r, m, size);
        let a = set(a, m);
        let b = set(b, m) | a;
        let ca = t.closure(a);
        prop_assert!(a.is_subset(ca));
        prop_assert!(ca.is_subset(t.closure(b)));
        prop_assert_eq!(t.closure(ca), ca);
        prop_assert!(t.is_closed(ca));
        prop_assert_eq!(ca, closure_by_models(&t, a));
    }

    #[test]
    fn entailment_follows_armstrong_rules(seed: u64, m in 1usize..7, size in 0usize..8, x: u64, y: u64, z: u64) {
        let mut r = synth::rng(seed);
        let t = random_theory(&mut r, m, size);
        let (x, y, z) = (set(x, m), set(y, m), set(z, m));
        // reflexivity
        prop_assert!(t.entails(&Implication::new(x | y, x)));
        if t.entails(&Implication::new(x, y)) {
            // augmentation
            prop_assert!(t.entails(&Implication::new(x | z, y | z)));
            // transitivity
            if t.entails(&Implication::new(y, z)) {
                prop_assert!(t.entails(&Implication::new(x, z)));
            }
        }
        for imp in t.iter() {
            prop_assert!(t.entails(imp));
        }
    }

    #[test]
    fn certain_implies_satisfiable(seed: u64, g in 0usize..4, m in 1usize..4, p: u64, c: u64) {
        let mut r = synth::rng(seed);
        let k = synth::random_incomplete(&mut r, g, m);
        let imp = Implication::new(set(p, m), set(c, m));
        let cert = imp.certainly_valid_in(&k);
        let sat = imp.satisfiable_in(&k);
        prop_assert!(!cert || sat);
        prop_assert_eq!(cert, kripke_oracle(&k, &imp, OracleMode::Certain, 12).unwrap());
        prop_assert_eq!(sat, kripke_oracle(&k, &imp, OracleMode::Satisfiable, 12).unwrap());
    }

    #[test]
    fn cxt_round_trip(seed: u64, g in 0usize..6, m in 1usize..6) {
        let mut r = synth::rng(seed);
        let k = synth::random_incomplete(&mut r, g, m);
        let text = cxt::write(&k);
        let back = cxt::parse(&text).unwrap();
        prop_assert_eq!(cxt::write(&back), text);
        prop_assert_eq!(back, k);
    }

    #[test]
    fn theory_text_round_trip(seed: u64, m in 1usize..6, size in 0usize..6) {
        let mut r = synth::rng(seed);
        let t = random_theory(&mut r, m, size);
        let back = Theory::parse_text(t.attributes().to_vec(), &t.to_text()).unwrap();
        prop_assert_eq!(back.implications(), t.implications());
    }

    #[test]
    fn expert_order_laws(seed: u64, g in 1usize..5, m in 1usize..4) {
        let mut r = synth::rng(seed);
        let u = synth::random_universe(&mut r, g, m, 0.5);
        let group = synth::random_group(&mut r, &u, 2).unwrap();
        let (a, b) = (&group[0], &group[1]);
        let j = expert_join(a, b).unwrap();
        let w = expert_meet(a, b).unwrap();
        prop_assert!(knowledge_leq(a, a).unwrap());
        prop_assert!(knowledge_leq(a, &j).unwrap() && knowledge_leq(b, &j).unwrap());
        prop_assert!(knowledge_leq(&w, a).unwrap() && knowledge_leq(&w, b).unwrap());
        // experts of one universe never contradict each other
        prop_assert!(a.examples.conflicts(&b.examples).unwrap().is_empty());
        prop_assert!(a.known.iter().all(|i| i.satisfiable_in(&b.examples)));
    }

    #[test]
    fn strategy_answers_are_consistent_with_the_universe(
        seed: u64, g in 1usize..6, m in 1usize..5, k in 1usize..4, kind in any_kind(), p: u64, c: u64,
    ) {
        let mut r = synth::rng(seed);
        let u = synth::random_universe(&mut r, g, m, 0.5);
        let group = synth::random_group(&mut r, &u, k).unwrap();
        let group = if kind == StrategyKind::Single { group[..1].to_vec() } else { group };
        let roster = group.iter().map(|e| e.name.clone()).collect();
        let mut collab = Collaboration::new(StrategyConfig::new(kind).with_seed(seed), roster)
            .unwrap()
            .with_knowledge(&group);
        let q = Implication::new(set(p, m), set(c, m));
        let (answer, exchanges) = collab
            .resolve_with(Question { id: 1, implication: q }, &group, &StandardInteraction, Exec::Sequential)
            .unwrap();
        for ex in &exchanges {
            prop_assert_eq!(&ex.answer, &StandardInteraction.ask(&q, &group[ex.expert]));
            prop_assert_eq!(&ex.answer, &ei_standard(&q, &group[ex.expert]));
        }
        match answer {
            Answer::Accept => prop_assert!(q.certainly_valid_in(&u)),
            Answer::Reject(rows) => {
                prop_assert!(rows.object_count() > 0);
                let ix: Vec<usize> = rows.objects().iter().map(|o| u.object_index(o).unwrap()).collect();
                prop_assert!(rows.info_leq(&u.restrict_indices(&ix)).unwrap());
                for row in 0..rows.object_count() {
                    prop_assert!(q.premise.is_subset(rows.row_certain(row)));
                    prop_assert!(!q.residual().is_subset(rows.row_possible(row)));
                }
            }
            Answer::Unknown(z) => {
                prop_assert!(z.is_subset(q.residual()));
                prop_assert!(Implication::new(q.premise, q.residual() - z).certainly_valid_in(&u));
            }
        }
        prop_assert!(collab.ledger().is_conserved());
    }

    #[test]
    fn explorations_are_sound_and_monotone(
        seed: u64, g in 1usize..6, m in 1usize..5, k in 1usize..4, kind in any_kind(),
    ) {
        let mut r = synth::rng(seed);
        let u = synth::random_universe(&mut r, g, m, 0.5);
        let group = synth::random_group(&mut r, &u, k).unwrap();
        let group = if kind == StrategyKind::Single { group[..1].to_vec() } else { group };
        let roster: Vec<String> = group.iter().map(|e| e.name.clone()).collect();
        let mut collab = Collaboration::new(StrategyConfig::new(kind).with_seed(seed), roster)
            .unwrap()
            .with_knowledge(&group);
        let mut st = ExplorationState::new(u.attributes().to_vec(), None, None).unwrap();
        let mut prev_examples = st.examples().clone();
        let mut prev_accepted = st.accepted().clone();
        while let Some(q) = st.next_question().unwrap() {
            let (a, _) = collab.resolve_with(q, &group, &StandardInteraction, Exec::Sequential).unwrap();
            st.apply_answer(q.id, a).unwrap();
            let now = st.examples();
            prop_assert!(prev_examples.objects().iter().zip(now.objects()).all(|(x, y)| x == y));
            let ix: Vec<usize> = (0..prev_examples.object_count()).collect();
            prop_assert!(prev_examples.info_leq(&now.restrict_indices(&ix)).unwrap());
            prop_assert!(st.accepted().entails_all(&prev_accepted));
            prev_examples = now.clone();
            prev_accepted = st.accepted().clone();
        }
        let res = st.result();
        prop_assert!(sound_in(&res.accepted, &u));
        for row in 0..res.real_counterexamples.object_count() {
            let name = &res.real_counterexamples.objects()[row];
            let gu = u.object_index(name).unwrap();
            prop_assert!(res.real_counterexamples.row(row).iter().zip(u.row(gu)).all(|(x, y)| x.info_leq(*y)));
        }
        // the examples, fictitious rows included, never contradict what was accepted
        for imp in res.accepted.iter() {
            prop_assert!(imp.satisfiable_in(&res.examples));
        }
        prop_assert!(collab.ledger().is_conserved());
    }

    #[test]
    fn broadcast_and_iterative_learn_the_same(seed: u64, g in 1usize..5, m in 1usize..4, k in 2usize..4) {
        let mut r = synth::rng(seed);
        let u = synth::random_universe(&mut r, g, m, 0.5);
        let group = synth::random_group(&mut r, &u, k).unwrap();
        let attrs = u.attributes().to_vec();
        let b = simulate_with(StrategyConfig::new(StrategyKind::Broadcast), &group, &attrs).unwrap();
        let i = simulate_with(StrategyConfig::new(StrategyKind::Iterative), &group, &attrs).unwrap();
        prop_assert!(b.result.accepted.cons_equivalent(&i.result.accepted));
        let ig = simulate_with(StrategyConfig::new(StrategyKind::Ignorant), &group, &attrs).unwrap();
        prop_assert!(ig.result.accepted.is_empty());
        prop_assert_eq!(ig.ledger.total, 0);
    }
}
