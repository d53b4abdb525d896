//! The Olympic disciplines walk-through with three experts.

use std::path::PathBuf;
use std::time::Instant;

use coexplore_core::cxt;
use coexplore_core::exploration::{run, ExplorationState, Source};
use coexplore_core::expert::{ei_standard, group_join, knowledge_leq, validate_expert};
use coexplore_core::strategy::{Question, StrategyConfig, StrategyKind};
use coexplore_core::{
    Answer, AttrSet, Collaboration, Exec, ExpertKnowledge, FormalContext, Implication,
    IncompleteContext, StandardInteraction,
};

const GE5: &str = "≥ 5 events";
const GE10: &str = "≥ 10 events";
const FEMALE: &str = "female only events";
const MALE: &str = "male only events";
const GE8: &str = "part of ≥ 8 olympics";

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/olympics")
        .join(name)
}

fn universe() -> IncompleteContext {
    cxt::parse(&std::fs::read_to_string(data("universe.cxt")).unwrap()).unwrap()
}

fn experts() -> Vec<ExpertKnowledge> {
    ["expert1.json", "expert2.json", "expert3.json"]
        .iter()
        .map(|f| ExpertKnowledge::load(&data(f)).unwrap())
        .collect()
}

fn set(ctx: &IncompleteContext, names: &[&str]) -> AttrSet {
    ctx.resolve_attributes(names).unwrap()
}

fn imp(ctx: &IncompleteContext, p: &[&str], c: &[&str]) -> Implication {
    Implication::new(set(ctx, p), set(ctx, c))
}

/// Ganter-style significance order under which the walk-through's question
/// sequence comes out.
const WALKTHROUGH_ORDER: [&str; 5] = [FEMALE, MALE, GE8, GE5, GE10];

fn iterative_run(order: Option<&[&str]>) -> coexplore_core::exploration::SimulationRun {
    let u = universe();
    let group = experts();
    let names = group.iter().map(|e| e.name.clone()).collect();
    let mut collab = Collaboration::new(StrategyConfig::new(StrategyKind::Iterative), names).unwrap();
    let mut st = ExplorationState::new(u.attributes().to_vec(), None, None).unwrap();
    if let Some(o) = order {
        st.set_lectic_order(o).unwrap();
    }
    run(st, &mut collab, &group, &StandardInteraction, Exec::Sequential).unwrap()
}

#[test]
fn experts_are_valid_for_the_universe() {
    let u = FormalContext::try_from(universe()).unwrap();
    for e in experts() {
        assert_eq!(e.attributes(), u.attributes());
        let r = validate_expert(&e, Some(&u)).unwrap();
        assert!(r.is_valid(), "{}: {:?}", e.name, r.violations);
    }
}

#[test]
fn golden_transcript() {
    let started = Instant::now();
    let r = iterative_run(Some(&WALKTHROUGH_ORDER));
    assert!(started.elapsed().as_secs_f64() < 1.0);
    let u = universe();
    let all = [GE5, GE10, FEMALE, MALE, GE8];

    // (premise, conclusion, source, per-expert answer kinds)
    type Row<'a> = (&'a [&'a str], &'a [&'a str], Source);
    let expected: [Row; 8] = [
        (&[], &all, Source::Strategy),
        (&[], &[GE8], Source::Strategy),
        (&[GE10], &[GE5, FEMALE, MALE, GE8], Source::Strategy),
        (&[GE10], &[GE5, GE8], Source::Derived),
        (&[GE5], &[MALE, GE8], Source::Strategy),
        (&[GE5], &[MALE], Source::Strategy),
        (&[GE5, GE10, MALE, GE8], &[FEMALE], Source::Strategy),
        (&[FEMALE], &[MALE], Source::Strategy),
    ];
    assert_eq!(r.result.history.len(), 8);
    for (i, (h, (p, c, src))) in r.result.history.iter().zip(expected.iter()).enumerate() {
        assert_eq!(h.id, i as u64 + 1);
        assert_eq!(h.question, imp(&u, p, c), "question {}", i + 1);
        assert_eq!(h.source, *src, "question {}", i + 1);
    }

    let t = &r.transcript;
    assert_eq!(t.len(), 7);
    let who = |k: usize| -> Vec<(usize, String)> {
        t[k].exchanges
            .iter()
            .map(|e| {
                let tag = match &e.answer {
                    Answer::Accept => "accept".to_string(),
                    Answer::Reject(ctx) => format!("reject {}", ctx.objects().join("|")),
                    Answer::Unknown(z) => format!("unknown {}", u.attribute_names(*z).join("|")),
                };
                (e.expert, tag)
            })
            .collect()
    };
    let q1 = who(0);
    assert_eq!(q1.len(), 1);
    assert_eq!(q1[0].0, 0);
    match &t[0].answer {
        Answer::Reject(k) => assert_eq!(
            k.objects(),
            [
                "Aquatics – Diving",
                "Aquatics – Water Polo",
                "Cycling – Road",
                "Equestrian – Dressage",
                "Equestrian – Eventing",
                "Equestrian – Jumping",
                "Football",
                "Hockey",
                "Modern Pentathlon",
                "Wrestling – Greco Roman",
            ]
        ),
        other => panic!("{other:?}"),
    }
    assert_eq!(
        who(1),
        vec![
            (0, format!("unknown {GE8}")),
            (
                1,
                "reject Aquatics – Marathon Swimming|Surfing|Triathlon".to_string()
            ),
        ]
    );
    assert_eq!(
        who(2),
        vec![
            (0, format!("unknown {FEMALE}|{MALE}")),
            (1, format!("unknown {GE5}|{FEMALE}|{MALE}|{GE8}")),
            (2, format!("unknown {FEMALE}|{MALE}|{GE8}")),
        ]
    );
    assert_eq!(t[2].answer, Answer::Unknown(set(&u, &[FEMALE, MALE])));
    assert_eq!(
        who(3),
        vec![
            (0, format!("unknown {MALE}|{GE8}")),
            (1, format!("unknown {GE8}")),
            (2, "reject Karate – Kumite|Taekwondo".to_string()),
        ]
    );
    assert_eq!(
        who(4),
        vec![(0, format!("unknown {MALE}")), (1, "accept".to_string())]
    );
    assert_eq!(
        who(5),
        vec![
            (0, format!("unknown {FEMALE}")),
            (1, format!("unknown {FEMALE}")),
            (2, format!("unknown {FEMALE}")),
        ]
    );
    assert_eq!(
        who(6),
        vec![
            (0, format!("unknown {MALE}")),
            (1, "reject Aquatics – Artistic Swimming".to_string()),
        ]
    );
    check_result(&r.result);
}

fn check_result(r: &coexplore_core::ExplorationResult) {
    let u = universe();
    let accepted: Vec<Implication> = r.accepted.implications().to_vec();
    let mut want = vec![imp(&u, &[GE10], &[GE5, GE8]), imp(&u, &[GE5], &[MALE])];
    let mut got = accepted.clone();
    want.sort();
    got.sort();
    assert_eq!(got, want);

    let expected_real =
        cxt::parse(&std::fs::read_to_string(data("expected_result_real.cxt")).unwrap()).unwrap();
    assert!(r.real_counterexamples.equivalent(&expected_real));
    let mut fict: Vec<String> = (0..r.fictitious_counterexamples.object_count())
        .map(|g| r.fictitious_counterexamples.row_string(g))
        .collect();
    fict.sort();
    assert_eq!(fict, vec!["?X.??", "?X?.?", "XX.XX"]);
    assert_eq!(r.examples.object_count(), 19);
    assert_eq!(r.possibly_valid.len(), 5);
    for f in &r.fictitious {
        let g = r.examples.object_index(&f.object).unwrap();
        assert!(f.premise.is_subset(r.examples.row_certain(g)));
        assert!(!r.examples.row_possible(g).contains(f.attribute));
    }
}

#[test]
fn default_order_asks_the_same_questions() {
    let a = iterative_run(Some(&WALKTHROUGH_ORDER));
    let b = iterative_run(None);
    let qs = |r: &coexplore_core::exploration::SimulationRun| {
        let mut v: Vec<(Implication, Source)> =
            r.result.history.iter().map(|h| (h.question, h.source)).collect();
        v.sort_by_key(|(i, s)| (*i, *s as u8));
        v
    };
    assert_eq!(qs(&a), qs(&b));
    check_result(&b.result);
}

#[test]
fn single_expert_answers() {
    let u = universe();
    let e = experts();
    assert_eq!(ei_standard(&imp(&u, &[GE5], &[MALE]), &e[1]), Answer::Accept);
    assert_eq!(
        ei_standard(&imp(&u, &[], &[GE8]), &e[0]),
        Answer::Unknown(set(&u, &[GE8]))
    );
    match ei_standard(&imp(&u, &[GE5], &[MALE, GE8]), &e[2]) {
        Answer::Reject(k) => {
            assert_eq!(k.objects(), ["Karate – Kumite", "Taekwondo"]);
            assert_eq!(k.row_string(0), "X.XX.");
            assert_eq!(k.row_string(1), "X.XX.");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn group_knowledge() {
    let e = experts();
    let max = group_join(&e).unwrap();
    let mut names: Vec<&String> = e.iter().flat_map(|x| x.examples.objects()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 35);
    assert_eq!(max.examples.object_count(), names.len());
    for x in &e {
        assert!(max.known.entails_all(&x.known));
        assert!(knowledge_leq(x, &max).unwrap());
    }
    assert!(!knowledge_leq(&e[0], &e[1]).unwrap());
    assert!(!knowledge_leq(&e[1], &e[0]).unwrap());
    let u = universe();
    match ei_standard(&imp(&u, &[GE5], &[MALE, GE8]), &max) {
        Answer::Reject(k) => {
            assert!(k.object_index("Karate – Kumite").is_some());
            assert!(k.object_index("Taekwondo").is_some());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn broadcast_question_three() {
    let u = universe();
    let group = experts();
    let names = group.iter().map(|e| e.name.clone()).collect();
    let mut c = Collaboration::new(StrategyConfig::new(StrategyKind::Broadcast), names).unwrap();
    let q = Question {
        id: 3,
        implication: imp(&u, &[GE10], &[GE5, FEMALE, MALE, GE8]),
    };
    let (a, ex) = c
        .resolve_with(q, &group, &StandardInteraction, Exec::Parallel)
        .unwrap();
    assert_eq!(a, Answer::Unknown(set(&u, &[FEMALE, MALE])));
    assert_eq!(ex.len(), 3);

    // Everyone who can refute the first question contributes rows.
    let q1 = Question {
        id: 1,
        implication: imp(&u, &[], &[GE5, GE10, FEMALE, MALE, GE8]),
    };
    let (a, _) = c
        .resolve_with(q1, &group, &StandardInteraction, Exec::Parallel)
        .unwrap();
    let Answer::Reject(k) = a else { panic!() };
    let mut expected: Option<IncompleteContext> = None;
    for e in &group {
        if let Answer::Reject(r) = ei_standard(&q1.implication, e) {
            expected = Some(match expected {
                None => r,
                Some(acc) => acc.join(&r).unwrap(),
            });
        }
    }
    assert_eq!(k, expected.unwrap());
    assert!(k.object_index("Surfing").is_some());
}

#[test]
fn max_knowledge_covers_iterative() {
    let group = experts();
    let names: Vec<String> = group.iter().map(|e| e.name.clone()).collect();
    let attrs = universe().attributes().to_vec();
    let mut c = Collaboration::new(StrategyConfig::new(StrategyKind::MaxKnowledge), names)
        .unwrap()
        .with_knowledge(&group);
    let st = ExplorationState::new(attrs, None, None).unwrap();
    let max = run(st, &mut c, &group, &StandardInteraction, Exec::Sequential).unwrap();
    let iter = iterative_run(None);
    assert!(max.result.accepted.entails_all(&iter.result.accepted));
    assert_eq!(max.ledger.total, 3);
}

#[test]
fn universe_round_trips_byte_exact() {
    for f in ["olympics_full.cxt", "universe.cxt", "expected_result_real.cxt"] {
        let text = std::fs::read_to_string(data(f)).unwrap();
        let ctx = cxt::parse(&text).unwrap();
        assert_eq!(cxt::write(&ctx), text, "{f}");
    }
    let full = cxt::parse(&std::fs::read_to_string(data("olympics_full.cxt")).unwrap()).unwrap();
    assert_eq!(full.object_count(), 50);
}
