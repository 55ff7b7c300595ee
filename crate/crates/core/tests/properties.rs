mod common;

use proptest::prelude::*;

use common::{brute_difference, distinguishes, maximality_violation, words};
use tdes_loc::generator::Alphabet;
use tdes_loc::ops::{lang_compare, minimize, project_determinize, sync_product, trim, CompareMode};
use tdes_loc::pipeline::{decentralized, monolithic};
use tdes_loc::random::{random_delayed, random_generator, random_instance, rng, InstanceParams};
use tdes_loc::synthesis::{sup_co, AmbientPolicy, SynthesisOptions};
use tdes_loc::text::{parse_generator, write_generator};
use tdes_loc::verify::{check_controllable, check_rel_coobservable, check_rel_observable};
use tdes_loc::{Event, EventSet, Generator};

fn alphabet(n: usize) -> Alphabet {
    Alphabet::new((0..n).map(|i| Event::new(&format!("e{i}"))))
}

fn pair(seed: u64) -> (Generator, Generator) {
    let mut r = rng(seed);
    let a = alphabet(1 + (seed % 4) as usize);
    let n1 = 1 + (seed / 4 % 5) as usize;
    let n2 = 1 + (seed / 20 % 5) as usize;
    (random_generator(&mut r, &a, n1, 0.5), random_generator(&mut r, &a, n2, 0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compare_agrees_with_enumeration(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let cmp = lang_compare(&a, &b, CompareMode::Equal).unwrap();
        let brute = brute_difference(&a, &b, 6);
        match cmp.counterexample() {
            None => prop_assert!(brute.is_none()),
            Some(w) => {
                prop_assert!(distinguishes(&a, &b, w));
                if let Some(v) = brute {
                    prop_assert_eq!(w.len(), v.len());
                }
            }
        }
    }

    #[test]
    fn subset_is_inclusion(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let sub = lang_compare(&a, &b, CompareMode::Subset).unwrap().holds();
        let (ca, ma) = words(&a, 6);
        let (cb, mb) = words(&b, 6);
        if sub {
            prop_assert!(ca.is_subset(&cb) && ma.is_subset(&mb));
        }
    }

    #[test]
    fn minimize_keeps_languages(seed in any::<u64>()) {
        let (a, _) = pair(seed);
        let m = minimize(&a, None);
        prop_assert!(lang_compare(&a, &m, CompareMode::Equal).unwrap().holds());
        prop_assert!(m.num_states() <= a.num_states().max(1));
        prop_assert_eq!(minimize(&m, None).num_states(), m.num_states());
    }

    #[test]
    fn product_is_intersection(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let p = sync_product(&a, &b);
        let (ca, ma) = words(&a, 5);
        let (cb, mb) = words(&b, 5);
        let (cp, mp) = words(&p, 5);
        prop_assert_eq!(cp, ca.intersection(&cb).cloned().collect());
        prop_assert_eq!(mp, ma.intersection(&mb).cloned().collect());
    }

    #[test]
    fn observer_accepts_projections(seed in any::<u64>()) {
        let (a, _) = pair(seed);
        let view: EventSet = a.alphabet().iter().step_by(2).cloned().collect();
        let (obs, _) = project_determinize(&a, &view);
        let (closed, marked) = words(&a, 5);
        let project = |w: &Vec<Event>| w.iter().filter(|e| view.contains(*e)).cloned().collect::<Vec<_>>();
        for w in &closed {
            prop_assert!(obs.accepts_closed(&project(w)));
        }
        for w in &marked {
            prop_assert!(obs.accepts_marked(&project(w)));
        }
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let (a, _) = pair(seed);
        let text = write_generator("G", &a);
        let (_, b) = parse_generator(&text).unwrap();
        prop_assert_eq!(write_generator("G", &b), text);
    }

    #[test]
    fn supervisors_satisfy_their_definition(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), InstanceParams::default());
        let syn = sup_co(&inst.plant, &inst.spec, &inst.view, &inst.table, SynthesisOptions::default()).unwrap();
        if !syn.sup.is_empty() {
            prop_assert_eq!(trim(&syn.sup).num_states(), syn.sup.num_states());
            prop_assert!(lang_compare(&syn.sup, &syn.ambient, CompareMode::Subset).unwrap().holds());
            prop_assert!(check_controllable(&inst.plant, &syn.sup, &inst.table).unwrap().passed());
            let obs = check_rel_observable(&inst.plant, &syn.ambient, &syn.sup, &inst.view, None, true).unwrap();
            prop_assert!(obs.passed(), "{}", obs);
        }
    }

    #[test]
    fn supervisor_is_maximal(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), InstanceParams::default());
        let syn = sup_co(&inst.plant, &inst.spec, &inst.view, &inst.table, SynthesisOptions::default()).unwrap();
        if !syn.sup.is_empty() {
            let v = maximality_violation(&inst.plant, &syn.ambient, &syn.sup, &inst.view, &inst.table);
            prop_assert!(v.is_none(), "{:?}", v);
        }
    }

    #[test]
    fn more_observation_never_shrinks(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), InstanceParams::default());
        let full: EventSet = inst.plant.alphabet().to_set();
        let opts = SynthesisOptions { ambient: AmbientPolicy::Fixed, marking_clause: true };
        let part = sup_co(&inst.plant, &inst.spec, &inst.view, &inst.table, opts).unwrap();
        let all = sup_co(&inst.plant, &inst.spec, &full, &inst.table, opts).unwrap();
        prop_assert!(lang_compare(&part.sup, &all.sup, CompareMode::Subset).unwrap().holds());
    }

    #[test]
    fn monolithic_localization_is_equivalent(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), InstanceParams::default());
        match monolithic(&inst.plant, &inst.spec, &inst.view, &inst.table, SynthesisOptions::default()) {
            Ok(run) => {
                let audit = common::audit_locals(&run, &inst.plant, &inst.table);
                prop_assert!(audit.is_ok(), "{:?}", audit);
            }
            Err(tdes_loc::Error::EmptySupervisor { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decentralized_localization_is_equivalent(seed in any::<u64>()) {
        let aug = random_delayed(&mut rng(seed)).unwrap();
        match decentralized(&aug, SynthesisOptions::default()) {
            Ok(run) => {
                let views: Vec<EventSet> = aug.views.iter().map(|v| v.observable.clone()).collect();
                let resp: Vec<Option<EventSet>> = aug.views.iter().map(|v| Some(v.events.clone())).collect();
                let co = check_rel_coobservable(&aug.plant, &run.ambient, &run.sup, &views, &resp, true).unwrap();
                prop_assert!(co.passed(), "{}", co);
                prop_assert!(check_controllable(&aug.plant, &run.sup, &aug.table).unwrap().passed());
                let audit = common::audit_locals(&run, &aug.plant, &aug.table);
                prop_assert!(audit.is_ok(), "{:?}", audit);
            }
            Err(tdes_loc::Error::EmptySupervisor { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
