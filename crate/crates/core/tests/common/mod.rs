#![allow(dead_code)]

use std::collections::BTreeSet;

use tdes_loc::event::{Event, EventSet, EventTable};
use tdes_loc::generator::{Generator, GeneratorBuilder, StateId};
use tdes_loc::localize::{compute_cover, verify_cover, ConsistencyKind};
use tdes_loc::ops::{lang_compare, trim, CompareMode};
use tdes_loc::pipeline::Localized;
use tdes_loc::supo::{check_uncertainty_sets, plant_states};
use tdes_loc::verify::{check_controllable, check_local, check_rel_observable};

pub type Word = Vec<Event>;

/// Closed and marked words of `g` up to length `max`.
pub fn words(g: &Generator, max: usize) -> (BTreeSet<Word>, BTreeSet<Word>) {
    let mut closed = BTreeSet::new();
    let mut marked = BTreeSet::new();
    let Some(s0) = g.initial() else {
        return (closed, marked);
    };
    let mut stack = vec![(s0, Vec::new())];
    while let Some((s, w)) = stack.pop() {
        if g.is_marked(s) {
            marked.insert(w.clone());
        }
        if w.len() < max {
            for (i, e) in g.alphabet().iter().enumerate() {
                if let Some(t) = g.next(s, i) {
                    let mut w2 = w.clone();
                    w2.push(e.clone());
                    stack.push((t, w2));
                }
            }
        }
        closed.insert(w);
    }
    (closed, marked)
}

/// Shortest word (up to `max`) on which the closed or marked languages
/// differ, found by enumeration.
pub fn brute_difference(a: &Generator, b: &Generator, max: usize) -> Option<Word> {
    let (ca, ma) = words(a, max);
    let (cb, mb) = words(b, max);
    let mut diff: Vec<Word> = ca
        .symmetric_difference(&cb)
        .chain(ma.symmetric_difference(&mb))
        .cloned()
        .collect();
    diff.sort_by_key(|w| w.len());
    diff.into_iter().next()
}

pub fn distinguishes(a: &Generator, b: &Generator, w: &[Event]) -> bool {
    a.accepts_closed(w) != b.accepts_closed(w) || a.accepts_marked(w) != b.accepts_marked(w)
}

/// Copy of `g` with one extra transition `x -e-> n` to a fresh dead-end
/// state `n`.
pub fn with_extra(g: &Generator, x: StateId, e: &Event, marked: bool) -> Generator {
    let mut b = GeneratorBuilder::new(g.alphabet().clone());
    for s in g.states() {
        b.add_state(g.is_marked(s));
    }
    if let Some(s0) = g.initial() {
        b.set_initial(s0).unwrap();
    }
    for (s, ev, t) in g.transitions() {
        b.add_transition(s, ev, t).unwrap();
    }
    let n = b.add_state(marked);
    b.add_transition(x, e, n).unwrap();
    b.build()
}

/// Re-adds, one at a time, every plant transition the supervisor leaves out
/// and returns the first extension that still satisfies all of: inclusion
/// in the ambient, nonblocking, controllability and relative observability.
pub fn maximality_violation(
    g: &Generator,
    ambient: &Generator,
    sup: &Generator,
    view: &EventSet,
    table: &EventTable,
) -> Option<(StateId, Event)> {
    let map = plant_states(sup, g).unwrap();
    for x in sup.states() {
        for (i, e) in g.alphabet().iter().enumerate() {
            if sup.next(x, i).is_some() {
                continue;
            }
            for &q in &map[x as usize] {
                let Some(q2) = g.next(q, i) else { continue };
                let k = with_extra(sup, x, e, g.is_marked(q2));
                let inside = lang_compare(&k, ambient, CompareMode::Subset).unwrap().holds();
                let nonblocking = trim(&k).num_states() == k.num_states();
                let ok = inside
                    && nonblocking
                    && check_controllable(g, &k, table).unwrap().passed()
                    && check_rel_observable(g, ambient, &k, view, None, true)
                        .unwrap()
                        .passed();
                if ok {
                    return Some((x, e.clone()));
                }
            }
        }
    }
    None
}

/// Local automaton checks, cover re-verification and the uncertainty-set scan for a
/// finished pipeline. Returns a description of the first defect.
pub fn audit_locals(run: &Localized, plant: &Generator, table: &EventTable) -> Result<(), String> {
    for a in &run.locals {
        let v = check_local(&a.local, &run.sup, plant).unwrap();
        if !v.passed() {
            return Err(v.to_string());
        }
    }
    for supo in &run.supos {
        let mut checked: EventSet = table
            .prohibitible()
            .into_iter()
            .filter(|e| supo.sup.alphabet().contains(e))
            .collect();
        if run.supos.len() == 1 {
            checked.insert(Event::tick());
        }
        let kinds = run
            .locals
            .iter()
            .filter(|a| a.local.view == supo.view)
            .map(|a| a.local.kind.clone())
            .collect::<Vec<ConsistencyKind>>();
        if run.supos.len() > 1 {
            checked.retain(|e| kinds.iter().any(|k| k.event() == e));
        }
        let scan = check_uncertainty_sets(supo, plant, &checked).unwrap();
        if let Some(v) = scan.first() {
            return Err(format!("inconsistent uncertainty set on {} in set {}", v.event, v.set));
        }
        for kind in &kinds {
            let cover = compute_cover(supo, kind);
            if let Err(d) = verify_cover(supo, &cover) {
                return Err(format!("cover for {kind:?}: {d:?}"));
            }
        }
    }
    Ok(())
}

/// Result of one relative-observability pruning pass on a finite `k`,
/// computed by enumerating lookalike pairs: a string survives when no
/// prefix step `tσ` has a lookalike `s' ∈ C̄ ∩ L(G)` of `t` with
/// `s'σ ∈ L(G) \ K̄`; the marked survivors are kept together with their
/// prefixes.
pub fn obs_step_oracle(
    g: &Generator,
    c: &Generator,
    k: &Generator,
    view: &EventSet,
    max: usize,
) -> (BTreeSet<Word>, BTreeSet<Word>) {
    let project = |w: &[Event]| -> Word { w.iter().filter(|e| view.contains(*e)).cloned().collect() };
    let (kc, km) = words(k, max);
    let (cc, _) = words(c, max);
    let ambient: Vec<&Word> = cc.iter().filter(|w| g.accepts_closed(w)).collect();
    let bad = |t: &[Event], e: &Event| {
        let p = project(t);
        ambient.iter().any(|s| {
            let mut se = s.to_vec();
            se.push(e.clone());
            project(s) == p && g.accepts_closed(&se) && !kc.contains(&se)
        })
    };
    let survives = |w: &Word| (0..w.len()).all(|n| !bad(&w[..n], &w[n]));
    let marked: BTreeSet<Word> = km.iter().filter(|w| survives(w)).cloned().collect();
    let closed = marked
        .iter()
        .flat_map(|w| (0..=w.len()).map(|n| w[..n].to_vec()))
        .collect();
    (closed, marked)
}

/// Random walk of length at most `len` in `g`.
pub fn walk(r: &mut impl rand::Rng, g: &Generator, len: usize) -> Word {
    let mut w = Vec::new();
    let Some(mut s) = g.initial() else { return w };
    for _ in 0..r.gen_range(0..=len) {
        let en: Vec<usize> = g.enabled(s).collect();
        if en.is_empty() {
            break;
        }
        let i = en[r.gen_range(0..en.len())];
        w.push(g.alphabet().get(i).clone());
        s = g.next(s, i).unwrap();
    }
    w
}
