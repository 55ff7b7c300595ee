//! Partial-observation supervisor: the observer of a supervisor, whose states
//! are uncertainty sets, annotated with the flags localization works from.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::{Event, EventSet};
use crate::generator::{explore, Generator, StateId};
use crate::ops::project_determinize;

/// Flags of one uncertainty set `U`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// Some member allows tick.
    pub tick_enabled: bool,
    /// Forcible events `α` that preempt tick somewhere in `U`: a member
    /// allows `α`, does not allow tick, and the plant does allow tick there.
    pub preempting: EventSet,
    /// Events allowed at some member.
    pub enabled: EventSet,
    /// Events disallowed at some member while the plant allows them.
    pub disabled: EventSet,
    /// Some member is a marked supervisor state.
    pub marked: bool,
    /// Some member corresponds to a marked plant state.
    pub plant_marked: bool,
}

#[derive(Debug, Clone)]
pub struct UncertaintyAutomaton {
    pub sup: Generator,
    pub view: EventSet,
    /// Observer over the observable part of the alphabet.
    pub gen: Generator,
    /// Supervisor states making up each observer state.
    pub sets: Vec<Vec<StateId>>,
    pub flags: Vec<Flags>,
}

impl UncertaintyAutomaton {
    pub fn num_states(&self) -> usize {
        self.gen.num_states()
    }

    pub fn is_annotated(&self) -> bool {
        self.flags.len() == self.sets.len() && !self.sets.is_empty()
    }

    /// Text dump: one line per uncertainty set with its members and flags.
    pub fn dump(&self) -> String {
        let names = |s: &EventSet| s.iter().map(Event::name).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        for (u, set) in self.sets.iter().enumerate() {
            let members = set.iter().map(|x| x.to_string()).collect::<Vec<_>>();
            write!(out, "U{u} {{{}}}", members.join(",")).unwrap();
            if let Some(f) = self.flags.get(u) {
                write!(
                    out,
                    " tick={} M={} T={} preempt=[{}] enabled=[{}] disabled=[{}]",
                    f.tick_enabled as u8,
                    f.marked as u8,
                    f.plant_marked as u8,
                    names(&f.preempting),
                    names(&f.enabled),
                    names(&f.disabled)
                )
                .unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Observer of `sup` under `view`, flags unset.
pub fn build_supo(sup: &Generator, view: &EventSet) -> UncertaintyAutomaton {
    let (gen, sets) = project_determinize(sup, view);
    UncertaintyAutomaton {
        sup: sup.clone(),
        view: view.clone(),
        gen,
        sets,
        flags: Vec::new(),
    }
}

/// Plant states paired with each supervisor state in the reachable part of
/// the product `sup × g`.
pub fn plant_states(sup: &Generator, g: &Generator) -> Result<Vec<BTreeSet<StateId>>> {
    if sup.alphabet() != g.alphabet() {
        return Err(Error::AlphabetMismatch(
            "supervisor and plant must share an alphabet".into(),
        ));
    }
    let (_, pairs) = explore(
        sup.alphabet().clone(),
        sup.initial().zip(g.initial()),
        |&(x, q), i, _| Some((sup.next(x, i)?, g.next(q, i)?)),
        |_| false,
    );
    let mut map = vec![BTreeSet::new(); sup.num_states()];
    for (x, q) in pairs {
        map[x as usize].insert(q);
    }
    if sup.states().any(|x| map[x as usize].is_empty()) {
        return Err(Error::Invalid(
            "supervisor has strings outside the plant language".into(),
        ));
    }
    Ok(map)
}

/// Computes the flags of every uncertainty set against plant `g`.
pub fn annotate_flags(
    supo: &UncertaintyAutomaton,
    g: &Generator,
    forcible: &EventSet,
) -> Result<UncertaintyAutomaton> {
    let sup = &supo.sup;
    let map = plant_states(sup, g)?;
    let alpha = sup.alphabet();
    let tick = alpha.index_of(&Event::tick());
    let flags = supo
        .sets
        .iter()
        .map(|set| {
            let mut f = Flags::default();
            for &x in set {
                let qs = &map[x as usize];
                let x_tick = tick.is_some_and(|t| sup.next(x, t).is_some());
                let g_tick = tick.is_some_and(|t| qs.iter().any(|&q| g.next(q, t).is_some()));
                f.tick_enabled |= x_tick;
                f.marked |= sup.is_marked(x);
                f.plant_marked |= qs.iter().any(|&q| g.is_marked(q));
                for (i, e) in alpha.iter().enumerate() {
                    if e.is_tick() {
                        continue;
                    }
                    if sup.next(x, i).is_some() {
                        f.enabled.insert(e.clone());
                        if forcible.contains(e) && !x_tick && g_tick {
                            f.preempting.insert(e.clone());
                        }
                    } else if qs.iter().any(|&q| g.next(q, i).is_some()) {
                        f.disabled.insert(e.clone());
                    }
                }
            }
            f
        })
        .collect();
    Ok(UncertaintyAutomaton {
        flags,
        ..supo.clone()
    })
}

/// A control decision made inconsistently within one uncertainty set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetViolation {
    pub set: usize,
    pub event: Event,
    /// Member allowing the event.
    pub enabling: StateId,
    /// Member disallowing (or, for tick, preempting) it.
    pub disabling: StateId,
}

/// Checks that within every uncertainty set each event of `events` is never
/// allowed at one member and disallowed at another where the plant allows
/// it. Tick is checked when included.
pub fn check_uncertainty_sets(
    supo: &UncertaintyAutomaton,
    g: &Generator,
    events: &EventSet,
) -> Result<Vec<SetViolation>> {
    let sup = &supo.sup;
    let map = plant_states(sup, g)?;
    let mut out = Vec::new();
    for (u, set) in supo.sets.iter().enumerate() {
        for (i, e) in sup.alphabet().iter().enumerate() {
            if !events.contains(e) {
                continue;
            }
            let on = set.iter().find(|&&x| sup.next(x, i).is_some());
            let off = set.iter().find(|&&x| {
                sup.next(x, i).is_none() && map[x as usize].iter().any(|&q| g.next(q, i).is_some())
            });
            if let (Some(&a), Some(&b)) = (on, off) {
                out.push(SetViolation {
                    set: u,
                    event: e.clone(),
                    enabling: a,
                    disabling: b,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::event_set;
    use crate::generator::{Alphabet, GeneratorBuilder};

    fn chain() -> Generator {
        let mut b = GeneratorBuilder::new(Alphabet::new(["u".into(), "o".into()]));
        let s = b.add_states(3);
        b.add_transition(s[0], &"u".into(), s[1]).unwrap();
        b.add_transition(s[1], &"o".into(), s[2]).unwrap();
        b.set_marked(s[2], true).unwrap();
        b.build()
    }

    #[test]
    fn subsets_follow_unobservable_reach() {
        let supo = build_supo(&chain(), &event_set(["o"]));
        assert_eq!(supo.sets, vec![vec![0, 1], vec![2]]);
        let full = build_supo(&chain(), &event_set(["o", "u"]));
        assert_eq!(full.num_states(), 3);
        let none = build_supo(&chain(), &EventSet::new());
        assert_eq!(none.sets, vec![vec![0, 1, 2]]);
        assert!(none.gen.is_marked(0));
    }

    #[test]
    fn preemption_and_disablement_flags() {
        // plant: 0 -a-> 1, 0 -tick-> 2, 0 -b-> 3; supervisor keeps only a
        let alpha = Alphabet::new(["a".into(), "b".into(), Event::tick()]);
        let mut b = GeneratorBuilder::new(alpha.clone());
        let s = b.add_states(4);
        b.add_transition(s[0], &"a".into(), s[1]).unwrap();
        b.add_transition(s[0], &Event::tick(), s[2]).unwrap();
        b.add_transition(s[0], &"b".into(), s[3]).unwrap();
        b.set_marked(s[1], true).unwrap();
        let g = b.build();
        let mut b = GeneratorBuilder::new(alpha);
        let s = b.add_states(2);
        b.add_transition(s[0], &"a".into(), s[1]).unwrap();
        b.set_marked(s[1], true).unwrap();
        let sup = b.build();
        let supo = build_supo(&sup, &event_set(["a", "b", "tick"]));
        let supo = annotate_flags(&supo, &g, &event_set(["a"])).unwrap();
        let f = &supo.flags[0];
        assert!(!f.tick_enabled);
        assert_eq!(f.preempting, event_set(["a"]));
        assert_eq!(f.disabled, event_set(["b"]));
        assert!(!f.marked && !f.plant_marked);
        assert!(supo.flags[1].marked && supo.flags[1].plant_marked);
    }

    #[test]
    fn set_scan_detects_lookalike_disagreement() {
        // plant over {u, b}: b possible before and after u; supervisor allows b only first
        let alpha = Alphabet::new(["b".into(), "u".into()]);
        let mut b = GeneratorBuilder::new(alpha.clone());
        let s = b.add_states(4);
        b.add_transition(s[0], &"u".into(), s[1]).unwrap();
        b.add_transition(s[0], &"b".into(), s[2]).unwrap();
        b.add_transition(s[1], &"b".into(), s[3]).unwrap();
        for x in &s {
            b.set_marked(*x, true).unwrap();
        }
        let g = b.build();
        let mut b = GeneratorBuilder::new(alpha);
        let s = b.add_states(3);
        b.add_transition(s[0], &"u".into(), s[1]).unwrap();
        b.add_transition(s[0], &"b".into(), s[2]).unwrap();
        for x in &s {
            b.set_marked(*x, true).unwrap();
        }
        let sup = b.build();
        let supo = build_supo(&sup, &event_set(["b"]));
        let report = check_uncertainty_sets(&supo, &g, &event_set(["b"])).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].event, Event::new("b"));
        let single = build_supo(&Generator::universal(Alphabet::new([])), &EventSet::new());
        assert!(check_uncertainty_sets(&single, &Generator::universal(Alphabet::new([])), &EventSet::new())
            .unwrap()
            .is_empty());
    }
}
