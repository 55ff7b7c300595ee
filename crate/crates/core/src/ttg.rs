//! Timed transition graphs built from activity models and time bounds.
//!
//! Each event carries a countdown timer. A prospective event (finite upper
//! bound `u`) counts down from `u`, becomes eligible once its timer is at most
//! `u - l`, and blocks `tick` when the timer reaches zero. A remote event
//! (infinite upper bound) counts down from `l` and is eligible at zero.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::error::{Error, Result};
use crate::event::{Bounds, Event, EventSet};
use crate::generator::{explore, Alphabet, Generator, StateId};
use crate::ops::sync_all;

/// Untimed activity transition graph with per-event time bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtgSpec {
    pub name: String,
    pub activities: Vec<String>,
    pub initial: usize,
    pub marked: BTreeSet<usize>,
    pub transitions: Vec<(usize, Event, usize)>,
    pub bounds: BTreeMap<Event, Bounds>,
}

impl AtgSpec {
    pub fn new(name: impl Into<String>) -> Self {
        AtgSpec {
            name: name.into(),
            activities: Vec::new(),
            initial: 0,
            marked: BTreeSet::new(),
            transitions: Vec::new(),
            bounds: BTreeMap::new(),
        }
    }

    pub fn activity(&mut self, name: &str) -> usize {
        if let Some(i) = self.activities.iter().position(|a| a == name) {
            return i;
        }
        self.activities.push(name.to_string());
        self.activities.len() - 1
    }

    pub fn transition(&mut self, src: &str, ev: &Event, dst: &str, bounds: Bounds) {
        let s = self.activity(src);
        let d = self.activity(dst);
        self.transitions.push((s, ev.clone(), d));
        self.bounds.insert(ev.clone(), bounds);
    }

    pub fn events(&self) -> EventSet {
        self.transitions.iter().map(|(_, e, _)| e.clone()).collect()
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (s, e, d) in &self.transitions {
            if e.is_tick() {
                return Err(Error::Invalid(format!(
                    "{}: tick cannot label an activity transition",
                    self.name
                )));
            }
            if *s >= self.activities.len() || *d >= self.activities.len() {
                return Err(Error::Invalid(format!("{}: bad activity index", self.name)));
            }
            if !self.bounds.contains_key(e) {
                return Err(Error::MissingBounds(e.name().to_string()));
            }
            if !seen.insert((*s, e.clone())) {
                return Err(Error::Nondeterministic {
                    state: *s as StateId,
                    event: e.name().to_string(),
                });
            }
        }
        if self.initial >= self.activities.len().max(1) {
            return Err(Error::Invalid(format!("{}: bad initial activity", self.name)));
        }
        Ok(())
    }
}

/// Which timed states of a marked activity count as marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkingRule {
    /// Every timer vector at a marked activity.
    #[default]
    Activity,
    /// Only the all-default timer vector at a marked activity.
    DefaultTimers,
}

/// Builds the TTG of an activity model. The alphabet is the ATG events plus
/// `tick`; states are reachable (activity, timers) pairs.
pub fn build_ttg(atg: &AtgSpec, marking: MarkingRule) -> Result<Generator> {
    atg.validate()?;
    if atg.activities.is_empty() {
        return Ok(Generator::empty(Alphabet::new([Event::tick()])));
    }
    let events: Vec<Event> = atg.events().into_iter().collect();
    let bounds: Vec<Bounds> = events.iter().map(|e| atg.bounds[e]).collect();
    let defaults: Vec<u32> = bounds.iter().map(Bounds::default_timer).collect();
    let n_act = atg.activities.len();
    // enabled[a][k]: successor activity of event k at activity a
    let mut next_act = vec![vec![None; events.len()]; n_act];
    for (s, e, d) in &atg.transitions {
        let k = events.binary_search(e).unwrap();
        next_act[*s][k] = Some(*d);
    }
    let alphabet = Alphabet::new(events.iter().cloned().chain([Event::tick()]));
    let ev_index: Vec<Option<usize>> = alphabet
        .iter()
        .map(|e| events.binary_search(e).ok())
        .collect();

    type State = (usize, Vec<u32>);
    let init: State = (atg.initial, defaults.clone());
    let (g, _) = explore(
        alphabet,
        Some(init),
        |(a, timers): &State, i, ev| {
            let enabled = &next_act[*a];
            if ev.is_tick() {
                let blocked = (0..events.len()).any(|k| {
                    enabled[k].is_some() && bounds[k].is_prospective() && timers[k] == 0
                });
                if blocked {
                    return None;
                }
                let t = timers
                    .iter()
                    .enumerate()
                    .map(|(k, &t)| {
                        if enabled[k].is_some() {
                            t.saturating_sub(1)
                        } else {
                            defaults[k]
                        }
                    })
                    .collect();
                return Some((*a, t));
            }
            let k = ev_index[i].unwrap();
            let dst = enabled[k]?;
            let b = bounds[k];
            let eligible = match b.upper {
                None => timers[k] == 0,
                Some(u) => timers[k] <= u - b.lower,
            };
            if !eligible {
                return None;
            }
            let after = &next_act[dst];
            let t = timers
                .iter()
                .enumerate()
                .map(|(j, &t)| {
                    if j == k || after[j].is_none() {
                        defaults[j]
                    } else {
                        t
                    }
                })
                .collect();
            Some((dst, t))
        },
        |(a, timers)| {
            atg.marked.contains(a)
                && match marking {
                    MarkingRule::Activity => true,
                    MarkingRule::DefaultTimers => *timers == defaults,
                }
        },
    );
    Ok(g)
}

/// Non-tick events appearing in more than one component.
pub fn shared_events(components: &[&Generator]) -> EventSet {
    let mut seen = EventSet::new();
    let mut shared = EventSet::new();
    for g in components {
        for e in g.alphabet() {
            if !e.is_tick() && !seen.insert(e.clone()) {
                shared.insert(e.clone());
            }
        }
    }
    shared
}

/// Composition of component TDES: tick-synchronized product.
pub fn comp(components: &[&Generator]) -> Generator {
    let shared = shared_events(components);
    if !shared.is_empty() {
        warn!(
            "composition shares non-tick events: {}",
            shared.iter().map(Event::name).collect::<Vec<_>>().join(", ")
        );
    }
    if components.is_empty() {
        return Generator::universal(Alphabet::new([Event::tick()]));
    }
    sync_all(components)
}

/// States with no outgoing transition at all (time and activity locked).
pub fn deadlocks(g: &Generator) -> Vec<StateId> {
    g.states().filter(|&s| g.enabled(s).next().is_none()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<Event> {
        s.split_whitespace().map(Event::new).collect()
    }

    #[test]
    fn empty_activity_model() {
        let mut atg = AtgSpec::new("idle");
        atg.activity("I");
        atg.marked.insert(0);
        let g = build_ttg(&atg, MarkingRule::Activity).unwrap();
        assert_eq!(g.num_states(), 1);
        assert!(g.accepts_marked(&w("tick tick tick")));
    }

    fn one_step(lower: u32, upper: u32) -> Generator {
        let mut atg = AtgSpec::new("one");
        atg.transition("a0", &"s".into(), "a1", Bounds::finite(lower, upper));
        atg.marked.insert(1);
        build_ttg(&atg, MarkingRule::Activity).unwrap()
    }

    #[test]
    fn prospective_window() {
        let g = one_step(1, 2);
        assert!(!g.accepts_closed(&w("s")));
        assert!(g.accepts_marked(&w("tick s")));
        assert!(g.accepts_marked(&w("tick tick s tick tick")));
        assert!(!g.accepts_closed(&w("tick tick tick")));
        // (0,2) window, 3 timer values before the event, then a1
        assert_eq!(g.num_states(), 4);
    }

    #[test]
    fn deadline_forces_event() {
        let g = one_step(1, 1);
        assert!(g.accepts_closed(&w("tick s")));
        assert!(!g.accepts_closed(&w("tick tick")));
    }

    #[test]
    fn missing_bounds_rejected() {
        let mut atg = AtgSpec::new("bad");
        atg.transition("a", &"s".into(), "b", Bounds::remote(0));
        atg.bounds.clear();
        assert_eq!(
            build_ttg(&atg, MarkingRule::Activity),
            Err(Error::MissingBounds("s".into()))
        );
    }

    #[test]
    fn comp_identity_and_trivial() {
        let g = one_step(1, 2);
        assert_eq!(comp(&[&g]), g);
        let mut atg = AtgSpec::new("x");
        atg.activity("I");
        let x = build_ttg(&atg, MarkingRule::Activity).unwrap();
        let p = comp(&[&x, &x]);
        assert_eq!(p.num_states(), 1);
        assert_eq!(p.num_transitions(), 1);
    }
}
