//! Seeded random instances for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delay::{augment, Agent, Augmented, ChannelDescriptor, ChannelKind, TimeoutRule};
use crate::error::Result;
use crate::event::{Bounds, Event, EventInfo, EventSet, EventTable};
use crate::generator::{Alphabet, Generator, GeneratorBuilder};
use crate::ops::selfloop_lift;
use crate::ttg::{build_ttg, AtgSpec, MarkingRule};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random deterministic generator with `states` states; each (state, event)
/// pair gets a transition with probability `density`.
pub fn random_generator(rng: &mut impl Rng, alphabet: &Alphabet, states: usize, density: f64) -> Generator {
    let mut b = GeneratorBuilder::new(alphabet.clone());
    let ids = b.add_states(states.max(1));
    for &s in &ids {
        b.set_marked(s, rng.gen_bool(0.5)).unwrap();
        for e in alphabet.iter() {
            if rng.gen_bool(density) {
                let t = *ids.choose(rng).unwrap();
                b.add_transition(s, e, t).unwrap();
            }
        }
    }
    b.build()
}

/// Monolithic instance: plant and specification over a common alphabet,
/// with event attributes and an observable set.
#[derive(Debug, Clone)]
pub struct Instance {
    pub plant: Generator,
    pub spec: Generator,
    pub table: EventTable,
    pub view: EventSet,
}

#[derive(Debug, Clone, Copy)]
pub struct InstanceParams {
    pub max_states: usize,
    /// Activity events; tick comes on top of these.
    pub max_events: usize,
    pub max_unobservable: usize,
    pub max_forcible: usize,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            max_states: 6,
            max_events: 4,
            max_unobservable: 2,
            max_forcible: 2,
        }
    }
}

/// A plant with at most `max_states` states over at most `max_events + 1`
/// events (tick included). At least one event is prohibitible.
pub fn random_instance(rng: &mut impl Rng, p: InstanceParams) -> Instance {
    let k = rng.gen_range(2..=p.max_events.max(2));
    let names: Vec<String> = (0..k).map(|i| format!("e{i}")).collect();
    let mut table = EventTable::new();
    let mut forcible_left = rng.gen_range(0..=p.max_forcible);
    for (i, n) in names.iter().enumerate() {
        let prohibitible = i == 0 || rng.gen_bool(0.4);
        let forcible = forcible_left > 0 && rng.gen_bool(0.5);
        if forcible {
            forcible_left -= 1;
        }
        table
            .declare(n, EventInfo::new(prohibitible, forcible, Bounds::remote(0)))
            .unwrap();
    }
    let alphabet = Alphabet::new(names.iter().map(|n| Event::new(n)).chain([Event::tick()]));
    let states = rng.gen_range(2..=p.max_states.max(2));
    let plant = random_generator(rng, &alphabet, states, 0.55);
    let spec_states = rng.gen_range(1..=3);
    let spec = random_generator(rng, &alphabet, spec_states, 0.8);
    let mut all: Vec<Event> = alphabet.iter().cloned().collect();
    all.shuffle(rng);
    let hidden = rng.gen_range(0..=p.max_unobservable);
    let view = all.into_iter().skip(hidden).collect();
    Instance {
        plant,
        spec,
        table,
        view,
    }
}

/// Two agents with small activity models, channel `1 → 2` bounded by
/// `d ∈ {1, 2}` and channel `2 → 1` unbounded.
pub fn random_delayed(rng: &mut impl Rng) -> Result<Augmented> {
    let mut table = EventTable::new();
    let mut agents = Vec::new();
    for a in 1..=2 {
        let mut atg = AtgSpec::new(a.to_string());
        let acts = ["I", "W", "D"];
        let n_act = rng.gen_range(2..=3);
        atg.marked.insert(0);
        for act in &acts[..n_act] {
            atg.activity(act);
        }
        let n_ev = rng.gen_range(2..=3);
        for j in 0..n_ev {
            let name = format!("{}{a}", ["a", "b", "c"][j]);
            let lower = rng.gen_range(0..=1);
            let bounds = if rng.gen_bool(0.5) {
                Bounds::remote(lower)
            } else {
                Bounds::finite(lower, lower + rng.gen_range(0..=1))
            };
            let prohibitible = j == 0 || rng.gen_bool(0.3);
            let forcible = prohibitible && rng.gen_bool(0.5);
            let ev = table.declare(&name, EventInfo::new(prohibitible, forcible, bounds))?;
            // a cycle through the activities keeps every agent live
            let (src, dst) = if j < n_act {
                (j, (j + 1) % n_act)
            } else {
                (rng.gen_range(0..n_act), rng.gen_range(0..n_act))
            };
            atg.transition(acts[src], &ev, acts[dst], bounds);
        }
        agents.push(Agent {
            name: a.to_string(),
            component: build_ttg(&atg, MarkingRule::Activity)?,
        });
    }
    let e1 = pick(rng, &agents[0].component);
    let e2 = pick(rng, &agents[1].component);
    let channels = vec![
        ChannelDescriptor::new("1", e1, "2", ChannelKind::Bounded(rng.gen_range(1..=2))),
        ChannelDescriptor::new("2", e2, "1", ChannelKind::Unbounded),
    ];
    let base: Vec<Event> = agents
        .iter()
        .flat_map(|a| a.component.alphabet().iter().cloned())
        .collect();
    let alphabet = Alphabet::new(base);
    let spec_states = rng.gen_range(1..=2);
    let spec_own = random_generator(rng, &alphabet, spec_states, 0.85);
    let spec = selfloop_lift(&spec_own, &alphabet)?;
    let mut all: Vec<Event> = alphabet.iter().filter(|e| !e.is_tick()).cloned().collect();
    all.shuffle(rng);
    let hidden = rng.gen_range(0..=1);
    let observable: EventSet = alphabet
        .iter()
        .filter(|e| !all[..hidden].contains(e))
        .cloned()
        .collect();
    augment(&agents, &spec, &observable, &channels, &table, TimeoutRule::Reset)
}

fn pick(rng: &mut impl Rng, g: &Generator) -> Event {
    let evs: Vec<&Event> = g.alphabet().iter().filter(|e| !e.is_tick()).collect();
    (*evs.choose(rng).unwrap()).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_instances_repeat() {
        let a = random_instance(&mut rng(7), InstanceParams::default());
        let b = random_instance(&mut rng(7), InstanceParams::default());
        assert_eq!(a.plant, b.plant);
        assert_eq!(a.spec, b.spec);
        assert_eq!(a.view, b.view);
        assert!(a.plant.num_states() <= 6);
        assert!(a.plant.alphabet().len() <= 5);
        assert!(!a.table.prohibitible().is_empty());
    }

    #[test]
    fn delayed_instances_build() {
        for seed in 0..5 {
            let aug = random_delayed(&mut rng(seed)).unwrap();
            assert_eq!(aug.views.len(), 2);
            assert_eq!(aug.channels.len(), 2);
        }
    }
}
