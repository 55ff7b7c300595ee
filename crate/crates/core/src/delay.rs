//! Communication channels with bounded or unbounded delay, and the per-agent
//! bookkeeping of the decentralized setting.
//!
//! A channel carries one event `σ` from a sender to a receiver. It is idle
//! until `σ` occurs, then `σ'` marks delivery (and acknowledgement) at the
//! receiver and `σ''` the acknowledgement reaching the sender. A bounded
//! channel also has a timeout `σ_tau` that resets it to idle.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::event::{Bounds, Event, EventInfo, EventSet, EventTable};
use crate::generator::{Alphabet, Generator, GeneratorBuilder};
use crate::ops::{selfloop_lift, sync_all, sync_product};
use crate::ttg::{build_ttg, comp, AtgSpec, MarkingRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// Delay bound in ticks.
    Bounded(u32),
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelDescriptor {
    pub sender: String,
    pub event: Event,
    pub receiver: String,
    pub kind: ChannelKind,
}

/// What a timeout does to the delay requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeoutRule {
    /// The timeout returns the requirement to idle.
    #[default]
    Reset,
    /// The timeout is ignored by the requirement (selflooped).
    Ignore,
}

/// Events generated for one channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelEvents {
    pub sent: Event,
    pub received: Event,
    pub acked: Event,
    pub timeout: Option<Event>,
}

impl ChannelEvents {
    pub fn all(&self) -> EventSet {
        [&self.sent, &self.received, &self.acked]
            .into_iter()
            .chain(self.timeout.as_ref())
            .cloned()
            .collect()
    }

    /// Events observed by the sender: `σ`, `σ''` and the timeout.
    pub fn sender_side(&self) -> EventSet {
        [&self.sent, &self.acked]
            .into_iter()
            .chain(self.timeout.as_ref())
            .cloned()
            .collect()
    }
}

impl ChannelDescriptor {
    pub fn new(sender: &str, event: Event, receiver: &str, kind: ChannelKind) -> Self {
        ChannelDescriptor {
            sender: sender.to_string(),
            event,
            receiver: receiver.to_string(),
            kind,
        }
    }

    pub fn events(&self) -> ChannelEvents {
        let n = self.event.name();
        ChannelEvents {
            sent: self.event.clone(),
            received: Event::new(&format!("{n}'")),
            acked: Event::new(&format!("{n}''")),
            timeout: match self.kind {
                ChannelKind::Bounded(_) => Some(Event::new(&format!("{n}_tau"))),
                ChannelKind::Unbounded => None,
            },
        }
    }

    fn signal_bounds(&self) -> (Bounds, Option<Bounds>) {
        match self.kind {
            ChannelKind::Bounded(d) => (Bounds::finite(0, d), Some(Bounds::finite(d, d))),
            ChannelKind::Unbounded => (Bounds::remote(0), None),
        }
    }

    /// Declares `σ'`, `σ''` (uncontrollable) and `σ_tau` (uncontrollable,
    /// forcible) in `table`.
    pub fn declare_events(&self, table: &mut EventTable) -> Result<ChannelEvents> {
        if !table.contains(&self.event) || self.event.is_tick() {
            return Err(Error::UnknownEvent(self.event.name().to_string()));
        }
        let ev = self.events();
        let (signal, timeout) = self.signal_bounds();
        for e in [&ev.received, &ev.acked] {
            if table.contains(e) {
                return Err(Error::NameCollision(e.name().to_string()));
            }
            table.declare(e.name(), EventInfo::new(false, false, signal))?;
        }
        if let (Some(e), Some(b)) = (&ev.timeout, timeout) {
            if table.contains(e) {
                return Err(Error::NameCollision(e.name().to_string()));
            }
            table.declare(e.name(), EventInfo::new(false, true, b))?;
        }
        Ok(ev)
    }

    /// Activity model of the channel. Inside the channel `σ` may occur
    /// whenever it is idle; its timing is the sender's.
    pub fn atg(&self) -> AtgSpec {
        let ev = self.events();
        let (signal, timeout) = self.signal_bounds();
        let mut atg = AtgSpec::new(format!(
            "CH({},{},{})",
            self.sender, self.event, self.receiver
        ));
        atg.transition("idle", &ev.sent, "sent", Bounds::remote(0));
        atg.transition("sent", &ev.received, "acked", signal);
        atg.transition("acked", &ev.acked, "idle", signal);
        if let (Some(t), Some(b)) = (&ev.timeout, timeout) {
            atg.transition("sent", t, "idle", b);
            atg.transition("acked", t, "idle", b);
        }
        atg.marked.insert(0);
        atg
    }

    /// Timed channel model.
    pub fn channel(&self) -> Result<Generator> {
        build_ttg(&self.atg(), MarkingRule::Activity)
    }

    /// Delay requirement over `{σ, σ'', tick}` (plus the timeout when it
    /// resets): bounded channels must see `σ''` within `d` ticks of `σ`;
    /// unbounded ones must see it eventually.
    pub fn requirement(&self, timeout: TimeoutRule) -> Generator {
        let ev = self.events();
        let mut events = vec![ev.sent.clone(), ev.acked.clone(), Event::tick()];
        let reset = match (&ev.timeout, timeout) {
            (Some(t), TimeoutRule::Reset) => {
                events.push(t.clone());
                Some(t.clone())
            }
            _ => None,
        };
        let mut b = GeneratorBuilder::new(Alphabet::new(events));
        let idle = b.add_state(true);
        let tick = Event::tick();
        b.add_transition(idle, &tick, idle).unwrap();
        match self.kind {
            ChannelKind::Bounded(d) => {
                let counts = b.add_states(d as usize + 1);
                b.add_transition(idle, &ev.sent, counts[0]).unwrap();
                for (i, &c) in counts.iter().enumerate() {
                    b.add_transition(c, &ev.acked, idle).unwrap();
                    if let Some(&next) = counts.get(i + 1) {
                        b.add_transition(c, &tick, next).unwrap();
                    }
                    if let Some(t) = &reset {
                        b.add_transition(c, t, idle).unwrap();
                    }
                }
            }
            ChannelKind::Unbounded => {
                let busy = b.add_state(false);
                b.add_transition(idle, &ev.sent, busy).unwrap();
                b.add_transition(busy, &tick, busy).unwrap();
                b.add_transition(busy, &ev.acked, idle).unwrap();
            }
        }
        b.build()
    }
}

/// An agent: a named plant component owning a set of events.
#[derive(Debug, Clone)]
pub struct Agent {
    pub name: String,
    pub component: Generator,
}

impl Agent {
    pub fn events(&self) -> EventSet {
        self.component
            .alphabet()
            .iter()
            .filter(|e| !e.is_tick())
            .cloned()
            .collect()
    }
}

/// Observation and responsibility data of one agent in the delayed plant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentView {
    pub agent: String,
    /// Events the agent is accountable for: its own events, the sender-side
    /// events of its outgoing channels and the delivery events of its
    /// incoming ones.
    pub events: EventSet,
    pub observable: EventSet,
    pub prohibitible: EventSet,
    pub forcible: EventSet,
}

/// Events that agent `l` receives through the declared channels.
pub fn communicated_to(l: &str, channels: &[ChannelDescriptor]) -> EventSet {
    channels
        .iter()
        .filter(|c| c.receiver == l)
        .map(|c| c.event.clone())
        .collect()
}

/// Observable set, prohibitible and forcible events of `agent` in the delayed
/// plant. `observable` is the delay-free observable set over the original
/// alphabet.
pub fn agent_view(
    agent: &Agent,
    observable: &EventSet,
    channels: &[ChannelDescriptor],
    table: &EventTable,
) -> AgentView {
    let own = agent.events();
    let incoming = communicated_to(&agent.name, channels);
    let mut obs: EventSet = observable.difference(&incoming).cloned().collect();
    let mut events = own.clone();
    let mut forcible: EventSet = own.iter().filter(|e| table.is_forcible(e)).cloned().collect();
    for c in channels {
        let ev = c.events();
        if c.sender == agent.name && c.receiver != agent.name {
            obs.extend(ev.sender_side());
            events.extend(ev.sender_side());
            forcible.extend(ev.timeout.clone());
        }
        if c.receiver == agent.name && c.sender != agent.name {
            obs.insert(ev.received.clone());
            events.insert(ev.received.clone());
        }
    }
    let prohibitible = own
        .iter()
        .filter(|e| table.is_prohibitible(e))
        .cloned()
        .collect();
    AgentView {
        agent: agent.name.clone(),
        events,
        observable: obs,
        prohibitible,
        forcible,
    }
}

/// Delayed plant and specification.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub plant: Generator,
    pub spec: Generator,
    pub table: EventTable,
    pub channels: Vec<(ChannelDescriptor, Generator, Generator)>,
    pub views: Vec<AgentView>,
}

/// Adds channel components and delay requirements to the plant made of
/// `agents` and the specification `spec`.
pub fn augment(
    agents: &[Agent],
    spec: &Generator,
    observable: &EventSet,
    channels: &[ChannelDescriptor],
    table: &EventTable,
    timeout: TimeoutRule,
) -> Result<Augmented> {
    let mut table = table.clone();
    let names: BTreeMap<&str, &Agent> = agents.iter().map(|a| (a.name.as_str(), a)).collect();
    let mut built = Vec::new();
    for c in channels {
        for who in [&c.sender, &c.receiver] {
            if !names.contains_key(who.as_str()) {
                return Err(Error::Invalid(format!("channel names unknown agent {who}")));
            }
        }
        if !names[c.sender.as_str()].events().contains(&c.event) {
            return Err(Error::Invalid(format!(
                "channel event {} is not an event of agent {}",
                c.event, c.sender
            )));
        }
        c.declare_events(&mut table)?;
        built.push((c.clone(), c.channel()?, c.requirement(timeout)));
    }
    // channels share their sent event with the sender by construction
    let parts: Vec<&Generator> = agents.iter().map(|a| &a.component).collect();
    let agents_plant = comp(&parts);
    let mut components = vec![&agents_plant];
    components.extend(built.iter().map(|(_, g, _)| g));
    let plant = sync_all(&components);
    let mut nspec = spec.clone();
    for (_, _, r) in &built {
        nspec = sync_product(&nspec, r);
    }
    let spec = selfloop_lift(&nspec, plant.alphabet())?;
    let views = agents
        .iter()
        .map(|a| agent_view(a, observable, channels, &table))
        .collect();
    Ok(Augmented {
        plant,
        spec,
        table,
        channels: built,
        views,
    })
}
