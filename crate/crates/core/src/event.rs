//! Events and the global event registry.
//!
//! Events are interned names ordered lexicographically; that order is the
//! canonical event order used by every construction in the crate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Name of the distinguished clock event.
pub const TICK: &str = "tick";

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event(Arc<str>);

impl Event {
    pub fn new(name: &str) -> Self {
        Event(Arc::from(name))
    }

    pub fn tick() -> Self {
        Event::new(TICK)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_tick(&self) -> bool {
        &*self.0 == TICK
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Event {
    fn from(s: &str) -> Self {
        Event::new(s)
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

pub type EventSet = BTreeSet<Event>;

/// Convenience constructor for event sets in tests and fixtures.
pub fn event_set<'a>(names: impl IntoIterator<Item = &'a str>) -> EventSet {
    names.into_iter().map(Event::new).collect()
}

/// Renders a string of events as space-separated names; the empty string is
/// rendered as `ε`.
pub fn format_word(word: &[Event]) -> String {
    if word.is_empty() {
        return "ε".to_string();
    }
    word.iter().map(Event::name).collect::<Vec<_>>().join(" ")
}

/// Lower and upper time bounds; `upper == None` is infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Bounds {
    pub lower: u32,
    pub upper: Option<u32>,
}

impl Bounds {
    pub fn new(lower: u32, upper: Option<u32>) -> Self {
        Bounds { lower, upper }
    }

    pub fn finite(lower: u32, upper: u32) -> Self {
        Bounds::new(lower, Some(upper))
    }

    pub fn remote(lower: u32) -> Self {
        Bounds::new(lower, None)
    }

    /// Prospective events have a finite upper bound.
    pub fn is_prospective(&self) -> bool {
        self.upper.is_some()
    }

    /// Timer value an event holds while disabled or right after occurring.
    pub fn default_timer(&self) -> u32 {
        self.upper.unwrap_or(self.lower)
    }

    pub(crate) fn check(&self, name: &str) -> Result<()> {
        match self.upper {
            Some(u) if u < self.lower => Err(Error::InvalidBounds {
                name: name.to_string(),
                lower: self.lower,
                upper: u,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) => write!(f, "{} {}", self.lower, u),
            None => write!(f, "{} inf", self.lower),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EventInfo {
    /// May be disabled by a supervisor.
    pub prohibitible: bool,
    /// May preempt tick.
    pub forcible: bool,
    pub bounds: Option<Bounds>,
}

impl EventInfo {
    pub fn new(prohibitible: bool, forcible: bool, bounds: Bounds) -> Self {
        EventInfo {
            prohibitible,
            forcible,
            bounds: Some(bounds),
        }
    }
}

/// Registry of the activity events of a model. `tick` is implicit: it is
/// controllable, never prohibitible, never forcible and has no bounds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventTable {
    events: BTreeMap<Event, EventInfo>,
}

impl EventTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, info: EventInfo) -> Result<Event> {
        if name.is_empty() {
            return Err(Error::EmptyEventName);
        }
        if name == TICK {
            return Err(Error::ReservedEvent);
        }
        if let Some(b) = &info.bounds {
            b.check(name)?;
        }
        let ev = Event::new(name);
        if self.events.contains_key(&ev) {
            return Err(Error::DuplicateEvent(name.to_string()));
        }
        self.events.insert(ev.clone(), info);
        Ok(ev)
    }

    pub fn get(&self, ev: &Event) -> Option<&EventInfo> {
        self.events.get(ev)
    }

    pub fn contains(&self, ev: &Event) -> bool {
        ev.is_tick() || self.events.contains_key(ev)
    }

    pub fn lookup(&self, name: &str) -> Result<Event> {
        let ev = Event::new(name);
        if self.contains(&ev) {
            Ok(ev)
        } else {
            Err(Error::UnknownEvent(name.to_string()))
        }
    }

    pub fn is_prohibitible(&self, ev: &Event) -> bool {
        self.events.get(ev).is_some_and(|i| i.prohibitible)
    }

    pub fn is_forcible(&self, ev: &Event) -> bool {
        self.events.get(ev).is_some_and(|i| i.forcible)
    }

    /// Controllable events are the prohibitible ones plus tick.
    pub fn is_controllable(&self, ev: &Event) -> bool {
        ev.is_tick() || self.is_prohibitible(ev)
    }

    pub fn bounds(&self, ev: &Event) -> Option<Bounds> {
        self.events.get(ev).and_then(|i| i.bounds)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Event, &EventInfo)> {
        self.events.iter()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.events.keys()
    }

    pub fn forcible(&self) -> EventSet {
        self.iter()
            .filter(|(_, i)| i.forcible)
            .map(|(e, _)| e.clone())
            .collect()
    }

    pub fn prohibitible(&self) -> EventSet {
        self.iter()
            .filter(|(_, i)| i.prohibitible)
            .map(|(e, _)| e.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_is_reserved_and_controllable() {
        let mut t = EventTable::new();
        assert_eq!(
            t.declare("tick", EventInfo::new(false, false, Bounds::remote(0))),
            Err(Error::ReservedEvent)
        );
        assert!(t.is_controllable(&Event::tick()));
        assert!(!t.is_prohibitible(&Event::tick()));
        assert!(!t.is_forcible(&Event::tick()));
    }

    #[test]
    fn rejects_inverted_bounds_and_duplicates() {
        let mut t = EventTable::new();
        assert!(matches!(
            t.declare("a", EventInfo::new(true, false, Bounds::finite(3, 2))),
            Err(Error::InvalidBounds { .. })
        ));
        t.declare("a", EventInfo::new(true, false, Bounds::finite(1, 2)))
            .unwrap();
        assert_eq!(
            t.declare("a", EventInfo::new(true, false, Bounds::finite(1, 2))),
            Err(Error::DuplicateEvent("a".into()))
        );
    }

    #[test]
    fn default_timers() {
        assert_eq!(Bounds::finite(1, 2).default_timer(), 2);
        assert_eq!(Bounds::remote(1).default_timer(), 1);
        assert!(!Bounds::remote(0).is_prospective());
    }

    #[test]
    fn events_order_by_name() {
        let mut v = vec![Event::new("tick"), Event::new("b"), Event::new("a")];
        v.sort();
        assert_eq!(format_word(&v), "a b tick");
        assert_eq!(format_word(&[]), "ε");
    }
}
