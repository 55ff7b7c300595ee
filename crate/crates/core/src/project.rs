//! Project files: event declarations, agent activity models, specifications,
//! the observation view, channels and pipeline options.
//!
//! ```text
//! event alpha1 ctrl forcible 0 inf
//! agent M1
//! state I initial marked
//! trans I alpha1 W
//! spec BUF
//! state 0 initial marked
//! trans 0 beta1 1
//! view base unobservable alpha1 mu1
//! channel M1 beta1 M2 bounded 1
//! option ambient iterated
//! ```
//!
//! `state` and `trans` lines belong to the most recent `agent` or `spec`
//! line. A spec's alphabet is the set of events on its transitions plus any
//! listed on `alphabet` lines; the rest of the plant alphabet is selflooped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::delay::{augment, Agent, Augmented, ChannelDescriptor, ChannelKind, TimeoutRule};
use crate::error::{Error, Result};
use crate::event::{Bounds, Event, EventInfo, EventSet, EventTable};
use crate::generator::{Alphabet, Generator, GeneratorBuilder};
use crate::ops::{selfloop_lift, sync_all};
use crate::synthesis::{AmbientPolicy, SynthesisOptions};
use crate::ttg::{build_ttg, comp, AtgSpec, MarkingRule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub name: String,
    pub prohibitible: bool,
    pub forcible: bool,
    pub bounds: Bounds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub marked: bool,
    pub initial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub name: String,
    pub alphabet: Vec<String>,
    pub states: Vec<StateDecl>,
    pub transitions: Vec<(String, String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDecl {
    pub name: String,
    pub unobservable: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectOptions {
    pub ambient: AmbientPolicy,
    pub marking: MarkingRule,
    pub marking_clause: bool,
    pub timeout: TimeoutRule,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions {
            ambient: AmbientPolicy::default(),
            marking: MarkingRule::default(),
            marking_clause: true,
            timeout: TimeoutRule::default(),
        }
    }
}

impl ProjectOptions {
    pub fn synthesis(&self) -> SynthesisOptions {
        SynthesisOptions {
            ambient: self.ambient,
            marking_clause: self.marking_clause,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProjectConfig {
    pub events: Vec<EventDecl>,
    pub agents: Vec<Block>,
    pub specs: Vec<Block>,
    pub view: Option<ViewDecl>,
    pub channels: Vec<ChannelDescriptor>,
    pub options: ProjectOptions,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Agent,
    Spec,
}

fn parse_bound(tok: &str, line: usize) -> Result<Option<u32>> {
    if tok == "inf" {
        return Ok(None);
    }
    tok.parse()
        .map(Some)
        .map_err(|_| Error::parse(line, format!("bad time bound `{tok}`")))
}

pub fn ambient_name(a: AmbientPolicy) -> &'static str {
    match a {
        AmbientPolicy::Fixed => "fixed",
        AmbientPolicy::Specification => "specification",
        AmbientPolicy::Iterated => "iterated",
    }
}

pub fn parse_ambient(s: &str) -> Option<AmbientPolicy> {
    match s {
        "fixed" => Some(AmbientPolicy::Fixed),
        "specification" => Some(AmbientPolicy::Specification),
        "iterated" => Some(AmbientPolicy::Iterated),
        _ => None,
    }
}

pub fn marking_name(m: MarkingRule) -> &'static str {
    match m {
        MarkingRule::Activity => "activity",
        MarkingRule::DefaultTimers => "default-timers",
    }
}

pub fn parse_marking(s: &str) -> Option<MarkingRule> {
    match s {
        "activity" => Some(MarkingRule::Activity),
        "default-timers" => Some(MarkingRule::DefaultTimers),
        _ => None,
    }
}

fn current(p: &mut ProjectConfig, section: Section, line: usize) -> Result<&mut Block> {
    match section {
        Section::Agent => Ok(p.agents.last_mut().unwrap()),
        Section::Spec => Ok(p.specs.last_mut().unwrap()),
        Section::None => Err(Error::parse(line, "state or trans outside an agent or spec")),
    }
}

pub fn parse_project(text: &str) -> Result<ProjectConfig> {
    let mut p = ProjectConfig::default();
    let mut section = Section::None;
    let mut seen_events = BTreeSet::new();
    let mut block_names = BTreeSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["event", name, ctrl, force, lo, hi] => {
                if *name == crate::event::TICK {
                    return Err(Error::parse(line, "event name `tick` is reserved"));
                }
                if !seen_events.insert(name.to_string()) {
                    return Err(Error::parse(line, format!("event `{name}` declared twice")));
                }
                let prohibitible = match *ctrl {
                    "ctrl" => true,
                    "unctrl" => false,
                    other => return Err(Error::parse(line, format!("expected ctrl|unctrl, got `{other}`"))),
                };
                let forcible = match *force {
                    "forcible" => true,
                    "nonforcible" => false,
                    other => {
                        return Err(Error::parse(
                            line,
                            format!("expected forcible|nonforcible, got `{other}`"),
                        ))
                    }
                };
                let lower = parse_bound(lo, line)?
                    .ok_or_else(|| Error::parse(line, "lower bound must be finite"))?;
                let bounds = Bounds::new(lower, parse_bound(hi, line)?);
                bounds
                    .check(name)
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                p.events.push(EventDecl {
                    name: name.to_string(),
                    prohibitible,
                    forcible,
                    bounds,
                });
            }
            [kind @ ("agent" | "spec"), name] => {
                if !block_names.insert(name.to_string()) {
                    return Err(Error::parse(line, format!("block `{name}` declared twice")));
                }
                let b = Block {
                    name: name.to_string(),
                    ..Block::default()
                };
                if *kind == "agent" {
                    p.agents.push(b);
                    section = Section::Agent;
                } else {
                    p.specs.push(b);
                    section = Section::Spec;
                }
            }
            ["state", name, flags @ ..] => {
                let b = current(&mut p, section, line)?;
                if b.states.iter().any(|s| s.name == *name) {
                    return Err(Error::parse(line, format!("state `{name}` declared twice")));
                }
                let mut s = StateDecl {
                    name: name.to_string(),
                    marked: false,
                    initial: false,
                };
                for f in flags {
                    match *f {
                        "marked" => s.marked = true,
                        "initial" => s.initial = true,
                        other => return Err(Error::parse(line, format!("unknown state flag `{other}`"))),
                    }
                }
                if s.initial && b.states.iter().any(|x| x.initial) {
                    return Err(Error::parse(line, "second initial state"));
                }
                b.states.push(s);
            }
            ["trans", src, ev, dst] => {
                let b = current(&mut p, section, line)?;
                for st in [src, dst] {
                    if !b.states.iter().any(|s| s.name == *st) {
                        return Err(Error::parse(line, format!("undeclared state `{st}`")));
                    }
                }
                b.transitions
                    .push((src.to_string(), ev.to_string(), dst.to_string()));
            }
            ["alphabet", evs @ ..] if section == Section::Spec => {
                let b = current(&mut p, section, line)?;
                b.alphabet.extend(evs.iter().map(|e| e.to_string()));
            }
            ["view", name, "unobservable", evs @ ..] => {
                if p.view.is_some() {
                    return Err(Error::parse(line, "only one view may be declared"));
                }
                p.view = Some(ViewDecl {
                    name: name.to_string(),
                    unobservable: evs.iter().map(|e| e.to_string()).collect(),
                });
                section = Section::None;
            }
            ["channel", sender, ev, receiver, rest @ ..] => {
                let kind = match rest {
                    ["bounded", d] => ChannelKind::Bounded(
                        d.parse()
                            .map_err(|_| Error::parse(line, format!("bad delay bound `{d}`")))?,
                    ),
                    ["unbounded"] => ChannelKind::Unbounded,
                    _ => return Err(Error::parse(line, "expected `bounded <d>` or `unbounded`")),
                };
                p.channels
                    .push(ChannelDescriptor::new(sender, Event::new(ev), receiver, kind));
                section = Section::None;
            }
            ["option", key, value] => {
                let bad = || Error::parse(line, format!("bad value `{value}` for option `{key}`"));
                match *key {
                    "ambient" => p.options.ambient = parse_ambient(value).ok_or_else(bad)?,
                    "marking" => p.options.marking = parse_marking(value).ok_or_else(bad)?,
                    "marking-clause" => {
                        p.options.marking_clause = match *value {
                            "on" => true,
                            "off" => false,
                            _ => return Err(bad()),
                        }
                    }
                    "timeout" => {
                        p.options.timeout = match *value {
                            "reset" => TimeoutRule::Reset,
                            "ignore" => TimeoutRule::Ignore,
                            _ => return Err(bad()),
                        }
                    }
                    other => return Err(Error::parse(line, format!("unknown option `{other}`"))),
                }
                section = Section::None;
            }
            _ => return Err(Error::parse(line, format!("unrecognized line `{}`", raw.trim()))),
        }
    }
    p.check()?;
    Ok(p)
}

impl ProjectConfig {
    fn check(&self) -> Result<()> {
        let known: BTreeSet<&str> = self
            .events
            .iter()
            .map(|e| e.name.as_str())
            .chain([crate::event::TICK])
            .collect();
        let unknown = |what: &str, e: &str| Error::Invalid(format!("{what}: undeclared event `{e}`"));
        if self.agents.is_empty() {
            return Err(Error::Invalid("a project needs at least one agent".into()));
        }
        for b in self.agents.iter().chain(&self.specs) {
            for (_, e, _) in &b.transitions {
                if !known.contains(e.as_str()) {
                    return Err(unknown(&b.name, e));
                }
            }
            for e in &b.alphabet {
                if !known.contains(e.as_str()) {
                    return Err(unknown(&b.name, e));
                }
            }
        }
        for a in &self.agents {
            if a.transitions.iter().any(|(_, e, _)| e == crate::event::TICK) {
                return Err(Error::Invalid(format!("agent {}: tick labels a transition", a.name)));
            }
        }
        if let Some(v) = &self.view {
            for e in &v.unobservable {
                if !known.contains(e.as_str()) {
                    return Err(unknown("view", e));
                }
            }
        }
        let agents: BTreeSet<&str> = self.agents.iter().map(|a| a.name.as_str()).collect();
        for c in &self.channels {
            for who in [&c.sender, &c.receiver] {
                if !agents.contains(who.as_str()) {
                    return Err(Error::Invalid(format!("channel: unknown agent `{who}`")));
                }
            }
            if !known.contains(c.event.name()) {
                return Err(unknown("channel", c.event.name()));
            }
        }
        Ok(())
    }

    /// Canonical text: fixed section order, one line per item.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let ctrl = if e.prohibitible { "ctrl" } else { "unctrl" };
            let force = if e.forcible { "forcible" } else { "nonforcible" };
            writeln!(out, "event {} {ctrl} {force} {}", e.name, e.bounds).unwrap();
        }
        let block = |out: &mut String, kind: &str, b: &Block| {
            writeln!(out, "{kind} {}", b.name).unwrap();
            if !b.alphabet.is_empty() {
                writeln!(out, "alphabet {}", b.alphabet.join(" ")).unwrap();
            }
            for s in &b.states {
                let mut l = format!("state {}", s.name);
                if s.initial {
                    l.push_str(" initial");
                }
                if s.marked {
                    l.push_str(" marked");
                }
                writeln!(out, "{l}").unwrap();
            }
            for (a, e, d) in &b.transitions {
                writeln!(out, "trans {a} {e} {d}").unwrap();
            }
        };
        for a in &self.agents {
            block(&mut out, "agent", a);
        }
        for s in &self.specs {
            block(&mut out, "spec", s);
        }
        if let Some(v) = &self.view {
            let mut l = format!("view {} unobservable", v.name);
            for e in &v.unobservable {
                l.push(' ');
                l.push_str(e);
            }
            writeln!(out, "{l}").unwrap();
        }
        for c in &self.channels {
            let kind = match c.kind {
                ChannelKind::Bounded(d) => format!("bounded {d}"),
                ChannelKind::Unbounded => "unbounded".into(),
            };
            writeln!(out, "channel {} {} {} {kind}", c.sender, c.event, c.receiver).unwrap();
        }
        let o = &self.options;
        let d = ProjectOptions::default();
        if o.ambient != d.ambient {
            writeln!(out, "option ambient {}", ambient_name(o.ambient)).unwrap();
        }
        if o.marking != d.marking {
            writeln!(out, "option marking {}", marking_name(o.marking)).unwrap();
        }
        if o.marking_clause != d.marking_clause {
            writeln!(out, "option marking-clause off").unwrap();
        }
        if o.timeout != d.timeout {
            writeln!(out, "option timeout ignore").unwrap();
        }
        out
    }

    pub fn table(&self) -> Result<EventTable> {
        let mut t = EventTable::new();
        for e in &self.events {
            t.declare(&e.name, EventInfo::new(e.prohibitible, e.forcible, e.bounds))?;
        }
        Ok(t)
    }

    fn atg(&self, b: &Block, table: &EventTable) -> Result<AtgSpec> {
        let mut atg = AtgSpec::new(b.name.clone());
        for s in &b.states {
            let i = atg.activity(&s.name);
            if s.marked {
                atg.marked.insert(i);
            }
            if s.initial {
                atg.initial = i;
            }
        }
        for (src, e, dst) in &b.transitions {
            let ev = table.lookup(e)?;
            let bounds = table
                .bounds(&ev)
                .ok_or_else(|| Error::MissingBounds(e.clone()))?;
            atg.transition(src, &ev, dst, bounds);
        }
        Ok(atg)
    }

    /// Timed transition graph of every agent.
    pub fn agents(&self, table: &EventTable) -> Result<Vec<Agent>> {
        self.agents
            .iter()
            .map(|b| {
                Ok(Agent {
                    name: b.name.clone(),
                    component: build_ttg(&self.atg(b, table)?, self.options.marking)?,
                })
            })
            .collect()
    }

    pub fn plant(&self, table: &EventTable) -> Result<Generator> {
        let agents = self.agents(table)?;
        let parts: Vec<&Generator> = agents.iter().map(|a| &a.component).collect();
        Ok(comp(&parts))
    }

    /// A specification block as a generator over its own alphabet.
    pub fn spec_generator(&self, b: &Block) -> Result<Generator> {
        let events: BTreeSet<Event> = b
            .transitions
            .iter()
            .map(|(_, e, _)| Event::new(e))
            .chain(b.alphabet.iter().map(|e| Event::new(e)))
            .collect();
        let mut g = GeneratorBuilder::new(Alphabet::new(events));
        let mut ids = BTreeMap::new();
        let init = b.states.iter().position(|s| s.initial).unwrap_or(0);
        for (i, s) in b.states.iter().enumerate() {
            ids.insert(s.name.as_str(), g.add_state(s.marked));
            if i == init {
                g.set_initial(ids[s.name.as_str()])?;
            }
        }
        for (src, e, dst) in &b.transitions {
            g.add_transition(ids[src.as_str()], &Event::new(e), ids[dst.as_str()])?;
        }
        Ok(g.build())
    }

    /// All specifications composed and lifted to `alphabet`.
    pub fn spec(&self, alphabet: &Alphabet) -> Result<Generator> {
        let parts = self
            .specs
            .iter()
            .map(|b| selfloop_lift(&self.spec_generator(b)?, alphabet))
            .collect::<Result<Vec<_>>>()?;
        if parts.is_empty() {
            return Ok(Generator::universal(alphabet.clone()));
        }
        let refs: Vec<&Generator> = parts.iter().collect();
        sync_all(&refs).with_alphabet(alphabet)
    }

    /// Observable events of the delay-free plant alphabet.
    pub fn observable(&self, alphabet: &Alphabet) -> EventSet {
        let hidden: BTreeSet<&str> = self
            .view
            .iter()
            .flat_map(|v| v.unobservable.iter().map(String::as_str))
            .collect();
        alphabet
            .iter()
            .filter(|e| !hidden.contains(e.name()))
            .cloned()
            .collect()
    }

    pub fn has_channels(&self) -> bool {
        !self.channels.is_empty()
    }
}

/// A project turned into generators.
#[derive(Debug, Clone)]
pub struct Model {
    pub table: EventTable,
    pub agents: Vec<Agent>,
    pub plant: Generator,
    pub spec: Generator,
    pub observable: EventSet,
}

impl Model {
    pub fn build(p: &ProjectConfig) -> Result<Model> {
        let table = p.table()?;
        let agents = p.agents(&table)?;
        let parts: Vec<&Generator> = agents.iter().map(|a| &a.component).collect();
        let plant = comp(&parts);
        let spec = p.spec(plant.alphabet())?;
        let observable = p.observable(plant.alphabet());
        Ok(Model {
            table,
            agents,
            plant,
            spec,
            observable,
        })
    }

    /// Plant and specification with the project's channels.
    pub fn augmented(&self, p: &ProjectConfig) -> Result<Augmented> {
        augment(
            &self.agents,
            &self.spec,
            &self.observable,
            &p.channels,
            &self.table,
            p.options.timeout,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "event a ctrl forcible 0 inf\nagent A\nstate I initial marked\ntrans I a I\n";

    #[test]
    fn minimal_project() {
        let p = parse_project(MINIMAL).unwrap();
        assert_eq!(p.to_text(), MINIMAL);
        let m = Model::build(&p).unwrap();
        assert_eq!(m.plant.num_states(), 1);
        assert_eq!(m.observable.len(), 2);
    }

    #[test]
    fn duplicate_event_names_line() {
        let err = parse_project("event a ctrl forcible 0 inf\nevent a unctrl nonforcible 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn undeclared_references() {
        let err = parse_project("event a ctrl forcible 0 inf\nagent A\nstate I initial\ntrans I b I\n").unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
        let err = parse_project("agent A\nstate I\ntrans I a J\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn options_round_trip() {
        let text = format!("{MINIMAL}option ambient iterated\noption marking-clause off\n");
        let p = parse_project(&text).unwrap();
        assert_eq!(p.options.ambient, AmbientPolicy::Iterated);
        assert!(!p.options.marking_clause);
        assert_eq!(p.to_text(), text);
    }
}
