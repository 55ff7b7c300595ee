//! Localization of a partial-observation supervisor into one local preemptor
//! per forcible event and one local controller per prohibitible event.

use serde::Serialize;

use crate::event::{Event, EventSet};
use crate::generator::{explore, Alphabet, Generator, GeneratorBuilder, StateId};
use crate::supo::{Flags, UncertaintyAutomaton};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "role", content = "event", rename_all = "lowercase")]
pub enum ConsistencyKind {
    /// Preemption of tick by a forcible event.
    Preemption(Event),
    /// Disablement of a prohibitible event.
    Control(Event),
}

impl ConsistencyKind {
    pub fn event(&self) -> &Event {
        match self {
            ConsistencyKind::Preemption(e) | ConsistencyKind::Control(e) => e,
        }
    }

    pub fn is_preemption(&self) -> bool {
        matches!(self, ConsistencyKind::Preemption(_))
    }
}

/// Summary of the flags that matter for one consistency kind; consistency of
/// two groups of uncertainty sets only depends on their summaries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Summary {
    enabled: bool,
    blocked: bool,
    /// (plant marked, supervisor marked) combinations present
    marks: [bool; 4],
}

impl Summary {
    fn of(f: &Flags, kind: &ConsistencyKind) -> Self {
        let mut marks = [false; 4];
        match kind {
            ConsistencyKind::Preemption(a) => Summary {
                enabled: f.tick_enabled,
                blocked: f.preempting.contains(a),
                marks,
            },
            ConsistencyKind::Control(b) => {
                marks[(f.plant_marked as usize) * 2 + f.marked as usize] = true;
                Summary {
                    enabled: f.enabled.contains(b),
                    blocked: f.disabled.contains(b),
                    marks,
                }
            }
        }
    }

    fn compatible(&self, o: &Summary) -> bool {
        if (self.enabled && o.blocked) || (o.enabled && self.blocked) {
            return false;
        }
        // same plant marking must mean same supervisor marking
        for t in 0..2 {
            let a = (self.marks[2 * t], self.marks[2 * t + 1]);
            let b = (o.marks[2 * t], o.marks[2 * t + 1]);
            if (a.0 && b.1) || (a.1 && b.0) {
                return false;
            }
        }
        true
    }

    fn join(&self, o: &Summary) -> Summary {
        let mut marks = self.marks;
        for (m, x) in marks.iter_mut().zip(o.marks) {
            *m |= x;
        }
        Summary {
            enabled: self.enabled || o.enabled,
            blocked: self.blocked || o.blocked,
            marks,
        }
    }
}

/// Consistency of two uncertainty sets.
pub fn consistent(u: &Flags, v: &Flags, kind: &ConsistencyKind) -> bool {
    Summary::of(u, kind).compatible(&Summary::of(v, kind))
}

/// Partition of the uncertainty sets into cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub kind: ConsistencyKind,
    pub cells: Vec<Vec<usize>>,
    pub cell_of: Vec<usize>,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn from_cells(kind: ConsistencyKind, n: usize, cells: Vec<Vec<usize>>) -> Self {
        let mut cell_of = vec![usize::MAX; n];
        for (i, c) in cells.iter().enumerate() {
            for &u in c {
                cell_of[u] = i;
            }
        }
        Cover {
            kind,
            cells,
            cell_of,
        }
    }
}

/// Union-find over uncertainty sets with an undo log, so that a tentative
/// merge and everything it forces can be rolled back.
struct Merger<'a> {
    gen: &'a Generator,
    parent: Vec<usize>,
    summary: Vec<Summary>,
    /// one representative successor per class and observable event
    succ: Vec<Vec<StateId>>,
    log: Vec<(usize, usize, Summary, Vec<StateId>)>,
}

impl<'a> Merger<'a> {
    fn new(supo: &'a UncertaintyAutomaton, kind: &ConsistencyKind) -> Self {
        let gen = &supo.gen;
        let n = gen.num_states();
        let k = gen.alphabet().len();
        Merger {
            gen,
            parent: (0..n).collect(),
            summary: supo.flags.iter().map(|f| Summary::of(f, kind)).collect(),
            succ: (0..n as StateId)
                .map(|s| (0..k).map(|i| gen.next(s, i).unwrap_or(StateId::MAX)).collect())
                .collect(),
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b` and everything forward closure
    /// forces; returns false (state unchanged) on conflict.
    fn try_merge(&mut self, a: usize, b: usize) -> bool {
        let mark = self.log.len();
        let mut stack = vec![(a, b)];
        while let Some((x, y)) = stack.pop() {
            let (x, y) = (self.find(x), self.find(y));
            if x == y {
                continue;
            }
            if !self.summary[x].compatible(&self.summary[y]) {
                self.rollback(mark);
                return false;
            }
            let (keep, gone) = if x < y { (x, y) } else { (y, x) };
            self.log
                .push((gone, keep, self.summary[keep], self.succ[keep].clone()));
            self.parent[gone] = keep;
            self.summary[keep] = self.summary[keep].join(&self.summary[gone]);
            let mut pending = Vec::new();
            for i in 0..self.gen.alphabet().len() {
                let (s, t) = (self.succ[keep][i], self.succ[gone][i]);
                if s == StateId::MAX {
                    self.succ[keep][i] = t;
                } else if t != StateId::MAX {
                    pending.push((s as usize, t as usize));
                }
            }
            // depth-first in event-name order
            stack.extend(pending.into_iter().rev());
        }
        true
    }

    fn rollback(&mut self, mark: usize) {
        while self.log.len() > mark {
            let (gone, keep, summary, succ) = self.log.pop().unwrap();
            self.parent[gone] = gone;
            self.summary[keep] = summary;
            self.succ[keep] = succ;
        }
    }
}

/// Greedy cover: each uncertainty set, in canonical order, joins the lowest
/// existing cell it can be merged with (merges forced by forward closure
/// included), else opens a new cell. The result is a partition.
pub fn compute_cover(supo: &UncertaintyAutomaton, kind: &ConsistencyKind) -> Cover {
    assert!(supo.is_annotated(), "uncertainty sets must carry flags");
    let n = supo.num_states();
    let mut m = Merger::new(supo, kind);
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        if m.find(i) != i {
            continue;
        }
        let mut joined = false;
        for &r in &roots {
            if m.find(r) == r && m.try_merge(r, i) {
                joined = true;
                break;
            }
        }
        if !joined {
            roots.push(i);
        }
        roots.retain(|&r| m.find(r) == r);
    }
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for u in 0..n {
        let r = m.find(u);
        if index[r] == usize::MAX {
            index[r] = cells.len();
            cells.push(Vec::new());
        }
        cells[index[r]].push(u);
    }
    Cover::from_cells(kind.clone(), n, cells)
}

/// Why a family of cells is not a valid cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverDefect {
    Uncovered(usize),
    Inconsistent { cell: usize, a: usize, b: usize },
    NotClosed { cell: usize, event: Event },
}

/// Independent re-check of a cover: every set covered, cells internally
/// consistent, and observable successors of each cell inside one cell.
pub fn verify_cover(supo: &UncertaintyAutomaton, cover: &Cover) -> Result<(), CoverDefect> {
    let n = supo.num_states();
    let mut covered = vec![false; n];
    for c in &cover.cells {
        for &u in c {
            covered[u] = true;
        }
    }
    if let Some(u) = covered.iter().position(|c| !c) {
        return Err(CoverDefect::Uncovered(u));
    }
    for (ci, c) in cover.cells.iter().enumerate() {
        for (i, &a) in c.iter().enumerate() {
            for &b in &c[i..] {
                if a != b && !consistent(&supo.flags[a], &supo.flags[b], &cover.kind) {
                    return Err(CoverDefect::Inconsistent { cell: ci, a, b });
                }
            }
        }
        for (i, e) in supo.gen.alphabet().iter().enumerate() {
            let targets: Vec<usize> = c
                .iter()
                .filter_map(|&u| supo.gen.next(u as StateId, i))
                .map(|t| t as usize)
                .collect();
            let ok = cover.cells.iter().any(|d| targets.iter().all(|t| d.contains(t)));
            if !ok {
                return Err(CoverDefect::NotClosed {
                    cell: ci,
                    event: e.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Quotient of the observer by a cover, with the per-cell flags `ψ` for the
/// localized event and for tick.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub gen: Generator,
    pub event_flag: Vec<bool>,
    pub tick_flag: Vec<bool>,
}

pub fn build_quotient(supo: &UncertaintyAutomaton, cover: &Cover) -> Quotient {
    let gen = &supo.gen;
    let ev = cover.kind.event();
    let init = gen.initial().map(|u0| cover.cell_of[u0 as usize]);
    let (j, cells) = explore(
        gen.alphabet().clone(),
        init,
        |&c, i, _| {
            cover.cells[c]
                .iter()
                .find_map(|&u| gen.next(u as StateId, i))
                .map(|t| cover.cell_of[t as usize])
        },
        |&c| cover.cells[c].iter().any(|&u| supo.flags[u].marked),
    );
    let event_flag = cells
        .iter()
        .map(|&c| cover.cells[c].iter().any(|&u| supo.flags[u].enabled.contains(ev)))
        .collect();
    let tick_flag = cells
        .iter()
        .map(|&c| cover.cells[c].iter().any(|&u| supo.flags[u].tick_enabled))
        .collect();
    Quotient {
        gen: j,
        event_flag,
        tick_flag,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalAutomaton {
    pub kind: ConsistencyKind,
    #[serde(skip)]
    pub gen: Generator,
    /// Observable events that change the local state, other than the
    /// localized event and, for preemptors, tick.
    pub comm: EventSet,
    #[serde(skip)]
    pub view: EventSet,
}

impl LocalAutomaton {
    pub fn event(&self) -> &Event {
        self.kind.event()
    }

    pub fn num_states(&self) -> usize {
        self.gen.num_states()
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ConsistencyKind::Preemption(e) => format!("LOC_P_{e}"),
            ConsistencyKind::Control(e) => format!("LOC_C_{e}"),
        }
    }
}

/// Local automaton from a quotient: keep the localized event, tick (for
/// preemptors) and the communication events; unobservable localized events
/// and tick become selfloops where their flag is set.
pub fn build_local(q: &Quotient, kind: &ConsistencyKind, view: &EventSet) -> LocalAutomaton {
    let j = &q.gen;
    let ev = kind.event().clone();
    let tick = Event::tick();
    let own = |e: &Event| *e == ev || (kind.is_preemption() && e.is_tick());
    let mut comm = EventSet::new();
    for (s, e, t) in j.transitions() {
        if s != t && !own(e) {
            comm.insert(e.clone());
        }
    }
    let mut events: Vec<Event> = comm.iter().cloned().collect();
    events.push(ev.clone());
    if kind.is_preemption() {
        events.push(tick.clone());
    }
    let alphabet = Alphabet::new(events);
    let mut b = GeneratorBuilder::new(alphabet.clone());
    for s in j.states() {
        b.add_state(j.is_marked(s));
    }
    for (s, e, t) in j.transitions() {
        if alphabet.contains(e) {
            b.add_transition(s, e, t).unwrap();
        }
    }
    for s in j.states() {
        if !view.contains(&ev) && q.event_flag[s as usize] {
            b.add_transition(s, &ev, s).unwrap();
        }
        if kind.is_preemption() && !view.contains(&tick) && q.tick_flag[s as usize] {
            b.add_transition(s, &tick, s).unwrap();
        }
    }
    LocalAutomaton {
        kind: kind.clone(),
        gen: b.build(),
        comm,
        view: view.clone(),
    }
}

/// One preemptor per forcible event and one controller per prohibitible
/// event on the annotated observer.
pub fn localize_all(
    supo: &UncertaintyAutomaton,
    forcible: &EventSet,
    prohibitible: &EventSet,
) -> Vec<LocalAutomaton> {
    let kinds = forcible
        .iter()
        .map(|a| ConsistencyKind::Preemption(a.clone()))
        .chain(prohibitible.iter().map(|b| ConsistencyKind::Control(b.clone())));
    kinds
        .map(|kind| {
            let cover = compute_cover(supo, &kind);
            let q = build_quotient(supo, &cover);
            build_local(&q, &kind, &supo.view)
        })
        .collect()
}
