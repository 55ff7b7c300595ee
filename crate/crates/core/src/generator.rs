//! Deterministic finite generators with partial transition maps.
//!
//! Every [`Generator`] is held in canonical form: all states are reachable,
//! the initial state is `0`, and states are numbered in breadth-first
//! discovery order with events expanded in name order. A generator with no
//! states is the empty generator; its closed language is empty.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::event::{Event, EventSet};

pub type StateId = u32;

pub(crate) const NONE: StateId = StateId::MAX;

/// A sorted, duplicate-free list of events.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Alphabet(Vec<Event>);

impl Alphabet {
    pub fn new(events: impl IntoIterator<Item = Event>) -> Self {
        let mut v: Vec<Event> = events.into_iter().collect();
        v.sort();
        v.dedup();
        Alphabet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, ev: &Event) -> Option<usize> {
        self.0.binary_search(ev).ok()
    }

    pub fn contains(&self, ev: &Event) -> bool {
        self.index_of(ev).is_some()
    }

    pub fn get(&self, idx: usize) -> &Event {
        &self.0[idx]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.0.iter()
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    pub fn to_set(&self) -> EventSet {
        self.0.iter().cloned().collect()
    }

    pub fn is_subset(&self, other: &Alphabet) -> bool {
        self.0.iter().all(|e| other.contains(e))
    }

    /// Indices of `self` events inside `other` (`None` if absent).
    pub(crate) fn map_into(&self, other: &Alphabet) -> Vec<Option<usize>> {
        self.0.iter().map(|e| other.index_of(e)).collect()
    }
}

impl FromIterator<Event> for Alphabet {
    fn from_iter<T: IntoIterator<Item = Event>>(iter: T) -> Self {
        Alphabet::new(iter)
    }
}

impl<'a> IntoIterator for &'a Alphabet {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    alphabet: Alphabet,
    delta: Vec<StateId>,
    marked: Vec<bool>,
}

impl Generator {
    /// The empty generator over `alphabet`.
    pub fn empty(alphabet: Alphabet) -> Self {
        Generator {
            alphabet,
            delta: Vec::new(),
            marked: Vec::new(),
        }
    }

    /// One state, marked, with a selfloop for every event: the language
    /// `alphabet*`.
    pub fn universal(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Generator {
            alphabet,
            delta: vec![0; n],
            marked: vec![true],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }

    pub fn initial(&self) -> Option<StateId> {
        (!self.is_empty()).then_some(0)
    }

    pub fn is_marked(&self, s: StateId) -> bool {
        self.marked[s as usize]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states() as StateId).filter(|&s| self.is_marked(s))
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.num_states() as StateId
    }

    /// Successor by alphabet index.
    #[inline]
    pub fn next(&self, s: StateId, idx: usize) -> Option<StateId> {
        let t = self.delta[s as usize * self.alphabet.len() + idx];
        (t != NONE).then_some(t)
    }

    /// Successor by event; `None` also when the event is outside the alphabet.
    pub fn step(&self, s: StateId, ev: &Event) -> Option<StateId> {
        self.alphabet.index_of(ev).and_then(|i| self.next(s, i))
    }

    pub fn run(&self, word: &[Event]) -> Option<StateId> {
        let mut s = self.initial()?;
        for ev in word {
            s = self.step(s, ev)?;
        }
        Some(s)
    }

    pub fn accepts_closed(&self, word: &[Event]) -> bool {
        self.run(word).is_some()
    }

    pub fn accepts_marked(&self, word: &[Event]) -> bool {
        self.run(word).is_some_and(|s| self.is_marked(s))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &Event, StateId)> + '_ {
        let n = self.alphabet.len();
        self.delta
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t != NONE)
            .map(move |(i, &t)| ((i / n) as StateId, self.alphabet.get(i % n), t))
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().filter(|&&t| t != NONE).count()
    }

    /// Events defined at `s`, as alphabet indices.
    pub fn enabled(&self, s: StateId) -> impl Iterator<Item = usize> + '_ {
        (0..self.alphabet.len()).filter(move |&i| self.next(s, i).is_some())
    }

    /// Replaces the alphabet with a superset without adding transitions.
    pub fn with_alphabet(&self, alphabet: &Alphabet) -> Result<Generator> {
        if !self.alphabet.is_subset(alphabet) {
            return Err(Error::AlphabetMismatch(
                "target alphabet omits events of the generator".into(),
            ));
        }
        let map = alphabet.map_into(&self.alphabet);
        let (g, _) = explore(
            alphabet.clone(),
            self.initial(),
            |&s, i, _| map[i].and_then(|j| self.next(s, j)),
            |&s| self.is_marked(s),
        );
        Ok(g)
    }
}

/// Breadth-first construction of a canonical generator from an implicit
/// transition structure. Returns the generator and the label of each state.
pub(crate) fn explore<S, F, M>(
    alphabet: Alphabet,
    init: Option<S>,
    mut succ: F,
    mut marked: M,
) -> (Generator, Vec<S>)
where
    S: Clone + Eq + Hash,
    F: FnMut(&S, usize, &Event) -> Option<S>,
    M: FnMut(&S) -> bool,
{
    let Some(init) = init else {
        return (Generator::empty(alphabet), Vec::new());
    };
    let n = alphabet.len();
    let mut index: HashMap<S, StateId> = HashMap::new();
    let mut labels = vec![init.clone()];
    index.insert(init, 0);
    let mut delta = Vec::new();
    let mut mark = Vec::new();
    let mut cur = 0usize;
    while cur < labels.len() {
        let label = labels[cur].clone();
        mark.push(marked(&label));
        for i in 0..n {
            let t = match succ(&label, i, alphabet.get(i)) {
                None => NONE,
                Some(next) => match index.entry(next) {
                    Entry::Occupied(o) => *o.get(),
                    Entry::Vacant(v) => {
                        let id = labels.len() as StateId;
                        labels.push(v.key().clone());
                        v.insert(id);
                        id
                    }
                },
            };
            delta.push(t);
        }
        cur += 1;
    }
    (
        Generator {
            alphabet,
            delta,
            marked: mark,
        },
        labels,
    )
}

/// Incremental construction of a generator from explicit states and
/// transitions; `build` canonicalizes (unreachable states are dropped).
#[derive(Debug, Clone)]
pub struct GeneratorBuilder {
    alphabet: Alphabet,
    marked: Vec<bool>,
    delta: Vec<StateId>,
    initial: Option<StateId>,
}

impl GeneratorBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        GeneratorBuilder {
            alphabet,
            marked: Vec::new(),
            delta: Vec::new(),
            initial: None,
        }
    }

    pub fn add_state(&mut self, marked: bool) -> StateId {
        let id = self.marked.len() as StateId;
        self.marked.push(marked);
        self.delta
            .extend(std::iter::repeat_n(NONE, self.alphabet.len()));
        if self.initial.is_none() {
            self.initial = Some(id);
        }
        id
    }

    pub fn add_states(&mut self, n: usize) -> Vec<StateId> {
        (0..n).map(|_| self.add_state(false)).collect()
    }

    pub fn set_marked(&mut self, s: StateId, marked: bool) -> Result<()> {
        self.check(s)?;
        self.marked[s as usize] = marked;
        Ok(())
    }

    pub fn set_initial(&mut self, s: StateId) -> Result<()> {
        self.check(s)?;
        self.initial = Some(s);
        Ok(())
    }

    pub fn add_transition(&mut self, src: StateId, ev: &Event, dst: StateId) -> Result<()> {
        self.check(src)?;
        self.check(dst)?;
        let idx = self
            .alphabet
            .index_of(ev)
            .ok_or_else(|| Error::UnknownEvent(ev.name().to_string()))?;
        let slot = &mut self.delta[src as usize * self.alphabet.len() + idx];
        if *slot != NONE && *slot != dst {
            return Err(Error::Nondeterministic {
                state: src,
                event: ev.name().to_string(),
            });
        }
        *slot = dst;
        Ok(())
    }

    /// Adds `ev`-selfloops at `s`.
    pub fn add_selfloops<'a>(
        &mut self,
        s: StateId,
        events: impl IntoIterator<Item = &'a Event>,
    ) -> Result<()> {
        for e in events {
            self.add_transition(s, e, s)?;
        }
        Ok(())
    }

    fn check(&self, s: StateId) -> Result<()> {
        if (s as usize) < self.marked.len() {
            Ok(())
        } else {
            Err(Error::BadState(s))
        }
    }

    pub fn build(self) -> Generator {
        let n = self.alphabet.len();
        let raw = Generator {
            alphabet: self.alphabet.clone(),
            delta: self.delta,
            marked: self.marked,
        };
        let (g, _) = explore(
            self.alphabet,
            self.initial,
            |&s, i, _| {
                let t = raw.delta[s as usize * n + i];
                (t != NONE).then_some(t)
            },
            |&s| raw.marked[s as usize],
        );
        g
    }
}

/// Generator accepting exactly the given finite set of marked strings
/// (closed language = their prefixes).
pub fn from_words(alphabet: Alphabet, words: &[Vec<Event>]) -> Generator {
    finite_language(alphabet, words, words)
}

/// Trie generator with closed language = prefixes of `closed` ∪ `marked` and
/// marked language = `marked`.
pub fn finite_language(
    alphabet: Alphabet,
    closed: &[Vec<Event>],
    marked: &[Vec<Event>],
) -> Generator {
    let mut b = GeneratorBuilder::new(alphabet);
    let root = b.add_state(false);
    let mut nodes: HashMap<Vec<Event>, StateId> = HashMap::new();
    nodes.insert(Vec::new(), root);
    for w in closed.iter().chain(marked.iter()) {
        let mut prefix = Vec::new();
        let mut cur = root;
        for e in w {
            prefix.push(e.clone());
            cur = match nodes.get(&prefix) {
                Some(&s) => s,
                None => {
                    let s = b.add_state(false);
                    b.add_transition(cur, e, s).expect("event in alphabet");
                    nodes.insert(prefix.clone(), s);
                    s
                }
            };
        }
    }
    for w in marked {
        b.set_marked(nodes[w], true).unwrap();
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::event_set;

    fn ab() -> Alphabet {
        Alphabet::new(event_set(["b", "a"]))
    }

    #[test]
    fn builder_canonicalizes() {
        let mut b = GeneratorBuilder::new(ab());
        let s0 = b.add_state(false);
        let s1 = b.add_state(true);
        let _unreachable = b.add_state(true);
        b.set_initial(s1).unwrap();
        b.add_transition(s1, &"b".into(), s0).unwrap();
        let g = b.build();
        assert_eq!(g.num_states(), 2);
        assert!(g.is_marked(0));
        assert_eq!(g.step(0, &"b".into()), Some(1));
        assert_eq!(g.num_transitions(), 1);
    }

    #[test]
    fn builder_rejects_nondeterminism() {
        let mut b = GeneratorBuilder::new(ab());
        let s = b.add_states(3);
        b.add_transition(s[0], &"a".into(), s[1]).unwrap();
        assert!(b.add_transition(s[0], &"a".into(), s[2]).is_err());
        assert!(b.add_transition(s[0], &"z".into(), s[2]).is_err());
    }

    #[test]
    fn trie_language() {
        let w = |s: &str| s.split_whitespace().map(Event::new).collect::<Vec<_>>();
        let g = finite_language(ab(), &[w("a b a")], &[w("a"), w("b")]);
        assert!(g.accepts_marked(&w("a")));
        assert!(g.accepts_closed(&w("a b")));
        assert!(!g.accepts_marked(&w("a b")));
        assert!(!g.accepts_closed(&w("b b")));
    }
}
