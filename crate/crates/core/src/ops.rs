//! Language-level operations on generators.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::event::{Event, EventSet};
use crate::generator::{explore, Alphabet, Generator, StateId, NONE};

/// Synchronous product: shared events synchronize, private events interleave.
pub fn sync_product(a: &Generator, b: &Generator) -> Generator {
    sync_all(&[a, b])
}

/// Synchronous product of any number of generators.
pub fn sync_all(parts: &[&Generator]) -> Generator {
    let alphabet = parts
        .iter()
        .fold(Alphabet::default(), |acc, g| acc.union(g.alphabet()));
    if parts.iter().any(|g| g.is_empty()) {
        return Generator::empty(alphabet);
    }
    let maps: Vec<Vec<Option<usize>>> = parts
        .iter()
        .map(|g| alphabet.map_into(g.alphabet()))
        .collect();
    let (g, _) = explore(
        alphabet,
        Some(vec![0 as StateId; parts.len()]),
        |state: &Vec<StateId>, i, _| {
            let mut next = state.clone();
            for (k, g) in parts.iter().enumerate() {
                if let Some(j) = maps[k][i] {
                    next[k] = g.next(state[k], j)?;
                }
            }
            Some(next)
        },
        |state| parts.iter().zip(state).all(|(g, &s)| g.is_marked(s)),
    );
    g
}

/// Adds selfloops for every event of `full` missing from `a`, realizing the
/// inverse projection of its languages.
pub fn selfloop_lift(a: &Generator, full: &Alphabet) -> Result<Generator> {
    if !a.alphabet().is_subset(full) {
        let missing: Vec<_> = a
            .alphabet()
            .iter()
            .filter(|e| !full.contains(e))
            .map(Event::name)
            .collect();
        return Err(Error::AlphabetMismatch(format!(
            "lift target omits {}",
            missing.join(", ")
        )));
    }
    let map = full.map_into(a.alphabet());
    let (g, _) = explore(
        full.clone(),
        a.initial(),
        |&s, i, _| match map[i] {
            Some(j) => a.next(s, j),
            None => Some(s),
        },
        |&s| a.is_marked(s),
    );
    Ok(g)
}

/// Closure of a state set under events whose index is flagged in `silent`.
pub(crate) fn silent_closure(g: &Generator, seeds: &[StateId], silent: &[bool]) -> Vec<StateId> {
    let mut seen = vec![false; g.num_states()];
    let mut stack: Vec<StateId> = Vec::new();
    for &s in seeds {
        if !seen[s as usize] {
            seen[s as usize] = true;
            stack.push(s);
        }
    }
    while let Some(s) = stack.pop() {
        for (i, &is_silent) in silent.iter().enumerate() {
            if !is_silent {
                continue;
            }
            if let Some(t) = g.next(s, i) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            }
        }
    }
    (0..g.num_states() as StateId)
        .filter(|&s| seen[s as usize])
        .collect()
}

/// Subset construction for the natural projection onto `observable`.
///
/// The result is over `observable ∩ alphabet(a)`. Each result state carries
/// the (sorted) set of `a`-states it denotes; sets are closed under
/// unobservable events both before and after each observable event.
pub fn project_determinize(a: &Generator, observable: &EventSet) -> (Generator, Vec<Vec<StateId>>) {
    let obs_alpha = Alphabet::new(
        a.alphabet()
            .iter()
            .filter(|e| observable.contains(*e))
            .cloned(),
    );
    let silent: Vec<bool> = a
        .alphabet()
        .iter()
        .map(|e| !observable.contains(e))
        .collect();
    let map = obs_alpha.map_into(a.alphabet());
    let init = a.initial().map(|s0| silent_closure(a, &[s0], &silent));
    explore(
        obs_alpha,
        init,
        |set: &Vec<StateId>, i, _| {
            let j = map[i].expect("observable event in alphabet");
            let mut next: Vec<StateId> = set.iter().filter_map(|&s| a.next(s, j)).collect();
            if next.is_empty() {
                return None;
            }
            next.sort_unstable();
            next.dedup();
            Some(silent_closure(a, &next, &silent))
        },
        |set| set.iter().any(|&s| a.is_marked(s)),
    )
}

/// States from which a marked state is reachable.
pub fn coreachable(g: &Generator) -> Vec<bool> {
    let n = g.num_states();
    let k = g.alphabet().len();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in g.states() {
        for i in 0..k {
            if let Some(t) = g.next(s, i) {
                preds[t as usize].push(s);
            }
        }
    }
    let mut co = vec![false; n];
    let mut stack: Vec<StateId> = g.marked_states().collect();
    for &s in &stack {
        co[s as usize] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &preds[s as usize] {
            if !co[p as usize] {
                co[p as usize] = true;
                stack.push(p);
            }
        }
    }
    co
}

/// Keeps exactly the reachable and coreachable states.
pub fn trim(a: &Generator) -> Generator {
    restrict(a, &coreachable(a))
}

/// Sub-generator on the states flagged `keep` (reachable part only).
pub(crate) fn restrict(a: &Generator, keep: &[bool]) -> Generator {
    let init = a.initial().filter(|&s| keep[s as usize]);
    let (g, _) = explore(
        a.alphabet().clone(),
        init,
        |&s, i, _| a.next(s, i).filter(|&t| keep[t as usize]),
        |&s| a.is_marked(s),
    );
    g
}

/// True when every reachable state is coreachable.
pub fn is_nonblocking(a: &Generator) -> bool {
    coreachable(a).into_iter().all(|c| c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    Equal,
    /// `a ⊆ b`
    Subset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Comparison {
    Holds,
    /// Shortest distinguishing string (ties broken by event-name order).
    Fails(Vec<Event>),
}

impl Comparison {
    pub fn holds(&self) -> bool {
        matches!(self, Comparison::Holds)
    }

    pub fn counterexample(&self) -> Option<&[Event]> {
        match self {
            Comparison::Holds => None,
            Comparison::Fails(w) => Some(w),
        }
    }
}

/// Compares closed and marked languages.
pub fn lang_compare(a: &Generator, b: &Generator, mode: CompareMode) -> Result<Comparison> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch(
            "lang_compare needs equal alphabets".into(),
        ));
    }
    let start = (
        a.initial().unwrap_or(NONE),
        b.initial().unwrap_or(NONE),
    );
    let bad = |(x, y): (StateId, StateId)| -> bool {
        let in_a = x != NONE;
        let in_b = y != NONE;
        let ma = in_a && a.is_marked(x);
        let mb = in_b && b.is_marked(y);
        match mode {
            CompareMode::Equal => in_a != in_b || ma != mb,
            CompareMode::Subset => (in_a && !in_b) || (ma && !mb),
        }
    };
    if start == (NONE, NONE) {
        return Ok(Comparison::Holds);
    }
    let k = a.alphabet().len();
    let mut parent: std::collections::HashMap<(StateId, StateId), ((StateId, StateId), usize)> =
        std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);
    queue.push_back(start);
    let word_to = |mut p: (StateId, StateId),
                   parent: &std::collections::HashMap<_, ((StateId, StateId), usize)>|
     -> Vec<Event> {
        let mut w = Vec::new();
        while let Some(&(q, i)) = parent.get(&p) {
            w.push(a.alphabet().get(i).clone());
            p = q;
        }
        w.reverse();
        w
    };
    if bad(start) {
        return Ok(Comparison::Fails(Vec::new()));
    }
    while let Some(p @ (x, y)) = queue.pop_front() {
        for i in 0..k {
            let nx = if x == NONE { NONE } else { a.next(x, i).unwrap_or(NONE) };
            let ny = if y == NONE { NONE } else { b.next(y, i).unwrap_or(NONE) };
            if nx == NONE && ny == NONE {
                continue;
            }
            let q = (nx, ny);
            if seen.insert(q) {
                parent.insert(q, (p, i));
                if bad(q) {
                    return Ok(Comparison::Fails(word_to(q, &parent)));
                }
                // once one side has left its language nothing further differs
                // that is not already witnessed by `q`
                if nx != NONE && ny != NONE {
                    queue.push_back(q);
                }
            }
        }
    }
    Ok(Comparison::Holds)
}

/// Minimal generator for the closed and marked languages of `a`, refining
/// the optional initial partition `classes` (one class id per state).
pub fn minimize(a: &Generator, classes: Option<&[u64]>) -> Generator {
    let n = a.num_states();
    if n == 0 {
        return a.clone();
    }
    let k = a.alphabet().len();
    let mut block: Vec<u32> = {
        let keys: Vec<(bool, u64)> = (0..n)
            .map(|s| (a.is_marked(s as StateId), classes.map_or(0, |c| c[s])))
            .collect();
        renumber(&keys)
    };
    let mut count = block.iter().copied().max().unwrap() + 1;
    loop {
        let keys: Vec<(u32, Vec<u32>)> = (0..n)
            .map(|s| {
                let sig = (0..k)
                    .map(|i| a.next(s as StateId, i).map_or(u32::MAX, |t| block[t as usize]))
                    .collect();
                (block[s], sig)
            })
            .collect();
        let next = renumber(&keys);
        let next_count = next.iter().copied().max().unwrap() + 1;
        block = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    let rep: Vec<StateId> = {
        let mut rep = vec![StateId::MAX; count as usize];
        for s in (0..n).rev() {
            rep[block[s] as usize] = s as StateId;
        }
        rep
    };
    let (g, _) = explore(
        a.alphabet().clone(),
        Some(block[0]),
        |&b, i, _| a.next(rep[b as usize], i).map(|t| block[t as usize]),
        |&b| a.is_marked(rep[b as usize]),
    );
    g
}

fn renumber<K: std::hash::Hash + Eq + Clone>(keys: &[K]) -> Vec<u32> {
    let mut ids: std::collections::HashMap<K, u32> = std::collections::HashMap::new();
    keys.iter()
        .map(|key| {
            let len = ids.len() as u32;
            *ids.entry(key.clone()).or_insert(len)
        })
        .collect()
}

/// Events of `alphabet` as a set, restricted to those in `keep`.
pub fn restrict_set(alphabet: &Alphabet, keep: &EventSet) -> BTreeSet<Event> {
    alphabet.iter().filter(|e| keep.contains(*e)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::event_set;
    use crate::generator::{finite_language, from_words, GeneratorBuilder};

    fn w(s: &str) -> Vec<Event> {
        s.split_whitespace().map(Event::new).collect()
    }

    fn alpha(names: &[&str]) -> Alphabet {
        Alphabet::new(names.iter().map(|n| Event::new(n)))
    }

    /// All strings over `alphabet` of length ≤ n.
    fn strings(alphabet: &Alphabet, n: usize) -> Vec<Vec<Event>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for s in &layer {
                for e in alphabet {
                    let mut t: Vec<Event> = s.clone();
                    t.push(e.clone());
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn product_identity() {
        let g = Generator::universal(alpha(&["a"]));
        let p = sync_product(&g, &g);
        assert_eq!(p, g);
    }

    #[test]
    fn product_of_ab_and_b() {
        let a = from_words(alpha(&["a", "b"]), &[w("a b")]);
        let b = from_words(alpha(&["b"]), &[w("b")]);
        let p = sync_product(&a, &b);
        for s in strings(p.alphabet(), 2) {
            assert_eq!(p.accepts_marked(&s), s == w("a b"), "{s:?}");
        }
    }

    #[test]
    fn product_annihilator() {
        let a = finite_language(alpha(&["a"]), &[w("a")], &[]);
        let b = Generator::universal(alpha(&["b"]));
        let p = trim(&sync_product(&a, &b));
        assert!(p.is_empty());
    }

    #[test]
    fn lift_adds_selfloops() {
        let g = Generator::universal(alpha(&["x"]));
        let l = selfloop_lift(&g, &alpha(&["x", "y"])).unwrap();
        assert_eq!(l.num_states(), 1);
        assert_eq!(l.step(0, &"y".into()), Some(0));
        let unit = Generator::universal(Alphabet::default());
        let u = selfloop_lift(&unit, &alpha(&["x", "y"])).unwrap();
        assert_eq!(u, Generator::universal(alpha(&["x", "y"])));
        assert!(selfloop_lift(&l, &alpha(&["x"])).is_err());
    }

    #[test]
    fn projection_chain() {
        let mut b = GeneratorBuilder::new(alpha(&["u", "o"]));
        let s = b.add_states(3);
        b.add_transition(s[0], &"u".into(), s[1]).unwrap();
        b.add_transition(s[1], &"o".into(), s[2]).unwrap();
        b.set_marked(s[2], true).unwrap();
        let g = b.build();
        let (p, sets) = project_determinize(&g, &event_set(["o"]));
        assert_eq!(sets, vec![vec![0, 1], vec![2]]);
        assert_eq!(p.step(0, &"o".into()), Some(1));
        assert!(p.is_marked(1) && !p.is_marked(0));
    }

    #[test]
    fn projection_all_unobservable() {
        let g = from_words(alpha(&["a", "b"]), &[w("a b")]);
        let (p, sets) = project_determinize(&g, &EventSet::new());
        assert_eq!(p.num_states(), 1);
        assert!(p.is_marked(0));
        assert_eq!(sets[0].len(), 3);
    }

    #[test]
    fn trim_cases() {
        let mut b = GeneratorBuilder::new(alpha(&["a"]));
        let s = b.add_states(3);
        b.add_transition(s[0], &"a".into(), s[1]).unwrap();
        b.add_transition(s[1], &"a".into(), s[2]).unwrap();
        b.set_marked(s[1], true).unwrap();
        let t = trim(&b.build());
        assert_eq!(t.num_states(), 2);
        assert_eq!(trim(&t), t);
        let none = finite_language(alpha(&["a"]), &[w("a")], &[]);
        assert!(trim(&none).is_empty());
    }

    #[test]
    fn compare_marking_difference() {
        let al = alpha(&["a", "b"]);
        let x = finite_language(al.clone(), &[w("a b")], &[w("a b")]);
        let y = finite_language(al, &[w("a b")], &[w("a"), w("a b")]);
        assert!(lang_compare(&x, &x, CompareMode::Equal).unwrap().holds());
        assert_eq!(
            lang_compare(&x, &y, CompareMode::Equal).unwrap(),
            Comparison::Fails(w("a"))
        );
        assert!(lang_compare(&x, &y, CompareMode::Subset).unwrap().holds());
        assert!(!lang_compare(&y, &x, CompareMode::Subset).unwrap().holds());
    }

    #[test]
    fn compare_empty() {
        let al = alpha(&["a"]);
        let e = Generator::empty(al.clone());
        assert!(lang_compare(&e, &e, CompareMode::Equal).unwrap().holds());
        let u = Generator::universal(al);
        assert_eq!(
            lang_compare(&e, &u, CompareMode::Equal).unwrap(),
            Comparison::Fails(vec![])
        );
        assert!(lang_compare(&e, &u, CompareMode::Subset).unwrap().holds());
    }
}
