//! Supremal controllable, relatively observable and relatively coobservable
//! sublanguages.
//!
//! All supervisors returned here are products with the plant: each state
//! determines the plant state reached, which localization relies on.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::{EventSet, EventTable};
use crate::generator::{explore, Generator, StateId, NONE};
use crate::ops::{minimize, trim};

/// Ambient language `C` of relative observability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientPolicy {
    /// Supremal controllable sublanguage of `E ∩ Lm(G)`, computed once.
    #[default]
    Fixed,
    /// `E ∩ Lm(G)` itself.
    Specification,
    /// The current iterate.
    Iterated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub ambient: AmbientPolicy,
    /// Also require marking consistency between lookalike strings: a marked
    /// string with a lookalike in `C̄ ∩ Lm(G)` that is not marked loses its
    /// marking. On by default; without it a supervisor whose specification
    /// is not `Lm(G)`-closed may have no marking-equivalent localization.
    pub marking_clause: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            ambient: AmbientPolicy::default(),
            marking_clause: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub phase: &'static str,
    pub view: Option<usize>,
    pub states: usize,
    pub transitions: usize,
    pub violations: usize,
    pub removed_states: usize,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub sup: Generator,
    pub ambient: Generator,
    pub log: Vec<IterationStats>,
}

fn same_alphabet(a: &Generator, b: &Generator, what: &str) -> Result<()> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch(format!(
            "{what}: operands must share the plant alphabet (lift specifications first)"
        )));
    }
    Ok(())
}

/// Meet of `k` and `g` with the plant state of every product state.
fn meet_with_plant(k: &Generator, g: &Generator) -> (Generator, Vec<StateId>) {
    let init = k.initial().zip(g.initial());
    let (p, labels) = explore(
        k.alphabet().clone(),
        init,
        |&(x, q), i, _| Some((k.next(x, i)?, g.next(q, i)?)),
        |&(x, q)| k.is_marked(x) && g.is_marked(q),
    );
    (p, labels.into_iter().map(|(_, q)| q).collect())
}

/// Minimal representation that still determines the plant state.
fn reduce(k: &Generator, g: &Generator) -> Generator {
    let (p, plant) = meet_with_plant(k, g);
    let classes: Vec<u64> = plant.iter().map(|&q| q as u64).collect();
    minimize(&p, Some(&classes))
}

/// Supremal timed-controllable sublanguage of `Lm(E) ∩ Lm(G)`, trim.
pub fn supcon_timed(g: &Generator, e: &Generator, table: &EventTable) -> Result<Generator> {
    same_alphabet(g, e, "supcon_timed")?;
    Ok(supcon_core(g, e, table).0)
}

fn supcon_core(g: &Generator, k: &Generator, table: &EventTable) -> (Generator, usize) {
    let (p, plant) = meet_with_plant(k, g);
    let n = p.num_states();
    let alpha = p.alphabet();
    let uncontrollable: Vec<bool> = alpha.iter().map(|e| !table.is_controllable(e)).collect();
    let forcible: Vec<usize> = (0..alpha.len())
        .filter(|&i| table.is_forcible(alpha.get(i)))
        .collect();
    let tick = alpha.iter().position(|e| e.is_tick());
    let preds = predecessors(&p);
    let mut alive = vec![true; n];
    let mut removed = 0usize;
    loop {
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let q = plant[s];
            let k_elig = |i: usize, alive: &[bool]| {
                p.next(s as StateId, i).is_some_and(|t| alive[t as usize])
            };
            let bad = (0..alpha.len()).any(|i| {
                if g.next(q, i).is_none() || k_elig(i, &alive) {
                    return false;
                }
                if uncontrollable[i] {
                    return true;
                }
                Some(i) == tick && !forcible.iter().any(|&f| k_elig(f, &alive))
            });
            if bad {
                alive[s] = false;
                removed += 1;
                changed = true;
            }
        }
        let pruned = prune_blocking(&p, &preds, &mut alive);
        removed += pruned;
        if !changed && pruned == 0 {
            break;
        }
    }
    (crate::ops::restrict(&p, &alive), removed)
}

fn predecessors(p: &Generator) -> Vec<Vec<StateId>> {
    let mut preds = vec![Vec::new(); p.num_states()];
    for (s, _, t) in p.transitions() {
        preds[t as usize].push(s);
    }
    preds
}

/// Restricts `alive` to its reachable and coreachable part; returns the
/// number of states removed.
fn prune_blocking(p: &Generator, preds: &[Vec<StateId>], alive: &mut [bool]) -> usize {
    let n = p.num_states();
    let mut reach = vec![false; n];
    if n > 0 && alive[0] {
        reach[0] = true;
        let mut stack = vec![0 as StateId];
        while let Some(s) = stack.pop() {
            for i in p.enabled(s).collect::<Vec<_>>() {
                let t = p.next(s, i).unwrap() as usize;
                if alive[t] && !reach[t] {
                    reach[t] = true;
                    stack.push(t as StateId);
                }
            }
        }
    }
    let mut co = vec![false; n];
    let mut stack: Vec<StateId> = (0..n)
        .filter(|&s| reach[s] && p.is_marked(s as StateId))
        .map(|s| s as StateId)
        .collect();
    for &s in &stack {
        co[s as usize] = true;
    }
    while let Some(s) = stack.pop() {
        for &q in &preds[s as usize] {
            if reach[q as usize] && !co[q as usize] {
                co[q as usize] = true;
                stack.push(q);
            }
        }
    }
    let mut removed = 0;
    for s in 0..n {
        if alive[s] && !co[s] {
            alive[s] = false;
            removed += 1;
        }
    }
    removed
}

type Triple = (StateId, StateId, StateId);

/// Lookalike tracker: sets of (ambient, plant, candidate-or-⊥) states reached
/// by strings of `C̄` with a common projection.
struct Lookalikes<'a> {
    g: &'a Generator,
    c: &'a Generator,
    k: &'a Generator,
    observable: Vec<bool>,
    sets: Vec<Vec<Triple>>,
    index: HashMap<Vec<Triple>, u32>,
    moves: HashMap<(u32, usize), u32>,
    /// per set: events σ with a lookalike s' such that s'σ ∈ L(G) \ K̄
    bad: Vec<Vec<bool>>,
    /// per set: some lookalike in `C̄ ∩ Lm(G)` is not in `Lm(K)`
    unmarked_twin: Vec<bool>,
}

impl<'a> Lookalikes<'a> {
    fn new(g: &'a Generator, c: &'a Generator, k: &'a Generator, view: &EventSet) -> Self {
        let observable = g.alphabet().iter().map(|e| view.contains(e)).collect();
        Lookalikes {
            g,
            c,
            k,
            observable,
            sets: Vec::new(),
            index: HashMap::new(),
            moves: HashMap::new(),
            bad: Vec::new(),
            unmarked_twin: Vec::new(),
        }
    }

    fn advance(&self, (c, q, x): Triple, i: usize) -> Option<Triple> {
        let c2 = self.c.next(c, i)?;
        let q2 = self.g.next(q, i)?;
        let x2 = if x == NONE {
            NONE
        } else {
            self.k.next(x, i).unwrap_or(NONE)
        };
        Some((c2, q2, x2))
    }

    fn intern(&mut self, seeds: Vec<Triple>) -> u32 {
        let mut seen: std::collections::HashSet<Triple> = seeds.iter().copied().collect();
        let mut stack = seeds;
        let mut all = Vec::new();
        while let Some(t) = stack.pop() {
            all.push(t);
            for i in 0..self.observable.len() {
                if self.observable[i] {
                    continue;
                }
                if let Some(n) = self.advance(t, i) {
                    if seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
        }
        all.sort_unstable();
        if let Some(&id) = self.index.get(&all) {
            return id;
        }
        let id = self.sets.len() as u32;
        let k = self.k;
        let g = self.g;
        let bad = (0..self.observable.len())
            .map(|i| {
                all.iter().any(|&(_, q, x)| {
                    g.next(q, i).is_some() && (x == NONE || k.next(x, i).is_none())
                })
            })
            .collect();
        let twin = all
            .iter()
            .any(|&(_, q, x)| g.is_marked(q) && (x == NONE || !k.is_marked(x)));
        self.bad.push(bad);
        self.unmarked_twin.push(twin);
        self.index.insert(all.clone(), id);
        self.sets.push(all);
        id
    }

    fn step(&mut self, w: u32, i: usize) -> u32 {
        if let Some(&n) = self.moves.get(&(w, i)) {
            return n;
        }
        let mut seeds: Vec<Triple> = self.sets[w as usize]
            .iter()
            .filter_map(|&t| self.advance(t, i))
            .collect();
        seeds.sort_unstable();
        seeds.dedup();
        let n = self.intern(seeds);
        self.moves.insert((w, i), n);
        n
    }
}

/// One pruning pass for relative observability of `k` with respect to the
/// ambient `c`, plant `g` and observable `view`. Only events in
/// `responsible` are checked (all events when `None`).
pub fn suprel_obs_step(
    g: &Generator,
    c: &Generator,
    k: &Generator,
    view: &EventSet,
    responsible: Option<&EventSet>,
) -> Result<Generator> {
    same_alphabet(g, c, "suprel_obs_step")?;
    same_alphabet(g, k, "suprel_obs_step")?;
    Ok(obs_core(g, c, k, view, responsible, false).0)
}

fn obs_core(
    g: &Generator,
    c: &Generator,
    k: &Generator,
    view: &EventSet,
    responsible: Option<&EventSet>,
    marking_clause: bool,
) -> (Generator, usize) {
    let (Some(k0), Some(c0), Some(g0)) = (k.initial(), c.initial(), g.initial()) else {
        return (Generator::empty(k.alphabet().clone()), 0);
    };
    let checked: Vec<bool> = g
        .alphabet()
        .iter()
        .map(|e| responsible.is_none_or(|r| r.contains(e)))
        .collect();
    let mut look = Lookalikes::new(g, c, k, view);
    let w0 = look.intern(vec![(c0, g0, k0)]);
    let violations = std::cell::Cell::new(0usize);
    let look = std::cell::RefCell::new(look);
    let (r, _) = explore(
        k.alphabet().clone(),
        Some((k0, w0)),
        |&(x, w), i, _| {
            let x2 = k.next(x, i)?;
            let mut look = look.borrow_mut();
            if checked[i] && look.bad[w as usize][i] {
                violations.set(violations.get() + 1);
                return None;
            }
            let w2 = if look.observable[i] { look.step(w, i) } else { w };
            Some((x2, w2))
        },
        |&(x, w)| {
            if !k.is_marked(x) {
                return false;
            }
            if marking_clause && look.borrow().unmarked_twin[w as usize] {
                violations.set(violations.get() + 1);
                return false;
            }
            true
        },
    );
    (trim(&r), violations.get())
}

/// Supremal controllable and relatively observable sublanguage of
/// `Lm(E) ∩ Lm(G)` for a single observable set.
pub fn sup_co(
    g: &Generator,
    e: &Generator,
    view: &EventSet,
    table: &EventTable,
    opts: SynthesisOptions,
) -> Result<Synthesis> {
    sup_cco(g, e, std::slice::from_ref(view), &[None], table, opts)
}

/// Supremal controllable and relatively coobservable sublanguage: one view
/// per agent, each responsible for the events in its set (`None`: all).
pub fn sup_cco(
    g: &Generator,
    e: &Generator,
    views: &[EventSet],
    responsible: &[Option<EventSet>],
    table: &EventTable,
    opts: SynthesisOptions,
) -> Result<Synthesis> {
    same_alphabet(g, e, "synthesis")?;
    if views.len() != responsible.len() {
        return Err(Error::Invalid(
            "one responsibility set per view is required".into(),
        ));
    }
    let mut log = Vec::new();
    let record = |log: &mut Vec<IterationStats>,
                  iteration,
                  phase,
                  view,
                  k: &Generator,
                  violations,
                  removed_states| {
        log.push(IterationStats {
            iteration,
            phase,
            view,
            states: k.num_states(),
            transitions: k.num_transitions(),
            violations,
            removed_states,
        })
    };
    let (k0, removed) = supcon_core(g, e, table);
    let mut k = reduce(&k0, g);
    record(&mut log, 0, "controllability", None, &k, 0, removed);
    let mut ambient = match opts.ambient {
        AmbientPolicy::Fixed | AmbientPolicy::Iterated => k.clone(),
        AmbientPolicy::Specification => trim(&meet_with_plant(e, g).0),
    };
    let mut iteration = 0;
    while !k.is_empty() {
        iteration += 1;
        let mut changed = false;
        for (v, view) in views.iter().enumerate() {
            let (next, violations) = obs_core(
                g,
                &ambient,
                &k,
                view,
                responsible[v].as_ref(),
                opts.marking_clause,
            );
            if violations > 0 {
                k = reduce(&next, g);
                changed = true;
            }
            record(&mut log, iteration, "observability", Some(v), &k, violations, 0);
            if k.is_empty() {
                break;
            }
        }
        if !changed {
            break;
        }
        let (next, removed) = supcon_core(g, &k, table);
        k = reduce(&next, g);
        record(&mut log, iteration, "controllability", None, &k, 0, removed);
        if opts.ambient == AmbientPolicy::Iterated {
            ambient = k.clone();
        }
    }
    Ok(Synthesis {
        sup: k,
        ambient,
        log,
    })
}

