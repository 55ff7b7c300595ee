//! Checkers for controllability, relative (co)observability, local automaton
//! validity and control equivalence. They share no pruning code with
//! synthesis or localization.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::{format_word, Event, EventSet, EventTable};
use crate::generator::{Generator, StateId};
use crate::localize::LocalAutomaton;
use crate::ops::{lang_compare, selfloop_lift, sync_all, CompareMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    /// An uncontrollable event eligible in the plant is missing.
    UncontrollableDisabled,
    /// Tick eligible in the plant is missing and no forcible event preempts it.
    TickNotPreempted,
    /// Lookalike strings disagree on an event.
    NotObservable,
    /// Lookalike strings disagree on marking.
    MarkingNotObservable,
    /// A non-observable event changes the local state.
    UnobservableMove,
    /// The preemptor's tick decision differs from the supervisor's.
    PreemptionMismatch,
    /// The controller's enablement decision differs from the supervisor's.
    ControlMismatch,
    /// The controller's marking differs from the supervisor's.
    MarkingMismatch,
    ClosedLanguage,
    MarkedLanguage,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(reason_name(self))
    }
}

fn reason_name(r: &Reason) -> &'static str {
    match r {
        Reason::UncontrollableDisabled => "uncontrollable-disabled",
        Reason::TickNotPreempted => "tick-not-preempted",
        Reason::NotObservable => "not-observable",
        Reason::MarkingNotObservable => "marking-not-observable",
        Reason::UnobservableMove => "unobservable-move",
        Reason::PreemptionMismatch => "preemption-mismatch",
        Reason::ControlMismatch => "control-mismatch",
        Reason::MarkingMismatch => "marking-mismatch",
        Reason::ClosedLanguage => "closed-language",
        Reason::MarkedLanguage => "marked-language",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub reason: Reason,
    /// Shortest witness string.
    pub counterexample: Vec<Event>,
    /// Lookalike of the witness, for observability failures.
    pub lookalike: Option<Vec<Event>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub failure: Option<Failure>,
}

impl Verdict {
    fn pass(check: impl Into<String>) -> Self {
        Verdict {
            check: check.into(),
            failure: None,
        }
    }

    fn fail(check: impl Into<String>, reason: Reason, word: Vec<Event>) -> Self {
        Verdict {
            check: check.into(),
            failure: Some(Failure {
                reason,
                counterexample: word,
                lookalike: None,
            }),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn reason(&self) -> Option<Reason> {
        self.failure.as_ref().map(|f| f.reason)
    }

    pub fn counterexample(&self) -> Option<&[Event]> {
        self.failure.as_ref().map(|f| f.counterexample.as_slice())
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "PASS {}", self.check),
            Some(x) => {
                write!(f, "FAIL {} [{}] {}", self.check, x.reason, format_word(&x.counterexample))?;
                if let Some(l) = &x.lookalike {
                    write!(f, " (lookalike {})", format_word(l))?;
                }
                Ok(())
            }
        }
    }
}

/// Breadth-first search over an implicit product, events tried in alphabet
/// order, so the first hit has a shortest (then lexicographically least)
/// path. `probe` returns the final event and reason of a violation at a node.
fn bfs<S, L, F, P, T>(init: Option<S>, mut succ: F, mut probe: P) -> Option<(Vec<L>, S, T)>
where
    S: Clone + Eq + Hash,
    L: Clone,
    F: FnMut(&S) -> Vec<(L, S)>,
    P: FnMut(&S) -> Option<T>,
{
    let init = init?;
    let mut parent: HashMap<S, Option<(S, L)>> = HashMap::new();
    parent.insert(init.clone(), None);
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        if let Some(t) = probe(&s) {
            let mut word = Vec::new();
            let mut cur = s.clone();
            while let Some((p, e)) = parent[&cur].clone() {
                word.push(e);
                cur = p;
            }
            word.reverse();
            return Some((word, s, t));
        }
        for (e, n) in succ(&s) {
            if !parent.contains_key(&n) {
                parent.insert(n.clone(), Some((s.clone(), e)));
                queue.push_back(n);
            }
        }
    }
    None
}

fn check_alphabets(a: &Generator, b: &Generator) -> Result<()> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch(
            "checked generators must share the plant alphabet".into(),
        ));
    }
    Ok(())
}

/// Timed controllability of `L(k)` with respect to `g`: at every reachable
/// pair, uncontrollable events eligible in `g` are eligible in `k`, and so is
/// tick unless some forcible event is eligible in `k`.
pub fn check_controllable(g: &Generator, k: &Generator, table: &EventTable) -> Result<Verdict> {
    check_alphabets(g, k)?;
    let alpha = g.alphabet();
    let hit = bfs(
        k.initial().zip(g.initial()),
        |&(x, q)| {
            alpha
                .iter()
                .enumerate()
                .filter_map(|(i, e)| Some((e.clone(), (k.next(x, i)?, g.next(q, i)?))))
                .collect()
        },
        |&(x, q)| {
            let forced = alpha
                .iter()
                .enumerate()
                .any(|(i, e)| table.is_forcible(e) && k.next(x, i).is_some());
            alpha.iter().enumerate().find_map(|(i, e)| {
                if g.next(q, i).is_none() || k.next(x, i).is_some() {
                    None
                } else if e.is_tick() {
                    (!forced).then(|| (e.clone(), Reason::TickNotPreempted))
                } else if !table.is_controllable(e) {
                    Some((e.clone(), Reason::UncontrollableDisabled))
                } else {
                    None
                }
            })
        },
    );
    Ok(match hit {
        None => Verdict::pass("controllable"),
        Some((mut w, _, (e, reason))) => {
            w.push(e);
            Verdict::fail("controllable", reason, w)
        }
    })
}

/// Relative observability of `L(k)` with respect to ambient `c`, plant `g`
/// and `view`, restricted to the events in `responsible` (all when `None`).
/// Searches pairs of strings with equal projections: `s ∈ K̄`, `s' ∈ C̄`.
/// With `marking`, also requires `s ∈ Lm(K)`, `s' ∈ C̄ ∩ Lm(G)` to imply
/// `s' ∈ Lm(K)`.
pub fn check_rel_observable(
    g: &Generator,
    c: &Generator,
    k: &Generator,
    view: &EventSet,
    responsible: Option<&EventSet>,
    marking: bool,
) -> Result<Verdict> {
    check_alphabets(g, k)?;
    check_alphabets(g, c)?;
    let alpha = g.alphabet();
    let n = alpha.len();
    // node: s in K; s' in C, in G, and in K (none once it leaves K̄)
    type Node = (StateId, StateId, StateId, Option<StateId>);
    let init: Option<Node> = match (k.initial(), c.initial(), g.initial()) {
        (Some(x), Some(y), Some(q)) => Some((x, y, q, Some(x))),
        _ => None,
    };
    let observable: Vec<bool> = alpha.iter().map(|e| view.contains(e)).collect();
    // edge labels: (event, extends s, extends s')
    let hit = bfs(
        init,
        |&(x, y, q, z): &Node| {
            let mut out = Vec::new();
            for (i, e) in alpha.iter().enumerate() {
                let m1 = k.next(x, i);
                let m2 = c.next(y, i).zip(g.next(q, i));
                let z2 = z.and_then(|z| k.next(z, i));
                if observable[i] {
                    if let (Some(x2), Some((y2, q2))) = (m1, m2) {
                        out.push(((e.clone(), true, true), (x2, y2, q2, z2)));
                    }
                } else {
                    if let Some(x2) = m1 {
                        out.push(((e.clone(), true, false), (x2, y, q, z)));
                    }
                    if let Some((y2, q2)) = m2 {
                        out.push(((e.clone(), false, true), (x, y2, q2, z2)));
                    }
                }
            }
            out
        },
        |&(x, _y, q, z): &Node| {
            for i in 0..n {
                let e = alpha.get(i);
                if responsible.is_some_and(|r| !r.contains(e)) {
                    continue;
                }
                if k.next(x, i).is_some()
                    && g.next(q, i).is_some()
                    && z.and_then(|z| k.next(z, i)).is_none()
                {
                    return Some((Some(e.clone()), Reason::NotObservable));
                }
            }
            if marking && k.is_marked(x) && g.is_marked(q) && !z.is_some_and(|z| k.is_marked(z)) {
                return Some((None, Reason::MarkingNotObservable));
            }
            None
        },
    );
    let Some((path, _, (ev, reason))) = hit else {
        return Ok(Verdict::pass("relatively-observable"));
    };
    let mut s: Vec<Event> = path.iter().filter(|l| l.1).map(|l| l.0.clone()).collect();
    let mut s2: Vec<Event> = path.iter().filter(|l| l.2).map(|l| l.0.clone()).collect();
    if let Some(e) = ev {
        s.push(e.clone());
        s2.push(e);
    }
    Ok(Verdict {
        check: "relatively-observable".into(),
        failure: Some(Failure {
            reason,
            counterexample: s,
            lookalike: Some(s2),
        }),
    })
}

/// Relative coobservability: relative observability for every view and its
/// responsibility set. Returns the first failing verdict, if any.
pub fn check_rel_coobservable(
    g: &Generator,
    c: &Generator,
    k: &Generator,
    views: &[EventSet],
    responsible: &[Option<EventSet>],
    marking: bool,
) -> Result<Verdict> {
    for (v, view) in views.iter().enumerate() {
        let mut verdict =
            check_rel_observable(g, c, k, view, responsible.get(v).and_then(|r| r.as_ref()), marking)?;
        verdict.check = format!("relatively-coobservable[{v}]");
        if !verdict.passed() {
            return Ok(verdict);
        }
    }
    Ok(Verdict::pass("relatively-coobservable"))
}

/// Validity of one local automaton against the supervisor and plant:
/// structural selfloop rule for non-observable events, then the tick
/// decision (preemptors) or the enablement and marking decisions
/// (controllers) along every string of the supervisor.
pub fn check_local(loc: &LocalAutomaton, sup: &Generator, g: &Generator) -> Result<Verdict> {
    check_alphabets(g, sup)?;
    let name = format!("local {}", loc.label());
    let l = &loc.gen;
    for (s, e, t) in l.transitions() {
        if s != t && !loc.view.contains(e) {
            let hit = bfs(
                l.initial(),
                |&y| {
                    l.alphabet()
                        .iter()
                        .enumerate()
                        .filter_map(|(i, e)| Some((e.clone(), l.next(y, i)?)))
                        .collect()
                },
                |&y| (y == s).then_some(()),
            );
            let mut w = hit.map(|(w, _, _)| w).unwrap_or_default();
            w.push(e.clone());
            return Ok(Verdict::fail(name, Reason::UnobservableMove, w));
        }
    }
    let alpha = g.alphabet();
    let ev = loc.event().clone();
    let ei = alpha
        .index_of(&ev)
        .ok_or_else(|| Error::UnknownEvent(ev.name().to_string()))?;
    let tick = alpha.index_of(&Event::tick());
    let local_idx: Vec<Option<usize>> = alpha.iter().map(|e| l.alphabet().index_of(e)).collect();
    let preemptor = loc.kind.is_preemption();
    let hit = bfs(
        sup.initial().zip(g.initial()).map(|(x, q)| (x, q, l.initial())),
        |&(x, q, y)| {
            (0..alpha.len())
                .filter_map(|i| {
                    let x2 = sup.next(x, i)?;
                    let q2 = g.next(q, i)?;
                    let y2 = match local_idx[i] {
                        Some(j) => y.and_then(|y| l.next(y, j)),
                        None => y,
                    };
                    Some((alpha.get(i).clone(), (x2, q2, y2)))
                })
                .collect()
        },
        |&(x, q, y)| {
            let loc_has = |i: usize| match local_idx[i] {
                Some(j) => y.is_some_and(|y| l.next(y, j).is_some()),
                None => y.is_some(),
            };
            if preemptor {
                let t = tick?;
                sup.next(x, ei)?;
                let lhs = loc_has(t) && g.next(q, t).is_some();
                let rhs = sup.next(x, t).is_some();
                (lhs != rhs).then_some((Some(Event::tick()), Reason::PreemptionMismatch))
            } else {
                if g.next(q, ei).is_some() && loc_has(ei) != sup.next(x, ei).is_some() {
                    return Some((Some(ev.clone()), Reason::ControlMismatch));
                }
                let lm = y.is_some_and(|y| l.is_marked(y));
                if g.is_marked(q) && lm != sup.is_marked(x) {
                    return Some((None, Reason::MarkingMismatch));
                }
                None
            }
        },
    );
    Ok(match hit {
        None => Verdict::pass(name),
        Some((mut w, _, (e, reason))) => {
            w.extend(e);
            Verdict::fail(name, reason, w)
        }
    })
}

/// Product of the plant with all local automata, each lifted to the plant
/// alphabet.
pub fn joint_behavior(g: &Generator, locs: &[LocalAutomaton]) -> Result<Generator> {
    let lifted = locs
        .iter()
        .map(|l| selfloop_lift(&l.gen, g.alphabet()))
        .collect::<Result<Vec<_>>>()?;
    let mut parts: Vec<&Generator> = vec![g];
    parts.extend(lifted.iter());
    sync_all(&parts).with_alphabet(g.alphabet())
}

/// Control equivalence: `L(G) ∩ L(LOC) = L(SUP)` and
/// `Lm(G) ∩ Lm(LOC) = Lm(SUP)`.
pub fn check_equivalence(g: &Generator, locs: &[LocalAutomaton], sup: &Generator) -> Result<Verdict> {
    check_alphabets(g, sup)?;
    let joint = joint_behavior(g, locs)?;
    let cmp = lang_compare(&joint, sup, CompareMode::Equal)?;
    if let Some(w) = cmp.counterexample() {
        let reason = if joint.accepts_closed(w) != sup.accepts_closed(w) {
            Reason::ClosedLanguage
        } else {
            Reason::MarkedLanguage
        };
        return Ok(Verdict::fail("equivalence", reason, w.to_vec()));
    }
    Ok(Verdict::pass("equivalence"))
}
