//! Synthesis followed by localization, with the equivalence check run
//! before anything is returned.

use serde::Serialize;

use crate::delay::{AgentView, Augmented};
use crate::error::{Error, Result};
use crate::event::{EventSet, EventTable};
use crate::generator::Generator;
use crate::localize::{localize_all, LocalAutomaton};
use crate::supo::{annotate_flags, build_supo, UncertaintyAutomaton};
use crate::synthesis::{sup_cco, IterationStats, SynthesisOptions};
use crate::verify::check_equivalence;

/// A local automaton and the agent it is allocated to.
#[derive(Debug, Clone, Serialize)]
pub struct Allocated {
    pub agent: Option<String>,
    #[serde(flatten)]
    pub local: LocalAutomaton,
}

#[derive(Debug, Clone)]
pub struct Localized {
    pub plant: Generator,
    pub sup: Generator,
    pub ambient: Generator,
    pub log: Vec<IterationStats>,
    pub supos: Vec<UncertaintyAutomaton>,
    pub locals: Vec<Allocated>,
}

impl Localized {
    pub fn local_automata(&self) -> Vec<LocalAutomaton> {
        self.locals.iter().map(|a| a.local.clone()).collect()
    }

    pub fn find(&self, label: &str) -> Option<&LocalAutomaton> {
        self.locals.iter().map(|a| &a.local).find(|l| l.label() == label)
    }
}

fn finish(
    plant: &Generator,
    sup: Generator,
    ambient: Generator,
    log: Vec<IterationStats>,
    supos: Vec<UncertaintyAutomaton>,
    locals: Vec<Allocated>,
) -> Result<Localized> {
    let all: Vec<LocalAutomaton> = locals.iter().map(|a| a.local.clone()).collect();
    let verdict = check_equivalence(plant, &all, &sup)?;
    if !verdict.passed() {
        return Err(Error::EquivalenceFailure(verdict.to_string()));
    }
    Ok(Localized {
        plant: plant.clone(),
        sup,
        ambient,
        log,
        supos,
        locals,
    })
}

/// One observation view: supCO, its observer, one preemptor per forcible
/// event and one controller per prohibitible event.
pub fn monolithic(
    plant: &Generator,
    spec: &Generator,
    view: &EventSet,
    table: &EventTable,
    opts: SynthesisOptions,
) -> Result<Localized> {
    let syn = sup_cco(plant, spec, std::slice::from_ref(view), &[None], table, opts)?;
    if syn.sup.is_empty() {
        return Err(Error::EmptySupervisor {
            hint: "the specification admits no controllable, observable behavior".into(),
        });
    }
    let supo = annotate_flags(&build_supo(&syn.sup, view), plant, &table.forcible())?;
    let locals = localize_all(&supo, &table.forcible(), &table.prohibitible())
        .into_iter()
        .map(|local| Allocated { agent: None, local })
        .collect();
    finish(plant, syn.sup, syn.ambient, syn.log, vec![supo], locals)
}

/// Delayed plant: supCCO over the agent views, then each agent localizes its
/// own observer for its own forcible and prohibitible events.
pub fn decentralized(aug: &Augmented, opts: SynthesisOptions) -> Result<Localized> {
    let views: Vec<EventSet> = aug.views.iter().map(|v| v.observable.clone()).collect();
    let responsible: Vec<Option<EventSet>> =
        aug.views.iter().map(|v| Some(v.events.clone())).collect();
    let syn = sup_cco(&aug.plant, &aug.spec, &views, &responsible, &aug.table, opts)?;
    if syn.sup.is_empty() {
        return Err(Error::EmptySupervisor {
            hint: "the delay requirements are too strong; weaken them (larger bounds or unbounded channels)"
                .into(),
        });
    }
    let mut supos = Vec::new();
    let mut locals = Vec::new();
    for v in &aug.views {
        let supo = agent_supo(&syn.sup, &aug.plant, v, &aug.table)?;
        for local in localize_all(&supo, &v.forcible, &v.prohibitible) {
            locals.push(Allocated {
                agent: Some(v.agent.clone()),
                local,
            });
        }
        supos.push(supo);
    }
    finish(&aug.plant, syn.sup, syn.ambient, syn.log, supos, locals)
}

fn agent_supo(
    sup: &Generator,
    plant: &Generator,
    view: &AgentView,
    table: &EventTable,
) -> Result<UncertaintyAutomaton> {
    annotate_flags(&build_supo(sup, &view.observable), plant, &table.forcible())
}
