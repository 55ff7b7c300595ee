use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use tdes_loc::delay::{Agent, Augmented};
use tdes_loc::pipeline::{decentralized, monolithic, Localized};
use tdes_loc::project::{parse_project, Model, ProjectConfig, ProjectOptions};
use tdes_loc::random::{random_delayed, rng};
use tdes_loc::synthesis::{sup_cco, AmbientPolicy, Synthesis};
use tdes_loc::text::write_generator;
use tdes_loc::ttg::MarkingRule;
use tdes_loc::verify::{
    check_controllable, check_equivalence, check_local, check_rel_coobservable, check_rel_observable,
    Verdict,
};
use tdes_loc::{Error, EventSet, EventTable, Generator};

const VERIFICATION_FAILED: u8 = 1;
const EMPTY_SUPERVISOR: u8 = 2;
const PARSE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "tdesloc", version, about = "Supervisor localization for timed discrete-event systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Project file. Not needed with --seed.
    #[arg(global = true)]
    project: Option<PathBuf>,
    /// Ambient language policy for relative observability.
    #[arg(long, global = true, value_enum)]
    ambient: Option<Ambient>,
    /// Which timed states of a marked activity are marked.
    #[arg(long, global = true, value_enum)]
    marking: Option<Marking>,
    /// Directory for artifact files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use the seeded random two-agent delayed instance instead of a project.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Timed transition graphs and the plant.
    Build,
    /// Supervisor (supCO, or supCCO when channels are declared).
    Synthesize,
    /// Local preemptors and controllers.
    Localize,
    /// Channel models and delay requirements.
    Channels,
    /// Every checker on the supervisor and its localization.
    Verify,
    /// Counts and the agent / local automaton table.
    Report,
}

#[derive(ValueEnum, Clone, Copy)]
enum Ambient {
    Fixed,
    Iterated,
    Specification,
}

#[derive(ValueEnum, Clone, Copy)]
enum Marking {
    Activity,
    DefaultTimers,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EmptySupervisor { .. } => EMPTY_SUPERVISOR,
            _ => VERIFICATION_FAILED,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn parse_failure(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: PARSE_ERROR,
        message: e.to_string(),
    }
}

/// Everything a command needs, from a project file or a seed.
struct Input {
    options: ProjectOptions,
    agents: Vec<Agent>,
    plant: Generator,
    spec: Generator,
    table: EventTable,
    observable: EventSet,
    delayed: Option<Augmented>,
}

impl Input {
    fn load(cli: &Cli) -> Result<Input, Failure> {
        if let Some(seed) = cli.seed {
            let aug = random_delayed(&mut rng(seed))?;
            let mut options = ProjectOptions::default();
            apply(&mut options, cli);
            return Ok(Input {
                options,
                agents: Vec::new(),
                plant: aug.plant.clone(),
                spec: aug.spec.clone(),
                table: aug.table.clone(),
                observable: aug.plant.alphabet().to_set(),
                delayed: Some(aug),
            });
        }
        let path = cli.project.as_ref().ok_or_else(|| Failure {
            code: PARSE_ERROR,
            message: "a project file or --seed is required".into(),
        })?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_failure(format!("{}: {e}", path.display())))?;
        let mut p: ProjectConfig =
            parse_project(&text).map_err(|e| parse_failure(format!("{}: {e}", path.display())))?;
        apply(&mut p.options, cli);
        let m = Model::build(&p).map_err(parse_failure)?;
        let delayed = if p.has_channels() {
            Some(m.augmented(&p).map_err(parse_failure)?)
        } else {
            None
        };
        Ok(Input {
            options: p.options,
            agents: m.agents,
            plant: m.plant,
            spec: m.spec,
            table: m.table,
            observable: m.observable,
            delayed,
        })
    }

    fn views(&self) -> (Vec<EventSet>, Vec<Option<EventSet>>) {
        match &self.delayed {
            Some(aug) => (
                aug.views.iter().map(|v| v.observable.clone()).collect(),
                aug.views.iter().map(|v| Some(v.events.clone())).collect(),
            ),
            None => (vec![self.observable.clone()], vec![None]),
        }
    }

    /// Plant, specification and table the supervisor is computed against.
    fn problem(&self) -> (&Generator, &Generator, &EventTable) {
        match &self.delayed {
            Some(aug) => (&aug.plant, &aug.spec, &aug.table),
            None => (&self.plant, &self.spec, &self.table),
        }
    }

    fn synthesize(&self) -> Result<Synthesis, Failure> {
        let (g, e, table) = self.problem();
        let (views, resp) = self.views();
        let syn = sup_cco(g, e, &views, &resp, table, self.options.synthesis())?;
        for s in &syn.log {
            info!("{}", serde_json::to_string(s).unwrap());
        }
        Ok(syn)
    }

    fn localize(&self) -> Result<Localized, Failure> {
        let run = match &self.delayed {
            Some(aug) => decentralized(aug, self.options.synthesis())?,
            None => monolithic(
                &self.plant,
                &self.spec,
                &self.observable,
                &self.table,
                self.options.synthesis(),
            )?,
        };
        Ok(run)
    }

    /// Owner of each local automaton: its allocation, or for a monolithic
    /// run the agent whose component has the event.
    fn owner(&self, run: &Localized, i: usize) -> String {
        let a = &run.locals[i];
        if let Some(agent) = &a.agent {
            return agent.clone();
        }
        self.agents
            .iter()
            .find(|ag| ag.events().contains(a.local.event()))
            .map(|ag| ag.name.clone())
            .unwrap_or_else(|| "-".into())
    }
}

fn apply(options: &mut ProjectOptions, cli: &Cli) {
    if let Some(a) = cli.ambient {
        options.ambient = match a {
            Ambient::Fixed => AmbientPolicy::Fixed,
            Ambient::Iterated => AmbientPolicy::Iterated,
            Ambient::Specification => AmbientPolicy::Specification,
        };
    }
    if let Some(m) = cli.marking {
        options.marking = match m {
            Marking::Activity => MarkingRule::Activity,
            Marking::DefaultTimers => MarkingRule::DefaultTimers,
        };
    }
}

/// Collects artifact files; written only when `--out` is given.
struct Artifacts {
    dir: Option<PathBuf>,
}

impl Artifacts {
    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let Some(dir) = &self.dir else { return Ok(()) };
        std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(name), contents)).map_err(
            |e| Failure {
                code: VERIFICATION_FAILED,
                message: format!("{}: {e}", dir.join(name).display()),
            },
        )
    }

    fn generator(&self, name: &str, g: &Generator) -> Result<(), Failure> {
        self.write(&format!("{name}.gen"), &write_generator(name, g))
    }
}

fn counts(g: &Generator) -> String {
    format!("{} states, {} transitions", g.num_states(), g.num_transitions())
}

fn names(set: &EventSet) -> String {
    if set.is_empty() {
        return "-".into();
    }
    set.iter().map(|e| e.name()).collect::<Vec<_>>().join(" ")
}

fn build(input: &Input, out: &Artifacts) -> Result<String, Failure> {
    let mut text = String::new();
    for a in &input.agents {
        writeln!(text, "{}: {}", a.name, counts(&a.component)).unwrap();
        out.generator(&a.name, &a.component)?;
    }
    let (g, e, _) = input.problem();
    writeln!(text, "plant: {}", counts(g)).unwrap();
    writeln!(text, "spec: {}", counts(e)).unwrap();
    out.generator("plant", g)?;
    out.generator("spec", e)?;
    Ok(text)
}

fn synthesize(input: &Input, out: &Artifacts) -> Result<String, Failure> {
    let syn = input.synthesize()?;
    if syn.sup.is_empty() {
        let hint = if input.delayed.is_some() {
            "the delay requirements are too strong; weaken them (larger bounds or unbounded channels)"
        } else {
            "the specification admits no controllable, observable behavior"
        };
        return Err(Error::EmptySupervisor { hint: hint.into() }.into());
    }
    out.generator("SUP", &syn.sup)?;
    let log: String = syn
        .log
        .iter()
        .map(|s| serde_json::to_string(s).unwrap() + "\n")
        .collect();
    out.write("synthesis.jsonl", &log)?;
    Ok(format!("SUP: {}\n", counts(&syn.sup)))
}

fn localize(input: &Input, out: &Artifacts) -> Result<String, Failure> {
    let run = input.localize()?;
    let mut text = String::new();
    let mut manifest = Vec::new();
    for (i, a) in run.locals.iter().enumerate() {
        let label = a.local.label();
        let owner = input.owner(&run, i);
        writeln!(
            text,
            "{label}: {}; agent {owner}; communicates {{{}}}",
            counts(&a.local.gen),
            names(&a.local.comm)
        )
        .unwrap();
        out.generator(&label, &a.local.gen)?;
        manifest.push(json!({
            "label": label,
            "agent": owner,
            "kind": a.local.kind,
            "states": a.local.num_states(),
            "transitions": a.local.gen.num_transitions(),
            "comm": a.local.comm,
        }));
    }
    out.write("locals.json", &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
    Ok(text)
}

fn channels(input: &Input, out: &Artifacts) -> Result<String, Failure> {
    let Some(aug) = &input.delayed else {
        return Ok("no channels declared\n".into());
    };
    let mut text = String::new();
    for (c, ch, req) in &aug.channels {
        let base = format!("{}_{}_{}", c.sender, c.event, c.receiver);
        writeln!(text, "channel {base}: {}", counts(ch)).unwrap();
        writeln!(text, "requirement {base}: {}", counts(req)).unwrap();
        out.generator(&format!("CH_{base}"), ch)?;
        out.generator(&format!("REQ_{base}"), req)?;
    }
    Ok(text)
}

fn verify(input: &Input, out: &Artifacts) -> Result<String, Failure> {
    let run = input.localize()?;
    let (g, _, table) = input.problem();
    let (views, resp) = input.views();
    let clause = input.options.marking_clause;
    let mut verdicts: Vec<Verdict> = vec![check_controllable(g, &run.sup, table)?];
    verdicts.push(if views.len() == 1 {
        check_rel_observable(g, &run.ambient, &run.sup, &views[0], None, clause)?
    } else {
        check_rel_coobservable(g, &run.ambient, &run.sup, &views, &resp, clause)?
    });
    for a in &run.locals {
        verdicts.push(check_local(&a.local, &run.sup, g)?);
    }
    verdicts.push(check_equivalence(g, &run.local_automata(), &run.sup)?);
    let text: String = verdicts.iter().map(|v| format!("{v}\n")).collect();
    out.write("verdicts.json", &(serde_json::to_string_pretty(&verdicts).unwrap() + "\n"))?;
    if verdicts.iter().all(Verdict::passed) {
        Ok(text)
    } else {
        Err(Failure {
            code: VERIFICATION_FAILED,
            message: text,
        })
    }
}

fn report(input: &Input, out: &Artifacts) -> Result<String, Failure> {
    let run = input.localize()?;
    let mut text = String::new();
    writeln!(text, "plant: {}", counts(&run.plant)).unwrap();
    writeln!(text, "SUP: {}", counts(&run.sup)).unwrap();
    let mut by_agent: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for i in 0..run.locals.len() {
        by_agent.entry(input.owner(&run, i)).or_default().push(i);
    }
    writeln!(text, "{:<8} {:<20} {:>7}  communicated events", "agent", "local", "states").unwrap();
    for (agent, idx) in &by_agent {
        for &i in idx {
            let l = &run.locals[i].local;
            writeln!(text, "{:<8} {:<20} {:>7}  {}", agent, l.label(), l.num_states(), names(&l.comm))
                .unwrap();
        }
    }
    out.write("report.txt", &text)?;
    Ok(text)
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let input = Input::load(cli)?;
    let out = Artifacts { dir: cli.out.clone() };
    match cli.command {
        Command::Build => build(&input, &out),
        Command::Synthesize => synthesize(&input, &out),
        Command::Localize => localize(&input, &out),
        Command::Channels => channels(&input, &out),
        Command::Verify => verify(&input, &out),
        Command::Report => report(&input, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprint!("error: {}", f.message);
            if !f.message.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(f.code)
        }
    }
}
