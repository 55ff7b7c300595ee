//! Line-oriented text format for generators.
//!
//! ```text
//! generator SUP
//! alphabet a b tick
//! state 0 initial marked
//! state 1
//! trans 0 a 1
//! # stats states 2 transitions 1
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::generator::{Alphabet, Generator, GeneratorBuilder};

pub fn write_generator(name: &str, g: &Generator) -> String {
    let mut out = String::new();
    writeln!(out, "generator {name}").unwrap();
    let names: Vec<&str> = g.alphabet().iter().map(Event::name).collect();
    writeln!(out, "alphabet {}", names.join(" ")).unwrap();
    for s in g.states() {
        let mut line = format!("state {s}");
        if Some(s) == g.initial() {
            line.push_str(" initial");
        }
        if g.is_marked(s) {
            line.push_str(" marked");
        }
        writeln!(out, "{line}").unwrap();
    }
    for (s, e, t) in g.transitions() {
        writeln!(out, "trans {s} {e} {t}").unwrap();
    }
    writeln!(
        out,
        "# stats states {} transitions {}",
        g.num_states(),
        g.num_transitions()
    )
    .unwrap();
    out
}

/// Parses the output of [`write_generator`]; returns the name and generator.
pub fn parse_generator(text: &str) -> Result<(String, Generator)> {
    let mut name = None;
    let mut builder: Option<GeneratorBuilder> = None;
    let mut ids: Vec<u32> = Vec::new();
    let mut initial = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            [c, ..] if c.starts_with('#') => {}
            ["generator", nm] => name = Some(nm.to_string()),
            ["alphabet", evs @ ..] => {
                builder = Some(GeneratorBuilder::new(Alphabet::new(
                    evs.iter().map(|e| Event::new(e)),
                )))
            }
            ["state", id, flags @ ..] => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| Error::parse(line, "state before alphabet"))?;
                let id: u32 = id
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad state id `{id}`")))?;
                if id as usize != ids.len() {
                    return Err(Error::parse(line, "states must be numbered consecutively"));
                }
                let mut marked = false;
                for f in flags {
                    match *f {
                        "marked" => marked = true,
                        "initial" => initial = Some(id),
                        other => return Err(Error::parse(line, format!("unknown flag `{other}`"))),
                    }
                }
                ids.push(b.add_state(marked));
            }
            ["trans", s, e, t] => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| Error::parse(line, "trans before alphabet"))?;
                let s: u32 = s.parse().map_err(|_| Error::parse(line, "bad source"))?;
                let t: u32 = t.parse().map_err(|_| Error::parse(line, "bad target"))?;
                b.add_transition(s, &Event::new(e), t)
                    .map_err(|err| Error::parse(line, err.to_string()))?;
            }
            _ => return Err(Error::parse(line, format!("unrecognized line `{raw}`"))),
        }
    }
    let mut b = builder.ok_or_else(|| Error::parse(0, "missing alphabet"))?;
    match initial {
        Some(s) => b.set_initial(s)?,
        None if !ids.is_empty() => return Err(Error::parse(0, "no initial state")),
        None => {}
    }
    let name = name.ok_or_else(|| Error::parse(0, "missing generator name"))?;
    Ok((name, b.build()))
}
