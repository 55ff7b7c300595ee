//! Supervisor localization for timed discrete-event systems under partial
//! observation, with optional communication delays between local agents.

pub mod delay;
pub mod error;
pub mod event;
pub mod generator;
pub mod localize;
pub mod ops;
pub mod pipeline;
pub mod project;
pub mod random;
pub mod supo;
pub mod synthesis;
pub mod text;
pub mod ttg;
pub mod verify;

pub use error::{Error, Result};
pub use event::{event_set, format_word, Bounds, Event, EventInfo, EventSet, EventTable, TICK};
pub use generator::{Alphabet, Generator, GeneratorBuilder, StateId};
