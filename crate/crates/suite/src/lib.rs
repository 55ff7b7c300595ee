//! Acceptance suite. The criteria live in `tests/acceptance.rs`; run them
//! with `cargo test -p tdes-loc-suite --test acceptance`.
