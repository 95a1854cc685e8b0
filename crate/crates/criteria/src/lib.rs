//! The acceptance checks live in `tests/acceptance.rs`; run them with
//! `cargo test -p lftab-criteria --test acceptance`.
