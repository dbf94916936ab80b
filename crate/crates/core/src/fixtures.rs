//! The lock models and edit rules used throughout the tests and examples.

use crate::graph::SymbolicGraph;
use crate::io::{parse_model, parse_rule};
use crate::rule::SymbolicRule;

pub const LOCK_EXCERPT: &str = include_str!("../fixtures/lock-excerpt.model");
pub const LOCK_FULL: &str = include_str!("../fixtures/lock-full.model");
/// The excerpt after moving `low.level` up to `mSec` with `r_a`.
pub const FM_A: &str = include_str!("../fixtures/fm_a.model");
pub const R_A: &str = include_str!("../fixtures/rules/r_a.rule");
pub const R_B: &str = include_str!("../fixtures/rules/r_b.rule");
pub const R_C: &str = include_str!("../fixtures/rules/r_c.rule");
pub const IDENTITY: &str = include_str!("../fixtures/rules/identity.rule");

fn model(text: &str) -> SymbolicGraph {
    parse_model(text).expect("bundled model parses")
}

fn rule(text: &str) -> SymbolicRule {
    parse_rule(text).expect("bundled rule parses")
}

pub fn lock_excerpt() -> SymbolicGraph {
    model(LOCK_EXCERPT)
}

pub fn lock_full() -> SymbolicGraph {
    model(LOCK_FULL)
}

pub fn fm_a() -> SymbolicGraph {
    model(FM_A)
}

/// Replaces a child feature and its real attribute by a new attribute of the
/// grandparent.
pub fn r_a() -> SymbolicRule {
    rule(R_A)
}

/// Adds 10 to a real attribute.
pub fn r_b() -> SymbolicRule {
    rule(R_B)
}

/// Scales a real attribute by 10.
pub fn r_c() -> SymbolicRule {
    rule(R_C)
}

pub fn identity() -> SymbolicRule {
    rule(IDENTITY)
}
