//! SMT-LIB2 emission and the external solver bridge.
//!
//! Every query runs in its own solver process. [`SatSolver`] abstracts the
//! backend so analyses can run against stubs in tests.

mod emit;
mod process;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;

pub use emit::{emit_smtlib, EmitError};
pub use process::ProcessSolver;

pub const SOLVER_ENV: &str = "EFMCT_SOLVER";
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumEncoding {
    /// `declare-datatypes` with one nullary constructor per literal.
    Datatype,
    /// Integers `0..n` in literal order, with range guards.
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub command: Vec<String>,
    pub timeout_ms: u64,
    pub logic: String,
    pub random_seed: Option<u64>,
    pub enum_encoding: EnumEncoding,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            command: vec!["z3".into(), "-in".into()],
            timeout_ms: DEFAULT_TIMEOUT_MS,
            logic: "ALL".into(),
            random_seed: None,
            enum_encoding: EnumEncoding::Datatype,
        }
    }
}

impl SolverConfig {
    /// Defaults, with the command taken from `EFMCT_SOLVER` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Ok(cmd) = std::env::var(SOLVER_ENV) {
            cfg.set_command(&cmd);
        }
        cfg
    }

    /// Splits a command line on whitespace; an empty line is ignored.
    pub fn set_command(&mut self, cmd: &str) {
        let parts: Vec<String> = cmd.split_whitespace().map(str::to_owned).collect();
        if !parts.is_empty() {
            self.command = parts;
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SatResult {
    Sat { model: Option<String> },
    Unsat,
    Unknown,
    Timeout,
    SolverError { diagnostic: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtVerdict {
    pub result: SatResult,
    pub wall_time: Duration,
}

impl SmtVerdict {
    pub fn new(result: SatResult, wall_time: Duration) -> Self {
        Self { result, wall_time }
    }

    pub fn instant(result: SatResult) -> Self {
        Self::new(result, Duration::ZERO)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Validity {
    Valid,
    Invalid { countermodel: Option<String> },
    Unknown,
    Timeout,
    SolverError { diagnostic: String },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }

    /// Neither proven nor refuted.
    pub fn is_undecided(&self) -> bool {
        matches!(
            self,
            Validity::Unknown | Validity::Timeout | Validity::SolverError { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityVerdict {
    pub validity: Validity,
    pub wall_time: Duration,
}

pub trait SatSolver: Send + Sync {
    fn check_sat(&self, f: &Formula) -> SmtVerdict;

    /// Validity of `f` as unsatisfiability of `¬f`.
    fn check_validity(&self, f: &Formula) -> ValidityVerdict {
        let v = self.check_sat(&Formula::not(f.clone()));
        let validity = match v.result {
            SatResult::Unsat => Validity::Valid,
            SatResult::Sat { model } => Validity::Invalid {
                countermodel: model,
            },
            SatResult::Unknown => Validity::Unknown,
            SatResult::Timeout => Validity::Timeout,
            SatResult::SolverError { diagnostic } => Validity::SolverError { diagnostic },
        };
        ValidityVerdict {
            validity,
            wall_time: v.wall_time,
        }
    }
}

/// Closed formulas are decided by evaluation; everything else is handed to
/// `solver`.
pub(crate) fn check_sat_folding(solver: &dyn SatSolver, f: &Formula) -> SmtVerdict {
    match f.eval_bool(&Default::default()) {
        Some(true) => SmtVerdict::instant(SatResult::Sat { model: None }),
        Some(false) => SmtVerdict::instant(SatResult::Unsat),
        None => solver.check_sat(f),
    }
}

pub(crate) fn check_validity_folding(solver: &dyn SatSolver, f: &Formula) -> ValidityVerdict {
    match f.eval_bool(&Default::default()) {
        Some(true) => ValidityVerdict {
            validity: Validity::Valid,
            wall_time: Duration::ZERO,
        },
        Some(false) => ValidityVerdict {
            validity: Validity::Invalid { countermodel: None },
            wall_time: Duration::ZERO,
        },
        None => solver.check_validity(f),
    }
}
