use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{emit_smtlib, SatResult, SatSolver, SmtVerdict, SolverConfig};
use crate::formula::Formula;

/// Runs one solver process per query, killing it at the configured timeout.
#[derive(Debug, Clone)]
pub struct ProcessSolver {
    config: SolverConfig,
}

impl ProcessSolver {
    pub fn new(config: SolverConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Runs a raw script and interprets the first output token.
    pub fn run_script(&self, script: &str) -> SmtVerdict {
        let start = Instant::now();
        let result = self.run(script);
        SmtVerdict::new(result, start.elapsed())
    }

    fn run(&self, script: &str) -> SatResult {
        let Some((program, args)) = self.config.command.split_first() else {
            return SatResult::SolverError {
                diagnostic: "empty solver command".into(),
            };
        };
        let mut child = match Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
        {
            Ok(c) => c,
            Err(e) => {
                return SatResult::SolverError {
                    diagnostic: format!("cannot start `{program}`: {e}"),
                }
            }
        };
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let script = script.to_owned();
        let writer = thread::spawn(move || {
            // A solver that exits early closes the pipe; that is not our error.
            let _ = stdin.write_all(script.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let mut stderr = child.stderr.take().expect("stderr is piped");
        let out_reader = thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });
        let err_reader = thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });

        let deadline = Instant::now() + self.config.timeout();
        let mut poll = Duration::from_micros(200);
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break Some(status),
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    break None;
                }
                Ok(None) => {
                    thread::sleep(poll.min(deadline.saturating_duration_since(Instant::now())));
                    poll = (poll * 2).min(Duration::from_millis(20));
                }
                Err(e) => {
                    let _ = child.kill();
                    return SatResult::SolverError {
                        diagnostic: format!("waiting for solver failed: {e}"),
                    };
                }
            }
        };
        let _ = writer.join();
        let out = out_reader.join().unwrap_or_default();
        let err = err_reader.join().unwrap_or_default();
        if status.is_none() {
            return SatResult::Timeout;
        }
        interpret(&out, &err)
    }
}

fn interpret(out: &str, err: &str) -> SatResult {
    let mut lines = out.trim_start().splitn(2, '\n');
    let first = lines.next().unwrap_or("").trim();
    match first {
        "sat" => {
            let model = lines.next().map(str::trim).filter(|m| !m.is_empty());
            SatResult::Sat {
                model: model.map(str::to_owned),
            }
        }
        "unsat" => SatResult::Unsat,
        "unknown" => SatResult::Unknown,
        "timeout" => SatResult::Timeout,
        _ => SatResult::SolverError {
            diagnostic: format!("{}{}", out.trim(), err.trim()),
        },
    }
}

impl SatSolver for ProcessSolver {
    fn check_sat(&self, f: &Formula) -> SmtVerdict {
        let decls = f.free_vars();
        match emit_smtlib(f, &decls, &self.config) {
            Ok(script) => self.run_script(&script),
            Err(e) => SmtVerdict::instant(SatResult::SolverError {
                diagnostic: e.to_string(),
            }),
        }
    }
}
