//! Acceptance run: one PASS/FAIL line per criterion, with its time limit.
//! Needs the solver (`z3 -in` unless `EFMCT_SOLVER` is set).

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::oracle::{
    check_application, check_configurations, check_matches, check_overlaps, feature_model,
};
use common::shape;
use efmct_core::conflict::{
    analyze_pair, analyze_ruleset, check_direct_confluence, enumerate_overlaps, filter_wellformed,
    AnalysisOptions, ConflictReason, ContextVerdict, Outcome as Status, Verdict,
};
use efmct_core::efm::{
    check_configuration, check_wellformed, has_valid_configuration, Answer, Assignment,
};
use efmct_core::fixtures;
use efmct_core::rule::{apply, find_rule_matches, ApplicationStatus};
use efmct_core::smt::{ProcessSolver, SolverConfig, Validity};
use efmct_core::{ObjId, Value, VarId};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<(), String>;

fn applied(o: &Status) -> bool {
    matches!(o, Status::Applied)
}

fn dangles(o: &Status) -> bool {
    matches!(o, Status::InvalidDangling { .. })
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn solver() -> ProcessSolver {
    ProcessSolver::new(SolverConfig::from_env())
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn context_enumeration() -> Outcome {
    let contexts = enumerate_overlaps(&fixtures::r_a().lhs, &fixtures::r_b().lhs)
        .map_err(|e| e.to_string())?;
    ensure!(
        contexts.len() == 5,
        "{} contexts, expected 5",
        contexts.len()
    );
    let (kept, dropped) = filter_wellformed(contexts).map_err(|e| e.to_string())?;
    ensure!(dropped.len() == 2, "{} dropped, expected 2", dropped.len());
    ensure!(kept.len() == 3, "{} kept", kept.len());
    let constraints: BTreeSet<&str> = dropped
        .iter()
        .flat_map(|(_, vs)| vs.iter().map(|v| v.constraint.as_str()))
        .collect();
    ensure!(
        constraints == BTreeSet::from(["C-3"]),
        "dropped by {constraints:?}"
    );
    Ok(())
}

fn worked_pair() -> Outcome {
    let s = solver();
    let (ra, rb) = (fixtures::r_a(), fixtures::r_b());
    let contexts = enumerate_overlaps(&ra.lhs, &rb.lhs).map_err(|e| e.to_string())?;

    let t = check_direct_confluence(&ra, &rb, &contexts[0], &s);
    let Some((o1, o2)) = &t.first else {
        return Err("no first applications recorded".into());
    };
    ensure!(
        applied(o1) && applied(o2),
        "first applications: {o1:?}, {o2:?}"
    );
    ensure!(
        t.verdict == ContextVerdict::NoConflictHere,
        "largest context: {:?}",
        t.verdict
    );
    let check = &t.witness.as_ref().ok_or("no witness")?.check;
    let ids = |vs: &BTreeSet<VarId>| vs.iter().map(|v| v.0.clone()).collect::<Vec<_>>();
    ensure!(
        ids(&check.aux12) == ["r_a.1.v_min"],
        "aux12 = {:?}",
        check.aux12
    );
    ensure!(
        ids(&check.aux21) == ["r_b.1.v_x'"],
        "aux21 = {:?}",
        check.aux21
    );
    ensure!(
        check.validity == Some(Validity::Valid),
        "query: {:?}",
        check.validity
    );

    let t = check_direct_confluence(&ra, &rb, &contexts[4], &s);
    ensure!(
        t.verdict == ContextVerdict::FilteredInvalidApplication,
        "single-feature context: {:?}",
        t.verdict
    );
    ensure!(
        t.first.as_ref().is_some_and(|(first, _)| dangles(first)),
        "single-feature context does not dangle: {:?}",
        t.first
    );

    let p = analyze_pair(&ra, &rb, &s, AnalysisOptions::default()).map_err(|e| e.to_string())?;
    ensure!(
        p.verdict == Verdict::NonConflicting,
        "pair: {:?}",
        p.verdict
    );
    Ok(())
}

fn matrix() -> Outcome {
    let s = solver();
    let rules = vec![fixtures::r_a(), fixtures::r_b(), fixtures::r_c()];
    let m = analyze_ruleset(&rules, &s, AnalysisOptions::default()).map_err(|e| e.to_string())?;
    let ok: Vec<(String, String)> = m
        .non_conflicting()
        .map(|p| (p.first.clone(), p.second.clone()))
        .collect();
    ensure!(ok.len() == 3, "non-conflicting pairs: {ok:?}");

    let aa = m.get(0, 0).ok_or("missing (a, a)")?;
    ensure!(aa.verdict == Verdict::Conflicting, "(a, a) not conflicting");
    let first = &aa.traces[0];
    let dangling = first
        .first
        .as_ref()
        .is_some_and(|(a, b)| dangles(a) || dangles(b));
    ensure!(
        first.verdict
            == ContextVerdict::ConflictHere {
                reason: ConflictReason::NoSecondMatch
            }
            || dangling,
        "(a, a) first context: {:?}",
        first.verdict
    );
    ensure!(
        m.get(1, 2).ok_or("missing (b, c)")?.verdict == Verdict::Conflicting,
        "(b, c) not conflicting"
    );
    let ac = m.get(0, 2).ok_or("missing (a, c)")?;
    ensure!(ac.verdict == Verdict::Conflicting, "(a, c) not conflicting");
    let expected = [("r_a", "r_b"), ("r_b", "r_b"), ("r_c", "r_c")];
    if ok
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .ne(expected)
    {
        println!("    note: non-conflicting pairs are {ok:?}");
    }
    Ok(())
}

fn cpa_baseline() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_efmct"))
        .arg("analyze")
        .arg("--cpa-only")
        .args(["r_a.rule", "r_b.rule", "r_c.rule"].map(|r| fixture(&format!("rules/{r}"))))
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.code() == Some(1),
        "exit code {:?}",
        out.status.code()
    );
    let text = String::from_utf8_lossy(&out.stdout);
    let flagged = text
        .lines()
        .filter(|l| l.ends_with(": potential-conflict"))
        .count();
    ensure!(flagged == 6, "{flagged} pairs flagged:\n{text}");
    ensure!(!text.contains('✓'), "a pair was cleared:\n{text}");
    Ok(())
}

fn rule_application() -> Outcome {
    let s = solver();
    let host = fixtures::lock_excerpt();
    let r = fixtures::r_a();
    let m = find_rule_matches(&r, &host)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|m| m.objects.get(&ObjId::from("f1")) == Some(&ObjId::from("mSec")))
        .ok_or("no match sending f1 to mSec")?;
    let res = apply(&r, &m, &host, &s).map_err(|e| e.to_string())?;
    ensure!(
        res.status == ApplicationStatus::Applied,
        "status {:?}",
        res.status
    );
    let out = res.graph.as_ref().ok_or("no result graph")?;

    let gone: Vec<&ObjId> = host
        .objects()
        .map(|o| &o.id)
        .filter(|id| out.object(id).is_none())
        .collect();
    ensure!(gone.len() == 3, "deleted {gone:?}");
    let new: Vec<_> = out
        .objects()
        .filter(|o| host.object(&o.id).is_none())
        .collect();
    ensure!(
        new.len() == 1 && new[0].ty == "RealFeatureAttribute",
        "added {new:?}"
    );
    let fresh = &new[0].slots["val"];
    ensure!(
        !host.variables().contains_key(fresh),
        "`{fresh}` is not fresh"
    );
    ensure!(
        has_valid_configuration(out, &s).map_err(|e| e.to_string())? == Answer::Yes,
        "result formula is not satisfiable"
    );
    ensure!(
        check_wellformed(out).map_err(|e| e.to_string())?.is_empty(),
        "result is ill-formed"
    );
    ensure!(
        out == &fixtures::fm_a(),
        "result differs from the reference model"
    );
    Ok(())
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    run(500, (shape(1, 4, 0.35), shape(1, 8, 0.3)), |(p, h)| {
        check_matches(&p, &h)
    })
    .map_err(|e| format!("matching: {e}"))?;
    run(200, (shape(1, 5, 0.35), shape(1, 5, 0.35)), |(a, b)| {
        check_overlaps(&a, &b)
    })
    .map_err(|e| format!("overlaps: {e}"))?;
    run(
        500,
        (
            shape(0, 6, 0.3),
            0usize..4,
            prop::collection::vec(any::<bool>(), 16),
            any::<prop::sample::Index>(),
        ),
        |(s, which, constrain, pick)| check_application(&s, which, &constrain, pick),
    )
    .map_err(|e| format!("application: {e}"))?;
    run(
        32,
        (feature_model(12), any::<Option<prop::sample::Index>>()),
        |(m, spoil)| check_configurations(&m, spoil),
    )
    .map_err(|e| format!("configuration: {e}"))?;
    let oracle_time = start.elapsed();
    ensure!(
        oracle_time < Duration::from_secs(300),
        "oracle suites took {oracle_time:?}"
    );

    let s = solver();
    let rules = common::oracle::rules();
    for (i, r1) in rules.iter().enumerate() {
        for r2 in &rules[i + 1..] {
            let ab =
                analyze_pair(r1, r2, &s, AnalysisOptions::default()).map_err(|e| e.to_string())?;
            let ba =
                analyze_pair(r2, r1, &s, AnalysisOptions::default()).map_err(|e| e.to_string())?;
            ensure!(
                ab.verdict == ba.verdict,
                "{} × {} is not symmetric",
                r1.name,
                r2.name
            );
        }
    }
    Ok(())
}

/// Selects exactly `selected` in the full lock model and fills the levels
/// its formula defines.
fn lock_configuration(selected: &[&str], low: i64) -> Assignment {
    let on = |f: &str| selected.contains(&f);
    let pick = |f: &str, v: i64| if on(f) { v } else { 0 };
    let token = pick("keycard", 10) + pick("transponder", 15);
    let knowledge = pick("pin", 5) + pick("password", 10);
    let biometric = pick("fingerprint", 20) + pick("iris", 30);
    let auth = pick("token", token) + pick("knowledge", knowledge) + pick("biometric", biometric);
    let mut a = Assignment::new();
    for f in [
        "lock",
        "authmeth",
        "token",
        "keycard",
        "transponder",
        "knowledge",
        "pin",
        "password",
        "biometric",
        "fingerprint",
        "iris",
        "msec",
        "low",
        "high",
    ] {
        a.insert(VarId::from(format!("s_{f}").as_str()), Value::Bool(on(f)));
    }
    for (t, lit) in [
        ("t_auth", "MAN"),
        ("t_sec", "OPT"),
        ("t_dev", "OR"),
        ("t_tok", "OR"),
        ("t_know", "ALT"),
        ("t_bio", "OR"),
        ("t_low", "MAN"),
        ("t_high", "OPT"),
    ] {
        a.insert(VarId::from(t), Value::Enum(lit.into()));
    }
    for (v, n) in [
        ("v_keycard", 10),
        ("v_transponder", 15),
        ("v_pin", 5),
        ("v_password", 10),
        ("v_fingerprint", 20),
        ("v_iris", 30),
        ("v_token", token),
        ("v_knowledge", knowledge),
        ("v_biometric", biometric),
        ("v_authmeth", auth),
        ("v_low", low),
        ("n_minlen", 8),
    ] {
        a.insert(VarId::from(v), Value::int(n));
    }
    a
}

fn configuration_semantics() -> Outcome {
    let s = solver();
    let g = fixtures::lock_full();
    let check = |a: &Assignment| check_configuration(&g, a, Some(&s)).map_err(|e| e.to_string());
    for low in [0, 10, 20, 50] {
        let a = lock_configuration(
            &["lock", "authmeth", "token", "keycard", "msec", "low"],
            low,
        );
        ensure!(
            !check(&a)?,
            "keycard only with mission security accepted (low = {low})"
        );
    }
    let a = lock_configuration(&["lock", "authmeth", "token", "keycard"], 0);
    ensure!(check(&a)?, "keycard only without mission security rejected");
    let a = lock_configuration(
        &[
            "lock",
            "authmeth",
            "token",
            "keycard",
            "transponder",
            "msec",
            "low",
        ],
        20,
    );
    ensure!(
        check(&a)?,
        "keycard and transponder with mission security rejected"
    );
    Ok(())
}

type Criterion = (u8, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (
            1,
            "context enumeration",
            Duration::from_secs(1),
            context_enumeration,
        ),
        (2, "worked pair", Duration::from_secs(5), worked_pair),
        (3, "matrix reproduction", Duration::from_secs(30), matrix),
        (4, "cpa baseline", Duration::from_secs(1), cpa_baseline),
        (
            5,
            "rule application",
            Duration::from_secs(5),
            rule_application,
        ),
        (
            6,
            "property suites",
            Duration::from_secs(600),
            property_suites,
        ),
        (
            7,
            "configuration semantics",
            Duration::from_secs(10),
            configuration_semantics,
        ),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|()| {
            if took <= limit {
                Ok(())
            } else {
                Err(format!("took {took:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(()) => println!("criterion {n} PASS {name} ({took:.2?})"),
            Err(e) => {
                failed += 1;
                println!("criterion {n} FAIL {name} ({took:.2?}): {e}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
