//! Checks that run the external solver (`z3 -in` unless `EFMCT_SOLVER` says
//! otherwise).

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use efmct_core::conflict::{
    analyze_pair, analyze_ruleset, check_direct_confluence, cpa_filter, enumerate_overlaps,
    filter_wellformed, replay, AnalysisOptions, ConflictReason, ContextVerdict, Equivalence,
    Verdict,
};
use efmct_core::efm::{
    check_configuration, check_wellformed, has_valid_configuration, Answer, Assignment,
};
use efmct_core::fixtures;
use efmct_core::io::parse_rule;
use efmct_core::rule::{apply, check_admissibility, find_rule_matches, Admissibility};
use efmct_core::smt::{ProcessSolver, SatResult, SatSolver, SolverConfig, Validity};
use efmct_core::{Formula, SymbolicRule, Value, VarId};

fn solver() -> ProcessSolver {
    ProcessSolver::new(SolverConfig::from_env())
}

fn all_rules() -> Vec<SymbolicRule> {
    vec![
        fixtures::r_a(),
        fixtures::r_b(),
        fixtures::r_c(),
        fixtures::identity(),
    ]
}

fn ids(vars: &BTreeSet<VarId>) -> Vec<&str> {
    vars.iter().map(|v| v.as_str()).collect()
}

#[test]
fn worked_pair_joins_on_the_largest_context() {
    let start = Instant::now();
    let s = solver();
    let (ra, rb) = (fixtures::r_a(), fixtures::r_b());
    let contexts = enumerate_overlaps(&ra.lhs, &rb.lhs).unwrap();

    let ac_a = &contexts[0];
    assert_eq!(ac_a.identification.objects.len(), 2);
    assert_eq!(ac_a.identification.links.len(), 1);
    let t = check_direct_confluence(&ra, &rb, ac_a, &s);
    assert_eq!(t.verdict, ContextVerdict::NoConflictHere);
    let check = &t.witness.as_ref().unwrap().check;
    assert_eq!(ids(&check.aux12), ["r_a.1.v_min"]);
    assert_eq!(ids(&check.aux21), ["r_b.1.v_x'"]);
    assert_eq!(check.validity, Some(Validity::Valid));

    let ac_d = &contexts[4];
    assert_eq!(ac_d.identification.objects.len(), 1);
    assert!(ac_d.identification.links.is_empty());
    let t = check_direct_confluence(&ra, &rb, ac_d, &s);
    assert_eq!(t.verdict, ContextVerdict::FilteredInvalidApplication);

    let pair = analyze_pair(&ra, &rb, &s, AnalysisOptions::default()).unwrap();
    assert_eq!(pair.verdict, Verdict::NonConflicting);
    assert_eq!(pair.stats.enumerated, 5);
    assert_eq!(pair.stats.ill_formed, 2);
    assert!(start.elapsed() < Duration::from_secs(5));
}

#[test]
fn ruleset_matrix_has_three_joinable_pairs() {
    let s = solver();
    let rules = vec![fixtures::r_a(), fixtures::r_b(), fixtures::r_c()];
    let m = analyze_ruleset(&rules, &s, AnalysisOptions::default()).unwrap();
    let ok: Vec<(&str, &str)> = m
        .non_conflicting()
        .map(|p| (p.first.as_str(), p.second.as_str()))
        .collect();
    assert_eq!(ok, [("r_a", "r_b"), ("r_b", "r_b"), ("r_c", "r_c")]);

    let aa = m.get(0, 0).unwrap();
    assert_eq!(aa.verdict, Verdict::Conflicting);
    assert_eq!(
        aa.traces[0].verdict,
        ContextVerdict::ConflictHere {
            reason: ConflictReason::NoSecondMatch
        }
    );
    assert_eq!(m.get(1, 2).unwrap().verdict, Verdict::Conflicting);
    let ac = m.get(0, 2).unwrap();
    assert_eq!(ac.verdict, Verdict::Conflicting);

    // Every recorded witness still proves its context.
    for p in &m.entries {
        let (r1, r2) = (
            rules.iter().find(|r| r.name == p.first).unwrap(),
            rules.iter().find(|r| r.name == p.second).unwrap(),
        );
        for t in p.traces.iter().filter(|t| t.witness.is_some()) {
            assert_eq!(replay(r1, r2, t, &s).unwrap(), Equivalence::Equivalent);
        }
        let counted = p.stats.proven
            + p.stats.conflicts
            + p.stats.ill_formed
            + p.stats.independent
            + p.stats.invalid_application;
        assert_eq!(counted, p.traces.len());
    }
}

#[test]
fn cpa_only_flags_every_pair() {
    let s = solver();
    let rules = vec![fixtures::r_a(), fixtures::r_b(), fixtures::r_c()];
    let start = Instant::now();
    let m = analyze_ruleset(&rules, &s, AnalysisOptions { cpa_only: true }).unwrap();
    assert!(start.elapsed() < Duration::from_secs(1));
    assert_eq!(m.entries.len(), 6);
    assert!(m.entries.iter().all(|p| p.verdict == Verdict::Conflicting));
}

#[test]
fn verdicts_do_not_depend_on_argument_order() {
    let s = solver();
    let rules = all_rules();
    for (i, r1) in rules.iter().enumerate() {
        for r2 in &rules[i + 1..] {
            let ab = analyze_pair(r1, r2, &s, AnalysisOptions::default()).unwrap();
            let ba = analyze_pair(r2, r1, &s, AnalysisOptions::default()).unwrap();
            assert_eq!(ab.verdict, ba.verdict, "{} × {}", r1.name, r2.name);
        }
    }
}

#[test]
fn identity_rule_never_conflicts() {
    let s = solver();
    let id = fixtures::identity();
    for r in all_rules() {
        let p = analyze_pair(&id, &r, &s, AnalysisOptions::default()).unwrap();
        assert_eq!(p.verdict, Verdict::NonConflicting, "id × {}", r.name);
    }
}

#[test]
fn independent_contexts_are_joinable() {
    let s = solver();
    let rules = all_rules();
    for r1 in &rules {
        for r2 in &rules {
            let contexts = enumerate_overlaps(&r1.lhs, &r2.lhs).unwrap();
            let (kept, _) = filter_wellformed(contexts).unwrap();
            for ctx in kept
                .iter()
                .filter(|c| !cpa_filter(r1, r2, c).is_potential_conflict())
            {
                let t = check_direct_confluence(r1, r2, ctx, &s);
                assert!(
                    !t.verdict.is_conflict(),
                    "{} × {}: {:?}",
                    r1.name,
                    r2.name,
                    t.verdict
                );
            }
        }
    }
}

#[test]
fn deleting_rule_result_is_satisfiable_and_well_formed() {
    let s = solver();
    let host = fixtures::lock_excerpt();
    let r = fixtures::r_a();
    let m = find_rule_matches(&r, &host).unwrap().remove(0);
    let res = apply(&r, &m, &host, &s).unwrap();
    let out = res.applied().expect("applies");
    assert_eq!(out, &fixtures::fm_a());
    assert!(check_wellformed(out).unwrap().is_empty());
    assert_eq!(has_valid_configuration(out, &s).unwrap(), Answer::Yes);
}

#[test]
fn fixture_rules_are_admissible() {
    let s = solver();
    for r in all_rules() {
        assert_eq!(
            check_admissibility(&r, &s).verdict,
            Admissibility::Admissible,
            "{}",
            r.name
        );
    }
}

#[test]
fn contradictory_effect_is_inadmissible() {
    let mut doc: serde_json::Value = serde_json::from_str(fixtures::R_B).unwrap();
    doc["phi"] = serde_json::json!("(and (= |v_x'| v_x) (= |v_x'| (+ v_x 1.0)))");
    let r = parse_rule(&doc.to_string()).unwrap();
    let rep = check_admissibility(&r, &solver());
    assert_eq!(rep.verdict, Admissibility::Inadmissible);
    assert!(rep.phi_app.is_empty());
    assert_eq!(rep.phi_eff.len(), 2);
}

/// Assignment of the full lock model selecting exactly `selected`.
fn lock_assignment(selected: &[&str]) -> Assignment {
    let g = fixtures::lock_full();
    let mut a = Assignment::new();
    let groups = [
        ("t_auth", "MAN"),
        ("t_sec", "OPT"),
        ("t_dev", "OR"),
        ("t_tok", "OR"),
        ("t_know", "ALT"),
        ("t_bio", "OR"),
        ("t_low", "MAN"),
        ("t_high", "OPT"),
    ];
    for (t, lit) in groups {
        a.insert(VarId::from(t), Value::Enum(lit.into()));
    }
    for v in g.slot_vars() {
        if let Some(f) = v.as_str().strip_prefix("s_") {
            a.insert(v.clone(), Value::Bool(selected.contains(&f)));
        }
    }
    a
}

/// Fills the attribute values the formula defines.
fn with_levels(mut a: Assignment, low: i64) -> Assignment {
    let on =
        |a: &Assignment, f: &str| a[&VarId::from(format!("s_{f}").as_str())] == Value::Bool(true);
    let pick = |a: &Assignment, f: &str, v: i64| if on(a, f) { v } else { 0 };
    let token = pick(&a, "keycard", 10) + pick(&a, "transponder", 15);
    let knowledge = pick(&a, "pin", 5) + pick(&a, "password", 10);
    let biometric = pick(&a, "fingerprint", 20) + pick(&a, "iris", 30);
    let auth = pick(&a, "token", token)
        + pick(&a, "knowledge", knowledge)
        + pick(&a, "biometric", biometric);
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

#[test]
fn keycard_alone_cannot_carry_mission_security() {
    let s = solver();
    let g = fixtures::lock_full();
    let keycard = ["lock", "authmeth", "token", "keycard"];

    let with_msec: Vec<&str> = keycard.iter().copied().chain(["msec", "low"]).collect();
    for low in [0, 10, 20, 40] {
        let a = with_levels(lock_assignment(&with_msec), low);
        assert!(
            !check_configuration(&g, &a, Some(&s)).unwrap(),
            "low = {low}"
        );
    }
    let a = with_levels(lock_assignment(&keycard), 0);
    assert!(check_configuration(&g, &a, Some(&s)).unwrap());
}

#[test]
fn stronger_authentication_supports_mission_security() {
    let s = solver();
    let g = fixtures::lock_full();
    let sel = [
        "lock",
        "authmeth",
        "token",
        "keycard",
        "transponder",
        "msec",
        "low",
    ];
    let a = with_levels(lock_assignment(&sel), 20);
    assert!(check_configuration(&g, &a, Some(&s)).unwrap());
    assert_eq!(has_valid_configuration(&g, &s).unwrap(), Answer::Yes);

    let mut broken = g.clone();
    broken.set_formula(g.formula().conjoin(&Formula::Bool(false)));
    assert_eq!(has_valid_configuration(&broken, &s).unwrap(), Answer::No);
}

#[test]
fn valid_queries_are_never_unsatisfiable() {
    let s = solver();
    let r = fixtures::r_a();
    let rep = check_admissibility(&r, &s);
    let q = rep.query.unwrap();
    assert!(s.check_validity(&q).validity.is_valid());
    assert!(!matches!(s.check_sat(&q).result, SatResult::Unsat));
}
