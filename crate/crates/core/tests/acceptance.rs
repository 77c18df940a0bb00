//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! A criterion whose published expectation is contradicted by exact
//! computation prints FAIL with the reason; the corrected values are still
//! asserted, so any drift makes the run fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use ssm_core::experiments::{run_repro, run_sweep, SelfPolicy, SweepConfig, SweepKind, SweepReport};
use ssm_core::game::Profitability;
use ssm_core::Builtin;

enum Verdict {
    Pass(String),
    /// Known contradiction; corrected facts were asserted.
    Fail(String),
}

fn repro(case: &str) -> SweepReport {
    let r = run_repro(case).unwrap();
    assert!(r.passed(), "{}", r.render_text());
    r
}

/// Asserts a fact holds and returns its observed value.
fn fact(r: &SweepReport, id: &str) -> String {
    let f = r.fact(id).unwrap_or_else(|| panic!("{}: no fact `{id}`", r.case));
    assert!(f.passed, "{}/{id}: expected {}, observed {}", r.case, f.expected, f.observed);
    f.observed.clone()
}

fn sweep(kind: SweepKind, mech: Builtin, trials: usize) -> SweepReport {
    run_sweep(&SweepConfig::new(kind, mech, 3, trials, 1)).unwrap()
}

/// Asserts a sweep check ran at least once with no violations.
fn clean(r: &SweepReport, check: &str) -> u64 {
    let n = r.checks_of(check);
    assert!(n > 0, "{} {:?}: `{check}` never ran", r.case, r.mechanism);
    assert_eq!(r.violations_of(check), 0, "{}", r.render_text());
    n
}

struct Sweeps {
    sincere: Vec<SweepReport>,
    targets: SweepReport,
    woman_optimal: SweepReport,
    lottery: SweepReport,
}

fn sweeps() -> Sweeps {
    let mut sincere = Vec::new();
    for mech in [Builtin::GsMan, Builtin::GsWoman, Builtin::Uniform, Builtin::UniformEgal] {
        for policy in [SelfPolicy::AlwaysLast, SelfPolicy::Uniform] {
            let cfg = SweepConfig::new(SweepKind::SincereStability, mech, 3, 50, 1).with_policy(policy);
            sincere.push(run_sweep(&cfg).unwrap());
        }
    }
    let lottery = run_sweep(
        &SweepConfig::new(SweepKind::LotteryMarginals, Builtin::Uniform, 2, 40, 1)
            .with_profitability(Profitability::Guaranteed),
    )
    .unwrap();
    Sweeps {
        sincere,
        targets: sweep(SweepKind::StableTargets, Builtin::Uniform, 25),
        woman_optimal: sweep(SweepKind::WomanOptimal, Builtin::GsMan, 25),
        lottery,
    }
}

fn stable_sets() -> Verdict {
    let egal = repro("egalitarian-gap");
    fact(&egal, "stable-set-1");
    fact(&egal, "stable-set-2");
    fact(&repro("placement-costs"), "stable-set");
    let college = fact(&repro("college"), "stable-set");
    Verdict::Pass(format!("three matchings on both sincere profiles, two on the placement profile, college {college}"))
}

fn gs_trace() -> Verdict {
    let r = repro("egalitarian-gap");
    assert_eq!(fact(&r, "trace-length"), "7");
    assert_eq!(fact(&r, "trace-first"), "m1 -> w1: declines");
    Verdict::Pass(format!("seven proposals ending in {}", fact(&r, "trace-outcome")))
}

fn egalitarian_numbers() -> Verdict {
    let r = repro("placement-costs");
    for (id, v) in [("cost-mu1", "14"), ("cost-mu2", "14"), ("cost-mu3-deviation", "13")] {
        assert_eq!(fact(&r, id), v);
    }
    fact(&r, "lottery-sincere");
    let lottery = fact(&r, "lottery-deviation");
    let stable = fact(&r, "stable-set-deviation");
    let claimed = r.fact("lottery-deviation").unwrap().contradicts.clone().expect("recorded as erratum");
    assert!(lottery.contains("1/2"), "{lottery}");
    assert_eq!(stable.matches("m1:").count(), 3);
    Verdict::Fail(format!(
        "costs 14, 14, 13 and the sincere {{1/2, 1/2}} lottery match, but after w3's deviation the stable set is {stable} \
         with two matchings of cost 13, so uniform-egal returns {lottery}, not the stated {claimed}"
    ))
}

fn metric_numbers() -> Verdict {
    let t = repro("truncation");
    assert_eq!(fact(&t, "distance-truncated"), "2");
    assert_eq!(fact(&t, "distance-swapped"), "1");
    let r = repro("truncated-distance");
    assert_eq!(fact(&r, "k-1"), "4");
    assert_eq!(fact(&r, "k-2"), "3");
    for (p, a, b) in [("0", "4", "3"), ("1/4", "17/4", "15/4"), ("1/2", "9/2", "9/2"), ("1", "5", "6")] {
        assert_eq!(fact(&r, &format!("kp-1-{p}")), a, "4+p at p={p}");
        assert_eq!(fact(&r, &format!("kp-2-{p}")), b, "3+3p at p={p}");
    }
    Verdict::Pass("distances 2 and 1; K = 4, 3; K^(p) = 4+p, 3+3p at p in {0, 1/4, 1/2, 1}".into())
}

fn sincere_stability(s: &Sweeps) -> Verdict {
    let mut found = 0;
    for r in &s.sincere {
        assert_eq!(r.instances, 50);
        let supported = matches!(r.mechanism.as_deref(), Some("uniform" | "gs-man"));
        if supported {
            clean(r, "search-invariants");
            clean(r, "search-certified");
        }
        assert_eq!(r.violations_of("sincerely-stable-outcome"), 0, "{}", r.render_text());
        found += r.checks_of("sincerely-stable-outcome");
        assert!(r.passed(), "{}", r.render_text());
    }
    assert!(found > 0);
    Verdict::Pass(format!(
        "{found} equilibria over 4 mechanisms x 2 self-position policies x 50 instances, 0 violations"
    ))
}

fn stable_targets(s: &Sweeps) -> Verdict {
    let r = &s.targets;
    assert_eq!(r.instances, 25);
    let n = clean(r, "certified");
    for check in ["iteration-bound", "search-invariants", "outcome-is-target"] {
        assert_eq!(clean(r, check), n);
    }
    assert!(r.passed(), "{}", r.render_text());
    Verdict::Pass(format!("{n} sincerely stable targets on 25 instances certified; iteration bound held"))
}

fn woman_optimal(s: &Sweeps) -> Verdict {
    let r = &s.woman_optimal;
    assert_eq!(clean(r, "search-succeeds"), 25);
    clean(r, "certified");
    clean(r, "outcome-is-target");
    let n = clean(r, "woman-optimal-outcome");
    assert!(r.passed(), "{}", r.render_text());
    Verdict::Pass(format!("search succeeded on 25/25; {n} enumerated equilibria all give the woman-optimal matching"))
}

fn no_equilibrium() -> Verdict {
    let r = repro("no-equilibrium");
    fact(&r, "stable-set");
    for side in ["a", "b"] {
        fact(&r, &format!("swap-{side}"));
        fact(&r, &format!("swap-outcome-{side}"));
        fact(&r, &format!("not-local-{side}"));
    }
    assert_eq!(fact(&r, "no-equilibrium"), "0");
    Verdict::Pass("m1's swap keeps the outcome for both candidate lists; pruned enumeration finds 0 equilibria".into())
}

fn partial_honesty() -> Verdict {
    let r = repro("partial-honesty");
    fact(&r, "nash");
    fact(&r, "partial");
    fact(&r, "unstable");
    Verdict::Pass(format!("Nash and partially honest, outcome blocked by {}", fact(&r, "blocking-pair")))
}

fn college() -> Verdict {
    let r = repro("college");
    assert_eq!(fact(&r, "c1-prefers"), "StrictlyPrefers");
    for m in ["student-da", "college-da", "uniform"] {
        fact(&r, &format!("{m}-profitable"));
        fact(&r, &format!("{m}-not-nash"));
    }
    Verdict::Pass(
        "c1's deviation is strictly preferred and breaks Nash under student-da, college-da and uniform".into(),
    )
}

fn placement() -> Verdict {
    let r = repro("placement-unstable");
    fact(&r, "nash");
    fact(&r, "mindis");
    fact(&r, "blocking-mu3");
    let outcome = fact(&r, "outcome");
    let claimed = r.fact("outcome").unwrap().contradicts.clone().expect("recorded as erratum");
    assert!(outcome.contains("1/2"), "{outcome}");
    Verdict::Fail(format!(
        "the profile is a minimally dishonest equilibrium and {{m2, w3}} blocks the stated matching, \
         but the outcome is the lottery {outcome}, not {claimed}"
    ))
}

fn structural(s: &Sweeps) -> Verdict {
    let mut total = 0;
    let all = s.sincere.iter().chain([&s.targets, &s.woman_optimal]);
    for r in all.clone() {
        for check in ["rural-hospital", "lattice-extremes", "deterministic-outcome", "unique-putative-stable"] {
            total += clean(r, check);
        }
        for check in ["sincere-prefix", "chain-mindis-local", "chain-mindis-partial"] {
            assert_eq!(r.violations_of(check), 0, "{}", r.render_text());
            total += r.checks_of(check);
        }
    }
    assert!(all.map(|r| r.checks_of("chain-mindis-partial")).sum::<u64>() > 0);
    let l = &s.lottery;
    total += clean(l, "nash-deterministic") + clean(l, "equilibrium-deterministic");
    assert!(l.passed(), "{}", l.render_text());
    Verdict::Pass(format!(
        "{total} checks, 0 violations (0/1 marginals checked under guaranteed profitability on every 2x2 Nash profile)"
    ))
}

fn coalitions(s: &Sweeps) -> Verdict {
    let mut n = 0;
    for r in [&s.targets, &s.woman_optimal] {
        n += clean(r, "coalition-proof");
    }
    let deviations: u64 = [&s.targets, &s.woman_optimal].iter().map(|r| r.info["coalition-deviations-checked"]).sum();
    Verdict::Pass(format!("{n} equilibria, {deviations} joint deviations of size <= 2, none improving"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let sweeps = catch_unwind(sweeps);
    let sweeps = &sweeps;
    let with = |f: fn(&Sweeps) -> Verdict| -> Box<dyn Fn() -> Verdict + '_> {
        Box::new(move || f(sweeps.as_ref().unwrap_or_else(|_| panic!("sweeps failed"))))
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("stable-set fixtures", Box::new(stable_sets)),
        ("deferred acceptance trace", Box::new(gs_trace)),
        ("egalitarian costs and lotteries", Box::new(egalitarian_numbers)),
        ("distance values", Box::new(metric_numbers)),
        ("equilibria are sincerely stable", with(sincere_stability)),
        ("every stable matching is an equilibrium outcome", with(stable_targets)),
        ("gs-man equilibria give the woman-optimal matching", with(woman_optimal)),
        ("instance without locally minimally dishonest equilibria", Box::new(no_equilibrium)),
        ("partial honesty without sincere stability", Box::new(partial_honesty)),
        ("college admissions is not strategy-proof for colleges", Box::new(college)),
        ("student placement equilibrium can be unstable", Box::new(placement)),
        ("structural invariants", with(structural)),
        ("no improving coalitions", with(coalitions)),
    ];
    let (mut pass, mut known, mut broken) = (0, 0, 0);
    for (i, (title, run)) in criteria.iter().enumerate() {
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(Verdict::Pass(d)) => {
                pass += 1;
                println!("PASS {:>2}. {title}: {d}", i + 1);
            }
            Ok(Verdict::Fail(d)) => {
                known += 1;
                println!("FAIL {:>2}. {title}: {d}", i + 1);
            }
            Err(_) => {
                broken += 1;
                println!("FAIL {:>2}. {title}: assertion failed (see panic above)", i + 1);
            }
        }
    }
    println!(
        "\nacceptance: {pass} passed, {known} failed against corrected facts, {broken} broken ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
    if broken == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
