//! Random instances, scripted fixture reproductions and seeded sweeps.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use std::collections::BTreeMap;
use std::time::Instant;

use num_rational::Rational64;

use crate::college::{
    college_da, college_nash_violation, college_profitable, enumerate_college_stable, placement_game,
    responsive_prefers, Assignment, CollegeInstance, CollegeMechanism, SetComparison,
};
use crate::error::{Error, Result};
use crate::fixtures::{load, load_college};
use crate::format::serialize_profile;
use crate::game::{
    check, check_strong, honesty_swaps, local_violation, support_sincerely_stable, EquilibriumReport, GameConfig,
    Notion, Profitability,
};
use crate::honesty::{hausdorff_kt, kendall_tau, kendall_tau_penalty, HonestyMode, TruncatedList};
use crate::mechanisms::{
    egalitarian_cost, enumerate_stable, gale_shapley, gale_shapley_traced, Builtin, MatchDistribution, Mechanism,
    Proposing,
};
use crate::model::{
    blocking_pairs, AgentId, Entry, Matching, PreferenceList, Profile, Side, DEFAULT_MAX_SIDE, MAX_SIDE,
};
use crate::search::{enumerate_equilibria, equilibrium_find, iteration_bound, passes, Equilibrium, Prune};

/// Where the sentinel lands in generated lists.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfPolicy {
    /// Uniform over all positions.
    Uniform,
    /// Everyone acceptable.
    AlwaysLast,
    /// Each list is complete with probability 1/2, otherwise uniform.
    Mixed,
}

impl std::str::FromStr for SelfPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SelfPolicy::Uniform),
            "always-last" => Ok(SelfPolicy::AlwaysLast),
            "mixed" => Ok(SelfPolicy::Mixed),
            _ => {
                Err(Error::Precondition(format!("unknown self policy `{s}` (expected uniform, always-last or mixed)")))
            }
        }
    }
}

fn random_list(rng: &mut ChaCha8Rng, k: usize, policy: SelfPolicy) -> PreferenceList {
    let mut agents: Vec<Entry> = (0..k).map(Entry::Agent).collect();
    agents.shuffle(rng);
    let pos = match policy {
        SelfPolicy::Uniform => rng.gen_range(0..=k),
        SelfPolicy::AlwaysLast => k,
        SelfPolicy::Mixed => {
            if rng.gen_bool(0.5) {
                k
            } else {
                rng.gen_range(0..=k)
            }
        }
    };
    agents.insert(pos, Entry::Single);
    PreferenceList::new(&agents).expect("permutation of the universe")
}

/// Uniformly random strict lists for every agent.
pub fn random_instance(n_men: usize, n_women: usize, seed: u64, policy: SelfPolicy) -> Result<Profile> {
    let size = n_men.max(n_women);
    if size > MAX_SIDE || n_men == 0 || n_women == 0 {
        return Err(Error::SizeBound { size, max: MAX_SIDE });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let men = (0..n_men).map(|_| random_list(&mut rng, n_women, policy)).collect();
    let women = (0..n_women).map(|_| random_list(&mut rng, n_men, policy)).collect();
    Profile::canonical(men, women)
}

/// What a reported fact rests on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Stated in the source text of the instance.
    SourceText,
    /// Computed by an independent oracle and frozen.
    Oracle,
    /// Immediate from a definition.
    Definition,
}

/// One scripted expectation and what was observed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fact {
    pub id: String,
    pub claim: String,
    pub basis: Basis,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
    /// What the source text states, when the oracle disagrees with it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contradicts: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepWitness {
    pub check: String,
    pub instance: u64,
    pub detail: String,
}

/// Report of a fixture reproduction or a seeded sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub schema: u32,
    pub kind: String,
    pub case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profitability: Option<Profitability>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<SelfPolicy>,
    pub instances: u64,
    pub equilibria: u64,
    /// How often each check ran.
    pub checks: BTreeMap<String, u64>,
    /// Failures of each check; every key of `checks` appears here.
    pub violations: BTreeMap<String, u64>,
    /// Counts that are reported but are not failures.
    pub info: BTreeMap<String, u64>,
    pub witnesses: Vec<SweepWitness>,
    pub facts: Vec<Fact>,
    pub wall_time_ms: u64,
}

/// Witnesses kept per check.
pub const MAX_WITNESSES: usize = 5;

impl SweepReport {
    fn new(kind: &str, case: &str) -> Self {
        SweepReport {
            schema: 1,
            kind: kind.to_string(),
            case: case.to_string(),
            mechanism: None,
            n: None,
            trials: None,
            seed: None,
            profitability: None,
            policy: None,
            instances: 0,
            equilibria: 0,
            checks: BTreeMap::new(),
            violations: BTreeMap::new(),
            info: BTreeMap::new(),
            witnesses: Vec::new(),
            facts: Vec::new(),
            wall_time_ms: 0,
        }
    }

    /// Counts one run of `check`; a failure records a witness.
    pub fn record(&mut self, check: &str, ok: bool, instance: u64, detail: impl FnOnce() -> String) {
        *self.checks.entry(check.to_string()).or_default() += 1;
        let v = self.violations.entry(check.to_string()).or_default();
        if !ok {
            *v += 1;
            if self.witnesses.iter().filter(|w| w.check == check).count() < MAX_WITNESSES {
                self.witnesses.push(SweepWitness { check: check.to_string(), instance, detail: detail() });
            }
        }
    }

    pub fn count(&mut self, key: &str, by: u64) {
        *self.info.entry(key.to_string()).or_default() += by;
    }

    pub fn total_violations(&self) -> u64 {
        self.violations.values().sum()
    }

    pub fn violations_of(&self, check: &str) -> u64 {
        self.violations.get(check).copied().unwrap_or(0)
    }

    pub fn checks_of(&self, check: &str) -> u64 {
        self.checks.get(check).copied().unwrap_or(0)
    }

    pub fn fact(&self, id: &str) -> Option<&Fact> {
        self.facts.iter().find(|f| f.id == id)
    }

    pub fn passed(&self) -> bool {
        self.total_violations() == 0 && self.facts.iter().all(|f| f.passed)
    }

    /// Facts whose verified value differs from the source text.
    pub fn errata(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter().filter(|f| f.contradicts.is_some())
    }

    /// Plain-text rendering of the JSON report.
    pub fn render_text(&self) -> String {
        let json = serde_json::to_value(self).expect("serializable report");
        let mut out = format!("{} {}: {}\n", self.kind, self.case, if self.passed() { "PASS" } else { "FAIL" });
        for f in &self.facts {
            out.push_str(&format!(
                "  [{}] {} ({}): expected {}, observed {}\n",
                if f.passed { "ok" } else { "FAIL" },
                f.id,
                json_str(&serde_json::to_value(f.basis).expect("basis")),
                f.expected,
                f.observed
            ));
            if let Some(c) = &f.contradicts {
                out.push_str(&format!("       source text states: {c}\n"));
            }
            if let Some(n) = &f.note {
                out.push_str(&format!("       note: {n}\n"));
            }
        }
        if let Some(checks) = json.get("checks").and_then(|c| c.as_object()) {
            for (k, v) in checks {
                out.push_str(&format!("  {k}: {} checks, {} violations\n", v, self.violations_of(k)));
            }
        }
        for (k, v) in &self.info {
            out.push_str(&format!("  {k}: {v}\n"));
        }
        for w in &self.witnesses {
            out.push_str(&format!("  witness {} (instance {}): {}\n", w.check, w.instance, w.detail));
        }
        out
    }
}

fn json_str(v: &serde_json::Value) -> String {
    v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())
}

#[derive(Default)]
struct Facts(Vec<Fact>);

impl Facts {
    fn eq(
        &mut self,
        id: &str,
        claim: &str,
        basis: Basis,
        expected: impl ToString,
        observed: impl ToString,
    ) -> &mut Fact {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        let passed = expected == observed;
        self.0.push(Fact {
            id: id.into(),
            claim: claim.into(),
            basis,
            expected,
            observed,
            passed,
            contradicts: None,
            note: None,
        });
        self.0.last_mut().expect("just pushed")
    }

    fn holds(&mut self, id: &str, claim: &str, basis: Basis, observed: bool) -> &mut Fact {
        self.eq(id, claim, basis, true, observed)
    }
}

impl Fact {
    fn note(&mut self, text: &str) -> &mut Self {
        self.note = Some(text.to_string());
        self
    }

    /// Marks the fact as correcting a statement of the source text.
    fn contradicts(&mut self, text_value: impl ToString) -> &mut Self {
        self.contradicts = Some(text_value.to_string());
        self
    }
}

/// A scripted reproduction over bundled fixtures.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureCase {
    pub id: &'static str,
    pub description: &'static str,
    pub fixtures: &'static [&'static str],
}

pub const CASES: [FixtureCase; 8] = [
    FixtureCase {
        id: "egalitarian-gap",
        description: "minimally dishonest play can settle on a non-egalitarian stable matching",
        fixtures: &["egal_sincere1", "egal_putative1", "egal_sincere2", "egal_putative2"],
    },
    FixtureCase {
        id: "no-equilibrium",
        description: "a uniform egalitarian lottery with no locally minimally dishonest equilibrium",
        fixtures: &["no_eq_sincere", "no_eq_putative_a", "no_eq_putative_b"],
    },
    FixtureCase {
        id: "placement-costs",
        description: "egalitarian costs before and after a strategic woman's deviation",
        fixtures: &["placement_sincere", "placement_deviation"],
    },
    FixtureCase {
        id: "placement-unstable",
        description: "with truthful men the egalitarian lottery can select a sincerely unstable matching",
        fixtures: &["placement_sincere", "placement_deviation"],
    },
    FixtureCase {
        id: "partial-honesty",
        description: "a partially honest Nash equilibrium with a sincerely unstable outcome",
        fixtures: &["partial_sincere", "partial_putative"],
    },
    FixtureCase {
        id: "truncation",
        description: "minimal truncation and minimal dishonesty pick different best responses",
        fixtures: &["truncation_sincere", "truncation_truncated", "truncation_swapped"],
    },
    FixtureCase {
        id: "truncated-distance",
        description: "truncated-list honesty with a penalty changes the most honest best response",
        fixtures: &["penalty_sincere", "penalty_putative1", "penalty_putative2"],
    },
    FixtureCase {
        id: "college",
        description: "with quotas, the sincere profile is not an equilibrium for any stable mechanism",
        fixtures: &["college_sincere", "college_deviation"],
    },
];

fn pairs(n: usize, ps: &[(usize, usize)]) -> Matching {
    Matching::from_pairs(n, n, ps).expect("valid fixture matching")
}

fn set_text(profile: &Profile, ms: &[Matching]) -> String {
    let mut v: Vec<String> = ms.iter().map(|m| m.render(profile.instance())).collect();
    v.sort();
    format!("[{}]", v.join(", "))
}

fn dist_text(profile: &Profile, d: &MatchDistribution) -> String {
    let mut v: Vec<String> =
        d.support().iter().map(|(m, p)| format!("{}: {p}", m.render(profile.instance()))).collect();
    v.sort();
    format!("[{}]", v.join(", "))
}

/// Runs the scripted checks of a bundled case.
pub fn run_repro(case_id: &str) -> Result<SweepReport> {
    let start = Instant::now();
    let mut facts = Facts::default();
    match case_id {
        "egalitarian-gap" => repro_egalitarian_gap(&mut facts)?,
        "no-equilibrium" => repro_no_equilibrium(&mut facts)?,
        "placement-costs" => repro_placement_costs(&mut facts)?,
        "placement-unstable" => repro_placement_unstable(&mut facts)?,
        "partial-honesty" => repro_partial_honesty(&mut facts)?,
        "truncation" => repro_truncation(&mut facts)?,
        "truncated-distance" => repro_truncated_distance(&mut facts)?,
        "college" => repro_college(&mut facts)?,
        _ => return Err(Error::UnknownCase(case_id.to_string())),
    }
    let mut r = SweepReport::new("repro", case_id);
    r.instances = 1;
    r.facts = facts.0;
    r.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

fn repro_egalitarian_gap(f: &mut Facts) -> Result<()> {
    let s1 = load("egal_sincere1")?;
    let p1 = load("egal_putative1")?;
    let s2 = load("egal_sincere2")?;
    let p2 = load("egal_putative2")?;
    let mu1 = pairs(4, &[(0, 0), (1, 1), (2, 2), (3, 3)]);
    let mu2 = pairs(4, &[(0, 1), (1, 2), (2, 0), (3, 3)]);
    let mu3 = pairs(4, &[(0, 2), (1, 0), (2, 1), (3, 3)]);
    let table = [mu1.clone(), mu2.clone(), mu3.clone()];
    for (id, s) in [("stable-set-1", &s1), ("stable-set-2", &s2)] {
        f.eq(
            id,
            "the three tabulated matchings are exactly the stable set",
            Basis::SourceText,
            set_text(s, &table),
            set_text(s, &enumerate_stable(s)),
        );
    }
    let costs = |p: &Profile| table.iter().map(|m| egalitarian_cost(p, m)).collect::<Vec<_>>();
    let c1 = costs(&s1);
    f.holds(
        "unique-egalitarian-1",
        "mu2 is the only egalitarian matching for the first sincere profile",
        Basis::SourceText,
        c1[1] < c1[0] && c1[1] < c1[2],
    )
    .observed = format!("costs {c1:?}");
    f.0.last_mut().expect("fact").passed = c1[1] < c1[0] && c1[1] < c1[2];
    let c2 = costs(&s2);
    let ok = c2[0] == c2[2] && c2[0] < c2[1];
    let fact = f.holds(
        "egalitarian-2",
        "mu1 and mu3 are the egalitarian matchings for the second sincere profile",
        Basis::SourceText,
        ok,
    );
    fact.observed = format!("costs {c2:?}");
    fact.passed = ok;
    let (outcome, trace) = gale_shapley_traced(&p1, Proposing::Men);
    f.eq(
        "trace-outcome",
        "men-proposing deferred acceptance on the updated putative lists ends at mu2",
        Basis::SourceText,
        mu2.render(p1.instance()),
        outcome.render(p1.instance()),
    );
    f.eq("trace-length", "the run makes seven proposals", Basis::SourceText, 7, trace.len());
    let first = trace.first().map(|t| {
        format!(
            "m{} -> w{}: {}",
            t.proposer.index + 1,
            t.receiver.index + 1,
            if t.accepted { "accepts" } else { "declines" }
        )
    });
    f.eq(
        "trace-first",
        "m1 proposes to w1 and is declined",
        Basis::SourceText,
        "m1 -> w1: declines",
        first.unwrap_or_default(),
    );
    f.eq(
        "putative-stable",
        "mu2 is the only matching stable for the equilibrium profile",
        Basis::SourceText,
        set_text(&p2, std::slice::from_ref(&mu2)),
        set_text(&p2, &enumerate_stable(&p2)),
    );
    let cfg = GameConfig::new(Builtin::UniformEgal);
    let r = check(&cfg, &s2, &p2, &[Notion::Nash, Notion::MinDis, Notion::LocalMinDis])?;
    f.holds(
        "nash",
        "the equilibrium profile is a Nash equilibrium under uniform-egal",
        Basis::SourceText,
        r.holds(Notion::Nash),
    );
    let closer = "m1 and w1 each have a list one swap closer to sincere that keeps mu2 (for m1: w1 w4 w2 @ w3)";
    f.eq(
        "mindis",
        "m1 and w1 are not minimally dishonest under uniform-egal",
        Basis::Oracle,
        false,
        r.holds(Notion::MinDis),
    )
    .contradicts("every agent is minimally dishonest")
    .note(closer);
    f.eq(
        "localmindis",
        "m1 and w1 are not locally minimally dishonest under uniform-egal",
        Basis::Oracle,
        false,
        r.holds(Notion::LocalMinDis),
    )
    .contradicts("every agent is locally minimally dishonest")
    .note(closer);
    let e = load("egal_equilibrium2")?;
    let re = check(&cfg, &s2, &e, &[Notion::Nash, Notion::MinDis, Notion::LocalMinDis])?;
    f.eq(
        "derived-outcome",
        "the search-derived profile selects mu2",
        Basis::Oracle,
        dist_text(&e, &MatchDistribution::deterministic(mu2.clone())),
        dist_text(&e, &cfg.evaluate(&e)),
    );
    f.holds("derived-equilibrium", "the search-derived profile is a Nash, minimally and locally minimally dishonest equilibrium under uniform-egal", Basis::Oracle, re.holds(Notion::Nash) && re.holds(Notion::MinDis) && re.holds(Notion::LocalMinDis));
    let m1 = AgentId::man(0);
    let honest = cfg.evaluate(&p2.with_list(m1, *s2.list(m1)));
    f.holds(
        "honest-m1-risks-mu3",
        "if m1 reports sincerely, mu3 enters the support",
        Basis::SourceText,
        honest.probability_of(&mu3) > Rational64::from_integer(0),
    )
    .observed = dist_text(&p2, &honest);
    let ok = honest.probability_of(&mu3) > Rational64::from_integer(0);
    f.0.last_mut().expect("fact").passed = ok;
    f.holds(
        "not-egalitarian",
        "the equilibrium outcome mu2 is not egalitarian for the second sincere profile",
        Basis::SourceText,
        c2[1] > c2[0],
    );
    Ok(())
}

fn repro_no_equilibrium(f: &mut Facts) -> Result<()> {
    let s = load("no_eq_sincere")?;
    let mu1 = pairs(3, &[(0, 0), (1, 1), (2, 2)]);
    let mu2 = pairs(3, &[(0, 1), (1, 2), (2, 0)]);
    f.eq(
        "stable-set",
        "mu1 and mu2 are the stable matchings",
        Basis::SourceText,
        set_text(&s, &[mu1.clone(), mu2.clone()]),
        set_text(&s, &enumerate_stable(&s)),
    );
    let cfg = GameConfig::new(Builtin::UniformEgal);
    let m1 = AgentId::man(0);
    let target = PreferenceList::from_indices(&[0, 2, 1, 3])?;
    for (tag, name) in [("a", "no_eq_putative_a"), ("b", "no_eq_putative_b")] {
        let p = load(name)?;
        let current = cfg.evaluate(&p);
        f.eq(
            &format!("outcome-{tag}"),
            "the candidate profile selects mu1",
            Basis::Oracle,
            dist_text(&p, &MatchDistribution::deterministic(mu1.clone())),
            dist_text(&p, &current),
        );
        let swaps = honesty_swaps(&cfg, s.list(m1), p.list(m1));
        f.holds(
            &format!("swap-{tag}"),
            "one more-honest swap turns m1's list into (w1, w3, w2, @)",
            Basis::SourceText,
            swaps.contains(&target),
        );
        let q = p.with_list(m1, target);
        f.eq(
            &format!("swap-stable-{tag}"),
            "after the swap only mu1 and mu2 are stable",
            Basis::SourceText,
            set_text(&s, &[mu1.clone(), mu2.clone()]),
            set_text(&s, &enumerate_stable(&q)),
        );
        f.eq(
            &format!("swap-outcome-{tag}"),
            "after the swap the mechanism still selects mu1",
            Basis::SourceText,
            dist_text(&s, &MatchDistribution::deterministic(mu1.clone())),
            dist_text(&s, &cfg.evaluate(&q)),
        );
        let v = local_violation(&cfg, &s, &p, &current, m1)?;
        f.holds(&format!("not-local-{tag}"), "m1 is not locally minimally dishonest", Basis::SourceText, v.is_some());
    }
    let e = enumerate_equilibria(&cfg, &s, &[Notion::Nash, Notion::LocalMinDis], Prune::Prefix)?;
    f.eq(
        "no-equilibrium",
        "pruned enumeration finds no locally minimally dishonest equilibrium",
        Basis::SourceText,
        0,
        e.equilibria.len(),
    );
    Ok(())
}

fn placement_matchings() -> [Matching; 3] {
    [
        pairs(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]),
        pairs(4, &[(0, 1), (1, 0), (2, 2), (3, 3)]),
        pairs(4, &[(0, 0), (1, 1), (2, 2), (3, 3)]),
    ]
}

const TIE_NOTE: &str = "mu2 also stays stable after w3's deviation and its egalitarian cost drops to 13 (w3 now ranks m3 first), tying mu3; no list for w3 blocks mu2 without also blocking mu3";

fn repro_placement_costs(f: &mut Facts) -> Result<()> {
    let s = load("placement_sincere")?;
    let d = load("placement_deviation")?;
    let [mu1, mu2, mu3] = placement_matchings();
    f.eq(
        "stable-set",
        "mu1 and mu2 are the sincere stable matchings",
        Basis::SourceText,
        set_text(&s, &[mu1.clone(), mu2.clone()]),
        set_text(&s, &enumerate_stable(&s)),
    );
    f.eq("cost-mu1", "mu1 costs 14", Basis::SourceText, 14, egalitarian_cost(&s, &mu1));
    f.eq("cost-mu2", "mu2 costs 14", Basis::SourceText, 14, egalitarian_cost(&s, &mu2));
    let half = Rational64::new(1, 2);
    let honest = MatchDistribution::from_weights(vec![(mu1.clone(), half), (mu2.clone(), half)])?;
    f.eq(
        "lottery-sincere",
        "uniform-egal picks mu1 or mu2 with probability 1/2 each",
        Basis::SourceText,
        dist_text(&s, &honest),
        dist_text(&s, &Builtin::UniformEgal.evaluate(&s)),
    );
    f.eq(
        "cost-mu1-deviation",
        "after w3's deviation mu1 still costs 14",
        Basis::SourceText,
        14,
        egalitarian_cost(&d, &mu1),
    );
    f.eq("cost-mu3-deviation", "after w3's deviation mu3 costs 13", Basis::SourceText, 13, egalitarian_cost(&d, &mu3));
    f.eq(
        "stable-set-deviation",
        "after w3's deviation mu1, mu2 and mu3 are stable",
        Basis::Oracle,
        set_text(&d, &[mu1.clone(), mu2.clone(), mu3.clone()]),
        set_text(&d, &enumerate_stable(&d)),
    )
    .contradicts(set_text(&d, &[mu1.clone(), mu3.clone()]))
    .note(TIE_NOTE);
    f.eq("cost-mu2-deviation", "after w3's deviation mu2 costs 13", Basis::Oracle, 13, egalitarian_cost(&d, &mu2));
    let tie = MatchDistribution::from_weights(vec![(mu2.clone(), half), (mu3.clone(), half)])?;
    f.eq(
        "lottery-deviation",
        "after w3's deviation uniform-egal picks mu2 or mu3 with probability 1/2 each",
        Basis::Oracle,
        dist_text(&d, &tie),
        dist_text(&d, &Builtin::UniformEgal.evaluate(&d)),
    )
    .contradicts(dist_text(&d, &MatchDistribution::deterministic(mu3.clone())))
    .note(TIE_NOTE);
    f.eq(
        "blocking-mu3",
        "{m2, w3} blocks mu3 for the sincere lists",
        Basis::SourceText,
        "[(1, 2)]",
        format!("{:?}", blocking_pairs(&s, &mu3)),
    );
    Ok(())
}

/// The placement equilibrium check: men tell the truth, women are
/// strategic, uniform-egal selects.
pub fn placement_report(profitability: Profitability) -> Result<EquilibriumReport> {
    let s = load("placement_sincere")?;
    let d = load("placement_deviation")?;
    let cfg = GameConfig::new(Builtin::UniformEgal)
        .with_profitability(profitability)
        .with_truth_tellers((0..s.n_men()).map(AgentId::man));
    placement_game(&cfg, &s, &d, &[Notion::Nash, Notion::MinDis, Notion::LocalMinDis])
}

fn repro_placement_unstable(f: &mut Facts) -> Result<()> {
    let s = load("placement_sincere")?;
    let d = load("placement_deviation")?;
    let [_, mu2, mu3] = placement_matchings();
    let r = placement_report(Profitability::Optimistic)?;
    f.holds("nash", "no strategic woman can profit by deviating", Basis::SourceText, r.holds(Notion::Nash));
    f.holds("mindis", "every strategic woman is minimally dishonest", Basis::SourceText, r.holds(Notion::MinDis));
    f.eq(
        "w3-distance",
        "w3's list is one swap from sincere",
        Basis::SourceText,
        "1",
        r.agent("w3").map(|a| a.distance.clone()).unwrap_or_default(),
    );
    f.eq(
        "w3-partner",
        "w3 is matched to m3 with certainty",
        Basis::SourceText,
        "[\"m3\"]",
        format!("{:?}", r.agent("w3").map(|a| a.partners.clone()).unwrap_or_default()),
    );
    let out = Builtin::UniformEgal.evaluate(&d);
    let half = Rational64::new(1, 2);
    f.eq(
        "outcome",
        "the outcome is mu2 or mu3 with probability 1/2 each",
        Basis::Oracle,
        dist_text(&d, &MatchDistribution::from_weights(vec![(mu2, half), (mu3.clone(), half)])?),
        dist_text(&d, &out),
    )
    .contradicts(dist_text(&d, &MatchDistribution::deterministic(mu3.clone())))
    .note(TIE_NOTE);
    f.holds("unstable", "the outcome is not sincerely stable", Basis::SourceText, !r.sincerely_stable);
    f.eq(
        "blocking-mu3",
        "{m2, w3} blocks mu3 for the sincere lists",
        Basis::SourceText,
        "[(1, 2)]",
        format!("{:?}", blocking_pairs(&s, &mu3)),
    );
    Ok(())
}

fn repro_partial_honesty(f: &mut Facts) -> Result<()> {
    let s = load("partial_sincere")?;
    let p = load("partial_putative")?;
    let mu1 = Matching::from_pairs(4, 4, &[(0, 0), (2, 3), (3, 2)])?;
    let mu2 = pairs(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]);
    f.eq(
        "sincere-stable",
        "mu1 is the only sincerely stable matching",
        Basis::SourceText,
        set_text(&s, &[mu1]),
        set_text(&s, &enumerate_stable(&s)),
    );
    f.eq(
        "putative-stable",
        "mu2 is the only matching stable for the submitted lists",
        Basis::SourceText,
        set_text(&p, std::slice::from_ref(&mu2)),
        set_text(&p, &enumerate_stable(&p)),
    );
    let cfg = GameConfig::new(Builtin::Uniform);
    let r = check(&cfg, &s, &p, &[Notion::Nash, Notion::Partial])?;
    f.holds("nash", "the submitted profile is a Nash equilibrium", Basis::SourceText, r.holds(Notion::Nash));
    f.holds("partial", "every agent is partially honest", Basis::SourceText, r.holds(Notion::Partial));
    f.holds("unstable", "mu2 is not sincerely stable", Basis::SourceText, !r.sincerely_stable);
    let blocks: Vec<String> =
        blocking_pairs(&s, &mu2).iter().map(|(m, w)| format!("{{m{}, w{}}}", m + 1, w + 1)).collect();
    f.holds("blocking-pair", "a sincere blocking pair of mu2 is reported", Basis::Oracle, !blocks.is_empty())
        .observed = blocks.join(" ");
    f.0.last_mut().expect("fact").passed = !blocks.is_empty();
    let m1 = AgentId::man(0);
    let honest = cfg.evaluate(&p.with_list(m1, *s.list(m1)));
    let mu3_m1 = honest.partners(m1).contains(&Entry::Agent(2));
    f.eq(
        "m1-honest-support",
        "if m1 reports sincerely two matchings are stable",
        Basis::SourceText,
        2,
        honest.support().len(),
    );
    f.holds("m1-honest-worse", "one of them gives m1 w3, worse than w2", Basis::SourceText, mu3_m1);
    Ok(())
}

fn sure_partner(d: &MatchDistribution, agent: AgentId) -> String {
    d.sure_partner(agent).map(|e| e.label(agent.side)).unwrap_or_else(|| "uncertain".to_string())
}

fn repro_truncation(f: &mut Facts) -> Result<()> {
    let s = load("truncation_sincere")?;
    let t = load("truncation_truncated")?;
    let w = load("truncation_swapped")?;
    let w1 = AgentId::woman(0);
    let mu1 = pairs(3, &[(0, 1), (1, 0), (2, 2)]);
    let mu2 = pairs(3, &[(0, 0), (1, 1), (2, 2)]);
    f.eq(
        "stable-set",
        "mu1 and mu2 are the stable matchings",
        Basis::SourceText,
        set_text(&s, &[mu1.clone(), mu2]),
        set_text(&s, &enumerate_stable(&s)),
    );
    let cfg = GameConfig::new(Builtin::GsMan);
    f.eq(
        "honest-outcome",
        "deferred acceptance selects the man-optimal mu1",
        Basis::SourceText,
        dist_text(&s, &MatchDistribution::deterministic(mu1)),
        dist_text(&s, &cfg.evaluate(&s)),
    );
    f.eq(
        "distance-truncated",
        "the truncated list is at distance 2",
        Basis::SourceText,
        2,
        kendall_tau(s.list(w1), t.list(w1))?,
    );
    f.eq(
        "distance-swapped",
        "the swapped list is at distance 1",
        Basis::SourceText,
        1,
        kendall_tau(s.list(w1), w.list(w1))?,
    );
    f.eq("truncated-partner", "truncating gives w1 m1", Basis::SourceText, "m1", sure_partner(&cfg.evaluate(&t), w1));
    f.eq(
        "swapped-partner",
        "swapping gives w1 her woman-optimal partner m1",
        Basis::Oracle,
        "m1",
        sure_partner(&cfg.evaluate(&w), w1),
    )
    .contradicts("m2")
    .note("m2 is w1's partner under truthful reporting, not after the swap");
    let rt = check(&cfg, &s, &t, &[Notion::Nash, Notion::Trunc, Notion::MinDis])?;
    f.holds("truncated-nash", "the truncated profile is a Nash equilibrium", Basis::SourceText, rt.holds(Notion::Nash));
    f.holds(
        "truncated-minimal",
        "the truncated profile is a minimally truncated equilibrium",
        Basis::SourceText,
        rt.holds(Notion::Trunc),
    );
    f.holds(
        "truncated-not-mindis",
        "the truncated profile is not minimally dishonest",
        Basis::SourceText,
        !rt.holds(Notion::MinDis),
    );
    let rw = check(&cfg, &s, &w, &[Notion::Nash, Notion::MinDis, Notion::LocalMinDis])?;
    f.holds(
        "swapped-equilibrium",
        "the swapped profile is a (locally) minimally dishonest equilibrium",
        Basis::SourceText,
        rw.holds(Notion::Nash) && rw.holds(Notion::MinDis) && rw.holds(Notion::LocalMinDis),
    );
    Ok(())
}

fn repro_truncated_distance(f: &mut Facts) -> Result<()> {
    let s = load("penalty_sincere")?;
    let p1 = load("penalty_putative1")?;
    let p2 = load("penalty_putative2")?;
    let w1 = AgentId::woman(0);
    let (ls, l1, l2) = (s.list(w1), p1.list(w1), p2.list(w1));
    f.eq("k-1", "the first list is at distance 4", Basis::SourceText, 4, kendall_tau(ls, l1)?);
    f.eq("k-2", "the second list is at distance 3", Basis::SourceText, 3, kendall_tau(ls, l2)?);
    let (ts, t1, t2) = (TruncatedList::from(ls), TruncatedList::from(l1), TruncatedList::from(l2));
    for (num, den) in [(0, 1), (1, 4), (1, 2), (1, 1)] {
        let p = Rational64::new(num, den);
        f.eq(
            &format!("kp-1-{p}"),
            "the first list is at 4 + p",
            Basis::SourceText,
            Rational64::from_integer(4) + p,
            kendall_tau_penalty(&t1, &ts, p)?,
        );
        f.eq(
            &format!("kp-2-{p}"),
            "the second list is at 3 + 3p",
            Basis::SourceText,
            Rational64::from_integer(3) + Rational64::from_integer(3) * p,
            kendall_tau_penalty(&t2, &ts, p)?,
        );
    }
    f.eq("hausdorff-1", "the Hausdorff distance of the first list is 5", Basis::Oracle, 5, hausdorff_kt(&t1, &ts)?);
    f.eq("hausdorff-2", "the Hausdorff distance of the second list is 6", Basis::Oracle, 6, hausdorff_kt(&t2, &ts)?);
    let gs = GameConfig::new(Builtin::GsMan);
    for (tag, p) in [("1", &p1), ("2", &p2)] {
        f.eq(
            &format!("partner-{tag}"),
            "either list gets w1 her woman-optimal partner m2",
            Basis::SourceText,
            "m2",
            sure_partner(&gs.evaluate(p), w1),
        );
    }
    let w1_mindis = |mode: HonestyMode, p: &Profile| -> Result<bool> {
        let cfg = GameConfig::new(Builtin::GsMan).with_honesty(mode);
        let r = check(&cfg, &s, p, &[Notion::Nash, Notion::MinDis])?;
        Ok(r.holds(Notion::Nash) && r.agent("w1").is_some_and(|a| a.verdicts[&Notion::MinDis].passed()))
    };
    f.holds(
        "full-order-second",
        "with full orders the second list is the minimally dishonest response",
        Basis::SourceText,
        w1_mindis(HonestyMode::FullOrder, &p2)? && !w1_mindis(HonestyMode::FullOrder, &p1)?,
    );
    let low = HonestyMode::truncated(Rational64::new(1, 4))?;
    f.holds(
        "penalty-low-second",
        "with penalty 1/4 the second list is the minimally dishonest response",
        Basis::Oracle,
        w1_mindis(low, &p2)? && !w1_mindis(low, &p1)?,
    );
    let high = HonestyMode::truncated(Rational64::new(3, 4))?;
    f.holds(
        "penalty-high-first",
        "with penalty 3/4 the first list is the minimally dishonest response",
        Basis::SourceText,
        w1_mindis(high, &p1)? && !w1_mindis(high, &p2)?,
    );
    Ok(())
}

fn repro_college(f: &mut Facts) -> Result<()> {
    let s = load_college("college_sincere")?;
    let d = load_college("college_deviation")?;
    let assignment = |students: [usize; 4], inst: &CollegeInstance| {
        Assignment::from_students(students.iter().map(|c| Entry::Agent(*c)).collect(), &inst.quotas)
    };
    let mu = assignment([2, 1, 0, 0], &s)?;
    let mu_dev = assignment([0, 1, 2, 0], &d)?;
    let render =
        |inst: &CollegeInstance, v: &[Assignment]| v.iter().map(|a| a.render(inst)).collect::<Vec<_>>().join(" | ");
    f.eq(
        "stable-set",
        "mu is the only stable assignment",
        Basis::SourceText,
        render(&s, std::slice::from_ref(&mu)),
        render(&s, &enumerate_college_stable(&s, DEFAULT_MAX_SIDE)?),
    );
    for side in [Proposing::Men, Proposing::Women] {
        let name = if side == Proposing::Men { "student" } else { "college" };
        f.eq(
            &format!("{name}-da"),
            "deferred acceptance returns mu",
            Basis::Oracle,
            mu.render(&s),
            college_da(&s, side).render(&s),
        );
    }
    f.eq(
        "deviation-stable-set",
        "after c1's deviation mu' is the only stable assignment",
        Basis::SourceText,
        render(&d, std::slice::from_ref(&mu_dev)),
        render(&d, &enumerate_college_stable(&d, DEFAULT_MAX_SIDE)?),
    );
    let c1 = s.college(0);
    f.eq(
        "c1-prefers",
        "c1 strictly prefers {s1, s4} to {s3, s4}",
        Basis::SourceText,
        format!("{:?}", SetComparison::StrictlyPrefers),
        format!("{:?}", responsive_prefers(c1, mu_dev.college(0), mu.college(0))),
    );
    let c1_id = AgentId::woman(0);
    for mech in CollegeMechanism::ALL {
        let before = college_sets_of(&mech.evaluate(&s), 0);
        let after = college_sets_of(&mech.evaluate(&d), 0);
        f.holds(
            &format!("{}-profitable", mech.as_str()),
            "c1's deviation is profitable",
            Basis::SourceText,
            college_profitable(c1, &before, &after, Profitability::Optimistic),
        );
        f.holds(
            &format!("{}-not-nash", mech.as_str()),
            "the sincere profile is not a Nash equilibrium",
            Basis::SourceText,
            college_nash_violation(mech, &s, &s, c1_id, Profitability::Optimistic).is_some(),
        );
    }
    Ok(())
}

fn college_sets_of(outcome: &[(Assignment, Rational64)], c: usize) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = outcome.iter().map(|(a, _)| a.college(c).to_vec()).collect();
    v.sort();
    v.dedup();
    v
}

/// Seeded sweeps over random instances.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Every discovered locally minimally dishonest equilibrium has a
    /// sincerely stable outcome.
    SincereStability,
    /// Every sincerely stable matching is reached by the search.
    StableTargets,
    /// Man-proposing deferred acceptance only supports the woman-optimal
    /// matching.
    WomanOptimal,
    /// Random truth-teller subsets.
    Placement,
    /// Exhaustive two-by-two scan: Nash outcomes are deterministic,
    /// equilibria are sincerely stable, and prefix pruning finds exactly
    /// the equilibria with deterministic outcomes.
    LotteryMarginals,
}

impl SweepKind {
    pub const ALL: [SweepKind; 5] = [
        SweepKind::SincereStability,
        SweepKind::StableTargets,
        SweepKind::WomanOptimal,
        SweepKind::Placement,
        SweepKind::LotteryMarginals,
    ];

    /// Lotteries are only ruled out when a deviation must be weakly better
    /// in every outcome, so the lottery checks default to that reading.
    pub fn default_profitability(self) -> Profitability {
        match self {
            SweepKind::Placement | SweepKind::LotteryMarginals => Profitability::Guaranteed,
            _ => Profitability::Optimistic,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::SincereStability => "sincere-stability",
            SweepKind::StableTargets => "stable-targets",
            SweepKind::WomanOptimal => "woman-optimal",
            SweepKind::Placement => "placement",
            SweepKind::LotteryMarginals => "lottery-marginals",
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| Error::UnknownSweep(s.to_string()))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub mechanism: Builtin,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub profitability: Profitability,
    pub policy: SelfPolicy,
}

impl SweepConfig {
    pub fn new(kind: SweepKind, mechanism: Builtin, n: usize, trials: usize, seed: u64) -> Self {
        SweepConfig {
            kind,
            mechanism,
            n,
            trials,
            seed,
            profitability: kind.default_profitability(),
            policy: SelfPolicy::AlwaysLast,
        }
    }

    pub fn with_policy(mut self, p: SelfPolicy) -> Self {
        self.policy = p;
        self
    }

    pub fn with_profitability(mut self, p: Profitability) -> Self {
        self.profitability = p;
        self
    }

    fn game(&self) -> GameConfig {
        GameConfig::new(self.mechanism).with_profitability(self.profitability)
    }
}

/// Largest side the sweeps accept.
pub const MAX_SWEEP_SIDE: usize = 4;

/// Instance seeds of a sweep; equal seeds give equal instances for every
/// mechanism and kind.
pub fn instance_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.gen()).collect()
}

fn one_line(p: &Profile) -> String {
    serialize_profile(p).lines().filter(|l| !l.starts_with("men:") && !l.starts_with("women:")).join("; ")
}

/// Runs a seeded sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let max = if config.kind == SweepKind::LotteryMarginals { 2 } else { MAX_SWEEP_SIDE };
    if config.n == 0 || config.n > max {
        return Err(Error::SizeBound { size: config.n, max });
    }
    let start = Instant::now();
    let mut r = SweepReport::new("sweep", config.kind.as_str());
    r.mechanism = Some(config.mechanism.as_str().to_string());
    r.n = Some(config.n);
    r.trials = Some(config.trials);
    r.seed = Some(config.seed);
    r.profitability = Some(config.profitability);
    r.policy = Some(config.policy);
    for (i, s) in instance_seeds(config.seed, config.trials).into_iter().enumerate() {
        let sincere = random_instance(config.n, config.n, s, config.policy)?;
        let i = i as u64;
        r.instances += 1;
        match config.kind {
            SweepKind::SincereStability => sweep_sincere_stability(config, &sincere, i, &mut r)?,
            SweepKind::StableTargets => sweep_stable_targets(config, &sincere, i, &mut r)?,
            SweepKind::WomanOptimal => sweep_woman_optimal(config, &sincere, i, &mut r)?,
            SweepKind::Placement => sweep_placement(config, &sincere, s, i, &mut r)?,
            SweepKind::LotteryMarginals => sweep_lottery(config, &sincere, i, &mut r)?,
        }
    }
    r.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

/// Stable-set structure of the sincere instance: identical unmatched sets
/// and the deferred-acceptance extremes.
fn instance_invariants(sincere: &Profile, i: u64, r: &mut SweepReport) {
    let stable = enumerate_stable(sincere);
    let singles: Vec<Vec<AgentId>> = stable.iter().map(|m| m.singles()).collect();
    r.record("rural-hospital", singles.windows(2).all(|w| w[0] == w[1]), i, || one_line(sincere));
    for (side, proposing) in [(Side::Man, Proposing::Men), (Side::Woman, Proposing::Women)] {
        let best = gale_shapley(sincere, proposing);
        let ok = stable.contains(&best)
            && stable.iter().all(|m| {
                (0..sincere.side_len(side)).all(|k| {
                    let a = AgentId { side, index: k };
                    let l = sincere.list(a);
                    l.position(best.partner(a)) <= l.position(m.partner(a))
                })
            });
        r.record("lattice-extremes", ok, i, || one_line(sincere));
    }
}

/// Checks every equilibrium has to satisfy: deterministic outcome, a
/// unique putatively stable matching, sincere lists kept above the
/// partner, and the implication chain between the honesty notions.
fn equilibrium_invariants(
    game: &GameConfig,
    sincere: &Profile,
    p: &Profile,
    i: u64,
    r: &mut SweepReport,
) -> Result<bool> {
    let outcome = game.evaluate(p);
    let w = || one_line(p);
    r.record("deterministic-outcome", outcome.is_deterministic(), i, w);
    r.record("unique-putative-stable", enumerate_stable(p).len() == 1, i, w);
    let rep = check(game, sincere, p, &[Notion::MinDis, Notion::LocalMinDis, Notion::Partial])?;
    let mindis = rep.holds(Notion::MinDis);
    if mindis {
        r.count("minimally-dishonest", 1);
        if let Some(mu) = outcome.single() {
            let ok = p.agents().all(|a| {
                let s = sincere.list(a);
                let k = s.position(mu.partner(a));
                (0..k).all(|x| s.entry_at(x) == p.list(a).entry_at(x))
            });
            r.record("sincere-prefix", ok, i, w);
        }
        r.record("chain-mindis-local", rep.holds(Notion::LocalMinDis), i, w);
        r.record("chain-mindis-partial", rep.holds(Notion::Partial), i, w);
    }
    if rep.holds(Notion::LocalMinDis) && !rep.holds(Notion::Partial) {
        r.count("local-not-partial", 1);
    }
    Ok(mindis)
}

fn coalition_check(game: &GameConfig, sincere: &Profile, p: &Profile, i: u64, r: &mut SweepReport) -> Result<()> {
    let bound = 2.min(sincere.n_men().min(sincere.n_women()));
    let strict = game.clone().with_coalition_bound(bound).with_profitability(Profitability::Guaranteed);
    let out = check_strong(&strict, sincere, p)?;
    r.record("coalition-proof", out.violation.is_none() && out.exhaustive, i, || {
        format!("{} | {:?}", one_line(p), out.violation)
    });
    r.count("coalition-deviations-checked", out.deviations_checked as u64);
    if !game.mechanism.properties().deterministic {
        let loose = game.clone().with_coalition_bound(bound).with_profitability(Profitability::Optimistic);
        if check_strong(&loose, sincere, p)?.violation.is_some() {
            r.count("coalition-lottery-chance-only", 1);
        }
    }
    Ok(())
}

fn sweep_sincere_stability(config: &SweepConfig, sincere: &Profile, i: u64, r: &mut SweepReport) -> Result<()> {
    let game = config.game();
    instance_invariants(sincere, i, r);
    let notions = [Notion::Nash, Notion::LocalMinDis];
    let mut found: Vec<Profile> = Vec::new();
    let targets: Vec<Matching> = match config.mechanism {
        Builtin::Uniform => enumerate_stable(sincere),
        Builtin::GsMan => vec![gale_shapley(sincere, Proposing::Women)],
        _ => Vec::new(),
    };
    for mu in &targets {
        let (p, trace) = equilibrium_find(&game, sincere, mu)?;
        r.record("search-invariants", trace.invariant_failures.is_empty(), i, || trace.invariant_failures.join("; "));
        let ok = passes(&game, sincere, &p, &game.evaluate(&p), &notions);
        r.record("search-certified", ok, i, || one_line(&p));
        if ok {
            found.push(p);
        }
    }
    let e = enumerate_equilibria(&game, sincere, &notions, Prune::Prefix)?;
    r.count("candidates", e.candidates);
    if !e.complete {
        r.count("deterministic-outcomes-only", 1);
    }
    found.extend(e.equilibria.into_iter().map(|q| q.profile));
    found.sort_by_key(serialize_profile);
    found.dedup();
    for p in &found {
        r.equilibria += 1;
        let (ok, _) = support_sincerely_stable(sincere, &game.evaluate(p));
        r.record("sincerely-stable-outcome", ok, i, || one_line(p));
        equilibrium_invariants(&game, sincere, p, i, r)?;
    }
    Ok(())
}

fn sweep_stable_targets(config: &SweepConfig, sincere: &Profile, i: u64, r: &mut SweepReport) -> Result<()> {
    let game = config.game();
    instance_invariants(sincere, i, r);
    let bound = iteration_bound(sincere.n_men(), sincere.n_women());
    let targets = match config.mechanism {
        Builtin::GsMan => vec![gale_shapley(sincere, Proposing::Women)],
        _ => enumerate_stable(sincere),
    };
    for mu in &targets {
        let (p, trace) = equilibrium_find(&game, sincere, mu)?;
        r.equilibria += 1;
        r.record("iteration-bound", trace.iterations as u64 <= bound, i, || format!("{} > {bound}", trace.iterations));
        r.record("search-invariants", trace.invariant_failures.is_empty(), i, || trace.invariant_failures.join("; "));
        let outcome = game.evaluate(&p);
        r.record("outcome-is-target", outcome.single() == Some(mu), i, || one_line(&p));
        let rep = check(&game, sincere, &p, &[Notion::Nash, Notion::MinDis])?;
        let certified = rep.holds(Notion::Nash) && rep.holds(Notion::MinDis);
        r.record("certified", certified, i, || one_line(&p));
        equilibrium_invariants(&game, sincere, &p, i, r)?;
        if certified {
            coalition_check(&game, sincere, &p, i, r)?;
        }
    }
    Ok(())
}

fn sweep_woman_optimal(config: &SweepConfig, sincere: &Profile, i: u64, r: &mut SweepReport) -> Result<()> {
    let game = config.game();
    instance_invariants(sincere, i, r);
    let target = gale_shapley(sincere, Proposing::Women);
    let found = equilibrium_find(&game, sincere, &target);
    r.record("search-succeeds", found.is_ok(), i, || format!("{} | {:?}", one_line(sincere), found.as_ref().err()));
    if let Ok((p, trace)) = &found {
        r.record("search-invariants", trace.invariant_failures.is_empty(), i, || trace.invariant_failures.join("; "));
        let rep = check(&game, sincere, p, &[Notion::Nash, Notion::MinDis])?;
        r.record("certified", rep.holds(Notion::Nash) && rep.holds(Notion::MinDis), i, || one_line(p));
        r.record("outcome-is-target", game.evaluate(p).single() == Some(&target), i, || one_line(p));
    }
    let e = enumerate_equilibria(&game, sincere, &[Notion::Nash, Notion::MinDis], Prune::Prefix)?;
    r.count("candidates", e.candidates);
    for q in &e.equilibria {
        r.equilibria += 1;
        r.record("woman-optimal-outcome", q.outcome.single() == Some(&target), i, || one_line(&q.profile));
        equilibrium_invariants(&game, sincere, &q.profile, i, r)?;
        coalition_check(&game, sincere, &q.profile, i, r)?;
    }
    Ok(())
}

/// At most three strategic agents, the rest tell the truth.
fn random_truth_tellers(sincere: &Profile, seed: u64) -> Vec<AgentId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut agents: Vec<AgentId> = sincere.agents().collect();
    agents.shuffle(&mut rng);
    let k = rng.gen_range(1..=3.min(agents.len()));
    agents.split_off(k)
}

fn sweep_placement(config: &SweepConfig, sincere: &Profile, seed: u64, i: u64, r: &mut SweepReport) -> Result<()> {
    let truthful = random_truth_tellers(sincere, seed);
    let game = config.game().with_truth_tellers(truthful.iter().copied());
    let strategic: Vec<AgentId> = game.strategic_agents(sincere).collect();
    let woman_opt = gale_shapley(sincere, Proposing::Women);
    let e = enumerate_equilibria(&game, sincere, &[Notion::Nash, Notion::MinDis], Prune::None)?;
    r.count("candidates", e.candidates);
    for q in &e.equilibria {
        r.equilibria += 1;
        let w = || {
            format!(
                "{} | strategic {:?}",
                one_line(&q.profile),
                strategic.iter().map(|a| a.to_string()).collect::<Vec<_>>()
            )
        };
        let sure = strategic.iter().all(|a| q.outcome.partners(*a).len() == 1);
        if config.profitability == Profitability::Guaranteed {
            r.record("strategic-partner-deterministic", sure, i, w);
        } else if !sure {
            r.count("strategic-partner-deterministic-exceptions", 1);
        }
        match config.mechanism {
            Builtin::GsMan => {
                let ok = strategic
                    .iter()
                    .filter(|a| a.side == Side::Woman)
                    .all(|a| q.outcome.sure_partner(*a) == Some(woman_opt.partner(*a)));
                r.record("strategic-women-woman-optimal", ok, i, w);
            }
            _ => {
                let (ok, _) = support_sincerely_stable(sincere, &q.outcome);
                r.record("sincerely-stable-support", ok, i, w);
            }
        }
    }
    Ok(())
}

fn sweep_lottery(config: &SweepConfig, sincere: &Profile, i: u64, r: &mut SweepReport) -> Result<()> {
    let game = config.game();
    let strict = config.profitability == Profitability::Guaranteed;
    let nash = enumerate_equilibria(&game, sincere, &[Notion::Nash], Prune::None)?;
    r.count("candidates", nash.candidates);
    for q in &nash.equilibria {
        determinism(strict, "nash-deterministic", q, i, r);
    }
    let notions = [Notion::Nash, Notion::LocalMinDis];
    let full = enumerate_equilibria(&game, sincere, &notions, Prune::None)?;
    for q in &full.equilibria {
        r.equilibria += 1;
        determinism(strict, "equilibrium-deterministic", q, i, r);
        let (ok, _) = support_sincerely_stable(sincere, &q.outcome);
        r.record("sincerely-stable-outcome", ok, i, || one_line(&q.profile));
    }
    let pruned = enumerate_equilibria(&game, sincere, &notions, Prune::Prefix)?;
    let key = |v: &mut Vec<String>| v.sort();
    let mut a: Vec<String> = full
        .equilibria
        .iter()
        .filter(|q| q.outcome.is_deterministic())
        .map(|q| serialize_profile(&q.profile))
        .collect();
    let mut b: Vec<String> = pruned.equilibria.iter().map(|q| serialize_profile(&q.profile)).collect();
    key(&mut a);
    key(&mut b);
    r.record("prune-matches-deterministic", a == b, i, || one_line(sincere));
    if pruned.complete {
        r.record("prune-complete", pruned.equilibria.len() == full.equilibria.len(), i, || one_line(sincere));
    }
    Ok(())
}

/// A check under guaranteed profitability, only a count otherwise.
fn determinism(strict: bool, check: &str, q: &Equilibrium, i: u64, r: &mut SweepReport) {
    let det = q.outcome.is_deterministic();
    if strict {
        r.record(check, det, i, || one_line(&q.profile));
    } else if !det {
        r.count(&format!("{check}-exceptions"), 1);
    }
}
