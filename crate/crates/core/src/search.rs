//! Finding and enumerating minimally dishonest equilibria.

use itertools::Itertools;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{
    all_lists, compare_partners, local_violation, min_dishonest_violation, nash_violation, partial_violation,
    render_list, truncation_violation, GameConfig, Notion, Profitability,
};
use crate::mechanisms::{enumerate_stable, gale_shapley, MatchDistribution, Proposing};
use crate::model::{is_individually_rational, is_stable, AgentId, Entry, Matching, PreferenceList, Profile};

/// Every agent keeps its sincere list down to its partner in `matching`,
/// then the sentinel, then everyone else in sincere order.
pub fn truncate_at(sincere: &Profile, matching: &Matching) -> Result<Profile> {
    if !is_stable(sincere, matching) {
        return Err(Error::Precondition(format!("{matching} is not stable for the sincere lists")));
    }
    let mut p = sincere.clone();
    for a in sincere.agents() {
        p.set_list(a, sincere.list(a).truncated_after(matching.partner(a)));
    }
    Ok(p)
}

/// `list` starts with exactly the sincere order down to and including
/// `partner`.
pub fn agrees_up_to(sincere: &PreferenceList, list: &PreferenceList, partner: Entry) -> bool {
    let pos = sincere.position(partner);
    (0..=pos).all(|i| sincere.entry_at(i) == list.entry_at(i))
}

/// A more honest list that leaves its agent no worse off.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub agent: AgentId,
    pub list: PreferenceList,
    pub distance: Rational64,
    pub in_inv_prime: bool,
}

fn agent_violations(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    current: &MatchDistribution,
    agent: AgentId,
    prime_only: bool,
) -> Result<Vec<Violation>> {
    if !config.is_strategic(agent) {
        return Ok(Vec::new());
    }
    let s = sincere.list(agent);
    let own = putative.list(agent);
    let k = config.distance(s, own);
    let base = current.sure_partner(agent).ok_or_else(|| Error::NonDeterministicBaseline(agent.to_string()))?;
    let mut out = Vec::new();
    for l in all_lists(own.universe()) {
        let d = config.distance(s, l);
        if d >= k {
            continue;
        }
        let prime = agrees_up_to(s, l, base);
        if prime_only && !prime {
            continue;
        }
        let outcome = config.evaluate(&putative.with_list(agent, *l));
        if !compare_partners(s, &outcome.partners(agent), base).has_worse() {
            out.push(Violation { agent, list: *l, distance: d, in_inv_prime: prime });
        }
    }
    Ok(out)
}

/// All violations of minimal dishonesty (`Inv`) and the subset that keeps
/// the sincere order down to the agent's partner (`Inv'`).
pub fn inv_sets(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
) -> Result<(Vec<Violation>, Vec<Violation>)> {
    let current = config.evaluate(putative);
    let mut inv = Vec::new();
    for a in sincere.agents() {
        inv.extend(agent_violations(config, sincere, putative, &current, a, false)?);
    }
    let prime = inv.iter().filter(|v| v.in_inv_prime).cloned().collect();
    Ok((inv, prime))
}

/// `|M|·C(|W|+1, 2) + |W|·C(|M|+1, 2)`: the largest possible total distance.
pub fn iteration_bound(n_men: usize, n_women: usize) -> u64 {
    let c2 = |n: usize| (n * (n - 1) / 2) as u64;
    n_men as u64 * c2(n_women + 1) + n_women as u64 * c2(n_men + 1)
}

fn potential(config: &GameConfig, sincere: &Profile, p: &Profile) -> Rational64 {
    sincere.agents().map(|a| config.distance(sincere.list(a), p.list(a))).sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub agent: String,
    pub list: String,
    pub distance: String,
    pub potential_before: String,
    pub potential_after: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchTrace {
    pub steps: Vec<TraceStep>,
    pub iterations: usize,
    pub bound: u64,
    /// Per-iteration invariant failures (Nash, unique stable matching,
    /// `Inv` empty exactly when `Inv'` is); only checked in builds with
    /// debug assertions.
    pub invariant_failures: Vec<String>,
    pub invariants_checked: bool,
}

fn supported(config: &GameConfig, sincere: &Profile, target: &Matching) -> Result<()> {
    let props = config.mechanism.properties();
    if config.mechanism.name() == "gs-man" {
        if *target != gale_shapley(sincere, Proposing::Women) {
            return Err(Error::Precondition(
                "with man-proposing deferred acceptance only the woman-optimal matching can be targeted".into(),
            ));
        }
        return Ok(());
    }
    if props.fully_randomized {
        return Ok(());
    }
    Err(Error::Precondition(format!(
        "equilibrium search supports fully randomized mechanisms and gs-man, not {}",
        config.mechanism.name()
    )))
}

fn check_invariants(
    config: &GameConfig,
    sincere: &Profile,
    p: &Profile,
    target: &Matching,
    iter: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    let stable = enumerate_stable(p);
    if stable != [target.clone()] {
        out.push(format!("iteration {iter}: putative stable set is {stable:?}"));
    }
    let current = config.evaluate(p);
    for a in sincere.agents() {
        if let Some(d) = nash_violation(config, sincere, p, &current, a) {
            out.push(format!("iteration {iter}: {a} profits with {}", render_list(sincere, a, &d.list)));
        }
    }
    match inv_sets(config, sincere, p) {
        Ok((inv, prime)) if inv.is_empty() != prime.is_empty() => {
            out.push(format!("iteration {iter}: {} violations but {} with sincere prefixes", inv.len(), prime.len()))
        }
        Ok(_) => {}
        Err(e) => out.push(format!("iteration {iter}: {e}")),
    }
    out
}

/// Starting from every agent truncating after its `target` partner,
/// repeatedly lets the least agent with a sincere-prefix violation switch
/// to its most honest such list, until none remain.
pub fn equilibrium_find(config: &GameConfig, sincere: &Profile, target: &Matching) -> Result<(Profile, SearchTrace)> {
    config.validate(sincere, sincere)?;
    supported(config, sincere, target)?;
    let mut p = truncate_at(sincere, target)?;
    let bound = iteration_bound(sincere.n_men(), sincere.n_women());
    let check = cfg!(debug_assertions);
    let mut trace = SearchTrace {
        steps: Vec::new(),
        iterations: 0,
        bound,
        invariant_failures: Vec::new(),
        invariants_checked: check,
    };
    if check {
        trace.invariant_failures.extend(check_invariants(config, sincere, &p, target, 0));
    }
    loop {
        let current = config.evaluate(&p);
        let mut chosen = None;
        for a in sincere.agents() {
            let vs = agent_violations(config, sincere, &p, &current, a, true)?;
            if let Some(v) = vs.into_iter().min_by(|x, y| x.distance.cmp(&y.distance).then(x.list.cmp(&y.list))) {
                chosen = Some(v);
                break;
            }
        }
        let Some(v) = chosen else { break };
        let before = potential(config, sincere, &p);
        p.set_list(v.agent, v.list);
        let after = potential(config, sincere, &p);
        if after >= before || trace.iterations as u64 >= bound {
            return Err(Error::Precondition("potential failed to decrease".into()));
        }
        trace.iterations += 1;
        trace.steps.push(TraceStep {
            agent: sincere.instance().name(v.agent).to_string(),
            list: render_list(sincere, v.agent, &v.list),
            distance: v.distance.to_string(),
            potential_before: before.to_string(),
            potential_after: after.to_string(),
        });
        if check {
            trace.invariant_failures.extend(check_invariants(config, sincere, &p, target, trace.iterations));
        }
    }
    Ok((p, trace))
}

/// How candidate profiles are generated.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prune {
    /// Every list for every strategic agent.
    None,
    /// Only profiles that keep each agent's sincere order above its
    /// partner, rank partner and any promoted agents above the sentinel,
    /// and keep the rest below it in sincere order.
    Prefix,
}

impl std::str::FromStr for Prune {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Prune::None),
            "prefix" => Ok(Prune::Prefix),
            _ => Err(Error::Precondition(format!("unknown pruning mode `{s}` (expected prefix or none)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equilibrium {
    pub profile: Profile,
    pub outcome: MatchDistribution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub equilibria: Vec<Equilibrium>,
    pub candidates: u64,
    pub prune: Prune,
    /// False when prefix pruning may have skipped equilibria whose outcome
    /// is a lottery (randomized mechanisms under optimistic profitability).
    pub complete: bool,
}

/// Largest candidate space the unpruned scan accepts.
pub const MAX_CANDIDATES: u64 = 5_000_000;

fn notion_order(n: Notion) -> u8 {
    match n {
        Notion::LocalMinDis => 0,
        Notion::Partial => 1,
        Notion::Trunc => 2,
        Notion::Nash => 3,
        Notion::MinDis => 4,
        Notion::Strong => 5,
    }
}

/// Whether every strategic agent passes every notion at `p`.
pub fn passes(
    config: &GameConfig,
    sincere: &Profile,
    p: &Profile,
    current: &MatchDistribution,
    notions: &[Notion],
) -> bool {
    let mut ordered = notions.to_vec();
    ordered.sort_by_key(|n| notion_order(*n));
    for n in ordered {
        if n == Notion::Strong {
            match crate::game::check_strong(config, sincere, p) {
                Ok(s) if s.violation.is_none() => continue,
                _ => return false,
            }
        }
        for a in config.strategic_agents(sincere) {
            let ok = match n {
                Notion::Nash => nash_violation(config, sincere, p, current, a).is_none(),
                Notion::MinDis => matches!(min_dishonest_violation(config, sincere, p, current, a), Ok(None)),
                Notion::LocalMinDis => matches!(local_violation(config, sincere, p, current, a), Ok(None)),
                Notion::Partial => matches!(partial_violation(config, sincere, p, current, a), Ok(None)),
                Notion::Trunc => matches!(truncation_violation(config, sincere, p, current, a), Ok(None)),
                Notion::Strong => true,
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Lists that keep the sincere order above `pivot`, put `pivot` (when it
/// is an agent) and an ordered choice of lower agents above the sentinel,
/// and leave everyone else below it in sincere order.
pub fn prefix_candidates(sincere: &PreferenceList, pivot: Entry) -> Vec<PreferenceList> {
    let p = sincere.position(pivot);
    let top: Vec<Entry> = (0..p).map(|i| sincere.entry_at(i)).collect();
    let below: Vec<Entry> =
        (p + 1..sincere.len()).map(|i| sincere.entry_at(i)).filter(|e| *e != Entry::Single).collect();
    let mut out = Vec::new();
    for k in 0..=below.len() {
        for chosen in below.iter().copied().combinations(k) {
            let mut items = chosen.clone();
            if pivot != Entry::Single {
                items.push(pivot);
            }
            let rest: Vec<Entry> = below.iter().copied().filter(|e| !chosen.contains(e)).collect();
            let n = items.len();
            for perm in items.into_iter().permutations(n) {
                let entries: Vec<Entry> = top
                    .iter()
                    .copied()
                    .chain(perm)
                    .chain(std::iter::once(Entry::Single))
                    .chain(rest.iter().copied())
                    .collect();
                out.push(PreferenceList::new(&entries).expect("rearranged universe"));
            }
        }
    }
    out.sort();
    out
}

fn all_matchings(n_men: usize, n_women: usize) -> Vec<Matching> {
    fn rec(m: usize, n_men: usize, used: &mut Vec<bool>, men: &mut Vec<Entry>, out: &mut Vec<Matching>) {
        if m == n_men {
            out.push(Matching::from_men(men.clone(), used.len()).expect("injective"));
            return;
        }
        men[m] = Entry::Single;
        rec(m + 1, n_men, used, men, out);
        for w in 0..used.len() {
            if !used[w] {
                used[w] = true;
                men[m] = Entry::Agent(w);
                rec(m + 1, n_men, used, men, out);
                used[w] = false;
            }
        }
        men[m] = Entry::Single;
    }
    let mut out = Vec::new();
    rec(0, n_men, &mut vec![false; n_women], &mut vec![Entry::Single; n_men], &mut out);
    out.sort();
    out
}

fn check_prune_soundness(config: &GameConfig, notions: &[Notion]) -> Result<()> {
    let p = config.mechanism.properties();
    if !p.truncation_invariant || !((p.monotonic && p.ins) || p.fully_randomized) {
        return Err(Error::Precondition(format!(
            "prefix pruning is only lossless for truncation-invariant mechanisms that are monotonic and INS or fully randomized; {} is not",
            config.mechanism.name()
        )));
    }
    if !notions.iter().any(|n| matches!(n, Notion::MinDis | Notion::LocalMinDis)) {
        return Err(Error::Precondition("prefix pruning requires the mindis or localmindis filter".into()));
    }
    Ok(())
}

/// All profiles (over strategic agents' lists; truth-tellers stay sincere)
/// at which every requested notion holds for every strategic agent.
/// Prefix pruning only yields equilibria with a deterministic outcome.
pub fn enumerate_equilibria(
    config: &GameConfig,
    sincere: &Profile,
    notions: &[Notion],
    prune: Prune,
) -> Result<Enumeration> {
    config.validate(sincere, sincere)?;
    let agents: Vec<AgentId> = sincere.agents().collect();
    let mut found = Vec::new();
    let mut candidates = 0u64;
    match prune {
        Prune::None => {
            let spaces: Vec<Vec<PreferenceList>> = agents
                .iter()
                .map(|a| {
                    if config.is_strategic(*a) {
                        all_lists(sincere.list(*a).universe()).to_vec()
                    } else {
                        vec![*sincere.list(*a)]
                    }
                })
                .collect();
            let total = spaces.iter().try_fold(1u64, |acc, s| acc.checked_mul(s.len() as u64));
            if total.is_none_or(|t| t > MAX_CANDIDATES) {
                return Err(Error::Precondition(format!(
                    "unpruned scan over more than {MAX_CANDIDATES} profiles; use prefix pruning or a smaller instance"
                )));
            }
            for lists in spaces.iter().map(|s| s.iter().copied()).multi_cartesian_product() {
                candidates += 1;
                let mut p = sincere.clone();
                for (a, l) in agents.iter().zip(lists) {
                    p.set_list(*a, l);
                }
                let current = config.evaluate(&p);
                if passes(config, sincere, &p, &current, notions) {
                    found.push(Equilibrium { profile: p, outcome: current });
                }
            }
        }
        Prune::Prefix => {
            check_prune_soundness(config, notions)?;
            for mu in all_matchings(sincere.n_men(), sincere.n_women()) {
                if !is_individually_rational(sincere, &mu) {
                    continue;
                }
                let options = |a: AgentId| -> Vec<PreferenceList> {
                    let s = sincere.list(a);
                    if config.is_strategic(a) {
                        prefix_candidates(s, mu.partner(a))
                    } else if s.position(mu.partner(a)) < s.self_position() || mu.partner(a) == Entry::Single {
                        vec![*s]
                    } else {
                        Vec::new()
                    }
                };
                let men_opts: Vec<Vec<PreferenceList>> =
                    (0..sincere.n_men()).map(|i| options(AgentId::man(i))).collect();
                let women_opts: Vec<Vec<PreferenceList>> =
                    (0..sincere.n_women()).map(|j| options(AgentId::woman(j))).collect();
                for men in men_opts.iter().map(|o| o.iter().copied()).multi_cartesian_product() {
                    // Women's lists that keep mu free of blocking pairs.
                    let filtered: Vec<Vec<PreferenceList>> = women_opts
                        .iter()
                        .enumerate()
                        .map(|(w, opts)| {
                            opts.iter()
                                .copied()
                                .filter(|wl| {
                                    (0..sincere.n_men()).all(|m| {
                                        !(men[m].prefers(Entry::Agent(w), mu.men()[m])
                                            && wl.prefers(Entry::Agent(m), mu.women()[w]))
                                    })
                                })
                                .collect()
                        })
                        .collect();
                    if filtered.iter().any(|f| f.is_empty()) {
                        continue;
                    }
                    let mut p = sincere.clone();
                    for (m, l) in men.iter().enumerate() {
                        p.set_list(AgentId::man(m), *l);
                    }
                    for women in filtered.iter().map(|o| o.iter().copied()).multi_cartesian_product() {
                        candidates += 1;
                        for (w, l) in women.iter().enumerate() {
                            p.set_list(AgentId::woman(w), *l);
                        }
                        let current = config.evaluate(&p);
                        if current.single() != Some(&mu) {
                            continue;
                        }
                        if passes(config, sincere, &p, &current, notions) {
                            found.push(Equilibrium { profile: p.clone(), outcome: current });
                        }
                    }
                }
            }
        }
    }
    let complete = prune == Prune::None
        || config.mechanism.properties().deterministic
        || config.profitability == Profitability::Guaranteed;
    Ok(Enumeration { equilibria: found, candidates, prune, complete })
}
