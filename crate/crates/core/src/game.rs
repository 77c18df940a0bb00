//! The strategic game: agents submit lists to a public mechanism and are
//! judged against their sincere preferences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::honesty::HonestyMode;
use crate::mechanisms::{MatchDistribution, Mechanism};
use crate::model::{blocking_pairs, AgentId, Entry, PreferenceList, Profile, DEFAULT_MAX_SIDE, MAX_SIDE};

/// How an agent ranks lotteries over partners.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profitability {
    /// Some new support partner beats every current one.
    #[default]
    Optimistic,
    /// Every new support partner is at least as good as every current one,
    /// and some pair is strict.
    Guaranteed,
}

impl FromStr for Profitability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimistic" => Ok(Profitability::Optimistic),
            "guaranteed" => Ok(Profitability::Guaranteed),
            _ => Err(Error::Precondition(format!("unknown profitability notion `{s}`"))),
        }
    }
}

/// Which transpositions count as local edits.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalSwaps {
    #[default]
    Any,
    Adjacent,
}

impl FromStr for LocalSwaps {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(LocalSwaps::Any),
            "adjacent" => Ok(LocalSwaps::Adjacent),
            _ => Err(Error::Precondition(format!("unknown swap mode `{s}`"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Notion {
    Nash,
    MinDis,
    LocalMinDis,
    Partial,
    Trunc,
    Strong,
}

impl Notion {
    pub const ALL: [Notion; 6] =
        [Notion::Nash, Notion::MinDis, Notion::LocalMinDis, Notion::Partial, Notion::Trunc, Notion::Strong];

    pub fn as_str(self) -> &'static str {
        match self {
            Notion::Nash => "nash",
            Notion::MinDis => "mindis",
            Notion::LocalMinDis => "localmindis",
            Notion::Partial => "partial",
            Notion::Trunc => "trunc",
            Notion::Strong => "strong",
        }
    }

    /// Parses a comma-separated list such as `nash,mindis`.
    pub fn parse_list(s: &str) -> Result<Vec<Notion>> {
        let mut out: Vec<Notion> =
            s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).try_collect()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Notion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Notion::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown notion `{s}`")))
    }
}

#[derive(Clone)]
pub struct GameConfig {
    pub mechanism: Arc<dyn Mechanism>,
    pub honesty: HonestyMode,
    pub profitability: Profitability,
    /// Largest coalition examined by the strong check; 0 disables it.
    pub coalition_bound: usize,
    /// Agents pinned to their sincere list.
    pub truth_tellers: BTreeSet<AgentId>,
    pub local_swaps: LocalSwaps,
    /// Joint deviations sampled per coalition above size two.
    pub coalition_samples: usize,
    pub seed: u64,
    pub max_side: usize,
}

impl fmt::Debug for GameConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameConfig")
            .field("mechanism", &self.mechanism.name())
            .field("honesty", &self.honesty)
            .field("profitability", &self.profitability)
            .field("coalition_bound", &self.coalition_bound)
            .field("truth_tellers", &self.truth_tellers)
            .field("local_swaps", &self.local_swaps)
            .finish()
    }
}

impl GameConfig {
    pub fn new(mechanism: impl Mechanism + 'static) -> Self {
        GameConfig {
            mechanism: Arc::new(mechanism),
            honesty: HonestyMode::FullOrder,
            profitability: Profitability::Optimistic,
            coalition_bound: 2,
            truth_tellers: BTreeSet::new(),
            local_swaps: LocalSwaps::Any,
            coalition_samples: 2000,
            seed: 0,
            max_side: DEFAULT_MAX_SIDE,
        }
    }

    pub fn with_profitability(mut self, p: Profitability) -> Self {
        self.profitability = p;
        self
    }

    pub fn with_honesty(mut self, h: HonestyMode) -> Self {
        self.honesty = h;
        self
    }

    pub fn with_truth_tellers(mut self, agents: impl IntoIterator<Item = AgentId>) -> Self {
        self.truth_tellers = agents.into_iter().collect();
        self
    }

    pub fn with_coalition_bound(mut self, k: usize) -> Self {
        self.coalition_bound = k;
        self
    }

    pub fn with_local_swaps(mut self, s: LocalSwaps) -> Self {
        self.local_swaps = s;
        self
    }

    pub fn is_strategic(&self, agent: AgentId) -> bool {
        !self.truth_tellers.contains(&agent)
    }

    pub fn strategic_agents<'a>(&'a self, profile: &'a Profile) -> impl Iterator<Item = AgentId> + 'a {
        profile.agents().filter(move |a| self.is_strategic(*a))
    }

    /// Checks the configuration against an instance.
    pub fn validate(&self, sincere: &Profile, putative: &Profile) -> Result<()> {
        let size = sincere.n_men().max(sincere.n_women());
        let bound = self.max_side.min(MAX_SIDE);
        if size > bound {
            return Err(Error::SizeBound { size, max: bound });
        }
        if sincere.n_men() != putative.n_men() || sincere.n_women() != putative.n_women() {
            return Err(Error::Precondition("sincere and putative profiles have different sizes".into()));
        }
        if let Some(a) = self.truth_tellers.iter().find(|a| !sincere.contains(**a)) {
            return Err(Error::UnknownAgent(a.to_string()));
        }
        for a in &self.truth_tellers {
            if sincere.list(*a) != putative.list(*a) {
                return Err(Error::Precondition(format!("truth-teller {a} does not submit the sincere list")));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, profile: &Profile) -> MatchDistribution {
        self.mechanism.evaluate(profile)
    }

    pub fn distance(&self, sincere: &PreferenceList, list: &PreferenceList) -> Rational64 {
        self.honesty.distance(sincere, list)
    }
}

/// Every strict order over a universe of `k` agents plus the sentinel,
/// computed once per `k`.
pub fn all_lists(k: usize) -> &'static [PreferenceList] {
    static CACHE: [OnceLock<Vec<PreferenceList>>; MAX_SIDE + 1] = [const { OnceLock::new() }; MAX_SIDE + 1];
    CACHE[k].get_or_init(|| PreferenceList::all(k))
}

/// How a deviation's support partners compare to a fixed baseline partner.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AllWeaklyBetter,
    /// Some partner strictly worse, none strictly better.
    SomeStrictlyWorse,
    /// Some partner strictly worse and some strictly better.
    Mixed,
}

impl Comparison {
    pub fn has_worse(self) -> bool {
        !matches!(self, Comparison::AllWeaklyBetter)
    }
}

/// Classifies `partners` against `baseline` using the sincere order.
pub fn compare_partners(sincere: &PreferenceList, partners: &[Entry], baseline: Entry) -> Comparison {
    let worse = partners.iter().any(|p| sincere.prefers(baseline, *p));
    let better = partners.iter().any(|p| sincere.prefers(*p, baseline));
    match (worse, better) {
        (false, _) => Comparison::AllWeaklyBetter,
        (true, false) => Comparison::SomeStrictlyWorse,
        (true, true) => Comparison::Mixed,
    }
}

pub fn compare_against_partner(
    sincere: &PreferenceList,
    agent: AgentId,
    distribution: &MatchDistribution,
    baseline: Entry,
) -> Comparison {
    compare_partners(sincere, &distribution.partners(agent), baseline)
}

/// Whether moving from `current` to `deviation` partners is an improvement.
pub fn profitable_partners(
    sincere: &PreferenceList,
    current: &[Entry],
    deviation: &[Entry],
    notion: Profitability,
) -> bool {
    match notion {
        Profitability::Optimistic => {
            let best = current.iter().map(|e| sincere.position(*e)).min().expect("non-empty support");
            deviation.iter().any(|d| sincere.position(*d) < best)
        }
        Profitability::Guaranteed => {
            let weak = deviation.iter().all(|d| current.iter().all(|c| !sincere.prefers(*c, *d)));
            let strict = deviation.iter().any(|d| current.iter().any(|c| sincere.prefers(*d, *c)));
            weak && strict
        }
    }
}

pub fn is_profitable(
    sincere: &PreferenceList,
    agent: AgentId,
    current: &MatchDistribution,
    deviation: &MatchDistribution,
    notion: Profitability,
) -> bool {
    profitable_partners(sincere, &current.partners(agent), &deviation.partners(agent), notion)
}

/// An agent replacing its list, and what the mechanism then returns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationOutcome {
    pub agent: AgentId,
    pub list: PreferenceList,
    pub distribution: MatchDistribution,
}

impl DeviationOutcome {
    pub fn partners(&self) -> Vec<Entry> {
        self.distribution.partners(self.agent)
    }
}

fn deviate(config: &GameConfig, putative: &Profile, agent: AgentId, list: PreferenceList) -> DeviationOutcome {
    let distribution = config.evaluate(&putative.with_list(agent, list));
    DeviationOutcome { agent, list, distribution }
}

fn baseline(current: &MatchDistribution, agent: AgentId) -> Result<Entry> {
    current.sure_partner(agent).ok_or_else(|| Error::NonDeterministicBaseline(agent.to_string()))
}

/// First profitable deviation of `agent` over its whole strategy space.
pub fn nash_violation(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    current: &MatchDistribution,
    agent: AgentId,
) -> Option<DeviationOutcome> {
    if !config.is_strategic(agent) {
        return None;
    }
    let s = sincere.list(agent);
    let now = current.partners(agent);
    let own = putative.list(agent);
    all_lists(own.universe())
        .iter()
        .filter(|l| *l != own)
        .map(|l| deviate(config, putative, agent, *l))
        .find(|d| profitable_partners(s, &now, &d.partners(), config.profitability))
}

/// First strictly-more-honest list that leaves `agent` no worse off.
pub fn min_dishonest_violation(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    current: &MatchDistribution,
    agent: AgentId,
) -> Result<Option<DeviationOutcome>> {
    if !config.is_strategic(agent) {
        return Ok(None);
    }
    let s = sincere.list(agent);
    let own = putative.list(agent);
    let k = config.distance(s, own);
    if k == Rational64::from_integer(0) {
        return Ok(None);
    }
    let base = baseline(current, agent)?;
    Ok(all_lists(own.universe())
        .iter()
        .filter(|l| config.distance(s, l) < k)
        .map(|l| deviate(config, putative, agent, *l))
        .find(|d| !compare_partners(s, &d.partners(), base).has_worse()))
}

/// Transpositions of `list` allowed by the swap mode that reduce its distance.
pub fn honesty_swaps(config: &GameConfig, sincere: &PreferenceList, list: &PreferenceList) -> Vec<PreferenceList> {
    let k = config.distance(sincere, list);
    let n = list.len();
    let pairs: Vec<(usize, usize)> = match config.local_swaps {
        LocalSwaps::Any => (0..n).tuple_combinations().collect(),
        LocalSwaps::Adjacent => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
    };
    pairs.into_iter().map(|(i, j)| list.swapped(i, j)).filter(|l| config.distance(sincere, l) < k).collect()
}

/// First distance-reducing transposition that leaves `agent` no worse off.
pub fn local_violation(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    current: &MatchDistribution,
    agent: AgentId,
) -> Result<Option<DeviationOutcome>> {
    if !config.is_strategic(agent) {
        return Ok(None);
    }
    let s = sincere.list(agent);
    let swaps = honesty_swaps(config, s, putative.list(agent));
    if swaps.is_empty() {
        return Ok(None);
    }
    let base = baseline(current, agent)?;
    Ok(swaps
        .into_iter()
        .map(|l| deviate(config, putative, agent, l))
        .find(|d| !compare_partners(s, &d.partners(), base).has_worse()))
}

/// A dishonest agent fails when reverting to the sincere list costs nothing.
pub fn partial_violation(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    current: &MatchDistribution,
    agent: AgentId,
) -> Result<Option<DeviationOutcome>> {
    let s = sincere.list(agent);
    if !config.is_strategic(agent) || putative.list(agent) == s {
        return Ok(None);
    }
    let base = baseline(current, agent)?;
    let d = deviate(config, putative, agent, *s);
    Ok((!compare_partners(s, &d.partners(), base).has_worse()).then_some(d))
}

/// `sincere` with the sentinel moved up to position `pos`.
pub fn truncate_to(sincere: &PreferenceList, pos: usize) -> PreferenceList {
    assert!(pos <= sincere.self_position(), "truncation can only move the sentinel up");
    let mut entries: Vec<Entry> = sincere.entries().filter(|e| *e != Entry::Single).collect();
    entries.insert(pos, Entry::Single);
    PreferenceList::new(&entries).expect("same universe")
}

/// Whether `list` is `sincere` with the sentinel moved up.
pub fn is_truncation_of(sincere: &PreferenceList, list: &PreferenceList) -> bool {
    list.self_position() <= sincere.self_position() && *list == truncate_to(sincere, list.self_position())
}

/// First shallower truncation that leaves `agent` no worse off.
pub fn truncation_violation(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    current: &MatchDistribution,
    agent: AgentId,
) -> Result<Option<DeviationOutcome>> {
    let s = sincere.list(agent);
    let own = putative.list(agent);
    if !config.is_strategic(agent) {
        return Ok(None);
    }
    if !is_truncation_of(s, own) {
        return Err(Error::NotATruncation(agent.to_string()));
    }
    let base = baseline(current, agent)?;
    for pos in own.self_position() + 1..=s.self_position() {
        let d = deviate(config, putative, agent, truncate_to(s, pos));
        if !compare_partners(s, &d.partners(), base).has_worse() {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// A joint deviation making every coalition member better off.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoalitionDeviation {
    pub members: Vec<AgentId>,
    pub lists: Vec<PreferenceList>,
    pub distribution: MatchDistribution,
}

/// Result of the bounded coalition search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongOutcome {
    pub violation: Option<CoalitionDeviation>,
    pub coalitions_checked: usize,
    pub deviations_checked: usize,
    /// Whether every coalition up to the bound was scanned completely.
    pub exhaustive: bool,
}

/// Searches coalitions up to `config.coalition_bound` for a joint deviation
/// that is profitable (under the configured notion) for every member.
/// Coalitions of two or fewer are scanned exhaustively, larger ones by
/// seeded sampling.
pub fn check_strong(config: &GameConfig, sincere: &Profile, putative: &Profile) -> Result<StrongOutcome> {
    if config.coalition_bound == 0 {
        return Err(Error::Precondition("coalition bound must be at least 1".into()));
    }
    if config.coalition_bound > sincere.n_men().min(sincere.n_women()) {
        return Err(Error::Precondition("coalition bound exceeds the smaller side".into()));
    }
    let current = config.evaluate(putative);
    let agents: Vec<AgentId> = config.strategic_agents(sincere).collect();
    let now: BTreeMap<AgentId, Vec<Entry>> = agents.iter().map(|a| (*a, current.partners(*a))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = StrongOutcome { violation: None, coalitions_checked: 0, deviations_checked: 0, exhaustive: true };
    for size in 1..=config.coalition_bound {
        for members in agents.iter().copied().combinations(size) {
            out.coalitions_checked += 1;
            let spaces: Vec<&[PreferenceList]> =
                members.iter().map(|a| all_lists(putative.list(*a).universe())).collect();
            let joint: Box<dyn Iterator<Item = Vec<PreferenceList>>> = if size <= 2 {
                Box::new(spaces.iter().map(|s| s.iter().copied()).multi_cartesian_product())
            } else {
                out.exhaustive = false;
                let picks: Vec<Vec<PreferenceList>> = (0..config.coalition_samples)
                    .map(|_| spaces.iter().map(|s| *s.choose(&mut rng).expect("non-empty")).collect())
                    .collect();
                Box::new(picks.into_iter())
            };
            for lists in joint {
                if members.iter().zip(&lists).all(|(a, l)| putative.list(*a) == l) {
                    continue;
                }
                out.deviations_checked += 1;
                let mut p = putative.clone();
                for (a, l) in members.iter().zip(&lists) {
                    p.set_list(*a, *l);
                }
                let d = config.evaluate(&p);
                let all_gain = members
                    .iter()
                    .all(|a| profitable_partners(sincere.list(*a), &now[a], &d.partners(*a), config.profitability));
                if all_gain {
                    out.violation = Some(CoalitionDeviation { members, lists, distribution: d });
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// Every support matching of the outcome is stable for the sincere lists.
/// Returns the blocking pairs found for each unstable support matching.
pub fn outcome_sincerely_stable(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
) -> (bool, Vec<(String, Vec<(usize, usize)>)>) {
    support_sincerely_stable(sincere, &config.evaluate(putative))
}

pub fn support_sincerely_stable(
    sincere: &Profile,
    outcome: &MatchDistribution,
) -> (bool, Vec<(String, Vec<(usize, usize)>)>) {
    let mut bad = Vec::new();
    for m in outcome.matchings() {
        let ir = crate::model::is_individually_rational(sincere, m);
        let bp = blocking_pairs(sincere, m);
        if !ir || !bp.is_empty() {
            bad.push((m.render(sincere.instance()), bp));
        }
    }
    (bad.is_empty(), bad)
}

/// Result of one notion for one agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail { witness: Witness },
    Error { message: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn from_check(profile: &Profile, r: Result<Option<DeviationOutcome>>) -> Self {
        match r {
            Ok(None) => Verdict::Pass,
            Ok(Some(d)) => Verdict::Fail { witness: Witness::new(profile, &d) },
            Err(e) => Verdict::Error { message: e.to_string() },
        }
    }
}

/// A rendered deviation for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub agent: String,
    pub list: String,
    pub outcome: Vec<(String, String)>,
}

impl Witness {
    pub fn new(profile: &Profile, d: &DeviationOutcome) -> Self {
        Witness {
            agent: profile.instance().name(d.agent).to_string(),
            list: render_list(profile, d.agent, &d.list),
            outcome: render_distribution(profile, &d.distribution),
        }
    }
}

pub fn render_list(profile: &Profile, agent: AgentId, list: &PreferenceList) -> String {
    let inst = profile.instance();
    list.entries()
        .map(|e| match e {
            Entry::Agent(i) => inst.name(AgentId { side: agent.side.opposite(), index: i }).to_string(),
            Entry::Single => "@".to_string(),
        })
        .join(" ")
}

pub fn render_distribution(profile: &Profile, d: &MatchDistribution) -> Vec<(String, String)> {
    d.support().iter().map(|(m, p)| (m.render(profile.instance()), p.to_string())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentReport {
    pub agent: String,
    pub strategic: bool,
    pub distance: String,
    pub partners: Vec<String>,
    pub verdicts: BTreeMap<Notion, Verdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrongReport {
    pub passed: bool,
    pub coalition_bound: usize,
    pub coalitions_checked: usize,
    pub deviations_checked: usize,
    pub exhaustive: bool,
    pub witness: Option<(Vec<String>, Vec<String>, Vec<(String, String)>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub schema: u32,
    pub mechanism: String,
    pub honesty: String,
    pub profitability: Profitability,
    pub local_swaps: LocalSwaps,
    pub outcome: Vec<(String, String)>,
    pub agents: Vec<AgentReport>,
    /// Conjunction of the per-agent verdicts for each notion.
    pub global: BTreeMap<Notion, bool>,
    pub strong: Option<StrongReport>,
    pub sincerely_stable: bool,
    pub blocking_pairs: Vec<(String, Vec<(String, String)>)>,
}

impl EquilibriumReport {
    pub fn holds(&self, notion: Notion) -> bool {
        match notion {
            Notion::Strong => self.strong.as_ref().is_some_and(|s| s.passed),
            n => self.global.get(&n).copied().unwrap_or(false),
        }
    }

    pub fn agent(&self, name: &str) -> Option<&AgentReport> {
        self.agents.iter().find(|a| a.agent == name)
    }
}

/// Evaluates the requested notions for every agent.
pub fn check(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    notions: &[Notion],
) -> Result<EquilibriumReport> {
    config.validate(sincere, putative)?;
    let current = config.evaluate(putative);
    let inst = sincere.instance();
    let mut agents = Vec::new();
    for a in sincere.agents() {
        let mut verdicts = BTreeMap::new();
        for n in notions {
            let v = match n {
                Notion::Nash => {
                    Verdict::from_check(sincere, Ok(nash_violation(config, sincere, putative, &current, a)))
                }
                Notion::MinDis => {
                    Verdict::from_check(sincere, min_dishonest_violation(config, sincere, putative, &current, a))
                }
                Notion::LocalMinDis => {
                    Verdict::from_check(sincere, local_violation(config, sincere, putative, &current, a))
                }
                Notion::Partial => {
                    Verdict::from_check(sincere, partial_violation(config, sincere, putative, &current, a))
                }
                Notion::Trunc => {
                    Verdict::from_check(sincere, truncation_violation(config, sincere, putative, &current, a))
                }
                Notion::Strong => continue,
            };
            verdicts.insert(*n, v);
        }
        agents.push(AgentReport {
            agent: inst.name(a).to_string(),
            strategic: config.is_strategic(a),
            distance: config.distance(sincere.list(a), putative.list(a)).to_string(),
            partners: current
                .partners(a)
                .into_iter()
                .map(|e| match e {
                    Entry::Agent(i) => inst.name(AgentId { side: a.side.opposite(), index: i }).to_string(),
                    Entry::Single => "@".to_string(),
                })
                .collect(),
            verdicts,
        });
    }
    let global = notions
        .iter()
        .filter(|n| **n != Notion::Strong)
        .map(|n| (*n, agents.iter().all(|r| r.verdicts[n].passed())))
        .collect();
    let strong = if notions.contains(&Notion::Strong) {
        let s = check_strong(config, sincere, putative)?;
        Some(StrongReport {
            passed: s.violation.is_none(),
            coalition_bound: config.coalition_bound,
            coalitions_checked: s.coalitions_checked,
            deviations_checked: s.deviations_checked,
            exhaustive: s.exhaustive,
            witness: s.violation.map(|v| {
                (
                    v.members.iter().map(|a| inst.name(*a).to_string()).collect(),
                    v.members.iter().zip(&v.lists).map(|(a, l)| render_list(sincere, *a, l)).collect(),
                    render_distribution(sincere, &v.distribution),
                )
            }),
        })
    } else {
        None
    };
    let (stable, bad) = support_sincerely_stable(sincere, &current);
    Ok(EquilibriumReport {
        schema: 1,
        mechanism: config.mechanism.name().to_string(),
        honesty: config.honesty.label(),
        profitability: config.profitability,
        local_swaps: config.local_swaps,
        outcome: render_distribution(sincere, &current),
        agents,
        global,
        strong,
        sincerely_stable: stable,
        blocking_pairs: bad
            .into_iter()
            .map(|(m, bp)| {
                let pairs = bp.into_iter().map(|(x, y)| (inst.men[x].clone(), inst.women[y].clone())).collect();
                (m, pairs)
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::load;
    use crate::mechanisms::{gale_shapley, Builtin, Proposing};

    fn e(i: usize) -> Entry {
        Entry::Agent(i)
    }

    #[test]
    fn comparison_classes() {
        let s = PreferenceList::from_indices(&[0, 1, 2, 3]).unwrap();
        assert_eq!(compare_partners(&s, &[e(1)], e(1)), Comparison::AllWeaklyBetter);
        assert_eq!(compare_partners(&s, &[e(0)], e(1)), Comparison::AllWeaklyBetter);
        assert_eq!(compare_partners(&s, &[e(1), e(2)], e(1)), Comparison::SomeStrictlyWorse);
        assert_eq!(compare_partners(&s, &[e(0), e(2)], e(1)), Comparison::Mixed);
        assert!(Comparison::Mixed.has_worse());
    }

    #[test]
    fn profitability_notions() {
        let s = PreferenceList::from_indices(&[0, 1, 2, 3]).unwrap();
        for n in [Profitability::Optimistic, Profitability::Guaranteed] {
            assert!(!profitable_partners(&s, &[e(1)], &[e(1)], n));
            assert!(profitable_partners(&s, &[e(1)], &[e(0)], n));
        }
        // Current lottery {k, worse}; a deviation securing k only helps
        // under the guaranteed notion.
        assert!(profitable_partners(&s, &[e(0), e(2)], &[e(0)], Profitability::Guaranteed));
        assert!(!profitable_partners(&s, &[e(0), e(2)], &[e(0)], Profitability::Optimistic));
        assert!(profitable_partners(&s, &[e(1)], &[e(0), e(2)], Profitability::Optimistic));
        assert!(!profitable_partners(&s, &[e(1)], &[e(0), e(2)], Profitability::Guaranteed));
    }

    #[test]
    fn partial_honesty_instance() {
        let sincere = load("partial_sincere").unwrap();
        let putative = load("partial_putative").unwrap();
        let cfg = GameConfig::new(Builtin::Uniform);
        let r = check(&cfg, &sincere, &putative, &[Notion::Nash, Notion::Partial, Notion::MinDis]).unwrap();
        assert!(r.holds(Notion::Nash));
        assert!(r.holds(Notion::Partial));
        assert!(!r.sincerely_stable);
        assert_eq!(r.outcome.len(), 1);
        assert!(!r.blocking_pairs[0].1.is_empty());
        // m1 reverting to the sincere list makes two matchings stable, one worse.
        let current = cfg.evaluate(&putative);
        let m1 = AgentId::man(0);
        let d = deviate(&cfg, &putative, m1, *sincere.list(m1));
        assert_eq!(d.distribution.support().len(), 2);
        let base = current.sure_partner(m1).unwrap();
        assert!(compare_against_partner(sincere.list(m1), m1, &d.distribution, base).has_worse());
    }

    #[test]
    fn truncation_instance_under_man_proposing() {
        let sincere = load("truncation_sincere").unwrap();
        let truncated = load("truncation_truncated").unwrap();
        let swapped = load("truncation_swapped").unwrap();
        let cfg = GameConfig::new(Builtin::GsMan);
        let w1 = AgentId::woman(0);
        let r = check(&cfg, &sincere, &truncated, &[Notion::Nash, Notion::Trunc]).unwrap();
        assert!(r.holds(Notion::Nash));
        assert!(r.holds(Notion::Trunc));
        assert_eq!(r.agent("w1").unwrap().partners, vec!["m1".to_string()]);
        // Truthful w1 gets m2; the swapped list gets her m1 without truncating.
        let honest = cfg.evaluate(&sincere);
        let dev = cfg.evaluate(&swapped);
        assert_eq!(honest.sure_partner(w1), Some(e(1)));
        assert_eq!(dev.sure_partner(w1), Some(e(0)));
        assert!(is_profitable(sincere.list(w1), w1, &honest, &dev, Profitability::Optimistic));
        let r = check(&cfg, &sincere, &swapped, &[Notion::MinDis, Notion::LocalMinDis]).unwrap();
        assert!(r.agent("w1").unwrap().verdicts[&Notion::MinDis].passed());
        assert!(r.agent("w1").unwrap().verdicts[&Notion::LocalMinDis].passed());
    }

    #[test]
    fn deeper_truncation_than_needed_fails() {
        let sincere = load("truncation_sincere").unwrap();
        let w1 = AgentId::woman(0);
        // w3 already gets her top choice, so cutting below it gains nothing.
        let w3 = AgentId::woman(2);
        let cut = sincere.list(w3).truncated_after(e(2));
        let putative = sincere.with_list(w3, cut);
        let cfg = GameConfig::new(Builtin::GsMan);
        let current = cfg.evaluate(&putative);
        assert!(truncation_violation(&cfg, &sincere, &putative, &current, w3).unwrap().is_some());
        // A non-truncation is rejected with a diagnostic.
        let swapped = load("truncation_swapped").unwrap();
        let cur = cfg.evaluate(&swapped);
        assert!(matches!(truncation_violation(&cfg, &sincere, &swapped, &cur, w1), Err(Error::NotATruncation(_))));
    }

    #[test]
    fn honest_agent_passes_everything_individual() {
        let p = Profile::from_indices(&[vec![0, 1, 2], vec![1, 0, 2]], &[vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let cfg = GameConfig::new(Builtin::Uniform);
        let r =
            check(&cfg, &p, &p, &[Notion::Nash, Notion::MinDis, Notion::LocalMinDis, Notion::Partial, Notion::Strong])
                .unwrap();
        for n in [Notion::Nash, Notion::MinDis, Notion::LocalMinDis, Notion::Partial, Notion::Strong] {
            assert!(r.holds(n), "{n}");
        }
    }

    #[test]
    fn truncating_below_an_individually_rational_matching_is_nash() {
        let sincere = load("egal_sincere1").unwrap();
        let mu = gale_shapley(&sincere, Proposing::Men);
        let mut p = sincere.clone();
        for a in sincere.agents() {
            p.set_list(a, sincere.list(a).truncated_after(mu.partner(a)));
        }
        let cfg = GameConfig::new(Builtin::Uniform);
        assert_eq!(cfg.evaluate(&p), MatchDistribution::deterministic(mu));
        let r = check(&cfg, &sincere, &p, &[Notion::Nash]).unwrap();
        assert!(r.holds(Notion::Nash));
    }

    #[test]
    fn pair_that_jointly_restores_honesty_is_a_coalition_witness() {
        // Mutual first choices m1-w1 and m2-w2; the putative lists pair
        // everyone with their second choice and no single agent can undo it.
        let sincere = Profile::from_indices(&[vec![0, 1, 2], vec![1, 0, 2]], &[vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let putative = Profile::from_indices(&[vec![1, 2, 0], vec![0, 2, 1]], &[vec![1, 2, 0], vec![0, 2, 1]]).unwrap();
        let cfg = GameConfig::new(Builtin::GsMan);
        let r = check(&cfg, &sincere, &putative, &[Notion::Nash, Notion::Strong]).unwrap();
        assert!(r.holds(Notion::Nash));
        let out = check_strong(&cfg, &sincere, &putative).unwrap();
        let v = out.violation.expect("pair deviation");
        assert_eq!(v.members.len(), 2);
        assert!(v.members.iter().all(|a| { v.distribution.sure_partner(*a) == Some(Entry::Agent(a.index)) }));
    }

    #[test]
    fn notion_lists_parse() {
        assert_eq!(Notion::parse_list("nash, mindis,nash").unwrap(), vec![Notion::Nash, Notion::MinDis]);
        assert!(Notion::parse_list("nash,bogus").is_err());
    }

    #[test]
    fn truncation_predicate() {
        let s = PreferenceList::from_indices(&[0, 1, 2, 3]).unwrap();
        assert!(is_truncation_of(&s, &s));
        assert!(is_truncation_of(&s, &PreferenceList::from_indices(&[0, 3, 1, 2]).unwrap()));
        assert!(is_truncation_of(&s, &PreferenceList::from_indices(&[3, 0, 1, 2]).unwrap()));
        assert!(!is_truncation_of(&s, &PreferenceList::from_indices(&[1, 0, 3, 2]).unwrap()));
    }
}
