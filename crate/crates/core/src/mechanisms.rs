//! Stable matching mechanisms and their exact-probability outputs.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentId, Entry, Matching, PreferenceList, Profile, Side};

/// Which side makes proposals in deferred acceptance.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Proposing {
    Men,
    Women,
}

/// One step of a deferred-acceptance run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub proposer: AgentId,
    pub receiver: AgentId,
    pub accepted: bool,
}

/// Deferred acceptance over raw lists; returns the proposers' partners.
/// The lowest-indexed free proposer with proposals left always moves next.
fn deferred_acceptance(
    proposers: &[PreferenceList],
    receivers: &[PreferenceList],
    mut trace: Option<&mut Vec<(usize, usize, bool)>>,
) -> Vec<Entry> {
    let np = proposers.len();
    let mut next = vec![0usize; np];
    let mut held: Vec<Option<usize>> = vec![None; receivers.len()];
    let mut engaged = vec![false; np];
    loop {
        let Some(p) = (0..np).find(|&p| !engaged[p] && next[p] < proposers[p].self_position()) else {
            break;
        };
        let r = match proposers[p].entry_at(next[p]) {
            Entry::Agent(r) => r,
            Entry::Single => unreachable!("proposals stop at the sentinel"),
        };
        next[p] += 1;
        let current = held[r].map_or(Entry::Single, Entry::Agent);
        let accepted = receivers[r].prefers(Entry::Agent(p), current);
        if accepted {
            if let Some(old) = held[r] {
                engaged[old] = false;
            }
            held[r] = Some(p);
            engaged[p] = true;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push((p, r, accepted));
        }
    }
    let mut out = vec![Entry::Single; np];
    for (r, h) in held.iter().enumerate() {
        if let Some(p) = *h {
            out[p] = Entry::Agent(r);
        }
    }
    out
}

/// Deferred acceptance with the given side proposing. The result is stable
/// and optimal for the proposing side.
pub fn gale_shapley(profile: &Profile, side: Proposing) -> Matching {
    gale_shapley_traced(profile, side).0
}

/// As [`gale_shapley`], also returning every proposal in order.
pub fn gale_shapley_traced(profile: &Profile, side: Proposing) -> (Matching, Vec<Proposal>) {
    let mut raw = Vec::new();
    let (matching, ps, rs) = match side {
        Proposing::Men => {
            let men = deferred_acceptance(profile.men(), profile.women(), Some(&mut raw));
            (Matching::from_men(men, profile.n_women()).expect("DA yields a matching"), Side::Man, Side::Woman)
        }
        Proposing::Women => {
            let women = deferred_acceptance(profile.women(), profile.men(), Some(&mut raw));
            let m = Matching::from_men(women, profile.n_men()).expect("DA yields a matching").transposed();
            (m, Side::Woman, Side::Man)
        }
    };
    let trace = raw
        .into_iter()
        .map(|(p, r, accepted)| Proposal {
            proposer: AgentId { side: ps, index: p },
            receiver: AgentId { side: rs, index: r },
            accepted,
        })
        .collect();
    (matching, trace)
}

fn gs_fast(profile: &Profile, side: Proposing) -> Matching {
    match side {
        Proposing::Men => {
            Matching::from_men(deferred_acceptance(profile.men(), profile.women(), None), profile.n_women())
                .expect("DA yields a matching")
        }
        Proposing::Women => {
            Matching::from_men(deferred_acceptance(profile.women(), profile.men(), None), profile.n_men())
                .expect("DA yields a matching")
                .transposed()
        }
    }
}

/// Every stable matching, in canonical (men's partner vector) order.
///
/// Men are assigned one at a time to mutually acceptable free women or to
/// themselves; a branch is cut as soon as a pair whose partners are both
/// already fixed blocks it.
pub fn enumerate_stable(profile: &Profile) -> Vec<Matching> {
    let nm = profile.n_men();
    let nw = profile.n_women();
    let mut men = vec![Entry::Single; nm];
    let mut women: Vec<Option<usize>> = vec![None; nw];
    let mut out = Vec::new();
    enumerate_rec(profile, 0, &mut men, &mut women, &mut out);
    out.sort();
    out
}

/// As [`enumerate_stable`], refusing instances above `max_side` per side.
pub fn enumerate_stable_bounded(profile: &Profile, max_side: usize) -> Result<Vec<Matching>> {
    let size = profile.n_men().max(profile.n_women());
    if size > max_side {
        return Err(Error::SizeBound { size, max: max_side });
    }
    Ok(enumerate_stable(profile))
}

fn enumerate_rec(
    profile: &Profile,
    m: usize,
    men: &mut Vec<Entry>,
    women: &mut Vec<Option<usize>>,
    out: &mut Vec<Matching>,
) {
    let nm = profile.n_men();
    if m == nm {
        // Remaining pairs involve a single woman, whose partner is now known.
        for (mm, &mp) in men.iter().enumerate() {
            let ml = profile.man(mm);
            for w in ml.acceptable() {
                if women[w].is_none() && ml.prefers(Entry::Agent(w), mp) && profile.woman(w).is_acceptable(mm) {
                    return;
                }
            }
        }
        let m = Matching::from_men(men.clone(), profile.n_women()).expect("assignment is injective");
        out.push(m);
        return;
    }
    let ml = profile.man(m);
    let options = ml.acceptable().map(Entry::Agent).chain(std::iter::once(Entry::Single));
    for choice in options {
        if let Entry::Agent(w) = choice {
            if women[w].is_some() || !profile.woman(w).is_acceptable(m) {
                continue;
            }
            women[w] = Some(m);
        }
        men[m] = choice;
        if !partial_blocked(profile, m, men, women) {
            enumerate_rec(profile, m + 1, men, women, out);
        }
        if let Entry::Agent(w) = choice {
            women[w] = None;
        }
        men[m] = Entry::Single;
    }
}

/// Checks pairs that became decidable after fixing man `m`.
fn partial_blocked(profile: &Profile, m: usize, men: &[Entry], women: &[Option<usize>]) -> bool {
    let ml = profile.man(m);
    let mp = men[m];
    // m with any already-taken woman he prefers to his partner.
    for pos in 0..ml.position(mp) {
        if let Entry::Agent(w) = ml.entry_at(pos) {
            if let Some(h) = women[w] {
                if h != m && profile.woman(w).prefers(Entry::Agent(m), Entry::Agent(h)) {
                    return true;
                }
            }
        }
    }
    // earlier men with the woman m just took.
    if let Entry::Agent(w) = mp {
        let wl = profile.woman(w);
        for (prev, &pp) in men.iter().enumerate().take(m) {
            if wl.prefers(Entry::Agent(prev), Entry::Agent(m)) && profile.man(prev).prefers(Entry::Agent(w), pp) {
                return true;
            }
        }
    }
    false
}

/// Whether `profile` has exactly one stable matching, decided by comparing
/// the two deferred-acceptance extremes.
pub fn has_unique_stable(profile: &Profile) -> bool {
    gs_fast(profile, Proposing::Men) == gs_fast(profile, Proposing::Women)
}

/// Sum over all agents of the rank of their partner. A matched agent's rank
/// counts only opposite-side agents; a single agent is charged the rank of
/// the sentinel in their own list.
pub fn egalitarian_cost(profile: &Profile, matching: &Matching) -> u64 {
    profile
        .agents()
        .map(|a| {
            let list = profile.list(a);
            let partner = matching.partner(a);
            let pos = list.position(partner);
            let skip = usize::from(partner != Entry::Single && list.self_position() < pos);
            (pos + 1 - skip) as u64
        })
        .sum()
}

/// A probability distribution over matchings with exact rational weights.
/// Support is kept sorted by matching and free of duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MatchDistribution {
    support: Vec<(Matching, Rational64)>,
}

impl MatchDistribution {
    pub fn deterministic(m: Matching) -> Self {
        MatchDistribution { support: vec![(m, Rational64::from_integer(1))] }
    }

    /// Equal weight on each (distinct) matching. Panics on an empty set.
    pub fn uniform(mut ms: Vec<Matching>) -> Self {
        ms.sort();
        ms.dedup();
        assert!(!ms.is_empty(), "uniform distribution over an empty set");
        let p = Rational64::new(1, ms.len() as i64);
        MatchDistribution { support: ms.into_iter().map(|m| (m, p)).collect() }
    }

    /// Builds from explicit weights, merging duplicates and dropping zeros.
    pub fn from_weights(weights: Vec<(Matching, Rational64)>) -> Result<Self> {
        let mut ws = weights;
        ws.sort_by(|a, b| a.0.cmp(&b.0));
        let mut support: Vec<(Matching, Rational64)> = Vec::new();
        for (m, p) in ws {
            if p < Rational64::from_integer(0) {
                return Err(Error::Precondition("negative probability".into()));
            }
            match support.last_mut() {
                Some((last, q)) if *last == m => *q += p,
                _ => support.push((m, p)),
            }
        }
        support.retain(|(_, p)| *p != Rational64::from_integer(0));
        let total: Rational64 = support.iter().map(|(_, p)| *p).sum();
        if total != Rational64::from_integer(1) {
            return Err(Error::Precondition(format!("probabilities sum to {total}")));
        }
        Ok(MatchDistribution { support })
    }

    pub fn support(&self) -> &[(Matching, Rational64)] {
        &self.support
    }

    pub fn matchings(&self) -> impl Iterator<Item = &Matching> {
        self.support.iter().map(|(m, _)| m)
    }

    pub fn is_deterministic(&self) -> bool {
        self.support.len() == 1
    }

    /// The single matching of a deterministic outcome.
    pub fn single(&self) -> Option<&Matching> {
        match self.support.as_slice() {
            [(m, _)] => Some(m),
            _ => None,
        }
    }

    pub fn probability_of(&self, m: &Matching) -> Rational64 {
        self.support.iter().find(|(x, _)| x == m).map_or(Rational64::from_integer(0), |(_, p)| *p)
    }

    /// `p_ij`: probability that `agent` is matched to `entry`.
    pub fn marginal(&self, agent: AgentId, entry: Entry) -> Rational64 {
        self.support.iter().filter(|(m, _)| m.partner(agent) == entry).map(|(_, p)| *p).sum()
    }

    /// Distinct partners the agent may receive, in list-independent order.
    pub fn partners(&self, agent: AgentId) -> Vec<Entry> {
        let mut ps: Vec<Entry> = self.support.iter().map(|(m, _)| m.partner(agent)).collect();
        ps.sort();
        ps.dedup();
        ps
    }

    /// The agent's partner if it is the same in every support matching.
    pub fn sure_partner(&self, agent: AgentId) -> Option<Entry> {
        match self.partners(agent).as_slice() {
            [e] => Some(*e),
            _ => None,
        }
    }
}

/// `p_ij` for every agent and every entry of its universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarginalMatrix {
    /// `men[i][j]`, with the last column for staying single.
    pub men: Vec<Vec<Rational64>>,
    pub women: Vec<Vec<Rational64>>,
}

impl MarginalMatrix {
    pub fn get(&self, agent: AgentId, entry: Entry) -> Rational64 {
        let row = match agent.side {
            Side::Man => &self.men[agent.index],
            Side::Woman => &self.women[agent.index],
        };
        match entry {
            Entry::Agent(j) => row[j],
            Entry::Single => *row.last().expect("non-empty row"),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &Vec<Rational64>> {
        self.men.iter().chain(self.women.iter())
    }
}

pub fn marginals(dist: &MatchDistribution) -> MarginalMatrix {
    let first = &dist.support[0].0;
    let (nm, nw) = (first.n_men(), first.n_women());
    let zero = Rational64::from_integer(0);
    let mut men = vec![vec![zero; nw + 1]; nm];
    let mut women = vec![vec![zero; nm + 1]; nw];
    for (m, p) in &dist.support {
        for (i, e) in m.men().iter().enumerate() {
            men[i][e.agent().unwrap_or(nw)] += *p;
        }
        for (j, e) in m.women().iter().enumerate() {
            women[j][e.agent().unwrap_or(nm)] += *p;
        }
    }
    MarginalMatrix { men, women }
}

pub fn uniform_stable(profile: &Profile) -> MatchDistribution {
    MatchDistribution::uniform(enumerate_stable(profile))
}

fn egalitarian_set(profile: &Profile) -> Vec<Matching> {
    let stable = enumerate_stable(profile);
    let costs: Vec<u64> = stable.iter().map(|m| egalitarian_cost(profile, m)).collect();
    let best = *costs.iter().min().expect("stable set is never empty");
    stable.into_iter().zip(costs).filter(|(_, c)| *c == best).map(|(m, _)| m).collect()
}

/// Uniform over the stable matchings of minimum egalitarian cost.
pub fn uniform_egalitarian(profile: &Profile) -> MatchDistribution {
    MatchDistribution::uniform(egalitarian_set(profile))
}

/// The lexicographically least egalitarian stable matching.
pub fn egalitarian_lex(profile: &Profile) -> Matching {
    egalitarian_set(profile).into_iter().next().expect("non-empty")
}

/// Declared properties, used for reporting and for deciding which
/// structural shortcuts are sound.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismProperties {
    pub deterministic: bool,
    pub monotonic: bool,
    pub ins: bool,
    pub fully_randomized: bool,
    /// Output depends only on each list's part above the sentinel.
    pub truncation_invariant: bool,
}

/// A function from submitted profiles to distributions over stable
/// matchings. Implementations must be pure.
pub trait Mechanism: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, profile: &Profile) -> MatchDistribution;
    fn properties(&self) -> MechanismProperties {
        MechanismProperties::default()
    }
}

/// The mechanisms available from the command line.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Builtin {
    #[serde(rename = "gs-man")]
    GsMan,
    #[serde(rename = "gs-woman")]
    GsWoman,
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "uniform-egal")]
    UniformEgal,
    #[serde(rename = "egal-lex")]
    EgalLex,
}

impl Builtin {
    pub const ALL: [Builtin; 5] =
        [Builtin::GsMan, Builtin::GsWoman, Builtin::Uniform, Builtin::UniformEgal, Builtin::EgalLex];

    pub fn as_str(self) -> &'static str {
        match self {
            Builtin::GsMan => "gs-man",
            Builtin::GsWoman => "gs-woman",
            Builtin::Uniform => "uniform",
            Builtin::UniformEgal => "uniform-egal",
            Builtin::EgalLex => "egal-lex",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL.into_iter().find(|b| b.as_str() == s).ok_or_else(|| Error::UnknownMechanism(s.to_string()))
    }
}

impl Mechanism for Builtin {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn evaluate(&self, profile: &Profile) -> MatchDistribution {
        match self {
            Builtin::GsMan => MatchDistribution::deterministic(gs_fast(profile, Proposing::Men)),
            Builtin::GsWoman => MatchDistribution::deterministic(gs_fast(profile, Proposing::Women)),
            Builtin::Uniform => uniform_stable(profile),
            Builtin::UniformEgal => uniform_egalitarian(profile),
            Builtin::EgalLex => MatchDistribution::deterministic(egalitarian_lex(profile)),
        }
    }

    fn properties(&self) -> MechanismProperties {
        let base = MechanismProperties { truncation_invariant: true, ..Default::default() };
        match self {
            Builtin::GsMan | Builtin::GsWoman => {
                MechanismProperties { deterministic: true, monotonic: true, ins: true, ..base }
            }
            Builtin::Uniform => MechanismProperties { monotonic: true, ins: true, fully_randomized: true, ..base },
            Builtin::UniformEgal => MechanismProperties { monotonic: true, ins: true, ..base },
            Builtin::EgalLex => MechanismProperties { deterministic: true, ..base },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::load;
    use crate::model::{blocking_pairs, is_stable};

    fn mm(pairs: &[(usize, usize)]) -> Matching {
        Matching::from_pairs(4, 4, pairs).unwrap()
    }

    /// Matchings of the stable-set table for Π¹ and Π².
    fn table2() -> Vec<Matching> {
        vec![
            mm(&[(0, 0), (1, 1), (2, 2), (3, 3)]),
            mm(&[(0, 1), (1, 2), (2, 0), (3, 3)]),
            mm(&[(0, 2), (1, 0), (2, 1), (3, 3)]),
        ]
    }

    #[test]
    fn stable_set_of_table_one() {
        let mut expect = table2();
        expect.sort();
        assert_eq!(enumerate_stable(&load("egal_sincere1").unwrap()), expect);
        assert_eq!(enumerate_stable(&load("egal_sincere2").unwrap()), expect);
    }

    #[test]
    fn everyone_prefers_single() {
        let p = Profile::from_indices(&[vec![2, 0, 1], vec![2, 1, 0]], &[vec![2, 0, 1], vec![2, 1, 0]]).unwrap();
        assert_eq!(enumerate_stable(&p), vec![Matching::all_single(2, 2)]);
    }

    #[test]
    fn man_proposing_trace_on_updated_putative_table() {
        let p = load("egal_putative1").unwrap();
        let (m, trace) = gale_shapley_traced(&p, Proposing::Men);
        assert_eq!(m, table2()[1]);
        let steps: Vec<(String, String, bool)> =
            trace.iter().map(|t| (t.proposer.to_string(), t.receiver.to_string(), t.accepted)).collect();
        let expect = [
            ("m1", "w1", false),
            ("m1", "w2", true),
            ("m2", "w2", false),
            ("m2", "w3", true),
            ("m3", "w3", false),
            ("m3", "w1", true),
            ("m4", "w4", true),
        ];
        assert_eq!(steps.len(), expect.len());
        for (got, want) in steps.iter().zip(expect) {
            assert_eq!((got.0.as_str(), got.1.as_str(), got.2), want);
        }
    }

    #[test]
    fn mutual_first_choices_give_identity() {
        let p = Profile::from_indices(
            &[vec![0, 2, 1, 3], vec![1, 3, 0, 2], vec![2, 1, 0, 3]],
            &[vec![0, 3, 2, 1], vec![1, 0, 3, 2], vec![2, 0, 1, 3]],
        )
        .unwrap();
        let id = Matching::from_pairs(3, 3, &[(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(gale_shapley(&p, Proposing::Men), id);
        assert_eq!(gale_shapley(&p, Proposing::Women), id);
    }

    #[test]
    fn no_equilibrium_instance_man_optimal() {
        let p = load("no_eq_sincere").unwrap();
        let stable = enumerate_stable(&p);
        assert_eq!(stable.len(), 2);
        // The stable matching every man weakly prefers.
        let best = stable
            .iter()
            .find(|m| stable.iter().all(|o| (0..3).all(|i| !p.man(i).prefers(o.men()[i], m.men()[i]))))
            .unwrap()
            .clone();
        assert_eq!(best, Matching::from_pairs(3, 3, &[(0, 0), (1, 1), (2, 2)]).unwrap());
        assert_eq!(gale_shapley(&p, Proposing::Men), best);
    }

    #[test]
    fn egalitarian_numbers_of_the_placement_instance() {
        let p = load("placement_sincere").unwrap();
        let mu1 = mm(&[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let mu2 = mm(&[(0, 1), (1, 0), (2, 2), (3, 3)]);
        let mu3 = mm(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(enumerate_stable(&p), vec![mu2.clone(), mu1.clone()]);
        assert_eq!(egalitarian_cost(&p, &mu1), 14);
        assert_eq!(egalitarian_cost(&p, &mu2), 14);
        assert!(!is_stable(&p, &mu3));
        assert!(blocking_pairs(&p, &mu3).contains(&(1, 2)));
        let half = Rational64::new(1, 2);
        let d = uniform_egalitarian(&p);
        assert_eq!(d.support(), &[(mu2.clone(), half), (mu1.clone(), half)]);

        // After w3's deviation mu2 stays stable and drops to 13 as well, so
        // the egalitarian draw is split between mu2 and mu3.
        let q = load("placement_deviation").unwrap();
        assert_eq!(enumerate_stable(&q), vec![mu3.clone(), mu2.clone(), mu1.clone()]);
        assert_eq!(egalitarian_cost(&q, &mu3), 13);
        assert_eq!(egalitarian_cost(&q, &mu2), 13);
        assert_eq!(egalitarian_cost(&q, &mu1), 14);
        assert_eq!(uniform_egalitarian(&q).support(), &[(mu3, half), (mu2, half)]);
    }

    #[test]
    fn mutual_first_choice_cost() {
        let p = Profile::from_indices(&[vec![0, 1, 2], vec![1, 0, 2]], &[vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let id = Matching::from_pairs(2, 2, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(egalitarian_cost(&p, &id), 4);
    }

    #[test]
    fn single_agents_pay_the_sentinel_rank() {
        // m1: w1 @ ; w1: @ m1 -> both single. m1 pays 2, w1 pays 1.
        let p = Profile::from_indices(&[vec![0, 1]], &[vec![1, 0]]).unwrap();
        assert_eq!(egalitarian_cost(&p, &Matching::all_single(1, 1)), 3);
    }

    #[test]
    fn uniform_on_table_one_and_its_marginals() {
        let p = load("egal_sincere1").unwrap();
        let d = uniform_stable(&p);
        let third = Rational64::new(1, 3);
        assert_eq!(d.support().len(), 3);
        assert!(d.support().iter().all(|(_, q)| *q == third));
        let mx = marginals(&d);
        assert_eq!(mx.get(AgentId::man(3), Entry::Agent(3)), Rational64::from_integer(1));
        assert_eq!(mx.get(AgentId::man(0), Entry::Agent(0)), third);
        for row in mx.rows() {
            assert_eq!(row.iter().copied().sum::<Rational64>(), Rational64::from_integer(1));
        }
    }

    #[test]
    fn deterministic_marginals_are_indicator() {
        let m = mm(&[(0, 1), (2, 3)]);
        let mx = marginals(&MatchDistribution::deterministic(m.clone()));
        for a in (0..4).map(AgentId::man).chain((0..4).map(AgentId::woman)) {
            for j in 0..=4 {
                let e = if j == 4 { Entry::Single } else { Entry::Agent(j) };
                let want = i64::from(m.partner(a) == e);
                assert_eq!(mx.get(a, e), Rational64::from_integer(want));
            }
        }
    }

    #[test]
    fn from_weights_validates() {
        let a = mm(&[(0, 0)]);
        let b = mm(&[(0, 1)]);
        assert!(MatchDistribution::from_weights(vec![(a.clone(), Rational64::new(1, 2))]).is_err());
        let d = MatchDistribution::from_weights(vec![
            (b.clone(), Rational64::new(1, 4)),
            (a.clone(), Rational64::new(1, 2)),
            (b.clone(), Rational64::new(1, 4)),
        ])
        .unwrap();
        assert_eq!(d.support(), &[(a, Rational64::new(1, 2)), (b, Rational64::new(1, 2))]);
    }

    #[test]
    fn mechanism_names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.as_str().parse::<Builtin>().unwrap(), b);
        }
        assert!("median".parse::<Builtin>().is_err());
    }

    #[test]
    fn bounded_enumeration_refuses_large_instances() {
        let p = load("egal_sincere1").unwrap();
        assert!(matches!(enumerate_stable_bounded(&p, 3), Err(Error::SizeBound { size: 4, max: 3 })));
    }
}
