//! Falsifiers for monotonicity, independence of non-spouses and full
//! randomization.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{random_instance, SelfPolicy};
use crate::format::{serialize_profile, SELF_MARKER};
use crate::game::all_lists;
use crate::mechanisms::{enumerate_stable_bounded, gale_shapley, MatchDistribution, Mechanism, Proposing};
use crate::model::{AgentId, Entry, Profile, Side, DEFAULT_MAX_SIDE};

/// Moves `promoted` from `position + 1` up to `position`, past `displaced`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SwapMove {
    pub agent: AgentId,
    pub position: usize,
    pub promoted: Entry,
    pub displaced: Entry,
}

impl SwapMove {
    /// The move promoting whatever sits at `from` by one place.
    pub fn at(profile: &Profile, agent: AgentId, from: usize) -> Result<Self> {
        let list = profile.try_list(agent)?;
        if from == 0 || from >= list.len() {
            return Err(Error::InvalidMove(format!("{agent} cannot promote position {from}")));
        }
        Ok(SwapMove { agent, position: from - 1, promoted: list.entry_at(from), displaced: list.entry_at(from - 1) })
    }

    /// Every single-step promotion in `profile`.
    pub fn all(profile: &Profile) -> Vec<SwapMove> {
        profile
            .agents()
            .flat_map(|a| (1..profile.list(a).len()).map(move |i| (a, i)))
            .map(|(a, i)| SwapMove::at(profile, a, i).expect("in range"))
            .collect()
    }

    fn validate(&self, profile: &Profile) -> Result<()> {
        let list = profile.try_list(self.agent)?;
        let ok = self.position + 1 < list.len()
            && list.entry_at(self.position) == self.displaced
            && list.entry_at(self.position + 1) == self.promoted;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMove(format!(
                "{} does not rank {:?} directly below {:?} at position {}",
                self.agent, self.promoted, self.displaced, self.position
            )))
        }
    }

    /// The profile after the move.
    pub fn apply(&self, profile: &Profile) -> Result<Profile> {
        self.validate(profile)?;
        let l = profile.list(self.agent).swapped(self.position, self.position + 1);
        Ok(profile.with_list(self.agent, l))
    }

    pub fn render(&self, profile: &Profile) -> String {
        let side = self.agent.side;
        format!(
            "{} promotes {} over {} to position {}",
            profile.instance().name(self.agent),
            entry_name(profile, side, self.promoted),
            entry_name(profile, side, self.displaced),
            self.position + 1
        )
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Monotonic,
    Ins,
    FullyRandomized,
}

impl Property {
    pub const ALL: [Property; 3] = [Property::Monotonic, Property::Ins, Property::FullyRandomized];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Monotonic => "monotonic",
            Property::Ins => "ins",
            Property::FullyRandomized => "fully-randomized",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown property `{s}`")))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyResult {
    NoViolationFound,
    Violated,
}

/// A concrete counterexample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyWitness {
    pub profile: String,
    pub agent: String,
    #[serde(rename = "move")]
    pub swap: Option<String>,
    /// `(partner, before, after)` marginals of the agent that break the
    /// property.
    pub marginals: Vec<(String, String, String)>,
    #[serde(skip)]
    pub raw: Option<(Profile, Option<SwapMove>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyVerdict {
    pub schema: u32,
    pub mechanism: String,
    pub property: Property,
    pub result: PropertyResult,
    pub witness: Option<PropertyWitness>,
    /// Profiles and moves examined.
    pub profiles_checked: u64,
    pub checks: u64,
}

impl PropertyVerdict {
    fn new(mechanism: &dyn Mechanism, property: Property) -> Self {
        PropertyVerdict {
            schema: 1,
            mechanism: mechanism.name().to_string(),
            property,
            result: PropertyResult::NoViolationFound,
            witness: None,
            profiles_checked: 0,
            checks: 0,
        }
    }

    pub fn violated(&self) -> bool {
        self.result == PropertyResult::Violated
    }

    fn absorb(&mut self, other: PropertyVerdict) {
        self.checks += other.checks;
        self.profiles_checked += other.profiles_checked;
        if self.witness.is_none() && other.violated() {
            self.result = PropertyResult::Violated;
            self.witness = other.witness;
        }
    }
}

fn entry_name(profile: &Profile, owner: Side, e: Entry) -> String {
    match e {
        Entry::Agent(j) => profile.instance().name(AgentId { side: owner.opposite(), index: j }).to_string(),
        Entry::Single => SELF_MARKER.to_string(),
    }
}

fn witness(
    profile: &Profile,
    agent: AgentId,
    swap: Option<SwapMove>,
    marginals: Vec<(Entry, Rational64, Rational64)>,
) -> PropertyWitness {
    PropertyWitness {
        profile: serialize_profile(profile),
        agent: profile.instance().name(agent).to_string(),
        swap: swap.map(|m| m.render(profile)),
        marginals: marginals
            .into_iter()
            .map(|(e, a, b)| (entry_name(profile, agent.side, e), a.to_string(), b.to_string()))
            .collect(),
        raw: Some((profile.clone(), swap)),
    }
}

fn single(mechanism: &dyn Mechanism, property: Property, w: Option<PropertyWitness>) -> PropertyVerdict {
    let mut v = PropertyVerdict::new(mechanism, property);
    v.checks = 1;
    if let Some(w) = w {
        v.result = PropertyResult::Violated;
        v.witness = Some(w);
    }
    v
}

fn monotonic_at(
    mechanism: &dyn Mechanism,
    profile: &Profile,
    before: &MatchDistribution,
    mv: SwapMove,
) -> Result<Option<PropertyWitness>> {
    let after = mechanism.evaluate(&mv.apply(profile)?);
    let (p, q) = (before.marginal(mv.agent, mv.promoted), after.marginal(mv.agent, mv.promoted));
    Ok((q < p).then(|| witness(profile, mv.agent, Some(mv), vec![(mv.promoted, p, q)])))
}

fn ins_at(
    mechanism: &dyn Mechanism,
    profile: &Profile,
    before: &MatchDistribution,
    mv: SwapMove,
) -> Result<Option<PropertyWitness>> {
    let moved = mv.apply(profile)?;
    if before.marginal(mv.agent, mv.displaced) != Rational64::from_integer(0) {
        return Ok(None);
    }
    let after = mechanism.evaluate(&moved);
    let k = profile.list(mv.agent).universe();
    let gains: Vec<_> = (0..k)
        .map(Entry::Agent)
        .chain(std::iter::once(Entry::Single))
        .filter(|e| *e != mv.promoted)
        .map(|e| (e, before.marginal(mv.agent, e), after.marginal(mv.agent, e)))
        .filter(|(_, p, q)| q > p)
        .collect();
    Ok((!gains.is_empty()).then(|| witness(profile, mv.agent, Some(mv), gains)))
}

/// Violated iff promoting `move.promoted` lowers its marginal.
pub fn check_monotonic_at(mechanism: &dyn Mechanism, profile: &Profile, mv: SwapMove) -> Result<PropertyVerdict> {
    let before = mechanism.evaluate(profile);
    Ok(single(mechanism, Property::Monotonic, monotonic_at(mechanism, profile, &before, mv)?))
}

/// When the displaced entry had probability zero, violated iff some
/// entry other than the promoted one gains probability. Moves displacing
/// a possible partner pass vacuously.
pub fn check_ins_at(mechanism: &dyn Mechanism, profile: &Profile, mv: SwapMove) -> Result<PropertyVerdict> {
    let before = mechanism.evaluate(profile);
    Ok(single(mechanism, Property::Ins, ins_at(mechanism, profile, &before, mv)?))
}

/// Violated iff some agent is sure of a partner while another stable
/// matching gives it someone else.
pub fn check_fully_randomized_at(mechanism: &dyn Mechanism, profile: &Profile) -> Result<PropertyVerdict> {
    let stable = enumerate_stable_bounded(profile, DEFAULT_MAX_SIDE)?;
    let dist = mechanism.evaluate(profile);
    let mut found = None;
    'outer: for a in profile.agents() {
        if let Some(p) = dist.sure_partner(a) {
            if stable.iter().any(|m| m.partner(a) != p) {
                let one = Rational64::from_integer(1);
                found = Some(witness(profile, a, None, vec![(p, one, one)]));
                break 'outer;
            }
        }
    }
    Ok(single(mechanism, Property::FullyRandomized, found))
}

/// Checks `property` at `profile` over every single-step move.
pub fn check_profile(mechanism: &dyn Mechanism, property: Property, profile: &Profile) -> Result<PropertyVerdict> {
    let mut v = PropertyVerdict::new(mechanism, property);
    v.profiles_checked = 1;
    if property == Property::FullyRandomized {
        let r = check_fully_randomized_at(mechanism, profile)?;
        v.absorb(r);
        return Ok(v);
    }
    let before = mechanism.evaluate(profile);
    for mv in SwapMove::all(profile) {
        v.checks += 1;
        let w = match property {
            Property::Monotonic => monotonic_at(mechanism, profile, &before, mv)?,
            _ => ins_at(mechanism, profile, &before, mv)?,
        };
        if let Some(w) = w {
            v.result = PropertyResult::Violated;
            v.witness = Some(w);
            break;
        }
    }
    Ok(v)
}

/// Seeded random profiles of size `n`, each checked exhaustively over
/// its moves. Stops at the first violation.
pub fn property_sweep(
    mechanism: &dyn Mechanism,
    property: Property,
    n: usize,
    trials: usize,
    seed: u64,
    policy: SelfPolicy,
) -> Result<PropertyVerdict> {
    let mut total = PropertyVerdict::new(mechanism, property);
    for t in 0..trials {
        let p = random_instance(n, n, seed.wrapping_add(t as u64), policy)?;
        total.absorb(check_profile(mechanism, property, &p)?);
        if total.violated() {
            break;
        }
    }
    Ok(total)
}

/// Every profile with `n` agents per side (`n ≤ 2`).
pub fn property_exhaustive(mechanism: &dyn Mechanism, property: Property, n: usize) -> Result<PropertyVerdict> {
    if n == 0 || n > 2 {
        return Err(Error::SizeBound { size: n, max: 2 });
    }
    let lists = all_lists(n);
    let mut total = PropertyVerdict::new(mechanism, property);
    for combo in (0..2 * n).map(|_| lists.iter().copied()).multi_cartesian_product() {
        let p = Profile::canonical(combo[..n].to_vec(), combo[n..].to_vec())?;
        total.absorb(check_profile(mechanism, property, &p)?);
        if total.violated() {
            break;
        }
    }
    Ok(total)
}

/// Returns the woman-optimal matching unless m1 ranks w2 first, in which
/// case it returns the man-optimal one.
#[derive(Copy, Clone, Debug, Default)]
pub struct FlipDouble;

impl Mechanism for FlipDouble {
    fn name(&self) -> &str {
        "flip-double"
    }

    fn evaluate(&self, profile: &Profile) -> MatchDistribution {
        let side = if profile.man(0).entry_at(0) == Entry::Agent(1) { Proposing::Men } else { Proposing::Women };
        MatchDistribution::deterministic(gale_shapley(profile, side))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::load;
    use crate::mechanisms::Builtin;

    #[test]
    fn move_construction() {
        let p = load("egal_sincere1").unwrap();
        assert_eq!(SwapMove::all(&p).len(), 8 * 4);
        let mv = SwapMove::at(&p, AgentId::man(0), 1).unwrap();
        assert_eq!(mv.promoted, Entry::Agent(1));
        assert_eq!(mv.displaced, Entry::Agent(0));
        let q = mv.apply(&p).unwrap();
        assert_eq!(q.man(0).entry_at(0), Entry::Agent(1));
        assert!(SwapMove::at(&p, AgentId::man(0), 0).is_err());
        let stale = SwapMove { position: 2, ..mv };
        assert!(matches!(stale.apply(&p), Err(Error::InvalidMove(_))));
    }

    #[test]
    fn gale_shapley_is_monotonic_and_ins_on_the_four_agent_instance() {
        let p = load("egal_sincere1").unwrap();
        for m in [Builtin::GsMan, Builtin::GsWoman] {
            assert!(!check_profile(&m, Property::Monotonic, &p).unwrap().violated());
            assert!(!check_profile(&m, Property::Ins, &p).unwrap().violated());
        }
    }

    #[test]
    fn egalitarian_lottery_passes_on_its_instances() {
        let p = load("no_eq_sincere").unwrap();
        assert!(!check_profile(&Builtin::UniformEgal, Property::Monotonic, &p).unwrap().violated());
        let q = load("placement_sincere").unwrap();
        assert!(!check_profile(&Builtin::UniformEgal, Property::Ins, &q).unwrap().violated());
    }

    #[test]
    fn vacuous_ins_move() {
        let p = load("egal_sincere1").unwrap();
        // m1 is matched to w1 under gs-man; displacing w1 is vacuous.
        let mv = SwapMove::at(&p, AgentId::man(0), 1).unwrap();
        assert_eq!(Builtin::GsMan.evaluate(&p).marginal(AgentId::man(0), Entry::Agent(0)), Rational64::from_integer(1));
        assert!(!check_ins_at(&FlipDouble, &p, mv).unwrap().violated());
    }

    #[test]
    fn deferred_acceptance_is_not_fully_randomized() {
        let p = load("egal_sincere1").unwrap();
        let v = check_fully_randomized_at(&Builtin::GsMan, &p).unwrap();
        assert!(v.violated());
        let w = v.witness.unwrap();
        assert_eq!(w.agent, "m1");
        assert_eq!(w.marginals[0].0, "w1");
        assert!(!check_fully_randomized_at(&Builtin::Uniform, &p).unwrap().violated());
        let unique = Profile::from_indices(&[vec![0, 1, 2], vec![1, 0, 2]], &[vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        assert!(crate::mechanisms::has_unique_stable(&unique));
        for m in Builtin::ALL {
            assert!(!check_fully_randomized_at(&m, &unique).unwrap().violated());
        }
    }

    #[test]
    fn flip_double_breaks_monotonicity() {
        let v = property_sweep(&FlipDouble, Property::Monotonic, 3, 1000, 7, SelfPolicy::Uniform).unwrap();
        assert!(v.violated());
        assert_eq!(v.profiles_checked, 740);
        let w = v.witness.clone().unwrap();
        assert_eq!(w.swap.as_deref(), Some("m1 promotes w1 over w2 to position 1"));
        assert_eq!(w.marginals, vec![("w1".to_string(), "1".to_string(), "0".to_string())]);
        assert!(w.profile.contains("m1: w2 w1 w3 @"));
        let (profile, mv) = w.raw.clone().unwrap();
        let again = check_monotonic_at(&FlipDouble, &profile, mv.unwrap()).unwrap();
        assert!(again.violated());
        assert_eq!(property_sweep(&FlipDouble, Property::Monotonic, 3, 1000, 7, SelfPolicy::Uniform).unwrap(), v);
    }

    #[test]
    fn sweeps_on_builtins() {
        assert!(!property_sweep(&Builtin::GsMan, Property::Monotonic, 3, 200, 7, SelfPolicy::AlwaysLast)
            .unwrap()
            .violated());
        assert!(!property_sweep(&Builtin::Uniform, Property::FullyRandomized, 3, 200, 7, SelfPolicy::AlwaysLast)
            .unwrap()
            .violated());
    }
}
