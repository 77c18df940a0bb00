//! Agents, strict preference lists, profiles and matchings.
//!
//! Every list ranks the whole opposite side plus a `Single` sentinel standing
//! for "remain unmatched". Agents listed below the sentinel are unacceptable.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on agents per side. Strategy spaces grow as `(n + 1)!`, so the
/// practical bound (see [`DEFAULT_MAX_SIDE`]) is lower.
pub const MAX_SIDE: usize = 8;
/// Default configured bound on agents per side.
pub const DEFAULT_MAX_SIDE: usize = 6;
const CAP: usize = MAX_SIDE + 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Man,
    Woman,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Man => Side::Woman,
            Side::Woman => Side::Man,
        }
    }

    fn prefix(self) -> char {
        match self {
            Side::Man => 'm',
            Side::Woman => 'w',
        }
    }
}

/// An agent of an instance. Ordered men first, then by index.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub const fn man(index: usize) -> Self {
        AgentId { side: Side::Man, index }
    }

    pub const fn woman(index: usize) -> Self {
        AgentId { side: Side::Woman, index }
    }

    /// Parses canonical names such as `m3` or `w1`.
    pub fn parse(text: &str) -> Result<Self> {
        let side = match text.chars().next() {
            Some('m') => Side::Man,
            Some('w') => Side::Woman,
            _ => return Err(Error::UnknownAgent(text.to_string())),
        };
        let number: usize = text[1..].parse().map_err(|_| Error::UnknownAgent(text.to_string()))?;
        if number == 0 {
            return Err(Error::UnknownAgent(text.to_string()));
        }
        Ok(AgentId { side, index: number - 1 })
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.side.prefix(), self.index + 1)
    }
}

/// One position of a preference list: an opposite-side agent or the
/// "stay single" sentinel.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entry {
    Agent(usize),
    Single,
}

impl Entry {
    pub fn agent(self) -> Option<usize> {
        match self {
            Entry::Agent(i) => Some(i),
            Entry::Single => None,
        }
    }

    /// Canonical display for an entry of a list owned by a `owner` agent.
    pub fn label(self, owner: Side) -> String {
        match self {
            Entry::Agent(i) => AgentId { side: owner.opposite(), index: i }.to_string(),
            Entry::Single => "@".to_string(),
        }
    }
}

/// 1-based position of an entry in a list.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rank(pub usize);

/// A strict total order over `k` opposite-side agents plus the `Single`
/// sentinel. Stored inline so lists are `Copy`; the sentinel uses code `k`.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceList {
    len: u8,
    order: [u8; CAP],
    rank: [u8; CAP],
}

impl PreferenceList {
    pub fn new(entries: &[Entry]) -> Result<Self> {
        let len = entries.len();
        if len == 0 || len > CAP {
            return Err(Error::InvalidList(format!("length {len} out of range")));
        }
        let k = len - 1;
        let mut codes = Vec::with_capacity(len);
        for e in entries {
            codes.push(match *e {
                Entry::Agent(i) if i < k => i as u8,
                Entry::Agent(i) => return Err(Error::InvalidList(format!("agent index {i} outside universe of {k}"))),
                Entry::Single => k as u8,
            });
        }
        Self::from_codes(&codes)
    }

    fn from_codes(codes: &[u8]) -> Result<Self> {
        let len = codes.len();
        let mut order = [0u8; CAP];
        let mut rank = [u8::MAX; CAP];
        for (pos, &c) in codes.iter().enumerate() {
            let c_us = c as usize;
            if c_us >= len {
                return Err(Error::InvalidList(format!("code {c} outside universe")));
            }
            if rank[c_us] != u8::MAX {
                return Err(Error::InvalidList("duplicate entry".into()));
            }
            rank[c_us] = pos as u8;
            order[pos] = c;
        }
        Ok(PreferenceList { len: len as u8, order, rank })
    }

    /// The sincere-looking list `0, 1, ..., k-1, Single`.
    pub fn identity(k: usize) -> Self {
        let codes: Vec<u8> = (0..=k as u8).collect();
        Self::from_codes(&codes).expect("identity list is valid")
    }

    /// Every strict order over a universe of `k` agents plus `Single`, in
    /// lexicographic order of the entry sequence.
    pub fn all(k: usize) -> Vec<PreferenceList> {
        use itertools::Itertools;
        let mut lists: Vec<PreferenceList> =
            (0..=k as u8).permutations(k + 1).map(|p| Self::from_codes(&p).expect("permutation is valid")).collect();
        lists.sort();
        lists
    }

    /// Number of opposite-side agents in the universe.
    pub fn universe(&self) -> usize {
        self.len as usize - 1
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn decode(&self, code: u8) -> Entry {
        if code as usize == self.universe() {
            Entry::Single
        } else {
            Entry::Agent(code as usize)
        }
    }

    fn encode(&self, e: Entry) -> Option<usize> {
        match e {
            Entry::Agent(i) if i < self.universe() => Some(i),
            Entry::Agent(_) => None,
            Entry::Single => Some(self.universe()),
        }
    }

    pub fn entry_at(&self, pos: usize) -> Entry {
        self.decode(self.order[pos])
    }

    pub fn entries(&self) -> impl Iterator<Item = Entry> + '_ {
        self.order[..self.len()].iter().map(|&c| self.decode(c))
    }

    pub fn contains(&self, e: Entry) -> bool {
        self.encode(e).is_some()
    }

    /// 0-based position. Panics if the entry is outside the universe.
    pub fn position(&self, e: Entry) -> usize {
        let code = self.encode(e).expect("entry outside list universe");
        self.rank[code] as usize
    }

    pub fn try_position(&self, e: Entry) -> Option<usize> {
        self.encode(e).map(|c| self.rank[c] as usize)
    }

    pub fn rank_of(&self, e: Entry) -> Option<Rank> {
        self.try_position(e).map(|p| Rank(p + 1))
    }

    /// `a` strictly precedes `b`.
    pub fn prefers(&self, a: Entry, b: Entry) -> bool {
        self.position(a) < self.position(b)
    }

    pub fn self_position(&self) -> usize {
        self.rank[self.universe()] as usize
    }

    pub fn is_acceptable(&self, agent: usize) -> bool {
        (self.rank[agent] as usize) < self.self_position()
    }

    /// Agents above the sentinel, best first.
    pub fn acceptable(&self) -> impl Iterator<Item = usize> + '_ {
        self.order[..self.self_position()].iter().map(|&c| c as usize)
    }

    /// Exchanges the entries at two positions.
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut codes: Vec<u8> = self.order[..self.len()].to_vec();
        codes.swap(i, j);
        Self::from_codes(&codes).expect("swap keeps a permutation")
    }

    /// Builds a list from the sincere order: keep it down to and including
    /// `cut`, then the sentinel, then the rest in their original relative
    /// order. With `cut == Single` the list is returned unchanged.
    pub fn truncated_after(&self, cut: Entry) -> Self {
        let cut_pos = self.position(cut);
        let k = self.universe() as u8;
        let mut codes: Vec<u8> = Vec::with_capacity(self.len());
        codes.extend(self.order[..=cut_pos].iter().copied().filter(|&c| c != k));
        codes.push(k);
        codes.extend(self.order[cut_pos + 1..self.len()].iter().copied().filter(|&c| c != k));
        Self::from_codes(&codes).expect("truncation keeps a permutation")
    }

    /// Canonical text, e.g. `w1 w2 @ w3`, for a list owned by `owner`.
    pub fn render(&self, owner: Side) -> String {
        self.entries().map(|e| e.label(owner)).collect::<Vec<_>>().join(" ")
    }

    /// Position-preserving relabelling helper for tests and fixtures:
    /// `codes` uses `k` for the sentinel.
    pub fn from_indices(codes: &[usize]) -> Result<Self> {
        let bytes: Vec<u8> = codes.iter().map(|&c| c as u8).collect();
        if codes.iter().any(|&c| c > u8::MAX as usize) {
            return Err(Error::InvalidList("index too large".into()));
        }
        Self::from_codes(&bytes)
    }
}

impl fmt::Debug for PreferenceList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries()
            .map(|e| match e {
                Entry::Agent(i) => (i + 1).to_string(),
                Entry::Single => "@".into(),
            })
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

impl Ord for PreferenceList {
    fn cmp(&self, other: &Self) -> Ordering {
        self.entries().cmp(other.entries())
    }
}

impl PartialOrd for PreferenceList {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Display names of both sides. Canonical ids are positions in these vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    pub men: Vec<String>,
    pub women: Vec<String>,
}

impl Instance {
    pub fn canonical(n_men: usize, n_women: usize) -> Self {
        Instance {
            men: (1..=n_men).map(|i| format!("m{i}")).collect(),
            women: (1..=n_women).map(|i| format!("w{i}")).collect(),
        }
    }

    pub fn name(&self, agent: AgentId) -> &str {
        match agent.side {
            Side::Man => &self.men[agent.index],
            Side::Woman => &self.women[agent.index],
        }
    }

    /// Resolves a display name or a canonical `m<i>`/`w<i>` id.
    pub fn lookup(&self, name: &str) -> Option<AgentId> {
        if let Some(i) = self.men.iter().position(|n| n == name) {
            return Some(AgentId::man(i));
        }
        if let Some(i) = self.women.iter().position(|n| n == name) {
            return Some(AgentId::woman(i));
        }
        AgentId::parse(name).ok().filter(|a| match a.side {
            Side::Man => a.index < self.men.len(),
            Side::Woman => a.index < self.women.len(),
        })
    }
}

/// One preference list per agent on both sides.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    instance: Arc<Instance>,
    men: Vec<PreferenceList>,
    women: Vec<PreferenceList>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile").field("men", &self.men).field("women", &self.women).finish()
    }
}

impl Profile {
    pub fn new(instance: Arc<Instance>, men: Vec<PreferenceList>, women: Vec<PreferenceList>) -> Result<Self> {
        let (nm, nw) = (men.len(), women.len());
        if nm == 0 || nw == 0 {
            return Err(Error::InvalidList("both sides must be non-empty".into()));
        }
        if nm > MAX_SIDE || nw > MAX_SIDE {
            return Err(Error::SizeBound { size: nm.max(nw), max: MAX_SIDE });
        }
        if instance.men.len() != nm || instance.women.len() != nw {
            return Err(Error::InvalidList("instance names do not match list counts".into()));
        }
        if let Some(l) = men.iter().find(|l| l.universe() != nw) {
            return Err(Error::UniverseMismatch { left: l.universe(), right: nw });
        }
        if let Some(l) = women.iter().find(|l| l.universe() != nm) {
            return Err(Error::UniverseMismatch { left: l.universe(), right: nm });
        }
        Ok(Profile { instance, men, women })
    }

    /// Profile with canonical names `m1..`, `w1..`.
    pub fn canonical(men: Vec<PreferenceList>, women: Vec<PreferenceList>) -> Result<Self> {
        let instance = Arc::new(Instance::canonical(men.len(), women.len()));
        Profile::new(instance, men, women)
    }

    /// Convenience constructor from index lists where the sentinel is the
    /// universe size (`n_women` for men, `n_men` for women).
    pub fn from_indices(men: &[Vec<usize>], women: &[Vec<usize>]) -> Result<Self> {
        let men = men.iter().map(|c| PreferenceList::from_indices(c)).collect::<Result<Vec<_>>>()?;
        let women = women.iter().map(|c| PreferenceList::from_indices(c)).collect::<Result<Vec<_>>>()?;
        Profile::canonical(men, women)
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn n_men(&self) -> usize {
        self.men.len()
    }

    pub fn n_women(&self) -> usize {
        self.women.len()
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::Man => self.men.len(),
            Side::Woman => self.women.len(),
        }
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        agent.index < self.side_len(agent.side)
    }

    fn check(&self, agent: AgentId) -> Result<()> {
        if self.contains(agent) {
            Ok(())
        } else {
            Err(Error::UnknownAgent(agent.to_string()))
        }
    }

    /// Men first, then women.
    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        let (nm, nw) = (self.n_men(), self.n_women());
        (0..nm).map(AgentId::man).chain((0..nw).map(AgentId::woman))
    }

    pub fn man(&self, i: usize) -> &PreferenceList {
        &self.men[i]
    }

    pub fn woman(&self, j: usize) -> &PreferenceList {
        &self.women[j]
    }

    pub fn men(&self) -> &[PreferenceList] {
        &self.men
    }

    pub fn women(&self) -> &[PreferenceList] {
        &self.women
    }

    pub fn list(&self, agent: AgentId) -> &PreferenceList {
        match agent.side {
            Side::Man => &self.men[agent.index],
            Side::Woman => &self.women[agent.index],
        }
    }

    pub fn try_list(&self, agent: AgentId) -> Result<&PreferenceList> {
        self.check(agent)?;
        Ok(self.list(agent))
    }

    /// Replaces one list in place. The list must range over the same universe.
    pub fn set_list(&mut self, agent: AgentId, list: PreferenceList) {
        let slot = match agent.side {
            Side::Man => &mut self.men[agent.index],
            Side::Woman => &mut self.women[agent.index],
        };
        assert_eq!(slot.universe(), list.universe(), "replacement list over a different universe");
        *slot = list;
    }

    /// `[profile_{-agent}, list]`.
    pub fn with_list(&self, agent: AgentId, list: PreferenceList) -> Profile {
        let mut p = self.clone();
        p.set_list(agent, list);
        p
    }

    /// Does `agent` strictly prefer `a` to `b`?
    pub fn prefers(&self, agent: AgentId, a: Entry, b: Entry) -> Result<bool> {
        let list = self.try_list(agent)?;
        for e in [a, b] {
            if !list.contains(e) {
                return Err(Error::NotInList { agent: agent.to_string(), entry: e.label(agent.side) });
            }
        }
        Ok(list.prefers(a, b))
    }

    pub fn rank_of(&self, agent: AgentId, partner: Entry) -> Result<Rank> {
        let list = self.try_list(agent)?;
        list.rank_of(partner)
            .ok_or_else(|| Error::NotInList { agent: agent.to_string(), entry: partner.label(agent.side) })
    }

    /// The same instance with the sides exchanged (women become men).
    pub fn transposed(&self) -> Profile {
        Profile {
            instance: Arc::new(Instance { men: self.instance.women.clone(), women: self.instance.men.clone() }),
            men: self.women.clone(),
            women: self.men.clone(),
        }
    }
}

/// A symmetric assignment of every agent to an opposite-side partner or to
/// themselves. The women's side is derived from the men's, so the derived
/// ordering is lexicographic in the men's partner vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Matching {
    men: Vec<Entry>,
    women: Vec<Entry>,
}

impl Matching {
    pub fn all_single(n_men: usize, n_women: usize) -> Self {
        Matching { men: vec![Entry::Single; n_men], women: vec![Entry::Single; n_women] }
    }

    /// Builds a matching from the men's partners; fails if two men share a
    /// woman or an index is out of range.
    pub fn from_men(men: Vec<Entry>, n_women: usize) -> Result<Self> {
        let mut women = vec![Entry::Single; n_women];
        for (m, e) in men.iter().enumerate() {
            if let Entry::Agent(w) = *e {
                if w >= n_women {
                    return Err(Error::InvalidMatching(format!("woman index {w} out of range")));
                }
                if women[w] != Entry::Single {
                    return Err(Error::InvalidMatching(format!("w{} matched twice", w + 1)));
                }
                women[w] = Entry::Agent(m);
            }
        }
        Ok(Matching { men, women })
    }

    pub fn from_pairs(n_men: usize, n_women: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut men = vec![Entry::Single; n_men];
        for &(m, w) in pairs {
            if m >= n_men {
                return Err(Error::InvalidMatching(format!("man index {m} out of range")));
            }
            if men[m] != Entry::Single {
                return Err(Error::InvalidMatching(format!("m{} matched twice", m + 1)));
            }
            men[m] = Entry::Agent(w);
        }
        Matching::from_men(men, n_women)
    }

    /// Parses `m1:w2,m2:w3,...`; unlisted agents are single. Names resolve
    /// through the instance.
    pub fn parse(text: &str, instance: &Instance) -> Result<Self> {
        let mut pairs = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidMatching(format!("expected `man:woman`, got `{part}`")))?;
            let a = instance.lookup(a.trim()).ok_or_else(|| Error::UnknownAgent(a.trim().into()))?;
            let b = instance.lookup(b.trim()).ok_or_else(|| Error::UnknownAgent(b.trim().into()))?;
            let (m, w) = match (a.side, b.side) {
                (Side::Man, Side::Woman) => (a.index, b.index),
                (Side::Woman, Side::Man) => (b.index, a.index),
                _ => return Err(Error::InvalidMatching(format!("`{part}` pairs two agents of one side"))),
            };
            pairs.push((m, w));
        }
        Matching::from_pairs(instance.men.len(), instance.women.len(), &pairs)
    }

    pub fn n_men(&self) -> usize {
        self.men.len()
    }

    pub fn n_women(&self) -> usize {
        self.women.len()
    }

    pub fn partner(&self, agent: AgentId) -> Entry {
        match agent.side {
            Side::Man => self.men[agent.index],
            Side::Woman => self.women[agent.index],
        }
    }

    /// The partner as an agent id, or `None` when self-matched.
    pub fn partner_id(&self, agent: AgentId) -> Option<AgentId> {
        self.partner(agent).agent().map(|i| AgentId { side: agent.side.opposite(), index: i })
    }

    pub fn men(&self) -> &[Entry] {
        &self.men
    }

    pub fn women(&self) -> &[Entry] {
        &self.women
    }

    /// Matched `(man, woman)` pairs in man order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.men.iter().enumerate().filter_map(|(m, e)| e.agent().map(|w| (m, w)))
    }

    pub fn singles(&self) -> Vec<AgentId> {
        let men = self.men.iter().enumerate().filter(|(_, e)| **e == Entry::Single).map(|(i, _)| AgentId::man(i));
        let women = self.women.iter().enumerate().filter(|(_, e)| **e == Entry::Single).map(|(i, _)| AgentId::woman(i));
        men.chain(women).collect()
    }

    pub fn transposed(&self) -> Matching {
        Matching { men: self.women.clone(), women: self.men.clone() }
    }

    /// `m1:w2,m2:w3` using the given names.
    pub fn render(&self, instance: &Instance) -> String {
        self.pairs().map(|(m, w)| format!("{}:{}", instance.men[m], instance.women[w])).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs().map(|(m, w)| format!("m{}:w{}", m + 1, w + 1)).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn check_shape(profile: &Profile, matching: &Matching) {
    assert!(
        profile.n_men() == matching.n_men() && profile.n_women() == matching.n_women(),
        "matching does not belong to this instance"
    );
}

/// Nobody strictly prefers being single to their assigned partner.
pub fn is_individually_rational(profile: &Profile, matching: &Matching) -> bool {
    check_shape(profile, matching);
    matching.pairs().all(|(m, w)| profile.man(m).is_acceptable(w) && profile.woman(w).is_acceptable(m))
}

/// All `(man, woman)` pairs that strictly prefer each other to their partners.
pub fn blocking_pairs(profile: &Profile, matching: &Matching) -> Vec<(usize, usize)> {
    check_shape(profile, matching);
    let mut out = Vec::new();
    for m in 0..profile.n_men() {
        let ml = profile.man(m);
        let mp = matching.men[m];
        for w in 0..profile.n_women() {
            if mp == Entry::Agent(w) {
                continue;
            }
            if ml.prefers(Entry::Agent(w), mp) && profile.woman(w).prefers(Entry::Agent(m), matching.women[w]) {
                out.push((m, w));
            }
        }
    }
    out
}

pub(crate) fn has_blocking_pair(profile: &Profile, matching: &Matching) -> bool {
    for m in 0..profile.n_men() {
        let ml = profile.man(m);
        let mp = matching.men[m];
        let cut = ml.position(mp);
        for pos in 0..cut {
            if let Entry::Agent(w) = ml.entry_at(pos) {
                if profile.woman(w).prefers(Entry::Agent(m), matching.women[w]) {
                    return true;
                }
            }
        }
    }
    false
}

pub fn is_stable(profile: &Profile, matching: &Matching) -> bool {
    is_individually_rational(profile, matching) && !has_blocking_pair(profile, matching)
}
