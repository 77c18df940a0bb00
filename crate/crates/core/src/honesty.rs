//! Distances between a submitted list and the sincere one.

use std::collections::BTreeSet;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Entry, PreferenceList};

fn same_universe(a: &PreferenceList, b: &PreferenceList) -> Result<()> {
    if a.universe() != b.universe() {
        return Err(Error::UniverseMismatch { left: a.universe(), right: b.universe() });
    }
    Ok(())
}

/// Number of unordered pairs (the sentinel included) that the two lists
/// order oppositely.
pub fn kendall_tau(a: &PreferenceList, b: &PreferenceList) -> Result<u64> {
    same_universe(a, b)?;
    Ok(kendall_tau_unchecked(a, b))
}

pub(crate) fn kendall_tau_unchecked(a: &PreferenceList, b: &PreferenceList) -> u64 {
    let n = a.len();
    let mut count = 0;
    for i in 0..n {
        let x = a.entry_at(i);
        for j in i + 1..n {
            let y = a.entry_at(j);
            if b.position(y) < b.position(x) {
                count += 1;
            }
        }
    }
    count
}

/// A list seen only down to the sentinel: the acceptable agents in order,
/// and an unordered set of rejected agents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncatedList {
    pub prefix: Vec<usize>,
    pub rejected: BTreeSet<usize>,
}

impl TruncatedList {
    pub fn new(prefix: Vec<usize>, rejected: BTreeSet<usize>) -> Result<Self> {
        let k = prefix.len() + rejected.len();
        let mut seen = vec![false; k];
        for &a in prefix.iter().chain(rejected.iter()) {
            if a >= k || seen[a] {
                return Err(Error::InvalidList("prefix and rejected set must partition the universe".into()));
            }
            seen[a] = true;
        }
        Ok(TruncatedList { prefix, rejected })
    }

    pub fn universe(&self) -> usize {
        self.prefix.len() + self.rejected.len()
    }

    /// Full-order representative: rejected agents follow the sentinel in
    /// index order.
    pub fn to_list(&self) -> PreferenceList {
        let entries: Vec<Entry> = self
            .prefix
            .iter()
            .map(|&a| Entry::Agent(a))
            .chain(std::iter::once(Entry::Single))
            .chain(self.rejected.iter().map(|&a| Entry::Agent(a)))
            .collect();
        PreferenceList::new(&entries).expect("partition gives a valid list")
    }

    /// Position used for pair comparisons: prefix positions, then the
    /// sentinel, then `None` for rejected agents.
    fn slot(&self, e: Entry) -> Option<usize> {
        match e {
            Entry::Single => Some(self.prefix.len()),
            Entry::Agent(a) => self.prefix.iter().position(|&x| x == a),
        }
    }
}

impl From<&PreferenceList> for TruncatedList {
    fn from(list: &PreferenceList) -> Self {
        let prefix: Vec<usize> = list.acceptable().collect();
        let rejected = (0..list.universe()).filter(|a| !prefix.contains(a)).collect();
        TruncatedList { prefix, rejected }
    }
}

/// An unordered pair of universe elements, smaller first.
pub type Pair = (Entry, Entry);

/// Pairs ordered differently (`d`) and pairs left unordered by exactly one
/// of the lists (`r1`: both rejected in the first list, `r2`: in the second).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisparitySets {
    pub d: Vec<Pair>,
    pub r1: Vec<Pair>,
    pub r2: Vec<Pair>,
}

fn universe_pairs(k: usize) -> impl Iterator<Item = Pair> {
    let elems: Vec<Entry> = (0..k).map(Entry::Agent).chain(std::iter::once(Entry::Single)).collect();
    let n = elems.len();
    (0..n).flat_map(move |i| {
        let elems = elems.clone();
        (i + 1..n).map(move |j| (elems[i], elems[j]))
    })
}

/// Orders two elements in a truncated list, or `None` if both are rejected.
fn pair_order(l: &TruncatedList, x: Entry, y: Entry) -> Option<bool> {
    match (l.slot(x), l.slot(y)) {
        (Some(a), Some(b)) => Some(a < b),
        (Some(_), None) => Some(true),
        (None, Some(_)) => Some(false),
        (None, None) => None,
    }
}

pub fn disparity_sets(a: &TruncatedList, b: &TruncatedList) -> Result<DisparitySets> {
    if a.universe() != b.universe() {
        return Err(Error::UniverseMismatch { left: a.universe(), right: b.universe() });
    }
    let mut out = DisparitySets::default();
    for (x, y) in universe_pairs(a.universe()) {
        match (pair_order(a, x, y), pair_order(b, x, y)) {
            (Some(p), Some(q)) if p != q => out.d.push((x, y)),
            (None, Some(_)) => out.r1.push((x, y)),
            (Some(_), None) => out.r2.push((x, y)),
            _ => {}
        }
    }
    Ok(out)
}

fn check_penalty(p: Rational64) -> Result<()> {
    if p < Rational64::from_integer(0) || p > Rational64::from_integer(1) {
        return Err(Error::PenaltyOutOfRange(p.to_string()));
    }
    Ok(())
}

/// `|D| + p(|R1| + |R2|)`.
pub fn kendall_tau_penalty(a: &TruncatedList, b: &TruncatedList, p: Rational64) -> Result<Rational64> {
    check_penalty(p)?;
    let s = disparity_sets(a, b)?;
    Ok(Rational64::from_integer(s.d.len() as i64) + p * Rational64::from_integer((s.r1.len() + s.r2.len()) as i64))
}

/// `|D| + max(|R1|, |R2|)`.
pub fn hausdorff_kt(a: &TruncatedList, b: &TruncatedList) -> Result<Rational64> {
    let s = disparity_sets(a, b)?;
    Ok(Rational64::from_integer((s.d.len() + s.r1.len().max(s.r2.len())) as i64))
}

/// How dishonesty is measured in a game.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
#[derive(Default)]
pub enum HonestyMode {
    /// Kendall tau on full orders.
    #[default]
    FullOrder,
    /// Kendall tau on truncated lists with penalty `p` for unranked pairs.
    TruncatedP {
        penalty: Rational64,
    },
    Hausdorff,
}


impl HonestyMode {
    pub fn truncated(penalty: Rational64) -> Result<Self> {
        check_penalty(penalty)?;
        Ok(HonestyMode::TruncatedP { penalty })
    }

    /// Distance of `list` from `sincere`.
    pub fn distance(&self, sincere: &PreferenceList, list: &PreferenceList) -> Rational64 {
        match self {
            HonestyMode::FullOrder => Rational64::from_integer(kendall_tau_unchecked(sincere, list) as i64),
            HonestyMode::TruncatedP { penalty } => {
                kendall_tau_penalty(&list.into(), &sincere.into(), *penalty).expect("validated penalty")
            }
            HonestyMode::Hausdorff => hausdorff_kt(&list.into(), &sincere.into()).expect("same universe"),
        }
    }

    pub fn label(&self) -> String {
        match self {
            HonestyMode::FullOrder => "full-order".into(),
            HonestyMode::TruncatedP { penalty } => format!("truncated-p({penalty})"),
            HonestyMode::Hausdorff => "hausdorff".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::load;
    use crate::model::AgentId;
    use proptest::prelude::*;

    fn w1(name: &str) -> PreferenceList {
        *load(name).unwrap().list(AgentId::woman(0))
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn truncation_instance_distances() {
        let sincere = w1("truncation_sincere");
        assert_eq!(kendall_tau(&sincere, &w1("truncation_truncated")).unwrap(), 2);
        assert_eq!(kendall_tau(&sincere, &w1("truncation_swapped")).unwrap(), 1);
        assert_eq!(kendall_tau(&sincere, &sincere).unwrap(), 0);
    }

    #[test]
    fn truncated_list_honesty_values() {
        let sincere = w1("penalty_sincere");
        let p1 = w1("penalty_putative1");
        let p2 = w1("penalty_putative2");
        assert_eq!(kendall_tau(&sincere, &p1).unwrap(), 4);
        assert_eq!(kendall_tau(&sincere, &p2).unwrap(), 3);
        let (s, t1, t2) = (TruncatedList::from(&sincere), TruncatedList::from(&p1), TruncatedList::from(&p2));
        let sets = disparity_sets(&t1, &s).unwrap();
        assert_eq!((sets.d.len(), sets.r1.len(), sets.r2.len()), (4, 1, 0));
        // m3 and m1 are indices 2 and 0.
        assert_eq!(sets.r1, vec![(Entry::Agent(0), Entry::Agent(2))]);
        for p in [r(0, 1), r(1, 4), r(1, 2), r(1, 1)] {
            assert_eq!(kendall_tau_penalty(&t1, &s, p).unwrap(), r(4, 1) + p);
            assert_eq!(kendall_tau_penalty(&t2, &s, p).unwrap(), r(3, 1) + r(3, 1) * p);
        }
        assert_eq!(hausdorff_kt(&t1, &s).unwrap(), r(5, 1));
        assert_eq!(hausdorff_kt(&t2, &s).unwrap(), r(6, 1));
    }

    #[test]
    fn penalty_must_be_a_probability() {
        let t = TruncatedList::from(&PreferenceList::identity(2));
        assert!(matches!(kendall_tau_penalty(&t, &t, r(3, 2)), Err(Error::PenaltyOutOfRange(_))));
        assert!(HonestyMode::truncated(r(-1, 2)).is_err());
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let a = PreferenceList::identity(2);
        let b = PreferenceList::identity(3);
        assert!(matches!(kendall_tau(&a, &b), Err(Error::UniverseMismatch { .. })));
    }

    #[test]
    fn truncated_list_validation() {
        assert!(TruncatedList::new(vec![0, 1], BTreeSet::from([1])).is_err());
        let t = TruncatedList::new(vec![1], BTreeSet::from([0, 2])).unwrap();
        assert_eq!(format!("{:?}", t.to_list()), "[2 @ 1 3]");
    }

    fn naive_classify(a: &PreferenceList, b: &PreferenceList) -> (usize, usize, usize) {
        // Full-order representatives with per-element "rejected" flags.
        let rej = |l: &PreferenceList, e: Entry| e != Entry::Single && l.position(e) > l.self_position();
        let elems: Vec<Entry> = a.entries().collect();
        let (mut d, mut r1, mut r2) = (0, 0, 0);
        for i in 0..elems.len() {
            for j in i + 1..elems.len() {
                let (x, y) = (elems[i], elems[j]);
                let ua = rej(a, x) && rej(a, y);
                let ub = rej(b, x) && rej(b, y);
                match (ua, ub) {
                    (true, false) => r1 += 1,
                    (false, true) => r2 += 1,
                    (false, false) if a.prefers(x, y) != b.prefers(x, y) => d += 1,
                    _ => {}
                }
            }
        }
        (d, r1, r2)
    }

    fn arb_list(k: usize) -> impl Strategy<Value = PreferenceList> {
        Just((0..=k).collect::<Vec<usize>>()).prop_shuffle().prop_map(|v| PreferenceList::from_indices(&v).unwrap())
    }

    proptest! {
        #[test]
        fn kendall_tau_is_a_metric(a in arb_list(4), b in arb_list(4), c in arb_list(4)) {
            let d = |x: &PreferenceList, y: &PreferenceList| kendall_tau(x, y).unwrap();
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &b) == 0, a == b);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }

        #[test]
        fn adjacent_swap_moves_distance_by_one(a in arb_list(4), b in arb_list(4), i in 0usize..4) {
            let before = kendall_tau(&a, &b).unwrap() as i64;
            let after = kendall_tau(&a, &b.swapped(i, i + 1)).unwrap() as i64;
            prop_assert_eq!((after - before).abs(), 1);
        }

        #[test]
        fn disparity_sets_match_pair_oracle(a in arb_list(4), b in arb_list(4)) {
            let s = disparity_sets(&TruncatedList::from(&a), &TruncatedList::from(&b)).unwrap();
            prop_assert_eq!((s.d.len(), s.r1.len(), s.r2.len()), naive_classify(&a, &b));
        }

        #[test]
        fn zero_penalty_against_a_full_order_is_kendall_tau(a in arb_list(4), b in arb_list(4)) {
            // Move b's sentinel to the bottom so nothing is rejected there.
            let codes: Vec<usize> = b.entries().filter_map(Entry::agent).chain(std::iter::once(4)).collect();
            let full_b = PreferenceList::from_indices(&codes).unwrap();
            let ta = TruncatedList::from(&a);
            let tb = TruncatedList::from(&full_b);
            prop_assert!(disparity_sets(&ta, &tb).unwrap().r2.is_empty());
            // a's representative with its rejected agents in b's order.
            let mut tail: Vec<usize> = ta.rejected.iter().copied().collect();
            tail.sort_by_key(|&x| full_b.position(Entry::Agent(x)));
            let codes: Vec<usize> = ta.prefix.iter().copied().chain(std::iter::once(4)).chain(tail).collect();
            let aligned = PreferenceList::from_indices(&codes).unwrap();
            prop_assert_eq!(
                kendall_tau_penalty(&ta, &tb, Rational64::from_integer(0)).unwrap(),
                Rational64::from_integer(kendall_tau(&aligned, &full_b).unwrap() as i64)
            );
            prop_assert_eq!(
                hausdorff_kt(&ta, &tb).unwrap(),
                kendall_tau_penalty(&ta, &tb, Rational64::from_integer(1)).unwrap()
            );
            prop_assert_eq!(TruncatedList::from(&ta.to_list()), ta);
        }
    }
}
