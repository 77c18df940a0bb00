use proptest::prelude::*;

use ssm_core::college::{
    college_da, college_da_via_seats, college_is_stable, duplicate_seats, enumerate_college_stable, CollegeInstance,
};
use ssm_core::experiments::{random_instance, SelfPolicy};
use ssm_core::format::{parse_any, parse_profile, profile_to_json, serialize_profile};
use ssm_core::mechanisms::{enumerate_stable, gale_shapley, Proposing};
use ssm_core::model::{is_individually_rational, is_stable, DEFAULT_MAX_SIDE};
use ssm_core::{AgentId, Builtin, Entry, Matching, Mechanism, PreferenceList, Profile, Side};

fn policy() -> impl Strategy<Value = SelfPolicy> {
    prop_oneof![Just(SelfPolicy::Uniform), Just(SelfPolicy::AlwaysLast), Just(SelfPolicy::Mixed)]
}

fn instance(max: usize) -> impl Strategy<Value = Profile> {
    (1..=max, 1..=max, any::<u64>(), policy()).prop_map(|(m, w, seed, pol)| random_instance(m, w, seed, pol).unwrap())
}

fn rank(l: &PreferenceList, e: Entry) -> usize {
    l.entries().position(|x| x == e).unwrap()
}

/// Stability straight from the definition.
fn naive_stable(p: &Profile, mu: &Matching) -> bool {
    for a in p.agents() {
        let l = p.list(a);
        if rank(l, mu.partner(a)) > rank(l, Entry::Single) {
            return false;
        }
    }
    for m in 0..p.n_men() {
        for w in 0..p.n_women() {
            let (lm, lw) = (p.man(m), p.woman(w));
            let man_wants = rank(lm, Entry::Agent(w)) < rank(lm, mu.men()[m]);
            let woman_wants = rank(lw, Entry::Agent(m)) < rank(lw, mu.women()[w]);
            if man_wants && woman_wants {
                return false;
            }
        }
    }
    true
}

/// Every matching, built man by man.
fn all_matchings(n_men: usize, n_women: usize) -> Vec<Matching> {
    fn go(m: usize, n_men: usize, n_women: usize, used: &mut Vec<bool>, cur: &mut Vec<Entry>, out: &mut Vec<Matching>) {
        if m == n_men {
            out.push(Matching::from_men(cur.clone(), n_women).unwrap());
            return;
        }
        cur.push(Entry::Single);
        go(m + 1, n_men, n_women, used, cur, out);
        cur.pop();
        for w in 0..n_women {
            if !used[w] {
                used[w] = true;
                cur.push(Entry::Agent(w));
                go(m + 1, n_men, n_women, used, cur, out);
                cur.pop();
                used[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, n_men, n_women, &mut vec![false; n_women], &mut Vec::new(), &mut out);
    out
}

fn college_instance(max: usize) -> impl Strategy<Value = CollegeInstance> {
    (1..=max, 1..=3usize, any::<u64>(), policy(), proptest::collection::vec(1..=2usize, 3)).prop_map(
        |(s, c, seed, pol, quotas)| {
            let p = random_instance(s, c, seed, pol).unwrap();
            CollegeInstance::new(p, quotas[..c].to_vec()).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stable_set_matches_naive_oracle(p in instance(3)) {
        let mut expected: Vec<Matching> =
            all_matchings(p.n_men(), p.n_women()).into_iter().filter(|m| naive_stable(&p, m)).collect();
        let mut got = enumerate_stable(&p);
        expected.sort();
        got.sort();
        prop_assert_eq!(&got, &expected);
        for m in all_matchings(p.n_men(), p.n_women()) {
            prop_assert_eq!(is_stable(&p, &m), naive_stable(&p, &m));
        }
    }

    #[test]
    fn unmatched_agents_agree_across_stable_matchings(p in instance(4)) {
        let stable = enumerate_stable(&p);
        prop_assert!(!stable.is_empty());
        for m in &stable[1..] {
            prop_assert_eq!(m.singles(), stable[0].singles());
        }
    }

    #[test]
    fn deferred_acceptance_gives_the_lattice_extremes(p in instance(4)) {
        let stable = enumerate_stable(&p);
        for (side, proposing) in [(Side::Man, Proposing::Men), (Side::Woman, Proposing::Women)] {
            let best = gale_shapley(&p, proposing);
            prop_assert!(stable.contains(&best));
            for m in &stable {
                for k in 0..p.side_len(side) {
                    let a = AgentId { side, index: k };
                    let l = p.list(a);
                    prop_assert!(rank(l, best.partner(a)) <= rank(l, m.partner(a)));
                    let other = AgentId { side: side.opposite(), index: k };
                    if k < p.side_len(side.opposite()) {
                        let lo = p.list(other);
                        prop_assert!(rank(lo, best.partner(other)) >= rank(lo, m.partner(other)));
                    }
                }
            }
        }
    }

    #[test]
    fn text_and_json_round_trip(p in instance(5)) {
        let text = serialize_profile(&p);
        prop_assert_eq!(&parse_profile(&text).unwrap(), &p);
        let json = serde_json::to_string(&profile_to_json(&p)).unwrap();
        prop_assert_eq!(&parse_any(&json).unwrap(), &p);
    }

    #[test]
    fn mechanisms_ignore_lists_below_the_sentinel(p in instance(3), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut q = p.clone();
        for a in p.agents() {
            let l = p.list(a);
            let cut = l.self_position();
            let mut entries: Vec<Entry> = l.entries().collect();
            entries[cut + 1..].shuffle(&mut rng);
            q.set_list(a, PreferenceList::new(&entries).unwrap());
        }
        for mech in Builtin::ALL {
            prop_assert_eq!(mech.evaluate(&p), mech.evaluate(&q));
        }
    }

    #[test]
    fn college_deferred_acceptance_matches_seat_copies(inst in college_instance(4)) {
        for side in [Proposing::Men, Proposing::Women] {
            let a = college_da(&inst, side);
            prop_assert!(college_is_stable(&inst, &a));
            prop_assert_eq!(&a, &college_da_via_seats(&inst, side));
        }
    }

    #[test]
    fn college_seat_counts_agree_across_stable_assignments(inst in college_instance(4)) {
        let all = enumerate_college_stable(&inst, DEFAULT_MAX_SIDE).unwrap();
        prop_assert!(!all.is_empty());
        for a in &all {
            prop_assert!(college_is_stable(&inst, a));
            for c in 0..inst.n_colleges() {
                prop_assert!(a.college(c).len() <= inst.quotas[c]);
                prop_assert_eq!(a.college(c).len(), all[0].college(c).len());
            }
            for s in 0..inst.n_students() {
                prop_assert_eq!(a.student(s) == Entry::Single, all[0].student(s) == Entry::Single);
            }
        }
        let (seats, _) = duplicate_seats(&inst);
        prop_assert_eq!(seats.n_women(), inst.quotas.iter().sum::<usize>());
    }

    #[test]
    fn unit_quotas_reduce_to_one_to_one(p in instance(3)) {
        let quotas = vec![1; p.n_women()];
        let inst = CollegeInstance::new(p.clone(), quotas).unwrap();
        for side in [Proposing::Men, Proposing::Women] {
            let a = college_da(&inst, side);
            let m = gale_shapley(&p, side);
            for s in 0..p.n_men() {
                prop_assert_eq!(a.student(s), m.men()[s]);
            }
        }
        prop_assert_eq!(enumerate_college_stable(&inst, DEFAULT_MAX_SIDE).unwrap().len(), enumerate_stable(&p).len());
    }
}

#[test]
fn deferred_acceptance_is_individually_rational_on_many_instances() {
    let mut checked = 0;
    for seed in 0..1200u64 {
        let n = 1 + (seed % 5) as usize;
        let policy = if seed % 2 == 0 { SelfPolicy::Uniform } else { SelfPolicy::AlwaysLast };
        let p = random_instance(n, 1 + ((seed / 5) % 5) as usize, seed, policy).unwrap();
        for side in [Proposing::Men, Proposing::Women] {
            let m = gale_shapley(&p, side);
            assert!(is_individually_rational(&p, &m), "seed {seed}");
            assert!(naive_stable(&p, &m), "seed {seed}");
        }
        checked += 1;
    }
    assert!(checked >= 1000);
}
