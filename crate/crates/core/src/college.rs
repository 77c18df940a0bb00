//! Many-to-one matching: colleges with quotas and single-seat students.
//!
//! Students occupy the "men" side of the underlying [`Profile`] and
//! colleges the "women" side, so lists and honesty metrics are shared with
//! the one-to-one code.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, ParseErrorKind, Result};
use crate::format::{content_lines, parse_header_names, parse_list_tokens};
use crate::game::{all_lists, EquilibriumReport, GameConfig, Notion, Profitability};
use crate::mechanisms::{gale_shapley, Proposing};
use crate::model::{AgentId, Entry, Instance, Matching, PreferenceList, Profile};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CollegeInstance {
    /// Students as men, colleges as women.
    pub profile: Profile,
    pub quotas: Vec<usize>,
}

impl CollegeInstance {
    pub fn new(profile: Profile, quotas: Vec<usize>) -> Result<Self> {
        if quotas.len() != profile.n_women() || quotas.contains(&0) {
            return Err(Error::Precondition("one positive quota per college required".into()));
        }
        Ok(CollegeInstance { profile, quotas })
    }

    pub fn n_students(&self) -> usize {
        self.profile.n_men()
    }

    pub fn n_colleges(&self) -> usize {
        self.profile.n_women()
    }

    pub fn student(&self, s: usize) -> &PreferenceList {
        self.profile.man(s)
    }

    pub fn college(&self, c: usize) -> &PreferenceList {
        self.profile.woman(c)
    }

    pub fn with_college_list(&self, c: usize, list: PreferenceList) -> Self {
        CollegeInstance { profile: self.profile.with_list(AgentId::woman(c), list), quotas: self.quotas.clone() }
    }

    pub fn with_list(&self, agent: AgentId, list: PreferenceList) -> Self {
        CollegeInstance { profile: self.profile.with_list(agent, list), quotas: self.quotas.clone() }
    }

    pub fn name(&self, agent: AgentId) -> &str {
        self.profile.instance().name(agent)
    }
}

/// Parses the college format: `students:` and `colleges:` headers, and
/// `c1(2): s1 s2 @ s3` for a college with two seats.
pub fn parse_college(text: &str) -> Result<CollegeInstance> {
    let perr = |line, kind| Error::Parse { line, kind };
    let mut seen = HashMap::new();
    let mut students: Option<Vec<String>> = None;
    let mut colleges: Option<Vec<String>> = None;
    let mut pending = Vec::new();
    for (line_no, line) in content_lines(text) {
        let (head, rest) =
            line.split_once(':').ok_or_else(|| perr(line_no, ParseErrorKind::Syntax("expected `name: ...`".into())))?;
        match head.trim() {
            "students" if students.is_none() => students = Some(parse_header_names(line_no, rest, &mut seen)?),
            "colleges" if colleges.is_none() => colleges = Some(parse_header_names(line_no, rest, &mut seen)?),
            h @ ("students" | "colleges") => {
                return Err(perr(line_no, ParseErrorKind::Syntax(format!("repeated `{h}:` header"))))
            }
            h => pending.push((line_no, h.to_string(), rest.to_string())),
        }
    }
    let students = students.ok_or_else(|| perr(0, ParseErrorKind::MissingHeader("students")))?;
    let colleges = colleges.ok_or_else(|| perr(0, ParseErrorKind::MissingHeader("colleges")))?;
    let mut s_lists: Vec<Option<PreferenceList>> = vec![None; students.len()];
    let mut c_lists: Vec<Option<PreferenceList>> = vec![None; colleges.len()];
    let mut quotas = vec![1usize; colleges.len()];
    for (line_no, head, rest) in pending {
        let (name, quota) = match head.split_once('(') {
            Some((n, q)) => {
                let q = q
                    .strip_suffix(')')
                    .and_then(|q| q.trim().parse::<usize>().ok())
                    .filter(|q| *q >= 1)
                    .ok_or_else(|| perr(line_no, ParseErrorKind::InvalidQuota(head.clone())))?;
                (n.trim().to_string(), Some(q))
            }
            None => (head.clone(), None),
        };
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        if let Some(s) = students.iter().position(|n| *n == name) {
            if quota.is_some() {
                return Err(perr(
                    line_no,
                    ParseErrorKind::InvalidQuota(format!("student `{name}` cannot have a quota")),
                ));
            }
            if s_lists[s].is_some() {
                return Err(perr(line_no, ParseErrorKind::DuplicateAgent(name)));
            }
            s_lists[s] = Some(PreferenceList::new(&parse_list_tokens(line_no, &tokens, &students, &colleges)?)?);
        } else if let Some(c) = colleges.iter().position(|n| *n == name) {
            if c_lists[c].is_some() {
                return Err(perr(line_no, ParseErrorKind::DuplicateAgent(name)));
            }
            c_lists[c] = Some(PreferenceList::new(&parse_list_tokens(line_no, &tokens, &colleges, &students)?)?);
            quotas[c] = quota.unwrap_or(1);
        } else {
            return Err(perr(line_no, ParseErrorKind::UnknownName(name)));
        }
    }
    let collect = |lists: Vec<Option<PreferenceList>>, names: &[String]| -> Result<Vec<PreferenceList>> {
        lists
            .into_iter()
            .zip(names)
            .map(|(l, n)| l.ok_or_else(|| perr(0, ParseErrorKind::MissingList(n.clone()))))
            .collect()
    };
    let s_lists = collect(s_lists, &students)?;
    let c_lists = collect(c_lists, &colleges)?;
    let profile = Profile::new(Arc::new(Instance { men: students, women: colleges }), s_lists, c_lists)?;
    CollegeInstance::new(profile, quotas)
}

pub fn serialize_college(inst: &CollegeInstance) -> String {
    let names = inst.profile.instance();
    let mut out = format!("students: {}\ncolleges: {}\n", names.men.join(" "), names.women.join(" "));
    for a in inst.profile.agents() {
        let head = match a.side {
            crate::model::Side::Woman if inst.quotas[a.index] != 1 => {
                format!("{}({})", names.name(a), inst.quotas[a.index])
            }
            _ => names.name(a).to_string(),
        };
        out.push_str(&format!("{head}: {}\n", crate::game::render_list(&inst.profile, a, inst.profile.list(a))));
    }
    out
}

/// Each student's college (or `Single`) and each college's admitted set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Assignment {
    students: Vec<Entry>,
    colleges: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn from_students(students: Vec<Entry>, quotas: &[usize]) -> Result<Self> {
        let mut colleges = vec![Vec::new(); quotas.len()];
        for (s, e) in students.iter().enumerate() {
            if let Entry::Agent(c) = *e {
                if c >= quotas.len() {
                    return Err(Error::InvalidMatching(format!("college index {c} out of range")));
                }
                colleges[c].push(s);
                if colleges[c].len() > quotas[c] {
                    return Err(Error::InvalidMatching(format!("college {} over quota", c + 1)));
                }
            }
        }
        Ok(Assignment { students, colleges })
    }

    pub fn student(&self, s: usize) -> Entry {
        self.students[s]
    }

    pub fn college(&self, c: usize) -> &[usize] {
        &self.colleges[c]
    }

    pub fn students(&self) -> &[Entry] {
        &self.students
    }

    /// `c1:{s3,s4},c2:{s2}` using instance names.
    pub fn render(&self, inst: &CollegeInstance) -> String {
        let names = inst.profile.instance();
        self.colleges
            .iter()
            .enumerate()
            .map(|(c, ss)| format!("{}:{{{}}}", names.women[c], ss.iter().map(|s| names.men[*s].as_str()).join(",")))
            .join(",")
    }
}

fn prefers_student_to_some_admit(list: &PreferenceList, s: usize, admits: &[usize]) -> bool {
    admits.iter().any(|a| list.prefers(Entry::Agent(s), Entry::Agent(*a)))
}

pub fn college_is_individually_rational(inst: &CollegeInstance, a: &Assignment) -> bool {
    (0..inst.n_students()).all(|s| match a.student(s) {
        Entry::Agent(c) => inst.student(s).is_acceptable(c) && inst.college(c).is_acceptable(s),
        Entry::Single => true,
    })
}

/// Student-college pairs that would both rather be together.
pub fn college_blocking_pairs(inst: &CollegeInstance, a: &Assignment) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for s in 0..inst.n_students() {
        for c in 0..inst.n_colleges() {
            if a.student(s) == Entry::Agent(c) || !inst.student(s).prefers(Entry::Agent(c), a.student(s)) {
                continue;
            }
            let cl = inst.college(c);
            let admits = a.college(c);
            let free = admits.len() < inst.quotas[c] && cl.is_acceptable(s);
            if free || prefers_student_to_some_admit(cl, s, admits) {
                out.push((s, c));
            }
        }
    }
    out
}

pub fn college_is_stable(inst: &CollegeInstance, a: &Assignment) -> bool {
    college_is_individually_rational(inst, a) && college_blocking_pairs(inst, a).is_empty()
}

/// The one-to-one instance with one woman per seat. Seat copies share the
/// college's list; students rank a college's seats consecutively in index
/// order. Also returns the college of each seat.
pub fn duplicate_seats(inst: &CollegeInstance) -> (Profile, Vec<usize>) {
    let seat_college: Vec<usize> =
        inst.quotas.iter().enumerate().flat_map(|(c, q)| std::iter::repeat_n(c, *q)).collect();
    let first_seat: Vec<usize> = inst
        .quotas
        .iter()
        .scan(0, |acc, q| {
            let f = *acc;
            *acc += q;
            Some(f)
        })
        .collect();
    let students = (0..inst.n_students())
        .map(|s| {
            let entries: Vec<Entry> = inst
                .student(s)
                .entries()
                .flat_map(|e| match e {
                    Entry::Agent(c) => (first_seat[c]..first_seat[c] + inst.quotas[c]).map(Entry::Agent).collect_vec(),
                    Entry::Single => vec![Entry::Single],
                })
                .collect();
            PreferenceList::new(&entries).expect("seat list is valid")
        })
        .collect();
    let seats = seat_college.iter().map(|c| *inst.college(*c)).collect();
    let names = inst.profile.instance();
    let seat_names = seat_college
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{}#{}", names.women[*c], i - first_seat[*c] + 1))
        .collect();
    let profile = Profile::new(Arc::new(Instance { men: names.men.clone(), women: seat_names }), students, seats)
        .expect("duplicated instance is valid");
    (profile, seat_college)
}

/// Maps a one-to-one matching of the duplicated instance back.
pub fn collapse_seats(m: &Matching, seat_college: &[usize], quotas: &[usize]) -> Assignment {
    let students =
        m.men().iter().map(|e| e.agent().map_or(Entry::Single, |seat| Entry::Agent(seat_college[seat]))).collect();
    Assignment::from_students(students, quotas).expect("seats respect quotas")
}

/// Deferred acceptance; `Proposing::Men` means students propose.
pub fn college_da(inst: &CollegeInstance, side: Proposing) -> Assignment {
    let ns = inst.n_students();
    let nc = inst.n_colleges();
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); nc];
    let mut student_at: Vec<Option<usize>> = vec![None; ns];
    match side {
        Proposing::Men => {
            let mut next = vec![0usize; ns];
            while let Some(s) = (0..ns).find(|&s| student_at[s].is_none() && next[s] < inst.student(s).self_position())
            {
                let c = inst.student(s).entry_at(next[s]).agent().expect("above the sentinel");
                next[s] += 1;
                let cl = inst.college(c);
                if !cl.is_acceptable(s) {
                    continue;
                }
                held[c].push(s);
                student_at[s] = Some(c);
                if held[c].len() > inst.quotas[c] {
                    let worst = *held[c].iter().max_by_key(|x| cl.position(Entry::Agent(**x))).expect("non-empty");
                    held[c].retain(|x| *x != worst);
                    student_at[worst] = None;
                }
            }
        }
        Proposing::Women => {
            let mut next = vec![0usize; nc];
            while let Some(c) =
                (0..nc).find(|&c| held[c].len() < inst.quotas[c] && next[c] < inst.college(c).self_position())
            {
                let s = inst.college(c).entry_at(next[c]).agent().expect("above the sentinel");
                next[c] += 1;
                let sl = inst.student(s);
                let current = student_at[s].map_or(Entry::Single, Entry::Agent);
                if sl.prefers(Entry::Agent(c), current) {
                    if let Some(old) = student_at[s] {
                        held[old].retain(|x| *x != s);
                    }
                    held[c].push(s);
                    student_at[s] = Some(c);
                }
            }
        }
    }
    let students = student_at.into_iter().map(|c| c.map_or(Entry::Single, Entry::Agent)).collect();
    Assignment::from_students(students, &inst.quotas).expect("quotas respected")
}

/// Every stable assignment, by exhaustive search, in canonical order.
pub fn enumerate_college_stable(inst: &CollegeInstance, max_side: usize) -> Result<Vec<Assignment>> {
    let size = inst.n_students().max(inst.n_colleges());
    if size > max_side {
        return Err(Error::SizeBound { size, max: max_side });
    }
    let mut out = Vec::new();
    let mut students = vec![Entry::Single; inst.n_students()];
    let mut load = vec![0usize; inst.n_colleges()];
    rec(inst, 0, &mut students, &mut load, &mut out);
    out.sort();
    Ok(out)
}

fn rec(inst: &CollegeInstance, s: usize, students: &mut Vec<Entry>, load: &mut Vec<usize>, out: &mut Vec<Assignment>) {
    if s == inst.n_students() {
        let a = Assignment::from_students(students.clone(), &inst.quotas).expect("quotas respected");
        if college_is_stable(inst, &a) {
            out.push(a);
        }
        return;
    }
    let options: Vec<Entry> =
        inst.student(s).acceptable().map(Entry::Agent).chain(std::iter::once(Entry::Single)).collect();
    for e in options {
        if let Entry::Agent(c) = e {
            if load[c] == inst.quotas[c] || !inst.college(c).is_acceptable(s) {
                continue;
            }
            load[c] += 1;
        }
        students[s] = e;
        rec(inst, s + 1, students, load, out);
        if let Entry::Agent(c) = e {
            load[c] -= 1;
        }
        students[s] = Entry::Single;
    }
}

/// Outcome of comparing two admitted sets.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetComparison {
    StrictlyPrefers,
    IndifferentOrIncomparable,
    StrictlyDispreferred,
}

fn rank_vector(list: &PreferenceList, set: &[usize], len: usize) -> Vec<usize> {
    let mut v: Vec<usize> = set.iter().map(|s| list.position(Entry::Agent(*s))).collect();
    v.sort_unstable();
    v.resize(len, list.self_position());
    v.sort_unstable();
    v
}

/// Responsive comparison: sorted rank vectors, padded with the sentinel's
/// rank for empty seats, compared position by position.
pub fn responsive_prefers(list: &PreferenceList, a: &[usize], b: &[usize]) -> SetComparison {
    let len = a.len().max(b.len());
    let (va, vb) = (rank_vector(list, a, len), rank_vector(list, b, len));
    let orders: Vec<Ordering> = va.iter().zip(&vb).map(|(x, y)| x.cmp(y)).collect();
    let le = orders.iter().all(|o| *o != Ordering::Greater);
    let ge = orders.iter().all(|o| *o != Ordering::Less);
    match (le, ge) {
        (true, false) => SetComparison::StrictlyPrefers,
        (false, true) => SetComparison::StrictlyDispreferred,
        _ => SetComparison::IndifferentOrIncomparable,
    }
}

/// Mechanisms for college instances.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollegeMechanism {
    StudentDa,
    CollegeDa,
    Uniform,
}

impl CollegeMechanism {
    pub const ALL: [CollegeMechanism; 3] =
        [CollegeMechanism::StudentDa, CollegeMechanism::CollegeDa, CollegeMechanism::Uniform];

    pub fn as_str(self) -> &'static str {
        match self {
            CollegeMechanism::StudentDa => "student-da",
            CollegeMechanism::CollegeDa => "college-da",
            CollegeMechanism::Uniform => "uniform",
        }
    }

    /// Support with exact probabilities, sorted by assignment.
    pub fn evaluate(self, inst: &CollegeInstance) -> Vec<(Assignment, Rational64)> {
        match self {
            CollegeMechanism::StudentDa => vec![(college_da(inst, Proposing::Men), Rational64::from_integer(1))],
            CollegeMechanism::CollegeDa => vec![(college_da(inst, Proposing::Women), Rational64::from_integer(1))],
            CollegeMechanism::Uniform => {
                let all = enumerate_college_stable(inst, crate::model::MAX_SIDE).expect("within bound");
                let p = Rational64::new(1, all.len() as i64);
                all.into_iter().map(|a| (a, p)).collect()
            }
        }
    }
}

/// A profitable unilateral deviation in a college instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollegeDeviation {
    pub agent: AgentId,
    pub list: PreferenceList,
    pub outcome: Vec<(Assignment, Rational64)>,
}

fn college_sets(outcome: &[(Assignment, Rational64)], c: usize) -> Vec<Vec<usize>> {
    outcome.iter().map(|(a, _)| a.college(c).to_vec()).unique().collect()
}

/// Whether a college gains by moving from `current` to `deviation`.
pub fn college_profitable(
    list: &PreferenceList,
    current: &[Vec<usize>],
    deviation: &[Vec<usize>],
    notion: Profitability,
) -> bool {
    let cmp = |d: &Vec<usize>, c: &Vec<usize>| responsive_prefers(list, d, c);
    match notion {
        Profitability::Optimistic => {
            deviation.iter().any(|d| current.iter().all(|c| cmp(d, c) == SetComparison::StrictlyPrefers))
        }
        Profitability::Guaranteed => {
            let weak = deviation.iter().all(|d| {
                current.iter().all(|c| {
                    let r = rank_vector(list, d, d.len().max(c.len())) == rank_vector(list, c, d.len().max(c.len()));
                    r || cmp(d, c) == SetComparison::StrictlyPrefers
                })
            });
            let strict = deviation.iter().any(|d| current.iter().any(|c| cmp(d, c) == SetComparison::StrictlyPrefers));
            weak && strict
        }
    }
}

/// First profitable deviation of `agent` (student or college).
pub fn college_nash_violation(
    mech: CollegeMechanism,
    sincere: &CollegeInstance,
    putative: &CollegeInstance,
    agent: AgentId,
    notion: Profitability,
) -> Option<CollegeDeviation> {
    let current = mech.evaluate(putative);
    let s = sincere.profile.list(agent);
    let own = putative.profile.list(agent);
    for l in all_lists(own.universe()).iter().filter(|l| *l != own) {
        let outcome = mech.evaluate(&putative.with_list(agent, *l));
        let gain = match agent.side {
            crate::model::Side::Woman => college_profitable(
                s,
                &college_sets(&current, agent.index),
                &college_sets(&outcome, agent.index),
                notion,
            ),
            crate::model::Side::Man => {
                let partners = |o: &[(Assignment, Rational64)]| -> Vec<Entry> {
                    o.iter().map(|(a, _)| a.student(agent.index)).unique().collect()
                };
                crate::game::profitable_partners(s, &partners(&current), &partners(&outcome), notion)
            }
        };
        if gain {
            return Some(CollegeDeviation { agent, list: *l, outcome });
        }
    }
    None
}

/// Per-agent Nash check for a college instance; returns the violations.
pub fn college_nash(
    mech: CollegeMechanism,
    sincere: &CollegeInstance,
    putative: &CollegeInstance,
    notion: Profitability,
) -> Vec<CollegeDeviation> {
    putative.profile.agents().filter_map(|a| college_nash_violation(mech, sincere, putative, a, notion)).collect()
}

/// Equilibrium check for student placement: `config.truth_tellers` (for
/// example every college) are pinned to their sincere lists and only the
/// strategic agents are judged. One-to-one instances only.
pub fn placement_game(
    config: &GameConfig,
    sincere: &Profile,
    putative: &Profile,
    notions: &[Notion],
) -> Result<EquilibriumReport> {
    crate::game::check(config, sincere, putative, notions)
}

/// The one-to-one view of a college instance with all quotas equal to 1.
pub fn as_one_to_one(inst: &CollegeInstance) -> Option<Profile> {
    inst.quotas.iter().all(|q| *q == 1).then(|| inst.profile.clone())
}

/// Runs one-to-one deferred acceptance on the seat-duplicated instance.
pub fn college_da_via_seats(inst: &CollegeInstance, side: Proposing) -> Assignment {
    let (p, seat_college) = duplicate_seats(inst);
    collapse_seats(&gale_shapley(&p, side), &seat_college, &inst.quotas)
}
