//! Text and JSON instance files.
//!
//! ```text
//! # comment
//! men: m1 m2
//! women: w1 w2
//! m1: w1 @ w2
//! ```
//!
//! `@` marks the position of the "stay single" option. Every opposite-side
//! agent must appear exactly once in each list.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseErrorKind, Result};
use crate::model::{AgentId, Entry, Instance, PreferenceList, Profile, Side};

pub const SELF_MARKER: &str = "@";

fn perr(line: usize, kind: ParseErrorKind) -> Error {
    Error::Parse { line, kind }
}

/// Strips comments and blank lines, returning `(1-based line, content)`.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub(crate) fn parse_header_names(line_no: usize, rest: &str, seen: &mut HashMap<String, usize>) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for name in rest.split_whitespace() {
        if name == SELF_MARKER || name.contains(':') {
            return Err(perr(line_no, ParseErrorKind::Syntax(format!("`{name}` is not a valid agent name"))));
        }
        if seen.insert(name.to_string(), line_no).is_some() {
            return Err(perr(line_no, ParseErrorKind::DuplicateAgent(name.to_string())));
        }
        names.push(name.to_string());
    }
    Ok(names)
}

/// Resolves the tokens of one list into entries over `opposite`.
pub(crate) fn parse_list_tokens(
    line_no: usize,
    tokens: &[&str],
    own: &[String],
    opposite: &[String],
) -> Result<Vec<Entry>> {
    let mut entries = Vec::with_capacity(opposite.len() + 1);
    let mut used = vec![false; opposite.len()];
    let mut have_self = false;
    for &tok in tokens {
        if tok == SELF_MARKER {
            if have_self {
                return Err(perr(line_no, ParseErrorKind::MultipleSelf));
            }
            have_self = true;
            entries.push(Entry::Single);
            continue;
        }
        match opposite.iter().position(|n| n == tok) {
            Some(i) => {
                if used[i] {
                    return Err(perr(line_no, ParseErrorKind::DuplicateEntry(tok.to_string())));
                }
                used[i] = true;
                entries.push(Entry::Agent(i));
            }
            None if own.iter().any(|n| n == tok) => {
                return Err(perr(line_no, ParseErrorKind::SideMismatch(tok.to_string())))
            }
            None => return Err(perr(line_no, ParseErrorKind::UnknownName(tok.to_string()))),
        }
    }
    if !have_self {
        return Err(perr(line_no, ParseErrorKind::MissingSelf));
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(perr(line_no, ParseErrorKind::MissingEntry(opposite[i].clone())));
    }
    Ok(entries)
}

/// Parses the text instance format.
pub fn parse_profile(text: &str) -> Result<Profile> {
    let mut seen = HashMap::new();
    let mut men: Option<Vec<String>> = None;
    let mut women: Option<Vec<String>> = None;
    let mut pending: Vec<(usize, String, Vec<String>)> = Vec::new();

    for (line_no, line) in content_lines(text) {
        let (head, rest) =
            line.split_once(':').ok_or_else(|| perr(line_no, ParseErrorKind::Syntax("expected `name: ...`".into())))?;
        let head = head.trim();
        match head {
            "men" if men.is_none() => men = Some(parse_header_names(line_no, rest, &mut seen)?),
            "women" if women.is_none() => women = Some(parse_header_names(line_no, rest, &mut seen)?),
            "men" | "women" => return Err(perr(line_no, ParseErrorKind::Syntax(format!("repeated `{head}:` header")))),
            _ => pending.push((line_no, head.to_string(), rest.split_whitespace().map(String::from).collect())),
        }
    }
    let men = men.ok_or_else(|| perr(0, ParseErrorKind::MissingHeader("men")))?;
    let women = women.ok_or_else(|| perr(0, ParseErrorKind::MissingHeader("women")))?;
    if men.is_empty() || women.is_empty() {
        return Err(perr(0, ParseErrorKind::Syntax("both sides need at least one agent".into())));
    }

    let mut men_lists: Vec<Option<PreferenceList>> = vec![None; men.len()];
    let mut women_lists: Vec<Option<PreferenceList>> = vec![None; women.len()];
    for (line_no, owner, tokens) in pending {
        let tokens: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let (slot, own, opposite) = if let Some(i) = men.iter().position(|n| *n == owner) {
            (&mut men_lists[i], &men, &women)
        } else if let Some(j) = women.iter().position(|n| *n == owner) {
            (&mut women_lists[j], &women, &men)
        } else {
            return Err(perr(line_no, ParseErrorKind::UnknownName(owner)));
        };
        if slot.is_some() {
            return Err(perr(line_no, ParseErrorKind::DuplicateAgent(owner)));
        }
        let entries = parse_list_tokens(line_no, &tokens, own, opposite)?;
        *slot = Some(PreferenceList::new(&entries)?);
    }

    let collect = |lists: Vec<Option<PreferenceList>>, names: &[String]| -> Result<Vec<PreferenceList>> {
        lists
            .into_iter()
            .zip(names)
            .map(|(l, n)| l.ok_or_else(|| perr(0, ParseErrorKind::MissingList(n.clone()))))
            .collect()
    };
    let men_lists = collect(men_lists, &men)?;
    let women_lists = collect(women_lists, &women)?;
    Profile::new(Arc::new(Instance { men, women }), men_lists, women_lists)
}

fn render_list(profile: &Profile, agent: AgentId) -> Vec<String> {
    let inst = profile.instance();
    let opposite = match agent.side {
        Side::Man => &inst.women,
        Side::Woman => &inst.men,
    };
    profile
        .list(agent)
        .entries()
        .map(|e| match e {
            Entry::Agent(i) => opposite[i].clone(),
            Entry::Single => SELF_MARKER.to_string(),
        })
        .collect()
}

/// Canonical text form: headers, then men's lists, then women's lists.
pub fn serialize_profile(profile: &Profile) -> String {
    let inst = profile.instance();
    let mut out = String::new();
    out.push_str(&format!("men: {}\n", inst.men.join(" ")));
    out.push_str(&format!("women: {}\n", inst.women.join(" ")));
    for agent in profile.agents() {
        out.push_str(&format!("{}: {}\n", inst.name(agent), render_list(profile, agent).join(" ")));
    }
    out
}

/// JSON shape of an instance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub men: Vec<String>,
    pub women: Vec<String>,
    pub lists: Vec<ListJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListJson {
    pub agent: String,
    pub order: Vec<String>,
}

pub fn profile_to_json(profile: &Profile) -> ProfileJson {
    let inst = profile.instance();
    ProfileJson {
        men: inst.men.clone(),
        women: inst.women.clone(),
        lists: profile
            .agents()
            .map(|a| ListJson { agent: inst.name(a).to_string(), order: render_list(profile, a) })
            .collect(),
    }
}

/// Parses the JSON form by rewriting it into the text form, so both share
/// one set of validation rules.
pub fn profile_from_json(text: &str) -> Result<Profile> {
    let doc: ProfileJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    let mut t = format!("men: {}\nwomen: {}\n", doc.men.join(" "), doc.women.join(" "));
    for l in &doc.lists {
        t.push_str(&format!("{}: {}\n", l.agent, l.order.join(" ")));
    }
    parse_profile(&t)
}

/// Accepts either format, sniffing for a leading `{`.
pub fn parse_any(text: &str) -> Result<Profile> {
    if text.trim_start().starts_with('{') {
        profile_from_json(text)
    } else {
        parse_profile(text)
    }
}
