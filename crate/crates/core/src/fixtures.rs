//! Instances transcribed from published tables, bundled into the binary.

use crate::college::{parse_college, CollegeInstance};
use crate::error::{Error, Result};
use crate::format::parse_profile;
use crate::model::Profile;

/// `(name, file contents)` for every bundled one-to-one fixture.
pub const PROFILES: &[(&str, &str)] = &[
    ("egal_sincere1", include_str!("../fixtures/egal_sincere1.txt")),
    ("egal_putative1", include_str!("../fixtures/egal_putative1.txt")),
    ("egal_sincere2", include_str!("../fixtures/egal_sincere2.txt")),
    ("egal_putative2", include_str!("../fixtures/egal_putative2.txt")),
    ("egal_equilibrium2", include_str!("../fixtures/egal_equilibrium2.txt")),
    ("no_eq_sincere", include_str!("../fixtures/no_eq_sincere.txt")),
    ("no_eq_putative_a", include_str!("../fixtures/no_eq_putative_a.txt")),
    ("no_eq_putative_b", include_str!("../fixtures/no_eq_putative_b.txt")),
    ("placement_sincere", include_str!("../fixtures/placement_sincere.txt")),
    ("placement_deviation", include_str!("../fixtures/placement_deviation.txt")),
    ("partial_sincere", include_str!("../fixtures/partial_sincere.txt")),
    ("partial_putative", include_str!("../fixtures/partial_putative.txt")),
    ("truncation_sincere", include_str!("../fixtures/truncation_sincere.txt")),
    ("truncation_truncated", include_str!("../fixtures/truncation_truncated.txt")),
    ("truncation_swapped", include_str!("../fixtures/truncation_swapped.txt")),
    ("penalty_sincere", include_str!("../fixtures/penalty_sincere.txt")),
    ("penalty_putative1", include_str!("../fixtures/penalty_putative1.txt")),
    ("penalty_putative2", include_str!("../fixtures/penalty_putative2.txt")),
];

pub const COLLEGES: &[(&str, &str)] = &[
    ("college_sincere", include_str!("../fixtures/college_sincere.txt")),
    ("college_deviation", include_str!("../fixtures/college_deviation.txt")),
];

fn raw(table: &[(&str, &'static str)], name: &str) -> Result<&'static str> {
    table.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| Error::UnknownCase(name.to_string()))
}

pub fn load(name: &str) -> Result<Profile> {
    parse_profile(raw(PROFILES, name)?)
}

pub fn load_college(name: &str) -> Result<CollegeInstance> {
    parse_college(raw(COLLEGES, name)?)
}

/// The `# caption:` line of a fixture.
pub fn caption(name: &str) -> Result<String> {
    let text = raw(PROFILES, name).or_else(|_| raw(COLLEGES, name))?;
    Ok(text.lines().find_map(|l| l.strip_prefix("# caption:")).map(|c| c.trim().to_string()).unwrap_or_default())
}
