use sha2::{Digest, Sha256};
use ssm_core::fixtures::{COLLEGES, PROFILES};

const DIGESTS: &[(&str, &str)] = &[
    ("college_deviation", "07d3e4ec5566b6a775cd5b0a869dd249297f49e35cd52e8fca4b162b3598e9db"),
    ("college_sincere", "a11ff40433cded527f5b640c441b581603e60bb3327039f976c18b8609ff7119"),
    ("egal_equilibrium2", "8b9d8bcf6f62159fdf6f470a49321dceebd453feaed67b41acaceb669e8f9514"),
    ("egal_putative1", "880cee5a4653ee946ebda3f539dfbc0a71a4939585dddd7b76c40baad96cabab"),
    ("egal_putative2", "b49f2ab1b55060299c6b76d93a6d8f0bfcb2ac7c91ff64b3c73317d5d80d6160"),
    ("egal_sincere1", "6b848d02171153f9c4361a6423e69aa4a090171de95aef8d58e8b264fc73b425"),
    ("egal_sincere2", "28466510be92189a72580730ecb60908f02d0f227defcbaf58afaa4ad815c2d2"),
    ("no_eq_putative_a", "496595ae78112da988d0d040001d25ee452cfd04875943c597c62b698b36c86a"),
    ("no_eq_putative_b", "fd2c23e62a5615c3833dee13ec171abe037f26728f83a0939a9b6bd7774df988"),
    ("no_eq_sincere", "1f5a66e3408d957b70dba7809f24cb858e0db7f9d616e2092c96c08bf8a654f4"),
    ("partial_putative", "9e8c251bffc735bfe5e365c7d2e0651b5cb7e93fd795b7f1bf7611f50551ec38"),
    ("partial_sincere", "477963a5f406e7672584ea5deb1747adb0fc31cb5fb9bdd6519c8a7825c9df3b"),
    ("penalty_putative1", "cc16e6d3d51e1580e10768f74fd6a834a52ca83a49820971f1dfefc9477427c0"),
    ("penalty_putative2", "147e630ef726056441ae11be95ff3479ff43c2cee38952458629fbc8fe089bea"),
    ("penalty_sincere", "d55d2f5338abb8bc5e943e3b8b095725bd5ec493e93303c55fbb03a1d004ab66"),
    ("placement_deviation", "211fb7be174573dc4a8ccef88647bd5e5f077a8b107f7793eb3caf10978d6338"),
    ("placement_sincere", "829c028a727631f08b91905a873057b1b5921b2d9a326a59d7d03f84f6f9425b"),
    ("truncation_sincere", "dd7f5ee522183711cfb5a61d0ed4509434ce4179f3eaf712112802cb30df8a7b"),
    ("truncation_swapped", "39b5b8a7828a6adb27e99e77988c5e285359828d14595116d61533420b790a43"),
    ("truncation_truncated", "630c4e46f41d6b72937ece83910d30cfc1cf262f7ea3c87d21c0cfb407efba9a"),
];

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn bundled_fixtures_are_frozen() {
    let all: Vec<(&str, &str)> = PROFILES.iter().chain(COLLEGES.iter()).copied().collect();
    assert_eq!(all.len(), DIGESTS.len());
    for (name, text) in all {
        let want = DIGESTS.iter().find(|(n, _)| *n == name).unwrap_or_else(|| panic!("no digest for {name}")).1;
        assert_eq!(hex(&Sha256::digest(text.as_bytes())), want, "{name} changed");
    }
}
