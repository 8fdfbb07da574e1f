//! The example programs shipped with the crate.

pub const LISTNAT: &str = include_str!("../fixtures/listnat.lp");
pub const LISTNAT_PLUS: &str = include_str!("../fixtures/listnat_plus.lp");
pub const GC: &str = include_str!("../fixtures/gc.lp");
pub const BAD: &str = include_str!("../fixtures/bad.lp");
pub const GROUND_ABCD: &str = include_str!("../fixtures/ground_abcd.lp");

/// `(file name, source)` for every fixture.
pub const ALL: [(&str, &str); 5] = [
    ("listnat.lp", LISTNAT),
    ("listnat_plus.lp", LISTNAT_PLUS),
    ("gc.lp", GC),
    ("bad.lp", BAD),
    ("ground_abcd.lp", GROUND_ABCD),
];

pub fn by_name(name: &str) -> Option<&'static str> {
    let name = name.rsplit(['/', '\\']).next().unwrap_or(name);
    ALL.iter()
        .find(|(n, _)| *n == name || n.trim_end_matches(".lp") == name)
        .map(|(_, s)| *s)
}

/// Parsed fixtures, in [`ALL`] order.
pub fn corpus() -> Vec<(&'static str, crate::syntax::Program)> {
    ALL.iter()
        .map(|(n, s)| (*n, crate::syntax::parse_program(s).expect("fixture parses")))
        .collect()
}
