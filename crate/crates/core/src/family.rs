//! Finite sets of finite sets over a discrete carrier.

use std::collections::BTreeSet;

/// An element of `P_f P_f X`, kept duplicate-free and sorted.
pub type Family<T> = BTreeSet<BTreeSet<T>>;

/// The lifted order on a discrete carrier: every inner set of `a` is
/// contained in some inner set of `b`.
pub fn family_leq<T: Ord>(a: &Family<T>, b: &Family<T>) -> bool {
    a.iter().all(|s| b.iter().any(|t| s.is_subset(t)))
}

/// Image under `f`, applied to every element of every inner set.
pub fn map_family<T, U: Ord>(family: &Family<T>, mut f: impl FnMut(&T) -> U) -> Family<U> {
    family
        .iter()
        .map(|s| s.iter().map(&mut f).collect())
        .collect()
}

pub fn render_family<T>(family: &Family<T>, show: &dyn Fn(&T) -> String) -> String {
    if family.is_empty() {
        return "∅".into();
    }
    let inner: Vec<String> = family
        .iter()
        .map(|s| {
            if s.is_empty() {
                "∅".to_string()
            } else {
                format!("{{{}}}", s.iter().map(show).collect::<Vec<_>>().join(", "))
            }
        })
        .collect();
    format!("{{{}}}", inner.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(sets: &[&[u8]]) -> Family<u8> {
        sets.iter().map(|s| s.iter().copied().collect()).collect()
    }

    #[test]
    fn empty_family_is_least() {
        assert!(family_leq(&fam(&[]), &fam(&[&[]])));
        assert!(!family_leq(&fam(&[&[]]), &fam(&[])));
    }

    #[test]
    fn subset_witnessing() {
        assert!(family_leq(&fam(&[&[1], &[2]]), &fam(&[&[1, 2]])));
        assert!(!family_leq(&fam(&[&[1, 3]]), &fam(&[&[1, 2], &[3]])));
    }

    #[test]
    fn rendering() {
        assert_eq!(render_family(&fam(&[]), &|x| x.to_string()), "∅");
        assert_eq!(
            render_family(&fam(&[&[], &[1, 2]]), &|x| x.to_string()),
            "{∅, {1, 2}}"
        );
    }
}
