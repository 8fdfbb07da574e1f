use std::collections::BTreeSet;

use super::{Atom, Signature, Term};

/// All terms over `x1..xn` of depth at most `max_depth`, without duplicates.
///
/// Order: variables, then constants in signature order, then for each
/// further depth the new terms symbol by symbol with arguments in
/// odometer order over the previous list.
pub fn enumerate_terms(signature: &Signature, n: usize, max_depth: usize) -> Vec<Term> {
    let mut terms: Vec<Term> = (0..n).map(Term::Var).collect();
    terms.extend(signature.constants().map(Term::constant));
    // `terms[frontier..]` are exactly the terms of the current maximal depth.
    let mut frontier = 0;
    for _ in 0..max_depth {
        let previous = terms.len();
        let mut fresh = Vec::new();
        for (symbol, &arity) in &signature.functions {
            if arity == 0 {
                continue;
            }
            for_each_tuple(previous, arity, |idx| {
                if idx.iter().any(|&i| i >= frontier) {
                    fresh.push(Term::App(
                        symbol.clone(),
                        idx.iter().map(|&i| terms[i].clone()).collect(),
                    ));
                }
            });
        }
        if fresh.is_empty() {
            break;
        }
        frontier = previous;
        terms.extend(fresh);
    }
    terms
}

/// Visits every `len`-tuple of indices below `base`, last position fastest.
pub(crate) fn for_each_tuple(base: usize, len: usize, mut visit: impl FnMut(&[usize])) {
    if len == 0 {
        visit(&[]);
        return;
    }
    if base == 0 {
        return;
    }
    let mut idx = vec![0usize; len];
    loop {
        visit(&idx);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < base {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// The atoms over `x1..xn` whose arguments all have depth at most `max_depth`.
pub fn enumerate_atoms(signature: &Signature, n: usize, max_depth: usize) -> BTreeSet<Atom> {
    let terms = enumerate_terms(signature, n, max_depth);
    let mut out = BTreeSet::new();
    for (pred, &arity) in &signature.predicates {
        for_each_tuple(terms.len(), arity, |idx| {
            out.insert(Atom {
                predicate: pred.clone(),
                args: idx.iter().map(|&i| terms[i].clone()).collect(),
                context: n,
            });
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn listnat() -> Signature {
        parse_program(crate::fixtures::LISTNAT).unwrap().signature
    }

    fn names(set: &BTreeSet<Atom>) -> BTreeSet<String> {
        set.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn ground_depth_zero() {
        let got = names(&enumerate_atoms(&listnat(), 0, 0));
        let want: BTreeSet<String> = ["nat(0)", "nat(nil)", "list(0)", "list(nil)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn one_variable_depth_zero_adds_variable_atoms() {
        let got = names(&enumerate_atoms(&listnat(), 1, 0));
        let mut want = names(&enumerate_atoms(&listnat(), 0, 0));
        want.insert("nat(x1)".into());
        want.insert("list(x1)".into());
        assert_eq!(got, want);
    }

    #[test]
    fn no_constants_no_ground_atoms() {
        let sig = parse_program("p(f(X)) :- q(X).").unwrap().signature;
        for d in 0..3 {
            assert!(enumerate_atoms(&sig, 0, d).is_empty());
        }
    }

    #[test]
    fn depth_one_terms_over_one_variable() {
        let got: Vec<String> = enumerate_terms(&listnat(), 1, 1)
            .iter()
            .map(ToString::to_string)
            .collect();
        // x1, 0, nil, then s(.) over three depth-0 terms, then cons over nine pairs.
        assert_eq!(got.len(), 3 + 3 + 9);
        assert_eq!(&got[..6], &["x1", "0", "nil", "s(x1)", "s(0)", "s(nil)"]);
        assert!(got.contains(&"cons(nil,x1)".to_string()));
    }

    #[test]
    fn no_duplicates_and_depth_bounded() {
        let terms = enumerate_terms(&listnat(), 2, 2);
        let set: BTreeSet<_> = terms.iter().collect();
        assert_eq!(set.len(), terms.len());
        assert!(terms.iter().all(|t| t.depth() <= 2));
        // depth <= 1 over two variables: 4 + 4 + 16; depth 2 adds 20 + (24^2 - 4^2).
        assert_eq!(terms.len(), 24 + 20 + 560);
    }

    #[test]
    fn monotone_in_context_and_depth() {
        let sig = listnat();
        for n in 0..2 {
            for d in 0..2 {
                let small = enumerate_atoms(&sig, n, d);
                let wider: BTreeSet<Atom> = enumerate_atoms(&sig, n + 1, d).into_iter().collect();
                let deeper = enumerate_atoms(&sig, n, d + 1);
                for a in &small {
                    assert!(wider.contains(&a.weaken(1)));
                    assert!(deeper.contains(a));
                }
            }
        }
    }
}
