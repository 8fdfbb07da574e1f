//! Atoms with existentially quantified variables.
//!
//! An [`ExtAtom`] over `n` is an atom over `n + k` whose last `k` variables
//! are existentials, printed `z1..zk`. Up to renaming of the existentials
//! every such atom has a canonical form in which the existentials are
//! exactly `n..n+k`, each occurring, numbered by first occurrence.
//! Nesting one layer inside another and flattening gives the monad
//! structure; [`dist_law`] turns a set of families over `n + k` into a
//! family of pointwise-canonical extended atoms over `n`.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::ContextMismatch;
use crate::family::{map_family, Family};
use crate::lawvere::{apply_unchecked, injection_subst, Injection, Substitution};
use crate::syntax::{Atom, Signature, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtAtom {
    bound: usize,
    exist: usize,
    atom: Atom,
}

impl ExtAtom {
    /// Wraps `atom` (over `bound + exist`) without renumbering.
    pub fn scoped(bound: usize, exist: usize, atom: Atom) -> Result<ExtAtom, ContextMismatch> {
        if atom.context != bound + exist {
            return Err(ContextMismatch {
                expected: bound + exist,
                found: atom.context,
            });
        }
        Ok(ExtAtom { bound, exist, atom })
    }

    pub(crate) fn scoped_unchecked(bound: usize, exist: usize, atom: Atom) -> ExtAtom {
        debug_assert_eq!(atom.context, bound + exist);
        ExtAtom { bound, exist, atom }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn exist(&self) -> usize {
        self.exist
    }

    pub fn atom(&self) -> &Atom {
        &self.atom
    }

    /// Existentials occur, each at least once, in first-occurrence order.
    pub fn is_canonical(&self) -> bool {
        let order: Vec<usize> = first_occurrences(&self.atom)
            .into_iter()
            .filter(|&v| v >= self.bound)
            .collect();
        order.len() == self.exist && order.iter().enumerate().all(|(j, &v)| v == self.bound + j)
    }

    pub fn name(&self, i: usize) -> String {
        if i < self.bound {
            format!("x{}", i + 1)
        } else {
            format!("z{}", i - self.bound + 1)
        }
    }
}

impl fmt::Display for ExtAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.atom.render(&|i| self.name(i)))
    }
}

impl Serialize for ExtAtom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn first_occurrences(atom: &Atom) -> Vec<usize> {
    let mut out = Vec::new();
    for v in atom.vars() {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Treats variables `>= bound` as existential and renames them to
/// `bound..` by first occurrence, dropping unused ones.
pub fn canonicalize(atom: &Atom, bound: usize) -> ExtAtom {
    let exist: Vec<usize> = first_occurrences(atom)
        .into_iter()
        .filter(|&v| v >= bound)
        .collect();
    let k = exist.len();
    let renamed = atom.map_vars(bound + k, &mut |v| {
        if v < bound {
            Term::Var(v)
        } else {
            Term::Var(bound + exist.iter().position(|&e| e == v).expect("collected"))
        }
    });
    ExtAtom {
        bound,
        exist: k,
        atom: renamed,
    }
}

/// Canonicalizes a tuple of atoms together: existentials are numbered by
/// first occurrence across the whole tuple, so atoms that share one keep
/// sharing it, and every result lives in the same scope.
pub fn canonicalize_joint(atoms: &[Atom], bound: usize) -> Vec<ExtAtom> {
    let mut exist: Vec<usize> = Vec::new();
    for a in atoms {
        for v in first_occurrences(a) {
            if v >= bound && !exist.contains(&v) {
                exist.push(v);
            }
        }
    }
    let k = exist.len();
    atoms
        .iter()
        .map(|a| {
            let renamed = a.map_vars(bound + k, &mut |v| {
                if v < bound {
                    Term::Var(v)
                } else {
                    Term::Var(bound + exist.iter().position(|&e| e == v).expect("collected"))
                }
            });
            ExtAtom {
                bound,
                exist: k,
                atom: renamed,
            }
        })
        .collect()
}

/// An ordinary atom as an extended atom without existentials.
pub fn embed(atom: &Atom) -> ExtAtom {
    ExtAtom {
        bound: atom.context,
        exist: 0,
        atom: atom.clone(),
    }
}

/// Reindexing along `f: n -> n'`: `f` acts on the bound variables and the
/// existentials are carried along unchanged.
pub fn int_map(f: &Substitution, e: &ExtAtom) -> Result<ExtAtom, ContextMismatch> {
    if f.target() != e.bound {
        return Err(ContextMismatch {
            expected: e.bound,
            found: f.target(),
        });
    }
    Ok(int_map_unchecked(f, e))
}

pub(crate) fn int_map_unchecked(f: &Substitution, e: &ExtAtom) -> ExtAtom {
    ExtAtom {
        bound: f.source(),
        exist: e.exist,
        atom: apply_unchecked(&f.extend(e.exist), &e.atom),
    }
}

/// Two layers of existentials: `inner` lives over `bound + exist`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NestedExtAtom {
    pub bound: usize,
    pub exist: usize,
    pub inner: ExtAtom,
}

impl NestedExtAtom {
    pub fn new(
        bound: usize,
        exist: usize,
        inner: ExtAtom,
    ) -> Result<NestedExtAtom, ContextMismatch> {
        if inner.bound != bound + exist {
            return Err(ContextMismatch {
                expected: bound + exist,
                found: inner.bound,
            });
        }
        Ok(NestedExtAtom {
            bound,
            exist,
            inner,
        })
    }

    /// Canonical two-layer form of `atom`: variables in `[bound, bound + outer)`
    /// are the outer existentials, the rest the inner ones.
    pub fn canonical(atom: &Atom, bound: usize, outer: usize) -> NestedExtAtom {
        let order = first_occurrences(atom);
        let outer_vars: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&v| v >= bound && v < bound + outer)
            .collect();
        let inner_vars: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&v| v >= bound + outer)
            .collect();
        let k = outer_vars.len();
        let l = inner_vars.len();
        let renamed = atom.map_vars(bound + k + l, &mut |v| {
            Term::Var(if v < bound {
                v
            } else if v < bound + outer {
                bound + outer_vars.iter().position(|&o| o == v).expect("collected")
            } else {
                bound + k + inner_vars.iter().position(|&o| o == v).expect("collected")
            })
        });
        NestedExtAtom {
            bound,
            exist: k,
            inner: ExtAtom {
                bound: bound + k,
                exist: l,
                atom: renamed,
            },
        }
    }
}

/// Merges the two layers of existentials into one.
pub fn flatten(nested: &NestedExtAtom) -> ExtAtom {
    canonicalize(&nested.inner.atom, nested.bound)
}

/// Unit on the outside: no outer existentials.
pub fn unit_outer(e: &ExtAtom) -> NestedExtAtom {
    NestedExtAtom {
        bound: e.bound,
        exist: 0,
        inner: e.clone(),
    }
}

/// Unit on the inside: every existential becomes an outer one.
pub fn unit_inner(e: &ExtAtom) -> NestedExtAtom {
    NestedExtAtom {
        bound: e.bound,
        exist: e.exist,
        inner: ExtAtom {
            bound: e.bound + e.exist,
            exist: 0,
            atom: e.atom.clone(),
        },
    }
}

/// Three layers, used for associativity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleExtAtom {
    pub bound: usize,
    pub exist: usize,
    pub middle: NestedExtAtom,
}

/// Flatten the two outer layers first, then the result.
pub fn flatten_outer_first(t: &TripleExtAtom) -> ExtAtom {
    let merged = NestedExtAtom {
        bound: t.bound,
        exist: t.exist + t.middle.exist,
        inner: t.middle.inner.clone(),
    };
    flatten(&merged)
}

/// Flatten the two inner layers first, then the result.
pub fn flatten_inner_first(t: &TripleExtAtom) -> ExtAtom {
    flatten(&NestedExtAtom {
        bound: t.bound,
        exist: t.exist,
        inner: flatten(&t.middle),
    })
}

/// A set of families over `bound + exist`, the raw output of matching
/// clause heads with existentials placed after the bound variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntFamily {
    pub bound: usize,
    pub exist: usize,
    pub family: Family<Atom>,
}

/// Pointwise canonicalization of every atom of every set.
pub fn dist_law(x: &IntFamily) -> Family<ExtAtom> {
    map_family(&x.family, |a| canonicalize(a, x.bound))
}

/// Joint canonicalization of every set, taking each set's atoms in order.
pub fn dist_law_joint(x: &IntFamily) -> Family<ExtAtom> {
    x.family
        .iter()
        .map(|set| {
            canonicalize_joint(&set.iter().cloned().collect::<Vec<_>>(), x.bound)
                .into_iter()
                .collect()
        })
        .collect()
}

/// Reindexes an [`IntFamily`] along an injection `n -> m`.
pub fn reindex_int_family(i: &Injection, x: &IntFamily) -> IntFamily {
    let sub = injection_subst(i).extend(x.exist);
    IntFamily {
        bound: i.target(),
        exist: x.exist,
        family: map_family(&x.family, |a| apply_unchecked(&sub, a)),
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LawReport {
    pub samples: usize,
    pub violations: Vec<String>,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn law_signature(signature: &Signature) -> Signature {
    let mut sig = signature.clone();
    if sig.predicates.is_empty() {
        sig.predicates.insert("p".into(), 2);
    }
    sig
}

/// Unit and associativity laws of flattening on seeded random samples.
pub fn check_monad_laws(signature: &Signature, samples: usize, seed: u64) -> LawReport {
    let sig = law_signature(signature);
    let mut rng = crate::random::rng(seed);
    let mut report = LawReport {
        samples,
        violations: Vec::new(),
    };
    for _ in 0..samples {
        let n = rng.gen_range(0..=2);
        let (a, b, c) = (
            rng.gen_range(0..=2),
            rng.gen_range(0..=2),
            rng.gen_range(0..=2),
        );
        let atom = crate::random::random_atom(&mut rng, &sig, n + a + b + c, 2);
        let e = canonicalize(&atom, n);
        if flatten(&unit_outer(&e)) != e {
            report.violations.push(format!("left unit fails at {e}"));
        }
        if flatten(&unit_inner(&e)) != e {
            report.violations.push(format!("right unit fails at {e}"));
        }
        let outer = NestedExtAtom::canonical(&atom, n, a);
        let middle = NestedExtAtom::canonical(outer.inner.atom(), n + outer.exist, b);
        let t = TripleExtAtom {
            bound: n,
            exist: outer.exist,
            middle,
        };
        if flatten_outer_first(&t) != flatten_inner_first(&t) {
            report
                .violations
                .push(format!("associativity fails at {}", t.middle.inner));
        }
    }
    report
}

/// Naturality of [`dist_law`] along injections, on seeded random samples.
pub fn check_dist_naturality(signature: &Signature, samples: usize, seed: u64) -> LawReport {
    let sig = law_signature(signature);
    let mut rng = crate::random::rng(seed);
    let mut report = LawReport {
        samples,
        violations: Vec::new(),
    };
    for _ in 0..samples {
        let n = rng.gen_range(0..=2);
        let k = rng.gen_range(0..=2);
        let m = n + rng.gen_range(0..=2);
        let injections = Injection::all(n, m);
        let i = &injections[rng.gen_range(0..injections.len())];
        let mut family = Family::new();
        for _ in 0..rng.gen_range(0..=3) {
            let size = rng.gen_range(0..=3);
            family.insert(
                (0..size)
                    .map(|_| crate::random::random_atom(&mut rng, &sig, n + k, 2))
                    .collect(),
            );
        }
        let x = IntFamily {
            bound: n,
            exist: k,
            family,
        };
        let sub = injection_subst(i);
        let lhs = map_family(&dist_law(&x), |e| int_map_unchecked(&sub, e));
        let rhs = dist_law(&reindex_int_family(i, &x));
        if lhs != rhs {
            report.violations.push(format!(
                "naturality fails along {:?} for {:?}",
                i.map(),
                x.family
            ));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_atom_indexed;

    fn atom(text: &str, bound: usize, exist: usize) -> Atom {
        parse_atom_indexed(text, bound, exist).unwrap()
    }

    #[test]
    fn canonical_numbering() {
        let e = canonicalize(&atom("p(z3,x1,z1,z3)", 1, 3), 1);
        assert_eq!(e.exist(), 2);
        assert_eq!(e.to_string(), "p(z1,x1,z2,z1)");
        assert!(e.is_canonical());
        assert!(!ExtAtom::scoped(1, 2, atom("p(z2,z1)", 1, 2))
            .unwrap()
            .is_canonical());
    }

    #[test]
    fn joint_keeps_sharing() {
        let body = [atom("edge(x1,z2)", 2, 2), atom("connected(z2,x2)", 2, 2)];
        let joint: Vec<String> = canonicalize_joint(&body, 2)
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(joint, ["edge(x1,z1)", "connected(z1,x2)"]);
        let apart = [atom("p(z2)", 0, 2), atom("p(z1)", 0, 2)];
        let joint = canonicalize_joint(&apart, 0);
        assert_eq!(joint[1].to_string(), "p(z2)");
        assert_eq!(canonicalize(&apart[1], 0).to_string(), "p(z1)");
    }

    #[test]
    fn embed_is_canonical() {
        let e = embed(&atom("nat(s(x1))", 1, 0));
        assert!(e.is_canonical());
        assert_eq!(canonicalize(e.atom(), 1), e);
    }

    #[test]
    fn int_map_shifts_existentials() {
        let e = canonicalize(&atom("edge(x1,z1)", 1, 1), 1);
        let f = Substitution::new(2, vec![Term::Var(1)]).unwrap();
        let mapped = int_map(&f, &e).unwrap();
        assert_eq!(mapped.to_string(), "edge(x2,z1)");
        assert_eq!(mapped.atom().context, 3);
        assert!(int_map(&Substitution::new(0, vec![]).unwrap(), &e).is_err());
    }

    #[test]
    fn laws_hold() {
        let sig = crate::syntax::parse_program(crate::fixtures::LISTNAT)
            .unwrap()
            .signature;
        assert!(check_monad_laws(&sig, 300, 7).holds());
        assert!(check_dist_naturality(&sig, 300, 7).holds());
        assert!(check_monad_laws(&Signature::new(), 100, 1).holds());
    }

    #[test]
    fn nested_canonical_form() {
        let nested = NestedExtAtom::canonical(&atom("p(z3,z1,x1)", 1, 3), 1, 1);
        assert_eq!(nested.exist, 1);
        assert_eq!(nested.inner.exist(), 1);
        assert_eq!(flatten(&nested).to_string(), "p(z1,z2,x1)");
    }
}
