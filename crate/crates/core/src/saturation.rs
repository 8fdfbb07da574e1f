//! Saturated semantics on a finite slice of substitutions.
//!
//! For a root atom over `n`, the saturated value records the one-step
//! value of every instance `apply(σ, root)` with `σ: m -> n`, `m <= M`
//! and terms of depth at most `d`. Desaturation reads the identity entry
//! back. Coherence asks that reindexing an entry along any further arrow
//! `g` lands below the entry of the composite, with equality along
//! injections.

use std::collections::HashMap;

use serde::Serialize;

use crate::coalgebra::step_ext;
use crate::exec::Exec;
use crate::family::{family_leq, map_family, render_family, Family};
use crate::intfunctor::{embed, int_map_unchecked, ExtAtom};
use crate::lawvere::{
    apply_unchecked, compose, enumerate_substitutions, identity_subst, Substitution,
};
use crate::syntax::{enumerate_atoms, enumerate_terms, Atom, Program, Signature, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_context: usize,
    pub max_depth: usize,
}

impl Bounds {
    /// `M = n + 2`, `d = 2`.
    pub fn default_for(n: usize) -> Bounds {
        Bounds {
            max_context: n + 2,
            max_depth: 2,
        }
    }

    fn min(self, other: Bounds) -> Bounds {
        Bounds {
            max_context: self.max_context.min(other.max_context),
            max_depth: self.max_depth.min(other.max_depth),
        }
    }

    fn admits(&self, sub: &Substitution) -> bool {
        sub.source() <= self.max_context && sub.depth() <= self.max_depth
    }
}

/// A root sample small enough to saturate at default bounds: ground atoms of
/// depth at most 1, flat atoms over one variable, and flat atoms over two
/// variables when the signature has no proper function symbols.
pub fn sample_roots(program: &Program) -> Vec<Atom> {
    let sig = &program.signature;
    let flat_only = sig.functions.values().all(|&a| a == 0);
    let mut out: Vec<Atom> = enumerate_atoms(sig, 0, 1).into_iter().collect();
    for n in 1..=if flat_only { 2 } else { 1 } {
        for a in enumerate_atoms(sig, n, 0) {
            let mut vars = a.vars();
            vars.sort_unstable();
            vars.dedup();
            if vars.len() == n {
                out.push(a);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturatedValue {
    root: Atom,
    bounds: Bounds,
    signature: Signature,
    entries: Vec<(Substitution, Family<ExtAtom>)>,
    index: HashMap<Substitution, usize>,
}

/// Printed key of a table entry: the arrow, then its source context.
pub fn entry_key(sub: &Substitution) -> String {
    format!("{sub} : {}", sub.source())
}

impl SaturatedValue {
    pub fn root(&self) -> &Atom {
        &self.root
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, sub: &Substitution) -> Option<&Family<ExtAtom>> {
        self.index.get(sub).map(|&i| &self.entries[i].1)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Substitution, &Family<ExtAtom>)> {
        self.entries.iter().map(|(s, v)| (s, v))
    }

    /// Overwrites one entry, returning the old value.
    pub fn replace(
        &mut self,
        sub: &Substitution,
        value: Family<ExtAtom>,
    ) -> Option<Family<ExtAtom>> {
        let i = *self.index.get(sub)?;
        Some(std::mem::replace(&mut self.entries[i].1, value))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(s, v)| {
                serde_json::json!({
                    "substitution": entry_key(s),
                    "value": render_family(v, &|e| e.to_string()),
                })
            })
            .collect();
        serde_json::json!({
            "root": self.root.to_string(),
            "bounds": self.bounds,
            "entries": entries,
        })
    }
}

pub fn saturate(program: &Program, atom: &Atom, bounds: Bounds) -> SaturatedValue {
    saturate_with(program, atom, bounds, Exec::default())
}

/// Entries are ordered by source context, then by enumeration order.
pub fn saturate_with(program: &Program, atom: &Atom, bounds: Bounds, exec: Exec) -> SaturatedValue {
    let n = atom.context;
    let subs: Vec<Substitution> = (0..=bounds.max_context)
        .flat_map(|m| enumerate_substitutions(&program.signature, m, n, bounds.max_depth))
        .collect();
    let values = exec.map(&subs, |s| {
        step_ext(program, &embed(&apply_unchecked(s, atom)))
    });
    let entries: Vec<_> = subs.into_iter().zip(values).collect();
    let index = entries
        .iter()
        .enumerate()
        .map(|(i, (s, _))| (s.clone(), i))
        .collect();
    SaturatedValue {
        root: atom.clone(),
        bounds,
        signature: program.signature.clone(),
        entries,
        index,
    }
}

/// The identity entry.
pub fn desaturate(sat: &SaturatedValue) -> Family<ExtAtom> {
    sat.get(&identity_subst(sat.root.context))
        .cloned()
        .expect("identity is always within bounds")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub f: String,
    pub g: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CoherenceReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl CoherenceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_coherence(sat: &SaturatedValue, bounds: Bounds) -> CoherenceReport {
    check_coherence_with(sat, bounds, Exec::default())
}

/// For every entry `f: m -> n` and every `g: m' -> m` with `g ∘ f` in
/// bounds, compares the reindexed entry with the entry at `g ∘ f`.
///
/// Both sides only depend on `g` at the variables `f` mentions, so `g` is
/// enumerated on those variables and padded elsewhere: injectively when
/// the chosen images are distinct variables and there is room, otherwise
/// with a fixed term.
pub fn check_coherence_with(sat: &SaturatedValue, bounds: Bounds, exec: Exec) -> CoherenceReport {
    let bounds = bounds.min(sat.bounds);
    let fs: Vec<&(Substitution, Family<ExtAtom>)> = sat
        .entries
        .iter()
        .filter(|(f, _)| bounds.admits(f))
        .collect();
    // terms[m'][e]: all terms over m' variables of depth at most e.
    let terms: Vec<Vec<Vec<Term>>> = (0..=bounds.max_context)
        .map(|m2| {
            (0..=bounds.max_depth)
                .map(|e| enumerate_terms(&sat.signature, m2, e))
                .collect()
        })
        .collect();
    let parts = exec.map(&fs, |(f, value)| {
        coherence_at(sat, bounds, &terms, f, value)
    });
    parts
        .into_iter()
        .fold(CoherenceReport::default(), |mut acc, r| {
            acc.checked += r.checked;
            acc.violations.extend(r.violations);
            acc
        })
}

fn coherence_at(
    sat: &SaturatedValue,
    bounds: Bounds,
    terms: &[Vec<Vec<Term>>],
    f: &Substitution,
    value: &Family<ExtAtom>,
) -> CoherenceReport {
    let mut report = CoherenceReport::default();
    let m = f.source();
    let mut used: Vec<usize> = Vec::new();
    for t in f.terms() {
        t.vars_into(&mut used);
    }
    used.sort_unstable();
    let deepest: Vec<usize> = used
        .iter()
        .map(|&x| {
            f.terms()
                .iter()
                .filter_map(|t| t.var_depth(x))
                .max()
                .expect("occurs")
        })
        .collect();
    for (m2, by_depth) in terms.iter().enumerate() {
        let choices: Vec<&[Term]> = deepest
            .iter()
            .map(|&p| by_depth[bounds.max_depth - p].as_slice())
            .collect();
        let filler = by_depth[0].first();
        odometer(&choices, |picked| {
            let Some(g) = pad(m, m2, &used, picked, filler) else {
                return;
            };
            let injective = is_injective(&g);
            report.checked += 1;
            if value.is_empty() && !injective {
                return;
            }
            let gf = compose(&g, f).expect("g targets the source of f");
            let lhs = map_family(value, |e| int_map_unchecked(&g, e));
            let Some(rhs) = sat.get(&gf) else {
                report
                    .violations
                    .push(violation(f, &g, "composite missing from the table"));
                return;
            };
            if injective && lhs != *rhs {
                report.violations.push(violation(
                    f,
                    &g,
                    "injection: reindexed entry differs from the composite entry",
                ));
            } else if !family_leq(&lhs, rhs) {
                report.violations.push(violation(
                    f,
                    &g,
                    "reindexed entry is not below the composite entry",
                ));
            }
        });
    }
    report
}

fn violation(f: &Substitution, g: &Substitution, detail: &str) -> Violation {
    Violation {
        f: entry_key(f),
        g: entry_key(g),
        detail: detail.into(),
    }
}

fn is_injective(g: &Substitution) -> bool {
    g.as_injection().is_some()
}

/// Completes a choice on `used` to an arrow `m2 -> m`.
fn pad(
    m: usize,
    m2: usize,
    used: &[usize],
    picked: &[&Term],
    filler: Option<&Term>,
) -> Option<Substitution> {
    let picked_vars: Option<Vec<usize>> = picked
        .iter()
        .map(|t| if let Term::Var(v) = t { Some(*v) } else { None })
        .collect();
    let distinct = picked_vars.as_ref().is_some_and(|vs| {
        let mut s = vs.clone();
        s.sort_unstable();
        s.dedup();
        s.len() == vs.len()
    });
    let mut spare = if distinct && m <= m2 {
        let taken = picked_vars.unwrap_or_default();
        Some((0..m2).filter(move |v| !taken.contains(v)))
    } else {
        None
    };
    let mut terms = Vec::with_capacity(m);
    for x in 0..m {
        if let Some(i) = used.iter().position(|&u| u == x) {
            terms.push(picked[i].clone());
        } else if let Some(free) = spare.as_mut() {
            terms.push(Term::Var(free.next().expect("room for an injection")));
        } else {
            terms.push(filler?.clone());
        }
    }
    Some(Substitution::new_unchecked(m2, terms))
}

fn odometer(choices: &[&[Term]], mut visit: impl FnMut(&[&Term])) {
    if choices.iter().any(|c| c.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        let picked: Vec<&Term> = idx.iter().zip(choices).map(|(&i, c)| &c[i]).collect();
        visit(&picked);
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom_indexed, parse_program};

    fn show(fam: &Family<ExtAtom>) -> String {
        render_family(fam, &|e| e.to_string())
    }

    fn sub(src: usize, terms: &[&str]) -> Substitution {
        Substitution::new(
            src,
            terms
                .iter()
                .map(|t| crate::syntax::parse_term_indexed(t, src, 0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn nat_entries() {
        let p = parse_program(crate::fixtures::LISTNAT).unwrap();
        let root = parse_atom_indexed("nat(x1)", 1, 0).unwrap();
        let sat = saturate(
            &p,
            &root,
            Bounds {
                max_context: 1,
                max_depth: 1,
            },
        );
        assert_eq!(show(sat.get(&identity_subst(1)).unwrap()), "∅");
        assert_eq!(show(sat.get(&sub(0, &["0"])).unwrap()), "{∅}");
        assert_eq!(show(sat.get(&sub(1, &["s(x1)"])).unwrap()), "{{nat(x1)}}");
        assert_eq!(entry_key(&sub(1, &["s(x1)"])), "{x1->s(x1)} : 1");
        assert!(check_coherence(&sat, sat.bounds()).holds());
    }

    #[test]
    fn empty_program_entries_are_empty() {
        let p = Program::default();
        let mut p2 = p.clone();
        p2.signature.predicates.insert("q".into(), 1);
        p2.signature.functions.insert("a".into(), 0);
        let root = parse_atom_indexed("q(x1)", 1, 0).unwrap();
        let sat = saturate(
            &p2,
            &root,
            Bounds {
                max_context: 2,
                max_depth: 1,
            },
        );
        assert!(sat.entries().all(|(_, v)| v.is_empty()));
    }

    #[test]
    fn corrupted_entry_is_caught_once() {
        let p = parse_program(crate::fixtures::LISTNAT).unwrap();
        let root = parse_atom_indexed("nat(x1)", 1, 0).unwrap();
        let bounds = Bounds {
            max_context: 1,
            max_depth: 2,
        };
        let mut sat = saturate(&p, &root, bounds);
        assert!(check_coherence(&sat, bounds).holds());
        sat.replace(&sub(1, &["s(s(x1))"]), Family::new()).unwrap();
        let r = check_coherence(&sat, bounds);
        assert_eq!(r.violations.len(), 1, "{:?}", r.violations);
        assert_eq!(r.violations[0].f, "{x1->s(x1)} : 1");
        assert_eq!(r.violations[0].g, "{x1->s(x1)} : 1");
    }

    #[test]
    fn gc_identity_entry() {
        let p = parse_program(crate::fixtures::GC).unwrap();
        let root = parse_atom_indexed("connected(x1,x2)", 2, 0).unwrap();
        let sat = saturate(&p, &root, Bounds::default_for(2));
        assert_eq!(show(&desaturate(&sat)), "{{connected(z1,x2), edge(x1,z1)}}");
        let r = check_coherence(&sat, sat.bounds());
        assert!(r.holds() && r.checked > 0);
    }
}
