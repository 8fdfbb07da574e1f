//! Substitutions as arrows of the Lawvere theory of a signature.
//!
//! An arrow `n -> m` is an `m`-tuple of terms over `x1..xn`. It acts on
//! atoms contravariantly: [`apply`] sends an atom over `m` to an atom over
//! `n` by replacing variable `i` with the `i`-th term. Composition is
//! substitution, [`identity_subst`] is the tuple of variables, and
//! injections of contexts embed as variable renamings.

use std::fmt;

use crate::error::ContextMismatch;
use crate::syntax::{enumerate::for_each_tuple, enumerate_terms, Atom, Signature, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    source: usize,
    terms: Vec<Term>,
}

impl Substitution {
    /// `terms` must all be well-scoped over `source`.
    pub fn new(source: usize, terms: Vec<Term>) -> Result<Substitution, ContextMismatch> {
        if let Some(bad) = terms.iter().map(Term::min_context).find(|&c| c > source) {
            return Err(ContextMismatch {
                expected: source,
                found: bad,
            });
        }
        Ok(Substitution { source, terms })
    }

    pub(crate) fn new_unchecked(source: usize, terms: Vec<Term>) -> Substitution {
        debug_assert!(terms.iter().all(|t| t.min_context() <= source));
        Substitution { source, terms }
    }

    /// Number of variables the terms may mention.
    pub fn source(&self) -> usize {
        self.source
    }

    /// Number of variables being substituted for.
    pub fn target(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, var: usize) -> &Term {
        &self.terms[var]
    }

    pub fn depth(&self) -> usize {
        self.terms.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target()
            && self
                .terms
                .iter()
                .enumerate()
                .all(|(i, t)| *t == Term::Var(i))
    }

    /// A tuple of pairwise distinct variables, i.e. the image of an injection.
    pub fn as_injection(&self) -> Option<Injection> {
        let mut map = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match t {
                Term::Var(v) if !map.contains(v) => map.push(*v),
                _ => return None,
            }
        }
        Some(Injection {
            target: self.source,
            map,
        })
    }

    /// `f + k`: acts as `f` on the first variables and shifts `k` extra ones along.
    pub fn extend(&self, k: usize) -> Substitution {
        let mut terms = self.terms.clone();
        terms.extend((0..k).map(|t| Term::Var(self.source + t)));
        Substitution {
            source: self.source + k,
            terms,
        }
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        term.map_vars(&mut |v| self.terms[v].clone())
    }

    /// Renders the full tuple as `{x1->t1, ..., xm->tm}`.
    pub fn render(&self, name: &dyn Fn(usize) -> String, skip_identity: bool) -> String {
        let mut s = String::from("{");
        let mut first = true;
        for (i, t) in self.terms.iter().enumerate() {
            if skip_identity && *t == Term::Var(i) {
                continue;
            }
            if !first {
                s.push_str(", ");
            }
            first = false;
            s.push_str(&name(i));
            s.push_str("->");
            t.write_with(&mut s, name).expect("writing to a String");
        }
        s.push('}');
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&crate::syntax::bound_name, false))
    }
}

pub fn identity_subst(n: usize) -> Substitution {
    Substitution {
        source: n,
        terms: (0..n).map(Term::Var).collect(),
    }
}

/// Simultaneous substitution: variable `i` of `atom` becomes `sub.term(i)`.
pub fn apply(sub: &Substitution, atom: &Atom) -> Result<Atom, ContextMismatch> {
    if atom.context != sub.target() {
        return Err(ContextMismatch {
            expected: sub.target(),
            found: atom.context,
        });
    }
    Ok(apply_unchecked(sub, atom))
}

pub(crate) fn apply_unchecked(sub: &Substitution, atom: &Atom) -> Atom {
    atom.map_vars(sub.source, &mut |v| sub.terms[v].clone())
}

/// `compose(g, f)` for `g: k -> n` and `f: n -> m` is the arrow `k -> m`
/// with `apply(compose(g, f), a) == apply(g, apply(f, a))`.
pub fn compose(g: &Substitution, f: &Substitution) -> Result<Substitution, ContextMismatch> {
    if g.target() != f.source {
        return Err(ContextMismatch {
            expected: f.source,
            found: g.target(),
        });
    }
    Ok(Substitution {
        source: g.source,
        terms: f.terms.iter().map(|t| g.apply_term(t)).collect(),
    })
}

/// An injective map of contexts `source -> target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Injection {
    target: usize,
    map: Vec<usize>,
}

impl Injection {
    pub fn new(target: usize, map: Vec<usize>) -> Option<Injection> {
        let ok = map.iter().all(|&i| i < target)
            && map.iter().enumerate().all(|(k, i)| !map[..k].contains(i));
        ok.then_some(Injection { target, map })
    }

    pub fn identity(n: usize) -> Injection {
        Injection {
            target: n,
            map: (0..n).collect(),
        }
    }

    /// `n -> m` sending `i` to `i`.
    pub fn inclusion(n: usize, m: usize) -> Injection {
        assert!(n <= m, "inclusion {n} -> {m}");
        Injection {
            target: m,
            map: (0..n).collect(),
        }
    }

    pub fn source(&self) -> usize {
        self.map.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Injection) -> Option<Injection> {
        (self.target == next.source()).then(|| Injection {
            target: next.target,
            map: self.map.iter().map(|&i| next.map[i]).collect(),
        })
    }

    /// Every injection `n -> m`, in lexicographic order of the image tuple.
    pub fn all(n: usize, m: usize) -> Vec<Injection> {
        let mut out = Vec::new();
        for_each_tuple(m, n, |idx| {
            if let Some(i) = Injection::new(m, idx.to_vec()) {
                out.push(i);
            }
        });
        out
    }
}

/// The renaming arrow `m -> n` of the Lawvere theory induced by `i: n -> m`.
/// Applying it moves an atom over `n` into context `m`, variable `j` becoming `i(j)`.
pub fn injection_subst(i: &Injection) -> Substitution {
    Substitution {
        source: i.target,
        terms: i.map.iter().map(|&v| Term::Var(v)).collect(),
    }
}

/// All arrows `n -> m` whose terms have depth at most `max_depth`.
pub fn enumerate_substitutions(
    signature: &Signature,
    n: usize,
    m: usize,
    max_depth: usize,
) -> Vec<Substitution> {
    let terms = enumerate_terms(signature, n, max_depth);
    let mut out = Vec::new();
    for_each_tuple(terms.len(), m, |idx| {
        out.push(Substitution {
            source: n,
            terms: idx.iter().map(|&i| terms[i].clone()).collect(),
        });
    });
    out
}

/// One-sided matching of pattern variables against target subterms.
/// Returns one optional binding per pattern variable.
pub(crate) fn match_atom(pattern: &Atom, target: &Atom) -> Option<Vec<Option<Term>>> {
    if pattern.predicate != target.predicate || pattern.args.len() != target.args.len() {
        return None;
    }
    let mut bindings = vec![None; pattern.context];
    for (p, t) in pattern.args.iter().zip(&target.args) {
        if !match_term(p, t, &mut bindings) {
            return None;
        }
    }
    Some(bindings)
}

fn match_term(pattern: &Term, target: &Term, bindings: &mut [Option<Term>]) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) => match &bindings[*v] {
            Some(bound) => bound == target,
            None => {
                bindings[*v] = Some(target.clone());
                true
            }
        },
        (Term::App(f, ps), Term::App(g, ts)) => {
            f == g
                && ps.len() == ts.len()
                && ps.iter().zip(ts).all(|(p, t)| match_term(p, t, bindings))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

/// Most general matcher of `pattern` (over `k`) against `target` (over `n`):
/// the arrow `θ: n -> k` with `apply(θ, pattern) == target`.
///
/// Pattern variables that do not occur in the pattern are unconstrained;
/// variable `i` maps to `x{i+1}` of the target context when `i < n`, and
/// matching is refused otherwise.
pub fn mgm(pattern: &Atom, target: &Atom) -> Option<Substitution> {
    let bindings = match_atom(pattern, target)?;
    let n = target.context;
    let terms = bindings
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.or_else(|| (i < n).then_some(Term::Var(i))))
        .collect::<Option<Vec<_>>>()?;
    Some(Substitution { source: n, terms })
}

/// Most general unifier of two atoms over one context, with occurs check.
/// The result is idempotent; a variable-variable binding always points the
/// larger index at the smaller.
pub fn mgu(a: &Atom, b: &Atom) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    let n = a.context.max(b.context);
    let mut u = Unifier::new(n);
    for (s, t) in a.args.iter().zip(&b.args) {
        if !u.unify(s, t) {
            return None;
        }
    }
    Some(u.into_substitution())
}

/// Triangular bindings over a fixed context.
pub(crate) struct Unifier {
    bindings: Vec<Option<Term>>,
}

impl Unifier {
    pub(crate) fn new(n: usize) -> Self {
        Unifier {
            bindings: vec![None; n],
        }
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match &self.bindings[*v] {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, var: usize, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => *v == var,
            Term::App(_, args) => args.iter().any(|a| self.occurs(var, a)),
        }
    }

    pub(crate) fn unify(&mut self, s: &Term, t: &Term) -> bool {
        let s = self.walk(s).clone();
        let t = self.walk(t).clone();
        match (&s, &t) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), Term::Var(y)) => {
                let (hi, lo) = if x > y { (*x, *y) } else { (*y, *x) };
                self.bindings[hi] = Some(Term::Var(lo));
                true
            }
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if self.occurs(*x, other) {
                    return false;
                }
                self.bindings[*x] = Some(other.clone());
                true
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
        }
    }

    pub(crate) fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Var(v) => Term::Var(*v),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
        }
    }

    pub(crate) fn into_substitution(self) -> Substitution {
        let n = self.bindings.len();
        let terms = (0..n).map(|i| self.resolve(&Term::Var(i))).collect();
        Substitution { source: n, terms }
    }
}
