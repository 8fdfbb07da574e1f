//! First-order syntax: signatures, terms, atoms, Horn clauses and programs.
//!
//! Variables are positions in a context rather than names. A term over
//! context `n` may mention `Var(0)..Var(n - 1)`; those print as `x1..xn`.
//! Source names survive only on [`Clause`] so that programs print back in
//! the form they were written.

pub(crate) mod enumerate;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use enumerate::{enumerate_atoms, enumerate_terms};
pub use parser::{
    parse_atom_indexed, parse_goals, parse_program, parse_query, parse_term_indexed, Query,
};

use crate::error::SyntaxError;

/// Function and predicate symbols with their arities, in first-use order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub functions: IndexMap<String, usize>,
    pub predicates: IndexMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> + '_ {
        self.functions
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(s, _)| s.as_str())
    }

    pub fn has_constants(&self) -> bool {
        self.constants().next().is_some()
    }

    pub fn function_arity(&self, symbol: &str) -> Option<usize> {
        self.functions.get(symbol).copied()
    }

    pub fn predicate_arity(&self, symbol: &str) -> Option<usize> {
        self.predicates.get(symbol).copied()
    }

    /// Registers every symbol of `atom`, failing on an arity conflict.
    pub fn declare_atom(&mut self, atom: &Atom) -> Result<(), SyntaxError> {
        declare(&mut self.predicates, &atom.predicate, atom.args.len())?;
        for t in &atom.args {
            self.declare_term(t)?;
        }
        Ok(())
    }

    fn declare_term(&mut self, term: &Term) -> Result<(), SyntaxError> {
        if let Term::App(f, args) = term {
            declare(&mut self.functions, f, args.len())?;
            for a in args {
                self.declare_term(a)?;
            }
        }
        Ok(())
    }

    /// Checks `atom` against the declared arities. Unknown symbols are allowed.
    pub fn check_atom(&self, atom: &Atom) -> Result<(), SyntaxError> {
        let mut scratch = self.clone();
        scratch.declare_atom(atom)
    }
}

fn declare(
    map: &mut IndexMap<String, usize>,
    symbol: &str,
    arity: usize,
) -> Result<(), SyntaxError> {
    match map.get(symbol) {
        Some(&known) if known != arity => Err(SyntaxError::ArityConflict {
            symbol: symbol.to_string(),
            first: known,
            second: arity,
            at: None,
        }),
        Some(_) => Ok(()),
        None => {
            map.insert(symbol.to_string(), arity);
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App(String, Vec<Term>),
}

impl Term {
    pub fn constant(symbol: &str) -> Term {
        Term::App(symbol.to_string(), Vec::new())
    }

    pub fn app(symbol: &str, args: Vec<Term>) -> Term {
        Term::App(symbol.to_string(), args)
    }

    /// Constants and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Largest variable index plus one, i.e. the smallest context the term fits in.
    pub fn min_context(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(_, args) => args.iter().map(Term::min_context).max().unwrap_or(0),
        }
    }

    pub fn occurs(&self, var: usize) -> bool {
        match self {
            Term::Var(i) => *i == var,
            Term::App(_, args) => args.iter().any(|a| a.occurs(var)),
        }
    }

    /// Variables in left-to-right first-occurrence order.
    pub fn vars_into(&self, out: &mut Vec<usize>) {
        match self {
            Term::Var(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_into(out)),
        }
    }

    /// Deepest position (root = 0) at which `var` occurs.
    pub fn var_depth(&self, var: usize) -> Option<usize> {
        match self {
            Term::Var(i) => (*i == var).then_some(0),
            Term::App(_, args) => args
                .iter()
                .filter_map(|a| a.var_depth(var))
                .map(|d| d + 1)
                .max(),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(usize) -> Term) -> Term {
        match self {
            Term::Var(i) => f(*i),
            Term::App(s, args) => {
                Term::App(s.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    pub(crate) fn write_with(
        &self,
        out: &mut impl fmt::Write,
        name: &dyn Fn(usize) -> String,
    ) -> fmt::Result {
        match self {
            Term::Var(i) => out.write_str(&name(*i)),
            Term::App(s, args) => {
                out.write_str(s)?;
                if !args.is_empty() {
                    out.write_char('(')?;
                    for (k, a) in args.iter().enumerate() {
                        if k > 0 {
                            out.write_char(',')?;
                        }
                        a.write_with(out, name)?;
                    }
                    out.write_char(')')?;
                }
                Ok(())
            }
        }
    }
}

/// `Var(i)` prints as `x{i+1}`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, &bound_name)
    }
}

pub(crate) fn bound_name(i: usize) -> String {
    format!("x{}", i + 1)
}

/// A predicate applied to terms over a context of `context` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
    pub context: usize,
}

impl Atom {
    /// Builds an atom over the smallest context containing its variables.
    pub fn new(predicate: &str, args: Vec<Term>) -> Atom {
        let context = args.iter().map(Term::min_context).max().unwrap_or(0);
        Atom {
            predicate: predicate.to_string(),
            args,
            context,
        }
    }

    pub fn over(predicate: &str, args: Vec<Term>, context: usize) -> Atom {
        let atom = Atom {
            predicate: predicate.to_string(),
            args,
            context,
        };
        debug_assert!(atom.is_well_scoped(), "variable out of context in {atom:?}");
        atom
    }

    pub fn is_well_scoped(&self) -> bool {
        self.args.iter().all(|t| t.min_context() <= self.context)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for t in &self.args {
            t.vars_into(&mut out);
        }
        out
    }

    /// The same atom seen over a larger context.
    pub fn weaken(&self, extra: usize) -> Atom {
        Atom {
            context: self.context + extra,
            ..self.clone()
        }
    }

    pub fn with_context(&self, context: usize) -> Atom {
        debug_assert!(self.args.iter().all(|t| t.min_context() <= context));
        Atom {
            context,
            ..self.clone()
        }
    }

    pub fn map_vars(&self, context: usize, f: &mut impl FnMut(usize) -> Term) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| t.map_vars(f)).collect(),
            context,
        }
    }

    pub(crate) fn write_with(
        &self,
        out: &mut impl fmt::Write,
        name: &dyn Fn(usize) -> String,
    ) -> fmt::Result {
        out.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            out.write_char('(')?;
            for (k, a) in self.args.iter().enumerate() {
                if k > 0 {
                    out.write_char(',')?;
                }
                a.write_with(out, name)?;
            }
            out.write_char(')')?;
        }
        Ok(())
    }

    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut s = String::new();
        self.write_with(&mut s, name).expect("writing to a String");
        s
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, &bound_name)
    }
}

pub fn format_atom(atom: &Atom) -> String {
    atom.to_string()
}

pub fn format_term(term: &Term) -> String {
    term.to_string()
}

/// 1-based clause number, stable for the lifetime of a [`Program`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClauseId(pub usize);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `head :- body`. Variables are numbered by first occurrence, head first,
/// so the head's variables always precede the existential ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub context: usize,
    pub var_names: Vec<String>,
    existential: Vec<usize>,
}

impl Clause {
    /// Renumbers variables by first occurrence and derives the existential set.
    pub fn new(head: Atom, body: Vec<Atom>, var_names: Vec<String>) -> Clause {
        let mut order = head.vars();
        for b in &body {
            for v in b.vars() {
                if !order.contains(&v) {
                    order.push(v);
                }
            }
        }
        let context = order.len();
        let rename = |a: &Atom| {
            a.map_vars(context, &mut |v| {
                Term::Var(order.iter().position(|&o| o == v).expect("collected"))
            })
        };
        let head2 = rename(&head);
        let body2: Vec<Atom> = body.iter().map(rename).collect();
        let names = order
            .iter()
            .map(|&v| {
                var_names
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| format!("X{}", v + 1))
            })
            .collect();
        let head_vars = head2.vars().len();
        Clause {
            head: head2,
            body: body2,
            context,
            var_names: names,
            existential: (head_vars..context).collect(),
        }
    }

    pub fn fact(head: Atom) -> Clause {
        Clause::new(head, Vec::new(), Vec::new())
    }

    /// Variables of the body that do not occur in the head.
    pub fn existential_vars(&self) -> &[usize] {
        &self.existential
    }

    pub fn head_var_count(&self) -> usize {
        self.context - self.existential.len()
    }

    pub fn is_existential(&self) -> bool {
        !self.existential.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.context == 0
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |i: usize| self.var_names[i].clone();
        self.head.write_with(f, &name)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (k, b) in self.body.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                b.write_with(f, &name)?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub signature: Signature,
    pub clauses: Vec<Clause>,
}

impl Program {
    pub fn from_clauses(clauses: Vec<Clause>) -> Result<Program, SyntaxError> {
        let mut signature = Signature::new();
        for c in &clauses {
            signature.declare_atom(&c.head)?;
            for b in &c.body {
                signature.declare_atom(b)?;
            }
        }
        Ok(Program { signature, clauses })
    }

    pub fn clause(&self, id: ClauseId) -> &Clause {
        &self.clauses[id.0 - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClauseId, &Clause)> + '_ {
        self.clauses
            .iter()
            .enumerate()
            .map(|(i, c)| (ClauseId(i + 1), c))
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.clauses.iter().all(Clause::is_ground)
    }

    /// Every atom occurring anywhere in the program.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            out.insert(c.head.clone());
            out.extend(c.body.iter().cloned());
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn format_program(program: &Program) -> String {
    program.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "witnesses")]
pub enum Classification {
    NonExistential,
    Existential(Vec<ClauseId>),
}

pub fn classify(program: &Program) -> Classification {
    let witnesses: Vec<ClauseId> = program
        .iter()
        .filter(|(_, c)| c.is_existential())
        .map(|(id, _)| id)
        .collect();
    if witnesses.is_empty() {
        Classification::NonExistential
    } else {
        Classification::Existential(witnesses)
    }
}
