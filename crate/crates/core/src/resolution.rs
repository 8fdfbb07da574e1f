//! Term-matching proof search and SLD resolution.
//!
//! Term matching only instantiates clause variables: a goal is reduced by a
//! clause whose head matches it, and existential clause variables become
//! fresh variables appended to the goal's context. SLD resolution unifies
//! and so may instantiate the goal itself.

use std::collections::VecDeque;

use serde::Serialize;

use crate::exec::Exec;
use crate::lawvere::{apply_unchecked, match_atom, Substitution, Unifier};
use crate::syntax::{Atom, ClauseId, Program, Term};

/// One way a clause reduces an atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub clause: ClauseId,
    /// Arrow from `atom.context + fresh` to the clause context.
    pub matcher: Substitution,
    /// Instantiated body, duplicates removed, first occurrence kept.
    pub children: Vec<Atom>,
    pub fresh: usize,
}

/// All clauses whose head matches `atom`, in program order.
pub fn expansions(program: &Program, atom: &Atom) -> Vec<Expansion> {
    let c = atom.context;
    program
        .iter()
        .filter_map(|(id, clause)| {
            let bindings = match_atom(&clause.head, atom)?;
            let head_vars = clause.head_var_count();
            let fresh = clause.context - head_vars;
            let terms = bindings
                .into_iter()
                .enumerate()
                .map(|(v, b)| b.unwrap_or_else(|| Term::Var(c + v - head_vars)))
                .collect();
            let matcher = Substitution::new_unchecked(c + fresh, terms);
            let mut children: Vec<Atom> = Vec::new();
            for b in &clause.body {
                let child = apply_unchecked(&matcher, b);
                if !children.contains(&child) {
                    children.push(child);
                }
            }
            Some(Expansion {
                clause: id,
                matcher,
                children,
                fresh,
            })
        })
        .collect()
}

/// A term-matching derivation: every node is a goal reduced by one clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub goal: Atom,
    pub clause: ClauseId,
    pub matcher: Substitution,
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(ProofTree::depth)
            .max()
            .unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }

    /// Re-checks every step against the program.
    pub fn replay(&self, program: &Program) -> Result<(), String> {
        let Some(clause) = program.clauses.get(self.clause.0.wrapping_sub(1)) else {
            return Err(format!("no clause {}", self.clause));
        };
        let extended = self.goal.with_context(self.matcher.source());
        if self.matcher.target() != clause.context
            || apply_unchecked(&self.matcher, &clause.head) != extended
        {
            return Err(format!(
                "clause {} does not match {}",
                self.clause, self.goal
            ));
        }
        let mut expected: Vec<Atom> = Vec::new();
        for b in &clause.body {
            let child = apply_unchecked(&self.matcher, b);
            if !expected.contains(&child) {
                expected.push(child);
            }
        }
        let got: Vec<&Atom> = self.children.iter().map(|c| &c.goal).collect();
        if got != expected.iter().collect::<Vec<_>>() {
            return Err(format!(
                "children of {} differ from the clause body",
                self.goal
            ));
        }
        self.children.iter().try_for_each(|c| c.replay(program))
    }

    fn write(&self, out: &mut String, indent: usize) {
        out.push_str(&"  ".repeat(indent));
        out.push_str(&format!("{} by clause {}\n", self.goal, self.clause));
        for c in &self.children {
            c.write(out, indent + 1);
        }
    }
}

impl std::fmt::Display for ProofTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0);
        f.write_str(s.trim_end())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TmOutcome {
    Proved(ProofTree),
    /// Every branch ends at a goal no clause head matches, within the bound.
    FailedFinite,
    /// No proof within the bound, and the search was cut off somewhere.
    FuelExhausted,
}

impl TmOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            TmOutcome::Proved(_) => "proved",
            TmOutcome::FailedFinite => "failed",
            TmOutcome::FuelExhausted => "fuel exhausted",
        }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, TmOutcome::Proved(_))
    }
}

/// Depth-first term-matching search for a proof of depth at most `fuel`.
///
/// Clauses are tried in program order and body atoms left to right, so
/// the result is deterministic.
pub fn tm_prove(program: &Program, goal: &Atom, fuel: usize) -> TmOutcome {
    if let Some(proof) = prove(program, goal, fuel) {
        TmOutcome::Proved(proof)
    } else if truncated(program, goal, fuel) {
        TmOutcome::FuelExhausted
    } else {
        TmOutcome::FailedFinite
    }
}

fn prove(program: &Program, goal: &Atom, fuel: usize) -> Option<ProofTree> {
    if fuel == 0 {
        return None;
    }
    'clauses: for exp in expansions(program, goal) {
        let mut children = Vec::with_capacity(exp.children.len());
        for child in &exp.children {
            match prove(program, child, fuel - 1) {
                Some(p) => children.push(p),
                None => continue 'clauses,
            }
        }
        return Some(ProofTree {
            goal: goal.clone(),
            clause: exp.clause,
            matcher: exp.matcher,
            children,
        });
    }
    None
}

/// Whether the tree of all reductions is cut off by the bound.
fn truncated(program: &Program, goal: &Atom, fuel: usize) -> bool {
    if fuel == 0 {
        return true;
    }
    expansions(program, goal)
        .iter()
        .any(|exp| exp.children.iter().any(|c| truncated(program, c, fuel - 1)))
}

/// A computed answer restricted to the query variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SldAnswer {
    /// Arrow from the answer context to the query context.
    pub substitution: Substitution,
    /// Number of resolution steps in the refutation.
    pub steps: usize,
}

impl SldAnswer {
    /// `{X->t, ...}` with the query's variable names; identity bindings are omitted.
    pub fn render(&self, names: &dyn Fn(usize) -> String) -> String {
        self.substitution.render(names, true)
    }
}

/// Lazily enumerates SLD refutations by iterative deepening: all answers
/// with one step, then two steps, up to `fuel`. Leftmost selection,
/// clauses in program order.
pub struct SldSolver<'p> {
    program: &'p Program,
    goals: Vec<Atom>,
    query_context: usize,
    fuel: usize,
    next_length: usize,
    pending: VecDeque<SldAnswer>,
}

pub fn sld_solve<'p>(program: &'p Program, goals: &[Atom], fuel: usize) -> SldSolver<'p> {
    let query_context = goals.iter().map(|g| g.context).max().unwrap_or(0);
    SldSolver {
        program,
        goals: goals
            .iter()
            .map(|g| g.with_context(query_context))
            .collect(),
        query_context,
        fuel,
        next_length: 0,
        pending: VecDeque::new(),
    }
}

impl Iterator for SldSolver<'_> {
    type Item = SldAnswer;

    fn next(&mut self) -> Option<SldAnswer> {
        loop {
            if let Some(a) = self.pending.pop_front() {
                return Some(a);
            }
            if self.next_length > self.fuel {
                return None;
            }
            let length = self.next_length;
            self.next_length += 1;
            let n = self.query_context;
            let state = State {
                context: n,
                goals: self.goals.clone(),
                answer: (0..n).map(Term::Var).collect(),
            };
            let mut found = Vec::new();
            sld_dfs(self.program, n, state, 0, length, &mut found);
            self.pending.extend(found);
        }
    }
}

struct State {
    context: usize,
    goals: Vec<Atom>,
    answer: Vec<Term>,
}

fn sld_dfs(
    program: &Program,
    n: usize,
    state: State,
    steps: usize,
    length: usize,
    out: &mut Vec<SldAnswer>,
) {
    if state.goals.is_empty() {
        if steps == length {
            out.push(SldAnswer {
                substitution: Substitution::new_unchecked(state.context, state.answer),
                steps,
            });
        }
        return;
    }
    if steps == length {
        return;
    }
    let c = state.context;
    let selected = &state.goals[0];
    for clause in &program.clauses {
        let wide = c + clause.context;
        let shift = |a: &Atom| a.map_vars(wide, &mut |v| Term::Var(c + v));
        if selected.predicate != clause.head.predicate
            || selected.args.len() != clause.head.args.len()
        {
            continue;
        }
        let mut u = Unifier::new(wide);
        let head = shift(&clause.head);
        if !selected
            .args
            .iter()
            .zip(&head.args)
            .all(|(s, t)| u.unify(s, t))
        {
            continue;
        }
        let resolve = |a: &Atom| Atom {
            args: a.args.iter().map(|t| u.resolve(t)).collect(),
            ..a.clone()
        };
        let mut goals: Vec<Atom> = clause.body.iter().map(|b| resolve(&shift(b))).collect();
        goals.extend(
            state.goals[1..]
                .iter()
                .map(|g| resolve(&g.with_context(wide))),
        );
        let answer: Vec<Term> = state.answer.iter().map(|t| u.resolve(t)).collect();
        let next = compact(
            n,
            State {
                context: wide,
                goals,
                answer,
            },
        );
        sld_dfs(program, n, next, steps + 1, length, out);
    }
}

/// Renumbers the variables beyond the query context by first occurrence.
fn compact(n: usize, state: State) -> State {
    let mut order: Vec<usize> = Vec::new();
    let mut note = |t: &Term| {
        let mut vs = Vec::new();
        t.vars_into(&mut vs);
        for v in vs {
            if v >= n && !order.contains(&v) {
                order.push(v);
            }
        }
    };
    state.answer.iter().for_each(&mut note);
    state
        .goals
        .iter()
        .flat_map(|g| g.args.iter())
        .for_each(&mut note);
    let context = n + order.len();
    let mut rename = |v: usize| {
        Term::Var(if v < n {
            v
        } else {
            n + order.iter().position(|&o| o == v).expect("noted")
        })
    };
    State {
        context,
        goals: state
            .goals
            .iter()
            .map(|g| g.map_vars(context, &mut rename))
            .collect(),
        answer: state
            .answer
            .iter()
            .map(|t| t.map_vars(&mut rename))
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BridgeCase {
    pub goal: String,
    pub instance: String,
    pub answer: String,
    pub sld_steps: usize,
    pub tm_proved: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BridgeReport {
    pub cases: Vec<BridgeCase>,
}

impl BridgeReport {
    pub fn violations(&self) -> impl Iterator<Item = &BridgeCase> {
        self.cases.iter().filter(|c| !c.tm_proved)
    }

    pub fn holds(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Most answers examined per goal.
pub const BRIDGE_ANSWER_CAP: usize = 64;

/// For every SLD answer `θ` to `goal` within `fuel` steps, checks that
/// term matching proves `θ(goal)` within as many steps.
pub fn verify_bridge(program: &Program, goal: &Atom, fuel: usize) -> BridgeReport {
    let cases = sld_solve(program, std::slice::from_ref(goal), fuel)
        .take(BRIDGE_ANSWER_CAP)
        .map(|ans| {
            let instance = apply_unchecked(&ans.substitution, goal);
            BridgeCase {
                goal: goal.to_string(),
                instance: instance.to_string(),
                answer: ans.substitution.to_string(),
                sld_steps: ans.steps,
                tm_proved: tm_prove(program, &instance, ans.steps).is_proved(),
            }
        })
        .collect();
    BridgeReport { cases }
}

/// [`verify_bridge`] over many goals.
pub fn verify_bridge_all(
    program: &Program,
    goals: &[Atom],
    fuel: usize,
    exec: Exec,
) -> BridgeReport {
    let parts = exec.map(goals, |g| verify_bridge(program, g, fuel));
    BridgeReport {
        cases: parts.into_iter().flat_map(|r| r.cases).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom_indexed, parse_goals, parse_program};

    fn program(src: &str) -> Program {
        parse_program(src).unwrap()
    }

    #[test]
    fn listnat_list_proof() {
        let p = program(crate::fixtures::LISTNAT);
        let goal = parse_atom_indexed("list(cons(0,cons(s(0),nil)))", 0, 0).unwrap();
        let TmOutcome::Proved(proof) = tm_prove(&p, &goal, 10) else {
            panic!()
        };
        assert_eq!(proof.clause, ClauseId(4));
        proof.replay(&p).unwrap();
        assert!(proof.depth() <= 10);
        assert_eq!(
            tm_prove(&p, &goal, proof.depth()),
            TmOutcome::Proved(proof.clone())
        );
        assert!(!tm_prove(&p, &goal, proof.depth() - 1).is_proved());
    }

    #[test]
    fn term_matching_does_not_instantiate_goals() {
        let p = program(crate::fixtures::LISTNAT);
        let goal = parse_atom_indexed("list(x1)", 1, 0).unwrap();
        assert_eq!(tm_prove(&p, &goal, 10), TmOutcome::FailedFinite);
        let goal = parse_atom_indexed("nat(s(x1))", 1, 0).unwrap();
        assert_eq!(tm_prove(&p, &goal, 10), TmOutcome::FailedFinite);
    }

    #[test]
    fn loops_exhaust_fuel() {
        let p = program(crate::fixtures::BAD);
        let goal = parse_atom_indexed("bad(x1)", 1, 0).unwrap();
        for fuel in [0, 1, 5] {
            assert_eq!(tm_prove(&p, &goal, fuel), TmOutcome::FuelExhausted);
        }
        let gc = program(crate::fixtures::GC);
        let goal = parse_atom_indexed("connected(x1,x2)", 2, 0).unwrap();
        assert_eq!(tm_prove(&gc, &goal, 6), TmOutcome::FuelExhausted);
        let goal = parse_atom_indexed("connected(x1,x1)", 1, 0).unwrap();
        assert!(tm_prove(&gc, &goal, 1).is_proved());
    }

    #[test]
    fn gc_sld_answer() {
        let p = program(crate::fixtures::GC);
        let q = parse_goals("connected(X, Y)", &p.signature).unwrap();
        let answers: Vec<_> = sld_solve(&p, &q.goals, 6).collect();
        assert_eq!(answers.len(), 1);
        assert_eq!(answers[0].steps, 1);
        assert_eq!(answers[0].render(&|i| q.name(i)), "{Y->X}");
    }

    #[test]
    fn sld_enumerates_by_length() {
        let p = program(crate::fixtures::LISTNAT);
        let q = parse_goals("nat(X)", &p.signature).unwrap();
        let got: Vec<String> = sld_solve(&p, &q.goals, 3)
            .map(|a| a.render(&|i| q.name(i)))
            .collect();
        assert_eq!(got, vec!["{X->0}", "{X->s(0)}", "{X->s(s(0))}"]);
        let lens: Vec<usize> = sld_solve(&p, &q.goals, 3).map(|a| a.steps).collect();
        assert_eq!(lens, vec![1, 2, 3]);
    }

    #[test]
    fn bridge_on_listnat() {
        let p = program(crate::fixtures::LISTNAT_PLUS);
        let goal = parse_atom_indexed("list(x1)", 1, 0).unwrap();
        let r = verify_bridge(&p, &goal, 6);
        assert!(!r.cases.is_empty());
        assert!(r.holds());
    }
}
