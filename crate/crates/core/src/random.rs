//! Seeded generators for terms, atoms and small programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Atom, Clause, Program, Signature, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A term over `context` variables of depth at most `max_depth`.
pub fn random_term<R: Rng>(
    rng: &mut R,
    signature: &Signature,
    context: usize,
    max_depth: usize,
) -> Term {
    let constants: Vec<&str> = signature.constants().collect();
    let compound: Vec<(&String, usize)> = signature
        .functions
        .iter()
        .filter(|(_, &a)| a > 0)
        .map(|(s, &a)| (s, a))
        .collect();
    let leaves = context + constants.len();
    if max_depth > 0 && !compound.is_empty() && (leaves == 0 || rng.gen_bool(0.4)) {
        let (symbol, arity) = compound[rng.gen_range(0..compound.len())];
        let args = (0..arity)
            .map(|_| random_term(rng, signature, context, max_depth - 1))
            .collect();
        return Term::App(symbol.clone(), args);
    }
    if leaves == 0 {
        // No variables and no constants: only reachable when no ground term exists at all.
        return Term::constant("c");
    }
    let pick = rng.gen_range(0..leaves);
    if pick < context {
        Term::Var(pick)
    } else {
        Term::constant(constants[pick - context])
    }
}

/// An atom over `context` with a predicate of `signature`.
pub fn random_atom<R: Rng>(
    rng: &mut R,
    signature: &Signature,
    context: usize,
    max_depth: usize,
) -> Atom {
    let preds: Vec<(&String, usize)> = signature.predicates.iter().map(|(s, &a)| (s, a)).collect();
    let (pred, arity) = preds[rng.gen_range(0..preds.len())];
    let args = (0..arity)
        .map(|_| random_term(rng, signature, context, max_depth))
        .collect();
    Atom::over(pred, args, context)
}

fn small_signature() -> Signature {
    let mut sig = Signature::new();
    for (f, a) in [("a", 0), ("b", 0), ("f", 1), ("g", 2)] {
        sig.functions.insert(f.into(), a);
    }
    for (p, a) in [("p", 1), ("q", 2), ("r", 1)] {
        sig.predicates.insert(p.into(), a);
    }
    sig
}

/// A program of two to five clauses whose bodies only use head variables.
pub fn random_nonexistential_program<R: Rng>(rng: &mut R) -> Program {
    let sig = small_signature();
    let clauses = (0..rng.gen_range(2..=5))
        .map(|_| {
            let context = rng.gen_range(0..=2);
            let head = random_atom(rng, &sig, context, 1);
            let used = {
                let mut v = head.vars();
                v.sort_unstable();
                v.dedup();
                v
            };
            let body = (0..rng.gen_range(0..=2))
                .map(|_| {
                    let pattern = random_atom(rng, &sig, context.max(1), 1);
                    pattern.map_vars(context, &mut |_| match used.choose(rng) {
                        Some(&v) => Term::Var(v),
                        None => Term::constant("a"),
                    })
                })
                .collect();
            let names = (0..context).map(|i| format!("V{}", i + 1)).collect();
            Clause::new(head, body, names)
        })
        .collect();
    Program::from_clauses(clauses).expect("fixed arities")
}
