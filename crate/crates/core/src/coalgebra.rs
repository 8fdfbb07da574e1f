//! One-step semantics of a program and its finite approximants.
//!
//! `step` sends an atom to the set of bodies of the clauses whose head
//! matches it; iterating it `k` times gives the level-`k` approximant,
//! which must agree with the coinductive tree cut at depth `k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::cotree::{build_cotree, subst_tree, tree_leq, AndNode, CoTree, Frontier, TreeOrder};
use crate::error::{ContextMismatch, SemanticsError};
use crate::exec::Exec;
use crate::family::{family_leq, map_family, render_family, Family};
use crate::intfunctor::{dist_law, embed, int_map_unchecked, ExtAtom, IntFamily};
use crate::lawvere::{
    apply, apply_unchecked, enumerate_substitutions, injection_subst, match_atom, mgm, Injection,
    Substitution,
};
use crate::resolution::expansions;
use crate::syntax::{classify, enumerate_atoms, Atom, Classification, Program, Term};

/// The one-step map of a variable-free program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundCoalgebra {
    table: BTreeMap<Atom, Family<Atom>>,
}

impl GroundCoalgebra {
    /// Atoms no clause head mentions map to the empty family.
    pub fn get(&self, atom: &Atom) -> Family<Atom> {
        self.table.get(atom).cloned().unwrap_or_default()
    }

    pub fn table(&self) -> &BTreeMap<Atom, Family<Atom>> {
        &self.table
    }
}

pub fn ground_step(program: &Program) -> Result<GroundCoalgebra, SemanticsError> {
    if let Some((id, _)) = program.iter().find(|(_, c)| !c.is_ground()) {
        return Err(SemanticsError::NotGround(id));
    }
    let mut table: BTreeMap<Atom, Family<Atom>> = program
        .atoms()
        .into_iter()
        .map(|a| (a, Family::new()))
        .collect();
    for c in &program.clauses {
        table
            .get_mut(&c.head)
            .expect("collected")
            .insert(c.body.iter().cloned().collect());
    }
    Ok(GroundCoalgebra { table })
}

/// A level-`k` element of the limit: the label, and for `k > 0` the family
/// of level-`(k-1)` approximants of its children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Approximant<L> {
    pub level: usize,
    pub label: L,
    pub layer: Option<Family<Approximant<L>>>,
}

impl<L: Clone + Ord> Approximant<L> {
    pub fn leaf(label: L) -> Self {
        Approximant {
            level: 0,
            label,
            layer: None,
        }
    }

    /// Drops the innermost layer; `None` at level 0.
    pub fn project(&self) -> Option<Self> {
        let layer = self.layer.as_ref()?;
        Some(if self.level == 1 {
            Approximant::leaf(self.label.clone())
        } else {
            Approximant {
                level: self.level - 1,
                label: self.label.clone(),
                layer: Some(map_family(layer, |a| {
                    a.project().expect("level above zero")
                })),
            }
        })
    }

    pub fn map_labels<M: Clone + Ord>(&self, f: &impl Fn(&L) -> M) -> Approximant<M> {
        Approximant {
            level: self.level,
            label: f(&self.label),
            layer: self
                .layer
                .as_ref()
                .map(|fam| map_family(fam, |a| a.map_labels(f))),
        }
    }
}

impl<L: fmt::Display> fmt::Display for Approximant<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.layer {
            None => write!(f, "{}", self.label),
            Some(fam) => write!(
                f,
                "({}, {})",
                self.label,
                render_family(fam, &|a| a.to_string())
            ),
        }
    }
}

impl<L: fmt::Display> Serialize for Approximant<L> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn ground_approximant(
    program: &Program,
    atom: &Atom,
    k: usize,
) -> Result<Approximant<Atom>, SemanticsError> {
    let p = ground_step(program)?;
    Ok(ground_rec(&p, atom, k))
}

fn ground_rec(p: &GroundCoalgebra, atom: &Atom, k: usize) -> Approximant<Atom> {
    if k == 0 {
        return Approximant::leaf(atom.clone());
    }
    let layer = map_family(&p.get(atom), |b| ground_rec(p, b, k - 1));
    Approximant {
        level: k,
        label: atom.clone(),
        layer: Some(layer),
    }
}

fn require_non_existential(program: &Program) -> Result<(), SemanticsError> {
    match classify(program) {
        Classification::NonExistential => Ok(()),
        Classification::Existential(ids) => Err(SemanticsError::ExistentialEscape(ids[0])),
    }
}

/// Bodies of the clauses whose head matches `atom`, instantiated by the matcher.
pub fn step(program: &Program, atom: &Atom) -> Result<Family<Atom>, SemanticsError> {
    require_non_existential(program)?;
    Ok(step_unchecked(program, atom))
}

fn step_unchecked(program: &Program, atom: &Atom) -> Family<Atom> {
    program
        .clauses
        .iter()
        .filter_map(|c| {
            let theta = mgm(&c.head, atom)?;
            Some(c.body.iter().map(|b| apply_unchecked(&theta, b)).collect())
        })
        .collect()
}

/// Like [`step`], for any program: body variables the matcher leaves
/// unbound become fresh existentials after those already in scope.
pub fn step_ext(program: &Program, atom: &ExtAtom) -> Family<ExtAtom> {
    let scope = atom.atom().context;
    program
        .clauses
        .iter()
        .filter_map(|c| {
            let bindings = match_atom(&c.head, atom.atom())?;
            // Unbound clause variables are exactly the existential ones, in clause order.
            let mut fresh = 0;
            let terms: Vec<Term> = bindings
                .into_iter()
                .map(|b| {
                    b.unwrap_or_else(|| {
                        fresh += 1;
                        Term::Var(scope + fresh - 1)
                    })
                })
                .collect();
            let theta =
                Substitution::new(scope + fresh, terms).expect("terms over the widened scope");
            let exist = atom.exist() + fresh;
            Some(
                c.body
                    .iter()
                    .map(|b| {
                        ExtAtom::scoped_unchecked(atom.bound(), exist, apply_unchecked(&theta, b))
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Clause matching before canonicalization: bodies over `n + k`, where `k`
/// is the largest number of existentials any matching clause opens.
pub fn raw_step(program: &Program, atom: &Atom) -> IntFamily {
    let exps = expansions(program, atom);
    let n = atom.context;
    let k = exps.iter().map(|e| e.fresh).max().unwrap_or(0);
    let family = exps
        .into_iter()
        .map(|e| {
            e.children
                .into_iter()
                .map(|c| c.with_context(n + k))
                .collect()
        })
        .collect();
    IntFamily {
        bound: n,
        exist: k,
        family,
    }
}

/// `step_ext` and raw matching followed by [`dist_law`] agree up to
/// pointwise canonicalization.
pub fn factorization_agrees(program: &Program, atom: &Atom) -> bool {
    let via_law = dist_law(&raw_step(program, atom));
    let direct = map_family(&step_ext(program, &embed(atom)), |e| {
        crate::intfunctor::canonicalize(e.atom(), e.bound())
    });
    via_law == direct
}

/// `step_ext` is raw matching with each clause body canonicalized jointly,
/// in body order.
pub fn joint_factorization_agrees(program: &Program, atom: &Atom) -> bool {
    let joint: Family<ExtAtom> = expansions(program, atom)
        .into_iter()
        .map(|e| {
            crate::intfunctor::canonicalize_joint(&e.children, atom.context)
                .into_iter()
                .collect()
        })
        .collect();
    joint == step_ext(program, &embed(atom))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Plain atoms; existential programs are rejected.
    Plain,
    /// Extended atoms; any program.
    Ext,
}

pub fn approximant_plain(
    program: &Program,
    atom: &Atom,
    k: usize,
) -> Result<Approximant<Atom>, SemanticsError> {
    require_non_existential(program)?;
    Ok(plain_rec(program, atom, k))
}

fn plain_rec(program: &Program, atom: &Atom, k: usize) -> Approximant<Atom> {
    if k == 0 {
        return Approximant::leaf(atom.clone());
    }
    let layer = map_family(&step_unchecked(program, atom), |b| {
        plain_rec(program, b, k - 1)
    });
    Approximant {
        level: k,
        label: atom.clone(),
        layer: Some(layer),
    }
}

pub fn approximant_ext(program: &Program, atom: &ExtAtom, k: usize) -> Approximant<ExtAtom> {
    if k == 0 {
        return Approximant::leaf(atom.clone());
    }
    let layer = map_family(&step_ext(program, atom), |b| {
        approximant_ext(program, b, k - 1)
    });
    Approximant {
        level: k,
        label: atom.clone(),
        layer: Some(layer),
    }
}

/// Either mode, with labels as extended atoms (plain labels are embedded).
pub fn approximant(
    program: &Program,
    atom: &Atom,
    k: usize,
    mode: Mode,
) -> Result<Approximant<ExtAtom>, SemanticsError> {
    match mode {
        Mode::Plain => Ok(approximant_plain(program, atom, k)?.map_labels(&|a: &Atom| embed(a))),
        Mode::Ext => Ok(approximant_ext(program, &embed(atom), k)),
    }
}

/// Reads the approximant off a tree: or-nodes become inner sets.
pub fn approximant_of_tree(tree: &CoTree) -> Approximant<ExtAtom> {
    node_approximant(&tree.root, tree.depth)
}

fn node_approximant(node: &AndNode, remaining: usize) -> Approximant<ExtAtom> {
    if remaining == 0 || node.frontier == Frontier::Truncated {
        return Approximant::leaf(node.atom.clone());
    }
    let layer = node
        .or_children
        .iter()
        .map(|o| {
            o.and_children
                .iter()
                .map(|c| node_approximant(c, remaining - 1))
                .collect::<BTreeSet<_>>()
        })
        .collect();
    Approximant {
        level: remaining,
        label: node.atom.clone(),
        layer: Some(layer),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaxWitness {
    pub substitution: String,
    pub atom: String,
    /// Reindexed one-step value is below the one-step value of the instance.
    pub step_leq: bool,
    pub step_equal: bool,
    pub tree: TreeOrder,
}

impl LaxWitness {
    pub fn holds(&self) -> bool {
        self.step_leq && self.tree.holds()
    }
}

/// Compares reindexing after one step (and after `k` levels of the tree)
/// with stepping the instance, for `sub: m -> n` and `atom` over `n`.
pub fn check_lax(
    program: &Program,
    sub: &Substitution,
    atom: &Atom,
    k: usize,
) -> Result<LaxWitness, SemanticsError> {
    let instance = apply(sub, atom)?;
    let lhs = map_family(&step_ext(program, &embed(atom)), |e| {
        int_map_unchecked(sub, e)
    });
    let rhs = step_ext(program, &embed(&instance));
    let mapped = subst_tree(sub, &build_cotree(program, atom, k))?;
    let tree = tree_leq(&mapped, &build_cotree(program, &instance, k), k)?;
    Ok(LaxWitness {
        substitution: sub.to_string(),
        atom: atom.to_string(),
        step_leq: family_leq(&lhs, &rhs),
        step_equal: lhs == rhs,
        tree,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjWitness {
    pub injection: Vec<usize>,
    pub target: usize,
    pub atom: String,
    pub step_equal: bool,
    pub tree_equal: bool,
}

impl InjWitness {
    pub fn holds(&self) -> bool {
        self.step_equal && self.tree_equal
    }
}

/// Along an injection `n -> m` both comparisons must be equalities.
pub fn check_inj_strict(
    program: &Program,
    inj: &Injection,
    atom: &Atom,
    k: usize,
) -> Result<InjWitness, SemanticsError> {
    if atom.context != inj.source() {
        return Err(ContextMismatch {
            expected: inj.source(),
            found: atom.context,
        }
        .into());
    }
    let sub = injection_subst(inj);
    let instance = apply(&sub, atom)?;
    let lhs = map_family(&step_ext(program, &embed(atom)), |e| {
        int_map_unchecked(&sub, e)
    });
    let rhs = step_ext(program, &embed(&instance));
    let mapped = subst_tree(&sub, &build_cotree(program, atom, k))?;
    Ok(InjWitness {
        injection: inj.map().to_vec(),
        target: inj.target(),
        atom: atom.to_string(),
        step_equal: lhs == rhs,
        tree_equal: mapped == build_cotree(program, &instance, k),
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub checked: usize,
    /// Cases where the comparison was an equality (lax sweeps only).
    pub strict: usize,
    pub violations: Vec<String>,
}

impl SweepReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    fn merge(parts: Vec<SweepReport>) -> SweepReport {
        parts
            .into_iter()
            .fold(SweepReport::default(), |mut acc, p| {
                acc.checked += p.checked;
                acc.strict += p.strict;
                acc.violations.extend(p.violations);
                acc
            })
    }
}

/// Bounds of an exhaustive sweep over atoms and arrows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepBounds {
    pub max_atom_context: usize,
    pub max_atom_depth: usize,
    pub max_sub_context: usize,
    pub max_sub_depth: usize,
    pub tree_depth: usize,
}

fn slice(program: &Program, max_n: usize, max_d: usize) -> Vec<Atom> {
    (0..=max_n)
        .flat_map(|n| enumerate_atoms(&program.signature, n, max_d))
        .collect()
}

/// [`check_lax`] for every atom and every arrow within `bounds`.
pub fn lax_sweep(program: &Program, bounds: SweepBounds, exec: Exec) -> SweepReport {
    let atoms = slice(program, bounds.max_atom_context, bounds.max_atom_depth);
    let parts = exec.map(&atoms, |a| {
        let mut r = SweepReport::default();
        for m in 0..=bounds.max_sub_context {
            for sub in
                enumerate_substitutions(&program.signature, m, a.context, bounds.max_sub_depth)
            {
                let w = check_lax(program, &sub, a, bounds.tree_depth).expect("contexts align");
                r.checked += 1;
                r.strict += usize::from(w.step_equal);
                if !w.holds() {
                    r.violations
                        .push(format!("{} under {}: {}", w.atom, w.substitution, w.tree));
                }
            }
        }
        r
    });
    SweepReport::merge(parts)
}

/// [`check_inj_strict`] for every atom and every injection into contexts up to `max_target`.
pub fn inj_sweep(
    program: &Program,
    max_n: usize,
    max_d: usize,
    max_target: usize,
    k: usize,
    exec: Exec,
) -> SweepReport {
    let atoms = slice(program, max_n, max_d);
    let parts = exec.map(&atoms, |a| {
        let mut r = SweepReport::default();
        for m in a.context..=max_target.max(a.context) {
            for inj in Injection::all(a.context, m) {
                let w = check_inj_strict(program, &inj, a, k).expect("contexts align");
                r.checked += 1;
                r.strict += usize::from(w.holds());
                if !w.holds() {
                    r.violations.push(format!(
                        "{} along {:?} into {}",
                        w.atom, w.injection, w.target
                    ));
                }
            }
        }
        r
    });
    SweepReport::merge(parts)
}

/// Compares the approximant computed by iterating the one-step map with the
/// one read off the tree, for every atom of the slice and every `k <= max_k`;
/// also checks that projecting level `k + 1` gives level `k`. Ground
/// programs are additionally compared against the ground table.
pub fn oracle_sweep(
    program: &Program,
    max_n: usize,
    max_d: usize,
    max_k: usize,
    exec: Exec,
) -> SweepReport {
    let atoms = slice(program, max_n, max_d);
    let plain = classify(program) == Classification::NonExistential;
    let ground = program.is_ground();
    let parts = exec.map(&atoms, |a| {
        let mut r = SweepReport::default();
        let mut previous: Option<Approximant<ExtAtom>> = None;
        for k in 0..=max_k {
            r.checked += 1;
            let from_tree = approximant_of_tree(&build_cotree(program, a, k));
            let ext = approximant_ext(program, &embed(a), k);
            if ext != from_tree {
                r.violations.push(format!(
                    "{a} at level {k}: step iteration differs from the tree"
                ));
            }
            if plain {
                let p = approximant_plain(program, a, k).expect("non-existential");
                if p.map_labels(&|x: &Atom| embed(x)) != from_tree {
                    r.violations.push(format!(
                        "{a} at level {k}: plain iteration differs from the tree"
                    ));
                }
            }
            if ground && a.context == 0 {
                let g = ground_approximant(program, a, k).expect("ground");
                if g.map_labels(&|x: &Atom| embed(x)) != from_tree {
                    r.violations.push(format!(
                        "{a} at level {k}: ground table differs from the tree"
                    ));
                }
            }
            if let Some(prev) = &previous {
                if ext.project().as_ref() != Some(prev) {
                    r.violations.push(format!(
                        "{a} at level {k}: projection is not the previous level"
                    ));
                }
            }
            previous = Some(ext);
        }
        r
    });
    SweepReport::merge(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom_indexed, parse_program};

    fn atom(text: &str, n: usize) -> Atom {
        parse_atom_indexed(text, n, 0).unwrap()
    }

    fn show<T: fmt::Display>(fam: &Family<T>) -> String {
        render_family(fam, &|x| x.to_string())
    }

    #[test]
    fn ground_table() {
        let p = parse_program(crate::fixtures::GROUND_ABCD).unwrap();
        let g = ground_step(&p).unwrap();
        assert_eq!(show(&g.get(&atom("a", 0))), "{{b, c}, {b, d}}");
        assert_eq!(show(&g.get(&atom("b", 0))), "∅");
        assert_eq!(show(&g.get(&atom("d", 0))), "{{a, c}}");
        let fact = parse_program("a.").unwrap();
        assert_eq!(show(&ground_step(&fact).unwrap().get(&atom("a", 0))), "{∅}");
        let gc = parse_program(crate::fixtures::GC).unwrap();
        assert!(matches!(
            ground_step(&gc),
            Err(SemanticsError::NotGround(_))
        ));
    }

    #[test]
    fn ground_levels() {
        let p = parse_program(crate::fixtures::GROUND_ABCD).unwrap();
        let a = atom("a", 0);
        assert_eq!(ground_approximant(&p, &a, 0).unwrap().to_string(), "a");
        assert_eq!(
            ground_approximant(&p, &a, 1).unwrap().to_string(),
            "(a, {{b, c}, {b, d}})"
        );
        let two = ground_approximant(&p, &a, 2).unwrap();
        assert_eq!(
            two.to_string(),
            "(a, {{(b, ∅), (c, ∅)}, {(b, ∅), (d, {{a, c}})}})"
        );
        assert_eq!(
            two.project().unwrap(),
            ground_approximant(&p, &a, 1).unwrap()
        );
    }

    #[test]
    fn plain_step_values() {
        let p = parse_program(crate::fixtures::LISTNAT).unwrap();
        assert_eq!(show(&step(&p, &atom("nat(0)", 0)).unwrap()), "{∅}");
        assert_eq!(
            show(&step(&p, &atom("list(cons(x1,0))", 1)).unwrap()),
            "{{list(0), nat(x1)}}"
        );
        assert_eq!(show(&step(&p, &atom("nat(x1)", 1)).unwrap()), "∅");
        let gc = parse_program(crate::fixtures::GC).unwrap();
        assert!(matches!(
            step(&gc, &atom("connected(x1,x2)", 2)),
            Err(SemanticsError::ExistentialEscape(_))
        ));
    }

    #[test]
    fn extended_step_values() {
        let gc = parse_program(crate::fixtures::GC).unwrap();
        let v = step_ext(&gc, &embed(&atom("connected(x1,x2)", 2)));
        assert_eq!(show(&v), "{{connected(z1,x2), edge(x1,z1)}}");
        let v = step_ext(&gc, &embed(&atom("connected(x1,x1)", 1)));
        assert_eq!(v.len(), 2);
        assert!(v.contains(&BTreeSet::new()));
        assert!(factorization_agrees(&gc, &atom("connected(x1,x2)", 2)));
        assert!(joint_factorization_agrees(
            &gc,
            &atom("connected(x1,x2)", 2)
        ));
    }

    #[test]
    fn lax_witness_for_nat() {
        let p = parse_program(crate::fixtures::LISTNAT).unwrap();
        let zero = Substitution::new(0, vec![crate::syntax::Term::constant("0")]).unwrap();
        let w = check_lax(&p, &zero, &atom("nat(x1)", 1), 3).unwrap();
        assert!(w.holds());
        assert!(!w.step_equal);
    }

    #[test]
    fn gc_inclusion_is_strict() {
        let gc = parse_program(crate::fixtures::GC).unwrap();
        let w = check_inj_strict(
            &gc,
            &Injection::inclusion(2, 3),
            &atom("connected(x1,x2)", 2),
            3,
        )
        .unwrap();
        assert!(w.holds());
    }

    #[test]
    fn oracle_on_small_slices() {
        for (name, p) in crate::fixtures::corpus() {
            let r = oracle_sweep(&p, 1, 1, 3, Exec::Sequential);
            assert!(r.holds(), "{name}: {:?}", r.violations);
        }
    }
}
