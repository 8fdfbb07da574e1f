//! Depth-bounded coinductive trees.
//!
//! And-nodes carry atoms, or-nodes carry the clause used and its matcher.
//! Every clause whose head matches an and-node's atom contributes exactly
//! one or-node, whose children are the instantiated body. Existential
//! clause variables are never instantiated: each and-node remembers how
//! many existentials are in scope, and a clause with `l` existential
//! variables opens `l` new ones for its children.

mod export;

use std::fmt;

use serde::Serialize;

pub use export::{export, from_json, to_json, ExportFormat, JsonAnd, JsonOr, JsonTree};

use crate::error::{ContextMismatch, SemanticsError};
use crate::intfunctor::{embed, int_map_unchecked, ExtAtom};
use crate::lawvere::{apply_unchecked, compose, Substitution};
use crate::resolution::expansions;
use crate::syntax::{Atom, ClauseId, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Frontier {
    Expanded,
    /// At the depth bound; children were not computed.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AndNode {
    pub atom: ExtAtom,
    pub frontier: Frontier,
    pub or_children: Vec<OrNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrNode {
    pub clause: ClauseId,
    /// Arrow from the children's context to the clause context.
    pub matcher: Substitution,
    pub and_children: Vec<AndNode>,
}

/// A coinductive tree cut at `depth`: and-nodes at that depth are truncated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoTree {
    pub root: AndNode,
    pub depth: usize,
}

pub fn build_cotree(program: &Program, root: &Atom, depth: usize) -> CoTree {
    build_cotree_ext(program, &embed(root), depth)
}

/// Tree for an atom that already has existentials in scope.
pub fn build_cotree_ext(program: &Program, root: &ExtAtom, depth: usize) -> CoTree {
    CoTree {
        root: build_node(program, root.clone(), depth),
        depth,
    }
}

fn build_node(program: &Program, atom: ExtAtom, remaining: usize) -> AndNode {
    if remaining == 0 {
        return AndNode {
            atom,
            frontier: Frontier::Truncated,
            or_children: Vec::new(),
        };
    }
    let or_children = expansions(program, atom.atom())
        .into_iter()
        .map(|exp| OrNode {
            clause: exp.clause,
            and_children: exp
                .children
                .into_iter()
                .map(|child| {
                    let scoped =
                        ExtAtom::scoped_unchecked(atom.bound(), atom.exist() + exp.fresh, child);
                    build_node(program, scoped, remaining - 1)
                })
                .collect(),
            matcher: exp.matcher,
        })
        .collect();
    AndNode {
        atom,
        frontier: Frontier::Expanded,
        or_children,
    }
}

impl AndNode {
    fn cut(&self, remaining: usize) -> AndNode {
        if remaining == 0 {
            return AndNode {
                atom: self.atom.clone(),
                frontier: Frontier::Truncated,
                or_children: Vec::new(),
            };
        }
        AndNode {
            atom: self.atom.clone(),
            frontier: self.frontier,
            or_children: self
                .or_children
                .iter()
                .map(|o| OrNode {
                    clause: o.clause,
                    matcher: o.matcher.clone(),
                    and_children: o
                        .and_children
                        .iter()
                        .map(|c| c.cut(remaining - 1))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Number of and-nodes.
    pub fn size(&self) -> usize {
        1 + self
            .or_children
            .iter()
            .flat_map(|o| &o.and_children)
            .map(AndNode::size)
            .sum::<usize>()
    }

    /// Whether some or-node has all of its children, recursively, closed by facts.
    pub fn has_success_subtree(&self) -> bool {
        self.or_children
            .iter()
            .any(|o| o.and_children.iter().all(AndNode::has_success_subtree))
    }
}

impl CoTree {
    /// The same tree cut at a smaller depth.
    pub fn truncate(&self, depth: usize) -> CoTree {
        let depth = depth.min(self.depth);
        CoTree {
            root: self.root.cut(depth),
            depth,
        }
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Checks every expanded node against the program: one or-node per
    /// matching clause in program order, with the expected matcher and
    /// body, and truncation exactly at the depth bound.
    pub fn validate(&self, program: &Program) -> Result<(), TreePath> {
        validate_node(program, &self.root, self.depth, &mut Vec::new())
    }
}

fn validate_node(
    program: &Program,
    node: &AndNode,
    remaining: usize,
    path: &mut Vec<(usize, usize)>,
) -> Result<(), TreePath> {
    match (node.frontier, remaining) {
        (Frontier::Truncated, 0) => {
            return if node.or_children.is_empty() {
                Ok(())
            } else {
                Err(TreePath(path.clone()))
            }
        }
        (Frontier::Truncated, _) | (Frontier::Expanded, 0) => return Err(TreePath(path.clone())),
        _ => {}
    }
    let expected = expansions(program, node.atom.atom());
    if expected.len() != node.or_children.len() {
        return Err(TreePath(path.clone()));
    }
    for (i, (exp, or)) in expected.iter().zip(&node.or_children).enumerate() {
        let atoms: Vec<&Atom> = or.and_children.iter().map(|c| c.atom.atom()).collect();
        let scopes_ok = or.and_children.iter().all(|c| {
            c.atom.bound() == node.atom.bound() && c.atom.exist() == node.atom.exist() + exp.fresh
        });
        if exp.clause != or.clause
            || exp.matcher != or.matcher
            || atoms != exp.children.iter().collect::<Vec<_>>()
            || !scopes_ok
        {
            return Err(TreePath(path.clone()));
        }
        for (j, c) in or.and_children.iter().enumerate() {
            path.push((i, j));
            validate_node(program, c, remaining - 1, path)?;
            path.pop();
        }
    }
    Ok(())
}

/// A node position: `(or-node index, child index)` per level below the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TreePath(pub Vec<(usize, usize)>);

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let steps: Vec<String> = self
            .0
            .iter()
            .map(|(o, c)| format!("or{}.child{}", o + 1, c + 1))
            .collect();
        f.write_str(&steps.join("/"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum TreeOrder {
    Holds,
    /// Or-node `or_node` (0-based) of the left-tree and-node at `at` has no counterpart.
    FailsAt {
        at: TreePath,
        or_node: usize,
    },
}

impl TreeOrder {
    pub fn holds(&self) -> bool {
        matches!(self, TreeOrder::Holds)
    }
}

impl fmt::Display for TreeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeOrder::Holds => f.write_str("holds"),
            TreeOrder::FailsAt { at, or_node } => {
                write!(f, "fails at {at}, or-node {}", or_node + 1)
            }
        }
    }
}

/// The order on trees with equal roots, up to `depth`: every or-node of
/// the left tree is matched by an or-node of the right tree whose children
/// include, atom for atom, the left children, recursively.
pub fn tree_leq(left: &CoTree, right: &CoTree, depth: usize) -> Result<TreeOrder, SemanticsError> {
    if left.root.atom != right.root.atom {
        return Err(SemanticsError::RootMismatch {
            left: left.root.atom.to_string(),
            right: right.root.atom.to_string(),
        });
    }
    let depth = depth.min(left.depth).min(right.depth);
    Ok(match node_leq(&left.root, &right.root, depth) {
        Ok(()) => TreeOrder::Holds,
        Err((mut path, or_node)) => {
            path.reverse();
            TreeOrder::FailsAt {
                at: TreePath(path),
                or_node,
            }
        }
    })
}

/// The failure path is built leaf first.
fn node_leq(
    a: &AndNode,
    b: &AndNode,
    remaining: usize,
) -> Result<(), (Vec<(usize, usize)>, usize)> {
    if remaining == 0 || a.frontier == Frontier::Truncated || b.frontier == Frontier::Truncated {
        return Ok(());
    }
    'left: for (i, oa) in a.or_children.iter().enumerate() {
        let mut deeper = None;
        for ob in &b.or_children {
            let mut ok = true;
            for (j, ca) in oa.and_children.iter().enumerate() {
                let mut found = false;
                let mut first_err = None;
                for cb in ob.and_children.iter().filter(|cb| cb.atom == ca.atom) {
                    match node_leq(ca, cb, remaining - 1) {
                        Ok(()) => {
                            found = true;
                            break;
                        }
                        Err(e) => first_err = first_err.or(Some(e)),
                    }
                }
                if !found {
                    ok = false;
                    if let (None, Some((mut path, o))) = (&deeper, first_err) {
                        path.push((i, j));
                        deeper = Some((path, o));
                    }
                    break;
                }
            }
            if ok {
                continue 'left;
            }
        }
        return Err(deeper.unwrap_or((Vec::new(), i)));
    }
    Ok(())
}

/// Applies `sub: m -> n` to a tree whose root lives over `n`.
///
/// Atoms are reindexed with existentials carried along and matchers become
/// `(sub + k) ∘ θ`. Children that become equal are merged, keeping the
/// first. See [`subst_tree_pruned`] for the variant that also drops
/// or-nodes.
pub fn subst_tree(sub: &Substitution, tree: &CoTree) -> Result<CoTree, ContextMismatch> {
    if sub.target() != tree.root.atom.bound() {
        return Err(ContextMismatch {
            expected: tree.root.atom.bound(),
            found: sub.target(),
        });
    }
    Ok(CoTree {
        root: subst_node(sub, &tree.root),
        depth: tree.depth,
    })
}

fn subst_node(sub: &Substitution, node: &AndNode) -> AndNode {
    let atom = int_map_unchecked(sub, &node.atom);
    let mut or_children = Vec::new();
    for o in &node.or_children {
        let scope = o.matcher.source() - node.atom.bound();
        let matcher =
            compose(&sub.extend(scope), &o.matcher).expect("matcher source is the child scope");
        let mut and_children: Vec<AndNode> = Vec::new();
        for c in &o.and_children {
            let mapped = subst_node(sub, c);
            if !and_children.iter().any(|k| k.atom == mapped.atom) {
                and_children.push(mapped);
            }
        }
        or_children.push((o.clause, matcher, and_children));
    }
    AndNode {
        frontier: node.frontier,
        or_children: or_children
            .into_iter()
            .map(|(clause, matcher, and_children)| OrNode {
                clause,
                matcher,
                and_children,
            })
            .collect(),
        atom,
    }
}

/// [`subst_tree`] followed by pruning of or-nodes whose clause head no
/// longer matches the reindexed atom under the composed matcher.
pub fn subst_tree_pruned(
    program: &Program,
    sub: &Substitution,
    tree: &CoTree,
) -> Result<CoTree, ContextMismatch> {
    let mut t = subst_tree(sub, tree)?;
    prune(program, &mut t.root);
    Ok(t)
}

fn prune(program: &Program, node: &mut AndNode) {
    let atom = node.atom.atom().clone();
    node.or_children.retain(|o| {
        let head = &program.clause(o.clause).head;
        apply_unchecked(&o.matcher, head) == atom.with_context(o.matcher.source())
    });
    for o in &mut node.or_children {
        o.and_children.iter_mut().for_each(|c| prune(program, c));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lawvere::{identity_subst, Substitution};
    use crate::syntax::{parse_atom_indexed, parse_program, Term};

    fn atom(text: &str, n: usize) -> Atom {
        parse_atom_indexed(text, n, 0).unwrap()
    }

    #[test]
    fn gc_tree_opens_one_existential_per_layer() {
        let p = parse_program(crate::fixtures::GC).unwrap();
        let t = build_cotree(&p, &atom("connected(x1,x2)", 2), 3);
        assert_eq!(t.root.or_children.len(), 1);
        let first = &t.root.or_children[0];
        assert_eq!(first.clause, ClauseId(2));
        let names: Vec<String> = first
            .and_children
            .iter()
            .map(|c| c.atom.to_string())
            .collect();
        assert_eq!(names, vec!["edge(x1,z1)", "connected(z1,x2)"]);
        let deeper = &first.and_children[1].or_children[0].and_children;
        let names: Vec<String> = deeper.iter().map(|c| c.atom.to_string()).collect();
        assert_eq!(names, vec!["edge(z1,z2)", "connected(z2,x2)"]);
        t.validate(&p).unwrap();
    }

    #[test]
    fn truncation_marks_frontier() {
        let p = parse_program(crate::fixtures::BAD).unwrap();
        let t = build_cotree(&p, &atom("bad(x1)", 1), 2);
        assert_eq!(t.size(), 3);
        let leaf = &t.root.or_children[0].and_children[0].or_children[0].and_children[0];
        assert_eq!(leaf.frontier, Frontier::Truncated);
        assert_eq!(t.truncate(1), build_cotree(&p, &atom("bad(x1)", 1), 1));
    }

    #[test]
    fn order_is_reflexive_and_detects_missing_branches() {
        let p = parse_program(crate::fixtures::LISTNAT_PLUS).unwrap();
        let q = parse_program(crate::fixtures::LISTNAT).unwrap();
        let a = atom("list(cons(0,nil))", 0);
        let big = build_cotree(&p, &a, 3);
        let small = build_cotree(&q, &a, 3);
        assert!(tree_leq(&big, &big, 3).unwrap().holds());
        assert!(tree_leq(&small, &big, 3).unwrap().holds());
        // The extra branch {list(nil)} is covered by the children of clause 4.
        assert!(tree_leq(&big, &small, 3).unwrap().holds());
        let wide = parse_program("p :- q. p :- r. q :- r.").unwrap();
        let narrow = parse_program("p :- q. q :- r.").unwrap();
        let p0 = atom("p", 0);
        let order = tree_leq(
            &build_cotree(&wide, &p0, 3),
            &build_cotree(&narrow, &p0, 3),
            3,
        )
        .unwrap();
        assert_eq!(
            order,
            TreeOrder::FailsAt {
                at: TreePath(vec![]),
                or_node: 1
            }
        );
        let wide = parse_program("p :- q. q :- r. q :- s.").unwrap();
        let order = tree_leq(
            &build_cotree(&wide, &p0, 3),
            &build_cotree(&narrow, &p0, 3),
            3,
        )
        .unwrap();
        assert_eq!(order.to_string(), "fails at or1.child1, or-node 2");
        let other = build_cotree(&q, &atom("list(nil)", 0), 3);
        assert!(matches!(
            tree_leq(&small, &other, 3),
            Err(SemanticsError::RootMismatch { .. })
        ));
    }

    #[test]
    fn substitution_on_trees() {
        let p = parse_program(crate::fixtures::LISTNAT).unwrap();
        let a = atom("list(cons(x1,nil))", 1);
        let t = build_cotree(&p, &a, 3);
        assert_eq!(subst_tree(&identity_subst(1), &t).unwrap(), t);
        let sigma = Substitution::new(0, vec![Term::constant("0")]).unwrap();
        let mapped = subst_tree_pruned(&p, &sigma, &t).unwrap();
        let direct = build_cotree(&p, &atom("list(cons(0,nil))", 0), 3);
        assert!(tree_leq(&mapped, &direct, 3).unwrap().holds());
        assert!(!tree_leq(&direct, &mapped, 3).unwrap().holds());
        assert!(subst_tree(&identity_subst(2), &t).is_err());
    }
}
