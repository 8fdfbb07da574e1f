use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AndNode, CoTree, Frontier, OrNode};
use crate::error::SemanticsError;
use crate::intfunctor::ExtAtom;
use crate::lawvere::Substitution;
use crate::syntax::{parse_atom_indexed, parse_term_indexed, ClauseId, Program, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Ascii,
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = SemanticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ascii" => Ok(ExportFormat::Ascii),
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(SemanticsError::UnknownFormat(other.to_string())),
        }
    }
}

/// Renders a tree; `program` supplies the clause variable names for matchers.
pub fn export(tree: &CoTree, program: &Program, format: ExportFormat) -> String {
    match format {
        ExportFormat::Ascii => ascii(tree, program),
        ExportFormat::Dot => dot(tree, program),
        ExportFormat::Json => serde_json::to_string_pretty(&to_json(tree)).expect("serializable"),
    }
}

fn scope_name(bound: usize, i: usize) -> String {
    if i < bound {
        format!("x{}", i + 1)
    } else {
        format!("z{}", i - bound + 1)
    }
}

fn term_text(term: &Term, bound: usize) -> String {
    let mut s = String::new();
    term.write_with(&mut s, &|i| scope_name(bound, i))
        .expect("writing to a String");
    s
}

/// `{X->t, ...}` with clause variable names on the left.
fn matcher_text(program: &Program, bound: usize, or: &OrNode) -> String {
    let names = program
        .clauses
        .get(or.clause.0 - 1)
        .map(|c| c.var_names.clone())
        .unwrap_or_default();
    let parts: Vec<String> = or
        .matcher
        .terms()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let key = names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("V{}", i + 1));
            format!("{key}->{}", term_text(t, bound))
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn ascii(tree: &CoTree, program: &Program) -> String {
    let mut out = String::new();
    ascii_node(&mut out, program, &tree.root, 0);
    out
}

fn ascii_node(out: &mut String, program: &Program, node: &AndNode, indent: usize) {
    let pad = "  ".repeat(indent);
    let mark = if node.frontier == Frontier::Truncated {
        " ..."
    } else {
        ""
    };
    let _ = writeln!(out, "{pad}{}{mark}", node.atom);
    for or in &node.or_children {
        let _ = writeln!(
            out,
            "{pad}  • {} {}",
            or.clause,
            matcher_text(program, node.atom.bound(), or)
        );
        for c in &or.and_children {
            ascii_node(out, program, c, indent + 2);
        }
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot(tree: &CoTree, program: &Program) -> String {
    let mut out = String::from("digraph cotree {\n  node [fontname=\"monospace\"];\n");
    let mut next = 0;
    dot_node(&mut out, program, &tree.root, &mut next);
    out.push_str("}\n");
    out
}

fn dot_node(out: &mut String, program: &Program, node: &AndNode, next: &mut usize) -> usize {
    let id = *next;
    *next += 1;
    let style = if node.frontier == Frontier::Truncated {
        ", style=dashed"
    } else {
        ""
    };
    let _ = writeln!(
        out,
        "  n{id} [shape=box, label=\"{}\"{style}];",
        dot_escape(&node.atom.to_string())
    );
    for or in &node.or_children {
        let oid = *next;
        *next += 1;
        let label = format!(
            "{} {}",
            or.clause,
            matcher_text(program, node.atom.bound(), or)
        );
        let _ = writeln!(
            out,
            "  n{oid} [shape=point, width=0.12, xlabel=\"{}\"];\n  n{id} -> n{oid};",
            dot_escape(&label)
        );
        for c in &or.and_children {
            let _ = writeln!(out, "  n{oid} -> n{};", *next);
            dot_node(out, program, c, next);
        }
    }
    id
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonTree {
    pub depth: usize,
    pub root: JsonAnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonAnd {
    pub atom: String,
    pub bound: usize,
    pub existentials: usize,
    pub frontier: Frontier,
    pub or: Vec<JsonOr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonOr {
    pub clause: ClauseId,
    /// Context of the matcher's terms: bound variables plus existentials.
    pub scope: usize,
    pub matcher: Vec<String>,
    pub children: Vec<JsonAnd>,
}

impl<'de> Deserialize<'de> for Frontier {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "expanded" => Ok(Frontier::Expanded),
            "truncated" => Ok(Frontier::Truncated),
            other => Err(serde::de::Error::unknown_variant(
                other,
                &["expanded", "truncated"],
            )),
        }
    }
}

pub fn to_json(tree: &CoTree) -> JsonTree {
    JsonTree {
        depth: tree.depth,
        root: json_and(&tree.root),
    }
}

fn json_and(node: &AndNode) -> JsonAnd {
    let bound = node.atom.bound();
    JsonAnd {
        atom: node.atom.to_string(),
        bound,
        existentials: node.atom.exist(),
        frontier: node.frontier,
        or: node
            .or_children
            .iter()
            .map(|o| JsonOr {
                clause: o.clause,
                scope: o.matcher.source(),
                matcher: o
                    .matcher
                    .terms()
                    .iter()
                    .map(|t| term_text(t, bound))
                    .collect(),
                children: o.and_children.iter().map(json_and).collect(),
            })
            .collect(),
    }
}

/// Rebuilds a tree from its JSON form.
pub fn from_json(json: &JsonTree) -> Result<CoTree, String> {
    Ok(CoTree {
        root: from_json_and(&json.root)?,
        depth: json.depth,
    })
}

fn from_json_and(node: &JsonAnd) -> Result<AndNode, String> {
    let atom =
        parse_atom_indexed(&node.atom, node.bound, node.existentials).map_err(|e| e.to_string())?;
    let atom = ExtAtom::scoped(node.bound, node.existentials, atom).map_err(|e| e.to_string())?;
    let or_children = node
        .or
        .iter()
        .map(|o| {
            let exist = o
                .scope
                .checked_sub(node.bound)
                .ok_or("matcher scope below the bound context")?;
            let terms = o
                .matcher
                .iter()
                .map(|t| parse_term_indexed(t, node.bound, exist).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(OrNode {
                clause: o.clause,
                matcher: Substitution::new(o.scope, terms).map_err(|e| e.to_string())?,
                and_children: o
                    .children
                    .iter()
                    .map(from_json_and)
                    .collect::<Result<_, String>>()?,
            })
        })
        .collect::<Result<_, String>>()?;
    Ok(AndNode {
        atom,
        frontier: node.frontier,
        or_children,
    })
}
