//! Prolog-like surface syntax.
//!
//! ```text
//! program ::= clause*
//! clause  ::= atom ( ":-" atom ( "," atom )* )? "."
//! atom    ::= ident ( "(" term ( "," term )* ")" )?
//! term    ::= VAR | ident ( "(" term ( "," term )* ")" )?
//! ```
//!
//! Variables match `[A-Z_][A-Za-z0-9_]*`, symbols `[a-z0-9][A-Za-z0-9_]*`,
//! `%` starts a line comment. A bare `_` is a fresh variable at each use.

use indexmap::IndexMap;

use super::{Atom, Clause, Program, Signature, Term};
use crate::error::{Position, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Eof,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Position)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '%' {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    break;
                }
            }
            let at = self.pos();
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, at));
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' => {
                    if self.chars.peek() == Some(&'-') {
                        self.bump();
                        Tok::Neck
                    } else {
                        return Err(SyntaxError::Parse {
                            at,
                            message: "expected `:-`".into(),
                        });
                    }
                }
                c if c.is_ascii_lowercase() || c.is_ascii_digit() => Tok::Ident(self.word(c)),
                c if c.is_ascii_uppercase() || c == '_' => Tok::Var(self.word(c)),
                other => {
                    return Err(SyntaxError::Parse {
                        at,
                        message: format!("unexpected character `{other}`"),
                    });
                }
            };
            out.push((tok, at));
        }
    }

    fn word(&mut self, first: char) -> String {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }
}

/// How identifiers resolve to variable indices while parsing one clause or query.
enum Scope {
    /// Uppercase names, numbered by first occurrence.
    Named {
        names: IndexMap<String, usize>,
        anonymous: usize,
    },
    /// Printed form: `x<i>` is bound variable `i - 1`, `z<j>` is `bound + j - 1`.
    Indexed { bound: usize, existential: usize },
}

impl Scope {
    fn named() -> Self {
        Scope::Named {
            names: IndexMap::new(),
            anonymous: 0,
        }
    }

    fn names(&self) -> Vec<String> {
        match self {
            Scope::Named { names, .. } => names.keys().cloned().collect(),
            Scope::Indexed { .. } => Vec::new(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Scope::Named { names, .. } => names.len(),
            Scope::Indexed { bound, existential } => bound + existential,
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
    signature: Signature,
    origins: IndexMap<String, Position>,
}

impl Parser {
    fn new(text: &str, signature: Signature) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: Lexer::new(text).tokens()?,
            at: 0,
            signature,
            origins: IndexMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Position {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Position) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        let (tok, at) = self.next();
        if tok == want {
            Ok(())
        } else {
            Err(SyntaxError::Parse {
                at,
                message: format!("expected {what}, found {}", describe(&tok)),
            })
        }
    }

    fn error<T>(&self, message: String) -> Result<T, SyntaxError> {
        Err(SyntaxError::Parse {
            at: self.pos(),
            message,
        })
    }

    fn declare(
        &mut self,
        predicate: bool,
        symbol: &str,
        arity: usize,
        at: Position,
    ) -> Result<(), SyntaxError> {
        let map = if predicate {
            &mut self.signature.predicates
        } else {
            &mut self.signature.functions
        };
        match map.get(symbol) {
            Some(&known) if known != arity => Err(SyntaxError::ArityConflict {
                symbol: symbol.to_string(),
                first: known,
                second: arity,
                at: Some(at),
            }),
            Some(_) => Ok(()),
            None => {
                map.insert(symbol.to_string(), arity);
                self.origins.insert(symbol.to_string(), at);
                Ok(())
            }
        }
    }

    fn atom(&mut self, scope: &mut Scope) -> Result<Atom, SyntaxError> {
        let (tok, at) = self.next();
        let Tok::Ident(pred) = tok else {
            return Err(SyntaxError::Parse {
                at,
                message: format!("expected a predicate, found {}", describe(&tok)),
            });
        };
        let args = self.args(scope)?;
        self.declare(true, &pred, args.len(), at)?;
        Ok(Atom {
            predicate: pred,
            args,
            context: 0,
        })
    }

    fn args(&mut self, scope: &mut Scope) -> Result<Vec<Term>, SyntaxError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                args.push(self.term(scope)?);
                match self.next() {
                    (Tok::Comma, _) => continue,
                    (Tok::RParen, _) => break,
                    (tok, at) => {
                        return Err(SyntaxError::Parse {
                            at,
                            message: format!("expected `,` or `)`, found {}", describe(&tok)),
                        })
                    }
                }
            }
        }
        Ok(args)
    }

    fn term(&mut self, scope: &mut Scope) -> Result<Term, SyntaxError> {
        let (tok, at) = self.next();
        match tok {
            Tok::Var(name) => match scope {
                Scope::Named { names, anonymous } => {
                    let name = if name == "_" {
                        *anonymous += 1;
                        format!("_G{anonymous}")
                    } else {
                        name
                    };
                    let next = names.len();
                    Ok(Term::Var(*names.entry(name).or_insert(next)))
                }
                Scope::Indexed { .. } => Err(SyntaxError::Parse {
                    at,
                    message: format!("named variable `{name}` in indexed form; use x1.. / z1.."),
                }),
            },
            Tok::Ident(name) => {
                if let Scope::Indexed { bound, existential } = scope {
                    if let Some(v) = indexed_var(&name, *bound, *existential) {
                        return v.map_err(|message| SyntaxError::Parse { at, message });
                    }
                }
                let args = self.args(scope)?;
                self.declare(false, &name, args.len(), at)?;
                Ok(Term::App(name, args))
            }
            other => Err(SyntaxError::Parse {
                at,
                message: format!("expected a term, found {}", describe(&other)),
            }),
        }
    }

    fn clause(&mut self) -> Result<Clause, SyntaxError> {
        let mut scope = Scope::named();
        let head = self.atom(&mut scope)?;
        let mut body = Vec::new();
        if *self.peek() == Tok::Neck {
            self.next();
            loop {
                body.push(self.atom(&mut scope)?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        let n = scope.len();
        let head = head.with_context(n);
        let body = body.into_iter().map(|b| b.with_context(n)).collect();
        Ok(Clause::new(head, body, scope.names()))
    }
}

fn indexed_var(name: &str, bound: usize, existential: usize) -> Option<Result<Term, String>> {
    let (kind, digits) = name.split_at(1);
    if !(kind == "x" || kind == "z")
        || digits.is_empty()
        || !digits.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let i: usize = digits.parse().ok()?;
    if i == 0 {
        return Some(Err(format!("variable `{name}`: numbering starts at 1")));
    }
    Some(match kind {
        "x" if i <= bound => Ok(Term::Var(i - 1)),
        "z" if i <= existential => Ok(Term::Var(bound + i - 1)),
        _ => Err(format!("variable `{name}` is outside the context")),
    })
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Var(s) => format!("variable `{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Neck => "`:-`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a whole program; the signature is inferred from use.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser::new(text, Signature::new())?;
    let mut clauses = Vec::new();
    while *p.peek() != Tok::Eof {
        clauses.push(p.clause()?);
    }
    Ok(Program {
        signature: p.signature,
        clauses,
    })
}

/// A conjunctive query with named variables, e.g. `connected(X, Y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub goals: Vec<Atom>,
    pub var_names: Vec<String>,
}

impl Query {
    pub fn context(&self) -> usize {
        self.var_names.len()
    }

    /// Renders `Var(i)` with the query's own name when it has one.
    pub fn name(&self, i: usize) -> String {
        self.var_names
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("_{}", i + 1))
    }
}

/// Parses `a1, ..., ak` (an optional trailing `.` is accepted) against a
/// program signature. Unknown symbols are allowed, arity conflicts are not.
pub fn parse_goals(text: &str, signature: &Signature) -> Result<Query, SyntaxError> {
    let mut p = Parser::new(text, signature.clone())?;
    let mut scope = Scope::named();
    let mut goals = vec![p.atom(&mut scope)?];
    while *p.peek() == Tok::Comma {
        p.next();
        goals.push(p.atom(&mut scope)?);
    }
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after query", describe(p.peek())));
    }
    let n = scope.len();
    Ok(Query {
        goals: goals.into_iter().map(|g| g.with_context(n)).collect(),
        var_names: scope.names(),
    })
}

/// Parses a single atom with named variables.
pub fn parse_query(text: &str, signature: &Signature) -> Result<Query, SyntaxError> {
    let q = parse_goals(text, signature)?;
    if q.goals.len() != 1 {
        return Err(SyntaxError::Parse {
            at: Position { line: 1, column: 1 },
            message: "expected a single atom".into(),
        });
    }
    Ok(q)
}

/// Parses the printed form produced by `Display`: `x1..xn` are bound
/// variables, `z1..zk` existentials (indices `n..n+k`). Identifiers of the
/// shape `x<digits>` or `z<digits>` are never read as symbols here.
pub fn parse_atom_indexed(
    text: &str,
    bound: usize,
    existential: usize,
) -> Result<Atom, SyntaxError> {
    let mut p = Parser::new(text, Signature::new())?;
    let mut scope = Scope::Indexed { bound, existential };
    let atom = p.atom(&mut scope)?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after atom", describe(p.peek())));
    }
    Ok(atom.with_context(bound + existential))
}

/// Parses a term in printed form; see [`parse_atom_indexed`].
pub fn parse_term_indexed(
    text: &str,
    bound: usize,
    existential: usize,
) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text, Signature::new())?;
    let mut scope = Scope::Indexed { bound, existential };
    let term = p.term(&mut scope)?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after term", describe(p.peek())));
    }
    Ok(term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ClauseId;

    #[test]
    fn listnat_parses_in_source_order() {
        let p = parse_program(crate::fixtures::LISTNAT).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(
            p.clause(ClauseId(4)).to_string(),
            "list(cons(X,Y)) :- nat(X), list(Y)."
        );
        let funcs: Vec<_> = p
            .signature
            .functions
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect();
        assert_eq!(funcs, vec![("0", 0), ("s", 1), ("nil", 0), ("cons", 2)]);
    }

    #[test]
    fn empty_input_is_empty_program() {
        let p = parse_program("").unwrap();
        assert!(p.is_empty());
        assert!(p.signature.functions.is_empty() && p.signature.predicates.is_empty());
        assert!(parse_program("% only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn gc_existential_vars() {
        let p = parse_program("connected(X,Y) :- edge(X,Z), connected(Z,Y).").unwrap();
        let c = &p.clauses[0];
        assert_eq!(
            c.existential_vars()
                .iter()
                .map(|&v| c.var_names[v].as_str())
                .collect::<Vec<_>>(),
            vec!["Z"]
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_program("nat(0).\nnat(s(X) :- nat(X).").unwrap_err();
        match err {
            SyntaxError::Parse { at, .. } => assert_eq!((at.line, at.column), (2, 10)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_program("p(a) :- q(a)"),
            Err(SyntaxError::Parse { .. })
        ));
        assert!(matches!(
            parse_program("p(a) : q."),
            Err(SyntaxError::Parse { .. })
        ));
        assert!(matches!(
            parse_program("P(a)."),
            Err(SyntaxError::Parse { .. })
        ));
    }

    #[test]
    fn arity_conflict_reports_position() {
        let err = parse_program("p(a).\np(a, b).").unwrap_err();
        match err {
            SyntaxError::ArityConflict {
                symbol,
                first,
                second,
                at,
            } => {
                assert_eq!((symbol.as_str(), first, second), ("p", 1, 2));
                assert_eq!(at.unwrap().line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_program("p(f(a)). q(f)."),
            Err(SyntaxError::ArityConflict { .. })
        ));
    }

    #[test]
    fn nullary_predicates() {
        let p = parse_program(crate::fixtures::GROUND_ABCD).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.is_ground());
        assert_eq!(p.clauses[0].to_string(), "a :- b, c.");
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let p = parse_program("p(_, _).").unwrap();
        assert_eq!(p.clauses[0].context, 2);
    }

    #[test]
    fn queries_share_one_context() {
        let p = parse_program(crate::fixtures::GC).unwrap();
        let q = parse_goals("connected(X, Y), edge(Y, W).", &p.signature).unwrap();
        assert_eq!(q.context(), 3);
        assert_eq!(q.goals[1].to_string(), "edge(x2,x3)");
        assert!(parse_query("connected(X)", &p.signature).is_err());
    }

    #[test]
    fn indexed_form() {
        let a = parse_atom_indexed("connected(x1,z2)", 1, 2).unwrap();
        assert_eq!(a.args, vec![Term::Var(0), Term::Var(2)]);
        assert_eq!(a.context, 3);
        assert!(parse_atom_indexed("nat(x2)", 1, 0).is_err());
        assert!(parse_atom_indexed("nat(X)", 1, 0).is_err());
    }
}
