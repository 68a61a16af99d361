//! Concrete syntax: lexer, recursive-descent parser and pretty printer.
//!
//! ```text
//! type nat
//! const zero : nat
//! type llist (n : nat)
//! const lcons : (n:nat) -> obj -> llist n -> llist (succ n)
//! def set := list / (\l:list. \m:list. forall x:obj. contains l x = contains m x)
//! axiom ax : forall x:obj. ~ contains nil x
//! conjecture c : forall n:nat. plus n zero = n
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::syntax::*;

const KEYWORDS: &[&str] = &[
    "type", "const", "axiom", "conjecture", "def", "bool", "true", "false", "forall", "exists", "use", "as",
    "return", "in",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
    end_line: u32,
    end_col: u32,
}

/// Longest symbols first so that `/\` wins over `/`.
const SYMBOLS: &[&str] = &["<=>", "->", "=>", ":=", "/\\", "\\/", "(", ")", "[", "]", ":", ".", ",", "=", "|", "/", "\\", "~"];

#[derive(Clone, Debug, thiserror::Error)]
#[error("{span}: expected {}, found {found}", expected_list(.expected))]
pub struct ParseError {
    pub span: Span,
    pub expected: BTreeSet<String>,
    pub found: String,
}

fn expected_list(e: &BTreeSet<String>) -> String {
    let v: Vec<&str> = e.iter().map(String::as_str).collect();
    match v.len() {
        0 => "something else".to_string(),
        1 => v[0].to_string(),
        _ => format!("one of {}", v.join(", ")),
    }
}

fn lex(text: &str, file: &Arc<str>) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let len = (i - start) as u32;
            out.push(Token { tok: Tok::Ident(s), line, col, end_line: line, end_col: col + len });
            col += len;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                let len = s.chars().count() as u32;
                out.push(Token { tok: Tok::Sym(s), line, col, end_line: line, end_col: col + len });
                i += len as usize;
                col += len;
            }
            None => {
                return Err(ParseError {
                    span: Span { file: file.clone(), start_line: line, start_col: col, end_line: line, end_col: col + 1 },
                    expected: ["token".to_string()].into_iter().collect(),
                    found: format!("`{c}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col, end_line: line, end_col: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    file: Arc<str>,
    bound: Vec<Sym>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span_at(&self, pos: usize) -> Span {
        let t = &self.toks[pos.min(self.toks.len() - 1)];
        Span { file: self.file.clone(), start_line: t.line, start_col: t.col, end_line: t.end_line, end_col: t.end_col }
    }

    /// Span from token `start` to the last consumed token.
    fn span_from(&self, start: usize) -> Span {
        let a = &self.toks[start];
        let b = &self.toks[self.pos.saturating_sub(1).max(start)];
        Span { file: self.file.clone(), start_line: a.line, start_col: a.col, end_line: b.end_line, end_col: b.end_col }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span_at(self.pos),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{s}`")]))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[&format!("`{k}`")]))
        }
    }

    fn ident(&mut self) -> PResult<Sym> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn at_ident(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
    }

    // -- declarations -----------------------------------------------------

    fn theory(&mut self) -> PResult<(Vec<Decl>, Vec<Conjecture>)> {
        let mut decls = Vec::new();
        let mut conjs = Vec::new();
        loop {
            let start = self.pos;
            let kw = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(k) => k.clone(),
                _ => return Err(self.error(&["`type`", "`const`", "`axiom`", "`conjecture`", "`def`", "end of input"])),
            };
            self.pos += 1;
            let kind = match kw.as_str() {
                "type" => {
                    let name = self.ident()?;
                    let telescope = self.telescope()?;
                    self.bound.clear();
                    DeclKind::TypeSym { name, telescope }
                }
                "const" => {
                    let name = self.ident()?;
                    self.expect_sym(":")?;
                    DeclKind::ConstDecl { name, ty: self.ty()? }
                }
                "axiom" | "conjecture" => {
                    let name = self.ident()?;
                    self.expect_sym(":")?;
                    let formula = self.term()?;
                    if kw == "conjecture" {
                        conjs.push(Conjecture { name, formula, span: self.span_from(start) });
                        continue;
                    }
                    DeclKind::Axiom { name, formula }
                }
                "def" => {
                    let name = self.ident()?;
                    let telescope = self.telescope()?;
                    if self.eat_sym(":=") {
                        let rhs = self.ty()?;
                        self.bound.clear();
                        DeclKind::TypeDef { name, telescope, rhs }
                    } else if telescope.is_empty() && self.eat_sym(":") {
                        let ty = self.ty()?;
                        self.expect_sym(":=")?;
                        DeclKind::TermDef { name, ty, rhs: self.term()? }
                    } else {
                        self.bound.clear();
                        return Err(self.error(if telescope.is_empty() { &["`:`", "`:=`", "`(`"] } else { &["`:=`", "`(`"] }));
                    }
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.error(&["`type`", "`const`", "`axiom`", "`conjecture`", "`def`", "end of input"]));
                }
            };
            decls.push(Decl { kind, span: self.span_from(start) });
        }
        Ok((decls, conjs))
    }

    /// `(x y : A) (z : B) ...`; leaves the names bound.
    fn telescope(&mut self) -> PResult<Telescope> {
        let mut tel = Vec::new();
        while self.is_sym("(") {
            self.pos += 1;
            let names = self.names()?;
            self.expect_sym(":")?;
            let a = self.ty()?;
            self.expect_sym(")")?;
            for n in names {
                self.bound.push(n.clone());
                tel.push((n, a.clone()));
            }
        }
        Ok(tel)
    }

    fn names(&mut self) -> PResult<Vec<Sym>> {
        let mut v = vec![self.ident()?];
        while self.at_ident() {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    // -- types ------------------------------------------------------------

    fn ty(&mut self) -> PResult<TypeExpr> {
        let start = self.pos;
        let dependent = self.is_sym("(")
            && matches!(self.peek_at(1), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && {
                let mut k = 2;
                while matches!(self.peek_at(k), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
                    k += 1;
                }
                matches!(self.peek_at(k), Tok::Sym(":"))
            };
        if dependent {
            self.pos += 1;
            let names = self.names()?;
            self.expect_sym(":")?;
            let dom = self.ty()?;
            self.expect_sym(")")?;
            self.expect_sym("->")?;
            let depth = self.bound.len();
            self.bound.extend(names.iter().cloned());
            let cod = self.ty();
            self.bound.truncate(depth);
            let mut cod = cod?;
            for n in names.iter().rev() {
                cod = TypeExpr::pi(n, dom.clone(), cod).with_span(self.span_from(start));
            }
            return Ok(cod);
        }
        let a = self.btype()?;
        if self.eat_sym("->") {
            let b = self.ty()?;
            return Ok(TypeExpr::arrow(a, b).with_span(self.span_from(start)));
        }
        Ok(a)
    }

    fn btype(&mut self) -> PResult<TypeExpr> {
        let start = self.pos;
        let mut a = self.ptype()?;
        loop {
            if self.eat_sym("|") {
                let p = self.pred()?;
                a = TypeExpr::refine(a, p).with_span(self.span_from(start));
            } else if self.eat_sym("/") {
                let r = self.pred()?;
                a = TypeExpr::quotient(a, r).with_span(self.span_from(start));
            } else {
                return Ok(a);
            }
        }
    }

    fn pred(&mut self) -> PResult<Term> {
        if self.at_binder() {
            self.binder_term()
        } else {
            self.app()
        }
    }

    fn ptype(&mut self) -> PResult<TypeExpr> {
        let start = self.pos;
        if self.is_kw("bool") {
            self.pos += 1;
            return Ok(TypeExpr::bool().with_span(self.span_from(start)));
        }
        if self.eat_sym("(") {
            let a = self.ty()?;
            self.expect_sym(")")?;
            return Ok(a);
        }
        if self.at_ident() {
            let name = self.ident()?;
            let mut args = Vec::new();
            while self.at_atom() {
                args.push(self.atom()?);
            }
            return Ok(TypeExpr::base(&name, args).with_span(self.span_from(start)));
        }
        Err(self.error(&["type", "`bool`", "`(`"]))
    }

    // -- terms ------------------------------------------------------------

    fn at_binder(&self) -> bool {
        self.is_sym("\\") || self.is_kw("forall") || self.is_kw("exists") || self.is_kw("use")
    }

    fn at_atom(&self) -> bool {
        self.at_ident() || self.is_kw("true") || self.is_kw("false") || self.is_sym("(")
    }

    fn term(&mut self) -> PResult<Term> {
        if self.at_binder() {
            self.binder_term()
        } else {
            self.imp()
        }
    }

    fn binder_groups(&mut self) -> PResult<Vec<(Sym, TypeExpr)>> {
        let mut out = Vec::new();
        let depth = self.bound.len();
        loop {
            let names = self.names()?;
            self.expect_sym(":")?;
            let a = self.ty()?;
            for n in names {
                self.bound.push(n.clone());
                out.push((n, a.clone()));
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        self.bound.truncate(depth);
        Ok(out)
    }

    fn binder_term(&mut self) -> PResult<Term> {
        let start = self.pos;
        if self.is_kw("use") {
            self.pos += 1;
            let s = self.term()?;
            self.expect_kw("as")?;
            let x = self.ident()?;
            self.expect_sym(":")?;
            let carrier = self.ty()?;
            self.expect_kw("return")?;
            self.bound.push(x.clone());
            let res = (|| {
                let motive = self.ty()?;
                self.expect_kw("in")?;
                let body = self.term()?;
                Ok((motive, body))
            })();
            self.bound.pop();
            let (motive, body) = res?;
            return Ok(Term::quot_elim(s, &x, carrier, body, motive).with_span(self.span_from(start)));
        }
        let which = match self.peek() {
            Tok::Sym("\\") => 0,
            Tok::Ident(k) if k == "forall" => 1,
            Tok::Ident(k) if k == "exists" => 2,
            _ => return Err(self.error(&["`\\`", "`forall`", "`exists`", "`use`"])),
        };
        self.pos += 1;
        let groups = self.binder_groups()?;
        self.expect_sym(".")?;
        let depth = self.bound.len();
        self.bound.extend(groups.iter().map(|(n, _)| n.clone()));
        let body = self.term();
        self.bound.truncate(depth);
        let mut t = body?;
        for (n, a) in groups.into_iter().rev() {
            t = match which {
                0 => Term::lam(&n, a, t),
                1 => Term::forall(&n, a, t),
                _ => Term::exists(&n, a, t),
            }
            .with_span(self.span_from(start));
        }
        Ok(t)
    }

    fn rhs(&mut self, next: fn(&mut Parser) -> PResult<Term>) -> PResult<Term> {
        if self.at_binder() {
            self.binder_term()
        } else {
            next(self)
        }
    }

    fn imp(&mut self) -> PResult<Term> {
        let start = self.pos;
        let l = self.iff()?;
        if self.eat_sym("=>") {
            let r = self.rhs(Parser::imp)?;
            return Ok(Term::implies(l, r).with_span(self.span_from(start)));
        }
        Ok(l)
    }

    fn iff(&mut self) -> PResult<Term> {
        let start = self.pos;
        let l = self.or()?;
        if self.eat_sym("<=>") {
            let r = self.rhs(Parser::or)?;
            return Ok(Term::iff(l, r).with_span(self.span_from(start)));
        }
        Ok(l)
    }

    fn or(&mut self) -> PResult<Term> {
        let start = self.pos;
        let l = self.and()?;
        if self.eat_sym("\\/") {
            let r = self.rhs(Parser::or)?;
            return Ok(Term::or(l, r).with_span(self.span_from(start)));
        }
        Ok(l)
    }

    fn and(&mut self) -> PResult<Term> {
        let start = self.pos;
        let l = self.eq()?;
        if self.eat_sym("/\\") {
            let r = self.rhs(Parser::and)?;
            return Ok(Term::and(l, r).with_span(self.span_from(start)));
        }
        Ok(l)
    }

    fn eq(&mut self) -> PResult<Term> {
        let start = self.pos;
        let l = self.unary()?;
        if self.eat_sym("=") {
            let at = if self.eat_sym("[") {
                let a = self.ty()?;
                self.expect_sym("]")?;
                Some(a)
            } else {
                None
            };
            let r = self.rhs(Parser::unary)?;
            let t = match at {
                Some(a) => Term::eq(l, r, a),
                None => Term::eq_untyped(l, r),
            };
            return Ok(t.with_span(self.span_from(start)));
        }
        Ok(l)
    }

    fn unary(&mut self) -> PResult<Term> {
        let start = self.pos;
        if self.eat_sym("~") {
            let f = self.rhs(Parser::unary)?;
            return Ok(Term::not(f).with_span(self.span_from(start)));
        }
        self.app()
    }

    fn app(&mut self) -> PResult<Term> {
        let start = self.pos;
        let mut t = self.atom()?;
        while self.at_atom() {
            let a = self.atom()?;
            t = Term::app(t, a).with_span(self.span_from(start));
        }
        Ok(t)
    }

    fn atom(&mut self) -> PResult<Term> {
        let start = self.pos;
        if self.is_kw("true") {
            self.pos += 1;
            return Ok(Term::tru().with_span(self.span_from(start)));
        }
        if self.is_kw("false") {
            self.pos += 1;
            return Ok(Term::fals().with_span(self.span_from(start)));
        }
        if self.eat_sym("(") {
            let t = self.term()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.at_ident() {
            let n = self.ident()?;
            let t = if self.bound.contains(&n) { Term::var(&n) } else { Term::cnst(&n) };
            return Ok(t.with_span(self.span_from(start)));
        }
        Err(self.error(&["identifier", "`(`", "`true`", "`false`"]))
    }
}

fn parser(text: &str, file: &str) -> Result<Parser, ParseError> {
    let file: Arc<str> = Arc::from(file);
    let toks = lex(text, &file)?;
    Ok(Parser { toks, pos: 0, file, bound: Vec::new() })
}

/// Parses a whole `.dhol` file into declarations and conjectures.
pub fn parse_theory(text: &str, file: &str) -> Result<(Vec<Decl>, Vec<Conjecture>), ParseError> {
    parser(text, file)?.theory()
}

/// Parses a file into a [`Theory`] named `name`.
pub fn parse_theory_named(text: &str, file: &str, name: &str) -> Result<Theory, ParseError> {
    let (decls, conjectures) = parse_theory(text, file)?;
    Ok(Theory { name: name.to_string(), decls, conjectures })
}

fn finish<T>(mut p: Parser, r: PResult<T>) -> PResult<T> {
    let v = r?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.error(&["end of input"]));
    }
    p.pos = 0;
    Ok(v)
}

/// Parses a standalone term; `bound` lists names to read as variables.
pub fn parse_term(text: &str, bound: &[&str]) -> Result<Term, ParseError> {
    let mut p = parser(text, "<input>")?;
    p.bound = bound.iter().map(|s| s.to_string()).collect();
    let r = p.term();
    finish(p, r)
}

pub fn parse_type(text: &str, bound: &[&str]) -> Result<TypeExpr, ParseError> {
    let mut p = parser(text, "<input>")?;
    p.bound = bound.iter().map(|s| s.to_string()).collect();
    let r = p.ty();
    finish(p, r)
}

// ---------------------------------------------------------------------------
// Printing

/// Picks a printable binder name: one that does not collide with a constant
/// used in the scope (which would otherwise reparse as the variable).
fn binder_name(x: &str, scope_consts: &BTreeSet<Sym>, scope_fv: &BTreeSet<Sym>) -> Sym {
    if x == ANON || scope_consts.contains(x) || KEYWORDS.contains(&x) {
        let mut avoid = scope_consts.clone();
        avoid.extend(scope_fv.iter().cloned());
        fresh_name(if x == ANON { "x" } else { x }, &avoid)
    } else {
        x.to_string()
    }
}

fn paren(s: String, yes: bool) -> String {
    if yes {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_term(t: &Term) -> String {
    pt(t, 0)
}

fn print_binder(kw: &str, x: &str, a: &TypeExpr, body: &Term) -> String {
    let name = binder_name(x, &body.consts(), &body.free_vars());
    let body = rename(body, x, &name);
    let sep = if kw == "\\" { "" } else { " " };
    format!("{kw}{sep}{name}:{}. {}", py(a, 0), pt(&body, 0))
}

fn pt(t: &Term, lvl: u8) -> String {
    match &t.kind {
        TermKind::Const(c) => c.clone(),
        TermKind::Var(x) => x.clone(),
        TermKind::True => "true".into(),
        TermKind::False => "false".into(),
        TermKind::Lam(x, a, b) => paren(print_binder("\\", x, a, b), lvl > 0),
        TermKind::Forall(x, a, b) => paren(print_binder("forall", x, a, b), lvl > 0),
        TermKind::Exists(x, a, b) => paren(print_binder("exists", x, a, b), lvl > 0),
        TermKind::QuotElim { scrutinee, binder, carrier, body, motive } => {
            let mut consts = body.consts();
            consts_type(motive, &mut consts);
            let mut fv = body.free_vars();
            fv.extend(motive.free_vars());
            let name = binder_name(binder, &consts, &fv);
            let body = rename(body, binder, &name);
            let motive = rename_type(motive, binder, &name);
            paren(
                format!(
                    "use {} as {name} : {} return {} in {}",
                    pt(scrutinee, 0),
                    py(carrier, 0),
                    py(&motive, 0),
                    pt(&body, 0)
                ),
                lvl > 0,
            )
        }
        TermKind::Implies(h, c) => paren(format!("{} => {}", pt(h, 2), pt(c, 1)), lvl > 1),
        TermKind::Iff(f, g) => paren(format!("{} <=> {}", pt(f, 3), pt(g, 3)), lvl > 2),
        TermKind::Or(f, g) => paren(format!("{} \\/ {}", pt(f, 4), pt(g, 3)), lvl > 3),
        TermKind::And(f, g) => paren(format!("{} /\\ {}", pt(f, 5), pt(g, 4)), lvl > 4),
        TermKind::Eq(l, r, at) => {
            let op = match at {
                Some(a) => format!("=[{}]", py(a, 0)),
                None => "=".to_string(),
            };
            paren(format!("{} {op} {}", pt(l, 6), pt(r, 6)), lvl > 5)
        }
        TermKind::Not(f) => paren(format!("~{}", pt(f, 6)), lvl > 6),
        TermKind::App(f, a) => paren(format!("{} {}", pt(f, 7), pt(a, 8)), lvl > 7),
    }
}

pub fn print_type(a: &TypeExpr) -> String {
    py(a, 0)
}

fn py(a: &TypeExpr, lvl: u8) -> String {
    match &a.kind {
        TypeKind::Bool => "bool".into(),
        TypeKind::Base(n, args) => {
            if args.is_empty() {
                n.clone()
            } else {
                let args: Vec<String> = args.iter().map(|t| pt(t, 8)).collect();
                format!("{n} {}", args.join(" "))
            }
        }
        TypeKind::Pi(x, d, c) => {
            let s = if x != ANON && c.has_free(x) {
                let mut consts = BTreeSet::new();
                consts_type(c, &mut consts);
                let name = binder_name(x, &consts, &c.free_vars());
                let c = rename_type(c, x, &name);
                format!("({name}:{}) -> {}", py(d, 0), py(&c, 0))
            } else {
                format!("{} -> {}", py(d, 1), py(c, 0))
            };
            paren(s, lvl > 0)
        }
        TypeKind::Refine(b, p) => paren(format!("{} | {}", py(b, 1), pt(p, 7)), lvl > 1),
        TypeKind::Quotient(b, r) => paren(format!("{} / {}", py(b, 1), pt(r, 7)), lvl > 1),
    }
}

fn print_telescope(tel: &Telescope) -> String {
    tel.iter().map(|(x, a)| format!(" ({x} : {})", py(a, 0))).collect()
}

pub fn print_decl(d: &Decl) -> String {
    match &d.kind {
        DeclKind::TypeSym { name, telescope } => format!("type {name}{}", print_telescope(telescope)),
        DeclKind::ConstDecl { name, ty } => format!("const {name} : {}", py(ty, 0)),
        DeclKind::Axiom { name, formula } => format!("axiom {name} : {}", pt(formula, 0)),
        DeclKind::TypeDef { name, telescope, rhs } => {
            format!("def {name}{} := {}", print_telescope(telescope), py(rhs, 0))
        }
        DeclKind::TermDef { name, ty, rhs } => format!("def {name} : {} := {}", py(ty, 0), pt(rhs, 0)),
    }
}

pub fn print_theory(decls: &[Decl], conjs: &[Conjecture]) -> String {
    let mut out = String::new();
    for d in decls {
        out.push_str(&print_decl(d));
        out.push('\n');
    }
    for c in conjs {
        out.push_str(&format!("conjecture {} : {}\n", c.name, pt(&c.formula, 0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> TypeExpr {
        parse_type(s, &[]).unwrap()
    }

    #[test]
    fn type_and_const() {
        let (d, c) = parse_theory("type nat  const zero : nat", "t").unwrap();
        assert!(c.is_empty());
        assert_eq!(d.len(), 2);
        assert!(matches!(&d[0].kind, DeclKind::TypeSym { name, telescope } if name == "nat" && telescope.is_empty()));
        match &d[1].kind {
            DeclKind::ConstDecl { name, ty } => {
                assert_eq!(name, "zero");
                assert!(ty.alpha_eq(&TypeExpr::base("nat", vec![])));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn telescope_decl() {
        let (d, _) = parse_theory("type llist (n : nat)", "t").unwrap();
        match &d[0].kind {
            DeclKind::TypeSym { name, telescope } => {
                assert_eq!(name, "llist");
                assert_eq!(telescope.len(), 1);
                assert_eq!(telescope[0].0, "n");
                assert!(telescope[0].1.alpha_eq(&TypeExpr::base("nat", vec![])));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn empty_file() {
        let (d, c) = parse_theory("", "t").unwrap();
        assert!(d.is_empty() && c.is_empty());
        let (d, c) = parse_theory("# only a comment\n", "t").unwrap();
        assert!(d.is_empty() && c.is_empty());
    }

    #[test]
    fn prints_refinement() {
        let list = TypeExpr::base("list", vec![]);
        let p = Term::lam(
            "l",
            list.clone(),
            Term::eq_untyped(Term::app(Term::cnst("length"), Term::var("l")), Term::var("n")),
        );
        assert_eq!(print_type(&TypeExpr::refine(list, p)), "list | (\\l:list. length l = n)");
    }

    #[test]
    fn prints_quotient() {
        let a = TypeExpr::quotient(TypeExpr::base("A", vec![]), Term::cnst("r"));
        assert_eq!(print_type(&a), "A / r");
    }

    #[test]
    fn prints_dependent_pi() {
        let s = "(m:nat) -> (n:nat) -> llist m -> llist n -> llist (plus m n)";
        assert_eq!(print_type(&ty(s)), s);
    }

    #[test]
    fn refinement_under_arrow() {
        let a = ty("A -> B | p");
        match &a.kind {
            TypeKind::Pi(_, _, c) => assert!(matches!(c.kind, TypeKind::Refine(..))),
            _ => panic!("expected an arrow"),
        }
        let b = ty("(A -> B) | p");
        assert!(matches!(b.kind, TypeKind::Refine(..)));
    }

    #[test]
    fn precedence() {
        let t = parse_term("a = b /\\ c \\/ d => e => f", &[]).unwrap();
        let want = Term::implies(
            Term::or(
                Term::and(Term::eq_untyped(Term::cnst("a"), Term::cnst("b")), Term::cnst("c")),
                Term::cnst("d"),
            ),
            Term::implies(Term::cnst("e"), Term::cnst("f")),
        );
        assert!(t.alpha_eq(&want));
    }

    #[test]
    fn binder_extends_right() {
        let t = parse_term("p => forall x:A. q x /\\ r", &[]).unwrap();
        match &t.kind {
            TermKind::Implies(_, c) => assert!(matches!(c.kind, TermKind::Forall(..))),
            _ => panic!(),
        }
    }

    #[test]
    fn variables_resolve_to_binders() {
        let t = parse_term("\\x:A. f x y", &[]).unwrap();
        let want = Term::lam("x", TypeExpr::base("A", vec![]), Term::apps(Term::cnst("f"), [Term::var("x"), Term::cnst("y")]));
        assert!(t.alpha_eq(&want));
    }

    #[test]
    fn quot_elim_syntax() {
        let t = parse_term("use u as x : set return list -> set in conc x", &[]).unwrap();
        match &t.kind {
            TermKind::QuotElim { binder, body, .. } => {
                assert_eq!(binder, "x");
                assert!(body.alpha_eq(&Term::app(Term::cnst("conc"), Term::var("x"))));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn error_reports_expected_tokens() {
        let e = parse_theory("const zero nat", "f.dhol").unwrap_err();
        assert!(e.expected.contains("`:`"));
        assert_eq!(e.span.start_line, 1);
        assert_eq!(e.span.start_col, 12);
        let e = parse_theory("axiom a : (p", "f.dhol").unwrap_err();
        assert!(e.expected.contains("`)`"));
        assert_eq!(e.found, "end of input");
    }

    #[test]
    fn typed_equality_round_trip() {
        let t = parse_term("x =[llist (succ n)] y", &["x", "y", "n"]).unwrap();
        let s = print_term(&t);
        assert_eq!(s, "x =[llist (succ n)] y");
    }
}
