//! Abstract syntax of DHOL terms, types, theories and contexts.
//!
//! Terms and types carry a [`Span`]. Spans never take part in comparisons;
//! use [`Term::alpha_eq`] and [`TypeExpr::alpha_eq`] for structural equality.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub type Sym = String;

/// Binder name used for non-dependent arrows.
pub const ANON: &str = "_";

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn is_dummy(&self) -> bool {
        self.start_line == 0 && self.end_line == 0
    }

    /// Smallest span covering both.
    pub fn join(&self, other: &Span) -> Span {
        if self.is_dummy() {
            return other.clone();
        }
        if other.is_dummy() {
            return self.clone();
        }
        let (sl, sc) = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let (el, ec) = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        Span { file: self.file.clone(), start_line: sl, start_col: sc, end_line: el, end_col: ec }
    }

    /// True when `inner` lies within `self`.
    pub fn contains(&self, inner: &Span) -> bool {
        (self.start_line, self.start_col) <= (inner.start_line, inner.start_col)
            && (inner.end_line, inner.end_col) <= (self.end_line, self.end_col)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dummy() {
            return write!(f, "<generated>");
        }
        write!(f, "{}:{}:{}-{}:{}", self.file, self.start_line, self.start_col, self.end_line, self.end_col)
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum TermKind {
    Const(Sym),
    Var(Sym),
    Lam(Sym, Box<TypeExpr>, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// Typed equality; `None` until elaboration fills in the type.
    Eq(Box<Term>, Box<Term>, Option<Box<TypeExpr>>),
    /// Dependent implication: the conclusion may assume the hypothesis.
    Implies(Box<Term>, Box<Term>),
    QuotElim {
        scrutinee: Box<Term>,
        binder: Sym,
        carrier: Box<TypeExpr>,
        body: Box<Term>,
        motive: Box<TypeExpr>,
    },
    True,
    False,
    Not(Box<Term>),
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    Iff(Box<Term>, Box<Term>),
    Forall(Sym, Box<TypeExpr>, Box<Term>),
    Exists(Sym, Box<TypeExpr>, Box<Term>),
}

#[derive(Clone, Debug)]
pub struct TypeExpr {
    pub kind: TypeKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum TypeKind {
    Bool,
    Base(Sym, Vec<Term>),
    Pi(Sym, Box<TypeExpr>, Box<TypeExpr>),
    Refine(Box<TypeExpr>, Box<Term>),
    Quotient(Box<TypeExpr>, Box<Term>),
}

#[derive(Clone, Debug)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

pub type Telescope = Vec<(Sym, TypeExpr)>;

#[derive(Clone, Debug)]
pub enum DeclKind {
    TypeSym { name: Sym, telescope: Telescope },
    ConstDecl { name: Sym, ty: TypeExpr },
    Axiom { name: Sym, formula: Term },
    TypeDef { name: Sym, telescope: Telescope, rhs: TypeExpr },
    TermDef { name: Sym, ty: TypeExpr, rhs: Term },
}

impl Decl {
    pub fn name(&self) -> &str {
        match &self.kind {
            DeclKind::TypeSym { name, .. }
            | DeclKind::ConstDecl { name, .. }
            | DeclKind::Axiom { name, .. }
            | DeclKind::TypeDef { name, .. }
            | DeclKind::TermDef { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Conjecture {
    pub name: Sym,
    pub formula: Term,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct Theory {
    pub name: String,
    pub decls: Vec<Decl>,
    pub conjectures: Vec<Conjecture>,
}

#[derive(Clone, Debug)]
pub enum CtxEntry {
    VarDecl(Sym, TypeExpr),
    Assumption(Sym, Term),
}

#[derive(Clone, Debug, Default)]
pub struct Context {
    pub entries: Vec<CtxEntry>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&TypeExpr> {
        self.entries.iter().rev().find_map(|e| match e {
            CtxEntry::VarDecl(y, a) if y == x => Some(a),
            _ => None,
        })
    }

    pub fn has_name(&self, x: &str) -> bool {
        self.entries.iter().any(|e| match e {
            CtxEntry::VarDecl(y, _) | CtxEntry::Assumption(y, _) => y == x,
        })
    }

    pub fn names(&self) -> BTreeSet<Sym> {
        self.entries
            .iter()
            .map(|e| match e {
                CtxEntry::VarDecl(y, _) | CtxEntry::Assumption(y, _) => y.clone(),
            })
            .collect()
    }

    pub fn with_var(&self, x: &str, a: TypeExpr) -> Context {
        let mut c = self.clone();
        c.entries.push(CtxEntry::VarDecl(x.to_string(), a));
        c
    }

    pub fn with_assumption(&self, f: Term) -> Context {
        let mut c = self.clone();
        let n = self.entries.iter().filter(|e| matches!(e, CtxEntry::Assumption(..))).count();
        c.entries.push(CtxEntry::Assumption(format!("h{}", n + 1), f));
        c
    }

    /// Universal closure of `goal` over this context: variables become
    /// quantifiers and assumptions become hypotheses.
    pub fn close(&self, goal: Term) -> Term {
        self.entries.iter().rev().fold(goal, |acc, e| match e {
            CtxEntry::VarDecl(x, a) => Term::forall(x, a.clone(), acc),
            CtxEntry::Assumption(_, f) => Term::implies(f.clone(), acc),
        })
    }
}

// ---------------------------------------------------------------------------
// Constructors

impl Term {
    pub fn new(kind: TermKind) -> Term {
        Term { kind, span: Span::default() }
    }
    pub fn with_span(mut self, span: Span) -> Term {
        self.span = span;
        self
    }
    pub fn cnst(name: &str) -> Term {
        Term::new(TermKind::Const(name.to_string()))
    }
    pub fn var(name: &str) -> Term {
        Term::new(TermKind::Var(name.to_string()))
    }
    pub fn lam(x: &str, a: TypeExpr, body: Term) -> Term {
        Term::new(TermKind::Lam(x.to_string(), Box::new(a), Box::new(body)))
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::new(TermKind::App(Box::new(f), Box::new(a)))
    }
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }
    pub fn eq(l: Term, r: Term, at: TypeExpr) -> Term {
        Term::new(TermKind::Eq(Box::new(l), Box::new(r), Some(Box::new(at))))
    }
    pub fn eq_untyped(l: Term, r: Term) -> Term {
        Term::new(TermKind::Eq(Box::new(l), Box::new(r), None))
    }
    pub fn implies(h: Term, c: Term) -> Term {
        Term::new(TermKind::Implies(Box::new(h), Box::new(c)))
    }
    pub fn tru() -> Term {
        Term::new(TermKind::True)
    }
    pub fn fals() -> Term {
        Term::new(TermKind::False)
    }
    pub fn not(f: Term) -> Term {
        Term::new(TermKind::Not(Box::new(f)))
    }
    pub fn and(f: Term, g: Term) -> Term {
        Term::new(TermKind::And(Box::new(f), Box::new(g)))
    }
    pub fn or(f: Term, g: Term) -> Term {
        Term::new(TermKind::Or(Box::new(f), Box::new(g)))
    }
    pub fn iff(f: Term, g: Term) -> Term {
        Term::new(TermKind::Iff(Box::new(f), Box::new(g)))
    }
    pub fn forall(x: &str, a: TypeExpr, body: Term) -> Term {
        Term::new(TermKind::Forall(x.to_string(), Box::new(a), Box::new(body)))
    }
    pub fn exists(x: &str, a: TypeExpr, body: Term) -> Term {
        Term::new(TermKind::Exists(x.to_string(), Box::new(a), Box::new(body)))
    }
    pub fn quot_elim(s: Term, x: &str, carrier: TypeExpr, body: Term, motive: TypeExpr) -> Term {
        Term::new(TermKind::QuotElim {
            scrutinee: Box::new(s),
            binder: x.to_string(),
            carrier: Box::new(carrier),
            body: Box::new(body),
            motive: Box::new(motive),
        })
    }

    /// Splits `f a1 ... an` into `(f, [a1, ..., an])`.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let TermKind::App(f, a) = &t.kind {
            args.push(a.as_ref());
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn is_sugar(&self) -> bool {
        matches!(
            self.kind,
            TermKind::True
                | TermKind::False
                | TermKind::Not(_)
                | TermKind::And(..)
                | TermKind::Or(..)
                | TermKind::Iff(..)
                | TermKind::Forall(..)
                | TermKind::Exists(..)
        )
    }
}

impl TypeExpr {
    pub fn new(kind: TypeKind) -> TypeExpr {
        TypeExpr { kind, span: Span::default() }
    }
    pub fn with_span(mut self, span: Span) -> TypeExpr {
        self.span = span;
        self
    }
    pub fn bool() -> TypeExpr {
        TypeExpr::new(TypeKind::Bool)
    }
    pub fn base(name: &str, args: Vec<Term>) -> TypeExpr {
        TypeExpr::new(TypeKind::Base(name.to_string(), args))
    }
    pub fn pi(x: &str, a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::new(TypeKind::Pi(x.to_string(), Box::new(a), Box::new(b)))
    }
    pub fn arrow(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::pi(ANON, a, b)
    }
    pub fn refine(a: TypeExpr, p: Term) -> TypeExpr {
        TypeExpr::new(TypeKind::Refine(Box::new(a), Box::new(p)))
    }
    pub fn quotient(a: TypeExpr, r: Term) -> TypeExpr {
        TypeExpr::new(TypeKind::Quotient(Box::new(a), Box::new(r)))
    }

    /// True when the type contains no refinement or quotient anywhere.
    pub fn is_plain(&self) -> bool {
        match &self.kind {
            TypeKind::Bool | TypeKind::Base(..) => true,
            TypeKind::Pi(_, a, b) => a.is_plain() && b.is_plain(),
            TypeKind::Refine(..) | TypeKind::Quotient(..) => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Free variables

impl Term {
    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        fv_term(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn has_free(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }

    /// Constant names occurring in the term (including inside types).
    pub fn consts(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        consts_term(self, &mut out);
        out
    }
}

impl TypeExpr {
    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        fv_type(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn has_free(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }
}

fn fv_term(t: &Term, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
    match &t.kind {
        TermKind::Const(_) | TermKind::True | TermKind::False => {}
        TermKind::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        TermKind::Lam(x, a, b) | TermKind::Forall(x, a, b) | TermKind::Exists(x, a, b) => {
            fv_type(a, bound, out);
            bound.push(x.clone());
            fv_term(b, bound, out);
            bound.pop();
        }
        TermKind::App(f, a)
        | TermKind::Implies(f, a)
        | TermKind::And(f, a)
        | TermKind::Or(f, a)
        | TermKind::Iff(f, a) => {
            fv_term(f, bound, out);
            fv_term(a, bound, out);
        }
        TermKind::Eq(l, r, at) => {
            fv_term(l, bound, out);
            fv_term(r, bound, out);
            if let Some(at) = at {
                fv_type(at, bound, out);
            }
        }
        TermKind::Not(f) => fv_term(f, bound, out),
        TermKind::QuotElim { scrutinee, binder, carrier, body, motive } => {
            fv_term(scrutinee, bound, out);
            fv_type(carrier, bound, out);
            bound.push(binder.clone());
            fv_term(body, bound, out);
            fv_type(motive, bound, out);
            bound.pop();
        }
    }
}

fn fv_type(a: &TypeExpr, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
    match &a.kind {
        TypeKind::Bool => {}
        TypeKind::Base(_, args) => args.iter().for_each(|t| fv_term(t, bound, out)),
        TypeKind::Pi(x, d, c) => {
            fv_type(d, bound, out);
            bound.push(x.clone());
            fv_type(c, bound, out);
            bound.pop();
        }
        TypeKind::Refine(b, p) | TypeKind::Quotient(b, p) => {
            fv_type(b, bound, out);
            fv_term(p, bound, out);
        }
    }
}

fn consts_term(t: &Term, out: &mut BTreeSet<Sym>) {
    match &t.kind {
        TermKind::Const(c) => {
            out.insert(c.clone());
        }
        TermKind::Var(_) | TermKind::True | TermKind::False => {}
        TermKind::Lam(_, a, b) | TermKind::Forall(_, a, b) | TermKind::Exists(_, a, b) => {
            consts_type(a, out);
            consts_term(b, out);
        }
        TermKind::App(f, a)
        | TermKind::Implies(f, a)
        | TermKind::And(f, a)
        | TermKind::Or(f, a)
        | TermKind::Iff(f, a) => {
            consts_term(f, out);
            consts_term(a, out);
        }
        TermKind::Eq(l, r, at) => {
            consts_term(l, out);
            consts_term(r, out);
            if let Some(at) = at {
                consts_type(at, out);
            }
        }
        TermKind::Not(f) => consts_term(f, out),
        TermKind::QuotElim { scrutinee, carrier, body, motive, .. } => {
            consts_term(scrutinee, out);
            consts_type(carrier, out);
            consts_term(body, out);
            consts_type(motive, out);
        }
    }
}

pub fn consts_type(a: &TypeExpr, out: &mut BTreeSet<Sym>) {
    match &a.kind {
        TypeKind::Bool => {}
        TypeKind::Base(n, args) => {
            out.insert(n.clone());
            args.iter().for_each(|t| consts_term(t, out));
        }
        TypeKind::Pi(_, d, c) => {
            consts_type(d, out);
            consts_type(c, out);
        }
        TypeKind::Refine(b, p) | TypeKind::Quotient(b, p) => {
            consts_type(b, out);
            consts_term(p, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Fresh names and substitution

/// A name based on `base` that is not in `avoid`, formed by appending a
/// numeric suffix to `base` with its own trailing digits removed.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Sym>) -> Sym {
    if !avoid.contains(base) && base != ANON {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() || stem == ANON { "x" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded search")
}

/// A parallel substitution `[x1/s1, ..., xn/sn]`.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    pairs: Vec<(Sym, Term)>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn single(x: &str, s: Term) -> Self {
        Subst { pairs: vec![(x.to_string(), s)] }
    }

    pub fn push(&mut self, x: &str, s: Term) {
        self.pairs.retain(|(y, _)| y != x);
        self.pairs.push((x.to_string(), s));
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn get(&self, x: &str) -> Option<&Term> {
        self.pairs.iter().find(|(y, _)| y == x).map(|(_, s)| s)
    }

    fn without(&self, x: &str) -> Subst {
        Subst { pairs: self.pairs.iter().filter(|(y, _)| y != x).cloned().collect() }
    }

    fn range_fv(&self) -> BTreeSet<Sym> {
        self.pairs.iter().flat_map(|(_, s)| s.free_vars()).collect()
    }

    fn domain(&self) -> impl Iterator<Item = &Sym> {
        self.pairs.iter().map(|(x, _)| x)
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        subst_term(t, self)
    }

    pub fn apply_type(&self, a: &TypeExpr) -> TypeExpr {
        if self.is_empty() {
            return a.clone();
        }
        subst_type(a, self)
    }
}

/// Capture-avoiding substitution `t[x/s]`.
pub fn subst(t: &Term, x: &str, s: &Term) -> Term {
    Subst::single(x, s.clone()).apply(t)
}

/// Capture-avoiding substitution into a type, `A[x/s]`.
pub fn subst_type(a: &TypeExpr, sub: &Subst) -> TypeExpr {
    let kind = match &a.kind {
        TypeKind::Bool => TypeKind::Bool,
        TypeKind::Base(n, args) => TypeKind::Base(n.clone(), args.iter().map(|t| subst_term(t, sub)).collect()),
        TypeKind::Pi(x, d, c) => {
            let d2 = subst_type(d, sub);
            let (x2, sub2) = enter_binder(x, sub, &c.free_vars());
            TypeKind::Pi(x2, Box::new(d2), Box::new(subst_type(c, &sub2)))
        }
        TypeKind::Refine(b, p) => TypeKind::Refine(Box::new(subst_type(b, sub)), Box::new(subst_term(p, sub))),
        TypeKind::Quotient(b, r) => TypeKind::Quotient(Box::new(subst_type(b, sub)), Box::new(subst_term(r, sub))),
    };
    TypeExpr { kind, span: a.span.clone() }
}

/// Decides how to pass a substitution under binder `x` whose scope has free
/// variables `scope_fv`. Returns the (possibly renamed) binder and the
/// substitution to use inside the scope.
fn enter_binder(x: &str, sub: &Subst, scope_fv: &BTreeSet<Sym>) -> (Sym, Subst) {
    let inner = sub.without(x);
    let relevant = inner.domain().any(|y| scope_fv.contains(y));
    if !relevant {
        return (x.to_string(), inner);
    }
    let range = inner.range_fv();
    if x != ANON && range.contains(x) {
        let mut avoid = range;
        avoid.extend(scope_fv.iter().cloned());
        avoid.extend(inner.domain().cloned());
        let x2 = fresh_name(x, &avoid);
        let mut inner2 = inner;
        inner2.push(x, Term::var(&x2));
        (x2, inner2)
    } else {
        (x.to_string(), inner)
    }
}

fn subst_term(t: &Term, sub: &Subst) -> Term {
    let kind = match &t.kind {
        TermKind::Var(x) => match sub.get(x) {
            Some(s) => return s.clone(),
            None => TermKind::Var(x.clone()),
        },
        TermKind::Const(_) | TermKind::True | TermKind::False => return t.clone(),
        TermKind::Lam(x, a, b) => {
            let a2 = subst_type(a, sub);
            let (x2, s2) = enter_binder(x, sub, &b.free_vars());
            TermKind::Lam(x2, Box::new(a2), Box::new(subst_term(b, &s2)))
        }
        TermKind::Forall(x, a, b) => {
            let a2 = subst_type(a, sub);
            let (x2, s2) = enter_binder(x, sub, &b.free_vars());
            TermKind::Forall(x2, Box::new(a2), Box::new(subst_term(b, &s2)))
        }
        TermKind::Exists(x, a, b) => {
            let a2 = subst_type(a, sub);
            let (x2, s2) = enter_binder(x, sub, &b.free_vars());
            TermKind::Exists(x2, Box::new(a2), Box::new(subst_term(b, &s2)))
        }
        TermKind::App(f, a) => TermKind::App(Box::new(subst_term(f, sub)), Box::new(subst_term(a, sub))),
        TermKind::Eq(l, r, at) => TermKind::Eq(
            Box::new(subst_term(l, sub)),
            Box::new(subst_term(r, sub)),
            at.as_ref().map(|a| Box::new(subst_type(a, sub))),
        ),
        TermKind::Implies(h, c) => TermKind::Implies(Box::new(subst_term(h, sub)), Box::new(subst_term(c, sub))),
        TermKind::Not(f) => TermKind::Not(Box::new(subst_term(f, sub))),
        TermKind::And(f, g) => TermKind::And(Box::new(subst_term(f, sub)), Box::new(subst_term(g, sub))),
        TermKind::Or(f, g) => TermKind::Or(Box::new(subst_term(f, sub)), Box::new(subst_term(g, sub))),
        TermKind::Iff(f, g) => TermKind::Iff(Box::new(subst_term(f, sub)), Box::new(subst_term(g, sub))),
        TermKind::QuotElim { scrutinee, binder, carrier, body, motive } => {
            let s2 = subst_term(scrutinee, sub);
            let c2 = subst_type(carrier, sub);
            let mut scope = body.free_vars();
            scope.extend(motive.free_vars());
            let (x2, inner) = enter_binder(binder, sub, &scope);
            TermKind::QuotElim {
                scrutinee: Box::new(s2),
                binder: x2,
                carrier: Box::new(c2),
                body: Box::new(subst_term(body, &inner)),
                motive: Box::new(subst_type(motive, &inner)),
            }
        }
    };
    Term { kind, span: t.span.clone() }
}

/// Renames the bound variable of a binder body: `body[x/y]`.
pub fn rename(body: &Term, x: &str, y: &str) -> Term {
    if x == y {
        return body.clone();
    }
    subst(body, x, &Term::var(y))
}

pub fn rename_type(body: &TypeExpr, x: &str, y: &str) -> TypeExpr {
    if x == y {
        return body.clone();
    }
    subst_type(body, &Subst::single(x, Term::var(y)))
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

#[derive(Default)]
struct AlphaEnv<'a> {
    left: Vec<&'a str>,
    right: Vec<&'a str>,
}

impl<'a> AlphaEnv<'a> {
    fn var_eq(&self, x: &str, y: &str) -> bool {
        let i = self.left.iter().rposition(|v| *v == x);
        let j = self.right.iter().rposition(|v| *v == y);
        match (i, j) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        }
    }

    fn push(&mut self, x: &'a str, y: &'a str) {
        self.left.push(x);
        self.right.push(y);
    }

    fn pop(&mut self) {
        self.left.pop();
        self.right.pop();
    }
}

impl Term {
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_term(self, other, &mut AlphaEnv::default())
    }
}

impl TypeExpr {
    pub fn alpha_eq(&self, other: &TypeExpr) -> bool {
        alpha_type(self, other, &mut AlphaEnv::default())
    }
}

fn alpha_term<'a>(a: &'a Term, b: &'a Term, env: &mut AlphaEnv<'a>) -> bool {
    use TermKind::*;
    match (&a.kind, &b.kind) {
        (Const(x), Const(y)) => x == y,
        (Var(x), Var(y)) => env.var_eq(x, y),
        (True, True) | (False, False) => true,
        (Lam(x, ta, ba), Lam(y, tb, bb))
        | (Forall(x, ta, ba), Forall(y, tb, bb))
        | (Exists(x, ta, ba), Exists(y, tb, bb)) => {
            if !alpha_type(ta, tb, env) {
                return false;
            }
            env.push(x, y);
            let r = alpha_term(ba, bb, env);
            env.pop();
            r
        }
        (App(f1, a1), App(f2, a2))
        | (Implies(f1, a1), Implies(f2, a2))
        | (And(f1, a1), And(f2, a2))
        | (Or(f1, a1), Or(f2, a2))
        | (Iff(f1, a1), Iff(f2, a2)) => alpha_term(f1, f2, env) && alpha_term(a1, a2, env),
        (Eq(l1, r1, t1), Eq(l2, r2, t2)) => {
            let types = match (t1, t2) {
                (None, None) => true,
                (Some(t1), Some(t2)) => alpha_type(t1, t2, env),
                _ => false,
            };
            types && alpha_term(l1, l2, env) && alpha_term(r1, r2, env)
        }
        (Not(f), Not(g)) => alpha_term(f, g, env),
        (
            QuotElim { scrutinee: s1, binder: x1, carrier: c1, body: b1, motive: m1 },
            QuotElim { scrutinee: s2, binder: x2, carrier: c2, body: b2, motive: m2 },
        ) => {
            if !(alpha_term(s1, s2, env) && alpha_type(c1, c2, env)) {
                return false;
            }
            env.push(x1, x2);
            let r = alpha_term(b1, b2, env) && alpha_type(m1, m2, env);
            env.pop();
            r
        }
        _ => false,
    }
}

fn alpha_type<'a>(a: &'a TypeExpr, b: &'a TypeExpr, env: &mut AlphaEnv<'a>) -> bool {
    use TypeKind::*;
    match (&a.kind, &b.kind) {
        (Bool, Bool) => true,
        (Base(n1, a1), Base(n2, a2)) => {
            n1 == n2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(s, t)| alpha_term(s, t, env))
        }
        (Pi(x, d1, c1), Pi(y, d2, c2)) => {
            if !alpha_type(d1, d2, env) {
                return false;
            }
            env.push(x, y);
            let r = alpha_type(c1, c2, env);
            env.pop();
            r
        }
        (Refine(b1, p1), Refine(b2, p2)) | (Quotient(b1, p1), Quotient(b2, p2)) => {
            alpha_type(b1, b2, env) && alpha_term(p1, p2, env)
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Beta and eta

impl Term {
    /// Full beta normal form. Terms reaching this function are well typed,
    /// so reduction terminates.
    pub fn beta(&self) -> Term {
        beta_term(self)
    }

    /// Eta-contracts `\x:A. f x` to `f` when `x` is not free in `f`.
    pub fn eta(&self) -> Term {
        map_term(self, &|t| match &t.kind {
            TermKind::Lam(x, _, b) => match &b.kind {
                TermKind::App(f, a) if matches!(&a.kind, TermKind::Var(y) if y == x) && !f.has_free(x) => {
                    Some(f.as_ref().clone())
                }
                _ => None,
            },
            _ => None,
        })
    }
}

impl TypeExpr {
    pub fn beta(&self) -> TypeExpr {
        map_type(self, &|t| Some(beta_term(t)))
    }
}

fn beta_term(t: &Term) -> Term {
    match &t.kind {
        TermKind::App(f, a) => {
            let f2 = beta_term(f);
            let a2 = beta_term(a);
            if let TermKind::Lam(x, _, body) = &f2.kind {
                beta_term(&subst(body, x, &a2))
            } else {
                Term { kind: TermKind::App(Box::new(f2), Box::new(a2)), span: t.span.clone() }
            }
        }
        _ => map_children(t, &|c| beta_term(c), &|a| a.beta()),
    }
}

/// Applies `f` bottom-up to every subterm (including those inside types);
/// `f` returns `Some` to replace a node.
pub fn map_term(t: &Term, f: &dyn Fn(&Term) -> Option<Term>) -> Term {
    let t2 = map_children(t, &|c| map_term(c, f), &|a| map_type(a, &|s| Some(map_term(s, f))));
    match f(&t2) {
        Some(r) => r,
        None => t2,
    }
}

/// Applies `f` to every term directly inside a type, recursing through the
/// type structure.
pub fn map_type(a: &TypeExpr, f: &dyn Fn(&Term) -> Option<Term>) -> TypeExpr {
    let app = |t: &Term| f(t).unwrap_or_else(|| t.clone());
    let kind = match &a.kind {
        TypeKind::Bool => TypeKind::Bool,
        TypeKind::Base(n, args) => TypeKind::Base(n.clone(), args.iter().map(app).collect()),
        TypeKind::Pi(x, d, c) => TypeKind::Pi(x.clone(), Box::new(map_type(d, f)), Box::new(map_type(c, f))),
        TypeKind::Refine(b, p) => TypeKind::Refine(Box::new(map_type(b, f)), Box::new(app(p))),
        TypeKind::Quotient(b, r) => TypeKind::Quotient(Box::new(map_type(b, f)), Box::new(app(r))),
    };
    TypeExpr { kind, span: a.span.clone() }
}

/// Rebuilds `t` with `ft` applied to each immediate subterm and `fa` to each
/// immediate subtype.
pub fn map_children(t: &Term, ft: &dyn Fn(&Term) -> Term, fa: &dyn Fn(&TypeExpr) -> TypeExpr) -> Term {
    let b = |x: &Term| Box::new(ft(x));
    let bt = |x: &TypeExpr| Box::new(fa(x));
    let kind = match &t.kind {
        TermKind::Const(_) | TermKind::Var(_) | TermKind::True | TermKind::False => return t.clone(),
        TermKind::Lam(x, a, body) => TermKind::Lam(x.clone(), bt(a), b(body)),
        TermKind::Forall(x, a, body) => TermKind::Forall(x.clone(), bt(a), b(body)),
        TermKind::Exists(x, a, body) => TermKind::Exists(x.clone(), bt(a), b(body)),
        TermKind::App(f, a) => TermKind::App(b(f), b(a)),
        TermKind::Eq(l, r, at) => TermKind::Eq(b(l), b(r), at.as_ref().map(|a| bt(a))),
        TermKind::Implies(h, c) => TermKind::Implies(b(h), b(c)),
        TermKind::Not(f) => TermKind::Not(b(f)),
        TermKind::And(f, g) => TermKind::And(b(f), b(g)),
        TermKind::Or(f, g) => TermKind::Or(b(f), b(g)),
        TermKind::Iff(f, g) => TermKind::Iff(b(f), b(g)),
        TermKind::QuotElim { scrutinee, binder, carrier, body, motive } => TermKind::QuotElim {
            scrutinee: b(scrutinee),
            binder: binder.clone(),
            carrier: bt(carrier),
            body: b(body),
            motive: bt(motive),
        },
    };
    Term { kind, span: t.span.clone() }
}

// ---------------------------------------------------------------------------
// Definitional sugar

fn bool_id() -> Term {
    Term::lam("x", TypeExpr::bool(), Term::var("x"))
}

/// Core form of `true`: `(\x:bool. x) =[bool -> bool] (\x:bool. x)`.
pub fn core_true() -> Term {
    Term::eq(bool_id(), bool_id(), TypeExpr::arrow(TypeExpr::bool(), TypeExpr::bool()))
}

/// Core form of `forall x:A. F`: `(\x:A. F) =[(x:A) -> bool] (\x:A. true)`.
pub fn core_forall(x: &str, a: TypeExpr, body: Term) -> Term {
    Term::eq(
        Term::lam(x, a.clone(), body),
        Term::lam(x, a.clone(), core_true()),
        TypeExpr::pi(x, a, TypeExpr::bool()),
    )
}

/// Core form of `false`, i.e. the expansion of `forall x:bool. x`.
pub fn core_false() -> Term {
    core_forall("x", TypeExpr::bool(), Term::var("x"))
}

pub fn core_not(f: Term) -> Term {
    Term::implies(f, core_false())
}

pub fn core_and(f: Term, g: Term) -> Term {
    core_not(Term::implies(f, core_not(g)))
}

/// Rewrites every sugar constructor into the core language.
pub fn expand_sugar(t: &Term) -> Term {
    let t = map_children(t, &expand_sugar, &expand_sugar_type);
    let span = t.span.clone();
    let r = match t.kind {
        TermKind::True => core_true(),
        TermKind::False => core_false(),
        TermKind::Not(f) => core_not(*f),
        TermKind::And(f, g) => core_and(*f, *g),
        TermKind::Or(f, g) => Term::implies(core_not(*f), *g),
        TermKind::Iff(f, g) => core_and(Term::implies((*f).clone(), (*g).clone()), Term::implies(*g, *f)),
        TermKind::Forall(x, a, b) => core_forall(&x, *a, *b),
        TermKind::Exists(x, a, b) => core_not(core_forall(&x, *a, core_not(*b))),
        kind => Term { kind, span: span.clone() },
    };
    r.with_span(span)
}

pub fn expand_sugar_type(a: &TypeExpr) -> TypeExpr {
    map_type(a, &|t| Some(expand_sugar(t)))
}

fn is_core_true(t: &Term) -> bool {
    t.alpha_eq(&core_true())
}

fn is_core_false(t: &Term) -> bool {
    t.alpha_eq(&core_false())
}

/// Recognizes the core form of a universal quantifier.
pub fn match_core_forall(t: &Term) -> Option<(&Sym, &TypeExpr, &Term)> {
    let TermKind::Eq(l, r, Some(at)) = &t.kind else { return None };
    let (TermKind::Lam(x, a, f), TermKind::Lam(_, a2, tr)) = (&l.kind, &r.kind) else { return None };
    let TypeKind::Pi(_, d, c) = &at.kind else { return None };
    if a.alpha_eq(a2) && a.alpha_eq(d) && matches!(c.kind, TypeKind::Bool) && is_core_true(tr) {
        Some((x, a, f))
    } else {
        None
    }
}

fn match_core_not(t: &Term) -> Option<&Term> {
    match &t.kind {
        TermKind::Implies(f, fl) if is_core_false(fl) => Some(f),
        _ => None,
    }
}

/// Folds core expansions back into sugar where the exact pattern is found.
pub fn resugar(t: &Term) -> Term {
    let span = t.span.clone();
    resugar_inner(t).with_span(span)
}

fn resugar_inner(t: &Term) -> Term {
    if is_core_true(t) {
        return Term::tru();
    }
    if is_core_false(t) {
        return Term::fals();
    }
    if let Some((x, a, f)) = match_core_forall(t) {
        return Term::forall(x, resugar_type(a), resugar(f));
    }
    if let Some(inner) = match_core_not(t) {
        // and: ~(F => ~G)
        if let TermKind::Implies(f, ng) = &inner.kind {
            if let Some(g) = match_core_not(ng) {
                let (f, g) = (resugar(f), resugar(g));
                if let (TermKind::Implies(a, b), TermKind::Implies(b2, a2)) = (&f.kind, &g.kind) {
                    if a.alpha_eq(a2) && b.alpha_eq(b2) {
                        return Term::iff((**a).clone(), (**b).clone());
                    }
                }
                return Term::and(f, g);
            }
        }
        // exists: ~(forall x:A. ~F)
        if let Some((x, a, body)) = match_core_forall(inner) {
            if let Some(f) = match_core_not(body) {
                return Term::exists(x, resugar_type(a), resugar(f));
            }
        }
        return Term::not(resugar(inner));
    }
    if let TermKind::Implies(h, g) = &t.kind {
        if let Some(f) = match_core_not(h) {
            return Term::or(resugar(f), resugar(g));
        }
    }
    map_children(t, &resugar, &resugar_type)
}

pub fn resugar_type(a: &TypeExpr) -> TypeExpr {
    map_type(a, &|t| Some(resugar(t)))
}

/// True when no sugar constructor occurs in the term or its types.
pub fn is_core(t: &Term) -> bool {
    fn ty(a: &TypeExpr) -> bool {
        match &a.kind {
            TypeKind::Bool => true,
            TypeKind::Base(_, args) => args.iter().all(is_core),
            TypeKind::Pi(_, d, c) => ty(d) && ty(c),
            TypeKind::Refine(b, p) | TypeKind::Quotient(b, p) => ty(b) && is_core(p),
        }
    }
    match &t.kind {
        TermKind::Const(_) | TermKind::Var(_) => true,
        TermKind::Lam(_, a, b) => ty(a) && is_core(b),
        TermKind::App(f, a) | TermKind::Implies(f, a) => is_core(f) && is_core(a),
        TermKind::Eq(l, r, at) => is_core(l) && is_core(r) && at.as_ref().map_or(true, |a| ty(a)),
        TermKind::QuotElim { scrutinee, carrier, body, motive, .. } => {
            is_core(scrutinee) && ty(carrier) && is_core(body) && ty(motive)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> TypeExpr {
        TypeExpr::base("nat", vec![])
    }

    #[test]
    fn subst_base_case() {
        let r = subst(&Term::var("x"), "x", &Term::cnst("zero"));
        assert!(r.alpha_eq(&Term::cnst("zero")));
    }

    #[test]
    fn subst_avoids_capture() {
        let a = TypeExpr::base("A", vec![]);
        let t = Term::lam("y", a.clone(), Term::app(Term::cnst("f"), Term::var("x")));
        let r = subst(&t, "x", &Term::var("y"));
        match &r.kind {
            TermKind::Lam(y2, _, body) => {
                assert_ne!(y2, "y");
                assert!(y2.starts_with('y'));
                assert!(body.alpha_eq(&Term::app(Term::cnst("f"), Term::var("y"))));
            }
            _ => panic!("expected a lambda"),
        }
    }

    #[test]
    fn subst_into_dependent_codomain() {
        let ty = TypeExpr::base("llist", vec![Term::app(Term::cnst("succ"), Term::var("n"))]);
        let r = subst_type(&ty, &Subst::single("n", Term::cnst("zero")));
        let want = TypeExpr::base("llist", vec![Term::app(Term::cnst("succ"), Term::cnst("zero"))]);
        assert!(r.alpha_eq(&want));
    }

    #[test]
    fn parallel_subst_does_not_chain() {
        let t = Term::app(Term::var("a"), Term::var("b"));
        let mut s = Subst::new();
        s.push("a", Term::var("b"));
        s.push("b", Term::var("c"));
        let r = s.apply(&t);
        assert!(r.alpha_eq(&Term::app(Term::var("b"), Term::var("c"))));
    }

    #[test]
    fn alpha_basics() {
        let a = TypeExpr::base("A", vec![]);
        assert!(Term::lam("x", a.clone(), Term::var("x")).alpha_eq(&Term::lam("y", a.clone(), Term::var("y"))));
        let p = Term::cnst("p");
        let s = Term::cnst("s");
        let t = Term::cnst("t");
        let e1 = Term::eq(s.clone(), t.clone(), TypeExpr::refine(a.clone(), p));
        let e2 = Term::eq(s, t, a);
        assert!(!e1.alpha_eq(&e2));
    }

    #[test]
    fn alpha_distinguishes_free_and_bound() {
        let a = TypeExpr::base("A", vec![]);
        let t1 = Term::lam("x", a.clone(), Term::var("y"));
        let t2 = Term::lam("y", a, Term::var("y"));
        assert!(!t1.alpha_eq(&t2));
    }

    #[test]
    fn forall_expansion() {
        let b = TypeExpr::bool();
        let f = Term::forall("x", b.clone(), Term::app(Term::cnst("p"), Term::var("x")));
        let want = Term::eq(
            Term::lam("x", b.clone(), Term::app(Term::cnst("p"), Term::var("x"))),
            Term::lam("x", b.clone(), core_true()),
            TypeExpr::pi("x", b.clone(), b),
        );
        assert!(expand_sugar(&f).alpha_eq(&want));
        assert!(resugar(&expand_sugar(&f)).alpha_eq(&f));
    }

    #[test]
    fn true_expansion_round_trips() {
        let e = expand_sugar(&Term::tru());
        assert!(e.alpha_eq(&core_true()));
        assert!(resugar(&e).alpha_eq(&Term::tru()));
    }

    #[test]
    fn and_expansion() {
        let f = Term::cnst("F");
        let g = Term::cnst("G");
        let want = Term::implies(
            Term::implies(f.clone(), Term::implies(g.clone(), core_false())),
            core_false(),
        );
        let e = expand_sugar(&Term::and(f.clone(), g.clone()));
        assert!(e.alpha_eq(&want));
        assert!(is_core(&e));
        assert!(resugar(&e).alpha_eq(&Term::and(f, g)));
    }

    #[test]
    fn connectives_round_trip() {
        let f = Term::cnst("F");
        let g = Term::cnst("G");
        let n = nat();
        let cases = vec![
            Term::not(f.clone()),
            Term::or(f.clone(), g.clone()),
            Term::iff(f.clone(), g.clone()),
            Term::exists("x", n.clone(), Term::app(Term::cnst("p"), Term::var("x"))),
            Term::fals(),
            Term::not(Term::not(f.clone())),
            Term::or(Term::not(f.clone()), g.clone()),
        ];
        for c in cases {
            assert!(resugar(&expand_sugar(&c)).alpha_eq(&c), "{c:?}");
        }
    }

    #[test]
    fn fresh_name_appends_suffix() {
        let avoid: BTreeSet<Sym> = ["x".to_string(), "x1".to_string()].into_iter().collect();
        assert_eq!(fresh_name("x", &avoid), "x2");
        assert_eq!(fresh_name("y", &avoid), "y");
    }

    #[test]
    fn beta_reduces_under_binders() {
        let n = nat();
        let id = Term::lam("z", n.clone(), Term::var("z"));
        let t = Term::lam("y", n, Term::app(id, Term::var("y")));
        let b = t.beta();
        assert!(b.alpha_eq(&Term::lam("y", nat(), Term::var("y"))));
        assert!(b.eta().alpha_eq(&b));
    }

    #[test]
    fn context_closure() {
        let ctx = Context::new().with_var("n", nat()).with_assumption(Term::cnst("F"));
        let c = ctx.close(Term::cnst("G"));
        let want = Term::forall("n", nat(), Term::implies(Term::cnst("F"), Term::cnst("G")));
        assert!(c.alpha_eq(&want));
    }
}
