//! Simply typed HOL: terms, type inference, THF emission and a reader for
//! the THF fragment we emit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::syntax::{fresh_name, Sym};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HolType {
    Bool,
    Base(Sym),
    Arrow(Box<HolType>, Box<HolType>),
}

impl HolType {
    pub fn arrow(a: HolType, b: HolType) -> HolType {
        HolType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn arrows(args: impl IntoIterator<Item = HolType>, res: HolType) -> HolType {
        let args: Vec<_> = args.into_iter().collect();
        args.into_iter().rev().fold(res, |acc, a| HolType::arrow(a, acc))
    }
}

impl fmt::Display for HolType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HolType::Bool => write!(f, "bool"),
            HolType::Base(a) => write!(f, "{a}"),
            HolType::Arrow(a, b) if matches!(**a, HolType::Arrow(..)) => write!(f, "({a}) -> {b}"),
            HolType::Arrow(a, b) => write!(f, "{a} -> {b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum HolTerm {
    Const(Sym),
    Var(Sym),
    Lam(Sym, HolType, Box<HolTerm>),
    App(Box<HolTerm>, Box<HolTerm>),
    Eq(Box<HolTerm>, Box<HolTerm>, HolType),
    Implies(Box<HolTerm>, Box<HolTerm>),
    True,
    False,
    Not(Box<HolTerm>),
    And(Box<HolTerm>, Box<HolTerm>),
    Or(Box<HolTerm>, Box<HolTerm>),
    Iff(Box<HolTerm>, Box<HolTerm>),
    Forall(Sym, HolType, Box<HolTerm>),
    Exists(Sym, HolType, Box<HolTerm>),
}

use HolTerm as H;

impl HolTerm {
    pub fn cnst(c: &str) -> HolTerm {
        H::Const(c.to_string())
    }
    pub fn var(x: &str) -> HolTerm {
        H::Var(x.to_string())
    }
    pub fn lam(x: &str, a: HolType, b: HolTerm) -> HolTerm {
        H::Lam(x.to_string(), a, Box::new(b))
    }
    pub fn app(f: HolTerm, a: HolTerm) -> HolTerm {
        H::App(Box::new(f), Box::new(a))
    }
    pub fn apps(f: HolTerm, args: impl IntoIterator<Item = HolTerm>) -> HolTerm {
        args.into_iter().fold(f, HolTerm::app)
    }
    pub fn eq(l: HolTerm, r: HolTerm, at: HolType) -> HolTerm {
        H::Eq(Box::new(l), Box::new(r), at)
    }
    pub fn implies(h: HolTerm, c: HolTerm) -> HolTerm {
        H::Implies(Box::new(h), Box::new(c))
    }
    pub fn not(f: HolTerm) -> HolTerm {
        H::Not(Box::new(f))
    }
    pub fn and(f: HolTerm, g: HolTerm) -> HolTerm {
        H::And(Box::new(f), Box::new(g))
    }
    pub fn or(f: HolTerm, g: HolTerm) -> HolTerm {
        H::Or(Box::new(f), Box::new(g))
    }
    pub fn forall(x: &str, a: HolType, b: HolTerm) -> HolTerm {
        H::Forall(x.to_string(), a, Box::new(b))
    }
    pub fn exists(x: &str, a: HolType, b: HolTerm) -> HolTerm {
        H::Exists(x.to_string(), a, Box::new(b))
    }

    /// Right-nested conjunction of a non-empty list.
    pub fn conj(mut fs: Vec<HolTerm>) -> HolTerm {
        let last = fs.pop().expect("empty conjunction");
        fs.into_iter().rev().fold(last, |acc, f| HolTerm::and(f, acc))
    }

    /// Like [`HolTerm::conj`], flattening nested conjunctions and keeping
    /// only the first of alpha-equal conjuncts.
    pub fn conj_distinct(fs: Vec<HolTerm>) -> HolTerm {
        fn flatten(f: HolTerm, out: &mut Vec<HolTerm>) {
            match f {
                HolTerm::And(a, b) => {
                    flatten(*a, out);
                    flatten(*b, out);
                }
                f => {
                    if !out.iter().any(|g| g.alpha_eq(&f)) {
                        out.push(f);
                    }
                }
            }
        }
        let mut out = Vec::new();
        for f in fs {
            flatten(f, &mut out);
        }
        HolTerm::conj(out)
    }

    fn binder(&self) -> Option<(&Sym, &HolType, &HolTerm)> {
        match self {
            H::Lam(x, a, b) | H::Forall(x, a, b) | H::Exists(x, a, b) => Some((x, a, b)),
            _ => None,
        }
    }

    fn rebuild_binder(&self, x: Sym, a: HolType, b: HolTerm) -> HolTerm {
        match self {
            H::Lam(..) => H::Lam(x, a, Box::new(b)),
            H::Forall(..) => H::Forall(x, a, Box::new(b)),
            H::Exists(..) => H::Exists(x, a, Box::new(b)),
            _ => unreachable!(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.fv_into(&mut Vec::new(), &mut out);
        out
    }

    fn fv_into(&self, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
        match self {
            H::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            H::Const(_) | H::True | H::False => {}
            H::Lam(x, _, b) | H::Forall(x, _, b) | H::Exists(x, _, b) => {
                bound.push(x.clone());
                b.fv_into(bound, out);
                bound.pop();
            }
            H::Not(f) => f.fv_into(bound, out),
            H::App(a, b) | H::Eq(a, b, _) | H::Implies(a, b) | H::And(a, b) | H::Or(a, b) | H::Iff(a, b) => {
                a.fv_into(bound, out);
                b.fv_into(bound, out);
            }
        }
    }

    pub fn consts(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let H::Const(c) = t {
                out.insert(c.clone());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut dyn FnMut(&HolTerm)) {
        f(self);
        match self {
            H::Const(_) | H::Var(_) | H::True | H::False => {}
            H::Lam(_, _, b) | H::Forall(_, _, b) | H::Exists(_, _, b) | H::Not(b) => b.visit(f),
            H::App(a, b) | H::Eq(a, b, _) | H::Implies(a, b) | H::And(a, b) | H::Or(a, b) | H::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    fn map_children(&self, f: &mut dyn FnMut(&HolTerm) -> HolTerm) -> HolTerm {
        let bx = |t: HolTerm| Box::new(t);
        match self {
            H::Const(_) | H::Var(_) | H::True | H::False => self.clone(),
            H::Lam(x, a, b) => H::Lam(x.clone(), a.clone(), bx(f(b))),
            H::Forall(x, a, b) => H::Forall(x.clone(), a.clone(), bx(f(b))),
            H::Exists(x, a, b) => H::Exists(x.clone(), a.clone(), bx(f(b))),
            H::Not(b) => H::Not(bx(f(b))),
            H::App(a, b) => H::App(bx(f(a)), bx(f(b))),
            H::Eq(a, b, t) => H::Eq(bx(f(a)), bx(f(b)), t.clone()),
            H::Implies(a, b) => H::Implies(bx(f(a)), bx(f(b))),
            H::And(a, b) => H::And(bx(f(a)), bx(f(b))),
            H::Or(a, b) => H::Or(bx(f(a)), bx(f(b))),
            H::Iff(a, b) => H::Iff(bx(f(a)), bx(f(b))),
        }
    }

    /// Capture-avoiding parallel substitution.
    pub fn subst(&self, s: &BTreeMap<Sym, HolTerm>) -> HolTerm {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            H::Var(x) => s.get(x).cloned().unwrap_or_else(|| self.clone()),
            _ => {
                if let Some((x, a, b)) = self.binder() {
                    let mut inner = s.clone();
                    inner.remove(x);
                    let mut incoming = BTreeSet::new();
                    let body_fv = b.free_vars();
                    for (y, t) in &inner {
                        if body_fv.contains(y) {
                            incoming.extend(t.free_vars());
                        }
                    }
                    if incoming.contains(x) {
                        let mut avoid = incoming;
                        avoid.extend(body_fv);
                        avoid.extend(inner.keys().cloned());
                        let x2 = fresh_name(x, &avoid);
                        inner.insert(x.clone(), H::Var(x2.clone()));
                        return self.rebuild_binder(x2, a.clone(), b.subst(&inner));
                    }
                    return self.rebuild_binder(x.clone(), a.clone(), b.subst(&inner));
                }
                self.map_children(&mut |c| c.subst(s))
            }
        }
    }

    pub fn subst1(&self, x: &str, t: &HolTerm) -> HolTerm {
        self.subst(&BTreeMap::from([(x.to_string(), t.clone())]))
    }

    /// Full beta normalization.
    pub fn beta(&self) -> HolTerm {
        match self {
            H::App(f, a) => {
                let f2 = f.beta();
                let a2 = a.beta();
                match f2 {
                    H::Lam(x, _, b) => b.subst1(&x, &a2).beta(),
                    _ => HolTerm::app(f2, a2),
                }
            }
            _ => self.map_children(&mut |c| c.beta()),
        }
    }

    pub fn alpha_eq(&self, other: &HolTerm) -> bool {
        alpha(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// Replaces connective sugar by its pure-equality encoding.
    pub fn expand_core(&self) -> HolTerm {
        let tru = || {
            let id = HolTerm::lam("x", HolType::Bool, HolTerm::var("x"));
            HolTerm::eq(id.clone(), id, HolType::arrow(HolType::Bool, HolType::Bool))
        };
        let all = |x: &str, a: &HolType, b: HolTerm| {
            HolTerm::eq(
                HolTerm::lam(x, a.clone(), b),
                HolTerm::lam(x, a.clone(), tru()),
                HolType::arrow(a.clone(), HolType::Bool),
            )
        };
        let fls = || all("x", &HolType::Bool, HolTerm::var("x"));
        let neg = |f: HolTerm| HolTerm::implies(f, fls());
        match self {
            H::True => tru(),
            H::False => fls(),
            H::Not(f) => neg(f.expand_core()),
            H::And(f, g) => neg(HolTerm::implies(f.expand_core(), neg(g.expand_core()))),
            H::Or(f, g) => HolTerm::implies(neg(f.expand_core()), g.expand_core()),
            H::Iff(f, g) => {
                let (f, g) = (f.expand_core(), g.expand_core());
                let a = HolTerm::implies(f.clone(), g.clone());
                let b = HolTerm::implies(g, f);
                neg(HolTerm::implies(a, neg(b)))
            }
            H::Forall(x, a, b) => all(x, a, b.expand_core()),
            H::Exists(x, a, b) => neg(all(x, a, neg(b.expand_core()))),
            _ => self.map_children(&mut |c| c.expand_core()),
        }
    }
}

fn alpha(a: &HolTerm, b: &HolTerm, ea: &mut Vec<Sym>, eb: &mut Vec<Sym>) -> bool {
    match (a, b) {
        (H::Var(x), H::Var(y)) => {
            let i = ea.iter().rposition(|v| v == x);
            let j = eb.iter().rposition(|v| v == y);
            match (i, j) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (H::Const(x), H::Const(y)) => x == y,
        (H::True, H::True) | (H::False, H::False) => true,
        (H::Lam(x, s, p), H::Lam(y, t, q)) | (H::Forall(x, s, p), H::Forall(y, t, q)) | (H::Exists(x, s, p), H::Exists(y, t, q)) => {
            if s != t {
                return false;
            }
            ea.push(x.clone());
            eb.push(y.clone());
            let r = alpha(p, q, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (H::Not(p), H::Not(q)) => alpha(p, q, ea, eb),
        (H::Eq(p1, p2, s), H::Eq(q1, q2, t)) => s == t && alpha(p1, q1, ea, eb) && alpha(p2, q2, ea, eb),
        (H::App(p1, p2), H::App(q1, q2))
        | (H::Implies(p1, p2), H::Implies(q1, q2))
        | (H::And(p1, p2), H::And(q1, q2))
        | (H::Or(p1, p2), H::Or(q1, q2))
        | (H::Iff(p1, p2), H::Iff(q1, q2)) => alpha(p1, q1, ea, eb) && alpha(p2, q2, ea, eb),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Theories

#[derive(Clone, Debug)]
pub enum HolDecl {
    Type(Sym),
    Const(Sym, HolType),
    Axiom(Sym, HolTerm),
}

#[derive(Clone, Debug, Default)]
pub struct HolTheory {
    pub decls: Vec<HolDecl>,
    /// Generated axioms mapped to the constant they describe (`typing_c` to
    /// `c`, PER axioms to `rel_a`). Used for relevance filtering.
    pub owners: BTreeMap<Sym, Sym>,
}

impl HolTheory {
    pub fn const_type(&self, c: &str) -> Option<&HolType> {
        self.decls.iter().find_map(|d| match d {
            HolDecl::Const(n, a) if n == c => Some(a),
            _ => None,
        })
    }

    pub fn has_type(&self, a: &str) -> bool {
        self.decls.iter().any(|d| matches!(d, HolDecl::Type(n) if n == a))
    }

    pub fn types(&self) -> impl Iterator<Item = &Sym> {
        self.decls.iter().filter_map(|d| match d {
            HolDecl::Type(n) => Some(n),
            _ => None,
        })
    }

    pub fn consts(&self) -> impl Iterator<Item = (&Sym, &HolType)> {
        self.decls.iter().filter_map(|d| match d {
            HolDecl::Const(n, a) => Some((n, a)),
            _ => None,
        })
    }

    pub fn axioms(&self) -> impl Iterator<Item = (&Sym, &HolTerm)> {
        self.decls.iter().filter_map(|d| match d {
            HolDecl::Axiom(n, f) => Some((n, f)),
            _ => None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct HolConjecture {
    pub name: Sym,
    pub formula: HolTerm,
    pub source: String,
}

// ---------------------------------------------------------------------------
// Type inference

#[derive(Clone, Debug, thiserror::Error)]
#[error("HOL type error: {message} in `{term}`")]
pub struct HolTypeError {
    pub message: String,
    pub term: String,
}

fn type_err<T>(msg: impl Into<String>, t: &HolTerm) -> Result<T, HolTypeError> {
    let mut s = format!("{t:?}");
    if s.len() > 200 {
        s.truncate(200);
        s.push_str("...");
    }
    Err(HolTypeError { message: msg.into(), term: s })
}

fn check_type_wf(th: &HolTheory, a: &HolType, t: &HolTerm) -> Result<(), HolTypeError> {
    match a {
        HolType::Bool => Ok(()),
        HolType::Base(n) if th.has_type(n) => Ok(()),
        HolType::Base(n) => type_err(format!("unknown type `{n}`"), t),
        HolType::Arrow(x, y) => {
            check_type_wf(th, x, t)?;
            check_type_wf(th, y, t)
        }
    }
}

/// Standard simply typed inference.
pub fn hol_infer(th: &HolTheory, ctx: &[(Sym, HolType)], t: &HolTerm) -> Result<HolType, HolTypeError> {
    let mut env: Vec<(Sym, HolType)> = ctx.to_vec();
    infer_in(th, &mut env, t)
}

fn infer_in(th: &HolTheory, env: &mut Vec<(Sym, HolType)>, t: &HolTerm) -> Result<HolType, HolTypeError> {
    let expect_bool = |a: HolType, t: &HolTerm| {
        if a == HolType::Bool {
            Ok(())
        } else {
            type_err(format!("expected bool, found {a}"), t)
        }
    };
    match t {
        H::Const(c) => match th.const_type(c) {
            Some(a) => Ok(a.clone()),
            None => type_err(format!("unknown constant `{c}`"), t),
        },
        H::Var(x) => match env.iter().rev().find(|(y, _)| y == x) {
            Some((_, a)) => Ok(a.clone()),
            None => type_err(format!("unbound variable `{x}`"), t),
        },
        H::Lam(x, a, b) => {
            check_type_wf(th, a, t)?;
            env.push((x.clone(), a.clone()));
            let r = infer_in(th, env, b);
            env.pop();
            Ok(HolType::arrow(a.clone(), r?))
        }
        H::Forall(x, a, b) | H::Exists(x, a, b) => {
            check_type_wf(th, a, t)?;
            env.push((x.clone(), a.clone()));
            let r = infer_in(th, env, b);
            env.pop();
            expect_bool(r?, t)?;
            Ok(HolType::Bool)
        }
        H::App(f, a) => {
            let ft = infer_in(th, env, f)?;
            let at = infer_in(th, env, a)?;
            match ft {
                HolType::Arrow(d, c) if *d == at => Ok(*c),
                HolType::Arrow(d, _) => type_err(format!("argument has type {at}, expected {d}"), t),
                other => type_err(format!("applying a term of type {other}"), t),
            }
        }
        H::Eq(l, r, at) => {
            check_type_wf(th, at, t)?;
            let lt = infer_in(th, env, l)?;
            let rt = infer_in(th, env, r)?;
            if &lt != at || &rt != at {
                return type_err(format!("equality at {at} between {lt} and {rt}"), t);
            }
            Ok(HolType::Bool)
        }
        H::True | H::False => Ok(HolType::Bool),
        H::Not(f) => {
            expect_bool(infer_in(th, env, f)?, t)?;
            Ok(HolType::Bool)
        }
        H::Implies(a, b) | H::And(a, b) | H::Or(a, b) | H::Iff(a, b) => {
            expect_bool(infer_in(th, env, a)?, t)?;
            expect_bool(infer_in(th, env, b)?, t)?;
            Ok(HolType::Bool)
        }
    }
}

/// Checks that every declaration is well formed and every axiom is boolean.
pub fn check_hol_theory(th: &HolTheory) -> Result<(), HolTypeError> {
    let mut prefix = HolTheory::default();
    let mut seen = BTreeSet::new();
    for d in &th.decls {
        match d {
            HolDecl::Type(n) | HolDecl::Const(n, _) => {
                if !seen.insert(n.clone()) {
                    return type_err(format!("duplicate symbol `{n}`"), &HolTerm::cnst(n));
                }
                if let HolDecl::Const(_, a) = d {
                    check_type_wf(&prefix, a, &HolTerm::cnst(n))?;
                }
            }
            HolDecl::Axiom(_, f) => {
                let a = hol_infer(&prefix, &[], f)?;
                if a != HolType::Bool {
                    return type_err("axiom is not boolean", f);
                }
            }
        }
        prefix.decls.push(d.clone());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// THF emission

/// Lowercase identifier with `_` separators; camelCase is split.
pub fn tptp_lower(name: &str) -> String {
    let mut out = String::new();
    let mut prev_lower = false;
    for ch in name.chars() {
        if ch.is_ascii_uppercase() {
            if prev_lower {
                out.push('_');
            }
            out.push(ch.to_ascii_lowercase());
            prev_lower = false;
        } else if ch.is_ascii_alphanumeric() {
            out.push(ch);
            prev_lower = ch.is_ascii_lowercase() || ch.is_ascii_digit();
        } else {
            if !out.ends_with('_') {
                out.push('_');
            }
            prev_lower = false;
        }
    }
    let out = out.trim_matches('_').to_string();
    if out.is_empty() || !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        format!("c_{out}")
    } else {
        out
    }
}

fn tptp_upper(name: &str) -> String {
    let mut out: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect::<String>().trim_matches('_').to_string();
    if out.is_empty() {
        out = "X".into();
    }
    let mut cs = out.chars();
    let first = cs.next().unwrap();
    if first.is_ascii_alphabetic() {
        format!("{}{}", first.to_ascii_uppercase(), cs.as_str())
    } else {
        format!("X{out}")
    }
}

/// Maps theory symbols to distinct TPTP identifiers.
struct Names {
    map: HashMap<Sym, String>,
    used: BTreeSet<String>,
}

impl Names {
    fn new() -> Self {
        // `$`-free reserved words that would confuse readers.
        let used = ["thf", "type", "axiom", "conjecture"].iter().map(|s| s.to_string()).collect();
        Names { map: HashMap::new(), used }
    }

    fn get(&mut self, sym: &str) -> String {
        if let Some(n) = self.map.get(sym) {
            return n.clone();
        }
        let base = tptp_lower(sym);
        let mut n = base.clone();
        let mut i = 1;
        while self.used.contains(&n) {
            n = format!("{base}_{i}");
            i += 1;
        }
        self.used.insert(n.clone());
        self.map.insert(sym.to_string(), n.clone());
        n
    }
}

struct Emitter {
    names: Names,
    unit_names: BTreeSet<String>,
}

impl Emitter {
    fn ty(&mut self, a: &HolType) -> String {
        match a {
            HolType::Bool => "$o".into(),
            HolType::Base(n) => self.names.get(n),
            HolType::Arrow(x, y) => {
                let l = match **x {
                    HolType::Arrow(..) => format!("({})", self.ty(x)),
                    _ => self.ty(x),
                };
                format!("{l} > {}", self.ty(y))
            }
        }
    }

    fn binder_ty(&mut self, a: &HolType) -> String {
        match a {
            HolType::Arrow(..) => format!("({})", self.ty(a)),
            _ => self.ty(a),
        }
    }

    fn term(&mut self, t: &HolTerm, env: &mut Vec<(Sym, String)>) -> String {
        match t {
            H::Const(c) => self.names.get(c),
            H::Var(x) => match env.iter().rev().find(|(s, _)| s == x) {
                Some((_, v)) => v.clone(),
                None => tptp_upper(x),
            },
            H::True => "$true".into(),
            H::False => "$false".into(),
            H::Not(f) => format!("~ ({})", self.term(f, env)),
            H::App(..) => {
                let mut args = Vec::new();
                let mut head = t;
                while let H::App(f, a) = head {
                    args.push(&**a);
                    head = f;
                }
                let mut parts = vec![self.term(head, env)];
                for a in args.into_iter().rev() {
                    parts.push(self.term(a, env));
                }
                format!("({})", parts.join(" @ "))
            }
            H::Eq(l, r, _) => format!("({} = {})", self.term(l, env), self.term(r, env)),
            H::Implies(a, b) => format!("({} => {})", self.term(a, env), self.term(b, env)),
            H::Iff(a, b) => format!("({} <=> {})", self.term(a, env), self.term(b, env)),
            H::And(a, b) => format!("({} & {})", self.term(a, env), self.term(b, env)),
            H::Or(a, b) => format!("({} | {})", self.term(a, env), self.term(b, env)),
            H::Lam(x, a, b) | H::Forall(x, a, b) | H::Exists(x, a, b) => {
                let q = match t {
                    H::Lam(..) => "^",
                    H::Forall(..) => "!",
                    _ => "?",
                };
                let base = tptp_upper(x);
                let mut v = base.clone();
                let mut i = 1;
                let free: BTreeSet<String> =
                    b.free_vars().iter().filter(|y| *y != x).filter_map(|y| env.iter().rev().find(|(s, _)| s == y)).map(|(_, o)| o.clone()).collect();
                while free.contains(&v) {
                    v = format!("{base}{i}");
                    i += 1;
                }
                let ty = self.binder_ty(a);
                env.push((x.clone(), v.clone()));
                let body = self.term(b, env);
                env.pop();
                format!("({q} [{v}: {ty}]: {body})")
            }
        }
    }

    fn unit_name(&mut self, base: &str) -> String {
        let b = tptp_lower(base);
        let mut n = b.clone();
        let mut i = 1;
        while !self.unit_names.insert(n.clone()) {
            n = format!("{b}_{i}");
            i += 1;
        }
        n
    }
}

/// Renders a theory plus conjecture as a THF0 problem.
pub fn emit_tptp(th: &HolTheory, conj: &HolConjecture) -> String {
    let mut e = Emitter { names: Names::new(), unit_names: BTreeSet::new() };
    let mut out = String::new();
    out.push_str(&format!("% problem {} (from {})\n", conj.name, conj.source));
    for d in &th.decls {
        match d {
            HolDecl::Type(n) => {
                let id = e.names.get(n);
                let u = e.unit_name(&format!("{n}_type"));
                out.push_str(&format!("thf({u}, type, {id}: $tType).\n"));
            }
            HolDecl::Const(n, a) => {
                let id = e.names.get(n);
                let ty = e.ty(a);
                let u = e.unit_name(&format!("{n}_decl"));
                out.push_str(&format!("thf({u}, type, {id}: {ty}).\n"));
            }
            HolDecl::Axiom(n, f) => {
                let body = e.term(f, &mut Vec::new());
                let u = e.unit_name(n);
                out.push_str(&format!("thf({u}, axiom, {body}).\n"));
            }
        }
    }
    let body = e.term(&conj.formula, &mut Vec::new());
    let u = e.unit_name(&conj.name);
    out.push_str(&format!("thf({u}, conjecture, {body}).\n"));
    out
}

// ---------------------------------------------------------------------------
// THF reader

#[derive(Clone, Debug, thiserror::Error)]
#[error("THF parse error at byte {pos}: {message}")]
pub struct ThfError {
    pub pos: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Dollar(String),
    Sym(&'static str),
}

fn lex_thf(src: &str) -> Result<Vec<(usize, Tok)>, ThfError> {
    const SYMS: [&str; 17] = ["<=>", "=>", "!=", "(", ")", "[", "]", ",", ":", ".", "@", "&", "|", "~", "=", ">", "!"];
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c == '%' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
            let start = i;
            i += 1;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let w = &src[start..i];
            out.push((start, if let Some(d) = w.strip_prefix('$') { Tok::Dollar(d.into()) } else { Tok::Word(w.into()) }));
        } else if c == '?' || c == '^' {
            out.push((i, Tok::Sym(if c == '?' { "?" } else { "^" })));
            i += 1;
        } else if let Some(s) = SYMS.iter().find(|s| src[i..].starts_with(**s)) {
            out.push((i, Tok::Sym(s)));
            i += s.len();
        } else {
            return Err(ThfError { pos: i, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct ThfParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

/// A parsed problem file. Equality types are recovered by inference.
#[derive(Clone, Debug, Default)]
pub struct ThfProblem {
    pub theory: HolTheory,
    pub conjectures: Vec<(Sym, HolTerm)>,
}

impl ThfParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }
    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(usize::MAX)
    }
    fn fail<T>(&self, msg: &str) -> Result<T, ThfError> {
        Err(ThfError { pos: self.here(), message: msg.into() })
    }
    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn expect(&mut self, s: &str) -> Result<(), ThfError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.fail(&format!("expected `{s}`"))
        }
    }
    fn word(&mut self) -> Result<String, ThfError> {
        match self.peek().cloned() {
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => self.fail("expected identifier"),
        }
    }

    fn ty(&mut self) -> Result<HolType, ThfError> {
        let a = self.aty()?;
        if self.eat(">") {
            Ok(HolType::arrow(a, self.ty()?))
        } else {
            Ok(a)
        }
    }

    fn aty(&mut self) -> Result<HolType, ThfError> {
        if self.eat("(") {
            let a = self.ty()?;
            self.expect(")")?;
            return Ok(a);
        }
        match self.peek().cloned() {
            Some(Tok::Dollar(d)) if d == "o" => {
                self.pos += 1;
                Ok(HolType::Bool)
            }
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(HolType::Base(w))
            }
            _ => self.fail("expected type"),
        }
    }

    fn formula(&mut self, env: &mut Vec<String>) -> Result<HolTerm, ThfError> {
        let first = self.unary(env)?;
        let op = match self.peek() {
            Some(Tok::Sym(s)) if ["=>", "<=>", "&", "|", "=", "@", "!="].contains(s) => *s,
            _ => return Ok(first),
        };
        let mut items = vec![first];
        while self.eat(op) {
            items.push(self.unary(env)?);
        }
        if matches!(self.peek(), Some(Tok::Sym(s)) if ["=>", "<=>", "&", "|", "=", "@", "!="].contains(s)) {
            return self.fail("mixed binary connectives need parentheses");
        }
        let eqt = || HolType::Base("?".into());
        Ok(match op {
            "@" => {
                let mut it = items.into_iter();
                let h = it.next().unwrap();
                it.fold(h, HolTerm::app)
            }
            "&" | "|" => {
                let last = items.pop().unwrap();
                items.into_iter().rev().fold(last, |acc, f| if op == "&" { HolTerm::and(f, acc) } else { HolTerm::or(f, acc) })
            }
            "=>" => {
                let last = items.pop().unwrap();
                items.into_iter().rev().fold(last, |acc, f| HolTerm::implies(f, acc))
            }
            _ if items.len() != 2 => return self.fail("non-associative connective chained"),
            "<=>" => {
                let r = items.pop().unwrap();
                H::Iff(Box::new(items.pop().unwrap()), Box::new(r))
            }
            "=" => {
                let r = items.pop().unwrap();
                HolTerm::eq(items.pop().unwrap(), r, eqt())
            }
            _ => {
                let r = items.pop().unwrap();
                HolTerm::not(HolTerm::eq(items.pop().unwrap(), r, eqt()))
            }
        })
    }

    fn unary(&mut self, env: &mut Vec<String>) -> Result<HolTerm, ThfError> {
        if self.eat("(") {
            let f = self.formula(env)?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.eat("~") {
            return Ok(HolTerm::not(self.unary(env)?));
        }
        for q in ["!", "?", "^"] {
            if self.eat(q) {
                self.expect("[")?;
                let mut vars = Vec::new();
                loop {
                    let v = self.word()?;
                    self.expect(":")?;
                    vars.push((v, self.ty()?));
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect("]")?;
                self.expect(":")?;
                let n = vars.len();
                env.extend(vars.iter().map(|(v, _)| v.clone()));
                let body = self.formula(env);
                env.truncate(env.len() - n);
                let mut body = body?;
                for (v, a) in vars.into_iter().rev() {
                    body = match q {
                        "!" => HolTerm::forall(&v, a, body),
                        "?" => HolTerm::exists(&v, a, body),
                        _ => HolTerm::lam(&v, a, body),
                    };
                }
                return Ok(body);
            }
        }
        match self.peek().cloned() {
            Some(Tok::Dollar(d)) if d == "true" => {
                self.pos += 1;
                Ok(H::True)
            }
            Some(Tok::Dollar(d)) if d == "false" => {
                self.pos += 1;
                Ok(H::False)
            }
            Some(Tok::Word(w)) => {
                self.pos += 1;
                if w.starts_with(|c: char| c.is_ascii_uppercase()) {
                    if !env.contains(&w) {
                        return self.fail(&format!("free variable `{w}`"));
                    }
                    Ok(HolTerm::var(&w))
                } else {
                    Ok(HolTerm::cnst(&w))
                }
            }
            _ => self.fail("expected formula"),
        }
    }

    fn unit(&mut self, prob: &mut ThfProblem) -> Result<(), ThfError> {
        if self.word()? != "thf" {
            return self.fail("expected `thf`");
        }
        self.expect("(")?;
        let name = self.word()?;
        self.expect(",")?;
        let role = self.word()?;
        self.expect(",")?;
        match role.as_str() {
            "type" => {
                let sym = self.word()?;
                self.expect(":")?;
                if matches!(self.peek(), Some(Tok::Dollar(d)) if d == "tType") {
                    self.pos += 1;
                    prob.theory.decls.push(HolDecl::Type(sym));
                } else {
                    let a = self.ty()?;
                    prob.theory.decls.push(HolDecl::Const(sym, a));
                }
            }
            "axiom" | "conjecture" => {
                let f = self.formula(&mut Vec::new())?;
                let f = fill_eq_types(&prob.theory, &f).map_err(|e| ThfError { pos: self.here(), message: e.to_string() })?;
                if role == "axiom" {
                    prob.theory.decls.push(HolDecl::Axiom(name, f));
                } else {
                    prob.conjectures.push((name, f));
                }
            }
            _ => return self.fail(&format!("unsupported role `{role}`")),
        }
        self.expect(")")?;
        self.expect(".")
    }
}

/// Reads a THF problem in the fragment produced by [`emit_tptp`].
pub fn read_thf(src: &str) -> Result<ThfProblem, ThfError> {
    let mut p = ThfParser { toks: lex_thf(src)?, pos: 0 };
    let mut prob = ThfProblem::default();
    while p.peek().is_some() {
        p.unit(&mut prob)?;
    }
    Ok(prob)
}

/// Parses a single closed formula against a theory's signature.
pub fn read_thf_formula(src: &str, th: &HolTheory) -> Result<HolTerm, ThfError> {
    let mut p = ThfParser { toks: lex_thf(src)?, pos: 0 };
    let f = p.formula(&mut Vec::new())?;
    if p.peek().is_some() {
        return p.fail("trailing input");
    }
    fill_eq_types(th, &f).map_err(|e| ThfError { pos: 0, message: e.to_string() })
}

/// Recomputes the type annotation of every equality by inference.
pub fn fill_eq_types(th: &HolTheory, t: &HolTerm) -> Result<HolTerm, HolTypeError> {
    fn go(th: &HolTheory, env: &mut Vec<(Sym, HolType)>, t: &HolTerm) -> Result<HolTerm, HolTypeError> {
        Ok(match t {
            H::Eq(l, r, _) => {
                let l2 = go(th, env, l)?;
                let r2 = go(th, env, r)?;
                let at = infer_in(th, env, &l2)?;
                HolTerm::eq(l2, r2, at)
            }
            H::Lam(x, a, b) | H::Forall(x, a, b) | H::Exists(x, a, b) => {
                env.push((x.clone(), a.clone()));
                let b2 = go(th, env, b);
                env.pop();
                t.rebuild_binder(x.clone(), a.clone(), b2?)
            }
            _ => {
                let mut err = None;
                let r = t.map_children(&mut |c| match go(th, env, c) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        c.clone()
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                r
            }
        })
    }
    go(th, &mut Vec::new(), t)
}

/// Renames theory symbols the way [`emit_tptp`] does, so that read-back
/// formulas can be compared with the originals.
pub fn tptp_rename(th: &HolTheory, t: &HolTerm) -> HolTerm {
    let mut names = Names::new();
    let mut types = BTreeMap::new();
    for d in &th.decls {
        match d {
            HolDecl::Type(n) => {
                types.insert(n.clone(), names.get(n));
            }
            HolDecl::Const(n, _) => {
                names.get(n);
            }
            HolDecl::Axiom(..) => {}
        }
    }
    fn ty(a: &HolType, m: &BTreeMap<Sym, String>) -> HolType {
        match a {
            HolType::Base(n) => HolType::Base(m.get(n).cloned().unwrap_or_else(|| n.clone())),
            HolType::Arrow(x, y) => HolType::arrow(ty(x, m), ty(y, m)),
            HolType::Bool => HolType::Bool,
        }
    }
    fn go(t: &HolTerm, names: &mut Names, m: &BTreeMap<Sym, String>) -> HolTerm {
        match t {
            H::Const(c) => H::Const(names.get(c)),
            H::Eq(l, r, a) => HolTerm::eq(go(l, names, m), go(r, names, m), ty(a, m)),
            H::Lam(x, a, b) | H::Forall(x, a, b) | H::Exists(x, a, b) => t.rebuild_binder(x.clone(), ty(a, m), go(b, names, m)),
            _ => t.map_children(&mut |c| go(c, names, m)),
        }
    }
    go(t, &mut names, &types)
}
