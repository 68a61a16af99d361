//! Bidirectional DHOL checker. Instead of deciding type equality it emits
//! validity obligations `Γ ⊢ F`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::subtype::{self, NormalType};
use crate::syntax::*;

#[derive(Clone, Debug)]
pub struct Obligation {
    pub id: String,
    pub rule: String,
    pub context: Context,
    pub goal: Term,
    pub span: Span,
    /// Declaration or conjecture that produced the obligation.
    pub origin: String,
}

impl Obligation {
    /// The obligation as a single closed formula.
    pub fn closed(&self) -> Term {
        self.context.close(self.goal.clone())
    }

    pub fn same_goal(&self, other: &Obligation) -> bool {
        self.closed().alpha_eq(&other.closed())
    }
}

#[derive(Clone, Debug, thiserror::Error)]
#[error("{span}: {reason}")]
pub struct KernelError {
    pub reason: String,
    pub span: Span,
}

pub type KResult<T> = Result<T, KernelError>;

#[derive(Clone, Debug)]
pub enum Status {
    Accepted,
    Rejected { reason: String, span: Span },
}

/// An elaborated declaration: sugar and definitions expanded, equality
/// annotations filled in.
#[derive(Clone, Debug)]
pub enum SigDecl {
    Type { name: Sym, telescope: Telescope },
    Const { name: Sym, ty: TypeExpr },
    Axiom { name: Sym, formula: Term },
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub decls: Vec<SigDecl>,
    types: HashMap<Sym, usize>,
    consts: HashMap<Sym, usize>,
}

impl Signature {
    pub fn telescope(&self, a: &str) -> Option<&Telescope> {
        self.types.get(a).map(|&i| match &self.decls[i] {
            SigDecl::Type { telescope, .. } => telescope,
            _ => unreachable!(),
        })
    }

    pub fn const_type(&self, c: &str) -> Option<&TypeExpr> {
        self.consts.get(c).map(|&i| match &self.decls[i] {
            SigDecl::Const { ty, .. } => ty,
            _ => unreachable!(),
        })
    }

    pub fn axioms(&self) -> impl Iterator<Item = (&Sym, &Term)> {
        self.decls.iter().filter_map(|d| match d {
            SigDecl::Axiom { name, formula } => Some((name, formula)),
            _ => None,
        })
    }

    pub fn push(&mut self, d: SigDecl) {
        let i = self.decls.len();
        match &d {
            SigDecl::Type { name, .. } => {
                self.types.insert(name.clone(), i);
            }
            SigDecl::Const { name, .. } => {
                self.consts.insert(name.clone(), i);
            }
            SigDecl::Axiom { .. } => {}
        }
        self.decls.push(d);
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KernelOptions {
    /// Use the quotiented-codomain axiom as a normalization law.
    pub quot_cod_axiom: bool,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { quot_cod_axiom: true }
    }
}

#[derive(Clone, Debug)]
pub struct CheckedConjecture {
    pub name: Sym,
    pub formula: Term,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub obligations: Vec<Obligation>,
    pub status: Status,
    pub signature: Signature,
    pub conjectures: Vec<CheckedConjecture>,
    pub warnings: Vec<String>,
}

impl CheckedConjecture {
    /// The conjecture itself as a goal with empty context.
    pub fn as_obligation(&self) -> Obligation {
        Obligation {
            id: self.name.clone(),
            rule: "conjecture".into(),
            context: Context::new(),
            goal: self.formula.clone(),
            span: self.span.clone(),
            origin: self.name.clone(),
        }
    }
}

impl CheckResult {
    pub fn accepted(&self) -> bool {
        matches!(self.status, Status::Accepted)
    }
}

pub struct Checker {
    pub sig: Signature,
    pub opts: KernelOptions,
    obligations: Vec<Obligation>,
    type_defs: BTreeMap<Sym, (Telescope, TypeExpr)>,
    term_defs: BTreeMap<Sym, Term>,
    names: BTreeSet<Sym>,
    origin: String,
    counter: usize,
    span: Span,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new(KernelOptions::default())
    }
}

fn err<T>(reason: impl Into<String>, span: &Span) -> KResult<T> {
    Err(KernelError { reason: reason.into(), span: span.clone() })
}

impl Checker {
    pub fn new(opts: KernelOptions) -> Self {
        Checker {
            sig: Signature::default(),
            opts,
            obligations: Vec::new(),
            type_defs: BTreeMap::new(),
            term_defs: BTreeMap::new(),
            names: BTreeSet::new(),
            origin: String::new(),
            counter: 0,
            span: Span::default(),
        }
    }

    pub fn with_signature(sig: Signature, opts: KernelOptions) -> Self {
        let mut c = Checker::new(opts);
        for d in &sig.decls {
            match d {
                SigDecl::Type { name, .. } | SigDecl::Const { name, .. } | SigDecl::Axiom { name, .. } => {
                    c.names.insert(name.clone());
                }
            }
        }
        c.sig = sig;
        c
    }

    pub fn obligations(&self) -> &[Obligation] {
        &self.obligations
    }

    pub fn take_obligations(&mut self) -> Vec<Obligation> {
        std::mem::take(&mut self.obligations)
    }

    /// Sets the label used for obligation ids and provenance.
    pub fn begin(&mut self, origin: &str, span: &Span) {
        self.origin = origin.to_string();
        self.counter = 0;
        self.span = span.clone();
    }

    // -- preparation --------------------------------------------------------

    /// Expands sugar and definitions.
    pub fn prepare_term(&self, t: &Term) -> KResult<Term> {
        self.expand_defs(&expand_sugar(t))
    }

    pub fn prepare_type(&self, a: &TypeExpr) -> KResult<TypeExpr> {
        self.expand_defs_type(&expand_sugar_type(a))
    }

    fn expand_defs(&self, t: &Term) -> KResult<Term> {
        let t2 = match &t.kind {
            TermKind::Const(c) => {
                if let Some(rhs) = self.term_defs.get(c) {
                    return Ok(rhs.clone());
                }
                return Ok(t.clone());
            }
            TermKind::Var(_) => return Ok(t.clone()),
            _ => t.clone(),
        };
        // Recurse through children with error propagation.
        let mut error: Option<KernelError> = None;
        let cell = std::cell::RefCell::new(&mut error);
        let r = map_children(
            &t2,
            &|c| match self.expand_defs(c) {
                Ok(v) => v,
                Err(e) => {
                    **cell.borrow_mut() = Some(e);
                    c.clone()
                }
            },
            &|a| match self.expand_defs_type(a) {
                Ok(v) => v,
                Err(e) => {
                    **cell.borrow_mut() = Some(e);
                    a.clone()
                }
            },
        );
        match error {
            Some(e) => Err(e),
            None => Ok(r),
        }
    }

    fn expand_defs_type(&self, a: &TypeExpr) -> KResult<TypeExpr> {
        let kind = match &a.kind {
            TypeKind::Bool => TypeKind::Bool,
            TypeKind::Base(n, args) => {
                let args = args.iter().map(|t| self.expand_defs(t)).collect::<KResult<Vec<_>>>()?;
                if let Some((tel, rhs)) = self.type_defs.get(n) {
                    if tel.len() != args.len() {
                        return err(
                            format!("definition `{n}` expects {} argument(s), got {}", tel.len(), args.len()),
                            &a.span,
                        );
                    }
                    let mut s = Subst::new();
                    for ((x, _), t) in tel.iter().zip(args) {
                        s.push(x, t);
                    }
                    return Ok(s.apply_type(rhs));
                }
                TypeKind::Base(n.clone(), args)
            }
            TypeKind::Pi(x, d, c) => {
                TypeKind::Pi(x.clone(), Box::new(self.expand_defs_type(d)?), Box::new(self.expand_defs_type(c)?))
            }
            TypeKind::Refine(b, p) => {
                TypeKind::Refine(Box::new(self.expand_defs_type(b)?), Box::new(self.expand_defs(p)?))
            }
            TypeKind::Quotient(b, r) => {
                TypeKind::Quotient(Box::new(self.expand_defs_type(b)?), Box::new(self.expand_defs(r)?))
            }
        };
        Ok(TypeExpr { kind, span: a.span.clone() })
    }

    // -- obligations --------------------------------------------------------

    /// Records `ctx ⊢ goal`. The goal and context are beta-normalized, the
    /// context is pruned to the entries the goal depends on, and goals
    /// already recorded (up to alpha-equivalence of their closures) are
    /// dropped.
    pub fn emit(&mut self, ctx: &Context, goal: Term, rule: &str) {
        let goal = goal.beta();
        let ctx = prune(&beta_context(ctx), &goal);
        let span = if goal.span.is_dummy() { self.span.clone() } else { goal.span.clone() };
        let candidate = Obligation {
            id: String::new(),
            rule: rule.to_string(),
            context: ctx,
            goal,
            span,
            origin: self.origin.clone(),
        };
        if self.obligations.iter().any(|o| o.same_goal(&candidate)) {
            return;
        }
        self.counter += 1;
        let id = if self.origin.is_empty() { format!("o{}", self.counter) } else { format!("{}.{}", self.origin, self.counter) };
        self.obligations.push(Obligation { id, ..candidate });
    }

    fn fresh_var(&self, ctx: &Context, base: &str, extra: &[&BTreeSet<Sym>]) -> Sym {
        let mut avoid = ctx.names();
        for e in extra {
            avoid.extend(e.iter().cloned());
        }
        fresh_name(base, &avoid)
    }

    // -- theories -----------------------------------------------------------

    fn declare(&mut self, name: &str, span: &Span) -> KResult<()> {
        if !self.names.insert(name.to_string()) {
            return err(format!("duplicate declaration of `{name}`"), span);
        }
        Ok(())
    }

    fn check_telescope(&mut self, tel: &Telescope) -> KResult<(Context, Telescope)> {
        let mut ctx = Context::new();
        let mut out = Vec::new();
        for (x, a) in tel {
            if ctx.has_name(x) {
                return err(format!("duplicate telescope variable `{x}`"), &a.span);
            }
            let a = self.prepare_type(a)?;
            self.check_type(&ctx, &a)?;
            ctx = ctx.with_var(x, a.clone());
            out.push((x.clone(), a));
        }
        Ok((ctx, out))
    }

    pub fn check_decl(&mut self, d: &Decl) -> KResult<()> {
        self.begin(d.name(), &d.span);
        self.declare(d.name(), &d.span)?;
        match &d.kind {
            DeclKind::TypeSym { name, telescope } => {
                let (_, tel) = self.check_telescope(telescope)?;
                self.sig.push(SigDecl::Type { name: name.clone(), telescope: tel });
            }
            DeclKind::ConstDecl { name, ty } => {
                let ty = self.prepare_type(ty)?;
                self.check_type(&Context::new(), &ty)?;
                self.sig.push(SigDecl::Const { name: name.clone(), ty });
            }
            DeclKind::Axiom { name, formula } => {
                let f = self.prepare_term(formula)?;
                let f = self.check(&Context::new(), &f, &TypeExpr::bool())?;
                self.sig.push(SigDecl::Axiom { name: name.clone(), formula: f });
            }
            DeclKind::TypeDef { name, telescope, rhs } => {
                let (ctx, tel) = self.check_telescope(telescope)?;
                let rhs = self.prepare_type(rhs)?;
                self.check_type(&ctx, &rhs)?;
                let rhs = self.elaborate_type(&ctx, &rhs)?;
                self.type_defs.insert(name.clone(), (tel, rhs));
            }
            DeclKind::TermDef { name, ty, rhs } => {
                let ty = self.prepare_type(ty)?;
                self.check_type(&Context::new(), &ty)?;
                let rhs = self.prepare_term(rhs)?;
                let rhs = self.check(&Context::new(), &rhs, &ty)?;
                self.term_defs.insert(name.clone(), rhs);
            }
        }
        Ok(())
    }

    pub fn check_conjecture(&mut self, c: &Conjecture) -> KResult<CheckedConjecture> {
        self.begin(&c.name, &c.span);
        if self.names.contains(&c.name) {
            return err(format!("duplicate declaration of `{}`", c.name), &c.span);
        }
        self.names.insert(c.name.clone());
        let f = self.prepare_term(&c.formula)?;
        let f = self.check(&Context::new(), &f, &TypeExpr::bool())?;
        Ok(CheckedConjecture { name: c.name.clone(), formula: f, span: c.span.clone() })
    }

    /// Fills in equality annotations inside the terms of a type.
    fn elaborate_type(&mut self, ctx: &Context, a: &TypeExpr) -> KResult<TypeExpr> {
        let saved = self.obligations.len();
        let r = self.elab_type_inner(ctx, a);
        self.obligations.truncate(saved);
        r
    }

    fn elab_type_inner(&mut self, ctx: &Context, a: &TypeExpr) -> KResult<TypeExpr> {
        let kind = match &a.kind {
            TypeKind::Bool => TypeKind::Bool,
            TypeKind::Base(n, args) => {
                let tel = self.sig.telescope(n).cloned().unwrap_or_default();
                let mut s = Subst::new();
                let mut out = Vec::new();
                for ((x, ty), t) in tel.iter().zip(args) {
                    let t2 = self.check(ctx, t, &s.apply_type(ty))?;
                    s.push(x, t2.clone());
                    out.push(t2);
                }
                TypeKind::Base(n.clone(), out)
            }
            TypeKind::Pi(x, d, c) => {
                let d2 = self.elab_type_inner(ctx, d)?;
                let c2 = self.elab_type_inner(&ctx.with_var(x, d2.clone()), c)?;
                TypeKind::Pi(x.clone(), Box::new(d2), Box::new(c2))
            }
            TypeKind::Refine(b, p) => {
                let b2 = self.elab_type_inner(ctx, b)?;
                let p2 = self.check(ctx, p, &TypeExpr::arrow(b2.clone(), TypeExpr::bool()))?;
                TypeKind::Refine(Box::new(b2), Box::new(p2))
            }
            TypeKind::Quotient(b, r) => {
                let b2 = self.elab_type_inner(ctx, b)?;
                let rt = TypeExpr::arrow(b2.clone(), TypeExpr::arrow(b2.clone(), TypeExpr::bool()));
                let r2 = self.check(ctx, r, &rt)?;
                TypeKind::Quotient(Box::new(b2), Box::new(r2))
            }
        };
        Ok(TypeExpr { kind, span: a.span.clone() })
    }

    // -- types --------------------------------------------------------------

    /// Checks well-formedness of a (prepared) type, emitting obligations.
    pub fn check_type(&mut self, ctx: &Context, a: &TypeExpr) -> KResult<()> {
        match &a.kind {
            TypeKind::Bool => Ok(()),
            TypeKind::Base(n, args) => {
                let Some(tel) = self.sig.telescope(n).cloned() else {
                    return err(format!("unbound type symbol `{n}`"), &a.span);
                };
                if tel.len() != args.len() {
                    return err(
                        format!("type `{n}` expects {} argument(s), got {}", tel.len(), args.len()),
                        &a.span,
                    );
                }
                let mut s = Subst::new();
                for ((x, ty), t) in tel.iter().zip(args) {
                    let t2 = self.check(ctx, t, &s.apply_type(ty))?;
                    s.push(x, t2);
                }
                Ok(())
            }
            TypeKind::Pi(x, d, c) => {
                self.check_type(ctx, d)?;
                let (x2, c2) = self.open_type_binder(ctx, x, c);
                self.check_type(&ctx.with_var(&x2, (**d).clone()), &c2)
            }
            TypeKind::Refine(b, p) => {
                self.check_type(ctx, b)?;
                self.check(ctx, p, &TypeExpr::arrow((**b).clone(), TypeExpr::bool()))?;
                Ok(())
            }
            TypeKind::Quotient(b, r) => {
                self.check_type(ctx, b)?;
                let rt = TypeExpr::arrow((**b).clone(), TypeExpr::arrow((**b).clone(), TypeExpr::bool()));
                let r2 = self.check(ctx, r, &rt)?;
                let here = if a.span.is_dummy() { self.span.clone() } else { a.span.clone() };
                let saved = std::mem::replace(&mut self.span, here);
                for (goal, rule) in is_eq_rel_obligations(&r2, b).into_iter().zip(["Qtype-refl", "Qtype-sym", "Qtype-trans"]) {
                    self.emit(ctx, goal, rule);
                }
                self.span = saved;
                Ok(())
            }
        }
    }

    /// Chooses a binder name not clashing with the context.
    fn open_binder(&self, ctx: &Context, x: &str, body: &Term) -> (Sym, Term) {
        if x != ANON && !ctx.has_name(x) {
            return (x.to_string(), body.clone());
        }
        let y = self.fresh_var(ctx, x, &[&body.free_vars()]);
        (y.clone(), rename(body, x, &y))
    }

    fn open_type_binder(&self, ctx: &Context, x: &str, body: &TypeExpr) -> (Sym, TypeExpr) {
        if x != ANON && !ctx.has_name(x) {
            return (x.to_string(), body.clone());
        }
        let y = self.fresh_var(ctx, x, &[&body.free_vars()]);
        (y.clone(), rename_type(body, x, &y))
    }

    // -- terms --------------------------------------------------------------

    /// Infers the type of a prepared term, returning the elaborated term.
    pub fn infer(&mut self, ctx: &Context, t: &Term) -> KResult<(Term, TypeExpr)> {
        match &t.kind {
            TermKind::Const(c) => match self.sig.const_type(c) {
                Some(a) => Ok((t.clone(), a.clone())),
                None => err(format!("unbound constant `{c}`"), &t.span),
            },
            TermKind::Var(x) => match ctx.lookup(x) {
                Some(a) => Ok((t.clone(), a.clone())),
                None => err(format!("unbound variable `{x}`"), &t.span),
            },
            TermKind::Lam(x, a, body) => {
                self.check_type(ctx, a)?;
                let (x2, body) = self.open_binder(ctx, x, body);
                let (b2, bt) = self.infer(&ctx.with_var(&x2, (**a).clone()), &body)?;
                Ok((Term::lam(&x2, (**a).clone(), b2).with_span(t.span.clone()), TypeExpr::pi(&x2, (**a).clone(), bt)))
            }
            TermKind::App(f, a) => {
                let (f2, ft) = self.infer(ctx, f)?;
                let head = self.expose_pi(ctx, &f2, &ft, &t.span)?;
                let a2 = self.check(ctx, a, &head.dom)?;
                let result = subst_type(&head.cod, &Subst::single(&head.binder, a2.clone()));
                if let Some(nf) = &head.quotiented {
                    self.emit_app_invariance(ctx, &f2, &ft, nf, &a2, &result, &t.span);
                }
                Ok((Term::app(f2, a2).with_span(t.span.clone()), result))
            }
            TermKind::Eq(l, r, at) => {
                let (l2, r2, a) = match at {
                    Some(a) => {
                        self.check_type(ctx, a)?;
                        let l2 = self.check(ctx, l, a)?;
                        let r2 = self.check(ctx, r, a)?;
                        (l2, r2, (**a).clone())
                    }
                    None => {
                        let (l2, a) = self.infer(ctx, l)?;
                        let r2 = self.check(ctx, r, &a)?;
                        (l2, r2, a)
                    }
                };
                Ok((Term::eq(l2, r2, a).with_span(t.span.clone()), TypeExpr::bool()))
            }
            TermKind::Implies(h, c) => {
                let h2 = self.check(ctx, h, &TypeExpr::bool())?;
                let c2 = self.check(&ctx.with_assumption(h2.clone()), c, &TypeExpr::bool())?;
                Ok((Term::implies(h2, c2).with_span(t.span.clone()), TypeExpr::bool()))
            }
            TermKind::QuotElim { scrutinee, binder, carrier, body, motive } => {
                self.infer_quot_elim(ctx, t, scrutinee, binder, carrier, body, motive)
            }
            _ => err("connective sugar must be expanded before checking", &t.span),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn infer_quot_elim(
        &mut self,
        ctx: &Context,
        t: &Term,
        s: &Term,
        x: &str,
        carrier: &TypeExpr,
        body: &Term,
        motive: &TypeExpr,
    ) -> KResult<(Term, TypeExpr)> {
        self.check_type(ctx, carrier)?;
        let base = match &carrier.kind {
            TypeKind::Quotient(b, _) => (**b).clone(),
            _ => {
                let nf = subtype::normalize(carrier, self.opts);
                if nf.rel.is_none() {
                    return err("the carrier of `use` must be a quotient type", &carrier.span);
                }
                nf.refined_core()
            }
        };
        let s2 = self.check(ctx, s, carrier)?;
        let mut scope = body.free_vars();
        scope.extend(motive.free_vars());
        scope.extend(s2.free_vars());
        let x1 = self.fresh_var(ctx, x, &[&scope]);
        let body1 = rename(body, x, &x1);
        let motive1 = rename_type(motive, x, &x1);
        let ctx1 = ctx
            .with_var(&x1, base.clone())
            .with_assumption(Term::eq(Term::var(&x1), s2.clone(), carrier.clone()));
        self.check_type(&ctx1, &motive1)?;
        let body2 = self.check(&ctx1, &body1, &motive1)?;
        let mut avoid = scope.clone();
        avoid.insert(x1.clone());
        let x2 = self.fresh_var(ctx, x, &[&avoid]);
        let ctx2 = ctx
            .with_var(&x1, base.clone())
            .with_var(&x2, base.clone())
            .with_assumption(Term::eq(Term::var(&x1), s2.clone(), carrier.clone()))
            .with_assumption(Term::eq(Term::var(&x2), s2.clone(), carrier.clone()));
        let goal = Term::eq(body2.clone(), rename(&body2, &x1, &x2), motive1.clone()).with_span(t.span.clone());
        self.emit(&ctx2, goal, "QE");
        let result = subst_type(&motive1, &Subst::single(&x1, s2.clone()));
        let elab = Term::quot_elim(s2, &x1, carrier.clone(), body2, motive1).with_span(t.span.clone());
        Ok((elab, result))
    }

    /// Views the type of an application head as a function type.
    fn expose_pi(&mut self, _ctx: &Context, _f: &Term, ft: &TypeExpr, span: &Span) -> KResult<PiView> {
        if let TypeKind::Pi(x, d, c) = &ft.kind {
            return Ok(PiView { binder: x.clone(), dom: (**d).clone(), cod: (**c).clone(), quotiented: None });
        }
        let nf = subtype::normalize(ft, self.opts);
        match &nf.core.kind {
            TypeKind::Pi(x, d, c) => Ok(PiView {
                binder: x.clone(),
                dom: (**d).clone(),
                cod: (**c).clone(),
                quotiented: nf.rel.is_some().then(|| nf.clone()),
            }),
            _ => err(
                format!("application head of type `{}` is not a function", crate::parser::print_type(ft)),
                span,
            ),
        }
    }

    /// Applying a head whose type is a quotient of a function type goes
    /// through quotient elimination: any two representatives must agree on
    /// the argument.
    #[allow(clippy::too_many_arguments)]
    fn emit_app_invariance(
        &mut self,
        ctx: &Context,
        f: &Term,
        ft: &TypeExpr,
        nf: &NormalType,
        a: &Term,
        result: &TypeExpr,
        span: &Span,
    ) {
        let rep = nf.refined_core();
        let mut scope = f.free_vars();
        scope.extend(a.free_vars());
        scope.extend(result.free_vars());
        scope.extend(ft.free_vars());
        let f1 = self.fresh_var(ctx, "f", &[&scope]);
        scope.insert(f1.clone());
        let f2 = self.fresh_var(ctx, "f", &[&scope]);
        let ctx2 = ctx
            .with_var(&f1, rep.clone())
            .with_assumption(Term::eq(Term::var(&f1), f.clone(), ft.clone()))
            .with_var(&f2, rep)
            .with_assumption(Term::eq(Term::var(&f2), f.clone(), ft.clone()));
        let goal = Term::eq(Term::app(Term::var(&f1), a.clone()), Term::app(Term::var(&f2), a.clone()), result.clone())
            .with_span(span.clone());
        self.emit(&ctx2, goal, "QE-app");
    }

    /// Checks a prepared term against a type, returning the elaborated term.
    pub fn check(&mut self, ctx: &Context, t: &Term, b: &TypeExpr) -> KResult<Term> {
        let is_lam = matches!(t.kind, TermKind::Lam(..));
        match &b.kind {
            // Only abstractions need the target pushed inwards; anything else
            // may already carry the refinement or quotient in its own type.
            TypeKind::Refine(b0, p) if is_lam => {
                let t2 = self.check(ctx, t, b0)?;
                self.emit(ctx, Term::app((**p).clone(), t2.clone()).with_span(t.span.clone()), "psubI");
                return Ok(t2);
            }
            TypeKind::Quotient(b0, _) if is_lam => return self.check(ctx, t, b0),
            TypeKind::Pi(y, dom, cod) => {
                if let TermKind::Lam(x, annot, body) = &t.kind {
                    self.check_type(ctx, annot)?;
                    self.subtype_check(ctx, dom, annot)?;
                    let mut scope = body.free_vars();
                    scope.extend(cod.free_vars());
                    let (x2, body2) = if x != ANON && !ctx.has_name(x) && (x == y || !cod.has_free(x)) {
                        (x.clone(), (**body).clone())
                    } else {
                        let z = self.fresh_var(ctx, x, &[&scope]);
                        (z.clone(), rename(body, x, &z))
                    };
                    let cod2 = rename_type(cod, y, &x2);
                    let b2 = self.check(&ctx.with_var(&x2, (**dom).clone()), &body2, &cod2)?;
                    return Ok(Term::lam(&x2, (**annot).clone(), b2).with_span(t.span.clone()));
                }
            }
            _ => {}
        }
        let (t2, a) = self.infer(ctx, t)?;
        self.coerce(ctx, &t2, &a, b)?;
        Ok(t2)
    }

    /// Establishes that `t : a` also has type `b`.
    fn coerce(&mut self, ctx: &Context, t: &Term, a: &TypeExpr, b: &TypeExpr) -> KResult<()> {
        if a.beta().alpha_eq(&b.beta()) {
            return Ok(());
        }
        match &b.kind {
            TypeKind::Refine(b0, p) => {
                self.coerce(ctx, t, a, b0)?;
                self.emit(ctx, Term::app((**p).clone(), t.clone()).with_span(t.span.clone()), "psubI");
                Ok(())
            }
            TypeKind::Quotient(b0, _) => {
                if subtype::normalize(a, self.opts).rel.is_some() {
                    self.subtype_check(ctx, a, b)
                } else {
                    self.coerce(ctx, t, a, b0)
                }
            }
            _ => {
                let nf = subtype::normalize(b, self.opts);
                if nf.pred.is_some() || nf.rel.is_some() {
                    self.coerce(ctx, t, a, &nf.to_type())
                } else {
                    self.subtype_check(ctx, a, b)
                }
            }
        }
    }
}

struct PiView {
    binder: Sym,
    dom: TypeExpr,
    cod: TypeExpr,
    quotiented: Option<NormalType>,
}

/// The three equivalence-relation goals for `r` over `a`.
pub fn is_eq_rel_obligations(r: &Term, a: &TypeExpr) -> Vec<Term> {
    let mut avoid = r.free_vars();
    avoid.extend(a.free_vars());
    let x = fresh_name("x", &avoid);
    avoid.insert(x.clone());
    let y = fresh_name("y", &avoid);
    avoid.insert(y.clone());
    let z = fresh_name("z", &avoid);
    let rel = |u: &str, v: &str| Term::apps(r.clone(), [Term::var(u), Term::var(v)]);
    let all = |v: &str, body: Term| core_forall(v, a.clone(), body);
    vec![
        all(&x, rel(&x, &x)),
        all(&x, all(&y, Term::implies(rel(&x, &y), rel(&y, &x)))),
        all(&x, all(&y, all(&z, Term::implies(rel(&x, &y), Term::implies(rel(&y, &z), rel(&x, &z)))))),
    ]
}

fn beta_context(ctx: &Context) -> Context {
    Context {
        entries: ctx
            .entries
            .iter()
            .map(|e| match e {
                CtxEntry::VarDecl(x, a) => CtxEntry::VarDecl(x.clone(), a.beta()),
                CtxEntry::Assumption(h, f) => CtxEntry::Assumption(h.clone(), f.beta()),
            })
            .collect(),
    }
}

/// Keeps the context entries the goal depends on: variables free in the
/// goal or in kept entries, and assumptions mentioning a kept variable.
pub fn prune(ctx: &Context, goal: &Term) -> Context {
    let mut relevant = goal.free_vars();
    let mut keep = vec![false; ctx.entries.len()];
    loop {
        let mut changed = false;
        for (i, e) in ctx.entries.iter().enumerate().rev() {
            if keep[i] {
                continue;
            }
            let fv = match e {
                CtxEntry::VarDecl(x, a) if relevant.contains(x) => Some(a.free_vars()),
                CtxEntry::Assumption(_, f) => {
                    let fv = f.free_vars();
                    fv.iter().any(|v| relevant.contains(v)).then_some(fv)
                }
                _ => None,
            };
            if let Some(fv) = fv {
                keep[i] = true;
                changed = true;
                relevant.extend(fv);
            }
        }
        if !changed {
            break;
        }
    }
    let mut n = 0;
    Context {
        entries: ctx
            .entries
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(e, _)| match e {
                CtxEntry::Assumption(_, f) => {
                    n += 1;
                    CtxEntry::Assumption(format!("h{n}"), f.clone())
                }
                v => v.clone(),
            })
            .collect(),
    }
}

/// A checker that has accepted every declaration of `theory`, ready to
/// elaborate further terms and types against it.
pub fn checker_for(theory: &Theory, opts: KernelOptions) -> KResult<Checker> {
    let mut ck = Checker::new(opts);
    for d in &theory.decls {
        ck.check_decl(d)?;
    }
    ck.take_obligations();
    Ok(ck)
}

/// Checks a whole theory: declarations left to right, then conjectures.
pub fn check_theory(theory: &Theory, opts: KernelOptions) -> CheckResult {
    let mut ck = Checker::new(opts);
    let mut conjectures = Vec::new();
    let mut status = Status::Accepted;
    for d in &theory.decls {
        if let Err(e) = ck.check_decl(d) {
            status = Status::Rejected { reason: e.reason, span: e.span };
            break;
        }
    }
    if matches!(status, Status::Accepted) {
        for c in &theory.conjectures {
            match ck.check_conjecture(c) {
                Ok(cc) => conjectures.push(cc),
                Err(e) => {
                    status = Status::Rejected { reason: e.reason, span: e.span };
                    break;
                }
            }
        }
    }
    let warnings = inhabitation_warnings(&ck.sig);
    CheckResult { obligations: ck.take_obligations(), status, signature: ck.sig, conjectures, warnings }
}

fn final_codomain(a: &TypeExpr) -> &TypeExpr {
    match &a.kind {
        TypeKind::Pi(_, _, c) => final_codomain(c),
        TypeKind::Refine(b, _) | TypeKind::Quotient(b, _) => final_codomain(b),
        _ => a,
    }
}

/// Type symbols with no constant producing one of their instances.
fn inhabitation_warnings(sig: &Signature) -> Vec<String> {
    let produced: BTreeSet<&str> = sig
        .decls
        .iter()
        .filter_map(|d| match d {
            SigDecl::Const { ty, .. } => match &final_codomain(ty).kind {
                TypeKind::Base(n, _) => Some(n.as_str()),
                _ => None,
            },
            _ => None,
        })
        .collect();
    sig.decls
        .iter()
        .filter_map(|d| match d {
            SigDecl::Type { name, .. } if !produced.contains(name.as_str()) => {
                Some(format!("type symbol `{name}` may be uninhabited: no constant produces an instance"))
            }
            _ => None,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Local discharge

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simplified {
    Discharged(&'static str),
    Remaining,
}

/// Discharges reflexivity instances, assumption lookups and axiom instances.
pub fn simplify_obligation(ob: &Obligation, sig: &Signature) -> Simplified {
    let mut hyps: Vec<Term> = ob
        .context
        .entries
        .iter()
        .filter_map(|e| match e {
            CtxEntry::Assumption(_, f) => Some(f.beta()),
            _ => None,
        })
        .collect();
    let mut goal = ob.goal.beta();
    loop {
        if let Some((_, _, body)) = match_core_forall(&goal) {
            goal = body.clone();
            continue;
        }
        if let TermKind::Implies(h, c) = &goal.kind {
            hyps.push(h.beta());
            goal = (**c).clone();
            continue;
        }
        break;
    }
    if let TermKind::Eq(l, r, _) = &goal.kind {
        if l.beta().eta().alpha_eq(&r.beta().eta()) {
            return Simplified::Discharged("reflexivity");
        }
    }
    if hyps.iter().any(|h| h.alpha_eq(&goal)) {
        return Simplified::Discharged("assumption");
    }
    for (_, ax) in sig.axioms() {
        if instance_of(&ax.beta(), &goal) {
            return Simplified::Discharged("axiom");
        }
    }
    Simplified::Remaining
}

/// True when `goal` is an instance of `ax` obtained by instantiating its
/// leading universal quantifiers.
fn instance_of(ax: &Term, goal: &Term) -> bool {
    let mut vars = Vec::new();
    let mut body = ax;
    while let Some((x, _, b)) = match_core_forall(body) {
        vars.push(x.clone());
        body = b;
    }
    let mut binding: BTreeMap<Sym, Term> = BTreeMap::new();
    matches(body, goal, &vars, &mut binding, &mut Vec::new(), &mut Vec::new())
}

fn matches(
    p: &Term,
    t: &Term,
    vars: &[Sym],
    binding: &mut BTreeMap<Sym, Term>,
    pb: &mut Vec<Sym>,
    tb: &mut Vec<Sym>,
) -> bool {
    use TermKind::*;
    if let Var(x) = &p.kind {
        if !pb.contains(x) && vars.contains(x) {
            if t.free_vars().iter().any(|v| tb.contains(v)) {
                return false;
            }
            return match binding.get(x) {
                Some(prev) => prev.alpha_eq(t),
                None => {
                    binding.insert(x.clone(), t.clone());
                    true
                }
            };
        }
    }
    let bind = |pb: &mut Vec<Sym>, tb: &mut Vec<Sym>, x: &Sym, y: &Sym| {
        pb.push(x.clone());
        tb.push(y.clone());
    };
    match (&p.kind, &t.kind) {
        (Const(a), Const(b)) => a == b,
        (Var(a), Var(b)) => {
            let i = pb.iter().rposition(|v| v == a);
            let j = tb.iter().rposition(|v| v == b);
            match (i, j) {
                (Some(i), Some(j)) => i == j,
                (None, None) => a == b,
                _ => false,
            }
        }
        (App(f1, a1), App(f2, a2)) | (Implies(f1, a1), Implies(f2, a2)) => {
            matches(f1, f2, vars, binding, pb, tb) && matches(a1, a2, vars, binding, pb, tb)
        }
        (Lam(x, ta, ba), Lam(y, tb2, bb)) => {
            if !ground_type_eq(ta, tb2, binding) {
                return false;
            }
            bind(pb, tb, x, y);
            let r = matches(ba, bb, vars, binding, pb, tb);
            pb.pop();
            tb.pop();
            r
        }
        (Eq(l1, r1, Some(a1)), Eq(l2, r2, Some(a2))) => {
            ground_type_eq(a1, a2, binding)
                && matches(l1, l2, vars, binding, pb, tb)
                && matches(r1, r2, vars, binding, pb, tb)
        }
        _ => false,
    }
}

/// Type comparison inside matching: instantiate what is bound so far.
fn ground_type_eq(a: &TypeExpr, b: &TypeExpr, binding: &BTreeMap<Sym, Term>) -> bool {
    let mut s = Subst::new();
    for (x, t) in binding {
        s.push(x, t.clone());
    }
    s.apply_type(a).alpha_eq(b)
}
