//! Normal forms of types and the subtyping check.
//!
//! Every type normalizes to `(core | pred) / rel` where `core` has no
//! top-level refinement or quotient. Normalization rewrites innermost
//! first with the laws below, then reads off the three components.
//!
//! ```text
//! RR    (A|p)|q            ~> A | \x:A. p x /\ q x
//! QQ    (A/r)/r'           ~> A / \x,y:A. r' x y
//! RQ    (A/r)|p            ~> (A|p)/r
//! QDom  (x:A/r) -> B       ~> ((x:A) -> B) | \f. forall x y:A. r x y => f x = f y
//! RDom  (x:A|p) -> B       ~> ((x:A) -> B) / \f g. forall x:A. p x => f x = g x   (x not free in B)
//! QCod  (x:A) -> B/r       ~> ((x:A) -> B) / \f g. forall x:A. r (f x) (g x)
//! RCod  (x:A) -> B|p       ~> ((x:A) -> B) | \f. forall x:A. p (f x)
//! ```

use std::collections::BTreeSet;

use crate::kernel::{Checker, KResult, KernelError, KernelOptions};
use crate::syntax::*;

#[derive(Clone, Debug)]
pub struct NormalType {
    pub core: TypeExpr,
    /// `None` stands for `\x. true`.
    pub pred: Option<Term>,
    /// `None` stands for `\x y. x = y`.
    pub rel: Option<Term>,
}

impl NormalType {
    pub fn refined_core(&self) -> TypeExpr {
        match &self.pred {
            Some(p) => TypeExpr::refine(self.core.clone(), p.clone()),
            None => self.core.clone(),
        }
    }

    pub fn to_type(&self) -> TypeExpr {
        match &self.rel {
            Some(r) => TypeExpr::quotient(self.refined_core(), r.clone()),
            None => self.refined_core(),
        }
    }

    pub fn pred_or_default(&self) -> Term {
        self.pred.clone().unwrap_or_else(|| Term::lam("x", self.core.clone(), core_true()))
    }

    pub fn rel_or_default(&self) -> Term {
        self.rel.clone().unwrap_or_else(|| {
            let c = self.core.clone();
            Term::lam("x", c.clone(), Term::lam("y", c.clone(), Term::eq(Term::var("x"), Term::var("y"), c)))
        })
    }

    fn split(a: TypeExpr) -> NormalType {
        match a.kind {
            TypeKind::Quotient(b, r) => match b.kind {
                TypeKind::Refine(c, p) => NormalType { core: *c, pred: Some(*p), rel: Some(*r) },
                _ => NormalType { core: *b, pred: None, rel: Some(*r) },
            },
            TypeKind::Refine(c, p) => NormalType { core: *c, pred: Some(*p), rel: None },
            _ => NormalType { core: a, pred: None, rel: None },
        }
    }
}

/// Normalizes a type. Normalization never produces obligations.
pub fn normalize(a: &TypeExpr, opts: KernelOptions) -> NormalType {
    NormalType::split(norm(&a.beta(), opts))
}

fn norm(a: &TypeExpr, opts: KernelOptions) -> TypeExpr {
    match &a.kind {
        TypeKind::Bool | TypeKind::Base(..) => a.clone(),
        TypeKind::Refine(b, p) => refine(norm(b, opts), (**p).clone()),
        TypeKind::Quotient(b, r) => quotient(norm(b, opts), (**r).clone()),
        TypeKind::Pi(x, d, c) => pi(x, norm(d, opts), norm(c, opts), opts),
    }
}

fn avoid_of(ts: &[&Term], tys: &[&TypeExpr]) -> BTreeSet<Sym> {
    let mut s = BTreeSet::new();
    for t in ts {
        s.extend(t.free_vars());
    }
    for a in tys {
        s.extend(a.free_vars());
    }
    s
}

/// Refines an already normal type.
fn refine(b: TypeExpr, p: Term) -> TypeExpr {
    match b.kind {
        TypeKind::Quotient(inner, r) => TypeExpr::quotient(refine(*inner, p), *r),
        TypeKind::Refine(core, q) => {
            let x = fresh_name("x", &avoid_of(&[&p, &q], &[]));
            let body = core_and(Term::app(*q, Term::var(&x)), Term::app(p, Term::var(&x))).beta();
            TypeExpr::refine((*core).clone(), Term::lam(&x, *core, body))
        }
        _ => TypeExpr::refine(b, p),
    }
}

/// Quotients an already normal type.
fn quotient(b: TypeExpr, r: Term) -> TypeExpr {
    match b.kind {
        TypeKind::Quotient(inner, _) => {
            let avoid = avoid_of(&[&r], &[&inner]);
            let x = fresh_name("x", &avoid);
            let mut avoid2 = avoid;
            avoid2.insert(x.clone());
            let y = fresh_name("y", &avoid2);
            let body = Term::apps(r, [Term::var(&x), Term::var(&y)]).beta();
            TypeExpr::quotient((*inner).clone(), Term::lam(&x, (*inner).clone(), Term::lam(&y, *inner, body)))
        }
        _ => TypeExpr::quotient(b, r),
    }
}

/// Rewrites `(x:d) -> c` with `d` and `c` normal.
fn pi(x: &str, d: TypeExpr, c: TypeExpr, opts: KernelOptions) -> TypeExpr {
    let dn = NormalType::split(d.clone());
    let cn = NormalType::split(c.clone());
    let avoid = avoid_of(&[], &[&d, &c]);
    let mut names = avoid.clone();
    names.insert(x.to_string());
    let f = fresh_name("f", &names);
    names.insert(f.clone());
    let g = fresh_name("g", &names);
    names.insert(g.clone());
    // Generated formulas need a named binder even for plain arrows.
    let xv = if x == ANON { fresh_name("x", &names) } else { x.to_string() };
    names.insert(xv.clone());
    let y = fresh_name(if x == ANON { "y" } else { x }, &names);
    let fx = |h: &str, v: &str| Term::app(Term::var(h), Term::var(v));

    if let Some(r) = &dn.rel {
        let dref = dn.refined_core();
        let fun = TypeExpr::pi(&xv, dref.clone(), rename_type(&c, x, &xv));
        let c_at_x = rename_type(&c, x, &xv);
        let compat = Term::lam(
            &f,
            fun.clone(),
            core_forall(
                &xv,
                dref.clone(),
                core_forall(
                    &y,
                    dref.clone(),
                    Term::implies(
                        Term::apps(r.clone(), [Term::var(&xv), Term::var(&y)]).beta(),
                        Term::eq(fx(&f, &xv), fx(&f, &y), c_at_x),
                    ),
                ),
            ),
        );
        return refine(pi(x, dref, c, opts), compat);
    }
    if let Some(p) = &dn.pred {
        if x == ANON || !c.has_free(x) {
            let fun = TypeExpr::pi(x, dn.core.clone(), c.clone());
            let rel = Term::lam(
                &f,
                fun.clone(),
                Term::lam(
                    &g,
                    fun,
                    core_forall(
                        &xv,
                        dn.core.clone(),
                        Term::implies(
                            Term::app(p.clone(), Term::var(&xv)).beta(),
                            Term::eq(fx(&f, &xv), fx(&g, &xv), c.clone()),
                        ),
                    ),
                ),
            );
            return quotient(pi(x, dn.core.clone(), c, opts), rel);
        }
    }
    if let (Some(r), true) = (&cn.rel, opts.quot_cod_axiom) {
        let e = cn.refined_core();
        let fun = TypeExpr::pi(&xv, d.clone(), rename_type(&e, x, &xv));
        let rel = Term::lam(
            &f,
            fun.clone(),
            Term::lam(
                &g,
                fun,
                core_forall(&xv, d.clone(), Term::apps(r.clone(), [fx(&f, &xv), fx(&g, &xv)]).beta()),
            ),
        );
        return quotient(pi(x, d, e, opts), rel);
    }
    if let (Some(p), None) = (&cn.pred, &cn.rel) {
        let fun = TypeExpr::pi(&xv, d.clone(), rename_type(&cn.core, x, &xv));
        let pred = Term::lam(&f, fun, core_forall(&xv, d.clone(), Term::app(p.clone(), fx(&f, &xv)).beta()));
        return refine(pi(x, d, cn.core, opts), pred);
    }
    TypeExpr::pi(x, d, c)
}

impl Checker {
    /// `Γ ⊢ a ≺: b`, emitting the obligations it needs.
    pub fn subtype_check(&mut self, ctx: &Context, a: &TypeExpr, b: &TypeExpr) -> KResult<()> {
        self.subtype_inner(ctx, a, b, false)
    }

    /// `swapped` records that the user-facing left type is `sup`; base
    /// argument equalities are always written left to right.
    fn subtype_inner(&mut self, ctx: &Context, sub: &TypeExpr, sup: &TypeExpr, swapped: bool) -> KResult<()> {
        let (sub, sup) = (sub.beta(), sup.beta());
        if sub.alpha_eq(&sup) {
            return Ok(());
        }
        let na = normalize(&sub, self.opts);
        let nb = normalize(&sup, self.opts);
        self.core_sub(ctx, &na.core, &nb.core, swapped, &sup.span)?;
        let ca = na.core.clone();
        let mut avoid = avoid_of(&[], &[&sub, &sup]);
        avoid.extend(ctx.names());
        let x = fresh_name("x", &avoid);
        avoid.insert(x.clone());
        let y = fresh_name("y", &avoid);
        let pa = |v: &str| na.pred.as_ref().map(|p| Term::app(p.clone(), Term::var(v)));
        if let Some(pb) = &nb.pred {
            if !na.pred.as_ref().is_some_and(|p| p.alpha_eq(pb)) {
                let mut c = ctx.with_var(&x, ca.clone());
                if let Some(h) = pa(&x) {
                    c = c.with_assumption(h.beta());
                }
                self.emit(&c, Term::app(pb.clone(), Term::var(&x)), "subtPsubCong");
            }
        }
        if let Some(ra) = &na.rel {
            if nb.rel.as_ref().is_some_and(|rb| rb.alpha_eq(ra)) {
                return Ok(());
            }
            let mut c = ctx.with_var(&x, ca.clone()).with_var(&y, ca.clone());
            if let (Some(hx), Some(hy)) = (pa(&x), pa(&y)) {
                c = c.with_assumption(hx.beta()).with_assumption(hy.beta());
            }
            c = c.with_assumption(Term::apps(ra.clone(), [Term::var(&x), Term::var(&y)]).beta());
            let goal = match &nb.rel {
                Some(rb) => Term::apps(rb.clone(), [Term::var(&x), Term::var(&y)]),
                None => Term::eq(Term::var(&x), Term::var(&y), nb.core.clone()),
            };
            self.emit(&c, goal, "subtQuotCong");
        }
        Ok(())
    }

    fn core_sub(&mut self, ctx: &Context, a: &TypeExpr, b: &TypeExpr, swapped: bool, span: &Span) -> KResult<()> {
        match (&a.kind, &b.kind) {
            (TypeKind::Bool, TypeKind::Bool) => Ok(()),
            (TypeKind::Base(..), TypeKind::Base(..)) => {
                let (l, r) = if swapped { (b, a) } else { (a, b) };
                self.cong_base(ctx, l, r, span)
            }
            (TypeKind::Pi(x, d1, c1), TypeKind::Pi(y, d2, c2)) => {
                self.subtype_inner(ctx, d2, d1, !swapped)?;
                let ((lx, ld), (rx, rd)) = if swapped { ((y, d2), (x, d1)) } else { ((x, d1), (y, d2)) };
                let (name, dom) = if ld.is_plain() && rd.is_plain() { (lx, ld) } else { (x, d2) };
                let _ = rx;
                let mut avoid = ctx.names();
                avoid.extend(c1.free_vars());
                avoid.extend(c2.free_vars());
                let base = if name == ANON { "x" } else { name.as_str() };
                let z = if !ctx.has_name(base) && (base == x || !c1.has_free(base)) && (base == y || !c2.has_free(base)) {
                    base.to_string()
                } else {
                    fresh_name(base, &avoid)
                };
                let c1z = rename_type(c1, x, &z);
                let c2z = rename_type(c2, y, &z);
                self.subtype_inner(&ctx.with_var(&z, (**dom).clone()), &c1z, &c2z, swapped)
            }
            _ => Err(mismatch(a, b, span)),
        }
    }

    /// Equal type symbols with pairwise equal arguments.
    fn cong_base(&mut self, ctx: &Context, l: &TypeExpr, r: &TypeExpr, span: &Span) -> KResult<()> {
        let (TypeKind::Base(n, ls), TypeKind::Base(m, rs)) = (&l.kind, &r.kind) else {
            return Err(mismatch(l, r, span));
        };
        if n != m || ls.len() != rs.len() {
            return Err(mismatch(l, r, span));
        }
        let tel = self.sig.telescope(n).cloned().unwrap_or_default();
        let mut s = Subst::new();
        for (((x, ty), lt), rt) in tel.iter().zip(ls).zip(rs) {
            if !lt.beta().alpha_eq(&rt.beta()) {
                self.emit(ctx, Term::eq(lt.clone(), rt.clone(), s.apply_type(ty)), "congBase'");
            }
            s.push(x, lt.clone());
        }
        Ok(())
    }

    /// `Γ ⊢ a ≡ b`: structural where possible, two-way subtyping otherwise.
    pub fn type_equal(&mut self, ctx: &Context, a: &TypeExpr, b: &TypeExpr) -> KResult<()> {
        let (a, b) = (a.beta(), b.beta());
        if a.alpha_eq(&b) {
            return Ok(());
        }
        let span = b.span.clone();
        match (&a.kind, &b.kind) {
            (TypeKind::Bool, TypeKind::Bool) => Ok(()),
            (TypeKind::Base(..), TypeKind::Base(..)) => self.cong_base(ctx, &a, &b, &span),
            (TypeKind::Pi(x, d1, c1), TypeKind::Pi(y, d2, c2)) => {
                self.type_equal(ctx, d1, d2)?;
                let mut avoid = ctx.names();
                avoid.extend(c1.free_vars());
                avoid.extend(c2.free_vars());
                let base = if x == ANON { "x" } else { x.as_str() };
                let z = if !ctx.has_name(base) && (base == y || !c2.has_free(base)) {
                    base.to_string()
                } else {
                    fresh_name(base, &avoid)
                };
                self.type_equal(&ctx.with_var(&z, (**d1).clone()), &rename_type(c1, x, &z), &rename_type(c2, y, &z))
            }
            (TypeKind::Refine(..) | TypeKind::Quotient(..), _) | (_, TypeKind::Refine(..) | TypeKind::Quotient(..)) => {
                self.subtype_check(ctx, &a, &b)?;
                self.subtype_check(ctx, &b, &a)
            }
            _ => Err(mismatch(&a, &b, &span)),
        }
    }
}

fn mismatch(a: &TypeExpr, b: &TypeExpr, span: &Span) -> KernelError {
    KernelError {
        reason: format!(
            "type mismatch: `{}` vs `{}`",
            crate::parser::print_type(a),
            crate::parser::print_type(b)
        ),
        span: span.clone(),
    }
}
