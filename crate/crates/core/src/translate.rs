//! DHOL to HOL: dependency erasure plus a partial equivalence relation per
//! type. Every type symbol `a` gets a relation constant `rel_a` and the
//! axioms `a_trans`, `a_sym`, `a_per`; every constant gets `typing_c`.

use std::collections::{BTreeSet, HashMap};

use crate::holcore::{HolConjecture, HolDecl, HolTerm, HolTheory, HolType};
use crate::kernel::{Obligation, SigDecl, Signature};
use crate::syntax::*;

#[derive(Clone, Copy, Debug, Default)]
pub struct TranslateOptions {
    /// Emit the pure-equality encodings of connectives and quantifiers.
    pub raw_core: bool,
}

#[derive(Clone, Debug, thiserror::Error)]
#[error("translation error: {0}")]
pub struct TranslateError(pub String);

/// Erases term arguments of types.
pub fn translate_type(a: &TypeExpr) -> HolType {
    match &a.kind {
        TypeKind::Bool => HolType::Bool,
        TypeKind::Base(n, _) => HolType::Base(n.clone()),
        TypeKind::Pi(_, d, c) => HolType::arrow(translate_type(d), translate_type(c)),
        TypeKind::Refine(b, _) | TypeKind::Quotient(b, _) => translate_type(b),
    }
}

pub struct Translator<'a> {
    pub sig: &'a Signature,
    pub opts: TranslateOptions,
    rel_names: HashMap<Sym, Sym>,
    typing_names: HashMap<Sym, Sym>,
    per_axiom_names: HashMap<Sym, [Sym; 3]>,
}

impl<'a> Translator<'a> {
    pub fn new(sig: &'a Signature, opts: TranslateOptions) -> Self {
        let mut used: BTreeSet<Sym> = BTreeSet::new();
        for d in &sig.decls {
            match d {
                SigDecl::Type { name, .. } | SigDecl::Const { name, .. } | SigDecl::Axiom { name, .. } => {
                    used.insert(name.clone());
                }
            }
        }
        let mut take = |base: String| {
            let n = if used.contains(&base) { fresh_name(&format!("{base}_"), &used) } else { base };
            used.insert(n.clone());
            n
        };
        let mut rel_names = HashMap::new();
        let mut typing_names = HashMap::new();
        let mut per_axiom_names = HashMap::new();
        for d in &sig.decls {
            match d {
                SigDecl::Type { name, .. } => {
                    rel_names.insert(name.clone(), take(format!("rel_{name}")));
                    per_axiom_names.insert(
                        name.clone(),
                        [take(format!("{name}_trans")), take(format!("{name}_sym")), take(format!("{name}_per"))],
                    );
                }
                SigDecl::Const { name, .. } => {
                    typing_names.insert(name.clone(), take(format!("typing_{name}")));
                }
                SigDecl::Axiom { .. } => {}
            }
        }
        Translator { sig, opts, rel_names, typing_names, per_axiom_names }
    }

    /// Name of the relation constant standing for `a`'s PER.
    pub fn rel_name(&self, a: &str) -> Sym {
        self.rel_names.get(a).cloned().unwrap_or_else(|| format!("rel_{a}"))
    }

    /// `⟨s =_A t⟩`.
    pub fn per_relation(&self, a: &TypeExpr, s: &HolTerm, t: &HolTerm) -> Result<HolTerm, TranslateError> {
        Ok(match &a.kind {
            TypeKind::Bool => HolTerm::eq(s.clone(), t.clone(), HolType::Bool),
            TypeKind::Base(n, args) => {
                let mut xs = Vec::new();
                for u in args {
                    xs.push(self.term(u)?);
                }
                xs.push(s.clone());
                xs.push(t.clone());
                HolTerm::apps(HolTerm::cnst(&self.rel_name(n)), xs)
            }
            TypeKind::Pi(x, d, c) => {
                let mut avoid = s.free_vars();
                avoid.extend(t.free_vars());
                avoid.extend(d.free_vars());
                let mut cod_fv = c.free_vars();
                cod_fv.remove(x);
                avoid.extend(cod_fv);
                let base = if x == ANON { "x" } else { x.as_str() };
                let x1 = fresh_or_keep(base, &avoid);
                avoid.insert(x1.clone());
                let y1 = fresh_or_keep("y", &avoid);
                let c1 = if x == ANON { (**c).clone() } else { rename_type(c, x, &x1) };
                let dt = translate_type(d);
                let body = HolTerm::implies(
                    self.per_relation(d, &HolTerm::var(&x1), &HolTerm::var(&y1))?,
                    self.per_relation(
                        &c1,
                        &HolTerm::app(s.clone(), HolTerm::var(&x1)),
                        &HolTerm::app(t.clone(), HolTerm::var(&y1)),
                    )?,
                );
                HolTerm::forall(&x1, dt.clone(), HolTerm::forall(&y1, dt, body))
            }
            TypeKind::Refine(b, p) => {
                let p = self.term(p)?;
                HolTerm::conj_distinct(vec![
                    self.per_relation(b, s, t)?,
                    HolTerm::app(p.clone(), s.clone()),
                    HolTerm::app(p, t.clone()),
                ])
            }
            TypeKind::Quotient(b, r) => {
                let r = self.term(r)?;
                HolTerm::conj_distinct(vec![
                    HolTerm::apps(r, [s.clone(), t.clone()]),
                    self.typing_predicate(b, s)?,
                    self.typing_predicate(b, t)?,
                ])
            }
        })
    }

    /// `P_A(t)`, the diagonal of the PER.
    pub fn typing_predicate(&self, a: &TypeExpr, t: &HolTerm) -> Result<HolTerm, TranslateError> {
        self.per_relation(a, t, t)
    }

    /// Translates an elaborated DHOL term. Formulas are resugared first
    /// unless raw output was requested.
    pub fn translate_term(&self, t: &Term) -> Result<HolTerm, TranslateError> {
        if self.opts.raw_core {
            Ok(self.term(t)?.expand_core())
        } else {
            self.term(&resugar(t))
        }
    }

    fn term(&self, t: &Term) -> Result<HolTerm, TranslateError> {
        Ok(match &t.kind {
            TermKind::Const(c) => HolTerm::cnst(c),
            TermKind::Var(x) => HolTerm::var(x),
            TermKind::Lam(x, a, b) => HolTerm::lam(x, translate_type(a), self.term(b)?),
            TermKind::App(f, a) => HolTerm::app(self.term(f)?, self.term(a)?),
            TermKind::Eq(l, r, at) => {
                let Some(at) = at else {
                    return Err(TranslateError("equality without a type annotation".into()));
                };
                self.per_relation(at, &self.term(l)?, &self.term(r)?)?
            }
            TermKind::Implies(h, c) => HolTerm::implies(self.term(h)?, self.term(c)?),
            TermKind::QuotElim { scrutinee, binder, body, .. } => self.term(body)?.subst1(binder, &self.term(scrutinee)?),
            TermKind::True => HolTerm::True,
            TermKind::False => HolTerm::False,
            TermKind::Not(f) => HolTerm::not(self.term(f)?),
            TermKind::And(f, g) => HolTerm::and(self.term(f)?, self.term(g)?),
            TermKind::Or(f, g) => HolTerm::or(self.term(f)?, self.term(g)?),
            TermKind::Iff(f, g) => HolTerm::Iff(Box::new(self.term(f)?), Box::new(self.term(g)?)),
            TermKind::Forall(x, a, f) => HolTerm::forall(x, translate_type(a), self.guard(x, a, self.term(f)?)?),
            TermKind::Exists(x, a, f) => {
                let body = self.term(f)?;
                let body = if matches!(a.kind, TypeKind::Bool) {
                    body
                } else {
                    HolTerm::and(self.typing_predicate(a, &HolTerm::var(x))?, body)
                };
                HolTerm::exists(x, translate_type(a), body)
            }
        })
    }

    /// `P_A(x) ⟹ body`, with the trivial Boolean guard left out.
    fn guard(&self, x: &str, a: &TypeExpr, body: HolTerm) -> Result<HolTerm, TranslateError> {
        if matches!(a.kind, TypeKind::Bool) && !self.opts.raw_core {
            return Ok(body);
        }
        Ok(HolTerm::implies(self.typing_predicate(a, &HolTerm::var(x))?, body))
    }

    fn finish(&self, f: HolTerm) -> HolTerm {
        let f = f.beta();
        if self.opts.raw_core {
            f.expand_core()
        } else {
            f
        }
    }

    pub fn translate_theory(&self) -> Result<HolTheory, TranslateError> {
        let mut out = HolTheory::default();
        for d in &self.sig.decls {
            match d {
                SigDecl::Type { name, telescope } => self.type_decl(name, telescope, &mut out)?,
                SigDecl::Const { name, ty } => {
                    out.decls.push(HolDecl::Const(name.clone(), translate_type(ty)));
                    let ax = self.typing_predicate(ty, &HolTerm::cnst(name))?;
                    let n = self.typing_names[name].clone();
                    out.owners.insert(n.clone(), name.clone());
                    out.decls.push(HolDecl::Axiom(n, self.finish(ax)));
                }
                SigDecl::Axiom { name, formula } => {
                    let f = self.translate_term(formula)?;
                    out.decls.push(HolDecl::Axiom(name.clone(), self.finish(f)));
                }
            }
        }
        Ok(out)
    }

    fn type_decl(&self, name: &str, tel: &Telescope, out: &mut HolTheory) -> Result<(), TranslateError> {
        let a = HolType::Base(name.to_string());
        let arg_tys: Vec<HolType> = tel.iter().map(|(_, t)| translate_type(t)).collect();
        out.decls.push(HolDecl::Type(name.to_string()));
        let rel = self.rel_name(name);
        out.decls.push(HolDecl::Const(
            rel.clone(),
            HolType::arrows(arg_tys.iter().cloned().chain([a.clone(), a.clone()]), HolType::Bool),
        ));
        let xs: Vec<Sym> = tel.iter().map(|(x, _)| x.clone()).collect();
        let used: BTreeSet<Sym> = xs.iter().cloned().collect();
        let u = fresh_or_keep("u", &used);
        let v = fresh_or_keep("v", &used);
        let w = fresh_or_keep("w", &used);
        let r = |p: &str, q: &str| {
            HolTerm::apps(HolTerm::cnst(&rel), xs.iter().map(|x| HolTerm::var(x)).chain([HolTerm::var(p), HolTerm::var(q)]))
        };
        let close = |body: HolTerm, vars: &[&Sym]| {
            let inner = vars.iter().rev().fold(body, |acc, x| HolTerm::forall(x, a.clone(), acc));
            xs.iter().zip(&arg_tys).rev().fold(inner, |acc, (x, t)| HolTerm::forall(x, t.clone(), acc))
        };
        let trans = close(HolTerm::implies(r(&u, &v), HolTerm::implies(r(&v, &w), r(&u, &w))), &[&u, &v, &w]);
        let sym = close(HolTerm::implies(r(&u, &v), r(&v, &u)), &[&u, &v]);
        let per = close(
            HolTerm::implies(
                r(&v, &v),
                HolTerm::eq(r(&u, &v), HolTerm::eq(HolTerm::var(&u), HolTerm::var(&v), a.clone()), HolType::Bool),
            ),
            &[&u, &v],
        );
        let [n_trans, n_sym, n_per] = self.per_axiom_names[name].clone();
        for n in [&n_trans, &n_sym, &n_per] {
            out.owners.insert(n.clone(), rel.clone());
        }
        out.decls.push(HolDecl::Axiom(n_trans, self.finish(trans)));
        out.decls.push(HolDecl::Axiom(n_sym, self.finish(sym)));
        out.decls.push(HolDecl::Axiom(n_per, self.finish(per)));
        Ok(())
    }

    /// Context entries become guarded universal hypotheses of `Φ(goal)`.
    pub fn translate_obligation(&self, ob: &Obligation) -> Result<HolConjecture, TranslateError> {
        let mut f = self.translate_term(&ob.goal)?;
        for e in ob.context.entries.iter().rev() {
            f = match e {
                CtxEntry::VarDecl(x, a) => HolTerm::forall(x, translate_type(a), self.guard(x, a, f)?),
                CtxEntry::Assumption(_, h) => HolTerm::implies(self.translate_term(h)?, f),
            };
        }
        Ok(HolConjecture { name: ob.id.clone(), formula: self.finish(f), source: ob.origin.clone() })
    }

    /// Translates a closed DHOL formula as a conjecture.
    pub fn translate_formula(&self, name: &str, f: &Term) -> Result<HolConjecture, TranslateError> {
        Ok(HolConjecture { name: name.to_string(), formula: self.finish(self.translate_term(f)?), source: name.to_string() })
    }
}

fn fresh_or_keep(base: &str, avoid: &BTreeSet<Sym>) -> Sym {
    if avoid.contains(base) {
        fresh_name(base, avoid)
    } else {
        base.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holcore::{check_hol_theory, hol_infer};
    use crate::kernel::{check_theory, KernelOptions};
    use crate::parser::{parse_theory_named, parse_type};

    const SRC: &str = "
        type nat  const zero : nat  const succ : nat -> nat
        type obj  type list  const nil : list
        type llist (n : nat)  const lnil : llist zero
        const length : list -> nat
        const contains : list -> obj -> bool
    ";

    fn sig() -> Signature {
        let th = parse_theory_named(SRC, "t", "t").unwrap();
        let r = check_theory(&th, KernelOptions::default());
        assert!(r.accepted());
        r.signature
    }

    fn ty(s: &str, bound: &[&str]) -> TypeExpr {
        expand_sugar_type(&parse_type(s, bound).unwrap())
    }

    #[test]
    fn erasure() {
        assert_eq!(translate_type(&ty("llist n", &["n"])), HolType::Base("llist".into()));
        assert_eq!(
            translate_type(&ty("(m:nat) -> llist m", &[])),
            HolType::arrow(HolType::Base("nat".into()), HolType::Base("llist".into()))
        );
    }

    #[test]
    fn base_and_bool_relations() {
        let s = sig();
        let tr = Translator::new(&s, TranslateOptions::default());
        let (a, b) = (HolTerm::var("s"), HolTerm::var("t"));
        assert!(tr.per_relation(&TypeExpr::bool(), &a, &b).unwrap().alpha_eq(&HolTerm::eq(a.clone(), b.clone(), HolType::Bool)));
        let want = HolTerm::apps(HolTerm::cnst("rel_llist"), [HolTerm::var("n"), a.clone(), a.clone()]);
        assert!(tr.typing_predicate(&ty("llist n", &["n"]), &a).unwrap().alpha_eq(&want));
    }

    #[test]
    fn theory_is_well_typed() {
        let s = sig();
        let th = Translator::new(&s, TranslateOptions::default()).translate_theory().unwrap();
        check_hol_theory(&th).unwrap();
        let names: Vec<_> = th.axioms().map(|(n, _)| n.as_str()).collect();
        assert!(names.contains(&"llist_trans") && names.contains(&"llist_sym") && names.contains(&"llist_per"));
        assert!(names.contains(&"typing_zero"));
        let raw = Translator::new(&s, TranslateOptions { raw_core: true }).translate_theory().unwrap();
        check_hol_theory(&raw).unwrap();
        for (_, f) in raw.axioms() {
            assert_eq!(hol_infer(&raw, &[], f).unwrap(), HolType::Bool);
        }
    }

    #[test]
    fn mangled_names_avoid_collisions() {
        let th = parse_theory_named("type a const rel_a : bool", "t", "t").unwrap();
        let r = check_theory(&th, KernelOptions::default());
        let tr = Translator::new(&r.signature, TranslateOptions::default());
        assert_ne!(tr.rel_name("a"), "rel_a");
        check_hol_theory(&tr.translate_theory().unwrap()).unwrap();
    }
}
