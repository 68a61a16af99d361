//! Brute-force finite models for HOL theories.
//!
//! Every value of a type is identified with its index in a fixed
//! enumeration: booleans are 0/1, elements of a carrier of size n are
//! 0..n, and a function `A -> B` is the mixed-radix number whose digit `i`
//! (base |B|) is its value on argument `i`. Function spaces are full, so
//! equality at every type is equality of indices.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::holcore::{HolTerm, HolTheory, HolType};
use crate::syntax::Sym;

/// Largest type whose elements the oracle is willing to iterate over.
pub const MAX_ITERATED: u64 = 1 << 20;

#[derive(Clone, Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("type `{0}` has no carrier in the model")]
    NoCarrier(String),
    #[error("type {0} is too large to enumerate")]
    TooLarge(String),
    #[error("ill-typed term: {0}")]
    IllTyped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    pub carriers: BTreeMap<Sym, u64>,
    /// Constant name to its type and value index.
    pub values: BTreeMap<Sym, (HolType, u64)>,
}

/// Number of elements of `a` under the given carrier sizes.
pub fn type_size(a: &HolType, carriers: &BTreeMap<Sym, u64>) -> Result<u64, OracleError> {
    match a {
        HolType::Bool => Ok(2),
        HolType::Base(n) => carriers.get(n).copied().ok_or_else(|| OracleError::NoCarrier(n.clone())),
        HolType::Arrow(d, c) => {
            let d = type_size(d, carriers)?;
            let c = type_size(c, carriers)?;
            let d32 = u32::try_from(d).map_err(|_| OracleError::TooLarge(a.to_string()))?;
            c.checked_pow(d32).ok_or_else(|| OracleError::TooLarge(a.to_string()))
        }
    }
}

impl FiniteModel {
    /// Renders a value of type `a` as nested tables.
    pub fn render_value(&self, a: &HolType, v: u64) -> String {
        match a {
            HolType::Bool => (v == 1).to_string(),
            HolType::Base(n) => format!("{n}#{v}"),
            HolType::Arrow(d, c) => {
                let (Ok(ds), Ok(cs)) = (type_size(d, &self.carriers), type_size(c, &self.carriers)) else {
                    return format!("<{v}>");
                };
                let mut parts = Vec::new();
                let mut rest = v;
                for i in 0..ds {
                    parts.push(format!("{} -> {}", self.render_value(d, i), self.render_value(c, rest % cs)));
                    rest /= cs;
                }
                format!("{{{}}}", parts.join(", "))
            }
        }
    }
}

impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, s) in &self.carriers {
            writeln!(f, "  |{n}| = {s}")?;
        }
        for (c, (a, v)) in &self.values {
            writeln!(f, "  {c} = {}", self.render_value(a, *v))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Compiled terms

#[derive(Clone, Debug)]
enum Ex {
    Const(usize),
    Var(usize),
    Lit(u64),
    App(Box<Ex>, Box<Ex>, u64),
    Lam(usize, u64, u64, Box<Ex>),
    Eq(Box<Ex>, Box<Ex>),
    Implies(Box<Ex>, Box<Ex>),
    And(Box<Ex>, Box<Ex>),
    Or(Box<Ex>, Box<Ex>),
    Iff(Box<Ex>, Box<Ex>),
    Not(Box<Ex>),
    Forall(usize, u64, Box<Ex>),
    Exists(usize, u64, Box<Ex>),
}

struct Compiler<'a> {
    carriers: &'a BTreeMap<Sym, u64>,
    consts: &'a HashMap<Sym, (usize, HolType)>,
}

impl Compiler<'_> {
    fn iterable(&self, a: &HolType) -> Result<u64, OracleError> {
        let n = type_size(a, self.carriers)?;
        if n > MAX_ITERATED {
            return Err(OracleError::TooLarge(a.to_string()));
        }
        Ok(n)
    }

    fn compile(&self, t: &HolTerm, scope: &mut Vec<(Sym, HolType)>) -> Result<(Ex, HolType), OracleError> {
        use HolTerm as H;
        let b = |e: Ex| Box::new(e);
        let boolean = |e: Ex| Ok((e, HolType::Bool));
        match t {
            H::Const(c) => match self.consts.get(c) {
                Some((i, a)) => Ok((Ex::Const(*i), a.clone())),
                None => Err(OracleError::Unbound(c.clone())),
            },
            H::Var(x) => match scope.iter().rposition(|(y, _)| y == x) {
                Some(i) => Ok((Ex::Var(i), scope[i].1.clone())),
                None => Err(OracleError::Unbound(x.clone())),
            },
            H::True => boolean(Ex::Lit(1)),
            H::False => boolean(Ex::Lit(0)),
            H::App(f, a) => {
                let (fe, ft) = self.compile(f, scope)?;
                let (ae, _) = self.compile(a, scope)?;
                let HolType::Arrow(_, c) = ft else {
                    return Err(OracleError::IllTyped(format!("{t:?}")));
                };
                let cs = type_size(&c, self.carriers)?;
                Ok((Ex::App(b(fe), b(ae), cs), *c))
            }
            H::Lam(x, a, body) => {
                let ds = self.iterable(a)?;
                let slot = scope.len();
                scope.push((x.clone(), a.clone()));
                let r = self.compile(body, scope);
                scope.pop();
                let (be, bt) = r?;
                let full = HolType::arrow(a.clone(), bt.clone());
                type_size(&full, self.carriers)?;
                let cs = type_size(&bt, self.carriers)?;
                Ok((Ex::Lam(slot, ds, cs, b(be)), full))
            }
            H::Forall(x, a, body) | H::Exists(x, a, body) => {
                let n = self.iterable(a)?;
                let slot = scope.len();
                scope.push((x.clone(), a.clone()));
                let r = self.compile(body, scope);
                scope.pop();
                let (be, _) = r?;
                boolean(if matches!(t, H::Forall(..)) { Ex::Forall(slot, n, b(be)) } else { Ex::Exists(slot, n, b(be)) })
            }
            H::Eq(l, r, _) => {
                let (le, _) = self.compile(l, scope)?;
                let (re, _) = self.compile(r, scope)?;
                boolean(Ex::Eq(b(le), b(re)))
            }
            H::Not(f) => boolean(Ex::Not(b(self.compile(f, scope)?.0))),
            H::Implies(p, q) | H::And(p, q) | H::Or(p, q) | H::Iff(p, q) => {
                let pe = b(self.compile(p, scope)?.0);
                let qe = b(self.compile(q, scope)?.0);
                boolean(match t {
                    H::Implies(..) => Ex::Implies(pe, qe),
                    H::And(..) => Ex::And(pe, qe),
                    H::Or(..) => Ex::Or(pe, qe),
                    _ => Ex::Iff(pe, qe),
                })
            }
        }
    }
}

fn eval(e: &Ex, consts: &[u64], env: &mut Vec<u64>) -> u64 {
    match e {
        Ex::Const(i) => consts[*i],
        Ex::Var(i) => env[*i],
        Ex::Lit(v) => *v,
        Ex::App(f, a, cs) => {
            let fv = eval(f, consts, env);
            let av = eval(a, consts, env);
            // av < |dom|, so cs^av <= cs^(|dom|-1) fits whenever fv does.
            (fv / cs.pow(av as u32)) % cs
        }
        Ex::Lam(slot, ds, cs, body) => {
            env.truncate(*slot);
            let mut acc = 0u64;
            let mut mul = 1u64;
            for i in 0..*ds {
                env.push(i);
                let v = eval(body, consts, env);
                env.truncate(*slot);
                acc += v * mul;
                mul = mul.wrapping_mul(*cs);
            }
            acc
        }
        Ex::Eq(l, r) => (eval(l, consts, env) == eval(r, consts, env)) as u64,
        Ex::Implies(p, q) => (eval(p, consts, env) == 0 || eval(q, consts, env) == 1) as u64,
        Ex::And(p, q) => (eval(p, consts, env) == 1 && eval(q, consts, env) == 1) as u64,
        Ex::Or(p, q) => (eval(p, consts, env) == 1 || eval(q, consts, env) == 1) as u64,
        Ex::Iff(p, q) => (eval(p, consts, env) == eval(q, consts, env)) as u64,
        Ex::Not(p) => 1 - eval(p, consts, env),
        Ex::Forall(slot, n, body) | Ex::Exists(slot, n, body) => {
            let want = matches!(e, Ex::Exists(..)) as u64;
            env.truncate(*slot);
            for i in 0..*n {
                env.push(i);
                let v = eval(body, consts, env);
                env.truncate(*slot);
                if v == want {
                    return want;
                }
            }
            1 - want
        }
    }
}

/// Evaluates `t` in `model` with the given variable bindings.
pub fn eval_term(model: &FiniteModel, env: &[(Sym, HolType, u64)], t: &HolTerm) -> Result<u64, OracleError> {
    let mut consts = HashMap::new();
    let mut values = Vec::new();
    for (i, (c, (a, v))) in model.values.iter().enumerate() {
        consts.insert(c.clone(), (i, a.clone()));
        values.push(*v);
    }
    let comp = Compiler { carriers: &model.carriers, consts: &consts };
    let mut scope: Vec<(Sym, HolType)> = env.iter().map(|(x, a, _)| (x.clone(), a.clone())).collect();
    let (e, _) = comp.compile(t, &mut scope)?;
    let mut slots: Vec<u64> = env.iter().map(|(_, _, v)| *v).collect();
    Ok(eval(&e, &values, &mut slots))
}

pub fn eval_formula(model: &FiniteModel, t: &HolTerm) -> Result<bool, OracleError> {
    Ok(eval_term(model, &[], t)? == 1)
}

// ---------------------------------------------------------------------------
// Search

struct OutOfBudget;

/// Backtracking over constant values. `checks[k]` holds formulas whose
/// constants are all among the fixed values plus the first `k` new ones.
struct Search<'a> {
    sizes: Vec<u64>,
    checks: Vec<Vec<Ex>>,
    budget: &'a Cell<u64>,
}

impl Search<'_> {
    fn run(
        &self,
        base: usize,
        values: &mut Vec<u64>,
        accept: &mut dyn FnMut(&[u64]) -> Result<bool, OutOfBudget>,
    ) -> Result<bool, OutOfBudget> {
        let level = values.len() - base;
        if self.checks[level].iter().any(|e| eval(e, values, &mut Vec::new()) != 1) {
            return Ok(false);
        }
        if level == self.sizes.len() {
            return accept(values);
        }
        for v in 0..self.sizes[level] {
            let left = self.budget.get();
            if left == 0 {
                return Err(OutOfBudget);
            }
            self.budget.set(left - 1);
            values.push(v);
            let found = self.run(base, values, accept)?;
            values.pop();
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// All size vectors in `1..=bound`, ordered by maximum and then
/// lexicographically.
fn size_vectors(n: usize, bound: u64) -> Vec<Vec<u64>> {
    let mut all = vec![vec![]];
    for _ in 0..n {
        all = all
            .iter()
            .flat_map(|v: &Vec<u64>| {
                (1..=bound).map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    all.sort_by_key(|v| (v.iter().copied().max().unwrap_or(0), v.clone()));
    all
}

fn types_in(a: &HolType, out: &mut BTreeSet<Sym>) {
    match a {
        HolType::Bool => {}
        HolType::Base(n) => {
            out.insert(n.clone());
        }
        HolType::Arrow(d, c) => {
            types_in(d, out);
            types_in(c, out);
        }
    }
}

fn term_types(t: &HolTerm, out: &mut BTreeSet<Sym>) {
    t.visit(&mut |s| match s {
        HolTerm::Lam(_, a, _) | HolTerm::Forall(_, a, _) | HolTerm::Exists(_, a, _) | HolTerm::Eq(_, _, a) => {
            types_in(a, out)
        }
        _ => {}
    });
}

enum Failure {
    Budget,
    Oracle(OracleError),
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::Oracle(e)
    }
}

/// One search stage: `fixed` constants already have values, `free` ones are
/// enumerated, and every formula in `formulas` must come out true.
fn stage(
    carriers: &BTreeMap<Sym, u64>,
    fixed: &[(Sym, HolType, u64)],
    free: &[(Sym, HolType)],
    formulas: &[&HolTerm],
    budget: &Cell<u64>,
    accept: &mut dyn FnMut(&[u64]) -> Result<bool, OutOfBudget>,
) -> Result<bool, Failure> {
    let mut index = HashMap::new();
    for (i, (c, a, _)) in fixed.iter().enumerate() {
        index.insert(c.clone(), (i, a.clone()));
    }
    let mut sizes = Vec::new();
    for (i, (c, a)) in free.iter().enumerate() {
        index.insert(c.clone(), (fixed.len() + i, a.clone()));
        sizes.push(type_size(a, carriers)?);
    }
    let comp = Compiler { carriers, consts: &index };
    let mut checks = vec![Vec::new(); free.len() + 1];
    for f in formulas {
        let (e, _) = comp.compile(f, &mut Vec::new())?;
        let level = f
            .consts()
            .iter()
            .filter_map(|c| index.get(c).map(|(i, _)| *i))
            .filter(|&i| i >= fixed.len())
            .map(|i| i - fixed.len() + 1)
            .max()
            .unwrap_or(0);
        checks[level].push(e);
    }
    let search = Search { sizes, checks, budget };
    let mut values: Vec<u64> = fixed.iter().map(|(_, _, v)| *v).collect();
    search.run(fixed.len(), &mut values, accept).map_err(|_| Failure::Budget)
}

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub bound: u64,
    /// Maximum number of constant assignments tried.
    pub budget: u64,
}

impl OracleConfig {
    pub fn new(bound: u64) -> Self {
        OracleConfig { bound, budget: 2_000_000 }
    }
}

#[derive(Clone, Debug)]
pub enum OracleVerdict {
    /// No countermodel with carriers of size at most `bound`.
    Valid { bound: u64 },
    Counterexample(FiniteModel),
    Inconclusive(String),
}

impl OracleVerdict {
    pub fn label(&self) -> String {
        match self {
            OracleVerdict::Valid { bound } => format!("finite-valid({bound})"),
            OracleVerdict::Counterexample(_) => "counterexample".into(),
            OracleVerdict::Inconclusive(_) => "inconclusive".into(),
        }
    }
}

/// Relevant constants and axiom indices for `goal`. Axioms owned by a
/// constant follow their owner; other axioms are pulled in by any shared
/// constant, and constant-free axioms always count.
fn relevance(theory: &HolTheory, axioms: &[(&Sym, &HolTerm)], goal: &HolTerm) -> (BTreeSet<Sym>, Vec<usize>) {
    let mut cs = goal.consts();
    let mut chosen = vec![false; axioms.len()];
    loop {
        let mut changed = false;
        for (i, (name, f)) in axioms.iter().enumerate() {
            if chosen[i] {
                continue;
            }
            let fc = f.consts();
            let take = match theory.owners.get(*name) {
                Some(owner) => cs.contains(owner),
                None => fc.is_empty() || fc.iter().any(|c| cs.contains(c)),
            };
            if take {
                chosen[i] = true;
                changed = true;
                cs.extend(fc);
            }
        }
        if !changed {
            break;
        }
    }
    (cs, (0..axioms.len()).filter(|&i| chosen[i]).collect())
}

/// Searches for a model of `theory` with carriers of size at most
/// `cfg.bound` in which `goal` is false.
pub fn check_valid_finite(theory: &HolTheory, goal: &HolTerm, cfg: OracleConfig) -> OracleVerdict {
    if cfg.bound == 0 {
        return OracleVerdict::Inconclusive("bound must be positive".into());
    }
    match countermodel(theory, goal, cfg) {
        Ok(Some(m)) => OracleVerdict::Counterexample(m),
        Ok(None) => OracleVerdict::Valid { bound: cfg.bound },
        Err(Failure::Budget) => OracleVerdict::Inconclusive("search budget exhausted".into()),
        Err(Failure::Oracle(e)) => OracleVerdict::Inconclusive(e.to_string()),
    }
}

fn countermodel(theory: &HolTheory, goal: &HolTerm, cfg: OracleConfig) -> Result<Option<FiniteModel>, Failure> {
    let all_consts: Vec<(Sym, HolType)> = theory.consts().map(|(c, a)| (c.clone(), a.clone())).collect();
    let axioms: Vec<(&Sym, &HolTerm)> = theory.axioms().collect();
    let (rel_consts, rel_axioms) = relevance(theory, &axioms, goal);
    if let Some(c) = rel_consts.iter().find(|c| theory.const_type(c).is_none()) {
        return Err(OracleError::Unbound(c.clone()).into());
    }
    let (consts, rest_consts): (Vec<_>, Vec<_>) = all_consts.into_iter().partition(|(c, _)| rel_consts.contains(c));

    let mut used = BTreeSet::new();
    term_types(goal, &mut used);
    consts.iter().for_each(|(_, a)| types_in(a, &mut used));
    rel_axioms.iter().for_each(|&i| term_types(axioms[i].1, &mut used));
    let (types, rest_types): (Vec<Sym>, Vec<Sym>) = theory.types().cloned().partition(|t| used.contains(t));
    if let Some(t) = used.iter().find(|t| !theory.has_type(t)) {
        return Err(OracleError::NoCarrier(t.clone()).into());
    }

    let negated = HolTerm::not(goal.clone());
    let formulas: Vec<&HolTerm> = rel_axioms.iter().map(|&i| axioms[i].1).chain([&negated]).collect();
    let rest_axioms: Vec<&HolTerm> =
        (0..axioms.len()).filter(|i| !rel_axioms.contains(i)).map(|i| axioms[i].1).collect();
    let budget = Cell::new(cfg.budget);

    for sizes in size_vectors(types.len(), cfg.bound) {
        let carriers: BTreeMap<Sym, u64> = types.iter().cloned().zip(sizes).collect();
        let mut found = None;
        let mut failure = None;
        stage(&carriers, &[], &consts, &formulas, &budget, &mut |vals| {
            let fixed: Vec<(Sym, HolType, u64)> =
                consts.iter().zip(vals).map(|((c, a), v)| (c.clone(), a.clone(), *v)).collect();
            match extend(&carriers, &fixed, &rest_types, &rest_consts, &rest_axioms, cfg.bound, &budget) {
                Ok(Some(m)) => {
                    found = Some(m);
                    Ok(true)
                }
                Ok(None) => Ok(false),
                Err(Failure::Budget) => Err(OutOfBudget),
                Err(f) => {
                    failure = Some(f);
                    Ok(true)
                }
            }
        })?;
        if let Some(f) = failure {
            return Err(f);
        }
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Completes a partial countermodel so that the remaining axioms hold.
fn extend(
    carriers: &BTreeMap<Sym, u64>,
    fixed: &[(Sym, HolType, u64)],
    types: &[Sym],
    consts: &[(Sym, HolType)],
    axioms: &[&HolTerm],
    bound: u64,
    budget: &Cell<u64>,
) -> Result<Option<FiniteModel>, Failure> {
    for sizes in size_vectors(types.len(), bound) {
        let mut all = carriers.clone();
        all.extend(types.iter().cloned().zip(sizes));
        let mut found = None;
        stage(&all, fixed, consts, axioms, budget, &mut |vals| {
            let mut values: BTreeMap<Sym, (HolType, u64)> =
                fixed.iter().map(|(c, a, v)| (c.clone(), (a.clone(), *v))).collect();
            for ((c, a), v) in consts.iter().zip(&vals[fixed.len()..]) {
                values.insert(c.clone(), (a.clone(), *v));
            }
            found = Some(FiniteModel { carriers: all.clone(), values });
            Ok(true)
        })?;
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holcore::HolDecl;

    fn theory(decls: Vec<HolDecl>) -> HolTheory {
        HolTheory { decls, owners: BTreeMap::new() }
    }

    fn a() -> HolType {
        HolType::Base("a".into())
    }

    fn v(x: &str) -> HolTerm {
        HolTerm::Var(x.into())
    }

    #[test]
    fn bool_reflexivity_is_valid() {
        let f = HolTerm::Forall("x".into(), HolType::Bool, Box::new(HolTerm::Eq(Box::new(v("x")), Box::new(v("x")), HolType::Bool)));
        assert!(matches!(check_valid_finite(&theory(vec![]), &f, OracleConfig::new(3)), OracleVerdict::Valid { bound: 3 }));
    }

    #[test]
    fn empty_relation_is_not_reflexive() {
        let th = theory(vec![
            HolDecl::Type("a".into()),
            HolDecl::Const("r".into(), HolType::arrows(vec![a(), a()], HolType::Bool)),
            HolDecl::Axiom(
                "empty".into(),
                HolTerm::Forall("x".into(), a(), Box::new(HolTerm::Forall("y".into(), a(), Box::new(HolTerm::Not(Box::new(
                    HolTerm::App(Box::new(HolTerm::App(Box::new(HolTerm::Const("r".into())), Box::new(v("x")))), Box::new(v("y"))),
                )))))),
            ),
        ]);
        let goal = HolTerm::Forall(
            "x".into(),
            a(),
            Box::new(HolTerm::App(Box::new(HolTerm::App(Box::new(HolTerm::Const("r".into())), Box::new(v("x")))), Box::new(v("x")))),
        );
        match check_valid_finite(&th, &goal, OracleConfig::new(2)) {
            OracleVerdict::Counterexample(m) => {
                assert_eq!(m.carriers["a"], 1);
                assert_eq!(m.values["r"].1, 0);
                assert!(!eval_formula(&m, &goal).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn asymmetric_relation_fails_symmetry() {
        let rel = HolType::arrows(vec![a(), a()], HolType::Bool);
        // r 0 1 holds and nothing else: r 0 is the function with digits
        // (0, 1), index 2, and r 1 is constantly false, index 0.
        let r_val = 2 + 4 * 0;
        let m = FiniteModel {
            carriers: BTreeMap::from([("a".to_string(), 2)]),
            values: BTreeMap::from([("r".to_string(), (rel, r_val))]),
        };
        let r = |x: HolTerm, y: HolTerm| HolTerm::App(Box::new(HolTerm::App(Box::new(HolTerm::Const("r".into())), Box::new(x))), Box::new(y));
        let sym = HolTerm::Forall("x".into(), a(), Box::new(HolTerm::Forall("y".into(), a(), Box::new(HolTerm::Implies(
            Box::new(r(v("x"), v("y"))),
            Box::new(r(v("y"), v("x"))),
        )))));
        assert!(eval_term(&m, &[], &r(HolTerm::Const("z".into()), v("x"))).is_err());
        assert_eq!(eval_term(&m, &[("x".into(), a(), 0), ("y".into(), a(), 1)], &r(v("x"), v("y"))).unwrap(), 1);
        assert!(!eval_formula(&m, &sym).unwrap());
        assert!(m.to_string().contains("|a| = 2"));
    }

    #[test]
    fn oversized_quantifier_is_inconclusive() {
        let big = HolType::arrows(vec![a(), a(), a()], a());
        let th = theory(vec![HolDecl::Type("a".into())]);
        let f = HolTerm::Forall("f".into(), big.clone(), Box::new(HolTerm::Eq(Box::new(v("f")), Box::new(v("f")), big)));
        assert!(matches!(check_valid_finite(&th, &f, OracleConfig::new(6)), OracleVerdict::Inconclusive(_)));
    }

    #[test]
    fn size_vectors_are_ordered_by_maximum() {
        let v = size_vectors(2, 2);
        assert_eq!(v, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(size_vectors(0, 3), vec![Vec::<u64>::new()]);
    }
}
