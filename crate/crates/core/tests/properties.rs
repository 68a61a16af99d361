mod common;

use proptest::prelude::*;
use rand::Rng;

use dhol::holcore::{emit_tptp, hol_infer, read_thf, tptp_rename, HolType};
use dhol::kernel::{checker_for, KernelOptions};
use dhol::parser::{parse_term, parse_theory_named, parse_type, print_term, print_type};
use dhol::pipeline::{compile, PipelineOptions};
use dhol::subtype::normalize;
use dhol::syntax::{expand_sugar, is_core, resugar, subst, Context, Span, Term, TermKind, TypeExpr, TypeKind};
use dhol::translate::{translate_type, TranslateOptions, Translator};

use common::{Gen, G};

/// A term of a random type with the free variable `z : b0`.
fn open_term(seed: u64, refined: bool) -> Term {
    let mut g = Gen::new(seed, refined);
    let a = g.ty(2);
    let text = g.term(&a, 4, &mut vec![("z".to_string(), G::B0)]);
    parse_term(&text, &["z"]).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// A type built from `A`, `B`, `bool`, refinements, quotients and Pi.
fn type_text(g: &mut Gen, depth: u32, n: &mut usize) -> String {
    *n += 1;
    let k = if depth == 0 { 3 } else { 8 };
    match g.rng.gen_range(0..k) {
        0 => "A".into(),
        1 => "B".into(),
        2 => "bool".into(),
        3 => format!("({} | p{n})", type_text(g, depth - 1, n)),
        4 => format!("({} / r{n})", type_text(g, depth - 1, n)),
        5 => format!("((x{n} : {}) -> {})", type_text(g, depth - 1, n), type_text(g, depth - 1, n)),
        _ => format!("({} -> {})", type_text(g, depth - 1, n), type_text(g, depth - 1, n)),
    }
}

fn spans_nest(t: &Term) -> bool {
    let inside = |c: &Span| c.is_dummy() || t.span.contains(c);
    let ty_ok = |a: &TypeExpr| inside(&a.span);
    match &t.kind {
        TermKind::Lam(_, a, b) | TermKind::Forall(_, a, b) | TermKind::Exists(_, a, b) => {
            ty_ok(a) && inside(&b.span) && spans_nest(b)
        }
        TermKind::App(f, a)
        | TermKind::Eq(f, a, _)
        | TermKind::Implies(f, a)
        | TermKind::And(f, a)
        | TermKind::Or(f, a)
        | TermKind::Iff(f, a) => inside(&f.span) && inside(&a.span) && spans_nest(f) && spans_nest(a),
        TermKind::Not(f) => inside(&f.span) && spans_nest(f),
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>(), refined in any::<bool>()) {
        let t = open_term(seed, refined);
        let back = parse_term(&print_term(&t), &["z"]).unwrap();
        prop_assert!(back.alpha_eq(&t), "{}", print_term(&t));
    }

    #[test]
    fn spans_are_nested(seed in any::<u64>()) {
        let t = open_term(seed, true);
        prop_assert!(!t.span.is_dummy());
        prop_assert!(spans_nest(&t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn subst_of_variable_by_itself_is_identity(seed in any::<u64>()) {
        let t = open_term(seed, true);
        prop_assert!(subst(&t, "z", &Term::var("z")).alpha_eq(&t));
    }

    #[test]
    fn subst_free_variables(seed in any::<u64>(), other in any::<u64>()) {
        let t = open_term(seed, true);
        let s = open_term(other, false);
        let r = subst(&t, "z", &s);
        let mut allowed = t.free_vars();
        allowed.remove("z");
        allowed.extend(s.free_vars());
        prop_assert!(r.free_vars().is_subset(&allowed));
        if t.has_free("z") {
            prop_assert_eq!(r.free_vars().contains("z"), s.has_free("z"));
        } else {
            prop_assert!(r.alpha_eq(&t));
        }
    }

    #[test]
    fn alpha_equivalence_is_an_equivalence(seed in any::<u64>(), other in any::<u64>()) {
        let t = open_term(seed, true);
        let u = open_term(other, true);
        let t2 = parse_term(&print_term(&t), &["z"]).unwrap();
        prop_assert!(t.alpha_eq(&t));
        prop_assert_eq!(t.alpha_eq(&u), u.alpha_eq(&t));
        prop_assert_eq!(t.alpha_eq(&u), t2.alpha_eq(&u));
    }

    #[test]
    fn expansion_is_core_and_resugaring_inverts_it(seed in any::<u64>()) {
        let t = open_term(seed, true);
        let e = expand_sugar(&t);
        prop_assert!(is_core(&e));
        prop_assert!(expand_sugar(&resugar(&e)).alpha_eq(&e));
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>(), qcod in any::<bool>()) {
        let mut g = Gen::new(seed, false);
        let text = type_text(&mut g, 3, &mut 0);
        let a = parse_type(&text, &[]).unwrap();
        let opts = KernelOptions { quot_cod_axiom: qcod };
        let once = normalize(&a, opts).to_type();
        let twice = normalize(&once, opts).to_type();
        prop_assert!(twice.alpha_eq(&once), "{} => {}", text, print_type(&once));
    }

    #[test]
    fn normal_forms_have_plain_or_dependent_cores(seed in any::<u64>()) {
        let mut g = Gen::new(seed, false);
        let text = type_text(&mut g, 3, &mut 0);
        let nf = normalize(&parse_type(&text, &[]).unwrap(), KernelOptions::default());
        prop_assert!(!matches!(nf.core.kind, TypeKind::Refine(..) | TypeKind::Quotient(..)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Φ(t) : Φ(A) for every accepted `t : A`, and obligations are formulas.
    #[test]
    fn translation_preserves_typing(seed in any::<u64>(), refined in any::<bool>()) {
        let mut g = Gen::new(seed, refined);
        let (mut src, terms) = g.theory(6);
        for (i, (t, a)) in terms.iter().enumerate() {
            if *a == G::Bool {
                src.push_str(&format!("conjecture goal{i} : {t}\n"));
            }
        }
        let th = parse_theory_named(&src, "random", "random").unwrap();
        let Ok(mut ck) = checker_for(&th, KernelOptions::default()) else { return Ok(()) };
        let sig = ck.sig.clone();
        let tr = Translator::new(&sig, TranslateOptions::default());
        let hol = tr.translate_theory().unwrap();
        for (t, _) in &terms {
            let p = ck.prepare_term(&parse_term(t, &[]).unwrap()).unwrap();
            ck.begin("t", &Span::default());
            let Ok((e, a)) = ck.infer(&Context::new(), &p) else { continue };
            prop_assert_eq!(hol_infer(&hol, &[], &tr.translate_term(&e).unwrap()).unwrap(), translate_type(&a));
        }
        let compiled = compile(&th, &PipelineOptions::default()).unwrap();
        for p in &compiled.problems {
            prop_assert_eq!(hol_infer(&compiled.hol, &[], &p.formula).unwrap(), HolType::Bool);
        }
    }

    /// Emitted problems read back to the renamed formulas.
    #[test]
    fn thf_round_trip(seed in any::<u64>(), refined in any::<bool>(), raw in any::<bool>()) {
        let mut g = Gen::new(seed, refined);
        let (mut src, terms) = g.theory(4);
        for (i, (t, a)) in terms.iter().enumerate() {
            if *a == G::Bool {
                src.push_str(&format!("conjecture goal{i} : {t}\n"));
            }
        }
        let th = parse_theory_named(&src, "random", "random").unwrap();
        let mut opts = PipelineOptions::default();
        opts.translate.raw_core = raw;
        let Ok(compiled) = compile(&th, &opts) else { return Ok(()) };
        for p in &compiled.problems {
            let prob = read_thf(&emit_tptp(&compiled.hol, p)).unwrap();
            prop_assert_eq!(prob.conjectures.len(), 1);
            prop_assert!(prob.conjectures[0].1.alpha_eq(&tptp_rename(&compiled.hol, &p.formula)));
        }
    }

    /// On plain types subtyping and equality coincide, obligations included.
    #[test]
    fn subtyping_is_conservative(seed in any::<u64>()) {
        let mut g = Gen::new(seed, false);
        let (src, _) = g.theory(0);
        let th = parse_theory_named(&src, "random", "random").unwrap();
        let a_src = g.plain_type(3, &mut Vec::new());
        let b_src = g.perturb(&a_src);
        let run = |sub: bool| {
            let mut ck = checker_for(&th, KernelOptions::default()).unwrap();
            let a = ck.prepare_type(&parse_type(&a_src, &[]).unwrap()).unwrap();
            let b = ck.prepare_type(&parse_type(&b_src, &[]).unwrap()).unwrap();
            let wf = ck.check_type(&Context::new(), &a).is_ok() && ck.check_type(&Context::new(), &b).is_ok();
            ck.take_obligations();
            let ok = if sub { ck.subtype_check(&Context::new(), &a, &b) } else { ck.type_equal(&Context::new(), &a, &b) }.is_ok();
            let obs: Vec<Term> = ck.obligations().iter().map(|o| expand_sugar(&o.closed()).beta()).collect();
            (wf, ok, obs)
        };
        let (wf, s_ok, s_obs) = run(true);
        prop_assume!(wf);
        let (_, e_ok, e_obs) = run(false);
        prop_assert_eq!(s_ok, e_ok, "{} vs {}", a_src, b_src);
        if s_ok {
            prop_assert!(s_obs.iter().all(|x| e_obs.iter().any(|y| x.alpha_eq(y))));
            prop_assert!(e_obs.iter().all(|y| s_obs.iter().any(|x| x.alpha_eq(y))));
        }
    }
}
