//! Random theories, terms and types for the property and acceptance tests.
//!
//! Everything is produced as concrete syntax so that the parser is part of
//! every round trip. The generator tracks simple types only; dependent
//! structure enters through the `fam` family and its two constants, whose
//! mismatched indices make the checker emit obligations.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum G {
    Bool,
    B0,
    B1,
    /// `r0 := b0 | p0`
    R0,
    /// `q0 := b1 / e0`
    Q0,
    Arr(Box<G>, Box<G>),
}

impl G {
    pub fn arr(a: G, b: G) -> G {
        G::Arr(Box::new(a), Box::new(b))
    }

    pub fn text(&self) -> String {
        match self {
            G::Bool => "bool".into(),
            G::B0 => "b0".into(),
            G::B1 => "b1".into(),
            G::R0 => "r0".into(),
            G::Q0 => "q0".into(),
            G::Arr(a, b) => format!("({} -> {})", a.text(), b.text()),
        }
    }
}

pub const PREAMBLE_PLAIN: &str = "\
type b0
type b1
type fam (n : b0)
const k0 : b0
const k1 : b0
const j0 : b1
const s0 : b0 -> b0
const g0 : b0 -> b1
const mk : (n : b0) -> fam n
const fget : (n : b0) -> fam n -> b1
const q : b1 -> bool
";

pub const PREAMBLE_REFINED: &str = "\
const p0 : b0 -> bool
const e0 : b1 -> b1 -> bool
axiom e0_refl : forall x : b1. e0 x x
axiom e0_sym : forall x y : b1. e0 x y => e0 y x
axiom e0_trans : forall x y z : b1. e0 x y => e0 y z => e0 x z
def r0 := b0 | p0
def q0 := b1 / e0
const w0 : r0
const v0 : q0
const h0 : r0 -> b1
";

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub refined: bool,
    consts: Vec<(String, G)>,
    fresh: usize,
}

impl Gen {
    pub fn new(seed: u64, refined: bool) -> Self {
        let mut consts = vec![
            ("k0".to_string(), G::B0),
            ("k1".to_string(), G::B0),
            ("j0".to_string(), G::B1),
            ("s0".to_string(), G::arr(G::B0, G::B0)),
            ("g0".to_string(), G::arr(G::B0, G::B1)),
            ("q".to_string(), G::arr(G::B1, G::Bool)),
        ];
        if refined {
            consts.push(("p0".into(), G::arr(G::B0, G::Bool)));
            consts.push(("e0".into(), G::arr(G::B1, G::arr(G::B1, G::Bool))));
            consts.push(("w0".into(), G::R0));
            consts.push(("v0".into(), G::Q0));
            consts.push(("h0".into(), G::arr(G::R0, G::B1)));
        }
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), refined, consts, fresh: 0 }
    }

    fn name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    pub fn ty(&mut self, depth: u32) -> G {
        let mut opts = vec![G::Bool, G::B0, G::B1];
        if self.refined {
            opts.extend([G::R0, G::Q0]);
        }
        if depth > 0 && self.rng.gen_bool(0.3) {
            let a = self.ty(depth - 1);
            let b = self.ty(depth - 1);
            return G::arr(a, b);
        }
        opts.choose(&mut self.rng).unwrap().clone()
    }

    /// A closed-over-`vars` term of type `ty` (up to subtyping).
    pub fn term(&mut self, ty: &G, depth: u32, vars: &mut Vec<(String, G)>) -> String {
        let atoms: Vec<String> = vars
            .iter()
            .chain(self.consts.iter())
            .filter(|(_, g)| g == ty || (ty == &G::B0 && g == &G::R0) || (ty == &G::Q0 && g == &G::B1))
            .map(|(n, _)| n.clone())
            .collect();
        if depth == 0 || self.rng.gen_bool(0.25) {
            if let Some(a) = atoms.choose(&mut self.rng) {
                return a.clone();
            }
        }
        if depth == 0 {
            match ty {
                G::Bool => return "true".into(),
                G::B0 | G::R0 => return "k0".into(),
                G::B1 | G::Q0 => return "j0".into(),
                G::Arr(..) => {}
            }
        }
        let d = depth.saturating_sub(1);
        match ty {
            G::Bool => match self.rng.gen_range(0..9) {
                0 => "true".into(),
                1 => format!("(~ {})", self.term(&G::Bool, d, vars)),
                2 => format!("({} => {})", self.term(&G::Bool, d, vars), self.term(&G::Bool, d, vars)),
                3 => format!("({} /\\ {})", self.term(&G::Bool, d, vars), self.term(&G::Bool, d, vars)),
                4 => format!("({} \\/ {})", self.term(&G::Bool, d, vars), self.term(&G::Bool, d, vars)),
                5 => {
                    let a = [G::B0, G::B1, G::Bool].choose(&mut self.rng).unwrap().clone();
                    format!("({} = {})", self.term(&a, d, vars), self.term(&a, d, vars))
                }
                6 => format!("(q {})", self.term(&G::B1, d, vars)),
                _ => {
                    let a = self.ty(1);
                    let x = self.name("x");
                    vars.push((x.clone(), a.clone()));
                    let body = self.term(&G::Bool, d, vars);
                    vars.pop();
                    let q = if self.rng.gen_bool(0.7) { "forall" } else { "exists" };
                    format!("({q} {x} : {}. {body})", a.text())
                }
            },
            G::B0 => match self.rng.gen_range(0..3) {
                0 => format!("(s0 {})", self.term(&G::B0, d, vars)),
                _ => ["k0", "k1"].choose(&mut self.rng).unwrap().to_string(),
            },
            G::B1 => match self.rng.gen_range(0..4) {
                0 => format!("(g0 {})", self.term(&G::B0, d, vars)),
                1 => {
                    // Indices may differ, which costs an obligation.
                    let n = self.term(&G::B0, d, vars);
                    let m = if self.rng.gen_bool(0.5) { n.clone() } else { self.term(&G::B0, d, vars) };
                    format!("(fget {n} (mk {m}))")
                }
                2 if self.refined => format!("(h0 {})", self.term(&G::R0, d, vars)),
                _ => "j0".into(),
            },
            G::R0 => match self.rng.gen_range(0..2) {
                0 => "w0".into(),
                _ => self.term(&G::B0, d, vars),
            },
            G::Q0 => match self.rng.gen_range(0..2) {
                0 => "v0".into(),
                _ => self.term(&G::B1, d, vars),
            },
            G::Arr(a, b) => {
                let x = self.name("y");
                vars.push((x.clone(), (**a).clone()));
                let body = self.term(b, d, vars);
                vars.pop();
                format!("(\\{x} : {}. {body})", a.text())
            }
        }
    }

    /// A theory with a few extra constants and axioms, and `n_terms`
    /// closed sample terms with their intended types.
    pub fn theory(&mut self, n_terms: usize) -> (String, Vec<(String, G)>) {
        let mut src = String::from(PREAMBLE_PLAIN);
        if self.refined {
            src.push_str(PREAMBLE_REFINED);
        }
        for _ in 0..self.rng.gen_range(1..4) {
            let c = self.name("c");
            let a = self.ty(2);
            src.push_str(&format!("const {c} : {}\n", a.text()));
            self.consts.push((c, a));
        }
        for _ in 0..self.rng.gen_range(0..3) {
            let n = self.name("ax");
            let f = self.term(&G::Bool, 3, &mut Vec::new());
            src.push_str(&format!("axiom {n} : {f}\n"));
        }
        let terms = (0..n_terms)
            .map(|_| {
                let a = self.ty(2);
                (self.term(&a, 4, &mut Vec::new()), a)
            })
            .collect();
        (src, terms)
    }

    /// A refinement- and quotient-free type whose `fam` indices are drawn
    /// from `k0`, `k1` and `s0` applications.
    pub fn plain_type(&mut self, depth: u32, bound: &mut Vec<String>) -> String {
        let idx = |g: &mut Gen, bound: &Vec<String>| -> String {
            let mut opts = vec!["k0".to_string(), "k1".to_string(), "(s0 k0)".to_string()];
            opts.extend(bound.iter().cloned());
            opts.choose(&mut g.rng).unwrap().clone()
        };
        match self.rng.gen_range(0..if depth == 0 { 4 } else { 6 }) {
            0 => "bool".into(),
            1 => "b0".into(),
            2 => "b1".into(),
            3 => format!("(fam {})", idx(self, bound)),
            4 => {
                let x = self.name("n");
                bound.push(x.clone());
                let c = self.plain_type(depth - 1, bound);
                bound.pop();
                format!("((({x} : b0) -> {c}))")
            }
            _ => format!("({} -> {})", self.plain_type(depth - 1, bound), self.plain_type(depth - 1, bound)),
        }
    }

    /// A second type resembling `a`: indices perturbed, binders renamed,
    /// or occasionally something unrelated.
    pub fn perturb(&mut self, a: &str) -> String {
        if self.rng.gen_bool(0.15) {
            return self.plain_type(2, &mut Vec::new());
        }
        let mut out = a.to_string();
        for (from, to) in [("k0", "k1"), ("k1", "(s0 k1)"), ("(s0 k0)", "k0")] {
            if out.contains(from) && self.rng.gen_bool(0.3) {
                out = out.replacen(from, to, 1);
            }
        }
        if self.rng.gen_bool(0.3) {
            out = out.replace("n", "m");
        }
        out
    }
}
