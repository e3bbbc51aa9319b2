//! Seeded random generation of well-typed terms over the `tm` signature,
//! for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::comp_subst::{CompSubst, Payload};
use crate::frontend::driver::{load, Program};
use crate::typecheck::Checker;
use crate::syntax::*;

/// A generated computation together with its typing context and type.
#[derive(Clone, Debug)]
pub struct Instance {
    pub gamma: CompCtx,
    pub psi: LfCtx,
    pub term: CompTerm,
    pub ty: CompTerm,
}

/// An LF function `M : tm -> tm` in context `psi`.
#[derive(Clone, Debug)]
pub struct LfFunInstance {
    pub gamma: CompCtx,
    pub psi: LfCtx,
    pub term: LfTerm,
}

/// `M` over `dom1`, `inner : dom2 -> dom1` and `outer : dom3 -> dom2`.
#[derive(Clone, Debug)]
pub struct LfSubstTriple {
    pub term: LfTerm,
    pub dom1: ErasedCtx,
    pub inner: LfSubst,
    pub dom2: ErasedCtx,
    pub outer: LfSubst,
}

/// `t` over `gamma1`, `inner` mapping `gamma1` to terms over `gamma2`, and
/// `outer` mapping `gamma2` to terms over fresh variables.
#[derive(Clone, Debug)]
pub struct CompSubstTriple {
    pub term: CompTerm,
    pub gamma1: CompCtx,
    pub inner: CompSubst,
    pub outer: CompSubst,
}

const HELPERS: &str = "
def cid : (phi : ctx) -> (y : [phi |- tm]) -> [phi |- tm] := fn phi => fn y => y.
def wrap : (phi : ctx) -> (y : [phi |- tm]) -> [phi |- tm] :=
  fn phi => fn y => [phi |- app unbox(y ; wk phi) unbox(y ; wk phi)].
def swap : (phi : ctx) -> (y : [phi |- tm]) -> [phi |- tm] := fn phi => fn y =>
  rec ((psi : ctx) -> (y : [psi |- tm]) -> [psi |- tm]) with
  | var psi p => [psi |- unbox(p ; wk psi)]
  | app psi m n fm fn_ => [psi |- app unbox(fn_ ; wk psi) unbox(fm ; wk psi)]
  | lam psi m fm => [psi |- lam \\x. unbox(fm ; wk(psi, x))]
  end phi y.
def twice : (phi : ctx) -> ([phi |- tm] -> [phi |- tm]) -> [phi |- tm] -> [phi |- tm] :=
  fn phi => fn g => fn y => g (g y).
def dup : [ |- tm -> tm] := [ |- \\x. app x x].
";

/// Source of the helper definitions generated terms may call:
/// `cid`, `wrap`, `swap`, `twice` and `dup`.
pub fn helper_source() -> String {
    format!("tm : type. lam : (tm -> tm) -> tm. app : tm -> tm -> tm.\n{HELPERS}")
}

/// The checked helper definitions over the `tm` signature.
pub fn helpers() -> Program {
    load("<helpers>", &helper_source(), crate::whnf::DEFAULT_FUEL).expect("helper definitions check")
}

impl Instance {
    /// A checker for this instance: `Γ` holds the helpers' types followed by
    /// the instance's own variables, and the helpers unfold during reduction.
    pub fn checker<'s>(&self, prog: &'s Program, fuel: u64) -> Checker<'s> {
        let mut gamma = prog.gamma();
        for (x, d) in self.gamma.iter() {
            gamma.push(x.clone(), d.clone());
        }
        let mut ck = Checker::with_fuel(&prog.sig, fuel).with_gamma(gamma);
        ck.reducer = prog.reducer(fuel);
        ck
    }
}

impl LfFunInstance {
    pub fn checker<'s>(&self, prog: &'s Program, fuel: u64) -> Checker<'s> {
        let inst = Instance {
            gamma: self.gamma.clone(),
            psi: self.psi.clone(),
            term: CompTerm::Univ(0),
            ty: CompTerm::Univ(1),
        };
        inst.checker(prog, fuel)
    }
}

/// Variables available while generating at a fixed LF context `Ψ`.
#[derive(Clone)]
struct Env {
    psi: LfCtx,
    /// Computation variables of type `[Ψ |- tm]`.
    boxes: Vec<Name>,
    /// Computation variables of type `[Ψ |- tm] -> [Ψ |- tm]`.
    funs: Vec<Name>,
}

pub struct Gen {
    rng: ChaCha8Rng,
    next: u32,
}

fn tm() -> LfType {
    LfType::tm()
}

fn box_at(psi: &LfCtx) -> CompTerm {
    CompTerm::box_ty(psi.clone(), tm())
}

/// `(psi : ctx) -> (y : [psi |- tm]) -> [psi |- tm]`
pub fn copy_motive() -> CompTerm {
    let psi = LfCtx::ctx_var("psi");
    CompTerm::pi("psi", AnnDom::Ctx, CompTerm::pi("y", AnnDom::Ty(box_at(&psi)), box_at(&psi)))
}

fn unbox_wk(v: &str, ctx: ErasedCtx) -> LfTerm {
    LfTerm::unbox(CompTerm::var(v), LfSubst::Wk(ctx))
}

/// Branches that rebuild the scrutinee, optionally swapping the arguments
/// of every `app`.
pub fn copy_branches(swap: bool) -> Branches {
    let psi = ErasedCtx::ctx_var("psi");
    let ctx = LfCtx::ctx_var("psi");
    let (l, r) = if swap { ("fn_", "fm") } else { ("fm", "fn_") };
    Branches {
        var: VarBranch {
            psi: "psi".into(),
            p: "p".into(),
            body: CompTerm::boxed(ctx.clone(), unbox_wk("p", psi.clone())),
        },
        app: AppBranch {
            psi: "psi".into(),
            m: "m".into(),
            n: "n".into(),
            fm: "fm".into(),
            fn_: "fn_".into(),
            body: CompTerm::boxed(
                ctx.clone(),
                LfTerm::apps(LfTerm::cnst(APP), [unbox_wk(l, psi.clone()), unbox_wk(r, psi.clone())]),
            ),
        },
        lam: LamBranch {
            psi: "psi".into(),
            m: "m".into(),
            fm: "fm".into(),
            body: CompTerm::boxed(
                ctx,
                LfTerm::app(LfTerm::cnst(LAM), LfTerm::lam("x", unbox_wk("fm", psi.snoc("x".into())))),
            ),
        },
    }
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next: 0,
        }
    }

    fn fresh(&mut self, base: &str) -> Name {
        self.next += 1;
        Name::new(format!("{base}{}", self.next))
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// A random LF context of `tm` declarations, possibly headed by the
    /// context variable `psi`.
    fn lf_ctx(&mut self) -> LfCtx {
        let mut psi = if self.chance(0.5) { LfCtx::ctx_var("psi") } else { LfCtx::empty() };
        for x in ["x", "w"].iter().take(self.rng.gen_range(0..=2)) {
            psi = psi.with(*x, tm());
        }
        psi
    }

    fn env(&mut self) -> (CompCtx, Env) {
        let psi = self.lf_ctx();
        let mut gamma = CompCtx::new();
        if psi.head.is_some() {
            gamma.push("psi".into(), AnnDom::Ctx);
        }
        let mut env = Env {
            psi: psi.clone(),
            boxes: Vec::new(),
            funs: Vec::new(),
        };
        for y in ["y", "u"] {
            if self.chance(0.6) {
                gamma.push(y.into(), AnnDom::Ty(box_at(&psi)));
                env.boxes.push(y.into());
            }
        }
        if self.chance(0.5) {
            gamma.push("f".into(), AnnDom::Ty(CompTerm::arrow(box_at(&psi), box_at(&psi))));
            env.funs.push("f".into());
        }
        (gamma, env)
    }

    /// An LF term of type `tm` over `vars` built from `lam`, `app`,
    /// variables and, when `env` is given, unboxed computations.
    fn lf_tm(&mut self, vars: &mut Vec<Name>, depth: u32, env: Option<&Env>) -> LfTerm {
        let leaf = depth == 0 || self.chance(0.25);
        if leaf {
            if !vars.is_empty() && self.chance(0.7) {
                return LfTerm::Var(vars.choose(&mut self.rng).unwrap().clone());
            }
            let x = self.fresh("a");
            return LfTerm::app(LfTerm::cnst(LAM), LfTerm::lam(x.clone(), LfTerm::Var(x)));
        }
        match self.rng.gen_range(0..5) {
            0 | 1 => {
                let m = self.lf_tm(vars, depth - 1, env);
                let n = self.lf_tm(vars, depth - 1, env);
                LfTerm::apps(LfTerm::cnst(APP), [m, n])
            }
            2 => {
                let x = self.fresh("a");
                vars.push(x.clone());
                let body = self.lf_tm(vars, depth - 1, env);
                vars.pop();
                LfTerm::app(LfTerm::cnst(LAM), LfTerm::lam(x, body))
            }
            3 => {
                // becomes a beta redex once `dup` unfolds
                let arg = self.lf_tm(vars, depth - 1, env);
                LfTerm::app(LfTerm::unbox(CompTerm::var("dup"), LfSubst::Empty), arg)
            }
            _ => match env {
                Some(env) => self.unbox_in(vars, depth - 1, env),
                None => self.lf_tm(vars, depth - 1, env),
            },
        }
    }

    fn unbox_in(&mut self, vars: &mut Vec<Name>, depth: u32, env: &Env) -> LfTerm {
        if self.chance(0.5) {
            // an object over the whole of Ψ, weakened to the current context
            let t = self.comp_at(env, depth);
            LfTerm::unbox(t, LfSubst::Wk(env.psi.erase()))
        } else {
            // a closed box over a small concrete context, with an explicit
            // substitution into the current one
            let phi_names: Vec<Name> = (0..self.rng.gen_range(0..=2)).map(|_| self.fresh("c")).collect();
            let mut phi = LfCtx::empty();
            for x in &phi_names {
                phi = phi.with(x.clone(), tm());
            }
            let mut inner = phi_names.clone();
            let m = self.lf_tm(&mut inner, depth, None);
            let mut sigma = LfSubst::Empty;
            for _ in &phi_names {
                sigma = LfSubst::Cons(sigma.into(), self.lf_tm(vars, depth.saturating_sub(1), Some(env)));
            }
            LfTerm::unbox(CompTerm::boxed(phi, m), sigma)
        }
    }

    /// A computation of type `[Ψ |- tm]`. Every form is inferable, since
    /// it may end up under an `unbox`.
    fn comp_at(&mut self, env: &Env, depth: u32) -> CompTerm {
        if depth == 0 || self.chance(0.2) {
            if !env.boxes.is_empty() && self.chance(0.5) {
                return CompTerm::Var(env.boxes.choose(&mut self.rng).unwrap().clone());
            }
            let mut vars: Vec<Name> = env.psi.names().cloned().collect();
            let m = self.lf_tm(&mut vars, depth.min(1), None);
            return CompTerm::boxed(env.psi.clone(), m);
        }
        let ctx_arg = || CompTerm::ctx_lit(env.psi.clone());
        match self.rng.gen_range(0..6) {
            0 | 1 => {
                let mut vars: Vec<Name> = env.psi.names().cloned().collect();
                let m = self.lf_tm(&mut vars, depth, Some(env));
                CompTerm::boxed(env.psi.clone(), m)
            }
            2 => {
                let helper = ["cid", "swap", "wrap"].choose(&mut self.rng).unwrap();
                let arg = self.comp_at(env, depth - 1);
                CompTerm::apps(CompTerm::var(*helper), [ctx_arg(), arg])
            }
            3 if !env.funs.is_empty() && self.chance(0.5) => {
                let f = env.funs.choose(&mut self.rng).unwrap().clone();
                CompTerm::app(CompTerm::Var(f), self.comp_at(env, depth - 1))
            }
            3 => {
                let y = self.fresh("v");
                let mut inner = env.clone();
                inner.boxes.push(y.clone());
                let fun = CompTerm::func(y, self.comp_at(&inner, depth - 1));
                let arg = self.comp_at(env, depth - 1);
                CompTerm::apps(CompTerm::var("twice"), [ctx_arg(), fun, arg])
            }
            _ => {
                let swap = self.chance(0.5);
                let scrutinee = self.comp_at(env, depth - 1);
                CompTerm::rec(copy_motive(), copy_branches(swap), env.psi.clone(), scrutinee)
            }
        }
    }

    /// A well-typed computation of some box type `[Ψ |- tm]`, in a context
    /// that also declares the helper definitions.
    pub fn instance(&mut self, depth: u32) -> Instance {
        let (gamma, env) = self.env();
        let term = self.comp_at(&env, depth);
        Instance {
            gamma,
            ty: box_at(&env.psi),
            psi: env.psi,
            term,
        }
    }

    /// An LF term of type `tm -> tm`, which is an abstraction, a partial
    /// application of `app`, or a variable.
    pub fn lf_fun(&mut self, depth: u32) -> LfFunInstance {
        let (gamma, env) = self.env();
        let mut psi = env.psi;
        let fun_ty = LfType::arrow(tm(), tm());
        if self.chance(0.3) {
            psi = psi.with("k", fun_ty);
        }
        let mut vars: Vec<Name> = psi.names().filter(|x| x.text() != "k").cloned().collect();
        let term = match self.rng.gen_range(0..3) {
            0 => {
                let x = self.fresh("a");
                vars.push(x.clone());
                let body = self.lf_tm(&mut vars, depth, None);
                LfTerm::lam(x, body)
            }
            1 => LfTerm::app(LfTerm::cnst(APP), self.lf_tm(&mut vars, depth, None)),
            _ if psi.lookup(&"k".into()).is_some() => LfTerm::var("k"),
            _ => LfTerm::app(LfTerm::cnst(APP), self.lf_tm(&mut vars, depth, None)),
        };
        LfFunInstance { gamma, psi, term }
    }

    /// A closed LF term of type `tm`.
    pub fn closed_tm(&mut self, depth: u32) -> LfTerm {
        self.lf_tm(&mut Vec::new(), depth, None)
    }

    /// Binder names shared between the layers so that capture avoidance is
    /// exercised.
    fn pure_lf(&mut self, vars: &[Name], pool: &[Name], depth: u32) -> LfTerm {
        if depth == 0 || self.chance(0.3) {
            if !vars.is_empty() && self.chance(0.8) {
                return LfTerm::Var(vars.choose(&mut self.rng).unwrap().clone());
            }
            return LfTerm::cnst(LAM);
        }
        match self.rng.gen_range(0..3) {
            0 => {
                let x = pool.choose(&mut self.rng).unwrap().clone();
                let mut inner = vars.to_vec();
                inner.push(x.clone());
                LfTerm::lam(x, self.pure_lf(&inner, pool, depth - 1))
            }
            _ => {
                let m = self.pure_lf(vars, pool, depth - 1);
                let n = self.pure_lf(vars, pool, depth - 1);
                LfTerm::app(m, n)
            }
        }
    }

    fn lf_cons(&mut self, len: usize, vars: &[Name], pool: &[Name], depth: u32) -> LfSubst {
        let mut s = LfSubst::Empty;
        for _ in 0..len {
            s = LfSubst::Cons(s.into(), self.pure_lf(vars, pool, depth));
        }
        s
    }

    /// A random well-scoped triple for the composition law of LF
    /// substitutions. Terms are untyped; substitution does not look at types.
    pub fn lf_subst_triple(&mut self, depth: u32) -> LfSubstTriple {
        let names = |p: &str, n: usize| -> Vec<Name> { (0..n).map(|i| Name::new(format!("{p}{i}"))).collect() };
        let d1 = names("u", self.rng.gen_range(0..=3));
        let d2 = names("v", self.rng.gen_range(0..=3));
        let d3 = names("w", self.rng.gen_range(0..=3));
        let pool: Vec<Name> = ["u0", "v0", "v1", "w0", "b"].into_iter().map(Name::new).collect();
        let term = self.pure_lf(&d1, &pool, depth);
        let inner = self.lf_cons(d1.len(), &d2, &pool, depth);
        let outer = self.lf_cons(d2.len(), &d3, &pool, depth);
        LfSubstTriple {
            term,
            dom1: ErasedCtx::of_vars(d1),
            inner,
            dom2: ErasedCtx::of_vars(d2),
            outer,
        }
    }

    fn pure_comp(&mut self, vars: &[Name], pool: &[Name], depth: u32) -> CompTerm {
        if depth == 0 || self.chance(0.3) {
            if !vars.is_empty() && self.chance(0.7) {
                return CompTerm::Var(vars.choose(&mut self.rng).unwrap().clone());
            }
            return CompTerm::boxed(LfCtx::empty(), LfTerm::cnst(LAM));
        }
        match self.rng.gen_range(0..4) {
            0 => {
                let y = pool.choose(&mut self.rng).unwrap().clone();
                let mut inner = vars.to_vec();
                inner.push(y.clone());
                CompTerm::func(y, self.pure_comp(&inner, pool, depth - 1))
            }
            1 => {
                let f = self.pure_comp(vars, pool, depth - 1);
                let a = self.pure_comp(vars, pool, depth - 1);
                CompTerm::app(f, a)
            }
            _ => {
                // a box splicing computations in through unbox
                let m = self.pure_comp(vars, pool, depth - 1);
                let n = self.pure_comp(vars, pool, depth - 1);
                let body = LfTerm::apps(
                    LfTerm::cnst(APP),
                    [LfTerm::unbox(m, LfSubst::Empty), LfTerm::unbox(n, LfSubst::Empty)],
                );
                CompTerm::boxed(LfCtx::empty(), body)
            }
        }
    }

    /// A random well-scoped triple for the composition law of computation
    /// substitutions.
    pub fn comp_subst_triple(&mut self, depth: u32) -> CompSubstTriple {
        let names = |p: &str, n: usize| -> Vec<Name> { (0..n).map(|i| Name::new(format!("{p}{i}"))).collect() };
        let g1 = names("y", self.rng.gen_range(0..=3));
        let g2 = names("z", self.rng.gen_range(0..=3));
        let g3 = names("q", self.rng.gen_range(0..=2));
        let pool: Vec<Name> = ["y0", "z0", "z1", "q0", "t"].into_iter().map(Name::new).collect();
        let term = self.pure_comp(&g1, &pool, depth);
        let mut gamma1 = CompCtx::new();
        let mut inner = CompSubst::new();
        for y in &g1 {
            gamma1.push(y.clone(), AnnDom::Ty(box_at(&LfCtx::empty())));
            inner.push(y.clone(), Payload::Term(self.pure_comp(&g2, &pool, depth)));
        }
        let mut outer = CompSubst::new();
        for z in &g2 {
            outer.push(z.clone(), Payload::Term(self.pure_comp(&g3, &pool, depth)));
        }
        CompSubstTriple {
            term,
            gamma1,
            inner,
            outer,
        }
    }
}
