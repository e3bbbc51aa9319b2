//! Weak-head reduction for LF terms, LF substitutions and computations.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::comp_subst::{subst_many, subst_one, CompSubst, Payload};
use crate::lf_subst::{align_lf, apply_lf_subst, rename_lf, single_subst, SubstError};
use crate::syntax::*;

pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Names of the reduction rules, as they appear in traces.
pub const REDUCTION_RULES: &[&str] = &[
    "lf-beta",
    "unbox-box",
    "wk-empty",
    "wk-snoc",
    "comp-beta",
    "delta",
    "rec-var",
    "rec-app",
    "rec-lam",
];

/// The term being reduced when the step budget ran out.
#[derive(Clone, Debug)]
pub enum Partial {
    Lf(LfTerm),
    Subst(LfSubst),
    Comp(CompTerm),
}

#[derive(Clone, Debug, Error)]
pub enum WhnfError {
    #[error("step budget of {fuel} reductions exhausted")]
    FuelExhausted { fuel: u64, partial: Box<Partial> },
    #[error("recursor scrutinee is neither neutral nor a box: {0:?}")]
    IllFormedScrutinee(Box<CompTerm>),
    #[error("the recursor cannot eliminate a term headed by `{0}`")]
    NonCanonicalHead(Name),
    #[error("applying something that is not a function: {0:?}")]
    IllFormedApplication(Box<CompTerm>),
    #[error(transparent)]
    Subst(#[from] SubstError),
}

/// Reduces terms under a step budget, optionally recording the rules used.
///
/// Each outermost call gets a fresh budget of `fuel` steps.
#[derive(Clone, Debug)]
pub struct Reducer {
    fuel: u64,
    remaining: u64,
    depth: u32,
    trace: Option<Vec<&'static str>>,
    defs: Arc<HashMap<Name, CompTerm>>,
}

impl Default for Reducer {
    fn default() -> Self {
        Reducer::new(DEFAULT_FUEL)
    }
}

impl Reducer {
    pub fn new(fuel: u64) -> Reducer {
        Reducer {
            fuel,
            remaining: fuel,
            depth: 0,
            trace: None,
            defs: Arc::default(),
        }
    }

    /// Top-level definitions, unfolded when they reach head position.
    pub fn with_defs(mut self, defs: Arc<HashMap<Name, CompTerm>>) -> Reducer {
        self.defs = defs;
        self
    }

    pub fn with_trace(mut self) -> Reducer {
        self.trace = Some(Vec::new());
        self
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    /// Drains the rule names recorded so far.
    pub fn take_trace(&mut self) -> Vec<&'static str> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn tick(&mut self, rule: &'static str, partial: impl FnOnce() -> Partial) -> Result<(), WhnfError> {
        if self.remaining == 0 {
            return Err(WhnfError::FuelExhausted {
                fuel: self.fuel,
                partial: Box::new(partial()),
            });
        }
        self.remaining -= 1;
        if let Some(t) = &mut self.trace {
            t.push(rule);
        }
        Ok(())
    }

    fn enter<R>(&mut self, f: impl FnOnce(&mut Self) -> R) -> R {
        if self.depth == 0 {
            self.remaining = self.fuel;
        }
        self.depth += 1;
        let r = f(self);
        self.depth -= 1;
        r
    }

    pub fn whnf_lf_term(&mut self, m: &LfTerm) -> Result<LfTerm, WhnfError> {
        self.enter(|r| r.lf_term(m))
    }

    pub fn whnf_lf_subst(&mut self, s: &LfSubst) -> Result<LfSubst, WhnfError> {
        self.enter(|r| r.lf_subst(s))
    }

    pub fn whnf_comp(&mut self, t: &CompTerm) -> Result<CompTerm, WhnfError> {
        self.enter(|r| r.comp(t))
    }

    fn lf_term(&mut self, m: &LfTerm) -> Result<LfTerm, WhnfError> {
        let mut m = m.clone();
        loop {
            match &m {
                LfTerm::Var(_) | LfTerm::Const(_) | LfTerm::Lam(..) => return Ok(m),
                LfTerm::App(f, a) => {
                    let f2 = self.lf_term(f)?;
                    match &f2 {
                        LfTerm::Lam(x, body) => {
                            self.tick("lf-beta", || Partial::Lf(m.clone()))?;
                            m = single_subst(a, x, &**body);
                        }
                        _ => return Ok(LfTerm::App(f2.into(), a.clone())),
                    }
                }
                LfTerm::Unbox(t, s) => {
                    let t2 = self.comp(t)?;
                    match &t2 {
                        CompTerm::BoxObj(b) => {
                            self.tick("unbox-box", || Partial::Lf(m.clone()))?;
                            m = apply_lf_subst(s, &b.ctx, &b.term)?;
                        }
                        _ if is_neutral_comp(&t2) => return Ok(LfTerm::Unbox(t2.into(), s.clone())),
                        _ => return Err(WhnfError::IllFormedScrutinee(Box::new(t2))),
                    }
                }
            }
        }
    }

    fn lf_subst(&mut self, s: &LfSubst) -> Result<LfSubst, WhnfError> {
        match s {
            LfSubst::Wk(xi) if xi.head.is_none() && xi.vars.is_empty() => {
                self.tick("wk-empty", || Partial::Subst(s.clone()))?;
                Ok(LfSubst::Empty)
            }
            LfSubst::Wk(xi) if !xi.vars.is_empty() => {
                self.tick("wk-snoc", || Partial::Subst(s.clone()))?;
                let n = xi.vars.len() - 1;
                Ok(LfSubst::Cons(
                    LfSubst::Wk(xi.prefix(n)).into(),
                    LfTerm::Var(xi.vars[n].clone()),
                ))
            }
            _ => Ok(s.clone()),
        }
    }

    fn comp(&mut self, t: &CompTerm) -> Result<CompTerm, WhnfError> {
        let mut t = t.clone();
        loop {
            match &t {
                CompTerm::Var(y) => {
                    let Some(body) = self.defs.get(y) else { return Ok(t) };
                    let body = body.clone();
                    self.tick("delta", || Partial::Comp(t.clone()))?;
                    t = body;
                }
                CompTerm::App(f, a) => {
                    let f2 = self.comp(f)?;
                    match &f2 {
                        CompTerm::Fn(y, body) => {
                            self.tick("comp-beta", || Partial::Comp(t.clone()))?;
                            t = subst_one(payload_of(a), y, &**body)?;
                        }
                        _ if is_neutral_comp(&f2) => return Ok(CompTerm::App(f2.into(), a.clone())),
                        _ => return Err(WhnfError::IllFormedApplication(Box::new(f2))),
                    }
                }
                CompTerm::Rec(r) => {
                    let s = self.comp(&r.scrutinee)?;
                    if is_neutral_comp(&s) {
                        return Ok(rebuild_rec(r, s));
                    }
                    let CompTerm::BoxObj(b) = &s else {
                        return Err(WhnfError::IllFormedScrutinee(Box::new(s)));
                    };
                    let n = self.lf_term(&b.term)?;
                    if is_stuck_unbox(&n) {
                        let obj = CtxObj {
                            ctx: b.ctx.clone(),
                            term: n,
                            annotation: b.annotation.clone(),
                        };
                        return Ok(rebuild_rec(r, CompTerm::BoxObj(obj.into())));
                    }
                    let psi_hat = r.ctx_arg.erase();
                    if !b.ctx.same_shape(&psi_hat) {
                        return Err(WhnfError::IllFormedScrutinee(Box::new(s)));
                    }
                    let n = align_lf(&b.ctx, &psi_hat, &n);
                    t = self.select_branch(r, &n, &t)?;
                }
                _ => return Ok(t),
            }
        }
    }

    /// Instantiates the branch of `rec` matching the canonical term `n`,
    /// which lives in `rec.ctx_arg`. The result is not yet reduced.
    fn select_branch(&mut self, rec: &Rec, n: &LfTerm, whole: &CompTerm) -> Result<CompTerm, WhnfError> {
        let psi = &rec.ctx_arg;
        let b = &rec.branches;
        let ill = || WhnfError::IllFormedScrutinee(Box::new(CompTerm::boxed(psi.clone(), n.clone())));
        let boxed = |m: &LfTerm| CompTerm::boxed(psi.clone(), m.clone());
        let recur = |ctx: &LfCtx, m: &LfTerm| {
            CompTerm::rec(
                rec.motive.clone(),
                rec.branches.clone(),
                ctx.clone(),
                CompTerm::boxed(ctx.clone(), m.clone()),
            )
        };
        let (head, args) = n.spine();
        match head {
            LfTerm::Var(x) if args.is_empty() => {
                if psi.lookup(x).is_none() {
                    return Err(ill());
                }
                self.tick("rec-var", || Partial::Comp(whole.clone()))?;
                let theta = CompSubst::single(b.var.psi.clone(), Payload::Ctx(psi.clone()))
                    .with(b.var.p.clone(), Payload::Term(boxed(n)));
                Ok(subst_many(&theta, &b.var.body)?)
            }
            LfTerm::Const(c) if c.text() == APP && c.uid() == 0 => {
                let [m, k] = args[..] else { return Err(ill()) };
                self.tick("rec-app", || Partial::Comp(whole.clone()))?;
                let theta = CompSubst::single(b.app.psi.clone(), Payload::Ctx(psi.clone()))
                    .with(b.app.m.clone(), Payload::Term(boxed(m)))
                    .with(b.app.n.clone(), Payload::Term(boxed(k)))
                    .with(b.app.fm.clone(), Payload::Term(recur(psi, m)))
                    .with(b.app.fn_.clone(), Payload::Term(recur(psi, k)));
                Ok(subst_many(&theta, &b.app.body)?)
            }
            LfTerm::Const(c) if c.text() == LAM && c.uid() == 0 => {
                let [f] = args[..] else { return Err(ill()) };
                let f = self.lf_term(f)?;
                self.tick("rec-lam", || Partial::Comp(whole.clone()))?;
                let names: HashSet<Name> = psi.names().cloned().collect();
                let (x, body) = match &f {
                    LfTerm::Lam(x, body) => {
                        let x2 = fresh_name(x, &names);
                        let body = rename_lf(&[(x.clone(), x2.clone())], &**body);
                        (x2, body)
                    }
                    _ => {
                        let mut avoid = names.clone();
                        avoid.extend(free_lf_vars(&f));
                        let x = fresh_name(&Name::new("x"), &avoid);
                        (x.clone(), LfTerm::app(f.clone(), LfTerm::Var(x)))
                    }
                };
                let ext = psi.clone().with(x, LfType::tm());
                let theta = CompSubst::single(b.lam.psi.clone(), Payload::Ctx(psi.clone()))
                    .with(b.lam.m.clone(), Payload::Term(CompTerm::boxed(ext.clone(), body.clone())))
                    .with(b.lam.fm.clone(), Payload::Term(recur(&ext, &body)));
                Ok(subst_many(&theta, &b.lam.body)?)
            }
            LfTerm::Const(c) if args.is_empty() || (c.text() != APP && c.text() != LAM) => {
                Err(WhnfError::NonCanonicalHead(c.clone()))
            }
            _ => Err(ill()),
        }
    }

    /// Iterates weak-head reduction inside boxes so the LF payload is fully
    /// normal. Computation-level binders are left alone.
    pub fn normalize_deep(&mut self, t: &CompTerm) -> Result<CompTerm, WhnfError> {
        let w = self.whnf_comp(t)?;
        Ok(match &w {
            CompTerm::BoxObj(b) => {
                let term = self.enter(|r| r.deep_lf(&b.term))?;
                CompTerm::BoxObj(
                    CtxObj {
                        ctx: b.ctx.clone(),
                        term,
                        annotation: b.annotation.clone(),
                    }
                    .into(),
                )
            }
            _ => w,
        })
    }

    fn deep_lf(&mut self, m: &LfTerm) -> Result<LfTerm, WhnfError> {
        let m = self.lf_term(m)?;
        Ok(match &m {
            LfTerm::Lam(x, body) => LfTerm::lam(x.clone(), self.deep_lf(body)?),
            LfTerm::App(..) => {
                let (head, args) = m.spine();
                let head = match head {
                    LfTerm::Unbox(t, s) => LfTerm::Unbox(t.clone(), self.deep_subst(s)?.into()),
                    h => h.clone(),
                };
                let mut out = head;
                for a in args {
                    out = LfTerm::app(out, self.deep_lf(a)?);
                }
                out
            }
            LfTerm::Unbox(t, s) => LfTerm::Unbox(t.clone(), self.deep_subst(s)?.into()),
            _ => m,
        })
    }

    fn deep_subst(&mut self, s: &LfSubst) -> Result<LfSubst, WhnfError> {
        let s = self.lf_subst(s)?;
        Ok(match &s {
            LfSubst::Cons(rest, m) => LfSubst::Cons(self.deep_subst(rest)?.into(), self.deep_lf(m)?),
            _ => s,
        })
    }
}

fn payload_of(a: &CompTerm) -> Payload {
    match a {
        CompTerm::CtxLit(c) => Payload::Ctx((**c).clone()),
        _ => Payload::Term(a.clone()),
    }
}

fn rebuild_rec(r: &Rec, scrutinee: CompTerm) -> CompTerm {
    CompTerm::rec(r.motive.clone(), r.branches.clone(), r.ctx_arg.clone(), scrutinee)
}

/// `⌊t⌋σ M⃗` with `t` neutral.
fn is_stuck_unbox(m: &LfTerm) -> bool {
    matches!(m.spine().0, LfTerm::Unbox(t, _) if is_neutral_comp(t))
}

/// Neutral computations: variables, and applications and recursors whose
/// head or scrutinee is stuck.
pub fn is_neutral_comp(t: &CompTerm) -> bool {
    match t {
        CompTerm::Var(_) => true,
        CompTerm::App(f, _) => is_neutral_comp(f),
        CompTerm::Rec(r) => match &r.scrutinee {
            CompTerm::BoxObj(b) => is_stuck_unbox(&b.term) && is_whnf_lf(&b.term),
            s => is_neutral_comp(s),
        },
        _ => false,
    }
}

pub fn is_whnf_lf(m: &LfTerm) -> bool {
    classify_lf(m).is_some()
}

pub fn is_whnf_comp(t: &CompTerm) -> bool {
    classify_comp(t).is_some()
}

/// Shape of a term in weak-head normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WhnfClass {
    Lam,
    NeutralLf { head: Name, is_const: bool, spine_len: usize },
    UnboxNeutral { spine_len: usize },
    CompFn,
    CompPi,
    Univ,
    Box,
    BoxTy,
    Ctx,
    CompNeutral,
}

/// Classifies an LF term, or returns `None` if it is not in whnf.
pub fn classify_lf(m: &LfTerm) -> Option<WhnfClass> {
    if let LfTerm::Lam(..) = m {
        return Some(WhnfClass::Lam);
    }
    let (head, args) = m.spine();
    let spine_len = args.len();
    match head {
        LfTerm::Var(x) => Some(WhnfClass::NeutralLf {
            head: x.clone(),
            is_const: false,
            spine_len,
        }),
        LfTerm::Const(c) => Some(WhnfClass::NeutralLf {
            head: c.clone(),
            is_const: true,
            spine_len,
        }),
        LfTerm::Unbox(t, _) if is_neutral_comp(t) => Some(WhnfClass::UnboxNeutral { spine_len }),
        _ => None,
    }
}

/// Classifies a computation, or returns `None` if it is not in whnf.
pub fn classify_comp(t: &CompTerm) -> Option<WhnfClass> {
    Some(match t {
        CompTerm::Fn(..) => WhnfClass::CompFn,
        CompTerm::Pi(..) => WhnfClass::CompPi,
        CompTerm::Univ(_) => WhnfClass::Univ,
        CompTerm::BoxObj(_) => WhnfClass::Box,
        CompTerm::BoxTy(_) => WhnfClass::BoxTy,
        CompTerm::CtxLit(_) => WhnfClass::Ctx,
        _ if is_neutral_comp(t) => WhnfClass::CompNeutral,
        _ => return None,
    })
}

pub fn whnf_lf_term(m: &LfTerm, fuel: u64) -> Result<LfTerm, WhnfError> {
    Reducer::new(fuel).whnf_lf_term(m)
}

pub fn whnf_lf_subst(s: &LfSubst, fuel: u64) -> Result<LfSubst, WhnfError> {
    Reducer::new(fuel).whnf_lf_subst(s)
}

pub fn whnf_comp(t: &CompTerm, fuel: u64) -> Result<CompTerm, WhnfError> {
    Reducer::new(fuel).whnf_comp(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: &str) -> LfTerm {
        LfTerm::cnst(x)
    }

    fn id_lam() -> LfTerm {
        LfTerm::app(c(LAM), LfTerm::lam("x", LfTerm::var("x")))
    }

    fn branches(var: CompTerm, app: CompTerm, lam: CompTerm) -> Branches {
        Branches {
            var: VarBranch {
                psi: "psi".into(),
                p: "p".into(),
                body: var,
            },
            app: AppBranch {
                psi: "psi".into(),
                m: "m".into(),
                n: "n".into(),
                fm: "fm".into(),
                fn_: "fn".into(),
                body: app,
            },
            lam: LamBranch {
                psi: "phi".into(),
                m: "m".into(),
                fm: "fm".into(),
                body: lam,
            },
        }
    }

    fn motive() -> CompTerm {
        CompTerm::pi(
            "psi",
            AnnDom::Ctx,
            CompTerm::pi("y", AnnDom::Ty(CompTerm::box_ty(LfCtx::ctx_var("psi"), LfType::tm())), CompTerm::Univ(0)),
        )
    }

    #[test]
    fn lf_examples() {
        let r = whnf_lf_term(&LfTerm::app(LfTerm::lam("x", LfTerm::var("x")), c("c")), 10).unwrap();
        assert!(alpha_eq(&r, &c("c")));
        let b = CompTerm::boxed_erased(ErasedCtx::of_vars(["x"]), LfTerm::var("x"));
        let s = LfSubst::Cons(LfSubst::Empty.into(), c("c"));
        let r = whnf_lf_term(&LfTerm::unbox(b, s), 10).unwrap();
        assert!(alpha_eq(&r, &c("c")));
        let n = LfTerm::apps(c("app"), [c("c1"), c("c2")]);
        assert!(alpha_eq(&whnf_lf_term(&n, 10).unwrap(), &n));
    }

    #[test]
    fn subst_examples() {
        assert!(alpha_eq(&whnf_lf_subst(&LfSubst::Wk(ErasedCtx::empty()), 10).unwrap(), &LfSubst::Empty));
        let r = whnf_lf_subst(&LfSubst::Wk(ErasedCtx::of_vars(["x", "y"])), 10).unwrap();
        let want = LfSubst::Cons(LfSubst::Wk(ErasedCtx::of_vars(["x"])).into(), LfTerm::var("y"));
        assert!(alpha_eq(&r, &want));
        let s = LfSubst::Cons(LfSubst::Empty.into(), c("m"));
        assert!(alpha_eq(&whnf_lf_subst(&s, 10).unwrap(), &s));
    }

    #[test]
    fn comp_beta() {
        let b = CompTerm::boxed(LfCtx::empty(), id_lam());
        let r = whnf_comp(&CompTerm::app(CompTerm::func("y", CompTerm::var("y")), b.clone()), 10).unwrap();
        assert!(alpha_eq(&r, &b));
    }

    #[test]
    fn rec_on_variable_is_neutral() {
        let t = CompTerm::rec(motive(), branches(CompTerm::var("p"), CompTerm::var("m"), CompTerm::var("m")), LfCtx::empty(), CompTerm::var("y"));
        let r = whnf_comp(&t, 10).unwrap();
        assert!(alpha_eq(&r, &t));
        assert_eq!(classify_comp(&r), Some(WhnfClass::CompNeutral));
    }

    #[test]
    fn rec_selects_branches() {
        let bs = branches(CompTerm::var("p"), CompTerm::var("m"), CompTerm::var("m"));
        let scrut = CompTerm::boxed(LfCtx::empty(), LfTerm::apps(c(APP), [id_lam(), id_lam()]));
        let r = whnf_comp(&CompTerm::rec(motive(), bs.clone(), LfCtx::empty(), scrut), 100).unwrap();
        assert!(alpha_eq(&r, &CompTerm::boxed(LfCtx::empty(), id_lam())));

        // lam branch: m is bound to ⌈x ⊢ x⌉
        let r = whnf_comp(&CompTerm::rec(motive(), bs, LfCtx::empty(), CompTerm::boxed(LfCtx::empty(), id_lam())), 100).unwrap();
        let want = CompTerm::boxed(LfCtx::empty().with("x", LfType::tm()), LfTerm::var("x"));
        assert!(alpha_eq(&r, &want));
    }

    #[test]
    fn rec_rejects_foreign_constants() {
        let bs = branches(CompTerm::var("p"), CompTerm::var("m"), CompTerm::var("m"));
        let t = CompTerm::rec(motive(), bs, LfCtx::empty(), CompTerm::boxed(LfCtx::empty(), c("zero")));
        assert!(matches!(whnf_comp(&t, 100), Err(WhnfError::NonCanonicalHead(_))));
    }

    #[test]
    fn fuel_runs_out() {
        // (fn y => y y) (fn y => y y)
        let w = CompTerm::func("y", CompTerm::app(CompTerm::var("y"), CompTerm::var("y")));
        let r = whnf_comp(&CompTerm::app(w.clone(), w), 50);
        assert!(matches!(r, Err(WhnfError::FuelExhausted { fuel: 50, .. })));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_lf(&LfTerm::lam("x", LfTerm::var("x"))), Some(WhnfClass::Lam));
        assert_eq!(classify_lf(&LfTerm::app(LfTerm::lam("x", LfTerm::var("x")), c("c"))), None);
        assert!(matches!(classify_lf(&id_lam()), Some(WhnfClass::NeutralLf { spine_len: 1, is_const: true, .. })));
        let u = LfTerm::unbox(CompTerm::var("t"), LfSubst::Empty);
        assert_eq!(classify_lf(&u), Some(WhnfClass::UnboxNeutral { spine_len: 0 }));
    }

    #[test]
    fn trace_records_rules() {
        let mut r = Reducer::new(100).with_trace();
        r.whnf_lf_term(&LfTerm::app(LfTerm::lam("x", LfTerm::var("x")), c("c"))).unwrap();
        assert_eq!(r.take_trace(), vec!["lf-beta"]);
    }
}
