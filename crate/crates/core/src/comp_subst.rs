//! Substitution of computation variables (including context variables).
//!
//! A context variable `ψ` may be replaced by another context variable, by a
//! context literal, or by a typed context. When a context `Φ` is spliced in
//! front of declarations `x⃗` that reuse one of `Φ`'s names, the clashing
//! declarations are renamed.

use std::collections::HashSet;

use crate::lf_subst::{avoid_binders, rename_lf, SubstError};
use crate::syntax::*;

/// What a computation variable is replaced by.
#[derive(Clone, Debug)]
pub enum Payload {
    Term(CompTerm),
    Ctx(LfCtx),
}

impl FreeVars for Payload {
    fn collect_fv(&self, fv: &mut Collector) {
        match self {
            Payload::Term(t) => t.collect_fv(fv),
            Payload::Ctx(c) => c.collect_fv(fv),
        }
    }
}

/// A finite map from computation variables to payloads. Later entries
/// shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct CompSubst {
    entries: Vec<(Name, Payload)>,
}

impl CompSubst {
    pub fn new() -> CompSubst {
        CompSubst::default()
    }

    pub fn single(y: impl Into<Name>, p: Payload) -> CompSubst {
        CompSubst {
            entries: vec![(y.into(), p)],
        }
    }

    /// The identity on every variable declared in `gamma`.
    pub fn identity(gamma: &CompCtx) -> CompSubst {
        let mut s = CompSubst::new();
        for x in gamma.names() {
            s.push(x.clone(), Payload::Term(CompTerm::Var(x.clone())));
        }
        s
    }

    pub fn push(&mut self, y: Name, p: Payload) {
        self.entries.push((y, p));
    }

    pub fn with(mut self, y: impl Into<Name>, p: Payload) -> CompSubst {
        self.push(y.into(), p);
        self
    }

    pub fn lookup(&self, y: &Name) -> Option<&Payload> {
        self.entries.iter().rev().find(|(x, _)| x == y).map(|(_, p)| p)
    }

    pub fn entries(&self) -> &[(Name, Payload)] {
        &self.entries
    }
}

/// An injective renaming of computation variables.
#[derive(Clone, Debug, Default)]
pub struct Renaming(Vec<(Name, Name)>);

impl Renaming {
    pub fn new() -> Renaming {
        Renaming::default()
    }

    /// Maps `x` to `x2` under a binder. Returns `false` (and leaves the
    /// renaming unchanged) if `x2` is already in the range.
    pub fn extend(&mut self, x: Name, x2: Name) -> bool {
        if self.0.iter().any(|(_, r)| *r == x2) {
            return false;
        }
        self.0.push((x, x2));
        true
    }

    pub fn get(&self, x: &Name) -> Option<&Name> {
        self.0.iter().rev().find(|(a, _)| a == x).map(|(_, b)| b)
    }

    pub fn to_subst(&self) -> CompSubst {
        CompSubst {
            entries: self
                .0
                .iter()
                .map(|(a, b)| (a.clone(), Payload::Term(CompTerm::Var(b.clone()))))
                .collect(),
        }
    }
}

/// `θ, x ↦ x'` where `x'` is fresh for `avoid`; returns the fresh name.
pub fn extend_renaming(theta: &mut CompSubst, x: &Name, avoid: &HashSet<Name>) -> Name {
    let x2 = fresh_name(x, avoid);
    theta.push(x.clone(), Payload::Term(CompTerm::Var(x2.clone())));
    x2
}

enum Head {
    Keep(Option<Name>),
    Splice(LfCtx),
}

pub struct Subster {
    entries: Vec<(Name, Payload)>,
    strict: bool,
    avoid: HashSet<Name>,
}

impl Subster {
    fn find(&self, y: &Name) -> Option<&Payload> {
        self.entries.iter().rev().find(|(x, _)| x == y).map(|(_, p)| p)
    }

    fn missing(&self, y: &Name) -> Result<(), SubstError> {
        if self.strict {
            Err(SubstError::UnboundCompVar(y.clone()))
        } else {
            Ok(())
        }
    }

    fn under<R>(&mut self, xs: &[&Name], f: impl FnOnce(&mut Self, Vec<Name>) -> R) -> R {
        let n = self.entries.len();
        let mut fresh = Vec::with_capacity(xs.len());
        let mut added = Vec::new();
        for x in xs {
            let x2 = fresh_name(x, &self.avoid);
            if self.avoid.insert(x2.clone()) {
                added.push(x2.clone());
            }
            self.entries.push(((*x).clone(), Payload::Term(CompTerm::Var(x2.clone()))));
            fresh.push(x2);
        }
        let r = f(self, fresh);
        self.entries.truncate(n);
        for x in added {
            self.avoid.remove(&x);
        }
        r
    }

    fn head(&self, h: &Option<Name>) -> Result<Head, SubstError> {
        let Some(psi) = h else {
            return Ok(Head::Keep(None));
        };
        match self.find(psi) {
            None => {
                self.missing(psi)?;
                Ok(Head::Keep(Some(psi.clone())))
            }
            Some(Payload::Term(CompTerm::Var(phi))) => Ok(Head::Keep(Some(phi.clone()))),
            Some(Payload::Term(CompTerm::CtxLit(phi))) => Ok(Head::Splice((**phi).clone())),
            Some(Payload::Ctx(phi)) => Ok(Head::Splice(phi.clone())),
            Some(Payload::Term(_)) => Err(SubstError::KindMismatch {
                var: psi.clone(),
                detail: "a computation term cannot stand for a context",
            }),
        }
    }

    fn splices(&self, h: &Option<Name>) -> Result<bool, SubstError> {
        Ok(matches!(self.head(h)?, Head::Splice(_)))
    }

    /// A typed context in binding position. Returns the new context and the
    /// renaming applied to its own declarations.
    fn ctx_binder(&mut self, ctx: &LfCtx) -> Result<(LfCtx, Vec<(Name, Name)>), SubstError> {
        let (head, mut decls) = match self.head(&ctx.head)? {
            Head::Keep(h) => (h, Vec::new()),
            Head::Splice(phi) => (phi.head, phi.decls),
        };
        let spliced: HashSet<Name> = decls.iter().map(|(x, _)| x.clone()).collect();
        let mut used: HashSet<Name> = spliced.iter().cloned().chain(ctx.names().cloned()).collect();
        let mut pairs: Vec<(Name, Name)> = Vec::new();
        for (x, a) in &ctx.decls {
            let a = rename_lf(&pairs, a).csubst(self)?;
            let x2 = if spliced.contains(x) {
                let f = fresh_name(x, &used);
                used.insert(f.clone());
                pairs.push((x.clone(), f.clone()));
                f
            } else {
                x.clone()
            };
            decls.push((x2, a));
        }
        Ok((LfCtx { head, decls }, pairs))
    }

    fn erased_binder(&mut self, ctx: &ErasedCtx) -> Result<(ErasedCtx, Vec<(Name, Name)>), SubstError> {
        let (head, mut vars) = match self.head(&ctx.head)? {
            Head::Keep(h) => (h, Vec::new()),
            Head::Splice(phi) => {
                let e = phi.erase();
                (e.head, e.vars)
            }
        };
        let spliced: HashSet<Name> = vars.iter().cloned().collect();
        let mut used: HashSet<Name> = spliced.iter().cloned().chain(ctx.vars.iter().cloned()).collect();
        let mut pairs = Vec::new();
        for x in &ctx.vars {
            if spliced.contains(x) {
                let f = fresh_name(x, &used);
                used.insert(f.clone());
                pairs.push((x.clone(), f.clone()));
                vars.push(f);
            } else {
                vars.push(x.clone());
            }
        }
        Ok((ErasedCtx { head, vars }, pairs))
    }
}

/// Classes computation substitutions apply to.
pub trait CompSubstTarget: Sized + FreeVars {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError>;
}

impl CompSubstTarget for ErasedCtx {
    /// An occurrence `wk(ψ̂, x⃗)`: the head is replaced, the names are kept.
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        Ok(match s.head(&self.head)? {
            Head::Keep(head) => ErasedCtx {
                head,
                vars: self.vars.clone(),
            },
            Head::Splice(phi) => {
                let mut e = phi.erase();
                e.vars.extend(self.vars.iter().cloned());
                e
            }
        })
    }
}

impl CompSubstTarget for LfSubst {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        Ok(match self {
            LfSubst::Empty => LfSubst::Empty,
            LfSubst::Wk(xi) => LfSubst::Wk(xi.csubst(s)?),
            LfSubst::Cons(rest, m) => LfSubst::Cons(rest.csubst(s)?.into(), m.csubst(s)?),
        })
    }
}

impl CompSubstTarget for LfTerm {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        Ok(match self {
            LfTerm::Var(_) | LfTerm::Const(_) => self.clone(),
            LfTerm::Lam(x, m) => LfTerm::lam(x.clone(), m.csubst(s)?),
            LfTerm::App(m, n) => LfTerm::app(m.csubst(s)?, n.csubst(s)?),
            LfTerm::Unbox(t, sigma) => LfTerm::unbox(t.csubst(s)?, sigma.csubst(s)?),
        })
    }
}

impl CompSubstTarget for LfType {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        Ok(match self {
            LfType::Atom(a, spine) => LfType::Atom(
                a.clone(),
                spine.iter().map(|m| m.csubst(s)).collect::<Result<_, _>>()?,
            ),
            LfType::Pi(x, a, b) => LfType::pi(x.clone(), a.csubst(s)?, b.csubst(s)?),
        })
    }
}

impl CompSubstTarget for LfCtx {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        Ok(s.ctx_binder(self)?.0)
    }
}

impl CompSubstTarget for CtxType {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        let spliced = s.splices(&self.ctx().head)?;
        let (ctx, pairs) = s.ctx_binder(self.ctx())?;
        let mut ty = rename_lf(&pairs, self.ty());
        if spliced {
            ty = avoid_binders(&ctx.names().cloned().collect(), &ty);
        }
        let ty = ty.csubst(s)?;
        Ok(self.rebuild(ctx, ty))
    }
}

impl CompSubstTarget for CtxObj {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        let spliced = s.splices(&self.ctx.head)?;
        let (ctx, annotation, pairs) = match &self.annotation {
            Some(ann) => {
                let (ann, pairs) = s.ctx_binder(ann)?;
                (ann.erase(), Some(ann), pairs)
            }
            None => {
                let (ctx, pairs) = s.erased_binder(&self.ctx)?;
                (ctx, None, pairs)
            }
        };
        let mut term = rename_lf(&pairs, &self.term);
        if spliced {
            // binders of the object must not shadow the spliced declarations
            term = avoid_binders(&ctx.vars.iter().cloned().collect(), &term);
        }
        let term = term.csubst(s)?;
        Ok(CtxObj { ctx, term, annotation })
    }
}

impl CompSubstTarget for AnnDom {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        Ok(match self {
            AnnDom::Ctx => AnnDom::Ctx,
            AnnDom::Ty(t) => AnnDom::Ty(t.csubst(s)?),
        })
    }
}

impl CompSubstTarget for CompTerm {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        Ok(match self {
            CompTerm::Var(y) => match s.find(y) {
                Some(Payload::Term(t)) => t.clone(),
                Some(Payload::Ctx(phi)) => CompTerm::ctx_lit(phi.clone()),
                None => {
                    s.missing(y)?;
                    self.clone()
                }
            },
            CompTerm::Univ(_) => self.clone(),
            CompTerm::BoxTy(t) => CompTerm::BoxTy(t.csubst(s)?.into()),
            CompTerm::BoxObj(b) => CompTerm::BoxObj(b.csubst(s)?.into()),
            CompTerm::Pi(y, dom, body) => {
                let dom = dom.csubst(s)?;
                s.under(&[y], |s, ys| Ok::<_, SubstError>(CompTerm::pi(ys[0].clone(), dom, body.csubst(s)?)))?
            }
            CompTerm::Fn(y, body) => s.under(&[y], |s, ys| Ok::<_, SubstError>(CompTerm::func(ys[0].clone(), body.csubst(s)?)))?,
            CompTerm::App(t, u) => CompTerm::app(t.csubst(s)?, u.csubst(s)?),
            CompTerm::CtxLit(c) => CompTerm::CtxLit(c.csubst(s)?.into()),
            CompTerm::Rec(r) => CompTerm::Rec(r.csubst(s)?.into()),
        })
    }
}

impl CompSubstTarget for Rec {
    fn csubst(&self, s: &mut Subster) -> Result<Self, SubstError> {
        let b = &self.branches;
        let var = s.under(&[&b.var.psi, &b.var.p], |s, xs| {
            Ok::<_, SubstError>(VarBranch {
                psi: xs[0].clone(),
                p: xs[1].clone(),
                body: b.var.body.csubst(s)?,
            })
        })?;
        let app = s.under(&[&b.app.psi, &b.app.m, &b.app.n, &b.app.fm, &b.app.fn_], |s, xs| {
            Ok::<_, SubstError>(AppBranch {
                psi: xs[0].clone(),
                m: xs[1].clone(),
                n: xs[2].clone(),
                fm: xs[3].clone(),
                fn_: xs[4].clone(),
                body: b.app.body.csubst(s)?,
            })
        })?;
        let lam = s.under(&[&b.lam.psi, &b.lam.m, &b.lam.fm], |s, xs| {
            Ok::<_, SubstError>(LamBranch {
                psi: xs[0].clone(),
                m: xs[1].clone(),
                fm: xs[2].clone(),
                body: b.lam.body.csubst(s)?,
            })
        })?;
        Ok(Rec {
            motive: self.motive.csubst(s)?,
            branches: Branches { var, app, lam },
            ctx_arg: self.ctx_arg.csubst(s)?,
            scrutinee: self.scrutinee.csubst(s)?,
        })
    }
}

fn subster<T: FreeVars>(entries: Vec<(Name, Payload)>, strict: bool, target: &T) -> Subster {
    let mut avoid = free_comp_vars(target);
    for (_, p) in &entries {
        avoid.extend(free_comp_vars(p));
    }
    Subster { entries, strict, avoid }
}

/// `{θ}target`. Every free computation variable of `target` must be in the
/// domain of `θ`.
pub fn apply_comp_subst<T: CompSubstTarget>(theta: &CompSubst, target: &T) -> Result<T, SubstError> {
    target.csubst(&mut subster(theta.entries.clone(), true, target))
}

/// `{p/y}target`, leaving every other variable alone.
pub fn subst_one<T: CompSubstTarget>(p: Payload, y: &Name, target: &T) -> Result<T, SubstError> {
    target.csubst(&mut subster(vec![(y.clone(), p)], false, target))
}

/// Simultaneous non-strict substitution.
pub fn subst_many<T: CompSubstTarget>(theta: &CompSubst, target: &T) -> Result<T, SubstError> {
    target.csubst(&mut subster(theta.entries.clone(), false, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm() -> LfType {
        LfType::tm()
    }

    #[test]
    fn replaces_variable() {
        let theta = CompSubst::single("y", Payload::Term(CompTerm::Univ(0)));
        let r = apply_comp_subst(&theta, &CompTerm::var("y")).unwrap();
        assert!(alpha_eq(&r, &CompTerm::Univ(0)));
    }

    #[test]
    fn strict_rejects_free_variables() {
        let theta = CompSubst::single("y", Payload::Term(CompTerm::Univ(0)));
        let r = apply_comp_subst(&theta, &CompTerm::app(CompTerm::var("y"), CompTerm::var("z")));
        assert!(matches!(r, Err(SubstError::UnboundCompVar(z)) if z.text() == "z"));
    }

    #[test]
    fn binder_is_renamed_to_avoid_capture() {
        // {z/y} fn z => y
        let t = CompTerm::func("z", CompTerm::var("y"));
        let r = subst_one(Payload::Term(CompTerm::var("z")), &"y".into(), &t).unwrap();
        let CompTerm::Fn(b, body) = &r else { panic!() };
        assert_ne!(b.uid(), 0);
        assert!(alpha_eq(&**body, &CompTerm::var("z")));
    }

    #[test]
    fn context_splice() {
        // {(x:tm)/ψ} ⌈ψ, x:tm ⊢ tm⌉ renames the inner x
        let ty = CompTerm::box_ty(LfCtx::ctx_var("psi").with("x", tm()), tm());
        let phi = LfCtx::empty().with("x", tm());
        let r = subst_one(Payload::Ctx(phi), &"psi".into(), &ty).unwrap();
        let CompTerm::BoxTy(ct) = &r else { panic!() };
        let names: Vec<_> = ct.ctx().names().cloned().collect();
        assert_eq!(ct.ctx().head, None);
        assert_eq!(names.len(), 2);
        assert_ne!(names[0], names[1]);
    }

    #[test]
    fn spliced_names_are_not_captured_by_lf_binders() {
        // {(x:tm)/ψ} [ψ ⊢ \x. unbox(t ; wk(ψ, x))]
        let b = CompTerm::boxed_erased(
            ErasedCtx::ctx_var("psi"),
            LfTerm::lam(
                "x",
                LfTerm::unbox(CompTerm::var("t"), LfSubst::Wk(ErasedCtx::new(Some("psi".into()), vec!["x".into()]))),
            ),
        );
        let phi = LfCtx::empty().with("x", tm());
        let r = subst_one(Payload::Ctx(phi), &"psi".into(), &b).unwrap();
        let CompTerm::BoxObj(o) = &r else { panic!() };
        let LfTerm::Lam(x2, body) = &o.term else { panic!() };
        assert_ne!(x2, &Name::new("x"));
        let LfTerm::Unbox(_, s) = &**body else { panic!() };
        assert!(alpha_eq(&**s, &LfSubst::Wk(ErasedCtx::of_vars([Name::new("x"), x2.clone()]))));
    }

    #[test]
    fn context_variable_for_context_variable() {
        let b = CompTerm::boxed_erased(
            ErasedCtx::new(Some("psi".into()), vec!["x".into()]),
            LfTerm::unbox(CompTerm::var("t"), LfSubst::Wk(ErasedCtx::ctx_var("psi"))),
        );
        let r = subst_one(Payload::Term(CompTerm::var("phi")), &"psi".into(), &b).unwrap();
        let fv = free_comp_vars(&r);
        assert!(fv.contains(&Name::new("phi")) && !fv.contains(&Name::new("psi")));
    }

    #[test]
    fn splice_into_weakening() {
        let x = LfSubst::Wk(ErasedCtx::new(Some("psi".into()), vec!["x".into()]));
        let phi = LfCtx::empty().with("a", tm()).with("b", tm());
        let r = subst_one(Payload::Ctx(phi), &"psi".into(), &x).unwrap();
        assert!(alpha_eq(&r, &LfSubst::Wk(ErasedCtx::of_vars(["a", "b", "x"]))));
    }

    #[test]
    fn term_for_context_is_a_kind_mismatch() {
        let x = LfSubst::Wk(ErasedCtx::ctx_var("psi"));
        let r = subst_one(Payload::Term(CompTerm::Univ(0)), &"psi".into(), &x);
        assert!(matches!(r, Err(SubstError::KindMismatch { .. })));
    }

    #[test]
    fn context_at_variable_position_becomes_literal() {
        let t = CompTerm::app(CompTerm::var("f"), CompTerm::var("psi"));
        let r = subst_one(Payload::Ctx(LfCtx::empty()), &"psi".into(), &t).unwrap();
        let CompTerm::App(_, a) = &r else { panic!() };
        assert!(matches!(&**a, CompTerm::CtxLit(_)));
    }
}
