//! Algorithmic definitional equality, directed by weak-head normal forms
//! and, where available, by types.

use std::collections::HashSet;

use crate::comp_subst::Payload;
use crate::lf_subst::{align_lf, apply_lf_subst, single_subst};
use crate::syntax::*;
use crate::typecheck::{rename_comp, Checker, TcResult};
use crate::whnf::is_neutral_comp;

impl Checker<'_> {
    /// `Γ ⊢ t1 ≡ t2 : τ`.
    pub fn conv_comp(&mut self, t1: &CompTerm, t2: &CompTerm, tau: &CompTerm) -> TcResult<bool> {
        let tau = self.whnf(tau)?;
        match &tau {
            CompTerm::Pi(y, dom, cod) => {
                let z = self.fresh_comp(y, &[t1, t2, &tau]);
                let cod = rename_comp(y, &z, cod)?;
                let arg = CompTerm::Var(z.clone());
                let a1 = CompTerm::app(t1.clone(), arg.clone());
                let a2 = CompTerm::app(t2.clone(), arg);
                self.bind(z, (**dom).clone(), |c| c.conv_comp(&a1, &a2, &cod))
            }
            CompTerm::BoxTy(ct) => {
                let psi = ct.ctx();
                let hat = psi.erase();
                let Some(m1) = self.as_lf(t1, &hat)? else { return Ok(false) };
                let Some(m2) = self.as_lf(t2, &hat)? else { return Ok(false) };
                self.conv_lf_term(psi, &m1, &m2, ct.ty())
            }
            CompTerm::Univ(_) => self.conv_comp_type(t1, t2),
            _ => {
                let w1 = self.whnf(t1)?;
                let w2 = self.whnf(t2)?;
                self.conv_neutral(&w1, &w2)
            }
        }
    }

    /// Reads an inhabitant of a box type over `hat` as an LF term in that
    /// context: boxes are opened, neutrals are unboxed with the identity.
    fn as_lf(&mut self, t: &CompTerm, hat: &ErasedCtx) -> TcResult<Option<LfTerm>> {
        let w = self.whnf(t)?;
        Ok(match &w {
            CompTerm::BoxObj(b) if b.ctx.same_shape(hat) => Some(align_lf(&b.ctx, hat, &b.term)),
            _ if is_neutral_comp(&w) => Some(LfTerm::unbox(w, LfSubst::Wk(hat.clone()))),
            _ => None,
        })
    }

    /// Equality of two types.
    pub fn conv_comp_type(&mut self, t1: &CompTerm, t2: &CompTerm) -> TcResult<bool> {
        let w1 = self.whnf(t1)?;
        let w2 = self.whnf(t2)?;
        match (&w1, &w2) {
            (CompTerm::Univ(i), CompTerm::Univ(j)) => Ok(i == j),
            (CompTerm::BoxTy(a), CompTerm::BoxTy(b)) => {
                if a.is_var_only() != b.is_var_only() || !self.conv_lf_ctx(a.ctx(), b.ctx())? {
                    return Ok(false);
                }
                let ty2 = align_lf(&b.ctx().erase(), &a.ctx().erase(), b.ty());
                self.conv_lf_type(a.ctx(), a.ty(), &ty2)
            }
            (CompTerm::Pi(y1, d1, c1), CompTerm::Pi(y2, d2, c2)) => {
                let same_dom = match (&**d1, &**d2) {
                    (AnnDom::Ctx, AnnDom::Ctx) => true,
                    (AnnDom::Ty(a), AnnDom::Ty(b)) => self.conv_comp_type(a, b)?,
                    _ => false,
                };
                if !same_dom {
                    return Ok(false);
                }
                let z = self.fresh_comp(y1, &[&w1, &w2]);
                let c1 = rename_comp(y1, &z, c1)?;
                let c2 = rename_comp(y2, &z, c2)?;
                self.bind(z, (**d1).clone(), |c| c.conv_comp_type(&c1, &c2))
            }
            _ if is_neutral_comp(&w1) && is_neutral_comp(&w2) => self.conv_neutral(&w1, &w2),
            _ => Ok(false),
        }
    }

    /// Structural comparison of neutral computations.
    pub fn conv_neutral(&mut self, n1: &CompTerm, n2: &CompTerm) -> TcResult<bool> {
        match (n1, n2) {
            (CompTerm::Var(a), CompTerm::Var(b)) => Ok(a == b),
            (CompTerm::App(f1, s1), CompTerm::App(f2, s2)) => {
                if !self.conv_neutral(f1, f2)? {
                    return Ok(false);
                }
                let fty = self.typeof_neutral(f1)?;
                let CompTerm::Pi(_, dom, _) = self.whnf(&fty)? else {
                    return Ok(false);
                };
                match &*dom {
                    AnnDom::Ty(tau) => self.conv_comp(s1, s2, tau),
                    AnnDom::Ctx => {
                        let c1 = self.ctx_of_arg(s1)?;
                        let c2 = self.ctx_of_arg(s2)?;
                        self.conv_lf_ctx(&c1, &c2)
                    }
                }
            }
            (CompTerm::Rec(r1), CompTerm::Rec(r2)) => self.conv_rec(r1, r2),
            _ => Ok(false),
        }
    }

    fn conv_rec(&mut self, r1: &Rec, r2: &Rec) -> TcResult<bool> {
        if !self.conv_comp_type(&r1.motive, &r2.motive)? || !self.conv_lf_ctx(&r1.ctx_arg, &r2.ctx_arg)? {
            return Ok(false);
        }
        let scrut_ty = CompTerm::box_ty(r1.ctx_arg.clone(), LfType::tm());
        if !self.conv_comp(&r1.scrutinee, &r2.scrutinee, &scrut_ty)? {
            return Ok(false);
        }
        let Some(parts) = MotiveParts::of(&r1.motive) else {
            return Ok(false);
        };
        let frames = self.branch_frames(&parts, &r1.branches)?;
        // The second recursor's branches, opened with the same binder names.
        let others = [
            (
                vec![&r2.branches.var.psi, &r2.branches.var.p],
                &r2.branches.var.body,
            ),
            (
                vec![
                    &r2.branches.app.psi,
                    &r2.branches.app.m,
                    &r2.branches.app.n,
                    &r2.branches.app.fm,
                    &r2.branches.app.fn_,
                ],
                &r2.branches.app.body,
            ),
            (
                vec![&r2.branches.lam.psi, &r2.branches.lam.m, &r2.branches.lam.fm],
                &r2.branches.lam.body,
            ),
        ];
        for (frame, (names, body)) in frames.iter().zip(others) {
            let mut theta = crate::comp_subst::CompSubst::new();
            for (old, (new, _)) in names.iter().zip(&frame.binders) {
                theta.push((*old).clone(), Payload::Term(CompTerm::Var(new.clone())));
            }
            let body2 = crate::comp_subst::subst_many(&theta, body)?;
            let same = self.with_binders(&frame.binders, |c| c.conv_comp(&frame.body, &body2, &frame.goal))?;
            if !same {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `Γ; Ψ ⊢ M1 ≡ M2 : A`.
    pub fn conv_lf_term(&mut self, psi: &LfCtx, m1: &LfTerm, m2: &LfTerm, a: &LfType) -> TcResult<bool> {
        match a {
            LfType::Pi(x, dom, cod) => {
                let mut avoid: HashSet<Name> = psi.names().cloned().collect();
                avoid.extend(free_lf_vars(m1));
                avoid.extend(free_lf_vars(m2));
                let z = fresh_name(x, &avoid);
                let zv = LfTerm::Var(z.clone());
                let cod = single_subst(&zv, x, &**cod);
                let ext = psi.clone().with(z, (**dom).clone());
                self.conv_lf_term(&ext, &LfTerm::app(m1.clone(), zv.clone()), &LfTerm::app(m2.clone(), zv), &cod)
            }
            LfType::Atom(..) => {
                let w1 = self.whnf_lf(m1)?;
                let w2 = self.whnf_lf(m2)?;
                Ok(self.conv_lf_neutral(psi, &w1, &w2)?.is_some())
            }
        }
    }

    /// Compares two LF terms in whnf at an atomic type. Returns the type of
    /// the (common) neutral if they are equal.
    fn conv_lf_neutral(&mut self, psi: &LfCtx, n1: &LfTerm, n2: &LfTerm) -> TcResult<Option<LfType>> {
        match (n1, n2) {
            (LfTerm::Var(a), LfTerm::Var(b)) if a == b => Ok(psi.lookup(a).cloned()),
            (LfTerm::Const(a), LfTerm::Const(b)) if a == b => Ok(self.sig.constant(a).cloned()),
            (LfTerm::App(f1, a1), LfTerm::App(f2, a2)) => {
                let Some(fty) = self.conv_lf_neutral(psi, f1, f2)? else {
                    return Ok(None);
                };
                let LfType::Pi(x, dom, cod) = fty else {
                    return Ok(None);
                };
                if !self.conv_lf_term(psi, a1, a2, &dom)? {
                    return Ok(None);
                }
                Ok(Some(single_subst(a1, &x, &*cod)))
            }
            (LfTerm::Unbox(t1, s1), LfTerm::Unbox(t2, s2)) => {
                if !is_neutral_comp(t1) || !is_neutral_comp(t2) || !self.conv_neutral(t1, t2)? {
                    return Ok(None);
                }
                let ty1 = self.typeof_neutral(t1)?;
                let ty2 = self.typeof_neutral(t2)?;
                let (CompTerm::BoxTy(c1), CompTerm::BoxTy(c2)) = (self.whnf(&ty1)?, self.whnf(&ty2)?) else {
                    return Ok(None);
                };
                if !self.conv_lf_ctx(c1.ctx(), c2.ctx())? || !self.conv_lf_subst(psi, s1, s2, c1.ctx())? {
                    return Ok(None);
                }
                Ok(Some(apply_lf_subst(s1, &c1.ctx().erase(), c1.ty())?))
            }
            _ => Ok(None),
        }
    }

    /// `Γ; Ψ ⊢ σ1 ≡ σ2 : Φ`.
    pub fn conv_lf_subst(&mut self, psi: &LfCtx, s1: &LfSubst, s2: &LfSubst, phi: &LfCtx) -> TcResult<bool> {
        let w1 = self.whnf_subst(s1)?;
        let w2 = self.whnf_subst(s2)?;
        match phi.decls.last() {
            None if phi.head.is_none() => Ok(true),
            None => Ok(matches!((&w1, &w2), (LfSubst::Wk(_), LfSubst::Wk(_)))),
            Some((_, a)) => {
                let (LfSubst::Cons(r1, m1), LfSubst::Cons(r2, m2)) = (&w1, &w2) else {
                    return Ok(false);
                };
                let prefix = phi.prefix(phi.decls.len() - 1);
                if !self.conv_lf_subst(psi, r1, r2, &prefix)? {
                    return Ok(false);
                }
                let a = apply_lf_subst(r1, &prefix.erase(), a)?;
                self.conv_lf_term(psi, m1, m2, &a)
            }
        }
    }

    /// `Γ; Ψ ⊢ A1 ≡ A2 : type`.
    pub fn conv_lf_type(&mut self, psi: &LfCtx, a1: &LfType, a2: &LfType) -> TcResult<bool> {
        match (a1, a2) {
            (LfType::Pi(x1, d1, c1), LfType::Pi(x2, d2, c2)) => {
                if !self.conv_lf_type(psi, d1, d2)? {
                    return Ok(false);
                }
                let mut avoid: HashSet<Name> = psi.names().cloned().collect();
                avoid.extend(free_lf_vars(a1));
                avoid.extend(free_lf_vars(a2));
                let z = fresh_name(x1, &avoid);
                let zv = LfTerm::Var(z.clone());
                let c1 = single_subst(&zv, x1, &**c1);
                let c2 = single_subst(&zv, x2, &**c2);
                self.conv_lf_type(&psi.clone().with(z, (**d1).clone()), &c1, &c2)
            }
            (LfType::Atom(f1, s1), LfType::Atom(f2, s2)) => {
                if f1 != f2 || s1.len() != s2.len() {
                    return Ok(false);
                }
                let Some(mut kind) = self.sig.family(f1).cloned() else {
                    return Ok(false);
                };
                for (m1, m2) in s1.iter().zip(s2) {
                    let LfKind::Pi(x, dom, rest) = kind else {
                        return Ok(false);
                    };
                    if !self.conv_lf_term(psi, m1, m2, &dom)? {
                        return Ok(false);
                    }
                    kind = single_subst(m1, &x, &*rest);
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    /// Equality of LF contexts: same head and length, pointwise equal types.
    pub fn conv_lf_ctx(&mut self, c1: &LfCtx, c2: &LfCtx) -> TcResult<bool> {
        if c1.head != c2.head || c1.decls.len() != c2.decls.len() {
            return Ok(false);
        }
        let (h1, h2) = (c1.erase(), c2.erase());
        for i in 0..c1.decls.len() {
            let a2 = align_lf(&h2.prefix(i), &h1.prefix(i), &c2.decls[i].1);
            if !self.conv_lf_type(&c1.prefix(i), &c1.decls[i].1, &a2)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm() -> LfType {
        LfType::tm()
    }

    fn closed_tm() -> CompTerm {
        CompTerm::box_ty(LfCtx::empty(), tm())
    }

    fn id_lam() -> LfTerm {
        LfTerm::app(LfTerm::cnst(LAM), LfTerm::lam("x", LfTerm::var("x")))
    }

    #[test]
    fn beta_and_eta_for_computations() {
        let s = Signature::tm_signature();
        let mut gamma = CompCtx::new();
        gamma.push("s".into(), AnnDom::Ty(closed_tm()));
        let mut c = Checker::new(&s).with_gamma(gamma);
        let redex = CompTerm::app(CompTerm::func("y", CompTerm::var("y")), CompTerm::var("s"));
        assert!(c.conv_comp(&redex, &CompTerm::var("s"), &closed_tm()).unwrap());
        let eta = CompTerm::boxed(LfCtx::empty(), LfTerm::unbox(CompTerm::var("s"), LfSubst::Wk(ErasedCtx::empty())));
        assert!(c.conv_comp(&CompTerm::var("s"), &eta, &closed_tm()).unwrap());
    }

    #[test]
    fn lf_eta() {
        let s = Signature::tm_signature();
        let mut c = Checker::new(&s);
        let fty = LfType::pi("y", tm(), tm());
        let psi = LfCtx::empty().with("x", fty.clone());
        let eta = LfTerm::lam("y", LfTerm::app(LfTerm::var("x"), LfTerm::var("y")));
        assert!(c.conv_lf_term(&psi, &LfTerm::var("x"), &eta, &fty).unwrap());
        assert!(c.conv_lf_term(&LfCtx::empty(), &id_lam(), &id_lam(), &tm()).unwrap());
    }

    #[test]
    fn unbox_neutrals() {
        let s = Signature::tm_signature();
        let mut gamma = CompCtx::new();
        gamma.push("y".into(), AnnDom::Ty(CompTerm::box_ty(LfCtx::empty().with("x", tm()), tm())));
        let mut c = Checker::new(&s).with_gamma(gamma);
        let w = LfCtx::empty().with("w", tm());
        let m = LfTerm::unbox(CompTerm::var("y"), LfSubst::Cons(LfSubst::Empty.into(), LfTerm::var("w")));
        assert!(c.conv_lf_term(&w, &m, &m.clone(), &tm()).unwrap());
        let other = LfTerm::unbox(CompTerm::var("y"), LfSubst::Cons(LfSubst::Empty.into(), id_lam()));
        assert!(!c.conv_lf_term(&w, &m, &other, &tm()).unwrap());
    }

    #[test]
    fn substitutions() {
        let s = Signature::tm_signature();
        let mut gamma = CompCtx::new();
        gamma.push("psi".into(), AnnDom::Ctx);
        let mut c = Checker::new(&s).with_gamma(gamma);
        let x = LfCtx::empty().with("x", tm());
        assert!(c.conv_lf_subst(&x, &LfSubst::Wk(ErasedCtx::empty()), &LfSubst::Empty, &LfCtx::empty()).unwrap());
        let psi_x = LfCtx::ctx_var("psi").with("x", tm());
        let wk = LfSubst::Wk(psi_x.erase());
        let cons = LfSubst::Cons(LfSubst::Wk(ErasedCtx::ctx_var("psi")).into(), LfTerm::var("x"));
        assert!(c.conv_lf_subst(&psi_x, &wk, &cons, &psi_x).unwrap());
    }

    #[test]
    fn types_and_contexts() {
        let s = Signature::tm_signature();
        let mut c = Checker::new(&s);
        assert!(c.conv_comp_type(&CompTerm::Univ(3), &CompTerm::Univ(3)).unwrap());
        assert!(!c.conv_comp_type(&CompTerm::Univ(3), &CompTerm::Univ(4)).unwrap());
        let a = CompTerm::box_ty(LfCtx::empty().with("x", tm()), tm());
        let b = CompTerm::box_ty(LfCtx::empty().with("y", tm()), tm());
        assert!(c.conv_comp_type(&a, &b).unwrap());
        assert!(c.conv_lf_type(&LfCtx::empty(), &LfType::pi("x", tm(), tm()), &LfType::pi("y", tm(), tm())).unwrap());
        let x = LfCtx::empty().with("x", tm());
        assert!(!c.conv_lf_ctx(&x, &x.clone().with("y", tm())).unwrap());
    }
}
