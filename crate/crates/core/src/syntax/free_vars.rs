use std::collections::HashSet;

use super::*;

/// Free-variable collection over every syntactic class. LF and computation
/// variables are tracked separately.
pub trait FreeVars {
    fn collect_fv(&self, fv: &mut Collector);
}

#[derive(Default)]
pub struct Collector {
    lf_bound: Vec<Name>,
    comp_bound: Vec<Name>,
    pub lf: HashSet<Name>,
    pub comp: HashSet<Name>,
}

impl Collector {
    fn lf_occ(&mut self, x: &Name) {
        if !self.lf_bound.contains(x) {
            self.lf.insert(x.clone());
        }
    }

    fn comp_occ(&mut self, x: &Name) {
        if !self.comp_bound.contains(x) {
            self.comp.insert(x.clone());
        }
    }

    fn under_lf<R>(&mut self, xs: &[Name], f: impl FnOnce(&mut Self) -> R) -> R {
        let n = self.lf_bound.len();
        self.lf_bound.extend(xs.iter().cloned());
        let r = f(self);
        self.lf_bound.truncate(n);
        r
    }

    fn under_comp<R>(&mut self, xs: &[&Name], f: impl FnOnce(&mut Self) -> R) -> R {
        let n = self.comp_bound.len();
        self.comp_bound.extend(xs.iter().map(|x| (*x).clone()));
        let r = f(self);
        self.comp_bound.truncate(n);
        r
    }
}

pub fn free_lf_vars<T: FreeVars + ?Sized>(t: &T) -> HashSet<Name> {
    let mut c = Collector::default();
    t.collect_fv(&mut c);
    c.lf
}

pub fn free_comp_vars<T: FreeVars + ?Sized>(t: &T) -> HashSet<Name> {
    let mut c = Collector::default();
    t.collect_fv(&mut c);
    c.comp
}

impl<T: FreeVars + ?Sized> FreeVars for &T {
    fn collect_fv(&self, fv: &mut Collector) {
        (**self).collect_fv(fv)
    }
}

impl<T: FreeVars> FreeVars for [T] {
    fn collect_fv(&self, fv: &mut Collector) {
        for t in self {
            t.collect_fv(fv);
        }
    }
}

impl FreeVars for LfTerm {
    fn collect_fv(&self, fv: &mut Collector) {
        match self {
            LfTerm::Var(x) => fv.lf_occ(x),
            LfTerm::Const(_) => {}
            LfTerm::Lam(x, m) => fv.under_lf(std::slice::from_ref(x), |fv| m.collect_fv(fv)),
            LfTerm::App(m, n) => {
                m.collect_fv(fv);
                n.collect_fv(fv);
            }
            LfTerm::Unbox(t, s) => {
                t.collect_fv(fv);
                s.collect_fv(fv);
            }
        }
    }
}

impl FreeVars for LfType {
    fn collect_fv(&self, fv: &mut Collector) {
        match self {
            LfType::Atom(_, spine) => spine.collect_fv(fv),
            LfType::Pi(x, a, b) => {
                a.collect_fv(fv);
                fv.under_lf(std::slice::from_ref(x), |fv| b.collect_fv(fv));
            }
        }
    }
}

impl FreeVars for LfKind {
    fn collect_fv(&self, fv: &mut Collector) {
        match self {
            LfKind::Type => {}
            LfKind::Pi(x, a, k) => {
                a.collect_fv(fv);
                fv.under_lf(std::slice::from_ref(x), |fv| k.collect_fv(fv));
            }
        }
    }
}

impl FreeVars for ErasedCtx {
    /// The head counts as a computation variable; the declared names are
    /// occurrences of LF variables (as in `wk(Ψ̂)`).
    fn collect_fv(&self, fv: &mut Collector) {
        if let Some(h) = &self.head {
            fv.comp_occ(h);
        }
        for x in &self.vars {
            fv.lf_occ(x);
        }
    }
}

impl FreeVars for LfSubst {
    fn collect_fv(&self, fv: &mut Collector) {
        match self {
            LfSubst::Empty => {}
            LfSubst::Wk(ctx) => ctx.collect_fv(fv),
            LfSubst::Cons(s, m) => {
                s.collect_fv(fv);
                m.collect_fv(fv);
            }
        }
    }
}

impl FreeVars for LfCtx {
    fn collect_fv(&self, fv: &mut Collector) {
        if let Some(h) = &self.head {
            fv.comp_occ(h);
        }
        let names: Vec<Name> = self.names().cloned().collect();
        for (i, (_, a)) in self.decls.iter().enumerate() {
            fv.under_lf(&names[..i], |fv| a.collect_fv(fv));
        }
    }
}

/// Collects a context together with a body scoped by all of its binders.
fn ctx_scope(ctx: &LfCtx, fv: &mut Collector, body: impl FnOnce(&mut Collector)) {
    ctx.collect_fv(fv);
    let names: Vec<Name> = ctx.names().cloned().collect();
    fv.under_lf(&names, body);
}

impl FreeVars for CtxType {
    fn collect_fv(&self, fv: &mut Collector) {
        ctx_scope(self.ctx(), fv, |fv| self.ty().collect_fv(fv));
    }
}

impl FreeVars for CtxObj {
    fn collect_fv(&self, fv: &mut Collector) {
        if let Some(h) = &self.ctx.head {
            fv.comp_occ(h);
        }
        if let Some(ann) = &self.annotation {
            ann.collect_fv(fv);
        }
        fv.under_lf(&self.ctx.vars, |fv| self.term.collect_fv(fv));
    }
}

impl FreeVars for AnnDom {
    fn collect_fv(&self, fv: &mut Collector) {
        if let AnnDom::Ty(t) = self {
            t.collect_fv(fv);
        }
    }
}

impl FreeVars for CompTerm {
    fn collect_fv(&self, fv: &mut Collector) {
        match self {
            CompTerm::Var(y) => fv.comp_occ(y),
            CompTerm::Univ(_) => {}
            CompTerm::BoxTy(t) => t.collect_fv(fv),
            CompTerm::BoxObj(c) => c.collect_fv(fv),
            CompTerm::Pi(y, dom, body) => {
                dom.collect_fv(fv);
                fv.under_comp(&[y], |fv| body.collect_fv(fv));
            }
            CompTerm::Fn(y, body) => fv.under_comp(&[y], |fv| body.collect_fv(fv)),
            CompTerm::App(t, s) => {
                t.collect_fv(fv);
                s.collect_fv(fv);
            }
            CompTerm::CtxLit(c) => c.collect_fv(fv),
            CompTerm::Rec(r) => r.collect_fv(fv),
        }
    }
}

impl FreeVars for Rec {
    fn collect_fv(&self, fv: &mut Collector) {
        self.motive.collect_fv(fv);
        self.ctx_arg.collect_fv(fv);
        self.scrutinee.collect_fv(fv);
        let b = &self.branches;
        fv.under_comp(&[&b.var.psi, &b.var.p], |fv| b.var.body.collect_fv(fv));
        fv.under_comp(&[&b.app.psi, &b.app.m, &b.app.n, &b.app.fm, &b.app.fn_], |fv| {
            b.app.body.collect_fv(fv)
        });
        fv.under_comp(&[&b.lam.psi, &b.lam.m, &b.lam.fm], |fv| b.lam.body.collect_fv(fv));
    }
}
