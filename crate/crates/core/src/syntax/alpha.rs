use super::*;

/// Syntactic equality up to renaming of bound variables.
pub trait Alpha {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool;
}

/// Pairs of binders entered so far, one stack per namespace.
#[derive(Default)]
pub struct AlphaEnv {
    lf: Vec<(Name, Name)>,
    comp: Vec<(Name, Name)>,
}

fn var_eq(pairs: &[(Name, Name)], a: &Name, b: &Name) -> bool {
    let i = pairs.iter().rposition(|(l, _)| l == a);
    let j = pairs.iter().rposition(|(_, r)| r == b);
    match (i, j) {
        (None, None) => a == b,
        (Some(i), Some(j)) => i == j,
        _ => false,
    }
}

impl AlphaEnv {
    fn lf_scope(&mut self, pairs: impl IntoIterator<Item = (Name, Name)>, f: impl FnOnce(&mut Self) -> bool) -> bool {
        let n = self.lf.len();
        self.lf.extend(pairs);
        let r = f(self);
        self.lf.truncate(n);
        r
    }

    fn comp_scope(&mut self, pairs: &[(&Name, &Name)], f: impl FnOnce(&mut Self) -> bool) -> bool {
        let n = self.comp.len();
        self.comp.extend(pairs.iter().map(|(a, b)| ((*a).clone(), (*b).clone())));
        let r = f(self);
        self.comp.truncate(n);
        r
    }

    fn head_eq(&self, a: &Option<Name>, b: &Option<Name>) -> bool {
        match (a, b) {
            (None, None) => true,
            (Some(a), Some(b)) => var_eq(&self.comp, a, b),
            _ => false,
        }
    }

    /// Compares two typed contexts as binders scoping over `body`.
    fn ctx_binder(&mut self, a: &LfCtx, b: &LfCtx, body: impl FnOnce(&mut Self) -> bool) -> bool {
        if !self.head_eq(&a.head, &b.head) || a.decls.len() != b.decls.len() {
            return false;
        }
        let n = self.lf.len();
        for ((x, ta), (y, tb)) in a.decls.iter().zip(&b.decls) {
            if !ta.alpha(tb, self) {
                self.lf.truncate(n);
                return false;
            }
            self.lf.push((x.clone(), y.clone()));
        }
        let r = body(self);
        self.lf.truncate(n);
        r
    }
}

pub fn alpha_eq<T: Alpha + ?Sized>(a: &T, b: &T) -> bool {
    a.alpha(b, &mut AlphaEnv::default())
}

impl<T: Alpha + ?Sized> Alpha for std::sync::Arc<T> {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        (**self).alpha(other, env)
    }
}

impl Alpha for LfTerm {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        match (self, other) {
            (LfTerm::Var(a), LfTerm::Var(b)) => var_eq(&env.lf, a, b),
            (LfTerm::Const(a), LfTerm::Const(b)) => a == b,
            (LfTerm::Lam(x, m), LfTerm::Lam(y, n)) => {
                env.lf_scope([(x.clone(), y.clone())], |env| m.alpha(n, env))
            }
            (LfTerm::App(m1, n1), LfTerm::App(m2, n2)) => m1.alpha(m2, env) && n1.alpha(n2, env),
            (LfTerm::Unbox(t1, s1), LfTerm::Unbox(t2, s2)) => t1.alpha(t2, env) && s1.alpha(s2, env),
            _ => false,
        }
    }
}

impl Alpha for LfType {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        match (self, other) {
            (LfType::Atom(a, s1), LfType::Atom(b, s2)) => {
                a == b && s1.len() == s2.len() && s1.iter().zip(s2).all(|(m, n)| m.alpha(n, env))
            }
            (LfType::Pi(x, a1, b1), LfType::Pi(y, a2, b2)) => {
                a1.alpha(a2, env) && env.lf_scope([(x.clone(), y.clone())], |env| b1.alpha(b2, env))
            }
            _ => false,
        }
    }
}

impl Alpha for LfKind {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        match (self, other) {
            (LfKind::Type, LfKind::Type) => true,
            (LfKind::Pi(x, a1, k1), LfKind::Pi(y, a2, k2)) => {
                a1.alpha(a2, env) && env.lf_scope([(x.clone(), y.clone())], |env| k1.alpha(k2, env))
            }
            _ => false,
        }
    }
}

impl Alpha for ErasedCtx {
    /// Compares erased contexts as occurrences (the `wk(Ψ̂)` reading).
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        env.head_eq(&self.head, &other.head)
            && self.vars.len() == other.vars.len()
            && self.vars.iter().zip(&other.vars).all(|(a, b)| var_eq(&env.lf, a, b))
    }
}

impl Alpha for LfSubst {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        match (self, other) {
            (LfSubst::Empty, LfSubst::Empty) => true,
            (LfSubst::Wk(a), LfSubst::Wk(b)) => a.alpha(b, env),
            (LfSubst::Cons(s1, m1), LfSubst::Cons(s2, m2)) => s1.alpha(s2, env) && m1.alpha(m2, env),
            _ => false,
        }
    }
}

impl Alpha for LfCtx {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        env.ctx_binder(self, other, |_| true)
    }
}

impl Alpha for CtxType {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        if self.is_var_only() != other.is_var_only() {
            return false;
        }
        env.ctx_binder(self.ctx(), other.ctx(), |env| self.ty().alpha(other.ty(), env))
    }
}

impl Alpha for CtxObj {
    /// The typed-context annotation is not part of the object's identity.
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        if !env.head_eq(&self.ctx.head, &other.ctx.head) || self.ctx.vars.len() != other.ctx.vars.len() {
            return false;
        }
        let pairs: Vec<(Name, Name)> = self.ctx.vars.iter().cloned().zip(other.ctx.vars.iter().cloned()).collect();
        env.lf_scope(pairs, |env| self.term.alpha(&other.term, env))
    }
}

impl Alpha for AnnDom {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        match (self, other) {
            (AnnDom::Ctx, AnnDom::Ctx) => true,
            (AnnDom::Ty(a), AnnDom::Ty(b)) => a.alpha(b, env),
            _ => false,
        }
    }
}

impl Alpha for CompTerm {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        match (self, other) {
            (CompTerm::Var(a), CompTerm::Var(b)) => var_eq(&env.comp, a, b),
            (CompTerm::Univ(i), CompTerm::Univ(j)) => i == j,
            (CompTerm::BoxTy(a), CompTerm::BoxTy(b)) => a.alpha(b, env),
            (CompTerm::BoxObj(a), CompTerm::BoxObj(b)) => a.alpha(b, env),
            (CompTerm::Pi(x, d1, b1), CompTerm::Pi(y, d2, b2)) => {
                d1.alpha(d2, env) && env.comp_scope(&[(x, y)], |env| b1.alpha(b2, env))
            }
            (CompTerm::Fn(x, b1), CompTerm::Fn(y, b2)) => env.comp_scope(&[(x, y)], |env| b1.alpha(b2, env)),
            (CompTerm::App(t1, s1), CompTerm::App(t2, s2)) => t1.alpha(t2, env) && s1.alpha(s2, env),
            (CompTerm::CtxLit(a), CompTerm::CtxLit(b)) => a.alpha(b, env),
            (CompTerm::Rec(a), CompTerm::Rec(b)) => a.alpha(b, env),
            _ => false,
        }
    }
}

impl Alpha for Rec {
    fn alpha(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        let (b1, b2) = (&self.branches, &other.branches);
        self.motive.alpha(&other.motive, env)
            && self.ctx_arg.alpha(&other.ctx_arg, env)
            && self.scrutinee.alpha(&other.scrutinee, env)
            && env.comp_scope(&[(&b1.var.psi, &b2.var.psi), (&b1.var.p, &b2.var.p)], |env| {
                b1.var.body.alpha(&b2.var.body, env)
            })
            && env.comp_scope(
                &[
                    (&b1.app.psi, &b2.app.psi),
                    (&b1.app.m, &b2.app.m),
                    (&b1.app.n, &b2.app.n),
                    (&b1.app.fm, &b2.app.fm),
                    (&b1.app.fn_, &b2.app.fn_),
                ],
                |env| b1.app.body.alpha(&b2.app.body, env),
            )
            && env.comp_scope(
                &[(&b1.lam.psi, &b2.lam.psi), (&b1.lam.m, &b2.lam.m), (&b1.lam.fm, &b2.lam.fm)],
                |env| b1.lam.body.alpha(&b2.lam.body, env),
            )
    }
}
