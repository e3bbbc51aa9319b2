//! Abstract syntax for the LF layer and the computation layer.
//!
//! Both layers use named variables. LF variables and computation variables
//! live in separate namespaces: an LF binder never captures a computation
//! variable and vice versa. The head of an LF context (`ψ`) is a computation
//! variable of domain `ctx`.

mod alpha;
mod free_vars;
mod name;
mod signature;

use std::sync::Arc;

pub use alpha::{alpha_eq, Alpha};
pub use free_vars::{free_comp_vars, free_lf_vars, Collector, FreeVars};
pub use name::{fresh_name, Name};
pub use signature::{CompCtx, SigEntry, Signature};

#[derive(Clone, Debug)]
pub enum LfKind {
    Type,
    Pi(Name, Arc<LfType>, Arc<LfKind>),
}

#[derive(Clone, Debug)]
pub enum LfType {
    Atom(Name, Vec<LfTerm>),
    Pi(Name, Arc<LfType>, Arc<LfType>),
}

#[derive(Clone, Debug)]
pub enum LfTerm {
    Var(Name),
    Const(Name),
    Lam(Name, Arc<LfTerm>),
    App(Arc<LfTerm>, Arc<LfTerm>),
    /// `⌊t⌋σ`: a computation producing a contextual object, relocated by `σ`.
    Unbox(Arc<CompTerm>, Arc<LfSubst>),
}

/// A typed LF context: an optional context-variable head followed by
/// declarations, innermost last.
#[derive(Clone, Debug, Default)]
pub struct LfCtx {
    pub head: Option<Name>,
    pub decls: Vec<(Name, LfType)>,
}

/// An LF context with its type annotations dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ErasedCtx {
    pub head: Option<Name>,
    pub vars: Vec<Name>,
}

/// Simultaneous LF substitutions. The domain is not stored; it is supplied
/// whenever the substitution is applied.
#[derive(Clone, Debug)]
pub enum LfSubst {
    Empty,
    Wk(ErasedCtx),
    Cons(Arc<LfSubst>, LfTerm),
}

#[derive(Clone, Debug)]
pub enum CtxType {
    /// `Ψ ⊢ A`
    Full(LfCtx, LfType),
    /// `Ψ ⊢# A`, inhabited only by variables of `Ψ`.
    VarOnly(LfCtx, LfType),
}

/// `Ψ̂ ⊢ M`. The optional annotation keeps the typed context the box was
/// written with; it is what lets inference recover `Ψ` from the box alone.
#[derive(Clone, Debug)]
pub struct CtxObj {
    pub ctx: ErasedCtx,
    pub term: LfTerm,
    pub annotation: Option<LfCtx>,
}

#[derive(Clone, Debug)]
pub enum AnnDom {
    Ty(CompTerm),
    Ctx,
}

#[derive(Clone, Debug)]
pub enum CompTerm {
    Var(Name),
    Univ(u32),
    BoxTy(Arc<CtxType>),
    BoxObj(Arc<CtxObj>),
    Pi(Name, Arc<AnnDom>, Arc<CompTerm>),
    Fn(Name, Arc<CompTerm>),
    App(Arc<CompTerm>, Arc<CompTerm>),
    /// An LF context passed as the argument of a `ctx`-domain function.
    CtxLit(Arc<LfCtx>),
    Rec(Arc<Rec>),
}

/// The recursor over contextual objects of type `⌈Ψ ⊢ tm⌉`.
#[derive(Clone, Debug)]
pub struct Rec {
    pub motive: CompTerm,
    pub branches: Branches,
    pub ctx_arg: LfCtx,
    pub scrutinee: CompTerm,
}

#[derive(Clone, Debug)]
pub struct Branches {
    pub var: VarBranch,
    pub app: AppBranch,
    pub lam: LamBranch,
}

#[derive(Clone, Debug)]
pub struct VarBranch {
    pub psi: Name,
    pub p: Name,
    pub body: CompTerm,
}

#[derive(Clone, Debug)]
pub struct AppBranch {
    pub psi: Name,
    pub m: Name,
    pub n: Name,
    pub fm: Name,
    pub fn_: Name,
    pub body: CompTerm,
}

#[derive(Clone, Debug)]
pub struct LamBranch {
    pub psi: Name,
    pub m: Name,
    pub fm: Name,
    pub body: CompTerm,
}

/// Names of the signature entries the recursor is defined over.
pub const TM: &str = "tm";
pub const LAM: &str = "lam";
pub const APP: &str = "app";

impl LfType {
    pub fn atom(head: impl Into<Name>) -> LfType {
        LfType::Atom(head.into(), Vec::new())
    }

    pub fn pi(x: impl Into<Name>, dom: LfType, body: LfType) -> LfType {
        LfType::Pi(x.into(), Arc::new(dom), Arc::new(body))
    }

    /// Non-dependent arrow; the binder is `_`.
    pub fn arrow(dom: LfType, body: LfType) -> LfType {
        LfType::pi("_", dom, body)
    }

    pub fn tm() -> LfType {
        LfType::atom(TM)
    }
}

impl LfKind {
    pub fn pi(x: impl Into<Name>, dom: LfType, body: LfKind) -> LfKind {
        LfKind::Pi(x.into(), Arc::new(dom), Arc::new(body))
    }
}

impl LfTerm {
    pub fn var(x: impl Into<Name>) -> LfTerm {
        LfTerm::Var(x.into())
    }

    pub fn cnst(c: impl Into<Name>) -> LfTerm {
        LfTerm::Const(c.into())
    }

    pub fn lam(x: impl Into<Name>, body: LfTerm) -> LfTerm {
        LfTerm::Lam(x.into(), Arc::new(body))
    }

    pub fn app(fun: LfTerm, arg: LfTerm) -> LfTerm {
        LfTerm::App(Arc::new(fun), Arc::new(arg))
    }

    pub fn apps(head: LfTerm, args: impl IntoIterator<Item = LfTerm>) -> LfTerm {
        args.into_iter().fold(head, LfTerm::app)
    }

    pub fn unbox(t: CompTerm, sigma: LfSubst) -> LfTerm {
        LfTerm::Unbox(Arc::new(t), Arc::new(sigma))
    }

    /// Splits `h M1 … Mn` into its head and arguments.
    pub fn spine(&self) -> (&LfTerm, Vec<&LfTerm>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let LfTerm::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }
}

impl ErasedCtx {
    pub fn new(head: Option<Name>, vars: Vec<Name>) -> ErasedCtx {
        ErasedCtx { head, vars }
    }

    pub fn empty() -> ErasedCtx {
        ErasedCtx::default()
    }

    pub fn of_vars<N: Into<Name>>(vars: impl IntoIterator<Item = N>) -> ErasedCtx {
        ErasedCtx {
            head: None,
            vars: vars.into_iter().map(Into::into).collect(),
        }
    }

    pub fn ctx_var(head: impl Into<Name>) -> ErasedCtx {
        ErasedCtx {
            head: Some(head.into()),
            vars: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_none() && self.vars.is_empty()
    }

    pub fn snoc(&self, x: Name) -> ErasedCtx {
        let mut out = self.clone();
        out.vars.push(x);
        out
    }

    pub fn prefix(&self, len: usize) -> ErasedCtx {
        ErasedCtx {
            head: self.head.clone(),
            vars: self.vars[..len].to_vec(),
        }
    }

    /// Same head and same number of declarations.
    pub fn same_shape(&self, other: &ErasedCtx) -> bool {
        self.head == other.head && self.vars.len() == other.vars.len()
    }

    pub fn contains(&self, x: &Name) -> bool {
        self.vars.contains(x)
    }
}

impl LfCtx {
    pub fn empty() -> LfCtx {
        LfCtx::default()
    }

    pub fn ctx_var(head: impl Into<Name>) -> LfCtx {
        LfCtx {
            head: Some(head.into()),
            decls: Vec::new(),
        }
    }

    pub fn with(mut self, x: impl Into<Name>, ty: LfType) -> LfCtx {
        self.decls.push((x.into(), ty));
        self
    }

    pub fn erase(&self) -> ErasedCtx {
        ErasedCtx {
            head: self.head.clone(),
            vars: self.decls.iter().map(|(x, _)| x.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_none() && self.decls.is_empty()
    }

    /// Type of the innermost declaration of `x`.
    pub fn lookup(&self, x: &Name) -> Option<&LfType> {
        self.decls.iter().rev().find(|(y, _)| y == x).map(|(_, a)| a)
    }

    pub fn prefix(&self, len: usize) -> LfCtx {
        LfCtx {
            head: self.head.clone(),
            decls: self.decls[..len].to_vec(),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.decls.iter().map(|(x, _)| x)
    }
}

/// Erases type annotations from an LF context, keeping the binder spine and
/// the context-variable head.
pub fn erase_ctx(psi: &LfCtx) -> ErasedCtx {
    psi.erase()
}

impl CtxType {
    pub fn ctx(&self) -> &LfCtx {
        match self {
            CtxType::Full(c, _) | CtxType::VarOnly(c, _) => c,
        }
    }

    pub fn ty(&self) -> &LfType {
        match self {
            CtxType::Full(_, a) | CtxType::VarOnly(_, a) => a,
        }
    }

    pub fn is_var_only(&self) -> bool {
        matches!(self, CtxType::VarOnly(..))
    }

    pub fn rebuild(&self, ctx: LfCtx, ty: LfType) -> CtxType {
        match self {
            CtxType::Full(..) => CtxType::Full(ctx, ty),
            CtxType::VarOnly(..) => CtxType::VarOnly(ctx, ty),
        }
    }
}

impl CtxObj {
    pub fn new(ctx: ErasedCtx, term: LfTerm) -> CtxObj {
        CtxObj {
            ctx,
            term,
            annotation: None,
        }
    }

    pub fn annotated(ctx: LfCtx, term: LfTerm) -> CtxObj {
        CtxObj {
            ctx: ctx.erase(),
            term,
            annotation: Some(ctx),
        }
    }
}

impl CompTerm {
    pub fn var(x: impl Into<Name>) -> CompTerm {
        CompTerm::Var(x.into())
    }

    pub fn app(fun: CompTerm, arg: CompTerm) -> CompTerm {
        CompTerm::App(Arc::new(fun), Arc::new(arg))
    }

    pub fn apps(head: CompTerm, args: impl IntoIterator<Item = CompTerm>) -> CompTerm {
        args.into_iter().fold(head, CompTerm::app)
    }

    pub fn func(x: impl Into<Name>, body: CompTerm) -> CompTerm {
        CompTerm::Fn(x.into(), Arc::new(body))
    }

    pub fn pi(x: impl Into<Name>, dom: AnnDom, body: CompTerm) -> CompTerm {
        CompTerm::Pi(x.into(), Arc::new(dom), Arc::new(body))
    }

    pub fn arrow(dom: CompTerm, body: CompTerm) -> CompTerm {
        CompTerm::pi("_", AnnDom::Ty(dom), body)
    }

    pub fn box_ty(ctx: LfCtx, ty: LfType) -> CompTerm {
        CompTerm::BoxTy(Arc::new(CtxType::Full(ctx, ty)))
    }

    pub fn var_box_ty(ctx: LfCtx, ty: LfType) -> CompTerm {
        CompTerm::BoxTy(Arc::new(CtxType::VarOnly(ctx, ty)))
    }

    /// A box carrying its typed context as annotation.
    pub fn boxed(ctx: LfCtx, term: LfTerm) -> CompTerm {
        CompTerm::BoxObj(Arc::new(CtxObj::annotated(ctx, term)))
    }

    pub fn boxed_erased(ctx: ErasedCtx, term: LfTerm) -> CompTerm {
        CompTerm::BoxObj(Arc::new(CtxObj::new(ctx, term)))
    }

    pub fn ctx_lit(ctx: LfCtx) -> CompTerm {
        CompTerm::CtxLit(Arc::new(ctx))
    }

    pub fn rec(motive: CompTerm, branches: Branches, ctx_arg: LfCtx, scrutinee: CompTerm) -> CompTerm {
        CompTerm::Rec(Arc::new(Rec {
            motive,
            branches,
            ctx_arg,
            scrutinee,
        }))
    }

    /// Splits `h t1 … tn` into its head and arguments.
    pub fn spine(&self) -> (&CompTerm, Vec<&CompTerm>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let CompTerm::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }
}

/// The shape `(ψ : ctx) → (y : ⌈ψ ⊢ tm⌉) → τ` every recursor motive must have.
#[derive(Clone, Debug)]
pub struct MotiveParts {
    pub psi: Name,
    pub y: Name,
    pub body: CompTerm,
}

impl MotiveParts {
    /// Reads the motive syntactically. Returns `None` for any other shape.
    pub fn of(motive: &CompTerm) -> Option<MotiveParts> {
        let CompTerm::Pi(psi, dom, rest) = motive else {
            return None;
        };
        if !matches!(**dom, AnnDom::Ctx) {
            return None;
        }
        let CompTerm::Pi(y, ydom, body) = &**rest else {
            return None;
        };
        let AnnDom::Ty(CompTerm::BoxTy(ct)) = &**ydom else {
            return None;
        };
        let CtxType::Full(ctx, ty) = &**ct else {
            return None;
        };
        let is_psi = ctx.head.as_ref() == Some(psi) && ctx.decls.is_empty();
        let is_tm = matches!(ty, LfType::Atom(a, sp) if a.text() == TM && a.uid() == 0 && sp.is_empty());
        if !is_psi || !is_tm || y == psi {
            return None;
        }
        Some(MotiveParts {
            psi: psi.clone(),
            y: y.clone(),
            body: (**body).clone(),
        })
    }
}
