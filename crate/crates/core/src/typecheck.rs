//! Bidirectional type checking for both layers.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::comp_subst::{subst_many, subst_one, CompSubst, Payload};
use crate::lf_subst::{align_lf, apply_lf_subst, single_subst, SubstError};
use crate::syntax::*;
use crate::whnf::{is_neutral_comp, Reducer, WhnfError, DEFAULT_FUEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    ParseError,
    UnboundLfVar,
    UnknownConst,
    NotAFunction,
    TypeMismatch,
    CtxMismatch,
    NotPiType,
    NotAnExtension,
    ArityMismatch,
    UnboundCtxVar,
    SchemaViolation,
    UnboundCompVar,
    NotAFunctionType,
    NotABoxType,
    MotiveShape,
    NotVarBox,
    NotNeutral,
    DuplicateDecl,
    IllKindedDecl,
    NotAType,
    CannotInfer,
    KindMismatch,
    TruncMismatch,
    NonCanonicalHead,
    IllFormedScrutinee,
    FuelExhausted,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 26] = [
        ErrorCode::ParseError,
        ErrorCode::UnboundLfVar,
        ErrorCode::UnknownConst,
        ErrorCode::NotAFunction,
        ErrorCode::TypeMismatch,
        ErrorCode::CtxMismatch,
        ErrorCode::NotPiType,
        ErrorCode::NotAnExtension,
        ErrorCode::ArityMismatch,
        ErrorCode::UnboundCtxVar,
        ErrorCode::SchemaViolation,
        ErrorCode::UnboundCompVar,
        ErrorCode::NotAFunctionType,
        ErrorCode::NotABoxType,
        ErrorCode::MotiveShape,
        ErrorCode::NotVarBox,
        ErrorCode::NotNeutral,
        ErrorCode::DuplicateDecl,
        ErrorCode::IllKindedDecl,
        ErrorCode::NotAType,
        ErrorCode::CannotInfer,
        ErrorCode::KindMismatch,
        ErrorCode::TruncMismatch,
        ErrorCode::NonCanonicalHead,
        ErrorCode::IllFormedScrutinee,
        ErrorCode::FuelExhausted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::ParseError => "ParseError",
            ErrorCode::UnboundLfVar => "UnboundLfVar",
            ErrorCode::UnknownConst => "UnknownConst",
            ErrorCode::NotAFunction => "NotAFunction",
            ErrorCode::TypeMismatch => "TypeMismatch",
            ErrorCode::CtxMismatch => "CtxMismatch",
            ErrorCode::NotPiType => "NotPiType",
            ErrorCode::NotAnExtension => "NotAnExtension",
            ErrorCode::ArityMismatch => "ArityMismatch",
            ErrorCode::UnboundCtxVar => "UnboundCtxVar",
            ErrorCode::SchemaViolation => "SchemaViolation",
            ErrorCode::UnboundCompVar => "UnboundCompVar",
            ErrorCode::NotAFunctionType => "NotAFunctionType",
            ErrorCode::NotABoxType => "NotABoxType",
            ErrorCode::MotiveShape => "MotiveShape",
            ErrorCode::NotVarBox => "NotVarBox",
            ErrorCode::NotNeutral => "NotNeutral",
            ErrorCode::DuplicateDecl => "DuplicateDecl",
            ErrorCode::IllKindedDecl => "IllKindedDecl",
            ErrorCode::NotAType => "NotAType",
            ErrorCode::CannotInfer => "CannotInfer",
            ErrorCode::KindMismatch => "KindMismatch",
            ErrorCode::TruncMismatch => "TruncMismatch",
            ErrorCode::NonCanonicalHead => "NonCanonicalHead",
            ErrorCode::IllFormedScrutinee => "IllFormedScrutinee",
            ErrorCode::FuelExhausted => "FuelExhausted",
        }
    }

    pub fn parse(s: &str) -> Option<ErrorCode> {
        ErrorCode::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every rule name a recording checker can report.
pub const TYPING_RULES: &[&str] = &[
    "kind-type",
    "kind-pi",
    "type-atom",
    "type-pi",
    "lf-var",
    "lf-const",
    "lf-app",
    "lf-lam",
    "lf-unbox",
    "lf-conv",
    "lf-subst-empty",
    "lf-subst-wk",
    "lf-subst-cons",
    "ctx-empty",
    "ctx-var",
    "ctx-decl",
    "ctx-schema",
    "univ",
    "pi",
    "pi-ctx",
    "box-ty",
    "var-box-ty",
    "var",
    "fn",
    "app",
    "app-ctx",
    "box",
    "box-var",
    "type-in-univ",
    "conv",
    "rec",
    "branch-var",
    "branch-app",
    "branch-lam",
];

/// A rejected judgment: the error code, the rule that failed, and a message.
#[derive(Clone, Debug, Error)]
#[error("{code} {rule}: {message}")]
pub struct TypeError {
    pub code: ErrorCode,
    pub rule: &'static str,
    pub message: String,
}

impl TypeError {
    pub fn new(code: ErrorCode, rule: &'static str, message: impl Into<String>) -> TypeError {
        TypeError {
            code,
            rule,
            message: message.into(),
        }
    }
}

impl From<SubstError> for TypeError {
    fn from(e: SubstError) -> TypeError {
        let code = match e {
            SubstError::UnboundLfVar(_) => ErrorCode::UnboundLfVar,
            SubstError::TruncMismatch { .. } => ErrorCode::TruncMismatch,
            SubstError::UnboundCompVar(_) => ErrorCode::UnboundCompVar,
            SubstError::KindMismatch { .. } => ErrorCode::KindMismatch,
        };
        TypeError::new(code, "substitution", e.to_string())
    }
}

impl From<WhnfError> for TypeError {
    fn from(e: WhnfError) -> TypeError {
        let code = match &e {
            WhnfError::FuelExhausted { .. } => ErrorCode::FuelExhausted,
            WhnfError::IllFormedScrutinee(_) => ErrorCode::IllFormedScrutinee,
            WhnfError::NonCanonicalHead(_) => ErrorCode::NonCanonicalHead,
            WhnfError::IllFormedApplication(_) => ErrorCode::NotAFunctionType,
            WhnfError::Subst(s) => return s.clone().into(),
        };
        TypeError::new(code, "whnf", e.to_string())
    }
}

pub type TcResult<T> = Result<T, TypeError>;

fn err<T>(code: ErrorCode, rule: &'static str, message: impl Into<String>) -> TcResult<T> {
    Err(TypeError::new(code, rule, message))
}

/// The universe a type lives in. Box types live in every universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Exact(u32),
    AtLeast(u32),
}

impl Sort {
    fn level(self) -> u32 {
        match self {
            Sort::Exact(i) | Sort::AtLeast(i) => i,
        }
    }

    fn max(self, other: Sort) -> Sort {
        match (self, other) {
            (Sort::Exact(a), Sort::Exact(b)) => Sort::Exact(a.max(b)),
            (a, b) => Sort::AtLeast(a.level().max(b.level())),
        }
    }

    fn admits(self, k: u32) -> bool {
        match self {
            Sort::Exact(i) => i == k,
            Sort::AtLeast(i) => i <= k,
        }
    }
}

/// Binder types and goal for one recursor branch, with the binder names
/// already chosen.
pub(crate) struct BranchFrame {
    pub binders: Vec<(Name, AnnDom)>,
    pub goal: CompTerm,
    pub body: CompTerm,
}

/// The checking state: the signature, the computation context `Γ` and a
/// reducer with its step budget.
pub struct Checker<'s> {
    pub sig: &'s Signature,
    pub gamma: CompCtx,
    pub reducer: Reducer,
    /// Names of the typing rules applied so far, when recording is on.
    pub rules: Option<BTreeSet<&'static str>>,
}

impl<'s> Checker<'s> {
    pub fn new(sig: &'s Signature) -> Checker<'s> {
        Checker::with_fuel(sig, DEFAULT_FUEL)
    }

    pub fn with_fuel(sig: &'s Signature, fuel: u64) -> Checker<'s> {
        Checker {
            sig,
            gamma: CompCtx::new(),
            reducer: Reducer::new(fuel),
            rules: None,
        }
    }

    pub fn with_gamma(mut self, gamma: CompCtx) -> Checker<'s> {
        self.gamma = gamma;
        self
    }

    /// Starts recording the names of applied typing rules.
    pub fn recording(mut self) -> Checker<'s> {
        self.rules = Some(BTreeSet::new());
        self
    }

    fn note(&mut self, rule: &'static str) {
        if let Some(r) = &mut self.rules {
            r.insert(rule);
        }
    }

    pub fn whnf(&mut self, t: &CompTerm) -> TcResult<CompTerm> {
        Ok(self.reducer.whnf_comp(t)?)
    }

    pub fn whnf_lf(&mut self, m: &LfTerm) -> TcResult<LfTerm> {
        Ok(self.reducer.whnf_lf_term(m)?)
    }

    pub fn whnf_subst(&mut self, s: &LfSubst) -> TcResult<LfSubst> {
        Ok(self.reducer.whnf_lf_subst(s)?)
    }

    /// Runs `f` with `x : dom` pushed onto `Γ`.
    pub(crate) fn bind<R>(&mut self, x: Name, dom: AnnDom, f: impl FnOnce(&mut Self) -> R) -> R {
        let n = self.gamma.len();
        self.gamma.push(x, dom);
        let r = f(self);
        self.gamma.truncate(n);
        r
    }

    /// A computation-variable name based on `x` that is not declared in `Γ`
    /// and not free in `extra`.
    pub(crate) fn fresh_comp(&self, x: &Name, extra: &[&dyn FreeVars]) -> Name {
        let mut avoid: HashSet<Name> = self.gamma.names().cloned().collect();
        for e in extra {
            avoid.extend(free_comp_vars(*e));
        }
        fresh_name(x, &avoid)
    }

    // ---- LF layer ----

    pub fn check_lf_kind(&mut self, psi: &LfCtx, k: &LfKind) -> TcResult<()> {
        match k {
            LfKind::Type => {
                self.note("kind-type");
                Ok(())
            }
            LfKind::Pi(x, a, body) => {
                self.note("kind-pi");
                self.check_lf_type(psi, a)?;
                let (x2, body) = rename_lf_binder(psi, x, &**body);
                self.check_lf_kind(&psi.clone().with(x2, (**a).clone()), &body)
            }
        }
    }

    /// `Ψ ⊢ A : type`.
    pub fn check_lf_type(&mut self, psi: &LfCtx, a: &LfType) -> TcResult<()> {
        match a {
            LfType::Atom(f, spine) => {
                self.note("type-atom");
                let Some(mut kind) = self.sig.family(f).cloned() else {
                    return if self.sig.constant(f).is_some() {
                        err(ErrorCode::NotAType, "lf-atom", format!("`{f}` is a constant, not a type family"))
                    } else {
                        err(ErrorCode::UnknownConst, "lf-atom", format!("unknown type family `{f}`"))
                    };
                };
                for m in spine {
                    let LfKind::Pi(x, dom, rest) = kind else {
                        return err(ErrorCode::ArityMismatch, "lf-atom", format!("`{f}` is applied to too many arguments"));
                    };
                    self.check_lf_term(psi, m, &dom)?;
                    kind = single_subst(m, &x, &*rest);
                }
                if !matches!(kind, LfKind::Type) {
                    return err(ErrorCode::ArityMismatch, "lf-atom", format!("`{f}` is applied to too few arguments"));
                }
                Ok(())
            }
            LfType::Pi(x, dom, body) => {
                self.note("type-pi");
                self.check_lf_type(psi, dom)?;
                let (x2, body) = rename_lf_binder(psi, x, &**body);
                self.check_lf_type(&psi.clone().with(x2, (**dom).clone()), &body)
            }
        }
    }

    pub fn infer_lf_term(&mut self, psi: &LfCtx, m: &LfTerm) -> TcResult<LfType> {
        match m {
            LfTerm::Var(x) => {
                self.note("lf-var");
                psi.lookup(x)
                .cloned()
                .ok_or_else(|| TypeError::new(ErrorCode::UnboundLfVar, "lf-var", format!("unbound LF variable `{x}`")))
            }
            LfTerm::Const(c) => match self.sig.get(c) {
                Some(SigEntry::Const(a)) => {
                    self.note("lf-const");
                    Ok(a.clone())
                }
                Some(SigEntry::Family(_)) => err(ErrorCode::NotAType, "lf-const", format!("`{c}` is a type family, not a term")),
                None => err(ErrorCode::UnknownConst, "lf-const", format!("unknown constant `{c}`")),
            },
            LfTerm::App(f, a) => {
                self.note("lf-app");
                let fty = self.infer_lf_term(psi, f)?;
                let LfType::Pi(x, dom, body) = fty else {
                    return err(ErrorCode::NotAFunction, "lf-app", format!("applying a term of non-function type `{}`", crate::frontend::print::lf_type(&fty)));
                };
                self.check_lf_term(psi, a, &dom)?;
                Ok(single_subst(a, &x, &*body))
            }
            LfTerm::Lam(..) => err(ErrorCode::CannotInfer, "lf-lam", "cannot infer the type of an LF abstraction"),
            LfTerm::Unbox(t, sigma) => {
                self.note("lf-unbox");
                let tau = self.infer_comp(t)?;
                let tau = self.whnf(&tau)?;
                let CompTerm::BoxTy(ct) = &tau else {
                    return err(ErrorCode::NotABoxType, "lf-unbox", "unboxing a computation whose type is not a box type");
                };
                let phi = ct.ctx();
                self.check_lf_subst(psi, sigma, phi)?;
                Ok(apply_lf_subst(sigma, &phi.erase(), ct.ty())?)
            }
        }
    }

    pub fn check_lf_term(&mut self, psi: &LfCtx, m: &LfTerm, a: &LfType) -> TcResult<()> {
        match m {
            LfTerm::Lam(x, body) => {
                let LfType::Pi(y, dom, cod) = a else {
                    return err(ErrorCode::NotPiType, "lf-lam", "an LF abstraction must have a Pi type");
                };
                self.note("lf-lam");
                let (x2, body) = rename_lf_binder(psi, x, &**body);
                let cod = single_subst(&LfTerm::Var(x2.clone()), y, &**cod);
                self.check_lf_term(&psi.clone().with(x2, (**dom).clone()), &body, &cod)
            }
            _ => {
                let b = self.infer_lf_term(psi, m)?;
                self.note("lf-conv");
                if self.conv_lf_type(psi, &b, a)? {
                    Ok(())
                } else {
                    err(
                        ErrorCode::TypeMismatch,
                        "lf-conv",
                        format!(
                            "expected LF type `{}` but found `{}`",
                            crate::frontend::print::lf_type(a),
                            crate::frontend::print::lf_type(&b)
                        ),
                    )
                }
            }
        }
    }

    /// `Ψ ⊢ σ : Φ`.
    pub fn check_lf_subst(&mut self, psi: &LfCtx, sigma: &LfSubst, phi: &LfCtx) -> TcResult<()> {
        match sigma {
            LfSubst::Empty => {
                self.note("lf-subst-empty");
                if phi.head.is_some() || !phi.decls.is_empty() {
                    return err(ErrorCode::ArityMismatch, "lf-subst-empty", "the empty substitution only covers the empty context");
                }
                Ok(())
            }
            LfSubst::Wk(xi) => {
                self.note("lf-subst-wk");
                let n = phi.decls.len();
                let extends = psi.head == phi.head
                    && xi.head == phi.head
                    && psi.decls.len() >= n
                    && xi.vars.len() == n
                    && xi.vars.iter().zip(psi.names()).all(|(a, b)| a == b);
                if !extends || !self.conv_lf_ctx(phi, &psi.prefix(n))? {
                    return err(ErrorCode::NotAnExtension, "lf-subst-wk", "the weakening's domain is not a prefix of the current context");
                }
                Ok(())
            }
            LfSubst::Cons(rest, m) => {
                self.note("lf-subst-cons");
                let Some((_, a)) = phi.decls.last() else {
                    return err(ErrorCode::ArityMismatch, "lf-subst-cons", "substitution has more entries than its domain");
                };
                let prefix = phi.prefix(phi.decls.len() - 1);
                self.check_lf_subst(psi, rest, &prefix)?;
                let a = apply_lf_subst(rest, &prefix.erase(), a)?;
                self.check_lf_term(psi, m, &a)
            }
        }
    }

    /// Well-formedness of an LF context; at schema positions every
    /// declaration must have type `tm`.
    pub fn check_lf_ctx(&mut self, psi: &LfCtx, schema: bool) -> TcResult<()> {
        if psi.head.is_none() {
            self.note("ctx-empty");
        }
        if let Some(h) = &psi.head {
            self.note("ctx-var");
            match self.gamma.lookup(h) {
                Some(AnnDom::Ctx) => {}
                _ => return err(ErrorCode::UnboundCtxVar, "lf-ctx-var", format!("`{h}` is not a context variable")),
            }
        }
        for i in 0..psi.decls.len() {
            let prefix = psi.prefix(i);
            let (x, a) = &psi.decls[i];
            self.note(if schema { "ctx-schema" } else { "ctx-decl" });
            self.check_lf_type(&prefix, a)?;
            if schema && !self.conv_lf_type(&prefix, a, &LfType::tm())? {
                return err(ErrorCode::SchemaViolation, "ctx-schema", format!("declaration `{x}` must have type tm"));
            }
        }
        Ok(())
    }

    pub fn check_ctx_type(&mut self, ct: &CtxType) -> TcResult<()> {
        self.check_lf_ctx(ct.ctx(), false)?;
        self.check_lf_type(ct.ctx(), ct.ty())
    }

    // ---- computation layer ----

    /// Checks that `tau` is a type and returns its universe.
    pub fn infer_sort(&mut self, tau: &CompTerm) -> TcResult<Sort> {
        match tau {
            CompTerm::Univ(k) => {
                self.note("univ");
                Ok(Sort::Exact(k + 1))
            }
            CompTerm::BoxTy(ct) => {
                self.note(if ct.is_var_only() { "var-box-ty" } else { "box-ty" });
                self.check_ctx_type(ct)?;
                Ok(Sort::AtLeast(0))
            }
            CompTerm::Pi(y, dom, cod) => {
                let s1 = match &**dom {
                    AnnDom::Ty(t) => {
                        self.note("pi");
                        self.infer_sort(t)?
                    }
                    AnnDom::Ctx => {
                        self.note("pi-ctx");
                        Sort::AtLeast(0)
                    }
                };
                let y2 = self.fresh_comp(y, &[tau]);
                let cod = rename_comp(y, &y2, cod)?;
                let s2 = self.bind(y2, (**dom).clone(), |c| c.infer_sort(&cod))?;
                Ok(s1.max(s2))
            }
            _ => {
                let ty = self.infer_comp(tau)?;
                match self.whnf(&ty)? {
                    CompTerm::Univ(i) => Ok(Sort::Exact(i)),
                    _ => err(ErrorCode::NotAType, "type", format!("`{}` is not a type", crate::frontend::print::comp(tau))),
                }
            }
        }
    }

    pub fn check_type(&mut self, tau: &CompTerm) -> TcResult<()> {
        self.infer_sort(tau).map(|_| ())
    }

    pub fn infer_comp(&mut self, t: &CompTerm) -> TcResult<CompTerm> {
        match t {
            CompTerm::Var(y) => match self.gamma.lookup(y) {
                Some(AnnDom::Ty(tau)) => {
                    let tau = tau.clone();
                    self.note("var");
                    Ok(tau)
                }
                Some(AnnDom::Ctx) => err(ErrorCode::KindMismatch, "var", format!("context variable `{y}` used as a term")),
                None => err(ErrorCode::UnboundCompVar, "var", format!("unbound variable `{y}`")),
            },
            CompTerm::Univ(k) => {
                self.note("univ");
                Ok(CompTerm::Univ(k + 1))
            }
            CompTerm::BoxTy(_) | CompTerm::Pi(..) => Ok(CompTerm::Univ(self.infer_sort(t)?.level())),
            CompTerm::BoxObj(b) => {
                let Some(ann) = &b.annotation else {
                    return err(ErrorCode::CannotInfer, "box", "cannot infer the type of a box without a typed context");
                };
                if ann.erase() != b.ctx {
                    return err(ErrorCode::CtxMismatch, "box", "box context does not match its annotation");
                }
                self.note("box");
                self.check_lf_ctx(ann, false)?;
                let a = self.infer_lf_term(ann, &b.term)?;
                Ok(CompTerm::box_ty(ann.clone(), a))
            }
            CompTerm::Fn(..) => err(ErrorCode::CannotInfer, "fn", "cannot infer the type of a function; add a type annotation"),
            CompTerm::CtxLit(_) => err(ErrorCode::KindMismatch, "ctx", "an LF context is not a computation"),
            CompTerm::App(f, a) => {
                let fty = self.infer_comp(f)?;
                let fty = self.whnf(&fty)?;
                let CompTerm::Pi(y, dom, cod) = &fty else {
                    return err(ErrorCode::NotAFunctionType, "app", format!("`{}` is not a function", crate::frontend::print::comp(f)));
                };
                let payload = self.check_arg(a, dom)?;
                Ok(subst_one(payload, y, &**cod)?)
            }
            CompTerm::Rec(r) => self.infer_rec(r),
        }
    }

    /// Checks an application argument against a Pi domain and returns what
    /// it substitutes for the bound variable.
    fn check_arg(&mut self, a: &CompTerm, dom: &AnnDom) -> TcResult<Payload> {
        match dom {
            AnnDom::Ty(tau) => {
                self.note("app");
                self.check_comp(a, tau)?;
                Ok(Payload::Term(a.clone()))
            }
            AnnDom::Ctx => {
                self.note("app-ctx");
                let ctx = self.ctx_of_arg(a)?;
                self.check_lf_ctx(&ctx, true)?;
                Ok(Payload::Ctx(ctx))
            }
        }
    }

    pub(crate) fn ctx_of_arg(&self, a: &CompTerm) -> TcResult<LfCtx> {
        match a {
            CompTerm::CtxLit(c) => Ok((**c).clone()),
            CompTerm::Var(phi) if matches!(self.gamma.lookup(phi), Some(AnnDom::Ctx)) => Ok(LfCtx::ctx_var(phi.clone())),
            CompTerm::Var(phi) if !self.gamma.contains(phi) => {
                err(ErrorCode::UnboundCtxVar, "app-ctx", format!("unbound context variable `{phi}`"))
            }
            _ => err(ErrorCode::KindMismatch, "app-ctx", "expected an LF context argument"),
        }
    }

    pub fn check_comp(&mut self, t: &CompTerm, tau: &CompTerm) -> TcResult<()> {
        match t {
            CompTerm::Fn(y, body) => {
                let w = self.whnf(tau)?;
                let CompTerm::Pi(z, dom, cod) = &w else {
                    let code = if matches!(w, CompTerm::BoxTy(_)) { ErrorCode::TypeMismatch } else { ErrorCode::NotPiType };
                    return err(code, "fn", format!("a function cannot have type `{}`", crate::frontend::print::comp(tau)));
                };
                self.note("fn");
                let y2 = self.fresh_comp(y, &[t, &w]);
                let body = rename_comp(y, &y2, body)?;
                let cod = rename_comp(z, &y2, cod)?;
                self.bind(y2, (**dom).clone(), |c| c.check_comp(&body, &cod))
            }
            CompTerm::BoxObj(b) => {
                let w = self.whnf(tau)?;
                let CompTerm::BoxTy(ct) = &w else {
                    return err(ErrorCode::TypeMismatch, "box", format!("a box cannot have type `{}`", crate::frontend::print::comp(tau)));
                };
                self.note(if ct.is_var_only() { "box-var" } else { "box" });
                let psi = ct.ctx();
                let psi_hat = psi.erase();
                if !b.ctx.same_shape(&psi_hat) {
                    return err(ErrorCode::CtxMismatch, "box", "box context does not match the expected context");
                }
                if let Some(ann) = &b.annotation {
                    self.check_lf_ctx(ann, false)?;
                    if !self.conv_lf_ctx(ann, psi)? {
                        return err(ErrorCode::CtxMismatch, "box", "box context does not match the expected context");
                    }
                }
                let m = align_lf(&b.ctx, &psi_hat, &b.term);
                if ct.is_var_only() {
                    let w = self.whnf_lf(&m)?;
                    match &w {
                        LfTerm::Var(x) if psi.lookup(x).is_some() => self.check_lf_term(psi, &w, ct.ty()),
                        _ => err(ErrorCode::NotVarBox, "box-var", "only a variable of the context inhabits a variable box type"),
                    }
                } else {
                    self.check_lf_term(psi, &m, ct.ty())
                }
            }
            CompTerm::Pi(..) | CompTerm::BoxTy(_) => {
                let w = self.whnf(tau)?;
                let CompTerm::Univ(k) = w else {
                    return err(ErrorCode::TypeMismatch, "type", format!("a type cannot have type `{}`", crate::frontend::print::comp(tau)));
                };
                self.note("type-in-univ");
                let s = self.infer_sort(t)?;
                if s.admits(k) {
                    Ok(())
                } else {
                    err(ErrorCode::TypeMismatch, "univ", format!("type lives in U{} but U{k} was expected", s.level()))
                }
            }
            _ => {
                let found = self.infer_comp(t)?;
                self.note("conv");
                if self.conv_comp_type(&found, tau)? {
                    Ok(())
                } else {
                    err(
                        ErrorCode::TypeMismatch,
                        "conv",
                        format!(
                            "expected type `{}` but found `{}`",
                            crate::frontend::print::comp(tau),
                            crate::frontend::print::comp(&found)
                        ),
                    )
                }
            }
        }
    }

    fn infer_rec(&mut self, r: &Rec) -> TcResult<CompTerm> {
        let Some(parts) = MotiveParts::of(&r.motive) else {
            return err(ErrorCode::MotiveShape, "rec", "the motive must have the form (psi : ctx) -> (y : [psi |- tm]) -> T");
        };
        self.note("rec");
        self.check_type(&r.motive)?;
        self.check_lf_ctx(&r.ctx_arg, true)?;
        self.check_comp(&r.scrutinee, &CompTerm::box_ty(r.ctx_arg.clone(), LfType::tm()))?;
        for (frame, rule) in self.branch_frames(&parts, &r.branches)?.into_iter().zip(["branch-var", "branch-app", "branch-lam"]) {
            self.note(rule);
            self.with_binders(&frame.binders, |c| c.check_comp(&frame.body, &frame.goal))?;
        }
        self.rec_type(&parts, r)
    }

    fn rec_type(&self, parts: &MotiveParts, r: &Rec) -> TcResult<CompTerm> {
        let theta = CompSubst::single(parts.psi.clone(), Payload::Ctx(r.ctx_arg.clone()))
            .with(parts.y.clone(), Payload::Term(r.scrutinee.clone()));
        Ok(subst_many(&theta, &parts.body)?)
    }

    pub(crate) fn with_binders<R>(&mut self, binders: &[(Name, AnnDom)], f: impl FnOnce(&mut Self) -> R) -> R {
        let n = self.gamma.len();
        for (x, d) in binders {
            self.gamma.push(x.clone(), d.clone());
        }
        let r = f(self);
        self.gamma.truncate(n);
        r
    }

    /// Binder types and goals of the three branches, with the binders
    /// renamed away from `Γ` and the motive.
    pub(crate) fn branch_frames(&self, parts: &MotiveParts, b: &Branches) -> TcResult<Vec<BranchFrame>> {
        let mut avoid: HashSet<Name> = self.gamma.names().cloned().collect();
        avoid.extend(free_comp_vars(&parts.body));
        let tm = LfType::tm;
        let motive_at = |ctx: Payload, y: CompTerm| -> TcResult<CompTerm> {
            let theta = CompSubst::single(parts.psi.clone(), ctx).with(parts.y.clone(), Payload::Term(y));
            Ok(subst_many(&theta, &parts.body)?)
        };
        let mut frames = Vec::with_capacity(3);

        // var
        {
            let (names, body) = open_branch(&avoid, &[&b.var.psi, &b.var.p], &b.var.body)?;
            let [psi, p] = &names[..] else { unreachable!() };
            let ctx = LfCtx::ctx_var(psi.clone());
            frames.push(BranchFrame {
                binders: vec![
                    (psi.clone(), AnnDom::Ctx),
                    (p.clone(), AnnDom::Ty(CompTerm::var_box_ty(ctx, tm()))),
                ],
                goal: motive_at(Payload::Term(CompTerm::Var(psi.clone())), CompTerm::Var(p.clone()))?,
                body,
            });
        }

        // app
        {
            let a = &b.app;
            let (names, body) = open_branch(&avoid, &[&a.psi, &a.m, &a.n, &a.fm, &a.fn_], &a.body)?;
            let [psi, m, n, fm, fn_] = &names[..] else { unreachable!() };
            let ctx = LfCtx::ctx_var(psi.clone());
            let hat = ctx.erase();
            let psi_p = || Payload::Term(CompTerm::Var(psi.clone()));
            let unbox = |v: &Name| LfTerm::unbox(CompTerm::Var(v.clone()), LfSubst::Wk(hat.clone()));
            let whole = CompTerm::boxed(ctx.clone(), LfTerm::apps(LfTerm::cnst(APP), [unbox(m), unbox(n)]));
            frames.push(BranchFrame {
                binders: vec![
                    (psi.clone(), AnnDom::Ctx),
                    (m.clone(), AnnDom::Ty(CompTerm::box_ty(ctx.clone(), tm()))),
                    (n.clone(), AnnDom::Ty(CompTerm::box_ty(ctx.clone(), tm()))),
                    (fm.clone(), AnnDom::Ty(motive_at(psi_p(), CompTerm::Var(m.clone()))?)),
                    (fn_.clone(), AnnDom::Ty(motive_at(psi_p(), CompTerm::Var(n.clone()))?)),
                ],
                goal: motive_at(psi_p(), whole)?,
                body,
            });
        }

        // lam
        {
            let l = &b.lam;
            let (names, body) = open_branch(&avoid, &[&l.psi, &l.m, &l.fm], &l.body)?;
            let [phi, m, fm] = &names[..] else { unreachable!() };
            let ctx = LfCtx::ctx_var(phi.clone());
            let x = Name::new("x");
            let ext = ctx.clone().with(x.clone(), tm());
            let inner = LfTerm::unbox(CompTerm::Var(m.clone()), LfSubst::Wk(ext.erase()));
            let whole = CompTerm::boxed(ctx.clone(), LfTerm::app(LfTerm::cnst(LAM), LfTerm::lam(x, inner)));
            frames.push(BranchFrame {
                binders: vec![
                    (phi.clone(), AnnDom::Ctx),
                    (m.clone(), AnnDom::Ty(CompTerm::box_ty(ext.clone(), tm()))),
                    (fm.clone(), AnnDom::Ty(motive_at(Payload::Ctx(ext), CompTerm::Var(m.clone()))?)),
                ],
                goal: motive_at(Payload::Term(CompTerm::Var(phi.clone())), whole)?,
                body,
            });
        }
        Ok(frames)
    }

    /// The type of a neutral computation, read off its head.
    pub fn typeof_neutral(&mut self, t: &CompTerm) -> TcResult<CompTerm> {
        match t {
            CompTerm::Var(y) => match self.gamma.lookup(y) {
                Some(AnnDom::Ty(tau)) => Ok(tau.clone()),
                _ => err(ErrorCode::UnboundCompVar, "typeof", format!("unbound variable `{y}`")),
            },
            CompTerm::App(f, s) if is_neutral_comp(f) => {
                let fty = self.typeof_neutral(f)?;
                let CompTerm::Pi(y, dom, cod) = self.whnf(&fty)? else {
                    return err(ErrorCode::NotAFunctionType, "typeof", "head of a neutral application is not a function");
                };
                let payload = match &*dom {
                    AnnDom::Ty(_) => Payload::Term((**s).clone()),
                    AnnDom::Ctx => Payload::Ctx(self.ctx_of_arg(s)?),
                };
                Ok(subst_one(payload, &y, &*cod)?)
            }
            CompTerm::Rec(r) if is_neutral_comp(t) => {
                let Some(parts) = MotiveParts::of(&r.motive) else {
                    return err(ErrorCode::MotiveShape, "typeof", "malformed motive");
                };
                self.rec_type(&parts, r)
            }
            _ => err(ErrorCode::NotNeutral, "typeof", format!("`{}` is not neutral", crate::frontend::print::comp(t))),
        }
    }

    // ---- signatures ----

    /// Checks a signature declaration against the signature built so far.
    pub fn check_sig_entry(&mut self, entry: &SigEntry) -> TcResult<()> {
        match entry {
            SigEntry::Family(k) => self.check_lf_kind(&LfCtx::empty(), k),
            SigEntry::Const(a) => self.check_lf_type(&LfCtx::empty(), a),
        }
    }
}

/// Checks one declaration against the signature built so far.
pub fn check_decl(sig: &Signature, name: &Name, entry: &SigEntry) -> TcResult<()> {
    if sig.contains(name) {
        return err(ErrorCode::DuplicateDecl, "sig-decl", format!("`{name}` is declared twice"));
    }
    Checker::new(sig)
        .check_sig_entry(entry)
        .map_err(|e| TypeError::new(ErrorCode::IllKindedDecl, "sig-decl", format!("declaration of `{name}`: {}", e.message)))
}

/// Checks declarations in order and builds the signature.
pub fn check_signature(decls: &[(Name, SigEntry)]) -> TcResult<Signature> {
    let mut sig = Signature::new();
    for (name, entry) in decls {
        check_decl(&sig, name, entry)?;
        sig.push(name.clone(), entry.clone());
    }
    Ok(sig)
}

/// Renames an LF binder away from the names of `psi`, returning the new name
/// and the renamed body.
pub(crate) fn rename_lf_binder<T: crate::lf_subst::LfReplaceTarget>(psi: &LfCtx, x: &Name, body: &T) -> (Name, T) {
    if psi.lookup(x).is_none() {
        return (x.clone(), crate::lf_subst::rename_lf(&[], body));
    }
    let mut avoid: HashSet<Name> = psi.names().cloned().collect();
    avoid.extend(free_lf_vars(body));
    let x2 = fresh_name(x, &avoid);
    let body = crate::lf_subst::rename_lf(&[(x.clone(), x2.clone())], body);
    (x2, body)
}

/// `{y2/y}t` for a renaming of a computation variable.
pub(crate) fn rename_comp(y: &Name, y2: &Name, t: &CompTerm) -> TcResult<CompTerm> {
    if y == y2 {
        return Ok(t.clone());
    }
    Ok(subst_one(Payload::Term(CompTerm::Var(y2.clone())), y, t)?)
}

fn open_branch(avoid: &HashSet<Name>, binders: &[&Name], body: &CompTerm) -> TcResult<(Vec<Name>, CompTerm)> {
    let mut avoid = avoid.clone();
    let mut theta = CompSubst::new();
    let mut names = Vec::with_capacity(binders.len());
    for x in binders {
        let x2 = fresh_name(x, &avoid);
        avoid.insert(x2.clone());
        theta.push((*x).clone(), Payload::Term(CompTerm::Var(x2.clone())));
        names.push(x2);
    }
    Ok((names, subst_many(&theta, body)?))
}
