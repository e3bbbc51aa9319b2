//! Simultaneous LF substitution `[σ/Ψ̂]M`.
//!
//! A substitution does not know its own domain, so every operation here takes
//! the erased domain `Ψ̂` explicitly. Entries of `σ, M` are matched against the
//! domain right-to-left; `wk(Φ̂)` maps the domain positionally onto `Φ̂`.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::*;

#[derive(Clone, Debug, Error)]
pub enum SubstError {
    #[error("unbound LF variable `{0}`")]
    UnboundLfVar(Name),
    #[error("cannot truncate a substitution over {domain:?} to {target:?}")]
    TruncMismatch { target: ErasedCtx, domain: ErasedCtx },
    #[error("unbound computation variable `{0}`")]
    UnboundCompVar(Name),
    #[error("kind mismatch for `{var}`: {detail}")]
    KindMismatch { var: Name, detail: &'static str },
}

/// `lookup x [σ/Ψ̂]`.
pub fn lookup_var(x: &Name, sigma: &LfSubst, domain: &ErasedCtx) -> Result<LfTerm, SubstError> {
    let mut s = sigma;
    let mut len = domain.vars.len();
    loop {
        match s {
            LfSubst::Cons(rest, m) => {
                if len == 0 {
                    return Err(SubstError::UnboundLfVar(x.clone()));
                }
                if domain.vars[len - 1] == *x {
                    return Ok(m.clone());
                }
                len -= 1;
                s = rest;
            }
            LfSubst::Wk(xi) => {
                let Some(pos) = domain.vars[..len].iter().rposition(|v| v == x) else {
                    return Err(SubstError::UnboundLfVar(x.clone()));
                };
                if xi.vars.len() != len {
                    return Err(SubstError::TruncMismatch {
                        target: xi.clone(),
                        domain: domain.prefix(len),
                    });
                }
                return Ok(LfTerm::Var(xi.vars[pos].clone()));
            }
            LfSubst::Empty => return Err(SubstError::UnboundLfVar(x.clone())),
        }
    }
}

/// `trunc_Φ (σ / Ψ̂)`: drops the entries of `σ` for the variables of the
/// domain that lie beyond the prefix `target`.
pub fn trunc(target: &ErasedCtx, sigma: &LfSubst, domain: &ErasedCtx) -> Result<LfSubst, SubstError> {
    let mismatch = || SubstError::TruncMismatch {
        target: target.clone(),
        domain: domain.clone(),
    };
    let n = target.vars.len();
    if target.head != domain.head || n > domain.vars.len() || target.vars[..] != domain.vars[..n] {
        return Err(mismatch());
    }
    let mut s = sigma;
    let mut len = domain.vars.len();
    loop {
        if len == n {
            return Ok(s.clone());
        }
        match s {
            LfSubst::Cons(rest, _) => {
                s = rest;
                len -= 1;
            }
            LfSubst::Wk(xi) if xi.vars.len() == len => return Ok(LfSubst::Wk(xi.prefix(n))),
            _ => return Err(mismatch()),
        }
    }
}

/// Classes an LF substitution can be applied to.
pub trait LfSubstTarget: Sized {
    fn apply_with(&self, ap: &mut Applier) -> Result<Self, SubstError>;
}

/// State for applying `σ` with domain `Ψ̂` under binders.
pub struct Applier {
    sigma: LfSubst,
    domain: ErasedCtx,
    avoid: HashSet<Name>,
}

impl Applier {
    fn new(sigma: &LfSubst, domain: &ErasedCtx) -> Applier {
        Applier {
            sigma: sigma.clone(),
            domain: domain.clone(),
            avoid: free_lf_vars(sigma),
        }
    }

    /// Enters the scope of LF binder `x`, returning the name to use for it.
    /// The binder is renamed only if it would capture a variable of `σ`.
    fn under<R>(&mut self, x: &Name, f: impl FnOnce(&mut Self, &Name) -> R) -> R {
        let fresh = fresh_name(x, &self.avoid);
        let saved = self.sigma.clone();
        self.sigma = LfSubst::Cons(Arc::new(saved.clone()), LfTerm::Var(fresh.clone()));
        self.domain.vars.push(x.clone());
        let inserted = self.avoid.insert(fresh.clone());
        let r = f(self, &fresh);
        if inserted {
            self.avoid.remove(&fresh);
        }
        self.domain.vars.pop();
        self.sigma = saved;
        r
    }
}

impl LfSubstTarget for LfTerm {
    fn apply_with(&self, ap: &mut Applier) -> Result<Self, SubstError> {
        Ok(match self {
            LfTerm::Var(x) => lookup_var(x, &ap.sigma, &ap.domain)?,
            LfTerm::Const(_) => self.clone(),
            LfTerm::Lam(x, m) => ap.under(x, |ap, x2| Ok(LfTerm::lam(x2.clone(), m.apply_with(ap)?)))?,
            LfTerm::App(m, n) => LfTerm::app(m.apply_with(ap)?, n.apply_with(ap)?),
            // t has no free LF variables, so it is left untouched.
            LfTerm::Unbox(t, s) => LfTerm::Unbox(t.clone(), Arc::new(s.apply_with(ap)?)),
        })
    }
}

impl LfSubstTarget for LfSubst {
    fn apply_with(&self, ap: &mut Applier) -> Result<Self, SubstError> {
        Ok(match self {
            LfSubst::Empty => LfSubst::Empty,
            LfSubst::Wk(phi) => trunc(phi, &ap.sigma, &ap.domain)?,
            LfSubst::Cons(s, m) => LfSubst::Cons(Arc::new(s.apply_with(ap)?), m.apply_with(ap)?),
        })
    }
}

impl LfSubstTarget for LfType {
    fn apply_with(&self, ap: &mut Applier) -> Result<Self, SubstError> {
        Ok(match self {
            LfType::Atom(a, spine) => LfType::Atom(
                a.clone(),
                spine.iter().map(|m| m.apply_with(ap)).collect::<Result<_, _>>()?,
            ),
            LfType::Pi(x, a, b) => {
                let a = a.apply_with(ap)?;
                ap.under(x, |ap, x2| Ok::<_, SubstError>(LfType::pi(x2.clone(), a, b.apply_with(ap)?)))?
            }
        })
    }
}

impl LfSubstTarget for LfKind {
    fn apply_with(&self, ap: &mut Applier) -> Result<Self, SubstError> {
        Ok(match self {
            LfKind::Type => LfKind::Type,
            LfKind::Pi(x, a, k) => {
                let a = a.apply_with(ap)?;
                ap.under(x, |ap, x2| Ok::<_, SubstError>(LfKind::pi(x2.clone(), a, k.apply_with(ap)?)))?
            }
        })
    }
}

/// `[σ/Ψ̂]target`, capture-avoiding.
pub fn apply_lf_subst<T: LfSubstTarget>(sigma: &LfSubst, domain: &ErasedCtx, target: &T) -> Result<T, SubstError> {
    target.apply_with(&mut Applier::new(sigma, domain))
}

/// Non-strict replacement of LF variables: names outside the map are left
/// alone. Used for `[N/x]` and for renamings.
pub struct Replace {
    entries: Vec<(Name, LfTerm)>,
    /// Rename the variables of `wk(Φ̂)` in place instead of expanding it.
    keep_wk: bool,
    avoid: HashSet<Name>,
}

/// Classes that support non-strict replacement.
pub trait LfReplaceTarget: Sized + FreeVars {
    fn replace_with(&self, r: &mut Replace) -> Self;
}

impl Replace {
    fn new(entries: Vec<(Name, LfTerm)>, keep_wk: bool, target: &impl FreeVars) -> Replace {
        let mut avoid = free_lf_vars(target);
        for (_, m) in &entries {
            avoid.extend(free_lf_vars(m));
        }
        Replace { entries, keep_wk, avoid }
    }

    fn find(&self, x: &Name) -> Option<&LfTerm> {
        self.entries.iter().rev().find(|(y, _)| y == x).map(|(_, m)| m)
    }

    fn under<R>(&mut self, x: &Name, f: impl FnOnce(&mut Self, &Name) -> R) -> R {
        let fresh = fresh_name(x, &self.avoid);
        let inserted = self.avoid.insert(fresh.clone());
        self.entries.push((x.clone(), LfTerm::Var(fresh.clone())));
        let r = f(self, &fresh);
        self.entries.pop();
        if inserted {
            self.avoid.remove(&fresh);
        }
        r
    }

    fn wk(&self, xi: &ErasedCtx) -> LfSubst {
        let Some(first) = xi.vars.iter().position(|v| self.find(v).is_some()) else {
            return LfSubst::Wk(xi.clone());
        };
        if self.keep_wk {
            let renamed: Option<Vec<Name>> = xi
                .vars
                .iter()
                .map(|v| match self.find(v) {
                    None => Some(v.clone()),
                    Some(LfTerm::Var(w)) => Some(w.clone()),
                    Some(_) => None,
                })
                .collect();
            if let Some(vars) = renamed {
                return LfSubst::Wk(ErasedCtx::new(xi.head.clone(), vars));
            }
        }
        let mut s = LfSubst::Wk(xi.prefix(first));
        for v in &xi.vars[first..] {
            let m = self.find(v).cloned().unwrap_or_else(|| LfTerm::Var(v.clone()));
            s = LfSubst::Cons(Arc::new(s), m);
        }
        s
    }
}

impl LfReplaceTarget for LfTerm {
    fn replace_with(&self, r: &mut Replace) -> Self {
        match self {
            LfTerm::Var(x) => r.find(x).cloned().unwrap_or_else(|| self.clone()),
            LfTerm::Const(_) => self.clone(),
            LfTerm::Lam(x, m) => r.under(x, |r, x2| LfTerm::lam(x2.clone(), m.replace_with(r))),
            LfTerm::App(m, n) => LfTerm::app(m.replace_with(r), n.replace_with(r)),
            LfTerm::Unbox(t, s) => LfTerm::Unbox(t.clone(), Arc::new(s.replace_with(r))),
        }
    }
}

impl LfReplaceTarget for LfSubst {
    fn replace_with(&self, r: &mut Replace) -> Self {
        match self {
            LfSubst::Empty => LfSubst::Empty,
            LfSubst::Wk(xi) => r.wk(xi),
            LfSubst::Cons(s, m) => LfSubst::Cons(Arc::new(s.replace_with(r)), m.replace_with(r)),
        }
    }
}

impl LfReplaceTarget for LfType {
    fn replace_with(&self, r: &mut Replace) -> Self {
        match self {
            LfType::Atom(a, spine) => LfType::Atom(a.clone(), spine.iter().map(|m| m.replace_with(r)).collect()),
            LfType::Pi(x, a, b) => {
                let a = a.replace_with(r);
                r.under(x, |r, x2| LfType::pi(x2.clone(), a, b.replace_with(r)))
            }
        }
    }
}

impl LfReplaceTarget for LfKind {
    fn replace_with(&self, r: &mut Replace) -> Self {
        match self {
            LfKind::Type => LfKind::Type,
            LfKind::Pi(x, a, k) => {
                let a = a.replace_with(r);
                r.under(x, |r, x2| LfKind::pi(x2.clone(), a, k.replace_with(r)))
            }
        }
    }
}

/// `[n/x]target`: the single-variable substitution used by β-reduction.
pub fn single_subst<T: LfReplaceTarget>(n: &LfTerm, x: &Name, target: &T) -> T {
    let mut r = Replace::new(vec![(x.clone(), n.clone())], false, target);
    target.replace_with(&mut r)
}

/// Renames free LF variables according to `pairs` (old, new), keeping
/// `wk(Φ̂)` substitutions in weakening form.
pub fn rename_lf<T: LfReplaceTarget>(pairs: &[(Name, Name)], target: &T) -> T {
    if pairs.iter().all(|(a, b)| a == b) {
        return clone_of(target);
    }
    let entries = pairs.iter().map(|(a, b)| (a.clone(), LfTerm::Var(b.clone()))).collect();
    let mut r = Replace::new(entries, true, target);
    target.replace_with(&mut r)
}

/// Renames every binder of `target` that would shadow one of `names`.
pub fn avoid_binders<T: LfReplaceTarget>(names: &HashSet<Name>, target: &T) -> T {
    let mut r = Replace::new(Vec::new(), true, target);
    r.avoid.extend(names.iter().cloned());
    target.replace_with(&mut r)
}

fn clone_of<T: LfReplaceTarget>(t: &T) -> T {
    let mut r = Replace {
        entries: Vec::new(),
        keep_wk: true,
        avoid: HashSet::new(),
    };
    t.replace_with(&mut r)
}

/// Renames the binders of `from` positionally to the names of `to` inside
/// `target`. Both contexts must have the same shape.
pub fn align_lf<T: LfReplaceTarget>(from: &ErasedCtx, to: &ErasedCtx, target: &T) -> T {
    let pairs: Vec<(Name, Name)> = from.vars.iter().cloned().zip(to.vars.iter().cloned()).collect();
    rename_lf(&pairs, target)
}

/// Gives the declarations of `psi` the names of `names` (same shape),
/// renaming inside later declaration types.
pub fn rename_ctx(psi: &LfCtx, names: &ErasedCtx) -> LfCtx {
    let mut out = LfCtx {
        head: names.head.clone(),
        decls: Vec::with_capacity(psi.decls.len()),
    };
    let old = psi.erase();
    for (i, (_, a)) in psi.decls.iter().enumerate() {
        let a = align_lf(&old.prefix(i), &names.prefix(i), a);
        out.decls.push((names.vars[i].clone(), a));
    }
    out
}
