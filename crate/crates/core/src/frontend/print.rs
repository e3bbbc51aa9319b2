//! Printing back to the concrete syntax the parser accepts.

use crate::syntax::*;

pub fn lf_kind(k: &LfKind) -> String {
    match k {
        LfKind::Type => "type".into(),
        LfKind::Pi(x, a, k) if free_lf_vars(&**k).contains(x) => {
            format!("{{{x} : {}}} {}", lf_type(a), lf_kind(k))
        }
        LfKind::Pi(_, a, k) => format!("{} -> {}", lf_atype(a), lf_kind(k)),
    }
}

pub fn lf_type(a: &LfType) -> String {
    match a {
        LfType::Pi(x, a, b) if free_lf_vars(&**b).contains(x) => {
            format!("{{{x} : {}}} {}", lf_type(a), lf_type(b))
        }
        LfType::Pi(_, a, b) => format!("{} -> {}", lf_atype(a), lf_type(b)),
        LfType::Atom(f, args) => {
            let mut s = f.to_string();
            for m in args {
                s.push(' ');
                s.push_str(&lf_atom(m));
            }
            s
        }
    }
}

fn lf_atype(a: &LfType) -> String {
    match a {
        LfType::Pi(..) => format!("({})", lf_type(a)),
        _ => lf_type(a),
    }
}

pub fn lf_term(m: &LfTerm) -> String {
    match m {
        LfTerm::Lam(x, body) => format!("\\{x}. {}", lf_term(body)),
        LfTerm::App(..) => {
            let (head, args) = m.spine();
            let mut s = lf_atom(head);
            let n = args.len();
            for (i, a) in args.into_iter().enumerate() {
                s.push(' ');
                // a trailing lambda needs no parentheses
                match a {
                    LfTerm::Lam(..) if i + 1 == n => s.push_str(&lf_term(a)),
                    _ => s.push_str(&lf_atom(a)),
                }
            }
            s
        }
        _ => lf_atom(m),
    }
}

fn lf_atom(m: &LfTerm) -> String {
    match m {
        LfTerm::Var(x) | LfTerm::Const(x) => x.to_string(),
        LfTerm::Unbox(t, s) => format!("unbox({} ; {})", comp(t), lf_subst(s)),
        _ => format!("({})", lf_term(m)),
    }
}

pub fn erased_ctx(c: &ErasedCtx) -> String {
    let mut items: Vec<String> = c.head.iter().map(|h| h.to_string()).collect();
    items.extend(c.vars.iter().map(|x| x.to_string()));
    items.join(", ")
}

pub fn lf_subst(s: &LfSubst) -> String {
    let mut entries = Vec::new();
    let mut cur = s;
    while let LfSubst::Cons(rest, m) = cur {
        entries.push(lf_term(m));
        cur = rest;
    }
    entries.reverse();
    match cur {
        LfSubst::Wk(c) => {
            let inner = if c.head.is_none() && c.vars.is_empty() { ".".to_string() } else { erased_ctx(c) };
            entries.insert(0, format!("wk({inner})"));
        }
        _ if entries.is_empty() => return ".".into(),
        _ => {}
    }
    entries.join(", ")
}

pub fn lf_ctx(c: &LfCtx) -> String {
    let mut items: Vec<String> = c.head.iter().map(|h| h.to_string()).collect();
    items.extend(c.decls.iter().map(|(x, a)| format!("{x} : {}", lf_type(a))));
    items.join(", ")
}

fn box_ctx(o: &CtxObj) -> String {
    if let Some(c) = &o.annotation {
        return lf_ctx(c);
    }
    let c = &o.ctx;
    if c.head.is_none() {
        let mut items = vec![".".to_string()];
        items.extend(c.vars.iter().map(|x| x.to_string()));
        return items.join(", ");
    }
    erased_ctx(c)
}

fn spaced(s: String) -> String {
    if s.is_empty() { " ".into() } else { s + " " }
}

pub fn comp(t: &CompTerm) -> String {
    match t {
        CompTerm::Fn(y, body) => format!("fn {y} => {}", comp(body)),
        CompTerm::Pi(y, dom, body) => match &**dom {
            AnnDom::Ctx => format!("({y} : ctx) -> {}", comp(body)),
            AnnDom::Ty(a) if free_comp_vars(&**body).contains(y) => {
                format!("({y} : {}) -> {}", comp(a), comp(body))
            }
            AnnDom::Ty(a) if ends_in_fn(a) => format!("({}) -> {}", comp(a), comp(body)),
            AnnDom::Ty(a) => format!("{} -> {}", comp_app(a), comp(body)),
        },
        _ => comp_app(t),
    }
}

fn ends_in_fn(t: &CompTerm) -> bool {
    matches!(t, CompTerm::App(_, a) if matches!(**a, CompTerm::Fn(..)))
}

fn comp_app(t: &CompTerm) -> String {
    match t {
        CompTerm::App(..) => {
            let (head, args) = t.spine();
            let mut s = comp_app(head);
            let n = args.len();
            for (i, a) in args.into_iter().enumerate() {
                s.push(' ');
                match a {
                    CompTerm::Fn(..) if i + 1 == n => s.push_str(&comp(a)),
                    _ => s.push_str(&comp_atom(a)),
                }
            }
            s
        }
        CompTerm::Rec(r) => {
            let b = &r.branches;
            let ctx_arg = if r.ctx_arg.decls.is_empty() && r.ctx_arg.head.is_some() {
                lf_ctx(&r.ctx_arg)
            } else {
                format!("{{{}}}", lf_ctx(&r.ctx_arg))
            };
            format!(
                "rec ({}) with | var {} {} => {} | app {} {} {} {} {} => {} | lam {} {} {} => {} end {} {}",
                comp(&r.motive),
                b.var.psi,
                b.var.p,
                comp(&b.var.body),
                b.app.psi,
                b.app.m,
                b.app.n,
                b.app.fm,
                b.app.fn_,
                comp(&b.app.body),
                b.lam.psi,
                b.lam.m,
                b.lam.fm,
                comp(&b.lam.body),
                ctx_arg,
                comp_atom(&r.scrutinee),
            )
        }
        _ => comp_atom(t),
    }
}

fn comp_atom(t: &CompTerm) -> String {
    match t {
        CompTerm::Var(x) => x.to_string(),
        CompTerm::Univ(k) => format!("U{k}"),
        CompTerm::BoxTy(ct) => {
            let turn = if ct.is_var_only() { "|-#" } else { "|-" };
            format!("[{}{turn} {}]", spaced(lf_ctx(ct.ctx())), lf_type(ct.ty()))
        }
        CompTerm::BoxObj(o) => format!("[{}|- {}]", spaced(box_ctx(o)), lf_term(&o.term)),
        CompTerm::CtxLit(c) => format!("{{{}}}", lf_ctx(c)),
        _ => format!("({})", comp(t)),
    }
}
