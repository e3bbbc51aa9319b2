use std::collections::HashSet;

use super::lexer::{lex, Tok, Token};
use super::ParseError;
use crate::syntax::*;

const KEYWORDS: &[&str] = &["def", "fn", "rec", "with", "end", "type", "ctx", "unbox", "wk"];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Clone, Debug)]
pub enum Decl {
    Lf {
        name: Name,
        entry: SigEntry,
        offset: usize,
    },
    Def {
        name: Name,
        ty: CompTerm,
        body: CompTerm,
        offset: usize,
        ty_offset: usize,
        body_offset: usize,
    },
    Eval {
        name: Name,
        offset: usize,
    },
}

#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

enum KindOrType {
    Kind(LfKind),
    Type(LfType),
}

/// Declarations inside `[ ... |-` or `{ ... }`.
#[derive(Default)]
struct CtxItems {
    head: Option<Name>,
    /// Set when the context starts with `.` (no head, erased).
    dot: bool,
    typed: Vec<(Name, LfType)>,
    erased: Vec<Name>,
}

impl CtxItems {
    fn names(&self) -> Vec<Name> {
        if self.typed.is_empty() {
            self.erased.clone()
        } else {
            self.typed.iter().map(|(x, _)| x.clone()).collect()
        }
    }

    fn is_erased(&self) -> bool {
        self.dot || !self.erased.is_empty()
    }
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    families: HashSet<Name>,
    consts: HashSet<Name>,
    scope: Vec<Name>,
}

impl Parser {
    pub fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            families: HashSet::new(),
            consts: HashSet::new(),
            scope: Vec::new(),
        })
    }

    /// A parser that already knows the declarations of `sig`.
    pub fn with_signature(src: &str, sig: &Signature) -> Result<Parser, ParseError> {
        let mut p = Parser::new(src)?;
        for (name, entry) in sig.iter() {
            match entry {
                SigEntry::Family(_) => p.families.insert(name.clone()),
                SigEntry::Const(_) => p.consts.insert(name.clone()),
            };
        }
        Ok(p)
    }

    /// LF variables in scope for the next LF term.
    pub fn with_lf_scope(mut self, names: impl IntoIterator<Item = Name>) -> Parser {
        self.scope.extend(names);
        self
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(&format!("`{}`", t.symbol()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let n = Name::new(s);
                self.bump();
                Ok(n)
            }
            _ => self.error("an identifier"),
        }
    }

    fn plain_ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => Some(s),
            _ => None,
        }
    }

    fn in_scope(&self, x: &Name) -> bool {
        self.scope.contains(x)
    }

    fn scoped<R>(&mut self, names: impl IntoIterator<Item = Name>, f: impl FnOnce(&mut Self) -> R) -> R {
        let n = self.scope.len();
        self.scope.extend(names);
        let r = f(self);
        self.scope.truncate(n);
        r
    }

    pub fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    // ---- declarations ----

    pub fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut decls = Vec::new();
        while !self.at_end() {
            decls.push(self.decl()?);
        }
        Ok(SourceFile { decls })
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let offset = self.offset();
        if self.eat(&Tok::HashEval) {
            let name = self.ident()?;
            self.expect(Tok::Dot)?;
            return Ok(Decl::Eval { name, offset });
        }
        if self.is_kw("def") {
            self.bump();
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty_offset = self.offset();
            let ty = self.comp()?;
            self.expect(Tok::ColonEq)?;
            let body_offset = self.offset();
            let body = self.comp()?;
            self.expect(Tok::Dot)?;
            return Ok(Decl::Def {
                name,
                ty,
                body,
                offset,
                ty_offset,
                body_offset,
            });
        }
        let name = match self.ident() {
            Ok(n) => n,
            Err(_) => return self.error("a declaration"),
        };
        self.expect(Tok::Colon)?;
        let entry = match self.kind_or_type()? {
            KindOrType::Kind(k) => {
                self.families.insert(name.clone());
                SigEntry::Family(k)
            }
            KindOrType::Type(a) => {
                self.consts.insert(name.clone());
                SigEntry::Const(a)
            }
        };
        self.expect(Tok::Dot)?;
        Ok(Decl::Lf { name, entry, offset })
    }

    fn kind_or_type(&mut self) -> Result<KindOrType, ParseError> {
        if self.is_kw("type") {
            self.bump();
            return Ok(KindOrType::Kind(LfKind::Type));
        }
        let (x, dom) = if self.eat(&Tok::LBrace) {
            let x = self.ident()?;
            self.expect(Tok::Colon)?;
            let a = self.lf_type()?;
            self.expect(Tok::RBrace)?;
            (Some(x), a)
        } else {
            let a = self.lf_atype()?;
            if !self.eat(&Tok::Arrow) {
                return Ok(KindOrType::Type(a));
            }
            (None, a)
        };
        let binder = x.clone().unwrap_or_else(|| Name::new("_"));
        let rest = self.scoped(x, |p| p.kind_or_type())?;
        Ok(match rest {
            KindOrType::Kind(k) => KindOrType::Kind(LfKind::pi(binder, dom, k)),
            KindOrType::Type(b) => KindOrType::Type(LfType::pi(binder, dom, b)),
        })
    }

    // ---- LF layer ----

    pub fn lf_type(&mut self) -> Result<LfType, ParseError> {
        if self.eat(&Tok::LBrace) {
            let x = self.ident()?;
            self.expect(Tok::Colon)?;
            let a = self.lf_type()?;
            self.expect(Tok::RBrace)?;
            let b = self.scoped([x.clone()], |p| p.lf_type())?;
            return Ok(LfType::pi(x, a, b));
        }
        let a = self.lf_atype()?;
        if self.eat(&Tok::Arrow) {
            let b = self.lf_type()?;
            return Ok(LfType::arrow(a, b));
        }
        Ok(a)
    }

    fn lf_atype(&mut self) -> Result<LfType, ParseError> {
        if self.eat(&Tok::LParen) {
            let a = self.lf_type()?;
            self.expect(Tok::RParen)?;
            return Ok(a);
        }
        let Some(_) = self.plain_ident() else {
            return self.error("an LF type");
        };
        let f = self.ident()?;
        let mut args = Vec::new();
        while self.starts_lf_atom() {
            args.push(self.lf_atom()?);
        }
        Ok(LfType::Atom(f, args))
    }

    fn starts_lf_atom(&self) -> bool {
        match self.peek() {
            Tok::LParen => true,
            Tok::Ident(s) => !is_keyword(s) || s == "unbox",
            _ => false,
        }
    }

    pub fn lf_term(&mut self) -> Result<LfTerm, ParseError> {
        if self.eat(&Tok::Backslash) {
            let x = self.ident()?;
            self.expect(Tok::Dot)?;
            let body = self.scoped([x.clone()], |p| p.lf_term())?;
            return Ok(LfTerm::lam(x, body));
        }
        let mut m = self.lf_atom()?;
        loop {
            if self.starts_lf_atom() {
                let a = self.lf_atom()?;
                m = LfTerm::app(m, a);
            } else if matches!(self.peek(), Tok::Backslash) {
                let a = self.lf_term()?;
                return Ok(LfTerm::app(m, a));
            } else {
                return Ok(m);
            }
        }
    }

    fn lf_atom(&mut self) -> Result<LfTerm, ParseError> {
        if self.eat(&Tok::LParen) {
            let m = self.lf_term()?;
            self.expect(Tok::RParen)?;
            return Ok(m);
        }
        if self.is_kw("unbox") {
            self.bump();
            self.expect(Tok::LParen)?;
            let saved = std::mem::take(&mut self.scope);
            let t = self.comp()?;
            self.scope = saved;
            self.expect(Tok::Semi)?;
            let s = self.lf_subst()?;
            self.expect(Tok::RParen)?;
            return Ok(LfTerm::unbox(t, s));
        }
        let x = match self.ident() {
            Ok(x) => x,
            Err(_) => return self.error("an LF term"),
        };
        if !self.in_scope(&x) && (self.consts.contains(&x) || self.families.contains(&x)) {
            Ok(LfTerm::Const(x))
        } else {
            Ok(LfTerm::Var(x))
        }
    }

    pub fn lf_subst(&mut self) -> Result<LfSubst, ParseError> {
        let mut s = if self.eat(&Tok::Dot) {
            LfSubst::Empty
        } else if self.is_kw("wk") {
            self.bump();
            LfSubst::Wk(self.wk_domain()?)
        } else {
            LfSubst::Cons(LfSubst::Empty.into(), self.lf_term()?)
        };
        while self.eat(&Tok::Comma) {
            s = LfSubst::Cons(s.into(), self.lf_term()?);
        }
        Ok(s)
    }

    fn wk_domain(&mut self) -> Result<ErasedCtx, ParseError> {
        if !self.eat(&Tok::LParen) {
            let x = self.ident()?;
            return Ok(self.erased_from(vec![x]));
        }
        if self.eat(&Tok::Dot) {
            self.expect(Tok::RParen)?;
            return Ok(ErasedCtx::empty());
        }
        let mut items = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            items.push(self.ident()?);
            while self.eat(&Tok::Comma) {
                items.push(self.ident()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(self.erased_from(items))
    }

    /// The first name is the context-variable head unless it is an LF
    /// variable in scope.
    fn erased_from(&self, mut items: Vec<Name>) -> ErasedCtx {
        match items.first() {
            Some(x) if !self.in_scope(x) => {
                let head = items.remove(0);
                ErasedCtx::new(Some(head), items)
            }
            _ => ErasedCtx::new(None, items),
        }
    }

    // ---- contexts ----

    fn ctx_items(&mut self, close: &Tok, allow_erased: bool) -> Result<CtxItems, ParseError> {
        let mut items = CtxItems::default();
        if self.peek() == close {
            return Ok(items);
        }
        let mut first = true;
        loop {
            if first && allow_erased && self.eat(&Tok::Dot) {
                items.dot = true;
            } else {
                let off = self.offset();
                let x = self.ident()?;
                if self.eat(&Tok::Colon) {
                    let names: Vec<Name> = items.typed.iter().map(|(y, _)| y.clone()).collect();
                    let a = self.scoped(names, |p| p.lf_type())?;
                    items.typed.push((x, a));
                } else if first {
                    items.head = Some(x);
                } else if allow_erased {
                    items.erased.push(x);
                } else {
                    return Err(ParseError {
                        offset: off,
                        message: format!("declaration `{x}` needs a type"),
                    });
                }
                if !items.typed.is_empty() && items.is_erased() {
                    return Err(ParseError {
                        offset: off,
                        message: "a context cannot mix typed and untyped declarations".into(),
                    });
                }
            }
            first = false;
            if !self.eat(&Tok::Comma) {
                return Ok(items);
            }
        }
    }

    fn typed_ctx(items: CtxItems) -> LfCtx {
        LfCtx {
            head: items.head,
            decls: items.typed,
        }
    }

    pub fn ctx_literal(&mut self) -> Result<LfCtx, ParseError> {
        self.expect(Tok::LBrace)?;
        let items = self.ctx_items(&Tok::RBrace, false)?;
        self.expect(Tok::RBrace)?;
        Ok(Parser::typed_ctx(items))
    }

    // ---- computations ----

    pub fn comp(&mut self) -> Result<CompTerm, ParseError> {
        if self.is_kw("fn") {
            self.bump();
            let y = self.ident()?;
            self.expect(Tok::FatArrow)?;
            let body = self.comp()?;
            return Ok(CompTerm::func(y, body));
        }
        let binder = matches!(self.peek(), Tok::LParen)
            && matches!(self.peek_at(1), Tok::Ident(s) if !is_keyword(s))
            && matches!(self.peek_at(2), Tok::Colon);
        if binder {
            self.bump();
            let y = self.ident()?;
            self.expect(Tok::Colon)?;
            let dom = if self.is_kw("ctx") {
                self.bump();
                AnnDom::Ctx
            } else {
                AnnDom::Ty(self.comp()?)
            };
            self.expect(Tok::RParen)?;
            self.expect(Tok::Arrow)?;
            let body = self.comp()?;
            return Ok(CompTerm::pi(y, dom, body));
        }
        let t = self.comp_app()?;
        if self.eat(&Tok::Arrow) {
            let body = self.comp()?;
            return Ok(CompTerm::arrow(t, body));
        }
        Ok(t)
    }

    fn starts_comp_atom(&self) -> bool {
        match self.peek() {
            Tok::Univ(_) | Tok::LParen | Tok::LBrack | Tok::LBrace => true,
            Tok::Ident(s) => !is_keyword(s) || s == "rec",
            _ => false,
        }
    }

    fn comp_app(&mut self) -> Result<CompTerm, ParseError> {
        let mut t = self.comp_atom()?;
        loop {
            if self.starts_comp_atom() {
                let a = self.comp_atom()?;
                t = CompTerm::app(t, a);
            } else if self.is_kw("fn") {
                let a = self.comp()?;
                return Ok(CompTerm::app(t, a));
            } else {
                return Ok(t);
            }
        }
    }

    fn comp_atom(&mut self) -> Result<CompTerm, ParseError> {
        match self.peek().clone() {
            Tok::Univ(k) => {
                self.bump();
                Ok(CompTerm::Univ(k))
            }
            Tok::LParen => {
                self.bump();
                let t = self.comp()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrack => self.boxed(),
            Tok::LBrace => Ok(CompTerm::ctx_lit(self.ctx_literal()?)),
            Tok::Ident(s) if s == "rec" => self.rec(),
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(CompTerm::Var(Name::new(s)))
            }
            _ => self.error("a computation"),
        }
    }

    fn payload_is_type(&self) -> bool {
        let mut k = 0;
        while matches!(self.peek_at(k), Tok::LParen) {
            k += 1;
        }
        match self.peek_at(k) {
            Tok::LBrace => true,
            Tok::Ident(s) => {
                let n = Name::new(s);
                !self.in_scope(&n) && self.families.contains(&n)
            }
            _ => false,
        }
    }

    fn boxed(&mut self) -> Result<CompTerm, ParseError> {
        let open = self.offset();
        self.expect(Tok::LBrack)?;
        let items = self.ctx_items(&Tok::Turnstile, true)?;
        let var_only = match self.peek() {
            Tok::Turnstile => false,
            Tok::TurnstileHash => true,
            _ => return self.error("`|-` or `|-#`"),
        };
        self.bump();
        let names = items.names();
        let erased = items.is_erased();
        let t = self.scoped(names.clone(), |p| -> Result<CompTerm, ParseError> {
            if var_only || p.payload_is_type() {
                let a = p.lf_type()?;
                if erased {
                    return Err(ParseError {
                        offset: open,
                        message: "a box type needs a typed context".into(),
                    });
                }
                let ctx = Parser::typed_ctx(items);
                Ok(if var_only { CompTerm::var_box_ty(ctx, a) } else { CompTerm::box_ty(ctx, a) })
            } else {
                let m = p.lf_term()?;
                if erased {
                    Ok(CompTerm::boxed_erased(ErasedCtx::new(items.head, names), m))
                } else {
                    Ok(CompTerm::boxed(Parser::typed_ctx(items), m))
                }
            }
        })?;
        self.expect(Tok::RBrack)?;
        Ok(t)
    }

    fn rec(&mut self) -> Result<CompTerm, ParseError> {
        self.expect_kw("rec")?;
        self.expect(Tok::LParen)?;
        let motive = self.comp()?;
        self.expect(Tok::RParen)?;
        self.expect_kw("with")?;
        let mut var = None;
        let mut app = None;
        let mut lam = None;
        while self.eat(&Tok::Bar) {
            let off = self.offset();
            let which = match self.peek() {
                Tok::Ident(s) if s == "var" || s == "app" || s == "lam" => s.clone(),
                _ => return self.error("`var`, `app` or `lam`"),
            };
            self.bump();
            let arity = match which.as_str() {
                "var" => 2,
                "app" => 5,
                _ => 3,
            };
            let mut names = Vec::with_capacity(arity);
            for _ in 0..arity {
                names.push(self.ident()?);
            }
            self.expect(Tok::FatArrow)?;
            let body = self.comp()?;
            let dup = ParseError {
                offset: off,
                message: format!("duplicate `{which}` branch"),
            };
            match which.as_str() {
                "var" => {
                    if var.is_some() {
                        return Err(dup);
                    }
                    var = Some(VarBranch {
                        psi: names[0].clone(),
                        p: names[1].clone(),
                        body,
                    });
                }
                "app" => {
                    if app.is_some() {
                        return Err(dup);
                    }
                    app = Some(AppBranch {
                        psi: names[0].clone(),
                        m: names[1].clone(),
                        n: names[2].clone(),
                        fm: names[3].clone(),
                        fn_: names[4].clone(),
                        body,
                    });
                }
                _ => {
                    if lam.is_some() {
                        return Err(dup);
                    }
                    lam = Some(LamBranch {
                        psi: names[0].clone(),
                        m: names[1].clone(),
                        fm: names[2].clone(),
                        body,
                    });
                }
            }
        }
        let (Some(var), Some(app), Some(lam)) = (var, app, lam) else {
            return self.error("`|` (all of the `var`, `app` and `lam` branches)");
        };
        self.expect_kw("end")?;
        let ctx_arg = if matches!(self.peek(), Tok::LBrace) {
            self.ctx_literal()?
        } else {
            LfCtx::ctx_var(self.ident()?)
        };
        let scrutinee = self.comp_atom()?;
        Ok(CompTerm::rec(motive, Branches { var, app, lam }, ctx_arg, scrutinee))
    }
}

pub fn parse_file(src: &str) -> Result<SourceFile, ParseError> {
    Parser::new(src)?.file()
}

/// Parses a single computation, resolving LF constants against `sig`.
pub fn parse_comp(src: &str, sig: &Signature) -> Result<CompTerm, ParseError> {
    let mut p = Parser::with_signature(src, sig)?;
    let t = p.comp()?;
    p.expect_end()?;
    Ok(t)
}

/// Parses a single LF term with the given LF variables in scope.
pub fn parse_lf_term(src: &str, sig: &Signature, scope: &[Name]) -> Result<LfTerm, ParseError> {
    let mut p = Parser::with_signature(src, sig)?.with_lf_scope(scope.iter().cloned());
    let m = p.lf_term()?;
    p.expect_end()?;
    Ok(m)
}

pub fn parse_lf_type(src: &str, sig: &Signature, scope: &[Name]) -> Result<LfType, ParseError> {
    let mut p = Parser::with_signature(src, sig)?.with_lf_scope(scope.iter().cloned());
    let a = p.lf_type()?;
    p.expect_end()?;
    Ok(a)
}
