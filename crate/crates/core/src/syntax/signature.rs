use std::collections::HashMap;

use super::{AnnDom, LfKind, LfType, Name};

#[derive(Clone, Debug)]
pub enum SigEntry {
    Family(LfKind),
    Const(LfType),
}

/// The global LF signature: type families `a : K` and constants `c : A`,
/// in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    decls: Vec<(Name, SigEntry)>,
    index: HashMap<Name, usize>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    /// Appends a declaration without checking it. Returns `false` if the name
    /// is already declared.
    pub fn push(&mut self, name: Name, entry: SigEntry) -> bool {
        if self.index.contains_key(&name) {
            return false;
        }
        self.index.insert(name.clone(), self.decls.len());
        self.decls.push((name, entry));
        true
    }

    pub fn get(&self, name: &Name) -> Option<&SigEntry> {
        self.index.get(name).map(|&i| &self.decls[i].1)
    }

    pub fn family(&self, name: &Name) -> Option<&LfKind> {
        match self.get(name) {
            Some(SigEntry::Family(k)) => Some(k),
            _ => None,
        }
    }

    pub fn constant(&self, name: &Name) -> Option<&LfType> {
        match self.get(name) {
            Some(SigEntry::Const(a)) => Some(a),
            _ => None,
        }
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.index.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &SigEntry)> {
        self.decls.iter().map(|(n, e)| (n, e))
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    /// `tm : type, lam : (tm → tm) → tm, app : tm → tm → tm`.
    pub fn tm_signature() -> Signature {
        let tm = LfType::tm;
        let mut sig = Signature::new();
        sig.push(Name::new("tm"), SigEntry::Family(LfKind::Type));
        sig.push(
            Name::new("lam"),
            SigEntry::Const(LfType::pi("y", LfType::pi("x", tm(), tm()), tm())),
        );
        sig.push(
            Name::new("app"),
            SigEntry::Const(LfType::pi("x", tm(), LfType::pi("y", tm(), tm()))),
        );
        sig
    }
}

/// The computation context `Γ`: an ordered list of declarations.
#[derive(Clone, Debug, Default)]
pub struct CompCtx {
    entries: Vec<(Name, AnnDom)>,
}

impl CompCtx {
    pub fn new() -> CompCtx {
        CompCtx::default()
    }

    pub fn push(&mut self, name: Name, dom: AnnDom) {
        self.entries.push((name, dom));
    }

    pub fn pop(&mut self) -> Option<(Name, AnnDom)> {
        self.entries.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }

    pub fn lookup(&self, name: &Name) -> Option<&AnnDom> {
        self.entries.iter().rev().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.lookup(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &AnnDom)> {
        self.entries.iter().map(|(n, d)| (n, d))
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.entries.iter().map(|(n, _)| n)
    }
}
