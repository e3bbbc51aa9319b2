//! Checking and evaluating whole source files.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use super::parser::{parse_file, Decl};
use super::print;
use crate::syntax::*;
use crate::typecheck::{check_decl, Checker, ErrorCode, TypeError};
use crate::whnf::{Partial, Reducer, WhnfError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE_ERROR: i32 = 1;
pub const EXIT_PARSE_ERROR: i32 = 2;
pub const EXIT_FUEL: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: ErrorCode,
    pub file: String,
    pub offset: usize,
    pub rule: String,
    pub message: String,
}

impl Diagnostic {
    fn from_type_error(file: &str, offset: usize, e: TypeError) -> Diagnostic {
        Diagnostic {
            code: e.code,
            file: file.to_string(),
            offset,
            rule: e.rule.to_string(),
            message: e.message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.code)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ERROR {} {}:{} {}: {}", self.code, self.file, self.offset, self.rule, self.message)
    }
}

pub fn exit_code(code: ErrorCode) -> i32 {
    match code {
        ErrorCode::ParseError => EXIT_PARSE_ERROR,
        ErrorCode::FuelExhausted => EXIT_FUEL,
        _ => EXIT_TYPE_ERROR,
    }
}

#[derive(Clone, Debug)]
pub struct Definition {
    pub name: Name,
    pub ty: CompTerm,
    pub body: CompTerm,
}

/// A checked file.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub sig: Signature,
    pub defs: Vec<Definition>,
    /// Names from `#eval` directives, in file order.
    pub evals: Vec<Name>,
}

impl Program {
    pub fn def(&self, name: &Name) -> Option<&Definition> {
        self.defs.iter().find(|d| &d.name == name)
    }

    pub fn bodies(&self) -> Arc<HashMap<Name, CompTerm>> {
        Arc::new(self.defs.iter().map(|d| (d.name.clone(), d.body.clone())).collect())
    }

    pub fn gamma(&self) -> CompCtx {
        let mut g = CompCtx::new();
        for d in &self.defs {
            g.push(d.name.clone(), AnnDom::Ty(d.ty.clone()));
        }
        g
    }

    pub fn reducer(&self, fuel: u64) -> Reducer {
        Reducer::new(fuel).with_defs(self.bodies())
    }
}

/// Parses and checks `src`, stopping at the first error.
pub fn load(file: &str, src: &str, fuel: u64) -> Result<Program, Diagnostic> {
    load_with(file, src, fuel, None)
}

/// Like [`load`], also collecting the names of the typing rules used and of
/// the reduction rules applied while checking.
pub fn load_with(file: &str, src: &str, fuel: u64, mut rules: Option<&mut BTreeSet<&'static str>>) -> Result<Program, Diagnostic> {
    let parsed = parse_file(src).map_err(|e| Diagnostic {
        code: ErrorCode::ParseError,
        file: file.to_string(),
        offset: e.offset,
        rule: "parse".into(),
        message: e.message,
    })?;
    let mut prog = Program::default();
    for decl in parsed.decls {
        match decl {
            Decl::Lf { name, entry, offset } => {
                check_decl(&prog.sig, &name, &entry).map_err(|e| Diagnostic::from_type_error(file, offset, e))?;
                if let Some(all) = rules.as_deref_mut() {
                    let mut ck = Checker::new(&prog.sig).recording();
                    let _ = ck.check_sig_entry(&entry);
                    all.extend(ck.rules.unwrap_or_default());
                }
                prog.sig.push(name, entry);
            }
            Decl::Def {
                name,
                ty,
                body,
                offset,
                ty_offset,
                body_offset,
            } => {
                if prog.def(&name).is_some() || prog.sig.contains(&name) {
                    let e = TypeError::new(ErrorCode::DuplicateDecl, "def", format!("`{name}` is declared twice"));
                    return Err(Diagnostic::from_type_error(file, offset, e));
                }
                let mut ck = Checker::with_fuel(&prog.sig, fuel).with_gamma(prog.gamma());
                ck.reducer = prog.reducer(fuel);
                if rules.is_some() {
                    ck = ck.recording();
                    ck.reducer = ck.reducer.with_trace();
                }
                let res = ck
                    .check_type(&ty)
                    .map_err(|e| Diagnostic::from_type_error(file, ty_offset, e))
                    .and_then(|_| ck.check_comp(&body, &ty).map_err(|e| Diagnostic::from_type_error(file, body_offset, e)));
                if let (Some(all), Some(used)) = (rules.as_deref_mut(), ck.rules.take()) {
                    all.extend(used);
                    all.extend(ck.reducer.take_trace());
                }
                res?;
                prog.defs.push(Definition { name, ty, body });
            }
            Decl::Eval { name, offset } => {
                if prog.def(&name).is_none() {
                    let e = TypeError::new(ErrorCode::UnboundCompVar, "eval", format!("no definition named `{name}`"));
                    return Err(Diagnostic::from_type_error(file, offset, e));
                }
                prog.evals.push(name);
            }
        }
    }
    Ok(prog)
}

/// What a command prints and how it exits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read(path: &Path) -> Result<String, Diagnostic> {
    std::fs::read_to_string(path).map_err(|e| Diagnostic {
        code: ErrorCode::ParseError,
        file: path.display().to_string(),
        offset: 0,
        rule: "read".into(),
        message: e.to_string(),
    })
}

/// Checks every file. The exit code is the worst one seen, with parse
/// errors ranking above fuel exhaustion above type errors.
pub fn run_check(paths: &[impl AsRef<Path>], fuel: u64) -> Outcome {
    let mut out = Outcome::default();
    for path in paths {
        let path = path.as_ref();
        let res = read(path).and_then(|src| load(&path.display().to_string(), &src, fuel));
        match res {
            Ok(_) => out.stdout.push_str(&format!("ok {}\n", path.display())),
            Err(d) => {
                out.stderr.push_str(&format!("{d}\n"));
                out.code = worse(out.code, d.exit_code());
            }
        }
    }
    out
}

fn worse(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        EXIT_PARSE_ERROR => 3,
        EXIT_FUEL => 2,
        EXIT_TYPE_ERROR => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Evaluate this definition; otherwise every `#eval` directive.
    pub def: Option<String>,
    pub deep: bool,
    pub trace: bool,
    pub fuel: u64,
}

fn render_partial(p: &Partial) -> String {
    match p {
        Partial::Lf(m) => print::lf_term(m),
        Partial::Subst(s) => print::lf_subst(s),
        Partial::Comp(t) => print::comp(t),
    }
}

pub fn run_eval(path: impl AsRef<Path>, opts: &EvalOptions) -> Outcome {
    let path = path.as_ref();
    let label = path.display().to_string();
    let prog = match read(path).and_then(|src| load(&label, &src, opts.fuel)) {
        Ok(p) => p,
        Err(d) => {
            return Outcome {
                code: d.exit_code(),
                stdout: String::new(),
                stderr: format!("{d}\n"),
            }
        }
    };
    let targets: Vec<Name> = match &opts.def {
        Some(n) => vec![Name::new(n)],
        None => prog.evals.clone(),
    };
    let mut out = Outcome::default();
    for name in targets {
        let Some(def) = prog.def(&name) else {
            let d = Diagnostic {
                code: ErrorCode::ParseError,
                file: label.clone(),
                offset: 0,
                rule: "eval".into(),
                message: format!("no definition named `{name}`"),
            };
            out.stderr.push_str(&format!("{d}\n"));
            out.code = EXIT_PARSE_ERROR;
            return out;
        };
        let mut r = prog.reducer(opts.fuel);
        if opts.trace {
            r = r.with_trace();
        }
        let res = if opts.deep { r.normalize_deep(&def.body) } else { r.whnf_comp(&def.body) };
        for rule in r.take_trace() {
            out.stderr.push_str(&format!("trace {rule}\n"));
        }
        match res {
            Ok(v) => out.stdout.push_str(&format!("{}\n", print::comp(&v))),
            Err(e) => {
                if let WhnfError::FuelExhausted { partial, .. } = &e {
                    out.stdout.push_str(&format!("{}\n", render_partial(partial)));
                }
                let d = Diagnostic::from_type_error(&label, 0, e.into());
                out.stderr.push_str(&format!("{d}\n"));
                out.code = d.exit_code();
                return out;
            }
        }
    }
    out
}
