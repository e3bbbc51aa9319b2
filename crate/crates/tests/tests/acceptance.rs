//! Acceptance checks. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cocon_core::comp_subst::{apply_comp_subst, CompSubst, Payload};
use cocon_core::frontend::driver::{load, load_with, run_check, Program};
use cocon_core::frontend::{parse_comp, print};
use cocon_core::generate::{helpers, Gen};
use cocon_core::lf_subst::apply_lf_subst;
use cocon_core::syntax::*;
use cocon_core::typecheck::{Checker, ErrorCode, TYPING_RULES};
use cocon_core::whnf::{Reducer, DEFAULT_FUEL, REDUCTION_RULES};

type Outcome = Result<String, String>;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus")
}

fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cn"))
        .collect();
    files.sort();
    files
}

/// `% expect: exit N [CODE]` and optional `% args: ...` headers.
struct Expectation {
    exit: i32,
    code: Option<String>,
    args: Vec<String>,
}

fn expectation(src: &str) -> Option<Expectation> {
    let mut exp = None;
    let mut args = Vec::new();
    for line in src.lines() {
        if let Some(rest) = line.strip_prefix("% expect: exit ") {
            let mut parts = rest.split_whitespace();
            let exit = parts.next()?.parse().ok()?;
            exp = Some((exit, parts.next().map(str::to_string)));
        } else if let Some(rest) = line.strip_prefix("% args:") {
            args = rest.split_whitespace().map(str::to_string).collect();
        }
    }
    exp.map(|(exit, code)| Expectation { exit, code, args })
}

fn tm_prog(extra: &str) -> Program {
    let src = format!("tm : type. lam : (tm -> tm) -> tm. app : tm -> tm -> tm.\n{extra}");
    load("<test>", &src, DEFAULT_FUEL).unwrap_or_else(|d| panic!("{d}"))
}

fn comp(prog: &Program, src: &str) -> CompTerm {
    parse_comp(src, &prog.sig).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn checker(prog: &Program) -> Checker<'_> {
    let mut ck = Checker::new(&prog.sig).with_gamma(prog.gamma());
    ck.reducer = prog.reducer(DEFAULT_FUEL);
    ck
}

// ---- corpus ----

fn rule_coverage() -> Outcome {
    let files = corpus_files();
    if files.len() < 30 {
        return Err(format!("only {} corpus files", files.len()));
    }
    let start = Instant::now();
    let mut negative_codes = BTreeSet::new();
    let mut failures = Vec::new();
    for f in &files {
        let src = std::fs::read_to_string(f).unwrap();
        let Some(exp) = expectation(&src) else {
            failures.push(format!("{}: no expectation header", f.display()));
            continue;
        };
        let fuel = match exp.args.as_slice() {
            [flag, n] if flag == "--fuel" => n.parse().unwrap(),
            _ => DEFAULT_FUEL,
        };
        // the same entry point `cocon check` uses once its arguments are parsed
        let out = run_check(&[f], fuel);
        let stderr = out.stderr;
        let got = out.code;
        if got != exp.exit {
            failures.push(format!("{}: exit {got}, expected {}", f.display(), exp.exit));
        }
        if let Some(code) = &exp.code {
            if !stderr.contains(&format!("ERROR {code} ")) {
                failures.push(format!("{}: missing {code} in `{}`", f.display(), stderr.trim()));
            }
            negative_codes.insert(code.clone());
        }
    }
    let elapsed = start.elapsed();

    let mut used: BTreeSet<&'static str> = BTreeSet::new();
    for f in &files {
        let src = std::fs::read_to_string(f).unwrap();
        if expectation(&src).is_some_and(|e| e.exit != 0) {
            continue;
        }
        let prog = match load_with(&f.display().to_string(), &src, DEFAULT_FUEL, Some(&mut used)) {
            Ok(p) => p,
            Err(d) => {
                failures.push(format!("{d}"));
                continue;
            }
        };
        for d in &prog.defs {
            let mut r = prog.reducer(DEFAULT_FUEL).with_trace();
            let _ = r.normalize_deep(&d.body);
            used.extend(r.take_trace());
        }
    }
    let missing_rules: Vec<&str> = TYPING_RULES
        .iter()
        .chain(REDUCTION_RULES)
        .filter(|r| !used.contains(*r))
        .copied()
        .collect();
    if !missing_rules.is_empty() {
        failures.push(format!("rules never exercised by a positive file: {}", missing_rules.join(", ")));
    }
    let missing_codes: Vec<&str> = ErrorCode::ALL
        .iter()
        .map(|c| c.as_str())
        .filter(|c| !negative_codes.contains(*c))
        .collect();
    if !missing_codes.is_empty() {
        failures.push(format!("error codes without a negative file: {}", missing_codes.join(", ")));
    }
    if elapsed >= Duration::from_secs(5) {
        failures.push(format!("corpus took {elapsed:?}"));
    }
    if failures.is_empty() {
        Ok(format!("{} files in {elapsed:?}", files.len()))
    } else {
        Err(failures.join("; "))
    }
}

// ---- recursor unfolding ----

const SWAP: &str = "rec ((psi : ctx) -> (y : [psi |- tm]) -> [psi |- tm]) with
  | var psi p => [psi |- unbox(p ; wk psi)]
  | app psi m n fm fn_ => [psi |- app unbox(fn_ ; wk psi) unbox(fm ; wk psi)]
  | lam psi m fm => [psi |- lam \\x. unbox(fm ; wk(psi, x))]
  end";

/// `(ctx, scrutinee, branch body with the substitution applied by hand,
/// normal form)`.
const UNFOLDINGS: &[(&str, &str, &str, &str, &str)] = &[
    ("var", "x : tm", "x", "[x : tm |- unbox([x : tm |- x] ; wk(x))]", "x"),
    ("var", "x : tm, w : tm", "x", "[x : tm, w : tm |- unbox([x : tm, w : tm |- x] ; wk(x, w))]", "x"),
    ("var", "x : tm, w : tm", "w", "[x : tm, w : tm |- unbox([x : tm, w : tm |- w] ; wk(x, w))]", "w"),
    (
        "app",
        "",
        "app (lam \\x. x) (lam \\y. y)",
        "[ |- app unbox(REC {} [ |- lam \\y. y] ; wk(.)) unbox(REC {} [ |- lam \\x. x] ; wk(.))]",
        "app (lam \\y. y) (lam \\x. x)",
    ),
    (
        "app",
        "x : tm",
        "app x (lam \\y. y)",
        "[x : tm |- app unbox(REC {x : tm} [x : tm |- lam \\y. y] ; wk(x)) unbox(REC {x : tm} [x : tm |- x] ; wk(x))]",
        "app (lam \\y. y) x",
    ),
    (
        "app",
        "x : tm, w : tm",
        "app (app x w) w",
        "[x : tm, w : tm |- app unbox(REC {x : tm, w : tm} [x : tm, w : tm |- w] ; wk(x, w))
           unbox(REC {x : tm, w : tm} [x : tm, w : tm |- app x w] ; wk(x, w))]",
        "app w (app w x)",
    ),
    (
        "lam",
        "",
        "lam \\x. x",
        "[ |- lam \\x. unbox(REC {x : tm} [x : tm |- x] ; wk(x))]",
        "lam \\x. x",
    ),
    (
        "lam",
        "w : tm",
        "lam \\x. app w x",
        "[w : tm |- lam \\x. unbox(REC {w : tm, x : tm} [w : tm, x : tm |- app w x] ; wk(w, x))]",
        "lam \\x. app x w",
    ),
    (
        "lam",
        "x : tm",
        "lam \\y. app y x",
        "[x : tm |- lam \\y. unbox(REC {x : tm, y : tm} [x : tm, y : tm |- app y x] ; wk(x, y))]",
        "lam \\y. app x y",
    ),
];

fn recursor_unfolding() -> Outcome {
    let prog = tm_prog("");
    let mut failures = Vec::new();
    let mut heads = BTreeSet::new();
    for (head, ctx, scrut, unfolded, normal) in UNFOLDINGS {
        let applied = comp(&prog, &format!("{SWAP} {{{ctx}}} [{ctx} |- {scrut}]"));
        let by_hand = comp(&prog, &unfolded.replace("REC", SWAP));
        let ty = comp(&prog, &format!("[{ctx} |- tm]"));
        let expected = comp(&prog, &format!("[{ctx} |- {normal}]"));
        let mut ck = checker(&prog);
        let res = ck
            .check_comp(&applied, &ty)
            .and_then(|_| ck.check_comp(&by_hand, &ty))
            .and_then(|_| ck.conv_comp(&applied, &by_hand, &ty));
        match res {
            Ok(true) => {}
            Ok(false) => failures.push(format!("{head} on `{scrut}`: not convertible")),
            Err(e) => failures.push(format!("{head} on `{scrut}`: {e}")),
        }
        let mut r = Reducer::new(DEFAULT_FUEL).with_trace();
        match r.whnf_comp(&applied) {
            Ok(_) if r.take_trace().first() == Some(&format!("rec-{head}").as_str()) => {}
            _ => failures.push(format!("{head} on `{scrut}`: first step is not rec-{head}")),
        }
        match Reducer::new(DEFAULT_FUEL).normalize_deep(&applied) {
            Ok(v) if alpha_eq(&v, &expected) => {}
            Ok(v) => failures.push(format!("{head} on `{scrut}` normalized to {}", print::comp(&v))),
            Err(e) => failures.push(format!("{head} on `{scrut}`: {e}")),
        }
        heads.insert(*head);
    }
    if heads.len() != 3 {
        failures.push("not every head covered".into());
    }
    if failures.is_empty() {
        Ok(format!("{} unfoldings", UNFOLDINGS.len()))
    } else {
        Err(failures.join("; "))
    }
}

// ---- eta ----

fn eta_laws() -> Outcome {
    let prog = helpers();
    let mut g = Gen::new(0x3e7a);
    let mut failures = Vec::new();
    let fun_ty = LfType::arrow(LfType::tm(), LfType::tm());
    for i in 0..100 {
        let inst = g.lf_fun(3);
        let mut ck = inst.checker(&prog, DEFAULT_FUEL);
        let x = Name::new("eta");
        let expanded = LfTerm::lam(x.clone(), LfTerm::app(inst.term.clone(), LfTerm::Var(x)));
        // The expansion of an abstraction applies an abstraction, which
        // checking cannot infer, so only the other expansions are checked.
        let res = ck
            .check_lf_term(&inst.psi, &inst.term, &fun_ty)
            .and_then(|_| match inst.term {
                LfTerm::Lam(..) => Ok(()),
                _ => ck.check_lf_term(&inst.psi, &expanded, &fun_ty),
            })
            .and_then(|_| ck.conv_lf_term(&inst.psi, &inst.term, &expanded, &fun_ty));
        if !matches!(res, Ok(true)) {
            failures.push(format!("lf #{i} `{}`: {res:?}", print::lf_term(&inst.term)));
        }
    }
    for i in 0..100 {
        let inst = g.instance(3);
        let mut ck = inst.checker(&prog, DEFAULT_FUEL);
        let expanded = CompTerm::boxed(inst.psi.clone(), LfTerm::unbox(inst.term.clone(), LfSubst::Wk(inst.psi.erase())));
        let res = ck
            .check_comp(&inst.term, &inst.ty)
            .and_then(|_| ck.check_comp(&expanded, &inst.ty))
            .and_then(|_| ck.conv_comp(&inst.term, &expanded, &inst.ty));
        if !matches!(res, Ok(true)) {
            failures.push(format!("box #{i} `{}`: {res:?}", print::comp(&inst.term)));
        }
    }
    if failures.is_empty() {
        Ok("200 instances".into())
    } else {
        Err(format!("{} failures: {}", failures.len(), failures.join("; ")))
    }
}

// ---- subject reduction ----

fn preserves(ck: &mut Checker, t: &CompTerm, ty: &CompTerm) -> Result<(), String> {
    let w = ck.reducer.whnf_comp(t).map_err(|e| e.to_string())?;
    ck.check_comp(&w, ty).map_err(|e| format!("reduct ill-typed: {e}"))?;
    match ck.conv_comp(&w, t, ty) {
        Ok(true) => Ok(()),
        Ok(false) => Err("reduct not convertible".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn subject_reduction() -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0;
    for f in corpus_files() {
        let src = std::fs::read_to_string(&f).unwrap();
        if expectation(&src).is_some_and(|e| e.exit != 0) {
            continue;
        }
        let prog = load(&f.display().to_string(), &src, DEFAULT_FUEL).map_err(|d| d.to_string())?;
        for d in &prog.defs {
            let mut ck = checker(&prog);
            if let Err(e) = preserves(&mut ck, &d.body, &d.ty) {
                failures.push(format!("{}: {}: {e}", f.display(), d.name));
            }
            count += 1;
        }
    }
    let prog = helpers();
    let mut g = Gen::new(0x5eb);
    for i in 0..200 {
        let inst = g.instance(3);
        let mut ck = inst.checker(&prog, DEFAULT_FUEL);
        if let Err(e) = ck.check_comp(&inst.term, &inst.ty) {
            failures.push(format!("generated #{i} ill-typed: {e}"));
            continue;
        }
        if let Err(e) = preserves(&mut ck, &inst.term, &inst.ty) {
            failures.push(format!("generated #{i} `{}`: {e}", print::comp(&inst.term)));
        }
        count += 1;
    }
    if failures.is_empty() {
        Ok(format!("{count} terms"))
    } else {
        Err(failures.join("; "))
    }
}

// ---- whnf determinacy ----

fn whnf_determinacy() -> Outcome {
    let prog = helpers();
    let mut g = Gen::new(0xde7);
    let mut failures = Vec::new();
    for i in 0..500 {
        let t = g.instance(3).term;
        let run = |t: &CompTerm| prog.reducer(DEFAULT_FUEL).whnf_comp(t);
        match (run(&t), run(&t)) {
            (Ok(a), Ok(b)) => {
                if !alpha_eq(&a, &b) {
                    failures.push(format!("#{i}: two runs disagree"));
                }
                match run(&a) {
                    Ok(c) if alpha_eq(&a, &c) => {}
                    Ok(_) => failures.push(format!("#{i}: whnf is not idempotent on `{}`", print::comp(&a))),
                    Err(e) => failures.push(format!("#{i}: {e}")),
                }
            }
            (a, b) => failures.push(format!("#{i}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    if failures.is_empty() {
        Ok("500 terms".into())
    } else {
        Err(failures.join("; "))
    }
}

// ---- substitution algebra ----

fn substitution_algebra() -> Outcome {
    let mut g = Gen::new(0x5b57);
    let mut failures = Vec::new();
    for i in 0..500 {
        let tr = g.lf_subst_triple(3);
        let res = (|| {
            let once = apply_lf_subst(&tr.inner, &tr.dom1, &tr.term)?;
            let twice = apply_lf_subst(&tr.outer, &tr.dom2, &once)?;
            let composed = apply_lf_subst(&tr.outer, &tr.dom2, &tr.inner)?;
            let direct = apply_lf_subst(&composed, &tr.dom1, &tr.term)?;
            let ident = apply_lf_subst(&LfSubst::Wk(tr.dom1.clone()), &tr.dom1, &tr.term)?;
            let left = apply_lf_subst(&tr.inner, &tr.dom1, &LfSubst::Wk(tr.dom1.clone()))?;
            Ok::<_, cocon_core::lf_subst::SubstError>((twice, direct, ident, left))
        })();
        match res {
            Ok((twice, direct, ident, left)) => {
                if !alpha_eq(&twice, &direct) {
                    failures.push(format!("lf #{i}: composition"));
                }
                if !alpha_eq(&ident, &tr.term) {
                    failures.push(format!("lf #{i}: identity"));
                }
                if !alpha_eq(&left, &tr.inner) {
                    failures.push(format!("lf #{i}: identity after substitution"));
                }
            }
            Err(e) => failures.push(format!("lf #{i}: {e}")),
        }
    }
    for i in 0..500 {
        let tr = g.comp_subst_triple(3);
        let res = (|| {
            let once = apply_comp_subst(&tr.inner, &tr.term)?;
            let twice = apply_comp_subst(&tr.outer, &once)?;
            let mut composed = CompSubst::new();
            for (y, p) in tr.inner.entries() {
                let Payload::Term(t) = p else { unreachable!() };
                composed.push(y.clone(), Payload::Term(apply_comp_subst(&tr.outer, t)?));
            }
            let direct = apply_comp_subst(&composed, &tr.term)?;
            let ident = apply_comp_subst(&CompSubst::identity(&tr.gamma1), &tr.term)?;
            Ok::<_, cocon_core::lf_subst::SubstError>((twice, direct, ident))
        })();
        match res {
            Ok((twice, direct, ident)) => {
                if !alpha_eq(&twice, &direct) {
                    failures.push(format!("comp #{i}: composition"));
                }
                if !alpha_eq(&ident, &tr.term) {
                    failures.push(format!("comp #{i}: identity"));
                }
            }
            Err(e) => failures.push(format!("comp #{i}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok("500 + 500 triples".into())
    } else {
        Err(failures.join("; "))
    }
}

// ---- consistency ----

/// Every computation of depth at most `depth` over the variables in
/// `scope`, built from universes, variables, functions, application,
/// dependent functions over types and contexts, and the empty context.
/// Binders introduced at depth `d` are all named `b{d}`.
fn enumerate(depth: u32, scope: &[Name]) -> Vec<CompTerm> {
    let mut out = vec![CompTerm::Univ(0), CompTerm::Univ(1), CompTerm::ctx_lit(LfCtx::empty())];
    out.extend(scope.iter().cloned().map(CompTerm::Var));
    if depth == 0 {
        return out;
    }
    let smaller = enumerate(depth - 1, scope);
    let b = Name::new(format!("b{depth}"));
    let mut inner_scope = scope.to_vec();
    inner_scope.push(b.clone());
    let under = enumerate(depth - 1, &inner_scope);
    for body in &under {
        out.push(CompTerm::func(b.clone(), body.clone()));
        out.push(CompTerm::pi(b.clone(), AnnDom::Ctx, body.clone()));
        for dom in &smaller {
            out.push(CompTerm::pi(b.clone(), AnnDom::Ty(dom.clone()), body.clone()));
        }
    }
    for f in &smaller {
        for a in &smaller {
            out.push(CompTerm::app(f.clone(), a.clone()));
        }
    }
    out
}

fn consistency() -> Outcome {
    let start = Instant::now();
    let sig = Signature::new();
    let x = Name::new("x");
    let mut gamma = CompCtx::new();
    gamma.push(x.clone(), AnnDom::Ty(CompTerm::Univ(0)));
    let target = CompTerm::Var(x.clone());
    let ck = || Checker::with_fuel(&sig, 10_000).with_gamma(gamma.clone());
    let mut accepted = Vec::new();
    let (mut total, mut checked) = (0usize, 0usize);
    let mut try_term = |t: CompTerm| {
        checked += 1;
        if ck().check_comp(&t, &target).is_ok() {
            accepted.push(print::comp(&t));
        }
    };
    // Depth at most 2: every term is checked.
    let d2 = enumerate(2, std::slice::from_ref(&x));
    for t in &d2 {
        try_term(t.clone());
    }
    total += d2.len();
    // Depth 3, by top-level constructor. Application infers its function
    // first and a dependent function sorts its domain first; when that
    // fails, every completion fails at the same point, so those completions
    // are counted as rejected without being rebuilt.
    let b3 = Name::new("b3");
    let d2_under = enumerate(2, &[x.clone(), b3.clone()]);
    for body in &d2_under {
        try_term(CompTerm::func(b3.clone(), body.clone()));
        try_term(CompTerm::pi(b3.clone(), AnnDom::Ctx, body.clone()));
    }
    total += 2 * d2_under.len();
    for dom in &d2 {
        total += d2_under.len();
        if ck().infer_sort(dom).is_err() {
            continue;
        }
        for body in &d2_under {
            try_term(CompTerm::pi(b3.clone(), AnnDom::Ty(dom.clone()), body.clone()));
        }
    }
    for f in &d2 {
        total += d2.len();
        if ck().infer_comp(f).is_err() {
            continue;
        }
        for a in &d2 {
            try_term(CompTerm::app(f.clone(), a.clone()));
        }
    }
    // The shortcut agrees with full checking on the depth-2 space.
    for t in &d2 {
        let head_fails = match t {
            CompTerm::App(f, _) => ck().infer_comp(f).is_err(),
            CompTerm::Pi(_, d, _) => matches!(&**d, AnnDom::Ty(d) if ck().infer_sort(d).is_err()),
            _ => false,
        };
        if head_fails && ck().check_comp(t, &target).is_ok() {
            return Err(format!("`{}` checks although its head fails", print::comp(t)));
        }
    }
    let elapsed = start.elapsed();
    if !accepted.is_empty() {
        return Err(format!("{} terms inhabit x, e.g. `{}`", accepted.len(), accepted[0]));
    }
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("{total} terms took {elapsed:?}"));
    }
    Ok(format!("0 of {total} terms accepted ({checked} checked in full) in {elapsed:?}"))
}

// ---- large elimination ----

const LARGE: &str = "nat : type. z : nat. s : nat -> nat.
def T : [ |- tm] -> U0 := fn t =>
  rec ((psi : ctx) -> (y : [psi |- tm]) -> U0) with
  | var psi p => [ |- tm]
  | app psi m n fm fn_ => [ |- nat]
  | lam psi m fm => [ |- tm]
  end {} t.
";

fn large_elimination() -> Outcome {
    let prog = tm_prog(LARGE);
    // T on a lam-headed term is [ |- tm], on an app-headed term [ |- nat].
    let cases = [("lam \\x. x", "[ |- tm]"), ("app (lam \\x. x) (lam \\x. x)", "[ |- nat]")];
    for (arg, expected) in cases {
        let t = comp(&prog, &format!("T [ |- {arg}]"));
        let v = prog.reducer(DEFAULT_FUEL).whnf_comp(&t).map_err(|e| e.to_string())?;
        if !alpha_eq(&v, &comp(&prog, expected)) {
            return Err(format!("T [ |- {arg}] evaluated to {}", print::comp(&v)));
        }
    }
    let good = format!(
        "{LARGE}def a : T [ |- lam \\x. x] := [ |- lam \\x. x].
         def b : T [ |- app (lam \\x. x) (lam \\x. x)] := [ |- s z].
         def c : (t : [ |- tm]) -> T t -> T t := fn t => fn v => v.
         def d : T [ |- app (lam \\x. x) (lam \\x. x)] := c [ |- app (lam \\x. x) (lam \\x. x)] [ |- z]."
    );
    let bad = format!("{LARGE}def b : T [ |- app (lam \\x. x) (lam \\x. x)] := [ |- lam \\x. x].");
    let pre = "tm : type. lam : (tm -> tm) -> tm. app : tm -> tm -> tm.\n";
    load("good", &format!("{pre}{good}"), DEFAULT_FUEL).map_err(|d| d.to_string())?;
    match load("bad", &format!("{pre}{bad}"), DEFAULT_FUEL) {
        Ok(_) => Err("mismatched variant was accepted".into()),
        Err(d) if d.code == ErrorCode::TypeMismatch => Ok("typed by evaluation; mismatch rejected".into()),
        Err(d) => Err(format!("mismatched variant failed with {d}")),
    }
}

// ---- conversion against an oracle ----

/// Untyped de Bruijn terms over the `lam` and `app` constants.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Db {
    Var(usize),
    Lam(Box<Db>),
    App(Box<Db>, Box<Db>),
    Con(&'static str),
}

fn to_db(m: &LfTerm, env: &mut Vec<Name>) -> Db {
    match m {
        LfTerm::Var(x) => Db::Var(env.iter().rev().position(|y| y == x).expect("closed term")),
        LfTerm::Const(c) if c.text() == LAM => Db::Con(LAM),
        LfTerm::Const(_) => Db::Con(APP),
        LfTerm::Lam(x, b) => {
            env.push(x.clone());
            let b = to_db(b, env);
            env.pop();
            Db::Lam(Box::new(b))
        }
        LfTerm::App(f, a) => Db::App(Box::new(to_db(f, env)), Box::new(to_db(a, env))),
        LfTerm::Unbox(t, sigma) => {
            let (CompTerm::BoxObj(b), LfSubst::Cons(_, arg)) = (&**t, &**sigma) else {
                panic!("unexpected unbox");
            };
            let body = to_db(&b.term, &mut b.ctx.vars.clone());
            Db::App(Box::new(Db::Lam(Box::new(body))), Box::new(to_db(arg, env)))
        }
    }
}

fn shift(t: &Db, d: isize, cutoff: usize) -> Db {
    match t {
        Db::Var(k) if *k >= cutoff => Db::Var((*k as isize + d) as usize),
        Db::Var(_) | Db::Con(_) => t.clone(),
        Db::Lam(b) => Db::Lam(Box::new(shift(b, d, cutoff + 1))),
        Db::App(f, a) => Db::App(Box::new(shift(f, d, cutoff)), Box::new(shift(a, d, cutoff))),
    }
}

fn subst(t: &Db, k: usize, s: &Db) -> Db {
    match t {
        Db::Var(j) if *j == k => shift(s, k as isize, 0),
        Db::Var(j) if *j > k => Db::Var(j - 1),
        Db::Var(_) | Db::Con(_) => t.clone(),
        Db::Lam(b) => Db::Lam(Box::new(subst(b, k + 1, s))),
        Db::App(f, a) => Db::App(Box::new(subst(f, k, s)), Box::new(subst(a, k, s))),
    }
}

fn beta_nf(t: &Db) -> Db {
    match t {
        Db::Var(_) | Db::Con(_) => t.clone(),
        Db::Lam(b) => Db::Lam(Box::new(beta_nf(b))),
        Db::App(f, a) => match beta_nf(f) {
            Db::Lam(b) => beta_nf(&subst(&b, 0, a)),
            f => Db::App(Box::new(f), Box::new(beta_nf(a))),
        },
    }
}

/// Simple types: `tm` and `tm -> tm` are the only ones needed.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ty {
    Tm,
    Fun,
}

/// Eta-expands a beta-normal term of type `ty` to long form.
fn eta_long(t: &Db, ty: Ty) -> Db {
    match (ty, t) {
        (Ty::Fun, Db::Lam(b)) => Db::Lam(Box::new(eta_long(b, Ty::Tm))),
        (Ty::Fun, _) => {
            let body = Db::App(Box::new(shift(t, 1, 0)), Box::new(Db::Var(0)));
            Db::Lam(Box::new(eta_long(&body, Ty::Tm)))
        }
        (Ty::Tm, _) => {
            let (head, args) = spine(t);
            let arg_tys: &[Ty] = match head {
                Db::Con(c) if *c == LAM => &[Ty::Fun],
                Db::Con(_) => &[Ty::Tm, Ty::Tm],
                _ => &[],
            };
            let mut out = head.clone();
            for (a, ty) in args.iter().zip(arg_tys.iter().copied().chain(std::iter::repeat(Ty::Tm))) {
                out = Db::App(Box::new(out), Box::new(eta_long(a, ty)));
            }
            out
        }
    }
}

fn spine(t: &Db) -> (&Db, Vec<&Db>) {
    let mut args = Vec::new();
    let mut h = t;
    while let Db::App(f, a) = h {
        args.push(&**a);
        h = f;
    }
    args.reverse();
    (h, args)
}

fn oracle_nf(m: &LfTerm) -> Db {
    eta_long(&beta_nf(&to_db(m, &mut Vec::new())), Ty::Tm)
}

/// Closed-box β-redex `unbox([b : tm |- body] ; ., arg)`.
fn redex(b: &Name, body: LfTerm, arg: LfTerm) -> LfTerm {
    let ctx = LfCtx::empty().with(b.clone(), LfType::tm());
    LfTerm::unbox(CompTerm::boxed(ctx, body), LfSubst::Cons(LfSubst::Empty.into(), arg))
}

/// Terms of type `tm` by exact size, over scopes named `v0, v1, ...`.
/// Variables, `lam` and `app` count one each; an abstraction passed to
/// `lam` is free; a redex counts one.
struct TmTerms {
    memo: HashMap<(usize, usize), Vec<LfTerm>>,
}

impl TmTerms {
    fn var(i: usize) -> Name {
        Name::new(format!("v{i}"))
    }

    fn get(&mut self, scope: usize, n: usize) -> Vec<LfTerm> {
        if let Some(v) = self.memo.get(&(scope, n)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend((0..scope).map(|i| LfTerm::Var(Self::var(i))));
        }
        if n >= 2 {
            // lam \b. body, and the eta-short lam (app t)
            let b = Self::var(scope);
            for body in self.get(scope + 1, n - 1) {
                out.push(LfTerm::app(LfTerm::cnst(LAM), LfTerm::lam(b.clone(), body)));
            }
            for t in self.get(scope, n.saturating_sub(2)) {
                out.push(LfTerm::app(LfTerm::cnst(LAM), LfTerm::app(LfTerm::cnst(APP), t)));
            }
        }
        for k in 1..n.saturating_sub(1) {
            let fs = self.get(scope, k);
            let args = self.get(scope, n - 1 - k);
            for f in &fs {
                for a in &args {
                    out.push(LfTerm::apps(LfTerm::cnst(APP), [f.clone(), a.clone()]));
                }
            }
            // the box is closed, so its body only sees its own binder
            let bodies = self.get(1, k);
            for body in &bodies {
                for a in &args {
                    out.push(redex(&Self::var(0), body.clone(), a.clone()));
                }
            }
        }
        self.memo.insert((scope, n), out.clone());
        out
    }
}

fn oracle_equivalence() -> Outcome {
    let prog = tm_prog("");
    let ty = CompTerm::box_ty(LfCtx::empty(), LfType::tm());
    let mut closed = Vec::new();
    let mut gen = TmTerms { memo: HashMap::new() };
    for m in (1..=7).flat_map(|n| gen.get(0, n)) {
        let boxed = CompTerm::boxed(LfCtx::empty(), m.clone());
        if checker(&prog).check_comp(&boxed, &ty).is_ok() {
            closed.push((boxed, oracle_nf(&m)));
        }
    }
    let mut disagreements = Vec::new();
    let mut equal_pairs = 0;
    for (b1, n1) in &closed {
        for (b2, n2) in &closed {
            let expected = n1 == n2;
            equal_pairs += usize::from(expected);
            match checker(&prog).conv_comp(b1, b2, &ty) {
                Ok(got) if got == expected => {}
                other => disagreements.push(format!("{} vs {}: {other:?}", print::comp(b1), print::comp(b2))),
            }
        }
    }
    if !disagreements.is_empty() {
        return Err(format!("{} disagreements, e.g. {}", disagreements.len(), disagreements[0]));
    }
    let n = closed.len();
    Ok(format!("{n} terms, {} pairs, {equal_pairs} convertible", n * n))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("rule-coverage corpus", rule_coverage),
        ("recursor unfolding", recursor_unfolding),
        ("eta laws", eta_laws),
        ("subject reduction", subject_reduction),
        ("whnf determinacy and idempotence", whnf_determinacy),
        ("substitution algebra", substitution_algebra),
        ("consistency probe", consistency),
        ("large elimination", large_elimination),
        ("conversion oracle", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS {} {name}: {detail}", i + 1),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {} {name}: panicked", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
