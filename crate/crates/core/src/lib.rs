//! A type checker and evaluator for a dependently typed language with
//! contextual types over the logical framework LF.

pub mod comp_subst;
pub mod conversion;
pub mod frontend;
pub mod generate;
pub mod lf_subst;
pub mod syntax;
pub mod typecheck;
pub mod whnf;
