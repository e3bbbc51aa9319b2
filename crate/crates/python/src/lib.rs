//! Python bindings: check and evaluate source text.

use cocon_core::frontend::driver::{load, Program};
use cocon_core::frontend::print;
use cocon_core::syntax::Name;
use cocon_core::whnf::{WhnfError, DEFAULT_FUEL};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyKeyError};
use pyo3::prelude::*;

create_exception!(cocon, CoconError, PyException, "A rejected program; the message is the diagnostic line.");
create_exception!(cocon, FuelExhausted, CoconError, "Evaluation ran out of fuel.");

fn load_source(source: &str, file: &str, fuel: Option<u64>) -> PyResult<Program> {
    load(file, source, fuel.unwrap_or(DEFAULT_FUEL)).map_err(|d| CoconError::new_err(d.to_string()))
}

/// Checks a whole source file and returns the names of its definitions.
#[pyfunction]
#[pyo3(signature = (source, file = "<string>", fuel = None))]
fn check(source: &str, file: &str, fuel: Option<u64>) -> PyResult<Vec<String>> {
    let prog = load_source(source, file, fuel)?;
    Ok(prog.defs.iter().map(|d| d.name.to_string()).collect())
}

/// Evaluates a definition of a checked source file and returns the printed
/// result, in weak head normal form or fully normalized when `deep` is set.
#[pyfunction]
#[pyo3(signature = (source, definition, deep = false, fuel = None))]
fn evaluate(source: &str, definition: &str, deep: bool, fuel: Option<u64>) -> PyResult<String> {
    let fuel = fuel.unwrap_or(DEFAULT_FUEL);
    let prog = load_source(source, "<string>", Some(fuel))?;
    let def = prog
        .def(&Name::new(definition))
        .ok_or_else(|| PyKeyError::new_err(definition.to_string()))?;
    let mut r = prog.reducer(fuel);
    let res = if deep { r.normalize_deep(&def.body) } else { r.whnf_comp(&def.body) };
    match res {
        Ok(v) => Ok(print::comp(&v)),
        Err(e @ WhnfError::FuelExhausted { .. }) => Err(FuelExhausted::new_err(e.to_string())),
        Err(e) => Err(CoconError::new_err(e.to_string())),
    }
}

#[pymodule]
#[pyo3(name = "cocon")]
pub fn cocon_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add("CoconError", m.py().get_type::<CoconError>())?;
    m.add("FuelExhausted", m.py().get_type::<FuelExhausted>())?;
    m.add("DEFAULT_FUEL", DEFAULT_FUEL)?;
    Ok(())
}
