//! Python bindings for `mdimlab`.
//!
//! Bit strings cross the boundary as `"0101"` text and dyadic rationals as `"m/2^e"` text.
//! Generators, functions, windows and experiment configs are passed as JSON strings in the same
//! shape the CLI reads.

use std::sync::Arc;

use mdimlab::bits::BitString;
use mdimlab::codec::{self, DyadicRational, RationalPoint};
use mdimlab::complexity::{k_r, BackendSpec, KBackend};
use mdimlab::compressor::Coder;
use mdimlab::functions::{ComputableFunction, FunctionSpec};
use mdimlab::geometry::{self, Ball};
use mdimlab::harness::{run_suite, ExperimentConfig};
use mdimlab::machine::{Enumeration, MachineConfig};
use mdimlab::mutual_info::{self, Window};
use mdimlab::oracle::{make_oracle, GeneratorSpec, PointOracle};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_bits(s: &str) -> PyResult<BitString> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(err(format!("bit strings hold only 0 and 1, got {other:?}"))),
        })
        .collect::<PyResult<Vec<bool>>>()
        .map(BitString::from_bits)
}

fn show_bits(b: &BitString) -> String {
    b.bits().iter().map(|&x| if x { '1' } else { '0' }).collect()
}

fn parse_point(coords: &[String]) -> PyResult<RationalPoint> {
    let cs = coords.iter().map(|c| c.parse::<DyadicRational>().map_err(err)).collect::<PyResult<Vec<_>>>()?;
    RationalPoint::new(cs).map_err(err)
}

fn show_point(p: &RationalPoint) -> Vec<String> {
    p.coords().iter().map(ToString::to_string).collect()
}

fn from_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| err(format!("{what}: {e}")))
}

fn oracle(generator: &str) -> PyResult<PointOracle> {
    make_oracle(&from_json::<GeneratorSpec>("generator", generator)?).map_err(err)
}

fn backend_and_window(backend: Option<&str>, window: Option<&str>) -> PyResult<(KBackend, Window)> {
    let spec = backend.map(|b| from_json::<BackendSpec>("backend", b)).transpose()?.unwrap_or_default();
    let backend = KBackend::from_spec(&spec).map_err(err)?;
    let window = match window {
        Some(w) => from_json("window", w)?,
        None => Window::default_for(&backend),
    };
    Ok((backend, window))
}

/// A bounded prefix machine with its full halting enumeration.
#[pyclass(frozen)]
struct Machine {
    en: Arc<Enumeration>,
}

#[pymethods]
impl Machine {
    #[new]
    #[pyo3(signature = (max_program_len = 16, step_budget = 1000))]
    fn new(max_program_len: usize, step_budget: u64) -> PyResult<Self> {
        let en = Enumeration::shared(&MachineConfig::new(max_program_len, step_budget)).map_err(err)?;
        Ok(Machine { en })
    }

    /// `K(x)`, or `None` when no enumerated program prints `x`.
    fn k(&self, x: &str) -> PyResult<Option<u64>> {
        Ok(self.en.k(&parse_bits(x)?))
    }

    fn k_given(&self, x: &str, given: &str) -> PyResult<Option<u64>> {
        Ok(self.en.k_given(&parse_bits(x)?, &parse_bits(given)?))
    }

    fn kraft_mass(&self) -> f64 {
        self.en.kraft_mass().to_f64()
    }

    fn halting_count(&self) -> usize {
        self.en.halting().len()
    }

    fn output_count(&self) -> usize {
        self.en.output_count()
    }

    /// Exact `K_r(x)` over this machine.
    fn k_r(&self, generator: &str, r: u32) -> PyResult<Option<u64>> {
        Ok(k_r(&oracle(generator)?, r, &KBackend::Exact(Arc::clone(&self.en))))
    }
}

/// A library function built from its JSON spec, e.g. `{"name": "scale", "c": "2"}`.
#[pyclass(frozen)]
struct Function {
    f: ComputableFunction,
}

#[pymethods]
impl Function {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let spec: FunctionSpec = from_json("function", spec)?;
        Ok(Function { f: spec.build().map_err(err)? })
    }

    #[getter]
    fn name(&self) -> &str {
        self.f.name()
    }

    #[getter]
    fn n(&self) -> usize {
        self.f.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.f.k()
    }

    /// `f` at precision `r` for an exactly known dyadic argument.
    fn eval(&self, coords: Vec<String>, r: u32) -> PyResult<Vec<String>> {
        let q = parse_point(&coords)?;
        Ok(show_point(&self.f.eval_point(&q, r).map_err(err)?))
    }
}

#[pyfunction]
fn encode_int(z: i64) -> String {
    show_bits(&codec::encode_int(z))
}

/// The integer and the number of bits read.
#[pyfunction]
fn decode_int(bits: &str) -> PyResult<(i64, usize)> {
    let (z, used) = codec::decode_int(&parse_bits(bits)?).map_err(err)?;
    let z = i64::try_from(z).map_err(|_| err("integer does not fit in 64 bits"))?;
    Ok((z, used))
}

#[pyfunction]
fn encode_point(coords: Vec<String>) -> PyResult<String> {
    Ok(show_bits(&codec::encode_point(&parse_point(&coords)?)))
}

/// Decodes a string holding exactly one canonical point.
#[pyfunction]
fn decode_point(bits: &str) -> PyResult<Vec<String>> {
    codec::decode_point_exact(&parse_bits(bits)?)
        .map(|p| show_point(&p))
        .ok_or_else(|| err("not a canonical point encoding"))
}

#[pyfunction]
fn zn_enumeration(i: usize, n: usize) -> PyResult<Vec<i64>> {
    if n == 0 {
        return Err(err("dimension must be at least one"));
    }
    Ok(geometry::zn_enumeration(i, n))
}

#[pyfunction]
fn zn_index(m: Vec<i64>) -> PyResult<usize> {
    if m.is_empty() {
        return Err(err("dimension must be at least one"));
    }
    Ok(geometry::zn_index(&m))
}

#[pyfunction]
fn enumeration_bound_holds(i: u64, m: Vec<i64>) -> bool {
    geometry::enumeration_bound_holds(i, &m)
}

/// Lower corners of the dyadic cubes of side `2^-r` that meet the ball of radius `2^-r`.
#[pyfunction]
fn cover_ball(center: Vec<String>, r: u32) -> PyResult<Vec<Vec<String>>> {
    let ball = Ball::new(parse_point(&center)?, r);
    let cubes = geometry::cubes_intersecting_ball(&ball).map_err(err)?;
    Ok(cubes.iter().map(|c| show_point(&c.corner())).collect())
}

/// Code length of a bit string under `ctw` or `lz78`.
#[pyfunction]
#[pyo3(signature = (bits, coder = "ctw"))]
fn code_len(bits: &str, coder: &str) -> PyResult<u64> {
    let coder: Coder = from_json("coder", &format!("{coder:?}"))?;
    Ok(coder.code_len(parse_bits(bits)?.bits()))
}

/// `(lo, hi)` slope estimates of the lower and upper dimension of a generated point.
#[pyfunction]
#[pyo3(signature = (generator, backend = None, window = None))]
fn dim_estimate(generator: &str, backend: Option<&str>, window: Option<&str>) -> PyResult<(f64, f64)> {
    let (backend, window) = backend_and_window(backend, window)?;
    let est = mutual_info::dim_estimate(&oracle(generator)?, &window, &backend).map_err(err)?;
    Ok((est.lo, est.hi))
}

/// `(lo, hi)` slope estimates of the lower and upper mutual dimension of two generated points.
#[pyfunction]
#[pyo3(signature = (x, y, backend = None, window = None))]
fn mdim_estimate(x: &str, y: &str, backend: Option<&str>, window: Option<&str>) -> PyResult<(f64, f64)> {
    let (backend, window) = backend_and_window(backend, window)?;
    let p = mutual_info::mdim_estimate(&oracle(x)?, &oracle(y)?, &window, &backend).map_err(err)?;
    Ok((p.slope_lo, p.slope_hi))
}

/// Runs a suite from a JSON experiment config and returns the JSON report.
#[pyfunction]
fn run(config: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config).map_err(err)?;
    run_suite(&cfg).map_err(err)?.to_json().map_err(err)
}

#[pymodule]
pub fn pymdimlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Machine>()?;
    m.add_class::<Function>()?;
    m.add_function(wrap_pyfunction!(encode_int, m)?)?;
    m.add_function(wrap_pyfunction!(decode_int, m)?)?;
    m.add_function(wrap_pyfunction!(encode_point, m)?)?;
    m.add_function(wrap_pyfunction!(decode_point, m)?)?;
    m.add_function(wrap_pyfunction!(zn_enumeration, m)?)?;
    m.add_function(wrap_pyfunction!(zn_index, m)?)?;
    m.add_function(wrap_pyfunction!(enumeration_bound_holds, m)?)?;
    m.add_function(wrap_pyfunction!(cover_ball, m)?)?;
    m.add_function(wrap_pyfunction!(code_len, m)?)?;
    m.add_function(wrap_pyfunction!(dim_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(mdim_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
