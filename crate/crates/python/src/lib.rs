//! Python bindings: code construction, synthesis, LMAP and BCJR decoding,
//! channel simulation and BER runs.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lmap::bcjr::{bcjr_bidirectional, bcjr_forward, bcjr_tailbiting, exhaustive_posterior};
use lmap::channel::{frame_seed, simulate_frame, ChannelParams, SnrConvention, SseFrame};
use lmap::code_model::{CodeKind, Termination};
use lmap::engine::Mode;
use lmap::label::format_labels;
use lmap::sim::{self, Precision, SimConfig, SimMode};
use lmap::{BackwardBoundary, Dd};

fn py_err(e: lmap::Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse<T: std::str::FromStr<Err = lmap::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

fn frame(sse: Vec<(f64, f64)>) -> SseFrame {
    SseFrame::new(sse.into_iter().map(|(a, b)| [a, b]).collect())
}

/// A rate-1/2 convolutional code, e.g. `Code("7,5")` or `Code("7,5", "nsc", True)`.
#[pyclass(name = "Code", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCode {
    inner: lmap::CodeSpec,
}

#[pymethods]
impl PyCode {
    #[new]
    #[pyo3(signature = (pair, kind = "rsc", tailbiting = false))]
    fn new(pair: &str, kind: &str, tailbiting: bool) -> PyResult<Self> {
        let kind = match kind {
            "rsc" => CodeKind::Rsc,
            "nsc" => CodeKind::Nsc,
            _ => return Err(PyValueError::new_err(format!("kind must be 'rsc' or 'nsc', got {kind:?}"))),
        };
        let term = if tailbiting { Termination::TailBiting } else { Termination::ZeroTail };
        let inner = lmap::CodeSpec::from_octal_pair(pair, kind, term).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn states(&self) -> usize {
        self.inner.states()
    }

    #[getter]
    fn tailbiting(&self) -> bool {
        self.inner.termination == Termination::TailBiting
    }

    /// Interleaved codeword bits `c1, c2, c1, c2, ...`.
    fn encode(&self, info: Vec<u8>) -> PyResult<Vec<u8>> {
        self.inner.encode(&info).map_err(py_err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Code({:?})", self.inner.to_string())
    }
}

/// Synthesized decoder structure.
#[pyclass(name = "DecoderSpec", frozen)]
struct PyDecoderSpec {
    inner: lmap::DecoderSpec,
}

#[pymethods]
impl PyDecoderSpec {
    /// Parses the text form written by `text()`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: lmap::DecoderSpec::parse(text).map_err(py_err)?,
        })
    }

    fn text(&self) -> String {
        self.inner.format()
    }

    #[getter]
    fn labels_i(&self) -> String {
        format_labels(&self.inner.forward.labels_i)
    }

    #[getter]
    fn labels_j(&self) -> String {
        format_labels(&self.inner.forward.labels_j)
    }

    #[getter]
    fn sur(&self) -> String {
        self.inner.forward.sur.to_string()
    }

    #[getter]
    fn d_s(&self) -> u8 {
        self.inner.forward.d_s
    }

    #[getter]
    fn d_f1(&self) -> String {
        self.inner.forward.d_f1.to_string()
    }

    #[getter]
    fn d_f2(&self) -> String {
        self.inner.forward.d_f2.to_string()
    }

    #[getter]
    fn swap_streams(&self) -> bool {
        self.inner.swap_streams
    }
}

/// Runs synthesis (with its self-check) for `code`.
#[pyfunction]
fn synthesize(code: &PyCode) -> PyResult<PyDecoderSpec> {
    Ok(PyDecoderSpec {
        inner: lmap::synthesize(&code.inner).map_err(py_err)?,
    })
}

/// LMAP decoder. `sse` arguments are lists of `(x_c1, x_c2)` pairs.
#[pyclass(name = "Decoder", frozen)]
struct PyDecoder {
    inner: lmap::Decoder,
}

#[pymethods]
impl PyDecoder {
    #[new]
    fn new(code: &PyCode) -> PyResult<Self> {
        Ok(Self {
            inner: lmap::Decoder::new(lmap::synthesize(&code.inner).map_err(py_err)?),
        })
    }

    #[staticmethod]
    fn from_spec(spec: &PyDecoderSpec) -> Self {
        Self {
            inner: lmap::Decoder::new(spec.inner.clone()),
        }
    }

    #[pyo3(signature = (sse, mode = "bidir", boundary = "free", precision = "f64"))]
    fn decode(&self, sse: Vec<(f64, f64)>, mode: &str, boundary: &str, precision: &str) -> PyResult<Vec<f64>> {
        let f = frame(sse);
        let mode: Mode = parse(mode)?;
        let boundary: BackwardBoundary = parse(boundary)?;
        let r = match parse::<Precision>(precision)? {
            Precision::F64 => self.inner.decode::<f64>(&f, mode, boundary),
            Precision::DoubleDouble => self.inner.decode::<Dd>(&f, mode, boundary),
        };
        r.map_err(py_err)
    }

    #[pyo3(signature = (sse, passes = 5, precision = "f64"))]
    fn decode_tailbiting(&self, sse: Vec<(f64, f64)>, passes: usize, precision: &str) -> PyResult<Vec<f64>> {
        let f = frame(sse);
        let r = match parse::<Precision>(precision)? {
            Precision::F64 => self.inner.decode_tailbiting::<f64>(&f, passes),
            Precision::DoubleDouble => self.inner.decode_tailbiting::<Dd>(&f, passes),
        };
        r.map_err(py_err)
    }
}

/// Reference BCJR. `mode` is `forward`, `bidir` or `tb`.
#[pyfunction]
#[pyo3(signature = (code, sse, mode = "bidir", boundary = "free", passes = 5))]
fn bcjr(code: &PyCode, sse: Vec<(f64, f64)>, mode: &str, boundary: &str, passes: usize) -> PyResult<Vec<f64>> {
    let t = code.inner.build_trellis();
    let f = frame(sse);
    match parse::<SimMode>(mode)? {
        SimMode::Forward => Ok(bcjr_forward::<f64>(&t, &f).1),
        SimMode::Bidirectional => Ok(bcjr_bidirectional::<f64>(&t, &f, parse(boundary)?)),
        SimMode::TailBiting => bcjr_tailbiting::<f64>(&t, &f, passes).map_err(py_err),
    }
}

/// Brute-force posterior LLRs for short frames.
#[pyfunction]
#[pyo3(signature = (code, sse, boundary = "free"))]
fn exhaustive(code: &PyCode, sse: Vec<(f64, f64)>, boundary: &str) -> PyResult<Vec<f64>> {
    exhaustive_posterior(&code.inner, &frame(sse), parse(boundary)?).map_err(py_err)
}

/// One random frame over BPSK/AWGN: `(info, codeword, sse)`.
#[pyfunction]
#[pyo3(signature = (code, length, snr_db, seed, convention = "ebn0"))]
fn simulate(
    code: &PyCode,
    length: usize,
    snr_db: f64,
    seed: u64,
    convention: &str,
) -> PyResult<(Vec<u8>, Vec<u8>, Vec<(f64, f64)>)> {
    let conv: SnrConvention = parse(convention)?;
    let sigma = ChannelParams::new(snr_db, 0.5, conv, seed).map_err(py_err)?.sigma;
    let t = code.inner.build_trellis();
    let s = simulate_frame(&code.inner, &t, length, sigma, frame_seed(seed, 0)).map_err(py_err)?;
    Ok((s.info, s.codeword, s.sse.sym.iter().map(|x| (x[0], x[1])).collect()))
}

/// BER/BLER sweep; `options` are the `key=value` config keys, e.g.
/// `ber(code, "0,2", len=64, min_bit_errors=500)`. Returns one dict per point.
#[pyfunction]
#[pyo3(signature = (code, snr, **options))]
fn ber<'py>(
    py: Python<'py>,
    code: &PyCode,
    snr: &str,
    options: Option<&Bound<'py, PyDict>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = SimConfig::new(code.inner.clone());
    cfg.snr_list = sim::parse_snr_list(snr).map_err(py_err)?;
    if let Some(opts) = options {
        for (k, v) in opts.iter() {
            let key: String = k.extract()?;
            let val = v.str()?.to_string();
            let val = match val.as_str() {
                "True" => "true".to_string(),
                "False" => "false".to_string(),
                _ => val,
            };
            cfg.set(&key, &val).map_err(py_err)?;
        }
    }
    let result = py.detach(|| sim::run_ber(&cfg)).map_err(py_err)?;
    result
        .points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("snr_db", p.snr_db)?;
            d.set_item("frames", p.frames)?;
            d.set_item("bits", p.bits)?;
            d.set_item("bit_errors", p.bit_errors)?;
            d.set_item("ber", p.ber)?;
            d.set_item("block_errors", p.block_errors)?;
            d.set_item("bler", p.bler)?;
            d.set_item("ms_per_frame", p.ms_per_frame)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pylmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCode>()?;
    m.add_class::<PyDecoderSpec>()?;
    m.add_class::<PyDecoder>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(bcjr, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(ber, m)?)?;
    Ok(())
}
