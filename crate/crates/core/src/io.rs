//! Plain-text file formats.
//!
//! * measures: header `# atoms=S`, then one `t re im` line per atom;
//! * sample vectors: optional `#` header, then one `re im` line per sample;
//! * quantized streams: header `# M=.. lambda=.. K=.. A=.. beta=.. delta=.. method=..`,
//!   then one `re im` line per sample.
//!
//! Reals are written with 17 significant digits.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{Atom, AtomicMeasure};
use crate::noise_shaping::QuantizerConfig;

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_reals(line_no: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("'{tok}': {e}")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != expected {
        return Err(parse_err(
            line_no,
            format!("expected {expected} numbers, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

/// `key=value` pairs of a `#` header line.
fn header_pairs(line: &str) -> Vec<(&str, &str)> {
    line.trim_start_matches('#')
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect()
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn write_measure(mu: &AtomicMeasure) -> String {
    let mut out = format!("# atoms={}\n", mu.len());
    for a in mu.atoms() {
        let _ = writeln!(
            out,
            "{} {} {}",
            real(a.location),
            real(a.amplitude.re),
            real(a.amplitude.im)
        );
    }
    out
}

pub fn read_measure(text: &str) -> Result<AtomicMeasure> {
    let declared = text
        .lines()
        .find(|l| l.trim_start().starts_with('#'))
        .and_then(|l| {
            header_pairs(l)
                .into_iter()
                .find(|(k, _)| *k == "atoms")
                .map(|(_, v)| v.parse::<usize>())
        })
        .transpose()
        .map_err(|e| parse_err(1, format!("bad atom count: {e}")))?;
    let atoms = data_lines(text)
        .map(|(n, l)| {
            let v = parse_reals(n, l, 3)?;
            Ok(Atom::new(v[0], Complex64::new(v[1], v[2])))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(s) = declared {
        if s != atoms.len() {
            return Err(parse_err(
                1,
                format!("header declares {s} atoms, found {}", atoms.len()),
            ));
        }
    }
    AtomicMeasure::new(atoms)
}

pub fn write_samples(values: &[Complex64]) -> String {
    let mut out = format!("# M={}\n", values.len());
    for z in values {
        let _ = writeln!(out, "{} {}", real(z.re), real(z.im));
    }
    out
}

pub fn read_samples(text: &str) -> Result<Vec<Complex64>> {
    data_lines(text)
        .map(|(n, l)| {
            let v = parse_reals(n, l, 2)?;
            Ok(Complex64::new(v[0], v[1]))
        })
        .collect()
}

/// How a stored stream was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMethod {
    Beta,
    Msq,
}

impl StreamMethod {
    pub fn name(self) -> &'static str {
        match self {
            StreamMethod::Beta => "beta",
            StreamMethod::Msq => "msq",
        }
    }
}

/// A quantized sequence together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamFile {
    pub config: QuantizerConfig,
    pub method: StreamMethod,
    pub q: Vec<Complex64>,
}

pub fn write_stream(stream: &StreamFile) -> String {
    let c = &stream.config;
    let mut out = format!(
        "# M={} lambda={} K={} A={} beta={} delta={} method={}\n",
        c.total_samples(),
        c.lambda,
        c.k,
        real(c.a),
        real(c.beta),
        real(c.delta),
        stream.method.name()
    );
    for z in &stream.q {
        let _ = writeln!(out, "{} {}", real(z.re), real(z.im));
    }
    out
}

pub fn read_stream(text: &str) -> Result<StreamFile> {
    let header = text
        .lines()
        .find(|l| l.trim_start().starts_with('#'))
        .ok_or_else(|| parse_err(1, "missing stream header"))?;
    let pairs = header_pairs(header);
    let get = |key: &str| -> Result<&str> {
        pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| parse_err(1, format!("header is missing '{key}'")))
    };
    let int = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|e| parse_err(1, format!("{key}: {e}")))
    };
    let float = |key: &str| -> Result<f64> {
        get(key)?
            .parse()
            .map_err(|e| parse_err(1, format!("{key}: {e}")))
    };
    let total = int("M")?;
    let lambda = int("lambda")?;
    if lambda == 0 || total % lambda != 0 {
        return Err(parse_err(1, format!("M = {total} is not a multiple of lambda = {lambda}")));
    }
    let config = QuantizerConfig::with_parameters(
        total / lambda,
        lambda,
        int("K")?,
        float("A")?,
        float("beta")?,
        float("delta")?,
    )?;
    let method = match pairs.iter().find(|(k, _)| *k == "method").map(|(_, v)| *v) {
        None | Some("beta") => StreamMethod::Beta,
        Some("msq") => StreamMethod::Msq,
        Some(other) => return Err(parse_err(1, format!("unknown method '{other}'"))),
    };
    let q = read_samples(text)?;
    if q.len() != total {
        return Err(Error::LengthMismatch {
            expected: total,
            found: q.len(),
        });
    }
    Ok(StreamFile { config, method, q })
}
