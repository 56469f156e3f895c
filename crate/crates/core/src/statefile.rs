//! State files: one JSON header line followed by the amplitudes (pure) or
//! the row-major matrix entries (density) as complex pairs.
//!
//! The binary form stores little-endian `f64` pairs `(re, im)`. The CSV form
//! starts its header line with `# ` and writes one `re,im` pair per line.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channels::Ownership;
use crate::error::{Error, Result};
use crate::schema::PartySpec;
use crate::tensor::{CMatrix, DensityMatrix, Dims, PureState, QuantumState, C64};

pub const FORMAT_TAG: &str = "entloss-state";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateHeader {
    pub format: String,
    pub kind: StateKind,
    pub dims: Vec<usize>,
    pub parties: Vec<PartySpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Bin,
    Csv,
}

fn header(state: &QuantumState, own: &Ownership) -> StateHeader {
    StateHeader {
        format: FORMAT_TAG.into(),
        kind: match state {
            QuantumState::Pure(_) => StateKind::Pure,
            QuantumState::Mixed(_) => StateKind::Density,
        },
        dims: state.dims().as_slice().to_vec(),
        parties: own
            .names
            .iter()
            .zip(&own.particles)
            .map(|(n, p)| PartySpec {
                name: n.clone(),
                particles: p.clone(),
            })
            .collect(),
    }
}

fn entries(state: &QuantumState) -> Vec<C64> {
    match state {
        QuantumState::Pure(p) => p.amps().to_vec(),
        QuantumState::Mixed(m) => {
            let mat = m.mat();
            let d = m.dim();
            (0..d * d).map(|i| mat[(i / d, i % d)]).collect()
        }
    }
}

pub fn write_state<W: Write>(out: &mut W, state: &QuantumState, own: &Ownership, enc: Encoding) -> Result<()> {
    let head = serde_json::to_string(&header(state, own))?;
    match enc {
        Encoding::Bin => {
            writeln!(out, "{head}")?;
            for z in entries(state) {
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        Encoding::Csv => {
            writeln!(out, "# {head}")?;
            for z in entries(state) {
                writeln!(out, "{},{}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

pub fn state_to_bytes(state: &QuantumState, own: &Ownership, enc: Encoding) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_state(&mut buf, state, own, enc)?;
    Ok(buf)
}

/// Reads either encoding; the first byte tells them apart.
pub fn read_state(bytes: &[u8]) -> Result<(QuantumState, Ownership)> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::StateFile("missing header line".into()))?;
    let line = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::StateFile("header is not UTF-8".into()))?;
    let (csv, json) = match line.strip_prefix("# ") {
        Some(rest) => (true, rest),
        None => (false, line),
    };
    let head: StateHeader = serde_json::from_str(json)?;
    if head.format != FORMAT_TAG {
        return Err(Error::StateFile(format!("unknown format tag {}", head.format)));
    }
    let dims = Dims::new(head.dims.clone())?;
    let d = dims.total();
    let count = match head.kind {
        StateKind::Pure => d,
        StateKind::Density => d * d,
    };
    let body = &bytes[nl + 1..];
    let values: Vec<C64> = if csv {
        let text = std::str::from_utf8(body).map_err(|_| Error::StateFile("body is not UTF-8".into()))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                let (re, im) = l
                    .split_once(',')
                    .ok_or_else(|| Error::StateFile(format!("line {}: expected re,im", i + 2)))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::StateFile(format!("line {}: bad number {s}", i + 2)))
                };
                Ok(C64::new(parse(re)?, parse(im)?))
            })
            .collect::<Result<_>>()?
    } else {
        if body.len() != count * 16 {
            return Err(Error::StateFile(format!(
                "expected {} bytes of data, found {}",
                count * 16,
                body.len()
            )));
        }
        body.chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                C64::new(re, im)
            })
            .collect()
    };
    if values.len() != count {
        return Err(Error::StateFile(format!("expected {count} entries, found {}", values.len())));
    }
    let state = match head.kind {
        StateKind::Pure => QuantumState::Pure(PureState::new(values, dims.clone())?),
        StateKind::Density => {
            let mat = CMatrix::from_row_slice(d, d, &values);
            QuantumState::Mixed(DensityMatrix::new(mat, dims.clone())?)
        }
    };
    let own = if head.parties.is_empty() {
        Ownership::singletons(dims.len())
    } else {
        Ownership::new(
            head.parties.iter().map(|p| p.name.clone()).collect(),
            head.parties.iter().map(|p| p.particles.clone()).collect(),
        )?
    };
    own.check_dims(&dims)?;
    Ok((state, own))
}
