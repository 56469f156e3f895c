//! Local frames for the multipartite density witness.
//!
//! The witness compares coherence between two complementary basis strings
//! with the population outside them. Applying local unitaries first changes
//! which pair of strings is compared; bit flips are the default family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, DensityMatrix};

/// Bit-flip patterns are enumerated only up to this many qubits.
pub const BITFLIP_MAX_QUBITS: usize = 6;

/// One local unitary per qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFrame {
    pub name: String,
    pub unitaries: Vec<CMatrix>,
}

impl LocalFrame {
    pub fn new(name: impl Into<String>, unitaries: Vec<CMatrix>) -> Result<Self> {
        for (i, u) in unitaries.iter().enumerate() {
            if u.shape() != (2, 2) {
                return Err(Error::param(format!("frame.{i}"), "local unitary must be 2x2"));
            }
            let dev = (u.adjoint() * u - CMatrix::identity(2, 2))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if dev > 1e-9 {
                return Err(Error::param(format!("frame.{i}"), "matrix is not unitary"));
            }
        }
        Ok(LocalFrame {
            name: name.into(),
            unitaries,
        })
    }

    pub fn full_unitary(&self) -> CMatrix {
        self.unitaries
            .iter()
            .fold(CMatrix::identity(1, 1), |acc, u| acc.kronecker(u))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameFamily {
    Identity,
    BitFlips,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSet {
    pub family: FrameFamily,
    pub custom: Vec<LocalFrame>,
}

impl Default for FrameSet {
    fn default() -> Self {
        FrameSet {
            family: FrameFamily::BitFlips,
            custom: Vec::new(),
        }
    }
}

impl FrameSet {
    pub fn identity() -> Self {
        FrameSet {
            family: FrameFamily::Identity,
            custom: Vec::new(),
        }
    }
}

/// `4|ρ_{a;b}|² − (1 − ρ_{a;a} − ρ_{b;b})²` for complementary strings `a`, `b`
/// of an n-qubit state given as a matrix.
pub fn density_witness_at(m: &CMatrix, n: usize, a: usize) -> f64 {
    let full = (1usize << n) - 1;
    let b = a ^ full;
    let c = m[(a, b)].norm_sqr();
    let s = 1.0 - m[(a, a)].re - m[(b, b)].re;
    4.0 * c - s * s
}

fn mask_label(mask: usize, n: usize) -> String {
    (0..n)
        .map(|i| if mask >> (n - 1 - i) & 1 == 1 { 'X' } else { 'I' })
        .collect()
}

/// Largest density-witness value over the frame set, with the frame's name.
pub fn best_density_witness(rho: &DensityMatrix, frames: &FrameSet) -> Result<(f64, String)> {
    if !rho.dims().all_qubits() {
        return Err(Error::InvalidDims("density witness needs qubits".into()));
    }
    let n = rho.dims().len();
    let masks: usize = match frames.family {
        FrameFamily::BitFlips if n <= BITFLIP_MAX_QUBITS => 1 << (n - 1),
        _ => 1,
    };
    let mut best = (f64::NEG_INFINITY, String::new());
    for mask in 0..masks {
        let v = density_witness_at(rho.mat(), n, mask);
        if v > best.0 {
            best = (v, mask_label(mask, n));
        }
    }
    for f in &frames.custom {
        if f.unitaries.len() != n {
            return Err(Error::param(
                format!("frame {}", f.name),
                format!("{} unitaries for {n} qubits", f.unitaries.len()),
            ));
        }
        let r = rho.conjugate(&f.full_unitary())?;
        let v = density_witness_at(r.mat(), n, 0);
        if v > best.0 {
            best = (v, f.name.clone());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ghz, w_state, GhzParams};
    use crate::tensor::{partial_trace, pauli};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ghz_fires_in_identity_frame() {
        let g = ghz(&GhzParams::qubit(3, std::f64::consts::FRAC_PI_4)).unwrap();
        let (v, name) = best_density_witness(&g.projector(), &FrameSet::identity()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        assert_eq!(name, "III");
    }

    #[test]
    fn w_reduction_needs_a_flip() {
        let s = 1.0 / 3f64.sqrt();
        let r = partial_trace(&w_state(s, s, s).unwrap().projector(), &[2]).unwrap();
        let (id, _) = best_density_witness(&r, &FrameSet::identity()).unwrap();
        assert!(id < 0.0);
        let (v, name) = best_density_witness(&r, &FrameSet::default()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(name, "IX");
    }

    #[test]
    fn custom_frame_matches_flip() {
        let s = 1.0 / 3f64.sqrt();
        let r = partial_trace(&w_state(s, s, s).unwrap().projector(), &[2]).unwrap();
        let f = LocalFrame::new("flip2", vec![pauli::id(), pauli::x()]).unwrap();
        let set = FrameSet {
            family: FrameFamily::Identity,
            custom: vec![f],
        };
        let (v, name) = best_density_witness(&r, &set).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(name, "flip2");
        assert!(LocalFrame::new("bad", vec![pauli::x() * crate::tensor::C64::from(2.0)]).is_err());
    }
}
