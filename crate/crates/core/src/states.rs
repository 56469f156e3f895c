//! Constructors for the named state families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, DensityMatrix, Dims, PureState, C64, ZERO};

/// Tolerance on user-supplied normalizations before exact rescaling.
pub const INPUT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzParams {
    pub n: usize,
    pub d: usize,
    pub amplitudes: Vec<f64>,
}

impl GhzParams {
    /// `cos θ|0…0⟩ + sin θ|1…1⟩`.
    pub fn qubit(n: usize, theta: f64) -> Self {
        GhzParams {
            n,
            d: 2,
            amplitudes: vec![theta.cos(), theta.sin()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DickeCoeffs {
    Uniform,
    /// Composition (j₁,…,jₙ) → amplitude. Must list every composition.
    Explicit(BTreeMap<Vec<usize>, f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub coeffs: DickeCoeffs,
}

impl DickeParams {
    pub fn uniform(n: usize, d: usize, k: usize) -> Self {
        DickeParams {
            n,
            d,
            k,
            coeffs: DickeCoeffs::Uniform,
        }
    }
}

fn check_norm(field: &str, sq: f64) -> Result<()> {
    if (sq - 1.0).abs() > INPUT_NORM_TOL {
        return Err(Error::param(
            field,
            format!("squared amplitudes sum to {sq}, expected 1"),
        ));
    }
    Ok(())
}

pub fn ghz(p: &GhzParams) -> Result<PureState> {
    if p.n < 2 {
        return Err(Error::param("n", "need at least 2 particles"));
    }
    if p.d < 2 {
        return Err(Error::param("d", "local dimension must be at least 2"));
    }
    if p.amplitudes.len() != p.d {
        return Err(Error::param(
            "amplitudes",
            format!("{} amplitudes for d = {}", p.amplitudes.len(), p.d),
        ));
    }
    check_norm("amplitudes", p.amplitudes.iter().map(|a| a * a).sum())?;
    let dims = Dims::new(vec![p.d; p.n])?;
    let repunit: usize = (0..p.n).fold(0, |acc, _| acc * p.d + 1);
    let mut amps = vec![ZERO; dims.total()];
    for (j, &a) in p.amplitudes.iter().enumerate() {
        amps[j * repunit] = C64::from(a);
    }
    PureState::normalized(amps, dims)
}

/// Number of strings in {0,…,d−1}ⁿ with digit sum `k`.
pub fn composition_count(n: usize, d: usize, k: usize) -> u128 {
    let mut ways = vec![0u128; k + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; k + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for j in 0..d.min(k - s + 1) {
                next[s + j] += w;
            }
        }
        ways = next;
    }
    ways[k]
}

/// Basis indices (big-endian, ascending) whose digits sum to `k`.
pub fn compositions(n: usize, d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, left: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let n = cur.len();
        if i == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if left > (n - i) * (d - 1) {
            return;
        }
        for j in 0..d.min(left + 1) {
            cur[i] = j;
            rec(i + 1, left - j, d, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, k, d, &mut cur, &mut out);
    out
}

fn uniform_dicke_amps(n: usize, d: usize, k: usize) -> Result<Vec<C64>> {
    let dims = Dims::new(vec![d; n])?;
    let count = composition_count(n, d, k);
    let amp = C64::from(1.0 / (count as f64).sqrt());
    let mut amps = vec![ZERO; dims.total()];
    for c in compositions(n, d, k) {
        amps[dims.index(&c)] = amp;
    }
    Ok(amps)
}

pub fn dicke(p: &DickeParams) -> Result<PureState> {
    if p.n < 2 {
        return Err(Error::param("n", "need at least 2 particles"));
    }
    if p.d < 2 {
        return Err(Error::param("d", "local dimension must be at least 2"));
    }
    let kmax = p.n * (p.d - 1);
    if p.k < 1 || p.k > kmax {
        return Err(Error::param(
            "k",
            format!("excitation number {} outside 1..={kmax}", p.k),
        ));
    }
    let dims = Dims::new(vec![p.d; p.n])?;
    match &p.coeffs {
        DickeCoeffs::Uniform => PureState::new(uniform_dicke_amps(p.n, p.d, p.k)?, dims),
        DickeCoeffs::Explicit(map) => {
            let support = compositions(p.n, p.d, p.k);
            for key in map.keys() {
                let valid = key.len() == p.n
                    && key.iter().all(|&j| j < p.d)
                    && key.iter().sum::<usize>() == p.k;
                if !valid {
                    return Err(Error::param(
                        "coeffs",
                        format!("{key:?} is not a composition of {} into {} digits below {}", p.k, p.n, p.d),
                    ));
                }
            }
            let mut amps = vec![ZERO; dims.total()];
            for c in &support {
                let a = *map.get(c).ok_or_else(|| {
                    Error::param("coeffs", format!("missing coefficient for {c:?}"))
                })?;
                if a == 0.0 || !a.is_finite() {
                    return Err(Error::param(
                        "coeffs",
                        format!("coefficient for {c:?} must be nonzero and finite"),
                    ));
                }
                amps[dims.index(c)] = C64::from(a);
            }
            PureState::normalized(amps, dims)
        }
    }
}

/// `Σ β_k |D_k⟩`; supports of distinct excitation numbers are disjoint.
pub fn dicke_superposition(betas: &[f64], parts: &[DickeParams]) -> Result<PureState> {
    if betas.len() != parts.len() || parts.is_empty() {
        return Err(Error::param("betas", "need one weight per Dicke component"));
    }
    check_norm("betas", betas.iter().map(|b| b * b).sum())?;
    let (n, d) = (parts[0].n, parts[0].d);
    let mut ks: Vec<usize> = Vec::new();
    for p in parts {
        if p.n != n || p.d != d {
            return Err(Error::param("parts", "components must share n and d"));
        }
        if ks.contains(&p.k) {
            return Err(Error::param("parts", format!("duplicate excitation number {}", p.k)));
        }
        ks.push(p.k);
    }
    let dims = Dims::new(vec![d; n])?;
    let mut amps = vec![ZERO; dims.total()];
    for (b, p) in betas.iter().zip(parts) {
        let comp = dicke(p)?;
        for (a, c) in amps.iter_mut().zip(comp.amps()) {
            *a += c * b;
        }
    }
    PureState::normalized(amps, dims)
}

/// `α|001⟩ + β|010⟩ + γ|100⟩`.
pub fn w_state(alpha: f64, beta: f64, gamma: f64) -> Result<PureState> {
    check_norm("alpha,beta,gamma", alpha * alpha + beta * beta + gamma * gamma)?;
    let mut amps = vec![ZERO; 8];
    amps[0b001] = C64::from(alpha);
    amps[0b010] = C64::from(beta);
    amps[0b100] = C64::from(gamma);
    PureState::normalized(amps, Dims::qubits(3))
}

/// W state on the octant parameterization `α=sinθcosφ, β=sinθsinφ, γ=cosθ`.
pub fn w_angles(theta: f64, phi: f64) -> (f64, f64, f64) {
    (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// `Σ_j s_j |jj⟩` with at least two nonzero Schmidt coefficients.
pub fn bipartite_pure(schmidt: &[f64]) -> Result<PureState> {
    let d = schmidt.len();
    if d < 2 {
        return Err(Error::param("schmidt", "need at least two coefficients"));
    }
    check_norm("schmidt", schmidt.iter().map(|s| s * s).sum())?;
    let nonzero = schmidt.iter().filter(|s| s.abs() > 1e-12).count();
    if nonzero < 2 {
        return Err(Error::param(
            "schmidt",
            "an entangled source needs at least two nonzero Schmidt coefficients",
        ));
    }
    let mut amps = vec![ZERO; d * d];
    for (j, &s) in schmidt.iter().enumerate() {
        amps[j * d + j] = C64::from(s);
    }
    PureState::normalized(amps, Dims::new(vec![d, d])?)
}

/// `v|ψ⟩⟨ψ| + (1−v)/D · 𝟙`.
pub fn noisy_mix(psi: &PureState, v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::param("v", format!("visibility {v} outside [0,1]")));
    }
    let d = psi.dims().total();
    let proj = psi.projector();
    let mat = proj.mat() * C64::from(v) + CMatrix::identity(d, d) * C64::from((1.0 - v) / d as f64);
    Ok(DensityMatrix::unchecked(mat, psi.dims().clone()))
}

/// Parses a basis label: one digit per subsystem, or comma-separated digits.
pub fn parse_label(label: &str, dims: &Dims) -> Result<usize> {
    let digits: Vec<usize> = if label.contains(',') {
        label
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::schema(label, format!("`{s}` is not a digit")))
            })
            .collect::<Result<_>>()?
    } else {
        label
            .chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|v| v as usize)
                    .ok_or_else(|| Error::schema(label, format!("`{ch}` is not a digit")))
            })
            .collect::<Result<_>>()?
    };
    if digits.len() != dims.len() {
        return Err(Error::schema(
            label,
            format!("{} digits for {} subsystems", digits.len(), dims.len()),
        ));
    }
    for (i, (&x, &d)) in digits.iter().zip(dims.as_slice()).enumerate() {
        if x >= d {
            return Err(Error::schema(
                label,
                format!("digit {x} out of range for subsystem {i} of dimension {d}"),
            ));
        }
    }
    Ok(dims.index(&digits))
}

/// Inverse of [`parse_label`].
pub fn basis_label(dims: &Dims, index: usize) -> String {
    let digits = dims.digits(index);
    if dims.as_slice().iter().any(|&d| d > 10) {
        digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    } else {
        digits.iter().map(|d| d.to_string()).collect()
    }
}

pub fn from_amplitudes(dims: Dims, amps: &BTreeMap<String, C64>) -> Result<PureState> {
    let mut v = vec![ZERO; dims.total()];
    for (label, &a) in amps {
        let idx = parse_label(label, &dims)?;
        v[idx] += a;
    }
    let sq: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    if (sq - 1.0).abs() > INPUT_NORM_TOL {
        return Err(Error::NotNormalized(sq));
    }
    PureState::normalized(v, dims)
}

/// Nonzero amplitudes keyed by basis label.
pub fn to_amplitudes(psi: &PureState) -> BTreeMap<String, C64> {
    psi.amps()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(i, &a)| (basis_label(psi.dims(), i), a))
        .collect()
}

/// Common local dimension, if every subsystem has the same one.
pub fn uniform_local_dim(dims: &Dims) -> Option<usize> {
    let d = dims.as_slice()[0];
    dims.as_slice().iter().all(|&x| x == d).then_some(d)
}

/// Overlaps `⟨D_k|ψ⟩` with the uniform Dicke states for k = 0..=n(d−1).
pub fn dicke_overlaps(psi: &PureState) -> Result<Vec<C64>> {
    let d = uniform_local_dim(psi.dims())
        .ok_or_else(|| Error::InvalidDims("Dicke basis needs equal local dimensions".into()))?;
    let n = psi.dims().len();
    (0..=n * (d - 1))
        .map(|k| {
            let basis = uniform_dicke_amps(n, d, k)?;
            Ok(basis
                .iter()
                .zip(psi.amps())
                .map(|(b, a)| b.conj() * a)
                .sum())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn nonzero(psi: &PureState) -> Vec<(String, f64)> {
        to_amplitudes(psi)
            .into_iter()
            .map(|(k, a)| (k, a.re))
            .collect()
    }

    #[test]
    fn ghz_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = ghz(&GhzParams { n: 3, d: 2, amplitudes: vec![s, s] }).unwrap();
        let nz = nonzero(&g);
        assert_eq!(nz.len(), 2);
        assert_eq!(nz[0].0, "000");
        assert_eq!(nz[1].0, "111");
        assert_abs_diff_eq!(nz[0].1, s, epsilon = 1e-15);
        let p = ghz(&GhzParams { n: 2, d: 2, amplitudes: vec![1.0, 0.0] }).unwrap();
        assert_eq!(nonzero(&p), vec![("00".to_string(), 1.0)]);
        let (a, b, c) = (0.6, 0.0, 0.8);
        let q = ghz(&GhzParams { n: 2, d: 3, amplitudes: vec![a, b, c] }).unwrap();
        assert_eq!(q.amps()[0].re, a);
        assert_eq!(q.amps()[8].re, c);
        assert!(ghz(&GhzParams { n: 3, d: 2, amplitudes: vec![1.0, 1.0] }).is_err());
        assert!(ghz(&GhzParams { n: 1, d: 2, amplitudes: vec![1.0, 0.0] }).is_err());
    }

    #[test]
    fn dicke_examples() {
        let w = dicke(&DickeParams::uniform(3, 2, 1)).unwrap();
        let nz = nonzero(&w);
        let keys: Vec<&str> = nz.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, vec!["001", "010", "100"]);
        for (_, a) in &nz {
            assert_abs_diff_eq!(*a, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        }
        let mut map = BTreeMap::new();
        map.insert(vec![0, 1], 0.6);
        map.insert(vec![1, 0], 0.8);
        let e = dicke(&DickeParams { n: 2, d: 2, k: 1, coeffs: DickeCoeffs::Explicit(map) }).unwrap();
        assert_eq!(nonzero(&e), vec![("01".into(), 0.6), ("10".into(), 0.8)]);
        let q = dicke(&DickeParams::uniform(2, 3, 2)).unwrap();
        let keys: Vec<String> = nonzero(&q).into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, vec!["02", "11", "20"]);
    }

    #[test]
    fn dicke_rejects_bad_params() {
        assert!(dicke(&DickeParams::uniform(3, 2, 0)).is_err());
        assert!(dicke(&DickeParams::uniform(3, 2, 4)).is_err());
        let mut map = BTreeMap::new();
        map.insert(vec![0, 1], 0.0);
        map.insert(vec![1, 0], 1.0);
        assert!(dicke(&DickeParams { n: 2, d: 2, k: 1, coeffs: DickeCoeffs::Explicit(map.clone()) }).is_err());
        map.remove(&vec![0, 1]);
        assert!(dicke(&DickeParams { n: 2, d: 2, k: 1, coeffs: DickeCoeffs::Explicit(map.clone()) }).is_err());
        map.insert(vec![1, 1], 1.0);
        assert!(dicke(&DickeParams { n: 2, d: 2, k: 1, coeffs: DickeCoeffs::Explicit(map) }).is_err());
    }

    #[test]
    fn composition_count_is_exact() {
        assert_eq!(composition_count(3, 2, 1), 3);
        assert_eq!(composition_count(2, 3, 2), 3);
        assert_eq!(composition_count(4, 3, 3), 16);
        for n in 1..6 {
            for d in 2..5 {
                for k in 0..=n * (d - 1) {
                    assert_eq!(composition_count(n, d, k), compositions(n, d, k).len() as u128);
                }
            }
        }
    }

    #[test]
    fn superposition_examples() {
        let w = dicke_superposition(&[1.0], &[DickeParams::uniform(3, 2, 1)]).unwrap();
        assert_eq!(w, dicke(&DickeParams::uniform(3, 2, 1)).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = dicke_superposition(
            &[s, s],
            &[DickeParams::uniform(2, 2, 1), DickeParams::uniform(2, 2, 2)],
        )
        .unwrap();
        let a: Vec<f64> = p.amps().iter().map(|z| z.re).collect();
        for (x, y) in a.iter().zip([0.0, 0.5, 0.5, s]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
        assert!(dicke_superposition(
            &[s, s],
            &[DickeParams::uniform(2, 2, 1), DickeParams::uniform(2, 2, 1)]
        )
        .is_err());
    }

    #[test]
    fn product_state_dicke_overlaps() {
        let plus = PureState::normalized(vec![C64::from(1.0); 4], Dims::qubits(2)).unwrap();
        let ov = dicke_overlaps(&plus).unwrap();
        let expect = [0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5];
        for (o, e) in ov.iter().zip(expect) {
            assert_abs_diff_eq!(o.re, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn w_examples() {
        let s = 1.0 / 3f64.sqrt();
        let w = w_state(s, s, s).unwrap();
        assert_eq!(w, dicke(&DickeParams::uniform(3, 2, 1)).unwrap());
        let c = w_state(1.0, 0.0, 0.0).unwrap();
        assert_eq!(nonzero(&c), vec![("001".into(), 1.0)]);
        let (a, b, g) = w_angles(0.7, 0.3);
        assert_abs_diff_eq!(a * a + b * b + g * g, 1.0, epsilon = 1e-15);
        assert!(w_state(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bipartite_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let epr = bipartite_pure(&[s, s]).unwrap();
        assert_eq!(nonzero(&epr).len(), 2);
        let t: f64 = 0.3;
        let tilt = bipartite_pure(&[t.cos(), t.sin()]).unwrap();
        assert_abs_diff_eq!(tilt.amps()[3].re, t.sin(), epsilon = 1e-15);
        assert!(bipartite_pure(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn noisy_mix_spectrum() {
        let s = 1.0 / 3f64.sqrt();
        let w = w_state(s, s, s).unwrap();
        let rho = noisy_mix(&w, 0.5).unwrap();
        let ev = crate::tensor::eigenvalues(rho.mat()).unwrap();
        assert_abs_diff_eq!(ev[7], 0.5625, epsilon = 1e-12);
        for e in &ev[..7] {
            assert_abs_diff_eq!(*e, 0.0625, epsilon = 1e-12);
        }
        assert_eq!(noisy_mix(&w, 1.0).unwrap().mat(), w.projector().mat());
        assert!(noisy_mix(&w, 1.5).is_err());
    }

    #[test]
    fn literal_fixtures() {
        let mut m = BTreeMap::new();
        for l in ["000", "011", "120", "131"] {
            m.insert(l.to_string(), C64::from(0.5));
        }
        let phi = from_amplitudes(Dims::new(vec![2, 4, 2]).unwrap(), &m).unwrap();
        assert_eq!(to_amplitudes(&phi), m);
        let mut bad = BTreeMap::new();
        bad.insert("040".to_string(), C64::from(1.0));
        assert!(from_amplitudes(Dims::new(vec![2, 4, 2]).unwrap(), &bad).is_err());
        let mut un = BTreeMap::new();
        un.insert("00".to_string(), C64::from(0.5));
        assert!(from_amplitudes(Dims::qubits(2), &un).is_err());
        let big = Dims::new(vec![12, 2]).unwrap();
        assert_eq!(parse_label("11,1", &big).unwrap(), 23);
        assert_eq!(basis_label(&big, 23), "11,1");
    }
}
