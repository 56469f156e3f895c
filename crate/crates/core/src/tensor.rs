//! Dense complex linear algebra over multipartite Hilbert spaces.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{HERMITIAN_TOL, PSD_SLACK, PURITY_TOL, TRACE_TOL};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Local dimension of each subsystem, most significant first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Dims(Vec<usize>);

impl TryFrom<Vec<usize>> for Dims {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Dims::new(v)
    }
}

impl From<Dims> for Vec<usize> {
    fn from(d: Dims) -> Self {
        d.0
    }
}

impl Dims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("no subsystems".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d < 2) {
            return Err(Error::InvalidDims(format!(
                "subsystem {pos} has dimension {}, need at least 2",
                dims[pos]
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidDims("ambient dimension overflows".into()))?;
        Ok(Dims(dims))
    }

    pub fn qubits(n: usize) -> Self {
        Dims(vec![2; n])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn all_qubits(&self) -> bool {
        self.0.iter().all(|&d| d == 2)
    }

    /// Place value of each subsystem's digit in a basis index.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.0.len()];
        for i in (0..self.0.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.0[i + 1];
        }
        s
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for i in (0..self.0.len()).rev() {
            out[i] = index % self.0[i];
            index /= self.0[i];
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// Dims of the listed subsystems, in the listed order.
    pub fn select(&self, subsys: &[usize]) -> Result<Dims> {
        Dims::new(subsys.iter().map(|&i| self.0[i]).collect())
    }

    /// Offset contribution of every joint basis state of `subsys`, enumerated
    /// big-endian in the order given.
    pub fn offsets(&self, subsys: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &s in subsys {
            let mut next = Vec::with_capacity(out.len() * self.0[s]);
            for &o in &out {
                for d in 0..self.0[s] {
                    next.push(o + d * strides[s]);
                }
            }
            out = next;
        }
        out
    }

    /// Sorted complement of `subsys`.
    pub fn complement(&self, subsys: &[usize]) -> Vec<usize> {
        (0..self.0.len()).filter(|i| !subsys.contains(i)).collect()
    }

    fn check_subset(&self, subsys: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.0.len()];
        for &s in subsys {
            if s >= self.0.len() {
                return Err(Error::InvalidSubsystems(format!(
                    "index {s} out of range for {} subsystems",
                    self.0.len()
                )));
            }
            if seen[s] {
                return Err(Error::InvalidSubsystems(format!("index {s} repeated")));
            }
            seen[s] = true;
        }
        Ok(())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Normalized amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
    dims: Dims,
}

impl PureState {
    pub fn new(amps: Vec<C64>, dims: Dims) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims} (need {})",
                amps.len(),
                dims.total()
            )));
        }
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(PureState { amps, dims })
    }

    /// Rescales to unit norm; fails only on the zero vector.
    pub fn normalized(mut amps: Vec<C64>, dims: Dims) -> Result<Self> {
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::NotNormalized(n2));
        }
        let s = 1.0 / n2.sqrt();
        for a in &mut amps {
            *a *= s;
        }
        PureState::new(amps, dims)
    }

    pub fn basis(dims: Dims, index: usize) -> Result<Self> {
        let mut amps = vec![ZERO; dims.total()];
        if index >= amps.len() {
            return Err(Error::param("index", "basis index out of range"));
        }
        amps[index] = ONE;
        PureState::new(amps, dims)
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn into_parts(self) -> (Vec<C64>, Dims) {
        (self.amps, self.dims)
    }

    pub fn projector(&self) -> DensityMatrix {
        let v = DVector::from_column_slice(&self.amps);
        DensityMatrix::unchecked(&v * v.adjoint(), self.dims.clone())
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn kron(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.0.clone();
        dims.extend_from_slice(&other.dims.0);
        PureState {
            amps,
            dims: Dims(dims),
        }
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<PureState> {
        check_perm(perm, self.dims.len())?;
        let new_dims = self.dims.select(perm)?;
        let old_offsets = self.dims.offsets(perm);
        let amps = old_offsets.iter().map(|&o| self.amps[o]).collect();
        Ok(PureState {
            amps,
            dims: new_dims,
        })
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: Dims,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix, dims: Dims) -> Result<Self> {
        check_square(&mat, &dims)?;
        let dev = hermitian_deviation(&mat);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Trace(tr.re));
        }
        let min = min_eigenvalue(&mat)?;
        if min < -PSD_SLACK {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix { mat, dims })
    }

    /// Skips validation; callers guarantee the invariants hold. The matrix is
    /// symmetrized to remove rounding asymmetry.
    pub(crate) fn unchecked(mat: CMatrix, dims: Dims) -> Self {
        debug_assert_eq!(mat.nrows(), dims.total());
        let mat = hermitize(&mat);
        DensityMatrix { mat, dims }
    }

    pub fn maximally_mixed(dims: Dims) -> Self {
        let d = dims.total();
        let mat = CMatrix::identity(d, d) * C64::from(1.0 / d as f64);
        DensityMatrix { mat, dims }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn into_parts(self) -> (CMatrix, Dims) {
        (self.mat, self.dims)
    }

    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sum of absolute values of off-diagonal entries.
    pub fn off_diagonal_mass(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for c in 0..d {
            for r in 0..d {
                if r != c {
                    s += self.mat[(r, c)].norm();
                }
            }
        }
        s
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.0.clone();
        dims.extend_from_slice(&other.dims.0);
        DensityMatrix {
            mat: self.mat.kronecker(&other.mat),
            dims: Dims(dims),
        }
    }

    /// Convex combination `p·self + (1−p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "mixing {} with {}",
                self.dims, other.dims
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", "mixing weight outside [0,1]"));
        }
        let mat = &self.mat * C64::from(p) + &other.mat * C64::from(1.0 - p);
        Ok(DensityMatrix::unchecked(mat, self.dims.clone()))
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<DensityMatrix> {
        check_perm(perm, self.dims.len())?;
        let new_dims = self.dims.select(perm)?;
        let offs = self.dims.offsets(perm);
        let d = offs.len();
        let mat = CMatrix::from_fn(d, d, |r, c| self.mat[(offs[r], offs[c])]);
        Ok(DensityMatrix {
            mat,
            dims: new_dims,
        })
    }

    /// Conjugates by a unitary acting on the whole space.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("unitary size".into()));
        }
        Ok(DensityMatrix::unchecked(
            u * &self.mat * u.adjoint(),
            self.dims.clone(),
        ))
    }
}

/// Either representation; pure inputs keep cheap reductions for large spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dims(&self) -> &Dims {
        match self {
            QuantumState::Pure(p) => p.dims(),
            QuantumState::Mixed(m) => m.dims(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(p) => p.projector(),
            QuantumState::Mixed(m) => m.clone(),
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            QuantumState::Pure(_) => 1.0,
            QuantumState::Mixed(m) => m.purity(),
        }
    }

    pub fn is_pure(&self) -> bool {
        self.purity() >= 1.0 - PURITY_TOL
    }

    /// Trace over `subsys`; pure states go through the amplitude Gram matrix.
    pub fn partial_trace(&self, subsys: &[usize]) -> Result<DensityMatrix> {
        match self {
            QuantumState::Pure(p) => partial_trace_pure(p, subsys),
            QuantumState::Mixed(m) => partial_trace(m, subsys),
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(m: DensityMatrix) -> Self {
        QuantumState::Mixed(m)
    }
}

/// Split of subsystem indices into two nonempty complementary sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut left: Vec<usize>, n: usize) -> Result<Self> {
        left.sort_unstable();
        left.dedup();
        if left.is_empty() || left.len() >= n {
            return Err(Error::InvalidBipartition(format!(
                "left side {left:?} must be a nonempty strict subset of {n} subsystems"
            )));
        }
        if let Some(&bad) = left.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidBipartition(format!(
                "index {bad} out of range for {n} subsystems"
            )));
        }
        let right = (0..n).filter(|i| !left.contains(i)).collect();
        Ok(Bipartition { left, right })
    }

    /// Every bipartition of `n` subsystems once, with subsystem 0 on the left.
    pub fn all(n: usize) -> Vec<Bipartition> {
        if n < 2 {
            return Vec::new();
        }
        let full = (1usize << n) - 1;
        (1..full)
            .filter(|m| m & 1 == 1)
            .map(|m| {
                let left = (0..n).filter(|i| m >> i & 1 == 1).collect();
                let right = (0..n).filter(|i| m >> i & 1 == 0).collect();
                Bipartition { left, right }
            })
            .collect()
    }

    /// Lifts a cut between groups to a cut between their members.
    pub fn expand(&self, groups: &[Vec<usize>]) -> Bipartition {
        let mut left: Vec<usize> = self.left.iter().flat_map(|&g| groups[g].clone()).collect();
        let mut right: Vec<usize> = self.right.iter().flat_map(|&g| groups[g].clone()).collect();
        left.sort_unstable();
        right.sort_unstable();
        Bipartition { left, right }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l: Vec<String> = self.left.iter().map(|i| i.to_string()).collect();
        let r: Vec<String> = self.right.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}|{{{}}}", l.join(","), r.join(","))
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut dev: f64 = 0.0;
    for c in 0..d {
        for r in c..d {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::from(0.5)
}

fn check_square(m: &CMatrix, dims: &Dims) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for dims {dims}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_perm(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidSubsystems(format!(
            "permutation of length {} for {n} subsystems",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidSubsystems(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

fn trace_split(dims: &Dims, subsys: &[usize]) -> Result<(Vec<usize>, Vec<usize>, Dims)> {
    dims.check_subset(subsys)?;
    if subsys.len() == dims.len() {
        return Err(Error::EmptyRemainder);
    }
    let mut traced = subsys.to_vec();
    traced.sort_unstable();
    let keep = dims.complement(&traced);
    let keep_dims = dims.select(&keep)?;
    Ok((dims.offsets(&keep), dims.offsets(&traced), keep_dims))
}

/// Traces out `subsys`; survivors keep their original relative order.
pub fn partial_trace(rho: &DensityMatrix, subsys: &[usize]) -> Result<DensityMatrix> {
    let (ko, to, keep_dims) = trace_split(&rho.dims, subsys)?;
    let d = ko.len();
    let m = &rho.mat;
    let mut out = CMatrix::zeros(d, d);
    for b in 0..d {
        for a in 0..d {
            let mut s = ZERO;
            for &t in &to {
                s += m[(ko[a] + t, ko[b] + t)];
            }
            out[(a, b)] = s;
        }
    }
    Ok(DensityMatrix::unchecked(out, keep_dims))
}

/// Reduced state of a pure state, computed as `A·A†` with `A` the amplitude
/// matrix (kept × traced).
pub fn partial_trace_pure(psi: &PureState, subsys: &[usize]) -> Result<DensityMatrix> {
    let (ko, to, keep_dims) = trace_split(&psi.dims, subsys)?;
    let a = CMatrix::from_fn(ko.len(), to.len(), |i, j| psi.amps[ko[i] + to[j]]);
    Ok(DensityMatrix::unchecked(&a * a.adjoint(), keep_dims))
}

/// Transposes the digits of `subsys` in every matrix index.
pub fn partial_transpose_on(m: &CMatrix, dims: &Dims, subsys: &[usize]) -> CMatrix {
    let d = m.nrows();
    let strides = dims.strides();
    let sub: Vec<usize> = (0..d)
        .map(|i| {
            subsys
                .iter()
                .map(|&s| (i / strides[s]) % dims.0[s] * strides[s])
                .sum()
        })
        .collect();
    CMatrix::from_fn(d, d, |r, c| {
        let r2 = r - sub[r] + sub[c];
        let c2 = c - sub[c] + sub[r];
        m[(r2, c2)]
    })
}

/// Partial transpose on the left side of `cut`.
pub fn partial_transpose(rho: &DensityMatrix, cut: &Bipartition) -> Result<CMatrix> {
    let n = rho.dims.len();
    if cut.left.iter().chain(&cut.right).any(|&i| i >= n) || cut.left.len() + cut.right.len() != n
    {
        return Err(Error::InvalidBipartition(format!(
            "cut {cut} does not match {n} subsystems"
        )));
    }
    Ok(partial_transpose_on(&rho.mat, &rho.dims, &cut.left))
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    let dev = hermitian_deviation(h);
    if dev > 1e-9 * h.nrows().max(1) as f64 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Cheap consistency test of a spectrum against `Tr H` and `‖H‖_F²`.
fn spectrum_plausible(h: &CMatrix, vals: &[f64]) -> bool {
    if vals.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let fro2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    let scale = fro2.sqrt().max(1.0) * h.nrows() as f64;
    let tr: f64 = (0..h.nrows()).map(|i| h[(i, i)].re).sum();
    let s1: f64 = vals.iter().sum();
    let s2: f64 = vals.iter().map(|v| v * v).sum();
    (s1 - tr).abs() <= 1e-10 * scale && (s2 - fro2).abs() <= 1e-10 * scale * fro2.sqrt().max(1.0)
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Slow but dependable;
/// used when the QR-based solver returns an implausible spectrum.
fn jacobi_eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = h.nrows();
    let mut a = h.clone();
    let mut v = CMatrix::identity(d, d);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = b / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U restricted to (p, q) is [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                let u00 = C64::from(c);
                let u01 = C64::from(s);
                let u10 = -phase.conj() * s;
                let u11 = phase.conj() * c;
                for k in 0..d {
                    let (kp, kq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = kp * u00 + kq * u10;
                    a[(k, q)] = kp * u01 + kq * u11;
                }
                for k in 0..d {
                    let (pk, qk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = u00.conj() * pk + u10.conj() * qk;
                    a[(q, k)] = u01.conj() * pk + u11.conj() * qk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::from(a[(p, p)].re);
                a[(q, q)] = C64::from(a[(q, q)].re);
                for k in 0..d {
                    let (kp, kq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = kp * u00 + kq * u10;
                    v[(k, q)] = kp * u01 + kq * u11;
                }
            }
        }
    }
    ((0..d).map(|i| a[(i, i)].re).collect(), v)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn eigh(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(h)?;
    let herm = hermitize(h);
    let eig = herm.clone().symmetric_eigen();
    let (raw_vals, raw_vecs) = if spectrum_plausible(&herm, eig.eigenvalues.as_slice())
        && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    {
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
    } else {
        jacobi_eigh(&herm)
    };
    let mut order: Vec<usize> = (0..raw_vals.len()).collect();
    order.sort_by(|&a, &b| raw_vals[a].total_cmp(&raw_vals[b]));
    let vals = order.iter().map(|&i| raw_vals[i]).collect();
    let vecs = CMatrix::from_fn(h.nrows(), order.len(), |r, c| raw_vecs[(r, order[c])]);
    Ok((vals, vecs))
}

pub fn eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let herm = hermitize(h);
    let mut v: Vec<f64> = herm.clone().symmetric_eigenvalues().iter().copied().collect();
    if !spectrum_plausible(&herm, &v) {
        v = jacobi_eigh(&herm).0;
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn min_eigenvalue(h: &CMatrix) -> Result<f64> {
    if h.nrows() == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    Ok(eigenvalues(h)?[0])
}

/// `Tr(ρ·obs)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrix, obs: &CMatrix) -> Result<f64> {
    let z = trace_product(&rho.mat, obs)?;
    if z.im.abs() > 1e-10 {
        return Err(Error::NotHermitian(z.im.abs()));
    }
    Ok(z.re)
}

/// `Tr(a·b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.nrows() != b.ncols() || a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} against {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut s = ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(s)
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::{CMatrix, C64, ONE, ZERO};

    pub fn id() -> CMatrix {
        CMatrix::identity(2, 2)
    }
    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }
    pub fn y() -> CMatrix {
        let i = C64::new(0.0, 1.0);
        CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
    }
    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn jacobi_agrees_with_known_spectrum() {
        let i = C64::new(0.0, 1.0);
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[c(2.0), i, ZERO, -i, c(2.0), ZERO, ZERO, ZERO, c(5.0)],
        );
        let (vals, vecs) = jacobi_eigh(&h);
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        for (a, b) in sorted.iter().zip([1.0, 3.0, 5.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
        let back = &vecs * CMatrix::from_diagonal(&DVector::from_iterator(3, vals.iter().map(|&v| c(v)))) * vecs.adjoint();
        assert!((back - h).iter().all(|z| z.norm() < 1e-13));
    }

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![c(s), ZERO, ZERO, c(s)], Dims::qubits(2)).unwrap()
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn kron_identities_and_projectors() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
        let p0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let p1 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        let k = kron(&p0, &p1);
        let diag: Vec<f64> = (0..4).map(|i| k[(i, i)].re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 0.0, 0.0]);
        let zz = kron(&pauli::z(), &pauli::z());
        let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn ghz_reduction_is_diagonal() {
        let t: f64 = 0.4;
        let mut amps = vec![ZERO; 8];
        amps[0] = c(t.cos());
        amps[7] = c(t.sin());
        let psi = PureState::new(amps, Dims::qubits(3)).unwrap();
        let r = partial_trace(&psi.projector(), &[0]).unwrap();
        assert_eq!(r.dims().as_slice(), &[2, 2]);
        assert_abs_diff_eq!(r.mat()[(0, 0)].re, t.cos().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(r.mat()[(3, 3)].re, t.sin().powi(2), epsilon = 1e-14);
        assert!(r.off_diagonal_mass() < 1e-14);
        let rp = partial_trace_pure(&psi, &[0]).unwrap();
        assert!(max_diff(r.mat(), rp.mat()) < 1e-14);
    }

    #[test]
    fn w_reduction_matches_closed_form() {
        let (a, b, g) = (0.5f64, 0.6f64, (1.0f64 - 0.25 - 0.36).sqrt());
        let mut amps = vec![ZERO; 8];
        amps[1] = c(a);
        amps[2] = c(b);
        amps[4] = c(g);
        let psi = PureState::new(amps, Dims::qubits(3)).unwrap();
        let r = partial_trace(&psi.projector(), &[2]).unwrap();
        // a²|00><00| + (b|01>+g|10>)(..)†
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = c(a * a);
        expect[(1, 1)] = c(b * b);
        expect[(2, 2)] = c(g * g);
        expect[(1, 2)] = c(b * g);
        expect[(2, 1)] = c(b * g);
        assert!(max_diff(r.mat(), &expect) < 1e-14);
    }

    #[test]
    fn product_trace_recovers_factor() {
        let ra = DensityMatrix::new(
            CMatrix::from_row_slice(2, 2, &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]),
            Dims::qubits(1),
        )
        .unwrap();
        let rb = DensityMatrix::maximally_mixed(Dims::new(vec![3]).unwrap());
        let r = partial_trace(&ra.kron(&rb), &[1]).unwrap();
        assert!(max_diff(r.mat(), ra.mat()) < 1e-15);
    }

    #[test]
    fn tracing_everything_is_an_error() {
        let rho = bell().projector();
        assert!(matches!(partial_trace(&rho, &[0, 1]), Err(Error::EmptyRemainder)));
        assert!(partial_trace(&rho, &[2]).is_err());
    }

    #[test]
    fn bell_partial_transpose_has_negative_half() {
        let rho = bell().projector();
        let cut = Bipartition::new(vec![0], 2).unwrap();
        let pt = partial_transpose(&rho, &cut).unwrap();
        assert_abs_diff_eq!(min_eigenvalue(&pt).unwrap(), -0.5, epsilon = 1e-12);
        let mm = DensityMatrix::maximally_mixed(Dims::qubits(2));
        assert_eq!(partial_transpose(&mm, &cut).unwrap(), *mm.mat());
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_abs_diff_eq!(min_eigenvalue(&CMatrix::identity(4, 4)).unwrap(), 1.0, epsilon = 1e-14);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5), c(0.5), ZERO, ZERO]));
        assert_abs_diff_eq!(min_eigenvalue(&d).unwrap(), 0.0, epsilon = 1e-14);
        let nh = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(min_eigenvalue(&nh), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn expectation_examples() {
        let rho = bell().projector();
        let zz = kron(&pauli::z(), &pauli::z());
        assert_abs_diff_eq!(expectation(&rho, &zz).unwrap(), 1.0, epsilon = 1e-14);
        let mm = DensityMatrix::maximally_mixed(Dims::qubits(2));
        let xx = kron(&pauli::x(), &pauli::x());
        assert_abs_diff_eq!(expectation(&mm, &xx).unwrap(), 0.0, epsilon = 1e-14);
        let phi: f64 = 0.83;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::new(
            vec![c(s), ZERO, ZERO, C64::from_polar(s, phi)],
            Dims::qubits(2),
        )
        .unwrap();
        let yy = kron(&pauli::y(), &pauli::y());
        let v = expectation(&psi.projector(), &(xx - yy)).unwrap();
        assert_abs_diff_eq!(v, 2.0 * phi.cos(), epsilon = 1e-14);
        assert!(expectation(&mm, &CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn density_validation() {
        let d = Dims::qubits(1);
        let bad_trace = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(bad_trace, d.clone()), Err(Error::Trace(_))));
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5), ZERO, ZERO, c(-0.5)]);
        assert!(matches!(DensityMatrix::new(neg, d.clone()), Err(Error::NotPsd(_))));
        let nh = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), ZERO, c(0.5)]);
        assert!(matches!(DensityMatrix::new(nh, d), Err(Error::NotHermitian(_))));
        assert!(Dims::new(vec![2, 1]).is_err());
        assert!(Dims::new(vec![]).is_err());
    }

    #[test]
    fn offsets_are_big_endian() {
        let d = Dims::new(vec![2, 3, 2]).unwrap();
        assert_eq!(d.strides(), vec![6, 2, 1]);
        assert_eq!(d.index(&[1, 2, 1]), 11);
        assert_eq!(d.digits(11), vec![1, 2, 1]);
        assert_eq!(d.offsets(&[2, 0]), vec![0, 6, 1, 7]);
    }

    #[test]
    fn permute_moves_digits() {
        let d = Dims::new(vec![2, 3]).unwrap();
        let psi = PureState::basis(d, 1 * 3 + 2).unwrap();
        let p = psi.permute(&[1, 0]).unwrap();
        assert_eq!(p.dims().as_slice(), &[3, 2]);
        assert_eq!(p.amps()[2 * 2 + 1], ONE);
    }

    #[test]
    fn bipartitions_enumerate_once() {
        let cuts = Bipartition::all(4);
        assert_eq!(cuts.len(), 7);
        assert!(cuts.iter().all(|c| c.left.contains(&0)));
        assert!(Bipartition::new(vec![0, 1], 2).is_err());
        assert_eq!(Bipartition::new(vec![1], 3).unwrap().to_string(), "{1}|{0,2}");
    }
}
