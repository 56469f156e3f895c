//! Correlator-based tests on qubit and qudit states: CHSH in a Pauli plane,
//! the nonlinear two-qubit witness and its multipartite and qudit density
//! forms, the Svetlichny visibility threshold for noisy W states, and the
//! three-input Hardy-type constraints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{uniform_local_dim, w_angles, w_state};
use crate::tensor::{pauli, partial_trace_pure, CMatrix, DensityMatrix, C64};
use crate::witnesses::frames::{FrameFamily, FrameSet};

/// Imaginary parts of correlators above this are reported as errors.
pub const REAL_TOL: f64 = 1e-10;

/// Observable `n·(X,Y,Z)` for a unit Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    bloch: [f64; 3],
}

impl ObservableSpec {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let norm = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::param("bloch", format!("norm {norm} is not 1")));
        }
        Ok(ObservableSpec { bloch })
    }

    pub fn x() -> Self {
        ObservableSpec { bloch: [1.0, 0.0, 0.0] }
    }

    pub fn y() -> Self {
        ObservableSpec { bloch: [0.0, 1.0, 0.0] }
    }

    pub fn z() -> Self {
        ObservableSpec { bloch: [0.0, 0.0, 1.0] }
    }

    /// Unit vector at angle `t` from the plane's first axis.
    pub fn in_plane(plane: Plane, t: f64) -> Self {
        let (c, s) = (t.cos(), t.sin());
        let bloch = match plane {
            Plane::XY => [c, s, 0.0],
            Plane::XZ => [c, 0.0, s],
        };
        ObservableSpec { bloch }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn matrix(&self) -> CMatrix {
        let [a, b, c] = self.bloch;
        pauli::x() * C64::from(a) + pauli::y() * C64::from(b) + pauli::z() * C64::from(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SiteOp {
    Identity,
    Obs(ObservableSpec),
}

impl SiteOp {
    fn matrix(&self) -> CMatrix {
        match self {
            SiteOp::Identity => pauli::id(),
            SiteOp::Obs(o) => o.matrix(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    XY,
    XZ,
}

impl Plane {
    fn axes(self) -> [usize; 2] {
        match self {
            Plane::XY => [0, 1],
            Plane::XZ => [0, 2],
        }
    }
}

/// `Tr(ρ · ⊗ᵢ opsᵢ)` for arbitrary local operators matching the local dims.
pub fn product_expectation(rho: &DensityMatrix, ops: &[CMatrix]) -> Result<C64> {
    let dims = rho.dims().as_slice();
    if ops.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} local operators for {} subsystems",
            ops.len(),
            dims.len()
        )));
    }
    for (i, (op, &d)) in ops.iter().zip(dims).enumerate() {
        if op.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!("operator {i} is not {d}x{d}")));
        }
    }
    let total = rho.dim();
    let digits: Vec<Vec<usize>> = (0..total).map(|i| rho.dims().digits(i)).collect();
    let m = rho.mat();
    let mut acc = C64::new(0.0, 0.0);
    for (r, dr) in digits.iter().enumerate() {
        for (c, dc) in digits.iter().enumerate() {
            let x = m[(r, c)];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            let mut w = C64::new(1.0, 0.0);
            for (k, op) in ops.iter().enumerate() {
                w *= op[(dc[k], dr[k])];
                if w.norm_sqr() == 0.0 {
                    break;
                }
            }
            acc += x * w;
        }
    }
    Ok(acc)
}

/// Expectation of a product of Pauli-type observables on a qubit state.
pub fn correlator(rho: &DensityMatrix, obs: &[SiteOp]) -> Result<f64> {
    if !rho.dims().all_qubits() {
        return Err(Error::InvalidDims("correlators need qubit subsystems".into()));
    }
    let ops: Vec<CMatrix> = obs.iter().map(SiteOp::matrix).collect();
    let v = product_expectation(rho, &ops)?;
    if v.im.abs() > REAL_TOL {
        return Err(Error::param("obs", format!("correlator has imaginary part {}", v.im)));
    }
    Ok(v.re)
}

fn check_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims().as_slice() != [2, 2] {
        return Err(Error::InvalidDims(format!("expected two qubits, got {}", rho.dims())));
    }
    Ok(())
}

fn pair(rho: &DensityMatrix, a: ObservableSpec, b: ObservableSpec) -> Result<f64> {
    correlator(rho, &[SiteOp::Obs(a), SiteOp::Obs(b)])
}

/// `⟨A₁B₁⟩ + ⟨A₁B₂⟩ + ⟨A₂B₁⟩ − ⟨A₂B₂⟩`.
pub fn chsh_value(
    rho2: &DensityMatrix,
    a1: ObservableSpec,
    a2: ObservableSpec,
    b1: ObservableSpec,
    b2: ObservableSpec,
) -> Result<f64> {
    check_two_qubits(rho2)?;
    Ok(pair(rho2, a1, b1)? + pair(rho2, a1, b2)? + pair(rho2, a2, b1)? - pair(rho2, a2, b2)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshMax {
    pub value: f64,
    pub plane: Plane,
    /// In-plane angles of `A₁, A₂, B₁, B₂`.
    pub angles: [f64; 4],
}

/// Correlation matrix `T_ij = ⟨σ_i ⊗ σ_j⟩` restricted to the plane's axes.
pub fn plane_correlations(rho2: &DensityMatrix, plane: Plane) -> Result<[[f64; 2]; 2]> {
    check_two_qubits(rho2)?;
    let basis = [ObservableSpec::x(), ObservableSpec::y(), ObservableSpec::z()];
    let ax = plane.axes();
    let mut t = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            t[i][j] = pair(rho2, basis[ax[i]], basis[ax[j]])?;
        }
    }
    Ok(t)
}

fn t_apply(t: &[[f64; 2]; 2], a: [f64; 2]) -> [f64; 2] {
    [t[0][0] * a[0] + t[1][0] * a[1], t[0][1] * a[0] + t[1][1] * a[1]]
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// For Alice's bisector angle `phi`, the best CHSH value and settings.
/// Bob's optimum and Alice's opening angle are closed form.
fn chsh_at_bisector(t: &[[f64; 2]; 2], phi: f64) -> (f64, [f64; 4]) {
    let e = [phi.cos(), phi.sin()];
    let ep = [-phi.sin(), phi.cos()];
    let (p, q) = (norm2(t_apply(t, e)), norm2(t_apply(t, ep)));
    let x = q.atan2(p);
    let (ta1, ta2) = (phi - x, phi + x);
    let a1 = [ta1.cos(), ta1.sin()];
    let a2 = [ta2.cos(), ta2.sin()];
    let u = t_apply(t, a1);
    let w = t_apply(t, a2);
    let s = [u[0] + w[0], u[1] + w[1]];
    let d = [u[0] - w[0], u[1] - w[1]];
    let tb1 = s[1].atan2(s[0]);
    let tb2 = d[1].atan2(d[0]);
    (norm2(s) + norm2(d), [ta1, ta2, tb1, tb2])
}

/// Deterministic 1-D maximization: the best point of a uniform grid seeds a
/// golden-section search on its neighboring cells.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize, tol: f64) -> (f64, f64) {
    let grid = grid.max(2);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best = (lo, f(lo));
    for i in 1..grid {
        let x = lo + step * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v > best.1 {
        (x, v)
    } else {
        best
    }
}

/// Maximum CHSH value with all four observables in one Pauli plane.
pub fn chsh_plane_max(rho2: &DensityMatrix, plane: Plane, grid: usize) -> Result<ChshMax> {
    let t = plane_correlations(rho2, plane)?;
    let (phi, _) = maximize_1d(|p| chsh_at_bisector(&t, p).0, 0.0, std::f64::consts::PI, grid, 1e-12);
    let (_, angles) = chsh_at_bisector(&t, phi);
    let ob = |k: usize| ObservableSpec::in_plane(plane, angles[k]);
    let value = chsh_value(rho2, ob(0), ob(1), ob(2), ob(3))?;
    Ok(ChshMax { value, plane, angles })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneChoice {
    XY,
    XZ,
    Both,
}

impl PlaneChoice {
    fn planes(self) -> &'static [Plane] {
        match self {
            PlaneChoice::XY => &[Plane::XY],
            PlaneChoice::XZ => &[Plane::XZ],
            PlaneChoice::Both => &[Plane::XY, Plane::XZ],
        }
    }
}

pub fn chsh_max_over(rho2: &DensityMatrix, planes: PlaneChoice, grid: usize) -> Result<ChshMax> {
    let mut best: Option<ChshMax> = None;
    for &p in planes.planes() {
        let m = chsh_plane_max(rho2, p, grid)?;
        if best.is_none_or(|b| m.value > b.value) {
            best = Some(m);
        }
    }
    Ok(best.expect("at least one plane"))
}

/// The three single-qubit-loss reductions `ρ_(A1), ρ_(A2), ρ_(A3)` of the
/// W state `α|001⟩ + β|010⟩ + γ|100⟩`.
pub fn w_reductions(alpha: f64, beta: f64, gamma: f64) -> Result<[DensityMatrix; 3]> {
    let w = w_state(alpha, beta, gamma)?;
    Ok([
        partial_trace_pure(&w, &[0])?,
        partial_trace_pure(&w, &[1])?,
        partial_trace_pure(&w, &[2])?,
    ])
}

/// Evenly spaced angles covering `[0, π/2]`.
pub fn octant_grid(steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::param("grid", "at least 2 steps per axis"));
    }
    let h = std::f64::consts::FRAC_PI_2 / (steps - 1) as f64;
    Ok((0..steps).map(|i| h * i as f64).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub theta: f64,
    pub phi: f64,
    pub values: [f64; 3],
    pub flag: bool,
}

/// Plane-maximized CHSH values of the three W reductions over the
/// `(θ, φ)` octant; flags points where all three exceed 2.
pub fn simultaneous_chsh_scan(
    theta_steps: usize,
    phi_steps: usize,
    planes: PlaneChoice,
    grid: usize,
) -> Result<Vec<ScanPoint>> {
    let thetas = octant_grid(theta_steps)?;
    let phis = octant_grid(phi_steps)?;
    let points: Vec<(f64, f64)> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| (t, p)))
        .collect();
    points
        .par_iter()
        .map(|&(theta, phi)| {
            let (a, b, g) = w_angles(theta, phi);
            let reds = w_reductions(a, b, g)?;
            let mut values = [0.0; 3];
            for (v, r) in values.iter_mut().zip(&reds) {
                *v = chsh_max_over(r, planes, grid)?.value;
            }
            Ok(ScanPoint {
                theta,
                phi,
                values,
                flag: values.iter().all(|&v| v > 2.0),
            })
        })
        .collect()
}

/// `(⟨XX⟩−⟨YY⟩)² + (⟨XY⟩+⟨YX⟩)² − (1−⟨ZZ⟩)²`; positive certifies entanglement.
pub fn nonlinear2_lhs(rho2: &DensityMatrix) -> Result<f64> {
    check_two_qubits(rho2)?;
    let (x, y, z) = (ObservableSpec::x(), ObservableSpec::y(), ObservableSpec::z());
    let a = pair(rho2, x, x)? - pair(rho2, y, y)?;
    let b = pair(rho2, x, y)? + pair(rho2, y, x)?;
    let c = 1.0 - pair(rho2, z, z)?;
    Ok(a * a + b * b - c * c)
}

/// `4|ρ_{00;11}|² − (ρ_{01;01} + ρ_{10;10})²`.
pub fn nonlinear2_density_lhs(rho2: &DensityMatrix) -> Result<f64> {
    check_two_qubits(rho2)?;
    let m = rho2.mat();
    let s = m[(1, 1)].re + m[(2, 2)].re;
    Ok(4.0 * m[(0, 3)].norm_sqr() - s * s)
}

fn flip_unitary(mask: usize, n: usize) -> CMatrix {
    (0..n).fold(CMatrix::identity(1, 1), |acc, i| {
        let u = if mask >> (n - 1 - i) & 1 == 1 { pauli::x() } else { pauli::id() };
        acc.kronecker(&u)
    })
}

fn frame_label(mask: usize, n: usize) -> String {
    (0..n)
        .map(|i| if mask >> (n - 1 - i) & 1 == 1 { 'X' } else { 'I' })
        .collect()
}

/// Largest value of `f` over the states `UρU†` for the frames in `frames`.
fn over_frames<F>(rho: &DensityMatrix, frames: &FrameSet, f: F) -> Result<(f64, String)>
where
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    let n = rho.dims().len();
    let masks = match frames.family {
        FrameFamily::BitFlips if n <= crate::witnesses::frames::BITFLIP_MAX_QUBITS => 1usize << n,
        _ => 1,
    };
    let mut best = (f64::NEG_INFINITY, String::new());
    for mask in 0..masks {
        let r = if mask == 0 { rho.clone() } else { rho.conjugate(&flip_unitary(mask, n))? };
        let v = f(&r)?;
        if v > best.0 {
            best = (v, frame_label(mask, n));
        }
    }
    for fr in &frames.custom {
        if fr.unitaries.len() != n {
            return Err(Error::param(format!("frame {}", fr.name), "wrong number of unitaries"));
        }
        let v = f(&rho.conjugate(&fr.full_unitary())?)?;
        if v > best.0 {
            best = (v, fr.name.clone());
        }
    }
    Ok(best)
}

/// Two-qubit witness maximized over local frames, with the winning frame.
pub fn nonlinear2_framed(rho2: &DensityMatrix, frames: &FrameSet) -> Result<(f64, String)> {
    check_two_qubits(rho2)?;
    over_frames(rho2, frames, nonlinear2_lhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessForm {
    Density,
    PauliLiteral,
}

/// Multipartite nonlinear witness. The density form is
/// `4|ρ_{0̄;1̄}|² − (1 − ρ_{0̄;0̄} − ρ_{1̄;1̄})²`; the Pauli form evaluates
/// `4⟨(iX+Y)^{⊗n}⟩⟨(iX−Y)^{⊗n}⟩ − (2ⁿ − ⟨(𝟙+Z)^{⊗n}⟩ − ⟨(𝟙−Z)^{⊗n}⟩)²` as
/// written, scaled by `4⁻ⁿ`.
pub fn multipartite_witness_lhs(rho: &DensityMatrix, form: WitnessForm) -> Result<f64> {
    if !rho.dims().all_qubits() {
        return Err(Error::InvalidDims("the multipartite witness needs qubits".into()));
    }
    let n = rho.dims().len();
    match form {
        WitnessForm::Density => Ok(crate::witnesses::frames::density_witness_at(rho.mat(), n, 0)),
        WitnessForm::PauliLiteral => {
            let i = C64::new(0.0, 1.0);
            let plus = pauli::x() * i + pauli::y();
            let minus = pauli::x() * i - pauli::y();
            let up = pauli::id() + pauli::z();
            let down = pauli::id() - pauli::z();
            let e = |op: &CMatrix| product_expectation(rho, &vec![op.clone(); n]);
            let first = C64::from(4.0) * e(&plus)? * e(&minus)?;
            let second = 2f64.powi(n as i32) - e(&up)?.re - e(&down)?.re;
            let scale = 4f64.powi(-(n as i32));
            Ok(scale * (first.re - second * second))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipartiteReport {
    pub density: f64,
    pub pauli_literal: f64,
    /// The two forms have opposite signs (beyond the witness threshold).
    pub sign_disagrees: bool,
}

pub fn multipartite_witness_report(rho: &DensityMatrix) -> Result<MultipartiteReport> {
    let density = multipartite_witness_lhs(rho, WitnessForm::Density)?;
    let pauli_literal = multipartite_witness_lhs(rho, WitnessForm::PauliLiteral)?;
    let t = crate::WITNESS_THRESHOLD;
    let sign_disagrees = (density > t && pauli_literal < -t) || (density < -t && pauli_literal > t);
    Ok(MultipartiteReport {
        density,
        pauli_literal,
        sign_disagrees,
    })
}

/// Smallest visibility `v` at which the density-form witness fires on
/// `vρ + (1−v)𝟙/2ⁿ`, over the frames. `None` if no frame fires at `v = 1`.
pub fn witness_visibility_threshold(rho: &DensityMatrix, frames: &FrameSet) -> Result<Option<f64>> {
    if !rho.dims().all_qubits() {
        return Err(Error::InvalidDims("the multipartite witness needs qubits".into()));
    }
    let n = rho.dims().len();
    let kappa = 1.0 - 2f64.powi(1 - n as i32);
    let threshold = |r: &DensityMatrix| -> Result<f64> {
        let m = r.mat();
        let last = r.dim() - 1;
        let c = m[(0, last)].norm();
        let s = 1.0 - m[(0, 0)].re - m[(last, last)].re;
        let denom = 2.0 * c - s + kappa;
        Ok(if denom > 0.0 && kappa / denom <= 1.0 { -(kappa / denom) } else { f64::NEG_INFINITY })
    };
    let (best, _) = over_frames(rho, frames, threshold)?;
    Ok(best.is_finite().then_some(-best))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuditTerm {
    pub u: usize,
    /// `4|ρ_{ū;v̄}|²` with `v = d−1−u`.
    pub lhs: f64,
    /// Population of the strings over `{u, v}` other than `ū`, `v̄`.
    pub bound: f64,
    pub value: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuditReport {
    pub n: usize,
    pub d: usize,
    pub terms: Vec<QuditTerm>,
    /// `2Σ_u |ρ_{ū;v̄}| − Σ_u bound_u`; nonpositive on biseparable states.
    pub aggregate: f64,
    pub aggregate_violated: bool,
}

/// Per-level qudit witness terms and their summed form.
pub fn qudit_witness_report(rho: &DensityMatrix) -> Result<QuditReport> {
    let dims = rho.dims();
    let d = uniform_local_dim(dims)
        .ok_or_else(|| Error::InvalidDims("qudit witness needs equal local dimensions".into()))?;
    let n = dims.len();
    let m = rho.mat();
    let t = crate::WITNESS_THRESHOLD;
    let mut terms = Vec::new();
    let mut aggregate = 0.0;
    for u in 0..d {
        let v = d - 1 - u;
        if u >= v {
            break;
        }
        let iu = dims.index(&vec![u; n]);
        let iv = dims.index(&vec![v; n]);
        let c = m[(iu, iv)].norm();
        let mut bound = 0.0;
        for mask in 1..(1usize << n) - 1 {
            let digits: Vec<usize> = (0..n).map(|k| if mask >> k & 1 == 1 { v } else { u }).collect();
            let i = dims.index(&digits);
            bound += m[(i, i)].re;
        }
        let lhs = 4.0 * c * c;
        let value = lhs - bound * bound;
        aggregate += 2.0 * c - bound;
        terms.push(QuditTerm {
            u,
            lhs,
            bound,
            value,
            violated: value > t,
        });
    }
    Ok(QuditReport {
        n,
        d,
        terms,
        aggregate,
        aggregate_violated: aggregate > t,
    })
}

/// `2Δ(sin3θ + sinθ) − sin3θ + 3sinθ`.
pub fn svetlichny_profile(delta: f64, theta: f64) -> f64 {
    let (s1, s3) = (theta.sin(), (3.0 * theta).sin());
    2.0 * delta * (s3 + s1) - s3 + 3.0 * s1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvetlichnyThreshold {
    pub delta: f64,
    pub max_value: f64,
    pub argmax: f64,
    pub visibility: f64,
}

/// Visibility above which noisy W states `α|001⟩+β|010⟩+γ|100⟩` violate the
/// Svetlichny inequality: `min(4 / max_θ profile, 1)` with `Δ = αβ+αγ+βγ`.
pub fn svetlichny_w_visibility(alpha: f64, beta: f64, gamma: f64) -> Result<SvetlichnyThreshold> {
    svetlichny_w_visibility_grid(alpha, beta, gamma, 2048)
}

pub fn svetlichny_w_visibility_grid(
    alpha: f64,
    beta: f64,
    gamma: f64,
    grid: usize,
) -> Result<SvetlichnyThreshold> {
    let norm = alpha * alpha + beta * beta + gamma * gamma;
    if (norm - 1.0).abs() > crate::states::INPUT_NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let delta = alpha * beta + alpha * gamma + beta * gamma;
    let (argmax, max_value) =
        maximize_1d(|t| svetlichny_profile(delta, t), 0.0, std::f64::consts::PI, grid, 1e-10);
    let visibility = if max_value > 0.0 { (4.0 / max_value).min(1.0) } else { 1.0 };
    Ok(SvetlichnyThreshold {
        delta,
        max_value,
        argmax,
        visibility,
    })
}

/// Joint outcome distributions `p[a][b][x][y]` for binary outcomes and
/// three inputs per side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbTable {
    p: [[[[f64; 3]; 3]; 2]; 2],
}

impl ProbTable {
    pub fn new(p: [[[[f64; 3]; 3]; 2]; 2]) -> Result<Self> {
        for x in 0..3 {
            for y in 0..3 {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        let v = p[a][b][x][y];
                        if v < -1e-12 {
                            return Err(Error::param("p", format!("negative entry at ({a}{b}|{x}{y})")));
                        }
                        s += v;
                    }
                }
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::param("p", format!("inputs ({x},{y}) sum to {s}")));
                }
            }
        }
        Ok(ProbTable { p })
    }

    /// Local deterministic strategy: Alice answers `f[x]`, Bob `g[y]`.
    pub fn deterministic(f: [usize; 3], g: [usize; 3]) -> Self {
        let mut p = [[[[0.0; 3]; 3]; 2]; 2];
        for x in 0..3 {
            for y in 0..3 {
                p[f[x] & 1][g[y] & 1][x][y] = 1.0;
            }
        }
        ProbTable { p }
    }

    /// Outcome statistics of projective measurements on a two-qubit state;
    /// outcome 0 is the +1 eigenvalue.
    pub fn from_state(rho2: &DensityMatrix, alice: [ObservableSpec; 3], bob: [ObservableSpec; 3]) -> Result<Self> {
        check_two_qubits(rho2)?;
        let proj = |o: &ObservableSpec, a: usize| {
            let sign = if a == 0 { 0.5 } else { -0.5 };
            pauli::id() * C64::from(0.5) + o.matrix() * C64::from(sign)
        };
        let mut p = [[[[0.0; 3]; 3]; 2]; 2];
        for x in 0..3 {
            for y in 0..3 {
                for a in 0..2 {
                    for b in 0..2 {
                        let v = product_expectation(rho2, &[proj(&alice[x], a), proj(&bob[y], b)])?;
                        p[a][b][x][y] = v.re.max(0.0);
                    }
                }
            }
        }
        ProbTable::new(p)
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[a][b][x][y]
    }

    /// `Σ_{a,b} (−1)^{a+b} P(ab|xy)`.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let p = &self.p;
        p[0][0][x][y] - p[0][1][x][y] - p[1][0][x][y] + p[1][1][x][y]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub holds: bool,
    pub residual: f64,
}

impl Constraint {
    fn eq(residual: f64) -> Self {
        Constraint {
            holds: residual.abs() <= 1e-9,
            residual,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    /// `E11 = E12 = E21 = E22`; residual is the largest spread.
    pub equal_correlators: Constraint,
    /// `P(01|00) P(10|00) = 0`.
    pub exclusive_outcomes: Constraint,
    /// `P(00|11) = P(00|22)`.
    pub equal_coincidence: Constraint,
    /// `P(10|11) ≥ P(10|12)`; residual is `P(10|12) − P(10|11)`.
    pub ordering: Constraint,
    pub premises_hold: bool,
    /// `(P01|11 − P10|11)² − (P01|12 − P10|12)² − (P00|00 + P11|00)²`.
    pub quadratic: f64,
    pub quadratic_holds: bool,
    /// The premises fail, or they hold and so does the quadratic inequality.
    pub consistent: bool,
}

pub fn hardy_check(t: &ProbTable) -> HardyReport {
    let e = [t.correlator(1, 1), t.correlator(1, 2), t.correlator(2, 1), t.correlator(2, 2)];
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let equal_correlators = Constraint::eq(hi - lo);
    let exclusive_outcomes = Constraint::eq(t.get(0, 1, 0, 0) * t.get(1, 0, 0, 0));
    let equal_coincidence = Constraint::eq(t.get(0, 0, 1, 1) - t.get(0, 0, 2, 2));
    let gap = t.get(1, 0, 1, 2) - t.get(1, 0, 1, 1);
    let ordering = Constraint {
        holds: gap <= 1e-9,
        residual: gap,
    };
    let premises_hold =
        equal_correlators.holds && exclusive_outcomes.holds && equal_coincidence.holds && ordering.holds;
    let d11 = t.get(0, 1, 1, 1) - t.get(1, 0, 1, 1);
    let d12 = t.get(0, 1, 1, 2) - t.get(1, 0, 1, 2);
    let s00 = t.get(0, 0, 0, 0) + t.get(1, 1, 0, 0);
    let quadratic = d11 * d11 - d12 * d12 - s00 * s00;
    let quadratic_holds = quadratic <= 1e-9;
    HardyReport {
        equal_correlators,
        exclusive_outcomes,
        equal_coincidence,
        ordering,
        premises_hold,
        quadratic,
        quadratic_holds,
        consistent: !premises_hold || quadratic_holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bipartite_pure, ghz, noisy_mix, GhzParams};
    use crate::tensor::{Dims, PureState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, SQRT_2};

    fn phi_plus() -> DensityMatrix {
        bipartite_pure(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap().projector()
    }

    #[test]
    fn correlator_examples() {
        let zz = [SiteOp::Obs(ObservableSpec::z()), SiteOp::Obs(ObservableSpec::z())];
        assert_abs_diff_eq!(correlator(&phi_plus(), &zz).unwrap(), 1.0, epsilon = 1e-14);
        let mm = DensityMatrix::maximally_mixed(Dims::qubits(1));
        assert_abs_diff_eq!(
            correlator(&mm, &[SiteOp::Obs(ObservableSpec::x())]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        for n in 1..=4 {
            let zero = PureState::basis(Dims::qubits(n), 0).unwrap().projector();
            let up = pauli::id() + pauli::z();
            let v = product_expectation(&zero, &vec![up; n]).unwrap();
            assert_abs_diff_eq!(v.re, 2f64.powi(n as i32), epsilon = 1e-12);
        }
        let qutrit = DensityMatrix::maximally_mixed(Dims::new(vec![3]).unwrap());
        assert!(correlator(&qutrit, &[SiteOp::Identity]).is_err());
        assert!(ObservableSpec::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn chsh_w_closed_form() {
        let (a, b, g) = (0.3f64, 0.5f64, (1.0f64 - 0.34).sqrt());
        let r = &w_reductions(a, b, g).unwrap()[2];
        let ob = |t| ObservableSpec::in_plane(Plane::XY, t);
        let v = chsh_value(r, ob(0.0), ob(PI / 2.0), ob(FRAC_PI_4), ob(-FRAC_PI_4)).unwrap();
        assert_abs_diff_eq!(v, 4.0 * SQRT_2 * b * g, epsilon = 1e-12);
    }

    #[test]
    fn chsh_plane_max_examples() {
        for plane in [Plane::XY, Plane::XZ] {
            let m = chsh_plane_max(&phi_plus(), plane, 256).unwrap();
            assert_abs_diff_eq!(m.value, 2.0 * SQRT_2, epsilon = 1e-9);
        }
        let s = 1.0 / 3f64.sqrt();
        let r = &w_reductions(s, s, s).unwrap()[2];
        let m = chsh_plane_max(r, Plane::XY, 256).unwrap();
        assert_abs_diff_eq!(m.value, 4.0 * SQRT_2 / 3.0, epsilon = 1e-9);
        let mm = DensityMatrix::maximally_mixed(Dims::qubits(2));
        assert_abs_diff_eq!(chsh_plane_max(&mm, Plane::XZ, 64).unwrap().value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn chsh_scan_corner_is_classical() {
        let pts = simultaneous_chsh_scan(2, 2, PlaneChoice::Both, 64).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|p| !p.flag));
    }

    #[test]
    fn nonlinear_examples() {
        assert_abs_diff_eq!(nonlinear2_lhs(&phi_plus()).unwrap(), 4.0, epsilon = 1e-12);
        let s = 1.0 / 3f64.sqrt();
        let r = &w_reductions(s, s, s).unwrap()[2];
        let (v, frame) = nonlinear2_framed(r, &FrameSet::default()).unwrap();
        assert_abs_diff_eq!(v, 4.0 / 3.0, epsilon = 1e-12);
        assert!(frame == "IX" || frame == "XI");
        let flipped = r.conjugate(&flip_unitary(1, 2)).unwrap();
        assert_abs_diff_eq!(nonlinear2_density_lhs(&flipped).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn multipartite_examples() {
        for n in 3..=5 {
            let g = ghz(&GhzParams::qubit(n, FRAC_PI_4)).unwrap().projector();
            let rep = multipartite_witness_report(&g).unwrap();
            assert_abs_diff_eq!(rep.density, 1.0, epsilon = 1e-12);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(rep.pauli_literal, sign, epsilon = 1e-12);
            assert_eq!(rep.sign_disagrees, n % 2 == 1);
        }
        let mm = DensityMatrix::maximally_mixed(Dims::qubits(3));
        assert!(multipartite_witness_lhs(&mm, WitnessForm::Density).unwrap() < 0.0);
    }

    #[test]
    fn visibility_threshold_matches_scan() {
        let g = ghz(&GhzParams::qubit(3, FRAC_PI_4)).unwrap();
        let v = witness_visibility_threshold(&g.projector(), &FrameSet::identity()).unwrap().unwrap();
        let fires = |x: f64| {
            multipartite_witness_lhs(&noisy_mix(&g, x).unwrap(), WitnessForm::Density).unwrap() > 0.0
        };
        assert!(fires(v + 1e-6));
        assert!(!fires(v - 1e-6));
    }

    #[test]
    fn qudit_examples() {
        let g = ghz(&GhzParams { n: 2, d: 3, amplitudes: vec![1.0 / 3f64.sqrt(); 3] }).unwrap();
        let rep = qudit_witness_report(&g.projector()).unwrap();
        assert_eq!(rep.terms.len(), 1);
        assert_abs_diff_eq!(rep.terms[0].lhs, 4.0 / 9.0, epsilon = 1e-12);
        assert!(rep.terms[0].violated);
        let mm = DensityMatrix::maximally_mixed(Dims::new(vec![4, 4]).unwrap());
        let rep = qudit_witness_report(&mm).unwrap();
        assert_eq!(rep.terms.len(), 2);
        assert!(rep.terms.iter().all(|t| t.value <= 0.0));
        assert!(qudit_witness_report(&DensityMatrix::maximally_mixed(Dims::new(vec![2, 3]).unwrap())).is_err());
    }

    #[test]
    fn svetlichny_examples() {
        let s = 1.0 / 3f64.sqrt();
        let t = svetlichny_w_visibility(s, s, s).unwrap();
        assert_abs_diff_eq!(t.delta, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.visibility, 0.918_559, epsilon = 1e-6);
        assert_eq!(svetlichny_w_visibility(1.0, 0.0, 0.0).unwrap().visibility, 1.0);
    }

    #[test]
    fn hardy_examples() {
        let mut satisfying = 0;
        for f in 0..8usize {
            for g in 0..8usize {
                let bits = |m: usize| [m & 1, m >> 1 & 1, m >> 2 & 1];
                let r = hardy_check(&ProbTable::deterministic(bits(f), bits(g)));
                assert!(r.consistent);
                satisfying += r.premises_hold as usize;
            }
        }
        assert!(satisfying > 0);
        let (x, y, z) = (ObservableSpec::x(), ObservableSpec::y(), ObservableSpec::z());
        let t = ProbTable::from_state(&phi_plus(), [z, x, y], [z, x, y]).unwrap();
        let r = hardy_check(&t);
        assert!(!r.premises_hold);
        assert_abs_diff_eq!(r.quadratic, -1.0, epsilon = 1e-12);
        assert!(ProbTable::new([[[[0.3; 3]; 3]; 2]; 2]).is_err());
    }
}
