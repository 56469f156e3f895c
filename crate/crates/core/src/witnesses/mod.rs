//! Separability and entanglement verdicts.
//!
//! Verdicts are three-valued. `Separable` is only reported with an exactness
//! guarantee (diagonal state, explicit product factor, PPT in 2⊗2 or 2⊗3) and
//! `Entangled` only with a certificate (NPT eigenvalue, mixed cut of a pure
//! state, a firing witness). Everything else is `Unknown`.

pub mod frames;
pub mod ppt_mixture;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{lose_state, LossMode, LossSpec, Ownership};
use crate::error::{Error, Result};
use crate::states::uniform_local_dim;
use crate::tensor::{
    eigh, min_eigenvalue, partial_trace, partial_trace_pure, partial_transpose_on, Bipartition,
    DensityMatrix, Dims, PureState, QuantumState, C64, ZERO,
};
use crate::{DIAGONAL_TOL, NPT_THRESHOLD, PURITY_TOL, WITNESS_THRESHOLD};

pub use frames::{best_density_witness, FrameFamily, FrameSet, LocalFrame};
pub use ppt_mixture::{ppt_mixture_witness, PptMixtureOptions, PptMixtureResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Separable,
    Entangled,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub test: String,
    pub cut: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub evidence: Vec<Evidence>,
}

impl Verdict {
    fn one(status: Status, test: &str, cut: impl Into<String>, value: f64) -> Self {
        Verdict {
            status,
            evidence: vec![Evidence {
                test: test.into(),
                cut: cut.into(),
                value,
            }],
        }
    }

    fn with(mut self, test: &str, cut: impl Into<String>, value: f64) -> Self {
        self.evidence.push(Evidence {
            test: test.into(),
            cut: cut.into(),
            value,
        });
        self
    }
}

#[derive(Clone, Debug)]
pub struct VerdictOptions {
    pub npt_threshold: f64,
    pub witness_threshold: f64,
    pub frames: FrameSet,
    /// The witness search runs only on states of at most this dimension.
    pub ppt_mixture_max_dim: usize,
    pub ppt_mixture: PptMixtureOptions,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            npt_threshold: NPT_THRESHOLD,
            witness_threshold: WITNESS_THRESHOLD,
            frames: FrameSet::default(),
            ppt_mixture_max_dim: 64,
            ppt_mixture: PptMixtureOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptVerdict {
    pub min_eig: f64,
    pub npt: bool,
    /// PPT implies separability for this cut (2⊗2 or 2⊗3).
    pub exact: bool,
}

pub fn ppt_verdict(rho: &DensityMatrix, cut: &Bipartition) -> Result<PptVerdict> {
    ppt_verdict_with(rho, cut, NPT_THRESHOLD)
}

pub fn ppt_verdict_with(rho: &DensityMatrix, cut: &Bipartition, threshold: f64) -> Result<PptVerdict> {
    let pt = crate::tensor::partial_transpose(rho, cut)?;
    let min_eig = min_eigenvalue(&pt)?;
    let dims = rho.dims().as_slice();
    let dl: usize = cut.left.iter().map(|&i| dims[i]).product();
    let dr: usize = cut.right.iter().map(|&i| dims[i]).product();
    let exact = matches!((dl.min(dr), dl.max(dr)), (2, 2) | (2, 3));
    Ok(PptVerdict {
        min_eig,
        npt: min_eig < -threshold,
        exact,
    })
}

fn cut_label(cut: &Bipartition, names: &[String]) -> String {
    let l: Vec<&str> = cut.left.iter().map(|&i| names[i].as_str()).collect();
    let r: Vec<&str> = cut.right.iter().map(|&i| names[i].as_str()).collect();
    format!("{}|{}", l.join(","), r.join(","))
}

/// Index of every global basis state inside the `subset` space and inside the
/// complement space (both big-endian in sorted subsystem order).
fn split_indices(dims: &Dims, subset: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut s = subset.to_vec();
    s.sort_unstable();
    let rest = dims.complement(&s);
    let d = dims.as_slice();
    let total = dims.total();
    let mut in_s = vec![0usize; total];
    let mut in_r = vec![0usize; total];
    for (i, (a, b)) in in_s.iter_mut().zip(in_r.iter_mut()).enumerate() {
        let digits = dims.digits(i);
        *a = s.iter().fold(0, |acc, &k| acc * d[k] + digits[k]);
        *b = rest.iter().fold(0, |acc, &k| acc * d[k] + digits[k]);
    }
    (in_s, in_r)
}

/// Largest entrywise deviation of `ρ` from `ρ_S ⊗ ρ_rest`.
pub fn factor_residual(rho: &DensityMatrix, subset: &[usize]) -> Result<f64> {
    let rest = rho.dims().complement(subset);
    if subset.is_empty() || rest.is_empty() {
        return Ok(0.0);
    }
    let rs = partial_trace(rho, &rest)?;
    let rr = partial_trace(rho, subset)?;
    let (is, ir) = split_indices(rho.dims(), subset);
    let m = rho.mat();
    let (ms, mr) = (rs.mat(), rr.mat());
    let d = rho.dim();
    let mut worst: f64 = 0.0;
    for c in 0..d {
        for r in 0..d {
            let prod = ms[(is[r], is[c])] * mr[(ir[r], ir[c])];
            worst = worst.max((m[(r, c)] - prod).norm());
        }
    }
    Ok(worst)
}

/// `1 − Tr ρ_L²` for the reduction of a pure state to `left`.
pub fn pure_cut_mixedness(psi: &PureState, left: &[usize]) -> Result<f64> {
    let dims = psi.dims();
    let right = dims.complement(left);
    let dl: usize = left.iter().map(|&i| dims.as_slice()[i]).product();
    let dr: usize = right.iter().map(|&i| dims.as_slice()[i]).product();
    let red = if dl <= dr {
        partial_trace_pure(psi, &right)?
    } else {
        partial_trace_pure(psi, left)?
    };
    Ok(1.0 - red.purity())
}

fn dominant_vector(rho: &DensityMatrix) -> Result<PureState> {
    let (_, vecs) = eigh(rho.mat())?;
    let last = vecs.ncols() - 1;
    let amps: Vec<C64> = vecs.column(last).iter().copied().collect();
    PureState::normalized(amps, rho.dims().clone())
}

fn pure_gme(psi: &PureState, own: &Ownership) -> Result<Verdict> {
    let mut best: Option<(f64, String)> = None;
    for cut in Bipartition::all(own.num_parties()) {
        let part = cut.expand(&own.particles);
        let mix = pure_cut_mixedness(psi, &part.left)?;
        let label = cut_label(&cut, &own.names);
        if mix <= PURITY_TOL {
            return Ok(Verdict::one(Status::Separable, "product", label, mix));
        }
        if best.as_ref().is_none_or(|b| mix < b.0) {
            best = Some((mix, label));
        }
    }
    let (mix, label) = best.expect("at least one cut");
    Ok(Verdict::one(Status::Entangled, "pure_cut_mixedness", label, mix))
}

/// Genuine multipartite entanglement verdict between the parties of `own`,
/// for a state stored at particle level. `Separable` means biseparable.
pub fn biseparability_verdict_grouped(
    state: &QuantumState,
    own: &Ownership,
    opts: &VerdictOptions,
) -> Result<Verdict> {
    own.check_dims(state.dims())?;
    if own.num_parties() < 2 {
        return Ok(Verdict::one(Status::Unknown, "single_party", "", 0.0));
    }
    match state {
        QuantumState::Pure(psi) => pure_gme(psi, own),
        QuantumState::Mixed(rho) => {
            let original: Vec<usize> = (0..own.num_particles()).collect();
            mixed_gme(rho, own, opts, &original)
        }
    }
}

/// Biseparability verdict with every subsystem its own party.
pub fn biseparability_verdict(rho: &DensityMatrix) -> Result<Verdict> {
    biseparability_verdict_grouped(
        &QuantumState::Mixed(rho.clone()),
        &Ownership::singletons(rho.dims().len()),
        &VerdictOptions::default(),
    )
}

/// `original[i]` is the caller-visible index of particle `i` (used in labels).
fn mixed_gme(rho: &DensityMatrix, own: &Ownership, opts: &VerdictOptions, original: &[usize]) -> Result<Verdict> {
    let off = rho.off_diagonal_mass();
    if off < DIAGONAL_TOL {
        return Ok(Verdict::one(Status::Separable, "diagonal", "", off));
    }
    if rho.purity() >= 1.0 - PURITY_TOL {
        let psi = dominant_vector(rho)?;
        return pure_gme(&psi, own).map(|v| v.with("purity", "", rho.purity()));
    }
    let cuts = Bipartition::all(own.num_parties());
    for cut in &cuts {
        let part = cut.expand(&own.particles);
        let res = factor_residual(rho, &part.left)?;
        if res <= PURITY_TOL {
            return Ok(Verdict::one(Status::Separable, "product", cut_label(cut, &own.names), res));
        }
    }
    for (g, ps) in own.particles.iter().enumerate() {
        if ps.len() < 2 {
            continue;
        }
        for &p in ps {
            let res = factor_residual(rho, &[p])?;
            if res <= PURITY_TOL {
                let reduced = partial_trace(rho, &[p])?;
                let kept = rho.dims().complement(&[p]);
                let sub_own = own.restrict(&kept);
                let sub_original: Vec<usize> = kept.iter().map(|&k| original[k]).collect();
                let inner = if sub_own.num_parties() < 2 {
                    Verdict::one(Status::Unknown, "single_party", "", 0.0)
                } else {
                    mixed_gme(&reduced, &sub_own, opts, &sub_original)?
                };
                let mut v = Verdict::one(
                    inner.status,
                    "local_factor",
                    format!("{}:{}", own.names[g], original[p]),
                    res,
                );
                v.evidence.extend(inner.evidence);
                return Ok(v);
            }
        }
    }
    if own.num_parties() == 2 {
        let cut = cuts[0].expand(&own.particles);
        let ppt = ppt_verdict_with(rho, &cut, opts.npt_threshold)?;
        let label = cut_label(&cuts[0], &own.names);
        if ppt.npt {
            return Ok(Verdict::one(Status::Entangled, "npt", label, ppt.min_eig));
        }
        if ppt.exact {
            return Ok(Verdict::one(Status::Separable, "ppt_exact", label, ppt.min_eig));
        }
        return Ok(Verdict::one(Status::Unknown, "ppt", label, ppt.min_eig));
    }
    if rho.dims().all_qubits() {
        let (val, frame) = best_density_witness(rho, &opts.frames)?;
        if val > opts.witness_threshold {
            return Ok(Verdict::one(
                Status::Entangled,
                "density_witness",
                format!("frame {frame}"),
                val,
            ));
        }
    }
    if rho.dim() <= opts.ppt_mixture_max_dim {
        let res = ppt_mixture_witness(rho, &own.particles, &opts.ppt_mixture);
        if res.value < -opts.witness_threshold {
            return Ok(Verdict::one(Status::Entangled, "ppt_mixture_witness", "", res.value));
        }
    }
    let mut v = Verdict {
        status: Status::Unknown,
        evidence: Vec::new(),
    };
    if rho.dim() <= 1024 {
        for cut in &cuts {
            let part = cut.expand(&own.particles);
            let pt = partial_transpose_on(rho.mat(), rho.dims(), &part.left);
            v = v.with("ppt", cut_label(cut, &own.names), min_eigenvalue(&pt)?);
        }
    }
    Ok(v)
}

/// Splits `block` into tensor factors of `rho`'s reduction.
fn tensor_blocks(rho: &DensityMatrix) -> Result<Vec<Vec<usize>>> {
    let n = rho.dims().len();
    if n == 1 || n > 10 {
        return Ok(vec![(0..n).collect()]);
    }
    for size in 1..=n / 2 {
        for s in combinations(n, size) {
            if factor_residual(rho, &s)? <= PURITY_TOL {
                let rest = rho.dims().complement(&s);
                let left = partial_trace(rho, &rest)?;
                let right = partial_trace(rho, &s)?;
                let mut out = Vec::new();
                for b in tensor_blocks(&left)? {
                    out.push(b.iter().map(|&i| s[i]).collect());
                }
                for b in tensor_blocks(&right)? {
                    out.push(b.iter().map(|&i| rest[i]).collect());
                }
                return Ok(out);
            }
        }
    }
    Ok(vec![(0..n).collect()])
}

/// Full-separability proxy over the subsystems of `state`.
pub fn fully_separable_proxy(state: &QuantumState) -> Result<Verdict> {
    let n = state.dims().len();
    if n == 1 {
        return Ok(Verdict::one(Status::Separable, "single_subsystem", "", 0.0));
    }
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let pure = match state {
        QuantumState::Pure(p) => Some(p.clone()),
        QuantumState::Mixed(m) => {
            let off = m.off_diagonal_mass();
            if off < DIAGONAL_TOL {
                return Ok(Verdict::one(Status::Separable, "diagonal", "", off));
            }
            if m.purity() >= 1.0 - PURITY_TOL {
                Some(dominant_vector(m)?)
            } else {
                None
            }
        }
    };
    if let Some(psi) = pure {
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let mix = pure_cut_mixedness(&psi, &[j])?;
            if mix > PURITY_TOL {
                let cut = Bipartition::new(vec![j], n)?;
                return Ok(Verdict::one(
                    Status::Entangled,
                    "pure_cut_mixedness",
                    cut_label(&cut, &names),
                    mix,
                ));
            }
            worst = worst.max(mix);
        }
        return Ok(Verdict::one(Status::Separable, "product", "", worst));
    }
    let QuantumState::Mixed(rho) = state else { unreachable!() };
    let blocks = tensor_blocks(rho)?;
    let mut undecided = false;
    let mut evidence = Vec::new();
    for b in &blocks {
        if b.len() == 1 {
            continue;
        }
        let rest = rho.dims().complement(b);
        let sub = partial_trace(rho, &rest)?;
        let off = sub.off_diagonal_mass();
        if off < DIAGONAL_TOL {
            continue;
        }
        let label = b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        if sub.purity() >= 1.0 - PURITY_TOL {
            let cut_left = vec![b[0]];
            let cut = Bipartition::new(cut_left, n)?;
            return Ok(Verdict::one(Status::Entangled, "pure_block", cut_label(&cut, &names), sub.purity()));
        }
        if b.len() == 2 {
            let cut = Bipartition::new(vec![0], 2)?;
            let ppt = ppt_verdict(&sub, &cut)?;
            if ppt.npt {
                return Ok(Verdict::one(Status::Entangled, "npt", format!("{}|{}", b[0], b[1]), ppt.min_eig));
            }
            if ppt.exact {
                evidence.push(Evidence {
                    test: "ppt_exact".into(),
                    cut: format!("{}|{}", b[0], b[1]),
                    value: ppt.min_eig,
                });
                continue;
            }
        }
        undecided = true;
        evidence.push(Evidence {
            test: "block".into(),
            cut: label,
            value: off,
        });
    }
    if !undecided {
        let mut v = Verdict::one(Status::Separable, "product_blocks", "", blocks.len() as f64);
        v.evidence.extend(evidence);
        return Ok(v);
    }
    if rho.dim() <= 512 {
        for cut in Bipartition::all(n) {
            let ppt = ppt_verdict(rho, &cut)?;
            if ppt.npt {
                return Ok(Verdict::one(Status::Entangled, "npt", cut_label(&cut, &names), ppt.min_eig));
            }
        }
    }
    Ok(Verdict {
        status: Status::Unknown,
        evidence,
    })
}

/// Subsets of `0..n` with `k` elements, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if cur[i] == i + n - k {
            return out;
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Moves each party's particles together (party order) and merges them into
/// one subsystem per party.
pub fn to_party_level(rho: &DensityMatrix, own: &Ownership) -> Result<DensityMatrix> {
    let perm: Vec<usize> = own.particles.iter().flatten().copied().collect();
    let permuted = rho.permute(&perm)?;
    let dims = Dims::new(own.party_dims(rho.dims()))?;
    let (mat, _) = permuted.into_parts();
    Ok(DensityMatrix::unchecked(mat, dims))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    FullySeparable,
    Biseparable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetVerdict {
    pub lost: Vec<usize>,
    pub lost_names: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoseSeparability {
    /// `Separable`: some admissible loss leaves a biseparable state.
    /// `Entangled`: every admissible loss leaves a GME state.
    pub status: Status,
    pub witness_set: Option<Vec<usize>>,
    pub witness_names: Option<Vec<String>>,
    pub granularity: Option<Granularity>,
    pub trace: Vec<SubsetVerdict>,
}

fn loss_verdict(
    state: &QuantumState,
    own: &Ownership,
    spec: &LossSpec,
    opts: &VerdictOptions,
) -> Result<(Verdict, DensityMatrix, Ownership)> {
    let out = lose_state(state, spec, own)?;
    let v = biseparability_verdict_grouped(&QuantumState::Mixed(out.state.clone()), &out.ownership, opts)?;
    Ok((v, out.state, out.ownership))
}

fn set_names(set: &[usize], own: &Ownership, mode: LossMode) -> Vec<String> {
    match mode {
        LossMode::Party => set.iter().map(|&i| own.names[i].clone()).collect(),
        LossMode::Particle => set
            .iter()
            .map(|&p| {
                let g = own.party_of(p).unwrap_or(0);
                format!("{}:{p}", own.names[g])
            })
            .collect(),
    }
}

/// Looks for a loss of at most n−2 parties that leaves a biseparable state.
pub fn particle_lose_separable(
    state: &QuantumState,
    own: &Ownership,
    opts: &VerdictOptions,
) -> Result<LoseSeparability> {
    own.check_dims(state.dims())?;
    let n = own.num_parties();
    if n < 3 {
        return Err(Error::param("parties", "particle-lose separability needs at least 3 parties"));
    }
    let mut trace = Vec::new();
    let mut any_unknown = false;
    for size in 1..=n - 2 {
        let sets = combinations(n, size);
        let results: Vec<Result<(Verdict, DensityMatrix, Ownership)>> = sets
            .par_iter()
            .map(|s| loss_verdict(state, own, &LossSpec::parties(s.clone()), opts))
            .collect();
        let mut found = None;
        for (set, r) in sets.into_iter().zip(results) {
            let (v, reduced, red_own) = r?;
            let status = v.status;
            trace.push(SubsetVerdict {
                lost_names: set_names(&set, own, LossMode::Party),
                lost: set.clone(),
                verdict: v,
            });
            match status {
                Status::Separable if found.is_none() => found = Some((set, reduced, red_own)),
                Status::Unknown => any_unknown = true,
                _ => {}
            }
        }
        if let Some((set, reduced, red_own)) = found {
            let party = to_party_level(&reduced, &red_own)?;
            let full = fully_separable_proxy(&QuantumState::Mixed(party))?;
            let granularity = if full.status == Status::Separable {
                Granularity::FullySeparable
            } else {
                Granularity::Biseparable
            };
            return Ok(LoseSeparability {
                status: Status::Separable,
                witness_names: Some(set_names(&set, own, LossMode::Party)),
                witness_set: Some(set),
                granularity: Some(granularity),
                trace,
            });
        }
    }
    Ok(LoseSeparability {
        status: if any_unknown { Status::Unknown } else { Status::Entangled },
        witness_set: None,
        witness_names: None,
        granularity: None,
        trace,
    })
}

/// Robustness depth: the largest `m` such that every admissible loss set of
/// size at most `m` leaves a genuinely multipartite entangled state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub depth: usize,
    pub mode: LossMode,
    pub intact_entangled: bool,
    /// Every admissible loss size up to the cap was entangled.
    pub exhausted: bool,
    pub unknown_at: Option<usize>,
    pub separable_at: Option<Vec<usize>>,
    pub max_size_checked: usize,
    pub witness_trace: Vec<SubsetVerdict>,
}

impl DepthReport {
    /// Depth counted as "every loss of at most k−1 keeps entanglement".
    pub fn definition_k(&self) -> usize {
        self.depth + 1
    }
}

pub fn robustness_depth(
    state: &QuantumState,
    own: &Ownership,
    mode: LossMode,
    max_loss: Option<usize>,
    opts: &VerdictOptions,
) -> Result<DepthReport> {
    own.check_dims(state.dims())?;
    let intact = biseparability_verdict_grouped(state, own, opts)?;
    let mut report = DepthReport {
        depth: 0,
        mode,
        intact_entangled: intact.status == Status::Entangled,
        exhausted: false,
        unknown_at: None,
        separable_at: None,
        max_size_checked: 0,
        witness_trace: vec![SubsetVerdict {
            lost: Vec::new(),
            lost_names: Vec::new(),
            verdict: intact.clone(),
        }],
    };
    match intact.status {
        Status::Entangled => {}
        Status::Unknown => {
            report.unknown_at = Some(0);
            return Ok(report);
        }
        Status::Separable => {
            report.separable_at = Some(Vec::new());
            return Ok(report);
        }
    }
    let universe = match mode {
        LossMode::Party => own.num_parties(),
        LossMode::Particle => own.num_particles(),
    };
    let mut cap = universe.saturating_sub(2);
    if let Some(m) = max_loss {
        cap = cap.min(m);
    }
    for size in 1..=cap {
        let sets: Vec<Vec<usize>> = combinations(universe, size)
            .into_iter()
            .filter(|s| {
                let spec = LossSpec { mode, lost: s.clone() };
                spec.lost_particles(own).is_ok()
            })
            .collect();
        let results: Vec<Result<(Verdict, DensityMatrix, Ownership)>> = sets
            .par_iter()
            .map(|s| loss_verdict(state, own, &LossSpec { mode, lost: s.clone() }, opts))
            .collect();
        let mut first_sep = None;
        let mut unknown = false;
        for (set, r) in sets.into_iter().zip(results) {
            let (v, _, _) = r?;
            match v.status {
                Status::Separable if first_sep.is_none() => first_sep = Some(set.clone()),
                Status::Unknown => unknown = true,
                _ => {}
            }
            report.witness_trace.push(SubsetVerdict {
                lost_names: set_names(&set, own, mode),
                lost: set,
                verdict: v,
            });
        }
        report.max_size_checked = size;
        if let Some(set) = first_sep {
            report.depth = size - 1;
            report.separable_at = Some(set);
            return Ok(report);
        }
        if unknown {
            report.depth = size - 1;
            report.unknown_at = Some(size);
            return Ok(report);
        }
    }
    report.depth = cap;
    report.exhausted = true;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

/// A genuinely entangled pure state is LU-equivalent to a generalized GHZ
/// state iff every single-particle loss leaves a fully separable state.
pub fn ghz_characterization(psi: &PureState) -> Result<Answer> {
    let n = psi.dims().len();
    if n < 3 {
        return Err(Error::param("n", "the loss criterion needs at least 3 particles"));
    }
    let own = Ownership::singletons(n);
    if pure_gme(psi, &own)?.status != Status::Entangled {
        return Err(Error::NotGenuinelyEntangled);
    }
    let statuses: Vec<Status> = (0..n)
        .into_par_iter()
        .map(|j| {
            let red = partial_trace_pure(psi, &[j])?;
            Ok(fully_separable_proxy(&QuantumState::Mixed(red))?.status)
        })
        .collect::<Result<_>>()?;
    Ok(if statuses.iter().all(|s| *s == Status::Separable) {
        Answer::Yes
    } else if statuses.contains(&Status::Entangled) {
        Answer::No
    } else {
        Answer::Unknown
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricDecomposition {
    pub n: usize,
    pub d: usize,
    /// Weight of the constant strings `|j…j⟩`.
    pub ghz_beta: f64,
    /// Normalized amplitudes `α_j` of the constant strings.
    pub ghz_alphas: Vec<C64>,
    /// `(k, β_k)` for every excitation number with non-constant strings.
    pub betas: Vec<(usize, f64)>,
    /// Normalized generalized Dicke components for `β_k > 0`.
    pub components: Vec<(usize, PureState)>,
    pub reconstruction_error: f64,
}

/// Largest amplitude change under adjacent particle swaps.
pub fn symmetry_deviation(psi: &PureState) -> Result<f64> {
    let n = psi.dims().len();
    let mut worst: f64 = 0.0;
    for i in 0..n.saturating_sub(1) {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i, i + 1);
        let p = psi.permute(&perm)?;
        if p.dims() != psi.dims() {
            return Ok(f64::INFINITY);
        }
        for (a, b) in p.amps().iter().zip(psi.amps()) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// Splits a permutationally symmetric state into a GHZ part (constant
/// strings) plus one generalized Dicke state per excitation number.
pub fn symmetric_dicke_decompose(psi: &PureState) -> Result<SymmetricDecomposition> {
    let d = uniform_local_dim(psi.dims())
        .ok_or_else(|| Error::InvalidDims("symmetric states need equal local dimensions".into()))?;
    let dev = symmetry_deviation(psi)?;
    if dev > 1e-10 {
        return Err(Error::NotSymmetric(dev));
    }
    let dims = psi.dims();
    let n = dims.len();
    let repunit: usize = (0..n).fold(0, |acc, _| acc * d + 1);
    let constant: Vec<usize> = (0..d).map(|j| j * repunit).collect();
    let ghz_raw: Vec<C64> = constant.iter().map(|&i| psi.amps()[i]).collect();
    let ghz_beta = ghz_raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let ghz_alphas = if ghz_beta > 0.0 {
        ghz_raw.iter().map(|a| a / ghz_beta).collect()
    } else {
        vec![ZERO; d]
    };
    let mut recon = vec![ZERO; dims.total()];
    for (&i, a) in constant.iter().zip(&ghz_alphas) {
        recon[i] = a * ghz_beta;
    }
    let mut betas = Vec::new();
    let mut components = Vec::new();
    for k in 1..n * (d - 1) {
        let mut r = vec![ZERO; dims.total()];
        let mut any = false;
        for c in crate::states::compositions(n, d, k) {
            let idx = dims.index(&c);
            if constant.contains(&idx) {
                continue;
            }
            any = true;
            r[idx] = psi.amps()[idx];
        }
        if !any {
            continue;
        }
        let beta = r.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        betas.push((k, beta));
        if beta > 1e-14 {
            let comp = PureState::normalized(r, dims.clone())?;
            for (x, c) in recon.iter_mut().zip(comp.amps()) {
                *x += c * beta;
            }
            components.push((k, comp));
        }
    }
    let reconstruction_error = recon
        .iter()
        .zip(psi.amps())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(SymmetricDecomposition {
        n,
        d,
        ghz_beta,
        ghz_alphas,
        betas,
        components,
        reconstruction_error,
    })
}
