//! Particle-loss channels.
//!
//! Losing a party means losing every particle it owns, so both loss modes run
//! through one particle-level partial trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, DensityMatrix, Dims, QuantumState, C64, ONE};

/// Which parties own which particles (subsystem indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ownership {
    pub names: Vec<String>,
    pub particles: Vec<Vec<usize>>,
}

impl Ownership {
    pub fn new(names: Vec<String>, particles: Vec<Vec<usize>>) -> Result<Self> {
        if names.len() != particles.len() {
            return Err(Error::param("parties", "one particle list per party name"));
        }
        let total: usize = particles.iter().map(Vec::len).sum();
        let mut seen = vec![false; total];
        for (name, ps) in names.iter().zip(&particles) {
            if ps.is_empty() {
                return Err(Error::param(
                    format!("parties.{name}"),
                    "party owns no particles",
                ));
            }
            for &p in ps {
                if p >= total || seen[p] {
                    return Err(Error::param(
                        format!("parties.{name}"),
                        format!("particle {p} is out of range or owned twice"),
                    ));
                }
                seen[p] = true;
            }
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::param("parties", format!("duplicate party name {name}")));
            }
        }
        Ok(Ownership { names, particles })
    }

    /// One particle per party, named A1, A2, ….
    pub fn singletons(n: usize) -> Self {
        Ownership {
            names: (1..=n).map(|i| format!("A{i}")).collect(),
            particles: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn num_parties(&self) -> usize {
        self.names.len()
    }

    pub fn num_particles(&self) -> usize {
        self.particles.iter().map(Vec::len).sum()
    }

    pub fn party_of(&self, particle: usize) -> Option<usize> {
        self.particles.iter().position(|ps| ps.contains(&particle))
    }

    pub fn party_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Composite dimension of each party.
    pub fn party_dims(&self, dims: &Dims) -> Vec<usize> {
        self.particles
            .iter()
            .map(|ps| ps.iter().map(|&p| dims.as_slice()[p]).product())
            .collect()
    }

    pub fn check_dims(&self, dims: &Dims) -> Result<()> {
        if self.num_particles() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "ownership covers {} particles, state has {} subsystems",
                self.num_particles(),
                dims.len()
            )));
        }
        Ok(())
    }

    /// Ownership restricted to the `kept` particles, renumbered in kept order.
    /// Parties left without particles are dropped.
    pub fn restrict(&self, kept: &[usize]) -> Ownership {
        let mut names = Vec::new();
        let mut particles = Vec::new();
        for (name, ps) in self.names.iter().zip(&self.particles) {
            let mut now: Vec<usize> = ps
                .iter()
                .filter_map(|p| kept.iter().position(|k| k == p))
                .collect();
            now.sort_unstable();
            if !now.is_empty() {
                names.push(name.clone());
                particles.push(now);
            }
        }
        Ownership { names, particles }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    Party,
    Particle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossSpec {
    pub mode: LossMode,
    pub lost: Vec<usize>,
}

impl LossSpec {
    pub fn parties(lost: Vec<usize>) -> Self {
        LossSpec {
            mode: LossMode::Party,
            lost,
        }
    }

    pub fn particles(lost: Vec<usize>) -> Self {
        LossSpec {
            mode: LossMode::Particle,
            lost,
        }
    }

    /// Checks the admissibility bounds and returns the lost particles, sorted.
    pub fn lost_particles(&self, own: &Ownership) -> Result<Vec<usize>> {
        let mut lost = self.lost.clone();
        lost.sort_unstable();
        if lost.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubsystems(format!("repeated index in {:?}", self.lost)));
        }
        match self.mode {
            LossMode::Party => {
                let n = own.num_parties();
                if let Some(&bad) = lost.iter().find(|&&p| p >= n) {
                    return Err(Error::InvalidSubsystems(format!(
                        "party {bad} out of range for {n} parties"
                    )));
                }
                if lost.len() + 2 > n {
                    return Err(Error::LossBound {
                        rule: "party-level (at most n-2 parties)",
                        detail: format!("{} of {n} parties lost", lost.len()),
                    });
                }
                let mut ps: Vec<usize> = lost
                    .iter()
                    .flat_map(|&p| own.particles[p].iter().copied())
                    .collect();
                ps.sort_unstable();
                Ok(ps)
            }
            LossMode::Particle => {
                let total = own.num_particles();
                if let Some(&bad) = lost.iter().find(|&&p| p >= total) {
                    return Err(Error::InvalidSubsystems(format!(
                        "particle {bad} out of range for {total} particles"
                    )));
                }
                if lost.len() + 2 > total {
                    return Err(Error::LossBound {
                        rule: "particle-level (at most N-2 particles)",
                        detail: format!("{} of {total} particles lost", lost.len()),
                    });
                }
                let spanned = own
                    .particles
                    .iter()
                    .filter(|ps| ps.iter().any(|p| !lost.contains(p)))
                    .count();
                if spanned < 2 {
                    return Err(Error::LossBound {
                        rule: "particle-level (survivors must span two parties)",
                        detail: format!("survivors of {:?} belong to {spanned} party", self.lost),
                    });
                }
                Ok(lost)
            }
        }
    }
}

/// Reduced state plus the bookkeeping needed to interpret it.
#[derive(Clone, Debug)]
pub struct LossOutcome {
    pub state: DensityMatrix,
    pub ownership: Ownership,
    /// `kept[i]` is the original index of surviving particle `i`.
    pub kept: Vec<usize>,
}

pub fn lose_state(state: &QuantumState, spec: &LossSpec, own: &Ownership) -> Result<LossOutcome> {
    own.check_dims(state.dims())?;
    let lost = spec.lost_particles(own)?;
    let kept = state.dims().complement(&lost);
    let reduced = if lost.is_empty() {
        state.to_density()
    } else {
        state.partial_trace(&lost)?
    };
    Ok(LossOutcome {
        state: reduced,
        ownership: own.restrict(&kept),
        kept,
    })
}

pub fn lose(rho: &DensityMatrix, spec: &LossSpec, own: &Ownership) -> Result<LossOutcome> {
    lose_state(&QuantumState::Mixed(rho.clone()), spec, own)
}

/// Kraus operators `⟨j|_S ⊗ 𝟙` of the channel that traces out `lost`.
pub fn kraus_of_loss(dims: &Dims, lost: &[usize]) -> Result<Vec<CMatrix>> {
    let mut lost = lost.to_vec();
    lost.sort_unstable();
    lost.dedup();
    if let Some(&bad) = lost.iter().find(|&&i| i >= dims.len()) {
        return Err(Error::InvalidSubsystems(format!("index {bad} out of range")));
    }
    if lost.len() == dims.len() {
        return Err(Error::EmptyRemainder);
    }
    let keep = dims.complement(&lost);
    let ko = dims.offsets(&keep);
    let to = dims.offsets(&lost);
    Ok(to
        .iter()
        .map(|&t| {
            let mut e = CMatrix::zeros(ko.len(), dims.total());
            for (a, &o) in ko.iter().enumerate() {
                e[(a, o + t)] = ONE;
            }
            e
        })
        .collect())
}

/// `Σ E ρ E†` landing on `out_dims`.
pub fn apply_kraus(rho: &DensityMatrix, ops: &[CMatrix], out_dims: Dims) -> Result<DensityMatrix> {
    let d = out_dims.total();
    let mut acc = CMatrix::zeros(d, d);
    for e in ops {
        if e.nrows() != d || e.ncols() != rho.dim() {
            return Err(Error::DimensionMismatch("Kraus operator shape".into()));
        }
        acc += e * rho.mat() * e.adjoint();
    }
    let tr = acc.trace();
    if (tr - C64::from(1.0)).norm() > 1e-9 {
        return Err(Error::Trace(tr.re));
    }
    Ok(DensityMatrix::unchecked(acc, out_dims))
}

/// Largest entrywise deviation of `Σ E†E` from the identity.
pub fn completeness_deviation(ops: &[CMatrix]) -> f64 {
    let Some(first) = ops.first() else {
        return f64::INFINITY;
    };
    let d = first.ncols();
    let mut acc = CMatrix::zeros(d, d);
    for e in ops {
        acc += e.adjoint() * e;
    }
    (acc - CMatrix::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
