//! Quantum networks: parties holding particles of independent entangled
//! sources.
//!
//! ```json
//! {"parties": ["A1", "A2", "A3"],
//!  "sources": [{"state": {"family": "bipartite", "schmidt": [0.7071067811865476, 0.7071067811865476]},
//!               "assignment": {"0": "A1", "1": "A2"}}],
//!  "local_order": {"A2": [[1, 0], [0, 1]]}}
//! ```
//!
//! `local_order` lists a party's particles as `[source, particle]` pairs; by
//! default they follow source declaration order.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{lose_state, LossMode, LossSpec, Ownership};
use crate::error::{Error, Result};
use crate::schema::StateSpec;
use crate::tensor::{Dims, PureState, QuantumState};
use crate::witnesses::{
    biseparability_verdict_grouped, combinations, robustness_depth, DepthReport, Status, VerdictOptions,
};

/// Independent-set search enumerates subsets up to this many parties.
pub const MIS_MAX_PARTIES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub state: StateSpec,
    /// Particle index (as a string) → party name.
    pub assignment: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub parties: Vec<String>,
    pub sources: Vec<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_order: Option<BTreeMap<String, Vec<[usize; 2]>>>,
}

/// A validated network: each source's state and the owning party of each of
/// its particles.
#[derive(Clone, Debug)]
pub struct Network {
    pub parties: Vec<String>,
    pub sources: Vec<PureState>,
    pub bipartite: Vec<bool>,
    pub owner: Vec<Vec<usize>>,
    /// Particles of each party as `(source, particle)` in local order.
    pub holdings: Vec<Vec<(usize, usize)>>,
}

impl NetworkSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<Network> {
        if self.parties.len() < 2 {
            return Err(Error::network("parties", "a network needs at least two parties"));
        }
        for (i, p) in self.parties.iter().enumerate() {
            if self.parties[..i].contains(p) {
                return Err(Error::network("parties", format!("duplicate party {p}")));
            }
        }
        if self.sources.is_empty() {
            return Err(Error::network("sources", "a network needs at least one source"));
        }
        let party_index = |name: &str, field: &str| {
            self.parties
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| Error::network(field, format!("unknown party {name}")))
        };
        let mut sources = Vec::new();
        let mut bipartite = Vec::new();
        let mut owner = Vec::new();
        for (s, src) in self.sources.iter().enumerate() {
            let field = format!("sources[{s}].state");
            match &src.state {
                StateSpec::Bipartite { .. } => bipartite.push(true),
                StateSpec::Dicke { .. } => bipartite.push(false),
                other => {
                    return Err(Error::network(
                        field,
                        format!("sources must be bipartite or dicke, got {}", other.family()),
                    ))
                }
            }
            let psi = src
                .state
                .build()
                .map_err(|e| Error::network(field.clone(), e.to_string()))?;
            let n = psi.dims().len();
            let mut own = vec![usize::MAX; n];
            for (key, party) in &src.assignment {
                let f = format!("sources[{s}].assignment.{key}");
                let k: usize = key
                    .parse()
                    .map_err(|_| Error::network(&f, "particle keys are indices"))?;
                if k >= n {
                    return Err(Error::network(&f, format!("source has only {n} particles")));
                }
                own[k] = party_index(party, &f)?;
            }
            if let Some(k) = own.iter().position(|&o| o == usize::MAX) {
                return Err(Error::network(
                    format!("sources[{s}].assignment"),
                    format!("particle {k} is not assigned"),
                ));
            }
            sources.push(psi);
            owner.push(own);
        }
        let mut holdings: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.parties.len()];
        for (s, own) in owner.iter().enumerate() {
            for (k, &p) in own.iter().enumerate() {
                holdings[p].push((s, k));
            }
        }
        if let Some(order) = &self.local_order {
            for (name, list) in order {
                let f = format!("local_order.{name}");
                let p = party_index(name, &f)?;
                let mut given: Vec<(usize, usize)> = list.iter().map(|&[s, k]| (s, k)).collect();
                let mut expected = holdings[p].clone();
                let ordered = given.clone();
                given.sort_unstable();
                expected.sort_unstable();
                if given != expected {
                    return Err(Error::network(f, "must list exactly the party's particles"));
                }
                holdings[p] = ordered;
            }
        }
        for (p, h) in holdings.iter().enumerate() {
            if h.is_empty() {
                return Err(Error::network(
                    format!("parties.{}", self.parties[p]),
                    "party owns no particles",
                ));
            }
        }
        Ok(Network {
            parties: self.parties.clone(),
            sources,
            bipartite,
            owner,
            holdings,
        })
    }
}

/// Global state of a network with particles grouped by party.
#[derive(Clone, Debug)]
pub struct BuiltNetwork {
    /// Particle-level state; party `j` owns `ownership.particles[j]`.
    pub state: PureState,
    pub ownership: Ownership,
    /// `(source, particle)` of every subsystem of `state`.
    pub origin: Vec<(usize, usize)>,
}

impl BuiltNetwork {
    /// The same amplitudes with one composite subsystem per party.
    pub fn party_state(&self) -> Result<PureState> {
        let dims = Dims::new(self.ownership.party_dims(self.state.dims()))?;
        PureState::new(self.state.amps().to_vec(), dims)
    }
}

impl Network {
    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn num_particles(&self) -> usize {
        self.owner.iter().map(Vec::len).sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.sources.iter().map(|s| s.dims().total()).product()
    }

    pub fn build_state(&self, max_dim: usize) -> Result<BuiltNetwork> {
        let dim = self.ambient_dim();
        if dim > max_dim {
            return Err(Error::DimensionCap { dim, cap: max_dim });
        }
        let raw = self.sources[1..]
            .iter()
            .fold(self.sources[0].clone(), |acc, s| acc.kron(s));
        let mut offset = vec![0usize; self.sources.len()];
        for s in 1..self.sources.len() {
            offset[s] = offset[s - 1] + self.sources[s - 1].dims().len();
        }
        let mut perm = Vec::new();
        let mut origin = Vec::new();
        let mut particles = Vec::new();
        for h in &self.holdings {
            let mut mine = Vec::new();
            for &(s, k) in h {
                mine.push(perm.len());
                perm.push(offset[s] + k);
                origin.push((s, k));
            }
            particles.push(mine);
        }
        let state = raw.permute(&perm)?;
        let ownership = Ownership::new(self.parties.clone(), particles)?;
        Ok(BuiltNetwork { state, ownership, origin })
    }

    pub fn share_graph(&self) -> ShareGraph {
        let n = self.num_parties();
        let mut mult = vec![vec![0usize; n]; n];
        for own in &self.owner {
            let mut ps = own.clone();
            ps.sort_unstable();
            ps.dedup();
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    mult[a][b] += 1;
                    mult[b][a] += 1;
                }
            }
        }
        ShareGraph { mult }
    }
}

/// Parties as nodes, an edge for every pair sharing a source. Multiplicity
/// counts the shared sources.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareGraph {
    pub mult: Vec<Vec<usize>>,
}

impl ShareGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut mult = vec![vec![0usize; n]; n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::param("edges", format!("bad edge ({a},{b})")));
            }
            mult[a][b] += 1;
            mult[b][a] += 1;
        }
        Ok(ShareGraph { mult })
    }

    pub fn len(&self) -> usize {
        self.mult.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.mult[a][b] > 0
    }

    pub fn degree(&self, a: usize) -> usize {
        self.mult[a].iter().filter(|&&m| m > 0).count()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.len()).map(|a| self.degree(a)).min().unwrap_or(0)
    }

    pub fn is_complete(&self) -> bool {
        (0..self.len()).all(|a| self.degree(a) + 1 == self.len())
    }

    /// Connectivity of the subgraph induced by `nodes`.
    pub fn is_connected_on(&self, nodes: &[usize]) -> bool {
        let Some(&start) = nodes.first() else { return true };
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(a) = queue.pop_front() {
            for &b in nodes {
                if !seen[b] && self.adjacent(a, b) {
                    seen[b] = true;
                    count += 1;
                    queue.push_back(b);
                }
            }
        }
        count == nodes.len()
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.len()).collect();
        self.is_connected_on(&all)
    }

    /// Maximum independent set, lexicographically first among the largest.
    pub fn max_independent_set(&self) -> Result<Vec<usize>> {
        let n = self.len();
        if n > MIS_MAX_PARTIES {
            return Err(Error::param(
                "parties",
                format!("independent-set search is limited to {MIS_MAX_PARTIES} parties"),
            ));
        }
        let adj: Vec<u32> = (0..n)
            .map(|a| (0..n).filter(|&b| self.adjacent(a, b)).fold(0u32, |m, b| m | 1 << b))
            .collect();
        let mut best: Vec<usize> = Vec::new();
        for set in 1u32..(1u32 << n) {
            let size = set.count_ones() as usize;
            if size < best.len() {
                continue;
            }
            if (0..n).any(|a| set >> a & 1 == 1 && adj[a] & set != 0) {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|&a| set >> a & 1 == 1).collect();
            if size > best.len() || members < best {
                best = members;
            }
        }
        Ok(best)
    }

    /// Maximum number of pairwise edge-disjoint paths between `s` and `t`
    /// (unit capacity per shared source), by Edmonds–Karp max-flow.
    pub fn edge_disjoint_paths(&self, s: usize, t: usize) -> Result<usize> {
        let n = self.len();
        if s >= n || t >= n || s == t {
            return Err(Error::param("pair", "need two distinct existing parties"));
        }
        let mut cap = self.mult.clone();
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(a) = queue.pop_front() {
                if a == t {
                    break;
                }
                for b in 0..n {
                    if prev[b] == usize::MAX && cap[a][b] > 0 {
                        prev[b] = a;
                        queue.push_back(b);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return Ok(flow);
            }
            let mut b = t;
            while b != s {
                let a = prev[b];
                cap[a][b] -= 1;
                cap[b][a] += 1;
                b = a;
            }
            flow += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkClassification {
    pub parties: Vec<String>,
    pub num_particles: usize,
    pub edges: Vec<(String, String, usize)>,
    pub connected: bool,
    pub k_independence: usize,
    pub independent_set: Vec<String>,
    /// Some loss of the parties outside a 2+ independent set leaves a
    /// separable state.
    pub particle_lose_separable: bool,
    pub witness_loss_set: Option<Vec<String>>,
    pub completely_connected: bool,
    pub robust: bool,
    pub min_degree: usize,
    pub bipartite_sources_only: bool,
    /// `min_degree − 1` for connected networks of bipartite sources.
    pub predicted_depth: Option<usize>,
    /// Largest number of bipartite sources held by one party (the "at most
    /// k shared states" cap).
    pub source_cap_k: usize,
    pub depth_upper_bound: Option<usize>,
}

pub fn classify_network(net: &Network) -> Result<NetworkClassification> {
    let g = net.share_graph();
    let n = net.num_parties();
    let mis = g.max_independent_set()?;
    let names = |v: &[usize]| v.iter().map(|&i| net.parties[i].clone()).collect::<Vec<_>>();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if g.adjacent(a, b) {
                edges.push((net.parties[a].clone(), net.parties[b].clone(), g.mult[a][b]));
            }
        }
    }
    let k = mis.len();
    let pls = k >= 2;
    let witness_loss_set = pls.then(|| {
        let outside: Vec<usize> = (0..n).filter(|a| !mis.contains(a)).collect();
        names(&outside)
    });
    let bipartite_only = net.bipartite.iter().all(|&b| b);
    let connected = g.is_connected();
    let min_degree = g.min_degree();
    let predicted_depth = (bipartite_only && connected && min_degree >= 1).then(|| min_degree - 1);
    let source_cap_k = (0..n)
        .map(|p| {
            net.owner
                .iter()
                .zip(&net.bipartite)
                .filter(|(own, &b)| b && own.contains(&p))
                .count()
        })
        .max()
        .unwrap_or(0);
    let completely_connected = g.is_complete();
    Ok(NetworkClassification {
        parties: net.parties.clone(),
        num_particles: net.num_particles(),
        edges,
        connected,
        k_independence: k,
        independent_set: names(&mis),
        particle_lose_separable: pls,
        witness_loss_set,
        completely_connected,
        robust: completely_connected,
        min_degree,
        bipartite_sources_only: bipartite_only,
        predicted_depth,
        source_cap_k,
        depth_upper_bound: (bipartite_only && source_cap_k >= 1).then(|| source_cap_k - 1),
    })
}

/// One particle-level loss set checked against survivor connectivity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivorCheck {
    pub lost: Vec<usize>,
    pub status: Status,
    /// Graph on surviving parties with an edge for every intact source.
    pub source_connected: bool,
    /// The original share graph restricted to the surviving parties.
    pub share_graph_connected: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthCrosscheck {
    pub predicted_depth: Option<usize>,
    pub party: DepthReport,
    pub party_matches: bool,
    pub particle: Option<DepthReport>,
    pub survivors: Vec<SurvivorCheck>,
    /// Every survivor check agreed (only asserted for bipartite sources).
    pub survivors_consistent: bool,
}

fn survivor_graphs(net: &Network, built: &BuiltNetwork, lost: &[usize]) -> (Vec<usize>, bool, bool) {
    let n = net.num_parties();
    let own = &built.ownership;
    let alive: Vec<usize> = (0..n)
        .filter(|&p| own.particles[p].iter().any(|q| !lost.contains(q)))
        .collect();
    let mut broken = vec![false; net.sources.len()];
    for &q in lost {
        broken[built.origin[q].0] = true;
    }
    let mut edges = Vec::new();
    for (s, o) in net.owner.iter().enumerate() {
        if broken[s] {
            continue;
        }
        for (i, &a) in o.iter().enumerate() {
            for &b in &o[i + 1..] {
                if a != b {
                    edges.push((a, b));
                }
            }
        }
    }
    let sg = ShareGraph::from_edges(n, &edges).expect("edges come from the network");
    (alive.clone(), sg.is_connected_on(&alive), net.share_graph().is_connected_on(&alive))
}

/// Brute-force depths compared with the graph prediction, plus the
/// particle-level survivor-connectivity check over every admissible loss
/// set of at most `max_particle_loss` particles.
pub fn depth_crosscheck(
    net: &Network,
    max_dim: usize,
    max_particle_loss: Option<usize>,
    opts: &VerdictOptions,
) -> Result<DepthCrosscheck> {
    let built = net.build_state(max_dim)?;
    let class = classify_network(net)?;
    let state = QuantumState::Pure(built.state.clone());
    let own = &built.ownership;
    let party = robustness_depth(&state, own, LossMode::Party, None, opts)?;
    let party_matches = class.predicted_depth.is_none_or(|d| d == party.depth && party.intact_entangled);
    let mut particle = None;
    let mut survivors = Vec::new();
    if let Some(m) = max_particle_loss {
        particle = Some(robustness_depth(&state, own, LossMode::Particle, Some(m), opts)?);
        let total = own.num_particles();
        let cap = m.min(total.saturating_sub(2));
        let sets: Vec<Vec<usize>> = (1..=cap)
            .flat_map(|k| combinations(total, k))
            .filter(|s| LossSpec::particles(s.clone()).lost_particles(own).is_ok())
            .collect();
        survivors = sets
            .par_iter()
            .map(|lost| {
                let out = lose_state(&state, &LossSpec::particles(lost.clone()), own)?;
                let v = biseparability_verdict_grouped(&out.state.into(), &out.ownership, opts)?;
                let (_, source_connected, share_graph_connected) = survivor_graphs(net, &built, lost);
                let consistent = match v.status {
                    Status::Entangled => source_connected,
                    Status::Separable => !source_connected,
                    Status::Unknown => false,
                };
                Ok(SurvivorCheck {
                    lost: lost.clone(),
                    status: v.status,
                    source_connected,
                    share_graph_connected,
                    consistent,
                })
            })
            .collect::<Result<_>>()?;
    }
    let survivors_consistent = survivors.iter().all(|s| s.consistent);
    Ok(DepthCrosscheck {
        predicted_depth: class.predicted_depth,
        party,
        party_matches,
        particle,
        survivors,
        survivors_consistent,
    })
}

/// Ready-made networks of EPR pairs `(|00⟩+|11⟩)/√2`.
pub mod fixtures {
    use super::*;

    fn epr() -> StateSpec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateSpec::Bipartite { schmidt: vec![s, s] }
    }

    /// EPR pairs on the given party-index edges, parties named A1…An.
    pub fn epr_network(n: usize, edges: &[(usize, usize)]) -> NetworkSpec {
        let parties: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
        let sources = edges
            .iter()
            .map(|&(a, b)| SourceSpec {
                state: epr(),
                assignment: BTreeMap::from([
                    ("0".to_string(), parties[a].clone()),
                    ("1".to_string(), parties[b].clone()),
                ]),
            })
            .collect();
        NetworkSpec {
            parties,
            sources,
            local_order: None,
        }
    }

    pub fn chain(n: usize) -> NetworkSpec {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        epr_network(n, &edges)
    }

    pub fn cycle(n: usize) -> NetworkSpec {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        epr_network(n, &edges)
    }

    pub fn complete(n: usize) -> NetworkSpec {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        epr_network(n, &edges)
    }

    /// Triangle with sources S12, S23, S13 and local orders
    /// A1 = (S13, S12), A2 = (S12, S23), A3 = (S23, S13).
    pub fn triangle() -> NetworkSpec {
        let mut net = epr_network(3, &[(0, 1), (1, 2), (0, 2)]);
        net.local_order = Some(BTreeMap::from([
            ("A1".to_string(), vec![[2, 0], [0, 0]]),
            ("A2".to_string(), vec![[0, 1], [1, 0]]),
            ("A3".to_string(), vec![[1, 1], [2, 1]]),
        ]));
        net
    }

    /// Outer parties A1…An each sharing a pair with the center B.
    pub fn star(n: usize) -> NetworkSpec {
        let mut net = epr_network(n + 1, &(0..n).map(|i| (i, n)).collect::<Vec<_>>());
        net.parties[n] = "B".into();
        for s in &mut net.sources {
            s.assignment.insert("1".into(), "B".into());
        }
        net
    }

    pub fn square_with_diagonal() -> NetworkSpec {
        epr_network(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    }
}
