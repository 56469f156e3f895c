//! JSON state specifications.
//!
//! ```json
//! {"family": "w", "alpha": 0.6, "beta": 0.8, "gamma": 0.0}
//! {"family": "ghz", "n": 4, "theta": 0.5, "mix": 0.9}
//! {"family": "literal", "dims": [2, 4, 2], "amplitudes": {"000": 0.5, "011": [0.5, 0.0]},
//!  "parties": [{"name": "A", "particles": [0, 1]}, {"name": "B", "particles": [2]}]}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channels::Ownership;
use crate::error::{Error, Result};
use crate::states::{
    bipartite_pure, dicke, from_amplitudes, ghz, noisy_mix, parse_label, w_angles, w_state,
    DickeCoeffs, DickeParams, GhzParams,
};
use crate::tensor::{Dims, PureState, QuantumState, C64};

/// A real amplitude or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Amplitude> for C64 {
    fn from(a: Amplitude) -> C64 {
        match a {
            Amplitude::Real(r) => C64::new(r, 0.0),
            Amplitude::Complex([re, im]) => C64::new(re, im),
        }
    }
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum StateSpec {
    Ghz {
        n: usize,
        #[serde(default = "two")]
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    Dicke {
        n: usize,
        #[serde(default = "two")]
        d: usize,
        k: usize,
        /// Basis label → coefficient; must cover every string with `k` excitations.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coefficients: Option<BTreeMap<String, f64>>,
    },
    W {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<f64>,
    },
    Bipartite {
        schmidt: Vec<f64>,
    },
    Literal {
        dims: Vec<usize>,
        amplitudes: BTreeMap<String, Amplitude>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartySpec {
    pub name: String,
    pub particles: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    #[serde(flatten)]
    pub spec: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parties: Option<Vec<PartySpec>>,
    /// Visibility `v` of `v|ψ⟩⟨ψ| + (1−v)𝟙/D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<f64>,
}

impl StateSpec {
    pub fn family(&self) -> &'static str {
        match self {
            StateSpec::Ghz { .. } => "ghz",
            StateSpec::Dicke { .. } => "dicke",
            StateSpec::W { .. } => "w",
            StateSpec::Bipartite { .. } => "bipartite",
            StateSpec::Literal { .. } => "literal",
        }
    }

    pub fn build(&self) -> Result<PureState> {
        match self {
            StateSpec::Ghz { n, d, amplitudes, theta } => {
                let params = match (amplitudes, theta) {
                    (Some(_), Some(_)) => {
                        return Err(Error::schema("theta", "give either amplitudes or theta"))
                    }
                    (Some(a), None) => GhzParams { n: *n, d: *d, amplitudes: a.clone() },
                    (None, Some(t)) => {
                        if *d != 2 {
                            return Err(Error::schema("theta", "theta describes qubit GHZ states"));
                        }
                        GhzParams::qubit(*n, *t)
                    }
                    (None, None) => GhzParams {
                        n: *n,
                        d: *d,
                        amplitudes: vec![1.0 / (*d as f64).sqrt(); *d],
                    },
                };
                ghz(&params)
            }
            StateSpec::Dicke { n, d, k, coefficients } => {
                let coeffs = match coefficients {
                    None => DickeCoeffs::Uniform,
                    Some(map) => {
                        let dims = Dims::new(vec![*d; *n])?;
                        let mut out = BTreeMap::new();
                        for (label, &c) in map {
                            let idx = parse_label(label, &dims)
                                .map_err(|e| Error::schema(format!("coefficients.{label}"), e.to_string()))?;
                            out.insert(dims.digits(idx), c);
                        }
                        DickeCoeffs::Explicit(out)
                    }
                };
                dicke(&DickeParams { n: *n, d: *d, k: *k, coeffs })
            }
            StateSpec::W { alpha, beta, gamma, theta, phi } => match (alpha, beta, gamma, theta, phi) {
                (Some(a), Some(b), Some(g), None, None) => w_state(*a, *b, *g),
                (None, None, None, Some(t), Some(p)) => {
                    let (a, b, g) = w_angles(*t, *p);
                    w_state(a, b, g)
                }
                _ => Err(Error::schema("w", "give alpha, beta, gamma or theta, phi")),
            },
            StateSpec::Bipartite { schmidt } => bipartite_pure(schmidt),
            StateSpec::Literal { dims, amplitudes } => {
                let dims = Dims::new(dims.clone())?;
                let amps: BTreeMap<String, C64> =
                    amplitudes.iter().map(|(k, &v)| (k.clone(), v.into())).collect();
                from_amplitudes(dims, &amps)
            }
        }
    }
}

impl StateDoc {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn ownership(&self, n: usize) -> Result<Ownership> {
        match &self.parties {
            None => Ok(Ownership::singletons(n)),
            Some(ps) => {
                let total: usize = ps.iter().map(|p| p.particles.len()).sum();
                if total != n {
                    return Err(Error::schema(
                        "parties",
                        format!("parties own {total} particles but the state has {n}"),
                    ));
                }
                Ownership::new(
                    ps.iter().map(|p| p.name.clone()).collect(),
                    ps.iter().map(|p| p.particles.clone()).collect(),
                )
            }
        }
    }

    pub fn build(&self) -> Result<(QuantumState, Ownership)> {
        let psi = self.spec.build()?;
        let own = self.ownership(psi.dims().len())?;
        let state = match self.mix {
            None => QuantumState::Pure(psi),
            Some(v) => QuantumState::Mixed(noisy_mix(&psi, v)?),
        };
        Ok((state, own))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_each_family() {
        let cases = [
            (r#"{"family":"ghz","n":3}"#, 8),
            (r#"{"family":"ghz","n":2,"d":3,"amplitudes":[0.6,0.0,0.8]}"#, 9),
            (r#"{"family":"dicke","n":4,"k":2}"#, 16),
            (r#"{"family":"w","theta":0.9,"phi":0.3}"#, 8),
            (r#"{"family":"bipartite","schmidt":[0.6,0.8]}"#, 4),
            (r#"{"family":"literal","dims":[2,3],"amplitudes":{"00":[0.0,1.0]}}"#, 6),
        ];
        for (text, dim) in cases {
            let doc = StateDoc::parse(text).unwrap();
            let (s, own) = doc.build().unwrap();
            assert_eq!(s.dims().total(), dim, "{text}");
            assert_eq!(own.num_particles(), s.dims().len());
        }
    }

    #[test]
    fn mix_and_parties() {
        let doc = StateDoc::parse(
            r#"{"family":"ghz","n":3,"theta":0.785398,"mix":0.5,
                "parties":[{"name":"A","particles":[0,2]},{"name":"B","particles":[1]}]}"#,
        )
        .unwrap();
        let (s, own) = doc.build().unwrap();
        assert!(!s.is_pure());
        assert_abs_diff_eq!(s.purity(), 0.34375, epsilon = 1e-12);
        assert_eq!(own.particles, vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn schema_errors_name_their_location() {
        let e = StateDoc::parse("{\"family\":\"ghz\",\n\"n\":\"three\"}").unwrap_err();
        assert_eq!(e.line(), Some(2));
        let e = StateDoc::parse(r#"{"family":"w","alpha":1.0}"#).unwrap().build().unwrap_err();
        assert_eq!(e.field(), Some("w"));
        let e = StateDoc::parse(
            r#"{"family":"ghz","n":3,"parties":[{"name":"A","particles":[0]}]}"#,
        )
        .unwrap()
        .build()
        .unwrap_err();
        assert_eq!(e.field(), Some("parties"));
    }
}
