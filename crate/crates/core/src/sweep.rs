//! Parameter sweeps producing figure data. Points are evaluated in parallel
//! and emitted in grid order with fixed formatting, so reruns are
//! byte-identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{lose_state, LossSpec, Ownership};
use crate::error::{Error, Result};
use crate::inequalities::{
    chsh_max_over, multipartite_witness_lhs, nonlinear2_framed, octant_grid, svetlichny_w_visibility_grid,
    w_reductions, witness_visibility_threshold, PlaneChoice, WitnessForm,
};
use crate::states::{dicke, ghz, w_angles, DickeParams, GhzParams};
use crate::tensor::{partial_trace_pure, Bipartition, QuantumState};
use crate::witnesses::{
    combinations, particle_lose_separable, ppt_verdict, robustness_depth, FrameSet, VerdictOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    WNonlinear,
    ChshPlanes,
    SvetlichnyVisibility,
    GhzFamily,
    DickeFamily,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: SweepFamily,
    pub theta_steps: usize,
    pub phi_steps: usize,
    pub plane: PlaneChoice,
    /// Resolution of the 1-D optimizers.
    pub resolution: usize,
    pub frames: FrameSet,
    pub n_min: usize,
    pub n_max: usize,
    pub d_max: usize,
}

impl SweepConfig {
    pub fn new(family: SweepFamily) -> Self {
        SweepConfig {
            family,
            theta_steps: 50,
            phi_steps: 50,
            plane: PlaneChoice::Both,
            resolution: 2048,
            frames: FrameSet::default(),
            n_min: 3,
            n_max: 5,
            d_max: 3,
        }
    }

    fn check(&self) -> Result<()> {
        if self.theta_steps < 2 || self.phi_steps < 2 {
            return Err(Error::param("grid", "at least 2 steps per axis"));
        }
        if self.n_min < 3 || self.n_max < self.n_min {
            return Err(Error::param("n", "need 3 <= n_min <= n_max"));
        }
        if self.d_max < 2 {
            return Err(Error::param("d", "local dimension at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(x) if x.is_nan() => "NaN".into(),
            Cell::Real(x) => format!("{x}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Real(x) if !x.is_finite() => "null".into(),
            Cell::Real(x) => format!("{x:?}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serializes"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Array of row objects with keys in column order; non-finite reals are `null`.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, r) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(r)
                .map(|(c, v)| format!("\"{c}\":{}", v.json()))
                .collect();
            out.push_str("  {");
            out.push_str(&fields.join(","));
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

fn octant_points(cfg: &SweepConfig) -> Result<Vec<(f64, f64)>> {
    let thetas = octant_grid(cfg.theta_steps)?;
    let phis = octant_grid(cfg.phi_steps)?;
    Ok(thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| (t, p)))
        .collect())
}

fn w_rows<F>(cfg: &SweepConfig, row: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(f64, f64) -> Result<Vec<Cell>> + Sync,
{
    octant_points(cfg)?.par_iter().map(|&(t, p)| row(t, p)).collect()
}

fn triple_row(theta: f64, phi: f64, values: [f64; 3], flag: bool) -> Vec<Cell> {
    let mut r = vec![Cell::Real(theta), Cell::Real(phi)];
    r.extend(values.iter().map(|&v| Cell::Real(v)));
    r.push(Cell::Bool(flag));
    r
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Table> {
    cfg.check()?;
    let triple = vec!["theta", "phi", "value_A1", "value_A2", "value_A3", "flag"];
    match cfg.family {
        SweepFamily::WNonlinear => {
            let rows = w_rows(cfg, |theta, phi| {
                let (a, b, g) = w_angles(theta, phi);
                let reds = w_reductions(a, b, g)?;
                let mut v = [0.0; 3];
                for (x, r) in v.iter_mut().zip(&reds) {
                    *x = nonlinear2_framed(r, &cfg.frames)?.0;
                }
                let flag = v.iter().all(|&x| x > crate::WITNESS_THRESHOLD);
                Ok(triple_row(theta, phi, v, flag))
            })?;
            Ok(Table { columns: triple, rows })
        }
        SweepFamily::ChshPlanes => {
            let rows = w_rows(cfg, |theta, phi| {
                let (a, b, g) = w_angles(theta, phi);
                let reds = w_reductions(a, b, g)?;
                let mut v = [0.0; 3];
                for (x, r) in v.iter_mut().zip(&reds) {
                    *x = chsh_max_over(r, cfg.plane, cfg.resolution)?.value;
                }
                Ok(triple_row(theta, phi, v, v.iter().all(|&x| x > 2.0)))
            })?;
            Ok(Table { columns: triple, rows })
        }
        SweepFamily::SvetlichnyVisibility => {
            let rows = w_rows(cfg, |theta, phi| {
                let (a, b, g) = w_angles(theta, phi);
                let sv = svetlichny_w_visibility_grid(a, b, g, cfg.resolution)?.visibility;
                let reds = w_reductions(a, b, g)?;
                let mut v = [f64::NAN; 3];
                for (x, r) in v.iter_mut().zip(&reds) {
                    if let Some(t) = witness_visibility_threshold(r, &cfg.frames)? {
                        *x = t;
                    }
                }
                let flag = v.iter().all(|&x| x < sv);
                let mut row = vec![Cell::Real(theta), Cell::Real(phi), Cell::Real(sv)];
                row.extend(v.iter().map(|&x| Cell::Real(x)));
                row.push(Cell::Bool(flag));
                Ok(row)
            })?;
            Ok(Table {
                columns: vec!["theta", "phi", "v_svetlichny", "value_A1", "value_A2", "value_A3", "flag"],
                rows,
            })
        }
        SweepFamily::GhzFamily => {
            let thetas = octant_grid(cfg.theta_steps)?;
            let points: Vec<(usize, f64)> = (cfg.n_min..=cfg.n_max)
                .flat_map(|n| thetas.iter().map(move |&t| (n, t)))
                .collect();
            let opts = VerdictOptions::default();
            let rows = points
                .par_iter()
                .map(|&(n, theta)| {
                    let psi = ghz(&GhzParams::qubit(n, theta))?;
                    let witness = multipartite_witness_lhs(&psi.projector(), WitnessForm::Density)?;
                    let mut min_npt = f64::INFINITY;
                    for j in 0..n {
                        let red = partial_trace_pure(&psi, &[j])?;
                        for cut in Bipartition::all(n - 1) {
                            min_npt = min_npt.min(ppt_verdict(&red, &cut)?.min_eig);
                        }
                    }
                    let pls = particle_lose_separable(&psi.into(), &Ownership::singletons(n), &opts)?;
                    Ok(vec![
                        Cell::Int(n),
                        Cell::Real(theta),
                        Cell::Real(witness),
                        Cell::Real(min_npt),
                        Cell::Text(status_word(pls.status).into()),
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(Table {
                columns: vec!["n", "theta", "density_witness", "min_reduction_npt", "particle_lose_separable"],
                rows,
            })
        }
        SweepFamily::DickeFamily => {
            let mut points = Vec::new();
            for n in cfg.n_min..=cfg.n_max {
                for d in 2..=cfg.d_max {
                    for k in 1..=3usize.min(n * (d - 1) - 1) {
                        points.push((n, d, k));
                    }
                }
            }
            let opts = VerdictOptions::default();
            let rows = points
                .par_iter()
                .map(|&(n, d, k)| {
                    let psi = dicke(&DickeParams::uniform(n, d, k))?;
                    let state = QuantumState::Pure(psi);
                    let own = Ownership::singletons(n);
                    let mut worst = f64::NEG_INFINITY;
                    for size in 1..=n - 2 {
                        for lost in combinations(n, size) {
                            let red = lose_state(&state, &LossSpec::parties(lost), &own)?.state;
                            for cut in Bipartition::all(n - size) {
                                worst = worst.max(ppt_verdict(&red, &cut)?.min_eig);
                            }
                        }
                    }
                    let depth = robustness_depth(&state, &own, crate::channels::LossMode::Party, None, &opts)?;
                    Ok(vec![
                        Cell::Int(n),
                        Cell::Int(d),
                        Cell::Int(k),
                        Cell::Real(worst),
                        Cell::Int(depth.depth),
                        Cell::Bool(depth.exhausted),
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(Table {
                columns: vec!["n", "d", "k", "max_reduction_min_eig", "depth", "robust"],
                rows,
            })
        }
    }
}

fn status_word(s: crate::witnesses::Status) -> &'static str {
    match s {
        crate::witnesses::Status::Separable => "separable",
        crate::witnesses::Status::Entangled => "entangled",
        crate::witnesses::Status::Unknown => "unknown",
    }
}
