use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use entloss::channels::LossMode;
use entloss::inequalities::{
    multipartite_witness_report, nonlinear2_density_lhs, nonlinear2_framed, nonlinear2_lhs,
    qudit_witness_report, PlaneChoice,
};
use entloss::network::{classify_network, depth_crosscheck, NetworkSpec};
use entloss::schema::StateDoc;
use entloss::states::uniform_local_dim;
use entloss::statefile::{read_state, state_to_bytes, Encoding};
use entloss::sweep::{run_sweep, OutputFormat, SweepConfig, SweepFamily};
use entloss::tensor::Bipartition;
use entloss::witnesses::{
    best_density_witness, biseparability_verdict_grouped, fully_separable_proxy, ghz_characterization,
    particle_lose_separable, ppt_verdict_with, robustness_depth, symmetric_dicke_decompose, FrameFamily,
    FrameSet, LocalFrame, Status,
};
use entloss::{CMatrix, Error, LossSpec, Ownership, QuantumState, VerdictOptions, C64};

#[derive(Parser)]
#[command(name = "entloss", version, about = "Entanglement under particle loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct AnalysisFlags {
    /// Threshold for NPT eigenvalues and witness values.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Local frames for the density witness: bitflip, identity, or a JSON file.
    #[arg(long, default_value = "bitflip")]
    frames: String,
    /// Largest ambient dimension accepted.
    #[arg(long, default_value_t = 4096)]
    max_dim: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Party,
    Particle,
}

impl From<Mode> for LossMode {
    fn from(m: Mode) -> LossMode {
        match m {
            Mode::Party => LossMode::Party,
            Mode::Particle => LossMode::Particle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StateEncoding {
    Bin,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlaneArg {
    Xy,
    Xz,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum FamilyArg {
    WNonlinear,
    ChshPlanes,
    SvetlichnyVisibility,
    GhzFamily,
    DickeFamily,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state from a state or network specification and write a state file.
    Build {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "bin")]
        format: StateEncoding,
        #[arg(long, default_value_t = 4096)]
        max_dim: usize,
    },
    /// Trace out parties or particles and write the reduced state.
    ApplyLoss {
        input: PathBuf,
        /// Comma-separated party names or particle indices.
        #[arg(long)]
        lose: String,
        #[arg(long, value_enum, default_value = "party")]
        mode: Mode,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "bin")]
        format: StateEncoding,
    },
    /// Particle-lose separability and robustness depth.
    Analyze {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "party")]
        mode: Mode,
        #[arg(long)]
        max_loss: Option<usize>,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// Verdicts and witness values for one state.
    Witness {
        input: PathBuf,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// Graph criteria for a network, optionally with brute-force depth checks.
    Network {
        spec: PathBuf,
        #[arg(long)]
        crosscheck: bool,
        /// Particle-level loss sets up to this size in the cross-check.
        #[arg(long)]
        max_loss: Option<usize>,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// Parameter sweeps for figure data.
    Sweep {
        #[arg(value_enum)]
        family: FamilyArg,
        /// Grid as THETAxPHI, or one number for both.
        #[arg(long, default_value = "50x50")]
        grid: String,
        #[arg(long, value_enum, default_value = "both")]
        plane: PlaneArg,
        /// Grid resolution of the 1-D optimizers.
        #[arg(long, default_value_t = 2048)]
        resolution: usize,
        #[arg(long, default_value = "bitflip")]
        frames: String,
        #[arg(long, default_value_t = 3)]
        n_min: usize,
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        d_max: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(short, long)]
        output: PathBuf,
    },
}

enum Failure {
    Input(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type CliResult = Result<ExitCode, Failure>;

fn report(f: &Failure) {
    let v = match f {
        Failure::Input(e) => json!({
            "error": e.kind(),
            "message": e.to_string(),
            "field": e.field(),
            "line": e.line(),
        }),
        Failure::Usage(m) => json!({"error": "usage", "message": m, "field": null, "line": null}),
    };
    eprintln!("{v}");
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| {
        Failure::Input(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| {
        Failure::Input(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    })
}

fn is_state_file(bytes: &[u8]) -> bool {
    bytes.starts_with(b"# ") || bytes.starts_with(b"{\"format\":\"entloss-state\"")
}

/// Loads a state file, a state specification or a network specification.
fn load(path: &Path, max_dim: usize) -> Result<(QuantumState, Ownership), Failure> {
    let bytes = read_bytes(path)?;
    let (state, own) = if is_state_file(&bytes) {
        read_state(&bytes)?
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Failure::Usage("input is not UTF-8".into()))?;
        let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
        if value.get("sources").is_some() {
            let net = NetworkSpec::parse(&text)?.validate()?;
            let built = net.build_state(max_dim)?;
            (QuantumState::Pure(built.state), built.ownership)
        } else {
            StateDoc::parse(&text)?.build()?
        }
    };
    let dim = state.dims().total();
    if dim > max_dim {
        return Err(Error::DimensionCap { dim, cap: max_dim }.into());
    }
    Ok((state, own))
}

fn parse_frames(spec: &str) -> Result<FrameSet, Failure> {
    match spec {
        "bitflip" => Ok(FrameSet::default()),
        "identity" => Ok(FrameSet::identity()),
        path => {
            let text = String::from_utf8(read_bytes(Path::new(path))?)
                .map_err(|_| Failure::Usage("frames file is not UTF-8".into()))?;
            let v: Value = serde_json::from_str(&text).map_err(Error::from)?;
            let bad = |field: String, why: &str| Failure::Input(Error::schema(field, why));
            let list = v.as_array().ok_or_else(|| bad("frames".into(), "expected an array"))?;
            let mut custom = Vec::new();
            for (i, f) in list.iter().enumerate() {
                let name = f["name"].as_str().unwrap_or("custom").to_string();
                let us = f["unitaries"]
                    .as_array()
                    .ok_or_else(|| bad(format!("frames[{i}].unitaries"), "expected an array"))?;
                let mut mats = Vec::new();
                for (j, u) in us.iter().enumerate() {
                    let field = format!("frames[{i}].unitaries[{j}]");
                    let mut entries = Vec::new();
                    for row in u.as_array().into_iter().flatten() {
                        for z in row.as_array().into_iter().flatten() {
                            let c = match z {
                                Value::Number(x) => C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0),
                                Value::Array(p) if p.len() == 2 => C64::new(
                                    p[0].as_f64().unwrap_or(f64::NAN),
                                    p[1].as_f64().unwrap_or(f64::NAN),
                                ),
                                _ => return Err(bad(field, "entries are numbers or [re, im]")),
                            };
                            entries.push(c);
                        }
                    }
                    if entries.len() != 4 {
                        return Err(bad(field, "expected a 2x2 matrix"));
                    }
                    mats.push(CMatrix::from_row_slice(2, 2, &entries));
                }
                custom.push(LocalFrame::new(name, mats)?);
            }
            Ok(FrameSet {
                family: FrameFamily::BitFlips,
                custom,
            })
        }
    }
}

fn options(flags: &AnalysisFlags) -> Result<VerdictOptions, Failure> {
    if !(flags.tolerance >= 0.0) {
        return Err(Error::param("tolerance", "must be nonnegative").into());
    }
    Ok(VerdictOptions {
        npt_threshold: flags.tolerance,
        witness_threshold: flags.tolerance,
        frames: parse_frames(&flags.frames)?,
        ..VerdictOptions::default()
    })
}

fn print(v: &Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("JSON value serializes");
    // a closed pipe downstream is not an error for us
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serializes")
}

fn encoding(e: StateEncoding) -> Encoding {
    match e {
        StateEncoding::Bin => Encoding::Bin,
        StateEncoding::Csv => Encoding::Csv,
    }
}

fn summary(state: &QuantumState, own: &Ownership) -> Value {
    json!({
        "kind": if state.is_pure() { "pure" } else { "density" },
        "dims": state.dims().as_slice(),
        "party_dims": own.party_dims(state.dims()),
        "parties": own.names,
        "particles": own.particles,
        "norm": match state {
            QuantumState::Pure(p) => p.amps().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            QuantumState::Mixed(m) => m.mat().trace().re,
        },
        "trace": state.to_density().mat().trace().re,
        "purity": state.purity(),
    })
}

fn cmd_build(spec: &Path, output: &Path, format: StateEncoding, max_dim: usize) -> CliResult {
    let (state, own) = load(spec, max_dim)?;
    write_bytes(output, &state_to_bytes(&state, &own, encoding(format))?)?;
    print(&summary(&state, &own));
    Ok(ExitCode::SUCCESS)
}

fn cmd_apply_loss(input: &Path, lose: &str, mode: Mode, output: &Path, format: StateEncoding) -> CliResult {
    let (state, own) = load(input, usize::MAX)?;
    let items: Vec<&str> = lose.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let spec = match mode {
        Mode::Party => {
            let mut idx = Vec::new();
            for name in items {
                idx.push(
                    own.party_index(name)
                        .ok_or_else(|| Error::param("lose", format!("unknown party {name}")))?,
                );
            }
            LossSpec::parties(idx)
        }
        Mode::Particle => {
            let mut idx = Vec::new();
            for s in items {
                idx.push(
                    s.parse::<usize>()
                        .map_err(|_| Error::param("lose", format!("{s} is not a particle index")))?,
                );
            }
            LossSpec::particles(idx)
        }
    };
    let out = entloss::lose_state(&state, &spec, &own)?;
    let reduced = QuantumState::Mixed(out.state);
    write_bytes(output, &state_to_bytes(&reduced, &out.ownership, encoding(format))?)?;
    print(&summary(&reduced, &out.ownership));
    Ok(ExitCode::SUCCESS)
}

fn exit_for(unknown: bool) -> ExitCode {
    if unknown {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_analyze(input: &Path, mode: Mode, max_loss: Option<usize>, flags: &AnalysisFlags) -> CliResult {
    let opts = options(flags)?;
    let (state, own) = load(input, flags.max_dim)?;
    let intact = biseparability_verdict_grouped(&state, &own, &opts)?;
    let pls = if own.num_parties() >= 3 {
        Some(particle_lose_separable(&state, &own, &opts)?)
    } else {
        None
    };
    let depth = robustness_depth(&state, &own, mode.into(), max_loss, &opts)?;
    let unknown = intact.status == Status::Unknown
        || pls.as_ref().is_some_and(|p| p.status == Status::Unknown)
        || depth.unknown_at.is_some();
    let mut depth_json = to_value(&depth);
    depth_json["definition_k"] = json!(depth.definition_k());
    print(&json!({
        "parties": own.names,
        "dims": state.dims().as_slice(),
        "intact": intact,
        "particle_lose_separable": pls,
        "robustness_depth": depth_json,
    }));
    Ok(exit_for(unknown))
}

fn cmd_witness(input: &Path, flags: &AnalysisFlags) -> CliResult {
    let opts = options(flags)?;
    let (state, own) = load(input, flags.max_dim)?;
    let rho = state.to_density();
    let mut cuts = Vec::new();
    for cut in Bipartition::all(own.num_parties()) {
        let part = cut.expand(&own.particles);
        let v = ppt_verdict_with(&rho, &part, opts.npt_threshold)?;
        let l: Vec<&str> = cut.left.iter().map(|&i| own.names[i].as_str()).collect();
        let r: Vec<&str> = cut.right.iter().map(|&i| own.names[i].as_str()).collect();
        cuts.push(json!({"cut": format!("{}|{}", l.join(","), r.join(",")), "min_eig": v.min_eig, "npt": v.npt, "exact": v.exact}));
    }
    let gme = biseparability_verdict_grouped(&state, &own, &opts)?;
    let full = fully_separable_proxy(&state)?;
    let mut out = json!({
        "dims": state.dims().as_slice(),
        "parties": own.names,
        "ppt": cuts,
        "biseparability": gme,
        "full_separability": full,
    });
    let dims = rho.dims();
    if dims.all_qubits() {
        let (v, frame) = best_density_witness(&rho, &opts.frames)?;
        out["density_witness"] = json!({"value": v, "frame": frame});
        out["multipartite_forms"] = to_value(&multipartite_witness_report(&rho)?);
        if dims.len() == 2 {
            let (f, frame) = nonlinear2_framed(&rho, &opts.frames)?;
            out["nonlinear2"] = json!({
                "lhs": nonlinear2_lhs(&rho)?,
                "density_lhs": nonlinear2_density_lhs(&rho)?,
                "framed": f,
                "frame": frame,
            });
        }
    } else if uniform_local_dim(dims).is_some() {
        out["qudit"] = to_value(&qudit_witness_report(&rho)?);
    }
    if let QuantumState::Pure(psi) = &state {
        if dims.len() >= 3 {
            out["ghz_characterization"] = match ghz_characterization(psi) {
                Ok(a) => to_value(&a),
                Err(e) => json!({"not_applicable": e.to_string()}),
            };
        }
        if let Ok(dec) = symmetric_dicke_decompose(psi) {
            out["symmetric_decomposition"] = json!({
                "ghz_beta": dec.ghz_beta,
                "betas": dec.betas,
                "reconstruction_error": dec.reconstruction_error,
            });
        }
    }
    print(&out);
    Ok(exit_for(gme.status == Status::Unknown))
}

fn cmd_network(spec: &Path, crosscheck: bool, max_loss: Option<usize>, flags: &AnalysisFlags) -> CliResult {
    let opts = options(flags)?;
    let text = String::from_utf8(read_bytes(spec)?).map_err(|_| Failure::Usage("input is not UTF-8".into()))?;
    let net = NetworkSpec::parse(&text)?.validate()?;
    let mut out = json!({"classification": classify_network(&net)?});
    let mut unknown = false;
    if crosscheck {
        let x = depth_crosscheck(&net, flags.max_dim, max_loss, &opts)?;
        unknown = x.party.unknown_at.is_some() || x.survivors.iter().any(|s| s.status == Status::Unknown);
        out["crosscheck"] = to_value(&x);
    }
    print(&out);
    Ok(exit_for(unknown))
}

fn parse_grid(grid: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Input(Error::param("grid", format!("expected N or NxM, got {grid}")));
    let (a, b) = match grid.split_once(['x', 'X']) {
        Some((a, b)) => (a, b),
        None => (grid, grid),
    };
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    family: FamilyArg,
    grid: &str,
    plane: PlaneArg,
    resolution: usize,
    frames: &str,
    n: (usize, usize),
    d_max: usize,
    format: TableFormat,
    output: &Path,
) -> CliResult {
    let (theta_steps, phi_steps) = parse_grid(grid)?;
    let family = match family {
        FamilyArg::WNonlinear => SweepFamily::WNonlinear,
        FamilyArg::ChshPlanes => SweepFamily::ChshPlanes,
        FamilyArg::SvetlichnyVisibility => SweepFamily::SvetlichnyVisibility,
        FamilyArg::GhzFamily => SweepFamily::GhzFamily,
        FamilyArg::DickeFamily => SweepFamily::DickeFamily,
    };
    let cfg = SweepConfig {
        family,
        theta_steps,
        phi_steps,
        plane: match plane {
            PlaneArg::Xy => PlaneChoice::XY,
            PlaneArg::Xz => PlaneChoice::XZ,
            PlaneArg::Both => PlaneChoice::Both,
        },
        resolution,
        frames: parse_frames(frames)?,
        n_min: n.0,
        n_max: n.1,
        d_max,
    };
    let table = run_sweep(&cfg)?;
    let fmt = match format {
        TableFormat::Csv => OutputFormat::Csv,
        TableFormat::Json => OutputFormat::Json,
    };
    write_bytes(output, table.render(fmt).as_bytes())?;
    let flagged = table
        .column("flag")
        .map(|c| table.rows.iter().filter(|r| r[c] == entloss::sweep::Cell::Bool(true)).count());
    print(&json!({"rows": table.rows.len(), "columns": table.columns, "flagged": flagged}));
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Build { spec, output, format, max_dim } => cmd_build(&spec, &output, format, max_dim),
        Command::ApplyLoss { input, lose, mode, output, format } => {
            cmd_apply_loss(&input, &lose, mode, &output, format)
        }
        Command::Analyze { input, mode, max_loss, flags } => cmd_analyze(&input, mode, max_loss, &flags),
        Command::Witness { input, flags } => cmd_witness(&input, &flags),
        Command::Network { spec, crosscheck, max_loss, flags } => cmd_network(&spec, crosscheck, max_loss, &flags),
        Command::Sweep { family, grid, plane, resolution, frames, n_min, n_max, d_max, format, output } => {
            cmd_sweep(family, &grid, plane, resolution, &frames, (n_min, n_max), d_max, format, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report(&Failure::Usage(e.to_string().trim().to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            report(&f);
            ExitCode::from(2)
        }
    }
}
