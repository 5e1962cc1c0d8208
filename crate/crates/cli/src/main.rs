mod config;
mod csv;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use cascade_core::absorber::{build_absorber, DARK_TOL, DEGENERACY_TOL, SPECTRUM_FLOOR};
use cascade_core::kerr::{self, KerrSpec, AUTO_CUTOFF_TOL, TRUNCATION_TOL};
use cascade_core::master::{UNIQUENESS_TOL, DENSE_RESIDUAL_TOL};
use cascade_core::mcwf::{ensemble_statistics, mcwf_trajectories, TrajectoryRequest};
use cascade_core::opfile::{find, read_operators, write_operators, NamedOperator};
use cascade_core::spin::{build_spin_cascade, circuit_dark_state, DetuningProfile, SpinNetworkSpec};
use cascade_core::sweeps::{dark_state_entropy, pair_sweep, path_sweep, six_node_waypoints, PairParams};
use cascade_core::{Error, Ket, Tolerances};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csv::Table;

/// Steady states, dark states and sweeps of driven cascaded quantum networks.
///
/// All rates are in units of the waveguide decay rate gamma. Every flag can
/// also be set in a `--config` file of `key = value` lines; command-line flags
/// take precedence.
#[derive(Parser, Debug)]
#[command(name = "cascade", version, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-node network with imperfections: concurrence, purity and output intensity.
    SpinPair(SpinPairArgs),
    /// Purity and output intensity along a piecewise-linear detuning path.
    SpinSweep(SpinSweepArgs),
    /// Block entropy S(n) of the analytic dark state of a paired detuning profile.
    SpinEntropy(SpinEntropyArgs),
    /// Photon number and linear entropy of the Kerr dark state over a (delta, omega) grid.
    KerrMap(KerrMapArgs),
    /// Checks the Kerr dark state against its defining identities.
    KerrVerify(KerrVerifyArgs),
    /// Builds a coherent absorber for a system read from an operator file.
    AbsorberBuild(AbsorberArgs),
    /// Quantum-trajectory estimate of the output intensity of a spin network.
    Trajectories(TrajectoryArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PairSweep {
    Omega,
    Delta,
    Kappa0,
    /// The dephasing rate 1/T2.
    Dephasing,
    Eta,
    Offset,
}

#[derive(Args, Debug)]
struct SpinPairArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    omega: f64,
    /// Detunings are (delta + offset, -delta + offset).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    kappa0: f64,
    /// Dephasing time; `inf` disables dephasing.
    #[arg(long, allow_hyphen_values = true, default_value_t = f64::INFINITY)]
    t2: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    offset: f64,
    #[arg(long, value_enum, default_value_t = PairSweep::Omega)]
    sweep: PairSweep,
    /// `start:stop:count` (inclusive) or a comma-separated list.
    #[arg(long, allow_hyphen_values = true, default_value = "0:5:51")]
    grid: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SpinSweepArgs {
    /// Semicolon-separated detuning profiles, each comma-separated; defaults to the built-in six-node path.
    #[arg(long, allow_hyphen_values = true)]
    waypoints: Option<String>,
    /// Detunings (d0, d1, d2, d3) of the built-in path.
    #[arg(long, allow_hyphen_values = true, default_value = "0.2,1,0.5,0")]
    path_detunings: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = 50)]
    per_segment: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    kappa0: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SpinEntropyArgs {
    /// Comma-separated detunings; defaults to alternating +-1/3 over `--sites` nodes.
    #[arg(long, allow_hyphen_values = true)]
    profile: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 12)]
    sites: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    omega: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct KerrMapArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
    k: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "-3:3:61")]
    delta_grid: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0:3:31")]
    omega_grid: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct KerrVerifyArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
    k: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    omega: f64,
    /// Fock cutoff; 0 picks one automatically.
    #[arg(long, allow_hyphen_values = true, default_value_t = 30)]
    cutoff: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct AbsorberArgs {
    /// Operator file holding `H` and `c` of the upstream system.
    #[arg(long, allow_hyphen_values = true)]
    input: PathBuf,
    /// Destination of the operator file with `H_B` and `c_B`.
    #[arg(long, allow_hyphen_values = true)]
    operators_out: PathBuf,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    gamma: f64,
    /// Largest dark-state residual accepted before exiting with status 3.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1e-6)]
    dark_tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Initial {
    Ground,
    /// The analytic dark state; requires a paired profile.
    Dark,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "0.3333333333333333,0.3333333333333333")]
    profile: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    kappa0: f64,
    #[arg(long, value_enum, default_value_t = Initial::Ground)]
    initial: Initial,
    #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
    t_final: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 21)]
    samples: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 500)]
    n_traj: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

/// Failure with its exit status: 1 bad arguments, 2 solver failure, 3 physics-contract violation.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn contract(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::LinearAlgebra(_)
            | Error::SteadyState(_)
            | Error::NonUniqueSteadyState { .. }
            | Error::StepSizeUnderflow { .. }
            | Error::InsufficientCutoff { .. } => 2,
            Error::DegenerateSpectrum { .. } | Error::ZeroSpectrum { .. } | Error::SymmetryViolation { .. } => 3,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| Failure::usage(format!("{what}: `{v}`: {e}"))))
        .collect()
}

/// `start:stop:count` as an inclusive linear grid, or a comma-separated list.
fn parse_grid(s: &str, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts[..] {
        [a, b, n] => {
            let [a, b] = [a, b].map(|v| v.trim().parse::<f64>());
            let (a, b) = (a.map_err(|e| Failure::usage(format!("{what}: {e}")))?, b.map_err(|e| Failure::usage(format!("{what}: {e}")))?);
            let n: usize = n.trim().parse().map_err(|e| Failure::usage(format!("{what}: count: {e}")))?;
            match n {
                0 => return Err(Failure::usage(format!("{what}: empty grid"))),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] => parse_list(s, what)?,
        _ => return Err(Failure::usage(format!("{what}: expected start:stop:count or a list"))),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::usage(format!("{what}: non-finite grid value")));
    }
    Ok(values)
}

fn emit(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::usage(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn spin_pair(a: &SpinPairArgs) -> CliResult<()> {
    let mut grid = parse_grid(&a.grid, "grid")?;
    grid.sort_by(f64::total_cmp);
    let base = PairParams { omega: a.omega, delta: a.delta, gamma: 1.0, kappa0: a.kappa0, t2: a.t2, eta: a.eta, offset: a.offset };
    let points: Vec<PairParams> = grid
        .iter()
        .map(|&v| match a.sweep {
            PairSweep::Omega => PairParams { omega: v, ..base },
            PairSweep::Delta => PairParams { delta: v, ..base },
            PairSweep::Kappa0 => PairParams { kappa0: v, ..base },
            PairSweep::Dephasing => PairParams { t2: 1.0 / v, ..base },
            PairSweep::Eta => PairParams { eta: v, ..base },
            PairSweep::Offset => PairParams { offset: v, ..base },
        })
        .collect();
    let figures = pair_sweep(&points)?;

    let sweep = a.sweep.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut t = Table::new("spin-pair", &[&sweep, "concurrence", "purity", "output_intensity"]);
    t.note("detunings (delta + offset, -delta + offset); dephasing rate 1/(2 T2); output_intensity = <c^dag c> of the transmitted field");
    for (k, v) in [("omega", a.omega), ("delta", a.delta), ("kappa0", a.kappa0), ("t2", a.t2), ("eta", a.eta), ("offset", a.offset)] {
        t.param(k, v);
    }
    t.param("sweep", &sweep);
    t.param("grid", &a.grid);
    t.tolerance("steady_state_uniqueness", UNIQUENESS_TOL);
    t.tolerance("steady_state_residual", DENSE_RESIDUAL_TOL);
    for (v, f) in grid.iter().zip(&figures) {
        t.row(vec![*v, f.concurrence.expect("two-node network"), f.purity, f.output]);
    }
    emit(&a.output, &t.render())
}

fn parse_profiles(s: &str) -> CliResult<Vec<DetuningProfile>> {
    s.split(';').map(|p| Ok(DetuningProfile::new(parse_list(p, "waypoints")?)?)).collect()
}

fn spin_sweep(a: &SpinSweepArgs) -> CliResult<()> {
    let waypoints = match &a.waypoints {
        Some(w) => parse_profiles(w)?,
        None => {
            let d: [f64; 4] = parse_list(&a.path_detunings, "path-detunings")?
                .try_into()
                .map_err(|_| Failure::usage("path-detunings needs four values"))?;
            six_node_waypoints(d)
        }
    };
    let points = path_sweep(&waypoints, a.per_segment, a.omega, 1.0, a.kappa0)?;
    let n = waypoints[0].len();
    let mut columns = vec!["s".to_string(), "purity".into(), "output_intensity".into()];
    columns.extend((0..n).map(|i| format!("delta_{i}")));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("spin-sweep", &cols);
    t.note("s = k at waypoint k; detunings interpolated linearly in between");
    let wp: Vec<String> = waypoints.iter().map(|w| w.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")).collect();
    t.param("waypoints", wp.join(";"));
    t.param("per_segment", a.per_segment);
    t.param("omega", a.omega);
    t.param("kappa0", a.kappa0);
    t.tolerance("steady_state_uniqueness", UNIQUENESS_TOL);
    t.tolerance("steady_state_residual", DENSE_RESIDUAL_TOL);
    for p in points {
        let mut row = vec![p.s, p.purity, p.output];
        row.extend(&p.profile.0);
        t.row(row);
    }
    emit(&a.output, &t.render())
}

fn spin_entropy(a: &SpinEntropyArgs) -> CliResult<()> {
    let profile = match &a.profile {
        Some(p) => DetuningProfile::new(parse_list(p, "profile")?)?,
        None => {
            if a.sites == 0 || a.sites % 2 == 1 {
                return Err(Failure::usage("the default profile needs an even, positive number of sites"));
            }
            DetuningProfile::alternating(a.sites, 1.0 / 3.0)
        }
    };
    let s = dark_state_entropy(&profile, a.omega, 1.0)?;
    let mut t = Table::new("spin-entropy", &["n", "entropy"]);
    t.note("von Neumann entropy of the first n nodes, in bits (log base 2)");
    t.param("profile", profile.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
    t.param("omega", a.omega);
    for (n, v) in s.iter().enumerate() {
        t.row(vec![n as f64, *v]);
    }
    emit(&a.output, &t.render())
}

fn kerr_map(a: &KerrMapArgs) -> CliResult<()> {
    let deltas = parse_grid(&a.delta_grid, "delta-grid")?;
    let omegas = parse_grid(&a.omega_grid, "omega-grid")?;
    let points = kerr::entropy_map(&deltas, &omegas, a.k, 1.0)?;
    let mut t = Table::new("kerr-map", &["delta", "omega", "photon_number", "s_lin", "cutoff"]);
    t.note("photon_number = <a^dag a> of the first cavity divided by (2 omega)^2; s_lin = 1 - tr(rho_A^2)");
    t.param("k", a.k);
    t.param("delta_grid", &a.delta_grid);
    t.param("omega_grid", &a.omega_grid);
    t.tolerance("auto_cutoff_tail", AUTO_CUTOFF_TOL);
    t.tolerance("truncation_weight", TRUNCATION_TOL);
    for p in points {
        t.row(vec![p.delta, p.omega, p.photon_number, p.s_lin, p.cutoff as f64]);
    }
    emit(&a.output, &t.render())
}

fn kerr_verify(a: &KerrVerifyArgs) -> CliResult<()> {
    let mut spec = KerrSpec::new(a.delta, a.k, a.omega, 1.0, a.cutoff.max(2))?;
    if a.cutoff == 0 {
        spec = spec.with_auto_cutoff()?;
    }
    let v = kerr::verify(&spec)?;
    let checks = [
        ("jump_residual", v.jump_residual, 1e-10),
        ("hamiltonian_residual", v.hamiltonian_residual, 1e-8),
        ("plus_mode_population", v.plus_mode_population, 1e-10),
        ("purification_distance", v.purification_distance, 1e-8),
        ("moment_error", v.moment_error, 1e-9),
    ];
    let mut out = format!(
        "# cascade {} kerr-verify\n# all rates in units of gamma\n# param delta = {}\n# param k = {}\n# param omega = {}\n# param cutoff = {}\n",
        env!("CARGO_PKG_VERSION"),
        a.delta,
        a.k,
        a.omega,
        v.cutoff
    );
    let mut failed = Vec::new();
    for (name, value, tol) in checks {
        let ok = value < tol;
        out.push_str(&format!("{name} = {} (tolerance {tol:e}) {}\n", csv::format_float(value), if ok { "PASS" } else { "FAIL" }));
        if !ok {
            failed.push(name);
        }
    }
    emit(&a.output, &out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::contract(format!("verification failed: {}", failed.join(", "))))
    }
}

fn absorber_build(a: &AbsorberArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| Failure::usage(format!("reading {}: {e}", a.input.display())))?;
    let ops = read_operators(&text)?;
    let (h, c) = (find(&ops, "H")?, find(&ops, "c")?);
    let res = build_absorber(h, c, a.gamma, None)?;
    let r = &res.report;
    let mut out = format!(
        "# cascade {} absorber-build\n# all rates in units of gamma\n# param input = {}\n# param gamma = {}\n\
         # tolerance spectrum_floor = {SPECTRUM_FLOOR:e}\n# tolerance degeneracy = {DEGENERACY_TOL:e}\n# tolerance dark = {:e}\n",
        env!("CARGO_PKG_VERSION"),
        a.input.display(),
        a.gamma,
        a.dark_tol
    );
    let spectrum: Vec<String> = res.spectrum.iter().map(|p| csv::format_float(*p)).collect();
    out.push_str(&format!("spectrum = {}\n", spectrum.join(",")));
    out.push_str(&format!("retained = {}\n", res.retained));
    out.push_str(&format!("discarded_weight = {}\n", csv::format_float(res.discarded_weight)));
    out.push_str(&format!("residual_jump = {}\n", csv::format_float(r.residual_i)));
    out.push_str(&format!("residual_hamiltonian = {}\n", csv::format_float(r.residual_ii)));
    out.push_str(&format!("eigenvalue = {},{}\n", csv::format_float(r.lambda.re), csv::format_float(r.lambda.im)));
    out.push_str(&format!("correlation = {}\n", csv::format_float(r.correlation_c)));
    out.push_str(&format!("dark_within_library_tolerance ({DARK_TOL:e}) = {}\n", r.is_dark));
    if let Some(w) = res.warning() {
        out.push_str(&format!("warning = {w}\n"));
    }
    let named = [
        NamedOperator { name: "H_B".into(), op: res.h_b.clone() },
        NamedOperator { name: "c_B".into(), op: res.c_b.clone() },
    ];
    std::fs::write(&a.operators_out, write_operators(&named))
        .map_err(|e| Failure::usage(format!("writing {}: {e}", a.operators_out.display())))?;
    emit(&a.output, &out)?;
    if r.is_dark_within(a.dark_tol) {
        Ok(())
    } else {
        Err(Failure::contract(format!("constructed state is not dark: residuals {:e}, {:e}", r.residual_i, r.residual_ii)))
    }
}

fn trajectories(a: &TrajectoryArgs) -> CliResult<()> {
    let profile = DetuningProfile::new(parse_list(&a.profile, "profile")?)?;
    let mut spec = SpinNetworkSpec::ideal(profile.0.clone(), a.omega, 1.0);
    spec.kappa0 = a.kappa0;
    let cascade = build_spin_cascade(&spec)?;
    let psi0 = match a.initial {
        Initial::Ground => Ket::basis(cascade.dims().clone(), 0),
        Initial::Dark => circuit_dark_state(&profile, a.omega, 1.0)?,
    };
    if a.samples < 2 {
        return Err(Failure::usage("samples must be at least 2"));
    }
    let times: Vec<f64> = (0..a.samples).map(|i| a.t_final * i as f64 / (a.samples - 1) as f64).collect();
    let c = cascade.output_operator();
    let tolerances = Tolerances::default();
    let request = TrajectoryRequest {
        t_final: a.t_final,
        n_traj: a.n_traj,
        seed: a.seed,
        sample_times: times.clone(),
        observables: vec![&c.adjoint() * &c],
        tolerances,
    };
    let records = mcwf_trajectories(&cascade, &psi0, &request)?;
    let stats = ensemble_statistics(&records);
    let jumps: usize = records.iter().map(|r| r.jump_times.len()).sum();
    let mut t = Table::new("trajectories", &["t", "output_intensity", "std_error"]);
    t.note("trajectory k uses seed + k; std_error is the standard error of the ensemble mean");
    t.param("profile", profile.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
    t.param("omega", a.omega);
    t.param("kappa0", a.kappa0);
    t.param("initial", format!("{:?}", a.initial).to_lowercase());
    t.param("t_final", a.t_final);
    t.param("samples", a.samples);
    t.param("n_traj", a.n_traj);
    t.param("seed", a.seed);
    t.tolerance("ode_rtol", tolerances.rtol);
    t.tolerance("ode_atol", tolerances.atol);
    t.note(format!("total jumps = {jumps}"));
    for (s, time) in times.iter().enumerate() {
        t.row(vec![*time, stats.mean[s][0], stats.std_error[s][0]]);
    }
    emit(&a.output, &t.render())
}

fn run(args: Vec<OsString>) -> CliResult<()> {
    let args = config::expand_config(args).map_err(Failure::usage)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return if code == 0 { Ok(()) } else { Err(Failure { code, message: String::new() }) };
        }
    };
    match &cli.command {
        Command::SpinPair(a) => spin_pair(a),
        Command::SpinSweep(a) => spin_sweep(a),
        Command::SpinEntropy(a) => spin_entropy(a),
        Command::KerrMap(a) => kerr_map(a),
        Command::KerrVerify(a) => kerr_verify(a),
        Command::AbsorberBuild(a) => absorber_build(a),
        Command::Trajectories(a) => trajectories(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3", "g").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:9:1", "g").unwrap(), vec![2.0]);
        assert_eq!(parse_grid("0.1, 0.3", "g").unwrap(), vec![0.1, 0.3]);
        assert!(parse_grid("0:1:0", "g").is_err());
        assert!(parse_grid("0:1", "g").is_err());
        assert!(parse_grid("a", "g").is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(Failure::from(Error::InvalidParameter("x".into())).code, 1);
        assert_eq!(Failure::from(Error::InsufficientCutoff { cutoff: 3, weight: 0.1 }).code, 2);
        assert_eq!(Failure::from(Error::ZeroSpectrum { rank: 1, indices: vec![1] }).code, 3);
    }
}
