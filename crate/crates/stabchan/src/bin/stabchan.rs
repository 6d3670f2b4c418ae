//! Command-line front end.
//!
//! Every subcommand reads JSON matrix files, prints a JSON report with a
//! `"schema": "stabchan/1"` field to standard output, and exits with
//! 0 (success), 1 (a verification failed), 2 (invalid input), or
//! 3 (numerical failure). `STABCHAN_TOL` overrides the default 1e-9
//! tolerance of the structural checks; certificate checks stay at 1e-10.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use stabchan::channel::{
    apply_choi, fixed_point, is_completely_positive, is_trace_preserving,
};
use stabchan::json::{self, ChannelJson, MatrixJson, TraceJson};
use stabchan::qmat::{gibbs, DensityMatrix, HermitianMatrix};
use stabchan::scattering::{collision_choi, collision_kraus, thermal_membership};
use stabchan::sdpcert::{brute_force_min_trace, certify_optimality};
use stabchan::stabilizer::{
    is_in_family, iterate, min_choi, FamilyChannel, FreeEvolution, StabilizerTarget,
};
use stabchan::{tol, Error};

const SCHEMA: &str = "stabchan/1";

#[derive(Parser)]
#[command(
    name = "stabchan",
    version,
    about = "Build, certify, and iterate quantum channels with a prescribed fixed point"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thermal state exp(-βH)/Z of a Hamiltonian.
    Gibbs {
        /// Hermitian matrix JSON file.
        #[arg(long)]
        hamiltonian: PathBuf,
        /// Inverse temperature.
        #[arg(long)]
        beta: f64,
        /// Write the state as matrix JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum-trace channel fixing a target state.
    MinChannel {
        /// Target state (matrix JSON).
        #[arg(long)]
        sigma: PathBuf,
        /// Write the channel JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace-preserving completion channel for a target and completion state.
    TpChannel {
        #[arg(long)]
        sigma: PathBuf,
        /// Completion state B (matrix JSON).
        #[arg(long)]
        completion: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a channel (channel JSON) to a state.
    Apply {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate a completion channel, tracing convergence to the target.
    Iterate {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        completion: PathBuf,
        /// Initial state.
        #[arg(long)]
        rho0: PathBuf,
        #[arg(long)]
        steps: usize,
        /// Hamiltonian for interleaved free evolution (requires --taus).
        #[arg(long, requires = "taus")]
        hy: Option<PathBuf>,
        /// JSON array of durations, one per step (requires --hy).
        #[arg(long, requires = "hy")]
        taus: Option<PathBuf>,
        /// Write the per-step CSV trace here.
        #[arg(long = "trace-out")]
        trace_out: Option<PathBuf>,
        /// Write the full JSON trace (with states) here.
        #[arg(long = "json-out")]
        json_out: Option<PathBuf>,
    },
    /// Check the optimality certificate pair for a target state.
    VerifySdp {
        #[arg(long)]
        sigma: PathBuf,
        /// Cross-check with the seeded search (d ≤ 3 only).
        #[arg(long)]
        oracle: bool,
        /// Objective-evaluation budget for the search.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Verify trace preservation and complete positivity of a channel;
    /// with --sigma, also that it fixes the state, and report family
    /// membership.
    VerifyChannel {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Build a collision channel from a spec file; with --hy and --beta,
    /// test thermalization against the Gibbs state.
    Collision {
        /// Collision JSON: {"S": ..., "rho_X": ..., "d_Y": n}.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, requires = "beta")]
        hy: Option<PathBuf>,
        #[arg(long, requires = "hy")]
        beta: Option<f64>,
        /// Write the collision channel JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            emit(json!({
                "schema": SCHEMA,
                "error": e.to_string(),
            }));
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Check tolerance: `STABCHAN_TOL` when set, 1e-9 otherwise.
fn check_tol() -> Result<f64, Error> {
    match std::env::var("STABCHAN_TOL") {
        Ok(text) => {
            let value: f64 = text.parse().map_err(|_| {
                Error::InvalidArgument(format!("STABCHAN_TOL={text} is not a number"))
            })?;
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "STABCHAN_TOL must be a positive number, got {text}"
                )));
            }
            Ok(value)
        }
        Err(_) => Ok(tol::CHECK),
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(Error::from)
}

fn load_density(path: &PathBuf) -> Result<DensityMatrix, Error> {
    json::parse_density(&read(path)?)
}

fn load_hermitian(path: &PathBuf) -> Result<HermitianMatrix, Error> {
    json::parse_hermitian(&read(path)?)
}

fn write_out(path: &Option<PathBuf>, contents: &str) -> Result<(), Error> {
    if let Some(p) = path {
        fs::write(p, contents)?;
    }
    Ok(())
}

fn emit(report: serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if writeln!(std::io::stdout(), "{text}").is_err() {
        // Reader closed the pipe; the report has nowhere to go.
        std::process::exit(0);
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Gibbs { hamiltonian, beta, out } => {
            if !beta.is_finite() || beta < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "inverse temperature must be finite and non-negative, got {beta}"
                )));
            }
            let h = load_hermitian(&hamiltonian)?;
            let state = gibbs(&h, beta)?;
            let state_json = MatrixJson::from_matrix(state.as_matrix());
            write_out(&out, &json::matrix_to_string(state.as_matrix()))?;
            emit(json!({
                "schema": SCHEMA,
                "command": "gibbs",
                "beta": beta,
                "dim": state.dim(),
                "state": state_json,
                "out": out,
            }));
            Ok(0)
        }

        Command::MinChannel { sigma, out } => {
            let target = StabilizerTarget::new(load_density(&sigma)?)?;
            let choi = min_choi(&target);
            write_out(&out, &json::channel_to_string(&choi))?;
            emit(json!({
                "schema": SCHEMA,
                "command": "min-channel",
                "dim": target.dim(),
                "trace": choi.matrix().trace().re,
                "lambda_max": target.lambda_max(),
                "degenerate": target.is_degenerate(),
                "channel": ChannelJson::from_choi(&choi),
                "out": out,
            }));
            Ok(0)
        }

        Command::TpChannel { sigma, completion, out } => {
            let tolerance = check_tol()?;
            let target = StabilizerTarget::new(load_density(&sigma)?)?;
            let fam = FamilyChannel::new(target, load_density(&completion)?)?;
            let choi = fam.choi();
            let tp = is_trace_preserving(&choi, tolerance);
            let cp = is_completely_positive(&choi, tolerance)?;
            write_out(&out, &json::channel_to_string(&choi))?;
            emit(json!({
                "schema": SCHEMA,
                "command": "tp-channel",
                "tp": tp.is_tp,
                "cp": cp.is_cp,
                // Minimum eigenvalue of the sector matrix σ - (1-λ_max)B;
                // non-negative exactly when the member is completely positive.
                "min_eigenvalue": fam.cp_sector_min_eig()?,
                "choi_min_eigenvalue": cp.min_eigenvalue,
                "overlap_q": fam.overlap_q(),
                "degenerate": fam.target().is_degenerate(),
                "channel": ChannelJson::from_choi(&choi),
                "out": out,
            }));
            Ok(0)
        }

        Command::Apply { channel, rho, out } => {
            let choi = json::parse_channel(&read(&channel)?)?;
            let state = load_density(&rho)?;
            let image = apply_choi(&choi, &state)?;
            write_out(&out, &json::matrix_to_string(image.as_matrix()))?;
            emit(json!({
                "schema": SCHEMA,
                "command": "apply",
                "trace_after": image.trace().re,
                "state": MatrixJson::from_matrix(image.as_matrix()),
                "out": out,
            }));
            Ok(0)
        }

        Command::Iterate {
            sigma,
            completion,
            rho0,
            steps,
            hy,
            taus,
            trace_out,
            json_out,
        } => {
            let target = StabilizerTarget::new(load_density(&sigma)?)?;
            let fam = FamilyChannel::new(target, load_density(&completion)?)?;
            let initial = load_density(&rho0)?;
            let free = match (&hy, &taus) {
                (Some(h), Some(t)) => {
                    let durations: Vec<f64> = serde_json::from_str(&read(t)?)?;
                    Some(FreeEvolution {
                        hamiltonian: load_hermitian(h)?,
                        taus: durations,
                    })
                }
                _ => None,
            };
            let trace = iterate(&fam, &initial, steps, free.as_ref())?;
            if let Some(p) = &trace_out {
                fs::write(p, trace.to_csv())?;
            }
            if let Some(p) = &json_out {
                fs::write(
                    p,
                    serde_json::to_string_pretty(&TraceJson::from_trace(&trace))?,
                )?;
            }
            emit(json!({
                "schema": SCHEMA,
                "command": "iterate",
                "steps": steps,
                "q": trace.q,
                "stagnant": trace.stagnant,
                "final_dist": trace.final_distance(),
                "trace_out": trace_out,
                "json_out": json_out,
            }));
            Ok(0)
        }

        Command::VerifySdp { sigma, oracle, budget, seed } => {
            let state = load_density(&sigma)?;
            let report = certify_optimality(&state, tol::CERTIFICATE)?;
            let oracle_value = if oracle {
                Some(brute_force_min_trace(&state, budget, seed)?)
            } else {
                None
            };
            let certified = report.certified;
            emit(json!({
                "schema": SCHEMA,
                "command": "verify-sdp",
                "primal_trace": report.primal_trace,
                "dual_value": report.dual_value,
                "gap": report.gap,
                "primal_feasible": report.primal_feasible,
                "dual_feasible": report.dual_feasible,
                "certified": certified,
                "oracle": oracle_value,
                "seed": oracle.then_some(seed),
            }));
            Ok(if certified { 0 } else { 1 })
        }

        Command::VerifyChannel { channel, sigma } => {
            let tolerance = check_tol()?;
            let choi = json::parse_channel(&read(&channel)?)?;
            let tp = is_trace_preserving(&choi, tolerance);
            let cp = is_completely_positive(&choi, tolerance)?;

            let mut stabilizes = None;
            let mut membership_json = serde_json::Value::Null;
            if let Some(path) = &sigma {
                let state = load_density(path)?;
                let target = StabilizerTarget::new(state.clone())?;
                let image = apply_choi(&choi, &state)?;
                let defect = image.max_abs_diff(state.as_matrix());
                stabilizes = Some(defect <= tolerance);
                let membership = is_in_family(&choi, &target, tolerance);
                membership_json = json!({
                    "in_family": membership.in_family,
                    "residual": membership.residual,
                    "reason": membership.reason,
                    "completion": membership
                        .completion
                        .map(|b| MatrixJson::from_matrix(b.as_matrix())),
                });
            }

            let pass = tp.is_tp && cp.is_cp && stabilizes.unwrap_or(true);
            emit(json!({
                "schema": SCHEMA,
                "command": "verify-channel",
                "tp": {"is_tp": tp.is_tp, "defect": tp.defect},
                "cp": {"is_cp": cp.is_cp, "min_eigenvalue": cp.min_eigenvalue},
                "stabilizes": stabilizes,
                "membership": membership_json,
                "pass": pass,
            }));
            Ok(if pass { 0 } else { 1 })
        }

        Command::Collision { spec, hy, beta, out } => {
            let tolerance = check_tol()?;
            let collision = json::parse_collision(&read(&spec)?)?;
            let kraus = collision_kraus(&collision)?;
            let choi = collision_choi(&collision)?;
            let tp = is_trace_preserving(&choi, tolerance);
            write_out(&out, &json::channel_to_string(&choi))?;

            let fp = fixed_point(&choi, tol::FIXED_POINT)?;
            let mut thermal_json = serde_json::Value::Null;
            if let (Some(h_path), Some(b)) = (&hy, beta) {
                let h = load_hermitian(h_path)?;
                let report = thermal_membership(&collision, &h, b, tolerance)?;
                thermal_json = json!({
                    "beta": b,
                    "gibbs_state": MatrixJson::from_matrix(report.gibbs_state.as_matrix()),
                    "fixed_point_match": report.fixed_point_match,
                    "in_family": report.membership.in_family,
                    "completion": report
                        .membership
                        .completion
                        .map(|m| MatrixJson::from_matrix(m.as_matrix())),
                    "reason": report.membership.reason,
                });
            }

            emit(json!({
                "schema": SCHEMA,
                "command": "collision",
                "d_x": collision.d_x(),
                "d_y": collision.d_y(),
                "kraus_count": kraus.len(),
                "completeness_defect": kraus.completeness_defect(),
                "tp": tp.is_tp,
                "fixed_point": {
                    "unique": fp.unique,
                    "space_dim": fp.space_dim,
                    "state": MatrixJson::from_matrix(fp.state.as_matrix()),
                },
                "thermal": thermal_json,
                "channel": ChannelJson::from_choi(&choi),
                "out": out,
            }));
            Ok(0)
        }
    }
}
