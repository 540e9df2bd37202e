use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fiberstap::config::RunConfig;
use fiberstap::dynamics::{fmt_num, Trajectory};
use fiberstap::hilbert::Basis;
use fiberstap::invariant::Step2Mode;
use fiberstap::model::build_h_acf;
use fiberstap::protocol::{
    effective_step2_trajectory, emit_figures, pulses_csv, run_protocol_on, run_step1, run_step2, step2_propagator,
    sweep, ProtocolSpec, ProtocolSystem,
};
use fiberstap::zeno::{branch_subspace, leakage_series, zeno_decompose, Branch};
use fiberstap::{dynamics::State, Error};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "fiberstap", version)]
#[command(about = "Qutrit entanglement of two atoms in fiber-coupled cavities")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Fiber-cavity coupling, units of g.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Step-1 duration, units of 1/g.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tf: Option<f64>,
    /// Atomic spontaneous emission rate.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Cavity and fiber photon leakage rate.
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Photon cutoff per mode.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// RK4 step.
    #[arg(long, global = true, allow_hyphen_values = true)]
    dt: Option<f64>,
    /// Winding number N of the invariant phase.
    #[arg(long, global = true)]
    winding: Option<u32>,
    /// `literal` or `stretched` step-2 pulses.
    #[arg(long, global = true)]
    step2_mode: Option<Step2Mode>,
    /// Flat key = value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; CSV goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of the coupling Hamiltonian on both single-excitation branches.
    Spectrum,
    /// Pulse schedules on [0, 2 t_f].
    Pulses {
        #[arg(long, default_value_t = 600)]
        samples: usize,
    },
    /// Branch transfer through the fiber from the initial superposition.
    Step1,
    /// Phase operation on atom A, applied to the ideal step-1 output.
    Step2,
    /// Both steps with fidelity and phase analysis.
    Protocol,
    /// Open-system fidelity over a (gamma, kappa, eta) grid.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.025, 0.05, 0.075, 0.1])]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.25, 0.5, 0.75, 1.0])]
        kappas: Vec<f64>,
        /// Defaults to the configured eta.
        #[arg(long, value_delimiter = ',')]
        etas: Vec<f64>,
    },
    /// Data for the pulse, population and fidelity figures.
    Figures,
    /// Dark-sector leakage of the full model during step 1.
    ZenoCheck,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig, Error> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            eta: self.eta,
            epsilon: self.epsilon,
            t_f: self.tf,
            gamma: self.gamma,
            kappa: self.kappa,
            n_max: self.nmax,
            dt: self.dt,
            winding: self.winding,
            step2_mode: self.step2_mode,
            ..Default::default()
        };
        Ok(base.merged(&flags))
    }
}

/// Writes `body` to `<out>/<name>` or to stdout.
fn emit(out: Option<&Path>, name: &str, body: &str) -> Result<(), Error> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            println!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn kv(pairs: &[(&str, f64)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k},{}\n", fmt_num(*v))).collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = cli.common.run_config()?;
    let spec: ProtocolSpec = cfg.spec()?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Spectrum => {
            let basis = Basis::with_cutoff(spec.params.n_max)?;
            let h = build_h_acf(&spec.params, &basis);
            let mut body = String::from("branch,k,eigenvalue\n");
            for (name, branch) in [("R", Branch::R), ("L", Branch::L)] {
                let d = zeno_decompose(&h, &branch_subspace(&basis, branch)?)?;
                for (k, e) in d.eigenvalues.iter().enumerate() {
                    body.push_str(&format!("{name},{k},{}\n", fmt_num(*e)));
                }
            }
            emit(out, "spectrum.csv", &body)
        }
        Command::Pulses { samples } => {
            if samples == 0 {
                return Err(Error::InvalidParameter { name: "samples", reason: "must be positive".into() });
            }
            emit(out, "pulses.csv", &pulses_csv(&spec, samples)?)
        }
        Command::Step1 => {
            let system = ProtocolSystem::build(&spec)?;
            let r = run_step1(&spec, &system)?;
            emit(out, "step1.csv", &r.trajectory.to_csv())?;
            eprint!("{}", kv(&[("step1_fidelity", r.target_fidelity), ("drift", r.diagnostics.norm_or_trace_drift)]));
            Ok(())
        }
        Command::Step2 => {
            let system = ProtocolSystem::build(&spec)?;
            let input = State::Pure(system.step1_target());
            let r = run_step2(&spec, &system, &input)?;
            emit(out, "step2.csv", &r.step.trajectory.to_csv())?;
            let (eff, _) = effective_step2_trajectory(&spec, spec.step2_mode, "")?;
            if out.is_some() {
                emit(out, "step2_effective.csv", &eff.to_csv())?;
            }
            let u = step2_propagator(&spec)?;
            let mut s = kv(&[("fidelity", r.step.target_fidelity)]);
            for (k, name) in ["g", "eR", "R"].iter().enumerate() {
                let z = u[(k, k)];
                s.push_str(&format!("U_{name}{name},{},{}\n", fmt_num(z.norm_sqr()), fmt_num(z.arg())));
            }
            eprint!("{s}");
            Ok(())
        }
        Command::Protocol => {
            let system = ProtocolSystem::build(&spec)?;
            let r = run_protocol_on(&spec, &system)?;
            emit(out, "protocol.csv", &r.trajectory.to_csv())?;
            if out.is_some() {
                emit(out, "protocol_summary.csv", &r.summary())?;
            } else {
                eprint!("{}", r.summary());
            }
            Ok(())
        }
        Command::Sweep { gammas, kappas, mut etas } => {
            if etas.is_empty() {
                etas.push(spec.params.eta);
            }
            let res = sweep(&spec, &gammas, &kappas, &etas);
            emit(out, "sweep.csv", &res.to_csv())?;
            let raw = res.monotonicity_violations(0.005, false).len();
            let fitted = res.monotonicity_violations(0.005, true).len();
            eprintln!("monotonicity_violations_raw,{raw}\nmonotonicity_violations_phase_fitted,{fitted}");
            if let Some(p) = res.points.iter().find(|p| p.error.is_some()) {
                return Err(Error::InvalidParameter {
                    name: "sweep",
                    reason: format!("point ({}, {}, {}) failed: {}", p.gamma, p.kappa, p.eta, p.error.as_deref().unwrap_or("")),
                });
            }
            Ok(())
        }
        Command::Figures => {
            let dir = out.unwrap_or(Path::new("figures"));
            for p in emit_figures(&spec, dir)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::ZenoCheck => {
            let basis = Basis::with_cutoff(spec.params.n_max)?;
            let pulses = spec.pulses()?;
            let mut traj: Option<Trajectory> = None;
            let mut summary = Vec::new();
            for (name, branch) in [("R", Branch::R), ("L", Branch::L)] {
                let (times, leak) = leakage_series(&spec.params, &pulses, &basis, branch, &spec.integrator)?;
                summary.push((name, leak.iter().copied().fold(0.0, f64::max)));
                let t = traj.get_or_insert_with(|| Trajectory { times, names: vec![], series: vec![], states: vec![] });
                t.names.push(format!("leakage_{name}"));
                t.series.push(leak);
            }
            emit(out, "zeno.csv", &traj.map(|t| t.to_csv()).unwrap_or_default())?;
            for (name, m) in summary {
                eprintln!("max_leakage_{name},{}", fmt_num(m));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            println!("{}", json!({ "error": "usage", "message": first }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
