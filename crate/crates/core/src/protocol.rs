//! The two-step entangling protocol: branch transfer through the fiber
//! (step 1) followed by the single-atom phase operation (step 2), with
//! reporting, parameter sweeps and figure data.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{
    fmt_num, integrate_lindblad, integrate_schrodinger, DensityMatrix, IntegratorConfig, Observable, State,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, BasisState, Level, StateVector, Subspace};
use crate::invariant::{effective_pulses, PulseDesign, PulseSet, Step2Mode};
use crate::model::{build_collapse_operators, build_h1, build_h2, CollapseOperator, SystemParams, TimeDependentHamiltonian};
use crate::zeno::{three_level_hamiltonian, Branch};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InitialState {
    /// `(|0> + |1> + |g>)_A / sqrt(3)` with atom B in `|g>`, all modes empty.
    Superposition,
    /// A single atom-A level with atom B in `|g>`, all modes empty.
    AtomA(Level),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    pub params: SystemParams,
    pub design: PulseDesign,
    pub initial: InitialState,
    pub step2_duration: f64,
    pub step2_mode: Step2Mode,
    /// Integrate the master equation instead of the Schrodinger equation.
    pub open: bool,
    pub integrator: IntegratorConfig,
}

impl ProtocolSpec {
    /// Settings derived from `params`: step 2 lasts `2 t_f`, the master equation is
    /// used whenever a loss rate is nonzero.
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        let design = PulseDesign::new(params.epsilon, params.t_f, params.winding, 1.0)?;
        Ok(ProtocolSpec {
            step2_duration: 2.0 * params.t_f,
            step2_mode: Step2Mode::Literal,
            open: params.gamma > 0.0 || params.kappa > 0.0,
            integrator: IntegratorConfig::for_tf(params.t_f),
            initial: InitialState::Superposition,
            design,
            params,
        })
    }

    pub fn pulses(&self) -> Result<PulseSet> {
        PulseSet::new(&self.design, &self.params, self.step2_duration, self.step2_mode)
    }

    /// Same settings with different loss rates and fiber coupling.
    pub fn with_rates(&self, gamma: f64, kappa: f64, eta: f64) -> Result<Self> {
        let mut out = self.clone();
        out.params.gamma = gamma;
        out.params.kappa = kappa;
        out.params.eta = eta;
        out.params.validate()?;
        out.open = true;
        Ok(out)
    }
}

/// Operators and bookkeeping shared by both steps.
pub struct ProtocolSystem {
    pub basis: Basis,
    pub pulses: PulseSet,
    pub h1: TimeDependentHamiltonian,
    pub h2: TimeDependentHamiltonian,
    pub collapse: Vec<CollapseOperator>,
    /// Smallest coordinate span holding the initial superposition and closed
    /// under `h1` and the collapse operators.
    pub span1: Subspace,
    /// Closure of `span1` under `h2` and the collapse operators.
    pub span2: Subspace,
}

impl ProtocolSystem {
    pub fn build(spec: &ProtocolSpec) -> Result<Self> {
        let basis = Basis::with_cutoff(spec.params.n_max)?;
        let pulses = spec.pulses()?;
        let h1 = build_h1(&spec.params, &pulses, &basis);
        let h2 = build_h2(&spec.params, &pulses, &basis);
        let collapse = build_collapse_operators(&spec.params, &basis);
        let seeds: Vec<usize> = [Level::Zero, Level::One, Level::G]
            .into_iter()
            .map(|l| basis.idx(&BasisState::new(l, Level::G)))
            .collect();
        let jumps = || collapse.iter().map(|c| &c.op);
        let span1 = Subspace::reachable(basis.dim(), &seeds, h1.operators().chain(jumps()));
        let span2 = Subspace::reachable(basis.dim(), span1.indices(), h2.operators().chain(jumps()));
        Ok(ProtocolSystem { basis, pulses, h1, h2, collapse, span1, span2 })
    }

    pub fn ket(&self, a: Level, b: Level) -> StateVector {
        self.basis.ket(&BasisState::new(a, b))
    }

    pub fn initial_state(&self, initial: InitialState) -> StateVector {
        match initial {
            InitialState::Superposition => {
                let mut v = self.ket(Level::Zero, Level::G);
                v.add_scaled(C64::new(1.0, 0.0), &self.ket(Level::One, Level::G));
                v.add_scaled(C64::new(1.0, 0.0), &self.ket(Level::G, Level::G));
                v.normalized()
            }
            InitialState::AtomA(l) => self.ket(l, Level::G),
        }
    }

    /// `(|RR> + |LL> + |gg>) / sqrt(3)` with empty modes.
    pub fn entangled_target(&self) -> StateVector {
        self.signed_target([1.0, 1.0, 1.0])
    }

    /// `(-|RR> - |LL> + |gg>) / sqrt(3)`, the ideal state after step 1.
    pub fn step1_target(&self) -> StateVector {
        self.signed_target([-1.0, -1.0, 1.0])
    }

    fn signed_target(&self, signs: [f64; 3]) -> StateVector {
        let mut v = StateVector::zeros(self.basis.dim());
        for (k, i) in self.pair_indices().into_iter().enumerate() {
            v[i] = C64::new(signs[k] / 3f64.sqrt(), 0.0);
        }
        v
    }

    /// Basis indices of `|RR>`, `|LL>`, `|gg>` with empty modes.
    pub fn pair_indices(&self) -> [usize; 3] {
        [(Level::R, Level::R), (Level::L, Level::L), (Level::G, Level::G)]
            .map(|(a, b)| self.basis.idx(&BasisState::new(a, b)))
    }

    /// Populations recorded in both steps.
    pub fn observables(&self) -> Vec<Observable> {
        use Level::*;
        [("P_0g", Zero, G), ("P_1g", One, G), ("P_RR", R, R), ("P_LL", L, L), ("P_gg", G, G), ("P_eRg", ER, G)]
            .into_iter()
            .map(|(n, a, b)| Observable::basis(n, self.basis.idx(&BasisState::new(a, b))))
            .collect()
    }

    fn evolve(
        &self,
        spec: &ProtocolSpec,
        h: &TimeDependentHamiltonian,
        span: &Subspace,
        input: &State,
        observables: &[Observable],
        duration: f64,
    ) -> Result<(Trajectory, State, RunDiagnostics)> {
        if spec.open {
            let rho0 = match input {
                State::Pure(psi) => DensityMatrix::pure(psi, span.clone())?,
                State::Mixed(rho) => rho.extend_to(span)?,
            };
            let run = integrate_lindblad(h, &self.collapse, &rho0, Some(span), observables, duration, &spec.integrator)?;
            let diag = RunDiagnostics {
                norm_or_trace_drift: run.max_trace_drift,
                hermiticity_error: run.max_hermiticity_error,
                min_eigenvalue: run.min_eigenvalue,
            };
            Ok((run.trajectory, State::Mixed(run.final_state), diag))
        } else {
            let State::Pure(psi) = input else {
                return Err(Error::InvalidParameter { name: "open", reason: "closed run needs a pure input".into() });
            };
            let run = integrate_schrodinger(h, psi, Some(span), observables, duration, &spec.integrator)?;
            let diag = RunDiagnostics { norm_or_trace_drift: run.max_norm_drift, hermiticity_error: 0.0, min_eigenvalue: 0.0 };
            Ok((run.trajectory, State::Pure(run.final_state), diag))
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct RunDiagnostics {
    pub norm_or_trace_drift: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub trajectory: Trajectory,
    pub final_state: State,
    /// Fidelity with the ideal state at the end of this step.
    pub target_fidelity: f64,
    pub diagnostics: RunDiagnostics,
}

/// Step 1 from the configured initial state, both branches in one run.
pub fn run_step1(spec: &ProtocolSpec, system: &ProtocolSystem) -> Result<StepOutcome> {
    let psi0 = system.initial_state(spec.initial);
    let obs = system.observables();
    let (trajectory, final_state, diagnostics) =
        system.evolve(spec, &system.h1, &system.span1, &State::Pure(psi0), &obs, spec.params.t_f)?;
    let target = system.step1_target();
    Ok(StepOutcome { target_fidelity: final_state.fidelity(&target), trajectory, final_state, diagnostics })
}

#[derive(Clone, Debug)]
pub struct Step2Outcome {
    pub step: StepOutcome,
    /// Closed-system propagator on atom A's `(g, eR, R)` levels; column `k`
    /// is the evolved `k`-th level.
    pub propagator: Matrix3<C64>,
}

/// Closed three-level propagator of step 2 over `(g, eR, R)`.
pub fn step2_propagator(spec: &ProtocolSpec) -> Result<Matrix3<C64>> {
    let pulses = spec.pulses()?;
    let one = C64::new(1.0, 0.0);
    let h = three_level_hamiltonian(pulses.omega_g, pulses.omega_r, one, one);
    let mut u = Matrix3::zeros();
    for k in 0..3 {
        let run = integrate_schrodinger(&h, &StateVector::basis(3, k), None, &[], spec.step2_duration, &spec.integrator)?;
        for i in 0..3 {
            u[(i, k)] = run.final_state[i];
        }
    }
    Ok(u)
}

/// Step 2 applied to `input`.
pub fn run_step2(spec: &ProtocolSpec, system: &ProtocolSystem, input: &State) -> Result<Step2Outcome> {
    let obs = system.observables();
    let (trajectory, final_state, diagnostics) = system.evolve(spec, &system.h2, &system.span2, input, &obs, spec.step2_duration)?;
    let target = system.entangled_target();
    let step = StepOutcome { target_fidelity: final_state.fidelity(&target), trajectory, final_state, diagnostics };
    Ok(Step2Outcome { step, propagator: step2_propagator(spec)? })
}

/// Best fidelity with `(e^{ia}|RR> + e^{ib}|LL> + e^{ic}|gg>)/sqrt(3)` given the
/// 3x3 block of the state on `(RR, LL, gg)`. Returns phases relative to `gg`.
pub fn fit_phases(block: &Matrix3<C64>) -> ([f64; 3], f64) {
    let value = |ph: &[f64; 3]| -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                acc += C64::from_polar(1.0, -ph[j]) * block[(j, k)] * C64::from_polar(1.0, ph[k]);
            }
        }
        acc.re / 3.0
    };
    let herm = (block + block.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::DMatrix::from_iterator(3, 3, herm.iter().copied()).symmetric_eigen();
    let top = (0..3).max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
    let mut ph: [f64; 3] = std::array::from_fn(|j| eig.eigenvectors[(j, top)].arg());
    for _ in 0..500 {
        let before = ph;
        for j in 0..3 {
            let s: C64 = (0..3).filter(|&k| k != j).map(|k| block[(j, k)] * C64::from_polar(1.0, ph[k])).sum();
            if s.norm() > 0.0 {
                ph[j] = s.arg();
            }
        }
        if before.iter().zip(&ph).all(|(a, b)| (a - b).abs() < 1e-15) {
            break;
        }
    }
    let f = value(&ph);
    let rel = [wrap(ph[0] - ph[2]), wrap(ph[1] - ph[2]), 0.0];
    (rel, f)
}

/// Angle wrapped into `(-pi, pi]`.
pub fn wrap(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

#[derive(Clone, Debug)]
pub struct ProtocolReport {
    pub step1_fidelity: f64,
    /// Fidelity with the all-positive entangled target.
    pub fidelity: f64,
    /// Best fidelity over local relative phases of the three branches.
    pub fidelity_phase_fitted: f64,
    /// Fitted phases of `(RR, LL, gg)` relative to `gg`.
    pub fitted_phases: [f64; 3],
    /// Phases of the `RR` and `LL` coherences relative to `gg`.
    pub relative_phases: [f64; 2],
    /// `sqrt` of the final `RR`, `LL`, `gg` populations.
    pub branch_magnitudes: [f64; 3],
    pub propagator: Matrix3<C64>,
    pub step1: StepOutcome,
    pub step2: StepOutcome,
    /// Both steps, step-2 times shifted by `t_f`.
    pub trajectory: Trajectory,
}

impl ProtocolReport {
    pub fn final_state(&self) -> &State {
        &self.step2.final_state
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "step1_fidelity,{}", fmt_num(self.step1_fidelity));
        let _ = writeln!(s, "fidelity,{}", fmt_num(self.fidelity));
        let _ = writeln!(s, "fidelity_phase_fitted,{}", fmt_num(self.fidelity_phase_fitted));
        let _ = writeln!(s, "phase_RR_rel_gg,{}", fmt_num(self.relative_phases[0]));
        let _ = writeln!(s, "phase_LL_rel_gg,{}", fmt_num(self.relative_phases[1]));
        let _ = writeln!(s, "fitted_phase_RR,{}", fmt_num(self.fitted_phases[0]));
        let _ = writeln!(s, "fitted_phase_LL,{}", fmt_num(self.fitted_phases[1]));
        for (name, m) in ["RR", "LL", "gg"].iter().zip(self.branch_magnitudes) {
            let _ = writeln!(s, "magnitude_{name},{}", fmt_num(m));
        }
        let labels = ["g", "eR", "R"];
        for i in 0..3 {
            for k in 0..3 {
                let z = self.propagator[(i, k)];
                let _ = writeln!(
                    s,
                    "U2[{}<-{}],{},{}",
                    labels[i],
                    labels[k],
                    fmt_num(z.norm()),
                    fmt_num(if z.norm() > 1e-12 { z.arg() } else { 0.0 })
                );
            }
        }
        s
    }
}

/// Steps 1 and 2 with fidelity and phase analysis.
pub fn run_protocol(spec: &ProtocolSpec) -> Result<ProtocolReport> {
    let system = ProtocolSystem::build(spec)?;
    run_protocol_on(spec, &system)
}

pub fn run_protocol_on(spec: &ProtocolSpec, system: &ProtocolSystem) -> Result<ProtocolReport> {
    let step1 = run_step1(spec, system)?;
    let step2 = run_step2(spec, system, &step1.final_state)?;
    let state = &step2.step.final_state;
    let idx = system.pair_indices();
    let block = Matrix3::from_fn(|j, k| state.element(idx[j], idx[k]));
    let (fitted_phases, fidelity_phase_fitted) = fit_phases(&block);
    let rel = |j: usize| if block[(j, 2)].norm() > 1e-14 { block[(j, 2)].arg() } else { 0.0 };
    let branch_magnitudes = [0, 1, 2].map(|j| block[(j, j)].re.max(0.0).sqrt());

    let mut trajectory = step1.trajectory.clone();
    trajectory.append(&step2.step.trajectory);

    Ok(ProtocolReport {
        step1_fidelity: step1.target_fidelity,
        fidelity: step2.step.target_fidelity,
        fidelity_phase_fitted,
        fitted_phases,
        relative_phases: [rel(0), rel(1)],
        branch_magnitudes,
        propagator: step2.propagator,
        step1,
        step2: step2.step,
        trajectory,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    pub kappa: f64,
    pub eta: f64,
    pub fidelity: f64,
    pub fidelity_phase_fitted: f64,
    pub runtime_s: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub gammas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub etas: Vec<f64>,
    /// Ordered by eta, then kappa, then gamma.
    pub points: Vec<SweepPoint>,
}

/// A violation of monotone decrease along one grid axis.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityViolation {
    pub axis: &'static str,
    pub at: (f64, f64, f64),
    pub increase: f64,
}

impl SweepResult {
    pub fn point(&self, gamma: f64, kappa: f64, eta: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.gamma == gamma && p.kappa == kappa && p.eta == eta)
    }

    /// Points where the selected fidelity rises by more than `slack` when
    /// `gamma` or `kappa` increases with the other axes fixed.
    pub fn monotonicity_violations(&self, slack: f64, phase_fitted: bool) -> Vec<MonotonicityViolation> {
        let f = |p: &SweepPoint| if phase_fitted { p.fidelity_phase_fitted } else { p.fidelity };
        let mut out = Vec::new();
        for &eta in &self.etas {
            for &kappa in &self.kappas {
                for w in self.gammas.windows(2) {
                    if let (Some(a), Some(b)) = (self.point(w[0], kappa, eta), self.point(w[1], kappa, eta)) {
                        if f(b) > f(a) + slack {
                            out.push(MonotonicityViolation { axis: "gamma", at: (w[1], kappa, eta), increase: f(b) - f(a) });
                        }
                    }
                }
            }
            for &gamma in &self.gammas {
                for w in self.kappas.windows(2) {
                    if let (Some(a), Some(b)) = (self.point(gamma, w[0], eta), self.point(gamma, w[1], eta)) {
                        if f(b) > f(a) + slack {
                            out.push(MonotonicityViolation { axis: "kappa", at: (gamma, w[1], eta), increase: f(b) - f(a) });
                        }
                    }
                }
            }
        }
        out
    }

    /// Deterministic CSV (no timings).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("gamma,kappa,eta,fidelity,fidelity_phase_fitted,status\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_num(p.gamma),
                fmt_num(p.kappa),
                fmt_num(p.eta),
                fmt_num(p.fidelity),
                fmt_num(p.fidelity_phase_fitted),
                p.error.as_deref().map(|e| e.replace(',', ";")).unwrap_or_else(|| "ok".into())
            );
        }
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut s = String::from("gamma,kappa,eta,runtime_s\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{},{:.3}", p.gamma, p.kappa, p.eta, p.runtime_s);
        }
        s
    }
}

/// Open-system protocol on every grid point, in parallel. Failed points are
/// recorded with their error and zero fidelity.
pub fn sweep(spec: &ProtocolSpec, gammas: &[f64], kappas: &[f64], etas: &[f64]) -> SweepResult {
    let grid: Vec<(f64, f64, f64)> = etas
        .iter()
        .flat_map(|&e| kappas.iter().flat_map(move |&k| gammas.iter().map(move |&g| (g, k, e))))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(gamma, kappa, eta)| {
            let start = Instant::now();
            let result = spec.with_rates(gamma, kappa, eta).and_then(|s| run_protocol(&s));
            let runtime_s = start.elapsed().as_secs_f64();
            match result {
                Ok(r) => SweepPoint {
                    gamma,
                    kappa,
                    eta,
                    fidelity: r.fidelity,
                    fidelity_phase_fitted: r.fidelity_phase_fitted,
                    runtime_s,
                    error: None,
                },
                Err(e) => SweepPoint {
                    gamma,
                    kappa,
                    eta,
                    fidelity: 0.0,
                    fidelity_phase_fitted: 0.0,
                    runtime_s,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    SweepResult { gammas: gammas.to_vec(), kappas: kappas.to_vec(), etas: etas.to_vec(), points }
}

/// Pulse schedules sampled on `[0, max(t_f, step-2 duration)]`; each schedule
/// reads zero outside its own domain.
pub fn pulses_csv(spec: &ProtocolSpec, samples: usize) -> Result<String> {
    let p = spec.pulses()?;
    let end = spec.params.t_f.max(spec.step2_duration);
    let mut s = String::from("t,Omega_A1,Omega_B1,Omega_A,Omega_B,Omega_g,Omega_R\n");
    for k in 0..=samples {
        let t = end * k as f64 / samples as f64;
        let row = [p.omega_a1, p.omega_b1, p.omega_a, p.omega_b, p.omega_g, p.omega_r].map(|x| x.value_or_zero(t));
        s.push_str(&fmt_num(t));
        for v in row {
            s.push(',');
            s.push_str(&fmt_num(v));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Effective three-level step-1 run from `phi1`, populations of
/// `(phi1, psi1, phi7)`.
pub fn effective_step1_trajectory(spec: &ProtocolSpec) -> Result<(Trajectory, StateVector)> {
    let (a1, b1) = effective_pulses(&spec.design);
    let one = C64::new(1.0, 0.0);
    let h = three_level_hamiltonian(a1, b1, one, one);
    let obs = [Observable::basis("eff_phi1", 0), Observable::basis("eff_psi1", 1), Observable::basis("eff_phi7", 2)];
    let run = integrate_schrodinger(&h, &StateVector::basis(3, 0), None, &obs, spec.design.t_f, &spec.integrator)?;
    Ok((run.trajectory, run.final_state))
}

/// Effective three-level step-2 run from `|g>_A`, populations of `(g, eR, R)`.
pub fn effective_step2_trajectory(spec: &ProtocolSpec, mode: Step2Mode, prefix: &str) -> Result<(Trajectory, StateVector)> {
    let mut s = spec.clone();
    s.step2_mode = mode;
    let p = s.pulses()?;
    let one = C64::new(1.0, 0.0);
    let h = three_level_hamiltonian(p.omega_g, p.omega_r, one, one);
    let obs = ["g", "eR", "R"].iter().enumerate().map(|(k, n)| Observable::basis(format!("{prefix}P_{n}"), k)).collect::<Vec<_>>();
    let run = integrate_schrodinger(&h, &StateVector::basis(3, 0), None, &obs, s.step2_duration, &s.integrator)?;
    Ok((run.trajectory, run.final_state))
}

fn merge_columns(mut base: Trajectory, other: &Trajectory) -> Trajectory {
    debug_assert_eq!(base.times.len(), other.times.len());
    base.names.extend(other.names.iter().cloned());
    base.series.extend(other.series.iter().cloned());
    base
}

/// Population series from single-branch full-model runs, closed system.
pub fn full_branch_trajectory(spec: &ProtocolSpec, branch: Branch) -> Result<Trajectory> {
    let mut s = spec.clone();
    s.open = false;
    s.initial = InitialState::AtomA(branch.source_level());
    let system = ProtocolSystem::build(&s)?;
    let sub = crate::zeno::branch_subspace(&system.basis, branch)?;
    let tag = match branch {
        Branch::R => "",
        Branch::L => "p",
    };
    let obs = [
        Observable::state(format!("full_phi1{tag}"), sub.phi(1)),
        Observable::state(format!("full_phi7{tag}"), sub.phi(7)),
    ];
    let psi0 = system.initial_state(s.initial);
    let run = integrate_schrodinger(&system.h1, &psi0, Some(&system.span1), &obs, s.params.t_f, &s.integrator)?;
    Ok(run.trajectory)
}

/// Default loss grids for the fidelity figure, in units of `g`.
pub const FIG5_GAMMAS: [f64; 5] = [0.0, 0.025, 0.05, 0.075, 0.1];
pub const FIG5_KAPPAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Write `fig3.csv`, `fig4a.csv`, `fig4b.csv` and `fig5.csv` into `out`.
pub fn emit_figures(spec: &ProtocolSpec, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let mut write = |name: &str, body: String| -> Result<()> {
        let path = out.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    write("fig3.csv", pulses_csv(spec, 600)?)?;

    let (eff, _) = effective_step1_trajectory(spec)?;
    let full_r = full_branch_trajectory(spec, Branch::R)?;
    let full_l = full_branch_trajectory(spec, Branch::L)?;
    write("fig4a.csv", merge_columns(merge_columns(eff, &full_r), &full_l).to_csv())?;

    let (lit, _) = effective_step2_trajectory(spec, Step2Mode::Literal, "")?;
    let (stretched, _) = effective_step2_trajectory(spec, Step2Mode::Stretched, "stretched_")?;
    write("fig4b.csv", merge_columns(lit, &stretched).to_csv())?;

    let grid = sweep(spec, &FIG5_GAMMAS, &FIG5_KAPPAS, &[spec.params.eta]);
    write("fig5.csv", grid.to_csv())?;
    Ok(written)
}
