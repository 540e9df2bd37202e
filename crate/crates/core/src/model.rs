//! System parameters, Hamiltonians and dissipation channels of the
//! cavity-fiber-cavity setup. Frequencies are in units of `g`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{atomic_projector, mode_annihilation, Atom, Basis, Level, Mode, SparseOperator};
use crate::invariant::{choose_epsilon, PulseSet, Schedule};

#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    /// Atom-cavity coupling.
    pub g: f64,
    /// Cavity-fiber coupling.
    pub eta: f64,
    /// Spontaneous emission rate per decay channel.
    pub gamma: f64,
    /// Photon leakage rate, identical for all six modes.
    pub kappa: f64,
    pub epsilon: f64,
    pub t_f: f64,
    pub winding: u32,
    pub n_max: usize,
    /// Optional per-coupling values for `(g_AL, g_AR, g_BL, g_BR)`.
    pub coupling_overrides: [Option<f64>; 4],
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            g: 1.0,
            eta: 1.0,
            gamma: 0.0,
            kappa: 0.0,
            epsilon: choose_epsilon(1),
            t_f: 15.0,
            winding: 1,
            n_max: 1,
            coupling_overrides: [None; 4],
        }
    }
}

impl SystemParams {
    /// `sqrt(g^2 + 2 eta^2)`
    pub fn lambda(&self) -> f64 {
        (self.g * self.g + 2.0 * self.eta * self.eta).sqrt()
    }

    /// Atom-cavity coupling for a cavity mode (`g` unless overridden).
    pub fn coupling(&self, mode: Mode) -> f64 {
        let k = match mode {
            Mode::AL => 0,
            Mode::AR => 1,
            Mode::BL => 2,
            Mode::BR => 3,
            Mode::FL | Mode::FR => return self.eta,
        };
        self.coupling_overrides[k].unwrap_or(self.g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.g > 0.0) {
            return bad("g", format!("{} must be positive", self.g));
        }
        if !(self.eta > 0.0) {
            return bad("eta", format!("{} must be positive", self.eta));
        }
        if !(self.gamma >= 0.0) {
            return bad("gamma", format!("{} must be non-negative", self.gamma));
        }
        if !(self.kappa >= 0.0) {
            return bad("kappa", format!("{} must be non-negative", self.kappa));
        }
        if !(self.epsilon > 0.0 && self.epsilon < FRAC_PI_2) {
            return bad("epsilon", format!("{} not in (0, pi/2)", self.epsilon));
        }
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return bad("t_f", format!("{} must be positive", self.t_f));
        }
        if self.winding == 0 {
            return bad("winding", "must be >= 1".into());
        }
        if self.n_max < 1 {
            return bad("n_max", "must be >= 1".into());
        }
        Ok(())
    }
}

/// Hermitian drive operator with a real time-dependent coefficient.
#[derive(Clone, Debug)]
pub struct DriveTerm {
    pub label: String,
    pub op: SparseOperator,
    pub schedule: Schedule,
}

/// `H(t) = static_part + sum_k schedule_k(t) * op_k`.
#[derive(Clone, Debug)]
pub struct TimeDependentHamiltonian {
    pub static_part: SparseOperator,
    pub drives: Vec<DriveTerm>,
    /// End of the interval on which every schedule is defined.
    pub end: f64,
}

impl TimeDependentHamiltonian {
    pub fn new(static_part: SparseOperator, drives: Vec<DriveTerm>) -> Self {
        let end = drives.iter().map(|d| d.schedule.end).fold(f64::INFINITY, f64::min);
        TimeDependentHamiltonian { static_part, drives, end }
    }

    pub fn constant(op: SparseOperator) -> Self {
        TimeDependentHamiltonian { static_part: op, drives: Vec::new(), end: f64::INFINITY }
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    pub fn evaluate(&self, t: f64) -> SparseOperator {
        let dim = self.dim();
        let terms: Vec<SparseOperator> =
            self.drives.iter().map(|d| d.op.scale(C64::new(d.schedule.value(t), 0.0))).collect();
        SparseOperator::sum(dim, std::iter::once(&self.static_part).chain(terms.iter()))
    }

    /// All operators entering `H`, for reachability analysis.
    pub fn operators(&self) -> impl Iterator<Item = &SparseOperator> {
        std::iter::once(&self.static_part).chain(self.drives.iter().map(|d| &d.op))
    }

    pub fn check_domain(&self, t_end: f64) -> Result<()> {
        if t_end > self.end * (1.0 + 1e-12) {
            return Err(Error::PulseDomainTooShort { domain_end: self.end, requested: t_end });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CollapseOperator {
    pub label: String,
    pub op: SparseOperator,
    pub rate: f64,
}

fn sigma(basis: &Basis, atom: Atom, to: Level, from: Level) -> SparseOperator {
    atomic_projector(basis, atom, to, from).expect("levels belong to the standard scheme")
}

fn annihilate(basis: &Basis, mode: Mode) -> SparseOperator {
    mode_annihilation(basis, mode).expect("mode belongs to the standard scheme")
}

/// Atom-cavity and cavity-fiber couplings (the strong, static part).
pub fn build_h_acf(params: &SystemParams, basis: &Basis) -> SparseOperator {
    use Level::*;
    let dim = basis.dim();
    let r = |x: f64| C64::new(x, 0.0);
    let atom_cavity = [
        (Atom::A, Mode::AL, EL, L),
        (Atom::A, Mode::AR, ER, R),
        (Atom::B, Mode::BL, EL, G),
        (Atom::B, Mode::BR, ER, G),
    ];
    let mut terms = Vec::new();
    for (atom, mode, excited, ground) in atom_cavity {
        let t = annihilate(basis, mode).matmul(&sigma(basis, atom, excited, ground));
        terms.push(t.scale(r(params.coupling(mode))));
    }
    for (fiber, cav_a, cav_b) in [(Mode::FL, Mode::AL, Mode::BL), (Mode::FR, Mode::AR, Mode::BR)] {
        let b = annihilate(basis, fiber);
        let creations = annihilate(basis, cav_a).adjoint().add(&annihilate(basis, cav_b).adjoint());
        terms.push(creations.matmul(&b).scale(r(params.eta)));
    }
    SparseOperator::sum(dim, terms.iter()).plus_adjoint()
}

fn drive(label: &str, op: SparseOperator, schedule: Schedule) -> DriveTerm {
    DriveTerm { label: label.to_string(), op: op.plus_adjoint(), schedule }
}

/// Step-1 Hamiltonian: static `H_acf` plus the two laser drives.
pub fn build_h1(params: &SystemParams, pulses: &PulseSet, basis: &Basis) -> TimeDependentHamiltonian {
    use Level::*;
    let drive_a = sigma(basis, Atom::A, EL, One).add(&sigma(basis, Atom::A, ER, Zero));
    let drive_b = sigma(basis, Atom::B, EL, L).add(&sigma(basis, Atom::B, ER, R));
    TimeDependentHamiltonian::new(
        build_h_acf(params, basis),
        vec![drive("Omega_A", drive_a, pulses.omega_a), drive("Omega_B", drive_b, pulses.omega_b)],
    )
}

/// Step-2 Hamiltonian: the two lasers on atom A's `g - eR - R` manifold.
pub fn build_h2(_params: &SystemParams, pulses: &PulseSet, basis: &Basis) -> TimeDependentHamiltonian {
    use Level::*;
    TimeDependentHamiltonian::new(
        SparseOperator::zeros(basis.dim()),
        vec![
            drive("Omega_g", sigma(basis, Atom::A, ER, G), pulses.omega_g),
            drive("Omega_R", sigma(basis, Atom::A, ER, R), pulses.omega_r),
        ],
    )
}

/// The twenty loss channels: six leaky modes at rate `kappa`, eight atom-A and
/// six atom-B spontaneous emission channels at rate `gamma` each.
pub fn build_collapse_operators(params: &SystemParams, basis: &Basis) -> Vec<CollapseOperator> {
    use Level::*;
    let mut out = Vec::with_capacity(20);
    for mode in Mode::ALL {
        out.push(CollapseOperator { label: format!("kappa_{mode}"), op: annihilate(basis, mode), rate: params.kappa });
    }
    for excited in [EL, ER] {
        for ground in [Zero, One, L, R] {
            out.push(CollapseOperator {
                label: format!("gamma_A_{excited}->{ground}"),
                op: sigma(basis, Atom::A, ground, excited),
                rate: params.gamma,
            });
        }
    }
    for excited in [EL, ER] {
        for ground in [G, L, R] {
            out.push(CollapseOperator {
                label: format!("gamma_B_{excited}->{ground}"),
                op: sigma(basis, Atom::B, ground, excited),
                rate: params.gamma,
            });
        }
    }
    out
}
