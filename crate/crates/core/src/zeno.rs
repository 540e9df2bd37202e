//! Zeno-subspace analysis of the strong atom-cavity-fiber coupling on the
//! seven-state single-excitation branches, and the effective three-level
//! model it induces.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64 as C64;

use crate::dynamics::{integrate_schrodinger, IntegratorConfig, Observable};
use crate::error::{Error, Result};
use crate::hilbert::{restrict, Basis, BasisState, Level, Mode, SparseOperator, StateVector};
use crate::invariant::{PulseSet, Schedule};
use crate::model::{build_h1, build_h_acf, DriveTerm, SystemParams, TimeDependentHamiltonian};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `|0>_A` feeding the right-circular pathway.
    R,
    /// `|1>_A` feeding the left-circular pathway.
    L,
}

impl Branch {
    pub fn source_level(self) -> Level {
        match self {
            Branch::R => Level::Zero,
            Branch::L => Level::One,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchSubspace {
    pub branch: Branch,
    pub configurations: [BasisState; 7],
    pub indices: [usize; 7],
    pub states: Vec<StateVector>,
}

impl BranchSubspace {
    /// Unit vector `phi_k` (1-based, as in the usual labelling).
    pub fn phi(&self, k: usize) -> &StateVector {
        &self.states[k - 1]
    }

    /// Full-space vector with coordinates `coeffs` over `phi_1..phi_7`.
    pub fn embed(&self, coeffs: &[C64]) -> StateVector {
        let mut v = StateVector::zeros(self.states[0].len());
        for (k, &i) in self.indices.iter().enumerate() {
            v[i] = coeffs[k];
        }
        v
    }
}

/// The seven configurations visited from `|0>_A|g>_B|vac>` (R branch) or
/// `|1>_A|g>_B|vac>` (L branch).
pub fn branch_subspace(basis: &Basis, branch: Branch) -> Result<BranchSubspace> {
    if basis.scheme().n_max < 1 {
        return Err(Error::InvalidScheme("branch subspaces need n_max >= 1".into()));
    }
    let (source, excited, ground, cav_a, fiber, cav_b) = match branch {
        Branch::R => (Level::Zero, Level::ER, Level::R, Mode::AR, Mode::FR, Mode::BR),
        Branch::L => (Level::One, Level::EL, Level::L, Mode::AL, Mode::FL, Mode::BL),
    };
    let s = basis.scheme();
    let configurations = [
        BasisState::new(source, Level::G),
        BasisState::new(excited, Level::G),
        BasisState::new(ground, Level::G).with_photons(s, cav_a, 1),
        BasisState::new(ground, Level::G).with_photons(s, fiber, 1),
        BasisState::new(ground, Level::G).with_photons(s, cav_b, 1),
        BasisState::new(ground, excited),
        BasisState::new(ground, ground),
    ];
    let indices = configurations.clone().map(|c| basis.idx(&c));
    let states = indices.iter().map(|&i| StateVector::basis(basis.dim(), i)).collect();
    Ok(BranchSubspace { branch, configurations, indices, states })
}

/// One eigenvalue group of the restricted coupling Hamiltonian.
#[derive(Clone, Debug)]
pub struct ZenoSector {
    pub eigenvalue: f64,
    /// Orthonormal vectors over `phi_1..phi_7`.
    pub vectors: Vec<Vec<C64>>,
}

impl ZenoSector {
    pub fn projector(&self) -> DMatrix<C64> {
        let mut p = DMatrix::zeros(7, 7);
        for v in &self.vectors {
            for i in 0..7 {
                for j in 0..7 {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        p
    }
}

#[derive(Clone, Debug)]
pub struct ZenoDecomposition {
    /// Sorted ascending.
    pub eigenvalues: [f64; 7],
    /// Column `k` is the eigenvector of `eigenvalues[k]`, over `phi_1..phi_7`.
    pub eigenvectors: DMatrix<C64>,
    /// Degenerate groups in ascending eigenvalue order.
    pub sectors: Vec<ZenoSector>,
    /// Zero-eigenvalue vector orthogonal to `phi_1` and `phi_7`.
    pub dark_state: [C64; 7],
    /// Restricted coupling Hamiltonian.
    pub restricted: DMatrix<C64>,
}

impl ZenoDecomposition {
    /// Index of the zero-eigenvalue sector.
    pub fn zero_sector(&self) -> Option<&ZenoSector> {
        self.sectors.iter().find(|s| s.eigenvalue.abs() < 1e-9)
    }

    /// Effective couplings `(<psi1|phi2>^*, <psi1|phi6>^*)` multiplying the
    /// two laser Rabi frequencies inside the dark sector.
    pub fn dark_couplings(&self) -> (C64, C64) {
        (self.dark_state[1].conj(), self.dark_state[5].conj())
    }
}

/// Eigen-decomposition of `h_acf` restricted to a branch.
pub fn zeno_decompose(h_acf: &SparseOperator, subspace: &BranchSubspace) -> Result<ZenoDecomposition> {
    let restricted = restrict(h_acf, &subspace.states)?;
    let herm_err = (&restricted - restricted.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm_err > 1e-12 {
        return Err(Error::Eigen(format!("restricted operator not Hermitian ({herm_err:.2e})")));
    }
    let eig = restricted.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..7).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: [f64; 7] = std::array::from_fn(|k| eig.eigenvalues[order[k]]);
    let eigenvectors = DMatrix::from_fn(7, 7, |i, k| eig.eigenvectors[(i, order[k])]);

    let scale = eigenvalues.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut sectors: Vec<ZenoSector> = Vec::new();
    for k in 0..7 {
        let col: Vec<C64> = eigenvectors.column(k).iter().copied().collect();
        match sectors.last_mut() {
            Some(s) if (eigenvalues[k] - s.eigenvalue).abs() < tol => s.vectors.push(col),
            _ => sectors.push(ZenoSector { eigenvalue: eigenvalues[k], vectors: vec![col] }),
        }
    }
    let zero = sectors
        .iter_mut()
        .find(|s| s.eigenvalue.abs() < tol)
        .ok_or_else(|| Error::Eigen("no zero-eigenvalue sector".into()))?;
    // phi_1 and phi_7 are exact null vectors; the remainder of the null
    // projector defines psi_1.
    let mut q = zero.projector();
    for k in [0usize, 6] {
        for i in 0..7 {
            for j in 0..7 {
                let e = |x: usize| if x == k { 1.0 } else { 0.0 };
                q[(i, j)] -= C64::new(e(i) * e(j), 0.0);
            }
        }
    }
    let best = (0..7)
        .max_by(|&a, &b| q.column(a).norm().total_cmp(&q.column(b).norm()))
        .expect("seven columns");
    let col = q.column(best);
    let norm = col.norm();
    if norm < 1e-6 {
        return Err(Error::Eigen("dark state not found in null sector".into()));
    }
    let mut dark: [C64; 7] = std::array::from_fn(|i| col[i] / norm);
    // phase convention: overlap with (phi2 - phi4 + phi6) real positive
    let reference = dark[1] - dark[3] + dark[5];
    let phase = if reference.norm() > 1e-12 {
        reference.conj() / reference.norm()
    } else {
        let lead = dark.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        lead.conj() / lead.norm()
    };
    dark.iter_mut().for_each(|z| *z *= phase);
    let e = |k: usize| -> Vec<C64> { (0..7).map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect() };
    zero.vectors = vec![e(0), dark.to_vec(), e(6)];
    zero.eigenvalue = 0.0;

    Ok(ZenoDecomposition { eigenvalues, eigenvectors, sectors, dark_state: dark, restricted })
}

/// Effective Hamiltonian over `(phi1, psi1, phi7)` for laser Rabi frequencies
/// `omega_a`, `omega_b` at a given instant.
pub fn effective_hamiltonian_at(decomp: &ZenoDecomposition, omega_a: f64, omega_b: f64) -> Matrix3<C64> {
    let (ca, cb) = decomp.dark_couplings();
    let mut h = Matrix3::zeros();
    h[(1, 0)] = ca * omega_a;
    h[(0, 1)] = h[(1, 0)].conj();
    h[(1, 2)] = cb * omega_b;
    h[(2, 1)] = h[(1, 2)].conj();
    h
}

/// `H_eff(t)` built from the physical pulses.
pub fn effective_hamiltonian(decomp: &ZenoDecomposition, pulses: &PulseSet, t: f64) -> Result<Matrix3<C64>> {
    Ok(effective_hamiltonian_at(decomp, pulses.omega_a.eval(t)?, pulses.omega_b.eval(t)?))
}

/// `P H_drive P` evaluated numerically on the dark sector `(phi1, psi1, phi7)`
/// from a 7x7 drive matrix over `phi_1..phi_7`.
pub fn project_onto_dark_sector(decomp: &ZenoDecomposition, drive: &DMatrix<C64>) -> Matrix3<C64> {
    let zero = decomp.zero_sector().expect("zero sector present");
    let v = &zero.vectors;
    Matrix3::from_fn(|i, j| (0..7).flat_map(|a| (0..7).map(move |b| (a, b))).map(|(a, b)| v[i][a].conj() * drive[(a, b)] * v[j][b]).sum())
}

/// Three-level Hamiltonian `w1 (|1><0| + h.c.) + w2 (|1><2| + h.c.)`, shared
/// by the effective step-1 model and the step-2 `g - eR - R` system.
pub fn three_level_hamiltonian(w1: Schedule, w2: Schedule, c1: C64, c2: C64) -> TimeDependentHamiltonian {
    let op = |k: usize, c: C64| SparseOperator::from_triplets(3, [(1, k, c)]).plus_adjoint();
    TimeDependentHamiltonian::new(
        SparseOperator::zeros(3),
        vec![
            DriveTerm { label: "w1".into(), op: op(0, c1), schedule: w1 },
            DriveTerm { label: "w2".into(), op: op(2, c2), schedule: w2 },
        ],
    )
}

/// Effective step-1 model driven by the physical pulses through the dark state.
pub fn effective_model(decomp: &ZenoDecomposition, pulses: &PulseSet) -> TimeDependentHamiltonian {
    let (ca, cb) = decomp.dark_couplings();
    three_level_hamiltonian(pulses.omega_a, pulses.omega_b, ca, cb)
}

/// `1 - <psi|P|psi>` for each sampled state, with `P` the projector onto `sector`.
pub fn zeno_leakage(states: &[StateVector], sector: &[StateVector]) -> Vec<f64> {
    states
        .iter()
        .map(|psi| 1.0 - sector.iter().map(|v| v.inner(psi).norm_sqr()).sum::<f64>())
        .collect()
}

/// Full-space vectors spanning the dark sector `{phi1, psi1, phi7}`.
pub fn dark_sector_vectors(decomp: &ZenoDecomposition, subspace: &BranchSubspace) -> Vec<StateVector> {
    let zero = decomp.zero_sector().expect("zero sector present");
    zero.vectors.iter().map(|v| subspace.embed(v)).collect()
}

/// Closed-system full-model run from the branch source state, returning
/// sample times and dark-sector leakage.
pub fn leakage_series(
    params: &SystemParams,
    pulses: &PulseSet,
    basis: &Basis,
    branch: Branch,
    config: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let h1 = build_h1(params, pulses, basis);
    let sub = branch_subspace(basis, branch)?;
    let decomp = zeno_decompose(&build_h_acf(params, basis), &sub)?;
    let sector = dark_sector_vectors(&decomp, &sub);
    let span = crate::hilbert::Subspace::new(basis.dim(), sub.indices.to_vec());
    let obs = [Observable::sector("dark", &sector)];
    let run = integrate_schrodinger(&h1, sub.phi(1), Some(&span), &obs, params.t_f, config)?;
    let leak = run.trajectory.series[0].iter().map(|p| 1.0 - p).collect();
    Ok((run.trajectory.times, leak))
}
