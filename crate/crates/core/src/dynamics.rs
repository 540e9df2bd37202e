//! Fixed-step RK4 integration of the Schrodinger and Lindblad equations,
//! plus fidelity and population observables.
//!
//! Both integrators accept an optional coordinate [`Subspace`]. When given,
//! every operator is re-expressed on it and the run fails unless the span is
//! closed under all of them, so the restriction is exact.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{SparseOperator, StateVector, Subspace, ZERO};
use crate::model::{CollapseOperator, TimeDependentHamiltonian};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Requested step; the actual step divides the duration evenly.
    pub dt: f64,
    /// Record observables every this many steps (and always at the end).
    pub sample_every: usize,
    /// Keep the sampled states in the trajectory (Schrodinger runs only).
    pub keep_states: bool,
    /// Run the positivity eigen-check on every n-th sample of Lindblad runs.
    pub positivity_every: usize,
}

impl IntegratorConfig {
    pub const STEPS_PER_TF: f64 = 20_000.0;

    pub fn for_tf(t_f: f64) -> Self {
        IntegratorConfig { dt: t_f / Self::STEPS_PER_TF, sample_every: 200, keep_states: false, positivity_every: 10 }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn steps(&self, duration: f64) -> usize {
        ((duration / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("{} must be positive", self.dt) });
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter { name: "sample_every", reason: "must be >= 1".into() });
        }
        Ok(())
    }
}

/// Population of a named projector `sum_v |v><v|` (vectors given sparsely
/// in full-basis coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub name: String,
    pub vectors: Vec<Vec<(usize, C64)>>,
}

impl Observable {
    pub fn basis(name: impl Into<String>, index: usize) -> Self {
        Observable { name: name.into(), vectors: vec![vec![(index, C64::new(1.0, 0.0))]] }
    }

    pub fn state(name: impl Into<String>, v: &StateVector) -> Self {
        Observable { name: name.into(), vectors: vec![v.support()] }
    }

    pub fn sector(name: impl Into<String>, vs: &[StateVector]) -> Self {
        Observable { name: name.into(), vectors: vs.iter().map(|v| v.support()).collect() }
    }

    fn localize(&self, span: &Subspace) -> Observable {
        let vectors = self
            .vectors
            .iter()
            .map(|v| v.iter().filter_map(|&(i, a)| span.position(i).map(|p| (p, a))).collect())
            .collect();
        Observable { name: self.name.clone(), vectors }
    }

    fn pure_value(&self, psi: &[C64]) -> f64 {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|&(i, a)| a.conj() * psi[i]).sum::<C64>().norm_sqr())
            .sum()
    }

    fn mixed_value(&self, rho: &[C64], d: usize) -> f64 {
        let mut total = 0.0;
        for v in &self.vectors {
            let mut acc = ZERO;
            for &(i, a) in v {
                for &(j, b) in v {
                    acc += a.conj() * rho[i * d + j] * b;
                }
            }
            total += acc.re;
        }
        total
    }

    pub fn population(&self, state: &State) -> f64 {
        match state {
            State::Pure(psi) => self.pure_value(psi),
            State::Mixed(rho) => {
                let local = self.localize(&rho.space);
                let flat = rho.row_major();
                local.mixed_value(&flat, rho.space.dim())
            }
        }
    }
}

/// Density matrix supported on a coordinate subspace of the full basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub space: Subspace,
    pub data: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn pure(psi: &StateVector, space: Subspace) -> Result<Self> {
        if space.outside_weight(psi) > 1e-14 {
            return Err(Error::InvalidParameter { name: "rho0", reason: "state has weight outside span".into() });
        }
        let v = space.project(psi);
        let d = space.dim();
        let data = DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
        Ok(DensityMatrix { space, data })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let data = DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        DensityMatrix { space: Subspace::full(dim), data }
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `<target| rho |target>`
    pub fn fidelity(&self, target: &StateVector) -> f64 {
        Observable::state("target", target).population(&State::Mixed(self.clone()))
    }

    fn row_major(&self) -> Vec<C64> {
        let d = self.space.dim();
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = self.data[(i, j)];
            }
        }
        out
    }

    /// Re-express on a larger span containing the current one.
    pub fn extend_to(&self, span: &Subspace) -> Result<Self> {
        let d = span.dim();
        let mut data = DMatrix::zeros(d, d);
        let pos: Vec<usize> = self
            .space
            .indices()
            .iter()
            .map(|&i| {
                span.position(i).ok_or(Error::InvalidParameter {
                    name: "rho0",
                    reason: format!("basis index {i} outside integration span"),
                })
            })
            .collect::<Result<_>>()?;
        for (a, &pa) in pos.iter().enumerate() {
            for (b, &pb) in pos.iter().enumerate() {
                data[(pa, pb)] = self.data[(a, b)];
            }
        }
        Ok(DensityMatrix { space: span.clone(), data })
    }

    /// Matrix element `<i| rho |j>` between full-basis indices.
    pub fn element(&self, i: usize, j: usize) -> C64 {
        match (self.space.position(i), self.space.position(j)) {
            (Some(a), Some(b)) => self.data[(a, b)],
            _ => ZERO,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn fidelity(&self, target: &StateVector) -> f64 {
        match self {
            State::Pure(psi) => fidelity(psi, target),
            State::Mixed(rho) => rho.fidelity(target),
        }
    }

    /// `<i| rho |j>`, or `psi_i psi_j^*` for pure states.
    pub fn element(&self, i: usize, j: usize) -> C64 {
        match self {
            State::Pure(psi) => psi[i] * psi[j].conj(),
            State::Mixed(rho) => rho.element(i, j),
        }
    }
}

/// `|<target|psi>|^2`
pub fn fidelity(psi: &StateVector, target: &StateVector) -> f64 {
    target.inner(psi).norm_sqr()
}

/// Populations of each observable, as `(name, value)`.
pub fn populations(state: &State, observables: &[Observable]) -> Vec<(String, f64)> {
    observables.iter().map(|o| (o.name.clone(), o.population(state))).collect()
}

/// Sampled observables of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// One series per observable, aligned with `times`.
    pub series: Vec<Vec<f64>>,
    /// Sampled states in full-basis coordinates, when requested.
    pub states: Vec<StateVector>,
}

impl Trajectory {
    fn new(observables: &[Observable]) -> Self {
        Trajectory {
            names: observables.iter().map(|o| o.name.clone()).collect(),
            series: vec![Vec::new(); observables.len()],
            ..Default::default()
        }
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.series[k].as_slice())
    }

    /// Append `other`, shifting its times by the last time of `self`.
    pub fn append(&mut self, other: &Trajectory) {
        let offset = self.times.last().copied().unwrap_or(0.0);
        let skip = usize::from(!self.times.is_empty());
        self.times.extend(other.times.iter().skip(skip).map(|t| t + offset));
        for (k, name) in self.names.iter().enumerate() {
            if let Some(s) = other.get(name) {
                self.series[k].extend(s.iter().skip(skip));
            }
        }
        self.states.extend(other.states.iter().skip(skip).cloned());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&fmt_num(*t));
            for s in &self.series {
                out.push(',');
                out.push_str(&fmt_num(s[k]));
            }
            out.push('\n');
        }
        out
    }
}

/// Twelve significant digits, scientific notation.
pub fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Hamiltonian in span coordinates.
struct LocalHamiltonian {
    static_part: SparseOperator,
    drives: Vec<(SparseOperator, crate::invariant::Schedule)>,
}

impl LocalHamiltonian {
    fn new(h: &TimeDependentHamiltonian, span: &Subspace) -> Result<Self> {
        let static_part = span.restrict_operator(&h.static_part, "H_static")?;
        let drives = h
            .drives
            .iter()
            .map(|d| Ok((span.restrict_operator(&d.op, &d.label)?, d.schedule)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalHamiltonian { static_part, drives })
    }

    /// `out = -i H(t) x`
    fn rhs(&self, t: f64, x: &[C64], out: &mut [C64]) {
        self.static_part.apply_into(x, out);
        for (op, s) in &self.drives {
            op.apply_add(C64::new(s.value(t), 0.0), x, out);
        }
        out.iter_mut().for_each(|z| *z *= -I);
    }
}

#[derive(Clone, Debug)]
pub struct SchrodingerRun {
    pub trajectory: Trajectory,
    /// Final state in full-basis coordinates.
    pub final_state: StateVector,
    pub max_norm_drift: f64,
}

/// Integrate `i d|psi>/dt = H(t)|psi>` on `[0, duration]`.
pub fn integrate_schrodinger(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    span: Option<&Subspace>,
    observables: &[Observable],
    duration: f64,
    config: &IntegratorConfig,
) -> Result<SchrodingerRun> {
    config.validate()?;
    h.check_domain(duration)?;
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.len() });
    }
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter { name: "psi0", reason: format!("norm {norm0} != 1") });
    }
    let full = Subspace::full(h.dim());
    let span = span.unwrap_or(&full);
    if span.outside_weight(psi0) > 1e-14 {
        return Err(Error::InvalidParameter { name: "psi0", reason: "state has weight outside span".into() });
    }
    let local = LocalHamiltonian::new(h, span)?;
    let obs: Vec<Observable> = observables.iter().map(|o| o.localize(span)).collect();

    let steps = config.steps(duration);
    let dt = duration / steps as f64;
    let d = span.dim();
    let mut psi = span.project(psi0).0;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![ZERO; d], vec![ZERO; d], vec![ZERO; d], vec![ZERO; d], vec![ZERO; d]);

    let mut traj = Trajectory::new(observables);
    let mut max_drift: f64 = 0.0;
    let mut record = |step: usize, psi: &[C64], traj: &mut Trajectory| -> Result<()> {
        let t = step as f64 * dt;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite { step, t });
        }
        max_drift = max_drift.max((norm - 1.0).abs());
        traj.times.push(t);
        for (k, o) in obs.iter().enumerate() {
            traj.series[k].push(o.pure_value(psi));
        }
        if config.keep_states {
            traj.states.push(span.embed(&StateVector(psi.to_vec())));
        }
        Ok(())
    };
    record(0, &psi, &mut traj)?;

    for step in 0..steps {
        let t = step as f64 * dt;
        local.rhs(t, &psi, &mut k1);
        for i in 0..d {
            tmp[i] = psi[i] + k1[i] * (0.5 * dt);
        }
        local.rhs(t + 0.5 * dt, &tmp, &mut k2);
        for i in 0..d {
            tmp[i] = psi[i] + k2[i] * (0.5 * dt);
        }
        local.rhs(t + 0.5 * dt, &tmp, &mut k3);
        for i in 0..d {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        local.rhs(t + dt, &tmp, &mut k4);
        for i in 0..d {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        let n = step + 1;
        if n % config.sample_every == 0 || n == steps {
            record(n, &psi, &mut traj)?;
        }
    }

    Ok(SchrodingerRun {
        trajectory: traj,
        final_state: span.embed(&StateVector(psi)),
        max_norm_drift: max_drift,
    })
}

/// Generator of the Lindblad equation in span coordinates, in the form
/// `-i (K rho - rho K^dagger) + sum_k L_k rho L_k^dagger` with
/// `K = H - (i/2) sum_k L_k^dagger L_k` and rates folded into `L_k`.
struct LocalLindbladian {
    hamiltonian: LocalHamiltonian,
    jumps: Vec<SparseOperator>,
    d: usize,
}

impl LocalLindbladian {
    fn new(h: &TimeDependentHamiltonian, collapse: &[CollapseOperator], span: &Subspace) -> Result<Self> {
        let mut hamiltonian = LocalHamiltonian::new(h, span)?;
        let d = span.dim();
        let mut jumps = Vec::new();
        let mut decay = SparseOperator::zeros(d);
        for c in collapse {
            if c.rate < 0.0 {
                return Err(Error::InvalidParameter { name: "rate", reason: format!("{} < 0 for {}", c.rate, c.label) });
            }
            if c.rate == 0.0 {
                continue;
            }
            let l = span.restrict_operator(&c.op, &c.label)?.scale(C64::new(c.rate.sqrt(), 0.0));
            decay = decay.add(&l.adjoint().matmul(&l));
            jumps.push(l);
        }
        hamiltonian.static_part = hamiltonian.static_part.add(&decay.scale(C64::new(0.0, -0.5)));
        Ok(LocalLindbladian { hamiltonian, jumps, d })
    }

    fn rhs(&self, t: f64, rho: &[C64], out: &mut [C64], work: &mut [C64]) {
        let d = self.d;
        // work = K(t) rho, row by row
        work.iter_mut().for_each(|z| *z = ZERO);
        let accumulate = |op: &SparseOperator, s: C64, work: &mut [C64]| {
            for r in 0..d {
                for (c, v) in op.row(r) {
                    let a = s * v;
                    let (dst, src) = (r * d, c * d);
                    for j in 0..d {
                        work[dst + j] += a * rho[src + j];
                    }
                }
            }
        };
        accumulate(&self.hamiltonian.static_part, C64::new(1.0, 0.0), work);
        for (op, sched) in &self.hamiltonian.drives {
            let s = sched.value(t);
            if s != 0.0 {
                accumulate(op, C64::new(s, 0.0), work);
            }
        }
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = -I * work[i * d + j] + I * work[j * d + i].conj();
            }
        }
        for l in &self.jumps {
            // work = L rho
            work.iter_mut().for_each(|z| *z = ZERO);
            accumulate(l, C64::new(1.0, 0.0), work);
            // out += (L rho) L^dagger
            for jrow in 0..d {
                for (c, v) in l.row(jrow) {
                    let vc = v.conj();
                    for i in 0..d {
                        out[i * d + jrow] += work[i * d + c] * vc;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct LindbladRun {
    pub trajectory: Trajectory,
    pub final_state: DensityMatrix,
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// Integrate the Lindblad master equation on `[0, duration]`.
pub fn integrate_lindblad(
    h: &TimeDependentHamiltonian,
    collapse: &[CollapseOperator],
    rho0: &DensityMatrix,
    span: Option<&Subspace>,
    observables: &[Observable],
    duration: f64,
    config: &IntegratorConfig,
) -> Result<LindbladRun> {
    config.validate()?;
    h.check_domain(duration)?;
    if rho0.space.full_dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.space.full_dim() });
    }
    for c in collapse {
        if c.op.dim() != h.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: c.op.dim() });
        }
    }
    let full = Subspace::full(h.dim());
    let span = span.unwrap_or(&full);
    let rho_start = rho0.extend_to(span)?;
    if (rho_start.trace() - 1.0).abs() > 1e-10 || rho_start.hermiticity_error() > 1e-12 {
        return Err(Error::InvalidParameter { name: "rho0", reason: "must be Hermitian with unit trace".into() });
    }
    let generator = LocalLindbladian::new(h, collapse, span)?;
    let obs: Vec<Observable> = observables.iter().map(|o| o.localize(span)).collect();

    let d = span.dim();
    let n = d * d;
    let steps = config.steps(duration);
    let dt = duration / steps as f64;
    let mut rho = rho_start.row_major();
    let mut k = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
    let mut tmp = vec![ZERO; n];
    let mut work = vec![ZERO; n];

    let mut traj = Trajectory::new(observables);
    let mut stats = (0.0f64, 0.0f64, f64::INFINITY);
    let mut samples = 0usize;
    let mut record = |step: usize, rho: &[C64], traj: &mut Trajectory, last: bool| -> Result<()> {
        let t = step as f64 * dt;
        let tr: C64 = (0..d).map(|i| rho[i * d + i]).sum();
        if !tr.re.is_finite() {
            return Err(Error::NonFinite { step, t });
        }
        stats.0 = stats.0.max((tr.re - 1.0).abs());
        let mut herm: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                herm = herm.max((rho[i * d + j] - rho[j * d + i].conj()).norm());
            }
        }
        stats.1 = stats.1.max(herm);
        if last || (config.positivity_every > 0 && samples.is_multiple_of(config.positivity_every)) {
            let m = DensityMatrix { space: span.clone(), data: DMatrix::from_row_slice(d, d, rho) };
            stats.2 = stats.2.min(m.min_eigenvalue());
        }
        samples += 1;
        traj.times.push(t);
        for (k, o) in obs.iter().enumerate() {
            traj.series[k].push(o.mixed_value(rho, d));
        }
        Ok(())
    };
    record(0, &rho, &mut traj, false)?;

    for step in 0..steps {
        let t = step as f64 * dt;
        generator.rhs(t, &rho, &mut k[0], &mut work);
        for i in 0..n {
            tmp[i] = rho[i] + k[0][i] * (0.5 * dt);
        }
        generator.rhs(t + 0.5 * dt, &tmp, &mut k[1], &mut work);
        for i in 0..n {
            tmp[i] = rho[i] + k[1][i] * (0.5 * dt);
        }
        generator.rhs(t + 0.5 * dt, &tmp, &mut k[2], &mut work);
        for i in 0..n {
            tmp[i] = rho[i] + k[2][i] * dt;
        }
        generator.rhs(t + dt, &tmp, &mut k[3], &mut work);
        for i in 0..n {
            rho[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * (dt / 6.0);
        }
        let s = step + 1;
        if s % config.sample_every == 0 || s == steps {
            record(s, &rho, &mut traj, s == steps)?;
        }
    }

    Ok(LindbladRun {
        trajectory: traj,
        final_state: DensityMatrix { space: span.clone(), data: DMatrix::from_row_slice(d, d, &rho) },
        max_trace_drift: stats.0,
        max_hermiticity_error: stats.1,
        min_eigenvalue: stats.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::Schedule;
    use crate::model::DriveTerm;

    fn sigma_x() -> SparseOperator {
        SparseOperator::from_triplets(2, [(0, 1, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))])
    }

    fn cfg(dt: f64) -> IntegratorConfig {
        IntegratorConfig { dt, sample_every: 10, keep_states: false, positivity_every: 1 }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = TimeDependentHamiltonian::constant(SparseOperator::zeros(3));
        let psi = StateVector(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO]);
        let run = integrate_schrodinger(&h, &psi, None, &[], 5.0, &cfg(0.01)).unwrap();
        assert_eq!(run.final_state, psi);
    }

    #[test]
    fn rabi_oscillation() {
        let omega = 0.7;
        let h = TimeDependentHamiltonian::new(
            SparseOperator::zeros(2),
            vec![DriveTerm { label: "x".into(), op: sigma_x(), schedule: Schedule::constant(omega, 10.0) }],
        );
        let psi0 = StateVector::basis(2, 0);
        let obs = [Observable::basis("p1", 1)];
        let t = std::f64::consts::FRAC_PI_2 / omega;
        let run = integrate_schrodinger(&h, &psi0, None, &obs, t, &cfg(1e-3)).unwrap();
        let p = *run.trajectory.get("p1").unwrap().last().unwrap();
        assert!((p - 1.0).abs() < 1e-10);
        let mid = run.trajectory.times.len() / 2;
        let tm = run.trajectory.times[mid];
        assert!((run.trajectory.series[0][mid] - (omega * tm).sin().powi(2)).abs() < 1e-10);
        assert!(run.max_norm_drift < 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = TimeDependentHamiltonian::new(
            SparseOperator::zeros(2),
            vec![DriveTerm { label: "x".into(), op: sigma_x(), schedule: Schedule::constant(1.0, 1.0) }],
        );
        let psi0 = StateVector::basis(2, 0);
        assert_eq!(integrate_schrodinger(&h, &psi0, None, &[], 2.0, &cfg(0.1)).unwrap_err().kind(), "pulse_domain_too_short");
        assert!(integrate_schrodinger(&h, &StateVector::zeros(2), None, &[], 1.0, &cfg(0.1)).is_err());
        assert!(integrate_schrodinger(&h, &StateVector::basis(3, 0), None, &[], 1.0, &cfg(0.1)).is_err());
        assert!(integrate_schrodinger(&h, &psi0, None, &[], 1.0, &cfg(0.0)).is_err());
        let span = Subspace::new(2, vec![0]);
        assert_eq!(integrate_schrodinger(&h, &psi0, Some(&span), &[], 1.0, &cfg(0.1)).unwrap_err().kind(), "span_not_invariant");
    }

    #[test]
    fn non_finite_detected() {
        let h = TimeDependentHamiltonian::constant(sigma_x().scale(C64::new(1e300, 0.0)));
        let err = integrate_schrodinger(&h, &StateVector::basis(2, 0), None, &[], 1.0, &cfg(0.1)).unwrap_err();
        assert_eq!(err.kind(), "non_finite");
    }

    #[test]
    fn mode_decay_is_exponential() {
        // single mode truncated at one photon: |1> decays to |0> at rate kappa
        let kappa = 0.8;
        let a = SparseOperator::from_triplets(2, [(0, 1, C64::new(1.0, 0.0))]);
        let h = TimeDependentHamiltonian::constant(SparseOperator::zeros(2));
        let rho0 = DensityMatrix::pure(&StateVector::basis(2, 1), Subspace::full(2)).unwrap();
        let collapse = [CollapseOperator { label: "a".into(), op: a, rate: kappa }];
        let obs = [Observable::basis("n", 1)];
        let run = integrate_lindblad(&h, &collapse, &rho0, None, &obs, 1.0 / kappa, &cfg(1e-3)).unwrap();
        let n = *run.trajectory.get("n").unwrap().last().unwrap();
        assert!((n - (-1.0f64).exp()).abs() < 1e-10, "{n}");
        assert!(run.max_trace_drift < 1e-12);
        assert!(run.min_eigenvalue > -1e-12);
    }

    #[test]
    fn closed_lindblad_matches_schrodinger() {
        let h = TimeDependentHamiltonian::new(
            SparseOperator::zeros(2),
            vec![DriveTerm { label: "x".into(), op: sigma_x(), schedule: Schedule { amplitude: 0.9, rate: 0.3, shape: crate::invariant::Shape::Sin, end: 10.0 } }],
        );
        let psi0 = StateVector::basis(2, 0);
        let obs = [Observable::basis("p1", 1)];
        let a = integrate_schrodinger(&h, &psi0, None, &obs, 7.0, &cfg(1e-3)).unwrap();
        let rho0 = DensityMatrix::pure(&psi0, Subspace::full(2)).unwrap();
        let b = integrate_lindblad(&h, &[], &rho0, None, &obs, 7.0, &cfg(1e-3)).unwrap();
        let target = a.final_state.clone();
        assert!((b.final_state.fidelity(&target) - 1.0).abs() < 1e-10);
        for (x, y) in a.trajectory.series[0].iter().zip(&b.trajectory.series[0]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_edge_cases() {
        let v = StateVector(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        assert!((fidelity(&v, &v) - 1.0).abs() < 1e-15);
        let w = StateVector(vec![C64::new(0.8, 0.0), C64::new(0.0, -0.6)]);
        assert!(fidelity(&v, &w) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(7);
        assert!((mixed.fidelity(&StateVector::basis(7, 3)) - 1.0 / 7.0).abs() < 1e-15);
        let target = StateVector::from_real(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).normalized();
        assert!((mixed.fidelity(&target) - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn population_probes() {
        let dim = 7;
        let obs = [Observable::basis("phi1", 0), Observable::basis("phi7", 6), Observable::basis("phi3", 2)];
        let pops = populations(&State::Pure(StateVector::basis(dim, 0)), &obs);
        assert_eq!(pops.iter().map(|p| p.1).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        let mut sup = StateVector::zeros(dim);
        sup[0] = C64::new(1.0, 0.0);
        sup[6] = C64::new(1.0, 0.0);
        let sup = sup.normalized();
        let rho = DensityMatrix::pure(&sup, Subspace::full(dim)).unwrap();
        for state in [State::Pure(sup.clone()), State::Mixed(rho)] {
            let pops = populations(&state, &obs);
            assert!((pops[0].1 - 0.5).abs() < 1e-15 && (pops[1].1 - 0.5).abs() < 1e-15);
            assert!(pops.iter().map(|p| p.1).sum::<f64>() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn csv_formatting_is_fixed() {
        assert_eq!(fmt_num(0.0), "0.00000000000e0");
        assert_eq!(fmt_num(-0.0), "0.00000000000e0");
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        let mut t = Trajectory::new(&[Observable::basis("p", 0)]);
        t.times = vec![0.0, 0.5];
        t.series = vec![vec![1.0, 0.25]];
        assert_eq!(t.to_csv(), "t,p\n0.00000000000e0,1.00000000000e0\n5.00000000000e-1,2.50000000000e-1\n");
    }
}
