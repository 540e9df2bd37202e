//! Browser bindings: pulse shapes, step-1 populations and the coupling
//! spectrum. Every function returns a flat row-major `Float64Array`.

use fiberstap::dynamics::{integrate_schrodinger, IntegratorConfig, Observable};
use fiberstap::hilbert::{Basis, StateVector};
use fiberstap::invariant::{effective_pulses, PulseDesign, PulseSet, Step2Mode};
use fiberstap::model::{build_h1, build_h_acf, SystemParams};
use fiberstap::zeno::{branch_subspace, three_level_hamiltonian, zeno_decompose, Branch};
use fiberstap::{Error, Subspace};
use num_complex::Complex64 as C64;
use wasm_bindgen::prelude::*;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn params(eta: f64, epsilon: f64, t_f: f64) -> Result<SystemParams, Error> {
    let p = SystemParams { eta, epsilon, t_f, ..Default::default() };
    p.validate()?;
    Ok(p)
}

/// Rows of `(t, Omega_A, Omega_B, Omega_g, Omega_R)` on `[0, 2 t_f]`.
#[wasm_bindgen]
pub fn pulses(eta: f64, epsilon: f64, t_f: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let p = params(eta, epsilon, t_f).map_err(js)?;
    let design = PulseDesign::new(epsilon, t_f, 1, 1.0).map_err(js)?;
    let set = PulseSet::new(&design, &p, 2.0 * t_f, Step2Mode::Literal).map_err(js)?;
    let n = samples.max(2);
    let mut out = Vec::with_capacity(5 * (n + 1));
    for k in 0..=n {
        let t = 2.0 * t_f * k as f64 / n as f64;
        out.push(t);
        out.extend([set.omega_a, set.omega_b, set.omega_g, set.omega_r].map(|s| s.value_or_zero(t)));
    }
    Ok(out)
}

/// Rows of `(t, P_phi1 effective, P_phi7 effective, P_phi1 full, P_phi7 full)`
/// for the R branch of step 1.
#[wasm_bindgen]
pub fn step1_populations(eta: f64, epsilon: f64, t_f: f64) -> Result<Vec<f64>, JsError> {
    let p = params(eta, epsilon, t_f).map_err(js)?;
    let design = PulseDesign::new(epsilon, t_f, 1, 1.0).map_err(js)?;
    let mut cfg = IntegratorConfig::for_tf(t_f).with_dt(t_f / 4000.0);
    cfg.sample_every = 40;

    let (a1, b1) = effective_pulses(&design);
    let one = C64::new(1.0, 0.0);
    let eff = three_level_hamiltonian(a1, b1, one, one);
    let obs = [Observable::basis("phi1", 0), Observable::basis("phi7", 2)];
    let e = integrate_schrodinger(&eff, &StateVector::basis(3, 0), None, &obs, t_f, &cfg).map_err(js)?;

    let basis = Basis::with_cutoff(1).map_err(js)?;
    let set = PulseSet::new(&design, &p, 2.0 * t_f, Step2Mode::Literal).map_err(js)?;
    let h1 = build_h1(&p, &set, &basis);
    let sub = branch_subspace(&basis, Branch::R).map_err(js)?;
    let span = Subspace::new(basis.dim(), sub.indices.to_vec());
    let obs = [Observable::state("phi1", sub.phi(1)), Observable::state("phi7", sub.phi(7))];
    let f = integrate_schrodinger(&h1, sub.phi(1), Some(&span), &obs, t_f, &cfg).map_err(js)?;

    let mut out = Vec::with_capacity(5 * e.trajectory.times.len());
    for (k, t) in e.trajectory.times.iter().enumerate() {
        out.extend([
            *t,
            e.trajectory.series[0][k],
            e.trajectory.series[1][k],
            f.trajectory.series[0][k],
            f.trajectory.series[1][k],
        ]);
    }
    Ok(out)
}

/// Rows of `(eta, e_0 .. e_6)`: branch eigenvalues of the coupling
/// Hamiltonian for `eta` in `[eta_min, eta_max]`, with `g = 1`.
#[wasm_bindgen]
pub fn spectrum_vs_eta(eta_min: f64, eta_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let basis = Basis::with_cutoff(1).map_err(js)?;
    let sub = branch_subspace(&basis, Branch::R).map_err(js)?;
    let n = samples.max(2);
    let mut out = Vec::with_capacity(8 * n);
    for k in 0..n {
        let eta = eta_min + (eta_max - eta_min) * k as f64 / (n - 1) as f64;
        let p = SystemParams { eta, ..Default::default() };
        p.validate().map_err(js)?;
        let d = zeno_decompose(&build_h_acf(&p, &basis), &sub).map_err(js)?;
        out.push(eta);
        out.extend(d.eigenvalues);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let p = pulses(1.0, 0.25, 15.0, 10).unwrap();
        assert_eq!(p.len(), 55);
        let s = spectrum_vs_eta(0.5, 2.0, 4).unwrap();
        assert_eq!(s.len(), 32);
        assert!((s[8 * 3 + 7] - (1.0f64 + 8.0).sqrt()).abs() < 1e-12);
        let pop = step1_populations(1.0, 0.252_680_255_142_078_65, 15.0).unwrap();
        let last = &pop[pop.len() - 5..];
        assert!(last[2] > 0.999_999 && last[4] > 0.98);
    }
}
