use std::f64::consts::PI;

use fiberstap::dynamics::{integrate_lindblad, integrate_schrodinger, DensityMatrix, IntegratorConfig, Observable, State};
use fiberstap::hilbert::{Basis, SparseOperator, StateVector, Subspace};
use fiberstap::invariant::{
    auxiliary_consistency, effective_pulses, physical_pulses, PulseDesign, PulseSet, Step2Mode,
};
use fiberstap::model::{build_collapse_operators, build_h1, build_h2, build_h_acf, CollapseOperator, SystemParams};
use fiberstap::protocol::fit_phases;
use fiberstap::zeno::{branch_subspace, three_level_hamiltonian, zeno_decompose, Branch};
use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_index_is_a_bijection(i in 0usize..2240) {
        let basis = Basis::with_cutoff(1).unwrap();
        prop_assert_eq!(basis.dim(), 7 * 5 * 64);
        let s = basis.state(i).clone();
        prop_assert!(s.occupations.iter().all(|&n| n <= 1));
        prop_assert_eq!(basis.index(&s), Some(i));
    }

    #[test]
    fn sparse_entries_unique_and_in_range(
        entries in proptest::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0, -1.0f64..1.0), 0..40)
    ) {
        let op = SparseOperator::from_triplets(6, entries.into_iter().map(|(r, c, x, y)| (r, c, C64::new(x, y))));
        let mut seen = std::collections::HashSet::new();
        for (r, col, v) in op.triplets() {
            prop_assert!(r < 6 && col < 6);
            prop_assert!(seen.insert((r, col)));
            prop_assert_eq!(op.adjoint().get(col, r), v.conj());
        }
    }

    #[test]
    fn hamiltonians_hermitian_at_any_time(g in 0.3f64..2.0, eta in 0.3f64..2.0, s in 0.0f64..1.0) {
        let params = SystemParams { g, eta, ..Default::default() };
        let basis = Basis::with_cutoff(1).unwrap();
        let pulses = PulseSet::new(&PulseDesign::for_winding(1, params.t_f).unwrap(), &params, 2.0 * params.t_f, Step2Mode::Literal).unwrap();
        let h1 = build_h1(&params, &pulses, &basis);
        let h2 = build_h2(&params, &pulses, &basis);
        prop_assert!(h1.evaluate(s * params.t_f).hermiticity_error() < 1e-14);
        prop_assert!(h2.evaluate(2.0 * s * params.t_f).hermiticity_error() < 1e-14);
    }

    #[test]
    fn zeno_spectrum_for_any_couplings(g in 0.2f64..3.0, eta in 0.2f64..3.0) {
        let params = SystemParams { g, eta, ..Default::default() };
        let basis = Basis::with_cutoff(1).unwrap();
        for branch in [Branch::R, Branch::L] {
            let sub = branch_subspace(&basis, branch).unwrap();
            let d = zeno_decompose(&build_h_acf(&params, &basis), &sub).unwrap();
            let lam = params.lambda();
            let want = [-lam, -g, 0.0, 0.0, 0.0, g, lam];
            for (e, w) in d.eigenvalues.iter().zip(want) {
                prop_assert!((e - w).abs() < 1e-11, "{:?}", d.eigenvalues);
            }
            prop_assert!(d.dark_state[0].norm() < 1e-12 && d.dark_state[6].norm() < 1e-12);
            let norm: f64 = d.dark_state.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pulse_boundaries_and_ratio(eps in 0.05f64..1.4, t_f in 2.0f64..40.0, eta in 0.3f64..3.0, s in 0.0f64..1.0) {
        let design = PulseDesign::new(eps, t_f, 1, 1.0).unwrap();
        prop_assert!(design.beta(0.0).abs() < 1e-15);
        prop_assert!((design.beta(t_f) - PI / 2.0).abs() < 1e-12);
        prop_assert!((design.theta(t_f) - PI / (2.0 * eps.sin())).abs() < 1e-9);
        let (a1, b1) = effective_pulses(&design);
        prop_assert!(a1.value(0.0).abs() < 1e-15);
        prop_assert!(b1.value(t_f).abs() < 1e-12 * b1.value(0.0).abs().max(1.0));
        let params = SystemParams { eta, ..Default::default() };
        let (pa, pb) = physical_pulses(&design, &params).unwrap();
        let ratio = params.lambda() / eta;
        let t = s * t_f;
        prop_assert!((pa.value(t) - ratio * a1.value(t)).abs() < 1e-12);
        prop_assert!((pb.value(t) - ratio * b1.value(t)).abs() < 1e-12);
    }

    #[test]
    fn auxiliary_equations_hold(eps in 0.05f64..1.4, t_f in 2.0f64..40.0) {
        let (nu_res, beta_res) = auxiliary_consistency(&PulseDesign::new(eps, t_f, 1, 1.0).unwrap(), 101);
        prop_assert!(nu_res < 1e-10 && beta_res < 1e-10);
    }

    #[test]
    fn effective_evolution_is_unitary(eps in 0.1f64..1.2, t_f in 3.0f64..20.0) {
        let design = PulseDesign::new(eps, t_f, 1, 1.0).unwrap();
        let (a1, b1) = effective_pulses(&design);
        let h = three_level_hamiltonian(a1, b1, c(1.0), c(1.0));
        let obs = [Observable::basis("p0", 0), Observable::basis("p2", 2)];
        let cfg = IntegratorConfig::for_tf(t_f).with_dt(t_f / 2000.0);
        let run = integrate_schrodinger(&h, &StateVector::basis(3, 0), None, &obs, t_f, &cfg).unwrap();
        prop_assert!(run.max_norm_drift < 1e-8);
        prop_assert!(run.trajectory.times.windows(2).all(|w| w[1] > w[0]));
        for s in &run.trajectory.series {
            prop_assert!(s.iter().all(|p| (-1e-9..=1.0 + 1e-9).contains(p)));
        }
    }

    #[test]
    fn lindblad_keeps_trace_and_hermiticity(rate in 0.0f64..0.5, w in 0.1f64..1.5) {
        // driven two-level emitter with decay into a third level
        let h = fiberstap::model::TimeDependentHamiltonian::constant(SparseOperator::from_triplets(
            3,
            [(0, 1, c(w)), (1, 0, c(w))],
        ));
        let jump = CollapseOperator { label: "decay".into(), op: SparseOperator::from_triplets(3, [(2, 1, c(1.0))]), rate };
        let rho0 = DensityMatrix::pure(&StateVector::basis(3, 0), Subspace::full(3)).unwrap();
        let cfg = IntegratorConfig::for_tf(5.0).with_dt(1e-3);
        let run = integrate_lindblad(&h, &[jump], &rho0, None, &[Observable::basis("p2", 2)], 5.0, &cfg).unwrap();
        prop_assert!(run.max_trace_drift < 1e-6);
        prop_assert!(run.max_hermiticity_error < 1e-10);
        prop_assert!(run.min_eigenvalue > -1e-6);
    }

    #[test]
    fn phase_fit_beats_any_fixed_phases(
        amps in proptest::collection::vec((0.1f64..1.0, -PI..PI), 3),
        noise in 0.0f64..0.2,
        a in -PI..PI,
        b in -PI..PI,
    ) {
        let v: Vec<C64> = amps.iter().map(|&(r, p)| C64::from_polar(r, p)).collect();
        let mut block = Matrix3::from_fn(|j, k| v[j] * v[k].conj());
        for j in 0..3 {
            block[(j, j)] += c(noise);
        }
        let (_, best) = fit_phases(&block);
        let ph = [a, b, 0.0];
        let mut f = C64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                f += C64::from_polar(1.0, -ph[j]) * block[(j, k)] * C64::from_polar(1.0, ph[k]);
            }
        }
        prop_assert!(best >= f.re / 3.0 - 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(x in proptest::collection::vec(-1.0f64..1.0, 4), phase in -PI..PI) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-3);
        let psi = StateVector::from_real(&x).normalized();
        let rotated = psi.clone().scaled(C64::from_polar(1.0, phase));
        let f = State::Pure(psi.clone()).fidelity(&rotated);
        prop_assert!((f - 1.0).abs() < 1e-12);
    }
}

#[test]
fn collapse_rates_non_negative_and_counted() {
    let params = SystemParams { gamma: 0.1, kappa: 0.3, ..Default::default() };
    let basis = Basis::with_cutoff(1).unwrap();
    let ops = build_collapse_operators(&params, &basis);
    assert_eq!(ops.len(), 20);
    assert!(ops.iter().all(|o| o.rate >= 0.0));
    assert_eq!(ops.iter().filter(|o| o.rate == 0.3).count(), 6);
}
