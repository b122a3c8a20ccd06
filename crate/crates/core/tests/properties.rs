use conslaw_core::dynamics::{evolve_density, DensityMatrix, HamiltonianSpec, LindbladSpec, UnitaryPropagator};
use conslaw_core::models::random_product_state_at;
use conslaw_core::pauli::{Boundary, Pauli, PauliBasisSet, PauliString};
use conslaw_core::spectral::{center, svd_analyze};
use conslaw_core::{Complex64, DataMatrix, PauliSum};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0usize..4, n).prop_map(move |labels| {
        let labels: Vec<Pauli> = labels.into_iter().map(|i| Pauli::ALL[i]).collect();
        PauliString::from_labels(&labels).unwrap()
    })
}

fn hamiltonian(n: usize) -> impl Strategy<Value = HamiltonianSpec> {
    prop::collection::vec((-1.0f64..1.0, pauli_string(n)), 1..6)
        .prop_map(move |terms| HamiltonianSpec::new(n, terms).unwrap())
}

fn dense_matrix(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-scale..scale, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn singular_values_sorted(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn commutation_matches_dense(p in pauli_string(4), q in pauli_string(4)) {
        let a = p.to_dense().unwrap();
        let b = q.to_dense().unwrap();
        let comm = (&a * &b - &b * &a).norm();
        prop_assert_eq!(p.commutes(&q).unwrap(), comm < 1e-12);
    }

    #[test]
    fn product_matches_dense(p in pauli_string(3), q in pauli_string(3)) {
        let (phase, r) = p.multiply(&q).unwrap();
        let want = p.to_dense().unwrap() * q.to_dense().unwrap();
        let got = r.to_dense().unwrap() * phase.to_complex();
        prop_assert!((want - got).norm() < 1e-12);
    }

    #[test]
    fn expectation_is_linear(
        c in prop::collection::vec(-2.0f64..2.0, 3),
        ps in prop::collection::vec(pauli_string(3), 3),
        seed in 0u64..1000,
    ) {
        let psi = random_product_state_at(3, seed, 0).unwrap();
        let sum = PauliSum::new(3, c.iter().copied().zip(ps.iter().copied())).unwrap();
        let dense = sum.to_dense().unwrap();
        let amps = psi.amplitudes();
        let direct = (amps.adjoint() * &dense * amps)[(0, 0)].re;
        let mut by_terms = 0.0;
        for (ci, p) in sum.terms() {
            by_terms += ci * psi.expectation(p).unwrap();
        }
        prop_assert!((direct - by_terms).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn energy_is_conserved(h in hamiltonian(4), seed in 0u64..1000, t in 0.0f64..20.0) {
        let psi = random_product_state_at(4, seed, 0).unwrap();
        let prop_h = UnitaryPropagator::new(&h).unwrap();
        let hd = h.terms().to_dense().unwrap();
        let energy = |v: &nalgebra::DVector<Complex64>| (v.adjoint() * &hd * v)[(0, 0)].re;
        let e0 = energy(psi.amplitudes());
        let psi_t = prop_h.evolve(&psi, t).unwrap();
        prop_assert!((energy(psi_t.amplitudes()) - e0).abs() < 1e-9);
        prop_assert!((psi_t.amplitudes().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dephasing_never_raises_purity(h in hamiltonian(2), seed in 0u64..1000, gamma in 0.01f64..0.5) {
        let n = 2;
        let jumps = (0..n).map(|i| (gamma.sqrt(), PauliString::single(n, i, Pauli::Z).unwrap())).collect();
        let spec = LindbladSpec::new(h, jumps).unwrap();
        let rho0 = random_product_state_at(n, seed, 0).unwrap().to_density();
        let mut last = rho0.purity();
        for j in 1..6 {
            let rho: DensityMatrix = evolve_density(&spec, &rho0, 0.4 * j as f64).unwrap();
            let p = rho.purity();
            prop_assert!(p <= last + 1e-8, "purity rose from {} to {}", last, p);
            prop_assert!((rho.trace() - 1.0).abs() < 1e-8);
            last = p;
        }
    }

    #[test]
    fn mirsky(w in dense_matrix(6, 9, 1.0), e in dense_matrix(6, 9, 0.1)) {
        let s = singular_values_sorted(&w);
        let s_hat = singular_values_sorted(&(&w + &e));
        let bound = e.clone().svd(false, false).singular_values.max();
        for (a, b) in s.iter().zip(&s_hat) {
            prop_assert!((a - b).abs() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn centering_is_a_projection(values in dense_matrix(5, 12, 1.0)) {
        let n = 3;
        let elements = ["XII", "ZII", "IXI", "IZZ", "IIY"]
            .iter()
            .map(|s| s.parse::<PauliString>().unwrap())
            .collect();
        let basis = PauliBasisSet::from_elements(elements, n, 2, Boundary::Open).unwrap();
        let times: Vec<f64> = (0..4).map(|j| j as f64).collect();
        let x = DataMatrix::new(values, basis, times, 3).unwrap();
        let w = center(&x).unwrap();
        let again = center(&x.with_values(w.values().clone()).unwrap()).unwrap();
        prop_assert!((w.values() - again.values()).norm() < 1e-12);
        for k in 0..3 {
            for r in 0..5 {
                let s: f64 = (0..4).map(|j| w.values()[(r, k * 4 + j)]).sum();
                prop_assert!(s.abs() < 1e-12);
            }
        }
        // every singular direction obeys σ² = Σ_cols (uᵀW)²
        let report = svd_analyze(&w, 1e-9).unwrap();
        for (i, s) in report.singular_values.iter().enumerate() {
            let u = report.left_vectors.column(i);
            let dev = (u.transpose() * w.values()).norm_squared();
            prop_assert!((s * s - dev).abs() <= 1e-10 * (1.0 + s * s));
        }
    }
}

#[test]
fn product_states_are_pure() {
    for seed in 0..20 {
        let psi = random_product_state_at(3, seed, 1).unwrap();
        let rho = psi.to_density();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }
}
