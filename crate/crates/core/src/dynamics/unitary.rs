use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{HamiltonianSpec, StateVector};
use crate::error::{ensure, Error, Result};
use crate::prelude::*;
use crate::DENSE_CAP;

/// `exp(-iHt)` through a cached eigendecomposition `H = V diag(E) V†`.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone)]
pub struct UnitaryPropagator {
    n: usize,
    energies: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl UnitaryPropagator {
    pub fn new(h: &HamiltonianSpec) -> Result<Self> {
        let n = h.num_sites();
        if n > DENSE_CAP {
            return Err(Error::ResourceLimit(format!("{n} qubits exceeds dense cap {DENSE_CAP}")));
        }
        let dense = h.terms().to_dense()?;
        let eig = dense.symmetric_eigen();
        Ok(UnitaryPropagator {
            n,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// Eigenvector of `energies()[i]` (unsorted order).
    pub fn eigenvector(&self, i: usize) -> DVector<Complex64> {
        self.vectors.column(i).into_owned()
    }

    /// `exp(-iHt) ψ₀`; `t` may be negative.
    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        Ok(self.trajectory(psi0, &[t])?.pop().expect("one time"))
    }

    /// States at every time in `times`, sharing one basis change of `ψ₀`.
    pub fn trajectory(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        ensure(psi0.num_sites() == self.n, || {
            format!("state on {} qubits, propagator on {}", psi0.num_sites(), self.n)
        })?;
        ensure(times.iter().all(|t| t.is_finite()), || "non-finite evolution time".into())?;
        let coeffs = self.vectors.ad_mul(psi0.amplitudes());
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let phased = DVector::from_fn(coeffs.len(), |a, _| {
                coeffs[a] * Complex64::from_polar(1.0, -self.energies[a] * t)
            });
            let amps = &self.vectors * phased;
            let norm = amps.norm();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::NumericFailure(format!("norm drifted to {norm} at t = {t}")));
            }
            out.push(StateVector::from_raw(self.n, amps));
        }
        Ok(out)
    }
}

/// One-shot `exp(-iHt) ψ₀`. Build a [`UnitaryPropagator`] for repeated calls.
pub fn evolve_pure(h: &HamiltonianSpec, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("evolution time {t}")));
    }
    h.propagator()?.evolve(psi0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    /// exp(A) by scaling and squaring with a Taylor series.
    fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let norm: f64 = a.iter().map(|z| z.norm()).sum();
        let mut s = 0;
        while norm / f64::powi(2.0, s) > 0.05 {
            s += 1;
        }
        let b = a.unscale(f64::powi(2.0, s));
        let dim = a.nrows();
        let mut sum = DMatrix::identity(dim, dim);
        let mut term = DMatrix::identity(dim, dim);
        for k in 1..30 {
            term = &term * &b / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn single_qubit_precession() {
        let h = HamiltonianSpec::new(1, [(1.0, p("Z"))]).unwrap();
        let plus = StateVector::normalized(
            1,
            DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]),
        )
        .unwrap();
        let prop = h.propagator().unwrap();
        for t in [0.0, 0.3, core::f64::consts::FRAC_PI_4, -1.1] {
            let s = prop.evolve(&plus, t).unwrap();
            assert!((s.expectation(&p("X")).unwrap() - (2.0 * t).cos()).abs() < 1e-12);
        }
        let s = prop.evolve(&plus, 0.0).unwrap();
        assert!((s.amplitudes() - plus.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn matches_matrix_exponential_oracle() {
        let h = HamiltonianSpec::new(
            3,
            [
                (0.83, p("XXI")),
                (-0.41, p("IYZ")),
                (1.27, p("ZIX")),
                (0.35, p("ZZZ")),
                (-0.66, p("IXI")),
                (0.12, p("YIY")),
            ],
        )
        .unwrap();
        let amps = DVector::from_fn(8, |i, _| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()));
        let psi0 = StateVector::normalized(3, amps).unwrap();
        let t = 0.7;
        let got = evolve_pure(&h, &psi0, t).unwrap();
        let u = expm(&(h.terms().to_dense().unwrap() * Complex64::new(0.0, -t)));
        let want = u * psi0.amplitudes();
        assert!((got.amplitudes() - want).norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_time() {
        let h = HamiltonianSpec::new(1, [(1.0, p("Z"))]).unwrap();
        let s = StateVector::basis_state(1, 0).unwrap();
        assert!(matches!(evolve_pure(&h, &s, f64::NAN), Err(Error::InvalidParameter(_))));
    }
}
