use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::pauli::PauliString;
use crate::prelude::*;

const NORM_TOL: f64 = 1e-10;
const DM_TOL: f64 = 1e-8;

/// Normalized pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Checks length `2^n` and unit norm within `1e-10`.
    pub fn new(n: usize, amps: DVector<Complex64>) -> Result<Self> {
        ensure(n < usize::BITS as usize && amps.len() == 1 << n, || {
            format!("{} amplitudes for {n} qubits", amps.len())
        })?;
        let norm = amps.norm();
        ensure((norm - 1.0).abs() <= NORM_TOL, || format!("state norm {norm} is not 1"))?;
        Ok(StateVector { n, amps })
    }

    /// Normalizes `amps` first.
    pub fn normalized(n: usize, amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        ensure(norm > 0.0 && norm.is_finite(), || "cannot normalize a zero vector".into())?;
        Self::new(n, amps.unscale(norm))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        ensure(index < 1 << n, || format!("index {index} out of range"))?;
        let mut amps = DVector::zeros(1 << n);
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(n, amps)
    }

    pub(crate) fn from_raw(n: usize, amps: DVector<Complex64>) -> Self {
        StateVector { n, amps }
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            n: self.n,
            rho: &self.amps * self.amps.adjoint(),
        }
    }

    /// `⟨ψ|P|ψ⟩` by bit manipulation.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        ensure(p.num_sites() == self.n, || {
            format!("{p} acts on {} qubits, state has {}", p.num_sites(), self.n)
        })?;
        Ok(pure_expectation(self.amps.as_slice(), p))
    }
}

pub(crate) fn pure_expectation(amps: &[Complex64], p: &PauliString) -> f64 {
    let act = p.action();
    let base = act.base_phase().to_complex();
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, a) in amps.iter().enumerate() {
        acc += amps[b ^ act.flip].conj() * *a * act.sign(b);
    }
    (acc * base).re
}

/// Density matrix on `n` qubits (Hermitian, unit trace, PSD within tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Checks Hermiticity and trace within `1e-8`, and minimum eigenvalue
    /// `≥ -1e-6`.
    pub fn new(n: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        let dm = Self::unchecked(n, rho)?;
        dm.validate()?;
        Ok(dm)
    }

    pub(crate) fn unchecked(n: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        ensure(n < usize::BITS as usize && rho.nrows() == 1 << n && rho.is_square(), || {
            format!("{}x{} matrix for {n} qubits", rho.nrows(), rho.ncols())
        })?;
        Ok(DensityMatrix { n, rho })
    }

    /// Maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        Self::unchecked(n, DMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn validate(&self) -> Result<()> {
        let herm = (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > DM_TOL {
            return Err(Error::NumericFailure(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > DM_TOL {
            return Err(Error::NumericFailure(format!("density matrix trace {tr}")));
        }
        let min_eig = self.rho.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-6 {
            return Err(Error::NumericFailure(format!("density matrix eigenvalue {min_eig}")));
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ab|² for Hermitian ρ
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr(Pρ)` without building `P`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        ensure(p.num_sites() == self.n, || {
            format!("{p} acts on {} qubits, state has {}", p.num_sites(), self.n)
        })?;
        let act = p.action();
        let dim = 1usize << self.n;
        let base = act.base_phase().to_complex();
        let mut acc = Complex64::new(0.0, 0.0);
        // Tr(Pρ) = Σ_s phase(s) ρ[s, s ⊕ flip]
        for s in 0..dim {
            acc += self.rho[(s, s ^ act.flip)] * act.sign(s);
        }
        Ok((acc * base).re)
    }
}

/// Pure or mixed state.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn num_sites(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.num_sites(),
            QuantumState::Mixed(d) => d.num_sites(),
        }
    }

    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        expectation(self, p)
    }
}

impl From<StateVector> for QuantumState {
    fn from(s: StateVector) -> Self {
        QuantumState::Pure(s)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(d: DensityMatrix) -> Self {
        QuantumState::Mixed(d)
    }
}

/// `⟨P⟩` on either kind of state.
pub fn expectation(state: &QuantumState, p: &PauliString) -> Result<f64> {
    match state {
        QuantumState::Pure(s) => s.expectation(p),
        QuantumState::Mixed(d) => d.expectation(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn ghz3() -> StateVector {
        let mut a = DVector::zeros(8);
        a[0] = Complex64::new(1.0, 0.0);
        a[7] = Complex64::new(1.0, 0.0);
        StateVector::normalized(3, a).unwrap()
    }

    #[test]
    fn basis_state_values() {
        let zero = StateVector::basis_state(1, 0).unwrap();
        assert_eq!(zero.expectation(&p("Z")).unwrap(), 1.0);
        assert_eq!(zero.expectation(&p("X")).unwrap(), 0.0);
        let one = StateVector::basis_state(1, 1).unwrap();
        assert_eq!(one.expectation(&p("Z")).unwrap(), -1.0);
    }

    #[test]
    fn ghz_stabilizers() {
        let g = ghz3();
        assert!(g.expectation(&p("ZII")).unwrap().abs() < 1e-15);
        assert!((g.expectation(&p("XXX")).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.expectation(&p("ZZI")).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.expectation(&p("YYX")).unwrap() + 1.0).abs() < 1e-15);
        let d = g.to_density();
        for s in ["ZII", "XXX", "YYX", "XYY", "IZZ"] {
            let a = g.expectation(&p(s)).unwrap();
            let b = d.expectation(&p(s)).unwrap();
            assert!((a - b).abs() < 1e-14, "{s}");
        }
    }

    #[test]
    fn maximally_mixed_is_traceless() {
        let m = DensityMatrix::maximally_mixed(3).unwrap();
        m.validate().unwrap();
        for s in ["XII", "ZZZ", "IYI", "XYZ"] {
            assert_eq!(m.expectation(&p(s)).unwrap(), 0.0);
        }
    }

    #[test]
    fn expectation_matches_dense_trace() {
        // a fixed non-trivial 2-qubit state
        let amps = DVector::from_vec(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.4, -0.3),
            Complex64::new(0.1, 0.2),
        ]);
        let s = StateVector::normalized(2, amps).unwrap();
        for a in crate::pauli::Pauli::ALL {
            for b in crate::pauli::Pauli::ALL {
                let ps = PauliString::from_labels(&[a, b]).unwrap();
                let dense = ps.to_dense().unwrap();
                let v = (s.amplitudes().adjoint() * &dense * s.amplitudes())[(0, 0)].re;
                assert!((s.expectation(&ps).unwrap() - v).abs() < 1e-14);
                let dm = s.to_density();
                assert!((dm.expectation(&ps).unwrap() - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let s = StateVector::basis_state(2, 0).unwrap();
        assert!(s.expectation(&p("ZZZ")).is_err());
        assert!(StateVector::new(2, DVector::zeros(3)).is_err());
        let mut a = DVector::zeros(2);
        a[0] = Complex64::new(0.9, 0.0);
        assert!(StateVector::new(1, a).is_err());
    }
}
