//! Exact dense dynamics for small spin systems.
//!
//! Closed systems evolve pure states through a one-time eigendecomposition
//! ([`UnitaryPropagator`]); open systems integrate the Lindblad equation on
//! density matrices with an adaptive Dormand–Prince scheme
//! ([`LindbladEvolver`]).

mod lindblad;
mod series;
mod state;
mod unitary;

pub use lindblad::{evolve_density, LindbladEvolver, LindbladOptions};
pub use series::{expectation_column, expectation_series, PreparedDynamics};
pub use state::{expectation, DensityMatrix, QuantumState, StateVector};
pub use unitary::{evolve_pure, UnitaryPropagator};

use crate::error::{ensure, Result};
use crate::operator::PauliSum;
use crate::pauli::PauliString;
use crate::prelude::*;

/// `H = Σ λ_P P` on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    terms: PauliSum,
}

impl HamiltonianSpec {
    pub fn new(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        Ok(HamiltonianSpec {
            terms: PauliSum::new(n, terms)?,
        })
    }

    pub fn from_sum(terms: PauliSum) -> Self {
        HamiltonianSpec { terms }
    }

    pub fn num_sites(&self) -> usize {
        self.terms.num_sites()
    }

    pub fn terms(&self) -> &PauliSum {
        &self.terms
    }

    /// Eigendecomposition for repeated closed-system evolution.
    pub fn propagator(&self) -> Result<UnitaryPropagator> {
        UnitaryPropagator::new(self)
    }
}

/// Hamiltonian plus Pauli jump operators `L = a·P`, `a ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    hamiltonian: HamiltonianSpec,
    jumps: Vec<(f64, PauliString)>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: HamiltonianSpec, jumps: Vec<(f64, PauliString)>) -> Result<Self> {
        let n = hamiltonian.num_sites();
        for (a, p) in &jumps {
            ensure(a.is_finite() && *a >= 0.0, || format!("jump amplitude {a} must be finite and >= 0"))?;
            ensure(p.num_sites() == n, || format!("jump {p} is not on {n} sites"))?;
        }
        Ok(LindbladSpec { hamiltonian, jumps })
    }

    pub fn hamiltonian(&self) -> &HamiltonianSpec {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[(f64, PauliString)] {
        &self.jumps
    }

    pub fn num_sites(&self) -> usize {
        self.hamiltonian.num_sites()
    }
}

/// Either kind of generator.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    Hamiltonian(HamiltonianSpec),
    Lindblad(LindbladSpec),
}

impl Dynamics {
    pub fn num_sites(&self) -> usize {
        match self {
            Dynamics::Hamiltonian(h) => h.num_sites(),
            Dynamics::Lindblad(l) => l.num_sites(),
        }
    }

    pub fn hamiltonian(&self) -> &HamiltonianSpec {
        match self {
            Dynamics::Hamiltonian(h) => h,
            Dynamics::Lindblad(l) => l.hamiltonian(),
        }
    }
}

impl From<HamiltonianSpec> for Dynamics {
    fn from(h: HamiltonianSpec) -> Self {
        Dynamics::Hamiltonian(h)
    }
}

impl From<LindbladSpec> for Dynamics {
    fn from(l: LindbladSpec) -> Self {
        Dynamics::Lindblad(l)
    }
}
