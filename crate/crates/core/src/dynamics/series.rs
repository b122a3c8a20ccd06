use super::{Dynamics, LindbladEvolver, LindbladOptions, LindbladSpec, QuantumState, StateVector, UnitaryPropagator};
use crate::data::DataMatrix;
use crate::error::{ensure, Result};
use crate::pauli::PauliBasisSet;
use crate::prelude::*;

/// A generator made ready for repeated evolution: eigendecomposed for
/// closed systems, pre-grouped for open ones.
#[derive(Debug, Clone)]
pub enum PreparedDynamics {
    Closed(UnitaryPropagator),
    Open(LindbladEvolver),
}

impl PreparedDynamics {
    pub fn new(model: &Dynamics) -> Result<Self> {
        match model {
            Dynamics::Hamiltonian(h) => Ok(PreparedDynamics::Closed(h.propagator()?)),
            Dynamics::Lindblad(l) => Self::open(l, LindbladOptions::default()),
        }
    }

    pub fn open(spec: &LindbladSpec, options: LindbladOptions) -> Result<Self> {
        Ok(PreparedDynamics::Open(LindbladEvolver::new(spec, options)?))
    }

    pub fn num_sites(&self) -> usize {
        match self {
            PreparedDynamics::Closed(u) => u.num_sites(),
            PreparedDynamics::Open(l) => l.num_sites(),
        }
    }

    /// Evolved states at every time of an ascending grid.
    pub fn states(&self, initial: &StateVector, times: &[f64]) -> Result<Vec<QuantumState>> {
        ensure(times.windows(2).all(|w| w[0] <= w[1]), || "times must be ascending".into())?;
        Ok(match self {
            PreparedDynamics::Closed(u) => u.trajectory(initial, times)?.into_iter().map(QuantumState::Pure).collect(),
            PreparedDynamics::Open(l) => l
                .evolve_grid(&initial.to_density(), times)?
                .into_iter()
                .map(QuantumState::Mixed)
                .collect(),
        })
    }

    /// One data-matrix block: a column of basis expectations per time.
    pub fn expectation_block(
        &self,
        initial: &StateVector,
        times: &[f64],
        basis: &PauliBasisSet,
    ) -> Result<Vec<Vec<f64>>> {
        ensure(basis.num_sites() == self.num_sites(), || "basis and model sizes differ".into())?;
        self.states(initial, times)?
            .iter()
            .map(|s| expectation_column(s, basis))
            .collect()
    }
}

/// `⟨P_i⟩` for every element of `basis`.
pub fn expectation_column(state: &QuantumState, basis: &PauliBasisSet) -> Result<Vec<f64>> {
    basis.elements().iter().map(|p| state.expectation(p)).collect()
}

/// The data matrix `X[i, k·N_T + j] = ⟨P_i(t_j)⟩` on initial state `k`.
pub fn expectation_series(
    model: &Dynamics,
    initials: &[StateVector],
    times: &[f64],
    basis: &PauliBasisSet,
) -> Result<DataMatrix> {
    ensure(!initials.is_empty(), || "no initial states".into())?;
    ensure(!times.is_empty(), || "empty time grid".into())?;
    ensure(!basis.is_empty(), || "empty basis".into())?;
    let prepared = PreparedDynamics::new(model)?;
    let blocks = initials
        .iter()
        .map(|psi| prepared.expectation_block(psi, times, basis))
        .collect::<Result<Vec<_>>>()?;
    DataMatrix::from_blocks(basis.clone(), times.to_vec(), &blocks)
}
