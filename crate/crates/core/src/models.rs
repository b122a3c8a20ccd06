//! Benchmark systems: the staggered Z₂ lattice gauge chain, the disordered
//! XXZ chain, random product states and local dephasing.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dynamics::{HamiltonianSpec, LindbladSpec, StateVector};
use crate::error::{ensure, Error, Result};
use crate::operator::PauliSum;
use crate::pauli::{Boundary, Pauli, PauliString};
use crate::prelude::*;
use crate::rng::{self, Domain};

/// Parameters of the Z₂ gauge chain on `n` qubits (matter on even sites,
/// gauge links on odd sites).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2Params {
    pub n: usize,
    pub mass: f64,
    pub field: f64,
    pub spacing: f64,
    pub periodic: bool,
}

impl Z2Params {
    /// `m = 1`, `e = 3/2`, `a = 1/3`, periodic.
    pub fn reference(n: usize) -> Self {
        Z2Params {
            n,
            mass: 1.0,
            field: 1.5,
            spacing: 1.0 / 3.0,
            periodic: true,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure(self.n >= 4 && self.n.is_multiple_of(2), || format!("Z2 chain needs even N >= 4, got {}", self.n))?;
        ensure(self.spacing > 0.0 && self.spacing.is_finite(), || {
            format!("lattice spacing {} must be positive", self.spacing)
        })?;
        ensure(self.mass.is_finite() && self.field.is_finite(), || "non-finite coupling".into())
    }

    pub fn boundary(&self) -> Boundary {
        if self.periodic {
            Boundary::Periodic
        } else {
            Boundary::Open
        }
    }

    fn hopping_windows(&self) -> usize {
        if self.periodic {
            self.n / 2
        } else {
            self.n / 2 - 1
        }
    }
}

fn string(n: usize, entries: &[(usize, Pauli)]) -> PauliString {
    PauliString::from_sparse(n, entries).expect("sites in range")
}

/// `(1/2a) Σ (σ⁺ X σ⁻ + h.c.) + m Σ (-1)^i Z_{2i}/2 + e Σ Z_{2i+1}`, with the
/// constant from `(I + Z)/2` dropped.
///
/// With `σ± = (X ± iY)/2` each hopping window expands to `(XXX + YXY)/2`.
/// Open chains omit the window that would wrap.
pub fn build_z2_gauge(params: Z2Params) -> Result<HamiltonianSpec> {
    params.validate()?;
    let n = params.n;
    let hop = 1.0 / (4.0 * params.spacing);
    let mut terms = Vec::new();
    for i in 0..params.hopping_windows() {
        let (a, b, c) = (2 * i, 2 * i + 1, (2 * i + 2) % n);
        terms.push((hop, string(n, &[(a, Pauli::X), (b, Pauli::X), (c, Pauli::X)])));
        terms.push((hop, string(n, &[(a, Pauli::Y), (b, Pauli::X), (c, Pauli::Y)])));
    }
    for i in 0..n / 2 {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((0.5 * params.mass * s, string(n, &[(2 * i, Pauli::Z)])));
        terms.push((params.field, string(n, &[(2 * i + 1, Pauli::Z)])));
    }
    HamiltonianSpec::new(n, terms)
}

/// Named observables known to commute with a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownConservedSet {
    pub entries: Vec<(String, PauliSum)>,
}

impl KnownConservedSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&PauliSum> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }
}

/// Magnetization `½ Σ Z_{2i}`.
pub fn z2_magnetization(n: usize) -> Result<PauliSum> {
    PauliSum::new(n, (0..n / 2).map(|i| (0.5, string(n, &[(2 * i, Pauli::Z)]))))
}

/// Gauss law at matter site `2j`: `s · Z_{2j-1} Z_{2j} Z_{2j+1}`. On open
/// chains the missing link at the left edge is dropped.
pub fn z2_gauss_law(params: &Z2Params, j: usize, sign: f64) -> Result<PauliSum> {
    let n = params.n;
    let site = 2 * j;
    let mut entries = vec![(site, Pauli::Z), (site + 1, Pauli::Z)];
    if site > 0 {
        entries.push((site - 1, Pauli::Z));
    } else if params.periodic {
        entries.push((n - 1, Pauli::Z));
    }
    PauliSum::new(n, [(sign, string(n, &entries))])
}

/// Magnetization, the Hamiltonian and the `N/2` Gauss laws, each checked to
/// commute with `H` exactly.
///
/// Gauss laws use the staggered sign `(-1)^j`; a law that fails the check is
/// retried with the opposite sign before giving up.
pub fn z2_known_conserved(params: Z2Params) -> Result<KnownConservedSet> {
    let h = build_z2_gauge(params)?;
    let hs = h.terms();
    let n = params.n;
    let mut entries = Vec::with_capacity(n / 2 + 2);
    let m = z2_magnetization(n)?;
    if !hs.commutes_with(&m)? {
        return Err(Error::ModelConsistency("magnetization does not commute with H".into()));
    }
    entries.push(("magnetization".to_string(), m));
    entries.push(("hamiltonian".to_string(), hs.clone()));
    for j in 0..n / 2 {
        let staggered = if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut found = None;
        for sign in [staggered, -staggered] {
            let g = z2_gauss_law(&params, j, sign)?;
            if hs.commutes_with(&g)? {
                found = Some(g);
                break;
            }
        }
        let g = found.ok_or_else(|| {
            Error::ModelConsistency(format!("Gauss law at site {} fails under both signs", 2 * j))
        })?;
        entries.push((format!("gauss_{}", 2 * j), g));
    }
    Ok(KnownConservedSet { entries })
}

/// On-site fields `h_i ∈ [-w, w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub h: Vec<f64>,
    pub w: f64,
    pub seed: u64,
}

/// I.i.d. uniform fields on `[-w, w]`, deterministic per seed.
pub fn sample_disorder(w: f64, n: usize, seed: u64) -> Result<DisorderRealization> {
    ensure(w >= 0.0 && w.is_finite(), || format!("disorder strength {w} must be >= 0"))?;
    let mut r = rng::stream(seed, Domain::Disorder, n as u64, 0);
    let h = (0..n)
        .map(|_| {
            let u = rng::unit_f64(&mut r);
            if w == 0.0 {
                0.0
            } else {
                w * (2.0 * u - 1.0)
            }
        })
        .collect();
    Ok(DisorderRealization { h, w, seed })
}

/// `Jx Σ (XX + YY) + Jz Σ ZZ + Σ h_i Z_i` on nearest-neighbour bonds.
pub fn build_xxz(n: usize, jx: f64, jz: f64, disorder: &DisorderRealization, boundary: Boundary) -> Result<HamiltonianSpec> {
    ensure(n >= 2, || format!("XXZ chain needs N >= 2, got {n}"))?;
    ensure(disorder.h.len() == n, || format!("{} fields for {n} sites", disorder.h.len()))?;
    let bonds = match boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    };
    let mut terms = Vec::with_capacity(3 * bonds + n);
    for i in 0..bonds {
        let j = (i + 1) % n;
        for (c, l) in [(jx, Pauli::X), (jx, Pauli::Y), (jz, Pauli::Z)] {
            terms.push((c, string(n, &[(i, l), (j, l)])));
        }
    }
    for (i, &h) in disorder.h.iter().enumerate() {
        terms.push((h, string(n, &[(i, Pauli::Z)])));
    }
    HamiltonianSpec::new(n, terms)
}

/// `Σ Z_i`.
pub fn total_magnetization(n: usize) -> Result<PauliSum> {
    PauliSum::new(n, (0..n).map(|i| (1.0, string(n, &[(i, Pauli::Z)]))))
}

/// Haar-random single-qubit states on each site, drawn from stream `index`.
pub fn random_product_state_at(n: usize, seed: u64, index: u64) -> Result<StateVector> {
    ensure((1..=crate::DENSE_CAP).contains(&n), || format!("{n} qubits outside 1..={}", crate::DENSE_CAP))?;
    let mut r = rng::stream(seed, Domain::ProductState, n as u64, index);
    let sites: Vec<[Complex64; 2]> = (0..n)
        .map(|_| {
            let cos_theta = 2.0 * rng::unit_f64(&mut r) - 1.0;
            let phi = core::f64::consts::TAU * rng::unit_f64(&mut r);
            let c = ((1.0 + cos_theta) / 2.0).max(0.0).sqrt();
            let s = ((1.0 - cos_theta) / 2.0).max(0.0).sqrt();
            [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]
        })
        .collect();
    let dim = 1usize << n;
    let amps = DVector::from_fn(dim, |b, _| {
        sites
            .iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (q, s)| acc * s[(b >> (n - 1 - q)) & 1])
    });
    StateVector::normalized(n, amps)
}

/// [`random_product_state_at`] with index 0.
pub fn random_product_state(n: usize, seed: u64) -> Result<StateVector> {
    random_product_state_at(n, seed, 0)
}

/// Jumps `√γ Z_i` on every site.
pub fn add_dephasing(h: &HamiltonianSpec, gamma: f64) -> Result<LindbladSpec> {
    ensure(gamma >= 0.0 && gamma.is_finite(), || format!("dephasing rate {gamma} must be >= 0"))?;
    let n = h.num_sites();
    let jumps = if gamma == 0.0 {
        Vec::new()
    } else {
        (0..n).map(|i| (gamma.sqrt(), string(n, &[(i, Pauli::Z)]))).collect()
    };
    LindbladSpec::new(h.clone(), jumps)
}
