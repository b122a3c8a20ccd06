//! Randomized single-qubit Pauli measurements (classical shadows).
//!
//! A snapshot records a basis in {X, Y, Z} and a ±1 outcome per qubit. The
//! single-snapshot estimator of a Pauli `P` of weight `w` is `3^w · Π s_q`
//! over `supp(P)` when every measured basis on the support matches `P`, and
//! zero otherwise; its mean is `⟨P⟩` and its variance `3^w − ⟨P⟩²`.
//!
//! Each snapshot consumes exactly `2N` 64-bit draws (`N` basis choices, then
//! `N` outcome uniforms), so snapshot `s` of cell `(k, j)` can be generated
//! on its own from the keyed stream.

use alloc::collections::BTreeMap;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::data::DataMatrix;
use crate::dynamics::QuantumState;
use crate::error::{ensure, Error, Result};
use crate::pauli::{Pauli, PauliBasisSet, PauliString};
use crate::prelude::*;
use crate::rng::{self, Domain};
use crate::DENSE_CAP;

/// Measured bases and outcomes of one snapshot, as site bit masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShadowSnapshot {
    n: u8,
    x: u64,
    z: u64,
    minus: u64,
}

impl ShadowSnapshot {
    /// Bases and outcomes (`true` = −1) per site.
    pub fn new(bases: &[Pauli], minus: &[bool]) -> Result<Self> {
        ensure(bases.len() == minus.len(), || "bases and outcomes differ in length".into())?;
        ensure(!bases.is_empty() && bases.len() <= 64, || format!("{} sites", bases.len()))?;
        let mut s = ShadowSnapshot {
            n: bases.len() as u8,
            x: 0,
            z: 0,
            minus: 0,
        };
        for (q, (&b, &m)) in bases.iter().zip(minus).enumerate() {
            let (bx, bz) = match b {
                Pauli::X => (1, 0),
                Pauli::Y => (1, 1),
                Pauli::Z => (0, 1),
                Pauli::I => return Err(Error::InvalidParameter("identity is not a measurement basis".into())),
            };
            s.x |= bx << q;
            s.z |= bz << q;
            s.minus |= (m as u64) << q;
        }
        Ok(s)
    }

    pub fn num_sites(&self) -> usize {
        self.n as usize
    }

    pub fn basis(&self, q: usize) -> Pauli {
        match (self.x >> q & 1, self.z >> q & 1) {
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    /// `+1` or `−1`.
    pub fn outcome(&self, q: usize) -> i8 {
        if self.minus >> q & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Single-snapshot estimate of `⟨P⟩`.
    #[inline]
    pub fn estimate(&self, p: &PauliString) -> f64 {
        let supp = p.support_mask();
        if ((p.x_mask() ^ self.x) | (p.z_mask() ^ self.z)) & supp != 0 {
            return 0.0;
        }
        let mag = pow3(supp.count_ones());
        if (self.minus & supp).count_ones() & 1 == 1 {
            -mag
        } else {
            mag
        }
    }
}

#[inline]
fn pow3(w: u32) -> f64 {
    let mut v = 1.0;
    for _ in 0..w {
        v *= 3.0;
    }
    v
}

/// Snapshots of one (initial state, time) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowBatch {
    pub snapshots: Vec<ShadowSnapshot>,
    pub state_index: usize,
    pub time_index: usize,
    pub seed: u64,
}

impl ShadowBatch {
    pub fn num_sites(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.num_sites())
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

fn eigvec(b: Pauli, minus: bool) -> [Complex64; 2] {
    let h = FRAC_1_SQRT_2;
    let s = if minus { -1.0 } else { 1.0 };
    match b {
        Pauli::X => [Complex64::new(h, 0.0), Complex64::new(s * h, 0.0)],
        Pauli::Y => [Complex64::new(h, 0.0), Complex64::new(0.0, s * h)],
        _ if minus => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        _ => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    }
}

const BASES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// Draws one snapshot: uniform bases, then Born-rule outcomes sampled one
/// qubit at a time (site 0 first) by conditioning on earlier outcomes.
pub fn sample_snapshot<R: RngCore + ?Sized>(state: &QuantumState, rng: &mut R) -> Result<ShadowSnapshot> {
    let n = state.num_sites();
    if n > DENSE_CAP {
        return Err(Error::ResourceLimit(format!("{n} qubits exceeds dense cap {DENSE_CAP}")));
    }
    let bases: Vec<Pauli> = (0..n).map(|_| BASES[rng::below(rng, 3) as usize]).collect();
    let mut minus = vec![false; n];
    match state {
        QuantumState::Pure(psi) => {
            let mut v: Vec<Complex64> = psi.amplitudes().as_slice().to_vec();
            for q in 0..n {
                let half = v.len() / 2;
                let project = |e: [Complex64; 2]| -> Vec<Complex64> {
                    (0..half).map(|i| e[0].conj() * v[i] + e[1].conj() * v[half + i]).collect()
                };
                let plus = project(eigvec(bases[q], false));
                let minus_v = project(eigvec(bases[q], true));
                let pp: f64 = plus.iter().map(|z| z.norm_sqr()).sum();
                let pm: f64 = minus_v.iter().map(|z| z.norm_sqr()).sum();
                let u = rng::unit_f64(rng);
                if u * (pp + pm) < pp {
                    v = plus;
                } else {
                    minus[q] = true;
                    v = minus_v;
                }
            }
        }
        QuantumState::Mixed(rho) => {
            let mut r: Vec<Complex64> = rho.matrix().as_slice().to_vec();
            let mut dim = 1usize << n;
            for q in 0..n {
                let half = dim / 2;
                // block (a, b) entry (i, j) sits at (a·half + i) + (b·half + j)·dim
                let at = |r: &[Complex64], a: usize, b: usize, i: usize, j: usize| r[(a * half + i) + (b * half + j) * dim];
                let condition = |e: [Complex64; 2]| -> (Vec<Complex64>, f64) {
                    let mut out = vec![Complex64::new(0.0, 0.0); half * half];
                    for j in 0..half {
                        for i in 0..half {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for a in 0..2 {
                                for b in 0..2 {
                                    acc += e[a].conj() * e[b] * at(&r, a, b, i, j);
                                }
                            }
                            out[i + j * half] = acc;
                        }
                    }
                    let p = (0..half).map(|i| out[i + i * half].re).sum::<f64>().max(0.0);
                    (out, p)
                };
                let (plus, pp) = condition(eigvec(bases[q], false));
                let (minus_r, pm) = condition(eigvec(bases[q], true));
                let u = rng::unit_f64(rng);
                if u * (pp + pm) < pp {
                    r = plus;
                } else {
                    minus[q] = true;
                    r = minus_r;
                }
                dim = half;
            }
        }
    }
    ShadowSnapshot::new(&bases, &minus)
}

/// 32-bit words one snapshot consumes.
pub fn words_per_snapshot(n: usize) -> u64 {
    4 * n as u64
}

/// Snapshots `range` of cell `(state_index, time_index)`; concatenating
/// consecutive ranges reproduces the full batch.
pub fn sample_range(
    state: &QuantumState,
    seed: u64,
    state_index: usize,
    time_index: usize,
    range: core::ops::Range<u64>,
) -> Result<Vec<ShadowSnapshot>> {
    let n = state.num_sites();
    let mut r = rng::stream_at(
        seed,
        Domain::Snapshot,
        state_index as u64,
        time_index as u64,
        range.start,
        words_per_snapshot(n),
    );
    range.map(|_| sample_snapshot(state, &mut r)).collect()
}

/// `m` snapshots of one cell.
pub fn sample_batch(state: &QuantumState, m: usize, seed: u64, state_index: usize, time_index: usize) -> Result<ShadowBatch> {
    ensure(m >= 1, || "a batch needs at least one snapshot".into())?;
    Ok(ShadowBatch {
        snapshots: sample_range(state, seed, state_index, time_index, 0..m as u64)?,
        state_index,
        time_index,
        seed,
    })
}

/// Batch mean of the single-snapshot estimator.
pub fn estimate_pauli(batch: &ShadowBatch, p: &PauliString) -> Result<f64> {
    ensure(!batch.is_empty(), || "empty batch".into())?;
    ensure(batch.num_sites() == p.num_sites(), || {
        format!("{p} does not match a {}-qubit batch", batch.num_sites())
    })?;
    Ok(batch.snapshots.iter().map(|s| s.estimate(p)).sum::<f64>() / batch.len() as f64)
}

/// Estimates every element of a basis in one pass over the snapshots.
///
/// Elements are grouped by support; for a snapshot only the one string per
/// support that matches its bases can contribute.
#[derive(Debug, Clone)]
pub struct BasisEstimator {
    n: usize,
    rows: usize,
    groups: Vec<SupportGroup>,
}

#[derive(Debug, Clone)]
struct SupportGroup {
    mask: u64,
    sites: Vec<usize>,
    weight: f64,
    // base-3 label code (X=0, Y=1, Z=2, site order) -> row
    rows: Vec<Option<usize>>,
}

fn label_code(p: &PauliString, sites: &[usize]) -> usize {
    sites.iter().rev().fold(0, |acc, &q| {
        3 * acc
            + match p.label(q) {
                Pauli::X => 0,
                Pauli::Y => 1,
                _ => 2,
            }
    })
}

impl BasisEstimator {
    pub fn new(basis: &PauliBasisSet) -> Self {
        let mut by_mask: BTreeMap<u64, SupportGroup> = BTreeMap::new();
        for (row, p) in basis.elements().iter().enumerate() {
            let mask = p.support_mask();
            let g = by_mask.entry(mask).or_insert_with(|| {
                let sites = p.support();
                SupportGroup {
                    mask,
                    weight: pow3(sites.len() as u32),
                    rows: vec![None; 3usize.pow(sites.len() as u32)],
                    sites,
                }
            });
            let code = label_code(p, &g.sites);
            g.rows[code] = Some(row);
        }
        BasisEstimator {
            n: basis.num_sites(),
            rows: basis.len(),
            groups: by_mask.into_values().collect(),
        }
    }

    /// Adds one snapshot's estimates into `sums`.
    #[inline]
    pub fn accumulate(&self, s: &ShadowSnapshot, sums: &mut [f64]) {
        for g in &self.groups {
            let code = g.sites.iter().rev().fold(0, |acc, &q| {
                3 * acc
                    + match (s.x >> q & 1, s.z >> q & 1) {
                        (1, 0) => 0,
                        (1, 1) => 1,
                        _ => 2,
                    }
            });
            if let Some(row) = g.rows[code] {
                let odd = (s.minus & g.mask).count_ones() & 1 == 1;
                sums[row] += if odd { -g.weight } else { g.weight };
            }
        }
    }

    /// Batch means for every basis element.
    pub fn estimate(&self, snapshots: &[ShadowSnapshot]) -> Result<Vec<f64>> {
        ensure(!snapshots.is_empty(), || "empty batch".into())?;
        ensure(snapshots.iter().all(|s| s.num_sites() == self.n), || "snapshot size mismatch".into())?;
        let mut sums = vec![0.0; self.rows];
        for s in snapshots {
            self.accumulate(s, &mut sums);
        }
        let m = snapshots.len() as f64;
        Ok(sums.into_iter().map(|v| v / m).collect())
    }
}

/// Exact single-snapshot variance `3^w − ⟨P⟩²`.
pub fn snapshot_variance(p: &PauliString, state: &QuantumState) -> Result<f64> {
    ensure(!p.is_identity(), || "variance of the identity string is not defined here".into())?;
    let e = state.expectation(p)?;
    Ok(pow3(p.weight() as u32) - e * e)
}

/// Exact single-snapshot covariance of the basis estimators:
/// `3^ω ⟨P P'⟩ − ⟨P⟩⟨P'⟩` for completely commuting pairs (ω the overlap
/// weight), `−⟨P⟩⟨P'⟩` otherwise.
pub fn shadow_covariance(basis: &PauliBasisSet, state: &QuantumState) -> Result<DMatrix<f64>> {
    let n = state.num_sites();
    if n > DENSE_CAP {
        return Err(Error::ResourceLimit(format!("{n} qubits exceeds dense cap {DENSE_CAP}")));
    }
    ensure(basis.num_sites() == n, || "basis and state sizes differ".into())?;
    let el = basis.elements();
    let means = el.iter().map(|p| state.expectation(p)).collect::<Result<Vec<_>>>()?;
    let mut cache: BTreeMap<PauliString, f64> = BTreeMap::new();
    let np = el.len();
    let mut sigma = DMatrix::zeros(np, np);
    for i in 0..np {
        for j in i..np {
            let mut v = -means[i] * means[j];
            if el[i].completely_commutes_unchecked(&el[j]) {
                let overlap = (el[i].support_mask() & el[j].support_mask()).count_ones();
                // sitewise-compatible strings multiply without a phase
                let (_, prod) = el[i].multiply_unchecked(&el[j]);
                let e = match cache.get(&prod) {
                    Some(&e) => e,
                    None => {
                        let e = if prod.is_identity() { 1.0 } else { state.expectation(&prod)? };
                        cache.insert(prod, e);
                        e
                    }
                };
                v += pow3(overlap) * e;
            }
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    Ok(sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Fresh snapshot batches per cell.
    ExactShots,
    /// Independent Gaussian noise of variance `(3^w − X²)/M` per entry.
    GaussianIndependent,
    /// Gaussian columns with the exact snapshot covariance `Σ/M`.
    GaussianCovariant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub mode: NoiseMode,
    /// Measurements per (state, time) cell.
    pub m: u64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(mode: NoiseMode, m: u64, seed: u64) -> Result<Self> {
        ensure(m >= 1, || "M must be at least 1".into())?;
        Ok(NoiseModel { mode, m, seed })
    }

    pub fn needs_states(&self) -> bool {
        !matches!(self.mode, NoiseMode::GaussianIndependent)
    }
}

/// Evolved states per initial-state block, produced on demand.
pub trait StateSource {
    /// States at every time for initial state `k`.
    fn block(&self, k: usize) -> Result<Vec<QuantumState>>;
}

impl StateSource for Vec<Vec<QuantumState>> {
    fn block(&self, k: usize) -> Result<Vec<QuantumState>> {
        self.get(k)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("no states for initial {k}")))
    }
}

/// The noisy version of one column of the data matrix.
pub fn noisy_column(
    noise: &NoiseModel,
    basis: &PauliBasisSet,
    exact: &[f64],
    state: Option<&QuantumState>,
    initial: usize,
    time: usize,
) -> Result<Vec<f64>> {
    ensure(exact.len() == basis.len(), || "column length differs from basis".into())?;
    let m = noise.m as f64;
    let need = || {
        Error::InvalidParameter(format!("{:?} noise needs the evolved states", noise.mode))
    };
    match noise.mode {
        NoiseMode::GaussianIndependent => {
            let mut r = rng::stream(noise.seed, Domain::GaussianNoise, initial as u64, time as u64);
            Ok(basis
                .elements()
                .iter()
                .zip(exact)
                .map(|(p, &x)| {
                    let var = (pow3(p.weight() as u32) - x * x).max(0.0) / m;
                    let g: f64 = StandardNormal.sample(&mut r);
                    x + var.sqrt() * g
                })
                .collect())
        }
        NoiseMode::GaussianCovariant => {
            let state = state.ok_or_else(need)?;
            let sigma = shadow_covariance(basis, state)?;
            let eig = sigma.symmetric_eigen();
            let mut r = rng::stream(noise.seed, Domain::GaussianNoise, initial as u64, time as u64);
            let g = DVector::from_fn(exact.len(), |i, _| {
                let z: f64 = StandardNormal.sample(&mut r);
                z * (eig.eigenvalues[i].max(0.0) / m).sqrt()
            });
            let delta = &eig.eigenvectors * g;
            Ok(exact.iter().zip(delta.iter()).map(|(x, d)| x + d).collect())
        }
        NoiseMode::ExactShots => {
            let state = state.ok_or_else(need)?;
            let snaps = sample_range(state, noise.seed, initial, time, 0..noise.m)?;
            BasisEstimator::new(basis).estimate(&snaps)
        }
    }
}

/// Applies `noise` to every column of `x`; `states` is required for the
/// covariant and exact-shot modes.
pub fn apply_noise(x: &DataMatrix, noise: &NoiseModel, states: Option<&dyn StateSource>) -> Result<DataMatrix> {
    if noise.needs_states() && states.is_none() {
        return Err(Error::InvalidParameter(format!("{:?} noise needs the evolved states", noise.mode)));
    }
    let nt = x.n_times();
    let mut values = x.values().clone();
    for k in 0..x.n_initials() {
        let block = match states {
            Some(s) if noise.needs_states() => Some(s.block(k)?),
            _ => None,
        };
        if let Some(b) = &block {
            ensure(b.len() == nt, || format!("block {k} has {} states for {nt} times", b.len()))?;
        }
        for j in 0..nt {
            let c = x.column_index(k, j);
            let exact: Vec<f64> = x.values().column(c).iter().copied().collect();
            let col = noisy_column(noise, x.basis(), &exact, block.as_ref().map(|b| &b[j]), k, j)?;
            values.column_mut(c).copy_from_slice(&col);
        }
    }
    x.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DensityMatrix, StateVector};
    use crate::pauli::{enumerate_local_paulis, Boundary};

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut r = rng::stream(seed, Domain::Test, 0, 0);
        let amps = DVector::from_fn(1 << n, |_, _| {
            let a: f64 = StandardNormal.sample(&mut r);
            let b: f64 = StandardNormal.sample(&mut r);
            Complex64::new(a, b)
        });
        StateVector::normalized(n, amps).unwrap()
    }

    fn bell() -> StateVector {
        let mut a = DVector::zeros(4);
        a[0] = Complex64::new(1.0, 0.0);
        a[3] = Complex64::new(1.0, 0.0);
        StateVector::normalized(2, a).unwrap()
    }

    #[test]
    fn estimator_values() {
        let s = ShadowSnapshot::new(&[Pauli::X, Pauli::Z, Pauli::Y], &[false, true, true]).unwrap();
        assert_eq!(s.estimate(&p("XII")), 3.0);
        assert_eq!(s.estimate(&p("IZI")), -3.0);
        assert_eq!(s.estimate(&p("XZY")), 27.0);
        assert_eq!(s.estimate(&p("YII")), 0.0);
        assert_eq!(s.basis(2), Pauli::Y);
        assert_eq!(s.outcome(0), 1);
    }

    #[test]
    fn eigenstate_outcomes_are_deterministic() {
        let zero: QuantumState = StateVector::basis_state(3, 0).unwrap().into();
        let mixed_zero: QuantumState = StateVector::basis_state(3, 0).unwrap().to_density().into();
        let mut r = rng::stream(1, Domain::Test, 0, 0);
        for _ in 0..2000 {
            for st in [&zero, &mixed_zero] {
                let s = sample_snapshot(st, &mut r).unwrap();
                for q in 0..3 {
                    if s.basis(q) == Pauli::Z {
                        assert_eq!(s.outcome(q), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn bell_outcomes_correlate() {
        let st: QuantumState = bell().into();
        let dm: QuantumState = bell().to_density().into();
        let mut r = rng::stream(2, Domain::Test, 0, 0);
        let mut zz = 0;
        for _ in 0..10_000 {
            for s in [&st, &dm] {
                let snap = sample_snapshot(s, &mut r).unwrap();
                if snap.basis(0) == Pauli::Z && snap.basis(1) == Pauli::Z {
                    assert_eq!(snap.outcome(0), snap.outcome(1));
                    zz += 1;
                }
                if snap.basis(0) == Pauli::X && snap.basis(1) == Pauli::X {
                    assert_eq!(snap.outcome(0), snap.outcome(1));
                }
                if snap.basis(0) == Pauli::Y && snap.basis(1) == Pauli::Y {
                    assert_ne!(snap.outcome(0), snap.outcome(1));
                }
            }
        }
        assert!(zz > 1500);
    }

    #[test]
    fn x_basis_on_zero_is_a_fair_coin() {
        let st: QuantumState = StateVector::basis_state(1, 0).unwrap().into();
        let mut r = rng::stream(3, Domain::Test, 0, 0);
        let (mut n, mut plus) = (0usize, 0usize);
        while n < 100_000 {
            let s = sample_snapshot(&st, &mut r).unwrap();
            if s.basis(0) == Pauli::X {
                n += 1;
                plus += (s.outcome(0) == 1) as usize;
            }
        }
        let sd = (0.25 / n as f64).sqrt();
        assert!((plus as f64 / n as f64 - 0.5).abs() < 3.0 * sd);
    }

    #[test]
    fn born_rule_matches_dense_rotation() {
        // marginal of a fixed basis choice against |⟨e_a ⊗ e_b|ψ⟩|²
        let psi = random_state(2, 4);
        let st: QuantumState = psi.clone().into();
        let dm: QuantumState = psi.to_density().into();
        let mut r = rng::stream(5, Domain::Test, 0, 0);
        let mut counts = [[0usize; 4]; 2];
        let mut total = [0usize; 2];
        for _ in 0..60_000 {
            for (i, s) in [&st, &dm].into_iter().enumerate() {
                let snap = sample_snapshot(s, &mut r).unwrap();
                if snap.basis(0) == Pauli::X && snap.basis(1) == Pauli::Y {
                    let o = 2 * (snap.outcome(0) == -1) as usize + (snap.outcome(1) == -1) as usize;
                    counts[i][o] += 1;
                    total[i] += 1;
                }
            }
        }
        for o in 0..4 {
            let e0 = eigvec(Pauli::X, o >= 2);
            let e1 = eigvec(Pauli::Y, o % 2 == 1);
            let mut amp = Complex64::new(0.0, 0.0);
            for b in 0..4 {
                amp += (e0[b >> 1] * e1[b & 1]).conj() * psi.amplitudes()[b];
            }
            let prob = amp.norm_sqr();
            for (c, n) in counts.iter().zip(total) {
                let f = c[o] as f64 / n as f64;
                let sd = (prob * (1.0 - prob) / n as f64).sqrt();
                assert!((f - prob).abs() < 4.0 * sd + 1e-3, "{o} {f} {prob}");
            }
        }
    }

    #[test]
    fn ranges_compose() {
        let st: QuantumState = random_state(3, 6).into();
        let full = sample_range(&st, 9, 2, 5, 0..50).unwrap();
        let mut parts = sample_range(&st, 9, 2, 5, 0..17).unwrap();
        parts.extend(sample_range(&st, 9, 2, 5, 17..50).unwrap());
        assert_eq!(full, parts);
    }

    #[test]
    fn variance_closed_forms() {
        let zero: QuantumState = StateVector::basis_state(1, 0).unwrap().into();
        let mixed: QuantumState = DensityMatrix::maximally_mixed(1).unwrap().into();
        assert_eq!(snapshot_variance(&p("Z"), &zero).unwrap(), 2.0);
        assert_eq!(snapshot_variance(&p("Z"), &mixed).unwrap(), 3.0);
        let b = PauliBasisSet::from_elements(vec![p("Z")], 1, 1, Boundary::Open).unwrap();
        assert_eq!(shadow_covariance(&b, &zero).unwrap()[(0, 0)], 2.0);
    }

    #[test]
    fn ghz_covariance_structure() {
        let mut a = DVector::zeros(8);
        a[0] = Complex64::new(1.0, 0.0);
        a[7] = Complex64::new(1.0, 0.0);
        let ghz: QuantumState = StateVector::normalized(3, a).unwrap().into();
        let b = PauliBasisSet::from_elements(vec![p("ZII"), p("IZI"), p("IIZ")], 3, 1, Boundary::Open).unwrap();
        let s = shadow_covariance(&b, &ghz).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 3.0 } else { 1.0 };
                assert!((s[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_structural_zeros() {
        let psi: QuantumState = random_state(3, 7).into();
        let basis = enumerate_local_paulis(3, 2, Boundary::Open).unwrap();
        let s = shadow_covariance(&basis, &psi).unwrap();
        let el = basis.elements();
        for i in 0..el.len() {
            assert!((s[(i, i)] - snapshot_variance(&el[i], &psi).unwrap()).abs() < 1e-12);
            for j in 0..el.len() {
                if !el[i].completely_commutes(&el[j]).unwrap() {
                    let want = -psi.expectation(&el[i]).unwrap() * psi.expectation(&el[j]).unwrap();
                    assert_eq!(s[(i, j)], want);
                }
            }
        }
        let min = s.symmetric_eigenvalues().min();
        assert!(min > -1e-8);
    }

    #[test]
    fn product_state_disjoint_pairs_uncorrelated() {
        let prod: QuantumState = crate::models::random_product_state(3, 8).unwrap().into();
        let b = PauliBasisSet::from_elements(vec![p("XII"), p("IYI"), p("IIZ"), p("IYZ")], 3, 2, Boundary::Open).unwrap();
        let s = shadow_covariance(&b, &prod).unwrap();
        let at = |a: &str, c: &str| s[(b.index_of(&p(a)).unwrap(), b.index_of(&p(c)).unwrap())];
        for (a, c) in [("XII", "IYI"), ("XII", "IIZ"), ("IYI", "IIZ"), ("XII", "IYZ")] {
            assert!(at(a, c).abs() < 1e-12, "{a} {c}");
        }
        assert!(at("IYI", "IYZ").abs() > 1e-6);
    }

    #[test]
    fn basis_estimator_matches_direct() {
        let st: QuantumState = random_state(4, 10).into();
        let basis = enumerate_local_paulis(4, 3, Boundary::Periodic).unwrap();
        let batch = sample_batch(&st, 3000, 1, 0, 0).unwrap();
        let fast = BasisEstimator::new(&basis).estimate(&batch.snapshots).unwrap();
        for (i, q) in basis.elements().iter().enumerate() {
            assert!((fast[i] - estimate_pauli(&batch, q).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_modes() {
        let basis = enumerate_local_paulis(2, 2, Boundary::Open).unwrap();
        let psi = random_state(2, 11);
        let col: Vec<f64> = basis.elements().iter().map(|q| psi.expectation(q).unwrap()).collect();
        let x = DataMatrix::from_blocks(basis.clone(), vec![0.0], &[vec![col.clone()]]).unwrap();
        let states: Vec<Vec<QuantumState>> = vec![vec![psi.clone().into()]];
        for mode in [NoiseMode::GaussianIndependent, NoiseMode::GaussianCovariant] {
            let big = NoiseModel::new(mode, 1_000_000_000_000, 3).unwrap();
            let y = apply_noise(&x, &big, Some(&states)).unwrap();
            assert!((y.values() - x.values()).amax() < 1e-4);
            let small = NoiseModel::new(mode, 100, 3).unwrap();
            let a = apply_noise(&x, &small, Some(&states)).unwrap();
            let b = apply_noise(&x, &small, Some(&states)).unwrap();
            assert_eq!(a, b);
            assert!((a.values() - x.values()).amax() > 1e-3);
        }
        let shots = NoiseModel::new(NoiseMode::ExactShots, 200, 3).unwrap();
        assert!(matches!(apply_noise(&x, &shots, None), Err(Error::InvalidParameter(_))));
        assert!(apply_noise(&x, &shots, Some(&states)).is_ok());
        assert!(NoiseModel::new(NoiseMode::ExactShots, 0, 1).is_err());
    }
}
