use alloc::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DensityMatrix, LindbladSpec};
use crate::error::{ensure, Error, Result};
use crate::prelude::*;
use crate::LINDBLAD_CAP;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Dormand–Prince 5(4) tableau
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step control for [`LindbladEvolver`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions {
            atol: 1e-9,
            rtol: 1e-9,
            max_steps: 10_000_000,
        }
    }
}

/// Pauli terms sharing one bit-flip pattern, folded into a diagonal.
#[derive(Debug, Clone)]
struct FlipGroup {
    flip: usize,
    diag: Vec<Complex64>,
}

#[derive(Debug, Clone)]
struct Jump {
    rate: f64,
    flip: usize,
    phase: Vec<Complex64>,
}

/// Adaptive Dormand–Prince integrator for `dρ/dt = -i[H,ρ] + Σ a²(PρP - ρ)`.
///
/// The right-hand side never forms `H` or the superoperator: each group of
/// Hamiltonian terms with a common X-mask acts as a permuted diagonal.
#[derive(Debug, Clone)]
pub struct LindbladEvolver {
    n: usize,
    dim: usize,
    groups: Vec<FlipGroup>,
    jumps: Vec<Jump>,
    total_rate: f64,
    scale: f64,
    options: LindbladOptions,
}

impl LindbladEvolver {
    pub fn new(spec: &LindbladSpec, options: LindbladOptions) -> Result<Self> {
        let n = spec.num_sites();
        if n > LINDBLAD_CAP {
            return Err(Error::ResourceLimit(format!("{n} qubits exceeds Lindblad cap {LINDBLAD_CAP}")));
        }
        ensure(options.atol > 0.0 && options.rtol > 0.0, || "tolerances must be positive".into())?;
        let dim = 1usize << n;
        let mut by_flip: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for (c, p) in spec.hamiltonian().terms().terms() {
            let act = p.action();
            let diag = by_flip.entry(act.flip).or_insert_with(|| vec![ZERO; dim]);
            for (b, d) in diag.iter_mut().enumerate() {
                *d += act.phase(b) * *c;
            }
        }
        let groups = by_flip.into_iter().map(|(flip, diag)| FlipGroup { flip, diag }).collect();
        let jumps: Vec<Jump> = spec
            .jumps()
            .iter()
            .filter(|(a, _)| *a > 0.0)
            .map(|(a, p)| {
                let act = p.action();
                Jump {
                    rate: a * a,
                    flip: act.flip,
                    phase: (0..dim).map(|b| act.phase(b)).collect(),
                }
            })
            .collect();
        let total_rate = jumps.iter().map(|j| j.rate).sum::<f64>();
        let scale = spec.hamiltonian().terms().l1_norm() + total_rate;
        Ok(LindbladEvolver {
            n,
            dim,
            groups,
            jumps,
            total_rate,
            scale,
            options,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    fn rhs(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim;
        let minus_i = Complex64::new(0.0, -1.0);
        for (o, r) in out.iter_mut().zip(rho) {
            *o = -*r * self.total_rate;
        }
        // column-major: entry (r, c) at r + c·dim
        for g in &self.groups {
            let x = g.flip;
            for c in 0..dim {
                let col = c * dim;
                let col_f = (c ^ x) * dim;
                let dc = g.diag[c];
                for r in 0..dim {
                    let rf = r ^ x;
                    // (Hρ - ρH)[r, c]
                    let comm = g.diag[rf] * rho[rf + col] - rho[r + col_f] * dc;
                    out[r + col] += minus_i * comm;
                }
            }
        }
        for j in &self.jumps {
            let x = j.flip;
            for c in 0..dim {
                let col_f = (c ^ x) * dim;
                let pc = j.phase[c] * j.rate;
                for r in 0..dim {
                    let rf = r ^ x;
                    out[r + c * dim] += j.phase[rf] * rho[rf + col_f] * pc;
                }
            }
        }
    }

    fn error_norm(&self, y: &[Complex64], y_new: &[Complex64], err: &[Complex64]) -> f64 {
        let o = &self.options;
        let sum: f64 = y
            .iter()
            .zip(y_new)
            .zip(err)
            .map(|((a, b), e)| {
                let sc = o.atol + o.rtol * a.norm().max(b.norm());
                (e.norm() / sc).powi(2)
            })
            .sum();
        (sum / y.len() as f64).sqrt()
    }

    /// States at each time of an ascending, nonnegative grid.
    pub fn evolve_grid(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        ensure(rho0.num_sites() == self.n, || {
            format!("state on {} qubits, generator on {}", rho0.num_sites(), self.n)
        })?;
        ensure(times.iter().all(|t| t.is_finite() && *t >= 0.0), || {
            "open-system times must be finite and >= 0".into()
        })?;
        ensure(times.windows(2).all(|w| w[0] <= w[1]), || "times must be ascending".into())?;

        let len = self.dim * self.dim;
        let mut y: Vec<Complex64> = rho0.matrix().as_slice().to_vec();
        let mut k: [Vec<Complex64>; 7] = core::array::from_fn(|_| vec![ZERO; len]);
        let mut tmp = vec![ZERO; len];
        let mut y_new = vec![ZERO; len];
        let mut err = vec![ZERO; len];
        let mut t = 0.0;
        let mut h = if self.scale > 0.0 { 0.05 / self.scale } else { 1.0 };
        let mut steps = 0usize;
        self.rhs(&y, &mut k[0]);
        let mut out = Vec::with_capacity(times.len());

        for &target in times {
            while t < target {
                let last = h >= target - t;
                let step = if last { target - t } else { h };
                let stages: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
                for (s, a) in stages.iter().enumerate() {
                    for i in 0..len {
                        let mut acc = y[i];
                        for (j, aj) in a.iter().enumerate() {
                            acc += k[j][i] * (aj * step);
                        }
                        tmp[i] = acc;
                    }
                    self.rhs(&tmp, &mut k[s + 1]);
                }
                for i in 0..len {
                    let mut acc = y[i];
                    for (j, bj) in B.iter().enumerate() {
                        acc += k[j][i] * (bj * step);
                    }
                    y_new[i] = acc;
                }
                self.rhs(&y_new, &mut k[6]);
                for i in 0..len {
                    let mut acc = ZERO;
                    for (j, ej) in E.iter().enumerate() {
                        acc += k[j][i] * (ej * step);
                    }
                    err[i] = acc;
                }
                let norm = self.error_norm(&y, &y_new, &err);
                if !norm.is_finite() {
                    return Err(Error::NumericFailure(format!("non-finite error estimate at t = {t}")));
                }
                let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                if norm <= 1.0 {
                    t = if last { target } else { t + step };
                    symmetrize(&mut y_new, self.dim);
                    core::mem::swap(&mut y, &mut y_new);
                    // f(sym y) = sym f(y)
                    k.swap(0, 6);
                    symmetrize(&mut k[0], self.dim);
                    if !last {
                        h = step * factor;
                    }
                } else {
                    h = step * factor;
                }
                steps += 1;
                if steps > self.options.max_steps || h < 1e-14 * target.max(1.0) {
                    return Err(Error::NumericFailure(format!(
                        "step control failed at t = {t} (h = {h:e}, {steps} steps)"
                    )));
                }
            }
            let rho = DensityMatrix::unchecked(self.n, DMatrix::from_column_slice(self.dim, self.dim, &y))?;
            let tr = rho.trace();
            if (tr - 1.0).abs() > 1e-8 {
                return Err(Error::NumericFailure(format!("trace drifted to {tr} at t = {target}")));
            }
            out.push(rho);
        }
        Ok(out)
    }

    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        Ok(self.evolve_grid(rho0, &[t])?.pop().expect("one time"))
    }
}

fn symmetrize(y: &mut [Complex64], dim: usize) {
    for c in 0..dim {
        for r in 0..=c {
            let a = y[r + c * dim];
            let b = y[c + r * dim];
            let m = (a + b.conj()) * 0.5;
            y[r + c * dim] = m;
            y[c + r * dim] = m.conj();
        }
    }
}

/// One-shot open-system evolution to time `t ≥ 0` with default tolerances.
pub fn evolve_density(spec: &LindbladSpec, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("open-system time {t} must be finite and >= 0")));
    }
    LindbladEvolver::new(spec, LindbladOptions::default())?.evolve(rho0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{HamiltonianSpec, StateVector};
    use crate::pauli::PauliString;
    use nalgebra::DVector;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn plus() -> StateVector {
        StateVector::normalized(1, DVector::from_element(2, Complex64::new(1.0, 0.0))).unwrap()
    }

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
    fn single_qubit_dephasing_decay() {
        let gamma: f64 = 0.1;
        let h = HamiltonianSpec::new(1, []).unwrap();
        let l = LindbladSpec::new(h, vec![(gamma.sqrt(), p("Z"))]).unwrap();
        let rho = evolve_density(&l, &plus().to_density(), 5.0).unwrap();
        let x = rho.expectation(&p("X")).unwrap();
        assert!((x - (-1.0f64).exp()).abs() < 1e-6, "{x}");
        assert!((x - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn zero_dissipation_matches_unitary() {
        let h = HamiltonianSpec::new(3, [(0.9, p("XXI")), (-0.4, p("IYY")), (0.6, p("ZIZ")), (0.3, p("XIY"))]).unwrap();
        let l = LindbladSpec::new(h.clone(), vec![]).unwrap();
        let psi0 = StateVector::normalized(
            3,
            DVector::from_fn(8, |i, _| Complex64::new(1.0 + i as f64, (i as f64).cos())),
        )
        .unwrap();
        let times = [0.0, 0.5, 1.3, 2.0];
        let ev = LindbladEvolver::new(&l, LindbladOptions::default()).unwrap();
        let rhos = ev.evolve_grid(&psi0.to_density(), &times).unwrap();
        let prop = h.propagator().unwrap();
        for (rho, &t) in rhos.iter().zip(&times) {
            let want = prop.evolve(&psi0, t).unwrap().to_density();
            let diff = (rho.matrix() - want.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-7, "t = {t}: {diff:e}");
        }
    }

    #[test]
    fn matches_superoperator_exponential() {
        let h = HamiltonianSpec::new(2, [(1.0, p("XX")), (1.0, p("YY")), (1.0, p("ZZ")), (0.7, p("ZI")), (-0.3, p("IZ"))]).unwrap();
        let gamma: f64 = 0.1;
        let l = LindbladSpec::new(h.clone(), vec![(gamma.sqrt(), p("ZI")), (gamma.sqrt(), p("IZ"))]).unwrap();
        let psi0 = StateVector::normalized(
            2,
            DVector::from_vec(vec![
                Complex64::new(0.5, 0.1),
                Complex64::new(-0.2, 0.4),
                Complex64::new(0.3, -0.6),
                Complex64::new(0.1, 0.2),
            ]),
        )
        .unwrap();
        let rho0 = psi0.to_density();

        // vec(AρB) = (Bᵀ ⊗ A) vec(ρ), column-major
        let id = DMatrix::<Complex64>::identity(4, 4);
        let hd = h.terms().to_dense().unwrap();
        let mut sup = (id.kronecker(&hd) - hd.transpose().kronecker(&id)) * Complex64::new(0.0, -1.0);
        for (a, q) in l.jumps() {
            let pd = q.to_dense().unwrap() * Complex64::new(*a, 0.0);
            let ldl = pd.adjoint() * &pd;
            sup += pd.conjugate().kronecker(&pd);
            sup -= (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * Complex64::new(0.5, 0.0);
        }
        let v = expm(&sup) * DVector::from_column_slice(rho0.matrix().as_slice());
        let want = DMatrix::from_column_slice(4, 4, v.as_slice());
        let got = evolve_density(&l, &rho0, 1.0).unwrap();
        let diff = (got.matrix() - want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff:e}");
        got.validate().unwrap();
    }

    #[test]
    fn rejects_negative_time_and_large_systems() {
        let h = HamiltonianSpec::new(1, [(1.0, p("Z"))]).unwrap();
        let l = LindbladSpec::new(h, vec![]).unwrap();
        let r = plus().to_density();
        assert!(matches!(evolve_density(&l, &r, -1.0), Err(Error::InvalidParameter(_))));
        let big = HamiltonianSpec::new(9, [(1.0, PauliString::identity(9).unwrap())]).unwrap();
        let lb = LindbladSpec::new(big, vec![]).unwrap();
        assert!(matches!(
            LindbladEvolver::new(&lb, LindbladOptions::default()),
            Err(Error::ResourceLimit(_))
        ));
    }
}
