//! Real linear combinations of Pauli strings (Hermitian operators) and their
//! symbolic commutators.

use alloc::collections::BTreeMap;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::pauli::{PauliBasisSet, PauliString};
use crate::prelude::*;
use crate::DENSE_CAP;

/// `Σ λ_P P` with real, finite coefficients; duplicate strings are merged
/// and exact zeros dropped. Terms are kept in canonical string order.
#[derive(Clone, PartialEq, Default)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (c, p) in terms {
            ensure(c.is_finite(), || format!("non-finite coefficient on {p}"))?;
            ensure(p.num_sites() == n, || format!("{p} is not on {n} sites"))?;
            *merged.entry(p).or_insert(0.0) += c;
        }
        let terms = merged.into_iter().filter(|(_, c)| *c != 0.0).map(|(p, c)| (c, p)).collect();
        Ok(PauliSum { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: Vec::new() }
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `p`, zero when absent.
    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms.iter().find(|(_, q)| q == p).map_or(0.0, |(c, _)| *c)
    }

    /// Drops identity components (constant shifts).
    pub fn without_identity(&self) -> Self {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().filter(|(_, p)| !p.is_identity()).cloned().collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.n, self.terms.iter().map(|(c, p)| (c * s, *p)))
    }

    pub fn plus(&self, other: &PauliSum) -> Result<Self> {
        ensure(self.n == other.n, || "site count mismatch".into())?;
        Self::new(self.n, self.terms.iter().chain(other.terms.iter()).cloned())
    }

    /// `Σ|λ_P|`, an upper bound on the operator norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Largest support over the terms.
    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(|(_, p)| p.weight()).max().unwrap_or(0)
    }

    /// Coefficient vector over `basis`; fails if a term lies outside it.
    pub fn coefficients_in(&self, basis: &PauliBasisSet) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(basis.len());
        for (c, p) in &self.terms {
            let i = basis
                .index_of(p)
                .ok_or_else(|| Error::InvalidParameter(format!("{p} is not in the basis")))?;
            v[i] = *c;
        }
        Ok(v)
    }

    pub fn from_coefficients(basis: &PauliBasisSet, coeffs: &[f64]) -> Result<Self> {
        ensure(coeffs.len() == basis.len(), || "coefficient length mismatch".into())?;
        Self::new(basis.num_sites(), coeffs.iter().copied().zip(basis.elements().iter().copied()))
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n > DENSE_CAP {
            return Err(Error::ResourceLimit(format!(
                "dense realization of {} qubits exceeds cap {DENSE_CAP}",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            let act = p.action();
            for s in 0..dim {
                m[(s ^ act.flip, s)] += act.phase(s) * *c;
            }
        }
        Ok(m)
    }

    /// Symbolic `[self, other]` as complex Pauli coefficients.
    pub fn commutator(&self, other: &PauliSum) -> Result<ComplexPauliSum> {
        ensure(self.n == other.n, || "site count mismatch".into())?;
        let mut out = ComplexPauliSum::default();
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                if p.commutes_unchecked(q) {
                    continue;
                }
                // anticommuting: PQ - QP = 2PQ
                let (ph, r) = p.multiply_unchecked(q);
                out.add(r, ph.to_complex() * (2.0 * a * b));
            }
        }
        Ok(out)
    }

    /// Whether `[self, other]` vanishes exactly (no tolerance).
    pub fn commutes_with(&self, other: &PauliSum) -> Result<bool> {
        Ok(self.commutator(other)?.is_zero())
    }
}

impl fmt::Debug for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliSum[")?;
        for (i, (c, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{p}")?;
        }
        write!(f, "]")
    }
}

/// Complex Pauli expansion produced by commutators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplexPauliSum {
    terms: BTreeMap<PauliString, Complex64>,
}

impl ComplexPauliSum {
    pub fn add(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Normalized Hilbert–Schmidt norm `sqrt(Σ|c|²)`.
    pub fn hs_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(n: usize, t: &[(f64, &str)]) -> PauliSum {
        PauliSum::new(n, t.iter().map(|(c, s)| (*c, s.parse().unwrap()))).unwrap()
    }

    #[test]
    fn merges_and_drops_zeros() {
        let s = ps(2, &[(1.0, "XX"), (0.5, "ZI"), (-1.0, "XX")]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.coefficient(&"ZI".parse().unwrap()), 0.5);
        assert!(PauliSum::new(1, [(f64::NAN, "X".parse().unwrap())]).is_err());
    }

    #[test]
    fn symbolic_commutator_matches_dense() {
        let a = ps(3, &[(0.7, "XYI"), (-1.2, "ZZI"), (0.3, "IIX")]);
        let b = ps(3, &[(1.1, "YIZ"), (0.4, "IXX"), (2.0, "ZII")]);
        let sym = a.commutator(&b).unwrap();
        let mut dense_sym = DMatrix::<Complex64>::zeros(8, 8);
        for (p, c) in sym.terms() {
            dense_sym += p.to_dense().unwrap() * *c;
        }
        let (da, db) = (a.to_dense().unwrap(), b.to_dense().unwrap());
        let diff = &da * &db - &db * &da - dense_sym;
        assert!(diff.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn commuting_sums() {
        let zz = ps(3, &[(1.0, "ZZI"), (1.0, "IZZ")]);
        let z = ps(3, &[(1.0, "ZII"), (1.0, "IZI"), (1.0, "IIZ")]);
        assert!(zz.commutes_with(&z).unwrap());
        let x = ps(3, &[(1.0, "XII")]);
        assert!(!zz.commutes_with(&x).unwrap());
    }
}
