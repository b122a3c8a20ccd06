//! N-qubit Pauli strings in symplectic (x, z) bit form and geometrically
//! local Pauli bases.
//!
//! Site `q` of a string is bit `q` of both masks. Dense realizations use the
//! Kronecker order `P_0 ⊗ P_1 ⊗ … ⊗ P_{N-1}`, so site 0 is the most
//! significant bit of a computational-basis index.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use alloc::collections::{BTreeMap, BTreeSet};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ensure, invalid, Error, Result};
use crate::prelude::*;
use crate::DENSE_CAP;

/// Maximum number of sites a [`PauliString`] can hold.
pub const MAX_SITES: usize = 64;

/// Single-site Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// 2×2 matrix of the label.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// A phase `i^k`, `k ∈ {0, 1, 2, 3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// A Pauli string on `n ≤ 64` sites, without phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
}

fn site_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_len(a: &PauliString, b: &PauliString) -> Result<()> {
    ensure(a.n == b.n, || {
        format!("length mismatch: {} vs {} sites", a.n, b.n)
    })
}

impl PauliString {
    /// Identity string on `n` sites.
    pub fn identity(n: usize) -> Result<Self> {
        ensure((1..=MAX_SITES).contains(&n), || {
            format!("site count {n} outside 1..={MAX_SITES}")
        })?;
        Ok(PauliString { n: n as u8, x: 0, z: 0 })
    }

    /// Builds a string from raw symplectic masks (bit `q` = site `q`).
    pub fn from_masks(n: usize, x: u64, z: u64) -> Result<Self> {
        let id = Self::identity(n)?;
        let m = site_mask(n);
        ensure(x & !m == 0 && z & !m == 0, || {
            "mask has bits beyond the site count".to_string()
        })?;
        Ok(PauliString { x, z, ..id })
    }

    pub fn from_labels(labels: &[Pauli]) -> Result<Self> {
        let mut p = Self::identity(labels.len())?;
        for (q, &l) in labels.iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }

    /// `label` on `site`, identity elsewhere.
    pub fn single(n: usize, site: usize, label: Pauli) -> Result<Self> {
        Self::from_sparse(n, &[(site, label)])
    }

    pub fn from_sparse(n: usize, entries: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = Self::identity(n)?;
        for &(q, l) in entries {
            ensure(q < n, || format!("site {q} out of range for {n} sites"))?;
            p.set(q, l);
        }
        Ok(p)
    }

    fn set(&mut self, q: usize, l: Pauli) {
        let (bx, bz) = l.bits();
        let bit = 1u64 << q;
        self.x = (self.x & !bit) | if bx { bit } else { 0 };
        self.z = (self.z & !bit) | if bz { bit } else { 0 };
    }

    pub fn num_sites(&self) -> usize {
        self.n as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn label(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn labels(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.num_sites()).map(move |q| self.label(q))
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    /// Ascending non-identity sites.
    pub fn support(&self) -> Vec<usize> {
        let s = self.support_mask();
        (0..self.num_sites()).filter(|q| s >> q & 1 == 1).collect()
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// `self · other = phase · result`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        check_len(self, other)?;
        Ok(self.multiply_unchecked(other))
    }

    pub(crate) fn multiply_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        // P = i^{y(P)} X^x Z^z; moving Z^{zP} past X^{xQ} costs (-1)^{|zP & xQ|}.
        let r = PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let swaps = (self.z & other.x).count_ones();
        let k = self.y_count() + other.y_count() + 2 * swaps + 4 - r.y_count() % 4;
        (Phase::from_exponent(k), r)
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_len(self, other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Sitewise compatibility: equal labels or an identity at every site.
    pub fn completely_commutes(&self, other: &PauliString) -> Result<bool> {
        check_len(self, other)?;
        Ok(self.completely_commutes_unchecked(other))
    }

    pub(crate) fn completely_commutes_unchecked(&self, other: &PauliString) -> bool {
        let both = self.support_mask() & other.support_mask();
        ((self.x ^ other.x) | (self.z ^ other.z)) & both == 0
    }

    /// Number of sites where both strings are non-identity.
    pub fn overlap_weight(&self, other: &PauliString) -> Result<usize> {
        check_len(self, other)?;
        Ok((self.support_mask() & other.support_mask()).count_ones() as usize)
    }

    /// Masks re-indexed so that site `q` sits at bit `n-1-q`, the
    /// computational-basis convention of the dense realization.
    pub fn state_masks(&self) -> (usize, usize) {
        let n = self.num_sites();
        let rev = |m: u64| (m.reverse_bits() >> (64 - n)) as usize;
        (rev(self.x), rev(self.z))
    }

    /// Action on computational basis states: `P|b⟩ = phase(b) |b ⊕ flip⟩`.
    pub fn action(&self) -> BasisAction {
        let (flip, zm) = self.state_masks();
        BasisAction {
            flip,
            zmask: zm,
            base: Phase::from_exponent(self.y_count()),
        }
    }

    /// Dense `2^N × 2^N` matrix.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.num_sites();
        if n > DENSE_CAP {
            return Err(Error::ResourceLimit(format!(
                "dense realization of {n} qubits exceeds cap {DENSE_CAP}"
            )));
        }
        let dim = 1usize << n;
        let act = self.action();
        let mut m = DMatrix::zeros(dim, dim);
        for s in 0..dim {
            m[(s ^ act.flip, s)] = act.phase(s);
        }
        Ok(m)
    }

    /// Canonical order: leftmost support site, then the label sequence.
    pub fn canonical_cmp(&self, other: &PauliString) -> Ordering {
        let lead = |p: &PauliString| p.support_mask().trailing_zeros();
        self.n
            .cmp(&other.n)
            .then(lead(self).cmp(&lead(other)))
            .then_with(|| self.labels().cmp(other.labels()))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(other)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.labels() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| invalid(format!("bad Pauli label {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_labels(&labels)
    }
}

/// How a Pauli string maps computational basis states.
#[derive(Debug, Clone, Copy)]
pub struct BasisAction {
    pub flip: usize,
    zmask: usize,
    base: Phase,
}

impl BasisAction {
    /// Phase `i^{#Y} (-1)^{|z & b|}` picked up by `|b⟩`.
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        let k = self.base.exponent() as u32 + 2 * ((self.zmask & b).count_ones() & 1);
        Phase::from_exponent(k).to_complex()
    }

    /// Real sign part `(-1)^{|z & b|}`.
    #[inline]
    pub fn sign(&self, b: usize) -> f64 {
        if (self.zmask & b).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn base_phase(&self) -> Phase {
        self.base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Ordered, duplicate-free set of non-identity Pauli strings whose supports
/// fit inside a window of `k` contiguous sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliBasisSet {
    elements: Vec<PauliString>,
    n: usize,
    k: usize,
    boundary: Boundary,
    index: BTreeMap<(u64, u64), usize>,
}

/// Site windows of width `k`; periodic windows wrap.
pub fn windows(n: usize, k: usize, boundary: Boundary) -> Vec<Vec<usize>> {
    match boundary {
        Boundary::Open => (0..=n - k).map(|s| (s..s + k).collect()).collect(),
        Boundary::Periodic if k == n => vec![(0..n).collect()],
        Boundary::Periodic => (0..n).map(|s| (0..k).map(|i| (s + i) % n).collect()).collect(),
    }
}

/// Whether `support` (a site mask) lies inside some window.
pub fn fits_window(support: u64, n: usize, k: usize, boundary: Boundary) -> bool {
    windows(n, k, boundary)
        .iter()
        .any(|w| support & !w.iter().fold(0u64, |m, &q| m | 1 << q) == 0)
}

/// All geometrically `k`-local Pauli strings on `n` sites, identity excluded,
/// in canonical order.
pub fn enumerate_local_paulis(n: usize, k: usize, boundary: Boundary) -> Result<PauliBasisSet> {
    ensure((1..=MAX_SITES).contains(&n), || format!("site count {n} outside 1..={MAX_SITES}"))?;
    ensure(k >= 1 && k <= n, || format!("window {k} must satisfy 1 <= k <= N = {n}"))?;
    let mut set = BTreeSet::new();
    for w in windows(n, k, boundary) {
        for code in 1..(1usize << (2 * k)) {
            let mut p = PauliString::identity(n)?;
            for (i, &q) in w.iter().enumerate() {
                p.set(q, Pauli::ALL[(code >> (2 * i)) & 3]);
            }
            set.insert(p);
        }
    }
    Ok(PauliBasisSet::build(set.into_iter().collect(), n, k, boundary))
}

impl PauliBasisSet {
    fn build(elements: Vec<PauliString>, n: usize, k: usize, boundary: Boundary) -> Self {
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, p)| ((p.x, p.z), i))
            .collect();
        PauliBasisSet {
            elements,
            n,
            k,
            boundary,
            index,
        }
    }

    /// Wraps an explicit list, checking the set invariants.
    pub fn from_elements(
        mut elements: Vec<PauliString>,
        n: usize,
        k: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        ensure(k >= 1 && k <= n, || format!("window {k} must satisfy 1 <= k <= N = {n}"))?;
        for p in &elements {
            ensure(p.num_sites() == n, || format!("{p} is not on {n} sites"))?;
            ensure(!p.is_identity(), || "identity string not allowed in a basis".into())?;
            ensure(fits_window(p.support_mask(), n, k, boundary), || {
                format!("{p} does not fit a {k}-site window")
            })?;
        }
        elements.sort();
        let before = elements.len();
        elements.dedup();
        ensure(before == elements.len(), || "duplicate strings in basis".into())?;
        Ok(Self::build(elements, n, k, boundary))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn locality(&self) -> usize {
        self.k
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn elements(&self) -> &[PauliString] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> Option<&PauliString> {
        self.elements.get(i)
    }

    pub fn index_of(&self, p: &PauliString) -> Option<usize> {
        if p.num_sites() != self.n {
            return None;
        }
        self.index.get(&(p.x, p.z)).copied()
    }

    /// Elements whose support lies inside `sites`, with their original row
    /// indices.
    pub fn restrict(&self, sites: &[usize]) -> (PauliBasisSet, Vec<usize>) {
        let region = sites.iter().fold(0u64, |m, &q| m | 1 << q);
        let (rows, kept): (Vec<usize>, Vec<PauliString>) = self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, p)| p.support_mask() & !region == 0)
            .map(|(i, p)| (i, *p))
            .unzip();
        (Self::build(kept, self.n, self.k, self.boundary), rows)
    }
}

impl<'a> IntoIterator for &'a PauliBasisSet {
    type Item = &'a PauliString;
    type IntoIter = core::slice::Iter<'a, PauliString>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    fn dense_by_kron(s: &PauliString) -> DMatrix<Complex64> {
        s.labels().fold(DMatrix::identity(1, 1), |acc, l| {
            let m = l.matrix();
            let m = DMatrix::from_fn(2, 2, |r, c| m[r][c]);
            kron(&acc, &m)
        })
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_qubit_table() {
        let (ph, r) = p("X").multiply(&p("Y")).unwrap();
        assert_eq!(ph, Phase::I);
        assert_eq!(r, p("Z"));
        let (ph, r) = p("Y").multiply(&p("X")).unwrap();
        assert_eq!((ph, r), (Phase::MINUS_I, p("Z")));
        let (ph, r) = p("Z").multiply(&p("X")).unwrap();
        assert_eq!((ph, r), (Phase::I, p("Y")));
    }

    #[test]
    fn involution() {
        for s in ["XYZI", "ZZZZ", "IYIY", "XIXI"] {
            let (ph, r) = p(s).multiply(&p(s)).unwrap();
            assert_eq!(ph, Phase::ONE);
            assert!(r.is_identity());
        }
    }

    #[test]
    fn two_qubit_product_matches_dense() {
        let a = p("XZ");
        let b = p("ZX");
        let (ph, r) = a.multiply(&b).unwrap();
        let lhs = a.to_dense().unwrap() * b.to_dense().unwrap();
        let rhs = r.to_dense().unwrap() * ph.to_complex();
        assert!(max_abs(&(lhs - rhs)) < 1e-15);
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("XI").completely_commutes(&p("XZ")).unwrap());
        assert!(!p("XX").completely_commutes(&p("XY")).unwrap());
        assert_eq!(p("XI").overlap_weight(&p("XZ")).unwrap(), 1);
        assert_eq!(p("XYZ").overlap_weight(&p("ZYX")).unwrap(), 3);
        assert_eq!(p("XYZ").overlap_weight(&p("III")).unwrap(), 0);
        assert!(p("XYZ").completely_commutes(&p("III")).unwrap());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(p("XX").multiply(&p("X")), Err(Error::InvalidParameter(_))));
        assert!(p("XX").commutes(&p("X")).is_err());
        assert!(p("XX").completely_commutes(&p("X")).is_err());
        assert!(p("XX").overlap_weight(&p("X")).is_err());
    }

    #[test]
    fn dense_forms() {
        let z = p("Z").to_dense().unwrap();
        assert_eq!(z[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(z[(0, 1)], Complex64::new(0.0, 0.0));
        let id = p("III").to_dense().unwrap();
        assert_eq!(id, DMatrix::identity(8, 8));
        let xy = p("XY");
        assert!(max_abs(&(xy.to_dense().unwrap() - dense_by_kron(&xy))) == 0.0);
        let big = PauliString::identity(13).unwrap();
        assert!(matches!(big.to_dense(), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn dense_matches_kron_and_is_involutive_exhaustively() {
        for n in 1..=3 {
            for code in 0..(1usize << (2 * n)) {
                let labels: Vec<Pauli> = (0..n).map(|q| Pauli::ALL[(code >> (2 * q)) & 3]).collect();
                let s = PauliString::from_labels(&labels).unwrap();
                let d = s.to_dense().unwrap();
                assert_eq!(d, dense_by_kron(&s));
                assert!(max_abs(&(d.adjoint() - &d)) == 0.0);
                assert!(max_abs(&(&d * &d - DMatrix::identity(1 << n, 1 << n))) == 0.0);
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        let s = p("XIZY");
        assert_eq!(s.to_string(), "XIZY");
        assert_eq!(s.weight(), 3);
        assert_eq!(s.support(), vec![0, 2, 3]);
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn small_enumerations() {
        let b = enumerate_local_paulis(1, 1, Boundary::Open).unwrap();
        let names: Vec<String> = b.elements().iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["X", "Y", "Z"]);
        let b = enumerate_local_paulis(2, 1, Boundary::Open).unwrap();
        let names: Vec<String> = b.elements().iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["XI", "YI", "ZI", "IX", "IY", "IZ"]);
    }

    #[test]
    fn periodic_count_matches_exhaustive_filter() {
        let (n, k) = (4, 2);
        let brute = (1..(1usize << (2 * n)))
            .filter(|code| {
                let labels: Vec<Pauli> = (0..n).map(|q| Pauli::ALL[(code >> (2 * q)) & 3]).collect();
                let s = PauliString::from_labels(&labels).unwrap();
                // independent window test: some start s with all support in {s, s+1 mod n}
                (0..n).any(|st| s.support().iter().all(|&q| q == st || q == (st + 1) % n))
            })
            .count();
        let b = enumerate_local_paulis(n, k, Boundary::Periodic).unwrap();
        assert_eq!(b.len(), brute);
        assert_eq!(brute, 4 * 3 + 4 * 9);
    }

    #[test]
    fn invalid_enumeration_parameters() {
        assert!(enumerate_local_paulis(0, 1, Boundary::Open).is_err());
        assert!(enumerate_local_paulis(3, 4, Boundary::Open).is_err());
        assert!(enumerate_local_paulis(3, 0, Boundary::Periodic).is_err());
    }

    #[test]
    fn basis_invariants_and_linear_growth() {
        let mut per_site = Vec::new();
        for n in 4..=12 {
            let b = enumerate_local_paulis(n, 3, Boundary::Periodic).unwrap();
            let mut seen = BTreeSet::new();
            for (i, p) in b.elements().iter().enumerate() {
                assert!(!p.is_identity());
                assert!(seen.insert(*p));
                assert!(fits_window(p.support_mask(), n, 3, Boundary::Periodic));
                assert_eq!(b.index_of(p), Some(i));
            }
            assert!(b.elements().windows(2).all(|w| w[0] < w[1]));
            per_site.push(b.len() as f64 / n as f64);
        }
        // 3 + 9 + 9 + 27 strings per site once N > 2k
        assert!(per_site.iter().all(|&c| c <= 48.0));
        assert_eq!(enumerate_local_paulis(8, 3, Boundary::Periodic).unwrap().len(), 384);
        assert_eq!(enumerate_local_paulis(8, 3, Boundary::Open).unwrap().len(), 303);
    }

    #[test]
    fn enumeration_is_deterministic_and_restriction_closed() {
        let a = enumerate_local_paulis(6, 3, Boundary::Periodic).unwrap();
        let b = enumerate_local_paulis(6, 3, Boundary::Periodic).unwrap();
        assert_eq!(a, b);
        let (sub, rows) = a.restrict(&[5, 0, 1]);
        assert_eq!(sub.len(), 63);
        for (r, p) in rows.iter().zip(sub.elements()) {
            assert_eq!(a.elements()[*r], *p);
        }
        let rebuilt =
            PauliBasisSet::from_elements(sub.elements().to_vec(), 6, 3, Boundary::Periodic).unwrap();
        assert_eq!(rebuilt.elements(), sub.elements());
    }
}
