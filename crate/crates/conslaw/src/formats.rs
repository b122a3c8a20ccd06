//! On-disk artifacts: CSV tables, JSON reports and the hash manifest.
//!
//! Every file is UTF-8 with LF line endings. Floats use Rust's shortest
//! round-trip formatting, so identical runs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use conslaw_core::pauli::PauliBasisSet;
use conslaw_core::spectral::SpectralReport;
use conslaw_core::tester::CandidateVerdict;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{RunError, RunResult};

pub const MANIFEST: &str = "manifest.json";

/// Coefficients below this magnitude are left out of displayed expansions.
pub const DISPLAY_CUTOFF: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes files into one directory.
#[derive(Debug)]
pub struct OutputSink {
    dir: PathBuf,
}

impl OutputSink {
    pub fn create(dir: &Path) -> RunResult<Self> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        Ok(OutputSink { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> RunResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| RunError::io(&path, e))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> RunResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Format {
            path: self.dir.join(name),
            message: e.to_string(),
        })?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> RunResult<PathBuf> {
        let path = self.dir.join(name);
        let fail = |e: csv::Error| RunError::Format {
            path: path.clone(),
            message: e.to_string(),
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Format {
            path: path.clone(),
            message: e.to_string(),
        })?;
        self.write_bytes(name, &bytes)
    }

    /// Hashes every regular file in the directory (except the manifest
    /// itself) and writes the manifest.
    pub fn write_manifest(&self) -> RunResult<Vec<ManifestEntry>> {
        let entries = scan_manifest(&self.dir)?;
        self.write_json(MANIFEST, &entries)?;
        Ok(entries)
    }
}

pub fn scan_manifest(dir: &Path) -> RunResult<Vec<ManifestEntry>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| RunError::io(dir, e))? {
        let entry = entry.map_err(|e| RunError::io(dir, e))?;
        let is_file = entry.file_type().map_err(|e| RunError::io(entry.path(), e))?.is_file();
        let name = entry.file_name().to_string_lossy().into_owned();
        if is_file && name != MANIFEST {
            names.push(name);
        }
    }
    names.sort();
    names
        .into_iter()
        .map(|file| {
            let path = dir.join(&file);
            let bytes = fs::read(&path).map_err(|e| RunError::io(&path, e))?;
            Ok(ManifestEntry {
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
                file,
            })
        })
        .collect()
}

/// Files whose content no longer matches the manifest, or that are missing
/// from it.
pub fn verify_manifest(dir: &Path) -> RunResult<Vec<String>> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
    let listed: Vec<ManifestEntry> = serde_json::from_str(&text).map_err(|e| RunError::Format {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let actual = scan_manifest(dir)?;
    let mut bad = Vec::new();
    for a in &actual {
        if !listed.contains(a) {
            bad.push(a.file.clone());
        }
    }
    for l in &listed {
        if !actual.iter().any(|a| a.file == l.file) {
            bad.push(l.file.clone());
        }
    }
    Ok(bad)
}

pub fn float(x: f64) -> String {
    format!("{x:e}")
}

/// `index,sigma` rows, 1-based and ascending; with several repeats the
/// columns `mean,sd` summarize them and `sigma` is the first repeat.
pub fn spectrum_rows(reports: &[SpectralReport]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let first = &reports[0].singular_values;
    if reports.len() == 1 {
        let rows = first
            .iter()
            .enumerate()
            .map(|(i, s)| vec![(i + 1).to_string(), float(*s)])
            .collect();
        return (vec!["index", "sigma"], rows);
    }
    let r = reports.len() as f64;
    let rows = (0..first.len())
        .map(|i| {
            let vals: Vec<f64> = reports.iter().map(|rep| rep.singular_values[i]).collect();
            let mean = vals.iter().sum::<f64>() / r;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
            vec![(i + 1).to_string(), float(first[i]), float(mean), float(var.sqrt())]
        })
        .collect();
    (vec!["index", "sigma", "mean", "sd"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub pauli: String,
    pub coefficient: f64,
}

/// Sign fixed so the largest-magnitude coefficient is positive; terms
/// below [`DISPLAY_CUTOFF`] dropped, the rest sorted by magnitude.
pub fn display_terms(coeffs: &DVector<f64>, basis: &PauliBasisSet) -> Vec<Term> {
    let lead = coeffs.iter().copied().fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
    let sign = if lead < 0.0 { -1.0 } else { 1.0 };
    let mut terms: Vec<Term> = coeffs
        .iter()
        .zip(basis.elements())
        .filter(|(c, _)| c.abs() >= DISPLAY_CUTOFF)
        .map(|(c, p)| Term {
            pauli: p.to_string(),
            coefficient: sign * c,
        })
        .collect();
    terms.sort_by(|a, b| b.coefficient.abs().total_cmp(&a.coefficient.abs()).then_with(|| a.pauli.cmp(&b.pauli)));
    terms
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub label: usize,
    pub singular_value: f64,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub region: Option<Vec<usize>>,
    pub n_p: usize,
    pub epsilon: f64,
    pub normalized: bool,
    pub d_null_hat: usize,
    /// Median of `D̂_null` over the repeats.
    pub median_null: usize,
    pub shape_null: usize,
    /// `σ_{c+1}/σ_c` at the commutant dimension `c`, when known.
    pub gap_ratio: Option<f64>,
    pub singular_values: Vec<f64>,
    pub candidates: Vec<CandidateRecord>,
}

impl SpectrumRecord {
    pub fn from_report(
        report: &SpectralReport,
        region: Option<Vec<usize>>,
        normalized: bool,
        median_null: usize,
        oracle_dim: Option<usize>,
    ) -> Self {
        SpectrumRecord {
            region,
            n_p: report.basis.len(),
            epsilon: report.epsilon,
            normalized,
            d_null_hat: report.d_null_hat,
            median_null,
            shape_null: report.shape_null,
            gap_ratio: oracle_dim.and_then(|c| report.gap_ratio(c)),
            singular_values: report.singular_values.clone(),
            candidates: report
                .candidates
                .iter()
                .map(|c| CandidateRecord {
                    label: c.label,
                    singular_value: c.singular_value,
                    terms: display_terms(&c.coefficients, &report.basis),
                })
                .collect(),
        }
    }
}

/// Long-format bar data: one row per displayed term of each candidate.
pub fn candidate_rows(records: &[CandidateRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .flat_map(|c| {
            c.terms.iter().map(move |t| {
                vec![
                    c.label.to_string(),
                    float(c.singular_value),
                    t.pauli.clone(),
                    float(t.coefficient),
                ]
            })
        })
        .collect()
}

pub const CANDIDATE_HEADER: [&str; 4] = ["candidate", "sigma", "pauli", "coefficient"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub candidate: usize,
    pub outcome: String,
    pub statistic: f64,
    pub witness_time: Option<f64>,
    pub epsilon: f64,
    pub n_segments: usize,
    pub degree: usize,
}

impl VerdictRecord {
    pub fn new(candidate: usize, v: &CandidateVerdict) -> Self {
        VerdictRecord {
            candidate,
            outcome: v.verdict.outcome.as_str().to_string(),
            statistic: v.verdict.statistic,
            witness_time: v.verdict.witness_time,
            epsilon: v.verdict.epsilon,
            n_segments: v.n_segments,
            degree: v.degree,
        }
    }
}

/// Largest grid excursion from the time average, without a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub candidate: usize,
    pub statistic: f64,
    pub witness_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n: usize,
    pub w: f64,
    pub realization: usize,
    pub count: usize,
}

/// Median count per `(N, w)`, in sweep order (upper median for even
/// realization counts).
pub fn median_counts(records: &[CountRecord]) -> Vec<(usize, f64, usize)> {
    let mut keys: Vec<(usize, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(n, w)| n == r.n && w == r.w) {
            keys.push((r.n, r.w));
        }
    }
    keys.into_iter()
        .map(|(n, w)| {
            let mut c: Vec<usize> = records.iter().filter(|r| r.n == n && r.w == w).map(|r| r.count).collect();
            c.sort_unstable();
            (n, w, c[c.len() / 2])
        })
        .collect()
}

pub fn count_rows(medians: &[(usize, f64, usize)]) -> Vec<Vec<String>> {
    medians
        .iter()
        .map(|(n, w, c)| vec![n.to_string(), w.to_string(), c.to_string()])
        .collect()
}

pub fn read_csv(path: &Path) -> RunResult<(Vec<String>, Vec<Vec<String>>)> {
    let fail = |e: csv::Error| RunError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut r = csv::Reader::from_path(path).map_err(fail)?;
    let header = r.headers().map_err(fail)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(fail)?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use conslaw_core::pauli::{enumerate_local_paulis, Boundary};

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let sink = OutputSink::create(dir.path()).unwrap();
        sink.write_csv("a.csv", &["x"], &[vec!["1".into()]]).unwrap();
        sink.write_json("b.json", &[1, 2]).unwrap();
        let m = sink.write_manifest().unwrap();
        assert_eq!(m.len(), 2);
        assert!(verify_manifest(dir.path()).unwrap().is_empty());
        fs::write(dir.path().join("a.csv"), "x\n2\n").unwrap();
        fs::write(dir.path().join("c.txt"), "new").unwrap();
        let bad = verify_manifest(dir.path()).unwrap();
        assert_eq!(bad, vec!["a.csv".to_string(), "c.txt".to_string()]);
    }

    #[test]
    fn csv_uses_lf() {
        let dir = tempfile::tempdir().unwrap();
        let sink = OutputSink::create(dir.path()).unwrap();
        let p = sink.write_csv("s.csv", &["index", "sigma"], &[vec!["1".into(), float(0.5)]]).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "index,sigma\n1,5e-1\n");
    }

    #[test]
    fn display_terms_prune_and_fix_sign() {
        let basis = enumerate_local_paulis(2, 1, Boundary::Open).unwrap();
        let c = DVector::from_vec(vec![0.1, -0.9, 5e-4, 0.0, 0.2, -0.3]);
        let t = display_terms(&c, &basis);
        assert_eq!(t.len(), 4);
        assert_eq!(t[0].coefficient, 0.9);
        assert!(t.windows(2).all(|w| w[0].coefficient.abs() >= w[1].coefficient.abs()));
    }

    #[test]
    fn medians_per_point() {
        let recs: Vec<CountRecord> = [(6, 1.0, 3), (6, 1.0, 5), (6, 1.0, 4), (8, 1.0, 9)]
            .iter()
            .enumerate()
            .map(|(i, &(n, w, count))| CountRecord { n, w, realization: i, count })
            .collect();
        assert_eq!(median_counts(&recs), vec![(6, 1.0, 4), (8, 1.0, 9)]);
    }
}
