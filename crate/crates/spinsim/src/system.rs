//! Spin-system configuration: labeled spins with rotating-frame offsets and
//! a symmetric J-coupling table.
//!
//! Systems load from JSON files with fields `reference`, `spins`
//! (`label` + `offset_hz`) and `couplings` (`a`, `b`, `hz`). Offsets and
//! couplings are in Hz; conversion to rad/s happens once, when Hamiltonian
//! diagonals are built.

use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("failed to read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("invalid spin-system file: {0}")]
    Format(String),
    #[error("duplicate spin label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown spin label {0:?}")]
    UnknownLabel(String),
    #[error("reference spin {0:?} must have offset 0")]
    ReferenceOffsetNonzero(String),
    #[error("coupling references the same spin {0:?} twice")]
    SelfCoupling(String),
    #[error("coupling between {0:?} and {1:?} listed twice")]
    DuplicateCoupling(String, String),
    #[error("system must contain at least one spin")]
    Empty,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    reference: String,
    spins: Vec<SpinEntry>,
    couplings: Vec<CouplingEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinEntry {
    label: String,
    offset_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingEntry {
    a: String,
    b: String,
    hz: f64,
}

/// An ordered set of spin-1/2 nuclei with offsets (Hz, relative to the
/// rotating-frame reference spin) and J couplings (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    labels: Vec<String>,
    offsets_hz: Vec<f64>,
    j_hz: Vec<Vec<f64>>,
    reference: usize,
}

impl SpinSystem {
    /// Build a system programmatically. `couplings` lists each pair once.
    pub fn new(
        reference: &str,
        spins: &[(&str, f64)],
        couplings: &[(&str, &str, f64)],
    ) -> Result<Self, SystemError> {
        let file = SystemFile {
            reference: reference.to_string(),
            spins: spins
                .iter()
                .map(|&(label, offset_hz)| SpinEntry {
                    label: label.to_string(),
                    offset_hz,
                })
                .collect(),
            couplings: couplings
                .iter()
                .map(|&(a, b, hz)| CouplingEntry {
                    a: a.to_string(),
                    b: b.to_string(),
                    hz,
                })
                .collect(),
        };
        Self::from_file_repr(file)
    }

    pub fn from_json_str(text: &str) -> Result<Self, SystemError> {
        let file: SystemFile =
            serde_json::from_str(text).map_err(|e| SystemError::Format(e.to_string()))?;
        Self::from_file_repr(file)
    }

    pub fn from_path(path: &Path) -> Result<Self, SystemError> {
        let text = std::fs::read_to_string(path).map_err(|e| SystemError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    /// Chloroform: 13C and 1H, both on resonance, J = 215 Hz.
    pub fn chloroform() -> Self {
        Self::from_json_str(include_str!("../systems/chloroform.sys")).expect("bundled config")
    }

    /// Trichloroethylene: two 13C nuclei 903.6 Hz apart (frame on C2) and 1H,
    /// with J(C1,C2) = 103.1 Hz, J(C2,H) = 201.3 Hz, J(C1,H) = 9.23 Hz.
    pub fn tce() -> Self {
        Self::from_json_str(include_str!("../systems/tce.sys")).expect("bundled config")
    }

    fn from_file_repr(file: SystemFile) -> Result<Self, SystemError> {
        if file.spins.is_empty() {
            return Err(SystemError::Empty);
        }
        let labels: Vec<String> = file.spins.iter().map(|s| s.label.clone()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(SystemError::DuplicateLabel(l.clone()));
            }
        }
        let offsets_hz: Vec<f64> = file.spins.iter().map(|s| s.offset_hz).collect();
        let reference = labels
            .iter()
            .position(|l| *l == file.reference)
            .ok_or_else(|| SystemError::UnknownLabel(file.reference.clone()))?;
        if offsets_hz[reference] != 0.0 {
            return Err(SystemError::ReferenceOffsetNonzero(file.reference));
        }

        let n = labels.len();
        let mut j_hz = vec![vec![0.0; n]; n];
        let mut listed = vec![vec![false; n]; n];
        let index_of = |label: &str| -> Result<usize, SystemError> {
            labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| SystemError::UnknownLabel(label.to_string()))
        };
        for c in &file.couplings {
            let a = index_of(&c.a)?;
            let b = index_of(&c.b)?;
            if a == b {
                return Err(SystemError::SelfCoupling(c.a.clone()));
            }
            if listed[a][b] {
                return Err(SystemError::DuplicateCoupling(c.a.clone(), c.b.clone()));
            }
            listed[a][b] = true;
            listed[b][a] = true;
            j_hz[a][b] = c.hz;
            j_hz[b][a] = c.hz;
        }
        Ok(Self {
            labels,
            offsets_hz,
            j_hz,
            reference,
        })
    }

    pub fn spin_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Label of the 0-based spin index.
    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    /// Offset of the 0-based spin index, in Hz.
    pub fn offset_hz(&self, index: usize) -> f64 {
        self.offsets_hz[index]
    }

    /// J coupling between two 0-based spin indices, in Hz.
    pub fn j_hz(&self, a: usize, b: usize) -> f64 {
        self.j_hz[a][b]
    }

    /// Resolve a spin label to its 0-based index.
    ///
    /// Labels match exactly; as a fallback, a purely numeric label that names
    /// no configured spin resolves positionally (1-based), so sequences
    /// written with positional labels like `1,2` run against any system.
    pub fn resolve_label(&self, label: &str) -> Result<usize, SystemError> {
        if let Some(i) = self.labels.iter().position(|l| l == label) {
            return Ok(i);
        }
        if let Ok(k) = label.parse::<usize>() {
            if k >= 1 && k <= self.labels.len() {
                return Ok(k - 1);
            }
        }
        Err(SystemError::UnknownLabel(label.to_string()))
    }

    /// Copy of this system with one spin's offset replaced (reference offset
    /// stays pinned at zero). Used for offset-invariance checks.
    pub fn with_offset(&self, label: &str, offset_hz: f64) -> Result<Self, SystemError> {
        let i = self.resolve_label(label)?;
        if i == self.reference && offset_hz != 0.0 {
            return Err(SystemError::ReferenceOffsetNonzero(self.labels[i].clone()));
        }
        let mut out = self.clone();
        out.offsets_hz[i] = offset_hz;
        Ok(out)
    }
}
