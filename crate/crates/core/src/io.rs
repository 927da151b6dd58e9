//! JSON file formats and command reports.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjoint::InvolutionType;
use crate::bimap::{Bimap, BimapError, BimapKind};
use crate::centroid::compute_centroid;
use crate::ff::{FieldCtx, FieldDescriptor, FieldError, Fp};
use crate::group::{Class2Group, GroupError};
use crate::isotest::{NonIsoReason, Verdict};
use crate::linalg::{Mat, Subspace};
use crate::recognize::{NotAQuotient, QuotientDescriptor, Stage};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Bimap(#[from] BimapError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("file declares {what} = {declared} but the data has {actual}")]
    Inconsistent { what: &'static str, declared: usize, actual: usize },
    #[error("field context mismatch: kernel is written over {kernel:?}, group over {group:?}")]
    ContextMismatch { kernel: FieldDescriptor, group: FieldDescriptor },
    #[error("kernel vector has an entry outside [0, p)")]
    Unreduced,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.display().to_string(), source })
}

/// Pretty JSON with a trailing newline; stable for identical values.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    fs::write(path, to_json(value)).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BimapFile {
    pub p: u32,
    #[serde(rename = "dimV")]
    pub dim_v: usize,
    #[serde(rename = "dimW")]
    pub dim_w: usize,
    pub tensor: Vec<Vec<Vec<u32>>>,
    pub kind: BimapKind,
}

impl BimapFile {
    pub fn from_bimap(b: &Bimap) -> Self {
        BimapFile { p: b.p(), dim_v: b.dim_v(), dim_w: b.dim_w(), tensor: b.to_nested(), kind: b.kind() }
    }

    pub fn to_bimap(&self) -> Result<Bimap, IoError> {
        let b = Bimap::from_nested(Fp::new(self.p)?, self.dim_w, &self.tensor, self.kind)?;
        check_dims(&b, self.dim_v, self.dim_w)?;
        Ok(b)
    }
}

fn check_dims(b: &Bimap, dim_v: usize, dim_w: usize) -> Result<(), IoError> {
    for actual in [b.dim_u(), b.dim_v()] {
        if actual != dim_v {
            return Err(IoError::Inconsistent { what: "dimV", declared: dim_v, actual });
        }
    }
    if b.dim_w() != dim_w {
        return Err(IoError::Inconsistent { what: "dimW", declared: dim_w, actual: b.dim_w() });
    }
    Ok(())
}

/// A group `Grp(b)` on disk. `field` records which polynomial basis the
/// center is written in, when the group came from a Heisenberg group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    pub p: u32,
    #[serde(rename = "dimV")]
    pub dim_v: usize,
    #[serde(rename = "dimW")]
    pub dim_w: usize,
    pub comm: Vec<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescriptor>,
}

impl GroupFile {
    pub fn from_group(g: &Class2Group, field: Option<&FieldCtx>) -> Self {
        GroupFile {
            p: g.p(),
            dim_v: g.dim_v(),
            dim_w: g.dim_w(),
            comm: g.bimap().to_nested(),
            field: field.map(FieldCtx::descriptor),
        }
    }

    pub fn to_group(&self) -> Result<Class2Group, IoError> {
        let f = Fp::new(self.p)?;
        let b = if self.dim_v == 0 {
            Bimap::zero(f, 0, self.dim_w)
        } else {
            Bimap::from_nested(f, self.dim_w, &self.comm, BimapKind::Alternating)?
        };
        check_dims(&b, self.dim_v, self.dim_w)?;
        if let Some(desc) = &self.field {
            FieldCtx::from_descriptor(desc)?;
        }
        Ok(Class2Group::from_bimap(b)?)
    }
}

/// A kernel `M <= K`, optionally tagged with the field it is written over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescriptor>,
    pub basis: Vec<Vec<u32>>,
}

impl KernelFile {
    /// The kernel inside the center of `g`, refusing a field mismatch.
    pub fn subspace_for(&self, g: &GroupFile) -> Result<Subspace<Fp>, IoError> {
        if let (Some(kf), Some(gf)) = (&self.field, &g.field) {
            FieldCtx::from_descriptor(kf)?;
            if kf != gf {
                return Err(IoError::ContextMismatch { kernel: kf.clone(), group: gf.clone() });
            }
        }
        for v in &self.basis {
            if v.len() != g.dim_w {
                return Err(IoError::Inconsistent { what: "kernel vector length", declared: g.dim_w, actual: v.len() });
            }
            if v.iter().any(|&c| c >= g.p) {
                return Err(IoError::Unreduced);
            }
        }
        Ok(Subspace::span(Fp::new(g.p)?, g.dim_w, &self.basis).expect("lengths checked"))
    }
}

fn rows(m: &Mat<Fp>) -> Vec<Vec<u32>> {
    m.row_vecs()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageStatus {
    Passed,
    Failed,
    NotReached,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecognizeDetails {
    pub centroid_dim: usize,
    pub centroid_is_field: bool,
    pub adjoint_dim: usize,
    pub center_field: FieldDescriptor,
    pub involution: InvolutionType,
    pub tensor_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecognizeReport {
    pub status: String,
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_basis: Option<Vec<Vec<u32>>>,
    pub stages: Vec<StageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<RecognizeDetails>,
}

impl RecognizeReport {
    pub fn new(g: &Class2Group, result: &Result<QuotientDescriptor, NotAQuotient>, verbose: bool, seed: u64) -> Self {
        match result {
            Ok(desc) => {
                let details = verbose.then(|| {
                    let cent = compute_centroid(g.bimap()).ok();
                    RecognizeDetails {
                        centroid_dim: cent.as_ref().map_or(0, |c| c.dim()),
                        centroid_is_field: cent
                            .and_then(|c| c.is_field(seed).ok())
                            .is_some_and(|t| t.is_field()),
                        adjoint_dim: desc.adjoint_dim,
                        center_field: desc.field.descriptor(),
                        involution: desc.involution,
                        tensor_dim: desc.tensor_dim,
                    }
                });
                RecognizeReport {
                    status: "quotient".into(),
                    p: desc.p(),
                    m: Some(desc.m),
                    d: Some(desc.d()),
                    field: Some(desc.field.descriptor()),
                    kernel_basis: Some(desc.kernel.basis_vecs()),
                    stages: Stage::ALL
                        .iter()
                        .map(|&stage| StageReport { stage, status: StageStatus::Passed, reason: None })
                        .collect(),
                    details,
                }
            }
            Err(e) => {
                let failed_at = Stage::ALL.iter().position(|&s| s == e.stage).expect("listed");
                let stages = Stage::ALL
                    .iter()
                    .enumerate()
                    .map(|(i, &stage)| match i.cmp(&failed_at) {
                        std::cmp::Ordering::Less => StageReport { stage, status: StageStatus::Passed, reason: None },
                        std::cmp::Ordering::Equal => {
                            StageReport { stage, status: StageStatus::Failed, reason: Some(e.reason.clone()) }
                        }
                        std::cmp::Ordering::Greater => StageReport { stage, status: StageStatus::NotReached, reason: None },
                    })
                    .collect();
                RecognizeReport {
                    status: "not-a-quotient".into(),
                    p: g.p(),
                    m: None,
                    d: None,
                    field: None,
                    kernel_basis: None,
                    stages,
                    details: None,
                }
            }
        }
    }

    pub fn failed_stage(&self) -> Option<Stage> {
        self.stages.iter().find(|s| s.status == StageStatus::Failed).map(|s| s.stage)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    /// Galois exponent.
    pub i: usize,
    /// Scalar in `K^x`, polynomial coefficients.
    pub c: Vec<u32>,
    pub f: Vec<Vec<u32>>,
    pub fhat: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub kind: String,
    pub isomorphic: bool,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoTestReport {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<NonIsoReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

impl IsoTestReport {
    pub fn new(v: &Verdict) -> Self {
        match v {
            Verdict::Isomorphic(w) => IsoTestReport {
                verdict: "isomorphic".into(),
                witness: Some(WitnessReport {
                    i: w.i,
                    c: w.c.clone(),
                    f: rows(&w.isomorphism.f),
                    fhat: rows(&w.isomorphism.fhat),
                }),
                transcript: None,
                oracle: None,
            },
            Verdict::NonIsomorphic(r) => IsoTestReport {
                verdict: "nonisomorphic".into(),
                witness: None,
                transcript: Some(r.clone()),
                oracle: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_file_round_trips() {
        let k = FieldCtx::new(3, 2).unwrap();
        let g = Class2Group::heisenberg(1, &k);
        let file = GroupFile::from_group(&g, Some(&k));
        let text = to_json(&file);
        let back: GroupFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_group().unwrap(), g);
        assert!(text.contains("\"dimV\": 4"));
    }

    #[test]
    fn bimap_file_round_trips() {
        let b = crate::bimap::standard_symplectic(1, &FieldCtx::new(5, 1).unwrap());
        let file = BimapFile::from_bimap(&b);
        let back: BimapFile = serde_json::from_str(&to_json(&file)).unwrap();
        assert_eq!(back.to_bimap().unwrap(), b);
        assert!(to_json(&file).contains("\"kind\": \"alternating\""));
    }

    #[test]
    fn kernel_over_another_modulus_is_refused() {
        let k = FieldCtx::new(3, 2).unwrap();
        let g = GroupFile::from_group(&Class2Group::heisenberg(1, &k), Some(&k));
        let other = FieldDescriptor { p: 3, d: 2, modulus: vec![2, 2, 1] };
        assert_ne!(other, k.descriptor());
        let kernel = KernelFile { field: Some(other), basis: vec![vec![1, 0]] };
        assert!(matches!(kernel.subspace_for(&g), Err(IoError::ContextMismatch { .. })));
        let corrupt = KernelFile { field: Some(FieldDescriptor { p: 3, d: 2, modulus: vec![1, 0, 1, 0] }), basis: vec![] };
        assert!(matches!(corrupt.subspace_for(&g), Err(IoError::Field(_))));
    }

    #[test]
    fn declared_dimensions_are_checked() {
        let mut file = GroupFile::from_group(&Class2Group::heisenberg(1, &FieldCtx::new(3, 1).unwrap()), None);
        file.dim_w = 2;
        assert!(file.to_group().is_err());
    }
}
