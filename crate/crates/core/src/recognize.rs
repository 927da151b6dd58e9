//! Deciding whether a class-2 group is a quotient of a generalized
//! Heisenberg group, and computing its minimal cover `H_m(K)`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::adjoint::{k_structure, InvolutionType, KStructureError};
use crate::ff::{FieldCtx, Fp};
use crate::group::{apply_isomorphism, CheckedIsomorphism, Class2Group};
use crate::linalg::{Mat, Subspace};

/// Pipeline stages, in order. A failed recognition names the first stage
/// whose certificate could not be produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stage {
    #[serde(rename = "shape certification")]
    ShapeCertification,
    #[serde(rename = "degeneracy")]
    Degeneracy,
    #[serde(rename = "reducibility")]
    Reducibility,
    #[serde(rename = "center field")]
    CenterField,
    #[serde(rename = "involution type")]
    InvolutionType,
    #[serde(rename = "tensor form")]
    TensorForm,
    #[serde(rename = "verification")]
    Verification,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::ShapeCertification,
        Stage::Degeneracy,
        Stage::Reducibility,
        Stage::CenterField,
        Stage::InvolutionType,
        Stage::TensorForm,
        Stage::Verification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::ShapeCertification => "shape certification",
            Stage::Degeneracy => "degeneracy",
            Stage::Reducibility => "reducibility",
            Stage::CenterField => "center field",
            Stage::InvolutionType => "involution type",
            Stage::TensorForm => "tensor form",
            Stage::Verification => "verification",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not a quotient of a generalized Heisenberg group (stage {stage}): {reason}")]
pub struct NotAQuotient {
    pub stage: Stage,
    pub reason: String,
}

/// `G = H_m(K) / (0 x M)`, with the isomorphism made explicit.
#[derive(Clone, Debug)]
pub struct QuotientDescriptor {
    pub field: FieldCtx,
    pub m: usize,
    /// Kernel inside `K`, as a `Z/p`-subspace of coefficient vectors.
    pub kernel: Subspace<Fp>,
    /// `2md x dim V`: flattened `K^{2m}` onto `V`.
    pub phi: Mat<Fp>,
    /// `d x dim W`: `K` onto `W` with kernel `M`.
    pub psi: Mat<Fp>,
    /// The verified isomorphism `H_m(K)/M -> G`.
    pub isomorphism: CheckedIsomorphism,
    pub adjoint_dim: usize,
    pub tensor_dim: usize,
    pub involution: InvolutionType,
}

impl QuotientDescriptor {
    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn d(&self) -> usize {
        self.field.d()
    }

    /// The minimal cover `H_m(K)`.
    pub fn floor(&self) -> Class2Group {
        Class2Group::heisenberg(self.m, &self.field)
    }

    /// Whether the floor is `H_m(GF(p^d))`.
    pub fn is_floor(&self, m: usize, p: u32, d: usize) -> bool {
        self.m == m && self.p() == p && self.d() == d
    }
}

/// Rows of the complement basis of `m`, times the inverse of their images:
/// a `dim W x d` matrix `S` with `w psi S - w` in `M` for all `w`.
pub fn kernel_section(kernel: &Subspace<Fp>, psi: &Mat<Fp>) -> Mat<Fp> {
    let f = *psi.field();
    let c = Mat::from_rows_with_cols(f, kernel.ambient(), &kernel.complement_basis()).expect("shape");
    let cpsi = c.mul(psi).expect("shape");
    cpsi.inverse().expect("psi is injective on a complement of its kernel").mul(&c).expect("shape")
}

fn stage_of(err: &KStructureError) -> Stage {
    match err {
        KStructureError::Degeneracy(_) => Stage::Degeneracy,
        KStructureError::Reducibility(_) => Stage::Reducibility,
        KStructureError::CenterField(_) => Stage::CenterField,
        KStructureError::InvolutionType(_) => Stage::InvolutionType,
        KStructureError::TensorForm(_) => Stage::TensorForm,
    }
}

pub fn recognize(g: &Class2Group) -> Result<QuotientDescriptor, NotAQuotient> {
    recognize_with_seed(g, 0)
}

pub fn recognize_with_seed(g: &Class2Group, seed: u64) -> Result<QuotientDescriptor, NotAQuotient> {
    let fail = |stage: Stage, reason: String| NotAQuotient { stage, reason };
    let b = g
        .extract_bimap()
        .map_err(|e| fail(Stage::ShapeCertification, e.to_string()))?;
    // Certified groups have Bi(G) in the presentation's own coordinates.
    debug_assert_eq!(&b, g.bimap());
    let ks = k_structure(&b, seed).map_err(|e| fail(stage_of(&e), e.to_string()))?;
    let f = g.field();
    let kernel_vecs = ks.psi.left_kernel();
    let kernel = Subspace::span(f, ks.field.d(), &kernel_vecs).expect("shape");
    if kernel.dim() + g.dim_w() != ks.field.d() {
        return Err(fail(Stage::Verification, "projection K -> W is not surjective".into()));
    }
    let cover = Class2Group::heisenberg(ks.m, &ks.field);
    let quotient = cover
        .quotient_group(&kernel)
        .map_err(|e| fail(Stage::Verification, e.to_string()))?;
    let complement = Mat::from_rows_with_cols(f, kernel.ambient(), &kernel.complement_basis()).expect("shape");
    let fhat = complement.mul(&ks.psi).expect("shape");
    let isomorphism = apply_isomorphism(&quotient, g, &ks.phi, &fhat, None)
        .map_err(|e| fail(Stage::Verification, e.to_string()))?;
    Ok(QuotientDescriptor {
        field: ks.field,
        m: ks.m,
        kernel,
        phi: ks.phi,
        psi: ks.psi,
        isomorphism,
        adjoint_dim: ks.adjoint_dim,
        tensor_dim: ks.tensor_dim,
        involution: ks.involution,
    })
}

/// `G` is indigenous to `H_m(GF(p^d))` when its floor is that group.
pub fn is_indigenous(desc: &QuotientDescriptor, m: usize, p: u32, d: usize) -> bool {
    desc.is_floor(m, p, d)
}
