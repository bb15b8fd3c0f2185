//! Normal scalar curvature, its bounds, the block decomposition of shape
//! operators, Ricci curvature, and the pointwise equality predicates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordSystem;
use crate::error::{Error, Result};
use crate::focal::{self, FocalPoint, ShapeMethod, ShapeOperatorSet, Side};
use crate::linalg::{self, commutator, fro_sq, max_abs};

/// Default relative predicate tolerance for exactly computed operators.
pub const PREDICATE_TOL: f64 = 1e-6;
/// Default predicate tolerance for finite-difference operators.
pub const FD_PREDICATE_TOL: f64 = 1e-4;
/// Eigenvalues of `S_0` in this band cannot be bucketed.
pub const AMBIGUOUS_BAND: (f64, f64) = (0.4, 0.6);

/// `sum_{a,b} |[S_a, S_b]|^2` over ordered pairs.
pub fn rho_perp(s: &ShapeOperatorSet) -> f64 {
    let mut total = 0.0;
    for a in 0..s.mats.len() {
        for b in a + 1..s.mats.len() {
            total += 2.0 * fro_sq(&commutator(&s.mats[a], &s.mats[b]));
        }
    }
    total
}

/// `6 |sum S_a^2|^2 - 4 b (a + 1)(a + 3)` with the side's effective
/// multiplicities `(a, b)`.
pub fn rho_perp_identity(s: &ShapeOperatorSet) -> f64 {
    let (a, b) = s.effective_multiplicities();
    let (a, b) = (a as f64, b as f64);
    6.0 * fro_sq(&s.square_sum()) - 4.0 * b * (a + 1.0) * (a + 3.0)
}

/// `sum_{a != b} |[S_a, S_b]|^2` for each fixed `b`.
pub fn pairwise_sums(s: &ShapeOperatorSet) -> Vec<f64> {
    (0..s.mats.len())
        .map(|b| (0..s.mats.len()).filter(|&a| a != b).map(|a| fro_sq(&commutator(&s.mats[a], &s.mats[b]))).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub refined_lower: f64,
    pub ddvv: f64,
}

/// Closed-form bounds for multiplicities `(m1, m2)`; pass them interchanged
/// for `M-`.
pub fn bounds(m1: usize, m2: usize) -> Bounds {
    let (a, b) = (m1 as f64, m2 as f64);
    let lower = 2.0 * a * b * (a + 1.0);
    Bounds {
        lower,
        upper: 8.0 * a * b * (a + 1.0),
        refined_lower: lower + 6.0 * a * b * (a + 1.0) / (2.0 * b + a) * (2.0 * b - a - 2.0),
        ddvv: 4.0 * b * b * (a + 1.0) * (a + 1.0),
    }
}

/// Squared norms of the off-diagonal blocks of one `S_a` in the eigenbasis
/// `(V+, V-, V0)` of `S_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockNorms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    /// Norms for `S_1, ..., S_k`.
    pub norms: Vec<BlockNorms>,
    /// Largest entry of the diagonal blocks that should vanish.
    pub diagonal_residual: f64,
    /// `A_a`, `B_a`, `C_a` themselves.
    pub blocks: Vec<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)>,
}

/// Express every `S_a` (a >= 1) in the eigenbasis of `S_0`.
pub fn block_decompose(s: &ShapeOperatorSet) -> Result<BlockDecomposition> {
    let (vals, vecs) = linalg::sym_eigen(&s.mats[0]);
    let mut groups: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (i, v) in vals.iter().enumerate() {
        let av = v.abs();
        if av > AMBIGUOUS_BAND.0 && av < AMBIGUOUS_BAND.1 {
            return Err(Error::Bucketing(*v));
        }
        let g = if *v > AMBIGUOUS_BAND.1 {
            0
        } else if *v < -AMBIGUOUS_BAND.1 {
            1
        } else {
            2
        };
        groups[g].push(i);
    }
    let basis = |idx: &[usize]| {
        let mut out = DMatrix::zeros(vecs.nrows(), idx.len());
        for (j, &i) in idx.iter().enumerate() {
            out.set_column(j, &vecs.column(i));
        }
        out
    };
    let (vp, vm, v0) = (basis(&groups[0]), basis(&groups[1]), basis(&groups[2]));
    let mut norms = Vec::new();
    let mut blocks = Vec::new();
    let mut diagonal_residual = 0.0_f64;
    for sa in &s.mats[1..] {
        let a = vp.transpose() * sa * &vm;
        let b = vp.transpose() * sa * &v0;
        let c = vm.transpose() * sa * &v0;
        for (u, w) in [(&vp, &vp), (&vm, &vm), (&v0, &v0)] {
            if u.ncols() > 0 {
                diagonal_residual = diagonal_residual.max(max_abs(&(u.transpose() * sa * w)));
            }
        }
        norms.push(BlockNorms { a: fro_sq(&a), b: fro_sq(&b), c: fro_sq(&c) });
        blocks.push((a, b, c));
    }
    Ok(BlockDecomposition { norms, diagonal_residual, blocks })
}

/// Ricci curvature `(dim - 1)|X|^2 - <sum S_a^2 X, X>` for `X` in tangent
/// coordinates.
pub fn ricci(s: &ShapeOperatorSet, x: &DVector<f64>) -> f64 {
    let d = s.tangent.ncols() as f64;
    (d - 1.0) * x.norm_squared() - x.dot(&(s.square_sum() * x))
}

/// The Ricci operator `(dim - 1) I - sum S_a^2` in the tangent frame.
pub fn ricci_operator(s: &ShapeOperatorSet) -> DMatrix<f64> {
    let d = s.tangent.ncols();
    DMatrix::identity(d, d) * (d as f64 - 1.0) - s.square_sum()
}

/// Closed form on `M+`: `2(l - m - 2)|X|^2 + 2 sum_{a<b} <X, P_a P_b x>^2` for
/// an ambient tangent vector `X`.
pub fn ricci_closed_form(sys: &CliffordSystem, fp: &FocalPoint, x_ambient: &DVector<f64>) -> f64 {
    let mats = sys.matrices();
    let mut sum = 0.0;
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            let v = &mats[a] * (&mats[b] * &fp.x);
            sum += x_ambient.dot(&v).powi(2);
        }
    }
    2.0 * (sys.l() as f64 - sys.m() as f64 - 2.0) * x_ambient.norm_squared() + 2.0 * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureRecord {
    pub side: Side,
    pub rho_perp: f64,
    pub rho_perp_identity: f64,
    pub bounds: Bounds,
    pub block_norms: Vec<BlockNorms>,
    pub block_diagonal_residual: f64,
    pub einstein_residual: f64,
    pub kernel_angle: f64,
    pub cond_a: Verdict,
    pub cond_p: Verdict,
    pub cond_e: Verdict,
}

impl CurvatureRecord {
    /// Distance from the upper bound.
    pub fn upper_gap(&self) -> f64 {
        self.bounds.upper - self.rho_perp
    }

    pub fn lower_gap(&self) -> f64 {
        self.rho_perp - self.bounds.lower
    }
}

/// `|sum S_a^2 - c I|_F` with `c` the trace mean.
pub fn einstein_residual(s: &ShapeOperatorSet) -> f64 {
    let q = s.square_sum();
    let d = q.nrows();
    let c = q.trace() / d as f64;
    fro_sq(&(q - DMatrix::identity(d, d) * c)).sqrt()
}

/// Largest principal angle between `ker S_a` and `ker S_0`.
pub fn kernel_angle(s: &ShapeOperatorSet) -> f64 {
    let k0 = linalg::symmetric_kernel(&s.mats[0], focal::BUCKET_THRESHOLD);
    s.mats[1..]
        .iter()
        .map(|sa| linalg::max_principal_angle(&k0, &linalg::symmetric_kernel(sa, focal::BUCKET_THRESHOLD)))
        .fold(0.0, f64::max)
}

/// Curvature record and equality predicates from a set of shape operators.
pub fn classify_shapes(s: &ShapeOperatorSet, tol: f64) -> Result<CurvatureRecord> {
    let (a, b) = s.effective_multiplicities();
    let bd = bounds(a, b);
    let rho = rho_perp(s);
    let blocks = block_decompose(s)?;
    let angle = kernel_angle(s);
    let bc = blocks.norms.iter().map(|n| (n.b + n.c).sqrt()).fold(0.0, f64::max);
    let structural = tol.max(1e-6);

    let upper_res = (rho - bd.upper).abs() / bd.upper;
    let cond_a = Verdict {
        holds: upper_res < tol && angle < structural && bc < structural,
        residual: upper_res.max(angle).max(bc),
    };
    let lower_res = (rho - bd.lower).abs() / bd.lower;
    let cond_p = Verdict { holds: lower_res < tol, residual: lower_res };
    let e = einstein_residual(s);
    let cond_e = Verdict { holds: e < tol, residual: e };

    Ok(CurvatureRecord {
        side: s.side,
        rho_perp: rho,
        rho_perp_identity: rho_perp_identity(s),
        bounds: bd,
        block_norms: blocks.norms,
        block_diagonal_residual: blocks.diagonal_residual,
        einstein_residual: e,
        kernel_angle: angle,
        cond_a,
        cond_p,
        cond_e,
    })
}

/// Shape operators at `fp` by the side's default path: exact on `M+`, the
/// algebraic form on `M-`.
pub fn shape_operators(sys: &CliffordSystem, fp: &FocalPoint) -> Result<ShapeOperatorSet> {
    match fp.side {
        Side::Plus => focal::shape_ops_mplus(sys, fp),
        Side::Minus => focal::shape_ops_mminus(sys, fp, ShapeMethod::Algebraic),
    }
}

pub fn classify(sys: &CliffordSystem, fp: &FocalPoint, tol: f64) -> Result<CurvatureRecord> {
    classify_shapes(&shape_operators(sys, fp)?, tol)
}
