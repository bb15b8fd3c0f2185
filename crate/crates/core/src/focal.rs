//! Points on the focal submanifolds `M+` and `M-` with tangent/normal frames,
//! and the shape operators on both sides.
//!
//! `M+ = {x in S^{2l-1} : <P_a x, x> = 0 for all a}` and
//! `M- = {x in S^{2l-1} : Q x = x for some Q in the Clifford sphere}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordSystem;
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, orthonormal_complement, orthonormalize};

/// Maximum Gauss-Newton iterations for the projection onto `M+`.
pub const MAX_ITERATIONS: usize = 50;
/// Fresh starting vectors tried by the `M+` sampler before giving up.
pub const MAX_RESTARTS: usize = 3;
/// Target membership residual of emitted points.
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Residual a point must satisfy before frames are built for it.
pub const FRAME_PRECONDITION_TOL: f64 = 1e-10;
/// Base step of the finite-difference second fundamental form.
pub const FD_STEP: f64 = 1e-4;
/// Agreement demanded between the two `M-` shape operator paths.
pub const FD_AGREEMENT_TOL: f64 = 1e-4;
/// Threshold separating the eigenvalue buckets `{-1, 0, +1}`.
pub const BUCKET_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Side::Plus),
            "minus" | "-" => Ok(Side::Minus),
            other => Err(Error::Precondition(format!("unknown side '{other}'"))),
        }
    }
}

/// A certified point of a focal submanifold with orthonormal frames.
#[derive(Debug, Clone)]
pub struct FocalPoint {
    pub x: DVector<f64>,
    pub side: Side,
    /// Coefficients of `Q_0 = sum p_a P_a` with `Q_0 x = x` (minus side only).
    pub p: Option<DVector<f64>>,
    /// `Q_0, ..., Q_m`: an orthonormal change of basis of the system whose
    /// first element fixes `x` (minus side only).
    pub q: Vec<DMatrix<f64>>,
    /// Orthonormal normal frame as columns.
    pub normals: DMatrix<f64>,
    /// Orthonormal tangent frame as columns.
    pub tangent: DMatrix<f64>,
}

impl FocalPoint {
    pub fn tangent_dim(&self) -> usize {
        self.tangent.ncols()
    }

    pub fn normal_dim(&self) -> usize {
        self.normals.ncols()
    }

    /// `max |F^T F - I|` over the stacked frame `[x, normals, tangent]`.
    pub fn frame_residual(&self) -> f64 {
        let n = self.x.len();
        let k = 1 + self.normal_dim() + self.tangent_dim();
        let mut all = DMatrix::zeros(n, k);
        all.set_column(0, &self.x);
        all.columns_mut(1, self.normal_dim()).copy_from(&self.normals);
        all.columns_mut(1 + self.normal_dim(), self.tangent_dim()).copy_from(&self.tangent);
        linalg::orthonormality_residual(&all)
    }

    /// Same point with the tangent frame replaced by `tangent * r`.
    pub fn with_rotated_tangent(&self, r: &DMatrix<f64>) -> FocalPoint {
        let mut out = self.clone();
        out.tangent = &self.tangent * r;
        out
    }
}

/// Shape operators in the tangent frame of a focal point, one per normal.
#[derive(Debug, Clone)]
pub struct ShapeOperatorSet {
    pub side: Side,
    /// Multiplicities `(m1, m2)` of the family (not interchanged for `M-`).
    pub multiplicities: (usize, usize),
    pub mats: Vec<DMatrix<f64>>,
    pub tangent: DMatrix<f64>,
}

/// Multiplicities of the eigenvalues `+1, -1, 0` together with the largest
/// distance of any eigenvalue from its bucket centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBuckets {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
    pub deviation: f64,
}

pub fn spectrum_buckets(s: &DMatrix<f64>) -> SpectrumBuckets {
    let mut out = SpectrumBuckets { plus: 0, minus: 0, zero: 0, deviation: 0.0 };
    for v in linalg::sym_eigenvalues(s) {
        let centre = if v > BUCKET_THRESHOLD {
            out.plus += 1;
            1.0
        } else if v < -BUCKET_THRESHOLD {
            out.minus += 1;
            -1.0
        } else {
            out.zero += 1;
            0.0
        };
        out.deviation = out.deviation.max((v - centre).abs());
    }
    out
}

impl ShapeOperatorSet {
    /// Multiplicities `(m1, m2)` in the role they play on this side:
    /// interchanged on `M-`.
    pub fn effective_multiplicities(&self) -> (usize, usize) {
        match self.side {
            Side::Plus => self.multiplicities,
            Side::Minus => (self.multiplicities.1, self.multiplicities.0),
        }
    }

    /// Expected `(plus, minus, zero)` multiplicities of each spectrum.
    pub fn expected_buckets(&self) -> (usize, usize, usize) {
        let (a, b) = self.effective_multiplicities();
        (b, b, a)
    }

    /// Largest eigenvalue deviation from `{+1, -1, 0}`; errors if a bucket
    /// count differs from the expected multiplicities.
    pub fn spectrum_residual(&self) -> Result<f64> {
        let (ep, em, ez) = self.expected_buckets();
        let mut worst = 0.0_f64;
        for s in &self.mats {
            let b = spectrum_buckets(s);
            if (b.plus, b.minus, b.zero) != (ep, em, ez) {
                return Err(Error::Precondition(format!(
                    "spectrum multiplicities ({}, {}, {}) differ from expected ({ep}, {em}, {ez})",
                    b.plus, b.minus, b.zero
                )));
            }
            worst = worst.max(b.deviation);
        }
        Ok(worst)
    }

    /// `sum_a |S_a|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.mats.iter().map(linalg::fro_sq).sum()
    }

    /// `sum_a S_a^2`.
    pub fn square_sum(&self) -> DMatrix<f64> {
        let d = self.tangent.ncols();
        self.mats.iter().fold(DMatrix::zeros(d, d), |acc, s| acc + s * s)
    }

    /// Re-express the operators after rotating the normal frame by an
    /// orthogonal matrix `r`: `S'_b = sum_a r_{ab} S_a`.
    pub fn rotate_normals(&self, r: &DMatrix<f64>) -> ShapeOperatorSet {
        let d = self.tangent.ncols();
        let mats = (0..r.ncols())
            .map(|b| self.mats.iter().enumerate().fold(DMatrix::zeros(d, d), |acc, (a, s)| acc + s * r[(a, b)]))
            .collect();
        ShapeOperatorSet { mats, ..self.clone() }
    }
}

/// `(<P_0 x, x>, ..., <P_m x, x>)`.
pub fn clifford_coefficients(sys: &CliffordSystem, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(sys.m() + 1, sys.matrices().iter().map(|p| x.dot(&(p * x))))
}

/// `max_a |<P_a x, x>|` together with the deviation of `|x|` from 1.
pub fn mplus_residual(sys: &CliffordSystem, x: &DVector<f64>) -> f64 {
    let g = clifford_coefficients(sys, x);
    g.amax().max((x.norm() - 1.0).abs())
}

/// `|sum_a <P_a x, x>^2 - 1|` together with the deviation of `|x|` from 1.
pub fn mminus_residual(sys: &CliffordSystem, x: &DVector<f64>) -> f64 {
    let g = clifford_coefficients(sys, x);
    (g.norm_squared() - 1.0).abs().max((x.norm() - 1.0).abs())
}

/// Gauss-Newton projection onto `M+` followed by frame construction.
pub fn project_mplus(sys: &CliffordSystem, y: &DVector<f64>) -> Result<FocalPoint> {
    let norm = y.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Precondition("cannot project the zero vector onto M+".into()));
    }
    let mut x = y / norm;
    let mut residual = f64::INFINITY;
    for _ in 0..=MAX_ITERATIONS {
        let g = clifford_coefficients(sys, &x);
        residual = g.amax();
        if residual < MEMBERSHIP_TOL {
            return frames_mplus(sys, &x);
        }
        let mut step = DVector::zeros(x.len());
        for (a, p) in sys.matrices().iter().enumerate() {
            step += (p * &x) * g[a];
        }
        x -= step * (0.5 / x.norm_squared());
        let n = x.norm();
        if n < 1e-12 || !n.is_finite() {
            break;
        }
        x /= n;
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual })
}

/// Random point of `M+`: project Gaussian vectors, retrying on failure.
pub fn sample_mplus<R: Rng + ?Sized>(sys: &CliffordSystem, rng: &mut R) -> Result<FocalPoint> {
    let mut last = None;
    for _ in 0..=MAX_RESTARTS {
        let y = linalg::gaussian_vector(rng, sys.dim());
        match project_mplus(sys, &y) {
            Ok(fp) => return Ok(fp),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Frames at a point of `M+`: normals `P_a x`, tangent the orthogonal
/// complement of `{x, P_a x}`.
pub fn frames_mplus(sys: &CliffordSystem, x: &DVector<f64>) -> Result<FocalPoint> {
    let res = mplus_residual(sys, x);
    if res > FRAME_PRECONDITION_TOL {
        return Err(Error::NotOnFocal(res));
    }
    let n = sys.dim();
    let mut normals = DMatrix::zeros(n, sys.m() + 1);
    for (a, p) in sys.matrices().iter().enumerate() {
        normals.set_column(a, &(p * x));
    }
    let mut span = DMatrix::zeros(n, sys.m() + 2);
    span.set_column(0, x);
    span.columns_mut(1, sys.m() + 1).copy_from(&normals);
    let tangent = orthonormal_complement(&orthonormalize(&span, 1e-10));
    Ok(FocalPoint { x: x.clone(), side: Side::Plus, p: None, q: Vec::new(), normals, tangent })
}

fn combine(sys: &CliffordSystem, coeffs: &DVector<f64>) -> DMatrix<f64> {
    let n = sys.dim();
    sys.matrices().iter().zip(coeffs.iter()).fold(DMatrix::zeros(n, n), |acc, (p, c)| acc + p * *c)
}

/// Random point of `M-`: unit `p`, `Q_0 = sum p_a P_a`, unit `x` in `E+(Q_0)`.
pub fn sample_mminus<R: Rng + ?Sized>(sys: &CliffordSystem, rng: &mut R) -> Result<FocalPoint> {
    let p = linalg::random_unit(rng, sys.m() + 1);
    sample_mminus_with(sys, &p, rng)
}

/// Random point of `M-` fixed by the given Clifford sphere element.
pub fn sample_mminus_with<R: Rng + ?Sized>(sys: &CliffordSystem, p: &DVector<f64>, rng: &mut R) -> Result<FocalPoint> {
    if p.len() != sys.m() + 1 || (p.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition("p must be a unit vector with m + 1 entries".into()));
    }
    let p = p.normalize();
    let q0 = combine(sys, &p);
    loop {
        let y = linalg::gaussian_vector(rng, sys.dim());
        let v = (&y + &q0 * &y) * 0.5;
        let n = v.norm();
        if n > 1e-8 {
            return frames_mminus(sys, &(v / n), &p);
        }
    }
}

/// `normalize((I + Q(y)) y / 2)` with `Q(y) = sum p_a(y) P_a / |p(y)|`.
pub fn retract_mminus(sys: &CliffordSystem, y: &DVector<f64>) -> Result<DVector<f64>> {
    let g = clifford_coefficients(sys, y);
    let norm = g.norm();
    if norm < 1e-10 {
        return Err(Error::RetractionUndefined { norm });
    }
    let mut v = y.clone();
    for (a, pa) in sys.matrices().iter().enumerate() {
        v += (pa * y) * (g[a] / norm);
    }
    let vn = v.norm();
    if vn < 1e-14 {
        return Err(Error::RetractionUndefined { norm: vn });
    }
    Ok(v / vn)
}

/// Retraction followed by frame construction.
pub fn retract_mminus_point(sys: &CliffordSystem, y: &DVector<f64>) -> Result<FocalPoint> {
    let x = retract_mminus(sys, y)?;
    let p = clifford_coefficients(sys, &x).normalize();
    frames_mminus(sys, &x, &p)
}

/// Frames at a point of `M-` fixed by `Q_0 = sum p_a P_a`.
///
/// `Q_1, ..., Q_m` come from an orthonormal completion of `p`; the normal
/// space is `E-(Q_0)` minus `span{Q_i x}`, and the tangent space is
/// `span{Q_i x}` plus `E+(Q_0)` minus `x`.
pub fn frames_mminus(sys: &CliffordSystem, x: &DVector<f64>, p: &DVector<f64>) -> Result<FocalPoint> {
    let res = mminus_residual(sys, x);
    if res > FRAME_PRECONDITION_TOL {
        return Err(Error::NotOnFocal(res));
    }
    let m = sys.m();
    let n = sys.dim();
    let pcol = DMatrix::from_column_slice(m + 1, 1, p.as_slice());
    let comp = orthonormal_complement(&pcol);
    let mut q = vec![combine(sys, p)];
    for i in 0..m {
        q.push(combine(sys, &comp.column(i).into_owned()));
    }
    let fix = (&q[0] * x - x).amax();
    if fix > FRAME_PRECONDITION_TOL {
        return Err(Error::NotOnFocal(fix));
    }

    let minus = linalg::involution_eigenspace(&q[0], -1.0);
    let mut qx = DMatrix::zeros(n, m);
    for i in 0..m {
        qx.set_column(i, &(&q[i + 1] * x));
    }
    // project E-(Q_0) off span{Q_i x}
    let proj = &minus - &qx * (qx.transpose() * &minus);
    let normals = orthonormalize(&proj, 1e-8);
    if normals.ncols() != sys.l() - m {
        return Err(Error::ConstructionFailure(format!(
            "normal space of M- has dimension {}, expected {}",
            normals.ncols(),
            sys.l() - m
        )));
    }
    let mut span = DMatrix::zeros(n, 1 + normals.ncols());
    span.set_column(0, x);
    span.columns_mut(1, normals.ncols()).copy_from(&normals);
    let tangent = orthonormal_complement(&span);
    Ok(FocalPoint { x: x.clone(), side: Side::Minus, p: Some(p.clone()), q, normals, tangent })
}

/// Shape operators on `M+`: `S_a = -T^T P_a T` for normals `P_a x`.
pub fn shape_ops_mplus(sys: &CliffordSystem, fp: &FocalPoint) -> Result<ShapeOperatorSet> {
    if fp.side != Side::Plus {
        return Err(Error::Precondition("shape_ops_mplus needs a point of M+".into()));
    }
    let t = &fp.tangent;
    let mats = sys.matrices().iter().map(|p| linalg::symmetrize(&-(t.transpose() * p * t))).collect();
    Ok(ShapeOperatorSet { side: Side::Plus, multiplicities: sys.multiplicities(), mats, tangent: t.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeMethod {
    Algebraic,
    FiniteDifference,
}

/// Shape operators on `M-` along each normal of the frame.
pub fn shape_ops_mminus(sys: &CliffordSystem, fp: &FocalPoint, method: ShapeMethod) -> Result<ShapeOperatorSet> {
    if fp.side != Side::Minus || fp.q.len() != sys.m() + 1 {
        return Err(Error::Precondition("shape_ops_mminus needs a point of M- with its Q frame".into()));
    }
    let mats = match method {
        ShapeMethod::Algebraic => algebraic_mminus(fp),
        ShapeMethod::FiniteDifference => fd_mminus(sys, fp)?,
    };
    Ok(ShapeOperatorSet { side: Side::Minus, multiplicities: sys.multiplicities(), mats, tangent: fp.tangent.clone() })
}

/// `S_N = sum_i (a_i b_i^T + b_i a_i^T)` with `a_i = Q_i x`, `b_i = Q_i N`.
fn algebraic_mminus(fp: &FocalPoint) -> Vec<DMatrix<f64>> {
    let t = &fp.tangent;
    let m = fp.q.len() - 1;
    let at: Vec<DVector<f64>> = (1..=m).map(|i| t.transpose() * (&fp.q[i] * &fp.x)).collect();
    fp.normals
        .column_iter()
        .map(|nrm| {
            let d = t.ncols();
            let mut s = DMatrix::zeros(d, d);
            for i in 1..=m {
                let b = t.transpose() * (&fp.q[i] * nrm);
                let a = &at[i - 1];
                s += a * b.transpose() + &b * a.transpose();
            }
            s
        })
        .collect()
}

/// Central second difference of `t -> retract(x + t v)`.
fn second_difference(sys: &CliffordSystem, x: &DVector<f64>, v: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let fwd = retract_mminus(sys, &(x + v * h))?;
    let bwd = retract_mminus(sys, &(x - v * h))?;
    Ok((fwd + bwd - x * 2.0) / (h * h))
}

/// Richardson-extrapolated second derivative from steps `h` and `h/2`.
fn second_derivative(sys: &CliffordSystem, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let coarse = second_difference(sys, x, v, FD_STEP)?;
    let fine = second_difference(sys, x, v, FD_STEP / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Second fundamental form by finite differences of the exact retraction,
/// polarized as `II(X, Y) = (II(X+Y) - II(X) - II(Y)) / 2`.
fn fd_mminus(sys: &CliffordSystem, fp: &FocalPoint) -> Result<Vec<DMatrix<f64>>> {
    let t = &fp.tangent;
    let d = t.ncols();
    let k = fp.normals.ncols();
    let x = retract_mminus(sys, &fp.x)?;
    let nt = fp.normals.transpose();
    let cols: Vec<DVector<f64>> = (0..d).map(|i| t.column(i).into_owned()).collect();
    let mut diag = Vec::with_capacity(d);
    for c in &cols {
        diag.push(&nt * second_derivative(sys, &x, c)?);
    }
    let mut mats = vec![DMatrix::zeros(d, d); k];
    for i in 0..d {
        for a in 0..k {
            mats[a][(i, i)] = diag[i][a];
        }
        for j in i + 1..d {
            let both = &nt * second_derivative(sys, &x, &(&cols[i] + &cols[j]))?;
            for a in 0..k {
                let v = 0.5 * (both[a] - diag[i][a] - diag[j][a]);
                mats[a][(i, j)] = v;
                mats[a][(j, i)] = v;
            }
        }
    }
    Ok(mats)
}

/// Compute both `M-` paths, returning the algebraic set and the largest
/// entrywise difference; fails when they disagree beyond `FD_AGREEMENT_TOL`.
pub fn cross_check_mminus(sys: &CliffordSystem, fp: &FocalPoint) -> Result<(ShapeOperatorSet, f64)> {
    let alg = shape_ops_mminus(sys, fp, ShapeMethod::Algebraic)?;
    let fd = shape_ops_mminus(sys, fp, ShapeMethod::FiniteDifference)?;
    let diff = alg.mats.iter().zip(&fd.mats).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max);
    if diff > FD_AGREEMENT_TOL {
        let spec = |s: &ShapeOperatorSet| -> Vec<f64> { linalg::sym_eigenvalues(&s.mats[0]) };
        return Err(Error::FiniteDifference(format!(
            "algebraic and finite-difference shape operators differ by {diff:e}; first spectra {:?} vs {:?}",
            spec(&alg),
            spec(&fd)
        )));
    }
    Ok((alg, diff))
}

/// `E+(Q_0)` minus `span{x, Q_1 N, ..., Q_m N}`: the kernel of `S_N` on `M-`.
pub fn mminus_kernel(fp: &FocalPoint, normal: &DVector<f64>) -> DMatrix<f64> {
    let m = fp.q.len() - 1;
    let plus = linalg::involution_eigenspace(&fp.q[0], 1.0);
    let mut span = DMatrix::zeros(fp.x.len(), m + 1);
    span.set_column(0, &fp.x);
    for i in 1..=m {
        span.set_column(i, &(&fp.q[i] * normal));
    }
    let w = orthonormalize(&span, 1e-10);
    orthonormalize(&(&plus - &w * (w.transpose() * &plus)), 1e-8)
}

/// Kernel of a tangent-frame operator, lifted to ambient coordinates.
pub fn ambient_kernel(s: &DMatrix<f64>, tangent: &DMatrix<f64>) -> DMatrix<f64> {
    tangent * linalg::symmetric_kernel(s, BUCKET_THRESHOLD)
}
