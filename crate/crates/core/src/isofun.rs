//! The function `h(x) = <Px, x>`, `P = P_0 ... P_8`, on `M-` of the indefinite
//! `(8,7)` system and of its dual definite system: gradient and Laplacian
//! identities, Hessian spectra, and the principal curvatures of its level sets.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{self, CliffordSystem};
use crate::curvature::{self, PREDICATE_TOL};
use crate::error::{Error, Result};
use crate::focal::{self, FocalPoint, Side};
use crate::linalg::{self, max_abs};
use crate::loci;

/// Dimension of `M-` in the `(8,7)` family.
pub const TANGENT_DIM: usize = 23;
/// Points with `|h| >= 1 - FOCAL_GAP` are treated as focal for `h`.
pub const FOCAL_GAP: f64 = 1e-8;
/// Largest move along the gradient in one level-search step.
pub const LEVEL_STEP: f64 = 0.05;
/// Target accuracy of the level search.
pub const LEVEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// `M-` of the indefinite system.
    Indefinite,
    /// `M-` of the dual definite system.
    Definite,
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indefinite" | "i" => Ok(Domain::Indefinite),
            "definite" | "d" => Ok(Domain::Definite),
            other => Err(Error::Precondition(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IsoFunContext {
    /// The indefinite system `P_0, ..., P_8`.
    pub sys: CliffordSystem,
    /// Its dual `P_a P`, a definite system.
    pub dual: CliffordSystem,
    /// `P = P_0 ... P_8`.
    pub p: DMatrix<f64>,
    /// Extension of the indefinite system.
    pub p9: DMatrix<f64>,
    pub domain: Domain,
}

impl IsoFunContext {
    pub fn new(domain: Domain) -> Result<Self> {
        let sys = clifford::build_indefinite_m8();
        Self::from_system(sys, domain)
    }

    /// Context for a given indefinite `m = 8` system on `R^32`.
    pub fn from_system(sys: CliffordSystem, domain: Domain) -> Result<Self> {
        if sys.m() != 8 || sys.dim() != 32 || sys.definiteness() != clifford::Definiteness::Indefinite {
            return Err(Error::Precondition("the function h is defined for the indefinite (8,7) system only".into()));
        }
        let p = sys.product_matrix();
        let n = p.nrows();
        let inv = max_abs(&(&p * &p - DMatrix::identity(n, n)));
        let sym = max_abs(&(&p - p.transpose()));
        if inv > clifford::INVOLUTION_TOL || sym > clifford::INVOLUTION_TOL || p.trace().abs() > 1e-9 {
            return Err(Error::Precondition("P must be a symmetric traceless involution".into()));
        }
        let dual = clifford::dualize(&sys)?;
        let p9 = clifford::extend_by_one(&sys)?;
        Ok(IsoFunContext { sys, dual, p, p9, domain })
    }

    /// The system whose `M-` is the domain of `h`.
    pub fn domain_system(&self) -> &CliffordSystem {
        match self.domain {
            Domain::Indefinite => &self.sys,
            Domain::Definite => &self.dual,
        }
    }

    /// The other system: its `M+` is the zero level of `h`.
    pub fn partner_system(&self) -> &CliffordSystem {
        match self.domain {
            Domain::Indefinite => &self.dual,
            Domain::Definite => &self.sys,
        }
    }

    pub fn with_domain(&self, domain: Domain) -> IsoFunContext {
        IsoFunContext { domain, ..self.clone() }
    }

    fn check_point(&self, fp: &FocalPoint) -> Result<()> {
        if fp.side != Side::Minus {
            return Err(Error::Precondition("h lives on M-".into()));
        }
        let res = focal::mminus_residual(self.domain_system(), &fp.x);
        if res > focal::FRAME_PRECONDITION_TOL {
            return Err(Error::NotOnFocal(res));
        }
        if fp.tangent_dim() != TANGENT_DIM {
            return Err(Error::Precondition(format!("expected a {TANGENT_DIM}-dimensional tangent frame")));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FocalPoint> {
        focal::sample_mminus(self.domain_system(), rng)
    }

    pub fn retract(&self, y: &DVector<f64>) -> Result<FocalPoint> {
        focal::retract_mminus_point(self.domain_system(), y)
    }
}

pub fn h_value(ctx: &IsoFunContext, x: &DVector<f64>) -> f64 {
    x.dot(&(&ctx.p * x))
}

/// `grad h = 2(Px - h x)`.
pub fn h_gradient(ctx: &IsoFunContext, fp: &FocalPoint) -> Result<DVector<f64>> {
    ctx.check_point(fp)?;
    let h = h_value(ctx, &fp.x);
    Ok((&ctx.p * &fp.x - &fp.x * h) * 2.0)
}

/// Largest component of the gradient along `x` and the normals.
pub fn gradient_normal_residual(ctx: &IsoFunContext, fp: &FocalPoint) -> Result<f64> {
    let g = h_gradient(ctx, fp)?;
    Ok((fp.normals.transpose() * &g).amax().max(g.dot(&fp.x).abs()))
}

/// `2(sum_i <P e_i, e_i> - 23 h)` over the tangent frame.
pub fn h_laplacian(ctx: &IsoFunContext, fp: &FocalPoint) -> Result<f64> {
    ctx.check_point(fp)?;
    let h = h_value(ctx, &fp.x);
    let t = &fp.tangent;
    let tr = (t.transpose() * &ctx.p * t).trace();
    Ok(2.0 * (tr - TANGENT_DIM as f64 * h))
}

/// `sum_a <P N_a, N_a>` over the normals.
pub fn normal_trace(ctx: &IsoFunContext, fp: &FocalPoint) -> f64 {
    (fp.normals.transpose() * &ctx.p * &fp.normals).trace()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HessianRecord {
    pub h: f64,
    pub gradient_norm_sq: f64,
    pub laplacian: f64,
    /// Eigenvalues of the tangent block of `P`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest distance to the pattern `{h x8, -h x1, +1 x7, -1 x7}`.
    pub pattern_residual: f64,
    /// `|B^T B - (1 - h^2) I|` for the tangent-normal block `B` of `P`.
    pub coupling_residual: f64,
    /// `|N^T P N + h I|`.
    pub normal_block_residual: f64,
    /// `|trace - 7h|` of the tangent block.
    pub trace_residual: f64,
    /// `|P_T g + h g| / |g|` for the gradient `g`.
    pub gradient_eigen_residual: f64,
}

/// Expected ascending eigenvalues of the tangent block of `P` at level `h`.
pub fn expected_pattern(h: f64) -> Vec<f64> {
    let mut v: Vec<f64> = std::iter::repeat_n(h, 8)
        .chain(std::iter::once(-h))
        .chain(std::iter::repeat_n(1.0, 7))
        .chain(std::iter::repeat_n(-1.0, 7))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn hess_spectrum(ctx: &IsoFunContext, fp: &FocalPoint) -> Result<HessianRecord> {
    ctx.check_point(fp)?;
    let h = h_value(ctx, &fp.x);
    if h.abs() >= 1.0 - FOCAL_GAP {
        return Err(Error::FocalPointOfFunction(format!("h = {h}")));
    }
    let t = &fp.tangent;
    let n = &fp.normals;
    let p_top = linalg::symmetrize(&(t.transpose() * &ctx.p * t));
    let eigenvalues = linalg::sym_eigenvalues(&p_top);
    let coupling = t.transpose() * &ctx.p * n;
    let k = n.ncols();
    let coupling_residual = max_abs(&(coupling.transpose() * &coupling - DMatrix::identity(k, k) * (1.0 - h * h)));
    let normal_block_residual = max_abs(&(n.transpose() * &ctx.p * n + DMatrix::identity(k, k) * h));
    let grad = h_gradient(ctx, fp)?;
    let gt = t.transpose() * &grad;
    let gradient_eigen_residual = (&p_top * &gt + &gt * h).norm() / gt.norm();
    Ok(HessianRecord {
        h,
        gradient_norm_sq: grad.norm_squared(),
        laplacian: h_laplacian(ctx, fp)?,
        pattern_residual: max_diff(&eigenvalues, &expected_pattern(h)),
        trace_residual: (p_top.trace() - 7.0 * h).abs(),
        eigenvalues,
        coupling_residual,
        normal_block_residual,
        gradient_eigen_residual,
    })
}

/// Principal curvatures of the level set of `h` through `fp` inside `M-`,
/// with respect to the unit normal `grad h / |grad h|`, ascending.
pub fn level_set_shape(ctx: &IsoFunContext, fp: &FocalPoint) -> Result<Vec<f64>> {
    ctx.check_point(fp)?;
    let h = h_value(ctx, &fp.x);
    let grad = h_gradient(ctx, fp)?;
    let gn = grad.norm();
    if gn < 1e-8 {
        return Err(Error::FocalPointOfFunction(format!("|grad h| = {gn:e}")));
    }
    let t = &fp.tangent;
    let g = t.transpose() * &grad / gn;
    let d = t.ncols();
    let gcol = DMatrix::from_column_slice(d, 1, g.as_slice());
    let w = linalg::orthonormal_complement(&gcol);
    let hess = (t.transpose() * &ctx.p * t - DMatrix::identity(d, d) * h) * 2.0;
    let shape = linalg::symmetrize(&(w.transpose() * hess * &w)) * (-1.0 / gn);
    Ok(linalg::sym_eigenvalues(&shape))
}

/// Expected principal curvatures of the level set `h = c`, ascending.
pub fn expected_level_curvatures(c: f64) -> Vec<f64> {
    let s = (1.0 - c * c).sqrt();
    let mut v: Vec<f64> = std::iter::repeat_n(0.0, 8)
        .chain(std::iter::repeat_n(-(1.0 - c) / s, 7))
        .chain(std::iter::repeat_n((1.0 + c) / s, 7))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Pair the `i`-th smallest with the `i`-th largest eigenvalue and return the
/// largest `|l_i + l_{n-1-i}|` together with the number of near-zero values.
pub fn austerity(eigenvalues: &[f64]) -> (f64, usize) {
    let mut v = eigenvalues.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let pairing = (0..n / 2).map(|i| (v[i] + v[n - 1 - i]).abs()).fold(0.0, f64::max);
    let kernel = v.iter().filter(|x| x.abs() < focal::BUCKET_THRESHOLD).count();
    (pairing, kernel)
}

/// Walk from `start` along the normalized gradient, retracting after each
/// step, until `|h - c| < LEVEL_TOL`. Steps are capped at `LEVEL_STEP`.
pub fn move_to_level(ctx: &IsoFunContext, start: &FocalPoint, c: f64) -> Result<FocalPoint> {
    const MAX_STEPS: usize = 400;
    if c.abs() >= 1.0 - FOCAL_GAP {
        return Err(Error::FocalPointOfFunction(format!("level {c} is focal")));
    }
    let mut fp = start.clone();
    let mut h = h_value(ctx, &fp.x);
    for _ in 0..MAX_STEPS {
        if (h - c).abs() < LEVEL_TOL {
            return Ok(fp);
        }
        let grad = h_gradient(ctx, &fp)?;
        let gn = grad.norm();
        if gn < 1e-8 {
            return Err(Error::FocalPointOfFunction(format!("|grad h| = {gn:e} while searching level {c}")));
        }
        let step = ((c - h) / gn).clamp(-LEVEL_STEP, LEVEL_STEP);
        fp = ctx.retract(&(&fp.x + grad * (step / gn)))?;
        h = h_value(ctx, &fp.x);
    }
    Err(Error::NonConvergence { iterations: MAX_STEPS, residual: (h - c).abs() })
}

pub fn sample_level<R: Rng + ?Sized>(ctx: &IsoFunContext, c: f64, rng: &mut R) -> Result<FocalPoint> {
    let start = ctx.sample(rng)?;
    move_to_level(ctx, &start, c)
}

/// Laplacian by finite differences along retraction curves
/// `t -> retract(x + t e_i)`: the second derivative of `h - <grad h, .>`
/// removes the tangential acceleration of each curve.
pub fn fd_laplacian(ctx: &IsoFunContext, fp: &FocalPoint) -> Result<f64> {
    let grad = h_gradient(ctx, fp)?;
    let g = |y: &DVector<f64>| h_value(ctx, y) - grad.dot(y);
    let sys = ctx.domain_system();
    let second = |v: &DVector<f64>, step: f64| -> Result<f64> {
        let f = focal::retract_mminus(sys, &(&fp.x + v * step))?;
        let b = focal::retract_mminus(sys, &(&fp.x - v * step))?;
        Ok((g(&f) + g(&b) - 2.0 * g(&fp.x)) / (step * step))
    };
    let mut total = 0.0;
    for i in 0..fp.tangent_dim() {
        let v = fp.tangent.column(i).into_owned();
        let coarse = second(&v, focal::FD_STEP)?;
        let fine = second(&v, focal::FD_STEP / 2.0)?;
        total += (4.0 * fine - coarse) / 3.0;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionReport {
    pub samples: usize,
    /// `M+` of the partner system inside `M-` of the domain: worst residual.
    pub membership_residual: f64,
    /// Worst `|h|` on those points.
    pub max_abs_h: f64,
    /// `Condition A` holds at every sampled point of `E_+-(P)`; checked on the
    /// indefinite domain only.
    pub focal_condition_a: bool,
    /// Worst `|h| - 1` deviation at the `E_+-(P)` points.
    pub focal_h_residual: f64,
}

/// Sample `M+` of the partner system and check that it sits in the domain's
/// `M-` as the zero level of `h`; check Condition A at points with `h = +-1`.
pub fn cross_inclusion<R: Rng + ?Sized>(ctx: &IsoFunContext, n: usize, rng: &mut R) -> Result<InclusionReport> {
    let partner = ctx.partner_system();
    let domain = ctx.domain_system();
    let mut membership_residual = 0.0_f64;
    let mut max_abs_h = 0.0_f64;
    for _ in 0..n {
        let fp = focal::sample_mplus(partner, rng)?;
        membership_residual = membership_residual.max(focal::mminus_residual(domain, &fp.x));
        max_abs_h = max_abs_h.max(h_value(ctx, &fp.x).abs());
    }
    let mut focal_condition_a = true;
    let mut focal_h_residual = 0.0_f64;
    for i in 0..n.clamp(1, 8) {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = {
            let q = &ctx.p;
            let y = linalg::gaussian_vector(rng, q.nrows());
            let v = (&y + q * &y * sign) * 0.5;
            v.normalize()
        };
        focal_h_residual = focal_h_residual.max((h_value(ctx, &x).abs() - 1.0).abs());
        if ctx.domain != Domain::Indefinite {
            continue;
        }
        let coeffs = focal::clifford_coefficients(domain, &x);
        let fp = focal::frames_mminus(domain, &x, &coeffs.normalize())?;
        let rec = curvature::classify(domain, &fp, PREDICATE_TOL)?;
        focal_condition_a &= rec.cond_a.holds && loci::ca_indefinite(domain, &x, loci::NULL_SET_TOL);
    }
    Ok(InclusionReport { samples: n, membership_residual, max_abs_h, focal_condition_a, focal_h_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_at_zero() {
        let p = expected_pattern(0.0);
        assert_eq!(p.iter().filter(|v| **v == 0.0).count(), 9);
        assert!((p.iter().sum::<f64>()).abs() < 1e-15);
        let k = expected_level_curvatures(0.0);
        let (pair, kernel) = austerity(&k);
        assert!(pair < 1e-15);
        assert_eq!(kernel, 8);
    }

    #[test]
    fn pattern_trace_is_seven_h() {
        let h = 0.37;
        let s: f64 = expected_pattern(h).iter().sum();
        assert!((s - 7.0 * h).abs() < 1e-14);
    }
}
