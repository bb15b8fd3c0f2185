//! Exact samplers and membership criteria for the equality loci, the pointwise
//! Einstein scans, and the per-family audit that reproduces the locus tables.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{self, CliffordSystem, Definiteness};
use crate::curvature::{self, CurvatureRecord, PREDICATE_TOL};
use crate::error::{Error, Result};
use crate::focal::{self, FocalPoint, Side};
use crate::linalg::{self, max_abs};
use crate::octonion::{self, Octonion};
use crate::rng;

/// Required distance from an equality before a sample counts as "not on the locus".
pub const NEGATIVE_MARGIN: f64 = 0.1;
/// Tolerance for the exceptional sets `Px = +-x` and `P_1...P_8 x = +-x`.
pub const NULL_SET_TOL: f64 = 1e-8;

/// Random unit vector of `E_sign(q)` for a symmetric involution `q`.
fn random_in_eigenspace<R: Rng + ?Sized>(q: &DMatrix<f64>, sign: f64, rng: &mut R) -> DVector<f64> {
    loop {
        let y = linalg::gaussian_vector(rng, q.nrows());
        let v = (&y + q * &y * sign) * 0.5;
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Point of `M+` for `m = 3` on the eigensphere `E_sign(P_0 P_1 P_2 P_3)`.
pub fn sample_ca_m3<R: Rng + ?Sized>(sys: &CliffordSystem, sign: f64, rng: &mut R) -> Result<FocalPoint> {
    if sys.m() != 3 {
        return Err(Error::Precondition(format!("eigensphere sampler needs m = 3, got {}", sys.m())));
    }
    let x = random_in_eigenspace(&sys.product_matrix(), sign.signum(), rng);
    focal::frames_mplus(sys, &x)
}

/// `Psi(lambda, sigma) = (u, branch * u)` with `u_i = lambda_i sigma / sqrt 2`,
/// a point of `M+` of the octonionic `m = 7` system on `O^{k+1} x O^{k+1}`.
pub fn psi_vector(lambda: &DVector<f64>, sigma: &Octonion, branch: f64) -> DVector<f64> {
    let s = lambda.len();
    let mut x = DVector::zeros(16 * s);
    let b = branch.signum();
    for i in 0..s {
        for c in 0..8 {
            let v = lambda[i] * sigma.0[c] / std::f64::consts::SQRT_2;
            x[8 * i + c] = v;
            x[8 * (s + i) + c] = b * v;
        }
    }
    x
}

pub fn psi(sys: &CliffordSystem, lambda: &DVector<f64>, sigma: &Octonion, branch: f64) -> Result<FocalPoint> {
    if sys.m() != 7 || sys.dim() != 16 * lambda.len() {
        return Err(Error::Precondition("psi needs the octonionic m = 7 system matching lambda".into()));
    }
    if (lambda.norm() - 1.0).abs() > 1e-10 || (sigma.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition("psi needs unit lambda and sigma".into()));
    }
    focal::frames_mplus(sys, &psi_vector(lambda, sigma, branch))
}

/// Random `Psi` point with the given branch.
pub fn sample_psi<R: Rng + ?Sized>(sys: &CliffordSystem, branch: f64, rng: &mut R) -> Result<FocalPoint> {
    let lambda = linalg::random_unit(rng, sys.dim() / 16);
    let s = linalg::random_unit(rng, 8);
    psi(sys, &lambda, &Octonion::from_slice(s.as_slice()), branch)
}

fn octonion_slot(x: &DVector<f64>, i: usize) -> Octonion {
    Octonion::from_slice(&x.as_slice()[8 * i..8 * i + 8])
}

/// Normal form test for the `m = 7` family: `u = +-v` and all non-negligible
/// octonion slots of `u` are `+-` one common unit octonion. Returns the residual.
pub fn ca_residual_m7(sys: &CliffordSystem, x: &DVector<f64>) -> Result<f64> {
    if sys.m() != 7 || !sys.dim().is_multiple_of(16) {
        return Err(Error::Precondition("criterion needs the octonionic m = 7 system".into()));
    }
    let s = sys.dim() / 16;
    let half = 8 * s;
    let u = x.rows(0, half).into_owned();
    let v = x.rows(half, half).into_owned();
    let branch_res = (&u - &v).amax().min((&u + &v).amax());
    let units: Vec<Octonion> =
        (0..s).map(|i| octonion_slot(&u, i)).filter(|o| o.norm() > 1e-6).map(|o| o.normalized()).collect();
    let mut res = branch_res;
    for i in 0..units.len() {
        for j in i + 1..units.len() {
            let chk = octonion::condition_x(units[i], units[j], f64::INFINITY)?;
            res = res.max(chk.residual);
        }
    }
    Ok(res)
}

pub fn ca_criterion_m7(sys: &CliffordSystem, x: &DVector<f64>, tol: f64) -> Result<bool> {
    Ok(ca_residual_m7(sys, x)? < tol)
}

/// `min(|Px - x|, |Px + x|)`.
pub fn eigen_residual(p: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let px = p * x;
    (&px - x).norm().min((&px + x).norm())
}

pub fn ca_indefinite(sys: &CliffordSystem, x: &DVector<f64>, tol: f64) -> bool {
    eigen_residual(&sys.product_matrix(), x) < tol
}

/// Point of `M-` on `E_sign(P)` for an indefinite system.
pub fn sample_ca_i<R: Rng + ?Sized>(sys: &CliffordSystem, sign: f64, rng: &mut R) -> Result<FocalPoint> {
    if sys.definiteness() != Definiteness::Indefinite {
        return Err(Error::Precondition("E(P) sampler needs an indefinite system".into()));
    }
    let x = random_in_eigenspace(&sys.product_matrix(), sign.signum(), rng);
    let p = focal::clifford_coefficients(sys, &x);
    let pn = p.norm();
    if (pn - 1.0).abs() > 1e-10 {
        return Err(Error::NotOnFocal((pn * pn - 1.0).abs()));
    }
    focal::frames_mminus(sys, &x, &(p / pn))
}

/// Validate an extension `P_9` of `sys`.
pub fn check_extension(sys: &CliffordSystem, p9: &DMatrix<f64>) -> Result<()> {
    let n = sys.dim();
    let mut worst = max_abs(&(p9 - p9.transpose())).max(max_abs(&(p9 * p9 - DMatrix::identity(n, n))));
    for p in sys.matrices() {
        worst = worst.max(max_abs(&(p * p9 + p9 * p)));
    }
    if worst > clifford::INVOLUTION_TOL {
        return Err(Error::Precondition(format!("P9 fails its invariants (residual {worst:e})")));
    }
    Ok(())
}

/// `|<x, Px>^2 + <x, P_9 x>^2 - 1|`.
pub fn ca_definite_residual(p: &DMatrix<f64>, p9: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (x.dot(&(p * x)).powi(2) + x.dot(&(p9 * x)).powi(2) - 1.0).abs()
}

pub fn ca_definite_m8(sys: &CliffordSystem, p9: &DMatrix<f64>, x: &DVector<f64>, tol: f64) -> Result<bool> {
    check_extension(sys, p9)?;
    Ok(ca_definite_residual(&sys.product_matrix(), p9, x) < tol)
}

/// Unit vector of `E+(cos t P + sin t P_9)` for a given angle.
pub fn ca_definite_vector<R: Rng + ?Sized>(
    p: &DMatrix<f64>,
    p9: &DMatrix<f64>,
    theta: f64,
    rng: &mut R,
) -> DVector<f64> {
    let q = p * theta.cos() + p9 * theta.sin();
    random_in_eigenspace(&q, 1.0, rng)
}

/// Point of `C_A` on `M-` of the dual (definite) system, returned with frames
/// of that dual system. `sys` is the indefinite system and `p9` its extension.
pub fn sample_ca_d<R: Rng + ?Sized>(
    sys: &CliffordSystem,
    dual: &CliffordSystem,
    p9: &DMatrix<f64>,
    rng: &mut R,
) -> Result<FocalPoint> {
    check_extension(sys, p9)?;
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let x = ca_definite_vector(&sys.product_matrix(), p9, theta, rng);
    let p = focal::clifford_coefficients(dual, &x);
    let pn = p.norm();
    focal::frames_mminus(dual, &x, &(p / pn))
}

/// Point of `M-` of both systems found by alternating the two exact
/// retractions from a random start. Returns the point and the number of sweeps.
pub fn intersect_mminus<R: Rng + ?Sized>(
    a: &CliffordSystem,
    b: &CliffordSystem,
    rng: &mut R,
) -> Result<(DVector<f64>, usize)> {
    const SWEEPS: usize = 2000;
    let mut x = linalg::random_unit(rng, a.dim());
    let mut res = f64::INFINITY;
    for sweep in 0..SWEEPS {
        x = focal::retract_mminus(a, &x)?;
        x = focal::retract_mminus(b, &x)?;
        res = focal::mminus_residual(a, &x).max(focal::mminus_residual(b, &x));
        if res < focal::MEMBERSHIP_TOL {
            return Ok((x, sweep + 1));
        }
    }
    Err(Error::NonConvergence { iterations: SWEEPS, residual: res })
}

/// `f(x, X) = sum_{a<b} <X, P_a P_b x>^2`.
pub fn einstein_form(sys: &CliffordSystem, x: &DVector<f64>, big_x: &DVector<f64>) -> f64 {
    let mats = sys.matrices();
    let mut f = 0.0;
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            f += big_x.dot(&(&mats[a] * (&mats[b] * x))).powi(2);
        }
    }
    f
}

#[derive(Debug, Clone)]
pub struct EinsteinScan {
    pub g: f64,
    pub big_g: f64,
    /// Ambient unit tangent vector attaining `g`.
    pub argmin: DVector<f64>,
    /// The quadratic form in the tangent frame.
    pub form: DMatrix<f64>,
}

/// Extremes of `f(x, .)` over unit tangent vectors at a point of `M+`, as the
/// extreme eigenvalues of the form restricted to the tangent frame.
pub fn einstein_scan(sys: &CliffordSystem, fp: &FocalPoint) -> Result<EinsteinScan> {
    if fp.side != Side::Plus {
        return Err(Error::Precondition("the Einstein scan runs on M+".into()));
    }
    let t = &fp.tangent;
    let d = t.ncols();
    let mats = sys.matrices();
    let mut form = DMatrix::zeros(d, d);
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            let v = t.transpose() * (&mats[a] * (&mats[b] * &fp.x));
            form += &v * v.transpose();
        }
    }
    let (vals, vecs) = linalg::sym_eigen(&form);
    Ok(EinsteinScan { g: vals[0], big_g: vals[d - 1], argmin: t * vecs.column(0), form })
}

/// Unit tangent `(Qx - <Qx, x> x) / |...|` for an operator `Q`; `None` when
/// `x` is (numerically) an eigenvector.
pub fn normalized_tangential(q: &DMatrix<f64>, x: &DVector<f64>) -> Option<DVector<f64>> {
    let qx = q * x;
    let v = &qx - x * qx.dot(x);
    let n = v.norm();
    (n > NULL_SET_TOL).then(|| v / n)
}

// ---------------------------------------------------------------------------
// Families and audits
// ---------------------------------------------------------------------------

/// A family `(m, k)` with `l = k delta(m)` together with a variant and side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub m: usize,
    pub k: usize,
    pub variant: Definiteness,
    pub side: Side,
}

impl FamilySpec {
    pub fn new(m: usize, k: usize, variant: Definiteness, side: Side) -> Result<Self> {
        let l = k * clifford::delta(m)?;
        let m2 = l as i64 - m as i64 - 1;
        if k == 0 || m2 <= 0 {
            return Err(Error::DegenerateFamily { m, l, m2 });
        }
        let variant = if m.is_multiple_of(4) {
            match variant {
                Definiteness::NotApplicable => Definiteness::Definite,
                v => v,
            }
        } else {
            Definiteness::NotApplicable
        };
        if variant == Definiteness::Indefinite && k != 2 {
            return Err(Error::UnknownFamily(format!("indefinite variant is built for k = 2 only (m = {m}, k = {k})")));
        }
        Ok(FamilySpec { m, k, variant, side })
    }

    /// Parse `m,k[,definite|indefinite]`.
    pub fn parse(s: &str, side: Side) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::UnknownFamily(s.to_string()));
        }
        let num = |p: &str| p.parse::<usize>().map_err(|_| Error::UnknownFamily(s.to_string()));
        let (m, k) = (num(parts[0])?, num(parts[1])?);
        let variant = match parts.get(2).map(|v| v.to_ascii_lowercase()) {
            None => Definiteness::NotApplicable,
            Some(v) if v == "definite" || v == "d" => Definiteness::Definite,
            Some(v) if v == "indefinite" || v == "i" => Definiteness::Indefinite,
            Some(_) => return Err(Error::UnknownFamily(s.to_string())),
        };
        if !(1..=10).contains(&m) {
            return Err(Error::UnknownFamily(s.to_string()));
        }
        FamilySpec::new(m, k, variant, side)
    }

    pub fn l(&self) -> usize {
        self.k * clifford::delta(self.m).expect("validated on construction")
    }

    pub fn multiplicities(&self) -> (usize, usize) {
        (self.m, self.l() - self.m - 1)
    }

    /// Label such as `(4,3)D`.
    pub fn label(&self) -> String {
        let (a, b) = self.multiplicities();
        let suffix = match self.variant {
            Definiteness::Definite => "D",
            Definiteness::Indefinite => "I",
            Definiteness::NotApplicable => "",
        };
        format!("({a},{b}){suffix}")
    }

    /// Identifier used for seed derivation.
    pub fn id(&self) -> String {
        format!("{}:{}", self.label(), self.side.as_str())
    }

    pub fn with_side(&self, side: Side) -> FamilySpec {
        FamilySpec { side, ..*self }
    }

    pub fn build(&self) -> Result<Family> {
        let indefinite_m8 = || clifford::build_indefinite_m8();
        let (sys, extension) = match (self.m, self.variant) {
            (7, _) => (clifford::build_octonionic_m7(self.k - 1)?, None),
            (8, Definiteness::Indefinite) => (indefinite_m8(), None),
            (8, Definiteness::Definite) if self.k == 2 => {
                let base = indefinite_m8();
                let p9 = clifford::extend_by_one(&base)?;
                (clifford::dualize(&base)?, Some((base, p9)))
            }
            (m, Definiteness::Indefinite) => (clifford::indefinite_system(m)?, None),
            (m, Definiteness::Definite) => (clifford::definite_system(m, self.k)?, None),
            (m, Definiteness::NotApplicable) => (clifford::build_system(m, self.k)?, None),
        };
        Ok(Family { spec: *self, sys, extension })
    }
}

/// A built family. For the definite `m = 8`, `k = 2` family the system is the
/// dual of the indefinite one, which is kept together with its extension `P_9`.
#[derive(Debug, Clone)]
pub struct Family {
    pub spec: FamilySpec,
    pub sys: CliffordSystem,
    pub extension: Option<(CliffordSystem, DMatrix<f64>)>,
}

/// The OT-FKM families covered by the audit, as `(m, k, variant)`.
pub fn audited_families() -> Vec<(usize, usize, Definiteness)> {
    use Definiteness::*;
    vec![
        (1, 3, NotApplicable),
        (1, 4, NotApplicable),
        (1, 5, NotApplicable),
        (2, 2, NotApplicable),
        (3, 2, NotApplicable),
        (4, 2, Definite),
        (4, 2, Indefinite),
        (5, 1, NotApplicable),
        (6, 1, NotApplicable),
        (7, 2, NotApplicable),
        (8, 2, Definite),
        (8, 2, Indefinite),
        (9, 1, NotApplicable),
        (10, 1, NotApplicable),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Locus {
    #[serde(rename = "C_A")]
    ConditionA,
    #[serde(rename = "C_P")]
    Parallel,
    #[serde(rename = "C_E")]
    Einstein,
}

impl Locus {
    pub const ALL: [Locus; 3] = [Locus::ConditionA, Locus::Parallel, Locus::Einstein];

    pub fn as_str(self) -> &'static str {
        match self {
            Locus::ConditionA => "C_A",
            Locus::Parallel => "C_P",
            Locus::Einstein => "C_E",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Whole,
    Empty,
    Subset(String),
}

impl Claim {
    pub fn describe(&self, side: Side) -> String {
        match self {
            Claim::Whole => match side {
                Side::Plus => "M+".into(),
                Side::Minus => "M-".into(),
            },
            Claim::Empty => "empty".into(),
            Claim::Subset(s) => s.clone(),
        }
    }
}

/// Claimed `(C_A, C_P, C_E)` for an OT-FKM family.
pub fn claims(spec: &FamilySpec) -> [Claim; 3] {
    use Claim::*;
    let (m1, m2) = spec.multiplicities();
    let v = spec.variant;
    match spec.side {
        Side::Plus => match (m1, m2, v) {
            (1, _, _) => [Whole, Empty, Empty],
            (2, 1, _) | (6, 1, _) => [Empty, Whole, Empty],
            (3, _, _) => [Subset(format!("S^{0} + S^{0}", m2 + 3)), Empty, Empty],
            (4, 3, Definiteness::Definite) => [Empty, Whole, Whole],
            (7, _, _) => [Subset(format!("(S^{0} x S^7)/Z2 + (S^{0} x S^7)/Z2", m2 / 8)), Empty, Empty],
            _ => [Empty, Empty, Empty],
        },
        Side::Minus => match (m1, m2, v) {
            (1, _, _) => [Empty, Whole, Empty],
            (2, 1, _) | (6, 1, _) | (4, 3, Definiteness::Definite) => [Whole, Empty, Empty],
            (4, 3, Definiteness::Indefinite) => [Subset("S^7 + S^7".into()), Empty, Empty],
            (8, 7, Definiteness::Definite) => [Subset("(S^1 x S^15)/Z2".into()), Empty, Empty],
            (8, 7, Definiteness::Indefinite) => [Subset("S^15 + S^15".into()), Empty, Empty],
            _ => [Empty, Empty, Empty],
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Generic,
    Locus,
}

/// Per-sample outcome of an audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub kind: SampleKind,
    pub seed: u64,
    pub membership_residual: f64,
    pub record: CurvatureRecord,
    /// Spread `max - min` of the eigenvalues of `sum S_a^2`.
    pub einstein_spread: f64,
    /// Analytic `C_A` criterion where one exists.
    pub criterion: Option<bool>,
    /// Largest difference between the algebraic and finite-difference
    /// shape operators (minus side).
    pub fd_difference: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocusRow {
    pub table: u8,
    pub family: String,
    pub side: Side,
    pub locus: Locus,
    pub claim: String,
    pub verdict: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub n_samples: usize,
    /// Smallest distance from equality among samples that must avoid the locus.
    pub min_margin: Option<f64>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocusReport {
    pub family: FamilySpec,
    pub label: String,
    pub rows: Vec<LocusRow>,
    pub samples: Vec<SampleRecord>,
    /// Errors met while sampling; a non-empty list fails every row.
    pub errors: Vec<String>,
}

impl LocusReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.rows.iter().all(|r| r.verdict != "fail")
    }
}

fn spread(s: &focal::ShapeOperatorSet) -> f64 {
    let vals = linalg::sym_eigenvalues(&s.square_sum());
    vals[vals.len() - 1] - vals[0]
}

fn margin(locus: Locus, s: &SampleRecord) -> f64 {
    let r = &s.record;
    match locus {
        Locus::ConditionA => r.bounds.upper - r.rho_perp,
        Locus::Parallel => r.rho_perp - r.bounds.lower,
        Locus::Einstein => s.einstein_spread,
    }
}

fn holds(locus: Locus, s: &SampleRecord) -> (bool, f64) {
    let v = match locus {
        Locus::ConditionA => s.record.cond_a,
        Locus::Parallel => s.record.cond_p,
        Locus::Einstein => s.record.cond_e,
    };
    (v.holds, v.residual)
}

fn has_locus_sampler(spec: &FamilySpec) -> bool {
    matches!(claims(spec)[0], Claim::Subset(_))
}

fn audit_sample(family: &Family, kind: SampleKind, index: usize, seed: u64) -> Result<SampleRecord> {
    let spec = &family.spec;
    let sys = &family.sys;
    let mut r = rng::stream_from_seed(seed);
    let sign = if index.is_multiple_of(2) { 1.0 } else { -1.0 };
    let fp = match (kind, spec.side) {
        (SampleKind::Generic, Side::Plus) => focal::sample_mplus(sys, &mut r)?,
        (SampleKind::Generic, Side::Minus) => focal::sample_mminus(sys, &mut r)?,
        (SampleKind::Locus, Side::Plus) if spec.m == 3 => sample_ca_m3(sys, sign, &mut r)?,
        (SampleKind::Locus, Side::Plus) if spec.m == 7 => sample_psi(sys, sign, &mut r)?,
        (SampleKind::Locus, Side::Minus) => match &family.extension {
            Some((base, p9)) => sample_ca_d(base, sys, p9, &mut r)?,
            None => sample_ca_i(sys, sign, &mut r)?,
        },
        _ => return Err(Error::Precondition(format!("no locus sampler for {}", spec.id()))),
    };
    let (shapes, fd_difference, membership_residual) = match spec.side {
        Side::Plus => (focal::shape_ops_mplus(sys, &fp)?, None, focal::mplus_residual(sys, &fp.x)),
        Side::Minus => {
            let (s, d) = focal::cross_check_mminus(sys, &fp)?;
            (s, Some(d), focal::mminus_residual(sys, &fp.x))
        }
    };
    let record = curvature::classify_shapes(&shapes, PREDICATE_TOL)?;
    let criterion = if has_locus_sampler(spec) {
        Some(match (spec.side, spec.m, &family.extension) {
            (Side::Plus, 3, _) => eigen_residual(&sys.product_matrix(), &fp.x) < NULL_SET_TOL,
            (Side::Plus, 7, _) => ca_criterion_m7(sys, &fp.x, NULL_SET_TOL)?,
            (Side::Minus, _, Some((base, p9))) => ca_definite_m8(base, p9, &fp.x, 1e-10)?,
            _ => ca_indefinite(sys, &fp.x, NULL_SET_TOL),
        })
    } else {
        None
    };
    Ok(SampleRecord {
        index,
        kind,
        seed,
        membership_residual,
        einstein_spread: spread(&shapes),
        record,
        criterion,
        fd_difference,
    })
}

fn evaluate_row(spec: &FamilySpec, locus: Locus, claim: &Claim, samples: &[SampleRecord]) -> LocusRow {
    let generic: Vec<&SampleRecord> = samples.iter().filter(|s| s.kind == SampleKind::Generic).collect();
    let exact: Vec<&SampleRecord> = samples.iter().filter(|s| s.kind == SampleKind::Locus).collect();
    let rho = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let (rho_min, rho_max) = rho(&mut samples.iter().map(|s| s.record.rho_perp));
    let min_margin_of = |set: &[&SampleRecord]| set.iter().map(|s| margin(locus, s)).fold(f64::INFINITY, f64::min);
    let avoid_ok =
        |set: &[&SampleRecord]| set.iter().all(|s| !holds(locus, s).0 && margin(locus, s) >= NEGATIVE_MARGIN);
    let (pass, max_residual, tolerance, min_margin, n) = match claim {
        Claim::Whole => {
            let res = generic.iter().map(|s| holds(locus, s).1).fold(0.0, f64::max);
            (generic.iter().all(|s| holds(locus, s).0), res, PREDICATE_TOL, None, generic.len())
        }
        Claim::Empty => {
            let all: Vec<&SampleRecord> = samples.iter().collect();
            let mm = min_margin_of(&all);
            let res = (NEGATIVE_MARGIN - mm).max(0.0);
            (avoid_ok(&all), res, 0.0, Some(mm), all.len())
        }
        Claim::Subset(_) => {
            let res = exact.iter().map(|s| holds(locus, s).1).fold(0.0, f64::max);
            let exact_ok = !exact.is_empty() && exact.iter().all(|s| holds(locus, s).0 && s.criterion == Some(true));
            let generic_ok = avoid_ok(&generic) && generic.iter().all(|s| s.criterion == Some(false));
            (exact_ok && generic_ok, res, PREDICATE_TOL, Some(min_margin_of(&generic)), samples.len())
        }
    };
    LocusRow {
        table: if spec.side == Side::Plus { 1 } else { 2 },
        family: spec.label(),
        side: spec.side,
        locus,
        claim: claim.describe(spec.side),
        verdict: if pass { "pass" } else { "fail" }.into(),
        max_residual,
        tolerance,
        n_samples: n,
        min_margin,
        rho_min: rho_min.is_finite().then_some(rho_min),
        rho_max: rho_max.is_finite().then_some(rho_max),
    }
}

/// Audit one family on one side: `n_samples` generic points plus, where the
/// `C_A` claim is a proper subset, `n_samples` points of the exact locus.
pub fn table_audit(spec: &FamilySpec, n_samples: usize, master_seed: u64) -> Result<LocusReport> {
    let family = spec.build()?;
    let id = spec.id();
    let mut jobs: Vec<(SampleKind, usize)> = (0..n_samples).map(|i| (SampleKind::Generic, i)).collect();
    if has_locus_sampler(spec) {
        jobs.extend((0..n_samples).map(|i| (SampleKind::Locus, i)));
    }
    let results: Vec<(usize, Result<SampleRecord>)> = jobs
        .par_iter()
        .enumerate()
        .map(|(slot, &(kind, i))| {
            let stream = match kind {
                SampleKind::Generic => format!("{id}:generic"),
                SampleKind::Locus => format!("{id}:locus"),
            };
            let seed = rng::derive_seed(master_seed, &stream, i as u64);
            (slot, audit_sample(&family, kind, i, seed))
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for (slot, r) in results {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => errors.push(format!("sample {slot}: {e}")),
        }
    }
    let mut rows: Vec<LocusRow> = Locus::ALL
        .iter()
        .zip(claims(spec).iter())
        .map(|(&locus, claim)| evaluate_row(spec, locus, claim, &samples))
        .collect();
    if !errors.is_empty() {
        for row in &mut rows {
            row.verdict = "fail".into();
        }
    }
    Ok(LocusReport { family: *spec, label: spec.label(), rows, samples, errors })
}

/// Rows for the homogeneous families without an OT-FKM construction.
pub fn not_audited_rows() -> Vec<LocusRow> {
    let mut rows = Vec::new();
    for (side, table) in [(Side::Plus, 1), (Side::Minus, 2)] {
        for fam in ["(2,2)", "(4,5)"] {
            for locus in Locus::ALL {
                rows.push(LocusRow {
                    table,
                    family: fam.into(),
                    side,
                    locus,
                    claim: "no OT-FKM construction".into(),
                    verdict: "not audited".into(),
                    max_residual: 0.0,
                    tolerance: 0.0,
                    n_samples: 0,
                    min_margin: None,
                    rho_min: None,
                    rho_max: None,
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parsing() {
        let f = FamilySpec::parse("3,2", Side::Plus).unwrap();
        assert_eq!(f.multiplicities(), (3, 4));
        assert_eq!(f.label(), "(3,4)");
        let f = FamilySpec::parse("8,2,indefinite", Side::Minus).unwrap();
        assert_eq!(f.label(), "(8,7)I");
        let f = FamilySpec::parse("4,2", Side::Plus).unwrap();
        assert_eq!(f.variant, Definiteness::Definite);
        assert!(matches!(FamilySpec::parse("3,1", Side::Plus), Err(Error::DegenerateFamily { .. })));
        assert!(FamilySpec::parse("11,1", Side::Plus).is_err());
        assert!(FamilySpec::parse("x", Side::Plus).is_err());
        assert!(FamilySpec::parse("4,3,indefinite", Side::Plus).is_err());
    }

    #[test]
    fn claims_follow_tables() {
        let spec = |m, k, v| FamilySpec::new(m, k, v, Side::Plus).unwrap();
        assert_eq!(claims(&spec(1, 4, Definiteness::NotApplicable))[0], Claim::Whole);
        assert_eq!(claims(&spec(4, 2, Definiteness::Definite))[2], Claim::Whole);
        assert_eq!(claims(&spec(5, 1, Definiteness::NotApplicable)), [Claim::Empty, Claim::Empty, Claim::Empty]);
        let minus = spec(8, 2, Definiteness::Indefinite).with_side(Side::Minus);
        assert!(matches!(claims(&minus)[0], Claim::Subset(_)));
    }
}
