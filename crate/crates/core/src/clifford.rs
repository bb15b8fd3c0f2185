//! Symmetric Clifford systems `{P_0, ..., P_m}` on `R^{2l}`.
//!
//! A system is stored as its list of matrices; multiplicities and the
//! definite/indefinite distinction (for `m = 0 mod 4`) are derived on
//! construction and every constructor validates the defining relations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, max_abs};
use crate::octonion::{left_mult_matrix, Octonion, Quaternion};

/// Symmetry residual accepted for a constructed system.
pub const SYMMETRY_TOL: f64 = 1e-13;
/// Anticommutation residual accepted for a constructed system.
pub const RELATION_TOL: f64 = 1e-12;
/// Looser tolerance for products of many system matrices.
pub const INVOLUTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    Definite,
    Indefinite,
    NotApplicable,
}

#[derive(Debug, Clone)]
pub struct CliffordSystem {
    m: usize,
    l: usize,
    mats: Vec<DMatrix<f64>>,
    definiteness: Definiteness,
}

impl CliffordSystem {
    /// Validate `mats` as a symmetric Clifford system and classify it.
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        if mats.len() < 2 {
            return Err(Error::Precondition("a Clifford system needs at least two matrices".into()));
        }
        let n = mats[0].nrows();
        if !n.is_multiple_of(2) || mats.iter().any(|p| p.nrows() != n || p.ncols() != n) {
            return Err(Error::Precondition("matrices must share an even square dimension".into()));
        }
        let m = mats.len() - 1;
        let l = n / 2;
        let m2 = l as i64 - m as i64 - 1;
        if m2 <= 0 {
            return Err(Error::DegenerateFamily { m, l, m2 });
        }
        let mut sys = CliffordSystem { m, l, mats, definiteness: Definiteness::NotApplicable };
        let sym = sys.symmetry_residual();
        if sym >= SYMMETRY_TOL {
            return Err(Error::ConstructionFailure(format!("symmetry residual {sym:e}")));
        }
        let rel = sys.relation_residual();
        if rel >= RELATION_TOL {
            return Err(Error::ConstructionFailure(format!("Clifford relation residual {rel:e}")));
        }
        sys.definiteness = sys.classify();
        Ok(sys)
    }

    fn classify(&self) -> Definiteness {
        if !self.m.is_multiple_of(4) {
            return Definiteness::NotApplicable;
        }
        let p = self.product_matrix();
        let n = self.dim();
        let id = DMatrix::<f64>::identity(n, n);
        if max_abs(&(&p - &id)) < INVOLUTION_TOL || max_abs(&(&p + &id)) < INVOLUTION_TOL {
            Definiteness::Definite
        } else {
            Definiteness::Indefinite
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Ambient dimension `2l`.
    pub fn dim(&self) -> usize {
        2 * self.l
    }

    /// `(m1, m2) = (m, l - m - 1)`.
    pub fn multiplicities(&self) -> (usize, usize) {
        (self.m, self.l - self.m - 1)
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn p(&self, alpha: usize) -> &DMatrix<f64> {
        &self.mats[alpha]
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.mats.iter().map(|p| max_abs(&(p - p.transpose()))).fold(0.0, f64::max)
    }

    /// `max |P_a P_b + P_b P_a - 2 delta_ab I|` over all pairs.
    pub fn relation_residual(&self) -> f64 {
        let n = self.dim();
        let id = DMatrix::<f64>::identity(n, n);
        let mut worst = 0.0_f64;
        for a in 0..=self.m {
            for b in a..=self.m {
                let pa = &self.mats[a];
                let pb = &self.mats[b];
                let mut r = pa * pb + pb * pa;
                if a == b {
                    r -= &id * 2.0;
                }
                worst = worst.max(max_abs(&r));
            }
        }
        worst
    }

    /// `P_0 P_1 ... P_m`.
    pub fn product_matrix(&self) -> DMatrix<f64> {
        product_of(&self.mats)
    }

    /// Row-major dump of the matrices for the JSON report.
    pub fn to_row_major(&self) -> Vec<Vec<f64>> {
        self.mats
            .iter()
            .map(|p| {
                let mut out = Vec::with_capacity(p.len());
                for i in 0..p.nrows() {
                    for j in 0..p.ncols() {
                        out.push(p[(i, j)]);
                    }
                }
                out
            })
            .collect()
    }
}

pub fn product_of(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = mats[0].nrows();
    mats.iter().fold(DMatrix::identity(n, n), |acc, p| acc * p)
}

/// Dimension of an irreducible module of the Clifford algebra `C_{m-1}`.
pub fn delta(m: usize) -> Result<usize> {
    const TABLE: [usize; 10] = [1, 2, 4, 4, 8, 8, 8, 8, 16, 32];
    if (1..=10).contains(&m) {
        Ok(TABLE[m - 1])
    } else {
        Err(Error::UnsupportedM(m))
    }
}

/// Skew matrices `E_1, ..., E_{m-1}` on `R^{delta(m)}` with
/// `E_i E_j + E_j E_i = -2 delta_ij I`.
#[derive(Debug, Clone)]
pub struct SkewGeneratorSet {
    pub mats: Vec<DMatrix<f64>>,
}

impl SkewGeneratorSet {
    pub fn dim(&self) -> usize {
        self.mats.first().map_or(0, |e| e.nrows())
    }

    pub fn skew_residual(&self) -> f64 {
        self.mats.iter().map(|e| max_abs(&(e + e.transpose()))).fold(0.0, f64::max)
    }

    pub fn relation_residual(&self) -> f64 {
        let n = self.dim();
        let id = DMatrix::<f64>::identity(n, n);
        let mut worst = 0.0_f64;
        for (i, a) in self.mats.iter().enumerate() {
            for (j, b) in self.mats.iter().enumerate() {
                let mut r = a * b + b * a;
                if i == j {
                    r += &id * 2.0;
                }
                worst = worst.max(max_abs(&r));
            }
        }
        worst
    }
}

fn quaternion_left(q: Quaternion) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(4, 4);
    for j in 0..4 {
        let mut b = [0.0; 4];
        b[j] = 1.0;
        let col = q * Quaternion(b);
        for i in 0..4 {
            l[(i, j)] = col.0[i];
        }
    }
    l
}

/// `[[0, -I], [I, 0]]` on `R^{2n}`.
fn symplectic(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// From `r` anticommuting complex structures on `R^n` build `r + 1` on `R^{2n}`.
fn double(gens: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let n = gens[0].nrows();
    let mut out: Vec<DMatrix<f64>> = gens
        .iter()
        .map(|f| {
            let mut e = DMatrix::zeros(2 * n, 2 * n);
            e.view_mut((0, n), (n, n)).copy_from(f);
            e.view_mut((n, 0), (n, n)).copy_from(f);
            e
        })
        .collect();
    out.push(symplectic(n));
    out
}

pub fn build_generators(m: usize) -> Result<SkewGeneratorSet> {
    if !(2..=10).contains(&m) {
        return Err(Error::UnsupportedM(m));
    }
    let mats = match m {
        2 => vec![symplectic(1)],
        3 | 4 => {
            let units = [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
            units[..m - 1].iter().map(|u| quaternion_left(Quaternion(*u))).collect()
        }
        5..=8 => (1..m).map(|a| left_mult_matrix(Octonion::basis(a))).collect(),
        9 => double(&build_generators(8)?.mats),
        _ => double(&build_generators(9)?.mats),
    };
    Ok(SkewGeneratorSet { mats })
}

fn repeat_block(e: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let blocks: Vec<&DMatrix<f64>> = std::iter::repeat_n(e, k).collect();
    block_diag(&blocks)
}

/// `[[0, E], [-E, 0]]`, symmetric when `E` is skew.
fn off_diagonal(e: &DMatrix<f64>) -> DMatrix<f64> {
    let l = e.nrows();
    let mut p = DMatrix::zeros(2 * l, 2 * l);
    p.view_mut((0, l), (l, l)).copy_from(e);
    p.view_mut((l, 0), (l, l)).copy_from(&(-e));
    p
}

fn p0_and_swap(l: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut p0 = DMatrix::zeros(2 * l, 2 * l);
    let mut p1 = DMatrix::zeros(2 * l, 2 * l);
    for i in 0..l {
        p0[(i, i)] = 1.0;
        p0[(l + i, l + i)] = -1.0;
        p1[(i, l + i)] = 1.0;
        p1[(l + i, i)] = 1.0;
    }
    (p0, p1)
}

/// Generic system on `R^{2 k delta(m)}`:
/// `P_0(u,v) = (u,-v)`, `P_1(u,v) = (v,u)`, `P_{1+i}(u,v) = (E_i v, -E_i u)`.
pub fn build_system(m: usize, k: usize) -> Result<CliffordSystem> {
    let d = delta(m)?;
    if k == 0 {
        return Err(Error::Precondition("multiplicity k must be at least 1".into()));
    }
    let l = k * d;
    let m2 = l as i64 - m as i64 - 1;
    if m2 <= 0 {
        return Err(Error::DegenerateFamily { m, l, m2 });
    }
    let (p0, p1) = p0_and_swap(l);
    let mut mats = vec![p0, p1];
    if m >= 2 {
        for e in build_generators(m)?.mats {
            mats.push(off_diagonal(&repeat_block(&e, k)));
        }
    }
    CliffordSystem::new(mats)
}

/// The octonionic `m = 7` system on `R^{16k+16} = O^{k+1} x O^{k+1}`:
/// `P_0(u,v) = (u,-v)`, `P_a(u,v) = (E_a v, -E_a u)` with `E_a` left
/// multiplication by `e_a` in every octonion slot.
pub fn build_octonionic_m7(k: usize) -> Result<CliffordSystem> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let l = 8 * (k + 1);
    let (p0, _) = p0_and_swap(l);
    let mut mats = vec![p0];
    for a in 1..=7 {
        mats.push(off_diagonal(&repeat_block(&left_mult_matrix(Octonion::basis(a)), k + 1)));
    }
    CliffordSystem::new(mats)
}

/// The explicit indefinite `m = 8` system on `R^32 = O^4`, coordinates
/// `(u1, u2, v1, v2)`:
/// `P_0 x = (u1, u2, -v1, -v2)`, `P_1 x = (v1, v2, u1, u2)`,
/// `P_{1+a} x = (e_a v1, -e_a v2, -e_a u1, e_a u2)`.
pub fn build_indefinite_m8() -> CliffordSystem {
    let id = DMatrix::<f64>::identity(8, 8);
    let place = |blocks: &[(usize, usize, DMatrix<f64>)]| {
        let mut p = DMatrix::zeros(32, 32);
        for (r, c, b) in blocks {
            p.view_mut((8 * r, 8 * c), (8, 8)).copy_from(b);
        }
        p
    };
    let mut mats = vec![
        place(&[(0, 0, id.clone()), (1, 1, id.clone()), (2, 2, -&id), (3, 3, -&id)]),
        place(&[(0, 2, id.clone()), (1, 3, id.clone()), (2, 0, id.clone()), (3, 1, id.clone())]),
    ];
    for a in 1..=7 {
        let la = left_mult_matrix(Octonion::basis(a));
        mats.push(place(&[(0, 2, la.clone()), (1, 3, -&la), (2, 0, -&la), (3, 1, la.clone())]));
    }
    CliffordSystem::new(mats).expect("explicit m = 8 system satisfies the Clifford relations")
}

pub fn direct_sum(a: &CliffordSystem, b: &CliffordSystem) -> Result<CliffordSystem> {
    if a.m() != b.m() {
        return Err(Error::Mismatch(format!("direct sum needs equal m, got {} and {}", a.m(), b.m())));
    }
    let mats = a.mats.iter().zip(&b.mats).map(|(pa, pb)| block_diag(&[pa, pb])).collect();
    CliffordSystem::new(mats)
}

pub fn negate_last(a: &CliffordSystem) -> CliffordSystem {
    let mut mats = a.mats.clone();
    let last = mats.last_mut().unwrap();
    *last = -last.clone();
    let mut out = CliffordSystem { m: a.m, l: a.l, mats, definiteness: a.definiteness };
    out.definiteness = out.classify();
    out
}

/// `{P_a P}` with `P = P_0 ... P_m`; requires `m = 0 mod 4`.
pub fn dualize(a: &CliffordSystem) -> Result<CliffordSystem> {
    if !a.m().is_multiple_of(4) {
        return Err(Error::Precondition(format!("dualize needs m = 0 mod 4, got m = {}", a.m())));
    }
    let p = a.product_matrix();
    let mats = a.mats.iter().map(|pa| linalg::symmetrize(&(pa * &p))).collect();
    CliffordSystem::new(mats)
}

/// Definite system for `m = 0 mod 4` normalized so that the product is `+Id`.
pub fn definite_system(m: usize, k: usize) -> Result<CliffordSystem> {
    if !m.is_multiple_of(4) {
        return Err(Error::Precondition(format!("definiteness needs m = 0 mod 4, got {m}")));
    }
    let block = normalized_irreducible(m)?;
    let mut sys = block.clone();
    for _ in 1..k {
        sys = direct_sum(&sys, &block)?;
    }
    Ok(sys)
}

/// Indefinite system for `m = 0 mod 4`, `k = 2`: irreducible blocks with
/// opposite product signs.
pub fn indefinite_system(m: usize) -> Result<CliffordSystem> {
    if !m.is_multiple_of(4) {
        return Err(Error::Precondition(format!("definiteness needs m = 0 mod 4, got {m}")));
    }
    let block = normalized_irreducible(m)?;
    direct_sum(&block, &negate_last(&block))
}

/// Irreducible (k = 1) block whose product is `+Id`. The block may itself be
/// degenerate as a family (l - m - 1 <= 0), so it is assembled without the
/// multiplicity check.
fn normalized_irreducible(m: usize) -> Result<CliffordSystem> {
    let l = delta(m)?;
    let (p0, p1) = p0_and_swap(l);
    let mut mats = vec![p0, p1];
    for e in build_generators(m)?.mats {
        mats.push(off_diagonal(&e));
    }
    let p = product_of(&mats);
    if p[(0, 0)] < 0.0 {
        let last = mats.last_mut().unwrap();
        *last = -last.clone();
    }
    Ok(CliffordSystem { m, l, mats, definiteness: Definiteness::Definite })
}

/// Apply `X -> (X - P X P) / 2` for every matrix of the system: the product of
/// these commuting projectors is the orthogonal projector onto matrices that
/// anticommute with the whole system.
fn anticommuting_part(sys: &CliffordSystem, x: &DMatrix<f64>) -> DMatrix<f64> {
    sys.mats.iter().fold(x.clone(), |acc, p| (&acc - p * &acc * p) * 0.5)
}

/// Orthonormal (Frobenius) basis of the symmetric matrices anticommuting with
/// every `P_a`.
pub fn anticommuting_symmetric_solutions(sys: &CliffordSystem) -> Vec<DMatrix<f64>> {
    let n = sys.dim();
    let mut images: Vec<DMatrix<f64>> = Vec::new();
    let mut basis: Vec<DMatrix<f64>> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut b = DMatrix::zeros(n, n);
            b[(i, j)] = 1.0;
            b[(j, i)] = 1.0;
            let mut img = anticommuting_part(sys, &b);
            for prev in &basis {
                let c = linalg::fro_dot(prev, &img);
                img -= prev * c;
            }
            let norm = linalg::fro_sq(&img).sqrt();
            if norm > 1e-8 {
                basis.push(img / norm);
            }
            images.push(b);
        }
    }
    basis
}

/// Symmetric `P_{m+1}` with square `I` anticommuting with the whole system.
pub fn extend_by_one(sys: &CliffordSystem) -> Result<DMatrix<f64>> {
    if sys.definiteness() == Definiteness::Definite {
        return Err(Error::NotExtendable(
            "definite system: the product is +-Id, which forces the extension to vanish".into(),
        ));
    }
    let sols = anticommuting_symmetric_solutions(sys);
    let x = sols
        .first()
        .ok_or_else(|| Error::ConstructionFailure("no symmetric matrix anticommutes with the system".into()))?;
    let n = sys.dim();
    let sq = x * x;
    let c = sq.trace() / n as f64;
    if c <= 0.0 {
        return Err(Error::ConstructionFailure("degenerate extension candidate".into()));
    }
    let p9 = linalg::symmetrize(&(x / c.sqrt()));
    let id = DMatrix::<f64>::identity(n, n);
    let sq_res = max_abs(&(&p9 * &p9 - &id));
    if sq_res > INVOLUTION_TOL {
        return Err(Error::ConstructionFailure(format!(
            "extension candidate does not square to the identity (residual {sq_res:e}, {} solutions)",
            sols.len()
        )));
    }
    Ok(p9)
}

/// Orthonormal basis of `E_sign(Q)` for a symmetric involution `Q`.
pub fn eigenbasis(q: &DMatrix<f64>, sign: f64) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    let sym = max_abs(&(q - q.transpose()));
    let inv = max_abs(&(q * q - DMatrix::<f64>::identity(n, n)));
    if sym > INVOLUTION_TOL || inv > INVOLUTION_TOL {
        return Err(Error::Precondition(format!(
            "eigenbasis needs a symmetric involution (symmetry {sym:e}, involution {inv:e})"
        )));
    }
    Ok(linalg::involution_eigenspace(q, sign.signum()))
}
