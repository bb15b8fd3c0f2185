//! Quaternions and octonions.
//!
//! Octonions are pairs of quaternions multiplied with the Cayley-Dickson rule
//! `(a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))`. The imaginary basis is
//! `e1 = (i,0), e2 = (j,0), e3 = (k,0), e4 = (0,1), e5 = (0,i), e6 = (0,j),
//! e7 = (0,k)`, i.e. coefficient `c[n]` multiplies `e_n`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Unit-norm inputs may drift this far from 1 before they are rejected.
pub const UNIT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion(pub [f64; 4]);

impl Quaternion {
    pub const ONE: Quaternion = Quaternion([1.0, 0.0, 0.0, 0.0]);

    pub fn conj(self) -> Self {
        let [a, b, c, d] = self.0;
        Quaternion([a, -b, -c, -d])
    }

    pub fn norm_sq(self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion(self.0.map(|v| v * s))
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, rhs: Quaternion) -> Quaternion {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = rhs.0;
        Quaternion([
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ])
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion(self.0.map(|v| -v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Octonion(pub [f64; 8]);

impl Octonion {
    pub const ONE: Octonion = Octonion([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    pub const ZERO: Octonion = Octonion([0.0; 8]);

    /// Basis element `e_n` (`e_0 = 1`).
    pub fn basis(n: usize) -> Self {
        let mut c = [0.0; 8];
        c[n] = 1.0;
        Octonion(c)
    }

    pub fn from_halves(a: Quaternion, b: Quaternion) -> Self {
        let mut c = [0.0; 8];
        c[..4].copy_from_slice(&a.0);
        c[4..].copy_from_slice(&b.0);
        Octonion(c)
    }

    pub fn halves(self) -> (Quaternion, Quaternion) {
        let c = self.0;
        (Quaternion([c[0], c[1], c[2], c[3]]), Quaternion([c[4], c[5], c[6], c[7]]))
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut c = [0.0; 8];
        c.copy_from_slice(&s[..8]);
        Octonion(c)
    }

    pub fn conj(self) -> Self {
        let mut c = self.0.map(|v| -v);
        c[0] = self.0[0];
        Octonion(c)
    }

    pub fn real(self) -> f64 {
        self.0[0]
    }

    pub fn imag(self) -> [f64; 7] {
        std::array::from_fn(|i| self.0[i + 1])
    }

    pub fn norm_sq(self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(self, other: Octonion) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn scale(self, s: f64) -> Self {
        Octonion(self.0.map(|v| v * s))
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, rhs: Octonion) -> Octonion {
        Octonion(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, rhs: Octonion) -> Octonion {
        Octonion(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        Octonion(self.0.map(|v| -v))
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        cd_mul(self, rhs)
    }
}

/// Cayley-Dickson product over quaternion pairs.
pub fn cd_mul(x: Octonion, y: Octonion) -> Octonion {
    let (a, b) = x.halves();
    let (c, d) = y.halves();
    Octonion::from_halves(a * c - d.conj() * b, d * a + b * c.conj())
}

/// A bilinear product on R^8. The verification suite runs against this trait so
/// a deliberately corrupted table can be swapped in as a negative control.
pub trait OctonionProduct {
    fn product(&self, a: Octonion, b: Octonion) -> Octonion;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CayleyDickson;

impl OctonionProduct for CayleyDickson {
    fn product(&self, a: Octonion, b: Octonion) -> Octonion {
        cd_mul(a, b)
    }
}

/// Structure constants `e_i e_j = sign[i][j] e_{index[i][j]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTable {
    pub index: [[usize; 8]; 8],
    pub sign: [[i8; 8]; 8],
}

impl StructureTable {
    /// Tabulate the Cayley-Dickson product on basis pairs.
    pub fn from_cayley_dickson() -> Self {
        let mut index = [[0usize; 8]; 8];
        let mut sign = [[0i8; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                let p = cd_mul(Octonion::basis(i), Octonion::basis(j));
                let k = (0..8).max_by(|&a, &b| p.0[a].abs().total_cmp(&p.0[b].abs())).unwrap();
                index[i][j] = k;
                sign[i][j] = if p.0[k] > 0.0 { 1 } else { -1 };
            }
        }
        StructureTable { index, sign }
    }

    /// Copy of the table with the sign of `e_i e_j` flipped.
    pub fn with_flipped_sign(&self, i: usize, j: usize) -> Self {
        let mut t = self.clone();
        t.sign[i][j] = -t.sign[i][j];
        t
    }
}

impl OctonionProduct for StructureTable {
    fn product(&self, a: Octonion, b: Octonion) -> Octonion {
        let mut out = [0.0; 8];
        for i in 0..8 {
            if a.0[i] == 0.0 {
                continue;
            }
            for j in 0..8 {
                out[self.index[i][j]] += f64::from(self.sign[i][j]) * a.0[i] * b.0[j];
            }
        }
        Octonion(out)
    }
}

/// `e1(e2(...(e7 x)))`, which equals `-x` for every octonion.
pub fn seven_fold_product(x: Octonion) -> Octonion {
    seven_fold_product_with(&CayleyDickson, x)
}

pub fn seven_fold_product_with<M: OctonionProduct + ?Sized>(mul: &M, x: Octonion) -> Octonion {
    (1..=7).rev().fold(x, |acc, a| mul.product(Octonion::basis(a), acc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub holds: bool,
    pub residual: f64,
}

fn unit_input(name: &str, q: Octonion) -> Result<Octonion> {
    let n = q.norm();
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Precondition(format!("{name} must be a unit octonion, |{name}| = {n}")));
    }
    Ok(q.scale(1.0 / n))
}

/// Condition X: `(e_a(e_b s)) conj(s) = (e_a(e_b t)) conj(t)` for all ordered
/// pairs `a != b` in `1..=7`. The residual is the largest difference norm.
pub fn condition_x(sigma: Octonion, tau: Octonion, tol: f64) -> Result<ConditionCheck> {
    condition_x_with(&CayleyDickson, sigma, tau, tol)
}

pub fn condition_x_with<M: OctonionProduct + ?Sized>(
    mul: &M,
    sigma: Octonion,
    tau: Octonion,
    tol: f64,
) -> Result<ConditionCheck> {
    let s = unit_input("sigma", sigma)?;
    let t = unit_input("tau", tau)?;
    let mut residual = 0.0_f64;
    for a in 1..=7 {
        for b in 1..=7 {
            if a == b {
                continue;
            }
            let (ea, eb) = (Octonion::basis(a), Octonion::basis(b));
            let lhs = mul.product(mul.product(ea, mul.product(eb, s)), s.conj());
            let rhs = mul.product(mul.product(ea, mul.product(eb, t)), t.conj());
            residual = residual.max((lhs - rhs).norm());
        }
    }
    Ok(ConditionCheck { holds: residual < tol, residual })
}

/// Condition Y: `(x s) t = x (s t)` for all x; bilinearity reduces this to the
/// eight basis vectors.
pub fn condition_y(sigma: Octonion, tau: Octonion, tol: f64) -> Result<ConditionCheck> {
    condition_y_with(&CayleyDickson, sigma, tau, tol)
}

pub fn condition_y_with<M: OctonionProduct + ?Sized>(
    mul: &M,
    sigma: Octonion,
    tau: Octonion,
    tol: f64,
) -> Result<ConditionCheck> {
    let s = unit_input("sigma", sigma)?;
    let t = unit_input("tau", tau)?;
    let st = mul.product(s, t);
    let residual = (0..8)
        .map(|i| {
            let x = Octonion::basis(i);
            (mul.product(mul.product(x, s), t) - mul.product(x, st)).norm()
        })
        .fold(0.0_f64, f64::max);
    Ok(ConditionCheck { holds: residual < tol, residual })
}

/// Matrix of `x -> a x` in the basis `1, e1, ..., e7`.
pub fn left_mult_matrix(a: Octonion) -> DMatrix<f64> {
    left_mult_matrix_with(&CayleyDickson, a)
}

pub fn left_mult_matrix_with<M: OctonionProduct + ?Sized>(mul: &M, a: Octonion) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(8, 8);
    for j in 0..8 {
        let col = mul.product(a, Octonion::basis(j));
        for i in 0..8 {
            l[(i, j)] = col.0[i];
        }
    }
    l
}

/// Max residual of `L_a L_b + L_b L_a = -2 delta_ab I` over the imaginary units.
pub fn left_mult_clifford_residual<M: OctonionProduct + ?Sized>(mul: &M) -> f64 {
    let mats: Vec<DMatrix<f64>> = (1..=7).map(|a| left_mult_matrix_with(mul, Octonion::basis(a))).collect();
    let id = DMatrix::<f64>::identity(8, 8);
    let mut worst = 0.0_f64;
    for (a, la) in mats.iter().enumerate() {
        for (b, lb) in mats.iter().enumerate() {
            let target = if a == b { &id * -2.0 } else { DMatrix::zeros(8, 8) };
            worst = worst.max(crate::linalg::max_abs(&(la * lb + lb * la - target)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(n: usize) -> Octonion {
        Octonion::basis(n)
    }

    // Generated from an independent brute-force evaluation of the
    // Cayley-Dickson rule; any sign regression in cd_mul shows up here.
    const FROZEN_INDEX: [[usize; 8]; 8] = [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 3, 2, 5, 4, 7, 6],
        [2, 3, 0, 1, 6, 7, 4, 5],
        [3, 2, 1, 0, 7, 6, 5, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 7, 6, 1, 0, 3, 2],
        [6, 7, 4, 5, 2, 3, 0, 1],
        [7, 6, 5, 4, 3, 2, 1, 0],
    ];
    const FROZEN_SIGN: [[i8; 8]; 8] = [
        [1, 1, 1, 1, 1, 1, 1, 1],
        [1, -1, 1, -1, 1, -1, -1, 1],
        [1, -1, -1, 1, 1, 1, -1, -1],
        [1, 1, -1, -1, 1, -1, 1, -1],
        [1, -1, -1, -1, -1, 1, 1, 1],
        [1, 1, -1, 1, -1, -1, -1, 1],
        [1, 1, 1, -1, -1, 1, -1, -1],
        [1, -1, 1, 1, -1, -1, 1, -1],
    ];

    #[test]
    fn structure_table_matches_frozen_fixture() {
        let t = StructureTable::from_cayley_dickson();
        assert_eq!(t.index, FROZEN_INDEX);
        assert_eq!(t.sign, FROZEN_SIGN);
    }

    #[test]
    fn basis_products() {
        assert_eq!(e(1) * e(2), e(3));
        assert_eq!((e(1) * e(2)) * e(4), e(7));
        assert_eq!(e(1) * (e(2) * e(4)), -e(7));
        let x = Octonion([0.3, -1.0, 2.0, 0.5, 0.1, 0.0, -0.7, 4.0]);
        assert_eq!(Octonion::ONE * x, x);
        assert_eq!(x * Octonion::ONE, x);
    }

    #[test]
    fn seven_fold_on_basis() {
        assert_eq!(seven_fold_product(Octonion::ONE), -Octonion::ONE);
        assert_eq!(seven_fold_product(e(5)), -e(5));
        for n in 0..8 {
            assert!((seven_fold_product(e(n)) + e(n)).norm() < 1e-14);
        }
    }

    #[test]
    fn condition_examples() {
        let s = Octonion([0.5, 0.1, -0.3, 0.2, 0.4, -0.1, 0.6, 0.0]).normalized();
        let same = condition_x(s, s, 1e-10).unwrap();
        assert!(same.holds);
        assert_eq!(same.residual, 0.0);
        assert!(condition_x(s, -s, 1e-10).unwrap().holds);
        let c = condition_x(Octonion::ONE, e(1), 1e-10).unwrap();
        assert!(!c.holds);
        assert!((c.residual - 2.0).abs() < 1e-14);

        assert!(condition_y(s, Octonion::ONE, 1e-12).unwrap().holds);
        let y = condition_y(e(1), e(4), 1e-10).unwrap();
        assert!(!y.holds);
        assert!((y.residual - 2.0).abs() < 1e-14);
    }

    #[test]
    fn condition_y_parallel_imaginary_parts() {
        // sigma with nonzero second half, tau with Im tau parallel to Im sigma
        let s = Octonion([0.2, 0.3, -0.1, 0.4, 0.5, 0.2, -0.3, 0.1]).normalized();
        let mut im = s.0;
        im[0] = 0.0;
        let im = Octonion(im).normalized();
        let tau = (Octonion::ONE.scale(0.6) + im.scale(-0.8)).normalized();
        assert!(condition_y(s, tau, 1e-12).unwrap().holds);
    }

    #[test]
    fn non_unit_input_rejected() {
        assert!(matches!(condition_x(Octonion::ONE.scale(2.0), Octonion::ONE, 1e-10), Err(Error::Precondition(_))));
        assert!(condition_y(Octonion::ONE, Octonion::ZERO, 1e-10).is_err());
    }

    #[test]
    fn left_mult_matrices() {
        let id = left_mult_matrix(Octonion::ONE);
        assert_eq!(id, DMatrix::identity(8, 8));
        let l1 = left_mult_matrix(e(1));
        assert!(crate::linalg::max_abs(&(&l1 + l1.transpose())) < 1e-15);
        assert!(crate::linalg::max_abs(&(&l1 * &l1 + DMatrix::identity(8, 8))) < 1e-15);
        assert!(left_mult_clifford_residual(&CayleyDickson) < 1e-14);
    }

    #[test]
    fn corrupted_table_breaks_clifford_relations() {
        let bad = StructureTable::from_cayley_dickson().with_flipped_sign(3, 5);
        assert!(left_mult_clifford_residual(&bad) > 1.0);
    }

    fn octonion() -> impl Strategy<Value = Octonion> {
        prop::array::uniform8(-2.0f64..2.0).prop_map(Octonion)
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a in octonion(), b in octonion()) {
            let lhs = (a * b).norm();
            prop_assert!((lhs - a.norm() * b.norm()).abs() < 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn conjugate_gives_norm(a in octonion()) {
            let p = a * a.conj();
            prop_assert!((p - Octonion::ONE.scale(a.norm_sq())).norm() < 1e-12 * (1.0 + a.norm_sq()));
        }

        #[test]
        fn seven_fold_is_negation(a in octonion(), b in octonion()) {
            prop_assert!((seven_fold_product(a) + a).norm() < 1e-14 * (1.0 + a.norm()));
            let sum = seven_fold_product(a + b) - (seven_fold_product(a) + seven_fold_product(b));
            prop_assert!(sum.norm() < 1e-13);
        }

        #[test]
        fn table_product_agrees(a in octonion(), b in octonion()) {
            let t = StructureTable::from_cayley_dickson();
            prop_assert!((t.product(a, b) - a * b).norm() < 1e-12);
        }
    }
}
