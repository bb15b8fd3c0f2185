//! Dense helpers shared by the geometry modules.
//!
//! Everything here works on `nalgebra` dynamic matrices; the sizes in play are
//! at most 64x64, so no attempt is made at blocking or sparsity.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = symmetrize(a);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(a).0.iter().copied().collect()
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn fro_sq(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// Frobenius inner product `trace(a b^T)`.
pub fn fro_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Orthonormal basis (columns) of the span of `vectors`, dropping directions
/// whose residual after projection falls below `tol`.
pub fn orthonormalize(vectors: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = vectors.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for j in 0..vectors.ncols() {
        let mut v: DVector<f64> = vectors.column(j).into_owned();
        // two passes of classical Gram-Schmidt keep the basis orthonormal to ~1e-16
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > tol {
            basis.push(v / norm);
        }
    }
    let mut out = DMatrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column span of `w`.
///
/// `w` is expected to have orthonormal columns.
pub fn orthonormal_complement(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let k = w.ncols();
    let mut stacked = DMatrix::zeros(n, k + n);
    stacked.view_mut((0, 0), (n, k)).copy_from(w);
    stacked.view_mut((0, k), (n, n)).copy_from(&DMatrix::identity(n, n));
    let all = orthonormalize(&stacked, 1e-8);
    all.columns(k, all.ncols() - k).into_owned()
}

/// Orthonormal basis of `{v : q v = sign * v}` for a symmetric involution `q`.
pub fn involution_eigenspace(q: &DMatrix<f64>, sign: f64) -> DMatrix<f64> {
    let n = q.nrows();
    let proj = (DMatrix::identity(n, n) + q * sign) * 0.5;
    let (vals, vecs) = sym_eigen(&proj);
    let cols: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        out.set_column(j, &vecs.column(i));
    }
    out
}

/// Largest principal angle between the column spans of two orthonormal bases
/// of equal dimension. Computed through the sine so small angles stay accurate.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 && b.ncols() == 0 {
        return 0.0;
    }
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    let residual = b - a * (a.transpose() * b);
    let s = residual.singular_values().max().min(1.0);
    s.asin()
}

/// Orthonormal basis of the kernel of a symmetric operator: eigenvectors whose
/// eigenvalue magnitude is below `threshold`.
pub fn symmetric_kernel(a: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(a);
    let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < threshold).collect();
    let mut out = DMatrix::zeros(a.nrows(), cols.len());
    for (j, &i) in cols.iter().enumerate() {
        out.set_column(j, &vecs.column(i));
    }
    out
}

pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Haar-ish random orthogonal matrix (Gram-Schmidt of a Gaussian matrix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_iterator(n, n, (0..n * n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let q = orthonormalize(&g, 1e-6);
        if q.ncols() == n {
            return q;
        }
    }
}

/// `max |B^T B - I|` for a basis stored column-wise.
pub fn orthonormality_residual(b: &DMatrix<f64>) -> f64 {
    let k = b.ncols();
    max_abs(&(b.transpose() * b - DMatrix::identity(k, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigenvalues_sorted() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5]);
        let vals = sym_eigenvalues(&a);
        assert_eq!(vals.len(), 3);
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = orthonormalize(&DMatrix::from_fn(10, 3, |_, _| rng.random::<f64>() - 0.5), 1e-10);
        let c = orthonormal_complement(&w);
        assert_eq!(c.ncols(), 7);
        assert!(orthonormality_residual(&c) < 1e-13);
        assert!(max_abs(&(w.transpose() * &c)) < 1e-13);
    }

    #[test]
    fn principal_angle_of_rotated_line() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let t: f64 = 0.3;
        let b = DMatrix::from_column_slice(2, 1, &[t.cos(), t.sin()]);
        assert!((max_principal_angle(&a, &b) - t).abs() < 1e-14);
        assert!(max_principal_angle(&a, &a) < 1e-15);
    }

    #[test]
    fn involution_eigenspace_of_diag() {
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let e = involution_eigenspace(&q, 1.0);
        assert_eq!(e.ncols(), 1);
        assert!((e[(0, 0)].abs() - 1.0).abs() < 1e-15);
    }
}
