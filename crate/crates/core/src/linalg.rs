//! Dense helpers shared by every module: Hermitian bases, sorted
//! eigendecompositions, rank-thresholded solves and small utilities.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Orthonormal Hermitian basis of `d x d` matrices under `Tr[A B]`.
///
/// Order: `I/sqrt(d)`, then the real symmetric off-diagonal elements for
/// `j < k` in lexicographic order, then the imaginary antisymmetric ones in
/// the same order, then the traceless diagonal elements. For `d = 2` this is
/// `{I, X, Y, Z} / sqrt(2)`.
pub fn gell_mann_basis(d: usize) -> Vec<CMatrix> {
    assert!(d >= 1, "Hilbert dimension must be positive");
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(d * d);
    out.push(CMatrix::from_diagonal_element(
        d,
        d,
        C64::new(1.0 / (d as f64).sqrt(), 0.0),
    ));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = CMatrix::from_element(d, d, zero);
        m[(j, k)] = C64::new(s, 0.0);
        m[(k, j)] = C64::new(s, 0.0);
        out.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::from_element(d, d, zero);
        m[(j, k)] = C64::new(0.0, -s);
        m[(k, j)] = C64::new(0.0, s);
        out.push(m);
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::from_element(d, d, zero);
        for i in 0..l {
            m[(i, i)] = C64::new(1.0 / norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) / norm, 0.0);
        out.push(m);
    }
    out
}

/// `Tr[A B]` for complex matrices.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Eigenvalues and eigenvectors of a real symmetric matrix, sorted by
/// decreasing eigenvalue. Eigenvector signs follow the solver.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, sorted decreasing.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    hermitian_eigen(h).0
}

/// Eigenvalues (decreasing) and matching unit eigenvectors of a Hermitian
/// matrix.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).iter().map(|x| x.abs()).sum()
}

/// Singular-value decomposition summary with a relative rank threshold:
/// singular values below `rel_tol * sigma_max` count as zero.
#[derive(Debug, Clone)]
pub struct RankedSvd {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub threshold: f64,
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl RankedSvd {
    pub fn new(m: &DMatrix<f64>, rel_tol: f64) -> Self {
        let svd = SVD::new(m.clone(), true, true);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let threshold = rel_tol * sigma_max;
        let mut singular_values: Vec<f64> = svd.singular_values.iter().cloned().collect();
        singular_values.sort_by(|a, b| b.total_cmp(a));
        let rank = if sigma_max == 0.0 {
            0
        } else {
            singular_values.iter().filter(|&&s| s > threshold).count()
        };
        Self {
            singular_values,
            rank,
            threshold,
            svd,
        }
    }

    /// Moore-Penrose pseudo-inverse using the stored threshold.
    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        let u = self.svd.u.as_ref().expect("u computed");
        let v_t = self.svd.v_t.as_ref().expect("v_t computed");
        let k = self.svd.singular_values.len();
        let mut out = DMatrix::zeros(v_t.ncols(), u.nrows());
        for i in 0..k {
            let s = self.svd.singular_values[i];
            if s > self.threshold && s > 0.0 {
                out += (v_t.row(i).transpose() * u.column(i).transpose()) / s;
            }
        }
        out
    }

    /// Right singular vectors belonging to singular values at or below the
    /// threshold, padded with the complement when the matrix is wide.
    pub fn null_space(&self) -> Vec<DVector<f64>> {
        let v_t = self.svd.v_t.as_ref().expect("v_t computed");
        let ncols = v_t.ncols();
        let mut kept: Vec<DVector<f64>> = Vec::new();
        for i in 0..self.svd.singular_values.len() {
            if self.svd.singular_values[i] <= self.threshold {
                kept.push(v_t.row(i).transpose());
            }
        }
        // Wide matrices: thin SVD omits part of the null space.
        if self.svd.singular_values.len() < ncols {
            let rows: Vec<DVector<f64>> = (0..self.svd.singular_values.len())
                .map(|i| v_t.row(i).transpose())
                .collect();
            for e in 0..ncols {
                let mut v = DVector::zeros(ncols);
                v[e] = 1.0;
                for r in rows.iter().chain(kept.iter()) {
                    let c = r.dot(&v);
                    v -= r * c;
                }
                let norm = v.norm();
                if norm > 1e-8 {
                    kept.push(v / norm);
                }
                if rows.len() + kept.len() >= ncols {
                    break;
                }
            }
        }
        kept
    }
}

/// Rank with singular values below `rel_tol * sigma_max` treated as zero.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    RankedSvd::new(m, rel_tol).rank
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Row-major flattening: `vec(T)[k * ncols + l] = T[(k, l)]`.
pub fn vec_row_major(m: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |i, _| m[(i / c, i % c)])
}

pub fn unvec_row_major(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |k, l| v[k * cols + l])
}

/// Kronecker product of two vectors with row-major index `i * len(b) + j`.
pub fn kron_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Symmetric square root and inverse square root of a positive definite
/// matrix, restricted to eigenvalues above `floor`.
pub fn psd_sqrt_pair(m: &DMatrix<f64>, floor: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (vals, vecs) = symmetric_eigen(m);
    let n = m.nrows();
    let mut sqrt = DMatrix::zeros(n, n);
    let mut inv_sqrt = DMatrix::zeros(n, n);
    for i in 0..n {
        if vals[i] > floor {
            let col = vecs.column(i);
            let proj = col * col.transpose();
            sqrt += &proj * vals[i].sqrt();
            inv_sqrt += &proj / vals[i].sqrt();
        }
    }
    (sqrt, inv_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gell_mann_is_orthonormal_and_hermitian() {
        for d in 2..=4 {
            let basis = gell_mann_basis(d);
            assert_eq!(basis.len(), d * d);
            for (i, a) in basis.iter().enumerate() {
                assert!((a - a.adjoint()).norm() < 1e-15);
                for (j, b) in basis.iter().enumerate() {
                    let t = trace_product(a, b);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((t.re - expected).abs() < 1e-14, "d={d} i={i} j={j}");
                    assert!(t.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn qubit_basis_is_scaled_paulis() {
        let b = gell_mann_basis(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b[1][(0, 1)].re - s).abs() < 1e-15);
        assert!((b[2][(0, 1)].im + s).abs() < 1e-15);
        assert!((b[2][(1, 0)].im - s).abs() < 1e-15);
        assert!((b[3][(1, 1)].re + s).abs() < 1e-15);
    }

    #[test]
    fn pseudo_inverse_solves_full_rank() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let svd = RankedSvd::new(&m, 1e-10);
        assert_eq!(svd.rank, 3);
        let p = svd.pseudo_inverse();
        assert!((&m * p - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_null_space() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let svd = RankedSvd::new(&m, 1e-10);
        assert_eq!(svd.rank, 2);
        let null = svd.null_space();
        assert_eq!(null.len(), 1);
        assert!((&m * &null[0]).norm() < 1e-12);
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 3.0]));
        let (vals, _) = symmetric_eigen(&m);
        assert_eq!(vals.as_slice(), &[3.0, 1.0, -2.0]);
    }
}
