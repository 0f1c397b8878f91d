//! Structured dense linear algebra: the closed-form SVD of the lower
//! triangular ones matrix, Kronecker helpers and a normal-equations
//! pseudoinverse used as a slow reference.

use ndarray::{Array1, Array2, LinalgScalar};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Dense row-major matrix. Complex entries are `num_complex::Complex64`,
/// which is laid out as interleaved `(re, im)`.
pub type DenseMatrix<T> = Array2<T>;

/// Closed-form SVD `1_L = U diag(sigma) V^T` of the `n x n` lower-triangular
/// all-ones matrix.
///
/// Column `s` of `u`/`v` pairs with `sigmas[s]`; singular values are strictly
/// decreasing in `s`.
#[derive(Debug, Clone)]
pub struct TriangularSvd {
    pub n: usize,
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    pub sigmas: Array1<f64>,
}

impl TriangularSvd {
    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let us = &self.u * &self.sigmas.view().insert_axis(ndarray::Axis(0));
        us.dot(&self.v.t())
    }
}

pub fn triangular_svd(n: usize) -> Result<TriangularSvd> {
    if n == 0 {
        return Err(Error::InvalidSize("triangular SVD needs n >= 1".into()));
    }
    let nf = n as f64;
    let half_n = nf + 0.5;
    let scale = 1.0 / (nf / 2.0 + 0.25).sqrt();

    let u = Array2::from_shape_fn((n, n), |(t, s)| {
        let arg = (s as f64 + 0.5) * (t as f64 + 1.0) / half_n * PI;
        scale * arg.sin()
    });
    let v = Array2::from_shape_fn((n, n), |(t, s)| {
        let arg = (s as f64 + 0.5) * (t as f64 + 0.5) / half_n * PI;
        scale * arg.cos()
    });
    let sigmas = Array1::from_shape_fn(n, |s| {
        let theta = (s as f64 + 0.5) / half_n * PI;
        (2.0 - 2.0 * theta.cos()).powf(-0.5)
    });
    Ok(TriangularSvd { n, u, v, sigmas })
}

/// Lower-triangular all-ones matrix: entry `(i, j)` is 1 iff `i >= j`.
pub fn ones_lower(n: usize) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::InvalidSize("ones_lower needs n >= 1".into()));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| if i >= j { 1.0 } else { 0.0 }))
}

/// Pseudoinverse `(M^T M)^{-1} M^T` of a full-column-rank real matrix via a
/// dense Cholesky factorisation of the normal matrix.
///
/// This is `O(cols^3)` and only meant as an oracle for small problems.
pub fn pinv_naive(m: &Array2<f64>) -> Result<Array2<f64>> {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidSize("pinv_naive on an empty matrix".into()));
    }
    if rows < cols {
        return Err(Error::RankDeficient { column: rows, pivot: 0.0 });
    }
    let gram = m.t().dot(m);
    let l = cholesky(&gram)?;
    // Solve (L L^T) P = M^T column by column of M^T.
    let mut rhs = m.t().to_owned();
    for mut col in rhs.columns_mut() {
        // forward substitution L z = b
        for i in 0..cols {
            let mut acc = col[i];
            for k in 0..i {
                acc -= l[[i, k]] * col[k];
            }
            col[i] = acc / l[[i, i]];
        }
        // back substitution L^T x = z
        for i in (0..cols).rev() {
            let mut acc = col[i];
            for k in i + 1..cols {
                acc -= l[[k, i]] * col[k];
            }
            col[i] = acc / l[[i, i]];
        }
    }
    Ok(rhs)
}

fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    // Relative pivot floor: anything at round-off level of the diagonal is
    // treated as a rank defect.
    let floor = a.diag().iter().fold(0.0f64, |acc, v| acc.max(v.abs())) * 1e-13;
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > floor) {
            return Err(Error::RankDeficient { column: j, pivot: d });
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut acc = a[[i, j]];
            for k in 0..j {
                acc -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = acc / d;
        }
    }
    Ok(l)
}

/// Evaluates `(A^T ⊗ B) vec(C)` reshaped back to a matrix, i.e. `B C A`,
/// without forming the Kronecker product.
pub fn apply_kron_pair<T: LinalgScalar>(
    b: &Array2<T>,
    a: &Array2<T>,
    c: &Array2<T>,
) -> Result<Array2<T>> {
    if b.ncols() != c.nrows() || c.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "B is {:?}, C is {:?}, A is {:?}",
            b.dim(),
            c.dim(),
            a.dim()
        )));
    }
    Ok(b.dot(c).dot(a))
}

/// Explicit Kronecker product `a ⊗ b`.
pub fn kron<T: LinalgScalar>(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[[i / br, j / bc]] * b[[i % br, j % bc]]
    })
}

/// Column-stacking `vec(.)`.
pub fn vec_col<T: Copy>(x: &Array2<T>) -> Array1<T> {
    x.t().iter().copied().collect()
}

/// Inverse of [`vec_col`].
pub fn unvec_col<T: Copy>(v: &Array1<T>, rows: usize, cols: usize) -> Result<Array2<T>> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape {} entries into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| v[j * rows + i]))
}

/// `left · c · right` for real outer factors and a complex middle factor,
/// done as two real products so the BLAS-style kernels are used.
pub fn real_sandwich(
    left: &Array2<f64>,
    c: &Array2<Complex64>,
    right: &Array2<f64>,
) -> Array2<Complex64> {
    let re = c.mapv(|z| z.re);
    let im = c.mapv(|z| z.im);
    let re = left.dot(&re).dot(right);
    let im = left.dot(&im).dot(right);
    let mut out = Array2::zeros(re.dim());
    ndarray::Zip::from(&mut out)
        .and(&re)
        .and(&im)
        .for_each(|o, &r, &i| *o = Complex64::new(r, i));
    out
}

/// Real matrix times complex vector.
pub fn real_matvec(m: &Array2<f64>, x: &Array1<Complex64>) -> Array1<Complex64> {
    let re = m.dot(&x.mapv(|z| z.re));
    let im = m.dot(&x.mapv(|z| z.im));
    re.iter()
        .zip(im.iter())
        .map(|(&r, &i)| Complex64::new(r, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn rejects_zero_size() {
        assert!(triangular_svd(0).is_err());
        assert!(ones_lower(0).is_err());
    }

    #[test]
    fn svd_of_one_by_one() {
        let svd = triangular_svd(1).unwrap();
        assert_abs_diff_eq!(svd.sigmas[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(svd.u[[0, 0]] * svd.v[[0, 0]], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(svd.reconstruct()[[0, 0]], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_of_two_by_two_is_golden() {
        // Eigenvalues of [[1,0],[1,1]]^T [[1,0],[1,1]] = [[2,1],[1,1]] solve
        // l^2 - 3 l + 1 = 0.
        let disc: f64 = 5.0;
        let l_hi = (3.0 + disc.sqrt()) / 2.0;
        let l_lo = (3.0 - disc.sqrt()) / 2.0;
        let svd = triangular_svd(2).unwrap();
        assert_abs_diff_eq!(svd.sigmas[0], l_hi.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(svd.sigmas[1], l_lo.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(svd.sigmas[0], 1.618_033_988_749_895, epsilon = 1e-12);
    }

    #[test]
    fn svd_reconstructs_at_64() {
        let n = 64;
        let svd = triangular_svd(n).unwrap();
        let err = max_abs(&(svd.reconstruct() - ones_lower(n).unwrap()));
        assert!(err <= 1e-10 * n as f64, "{err}");
    }

    #[test]
    fn ones_lower_small() {
        assert_eq!(ones_lower(1).unwrap(), array![[1.0]]);
        assert_eq!(ones_lower(2).unwrap(), array![[1.0, 0.0], [1.0, 1.0]]);
        let sums: Vec<f64> = ones_lower(3).unwrap().rows().into_iter().map(|r| r.sum()).collect();
        assert_eq!(sums, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pinv_of_identity_and_stack() {
        let i4 = Array2::<f64>::eye(4);
        assert_abs_diff_eq!(pinv_naive(&i4).unwrap(), i4, epsilon = 1e-14);

        let k = 3;
        let mut stacked = Array2::<f64>::zeros((2 * k, k));
        for i in 0..k {
            stacked[[i, i]] = 1.0;
            stacked[[k + i, i]] = 1.0;
        }
        let p = pinv_naive(&stacked).unwrap();
        assert_abs_diff_eq!(p, stacked.t().mapv(|v| 0.5 * v), epsilon = 1e-14);
    }

    #[test]
    fn pinv_of_dual_system_n2() {
        let l = ones_lower(2).unwrap();
        let top = kron(&l, &l);
        let mut m = Array2::<f64>::zeros((8, 4));
        m.slice_mut(ndarray::s![0..4, ..]).assign(&top);
        m.slice_mut(ndarray::s![4..8, ..]).assign(&Array2::eye(4));
        let p = pinv_naive(&m).unwrap();
        assert_abs_diff_eq!(p.dot(&m), Array2::eye(4), epsilon = 1e-10);
    }

    #[test]
    fn pinv_detects_rank_deficiency() {
        let m = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        assert!(matches!(pinv_naive(&m), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn kron_pair_trivial_cases() {
        let c = array![[1.0, 2.0], [3.0, 4.0]];
        let i = Array2::<f64>::eye(2);
        assert_eq!(apply_kron_pair(&i, &i, &c).unwrap(), c);
        let z = Array2::<f64>::zeros((2, 2));
        assert_eq!(apply_kron_pair(&c, &c, &z).unwrap(), z);
        assert!(apply_kron_pair(&c, &c, &Array2::<f64>::zeros((3, 2))).is_err());
    }

    #[test]
    fn vec_is_column_major() {
        let x = array![[1, 2], [3, 4]];
        assert_eq!(vec_col(&x).to_vec(), vec![1, 3, 2, 4]);
        assert_eq!(unvec_col(&vec_col(&x), 2, 2).unwrap(), x);
    }
}
