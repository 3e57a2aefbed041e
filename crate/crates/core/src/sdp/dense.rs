//! Dense symmetric kernels for the solver's cached linear system.

use crate::linalg::Matrix;

/// Below this size the inverse comes straight from a Cholesky factor.
const BASE: usize = 96;

/// Inverse of a symmetric positive definite matrix by recursive Schur
/// complements, so nearly all work runs through matrix products.
/// Returns `None` if a pivot block is not positive definite.
pub fn spd_inverse(k: &Matrix) -> Option<Matrix> {
    let n = k.nrows();
    if n <= BASE {
        return k.clone().cholesky().map(|c| c.inverse());
    }
    let h = n / 2;
    let a = k.view((0, 0), (h, h)).into_owned();
    let b = k.view((0, h), (h, n - h)).into_owned();
    let c = k.view((h, h), (n - h, n - h)).into_owned();
    let ai = spd_inverse(&a)?;
    let w = &ai * &b;
    let mut s = c - b.transpose() * &w;
    s = (&s + s.transpose()) * 0.5;
    let si = spd_inverse(&s)?;
    let wsi = &w * &si;
    let mut out = Matrix::zeros(n, n);
    let mut tl = ai;
    tl.gemm(1.0, &wsi, &w.transpose(), 1.0);
    out.view_mut((0, 0), (h, h)).copy_from(&tl);
    out.view_mut((0, h), (h, n - h)).copy_from(&(-&wsi));
    out.view_mut((h, 0), (n - h, h)).copy_from(&(-wsi.transpose()));
    out.view_mut((h, h), (n - h, n - h)).copy_from(&si);
    Some(out)
}

/// Upper triangle of a symmetric matrix, column-major.
pub struct PackedSym {
    n: usize,
    data: Vec<f64>,
}

impl PackedSym {
    pub fn from_dense(a: &Matrix) -> Self {
        let n = a.nrows();
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in 0..j {
                data.push(0.5 * (a[(i, j)] + a[(j, i)]));
            }
            data.push(a[(j, j)]);
        }
        Self { n, data }
    }

    /// `y = A x`, reading each stored entry once.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        let mut off = 0;
        for j in 0..self.n {
            let col = &self.data[off..off + j + 1];
            let xj = x[j];
            let mut acc = 0.0;
            let head = &mut y[..j];
            for ((yi, &a), &xi) in head.iter_mut().zip(&col[..j]).zip(&x[..j]) {
                *yi += a * xj;
                acc += a * xi;
            }
            y[j] += acc + col[j] * xj;
            off += j + 1;
        }
    }
}
