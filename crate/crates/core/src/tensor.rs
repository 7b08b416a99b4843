//! Dense complex tensor kernels: n-mode products, outer and Kronecker
//! products, and the elementwise reductions the fingerprint code relies on.
//!
//! Axes are zero-based, so the first mode of a tensor is axis 0.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `e^{iθ}`
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// n-mode product `matrix ∘_axis tensor`: contracts the columns of `matrix`
/// against `axis` of `tensor`, so that axis takes the row count of `matrix`.
pub fn mode_product(
    matrix: ArrayView2<'_, C64>,
    tensor: ArrayView3<'_, C64>,
    axis: usize,
) -> Result<Array3<C64>> {
    if axis > 2 {
        return Err(Error::Range(format!("mode {axis} of a 3-tensor")));
    }
    let (rows, cols) = matrix.dim();
    let extent = tensor.len_of(Axis(axis));
    if cols != extent {
        return Err(Error::Shape {
            expected: vec![rows, extent],
            found: vec![rows, cols],
        });
    }
    let mut shape = [tensor.dim().0, tensor.dim().1, tensor.dim().2];
    shape[axis] = rows;
    let mut out = Array3::<C64>::zeros(shape);
    // Each fiber along `axis` is multiplied by the matrix.
    for (mut dst, src) in out
        .lanes_mut(Axis(axis))
        .into_iter()
        .zip(tensor.lanes(Axis(axis)))
    {
        for (i, row) in matrix.rows().into_iter().enumerate() {
            dst[i] = row.iter().zip(src.iter()).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

/// Outer product `u • v • w` of three vectors.
pub fn outer3(u: ArrayView1<'_, C64>, v: ArrayView1<'_, C64>, w: ArrayView1<'_, C64>) -> Array3<C64> {
    Array3::from_shape_fn((u.len(), v.len(), w.len()), |(a, b, c)| u[a] * v[b] * w[c])
}

/// Kronecker product of two vectors; element `i·len(b) + j` is `a[i]·b[j]`.
pub fn kron_vec(a: ArrayView1<'_, C64>, b: ArrayView1<'_, C64>) -> Array1<C64> {
    let n = b.len();
    Array1::from_shape_fn(a.len() * n, |k| a[k / n] * b[k % n])
}

pub fn kron(a: ArrayView2<'_, C64>, b: ArrayView2<'_, C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Conjugate transpose.
pub fn hermitian(m: ArrayView2<'_, C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Matrix product for complex matrices.
pub fn matmul(a: ArrayView2<'_, C64>, b: ArrayView2<'_, C64>) -> Result<Array2<C64>> {
    let (n, k) = a.dim();
    let (k2, m) = b.dim();
    if k != k2 {
        return Err(Error::Shape {
            expected: vec![k, m],
            found: vec![k2, m],
        });
    }
    let mut out = Array2::<C64>::zeros((n, m));
    for i in 0..n {
        for l in 0..k {
            let ail = a[(i, l)];
            if ail == ZERO {
                continue;
            }
            for j in 0..m {
                out[(i, j)] += ail * b[(l, j)];
            }
        }
    }
    Ok(out)
}

pub fn matvec(a: ArrayView2<'_, C64>, x: ArrayView1<'_, C64>) -> Array1<C64> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().zip(x.iter()).map(|(p, q)| p * q).sum())
        .collect()
}

/// `⟨a, b⟩ = Σ a_i · conj(b_i)`.
pub fn inner(a: ArrayView1<'_, C64>, b: ArrayView1<'_, C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// `Sum{a ⊙ b*}` over any pair of equally shaped complex arrays.
pub fn sum_conj_product<'a, I>(a: I, b: I) -> C64
where
    I: IntoIterator<Item = &'a C64>,
{
    a.into_iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn frobenius(t: ArrayView3<'_, C64>) -> f64 {
    t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry of `|m^H m − I|`.
pub fn unitarity_defect(m: ArrayView2<'_, C64>) -> f64 {
    let (n, k) = m.dim();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let dot: C64 = (0..n).map(|r| m[(r, i)].conj() * m[(r, j)]).sum();
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}
