//! Dense complex linear algebra helpers shared by every module.
//!
//! Tensor products of coordinate spaces are flattened row-major: the basis
//! vector `e_i ⊗ f_j` of `ℂ^m ⊗ ℂ^n` has index `i * n + j`.

use ndarray::{s, Array1, Array2, ArrayBase, ArrayView2, Axis, Data, Ix2};
use faer::{MatMut, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = Array2<C64>;
pub type Vector = Array1<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// `A B`. Large products go through faer's gemm, small ones through ndarray.
pub fn mm<S1, S2>(a: &ArrayBase<S1, Ix2>, b: &ArrayBase<S2, Ix2>) -> Mat
where
    S1: Data<Elem = C64>,
    S2: Data<Elem = C64>,
{
    let (m, k) = a.dim();
    let n = b.ncols();
    assert_eq!(k, b.nrows(), "mm shape");
    if m * k * n < 32 * 32 * 32 {
        let out = a.dot(b);
        // callers reshape products, which needs row-major storage
        return if out.is_standard_layout() {
            out
        } else {
            out.as_standard_layout().into_owned()
        };
    }
    let a = a.as_standard_layout();
    let b = b.as_standard_layout();
    let mut out = Mat::zeros((m, n));
    // SAFETY: all three arrays are in standard (row-major, contiguous) layout
    // with the advertised shapes and outlive the views.
    unsafe {
        let fa = MatRef::<C64>::from_raw_parts(a.as_ptr(), m, k, k as isize, 1);
        let fb = MatRef::<C64>::from_raw_parts(b.as_ptr(), k, n, n as isize, 1);
        let fo = MatMut::<C64>::from_raw_parts_mut(out.as_mut_ptr(), m, n, n as isize, 1);
        faer::linalg::matmul::matmul(fo, faer::Accum::Replace, fa, fb, ONE, faer::Par::Seq);
    }
    out
}

/// Method form of [`mm`].
pub trait MatMul {
    fn mmul<S: Data<Elem = C64>>(&self, b: &ArrayBase<S, Ix2>) -> Mat;
}

impl<S1: Data<Elem = C64>> MatMul for ArrayBase<S1, Ix2> {
    fn mmul<S: Data<Elem = C64>>(&self, b: &ArrayBase<S, Ix2>) -> Mat {
        mm(self, b)
    }
}

fn to_faer(a: &Mat) -> faer::Mat<C64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn to_faer_real(a: &Mat) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]].re)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn eye(n: usize) -> Mat {
    Array2::eye(n)
}

pub fn adjoint(a: &Mat) -> Mat {
    a.t().mapv(|z| z.conj())
}

pub fn adjoint_view(a: ArrayView2<C64>) -> Mat {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Mat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            let mut block = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &bv| *o = aij * bv);
        }
    }
    out
}

/// `(A ⊗ 1_n) X`.
pub fn kron_id_right(a: &Mat, n: usize, x: &Mat) -> Mat {
    let (rows, cols) = x.dim();
    assert_eq!(rows, a.ncols() * n, "kron_id_right shape");
    let xr = x
        .to_shape((a.ncols(), n * cols))
        .expect("contiguous reshape")
        .to_owned();
    let y = mm(a, &xr);
    y.into_shape_with_order((a.nrows() * n, cols)).expect("reshape")
}

/// `(1_d ⊗ B) X`.
pub fn kron_id_left(d: usize, b: &Mat, x: &Mat) -> Mat {
    let (rows, cols) = x.dim();
    let inner = b.ncols();
    assert_eq!(rows, d * inner, "kron_id_left shape");
    let out_inner = b.nrows();
    let mut out = Mat::zeros((d * out_inner, cols));
    for k in 0..d {
        let blk = x.slice(s![k * inner..(k + 1) * inner, ..]);
        out.slice_mut(s![k * out_inner..(k + 1) * out_inner, ..])
            .assign(&mm(b, &blk));
    }
    out
}

/// `(A ⊗ B) X` without forming the Kronecker product.
pub fn kron_apply(a: &Mat, b: &Mat, x: &Mat) -> Mat {
    let y = kron_id_left(a.ncols(), b, x);
    kron_id_right(a, b.nrows(), &y)
}

/// `(A ⊗ B) v` for a vector, via `A V Bᵀ` on the reshaped vector.
pub fn kron_apply_vec(a: &Mat, b: &Mat, v: &Vector) -> Vector {
    let m = v
        .to_shape((a.ncols(), b.ncols()))
        .expect("vector reshape")
        .to_owned();
    let out = mm(&mm(a, &m), &b.t());
    Array1::from_iter(out.iter().cloned())
}

/// Reshape a vector of `H_a ⊗ H_b` into the `d_a × d_b` coefficient matrix.
pub fn vec_to_mat(v: &Vector, rows: usize, cols: usize) -> Mat {
    v.to_shape((rows, cols)).expect("vector reshape").to_owned()
}

pub fn mat_to_vec(m: &Mat) -> Vector {
    Array1::from_iter(m.iter().cloned())
}

/// Matrix of the flip `H_a ⊗ H_b → H_b ⊗ H_a`.
pub fn flip_matrix(da: usize, db: usize) -> Mat {
    let mut f = Mat::zeros((da * db, da * db));
    for i in 0..da {
        for j in 0..db {
            f[[j * da + i, i * db + j]] = ONE;
        }
    }
    f
}

/// Apply the flip `H_a ⊗ H_b → H_b ⊗ H_a` to the rows of `x`.
pub fn flip_rows(x: &Mat, da: usize, db: usize) -> Mat {
    let cols = x.ncols();
    assert_eq!(x.nrows(), da * db);
    let mut out = Mat::zeros((da * db, cols));
    for i in 0..da {
        for j in 0..db {
            out.row_mut(j * da + i).assign(&x.row(i * db + j));
        }
    }
    out
}

pub fn is_real(a: &Mat) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

pub fn real_part(a: &Mat) -> Array2<f64> {
    a.mapv(|z| z.re)
}

pub fn complexify(a: &Array2<f64>) -> Mat {
    a.mapv(re)
}

pub fn fro_norm(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &Vector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &Vector, b: &Vector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn trace(a: &Mat) -> C64 {
    a.diag().sum()
}

/// Operator norm (largest singular value).
pub fn opnorm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Decompositions run sequentially: faer's default follows the rayon pool
/// size, which changes rounding with `--jobs`.
fn sequential() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Singular values in decreasing order.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    sequential();
    if a.is_empty() {
        return Vec::new();
    }
    let mut s = if is_real(a) {
        to_faer_real(a).singular_values().expect("svd")
    } else {
        to_faer(a).singular_values().expect("svd")
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthonormal basis of the column span of `a`, dropping singular values
/// below `tol` times the largest.
pub fn range_basis(a: &Mat, tol: f64) -> Mat {
    let (w, v) = herm_eig(&mm(a, &adjoint(a)));
    let top = w.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..w.len())
        .filter(|&i| w[i] > (tol * tol) * top && w[i] > 0.0)
        .collect();
    v.select(Axis(1), &keep)
}

fn hermitize(a: &Mat) -> Mat {
    let mut h = a + &adjoint(a);
    h.mapv_inplace(|z| z * 0.5);
    h
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Real symmetric input takes the real path.
pub fn herm_eig(a: &Mat) -> (Vec<f64>, Mat) {
    sequential();
    let h = hermitize(a);
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros((0, 0)));
    }
    if is_real(&h) {
        let e = to_faer_real(&h).self_adjoint_eigen(Side::Lower).expect("eigh");
        let s = e.S().column_vector();
        let u = e.U();
        let w = (0..n).map(|i| s[i]).collect();
        (w, Mat::from_shape_fn((n, n), |(i, j)| re(u[(i, j)])))
    } else {
        let e = to_faer(&h).self_adjoint_eigen(Side::Lower).expect("eigh");
        let s = e.S().column_vector();
        let u = e.U();
        let w = (0..n).map(|i| s[i].re).collect();
        (w, Mat::from_shape_fn((n, n), |(i, j)| u[(i, j)]))
    }
}

pub fn herm_eigvals(a: &Mat) -> Vec<f64> {
    sequential();
    let h = hermitize(a);
    if h.is_empty() {
        return Vec::new();
    }
    let mut w: Vec<f64> = if is_real(&h) {
        to_faer_real(&h).self_adjoint_eigenvalues(Side::Lower).expect("eigvalsh")
    } else {
        to_faer(&h)
            .self_adjoint_eigenvalues(Side::Lower)
            .expect("eigvalsh")
    };
    w.sort_by(f64::total_cmp);
    w
}

/// `f(A)` for Hermitian `A` through its spectral decomposition.
pub fn herm_fn(a: &Mat, f: impl Fn(f64) -> C64) -> Mat {
    let (w, v) = herm_eig(a);
    let mut vf = v.clone();
    for (j, &lam) in w.iter().enumerate() {
        let fl = f(lam);
        vf.column_mut(j).mapv_inplace(|z| z * fl);
    }
    vf.mmul(&adjoint(&v))
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `x`, which must have full column rank.
///
/// Householder reflectors `H_1 ... H_r` triangularise `X`; the trailing
/// `m - r` columns of `H_1 ... H_r = 1 - V T V*` span `ker X*`.
pub fn complement_basis(x: &Mat) -> Result<Mat> {
    let (m, r) = x.dim();
    if r == 0 {
        return Ok(eye(m));
    }
    if r > m {
        return Err(Error::Numerical(format!(
            "complement of a {m}x{r} matrix is empty"
        )));
    }
    let scale = max_abs(x).max(f64::MIN_POSITIVE);
    let mut a = x.clone();
    // unit reflector vectors, zero above the diagonal; each H_j = 1 - 2 v v*
    let mut refl = Mat::zeros((m, r));
    for j in 0..r {
        let col = a.slice(s![j.., j]).to_owned();
        let alpha = col[0];
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale {
            return Err(Error::Numerical("complement of a rank-deficient matrix".into()));
        }
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { ONE };
        let mut v = col;
        v[0] += phase * norm;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.mapv_inplace(|z| z / vn);
        refl.slice_mut(s![j.., j]).assign(&v);
        if j + 1 < r {
            let v = v.into_shape_with_order((m - j, 1)).expect("column");
            let mut blk = a.slice_mut(s![j.., j + 1..]);
            let w = adjoint(&v).dot(&blk);
            blk -= &v.dot(&w).mapv(|z| z * 2.0);
        }
    }
    // triangular factor: T_jj = 2, T[..j, j] = -2 T[..j, ..j] V[:, ..j]* v_j
    let gram = mm(&adjoint(&refl), &refl);
    let mut t = Mat::zeros((r, r));
    for j in 0..r {
        t[[j, j]] = re(2.0);
        if j > 0 {
            let g = gram.slice(s![..j, j]).to_owned();
            let col = t.slice(s![..j, ..j]).dot(&g).mapv(|z| z * -2.0);
            t.slice_mut(s![..j, j]).assign(&col);
        }
    }
    // W = E - V T (V[r.., :])* with E the trailing identity columns
    let tail = adjoint(&refl.slice(s![r.., ..]).to_owned());
    let mut w = mm(&refl, &mm(&t, &tail)).mapv(|z| -z);
    for k in 0..m - r {
        w[[r + k, k]] += ONE;
    }
    Ok(w)
}

/// Multiply by a phase so that the entry of largest modulus is real
/// positive. Entries within a relative `1e-9` of the maximum count as tied
/// and the first one in row-major order wins.
pub fn fix_phase(a: &mut Mat) {
    let max = max_abs(a);
    if max == 0.0 {
        return;
    }
    let pivot = a
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .copied()
        .expect("nonempty");
    let phase = pivot.conj() / pivot.norm();
    a.mapv_inplace(|z| z * phase);
}

/// `(id ⊗ ω)(X)` for `X` on `H_a ⊗ H_b` and `ω(B) = Tr(W B)`.
pub fn partial_trace_right(x: &Mat, da: usize, db: usize, w: &Mat) -> Mat {
    let mut out = Mat::zeros((da, da));
    for i in 0..da {
        for k in 0..da {
            let blk = x.slice(s![i * db..(i + 1) * db, k * db..(k + 1) * db]);
            let mut acc = ZERO;
            for (u, row) in w.axis_iter(Axis(0)).enumerate() {
                for (v, wv) in row.iter().enumerate() {
                    acc += wv * blk[[v, u]];
                }
            }
            out[[i, k]] = acc;
        }
    }
    out
}

/// `(ω ⊗ id)(X)` for `X` on `H_a ⊗ H_b` and `ω(A) = Tr(W A)`.
pub fn partial_trace_left(x: &Mat, da: usize, db: usize, w: &Mat) -> Mat {
    let mut out = Mat::zeros((db, db));
    for u in 0..da {
        for v in 0..da {
            let wv = w[[v, u]];
            if wv == ZERO {
                continue;
            }
            let blk = x.slice(s![u * db..(u + 1) * db, v * db..(v + 1) * db]);
            out.scaled_add(wv, &blk);
        }
    }
    out
}

/// Distance of a matrix from the nearest scalar multiple of the identity,
/// together with that scalar.
pub fn scalar_part(a: &Mat) -> (C64, f64) {
    let n = a.nrows();
    let lam = trace(a) / n as f64;
    let mut d = a.clone();
    for i in 0..n {
        d[[i, i]] -= lam;
    }
    (lam, opnorm(&d))
}

pub fn diag_real(values: &[f64]) -> Mat {
    let mut m = Mat::zeros((values.len(), values.len()));
    for (i, &v) in values.iter().enumerate() {
        m[[i, i]] = re(v);
    }
    m
}

pub fn scale(a: &Mat, f: f64) -> Mat {
    a.mapv(|z| z * f)
}

/// Inverse of a square matrix, through `(A*A)^{-1} A*`. Fails when the
/// condition number exceeds `1e10`.
pub fn inverse(a: &Mat) -> Result<Mat> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension { expected: a.nrows(), got: a.ncols() });
    }
    let sv = singular_values(a);
    let (hi, lo) = (sv[0], sv[sv.len() - 1]);
    if !(lo > hi * 1e-10) {
        return Err(Error::Numerical(format!("matrix is singular (σ_min/σ_max = {})", lo / hi)));
    }
    let ah = adjoint(a);
    let gram_inv = herm_fn(&mm(&ah, a), |w| re(1.0 / w));
    Ok(mm(&gram_inv, &ah))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(m: usize, n: usize, seed: u64) -> Mat {
        Mat::from_shape_fn((m, n), |(i, j)| {
            let t = (i * 31 + j * 17) as f64 + seed as f64;
            C64::new((t * 0.37).sin(), (t * 0.91).cos())
        })
    }

    #[test]
    fn kron_apply_matches_dense_kron() {
        let a = sample(3, 2, 1);
        let b = sample(2, 4, 2);
        let x = sample(8, 3, 3);
        let dense = kron(&a, &b).mmul(&x);
        let fast = kron_apply(&a, &b, &x);
        assert!(fro_norm(&(&dense - &fast)) < 1e-12);
        let v = mat_to_vec(&sample(2, 4, 5));
        let dv = kron(&a, &b).dot(&v);
        assert!(vec_norm(&(&dv - &kron_apply_vec(&a, &b, &v))) < 1e-12);
    }

    #[test]
    fn flip_is_an_involution_up_to_transpose_of_dims() {
        let f = flip_matrix(2, 3);
        let g = flip_matrix(3, 2);
        assert!(fro_norm(&(g.mmul(&f) - eye(6))) < 1e-15);
        let x = sample(6, 2, 7);
        assert!(fro_norm(&(f.mmul(&x) - flip_rows(&x, 2, 3))) < 1e-15);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let x = sample(7, 3, 11);
        let w = complement_basis(&x).unwrap();
        assert_eq!(w.dim(), (7, 4));
        assert!(fro_norm(&(adjoint(&w).mmul(&w) - eye(4))) < 1e-12);
        assert!(fro_norm(&adjoint(&w).mmul(&x)) < 1e-12);
    }

    #[test]
    fn partial_traces_of_product_operators() {
        let a = sample(2, 2, 1);
        let b = sample(3, 3, 2);
        let w3 = sample(3, 3, 4);
        let w2 = sample(2, 2, 5);
        let x = kron(&a, &b);
        let right = partial_trace_right(&x, 2, 3, &w3);
        let expect = a.mapv(|z| z * trace(&w3.mmul(&b)));
        assert!(fro_norm(&(right - expect)) < 1e-12);
        let left = partial_trace_left(&x, 2, 3, &w2);
        let expect = b.mapv(|z| z * trace(&w2.mmul(&a)));
        assert!(fro_norm(&(left - expect)) < 1e-12);
    }

    #[test]
    fn phase_fix_makes_pivot_positive() {
        let mut a = sample(3, 3, 9).mapv(|z| z * C64::from_polar(1.0, 0.8));
        fix_phase(&mut a);
        let max = max_abs(&a);
        let pivot = a.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
        assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
    }
}
