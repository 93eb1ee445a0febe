//! Concrete representation category of `A_o(F)`: Jones-Wenzl projectors,
//! orthonormal models of the irreducibles, invariant vectors, intertwiners
//! and the states `ψ_x`, `φ_x`.
//!
//! `H_x` is stored through the step isometries `W_k = V((k-1) ⊗ 1, k)`,
//! `H_k → H_{k-1} ⊗ ℂⁿ`, obtained from the compressed Wenzl recursion. All
//! intertwiners live in irrep coordinates; ambient tensor-power coordinates
//! are only materialised for the Jones-Wenzl checks.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use ndarray::{s, Array3, Axis};

use crate::error::{Error, Result};
use crate::fmodel::FModel;
use crate::linalg::{MatMul, 
    adjoint, complement_basis, eye, fix_phase, fro_norm, herm_eig, kron, kron_apply,
    kron_id_left, kron_id_right, mat_to_vec, opnorm, partial_trace_left, partial_trace_right,
    re, trace, Mat, Vector, C64,
};
use crate::qlib::{contraction, fusion, in_fusion, irrep_dim, QParam};

/// Level caps for matrix-valued constructions.
#[derive(Debug, Clone, Copy)]
pub struct LevelCaps {
    pub max_level: usize,
    /// Largest ambient dimension `n^k` for which tensor-power coordinates are
    /// materialised.
    pub ambient: usize,
}

impl LevelCaps {
    pub fn default_for(n: usize) -> Self {
        let max_level = match n {
            0..=2 => 12,
            3 => 7,
            4 => 5,
            _ => 4,
        };
        LevelCaps { max_level, ambient: 300_000 }
    }

    pub fn with_max_level(mut self, max_level: usize) -> Self {
        self.max_level = max_level;
        self
    }
}

/// Per-key memo table. Each key is computed once, under its own lock, and
/// published immutably.
struct Memo<K, V> {
    slots: Mutex<HashMap<K, Arc<Mutex<Option<Arc<V>>>>>>,
}

impl<K: Eq + Hash + Copy, V> Memo<K, V> {
    fn new() -> Self {
        Memo { slots: Mutex::new(HashMap::new()) }
    }

    fn get(&self, key: K, build: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        let slot = {
            let mut map = self.slots.lock().expect("memo lock");
            map.entry(key).or_default().clone()
        };
        let mut guard = slot.lock().expect("slot lock");
        if let Some(v) = guard.as_ref() {
            return Ok(v.clone());
        }
        let v = Arc::new(build()?);
        *guard = Some(v.clone());
        Ok(v)
    }
}

/// The representation category of one `FModel`, with memoised constructions.
pub struct Category {
    model: FModel,
    caps: LevelCaps,
    steps: Memo<usize, Mat>,
    qx: Memo<usize, Mat>,
    qx_inv: Memo<usize, Mat>,
    tvec: Memo<usize, Mat>,
    tops: Memo<(usize, usize), Mat>,
    inters: Memo<(usize, usize, usize), Mat>,
    embeds: Memo<usize, Mat>,
}

/// A Jones-Wenzl projector `p_k = E Eᵀ*` held through an isometry `E` from
/// `ℂ^{d_k}` onto its range in `(ℂⁿ)^{⊗k}`.
#[derive(Debug, Clone)]
pub struct JonesWenzl {
    pub k: usize,
    pub n: usize,
    pub embed: Arc<Mat>,
}

/// `H_x` as the range of `p_x`, with the restriction `Q_x` of `Q^{⊗x}`.
#[derive(Debug, Clone)]
pub struct IrrepSpace {
    pub x: usize,
    pub embed: Arc<Mat>,
    pub qx: Arc<Mat>,
}

/// Defects of a Jones-Wenzl projector, all Frobenius norms (upper bounds for
/// operator norms).
#[derive(Debug, Clone, serde::Serialize)]
pub struct JwDefects {
    pub k: usize,
    pub rank: usize,
    pub expected_rank: usize,
    /// `‖E*E - 1‖`; `p² - p = E(E*E - 1)E*` and `p = p*` by construction.
    pub idempotency: f64,
    /// largest `‖(1_{j-1} ⊗ t₁* ⊗ 1_{k-j-1}) p‖` over insertion positions
    pub cup_killing: f64,
    /// `‖(1 - p) Q^{⊗k} p‖ = ‖[Q^{⊗k}, p]‖`
    pub commutator: f64,
}

impl JonesWenzl {
    /// Dense projector on `(ℂⁿ)^{⊗k}`.
    pub fn projector(&self) -> Mat {
        self.embed.mmul(&adjoint(&self.embed))
    }

    pub fn rank(&self) -> usize {
        self.embed.ncols()
    }

    pub fn defects(&self, model: &FModel) -> JwDefects {
        let e = &*self.embed;
        let k = self.k;
        let n = self.n;
        let gram = adjoint(e).mmul(e);
        let idempotency = fro_norm(&(&gram - &eye(gram.nrows())));
        let t1 = model.t1();
        let mut cup: f64 = 0.0;
        for j in 1..k {
            cup = cup.max(fro_norm(&contract_legs(e, n, k, j, &t1)));
        }
        let mut qe = e.clone();
        for leg in 0..k {
            qe = apply_on_leg(&qe, n, k, leg, model.qmat());
        }
        let inside = e.mmul(&adjoint(e).mmul(&qe));
        let commutator = fro_norm(&(&qe - &inside));
        JwDefects {
            k,
            rank: e.ncols(),
            expected_rank: irrep_dim(n, k),
            idempotency,
            cup_killing: cup,
            commutator,
        }
    }

    /// `max(‖(1-p)p'‖, ‖p(1-p')‖)`, which bounds `‖p - p'‖`.
    pub fn distance(&self, other: &JonesWenzl) -> f64 {
        let a = &*self.embed;
        let b = &*other.embed;
        let d1 = fro_norm(&(b - &a.mmul(&adjoint(a).mmul(b))));
        let d2 = fro_norm(&(a - &b.mmul(&adjoint(b).mmul(a))));
        d1.max(d2)
    }
}

/// Contract tensor legs `j-1, j` (zero-based) of the columns of `x` with `t*`.
fn contract_legs(x: &Mat, n: usize, k: usize, j: usize, t: &Vector) -> Mat {
    let pre = n.pow((j - 1) as u32);
    let post = n.pow((k - j - 1) as u32);
    let cols = x.ncols();
    let xt = x
        .to_shape((pre, n * n, post * cols))
        .expect("reshape")
        .to_owned();
    let mut out = Mat::zeros((pre, post * cols));
    for (uv, tv) in t.iter().enumerate() {
        let w = tv.conj();
        out.scaled_add(w, &xt.index_axis(Axis(1), uv));
    }
    out.into_shape_with_order((pre * post, cols)).expect("reshape")
}

/// Apply `op` on tensor leg `leg` (zero-based) of the columns of `x`.
fn apply_on_leg(x: &Mat, n: usize, k: usize, leg: usize, op: &Mat) -> Mat {
    let pre = n.pow(leg as u32);
    let post = n.pow((k - leg - 1) as u32);
    let cols = x.ncols();
    let xt = x.to_shape((pre, n, post * cols)).expect("reshape").to_owned();
    let mut out = Array3::<C64>::zeros((pre, n, post * cols));
    for p in 0..pre {
        let blk = xt.index_axis(Axis(0), p);
        out.index_axis_mut(Axis(0), p).assign(&op.mmul(&blk));
    }
    out.into_shape_with_order((pre * post * n, cols))
        .expect("reshape")
}

/// `(A ⊗ B)(1_x ⊗ T ⊗ 1_y) Y` where `T` is the coefficient matrix of a vector
/// in `H_s ⊗ H_s`, `A: H_x ⊗ H_s → H_a`, `B: H_s ⊗ H_y → H_b` and `Y` has
/// rows indexed by `H_x ⊗ H_y`.
pub fn insert_cup(
    a: &Mat,
    b: &Mat,
    t: &Mat,
    y: &Mat,
    dx: usize,
    ds: usize,
    dy: usize,
) -> Mat {
    let da = a.nrows();
    let db = b.nrows();
    let cols = y.ncols();
    assert_eq!(a.ncols(), dx * ds);
    assert_eq!(b.ncols(), ds * dy);
    assert_eq!(y.nrows(), dx * dy);
    // G[ia, (α, τ)] = Σ_σ A[ia, (α, σ)] T[σ, τ]
    let g = a
        .to_shape((da * dx, ds))
        .expect("reshape")
        .mmul(t)
        .into_shape_with_order((da, dx * ds))
        .expect("reshape");
    let b_rows = b.to_shape((db * ds, dy)).expect("reshape").to_owned();
    let mut z = Mat::zeros((dx * ds, db * cols));
    for alpha in 0..dx {
        let y_alpha = y.slice(s![alpha * dy..(alpha + 1) * dy, ..]);
        // P[(ib, τ), j] = Σ_β B[ib, (τ, β)] Y[(α, β), j]
        let p = b_rows.mmul(&y_alpha);
        let p3 = p.into_shape_with_order((db, ds, cols)).expect("reshape");
        let perm = p3.permuted_axes([1, 0, 2]);
        let mut dst = z.slice_mut(s![alpha * ds..(alpha + 1) * ds, ..]);
        let dst3 = dst
            .view_mut()
            .into_shape_with_order((ds, db, cols))
            .expect("contiguous rows");
        let mut dst3 = dst3;
        dst3.assign(&perm);
    }
    g.mmul(&z)
        .into_shape_with_order((da * db, cols))
        .expect("reshape")
}

impl Category {
    pub fn new(model: FModel) -> Self {
        let caps = LevelCaps::default_for(model.n());
        Self::with_caps(model, caps)
    }

    pub fn with_caps(model: FModel, caps: LevelCaps) -> Self {
        Category {
            model,
            caps,
            steps: Memo::new(),
            qx: Memo::new(),
            qx_inv: Memo::new(),
            tvec: Memo::new(),
            tops: Memo::new(),
            inters: Memo::new(),
            embeds: Memo::new(),
        }
    }

    pub fn model(&self) -> &FModel {
        &self.model
    }

    pub fn q(&self) -> QParam {
        self.model.q()
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn caps(&self) -> LevelCaps {
        self.caps
    }

    pub fn check_level(&self, x: usize) -> Result<()> {
        if x > self.caps.max_level {
            Err(Error::LevelCap { level: x, cap: self.caps.max_level })
        } else {
            Ok(())
        }
    }

    pub fn dim(&self, x: usize) -> usize {
        irrep_dim(self.n(), x)
    }

    /// Compressed Wenzl matrix on `H_{k-1} ⊗ ℂⁿ`:
    /// `1 - ([2][k-1]/[k]) X X*` with `X = (W_{k-1}* ⊗ 1)(1 ⊗ t₁)`.
    pub fn wenzl_compressed(&self, k: usize) -> Result<Mat> {
        let x = self.cup_block(k)?;
        let m = x.nrows();
        let coef = self.wenzl_coef(k);
        Ok(eye(m) - x.mmul(&adjoint(&x)).mapv(|z| z * coef))
    }

    fn wenzl_coef(&self, k: usize) -> f64 {
        let q = self.q();
        q.num(2) * q.num(k - 1) / q.num(k)
    }

    fn cup_block(&self, k: usize) -> Result<Mat> {
        assert!(k >= 2);
        let n = self.n();
        let w = self.step(k - 1)?;
        let d = self.dim(k - 2);
        let t1 = self.model.t1();
        let tcol = t1.to_shape((n * n, 1)).expect("column").to_owned();
        let cup = kron(&eye(d), &tcol);
        Ok(kron_id_right(&adjoint(&w), n, &cup))
    }

    /// `W_k = V((k-1) ⊗ 1, k)`: isometry `H_k → H_{k-1} ⊗ ℂⁿ` onto the unit
    /// eigenspace of the compressed Wenzl matrix.
    pub fn step(&self, k: usize) -> Result<Arc<Mat>> {
        self.check_level(k)?;
        self.steps.get(k, || {
            if k == 0 {
                return Ok(eye(1));
            }
            if k == 1 {
                return Ok(eye(self.n()));
            }
            let x = self.cup_block(k)?;
            // the Wenzl matrix is a projection iff coef·X*X = 1
            let gram = adjoint(&x).mmul(&x).mapv(|z| z * self.wenzl_coef(k));
            let dev = fro_norm(&(&gram - &eye(gram.nrows())));
            if dev > 1e-8 * gram.nrows() as f64 {
                return Err(Error::Numerical(format!(
                    "Wenzl matrix at level {k} is not a projection (defect {dev:.3e})"
                )));
            }
            let w = complement_basis(&x)?;
            if w.ncols() != self.dim(k) {
                return Err(Error::Numerical(format!(
                    "rank {} at level {k}, expected {}",
                    w.ncols(),
                    self.dim(k)
                )));
            }
            Ok(w)
        })
    }

    /// Orthonormal basis of the range of `p_k` in `(ℂⁿ)^{⊗k}`.
    pub fn jones_wenzl(&self, k: usize) -> Result<JonesWenzl> {
        let n = self.n();
        let dim = n.checked_pow(k as u32).unwrap_or(usize::MAX);
        if dim > self.caps.ambient {
            return Err(Error::SizeCap { dim, cap: self.caps.ambient });
        }
        let embed = self.embeds.get(k, || {
            if k == 0 {
                return Ok(eye(1));
            }
            let prev = self.jones_wenzl(k - 1)?;
            let w = self.step(k)?;
            Ok(kron_id_right(&prev.embed, n, &w))
        })?;
        Ok(JonesWenzl { k, n, embed })
    }

    /// The same projector built from the generalized recursion
    /// `p_k = (1 - Σ_j (-c)^{k-1-j} [2][j]/[k] (1_{j-1} ⊗ t₁ ⊗ 1_{k-1-j} ⊗ t₁*))(p_{k-1} ⊗ 1)`,
    /// independently of the Wenzl construction.
    pub fn jones_wenzl_alt(&self, k: usize) -> Result<JonesWenzl> {
        let n = self.n();
        let dim = n.checked_pow(k as u32).unwrap_or(usize::MAX);
        if dim > self.caps.ambient {
            return Err(Error::SizeCap { dim, cap: self.caps.ambient });
        }
        self.check_level(k)?;
        let q = self.q();
        let c = self.model.c() as f64;
        let t1 = self.model.t1();
        let mut e = eye(1);
        for m in 1..=k {
            // Y = (p_{m-1} ⊗ 1) restricted to its range, in ambient coordinates
            let y = kron(&e, &eye(n));
            let mut acc = y.clone();
            for j in 1..m {
                let coef = (-c).powi((m - 1 - j) as i32) * q.num(2) * q.num(j) / q.num(m);
                let contracted = contract_legs(&y, n, m, m - 1, &t1);
                let inserted = insert_pair(&contracted, n, m, j, &t1);
                acc.scaled_add(re(-coef), &inserted);
            }
            // the compressed projector Y*pY has spectrum {0, 1}
            let gram = adjoint(&acc).mmul(&acc);
            let (w, v) = herm_eig(&gram);
            let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.5).collect();
            if keep.len() != self.dim(m) {
                return Err(Error::Numerical(format!(
                    "generalized recursion rank {} at level {m}, expected {}",
                    keep.len(),
                    self.dim(m)
                )));
            }
            let vk = v.select(Axis(1), &keep);
            e = acc.mmul(&vk);
        }
        Ok(JonesWenzl { k, n, embed: Arc::new(e) })
    }

    /// `Q_x`, the restriction of `Q^{⊗x}` to `H_x`.
    pub fn q_x(&self, x: usize) -> Result<Arc<Mat>> {
        self.check_level(x)?;
        self.qx.get(x, || {
            if x == 0 {
                return Ok(eye(1));
            }
            let prev = self.q_x(x - 1)?;
            let w = self.step(x)?;
            Ok(adjoint(&w).mmul(&kron_apply(&prev, self.model.qmat(), &w)))
        })
    }

    pub fn q_x_inv(&self, x: usize) -> Result<Arc<Mat>> {
        self.check_level(x)?;
        self.qx_inv.get(x, || {
            if x == 0 {
                return Ok(eye(1));
            }
            let prev = self.q_x_inv(x - 1)?;
            let w = self.step(x)?;
            Ok(adjoint(&w).mmul(&kron_apply(&prev, self.model.qinv(), &w)))
        })
    }

    /// Coefficient matrix `T_x` of the invariant unit vector
    /// `t_x = Σ T_x[a,b] e_a ⊗ e_b ∈ H_x ⊗ H_x`.
    pub fn t_matrix(&self, x: usize) -> Result<Arc<Mat>> {
        self.check_level(x)?;
        self.tvec.get(x, || {
            let n = self.n();
            if x == 0 {
                return Ok(eye(1));
            }
            if x == 1 {
                return Ok(self.model.t1().into_shape_with_order((n, n)).expect("n×n"));
            }
            let prev = self.t_matrix(x - 1)?;
            let xm = x - 1;
            let dx = self.dim(xm);
            let q = self.q();
            let a = adjoint(&*self.top(xm, 1)?);
            let b = adjoint(&*self.top(1, xm)?);
            let t1 = self.t_matrix(1)?;
            let y = mat_to_vec(&prev).into_shape_with_order((dx * dx, 1)).expect("col");
            let coef = (q.num(x) * q.num(2) / q.num(x + 1)).sqrt();
            let out = insert_cup(&a, &b, &t1, &y, dx, n, dx).mapv(|z| z * coef);
            let d = self.dim(x);
            let t = out.into_shape_with_order((d, d)).expect("d×d");
            let norm = fro_norm(&t);
            if (norm - 1.0).abs() > 1e-7 {
                return Err(Error::Numerical(format!(
                    "invariant vector at level {x} has norm {norm}"
                )));
            }
            Ok(t)
        })
    }

    pub fn t_vector(&self, x: usize) -> Result<Vector> {
        Ok(mat_to_vec(&*self.t_matrix(x)?))
    }

    /// Top intertwiner `V(a ⊗ b, a+b)`, via
    /// `V(a⊗b) = (1 ⊗ W_b*)(V(a⊗(b-1)) ⊗ 1) W_{a+b}`.
    pub fn top(&self, a: usize, b: usize) -> Result<Arc<Mat>> {
        self.check_level(a + b)?;
        self.tops.get((a, b), || {
            if a == 0 || b == 0 {
                return Ok(eye(self.dim(a + b)));
            }
            let prev = self.top(a, b - 1)?;
            let w = self.step(a + b)?;
            let wb = self.step(b)?;
            let y = kron_id_right(&prev, self.n(), &w);
            let mut v = kron_id_left(self.dim(a), &adjoint(&wb), &y);
            fix_phase(&mut v);
            Ok(v)
        })
    }

    /// `V(a ⊗ b, z)`: isometry `H_z → H_a ⊗ H_b`. For `s = (a+b-z)/2`,
    /// `V = C(a-s, b-s, s)^{1/2} (V((a-s)⊗s, a)* ⊗ V(s⊗(b-s), b)*)(1 ⊗ t_s ⊗ 1) V((a-s)⊗(b-s), z)`.
    pub fn intertwiner(&self, a: usize, b: usize, z: usize) -> Result<Arc<Mat>> {
        let s = contraction(a, b, z)?;
        if s == 0 {
            return self.top(a, b);
        }
        self.check_level(a.max(b).max(z))?;
        self.inters.get((a, b, z), || {
            let (x, y) = (a - s, b - s);
            let coef = self.q().coef_c(x, y, s).sqrt();
            let left = adjoint(&*self.top(x, s)?);
            let right = adjoint(&*self.top(s, y)?);
            let ts = self.t_matrix(s)?;
            let inner = self.top(x, y)?;
            let mut v = insert_cup(
                &left,
                &right,
                &ts,
                &inner,
                self.dim(x),
                self.dim(s),
                self.dim(y),
            )
            .mapv(|w| w * coef);
            fix_phase(&mut v);
            Ok(v)
        })
    }

    /// `p^{a⊗b}_z = V V*` on `H_a ⊗ H_b`.
    pub fn cg_projection(&self, a: usize, b: usize, z: usize) -> Result<Mat> {
        let v = self.intertwiner(a, b, z)?;
        Ok(v.mmul(&adjoint(&v)))
    }

    /// `ψ_x(A) = Tr(Q_x A)/Tr(Q_x)`.
    pub fn psi(&self, x: usize, a: &Mat) -> Result<C64> {
        let qx = self.q_x(x)?;
        check_square(a, self.dim(x))?;
        Ok(trace(&qx.mmul(a)) / trace(&qx))
    }

    /// `φ_x(A) = Tr(Q_x⁻¹ A)/Tr(Q_x⁻¹)`.
    pub fn phi(&self, x: usize, a: &Mat) -> Result<C64> {
        let qi = self.q_x_inv(x)?;
        check_square(a, self.dim(x))?;
        Ok(trace(&qi.mmul(a)) / trace(&qi))
    }

    /// `t_x*(A ⊗ 1)t_x`.
    pub fn psi_via_vector(&self, x: usize, a: &Mat) -> Result<C64> {
        check_square(a, self.dim(x))?;
        let t = self.t_matrix(x)?;
        // (A ⊗ 1)t has coefficient matrix A T
        Ok(trace(&adjoint(&t).mmul(&a.mmul(&*t))))
    }

    /// The irreducible `H_x` in ambient coordinates together with `Q_x`.
    pub fn irrep(&self, x: usize) -> Result<IrrepSpace> {
        let jw = self.jones_wenzl(x)?;
        Ok(IrrepSpace { x, embed: jw.embed, qx: self.q_x(x)? })
    }

    /// The two sides `(V(x⊗y) ⊗ 1)V((x+y)⊗z)` and `(1 ⊗ V(y⊗z))V(x⊗(y+z))`
    /// of the associativity relation, which agree up to a phase.
    pub fn associativity_pair(&self, x: usize, y: usize, z: usize) -> Result<(Mat, Mat)> {
        let (dx, dy, dz) = (self.dim(x), self.dim(y), self.dim(z));
        let lhs = kron_id_right(&*self.top(x, y)?, dz, &*self.top(x + y, z)?);
        let rhs = kron_id_left(dx, &*self.top(y, z)?, &*self.top(x, y + z)?);
        debug_assert_eq!(lhs.nrows(), dx * dy * dz);
        Ok((lhs, rhs))
    }

    /// `(id ⊗ ψ_b)(X)` for `X` on `H_a ⊗ H_b`.
    pub fn slice_psi_right(&self, a: usize, b: usize, x: &Mat) -> Result<Mat> {
        let qb = self.q_x(b)?;
        let w = qb.mapv(|z| z / trace(&qb));
        Ok(partial_trace_right(x, self.dim(a), self.dim(b), &w))
    }

    /// `(φ_a ⊗ id)(X)` for `X` on `H_a ⊗ H_b`.
    pub fn slice_phi_left(&self, a: usize, b: usize, x: &Mat) -> Result<Mat> {
        let qa = self.q_x_inv(a)?;
        let w = qa.mapv(|z| z / trace(&qa));
        Ok(partial_trace_left(x, self.dim(a), self.dim(b), &w))
    }

    /// Singular values of `ξ ↦ (V(a⊗s,a+s)* ⊗ V(s⊗b,s+b)*)(1_a ⊗ t_s ⊗ 1_b)ξ`
    /// on `H_a ⊗ H_b`, largest first.
    pub fn cup_singular_values(&self, a: usize, b: usize, s: usize) -> Result<Vec<f64>> {
        let left = adjoint(&*self.top(a, s)?);
        let right = adjoint(&*self.top(s, b)?);
        let ts = self.t_matrix(s)?;
        let id = eye(self.dim(a) * self.dim(b));
        let m = insert_cup(&left, &right, &ts, &id, self.dim(a), self.dim(s), self.dim(b));
        Ok(crate::linalg::singular_values(&m))
    }

    /// `‖(Q_a ⊗ Q_b)V - V Q_z‖ / ‖Q_z‖`.
    pub fn intertwiner_q_defect(&self, a: usize, b: usize, z: usize) -> Result<f64> {
        let v = self.intertwiner(a, b, z)?;
        let qa = self.q_x(a)?;
        let qb = self.q_x(b)?;
        let qz = self.q_x(z)?;
        let lhs = kron_apply(&qa, &qb, &v);
        Ok(opnorm(&(&lhs - &v.mmul(&*qz))) / opnorm(&qz))
    }
}

/// Insert `t` at legs `j-1, j` (zero-based) of `m`-leg vectors whose `m-2`
/// legs are the rows of `x`.
fn insert_pair(x: &Mat, n: usize, m: usize, j: usize, t: &Vector) -> Mat {
    let pre = n.pow((j - 1) as u32);
    let post = n.pow((m - 1 - j) as u32);
    let cols = x.ncols();
    let xt = x.to_shape((pre, post * cols)).expect("reshape").to_owned();
    let mut out = Array3::<C64>::zeros((pre, n * n, post * cols));
    for (uv, tv) in t.iter().enumerate() {
        if *tv == C64::new(0.0, 0.0) {
            continue;
        }
        out.index_axis_mut(Axis(1), uv).scaled_add(*tv, &xt);
    }
    out.into_shape_with_order((pre * n * n * post, cols))
        .expect("reshape")
}

fn check_square(a: &Mat, d: usize) -> Result<()> {
    if a.dim() != (d, d) {
        return Err(Error::Dimension { expected: d, got: a.nrows() });
    }
    Ok(())
}

/// All `z` with `V(a⊗b, z)` defined, in increasing order.
pub fn components(a: usize, b: usize) -> Vec<usize> {
    fusion(a, b)
}

pub fn fuses(a: usize, b: usize, z: usize) -> bool {
    in_fusion(a, b, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, mm, vec_norm};

    fn cat(spec: &str) -> Category {
        Category::new(FModel::canonical(spec).unwrap())
    }

    fn isometry_defect(v: &Mat) -> f64 {
        fro_norm(&(adjoint(v).mmul(v) - eye(v.ncols())))
    }

    #[test]
    fn steps_are_isometries_of_the_right_size() {
        for (spec, top) in [("suq:0.5:+", 8), ("identity:3", 5), ("suq:0.3:-", 6)] {
            let c = cat(spec);
            for k in 1..=top {
                let w = c.step(k).unwrap();
                assert_eq!(w.dim(), (c.dim(k - 1) * c.n(), c.dim(k)));
                assert!(isometry_defect(&w) < 1e-10, "{spec} k={k}");
            }
        }
    }

    #[test]
    fn q_traces_are_quantum_dimensions() {
        for spec in ["suq:0.5:+", "identity:3", "suq:0.3:-"] {
            let c = cat(spec);
            let q = c.q();
            for x in 0..=5 {
                let tr = trace(&c.q_x(x).unwrap()).re;
                assert!((tr - q.dim(x)).abs() < 1e-9 * q.dim(x), "{spec} {x}");
                let tri = trace(&c.q_x_inv(x).unwrap()).re;
                assert!((tri - q.dim(x)).abs() < 1e-9 * q.dim(x), "{spec} {x}");
                let prod = c.q_x(x).unwrap().mmul(&*c.q_x_inv(x).unwrap());
                assert!(fro_norm(&(prod - eye(c.dim(x)))) < 1e-9);
            }
        }
    }

    #[test]
    fn invariant_vectors_implement_the_states() {
        for spec in ["suq:0.5:+", "identity:3", "suq:0.3:-"] {
            let c = cat(spec);
            for x in 0..=5 {
                let t = c.t_matrix(x).unwrap();
                let gram = t.mmul(&adjoint(&t));
                let qx = c.q_x(x).unwrap();
                let want = qx.mapv(|z| z / trace(&qx));
                assert!(fro_norm(&(gram - want)) < 1e-9, "{spec} {x}");
            }
        }
    }

    #[test]
    fn intertwiners_are_isometries_with_orthogonal_ranges() {
        for spec in ["suq:0.5:+", "identity:3", "suq:0.3:-"] {
            let c = cat(spec);
            for a in 0..=3 {
                for b in 0..=3 {
                    let d = c.dim(a) * c.dim(b);
                    let mut total = Mat::zeros((d, d));
                    for z in fusion(a, b) {
                        let v = c.intertwiner(a, b, z).unwrap();
                        assert!(isometry_defect(&v) < 1e-9, "{spec} {a} {b} {z}");
                        assert!(c.intertwiner_q_defect(a, b, z).unwrap() < 1e-9);
                        total = total + v.mmul(&adjoint(&v));
                    }
                    assert!(fro_norm(&(total - eye(d))) < 1e-8, "{spec} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn phase_fix_makes_largest_entry_positive() {
        let c = cat("suq:0.5:+");
        let v = c.intertwiner(2, 3, 3).unwrap();
        let (mut best, mut val) = (0.0, C64::new(0.0, 0.0));
        for z in v.iter() {
            if z.norm() > best * (1.0 + 1e-9) {
                best = z.norm();
                val = *z;
            }
        }
        assert!(val.im.abs() < 1e-12 && val.re > 0.0);
    }

    /// Nested cups `(1^{j} ⊗ t₁ ⊗ 1^{j}) ... t₁` in `(ℂⁿ)^{⊗2s}`.
    fn nested_cups(model: &FModel, s: usize) -> Mat {
        let n = model.n();
        let t1 = model.t1().into_shape_with_order((n * n, 1)).unwrap();
        let mut v = eye(1);
        for _ in 0..s {
            // v lives on 2j legs; put t₁ around it: legs 0 and last
            let inner_dim = v.nrows();
            let mut out = Mat::zeros((n * inner_dim * n, 1));
            for i in 0..n {
                for j in 0..n {
                    let w = t1[[i * n + j, 0]];
                    for r in 0..inner_dim {
                        out[[(i * inner_dim + r) * n + j, 0]] += w * v[[r, 0]];
                    }
                }
            }
            v = out;
        }
        v
    }

    /// The range of `V(a⊗b, z)` in ambient coordinates lies in
    /// `(p_a ⊗ p_b)(1_x ⊗ t_s ⊗ 1_y)(p_{x+y})`, built from nested cups.
    #[test]
    fn general_intertwiners_match_ambient_cup_insertion() {
        for spec in ["suq:0.5:+", "identity:3"] {
            let c = cat(spec);
            let n = c.n();
            for (a, b, z) in [(1, 1, 0), (2, 1, 1), (2, 2, 0), (2, 2, 2), (3, 2, 1), (2, 3, 3)] {
                let s = (a + b - z) / 2;
                let (x, y) = (a - s, b - s);
                let ea = c.jones_wenzl(a).unwrap().embed;
                let eb = c.jones_wenzl(b).unwrap().embed;
                let exy = c.jones_wenzl(x + y).unwrap().embed;
                let cups = nested_cups(c.model(), s);
                // (1_x ⊗ cups ⊗ 1_y) E_{x+y}
                let nx = n.pow(x as u32);
                let ny = n.pow(y as u32);
                let e3 = exy.to_shape((nx, ny * exy.ncols())).unwrap().to_owned();
                let mut ins = Mat::zeros((nx * cups.nrows() * ny, exy.ncols()));
                for i in 0..nx {
                    for r in 0..cups.nrows() {
                        let row = e3.row(i).mapv(|w| w * cups[[r, 0]]);
                        let row = row.into_shape_with_order((ny, exy.ncols())).unwrap();
                        let base = (i * cups.nrows() + r) * ny;
                        ins.slice_mut(s![base..base + ny, ..]).assign(&row);
                    }
                }
                let eab = kron(&ea, &eb);
                let target = adjoint(&eab).mmul(&ins);
                let v = c.intertwiner(a, b, z).unwrap();
                // range(V) = range(target)
                let u = crate::linalg::range_basis(&target, 1e-6);
                assert_eq!(u.ncols(), v.ncols(), "{spec} {a} {b} {z}");
                let resid = &*v - &u.mmul(&adjoint(&u).mmul(&*v));
                assert!(fro_norm(&resid) < 1e-8, "{spec} {a} {b} {z}");
            }
        }
    }

    #[test]
    fn top_intertwiner_is_ambient_inclusion() {
        let c = cat("identity:3");
        for (a, b) in [(1, 2), (2, 2), (3, 1)] {
            let ea = c.jones_wenzl(a).unwrap().embed;
            let eb = c.jones_wenzl(b).unwrap().embed;
            let eab = c.jones_wenzl(a + b).unwrap().embed;
            let lhs = mm(&kron(&ea, &eb), &*c.top(a, b).unwrap());
            let u = adjoint(&eab).mmul(&lhs);
            assert!(fro_norm(&(lhs - eab.mmul(&u))) < 1e-9);
            assert!(isometry_defect(&u) < 1e-9);
        }
    }

    #[test]
    fn jones_wenzl_recursions_agree() {
        for (spec, top) in [("suq:0.5:+", 8), ("identity:3", 5), ("suq:0.3:-", 7)] {
            let c = cat(spec);
            for k in 1..=top {
                let p = c.jones_wenzl(k).unwrap();
                let d = p.defects(c.model());
                let tol = 1e-9 * (c.n().pow(k as u32)) as f64;
                assert_eq!(d.rank, d.expected_rank);
                assert!(d.idempotency < tol && d.cup_killing < tol && d.commutator < tol, "{d:?}");
                let alt = c.jones_wenzl_alt(k).unwrap();
                assert!(p.distance(&alt) < tol, "{spec} {k} {}", p.distance(&alt));
            }
        }
    }

    #[test]
    fn invariant_vector_is_fixed_by_cup_structure() {
        // t_x is a unit vector and ψ_x ⊗ id applied to t_x t_x* gives Q_x⁻¹-type marginal
        let c = cat("suq:0.5:+");
        for x in 1..=4 {
            let t = c.t_vector(x).unwrap();
            assert!((vec_norm(&t) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn encore_une_bounds() {
        let c = cat("suq:0.5:+");
        let q = c.q();
        for (a, b, s) in [(1, 1, 1), (2, 1, 2), (2, 3, 1), (3, 3, 2)] {
            let sv = c.cup_singular_values(a, b, s).unwrap();
            let lower = q.coef_d(a, s).recip().sqrt() * 0.0;
            assert!(sv[0] <= 1.0 + 1e-9);
            assert!(*sv.last().unwrap() > lower);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let c = cat("identity:3");
        assert!(matches!(c.step(8), Err(Error::LevelCap { .. })));
        let c = Category::with_caps(
            FModel::canonical("identity:3").unwrap(),
            LevelCaps::default_for(3).with_max_level(8),
        );
        assert!(c.step(8).is_ok());
        assert!(matches!(c.jones_wenzl(12), Err(Error::SizeCap { .. })));
    }
}
