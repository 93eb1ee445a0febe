//! The compressions `ψ_{x+y,x}` and their generalisations `ψ^r_{y,x}`, the
//! block action of the dual coproduct, and the defect norms whose decay
//! makes the boundary a C*-algebra with a well-behaved action.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmodel::FModel;
use crate::linalg::{
    adjoint, eye, kron, kron_id_right, mat_to_vec, opnorm, singular_values, Mat, MatMul, ONE,
};
use crate::qlib::fusion;
use crate::tlrep::{insert_cup, Category, LevelCaps};

/// A finitely supported element of `Π_x B(H_x)`.
#[derive(Debug, Clone, Default)]
pub struct BlockElement {
    blocks: BTreeMap<usize, Mat>,
}

impl BlockElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(cat: &Category, levels: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Self::new();
        for x in levels {
            e.insert(x, eye(cat.dim(x)));
        }
        e
    }

    /// The minimal central projection `p_z`.
    pub fn indicator(cat: &Category, z: usize) -> Self {
        Self::identity(cat, [z])
    }

    pub fn insert(&mut self, x: usize, block: Mat) {
        self.blocks.insert(x, block);
    }

    pub fn get(&self, x: usize) -> Option<&Mat> {
        self.blocks.get(&x)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Mat)> {
        self.blocks.iter().map(|(&x, m)| (x, m))
    }

    /// `sup_x ‖a p_x‖`.
    pub fn norm(&self) -> f64 {
        self.blocks.values().map(opnorm).fold(0.0, f64::max)
    }
}

fn check_dim(cat: &Category, x: usize, a: &Mat) -> Result<()> {
    let d = cat.dim(x);
    if a.dim() != (d, d) {
        return Err(Error::Dimension { expected: d, got: a.nrows() });
    }
    Ok(())
}

/// `V*(A ⊗ 1)V`.
fn compress(v: &Mat, a: &Mat, right_dim: usize) -> Mat {
    adjoint(v).mmul(&kron_id_right(a, right_dim, v))
}

/// `ψ_{x+y,x}(A) = V(x⊗y, x+y)*(A ⊗ 1)V(x⊗y, x+y)`.
pub fn psi_map(cat: &Category, x: usize, y: usize, a: &Mat) -> Result<Mat> {
    check_dim(cat, x, a)?;
    let v = cat.top(x, y)?;
    Ok(compress(&v, a, cat.dim(y)))
}

/// `ψ^z_{y,x}(A) = V(x⊗(y-x+2z), y)*(A ⊗ 1)V(x⊗(y-x+2z), y)` for `y ≥ x ≥ z`.
pub fn psi_map_z(cat: &Category, target: usize, x: usize, z: usize, a: &Mat) -> Result<Mat> {
    if !(target >= x && x >= z) {
        return Err(Error::Domain(format!(
            "ψ^{z}_{{{target},{x}}} needs {target} ≥ {x} ≥ {z}"
        )));
    }
    check_dim(cat, x, a)?;
    let w = target - x + 2 * z;
    let v = cat.intertwiner(x, w, target)?;
    Ok(compress(&v, a, cat.dim(w)))
}

/// `ψ_{∞,x}(A)` truncated to the given levels (zero below `x`).
pub fn psi_extended(
    cat: &Category,
    x: usize,
    a: &Mat,
    levels: impl IntoIterator<Item = usize>,
) -> Result<BlockElement> {
    let mut e = BlockElement::new();
    for s in levels {
        if s >= x {
            e.insert(s, psi_map(cat, x, s - x, a)?);
        } else {
            e.insert(s, Mat::zeros((cat.dim(s), cat.dim(s))));
        }
    }
    Ok(e)
}

/// `Δ̂(a)(p_x ⊗ p_y) = Σ_z V(x⊗y, z)(a p_z)V(x⊗y, z)*`; missing levels
/// count as zero.
pub fn coproduct_block(cat: &Category, a: &BlockElement, x: usize, y: usize) -> Result<Mat> {
    let d = cat.dim(x) * cat.dim(y);
    let mut out = Mat::zeros((d, d));
    for z in fusion(x, y) {
        if let Some(blk) = a.get(z) {
            let v = cat.intertwiner(x, y, z)?;
            out += &v.mmul(&blk.mmul(&adjoint(&v)));
        }
    }
    Ok(out)
}

/// `‖ψ_{x+y+z,x+y}(ψ_{x+y,x}(A) B) - ψ_{x+y+z,x}(A) ψ_{x+y+z,x+y}(B)‖`.
pub fn inductive_defect(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    a: &Mat,
    b: &Mat,
) -> Result<f64> {
    check_dim(cat, x + y, b)?;
    let inner = psi_map(cat, x, y, a)?.mmul(b);
    let lhs = psi_map(cat, x + y, z, &inner)?;
    let rhs = psi_map(cat, x, y + z, a)?.mmul(&psi_map(cat, x + y, z, b)?);
    Ok(opnorm(&(lhs - rhs)))
}

/// `ψ_{x+y+z,x+y} ψ^r_{x+y,x}(A) - ψ^r_{x+y+z,x}(A)` for `r ≤ x`.
pub fn hophop_operator(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    r: usize,
    a: &Mat,
) -> Result<Mat> {
    if r > x {
        return Err(Error::Domain(format!("r = {r} exceeds x = {x}")));
    }
    let inner = psi_map_z(cat, x + y, x, r, a)?;
    let lhs = psi_map(cat, x + y, z, &inner)?;
    Ok(lhs - psi_map_z(cat, x + y + z, x, r, a)?)
}

pub fn hophop_defect(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    r: usize,
    a: &Mat,
) -> Result<f64> {
    Ok(opnorm(&hophop_operator(cat, x, y, z, r, a)?))
}

/// `ψ^r_{x+y+z,x+y} ψ_{x+y,x}(A) - ψ_{x+y+z,x}(A)` for `r ≤ x+y`.
pub fn hiphip_operator(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    r: usize,
    a: &Mat,
) -> Result<Mat> {
    if r > x + y {
        return Err(Error::Domain(format!("r = {r} exceeds x+y = {}", x + y)));
    }
    let inner = psi_map(cat, x, y, a)?;
    let lhs = psi_map_z(cat, x + y + z, x + y, r, &inner)?;
    Ok(lhs - psi_map(cat, x, y + z, a)?)
}

pub fn hiphip_defect(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    r: usize,
    a: &Mat,
) -> Result<f64> {
    Ok(opnorm(&hiphip_operator(cat, x, y, z, r, a)?))
}

/// Both generalised inductive-system defects; a branch outside its range
/// of `r` is reported as `None`.
pub fn heeelp_defects(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    r: usize,
    a: &Mat,
) -> Result<(Option<f64>, Option<f64>)> {
    let hop = if r <= x { Some(hophop_defect(cat, x, y, z, r, a)?) } else { None };
    let hip = if r <= x + y { Some(hiphip_defect(cat, x, y, z, r, a)?) } else { None };
    Ok((hop, hip))
}

/// `Δ̂(ψ_{∞,x}(A))(p_{x+y} ⊗ p_z) - ψ_{x+y,x}(A) ⊗ 1`.
pub fn higson_operator(cat: &Category, x: usize, y: usize, z: usize, a: &Mat) -> Result<Mat> {
    let ext = psi_extended(cat, x, a, fusion(x + y, z))?;
    let lhs = coproduct_block(cat, &ext, x + y, z)?;
    Ok(lhs - kron(&psi_map(cat, x, y, a)?, &eye(cat.dim(z))))
}

pub fn higson_defect(cat: &Category, x: usize, y: usize, z: usize, a: &Mat) -> Result<f64> {
    Ok(opnorm(&higson_operator(cat, x, y, z, a)?))
}

/// `[ψ_{x+y,x}(A) ⊗ 1, p^{(x+y)⊗z}_{x+y+z}]`.
pub fn commutator_operator(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    a: &Mat,
) -> Result<Mat> {
    let b = psi_map(cat, x, y, a)?;
    let p = cat.cg_projection(x + y, z, x + y + z)?;
    let dz = cat.dim(z);
    let bp = kron_id_right(&b, dz, &p);
    let pb = adjoint(&kron_id_right(&adjoint(&b), dz, &p));
    Ok(bp - pb)
}

pub fn compactif_commutator(
    cat: &Category,
    x: usize,
    y: usize,
    z: usize,
    a: &Mat,
) -> Result<f64> {
    Ok(opnorm(&commutator_operator(cat, x, y, z, a)?))
}

/// Norm of a linear map on `d × d` matrices between Hilbert-Schmidt norms,
/// from its matrix on the matrix units.
pub fn induced_norm(d: usize, f: impl Fn(&Mat) -> Result<Mat>) -> Result<f64> {
    let mut cols: Vec<crate::linalg::Vector> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = Mat::zeros((d, d));
            e[[i, j]] = ONE;
            cols.push(mat_to_vec(&f(&e)?));
        }
    }
    let rows = cols.first().map_or(0, |c| c.len());
    let mut m = Mat::zeros((rows, d * d));
    for (k, c) in cols.iter().enumerate() {
        m.column_mut(k).assign(c);
    }
    Ok(opnorm(&m))
}

/// How an injectivity bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Direct,
    /// Computed in the 2×2 model with the same `q` and `c`: the ratio only
    /// involves intertwiners and invariant vectors, so it is preserved by
    /// unitary monoidal equivalence.
    Equivalent2x2,
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityBound {
    pub x: usize,
    pub y: usize,
    pub min: f64,
    pub max: f64,
    pub method: BoundMethod,
}

/// Largest matrix (entries) the direct injectivity computation may form.
const DIRECT_BUDGET: usize = 4_000_000;

/// Extreme values of `‖ψ_{x+y,x}(A)‖_{ψ_{x+y}} / ‖A‖_{ψ_x}` with
/// `‖A‖_ψ = ψ(A*A)^{1/2}`.
///
/// Writing `ξ = (A ⊗ 1)t_x`, the ratio is
/// `D(x,y)^{1/2} ‖(V(x⊗y)* ⊗ V(y⊗x)*)(1 ⊗ t_y ⊗ 1)ξ‖ / ‖ξ‖`, and `ξ` ranges
/// over all of `H_x ⊗ H_x`.
pub fn injectivity_bound(cat: &Category, x: usize, y: usize) -> Result<InjectivityBound> {
    let (dx, dxy) = (cat.dim(x), cat.dim(x + y));
    let fits = x + y <= cat.caps().max_level && dxy * dxy * dx * dx <= DIRECT_BUDGET;
    if fits {
        let (min, max) = injectivity_direct(cat, x, y)?;
        return Ok(InjectivityBound { x, y, min, max, method: BoundMethod::Direct });
    }
    let small = equivalent_category(cat.model(), x + y)?;
    let (min, max) = injectivity_direct(&small, x, y)?;
    Ok(InjectivityBound { x, y, min, max, method: BoundMethod::Equivalent2x2 })
}

fn injectivity_direct(cat: &Category, x: usize, y: usize) -> Result<(f64, f64)> {
    let dx = cat.dim(x);
    let left = adjoint(&*cat.top(x, y)?);
    let right = adjoint(&*cat.top(y, x)?);
    let ty = cat.t_matrix(y)?;
    let m = insert_cup(&left, &right, &ty, &eye(dx * dx), dx, cat.dim(y), dx);
    let scale = cat.q().coef_d(x, y).sqrt();
    let sv = singular_values(&m);
    let max = sv.first().copied().unwrap_or(0.0) * scale;
    let min = sv.last().copied().unwrap_or(0.0) * scale;
    Ok((min, max))
}

/// The 2×2 model with the same `(q, c)`, with caps large enough for `level`.
pub fn equivalent_category(model: &FModel, level: usize) -> Result<Category> {
    let small = model.equivalent_2x2()?;
    let caps = LevelCaps::default_for(2).with_max_level(level.max(12));
    Ok(Category::with_caps(small, caps))
}

/// `ψ_{x+y}(ψ_{x+y,x}(A)) - ψ_x(A)`, which vanishes identically.
pub fn harmonic_defect(cat: &Category, x: usize, y: usize, a: &Mat) -> Result<f64> {
    let lhs = cat.psi(x + y, &psi_map(cat, x, y, a)?)?;
    Ok((lhs - cat.psi(x, a)?).norm())
}
