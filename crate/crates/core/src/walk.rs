//! The quantum random walk `Q_μ = (id ⊗ ψ_μ)Δ̂`: its central restriction to
//! a birth-death type chain on levels, Green functions, the Martin kernel in
//! block form, the Poisson-integral defect and the amenability scalars.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use crate::boundary::{coproduct_block, psi_extended, psi_map, psi_map_z, BlockElement};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, kron, opnorm, scalar_part, Mat, MatMul};
use crate::qlib::{fusion, in_fusion, QParam};
use crate::tlrep::Category;

/// A finitely supported probability measure on the levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkMeasure {
    weights: BTreeMap<usize, f64>,
}

impl WalkMeasure {
    pub fn new(weights: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, w) in weights {
            if !(w >= 0.0) {
                return Err(Error::Domain(format!("negative weight {w} at level {x}")));
            }
            if w > 0.0 {
                *map.entry(x).or_insert(0.0) += w;
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        Ok(WalkMeasure { weights: map })
    }

    pub fn delta(x: usize) -> Self {
        WalkMeasure { weights: BTreeMap::from([(x, 1.0)]) }
    }

    pub fn weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().map(|(&x, &w)| (x, w))
    }

    pub fn max_level(&self) -> usize {
        self.weights.keys().next_back().copied().unwrap_or(0)
    }

    /// Generates the fusion ring iff some odd level is charged.
    pub fn is_generating(&self) -> bool {
        self.weights.keys().any(|x| x % 2 == 1)
    }

    /// `μ̄(x) = μ(x̄)`; every irreducible of `A_o(F)` is self-conjugate.
    pub fn conjugate(&self) -> Self {
        self.clone()
    }

    fn is_trivial(&self) -> bool {
        self.weights.keys().all(|&x| x == 0)
    }
}

/// `p(x,y) = Σ_c μ(c) [y ∈ x⊗c] [y+1]/([x+1][c+1])`.
pub fn transition(q: QParam, mu: &WalkMeasure, x: usize, y: usize) -> f64 {
    mu.weights()
        .filter(|&(c, _)| in_fusion(x, c, y))
        .map(|(c, w)| w * q.dim_ratio(y, x, c))
        .sum()
}

/// The transition matrix on levels `0..=L`. Rows within `max supp μ` of the
/// top lose mass to the discarded levels.
#[derive(Debug, Clone)]
pub struct WalkOperator {
    pub truncation: usize,
    pub matrix: Array2<f64>,
    /// Probability of leaving `0..=L` in one step, per row.
    pub escape: Vec<f64>,
    /// First row whose support is cut by the truncation.
    pub incomplete_from: usize,
}

impl WalkOperator {
    pub fn new(q: QParam, mu: &WalkMeasure, truncation: usize) -> Self {
        let l = truncation;
        let mut matrix = Array2::zeros((l + 1, l + 1));
        let mut escape = vec![0.0; l + 1];
        for x in 0..=l {
            for (c, w) in mu.weights() {
                for y in fusion(x, c) {
                    let p = w * q.dim_ratio(y, x, c);
                    if y <= l {
                        matrix[[x, y]] += p;
                    } else {
                        escape[x] += p;
                    }
                }
            }
        }
        let incomplete_from = (l + 1).saturating_sub(mu.max_level());
        WalkOperator { truncation: l, matrix, escape, incomplete_from }
    }

    pub fn row_sum(&self, x: usize) -> f64 {
        self.matrix.row(x).sum()
    }
}

/// `n`-step transition probabilities of the truncated walk.
#[derive(Debug, Clone)]
pub struct NStep {
    pub matrix: Array2<f64>,
    /// Mass lost above the truncation, per starting level.
    pub lost: Vec<f64>,
    /// Set when the walk started at 0 lost more than the threshold.
    pub warning: Option<String>,
}

pub fn n_step(q: QParam, mu: &WalkMeasure, n: usize, truncation: usize, threshold: f64) -> NStep {
    let op = WalkOperator::new(q, mu, truncation);
    let mut m = Array2::eye(truncation + 1);
    for _ in 0..n {
        m = m.dot(&op.matrix);
    }
    let lost: Vec<f64> = m.rows().into_iter().map(|r| (1.0 - r.sum()).max(0.0)).collect();
    let warning = (lost[0] > threshold).then(|| {
        format!(
            "{n}-step walk from 0 lost mass {:.3e} above level {truncation}",
            lost[0]
        )
    });
    NStep { matrix: m, lost, warning }
}

/// Green function `g(x,y) = Σ_n p_n(x,y)` of the walk killed above `L`.
///
/// `I - P` is an M-matrix, so Gaussian elimination from the top level down
/// can be arranged to add nonnegative quantities only: off-diagonal entries
/// are stored as magnitudes and each diagonal is recomputed as the row's
/// escape mass plus its remaining outflow. Tiny values such as `g(x,0)` at
/// large `x` therefore keep full relative accuracy.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    truncation: usize,
    band: usize,
    /// `out[[i, j]]` for `i ≠ j`: eliminated outflow from `i` to `j`.
    out: Array2<f64>,
    /// Pivot of level `k` at the time it was eliminated.
    pivot: Vec<f64>,
}

impl GreenFunction {
    pub fn new(q: QParam, mu: &WalkMeasure, truncation: usize) -> Result<Self> {
        if mu.is_trivial() {
            return Err(Error::Divergent(
                "μ = δ_0 never moves, so every Green function value is infinite".into(),
            ));
        }
        let op = WalkOperator::new(q, mu, truncation);
        let l = truncation;
        let band = mu.max_level();
        let mut out = op.matrix.clone();
        for x in 0..=l {
            out[[x, x]] = 0.0;
        }
        let mut deficit = op.escape.clone();
        let mut pivot = vec![0.0; l + 1];
        for k in (0..=l).rev() {
            let lo = k.saturating_sub(band);
            let d = deficit[k] + (lo..k).map(|j| out[[k, j]]).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::Numerical(format!("zero pivot at level {k}")));
            }
            pivot[k] = d;
            for i in lo..k {
                let f = out[[i, k]] / d;
                if f == 0.0 {
                    continue;
                }
                for j in lo..k {
                    if j != i {
                        out[[i, j]] += f * out[[k, j]];
                    }
                }
                deficit[i] += f * deficit[k];
            }
        }
        Ok(GreenFunction { truncation: l, band, out, pivot })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `x ↦ g(x, y)` on `0..=L`.
    pub fn column(&self, y: usize) -> Result<Vec<f64>> {
        let l = self.truncation;
        if y > l {
            return Err(Error::LevelCap { level: y, cap: l });
        }
        let mut b = vec![0.0; l + 1];
        b[y] = 1.0;
        for k in (1..=l).rev() {
            if b[k] == 0.0 {
                continue;
            }
            let lo = k.saturating_sub(self.band);
            for i in lo..k {
                b[i] += self.out[[i, k]] / self.pivot[k] * b[k];
            }
        }
        let mut g = vec![0.0; l + 1];
        for x in 0..=l {
            let lo = x.saturating_sub(self.band);
            let inflow: f64 = (lo..x).map(|j| self.out[[x, j]] * g[j]).sum();
            g[x] = (b[x] + inflow) / self.pivot[x];
        }
        Ok(g)
    }

    pub fn value(&self, x: usize, y: usize) -> Result<f64> {
        if x > self.truncation {
            return Err(Error::LevelCap { level: x, cap: self.truncation });
        }
        Ok(self.column(y)?[x])
    }
}

pub fn green(q: QParam, mu: &WalkMeasure, x: usize, y: usize, truncation: usize) -> Result<f64> {
    GreenFunction::new(q, mu, truncation)?.value(x, y)
}

/// `g(x+1, 0) / g(x, 0)`, which tends to `q²`.
pub fn martin_ratio(q: QParam, mu: &WalkMeasure, x: usize, truncation: usize) -> Result<f64> {
    let g = GreenFunction::new(q, mu, truncation)?.column(0)?;
    if x + 1 > truncation {
        return Err(Error::LevelCap { level: x + 1, cap: truncation });
    }
    Ok(g[x + 1] / g[x])
}

/// One row of the Green table exported by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct GreenRow {
    pub x: usize,
    pub g_x0: f64,
    pub g_0x: f64,
    pub martin_ratio: f64,
}

pub fn green_table(
    q: QParam,
    mu: &WalkMeasure,
    max_x: usize,
    truncation: usize,
) -> Result<Vec<GreenRow>> {
    let gf = GreenFunction::new(q, mu, truncation)?;
    let col = gf.column(0)?;
    (0..=max_x.min(truncation.saturating_sub(1)))
        .map(|x| {
            Ok(GreenRow {
                x,
                g_x0: col[x],
                g_0x: gf.value(0, x)?,
                martin_ratio: col[x + 1] / col[x],
            })
        })
        .collect()
}

/// `K_μ̄(A p_x) p_y = Σ_{z=0}^{x} g(y-x+2z,0)/g(y,0) · [y-x+2z+1][x+1]/[y+1] · ψ^z_{y,x}(A)`.
pub fn martin_block(
    cat: &Category,
    green: &GreenFunction,
    a: &Mat,
    x: usize,
    y: usize,
) -> Result<Mat> {
    if y < x {
        return Err(Error::Domain(format!("martin block needs y ≥ x, got x={x}, y={y}")));
    }
    let q = cat.q();
    let g = green.column(0)?;
    if y + x >= g.len() {
        return Err(Error::LevelCap { level: y + x, cap: green.truncation() });
    }
    let dy = cat.dim(y);
    let mut out = Mat::zeros((dy, dy));
    for z in 0..=x {
        let w = y - x + 2 * z;
        // [w+1][x+1]/[y+1] = [x+1]² · [w+1]/([x+1][y+1]), w ∈ x ⊗ y
        let weight = g[w] / g[y] * q.dim_ratio(w, x, y) * q.dim(x).powi(2);
        out = out + psi_map_z(cat, y, x, z, a)?.mapv(|v| v * weight);
    }
    Ok(out)
}

/// `Σ_{z=0}^{x} q^{-x+2z} [x+1] ψ^z_{y,x}(A)`, the limit of the Martin block.
pub fn martin_limit(cat: &Category, a: &Mat, x: usize, y: usize) -> Result<Mat> {
    let q = cat.q();
    let dy = cat.dim(y);
    let mut out = Mat::zeros((dy, dy));
    for z in 0..=x {
        let weight = q.value().powi(2 * z as i32 - x as i32) * q.dim(x);
        out = out + psi_map_z(cat, y, x, z, a)?.mapv(|v| v * weight);
    }
    Ok(out)
}

pub fn martin_defect(
    cat: &Category,
    green: &GreenFunction,
    a: &Mat,
    x: usize,
    y: usize,
) -> Result<f64> {
    Ok(opnorm(&(martin_block(cat, green, a, x, y)? - martin_limit(cat, a, x, y)?)))
}

/// `Q_μ(a) p_x = Σ_c μ(c) (id ⊗ ψ_c)(Δ̂(a)(p_x ⊗ p_c))` on the given levels.
pub fn markov_apply(
    cat: &Category,
    mu: &WalkMeasure,
    a: &BlockElement,
    levels: impl IntoIterator<Item = usize>,
) -> Result<BlockElement> {
    let mut out = BlockElement::new();
    for x in levels {
        let d = cat.dim(x);
        let mut blk = Mat::zeros((d, d));
        for (c, w) in mu.weights() {
            let m = coproduct_block(cat, a, x, c)?;
            blk = blk + cat.slice_psi_right(x, c, &m)?.mapv(|v| v * w);
        }
        out.insert(x, blk);
    }
    Ok(out)
}

/// `‖(id ⊗ ψ_{x+z})Δ̂(ψ_{∞,x}(A))p_y - ψ_{y,x}(A)‖` for `y ≥ x`, `z ≥ y`.
pub fn poisson_defect(cat: &Category, a: &Mat, x: usize, y: usize, z: usize) -> Result<f64> {
    if !(y >= x && z >= y) {
        return Err(Error::Domain(format!(
            "poisson defect needs y ≥ x and z ≥ y, got x={x}, y={y}, z={z}"
        )));
    }
    let right = x + z;
    let ext = psi_extended(cat, x, a, fusion(y, right))?;
    let block = coproduct_block(cat, &ext, y, right)?;
    let lhs = cat.slice_psi_right(y, right, &block)?;
    Ok(opnorm(&(lhs - psi_map(cat, x, y - x, a)?)))
}

/// `q^{-x} (2y+1) / [y+1]`, the shape of the Poisson-integral bound.
pub fn poisson_envelope(q: QParam, x: usize, y: usize) -> f64 {
    q.value().powi(-(x as i32)) * (2 * y + 1) as f64 / q.dim(y)
}

/// `[x+1]² (φ_x ⊗ id ⊗ id)((p^{x⊗x}_0 ⊗ 1)(1 ⊗ p^{x⊗y}_{x+y})(p^{x⊗x}_0 ⊗ 1))`,
/// which is the scalar `[x+y+1]/([x+1][y+1])`.
///
/// With `p^{x⊗x}_0 = t t*` for the unit invariant vector `t`, the sandwich
/// factors as `t t* ⊗ W*W` where `W = (1_x ⊗ V(x⊗y,x+y)*)(t ⊗ 1_y)`, so the
/// two legs are computed separately and each is checked to be scalar.
pub fn eta_norm(cat: &Category, x: usize, y: usize) -> Result<f64> {
    let (dx, dy) = (cat.dim(x), cat.dim(y));
    let t = cat.intertwiner(x, x, 0)?;
    let proj = t.mmul(&adjoint(&t));
    let (left, left_dev) = scalar_part(&cat.slice_phi_left(x, x, &proj)?);
    // (t ⊗ 1_y) then 1_x ⊗ V*
    let ty = kron(&t, &crate::linalg::eye(dy));
    let w = crate::linalg::kron_id_left(dx, &adjoint(&*cat.top(x, y)?), &ty);
    let (right, right_dev) = scalar_part(&adjoint(&w).mmul(&w));
    let value = left * right * cat.q().dim(x).powi(2);
    let dev = left_dev * right.norm() + right_dev * left.norm();
    if dev > 1e-8 * value.norm().max(1.0) || value.im.abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "η-sandwich at x={x}, y={y} is not scalar (deviation {dev:.2e})"
        )));
    }
    Ok(value.re)
}

/// `η_x* η_x = q^{-x}/[x+1]`, tending to `1 - q²`.
pub fn eta_sequence(q: QParam, x: usize) -> f64 {
    let qv = q.value();
    // q^{-x}/[x+1] = (1-q²)/(1-q^{2x+2})
    (1.0 - qv * qv) / (1.0 - qv.powi(2 * x as i32 + 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_examples() {
        // [2] = 3 means q + 1/q = 3
        let q = QParam::from_trace(3.0).unwrap();
        let mu = WalkMeasure::delta(1);
        assert!((transition(q, &mu, 1, 2) - 8.0 / 9.0).abs() < 1e-12);
        assert!((transition(q, &mu, 1, 0) - 1.0 / 9.0).abs() < 1e-12);
        let id = WalkMeasure::delta(0);
        assert_eq!(transition(q, &id, 5, 5), 1.0);
    }

    #[test]
    fn rows_are_stochastic() {
        let q = QParam::new(0.3).unwrap();
        let mu = WalkMeasure::new([(1, 0.5), (2, 0.3), (3, 0.2)]).unwrap();
        let op = WalkOperator::new(q, &mu, 40);
        for x in 0..op.incomplete_from {
            assert!((op.row_sum(x) - 1.0).abs() < 1e-12, "row {x}");
        }
        assert!(op.escape[40] > 0.0);
        assert!(op.matrix.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn measure_validation() {
        assert!(WalkMeasure::new([(1, 0.5), (2, 0.4)]).is_err());
        assert!(WalkMeasure::new([(1, -0.5), (2, 1.5)]).is_err());
        assert!(!WalkMeasure::delta(2).is_generating());
        assert!(WalkMeasure::delta(3).is_generating());
    }

    #[test]
    fn trivial_walk_diverges() {
        let q = QParam::new(0.5).unwrap();
        let err = green(q, &WalkMeasure::delta(0), 0, 0, 50).unwrap_err();
        assert!(matches!(err, Error::Divergent(_)));
    }

    #[test]
    fn green_solves_the_resolvent_equation() {
        let q = QParam::new(0.4).unwrap();
        let mu = WalkMeasure::new([(1, 0.6), (2, 0.4)]).unwrap();
        let l = 60;
        let op = WalkOperator::new(q, &mu, l);
        let gf = GreenFunction::new(q, &mu, l).unwrap();
        for y in [0, 3, 10] {
            let g = gf.column(y).unwrap();
            let pg = op.matrix.dot(&ndarray::Array1::from(g.clone()));
            for x in 0..=l {
                let expect = g[x] - if x == y { 1.0 } else { 0.0 };
                assert!((pg[x] - expect).abs() < 1e-10 * g[x].max(1.0), "x={x} y={y}");
            }
            assert!(g.iter().all(|&v| v >= 0.0));
            assert!(g[y] >= 1.0);
        }
    }

    #[test]
    fn green_keeps_relative_accuracy() {
        // g(40, 0) ~ q^80 sits far below the rounding error of g(0, 0)
        let q = QParam::new(0.3).unwrap();
        let mu = WalkMeasure::delta(1);
        let g = GreenFunction::new(q, &mu, 200).unwrap().column(0).unwrap();
        assert!(g[40] > 0.0 && g[40] < 1e-30);
        assert!((g[41] / g[40] - 0.09).abs() < 1e-6);
    }

    #[test]
    fn n_step_identity_and_mass() {
        let q = QParam::new(0.5).unwrap();
        let mu = WalkMeasure::delta(1);
        let zero = n_step(q, &mu, 0, 10, 1e-12);
        assert_eq!(zero.matrix, Array2::<f64>::eye(11));
        let many = n_step(q, &mu, 15, 10, 1e-12);
        assert!(many.warning.is_some());
        let few = n_step(q, &mu, 5, 10, 1e-12);
        assert!(few.warning.is_none());
    }

    #[test]
    fn eta_sequence_limit() {
        let q = QParam::new(0.5).unwrap();
        assert!((eta_sequence(q, 0) - 1.0).abs() < 1e-15);
        let direct = |x: usize| 0.5f64.powi(-(x as i32)) / q.dim(x);
        for x in 0..20 {
            assert!((eta_sequence(q, x) - direct(x)).abs() < 1e-12);
        }
        assert!((eta_sequence(q, 25) - 0.75).abs() < 1e-3);
    }
}
