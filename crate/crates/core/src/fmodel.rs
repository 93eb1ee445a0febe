//! The defining datum `F` of `A_o(F)` and everything derived from it.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{MatMul, 
    adjoint, eye, herm_eigvals, max_abs, opnorm, re, trace, Mat, Vector, C64, ZERO,
};
use crate::qlib::QParam;

#[derive(Debug, Clone)]
pub struct FModel {
    n: usize,
    f: Mat,
    c: i32,
    q: QParam,
    qmat: Mat,
    qinv: Mat,
    label: String,
}

/// `(n, q, c)` as recorded in reports.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ModelSummary {
    pub n: usize,
    pub q: f64,
    pub c: i32,
}

/// The numerical hypotheses of the factoriality and simplicity theorems.
#[derive(Debug, Clone, Serialize)]
pub struct Hypotheses {
    pub f_norm_sq: f64,
    pub trace: f64,
    /// `‖F‖² ≤ Tr(F*F)/√5`
    pub sqrt5: bool,
    /// `‖F‖⁸ ≤ (3/8) Tr(FF*)`
    pub simplicity: bool,
}

impl FModel {
    pub fn build(f: Mat) -> Result<Self> {
        Self::build_labeled(f, "custom".to_string())
    }

    fn build_labeled(f: Mat, label: String) -> Result<Self> {
        let (n, m) = f.dim();
        if n != m || n == 0 {
            return Err(Error::NotAoF(format!("F must be square, got {n}x{m}")));
        }
        let fbar = f.mapv(|z| z.conj());
        let ffbar = f.mmul(&fbar);
        let lam = ffbar[[0, 0]];
        let c = if lam.re >= 0.0 { 1 } else { -1 };
        let mut dev = ffbar.clone();
        for i in 0..n {
            dev[[i, i]] -= re(c as f64);
        }
        if max_abs(&dev) > 1e-10 * n as f64 {
            return Err(Error::NotAoF(format!(
                "F F̄ is not ±1 (deviation {:.3e})",
                max_abs(&dev)
            )));
        }
        let t = f.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if t <= 2.0 + 1e-12 {
            return Err(Error::ExcludedCase(t));
        }
        let q = QParam::from_trace(t)?;
        let qmat = f.t().mmul(&fbar);
        let qinv = f.mmul(&adjoint(&f));
        let prod = qmat.mmul(&qinv);
        if max_abs(&(&prod - &eye(n))) > 1e-10 * n as f64 {
            return Err(Error::NotAoF("Fᵗ F̄ and F F* are not inverse".into()));
        }
        if herm_eigvals(&qmat)[0] <= 0.0 {
            return Err(Error::NotAoF("Q is not positive definite".into()));
        }
        Ok(FModel { n, f, c, q, qmat, qinv, label })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::build_labeled(eye(n), format!("identity:{n}"))
    }

    /// The 2×2 matrix `F_q^± = (0 √q; ∓1/√q 0)`.
    pub fn suq(q: f64, plus: bool) -> Result<Self> {
        QParam::new(q)?;
        let s = q.sqrt();
        let mut f = Mat::zeros((2, 2));
        f[[0, 1]] = re(s);
        f[[1, 0]] = re(if plus { -1.0 / s } else { 1.0 / s });
        let sign = if plus { '+' } else { '-' };
        Self::build_labeled(f, format!("suq:{q}:{sign}"))
    }

    /// Parse `identity:n`, `suq:q:±` or `file:<path>`.
    pub fn canonical(spec: &str) -> Result<Self> {
        let bad = || Error::Spec(spec.to_string());
        if let Some(rest) = spec.strip_prefix("identity:") {
            let n: usize = rest.trim().parse().map_err(|_| bad())?;
            Self::identity(n)
        } else if let Some(rest) = spec.strip_prefix("suq:") {
            let (qs, sign) = rest.rsplit_once(':').ok_or_else(bad)?;
            let q: f64 = qs.trim().parse().map_err(|_| bad())?;
            match sign.trim() {
                "+" => Self::suq(q, true),
                "-" => Self::suq(q, false),
                _ => Err(bad()),
            }
        } else if let Some(path) = spec.strip_prefix("file:") {
            let f = read_matrix_file(Path::new(path))?;
            Self::build_labeled(f, spec.to_string())
        } else {
            Err(bad())
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> &Mat {
        &self.f
    }

    pub fn c(&self) -> i32 {
        self.c
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    /// `Q = Fᵗ F̄`.
    pub fn qmat(&self) -> &Mat {
        &self.qmat
    }

    /// `Q⁻¹ = F F*`.
    pub fn qinv(&self) -> &Mat {
        &self.qinv
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary { n: self.n, q: self.q.value(), c: self.c }
    }

    /// `Tr(F*F) = q + 1/q`.
    pub fn trace(&self) -> f64 {
        trace(&self.qmat).re
    }

    /// `‖Q‖ = ‖F‖²`.
    pub fn q_norm(&self) -> f64 {
        opnorm(&self.qmat)
    }

    pub fn q_eigenvalues(&self) -> Vec<f64> {
        herm_eigvals(&self.qmat)
    }

    pub fn hypotheses(&self) -> Hypotheses {
        let nf2 = opnorm(&self.f).powi(2);
        let t = self.trace();
        Hypotheses {
            f_norm_sq: nf2,
            trace: t,
            sqrt5: nf2 <= t / 5f64.sqrt() * (1.0 + 1e-12),
            simplicity: nf2.powi(4) <= 0.375 * t * (1.0 + 1e-12),
        }
    }

    /// `t₁ = Tr(F*F)^{-1/2} Σ e_i ⊗ F e_i`.
    pub fn t1(&self) -> Vector {
        let n = self.n;
        let norm = self.trace().sqrt();
        let mut t = Vector::from_elem(n * n, ZERO);
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = self.f[[j, i]] / norm;
            }
        }
        t
    }

    /// A 2×2 datum with the same `q` and `c`; its representation category is
    /// unitarily monoidally equivalent to this one.
    pub fn equivalent_2x2(&self) -> Result<Self> {
        // c = -1 for F_q^+, c = +1 for F_q^-
        Self::suq(self.q.value(), self.c == -1)
    }
}

/// Block-diagonal matrix with the given diagonal blocks.
pub fn block_diagonal(blocks: &[Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros((n, m));
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.slice_mut(ndarray::s![r..r + b.nrows(), c..c + b.ncols()]).assign(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Matrix file: first line `rows cols`, then one line per row holding
/// whitespace-separated `re im` pairs.
pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Spec("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Spec(format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    if dims.len() != 2 {
        return Err(Error::Spec(format!("bad header `{header}`")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let mut m = Mat::zeros((rows, cols));
    for i in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Spec(format!("missing row {i}")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Spec(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * cols {
            return Err(Error::Spec(format!(
                "row {i} has {} numbers, expected {}",
                vals.len(),
                2 * cols
            )));
        }
        for j in 0..cols {
            m[[i, j]] = C64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    if lines.next().is_some() {
        return Err(Error::Spec("trailing rows in matrix file".into()));
    }
    Ok(m)
}

pub fn read_matrix_file(path: &Path) -> Result<Mat> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn format_matrix(m: &Mat) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.rows() {
        let cells: Vec<String> = row
            .iter()
            .map(|z| format!("{:.17e} {:.17e}", z.re, z.im))
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
