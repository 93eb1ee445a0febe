//! Estimate harness for the appendix lemmas and the boundary defect bounds:
//! phase distance, decay-rate fits and uniform reports.
//!
//! Every bound has the shape `C · m(p) · q^{e(p)}` for a parameter tuple `p`.
//! A report evaluates the left-hand side on a grid, divides by the bound at
//! `C = 1` and fits the decay along one distinguished parameter. Rates are
//! expressed in log-q units, so a defect behaving like `q^{2k}` has rate 2.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{
    commutator_operator, higson_operator, hiphip_operator, hophop_operator, injectivity_bound,
    BoundMethod,
};
use crate::error::{Error, Result};
use crate::fmodel::ModelSummary;
use crate::linalg::{
    adjoint, eye, herm_eig, kron, kron_id_left, kron_id_right, mat_to_vec, opnorm, vec_to_mat,
    Mat, MatMul, C64, ONE,
};
use crate::qlib::fusion;
use crate::sampling::{stream, tuple_index, unit_matrix};
use crate::tlrep::Category;

/// Defects at or below this size are treated as exact zeros by the fits.
pub const NUMERICAL_ZERO: f64 = 1e-13;

const PHASE_GRID: usize = 64;
const PHASE_RESOLUTION: f64 = 1e-8;

/// `min_λ ‖V - λW‖` over unimodular `λ`, with the phase attaining it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseDistance {
    pub value: f64,
    pub phase: f64,
    /// Best value on the coarse grid.
    pub grid_value: f64,
    /// Discrete local minima seen on the coarse grid; more than one means
    /// the objective was not unimodal and every basin was refined.
    pub local_minima: usize,
}

fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > PHASE_RESOLUTION {
        if fc < fd {
            hi = d;
            (d, fd) = (c, fc);
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            (c, fc) = (d, fd);
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Phase distance in operator norm. The coarse grid starts at the phase of
/// the Hilbert-Schmidt pairing `⟨W, V⟩`; each discrete local minimum is
/// refined by golden-section search.
pub fn d_t(v: &Mat, w: &Mat) -> PhaseDistance {
    assert_eq!(v.dim(), w.dim(), "d_T needs operators of the same shape");
    let pairing: C64 = w.iter().zip(v.iter()).map(|(b, a)| b.conj() * a).sum();
    let start = if pairing.norm() > 0.0 { pairing.arg() } else { 0.0 };
    let f = |t: f64| opnorm(&(v - &w.mapv(|z| z * C64::from_polar(1.0, t))));
    let h = TAU / PHASE_GRID as f64;
    let vals: Vec<f64> = (0..PHASE_GRID).map(|k| f(start + h * k as f64)).collect();
    let mut minima: Vec<usize> = (0..PHASE_GRID)
        .filter(|&k| {
            vals[k] < vals[(k + PHASE_GRID - 1) % PHASE_GRID]
                && vals[k] <= vals[(k + 1) % PHASE_GRID]
        })
        .collect();
    let local_minima = minima.len();
    // a constant objective (W = 0) has no strict minimum
    if minima.is_empty() {
        minima.push(0);
    }
    minima.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    minima.truncate(4);
    let grid_value = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = (start, grid_value);
    for k in minima {
        let t = start + h * k as f64;
        let (tk, fk) = golden_section(&f, t - h, t + h);
        if fk < best.1 {
            best = (tk, fk);
        }
    }
    PhaseDistance {
        value: best.1,
        phase: best.0.rem_euclid(TAU),
        grid_value,
        local_minima,
    }
}

/// Least-squares fit of `ln defect = ln constant + slope · k`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    /// Natural-log slope.
    pub slope: f64,
    /// `slope / ln q`: the decay exponent in log-q units.
    pub rate: f64,
    pub constant: f64,
    pub points: usize,
}

pub fn fit_rate(points: &[(f64, f64)], q: f64) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, d)| d > NUMERICAL_ZERO)
        .map(|&(k, d)| (k, d.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points above {NUMERICAL_ZERO:e}, need 3",
            usable.len()
        )));
    }
    let m = usable.len() as f64;
    let (sx, sy) = usable.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = usable.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = usable.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share one abscissa".into()));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        rate: slope / q.ln(),
        constant: (my - slope * mx).exp(),
        points: usable.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaId {
    ApproxCommute,
    Best1,
    Best2,
    Best3,
    BestA1,
    BestA2,
    BestA3,
    QbinomRatio,
    Interessant,
    EncoreUne,
    CompactifCommutator,
    Higson,
    Hophop,
    Hiphip,
    Injectivity,
}

/// What a report checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LemmaKind {
    /// `defect ≤ C m q^e`, decaying along parameter `var` with exponent
    /// coefficient `coef`.
    Decay { var: usize, coef: f64 },
    /// `1 ≤ value ≤ C` with `C` independent of the grid.
    Bounded,
    /// `floor ≤ lower ≤ upper ≤ 1`.
    Floor,
}

impl LemmaId {
    pub const ALL: [LemmaId; 15] = [
        LemmaId::ApproxCommute,
        LemmaId::Best1,
        LemmaId::Best2,
        LemmaId::Best3,
        LemmaId::BestA1,
        LemmaId::BestA2,
        LemmaId::BestA3,
        LemmaId::QbinomRatio,
        LemmaId::Interessant,
        LemmaId::EncoreUne,
        LemmaId::CompactifCommutator,
        LemmaId::Higson,
        LemmaId::Hophop,
        LemmaId::Hiphip,
        LemmaId::Injectivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::ApproxCommute => "approxcommute",
            LemmaId::Best1 => "best1",
            LemmaId::Best2 => "best2",
            LemmaId::Best3 => "best3",
            LemmaId::BestA1 => "best_a1",
            LemmaId::BestA2 => "best_a2",
            LemmaId::BestA3 => "best_a3",
            LemmaId::QbinomRatio => "qbinom_ratio",
            LemmaId::Interessant => "interessant",
            LemmaId::EncoreUne => "encore_une",
            LemmaId::CompactifCommutator => "compactif_commutator",
            LemmaId::Higson => "higson",
            LemmaId::Hophop => "hophop",
            LemmaId::Hiphip => "hiphip",
            LemmaId::Injectivity => "injectivity",
        }
    }

    pub fn params(self) -> &'static [&'static str] {
        use LemmaId::*;
        match self {
            ApproxCommute => &["a", "b", "c"],
            Best1 | Best2 | Best3 | BestA1 | BestA2 | BestA3 => &["a", "b", "c", "z"],
            QbinomRatio => &["a", "b", "r"],
            Interessant => &["a", "b", "k"],
            EncoreUne => &["a", "b", "s"],
            CompactifCommutator | Higson => &["x", "y", "z"],
            Hophop | Hiphip => &["x", "y", "z", "r"],
            Injectivity => &["x", "y"],
        }
    }

    pub fn kind(self) -> LemmaKind {
        use LemmaId::*;
        match self {
            QbinomRatio => LemmaKind::Bounded,
            EncoreUne | Injectivity => LemmaKind::Floor,
            Interessant => LemmaKind::Decay { var: 2, coef: 2.0 },
            ApproxCommute | Best1 | Best2 | Best3 | BestA1 | BestA2 | BestA3 => {
                LemmaKind::Decay { var: 1, coef: 1.0 }
            }
            CompactifCommutator | Higson | Hophop | Hiphip => LemmaKind::Decay { var: 1, coef: 1.0 },
        }
    }

    /// The lemmas whose defect is a supremum over unit-norm `A`.
    fn sup_over_a(self) -> bool {
        matches!(
            self,
            LemmaId::CompactifCommutator | LemmaId::Higson | LemmaId::Hophop | LemmaId::Hiphip
        )
    }

    /// `(multiplier, exponent)` of the bound at `C = 1`.
    fn bound_shape(self, p: &[usize]) -> (f64, f64) {
        use LemmaId::*;
        let f = |k: usize| p[k] as f64;
        match self {
            ApproxCommute => (1.0, f(1)),
            // (z+b-a)/2 and (z+b-c)/2 are integers by fusion parity
            Best1 | Best2 | Best3 => (1.0, (f(3) + f(1) - f(0)) / 2.0),
            BestA1 | BestA2 | BestA3 => (1.0, (f(3) + f(1) - f(2)) / 2.0),
            Interessant => (1.0, 2.0 * f(2)),
            CompactifCommutator => (1.0, f(1)),
            Higson => (f(2) + 1.0, f(1) - f(2)),
            Hophop => (1.0, f(1) + f(3)),
            Hiphip => (1.0, f(1) - f(3)),
            QbinomRatio | EncoreUne | Injectivity => (1.0, 0.0),
        }
    }

    /// Highest level a tuple touches, or `None` when the evaluation has its
    /// own fallback.
    fn level_needed(self, p: &[usize]) -> Option<usize> {
        use LemmaId::*;
        match self {
            ApproxCommute => Some(p[0] + p[1] + p[2]),
            Best1 | Best2 | Best3 => Some((p[3] + p[2]).max(p[1] + p[2]).max(p[0] + p[1])),
            BestA1 | BestA2 | BestA3 => Some((p[0] + p[1]).max(p[0] + p[3]).max(p[1] + p[2])),
            EncoreUne => Some((p[0] + p[2]).max(p[2] + p[1])),
            CompactifCommutator | Higson => Some(p[0] + p[1] + p[2]),
            // ψ^r_{y,x} uses V(x ⊗ (y-x+2r), y)
            Hophop => Some((p[0] + p[1] + p[2]).max(p[1] + p[2] + 2 * p[3])),
            Hiphip => Some((p[0] + p[1] + p[2]).max(p[2] + 2 * p[3])),
            QbinomRatio | Interessant | Injectivity => None,
        }
    }

    fn valid(self, p: &[usize]) -> bool {
        use LemmaId::*;
        match self {
            Best1 | Best2 | Best3 => fusion(p[0], p[1]).contains(&p[3]),
            BestA1 | BestA2 | BestA3 => fusion(p[1], p[2]).contains(&p[3]),
            Interessant => p[2] >= 1,
            Hophop => p[3] <= p[0],
            Hiphip => p[3] <= p[0] + p[1],
            _ => true,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown lemma {s:?}")))
    }
}

/// Grid used when none is given: the decaying parameter over `1..=5` and the
/// others up to 4 for `n = 2`; for larger `n` the irreducibles grow like
/// `n^x` and the grid stays below level 5.
pub fn default_grid(id: LemmaId, n: usize) -> Vec<Vec<usize>> {
    use LemmaId::*;
    let (dec, other) = if n <= 2 { (5, 4) } else { (3, 1) };
    let mut grid = Vec::new();
    let mut push = |p: Vec<usize>| {
        if id.valid(&p) {
            grid.push(p);
        }
    };
    match id {
        ApproxCommute | CompactifCommutator | Higson => {
            for a in 0..=other {
                for b in 1..=dec {
                    for c in 0..=other {
                        push(vec![a, b, c]);
                    }
                }
            }
        }
        Best1 | Best2 | Best3 | BestA1 | BestA2 | BestA3 => {
            for a in 0..=other {
                for b in 1..=dec {
                    for c in 0..=other {
                        for z in 0..=(a + b).max(b + c) {
                            push(vec![a, b, c, z]);
                        }
                    }
                }
            }
        }
        Hophop | Hiphip => {
            for x in 0..=other {
                for y in 1..=dec {
                    for z in 0..=other {
                        for r in 0..=other {
                            push(vec![x, y, z, r]);
                        }
                    }
                }
            }
        }
        QbinomRatio => {
            for a in 0..=10 {
                for b in 0..=10 {
                    for r in 0..=10 {
                        push(vec![a, b, r]);
                    }
                }
            }
        }
        Interessant => {
            for a in 0..=other {
                for b in 0..=other {
                    for k in 1..=10 {
                        push(vec![a, b, k]);
                    }
                }
            }
        }
        EncoreUne => {
            let m = if n <= 2 { 3 } else { 1 };
            for a in 0..=m {
                for b in 0..=m {
                    for s in 0..=m {
                        push(vec![a, b, s]);
                    }
                }
            }
        }
        Injectivity => {
            let m = if n <= 2 { 5 } else { 3 };
            for x in 0..=m {
                for y in 0..=m {
                    push(vec![x, y]);
                }
            }
        }
    }
    grid
}

/// Drops the tuples above the category's level cap and returns how many
/// were dropped.
pub fn fit_grid_to_caps(
    id: LemmaId,
    cat: &Category,
    grid: Vec<Vec<usize>>,
) -> (Vec<Vec<usize>>, usize) {
    let cap = cat.caps().max_level;
    let before = grid.len();
    let kept: Vec<_> = grid
        .into_iter()
        .filter(|p| id.level_needed(p).is_none_or(|l| l <= cap))
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Knobs for one report.
#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub seed: u64,
    /// Random unit-norm test matrices per tuple for sup-over-`A` defects.
    pub samples: usize,
    pub rate_tolerance: f64,
    /// Every row must satisfy `defect ≤ headroom · constant · bound`.
    pub headroom: f64,
    /// Parameter values of the decaying variable that define the constant.
    pub leading: usize,
    /// Lower floor for `Floor` lemmas.
    pub floor: f64,
    /// Slack on the upper bound 1 of `Floor` lemmas.
    pub upper_slack: f64,
}

impl CheckOptions {
    pub fn for_lemma(id: LemmaId, seed: u64) -> Self {
        CheckOptions {
            seed,
            samples: 8,
            rate_tolerance: if id == LemmaId::Interessant { 0.1 } else { 0.15 },
            headroom: 1.05,
            leading: 3,
            floor: if id == LemmaId::Injectivity { 0.1 } else { 1e-3 },
            upper_slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub params: Vec<usize>,
    pub defect: f64,
    pub bound: f64,
    pub ratio: f64,
    /// Upper value of a two-sided estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    /// Coarse-grid phase distance, kept when the phase objective had
    /// several local minima.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<BoundMethod>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fitted {
    /// Decay exponent in log-q units; absent for non-decay lemmas.
    pub rate: Option<f64>,
    /// Empirical constant: max ratio over the leading rows for decay
    /// lemmas, the supremum for bounded ones, the floor value for the rest.
    pub constant: f64,
    pub slope: Option<f64>,
    pub expected_rate: Option<f64>,
    pub rate_tolerance: f64,
    pub headroom: f64,
    pub headroom_ok: bool,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub lemma_id: String,
    pub fmodel: ModelSummary,
    pub seed: u64,
    pub param_names: Vec<String>,
    pub grid: Vec<Vec<usize>>,
    /// Tuples removed because they exceed the level cap.
    pub skipped: usize,
    pub samples: usize,
    pub rows: Vec<Row>,
    pub fitted: Fitted,
    pub pass: bool,
}

struct Measured {
    defect: f64,
    upper: Option<f64>,
    grid_defect: Option<f64>,
    method: Option<BoundMethod>,
}

impl Measured {
    fn plain(defect: f64) -> Self {
        Measured { defect, upper: None, grid_defect: None, method: None }
    }

    fn phase(pd: PhaseDistance) -> Self {
        Measured {
            defect: pd.value,
            upper: None,
            grid_defect: (pd.local_minima > 1).then_some(pd.grid_value),
            method: None,
        }
    }
}

/// Evaluates `id` on `grid` and fits the result.
pub fn check_lemma(
    cat: &Category,
    id: LemmaId,
    grid: &[Vec<usize>],
    opts: &CheckOptions,
) -> Result<EstimateReport> {
    check_lemma_with_skipped(cat, id, grid, 0, opts)
}

/// As [`check_lemma`], recording how many tuples were removed beforehand.
pub fn check_lemma_with_skipped(
    cat: &Category,
    id: LemmaId,
    grid: &[Vec<usize>],
    skipped: usize,
    opts: &CheckOptions,
) -> Result<EstimateReport> {
    let arity = id.params().len();
    let cap = cat.caps().max_level;
    let mut grid: Vec<Vec<usize>> = grid.to_vec();
    for p in &grid {
        if p.len() != arity {
            return Err(Error::Domain(format!(
                "{id} takes {arity} parameters, got {p:?}"
            )));
        }
        if !id.valid(p) {
            return Err(Error::Domain(format!("{id}: tuple {p:?} outside the lemma's range")));
        }
        if let Some(level) = id.level_needed(p) {
            if level > cap {
                return Err(Error::GridCap { tuple: p.clone(), level, cap });
            }
        }
    }
    grid.sort();
    grid.dedup();

    let measured: Vec<Measured> = grid
        .par_iter()
        .map(|p| measure(cat, id, p, opts))
        .collect::<Result<_>>()?;

    let q = cat.q().value();
    let rows: Vec<Row> = grid
        .iter()
        .zip(measured)
        .map(|(p, m)| {
            let (mult, e) = id.bound_shape(p);
            let bound = mult * q.powf(e);
            Row {
                params: p.clone(),
                defect: m.defect,
                bound,
                ratio: m.defect / bound,
                upper: m.upper,
                grid_defect: m.grid_defect,
                method: m.method,
            }
        })
        .collect();

    let (fitted, pass) = match id.kind() {
        LemmaKind::Decay { var, coef } => fit_decay(id, &rows, var, coef, q, opts),
        LemmaKind::Bounded => fit_bounded(&rows, opts),
        LemmaKind::Floor => fit_floor(&rows, opts),
    };

    Ok(EstimateReport {
        lemma_id: id.name().to_string(),
        fmodel: cat.model().summary(),
        seed: opts.seed,
        param_names: id.params().iter().map(|s| s.to_string()).collect(),
        grid,
        skipped,
        samples: if id.sup_over_a() { opts.samples } else { 0 },
        rows,
        fitted,
        pass,
    })
}

fn fit_decay(
    id: LemmaId,
    rows: &[Row],
    var: usize,
    coef: f64,
    q: f64,
    opts: &CheckOptions,
) -> (Fitted, bool) {
    // envelope along the decaying variable, after removing the part of the
    // bound that depends on the other parameters
    let mut env: std::collections::BTreeMap<usize, f64> = Default::default();
    for r in rows {
        let v = r.params[var];
        let (mult, e) = id.bound_shape(&r.params);
        let rest = mult * q.powf(e - coef * v as f64);
        let slot = env.entry(v).or_insert(0.0);
        *slot = slot.max(r.defect / rest);
    }
    let points: Vec<(f64, f64)> = env.iter().map(|(&v, &d)| (v as f64, d)).collect();
    let fit = fit_rate(&points, q).ok();

    let min_var = rows.iter().map(|r| r.params[var]).min().unwrap_or(0);
    let constant = rows
        .iter()
        .filter(|r| r.params[var] < min_var + opts.leading)
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    let headroom_ok = rows.iter().all(|r| r.ratio <= opts.headroom * constant);
    // a defect that vanishes identically decays at every rate
    let all_zero = rows.iter().all(|r| r.defect <= NUMERICAL_ZERO);
    let rate_ok = match fit {
        Some(f) => f.rate >= coef - opts.rate_tolerance,
        None => all_zero,
    };
    let pass = rate_ok && constant.is_finite() && (headroom_ok || all_zero);
    (
        Fitted {
            rate: fit.map(|f| f.rate),
            constant,
            slope: fit.map(|f| f.slope),
            expected_rate: Some(coef),
            rate_tolerance: opts.rate_tolerance,
            headroom: opts.headroom,
            headroom_ok,
            points: fit.map_or(0, |f| f.points),
        },
        pass,
    )
}

fn fit_bounded(rows: &[Row], opts: &CheckOptions) -> (Fitted, bool) {
    let sup = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    let lower_ok = rows.iter().all(|r| r.defect >= 1.0 - 1e-12);
    // the supremum must already be attained on the grid with every
    // parameter two steps shorter
    let top = rows.iter().flat_map(|r| r.params.iter().copied()).max().unwrap_or(0);
    let sub = rows
        .iter()
        .filter(|r| r.params.iter().all(|&p| p + 2 <= top))
        .map(|r| r.defect)
        .fold(0.0, f64::max);
    let stable = sup.is_finite() && (sup - sub) <= 1e-3 * sup;
    (
        Fitted {
            rate: None,
            constant: sup,
            slope: None,
            expected_rate: None,
            rate_tolerance: opts.rate_tolerance,
            headroom: opts.headroom,
            headroom_ok: stable,
            points: rows.len(),
        },
        lower_ok && stable,
    )
}

fn fit_floor(rows: &[Row], opts: &CheckOptions) -> (Fitted, bool) {
    let floor = rows.iter().map(|r| r.defect).fold(f64::INFINITY, f64::min);
    let upper_ok = rows
        .iter()
        .all(|r| r.upper.unwrap_or(1.0) <= 1.0 + opts.upper_slack);
    (
        Fitted {
            rate: None,
            constant: floor,
            slope: None,
            expected_rate: None,
            rate_tolerance: opts.rate_tolerance,
            headroom: opts.headroom,
            headroom_ok: upper_ok,
            points: rows.len(),
        },
        upper_ok && floor >= opts.floor,
    )
}

fn measure(cat: &Category, id: LemmaId, p: &[usize], opts: &CheckOptions) -> Result<Measured> {
    use LemmaId::*;
    let q = cat.q();
    Ok(match id {
        ApproxCommute => Measured::plain(opnorm(&approxcommute_operator(cat, p[0], p[1], p[2])?)),
        Best1 => Measured::plain(opnorm(&best1_operator(cat, p[0], p[1], p[2], p[3])?)),
        Best2 => {
            let (v, w) = best2_pair(cat, p[0], p[1], p[2], p[3])?;
            Measured::phase(d_t(&v, &w))
        }
        Best3 => {
            let (v, w) = best3_pair(cat, p[0], p[1], p[2], p[3])?;
            Measured::phase(d_t(&v, &w))
        }
        BestA1 => Measured::plain(opnorm(&best_a1_operator(cat, p[0], p[1], p[2], p[3])?)),
        BestA2 => {
            let (v, w) = best_a2_pair(cat, p[0], p[1], p[2], p[3])?;
            Measured::phase(d_t(&v, &w))
        }
        BestA3 => {
            let (v, w) = best_a3_pair(cat, p[0], p[1], p[2], p[3])?;
            Measured::phase(d_t(&v, &w))
        }
        QbinomRatio => Measured::plain(q.binomial_ratio(p[0], p[1], p[2])),
        Interessant => Measured::plain(q.interessant_ratio(p[0], p[1], p[2]) - 1.0),
        EncoreUne => {
            let sv = cat.cup_singular_values(p[0], p[1], p[2])?;
            Measured {
                defect: sv.last().copied().unwrap_or(0.0),
                upper: sv.first().copied(),
                grid_defect: None,
                method: None,
            }
        }
        Injectivity => {
            let b = injectivity_bound(cat, p[0], p[1])?;
            Measured { defect: b.min, upper: Some(b.max), grid_defect: None, method: Some(b.method) }
        }
        CompactifCommutator => {
            let (x, y, z) = (p[0], p[1], p[2]);
            sup_over_a(cat, id, p, x, opts, |a| commutator_operator(cat, x, y, z, a))?
        }
        Higson => {
            let (x, y, z) = (p[0], p[1], p[2]);
            sup_over_a(cat, id, p, x, opts, |a| higson_operator(cat, x, y, z, a))?
        }
        Hophop => {
            let (x, y, z, r) = (p[0], p[1], p[2], p[3]);
            sup_over_a(cat, id, p, x, opts, |a| hophop_operator(cat, x, y, z, r, a))?
        }
        Hiphip => {
            let (x, y, z, r) = (p[0], p[1], p[2], p[3]);
            sup_over_a(cat, id, p, x, opts, |a| hiphip_operator(cat, x, y, z, r, a))?
        }
    })
}

/// Largest matrix-unit count for which the exact Hilbert-Schmidt worst case
/// is added to the candidates.
const EXACT_CANDIDATE_LIMIT: usize = 64;

/// `max ‖L(A)‖` over candidate unit-norm `A` for a map `L` linear in `A`.
/// Candidates are seeded random matrices and, for small levels, the
/// maximiser of `‖L(A)‖_2 / ‖A‖_2` rescaled to operator norm one.
fn sup_over_a(
    cat: &Category,
    id: LemmaId,
    p: &[usize],
    x: usize,
    opts: &CheckOptions,
    f: impl Fn(&Mat) -> Result<Mat>,
) -> Result<Measured> {
    let d = cat.dim(x);
    let mut best: f64 = 0.0;
    if d * d <= EXACT_CANDIDATE_LIMIT {
        if let Some(a) = hs_worst_case(d, &f)? {
            best = best.max(opnorm(&f(&a)?));
        }
    }
    let mut key = vec![id as usize];
    key.extend_from_slice(p);
    let mut rng = stream(opts.seed, tuple_index(&key));
    for _ in 0..opts.samples {
        let a = unit_matrix(&mut rng, d);
        best = best.max(opnorm(&f(&a)?));
    }
    Ok(Measured::plain(best))
}

/// Top right singular vector of `L` on matrix units, as a matrix of unit
/// operator norm.
fn hs_worst_case(d: usize, f: &impl Fn(&Mat) -> Result<Mat>) -> Result<Option<Mat>> {
    let mut cols = Vec::with_capacity(d * d);
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
    let (w, v) = herm_eig(&adjoint(&m).mmul(&m));
    if w.last().is_none_or(|&top| top <= NUMERICAL_ZERO) {
        return Ok(None);
    }
    let top = v.column(d * d - 1).to_owned();
    let a = vec_to_mat(&top, d, d);
    let s = opnorm(&a);
    Ok(Some(a.mapv(|z| z / s)))
}

/// `(p_{a+b} ⊗ 1_c)(1_a ⊗ p_{b+c}) - p_{a+b+c}` on `H_a ⊗ H_b ⊗ H_c`.
pub fn approxcommute_operator(cat: &Category, a: usize, b: usize, c: usize) -> Result<Mat> {
    let (da, dc) = (cat.dim(a), cat.dim(c));
    let left = kron(&cat.cg_projection(a, b, a + b)?, &eye(dc));
    let right = kron(&eye(da), &cat.cg_projection(b, c, b + c)?);
    let top = kron_id_right(&*cat.top(a, b)?, dc, &*cat.top(a + b, c)?);
    Ok(left.mmul(&right) - top.mmul(&adjoint(&top)))
}

/// `(V(a⊗b,z) ⊗ 1) p^{z⊗c}_{z+c} - (1 ⊗ p^{b⊗c}_{b+c})(V(a⊗b,z) ⊗ 1)`.
pub fn best1_operator(cat: &Category, a: usize, b: usize, c: usize, z: usize) -> Result<Mat> {
    let (da, dc) = (cat.dim(a), cat.dim(c));
    let v = cat.intertwiner(a, b, z)?;
    let v1 = kron(&v, &eye(dc));
    let lhs = v1.mmul(&cat.cg_projection(z, c, z + c)?);
    let rhs = kron_id_left(da, &cat.cg_projection(b, c, b + c)?, &v1);
    Ok(lhs - rhs)
}

/// `((V(a⊗b,z) ⊗ 1)V(z⊗c,z+c), (1 ⊗ V(b⊗c,b+c))V(a⊗(b+c),z+c))`.
pub fn best2_pair(cat: &Category, a: usize, b: usize, c: usize, z: usize) -> Result<(Mat, Mat)> {
    let (da, dc) = (cat.dim(a), cat.dim(c));
    let v = cat.intertwiner(a, b, z)?;
    let lhs = kron_id_right(&v, dc, &*cat.top(z, c)?);
    let rhs = kron_id_left(da, &*cat.top(b, c)?, &*cat.intertwiner(a, b + c, z + c)?);
    Ok((lhs, rhs))
}

/// `((1 ⊗ V(b⊗c,b+c)*)(V(a⊗b,z) ⊗ 1), V(a⊗(b+c),z+c)V(z⊗c,z+c)*)`.
pub fn best3_pair(cat: &Category, a: usize, b: usize, c: usize, z: usize) -> Result<(Mat, Mat)> {
    let (da, dc) = (cat.dim(a), cat.dim(c));
    let v1 = kron(&*cat.intertwiner(a, b, z)?, &eye(dc));
    let lhs = kron_id_left(da, &adjoint(&*cat.top(b, c)?), &v1);
    let rhs = cat.intertwiner(a, b + c, z + c)?.mmul(&adjoint(&*cat.top(z, c)?));
    Ok((lhs, rhs))
}

/// `(1 ⊗ V(b⊗c,z)) p^{a⊗z}_{a+z} - (p^{a⊗b}_{a+b} ⊗ 1)(1 ⊗ V(b⊗c,z))`.
pub fn best_a1_operator(cat: &Category, a: usize, b: usize, c: usize, z: usize) -> Result<Mat> {
    let (da, dc) = (cat.dim(a), cat.dim(c));
    let u1 = kron(&eye(da), &*cat.intertwiner(b, c, z)?);
    let lhs = u1.mmul(&cat.cg_projection(a, z, a + z)?);
    let rhs = kron_id_right(&cat.cg_projection(a, b, a + b)?, dc, &u1);
    Ok(lhs - rhs)
}

/// `((1 ⊗ V(b⊗c,z))V(a⊗z,a+z), (V(a⊗b,a+b) ⊗ 1)V((a+b)⊗c,a+z))`.
pub fn best_a2_pair(cat: &Category, a: usize, b: usize, c: usize, z: usize) -> Result<(Mat, Mat)> {
    let (da, dc) = (cat.dim(a), cat.dim(c));
    let lhs = kron_id_left(da, &*cat.intertwiner(b, c, z)?, &*cat.top(a, z)?);
    let rhs = kron_id_right(&*cat.top(a, b)?, dc, &*cat.intertwiner(a + b, c, a + z)?);
    Ok((lhs, rhs))
}

/// `((V(a⊗b,a+b)* ⊗ 1)(1 ⊗ V(b⊗c,z)), V((a+b)⊗c,a+z)V(a⊗z,a+z)*)`.
pub fn best_a3_pair(cat: &Category, a: usize, b: usize, c: usize, z: usize) -> Result<(Mat, Mat)> {
    let (da, dc) = (cat.dim(a), cat.dim(c));
    let u1 = kron(&eye(da), &*cat.intertwiner(b, c, z)?);
    let lhs = kron_id_right(&adjoint(&*cat.top(a, b)?), dc, &u1);
    let rhs = cat.intertwiner(a + b, c, a + z)?.mmul(&adjoint(&*cat.top(a, z)?));
    Ok((lhs, rhs))
}

/// Writes the CSV mirror of a set of reports, one line per grid point.
pub fn write_csv<W: Write>(reports: &[EstimateReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lemma_id", "params", "defect", "bound", "ratio", "upper"])?;
    for r in reports {
        for row in &r.rows {
            let params = r
                .param_names
                .iter()
                .zip(&row.params)
                .map(|(n, v)| format!("{n}={v}"))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                r.lemma_id.clone(),
                params,
                format!("{:e}", row.defect),
                format!("{:e}", row.bound),
                format!("{:e}", row.ratio),
                row.upper.map(|u| format!("{u:e}")).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::gaussian_matrix;
    use crate::tlrep::LevelCaps;
    use crate::FModel;

    fn cat2() -> Category {
        let m = FModel::canonical("suq:0.5:+").unwrap();
        Category::with_caps(m, LevelCaps::default_for(2).with_max_level(14))
    }

    #[test]
    fn phase_distance_trivial_cases() {
        let mut rng = stream(1, 0);
        let v = gaussian_matrix(&mut rng, 5, 3);
        assert!(d_t(&v, &v).value < 1e-9);
        let w = v.mapv(|z| z * C64::from_polar(1.0, -1.234));
        let pd = d_t(&v, &w);
        assert!(pd.value < 1e-7, "{}", pd.value);
        assert!((pd.phase - 1.234).abs() < 1e-6);
    }

    #[test]
    fn phase_distance_matches_brute_force() {
        // HS-orthogonal isometries: the columns of V and W are disjoint
        // standard basis vectors
        let mut v = Mat::zeros((4, 2));
        let mut w = Mat::zeros((4, 2));
        v[[0, 0]] = ONE;
        v[[1, 1]] = ONE;
        w[[2, 0]] = ONE;
        w[[3, 1]] = ONE;
        let pd = d_t(&v, &w);
        assert!((pd.value - 2f64.sqrt()).abs() < 1e-9);

        let mut rng = stream(2, 0);
        let a = gaussian_matrix(&mut rng, 4, 3);
        let b = gaussian_matrix(&mut rng, 4, 3);
        let pd = d_t(&a, &b);
        let brute = (0..1_000_000)
            .step_by(97)
            .map(|k| {
                let t = TAU * k as f64 / 1e6;
                opnorm(&(&a - &b.mapv(|z| z * C64::from_polar(1.0, t))))
            })
            .fold(f64::INFINITY, f64::min);
        assert!(pd.value <= brute + 1e-9);
        assert!(brute - pd.value < 1e-4, "{} {}", pd.value, brute);
    }

    #[test]
    fn fit_rate_synthetic() {
        let q: f64 = 0.5;
        let pts: Vec<(f64, f64)> = (1..8).map(|k| (k as f64, 7.0 * q.powi(2 * k))).collect();
        let f = fit_rate(&pts, q).unwrap();
        assert!((f.slope - 2.0 * q.ln()).abs() < 1e-9);
        assert!((f.rate - 2.0).abs() < 1e-9);
        assert!((f.constant - 7.0).abs() < 1e-6);

        let flat: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 3.0)).collect();
        assert!(fit_rate(&flat, q).unwrap().slope.abs() < 1e-12);

        let short = [(1.0, 0.5), (2.0, 1e-15), (3.0, 0.1)];
        assert!(matches!(fit_rate(&short, q), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn fit_rate_noisy() {
        use rand::Rng;
        let q: f64 = 0.5;
        let mut rng = stream(3, 0);
        let pts: Vec<(f64, f64)> = (1..=12)
            .map(|k| (k as f64, q.powi(k) * (1.0 + 0.01 * rng.gen::<f64>())))
            .collect();
        let f = fit_rate(&pts, q).unwrap();
        assert!((f.slope - q.ln()).abs() < 0.05);
    }

    #[test]
    fn lemma_names_round_trip() {
        for id in LemmaId::ALL {
            assert_eq!(id.name().parse::<LemmaId>().unwrap(), id);
        }
        assert_eq!("best-a2".parse::<LemmaId>().unwrap(), LemmaId::BestA2);
        assert!("best4".parse::<LemmaId>().is_err());
    }

    #[test]
    fn approxcommute_corners() {
        let c = cat2();
        for b in 0..3 {
            for cc in 0..3 {
                let d = opnorm(&approxcommute_operator(&c, 0, b, cc).unwrap());
                assert!(d < 1e-10, "a=0 b={b} c={cc}: {d}");
            }
        }
    }

    #[test]
    fn grid_cap_is_reported() {
        let m = FModel::canonical("suq:0.5:+").unwrap();
        let c = Category::with_caps(m, LevelCaps::default_for(2).with_max_level(6));
        let opts = CheckOptions::for_lemma(LemmaId::ApproxCommute, 0);
        let err = check_lemma(&c, LemmaId::ApproxCommute, &[vec![3, 2, 2]], &opts).unwrap_err();
        assert!(matches!(err, Error::GridCap { level: 7, cap: 6, .. }), "{err}");
    }
}
