//! Suite runners behind `qgroup-lab check`.
//!
//! Each suite evaluates a fixed list of named checks against a [`Category`]
//! and returns a [`SuiteReport`]. Reports contain no timing data, so two runs
//! with the same inputs serialise to the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boundary::{equivalent_category, harmonic_defect, injectivity_bound};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, eye, opnorm, scalar_part, trace, MatMul, Mat};
use crate::qlib::irrep_dim;
use crate::sampling::{stream, unit_matrix};
use crate::spectral::{
    c1, c2, commutation_defect, d_s, gap_check, goedgeteld_check, involution_defect,
    lemma_estimates, modular_defect, oracle_check, sd_group, CoefAlgebra, SdKind,
};
use crate::tlrep::Category;
use crate::verify::{
    check_lemma_with_skipped, default_grid, fit_grid_to_caps, CheckOptions, EstimateReport,
    LemmaId,
};
use crate::walk::{
    eta_norm, eta_sequence, green_table, martin_defect, martin_ratio, GreenFunction, GreenRow,
    WalkMeasure, WalkOperator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Boundary,
    Walk,
    Spectral,
    Appendix,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Algebra, Suite::Boundary, Suite::Walk, Suite::Spectral, Suite::Appendix];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Boundary => "boundary",
            Suite::Walk => "walk",
            Suite::Spectral => "spectral",
            Suite::Appendix => "appendix",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

/// Parses suite names, accepting `all` and comma-separated lists.
pub fn parse_suites<S: AsRef<str>>(names: &[S]) -> Result<BTreeSet<Suite>> {
    let mut out = BTreeSet::new();
    for name in names {
        for part in name.as_ref().split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Suite::ALL);
            } else {
                out.insert(part.parse()?);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no suite selected".into()));
    }
    Ok(out)
}

/// Named tolerances; every key can be overridden with `--tol name=value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    // algebra
    ("jw", 1e-9),
    ("trace", 1e-8),
    ("state", 1e-9),
    ("intertwiner", 1e-8),
    ("slice", 1e-9),
    // boundary
    ("harmonic", 1e-10),
    ("injectivity_floor", 0.1),
    ("injectivity_slack", 1e-9),
    // walk
    ("row_sum", 1e-12),
    ("green_symmetry", 1e-6),
    ("martin_ratio", 1e-2),
    ("truncation", 1e-6),
    ("martin_exact", 1e-12),
    ("eta", 1e-8),
    ("eta_limit", 1e-3),
    // spectral
    ("vacuum", 1e-10),
    ("constants", 1e-6),
    ("gap", 1e-6),
    ("goedgeteld", 0.99),
    ("oracle", 1e-8),
    ("coef_algebra", 1e-8),
    ("sd", 1e-9),
    // appendix
    ("rate", 0.15),
    ("headroom", 1.05),
];

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !self.0.contains_key(name) {
            let known: Vec<_> = self.0.keys().map(String::as_str).collect();
            return Err(Error::Config(format!(
                "unknown tolerance '{name}' (known: {})",
                known.join(", ")
            )));
        }
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Config(format!("tolerance {name}={value} must be finite and ≥ 0")));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    /// Parses `name=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--tol expects name=value, got '{pair}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("--tol {name}: '{value}' is not a number")))?;
        self.set(name.trim(), value)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub pass: bool,
    /// False when the model does not satisfy the hypotheses the check needs;
    /// such checks are reported but do not affect the verdict.
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl Check {
    /// Passes when `measured ≤ limit`.
    pub fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            limit,
            pass: measured <= limit,
            applicable: true,
            detail: None,
        }
    }

    /// Passes when `measured ≥ limit`.
    pub fn at_least(name: &str, measured: f64, limit: f64) -> Self {
        Check { pass: measured >= limit, ..Check::at_most(name, measured, limit) }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Check::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn applicable_if(mut self, applicable: bool) -> Self {
        self.applicable = applicable;
        self
    }

    /// Counts toward the verdict.
    pub fn ok(&self) -> bool {
        self.pass || !self.applicable
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub appendix: Vec<EstimateReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub green_table: Vec<GreenRow>,
    pub pass: bool,
}

/// Inputs shared by all suites.
pub struct SuiteContext {
    pub cat: Category,
    pub truncation: usize,
    pub seed: u64,
    pub tol: Tolerances,
    /// Truncation level `N` of the spectral suite (lowered to fit the caps
    /// and the size budget).
    pub spectral_level: usize,
}

impl SuiteContext {
    pub fn new(cat: Category, truncation: usize, seed: u64) -> Self {
        SuiteContext { cat, truncation, seed, tol: Tolerances::default(), spectral_level: 5 }
    }

    fn cap(&self) -> usize {
        self.cat.caps().max_level
    }
}

pub fn run_suite(ctx: &SuiteContext, suite: Suite) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite,
        checks: Vec::new(),
        appendix: Vec::new(),
        green_table: Vec::new(),
        pass: true,
    };
    match suite {
        Suite::Algebra => report.checks = algebra(ctx)?,
        Suite::Boundary => report.checks = boundary(ctx)?,
        Suite::Walk => {
            report.checks = walk(ctx)?;
            let rows = ctx.truncation.min(60).saturating_sub(1);
            report.green_table =
                green_table(ctx.cat.q(), &WalkMeasure::delta(1), rows, ctx.truncation)?;
        }
        Suite::Spectral => report.checks = spectral(ctx)?,
        Suite::Appendix => {
            report.appendix = appendix(ctx)?;
            report.checks = report
                .appendix
                .iter()
                .map(|r| {
                    Check::flag(&format!("appendix.{}", r.lemma_id), r.pass).with_detail(json!({
                        "rate": r.fitted.rate,
                        "expected_rate": r.fitted.expected_rate,
                        "constant": r.fitted.constant,
                        "headroom_ok": r.fitted.headroom_ok,
                        "rows": r.rows.len(),
                        "skipped": r.skipped,
                    }))
                })
                .collect();
        }
    }
    report.pass = report.checks.iter().all(Check::ok);
    Ok(report)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || v > m { v } else { m })
}

fn algebra(ctx: &SuiteContext) -> Result<Vec<Check>> {
    let cat = &ctx.cat;
    let (n, cap, tol) = (cat.n(), ctx.cap(), &ctx.tol);
    let q = cat.q();
    let mut checks = Vec::new();

    // Jones-Wenzl projectors, both constructions, up to the ambient cap.
    let jw_top = (1..=cap.min(12))
        .take_while(|&k| n.pow(k as u32) <= cat.caps().ambient)
        .last()
        .unwrap_or(0);
    let mut worst = 0.0f64;
    let mut ranks_ok = true;
    let mut rows = Vec::new();
    for k in 1..=jw_top {
        let p = cat.jones_wenzl(k)?;
        let alt = cat.jones_wenzl_alt(k)?;
        let d = p.defects(cat.model());
        let dist = p.distance(&alt);
        let scaled = [d.idempotency, d.cup_killing, d.commutator, dist]
            .into_iter()
            .map(|v| v / (n as f64).powi(k as i32));
        let m = max_of(scaled);
        worst = worst.max(m);
        ranks_ok &= d.rank == d.expected_rank && d.rank == irrep_dim(n, k);
        rows.push(json!({ "k": k, "max_defect_scaled": m, "rank": d.rank }));
    }
    checks.push(
        Check::at_most("jones_wenzl.defects", worst, tol.get("jw"))
            .with_detail(json!({ "k_max": jw_top, "levels": rows })),
    );
    checks.push(Check::flag("jones_wenzl.rank", ranks_ok));

    // Tr(Q_x) = Tr(Q_x^{-1}) = [x+1]
    let top = cap.min(6);
    let mut worst = 0.0f64;
    for x in 0..=top {
        let expect = q.dim(x);
        let t = trace(&*cat.q_x(x)?).re;
        let ti = trace(&*cat.q_x_inv(x)?).re;
        worst = worst.max(rel(t, expect)).max(rel(ti, expect));
    }
    checks.push(
        Check::at_most("states.trace_q", worst, tol.get("trace")).with_detail(json!({ "x_max": top })),
    );

    // ψ_x through the invariant vector
    let mut worst = 0.0f64;
    for x in 0..=top {
        let mut rng = stream(ctx.seed, 1000 + x as u64);
        for _ in 0..20 {
            let a = unit_matrix(&mut rng, cat.dim(x));
            worst = worst.max((cat.psi_via_vector(x, &a)? - cat.psi(x, &a)?).norm());
        }
    }
    checks.push(Check::at_most("states.psi_vector", worst, tol.get("state")));

    // intertwiners and their slices
    let side = if n <= 2 { 6 } else { 4 };
    let (mut iso, mut complete, mut slice) = (0.0f64, 0.0f64, 0.0f64);
    let mut pairs = 0;
    for a in 0..=side {
        for b in 0..=side {
            if a + b > cap {
                continue;
            }
            pairs += 1;
            let d = cat.dim(a) * cat.dim(b);
            let mut sum = Mat::zeros((d, d));
            for z in crate::qlib::fusion(a, b) {
                let v = cat.intertwiner(a, b, z)?;
                let vv = adjoint(&v).mmul(&*v);
                iso = iso.max(opnorm(&(vv - eye(v.ncols()))));
                sum = sum + v.mmul(&adjoint(&v));
                let sliced = cat.slice_psi_right(a, b, &cat.cg_projection(a, b, z)?)?;
                let (value, dev) = scalar_part(&sliced);
                let expect = q.dim(z) / (q.dim(a) * q.dim(b));
                slice = slice.max(dev).max((value - expect).norm());
            }
            complete = complete.max(opnorm(&(sum - eye(d))));
        }
    }
    let detail = json!({ "side": side, "pairs": pairs, "level_cap": cap });
    checks.push(
        Check::at_most("intertwiner.isometry", iso, tol.get("intertwiner")).with_detail(detail.clone()),
    );
    checks.push(
        Check::at_most("intertwiner.completeness", complete, tol.get("intertwiner"))
            .with_detail(detail),
    );
    checks.push(Check::at_most("intertwiner.slice", slice, tol.get("slice")));
    Ok(checks)
}

fn boundary(ctx: &SuiteContext) -> Result<Vec<Check>> {
    let cat = &ctx.cat;
    let (cap, tol) = (ctx.cap(), &ctx.tol);
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for x in 0..=cap {
        for y in 0..=cap - x {
            let mut rng = stream(ctx.seed, 2000 + (x * 64 + y) as u64);
            let a = unit_matrix(&mut rng, cat.dim(x));
            worst = worst.max(harmonic_defect(cat, x, y, &a)?);
        }
    }
    checks.push(Check::at_most("boundary.harmonic", worst, tol.get("harmonic")));

    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut transferred = 0;
    for x in 0..=5 {
        for y in 0..=5 {
            let b = injectivity_bound(cat, x, y)?;
            lo = lo.min(b.min);
            hi = hi.max(b.max);
            if b.method != crate::boundary::BoundMethod::Direct {
                transferred += 1;
            }
        }
    }
    let detail = json!({ "min": lo, "max": hi, "equivalent_2x2_points": transferred });
    checks.push(
        Check::at_least("boundary.injectivity_min", lo, tol.get("injectivity_floor"))
            .with_detail(detail.clone()),
    );
    checks.push(
        Check::at_most("boundary.injectivity_max", hi, 1.0 + tol.get("injectivity_slack"))
            .with_detail(detail),
    );
    Ok(checks)
}

fn walk(ctx: &SuiteContext) -> Result<Vec<Check>> {
    let cat = &ctx.cat;
    let q = cat.q();
    let (cap, tol, trunc) = (ctx.cap(), &ctx.tol, ctx.truncation);
    let delta = WalkMeasure::delta(1);
    let mut checks = Vec::new();

    let op = WalkOperator::new(q, &delta, trunc);
    let rows = 20.min(op.incomplete_from.saturating_sub(1));
    let worst = max_of((0..=rows).map(|x| (op.row_sum(x) - 1.0).abs()));
    checks.push(
        Check::at_most("walk.row_sums", worst, tol.get("row_sum")).with_detail(json!({ "x_max": rows })),
    );

    let green = GreenFunction::new(q, &delta, trunc)?;
    let mut worst = 0.0f64;
    for x in 0..=10.min(trunc) {
        let expect = green.value(x, 0)? * q.dim(x).powi(2);
        worst = worst.max(rel(green.value(0, x)?, expect));
    }
    checks.push(Check::at_most("walk.green_symmetry", worst, tol.get("green_symmetry")));

    let at = 20.min(trunc.saturating_sub(2));
    let ratio = martin_ratio(q, &delta, at, trunc)?;
    let q2 = q.value().powi(2);
    checks.push(
        Check::at_most("walk.martin_ratio", (ratio - q2).abs(), tol.get("martin_ratio"))
            .with_detail(json!({ "x": at, "ratio": ratio, "q_squared": q2 })),
    );

    let doubled = GreenFunction::new(q, &delta, 2 * trunc)?;
    let mut worst = 0.0f64;
    for x in 0..=30.min(trunc / 4) {
        for y in 0..=30.min(trunc / 4) {
            worst = worst.max(rel(green.value(x, y)?, doubled.value(x, y)?));
        }
    }
    checks.push(
        Check::at_most("walk.truncation", worst, tol.get("truncation"))
            .with_detail(json!({ "truncations": [trunc, 2 * trunc] })),
    );

    // Martin blocks: for δ₁ the limit is attained exactly, so the decay is
    // measured with a measure charging two levels.
    let mixed = WalkMeasure::new([(1, 0.5), (2, 0.5)])?;
    let mixed_green = GreenFunction::new(q, &mixed, trunc)?;
    let mut decreasing = true;
    let mut exact = 0.0f64;
    let mut sequences = Vec::new();
    for x in 0..=2 {
        let mut rng = stream(ctx.seed, 3000 + x as u64);
        let a = unit_matrix(&mut rng, cat.dim(x));
        let mut seq = Vec::new();
        for y in x..=x + 3 {
            if x + y > cap {
                break;
            }
            seq.push(martin_defect(cat, &mixed_green, &a, x, y)?);
        }
        if x == 0 {
            exact = max_of(seq.iter().copied());
        } else {
            decreasing &= seq.len() >= 2 && seq.windows(2).all(|w| w[1] < w[0]);
        }
        sequences.push(json!({ "x": x, "defects": seq }));
    }
    checks.push(
        Check::flag("walk.martin_decreasing", decreasing)
            .with_detail(json!({ "measure": [[1, 0.5], [2, 0.5]], "sequences": sequences })),
    );
    checks.push(Check::at_most("walk.martin_exact_x0", exact, tol.get("martin_exact")));

    let mut worst = 0.0f64;
    let mut transferred = 0;
    for x in 0..=4 {
        for y in 0..=4 {
            let value = if x + y <= cap {
                eta_norm(cat, x, y)?
            } else {
                transferred += 1;
                eta_norm(&equivalent_category(cat.model(), x + y)?, x, y)?
            };
            let expect = q.dim(x + y) / (q.dim(x) * q.dim(y));
            worst = worst.max((value - expect).abs());
        }
    }
    checks.push(
        Check::at_most("walk.eta_norm", worst, tol.get("eta"))
            .with_detail(json!({ "equivalent_2x2_points": transferred })),
    );

    let eta = eta_sequence(q, 25);
    checks.push(
        Check::at_most("walk.eta_limit", (eta - (1.0 - q2)).abs(), tol.get("eta_limit"))
            .with_detail(json!({ "x": 25, "value": eta })),
    );
    Ok(checks)
}

/// Interior dimension budget for the spectral suite.
const SPECTRAL_BUDGET: usize = 20_000;
/// `dim L²` budget for the coefficient-algebra oracle.
const ORACLE_BUDGET: usize = 1_500;

/// Largest `N ≤ wanted` within the caps whose interior fits the budget.
pub fn spectral_level(cat: &Category, wanted: usize) -> usize {
    let mut top = wanted.min(cat.caps().max_level).max(2);
    while top > 2 && (0..top).map(|x| cat.dim(x).pow(2)).sum::<usize>() > SPECTRAL_BUDGET {
        top -= 1;
    }
    top
}

/// Largest `N ≤ 3` for which the oracle fits its budget.
pub fn oracle_level(cat: &Category) -> usize {
    let mut top = 3.min(cat.caps().max_level);
    while top > 1 && (0..=top).map(|x| cat.dim(x).pow(2)).sum::<usize>() > ORACLE_BUDGET {
        top -= 1;
    }
    top
}

fn spectral(ctx: &SuiteContext) -> Result<Vec<Check>> {
    let cat = &ctx.cat;
    let model = cat.model();
    let tol = &ctx.tol;
    let hyp = model.hypotheses();
    let top = spectral_level(cat, ctx.spectral_level);
    let mut checks = Vec::new();

    // constants, recomputed here from the norms of Q and the q-numbers
    let q = cat.q();
    let qn = model.q_norm();
    let (two, three) = (q.dim(1), q.dim(2));
    let inner = 1.0 - 2.0 * qn * qn * (1.0 + two) / (two * three);
    let c2_direct = 2.0 * qn * (q.value() / two).sqrt();
    let c1_value = c1(model);
    let c1_err = match c1_value {
        Some(v) if inner >= 0.0 => (v - 2f64.sqrt() * inner.sqrt()).abs(),
        None if inner < 0.0 => 0.0,
        _ => f64::INFINITY,
    };
    let c_err = c1_err.max((c2(model) - c2_direct).abs());
    checks.push(
        Check::at_most("spectral.constants", c_err, tol.get("constants"))
            .with_detail(json!({ "c1": c1_value, "c2": c2(model) })),
    );
    checks.push(
        Check::flag("spectral.c2_below_c1", c1_value.is_some_and(|v| c2(model) < v))
            .applicable_if(hyp.sqrt5),
    );

    let mut vacuum = 0.0f64;
    let mut d_err = 0.0f64;
    let mut gap_ok = true;
    let mut gaps = Vec::new();
    for (i, s) in [0.0, 0.7, 1.3].into_iter().enumerate() {
        let g = gap_check(cat, top, s, 1000, ctx.seed.wrapping_add(i as u64))?;
        if s == 0.0 {
            vacuum = g.t_vacuum_sq.sqrt();
        }
        d_err = d_err.max((g.t_vacuum_sq - d_s(model, s)).abs());
        gap_ok &= g.pass;
        gaps.push(json!({
            "s": s, "min_margin": g.min_margin, "worst": g.worst,
            "eigenvectors": g.eigenvectors, "random_vectors": g.random_vectors,
        }));
    }
    checks.push(Check::at_most("spectral.t_vacuum", vacuum, tol.get("vacuum")));
    checks.push(Check::at_most("spectral.d_s", d_err, tol.get("vacuum")));
    checks.push(
        Check::flag("spectral.gap_inequality", gap_ok)
            .applicable_if(hyp.sqrt5)
            .with_detail(json!({ "top": top, "samples": gaps })),
    );

    let g = goedgeteld_check(cat, top, ctx.seed)?;
    let sp = &g.spectrum;
    let (second, bound) = (sp.second, sp.bound.unwrap_or(f64::NAN));
    checks.push(
        Check::at_most("spectral.second_eigenvalue", second, bound + tol.get("gap"))
            .applicable_if(hyp.sqrt5)
            .with_detail(json!({
                "top": top, "interior_dim": sp.interior_dim, "method": sp.method,
                "smallest": sp.smallest, "vacuum_defect": sp.vacuum_defect,
            })),
    );
    checks.push(
        Check::at_most("spectral.goedgeteld", g.value, tol.get("goedgeteld"))
            .applicable_if(g.hypothesis_met)
            .with_detail(json!({ "q_norm_sq": g.q_norm_sq, "p_norm": g.p_norm })),
    );

    let otop = oracle_level(cat);
    let mut worst = 0.0f64;
    for s in [0.0, 0.7] {
        worst = worst.max(oracle_check(cat, otop, s)?.gram_aligned);
    }
    checks.push(
        Check::at_most("spectral.oracle", worst, tol.get("oracle")).with_detail(json!({ "top": otop })),
    );

    let alg = CoefAlgebra::new(cat, 2.min(otop))?;
    let coef = max_of([
        commutation_defect(&alg)?,
        involution_defect(&alg)?,
        modular_defect(&alg, 0.37, ctx.seed)?,
    ]);
    checks.push(Check::at_most("spectral.coefficient_algebra", coef, tol.get("coef_algebra")));

    let mut ok = true;
    let xmax = 4.min(ctx.cap().saturating_sub(1));
    for x in 1..=xmax {
        for s in [0.0, 0.5, 1.0] {
            ok &= lemma_estimates(cat, x, s)?.pass;
        }
    }
    checks.push(Check::flag("spectral.level_estimates", ok).with_detail(json!({ "x_max": xmax })));

    let sd = sd_group(model, tol.get("sd"));
    checks.push(sd_check(&sd, tol.get("sd")));
    Ok(checks)
}

/// Every eigenvalue ratio must be an integer power of the detected
/// generator, or 1 for the trivial group.
fn sd_check(sd: &crate::spectral::SdReport, tol: f64) -> Check {
    let err = match (sd.kind, sd.generator) {
        (SdKind::Trivial, _) => max_of(sd.ratios.iter().map(|r| (r - 1.0).abs())),
        (SdKind::Lattice, Some(g)) => max_of(sd.ratios.iter().map(|r| {
            let k = (r.ln() / g.ln()).round();
            rel(*r, g.powf(k))
        })),
        _ => 0.0,
    };
    Check::at_most("spectral.sd", err, tol).with_detail(json!({
        "kind": sd.kind, "generator": sd.generator, "evidence": sd.evidence,
    }))
}

fn appendix(ctx: &SuiteContext) -> Result<Vec<EstimateReport>> {
    let cat = &ctx.cat;
    LemmaId::ALL
        .into_iter()
        .map(|id| {
            let (grid, skipped) = fit_grid_to_caps(id, cat, default_grid(id, cat.n()));
            let mut opts = CheckOptions::for_lemma(id, ctx.seed);
            opts.rate_tolerance = opts.rate_tolerance.min(ctx.tol.get("rate"));
            opts.headroom = ctx.tol.get("headroom");
            check_lemma_with_skipped(cat, id, &grid, skipped, &opts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse() {
        let all = parse_suites(&["all"]).unwrap();
        assert_eq!(all.len(), 5);
        let two = parse_suites(&["walk,algebra"]).unwrap();
        assert_eq!(two.into_iter().collect::<Vec<_>>(), vec![Suite::Algebra, Suite::Walk]);
        assert!(parse_suites(&["nope"]).is_err());
        assert!(parse_suites::<&str>(&[]).is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set_pair("gap=1e-4").unwrap();
        assert_eq!(t.get("gap"), 1e-4);
        assert!(t.set_pair("bogus=1").is_err());
        assert!(t.set_pair("gap").is_err());
        assert!(t.set_pair("gap=-1").is_err());
    }

    #[test]
    fn failed_checks_do_not_count_when_inapplicable() {
        let c = Check::at_most("x", 2.0, 1.0).applicable_if(false);
        assert!(!c.pass && c.ok());
        assert!(!Check::at_most("y", f64::NAN, 1.0).pass);
    }
}
