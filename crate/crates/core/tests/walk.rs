use qgroup_lab::fmodel::FModel;
use qgroup_lab::linalg::opnorm;
use qgroup_lab::sampling::{stream, unit_matrix};
use qgroup_lab::tlrep::Category;
use qgroup_lab::walk::{
    eta_norm, eta_sequence, martin_block, martin_defect, martin_limit, n_step, poisson_defect,
    GreenFunction, WalkMeasure, WalkOperator,
};

fn cat(spec: &str) -> Category {
    Category::new(FModel::canonical(spec).unwrap())
}

/// `[k]_q` from its closed form.
fn qnum(q: f64, k: usize) -> f64 {
    (q.powi(-(k as i32)) - q.powi(k as i32)) / (1.0 / q - q)
}

#[test]
fn two_level_measure_is_stochastic() {
    let c = cat("suq:0.4:+");
    let mu = WalkMeasure::new([(1, 0.25), (2, 0.75)]).unwrap();
    let op = WalkOperator::new(c.q(), &mu, 80);
    for x in 0..op.incomplete_from {
        assert!((op.row_sum(x) - 1.0).abs() < 1e-12);
    }
    let steps = n_step(c.q(), &mu, 5, 80, 1e-9);
    assert!(steps.warning.is_none());
    assert!((steps.matrix.row(0).sum() - 1.0).abs() < 1e-12);
}

#[test]
fn green_function_reversibility() {
    // the stationary measure of the walk is [x+1]²
    for spec in ["identity:4", "suq:0.5:-"] {
        let c = cat(spec);
        let q = c.q().value();
        let mu = WalkMeasure::new([(1, 0.5), (2, 0.5)]).unwrap();
        let g = GreenFunction::new(c.q(), &mu, 200).unwrap();
        for x in 0..=8 {
            for y in 0..=8 {
                let lhs = g.value(x, y).unwrap() * qnum(q, x + 1).powi(2);
                let rhs = g.value(y, x).unwrap() * qnum(q, y + 1).powi(2);
                assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs(), "{spec} ({x},{y})");
            }
        }
    }
}

#[test]
fn martin_block_is_exact_for_the_generating_measure() {
    // h(x) = q^x/[x+1] is harmonic for δ₁, so g(y',0)/g(y,0) = h(y')/h(y)
    let c = cat("identity:3");
    let green = GreenFunction::new(c.q(), &WalkMeasure::delta(1), 200).unwrap();
    for x in 1..=2 {
        let a = unit_matrix(&mut stream(5, x as u64), c.dim(x));
        for y in x..=x + 2 {
            let d = martin_defect(&c, &green, &a, x, y).unwrap();
            let scale = opnorm(&martin_limit(&c, &a, x, y).unwrap());
            assert!(d < 1e-10 * scale, "x={x} y={y}: {d}");
        }
    }
}

#[test]
fn martin_block_converges_for_two_levels() {
    let c = cat("suq:0.5:+");
    let mu = WalkMeasure::new([(1, 0.5), (2, 0.5)]).unwrap();
    let green = GreenFunction::new(c.q(), &mu, 200).unwrap();
    let a = unit_matrix(&mut stream(6, 0), c.dim(2));
    let seq: Vec<f64> = (2..=7).map(|y| martin_defect(&c, &green, &a, 2, y).unwrap()).collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    assert!(seq[5] < 0.1 * seq[0]);
    let block = martin_block(&c, &green, &a, 2, 4).unwrap();
    assert_eq!(block.dim(), (c.dim(4), c.dim(4)));
}

#[test]
fn poisson_defect_is_stable_in_z() {
    let c = cat("suq:0.5:+");
    let a = unit_matrix(&mut stream(8, 0), c.dim(1));
    let values: Vec<f64> = (2..=5).map(|z| poisson_defect(&c, &a, 1, 2, z).unwrap()).collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    assert!(values.iter().all(|v| v.is_finite()));
    assert!(spread <= values[0].max(1e-12), "{values:?}");
    assert!(poisson_defect(&c, &a, 2, 1, 3).is_err());
}

#[test]
fn eta_scalars() {
    for spec in ["identity:3", "suq:0.2:-"] {
        let c = cat(spec);
        let q = c.q().value();
        for x in 0..=3 {
            for y in 0..=3 {
                let expect = qnum(q, x + y + 1) / (qnum(q, x + 1) * qnum(q, y + 1));
                assert!((eta_norm(&c, x, y).unwrap() - expect).abs() < 1e-10);
            }
        }
        for x in [0, 5, 25] {
            let direct = q.powi(-(x as i32)) / qnum(q, x + 1);
            assert!((eta_sequence(c.q(), x) - direct).abs() < 1e-12);
        }
    }
}
