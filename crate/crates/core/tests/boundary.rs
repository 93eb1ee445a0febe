use qgroup_lab::boundary::{
    coproduct_block, compactif_commutator, harmonic_defect, higson_defect, hiphip_defect,
    hophop_defect, inductive_defect, injectivity_bound, psi_map, BlockElement,
};
use qgroup_lab::fmodel::FModel;
use qgroup_lab::linalg::{eye, herm_eigvals, kron, opnorm, Mat, C64};
use qgroup_lab::sampling::{stream, unit_matrix};
use qgroup_lab::tlrep::Category;

fn cat(spec: &str) -> Category {
    Category::new(FModel::canonical(spec).unwrap())
}

fn random(cat: &Category, x: usize, index: u64) -> Mat {
    unit_matrix(&mut stream(17, index), cat.dim(x))
}

#[test]
fn psi_map_is_unital_and_completely_positive() {
    for spec in ["identity:3", "suq:0.5:-"] {
        let c = cat(spec);
        for (x, y) in [(1, 1), (1, 2), (2, 1)] {
            let one = psi_map(&c, x, y, &eye(c.dim(x))).unwrap();
            assert!(opnorm(&(one - eye(c.dim(x + y)))) < 1e-12);

            // Choi matrix Σ E_ij ⊗ ψ(E_ij) is positive
            let (dx, dy) = (c.dim(x), c.dim(x + y));
            let mut choi = Mat::zeros((dx * dy, dx * dy));
            for i in 0..dx {
                for j in 0..dx {
                    let mut e = Mat::zeros((dx, dx));
                    e[[i, j]] = C64::new(1.0, 0.0);
                    choi = choi + kron(&e, &psi_map(&c, x, y, &e).unwrap());
                }
            }
            let min = herm_eigvals(&choi)[0];
            assert!(min > -1e-12, "{spec} ({x},{y}): Choi eigenvalue {min}");
        }
    }
}

#[test]
fn states_are_preserved() {
    let c = cat("suq:0.3:+");
    for x in 0..=3 {
        for y in 0..=3 {
            assert!(harmonic_defect(&c, x, y, &random(&c, x, (10 * x + y) as u64)).unwrap() < 1e-12);
        }
    }
}

#[test]
fn trivial_arguments_give_zero_defects() {
    let c = cat("identity:3");
    // z ≤ y keeps every fusion level of (x+y) ⊗ z at or above x
    for (x, y, z) in [(1, 1, 1), (2, 2, 1), (1, 3, 2)] {
        let a = random(&c, x, 1);
        assert!(higson_defect(&c, x, y, 0, &a).unwrap() < 1e-12, "z = 0");
        let one = eye(c.dim(x));
        assert!(higson_defect(&c, x, y, z, &one).unwrap() < 1e-12, "A = 1");
        assert!(hophop_defect(&c, x, y, z, 1, &one).unwrap() < 1e-12);
        assert!(hiphip_defect(&c, x, y, z, 1, &one).unwrap() < 1e-12);
        assert!(compactif_commutator(&c, x, y, z, &one).unwrap() < 1e-12);
        // x = 0: A is a scalar
        let s = eye(1).mapv(|v| v * 2.5);
        assert!(hophop_defect(&c, 0, y, z, 0, &s).unwrap() < 1e-12);
        assert!(inductive_defect(&c, 0, y, z, &s, &random(&c, y, 2)).unwrap() < 1e-12);
    }
}

#[test]
fn hophop_at_r_zero_is_the_inductive_defect() {
    let c = cat("suq:0.5:+");
    for (x, y, z) in [(1, 1, 1), (2, 2, 1), (3, 1, 2)] {
        let a = random(&c, x, 3);
        let hop = hophop_defect(&c, x, y, z, 0, &a).unwrap();
        let ind = inductive_defect(&c, x, y, z, &a, &eye(c.dim(x + y))).unwrap();
        assert!((hop - ind).abs() < 1e-12, "{hop} vs {ind}");
    }
}

#[test]
fn defects_decay_along_y() {
    let c = cat("suq:0.5:+");
    let a = random(&c, 2, 4);
    let seq: Vec<f64> = (1..=5).map(|y| hophop_defect(&c, 2, y, 2, 1, &a).unwrap()).collect();
    for w in seq.windows(2) {
        assert!(w[1] < w[0], "{seq:?}");
    }
    // bound C q^{y+r}: the ratio to q^y stays bounded
    let ratios: Vec<f64> = seq.iter().enumerate().map(|(i, d)| d / 0.5f64.powi(i as i32 + 1)).collect();
    assert!(ratios.iter().all(|r| *r < 2.0), "{ratios:?}");
}

#[test]
fn injectivity_is_trivial_at_y_zero() {
    let c = cat("identity:3");
    for x in 0..=3 {
        let b = injectivity_bound(&c, x, 0).unwrap();
        assert!((b.min - 1.0).abs() < 1e-10 && (b.max - 1.0).abs() < 1e-10, "{b:?}");
    }
    let b = injectivity_bound(&c, 5, 5).unwrap();
    assert!(b.min >= 0.1 && b.max <= 1.0 + 1e-9, "{b:?}");
}

#[test]
fn coproduct_of_identity_and_indicators() {
    let c = cat("identity:3");
    let (x, y) = (2, 1);
    let one = BlockElement::identity(&c, 0..=3);
    let d = c.dim(x) * c.dim(y);
    assert!(opnorm(&(coproduct_block(&c, &one, x, y).unwrap() - eye(d))) < 1e-12);
    for z in [1, 3] {
        let ind = BlockElement::indicator(&c, z);
        let p = c.cg_projection(x, y, z).unwrap();
        assert!(opnorm(&(coproduct_block(&c, &ind, x, y).unwrap() - p)) < 1e-12);
    }
}
