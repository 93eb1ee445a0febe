use std::collections::BTreeMap;

use qgroup_lab::fmodel::FModel;
use qgroup_lab::linalg::{fro_norm, Mat};
use qgroup_lab::spectral::{
    assemble, c1, c2, commutation_defect, d_s, gap_check, interior_spectrum, involution_defect,
    modular_defect, oracle_check, paired_model, sd_group, Coef, CoefAlgebra, L2Vector, SdKind,
};
use qgroup_lab::tlrep::Category;

fn cat(spec: &str) -> Category {
    Category::new(FModel::canonical(spec).unwrap())
}

fn distance(a: &BTreeMap<usize, Coef>, b: &BTreeMap<usize, Coef>) -> f64 {
    let levels: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    levels
        .into_iter()
        .map(|l| match (a.get(l), b.get(l)) {
            (Some(x), Some(y)) => fro_norm(&(&x.m - &y.m)),
            (Some(x), None) | (None, Some(x)) => fro_norm(&x.m),
            (None, None) => 0.0,
        })
        .fold(0.0, f64::max)
}

#[test]
fn coefficient_products_are_associative_and_unital() {
    for spec in ["identity:3", "suq:0.5:+"] {
        let c = cat(spec);
        let n = c.n();
        let alg = CoefAlgebra::new(&c, 3).unwrap();
        let gens = [Coef::generator(n, 0, 1), Coef::generator(n, 1, 1), Coef::generator(n, 1, 0)];
        for a in &gens {
            let left = alg.product(&Coef::unit(), a).unwrap();
            assert!(fro_norm(&(&left[&1].m - &a.m)) < 1e-12);
            for b in &gens {
                for d in &gens {
                    let ab: Vec<Coef> = alg.product(a, b).unwrap().into_values().collect();
                    let bd: Vec<Coef> = alg.product(b, d).unwrap().into_values().collect();
                    let lhs = alg.product_sum(&ab, std::slice::from_ref(d)).unwrap();
                    let rhs = alg.product_sum(std::slice::from_ref(a), &bd).unwrap();
                    assert!(distance(&lhs, &rhs) < 1e-12, "{spec}");
                }
            }
        }
    }
}

#[test]
fn gns_round_trip() {
    let c = cat("suq:0.3:-");
    let alg = CoefAlgebra::new(&c, 2).unwrap();
    let m = Mat::from_shape_fn((3, 3), |(i, j)| qgroup_lab::linalg::C64::new(i as f64 - 0.5, j as f64));
    let coef = Coef { level: 2, m: m.clone() };
    let back = alg.from_gns(2, &alg.gns(&coef));
    assert!(fro_norm(&(back.m - m)) < 1e-12);
}

#[test]
fn left_and_right_actions() {
    for spec in ["identity:3", "suq:0.5:+"] {
        let c = cat(spec);
        let alg = CoefAlgebra::new(&c, 2).unwrap();
        assert!(commutation_defect(&alg).unwrap() < 1e-10);
        assert!(involution_defect(&alg).unwrap() < 1e-10);
        assert!(modular_defect(&alg, 0.8, 3).unwrap() < 1e-10);
    }
}

#[test]
fn vacuum_and_d_s() {
    let m = FModel::canonical("suq:0.5:+").unwrap();
    let c = Category::new(m.clone());
    // Q has eigenvalues 1/2 and 2
    let direct = |s: f64| {
        let z = (0.5f64.powf(-1.0) * qgroup_lab::linalg::C64::from_polar(1.0, -s * 0.5f64.ln())
            + 0.5 * qgroup_lab::linalg::C64::from_polar(1.0, -s * 2f64.ln()))
            / 2.5;
        2.0 * (1.0 - z.norm_sqr())
    };
    for s in [0.0, 0.7, 1.3] {
        assert!((d_s(&m, s) - direct(s)).abs() < 1e-12);
        let t = assemble(&c, 3, s).unwrap();
        let v = L2Vector::vacuum(&c, 2).flatten();
        let norm = t.apply_norm(&v, 2);
        assert!((norm * norm - direct(s)).abs() < 1e-10, "s = {s}");
    }
}

#[test]
fn constants_and_gap_for_identity() {
    let m = FModel::canonical("identity:3").unwrap();
    assert!((c1(&m).unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
    let q = (3.0 - 5f64.sqrt()) / 2.0;
    assert!((c2(&m) - 2.0 * (q / 3.0).sqrt()).abs() < 1e-12);
    let c = Category::new(m);
    let g = gap_check(&c, 4, 0.7, 200, 1).unwrap();
    assert!(g.pass && g.hypothesis_met);
    let sp = interior_spectrum(&c, 4, 1).unwrap();
    assert!(sp.vacuum_defect < 1e-10);
    assert!(sp.second <= sp.bound.unwrap());
}

#[test]
fn block_formulas_match_the_coefficient_algebra() {
    for spec in ["identity:4", "suq:0.3:-"] {
        let r = oracle_check(&cat(spec), 2, 0.4).unwrap();
        assert!(r.pass && r.gram_aligned < 1e-10, "{spec}: {}", r.gram_aligned);
    }
}

#[test]
fn sd_classification() {
    let trivial = sd_group(&FModel::canonical("identity:5").unwrap(), 1e-9);
    assert_eq!(trivial.kind, SdKind::Trivial);
    let lattice = sd_group(&FModel::canonical("suq:0.5:-").unwrap(), 1e-9);
    assert_eq!(lattice.kind, SdKind::Lattice);
    assert!((lattice.generator.unwrap() - 0.25).abs() < 1e-12);
    // eigenvalue pairs 2 and 3 generate a dense subgroup
    let dense = sd_group(&paired_model(&[2.0, 3.0]).unwrap(), 1e-9);
    assert_eq!(dense.kind, SdKind::Dense);
    let commensurable = sd_group(&paired_model(&[2.0, 4.0]).unwrap(), 1e-9);
    assert!((commensurable.generator.unwrap() - 0.5).abs() < 1e-12);
}
