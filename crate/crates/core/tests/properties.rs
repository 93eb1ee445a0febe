//! Randomised invariants.

use proptest::prelude::*;

use qgroup_lab::boundary::psi_map;
use qgroup_lab::fmodel::FModel;
use qgroup_lab::linalg::{adjoint, herm_eig, herm_eigvals, opnorm, Mat, MatMul, C64};
use qgroup_lab::sampling::{gaussian_matrix, stream, unit_matrix, unit_vector};
use qgroup_lab::spectral::{assemble, d_s};
use qgroup_lab::tlrep::Category;
use qgroup_lab::verify::{check_lemma, d_t, CheckOptions, LemmaId};
use qgroup_lab::walk::{GreenFunction, WalkMeasure, WalkOperator};

fn suq(q: f64, plus: bool) -> FModel {
    FModel::suq(q, plus).unwrap()
}

fn random_unitary(seed: u64, n: usize) -> Mat {
    let g = gaussian_matrix(&mut stream(seed, 0), n, n);
    herm_eig(&(&g + &adjoint(&g))).1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn psi_map_preserves_positivity(q in 0.1f64..0.9, plus: bool, x in 0usize..3, y in 0usize..3, seed: u64) {
        let cat = Category::new(suq(q, plus));
        let b = unit_matrix(&mut stream(seed, 1), cat.dim(x));
        let a = adjoint(&b).mmul(&b);
        let image = psi_map(&cat, x, y, &a).unwrap();
        prop_assert!(herm_eigvals(&image)[0] >= -1e-10 * opnorm(&a));
    }

    #[test]
    fn harmonic_states_are_constant_in_n(x in 0usize..3, seed: u64) {
        let cat = Category::new(FModel::canonical("identity:3").unwrap());
        let a = unit_matrix(&mut stream(seed, 2), cat.dim(x));
        let base = cat.psi(x, &a).unwrap();
        for y in 0..=7 - x {
            let v = cat.psi(x + y, &psi_map(&cat, x, y, &a).unwrap()).unwrap();
            prop_assert!((v - base).norm() < 1e-10);
        }
    }

    #[test]
    fn q_eigenvalues_come_in_pairs(q in 0.1f64..0.9, plus: bool, seed: u64) {
        // F' = U F Uᵗ keeps F'F̄' = c for unitary U
        let base = suq(q, plus);
        let u = random_unitary(seed, 2);
        let f = u.mmul(base.f()).mmul(&u.t().to_owned());
        let m = FModel::build(f).unwrap();
        let mut w = m.q_eigenvalues();
        w.sort_by(f64::total_cmp);
        prop_assert!((w[0] * w[1] - 1.0).abs() < 1e-8);
        prop_assert!((m.q().value() - q).abs() < 1e-8);
    }

    #[test]
    fn intertwiners_commute_with_q(q in 0.1f64..0.9, a in 0usize..4, b in 0usize..4) {
        let cat = Category::new(suq(q, true));
        for z in qgroup_lab::qlib::fusion(a, b) {
            prop_assert!(cat.intertwiner_q_defect(a, b, z).unwrap() < 1e-8);
        }
    }

    #[test]
    fn associativity_up_to_phase(x in 0usize..4, y in 0usize..4, z in 0usize..4) {
        let cat = Category::new(suq(0.4, false));
        let (lhs, rhs) = cat.associativity_pair(x, y, z).unwrap();
        prop_assert!(d_t(&lhs, &rhs).value < 1e-8);
    }

    #[test]
    fn phase_distance_ignores_phases(theta in -3.0f64..3.0, seed: u64) {
        let v = gaussian_matrix(&mut stream(seed, 3), 4, 3);
        let w = v.mapv(|z| z * C64::from_polar(1.0, theta));
        prop_assert!(d_t(&v, &w).value < 1e-7 * opnorm(&v));
    }

    #[test]
    fn walk_rows_sum_to_one(q in 0.1f64..0.9, w1 in 0.05f64..1.0, w2 in 0.0f64..1.0, w3 in 0.0f64..1.0) {
        let model = suq(q, true);
        let total = w1 + w2 + w3;
        let mu = WalkMeasure::new([(1, w1 / total), (2, w2 / total), (3, w3 / total)]).unwrap();
        let op = WalkOperator::new(model.q(), &mu, 60);
        for x in 0..op.incomplete_from {
            prop_assert!((op.row_sum(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn green_columns_solve_the_green_identity(q in 0.1f64..0.9, y in 0usize..10) {
        let model = suq(q, false);
        let mu = WalkMeasure::new([(1, 0.6), (2, 0.4)]).unwrap();
        let gf = GreenFunction::new(model.q(), &mu, 120).unwrap();
        let col = gf.column(y).unwrap();
        prop_assert!(col.iter().all(|&g| g >= 0.0));
        let op = WalkOperator::new(model.q(), &mu, 120);
        for x in 0..40 {
            let pg: f64 = (0..col.len()).map(|j| op.matrix[[x, j]] * col[j]).sum();
            let delta = if x == y { 1.0 } else { 0.0 };
            prop_assert!((pg - (col[x] - delta)).abs() < 1e-10 * col[x].max(1.0));
        }
    }

    #[test]
    fn t_s_is_bounded_by_two(s in -2.0f64..2.0, seed: u64) {
        let cat = Category::new(suq(0.5, true));
        let t = assemble(&cat, 4, s).unwrap();
        let v = unit_vector(&mut stream(seed, 4), t.domain_dim(3));
        prop_assert!(t.apply_norm(&v, 3) <= 2.0 + 1e-12);
    }

    #[test]
    fn d_s_properties(q in 0.1f64..0.9, s in -3.0f64..3.0) {
        let m = suq(q, true);
        prop_assert!(d_s(&m, 0.0).abs() < 1e-14);
        let v = d_s(&m, s);
        prop_assert!((-1e-14..=2.0).contains(&v));
        prop_assert!((d_s(&m, s + 1e-7) - v).abs() < 1e-5);
        prop_assert!(d_s(&FModel::canonical("identity:3").unwrap(), s).abs() < 1e-14);
    }
}

#[test]
fn estimate_reports_are_reproducible() {
    let cat = Category::new(suq(0.5, true));
    let grid: Vec<Vec<usize>> = (1..=3).map(|y| vec![1, y, 1, 1]).collect();
    let opts = CheckOptions::for_lemma(LemmaId::Hiphip, 9);
    let a = serde_json::to_string(&check_lemma(&cat, LemmaId::Hiphip, &grid, &opts).unwrap()).unwrap();
    let b = serde_json::to_string(&check_lemma(&cat, LemmaId::Hiphip, &grid, &opts).unwrap()).unwrap();
    assert_eq!(a, b);
}
