//! The spectral gap of the Markov operator `P` on the truncated `L²`:
//! constants `C₁, C₂`, the interior spectrum, the main inequality on test
//! vectors and the simplicity quantity `‖Q‖²‖P|ξ₀^⊥‖`.
//!
//!     cargo run --release --example spectral_gap -- identity:3 5

use qgroup_lab::fmodel::FModel;
use qgroup_lab::spectral::{c1, c2, d_s, gap_check, goedgeteld_check, lemma_estimates};
use qgroup_lab::tlrep::Category;

fn main() -> qgroup_lab::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = args.first().map(String::as_str).unwrap_or("identity:3");
    let top: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let model = FModel::canonical(spec)?;
    let hyp = model.hypotheses();
    let cat = Category::new(model.clone());

    println!("F = {spec}: ‖F‖² = {:.4}, Tr(F*F) = {:.4}", hyp.f_norm_sq, hyp.trace);
    println!("  gap hypothesis ‖F‖² ≤ Tr/√5: {}, simplicity hypothesis: {}", hyp.sqrt5, hyp.simplicity);
    println!("C₁ = {:?}, C₂ = {:.7}", c1(&model), c2(&model));

    for s in [0.0, 0.7, 1.3] {
        let g = gap_check(&cat, top, s, 200, 11)?;
        println!(
            "s = {s}: ‖T_s ξ₀‖² = {:.6} (D_s = {:.6}), min margin {:.3e} over {} eigen- and {} random vectors",
            g.t_vacuum_sq,
            d_s(&model, s),
            g.min_margin,
            g.eigenvectors,
            g.random_vectors
        );
    }

    let g = goedgeteld_check(&cat, top, 11)?;
    let sp = &g.spectrum;
    println!(
        "N = {top}, interior dim {} ({}): second eigenvalue {:.5}, smallest {:.5}, bound {:?}",
        sp.interior_dim, sp.method, sp.second, sp.smallest, sp.bound
    );
    println!("‖Q‖²‖P|ξ₀^⊥‖ = {:.4} (< 1 needed)", g.value);

    for x in 1..=3 {
        let e = lemma_estimates(&cat, x, 0.5)?;
        println!(
            "level {x}: first estimate {:.4} ≤ {:.4}, second {:.4} ≤ {:.4}",
            e.first_left, e.first_bound, e.second, e.second_bound
        );
    }
    Ok(())
}
