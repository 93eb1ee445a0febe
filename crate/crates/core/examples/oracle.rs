//! Two constructions of `T_s`: products in the coefficient algebra of the
//! truncated `L²(G)`, and the closed block formulas in terms of
//! intertwiners. They agree up to a unitary on the target, so `T*T` is
//! compared.
//!
//!     cargo run --example oracle -- suq:0.5:+

use qgroup_lab::fmodel::FModel;
use qgroup_lab::spectral::{
    commutation_defect, involution_defect, modular_defect, oracle_check, CoefAlgebra,
};
use qgroup_lab::tlrep::Category;

fn main() -> qgroup_lab::error::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "identity:3".into());
    let cat = Category::new(FModel::canonical(&spec)?);

    let alg = CoefAlgebra::new(&cat, 2)?;
    println!("coefficient algebra up to level 2, dim {}", alg.dim_upto(2));
    println!("  [ρ, ρ^op] defect   {:.1e}", commutation_defect(&alg)?);
    println!("  involution defect  {:.1e}", involution_defect(&alg)?);
    println!("  modular defect     {:.1e}", modular_defect(&alg, 0.4, 5)?);

    for top in 1..=3 {
        for s in [0.0, 0.7] {
            let r = oracle_check(&cat, top, s)?;
            println!(
                "N = {top}, s = {s}: ‖ΔT*T‖ raw {:.1e}, after phase alignment {:.1e}, singular values {:.1e}",
                r.gram_raw, r.gram_aligned, r.singular_gap
            );
        }
    }
    Ok(())
}
