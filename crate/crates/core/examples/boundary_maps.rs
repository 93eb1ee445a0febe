//! The completely positive maps `ψ_{x+y,x}` of the Poisson boundary: their
//! compatibility with the states and the injectivity ratio
//! `‖ψ_{x+y,x}(A)‖_ψ / ‖A‖_ψ`.
//!
//!     cargo run --example boundary_maps -- suq:0.5:+

use qgroup_lab::boundary::{harmonic_defect, injectivity_bound, psi_map};
use qgroup_lab::fmodel::FModel;
use qgroup_lab::linalg::{eye, opnorm};
use qgroup_lab::sampling::{stream, unit_matrix};
use qgroup_lab::tlrep::Category;

fn main() -> qgroup_lab::error::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "identity:3".into());
    let cat = Category::new(FModel::canonical(&spec)?);

    // unital: ψ_{x+y,x}(1) = 1
    let unit = psi_map(&cat, 2, 3, &eye(cat.dim(2)))?;
    println!("‖ψ_(5,2)(1) - 1‖ = {:.1e}", opnorm(&(unit - eye(cat.dim(5)))));

    let mut rng = stream(1, 0);
    let mut worst = 0.0f64;
    for x in 0..=3 {
        for y in 0..=3 {
            let a = unit_matrix(&mut rng, cat.dim(x));
            worst = worst.max(harmonic_defect(&cat, x, y, &a)?);
        }
    }
    println!("max |ψ_(x+y)(ψ_(x+y,x)(A)) - ψ_x(A)| over x, y ≤ 3: {worst:.1e}");

    println!("\ninjectivity ratio range [min, max] (method)");
    for x in 0..=4 {
        let row: Vec<String> = (0..=4)
            .map(|y| {
                injectivity_bound(&cat, x, y)
                    .map(|b| format!("[{:.3},{:.3}]", b.min, b.max))
                    .unwrap_or_else(|e| format!("error: {e}"))
            })
            .collect();
        println!("x = {x}: {}", row.join(" "));
    }
    Ok(())
}
