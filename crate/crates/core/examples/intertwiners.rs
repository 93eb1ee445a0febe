//! Fusion rules, Clebsch-Gordan isometries `V(a⊗b, z)` and the states
//! `ψ_x = Tr(Q_x ·)/Tr(Q_x)`.
//!
//!     cargo run --example intertwiners -- suq:0.5:+ 2 3

use qgroup_lab::fmodel::FModel;
use qgroup_lab::linalg::{adjoint, eye, opnorm, scalar_part, trace, Mat, MatMul};
use qgroup_lab::qlib::fusion;
use qgroup_lab::sampling::{stream, unit_matrix};
use qgroup_lab::tlrep::Category;

fn main() -> qgroup_lab::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = args.first().map(String::as_str).unwrap_or("identity:3");
    let a: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let b: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);

    let cat = Category::new(FModel::canonical(spec)?);
    let q = cat.q();
    println!("{a} ⊗ {b} = {:?}  (dims {} × {})", fusion(a, b), cat.dim(a), cat.dim(b));

    let d = cat.dim(a) * cat.dim(b);
    let mut sum = Mat::zeros((d, d));
    for z in fusion(a, b) {
        let v = cat.intertwiner(a, b, z)?;
        let iso = opnorm(&(adjoint(&v).mmul(&*v) - eye(v.ncols())));
        sum = sum + v.mmul(&adjoint(&v));
        // (id ⊗ ψ_b)(p_z) is the scalar [z+1]/([a+1][b+1])
        let (value, dev) = scalar_part(&cat.slice_psi_right(a, b, &cat.cg_projection(a, b, z)?)?);
        println!(
            "  z = {z}: dim {:>4}, ‖V*V - 1‖ = {iso:.1e}, (id⊗ψ_b)(p_z) = {:.12} (expected {:.12}, off-scalar {dev:.1e})",
            v.ncols(),
            value.re,
            q.dim(z) / (q.dim(a) * q.dim(b))
        );
    }
    println!("‖Σ_z V V* - 1‖ = {:.1e}", opnorm(&(sum - eye(d))));

    println!("\n x   Tr(Q_x)     Tr(Q_x⁻¹)   [x+1]      |ψ via t_x - ψ|");
    let mut rng = stream(7, 0);
    for x in 0..=5 {
        let m = unit_matrix(&mut rng, cat.dim(x));
        let gap = (cat.psi_via_vector(x, &m)? - cat.psi(x, &m)?).norm();
        println!(
            "{x:>2} {:>10.6} {:>11.6} {:>10.6}   {gap:.1e}",
            trace(&*cat.q_x(x)?).re,
            trace(&*cat.q_x_inv(x)?).re,
            q.dim(x)
        );
    }
    Ok(())
}
