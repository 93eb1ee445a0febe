//! The random walk on the dual of `A_o(F)`: transition probabilities, the
//! Green function, the Martin kernel ratio `g(x+1,0)/g(x,0) → q²` and the
//! convergence of Martin blocks to their boundary limit.
//!
//!     cargo run --example random_walk -- identity:3

use qgroup_lab::fmodel::FModel;
use qgroup_lab::sampling::{stream, unit_matrix};
use qgroup_lab::tlrep::Category;
use qgroup_lab::walk::{
    eta_sequence, green_table, martin_defect, transition, GreenFunction, WalkMeasure,
};

fn main() -> qgroup_lab::error::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "identity:3".into());
    let cat = Category::new(FModel::canonical(&spec)?);
    let q = cat.q();
    let delta = WalkMeasure::delta(1);

    println!("p(3 → 4) = {:.6}, p(3 → 2) = {:.6}", transition(q, &delta, 3, 4), transition(q, &delta, 3, 2));
    println!("\n x      g(x,0)        g(0,x)    g(x+1,0)/g(x,0)");
    for row in green_table(q, &delta, 12, 200)? {
        println!("{:>2} {:>11.4e} {:>12.6} {:>12.8}", row.x, row.g_x0, row.g_0x, row.martin_ratio);
    }
    println!("q² = {:.8}", q.value().powi(2));

    // With μ = δ₁ the Martin block already equals its limit; a measure on
    // two levels shows the convergence in y.
    let mu = WalkMeasure::new([(1, 0.5), (2, 0.5)])?;
    let green = GreenFunction::new(q, &mu, 200)?;
    println!("\nMartin block defect, μ = (δ₁ + δ₂)/2");
    for x in 1..=2 {
        let a = unit_matrix(&mut stream(3, x as u64), cat.dim(x));
        let seq: Vec<String> = (x..=x + 3)
            .map(|y| martin_defect(&cat, &green, &a, x, y).map(|d| format!("{d:.4}")))
            .collect::<Result<_, _>>()?;
        println!("  x = {x}, y = {x}..{}: {}", x + 3, seq.join("  "));
    }

    println!("\nq^-x/[x+1] at x = 25: {:.10} (1 - q² = {:.10})", eta_sequence(q, 25), 1.0 - q.value().powi(2));
    Ok(())
}
