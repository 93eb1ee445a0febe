//! Jones-Wenzl projectors of `A_o(F)` on `(ℂⁿ)^{⊗k}`, built twice (Wenzl's
//! recursion on the compressed space and the three-term recursion), with
//! their defects.
//!
//!     cargo run --example jones_wenzl -- identity:3 6

use qgroup_lab::fmodel::FModel;
use qgroup_lab::qlib::irrep_dim;
use qgroup_lab::tlrep::Category;

fn main() -> qgroup_lab::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = args.first().map(String::as_str).unwrap_or("identity:3");
    let kmax: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5);

    let cat = Category::new(FModel::canonical(spec)?);
    let n = cat.n();
    println!("F = {spec}, q = {:.7}", cat.q().value());
    println!(" k  rank  irrep_dim   ‖E*E-1‖   cup-kill  [Q^⊗k,p]  ‖p-p'‖");
    for k in 1..=kmax {
        let p = cat.jones_wenzl(k)?;
        let d = p.defects(cat.model());
        let dist = p.distance(&cat.jones_wenzl_alt(k)?);
        println!(
            "{k:>2} {:>5} {:>10} {:>9.1e} {:>10.1e} {:>9.1e} {:>7.1e}",
            d.rank,
            irrep_dim(n, k),
            d.idempotency,
            d.cup_killing,
            d.commutator,
            dist
        );
    }
    Ok(())
}
