//! The group generated by eigenvalue ratios of `Q`, which decides the type of
//! the von Neumann algebra: trivial (II₁), `λ^ℤ` (III_λ) or dense (III₁).
//!
//!     cargo run --example sd_invariant

use qgroup_lab::fmodel::FModel;
use qgroup_lab::spectral::{paired_model, sd_group};

fn main() -> qgroup_lab::error::Result<()> {
    let models = vec![
        FModel::canonical("identity:4")?,
        FModel::canonical("suq:0.5:+")?,
        FModel::canonical("suq:0.3:-")?,
        // Q with eigenvalues 2, 1/2, 3, 1/3: log 2 / log 3 is irrational
        paired_model(&[2.0, 3.0])?,
        paired_model(&[2.0, 4.0])?,
    ];
    for m in &models {
        let sd = sd_group(m, 1e-9);
        let eig: Vec<String> = sd.eigenvalues.iter().map(|v| format!("{v:.4}")).collect();
        println!("{:<24} Q eigenvalues [{}]", sd.model, eig.join(", "));
        println!("{:<24} {:?}, generator {:?}: {}", "", sd.kind, sd.generator, sd.evidence);
    }
    Ok(())
}
