//! Decay estimates of the appendix as JSON/CSV reports: each lemma is swept
//! over its grid and the decay rate and constant are fitted.
//!
//!     cargo run --release --example appendix_report -- best2 out.csv

use qgroup_lab::fmodel::FModel;
use qgroup_lab::tlrep::{Category, LevelCaps};
use qgroup_lab::verify::{check_lemma_with_skipped, default_grid, fit_grid_to_caps, write_csv, CheckOptions, LemmaId};

fn main() -> qgroup_lab::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id: LemmaId = args.first().map(String::as_str).unwrap_or("approxcommute").parse()?;
    let model = FModel::canonical("suq:0.5:+")?;
    let cat = Category::with_caps(model, LevelCaps::default_for(2).with_max_level(18));

    let (grid, skipped) = fit_grid_to_caps(id, &cat, default_grid(id, 2));
    let report = check_lemma_with_skipped(&cat, id, &grid, skipped, &CheckOptions::for_lemma(id, 1))?;
    for row in report.rows.iter().take(8) {
        println!("{:?}: defect {:.3e}, bound {:.3e}, ratio {:.3}", row.params, row.defect, row.bound, row.ratio);
    }
    println!("... {} rows", report.rows.len());
    let f = &report.fitted;
    println!(
        "{id}: rate {:?} (bound exponent {:?}), constant {:.4}, headroom ok {}, pass {}",
        f.rate, f.expected_rate, f.constant, f.headroom_ok, report.pass
    );
    match args.get(1) {
        Some(path) => write_csv(std::slice::from_ref(&report), std::fs::File::create(path)?)?,
        None => println!("{}", serde_json::to_string(&report.fitted)?),
    }
    Ok(())
}
