//! Running verification suites from code, as `qgroup-lab check` does.
//!
//!     cargo run --release --example run_suites -- suq:0.5:+ walk,spectral

use qgroup_lab::fmodel::FModel;
use qgroup_lab::suites::{parse_suites, run_suite, SuiteContext};
use qgroup_lab::tlrep::Category;

fn main() -> qgroup_lab::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = args.first().map(String::as_str).unwrap_or("identity:3");
    let suites = parse_suites(&[args.get(1).map(String::as_str).unwrap_or("algebra,walk")])?;

    let mut ctx = SuiteContext::new(Category::new(FModel::canonical(spec)?), 200, 42);
    ctx.tol.set("martin_ratio", 5e-3)?;
    for suite in suites {
        let report = run_suite(&ctx, suite)?;
        println!("{suite}: {}", if report.pass { "pass" } else { "FAIL" });
        for c in &report.checks {
            println!("  {:<30} {:>10.3e} (limit {:.1e}) {}", c.name, c.measured, c.limit, c.ok());
        }
    }
    Ok(())
}
