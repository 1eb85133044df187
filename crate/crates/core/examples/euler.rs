//! Euler-like factors at p and the exceptional zeros they produce.
//!
//!     cargo run --example euler

use iwa::lfunctions::{euler_factor_e, exceptional_zero_report};
use iwa::Form;

fn main() -> iwa::Result<()> {
    let form = Form::new(5, 1, 1)?;
    let e = euler_factor_e(&form, 1, 1, 20)?;
    println!("E(f, chi, 1) = {}", e.product);
    for t in &e.factors {
        println!("  {:>4}: {} {}", t.label, t.value, if t.vanishes { "(vanishes)" } else { "" });
    }
    let report = exceptional_zero_report(&form, 1, 1, 4)?;
    for z in &report.entries {
        println!("j = {}  {:?}  vanishing {:?}  exceptional {}", z.j, z.branch, z.vanishing, z.exceptional_case);
    }
    Ok(())
}
