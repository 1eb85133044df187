//! Estimate growth orders of the half logarithms from their ρ-norms.
//!
//!     cargo run --release --example growth

use iwa::distribution::growth_order;
use iwa::logs::{pollack_log, Kind, LogKind};
use iwa::Precision;

fn main() -> iwa::Result<()> {
    let prec = Precision::new(5, 10, 626)?;
    for r in 1..=2 {
        for (name, kind) in [("log^+", Kind::Plus), ("log^-", Kind::Minus), ("log", Kind::Full)] {
            let d = pollack_log(LogKind::new(kind, r, 0)?, prec)?;
            println!("{name}_{{5,{r}}}: order {:.3}", growth_order(&d.body, 4)?);
        }
    }
    Ok(())
}

