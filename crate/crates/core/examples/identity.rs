//! The three logarithm identities, checked at finite precision.
//!
//!     cargo run --release --example identity

use iwa::logs::{bridging_check, log_identity_check, shifted_log_check, Kind};
use iwa::Precision;

fn main() -> iwa::Result<()> {
    let prec = Precision::new(5, 20, 64)?;
    let prod = log_identity_check(5, 2, prec)?;
    println!("log+ * log- = log        deviation {:?}", prod.deviation);
    for kind in [Kind::Plus, Kind::Minus] {
        let s = shifted_log_check(kind, 2, prec)?;
        println!("{:24} deviation {:?}", s.identity, s.deviation);
    }
    let b = bridging_check(1, prec)?;
    println!("{:24} deviation {:?}", b.identity, b.deviation);
    Ok(())
}
