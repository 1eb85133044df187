//! Build the half logarithms log^±_{p,r} and print their leading coefficients.
//!
//!     cargo run --example pollack

use iwa::logs::{pollack_log_with_cert, Kind, LogKind};
use iwa::Precision;

fn main() -> iwa::Result<()> {
    let prec = Precision::new(5, 20, 32)?;
    for (name, kind) in [("log^+", Kind::Plus), ("log^-", Kind::Minus), ("log", Kind::Full)] {
        let spec = LogKind::new(kind, 2, 0)?;
        let (d, cert) = pollack_log_with_cert(spec, prec)?;
        let c = d.body.component(0).a.coeffs();
        println!("{name}_{{5,2}}  order {}  certificate {cert:?}", d.order);
        for (i, x) in c.iter().take(6).enumerate() {
            println!("  X^{i}: {x}");
        }
    }
    Ok(())
}

