//! Kubota-Leopoldt series for a few characters, with their interpolation checks.
//!
//!     cargo run --example kl

use iwa::dirichlet::DirichletCharacter;
use iwa::lfunctions::{kl_series, kl_value};
use iwa::Precision;

fn main() -> iwa::Result<()> {
    let prec = Precision::new(5, 16, 24)?;
    let etas = [
        ("omega^2", DirichletCharacter::teichmuller(5, 2)?, 2),
        ("omega^3", DirichletCharacter::teichmuller(5, 3)?, 1),
        ("chi_8", DirichletCharacter::kronecker(5, 8)?, 0),
    ];
    for (name, eta, branch) in etas {
        let s = kl_series(&eta, branch, prec)?;
        let ok = s.checks.iter().filter(|c| c.agrees).count();
        println!("{name:8} branch {branch}  c = {}  regularised {}  checks {ok}/{}", s.c, s.regularised, s.checks.len());
    }
    let omega2 = DirichletCharacter::teichmuller(5, 2)?;
    println!("L_5(omega^2, -1) = {}", kl_value(&omega2, -1, 12)?);
    Ok(())
}
