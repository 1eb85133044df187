//! The crystalline module of a non-ordinary form and the splitting of its
//! symmetric square.
//!
//!     cargo run --example dieudonne

use iwa::{dieudonne, Form};

fn main() -> iwa::Result<()> {
    for (p, k, eps) in [(5, 0, 1), (7, 2, -1)] {
        let r = dieudonne::report(Form::new(p, k, eps)?, 20)?;
        println!("p = {p}, k = {k}, eps = {eps}");
        println!("  det phi        {}", r.det_phi);
        println!("  phi^2 = alpha^2  {}", r.phi_squared_is_alpha_squared);
        println!("  D1 eigenvalue  {}", r.d1_eigenvalue);
        println!("  D2 charpoly    {}", r.d2_charpoly);
        println!("  eigenvectors   {}", r.eigenvectors_ok);
    }
    Ok(())
}
