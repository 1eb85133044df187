//! A synthetic Euler system over two tame primes: check its norm relations,
//! then break one class and watch the check fail.
//!
//!     cargo run --example eulersys

use iwa::eulersys::{build_synthetic_system, rankin_factorization_check, validate_system, EulerPrime, GroupRingElement, TameLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn main() -> iwa::Result<()> {
    let check = rankin_factorization_check(11, 0, 1, 1, 0, 0)?;
    println!("Rankin factorisation at 11: {}  P = {}", check.holds, check.p);

    let level = TameLevel::new(5, &[11, 31])?;
    let primes = vec![
        EulerPrime { ell: 11, a: -3, eps: 1, tw: 1, frobenius: BTreeMap::from([(31, 3)]), gamma: 2 },
        EulerPrime { ell: 31, a: -3, eps: 1, tw: -1, frobenius: BTreeMap::from([(11, 2)]), gamma: 3 },
    ];
    let seed = GroupRingElement::random(&level, 12, &mut ChaCha8Rng::seed_from_u64(1));
    let mut sys = build_synthetic_system(&seed, &primes, 1, 2)?;
    let report = validate_system(&sys)?;
    println!("{} relations, all hold: {}", report.relations.len(), report.all_hold);

    sys.perturb(&[11], 0, 3)?;
    for f in validate_system(&sys)?.failures() {
        println!("broken: r = {:?}, ell = {}, deviation valuation {:?}", f.r, f.ell, f.deviation_val);
    }
    Ok(())
}
