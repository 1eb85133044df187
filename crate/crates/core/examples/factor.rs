//! Round trip through the signed factorisation: pick integral signed
//! L-functions, synthesise the four unbounded ones, then factor them back.
//!
//!     cargo run --example factor

use iwa::signed::{factor_signed, synthesize, Convention, SignedLogs, SignedQuadruple};
use iwa::{Form, Precision};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> iwa::Result<()> {
    let prec = Precision::new(5, 30, 32)?;
    let form = Form::new(5, 0, 1)?;
    let logs = SignedLogs::strong(0, prec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for conv in [Convention::TheoremA, Convention::LemmaFactorisation] {
        let signed = SignedQuadruple::random_integral(prec, Some(form), &mut rng);
        let unbounded = synthesize(&signed, &logs, form, conv)?;
        let back = factor_signed(&unbounded, &logs, form, conv)?;
        println!("{conv:?}: recovered = {}, attained {:?}", back.quad.agrees(&signed), back.attained);
    }
    Ok(())
}
