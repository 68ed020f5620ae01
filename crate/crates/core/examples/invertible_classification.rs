//! (a, b) for the W blocks and the Σ^a I^{⊗b} models that reproduce them.
use bp2split::browngitler::WFamily;
use bp2split::margolis::{analyse_w_block, Classification};
use bp2split::monomial::PrimeContext;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    for fam in [WFamily::W1, WFamily::We, WFamily::Wo] {
        for n in 0..=5 {
            let r = analyse_w_block(&ctx, fam, n)?;
            let ab = match &r.classification {
                Classification::Invertible(c) => format!("(a, b) = ({}, {})", c.a, c.b),
                Classification::NotInvertible { reason } => reason.clone(),
            };
            println!("{fam:?}({n}) dim {:>3} classes {:?} {ab} {}", r.dim, r.closed_form_degrees, if r.passed() { "ok" } else { "FAIL" });
        }
    }
    Ok(())
}
