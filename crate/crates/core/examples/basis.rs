//! Monomial basis of A//E(1)_* at p = 3 with its three gradings.
use bp2split::monomial::PrimeContext;
use bp2split::report::basis_rows;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    for r in basis_rows(&ctx, 1, 40)? {
        println!("{:<16} degree {:>3} weight {:>3} length {}", r.monomial, r.degree, r.weight, r.length);
    }
    Ok(())
}
