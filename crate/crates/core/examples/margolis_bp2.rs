//! Margolis homology of H_*BP⟨2⟩ through degree 120 against the closed forms.
use bp2split::margolis::margolis_bp2;
use bp2split::monomial::PrimeContext;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    for i in 0..3 {
        let r = margolis_bp2(&ctx, i, 120)?;
        let nonzero: Vec<i64> = r.rows.iter().filter(|x| x.computed > 0).map(|x| x.t).collect();
        println!("Q{i}: certified t <= {}, classes in degrees {nonzero:?}, {}", r.certified_through, if r.passed() { "match" } else { "MISMATCH" });
    }
    Ok(())
}
