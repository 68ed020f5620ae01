//! θ_k for k ≤ 12 at p = 3, then the assembled map onto H_*BP⟨2⟩ through degree 60.
use bp2split::browngitler::{assemble_bp_splitting, theta};
use bp2split::monomial::PrimeContext;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    for k in 0..=12 {
        let (_, r) = theta(&ctx, 1, k)?;
        println!("theta_{k:<2} dim {:>2} bijective {} commutes {}", r.dim, r.bijective, r.commutes);
    }
    let (r, _) = assemble_bp_splitting(&ctx, 2, 60)?;
    println!("assembled through 60: {}", if r.passed() { "iso" } else { "FAILED" });
    Ok(())
}
