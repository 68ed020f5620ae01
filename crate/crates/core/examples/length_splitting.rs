//! Free part ⊕ C̄ for the Brown-Gitler block B_1(117), then S_i ⊕ R_i on C̄_36.
use bp2split::browngitler::{brown_gitler_length_splitting, si_ri_split};
use bp2split::monomial::PrimeContext;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    let pair = brown_gitler_length_splitting(&ctx, 117)?;
    println!(
        "B_1(117): whole {} = free {} + reduced {}, free generators in degrees {:?}",
        pair.whole.total_dim(),
        pair.free_part.total_dim(),
        pair.reduced_part.total_dim(),
        pair.free_generators
    );
    let c36 = brown_gitler_length_splitting(&ctx, 36)?;
    for perm in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
        let s = si_ri_split(&c36, perm)?;
        println!(
            "C_36, S_{} over E(Q{},Q{}): free {} reduced {} defects {:?}",
            perm.0,
            perm.1,
            perm.2,
            s.free_part.total_dim(),
            s.reduced_part.total_dim(),
            s.retraction_defects()
        );
    }
    Ok(())
}
