//! TSV chart of Ext_{E(2)}(F_p, C̄) through t = 60 (columns s, t, dim, tag).
use bp2split::ext::{cbar_blocks, sum_of_exts};
use bp2split::monomial::PrimeContext;
use bp2split::qmodule::QSet;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    let blocks: Vec<_> = cbar_blocks(&ctx, 60)?.into_iter().map(|x| x.1).collect();
    let dims = sum_of_exts(&blocks, QSet::E2, 4, 60)?;
    print!("{}", dims.to_tsv("Cbar"));
    Ok(())
}
