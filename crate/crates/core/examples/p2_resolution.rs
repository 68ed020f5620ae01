//! Minimal P(2)-resolutions of Ext(F_p, C̄_k): stage ranks and socle.
use bp2split::ext::{cbar_block, ext_koszul_module, projective_dimension};
use bp2split::monomial::PrimeContext;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    for k in [0, 9, 12, 18, 27] {
        let c = cbar_block(&ctx, k)?;
        let s = 8;
        let top = c.max_degree().unwrap_or(0) + s as i64 * ctx.q_drop(2);
        let r = projective_dimension(&ext_koszul_module(&c, s, top)?)?;
        println!("k {k:>2}: pd {} ranks {:?} socle {:?}", r.projective_dimension, r.stage_ranks, r.socle);
    }
    Ok(())
}
