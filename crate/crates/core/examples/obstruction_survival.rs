//! E_2 comparison for C̄_9 against C̄_m, then the obstruction report for θ_9.
use bp2split::ext::{obstruction_report, propiso_check};
use bp2split::monomial::PrimeContext;

fn main() -> anyhow::Result<()> {
    let ctx = PrimeContext::new(3)?;
    for m in [0, 3, 9] {
        let r = propiso_check(&ctx, 9, m, 4)?;
        for row in &r.rows {
            println!("k 9 m {m}: (s,t) = ({}, {}) odd exterior {} u=1 line {}", row.s, row.t, row.exterior_odd, row.u1_line);
        }
    }
    let o = obstruction_report(&ctx, 9, 9, 4)?;
    println!("{} ({} classes)", o.verdict, o.classes.len());
    Ok(())
}
