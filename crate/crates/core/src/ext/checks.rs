//! Structural checks on Ext: even concentration, Bockstein E_1 collapse,
//! v_i-injectivity, the comparison of odd exterior Ext with the u = 1 line
//! over P, and the obstruction report for θ_k.

use crate::browngitler::brown_gitler_length_splitting;
use crate::error::Result;
use crate::fp::FpMatrix;
use crate::monomial::PrimeContext;
use crate::qmodule::{QModule, QSet};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use super::koszul::ext_koszul;
use super::poly::ext_over_p2;
use super::resolution::ext_general;
use super::{ext_koszul_module, BigradedDims};

/// C̄_k over E(2) (the reduced part of B_1(k)).
pub fn cbar_block(ctx: &PrimeContext, k: u64) -> Result<QModule> {
    let pair = brown_gitler_length_splitting(ctx, k)?;
    Ok((*pair.reduced_part).clone())
}

/// Σ^{qk}C̄_k for every k with qk ≤ t_max: the pieces of C̄ through t_max.
pub fn cbar_blocks(ctx: &PrimeContext, t_max: i64) -> Result<Vec<(u64, QModule)>> {
    let k_max = (t_max.max(0) / ctx.q()) as u64;
    (0..=k_max)
        .into_par_iter()
        .map(|k| Ok((k, cbar_block(ctx, k)?.suspend(ctx.q() * k as i64)?)))
        .collect()
}

/// Highest t for which Ext(F_p, M) is determined by M_{≤ top}: classes of
/// weight-bounded blocks live at t ≥ their bottom degree.
fn highest_t(m: &QModule, s_max: usize) -> i64 {
    let dmax = m.qs().indices().iter().map(|&i| m.qdrop(i)).max().unwrap_or(0);
    m.max_degree().unwrap_or(0) + s_max as i64 * dmax
}

#[derive(Clone, Debug, Serialize)]
pub struct EvenReport {
    pub algebra: String,
    pub s_min: i64,
    pub region: ((i64, i64), (i64, i64)),
    pub classes: usize,
    pub violations: Vec<(i64, i64, usize)>,
}

impl EvenReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Odd (t − s) classes with s ≥ s_min in Ext(F_p, ⊕ blocks) over `qs`, for t ≤ t_max.
pub fn even_concentration_check(
    blocks: &[QModule],
    qs: QSet,
    s_min: i64,
    s_max: usize,
    t_max: i64,
) -> Result<EvenReport> {
    let dims = sum_of_exts(blocks, qs, s_max, t_max)?;
    Ok(EvenReport {
        algebra: qs.to_string(),
        s_min,
        region: (dims.s_range, dims.t_range),
        classes: dims.total(),
        violations: dims.odd_classes(s_min),
    })
}

/// Ext(F_p, ⊕ blocks) over `qs` through s_max, t_max.
pub fn sum_of_exts(blocks: &[QModule], qs: QSet, s_max: usize, t_max: i64) -> Result<BigradedDims> {
    let parts: Vec<BigradedDims> = blocks
        .par_iter()
        .map(|b| Ok(ext_koszul(&b.restrict(qs)?, s_max, t_max)?.dims()))
        .collect::<Result<_>>()?;
    let mut dims = BTreeMap::new();
    let mut t_lo = 0;
    for d in parts {
        t_lo = t_lo.min(d.t_range.0);
        for (k, v) in d.dims {
            *dims.entry(k).or_insert(0) += v;
        }
    }
    Ok(BigradedDims { dims, s_range: (0, s_max as i64), t_range: (t_lo, t_max) })
}

#[derive(Clone, Debug, Serialize)]
pub struct BocksteinRow {
    pub s: i64,
    pub t: i64,
    pub e1: usize,
    pub abutment: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BocksteinE1 {
    pub i: usize,
    pub pair: (usize, usize),
    pub rows: Vec<BocksteinRow>,
    /// E_1 = Ext_pair[v_i] has no odd-(t−s) classes, so no differential can be nonzero.
    pub parity_collapse: bool,
    /// Total E_1 dimension equals dim Ext_{E(2)} at every (s, t).
    pub dimension_collapse: bool,
}

/// E_1 = Ext_{E(Q_j,Q_h)}(F_p, M)[v_i] against the abutment Ext_{E(2)}(F_p, M).
pub fn bockstein_e1(blocks: &[QModule], i: usize, s_max: usize, t_max: i64) -> Result<BocksteinE1> {
    let pair: Vec<usize> = (0..3).filter(|&x| x != i).collect();
    let (j, h) = (pair[0], pair[1]);
    let ctx = blocks.first().map(|b| *b.ctx());
    let di = ctx.map_or(1, |c| c.q_drop(i));
    let pair_ext = sum_of_exts(blocks, QSet::pair(j, h), s_max, t_max)?;
    let full = sum_of_exts(blocks, QSet::E2, s_max, t_max)?;
    let mut rows = Vec::new();
    let mut dimension_collapse = true;
    for s in 0..=s_max as i64 {
        for t in pair_ext.t_range.0..=t_max {
            let e1: usize = (0..=s).map(|r| pair_ext.get(s - r, t - r * di)).sum();
            let ab = full.get(s, t);
            if e1 != ab {
                dimension_collapse = false;
            }
            if e1 > 0 || ab > 0 {
                rows.push(BocksteinRow { s, t, e1, abutment: ab });
            }
        }
    }
    Ok(BocksteinE1 {
        i,
        pair: (j, h),
        rows,
        parity_collapse: pair_ext.odd_classes(0).is_empty(),
        dimension_collapse,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InjectivityReport {
    pub i: usize,
    pub checked: usize,
    /// (s, t, dim ker v_i)
    pub kernels: Vec<(usize, i64, usize)>,
}

impl InjectivityReport {
    pub fn passed(&self) -> bool {
        self.kernels.is_empty()
    }
}

/// v_i · − on Ext_{E(2)}(F_p, M), at every (s, t) whose v_i-target is in range.
pub fn v_injectivity(m: &QModule, i: usize, s_max: usize) -> Result<InjectivityReport> {
    let t_max = highest_t(m, s_max + 1);
    let ext = ext_koszul(m, s_max + 1, t_max)?;
    let mut checked = 0;
    let mut kernels = Vec::new();
    for c in ext.classes() {
        if c.s > s_max {
            continue;
        }
        if let Some(a) = ext.v_matrix(i, c.s, c.t) {
            checked += 1;
            let k = a.cols() - a.rank();
            if k > 0 {
                kernels.push((c.s, c.t, k));
            }
        }
    }
    Ok(InjectivityReport { i, checked, kernels })
}

#[derive(Clone, Debug, Serialize)]
pub struct PropisoRow {
    pub s: i64,
    pub t: i64,
    pub exterior_odd: usize,
    pub u1_line: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropisoReport {
    pub k: u64,
    pub m: u64,
    pub s_max: usize,
    /// Filtration bound used for the P-modules.
    pub p_region_s: i64,
    pub rows: Vec<PropisoRow>,
    pub mismatches: Vec<String>,
    pub uncertified: Vec<(i64, i64)>,
    pub stable: bool,
}

impl PropisoReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.uncertified.is_empty() && self.stable
    }
}

/// Odd part of Ext_{E(2)}(C̄_k, Σ^{qm}C̄_m) against the u = 1 line of
/// Ext_P(Ext(F_p, C̄_k), Ext(F_p, Σ^{qm}C̄_m)), compared at s = r + 1.
pub fn propiso_check(ctx: &PrimeContext, k: u64, m: u64, s_max: usize) -> Result<PropisoReport> {
    let ck = cbar_block(ctx, k)?;
    let cm = cbar_block(ctx, m)?.suspend(ctx.q() * m as i64)?;
    propiso_modules(&ck, &cm, k, m, s_max)
}

pub fn propiso_modules(ck: &QModule, cm: &QModule, k: u64, m: u64, s_max: usize) -> Result<PropisoReport> {
    let ext = ext_general(ck, cm, s_max, i64::MAX / 4)?;
    let mut region = s_max as i64 + 6;
    loop {
        let a = ext_koszul_module(ck, region as usize, highest_t(ck, region as usize))?;
        let b = ext_koszul_module(cm, region as usize, highest_t(cm, region as usize))?;
        let pext = ext_over_p2(&a, &b, 2)?;
        let mut rows = Vec::new();
        let mut mismatches = Vec::new();
        let mut uncertified = Vec::new();
        let mut ts: Vec<(i64, i64)> = ext.odd_classes(0).iter().map(|c| (c.0, c.1)).collect();
        for (&(u, r, t), &(d, ok)) in &pext.entries {
            if u == 1 && r < s_max as i64 && (d > 0 || !ok) {
                ts.push((r + 1, t));
            }
        }
        ts.sort();
        ts.dedup();
        for (s, t) in ts {
            if s < 0 {
                continue;
            }
            let e = if (t - s).rem_euclid(2) == 1 { ext.get(s, t) } else { 0 };
            match pext.get(1, s - 1, t) {
                Some(u1) => {
                    if u1 != e {
                        mismatches.push(format!("(s,t) = ({s},{t}): exterior odd {e}, u=1 line {u1}"));
                    }
                    rows.push(PropisoRow { s, t, exterior_odd: e, u1_line: u1 });
                }
                None => uncertified.push((s, t)),
            }
        }
        if (!uncertified.is_empty() || !pext.stable) && region < s_max as i64 + 14 {
            region += 4;
            continue;
        }
        return Ok(PropisoReport {
            k,
            m,
            s_max,
            p_region_s: region,
            rows,
            mismatches,
            uncertified,
            stable: pext.stable,
        });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionClass {
    pub m: u64,
    pub s: i64,
    pub t: i64,
    pub dim: usize,
    pub in_cbar_summand: bool,
    pub matched_by_u1_line: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub k: u64,
    pub m_max: u64,
    pub s_max: usize,
    pub classes: Vec<ObstructionClass>,
    pub survives: bool,
    pub verdict: String,
}

/// Potential obstructions to θ_k: classes of Ext_{E(2)}(Σ^{qk}B_1(k), Σ^{qm}B_1(m))
/// with s ≥ 2 and t − s odd, for m ≤ m_max, each checked against the
/// C̄-to-C̄ summand and the u = 1 line.
pub fn obstruction_report(ctx: &PrimeContext, k: u64, m_max: u64, s_max: usize) -> Result<ObstructionReport> {
    let q = ctx.q();
    let bk = crate::browngitler::brown_gitler(ctx, 1, k)?.module.suspend(q * k as i64)?;
    let ck = cbar_block(ctx, k)?.suspend(q * k as i64)?;
    let per_m: Vec<Vec<ObstructionClass>> = (0..=m_max)
        .into_par_iter()
        .map(|m| -> Result<Vec<ObstructionClass>> {
            let bm = crate::browngitler::brown_gitler(ctx, 1, m)?.module.suspend(q * m as i64)?;
            let whole = ext_general(&bk, &bm, s_max, i64::MAX / 4)?;
            let odd = whole.odd_classes(2);
            if odd.is_empty() {
                return Ok(Vec::new());
            }
            let cm = cbar_block(ctx, m)?.suspend(q * m as i64)?;
            let cc = ext_general(&ck, &cm, s_max, i64::MAX / 4)?;
            let pi = propiso_modules(&ck, &cm, k, m, s_max)?;
            Ok(odd
                .into_iter()
                .map(|(s, t, dim)| ObstructionClass {
                    m,
                    s,
                    t,
                    dim,
                    in_cbar_summand: cc.get(s, t) == dim,
                    matched_by_u1_line: pi.passed()
                        && pi.rows.iter().any(|r| r.s == s && r.t == t && r.u1_line == dim),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let classes: Vec<ObstructionClass> = per_m.into_iter().flatten().collect();
    let survives = classes.iter().all(|c| c.in_cbar_summand && c.matched_by_u1_line);
    let verdict = if survives {
        format!("theta_{k} survives at the E_2-comparison level for m <= {m_max}, s <= {s_max}")
    } else {
        format!("theta_{k}: unmatched potential obstructions")
    };
    Ok(ObstructionReport { k, m_max, s_max, classes, survives, verdict })
}

/// Dimension of the Ext(F_p, F_p) closed form: v-monomials of degree s and weight t.
pub fn residue_field_count(vdeg: &[i64], s: usize, t: i64) -> usize {
    super::koszul::exponent_vectors(vdeg.len(), s)
        .iter()
        .filter(|a| a.iter().zip(vdeg).map(|(&x, &d)| x as i64 * d).sum::<i64>() == t)
        .count()
}

/// t-translation c with dim Ext^{s,t}(F_p, model) = dim Ext^{s−b,t−c}(F_p, F_p)
/// for all 0 < s ≤ s_max, if one exists.
pub fn invertible_ext_translation(model: &QModule, b: i64, s_max: usize) -> Result<Option<i64>> {
    let vdeg: Vec<i64> = model.qs().indices().iter().map(|&i| model.qdrop(i)).collect();
    let t_max = highest_t(model, s_max);
    let ext = ext_koszul(model, s_max, t_max)?.dims();
    let s0 = (1 - b).max(1) as usize;
    let lo_t = ext.t_range.0;
    // candidate translations from the first nonzero class
    let Some((&(s_first, t_first), _)) = ext.dims.iter().find(|(&(s, _), _)| s as usize >= s0) else {
        return Ok(None);
    };
    let target_s = s_first - b;
    if target_s < 0 {
        return Ok(None);
    }
    let candidates: Vec<i64> = (0..=t_max)
        .filter(|&t| residue_field_count(&vdeg, target_s as usize, t) > 0)
        .map(|t| t_first - t)
        .collect();
    'cand: for c in candidates {
        for s in s0..=s_max {
            let sr = s as i64 - b;
            if sr < 0 {
                continue;
            }
            for t in lo_t..=t_max - (vdeg.iter().max().unwrap_or(&0)) {
                let lhs = ext.get(s as i64, t);
                let rhs = if t - c >= 0 { residue_field_count(&vdeg, sr as usize, t - c) } else { 0 };
                if lhs != rhs {
                    continue 'cand;
                }
            }
        }
        return Ok(Some(c));
    }
    Ok(None)
}

/// Kernel dimension of a matrix.
pub fn nullity(a: &FpMatrix) -> usize {
    a.cols() - a.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::margolis::construct_model;

    fn ctx() -> PrimeContext {
        PrimeContext::new(3).unwrap()
    }

    #[test]
    fn residue_field_checks() {
        let f = QModule::trivial(ctx(), QSet::E2, 0);
        let r = even_concentration_check(std::slice::from_ref(&f), QSet::E2, 0, 4, 60).unwrap();
        assert!(r.passed());
        let b = bockstein_e1(std::slice::from_ref(&f), 0, 4, 60).unwrap();
        assert!(b.parity_collapse && b.dimension_collapse);
        for i in 0..3 {
            assert!(v_injectivity(&f, i, 4).unwrap().passed());
        }
        assert_eq!(residue_field_count(&[1, 5, 17], 2, 22), 1);
    }

    #[test]
    fn propiso_trivial_blocks() {
        let r = propiso_check(&ctx(), 0, 0, 3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.rows.iter().all(|x| x.exterior_odd == 0));
    }

    #[test]
    fn obstruction_at_k_zero() {
        let r = obstruction_report(&ctx(), 0, 4, 3).unwrap();
        assert!(r.classes.is_empty() && r.survives);
    }

    #[test]
    fn inverse_ideal_ext_shift() {
        let c = ctx();
        let j = construct_model(&c, (1, 2), 0, -1).unwrap();
        let shift = invertible_ext_translation(&j, -1, 4).unwrap();
        assert!(shift.is_some());
        let i = construct_model(&c, (1, 2), 0, 1).unwrap();
        assert!(invertible_ext_translation(&i, 1, 4).unwrap().is_some());
    }
}
