//! Named modules built from A//E(i)_*: Brown–Gitler modules B_i(k), weight
//! blocks M_i(j), the maps θ_k, the splitting of H_*BP⟨n⟩ into suspended
//! Brown–Gitler blocks, the length splitting C̄ ⊕ V̄, the S_i/R_i splittings
//! and the W families.

use crate::error::{Error, Result};
use crate::fp::{quotient_basis, FpMatrix, Subspace};
use crate::monomial::{
    enumerate_by_degree, enumerate_by_weight, enumerate_products, enumerate_weight_at_most,
    AlgebraSpec, Generator, Monomial, PrimeContext,
};
use crate::qmodule::{
    direct_sum, module_from_monomials, q_action_on_monomial, quotient, submodule_generated,
    Element, Label, QModule, QModuleMap, QSet,
};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

/// H_*BP⟨n⟩ = A//E(n)_* truncated at `max_degree`, with the full E(2)-action.
#[derive(Clone, Debug)]
pub struct BPHomology {
    pub n: usize,
    pub max_degree: i64,
    pub module: QModule,
}

pub fn bp_homology(ctx: &PrimeContext, n: usize, max_degree: i64) -> Result<BPHomology> {
    let spec = AlgebraSpec::new(n as i32)?;
    let ms = enumerate_by_degree(ctx, spec, max_degree.max(0) as u64);
    let module = module_from_monomials(ctx, spec, &ms, QSet::E2)?.with_truncation(Some(max_degree));
    Ok(BPHomology { n, max_degree, module })
}

/// Span of monomials of weight ≤ k in A//E(i)_*, over E(i+1).
#[derive(Clone, Debug)]
pub struct BrownGitlerComodule {
    pub i: i32,
    pub k: u64,
    pub module: QModule,
}

/// Q_0, …, Q_{n} as far as modelled; n = −1 gives no operators.
fn qs_upto(n: i32) -> QSet {
    if n < 0 {
        QSet::NONE
    } else {
        QSet::upto(n as usize)
    }
}

pub fn brown_gitler(ctx: &PrimeContext, i: i32, k: u64) -> Result<BrownGitlerComodule> {
    if !(-1..=2).contains(&i) {
        return Err(Error::Config(format!("B_i(k) needs i in -1..=2, got {i}")));
    }
    let spec = AlgebraSpec::new(i)?;
    let ms = enumerate_weight_at_most(ctx, spec, k);
    let module = module_from_monomials(ctx, spec, &ms, qs_upto(i + 1))?;
    Ok(BrownGitlerComodule { i, k, module })
}

/// Span of monomials of weight exactly j in A//E(i)_*, over E(i).
#[derive(Clone, Debug)]
pub struct WeightBlock {
    pub i: i32,
    pub j: u64,
    pub module: QModule,
}

pub fn weight_block(ctx: &PrimeContext, i: i32, j: u64) -> Result<WeightBlock> {
    let spec = AlgebraSpec::new(i)?;
    let ms = enumerate_by_weight(ctx, spec, j);
    let module = module_from_monomials(ctx, spec, &ms, qs_upto(i))?;
    Ok(WeightBlock { i, j, module })
}

/// θ_k(x) = ξ̄_1^{k − wt(x)} · (x with ξ̄_a ↦ ξ̄_{a+1}, τ̄_b ↦ τ̄_{b+1}).
/// Checks that the image has degree qk + |x| and weight pk.
pub fn theta_image(ctx: &PrimeContext, k: u64, x: &Monomial) -> Result<Monomial> {
    let fail = |reason: String| Error::Theta { k, monomial: x.to_string(), reason };
    let wt = x.weight(ctx);
    if wt > k {
        return Err(fail(format!("weight {wt} exceeds k")));
    }
    let y = x.shift_indices().times_xi(1, (k - wt) as u32);
    let want_deg = ctx.q() as u64 * k + x.degree(ctx);
    if y.degree(ctx) != want_deg {
        return Err(fail(format!("image degree {} != qk + |x| = {want_deg}", y.degree(ctx))));
    }
    let want_wt = ctx.p() as u64 * k;
    if y.weight(ctx) != want_wt {
        return Err(fail(format!("image weight {} != pk = {want_wt}", y.weight(ctx))));
    }
    Ok(y)
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaReport {
    pub i: i32,
    pub k: u64,
    pub dim: usize,
    pub bijective: bool,
    pub commutes: bool,
    pub images: Vec<(String, String)>,
    pub violations: Vec<String>,
}

impl ThetaReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.commutes && self.violations.is_empty()
    }
}

/// θ_k : Σ^{qk}B_i(k) → M_{i+1}(pk), with its verification.
pub fn theta(ctx: &PrimeContext, i: i32, k: u64) -> Result<(QModuleMap, ThetaReport)> {
    let b = brown_gitler(ctx, i, k)?;
    let shift = ctx.q() * k as i64;
    let source = Arc::new(b.module.suspend(shift)?);
    let target = weight_block(ctx, i + 1, ctx.p() as u64 * k)?.module;
    let target = Arc::new(target.restrict(source.qs().intersect(target.qs()))?);
    let source = Arc::new(source.restrict(target.qs())?);
    let mut matrices = BTreeMap::new();
    let mut images = Vec::new();
    for d in source.degrees() {
        let mut a = FpMatrix::zeros(ctx.p(), target.dim(d), source.dim(d));
        for (c, l) in source.labels(d).iter().enumerate() {
            let Label::Mono(x) = l else { unreachable!("Brown-Gitler labels are monomials") };
            let y = theta_image(ctx, k, x)?;
            let (td, r) = target.find_monomial(&y).ok_or_else(|| Error::Theta {
                k,
                monomial: x.to_string(),
                reason: format!("image {y} is not in M_{}({})", i + 1, ctx.p() as u64 * k),
            })?;
            debug_assert_eq!(td, d);
            a.set(r, c, 1);
            images.push((x.to_string(), y.to_string()));
        }
        matrices.insert(d, a);
    }
    let map = QModuleMap::new(source.clone(), target.clone(), 0, matrices)?;
    let rep = map.verify();
    let report = ThetaReport {
        i,
        k,
        dim: source.total_dim(),
        bijective: map.is_isomorphism(),
        commutes: rep.passed(),
        images,
        violations: rep.violations.iter().map(|v| format!("degree {}: {}", v.degree, v.message)).collect(),
    };
    Ok((map, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeDims {
    pub t: i64,
    pub dim_h: usize,
    pub dim_blocks: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BpSplittingReport {
    pub prime: u32,
    pub n: usize,
    pub max_degree: i64,
    pub per_degree: Vec<DegreeDims>,
    pub failures: Vec<String>,
    pub first_failing_degree: Option<i64>,
}

impl BpSplittingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// ⊕_k Σ^{qk}B_{n−1}(k) → H_*BP⟨n⟩ blockwise by θ_k, through `max_degree`.
pub fn assemble_bp_splitting(
    ctx: &PrimeContext,
    n: usize,
    max_degree: i64,
) -> Result<(BpSplittingReport, QModuleMap)> {
    if !(1..=2).contains(&n) {
        return Err(Error::Config(format!("BP<n> splitting needs n in 1..=2, got {n}")));
    }
    let h = bp_homology(ctx, n, max_degree)?.module.restrict(QSet::upto(n))?;
    assemble_bp_splitting_onto(ctx, n, Arc::new(h))
}

/// As [`assemble_bp_splitting`], against a given model `h` of H_*BP⟨n⟩ over
/// E(n) (its truncation sets the range). Lets a perturbed target be checked.
pub fn assemble_bp_splitting_onto(
    ctx: &PrimeContext,
    n: usize,
    h: Arc<QModule>,
) -> Result<(BpSplittingReport, QModuleMap)> {
    let qs = QSet::upto(n);
    let max_degree = h
        .truncation()
        .ok_or_else(|| Error::Config("target of the splitting must be truncated".into()))?;
    let q = ctx.q();
    let mut blocks = Vec::new();
    let mut k = 0;
    while q * k <= max_degree {
        let b = brown_gitler(ctx, n as i32 - 1, k as u64)?.module.restrict(qs)?;
        blocks.push((k as u64, b.suspend(q * k)?.truncate(max_degree)));
        k += 1;
    }
    let refs: Vec<&QModule> = blocks.iter().map(|(_, b)| b).collect();
    let sum = Arc::new(direct_sum(&refs)?.with_truncation(Some(max_degree)));

    let mut failures = Vec::new();
    let mut matrices = BTreeMap::new();
    let mut offsets: BTreeMap<i64, usize> = BTreeMap::new();
    for (k, b) in &blocks {
        for d in b.degrees() {
            let off = offsets.entry(d).or_insert(0);
            let a = matrices
                .entry(d)
                .or_insert_with(|| FpMatrix::zeros(ctx.p(), h.dim(d), sum.dim(d)));
            for (c, l) in b.labels(d).iter().enumerate() {
                let Label::Mono(x) = l else { unreachable!() };
                let y = theta_image(ctx, *k, x)?;
                match h.find_monomial(&y) {
                    Some((_, r)) => a.set(r, *off + c, 1),
                    None => failures.push(format!("degree {d}: theta_{k}({x}) = {y} missing from H")),
                }
            }
            *off += b.dim(d);
        }
    }
    let map = QModuleMap::new(sum.clone(), h.clone(), 0, matrices)?;
    let mut per_degree = Vec::new();
    let mut first = None;
    for t in 0..=max_degree {
        let (dh, ds) = (h.dim(t), sum.dim(t));
        per_degree.push(DegreeDims { t, dim_h: dh, dim_blocks: ds });
        if dh != ds {
            failures.push(format!("degree {t}: dim H = {dh}, blocks give {ds}"));
            first.get_or_insert(t);
        } else if dh > 0 && map.matrix(t).rank() != dh {
            failures.push(format!("degree {t}: assembled map is not invertible"));
            first.get_or_insert(t);
        }
    }
    for v in map.verify().violations {
        failures.push(format!("degree {}: {}", v.degree, v.message));
        first = Some(first.map_or(v.degree, |f: i64| f.min(v.degree)));
    }
    let report = BpSplittingReport {
        prime: ctx.p(),
        n,
        max_degree,
        per_degree,
        failures,
        first_failing_degree: first,
    };
    Ok((report, map))
}

/// A module split as free part ⊕ reduced part.
#[derive(Clone, Debug)]
pub struct SplitPair {
    pub whole: Arc<QModule>,
    pub free_part: Arc<QModule>,
    pub reduced_part: Arc<QModule>,
    pub inclusion: QModuleMap,
    pub projection: QModuleMap,
    pub retraction: QModuleMap,
    /// Degrees of a minimal generating set of the free part.
    pub free_generators: Vec<i64>,
}

impl SplitPair {
    /// Degrees where dim whole ≠ dim free + dim reduced.
    pub fn dimension_defects(&self) -> Vec<i64> {
        self.whole
            .degrees()
            .filter(|&d| self.whole.dim(d) != self.free_part.dim(d) + self.reduced_part.dim(d))
            .collect()
    }

    /// Degrees where retraction ∘ inclusion ≠ id.
    pub fn retraction_defects(&self) -> Vec<i64> {
        self.free_part
            .degrees()
            .filter(|&d| {
                self.retraction.matrix(d).mul(&self.inclusion.matrix(d))
                    != FpMatrix::identity(self.whole.p(), self.free_part.dim(d))
            })
            .collect()
    }
}

fn subset_word(ix: &[usize], mask: u32) -> Vec<usize> {
    (0..ix.len()).filter(|b| mask >> b & 1 == 1).map(|b| ix[b]).collect()
}

/// Minimal generators of a module: complements of Σ_i Q_i M_{d+d_i} in M_d.
pub fn minimal_generators(m: &QModule) -> Result<Vec<Element>> {
    let mut gens = Vec::new();
    for d in m.degrees().rev() {
        let mut images = Vec::new();
        for i in m.qs().indices() {
            let src = d + m.qdrop(i);
            for c in 0..m.dim(src) {
                images.push(m.apply(i, src, &m.basis_element(src, c).coeffs));
            }
        }
        let im = Subspace::spanned_by(m.p(), m.dim(d), images);
        for v in quotient_basis(m.dim(d), &im)? {
            gens.push(Element { degree: d, coeffs: v });
        }
    }
    Ok(gens)
}

/// A retraction whole → free for a free submodule, built from the
/// self-injectivity of exterior algebras: an E-map into E·g is determined by
/// the functional reading off the coefficient of the top class Q_{all}g.
fn free_retraction(whole: &Arc<QModule>, free: &Arc<QModule>, incl: &QModuleMap) -> Result<(QModuleMap, Vec<i64>)> {
    let p = whole.p();
    let ix = free.qs().indices();
    let full: u32 = (1 << ix.len()) - 1;
    let gens = minimal_generators(free)?;
    if gens.len() << ix.len() != free.total_dim() {
        return Err(Error::NotFree(format!(
            "{} generators over {} but total dimension {}",
            gens.len(),
            free.qs(),
            free.total_dim()
        )));
    }
    // cells[(α, S)] = Q_S g_α as (degree, vector in free)
    let mut cells: Vec<Vec<(i64, Vec<u32>)>> = Vec::new();
    for g in &gens {
        let row = (0..=full)
            .map(|mask| free.apply_word(&subset_word(&ix, mask), g.degree, &g.coeffs))
            .collect();
        cells.push(row);
    }
    let mut at_degree: BTreeMap<i64, Vec<(usize, u32)>> = BTreeMap::new();
    for (a, row) in cells.iter().enumerate() {
        for (mask, (d, _)) in row.iter().enumerate() {
            at_degree.entry(*d).or_default().push((a, mask as u32));
        }
    }
    // φ_α on whole_{top α}: 1 on incl(Q_all g_α), 0 on the other free basis cells there.
    let mut phis = Vec::new();
    for (a, row) in cells.iter().enumerate() {
        let top = row[full as usize].0;
        let members = &at_degree[&top];
        let rows: Vec<Vec<u32>> = members
            .iter()
            .map(|&(b, mask)| incl.apply(top, &cells[b][mask as usize].1))
            .collect();
        let bmat = FpMatrix::from_rows(p, &rows)?;
        let target: Vec<u32> = members.iter().map(|&(b, mask)| u32::from(b == a && mask == full)).collect();
        let phi = bmat
            .solve(&target)
            .ok_or_else(|| Error::Retraction(format!("free cells dependent in degree {top}")))?;
        phis.push(phi);
    }
    let inversions = |a: u32, b: u32| -> u32 {
        let mut n = 0;
        for x in 0..ix.len() {
            for y in 0..ix.len() {
                if a >> x & 1 == 1 && b >> y & 1 == 1 && x > y {
                    n += 1;
                }
            }
        }
        n
    };
    let mut matrices = BTreeMap::new();
    for (&d, members) in &at_degree {
        let mut r = FpMatrix::zeros(p, free.dim(d), whole.dim(d));
        for &(a, mask) in members {
            let sc = full & !mask;
            let word = subset_word(&ix, sc);
            let qsc = whole.word_matrix(&word, d);
            let phi_row = FpMatrix::from_rows(p, &[phis[a].clone()])?.mul(&qsc);
            let coeff = if inversions(sc, mask) % 2 == 0 { 1 } else { p - 1 };
            let col = &cells[a][mask as usize].1;
            for (i, &x) in col.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for j in 0..whole.dim(d) {
                    let y = phi_row.get(0, j);
                    if y != 0 {
                        r.add_to(i, j, x * y % p * coeff % p);
                    }
                }
            }
        }
        if !r.is_zero() {
            matrices.insert(d, r);
        }
    }
    let retraction = QModuleMap::new(whole.clone(), free.clone(), 0, matrices)?;
    let rep = retraction.verify();
    if !rep.passed() {
        return Err(Error::Retraction(format!(
            "retraction fails Q-linearity in degree {}",
            rep.violations[0].degree
        )));
    }
    Ok((retraction, gens.iter().map(|g| g.degree).collect()))
}

/// Split `whole` along the submodule generated by `generators`, which must be
/// free over the module's algebra.
pub fn split_off_free(whole: &Arc<QModule>, generators: &[Element]) -> Result<SplitPair> {
    let (_, inclusion) = submodule_generated(whole, generators)?;
    let free = inclusion.source().clone();
    let (reduced, projection) = quotient(whole, generators)?;
    let (retraction, free_generators) = free_retraction(whole, &free, &inclusion)?;
    let pair = SplitPair {
        whole: whole.clone(),
        free_part: free,
        reduced_part: Arc::new(reduced),
        inclusion,
        projection,
        retraction,
        free_generators,
    };
    if let Some(d) = pair.retraction_defects().first() {
        return Err(Error::Retraction(format!("retraction is not a left inverse in degree {d}")));
    }
    Ok(pair)
}

fn monomials_where(m: &QModule, pred: impl Fn(&Monomial) -> bool) -> Vec<Element> {
    let mut out = Vec::new();
    for d in m.degrees() {
        for (i, l) in m.labels(d).iter().enumerate() {
            if let Label::Mono(x) = l {
                if pred(x) {
                    out.push(m.basis_element(d, i));
                }
            }
        }
    }
    out
}

/// Sum of the drops of Q_0, Q_1, Q_2.
pub fn total_drop(ctx: &PrimeContext) -> i64 {
    (0..3).map(|i| ctx.q_drop(i)).sum()
}

/// C̄ ⊕ V̄ inside H_*BP⟨2⟩ truncated at `max_degree`, with V̄ generated by the
/// monomials of length ≥ 3. The reduced part agrees with the untruncated C̄
/// through degree max_degree − (d_0 + d_1 + d_2).
pub fn length_splitting(ctx: &PrimeContext, max_degree: i64) -> Result<SplitPair> {
    let h = Arc::new(bp_homology(ctx, 2, max_degree)?.module);
    let gens = monomials_where(&h, |x| x.length() >= 3);
    let mut pair = split_off_free(&h, &gens)?;
    let certified = max_degree - total_drop(ctx);
    pair.reduced_part = Arc::new((*pair.reduced_part).clone().with_truncation(Some(certified)));
    Ok(pair)
}

/// B_1(k) = C̄_k ⊕ V̄_k, exact (B_1(k) is finite).
pub fn brown_gitler_length_splitting(ctx: &PrimeContext, k: u64) -> Result<SplitPair> {
    let b = Arc::new(brown_gitler(ctx, 1, k)?.module);
    let gens = monomials_where(&b, |x| x.length() >= 3);
    split_off_free(&b, &gens)
}

/// C̄_k: the weight-k Brown–Gitler block with its free part split off, kept
/// through internal degree `max_degree` (its own grading, before Σ^{qk}).
pub fn weight_restricted_c(ctx: &PrimeContext, k: u64, max_degree: i64) -> Result<QModule> {
    let pair = brown_gitler_length_splitting(ctx, k)?;
    Ok(pair.reduced_part.truncate(max_degree))
}

/// R_i ⊕ S_i inside a C̄-type module: S_i is generated over E(Q_j,Q_h) by the
/// images of the length-2 monomials.
pub fn si_ri_split(cbar_pair: &SplitPair, perm: (usize, usize, usize)) -> Result<SplitPair> {
    let (i, j, h) = perm;
    let mut s = [i, j, h];
    s.sort();
    if s != [0, 1, 2] {
        return Err(Error::Config(format!("({i},{j},{h}) is not a permutation of (0,1,2)")));
    }
    let whole = &cbar_pair.whole;
    let proj = &cbar_pair.projection;
    let c = Arc::new(cbar_pair.reduced_part.restrict(QSet::pair(j, h))?);
    let gens: Vec<Element> = monomials_where(whole, |x| x.length() == 2)
        .into_iter()
        .map(|e| Element { degree: e.degree, coeffs: proj.apply(e.degree, &e.coeffs) })
        .filter(|e| e.coeffs.iter().any(|&x| x != 0))
        .collect();
    split_off_free(&c, &gens)
}

pub fn si_ri_splitting(ctx: &PrimeContext, perm: (usize, usize, usize), max_degree: i64) -> Result<SplitPair> {
    let pair = length_splitting(ctx, max_degree)?;
    si_ri_split(&pair, perm)
}

/// Degrees where Q_jQ_h is nonzero on the module.
pub fn qjqh_nonzero_degrees(m: &QModule, j: usize, h: usize) -> Vec<i64> {
    m.degrees()
        .filter(|&d| !m.word_matrix(&[j, h], d).is_zero())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WFamily {
    W1,
    We,
    Wo,
}

impl WFamily {
    pub fn pair(&self) -> (usize, usize) {
        match self {
            WFamily::W1 => (1, 2),
            WFamily::We | WFamily::Wo => (0, 2),
        }
    }

    pub fn qs(&self) -> QSet {
        let (j, h) = self.pair();
        QSet::pair(j, h)
    }

    /// Weight of the n = 1 component: p³ for W_1 and W_o, p⁴ for W_e.
    pub fn weight_unit(&self, ctx: &PrimeContext) -> u64 {
        match self {
            WFamily::W1 | WFamily::Wo => ctx.power(3),
            WFamily::We => ctx.power(4),
        }
    }

    /// Multiplicative generators with degree ≤ max_degree and weight ≤ max_weight.
    pub fn generators(&self, ctx: &PrimeContext, max_degree: u64, max_weight: u64) -> Vec<Generator> {
        let p2 = ctx.power(2) as u32;
        let p = ctx.p();
        let mut cands: Vec<(Monomial, bool)> = Vec::new();
        for a in 1..40u32 {
            if ctx.xi_degree(a) > max_degree || ctx.power(a) > max_weight {
                break;
            }
            match self {
                WFamily::W1 => {
                    cands.push((Monomial::xi(a, if a == 1 { p2 } else { p }), false));
                }
                WFamily::Wo => {
                    if a == 1 {
                        cands.push((Monomial::xi(1, p2), false));
                    } else if a % 2 == 1 {
                        cands.push((Monomial::xi(a, 1), false));
                    }
                }
                WFamily::We => {
                    if a == 2 {
                        cands.push((Monomial::xi(2, p2), false));
                    } else if a >= 4 && a % 2 == 0 {
                        cands.push((Monomial::xi(a, 1), false));
                    }
                }
            }
        }
        for b in 3..60u32 {
            if ctx.tau_degree(b) > max_degree || ctx.power(b) > max_weight {
                break;
            }
            let ok = match self {
                WFamily::W1 => true,
                WFamily::Wo => b % 2 == 1,
                WFamily::We => b % 2 == 0,
            };
            if ok {
                cands.push((Monomial::tau(b), true));
            }
        }
        cands
            .into_iter()
            .map(|(m, ext)| Generator::new(ctx, m, ext))
            .filter(|g| g.degree <= max_degree && g.weight <= max_weight)
            .collect()
    }

    pub fn contains(&self, ctx: &PrimeContext, m: &Monomial) -> bool {
        let p = ctx.p();
        let p2 = ctx.power(2) as u32;
        let xi_ok = m.xi_exponents().iter().enumerate().all(|(i, &e)| {
            let a = i as u32 + 1;
            e == 0
                || match self {
                    WFamily::W1 => e % if a == 1 { p2 } else { p } == 0,
                    WFamily::Wo => (a == 1 && e % p2 == 0) || (a > 1 && a % 2 == 1),
                    WFamily::We => (a == 2 && e % p2 == 0) || (a >= 4 && a.is_multiple_of(2)),
                }
        });
        let tau_ok = m.tau_indices().all(|b| match self {
            WFamily::W1 => b >= 3,
            WFamily::Wo => b >= 3 && b % 2 == 1,
            WFamily::We => b >= 4 && b % 2 == 0,
        });
        xi_ok && tau_ok
    }
}

/// The weight-n component W(n), kept through `max_degree`.
pub fn w_family(ctx: &PrimeContext, which: WFamily, n: u64, max_degree: i64) -> Result<QModule> {
    let weight = which.weight_unit(ctx) * n;
    let gens = which.generators(ctx, u64::MAX, weight);
    let ms = enumerate_products(&gens, &|_, w| w <= weight, &|_, w| w == weight);
    let full = module_from_monomials(ctx, AlgebraSpec::new(2)?, &ms, which.qs())?;
    Ok(full.truncate(max_degree))
}

/// All of W (every weight) through `max_degree`.
pub fn w_family_by_degree(ctx: &PrimeContext, which: WFamily, max_degree: i64) -> Result<QModule> {
    let d = max_degree.max(0) as u64;
    let gens = which.generators(ctx, d, u64::MAX);
    let ms = enumerate_products(&gens, &|deg, _| deg <= d, &|deg, _| deg <= d);
    Ok(module_from_monomials(ctx, AlgebraSpec::new(2)?, &ms, which.qs())?.with_truncation(Some(max_degree)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Factorization {
    /// H_*BP⟨2⟩ ≅ W_1 ⊗ T_2(ξ̄_1) ⊗ T_1(ξ̄_2, ξ̄_3, …) over E(Q_1,Q_2).
    E12,
    /// H_*BP⟨2⟩ ≅ W_e ⊗ W_o ⊗ T_2(ξ̄_1, ξ̄_2) over E(Q_0,Q_2).
    E02,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationRow {
    pub t: i64,
    pub dim_h: usize,
    pub dim_product: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub which: Factorization,
    pub max_degree: i64,
    pub per_degree: Vec<FactorizationRow>,
    pub failures: Vec<String>,
}

impl FactorizationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Parts of a monomial under the factorization, W-parts first, T-part last.
pub fn factor_monomial(ctx: &PrimeContext, which: Factorization, m: &Monomial) -> Vec<Monomial> {
    let p = ctx.p();
    let p2 = ctx.power(2) as u32;
    let mut w1 = Monomial::unit();
    let mut we = Monomial::unit();
    let mut wo = Monomial::unit();
    let mut t = Monomial::unit();
    for (i, &e) in m.xi_exponents().iter().enumerate() {
        let a = i as u32 + 1;
        match which {
            Factorization::E12 => {
                let modulus = if a == 1 { p2 } else { p };
                w1 = w1.times_xi(a, e - e % modulus);
                t = t.times_xi(a, e % modulus);
            }
            Factorization::E02 => match a {
                1 => {
                    wo = wo.times_xi(1, e - e % p2);
                    t = t.times_xi(1, e % p2);
                }
                2 => {
                    we = we.times_xi(2, e - e % p2);
                    t = t.times_xi(2, e % p2);
                }
                _ if a % 2 == 1 => wo = wo.times_xi(a, e),
                _ => we = we.times_xi(a, e),
            },
        }
    }
    for b in m.tau_indices() {
        match which {
            Factorization::E12 => w1 = w1.mul(&Monomial::tau(b)).unwrap(),
            Factorization::E02 if b % 2 == 1 => wo = wo.mul(&Monomial::tau(b)).unwrap(),
            Factorization::E02 => we = we.mul(&Monomial::tau(b)).unwrap(),
        }
    }
    match which {
        Factorization::E12 => vec![w1, t],
        Factorization::E02 => vec![we, wo, t],
    }
}

/// Sign of rewriting the canonical monomial we·wo as (we first)(wo second).
fn interleave_sign(we: &Monomial, wo: &Monomial) -> bool {
    let mut inv = 0;
    for a in we.tau_indices() {
        inv += wo.tau_indices().filter(|&b| a > b).count();
    }
    inv % 2 == 1
}

type Tensor = HashMap<Vec<Monomial>, u32>;

fn add_term(p: u32, acc: &mut Tensor, key: Vec<Monomial>, c: u32) {
    let e = acc.entry(key).or_insert(0);
    *e = (*e + c) % p;
}

/// Checks that monomial factorization is a Q-equivariant bijection onto the
/// tensor product, degree by degree through `max_degree`.
pub fn verify_tensor_factorization(
    ctx: &PrimeContext,
    which: Factorization,
    max_degree: i64,
) -> Result<FactorizationReport> {
    let p = ctx.p();
    let spec = AlgebraSpec::new(2)?;
    let hs = enumerate_by_degree(ctx, spec, max_degree.max(0) as u64);
    let (qs, families) = match which {
        Factorization::E12 => (vec![1, 2], vec![WFamily::W1]),
        Factorization::E02 => (vec![0, 2], vec![WFamily::We, WFamily::Wo]),
    };
    let t_bound = |a: u32| -> u32 {
        match which {
            Factorization::E12 => {
                if a == 1 {
                    ctx.power(2) as u32
                } else {
                    p
                }
            }
            Factorization::E02 => {
                if a <= 2 {
                    ctx.power(2) as u32
                } else {
                    0
                }
            }
        }
    };
    let mut failures = Vec::new();
    let mut seen = HashSet::new();
    let phi = |m: &Monomial| -> (Vec<Monomial>, bool) {
        let parts = factor_monomial(ctx, which, m);
        let sign = which == Factorization::E02 && interleave_sign(&parts[0], &parts[1]);
        (parts, sign)
    };
    for m in &hs {
        let (parts, sign) = phi(m);
        let t = parts.last().unwrap();
        let mut prod = Monomial::unit();
        for x in &parts {
            prod = prod.mul(x).unwrap_or_default();
        }
        if &prod != m {
            failures.push(format!("{m}: parts do not multiply back"));
        }
        for (x, fam) in parts.iter().zip(&families) {
            if !fam.contains(ctx, x) {
                failures.push(format!("{m}: {x} is not in {fam:?}"));
            }
        }
        if t.length() != 0 || t.xi_exponents().iter().enumerate().any(|(i, &e)| e >= t_bound(i as u32 + 1)) {
            failures.push(format!("{m}: T-part {t} out of range"));
        }
        if !seen.insert(parts.clone()) {
            failures.push(format!("{m}: factorization not unique"));
        }
        for &i in &qs {
            // Φ(Q_i m)
            let mut lhs = Tensor::new();
            for (y, c) in q_action_on_monomial(ctx, spec, i, m)? {
                let (ps, s) = phi(&y);
                add_term(p, &mut lhs, ps, if s { p - c } else { c });
            }
            // Q_i Φ(m)
            let mut rhs = Tensor::new();
            let base = if sign { p - 1 } else { 1 };
            let nw = families.len();
            for f in 0..nw {
                let before_odd: u64 = parts[..f].iter().map(|x| x.degree(ctx)).sum::<u64>() % 2;
                for (y, c) in q_action_on_monomial(ctx, spec, i, &parts[f])? {
                    let mut key = parts.clone();
                    key[f] = y;
                    let c = c * base % p;
                    add_term(p, &mut rhs, key, if before_odd == 1 { (p - c) % p } else { c });
                }
            }
            lhs.retain(|_, c| *c != 0);
            rhs.retain(|_, c| *c != 0);
            if lhs != rhs {
                failures.push(format!("{m}: factorization does not commute with Q{i}"));
            }
        }
    }
    // degreewise count of the tensor product of the factors
    let d = max_degree.max(0) as u64;
    let mut conv = vec![0usize; d as usize + 1];
    conv[0] = 1;
    for fam in &families {
        let gens = fam.generators(ctx, d, u64::MAX);
        let ms = enumerate_products(&gens, &|deg, _| deg <= d, &|deg, _| deg <= d);
        conv = convolve(&conv, &counts_by_degree(ctx, &ms, d));
    }
    let tgens: Vec<Monomial> = enumerate_by_degree(ctx, AlgebraSpec::new(2)?, d)
        .into_iter()
        .filter(|m| {
            m.length() == 0 && m.xi_exponents().iter().enumerate().all(|(i, &e)| e < t_bound(i as u32 + 1))
        })
        .collect();
    conv = convolve(&conv, &counts_by_degree(ctx, &tgens, d));
    let hcounts = counts_by_degree(ctx, &hs, d);
    let mut per_degree = Vec::new();
    for t in 0..=d as usize {
        if hcounts[t] != conv[t] {
            failures.push(format!("degree {t}: dim H = {}, tensor product gives {}", hcounts[t], conv[t]));
        }
        if hcounts[t] > 0 || conv[t] > 0 {
            per_degree.push(FactorizationRow { t: t as i64, dim_h: hcounts[t], dim_product: conv[t] });
        }
    }
    Ok(FactorizationReport { which, max_degree, per_degree, failures })
}

fn counts_by_degree(ctx: &PrimeContext, ms: &[Monomial], d: u64) -> Vec<usize> {
    let mut v = vec![0; d as usize + 1];
    for m in ms {
        let e = m.degree(ctx);
        if e <= d {
            v[e as usize] += 1;
        }
    }
    v
}

fn convolve(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if i + j < out.len() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: u32) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn names(m: &QModule) -> Vec<String> {
        m.basis_map().values().flatten().map(|l| l.to_string()).collect()
    }

    #[test]
    fn brown_gitler_examples() {
        assert_eq!(names(&brown_gitler(&c(3), 1, 4).unwrap().module), ["1", "xi1"]);
        let b9 = brown_gitler(&c(3), 1, 9).unwrap().module;
        assert_eq!(names(&b9), ["1", "xi1", "xi1^2", "xi1^3", "xi2", "tau2"]);
        for p in [3, 5, 7] {
            for i in -1..=2 {
                assert_eq!(brown_gitler(&c(p), i, 0).unwrap().module.total_dim(), 1);
            }
        }
    }

    #[test]
    fn weight_block_examples() {
        assert_eq!(
            names(&weight_block(&c(3), 2, 27).unwrap().module),
            ["xi1^9", "xi1^6 xi2", "xi1^3 xi2^2", "xi2^3", "xi3", "tau3"]
        );
        assert_eq!(names(&weight_block(&c(5), 2, 5).unwrap().module), ["xi1"]);
        assert_eq!(names(&weight_block(&c(5), 1, 0).unwrap().module), ["1"]);
    }

    #[test]
    fn theta_examples() {
        let ctx = c(3);
        assert_eq!(theta_image(&ctx, 9, &mono("tau2")).unwrap(), mono("tau3"));
        assert_eq!(theta_image(&ctx, 9, &mono("xi1^2")).unwrap(), mono("xi1^3 xi2^2"));
        assert_eq!(theta_image(&c(7), 0, &Monomial::unit()).unwrap(), Monomial::unit());
        let (_, rep) = theta(&ctx, 1, 9).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.dim, 6);
        assert!(theta_image(&ctx, 3, &mono("xi1")).is_ok());
        assert!(theta_image(&ctx, 2, &mono("xi2")).is_err());
    }

    #[test]
    fn assembled_splitting_small() {
        let (rep, _) = assemble_bp_splitting(&c(3), 2, 17).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.per_degree[16].dim_h, 2);
        assert_eq!(rep.per_degree[0].dim_h, 1);
        let (rep, map) = assemble_bp_splitting(&c(5), 2, 48).unwrap();
        assert!(rep.passed());
        // ξ̄_2 (degree 48 at p = 5) comes from ξ̄_1 in block k = 5
        let h = map.target();
        let (d, r) = h.find_monomial(&mono("xi2")).unwrap();
        let col = (0..map.source().dim(d)).find(|&c| map.matrix(d).get(r, c) == 1).unwrap();
        assert_eq!(map.source().labels(d)[col].to_string(), "xi1");
        let (rep, _) = assemble_bp_splitting(&c(3), 1, 60).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn length_splitting_below_first_long_monomial() {
        let ctx = c(3);
        assert_eq!(mono("tau3 tau4 tau5").degree(&ctx), 699);
        let pair = length_splitting(&ctx, 120).unwrap();
        assert!(pair.free_part.is_zero());
        assert_eq!(pair.reduced_part.total_dim(), pair.whole.total_dim());
        assert!(pair.dimension_defects().is_empty());
        assert_eq!(pair.reduced_part.labels(0)[0].to_string(), "1");
    }

    #[test]
    fn block_117_has_a_free_summand() {
        let ctx = c(3);
        let pair = brown_gitler_length_splitting(&ctx, 117).unwrap();
        assert_eq!(pair.free_part.total_dim(), 8);
        assert_eq!(pair.free_generators, vec![mono("tau2 tau3 tau4").degree(&ctx) as i64]);
        assert!(pair.dimension_defects().is_empty());
        assert!(pair.retraction_defects().is_empty());
        assert!(pair.projection.verify().passed());
        assert!(pair.reduced_part.verify_relations().is_empty());
        assert_eq!(weight_restricted_c(&ctx, 9, 1000).unwrap().total_dim(), 6);
        assert_eq!(weight_restricted_c(&ctx, 0, 1000).unwrap().total_dim(), 1);
    }

    #[test]
    fn si_ri_on_a_block_with_length_two() {
        let ctx = c(3);
        let cbar = brown_gitler_length_splitting(&ctx, 36).unwrap();
        for perm in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
            let s = si_ri_split(&cbar, perm).unwrap();
            assert!(s.dimension_defects().is_empty());
            assert!(qjqh_nonzero_degrees(&s.reduced_part, perm.1, perm.2).is_empty(), "{perm:?}");
            assert!(!s.free_part.is_zero());
        }
    }

    #[test]
    fn w_family_examples() {
        let ctx = c(3);
        let w1 = w_family(&ctx, WFamily::W1, 1, 1000).unwrap();
        assert_eq!(names(&w1), ["xi1^9", "xi2^3", "tau3"]);
        let t = w1.monomial_element(&mono("tau3")).unwrap();
        assert_eq!(w1.apply(1, 53, &t.coeffs), w1.monomial_element(&mono("xi2^3")).unwrap().coeffs);
        assert_eq!(w1.apply(2, 53, &t.coeffs), w1.monomial_element(&mono("xi1^9")).unwrap().coeffs);
        assert_eq!(w_family(&ctx, WFamily::W1, 0, 10).unwrap().total_dim(), 1);
        let wo = w_family(&ctx, WFamily::Wo, 1, 1000).unwrap();
        assert_eq!(names(&wo), ["xi1^9", "xi3", "tau3"]);
        assert!(wo.verify_relations().is_empty());
    }

    #[test]
    fn factorization_examples() {
        let ctx = c(3);
        assert_eq!(factor_monomial(&ctx, Factorization::E12, &Monomial::unit()), vec![Monomial::unit(); 2]);
        assert_eq!(factor_monomial(&ctx, Factorization::E12, &mono("xi1^10")), vec![mono("xi1^9"), mono("xi1")]);
        assert_eq!(
            factor_monomial(&ctx, Factorization::E02, &mono("xi2")),
            vec![Monomial::unit(), Monomial::unit(), mono("xi2")]
        );
        for which in [Factorization::E12, Factorization::E02] {
            let rep = verify_tensor_factorization(&ctx, which, 300).unwrap();
            assert!(rep.passed(), "{:?}", &rep.failures[..rep.failures.len().min(5)]);
        }
    }
}
