//! Ext_E(F_p, M) as the cohomology of M ⊗ F_p[v_i : i ∈ qs] with
//! d = Σ Q_i ⊗ v_i. A class m·v^α with m ∈ M_d sits at s = |α|,
//! t = d + Σ α_i d_i, so v_i has bidegree (1, d_i).

use crate::error::{Error, Result};
use crate::fp::{FpMatrix, Subquotient, Subspace};
use crate::qmodule::QModule;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use super::{BigradedDims, PModule};

/// Exponent vectors of total degree s in n variables, lexicographically descending.
pub fn exponent_vectors(n: usize, s: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if s == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for a in (0..=s).rev() {
        for mut rest in exponent_vectors(n - 1, s - a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// One chain group C^{s,t} = ⊕_α M_{t − v(α)}.
#[derive(Clone, Debug)]
struct ChainGroup {
    /// (α, module degree, offset)
    blocks: Vec<(Vec<usize>, i64, usize)>,
    dim: usize,
}

impl ChainGroup {
    fn offset_of(&self, alpha: &[usize]) -> Option<(i64, usize)> {
        self.blocks.iter().find(|b| b.0 == alpha).map(|b| (b.1, b.2))
    }
}

/// The Koszul complex of a module over its exterior algebra, in a bounded region.
#[derive(Clone, Debug)]
pub struct KoszulComplex<'a> {
    pub module: &'a QModule,
    /// Q indices, which are also the v indices.
    pub vars: Vec<usize>,
    pub vdeg: Vec<i64>,
}

impl<'a> KoszulComplex<'a> {
    pub fn new(module: &'a QModule) -> Self {
        let vars = module.qs().indices();
        let vdeg = vars.iter().map(|&i| module.qdrop(i)).collect();
        KoszulComplex { module, vars, vdeg }
    }

    fn vweight(&self, alpha: &[usize]) -> i64 {
        alpha.iter().zip(&self.vdeg).map(|(&a, &d)| a as i64 * d).sum()
    }

    fn group(&self, s: usize, t: i64) -> ChainGroup {
        let mut blocks = Vec::new();
        let mut off = 0;
        for alpha in exponent_vectors(self.vars.len(), s) {
            let d = t - self.vweight(&alpha);
            let n = self.module.dim(d);
            if n > 0 {
                blocks.push((alpha, d, off));
                off += n;
            }
        }
        ChainGroup { blocks, dim: off }
    }

    /// d: C^{s,t} → C^{s+1,t}.
    fn differential(&self, s: usize, t: i64) -> (ChainGroup, ChainGroup, FpMatrix) {
        let src = self.group(s, t);
        let dst = self.group(s + 1, t);
        let p = self.module.p();
        let mut a = FpMatrix::zeros(p, dst.dim, src.dim);
        for (alpha, d, off) in &src.blocks {
            for (k, &i) in self.vars.iter().enumerate() {
                let mut beta = alpha.clone();
                beta[k] += 1;
                let Some((td, toff)) = dst.offset_of(&beta) else { continue };
                debug_assert_eq!(td, d - self.module.qdrop(i));
                if let Some(q) = self.module.action(i, *d) {
                    for r in 0..q.rows() {
                        for c in 0..q.cols() {
                            let x = q.get(r, c);
                            if x != 0 {
                                a.add_to(toff + r, off + c, x);
                            }
                        }
                    }
                }
            }
        }
        (src, dst, a)
    }

    /// Checks d∘d = 0 at (s, t).
    pub fn d_squared_vanishes(&self, s: usize, t: i64) -> bool {
        let (_, _, d1) = self.differential(s, t);
        let (_, _, d2) = self.differential(s + 1, t);
        d2.mul(&d1).is_zero()
    }
}

/// Ext(F_p, M) in the region s ≤ s_max, t_min ≤ t ≤ t_max, with chain-level
/// representatives so that v_i-multiplication can be evaluated.
#[derive(Clone, Debug)]
pub struct KoszulExt {
    pub p: u32,
    pub vars: Vec<usize>,
    pub vdeg: Vec<i64>,
    pub s_max: usize,
    pub t_min: i64,
    pub t_max: i64,
    /// No class lies above t_max for s ≤ s_max.
    pub t_complete: bool,
    groups: BTreeMap<(usize, i64), (ChainGroup, Subquotient)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtClass {
    pub s: usize,
    pub t: i64,
    pub dim: usize,
}

/// Lowest t at which C^{s,•} can be nonzero.
fn t_floor(m: &QModule, vdeg: &[i64], s: usize) -> i64 {
    m.min_degree().unwrap_or(0) + s as i64 * vdeg.iter().copied().min().unwrap_or(0)
}

/// Highest t at which C^{s,•} can be nonzero (finite modules only).
fn t_ceiling(m: &QModule, vdeg: &[i64], s: usize) -> Option<i64> {
    Some(m.max_degree()? + s as i64 * vdeg.iter().copied().max().unwrap_or(0))
}

pub fn ext_koszul(m: &QModule, s_max: usize, t_max: i64) -> Result<KoszulExt> {
    if m.qs().is_empty() {
        return Err(Error::Config("Koszul complex needs at least one operator".into()));
    }
    if let Some(trunc) = m.truncation() {
        if t_max > trunc {
            return Err(Error::Uncertified { degree: t_max, certified: trunc });
        }
    }
    let kc = KoszulComplex::new(m);
    let t_min = t_floor(m, &kc.vdeg, 0).min(0);
    let mut jobs = Vec::new();
    for s in 0..=s_max {
        let lo = t_floor(m, &kc.vdeg, s);
        let hi = t_ceiling(m, &kc.vdeg, s).map_or(t_max, |c| c.min(t_max));
        for t in lo..=hi {
            jobs.push((s, t));
        }
    }
    let groups: BTreeMap<(usize, i64), (ChainGroup, Subquotient)> = jobs
        .par_iter()
        .filter_map(|&(s, t)| {
            let (src, _, d) = kc.differential(s, t);
            if src.dim == 0 {
                return None;
            }
            let cycles = d.kernel_basis();
            let boundaries = if s == 0 {
                Subspace::zero(m.p(), src.dim)
            } else {
                let (_, _, prev) = kc.differential(s - 1, t);
                prev.image_basis()
            };
            let h = Subquotient::new(&cycles, boundaries);
            (h.dim() > 0).then_some(((s, t), (src, h)))
        })
        .collect();
    let t_complete = m.truncation().is_none() && t_ceiling(m, &kc.vdeg, s_max).is_none_or(|c| c <= t_max);
    Ok(KoszulExt { p: m.p(), vars: kc.vars, vdeg: kc.vdeg, s_max, t_min, t_max, t_complete, groups })
}

impl KoszulExt {
    pub fn dim(&self, s: usize, t: i64) -> usize {
        self.groups.get(&(s, t)).map_or(0, |g| g.1.dim())
    }

    pub fn in_region(&self, s: usize, t: i64) -> bool {
        s <= self.s_max && (self.t_complete || t <= self.t_max)
    }

    pub fn dims(&self) -> BigradedDims {
        BigradedDims {
            dims: self.groups.iter().map(|(&(s, t), g)| ((s as i64, t), g.1.dim())).collect(),
            s_range: (0, self.s_max as i64),
            t_range: (self.t_min, self.t_max),
        }
    }

    pub fn classes(&self) -> Vec<ExtClass> {
        self.groups.iter().map(|(&(s, t), g)| ExtClass { s, t, dim: g.1.dim() }).collect()
    }

    /// Index of a Q_i / v_i in `vars`.
    pub fn var_position(&self, i: usize) -> Option<usize> {
        self.vars.iter().position(|&v| v == i)
    }

    /// Matrix of v_i: Ext^{s,t} → Ext^{s+1,t+d_i}; None if the target is outside the region.
    pub fn v_matrix(&self, i: usize, s: usize, t: i64) -> Option<FpMatrix> {
        let k = self.var_position(i)?;
        let (ts, tt) = (s + 1, t + self.vdeg[k]);
        if !self.in_region(ts, tt) {
            return None;
        }
        let p = self.p;
        let src = self.dim(s, t);
        let dst = self.dim(ts, tt);
        let mut a = FpMatrix::zeros(p, dst, src);
        if src == 0 || dst == 0 {
            return Some(a);
        }
        let (sg, sh) = &self.groups[&(s, t)];
        let (tg, th) = &self.groups[&(ts, tt)];
        for (c, rep) in sh.representatives().iter().enumerate() {
            let mut img = vec![0; tg.dim];
            for (alpha, _, off) in &sg.blocks {
                let mut beta = alpha.clone();
                beta[k] += 1;
                let (_, toff) = tg.offset_of(&beta).expect("v-shift of a nonzero block");
                let n = block_len(sg, *off);
                img[toff..toff + n].copy_from_slice(&rep[*off..*off + n]);
            }
            for (r, x) in th.coordinates(&img).into_iter().enumerate() {
                a.set(r, c, x);
            }
        }
        Some(a)
    }

    /// The P-module Ext(F_p, M) with its v-action.
    pub fn to_pmodule(&self) -> PModule {
        let mut pm = PModule::new(self.p, self.vdeg.clone(), (0, self.s_max as i64), (self.t_min, self.t_max));
        pm.t_complete = self.t_complete;
        for (&(s, t), g) in &self.groups {
            pm.set_dim(s as i64, t, g.1.dim());
        }
        for &(s, t) in self.groups.keys() {
            for (k, &i) in self.vars.iter().enumerate() {
                if let Some(a) = self.v_matrix(i, s, t) {
                    if a.rows() > 0 {
                        pm.set_action(k, (s as i64, t), a);
                    }
                }
            }
        }
        pm
    }
}

fn block_len(g: &ChainGroup, off: usize) -> usize {
    let idx = g.blocks.iter().position(|b| b.2 == off).unwrap();
    let next = g.blocks.get(idx + 1).map_or(g.dim, |b| b.2);
    next - off
}

/// Ext(F_p, M) as a P-module, over the v's dual to M's operators.
pub fn ext_koszul_module(m: &QModule, s_max: usize, t_max: i64) -> Result<PModule> {
    Ok(ext_koszul(m, s_max, t_max)?.to_pmodule())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::PrimeContext;
    use crate::qmodule::QSet;

    fn ctx() -> PrimeContext {
        PrimeContext::new(3).unwrap()
    }

    #[test]
    fn exponent_vector_counts() {
        assert_eq!(exponent_vectors(3, 2).len(), 6);
        assert_eq!(exponent_vectors(2, 0), vec![vec![0, 0]]);
    }

    #[test]
    fn residue_field_counts() {
        let f = QModule::trivial(ctx(), QSet::E2, 0);
        let e = ext_koszul(&f, 4, 80).unwrap();
        assert_eq!(e.dim(2, 22), 1);
        assert_eq!(e.dim(0, 0), 1);
        assert_eq!(e.dim(1, 1), 1);
        assert_eq!(e.dim(1, 2), 0);
        assert_eq!(e.v_matrix(1, 1, 17).unwrap(), FpMatrix::identity(3, 1));
    }

    #[test]
    fn free_module_sits_at_s_zero() {
        let e = QModule::free_on_one(ctx(), QSet::E2);
        let x = ext_koszul(&e, 4, 60).unwrap();
        assert_eq!(x.classes().len(), 1);
        assert_eq!((x.classes()[0].s, x.classes()[0].t), (0, -23));
    }

    #[test]
    fn d_squared() {
        let e = QModule::free_on_one(ctx(), QSet::E2);
        let kc = KoszulComplex::new(&e);
        for s in 0..3 {
            for t in -30..30 {
                assert!(kc.d_squared_vanishes(s, t));
            }
        }
    }
}
