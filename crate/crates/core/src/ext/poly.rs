//! Minimal graded free resolutions over P = F_p[v_k], computed bidegree by
//! bidegree inside the region where the module is known, and Ext_P from them.
//!
//! Hom_P(F_u, B)^{(r,t)} = ⊕_g B_{x_g + (r,t)} for generators x_g of F_u. A
//! class in Ext_P^{u,(r,t)} is compared with exterior Ext at s = r + u.

use crate::error::{Error, Result};
use crate::fp::{FpMatrix, Subspace};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use super::koszul::exponent_vectors;
use super::PModule;

/// A free P-module ⊕ P·x_g.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FreePModule {
    pub vdeg: Vec<i64>,
    pub gens: Vec<(i64, i64)>,
}

impl FreePModule {
    pub fn new(vdeg: Vec<i64>) -> Self {
        FreePModule { vdeg, gens: Vec::new() }
    }

    /// Basis (g, α) of bidegree (s, t): |α| = s − s_g and Σ α_k d_k = t − t_g.
    pub fn basis(&self, s: i64, t: i64) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (g, &(sg, tg)) in self.gens.iter().enumerate() {
            if s < sg || t < tg {
                continue;
            }
            for alpha in exponent_vectors(self.vdeg.len(), (s - sg) as usize) {
                let w: i64 = alpha.iter().zip(&self.vdeg).map(|(&a, &d)| a as i64 * d).sum();
                if w == t - tg {
                    out.push((g, alpha));
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    fn mono_degree(&self, alpha: &[usize]) -> (i64, i64) {
        let w = alpha.iter().zip(&self.vdeg).map(|(&a, &d)| a as i64 * d).sum();
        (alpha.iter().sum::<usize>() as i64, w)
    }

    /// v^α · v where v lives at bidegree x.
    fn mul_monomial(&self, x: (i64, i64), v: &[u32], alpha: &[usize]) -> Vec<u32> {
        let (ds, dt) = self.mono_degree(alpha);
        let src = self.basis(x.0, x.1);
        let dst = self.basis(x.0 + ds, x.1 + dt);
        let mut out = vec![0; dst.len()];
        for ((g, beta), &c) in src.iter().zip(v) {
            if c == 0 {
                continue;
            }
            let gamma: Vec<usize> = beta.iter().zip(alpha).map(|(a, b)| a + b).collect();
            let j = dst.iter().position(|(h, d)| h == g && *d == gamma).expect("product basis element");
            out[j] = c;
        }
        out
    }
}

/// Truncated minimal resolution F_0 ← F_1 ← … of a P-module within its region.
#[derive(Clone, Debug)]
pub struct PResolution {
    pub module: PModule,
    pub stages: Vec<FreePModule>,
    /// images[u][g]: d(g) in A (u = 0) or F_{u−1}, at bidegree x_g.
    pub images: Vec<Vec<Vec<u32>>>,
}

impl PResolution {
    /// Resolves `a` through stage `length` at every bidegree of its region.
    pub fn new(a: &PModule, length: usize) -> Result<Self> {
        let p = a.p;
        let vdeg = a.vdeg.clone();
        let mut stages: Vec<FreePModule> = (0..=length).map(|_| FreePModule::new(vdeg.clone())).collect();
        let mut images: Vec<Vec<Vec<u32>>> = vec![Vec::new(); length + 1];
        for s in a.s_range.0..=a.s_range.1 {
            for t in a.t_range.0..=a.t_range.1 {
                for u in 0..=length {
                    // Z: kernel of d_{u−1} at (s,t), or all of A for u = 0.
                    let (zdim, z): (usize, Subspace) = if u == 0 {
                        let n = a.dim(s, t);
                        (n, Subspace::full(p, n))
                    } else {
                        let basis = stages[u - 1].basis(s, t);
                        if basis.is_empty() {
                            continue;
                        }
                        let d = map_matrix(a, &stages, &images, u - 1, (s, t))?;
                        (basis.len(), d.kernel_basis())
                    };
                    if z.dim() == 0 {
                        continue;
                    }
                    let existing = stages[u].basis(s, t);
                    let mut im = Subspace::zero(p, zdim);
                    if !existing.is_empty() {
                        let d = map_matrix(a, &stages, &images, u, (s, t))?;
                        im = d.image_basis();
                    }
                    for zv in z.basis() {
                        if !im.contains(zv) {
                            stages[u].gens.push((s, t));
                            images[u].push(zv.clone());
                            im = im.sum(&Subspace::spanned_by(p, zdim, vec![zv.clone()]));
                        }
                    }
                }
            }
        }
        Ok(PResolution { module: a.clone(), stages, images })
    }

    /// Length of the resolution found in the region (largest u with a generator).
    pub fn length(&self) -> usize {
        self.stages.iter().rposition(|f| f.rank() > 0).unwrap_or(0)
    }

    /// Largest generator s over all stages.
    pub fn max_generator_s(&self) -> i64 {
        self.stages.iter().flat_map(|f| f.gens.iter().map(|g| g.0)).max().unwrap_or(i64::MIN)
    }

    /// Every differential entry lies in (v_0, v_1, …): no generator of F_u
    /// hits a generator of F_{u−1} with a unit coefficient.
    pub fn is_minimal(&self) -> bool {
        for u in 1..self.stages.len() {
            for (g, img) in self.images[u].iter().enumerate() {
                let x = self.stages[u].gens[g];
                let basis = self.stages[u - 1].basis(x.0, x.1);
                for ((_, alpha), &c) in basis.iter().zip(img) {
                    if c != 0 && alpha.iter().all(|&a| a == 0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// d∘d = 0 and the image of d_0 is all of A, checked at every bidegree.
    pub fn is_exact_start(&self) -> Result<bool> {
        let a = &self.module;
        for s in a.s_range.0..=a.s_range.1 {
            for t in a.t_range.0..=a.t_range.1 {
                if a.dim(s, t) > 0 && map_matrix(a, &self.stages, &self.images, 0, (s, t))?.rank() != a.dim(s, t) {
                    return Ok(false);
                }
                for u in 1..self.stages.len() {
                    if self.stages[u].basis(s, t).is_empty() {
                        continue;
                    }
                    let d1 = map_matrix(a, &self.stages, &self.images, u, (s, t))?;
                    let d0 = map_matrix(a, &self.stages, &self.images, u - 1, (s, t))?;
                    if d0.rows() > 0 && !d0.mul(&d1).is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Matrix of d_u: F_u → (A or F_{u−1}) at bidegree x.
fn map_matrix(
    a: &PModule,
    stages: &[FreePModule],
    images: &[Vec<Vec<u32>>],
    u: usize,
    x: (i64, i64),
) -> Result<FpMatrix> {
    let p = a.p;
    let src = stages[u].basis(x.0, x.1);
    let rows = if u == 0 { a.dim(x.0, x.1) } else { stages[u - 1].basis(x.0, x.1).len() };
    let mut cols = Vec::with_capacity(src.len());
    for (g, alpha) in &src {
        let xg = stages[u].gens[*g];
        let col = if u == 0 {
            a.act_monomial(alpha, xg, &images[0][*g]).ok_or({
                Error::Uncertified { degree: x.1, certified: a.t_range.1 }
            })?
        } else {
            stages[u - 1].mul_monomial(xg, &images[u][*g], alpha)
        };
        cols.push(col);
    }
    Ok(FpMatrix::from_columns(p, rows, &cols))
}

/// Generators and first syzygies of a P-module.
#[derive(Clone, Debug, Serialize)]
pub struct PolyPresentation {
    pub generators: Vec<(i64, i64)>,
    /// Relation bidegrees, each with its image in the generators' free module.
    pub relations: Vec<((i64, i64), Vec<u32>)>,
    pub minimal: bool,
    pub s_range: (i64, i64),
    pub t_range: (i64, i64),
}

/// gr M taken to be Ext(F_p, M) with its v-action; presented by the first
/// two stages of its minimal resolution.
pub fn gr_module(a: &PModule) -> Result<(PolyPresentation, PResolution)> {
    let res = PResolution::new(a, 1)?;
    let pres = PolyPresentation {
        generators: res.stages[0].gens.clone(),
        relations: res.stages[1].gens.iter().cloned().zip(res.images[1].iter().cloned()).collect(),
        minimal: res.is_minimal(),
        s_range: a.s_range,
        t_range: a.t_range,
    };
    Ok((pres, res))
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthReport {
    pub projective_dimension: usize,
    /// Generator bidegrees of each stage.
    pub stage_ranks: Vec<usize>,
    pub socle: Vec<((i64, i64), usize)>,
    /// Generators sit at least two filtrations below the edge of the region.
    pub stable: bool,
    pub minimal: bool,
}

/// Projective dimension within the region and the socle (depth witness).
pub fn projective_dimension(a: &PModule) -> Result<DepthReport> {
    let res = PResolution::new(a, a.nvars() + 1)?;
    Ok(DepthReport {
        projective_dimension: res.length(),
        stage_ranks: res.stages.iter().map(FreePModule::rank).collect(),
        socle: a.socle(),
        stable: res.max_generator_s() <= a.s_range.1 - 2,
        minimal: res.is_minimal(),
    })
}

/// Ext_P^{u,(r,t)}(A, B), each entry flagged as certified or not.
#[derive(Clone, Debug, Serialize)]
pub struct PExt {
    /// (u, r, t) ↦ (dim, certified); zero certified entries omitted.
    pub entries: BTreeMap<(usize, i64, i64), (usize, bool)>,
    pub u_max: usize,
    /// Resolution of A stabilised inside its region.
    pub stable: bool,
}

impl PExt {
    pub fn get(&self, u: usize, r: i64, t: i64) -> Option<usize> {
        match self.entries.get(&(u, r, t)) {
            Some(&(d, true)) => Some(d),
            Some(&(_, false)) => None,
            None => Some(0),
        }
    }

    pub fn certified(&self, u: usize, r: i64, t: i64) -> bool {
        self.entries.get(&(u, r, t)).is_none_or(|e| e.1)
    }
}

fn hom_blocks(f: &FreePModule, b: &PModule, r: i64, t: i64) -> Option<Vec<usize>> {
    let mut offs = Vec::new();
    let mut acc = 0;
    for &(sg, tg) in &f.gens {
        let (s, tt) = (sg + r, tg + t);
        if !b.in_region(s, tt) && b.s_range.0 <= s && b.t_range.0 <= tt {
            return None;
        }
        offs.push(acc);
        acc += b.dim(s, tt);
    }
    offs.push(acc);
    Some(offs)
}

/// δ_u: Hom(F_u, B)^{(r,t)} → Hom(F_{u+1}, B)^{(r,t)}; None if uncertified.
fn hom_delta(res: &PResolution, b: &PModule, u: usize, r: i64, t: i64) -> Option<FpMatrix> {
    let src = &res.stages[u];
    let dst = &res.stages[u + 1];
    let so = hom_blocks(src, b, r, t)?;
    let dof = hom_blocks(dst, b, r, t)?;
    let mut a = FpMatrix::zeros(b.p, *dof.last().unwrap(), *so.last().unwrap());
    for (g2, img) in res.images[u + 1].iter().enumerate() {
        let x2 = dst.gens[g2];
        let basis = src.basis(x2.0, x2.1);
        for ((g, alpha), &c) in basis.iter().zip(img) {
            if c == 0 {
                continue;
            }
            let xg = src.gens[*g];
            let from = (xg.0 + r, xg.1 + t);
            let n = b.dim(from.0, from.1);
            for j in 0..n {
                let mut e = vec![0; n];
                e[j] = 1;
                let w = b.act_monomial(alpha, from, &e)?;
                for (row, &x) in w.iter().enumerate() {
                    if x != 0 {
                        a.add_to(dof[g2] + row, so[*g] + j, x * c % b.p);
                    }
                }
            }
        }
    }
    Some(a)
}

/// Ext_P^{u}(A, B) for u ≤ u_max from the truncated minimal resolution of A.
pub fn ext_over_p2(a: &PModule, b: &PModule, u_max: usize) -> Result<PExt> {
    if a.vdeg != b.vdeg || a.p != b.p {
        return Err(Error::Malformed("P-modules over different rings".into()));
    }
    let res = PResolution::new(a, u_max + 1)?;
    let stable = res.max_generator_s() <= a.s_range.1 - 2;
    let gens: Vec<(i64, i64)> = res.stages.iter().flat_map(|f| f.gens.iter().copied()).collect();
    if gens.is_empty() {
        return Ok(PExt { entries: BTreeMap::new(), u_max, stable });
    }
    let (smin, smax) = (gens.iter().map(|g| g.0).min().unwrap(), gens.iter().map(|g| g.0).max().unwrap());
    let (tmin, tmax) = (gens.iter().map(|g| g.1).min().unwrap(), gens.iter().map(|g| g.1).max().unwrap());
    let mut jobs = Vec::new();
    for u in 0..=u_max {
        for r in b.s_range.0 - smax..=b.s_range.1 - smin {
            for t in b.t_range.0 - tmax..=b.t_range.1 - tmin {
                jobs.push((u, r, t));
            }
        }
    }
    let entries: BTreeMap<(usize, i64, i64), (usize, bool)> = jobs
        .par_iter()
        .filter_map(|&(u, r, t)| {
            let blocks = hom_blocks(&res.stages[u], b, r, t);
            if blocks.as_ref().is_some_and(|o| *o.last().unwrap() == 0) {
                return None;
            }
            let dim = (|| {
                let h = *hom_blocks(&res.stages[u], b, r, t)?.last().unwrap();
                let z = h - hom_delta(&res, b, u, r, t)?.rank();
                let bnd = if u == 0 { 0 } else { hom_delta(&res, b, u - 1, r, t)?.rank() };
                Some(z - bnd)
            })();
            match dim {
                Some(0) => None,
                Some(d) => Some(((u, r, t), (d, true))),
                None => Some(((u, r, t), (0, false))),
            }
        })
        .collect();
    Ok(PExt { entries, u_max, stable })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vdeg() -> Vec<i64> {
        vec![1, 5, 17]
    }

    /// The free module P itself, known for s ≤ s_max.
    fn free_p(s_max: i64) -> PModule {
        let f = FreePModule { vdeg: vdeg(), gens: vec![(0, 0)] };
        let t_max = s_max * 17;
        let mut m = PModule::new(3, vdeg(), (0, s_max), (0, t_max));
        for s in 0..=s_max {
            for t in 0..=t_max {
                m.set_dim(s, t, f.basis(s, t).len());
            }
        }
        for s in 0..s_max {
            for t in 0..=t_max {
                let src = f.basis(s, t);
                if src.is_empty() {
                    continue;
                }
                for k in 0..3 {
                    let mut alpha = vec![0; 3];
                    alpha[k] = 1;
                    let cols: Vec<Vec<u32>> = (0..src.len())
                        .map(|c| {
                            let mut e = vec![0; src.len()];
                            e[c] = 1;
                            f.mul_monomial((s, t), &e, &alpha)
                        })
                        .collect();
                    let rows = f.basis(s + 1, t + vdeg()[k]).len();
                    m.set_action(k, (s, t), FpMatrix::from_columns(3, rows, &cols));
                }
            }
        }
        m
    }

    #[test]
    fn free_module_has_pd_zero() {
        let r = projective_dimension(&free_p(6)).unwrap();
        assert_eq!(r.projective_dimension, 0);
        assert_eq!(r.stage_ranks[0], 1);
        assert!(r.socle.is_empty());
    }

    #[test]
    fn residue_field_is_koszul() {
        let k = PModule::residue_field(3, vdeg(), 6, 102);
        let r = projective_dimension(&k).unwrap();
        assert_eq!(r.projective_dimension, 3);
        assert_eq!(&r.stage_ranks[..4], &[1, 3, 3, 1]);
        assert!(r.minimal);
        let e = ext_over_p2(&k, &k, 3).unwrap();
        let lines: Vec<usize> = (0..=3)
            .map(|u| e.entries.iter().filter(|(k, v)| k.0 == u && v.1).map(|(_, v)| v.0).sum())
            .collect();
        assert_eq!(lines, vec![1, 3, 3, 1]);
        assert_eq!(e.get(3, -3, -23), Some(1));
    }

    #[test]
    fn free_source_is_concentrated_at_u_zero() {
        let e = ext_over_p2(&free_p(6), &PModule::residue_field(3, vdeg(), 6, 102), 2).unwrap();
        assert_eq!(e.get(0, 0, 0), Some(1));
        assert!(e.entries.iter().all(|(k, v)| k.0 == 0 || v.0 == 0));
    }
}
