//! Minimal free resolutions over an exterior algebra and Ext(M, N) from them.
//!
//! A free module is a sum of copies of E on generators g of degree e_g; its
//! cells Q_S g are ordered as in [`QModule::free_on_one`]. Over E(Q_0,Q_1,Q_2)
//! the subset degrees are distinct, so each generator has at most one cell
//! per degree.

use crate::error::{Error, Result};
use crate::fp::{quotient_basis, FpMatrix, Subspace};
use crate::monomial::PrimeContext;
use crate::qmodule::{direct_sum, QModule, QSet};
use std::collections::BTreeMap;

use super::BigradedDims;

#[derive(Clone, Debug)]
pub struct FreeEModule {
    pub gens: Vec<i64>,
    pub module: QModule,
    ix: Vec<usize>,
    /// Per degree: the (generator, subset mask) of each basis vector.
    cells: BTreeMap<i64, Vec<(usize, u32)>>,
}

impl FreeEModule {
    pub fn new(ctx: &PrimeContext, qs: QSet, gens: Vec<i64>) -> Result<Self> {
        let ix = qs.indices();
        let one = QModule::free_on_one(*ctx, qs);
        let module = if gens.is_empty() {
            QModule::zero(*ctx, qs)
        } else {
            let copies: Vec<QModule> = gens.iter().map(|&e| one.shifted(e)).collect();
            direct_sum(&copies.iter().collect::<Vec<_>>())?
        };
        let mut cells: BTreeMap<i64, Vec<(usize, u32)>> = BTreeMap::new();
        for (g, &e) in gens.iter().enumerate() {
            for mask in 0u32..(1 << ix.len()) {
                let d = e - Self::mask_drop(ctx, &ix, mask);
                cells.entry(d).or_default().push((g, mask));
            }
        }
        for v in cells.values_mut() {
            v.sort_by_key(|c| c.0);
        }
        Ok(FreeEModule { gens, module, ix, cells })
    }

    fn mask_drop(ctx: &PrimeContext, ix: &[usize], mask: u32) -> i64 {
        (0..ix.len()).filter(|b| mask >> b & 1 == 1).map(|b| ctx.q_drop(ix[b])).sum()
    }

    pub fn word(&self, mask: u32) -> Vec<usize> {
        (0..self.ix.len()).filter(|b| mask >> b & 1 == 1).map(|b| self.ix[b]).collect()
    }

    /// (generator, mask, coefficient) terms of a vector in degree d.
    pub fn decompose(&self, d: i64, v: &[u32]) -> Vec<(usize, u32, u32)> {
        let Some(cells) = self.cells.get(&d) else { return Vec::new() };
        cells
            .iter()
            .zip(v)
            .filter(|(_, &c)| c != 0)
            .map(|(&(g, mask), &c)| (g, mask, c))
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }
}

/// Minimal resolution P_0 ← P_1 ← … of a finite module.
#[derive(Clone, Debug)]
pub struct ExteriorResolution {
    pub module: QModule,
    pub stages: Vec<FreeEModule>,
    /// images[u][g]: d(g) in the target (M for u = 0, P_{u−1} otherwise), at degree gens[g].
    pub images: Vec<Vec<Vec<u32>>>,
}

fn differential_at(target: &QModule, stage: &FreeEModule, images: &[Vec<u32>], d: i64) -> FpMatrix {
    let cells = stage.cells.get(&d).cloned().unwrap_or_default();
    let cols: Vec<Vec<u32>> = cells
        .iter()
        .map(|&(g, mask)| target.apply_word(&stage.word(mask), stage.gens[g], &images[g]).1)
        .collect();
    FpMatrix::from_columns(target.p(), target.dim(d), &cols)
}

/// Minimal generators of a submodule Z (given per degree) of `ambient`.
fn generators_of(ambient: &QModule, z: &BTreeMap<i64, Subspace>) -> Result<Vec<(i64, Vec<u32>)>> {
    let mut out = Vec::new();
    for (&d, zd) in z.iter().rev() {
        if zd.dim() == 0 {
            continue;
        }
        let mut decomposable = Vec::new();
        for i in ambient.qs().indices() {
            if let Some(src) = z.get(&(d + ambient.qdrop(i))) {
                for v in src.basis() {
                    decomposable.push(ambient.apply(i, d + ambient.qdrop(i), v));
                }
            }
        }
        let dec = Subspace::spanned_by(ambient.p(), ambient.dim(d), decomposable);
        // complement of dec inside zd, in zd's own coordinates
        let coords: Vec<Vec<u32>> = dec.basis().iter().map(|v| zd.coordinates(v)).collect();
        let dec_in_z = Subspace::spanned_by(ambient.p(), zd.dim(), coords);
        for c in quotient_basis(zd.dim(), &dec_in_z)? {
            let mut v = vec![0; ambient.dim(d)];
            for (k, &x) in c.iter().enumerate() {
                if x != 0 {
                    crate::fp::axpy(ambient.p(), &mut v, x, &zd.basis()[k]);
                }
            }
            out.push((d, v));
        }
    }
    Ok(out)
}

impl ExteriorResolution {
    /// Resolves a finite module through stage `length`.
    pub fn new(m: &QModule, length: usize) -> Result<Self> {
        if m.truncation().is_some() {
            return Err(Error::Config("resolutions need a finite, untruncated module".into()));
        }
        let ctx = *m.ctx();
        let qs = m.qs();
        let mut stages: Vec<FreeEModule> = Vec::new();
        let mut images: Vec<Vec<Vec<u32>>> = Vec::new();
        let full: BTreeMap<i64, Subspace> = m.degrees().map(|d| (d, Subspace::full(m.p(), m.dim(d)))).collect();
        let mut z = full;
        for u in 0..=length {
            let target = if u == 0 { m } else { &stages[u - 1].module };
            let gens = generators_of(target, &z)?;
            let stage = FreeEModule::new(&ctx, qs, gens.iter().map(|g| g.0).collect())?;
            let imgs: Vec<Vec<u32>> = gens.into_iter().map(|g| g.1).collect();
            let mut kernel = BTreeMap::new();
            for d in stage.module.degrees() {
                let a = differential_at(target, &stage, &imgs, d);
                let k = if target.dim(d) == 0 {
                    Subspace::full(m.p(), stage.module.dim(d))
                } else {
                    a.kernel_basis()
                };
                if k.dim() > 0 {
                    kernel.insert(d, k);
                }
            }
            z = kernel;
            stages.push(stage);
            images.push(imgs);
        }
        Ok(ExteriorResolution { module: m.clone(), stages, images })
    }

    /// d∘d = 0 between consecutive stages.
    pub fn is_complex(&self) -> bool {
        (1..self.stages.len()).all(|u| {
            self.images[u]
                .iter()
                .enumerate()
                .all(|(g, img)| self.apply_d(u - 1, self.stages[u].gens[g], img).iter().all(|&x| x == 0))
        })
    }

    /// d_u of a vector of P_u at degree e.
    pub fn apply_d(&self, u: usize, e: i64, v: &[u32]) -> Vec<u32> {
        let stage = &self.stages[u];
        let target = if u == 0 { &self.module } else { &self.stages[u - 1].module };
        let mut out = vec![0; target.dim(e)];
        for (g, mask, c) in stage.decompose(e, v) {
            let (_, w) = target.apply_word(&stage.word(mask), stage.gens[g], &self.images[u][g]);
            crate::fp::axpy(target.p(), &mut out, c, &w);
        }
        out
    }
}

/// Ext^{s,t}(M, N) for s ≤ s_max and t ≤ t_max, where a class of degree t
/// raises internal degree by t. M must be finite; a truncated N shrinks the
/// certified t-range.
pub fn ext_general(m: &QModule, n: &QModule, s_max: usize, t_max: i64) -> Result<BigradedDims> {
    if m.qs() != n.qs() {
        return Err(Error::Malformed(format!("Ext over {} against a module over {}", m.qs(), n.qs())));
    }
    let res = ExteriorResolution::new(m, s_max + 1)?;
    let p = m.p();
    let gmax = |u: usize| res.stages[u].gens.iter().copied().max();
    let gmin = |u: usize| res.stages[u].gens.iter().copied().min();
    let all_max = (0..=s_max + 1).filter_map(gmax).max().unwrap_or(0);
    let all_min = (0..=s_max + 1).filter_map(gmin).min().unwrap_or(0);
    let (nlo, nhi) = (n.min_degree().unwrap_or(0), n.max_degree().unwrap_or(0));
    let mut t_hi = t_max.min(nhi - all_min);
    if let Some(tr) = n.truncation() {
        t_hi = t_hi.min(tr - all_max);
    }
    let t_lo = nlo - all_max;

    // Hom_u^t = ⊕_g N_{e_g + t}; δ_u: Hom_u^t → Hom_{u+1}^t.
    let hom_dim = |u: usize, t: i64| -> usize { res.stages[u].gens.iter().map(|&e| n.dim(e + t)).sum() };
    let delta = |u: usize, t: i64| -> FpMatrix {
        let src = &res.stages[u];
        let dst = &res.stages[u + 1];
        let mut src_off = Vec::new();
        let mut acc = 0;
        for &e in &src.gens {
            src_off.push(acc);
            acc += n.dim(e + t);
        }
        let cols = acc;
        let mut rows = 0;
        let mut dst_off = Vec::new();
        for &e in &dst.gens {
            dst_off.push(rows);
            rows += n.dim(e + t);
        }
        let mut a = FpMatrix::zeros(p, rows, cols);
        for (g2, img) in res.images[u + 1].iter().enumerate() {
            let e2 = dst.gens[g2];
            for (g, mask, c) in src.decompose(e2, img) {
                let word = src.word(mask);
                let from = src.gens[g] + t;
                for j in 0..n.dim(from) {
                    let mut basis = vec![0; n.dim(from)];
                    basis[j] = 1;
                    let (_, w) = n.apply_word(&word, from, &basis);
                    for (r, &x) in w.iter().enumerate() {
                        if x != 0 {
                            a.add_to(dst_off[g2] + r, src_off[g] + j, x * c % p);
                        }
                    }
                }
            }
        }
        a
    };
    let mut dims = BTreeMap::new();
    for s in 0..=s_max {
        for t in t_lo..=t_hi {
            let h = hom_dim(s, t);
            if h == 0 {
                continue;
            }
            let z = h - delta(s, t).rank();
            let b = if s == 0 { 0 } else { delta(s - 1, t).rank() };
            if z > b {
                dims.insert((s as i64, t), z - b);
            }
        }
    }
    Ok(BigradedDims { dims, s_range: (0, s_max as i64), t_range: (t_lo, t_hi) })
}
