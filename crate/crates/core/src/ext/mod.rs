//! Ext over the exterior algebras E(Q_j, Q_h) and E(2) (Koszul complex and
//! minimal resolutions) and over the polynomial algebra P on the dual v's.
//!
//! Chart convention: Ext^{s,t} with v_i at (1, d_i); a class of Ext(F_p, M)
//! represented by m ∈ M_d times a v-monomial of weight w sits at t = d + w.

pub mod checks;
pub mod koszul;
pub mod poly;
pub mod resolution;

pub use checks::*;
pub use koszul::{ext_koszul, ext_koszul_module, exponent_vectors, KoszulComplex, KoszulExt};
pub use poly::{ext_over_p2, gr_module, projective_dimension, FreePModule, PExt, PResolution, PolyPresentation};
pub use resolution::{ext_general, ExteriorResolution};

use crate::fp::FpMatrix;
use serde::Serialize;
use std::collections::BTreeMap;

/// Dimensions of a bigraded group, with the region in which they are claimed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BigradedDims {
    /// Nonzero entries only, keyed by (s, t).
    pub dims: BTreeMap<(i64, i64), usize>,
    pub s_range: (i64, i64),
    pub t_range: (i64, i64),
}

impl BigradedDims {
    pub fn get(&self, s: i64, t: i64) -> usize {
        self.dims.get(&(s, t)).copied().unwrap_or(0)
    }

    pub fn contains(&self, s: i64, t: i64) -> bool {
        (self.s_range.0..=self.s_range.1).contains(&s) && (self.t_range.0..=self.t_range.1).contains(&t)
    }

    /// Entries with s ≥ s_min and t − s odd.
    pub fn odd_classes(&self, s_min: i64) -> Vec<(i64, i64, usize)> {
        self.dims
            .iter()
            .filter(|(&(s, t), _)| s >= s_min && (t - s).rem_euclid(2) == 1)
            .map(|(&(s, t), &d)| (s, t, d))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    /// Same entries and region, with t moved by `dt`.
    pub fn shift_t(&self, dt: i64) -> BigradedDims {
        BigradedDims {
            dims: self.dims.iter().map(|(&(s, t), &d)| ((s, t + dt), d)).collect(),
            s_range: self.s_range,
            t_range: (self.t_range.0 + dt, self.t_range.1 + dt),
        }
    }

    /// TSV rows `s t dim tag`, ordered by s then t.
    pub fn to_tsv(&self, tag: &str) -> String {
        let mut out = String::from("s\tt\tdim\ttag\n");
        for (&(s, t), d) in &self.dims {
            out.push_str(&format!("{s}\t{t}\t{d}\t{tag}\n"));
        }
        out
    }
}

/// A bigraded module over F_p[v_k] (k indexing `vdeg`), known in a
/// rectangular region, with v_k: (s,t) → (s+1, t+vdeg[k]).
#[derive(Clone, Debug, PartialEq)]
pub struct PModule {
    pub p: u32,
    pub vdeg: Vec<i64>,
    pub s_range: (i64, i64),
    pub t_range: (i64, i64),
    /// Every group above `t_range.1` is known to vanish (for s in range).
    pub t_complete: bool,
    dims: BTreeMap<(i64, i64), usize>,
    actions: Vec<BTreeMap<(i64, i64), FpMatrix>>,
}

impl PModule {
    pub fn new(p: u32, vdeg: Vec<i64>, s_range: (i64, i64), t_range: (i64, i64)) -> Self {
        let n = vdeg.len();
        PModule { p, vdeg, s_range, t_range, t_complete: false, dims: BTreeMap::new(), actions: vec![BTreeMap::new(); n] }
    }

    /// F_p in bidegree (0, 0).
    pub fn residue_field(p: u32, vdeg: Vec<i64>, s_max: i64, t_max: i64) -> Self {
        let mut m = PModule::new(p, vdeg, (0, s_max), (0, t_max));
        m.set_dim(0, 0, 1);
        m
    }

    pub fn nvars(&self) -> usize {
        self.vdeg.len()
    }

    pub fn set_dim(&mut self, s: i64, t: i64, d: usize) {
        if d > 0 {
            self.dims.insert((s, t), d);
        } else {
            self.dims.remove(&(s, t));
        }
    }

    pub fn set_action(&mut self, k: usize, x: (i64, i64), a: FpMatrix) {
        self.actions[k].insert(x, a);
    }

    pub fn dim(&self, s: i64, t: i64) -> usize {
        self.dims.get(&(s, t)).copied().unwrap_or(0)
    }

    pub fn in_region(&self, s: i64, t: i64) -> bool {
        (self.s_range.0..=self.s_range.1).contains(&s)
            && t >= self.t_range.0
            && (self.t_complete || t <= self.t_range.1)
    }

    pub fn support(&self) -> impl Iterator<Item = (&(i64, i64), &usize)> {
        self.dims.iter()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn dims(&self) -> BigradedDims {
        BigradedDims { dims: self.dims.clone(), s_range: self.s_range, t_range: self.t_range }
    }

    /// v_k · x for x at bidegree (s, t); None when the target lies outside the region.
    pub fn act(&self, k: usize, (s, t): (i64, i64), x: &[u32]) -> Option<Vec<u32>> {
        let target = (s + 1, t + self.vdeg[k]);
        if !self.in_region(target.0, target.1) {
            return None;
        }
        let n = self.dim(target.0, target.1);
        Some(match self.actions[k].get(&(s, t)) {
            Some(a) => a.mul_vec(x),
            None => vec![0; n],
        })
    }

    /// v^α · x.
    pub fn act_monomial(&self, alpha: &[usize], mut x: (i64, i64), v: &[u32]) -> Option<Vec<u32>> {
        let mut v = v.to_vec();
        for (k, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                v = self.act(k, x, &v)?;
                x = (x.0 + 1, x.1 + self.vdeg[k]);
            }
        }
        Some(v)
    }

    /// Moves every bidegree by (ds, dt).
    pub fn shifted(&self, ds: i64, dt: i64) -> PModule {
        let mv = |(s, t): (i64, i64)| (s + ds, t + dt);
        PModule {
            p: self.p,
            vdeg: self.vdeg.clone(),
            s_range: (self.s_range.0 + ds, self.s_range.1 + ds),
            t_range: (self.t_range.0 + dt, self.t_range.1 + dt),
            t_complete: self.t_complete,
            dims: self.dims.iter().map(|(&x, &d)| (mv(x), d)).collect(),
            actions: self
                .actions
                .iter()
                .map(|a| a.iter().map(|(&x, m)| (mv(x), m.clone())).collect())
                .collect(),
        }
    }

    /// Elements killed by every v_k, at bidegrees where every v_k-target is
    /// inside the region: ((s, t), dimension).
    pub fn socle(&self) -> Vec<((i64, i64), usize)> {
        let mut out = Vec::new();
        for (&(s, t), &n) in &self.dims {
            let mut rows: Vec<Vec<u32>> = Vec::new();
            let mut all_known = true;
            for k in 0..self.nvars() {
                let target = (s + 1, t + self.vdeg[k]);
                if !self.in_region(target.0, target.1) {
                    all_known = false;
                    break;
                }
                if let Some(a) = self.actions[k].get(&(s, t)) {
                    rows.extend(a.row_vectors());
                }
            }
            if !all_known {
                continue;
            }
            let k = if rows.is_empty() {
                n
            } else {
                n - FpMatrix::from_rows(self.p, &rows).map_or(0, |m| m.rank())
            };
            if k > 0 {
                out.push(((s, t), k));
            }
        }
        out
    }

    /// v_k v_l = v_l v_k wherever both composites are defined.
    pub fn commutativity_defects(&self) -> Vec<(i64, i64)> {
        let mut bad = Vec::new();
        for (&(s, t), &n) in &self.dims {
            for k in 0..self.nvars() {
                for l in k + 1..self.nvars() {
                    for c in 0..n {
                        let mut e = vec![0; n];
                        e[c] = 1;
                        let kl = self.act(k, (s, t), &e).and_then(|v| self.act(l, (s + 1, t + self.vdeg[k]), &v));
                        let lk = self.act(l, (s, t), &e).and_then(|v| self.act(k, (s + 1, t + self.vdeg[l]), &v));
                        if let (Some(x), Some(y)) = (kl, lk) {
                            if x != y {
                                bad.push((s, t));
                            }
                        }
                    }
                }
            }
        }
        bad.dedup();
        bad
    }
}
