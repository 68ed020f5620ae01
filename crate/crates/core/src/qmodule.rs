//! Graded modules over exterior algebras on Q_0, Q_1, Q_2.
//!
//! Q_i lowers internal degree by d_i = 2p^i − 1. Action matrices are stored
//! per source degree; a missing matrix means the action is zero there.

use crate::error::{Error, Result};
use crate::fp::{complement_indices, neg, FpMatrix, Subspace};
use crate::monomial::{sort_canonical, AlgebraSpec, Monomial, PrimeContext};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

/// Which of Q_0, Q_1, Q_2 act.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QSet(u8);

impl QSet {
    pub const E2: QSet = QSet(0b111);
    pub const NONE: QSet = QSet(0);

    /// Q_0, …, Q_n (capped at Q_2).
    pub fn upto(n: usize) -> QSet {
        QSet(((1u16 << (n.min(2) + 1)) - 1) as u8)
    }

    pub fn single(i: usize) -> QSet {
        assert!(i < 3);
        QSet(1 << i)
    }

    pub fn pair(j: usize, h: usize) -> QSet {
        assert!(j < 3 && h < 3 && j != h);
        QSet(1 << j | 1 << h)
    }

    pub fn from_indices(ix: &[usize]) -> Result<QSet> {
        let mut m = 0u8;
        for &i in ix {
            if i > 2 {
                return Err(Error::Config(format!("Q{i} is out of range")));
            }
            m |= 1 << i;
        }
        Ok(QSet(m))
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 3 && self.0 >> i & 1 == 1
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..3).filter(|&i| self.contains(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(&self, other: QSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(&self, other: QSet) -> QSet {
        QSet(self.0 & other.0)
    }

    /// The complementary index inside {0,1,2}, for pairs.
    pub fn complement(&self) -> QSet {
        QSet(!self.0 & 0b111)
    }
}

impl fmt::Display for QSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.indices().iter().map(|i| format!("Q{i}")).collect();
        write!(f, "E({})", names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Mono(Monomial),
    Text(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Mono(m) => write!(f, "{m}"),
            Label::Text(s) => write!(f, "{s}"),
        }
    }
}

/// A homogeneous element: a coordinate vector in one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub degree: i64,
    pub coeffs: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QModule {
    ctx: PrimeContext,
    qs: QSet,
    basis: BTreeMap<i64, Vec<Label>>,
    actions: [BTreeMap<i64, FpMatrix>; 3],
    truncation: Option<i64>,
}

impl QModule {
    /// Validating constructor. Matrices are keyed by source degree and have
    /// shape dim(d − d_i) × dim(d).
    pub fn new(
        ctx: PrimeContext,
        qs: QSet,
        basis: BTreeMap<i64, Vec<Label>>,
        actions: [BTreeMap<i64, FpMatrix>; 3],
    ) -> Result<Self> {
        let basis: BTreeMap<i64, Vec<Label>> =
            basis.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        let mut m = QModule { ctx, qs, basis, actions, truncation: None };
        for i in 0..3 {
            if !qs.contains(i) && !m.actions[i].is_empty() {
                return Err(Error::Malformed(format!("action given for undefined Q{i}")));
            }
            let di = ctx.q_drop(i);
            let mut cleaned = BTreeMap::new();
            for (&d, a) in &m.actions[i] {
                if a.prime() != ctx.p() {
                    return Err(Error::Malformed("matrix over the wrong prime".into()));
                }
                if a.cols() != m.dim(d) || a.rows() != m.dim(d - di) {
                    return Err(Error::Malformed(format!(
                        "Q{i} at degree {d}: matrix is {}x{}, expected {}x{}",
                        a.rows(),
                        a.cols(),
                        m.dim(d - di),
                        m.dim(d)
                    )));
                }
                if !a.is_zero() {
                    cleaned.insert(d, a.clone());
                }
            }
            m.actions[i] = cleaned;
        }
        Ok(m)
    }

    pub fn zero(ctx: PrimeContext, qs: QSet) -> Self {
        QModule { ctx, qs, basis: BTreeMap::new(), actions: Default::default(), truncation: None }
    }

    /// F_p concentrated in one degree.
    pub fn trivial(ctx: PrimeContext, qs: QSet, degree: i64) -> Self {
        let mut basis = BTreeMap::new();
        basis.insert(degree, vec![Label::Mono(Monomial::unit())]);
        QModule { ctx, qs, basis, actions: Default::default(), truncation: None }
    }

    /// Free module on one generator in degree 0, basis Q_S g for S ⊆ qs.
    pub fn free_on_one(ctx: PrimeContext, qs: QSet) -> Self {
        let ix = qs.indices();
        let mut cells: Vec<(i64, u32, String)> = Vec::new();
        for mask in 0u32..(1 << ix.len()) {
            let deg: i64 = (0..ix.len()).filter(|b| mask >> b & 1 == 1).map(|b| -ctx.q_drop(ix[b])).sum();
            let name: String = (0..ix.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| format!("Q{}", ix[b]))
                .collect::<Vec<_>>()
                .join("");
            cells.push((deg, mask, if name.is_empty() { "g".into() } else { format!("{name}g") }));
        }
        cells.sort();
        let mut basis: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
        let mut pos: HashMap<u32, (i64, usize)> = HashMap::new();
        for (d, mask, name) in &cells {
            let v = basis.entry(*d).or_default();
            pos.insert(*mask, (*d, v.len()));
            v.push(Label::Text(name.clone()));
        }
        let mut m = QModule { ctx, qs, basis, actions: Default::default(), truncation: None };
        for (b, &i) in ix.iter().enumerate() {
            for (_, mask, _) in &cells {
                if mask >> b & 1 == 1 {
                    continue;
                }
                let (d, c) = pos[mask];
                let (td, r) = pos[&(mask | 1 << b)];
                // Q_i Q_S = (−1)^{#{s ∈ S : s < i}} Q_{S ∪ i}
                let sign = (mask & ((1 << b) - 1)).count_ones() % 2;
                let (rows, cols) = (m.dim(td), m.dim(d));
                let a = m.actions[i].entry(d).or_insert_with(|| FpMatrix::zeros(ctx.p(), rows, cols));
                a.set(r, c, if sign == 0 { 1 } else { ctx.p() - 1 });
            }
        }
        m
    }

    pub fn ctx(&self) -> &PrimeContext {
        &self.ctx
    }
    pub fn qs(&self) -> QSet {
        self.qs
    }
    pub fn p(&self) -> u32 {
        self.ctx.p()
    }

    /// When set, this module is the degree ≤ D truncation of a larger module.
    pub fn truncation(&self) -> Option<i64> {
        self.truncation
    }

    pub fn with_truncation(mut self, d: Option<i64>) -> Self {
        self.truncation = d;
        self
    }

    pub fn dim(&self, d: i64) -> usize {
        self.basis.get(&d).map_or(0, |v| v.len())
    }

    pub fn total_dim(&self) -> usize {
        self.basis.values().map(|v| v.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Degrees with nonzero dimension, ascending.
    pub fn degrees(&self) -> impl DoubleEndedIterator<Item = i64> + '_ {
        self.basis.keys().copied()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.basis.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.basis.keys().next_back().copied()
    }

    pub fn labels(&self, d: i64) -> &[Label] {
        self.basis.get(&d).map_or(&[], |v| v.as_slice())
    }

    pub fn basis_map(&self) -> &BTreeMap<i64, Vec<Label>> {
        &self.basis
    }

    /// Position of a monomial label.
    pub fn find_monomial(&self, m: &Monomial) -> Option<(i64, usize)> {
        let d = m.degree(&self.ctx) as i64;
        self.labels(d).iter().position(|l| matches!(l, Label::Mono(x) if x == m)).map(|i| (d, i))
    }

    pub fn monomial_element(&self, m: &Monomial) -> Option<Element> {
        let (d, i) = self.find_monomial(m)?;
        let mut coeffs = vec![0; self.dim(d)];
        coeffs[i] = 1;
        Some(Element { degree: d, coeffs })
    }

    pub fn basis_element(&self, d: i64, i: usize) -> Element {
        let mut coeffs = vec![0; self.dim(d)];
        coeffs[i] = 1;
        Element { degree: d, coeffs }
    }

    pub fn qdrop(&self, i: usize) -> i64 {
        self.ctx.q_drop(i)
    }

    /// Stored action of Q_i out of degree d (`None` = zero).
    pub fn action(&self, i: usize, d: i64) -> Option<&FpMatrix> {
        self.actions[i].get(&d)
    }

    pub fn action_matrix(&self, i: usize, d: i64) -> FpMatrix {
        self.action(i, d)
            .cloned()
            .unwrap_or_else(|| FpMatrix::zeros(self.p(), self.dim(d - self.qdrop(i)), self.dim(d)))
    }

    pub fn actions_of(&self, i: usize) -> &BTreeMap<i64, FpMatrix> {
        &self.actions[i]
    }

    /// Q_i applied to a vector in degree d.
    pub fn apply(&self, i: usize, d: i64, v: &[u32]) -> Vec<u32> {
        match self.action(i, d) {
            Some(a) => a.mul_vec(v),
            None => vec![0; self.dim(d - self.qdrop(i))],
        }
    }

    /// Q_{s_1} Q_{s_2} ⋯ Q_{s_k} v, applying the rightmost operator first.
    pub fn apply_word(&self, word: &[usize], d: i64, v: &[u32]) -> (i64, Vec<u32>) {
        let mut cur = v.to_vec();
        let mut deg = d;
        for &i in word.iter().rev() {
            cur = self.apply(i, deg, &cur);
            deg -= self.qdrop(i);
        }
        (deg, cur)
    }

    /// Matrix of a word Q_{s_1} ⋯ Q_{s_k} out of degree d.
    pub fn word_matrix(&self, word: &[usize], d: i64) -> FpMatrix {
        let mut m = FpMatrix::identity(self.p(), self.dim(d));
        let mut deg = d;
        for &i in word.iter().rev() {
            m = self.action_matrix(i, deg).mul(&m);
            deg -= self.qdrop(i);
        }
        m
    }

    /// Violations of Q_i² = 0 and Q_iQ_j + Q_jQ_i = 0, one line each.
    pub fn verify_relations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ix = self.qs.indices();
        for &d in self.basis.keys() {
            for (a, &i) in ix.iter().enumerate() {
                for &j in &ix[a..] {
                    let lhs = self
                        .action_matrix(i, d - self.qdrop(j))
                        .mul(&self.action_matrix(j, d));
                    let total = if i == j {
                        lhs
                    } else {
                        lhs.add(&self.action_matrix(j, d - self.qdrop(i)).mul(&self.action_matrix(i, d)))
                    };
                    if !total.is_zero() {
                        if i == j {
                            out.push(format!("Q{i}^2 != 0 at degree {d}"));
                        } else {
                            out.push(format!("Q{i}Q{j} + Q{j}Q{i} != 0 at degree {d}"));
                        }
                    }
                }
            }
        }
        out
    }

    /// Forget the action of the Q_i outside `qs`.
    pub fn restrict(&self, qs: QSet) -> Result<QModule> {
        if !qs.is_subset(self.qs) {
            return Err(Error::Config(format!("cannot restrict {} to {qs}", self.qs)));
        }
        let mut m = self.clone();
        m.qs = qs;
        for i in 0..3 {
            if !qs.contains(i) {
                m.actions[i].clear();
            }
        }
        Ok(m)
    }

    /// Σ^n M for even n.
    pub fn suspend(&self, n: i64) -> Result<QModule> {
        if n % 2 != 0 {
            return Err(Error::Config(format!("odd suspension by {n} is not supported")));
        }
        Ok(self.shifted(n))
    }

    /// Relabel every degree by +n. Odd n is allowed here; callers own the
    /// sign bookkeeping.
    pub(crate) fn shifted(&self, n: i64) -> QModule {
        QModule {
            ctx: self.ctx,
            qs: self.qs,
            basis: self.basis.iter().map(|(&d, v)| (d + n, v.clone())).collect(),
            actions: self
                .actions
                .clone()
                .map(|a| a.into_iter().map(|(d, m)| (d + n, m)).collect()),
            truncation: self.truncation.map(|t| t + n),
        }
    }

    /// The submodule of degrees ≤ max (a submodule since Q lowers degree).
    pub fn truncate(&self, max: i64) -> QModule {
        let mut m = self.clone();
        m.basis.retain(|&d, _| d <= max);
        for a in &mut m.actions {
            a.retain(|&d, _| d <= max);
        }
        if self.max_degree().is_some_and(|top| top > max) || self.truncation.is_some() {
            m.truncation = Some(self.truncation.map_or(max, |t| t.min(max)));
        }
        m
    }

    /// Linear dual with (Q_i f)(x) = f(Q_i x); degrees negate.
    pub fn dual(&self) -> QModule {
        let basis = self
            .basis
            .iter()
            .map(|(&d, v)| (-d, v.iter().map(|l| Label::Text(format!("{l}*"))).collect()))
            .collect();
        let mut actions: [BTreeMap<i64, FpMatrix>; 3] = Default::default();
        for i in 0..3 {
            for (&d, a) in &self.actions[i] {
                // Q_i: M_d → M_{d−d_i} dualises to M*_{−(d−d_i)} → M*_{−d}.
                actions[i].insert(-(d - self.qdrop(i)), a.transpose());
            }
        }
        QModule { ctx: self.ctx, qs: self.qs, basis, actions, truncation: None }
    }

    /// Add 1 to one entry of one action matrix. Used by fault-injection tests.
    pub fn perturbed(&self, i: usize, d: i64, r: usize, c: usize) -> QModule {
        let mut m = self.clone();
        let mut a = m.action_matrix(i, d);
        a.add_to(r, c, 1);
        m.actions[i].insert(d, a);
        m
    }
}

fn same_shape(ms: &[&QModule]) -> Result<(PrimeContext, QSet)> {
    let first = ms.first().ok_or_else(|| Error::Malformed("empty module list".into()))?;
    for m in ms {
        if m.ctx != first.ctx {
            return Err(Error::Malformed("modules over different primes".into()));
        }
        if m.qs != first.qs {
            return Err(Error::Malformed(format!("mismatched algebras {} and {}", first.qs, m.qs)));
        }
    }
    Ok((first.ctx, first.qs))
}

/// Block sum; bases are concatenated in the given order.
pub fn direct_sum(ms: &[&QModule]) -> Result<QModule> {
    let (ctx, qs) = same_shape(ms)?;
    let mut basis: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
    let mut offsets: Vec<HashMap<i64, usize>> = Vec::new();
    for m in ms {
        let mut off = HashMap::new();
        for (&d, v) in &m.basis {
            let e = basis.entry(d).or_default();
            off.insert(d, e.len());
            e.extend(v.iter().cloned());
        }
        offsets.push(off);
    }
    let mut out = QModule { ctx, qs, basis, actions: Default::default(), truncation: None };
    for i in qs.indices() {
        let di = ctx.q_drop(i);
        for (k, m) in ms.iter().enumerate() {
            for (&d, a) in &m.actions[i] {
                let (rows, cols) = (out.dim(d - di), out.dim(d));
                let (r0, c0) = (offsets[k][&(d - di)], offsets[k][&d]);
                let big = out.actions[i].entry(d).or_insert_with(|| FpMatrix::zeros(ctx.p(), rows, cols));
                for r in 0..a.rows() {
                    for c in 0..a.cols() {
                        big.set(r0 + r, c0 + c, a.get(r, c));
                    }
                }
            }
        }
    }
    out.truncation = ms.iter().filter_map(|m| m.truncation).min();
    Ok(out)
}

/// M ⊗ N with Q_i(x⊗y) = Q_i x ⊗ y + (−1)^{|x|} x ⊗ Q_i y. The basis in each
/// degree lists blocks M_a ⊗ N_b by ascending a, row-major inside a block.
pub fn tensor(m: &QModule, n: &QModule) -> Result<QModule> {
    let (ctx, qs) = same_shape(&[m, n])?;
    let p = ctx.p();
    let mut basis: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
    let mut offset: HashMap<(i64, i64), usize> = HashMap::new();
    for (&a, xs) in &m.basis {
        for (&b, ys) in &n.basis {
            let e = basis.entry(a + b).or_default();
            offset.insert((a, b), e.len());
            for x in xs {
                for y in ys {
                    e.push(Label::Text(format!("{x} ⊗ {y}")));
                }
            }
        }
    }
    let mut out = QModule { ctx, qs, basis, actions: Default::default(), truncation: None };
    for i in qs.indices() {
        let di = ctx.q_drop(i);
        for &a in m.basis.keys() {
            for &b in n.basis.keys() {
                let d = a + b;
                let (dm, dn) = (m.dim(a), n.dim(b));
                let src = offset[&(a, b)];
                let rows = out.dim(d - di);
                let cols = out.dim(d);
                if let Some(qa) = m.action(i, a) {
                    let dst = offset[&(a - di, b)];
                    let big = out.actions[i].entry(d).or_insert_with(|| FpMatrix::zeros(p, rows, cols));
                    for r in 0..qa.rows() {
                        for c in 0..qa.cols() {
                            let v = qa.get(r, c);
                            if v != 0 {
                                for y in 0..dn {
                                    big.add_to(dst + r * dn + y, src + c * dn + y, v);
                                }
                            }
                        }
                    }
                }
                if let Some(qb) = n.action(i, b) {
                    let dst = offset[&(a, b - di)];
                    let dn2 = n.dim(b - di);
                    let big = out.actions[i].entry(d).or_insert_with(|| FpMatrix::zeros(p, rows, cols));
                    for x in 0..dm {
                        for r in 0..qb.rows() {
                            for c in 0..qb.cols() {
                                let v = qb.get(r, c);
                                if v != 0 {
                                    let v = if a.rem_euclid(2) == 1 { neg(p, v) } else { v };
                                    big.add_to(dst + x * dn2 + r, src + x * dn + c, v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for a in &mut out.actions {
        a.retain(|_, mat| !mat.is_zero());
    }
    out.truncation = match (m.truncation, n.truncation) {
        (None, None) => None,
        (Some(t), None) => Some(t + n.min_degree().unwrap_or(0)),
        (None, Some(t)) => Some(t + m.min_degree().unwrap_or(0)),
        (Some(s), Some(t)) => Some((s + n.min_degree().unwrap_or(0)).min(t + m.min_degree().unwrap_or(0))),
    };
    Ok(out)
}

/// Formal sum of monomials with coefficients in F_p.
pub type Combination = Vec<(Monomial, u32)>;

/// Q_i on a monomial via the generator formulas and the signed Leibniz rule:
/// Q_i(τ̄_b) = ξ̄_{b−i}^{p^i} for i ≤ b, Q_i(ξ̄_a) = 0.
pub fn q_action_on_monomial(
    ctx: &PrimeContext,
    spec: AlgebraSpec,
    i: usize,
    m: &Monomial,
) -> Result<Combination> {
    if i > 2 {
        return Err(Error::UndefinedQ { q: i });
    }
    if !spec.contains(m) {
        return Err(Error::Malformed(format!("{m} is not in A//E({})", spec.i())));
    }
    let p = ctx.p();
    let i = i as u32;
    let mut out = Vec::new();
    for (pos, b) in m.tau_indices().enumerate() {
        if i <= b {
            let target = m.without_tau(b).times_xi(b - i, ctx.power(i) as u32);
            let coeff = if pos % 2 == 0 { 1 } else { p - 1 };
            out.push((target, coeff));
        }
    }
    Ok(out)
}

/// Tabulate the Q-action on the span of `monomials` (must be closed).
pub fn module_from_monomials(
    ctx: &PrimeContext,
    spec: AlgebraSpec,
    monomials: &[Monomial],
    qs: QSet,
) -> Result<QModule> {
    let mut sorted = monomials.to_vec();
    sort_canonical(ctx, &mut sorted);
    sorted.dedup();
    let mut basis: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
    let mut index: HashMap<&Monomial, (i64, usize)> = HashMap::new();
    for m in &sorted {
        let d = m.degree(ctx) as i64;
        let e = basis.entry(d).or_default();
        index.insert(m, (d, e.len()));
        e.push(Label::Mono(m.clone()));
    }
    let mut out = QModule { ctx: *ctx, qs, basis, actions: Default::default(), truncation: None };
    for i in qs.indices() {
        let di = ctx.q_drop(i);
        for m in &sorted {
            let (d, c) = index[m];
            for (t, coeff) in q_action_on_monomial(ctx, spec, i, m)? {
                let Some(&(_, r)) = index.get(&t) else {
                    return Err(Error::NotClosed { q: i, monomial: m.to_string() });
                };
                let (rows, cols) = (out.dim(d - di), out.dim(d));
                out.actions[i]
                    .entry(d)
                    .or_insert_with(|| FpMatrix::zeros(ctx.p(), rows, cols))
                    .add_to(r, c, coeff);
            }
        }
    }
    Ok(out)
}

/// Per-degree span of the Q-submodule generated by `elements`.
pub fn closure(m: &QModule, elements: &[Element]) -> Result<BTreeMap<i64, Subspace>> {
    let p = m.p();
    let mut pending: BTreeMap<i64, Vec<Vec<u32>>> = BTreeMap::new();
    for e in elements {
        if e.coeffs.len() != m.dim(e.degree) {
            return Err(Error::Malformed(format!(
                "element of length {} in degree {} of dimension {}",
                e.coeffs.len(),
                e.degree,
                m.dim(e.degree)
            )));
        }
        if e.coeffs.iter().any(|&c| c != 0) {
            pending.entry(e.degree).or_default().push(e.coeffs.iter().map(|&c| c % p).collect());
        }
    }
    let mut spans = BTreeMap::new();
    while let Some((&d, _)) = pending.iter().next_back() {
        let vs = pending.remove(&d).unwrap();
        let s = Subspace::spanned_by(p, m.dim(d), vs);
        for i in m.qs().indices() {
            let images: Vec<Vec<u32>> = s
                .basis()
                .iter()
                .map(|v| m.apply(i, d, v))
                .filter(|w| w.iter().any(|&x| x != 0))
                .collect();
            if !images.is_empty() {
                pending.entry(d - m.qdrop(i)).or_default().extend(images);
            }
        }
        if s.dim() > 0 {
            spans.insert(d, s);
        }
    }
    Ok(spans)
}

fn combination_label(labels: &[Label], v: &[u32]) -> Label {
    let terms: Vec<(usize, u32)> = v.iter().copied().enumerate().filter(|&(_, c)| c != 0).collect();
    if let [(i, 1)] = terms.as_slice() {
        return labels[*i].clone();
    }
    let s = terms
        .iter()
        .map(|&(i, c)| if c == 1 { labels[i].to_string() } else { format!("{c}*{}", labels[i]) })
        .collect::<Vec<_>>()
        .join(" + ");
    Label::Text(s)
}

/// Smallest Q-closed submodule containing `elements`, with its inclusion.
pub fn submodule_generated(m: &Arc<QModule>, elements: &[Element]) -> Result<(QModule, QModuleMap)> {
    let spans = closure(m, elements)?;
    let p = m.p();
    let basis = spans
        .iter()
        .map(|(&d, s)| (d, s.basis().iter().map(|v| combination_label(m.labels(d), v)).collect()))
        .collect();
    let mut sub = QModule { ctx: m.ctx, qs: m.qs, basis, actions: Default::default(), truncation: m.truncation };
    for i in m.qs.indices() {
        let di = m.qdrop(i);
        for (&d, s) in &spans {
            let Some(target) = spans.get(&(d - di)) else { continue };
            let cols: Vec<Vec<u32>> =
                s.basis().iter().map(|v| target.coordinates(&m.apply(i, d, v))).collect();
            let a = FpMatrix::from_columns(p, target.dim(), &cols);
            if !a.is_zero() {
                sub.actions[i].insert(d, a);
            }
        }
    }
    let sub_arc = Arc::new(sub.clone());
    let matrices = spans.iter().map(|(&d, s)| (d, s.inclusion_matrix())).collect();
    let inclusion = QModuleMap::new(sub_arc, m.clone(), 0, matrices)?;
    Ok((sub, inclusion))
}

/// Quotient by the Q-submodule generated by `elements`, with its projection.
/// Coset representatives are the standard basis vectors off the pivots.
pub fn quotient(m: &Arc<QModule>, elements: &[Element]) -> Result<(QModule, QModuleMap)> {
    let spans = closure(m, elements)?;
    quotient_by_spans(m, &spans)
}

pub(crate) fn quotient_by_spans(
    m: &Arc<QModule>,
    spans: &BTreeMap<i64, Subspace>,
) -> Result<(QModule, QModuleMap)> {
    let p = m.p();
    let zero = |d: i64| Subspace::zero(p, m.dim(d));
    let keep: BTreeMap<i64, Vec<usize>> = m
        .basis
        .keys()
        .map(|&d| {
            let piv = spans.get(&d).map_or(Vec::new(), |s| s.pivots().to_vec());
            (d, complement_indices(m.dim(d), &piv))
        })
        .filter(|(_, v)| !v.is_empty())
        .collect();
    let basis = keep
        .iter()
        .map(|(&d, v)| (d, v.iter().map(|&j| m.labels(d)[j].clone()).collect()))
        .collect();
    let mut q = QModule { ctx: m.ctx, qs: m.qs, basis, actions: Default::default(), truncation: m.truncation };
    let project = |d: i64, v: &[u32]| -> Vec<u32> {
        let mut w = v.to_vec();
        spans.get(&d).cloned().unwrap_or_else(|| zero(d)).reduce(&mut w);
        keep.get(&d).map_or(Vec::new(), |ix| ix.iter().map(|&j| w[j]).collect())
    };
    for i in m.qs.indices() {
        let di = m.qdrop(i);
        for (&d, ix) in &keep {
            if !keep.contains_key(&(d - di)) {
                continue;
            }
            let cols: Vec<Vec<u32>> = ix
                .iter()
                .map(|&j| {
                    let mut e = vec![0; m.dim(d)];
                    e[j] = 1;
                    project(d - di, &m.apply(i, d, &e))
                })
                .collect();
            let a = FpMatrix::from_columns(p, q.dim(d - di), &cols);
            if !a.is_zero() {
                q.actions[i].insert(d, a);
            }
        }
    }
    let mut matrices = BTreeMap::new();
    for &d in m.basis.keys() {
        if q.dim(d) == 0 {
            continue;
        }
        let cols: Vec<Vec<u32>> = (0..m.dim(d))
            .map(|j| {
                let mut e = vec![0; m.dim(d)];
                e[j] = 1;
                project(d, &e)
            })
            .collect();
        matrices.insert(d, FpMatrix::from_columns(p, q.dim(d), &cols));
    }
    let projection = QModuleMap::new(m.clone(), Arc::new(q.clone()), 0, matrices)?;
    Ok((q, projection))
}

/// Graded linear map; source degree d goes to target degree d + shift.
#[derive(Clone, Debug)]
pub struct QModuleMap {
    source: Arc<QModule>,
    target: Arc<QModule>,
    shift: i64,
    matrices: BTreeMap<i64, FpMatrix>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MapViolation {
    pub degree: i64,
    pub q: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MapReport {
    pub violations: Vec<MapViolation>,
}

impl MapReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl QModuleMap {
    pub fn new(
        source: Arc<QModule>,
        target: Arc<QModule>,
        shift: i64,
        matrices: BTreeMap<i64, FpMatrix>,
    ) -> Result<Self> {
        if shift % 2 != 0 {
            return Err(Error::Config(format!("map shift {shift} is odd")));
        }
        for (&d, a) in &matrices {
            if a.cols() != source.dim(d) || a.rows() != target.dim(d + shift) {
                return Err(Error::Malformed(format!(
                    "map matrix at degree {d} is {}x{}, expected {}x{}",
                    a.rows(),
                    a.cols(),
                    target.dim(d + shift),
                    source.dim(d)
                )));
            }
        }
        Ok(QModuleMap { source, target, shift, matrices })
    }

    pub fn identity(m: Arc<QModule>) -> Self {
        let matrices = m.degrees().map(|d| (d, FpMatrix::identity(m.p(), m.dim(d)))).collect();
        QModuleMap { source: m.clone(), target: m, shift: 0, matrices }
    }

    pub fn zero(source: Arc<QModule>, target: Arc<QModule>, shift: i64) -> Result<Self> {
        Self::new(source, target, shift, BTreeMap::new())
    }

    pub fn source(&self) -> &Arc<QModule> {
        &self.source
    }
    pub fn target(&self) -> &Arc<QModule> {
        &self.target
    }
    pub fn shift(&self) -> i64 {
        self.shift
    }
    pub fn matrices(&self) -> &BTreeMap<i64, FpMatrix> {
        &self.matrices
    }

    pub fn matrix(&self, d: i64) -> FpMatrix {
        self.matrices.get(&d).cloned().unwrap_or_else(|| {
            FpMatrix::zeros(self.source.p(), self.target.dim(d + self.shift), self.source.dim(d))
        })
    }

    pub fn apply(&self, d: i64, v: &[u32]) -> Vec<u32> {
        self.matrix(d).mul_vec(v)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &QModuleMap) -> Result<QModuleMap> {
        let matrices = self
            .source
            .degrees()
            .map(|d| (d, other.matrix(d + self.shift).mul(&self.matrix(d))))
            .filter(|(_, a)| !a.is_zero())
            .collect();
        QModuleMap::new(self.source.clone(), other.target.clone(), self.shift + other.shift, matrices)
    }

    /// Check matrix shapes and f∘Q_i = Q_i∘f for every Q_i defined on both ends.
    pub fn verify(&self) -> MapReport {
        let mut report = MapReport::default();
        let (s, t) = (&self.source, &self.target);
        for (&d, a) in &self.matrices {
            if a.cols() != s.dim(d) || a.rows() != t.dim(d + self.shift) {
                report.violations.push(MapViolation {
                    degree: d,
                    q: None,
                    message: "matrix shape disagrees with the degree shift".into(),
                });
            }
        }
        for i in s.qs().intersect(t.qs()).indices() {
            let di = s.qdrop(i);
            for d in s.degrees() {
                let lhs = self.matrix(d - di).mul(&s.action_matrix(i, d));
                let rhs = t.action_matrix(i, d + self.shift).mul(&self.matrix(d));
                if lhs != rhs {
                    report.violations.push(MapViolation {
                        degree: d,
                        q: Some(i),
                        message: format!("map does not commute with Q{i}"),
                    });
                }
            }
        }
        report
    }

    /// True when every degree's matrix is square and invertible.
    pub fn is_isomorphism(&self) -> bool {
        let degrees: std::collections::BTreeSet<i64> = self
            .source
            .degrees()
            .chain(self.target.degrees().map(|d| d - self.shift))
            .collect();
        degrees.into_iter().all(|d| {
            let a = self.matrix(d);
            a.rows() == a.cols() && a.rank() == a.rows()
        })
    }
}

pub fn verify_map(f: &QModuleMap) -> MapReport {
    f.verify()
}

/// Versioned JSON form of a module.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QModuleJson {
    pub schema: String,
    pub version: u32,
    pub prime: u32,
    pub qs: Vec<usize>,
    pub truncation: Option<i64>,
    pub degrees: Vec<DegreeJson>,
    pub actions: Vec<ActionJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DegreeJson {
    pub degree: i64,
    pub labels: Vec<LabelJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum LabelJson {
    Monomial(String),
    Text(String),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ActionJson {
    pub q: usize,
    pub degree: i64,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u32>,
}

pub const QMODULE_SCHEMA: &str = "bp2split.qmodule";
pub const QMODULE_SCHEMA_VERSION: u32 = 1;

impl QModule {
    pub fn to_json(&self) -> QModuleJson {
        QModuleJson {
            schema: QMODULE_SCHEMA.into(),
            version: QMODULE_SCHEMA_VERSION,
            prime: self.p(),
            qs: self.qs.indices(),
            truncation: self.truncation,
            degrees: self
                .basis
                .iter()
                .map(|(&degree, ls)| DegreeJson {
                    degree,
                    labels: ls
                        .iter()
                        .map(|l| match l {
                            Label::Mono(m) => LabelJson::Monomial(m.to_string()),
                            Label::Text(s) => LabelJson::Text(s.clone()),
                        })
                        .collect(),
                })
                .collect(),
            actions: (0..3)
                .flat_map(|q| {
                    self.actions[q].iter().map(move |(&degree, a)| ActionJson {
                        q,
                        degree,
                        rows: a.rows(),
                        cols: a.cols(),
                        entries: a.entries().to_vec(),
                    })
                })
                .collect(),
        }
    }

    pub fn from_json(j: &QModuleJson) -> Result<QModule> {
        if j.schema != QMODULE_SCHEMA || j.version != QMODULE_SCHEMA_VERSION {
            return Err(Error::Malformed(format!("unsupported schema {} v{}", j.schema, j.version)));
        }
        let ctx = PrimeContext::new(j.prime)?;
        let qs = QSet::from_indices(&j.qs)?;
        let mut basis = BTreeMap::new();
        for dj in &j.degrees {
            let labels = dj
                .labels
                .iter()
                .map(|l| match l {
                    LabelJson::Monomial(s) => s.parse().map(Label::Mono),
                    LabelJson::Text(s) => Ok(Label::Text(s.clone())),
                })
                .collect::<Result<Vec<_>>>()?;
            basis.insert(dj.degree, labels);
        }
        let mut actions: [BTreeMap<i64, FpMatrix>; 3] = Default::default();
        for a in &j.actions {
            if a.q > 2 {
                return Err(Error::UndefinedQ { q: a.q });
            }
            actions[a.q].insert(a.degree, FpMatrix::from_vec(j.prime, a.rows, a.cols, a.entries.clone())?);
        }
        Ok(QModule::new(ctx, qs, basis, actions)?.with_truncation(j.truncation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> PrimeContext {
        PrimeContext::new(3).unwrap()
    }

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn b19() -> QModule {
        let ms: Vec<Monomial> =
            ["1", "xi1", "xi1^2", "xi1^3", "xi2", "tau2"].iter().map(|s| mono(s)).collect();
        module_from_monomials(&c3(), AlgebraSpec::new(1).unwrap(), &ms, QSet::E2).unwrap()
    }

    #[test]
    fn action_examples() {
        let c5 = PrimeContext::new(5).unwrap();
        let all = AlgebraSpec::new(-1).unwrap();
        assert_eq!(q_action_on_monomial(&c5, all, 1, &mono("tau2")).unwrap(), vec![(mono("xi1^5"), 1)]);
        assert!(q_action_on_monomial(&c5, all, 1, &mono("xi3")).unwrap().is_empty());
        assert_eq!(q_action_on_monomial(&c3(), all, 2, &mono("xi1 tau2")).unwrap(), vec![(mono("xi1"), 1)]);
        // second τ̄ factor picks up a sign
        assert_eq!(
            q_action_on_monomial(&c3(), all, 0, &mono("tau1 tau2")).unwrap(),
            vec![(mono("xi1 tau2"), 1), (mono("xi2 tau1"), 2)]
        );
    }

    #[test]
    fn module_from_monomials_examples() {
        let unit = module_from_monomials(&c3(), AlgebraSpec::new(1).unwrap(), &[Monomial::unit()], QSet::E2)
            .unwrap();
        assert_eq!((unit.total_dim(), unit.dim(0)), (1, 1));

        let b = b19();
        assert_eq!(b.total_dim(), 6);
        assert!(b.verify_relations().is_empty());
        let t = b.monomial_element(&mono("tau2")).unwrap();
        for (i, target) in [(0, "xi2"), (1, "xi1^3"), (2, "1")] {
            let img = b.apply(i, 17, &t.coeffs);
            assert_eq!(Some(Element { degree: 17 - b.qdrop(i), coeffs: img }), b.monomial_element(&mono(target)));
        }

        let err = module_from_monomials(&c3(), AlgebraSpec::new(1).unwrap(), &[mono("tau2")], QSet::single(0));
        assert!(matches!(err, Err(Error::NotClosed { q: 0, .. })));
    }

    #[test]
    fn suspension() {
        let b = b19();
        assert_eq!(b.suspend(0).unwrap(), b);
        let t = QModule::trivial(c3(), QSet::E2, 0).suspend(4).unwrap();
        assert_eq!(t.dim(4), 1);
        assert_eq!(b.suspend(4).unwrap().suspend(-4).unwrap(), b);
        assert!(b.suspend(3).is_err());
    }

    #[test]
    fn sums_and_tensors() {
        let b = b19();
        let z = QModule::zero(c3(), QSet::E2);
        assert_eq!(direct_sum(&[&b, &z]).unwrap(), b);
        let one = QModule::trivial(c3(), QSet::E2, 0);
        let bt = tensor(&one, &b).unwrap();
        for d in b.degrees() {
            assert_eq!(bt.dim(d), b.dim(d));
            for i in 0..3 {
                assert_eq!(bt.action_matrix(i, d), b.action_matrix(i, d));
            }
        }
        let t4 = QModule::trivial(c3(), QSet::E2, 4);
        let bt4 = tensor(&b, &t4).unwrap();
        let s4 = b.suspend(4).unwrap();
        for d in s4.degrees() {
            for i in 0..3 {
                assert_eq!(bt4.action_matrix(i, d), s4.action_matrix(i, d));
            }
        }
        let ff = tensor(&b, &b).unwrap();
        assert!(ff.verify_relations().is_empty());
        assert_eq!(ff.total_dim(), 36);
    }

    #[test]
    fn submodules_and_quotients() {
        let b = Arc::new(b19());
        let (s, inc) = submodule_generated(&b, &[]).unwrap();
        assert!(s.is_zero());
        assert!(inc.verify().passed());
        let (s, _) = submodule_generated(&b, &[b.monomial_element(&Monomial::unit()).unwrap()]).unwrap();
        assert_eq!(s.total_dim(), 1);
        let (s, inc) = submodule_generated(&b, &[b.monomial_element(&mono("tau2")).unwrap()]).unwrap();
        assert_eq!(s.total_dim(), 4);
        assert!(inc.verify().passed());
        for d in [0, 12, 16, 17] {
            assert_eq!(s.dim(d), 1);
        }

        let (q, proj) = quotient(&b, &[]).unwrap();
        assert_eq!(q, *b);
        assert!(proj.verify().passed());
        let all: Vec<Element> =
            b.degrees().flat_map(|d| (0..b.dim(d)).map(move |i| (d, i))).map(|(d, i)| b.basis_element(d, i)).collect();
        assert!(quotient(&b, &all).unwrap().0.is_zero());

        let free = Arc::new(QModule::free_on_one(c3(), QSet::pair(1, 2)));
        assert!(free.verify_relations().is_empty());
        let socle = free.basis_element(-22, 0);
        let (j, proj) = quotient(&free, &[socle]).unwrap();
        assert_eq!(j.degrees().collect::<Vec<_>>(), vec![-17, -5, 0]);
        assert!(proj.verify().passed());
    }

    #[test]
    fn map_verification() {
        let b = Arc::new(b19());
        assert!(QModuleMap::identity(b.clone()).verify().passed());
        assert!(QModuleMap::zero(b.clone(), b.clone(), 0).unwrap().verify().passed());
        let mut m = BTreeMap::new();
        m.insert(17, FpMatrix::identity(3, 1));
        assert!(QModuleMap::new(b.clone(), b.clone(), -5, m).is_err(), "odd shifts are rejected");
    }

    #[test]
    fn map_failing_q1_commutation() {
        // Keep τ̄_2 and kill everything else: Q_1τ̄_2 = ξ̄_1^3 ↦ 0, but Q_1 of the image is ξ̄_1^3.
        let b = Arc::new(b19());
        let mut m = BTreeMap::new();
        m.insert(17, FpMatrix::identity(3, 1));
        let f = QModuleMap::new(b.clone(), b, 0, m).unwrap();
        let rep = f.verify();
        assert!(rep.violations.iter().any(|v| v.q == Some(1) && v.degree == 17));
    }

    #[test]
    fn json_round_trip() {
        let b = b19();
        let j = b.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back: QModuleJson = serde_json::from_str(&s).unwrap();
        assert_eq!(QModule::from_json(&back).unwrap(), b);
    }

    #[test]
    fn dual_is_a_module() {
        let b = b19();
        let d = b.dual();
        assert!(d.verify_relations().is_empty());
        assert_eq!(d.dim(-17), 1);
        assert_eq!(d.dual().degrees().collect::<Vec<_>>(), b.degrees().collect::<Vec<_>>());
    }
}
