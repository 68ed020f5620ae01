//! Margolis homology ker Q_i / im Q_i, Künneth and freeness checks, and the
//! numerical classification of invertible modules over E(Q_j, Q_h).
//!
//! Grading placement: the free module E(Q_j,Q_h) has its generator in degree
//! 0. The augmentation ideal I then has Margolis classes at −d_j and −d_h,
//! and its inverse is realised as Σ^{d_j+d_h}(E/socle). A module with one
//! class x for Q_j and one class y for Q_h is stably Σ^a I^{⊗b} with
//! b = (y − x)/(|Q_h| − |Q_j|) and a = x − b|Q_j|, where |Q_i| = −d_i.

use crate::browngitler::{bp_homology, w_family, WFamily};
use crate::error::{Error, Result};
use crate::fp::{Subquotient, Subspace};
use crate::monomial::{Monomial, PrimeContext};
use crate::qmodule::{quotient, submodule_generated, tensor, Element, Label, QModule, QSet};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize)]
pub struct MargolisClass {
    pub degree: i64,
    pub representative: String,
}

/// Per-degree homology with representatives from the deterministic quotient basis.
#[derive(Clone, Debug)]
pub struct MargolisHomology {
    pub q: usize,
    /// Degrees examined, inclusive.
    pub range: (i64, i64),
    pub groups: BTreeMap<i64, Subquotient>,
    labels: BTreeMap<i64, Vec<Label>>,
}

impl MargolisHomology {
    pub fn dim(&self, d: i64) -> usize {
        self.groups.get(&d).map_or(0, Subquotient::dim)
    }

    pub fn total_dim(&self) -> usize {
        self.groups.values().map(Subquotient::dim).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    /// Degrees carrying nonzero homology, each repeated by its dimension.
    pub fn class_degrees(&self) -> Vec<i64> {
        self.groups
            .iter()
            .flat_map(|(&d, g)| std::iter::repeat_n(d, g.dim()))
            .collect()
    }

    pub fn classes(&self) -> Vec<MargolisClass> {
        let mut out = Vec::new();
        for (&d, g) in &self.groups {
            for v in g.representatives() {
                out.push(MargolisClass { degree: d, representative: render(&self.labels[&d], v) });
            }
        }
        out
    }

    pub fn to_json(&self, module: &str) -> serde_json::Value {
        serde_json::json!({ "module": module, "Q": self.q, "classes": self.classes() })
    }
}

fn render(labels: &[Label], v: &[u32]) -> String {
    let terms: Vec<String> = v
        .iter()
        .zip(labels)
        .filter(|(c, _)| **c != 0)
        .map(|(c, l)| if *c == 1 { l.to_string() } else { format!("{c}*{l}") })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Highest degree where homology is exact for a module truncated at `t`.
pub fn certified_top(m: &QModule, i: usize) -> Option<i64> {
    m.truncation().map(|t| t - m.qdrop(i))
}

fn homology_at(m: &QModule, i: usize, d: i64) -> Subquotient {
    let p = m.p();
    let out = m.action_matrix(i, d);
    let cycles = if m.dim(d - m.qdrop(i)) == 0 { Subspace::full(p, m.dim(d)) } else { out.kernel_basis() };
    let src = d + m.qdrop(i);
    let boundaries = if m.dim(src) == 0 {
        Subspace::zero(p, m.dim(d))
    } else {
        m.action_matrix(i, src).image_basis()
    };
    Subquotient::new(&cycles, boundaries)
}

/// M(M, Q_i) in degrees `range` (default: the module's support, capped at
/// the certified top for truncated modules).
pub fn margolis_homology(m: &QModule, i: usize, range: Option<(i64, i64)>) -> Result<MargolisHomology> {
    if !m.qs().contains(i) {
        return Err(Error::UndefinedQ { q: i });
    }
    let cert = certified_top(m, i);
    let (lo, hi) = match range {
        Some(r) => r,
        None => (m.min_degree().unwrap_or(0), cert.unwrap_or(m.max_degree().unwrap_or(0))),
    };
    if let Some(c) = cert {
        if hi > c {
            return Err(Error::Uncertified { degree: hi, certified: c });
        }
    }
    let degrees: Vec<i64> = m.degrees().filter(|d| (lo..=hi).contains(d)).collect();
    let groups: BTreeMap<i64, Subquotient> = degrees
        .par_iter()
        .map(|&d| (d, homology_at(m, i, d)))
        .filter(|(_, g)| g.dim() > 0)
        .collect();
    let labels = groups.keys().map(|&d| (d, m.labels(d).to_vec())).collect();
    Ok(MargolisHomology { q: i, range: (lo, hi), groups, labels })
}

/// Closed-form Margolis basis of H_*BP⟨2⟩ for Q_i, as a monomial predicate.
pub fn bp2_closed_form(ctx: &PrimeContext, i: usize, m: &Monomial) -> bool {
    if m.length() > 0 {
        return false;
    }
    let p = ctx.p();
    let p2 = ctx.power(2) as u32;
    m.xi_exponents().iter().enumerate().all(|(a, &e)| {
        let a = a + 1;
        match i {
            0 => a <= 2 || e == 0,
            1 => a == 1 || e < p,
            _ => e < p2,
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MargolisRow {
    pub t: i64,
    pub computed: usize,
    pub closed_form: usize,
    pub closed_form_basis: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MargolisBp2Report {
    pub prime: u32,
    pub q: usize,
    pub max_degree: i64,
    pub certified_through: i64,
    pub rows: Vec<MargolisRow>,
    pub mismatches: Vec<String>,
}

impl MargolisBp2Report {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Computes M(H_*BP⟨2⟩, Q_i) through max_degree − d_i and compares it with
/// the closed form degree by degree: equal dimensions, and the closed-form
/// monomials are cycles whose classes form a basis.
pub fn margolis_bp2(ctx: &PrimeContext, i: usize, max_degree: i64) -> Result<MargolisBp2Report> {
    margolis_bp2_of(ctx, &bp_homology(ctx, 2, max_degree)?.module, i)
}

/// As [`margolis_bp2`] on a caller-supplied (possibly perturbed) H_*BP⟨2⟩.
pub fn margolis_bp2_of(ctx: &PrimeContext, h: &QModule, i: usize) -> Result<MargolisBp2Report> {
    let max_degree = h.truncation().unwrap_or_else(|| h.max_degree().unwrap_or(0));
    let top = max_degree - ctx.q_drop(i);
    let mh = margolis_homology(h, i, Some((0, top)))?;
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for t in 0..=top {
        let closed: Vec<usize> = (0..h.dim(t))
            .filter(|&c| matches!(&h.labels(t)[c], Label::Mono(m) if bp2_closed_form(ctx, i, m)))
            .collect();
        let computed = mh.dim(t);
        if computed == 0 && closed.is_empty() {
            continue;
        }
        if computed != closed.len() {
            mismatches.push(format!("Q{i} degree {t}: computed {computed}, closed form {}", closed.len()));
        } else {
            let g = mh.groups.get(&t).expect("nonzero homology");
            let out = h.action_matrix(i, t);
            let mut coords = Vec::new();
            for &c in &closed {
                let e = h.basis_element(t, c).coeffs;
                if h.dim(t - ctx.q_drop(i)) > 0 && !out.mul_vec(&e).iter().all(|&x| x == 0) {
                    mismatches.push(format!("Q{i} degree {t}: {} is not a cycle", h.labels(t)[c]));
                }
                coords.push(g.coordinates(&e));
            }
            if Subspace::spanned_by(ctx.p(), computed, coords).dim() != computed {
                mismatches.push(format!("Q{i} degree {t}: closed-form classes are dependent"));
            }
        }
        rows.push(MargolisRow {
            t,
            computed,
            closed_form: closed.len(),
            closed_form_basis: closed.iter().map(|&c| h.labels(t)[c].to_string()).collect(),
        });
    }
    Ok(MargolisBp2Report { prime: ctx.p(), q: i, max_degree, certified_through: top, rows, mismatches })
}

#[derive(Clone, Debug, Serialize)]
pub struct KunnethReport {
    pub q: usize,
    pub rows: Vec<(i64, usize, usize)>,
    pub passed: bool,
}

/// dim M(M⊗N, Q_i) against the convolution of the factors' dimensions.
pub fn kunneth_check(m: &QModule, n: &QModule, i: usize) -> Result<KunnethReport> {
    let mn = tensor(m, n)?;
    let hm = margolis_homology(m, i, None)?;
    let hn = margolis_homology(n, i, None)?;
    let hmn = margolis_homology(&mn, i, None)?;
    let mut conv: BTreeMap<i64, usize> = BTreeMap::new();
    for (&a, ga) in &hm.groups {
        for (&b, gb) in &hn.groups {
            *conv.entry(a + b).or_default() += ga.dim() * gb.dim();
        }
    }
    let mut degrees: Vec<i64> = conv.keys().copied().chain(hmn.groups.keys().copied()).collect();
    degrees.sort();
    degrees.dedup();
    let rows: Vec<(i64, usize, usize)> =
        degrees.iter().map(|&d| (d, hmn.dim(d), conv.get(&d).copied().unwrap_or(0))).collect();
    let passed = rows.iter().all(|r| r.1 == r.2);
    Ok(KunnethReport { q: i, rows, passed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InvertibleClass {
    pub a: i64,
    pub b: i64,
    /// Q_j and Q_h Margolis degrees.
    pub margolis_degrees: (i64, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Classification {
    Invertible(InvertibleClass),
    NotInvertible { reason: String },
}

/// The two operators of a module over E(Q_j, Q_h), in increasing order.
fn pair_of(m: &QModule) -> Result<(usize, usize)> {
    match m.qs().indices()[..] {
        [j, h] => Ok((j, h)),
        _ => Err(Error::Config(format!("classification needs exactly two operators, got {}", m.qs()))),
    }
}

/// Solves the degree equations from the two Margolis classes x (for Q_j) and y (for Q_h).
pub fn solve_ab(ctx: &PrimeContext, (j, h): (usize, usize), x: i64, y: i64) -> std::result::Result<(i64, i64), String> {
    let (qj, qh) = (-ctx.q_drop(j), -ctx.q_drop(h));
    let den = qh - qj;
    if (y - x) % den != 0 {
        return Err(format!("b = ({y} - {x})/({den}) is not integral"));
    }
    let b = (y - x) / den;
    Ok((x - b * qj, b))
}

pub fn classify_invertible(m: &QModule) -> Result<Classification> {
    let pair = pair_of(m)?;
    if m.truncation().is_some() {
        return Err(Error::Config("classification needs a finite, untruncated module".into()));
    }
    let hj = margolis_homology(m, pair.0, None)?;
    let hh = margolis_homology(m, pair.1, None)?;
    let (dj, dh) = (hj.class_degrees(), hh.class_degrees());
    if dj.len() != 1 || dh.len() != 1 {
        return Ok(Classification::NotInvertible {
            reason: format!("Margolis dimensions are {} and {}, not 1 and 1", dj.len(), dh.len()),
        });
    }
    Ok(match solve_ab(m.ctx(), pair, dj[0], dh[0]) {
        Ok((a, b)) => Classification::Invertible(InvertibleClass { a, b, margolis_degrees: (dj[0], dh[0]) }),
        Err(reason) => Classification::NotInvertible { reason },
    })
}

/// I ⊂ E(Q_j,Q_h): degrees −d_j, −d_h, −d_j−d_h.
pub fn augmentation_ideal(ctx: &PrimeContext, (j, h): (usize, usize)) -> Result<QModule> {
    let e = Arc::new(QModule::free_on_one(*ctx, QSet::pair(j, h)));
    let gens: Vec<Element> = [j, h]
        .iter()
        .map(|&i| Element { degree: -ctx.q_drop(i), coeffs: vec![1] })
        .collect();
    Ok(submodule_generated(&e, &gens)?.0)
}

/// Σ^{d_j+d_h}(E(Q_j,Q_h)/socle), the inverse of I.
pub fn inverse_ideal(ctx: &PrimeContext, (j, h): (usize, usize)) -> Result<QModule> {
    let e = Arc::new(QModule::free_on_one(*ctx, QSet::pair(j, h)));
    let socle = Element { degree: -ctx.q_drop(j) - ctx.q_drop(h), coeffs: vec![1] };
    let (q, _) = quotient(&e, &[socle])?;
    q.suspend(ctx.q_drop(j) + ctx.q_drop(h))
}

/// A module with Margolis classes at a + b|Q_j| and a + b|Q_h|: Σ^a I^{⊗b},
/// or Σ^a (I^{-1})^{⊗|b|} for b < 0. Odd a is realised by a plain regrade.
pub fn construct_model(ctx: &PrimeContext, (j, h): (usize, usize), a: i64, b: i64) -> Result<QModule> {
    if j == h || j > 2 || h > 2 {
        return Err(Error::Config(format!("({j},{h}) is not a pair of distinct operators")));
    }
    let (j, h) = (j.min(h), j.max(h));
    let unit = if b >= 0 { augmentation_ideal(ctx, (j, h))? } else { inverse_ideal(ctx, (j, h))? };
    let mut m = QModule::trivial(*ctx, QSet::pair(j, h), 0);
    for _ in 0..b.unsigned_abs() {
        m = tensor(&m, &unit)?;
    }
    Ok(m.shifted(a))
}

#[derive(Clone, Debug, Serialize)]
pub struct FreenessReport {
    /// (Q index, degree, dimension) of every nonzero Margolis group found.
    pub nonzero: Vec<(usize, i64, usize)>,
    pub free: bool,
}

/// True iff every defined Margolis homology vanishes in the certified range.
/// For a bounded-below module of finite type this detects freeness.
pub fn freeness_check(m: &QModule) -> Result<FreenessReport> {
    let mut nonzero = Vec::new();
    for i in m.qs().indices() {
        if m.is_zero() {
            break;
        }
        let lo = m.min_degree().unwrap_or(0);
        let hi = certified_top(m, i).unwrap_or(m.max_degree().unwrap_or(0));
        if hi < lo {
            continue;
        }
        let mh = margolis_homology(m, i, Some((lo, hi)))?;
        for (&d, g) in &mh.groups {
            nonzero.push((i, d, g.dim()));
        }
    }
    let free = nonzero.is_empty();
    Ok(FreenessReport { nonzero, free })
}

fn base_p_digits(p: u64, mut n: u64) -> Vec<u64> {
    let mut v = Vec::new();
    while n > 0 {
        v.push(n % p);
        n /= p;
    }
    v
}

/// Closed-form Margolis generators (Q_j class, Q_h class) of W(n).
pub fn w_closed_form(ctx: &PrimeContext, which: WFamily, n: u64) -> (Monomial, Monomial) {
    let p = ctx.p() as u64;
    let p2 = ctx.power(2) as u32;
    let digits = base_p_digits(p, n);
    let mut y = Monomial::unit();
    match which {
        WFamily::W1 => {
            for (r, &d) in digits.iter().enumerate() {
                y = y.times_xi(r as u32 + 2, (d * p) as u32);
            }
            (Monomial::unit().times_xi(1, p2 * n as u32), y)
        }
        WFamily::We | WFamily::Wo => {
            let (x_index, first) = if which == WFamily::We { (2, 4) } else { (1, 3) };
            for (s, pair) in digits.chunks(2).enumerate() {
                let m = pair[0] + p * pair.get(1).copied().unwrap_or(0);
                y = y.times_xi(first + 2 * s as u32, m as u32);
            }
            (Monomial::unit().times_xi(x_index, p2 * n as u32), y)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WBlockReport {
    pub family: WFamily,
    pub n: u64,
    pub dim: usize,
    pub closed_form: (String, String),
    pub closed_form_degrees: (i64, i64),
    pub classification: Classification,
    pub model_degrees: Option<(Vec<i64>, Vec<i64>)>,
    pub failures: Vec<String>,
}

impl WBlockReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Margolis homology of W(n) against the closed form, classification, and
/// the model round trip.
pub fn analyse_w_block(ctx: &PrimeContext, which: WFamily, n: u64) -> Result<WBlockReport> {
    let m = w_family(ctx, which, n, i64::MAX)?;
    let m = m.with_truncation(None);
    let (j, h) = which.pair();
    let (cx, cy) = w_closed_form(ctx, which, n);
    let degs = (cx.degree(ctx) as i64, cy.degree(ctx) as i64);
    let mut failures = Vec::new();
    for (i, c) in [(j, &cx), (h, &cy)] {
        let mh = margolis_homology(&m, i, None)?;
        if mh.class_degrees() != vec![c.degree(ctx) as i64] {
            failures.push(format!("Q{i}: classes at {:?}, closed form {c} at {}", mh.class_degrees(), c.degree(ctx)));
            continue;
        }
        let (d, g) = mh.groups.iter().next().unwrap();
        match m.monomial_element(c) {
            Some(e) if !g.is_boundary(&e.coeffs) && g.coordinates(&e.coeffs).iter().any(|&x| x != 0) => {}
            _ => failures.push(format!("Q{i}: {c} does not represent the class in degree {d}")),
        }
    }
    // W(0) is F_p with both classes in degree 0
    let shape_ok = if n == 0 { degs == (0, 0) } else { degs.0 % 2 == 0 && degs.0 < degs.1 };
    if !shape_ok {
        failures.push(format!("degrees {degs:?} are not (even, larger)"));
    }
    let classification = classify_invertible(&m)?;
    let mut model_degrees = None;
    match &classification {
        Classification::Invertible(c) => {
            if n >= 1 && c.b >= 0 {
                failures.push(format!("b = {} is not negative", c.b));
            }
            if (c.a - c.b) % 2 != 0 {
                failures.push(format!("a = {} and b = {} differ in parity", c.a, c.b));
            }
            let model = construct_model(ctx, (j, h), c.a, c.b)?;
            let md = (
                margolis_homology(&model, j, None)?.class_degrees(),
                margolis_homology(&model, h, None)?.class_degrees(),
            );
            if md != (vec![degs.0], vec![degs.1]) {
                failures.push(format!("model classes {md:?} differ from {degs:?}"));
            }
            model_degrees = Some(md);
        }
        Classification::NotInvertible { reason } => failures.push(format!("not invertible: {reason}")),
    }
    Ok(WBlockReport {
        family: which,
        n,
        dim: m.total_dim(),
        closed_form: (cx.to_string(), cy.to_string()),
        closed_form_degrees: degs,
        classification,
        model_degrees,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> PrimeContext {
        PrimeContext::new(3).unwrap()
    }

    #[test]
    fn free_and_trivial() {
        let ctx = c3();
        let e = QModule::free_on_one(ctx, QSet::pair(1, 2));
        for i in [1, 2] {
            assert!(margolis_homology(&e, i, None).unwrap().is_zero());
        }
        assert!(freeness_check(&e).unwrap().free);
        let f = QModule::trivial(ctx, QSet::E2, 0);
        for i in 0..3 {
            assert_eq!(margolis_homology(&f, i, None).unwrap().class_degrees(), vec![0]);
        }
        assert!(!freeness_check(&f).unwrap().free);
    }

    #[test]
    fn w1_of_one() {
        let ctx = c3();
        let w = w_family(&ctx, WFamily::W1, 1, 1000).unwrap().with_truncation(None);
        let h1 = margolis_homology(&w, 1, None).unwrap();
        assert_eq!(h1.class_degrees(), vec![36]);
        assert_eq!(h1.classes()[0].representative, "xi1^9");
        let h2 = margolis_homology(&w, 2, None).unwrap();
        assert_eq!(h2.classes()[0].representative, "xi2^3");
        assert_eq!(h2.class_degrees(), vec![48]);
        let Classification::Invertible(c) = classify_invertible(&w).unwrap() else { panic!() };
        assert_eq!((c.a, c.b), (31, -1));
        assert!(analyse_w_block(&ctx, WFamily::W1, 1).unwrap().passed());
    }

    #[test]
    fn bp2_spot_values() {
        let ctx = c3();
        let r = margolis_bp2(&ctx, 0, 40).unwrap();
        assert!(r.passed(), "{:?}", r.mismatches);
        let row4 = r.rows.iter().find(|r| r.t == 4).unwrap();
        assert_eq!(row4.closed_form_basis, ["xi1"]);
        let r2 = margolis_bp2(&ctx, 2, 53).unwrap();
        assert!(r2.passed(), "{:?}", r2.mismatches);
        assert_eq!(r2.certified_through, 36);
        for i in 0..3 {
            let r = margolis_bp2(&ctx, i, 30).unwrap();
            assert_eq!(r.rows[0].t, 0);
            assert_eq!(r.rows[0].closed_form_basis, ["1"]);
        }
        let h = bp_homology(&ctx, 2, 30).unwrap().module;
        assert!(matches!(margolis_homology(&h, 2, Some((0, 20))), Err(Error::Uncertified { .. })));
    }

    #[test]
    fn classification_examples() {
        let ctx = c3();
        let f = QModule::trivial(ctx, QSet::pair(1, 2), 0);
        assert_eq!(
            classify_invertible(&f).unwrap(),
            Classification::Invertible(InvertibleClass { a: 0, b: 0, margolis_degrees: (0, 0) })
        );
        let i = augmentation_ideal(&ctx, (1, 2)).unwrap();
        assert_eq!(i.degrees().collect::<Vec<_>>(), vec![-22, -17, -5]);
        let Classification::Invertible(c) = classify_invertible(&i).unwrap() else { panic!() };
        assert_eq!((c.a, c.b), (0, 1));
        let e = QModule::free_on_one(ctx, QSet::pair(1, 2));
        assert!(matches!(classify_invertible(&e).unwrap(), Classification::NotInvertible { .. }));
    }

    #[test]
    fn model_examples() {
        let ctx = c3();
        assert_eq!(construct_model(&ctx, (1, 2), 0, 0).unwrap().total_dim(), 1);
        let i = construct_model(&ctx, (1, 2), 0, 1).unwrap();
        assert_eq!(margolis_homology(&i, 1, None).unwrap().class_degrees(), vec![-5]);
        assert_eq!(margolis_homology(&i, 2, None).unwrap().class_degrees(), vec![-17]);
        let j = construct_model(&ctx, (1, 2), 0, -1).unwrap();
        assert_eq!(margolis_homology(&j, 1, None).unwrap().class_degrees(), vec![5]);
        assert_eq!(margolis_homology(&j, 2, None).unwrap().class_degrees(), vec![17]);
        assert_eq!(j.degrees().collect::<Vec<_>>(), vec![5, 17, 22]);
    }

    #[test]
    fn kunneth_examples() {
        let ctx = c3();
        let j = inverse_ideal(&ctx, (1, 2)).unwrap();
        let f = QModule::trivial(ctx, QSet::pair(1, 2), 0);
        let e = QModule::free_on_one(ctx, QSet::pair(1, 2));
        for i in [1, 2] {
            assert!(kunneth_check(&j, &j, i).unwrap().passed);
            assert!(kunneth_check(&j, &f, i).unwrap().passed);
            let r = kunneth_check(&e, &j, i).unwrap();
            assert!(r.passed && r.rows.is_empty());
        }
    }

    #[test]
    fn closed_forms() {
        let ctx = c3();
        let (x, y) = w_closed_form(&ctx, WFamily::W1, 4);
        assert_eq!((x.to_string(), y.to_string()), ("xi1^36".into(), "xi2^3 xi3^3".into()));
        let (x, y) = w_closed_form(&ctx, WFamily::We, 1);
        assert_eq!((x.to_string(), y.to_string()), ("xi2^9".into(), "xi4".into()));
        let (_, y) = w_closed_form(&ctx, WFamily::Wo, 5);
        assert_eq!(y.to_string(), "xi3^5");
    }
}

#[cfg(test)]
mod block_sweep {
    use super::*;

    #[test]
    fn w_blocks_up_to_five() {
        let ctx = PrimeContext::new(3).unwrap();
        for which in [WFamily::W1, WFamily::We, WFamily::Wo] {
            for n in 0..=5 {
                let r = analyse_w_block(&ctx, which, n).unwrap();
                assert!(r.passed(), "{which:?}({n}): {:?}", r.failures);
            }
        }
    }

    #[test]
    fn bp2_through_120() {
        let ctx = PrimeContext::new(3).unwrap();
        for i in 0..3 {
            let r = margolis_bp2(&ctx, i, 120).unwrap();
            assert!(r.passed(), "{:?}", r.mismatches);
        }
    }
}
