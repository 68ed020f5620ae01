//! Monomials of the odd-primary dual Steenrod algebra and of its quotients
//! A//E(i)_* = F_p[ξ̄_1, ξ̄_2, …] ⊗ E(τ̄_{i+1}, τ̄_{i+2}, …).
//!
//! Gradings: |ξ̄_a| = 2(p^a − 1), |τ̄_b| = 2p^b − 1, weight p^a (resp. p^b),
//! length = number of τ̄ factors. All three are additive.

use crate::error::{Error, Result};
use crate::fp::is_prime;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeContext {
    p: u32,
}

impl PrimeContext {
    pub fn new(p: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Config("p must be an odd prime".into()));
        }
        Ok(PrimeContext { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// q = 2(p − 1).
    pub fn q(&self) -> i64 {
        2 * (self.p as i64 - 1)
    }

    pub fn power(&self, a: u32) -> u64 {
        (self.p as u64).pow(a)
    }

    /// Degree drop d_i = 2p^i − 1 of Q_i.
    pub fn q_drop(&self, i: usize) -> i64 {
        2 * self.power(i as u32) as i64 - 1
    }

    pub fn xi_degree(&self, a: u32) -> u64 {
        2 * (self.power(a) - 1)
    }

    pub fn tau_degree(&self, b: u32) -> u64 {
        2 * self.power(b) - 1
    }
}

/// Selects A//E(i)_*; `i = -1` is the whole dual Steenrod algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    i: i32,
}

impl AlgebraSpec {
    pub fn new(i: i32) -> Result<Self> {
        if i < -1 {
            return Err(Error::Config(format!("A//E({i}) is undefined; need i >= -1")));
        }
        Ok(AlgebraSpec { i })
    }

    pub fn i(&self) -> i32 {
        self.i
    }

    /// Smallest τ̄ index allowed.
    pub fn min_tau(&self) -> u32 {
        (self.i + 1) as u32
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        m.tau_indices().all(|b| b >= self.min_tau())
    }
}

/// ξ̄_1^{j_1} ξ̄_2^{j_2} ⋯ τ̄_{b_1} τ̄_{b_2} ⋯ with `xi[a-1] = j_a` (no trailing
/// zeros) and bit `b` of `tau` set when τ̄_b is present.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    xi: Vec<u32>,
    tau: u64,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial::default()
    }

    /// ξ̄_a^e; ξ̄_0 is the unit.
    pub fn xi(a: u32, e: u32) -> Self {
        let mut m = Monomial::unit();
        if a > 0 {
            m.set_xi(a, e);
        }
        m
    }

    pub fn tau(b: u32) -> Self {
        assert!(b < 64, "tau index out of range");
        Monomial { xi: Vec::new(), tau: 1 << b }
    }

    pub fn from_parts(xis: &[(u32, u32)], taus: &[u32]) -> Option<Self> {
        let mut m = Monomial::unit();
        for &(a, e) in xis {
            m = m.mul(&Monomial::xi(a, e))?;
        }
        for &b in taus {
            m = m.mul(&Monomial::tau(b))?;
        }
        Some(m)
    }

    fn set_xi(&mut self, a: u32, e: u32) {
        let idx = (a - 1) as usize;
        if self.xi.len() <= idx {
            if e == 0 {
                return;
            }
            self.xi.resize(idx + 1, 0);
        }
        self.xi[idx] = e;
        while self.xi.last() == Some(&0) {
            self.xi.pop();
        }
    }

    pub fn xi_exp(&self, a: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        self.xi.get((a - 1) as usize).copied().unwrap_or(0)
    }

    /// Exponents of ξ̄_1, ξ̄_2, … (trailing zeros trimmed).
    pub fn xi_exponents(&self) -> &[u32] {
        &self.xi
    }

    pub fn tau_mask(&self) -> u64 {
        self.tau
    }

    pub fn has_tau(&self, b: u32) -> bool {
        b < 64 && self.tau >> b & 1 == 1
    }

    /// τ̄ indices in increasing order.
    pub fn tau_indices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..64).filter(move |&b| self.tau >> b & 1 == 1)
    }

    pub fn length(&self) -> usize {
        self.tau.count_ones() as usize
    }

    pub fn is_unit(&self) -> bool {
        self.xi.is_empty() && self.tau == 0
    }

    pub fn degree(&self, ctx: &PrimeContext) -> u64 {
        let xi: u64 = self
            .xi
            .iter()
            .enumerate()
            .map(|(a, &e)| e as u64 * ctx.xi_degree(a as u32 + 1))
            .sum();
        xi + self.tau_indices().map(|b| ctx.tau_degree(b)).sum::<u64>()
    }

    pub fn weight(&self, ctx: &PrimeContext) -> u64 {
        let xi: u64 = self
            .xi
            .iter()
            .enumerate()
            .map(|(a, &e)| e as u64 * ctx.power(a as u32 + 1))
            .sum();
        xi + self.tau_indices().map(|b| ctx.power(b)).sum::<u64>()
    }

    /// Product, or `None` when a τ̄ factor repeats (the product vanishes).
    /// Signs from reordering exterior factors are not tracked here.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        if self.tau & other.tau != 0 {
            return None;
        }
        let n = self.xi.len().max(other.xi.len());
        let xi = (0..n)
            .map(|i| self.xi.get(i).unwrap_or(&0) + other.xi.get(i).unwrap_or(&0))
            .collect();
        Some(Monomial { xi, tau: self.tau | other.tau })
    }

    /// Multiply the ξ̄_a exponent part by `e` copies of ξ̄_a.
    pub fn times_xi(&self, a: u32, e: u32) -> Monomial {
        let mut m = self.clone();
        if a > 0 && e > 0 {
            let cur = m.xi_exp(a);
            m.set_xi(a, cur + e);
        }
        m
    }

    pub fn without_tau(&self, b: u32) -> Monomial {
        Monomial { xi: self.xi.clone(), tau: self.tau & !(1u64 << b) }
    }

    /// Index shift ξ̄_a ↦ ξ̄_{a+1}, τ̄_b ↦ τ̄_{b+1}.
    pub fn shift_indices(&self) -> Monomial {
        let mut xi = Vec::with_capacity(self.xi.len() + 1);
        if !self.xi.is_empty() {
            xi.push(0);
            xi.extend_from_slice(&self.xi);
        }
        assert!(self.tau >> 63 == 0, "tau index out of range");
        Monomial { xi, tau: self.tau << 1 }
    }
}

/// Canonical total order: degree, then weight, then exponents lexicographically.
pub fn canonical_cmp(ctx: &PrimeContext, a: &Monomial, b: &Monomial) -> Ordering {
    a.degree(ctx)
        .cmp(&b.degree(ctx))
        .then(a.weight(ctx).cmp(&b.weight(ctx)))
        .then_with(|| a.cmp(b))
}

pub fn sort_canonical(ctx: &PrimeContext, ms: &mut [Monomial]) {
    ms.sort_by(|a, b| canonical_cmp(ctx, a, b));
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let mut tokens = Vec::new();
        for (a, &e) in self.xi.iter().enumerate() {
            match e {
                0 => {}
                1 => tokens.push(format!("xi{}", a + 1)),
                _ => tokens.push(format!("xi{}^{e}", a + 1)),
            }
        }
        for b in self.tau_indices() {
            tokens.push(format!("tau{b}"));
        }
        write!(f, "{}", tokens.join(" "))
    }
}

impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |t: &str| Error::Malformed(format!("bad monomial token `{t}`"));
        let mut m = Monomial::unit();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let factor = if let Some(rest) = tok.strip_prefix("xi") {
                let (a, e) = match rest.split_once('^') {
                    Some((a, e)) => (a, e.parse::<u32>().map_err(|_| bad(tok))?),
                    None => (rest, 1),
                };
                let a: u32 = a.parse().map_err(|_| bad(tok))?;
                if a == 0 {
                    return Err(bad(tok));
                }
                Monomial::xi(a, e)
            } else if let Some(rest) = tok.strip_prefix("tau") {
                let b: u32 = rest.parse().map_err(|_| bad(tok))?;
                if b >= 63 {
                    return Err(bad(tok));
                }
                Monomial::tau(b)
            } else {
                return Err(bad(tok));
            };
            m = m
                .mul(&factor)
                .ok_or_else(|| Error::Malformed(format!("repeated exterior factor in `{s}`")))?;
        }
        Ok(m)
    }
}

/// A multiplicative generator used by the enumerators: either polynomial
/// (any exponent) or exterior (exponent 0 or 1).
#[derive(Clone, Debug)]
pub struct Generator {
    pub mono: Monomial,
    pub degree: u64,
    pub weight: u64,
    pub exterior: bool,
}

impl Generator {
    pub fn new(ctx: &PrimeContext, mono: Monomial, exterior: bool) -> Self {
        let degree = mono.degree(ctx);
        let weight = mono.weight(ctx);
        assert!(degree > 0 && weight > 0, "generators must have positive degree and weight");
        Generator { mono, degree, weight, exterior }
    }
}

/// All products of `gens` whose (degree, weight) satisfies `keep`. `fits` must
/// be monotone (false stays false as factors are added) and is used to prune.
pub fn enumerate_products(
    gens: &[Generator],
    fits: &dyn Fn(u64, u64) -> bool,
    keep: &dyn Fn(u64, u64) -> bool,
) -> Vec<Monomial> {
    fn go(
        gens: &[Generator],
        idx: usize,
        cur: Monomial,
        deg: u64,
        wt: u64,
        fits: &dyn Fn(u64, u64) -> bool,
        keep: &dyn Fn(u64, u64) -> bool,
        out: &mut Vec<Monomial>,
    ) {
        if idx == gens.len() {
            if keep(deg, wt) {
                out.push(cur);
            }
            return;
        }
        let g = &gens[idx];
        let max_e = if g.exterior { 1 } else { u32::MAX };
        let (mut m, mut d, mut w) = (cur, deg, wt);
        let mut e = 0;
        loop {
            go(gens, idx + 1, m.clone(), d, w, fits, keep, out);
            if e == max_e || !fits(d + g.degree, w + g.weight) {
                break;
            }
            match m.mul(&g.mono) {
                Some(next) => m = next,
                None => break,
            }
            (d, w, e) = (d + g.degree, w + g.weight, e + 1);
        }
    }
    let mut out = Vec::new();
    if fits(0, 0) {
        go(gens, 0, Monomial::unit(), 0, 0, fits, keep, &mut out);
    }
    out
}

/// Generators of A//E(i)_* with degree ≤ `max_degree` and weight ≤ `max_weight`.
pub fn algebra_generators(
    ctx: &PrimeContext,
    spec: AlgebraSpec,
    max_degree: u64,
    max_weight: u64,
) -> Vec<Generator> {
    let mut gens = Vec::new();
    let mut a = 1;
    while ctx.xi_degree(a) <= max_degree && ctx.power(a) <= max_weight {
        gens.push(Generator::new(ctx, Monomial::xi(a, 1), false));
        a += 1;
    }
    let mut b = spec.min_tau();
    while b < 62 && ctx.tau_degree(b) <= max_degree && ctx.power(b) <= max_weight {
        gens.push(Generator::new(ctx, Monomial::tau(b), true));
        b += 1;
    }
    gens
}

/// All monomials of A//E(i)_* of degree ≤ `max_degree`, canonically ordered.
pub fn enumerate_by_degree(ctx: &PrimeContext, spec: AlgebraSpec, max_degree: u64) -> Vec<Monomial> {
    let gens = algebra_generators(ctx, spec, max_degree, u64::MAX);
    let fits = |d: u64, _w: u64| d <= max_degree;
    let mut out = enumerate_products(&gens, &fits, &fits);
    sort_canonical(ctx, &mut out);
    out
}

/// All monomials of A//E(i)_* of weight exactly `weight`.
pub fn enumerate_by_weight(ctx: &PrimeContext, spec: AlgebraSpec, weight: u64) -> Vec<Monomial> {
    let gens = algebra_generators(ctx, spec, u64::MAX, weight);
    let mut out = enumerate_products(&gens, &|_, w| w <= weight, &|_, w| w == weight);
    sort_canonical(ctx, &mut out);
    out
}

/// All monomials of A//E(i)_* of weight at most `weight`.
pub fn enumerate_weight_at_most(ctx: &PrimeContext, spec: AlgebraSpec, weight: u64) -> Vec<Monomial> {
    let gens = algebra_generators(ctx, spec, u64::MAX, weight);
    let fits = |_d: u64, w: u64| w <= weight;
    let mut out = enumerate_products(&gens, &fits, &fits);
    sort_canonical(ctx, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn names(ms: &[Monomial]) -> Vec<String> {
        ms.iter().map(|m| m.to_string()).collect()
    }

    #[test]
    fn gradings() {
        let c3 = ctx(3);
        assert_eq!(mono("xi1").degree(&c3), 4);
        assert_eq!(mono("tau2").degree(&c3), 17);
        assert_eq!(Monomial::unit().degree(&c3), 0);
        assert_eq!(mono("xi1^2 tau3").weight(&ctx(5)), 135);
        assert_eq!(mono("xi1^3").weight(&c3), 9);
        assert_eq!(Monomial::unit().weight(&c3), 0);
        assert_eq!(mono("xi1^4").length(), 0);
        assert_eq!(mono("tau2 tau3").length(), 2);
        assert_eq!(mono("xi2 tau4").length(), 1);
    }

    #[test]
    fn text_form_round_trips() {
        for s in ["1", "xi1^3 xi2 tau2", "tau0 tau5", "xi4^11"] {
            assert_eq!(mono(s).to_string(), s);
        }
        assert!("tau2 tau2".parse::<Monomial>().is_err());
        assert!("xi0".parse::<Monomial>().is_err());
        assert!("eta".parse::<Monomial>().is_err());
    }

    #[test]
    fn degree_enumeration_examples() {
        let c3 = ctx(3);
        let e = |i, d| names(&enumerate_by_degree(&c3, AlgebraSpec::new(i).unwrap(), d));
        assert_eq!(e(2, 4), ["1", "xi1"]);
        // ξ̄_1^4 and ξ̄_2 both sit in degree 16; ξ̄_2 has the smaller weight.
        assert_eq!(e(1, 17), ["1", "xi1", "xi1^2", "xi1^3", "xi2", "xi1^4", "tau2"]);
        assert_eq!(e(-1, 0), ["1"]);
        assert_eq!(e(-1, 1), ["1", "tau0"]);
    }

    #[test]
    fn weight_enumeration_examples() {
        let c3 = ctx(3);
        let w = |i, k| names(&enumerate_by_weight(&c3, AlgebraSpec::new(i).unwrap(), k));
        assert_eq!(w(1, 9), ["xi1^3", "xi2", "tau2"]);
        assert_eq!(
            w(2, 27),
            ["xi1^9", "xi1^6 xi2", "xi1^3 xi2^2", "xi2^3", "xi3", "tau3"]
        );
        assert_eq!(w(1, 0), ["1"]);
    }

    #[test]
    fn bad_primes_rejected() {
        for p in [0, 1, 2, 4, 9, 15] {
            assert!(PrimeContext::new(p).is_err());
        }
    }
}
