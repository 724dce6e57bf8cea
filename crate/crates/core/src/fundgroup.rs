//! The deck group `Z^2 x|_C Z` of the universal cover `R^3 -> M_C`.
//!
//! An element `(v, n)` acts by `(X, z) -> (C^n X + v, z + n)`, so
//! `(v, n)(w, m) = (v + C^n w, n + m)`. Generators:
//! `a = ((1,0),0)`, `b = ((0,1),0)`, `c = ((0,0),1)`.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::solmetric::GluingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GroupElement {
    pub v: [i64; 2],
    pub n: i64,
}

impl GroupElement {
    pub const IDENTITY: Self = Self { v: [0, 0], n: 0 };

    pub fn new(v: [i64; 2], n: i64) -> Self {
        Self { v, n }
    }

    pub fn a() -> Self {
        Self::new([1, 0], 0)
    }

    pub fn b() -> Self {
        Self::new([0, 1], 0)
    }

    pub fn c() -> Self {
        Self::new([0, 0], 1)
    }
}

/// `C^n w` exactly; `None` on overflow.
fn power_apply(gluing: &GluingMatrix, n: i64, w: [i64; 2]) -> Option<[i64; 2]> {
    let m = if n >= 0 { *gluing } else { gluing.inverse() };
    let mut out = w;
    for _ in 0..n.unsigned_abs() {
        out = m.apply_int(out)?;
    }
    Some(out)
}

/// Group law with checked arithmetic. `radius` only labels the overflow error.
pub fn multiply_at(g: &GroupElement, h: &GroupElement, gluing: &GluingMatrix, radius: usize) -> Result<GroupElement> {
    let overflow = || Error::Overflow { radius };
    let w = power_apply(gluing, g.n, h.v).ok_or_else(overflow)?;
    let v = [
        g.v[0].checked_add(w[0]).ok_or_else(overflow)?,
        g.v[1].checked_add(w[1]).ok_or_else(overflow)?,
    ];
    Ok(GroupElement::new(v, g.n.checked_add(h.n).ok_or_else(overflow)?))
}

pub fn multiply(g: &GroupElement, h: &GroupElement, gluing: &GluingMatrix) -> Result<GroupElement> {
    multiply_at(g, h, gluing, 0)
}

/// `(-C^{-n} v, -n)`.
pub fn inverse(g: &GroupElement, gluing: &GluingMatrix) -> Result<GroupElement> {
    let w = power_apply(gluing, -g.n, g.v).ok_or(Error::Overflow { radius: 0 })?;
    Ok(GroupElement::new([-w[0], -w[1]], -g.n))
}

/// `g h g^{-1} h^{-1}`.
pub fn commutator(g: &GroupElement, h: &GroupElement, gluing: &GluingMatrix) -> Result<GroupElement> {
    let gh = multiply(g, h, gluing)?;
    let ghg = multiply(&gh, &inverse(g, gluing)?, gluing)?;
    multiply(&ghg, &inverse(h, gluing)?, gluing)
}

/// Product of a word over the generators.
pub fn evaluate_word(word: &[GroupElement], gluing: &GluingMatrix) -> Result<GroupElement> {
    word.iter()
        .try_fold(GroupElement::IDENTITY, |acc, g| multiply(&acc, g, gluing))
}

/// The three presentation relations `[a,b] = 1`, `[c,a] = ab`, `[c,b] = a`
/// checked for `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relations {
    pub ab_commute: bool,
    pub ca_is_ab: bool,
    pub cb_is_a: bool,
}

impl Relations {
    pub fn all(&self) -> bool {
        self.ab_commute && self.ca_is_ab && self.cb_is_a
    }
}

pub fn check_relations(gluing: &GluingMatrix) -> Result<Relations> {
    let (a, b, c) = (GroupElement::a(), GroupElement::b(), GroupElement::c());
    let ab = multiply(&a, &b, gluing)?;
    Ok(Relations {
        ab_commute: commutator(&a, &b, gluing)? == GroupElement::IDENTITY,
        ca_is_ab: commutator(&c, &a, gluing)? == ab,
        cb_is_a: commutator(&c, &b, gluing)? == a,
    })
}

/// Ball sizes `gamma(k)` of the Cayley graph for `{a, b, c}^{+-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthTable {
    pub radii: Vec<usize>,
    pub counts: Vec<u64>,
    /// False when the element cap stopped the search early.
    pub complete: bool,
}

impl GrowthTable {
    pub fn gamma(&self, k: usize) -> Option<u64> {
        self.radii.iter().position(|&r| r == k).map(|i| self.counts[i])
    }
}

pub const DEFAULT_ELEMENT_CAP: usize = 60_000_000;

pub fn growth_function(gluing: &GluingMatrix, max_radius: usize) -> Result<GrowthTable> {
    growth_function_capped(gluing, max_radius, DEFAULT_ELEMENT_CAP)
}

/// Breadth-first search from the identity. Neighbours are `s g` for the six
/// generators `s`, which needs no matrix powers: `a^{+-1}, b^{+-1}` shift `v`,
/// `c^{+-1}` maps `v -> C^{+-1} v`.
pub fn growth_function_capped(gluing: &GluingMatrix, max_radius: usize, cap: usize) -> Result<GrowthTable> {
    if max_radius > 16 {
        return Err(Error::Precondition(format!("max_radius = {max_radius} > 16")));
    }
    let inv = gluing.inverse();
    let mut visited: HashSet<GroupElement> = HashSet::new();
    visited.insert(GroupElement::IDENTITY);
    let mut frontier = vec![GroupElement::IDENTITY];
    let mut table = GrowthTable { radii: vec![0], counts: vec![1], complete: true };

    for radius in 1..=max_radius {
        let mut next = Vec::with_capacity(frontier.len() * 4);
        let overflow = || Error::Overflow { radius };
        for g in &frontier {
            let [x, y] = g.v;
            let neighbours = [
                GroupElement::new([x.checked_add(1).ok_or_else(overflow)?, y], g.n),
                GroupElement::new([x.checked_sub(1).ok_or_else(overflow)?, y], g.n),
                GroupElement::new([x, y.checked_add(1).ok_or_else(overflow)?], g.n),
                GroupElement::new([x, y.checked_sub(1).ok_or_else(overflow)?], g.n),
                GroupElement::new(gluing.apply_int(g.v).ok_or_else(overflow)?, g.n + 1),
                GroupElement::new(inv.apply_int(g.v).ok_or_else(overflow)?, g.n - 1),
            ];
            for h in neighbours {
                if visited.insert(h) {
                    next.push(h);
                }
            }
            if visited.len() > cap {
                table.complete = false;
                return Ok(table);
            }
        }
        table.radii.push(radius);
        table.counts.push(visited.len() as u64);
        frontier = next;
    }
    Ok(table)
}

/// BFS word length of every element in the ball of the given radius.
pub fn word_lengths(gluing: &GluingMatrix, max_radius: usize) -> Result<HashMap<GroupElement, usize>> {
    let gens = [
        GroupElement::a(),
        inverse(&GroupElement::a(), gluing)?,
        GroupElement::b(),
        inverse(&GroupElement::b(), gluing)?,
        GroupElement::c(),
        inverse(&GroupElement::c(), gluing)?,
    ];
    let mut dist = HashMap::from([(GroupElement::IDENTITY, 0)]);
    let mut frontier = vec![GroupElement::IDENTITY];
    for radius in 1..=max_radius {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &gens {
                let h = multiply_at(s, g, gluing, radius)?;
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(h) {
                    e.insert(radius);
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    Ok(dist)
}

/// Least-squares slope of `ln gamma(k)` against `k` over the upper half of
/// the table.
pub fn growth_rate(table: &GrowthTable) -> Result<f64> {
    let len = table.radii.len();
    if len < 6 {
        return Err(Error::Precondition(format!("growth table has {len} radii, need >= 6")));
    }
    let points: Vec<(f64, f64)> = table.radii[len / 2..]
        .iter()
        .zip(&table.counts[len / 2..])
        .map(|(&k, &g)| (k as f64, (g as f64).ln()))
        .collect();
    Ok(least_squares_slope(&points))
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// The `2^k` words `c a^{e_1} c a^{e_2} ... c a^{e_k}`, `e_i in {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateWords {
    pub elements: Vec<GroupElement>,
    /// Number of words whose value repeats an earlier word.
    pub collisions: usize,
}

impl CertificateWords {
    pub fn all_distinct(&self) -> bool {
        self.collisions == 0
    }
}

pub fn certificate_words(gluing: &GluingMatrix, k: usize) -> Result<CertificateWords> {
    if k > 20 {
        return Err(Error::Precondition(format!("k = {k} > 20")));
    }
    let (a, c) = (GroupElement::a(), GroupElement::c());
    let mut elements = Vec::with_capacity(1 << k);
    for mask in 0u32..(1u32 << k) {
        let mut word = Vec::with_capacity(2 * k);
        for i in 0..k {
            word.push(c);
            if mask >> (k - 1 - i) & 1 == 1 {
                word.push(a);
            }
        }
        elements.push(evaluate_word(&word, gluing)?);
    }
    let distinct: HashSet<_> = elements.iter().collect();
    let collisions = elements.len() - distinct.len();
    Ok(CertificateWords { elements, collisions })
}
