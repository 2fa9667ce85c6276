//! The graded poset of pairs (composition, permutation) whose maximal
//! elements index the irreducible components of the separating variety
//! for simultaneous conjugation of matrix tuples.
//!
//! The covering relation is the primitive: merging two adjacent blocks
//! whose permutation values are consecutive, with the one-line notation
//! contracted accordingly. The full order is the reflexive-transitive
//! closure of the covers, which steps rank by exactly one. The poset
//! depends on the number of matrices `n` only through the regime flag
//! (`n = 2` admits extra merges at unit-size ascending positions); exact
//! `n` enters dimension arithmetic only.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::Serialize;

use crate::combinatorics::{
    ascending_unit_positions, binomial, enumerate_compositions, enumerate_permutations,
    star_compose, star_decompose, Composition, Permutation,
};
use crate::error::{Error, Result};

/// Structural regime: the covering relation (and hence maximality) only
/// distinguishes `n = 2` from `n >= 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    TwoMatrices,
    ThreeOrMore,
}

impl Regime {
    pub fn from_n(n: u32) -> Result<Regime> {
        match n {
            0 | 1 => Err(Error::param(format!("n must be at least 2, got {n}"))),
            2 => Ok(Regime::TwoMatrices),
            _ => Ok(Regime::ThreeOrMore),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::TwoMatrices => "n=2",
            Regime::ThreeOrMore => "n>=3",
        }
    }
}

/// A pair (composition, permutation) with matching rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PosetElement {
    pi: Composition,
    sigma: Permutation,
}

impl PosetElement {
    pub fn new(pi: Composition, sigma: Permutation) -> Result<Self> {
        if sigma.degree() != pi.rank() {
            return Err(Error::param(format!(
                "permutation degree {} does not match composition rank {}",
                sigma.degree(),
                pi.rank()
            )));
        }
        Ok(PosetElement { pi, sigma })
    }

    pub fn pi(&self) -> &Composition {
        &self.pi
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    pub fn rank(&self) -> usize {
        self.pi.rank()
    }

    /// Node label used in diagrams, e.g. `2·1|[2,1]`.
    pub fn label(&self) -> String {
        format!("{}|{}", self.pi.label(), self.sigma.one_line())
    }
}

impl PartialOrd for PosetElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PosetElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.pi.cmp(&other.pi))
            .then_with(|| self.sigma.cmp(&other.sigma))
    }
}

/// The covering parents of an element: one per descending position of the
/// permutation and, in the two-matrix regime, one per ascending position
/// whose two parts both have size 1. Merging positions `l, l+1` of the
/// composition contracts the one-line notation by deleting position
/// `l+1`, writing the smaller merged value `m` at position `l`, and
/// decrementing every remaining value above `m+1`.
pub fn covering_parents(e: &PosetElement, regime: Regime) -> Vec<PosetElement> {
    let mut out = Vec::new();
    for l in e.sigma.descending_positions() {
        let m = e.sigma.image(l + 1);
        out.push(merge_parent(e, l, m));
    }
    if regime == Regime::TwoMatrices {
        for l in ascending_unit_positions(&e.sigma, &e.pi).expect("rank checked at construction") {
            let m = e.sigma.image(l);
            out.push(merge_parent(e, l, m));
        }
    }
    out.sort();
    out.dedup();
    out
}

fn merge_parent(e: &PosetElement, l: usize, m: u32) -> PosetElement {
    let pihat = e.pi.merge_blocks(l).expect("position from a valid scan");
    let mut images: Vec<u32> = e.sigma.images().to_vec();
    images.remove(l); // one-line position l+1 is index l
    images[l - 1] = m;
    for v in images.iter_mut() {
        if *v > m + 1 {
            *v -= 1;
        }
    }
    let sigma_hat = Permutation::new(images).expect("contraction of a permutation");
    PosetElement::new(pihat, sigma_hat).expect("merge preserves rank match")
}

/// Whether the element is maximal according to the substring criteria:
/// no descending consecutive pair, and for `n = 2` additionally no
/// ascending consecutive pair across two unit-size parts.
pub fn is_maximal_by_criterion(e: &PosetElement, regime: Regime) -> bool {
    if !e.sigma.descending_positions().is_empty() {
        return false;
    }
    match regime {
        Regime::ThreeOrMore => true,
        Regime::TwoMatrices => ascending_unit_positions(&e.sigma, &e.pi)
            .expect("rank checked at construction")
            .is_empty(),
    }
}

/// Default size guard for poset construction; the element count grows
/// like sum_k C(p-1,k-1) k!.
pub const DEFAULT_MAX_P: u32 = 7;

#[derive(Clone, Debug)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn new(len: usize) -> Self {
        BitRow(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    fn union_with(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

/// The full poset for a given total `p` and regime: all elements grouped
/// by rank, covering edges, and memoized upward reachability.
#[derive(Debug)]
pub struct Poset {
    p: u32,
    regime: Regime,
    elements: Vec<PosetElement>,
    index: HashMap<PosetElement, usize>,
    parents: Vec<Vec<usize>>,
    ancestors: Vec<BitRow>,
    edge_count: usize,
}

/// Build the poset with the default size guard.
pub fn build_poset(p: u32, regime: Regime) -> Result<Poset> {
    build_poset_with_guard(p, regime, DEFAULT_MAX_P)
}

/// Build the poset with an explicit size guard override.
pub fn build_poset_with_guard(p: u32, regime: Regime, max_p: u32) -> Result<Poset> {
    if p == 0 {
        return Err(Error::param("poset requires p >= 1"));
    }
    if p > max_p {
        return Err(Error::param(format!(
            "p = {p} exceeds the guard {max_p}; the element count grows factorially"
        )));
    }

    let mut elements = Vec::new();
    for k in 1..=p {
        let comps = enumerate_compositions(p, k)?;
        let perms = enumerate_permutations(k as usize);
        let expected = binomial(p as u64 - 1, k as u64 - 1)? as usize * perms.len();
        let before = elements.len();
        for pi in &comps {
            for sigma in &perms {
                elements.push(PosetElement::new(pi.clone(), sigma.clone())?);
            }
        }
        debug_assert_eq!(elements.len() - before, expected);
    }
    // The loops above emit elements already sorted by (rank, pi, sigma).
    debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));

    let index: HashMap<PosetElement, usize> = elements
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();

    let mut parents = Vec::with_capacity(elements.len());
    let mut edge_count = 0;
    for e in &elements {
        let mut ps: Vec<usize> = covering_parents(e, regime)
            .into_iter()
            .map(|parent| {
                debug_assert_eq!(parent.rank() + 1, e.rank());
                *index.get(&parent).expect("parent enumerated at lower rank")
            })
            .collect();
        ps.sort_unstable();
        edge_count += ps.len();
        parents.push(ps);
    }

    // Parents sit at lower rank, hence at smaller indices; one forward
    // pass closes the reachability.
    let mut ancestors: Vec<BitRow> = Vec::with_capacity(elements.len());
    for (i, ps) in parents.iter().enumerate() {
        let mut row = BitRow::new(elements.len());
        for &par in ps {
            debug_assert!(par < i);
            row.set(par);
            row.union_with(&ancestors[par]);
        }
        ancestors.push(row);
    }

    Ok(Poset {
        p,
        regime,
        elements,
        index,
        parents,
        ancestors,
        edge_count,
    })
}

impl Poset {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn elements(&self) -> &[PosetElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn index_of(&self, e: &PosetElement) -> Result<usize> {
        self.index
            .get(e)
            .copied()
            .ok_or_else(|| Error::param(format!("element {} is not in this poset", e.label())))
    }

    pub fn parents_of(&self, e: &PosetElement) -> Result<Vec<&PosetElement>> {
        let i = self.index_of(e)?;
        Ok(self.parents[i].iter().map(|&j| &self.elements[j]).collect())
    }

    /// Whether `a` is below `b`: equal, or `b` reachable from `a` along
    /// covering edges.
    pub fn leq(&self, a: &PosetElement, b: &PosetElement) -> Result<bool> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        Ok(ia == ib || self.ancestors[ia].get(ib))
    }

    /// Elements with no covering parent, in (rank, pi, sigma) order.
    pub fn maximal_elements(&self) -> Vec<&PosetElement> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(i, _)| self.parents[*i].is_empty())
            .map(|(_, e)| e)
            .collect()
    }
}

/// Cache of built posets keyed by (total, regime); used by bulk
/// compatibility checks to avoid rebuilding small posets.
#[derive(Default)]
pub struct PosetCache {
    map: HashMap<(u32, Regime), Poset>,
}

impl PosetCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(&mut self, p: u32, regime: Regime) -> Result<&Poset> {
        match self.map.entry((p, regime)) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(v) => Ok(v.insert(build_poset(p, regime)?)),
        }
    }
}

/// Decide `a <= b` from first principles: the composition of `a` must
/// refine that of `b`, the permutation of `a` must factor through
/// `star_compose` over the grouping, and each within-group pair must
/// reach the one-block top element of its own (smaller) poset. This is
/// the independent route against which the closure order is validated.
pub fn compatibility_check(a: &PosetElement, b: &PosetElement, regime: Regime) -> Result<bool> {
    let mut cache = PosetCache::new();
    compatibility_check_with(a, b, regime, &mut cache)
}

/// `compatibility_check` with a caller-owned poset cache.
pub fn compatibility_check_with(
    a: &PosetElement,
    b: &PosetElement,
    regime: Regime,
    cache: &mut PosetCache,
) -> Result<bool> {
    if a.pi().total() != b.pi().total() {
        return Err(Error::param(format!(
            "elements of different totals: {} vs {}",
            a.pi().total(),
            b.pi().total()
        )));
    }
    if a.rank() < b.rank() {
        return Err(Error::param(
            "compatibility requires rank(a) >= rank(b)".to_string(),
        ));
    }

    let sizes = match a.pi().grouping(b.pi())? {
        Some(sizes) => sizes,
        None => return Ok(false),
    };

    // Solve for the within-group permutations; when sigma does not factor
    // through the grouping there is nothing to check.
    let taus = match star_decompose(&sizes, b.sigma(), a.sigma())? {
        Some(taus) => taus,
        None => return Ok(false),
    };
    debug_assert_eq!(
        star_compose(&sizes, b.sigma(), &taus)?,
        *a.sigma(),
        "solved taus must reproduce sigma"
    );

    // Each within-group pair must degenerate to the one-block element of
    // its own poset.
    let mut start = 0usize;
    for (i, (&size, tau)) in sizes.iter().zip(&taus).enumerate() {
        let phat = b.pi().parts()[i];
        let kappa = Composition::new(a.pi().parts()[start..start + size].to_vec())?;
        start += size;
        let sub = cache.get_or_build(phat, regime)?;
        let child = PosetElement::new(kappa, tau.clone())?;
        let top = PosetElement::new(Composition::singleton(phat)?, Permutation::identity(1))?;
        if !sub.leq(&child, &top)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-component dimension data for the separating variety of `n`-tuples
/// of `p x p` matrices, with the derived bounds.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentEntry {
    pub pi: Vec<u32>,
    pub sigma: Vec<u32>,
    pub dim: u64,
    pub codim: u32,
}

/// Dimension report: one entry per irreducible component (maximal poset
/// element), plus the headline quantities.
///
/// The semi-invariant fields apply to the left-right action on the same
/// matrix space and are only defined for `n >= 3`; they are `None` for
/// `n = 2`.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub p: u32,
    pub n: u32,
    pub total_dim: u64,
    pub sdim: u64,
    pub separating_lower_bound: u64,
    pub invariant_ring_dim: u64,
    pub semi_invariant_dim: Option<u64>,
    pub semi_invariant_lower_bound: Option<u64>,
    pub components: Vec<ComponentEntry>,
    pub counts_by_codim: BTreeMap<u32, u64>,
}

/// Compute the component report for given `p >= 2`, `n >= 2`.
///
/// A component of rank `k` has dimension `(n+1)p^2 - k`; the whole
/// variety has dimension `(n+1)p^2 - 1`; a separating set has at least
/// `2np^2 - sdim` elements; the invariant ring has dimension
/// `(n-1)p^2 + 1`; for `n >= 3` the semi-invariant ring has dimension
/// `(n-2)p^2 + 2` and its separating sets at least `(n-2)p^2 + p`
/// elements.
pub fn component_report(p: u32, n: u32) -> Result<ComponentReport> {
    if p < 2 {
        return Err(Error::param(format!(
            "component report requires p >= 2, got {p}"
        )));
    }
    let regime = Regime::from_n(n)?;
    let poset = build_poset(p, regime)?;
    let psq = (p as u64) * (p as u64);
    let nn = n as u64;

    let mut components = Vec::new();
    let mut counts_by_codim: BTreeMap<u32, u64> = BTreeMap::new();
    let mut max_rank = 0usize;
    for e in poset.maximal_elements() {
        let k = e.rank();
        max_rank = max_rank.max(k);
        let codim = (k - 1) as u32;
        components.push(ComponentEntry {
            pi: e.pi().parts().to_vec(),
            sigma: e.sigma().images().to_vec(),
            dim: (nn + 1) * psq - k as u64,
            codim,
        });
        *counts_by_codim.entry(codim).or_insert(0) += 1;
    }
    // Maximal elements arrive in (rank, pi, sigma) order, which is
    // exactly (codim, pi lex, sigma lex).
    debug_assert!(components
        .windows(2)
        .all(|w| { (w[0].codim, &w[0].pi, &w[0].sigma) < (w[1].codim, &w[1].pi, &w[1].sigma) }));

    let total_dim = (nn + 1) * psq - 1;
    let sdim = (nn + 1) * psq - max_rank as u64;
    let separating_lower_bound = 2 * nn * psq - sdim;
    let invariant_ring_dim = (nn - 1) * psq + 1;
    let (semi_invariant_dim, semi_invariant_lower_bound) = if n >= 3 {
        (Some((nn - 2) * psq + 2), Some((nn - 2) * psq + p as u64))
    } else {
        (None, None)
    };

    Ok(ComponentReport {
        p,
        n,
        total_dim,
        sdim,
        separating_lower_bound,
        invariant_ring_dim,
        semi_invariant_dim,
        semi_invariant_lower_bound,
        components,
        counts_by_codim,
    })
}

/// Render the Hasse diagram in DOT syntax, one node per element and one
/// edge per covering pair oriented parent -> child. Passing the exact
/// `n` labels the graph with it; otherwise the regime label is used.
pub fn hasse_dot(poset: &Poset, n_label: Option<u32>) -> String {
    let title = match n_label {
        Some(n) => format!("P({},{})", poset.p(), n),
        None => format!("P({},{})", poset.p(), poset.regime().label()),
    };
    let mut s = String::new();
    s.push_str("digraph poset {\n");
    s.push_str(&format!("  label=\"{title}\";\n"));
    s.push_str("  labelloc=\"t\";\n");
    s.push_str("  node [shape=box];\n");
    for (i, e) in poset.elements().iter().enumerate() {
        s.push_str(&format!("  n{} [label=\"{}\"];\n", i, e.label()));
    }
    for (child, ps) in poset.parents.iter().enumerate() {
        for &parent in ps {
            s.push_str(&format!("  n{parent} -> n{child};\n"));
        }
    }
    s.push_str("}\n");
    s
}
