//! Partite hypergraphs built from chains of nested subsets, and density
//! evaluation against product kernels.
//!
//! The two central constructions take a degree-weight vector alpha with
//! multiplicities `beta_k = alpha_k / C(m-k, r-k)`:
//!
//! * `g_chain(r, alpha)`: classes are `[r]` at level 0 and, for each level
//!   `k >= 1` with `beta_k > 0`, `beta_k` labelled copies of every
//!   `k`-subset of `[r]`. Edges are the chains: tuples whose subsets are
//!   nested across the present levels, with the level-0 element inside the
//!   smallest subset.
//! * `h_chain(m, r, alpha)`: the same with one copy of the level structure
//!   for every `r`-subset F of `[m]` (the host), all sharing level 0 `[m]`.
//!
//! A product kernel pairs a base graphon with one exponent per nonzero
//! level; the kernel value on an edge `(x, z_1, .., z_t)` is
//! `prod_j W(x, z_j)^(q_j)`. With the exponents from `product_kernel` the
//! accumulated exponent of every incident (level-0, level-k) pair is exactly
//! one, which is what makes the weighted density of the downset graph equal
//! to the hypergraph density.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combi::k_subsets;
use crate::error::{Error, Result};
use crate::graphon::{for_each_assignment, pow_terms, StepGraphon};
use crate::graphs::WeightVector;
use crate::qarith::{binomial, format_rat, parse_rat, rat_biguint, Rat};
use crate::value::{DensityValue, Evaluator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartiteHypergraph {
    levels: Vec<usize>,
    classes: Vec<Vec<String>>,
    edges: Vec<Vec<usize>>,
}

impl PartiteHypergraph {
    /// `levels` are strictly increasing; `classes[i]` is the nonempty label
    /// list of the class at `levels[i]`; every edge picks one vertex per
    /// class. Duplicate edges and duplicate labels within a class are
    /// rejected.
    pub fn new(
        levels: Vec<usize>,
        classes: Vec<Vec<String>>,
        edges: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("hypergraph", "no levels"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("hypergraph", "levels must strictly increase"));
        }
        if classes.len() != levels.len() {
            return Err(Error::invalid("hypergraph", "one class per level required"));
        }
        for (i, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::invalid(
                    "hypergraph",
                    format!("class at level {} is empty", levels[i]),
                ));
            }
            let distinct: BTreeSet<&String> = class.iter().collect();
            if distinct.len() != class.len() {
                return Err(Error::invalid(
                    "hypergraph",
                    format!("repeated label in class at level {}", levels[i]),
                ));
            }
        }
        let mut seen = BTreeSet::new();
        for edge in &edges {
            if edge.len() != levels.len() {
                return Err(Error::invalid("hypergraph", "edge misses a level"));
            }
            for (i, &v) in edge.iter().enumerate() {
                if v >= classes[i].len() {
                    return Err(Error::invalid(
                        "hypergraph",
                        format!("edge index {v} out of range at level {}", levels[i]),
                    ));
                }
            }
            if !seen.insert(edge.clone()) {
                return Err(Error::invalid("hypergraph", "duplicate edge"));
            }
        }
        Ok(PartiteHypergraph {
            levels,
            classes,
            edges,
        })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, i: usize) -> &[String] {
        &self.classes[i]
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Restriction to the given vertices (`keep[i]` lists retained indices
    /// of class `i`, ascending): retained vertices keep their labels, edges
    /// survive when all their endpoints do.
    pub fn induced(&self, keep: &[Vec<usize>]) -> Result<PartiteHypergraph> {
        if keep.len() != self.classes.len() {
            return Err(Error::invalid("hypergraph", "one keep list per class required"));
        }
        let mut classes = Vec::with_capacity(keep.len());
        let mut remap: Vec<HashMap<usize, usize>> = Vec::with_capacity(keep.len());
        for (i, kept) in keep.iter().enumerate() {
            let mut map = HashMap::new();
            let mut labels = Vec::with_capacity(kept.len());
            for (new_idx, &old_idx) in kept.iter().enumerate() {
                if old_idx >= self.classes[i].len() {
                    return Err(Error::invalid("hypergraph", "keep index out of range"));
                }
                if map.insert(old_idx, new_idx).is_some() {
                    return Err(Error::invalid("hypergraph", "keep index repeated"));
                }
                labels.push(self.classes[i][old_idx].clone());
            }
            classes.push(labels);
            remap.push(map);
        }
        let mut edges = Vec::new();
        'edges: for edge in &self.edges {
            let mut mapped = Vec::with_capacity(edge.len());
            for (i, &v) in edge.iter().enumerate() {
                match remap[i].get(&v) {
                    Some(&new_v) => mapped.push(new_v),
                    None => continue 'edges,
                }
            }
            edges.push(mapped);
        }
        PartiteHypergraph::new(self.levels.clone(), classes, edges)
    }

    /// Index of each class vertex by label, for subset checks.
    fn label_index(&self) -> Vec<HashMap<&str, usize>> {
        self.classes
            .iter()
            .map(|class| {
                class
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i))
                    .collect()
            })
            .collect()
    }
}

impl Serialize for PartiteHypergraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            levels: &'a [usize],
            classes: &'a [Vec<String>],
            edges: Vec<EdgeRepr<'a>>,
        }
        struct EdgeRepr<'a> {
            levels: &'a [usize],
            edge: &'a [usize],
        }
        impl Serialize for EdgeRepr<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.edge.len()))?;
                for (level, v) in self.levels.iter().zip(self.edge) {
                    map.serialize_entry(&level.to_string(), v)?;
                }
                map.end()
            }
        }
        Repr {
            levels: &self.levels,
            classes: &self.classes,
            edges: self
                .edges
                .iter()
                .map(|edge| EdgeRepr {
                    levels: &self.levels,
                    edge,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PartiteHypergraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            levels: Vec<usize>,
            classes: Vec<Vec<String>>,
            edges: Vec<BTreeMap<String, usize>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut edges = Vec::with_capacity(repr.edges.len());
        for raw in &repr.edges {
            let mut edge = Vec::with_capacity(repr.levels.len());
            for level in &repr.levels {
                match raw.get(&level.to_string()) {
                    Some(&v) => edge.push(v),
                    None => {
                        return Err(D::Error::custom(format!("edge misses level {level}")));
                    }
                }
            }
            if raw.len() != repr.levels.len() {
                return Err(D::Error::custom("edge names an absent level"));
            }
            edges.push(edge);
        }
        PartiteHypergraph::new(repr.levels, repr.classes, edges).map_err(D::Error::custom)
    }
}

/// `beta_k = alpha_k / C(m-k, r-k)` for `k = 1..=r`; every quotient must be
/// a nonnegative integer and `beta_r` must be positive.
pub fn chain_multiplicities(m: usize, r: usize, alpha: &WeightVector) -> Result<Vec<u64>> {
    if r == 0 || r > m {
        return Err(Error::invalid(
            "chain weights",
            format!("need 1 <= r <= m, got r={r}, m={m}"),
        ));
    }
    if alpha.max_degree() > r {
        return Err(Error::invalid(
            "chain weights",
            format!("weight at degree {} exceeds r={r}", alpha.max_degree()),
        ));
    }
    let mut beta = Vec::with_capacity(r);
    for k in 1..=r {
        let required = rat_biguint(binomial(m - k, r - k));
        let alpha_k = alpha.get(k);
        let quotient = &alpha_k / &required;
        if !quotient.denom().is_one() {
            return Err(Error::Divisibility {
                k,
                required: format_rat(&required),
                value: format_rat(&alpha_k),
            });
        }
        beta.push(
            num_traits::ToPrimitive::to_u64(quotient.numer()).ok_or_else(|| {
                Error::invalid("chain weights", format!("multiplicity at degree {k} too large"))
            })?,
        );
    }
    if beta[r - 1] == 0 {
        return Err(Error::invalid(
            "chain weights",
            "weight at the top degree must be positive",
        ));
    }
    Ok(beta)
}

fn subset_label(set: &[usize]) -> String {
    let parts: Vec<String> = set.iter().map(|&v| (v + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Shared chain construction. Each host is an `r`-subset of `[m]`; for
/// `m == r` there is a single host and labels omit it. Returns the
/// hypergraph and, per class, the vertex indices lying over the first host
/// `{0, .., r-1}`.
fn chain_hypergraph(m: usize, r: usize, beta: &[u64]) -> (PartiteHypergraph, Vec<Vec<usize>>) {
    let single_host = m == r;
    let present: Vec<usize> = (1..=r).filter(|&k| beta[k - 1] > 0).collect();
    let levels: Vec<usize> = std::iter::once(0).chain(present.iter().copied()).collect();

    let mut classes = vec![(1..=m).map(|i| i.to_string()).collect::<Vec<_>>()];
    let mut window = vec![(0..r).collect::<Vec<usize>>()];

    let hosts = k_subsets(m, r);
    // Vertex lookup per present level: (host index, subset, copy) -> index.
    let mut lookup: Vec<HashMap<(usize, Vec<usize>, u64), usize>> = Vec::new();
    for &k in &present {
        let mut labels = Vec::new();
        let mut map = HashMap::new();
        let mut first_host = Vec::new();
        for (hi, host) in hosts.iter().enumerate() {
            for rel in k_subsets(r, k) {
                let subset: Vec<usize> = rel.iter().map(|&i| host[i]).collect();
                for copy in 1..=beta[k - 1] {
                    let label = if single_host {
                        format!("{}#{copy}", subset_label(&subset))
                    } else {
                        format!("F{}:{}#{copy}", subset_label(host), subset_label(&subset))
                    };
                    let idx = labels.len();
                    labels.push(label);
                    map.insert((hi, subset.clone(), copy), idx);
                    if hi == 0 {
                        first_host.push(idx);
                    }
                }
            }
        }
        classes.push(labels);
        lookup.push(map);
        window.push(first_host);
    }

    // Edges: per host, all nested subset chains over the present levels,
    // with the level-0 element inside the smallest subset, times copies.
    let mut edges = Vec::new();
    for (hi, host) in hosts.iter().enumerate() {
        let mut chain: Vec<Vec<usize>> = Vec::new();
        build_chains(host, &present, present.len(), &mut chain, &mut |chain| {
            let smallest = chain.last().expect("present includes r");
            for &u0 in smallest {
                let mut copy_counters = vec![1u64; present.len()];
                'copies: loop {
                    let mut edge = vec![u0];
                    for (pi, subset) in chain.iter().rev().enumerate() {
                        let idx = lookup[pi][&(hi, subset.clone(), copy_counters[pi])];
                        edge.push(idx);
                    }
                    edges.push(edge);
                    // Advance the copy odometer.
                    let mut pi = 0;
                    loop {
                        if pi == present.len() {
                            break 'copies;
                        }
                        copy_counters[pi] += 1;
                        if copy_counters[pi] <= beta[present[pi] - 1] {
                            break;
                        }
                        copy_counters[pi] = 1;
                        pi += 1;
                    }
                }
            }
        });
    }

    let graph = PartiteHypergraph::new(levels, classes, edges).expect("construction is canonical");
    (graph, window)
}

/// Enumerates nested subset chains of the host from the top level down;
/// `chain` collects subsets for the present levels in descending order.
fn build_chains(
    host: &[usize],
    present: &[usize],
    depth_left: usize,
    chain: &mut Vec<Vec<usize>>,
    emit: &mut impl FnMut(&Vec<Vec<usize>>),
) {
    if depth_left == 0 {
        emit(chain);
        return;
    }
    let level = present[depth_left - 1];
    let ambient: Vec<usize> = if chain.is_empty() {
        host.to_vec()
    } else {
        chain.last().expect("nonempty").clone()
    };
    for rel in k_subsets(ambient.len(), level) {
        let subset: Vec<usize> = rel.iter().map(|&i| ambient[i]).collect();
        chain.push(subset);
        build_chains(host, present, depth_left - 1, chain, emit);
        chain.pop();
    }
}

/// Chain hypergraph over the single host `[r]`; weights must already be
/// integral multiplicities.
pub fn g_chain(r: usize, alpha: &WeightVector) -> Result<PartiteHypergraph> {
    let beta = chain_multiplicities(r, r, alpha)?;
    Ok(chain_hypergraph(r, r, &beta).0)
}

/// Chain hypergraph spread over all `r`-subsets of `[m]`.
pub fn h_chain(m: usize, r: usize, alpha: &WeightVector) -> Result<PartiteHypergraph> {
    Ok(h_chain_with_window(m, r, alpha)?.0)
}

/// Also returns, per class, the vertex indices lying over the first host;
/// the restriction to that window is a copy of the single-host chain graph.
pub fn h_chain_with_window(
    m: usize,
    r: usize,
    alpha: &WeightVector,
) -> Result<(PartiteHypergraph, Vec<Vec<usize>>)> {
    let beta = chain_multiplicities(m, r, alpha)?;
    Ok(chain_hypergraph(m, r, &beta))
}

/// Number of nested subset chains over the present levels passing through a
/// fixed element at level 0 and a fixed `k`-subset at level `k` (one copy
/// per level). With all levels present this is `(k-1)! (r-k)!`.
pub fn chains_through_pair(r: usize, present: &[usize], k: usize) -> BigUint {
    let mut count = BigUint::one();
    // Below k: sizes j_1 < .. < j_a, sets nested inside the k-set and
    // containing the fixed element.
    let mut prev = 1usize; // size of {element}
    for &j in present.iter().filter(|&&j| j < k) {
        count *= binomial(k - prev, j - prev);
        prev = j;
    }
    // Above k: sizes h_1 < .. < h_b up to r, sets containing the k-set.
    let mut prev = k;
    for &h in present.iter().filter(|&&h| h > k) {
        count *= binomial(r - prev, h - prev);
        prev = h;
    }
    count
}

/// A kernel `W_q(x, z_1, .., z_t) = prod_j W(x, z_j)^(q_j)` over a base
/// graphon, one positive exponent per nonzero level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProductKernelRepr", into = "ProductKernelRepr")]
pub struct ProductKernel {
    base: StepGraphon,
    exponents: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct ProductKernelRepr {
    weights: Vec<String>,
    values: Vec<Vec<String>>,
    exponents: Vec<String>,
}

impl TryFrom<ProductKernelRepr> for ProductKernel {
    type Error = Error;

    fn try_from(repr: ProductKernelRepr) -> Result<Self> {
        let base = StepGraphon::new(
            repr.weights
                .iter()
                .map(|s| parse_rat(s))
                .collect::<Result<Vec<_>>>()?,
            repr.values
                .iter()
                .map(|row| row.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
        )?;
        let exponents = repr
            .exponents
            .iter()
            .map(|s| parse_rat(s))
            .collect::<Result<Vec<_>>>()?;
        ProductKernel::new(base, exponents)
    }
}

impl From<ProductKernel> for ProductKernelRepr {
    fn from(k: ProductKernel) -> Self {
        let graphon: StepGraphon = k.base;
        let weights = graphon.weights().iter().map(format_rat).collect();
        let n = graphon.block_count();
        let values = (0..n)
            .map(|i| (0..n).map(|j| format_rat(graphon.value(i, j))).collect())
            .collect();
        ProductKernelRepr {
            weights,
            values,
            exponents: k.exponents.iter().map(format_rat).collect(),
        }
    }
}

impl ProductKernel {
    pub fn new(base: StepGraphon, exponents: Vec<Rat>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::invalid("kernel", "no exponents"));
        }
        if exponents.iter().any(|q| *q <= Rat::zero()) {
            return Err(Error::invalid("kernel", "exponents must be positive"));
        }
        Ok(ProductKernel { base, exponents })
    }

    pub fn base(&self) -> &StepGraphon {
        &self.base
    }

    pub fn exponents(&self) -> &[Rat] {
        &self.exponents
    }

    pub fn arity(&self) -> usize {
        self.exponents.len() + 1
    }
}

/// The kernel whose hypergraph density matches the weighted downset
/// density: exponents `q_k = beta_k / (beta * c_k)` with `beta` the product
/// of the present multiplicities and `c_k` the chain count through a fixed
/// incident pair. With all levels present, `c_k = (k-1)! (r-k)!`.
pub fn product_kernel(
    base: &StepGraphon,
    m: usize,
    r: usize,
    alpha: &WeightVector,
) -> Result<ProductKernel> {
    let beta = chain_multiplicities(m, r, alpha)?;
    let present: Vec<usize> = (1..=r).filter(|&k| beta[k - 1] > 0).collect();
    let beta_prod: BigUint = present
        .iter()
        .map(|&k| BigUint::from(beta[k - 1]))
        .product();
    let mut exponents = Vec::with_capacity(present.len());
    for &k in &present {
        let c_k = chains_through_pair(r, &present, k);
        let q = Rat::from(num_bigint::BigInt::from(beta[k - 1]))
            / (rat_biguint(beta_prod.clone()) * rat_biguint(c_k));
        exponents.push(q);
    }
    ProductKernel::new(base.clone(), exponents)
}

/// A literal kernel on `arity` coordinates over `n` shared blocks; values
/// indexed by block tuples, first coordinate fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepKernelRepr", into = "StepKernelRepr")]
pub struct StepKernel {
    arity: usize,
    weights: Vec<Rat>,
    values: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct StepKernelRepr {
    arity: usize,
    weights: Vec<String>,
    values: Vec<String>,
}

impl TryFrom<StepKernelRepr> for StepKernel {
    type Error = Error;

    fn try_from(repr: StepKernelRepr) -> Result<Self> {
        StepKernel::new(
            repr.arity,
            repr.weights
                .iter()
                .map(|s| parse_rat(s))
                .collect::<Result<Vec<_>>>()?,
            repr.values
                .iter()
                .map(|s| parse_rat(s))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

impl From<StepKernel> for StepKernelRepr {
    fn from(k: StepKernel) -> Self {
        StepKernelRepr {
            arity: k.arity,
            weights: k.weights.iter().map(format_rat).collect(),
            values: k.values.iter().map(format_rat).collect(),
        }
    }
}

impl StepKernel {
    pub fn new(arity: usize, weights: Vec<Rat>, values: Vec<Rat>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::invalid("kernel", "arity must be positive"));
        }
        let n = weights.len();
        if n == 0 {
            return Err(Error::invalid("kernel", "no blocks"));
        }
        if weights.iter().any(|w| *w <= Rat::zero()) {
            return Err(Error::invalid("kernel", "weights must be positive"));
        }
        let total: Rat = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::invalid("kernel", "weights must sum to 1"));
        }
        let expected = n.checked_pow(arity as u32).ok_or_else(|| {
            Error::invalid("kernel", "value table too large")
        })?;
        if values.len() != expected {
            return Err(Error::invalid(
                "kernel",
                format!("expected {expected} values, got {}", values.len()),
            ));
        }
        if values
            .iter()
            .any(|v| *v < Rat::zero() || *v > Rat::one())
        {
            return Err(Error::invalid("kernel", "values must lie in [0, 1]"));
        }
        Ok(StepKernel {
            arity,
            weights,
            values,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn block_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn value(&self, blocks: &[usize]) -> &Rat {
        assert_eq!(blocks.len(), self.arity);
        let n = self.block_count();
        let mut idx = 0;
        for &b in blocks.iter().rev() {
            idx = idx * n + b;
        }
        &self.values[idx]
    }
}

#[derive(Clone, Copy)]
pub enum KernelRef<'a> {
    Product(&'a ProductKernel),
    Step(&'a StepKernel),
}

impl<'a> KernelRef<'a> {
    fn arity(&self) -> usize {
        match self {
            KernelRef::Product(k) => k.arity(),
            KernelRef::Step(k) => k.arity(),
        }
    }

    fn block_count(&self) -> usize {
        match self {
            KernelRef::Product(k) => k.base().block_count(),
            KernelRef::Step(k) => k.block_count(),
        }
    }

    fn weights(&self) -> &'a [Rat] {
        match self {
            KernelRef::Product(k) => k.base().weights(),
            KernelRef::Step(k) => k.weights(),
        }
    }
}

/// Structured density of a product kernel: the level-0 class is enumerated,
/// every other vertex is integrated out independently given the level-0
/// assignment, with its exponents accumulated per incident level-0 vertex.
pub fn hyper_density(
    g: &PartiteHypergraph,
    kernel: &ProductKernel,
    ev: &mut Evaluator,
) -> Result<DensityValue> {
    if g.levels().first() != Some(&0) {
        return Err(Error::invalid("hypergraph", "level 0 required for density"));
    }
    if kernel.arity() != g.class_count() {
        return Err(Error::invalid(
            "kernel",
            format!(
                "kernel arity {} does not match class count {}",
                kernel.arity(),
                g.class_count()
            ),
        ));
    }
    let base = kernel.base();
    let n = base.block_count();
    let m0 = g.class(0).len();
    let z_total: usize = (1..g.class_count()).map(|i| g.class(i).len()).sum();
    let outer = pow_terms(n, m0);
    let per_assignment = (z_total.max(1) as u128).saturating_mul(n as u128);
    ev.check_terms(outer.saturating_mul(per_assignment))?;

    // Accumulated exponent per (class, vertex, incident level-0 vertex).
    let mut incidence: Vec<Vec<BTreeMap<usize, u64>>> = (1..g.class_count())
        .map(|i| vec![BTreeMap::new(); g.class(i).len()])
        .collect();
    for edge in g.edges() {
        let x = edge[0];
        for (ci, &v) in edge.iter().enumerate().skip(1) {
            *incidence[ci - 1][v].entry(x).or_insert(0) += 1;
        }
    }
    let exponents: Vec<Vec<Vec<(usize, Rat)>>> = incidence
        .iter()
        .enumerate()
        .map(|(ci, class)| {
            class
                .iter()
                .map(|counts| {
                    counts
                        .iter()
                        .map(|(&x, &mult)| {
                            (
                                x,
                                &kernel.exponents()[ci] * Rat::from(num_bigint::BigInt::from(mult)),
                            )
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut factor_cache: HashMap<(usize, usize, Vec<usize>), DensityValue> = HashMap::new();
    let mut total = DensityValue::zero(ev.mode());
    let mut failure: Option<Error> = None;
    for_each_assignment(n, m0, |asg| {
        if failure.is_some() {
            return;
        }
        let mut weight = Rat::one();
        for &x in asg {
            weight *= &base.weights()[x];
        }
        let mut term = ev.from_rat(&weight);
        'classes: for (ci, class) in exponents.iter().enumerate() {
            for (v, incident) in class.iter().enumerate() {
                if term.is_zero() {
                    break 'classes;
                }
                let key_blocks: Vec<usize> = incident.iter().map(|&(x, _)| asg[x]).collect();
                let key = (ci, v, key_blocks.clone());
                let factor = if let Some(f) = factor_cache.get(&key) {
                    f.clone()
                } else {
                    let mut sum = DensityValue::zero(ev.mode());
                    for y in 0..n {
                        let mut prod = ev.from_rat(&base.weights()[y]);
                        for (&block, (_, q)) in key_blocks.iter().zip(incident) {
                            if prod.is_zero() {
                                break;
                            }
                            match ev.pow_base(base.value(block, y), q) {
                                Ok(p) => prod = prod.mul(&p),
                                Err(e) => {
                                    failure = Some(e);
                                    return;
                                }
                            }
                        }
                        sum = sum.add(&prod);
                    }
                    factor_cache.insert(key, sum.clone());
                    sum
                };
                term = term.mul(&factor);
            }
        }
        total = total.add(&term);
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Literal density: every vertex of every class is assigned a block and the
/// kernel is evaluated on each edge. Slow; the oracle for `hyper_density`.
pub fn hyper_density_oracle(
    g: &PartiteHypergraph,
    kernel: KernelRef,
    ev: &mut Evaluator,
) -> Result<DensityValue> {
    if kernel.arity() != g.class_count() {
        return Err(Error::invalid(
            "kernel",
            format!(
                "kernel arity {} does not match class count {}",
                kernel.arity(),
                g.class_count()
            ),
        ));
    }
    let n = kernel.block_count();
    let weights = kernel.weights();
    let total_vertices = g.vertex_count();
    ev.check_terms(pow_terms(n, total_vertices))?;

    let sizes = g.class_sizes();
    let mut offsets = vec![0usize; sizes.len()];
    for i in 1..sizes.len() {
        offsets[i] = offsets[i - 1] + sizes[i - 1];
    }

    let mut total = DensityValue::zero(ev.mode());
    let mut failure: Option<Error> = None;
    for_each_assignment(n, total_vertices, |asg| {
        if failure.is_some() {
            return;
        }
        let mut weight = Rat::one();
        for &x in asg {
            weight *= &weights[x];
        }
        let mut term = ev.from_rat(&weight);
        let mut blocks = vec![0usize; sizes.len()];
        for edge in g.edges() {
            if term.is_zero() {
                break;
            }
            for (i, &v) in edge.iter().enumerate() {
                blocks[i] = asg[offsets[i] + v];
            }
            match kernel {
                KernelRef::Step(k) => term = term.mul(&ev.from_rat(k.value(&blocks))),
                KernelRef::Product(k) => {
                    for (j, q) in k.exponents().iter().enumerate() {
                        match ev.pow_base(k.base().value(blocks[0], blocks[j + 1]), q) {
                            Ok(p) => term = term.mul(&p),
                            Err(e) => {
                                failure = Some(e);
                                return;
                            }
                        }
                    }
                }
            }
        }
        total = total.add(&term);
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Evaluates with the structured path for product kernels and the literal
/// path for step kernels.
pub fn hyper_density_kernel(
    g: &PartiteHypergraph,
    kernel: KernelRef,
    ev: &mut Evaluator,
) -> Result<DensityValue> {
    match kernel {
        KernelRef::Product(k) => hyper_density(g, k, ev),
        KernelRef::Step(_) => hyper_density_oracle(g, kernel, ev),
    }
}

/// `t_G(K) - t_Gsub(K)^(e(G)/e(Gsub))` where `gsub` must be a label-matching
/// sub-hypergraph of `g`. Nonnegative margins witness weak norming.
pub fn weak_norming_margin(
    g: &PartiteHypergraph,
    gsub: &PartiteHypergraph,
    kernel: KernelRef,
    ev: &mut Evaluator,
) -> Result<DensityValue> {
    if gsub.levels() != g.levels() {
        return Err(Error::invalid("hypergraph", "level sets differ"));
    }
    if gsub.edge_count() == 0 {
        return Err(Error::invalid("hypergraph", "sub-hypergraph has no edges"));
    }
    let index = g.label_index();
    let mut maps: Vec<Vec<usize>> = Vec::with_capacity(gsub.class_count());
    for (i, class) in (0..gsub.class_count()).map(|i| (i, gsub.class(i))) {
        let mut map = Vec::with_capacity(class.len());
        for label in class {
            match index[i].get(label.as_str()) {
                Some(&v) => map.push(v),
                None => {
                    return Err(Error::invalid(
                        "hypergraph",
                        format!("label {label:?} not present in the host"),
                    ));
                }
            }
        }
        maps.push(map);
    }
    let host_edges: BTreeSet<&Vec<usize>> = g.edges().iter().collect();
    for edge in gsub.edges() {
        let mapped: Vec<usize> = edge.iter().enumerate().map(|(i, &v)| maps[i][v]).collect();
        if !host_edges.contains(&mapped) {
            return Err(Error::invalid(
                "hypergraph",
                "sub-hypergraph edge missing from the host",
            ));
        }
    }

    let t_g = hyper_density_kernel(g, kernel, ev)?;
    let t_sub = hyper_density_kernel(gsub, kernel, ev)?;
    let exponent = Rat::new(
        (g.edge_count() as i64).into(),
        (gsub.edge_count() as i64).into(),
    );
    let powered = ev.pow_value(&t_sub, &exponent)?;
    Ok(t_g.sub(&powered))
}
