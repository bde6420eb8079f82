//! Bipartite graphs with a distinguished left class.
//!
//! A graph is stored as the size `m` of the left class A together with the
//! neighborhood of each right-class vertex, a subset of A. Left vertices are
//! `0..m` internally and `1..=m` on the wire. Right vertices produced by the
//! constructors are ordered lexicographically by (neighborhood, copy index);
//! operations preserve the order they document.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combi::{k_subsets, nonempty_subsets_up_to};
use crate::error::{Error, Result};
use crate::qarith::{binomial, factorial, format_rat, parse_rat, rat_biguint, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct BipartiteGraph {
    a_size: usize,
    b_neighborhoods: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    a_size: usize,
    b_neighborhoods: Vec<Vec<usize>>,
}

impl TryFrom<GraphRepr> for BipartiteGraph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        let mut neighborhoods = Vec::with_capacity(repr.b_neighborhoods.len());
        for set in repr.b_neighborhoods {
            let mut zero_based = Vec::with_capacity(set.len());
            for v in set {
                if v == 0 || v > repr.a_size {
                    return Err(Error::invalid(
                        "graph",
                        format!("left vertex {v} out of range 1..={}", repr.a_size),
                    ));
                }
                zero_based.push(v - 1);
            }
            neighborhoods.push(zero_based);
        }
        BipartiteGraph::new(repr.a_size, neighborhoods)
    }
}

impl From<BipartiteGraph> for GraphRepr {
    fn from(g: BipartiteGraph) -> Self {
        GraphRepr {
            a_size: g.a_size,
            b_neighborhoods: g
                .b_neighborhoods
                .into_iter()
                .map(|set| set.into_iter().map(|v| v + 1).collect())
                .collect(),
        }
    }
}

impl BipartiteGraph {
    /// Builds a graph from zero-based neighborhoods. Entries are sorted;
    /// duplicates within a neighborhood are rejected.
    pub fn new(a_size: usize, b_neighborhoods: Vec<Vec<usize>>) -> Result<Self> {
        if a_size == 0 {
            return Err(Error::invalid("graph", "left class is empty"));
        }
        let mut cleaned = Vec::with_capacity(b_neighborhoods.len());
        for mut set in b_neighborhoods {
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(
                    "graph",
                    "repeated vertex inside a neighborhood",
                ));
            }
            if let Some(&max) = set.last() {
                if max >= a_size {
                    return Err(Error::invalid(
                        "graph",
                        format!("left vertex {max} out of range 0..{a_size}"),
                    ));
                }
            }
            cleaned.push(set);
        }
        Ok(BipartiteGraph {
            a_size,
            b_neighborhoods: cleaned,
        })
    }

    pub fn a_size(&self) -> usize {
        self.a_size
    }

    pub fn b_count(&self) -> usize {
        self.b_neighborhoods.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.a_size + self.b_count()
    }

    pub fn edge_count(&self) -> usize {
        self.b_neighborhoods.iter().map(Vec::len).sum()
    }

    pub fn neighborhoods(&self) -> &[Vec<usize>] {
        &self.b_neighborhoods
    }

    pub fn neighborhood(&self, b: usize) -> &[usize] {
        &self.b_neighborhoods[b]
    }

    /// Degree of each left vertex.
    pub fn a_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.a_size];
        for set in &self.b_neighborhoods {
            for &v in set {
                deg[v] += 1;
            }
        }
        deg
    }

    /// A single edge: one left vertex joined to one right vertex.
    pub fn single_edge() -> Self {
        BipartiteGraph {
            a_size: 1,
            b_neighborhoods: vec![vec![0]],
        }
    }

    /// The path with two left endpoints and one middle right vertex.
    pub fn path3() -> Self {
        BipartiteGraph {
            a_size: 2,
            b_neighborhoods: vec![vec![0, 1]],
        }
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self> {
        BipartiteGraph::new(a, vec![(0..a).collect(); b])
    }

    /// Even cycle `C_{2k}` for `k >= 2`: right vertex `i` joins left
    /// vertices `i` and `i+1 (mod k)`.
    pub fn even_cycle(half: usize) -> Result<Self> {
        if half < 2 {
            return Err(Error::invalid("graph", "cycle needs at least 4 vertices"));
        }
        let sets = (0..half).map(|i| vec![i, (i + 1) % half]).collect();
        BipartiteGraph::new(half, sets)
    }

    /// The `(m, r)` incidence graph: one right vertex per `r`-subset of A.
    pub fn incidence(m: usize, r: usize) -> Result<Self> {
        if r == 0 || r > m {
            return Err(Error::invalid("graph", format!("need 1 <= r <= m, got r={r}, m={m}")));
        }
        BipartiteGraph::new(m, k_subsets(m, r))
    }

    /// The `(m, r)` downset graph: one right vertex per nonempty subset of A
    /// of size at most `r`.
    pub fn downset(m: usize, r: usize) -> Result<Self> {
        if r == 0 || r > m {
            return Err(Error::invalid("graph", format!("need 1 <= r <= m, got r={r}, m={m}")));
        }
        BipartiteGraph::new(m, nonempty_subsets_up_to(m, r))
    }

    /// `K_{5,5}` minus a ten-cycle: right vertex `i` of Z_5 joins
    /// `{i-1, i, i+1}` mod 5. The five neighborhoods are the cyclic triples,
    /// exactly half of the 3-subsets of a 5-set.
    pub fn mobius_kantor() -> Self {
        let mut sets: Vec<Vec<usize>> = (0..5usize)
            .map(|i| {
                let mut s = vec![(i + 4) % 5, i, (i + 1) % 5];
                s.sort_unstable();
                s
            })
            .collect();
        sets.sort();
        BipartiteGraph::new(5, sets).expect("static construction")
    }

    /// Replaces every right vertex by `p` copies with the same neighborhood.
    /// Copies of a vertex precede copies of the next vertex.
    pub fn blow_up(&self, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("graph", "blow-up exponent must be positive"));
        }
        let mut sets = Vec::with_capacity(self.b_count() * p);
        for set in &self.b_neighborhoods {
            for _ in 0..p {
                sets.push(set.clone());
            }
        }
        Ok(BipartiteGraph {
            a_size: self.a_size,
            b_neighborhoods: sets,
        })
    }

    /// Places two graphs side by side; the other graph's left class is
    /// shifted past this one's.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let mut sets = self.b_neighborhoods.clone();
        sets.extend(
            other
                .b_neighborhoods
                .iter()
                .map(|set| set.iter().map(|&v| v + self.a_size).collect()),
        );
        BipartiteGraph {
            a_size: self.a_size + other.a_size,
            b_neighborhoods: sets,
        }
    }

    /// Counts right vertices by degree. Errors when the right class is empty.
    pub fn degree_profile(&self) -> Result<DegreeProfile> {
        if self.b_neighborhoods.is_empty() {
            return Err(Error::EmptyRightClass);
        }
        let mut counts = BTreeMap::new();
        for set in &self.b_neighborhoods {
            *counts.entry(set.len()).or_insert(0usize) += 1;
        }
        Ok(DegreeProfile { counts })
    }

    /// Checks, degree by degree, whether the count of degree-`k` right
    /// vertices is divisible by `C(m, r) * C(r, k)`, where `r` is the
    /// maximum right degree. When every degree passes, blow-up-free
    /// Sidorenko bounds apply to the graph directly.
    pub fn divisibility_report(&self) -> Result<DivisibilityReport> {
        let profile = self.degree_profile()?;
        let m = self.a_size;
        let r = profile.max_degree();
        let c_mr = binomial(m, r);
        let mut witnesses = Vec::with_capacity(r);
        for k in 1..=r {
            let modulus = &c_mr * binomial(r, k);
            let count = profile.count(k);
            let ok = (BigUint::from(count) % &modulus).is_zero();
            witnesses.push(DivisibilityWitness {
                degree: k,
                modulus,
                count,
                ok,
            });
        }
        let applies = witnesses.iter().all(|w| w.ok);
        Ok(DivisibilityReport {
            m,
            r,
            witnesses,
            applies,
        })
    }

    /// The least `p` such that the `p`-fold blow-up satisfies the
    /// divisibility condition: the lcm over degrees `k` with `d_k > 0` of
    /// `M_k / gcd(M_k, d_k)` for `M_k = C(m, r) * C(r, k)`. Always divides
    /// `m! / (m-r)!`.
    pub fn minimal_blowup_exponent(&self) -> Result<BigUint> {
        let profile = self.degree_profile()?;
        let m = self.a_size;
        let r = profile.max_degree();
        let c_mr = binomial(m, r);
        let mut p = BigUint::one();
        for (&k, &d_k) in profile.iter() {
            if k == 0 || d_k == 0 {
                continue;
            }
            let modulus = &c_mr * binomial(r, k);
            let d = BigUint::from(d_k);
            let factor = &modulus / modulus.gcd(&d);
            p = p.lcm(&factor);
        }
        Ok(p)
    }

    /// A graph on `r` fresh left vertices that tops up every degree count of
    /// this graph to a multiple of `(m + r)!`: the disjoint union of the two
    /// passes the divisibility check. Degree-`k` vertices added here all use
    /// the first `k` fresh left vertices.
    pub fn companion_graph(&self) -> Result<BipartiteGraph> {
        let profile = self.degree_profile()?;
        let m = self.a_size;
        let r = profile.max_degree();
        if m + r > 20 {
            return Err(Error::invalid(
                "graph",
                format!("companion for m + r = {} is astronomically large", m + r),
            ));
        }
        let fact = factorial(m + r)
            .to_u64()
            .expect("factorial fits after size guard");
        let mut sets = Vec::new();
        for k in 1..=r {
            let d_k = profile.count(k) as u64;
            let deficit = (d_k.div_ceil(fact) * fact - d_k) as usize;
            let set: Vec<usize> = (0..k).collect();
            sets.extend(std::iter::repeat_n(set, deficit));
        }
        BipartiteGraph::new(r, sets)
    }

    /// Degree weights `alpha_k = d_k / C(m, k)`: with these weights the
    /// weighted density of the downset graph lower-bounds the plain density
    /// of this graph.
    pub fn alpha_profile(&self) -> Result<WeightVector> {
        let profile = self.degree_profile()?;
        let pairs = profile
            .iter()
            .filter(|&(&k, _)| k > 0)
            .map(|(&k, &d_k)| {
                (
                    k,
                    Rat::from(num_bigint::BigInt::from(d_k)) / rat_biguint(binomial(self.a_size, k)),
                )
            })
            .collect();
        WeightVector::from_pairs(pairs)
    }

    /// Edges as (left, right-index) pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.b_neighborhoods
            .iter()
            .enumerate()
            .flat_map(|(b, set)| set.iter().map(move |&a| (a, b)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeProfile {
    counts: BTreeMap<usize, usize>,
}

impl DegreeProfile {
    pub fn max_degree(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &usize)> {
        self.counts.iter()
    }
}

#[derive(Clone, Debug)]
pub struct DivisibilityWitness {
    pub degree: usize,
    pub modulus: BigUint,
    pub count: usize,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct DivisibilityReport {
    pub m: usize,
    pub r: usize,
    pub witnesses: Vec<DivisibilityWitness>,
    pub applies: bool,
}

/// Nonnegative rational weights indexed by right-vertex degree. Degrees with
/// zero weight are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    by_degree: BTreeMap<usize, Rat>,
}

impl WeightVector {
    pub fn from_pairs(pairs: Vec<(usize, Rat)>) -> Result<Self> {
        let mut by_degree = BTreeMap::new();
        for (k, w) in pairs {
            if w < Rat::zero() {
                return Err(Error::invalid(
                    "weight vector",
                    format!("negative weight {} at degree {k}", format_rat(&w)),
                ));
            }
            if !w.is_zero() {
                if by_degree.insert(k, w).is_some() {
                    return Err(Error::invalid(
                        "weight vector",
                        format!("degree {k} listed twice"),
                    ));
                }
            }
        }
        Ok(WeightVector { by_degree })
    }

    /// Weights for degrees `1..=len` in order.
    pub fn from_list(weights: Vec<Rat>) -> Result<Self> {
        WeightVector::from_pairs(weights.into_iter().enumerate().map(|(i, w)| (i + 1, w)).collect())
    }

    pub fn ones(r: usize) -> Self {
        WeightVector {
            by_degree: (1..=r).map(|k| (k, Rat::one())).collect(),
        }
    }

    /// Parses `"2,1"` (degrees 1..) or `"1:2,3:1/2"` (explicit degrees).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::invalid("weight vector", "empty"));
        }
        if s.contains(':') {
            let mut pairs = Vec::new();
            for part in s.split(',') {
                let (k, w) = part
                    .split_once(':')
                    .ok_or_else(|| Error::invalid("weight vector", format!("bad entry {part:?}")))?;
                let k: usize = k.trim().parse().map_err(|_| {
                    Error::invalid("weight vector", format!("bad degree {k:?}"))
                })?;
                pairs.push((k, parse_rat(w)?));
            }
            WeightVector::from_pairs(pairs)
        } else {
            let weights = s.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?;
            WeightVector::from_list(weights)
        }
    }

    pub fn get(&self, degree: usize) -> Rat {
        self.by_degree.get(&degree).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.by_degree.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &Rat)> {
        self.by_degree.iter()
    }

    pub fn is_integral(&self) -> bool {
        self.by_degree.values().all(|w| w.denom().is_one())
    }

    /// `sum_k alpha_k * k * C(m, k)`: the weighted edge exponent of the
    /// `(m, r)` downset graph under these weights.
    pub fn weighted_edge_exponent(&self, m: usize) -> Rat {
        self.by_degree
            .iter()
            .map(|(&k, w)| w * rat_biguint(binomial(m, k)) * Rat::from(num_bigint::BigInt::from(k)))
            .sum()
    }
}

impl std::fmt::Display for WeightVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .by_degree
            .iter()
            .map(|(k, w)| format!("{k}:{}", format_rat(w)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::{rat, rat_int};

    #[test]
    fn incidence_shapes() {
        let g = BipartiteGraph::incidence(4, 1).unwrap();
        assert_eq!(g.b_count(), 4);
        assert!(g.neighborhoods().iter().all(|s| s.len() == 1));

        let g = BipartiteGraph::incidence(5, 3).unwrap();
        assert_eq!(g.b_count(), 10);
        assert_eq!(g.edge_count(), 30);
        assert!(BipartiteGraph::incidence(3, 4).is_err());
        assert!(BipartiteGraph::incidence(3, 0).is_err());
    }

    #[test]
    fn downset_shapes_and_order() {
        let g = BipartiteGraph::downset(3, 2).unwrap();
        assert_eq!(g.b_count(), 6);
        assert_eq!(g.edge_count(), 9);
        assert_eq!(
            g.neighborhoods(),
            &[
                vec![0],
                vec![0, 1],
                vec![0, 2],
                vec![1],
                vec![1, 2],
                vec![2]
            ]
        );

        let g = BipartiteGraph::downset(2, 2).unwrap();
        assert_eq!(g.b_count(), 3);
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn mobius_kantor_shape() {
        let m = BipartiteGraph::mobius_kantor();
        assert_eq!(m.vertex_count(), 10);
        assert_eq!(m.edge_count(), 15);
        assert_eq!(m.a_degrees(), vec![3; 5]);
        let mut sets = m.neighborhoods().to_vec();
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), 5, "five distinct cyclic triples");
        for s in &sets {
            assert_eq!(s.len(), 3);
        }
    }

    #[test]
    fn blow_up_scales_degrees() {
        let m2 = BipartiteGraph::mobius_kantor().blow_up(2).unwrap();
        assert_eq!(m2.edge_count(), 30);
        let profile = m2.degree_profile().unwrap();
        assert_eq!(profile.count(3), 10);

        let k23 = BipartiteGraph::path3().blow_up(3).unwrap();
        assert_eq!(k23, BipartiteGraph::complete_bipartite(2, 3).unwrap());
        assert!(BipartiteGraph::path3().blow_up(0).is_err());
    }

    #[test]
    fn union_shifts_left_vertices() {
        let m = BipartiteGraph::mobius_kantor();
        let u = m.disjoint_union(&m);
        assert_eq!(u.a_size(), 10);
        assert_eq!(u.degree_profile().unwrap().count(3), 10);
        assert!(u.neighborhoods()[5..].iter().flatten().all(|&v| v >= 5));

        let p = BipartiteGraph::path3();
        let u = p.disjoint_union(&p);
        assert_eq!(u.a_size(), 4);
        assert_eq!(u.degree_profile().unwrap().count(2), 2);
    }

    #[test]
    fn degree_profile_requires_right_vertices() {
        let empty = BipartiteGraph::new(3, vec![]).unwrap();
        assert!(matches!(
            empty.degree_profile(),
            Err(Error::EmptyRightClass)
        ));
    }

    #[test]
    fn divisibility_reports() {
        let m2 = BipartiteGraph::mobius_kantor().blow_up(2).unwrap();
        let rep = m2.divisibility_report().unwrap();
        assert!(rep.applies);
        assert_eq!(rep.r, 3);
        // Zero counts at degrees 1 and 2 pass automatically.
        assert!(rep.witnesses.iter().all(|w| w.ok));

        let rep = BipartiteGraph::mobius_kantor().divisibility_report().unwrap();
        assert!(!rep.applies);
        let w3 = rep.witnesses.iter().find(|w| w.degree == 3).unwrap();
        assert_eq!(w3.modulus, BigUint::from(10u32));
        assert_eq!(w3.count, 5);
        assert!(!w3.ok);

        let rep = BipartiteGraph::downset(3, 2).unwrap().divisibility_report().unwrap();
        assert!(!rep.applies);
    }

    #[test]
    fn minimal_blowup_exponents() {
        let m = BipartiteGraph::mobius_kantor();
        assert_eq!(m.minimal_blowup_exponent().unwrap(), BigUint::from(2u32));
        assert_eq!(
            m.blow_up(2).unwrap().minimal_blowup_exponent().unwrap(),
            BigUint::one()
        );
        assert_eq!(
            BipartiteGraph::path3().minimal_blowup_exponent().unwrap(),
            BigUint::one()
        );
    }

    #[test]
    fn minimal_exponent_matches_brute_force() {
        let cases = [
            BipartiteGraph::mobius_kantor(),
            BipartiteGraph::downset(3, 2).unwrap(),
            BipartiteGraph::downset(4, 2).unwrap(),
            BipartiteGraph::incidence(4, 2).unwrap(),
            BipartiteGraph::new(3, vec![vec![0], vec![0, 1], vec![0, 1, 2]]).unwrap(),
        ];
        for g in cases {
            let p = g.minimal_blowup_exponent().unwrap().to_u64().unwrap();
            let brute = (1..=60)
                .find(|&q| {
                    g.blow_up(q as usize)
                        .unwrap()
                        .divisibility_report()
                        .unwrap()
                        .applies
                })
                .expect("some exponent at most 60 works");
            assert_eq!(p, brute, "graph {:?}", g);
            // And p divides m! / (m - r)!.
            let profile = g.degree_profile().unwrap();
            let bound = factorial(g.a_size()) / factorial(g.a_size() - profile.max_degree());
            assert!((bound % BigUint::from(p)).is_zero());
        }
    }

    #[test]
    fn companion_tops_up_counts() {
        let p3 = BipartiteGraph::path3();
        let c = p3.companion_graph().unwrap();
        assert_eq!(c.a_size(), 2);
        assert_eq!(c.b_count(), 23);
        assert!(c.neighborhoods().iter().all(|s| s == &vec![0, 1]));
        assert!(p3.disjoint_union(&c).divisibility_report().unwrap().applies);

        let m = BipartiteGraph::mobius_kantor();
        let c = m.companion_graph().unwrap();
        assert_eq!(c.a_size(), 3);
        assert_eq!(c.b_count(), 40315);
        assert!(m.disjoint_union(&c).divisibility_report().unwrap().applies);

        // Already divisible: the companion is empty and the union still passes.
        let m2 = m.blow_up(2).unwrap();
        let c = m2.companion_graph().unwrap();
        assert_eq!(c.b_count(), 40320 - 10);
    }

    #[test]
    fn alpha_profiles() {
        let m = BipartiteGraph::mobius_kantor();
        let alpha = m.alpha_profile().unwrap();
        assert_eq!(alpha.get(3), rat(1, 2));
        assert!(!alpha.is_integral());

        let m2 = m.blow_up(2).unwrap();
        assert_eq!(m2.alpha_profile().unwrap().get(3), rat_int(1));

        let d = BipartiteGraph::downset(4, 3).unwrap();
        let alpha = d.alpha_profile().unwrap();
        for k in 1..=3 {
            assert_eq!(alpha.get(k), rat_int(1));
        }
    }

    #[test]
    fn weight_vector_parsing_and_exponent() {
        let w = WeightVector::parse("2,1").unwrap();
        assert_eq!(w.get(1), rat_int(2));
        assert_eq!(w.get(2), rat_int(1));
        assert_eq!(w.get(3), rat_int(0));

        let w = WeightVector::parse("1:2,3:1/2").unwrap();
        assert_eq!(w.get(3), rat(1, 2));
        assert!(!w.is_integral());
        assert!(WeightVector::parse("1:-1").is_err());

        // Downset(3,2) with unit weights has 1*3 + 2*3 = 9 weighted edges.
        let w = WeightVector::ones(2);
        assert_eq!(w.weighted_edge_exponent(3), rat_int(9));
    }

    #[test]
    fn json_round_trip_is_one_based() {
        let m = BipartiteGraph::mobius_kantor();
        let js = serde_json::to_string(&m).unwrap();
        assert!(js.contains("\"a_size\":5"));
        assert!(js.contains("[1,2,5]"), "{js}");
        let back: BipartiteGraph = serde_json::from_str(&js).unwrap();
        assert_eq!(back, m);

        let bad = r#"{"a_size":2,"b_neighborhoods":[[0]]}"#;
        assert!(serde_json::from_str::<BipartiteGraph>(bad).is_err());
        let bad = r#"{"a_size":2,"b_neighborhoods":[[3]]}"#;
        assert!(serde_json::from_str::<BipartiteGraph>(bad).is_err());
        let bad = r#"{"a_size":2,"b_neighborhoods":[[1,1]]}"#;
        assert!(serde_json::from_str::<BipartiteGraph>(bad).is_err());
    }
}
