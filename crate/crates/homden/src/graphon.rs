//! Step graphons and homomorphism densities over them.
//!
//! A step graphon has `n` blocks with positive rational weights summing to
//! one and a symmetric `n x n` rational value matrix with entries in [0, 1].
//! The main evaluator integrates out the right class of a bipartite graph:
//! only the left vertices are enumerated, and every right vertex contributes
//! a factor `rho(x_N(v)) = sum_y w_y prod_{i in N(v)} V[x_i][y]`. The naive
//! evaluator that enumerates both classes is kept as an oracle.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{BipartiteGraph, WeightVector};
use crate::qarith::{format_rat, parse_rat, rat_int, Rat};
use crate::value::{DensityValue, Evaluator, DEFAULT_TERM_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphonRepr", into = "GraphonRepr")]
pub struct StepGraphon {
    weights: Vec<Rat>,
    values: Vec<Vec<Rat>>,
}

#[derive(Serialize, Deserialize)]
struct GraphonRepr {
    weights: Vec<String>,
    values: Vec<Vec<String>>,
}

impl TryFrom<GraphonRepr> for StepGraphon {
    type Error = Error;

    fn try_from(repr: GraphonRepr) -> Result<Self> {
        let weights = repr
            .weights
            .iter()
            .map(|s| parse_rat(s))
            .collect::<Result<Vec<_>>>()?;
        let values = repr
            .values
            .iter()
            .map(|row| row.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        StepGraphon::new(weights, values)
    }
}

impl From<StepGraphon> for GraphonRepr {
    fn from(w: StepGraphon) -> Self {
        GraphonRepr {
            weights: w.weights.iter().map(format_rat).collect(),
            values: w
                .values
                .iter()
                .map(|row| row.iter().map(format_rat).collect())
                .collect(),
        }
    }
}

impl StepGraphon {
    pub fn new(weights: Vec<Rat>, values: Vec<Vec<Rat>>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::invalid("graphon", "no blocks"));
        }
        if weights.iter().any(|w| *w <= Rat::zero()) {
            return Err(Error::invalid("graphon", "weights must be positive"));
        }
        let total: Rat = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::invalid(
                "graphon",
                format!("weights sum to {}, not 1", format_rat(&total)),
            ));
        }
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("graphon", "value matrix is not n x n"));
        }
        for i in 0..n {
            for j in 0..n {
                let v = &values[i][j];
                if v < &Rat::zero() || v > &Rat::one() {
                    return Err(Error::invalid(
                        "graphon",
                        format!("value {} outside [0, 1]", format_rat(v)),
                    ));
                }
                if values[i][j] != values[j][i] {
                    return Err(Error::invalid("graphon", "value matrix is not symmetric"));
                }
            }
        }
        Ok(StepGraphon { weights, values })
    }

    /// Equal-weight graphon of a simple graph given by a symmetric 0/1
    /// adjacency matrix.
    pub fn from_adjacency(adjacency: &[Vec<u8>]) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(Error::invalid("graphon", "empty adjacency"));
        }
        let mut values = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            if adjacency[i].len() != n {
                return Err(Error::invalid("graphon", "adjacency is not square"));
            }
            for j in 0..n {
                if adjacency[i][j] > 1 {
                    return Err(Error::invalid("graphon", "adjacency entries must be 0 or 1"));
                }
                values[i][j] = rat_int(adjacency[i][j] as i64);
            }
        }
        let weights = vec![Rat::new(1.into(), (n as i64).into()); n];
        StepGraphon::new(weights, values)
    }

    /// One block of weight one with constant value `c`.
    pub fn constant(c: Rat) -> Result<Self> {
        StepGraphon::new(vec![Rat::one()], vec![vec![c]])
    }

    /// Seed-deterministic random graphon: block count uniform in
    /// `1..=max_blocks`, weights and values built from fractions with
    /// denominators at most `denominator_bound` (weights are normalized, so
    /// their final denominators may be larger).
    pub fn random(seed: u64, max_blocks: usize, denominator_bound: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        StepGraphon::random_from_rng(&mut rng, max_blocks, denominator_bound)
    }

    pub fn random_from_rng(rng: &mut impl Rng, max_blocks: usize, denominator_bound: u64) -> Self {
        assert!(max_blocks >= 1 && denominator_bound >= 1);
        let n = rng.random_range(1..=max_blocks);
        let raw: Vec<Rat> = (0..n)
            .map(|_| {
                let q = rng.random_range(1..=denominator_bound) as i64;
                let p = rng.random_range(1..=q) as i64;
                Rat::new(p.into(), q.into())
            })
            .collect();
        let total: Rat = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / &total).collect();
        let mut values = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let q = rng.random_range(1..=denominator_bound) as i64;
                let p = rng.random_range(0..=q) as i64;
                let v = Rat::new(p.into(), q.into());
                values[i][j] = v.clone();
                values[j][i] = v;
            }
        }
        StepGraphon { weights, values }
    }

    /// Replaces every value by its `d`th power. Densities of the result can
    /// then be raised to exact fractional powers with denominator dividing
    /// `d` at the leaf level.
    pub fn power_compatible(&self, d: u64) -> Self {
        let values = self
            .values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| crate::qarith::pow_rat_int(v, d as i64))
                    .collect()
            })
            .collect();
        StepGraphon {
            weights: self.weights.clone(),
            values,
        }
    }

    pub fn block_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn value(&self, i: usize, j: usize) -> &Rat {
        &self.values[i][j]
    }

    pub fn edge_density(&self) -> Rat {
        let n = self.block_count();
        let mut total = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                total += &self.weights[i] * &self.weights[j] * &self.values[i][j];
            }
        }
        total
    }

    /// `rho(blocks) = sum_y w_y prod_i V[blocks[i]][y]`: the probability
    /// that a fresh right vertex attaches to all the given left blocks.
    pub fn rho(&self, blocks: &[usize]) -> Rat {
        let n = self.block_count();
        let mut total = Rat::zero();
        for y in 0..n {
            let mut prod = self.weights[y].clone();
            for &x in blocks {
                if prod.is_zero() {
                    break;
                }
                prod *= &self.values[x][y];
            }
            total += prod;
        }
        total
    }

    /// Product of the left-block weights of an assignment.
    fn weight_product(&self, assignment: &[usize]) -> Rat {
        let mut prod = Rat::one();
        for &x in assignment {
            prod *= &self.weights[x];
        }
        prod
    }

    /// Homomorphism density of `h`, right class integrated out.
    pub fn hom_density(&self, h: &BipartiteGraph) -> Result<Rat> {
        self.hom_density_capped(h, DEFAULT_TERM_CAP)
    }

    pub fn hom_density_capped(&self, h: &BipartiteGraph, cap: u128) -> Result<Rat> {
        let n = self.block_count();
        check_terms(pow_terms(n, h.a_size()), cap)?;
        let mut cache = RhoCache::new(self);
        let mut total = Rat::zero();
        for_each_assignment(n, h.a_size(), |asg| {
            let mut term = self.weight_product(asg);
            for set in h.neighborhoods() {
                if term.is_zero() {
                    break;
                }
                term *= cache.get(asg, set);
            }
            total += term;
        });
        Ok(total)
    }

    /// Literal sum over block assignments of both vertex classes. Slow;
    /// kept as an independent oracle for the main evaluator.
    pub fn hom_density_oracle(&self, h: &BipartiteGraph, cap: u128) -> Result<Rat> {
        let n = self.block_count();
        let total_vertices = h.vertex_count();
        check_terms(pow_terms(n, total_vertices), cap)?;
        let m = h.a_size();
        let edges: Vec<(usize, usize)> = h.edges().collect();
        let mut total = Rat::zero();
        for_each_assignment(n, total_vertices, |asg| {
            let mut term = self.weight_product(asg);
            for &(a, b) in &edges {
                if term.is_zero() {
                    break;
                }
                term *= &self.values[asg[a]][asg[m + b]];
            }
            total += term;
        });
        Ok(total)
    }

    /// Weighted density: each right vertex of degree `k` contributes
    /// `rho(x_N(v))^alpha_k`. Exact mode requires integer weights unless
    /// power-compatible roots are on; float mode allows any weights.
    pub fn weighted_density(
        &self,
        h: &BipartiteGraph,
        alpha: &WeightVector,
        ev: &mut Evaluator,
    ) -> Result<DensityValue> {
        let n = self.block_count();
        ev.check_terms(pow_terms(n, h.a_size()))?;
        let mut cache = RhoCache::new(self);
        let mut total = DensityValue::zero(ev.mode());
        let mut failure = None;
        for_each_assignment(n, h.a_size(), |asg| {
            if failure.is_some() {
                return;
            }
            let mut term = ev.from_rat(&self.weight_product(asg));
            for set in h.neighborhoods() {
                if term.is_zero() {
                    break;
                }
                let weight = alpha.get(set.len());
                if weight.is_zero() {
                    continue;
                }
                let rho = cache.get(asg, set).clone();
                match ev.pow_base(&rho, &weight) {
                    Ok(f) => term = term.mul(&f),
                    Err(e) => {
                        failure = Some(e);
                        return;
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

    /// Density of `h` rooted at a full assignment of the left class:
    /// the product of `rho` over right vertices.
    pub fn rooted_density(&self, h: &BipartiteGraph, assignment: &[usize]) -> Result<Rat> {
        if assignment.len() != h.a_size() {
            return Err(Error::invalid(
                "assignment",
                format!("length {} != left class size {}", assignment.len(), h.a_size()),
            ));
        }
        if assignment.iter().any(|&x| x >= self.block_count()) {
            return Err(Error::invalid("assignment", "block index out of range"));
        }
        let mut cache = RhoCache::new(self);
        let mut prod = Rat::one();
        for set in h.neighborhoods() {
            if prod.is_zero() {
                break;
            }
            prod *= cache.get(assignment, set);
        }
        Ok(prod)
    }

    /// `E_x[rooted(x)^p]`: equals the plain density of the `p`-fold blow-up.
    pub fn rooted_power_mean(&self, h: &BipartiteGraph, p: u64, cap: u128) -> Result<Rat> {
        let n = self.block_count();
        check_terms(pow_terms(n, h.a_size()), cap)?;
        let mut cache = RhoCache::new(self);
        let mut total = Rat::zero();
        for_each_assignment(n, h.a_size(), |asg| {
            let mut rooted = Rat::one();
            for set in h.neighborhoods() {
                if rooted.is_zero() {
                    break;
                }
                rooted *= cache.get(asg, set);
            }
            total += self.weight_product(asg) * crate::qarith::pow_rat_int(&rooted, p as i64);
        });
        Ok(total)
    }

    /// Same weights, every value replaced by `min(value + bump, 1)`.
    /// Useful for monotonicity tests.
    pub fn bumped(&self, bump: &Rat) -> Self {
        assert!(!bump.is_negative());
        let one = Rat::one();
        let values = self
            .values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        let b = v + bump;
                        if b > one {
                            one.clone()
                        } else {
                            b
                        }
                    })
                    .collect()
            })
            .collect();
        StepGraphon {
            weights: self.weights.clone(),
            values,
        }
    }
}

/// `n^len` saturating to `u128::MAX`.
pub(crate) fn pow_terms(n: usize, len: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..len {
        acc = match acc.checked_mul(n as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

pub(crate) fn check_terms(terms: u128, cap: u128) -> Result<()> {
    if terms > cap {
        return Err(Error::InfeasibleSize { terms, cap });
    }
    Ok(())
}

/// Enumerates all maps `{0..len} -> {0..n}` in odometer order.
pub(crate) fn for_each_assignment(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    assert!(n >= 1);
    let mut asg = vec![0usize; len];
    loop {
        f(&asg);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            asg[i] += 1;
            if asg[i] < n {
                break;
            }
            asg[i] = 0;
            i += 1;
        }
    }
}

/// Memoizes `rho` by the sorted multiset of left blocks a neighborhood maps
/// to; `rho` is symmetric in its arguments.
pub(crate) struct RhoCache<'a> {
    graphon: &'a StepGraphon,
    map: HashMap<Vec<usize>, Rat>,
}

impl<'a> RhoCache<'a> {
    pub fn new(graphon: &'a StepGraphon) -> Self {
        RhoCache {
            graphon,
            map: HashMap::new(),
        }
    }

    pub fn get(&mut self, assignment: &[usize], neighborhood: &[usize]) -> &Rat {
        let mut key: Vec<usize> = neighborhood.iter().map(|&i| assignment[i]).collect();
        key.sort_unstable();
        let graphon = self.graphon;
        self.map
            .entry(key)
            .or_insert_with_key(|k| graphon.rho(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::rat;
    use crate::value::EvalMode;

    fn identity2() -> StepGraphon {
        StepGraphon::from_adjacency(&[vec![1, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(StepGraphon::new(vec![], vec![]).is_err());
        assert!(StepGraphon::new(vec![rat(1, 2), rat(1, 3)], vec![vec![Rat::zero(); 2]; 2]).is_err());
        assert!(StepGraphon::new(
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![rat(1, 2), rat(2, 1)], vec![rat(2, 1), rat(1, 2)]]
        )
        .is_err());
        assert!(StepGraphon::new(
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 4), rat(1, 2)]]
        )
        .is_err());
    }

    #[test]
    fn edge_densities() {
        let single = StepGraphon::from_adjacency(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(single.edge_density(), rat(1, 2));

        let triangle =
            StepGraphon::from_adjacency(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(triangle.edge_density(), rat(2, 3));

        let anti = StepGraphon::new(
            vec![rat(1, 3), rat(2, 3)],
            vec![vec![Rat::zero(), Rat::one()], vec![Rat::one(), Rat::zero()]],
        )
        .unwrap();
        assert_eq!(anti.edge_density(), rat(4, 9));
    }

    #[test]
    fn rho_values() {
        let w = identity2();
        assert_eq!(w.rho(&[0, 0]), rat(1, 2));
        assert_eq!(w.rho(&[0, 1]), Rat::zero());
        assert_eq!(w.rho(&[]), Rat::one());
    }

    #[test]
    fn known_densities() {
        let w = identity2();
        let k22 = BipartiteGraph::complete_bipartite(2, 2).unwrap();
        assert_eq!(w.hom_density(&k22).unwrap(), rat(1, 8));
        assert_eq!(w.hom_density_oracle(&k22, 1 << 20).unwrap(), rat(1, 8));

        let p3 = BipartiteGraph::path3();
        assert_eq!(w.hom_density(&p3).unwrap(), rat(1, 4));
        assert_eq!(w.hom_density_oracle(&p3, 1 << 20).unwrap(), rat(1, 4));

        let k2 = BipartiteGraph::single_edge();
        assert_eq!(w.hom_density(&k2).unwrap(), w.edge_density());
    }

    #[test]
    fn evaluators_agree_on_random_inputs() {
        for seed in 0..30u64 {
            let w = StepGraphon::random(seed, 3, 8);
            let h = match seed % 3 {
                0 => BipartiteGraph::downset(3, 2).unwrap(),
                1 => BipartiteGraph::even_cycle(3).unwrap(),
                _ => BipartiteGraph::incidence(4, 2).unwrap(),
            };
            if h.vertex_count() <= 7 {
                assert_eq!(
                    w.hom_density(&h).unwrap(),
                    w.hom_density_oracle(&h, 1 << 30).unwrap(),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn random_graphon_is_deterministic_and_valid() {
        let a = StepGraphon::random(42, 3, 16);
        let b = StepGraphon::random(42, 3, 16);
        assert_eq!(a, b);
        let c = StepGraphon::random(43, 3, 16);
        assert!(a != c || a.block_count() == c.block_count());
        for seed in 0..20 {
            let w = StepGraphon::random(seed, 4, 16);
            let total: Rat = w.weights().iter().sum();
            assert!(total.is_one());
            assert!(w.weights().iter().all(|x| *x > Rat::zero()));
            for i in 0..w.block_count() {
                for j in 0..w.block_count() {
                    assert!(w.value(i, j) >= &Rat::zero() && w.value(i, j) <= &Rat::one());
                    assert_eq!(w.value(i, j), w.value(j, i));
                }
            }
        }
    }

    #[test]
    fn rooted_densities() {
        let w = identity2();
        let p3 = BipartiteGraph::path3();
        assert_eq!(w.rooted_density(&p3, &[0, 0]).unwrap(), rat(1, 2));
        assert_eq!(w.rooted_density(&p3, &[0, 1]).unwrap(), Rat::zero());
        assert!(w.rooted_density(&p3, &[0]).is_err());
        assert!(w.rooted_density(&p3, &[0, 5]).is_err());
    }

    #[test]
    fn rooted_power_mean_is_blowup_density() {
        for seed in 0..10u64 {
            let w = StepGraphon::random(seed, 3, 8);
            let h = BipartiteGraph::downset(3, 2).unwrap();
            for p in 1..=3u64 {
                let lhs = w.rooted_power_mean(&h, p, 1 << 30).unwrap();
                let rhs = w.hom_density(&h.blow_up(p as usize).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "seed {seed} p {p}");
            }
        }
    }

    #[test]
    fn weighted_density_integer_weights() {
        let w = identity2();
        let p3 = BipartiteGraph::path3();
        let alpha = WeightVector::from_pairs(vec![(2, rat(2, 1))]).unwrap();
        let mut ev = Evaluator::with_mode(EvalMode::exact());
        let t = w.weighted_density(&p3, &alpha, &mut ev).unwrap();
        assert_eq!(t.to_rational(), rat(1, 8));
    }

    #[test]
    fn weighted_density_fractional_weights() {
        let p3 = BipartiteGraph::path3();
        let alpha = WeightVector::from_pairs(vec![(2, rat(1, 2))]).unwrap();

        // Constant 1/16 = (1/2)^4: rho = 1/256, sqrt = 1/16.
        let w = StepGraphon::constant(rat(1, 16)).unwrap();
        let mut plain = Evaluator::with_mode(EvalMode::exact());
        assert!(w.weighted_density(&p3, &alpha, &mut plain).is_err());

        let mut compat = Evaluator::with_mode(EvalMode::exact_with_roots());
        let t = w.weighted_density(&p3, &alpha, &mut compat).unwrap();
        assert_eq!(t.to_rational(), rat(1, 16));

        let mut float = Evaluator::with_mode(EvalMode::float_default());
        let tf = w.weighted_density(&p3, &alpha, &mut float).unwrap();
        let diff = (tf.to_rational() - rat(1, 16)).abs();
        assert!(diff < rat(1, 1_000_000_000));
    }

    #[test]
    fn block_permutation_invariance() {
        for seed in 0..10u64 {
            let w = StepGraphon::random(seed, 3, 8);
            let n = w.block_count();
            if n < 2 {
                continue;
            }
            // Rotate blocks by one.
            let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            let weights: Vec<Rat> = (0..n).map(|i| w.weights()[perm[i]].clone()).collect();
            let mut values = vec![vec![Rat::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    values[i][j] = w.value(perm[i], perm[j]).clone();
                }
            }
            let wp = StepGraphon::new(weights, values).unwrap();
            let h = BipartiteGraph::downset(3, 2).unwrap();
            assert_eq!(w.hom_density(&h).unwrap(), wp.hom_density(&h).unwrap());
        }
    }

    #[test]
    fn monotone_in_values() {
        for seed in 0..10u64 {
            let w = StepGraphon::random(seed, 3, 8);
            let bigger = w.bumped(&rat(1, 5));
            let h = BipartiteGraph::even_cycle(3).unwrap();
            assert!(bigger.hom_density(&h).unwrap() >= w.hom_density(&h).unwrap());
        }
    }

    #[test]
    fn caps_are_enforced() {
        let w = StepGraphon::random(1, 3, 8);
        let h = BipartiteGraph::downset(3, 2).unwrap();
        if w.block_count() > 1 {
            assert!(matches!(
                w.hom_density_capped(&h, 2),
                Err(Error::InfeasibleSize { .. })
            ));
        }
    }

    #[test]
    fn serde_matches_wire_format() {
        let w = identity2();
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(
            js,
            r#"{"weights":["1/2","1/2"],"values":[["1","0"],["0","1"]]}"#
        );
        let back: StepGraphon = serde_json::from_str(&js).unwrap();
        assert_eq!(back, w);

        let bad = r#"{"weights":["1/2","1/2"],"values":[["1","2"],["2","1"]]}"#;
        assert!(serde_json::from_str::<StepGraphon>(bad).is_err());
    }
}
