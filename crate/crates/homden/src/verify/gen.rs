//! Seeded random instances for the verification checks.
//!
//! Every trial derives its own sub-seed from the master seed, so trials are
//! independent of execution order and parallelism.

use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graphs::{BipartiteGraph, WeightVector};
use crate::qarith::{binomial, rat, rat_biguint, rat_int, Rat};

/// SplitMix64 finalizer.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for trial `index` of a run with the given master seed.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Arbitrary bipartite graph: left size up to `max_a`, right size up to
/// `max_b`, total vertex count up to `max_vertices`; each right vertex gets
/// a nonempty random neighborhood.
pub fn random_bipartite(
    rng: &mut impl Rng,
    max_a: usize,
    max_b: usize,
    max_vertices: usize,
) -> BipartiteGraph {
    let a = rng.random_range(1..=max_a);
    let b_cap = max_b.min(max_vertices.saturating_sub(a)).max(1);
    let b = rng.random_range(1..=b_cap);
    let neighborhoods = (0..b)
        .map(|_| {
            loop {
                let set: Vec<usize> = (0..a).filter(|_| rng.random_bool(0.5)).collect();
                if !set.is_empty() {
                    break set;
                }
            }
        })
        .collect();
    BipartiteGraph::new(a, neighborhoods).expect("generated neighborhoods are valid")
}

/// `(m, r, beta)` with `1 <= r <= min(m, max_r)`, `beta_k <= max_beta`,
/// `beta_r >= 1`, plus the weight vector `alpha_k = beta_k * C(m-k, r-k)`.
pub fn random_admissible(
    rng: &mut impl Rng,
    max_m: usize,
    max_r: usize,
    max_beta: u64,
) -> (usize, usize, Vec<u64>, WeightVector) {
    let m = rng.random_range(2..=max_m);
    let r = rng.random_range(1..=max_r.min(m));
    let beta: Vec<u64> = (1..=r)
        .map(|k| {
            if k == r {
                rng.random_range(1..=max_beta)
            } else {
                rng.random_range(0..=max_beta)
            }
        })
        .collect();
    let alpha = alpha_from_beta(m, r, &beta);
    (m, r, beta, alpha)
}

pub fn alpha_from_beta(m: usize, r: usize, beta: &[u64]) -> WeightVector {
    WeightVector::from_pairs(
        beta.iter()
            .enumerate()
            .filter(|&(_, &b)| b > 0)
            .map(|(i, &b)| {
                let k = i + 1;
                (k, rat_int(b as i64) * rat_biguint(binomial(m - k, r - k)))
            })
            .collect(),
    )
    .expect("weights from multiplicities are valid")
}

/// Bipartite graph whose degree counts are multiples of `C(m,r) C(r,k)`:
/// picks `(m, r)`, then for a few degrees `k` adds one block of
/// `C(m,r) C(r,k)` right vertices with random `k`-subset neighborhoods
/// (repeats allowed), keeping the right class within `budget`.
pub fn random_divisible_graph(
    rng: &mut impl Rng,
    max_m: usize,
    max_r: usize,
    budget: usize,
) -> BipartiteGraph {
    loop {
        let m = rng.random_range(2..=max_m);
        let r = rng.random_range(1..=max_r.min(m));
        let moduli: Vec<(usize, usize)> = (1..=r)
            .filter_map(|k| {
                let modulus = (binomial(m, r) * binomial(r, k)).to_usize()?;
                (modulus <= budget).then_some((k, modulus))
            })
            .collect();
        if moduli.is_empty() {
            continue;
        }
        let mut neighborhoods = Vec::new();
        let mut remaining = budget;
        for &(k, modulus) in &moduli {
            let max_blocks = remaining / modulus;
            if max_blocks == 0 {
                continue;
            }
            let blocks = rng.random_range(0..=max_blocks.min(2));
            for _ in 0..blocks * modulus {
                let mut set: Vec<usize> = (0..m).collect();
                for i in 0..k {
                    let j = rng.random_range(i..m);
                    set.swap(i, j);
                }
                let mut subset = set[..k].to_vec();
                subset.sort_unstable();
                neighborhoods.push(subset);
            }
            remaining -= blocks * modulus;
        }
        if neighborhoods.is_empty() {
            continue;
        }
        let graph = BipartiteGraph::new(m, neighborhoods).expect("subsets are valid");
        debug_assert!(graph
            .divisibility_report()
            .map(|rep| rep.applies)
            .unwrap_or(false));
        return graph;
    }
}

/// A graph from a family known to satisfy the density lower bound: a random
/// tree, an even cycle, or a complete bipartite graph.
pub fn known_sidorenko_graph(rng: &mut impl Rng) -> (BipartiteGraph, String) {
    match rng.random_range(0..3) {
        0 => {
            let g = random_tree(rng, 7);
            let label = format!("tree v={}", g.vertex_count());
            (g, label)
        }
        1 => {
            let half = rng.random_range(2..=4);
            (
                BipartiteGraph::even_cycle(half).expect("half >= 2"),
                format!("cycle C{}", 2 * half),
            )
        }
        _ => {
            let a = rng.random_range(1..=3);
            let b = rng.random_range(1..=3);
            (
                BipartiteGraph::complete_bipartite(a, b).expect("positive sides"),
                format!("K{{{a},{b}}}"),
            )
        }
    }
}

/// Random tree on up to `max_vertices` vertices, presented bipartitely by
/// depth parity.
fn random_tree(rng: &mut impl Rng, max_vertices: usize) -> BipartiteGraph {
    let n = rng.random_range(2..=max_vertices);
    let mut parent = vec![0usize; n];
    let mut depth = vec![0usize; n];
    for v in 1..n {
        parent[v] = rng.random_range(0..v);
        depth[v] = depth[parent[v]] + 1;
    }
    let left: Vec<usize> = (0..n).filter(|&v| depth[v] % 2 == 0).collect();
    let right: Vec<usize> = (0..n).filter(|&v| depth[v] % 2 == 1).collect();
    let left_index: std::collections::HashMap<usize, usize> =
        left.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let neighborhoods = right
        .iter()
        .map(|&v| {
            let mut set: Vec<usize> = (1..n)
                .filter(|&u| parent[u] == v)
                .map(|u| left_index[&u])
                .collect();
            set.push(left_index[&parent[v]]);
            set.sort_unstable();
            set
        })
        .collect();
    BipartiteGraph::new(left.len(), neighborhoods).expect("tree edges are valid")
}

/// A rational in (0, 1) of the form `(a/b)^degree`, suitable for constant
/// graphons that keep fractional powers exact.
pub fn compatible_constant(rng: &mut impl Rng, denominator_bound: u64, degree: u64) -> Rat {
    let q = rng.random_range(2..=denominator_bound.max(2));
    let p = rng.random_range(1..q);
    let base = rat(p as i64, q as i64);
    let mut out = rat_int(1);
    for _ in 0..degree {
        out *= &base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_seeds_are_spread_and_deterministic() {
        let a = sub_seed(7, 0);
        let b = sub_seed(7, 1);
        let c = sub_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, sub_seed(7, 0));
    }

    #[test]
    fn generated_bipartite_graphs_are_valid() {
        let mut rng = rng_for(3);
        for _ in 0..50 {
            let g = random_bipartite(&mut rng, 3, 4, 7);
            assert!(g.a_size() >= 1 && g.a_size() <= 3);
            assert!(g.vertex_count() <= 7);
            assert!(g.edge_count() >= 1);
        }
    }

    #[test]
    fn admissible_weights_divide_cleanly() {
        let mut rng = rng_for(4);
        for _ in 0..30 {
            let (m, r, beta, alpha) = random_admissible(&mut rng, 5, 3, 2);
            let back = crate::hypergraph::chain_multiplicities(m, r, &alpha).unwrap();
            assert_eq!(back, beta);
        }
    }

    #[test]
    fn divisible_graphs_satisfy_divisibility() {
        let mut rng = rng_for(5);
        for _ in 0..20 {
            let g = random_divisible_graph(&mut rng, 5, 3, 40);
            assert!(g.divisibility_report().unwrap().applies);
            assert!(g.edge_count() >= 1);
        }
    }

    #[test]
    fn trees_have_tree_edge_counts() {
        let mut rng = rng_for(6);
        for _ in 0..30 {
            let (g, label) = known_sidorenko_graph(&mut rng);
            if label.starts_with("tree") {
                assert_eq!(g.edge_count(), g.vertex_count() - 1);
            }
        }
    }

    #[test]
    fn compatible_constants_have_exact_roots() {
        let mut rng = rng_for(7);
        for _ in 0..20 {
            let c = compatible_constant(&mut rng, 6, 12);
            let root = crate::qarith::exact_nth_root(&c, 12).unwrap();
            assert!(root > rat_int(0) && root < rat_int(1));
        }
    }
}
