//! Coset descriptions of the chain hypergraphs.
//!
//! A `ReflectionSpec` names a symmetric group `S_m` (optionally extended to
//! `S_m x S_p`) together with one generating set of adjacent transpositions
//! per vertex class. Class `i` consists of the left cosets of the parabolic
//! subgroup generated by that set, and the edges are the coset tuples
//! `(w W_0, .., w W_t)` over all group elements `w`, deduplicated. The
//! chain hypergraphs arise from stabilizers of flags of subsets, and
//! blowing up one class corresponds to extending the group by a factor
//! `S_p` that all other classes absorb.
//!
//! Group elements are stored as image vectors over `m + p` points; the
//! extension factor acts on the trailing block.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::PartiteHypergraph;

/// Largest group order `reflection_hypergraph` will enumerate: `10! * 4!`.
pub const DEFAULT_GROUP_CAP: u128 = 87_091_200;

type Img = Vec<usize>;

fn identity(points: usize) -> Img {
    (0..points).collect()
}

/// `(a * b)(x) = a(b(x))`.
fn compose(a: &[usize], b: &[usize]) -> Img {
    b.iter().map(|&x| a[x]).collect()
}

/// A symmetric group with one generator set of adjacent transpositions per
/// vertex class. Entry `+i` is the swap of positions `i, i+1` of the main
/// block (1-based); entry `-j` is the swap of positions `j, j+1` of the
/// extension block, which requires `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ReflectionSpecRepr", into = "ReflectionSpecRepr")]
pub struct ReflectionSpec {
    m: usize,
    p: Option<usize>,
    generator_sets: Vec<Vec<i32>>,
}

#[derive(Serialize, Deserialize)]
struct ReflectionSpecRepr {
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    generator_sets: Vec<Vec<i32>>,
}

impl TryFrom<ReflectionSpecRepr> for ReflectionSpec {
    type Error = Error;

    fn try_from(repr: ReflectionSpecRepr) -> Result<Self> {
        ReflectionSpec::new(repr.m, repr.p, repr.generator_sets)
    }
}

impl From<ReflectionSpec> for ReflectionSpecRepr {
    fn from(spec: ReflectionSpec) -> Self {
        ReflectionSpecRepr {
            m: spec.m,
            p: spec.p,
            generator_sets: spec.generator_sets,
        }
    }
}

impl ReflectionSpec {
    pub fn new(m: usize, p: Option<usize>, generator_sets: Vec<Vec<i32>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("reflection spec", "m must be positive"));
        }
        if p == Some(0) {
            return Err(Error::invalid("reflection spec", "p must be positive when set"));
        }
        if generator_sets.is_empty() {
            return Err(Error::invalid("reflection spec", "no generator sets"));
        }
        let mut sets = Vec::with_capacity(generator_sets.len());
        for set in generator_sets {
            let mut cleaned: Vec<i32> = set.into_iter().collect();
            cleaned.sort_unstable();
            cleaned.dedup();
            for &g in &cleaned {
                if g > 0 {
                    let i = g as usize;
                    if i >= m {
                        return Err(Error::invalid(
                            "reflection spec",
                            format!("generator {g} out of range for m={m}"),
                        ));
                    }
                } else if g < 0 {
                    let j = (-g) as usize;
                    match p {
                        None => {
                            return Err(Error::invalid(
                                "reflection spec",
                                format!("generator {g} names the extension block but p is unset"),
                            ));
                        }
                        Some(p) if j >= p => {
                            return Err(Error::invalid(
                                "reflection spec",
                                format!("generator {g} out of range for p={p}"),
                            ));
                        }
                        Some(_) => {}
                    }
                } else {
                    return Err(Error::invalid("reflection spec", "generator 0 is meaningless"));
                }
            }
            sets.push(cleaned);
        }
        Ok(ReflectionSpec {
            m,
            p,
            generator_sets: sets,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> Option<usize> {
        self.p
    }

    pub fn class_count(&self) -> usize {
        self.generator_sets.len()
    }

    pub fn generator_sets(&self) -> &[Vec<i32>] {
        &self.generator_sets
    }

    fn points(&self) -> usize {
        self.m + self.p.unwrap_or(0)
    }

    pub fn group_order(&self) -> u128 {
        let fact = |n: usize| (1..=n as u128).product::<u128>();
        fact(self.m).saturating_mul(fact(self.p.unwrap_or(1)))
    }

    fn transposition(&self, g: i32) -> Img {
        let mut img = identity(self.points());
        let a = if g > 0 {
            g as usize - 1
        } else {
            self.m + (-g) as usize - 1
        };
        img.swap(a, a + 1);
        img
    }

    /// Closure of one generator set.
    fn subgroup(&self, class: usize) -> Vec<Img> {
        let gens: Vec<Img> = self.generator_sets[class]
            .iter()
            .map(|&g| self.transposition(g))
            .collect();
        let mut seen = BTreeSet::new();
        let mut queue = vec![identity(self.points())];
        seen.insert(queue[0].clone());
        while let Some(w) = queue.pop() {
            for gen in &gens {
                let next = compose(&w, gen);
                if seen.insert(next.clone()) {
                    queue.push(next);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Every element of `S_m x S_p`, guarded by `cap`.
    fn full_group(&self, cap: u128) -> Result<Vec<Img>> {
        let order = self.group_order();
        if order > cap {
            return Err(Error::GroupTooLarge { order, cap });
        }
        let p = self.p.unwrap_or(0);
        let mains = (0..self.m).permutations(self.m);
        let mut elements = Vec::with_capacity(order as usize);
        for main in mains {
            let auxes: Vec<Img> = if p == 0 {
                vec![Vec::new()]
            } else {
                (self.m..self.m + p).permutations(p).collect()
            };
            for aux in auxes {
                let mut img = main.clone();
                img.extend(aux);
                elements.push(img);
            }
        }
        Ok(elements)
    }
}

fn coset_label(rep: &[usize], m: usize) -> String {
    let main: Vec<String> = rep[..m].iter().map(|&x| (x + 1).to_string()).collect();
    if rep.len() == m {
        format!("({})", main.join(","))
    } else {
        let aux: Vec<String> = rep[m..].iter().map(|&x| (x - m + 1).to_string()).collect();
        format!("({}|{})", main.join(","), aux.join(","))
    }
}

/// The coset hypergraph of a spec: classes are cosets of the parabolic
/// subgroups (labelled by their lexicographically least element), edges the
/// distinct coset tuples of the group elements. Levels are positional.
pub fn reflection_hypergraph(spec: &ReflectionSpec) -> Result<PartiteHypergraph> {
    reflection_hypergraph_capped(spec, DEFAULT_GROUP_CAP)
}

pub fn reflection_hypergraph_capped(
    spec: &ReflectionSpec,
    cap: u128,
) -> Result<PartiteHypergraph> {
    let group = spec.full_group(cap)?;
    let mut classes = Vec::with_capacity(spec.class_count());
    let mut coset_of: Vec<HashMap<Img, usize>> = Vec::with_capacity(spec.class_count());
    for class in 0..spec.class_count() {
        let subgroup = spec.subgroup(class);
        // Canonical representative per element: least image vector in its
        // left coset. Reps are indexed in lexicographic order.
        let mut rep_of: HashMap<Img, Img> = HashMap::with_capacity(group.len());
        let mut reps: BTreeSet<Img> = BTreeSet::new();
        for w in &group {
            let rep = subgroup
                .iter()
                .map(|h| compose(w, h))
                .min()
                .expect("subgroup contains the identity");
            reps.insert(rep.clone());
            rep_of.insert(w.clone(), rep);
        }
        let index: BTreeMap<Img, usize> = reps
            .iter()
            .enumerate()
            .map(|(i, rep)| (rep.clone(), i))
            .collect();
        classes.push(
            reps.iter()
                .map(|rep| coset_label(rep, spec.m))
                .collect::<Vec<_>>(),
        );
        coset_of.push(
            rep_of
                .into_iter()
                .map(|(w, rep)| (w, index[&rep]))
                .collect(),
        );
    }

    let mut edges: BTreeSet<Vec<usize>> = BTreeSet::new();
    for w in &group {
        edges.insert((0..spec.class_count()).map(|c| coset_of[c][w]).collect());
    }

    PartiteHypergraph::new(
        (0..spec.class_count()).collect(),
        classes,
        edges.into_iter().collect(),
    )
}

/// Spec whose coset hypergraph is the multiplicity-one chain hypergraph on
/// `[r]`: stabilizers of an element, of the flags `{1..k}`, and the whole
/// group.
pub fn g_chain_spec(r: usize) -> Result<ReflectionSpec> {
    if r == 0 {
        return Err(Error::invalid("reflection spec", "r must be positive"));
    }
    let all: Vec<i32> = (1..r as i32).collect();
    let mut sets = Vec::with_capacity(r + 1);
    // Level 0: stabilizer of the element 1.
    sets.push(all.iter().copied().filter(|&g| g != 1).collect());
    // Level k: stabilizer of {1..k}.
    for k in 1..r as i32 {
        sets.push(all.iter().copied().filter(|&g| g != k).collect());
    }
    // Level r: the whole group.
    sets.push(all);
    ReflectionSpec::new(r, None, sets)
}

/// Spec for the chain hypergraph spread over all `r`-subsets of `[m]`:
/// stabilizers of flags (k-subset inside an r-subset) in `S_m`.
pub fn h_chain_spec(m: usize, r: usize) -> Result<ReflectionSpec> {
    if r == 0 || r > m {
        return Err(Error::invalid(
            "reflection spec",
            format!("need 1 <= r <= m, got r={r}, m={m}"),
        ));
    }
    let mut sets = Vec::with_capacity(r + 1);
    // Level 0: stabilizer of the element 1 in S_m.
    sets.push((2..m as i32).collect::<Vec<i32>>());
    // Level k < r: stabilizer of the flag {1..k} inside {1..r}; the tail
    // generators fix the r-subset, so s_r stays excluded.
    for k in 1..r as i32 {
        let mut set: Vec<i32> = (1..r as i32).filter(|&g| g != k).collect();
        set.extend(r as i32 + 1..m as i32);
        sets.push(set);
    }
    // Level r: stabilizer of {1..r}.
    let mut top: Vec<i32> = (1..r as i32).collect();
    top.extend(r as i32 + 1..m as i32);
    sets.push(top);
    ReflectionSpec::new(m, None, sets)
}

/// Extends the group by a factor `S_p` that every class except `class`
/// absorbs completely; the chosen class keeps only the tail of the factor,
/// so its cosets split into `p` copies.
pub fn blowup_spec(spec: &ReflectionSpec, class: usize, p: usize) -> Result<ReflectionSpec> {
    if spec.p.is_some() {
        return Err(Error::invalid(
            "reflection spec",
            "spec already carries an extension block",
        ));
    }
    if class >= spec.class_count() {
        return Err(Error::invalid("reflection spec", "class out of range"));
    }
    if p == 0 {
        return Err(Error::invalid("reflection spec", "p must be positive"));
    }
    let full: Vec<i32> = (1..p as i32).map(|j| -j).collect();
    let tail: Vec<i32> = (2..p as i32).map(|j| -j).collect();
    let sets = spec
        .generator_sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let mut extended = set.clone();
            extended.extend(if i == class { &tail } else { &full });
            extended
        })
        .collect();
    ReflectionSpec::new(spec.m, Some(p), sets)
}

/// Replaces class `class` by `p` labelled copies of each vertex; every edge
/// splits into `p` edges, one per copy.
pub fn blow_up_class(
    g: &PartiteHypergraph,
    class: usize,
    p: usize,
) -> Result<PartiteHypergraph> {
    if class >= g.class_count() {
        return Err(Error::invalid("hypergraph", "class out of range"));
    }
    if p == 0 {
        return Err(Error::invalid("hypergraph", "blow-up factor must be positive"));
    }
    let classes: Vec<Vec<String>> = (0..g.class_count())
        .map(|i| {
            if i == class {
                g.class(i)
                    .iter()
                    .flat_map(|label| (1..=p).map(move |c| format!("{label}@{c}")))
                    .collect()
            } else {
                g.class(i).to_vec()
            }
        })
        .collect();
    let mut edges = Vec::with_capacity(g.edge_count() * p);
    for edge in g.edges() {
        for c in 0..p {
            let mut copy = edge.clone();
            copy[class] = edge[class] * p + c;
            edges.push(copy);
        }
    }
    PartiteHypergraph::new(g.levels().to_vec(), classes, edges)
}

const ISO_CLASS_CAP: usize = 64;
const ISO_EDGE_CAP: usize = 10_000;

/// Searches for class-preserving vertex bijections mapping the edge set of
/// `a` onto the edge set of `b`; level values are ignored. Returns the
/// per-class images of `a`'s vertices, or `None` if the graphs differ.
pub fn partite_isomorphic(
    a: &PartiteHypergraph,
    b: &PartiteHypergraph,
) -> Result<Option<Vec<Vec<usize>>>> {
    if a.class_count() != b.class_count()
        || a.class_sizes() != b.class_sizes()
        || a.edge_count() != b.edge_count()
    {
        return Ok(None);
    }
    if a.class_sizes().iter().any(|&s| s > ISO_CLASS_CAP) {
        return Err(Error::IsoLimit(format!(
            "class size exceeds {ISO_CLASS_CAP}"
        )));
    }
    if a.edge_count() > ISO_EDGE_CAP {
        return Err(Error::IsoLimit(format!("edge count exceeds {ISO_EDGE_CAP}")));
    }

    let (colors_a, colors_b) = match joint_colors(a, b) {
        Some(pair) => pair,
        None => return Ok(None),
    };

    let classes = a.class_count();
    let mut incident: Vec<Vec<Vec<usize>>> = a
        .class_sizes()
        .iter()
        .map(|&s| vec![Vec::new(); s])
        .collect();
    for (ei, edge) in a.edges().iter().enumerate() {
        for (i, &v) in edge.iter().enumerate() {
            incident[i][v].push(ei);
        }
    }

    // Targets per color in b.
    let mut targets: Vec<HashMap<usize, Vec<usize>>> = vec![HashMap::new(); classes];
    for (i, class) in colors_b.iter().enumerate() {
        for (w, &color) in class.iter().enumerate() {
            targets[i].entry(color).or_default().push(w);
        }
    }

    // Assign the most constrained vertices first.
    let mut order: Vec<(usize, usize)> = (0..classes)
        .flat_map(|i| (0..a.class(i).len()).map(move |v| (i, v)))
        .collect();
    order.sort_by_key(|&(i, v)| (targets[i][&colors_a[i][v]].len(), i, v));

    let mut search = IsoSearch {
        a,
        b_edges: b.edges().iter().collect(),
        order,
        targets,
        colors_a,
        incident,
        pairs_a: PairCounts::new(a),
        pairs_b: PairCounts::new(b),
        mapping: a.class_sizes().iter().map(|&s| vec![None; s]).collect(),
        used: b.class_sizes().iter().map(|&s| vec![false; s]).collect(),
        remaining: a.edges().iter().map(Vec::len).collect(),
        trail: Vec::new(),
    };
    if !search.run(0) {
        return Ok(None);
    }
    let result: Vec<Vec<usize>> = search
        .mapping
        .into_iter()
        .map(|class| class.into_iter().map(|w| w.expect("complete")).collect())
        .collect();
    // The mapped edge set has the right size and sits inside b's, so the
    // sets are equal; keep a direct check anyway.
    debug_assert!(a.edges().iter().all(|edge| {
        let image: Vec<usize> = edge
            .iter()
            .enumerate()
            .map(|(j, &u)| result[j][u])
            .collect();
        b.edges().iter().any(|e| *e == image)
    }));
    Ok(Some(result))
}

/// Co-occurrence counts: how many edges contain both of a pair of vertices
/// from different classes. An isomorphism preserves them exactly, which
/// prunes the search long before whole edges are assigned.
struct PairCounts {
    classes: usize,
    sizes: Vec<usize>,
    mats: Vec<Vec<u32>>,
}

impl PairCounts {
    fn new(g: &PartiteHypergraph) -> Self {
        let classes = g.class_count();
        let sizes = g.class_sizes();
        let mut mats = vec![Vec::new(); classes * classes];
        for i in 0..classes {
            for j in i + 1..classes {
                mats[i * classes + j] = vec![0u32; sizes[i] * sizes[j]];
            }
        }
        for edge in g.edges() {
            for i in 0..classes {
                for j in i + 1..classes {
                    mats[i * classes + j][edge[i] * sizes[j] + edge[j]] += 1;
                }
            }
        }
        PairCounts {
            classes,
            sizes,
            mats,
        }
    }

    fn get(&self, i: usize, v: usize, j: usize, u: usize) -> u32 {
        if i < j {
            self.mats[i * self.classes + j][v * self.sizes[j] + u]
        } else {
            self.mats[j * self.classes + i][u * self.sizes[i] + v]
        }
    }
}

struct IsoSearch<'a> {
    a: &'a PartiteHypergraph,
    b_edges: BTreeSet<&'a Vec<usize>>,
    order: Vec<(usize, usize)>,
    targets: Vec<HashMap<usize, Vec<usize>>>,
    colors_a: Vec<Vec<usize>>,
    incident: Vec<Vec<Vec<usize>>>,
    pairs_a: PairCounts,
    pairs_b: PairCounts,
    mapping: Vec<Vec<Option<usize>>>,
    used: Vec<Vec<bool>>,
    remaining: Vec<usize>,
    trail: Vec<(usize, usize, usize)>,
}

impl IsoSearch<'_> {
    fn run(&mut self, pos: usize) -> bool {
        let Some(&(i, v)) = self.order.get(pos) else {
            return true;
        };
        let candidates = self.targets[i][&self.colors_a[i][v]].clone();
        'candidates: for w in candidates {
            if self.used[i][w] {
                continue;
            }
            // Pair counts against everything assigned in other classes.
            for &(j, u, x) in &self.trail {
                if j != i && self.pairs_a.get(i, v, j, u) != self.pairs_b.get(i, w, j, x) {
                    continue 'candidates;
                }
            }
            self.mapping[i][v] = Some(w);
            self.used[i][w] = true;
            self.trail.push((i, v, w));
            let mut completed = 0;
            let mut ok = true;
            for idx in 0..self.incident[i][v].len() {
                let ei = self.incident[i][v][idx];
                self.remaining[ei] -= 1;
                completed = idx + 1;
                if self.remaining[ei] == 0 {
                    let image: Vec<usize> = self.a.edges()[ei]
                        .iter()
                        .enumerate()
                        .map(|(j, &u)| self.mapping[j][u].expect("edge fully assigned"))
                        .collect();
                    if !self.b_edges.contains(&image) {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && self.run(pos + 1) {
                return true;
            }
            for idx in 0..completed {
                let ei = self.incident[i][v][idx];
                self.remaining[ei] += 1;
            }
            self.trail.pop();
            self.mapping[i][v] = None;
            self.used[i][w] = false;
        }
        false
    }
}

/// Iterated refinement of vertex colors shared across the two graphs:
/// a vertex's signature is the multiset of color tuples of its incident
/// edges. Returns `None` when the per-class color histograms diverge.
#[allow(clippy::type_complexity)]
fn joint_colors(
    a: &PartiteHypergraph,
    b: &PartiteHypergraph,
) -> Option<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let classes = a.class_count();
    let mut colors_a: Vec<Vec<usize>> = a.class_sizes().iter().map(|&s| vec![0; s]).collect();
    let mut colors_b: Vec<Vec<usize>> = b.class_sizes().iter().map(|&s| vec![0; s]).collect();
    let mut total = classes;
    loop {
        let mut new_a: Vec<Vec<(usize, Vec<Vec<usize>>)>> = Vec::with_capacity(classes);
        let mut new_b = Vec::with_capacity(classes);
        for (g, colors, out) in [
            (a, &colors_a, &mut new_a),
            (b, &colors_b, &mut new_b),
        ] {
            for i in 0..classes {
                let mut sigs: Vec<(usize, Vec<Vec<usize>>)> = colors[i]
                    .iter()
                    .map(|&c| (c, Vec::new()))
                    .collect();
                for edge in g.edges() {
                    let tuple: Vec<usize> = edge
                        .iter()
                        .enumerate()
                        .map(|(j, &u)| colors[j][u])
                        .collect();
                    sigs[edge[i]].1.push(tuple);
                }
                for sig in &mut sigs {
                    sig.1.sort();
                }
                out.push(sigs);
            }
        }
        // Rank signatures jointly per class so colors are comparable.
        let mut next_total = 0;
        for i in 0..classes {
            let mut all: Vec<&(usize, Vec<Vec<usize>>)> =
                new_a[i].iter().chain(new_b[i].iter()).collect();
            all.sort();
            all.dedup();
            let rank: HashMap<&(usize, Vec<Vec<usize>>), usize> =
                all.iter().enumerate().map(|(r, &sig)| (sig, r)).collect();
            next_total += all.len();
            for (v, sig) in new_a[i].iter().enumerate() {
                colors_a[i][v] = rank[sig];
            }
            for (v, sig) in new_b[i].iter().enumerate() {
                colors_b[i][v] = rank[sig];
            }
        }
        // Histograms must match for an isomorphism to exist.
        for i in 0..classes {
            let mut ha = colors_a[i].clone();
            let mut hb = colors_b[i].clone();
            ha.sort_unstable();
            hb.sort_unstable();
            if ha != hb {
                return None;
            }
        }
        if next_total == total {
            return Some((colors_a, colors_b));
        }
        total = next_total;
    }
}
