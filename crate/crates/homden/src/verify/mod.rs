//! Seeded verification harness.
//!
//! Every check draws random instances (graphs, weights, step graphons) from
//! a deterministic per-trial seed, computes both sides of an inequality or
//! identity through the library's evaluation pipeline, and records the
//! margin. Inequality checks additionally run one soundness record at a
//! constant graphon whose value is arranged so that every root taken along
//! the way is exact: there the margin must vanish *identically*, which
//! catches an implementation whose two sides have drifted apart in a way
//! that random slack would hide.

pub mod gen;
pub mod report;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::graphs::{BipartiteGraph, WeightVector};
use crate::hypergraph::{
    g_chain, h_chain, h_chain_with_window, hyper_density, product_kernel, weak_norming_margin,
    KernelRef,
};
use crate::qarith::{pow_rat_int, rat, rat_int, Rat};
use crate::reflection::{
    blow_up_class, blowup_spec, g_chain_spec, h_chain_spec, partite_isomorphic,
    reflection_hypergraph,
};
use crate::value::{DensityValue, EvalMode, Evaluator, DEFAULT_TERM_CAP};

use gen::{
    alpha_from_beta, compatible_constant, known_sidorenko_graph, random_admissible,
    random_bipartite, random_divisible_graph, rng_for,
};
pub use gen::{splitmix64, sub_seed};
pub use report::{margin_passes, Trial, TrialRecord, VerificationReport};

/// The named checks the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckId {
    /// The squared Möbius–Kantor graph dominates the (5,3) incidence graph,
    /// which dominates the 30th power of the edge density.
    MobiusSquare,
    /// A plain density dominates the weighted downset density with the
    /// graph's own degree weights (tensor-power / Hölder argument).
    HolderTrick,
    /// Weighted Sidorenko bound for a downset graph under admissible
    /// weights.
    DownsetTheorem,
    /// Sidorenko bound for graphs whose degree counts satisfy the
    /// divisibility conditions.
    MainTheorem,
    /// Weighted downset density equals the chain-hypergraph density under
    /// the product kernel.
    StarEquality,
    /// Chain-hypergraph density dominates the per-host sub-hypergraph
    /// density raised to the number of hosts (weak norming step).
    NormingInequality,
    /// Single-host chain density equals the weighted density of the full
    /// downset on `r` points with the chain multiplicities as weights.
    GAlphaEquality,
    /// Weighted Sidorenko bound for the full downset on `r` points, with
    /// the exponent bookkeeping cross-checked against the `(m, r)` side.
    CfsBound,
    /// The p-th moment of the rooted density equals the density of the
    /// p-fold blow-up, and the blow-up at the minimal admissible exponent
    /// satisfies the Sidorenko bound.
    BlowupPowerIdentity,
    /// Structured hypergraph evaluation agrees with the brute-force oracle
    /// (and the bipartite fast path with its oracle).
    OracleCrosscheck,
    /// Coset constructions are isomorphic to the direct chain and blow-up
    /// constructions, as partite hypergraphs.
    ReflectionIso,
    /// Trees, even cycles and complete bipartite graphs satisfy the
    /// Sidorenko bound.
    KnownSidorenkoSanity,
}

impl CheckId {
    pub const ALL: [CheckId; 12] = [
        CheckId::MobiusSquare,
        CheckId::HolderTrick,
        CheckId::DownsetTheorem,
        CheckId::MainTheorem,
        CheckId::StarEquality,
        CheckId::NormingInequality,
        CheckId::GAlphaEquality,
        CheckId::CfsBound,
        CheckId::BlowupPowerIdentity,
        CheckId::OracleCrosscheck,
        CheckId::ReflectionIso,
        CheckId::KnownSidorenkoSanity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::MobiusSquare => "mobius_square",
            CheckId::HolderTrick => "holder_trick",
            CheckId::DownsetTheorem => "downset_theorem",
            CheckId::MainTheorem => "main_theorem",
            CheckId::StarEquality => "star_equality",
            CheckId::NormingInequality => "norming_inequality",
            CheckId::GAlphaEquality => "g_alpha_equality",
            CheckId::CfsBound => "cfs_bound",
            CheckId::BlowupPowerIdentity => "blowup_power_identity",
            CheckId::OracleCrosscheck => "oracle_crosscheck",
            CheckId::ReflectionIso => "reflection_iso",
            CheckId::KnownSidorenkoSanity => "known_sidorenko_sanity",
        }
    }

    pub fn parse(s: &str) -> Option<CheckId> {
        CheckId::ALL.iter().copied().find(|c| c.as_str() == s)
    }

    /// One-line summary for CLI listings.
    pub fn summary(self) -> &'static str {
        match self {
            CheckId::MobiusSquare => {
                "t(M^2) >= t(F_{5,3}) >= t(K_2)^30 for the squared Möbius–Kantor graph"
            }
            CheckId::HolderTrick => "t(H) >= weighted downset density with H's degree weights",
            CheckId::DownsetTheorem => "weighted Sidorenko bound for downset graphs",
            CheckId::MainTheorem => "Sidorenko bound under the degree divisibility conditions",
            CheckId::StarEquality => "weighted downset density = chain hypergraph density",
            CheckId::NormingInequality => "hosts-to-the-power bound for chain hypergraphs",
            CheckId::GAlphaEquality => "single-host chain density = weighted full-downset density",
            CheckId::CfsBound => "weighted Sidorenko bound on r points + exponent bookkeeping",
            CheckId::BlowupPowerIdentity => "rooted p-th moment = blow-up density, and its bound",
            CheckId::OracleCrosscheck => "structured evaluation agrees with brute-force oracles",
            CheckId::ReflectionIso => "coset constructions match the direct ones up to isomorphism",
            CheckId::KnownSidorenkoSanity => "trees, even cycles, complete bipartite sanity bound",
        }
    }

    /// Whether the check ends with a constant-graphon soundness record
    /// (inequality checks only: for identities every trial already demands
    /// equality).
    fn constant_soundness(self) -> bool {
        !matches!(
            self,
            CheckId::StarEquality
                | CheckId::GAlphaEquality
                | CheckId::OracleCrosscheck
                | CheckId::ReflectionIso
        )
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::parse(s)
            .ok_or_else(|| Error::invalid("check", format!("unknown check name {s:?}")))
    }
}

/// Arithmetic-mode and slack policy for a run.
#[derive(Clone, Debug)]
pub struct TolerancePolicy {
    /// Forced evaluation mode. `None` keeps each check's default (exact
    /// where the computation stays in rationals, float where fractional
    /// exponents of sums are unavoidable). Checks whose pipeline is
    /// rational end to end ignore the override; forcing exact arithmetic
    /// onto a check that needs fractional powers of sums surfaces as an
    /// error rather than a silently skipped trial.
    pub mode: Option<EvalMode>,
    /// One-sided slack for float margins: a trial passes when
    /// `margin >= -relative_tolerance * max(1, |lhs|)`. Exact margins get
    /// no slack.
    pub relative_tolerance: Rat,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            mode: None,
            relative_tolerance: rat(1, 1_000_000_000),
        }
    }
}

/// Knobs shared by all checks.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    /// Random trials per run; a soundness record may be appended on top.
    pub trials: usize,
    /// Largest number of graphon blocks to draw.
    pub max_blocks: usize,
    /// Largest denominator for random graphon weights and values.
    pub denominator_bound: u64,
    /// Term cap handed to every density evaluation.
    pub term_cap: u128,
    /// Worker threads; 1 runs trials inline.
    pub jobs: usize,
    pub tolerance: TolerancePolicy,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            trials: 50,
            max_blocks: 3,
            denominator_bound: 6,
            term_cap: DEFAULT_TERM_CAP,
            jobs: 1,
            tolerance: TolerancePolicy::default(),
        }
    }
}

/// Where a trial's graphon comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum WPlan {
    /// Fresh random step graphon.
    Random,
    /// Constant graphon whose value is a perfect `degree`-th power, so the
    /// whole pipeline stays exact and the margin must be exactly zero.
    Constant,
}

type TrialFn = fn(u64, usize, &CheckConfig, WPlan) -> Result<Trial>;

/// Runs a named check: `trials` random trials seeded from `seed`, plus a
/// constant-graphon soundness record for inequality checks.
pub fn run_check(id: CheckId, seed: u64, config: &CheckConfig) -> Result<VerificationReport> {
    validate(config)?;
    let f = trial_fn(id);
    let mut outcomes = run_trials(seed, config, f)?;
    if id.constant_soundness() {
        let sub = sub_seed(seed, config.trials as u64);
        outcomes.push(f(sub, config.trials, config, WPlan::Constant)?);
    }
    Ok(VerificationReport::from_trials(
        id.as_str(),
        seed,
        config.trials,
        &outcomes,
    ))
}

/// Deliberately false claim: `t(M) >= 1.01 * t(K_2)^15` for the (un-blown)
/// Möbius–Kantor graph. The harness is expected to report `pass = false`;
/// the appended constant record fails deterministically, so a green run of
/// this control means the margin plumbing is broken.
pub fn run_negative_control(seed: u64, config: &CheckConfig) -> Result<VerificationReport> {
    validate(config)?;
    let f: TrialFn = trial_negative_control;
    let mut outcomes = run_trials(seed, config, f)?;
    let sub = sub_seed(seed, config.trials as u64);
    outcomes.push(f(sub, config.trials, config, WPlan::Constant)?);
    Ok(VerificationReport::from_trials(
        "negative_control",
        seed,
        config.trials,
        &outcomes,
    ))
}

fn validate(config: &CheckConfig) -> Result<()> {
    if config.trials == 0 {
        return Err(Error::invalid("trials", "at least one trial is required"));
    }
    if config.jobs == 0 {
        return Err(Error::invalid("jobs", "at least one worker is required"));
    }
    if config.max_blocks == 0 {
        return Err(Error::invalid("blocks", "at least one block is required"));
    }
    if config.denominator_bound < 2 {
        return Err(Error::invalid(
            "denominator bound",
            "bound below 2 leaves no non-trivial values",
        ));
    }
    Ok(())
}

fn run_trials(seed: u64, config: &CheckConfig, f: TrialFn) -> Result<Vec<Trial>> {
    if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?;
        pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|i| f(sub_seed(seed, i as u64), i, config, WPlan::Random))
                .collect()
        })
    } else {
        (0..config.trials)
            .map(|i| f(sub_seed(seed, i as u64), i, config, WPlan::Random))
            .collect()
    }
}

fn trial_fn(id: CheckId) -> TrialFn {
    match id {
        CheckId::MobiusSquare => trial_mobius_square,
        CheckId::HolderTrick => trial_holder_trick,
        CheckId::DownsetTheorem => trial_downset_theorem,
        CheckId::MainTheorem => trial_main_theorem,
        CheckId::StarEquality => trial_star_equality,
        CheckId::NormingInequality => trial_norming_inequality,
        CheckId::GAlphaEquality => trial_g_alpha_equality,
        CheckId::CfsBound => trial_cfs_bound,
        CheckId::BlowupPowerIdentity => trial_blowup_power_identity,
        CheckId::OracleCrosscheck => trial_oracle_crosscheck,
        CheckId::ReflectionIso => trial_reflection_iso,
        CheckId::KnownSidorenkoSanity => trial_known_sidorenko,
    }
}

/// Graphon for a trial: random, or a constant whose value is a perfect
/// `compat_degree`-th power (so downstream roots of that order are exact).
fn graphon_for(
    plan: WPlan,
    rng: &mut impl Rng,
    config: &CheckConfig,
    compat_degree: u64,
) -> Result<StepGraphon> {
    match plan {
        WPlan::Random => Ok(StepGraphon::random_from_rng(
            rng,
            config.max_blocks,
            config.denominator_bound,
        )),
        WPlan::Constant => {
            StepGraphon::constant(compatible_constant(rng, config.denominator_bound, compat_degree))
        }
    }
}

fn plan_tag(plan: WPlan) -> &'static str {
    match plan {
        WPlan::Random => "",
        WPlan::Constant => "; constant soundness",
    }
}

fn mode_label(mode: EvalMode) -> String {
    match mode {
        EvalMode::Exact {
            power_compatible: false,
        } => "exact".to_string(),
        EvalMode::Exact {
            power_compatible: true,
        } => "exact+roots".to_string(),
        EvalMode::Float { precision_bits } => format!("float{precision_bits}"),
    }
}

fn min_value(a: DensityValue, b: DensityValue) -> DensityValue {
    if b.cmp_value(&a) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Inequality trial: pass needs `margin >= -slack` on random inputs and an
/// identically zero exact margin on the constant soundness record.
fn bound_trial(
    config: &CheckConfig,
    plan: WPlan,
    sub: u64,
    instance: String,
    lhs: DensityValue,
    rhs: DensityValue,
    margin: DensityValue,
) -> Trial {
    let pass = match plan {
        WPlan::Random => margin_passes(&margin, &lhs, &config.tolerance.relative_tolerance),
        WPlan::Constant => matches!(&margin, DensityValue::Exact(q) if q.is_zero()),
    };
    Trial {
        sub_seed: sub,
        instance,
        lhs,
        rhs,
        margin,
        pass,
    }
}

/// Identity trial: margin is `-|lhs - rhs|`, so passing means the two
/// sides agree (exactly, or within float slack).
fn equality_trial(
    config: &CheckConfig,
    sub: u64,
    instance: String,
    lhs: DensityValue,
    rhs: DensityValue,
) -> Trial {
    let margin = lhs.sub(&rhs).abs().neg();
    let pass = margin_passes(&margin, &lhs, &config.tolerance.relative_tolerance);
    Trial {
        sub_seed: sub,
        instance,
        lhs,
        rhs,
        margin,
        pass,
    }
}

/// Least common multiple of the exponent denominators: the power the base
/// graphon has to be taken to for every fractional power of a *value* to
/// have an exact root.
fn exponent_lcm(exponents: &[Rat]) -> u64 {
    exponents.iter().fold(1u64, |acc, q| {
        let d = q.denom().to_u64().unwrap_or(1);
        num_integer::lcm(acc, d)
    })
}

// --- the individual checks -------------------------------------------------

fn trial_mobius_square(sub: u64, _index: usize, config: &CheckConfig, plan: WPlan) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let w = graphon_for(plan, &mut rng, config, 1)?;
    let m2 = BipartiteGraph::mobius_kantor().blow_up(2)?;
    let f53 = BipartiteGraph::incidence(5, 3)?;
    let t_m2 = w.hom_density_capped(&m2, config.term_cap)?;
    let t_f = w.hom_density_capped(&f53, config.term_cap)?;
    let bound = pow_rat_int(&w.edge_density(), 30);
    let upper = DensityValue::exact(&t_m2 - &t_f);
    let lower = DensityValue::exact(&t_f - &bound);
    let margin = min_value(upper, lower);
    let instance = format!("n={}{}", w.block_count(), plan_tag(plan));
    Ok(bound_trial(
        config,
        plan,
        sub,
        instance,
        DensityValue::exact(t_m2),
        DensityValue::exact(bound),
        margin,
    ))
}

fn trial_holder_trick(sub: u64, _index: usize, config: &CheckConfig, plan: WPlan) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let h = random_bipartite(&mut rng, 4, 4, 8);
    let alpha = h.alpha_profile()?;
    let m = h.a_size();
    let r = h.degree_profile()?.max_degree();
    let j = BipartiteGraph::downset(m, r)?;
    // Fractional degree weights force fractional powers of rho sums, which
    // only stay exact at constants; random trials default to float.
    let mode = match plan {
        WPlan::Random => config
            .tolerance
            .mode
            .unwrap_or_else(EvalMode::float_default),
        WPlan::Constant => EvalMode::exact_with_roots(),
    };
    let compat = exponent_lcm(&alpha.iter().map(|(_, q)| q.clone()).collect::<Vec<_>>());
    let w = graphon_for(plan, &mut rng, config, compat)?;
    let mut ev = Evaluator::new(mode, config.term_cap);
    let lhs = ev.from_rat(&w.hom_density_capped(&h, config.term_cap)?);
    let rhs = w.weighted_density(&j, &alpha, &mut ev)?;
    let margin = lhs.sub(&rhs);
    let instance = format!(
        "H: a={} b={} e={}; n={}; {}{}",
        h.a_size(),
        h.b_count(),
        h.edge_count(),
        w.block_count(),
        mode_label(mode),
        plan_tag(plan)
    );
    Ok(bound_trial(config, plan, sub, instance, lhs, rhs, margin))
}

fn trial_downset_theorem(
    sub: u64,
    _index: usize,
    config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let (m, r, beta, alpha) = random_admissible(&mut rng, 4, 3, 2);
    let j = BipartiteGraph::downset(m, r)?;
    let mode = match plan {
        WPlan::Random => config.tolerance.mode.unwrap_or_else(EvalMode::exact),
        WPlan::Constant => EvalMode::exact(),
    };
    let w = graphon_for(plan, &mut rng, config, 1)?;
    let mut ev = Evaluator::new(mode, config.term_cap);
    let lhs = w.weighted_density(&j, &alpha, &mut ev)?;
    let e_alpha = alpha.weighted_edge_exponent(m);
    let rhs = ev.pow_base(&w.edge_density(), &e_alpha)?;
    let margin = lhs.sub(&rhs);
    let instance = format!(
        "(m,r)=({m},{r}) beta={beta:?}; n={}; {}{}",
        w.block_count(),
        mode_label(mode),
        plan_tag(plan)
    );
    Ok(bound_trial(config, plan, sub, instance, lhs, rhs, margin))
}

fn trial_main_theorem(sub: u64, _index: usize, config: &CheckConfig, plan: WPlan) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let h = random_divisible_graph(&mut rng, 5, 3, 40);
    let w = graphon_for(plan, &mut rng, config, 1)?;
    let t = w.hom_density_capped(&h, config.term_cap)?;
    let bound = pow_rat_int(&w.edge_density(), h.edge_count() as i64);
    let margin = DensityValue::exact(&t - &bound);
    let instance = format!(
        "H: a={} b={} e={} (divisible); n={}{}",
        h.a_size(),
        h.b_count(),
        h.edge_count(),
        w.block_count(),
        plan_tag(plan)
    );
    Ok(bound_trial(
        config,
        plan,
        sub,
        instance,
        DensityValue::exact(t),
        DensityValue::exact(bound),
        margin,
    ))
}

fn trial_star_equality(sub: u64, index: usize, config: &CheckConfig, plan: WPlan) -> Result<Trial> {
    debug_assert_eq!(plan, WPlan::Random, "identity check has no constant record");
    let mut rng = rng_for(sub);
    let (m, r, beta, alpha) = random_admissible(&mut rng, 4, 3, 2);
    let h = h_chain(m, r, &alpha)?;
    let j = BipartiteGraph::downset(m, r)?;
    // Alternate between exact arithmetic on a power-compatible graphon and
    // plain float arithmetic, unless a mode was forced.
    let mode = config.tolerance.mode.unwrap_or(if index % 2 == 0 {
        EvalMode::exact_with_roots()
    } else {
        EvalMode::float_default()
    });
    let base = StepGraphon::random_from_rng(&mut rng, config.max_blocks, config.denominator_bound);
    let probe = product_kernel(&base, m, r, &alpha)?;
    let compat = exponent_lcm(probe.exponents());
    let (w, kernel) = if mode.is_exact() && compat > 1 {
        let powered = base.power_compatible(compat);
        let kernel = product_kernel(&powered, m, r, &alpha)?;
        (powered, kernel)
    } else {
        (base, probe)
    };
    let mut ev = Evaluator::new(mode, config.term_cap);
    let lhs = hyper_density(&h, &kernel, &mut ev)?;
    let rhs = w.weighted_density(&j, &alpha, &mut ev)?;
    let instance = format!(
        "(m,r)=({m},{r}) beta={beta:?}; n={}; {}",
        w.block_count(),
        mode_label(mode)
    );
    Ok(equality_trial(config, sub, instance, lhs, rhs))
}

fn trial_norming_inequality(
    sub: u64,
    _index: usize,
    config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    let mut rng = rng_for(sub);
    // r < m keeps several hosts in play; r = m would make the bound the
    // trivial identity t >= t^1.
    let (m, r, beta, alpha) = loop {
        let (m, r, beta, alpha) = random_admissible(&mut rng, 4, 3, 2);
        if r < m {
            break (m, r, beta, alpha);
        }
    };
    let (host, window) = h_chain_with_window(m, r, &alpha)?;
    let sub_graph = host.induced(&window)?;
    let mode = match plan {
        WPlan::Random => config
            .tolerance
            .mode
            .unwrap_or_else(EvalMode::exact_with_roots),
        WPlan::Constant => EvalMode::exact_with_roots(),
    };
    let base = graphon_for(plan, &mut rng, config, 1)?;
    let probe = product_kernel(&base, m, r, &alpha)?;
    let compat = exponent_lcm(probe.exponents());
    let (w, kernel) = if mode.is_exact() && compat > 1 {
        let powered = base.power_compatible(compat);
        let kernel = product_kernel(&powered, m, r, &alpha)?;
        (powered, kernel)
    } else {
        (base, probe)
    };
    let mut ev = Evaluator::new(mode, config.term_cap);
    let margin = weak_norming_margin(&host, &sub_graph, KernelRef::Product(&kernel), &mut ev)?;
    let lhs = hyper_density(&host, &kernel, &mut ev)?;
    let rhs = lhs.sub(&margin);
    let instance = format!(
        "(m,r)=({m},{r}) beta={beta:?}; n={}; {}{}",
        w.block_count(),
        mode_label(mode),
        plan_tag(plan)
    );
    Ok(bound_trial(config, plan, sub, instance, lhs, rhs, margin))
}

fn trial_g_alpha_equality(
    sub: u64,
    index: usize,
    config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    debug_assert_eq!(plan, WPlan::Random, "identity check has no constant record");
    let mut rng = rng_for(sub);
    let r = rng.random_range(1..=3usize);
    let beta: Vec<u64> = (1..=r)
        .map(|k| {
            if k == r {
                rng.random_range(1..=2)
            } else {
                rng.random_range(0..=2)
            }
        })
        .collect();
    let alpha = alpha_from_beta(r, r, &beta);
    let g = g_chain(r, &alpha)?;
    let j = BipartiteGraph::downset(r, r)?;
    let mode = config.tolerance.mode.unwrap_or(if index % 2 == 0 {
        EvalMode::exact_with_roots()
    } else {
        EvalMode::float_default()
    });
    let base = StepGraphon::random_from_rng(&mut rng, config.max_blocks, config.denominator_bound);
    let probe = product_kernel(&base, r, r, &alpha)?;
    let compat = exponent_lcm(probe.exponents());
    let (w, kernel) = if mode.is_exact() && compat > 1 {
        let powered = base.power_compatible(compat);
        let kernel = product_kernel(&powered, r, r, &alpha)?;
        (powered, kernel)
    } else {
        (base, probe)
    };
    let mut ev = Evaluator::new(mode, config.term_cap);
    let lhs = hyper_density(&g, &kernel, &mut ev)?;
    let rhs = w.weighted_density(&j, &alpha, &mut ev)?;
    let instance = format!(
        "r={r} beta={beta:?}; n={}; {}",
        w.block_count(),
        mode_label(mode)
    );
    Ok(equality_trial(config, sub, instance, lhs, rhs))
}

fn trial_cfs_bound(sub: u64, _index: usize, config: &CheckConfig, plan: WPlan) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let r = rng.random_range(1..=3usize);
    let beta: Vec<u64> = (1..=r)
        .map(|k| {
            if k == r {
                rng.random_range(1..=2)
            } else {
                rng.random_range(0..=2)
            }
        })
        .collect();
    let alpha_r = alpha_from_beta(r, r, &beta);
    let j = BipartiteGraph::downset(r, r)?;
    let mode = match plan {
        WPlan::Random => config.tolerance.mode.unwrap_or_else(EvalMode::exact),
        WPlan::Constant => EvalMode::exact(),
    };
    let w = graphon_for(plan, &mut rng, config, 1)?;
    let mut ev = Evaluator::new(mode, config.term_cap);
    let lhs = w.weighted_density(&j, &alpha_r, &mut ev)?;
    let e_beta = alpha_r.weighted_edge_exponent(r);
    let rhs = ev.pow_base(&w.edge_density(), &e_beta)?;
    let bound_margin = lhs.sub(&rhs);
    // Exponent bookkeeping: lifting the multiplicities to m points scales
    // the weighted edge exponent by the number of r-subsets of [m].
    let m = rng.random_range(r..=5usize);
    let alpha_m = alpha_from_beta(m, r, &beta);
    let e_alpha = alpha_m.weighted_edge_exponent(m);
    let hosts = rat_int(crate::qarith::binomial(m, r).to_i64().expect("small binomial"));
    let drift = &e_alpha - &e_beta * &hosts;
    let exponent_margin = DensityValue::exact(-drift.abs());
    let margin = min_value(bound_margin, exponent_margin);
    let instance = format!(
        "r={r} beta={beta:?} m={m}; n={}; {}{}",
        w.block_count(),
        mode_label(mode),
        plan_tag(plan)
    );
    Ok(bound_trial(config, plan, sub, instance, lhs, rhs, margin))
}

fn trial_blowup_power_identity(
    sub: u64,
    _index: usize,
    config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let h = random_bipartite(&mut rng, 3, 3, 6);
    let p = h
        .minimal_blowup_exponent()?
        .to_u64()
        .expect("minimal exponent divides a small factorial");
    let blown = h.blow_up(p as usize)?;
    let w = graphon_for(plan, &mut rng, config, 1)?;
    let moment = w.rooted_power_mean(&h, p, config.term_cap)?;
    let direct = w.hom_density_capped(&blown, config.term_cap)?;
    let identity_margin = DensityValue::exact(&moment - &direct).abs().neg();
    let bound = pow_rat_int(&w.edge_density(), (p * h.edge_count() as u64) as i64);
    let bound_margin = DensityValue::exact(&moment - &bound);
    let margin = min_value(identity_margin, bound_margin);
    let instance = format!(
        "H: a={} b={} e={}; p={p}; n={}{}",
        h.a_size(),
        h.b_count(),
        h.edge_count(),
        w.block_count(),
        plan_tag(plan)
    );
    Ok(bound_trial(
        config,
        plan,
        sub,
        instance,
        DensityValue::exact(moment),
        DensityValue::exact(bound),
        margin,
    ))
}

fn trial_oracle_crosscheck(
    sub: u64,
    _index: usize,
    config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    debug_assert_eq!(plan, WPlan::Random, "crosscheck has no constant record");
    let mut rng = rng_for(sub);
    let h = random_bipartite(&mut rng, 3, 4, 7);
    let w = StepGraphon::random_from_rng(&mut rng, config.max_blocks, config.denominator_bound);
    let lhs = DensityValue::exact(w.hom_density_capped(&h, config.term_cap)?);
    let rhs = DensityValue::exact(w.hom_density_oracle(&h, config.term_cap)?);
    let instance = format!(
        "H: a={} b={} e={}; n={}",
        h.a_size(),
        h.b_count(),
        h.edge_count(),
        w.block_count()
    );
    Ok(equality_trial(config, sub, instance, lhs, rhs))
}

fn trial_reflection_iso(
    sub: u64,
    index: usize,
    _config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    debug_assert_eq!(plan, WPlan::Random, "isomorphism check has no constant record");
    let mut rng = rng_for(sub);
    let (instance, direct, spec) = match index % 6 {
        0 => (
            "single-host chain, r=2".to_string(),
            g_chain(2, &WeightVector::ones(2))?,
            g_chain_spec(2)?,
        ),
        1 => (
            "single-host chain, r=3".to_string(),
            g_chain(3, &WeightVector::ones(3))?,
            g_chain_spec(3)?,
        ),
        2 => (
            "spread chain, (m,r)=(3,2)".to_string(),
            h_chain(3, 2, &alpha_from_beta(3, 2, &[1, 1]))?,
            h_chain_spec(3, 2)?,
        ),
        3 => (
            "spread chain, (m,r)=(4,2)".to_string(),
            h_chain(4, 2, &alpha_from_beta(4, 2, &[1, 1]))?,
            h_chain_spec(4, 2)?,
        ),
        4 => (
            "spread chain, (m,r)=(4,3)".to_string(),
            h_chain(4, 3, &alpha_from_beta(4, 3, &[1, 1, 1]))?,
            h_chain_spec(4, 3)?,
        ),
        _ => {
            let r = rng.random_range(2..=3usize);
            let class = rng.random_range(0..=r);
            let p = rng.random_range(2..=3usize);
            let direct = blow_up_class(&g_chain(r, &WeightVector::ones(r))?, class, p)?;
            let spec = blowup_spec(&g_chain_spec(r)?, class, p)?;
            (
                format!("blown-up chain, r={r} class={class} p={p}"),
                direct,
                spec,
            )
        }
    };
    let mirrored = reflection_hypergraph(&spec)?;
    let mapping = partite_isomorphic(&direct, &mirrored)?;
    let lhs = DensityValue::exact(rat_int(i64::from(mapping.is_some())));
    let rhs = DensityValue::exact(rat_int(1));
    let margin = lhs.sub(&rhs);
    let pass = !margin.is_negative();
    Ok(Trial {
        sub_seed: sub,
        instance,
        lhs,
        rhs,
        margin,
        pass,
    })
}

fn trial_known_sidorenko(
    sub: u64,
    _index: usize,
    config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let (h, label) = known_sidorenko_graph(&mut rng);
    let w = graphon_for(plan, &mut rng, config, 1)?;
    let t = w.hom_density_capped(&h, config.term_cap)?;
    let bound = pow_rat_int(&w.edge_density(), h.edge_count() as i64);
    let margin = DensityValue::exact(&t - &bound);
    let instance = format!("{label}; n={}{}", w.block_count(), plan_tag(plan));
    Ok(bound_trial(
        config,
        plan,
        sub,
        instance,
        DensityValue::exact(t),
        DensityValue::exact(bound),
        margin,
    ))
}

fn trial_negative_control(
    sub: u64,
    _index: usize,
    config: &CheckConfig,
    plan: WPlan,
) -> Result<Trial> {
    let mut rng = rng_for(sub);
    let w = graphon_for(plan, &mut rng, config, 1)?;
    let m = BipartiteGraph::mobius_kantor();
    let t = w.hom_density_capped(&m, config.term_cap)?;
    let bound = rat(101, 100) * pow_rat_int(&w.edge_density(), 15);
    let lhs = DensityValue::exact(t);
    let rhs = DensityValue::exact(bound);
    let margin = lhs.sub(&rhs);
    // No exact-zero requirement here: the control claims a false bound and
    // the usual margin rule is what should reject it.
    let pass = margin_passes(&margin, &lhs, &config.tolerance.relative_tolerance);
    let instance = format!("n={}{}", w.block_count(), plan_tag(plan));
    Ok(Trial {
        sub_seed: sub,
        instance,
        lhs,
        rhs,
        margin,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(trials: usize) -> CheckConfig {
        CheckConfig {
            trials,
            ..CheckConfig::default()
        }
    }

    #[test]
    fn check_names_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(CheckId::parse(id.as_str()), Some(id));
            assert_eq!(id.as_str().parse::<CheckId>().unwrap(), id);
        }
        assert!(CheckId::parse("negative_control").is_none());
        assert!("bogus".parse::<CheckId>().is_err());
    }

    #[test]
    fn reports_are_deterministic_in_the_seed() {
        let config = quick_config(3);
        let a = run_check(CheckId::DownsetTheorem, 7, &config).unwrap();
        let b = run_check(CheckId::DownsetTheorem, 7, &config).unwrap();
        assert_eq!(a, b);
        let c = run_check(CheckId::DownsetTheorem, 8, &config).unwrap();
        assert_ne!(a.records[0].sub_seed, c.records[0].sub_seed);
    }

    #[test]
    fn soundness_records_are_appended_for_bounds_only() {
        let config = quick_config(2);
        let bound = run_check(CheckId::MainTheorem, 3, &config).unwrap();
        assert_eq!(bound.trials, 2);
        assert_eq!(bound.records.len(), 3);
        assert!(bound.records[2].instance.contains("constant soundness"));
        assert_eq!(bound.records[2].margin, "0");

        let identity = run_check(CheckId::OracleCrosscheck, 3, &config).unwrap();
        assert_eq!(identity.records.len(), 2);
    }

    #[test]
    fn parallel_trials_match_serial_trials() {
        let serial = quick_config(4);
        let parallel = CheckConfig {
            jobs: 3,
            ..quick_config(4)
        };
        let a = run_check(CheckId::KnownSidorenkoSanity, 11, &serial).unwrap();
        let b = run_check(CheckId::KnownSidorenkoSanity, 11, &parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_control_fails() {
        let config = quick_config(2);
        let report = run_negative_control(5, &config).unwrap();
        assert_eq!(report.check, "negative_control");
        assert!(!report.pass);
        // The constant record is a deterministic failure even if random
        // graphons happen to slip past the false bound.
        assert!(!report.records.last().unwrap().pass);
    }

    #[test]
    fn zero_trials_is_rejected() {
        let config = quick_config(0);
        assert!(run_check(CheckId::MainTheorem, 1, &config).is_err());
    }

    #[test]
    fn forced_float_mode_is_respected() {
        let mut config = quick_config(2);
        config.tolerance.mode = Some(EvalMode::float_default());
        let report = run_check(CheckId::DownsetTheorem, 9, &config).unwrap();
        assert!(report.pass);
        // Random records run float; the soundness record stays exact.
        assert!(report.records[0].margin.starts_with("f128:"));
        assert_eq!(report.records.last().unwrap().margin, "0");
    }

    #[test]
    fn every_check_passes_a_short_run() {
        let config = quick_config(2);
        for id in CheckId::ALL {
            let report = run_check(id, 42, &config).unwrap();
            assert!(report.pass, "{} failed: {}", id, report.min_margin);
            assert_eq!(report.seed, 42);
            assert_eq!(report.check, id.as_str());
        }
    }
}
