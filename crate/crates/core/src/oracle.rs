//! Ground truth by exhaustion.
//!
//! The oracle decides unique solvability extensionally by trying every map
//! `A → B`, and the campaign runner uses it to cross-check the engines on
//! exhaustive and seeded-random instance families.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coinductive::{self, antifoundedness_of, verdict_from};
use crate::container::{ContainerSpec, FStructure};
use crate::inductive::{self, SolutionTable, Wellfoundedness};
use crate::instance::{AlgebraTable, Carrier, CoalgebraTable, EquationInstance, InstanceDoc, InstanceError};

pub const DEFAULT_CANDIDATE_BUDGET: u128 = 10_000_000;
pub const DEFAULT_INSTANCE_BUDGET: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("budget exceeded: {what} needs {}, budget is {budget}", show_required(*.required))]
    BudgetExceeded {
        what: &'static str,
        /// Saturates at `u128::MAX`.
        required: u128,
        budget: u128,
    },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn show_required(n: u128) -> String {
    if n == u128::MAX {
        "at least 2^128".to_owned()
    } else {
        n.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Cap on candidate functions `|B|^|A|` per oracle call.
    pub candidates: u128,
    /// Cap on instances per generator (and on algebras/coalgebras per probe).
    pub instances: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            candidates: DEFAULT_CANDIDATE_BUDGET,
            instances: DEFAULT_INSTANCE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionCount {
    pub count: u64,
    /// The first solutions in enumeration order, at most `cap` of them.
    pub solutions: Vec<SolutionTable>,
    pub truncated: bool,
}

fn checked_pow(base: usize, exp: usize) -> Option<u128> {
    (base as u128).checked_pow(u32::try_from(exp).ok()?)
}

fn candidates(inst: &EquationInstance, budget: &Budget) -> Result<u128, OracleError> {
    let required = checked_pow(inst.size_b(), inst.size_a()).unwrap_or(u128::MAX);
    if required > budget.candidates {
        return Err(OracleError::BudgetExceeded {
            what: "candidate functions",
            required,
            budget: budget.candidates,
        });
    }
    Ok(required)
}

fn solves(inst: &EquationInstance, f: &[usize]) -> bool {
    (0..f.len()).all(|a| {
        let fs = inst.alpha_at(a);
        let mapped = FStructure::new(fs.shape, fs.args.iter().map(|&x| f[x]).collect());
        inst.beta_at(&mapped) == f[a]
    })
}

/// Visits every map `A → B` in mixed-radix order (first element most
/// significant) until `visit` returns `false`.
fn for_each_candidate(n_a: usize, n_b: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if n_b == 0 && n_a > 0 {
        return;
    }
    let mut f = vec![0usize; n_a];
    loop {
        if !visit(&f) {
            return;
        }
        let mut pos = n_a;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            f[pos] += 1;
            if f[pos] < n_b {
                break;
            }
            f[pos] = 0;
        }
    }
}

pub fn enumerate_solutions(
    inst: &EquationInstance,
    cap: usize,
    budget: &Budget,
) -> Result<SolutionCount, OracleError> {
    candidates(inst, budget)?;
    let mut count = 0u64;
    let mut solutions = Vec::new();
    for_each_candidate(inst.size_a(), inst.size_b(), |f| {
        if solves(inst, f) {
            count += 1;
            if solutions.len() < cap {
                solutions.push(SolutionTable::from_total(f));
            }
        }
        true
    });
    Ok(SolutionCount {
        count,
        solutions,
        truncated: count > cap as u64,
    })
}

/// Number of solutions, stopping once `limit` are found.
pub fn count_solutions_up_to(inst: &EquationInstance, limit: u64, budget: &Budget) -> Result<u64, OracleError> {
    candidates(inst, budget)?;
    let mut count = 0u64;
    for_each_candidate(inst.size_a(), inst.size_b(), |f| {
        if solves(inst, f) {
            count += 1;
        }
        count < limit
    });
    Ok(count)
}

/// All instances over canonical carriers for a shape profile, in
/// mixed-radix order over the α table followed by the β table.
pub struct ExhaustiveInstances {
    functor: ContainerSpec,
    size_a: usize,
    size_b: usize,
    fa_len: usize,
    fb_len: usize,
    next: u128,
    total: u128,
}

impl ExhaustiveInstances {
    pub fn cardinality(&self) -> u128 {
        self.total
    }

    fn decode(&self, mut k: u128) -> EquationInstance {
        let fa = self.functor.indexer(self.size_a).expect("sized at construction");
        let mut beta = vec![0usize; self.fb_len];
        for slot in beta.iter_mut().rev() {
            *slot = (k % self.size_b as u128) as usize;
            k /= self.size_b as u128;
        }
        let mut alpha = vec![FStructure::nullary(0); self.size_a];
        for slot in alpha.iter_mut().rev() {
            *slot = fa.structure_at((k % self.fa_len as u128) as usize);
            k /= self.fa_len as u128;
        }
        canonical_instance(&self.functor, alpha, beta, self.size_b)
    }
}

impl Iterator for ExhaustiveInstances {
    type Item = EquationInstance;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        let inst = self.decode(self.next);
        self.next += 1;
        Some(inst)
    }
}

fn canonical_instance(functor: &ContainerSpec, alpha: Vec<FStructure>, beta: Vec<usize>, size_b: usize) -> EquationInstance {
    let size_a = alpha.len();
    EquationInstance::new(
        functor.clone(),
        CoalgebraTable {
            carrier: Carrier::canonical("domain", "a", size_a),
            entries: alpha,
        },
        AlgebraTable {
            carrier: Carrier::canonical("codomain", "b", size_b),
            entries: beta,
        },
    )
    .expect("canonical tables are valid")
}

pub fn exhaustive_instances(
    profile: &[usize],
    size_a: usize,
    size_b: usize,
    budget: &Budget,
) -> Result<ExhaustiveInstances, OracleError> {
    let functor = ContainerSpec::from_profile(profile)
        .map_err(|e| InstanceError::Validation { location: "profile".into(), message: e.to_string() })?;
    let overflow = || OracleError::BudgetExceeded {
        what: "instances",
        required: u128::MAX,
        budget: budget.instances,
    };
    let fa_len = functor.count_structures(size_a).ok_or_else(overflow)?;
    let fb_len = functor.count_structures(size_b).ok_or_else(overflow)?;
    let total = if size_b == 0 && size_a > 0 {
        0
    } else {
        checked_pow(fa_len, size_a)
            .and_then(|x| checked_pow(size_b, fb_len).and_then(|y| x.checked_mul(y)))
            .unwrap_or(u128::MAX)
    };
    if total > budget.instances {
        return Err(OracleError::BudgetExceeded {
            what: "instances",
            required: total,
            budget: budget.instances,
        });
    }
    Ok(ExhaustiveInstances {
        functor,
        size_a,
        size_b,
        fa_len,
        fb_len,
        next: 0,
        total,
    })
}

/// Tables drawn uniformly per entry from ChaCha8 seeded with `seed`.
pub fn random_instance(profile: &[usize], size_a: usize, size_b: usize, seed: u64) -> Result<EquationInstance, OracleError> {
    let functor = ContainerSpec::from_profile(profile)
        .map_err(|e| InstanceError::Validation { location: "profile".into(), message: e.to_string() })?;
    if size_b == 0 && size_a > 0 {
        return Err(InstanceError::Validation {
            location: "codomain".into(),
            message: "empty codomain with nonempty domain".into(),
        }
        .into());
    }
    let fa = functor
        .indexer(size_a)
        .map_err(|e| InstanceError::ParamsTooLarge(e.to_string()))?;
    let fb_len = functor
        .count_structures(size_b)
        .ok_or_else(|| InstanceError::ParamsTooLarge("|F B| overflows".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = (0..size_a).map(|_| fa.structure_at(rng.random_range(0..fa.len()))).collect();
    let beta = (0..fb_len).map(|_| rng.random_range(0..size_b)).collect();
    Ok(canonical_instance(&functor, alpha, beta, size_b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeWitness {
    pub instance: EquationInstance,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeVerdict {
    pub holds: bool,
    pub checked: u64,
    /// First partner table whose equation does not have exactly one solution.
    pub witness: Option<ProbeWitness>,
}

/// Bounded recursiveness: every algebra over `1..=max_b` elements gives
/// exactly one solution. The empty codomain is skipped, since instances with
/// nonempty domain and empty codomain are rejected as invalid.
pub fn probe_recursive(
    functor: &ContainerSpec,
    alpha: &CoalgebraTable,
    max_b: usize,
    budget: &Budget,
) -> Result<ProbeVerdict, OracleError> {
    let size_a = alpha.carrier.len();
    let mut checked = 0u64;
    let lowest = if size_a == 0 { 0 } else { 1 };
    for size_b in lowest..=max_b {
        let fb_len = functor
            .count_structures(size_b)
            .ok_or_else(|| InstanceError::ParamsTooLarge("|F B| overflows".into()))?;
        let algebras = checked_pow(size_b, fb_len).unwrap_or(u128::MAX);
        if algebras > budget.instances {
            return Err(OracleError::BudgetExceeded {
                what: "algebras",
                required: algebras,
                budget: budget.instances,
            });
        }
        let mut beta = vec![0usize; fb_len];
        for _ in 0..algebras {
            let inst = EquationInstance::new(
                functor.clone(),
                alpha.clone(),
                AlgebraTable {
                    carrier: Carrier::canonical("codomain", "b", size_b),
                    entries: beta.clone(),
                },
            )?;
            let count = count_solutions_up_to(&inst, 2, budget)?;
            checked += 1;
            if count != 1 {
                return Ok(ProbeVerdict {
                    holds: false,
                    checked,
                    witness: Some(ProbeWitness { instance: inst, count }),
                });
            }
            odometer(&mut beta, size_b);
        }
    }
    Ok(ProbeVerdict {
        holds: true,
        checked,
        witness: None,
    })
}

/// Bounded corecursiveness: every coalgebra over `0..=max_a` elements gives
/// exactly one solution.
pub fn probe_corecursive(
    functor: &ContainerSpec,
    beta: &AlgebraTable,
    max_a: usize,
    budget: &Budget,
) -> Result<ProbeVerdict, OracleError> {
    let size_b = beta.carrier.len();
    let mut checked = 0u64;
    let highest = if size_b == 0 { 0 } else { max_a };
    for size_a in 0..=highest {
        let fa = functor
            .indexer(size_a)
            .map_err(|e| InstanceError::ParamsTooLarge(e.to_string()))?;
        let coalgebras = checked_pow(fa.len(), size_a).unwrap_or(u128::MAX);
        if coalgebras > budget.instances {
            return Err(OracleError::BudgetExceeded {
                what: "coalgebras",
                required: coalgebras,
                budget: budget.instances,
            });
        }
        let mut digits = vec![0usize; size_a];
        for _ in 0..coalgebras {
            let inst = EquationInstance::new(
                functor.clone(),
                CoalgebraTable {
                    carrier: Carrier::canonical("domain", "a", size_a),
                    entries: digits.iter().map(|&k| fa.structure_at(k)).collect(),
                },
                beta.clone(),
            )?;
            let count = count_solutions_up_to(&inst, 2, budget)?;
            checked += 1;
            if count != 1 {
                return Ok(ProbeVerdict {
                    holds: false,
                    checked,
                    witness: Some(ProbeWitness { instance: inst, count }),
                });
            }
            odometer(&mut digits, fa.len());
        }
    }
    Ok(ProbeVerdict {
        holds: true,
        checked,
        witness: None,
    })
}

fn odometer(digits: &mut [usize], radix: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return;
        }
        *d = 0;
    }
}

/// One source of campaign instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorConfig {
    Exhaustive {
        profile: Vec<usize>,
        size_a: usize,
        size_b: usize,
    },
    Random {
        profile: Vec<usize>,
        size_a: usize,
        size_b: usize,
        count: u64,
    },
}

impl GeneratorConfig {
    pub fn label(&self) -> String {
        match self {
            Self::Exhaustive { profile, size_a, size_b } => {
                format!("exhaustive {profile:?} |A|={size_a} |B|={size_b}")
            }
            Self::Random { profile, size_a, size_b, count } => {
                format!("random {profile:?} |A|={size_a} |B|={size_b} x{count}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub seed: u64,
    pub generators: Vec<GeneratorConfig>,
    /// Largest codomain used by the recursiveness probe.
    pub probe_max_b: usize,
    pub budget: Budget,
    /// Failures kept in the report; tallies always count all of them.
    pub max_retained_failures: usize,
    /// Instances kept per observation kind.
    pub max_retained_observations: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self::standard(0, 10_000)
    }
}

impl CampaignConfig {
    /// Exhaustive sweeps over profiles `[0,1]` and `[0,2]` with
    /// `|A| ≤ 2`, `1 ≤ |B| ≤ 2`, plus `random` seeded instances over `[0,2]`
    /// at sizes 3.
    pub fn standard(seed: u64, random: u64) -> Self {
        let mut generators = Vec::new();
        for profile in [vec![0, 1], vec![0, 2]] {
            for size_a in 0..=2 {
                for size_b in 1..=2 {
                    generators.push(GeneratorConfig::Exhaustive {
                        profile: profile.clone(),
                        size_a,
                        size_b,
                    });
                }
            }
        }
        if random > 0 {
            generators.push(GeneratorConfig::Random {
                profile: vec![0, 2],
                size_a: 3,
                size_b: 3,
                count: random,
            });
        }
        Self {
            seed,
            generators,
            probe_max_b: 2,
            budget: Budget::default(),
            max_retained_failures: 20,
            max_retained_observations: 3,
        }
    }
}

/// Properties checked on every campaign instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    GraphFunctional,
    DomEqualsGraphDomain,
    GraphWithinCograph,
    EquivWithinBisim,
    BisimSymmetric,
    WellfoundedImpliesUnique,
    CriterionImpliesUnique,
    AntifoundedImpliesAtMostOne,
    ProbeRecursiveMatchesWellfounded,
    ExtractionsVerify,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::GraphFunctional,
        Property::DomEqualsGraphDomain,
        Property::GraphWithinCograph,
        Property::EquivWithinBisim,
        Property::BisimSymmetric,
        Property::WellfoundedImpliesUnique,
        Property::CriterionImpliesUnique,
        Property::AntifoundedImpliesAtMostOne,
        Property::ProbeRecursiveMatchesWellfounded,
        Property::ExtractionsVerify,
    ];
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignFailure {
    pub property: Property,
    pub generator: String,
    pub index: u64,
    pub detail: String,
    pub instance: InstanceDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub generator: String,
    pub index: u64,
    pub instance: InstanceDoc,
}

/// Facts recorded as data rather than pass/fail.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observations {
    pub wellfounded: u64,
    pub antifounded: u64,
    pub criterion_bisim: u64,
    pub criterion_equiv: u64,
    /// Histogram of oracle solution counts.
    pub solution_counts: BTreeMap<u64, u64>,
    /// Instances where `≈ ⊈ ≡`.
    pub bisim_not_within_equiv: u64,
    pub bisim_not_within_equiv_examples: Vec<Observation>,
    /// Instances with exactly one solution where both criteria fail.
    pub unique_without_criteria: u64,
    pub unique_without_criteria_examples: Vec<Observation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub instances_run: u64,
    pub tallies: BTreeMap<Property, Tally>,
    pub failures_total: u64,
    pub failures: Vec<CampaignFailure>,
    pub observations: Observations,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.failures_total == 0
    }
}

/// SplitMix64 finalizer, used to derive per-instance seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th random instance of generator `generator`.
pub fn derive_seed(seed: u64, generator: usize, index: u64) -> u64 {
    mix(mix(seed ^ mix(generator as u64)).wrapping_add(index))
}

#[derive(Debug)]
struct InstanceOutcome {
    failures: Vec<(Property, String)>,
    wellfounded: bool,
    antifounded: bool,
    criterion_bisim: bool,
    criterion_equiv: bool,
    count: u64,
    bisim_not_within_equiv: bool,
}

/// Runs every campaign property on one instance.
/// Each property with its failure detail, if any.
pub type PropertyResults = Vec<(Property, Result<(), String>)>;

pub fn check_instance(inst: &EquationInstance, probe_max_b: usize, budget: &Budget) -> Result<PropertyResults, OracleError> {
    let outcome = evaluate(inst, probe_max_b, budget)?;
    Ok(Property::ALL
        .iter()
        .map(|&p| {
            let r = match outcome.failures.iter().find(|(q, _)| *q == p) {
                Some((_, d)) => Err(d.clone()),
                None => Ok(()),
            };
            (p, r)
        })
        .collect())
}

fn evaluate(inst: &EquationInstance, probe_max_b: usize, budget: &Budget) -> Result<InstanceOutcome, OracleError> {
    let mut failures = Vec::new();
    let mut fail = |p: Property, detail: String| failures.push((p, detail));

    let dom = inductive::compute_dom(inst);
    let graph = inductive::compute_graph_lfp(inst);
    let bisim = coinductive::compute_bisim(inst);
    let cograph = coinductive::compute_cograph(inst);
    let count = count_solutions_up_to(inst, u64::MAX, budget)?;

    if let Err(c) = inductive::check_functional(&graph) {
        fail(Property::GraphFunctional, format!("a{} relates to b{} and b{}", c.a, c.b, c.b_star));
    }
    if graph.domain() != dom.member {
        fail(Property::DomEqualsGraphDomain, "Dom differs from dom".into());
    }
    if !graph.pairs.is_subset(&cograph.pairs) {
        fail(Property::GraphWithinCograph, "↓ ⊈ ↓∞".into());
    }
    if !cograph.equiv.is_subset(&bisim.pairs) {
        fail(Property::EquivWithinBisim, "≡ ⊈ ≈".into());
    }
    if !bisim.pairs.is_symmetric() {
        fail(Property::BisimSymmetric, "≈ not symmetric".into());
    }

    let wellfounded = Wellfoundedness {
        holds: dom.member.is_full(),
        rank: dom.rank.clone(),
        counterexample: dom.member.complement_iter().collect(),
    };
    let verdict = verdict_from(wellfounded, &bisim, &cograph);
    let antifounded = antifoundedness_of(&bisim).holds;
    if verdict.wellfounded.holds && count != 1 {
        fail(Property::WellfoundedImpliesUnique, format!("wellfounded but {count} solutions"));
    }
    if (verdict.criterion_bisim || verdict.criterion_equiv) && count != 1 {
        fail(
            Property::CriterionImpliesUnique,
            format!(
                "criterion_bisim={} criterion_equiv={} but {count} solutions",
                verdict.criterion_bisim, verdict.criterion_equiv
            ),
        );
    }
    if antifounded && count > 1 {
        fail(Property::AntifoundedImpliesAtMostOne, format!("antifounded but {count} solutions"));
    }

    let probe = probe_recursive(inst.functor(), inst.alpha(), probe_max_b, budget)?;
    if probe.holds != verdict.wellfounded.holds {
        fail(
            Property::ProbeRecursiveMatchesWellfounded,
            format!("probe says {} after {} algebras, wellfounded={}", probe.holds, probe.checked, verdict.wellfounded.holds),
        );
    }

    let extraction = inductive::extract_partial_solution_from(inst, &dom, &graph)
        .and_then(|partial| {
            match coinductive::verify_solution(inst, &partial, coinductive::VerifyMode::Restricted)? {
                coinductive::SquareCheck::Pass => Ok(()),
                coinductive::SquareCheck::FailAt(a) => Err(crate::EngineError::Inconsistency(format!("restricted square fails at a{a}"))),
            }
        })
        .and_then(|()| coinductive::extract_quotient_solution_from(inst, &bisim, &cograph).map(|_| ()));
    if let Err(e) = extraction {
        fail(Property::ExtractionsVerify, e.to_string());
    }

    Ok(InstanceOutcome {
        failures,
        wellfounded: verdict.wellfounded.holds,
        antifounded,
        criterion_bisim: verdict.criterion_bisim,
        criterion_equiv: verdict.criterion_equiv,
        count,
        bisim_not_within_equiv: !bisim.pairs.is_subset(&cograph.equiv),
    })
}

enum Source<'a> {
    Exhaustive(&'a [usize], usize, usize),
    Random(&'a [usize], usize, usize),
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport, OracleError> {
    let mut report = CampaignReport {
        seed: config.seed,
        instances_run: 0,
        tallies: Property::ALL.iter().map(|&p| (p, Tally::default())).collect(),
        failures_total: 0,
        failures: Vec::new(),
        observations: Observations::default(),
    };

    for (g, generator) in config.generators.iter().enumerate() {
        let label = generator.label();
        let (source, total) = match generator {
            GeneratorConfig::Exhaustive { profile, size_a, size_b } => {
                let it = exhaustive_instances(profile, *size_a, *size_b, &config.budget)?;
                let total = it.cardinality() as u64;
                (Source::Exhaustive(profile, *size_a, *size_b), total)
            }
            GeneratorConfig::Random { profile, size_a, size_b, count } => {
                if u128::from(*count) > config.budget.instances {
                    return Err(OracleError::BudgetExceeded {
                        what: "instances",
                        required: u128::from(*count),
                        budget: config.budget.instances,
                    });
                }
                (Source::Random(profile, *size_a, *size_b), *count)
            }
        };
        let build = |i: u64| -> Result<EquationInstance, OracleError> {
            match source {
                Source::Exhaustive(profile, size_a, size_b) => {
                    let mut it = exhaustive_instances(profile, size_a, size_b, &config.budget)?;
                    it.next = u128::from(i);
                    Ok(it.next().expect("index below cardinality"))
                }
                Source::Random(profile, size_a, size_b) => {
                    random_instance(profile, size_a, size_b, derive_seed(config.seed, g, i))
                }
            }
        };

        let outcomes: Vec<(EquationInstance, InstanceOutcome)> = (0..total)
            .into_par_iter()
            .map(|i| {
                let inst = build(i)?;
                let outcome = evaluate(&inst, config.probe_max_b, &config.budget)?;
                Ok((inst, outcome))
            })
            .collect::<Result<_, OracleError>>()?;

        for (i, (inst, outcome)) in outcomes.into_iter().enumerate() {
            report.instances_run += 1;
            for p in Property::ALL {
                let tally = report.tallies.get_mut(&p).expect("all properties tallied");
                match outcome.failures.iter().find(|(q, _)| *q == p) {
                    None => tally.passed += 1,
                    Some((_, detail)) => {
                        tally.failed += 1;
                        report.failures_total += 1;
                        if report.failures.len() < config.max_retained_failures {
                            report.failures.push(CampaignFailure {
                                property: p,
                                generator: label.clone(),
                                index: i as u64,
                                detail: detail.clone(),
                                instance: inst.to_doc(),
                            });
                        }
                    }
                }
            }
            let obs = &mut report.observations;
            obs.wellfounded += u64::from(outcome.wellfounded);
            obs.antifounded += u64::from(outcome.antifounded);
            obs.criterion_bisim += u64::from(outcome.criterion_bisim);
            obs.criterion_equiv += u64::from(outcome.criterion_equiv);
            *obs.solution_counts.entry(outcome.count).or_default() += 1;
            let record = || Observation {
                generator: label.clone(),
                index: i as u64,
                instance: inst.to_doc(),
            };
            if outcome.bisim_not_within_equiv {
                obs.bisim_not_within_equiv += 1;
                if obs.bisim_not_within_equiv_examples.len() < config.max_retained_observations {
                    obs.bisim_not_within_equiv_examples.push(record());
                }
            }
            if outcome.count == 1 && !outcome.criterion_bisim && !outcome.criterion_equiv {
                obs.unique_without_criteria += 1;
                if obs.unique_without_criteria_examples.len() < config.max_retained_observations {
                    obs.unique_without_criteria_examples.push(record());
                }
            }
        }
    }
    Ok(report)
}
