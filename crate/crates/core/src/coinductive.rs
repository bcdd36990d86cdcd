//! Greatest-fixpoint analyses: bisimilarity `≈` on `B`, the quotient
//! `B/≈*`, the coinductive graph `↓∞` with `Dom∞` and `≡`, and the two
//! unique-solvability criteria built from them.
//!
//! Iterations start from the total relation and shrink. The bisimilarity
//! operator lifts the reflexive-transitive closure of the current iterate,
//! not the iterate itself, so the closure is recomputed every round.

use std::collections::HashMap;

use log::debug;

use crate::container::{FStructure, StructureIndex};
use crate::inductive::{self, graph_step, PrincipleCheck, SolutionTable, Wellfoundedness};
use crate::instance::EquationInstance;
use crate::relation::{ElementSet, Partition, Relation};
use crate::EngineError;

/// `≈` together with its closure `≈*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimResult {
    pub pairs: Relation,
    pub closure: Partition,
    pub trace: Vec<usize>,
}

/// `↓∞`, its domain `Dom∞` and the induced identification `≡` on `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoGraphResult {
    pub pairs: Relation,
    pub dom_inf: ElementSet,
    pub equiv: Relation,
    pub trace: Vec<usize>,
}

/// `B/≈*` with the induced algebra `β/≈*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub classes: Partition,
    /// Least member of each class.
    pub representative: Vec<usize>,
    /// Indexed by the dense numbering of `F(B/≈*)`, see [`Quotient::index`].
    pub induced_beta: Vec<usize>,
    index: StructureIndex,
}

impl Quotient {
    pub fn num_classes(&self) -> usize {
        self.classes.num_classes()
    }

    pub fn index(&self) -> &StructureIndex {
        &self.index
    }

    /// `β/≈*` on a structure over classes.
    pub fn apply(&self, cs: &FStructure) -> usize {
        self.induced_beta[self.index.index_of(cs)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Antifoundedness {
    pub holds: bool,
    pub counterexample: Option<(usize, usize)>,
}

/// Aggregated verdicts, each with either its certificate or a counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub wellfounded: Wellfoundedness,
    pub antifounded: Antifoundedness,
    pub criterion_bisim: bool,
    pub criterion_equiv: bool,
    /// `A \ Dom∞`, ascending.
    pub dom_inf_missing: Vec<usize>,
    /// First pair of `≡` off the diagonal.
    pub equiv_counterexample: Option<(usize, usize)>,
}

/// Solution on `A|Dom∞` with values in `B/≈*` (class indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientSolution {
    pub table: SolutionTable,
    pub quotient: Quotient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// `f : A → B`.
    Plain,
    /// `f : A|dom → B`.
    Restricted,
    /// `f : A|Dom∞ → B/≈*`.
    Quotiented,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareCheck {
    Pass,
    FailAt(usize),
}

impl SquareCheck {
    pub fn passed(self) -> bool {
        self == SquareCheck::Pass
    }
}

/// One round of `Φ(R) = {(b, b*) | ∃ bs, bs*. β bs = b ∧ β bs* = b* ∧ bs (F̃ R*) bs*}`,
/// given the classes of `R*`.
fn bisim_step(inst: &EquationInstance, closure: &Partition) -> Relation {
    let n = inst.size_b();
    let fb = inst.fb_index();
    // presentations with the same shape and classwise-equal arguments
    let mut by_signature: HashMap<Vec<usize>, ElementSet> = HashMap::new();
    for k in 0..fb.len() {
        let bs = fb.structure_at(k);
        let mut sig = Vec::with_capacity(bs.args.len() + 1);
        sig.push(bs.shape);
        sig.extend(bs.args.iter().map(|&x| closure.class_of(x)));
        by_signature
            .entry(sig)
            .or_insert_with(|| ElementSet::empty(n))
            .insert(inst.beta_of_index(k));
    }
    let mut next = Relation::empty(n, n);
    for outputs in by_signature.values() {
        for b in outputs.iter() {
            for b_star in outputs.iter() {
                next.insert(b, b_star);
            }
        }
    }
    next
}

pub fn compute_bisim(inst: &EquationInstance) -> BisimResult {
    let n = inst.size_b();
    let mut current = Relation::total(n, n);
    let mut closure = current.equivalence_closure();
    let mut trace = Vec::new();
    loop {
        debug_assert!(current.is_symmetric());
        let next = bisim_step(inst, &closure);
        debug_assert!(next.is_subset(&current), "bisimilarity iteration grew");
        trace.push(next.len());
        if next == current {
            break;
        }
        closure = next.equivalence_closure();
        current = next;
    }
    debug!("bisim: {} pairs, {} classes, {} rounds", current.len(), closure.num_classes(), trace.len());
    BisimResult {
        pairs: current,
        closure,
        trace,
    }
}

pub fn is_antifounded(inst: &EquationInstance) -> Antifoundedness {
    antifoundedness_of(&compute_bisim(inst))
}

pub fn antifoundedness_of(bisim: &BisimResult) -> Antifoundedness {
    let counterexample = bisim.pairs.first_off_diagonal();
    Antifoundedness {
        holds: counterexample.is_none(),
        counterexample,
    }
}

pub fn compute_quotient(inst: &EquationInstance) -> Result<Quotient, EngineError> {
    quotient_from(inst, &compute_bisim(inst))
}

pub fn quotient_from(inst: &EquationInstance, bisim: &BisimResult) -> Result<Quotient, EngineError> {
    let classes = bisim.closure.clone();
    let representative: Vec<usize> = classes.classes().iter().map(|c| c[0]).collect();
    let functor = inst.functor();
    let index = functor
        .indexer(classes.num_classes())
        .map_err(|e| EngineError::Inconsistency(e.to_string()))?;
    let induced_beta: Vec<usize> = (0..index.len())
        .map(|k| {
            let cs = index.structure_at(k);
            let bs = FStructure::new(cs.shape, cs.args.iter().map(|&c| representative[c]).collect());
            classes.class_of(inst.beta_at(&bs))
        })
        .collect();

    let fb = inst.fb_index();
    for k in 0..fb.len() {
        let bs = fb.structure_at(k);
        let cs = FStructure::new(bs.shape, bs.args.iter().map(|&x| classes.class_of(x)).collect());
        if classes.class_of(inst.beta_of_index(k)) != induced_beta[index.index_of(&cs)] {
            return Err(EngineError::Inconsistency(format!(
                "β/≈* depends on the representative at {}",
                inst.show_b(&bs)
            )));
        }
    }
    Ok(Quotient {
        classes,
        representative,
        induced_beta,
        index,
    })
}

pub fn compute_cograph(inst: &EquationInstance) -> CoGraphResult {
    let (n_a, n_b) = (inst.size_a(), inst.size_b());
    let mut current = Relation::total(n_a, n_b);
    let mut trace = Vec::new();
    loop {
        let next = graph_step(inst, &current);
        debug_assert!(next.is_subset(&current), "cograph iteration grew");
        trace.push(next.len());
        if next == current {
            break;
        }
        current = next;
    }
    let dom_inf = current.domain();
    let mut equiv = Relation::empty(n_b, n_b);
    for a in 0..n_a {
        let img: Vec<usize> = current.image(a).collect();
        for &b in &img {
            for &b_star in &img {
                equiv.insert(b, b_star);
            }
        }
    }
    CoGraphResult {
        pairs: current,
        dom_inf,
        equiv,
        trace,
    }
}

pub fn check_criteria(inst: &EquationInstance) -> Verdict {
    let wellfounded = inductive::is_wellfounded(inst);
    let bisim = compute_bisim(inst);
    let cograph = compute_cograph(inst);
    verdict_from(wellfounded, &bisim, &cograph)
}

pub fn verdict_from(wellfounded: Wellfoundedness, bisim: &BisimResult, cograph: &CoGraphResult) -> Verdict {
    let antifounded = antifoundedness_of(bisim);
    let dom_inf_total = cograph.dom_inf.is_full();
    let equiv_counterexample = cograph.equiv.first_off_diagonal();
    Verdict {
        criterion_bisim: dom_inf_total && antifounded.holds,
        criterion_equiv: dom_inf_total && equiv_counterexample.is_none(),
        wellfounded,
        antifounded,
        dom_inf_missing: cograph.dom_inf.complement_iter().collect(),
        equiv_counterexample,
    }
}

pub fn extract_quotient_solution(inst: &EquationInstance) -> Result<QuotientSolution, EngineError> {
    let bisim = compute_bisim(inst);
    let cograph = compute_cograph(inst);
    extract_quotient_solution_from(inst, &bisim, &cograph)
}

pub fn extract_quotient_solution_from(
    inst: &EquationInstance,
    bisim: &BisimResult,
    cograph: &CoGraphResult,
) -> Result<QuotientSolution, EngineError> {
    let quotient = quotient_from(inst, bisim)?;
    let mut value = vec![None; inst.size_a()];
    for a in cograph.dom_inf.iter() {
        let mut classes = cograph.pairs.image(a).map(|b| quotient.classes.class_of(b));
        let first = classes.next().expect("Dom∞ member has a witness");
        if classes.any(|c| c != first) {
            return Err(EngineError::Inconsistency(format!(
                "↓∞ witnesses of {} fall into different ≈* classes",
                inst.domain().element(a)
            )));
        }
        value[a] = Some(first);
    }
    let table = SolutionTable {
        defined_on: cograph.dom_inf.clone(),
        value,
    };
    if let SquareCheck::FailAt(a) = check_quotiented(inst, &table, &quotient)? {
        return Err(EngineError::Inconsistency(format!(
            "quotiented square fails at {}",
            inst.domain().element(a)
        )));
    }
    Ok(QuotientSolution { table, quotient })
}

/// Coinduction principle instance for an explicit relation `R` on `B`.
pub fn check_coinduction_principle(inst: &EquationInstance, rel: &Relation) -> PrincipleCheck {
    let n = inst.size_b();
    let closure = reflexive_transitive_closure(rel);
    let fb = inst.fb_index();
    let mut presentations: Vec<Vec<FStructure>> = vec![Vec::new(); n];
    for k in 0..fb.len() {
        presentations[inst.beta_of_index(k)].push(fb.structure_at(k));
    }
    let functor = inst.functor();
    let premise_holds = rel.pairs().all(|(b, b_star)| {
        presentations[b].iter().any(|bs| {
            presentations[b_star]
                .iter()
                .any(|bs_star| functor.lift_rel(&closure, bs, bs_star))
        })
    });
    PrincipleCheck {
        premise_holds,
        conclusion_holds: rel.within_equality(),
    }
}

/// `R*` for an arbitrary endorelation (Warshall).
pub fn reflexive_transitive_closure(rel: &Relation) -> Relation {
    let n = rel.rows();
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || rel.contains(i, j)).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    Relation::from_pairs(
        n,
        n,
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| reach[i][j]),
    )
}

/// Pointwise check of `f(a) = β(F f (α a))` in the carrier demanded by `mode`.
pub fn verify_solution(
    inst: &EquationInstance,
    f: &SolutionTable,
    mode: VerifyMode,
) -> Result<SquareCheck, EngineError> {
    if f.value.len() != inst.size_a() {
        return Err(EngineError::DomainMismatch(format!(
            "table has {} entries, domain has {}",
            f.value.len(),
            inst.size_a()
        )));
    }
    match mode {
        VerifyMode::Plain => {
            require_defined_on(f, &ElementSet::full(inst.size_a()), "A")?;
            require_values_below(f, inst.size_b())?;
            Ok(check_square(inst, f, |fs| inst.beta_at(fs)))
        }
        VerifyMode::Restricted => {
            require_defined_on(f, &inductive::compute_dom(inst).member, "A|dom")?;
            require_values_below(f, inst.size_b())?;
            Ok(check_square(inst, f, |fs| inst.beta_at(fs)))
        }
        VerifyMode::Quotiented => {
            let quotient = compute_quotient(inst)?;
            check_quotiented(inst, f, &quotient)
        }
    }
}

fn check_quotiented(
    inst: &EquationInstance,
    f: &SolutionTable,
    quotient: &Quotient,
) -> Result<SquareCheck, EngineError> {
    require_defined_on(f, &compute_cograph(inst).dom_inf, "A|Dom∞")?;
    require_values_below(f, quotient.num_classes())?;
    Ok(check_square(inst, f, |cs| quotient.apply(cs)))
}

fn require_defined_on(f: &SolutionTable, demanded: &ElementSet, label: &str) -> Result<(), EngineError> {
    if &f.defined_on != demanded || f.value.iter().enumerate().any(|(a, v)| v.is_some() != demanded.contains(a)) {
        return Err(EngineError::DomainMismatch(format!(
            "solution is not defined exactly on {label}"
        )));
    }
    Ok(())
}

fn require_values_below(f: &SolutionTable, bound: usize) -> Result<(), EngineError> {
    match f.value.iter().flatten().find(|&&v| v >= bound) {
        Some(v) => Err(EngineError::DomainMismatch(format!("value {v} outside the codomain"))),
        None => Ok(()),
    }
}

fn check_square(inst: &EquationInstance, f: &SolutionTable, algebra: impl Fn(&FStructure) -> usize) -> SquareCheck {
    for a in f.defined_on.iter() {
        let ok = inst
            .functor()
            .map(inst.alpha_at(a), |x| f.get(x))
            .map(|mapped| Some(algebra(&mapped)) == f.get(a))
            .unwrap_or(false);
        if !ok {
            return SquareCheck::FailAt(a);
        }
    }
    SquareCheck::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_example, ExampleKind, Limits};

    fn tiny() -> EquationInstance {
        EquationInstance::parse(include_str!("../../../fixtures/tiny.json")).unwrap()
    }

    fn tiny_loop() -> EquationInstance {
        EquationInstance::parse(include_str!("../../../fixtures/tiny_loop.json")).unwrap()
    }

    fn modsucc2() -> EquationInstance {
        generate_example(ExampleKind::ModSucc { modulus: 2 }, Limits::default()).unwrap()
    }

    fn identity12() -> EquationInstance {
        generate_example(ExampleKind::Identity { domain: 1, codomain: 2 }, Limits::default()).unwrap()
    }

    #[test]
    fn bisim_examples() {
        let b = compute_bisim(&tiny());
        assert_eq!(b.pairs, Relation::identity(2));
        assert!(b.closure.is_discrete());
        assert!(b.trace.len() <= 2 * 2 + 1);
        assert_eq!(compute_bisim(&modsucc2()).pairs, Relation::total(2, 2));
        assert_eq!(compute_bisim(&identity12()).pairs, Relation::total(2, 2));
    }

    #[test]
    fn antifoundedness_examples() {
        assert!(is_antifounded(&tiny()).holds);
        let af = is_antifounded(&modsucc2());
        assert!(!af.holds);
        assert_eq!(af.counterexample, Some((0, 1)));
    }

    #[test]
    fn quotient_examples() {
        let q = compute_quotient(&tiny()).unwrap();
        assert_eq!(q.num_classes(), 2);
        assert_eq!(q.induced_beta, tiny().beta().entries);

        let q = compute_quotient(&modsucc2()).unwrap();
        assert_eq!(q.num_classes(), 1);
        assert_eq!(q.induced_beta, vec![0]);
        assert_eq!(compute_quotient(&identity12()).unwrap().num_classes(), 1);
    }

    #[test]
    fn cograph_examples() {
        let c = compute_cograph(&tiny_loop());
        assert_eq!(c.pairs, Relation::from_pairs(2, 2, [(0, 0), (1, 1)]));
        assert!(c.dom_inf.is_full());
        assert_eq!(c.equiv, Relation::identity(2));

        let c = compute_cograph(&modsucc2());
        assert_eq!(c.pairs, Relation::total(1, 2));
        assert!(c.dom_inf.is_full());
        assert_eq!(c.equiv, Relation::total(2, 2));

        let c = compute_cograph(&tiny());
        assert_eq!(c.pairs, Relation::from_pairs(2, 2, [(0, 0), (1, 1)]));
    }

    #[test]
    fn criteria_examples() {
        let v = check_criteria(&tiny_loop());
        assert!(!v.wellfounded.holds);
        assert!(v.criterion_bisim && v.criterion_equiv);

        let v = check_criteria(&modsucc2());
        assert!(!v.wellfounded.holds && !v.antifounded.holds);
        assert!(!v.criterion_bisim && !v.criterion_equiv);

        let v = check_criteria(&identity12());
        assert!(!v.criterion_bisim && !v.criterion_equiv);
        assert_eq!(v.equiv_counterexample, Some((0, 1)));
    }

    #[test]
    fn quotient_solutions() {
        let s = extract_quotient_solution(&tiny_loop()).unwrap();
        assert_eq!(s.table.value, vec![Some(0), Some(1)]);
        let s = extract_quotient_solution(&modsucc2()).unwrap();
        assert_eq!(s.table.value, vec![Some(0)]);
        assert_eq!(verify_solution(&modsucc2(), &s.table, VerifyMode::Quotiented), Ok(SquareCheck::Pass));
        let s = extract_quotient_solution(&tiny()).unwrap();
        let p = inductive::extract_partial_solution(&tiny()).unwrap();
        assert_eq!(s.table, p);
    }

    #[test]
    fn coinduction_principle_examples() {
        let t = tiny();
        assert_eq!(
            check_coinduction_principle(&t, &Relation::identity(2)),
            PrincipleCheck { premise_holds: true, conclusion_holds: true }
        );
        assert!(!check_coinduction_principle(&t, &Relation::total(2, 2)).premise_holds);
        assert_eq!(
            check_coinduction_principle(&modsucc2(), &Relation::total(2, 2)),
            PrincipleCheck { premise_holds: true, conclusion_holds: false }
        );
    }

    #[test]
    fn verify_examples() {
        let t = tiny();
        assert_eq!(verify_solution(&t, &SolutionTable::from_total(&[0, 1]), VerifyMode::Plain), Ok(SquareCheck::Pass));
        assert_eq!(
            verify_solution(&t, &SolutionTable::from_total(&[1, 1]), VerifyMode::Plain),
            Ok(SquareCheck::FailAt(0))
        );
        let m = modsucc2();
        for v in 0..2 {
            assert_eq!(
                verify_solution(&m, &SolutionTable::from_total(&[v]), VerifyMode::Plain),
                Ok(SquareCheck::FailAt(0))
            );
        }
        let partial = SolutionTable::from_partial(vec![Some(0), None]);
        assert!(matches!(verify_solution(&t, &partial, VerifyMode::Plain), Err(EngineError::DomainMismatch(_))));
        assert_eq!(verify_solution(&tiny_loop(), &partial, VerifyMode::Restricted), Ok(SquareCheck::Pass));
    }

    #[test]
    fn rt_closure_is_not_symmetric() {
        let r = Relation::from_pairs(3, 3, [(0, 1), (1, 2)]);
        let c = reflexive_transitive_closure(&r);
        assert!(c.contains(0, 2) && c.contains(2, 2));
        assert!(!c.contains(2, 0));
    }
}
