//! Least-fixpoint analyses: the domain predicate `dom`, the inductive graph
//! `↓`, wellfoundedness and partial solution extraction.
//!
//! All fixpoints are computed by naive round-based iteration from the empty
//! set. Each round re-evaluates the rule for every element against the
//! previous iterate, so ranks are exactly "first round of inclusion".

use log::debug;

use crate::container::FStructure;
use crate::instance::EquationInstance;
use crate::relation::{ElementSet, Relation};
use crate::EngineError;

/// The predicate `dom` with inclusion ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredResult {
    pub member: ElementSet,
    /// Round of first inclusion (starting at 1), `None` for non-members.
    pub rank: Vec<Option<usize>>,
    /// Member count after each round, including the confirming last round.
    pub trace: Vec<usize>,
}

/// The relation `↓` with inclusion ranks, indexed `a * |B| + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelResult {
    pub pairs: Relation,
    pub rank: Vec<Option<usize>>,
    pub trace: Vec<usize>,
}

impl RelResult {
    pub fn rank_of(&self, a: usize, b: usize) -> Option<usize> {
        self.rank[a * self.pairs.cols() + b]
    }

    /// `Dom a = ∃b. a ↓ b`.
    pub fn domain(&self) -> ElementSet {
        self.pairs.domain()
    }
}

/// A (possibly partial) function out of `A`. Values index either `B` or the
/// classes of a quotient of `B`, depending on who built the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionTable {
    pub defined_on: ElementSet,
    pub value: Vec<Option<usize>>,
}

impl SolutionTable {
    pub fn from_total(values: &[usize]) -> Self {
        Self {
            defined_on: ElementSet::full(values.len()),
            value: values.iter().map(|&v| Some(v)).collect(),
        }
    }

    pub fn from_partial(value: Vec<Option<usize>>) -> Self {
        let defined_on = ElementSet::from_members(
            value.len(),
            value.iter().enumerate().filter_map(|(i, v)| v.map(|_| i)),
        );
        Self { defined_on, value }
    }

    pub fn get(&self, a: usize) -> Option<usize> {
        self.value.get(a).copied().flatten()
    }

    pub fn is_total(&self) -> bool {
        self.defined_on.is_full()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wellfoundedness {
    pub holds: bool,
    /// Certificate: the `dom` ranks.
    pub rank: Vec<Option<usize>>,
    /// `A \ dom`, ascending.
    pub counterexample: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFunctional {
    pub a: usize,
    pub b: usize,
    pub b_star: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrincipleCheck {
    pub premise_holds: bool,
    pub conclusion_holds: bool,
}

pub fn compute_dom(inst: &EquationInstance) -> PredResult {
    let n = inst.size_a();
    let functor = inst.functor();
    let mut current = ElementSet::empty(n);
    let mut rank = vec![None; n];
    let mut trace = Vec::new();
    for round in 1.. {
        let next = ElementSet::from_members(
            n,
            (0..n).filter(|&a| functor.lift_pred(&current, inst.alpha_at(a))),
        );
        debug_assert!(current.is_subset(&next), "dom iteration is not monotone");
        for a in next.iter() {
            rank[a].get_or_insert(round);
        }
        trace.push(next.len());
        if next == current {
            break;
        }
        current = next;
    }
    debug!("dom: {} of {} after {} rounds", current.len(), n, trace.len());
    PredResult {
        member: current,
        rank,
        trace,
    }
}

pub fn is_wellfounded(inst: &EquationInstance) -> Wellfoundedness {
    let dom = compute_dom(inst);
    Wellfoundedness {
        holds: dom.member.is_full(),
        counterexample: dom.member.complement_iter().collect(),
        rank: dom.rank,
    }
}

/// Calls `visit` with the dense `F B` index of every `bs` such that
/// `lift_rel(rel, fs, bs)`.
pub(crate) fn for_each_related(
    inst: &EquationInstance,
    rel: &Relation,
    fs: &FStructure,
    mut visit: impl FnMut(usize),
) {
    let images: Vec<Vec<usize>> = fs.args.iter().map(|&x| rel.image(x).collect()).collect();
    if images.iter().any(Vec::is_empty) {
        return;
    }
    let fb = inst.fb_index();
    let mut cursor = vec![0usize; images.len()];
    let mut bs = FStructure::new(fs.shape, images.iter().map(|img| img[0]).collect());
    loop {
        visit(fb.index_of(&bs));
        // odometer, last position fastest
        let mut pos = images.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < images[pos].len() {
                bs.args[pos] = images[pos][cursor[pos]];
                break;
            }
            cursor[pos] = 0;
            bs.args[pos] = images[pos][0];
        }
    }
}

/// One application of the graph operator
/// `Ψ(R) = {(a, β bs) | lift_rel(R, α a, bs)}`.
///
/// `↓` is its least fixpoint and `↓∞` its greatest.
pub fn graph_step(inst: &EquationInstance, rel: &Relation) -> Relation {
    let mut next = Relation::empty(inst.size_a(), inst.size_b());
    for a in 0..inst.size_a() {
        for_each_related(inst, rel, inst.alpha_at(a), |k| {
            next.insert(a, inst.beta_of_index(k))
        });
    }
    next
}

pub fn compute_graph_lfp(inst: &EquationInstance) -> RelResult {
    let (n_a, n_b) = (inst.size_a(), inst.size_b());
    let mut current = Relation::empty(n_a, n_b);
    let mut rank = vec![None; n_a * n_b];
    let mut trace = Vec::new();
    for round in 1.. {
        let next = graph_step(inst, &current);
        debug_assert!(current.is_subset(&next), "graph iteration is not monotone");
        for (a, b) in next.pairs() {
            rank[a * n_b + b].get_or_insert(round);
        }
        trace.push(next.len());
        if next == current {
            break;
        }
        current = next;
    }
    RelResult {
        pairs: current,
        rank,
        trace,
    }
}

pub fn check_functional(rel: &RelResult) -> Result<(), NonFunctional> {
    match rel.pairs.first_non_functional() {
        None => Ok(()),
        Some((a, b, b_star)) => Err(NonFunctional { a, b, b_star }),
    }
}

/// Compares `Dom = {a | ∃b. a ↓ b}` against `dom`; returns the first element
/// on which they differ.
pub fn check_dom_vs_graph(inst: &EquationInstance) -> Result<(), usize> {
    let dom = compute_dom(inst).member;
    let graph_dom = compute_graph_lfp(inst).domain();
    match (0..inst.size_a()).find(|&a| dom.contains(a) != graph_dom.contains(a)) {
        None => Ok(()),
        Some(a) => Err(a),
    }
}

/// The unique solution on `A|dom`, computed by rank recursion and checked
/// against the graph `↓`.
pub fn extract_partial_solution(inst: &EquationInstance) -> Result<SolutionTable, EngineError> {
    let dom = compute_dom(inst);
    let graph = compute_graph_lfp(inst);
    extract_partial_solution_from(inst, &dom, &graph)
}

pub fn extract_partial_solution_from(
    inst: &EquationInstance,
    dom: &PredResult,
    graph: &RelResult,
) -> Result<SolutionTable, EngineError> {
    let n = inst.size_a();
    let mut order: Vec<usize> = dom.member.iter().collect();
    order.sort_by_key(|&a| (dom.rank[a], a));

    let mut value: Vec<Option<usize>> = vec![None; n];
    for a in order {
        let fs = inst.alpha_at(a);
        let mapped = inst.functor().map(fs, |x| value[x]).map_err(|_| {
            EngineError::Inconsistency(format!(
                "argument of {} has no value before its rank",
                inst.domain().element(a)
            ))
        })?;
        let b = inst.beta_at(&mapped);
        let mut witnesses = graph.pairs.image(a);
        match (witnesses.next(), witnesses.next()) {
            (Some(g), None) if g == b => {}
            _ => {
                return Err(EngineError::Inconsistency(format!(
                    "rank recursion gives {} ↦ {} but the graph disagrees",
                    inst.domain().element(a),
                    inst.codomain().element(b)
                )))
            }
        }
        value[a] = Some(b);
    }
    if graph.domain() != dom.member {
        return Err(EngineError::Inconsistency(
            "graph domain differs from dom".to_owned(),
        ));
    }
    Ok(SolutionTable {
        defined_on: dom.member.clone(),
        value,
    })
}

/// Induction principle instance for an explicit predicate `P`.
pub fn check_induction_principle(inst: &EquationInstance, pred: &ElementSet) -> PrincipleCheck {
    let premise_holds = (0..inst.size_a())
        .all(|a| !inst.functor().lift_pred(pred, inst.alpha_at(a)) || pred.contains(a));
    PrincipleCheck {
        premise_holds,
        conclusion_holds: pred.is_full(),
    }
}
