//! Full analysis of one instance as a versioned, deterministic document.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coinductive::{self, Verdict};
use crate::inductive;
use crate::instance::EquationInstance;
use crate::oracle::{self, Budget, OracleError};
use crate::relation::{ElementSet, Relation};
use crate::EngineError;

pub const SCHEMA_VERSION: u32 = 1;

/// Rows shown per relation in the text rendering.
pub const TEXT_ROW_CAP: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub instance: InstanceSummary,
    pub verdicts: Verdicts,
    pub relations: Relations,
    pub solutions: Solutions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    /// Wall-clock milliseconds per stage; only present when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSummary {
    pub size_a: usize,
    pub size_b: usize,
    pub profile: Vec<usize>,
    pub shapes: Vec<String>,
    pub fb_structures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdicts {
    pub wellfounded: VerdictEntry,
    pub antifounded: VerdictEntry,
    pub criterion_bisim: VerdictEntry,
    pub criterion_equiv: VerdictEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictEntry {
    pub holds: bool,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Evidence {
    /// Every element of `A` has a `dom` rank.
    Ranks { ranks: Vec<Ranked> },
    /// The named relation lies within equality.
    Diagonal { relation: String },
    /// `Dom∞ = A` and the named relation lies within equality.
    TotalAndDiagonal { relation: String },
    /// Elements of `A` outside the named predicate.
    Outside { predicate: String, elements: Vec<String> },
    /// A pair of distinct elements in the named relation.
    OffDiagonal { relation: String, left: String, right: String },
}

impl Evidence {
    pub fn is_certificate(&self) -> bool {
        matches!(
            self,
            Evidence::Ranks { .. } | Evidence::Diagonal { .. } | Evidence::TotalAndDiagonal { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ranked {
    pub element: String,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankedPair {
    pub a: String,
    pub b: String,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relations {
    pub dom: Vec<Ranked>,
    pub dom_trace: Vec<usize>,
    pub graph: Vec<RankedPair>,
    pub graph_trace: Vec<usize>,
    pub bisim: Vec<[String; 2]>,
    pub bisim_classes: Vec<Vec<String>>,
    pub bisim_trace: Vec<usize>,
    pub cograph: Vec<[String; 2]>,
    pub cograph_trace: Vec<usize>,
    pub dom_inf: Vec<String>,
    pub equiv: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solutions {
    /// The unique solution on `A|dom`.
    pub inductive: Vec<[String; 2]>,
    /// The solution on `A|Dom∞` into `B/≈*`, values as class indices.
    pub quotiented: QuotientedSolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientedSolution {
    pub classes: Vec<Vec<String>>,
    pub table: Vec<QuotientEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientEntry {
    pub a: String,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub count: u64,
    pub truncated: bool,
    /// Up to the requested cap, each as `[a, f(a)]` rows.
    pub solutions: Vec<Vec<[String; 2]>>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Enumerate solutions, keeping at most this many.
    pub oracle_cap: Option<usize>,
    pub budget: Budget,
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

struct Clock {
    enabled: bool,
    stages: BTreeMap<String, u64>,
}

impl Clock {
    fn time<T>(&mut self, stage: &str, run: impl FnOnce() -> T) -> T {
        if !self.enabled {
            return run();
        }
        let start = Instant::now();
        let out = run();
        let ms = u64::try_from(start.elapsed().as_millis()).unwrap_or(u64::MAX);
        self.stages.insert(stage.to_owned(), ms);
        out
    }
}

pub fn build_report(inst: &EquationInstance, options: &ReportOptions) -> Result<Report, ReportError> {
    let mut clock = Clock {
        enabled: options.timings,
        stages: BTreeMap::new(),
    };
    let dom = clock.time("dom", || inductive::compute_dom(inst));
    let graph = clock.time("graph", || inductive::compute_graph_lfp(inst));
    let bisim = clock.time("bisim", || coinductive::compute_bisim(inst));
    let cograph = clock.time("cograph", || coinductive::compute_cograph(inst));
    let partial = clock.time("extract_inductive", || inductive::extract_partial_solution_from(inst, &dom, &graph))?;
    let quotiented = clock.time("extract_quotiented", || {
        coinductive::extract_quotient_solution_from(inst, &bisim, &cograph)
    })?;
    let wellfounded = inductive::Wellfoundedness {
        holds: dom.member.is_full(),
        rank: dom.rank.clone(),
        counterexample: dom.member.complement_iter().collect(),
    };
    let verdict = coinductive::verdict_from(wellfounded, &bisim, &cograph);

    let oracle = match options.oracle_cap {
        None => None,
        Some(cap) => {
            let found = clock.time("oracle", || oracle::enumerate_solutions(inst, cap, &options.budget))?;
            Some(OracleSection {
                count: found.count,
                truncated: found.truncated,
                solutions: found
                    .solutions
                    .iter()
                    .map(|s| {
                        (0..inst.size_a())
                            .map(|a| [name_a(inst, a), name_b(inst, s.get(a).expect("total"))])
                            .collect()
                    })
                    .collect(),
            })
        }
    };

    let fb = inst.fb_index();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        instance: InstanceSummary {
            size_a: inst.size_a(),
            size_b: inst.size_b(),
            profile: inst.profile(),
            shapes: inst.functor().shapes().iter().map(|s| s.name.clone()).collect(),
            fb_structures: fb.len(),
        },
        verdicts: verdicts(inst, &verdict),
        relations: Relations {
            dom: dom
                .member
                .iter()
                .map(|a| Ranked {
                    element: name_a(inst, a),
                    rank: dom.rank[a].expect("member has rank"),
                })
                .collect(),
            dom_trace: dom.trace.clone(),
            graph: graph
                .pairs
                .pairs()
                .map(|(a, b)| RankedPair {
                    a: name_a(inst, a),
                    b: name_b(inst, b),
                    rank: graph.rank_of(a, b).expect("pair has rank"),
                })
                .collect(),
            graph_trace: graph.trace.clone(),
            bisim: pairs_b(inst, &bisim.pairs),
            bisim_classes: bisim
                .closure
                .classes()
                .iter()
                .map(|c| c.iter().map(|&b| name_b(inst, b)).collect())
                .collect(),
            bisim_trace: bisim.trace.clone(),
            cograph: cograph
                .pairs
                .pairs()
                .map(|(a, b)| [name_a(inst, a), name_b(inst, b)])
                .collect(),
            cograph_trace: cograph.trace.clone(),
            dom_inf: names_a(inst, &cograph.dom_inf),
            equiv: pairs_b(inst, &cograph.equiv),
        },
        solutions: Solutions {
            inductive: partial
                .defined_on
                .iter()
                .map(|a| [name_a(inst, a), name_b(inst, partial.get(a).expect("defined"))])
                .collect(),
            quotiented: QuotientedSolution {
                classes: quotiented
                    .quotient
                    .classes
                    .classes()
                    .iter()
                    .map(|c| c.iter().map(|&b| name_b(inst, b)).collect())
                    .collect(),
                table: quotiented
                    .table
                    .defined_on
                    .iter()
                    .map(|a| QuotientEntry {
                        a: name_a(inst, a),
                        class: quotiented.table.get(a).expect("defined"),
                    })
                    .collect(),
            },
        },
        oracle,
        timings_ms: options.timings.then_some(clock.stages),
    })
}

fn name_a(inst: &EquationInstance, a: usize) -> String {
    inst.domain().element(a).to_owned()
}

fn name_b(inst: &EquationInstance, b: usize) -> String {
    inst.codomain().element(b).to_owned()
}

fn names_a(inst: &EquationInstance, set: &ElementSet) -> Vec<String> {
    set.iter().map(|a| name_a(inst, a)).collect()
}

fn pairs_b(inst: &EquationInstance, rel: &Relation) -> Vec<[String; 2]> {
    rel.pairs().map(|(x, y)| [name_b(inst, x), name_b(inst, y)]).collect()
}

fn verdicts(inst: &EquationInstance, v: &Verdict) -> Verdicts {
    let missing = |v: &Verdict| Evidence::Outside {
        predicate: "dom_inf".into(),
        elements: v.dom_inf_missing.iter().map(|&a| name_a(inst, a)).collect(),
    };
    let off = |relation: &str, (x, y): (usize, usize)| Evidence::OffDiagonal {
        relation: relation.into(),
        left: name_b(inst, x),
        right: name_b(inst, y),
    };
    let wellfounded = if v.wellfounded.holds {
        Evidence::Ranks {
            ranks: (0..inst.size_a())
                .map(|a| Ranked {
                    element: name_a(inst, a),
                    rank: v.wellfounded.rank[a].expect("wellfounded"),
                })
                .collect(),
        }
    } else {
        Evidence::Outside {
            predicate: "dom".into(),
            elements: v.wellfounded.counterexample.iter().map(|&a| name_a(inst, a)).collect(),
        }
    };
    let antifounded = match v.antifounded.counterexample {
        None => Evidence::Diagonal {
            relation: "bisim".into(),
        },
        Some(pair) => off("bisim", pair),
    };
    let criterion_bisim = if v.criterion_bisim {
        Evidence::TotalAndDiagonal {
            relation: "bisim".into(),
        }
    } else if !v.dom_inf_missing.is_empty() {
        missing(v)
    } else {
        off("bisim", v.antifounded.counterexample.expect("criterion fails on ≈"))
    };
    let criterion_equiv = if v.criterion_equiv {
        Evidence::TotalAndDiagonal {
            relation: "equiv".into(),
        }
    } else if !v.dom_inf_missing.is_empty() {
        missing(v)
    } else {
        off("equiv", v.equiv_counterexample.expect("criterion fails on ≡"))
    };
    let entry = |holds: bool, evidence: Evidence| VerdictEntry { holds, evidence };
    Verdicts {
        wellfounded: entry(v.wellfounded.holds, wellfounded),
        antifounded: entry(v.antifounded.holds, antifounded),
        criterion_bisim: entry(v.criterion_bisim, criterion_bisim),
        criterion_equiv: entry(v.criterion_equiv, criterion_equiv),
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Flat `key = value` view used by `--expect`.
    pub fn fields(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put("wellfounded", self.verdicts.wellfounded.holds.to_string());
        put("antifounded", self.verdicts.antifounded.holds.to_string());
        put("criterion_bisim", self.verdicts.criterion_bisim.holds.to_string());
        put("criterion_equiv", self.verdicts.criterion_equiv.holds.to_string());
        put("size_a", self.instance.size_a.to_string());
        put("size_b", self.instance.size_b.to_string());
        put("dom_size", self.relations.dom.len().to_string());
        put("dom_inf_size", self.relations.dom_inf.len().to_string());
        put("bisim_classes", self.relations.bisim_classes.len().to_string());
        put("quotient_classes", self.solutions.quotiented.classes.len().to_string());
        if let Some(o) = &self.oracle {
            put("oracle_count", o.count.to_string());
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let i = &self.instance;
        let _ = writeln!(
            out,
            "instance: |A| = {}, |B| = {}, profile {:?} ({}), |F B| = {}",
            i.size_a,
            i.size_b,
            i.profile,
            i.shapes.join(", "),
            i.fb_structures
        );
        let _ = writeln!(out, "verdicts:");
        for (name, v) in [
            ("wellfounded", &self.verdicts.wellfounded),
            ("antifounded", &self.verdicts.antifounded),
            ("criterion_bisim", &self.verdicts.criterion_bisim),
            ("criterion_equiv", &self.verdicts.criterion_equiv),
        ] {
            let _ = writeln!(out, "  {name} = {}  ({})", v.holds, describe(&v.evidence));
        }
        let r = &self.relations;
        section(
            &mut out,
            "dom (element: rank)",
            r.dom.iter().map(|x| format!("{}: {}", x.element, x.rank)),
        );
        section(
            &mut out,
            "graph ↓ (a -> b @ rank)",
            r.graph.iter().map(|p| format!("{} -> {} @ {}", p.a, p.b, p.rank)),
        );
        section(&mut out, "bisimilarity ≈", r.bisim.iter().map(pair));
        section(
            &mut out,
            "≈* classes",
            r.bisim_classes.iter().enumerate().map(|(k, c)| format!("[{k}] {{{}}}", c.join(", "))),
        );
        section(&mut out, "cograph ↓∞", r.cograph.iter().map(|p| format!("{} -> {}", p[0], p[1])));
        section(&mut out, "Dom∞", r.dom_inf.iter().cloned());
        section(&mut out, "≡", r.equiv.iter().map(pair));
        section(
            &mut out,
            "solution on A|dom",
            self.solutions.inductive.iter().map(|p| format!("{} ↦ {}", p[0], p[1])),
        );
        let q = &self.solutions.quotiented;
        section(
            &mut out,
            "solution on A|Dom∞ into B/≈*",
            q.table
                .iter()
                .map(|e| format!("{} ↦ [{}]", e.a, q.classes[e.class].join(", "))),
        );
        if let Some(o) = &self.oracle {
            let _ = writeln!(out, "oracle: solutions: {}{}", o.count, if o.truncated { " (listing truncated)" } else { "" });
        }
        if let Some(t) = &self.timings_ms {
            let parts: Vec<String> = t.iter().map(|(k, v)| format!("{k} {v} ms")).collect();
            let _ = writeln!(out, "timings: {}", parts.join(", "));
        }
        out
    }
}

fn pair(p: &[String; 2]) -> String {
    format!("({}, {})", p[0], p[1])
}

fn describe(e: &Evidence) -> String {
    match e {
        Evidence::Ranks { ranks } => {
            let max = ranks.iter().map(|r| r.rank).max().unwrap_or(0);
            format!("certificate: all elements ranked, max rank {max}")
        }
        Evidence::Diagonal { relation } => format!("certificate: {relation} within equality"),
        Evidence::TotalAndDiagonal { relation } => format!("certificate: Dom∞ = A and {relation} within equality"),
        Evidence::Outside { predicate, elements } => {
            format!("counterexample: {} outside {predicate}", elements.join(", "))
        }
        Evidence::OffDiagonal { relation, left, right } => {
            format!("counterexample: ({left}, {right}) in {relation}")
        }
    }
}

/// Writes a titled list, capped at [`TEXT_ROW_CAP`] rows.
fn section(out: &mut String, title: &str, rows: impl Iterator<Item = String>) {
    let rows: Vec<String> = rows.collect();
    let _ = writeln!(out, "{title} ({}):", rows.len());
    for row in rows.iter().take(TEXT_ROW_CAP) {
        let _ = writeln!(out, "  {row}");
    }
    if rows.len() > TEXT_ROW_CAP {
        let _ = writeln!(out, "  ... {} more", rows.len() - TEXT_ROW_CAP);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = include_str!("../../../fixtures/tiny.json");
    const TINY_LOOP: &str = include_str!("../../../fixtures/tiny_loop.json");

    fn report(doc: &str, oracle: bool) -> Report {
        let inst = EquationInstance::parse(doc).unwrap();
        let options = ReportOptions {
            oracle_cap: oracle.then_some(10),
            ..ReportOptions::default()
        };
        build_report(&inst, &options).unwrap()
    }

    #[test]
    fn tiny_report() {
        let r = report(TINY, true);
        assert_eq!(r.schema_version, SCHEMA_VERSION);
        let f = r.fields();
        assert_eq!(f["wellfounded"], "true");
        assert_eq!(f["antifounded"], "true");
        assert_eq!(f["oracle_count"], "1");
        assert_eq!(
            r.solutions.inductive,
            vec![["a0".to_owned(), "b0".to_owned()], ["a1".to_owned(), "b1".to_owned()]]
        );
        assert!(r.timings_ms.is_none());
    }

    #[test]
    fn json_round_trips() {
        for doc in [TINY, TINY_LOOP] {
            let r = report(doc, true);
            let back = Report::from_json(&r.to_json()).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn evidence_matches_verdict() {
        for doc in [TINY, TINY_LOOP] {
            let v = report(doc, false).verdicts;
            for e in [&v.wellfounded, &v.antifounded, &v.criterion_bisim, &v.criterion_equiv] {
                assert_eq!(e.holds, e.evidence.is_certificate());
            }
        }
    }

    #[test]
    fn tiny_loop_counterexample_names_a1() {
        let r = report(TINY_LOOP, false);
        assert_eq!(
            r.verdicts.wellfounded.evidence,
            Evidence::Outside {
                predicate: "dom".into(),
                elements: vec!["a1".into()]
            }
        );
        assert!(r.verdicts.criterion_equiv.holds);
    }

    #[test]
    fn text_is_capped() {
        let mut out = String::new();
        section(&mut out, "xs", (0..60).map(|i| i.to_string()));
        assert_eq!(out.lines().count(), 1 + TEXT_ROW_CAP + 1);
        assert!(out.ends_with("  ... 10 more\n"));
    }

    #[test]
    fn timings_only_on_request() {
        let inst = EquationInstance::parse(TINY).unwrap();
        let options = ReportOptions {
            timings: true,
            ..ReportOptions::default()
        };
        let r = build_report(&inst, &options).unwrap();
        assert!(r.timings_ms.unwrap().contains_key("dom"));
    }
}
