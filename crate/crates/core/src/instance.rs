//! Equation instances: finite carriers `A`, `B`, a functor, and total tables
//! for `α : A → F A` and `β : F B → B`.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::container::{ContainerError, ContainerSpec, FStructure, Shape, StructureIndex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error at {location}: {message}")]
    Validation { location: String, message: String },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown structure `{0}`")]
    UnknownStructure(String),
    #[error("parameters too large: {0}")]
    ParamsTooLarge(String),
}

impl InstanceError {
    fn validation(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation {
            location: location.into(),
            message: message.into(),
        }
    }
}

/// Size caps applied while ingesting or generating instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_arity: usize,
    pub max_elements: usize,
    /// Cap on `|F B|`, the number of rows in the algebra table.
    pub max_structures: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_arity: crate::container::DEFAULT_MAX_ARITY,
            max_elements: 100_000,
            max_structures: 10_000_000,
        }
    }
}

/// A finite, ordered, named set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Carrier {
    name: String,
    elements: Vec<String>,
    index: HashMap<String, usize>,
}

impl Carrier {
    pub fn new(name: impl Into<String>, elements: Vec<String>) -> Result<Self, InstanceError> {
        let name = name.into();
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if e.is_empty() {
                return Err(InstanceError::validation(
                    format!("{name}[{i}]"),
                    "empty element name",
                ));
            }
            if index.insert(e.clone(), i).is_some() {
                return Err(InstanceError::validation(
                    format!("{name}[{i}]"),
                    format!("duplicate element `{e}`"),
                ));
            }
        }
        Ok(Self {
            name,
            elements,
            index,
        })
    }

    /// `prefix0, prefix1, ...`
    pub fn canonical(name: &str, prefix: &str, n: usize) -> Self {
        Self::new(name, (0..n).map(|i| format!("{prefix}{i}")).collect())
            .expect("canonical names are distinct")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// `α` as a total table over `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalgebraTable {
    pub carrier: Carrier,
    pub entries: Vec<FStructure>,
}

/// `β` as a total table over `F B`, indexed by the dense numbering of
/// [`ContainerSpec::indexer`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraTable {
    pub carrier: Carrier,
    pub entries: Vec<usize>,
}

/// The square `f = β ∘ F f ∘ α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationInstance {
    functor: ContainerSpec,
    alpha: CoalgebraTable,
    beta: AlgebraTable,
    fb: StructureIndex,
}

impl EquationInstance {
    /// Validates and assembles an instance from positional tables.
    pub fn new(
        functor: ContainerSpec,
        alpha: CoalgebraTable,
        beta: AlgebraTable,
    ) -> Result<Self, InstanceError> {
        let n_a = alpha.carrier.len();
        let n_b = beta.carrier.len();
        if n_b == 0 && n_a > 0 {
            return Err(InstanceError::validation(
                "codomain",
                "empty codomain with nonempty domain",
            ));
        }
        if alpha.entries.len() != n_a {
            return Err(InstanceError::validation("alpha", "alpha not total"));
        }
        for (i, fs) in alpha.entries.iter().enumerate() {
            functor
                .check(fs, n_a)
                .map_err(|e| container_violation(format!("alpha.{}", alpha.carrier.element(i)), e))?;
        }
        let fb = functor
            .indexer(n_b)
            .map_err(|e| container_violation("beta", e))?;
        if beta.entries.len() != fb.len() {
            return Err(InstanceError::validation("beta", "beta not total"));
        }
        if let Some(k) = beta.entries.iter().position(|&b| b >= n_b) {
            return Err(InstanceError::validation(
                format!("beta[{k}]"),
                "unknown element",
            ));
        }
        Ok(Self {
            functor,
            alpha,
            beta,
            fb,
        })
    }

    pub fn functor(&self) -> &ContainerSpec {
        &self.functor
    }

    pub fn domain(&self) -> &Carrier {
        &self.alpha.carrier
    }

    pub fn codomain(&self) -> &Carrier {
        &self.beta.carrier
    }

    pub fn alpha(&self) -> &CoalgebraTable {
        &self.alpha
    }

    pub fn beta(&self) -> &AlgebraTable {
        &self.beta
    }

    pub fn size_a(&self) -> usize {
        self.alpha.carrier.len()
    }

    pub fn size_b(&self) -> usize {
        self.beta.carrier.len()
    }

    /// Dense numbering of `F B`.
    pub fn fb_index(&self) -> &StructureIndex {
        &self.fb
    }

    /// `α a` by position; panics on out-of-range positions.
    pub fn alpha_at(&self, a: usize) -> &FStructure {
        &self.alpha.entries[a]
    }

    /// `β bs` for a well-formed structure over `B`.
    pub fn beta_at(&self, bs: &FStructure) -> usize {
        self.beta.entries[self.fb.index_of(bs)]
    }

    /// `β` of the structure with the given dense index.
    pub fn beta_of_index(&self, k: usize) -> usize {
        self.beta.entries[k]
    }

    pub fn apply_alpha(&self, a: &str) -> Result<&FStructure, InstanceError> {
        let i = self
            .domain()
            .position(a)
            .ok_or_else(|| InstanceError::UnknownElement(a.to_owned()))?;
        Ok(self.alpha_at(i))
    }

    pub fn apply_beta(&self, bs: &FStructure) -> Result<usize, InstanceError> {
        self.functor
            .check(bs, self.size_b())
            .map_err(|_| InstanceError::UnknownStructure(format!("{bs:?}")))?;
        Ok(self.beta_at(bs))
    }

    /// Replaces the algebra while keeping the functor and coalgebra.
    pub fn with_algebra(&self, beta: AlgebraTable) -> Result<Self, InstanceError> {
        Self::new(self.functor.clone(), self.alpha.clone(), beta)
    }

    pub fn show_a(&self, fs: &FStructure) -> String {
        self.functor.display(fs, |x| self.domain().element(x).to_owned())
    }

    pub fn show_b(&self, fs: &FStructure) -> String {
        self.functor.display(fs, |x| self.codomain().element(x).to_owned())
    }

    /// Profile summary such as `[0,1]`.
    pub fn profile(&self) -> Vec<usize> {
        self.functor.arities()
    }

    pub fn parse(document: &str) -> Result<Self, InstanceError> {
        Self::parse_with_limits(document, Limits::default())
    }

    pub fn parse_with_limits(document: &str, limits: Limits) -> Result<Self, InstanceError> {
        let doc: InstanceDoc = serde_json::from_str(document).map_err(|e| InstanceError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_doc(doc, limits)
    }

    pub fn from_doc(doc: InstanceDoc, limits: Limits) -> Result<Self, InstanceError> {
        let functor = ContainerSpec::with_arity_cap(doc.functor.shapes, limits.max_arity)
            .map_err(|e| container_violation("functor", e))?;
        for (label, c) in [("domain", &doc.domain), ("codomain", &doc.codomain)] {
            if c.elements.len() > limits.max_elements {
                return Err(InstanceError::validation(
                    label,
                    format!("{} elements exceed the cap of {}", c.elements.len(), limits.max_elements),
                ));
            }
        }
        let domain = Carrier::new("domain", doc.domain.elements)?;
        let codomain = Carrier::new("codomain", doc.codomain.elements)?;
        if codomain.is_empty() && !domain.is_empty() {
            return Err(InstanceError::validation(
                "codomain",
                "empty codomain with nonempty domain",
            ));
        }

        let mut alpha = vec![None; domain.len()];
        for (key, sd) in &doc.alpha {
            let loc = format!("alpha.{key}");
            let a = domain
                .position(key)
                .ok_or_else(|| InstanceError::validation(&loc, format!("unknown element `{key}`")))?;
            alpha[a] = Some(resolve_structure(&functor, &domain, sd, &loc)?);
        }
        let alpha = alpha
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.ok_or_else(|| {
                    InstanceError::validation(
                        format!("alpha.{}", domain.element(i)),
                        "alpha not total",
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let fb_count = functor.count_structures(codomain.len());
        match fb_count {
            Some(c) if c <= limits.max_structures => {}
            _ => {
                return Err(InstanceError::validation(
                    "beta",
                    format!("|F B| exceeds the cap of {}", limits.max_structures),
                ))
            }
        }
        let fb = functor
            .indexer(codomain.len())
            .map_err(|e| container_violation("beta", e))?;
        let mut beta = vec![None; fb.len()];
        for (k, row) in doc.beta.iter().enumerate() {
            let loc = format!("beta[{k}]");
            let sd = StructDoc {
                shape: row.shape.clone(),
                args: row.args.clone(),
            };
            let bs = resolve_structure(&functor, &codomain, &sd, &loc)?;
            let out = codomain.position(&row.out).ok_or_else(|| {
                InstanceError::validation(&loc, format!("unknown element `{}`", row.out))
            })?;
            let slot = &mut beta[fb.index_of(&bs)];
            if slot.is_some() {
                return Err(InstanceError::validation(
                    &loc,
                    format!("duplicate beta entry for {}", functor.display(&bs, |x| codomain.element(x).to_owned())),
                ));
            }
            *slot = Some(out);
        }
        let beta = beta
            .into_iter()
            .enumerate()
            .map(|(k, b)| {
                b.ok_or_else(|| {
                    let bs = fb.structure_at(k);
                    InstanceError::validation(
                        format!("beta {}", functor.display(&bs, |x| codomain.element(x).to_owned())),
                        "beta not total",
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        Self::new(
            functor,
            CoalgebraTable {
                carrier: domain,
                entries: alpha,
            },
            AlgebraTable {
                carrier: codomain,
                entries: beta,
            },
        )
    }

    pub fn to_doc(&self) -> InstanceDoc {
        let name_a = |x: usize| self.domain().element(x).to_owned();
        let name_b = |x: usize| self.codomain().element(x).to_owned();
        let shape_name = |s: usize| self.functor.shape(s).name.clone();
        InstanceDoc {
            functor: FunctorDoc {
                shapes: self.functor.shapes().to_vec(),
            },
            domain: CarrierDoc {
                elements: self.domain().elements().to_vec(),
            },
            codomain: CarrierDoc {
                elements: self.codomain().elements().to_vec(),
            },
            alpha: self
                .alpha
                .entries
                .iter()
                .enumerate()
                .map(|(i, fs)| {
                    (
                        name_a(i),
                        StructDoc {
                            shape: shape_name(fs.shape),
                            args: fs.args.iter().map(|&x| name_a(x)).collect(),
                        },
                    )
                })
                .collect(),
            beta: (0..self.fb.len())
                .map(|k| {
                    let bs = self.fb.structure_at(k);
                    BetaDoc {
                        shape: shape_name(bs.shape),
                        args: bs.args.iter().map(|&x| name_b(x)).collect(),
                        out: name_b(self.beta.entries[k]),
                    }
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("instance documents always serialize")
    }
}

fn container_violation(location: impl Into<String>, e: ContainerError) -> InstanceError {
    let message = match &e {
        ContainerError::UnknownElement(_) => "unknown element".to_owned(),
        other => other.to_string(),
    };
    InstanceError::validation(location, message)
}

fn resolve_structure(
    functor: &ContainerSpec,
    carrier: &Carrier,
    sd: &StructDoc,
    loc: &str,
) -> Result<FStructure, InstanceError> {
    let shape = functor
        .shape_index(&sd.shape)
        .ok_or_else(|| InstanceError::validation(loc, format!("unknown shape `{}`", sd.shape)))?;
    let args = sd
        .args
        .iter()
        .map(|name| {
            carrier
                .position(name)
                .ok_or_else(|| InstanceError::validation(loc, format!("unknown element `{name}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fs = FStructure::new(shape, args);
    functor
        .check(&fs, carrier.len())
        .map_err(|e| container_violation(loc, e))?;
    Ok(fs)
}

/// On-disk instance document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub functor: FunctorDoc,
    pub domain: CarrierDoc,
    pub codomain: CarrierDoc,
    pub alpha: IndexMap<String, StructDoc>,
    pub beta: Vec<BetaDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctorDoc {
    pub shapes: Vec<Shape>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierDoc {
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructDoc {
    pub shape: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaDoc {
    pub shape: String,
    pub args: Vec<String>,
    pub out: String,
}

/// Built-in instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    /// Insertion sort: `α = [nil, cons]⁻¹`, `β = ins`.
    Isort { el: usize, max_len: usize },
    /// Quicksort: `α = qsplit`, `β = concat`.
    Qsort { el: usize, max_len: usize },
    /// `F X = X`, `B = Z/m`, `β = succ mod m`, `A = {a}`, `α = id`.
    ModSucc { modulus: usize },
    /// `F X = X`, `α = id`, `β = id`.
    Identity { domain: usize, codomain: usize },
}

impl fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Isort { el, max_len } => write!(f, "isort(k={el},n={max_len})"),
            Self::Qsort { el, max_len } => write!(f, "qsort(k={el},n={max_len})"),
            Self::ModSucc { modulus } => write!(f, "modsucc(m={modulus})"),
            Self::Identity { domain, codomain } => write!(f, "identity({domain},{codomain})"),
        }
    }
}

/// All lists over `0..el` of length at most `max_len`, by length then
/// lexicographically.
pub fn bounded_lists(el: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * el);
        for l in &layer {
            for x in 0..el {
                let mut m = l.clone();
                m.push(x);
                next.push(m);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn list_name(l: &[usize]) -> String {
    let parts: Vec<String> = l.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn insert_sorted(x: usize, ys: &[usize]) -> Vec<usize> {
    let at = ys.iter().position(|&y| x <= y).unwrap_or(ys.len());
    let mut out = Vec::with_capacity(ys.len() + 1);
    out.extend_from_slice(&ys[..at]);
    out.push(x);
    out.extend_from_slice(&ys[at..]);
    out
}

pub fn generate_example(kind: ExampleKind, limits: Limits) -> Result<EquationInstance, InstanceError> {
    match kind {
        ExampleKind::Isort { el, max_len } | ExampleKind::Qsort { el, max_len } => {
            let qsort = matches!(kind, ExampleKind::Qsort { .. });
            sorting_instance(el, max_len, qsort, limits)
        }
        ExampleKind::ModSucc { modulus } => {
            if modulus == 0 {
                return Err(InstanceError::validation("modulus", "modulus must be positive"));
            }
            check_elements(modulus, limits)?;
            let functor = ContainerSpec::new(vec![Shape::new("succ", 1)]).expect("valid functor");
            let domain = Carrier::new("domain", vec!["a".to_owned()])?;
            let codomain = Carrier::new("codomain", (0..modulus).map(|i| i.to_string()).collect())?;
            EquationInstance::new(
                functor,
                CoalgebraTable {
                    carrier: domain,
                    entries: vec![FStructure::new(0, vec![0])],
                },
                AlgebraTable {
                    carrier: codomain,
                    entries: (0..modulus).map(|x| (x + 1) % modulus).collect(),
                },
            )
        }
        ExampleKind::Identity { domain, codomain } => {
            check_elements(domain.max(codomain), limits)?;
            let functor = ContainerSpec::new(vec![Shape::new("id", 1)]).expect("valid functor");
            EquationInstance::new(
                functor,
                CoalgebraTable {
                    carrier: Carrier::canonical("domain", "a", domain),
                    entries: (0..domain).map(|a| FStructure::new(0, vec![a])).collect(),
                },
                AlgebraTable {
                    carrier: Carrier::canonical("codomain", "b", codomain),
                    entries: (0..codomain).collect(),
                },
            )
        }
    }
}

fn check_elements(n: usize, limits: Limits) -> Result<(), InstanceError> {
    if n > limits.max_elements {
        return Err(InstanceError::ParamsTooLarge(format!(
            "{n} elements exceed the cap of {}",
            limits.max_elements
        )));
    }
    Ok(())
}

fn sorting_instance(
    el: usize,
    max_len: usize,
    qsort: bool,
    limits: Limits,
) -> Result<EquationInstance, InstanceError> {
    if el == 0 {
        return Err(InstanceError::validation("el", "alphabet must be nonempty"));
    }
    let mut size = 0usize;
    let mut layer = 1usize;
    for _ in 0..=max_len {
        size = size.saturating_add(layer);
        layer = layer.saturating_mul(el);
    }
    check_elements(size, limits)?;
    let arity = if qsort { 2 } else { 1 };
    let mut shapes = vec![Shape::new("nil", 0)];
    let tag = if qsort { "split" } else { "cons" };
    shapes.extend((0..el).map(|x| Shape::new(format!("{tag}{x}"), arity)));
    let functor = ContainerSpec::with_arity_cap(shapes, limits.max_arity.max(arity))
        .map_err(|e| InstanceError::validation("functor", e.to_string()))?;
    match functor.count_structures(size) {
        Some(c) if c <= limits.max_structures => {}
        _ => {
            return Err(InstanceError::ParamsTooLarge(format!(
                "|F B| exceeds the cap of {}",
                limits.max_structures
            )))
        }
    }

    let lists = bounded_lists(el, max_len);
    let position: HashMap<&[usize], usize> =
        lists.iter().enumerate().map(|(i, l)| (l.as_slice(), i)).collect();
    let pos = |l: &[usize]| position[l];
    let names: Vec<String> = lists.iter().map(|l| list_name(l)).collect();

    let alpha = lists
        .iter()
        .map(|l| match l.split_first() {
            None => FStructure::nullary(0),
            Some((&x, rest)) if qsort => {
                let le: Vec<usize> = rest.iter().copied().filter(|&y| y <= x).collect();
                let gt: Vec<usize> = rest.iter().copied().filter(|&y| y > x).collect();
                FStructure::new(1 + x, vec![pos(&le), pos(&gt)])
            }
            Some((&x, rest)) => FStructure::new(1 + x, vec![pos(rest)]),
        })
        .collect();

    let fb = functor
        .indexer(lists.len())
        .map_err(|e| InstanceError::ParamsTooLarge(e.to_string()))?;
    let beta = (0..fb.len())
        .map(|k| {
            let bs = fb.structure_at(k);
            if bs.shape == 0 {
                return 0;
            }
            let x = bs.shape - 1;
            let mut out = if qsort {
                let mut v = lists[bs.args[0]].clone();
                v.push(x);
                v.extend_from_slice(&lists[bs.args[1]]);
                v
            } else {
                insert_sorted(x, &lists[bs.args[0]])
            };
            out.truncate(max_len);
            pos(&out)
        })
        .collect();

    EquationInstance::new(
        functor,
        CoalgebraTable {
            carrier: Carrier::new("domain", names.clone())?,
            entries: alpha,
        },
        AlgebraTable {
            carrier: Carrier::new("codomain", names)?,
            entries: beta,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TINY: &str = r#"{
      "functor": {"shapes": [{"name": "z", "arity": 0}, {"name": "s", "arity": 1}]},
      "domain": {"elements": ["a0", "a1"]},
      "codomain": {"elements": ["b0", "b1"]},
      "alpha": {"a0": {"shape": "z", "args": []}, "a1": {"shape": "s", "args": ["a0"]}},
      "beta": [
        {"shape": "z", "args": [], "out": "b0"},
        {"shape": "s", "args": ["b0"], "out": "b1"},
        {"shape": "s", "args": ["b1"], "out": "b1"}
      ]
    }"#;

    fn expect_validation(doc: &str, needle: &str) {
        match EquationInstance::parse(doc) {
            Err(InstanceError::Validation { message, location }) => {
                assert!(message.contains(needle), "{location}: {message}")
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_tiny() {
        let inst = EquationInstance::parse(TINY).unwrap();
        assert_eq!(inst.size_a(), 2);
        assert_eq!(inst.size_b(), 2);
        assert_eq!(inst.fb_index().len(), inst.functor().enumerate(2).unwrap().len());
        assert_eq!(inst.fb_index().len(), 3);
        assert_eq!(inst.apply_alpha("a0").unwrap(), &FStructure::nullary(0));
        assert_eq!(inst.apply_alpha("a1").unwrap(), &FStructure::new(1, vec![0]));
        assert_eq!(inst.apply_beta(&FStructure::nullary(0)).unwrap(), 0);
        assert_eq!(inst.apply_beta(&FStructure::new(1, vec![0])).unwrap(), 1);
        assert_eq!(inst.apply_beta(&FStructure::new(1, vec![1])).unwrap(), 1);
        assert!(matches!(inst.apply_alpha("a7"), Err(InstanceError::UnknownElement(_))));
        assert!(matches!(
            inst.apply_beta(&FStructure::new(1, vec![5])),
            Err(InstanceError::UnknownStructure(_))
        ));
    }

    #[test]
    fn tiny_loop_alpha() {
        let doc = TINY.replace(r#""args": ["a0"]"#, r#""args": ["a1"]"#);
        let inst = EquationInstance::parse(&doc).unwrap();
        assert_eq!(inst.apply_alpha("a1").unwrap(), &FStructure::new(1, vec![1]));
    }

    #[test]
    fn rejects_partial_beta() {
        let doc = TINY.replace(
            r#",
        {"shape": "s", "args": ["b1"], "out": "b1"}"#,
            "",
        );
        expect_validation(&doc, "beta not total");
    }

    #[test]
    fn rejects_unknown_alpha_arg() {
        let doc = TINY.replace(r#""args": ["a0"]"#, r#""args": ["aX"]"#);
        expect_validation(&doc, "unknown element");
    }

    #[test]
    fn rejects_other_defects() {
        expect_validation(&TINY.replace(r#"["a0", "a1"]"#, r#"["a0", "a0"]"#), "duplicate element");
        expect_validation(&TINY.replace(r#""arity": 1"#, r#""arity": 9"#), "cap");
        expect_validation(
            &TINY.replace(r#"{"shape": "z", "args": [], "out": "b0"},"#, r#"{"shape": "z", "args": [], "out": "b0"},{"shape": "z", "args": [], "out": "b1"},"#),
            "duplicate beta entry",
        );
        expect_validation(&TINY.replace(r#""out": "b0""#, r#""out": "b9""#), "unknown element");
        expect_validation(&TINY.replace(r#", "a1": {"shape": "s", "args": ["a0"]}"#, ""), "alpha not total");
    }

    #[test]
    fn syntax_errors_carry_location() {
        match EquationInstance::parse("{\n  \"functor\": [") {
            Err(InstanceError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_domain_is_legal_empty_codomain_is_not() {
        let doc = r#"{"functor":{"shapes":[{"name":"s","arity":1}]},
            "domain":{"elements":[]},"codomain":{"elements":[]},"alpha":{},"beta":[]}"#;
        assert!(EquationInstance::parse(doc).is_ok());
        let doc = r#"{"functor":{"shapes":[{"name":"s","arity":1}]},
            "domain":{"elements":["a"]},"codomain":{"elements":[]},
            "alpha":{"a":{"shape":"s","args":["a"]}},"beta":[]}"#;
        expect_validation(doc, "empty codomain");
    }

    #[test]
    fn round_trip_through_json() {
        let inst = EquationInstance::parse(TINY).unwrap();
        assert_eq!(EquationInstance::parse(&inst.to_json()).unwrap(), inst);
        let q = generate_example(ExampleKind::Qsort { el: 2, max_len: 2 }, Limits::default()).unwrap();
        assert_eq!(EquationInstance::parse(&q.to_json()).unwrap(), q);
    }

    #[test]
    fn generated_sizes() {
        let q = generate_example(ExampleKind::Qsort { el: 3, max_len: 4 }, Limits::default()).unwrap();
        assert_eq!(q.size_a(), 1 + 3 + 9 + 27 + 81);
        assert_eq!(q.size_b(), 121);
        let i = generate_example(ExampleKind::Isort { el: 2, max_len: 3 }, Limits::default()).unwrap();
        assert_eq!(i.size_a(), 15);
        let small = Limits {
            max_elements: 100,
            ..Limits::default()
        };
        assert!(matches!(
            generate_example(ExampleKind::Qsort { el: 3, max_len: 4 }, small),
            Err(InstanceError::ParamsTooLarge(_))
        ));
    }

    #[test]
    fn sorting_coalgebras_shrink_lists() {
        for kind in [
            ExampleKind::Isort { el: 2, max_len: 3 },
            ExampleKind::Qsort { el: 3, max_len: 3 },
        ] {
            let inst = generate_example(kind, Limits::default()).unwrap();
            let len = |x: usize| inst.domain().element(x).matches(|c: char| c.is_ascii_digit()).count();
            for a in 0..inst.size_a() {
                for &arg in &inst.alpha_at(a).args {
                    assert!(len(arg) < len(a), "{kind}: {}", inst.domain().element(a));
                }
            }
        }
    }

    #[test]
    fn qsplit_sends_ties_left() {
        let q = generate_example(ExampleKind::Qsort { el: 3, max_len: 4 }, Limits::default()).unwrap();
        let a = q.domain().position("[1,2,1,0]").unwrap();
        let fs = q.alpha_at(a);
        assert_eq!(q.show_a(fs), "split1([1,0],[2])");
    }
}
