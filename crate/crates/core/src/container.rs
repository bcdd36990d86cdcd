//! Polynomial functors `F X = Σ_s X^{ar(s)}` given as a list of shapes.
//!
//! An [`FStructure`] is one element of `F X`: a shape together with one
//! carrier position per argument slot. Carriers are identified only by their
//! size here; naming lives in [`crate::instance`].

use serde::{Deserialize, Serialize};

use crate::relation::{ElementSet, Relation};

pub const DEFAULT_MAX_ARITY: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContainerError {
    #[error("functor has no shapes")]
    NoShapes,
    #[error("shape {0} has an empty name")]
    EmptyShapeName(usize),
    #[error("duplicate shape name `{0}`")]
    DuplicateShape(String),
    #[error("shape `{name}` has arity {arity}, above the cap of {cap}")]
    ArityCap { name: String, arity: usize, cap: usize },
    #[error("unknown element at position {0}")]
    UnknownElement(usize),
    #[error("shape index {0} out of range")]
    UnknownShape(usize),
    #[error("shape `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("F X has more than usize::MAX structures for |X| = {0}")]
    Overflow(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub name: String,
    pub arity: usize,
}

impl Shape {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self {
            name: name.into(),
            arity,
        }
    }
}

/// A validated polynomial functor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContainerSpec {
    shapes: Vec<Shape>,
}

/// An element of `F X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FStructure {
    pub shape: usize,
    pub args: Vec<usize>,
}

impl FStructure {
    pub fn new(shape: usize, args: Vec<usize>) -> Self {
        Self { shape, args }
    }

    pub fn nullary(shape: usize) -> Self {
        Self { shape, args: Vec::new() }
    }
}

impl ContainerSpec {
    pub fn new(shapes: Vec<Shape>) -> Result<Self, ContainerError> {
        Self::with_arity_cap(shapes, DEFAULT_MAX_ARITY)
    }

    pub fn with_arity_cap(shapes: Vec<Shape>, cap: usize) -> Result<Self, ContainerError> {
        if shapes.is_empty() {
            return Err(ContainerError::NoShapes);
        }
        for (i, s) in shapes.iter().enumerate() {
            if s.name.is_empty() {
                return Err(ContainerError::EmptyShapeName(i));
            }
            if shapes[..i].iter().any(|t| t.name == s.name) {
                return Err(ContainerError::DuplicateShape(s.name.clone()));
            }
            if s.arity > cap {
                return Err(ContainerError::ArityCap {
                    name: s.name.clone(),
                    arity: s.arity,
                    cap,
                });
            }
        }
        Ok(Self { shapes })
    }

    /// Shapes named `s0, s1, ...` with the given arities.
    pub fn from_profile(arities: &[usize]) -> Result<Self, ContainerError> {
        Self::new(
            arities
                .iter()
                .enumerate()
                .map(|(i, &a)| Shape::new(format!("s{i}"), a))
                .collect(),
        )
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn shape(&self, idx: usize) -> &Shape {
        &self.shapes[idx]
    }

    pub fn shape_index(&self, name: &str) -> Option<usize> {
        self.shapes.iter().position(|s| s.name == name)
    }

    pub fn arities(&self) -> Vec<usize> {
        self.shapes.iter().map(|s| s.arity).collect()
    }

    pub fn arity(&self, shape: usize) -> usize {
        self.shapes[shape].arity
    }

    /// `Σ_s n^{ar(s)}`, or `None` on overflow.
    pub fn count_structures(&self, n: usize) -> Option<usize> {
        self.shapes.iter().try_fold(0usize, |acc, s| {
            let p = n.checked_pow(u32::try_from(s.arity).ok()?)?;
            acc.checked_add(p)
        })
    }

    /// Index of `F X` for `|X| = n`, giving a dense numbering of structures.
    pub fn indexer(&self, n: usize) -> Result<StructureIndex, ContainerError> {
        let mut offsets = Vec::with_capacity(self.shapes.len());
        let mut total = 0usize;
        for s in &self.shapes {
            offsets.push(total);
            let block = u32::try_from(s.arity)
                .ok()
                .and_then(|a| n.checked_pow(a))
                .ok_or(ContainerError::Overflow(n))?;
            total = total.checked_add(block).ok_or(ContainerError::Overflow(n))?;
        }
        Ok(StructureIndex {
            carrier_size: n,
            arities: self.arities(),
            offsets,
            total,
        })
    }

    /// All structures over a carrier of size `n`: shape order, then args
    /// lexicographically with the first argument most significant.
    pub fn enumerate(&self, n: usize) -> Result<Vec<FStructure>, ContainerError> {
        let idx = self.indexer(n)?;
        Ok((0..idx.len()).map(|k| idx.structure_at(k)).collect())
    }

    /// Checks shape range, arity and that every arg lies in a carrier of size `n`.
    pub fn check(&self, fs: &FStructure, n: usize) -> Result<(), ContainerError> {
        let shape = self
            .shapes
            .get(fs.shape)
            .ok_or(ContainerError::UnknownShape(fs.shape))?;
        if shape.arity != fs.args.len() {
            return Err(ContainerError::ArityMismatch {
                name: shape.name.clone(),
                expected: shape.arity,
                got: fs.args.len(),
            });
        }
        match fs.args.iter().find(|&&x| x >= n) {
            Some(&x) => Err(ContainerError::UnknownElement(x)),
            None => Ok(()),
        }
    }

    /// `F h`: same shape, arguments mapped pointwise.
    pub fn map<H>(&self, fs: &FStructure, h: H) -> Result<FStructure, ContainerError>
    where
        H: Fn(usize) -> Option<usize>,
    {
        let args = fs
            .args
            .iter()
            .map(|&x| h(x).ok_or(ContainerError::UnknownElement(x)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FStructure::new(fs.shape, args))
    }

    /// Predicate lifting: `P` holds at every argument position.
    pub fn lift_pred(&self, pred: &ElementSet, fs: &FStructure) -> bool {
        fs.args.iter().all(|&x| pred.contains(x))
    }

    /// Relation lifting: same shape and `R` relates arguments pointwise.
    pub fn lift_rel(&self, rel: &Relation, fs: &FStructure, gs: &FStructure) -> bool {
        fs.shape == gs.shape
            && fs.args.len() == gs.args.len()
            && fs.args.iter().zip(&gs.args).all(|(&x, &y)| rel.contains(x, y))
    }

    pub fn display(&self, fs: &FStructure, name: impl Fn(usize) -> String) -> String {
        let args: Vec<String> = fs.args.iter().map(|&x| name(x)).collect();
        format!("{}({})", self.shapes[fs.shape].name, args.join(","))
    }
}

/// Dense numbering of `F X` for a fixed carrier size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureIndex {
    carrier_size: usize,
    arities: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl StructureIndex {
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn carrier_size(&self) -> usize {
        self.carrier_size
    }

    /// Range of indices occupied by one shape.
    pub fn shape_range(&self, shape: usize) -> std::ops::Range<usize> {
        let end = self.offsets.get(shape + 1).copied().unwrap_or(self.total);
        self.offsets[shape]..end
    }

    pub fn index_of(&self, fs: &FStructure) -> usize {
        let n = self.carrier_size;
        let within = fs.args.iter().fold(0usize, |acc, &x| acc * n + x);
        self.offsets[fs.shape] + within
    }

    pub fn structure_at(&self, k: usize) -> FStructure {
        debug_assert!(k < self.total);
        let shape = match self.offsets.binary_search(&k) {
            // several shapes can share an offset when earlier blocks are empty
            Ok(mut s) => {
                while s + 1 < self.offsets.len() && self.offsets[s + 1] == k {
                    s += 1;
                }
                s
            }
            Err(s) => s - 1,
        };
        let arity = self.arities[shape];
        let mut rem = k - self.offsets[shape];
        let mut args = vec![0; arity];
        for slot in args.iter_mut().rev() {
            *slot = rem % self.carrier_size;
            rem /= self.carrier_size;
        }
        FStructure::new(shape, args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zs() -> ContainerSpec {
        ContainerSpec::new(vec![Shape::new("z", 0), Shape::new("s", 1)]).unwrap()
    }

    fn n2() -> ContainerSpec {
        ContainerSpec::new(vec![Shape::new("n", 2)]).unwrap()
    }

    #[test]
    fn map_examples() {
        let f = zs();
        // b0 = 0, b1 = 1
        let h = |x: usize| [Some(1), Some(1)].get(x).copied().flatten();
        assert_eq!(f.map(&FStructure::nullary(0), |_| None).unwrap(), FStructure::nullary(0));
        assert_eq!(f.map(&FStructure::new(1, vec![0]), h).unwrap(), FStructure::new(1, vec![1]));
        let swap = |x: usize| Some(1 - x);
        assert_eq!(
            n2().map(&FStructure::new(0, vec![0, 1]), swap).unwrap(),
            FStructure::new(0, vec![1, 0])
        );
        assert_eq!(
            f.map(&FStructure::new(1, vec![3]), h),
            Err(ContainerError::UnknownElement(3))
        );
    }

    #[test]
    fn lift_pred_examples() {
        let f = zs();
        assert!(f.lift_pred(&ElementSet::empty(2), &FStructure::nullary(0)));
        assert!(!f.lift_pred(&ElementSet::from_members(2, [0]), &FStructure::new(1, vec![1])));
        assert!(n2().lift_pred(&ElementSet::from_members(2, [0]), &FStructure::new(0, vec![0, 0])));
    }

    #[test]
    fn lift_rel_examples() {
        let f = zs();
        let any = Relation::total(2, 2);
        assert!(f.lift_rel(&Relation::empty(2, 2), &FStructure::nullary(0), &FStructure::nullary(0)));
        assert!(!f.lift_rel(&any, &FStructure::nullary(0), &FStructure::new(1, vec![0])));
        let r = Relation::from_pairs(2, 2, [(0, 0)]);
        assert!(f.lift_rel(&r, &FStructure::new(1, vec![0]), &FStructure::new(1, vec![0])));
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            zs().enumerate(2).unwrap(),
            vec![
                FStructure::nullary(0),
                FStructure::new(1, vec![0]),
                FStructure::new(1, vec![1])
            ]
        );
        assert_eq!(n2().enumerate(1).unwrap(), vec![FStructure::new(0, vec![0, 0])]);
        let zn = ContainerSpec::new(vec![Shape::new("z", 0), Shape::new("n", 2)]).unwrap();
        assert_eq!(zn.enumerate(2).unwrap().len(), 5);
        // empty carrier keeps only the nullary shapes
        assert_eq!(zn.enumerate(0).unwrap(), vec![FStructure::nullary(0)]);
    }

    #[test]
    fn validation() {
        assert_eq!(ContainerSpec::new(vec![]), Err(ContainerError::NoShapes));
        assert!(matches!(
            ContainerSpec::new(vec![Shape::new("a", 0), Shape::new("a", 1)]),
            Err(ContainerError::DuplicateShape(_))
        ));
        assert!(matches!(
            ContainerSpec::new(vec![Shape::new("", 0)]),
            Err(ContainerError::EmptyShapeName(0))
        ));
        assert!(matches!(
            ContainerSpec::new(vec![Shape::new("w", 5)]),
            Err(ContainerError::ArityCap { arity: 5, cap: 4, .. })
        ));
        assert!(ContainerSpec::with_arity_cap(vec![Shape::new("w", 5)], 5).is_ok());
    }

    fn arb_profile() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(0usize..=3, 1..=3)
    }

    proptest! {
        #[test]
        fn enumeration_is_dense_and_sized(profile in arb_profile(), n in 0usize..=3) {
            let f = ContainerSpec::from_profile(&profile).unwrap();
            let all = f.enumerate(n).unwrap();
            let expected: usize = profile.iter().map(|&a| n.pow(a as u32)).sum();
            prop_assert_eq!(all.len(), expected);
            let idx = f.indexer(n).unwrap();
            for (k, fs) in all.iter().enumerate() {
                prop_assert_eq!(idx.index_of(fs), k);
                prop_assert!(f.check(fs, n).is_ok());
            }
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted, all);
        }

        #[test]
        fn lifting_laws(profile in arb_profile(), n in 1usize..=3, bits in any::<u16>()) {
            let f = ContainerSpec::from_profile(&profile).unwrap();
            let all = f.enumerate(n).unwrap();
            let pred = ElementSet::from_members(n, (0..n).filter(|i| bits >> i & 1 == 1));
            let diag = Relation::from_pairs(n, n, pred.iter().map(|x| (x, x)));
            let eq = Relation::identity(n);
            for fs in &all {
                prop_assert_eq!(f.lift_pred(&pred, fs), f.lift_rel(&diag, fs, fs));
                for gs in &all {
                    prop_assert_eq!(f.lift_rel(&eq, fs, gs), fs == gs);
                }
            }
        }

        #[test]
        fn map_is_functorial(profile in arb_profile(), n in 1usize..=3, g in prop::collection::vec(0usize..3, 3), h in prop::collection::vec(0usize..3, 3)) {
            let f = ContainerSpec::from_profile(&profile).unwrap();
            let g: Vec<usize> = g.into_iter().map(|x| x % n).collect();
            let h: Vec<usize> = h.into_iter().map(|x| x % n).collect();
            for fs in f.enumerate(n).unwrap() {
                prop_assert_eq!(f.map(&fs, Some).unwrap(), fs.clone());
                let composed = f.map(&fs, |x| Some(g[h[x]])).unwrap();
                let stepwise = f.map(&f.map(&fs, |x| Some(h[x])).unwrap(), |x| Some(g[x])).unwrap();
                prop_assert_eq!(composed.shape, fs.shape);
                prop_assert_eq!(composed, stepwise);
            }
        }
    }
}
