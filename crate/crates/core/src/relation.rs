//! Bitset-backed predicates, relations and partitions over carrier positions.

use fixedbitset::FixedBitSet;
use petgraph::unionfind::UnionFind;

/// A subset of a carrier, indexed by carrier position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    bits: FixedBitSet,
}

impl ElementSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Self { bits }
    }

    pub fn from_members(universe: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(universe);
        for m in members {
            set.insert(m);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.bits.contains(x)
    }

    pub fn insert(&mut self, x: usize) {
        self.bits.insert(x);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.universe()
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Members in ascending carrier order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    /// Positions of the universe outside the set, ascending.
    pub fn complement_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.zeroes()
    }
}

/// A binary relation between carriers of sizes `rows` and `cols`, stored
/// row-major in a single bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: usize,
    cols: usize,
    bits: FixedBitSet,
}

impl Relation {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: FixedBitSet::with_capacity(rows * cols),
        }
    }

    pub fn total(rows: usize, cols: usize) -> Self {
        let mut rel = Self::empty(rows, cols);
        rel.bits.insert_range(..);
        rel
    }

    pub fn identity(n: usize) -> Self {
        let mut rel = Self::empty(n, n);
        for i in 0..n {
            rel.insert(i, i);
        }
        rel
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rel = Self::empty(rows, cols);
        for (i, j) in pairs {
            rel.insert(i, j);
        }
        rel
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.rows && j < self.cols && self.bits.contains(i * self.cols + j)
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(i < self.rows && j < self.cols, "pair ({i}, {j}) out of range");
        self.bits.insert(i * self.cols + j);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.bits.is_subset(&other.bits)
    }

    /// Pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.bits.ones().map(move |k| (k / cols, k % cols))
    }

    /// Elements related to `i`, ascending.
    pub fn image(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let start = i * self.cols;
        (0..self.cols).filter(move |j| self.bits.contains(start + j))
    }

    /// Rows related to at least one column.
    pub fn domain(&self) -> ElementSet {
        ElementSet::from_members(self.rows, self.pairs().map(|(i, _)| i))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.pairs().all(|(i, j)| self.contains(j, i))
    }

    /// First pair `(i, j)` with `i != j`, in row-major order.
    pub fn first_off_diagonal(&self) -> Option<(usize, usize)> {
        self.pairs().find(|&(i, j)| i != j)
    }

    pub fn within_equality(&self) -> bool {
        self.first_off_diagonal().is_none()
    }

    /// First row related to two distinct columns, with the two columns.
    pub fn first_non_functional(&self) -> Option<(usize, usize, usize)> {
        (0..self.rows).find_map(|i| {
            let mut img = self.image(i);
            let first = img.next()?;
            img.next().map(|second| (i, first, second))
        })
    }

    /// Reflexive-transitive-symmetric closure of an endorelation, as a partition.
    pub fn equivalence_closure(&self) -> Partition {
        assert_eq!(self.rows, self.cols, "closure of a non-endorelation");
        let mut uf = UnionFind::<usize>::new(self.rows);
        for (i, j) in self.pairs() {
            uf.union(i, j);
        }
        Partition::from_labels(&uf.into_labeling())
    }
}

/// A partition of a carrier into classes. Classes are ordered by their least
/// member, and members inside a class are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl Partition {
    pub fn discrete(n: usize) -> Self {
        Self {
            classes: (0..n).map(|i| vec![i]).collect(),
            class_of: (0..n).collect(),
        }
    }

    /// Builds a partition from an arbitrary class label per element.
    pub fn from_labels<L: Eq + Copy>(labels: &[L]) -> Self {
        let mut seen: Vec<L> = Vec::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut class_of = Vec::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            let c = match seen.iter().position(|s| s == l) {
                Some(c) => c,
                None => {
                    seen.push(*l);
                    classes.push(Vec::new());
                    classes.len() - 1
                }
            };
            classes[c].push(i);
            class_of.push(c);
        }
        Self { classes, class_of }
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn is_discrete(&self) -> bool {
        self.classes.len() == self.class_of.len()
    }

    /// The relation "same class".
    pub fn to_relation(&self) -> Relation {
        let n = self.class_of.len();
        let mut rel = Relation::empty(n, n);
        for class in &self.classes {
            for &i in class {
                for &j in class {
                    rel.insert(i, j);
                }
            }
        }
        rel
    }
}
