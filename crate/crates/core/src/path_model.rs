//! Path instances, scenarios and the scenario constructors used throughout.

use num_traits::{Signed, Zero};

use crate::error::{precondition, Error, Result};
use crate::rational::{zero, Q};
use crate::sparse_table::SparseTable;

/// A single violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("path has no vertices")]
    NoVertices,
    #[error("position 0 must be 0")]
    FirstPositionNotZero,
    #[error("positions not strictly increasing at index {0}")]
    PositionsNotIncreasing(usize),
    #[error("expected {expected} capacities, found {found}")]
    CapacityCount { expected: usize, found: usize },
    #[error("capacity {0} not positive")]
    NonPositiveCapacity(usize),
    #[error("expected {expected} weight intervals, found {found}")]
    IntervalCount { expected: usize, found: usize },
    #[error("w_min of vertex {0} is negative")]
    NegativeWeight(usize),
    #[error("w_min exceeds w_max at vertex {0}")]
    InvertedInterval(usize),
}

/// Checks every instance invariant and returns all violations found.
pub fn validate(positions: &[Q], capacities: &[Q], weight_lo: &[Q], weight_hi: &[Q]) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = positions.len();
    if m == 0 {
        out.push(Violation::NoVertices);
        return out;
    }
    if !positions[0].is_zero() {
        out.push(Violation::FirstPositionNotZero);
    }
    for i in 1..m {
        if positions[i] <= positions[i - 1] {
            out.push(Violation::PositionsNotIncreasing(i));
        }
    }
    if capacities.len() + 1 != m {
        out.push(Violation::CapacityCount {
            expected: m - 1,
            found: capacities.len(),
        });
    }
    for (i, c) in capacities.iter().enumerate() {
        if !c.is_positive() {
            out.push(Violation::NonPositiveCapacity(i));
        }
    }
    if weight_lo.len() != m || weight_hi.len() != m {
        let found = if weight_lo.len() != m {
            weight_lo.len()
        } else {
            weight_hi.len()
        };
        out.push(Violation::IntervalCount { expected: m, found });
    }
    for (i, (lo, hi)) in weight_lo.iter().zip(weight_hi).enumerate() {
        if lo.is_negative() {
            out.push(Violation::NegativeWeight(i));
        }
        if lo > hi {
            out.push(Violation::InvertedInterval(i));
        }
    }
    out
}

/// The embedded path `x_0 < ... < x_n` with edge capacities and per-vertex
/// weight intervals. Immutable once built.
#[derive(Debug, Clone)]
pub struct PathInstance {
    positions: Vec<Q>,
    capacities: Vec<Q>,
    weight_lo: Vec<Q>,
    weight_hi: Vec<Q>,
    caps: SparseTable<Q>,
}

impl PartialEq for PathInstance {
    fn eq(&self, other: &Self) -> bool {
        self.positions == other.positions
            && self.capacities == other.capacities
            && self.weight_lo == other.weight_lo
            && self.weight_hi == other.weight_hi
    }
}

impl PathInstance {
    pub fn new(positions: Vec<Q>, capacities: Vec<Q>, weight_lo: Vec<Q>, weight_hi: Vec<Q>) -> Result<Self> {
        let v = validate(&positions, &capacities, &weight_lo, &weight_hi);
        if !v.is_empty() {
            return Err(Error::InvalidInstance(v));
        }
        let caps = SparseTable::new(&capacities);
        Ok(PathInstance {
            positions,
            capacities,
            weight_lo,
            weight_hi,
            caps,
        })
    }

    /// Builds an instance from edge lengths instead of positions.
    pub fn from_lengths(lengths: &[Q], capacities: Vec<Q>, weight_lo: Vec<Q>, weight_hi: Vec<Q>) -> Result<Self> {
        let mut positions = vec![zero()];
        for d in lengths {
            let next = positions.last().unwrap() + d;
            positions.push(next);
        }
        Self::new(positions, capacities, weight_lo, weight_hi)
    }

    /// Index of the last vertex; the path has `n() + 1` vertices.
    pub fn n(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn positions(&self) -> &[Q] {
        &self.positions
    }

    pub fn capacities(&self) -> &[Q] {
        &self.capacities
    }

    pub fn weight_lo(&self) -> &[Q] {
        &self.weight_lo
    }

    pub fn weight_hi(&self) -> &[Q] {
        &self.weight_hi
    }

    pub fn x(&self, i: usize) -> &Q {
        &self.positions[i]
    }

    pub fn lo(&self, i: usize) -> &Q {
        &self.weight_lo[i]
    }

    pub fn hi(&self, i: usize) -> &Q {
        &self.weight_hi[i]
    }

    pub fn length(&self) -> &Q {
        self.positions.last().unwrap()
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i > self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                limit: self.n(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_edge(&self, k: usize) -> Result<()> {
        if k >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: k,
                limit: self.n().saturating_sub(1),
            });
        }
        Ok(())
    }

    pub(crate) fn check_point(&self, x: &Q) -> Result<()> {
        if x.is_negative() || x > self.length() {
            return Err(Error::PointOutsidePath(x.clone()));
        }
        Ok(())
    }

    /// Number of vertices with position `<= x`.
    pub fn count_at_or_left(&self, x: &Q) -> usize {
        self.positions.partition_point(|p| p <= x)
    }

    /// Number of vertices with position `< x`.
    pub fn count_left(&self, x: &Q) -> usize {
        self.positions.partition_point(|p| p < x)
    }

    pub fn vertex_at(&self, x: &Q) -> Option<usize> {
        let k = self.count_left(x);
        (k < self.positions.len() && &self.positions[k] == x).then_some(k)
    }

    pub fn point(&self, x: Q) -> Result<Point> {
        self.check_point(&x)?;
        let vertex = self.vertex_at(&x);
        Ok(Point { value: x, vertex })
    }

    pub fn vertex_point(&self, i: usize) -> Point {
        Point {
            value: self.positions[i].clone(),
            vertex: Some(i),
        }
    }

    /// `min c_t` over `lo <= t < hi`, the capacity bottleneck between
    /// vertices `lo` and `hi`. `None` on an empty range.
    pub fn min_capacity_between(&self, lo: usize, hi: usize) -> Option<&Q> {
        self.caps.min(lo, hi)
    }

    /// `c(x, x')` for `x <= x'`: the minimum capacity over the edges spanned
    /// by the smallest vertex-aligned interval containing `[x, x']`. `None`
    /// stands for the +infinity sentinel returned on an empty edge range.
    pub fn min_capacity(&self, x: &Q, x2: &Q) -> Result<Option<&Q>> {
        self.check_point(x)?;
        self.check_point(x2)?;
        if x > x2 {
            return precondition("min_capacity requires x <= x'");
        }
        let i = self.count_at_or_left(x) - 1;
        let j = self.count_left(x2);
        Ok(self.caps.min(i, j))
    }

    /// Linear-scan version of [`Self::min_capacity`], kept for cross-checks.
    pub fn min_capacity_naive(&self, x: &Q, x2: &Q) -> Option<Q> {
        let i = (0..=self.n()).filter(|&t| &self.positions[t] <= x).max()?;
        let j = (0..=self.n()).filter(|&t| &self.positions[t] >= x2).min()?;
        (i..j).map(|t| self.capacities[t].clone()).min()
    }

    pub fn is_legal(&self, s: &Scenario) -> bool {
        s.len() == self.positions.len()
            && s.weights()
                .iter()
                .enumerate()
                .all(|(i, w)| &self.weight_lo[i] <= w && w <= &self.weight_hi[i])
    }

    /// `s_{i,j}(alpha, beta)`: lower bounds outside `[i, j]`, upper bounds
    /// strictly inside, `alpha` at `i` and `beta` at `j`.
    pub fn two_varying(&self, i: usize, j: usize, alpha: Q, beta: Q) -> Result<Scenario> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i > j {
            return precondition("two_varying requires i <= j");
        }
        if i == j && alpha != beta {
            return precondition("two_varying with i = j requires alpha = beta");
        }
        if alpha.is_negative() || beta.is_negative() {
            return precondition("weights must be nonnegative");
        }
        let mut w = Vec::with_capacity(self.positions.len());
        for t in 0..=self.n() {
            w.push(if t < i || t > j {
                self.weight_lo[t].clone()
            } else if t == i {
                alpha.clone()
            } else if t == j {
                beta.clone()
            } else {
                self.weight_hi[t].clone()
            });
        }
        Scenario::new(w)
    }

    /// `SHIFT(i, j, delta)`: moves `delta` of weight from vertex `i` to `j`,
    /// keeping both within their intervals.
    pub fn shift(&self, s: &Scenario, i: usize, j: usize, delta: &Q) -> Result<Scenario> {
        self.check_index(i)?;
        self.check_index(j)?;
        if delta.is_negative() {
            return precondition("shift amount must be nonnegative");
        }
        if i == j {
            return precondition("shift requires distinct vertices");
        }
        let wi = &s.weights()[i] - delta;
        let wj = &s.weights()[j] + delta;
        if &wi < self.lo(i) || &wj > self.hi(j) {
            return precondition("invalid shift: weight would leave its interval");
        }
        let mut w = s.weights().to_vec();
        w[i] = wi;
        w[j] = wj;
        Scenario::new(w)
    }

    /// The same path seen from the other end: vertex `i` becomes `n - i`.
    pub fn mirrored(&self) -> PathInstance {
        let n = self.n();
        let positions = (0..=n).map(|i| self.length() - &self.positions[n - i]).collect();
        let capacities = self.capacities.iter().rev().cloned().collect();
        let lo = self.weight_lo.iter().rev().cloned().collect();
        let hi = self.weight_hi.iter().rev().cloned().collect();
        PathInstance::new(positions, capacities, lo, hi).expect("mirror of a valid instance is valid")
    }

    /// Maps a point to its position on the mirrored path.
    pub fn mirror_point(&self, x: &Q) -> Q {
        self.length() - x
    }
}

/// A point of the path, remembering the vertex it sits on, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    pub value: Q,
    pub vertex: Option<usize>,
}

/// A nonnegative weight vector with cached prefix sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    weights: Vec<Q>,
    prefix: Vec<Q>,
}

impl Scenario {
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return precondition(format!("weight {i} is negative"));
        }
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        prefix.push(zero());
        for w in &weights {
            let next = prefix.last().unwrap() + w;
            prefix.push(next);
        }
        Ok(Scenario { weights, prefix })
    }

    pub fn zeros(len: usize) -> Self {
        Scenario::new(vec![zero(); len]).unwrap()
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn w(&self, i: usize) -> &Q {
        &self.weights[i]
    }

    /// `W_{i,j}(s)`, the total weight on vertices `i..=j`.
    pub fn prefix_weight(&self, i: usize, j: usize) -> Result<Q> {
        if j >= self.weights.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                limit: self.weights.len() - 1,
            });
        }
        if i > j {
            return precondition("prefix_weight requires i <= j");
        }
        Ok(&self.prefix[j + 1] - &self.prefix[i])
    }

    /// Total weight on the half-open vertex range `lo..hi` (zero if empty).
    pub(crate) fn range_weight(&self, lo: usize, hi: usize) -> Q {
        if lo >= hi {
            return zero();
        }
        &self.prefix[hi] - &self.prefix[lo]
    }

    pub fn total(&self) -> &Q {
        self.prefix.last().unwrap()
    }

    /// `s_{-i}(alpha)`: a copy with `w_i` replaced.
    pub fn substitute(&self, i: usize, alpha: Q) -> Result<Scenario> {
        if i >= self.weights.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                limit: self.weights.len() - 1,
            });
        }
        let mut w = self.weights.clone();
        w[i] = alpha;
        Scenario::new(w)
    }

    pub fn mirrored(&self) -> Scenario {
        Scenario::new(self.weights.iter().rev().cloned().collect()).unwrap()
    }
}
