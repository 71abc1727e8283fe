//! Multi-index bookkeeping for the spectral bases.
//!
//! Hermite modes are labelled by multi-indices α = (α₁, α₂, α₃) ∈ ℕ³ with
//! total degree |α| = α₁ + α₂ + α₃; the solver truncates to the graded set
//! I_M = {α : |α| ≤ M}, of cardinality (M+1)(M+2)(M+3)/6.  Burnett modes are
//! labelled by (l, m, n) with |m| ≤ l and Burnett degree l + 2n; per degree d
//! there are (d+1)(d+2)/2 of them — the same count as Hermite indices of
//! degree d, since both bases span the degree-d polynomials.
//!
//! Both labellings carry a fixed deterministic order.  The multi-index order
//! is *graded lexicographic*: ascending |α|, then ascending lexicographic on
//! (α₁, α₂, α₃).  This order is normative — the on-disk coefficient cache
//! stores ranks, not indices (see [`crate::collision_kernel`]) — and it is
//! prefix-stable: the first |I_{M'}| entries of I_M are exactly I_{M'} for
//! any M' ≤ M, which is what lets a degree-M state be truncated to degree M₀
//! by slicing.

use std::fmt;

use crate::{Error, Result};

/// A three-dimensional multi-index: per-axis Hermite polynomial orders.
///
/// Components are stored as `u16`.  Degrees beyond ~60 are out of scope (the
/// collision tensor's size makes them impractical long before the
/// representation limit matters).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex([u16; 3]);

impl MultiIndex {
    /// The zero index (0,0,0).
    pub const ZERO: MultiIndex = MultiIndex([0, 0, 0]);

    /// Builds a multi-index from per-axis orders.
    ///
    /// Panics if a component exceeds the `u16` representation bound; all
    /// degrees reachable through the public API stay far below it.
    pub fn new(a1: usize, a2: usize, a3: usize) -> Self {
        assert!(
            a1 <= u16::MAX as usize && a2 <= u16::MAX as usize && a3 <= u16::MAX as usize,
            "multi-index component exceeds the u16 representation bound"
        );
        MultiIndex([a1 as u16, a2 as u16, a3 as u16])
    }

    /// The unit index e_axis, axis ∈ {0, 1, 2}.
    pub fn unit(axis: usize) -> Self {
        let mut c = [0u16; 3];
        c[axis] = 1;
        MultiIndex(c)
    }

    /// Component along `axis` ∈ {0, 1, 2}.
    #[inline]
    pub fn component(self, axis: usize) -> usize {
        self.0[axis] as usize
    }

    /// All three components.
    #[inline]
    pub fn components(self) -> [usize; 3] {
        [self.0[0] as usize, self.0[1] as usize, self.0[2] as usize]
    }

    /// Total degree |α| = α₁ + α₂ + α₃.
    #[inline]
    pub fn degree(self) -> usize {
        (self.0[0] + self.0[1] + self.0[2]) as usize
    }

    /// α! = α₁!·α₂!·α₃! as f64.
    pub fn factorial(self) -> f64 {
        crate::numeric::factorial(self.component(0))
            * crate::numeric::factorial(self.component(1))
            * crate::numeric::factorial(self.component(2))
    }

    /// Componentwise difference, `None` if any component would go negative.
    pub fn checked_sub(self, other: MultiIndex) -> Option<MultiIndex> {
        let mut c = [0u16; 3];
        for (axis, slot) in c.iter_mut().enumerate() {
            *slot = self.0[axis].checked_sub(other.0[axis])?;
        }
        Some(MultiIndex(c))
    }

    /// Per-component parity as a 3-bit mask (bit i set ⇔ αᵢ odd).
    #[inline]
    pub fn parity_mask(self) -> u8 {
        ((self.0[0] & 1) | ((self.0[1] & 1) << 1) | ((self.0[2] & 1) << 2)) as u8
    }

    /// Applies a permutation of the coordinate axes: result[i] = self[perm[i]].
    pub fn permuted(self, perm: [usize; 3]) -> MultiIndex {
        MultiIndex([self.0[perm[0]], self.0[perm[1]], self.0[perm[2]]])
    }

    /// Rank in the global graded-lexicographic order (independent of any
    /// particular I_M truncation; see the module docs).
    ///
    /// Within degree d the lexicographic position of (a₁, a₂, a₃) is
    /// a₁(d+1) − a₁(a₁−1)/2 + a₂, and degrees < d occupy the first
    /// d(d+1)(d+2)/6 ranks.
    pub fn graded_rank(self) -> usize {
        let d = self.degree();
        let a1 = self.component(0);
        let a2 = self.component(1);
        let offset = d * (d + 1) * (d + 2) / 6;
        offset + a1 * (d + 1) - a1 * (a1.max(1) - 1) / 2 + a2
    }

    /// Position of this index among the indices of its own degree, in
    /// lexicographic order: `graded_rank` minus the count of lower degrees.
    pub fn rank_in_degree(self) -> usize {
        let d = self.degree();
        let below = if d == 0 { 0 } else { IndexSet::size_for(d - 1) };
        self.graded_rank() - below
    }
}

impl std::ops::Add for MultiIndex {
    type Output = MultiIndex;

    /// Componentwise sum.
    fn add(self, other: MultiIndex) -> MultiIndex {
        MultiIndex([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    /// The normative graded-lexicographic order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.0).cmp(&(other.degree(), other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// The graded index set I_M = {α : |α| ≤ M} in graded-lexicographic order.
#[derive(Clone, Debug)]
pub struct IndexSet {
    max_degree: usize,
    entries: Vec<MultiIndex>,
}

impl IndexSet {
    /// Builds I_M.
    pub fn new(max_degree: usize) -> Self {
        let mut entries = Vec::with_capacity(Self::size_for(max_degree));
        for d in 0..=max_degree {
            for a1 in 0..=d {
                for a2 in 0..=(d - a1) {
                    entries.push(MultiIndex::new(a1, a2, d - a1 - a2));
                }
            }
        }
        debug_assert_eq!(entries.len(), Self::size_for(max_degree));
        IndexSet {
            max_degree,
            entries,
        }
    }

    /// |I_M| = (M+1)(M+2)(M+3)/6.
    pub fn size_for(max_degree: usize) -> usize {
        (max_degree + 1) * (max_degree + 2) * (max_degree + 3) / 6
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Membership test: |α| ≤ M.
    pub fn contains(&self, alpha: MultiIndex) -> bool {
        alpha.degree() <= self.max_degree
    }

    /// Rank of α within the set (graded-lexicographic offset).
    ///
    /// Errors with a not-found diagnostic if |α| > M.
    pub fn rank(&self, alpha: MultiIndex) -> Result<usize> {
        if self.contains(alpha) {
            Ok(alpha.graded_rank())
        } else {
            Err(Error::IndexNotFound {
                index: alpha,
                degree: alpha.degree(),
                max_degree: self.max_degree,
            })
        }
    }

    /// Inverse of [`IndexSet::rank`].
    pub fn unrank(&self, offset: usize) -> Result<MultiIndex> {
        self.entries.get(offset).copied().ok_or_else(|| {
            Error::InvalidInput(format!(
                "rank {offset} outside index set of size {}",
                self.entries.len()
            ))
        })
    }

    /// All entries in the normative order.
    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        self.entries.iter().copied()
    }

    /// The entries as a slice (normative order).
    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }
}

/// A Burnett-basis label (l, m, n): spherical-harmonic degree l and order m
/// with |m| ≤ l, Laguerre index n.  Burnett degree is l + 2n.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BurnettIndex {
    l: u16,
    m: i16,
    n: u16,
}

impl BurnettIndex {
    /// Builds a Burnett index, checking |m| ≤ l.
    pub fn new(l: usize, m: i64, n: usize) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::InvalidInput(format!(
                "Burnett index requires |m| ≤ l, got l = {l}, m = {m}"
            )));
        }
        Ok(BurnettIndex {
            l: l as u16,
            m: m as i16,
            n: n as u16,
        })
    }

    #[inline]
    pub fn l(self) -> usize {
        self.l as usize
    }

    #[inline]
    pub fn m(self) -> i64 {
        self.m as i64
    }

    #[inline]
    pub fn n(self) -> usize {
        self.n as usize
    }

    /// Burnett degree l + 2n — the polynomial degree of B_{(l,m,n)}.
    #[inline]
    pub fn degree(self) -> usize {
        self.l as usize + 2 * self.n as usize
    }

    /// Position of this index within [`burnett_indices_of_degree`] of its
    /// degree: blocks of ascending n, each spanning m = −l … l.
    pub fn position_in_degree(self) -> usize {
        let d = self.degree();
        let n = self.n as usize;
        // Σ_{n' < n} (2(d − 2n') + 1) = n(2d + 1) − 2n(n − 1)
        let block = n * (2 * d + 1) - 2 * n * (n.max(1) - 1);
        block + (self.m as i64 + self.l as i64) as usize
    }
}

impl fmt::Display for BurnettIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.l, self.m, self.n)
    }
}

/// Number of Burnett indices of degree d: (d+1)(d+2)/2.
pub fn burnett_count_of_degree(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// All Cartesian multi-indices of exactly degree `d`, in lexicographic order
/// on the components — the same order they occupy inside the graded index
/// set, so `MultiIndex::rank_in_degree` is the position in this list.
pub fn multi_indices_of_degree(d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(burnett_count_of_degree(d));
    for a1 in 0..=d {
        for a2 in 0..=(d - a1) {
            out.push(MultiIndex::new(a1, a2, d - a1 - a2));
        }
    }
    out
}

/// All Burnett indices (l, m, n) with l + 2n = d, in the deterministic order
/// n ascending, then m ascending (so the highest l comes first).
pub fn burnett_indices_of_degree(d: usize) -> Vec<BurnettIndex> {
    let mut out = Vec::with_capacity(burnett_count_of_degree(d));
    for n in 0..=(d / 2) {
        let l = d - 2 * n;
        for m in -(l as i64)..=(l as i64) {
            out.push(BurnettIndex {
                l: l as u16,
                m: m as i16,
                n: n as u16,
            });
        }
    }
    debug_assert_eq!(out.len(), burnett_count_of_degree(d));
    out
}
