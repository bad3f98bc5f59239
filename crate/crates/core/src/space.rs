//! Finite content domains: endpoint-inclusive grids over boxes and integer
//! alphabets, their metric, and open neighborhoods `B_eta(A)`.

use alloc::format;
use alloc::vec::Vec;


use crate::{Error, Result};

/// A point of the content domain.
///
/// Real points carry one or two coordinates; labels are alphabet members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatePoint {
    Real { coords: [f64; 2], dim: usize },
    Label(i64),
}

impl StatePoint {
    pub fn real1(x: f64) -> Self {
        StatePoint::Real { coords: [x, 0.0], dim: 1 }
    }

    pub fn real2(x: f64, y: f64) -> Self {
        StatePoint::Real { coords: [x, y], dim: 2 }
    }

    pub fn label(n: i64) -> Self {
        StatePoint::Label(n)
    }

    pub fn dim(&self) -> usize {
        match self {
            StatePoint::Real { dim, .. } => *dim,
            StatePoint::Label(_) => 1,
        }
    }

    /// Coordinates as reals; a label maps to its integer value.
    pub fn coords(&self) -> ([f64; 2], usize) {
        match *self {
            StatePoint::Real { coords, dim } => (coords, dim),
            StatePoint::Label(n) => ([n as f64, 0.0], 1),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            StatePoint::Real { coords, dim } => coords[..*dim].iter().all(|c| c.is_finite()),
            StatePoint::Label(_) => true,
        }
    }
}

/// Euclidean distance between two real points, or absolute difference of
/// two labels.
pub fn point_distance(a: &StatePoint, b: &StatePoint) -> Result<f64> {
    match (a, b) {
        (StatePoint::Label(x), StatePoint::Label(y)) => Ok((*x - *y).abs() as f64),
        (StatePoint::Real { .. }, StatePoint::Real { .. }) => {
            let (ca, da) = a.coords();
            let (cb, db) = b.coords();
            if da != db {
                return Err(Error::DimensionMismatch { left: da, right: db });
            }
            Ok(ca[..da]
                .iter()
                .zip(&cb[..db])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt())
        }
        _ => Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    bounds: Vec<(f64, f64)>,
    resolution: usize,
}

impl GridSpace {
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Lattice spacing along dimension `d`.
    pub fn step(&self, d: usize) -> f64 {
        let (lo, hi) = self.bounds[d];
        (hi - lo) / (self.resolution - 1) as f64
    }

    /// Coordinate of lattice index `i` along dimension `d`.
    pub fn coordinate(&self, d: usize, i: usize) -> f64 {
        let (lo, hi) = self.bounds[d];
        if i + 1 == self.resolution {
            return hi;
        }
        lo + (hi - lo) * (i as f64) / ((self.resolution - 1) as f64)
    }

    fn unravel(&self, index: usize) -> [usize; 2] {
        match self.bounds.len() {
            1 => [index, 0],
            _ => [index / self.resolution, index % self.resolution],
        }
    }

    fn nearest_axis_index(&self, d: usize, x: f64) -> usize {
        let (lo, _) = self.bounds[d];
        let raw = ((x - lo) / self.step(d)).round();
        if raw.is_nan() || raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.resolution - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphabetSpace {
    labels: Vec<i64>,
}

impl AlphabetSpace {
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }
}

/// A finite metric space with a stable enumeration order.
///
/// Grids enumerate row-major (first coordinate slowest) with both endpoints
/// included; alphabets enumerate their labels in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpace {
    Grid(GridSpace),
    Alphabet(AlphabetSpace),
}

impl StateSpace {
    /// Grid over the box `bounds` (one or two dimensions) with `resolution`
    /// points per dimension.
    pub fn grid(bounds: &[(f64, f64)], resolution: usize) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > 2 {
            return Err(Error::InvalidSpace(format!(
                "grid dimension must be 1 or 2, got {}",
                bounds.len()
            )));
        }
        for &(lo, hi) in bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpace(format!("bad bounds [{lo}, {hi}]")));
            }
        }
        if resolution < 2 {
            return Err(Error::InvalidSpace(format!("resolution {resolution} < 2")));
        }
        Ok(StateSpace::Grid(GridSpace { bounds: bounds.to_vec(), resolution }))
    }

    /// Square 2D grid `[lo, hi]^2`.
    pub fn square(lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        Self::grid(&[(lo, hi), (lo, hi)], resolution)
    }

    pub fn alphabet(labels: &[i64]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace("empty alphabet".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace("labels must be strictly increasing".into()));
        }
        Ok(StateSpace::Alphabet(AlphabetSpace { labels: labels.to_vec() }))
    }

    /// Alphabet `{lo, lo+1, ..., hi}`.
    pub fn alphabet_range(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidSpace(format!("empty label range {lo}..={hi}")));
        }
        Self::alphabet(&(lo..=hi).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        match self {
            StateSpace::Grid(g) => g.resolution.pow(g.bounds.len() as u32),
            StateSpace::Alphabet(a) => a.labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            StateSpace::Grid(g) => g.bounds.len(),
            StateSpace::Alphabet(_) => 1,
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, StateSpace::Grid(_))
    }

    /// Enumerated point at `index`. Panics if out of range.
    pub fn point(&self, index: usize) -> StatePoint {
        match self {
            StateSpace::Grid(g) => {
                let [i, j] = g.unravel(index);
                if g.bounds.len() == 1 {
                    StatePoint::real1(g.coordinate(0, i))
                } else {
                    StatePoint::real2(g.coordinate(0, i), g.coordinate(1, j))
                }
            }
            StateSpace::Alphabet(a) => StatePoint::Label(a.labels[index]),
        }
    }

    pub fn enumerate(&self) -> Vec<StatePoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Smallest spacing between neighbouring enumerated points.
    pub fn cell_size(&self) -> f64 {
        match self {
            StateSpace::Grid(g) => (0..g.bounds.len()).map(|d| g.step(d)).fold(f64::INFINITY, f64::min),
            StateSpace::Alphabet(a) => a
                .labels
                .windows(2)
                .map(|w| (w[1] - w[0]) as f64)
                .fold(f64::INFINITY, f64::min)
                .min(1.0),
        }
    }

    /// Cell volume used for midpoint-rule integration over the grid.
    pub fn cell_volume(&self) -> f64 {
        match self {
            StateSpace::Grid(g) => (0..g.bounds.len()).map(|d| g.step(d)).product(),
            StateSpace::Alphabet(_) => 1.0,
        }
    }

    pub fn contains(&self, x: &StatePoint) -> bool {
        match (self, x) {
            (StateSpace::Alphabet(a), StatePoint::Label(n)) => a.labels.binary_search(n).is_ok(),
            (StateSpace::Grid(g), StatePoint::Real { coords, dim }) => {
                *dim == g.bounds.len()
                    && g.bounds.iter().zip(coords).all(|(&(lo, hi), &c)| c >= lo && c <= hi)
            }
            _ => false,
        }
    }

    /// Metric `d` on the space.
    pub fn distance(&self, a: &StatePoint, b: &StatePoint) -> Result<f64> {
        let want = self.dim();
        for p in [a, b] {
            if p.dim() != want || self.is_grid() == matches!(p, StatePoint::Label(_)) {
                return Err(Error::DimensionMismatch { left: want, right: p.dim() });
            }
        }
        point_distance(a, b)
    }

    /// Distance between two enumerated states computed from lattice offsets,
    /// so that neighbouring grid points sit exactly one step apart.
    pub fn index_distance(&self, i: usize, j: usize) -> f64 {
        match self {
            StateSpace::Grid(g) => {
                let a = g.unravel(i);
                let b = g.unravel(j);
                (0..g.bounds.len())
                    .map(|d| {
                        let off = (a[d] as f64 - b[d] as f64) * g.step(d);
                        off * off
                    })
                    .sum::<f64>()
                    .sqrt()
            }
            StateSpace::Alphabet(s) => (s.labels[i] - s.labels[j]).abs() as f64,
        }
    }

    /// Index of an enumerated point equal to `x`, if any.
    pub fn index_of(&self, x: &StatePoint) -> Option<usize> {
        match (self, x) {
            (StateSpace::Alphabet(a), StatePoint::Label(n)) => a.labels.binary_search(n).ok(),
            (StateSpace::Grid(_), StatePoint::Real { .. }) => {
                let idx = self.nearest_index(x)?;
                (self.point(idx) == *x).then_some(idx)
            }
            _ => None,
        }
    }

    /// Nearest enumerated state; points outside the box snap to the boundary.
    pub fn nearest_index(&self, x: &StatePoint) -> Option<usize> {
        match (self, x) {
            (StateSpace::Grid(g), StatePoint::Real { coords, dim }) if *dim == g.bounds.len() => {
                let i = g.nearest_axis_index(0, coords[0]);
                if *dim == 1 {
                    Some(i)
                } else {
                    Some(i * g.resolution + g.nearest_axis_index(1, coords[1]))
                }
            }
            (StateSpace::Alphabet(a), StatePoint::Label(n)) => {
                let pos = a.labels.partition_point(|l| l < n);
                if pos == 0 {
                    Some(0)
                } else if pos == a.labels.len() {
                    Some(pos - 1)
                } else if n - a.labels[pos - 1] <= a.labels[pos] - n {
                    Some(pos - 1)
                } else {
                    Some(pos)
                }
            }
            _ => None,
        }
    }

    /// Open neighborhood `{x : inf_{y in core} d(x, y) < eta}`.
    pub fn neighborhood(&self, core: &Region, eta: f64) -> Result<Region> {
        if core.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        self.check_region(core)?;
        let members = (0..self.len())
            .filter(|&x| core.contains(x) || core.iter().any(|y| self.index_distance(x, y) < eta))
            .collect();
        Ok(Region { members })
    }

    pub fn full_region(&self) -> Region {
        Region { members: (0..self.len()).collect() }
    }

    pub(crate) fn check_region(&self, region: &Region) -> Result<()> {
        match region.members.last() {
            Some(&last) if last >= self.len() => Err(Error::RegionIndex { index: last, len: self.len() }),
            _ => Ok(()),
        }
    }
}

/// A set of enumerated states, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Region {
    members: Vec<usize>,
}

impl Region {
    pub fn new(mut indices: Vec<usize>, space_len: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= space_len {
                return Err(Error::RegionIndex { index: last, len: space_len });
            }
        }
        Ok(Region { members: indices })
    }

    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Region { members }
    }

    pub fn empty() -> Self {
        Region::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + Clone + '_ {
        self.members.iter().copied()
    }

    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region::from_sorted(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region::from_sorted(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut members: Vec<usize> = self.iter().chain(other.iter()).collect();
        members.sort_unstable();
        members.dedup();
        Region { members }
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Complement within a space of `space_len` states.
    pub fn complement(&self, space_len: usize) -> Region {
        Region::from_sorted((0..space_len).filter(|&i| !self.contains(i)).collect())
    }

    /// Boolean membership mask over a space of `space_len` states.
    pub fn mask(&self, space_len: usize) -> Vec<bool> {
        let mut m = alloc::vec![false; space_len];
        for i in self.iter() {
            if i < space_len {
                m[i] = true;
            }
        }
        m
    }
}
