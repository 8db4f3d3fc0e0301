//! Asymptotic lattices and half-lattices: synthetic generation, labelling by
//! discrete parallel transport, chart transitions and global gluing.

mod boundary;
mod columns;
mod glue;
mod index;
mod io;
mod synth;
mod transport;

pub use boundary::{detect_boundary, BoundarySide};
pub use columns::{label_columns, ColumnOrigin};
pub use glue::{glue_global, glue_global_family, transition, GlobalLabelling};
pub use index::GridIndex;
pub use io::{write_global_json, write_labelled_csv};
pub use synth::{synth_lattice, ChartSpec, QuadraticMap, SynthLattice};
pub use transport::{label_half_lattice, label_half_lattice_with, label_regular, label_regular_with, select_affine_basis};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Region of the plane used to restrict labellings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    All,
    Rect { x: (f64, f64), y: (f64, f64) },
    Ball { c: (f64, f64), r: f64 },
}

impl Region {
    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        Region::Rect { x, y }
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        match *self {
            Region::All => true,
            Region::Rect { x, y } => p.0 >= x.0 && p.0 <= x.1 && p.1 >= y.0 && p.1 <= y.1,
            Region::Ball { c, r } => (p.0 - c.0).hypot(p.1 - c.1) <= r,
        }
    }

    /// The region pulled in by `margin` on every side.
    pub fn shrink(&self, margin: f64) -> Region {
        match *self {
            Region::All => Region::All,
            Region::Rect { x, y } => Region::Rect {
                x: (x.0 + margin, x.1 - margin),
                y: (y.0 + margin, y.1 - margin),
            },
            Region::Ball { c, r } => Region::Ball { c, r: (r - margin).max(0.0) },
        }
    }
}

/// A region with holes cut out of it, e.g. a ball minus the cut above a
/// focus-focus value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub base: Region,
    pub holes: Vec<Region>,
}

impl Domain {
    pub fn new(base: Region, holes: Vec<Region>) -> Self {
        Self { base, holes }
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        self.base.contains(p) && !self.holes.iter().any(|h| h.contains(p))
    }

    /// Shrinks the base and grows every hole by `margin`.
    pub fn shrink(&self, margin: f64) -> Domain {
        Domain {
            base: self.base.shrink(margin),
            holes: self.holes.iter().map(|h| h.shrink(-margin)).collect(),
        }
    }
}

impl From<Region> for Domain {
    fn from(base: Region) -> Self {
        Domain { base, holes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub k: u32,
    pub points: Vec<(f64, f64)>,
    pub region: Region,
}

impl PointCloud {
    pub fn new(k: u32, points: Vec<(f64, f64)>) -> Self {
        Self { k, points, region: Region::All }
    }

    pub fn hbar(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn grid(&self) -> GridIndex {
        GridIndex::new(&self.points, self.hbar())
    }

    /// Smallest distance between two distinct points (infinite for < 2 points).
    pub fn min_separation(&self) -> f64 {
        let g = self.grid();
        self.points
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| g.nearest_excluding(&self.points, p, i).map(|(_, d)| d))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabellingKind {
    Regular,
    HalfLattice,
}

/// Integer labels attached to (some of) the points of a cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labelling {
    pub assignment: BTreeMap<usize, (i64, i64)>,
    pub kind: LabellingKind,
}

impl Labelling {
    pub fn new(kind: LabellingKind) -> Self {
        Self { assignment: BTreeMap::new(), kind }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<(i64, i64)> {
        self.assignment.get(&idx).copied()
    }

    /// Label to point index; fails if the labelling is not injective.
    pub fn inverse(&self) -> Result<HashMap<(i64, i64), usize>> {
        let mut inv = HashMap::with_capacity(self.assignment.len());
        for (&i, &lab) in &self.assignment {
            if let Some(prev) = inv.insert(lab, i) {
                return Err(Error::Inconsistent(format!(
                    "label {lab:?} given to points {prev} and {i}"
                )));
            }
        }
        Ok(inv)
    }

    /// Applies lab -> A lab + kappa to every label.
    pub fn transformed(&self, t: &ChartTransition) -> Labelling {
        Labelling {
            assignment: self.assignment.iter().map(|(&i, &l)| (i, t.apply(l))).collect(),
            kind: self.kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineBasis {
    pub lam00: usize,
    pub lam10: usize,
    pub lam01: usize,
}

/// lab2 = A lab1 + kappa, A in SL(2, Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChartTransition {
    pub a_matrix: [[i64; 2]; 2],
    pub kappa: (i64, i64),
}

impl ChartTransition {
    pub fn identity() -> Self {
        Self { a_matrix: [[1, 0], [0, 1]], kappa: (0, 0) }
    }

    pub fn new(a_matrix: [[i64; 2]; 2], kappa: (i64, i64)) -> Result<Self> {
        let t = Self { a_matrix, kappa };
        if t.det() != 1 {
            return Err(Error::InvalidInput(format!("det A = {} is not 1", t.det())));
        }
        Ok(t)
    }

    pub fn det(&self) -> i64 {
        let a = self.a_matrix;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    pub fn apply(&self, l: (i64, i64)) -> (i64, i64) {
        let a = self.a_matrix;
        (
            a[0][0] * l.0 + a[0][1] * l.1 + self.kappa.0,
            a[1][0] * l.0 + a[1][1] * l.1 + self.kappa.1,
        )
    }

    /// self after other: l -> self(other(l)).
    pub fn compose(&self, other: &ChartTransition) -> ChartTransition {
        let a = self.a_matrix;
        let b = other.a_matrix;
        let m = [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ];
        let shifted = self.apply(other.kappa);
        ChartTransition { a_matrix: m, kappa: shifted }
    }

    pub fn inverse(&self) -> ChartTransition {
        let a = self.a_matrix;
        let inv = [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]];
        let t = ChartTransition { a_matrix: inv, kappa: (0, 0) };
        let k = t.apply(self.kappa);
        ChartTransition { a_matrix: inv, kappa: (-k.0, -k.1) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_algebra() {
        let t = ChartTransition::new([[1, 0], [1, 1]], (3, -1)).unwrap();
        let s = ChartTransition::new([[2, 1], [1, 1]], (0, 5)).unwrap();
        let l = (4, -7);
        assert_eq!(t.compose(&s).apply(l), t.apply(s.apply(l)));
        assert_eq!(t.inverse().apply(t.apply(l)), l);
        assert_eq!(t.compose(&t.inverse()), ChartTransition::identity());
        assert!(ChartTransition::new([[2, 0], [0, 1]], (0, 0)).is_err());
    }

    #[test]
    fn region_shrink() {
        let r = Region::rect((0.0, 1.0), (0.0, 2.0)).shrink(0.25);
        assert!(r.contains((0.5, 1.0)));
        assert!(!r.contains((0.1, 1.0)));
    }
}
