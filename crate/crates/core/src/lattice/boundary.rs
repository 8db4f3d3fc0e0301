use std::collections::BTreeMap;

use super::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    Lower,
    Upper,
}

/// Extremal point of every vertical strip of width hbar, at the largest k.
pub fn detect_boundary(clouds: &[PointCloud], side: BoundarySide) -> Vec<(f64, f64)> {
    let Some(cloud) = clouds.iter().filter(|c| !c.is_empty()).max_by_key(|c| c.k) else {
        return Vec::new();
    };
    let hbar = cloud.hbar();
    let x0 = cloud.points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut strips: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for &p in &cloud.points {
        let key = ((p.0 - x0) / hbar + 0.5).floor() as i64;
        let e = strips.entry(key).or_insert(p);
        let better = match side {
            BoundarySide::Lower => p.1 < e.1,
            BoundarySide::Upper => p.1 > e.1,
        };
        if better {
            *e = p;
        }
    }
    strips.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{synth_lattice, ChartSpec, QuadraticMap, Region};

    #[test]
    fn identity_half_lattice_boundary_is_the_axis() {
        let c = ChartSpec::new(
            QuadraticMap::identity(),
            QuadraticMap::zero(),
            Region::rect((0.0, 1.0), (0.0, 0.5)),
            true,
        )
        .unwrap();
        let clouds: Vec<_> = [10, 20].iter().map(|&k| synth_lattice(&c, k).unwrap().cloud).collect();
        let b = detect_boundary(&clouds, BoundarySide::Lower);
        assert_eq!(b.len(), 21);
        assert!(b.iter().all(|p| p.1 == 0.0));
    }
}
