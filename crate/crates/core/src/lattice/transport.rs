use std::collections::{HashMap, VecDeque};

use super::{AffineBasis, Domain, GridIndex, Labelling, LabellingKind, PointCloud};
use crate::config::Tolerances;
use crate::error::{Error, Result};

type V = (f64, f64);

fn sub(a: V, b: V) -> V {
    (a.0 - b.0, a.1 - b.1)
}

fn add(a: V, b: V) -> V {
    (a.0 + b.0, a.1 + b.1)
}

fn norm(a: V) -> f64 {
    a.0.hypot(a.1)
}

fn cross(a: V, b: V) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Picks three points near `c` whose differences form a reduced lattice basis.
///
/// The first vector is the more horizontal one, pointing right; the second
/// completes a positively oriented pair.
pub fn select_affine_basis(cloud: &PointCloud, c: (f64, f64)) -> Result<AffineBasis> {
    if cloud.len() < 3 {
        return Err(Error::TooSparse(format!("{} point(s) in the cloud", cloud.len())));
    }
    let pts = &cloud.points;
    let grid = cloud.grid();
    let (p0, _) = grid.nearest(pts, c).expect("nonempty cloud");
    let (_, d_min) = grid
        .nearest_excluding(pts, pts[p0], p0)
        .ok_or_else(|| Error::TooSparse("isolated point".into()))?;
    let mut neigh: Vec<(usize, V)> = grid
        .within(pts, pts[p0], 4.0 * d_min)
        .into_iter()
        .filter(|&i| i != p0)
        .map(|i| (i, sub(pts[i], pts[p0])))
        .collect();
    neigh.sort_by(|a, b| norm(a.1).total_cmp(&norm(b.1)).then(a.0.cmp(&b.0)));
    let &(i1, v1) = neigh.first().ok_or_else(|| Error::TooSparse("no neighbours".into()))?;
    let &(i2, v2) = neigh
        .iter()
        .find(|(_, v)| cross(v1, *v).abs() > 0.2 * norm(v1) * norm(*v))
        .ok_or_else(|| Error::TooSparse(format!("all neighbours of point {p0} are collinear")))?;

    let horiz = |v: V| v.0.abs() / norm(v);
    let ((ia, va), (ib, vb)) = if horiz(v1) >= horiz(v2) { ((i1, v1), (i2, v2)) } else { ((i2, v2), (i1, v1)) };
    let flip = |i: usize, v: V| -> Result<usize> {
        // the point on the other side of p0
        let target = sub(pts[p0], v);
        match grid.nearest(pts, target) {
            Some((j, d)) if d < 0.3 * norm(v) && j != i => Ok(j),
            _ => Err(Error::TooSparse(format!("basis at point {p0} cannot be reoriented"))),
        }
    };
    let (lam10, e1) = if va.0 >= 0.0 { (ia, va) } else { (flip(ia, va)?, (-va.0, -va.1)) };
    let lam01 = if cross(e1, vb) > 0.0 { ib } else { flip(ib, vb)? };
    Ok(AffineBasis { lam00: p0, lam10, lam01 })
}

pub fn label_regular(cloud: &PointCloud, basis: AffineBasis, region: &Domain) -> Result<Labelling> {
    label_regular_with(cloud, basis, region, &Tolerances::default())
}

pub fn label_regular_with(
    cloud: &PointCloud,
    basis: AffineBasis,
    region: &Domain,
    tol: &Tolerances,
) -> Result<Labelling> {
    transport(cloud, basis, region, tol, LabellingKind::Regular)
}

/// Half-lattice labelling seeded at the bottom of the vertical strip through
/// the point nearest `c`.
pub fn label_half_lattice(cloud: &PointCloud, c: (f64, f64), b0: &Domain) -> Result<Labelling> {
    label_half_lattice_with(cloud, c, b0, &Tolerances::default())
}

pub fn label_half_lattice_with(
    cloud: &PointCloud,
    c: (f64, f64),
    b0: &Domain,
    tol: &Tolerances,
) -> Result<Labelling> {
    let pts = &cloud.points;
    let hbar = cloud.hbar();
    let half_width = 0.5 * hbar.powf(1.5);
    let grid = cloud.grid();
    let (mu, _) = grid
        .nearest_filtered(pts, c, |i| b0.contains(pts[i]))
        .ok_or_else(|| Error::TooSparse("no point of the cloud lies in the region".into()))?;
    let strip = |x0: f64| -> Vec<usize> {
        let mut s: Vec<usize> = (0..pts.len())
            .filter(|&i| (pts[i].0 - x0).abs() <= half_width && b0.contains(pts[i]))
            .collect();
        s.sort_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1).then(a.cmp(&b)));
        s
    };
    let s0 = strip(pts[mu].0);
    if s0.len() < 2 {
        return Err(Error::EmptyStrip(pts[mu].0));
    }
    let lam00 = s0[0];
    let lam01 = s0[1];
    let s1 = strip(pts[lam00].0 + hbar);
    let lam10 = *s1.first().ok_or(Error::EmptyStrip(pts[lam00].0 + hbar))?;
    transport(cloud, AffineBasis { lam00, lam10, lam01 }, b0, tol, LabellingKind::HalfLattice)
}

fn transport(
    cloud: &PointCloud,
    basis: AffineBasis,
    region: &Domain,
    tol: &Tolerances,
    kind: LabellingKind,
) -> Result<Labelling> {
    let pts = &cloud.points;
    let inside: Vec<bool> = pts.iter().map(|&p| region.contains(p)).collect();
    let n_inside = inside.iter().filter(|&&b| b).count();
    if n_inside < tol.min_region_points {
        return Err(Error::TooSparse(format!("{n_inside} point(s) in the labelling region")));
    }
    let AffineBasis { lam00, lam10, lam01 } = basis;
    for i in [lam00, lam10, lam01] {
        if i >= pts.len() || !inside[i] {
            return Err(Error::InvalidInput(format!("basis point {i} is not in the region")));
        }
    }
    let d1 = sub(pts[lam10], pts[lam00]);
    let d2 = sub(pts[lam01], pts[lam00]);
    if cross(d1, d2).abs() <= 1e-3 * norm(d1) * norm(d2) {
        return Err(Error::InvalidInput("basis points are collinear".into()));
    }
    let grid = GridIndex::new(pts, cloud.hbar());

    let mut label_of: HashMap<usize, (i64, i64)> = HashMap::new();
    let mut point_of: HashMap<(i64, i64), usize> = HashMap::new();
    let mut steps: HashMap<usize, (V, V)> = HashMap::new();
    let mut queue = VecDeque::new();
    for (i, l) in [(lam00, (0, 0)), (lam10, (1, 0)), (lam01, (0, 1))] {
        label_of.insert(i, l);
        point_of.insert(l, i);
        steps.insert(i, (d1, d2));
        queue.push_back(i);
    }

    while let Some(i) = queue.pop_front() {
        let (n, m) = label_of[&i];
        let p = pts[i];
        let (mut s1, mut s2) = steps[&i];
        if let Some(&q) = point_of.get(&(n - 1, m)) {
            s1 = sub(p, pts[q]);
        } else if let Some(&q) = point_of.get(&(n + 1, m)) {
            s1 = sub(pts[q], p);
        }
        if let Some(&q) = point_of.get(&(n, m - 1)) {
            s2 = sub(p, pts[q]);
        } else if let Some(&q) = point_of.get(&(n, m + 1)) {
            s2 = sub(pts[q], p);
        }
        steps.insert(i, (s1, s2));
        let radius = tol.transport_radius * norm(s1).min(norm(s2));
        for (dn, dm, step) in [(1, 0, s1), (-1, 0, (-s1.0, -s1.1)), (0, 1, s2), (0, -1, (-s2.0, -s2.1))] {
            let target = (n + dn, m + dm);
            if point_of.contains_key(&target) {
                continue;
            }
            if kind == LabellingKind::HalfLattice && target.1 < 0 {
                continue;
            }
            let pred = add(p, step);
            let cand: Vec<usize> = grid.within(pts, pred, radius).into_iter().filter(|&j| inside[j]).collect();
            match cand.as_slice() {
                [] => {}
                [j] => {
                    if label_of.contains_key(j) {
                        return Err(Error::AmbiguousNeighbor(target.0, target.1));
                    }
                    label_of.insert(*j, target);
                    point_of.insert(target, *j);
                    steps.insert(*j, (s1, s2));
                    queue.push_back(*j);
                }
                _ => return Err(Error::AmbiguousNeighbor(target.0, target.1)),
            }
        }
    }

    let core = region.shrink(2.5 * norm(d1).max(norm(d2)));
    let missed = (0..pts.len()).filter(|&i| core.contains(pts[i]) && !label_of.contains_key(&i)).count();
    if missed > 0 {
        return Err(Error::Disconnected(missed));
    }
    let mut out = Labelling::new(kind);
    out.assignment.extend(label_of);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{synth_lattice, ChartSpec, QuadraticMap, Region};

    fn grid_chart(half: bool) -> ChartSpec {
        ChartSpec::new(
            QuadraticMap::identity(),
            QuadraticMap::zero(),
            Region::rect((0.0, 1.0), (0.0, 1.0)),
            half,
        )
        .unwrap()
    }

    #[test]
    fn identity_basis_is_axis_aligned() {
        let s = synth_lattice(&grid_chart(false), 10).unwrap();
        let b = select_affine_basis(&s.cloud, (0.5, 0.5)).unwrap();
        let p = &s.cloud.points;
        let e1 = sub(p[b.lam10], p[b.lam00]);
        let e2 = sub(p[b.lam01], p[b.lam00]);
        assert!((e1.0 - 0.1).abs() < 1e-12 && e1.1.abs() < 1e-12);
        assert!(e2.0.abs() < 1e-12 && (e2.1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identity_labels_are_truth() {
        let s = synth_lattice(&grid_chart(false), 10).unwrap();
        let b = select_affine_basis(&s.cloud, (0.5, 0.5)).unwrap();
        let lab = label_regular(&s.cloud, b, &Region::All.into()).unwrap();
        assert_eq!(lab.len(), s.cloud.len());
        for (&i, &l) in &lab.assignment {
            assert_eq!((l.0 + 5, l.1 + 5), s.truth[i]);
        }
    }

    #[test]
    fn identity_half_lattice() {
        let s = synth_lattice(&grid_chart(true), 20).unwrap();
        let lab = label_half_lattice(&s.cloud, (0.3, 0.2), &Region::All.into()).unwrap();
        assert_eq!(lab.len(), s.cloud.len());
        for (&i, &l) in &lab.assignment {
            assert_eq!((l.0 + 6, l.1), s.truth[i]);
        }
    }

    #[test]
    fn sparse_region_refused() {
        let s = synth_lattice(&grid_chart(false), 10).unwrap();
        let b = select_affine_basis(&s.cloud, (0.5, 0.5)).unwrap();
        let r = Region::Ball { c: (0.5, 0.5), r: 0.15 }.into();
        assert!(matches!(label_regular(&s.cloud, b, &r), Err(Error::TooSparse(_))));
    }
}
