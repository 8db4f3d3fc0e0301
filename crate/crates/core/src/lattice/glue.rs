use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ChartTransition, Domain, Labelling, LabellingKind, PointCloud};
use crate::error::{Error, Result};

/// The unique (A, kappa) with lab2 = A lab1 + kappa on the common points of `overlap`.
pub fn transition(
    cloud: &PointCloud,
    lab1: &Labelling,
    lab2: &Labelling,
    overlap: &Domain,
) -> Result<ChartTransition> {
    let common: Vec<((i64, i64), (i64, i64))> = lab1
        .assignment
        .iter()
        .filter(|(i, _)| overlap.contains(cloud.points[**i]))
        .filter_map(|(i, &l1)| lab2.get(*i).map(|l2| (l1, l2)))
        .collect();
    fit_transition(&common)
}

fn fit_transition(common: &[((i64, i64), (i64, i64))]) -> Result<ChartTransition> {
    let Some(&(u0, w0)) = common.first() else {
        return Err(Error::TooSparse("the labellings share no point".into()));
    };
    let diff = |a: (i64, i64), b: (i64, i64)| (a.0 - b.0, a.1 - b.1);
    let det = |a: (i64, i64), b: (i64, i64)| a.0 * b.1 - a.1 * b.0;
    let Some(&(u1, w1)) = common.iter().find(|(u, _)| *u != u0) else {
        return Err(Error::TooSparse("fewer than three common points".into()));
    };
    let a1 = diff(u1, u0);
    let Some(&(u2, w2)) = common.iter().max_by_key(|(u, _)| det(a1, diff(*u, u0)).abs()) else {
        unreachable!()
    };
    let a2 = diff(u2, u0);
    let d = det(a1, a2);
    if d == 0 {
        return Err(Error::TooSparse("common points are collinear in label space".into()));
    }
    let b1 = diff(w1, w0);
    let b2 = diff(w2, w0);
    // A = [b1 b2] [a1 a2]^{-1}
    let num = [
        [b1.0 * a2.1 - b2.0 * a1.1, -b1.0 * a2.0 + b2.0 * a1.0],
        [b1.1 * a2.1 - b2.1 * a1.1, -b1.1 * a2.0 + b2.1 * a1.0],
    ];
    if num.iter().flatten().any(|v| v % d != 0) {
        return Err(Error::Inconsistent("no integer affine map relates the labellings".into()));
    }
    let a = [[num[0][0] / d, num[0][1] / d], [num[1][0] / d, num[1][1] / d]];
    let lin = ChartTransition { a_matrix: a, kappa: (0, 0) };
    if lin.det() != 1 {
        return Err(Error::Inconsistent(format!("transition matrix has determinant {}", lin.det())));
    }
    let au0 = lin.apply(u0);
    let t = ChartTransition { a_matrix: a, kappa: (w0.0 - au0.0, w0.1 - au0.1) };
    if let Some((u, w)) = common.iter().find(|(u, w)| t.apply(*u) != *w) {
        return Err(Error::Inconsistent(format!("label {u:?} maps to {:?}, expected {w:?}", t.apply(*u))));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub region: Domain,
    pub labels: Labelling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub pair: (usize, usize),
    #[serde(rename = "A")]
    pub a: [[i64; 2]; 2],
    pub kappa: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalLabelling {
    pub k: u32,
    pub charts: Vec<ChartRecord>,
    /// lab_j = A lab_i + kappa for every overlapping pair (i, j), i < j.
    pub transitions: Vec<TransitionRecord>,
    /// Chart-0 coordinates for every labelled point.
    pub global: Labelling,
    /// (x, y, u, v) with (u, v) = hbar * global label: samples of Phi up to the unknown shift nu.
    pub phi_samples: Vec<[f64; 4]>,
    pub nu_freedom: String,
}

/// Fixes chart 0 and propagates its labelling along chains of overlaps.
pub fn glue_global(cloud: &PointCloud, charts: &[(Domain, Labelling)]) -> Result<GlobalLabelling> {
    let n = charts.len();
    if n == 0 {
        return Err(Error::InvalidInput("no charts to glue".into()));
    }
    let mut edges: BTreeMap<(usize, usize), ChartTransition> = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let common: Vec<_> = charts[i]
                .1
                .assignment
                .iter()
                .filter_map(|(p, &l1)| charts[j].1.get(*p).map(|l2| (l1, l2)))
                .collect();
            match fit_transition(&common) {
                Ok(t) => {
                    edges.insert((i, j), t);
                }
                Err(Error::TooSparse(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let mut to_global: Vec<Option<ChartTransition>> = vec![None; n];
    to_global[0] = Some(ChartTransition::identity());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let gi = to_global[i].unwrap();
        for (&(a, b), t) in &edges {
            let (j, gj) = if a == i {
                (b, gi.compose(&t.inverse()))
            } else if b == i {
                (a, gi.compose(t))
            } else {
                continue;
            };
            if to_global[j].is_none() {
                to_global[j] = Some(gj);
                queue.push_back(j);
            }
        }
    }
    let unreached = to_global.iter().filter(|g| g.is_none()).count();
    if unreached > 0 {
        return Err(Error::Inconsistent(format!("{unreached} chart(s) share no overlap with the others")));
    }
    let to_global: Vec<ChartTransition> = to_global.into_iter().map(Option::unwrap).collect();

    if !simply_connected(n, charts, &edges) {
        return Err(Error::NonSimplyConnected);
    }
    for (&(i, j), t) in &edges {
        if to_global[j].compose(t) != to_global[i] {
            return Err(Error::CocycleViolation(vec![i, j]));
        }
    }
    for (&(i, j), tij) in &edges {
        for l in j + 1..n {
            if let (Some(tjl), Some(til)) = (edges.get(&(j, l)), edges.get(&(i, l))) {
                if tjl.compose(tij) != *til {
                    return Err(Error::CocycleViolation(vec![i, j, l]));
                }
            }
        }
    }

    let mut global = Labelling::new(LabellingKind::Regular);
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (c, (_, lab)) in charts.iter().enumerate() {
        for (&p, &l) in &lab.assignment {
            let g = to_global[c].apply(l);
            match global.assignment.get(&p) {
                Some(&prev) if prev != g => return Err(Error::CocycleViolation(vec![owner[&p], c])),
                Some(_) => {}
                None => {
                    global.assignment.insert(p, g);
                    owner.insert(p, c);
                }
            }
        }
    }
    global.inverse()?;
    if charts.iter().all(|(_, l)| l.kind == LabellingKind::HalfLattice) {
        global.kind = LabellingKind::HalfLattice;
    }
    let hbar = cloud.hbar();
    let phi_samples = global
        .assignment
        .iter()
        .map(|(&p, &(j, l))| {
            let (x, y) = cloud.points[p];
            [x, y, hbar * j as f64, hbar * l as f64]
        })
        .collect();
    Ok(GlobalLabelling {
        k: cloud.k,
        charts: charts.iter().map(|(d, l)| ChartRecord { region: d.clone(), labels: l.clone() }).collect(),
        transitions: edges
            .iter()
            .map(|(&pair, t)| TransitionRecord { pair, a: t.a_matrix, kappa: t.kappa })
            .collect(),
        global,
        phi_samples,
        nu_freedom: "the global integer translation nu_hbar is not determined".into(),
    })
}

/// Runs `glue_global` for every member of a family, one k at a time.
pub fn glue_global_family(
    family: &[(PointCloud, Vec<(Domain, Labelling)>)],
) -> Result<Vec<GlobalLabelling>> {
    family.par_iter().map(|(cloud, charts)| glue_global(cloud, charts)).collect()
}

// Every cycle of the overlap graph must bound a union of triple overlaps.
fn simply_connected(
    n: usize,
    charts: &[(Domain, Labelling)],
    edges: &BTreeMap<(usize, usize), ChartTransition>,
) -> bool {
    let cycle_rank = edges.len() + 1 - n;
    if cycle_rank == 0 {
        return true;
    }
    let edge_index: HashMap<(usize, usize), usize> = edges.keys().enumerate().map(|(e, &p)| (p, e)).collect();
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for &(i, j) in edges.keys() {
        for l in j + 1..n {
            let (Some(&e1), Some(&e2), Some(&e3)) =
                (edge_index.get(&(i, j)), edge_index.get(&(j, l)), edge_index.get(&(i, l)))
            else {
                continue;
            };
            let shared = charts[i]
                .1
                .assignment
                .keys()
                .any(|p| charts[j].1.assignment.contains_key(p) && charts[l].1.assignment.contains_key(p));
            if shared {
                let mut row = vec![false; edges.len()];
                row[e1] = true;
                row[e2] = true;
                row[e3] = true;
                rows.push(row);
            }
        }
    }
    gf2_rank(rows) >= cycle_rank
}

fn gf2_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
        rows.swap(rank, pivot);
        let pr = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] {
                for (x, &y) in row.iter_mut().zip(&pr) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Region;

    fn square_cloud(n: i64) -> (PointCloud, Labelling) {
        let mut pts = Vec::new();
        let mut lab = Labelling::new(LabellingKind::Regular);
        for i in 0..n {
            for j in 0..n {
                lab.assignment.insert(pts.len(), (i, j));
                pts.push((i as f64 / 10.0, j as f64 / 10.0));
            }
        }
        (PointCloud::new(10, pts), lab)
    }

    #[test]
    fn identity_and_constructed_transitions() {
        let (cloud, lab) = square_cloud(5);
        let all: Domain = Region::All.into();
        assert_eq!(transition(&cloud, &lab, &lab, &all).unwrap(), ChartTransition::identity());
        let t = ChartTransition::new([[1, 0], [1, 1]], (3, -1)).unwrap();
        assert_eq!(transition(&cloud, &lab, &lab.transformed(&t), &all).unwrap(), t);
    }

    #[test]
    fn non_integer_transition_is_inconsistent() {
        let (cloud, lab) = square_cloud(4);
        let mut bad = lab.clone();
        for l in bad.assignment.values_mut() {
            *l = (2 * l.0, l.1);
        }
        assert!(matches!(
            transition(&cloud, &lab, &bad, &Region::All.into()),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn cycle_without_triple_overlap_is_rejected() {
        // four charts around a hole, each overlapping only its two neighbours
        let (cloud, lab) = square_cloud(9);
        let pick = |f: &dyn Fn((i64, i64)) -> bool| Labelling {
            assignment: lab.assignment.iter().filter(|(_, &l)| f(l)).map(|(&p, &l)| (p, l)).collect(),
            kind: LabellingKind::Regular,
        };
        let charts = vec![
            (Region::All.into(), pick(&|l| l.1 <= 2)),
            (Region::All.into(), pick(&|l| l.0 >= 6)),
            (Region::All.into(), pick(&|l| l.1 >= 6)),
            (Region::All.into(), pick(&|l| l.0 <= 2)),
        ];
        assert!(matches!(glue_global(&cloud, &charts), Err(Error::NonSimplyConnected)));
        let single = vec![(Region::All.into(), lab.clone())];
        let g = glue_global(&cloud, &single).unwrap();
        assert_eq!(g.global, lab);
    }
}
