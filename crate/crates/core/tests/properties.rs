use std::collections::BTreeSet;

use nalgebra::DMatrix;
use proptest::prelude::*;

use semitoric::eigen::{eigs_sym_tridiagonal, eigs_with, sturm_count, EigenMethod};
use semitoric::invariants::LabelledSpectrum;
use semitoric::lattice::*;
use semitoric::models::*;

fn tridiagonal() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| {
        (prop::collection::vec(-5.0..5.0f64, n), prop::collection::vec(0.05..3.0f64, n - 1))
    })
}

fn sl2z() -> impl Strategy<Value = ChartTransition> {
    let gens = [[[1, 1], [0, 1]], [[1, 0], [1, 1]], [[0, -1], [1, 0]]];
    (prop::collection::vec(0usize..3, 0..6), -40i64..40, -40i64..40).prop_map(move |(word, a, b)| {
        let mut t = ChartTransition::identity();
        for g in word {
            t = ChartTransition::new(gens[g], (0, 0)).unwrap().compose(&t);
        }
        t.kappa = (a, b);
        t
    })
}

fn grid_labelling(n: i64) -> (PointCloud, Labelling) {
    let mut pts = Vec::new();
    let mut lab = Labelling::new(LabellingKind::Regular);
    for j in 0..n {
        for l in 0..n {
            lab.assignment.insert(pts.len(), (j, l));
            pts.push((j as f64 / n as f64, l as f64 / n as f64 + 0.1 * (j as f64 / n as f64).powi(2)));
        }
    }
    (PointCloud::new(n as u32, pts), lab)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tridiagonal_solvers_agree_with_dense((d, e) in tridiagonal()) {
        let n = d.len();
        let dense = DMatrix::from_fn(n, n, |i, j| {
            if i == j { d[i] } else if i.abs_diff(j) == 1 { e[i.min(j)] } else { 0.0 }
        });
        let mut reference: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        let scale = reference.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for method in [EigenMethod::ImplicitQl, EigenMethod::Bisection] {
            let got = eigs_with(&d, &e, method, 1e-13, 60).unwrap();
            prop_assert_eq!(got.len(), n);
            for (a, b) in got.iter().zip(&reference) {
                prop_assert!((a - b).abs() <= 1e-10 * scale, "{:?}: {} vs {}", method, a, b);
            }
            // unreduced: simple eigenvalues
            prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
        }
        for (i, w) in reference.windows(2).enumerate() {
            prop_assert_eq!(sturm_count(&d, &e, 0.5 * (w[0] + w[1])), i + 1);
        }
    }

    #[test]
    fn transition_group_laws(s in sl2z(), t in sl2z(), l in (-100i64..100, -100i64..100)) {
        prop_assert_eq!(s.det(), 1);
        prop_assert_eq!(s.compose(&t).apply(l), s.apply(t.apply(l)));
        prop_assert_eq!(s.inverse().apply(s.apply(l)), l);
        prop_assert_eq!(s.compose(&s.inverse()), ChartTransition::identity());
    }

    #[test]
    fn transition_recovers_any_affine_relabelling(t in sl2z()) {
        let (cloud, lab) = grid_labelling(6);
        let moved = lab.transformed(&t);
        let all = Domain::from(Region::All);
        prop_assert_eq!(transition(&cloud, &lab, &moved, &all).unwrap(), t);
        prop_assert_eq!(transition(&cloud, &moved, &lab, &all).unwrap(), t.inverse());
    }

    #[test]
    fn shears_compose(a in -3i64..3, b in -3i64..3) {
        let (cloud, lab) = grid_labelling(5);
        let s = LabelledSpectrum::new(&cloud, &lab);
        let twice = s.sheared(a).sheared(b);
        let once = s.sheared(a + b);
        prop_assert_eq!(&twice.points, &once.points);
        prop_assert_eq!(&s.sheared(a).sheared(-a).points, &s.points);
    }
}

#[test]
fn coupled_blocks_are_exhaustive_and_disjoint() {
    let m = ModelSpec::coupled_default();
    for k in [2u32, 4, 6] {
        let s = joint_spectrum(&m, k, Window::all()).unwrap();
        let (n1, n2) = m.sphere_dims(k).unwrap();
        assert_eq!(s.len(), n1 * n2);
        let labels: BTreeSet<(i64, usize)> = s.points.iter().map(|p| (p.block_id, p.index_in_block)).collect();
        assert_eq!(labels.len(), s.len());
        for c in s.columns() {
            assert!(c.ys.windows(2).all(|w| w[0] < w[1]), "k = {k}, column {}", c.x);
        }
    }
}

#[test]
fn coupled_spectrum_independent_of_block_order() {
    let m = ModelSpec::coupled_default();
    let s = joint_spectrum(&m, 4, Window::all()).unwrap();
    let mut blocks = build_blocks(&m, 4, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
    blocks.reverse();
    let mut rebuilt: Vec<(f64, f64)> = blocks
        .iter()
        .flat_map(|b| eigs_sym_tridiagonal(&b.diag, &b.offdiag).unwrap().into_iter().map(move |y| (b.j_value, y)))
        .collect();
    let mut forward = s.xy();
    let key = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
    forward.sort_by(key);
    rebuilt.sort_by(key);
    assert_eq!(forward.len(), rebuilt.len());
    for (a, b) in forward.iter().zip(&rebuilt) {
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12, "{a:?} vs {b:?}");
    }
}

#[test]
fn column_labelling_steps_by_hbar() {
    let m = ModelSpec::coupled_default();
    let s = joint_spectrum(&m, 100, Window::new((-0.5, 0.5), (f64::NEG_INFINITY, f64::INFINITY))).unwrap();
    let l = LabelledSpectrum::from_spectrum(&s, ColumnOrigin::Bottom);
    let h = 1.0 / 100.0;
    for &(j, ll) in l.labels() {
        if let (Ok(a), Ok(b)) = (l.get((j, ll)), l.get((j + 1, ll))) {
            assert!((b.0 - a.0 - h).abs() < 1e-9);
        }
    }
}
