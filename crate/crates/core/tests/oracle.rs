mod common;

use common::{dense_kernel, dense_rank, presets, textbook_d};
use filiform::algebra::GradedLieAlgebra;
use filiform::cochain::{differential, index_tuples, legal_keys, HomogeneousCochain, Key};
use filiform::cohomology::{cohomology, TruncationWindow};
use filiform::rational::{int, Rational};
use num_traits::Zero;
use proptest::prelude::*;

const FAR: u32 = 10_000;

fn basis(degree: usize, weight: i64, key: Key) -> HomogeneousCochain {
    HomogeneousCochain::from_entries(degree, weight, [(key.as_slice().to_vec(), int(1))]).unwrap()
}

fn tuple(k: &Key) -> Vec<i64> {
    k.as_slice().iter().map(|&i| i64::from(i)).collect()
}

/// `(dim_Z, dim_B)` of the cutoff-`n` window read on keys with indices at most `interior`.
fn oracle_dims(alg: &GradedLieAlgebra, p: usize, l: i64, n: u32, interior: u32) -> (usize, usize) {
    let keys = legal_keys(p, l, n);
    let inner: Vec<usize> = (0..keys.len()).filter(|&c| keys[c].largest() <= interior).collect();
    let project = |v: &[Rational]| inner.iter().map(|&c| v[c].clone()).collect::<Vec<_>>();

    let columns: Vec<HomogeneousCochain> = keys.iter().map(|k| basis(p, l, *k)).collect();
    let mut equations = Vec::new();
    for t in index_tuples(p + 1, n) {
        let row: Option<Vec<Rational>> = columns.iter().map(|w| textbook_d(alg, w, &tuple(&t), n)).collect();
        if let Some(row) = row {
            if row.iter().any(|x| !x.is_zero()) {
                equations.push(row);
            }
        }
    }
    let z = dense_kernel(&equations, keys.len());

    let reach = 2 * n + l.unsigned_abs() as u32 + 2;
    let preimages = if p == 1 { legal_keys(0, l, reach) } else { legal_keys(1, l, reach) };
    let b: Vec<Vec<Rational>> = preimages
        .iter()
        .map(|k| {
            let beta = basis(p - 1, l, *k);
            keys.iter().map(|key| textbook_d(alg, &beta, &tuple(key), FAR).unwrap()).collect::<Vec<_>>()
        })
        .map(|v| project(&v))
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    let dim_b = dense_rank(b.clone());
    let mut both = b;
    both.extend(z.iter().map(|v| project(v)));
    (dense_rank(both), dim_b)
}

#[test]
fn dimensions_match_dense_oracle() {
    let window = TruncationWindow::new(13, 3, 4).unwrap();
    for alg in presets() {
        for p in 1..=2 {
            for l in -5..=5 {
                let r = cohomology(&alg, p, l, &window).unwrap();
                let interior = r.cutoff_used - window.margin;
                let (dim_z, dim_b) = oracle_dims(&alg, p, l, r.cutoff_used, interior);
                assert_eq!((r.dim_z, r.dim_b), (dim_z, dim_b), "{} H^{p}_{l}", alg.name());
                assert_eq!(r.dim_h, dim_z - dim_b);
            }
        }
    }
}

#[test]
fn small_window_m2_tables() {
    // dims of the first and second cohomology of m2 read off a small window
    let window = TruncationWindow::new(16, 3, 4).unwrap();
    let alg = GradedLieAlgebra::m2();
    let h1: Vec<usize> = (-4..=4).map(|l| cohomology(&alg, 1, l, &window).unwrap().dim_h).collect();
    let h2: Vec<usize> = (-6..=4).map(|l| cohomology(&alg, 2, l, &window).unwrap().dim_h).collect();
    assert_eq!(h1, [0, 0, 0, 0, 1, 0, 1, 1, 1]);
    assert_eq!(h2, [0, 0, 2, 2, 2, 1, 1, 1, 2, 2, 2]);
}

fn arb_cochain(degree: usize, max_index: u32) -> impl Strategy<Value = HomogeneousCochain> {
    let entries = proptest::collection::vec((proptest::collection::vec(1..=max_index, degree), -4i64..=4), 0..10);
    (-6i64..=6, entries).prop_map(move |(weight, raw)| {
        let entries: Vec<(Vec<u32>, Rational)> = raw
            .into_iter()
            .filter_map(|(idx, v)| {
                let (_, key) = Key::canonical(&idx)?;
                (key.sum() + weight >= 1).then(|| (key.as_slice().to_vec(), int(v)))
            })
            .collect();
        HomogeneousCochain::from_entries(degree, weight, entries).unwrap()
    })
}

fn arb_algebra() -> impl Strategy<Value = GradedLieAlgebra> {
    prop_oneof![Just(GradedLieAlgebra::m0()), Just(GradedLieAlgebra::m2()), Just(GradedLieAlgebra::l1())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn differential_is_minus_textbook(alg in arb_algebra(), c0 in arb_cochain(0, 1), c1 in arb_cochain(1, 14), c2 in arb_cochain(2, 14)) {
        for c in [c0, c1, c2] {
            let n = 18;
            let d = differential(&alg, &c, n).unwrap();
            for t in index_tuples(c.degree() + 1, n) {
                let expected = -textbook_d(&alg, &c, &tuple(&t), FAR).unwrap();
                prop_assert_eq!(d.value(t.as_slice()), expected, "{:?} at {:?}", c, t);
            }
        }
    }

    #[test]
    fn textbook_square_vanishes(alg in arb_algebra(), c1 in arb_cochain(1, 12)) {
        // the oracle itself is a differential
        let l = c1.weight();
        let n = 14;
        let mut dc = HomogeneousCochain::zero(2, l).unwrap();
        for t in legal_keys(2, l, 2 * n) {
            dc.set(t, textbook_d(&alg, &c1, &tuple(&t), FAR).unwrap()).unwrap();
        }
        for t in index_tuples(3, n) {
            prop_assert!(textbook_d(&alg, &dc, &tuple(&t), 2 * n).unwrap().is_zero());
        }
    }
}
