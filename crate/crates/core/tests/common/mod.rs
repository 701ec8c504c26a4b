//! Brute-force oracles shared by the integration tests.
//!
//! Everything here is written from the defining formulas with dense matrices, without
//! going through the library's equation assembly.

#![allow(dead_code)]

use filiform::algebra::GradedLieAlgebra;
use filiform::cochain::HomogeneousCochain;
use filiform::rational::Rational;
use num_traits::Zero;

pub fn presets() -> Vec<GradedLieAlgebra> {
    vec![GradedLieAlgebra::m0(), GradedLieAlgebra::m2(), GradedLieAlgebra::l1()]
}

/// `c(x, t)` with `c = 0` whenever the target index `t` is not a basis index.
pub fn c(alg: &GradedLieAlgebra, x: i64, t: i64) -> Rational {
    if x < 1 || t < 1 {
        Rational::zero()
    } else {
        alg.bracket_coeff(x as u32, t as u32)
    }
}

/// Coefficient of a cochain on an arbitrary tuple; `None` if an index leaves `1..=cutoff`.
pub fn coef(w: &HomogeneousCochain, idx: &[i64], cutoff: u32) -> Option<Rational> {
    if idx.iter().any(|&i| i < 1) {
        return Some(Rational::zero());
    }
    if idx.iter().any(|&i| i > i64::from(cutoff)) {
        return None;
    }
    let v: Vec<u32> = idx.iter().map(|&i| i as u32).collect();
    Some(w.value(&v))
}

/// Textbook Chevalley-Eilenberg differential of the adjoint module, on one tuple:
///
/// ```text
/// (d x)(a)       = [a, x]
/// (d w)(a, b)    = [a, w(b)] - [b, w(a)] - w([a, b])
/// (d w)(a, b, z) = [a, w(b,z)] - [b, w(a,z)] + [z, w(a,b)] - w([a,b],z) + w([a,z],b) - w([b,z],a)
/// ```
///
/// The value is the coefficient of `e_{sum + l}`. `None` if it needs a coefficient of
/// `w` on an index above `cutoff`.
pub fn textbook_d(alg: &GradedLieAlgebra, w: &HomogeneousCochain, t: &[i64], cutoff: u32) -> Option<Rational> {
    let l = w.weight();
    // a term with a vanishing structure constant never looks at `w`
    let term = |m: Rational, idx: &[i64]| -> Option<Rational> {
        if m.is_zero() {
            Some(m)
        } else {
            Some(m * coef(w, idx, cutoff)?)
        }
    };
    let br = |x: i64, y: i64| c(alg, x, y);
    Some(match *t {
        [a] => term(br(a, l), &[])?,
        [a, b] => term(br(a, b + l), &[b])? - term(br(b, a + l), &[a])? - term(br(a, b), &[a + b])?,
        [a, b, z] => {
            term(br(a, b + z + l), &[b, z])? - term(br(b, a + z + l), &[a, z])? + term(br(z, a + b + l), &[a, b])?
                - term(br(a, b), &[a + b, z])?
                + term(br(a, z), &[a + z, b])?
                - term(br(b, z), &[b + z, a])?
        }
        _ => panic!("tuple of length {}", t.len()),
    })
}

/// Rank of a dense rational matrix by plain Gaussian elimination.
pub fn dense_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col].clone() / &pivot_row[col];
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Kernel basis of a dense matrix with `cols` columns.
pub fn dense_kernel(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for x in a[rank].iter_mut() {
            *x /= &pivot;
        }
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::from_integer(1.into());
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}
