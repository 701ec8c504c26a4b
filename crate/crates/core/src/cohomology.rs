//! Truncated cocycle and coboundary systems, cohomology dimensions and representatives.
//!
//! Unknowns are the legal coefficients whose indices are all at most the cutoff `N`.
//! An equation (one evaluation of the next differential) is imposed only when every
//! coefficient it references lies in the window. Dimensions and representatives are
//! read off after projecting cocycles and coboundaries onto the interior keys, those
//! with every index at most `N - margin`.

use std::collections::{BTreeMap, HashMap};

use log::warn;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::GradedLieAlgebra;
use crate::cochain::{differential, differential_terms, index_tuples, legal_keys, nr_bracket, HomogeneousCochain, Key};
use crate::error::{Error, Result};
use crate::exactla::{self, normalize, Echelon, SparseMatrix, SparseVec};
use crate::rational::{frac, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub cutoff: u32,
    pub stability_delta: u32,
    pub margin: u32,
}

impl Default for TruncationWindow {
    fn default() -> Self {
        Self { cutoff: 60, stability_delta: 5, margin: 5 }
    }
}

impl TruncationWindow {
    pub fn new(cutoff: u32, stability_delta: u32, margin: u32) -> Result<Self> {
        if cutoff <= margin + 3 {
            return Err(Error::Config(format!("cutoff {cutoff} must exceed margin {margin} + 3")));
        }
        if stability_delta == 0 {
            return Err(Error::Config("stability delta must be at least 1".into()));
        }
        Ok(Self { cutoff, stability_delta, margin })
    }

    pub fn with_cutoff(cutoff: u32) -> Result<Self> {
        let d = Self::default();
        Self::new(cutoff, d.stability_delta, d.margin)
    }

    /// Largest index trusted in results.
    pub fn interior(&self) -> u32 {
        self.cutoff - self.margin
    }

    /// Same window, cutoff raised by `extra`.
    pub fn widened(&self, extra: u32) -> Self {
        Self { cutoff: self.cutoff + extra, ..*self }
    }
}

/// The truncated cocycle equations for degree-`p`, weight-`l` cochains.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub degree: usize,
    pub weight: i64,
    pub cutoff: u32,
    /// Unknowns in ascending key order; column `c` is `keys[c]`.
    pub keys: Vec<Key>,
    /// Rows are equations, tagged by the evaluated tuple.
    pub equations: SparseMatrix,
    pub tuples: Vec<Key>,
    index: HashMap<Key, usize>,
}

impl LinearSystem {
    pub fn column(&self, key: &Key) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn to_cochain(&self, v: &[(usize, Rational)]) -> HomogeneousCochain {
        let mut c = HomogeneousCochain::zero(self.degree, self.weight).expect("valid degree");
        for (col, x) in v {
            c.set(self.keys[*col], x.clone()).expect("window keys are legal");
        }
        c
    }

    pub fn to_vector(&self, c: &HomogeneousCochain) -> SparseVec {
        normalize(c.iter().filter_map(|(k, x)| self.column(k).map(|col| (col, x.clone()))).collect())
    }

    fn interior_columns(&self, interior: u32) -> Vec<Option<usize>> {
        let mut next = 0;
        self.keys
            .iter()
            .map(|k| {
                (k.largest() <= interior).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }
}

/// Builds the cocycle system of degree `p` (1 or 2) and weight `l` at cutoff `n`.
pub fn cocycle_system(alg: &GradedLieAlgebra, p: usize, l: i64, n: u32) -> Result<LinearSystem> {
    if !(1..=2).contains(&p) {
        return Err(Error::Unsupported(format!("cocycle systems in degree {p}")));
    }
    let keys = legal_keys(p, l, n);
    let index: HashMap<Key, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut equations = SparseMatrix::with_cols(keys.len());
    let mut tuples = Vec::new();
    for tuple in index_tuples(p + 1, n) {
        let terms = differential_terms(alg, p, l, tuple.as_slice());
        if terms.is_empty() {
            continue;
        }
        let row: Option<Vec<(usize, Rational)>> = terms.into_iter().map(|(k, c)| index.get(&k).map(|&col| (col, c))).collect();
        if let Some(row) = row {
            equations.push_row(row)?;
            tuples.push(tuple);
        }
    }
    Ok(LinearSystem { degree: p, weight: l, cutoff: n, keys, equations, tuples, index })
}

/// Images under `d` of every degree-`(p-1)` basis cochain, in window coordinates. The
/// preimage keys are exactly those referenced by some window key, so they reach past `N`.
fn coboundary_generators(alg: &GradedLieAlgebra, sys: &LinearSystem) -> Vec<(Key, SparseVec)> {
    let mut by_preimage: BTreeMap<Key, Vec<(usize, Rational)>> = BTreeMap::new();
    for (col, key) in sys.keys.iter().enumerate() {
        for (pk, coef) in differential_terms(alg, sys.degree - 1, sys.weight, key.as_slice()) {
            by_preimage.entry(pk).or_default().push((col, coef));
        }
    }
    by_preimage
        .into_iter()
        .map(|(k, v)| (k, normalize(v)))
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

pub fn cocycle_basis(alg: &GradedLieAlgebra, p: usize, l: i64, window: &TruncationWindow) -> Result<Vec<HomogeneousCochain>> {
    let sys = cocycle_system(alg, p, l, window.cutoff)?;
    Ok(exactla::kernel_basis(&sys.equations).iter().map(|v| sys.to_cochain(v)).collect())
}

pub fn coboundary_basis(alg: &GradedLieAlgebra, p: usize, l: i64, window: &TruncationWindow) -> Result<Vec<HomogeneousCochain>> {
    let sys = cocycle_system(alg, p, l, window.cutoff)?;
    let mut ech = Echelon::default();
    for (_, v) in coboundary_generators(alg, &sys) {
        ech.insert(v);
    }
    Ok(ech.into_rows().iter().map(|v| sys.to_cochain(v)).collect())
}

/// Dimensions and interior representatives at a single cutoff.
#[derive(Clone, Debug)]
struct Analysis {
    dim_z: usize,
    dim_b: usize,
    representatives: Vec<HomogeneousCochain>,
}

fn project(v: &[(usize, Rational)], map: &[Option<usize>]) -> SparseVec {
    v.iter().filter_map(|(c, x)| map[*c].map(|ic| (ic, x.clone()))).collect()
}

/// Analysis of the cutoff-`cutoff` system projected onto keys with indices at most `interior`.
fn analyse(alg: &GradedLieAlgebra, p: usize, l: i64, cutoff: u32, interior: u32) -> Result<Analysis> {
    let sys = cocycle_system(alg, p, l, cutoff)?;
    let map = sys.interior_columns(interior);
    let interior_keys: Vec<Key> = sys.keys.iter().copied().filter(|k| k.largest() <= interior).collect();

    let mut ech = Echelon::default();
    for (_, v) in coboundary_generators(alg, &sys) {
        ech.insert(project(&v, &map));
    }
    let dim_b = ech.rank();
    let mut rep_pivots = Vec::new();
    for z in exactla::kernel_basis(&sys.equations) {
        if let Some(c) = ech.insert(project(&z, &map)) {
            rep_pivots.push(c);
        }
    }
    let dim_z = ech.rank();
    ech.make_reduced();
    let mut representatives = Vec::with_capacity(rep_pivots.len());
    for c in rep_pivots {
        let row = ech.pivot_row(c).expect("pivot recorded");
        let mut rep = HomogeneousCochain::zero(p, l)?;
        for (ic, x) in row {
            rep.set(interior_keys[*ic], x.clone())?;
        }
        representatives.push(rep);
    }
    representatives.sort_by_key(|r| r.leading_key());
    Ok(Analysis { dim_z, dim_b, representatives })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub algebra: String,
    pub degree: usize,
    pub weight: i64,
    pub window: TruncationWindow,
    /// Cutoff the reported numbers come from; larger than `window.cutoff` after a retry.
    pub cutoff_used: u32,
    pub dim_z: usize,
    pub dim_b: usize,
    pub dim_h: usize,
    pub representatives: Vec<HomogeneousCochain>,
    pub stable: bool,
    pub retried: bool,
}

fn agree(a: &Analysis, b: &Analysis) -> bool {
    a.dim_z - a.dim_b == b.dim_z - b.dim_b && a.representatives == b.representatives
}

/// `H^p_l` at cutoffs `N` and `N + Δ`, both read on the interior of `N`; when they
/// disagree the comparison is repeated between `N + Δ` and `N + 2Δ`.
pub fn cohomology(alg: &GradedLieAlgebra, p: usize, l: i64, window: &TruncationWindow) -> Result<CohomologyReport> {
    let (n, d) = (window.cutoff, window.stability_delta);
    let interior = window.interior();
    let (low, high) = rayon::join(|| analyse(alg, p, l, n, interior), || analyse(alg, p, l, n + d, interior));
    let (low, high) = (low?, high?);
    let report = |a: Analysis, cutoff_used, stable, retried| CohomologyReport {
        algebra: alg.name().to_string(),
        degree: p,
        weight: l,
        window: *window,
        cutoff_used,
        dim_z: a.dim_z,
        dim_b: a.dim_b,
        dim_h: a.dim_z - a.dim_b,
        representatives: a.representatives,
        stable,
        retried,
    };
    if agree(&low, &high) {
        return Ok(report(low, n, true, false));
    }
    warn!("{} H^{p}_{l}: cutoffs {n} and {} disagree, retrying at {}", alg.name(), n + d, n + 2 * d);
    let (high, wider) = rayon::join(
        || analyse(alg, p, l, n + d, interior + d),
        || analyse(alg, p, l, n + 2 * d, interior + d),
    );
    let (high, wider) = (high?, wider?);
    let stable = agree(&high, &wider);
    if !stable {
        warn!("{} H^{p}_{l}: unstable up to cutoff {}", alg.name(), n + 2 * d);
    }
    Ok(report(high, n + d, stable, true))
}

/// Whether every target lies in `span(generators) + B` after projection to the interior.
pub fn spans_classes(
    alg: &GradedLieAlgebra,
    p: usize,
    l: i64,
    window: &TruncationWindow,
    generators: &[HomogeneousCochain],
    targets: &[HomogeneousCochain],
) -> Result<bool> {
    let sys = cocycle_system(alg, p, l, window.cutoff)?;
    let map = sys.interior_columns(window.interior());
    let mut ech = Echelon::default();
    for (_, v) in coboundary_generators(alg, &sys) {
        ech.insert(project(&v, &map));
    }
    for g in generators {
        ech.insert(project(&sys.to_vector(g), &map));
    }
    Ok(targets.iter().all(|t| ech.contains(project(&sys.to_vector(t), &map))))
}

/// Equations of `sys` that `c` violates, as `(tuple, value)`.
pub fn cocycle_violations(sys: &LinearSystem, c: &HomogeneousCochain) -> Vec<(Key, Rational)> {
    (0..sys.equations.rows())
        .filter_map(|r| {
            let v = sys
                .equations
                .row(r)
                .iter()
                .fold(Rational::zero(), |acc, (col, coef)| acc + coef * c.get(&sys.keys[*col]));
            (!v.is_zero()).then(|| (sys.tuples[r], v))
        })
        .collect()
}

fn check_cocycle(alg: &GradedLieAlgebra, c: &HomogeneousCochain, cutoff: u32) -> Result<()> {
    let sys = cocycle_system(alg, c.degree(), c.weight(), cutoff)?;
    if let Some((tuple, v)) = cocycle_violations(&sys, c).into_iter().next() {
        return Err(Error::NotACocycle(format!("d({}-cochain) at {tuple:?} is {v}", c.degree())));
    }
    Ok(())
}

/// Preimage `x` with `d x = c` on the interior, free coefficients of lowest index zero;
/// `None` when `c` is not a coboundary there.
pub fn is_coboundary(alg: &GradedLieAlgebra, c: &HomogeneousCochain, window: &TruncationWindow) -> Result<Option<HomogeneousCochain>> {
    let p = c.degree();
    if !(1..=2).contains(&p) {
        return Err(Error::Unsupported(format!("coboundary test in degree {p}")));
    }
    check_cocycle(alg, c, window.cutoff)?;
    let l = c.weight();
    let rows = legal_keys(p, l, window.interior());
    let expansions: Vec<Vec<(Key, Rational)>> = rows.iter().map(|k| differential_terms(alg, p - 1, l, k.as_slice())).collect();
    let mut preimage_keys: Vec<Key> = expansions.iter().flatten().map(|(k, _)| *k).collect();
    preimage_keys.sort();
    preimage_keys.dedup();
    preimage_keys.reverse();
    let col: HashMap<Key, usize> = preimage_keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut m = SparseMatrix::with_cols(preimage_keys.len());
    for e in &expansions {
        m.push_row(e.iter().map(|(k, x)| (col[k], x.clone())).collect())?;
    }
    let rhs: Vec<Rational> = rows.iter().map(|k| c.get(k)).collect();
    let Some(x) = exactla::solve(&m, &rhs)? else { return Ok(None) };
    let mut out = HomogeneousCochain::zero(p - 1, l)?;
    for (i, v) in x {
        out.set(preimage_keys[i], v)?;
    }
    Ok(Some(out))
}

/// The `m`-family in weight `l`: `a_{m,k} = 1` for every legal `k > m`, columns above `m`
/// zero, lower columns solved from the window equations with the lowest free
/// coefficients zero. The 1-column is left at zero whenever that is consistent.
pub fn family(alg: &GradedLieAlgebra, m: u32, l: i64, window: &TruncationWindow) -> Result<HomogeneousCochain> {
    if m < 2 {
        return Err(Error::Usage(format!("families start at column 2, got {m}")));
    }
    let sys = cocycle_system(alg, 2, l, window.cutoff)?;
    let fixed = |k: &Key| k.smallest() == m;
    for lowest_column in [2, 1] {
        let mut unknowns: Vec<usize> = (0..sys.keys.len())
            .filter(|&c| (lowest_column..m).contains(&sys.keys[c].smallest()))
            .collect();
        unknowns.reverse();
        let col: HashMap<usize, usize> = unknowns.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut mat = SparseMatrix::with_cols(unknowns.len());
        let mut rhs = Vec::with_capacity(sys.equations.rows());
        for r in 0..sys.equations.rows() {
            let mut row = Vec::new();
            let mut b = Rational::zero();
            for (c, coef) in sys.equations.row(r) {
                if let Some(&u) = col.get(c) {
                    row.push((u, coef.clone()));
                } else if fixed(&sys.keys[*c]) {
                    b -= coef;
                }
            }
            mat.push_row(row)?;
            rhs.push(b);
        }
        if let Some(x) = exactla::solve(&mat, &rhs)? {
            let mut out = HomogeneousCochain::zero(2, l)?;
            for key in sys.keys.iter().filter(|k| fixed(k)) {
                out.set(*key, Rational::one())?;
            }
            for (u, v) in x {
                out.set(sys.keys[unknowns[u]], v)?;
            }
            return Ok(out);
        }
    }
    Err(Error::NotACocycle(format!("the {m}-family is not a cocycle in weight {l}")))
}

/// The canonical `H^1_l(m_2)` representatives: `ω` (l = 0), `α` (l = 2), `γ_l` (l ≥ 3),
/// with coefficients up to `cutoff`.
pub fn h1_generator(l: i64, cutoff: u32) -> Option<HomogeneousCochain> {
    let value: Box<dyn Fn(u32) -> Rational> = match l {
        0 => Box::new(|k| int(i64::from(k))),
        2 => Box::new(|k| if k == 1 { int(0) } else { int(1) }),
        l if l >= 3 => Box::new(|k| match k {
            1 => frac(-1, 2),
            2 => frac(1, 2),
            _ => int(1),
        }),
        _ => return None,
    };
    let entries: Vec<(Vec<u32>, Rational)> = (1..=cutoff).map(|k| (vec![k], value(k))).filter(|(_, v)| !v.is_zero()).collect();
    Some(HomogeneousCochain::from_entries(1, l, entries).expect("legal generator keys"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Bracket {
    pub weight: i64,
    /// `[g1, g2] = multiple * g + coboundary * [e_weight, -]` on the interior.
    #[serde(with = "crate::rational::serde_str")]
    pub multiple: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub coboundary: Rational,
    pub cochain: HomogeneousCochain,
}

/// Bracket of the canonical generators in weights `l1` and `l2`, decomposed along the
/// generator of weight `l1 + l2` and the coboundary `[e_{l1+l2}, -]`.
pub fn h1_bracket(alg: &GradedLieAlgebra, l1: i64, l2: i64, window: &TruncationWindow) -> Result<H1Bracket> {
    let span = 2 * window.cutoff + (l1.abs() + l2.abs()) as u32;
    let missing = |l: i64| Error::Usage(format!("no H^1 generator in weight {l}"));
    let g1 = h1_generator(l1, span).ok_or_else(|| missing(l1))?;
    let g2 = h1_generator(l2, span).ok_or_else(|| missing(l2))?;
    let weight = l1 + l2;
    let interior = window.interior();
    let cochain = nr_bracket(&g1, &g2)?.restricted(interior);
    let target = h1_generator(weight, span);
    let mut e = HomogeneousCochain::zero(0, weight)?;
    if weight >= 1 {
        e.set(Key::EMPTY, int(1))?;
    }
    let edge = differential(alg, &e, interior)?;
    let rows = legal_keys(1, weight, interior);
    let mut m = SparseMatrix::with_cols(2);
    for k in &rows {
        let g = target.as_ref().map(|t| t.get(k)).unwrap_or_else(Rational::zero);
        m.push_row(vec![(0, g), (1, edge.get(k))])?;
    }
    let rhs: Vec<Rational> = rows.iter().map(|k| cochain.get(k)).collect();
    let x = exactla::solve(&m, &rhs)?
        .ok_or_else(|| Error::Usage(format!("[{l1}, {l2}] leaves the span of the generator and [e_{weight}, -]")))?;
    let dense = exactla::to_dense(&x, 2);
    Ok(H1Bracket { weight, multiple: dense[0].clone(), coboundary: dense[1].clone(), cochain })
}

/// Weight-`l` 2-cocycles and 2-coboundaries with vanishing 1-column, compared on the interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeFixedReport {
    pub weight: i64,
    pub cutoff: u32,
    pub cocycle_dim: usize,
    pub coboundary_dim: usize,
    pub joint_dim: usize,
    pub cocycles: Vec<HomogeneousCochain>,
}

impl GaugeFixedReport {
    pub fn kernel_is_image(&self) -> bool {
        self.cocycle_dim == self.joint_dim && self.coboundary_dim == self.joint_dim
    }
}

pub fn gauge_fixed_cocycles(alg: &GradedLieAlgebra, l: i64, window: &TruncationWindow) -> Result<GaugeFixedReport> {
    let sys = cocycle_system(alg, 2, l, window.cutoff)?;
    let interior = window.interior();
    let map = sys.interior_columns(interior);
    let interior_keys: Vec<Key> = sys.keys.iter().copied().filter(|k| k.largest() <= interior).collect();
    let in_gauge: Vec<usize> = (0..sys.keys.len()).filter(|&c| sys.keys[c].smallest() >= 2).collect();
    let local: HashMap<usize, usize> = in_gauge.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut restricted = SparseMatrix::with_cols(in_gauge.len());
    for r in 0..sys.equations.rows() {
        restricted.push_row(sys.equations.row(r).iter().filter_map(|(c, x)| local.get(c).map(|&u| (u, x.clone()))).collect())?;
    }
    let mut zs = Echelon::default();
    for v in exactla::kernel_basis(&restricted) {
        let full: SparseVec = v.into_iter().map(|(u, x)| (in_gauge[u], x)).collect();
        zs.insert(project(&full, &map));
    }

    // coboundaries with vanishing 1-column: echelon with 1-column coordinates first
    let ones = sys.keys.iter().filter(|k| k.smallest() == 1).count();
    let mut order = vec![0usize; sys.keys.len()];
    let (mut a, mut b) = (0, ones);
    for (c, k) in sys.keys.iter().enumerate() {
        if k.smallest() == 1 {
            order[c] = a;
            a += 1;
        } else {
            order[c] = b;
            b += 1;
        }
    }
    let mut gens = Echelon::default();
    for (_, v) in coboundary_generators(alg, &sys) {
        gens.insert(normalize(v.into_iter().map(|(c, x)| (order[c], x)).collect()));
    }
    let mut inverse = vec![0usize; sys.keys.len()];
    for (c, &o) in order.iter().enumerate() {
        inverse[o] = c;
    }
    let mut bs = Echelon::default();
    for row in gens.into_rows().into_iter().filter(|r| r[0].0 >= ones) {
        let full = normalize(row.into_iter().map(|(o, x)| (inverse[o], x)).collect());
        bs.insert(project(&full, &map));
    }

    let mut joint = bs.clone();
    let z_rows = zs.into_rows();
    for r in &z_rows {
        joint.insert(r.clone());
    }
    let cocycles = z_rows
        .iter()
        .map(|r| {
            let mut c = HomogeneousCochain::zero(2, l)?;
            for (ic, x) in r {
                c.set(interior_keys[*ic], x.clone())?;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GaugeFixedReport {
        weight: l,
        cutoff: window.cutoff,
        cocycle_dim: cocycles.len(),
        coboundary_dim: bs.rank(),
        joint_dim: joint.rank(),
        cocycles,
    })
}
