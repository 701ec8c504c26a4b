//! Order-by-order prolongation of infinitesimal deformations.
//!
//! The deformed bracket is `[x, y]_t = [x, y] + sum_k t^k α_k(x, y)`. At order `k` the
//! Jacobi identity asks for `d α_k = -R_k` with
//! `R_k = sum_{i < j, i + j = k} massey_term(α_i, α_j) + massey_square(α_{k/2})`.
//! Each order is a truncated linear system; only triples whose every referenced
//! coefficient lies in the window enter it.

use std::collections::{BTreeMap, HashMap};

use log::warn;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{abelian_ideal_floor, add_scaled, verify_jacobi, Bracket, Element, GradedLieAlgebra, JacobiReport};
use crate::cochain::{differential_terms, index_tuples, legal_keys, massey_term_at, HomogeneousCochain, Key};
use crate::cohomology::{cocycle_system, cocycle_violations, cohomology, family, is_coboundary, TruncationWindow};
use crate::error::{Error, Result};
use crate::exactla::{self, SparseMatrix};
use crate::rational::{self, frac, int, Rational};

/// Which solution of `d α_k = -R_k` is stored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// All coefficients available; free coefficients of lowest index are zero.
    #[default]
    Particular,
    /// Only the 2- and 3-columns may be nonzero.
    ColumnRestricted,
}

impl Gauge {
    fn admits(self, key: &Key) -> bool {
        match self {
            Gauge::Particular => true,
            Gauge::ColumnRestricted => matches!(key.smallest(), 2 | 3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeformationStatus {
    /// Corrections vanish after `last_nonzero_order` and the bracket satisfies Jacobi.
    TrueFinite { last_nonzero_order: usize },
    /// Every order up to `verified_order` was solved; nothing is claimed beyond it.
    Formal { verified_order: usize },
    Obstructed { order: usize },
}

/// `R_k` could not be compensated: the system `d α_k = -R_k` is inconsistent, which
/// is certified by the rank jump of the augmented matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub order: usize,
    pub residual: HomogeneousCochain,
    pub system_rank: usize,
    pub augmented_rank: usize,
    /// The equations on triples with every index at most this bound are already inconsistent.
    pub inconsistent_below: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationSeries {
    pub algebra: String,
    pub weight: i64,
    pub window: TruncationWindow,
    pub gauge: Gauge,
    pub max_order: usize,
    /// Orders beyond this are vacuous inside the window.
    pub effective_order: usize,
    /// `corrections[k - 1]` is `α_k`, of weight `k * weight`.
    pub corrections: Vec<HomogeneousCochain>,
    /// Per order, interior triples where `d α_k + R_k` is nonzero or not evaluable.
    pub residuals: Vec<usize>,
    pub status: DeformationStatus,
    pub obstruction: Option<Obstruction>,
    /// Prolongation stopped before `effective_order` because the window ran out.
    pub window_limited: bool,
}

impl DeformationSeries {
    pub fn is_true(&self) -> bool {
        matches!(self.status, DeformationStatus::TrueFinite { .. })
    }

    pub fn is_formal(&self) -> bool {
        matches!(self.status, DeformationStatus::Formal { .. })
    }

    pub fn correction(&self, order: usize) -> Option<&HomogeneousCochain> {
        self.corrections.get(order.checked_sub(1)?)
    }
}

/// `R_k` at one triple from `α_1..α_{k-1}`; `None` if it needs coefficients past `cutoff`.
fn residual_at(alphas: &[HomogeneousCochain], k: usize, triple: [u32; 3], cutoff: u32) -> Option<Rational> {
    let mut total = Rational::zero();
    for i in 1..=k / 2 {
        let j = k - i;
        let (a, b) = (&alphas[i - 1], &alphas[j - 1]);
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let v = massey_term_at(a, b, triple, Some(cutoff))?;
        total += if i == j { v * frac(1, 2) } else { v };
    }
    Some(total)
}

struct OrderSystem {
    unknowns: Vec<Key>,
    matrix: SparseMatrix,
    rhs: Vec<Rational>,
    triples: Vec<Key>,
}

impl OrderSystem {
    /// Smallest `t` such that the equations on triples with indices at most `t` are
    /// already inconsistent.
    fn inconsistent_below(&self) -> Result<Option<u32>> {
        let mut bounds: Vec<u32> = self.triples.iter().map(Key::largest).collect();
        bounds.sort_unstable();
        bounds.dedup();
        for t in bounds {
            let mut m = SparseMatrix::with_cols(self.matrix.cols());
            let mut b = Vec::new();
            for (r, triple) in self.triples.iter().enumerate() {
                if triple.largest() <= t {
                    m.push_row(self.matrix.row(r).to_vec())?;
                    b.push(self.rhs[r].clone());
                }
            }
            if !exactla::in_span(&m, &b)? {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }
}

fn order_system(alg: &GradedLieAlgebra, alphas: &[HomogeneousCochain], k: usize, l: i64, cutoff: u32, gauge: Gauge) -> Result<OrderSystem> {
    let weight = k as i64 * l;
    let mut unknowns: Vec<Key> = legal_keys(2, weight, cutoff).into_iter().filter(|key| gauge.admits(key)).collect();
    unknowns.reverse();
    let col: HashMap<Key, usize> = unknowns.iter().enumerate().map(|(i, key)| (*key, i)).collect();
    let mut matrix = SparseMatrix::with_cols(unknowns.len());
    let mut rhs = Vec::new();
    let mut triples = Vec::new();
    for triple in index_tuples(3, cutoff) {
        if triple.sum() + weight < 1 {
            continue;
        }
        let terms = differential_terms(alg, 2, weight, triple.as_slice());
        if terms.iter().any(|(key, _)| key.largest() > cutoff) {
            continue;
        }
        let s = triple.as_slice();
        let Some(r) = residual_at(alphas, k, [s[0], s[1], s[2]], cutoff) else { continue };
        let row: Vec<(usize, Rational)> = terms.into_iter().filter_map(|(key, c)| col.get(&key).map(|&i| (i, c))).collect();
        if row.is_empty() && r.is_zero() {
            continue;
        }
        matrix.push_row(row)?;
        rhs.push(-r);
        triples.push(triple);
    }
    Ok(OrderSystem { unknowns, matrix, rhs, triples })
}

fn residual_cochain(alphas: &[HomogeneousCochain], k: usize, l: i64, interior: u32, cutoff: u32) -> Result<HomogeneousCochain> {
    let mut out = HomogeneousCochain::zero(3, k as i64 * l)?;
    for triple in legal_keys(3, k as i64 * l, interior) {
        let s = triple.as_slice();
        if let Some(v) = residual_at(alphas, k, [s[0], s[1], s[2]], cutoff) {
            out.set(triple, v)?;
        }
    }
    Ok(out)
}

/// Interior triples where `d α_k + R_k` is nonzero or cannot be evaluated.
fn residual_count(alg: &GradedLieAlgebra, alphas: &[HomogeneousCochain], k: usize, l: i64, interior: u32, cutoff: u32) -> usize {
    let alpha = &alphas[k - 1];
    let weight = k as i64 * l;
    legal_keys(3, weight, interior)
        .into_iter()
        .filter(|triple| {
            let s = triple.as_slice();
            let Some(r) = residual_at(&alphas[..k - 1], k, [s[0], s[1], s[2]], cutoff) else { return true };
            let d = differential_terms(alg, 2, weight, s)
                .into_iter()
                .fold(Rational::zero(), |acc, (key, c)| acc + c * alpha.get(&key));
            !(d + r).is_zero()
        })
        .count()
}

fn augmented_rank(m: &SparseMatrix, rhs: &[Rational]) -> Result<usize> {
    let mut aug = SparseMatrix::with_cols(m.cols() + 1);
    for (r, b) in rhs.iter().enumerate() {
        let mut row = m.row(r).to_vec();
        row.push((m.cols(), b.clone()));
        aug.push_row(row)?;
    }
    Ok(exactla::rank(&aug))
}

fn ensure_cocycle(alg: &GradedLieAlgebra, omega: &HomogeneousCochain, cutoff: u32) -> Result<()> {
    if omega.degree() != 2 {
        return Err(Error::Usage(format!("deformations start from a 2-cocycle, got degree {}", omega.degree())));
    }
    let sys = cocycle_system(alg, 2, omega.weight(), cutoff)?;
    if let Some((tuple, v)) = cocycle_violations(&sys, omega).into_iter().next() {
        return Err(Error::NotACocycle(format!("d(omega) at {tuple:?} is {v}")));
    }
    Ok(())
}

/// Prolongs the 2-cocycle `omega` order by order up to `max_order`.
pub fn prolong(alg: &GradedLieAlgebra, omega: &HomogeneousCochain, max_order: usize, window: &TruncationWindow, gauge: Gauge) -> Result<DeformationSeries> {
    let n = window.cutoff;
    let l = omega.weight();
    ensure_cocycle(alg, omega, n)?;
    let effective_order = if l > 0 { max_order.min(((n - 3) as i64 / l) as usize) } else { max_order }.max(1);
    let mut alphas = vec![omega.restricted(n)];
    let mut residuals = vec![0];
    let mut verified = effective_order;
    for k in 2..=effective_order {
        // order k trusts one index less than order k - 1
        let Some(n) = n.checked_sub(k as u32 - 1).filter(|&n| n > window.margin + 3) else {
            verified = k - 1;
            break;
        };
        let sys = order_system(alg, &alphas, k, l, n, gauge)?;
        match exactla::solve(&sys.matrix, &sys.rhs)? {
            Some(x) => {
                let mut alpha = HomogeneousCochain::zero(2, k as i64 * l)?;
                for (i, v) in x {
                    alpha.set(sys.unknowns[i], v)?;
                }
                alphas.push(alpha);
                residuals.push(residual_count(alg, &alphas, k, l, n - window.margin, n));
            }
            None => {
                let inconsistent_below = sys.inconsistent_below()?;
                if inconsistent_below.is_none_or(|t| t > n - window.margin) {
                    warn!("order {k} of weight {l} is only inconsistent at the window edge");
                    verified = k - 1;
                    break;
                }
                let obstruction = Obstruction {
                    order: k,
                    residual: residual_cochain(&alphas, k, l, window.interior(), n)?,
                    system_rank: exactla::rank(&sys.matrix),
                    augmented_rank: augmented_rank(&sys.matrix, &sys.rhs)?,
                    inconsistent_below,
                };
                return Ok(DeformationSeries {
                    algebra: alg.name().to_string(),
                    weight: l,
                    window: *window,
                    gauge,
                    max_order,
                    effective_order,
                    corrections: alphas,
                    residuals,
                    status: DeformationStatus::Obstructed { order: k },
                    obstruction: Some(obstruction),
                    window_limited: false,
                });
            }
        }
    }
    let last = alphas.iter().rposition(|a| !a.is_zero()).map_or(0, |p| p + 1);
    let mut series = DeformationSeries {
        algebra: alg.name().to_string(),
        weight: l,
        window: *window,
        gauge,
        max_order,
        effective_order,
        corrections: alphas,
        residuals,
        status: DeformationStatus::Formal { verified_order: verified },
        obstruction: None,
        window_limited: verified < effective_order,
    };
    // orders past 2 * last only see products involving a vanishing correction
    if 2 * last <= verified {
        let deformed = DeformedAlgebra::new(alg, &series.corrections, l, &int(1), n);
        if verify_jacobi(&deformed, window.interior()).passed() {
            series.status = DeformationStatus::TrueFinite { last_nonzero_order: last };
            series.window_limited = false;
        }
    }
    Ok(series)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub weight: i64,
    /// Nonzero Massey square components `M_{ijk}`, `i < j < k` inside the interior.
    pub nonzero: Vec<([u32; 3], String)>,
    pub square_is_coboundary: bool,
}

impl ObstructionReport {
    pub fn component_is_nonzero(&self, i: u32, j: u32, k: u32) -> bool {
        self.nonzero.iter().any(|(t, _)| *t == [i, j, k])
    }
}

pub fn obstruction_report(alg: &GradedLieAlgebra, omega: &HomogeneousCochain, window: &TruncationWindow) -> Result<ObstructionReport> {
    let n = window.cutoff;
    ensure_cocycle(alg, omega, n)?;
    let alphas = [omega.restricted(n)];
    let square = residual_cochain(&alphas, 2, omega.weight(), window.interior(), n)?;
    let nonzero = square.iter().map(|(key, v)| {
        let s = key.as_slice();
        ([s[0], s[1], s[2]], rational::format(v))
    });
    let sys = order_system(alg, &alphas, 2, omega.weight(), n, Gauge::Particular)?;
    Ok(ObstructionReport {
        weight: omega.weight(),
        nonzero: nonzero.collect(),
        square_is_coboundary: exactla::in_span(&sys.matrix, &sys.rhs)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub label: String,
    pub status: DeformationStatus,
    /// Orders `k` with `α_k != 0`.
    pub nonzero_orders: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightClassification {
    pub algebra: String,
    pub weight: i64,
    pub dim_h: usize,
    pub entries: Vec<ClassEntry>,
}

fn entry(label: String, series: &DeformationSeries) -> ClassEntry {
    ClassEntry {
        label,
        status: series.status.clone(),
        nonzero_orders: series.corrections.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, _)| i + 1).collect(),
    }
}

/// Prolongs every `H^2_l` representative and every nontrivial 2-, 3- and 4-family.
pub fn classify_weight(alg: &GradedLieAlgebra, l: i64, window: &TruncationWindow, max_order: usize) -> Result<WeightClassification> {
    let report = cohomology(alg, 2, l, window)?;
    if !report.stable {
        return Err(Error::Unstable(format!("H^2_{l} of {} up to cutoff {}", alg.name(), report.cutoff_used)));
    }
    let mut entries = Vec::new();
    for (i, rep) in report.representatives.iter().enumerate() {
        // representatives live on the interior; prolong them there
        let inner = TruncationWindow::new(window.interior(), window.stability_delta, window.margin)?;
        let series = prolong(alg, rep, max_order, &inner, Gauge::Particular)?;
        entries.push(entry(format!("representative {}", i + 1), &series));
    }
    if report.dim_h > 0 {
        for m in 2..=4 {
            let Ok(f) = family(alg, m, l, window) else { continue };
            if is_coboundary(alg, &f, window)?.is_some() {
                continue;
            }
            let series = prolong(alg, &f, max_order, window, Gauge::Particular)?;
            entries.push(entry(format!("{m}-family"), &series));
        }
    }
    Ok(WeightClassification { algebra: alg.name().to_string(), weight: l, dim_h: report.dim_h, entries })
}

/// A bracket `[e_i, e_j] + sum_k t^k α_k(e_i, e_j)` known for indices up to `cutoff`.
#[derive(Clone, Debug)]
pub struct DeformedAlgebra {
    base: GradedLieAlgebra,
    terms: Vec<HomogeneousCochain>,
    cutoff: u32,
}

impl DeformedAlgebra {
    /// Uses the given corrections as they are, whatever their status; `corrections[k-1]`
    /// has weight `k * weight`.
    pub fn new(base: &GradedLieAlgebra, corrections: &[HomogeneousCochain], weight: i64, t: &Rational, cutoff: u32) -> Self {
        let mut power = Rational::one();
        let mut terms = Vec::new();
        for (i, alpha) in corrections.iter().enumerate() {
            power *= t;
            debug_assert_eq!(alpha.weight(), (i as i64 + 1) * weight);
            if !alpha.is_zero() && !power.is_zero() {
                terms.push(alpha.scaled(&power));
            }
        }
        Self { base: base.clone(), terms, cutoff }
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn verify_jacobi(&self, cutoff: u32) -> JacobiReport {
        verify_jacobi(self, cutoff.min(self.cutoff))
    }
}

impl Bracket for DeformedAlgebra {
    fn bracket(&self, i: u32, j: u32) -> Option<Element> {
        if i > self.cutoff || j > self.cutoff {
            return None;
        }
        let mut acc = BTreeMap::new();
        add_scaled(&mut acc, &self.base.bracket(i, j)?, &Rational::one());
        for alpha in &self.terms {
            let target = i64::from(i) + i64::from(j) + alpha.weight();
            if target >= 1 {
                let v = alpha.value(&[i, j]);
                if !v.is_zero() {
                    add_scaled(&mut acc, &[(target as u32, v)], &Rational::one());
                }
            }
        }
        Some(acc.into_iter().collect())
    }
}

/// The deformed algebra at parameter `t` of a series known to be finite.
pub fn deformed_algebra(alg: &GradedLieAlgebra, series: &DeformationSeries, t: &Rational, cutoff: u32) -> Result<(DeformedAlgebra, JacobiReport)> {
    if !series.is_true() {
        return Err(Error::Usage("formal deformations do not evaluate; the series is not finite".into()));
    }
    let d = DeformedAlgebra::new(alg, &series.corrections, series.weight, t, cutoff.min(series.window.cutoff));
    let report = d.verify_jacobi(cutoff);
    Ok((d, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonconvergenceWitness {
    pub cutoff: u32,
    /// Order-1 truncation at `t = 1` of the weight-0 3-family deformation of m2.
    pub deformed_floor: Option<u32>,
    pub base_floor: Option<u32>,
    pub l1_floor: Option<u32>,
    /// `[e_2, e_j]_t - [e_2, e_j]` and `[e_3, e_j]_t` over `t`, for `4 <= j <= 8`.
    pub two_column: Vec<(u32, String)>,
    pub three_column: Vec<(u32, String)>,
}

impl NonconvergenceWitness {
    /// An abelian ideal in the deformation where L1 has none.
    pub fn separates(&self) -> bool {
        self.deformed_floor.is_some() && self.l1_floor.is_none()
    }
}

pub fn nonconvergence_witness(cutoff: u32) -> Result<NonconvergenceWitness> {
    let m2 = GradedLieAlgebra::m2();
    let window = TruncationWindow::with_cutoff(cutoff + TruncationWindow::default().margin)?;
    let omega = family(&m2, 3, 0, &window)?.restricted(cutoff);
    let deformed = DeformedAlgebra::new(&m2, std::slice::from_ref(&omega), 0, &int(1), cutoff);
    let show = |i: u32| (4..=8).map(|j| (j, rational::format(&omega.value(&[i, j])))).collect();
    Ok(NonconvergenceWitness {
        cutoff,
        deformed_floor: abelian_ideal_floor(&deformed, cutoff),
        base_floor: abelian_ideal_floor(&m2, cutoff),
        l1_floor: abelian_ideal_floor(&GradedLieAlgebra::l1(), cutoff),
        two_column: show(2),
        three_column: show(3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{differential, massey_square};

    fn window(n: u32) -> TruncationWindow {
        TruncationWindow::with_cutoff(n).unwrap()
    }

    #[test]
    fn two_family_weight_two_is_finite() {
        let alg = GradedLieAlgebra::m2();
        let w = window(30);
        let f = family(&alg, 2, 2, &w).unwrap();
        let s = prolong(&alg, &f, 6, &w, Gauge::Particular).unwrap();
        assert_eq!(s.status, DeformationStatus::TrueFinite { last_nonzero_order: 1 });
        assert!(s.corrections[1..].iter().all(HomogeneousCochain::is_zero));
        let (d, jacobi) = deformed_algebra(&alg, &s, &int(1), 30).unwrap();
        assert!(jacobi.passed());
        assert_eq!(d.bracket(2, 5).unwrap(), vec![(7, int(1)), (9, int(1))]);
    }

    #[test]
    fn zero_parameter_is_the_base() {
        let alg = GradedLieAlgebra::m2();
        let f = family(&alg, 2, 2, &window(20)).unwrap();
        let d = DeformedAlgebra::new(&alg, &[f], 2, &int(0), 20);
        for i in 1..12 {
            for j in 1..12 {
                assert_eq!(d.bracket(i, j).unwrap(), alg.bracket(i, j).unwrap());
            }
        }
    }

    #[test]
    fn three_family_weight_zero_stops_at_order_five() {
        let alg = GradedLieAlgebra::m2();
        let w = window(24);
        let f = family(&alg, 3, 0, &w).unwrap();
        let s = prolong(&alg, &f, 6, &w, Gauge::Particular).unwrap();
        assert_eq!(s.status, DeformationStatus::Obstructed { order: 5 });
        assert!(s.corrections.iter().all(|a| !a.is_zero()));
        assert!(s.residuals.iter().all(|&r| r == 0));
        let o = s.obstruction.unwrap();
        assert_eq!(o.augmented_rank, o.system_rank + 1);
        assert_eq!(o.inconsistent_below, Some(5));
    }

    #[test]
    fn column_restricted_square_is_not_compensable() {
        let alg = GradedLieAlgebra::m2();
        let w = window(24);
        let f = family(&alg, 3, 0, &w).unwrap();
        let s = prolong(&alg, &f, 4, &w, Gauge::ColumnRestricted).unwrap();
        assert_eq!(s.status, DeformationStatus::Obstructed { order: 2 });
        assert!(s.obstruction.unwrap().inconsistent_below.is_some_and(|t| t <= w.interior()));
    }

    #[test]
    fn order_two_equation_holds() {
        let alg = GradedLieAlgebra::m2();
        let w = window(24);
        let f = family(&alg, 3, 0, &w).unwrap();
        let s = prolong(&alg, &f, 2, &w, Gauge::Particular).unwrap();
        let interior = w.interior();
        let lhs = differential(&alg, &s.corrections[1], interior).unwrap();
        let sq = massey_square(&f.restricted(w.cutoff)).unwrap().restricted(interior);
        assert!(lhs.restricted(interior).add_scaled(&sq, &int(1)).unwrap().is_zero());
    }

    #[test]
    fn non_cocycle_rejected() {
        let alg = GradedLieAlgebra::m2();
        let bogus = HomogeneousCochain::from_entries(2, 0, [(vec![2, 3], int(1))]).unwrap();
        assert!(matches!(prolong(&alg, &bogus, 3, &window(20), Gauge::Particular), Err(Error::NotACocycle(_))));
    }

    #[test]
    fn formal_series_does_not_evaluate() {
        let alg = GradedLieAlgebra::m2();
        let w = window(20);
        let f = family(&alg, 3, 0, &w).unwrap();
        let s = prolong(&alg, &f, 3, &w, Gauge::Particular).unwrap();
        assert!(matches!(deformed_algebra(&alg, &s, &int(1), 20), Err(Error::Usage(_))));
    }

    #[test]
    fn witness_small_window() {
        let w = nonconvergence_witness(30).unwrap();
        assert_eq!(w.deformed_floor, Some(4));
        assert_eq!(w.base_floor, Some(3));
        assert_eq!(w.l1_floor, None);
        assert!(w.separates());
    }
}
