//! Homogeneous adjoint cochains and the operations on them.
//!
//! A degree-`p` cochain of weight `l` stores a coefficient `a` at the strictly
//! increasing key `(i_1, ..., i_p)`, meaning `(e_{i_1}, ..., e_{i_p}) -> a e_{i_1+...+i_p+l}`.
//!
//! Sign conventions:
//!
//! ```text
//! (d x)(e_i)             = [x, e_i]                                   (degree 0)
//! (d w)(e_i, e_j)        = w([e_i,e_j]) - [e_i, w(e_j)] + [e_j, w(e_i)]
//! (d w)(e_i, e_j, e_k)   = w([e_i,e_j],e_k) + cyclic - [e_i, w(e_j,e_k)] - cyclic
//! ```
//!
//! Each is minus the textbook Chevalley-Eilenberg differential, so `d d = 0` still holds
//! and the coboundary certificates can be compared literally.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::GradedLieAlgebra;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub const MAX_DEGREE: usize = 3;

/// Strictly increasing index tuple of length at most three.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    len: u8,
    idx: [u32; MAX_DEGREE],
}

impl Key {
    pub const EMPTY: Key = Key { len: 0, idx: [0; MAX_DEGREE] };

    /// Panics unless `sorted` is strictly increasing, positive and of length at most three.
    pub fn new(sorted: &[u32]) -> Key {
        assert!(sorted.len() <= MAX_DEGREE, "key too long: {sorted:?}");
        assert!(sorted.iter().all(|&i| i >= 1), "indices start at 1: {sorted:?}");
        assert!(sorted.windows(2).all(|w| w[0] < w[1]), "key not strictly increasing: {sorted:?}");
        let mut idx = [0; MAX_DEGREE];
        idx[..sorted.len()].copy_from_slice(sorted);
        Key { len: sorted.len() as u8, idx }
    }

    /// Sorts `indices`, returning the permutation sign, or `None` on a repeated index.
    pub fn canonical(indices: &[u32]) -> Option<(i8, Key)> {
        let mut v = [0u32; MAX_DEGREE];
        let n = indices.len();
        assert!(n <= MAX_DEGREE);
        v[..n].copy_from_slice(indices);
        let mut sign = 1i8;
        for a in 0..n {
            for b in 0..n - 1 - a {
                if v[b] > v[b + 1] {
                    v.swap(b, b + 1);
                    sign = -sign;
                } else if v[b] == v[b + 1] {
                    return None;
                }
            }
        }
        if v[..n].windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((sign, Key { len: n as u8, idx: v }))
    }

    pub fn pair(i: u32, j: u32) -> Key {
        Key::new(&[i, j])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.idx[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sum(&self) -> i64 {
        self.as_slice().iter().map(|&i| i64::from(i)).sum()
    }

    /// Largest index, 0 for the empty key.
    pub fn largest(&self) -> u32 {
        self.as_slice().last().copied().unwrap_or(0)
    }

    /// Smallest index, 0 for the empty key. For pairs this is the column.
    pub fn smallest(&self) -> u32 {
        self.as_slice().first().copied().unwrap_or(0)
    }

    pub fn contains(&self, i: u32) -> bool {
        self.as_slice().contains(&i)
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

/// All legal keys of degree `p` and weight `l` with entries at most `cutoff`, ascending.
pub fn legal_keys(degree: usize, weight: i64, cutoff: u32) -> Vec<Key> {
    let mut out = Vec::new();
    let legal = |k: &Key| k.sum() + weight >= 1;
    match degree {
        0 => {
            if legal(&Key::EMPTY) {
                out.push(Key::EMPTY);
            }
        }
        1 => out.extend((1..=cutoff).map(|i| Key::new(&[i])).filter(legal)),
        2 => {
            for i in 1..=cutoff {
                for j in i + 1..=cutoff {
                    let k = Key::new(&[i, j]);
                    if legal(&k) {
                        out.push(k);
                    }
                }
            }
        }
        3 => {
            for i in 1..=cutoff {
                for j in i + 1..=cutoff {
                    for k in j + 1..=cutoff {
                        let key = Key::new(&[i, j, k]);
                        if legal(&key) {
                            out.push(key);
                        }
                    }
                }
            }
        }
        _ => panic!("degree {degree} out of range"),
    }
    out
}

/// All strictly increasing tuples of length `len` with entries at most `cutoff`.
pub fn index_tuples(len: usize, cutoff: u32) -> Vec<Key> {
    legal_keys(len, i64::from(i32::MAX), cutoff)
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CochainDocument", into = "CochainDocument")]
pub struct HomogeneousCochain {
    degree: usize,
    weight: i64,
    coeffs: BTreeMap<Key, Rational>,
}

impl HomogeneousCochain {
    pub fn zero(degree: usize, weight: i64) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::Unsupported(format!("cochains of degree {degree}")));
        }
        Ok(Self { degree, weight, coeffs: BTreeMap::new() })
    }

    /// Builds a cochain from `(indices, value)` pairs in any index order; values on
    /// the same canonical key are summed with the permutation sign.
    pub fn from_entries<I, S>(degree: usize, weight: i64, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: AsRef<[u32]>,
    {
        let mut c = Self::zero(degree, weight)?;
        for (indices, value) in entries {
            let indices = indices.as_ref();
            if indices.len() != degree {
                return Err(Error::Usage(format!(
                    "key {indices:?} has arity {} but the cochain has degree {degree}",
                    indices.len()
                )));
            }
            if indices.contains(&0) {
                return Err(Error::Usage(format!("index 0 in key {indices:?}")));
            }
            let Some((sign, key)) = Key::canonical(indices) else {
                if value.is_zero() {
                    continue;
                }
                return Err(Error::Usage(format!("repeated index in key {indices:?}")));
            };
            if !c.is_legal(&key) {
                if value.is_zero() {
                    continue;
                }
                return Err(Error::Usage(format!(
                    "key {indices:?} targets e_{} which does not exist in weight {weight}",
                    key.sum() + weight
                )));
            }
            let v = if sign > 0 { value } else { -value };
            c.add_at(key, &v);
        }
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn is_legal(&self, key: &Key) -> bool {
        key.len() == self.degree && key.sum() + self.weight >= 1
    }

    pub fn get(&self, key: &Key) -> Rational {
        self.coeffs.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn get_ref(&self, key: &Key) -> Option<&Rational> {
        self.coeffs.get(key)
    }

    /// Sets a canonical key. Illegal keys are a usage error; zero removes the entry.
    pub fn set(&mut self, key: Key, value: Rational) -> Result<()> {
        if !self.is_legal(&key) {
            return Err(Error::Usage(format!(
                "illegal key {key:?} for degree {} weight {}",
                self.degree, self.weight
            )));
        }
        if value.is_zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, value);
        }
        Ok(())
    }

    fn add_at(&mut self, key: Key, value: &Rational) {
        if value.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(key).or_insert_with(Rational::zero);
        *entry += value;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Rational)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_index(&self) -> u32 {
        self.coeffs.keys().map(Key::largest).max().unwrap_or(0)
    }

    /// Value on the basis tuple `indices` in any order: `(coefficient, target index)`.
    pub fn evaluate(&self, indices: &[u32]) -> Result<(Rational, i64)> {
        if indices.len() != self.degree {
            return Err(Error::Usage(format!(
                "cochain of degree {} evaluated on {} arguments",
                self.degree,
                indices.len()
            )));
        }
        let target = indices.iter().map(|&i| i64::from(i)).sum::<i64>() + self.weight;
        Ok((self.value(indices), target))
    }

    /// Signed coefficient on an arbitrary (unsorted, possibly repeating) tuple.
    pub fn value(&self, indices: &[u32]) -> Rational {
        match Key::canonical(indices) {
            Some((sign, key)) => match self.coeffs.get(&key) {
                Some(v) if sign > 0 => v.clone(),
                Some(v) => -v.clone(),
                None => Rational::zero(),
            },
            None => Rational::zero(),
        }
    }

    pub fn scaled(&self, s: &Rational) -> Self {
        let mut out = Self { degree: self.degree, weight: self.weight, coeffs: BTreeMap::new() };
        if !s.is_zero() {
            for (k, v) in &self.coeffs {
                out.coeffs.insert(*k, v * s);
            }
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree || self.weight != other.weight {
            return Err(Error::Usage(format!(
                "cochains of (degree, weight) ({}, {}) and ({}, {}) cannot be combined",
                self.degree, self.weight, other.degree, other.weight
            )));
        }
        Ok(())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: &Rational) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_at(*k, &(v * s));
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, &-Rational::one())
    }

    /// Drops every key with an index above `cutoff`.
    pub fn restricted(&self, cutoff: u32) -> Self {
        Self {
            degree: self.degree,
            weight: self.weight,
            coeffs: self.coeffs.iter().filter(|(k, _)| k.largest() <= cutoff).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }

    /// Keeps only keys whose smallest index lies in `columns`.
    pub fn restricted_to_columns(&self, columns: &[u32]) -> Self {
        Self {
            degree: self.degree,
            weight: self.weight,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| columns.contains(&k.smallest()))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Equality on keys with every index at most `cutoff`.
    pub fn agrees_with(&self, other: &Self, cutoff: u32) -> bool {
        self.degree == other.degree
            && self.weight == other.weight
            && self.restricted(cutoff).coeffs == other.restricted(cutoff).coeffs
    }

    /// First key (ascending order) with a nonzero coefficient.
    pub fn leading_key(&self) -> Option<Key> {
        self.coeffs.keys().next().copied()
    }

    pub fn to_document(&self) -> CochainDocument {
        self.clone().into()
    }
}

impl fmt::Debug for HomogeneousCochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C^{}_{}{{", self.degree, self.weight)?;
        for (n, (k, v)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k:?}: {v}")?;
        }
        f.write_str("}")
    }
}

/// JSON form: `{"degree": p, "weight": l, "coeffs": [[[i, ...], "p/q"], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CochainDocument {
    pub degree: usize,
    pub weight: i64,
    pub coeffs: Vec<(Vec<u32>, String)>,
}

impl From<HomogeneousCochain> for CochainDocument {
    fn from(c: HomogeneousCochain) -> Self {
        CochainDocument {
            degree: c.degree,
            weight: c.weight,
            coeffs: c.coeffs.iter().map(|(k, v)| (k.as_slice().to_vec(), rational::format(v))).collect(),
        }
    }
}

impl TryFrom<CochainDocument> for HomogeneousCochain {
    type Error = Error;

    fn try_from(doc: CochainDocument) -> Result<Self> {
        let mut entries = Vec::with_capacity(doc.coeffs.len());
        for (k, v) in doc.coeffs {
            entries.push((k, rational::parse(&v)?));
        }
        HomogeneousCochain::from_entries(doc.degree, doc.weight, entries)
    }
}

/// Linear expansion of `(d w)(tuple)` in the coefficients of a degree-`p` weight-`l`
/// cochain `w`: `sum coef * w[key]` over the returned pairs. Illegal keys and zero
/// multipliers are omitted. `tuple` must be strictly increasing of length `p + 1`.
pub fn differential_terms(alg: &GradedLieAlgebra, degree: usize, weight: i64, tuple: &[u32]) -> Vec<(Key, Rational)> {
    assert_eq!(tuple.len(), degree + 1, "tuple arity must be degree + 1");
    let mut acc: Vec<(Key, Rational)> = Vec::with_capacity(6);
    let mut push = |indices: &[u32], coef: Rational| {
        if coef.is_zero() {
            return;
        }
        let Some((sign, key)) = Key::canonical(indices) else { return };
        if key.sum() + weight < 1 {
            return;
        }
        let coef = if sign > 0 { coef } else { -coef };
        if let Some(slot) = acc.iter_mut().find(|(k, _)| *k == key) {
            slot.1 += coef;
        } else {
            acc.push((key, coef));
        }
    };
    // [e_x, e_t] where e_t is the (existing) target of a cochain value
    let br = |x: u32, target: i64| -> Rational {
        if target >= 1 {
            alg.bracket_coeff(x, target as u32)
        } else {
            Rational::zero()
        }
    };
    match degree {
        0 => {
            let i = tuple[0];
            push(&[], -br(i, weight));
        }
        1 => {
            let (i, j) = (tuple[0], tuple[1]);
            push(&[i + j], alg.bracket_coeff(i, j));
            push(&[j], -br(i, i64::from(j) + weight));
            push(&[i], br(j, i64::from(i) + weight));
        }
        2 => {
            let (i, j, k) = (tuple[0], tuple[1], tuple[2]);
            for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                push(&[x + y, z], alg.bracket_coeff(x, y));
                push(&[y, z], -br(x, i64::from(y) + i64::from(z) + weight));
            }
        }
        _ => panic!("no differential on degree {degree}"),
    }
    acc.retain(|(_, c)| !c.is_zero());
    acc
}

/// `d c`, evaluated on every tuple with all indices at most `cutoff`.
pub fn differential(alg: &GradedLieAlgebra, c: &HomogeneousCochain, cutoff: u32) -> Result<HomogeneousCochain> {
    if c.degree >= MAX_DEGREE {
        return Err(Error::Unsupported("differential of a degree-3 cochain".into()));
    }
    let mut out = HomogeneousCochain::zero(c.degree + 1, c.weight)?;
    for tuple in index_tuples(c.degree + 1, cutoff) {
        if tuple.sum() + c.weight < 1 {
            continue;
        }
        let mut v = Rational::zero();
        for (key, coef) in differential_terms(alg, c.degree, c.weight, tuple.as_slice()) {
            if let Some(x) = c.coeffs.get(&key) {
                v += coef * x;
            }
        }
        out.add_at(tuple, &v);
    }
    Ok(out)
}

/// Shuffle composition `ab`: `sum over shuffles sgn * a(b(x_S), x_R)`.
pub fn compose(a: &HomogeneousCochain, b: &HomogeneousCochain) -> Result<HomogeneousCochain> {
    if a.degree == 0 || b.degree == 0 {
        return Err(Error::Unsupported("composition with degree-0 cochains".into()));
    }
    let degree = a.degree + b.degree - 1;
    if degree > MAX_DEGREE {
        return Err(Error::Unsupported(format!("composition of degree {degree}")));
    }
    let mut out = HomogeneousCochain::zero(degree, a.weight + b.weight)?;
    // keys of `a` indexed by each member index, with its position
    let mut by_member: HashMap<u32, Vec<(usize, Key)>> = HashMap::new();
    for key in a.coeffs.keys() {
        for (pos, &i) in key.as_slice().iter().enumerate() {
            by_member.entry(i).or_default().push((pos, *key));
        }
    }
    for (bkey, bval) in &b.coeffs {
        let target = bkey.sum() + b.weight;
        let Ok(target) = u32::try_from(target) else { continue };
        let Some(candidates) = by_member.get(&target) else { continue };
        for (pos, akey) in candidates {
            let rest: Vec<u32> = akey.as_slice().iter().copied().filter(|&i| i != target).collect();
            if rest.iter().any(|i| bkey.contains(*i)) {
                continue;
            }
            let mut list: Vec<u32> = bkey.as_slice().to_vec();
            list.extend_from_slice(&rest);
            let Some((shuffle_sign, key)) = Key::canonical(&list) else { continue };
            let mut v = bval * &a.coeffs[akey];
            if (i64::from(shuffle_sign) * if pos % 2 == 0 { 1 } else { -1 }) < 0 {
                v = -v;
            }
            out.add_at(key, &v);
        }
    }
    Ok(out)
}

/// Graded bracket `[a, b] = ab - (-1)^{(p-1)(q-1)} ba`.
pub fn nr_bracket(a: &HomogeneousCochain, b: &HomogeneousCochain) -> Result<HomogeneousCochain> {
    let ab = compose(a, b)?;
    let ba = compose(b, a)?;
    let odd = (a.degree - 1) * (b.degree - 1) % 2 == 1;
    if odd {
        ab.add_scaled(&ba, &Rational::one())
    } else {
        ab.sub(&ba)
    }
}

/// `x(y(e_u, e_v), e_w)`; `None` if that needs a coefficient of `x` with an index above `cutoff`.
fn nested_value(x: &HomogeneousCochain, y: &HomogeneousCochain, u: u32, v: u32, w: u32, cutoff: Option<u32>) -> Option<Rational> {
    let inner = y.value(&[u, v]);
    if inner.is_zero() {
        return Some(Rational::zero());
    }
    let target = i64::from(u) + i64::from(v) + y.weight;
    if target < 1 {
        return Some(Rational::zero());
    }
    if let Some(n) = cutoff {
        if target > i64::from(n) {
            return None;
        }
    }
    Some(inner * x.value(&[target as u32, w]))
}

/// `a(b(e_i,e_j),e_k) + b(a(e_i,e_j),e_k) + cyclic` at one triple, or `None` when the
/// value depends on coefficients beyond `cutoff`.
pub fn massey_term_at(a: &HomogeneousCochain, b: &HomogeneousCochain, triple: [u32; 3], cutoff: Option<u32>) -> Option<Rational> {
    let [i, j, k] = triple;
    let mut total = Rational::zero();
    for (x, y) in [(a, b), (b, a)] {
        for (u, v, w) in [(i, j, k), (j, k, i), (k, i, j)] {
            total += nested_value(x, y, u, v, w, cutoff)?;
        }
    }
    Some(total)
}

fn check_two(c: &HomogeneousCochain, what: &str) -> Result<()> {
    if c.degree != 2 {
        return Err(Error::Usage(format!("{what} needs 2-cochains, got degree {}", c.degree)));
    }
    Ok(())
}

/// Symmetrized Massey term of two 2-cochains, over the full (finite) supports.
pub fn massey_term(a: &HomogeneousCochain, b: &HomogeneousCochain) -> Result<HomogeneousCochain> {
    check_two(a, "massey_term")?;
    check_two(b, "massey_term")?;
    let mut out = HomogeneousCochain::zero(3, a.weight + b.weight)?;
    let mut candidates = std::collections::BTreeSet::new();
    for (x, y) in [(a, b), (b, a)] {
        let mut by_member: HashMap<u32, Vec<u32>> = HashMap::new();
        for key in x.coeffs.keys() {
            let [p, q] = [key.as_slice()[0], key.as_slice()[1]];
            by_member.entry(p).or_default().push(q);
            by_member.entry(q).or_default().push(p);
        }
        for ykey in y.coeffs.keys() {
            let target = ykey.sum() + y.weight;
            let Ok(target) = u32::try_from(target) else { continue };
            for &w in by_member.get(&target).into_iter().flatten() {
                if let Some((_, key)) = Key::canonical(&[ykey.as_slice()[0], ykey.as_slice()[1], w]) {
                    candidates.insert(key);
                }
            }
        }
    }
    for key in candidates {
        let s = key.as_slice();
        let v = massey_term_at(a, b, [s[0], s[1], s[2]], None).expect("unbounded evaluation");
        out.add_at(key, &v);
    }
    Ok(out)
}

/// Massey square `w(w(e_i,e_j),e_k) + cyclic`, i.e. half of `massey_term(w, w)`.
pub fn massey_square(w: &HomogeneousCochain) -> Result<HomogeneousCochain> {
    Ok(massey_term(w, w)?.scaled(&rational::frac(1, 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use proptest::prelude::*;

    fn m2() -> GradedLieAlgebra {
        GradedLieAlgebra::m2()
    }

    fn one_cochain(weight: i64, f: impl Fn(u32) -> Rational, cutoff: u32) -> HomogeneousCochain {
        HomogeneousCochain::from_entries(
            1,
            weight,
            (1..=cutoff).filter(|&i| i64::from(i) + weight >= 1).map(|i| (vec![i], f(i))),
        )
        .unwrap()
    }

    #[test]
    fn canonical_keys_and_signs() {
        assert_eq!(Key::canonical(&[3, 2]), Some((-1, Key::new(&[2, 3]))));
        assert_eq!(Key::canonical(&[3, 1, 2]), Some((1, Key::new(&[1, 2, 3]))));
        assert_eq!(Key::canonical(&[2, 1, 3]), Some((-1, Key::new(&[1, 2, 3]))));
        assert_eq!(Key::canonical(&[2, 2]), None);
        assert_eq!(Key::canonical(&[4, 1, 4]), None);
    }

    #[test]
    fn evaluate_examples() {
        let c = HomogeneousCochain::from_entries(2, 0, [(vec![2, 3], int(1))]).unwrap();
        assert_eq!(c.evaluate(&[3, 2]).unwrap(), (int(-1), 5));
        assert_eq!(c.evaluate(&[2, 2]).unwrap(), (int(0), 4));
        assert!(matches!(c.evaluate(&[1]), Err(Error::Usage(_))));
        let omega = one_cochain(0, |k| int(i64::from(k)), 20);
        assert_eq!(omega.evaluate(&[7]).unwrap(), (int(7), 7));
    }

    #[test]
    fn illegal_keys_rejected() {
        assert!(HomogeneousCochain::from_entries(1, -3, [(vec![2], int(1))]).is_err());
        assert!(HomogeneousCochain::from_entries(1, -3, [(vec![4], int(1))]).is_ok());
        assert!(HomogeneousCochain::from_entries(2, 0, [(vec![2, 2], int(1))]).is_err());
        assert!(HomogeneousCochain::zero(4, 0).is_err());
    }

    #[test]
    fn zero_cochain_differential_is_adjoint() {
        for l in 1..6 {
            let e = HomogeneousCochain::from_entries(0, l, [(Vec::<u32>::new(), int(1))]).unwrap();
            let d = differential(&m2(), &e, 30).unwrap();
            for i in 1..=30 {
                assert_eq!(d.value(&[i]), m2().bracket_coeff(l as u32, i), "l={l} i={i}");
            }
        }
    }

    /// Equations (e) and (g) for 2-coboundaries of m2, written out by hand for weight l >= 2.
    #[test]
    fn coboundary_expansion_matches_hand_equations() {
        let alg = m2();
        for l in [2i64, 3, 5] {
            let a = |i: u32| Key::new(&[i]);
            // i = 1, j >= 3: a_{1,j} = a_{j+1} - a_j
            for j in 3..10u32 {
                let mut terms = differential_terms(&alg, 1, l, &[1, j]);
                terms.sort();
                let mut expect = vec![(a(j + 1), int(1)), (a(j), int(-1))];
                expect.sort();
                assert_eq!(terms, expect, "l={l} j={j}");
            }
            // i = 1, j = 2: a_{1,2} = a_3 - a_2 + a_1
            let mut terms = differential_terms(&alg, 1, l, &[1, 2]);
            terms.sort();
            assert_eq!(terms, vec![(a(1), int(1)), (a(2), int(-1)), (a(3), int(1))]);
            // i = 2, j >= 3: a_{2,j} = a_{j+2} - a_j
            for j in 3..10u32 {
                let mut terms = differential_terms(&alg, 1, l, &[2, j]);
                terms.sort();
                let mut expect = vec![(a(j + 2), int(1)), (a(j), int(-1))];
                expect.sort();
                assert_eq!(terms, expect);
            }
        }
        // weight 0, i = 1, j >= 3: a_{j+1} - a_j - a_1
        let terms: BTreeMap<_, _> = differential_terms(&alg, 1, 0, &[1, 5]).into_iter().collect();
        assert_eq!(terms[&Key::new(&[6])], int(1));
        assert_eq!(terms[&Key::new(&[5])], int(-1));
        assert_eq!(terms[&Key::new(&[1])], int(-1));
    }

    /// Cocycle equation (beta) of the stable system: a_{j+1,k} + a_{j,k+1} = a_{j,k}.
    #[test]
    fn two_cocycle_expansion_stable_equation() {
        let alg = m2();
        let terms: BTreeMap<_, _> = differential_terms(&alg, 2, 0, &[1, 5, 9]).into_iter().collect();
        let expect: BTreeMap<_, _> = [
            (Key::pair(6, 9), int(1)),
            (Key::pair(5, 10), int(1)),
            (Key::pair(5, 9), int(-1)),
        ]
        .into_iter()
        .collect();
        assert_eq!(terms, expect);
    }

    #[test]
    fn omega_alpha_bracket() {
        let n = 30;
        let omega = one_cochain(0, |k| int(i64::from(k)), n + 10);
        let alpha = one_cochain(2, |k| if k == 1 { int(0) } else { int(1) }, n + 2);
        let br = nr_bracket(&omega, &alpha).unwrap().restricted(n);
        assert_eq!(br, alpha.scaled(&int(2)).restricted(n));
        for l in 3..7u32 {
            let gamma = one_cochain(i64::from(l), |k| match k {
                1 => frac(-1, 2),
                2 => frac(1, 2),
                _ => int(1),
            }, n + 10);
            let br = nr_bracket(&omega, &gamma).unwrap().restricted(n);
            assert_eq!(br, gamma.scaled(&int(i64::from(l))).restricted(n));
        }
    }

    #[test]
    fn massey_square_of_zero_is_zero() {
        let z = HomogeneousCochain::zero(2, -4).unwrap();
        assert!(massey_square(&z).unwrap().is_zero());
    }

    #[test]
    fn massey_term_requires_degree_two() {
        let a = HomogeneousCochain::zero(1, 0).unwrap();
        let b = HomogeneousCochain::zero(2, 0).unwrap();
        assert!(massey_term(&a, &b).is_err());
        assert!(nr_bracket(&b, &HomogeneousCochain::zero(3, 0).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = HomogeneousCochain::from_entries(2, -1, [(vec![2, 5], frac(3, 4)), (vec![7, 3], int(-2))]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(text, r#"{"degree":2,"weight":-1,"coeffs":[[[2,5],"3/4"],[[3,7],"2"]]}"#);
        let back: HomogeneousCochain = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    // ---- property tests -------------------------------------------------------

    fn arb_cochain(degree: usize, max_index: u32) -> impl Strategy<Value = HomogeneousCochain> {
        (-6i64..=6, proptest::collection::vec((proptest::collection::vec(1..=max_index, degree), -5i64..=5), 0..8))
            .prop_map(move |(weight, raw)| {
                let entries = raw
                    .into_iter()
                    .filter_map(|(idx, v)| {
                        let (_, key) = Key::canonical(&idx)?;
                        (key.sum() + weight >= 1).then(|| (key.as_slice().to_vec(), int(v)))
                    })
                    .collect::<Vec<_>>();
                HomogeneousCochain::from_entries(degree, weight, entries).unwrap()
            })
    }

    fn point_massey_square(w: &HomogeneousCochain, i: u32, j: u32, k: u32) -> Rational {
        // a_{i,j} a_{i+j+l,k} + a_{j,k} a_{j+k+l,i} + a_{k,i} a_{k+i+l,j}
        let l = w.weight();
        let a = |x: i64, y: i64| -> Rational {
            if x < 1 || y < 1 {
                return Rational::zero();
            }
            w.value(&[x as u32, y as u32])
        };
        let (i, j, k) = (i64::from(i), i64::from(j), i64::from(k));
        a(i, j) * a(i + j + l, k) + a(j, k) * a(j + k + l, i) + a(k, i) * a(k + i + l, j)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn dd_vanishes_on_interior(c0 in arb_cochain(0, 1), c1 in arb_cochain(1, 30)) {
            let alg = m2();
            for c in [c0, c1] {
                let d1 = differential(&alg, &c, 40).unwrap();
                if d1.degree() < 3 {
                    let d2 = differential(&alg, &d1, 40).unwrap();
                    prop_assert!(d2.restricted(35).is_zero(), "d d {:?} = {:?}", c, d2);
                }
            }
        }

        #[test]
        fn graded_antisymmetry(a1 in arb_cochain(1, 12), b1 in arb_cochain(1, 12),
                               a2 in arb_cochain(2, 12), b2 in arb_cochain(2, 12)) {
            for (a, b) in [(&a1, &b1), (&a1, &a2), (&a2, &b2)] {
                let ab = nr_bracket(a, b).unwrap();
                let ba = nr_bracket(b, a).unwrap();
                let sign = if (a.degree() - 1) * (b.degree() - 1) % 2 == 1 { int(1) } else { int(-1) };
                prop_assert_eq!(ab, ba.scaled(&sign));
            }
        }

        #[test]
        fn degree_one_bracket_is_commutator(a in arb_cochain(1, 15), b in arb_cochain(1, 15)) {
            let br = nr_bracket(&a, &b).unwrap();
            for x in 1..=20u32 {
                let apply = |f: &HomogeneousCochain, v: &BTreeMap<i64, Rational>| {
                    let mut out = BTreeMap::new();
                    for (idx, c) in v {
                        if *idx >= 1 {
                            let (val, t) = f.evaluate(&[*idx as u32]).unwrap();
                            *out.entry(t).or_insert_with(Rational::zero) += c * val;
                        }
                    }
                    out
                };
                let ex: BTreeMap<i64, Rational> = [(i64::from(x), int(1))].into_iter().collect();
                let ab = apply(&a, &apply(&b, &ex));
                let ba = apply(&b, &apply(&a, &ex));
                let t = i64::from(x) + a.weight() + b.weight();
                let direct = ab.get(&t).cloned().unwrap_or_default() - ba.get(&t).cloned().unwrap_or_default();
                prop_assert_eq!(br.value(&[x]), direct);
            }
        }

        #[test]
        fn massey_routes_agree(w in arb_cochain(2, 14), v in arb_cochain(2, 14)) {
            let sq = massey_square(&w).unwrap();
            for key in index_tuples(3, 16) {
                let s = key.as_slice();
                prop_assert_eq!(sq.value(s), point_massey_square(&w, s[0], s[1], s[2]));
            }
            // for 2-cochains the graded bracket is the symmetrized Massey term
            if w.weight() == v.weight() {
                prop_assert_eq!(nr_bracket(&w, &v).unwrap(), massey_term(&w, &v).unwrap());
            }
            prop_assert_eq!(massey_term(&w, &v).unwrap(), massey_term(&v, &w).unwrap());
        }
    }
}
