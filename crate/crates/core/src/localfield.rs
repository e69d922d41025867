//! Truncated elements of the local field F^(s).
//!
//! An element is a doubly infinite digit sequence `(a_k)` over GF(p^s) with
//! finitely many nonzero digits; we only ever store the finite window that
//! holds them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldError, GaloisField, GfElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalFieldError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("shift set depth must be at least 1, got {0}")]
    ShiftDepth(i64),
    #[error("digit at index {index} leaves the session window [{min}, {max}]")]
    WindowOverflow { index: i64, min: i64, max: i64 },
}

/// A finite window of digits starting at index `lo`. Digits outside the
/// window are zero.
///
/// The stored form is canonical: first and last stored digits are nonzero,
/// and zero is the empty window with `lo = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawLaurent")]
pub struct LaurentElem {
    lo: i64,
    digits: Vec<GfElem>,
}

#[derive(Deserialize)]
struct RawLaurent {
    lo: i64,
    digits: Vec<GfElem>,
}

impl From<RawLaurent> for LaurentElem {
    fn from(raw: RawLaurent) -> Self {
        LaurentElem::from_digits(raw.lo, raw.digits)
    }
}

impl LaurentElem {
    pub fn zero() -> Self {
        Self { lo: 0, digits: Vec::new() }
    }

    pub fn from_digits(lo: i64, mut digits: Vec<GfElem>) -> Self {
        while digits.last().is_some_and(GfElem::is_zero) {
            digits.pop();
        }
        let lead = digits.iter().take_while(|d| d.is_zero()).count();
        if lead == digits.len() {
            return Self::zero();
        }
        digits.drain(..lead);
        Self { lo: lo + lead as i64, digits }
    }

    /// `a * g_k` for a single field element `a`.
    pub fn monomial(k: i64, a: GfElem) -> Self {
        Self::from_digits(k, vec![a])
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Index of the leading (lowest-index) nonzero digit.
    pub fn lo(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.lo)
    }

    /// Index of the last nonzero digit.
    pub fn hi(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.lo + self.digits.len() as i64 - 1)
    }

    pub fn digits(&self) -> &[GfElem] {
        &self.digits
    }

    /// Digit at index `k`; `s` is the extension degree, used for the zero.
    pub fn digit(&self, k: i64, s: usize) -> GfElem {
        if self.is_zero() || k < self.lo {
            return GfElem::zero(s);
        }
        self.digits.get((k - self.lo) as usize).cloned().unwrap_or_else(|| GfElem::zero(s))
    }

    fn check_digits(&self, field: &GaloisField) -> Result<(), FieldError> {
        self.digits.iter().try_for_each(|d| field.check(d))
    }

    pub fn add(&self, other: &Self, field: &GaloisField) -> Result<Self, LocalFieldError> {
        self.check_digits(field)?;
        other.check_digits(field)?;
        let (lo, hi) = match (self.lo(), other.lo()) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(a), Some(b)) => (a.min(b), self.hi().unwrap().max(other.hi().unwrap())),
        };
        let s = field.s();
        let digits = (lo..=hi)
            .map(|k| field.add(&self.digit(k, s), &other.digit(k, s)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_digits(lo, digits))
    }

    pub fn neg(&self, field: &GaloisField) -> Result<Self, LocalFieldError> {
        let digits = self.digits.iter().map(|d| field.neg(d)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_digits(self.lo, digits))
    }

    pub fn sub(&self, other: &Self, field: &GaloisField) -> Result<Self, LocalFieldError> {
        self.add(&other.neg(field)?, field)
    }

    /// Convolution product: digit `l` of `ab` is `sum_{i+j=l} a_i b_j`.
    pub fn mul(&self, other: &Self, field: &GaloisField) -> Result<Self, LocalFieldError> {
        self.check_digits(field)?;
        other.check_digits(field)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let len = self.digits.len() + other.digits.len() - 1;
        let mut acc = vec![0usize; len];
        for (i, a) in self.digits.iter().enumerate() {
            let a = field.index(a)?;
            for (j, b) in other.digits.iter().enumerate() {
                let b = field.index(b)?;
                acc[i + j] = field.add_idx(acc[i + j], field.mul_idx(a, b));
            }
        }
        let digits = acc.into_iter().map(|i| field.elem(i)).collect();
        Ok(Self::from_digits(self.lo + other.lo, digits))
    }

    /// Coordinatewise scalar multiple `lambda * a`.
    pub fn scale(&self, lambda: &GfElem, field: &GaloisField) -> Result<Self, LocalFieldError> {
        let digits = self
            .digits
            .iter()
            .map(|d| field.mul(lambda, d))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_digits(self.lo, digits))
    }

    /// `||a|| = (1/p^s)^n` where `n` is the index of the leading digit;
    /// the zero element has norm 0.
    pub fn norm(&self, field: &GaloisField) -> BigRational {
        let Some(lo) = self.lo() else {
            return BigRational::zero();
        };
        let q = BigInt::from(field.order());
        let power = num_traits::pow(q, lo.unsigned_abs() as usize);
        if lo >= 0 {
            BigRational::new(BigInt::one(), power)
        } else {
            BigRational::from_integer(power)
        }
    }

    /// The dilation `A`: digit `n` moves to index `n - 1`.
    pub fn dilate(&self) -> Self {
        self.shift(-1)
    }

    /// The inverse dilation `A^{-1}`.
    pub fn undilate(&self) -> Self {
        self.shift(1)
    }

    fn shift(&self, by: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self { lo: self.lo + by, digits: self.digits.clone() }
    }

    /// `dilate`, refusing to leave the session window.
    pub fn dilate_within(&self, window: &IndexWindow) -> Result<Self, LocalFieldError> {
        let out = self.dilate();
        window.check(&out)?;
        Ok(out)
    }

    /// Whether the element lies in the subgroup `F_n` (all digits at `>= n`).
    pub fn in_subgroup(&self, n: i64) -> bool {
        self.lo().is_none_or(|lo| lo >= n)
    }
}

/// The session-wide index range `[min, max]` in which digits may live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWindow {
    pub min: i64,
    pub max: i64,
}

impl IndexWindow {
    pub fn new(min: i64, max: i64) -> Self {
        Self { min, max }
    }

    pub fn check(&self, a: &LaurentElem) -> Result<(), LocalFieldError> {
        let overflow = |index| LocalFieldError::WindowOverflow { index, min: self.min, max: self.max };
        match (a.lo(), a.hi()) {
            (Some(lo), _) if lo < self.min => Err(overflow(lo)),
            (_, Some(hi)) if hi > self.max => Err(overflow(hi)),
            _ => Ok(()),
        }
    }
}

/// `g_k`: the digit `(1, 0, ..., 0)` at index `k`.
pub fn basis_vector(field: &GaloisField, k: i64) -> LaurentElem {
    LaurentElem::monomial(k, field.one())
}

/// The shifts `a_{-1} g_{-1} + ... + a_{-k} g_{-k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSet {
    pub k: usize,
    pub elements: Vec<LaurentElem>,
}

/// All `p^{sk}` shifts of depth `k`, in lexicographic order of the digit
/// tuple `(a_{-k}, ..., a_{-1})`; the zero shift comes first.
pub fn shift_set(field: &GaloisField, k: i64) -> Result<ShiftSet, LocalFieldError> {
    if k < 1 {
        return Err(LocalFieldError::ShiftDepth(k));
    }
    let q = field.order();
    let count = q.pow(k as u32);
    let elements = (0..count)
        .map(|mut idx| {
            let mut digits = vec![field.zero(); k as usize];
            for slot in digits.iter_mut().rev() {
                *slot = field.elem(idx % q);
                idx /= q;
            }
            LaurentElem::from_digits(-k, digits)
        })
        .collect();
    Ok(ShiftSet { k: k as usize, elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u32, s: usize) -> GaloisField {
        GaloisField::with_default_poly(p, s).unwrap()
    }

    fn mono(k: i64, d: &[u32]) -> LaurentElem {
        LaurentElem::monomial(k, GfElem::from_digits(d.to_vec()))
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn add_examples() {
        let f = gf(2, 1);
        let a = mono(0, &[1]);
        assert_eq!(a.add(&LaurentElem::zero(), &f).unwrap(), a);
        assert!(a.add(&a, &f).unwrap().is_zero());
        let f3 = gf(3, 1);
        assert_eq!(mono(-1, &[2]).add(&mono(-1, &[2]), &f3).unwrap(), mono(-1, &[1]));
    }

    #[test]
    fn mul_examples() {
        let f = gf(2, 1);
        let e = basis_vector(&f, 0);
        let a = LaurentElem::from_digits(-2, vec![GfElem::one(1), GfElem::zero(1), GfElem::one(1)]);
        assert_eq!(a.mul(&e, &f).unwrap(), a);
        assert!(a.mul(&LaurentElem::zero(), &f).unwrap().is_zero());
        assert_eq!(mono(1, &[1]).mul(&mono(2, &[1]), &f).unwrap(), mono(3, &[1]));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(mono(2, &[1]).norm(&gf(2, 1)), ratio(1, 4));
        assert_eq!(mono(-1, &[0, 1]).norm(&gf(3, 2)), ratio(9, 1));
        assert_eq!(LaurentElem::zero().norm(&gf(3, 2)), ratio(0, 1));
    }

    #[test]
    fn dilate_examples() {
        let f = gf(3, 1);
        assert!(LaurentElem::zero().dilate().is_zero());
        assert_eq!(basis_vector(&f, 0).dilate(), basis_vector(&f, -1));
        let x = mono(2, &[2]);
        assert_eq!(x.dilate().norm(&f), x.norm(&f) * BigRational::from_integer(3.into()));
        assert_eq!(x.dilate().undilate(), x);
    }

    #[test]
    fn window_overflow() {
        let w = IndexWindow::new(-2, 3);
        let x = basis_vector(&gf(2, 1), -2);
        assert_eq!(
            x.dilate_within(&w),
            Err(LocalFieldError::WindowOverflow { index: -3, min: -2, max: 3 })
        );
        assert!(basis_vector(&gf(2, 1), 3).dilate_within(&w).is_ok());
    }

    #[test]
    fn shift_set_examples() {
        let f = gf(2, 1);
        let g1 = basis_vector(&f, -1);
        let g2 = basis_vector(&f, -2);
        assert_eq!(shift_set(&f, 1).unwrap().elements, vec![LaurentElem::zero(), g1.clone()]);
        let h2 = shift_set(&f, 2).unwrap().elements;
        assert_eq!(h2, vec![LaurentElem::zero(), g1.clone(), g2.clone(), g1.add(&g2, &f).unwrap()]);
        let f3 = gf(3, 1);
        assert_eq!(
            shift_set(&f3, 1).unwrap().elements,
            vec![LaurentElem::zero(), mono(-1, &[1]), mono(-1, &[2])]
        );
        assert_eq!(shift_set(&f, 0), Err(LocalFieldError::ShiftDepth(0)));
    }

    #[test]
    fn shift_set_norms() {
        let f = gf(3, 1);
        let bound = BigRational::from_integer(27.into());
        for h in shift_set(&f, 3).unwrap().elements {
            assert!(h.norm(&f) <= bound);
            assert_eq!(h.in_subgroup(0), h.is_zero());
        }
    }

    #[test]
    fn basis_vector_subgroups() {
        let f = gf(2, 2);
        for k in -3..3 {
            let g = basis_vector(&f, k);
            assert!(g.in_subgroup(k) && !g.in_subgroup(k + 1));
            assert_eq!(g.norm(&f), LaurentElem::monomial(k, f.one()).norm(&f));
        }
        assert_eq!(basis_vector(&f, 0).mul(&basis_vector(&f, 0), &f).unwrap(), basis_vector(&f, 0));
    }

    #[test]
    fn scalar_multiplication_is_coordinatewise() {
        let f = gf(2, 2);
        let a = LaurentElem::from_digits(-1, f.enumerate()[1..].to_vec());
        let lambda = f.elem(2);
        let scaled = a.scale(&lambda, &f).unwrap();
        for k in -1..2 {
            assert_eq!(scaled.digit(k, 2), f.mul(&lambda, &a.digit(k, 2)).unwrap());
        }
    }

    #[test]
    fn json_shape() {
        let x = LaurentElem::from_digits(-1, vec![GfElem::one(2), GfElem::zero(2)]);
        assert_eq!(serde_json::to_string(&x).unwrap(), r#"{"lo":-1,"digits":[[1,0]]}"#);
        let back: LaurentElem =
            serde_json::from_str(r#"{"lo":-3,"digits":[[0,0],[1,0],[0,0]]}"#).unwrap();
        assert_eq!(back, LaurentElem::monomial(-2, GfElem::one(2)));
    }

    fn arb_elem(q: usize) -> impl Strategy<Value = (i64, Vec<usize>)> {
        (-4i64..4, prop::collection::vec(0..q, 0..6))
    }

    fn build(f: &GaloisField, (lo, idx): (i64, Vec<usize>)) -> LaurentElem {
        LaurentElem::from_digits(lo, idx.into_iter().map(|i| f.elem(i)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ultrametric(a in arb_elem(9), b in arb_elem(9)) {
            let f = gf(3, 2);
            let (a, b) = (build(&f, a), build(&f, b));
            let sum = a.add(&b, &f).unwrap();
            prop_assert!(sum.norm(&f) <= a.norm(&f).max(b.norm(&f)));
        }

        #[test]
        fn norm_is_multiplicative(a in arb_elem(4), b in arb_elem(4)) {
            let f = gf(2, 2);
            let (a, b) = (build(&f, a), build(&f, b));
            let prod = a.mul(&b, &f).unwrap();
            prop_assert_eq!(prod.norm(&f), a.norm(&f) * b.norm(&f));
        }
    }

    #[test]
    fn dilation_is_additive_exhaustive() {
        let f = gf(2, 1);
        let elems: Vec<LaurentElem> = (0..16usize)
            .map(|m| {
                let digits = (0..4).map(|b| f.elem((m >> b) & 1)).collect();
                LaurentElem::from_digits(-2, digits)
            })
            .collect();
        for a in &elems {
            for b in &elems {
                let lhs = a.add(b, &f).unwrap().dilate();
                let rhs = a.dilate().add(&b.dilate(), &f).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}
