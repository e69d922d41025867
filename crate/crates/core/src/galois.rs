//! Arithmetic in GF(p^s) using the polynomial basis.
//!
//! Elements are digit vectors `(a^(0), ..., a^(s-1))` of coefficients of
//! `1, x, ..., x^(s-1)`. Every element also has a dense index in
//! `0..p^s`: the position of its digit vector in lexicographic order, so the
//! zero element has index 0 and digit 0 is the most significant. Hot loops in
//! the other modules work on these indices through precomputed tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order handled; the constructions are exponential anyway.
pub const MAX_ORDER: usize = 1 << 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(u128),
    #[error("reduction polynomial must have {expected} coefficients, got {got}")]
    PolyLength { expected: usize, got: usize },
    #[error("reduction polynomial coefficient {0} is not reduced mod p")]
    PolyCoefficient(u32),
    #[error("reduction polynomial {0:?} is reducible over GF(p)")]
    Reducible(Vec<u32>),
    #[error("element {digits:?} does not belong to GF({p}^{s})")]
    ForeignElement { digits: Vec<u32>, p: u32, s: usize },
}

/// The parameters `p`, `s` and the monic reduction polynomial.
///
/// `reduction_poly` holds the coefficients of `x^0 .. x^(s-1)`; the leading
/// `x^s` coefficient is implicitly 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u32,
    pub s: usize,
    #[serde(rename = "poly")]
    pub reduction_poly: Vec<u32>,
}

impl FieldParams {
    /// Parameters with the lexicographically smallest monic irreducible
    /// polynomial of degree `s`.
    pub fn with_default_poly(p: u32, s: usize) -> Result<Self, FieldError> {
        check_prime(p)?;
        if s == 0 {
            return Err(FieldError::ZeroDegree);
        }
        check_order(p, s)?;
        let poly = smallest_irreducible(p, s);
        Ok(Self { p, s, reduction_poly: poly })
    }

    pub fn new(p: u32, s: usize, reduction_poly: Vec<u32>) -> Result<Self, FieldError> {
        let params = Self { p, s, reduction_poly };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        check_prime(self.p)?;
        if self.s == 0 {
            return Err(FieldError::ZeroDegree);
        }
        check_order(self.p, self.s)?;
        if self.reduction_poly.len() != self.s {
            return Err(FieldError::PolyLength { expected: self.s, got: self.reduction_poly.len() });
        }
        if let Some(&c) = self.reduction_poly.iter().find(|&&c| c >= self.p) {
            return Err(FieldError::PolyCoefficient(c));
        }
        if !is_irreducible(self.p, &self.reduction_poly) {
            return Err(FieldError::Reducible(self.reduction_poly.clone()));
        }
        Ok(())
    }

    /// Number of field elements, `p^s`.
    pub fn order(&self) -> usize {
        (self.p as usize).pow(self.s as u32)
    }
}

fn check_prime(p: u32) -> Result<(), FieldError> {
    if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
        return Err(FieldError::NotPrime(p));
    }
    Ok(())
}

fn check_order(p: u32, s: usize) -> Result<(), FieldError> {
    let order = (p as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if order > MAX_ORDER as u128 {
        return Err(FieldError::TooLarge(order));
    }
    Ok(())
}

/// An element of GF(p^s) as its `s` digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GfElem {
    digits: Vec<u32>,
}

impl GfElem {
    pub fn from_digits(digits: Vec<u32>) -> Self {
        Self { digits }
    }

    pub fn zero(s: usize) -> Self {
        Self { digits: vec![0; s] }
    }

    /// The element `(1, 0, ..., 0)`.
    pub fn one(s: usize) -> Self {
        let mut digits = vec![0; s];
        digits[0] = 1;
        Self { digits }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// `|a|`: 1 for a nonzero element, 0 for zero.
    pub fn modulus(&self) -> u32 {
        u32::from(!self.is_zero())
    }
}

/// GF(p^s) with addition and multiplication tables over element indices.
#[derive(Debug, Clone)]
pub struct GaloisField {
    params: FieldParams,
    order: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
}

impl GaloisField {
    pub fn new(params: FieldParams) -> Result<Self, FieldError> {
        params.validate()?;
        let q = params.order();
        let p = params.p;
        let s = params.s;
        let elems: Vec<Vec<u32>> = (0..q).map(|i| index_to_digits(i, p, s)).collect();
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for (i, a) in elems.iter().enumerate() {
            for (j, b) in elems.iter().enumerate() {
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| (x + y) % p).collect();
                add[i * q + j] = digits_to_index(&sum, p) as u16;
                let prod = poly_mulmod(a, b, &params.reduction_poly, p);
                mul[i * q + j] = digits_to_index(&prod, p) as u16;
            }
        }
        let neg = (0..q)
            .map(|i| {
                let d: Vec<u32> = elems[i].iter().map(|&x| (p - x) % p).collect();
                digits_to_index(&d, p) as u16
            })
            .collect();
        Ok(Self { params, order: q, add, mul, neg })
    }

    pub fn with_default_poly(p: u32, s: usize) -> Result<Self, FieldError> {
        Self::new(FieldParams::with_default_poly(p, s)?)
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn s(&self) -> usize {
        self.params.s
    }

    /// `p^s`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn zero(&self) -> GfElem {
        GfElem::zero(self.s())
    }

    pub fn one(&self) -> GfElem {
        GfElem::one(self.s())
    }

    /// Checks that `a` is a digit vector of this field.
    pub fn check(&self, a: &GfElem) -> Result<(), FieldError> {
        if a.digits.len() != self.s() || a.digits.iter().any(|&d| d >= self.p()) {
            return Err(FieldError::ForeignElement {
                digits: a.digits.clone(),
                p: self.p(),
                s: self.s(),
            });
        }
        Ok(())
    }

    pub fn add(&self, a: &GfElem, b: &GfElem) -> Result<GfElem, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.elem(self.add_idx(self.index_unchecked(a), self.index_unchecked(b))))
    }

    pub fn mul(&self, a: &GfElem, b: &GfElem) -> Result<GfElem, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.elem(self.mul_idx(self.index_unchecked(a), self.index_unchecked(b))))
    }

    pub fn neg(&self, a: &GfElem) -> Result<GfElem, FieldError> {
        self.check(a)?;
        Ok(self.elem(self.neg_idx(self.index_unchecked(a))))
    }

    /// All `p^s` elements in lexicographic digit order, zero first.
    pub fn enumerate(&self) -> Vec<GfElem> {
        (0..self.order).map(|i| self.elem(i)).collect()
    }

    pub fn index(&self, a: &GfElem) -> Result<usize, FieldError> {
        self.check(a)?;
        Ok(self.index_unchecked(a))
    }

    fn index_unchecked(&self, a: &GfElem) -> usize {
        digits_to_index(&a.digits, self.p())
    }

    pub fn elem(&self, index: usize) -> GfElem {
        GfElem { digits: index_to_digits(index, self.p(), self.s()) }
    }

    #[inline]
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b] as usize
    }

    #[inline]
    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    #[inline]
    pub fn mul_idx(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn neg_idx(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    /// The digit-wise pairing `sum_l u^(l) x^(l) mod p` between two elements.
    /// This is the exponent of `exp(2 pi i / p)` in `(r^u, x g_k)`.
    pub fn pairing_idx(&self, u: usize, x: usize) -> u32 {
        let p = self.p() as usize;
        let (mut u, mut x, mut acc) = (u, x, 0usize);
        for _ in 0..self.s() {
            acc += (u % p) * (x % p);
            u /= p;
            x /= p;
        }
        (acc % p) as u32
    }
}

pub(crate) fn digits_to_index(digits: &[u32], p: u32) -> usize {
    digits.iter().fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

pub(crate) fn index_to_digits(mut index: usize, p: u32, s: usize) -> Vec<u32> {
    let mut digits = vec![0u32; s];
    for slot in digits.iter_mut().rev() {
        *slot = (index % p as usize) as u32;
        index /= p as usize;
    }
    digits
}

/// Product of two polynomials of degree < s, reduced modulo the monic
/// `x^s + poly`.
fn poly_mulmod(a: &[u32], b: &[u32], poly: &[u32], p: u32) -> Vec<u32> {
    let s = poly.len();
    let mut prod = vec![0u64; 2 * s];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    // x^s = -poly(x)
    for deg in (s..2 * s).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (k, &m) in poly.iter().enumerate() {
            let sub = c * m as u64 % p as u64;
            prod[deg - s + k] = (prod[deg - s + k] + p as u64 - sub) % p as u64;
        }
    }
    prod.truncate(s);
    prod.into_iter().map(|c| c as u32).collect()
}

/// Remainder of `f` (coefficients low to high, arbitrary degree) divided by
/// the monic `g` (coefficients low to high, leading 1 included).
fn poly_rem(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = r.pop().unwrap_or(0);
        if lead == 0 {
            continue;
        }
        let shift = r.len() - dg;
        for (k, &gk) in g[..dg].iter().enumerate() {
            let sub = lead * gk as u64 % p as u64;
            r[shift + k] = (r[shift + k] + p as u64 - sub) % p as u64;
        }
    }
    r.into_iter().map(|c| c as u32).collect()
}

/// Trial division by every monic polynomial of degree `1..=s/2`.
pub fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let s = poly.len();
    let mut f = poly.to_vec();
    f.push(1);
    for deg in 1..=s / 2 {
        let count = (p as usize).pow(deg as u32);
        for i in 0..count {
            let mut g = index_to_digits(i, p, deg);
            g.reverse();
            g.push(1);
            if poly_rem(&f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, s: usize) -> Vec<u32> {
    let count = (p as usize).pow(s as u32);
    (0..count)
        .map(|i| index_to_digits(i, p, s))
        .find(|poly| is_irreducible(p, poly))
        .expect("an irreducible polynomial of every degree exists")
}
