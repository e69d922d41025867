//! Characters of the additive group F^(s)+ written over Rademacher functions.
//!
//! A character is a finite product `prod_k r_k^{a_k}` and is stored as its
//! exponent window. Values are kept as exponents of a primitive p-th root of
//! unity so that every group identity below holds exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::galois::{FieldError, GaloisField, GfElem};
use crate::localfield::{IndexWindow, LaurentElem, LocalFieldError};

/// `exp(2 pi i * exponent / p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    pub p: u32,
    pub exponent: u32,
}

impl RootOfUnity {
    pub fn one(p: u32) -> Self {
        Self { p, exponent: 0 }
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0
    }

    pub fn to_complex(self) -> Complex64 {
        root_of_unity(self.p, self.exponent as usize)
    }
}

impl std::ops::Mul for RootOfUnity {
    type Output = RootOfUnity;

    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        Self { p: self.p, exponent: (self.exponent + rhs.exponent) % self.p }
    }
}

/// `exp(2 pi i k / p)`, exact whenever `4k/p` is an integer.
pub fn root_of_unity(p: u32, k: usize) -> Complex64 {
    let p = p as usize;
    let k = k % p;
    if (4 * k) % p == 0 {
        return match 4 * k / p {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / p as f64)
}

/// All p-th roots of unity, `table[k] = exp(2 pi i k / p)`.
pub fn root_table(p: u32) -> Vec<Complex64> {
    (0..p as usize).map(|k| root_of_unity(p, k)).collect()
}

/// The exponent window `(a_lo, ..., a_hi)` of `prod_k r_k^{a_k}`.
///
/// Canonical: first and last stored exponents are nonzero; the trivial
/// character is the empty window.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawCharacter")]
pub struct CharacterWindow {
    lo: i64,
    exponents: Vec<GfElem>,
}

#[derive(Deserialize)]
struct RawCharacter {
    lo: i64,
    exponents: Vec<GfElem>,
}

impl From<RawCharacter> for CharacterWindow {
    fn from(raw: RawCharacter) -> Self {
        CharacterWindow::from_exponents(raw.lo, raw.exponents)
    }
}

impl CharacterWindow {
    /// The trivial character `e`.
    pub fn trivial() -> Self {
        Self { lo: 0, exponents: Vec::new() }
    }

    pub fn from_exponents(lo: i64, exponents: Vec<GfElem>) -> Self {
        let elem = LaurentElem::from_digits(lo, exponents);
        Self { lo: elem.lo().unwrap_or(0), exponents: elem.digits().to_vec() }
    }

    /// `r_k^u`.
    pub fn rademacher(k: i64, u: GfElem) -> Self {
        Self::from_exponents(k, vec![u])
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn lo(&self) -> Option<i64> {
        (!self.is_trivial()).then_some(self.lo)
    }

    pub fn hi(&self) -> Option<i64> {
        (!self.is_trivial()).then(|| self.lo + self.exponents.len() as i64 - 1)
    }

    pub fn exponents(&self) -> &[GfElem] {
        &self.exponents
    }

    pub fn exponent(&self, k: i64, s: usize) -> GfElem {
        if self.is_trivial() || k < self.lo {
            return GfElem::zero(s);
        }
        self.exponents.get((k - self.lo) as usize).cloned().unwrap_or_else(|| GfElem::zero(s))
    }

    fn as_elem(&self) -> LaurentElem {
        LaurentElem::from_digits(self.lo, self.exponents.clone())
    }

    fn from_elem(elem: LaurentElem) -> Self {
        Self { lo: elem.lo().unwrap_or(0), exponents: elem.digits().to_vec() }
    }

    /// `(chi, x) = prod_k prod_l exp(2 pi i u_k^(l) x_k^(l) / p)`.
    pub fn eval(&self, x: &LaurentElem, field: &GaloisField) -> Result<RootOfUnity, FieldError> {
        let p = field.p();
        let mut acc = 0u64;
        for (offset, u) in self.exponents.iter().enumerate() {
            let k = self.lo + offset as i64;
            let xk = x.digit(k, field.s());
            field.check(u)?;
            field.check(&xk)?;
            acc += u.digits().iter().zip(xk.digits()).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>();
        }
        Ok(RootOfUnity { p, exponent: (acc % p as u64) as u32 })
    }

    /// Pointwise product of characters: exponentwise addition.
    pub fn mul(&self, other: &Self, field: &GaloisField) -> Result<Self, LocalFieldError> {
        Ok(Self::from_elem(self.as_elem().add(&other.as_elem(), field)?))
    }

    /// `chi^{-1}`, the complex conjugate character.
    pub fn inverse(&self, field: &GaloisField) -> Result<Self, LocalFieldError> {
        Ok(Self::from_elem(self.as_elem().neg(field)?))
    }

    /// `chi^b = prod_k r_k^{a_k b}`.
    pub fn pow(&self, b: &GfElem, field: &GaloisField) -> Result<Self, LocalFieldError> {
        Ok(Self::from_elem(self.as_elem().scale(b, field)?))
    }

    /// `chi A`, defined by `(chi A, x) = (chi, A x)`: since `A` lowers digit
    /// indices by one, the exponent at index `k` moves to `k + 1`.
    pub fn dilate(&self) -> Self {
        Self::from_elem(self.as_elem().undilate())
    }

    /// `chi A^{-1}`.
    pub fn undilate(&self) -> Self {
        Self::from_elem(self.as_elem().dilate())
    }

    /// `dilate`, refusing to leave the session window.
    pub fn dilate_within(&self, window: &IndexWindow) -> Result<Self, LocalFieldError> {
        let out = self.as_elem().undilate();
        window.check(&out)?;
        Ok(Self::from_elem(out))
    }

    /// Membership in the annihilator `F_n^perp`: every exponent at an index
    /// `>= n` vanishes.
    pub fn in_annihilator(&self, n: i64) -> bool {
        self.hi().is_none_or(|hi| hi < n)
    }
}
