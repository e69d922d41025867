//! Step scaling functions built from a λ-array, and their verification.
//!
//! Frequency tables are indexed by exponent tuples `(a_{-N}, ..., a_{M-1})`,
//! one entry per coset of `F_{-N}^perp` in `F_M^perp`. Time tables are
//! indexed by digit tuples `(x_{-N}, ..., x_{M-1})`, one entry per coset of
//! `F_M` in `F_{-N}`, represented by the element with all other digits zero.
//! Haar measure is normalized so that `F_0` has measure 1; the dual measure
//! gives `F_0^perp` measure 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::CharacterWindow;
use crate::chrestenson::{transform, Sign};
use crate::galois::{FieldParams, GaloisField};
use crate::localfield::{shift_set, LaurentElem};
use crate::maskdyn::LambdaArray;
use crate::tuple::TupleSpace;
use crate::weight::Weight;

/// Tolerance for frequency-domain products and sums in float mode.
pub const FREQ_TOL: f64 = 1e-12;
/// Tolerance for time-domain checks (transforms accumulate rounding).
pub const TIME_TOL: f64 = 1e-9;

/// Phase convention for `m_0` given `|m_0|^2 = λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    NonnegativeRoot,
}

/// `m_0` on the `(N+1)`-windows `(a_{-N}, ..., a_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskFunction<W> {
    pub params: FieldParams,
    pub n: usize,
    pub values: Vec<Complex64>,
    /// `|m_0|^2`, kept in the λ arithmetic.
    pub power: Vec<W>,
}

pub fn mask_from_lambda<W: Weight>(lam: &LambdaArray<W>, phase: Phase) -> MaskFunction<W> {
    let values = match phase {
        Phase::NonnegativeRoot => lam.values().iter().map(|v| Complex64::new(v.to_f64().sqrt(), 0.0)).collect(),
    };
    MaskFunction { params: lam.params().clone(), n: lam.n(), values, power: lam.values().to_vec() }
}

/// `phi^` on `F_M^perp / F_{-N}^perp`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqStepFunction<W> {
    pub params: FieldParams,
    pub n: usize,
    pub m: usize,
    pub values: Vec<Complex64>,
    /// `|phi^|^2`, exact when `W` is.
    pub power: Vec<W>,
}

impl<W: Weight> FreqStepFunction<W> {
    pub fn space(&self) -> TupleSpace {
        TupleSpace::new(self.params.order(), self.n + self.m)
    }

    pub fn entries(&self) -> Vec<StepEntry> {
        step_entries(&self.params, self.space(), &self.values)
    }
}

impl FreqStepFunction<f64> {
    /// A table given only by its values; the power table is `|v|^2`.
    pub fn from_values(params: FieldParams, n: usize, m: usize, values: Vec<Complex64>) -> Self {
        let power = values.iter().map(|v| v.norm_sqr()).collect();
        Self { params, n, m, values, power }
    }
}

/// `phi` on `F_{-N} / F_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeStepFunction {
    pub params: FieldParams,
    pub n: usize,
    pub m: usize,
    pub values: Vec<Complex64>,
}

impl TimeStepFunction {
    pub fn space(&self) -> TupleSpace {
        TupleSpace::new(self.params.order(), self.n + self.m)
    }

    pub fn entries(&self) -> Vec<StepEntry> {
        step_entries(&self.params, self.space(), &self.values)
    }

    /// `||phi||_2^2 = |F_M| * sum |phi|^2`.
    pub fn norm_sqr(&self) -> f64 {
        let q = self.params.order() as f64;
        q.powi(-(self.m as i32)) * self.values.iter().map(Complex64::norm_sqr).sum::<f64>()
    }
}

/// One table row in the JSON form of a step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub window: Vec<Vec<u32>>,
    pub re: f64,
    pub im: f64,
}

fn step_entries(params: &FieldParams, space: TupleSpace, values: &[Complex64]) -> Vec<StepEntry> {
    let field = GaloisField::new(params.clone()).expect("validated params");
    values
        .iter()
        .enumerate()
        .map(|(i, v)| StepEntry {
            window: space.decode(i).into_iter().map(|e| field.elem(e).digits().to_vec()).collect(),
            re: v.re,
            im: v.im,
        })
        .collect()
}

/// Index of the `(N+1)`-window `(a_{j-N}, ..., a_j)` inside a frequency
/// tuple of length `len`, zero-padded past the end.
#[inline]
fn window_at(t: usize, j: usize, q: usize, n: usize, len: usize) -> usize {
    let padded = t * q.pow(n as u32);
    padded / q.pow((len - j - 1) as u32) % q.pow(n as u32 + 1)
}

/// `phi^(chi) = prod_{k>=0} m_0(chi A^{-k})`, which on `F_M^perp` reduces to
/// the product of `m_0` over the `M + N` sliding windows of the zero-padded
/// exponent string.
pub fn build_phi_hat<W: Weight>(m0: &MaskFunction<W>, m: usize) -> FreqStepFunction<W> {
    let q = m0.params.order();
    let n = m0.n;
    let len = n + m;
    let size = q.pow(len as u32);
    let mut values = Vec::with_capacity(size);
    let mut power = Vec::with_capacity(size);
    for t in 0..size {
        let mut v = Complex64::new(1.0, 0.0);
        let mut pw = W::one();
        for j in 0..len {
            let w = window_at(t, j, q, n, len);
            if m0.power[w].is_zero() {
                v = Complex64::default();
                pw = W::zero();
                break;
            }
            v *= m0.values[w];
            pw = pw * m0.power[w].clone();
        }
        values.push(v);
        power.push(pw);
    }
    FreqStepFunction { params: m0.params.clone(), n, m, values, power }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixSum {
    pub prefix: Vec<Vec<u32>>,
    /// `"num/den"` in exact mode, a float otherwise.
    pub sum: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqReport {
    pub pass: bool,
    pub exact: bool,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub sums: Vec<PrefixSum>,
}

/// For every prefix `(a_{-N}, ..., a_{-1})`, the sum of `|phi^|^2` over all
/// suffixes `(a_0, ..., a_{M-1})`; orthonormal shifts need every sum to be 1.
pub fn prefix_sums<W: Weight>(phi: &FreqStepFunction<W>) -> Vec<W> {
    let q = phi.params.order();
    let block = q.pow(phi.m as u32);
    phi.power
        .chunks(block)
        .map(|chunk| chunk.iter().fold(W::zero(), |acc, v| acc + v.clone()))
        .collect()
}

pub fn check_orthonormality_freq<W: Weight>(phi: &FreqStepFunction<W>) -> FreqReport {
    let field = GaloisField::new(phi.params.clone()).expect("validated params");
    let prefix_space = TupleSpace::new(field.order(), phi.n);
    let sums = prefix_sums(phi);
    let pass = sums.iter().all(|s| s.is_one_within(FREQ_TOL));
    let max_deviation = sums.iter().map(|s| (s.to_f64() - 1.0).abs()).fold(0.0, f64::max);
    FreqReport {
        pass,
        exact: W::EXACT,
        tolerance: if W::EXACT { 0.0 } else { FREQ_TOL },
        max_deviation,
        sums: sums
            .iter()
            .enumerate()
            .map(|(i, s)| PrefixSum {
                prefix: prefix_space.decode(i).into_iter().map(|e| field.elem(e).digits().to_vec()).collect(),
                sum: s.to_json(),
            })
            .collect(),
    }
}

/// `|phi^| = 1` on the zero window, the step-resolution form of
/// `lim |phi^(p^j xi)| = 1`.
pub fn check_limit_condition<W: Weight>(phi: &FreqStepFunction<W>) -> bool {
    (phi.values[0].norm() - 1.0).abs() <= FREQ_TOL
}

/// `phi(x) = |F_{-N}^perp| * sum_chi phi^(chi) chi(x)`, by the fast transform.
pub fn inverse_transform<W: Weight>(phi: &FreqStepFunction<W>) -> TimeStepFunction {
    let q = phi.params.order() as f64;
    let mut values = phi.values.clone();
    transform(&mut values, phi.params.p, (phi.n + phi.m) * phi.params.s, Sign::Positive);
    let scale = q.powi(-(phi.n as i32));
    values.iter_mut().for_each(|v| *v *= scale);
    TimeStepFunction { params: phi.params.clone(), n: phi.n, m: phi.m, values }
}

/// `phi^(chi) = |F_M| * sum_x phi(x) conj(chi(x))`.
pub fn forward_transform(phi: &TimeStepFunction) -> FreqStepFunction<f64> {
    let q = phi.params.order() as f64;
    let mut values = phi.values.clone();
    transform(&mut values, phi.params.p, (phi.n + phi.m) * phi.params.s, Sign::Negative);
    let scale = q.powi(-(phi.m as i32));
    values.iter_mut().for_each(|v| *v *= scale);
    FreqStepFunction::from_values(phi.params.clone(), phi.n, phi.m, values)
}

/// `sub[a * q^N + b]` is the tuple `a - b` over `N`-tuples.
fn tuple_difference_table(field: &GaloisField, n: usize) -> Vec<usize> {
    let space = TupleSpace::new(field.order(), n);
    let size = space.size();
    let mut table = vec![0; size * size];
    for a in 0..size {
        let da = space.decode(a);
        for b in 0..size {
            let db = space.decode(b);
            let diff: Vec<usize> = da.iter().zip(&db).map(|(&x, &y)| field.sub_idx(x, y)).collect();
            table[a * size + b] = space.encode(&diff);
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftProduct {
    pub shift: LaurentElem,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeReport {
    pub pass: bool,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub inner_products: Vec<ShiftProduct>,
}

/// `<phi, phi(. - h)>` for every shift `h` in `H_0^(N)`; shifts with digits
/// below index `-N` move the support off `F_{-N}` and are trivially zero.
pub fn check_orthonormality_time(phi: &TimeStepFunction) -> TimeReport {
    let field = GaloisField::new(phi.params.clone()).expect("validated params");
    let q = field.order();
    let heads = q.pow(phi.n as u32);
    let tails = q.pow(phi.m as u32);
    let sub = tuple_difference_table(&field, phi.n);
    let measure = (q as f64).powi(-(phi.m as i32));
    let shifts = shift_set(&field, phi.n as i64).expect("N >= 1").elements;
    let mut inner_products = Vec::with_capacity(heads);
    let mut max_deviation = 0.0f64;
    for (h, shift) in shifts.into_iter().enumerate() {
        let mut acc = Complex64::default();
        for head in 0..heads {
            let moved = sub[head * heads + h];
            let a = &phi.values[head * tails..(head + 1) * tails];
            let b = &phi.values[moved * tails..(moved + 1) * tails];
            acc += a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<Complex64>();
        }
        acc *= measure;
        let expected = if h == 0 { 1.0 } else { 0.0 };
        max_deviation = max_deviation.max((acc - expected).norm());
        inner_products.push(ShiftProduct { shift, re: acc.re, im: acc.im });
    }
    TimeReport { pass: max_deviation <= TIME_TOL, tolerance: TIME_TOL, max_deviation, inner_products }
}

/// The constant `c` in `m_0(chi) = (1/c) sum_h beta_h conj((chi A^{-1}, h))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `c = p^s`, which matches the measure scaling of the dilation.
    #[default]
    FieldOrder,
    /// `c = p`.
    Prime,
}

impl Normalization {
    pub fn constant(self, params: &FieldParams) -> f64 {
        match self {
            Normalization::FieldOrder => params.order() as f64,
            Normalization::Prime => params.p as f64,
        }
    }
}

/// `beta_h` for `h` in `H_0^(N+1)`, in the order of [`shift_set`].
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementCoeffs {
    pub params: FieldParams,
    pub n: usize,
    pub normalization: Normalization,
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementJson {
    pub normalization: Normalization,
    pub constant: f64,
    pub coeffs: Vec<ShiftProduct>,
}

impl RefinementCoeffs {
    pub fn constant(&self) -> f64 {
        self.normalization.constant(&self.params)
    }

    /// `m_0` recomputed from `beta` by summing characters directly.
    pub fn reconstruct_mask(&self) -> Vec<Complex64> {
        let field = GaloisField::new(self.params.clone()).expect("validated params");
        let q = field.order();
        let windows = TupleSpace::new(q, self.n + 1);
        let shifts = shift_set(&field, self.n as i64 + 1).expect("N >= 0").elements;
        let c = self.constant();
        (0..windows.size())
            .map(|w| {
                let exps = windows.decode(w).into_iter().map(|e| field.elem(e)).collect();
                let chi = CharacterWindow::from_exponents(-(self.n as i64), exps).undilate();
                let sum: Complex64 = shifts
                    .iter()
                    .zip(&self.coeffs)
                    .map(|(h, b)| b * chi.eval(h, &field).expect("same field").to_complex().conj())
                    .sum();
                sum / c
            })
            .collect()
    }

    pub fn to_json(&self) -> RefinementJson {
        let field = GaloisField::new(self.params.clone()).expect("validated params");
        let shifts = shift_set(&field, self.n as i64 + 1).expect("N >= 0").elements;
        RefinementJson {
            normalization: self.normalization,
            constant: self.constant(),
            coeffs: shifts
                .into_iter()
                .zip(&self.coeffs)
                .map(|(shift, b)| ShiftProduct { shift, re: b.re, im: b.im })
                .collect(),
        }
    }
}

/// Inverts the mask expansion by the fast transform over `H_0^(N+1)`.
pub fn refinement_coeffs<W: Weight>(m0: &MaskFunction<W>) -> RefinementCoeffs {
    refinement_coeffs_with(m0, Normalization::FieldOrder)
}

pub fn refinement_coeffs_with<W: Weight>(m0: &MaskFunction<W>, normalization: Normalization) -> RefinementCoeffs {
    let q = m0.params.order() as f64;
    let mut coeffs = m0.values.clone();
    transform(&mut coeffs, m0.params.p, (m0.n + 1) * m0.params.s, Sign::Positive);
    let scale = normalization.constant(&m0.params) * q.powi(-(m0.n as i32 + 1));
    coeffs.iter_mut().for_each(|b| *b *= scale);
    RefinementCoeffs { params: m0.params.clone(), n: m0.n, normalization, coeffs }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub pass: bool,
    pub tolerance: f64,
    /// `max |phi(x) - sum_h beta_h phi(Ax - h)|`.
    pub time_residual: f64,
    /// `max |phi^(chi) - m_0(chi) phi^(chi A^{-1})|`.
    pub freq_residual: f64,
    /// `max |m_0 - m_0 reconstructed from beta|`.
    pub mask_residual: f64,
}

/// Checks the refinement equation in both domains and the mask expansion.
pub fn check_refinement<W: Weight>(
    phi_hat: &FreqStepFunction<W>,
    phi: &TimeStepFunction,
    m0: &MaskFunction<W>,
    beta: &RefinementCoeffs,
) -> RefinementReport {
    let time_residual = refinement_residual_time(phi, beta);
    let freq_residual = refinement_residual_freq(phi_hat, m0);
    let mask_residual = beta
        .reconstruct_mask()
        .iter()
        .zip(&m0.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let pass = time_residual <= TIME_TOL && freq_residual <= FREQ_TOL && mask_residual <= TIME_TOL;
    RefinementReport { pass, tolerance: TIME_TOL, time_residual, freq_residual, mask_residual }
}

/// Evaluates `sum_h beta_h phi(Ax - h)` on every coset of `F_{M+1}` in
/// `F_{-N}`: the right-hand side also sees the digit `x_M`.
pub fn refinement_residual_time(phi: &TimeStepFunction, beta: &RefinementCoeffs) -> f64 {
    let field = GaloisField::new(phi.params.clone()).expect("validated params");
    let q = field.order();
    let n = phi.n;
    let heads = q.pow(n as u32);
    let tails = q.pow(phi.m as u32);
    let sub = tuple_difference_table(&field, n);
    let len = n + phi.m;
    let mut worst = 0.0f64;
    // x = (x_{-N} | x_{-N+1} .. x_0 | x_1 .. x_M)
    for x0 in 0..q {
        let row = &beta.coeffs[x0 * heads..(x0 + 1) * heads];
        for head in 0..heads {
            for tail in 0..tails {
                let x = (x0 * heads + head) * tails + tail;
                let lhs = phi.values[x / q];
                let rhs: Complex64 = row
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| b.norm_sqr() > 0.0)
                    .map(|(h, b)| b * phi.values[sub[head * heads + h] * tails + tail])
                    .sum();
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    debug_assert_eq!(q.pow(len as u32 + 1), q * heads * tails);
    worst
}

/// `phi^(chi) = m_0(chi) phi^(chi A^{-1})` on every frequency window.
pub fn refinement_residual_freq<W: Weight>(phi_hat: &FreqStepFunction<W>, m0: &MaskFunction<W>) -> f64 {
    let q = phi_hat.params.order();
    let n = phi_hat.n;
    let len = n + phi_hat.m;
    let rest = q.pow(len as u32 - 1);
    (0..phi_hat.values.len())
        .map(|t| {
            let mask = m0.values[window_at(t, 0, q, n, len)];
            let shifted = phi_hat.values[(t % rest) * q];
            (phi_hat.values[t] - mask * shifted).norm()
        })
        .fold(0.0, f64::max)
}
