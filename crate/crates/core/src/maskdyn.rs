//! Squared mask moduli on the mask digraph and the array dynamics they drive.
//!
//! `λ[a_{-N}, ..., a_{-1}, a_0]` is stored densely over `(N+1)`-tuples; the
//! first `N` entries form the digraph window and `a_0` picks the target. The
//! state arrays `A^(n)` live on `N`-tuples:
//!
//! ```text
//! a0[i_1..i_N] = λ[i_1..i_N, 0] λ[i_2..i_N, 0, 0] ... λ[i_N, 0..0]
//! an[i_1..i_N] = sum_j λ[i_1..i_N, j] a(n-1)[i_2..i_N, j]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldParams, GaloisField, GfElem};
use crate::tuple::TupleSpace;
use crate::validtree::MaskDigraph;
use crate::weight::{parse_weight, Weight};

/// Tolerance for float-mode unit sums and the all-ones test.
pub const FLOAT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskError {
    #[error("mask constraint violated at window {window:?}: {reason}")]
    Constraint { window: Vec<Vec<u32>>, reason: String },
    #[error("array dimensions differ: {0}")]
    Dimension(String),
    #[error("state component {window:?} = {value} left [0, 1] at step {step}")]
    Inconsistent { window: Vec<Vec<u32>>, value: f64, step: usize },
    #[error("no all-ones state within {bound} steps")]
    BoundExceeded { bound: usize, trajectory: Vec<Vec<f64>> },
    #[error("malformed table: {0}")]
    Format(String),
}

/// How to distribute unit mass over each window's digraph successors.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy<W> {
    /// All mass on the tree-parent successor.
    Haar,
    /// Equal mass on every successor.
    Uniform,
    /// A random point of the simplex per window.
    Dirichlet { seed: u64 },
    /// A caller-supplied dense table over `(N+1)`-tuples.
    Explicit(Vec<W>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaArray<W> {
    params: FieldParams,
    n: usize,
    q: usize,
    values: Vec<W>,
}

impl<W: Weight> LambdaArray<W> {
    /// Wraps a table without checking the mask constraints. Useful for
    /// negative controls; [`assign_lambda`] is the checked path.
    pub fn new_unchecked(params: FieldParams, n: usize, values: Vec<W>) -> Result<Self, MaskError> {
        let q = params.order();
        let expected = q.pow(n as u32 + 1);
        if values.len() != expected {
            return Err(MaskError::Dimension(format!("expected {expected} entries, got {}", values.len())));
        }
        Ok(Self { params, n, q, values })
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn values(&self) -> &[W] {
        &self.values
    }

    /// `λ` at the `(N+1)`-tuple with dense index `idx`.
    pub fn get(&self, idx: usize) -> &W {
        &self.values[idx]
    }

    pub fn space(&self) -> TupleSpace {
        TupleSpace::new(self.q, self.n + 1)
    }

    /// Re-checks every constraint against a digraph.
    pub fn check_against(&self, graph: &MaskDigraph) -> Result<(), MaskError> {
        if graph.q != self.q || graph.n != self.n {
            return Err(MaskError::Dimension("lambda and digraph disagree on q or N".into()));
        }
        check_constraints(&self.values, graph, &self.params)
    }

    pub fn map<V: Weight>(&self, f: impl Fn(&W) -> V) -> LambdaArray<V> {
        LambdaArray {
            params: self.params.clone(),
            n: self.n,
            q: self.q,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn to_json(&self) -> LambdaJson {
        let field = GaloisField::new(self.params.clone()).expect("validated params");
        let space = self.space();
        let entries = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| TableEntry { window: window_digits(&field, &space, i), value: v.to_json() })
            .collect();
        LambdaJson { params: self.params.clone(), n: self.n, entries }
    }

    /// Reads a table; missing entries are zero, except that the root row
    /// defaults to `λ[0..0] = 1` when no root entry is given.
    pub fn dense_from_json(json: &LambdaJson) -> Result<(FieldParams, usize, Vec<W>), MaskError> {
        let field = GaloisField::new(json.params.clone()).map_err(|e| MaskError::Format(e.to_string()))?;
        let q = field.order();
        let space = TupleSpace::new(q, json.n + 1);
        let mut values = vec![W::zero(); space.size()];
        let mut root_given = false;
        for entry in &json.entries {
            if entry.window.len() != json.n + 1 {
                return Err(MaskError::Format(format!("window {:?} must have N+1 entries", entry.window)));
            }
            let idx = entry
                .window
                .iter()
                .map(|d| field.index(&GfElem::from_digits(d.clone())))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| MaskError::Format(e.to_string()))?;
            let value = parse_weight::<W>(&entry.value)
                .ok_or_else(|| MaskError::Format(format!("bad value {}", entry.value)))?;
            let i = space.encode(&idx);
            root_given |= i < q;
            values[i] = value;
        }
        if !root_given {
            values[0] = W::one();
        }
        Ok((json.params.clone(), json.n, values))
    }

    pub fn from_json_unchecked(json: &LambdaJson) -> Result<Self, MaskError> {
        let (params, n, values) = Self::dense_from_json(json)?;
        Self::new_unchecked(params, n, values)
    }
}

fn window_digits(field: &GaloisField, space: &TupleSpace, idx: usize) -> Vec<Vec<u32>> {
    space.decode(idx).into_iter().map(|e| field.elem(e).digits().to_vec()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub window: Vec<Vec<u32>>,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaJson {
    pub params: FieldParams,
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: Vec<TableEntry>,
}

fn check_constraints<W: Weight>(values: &[W], graph: &MaskDigraph, params: &FieldParams) -> Result<(), MaskError> {
    let q = graph.q;
    let field = GaloisField::new(params.clone()).map_err(|e| MaskError::Format(e.to_string()))?;
    let space = TupleSpace::new(q, graph.n + 1);
    let row_space = TupleSpace::new(q, graph.n);
    let violation = |w: usize, reason: String| MaskError::Constraint {
        window: window_digits(&field, &row_space, w),
        reason,
    };
    if let Some(i) = values.iter().position(|v| !v.in_unit_interval(FLOAT_TOL)) {
        return Err(MaskError::Constraint {
            window: window_digits(&field, &space, i),
            reason: format!("value {} outside [0, 1]", values[i].to_f64()),
        });
    }
    for w in 0..row_space.size() {
        let row = &values[w * q..(w + 1) * q];
        let allowed: &[usize] = if w == 0 { &[0] } else { &graph.successors[w] };
        if let Some(a0) = (0..q).find(|a0| !allowed.contains(a0) && !row[*a0].is_zero_within(0.0)) {
            let total = row.iter().fold(W::zero(), |acc, v| acc + v.clone());
            return Err(violation(
                w,
                format!("nonzero value at a_0 = {a0} outside the digraph successors (row sum {})", total.to_f64()),
            ));
        }
        let sum = allowed.iter().fold(W::zero(), |acc, &a0| acc + row[a0].clone());
        if !sum.is_one_within(FLOAT_TOL) {
            return Err(violation(w, format!("successor values sum to {}", sum.to_f64())));
        }
    }
    Ok(())
}

/// Assigns `λ` so that each window's successor values sum to one and vanish
/// off the digraph; the root row is `λ[0..0] = 1`.
pub fn assign_lambda<W: Weight>(
    graph: &MaskDigraph,
    params: &FieldParams,
    strategy: Strategy<W>,
) -> Result<LambdaArray<W>, MaskError> {
    let q = graph.q;
    if params.order() != q {
        return Err(MaskError::Dimension("field order does not match the digraph".into()));
    }
    let rows = q.pow(graph.n as u32);
    let mut values = vec![W::zero(); rows * q];
    values[0] = W::one();
    match strategy {
        Strategy::Haar => {
            for w in 1..rows {
                let a0 = graph.tree_parent[w].expect("non-root window");
                values[w * q + a0] = W::one();
            }
        }
        Strategy::Uniform => {
            for w in 1..rows {
                let succ = &graph.successors[w];
                for &a0 in succ {
                    values[w * q + a0] = W::from_ratio(1, succ.len() as u64);
                }
            }
        }
        Strategy::Dirichlet { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for w in 1..rows {
                let succ = &graph.successors[w];
                if succ.len() == 1 {
                    values[w * q + succ[0]] = W::one();
                    continue;
                }
                let draws: Vec<W> = succ
                    .iter()
                    .map(|_| {
                        let x: f64 = Exp1.sample(&mut rng);
                        W::from_f64(x.max(f64::MIN_POSITIVE))
                    })
                    .collect();
                let total = draws.iter().fold(W::zero(), |acc, d| acc + d.clone());
                for (&a0, d) in succ.iter().zip(&draws) {
                    values[w * q + a0] = d.div(&total);
                }
            }
        }
        Strategy::Explicit(table) => {
            if table.len() != values.len() {
                return Err(MaskError::Dimension(format!(
                    "explicit table has {} entries, expected {}",
                    table.len(),
                    values.len()
                )));
            }
            values = table;
        }
    }
    check_constraints(&values, graph, params)?;
    Ok(LambdaArray { params: params.clone(), n: graph.n, q, values })
}

/// One of the arrays `A^(n)` over `N`-tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct StateArray<W> {
    pub n: usize,
    pub q: usize,
    pub values: Vec<W>,
}

impl<W: Weight> StateArray<W> {
    pub fn is_all_ones(&self) -> bool {
        self.values.iter().all(|v| v.is_one_within(FLOAT_TOL))
    }

    /// First window of level `<= max_level` whose component is not 1.
    pub fn first_non_one_up_to(&self, levels: &[usize], max_level: usize) -> Option<usize> {
        (0..self.values.len()).find(|&w| levels[w] <= max_level && !self.values[w].is_one_within(FLOAT_TOL))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Weight::to_f64).collect()
    }

    pub fn to_json(&self, field: &GaloisField) -> StateJson {
        let space = TupleSpace::new(self.q, self.n);
        StateJson {
            n: self.n,
            entries: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| TableEntry { window: window_digits(field, &space, i), value: v.to_json() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: Vec<TableEntry>,
}

/// `A^(0)`: the product of `N` zero-padded sliding windows.
pub fn init_state<W: Weight>(lam: &LambdaArray<W>) -> StateArray<W> {
    let (q, n) = (lam.q, lam.n);
    let size = q.pow(n as u32);
    let values = (0..size)
        .map(|w| {
            (0..n).fold(W::one(), |acc, t| {
                let suffix = w % q.pow((n - t) as u32);
                acc * lam.values[suffix * q.pow(t as u32 + 1)].clone()
            })
        })
        .collect();
    StateArray { n, q, values }
}

/// `A^(n)` from `A^(n-1)`.
pub fn step_dynamics<W: Weight>(lam: &LambdaArray<W>, prev: &StateArray<W>) -> Result<StateArray<W>, MaskError> {
    step_at(lam, prev, 0)
}

fn step_at<W: Weight>(lam: &LambdaArray<W>, prev: &StateArray<W>, step: usize) -> Result<StateArray<W>, MaskError> {
    let (q, n) = (lam.q, lam.n);
    if prev.q != q || prev.n != n {
        return Err(MaskError::Dimension(format!(
            "state is over ({}, {}), lambda over ({q}, {n})",
            prev.q, prev.n
        )));
    }
    let shift = q.pow(n as u32 - 1);
    let mut values = Vec::with_capacity(prev.values.len());
    for w in 0..prev.values.len() {
        let base = (w % shift) * q;
        let row = &lam.values[w * q..(w + 1) * q];
        let v = (0..q)
            .filter(|&j| !row[j].is_zero())
            .fold(W::zero(), |acc, j| acc + row[j].clone() * prev.values[base + j].clone());
        if !v.in_unit_interval(FLOAT_TOL) {
            let field = GaloisField::new(lam.params.clone()).expect("validated params");
            return Err(MaskError::Inconsistent {
                window: window_digits(&field, &TupleSpace::new(q, n), w),
                value: v.to_f64(),
                step,
            });
        }
        values.push(v);
    }
    Ok(StateArray { n, q, values })
}

/// The trajectory up to the first all-ones array.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<W> {
    /// Smallest `n` with `A^(n)` all ones.
    pub m: usize,
    /// `A^(0), ..., A^(m)`.
    pub trajectory: Vec<StateArray<W>>,
}

/// Iterates until `A^(n)` is all ones, for at most `bound` steps.
pub fn iterate_to_fixed_point<W: Weight>(lam: &LambdaArray<W>, bound: usize) -> Result<FixedPoint<W>, MaskError> {
    let mut trajectory = vec![init_state(lam)];
    loop {
        let last = trajectory.last().unwrap();
        if last.is_all_ones() {
            return Ok(FixedPoint { m: trajectory.len() - 1, trajectory });
        }
        if trajectory.len() > bound {
            return Err(MaskError::BoundExceeded {
                bound,
                trajectory: trajectory.iter().map(StateArray::to_f64).collect(),
            });
        }
        let next = step_at(lam, last, trajectory.len())?;
        trajectory.push(next);
    }
}
