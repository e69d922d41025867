//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stepmra::characters::CharacterWindow;
use stepmra::galois::{FieldParams, GaloisField, GfElem};
use stepmra::localfield::{basis_vector, LaurentElem};
use stepmra::maskdyn::{assign_lambda, iterate_to_fixed_point, LambdaArray, MaskError, Strategy};
use stepmra::pipeline::{build_scaling, run_checks, run_pipeline, Check, PipelineConfig, Scaling};
use stepmra::scalefn::{
    build_phi_hat, check_orthonormality_freq, check_orthonormality_time, check_refinement, forward_transform,
    inverse_transform, mask_from_lambda, prefix_sums, refinement_coeffs, FreqStepFunction, Phase,
};
use stepmra::tuple::TupleSpace;
use stepmra::validtree::{build_digraph, build_window_tree, generate_tree, MaskDigraph, WindowTree};
use stepmra::weight::Weight;

type Q = BigRational;

const FREQ_TOL: f64 = 1e-12;
const TIME_TOL: f64 = 1e-9;
const TRANSFORM_TOL: f64 = 1e-12;
const REFINE_PERTURBED_MIN: f64 = 0.01;
const FUZZ_INSTANCES: usize = 100;
const MAX_WINDOW_HEIGHT: usize = 6;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Instance {
    params: FieldParams,
    n: usize,
    window_height: usize,
    seed: u64,
    window_tree: WindowTree,
    graph: MaskDigraph,
}

/// Deterministic sample over p in {2,3}, s in {1,2}, N in {1,2}.
fn fuzz_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..FUZZ_INSTANCES)
        .map(|i| {
            let p = [2, 3][i % 2];
            let s = [1, 2][(i / 2) % 2];
            let n = [1, 2][(i / 4) % 2];
            let params = FieldParams::with_default_poly(p, s).unwrap();
            let q = params.order();
            let max_h = MAX_WINDOW_HEIGHT.min(q.pow(n as u32) - 1);
            let window_height = rng.random_range(n..=max_h);
            let seed = i as u64;
            let tree = generate_tree(params.clone(), n, Some(window_height + n - 1), seed)
                .unwrap_or_else(|e| panic!("instance {i}: {e}"));
            let window_tree = build_window_tree(&tree);
            assert_eq!(window_tree.height, window_height);
            let graph = build_digraph(&window_tree);
            Instance { params, n, window_height, seed, window_tree, graph }
        })
        .collect()
}

fn dirichlet<W: Weight>(inst: &Instance) -> LambdaArray<W> {
    assign_lambda(&inst.graph, &inst.params, Strategy::Dirichlet { seed: inst.seed }).unwrap()
}

fn haar_config() -> PipelineConfig {
    serde_json::from_value(serde_json::json!({
        "p": 2, "s": 1, "N": 1,
        "tree": {"generate": {"seed": 0}},
        "lambda": {"strategy": "haar"},
        "arithmetic": "exact"
    }))
    .unwrap()
}

fn path_uniform_config() -> PipelineConfig {
    serde_json::from_value(serde_json::json!({
        "p": 3, "s": 1, "N": 1,
        "tree": {"inline": {"params": {"p": 3, "s": 1, "poly": [0]}, "N": 1, "vertices": [
            {"id": 0, "label": [0], "parent": null},
            {"id": 1, "label": [1], "parent": 0},
            {"id": 2, "label": [2], "parent": 1}
        ]}},
        "lambda": {"strategy": "uniform"},
        "arithmetic": "exact"
    }))
    .unwrap()
}

fn c1_haar() -> Outcome {
    let start = Instant::now();
    let report = run_pipeline(&haar_config(), Path::new(".")).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.m == 0, || format!("M = {}", report.m))?;
    let phi: Vec<(f64, f64)> = report.phi.iter().map(|e| (e.re, e.im)).collect();
    ensure(phi == vec![(1.0, 0.0), (0.0, 0.0)], || format!("phi = {phi:?}"))?;
    let checks = &report.checks;
    let freq = checks.freq.as_ref().unwrap();
    let time = checks.time.as_ref().unwrap();
    let refine = checks.refine.as_ref().unwrap();
    ensure(report.pass && checks.summary().len() == 4, || "a check failed".into())?;
    ensure(freq.exact && freq.sums.iter().all(|s| s.sum == "1/1"), || "prefix sums not exactly 1".into())?;
    let residuals = [time.max_deviation, refine.time_residual, refine.freq_residual, refine.mask_residual];
    ensure(residuals.iter().all(|r| *r == 0.0), || format!("residuals {residuals:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("M=0, phi = 1_F0, residuals exactly 0, {elapsed:.2?}"))
}

fn c2_path_uniform() -> Outcome {
    let start = Instant::now();
    let report = run_pipeline(&path_uniform_config(), Path::new(".")).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.m == 1 && report.bound == 1, || format!("M = {}, bound = {}", report.m, report.bound))?;
    let half = serde_json::json!("1/2");
    let lam: Vec<_> = report.lambda.entries.iter().filter(|e| e.value == half).map(|e| e.window.clone()).collect();
    ensure(lam == vec![vec![vec![2], vec![0]], vec![vec![2], vec![1]]], || format!("λ = 1/2 at {lam:?}"))?;
    let freq = report.checks.freq.as_ref().unwrap();
    ensure(freq.exact && freq.sums.len() == 3 && freq.sums.iter().all(|s| s.sum == "1/1"), || {
        format!("prefix sums {:?}", freq.sums)
    })?;
    let time = report.checks.time.as_ref().unwrap();
    ensure(time.max_deviation <= TIME_TOL, || format!("time deviation {}", time.max_deviation))?;
    ensure(report.pass, || "a check failed".into())?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("M=1=bound, prefix sums exactly 1, time deviation {:.1e}, {elapsed:.2?}", time.max_deviation))
}

fn c3_fuzz(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut worst_time = 0.0f64;
    let mut worst_freq = 0.0f64;
    for (i, inst) in instances.iter().enumerate() {
        let lam = dirichlet::<f64>(inst);
        let bound = inst.window_height - inst.n;
        let fixed = iterate_to_fixed_point(&lam, bound).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(fixed.m <= bound, || format!("instance {i}: M = {} > {bound}", fixed.m))?;
        let scaling = build_scaling(&lam, fixed.m, Default::default());
        let checks = run_checks(&scaling, &Check::ALL);
        ensure(checks.pass(), || format!("instance {i}: {:?}", checks.summary()))?;
        worst_freq = worst_freq.max(checks.freq.as_ref().unwrap().max_deviation);
        let refine = checks.refine.as_ref().unwrap();
        worst_time = worst_time
            .max(checks.time.as_ref().unwrap().max_deviation)
            .max(refine.time_residual)
            .max(refine.mask_residual);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} instances, worst freq {worst_freq:.1e} (tol {FREQ_TOL:.0e}), worst time {worst_time:.1e} (tol {TIME_TOL:.0e}), {elapsed:.2?}",
        instances.len()
    ))
}

fn c4_level_invariants(instances: &[Instance]) -> Outcome {
    let mut steps = 0;
    for (i, inst) in instances.iter().enumerate() {
        let lam = dirichlet::<Q>(inst);
        let bound = inst.window_height - inst.n;
        let fixed = iterate_to_fixed_point(&lam, bound).map_err(|e| format!("instance {i}: {e}"))?;
        for (step, state) in fixed.trajectory.iter().enumerate() {
            for (w, v) in state.values.iter().enumerate() {
                if inst.window_tree.level[w] <= inst.n + step {
                    ensure(v.is_one(), || format!("instance {i}: A^({step}) at window {w} is {v}"))?;
                }
            }
            steps += 1;
        }
        let float_m = iterate_to_fixed_point(&dirichlet::<f64>(inst), bound).unwrap().m;
        ensure(float_m == fixed.m, || format!("instance {i}: exact M {} vs float M {float_m}", fixed.m))?;
    }
    Ok(format!("{steps} exact states checked"))
}

/// `prod_{k=0}^{K} m_0(chi A^{-k})` evaluated on explicit characters.
fn truncated_product(inst: &Instance, m0: &[Complex64], t: usize, m: usize, field: &GaloisField) -> Complex64 {
    let q = field.order();
    let n = inst.n;
    let exps = TupleSpace::new(q, n + m).decode(t).into_iter().map(|e| field.elem(e)).collect();
    let mut chi = CharacterWindow::from_exponents(-(n as i64), exps);
    let windows = TupleSpace::new(q, n + 1);
    let mut product = Complex64::one();
    for _ in 0..=(m + n) {
        let w: Vec<usize> = (-(n as i64)..=0).map(|k| field.index(&chi.exponent(k, field.s())).unwrap()).collect();
        product *= m0[windows.encode(&w)];
        chi = chi.undilate();
    }
    product
}

/// `S(prefix)` by nesting the sums over `a_0, ..., a_{M-1}` directly on `λ`.
fn nested_sum(lam: &LambdaArray<Q>, digits: &mut Vec<usize>, n: usize, m: usize) -> Q {
    let q = lam.q();
    let windows = TupleSpace::new(q, n + 1);
    let at = |d: &[usize], j: usize| -> Q {
        let w: Vec<usize> = (j..=j + n).map(|i| d.get(i).copied().unwrap_or(0)).collect();
        lam.get(windows.encode(&w)).clone()
    };
    let j = digits.len() - n;
    if j == m {
        return (m..m + n).fold(Q::one(), |acc, j| acc * at(digits, j));
    }
    let mut total = Q::zero();
    for a in 0..q {
        digits.push(a);
        let head = at(digits, j);
        if !head.is_zero() {
            total += head * nested_sum(lam, digits, n, m);
        }
        digits.pop();
    }
    total
}

fn c5a_truncated_product(instances: &[Instance]) -> Outcome {
    let mut windows = 0;
    let mut worst = 0.0f64;
    for (i, inst) in instances.iter().enumerate() {
        let field = GaloisField::new(inst.params.clone()).unwrap();
        let lam = dirichlet::<f64>(inst);
        let m = iterate_to_fixed_point(&lam, inst.window_height - inst.n).unwrap().m;
        let m0 = mask_from_lambda(&lam, Phase::NonnegativeRoot);
        let phi_hat = build_phi_hat(&m0, m);
        for (t, v) in phi_hat.values.iter().enumerate() {
            let err = (truncated_product(inst, &m0.values, t, m, &field) - v).norm();
            worst = worst.max(err);
            ensure(err <= FREQ_TOL, || format!("instance {i}, window {t}: error {err:.1e}"))?;
        }
        windows += phi_hat.values.len();
    }
    Ok(format!("{windows} windows, max error {worst:.1e} (tol {FREQ_TOL:.0e})"))
}

fn c5b_nested_sums(instances: &[Instance]) -> Outcome {
    let mut prefixes = 0;
    for (i, inst) in instances.iter().enumerate() {
        let lam = dirichlet::<Q>(inst);
        let m = iterate_to_fixed_point(&lam, inst.window_height - inst.n).unwrap().m;
        let phi_hat = build_phi_hat(&mask_from_lambda(&lam, Phase::NonnegativeRoot), m);
        let report = check_orthonormality_freq(&phi_hat);
        let sums = prefix_sums(&phi_hat);
        let prefix_space = TupleSpace::new(lam.q(), inst.n);
        for (k, s) in sums.iter().enumerate() {
            let mut digits = prefix_space.decode(k);
            let oracle = nested_sum(&lam, &mut digits, inst.n, m);
            ensure(&oracle == s, || format!("instance {i}, prefix {k}: {s} vs {oracle}"))?;
            ensure(report.sums[k].sum == oracle.to_json(), || format!("instance {i}: report disagrees"))?;
        }
        ensure(report.pass, || format!("instance {i}: exact prefix sums not all 1"))?;
        prefixes += sums.len();
    }
    Ok(format!("{prefixes} prefix sums equal exactly"))
}

/// `phi(x) = q^{-N} sum_chi phi^(chi) chi(x)` by direct character evaluation.
fn direct_inverse(phi_hat: &FreqStepFunction<f64>, field: &GaloisField) -> Vec<Complex64> {
    let q = field.order();
    let (n, m) = (phi_hat.n, phi_hat.m);
    let space = TupleSpace::new(q, n + m);
    let elems = |i: usize| space.decode(i).into_iter().map(|e| field.elem(e)).collect::<Vec<GfElem>>();
    let chars: Vec<CharacterWindow> =
        (0..space.size()).map(|t| CharacterWindow::from_exponents(-(n as i64), elems(t))).collect();
    let scale = (q as f64).powi(-(n as i32));
    (0..space.size())
        .map(|x| {
            let x = LaurentElem::from_digits(-(n as i64), elems(x));
            let sum: Complex64 = chars
                .iter()
                .zip(&phi_hat.values)
                .map(|(chi, v)| v * chi.eval(&x, field).unwrap().to_complex())
                .sum();
            sum * scale
        })
        .collect()
}

fn c5c_transform() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = 0.0f64;
    let mut worst_round_trip = 0.0f64;
    for k in 0..50 {
        let (p, s) = [(2, 1), (3, 1), (2, 2), (5, 1), (3, 2), (7, 1)][k % 6];
        let params = FieldParams::with_default_poly(p, s).unwrap();
        let field = GaloisField::new(params.clone()).unwrap();
        let q = field.order();
        let n = rng.random_range(1..=2);
        let m = if q.pow(n as u32 + 2) <= 4096 { rng.random_range(0..=2) } else { rng.random_range(0..=1) };
        let len = q.pow((n + m) as u32);
        let values: Vec<Complex64> =
            (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let phi_hat = FreqStepFunction::from_values(params, n, m, values);
        let fast = inverse_transform(&phi_hat);
        let direct = direct_inverse(&phi_hat, &field);
        let err = fast.values.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
        ensure(err < TRANSFORM_TOL, || format!("table {k} (q={q}, N={n}, M={m}): error {err:.1e}"))?;
        let back = forward_transform(&fast);
        let rt = back.values.iter().zip(&phi_hat.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst_round_trip = worst_round_trip.max(rt);
        ensure(rt < TRANSFORM_TOL, || format!("table {k}: round trip error {rt:.1e}"))?;
    }
    Ok(format!("50 tables, max error {worst:.1e}, round trip {worst_round_trip:.1e} (tol {TRANSFORM_TOL:.0e})"))
}

fn haar_scaling() -> (MaskDigraph, FieldParams, Scaling<Q>) {
    let params = FieldParams::with_default_poly(2, 1).unwrap();
    let tree = generate_tree(params.clone(), 1, None, 0).unwrap();
    let graph = build_digraph(&build_window_tree(&tree));
    let lam = assign_lambda::<Q>(&graph, &params, Strategy::Haar).unwrap();
    (graph, params, build_scaling(&lam, 0, Default::default()))
}

fn c6_negative_controls() -> Outcome {
    let r = |n: u64, d: u64| Q::from_ratio(n, d);
    let (graph, params, haar) = haar_scaling();

    // Row sum 1/2 and mass off the digraph successors.
    for table in [vec![r(1, 1), r(0, 1), r(1, 2), r(0, 1)], vec![r(1, 1), r(0, 1), r(1, 2), r(1, 2)]] {
        let err = assign_lambda(&graph, &params, Strategy::Explicit(table.clone())).unwrap_err();
        ensure(matches!(err, MaskError::Constraint { .. }), || format!("{table:?} gave {err}"))?;
    }
    let path = path_uniform_config();
    let mut bad = path.clone();
    bad.lambda = serde_json::from_value(serde_json::json!({
        "strategy": "explicit",
        "table": {"params": {"p": 3, "s": 1, "poly": [0]}, "N": 1, "entries": [
            {"window": [[1], [0]], "value": 1},
            {"window": [[2], [0]], "value": "1/2"},
            {"window": [[2], [1]], "value": "1/3"}
        ]}
    }))
    .unwrap();
    let err = run_pipeline(&bad, Path::new(".")).unwrap_err();
    ensure(err.stage == stepmra::pipeline::Stage::Mask, || format!("stage {}", err.stage))?;

    // λ_{1,1} = 1 in place of λ_{1,0} = 1: off Γ.
    let off = LambdaArray::new_unchecked(params.clone(), 1, vec![r(1, 1), r(0, 1), r(0, 1), r(1, 1)]).unwrap();
    ensure(off.check_against(&graph).is_err(), || "off-support table accepted".into())?;
    let off_scaling = build_scaling(&off, 0, Default::default());
    let report = check_orthonormality_freq(&off_scaling.phi_hat);
    let sums = prefix_sums(&off_scaling.phi_hat);
    ensure(!report.pass && sums.iter().any(|s| !s.is_one()), || format!("sums {sums:?}"))?;
    let time = check_orthonormality_time(&off_scaling.phi);
    ensure(!time.pass, || "time check passed off Γ".into())?;

    let mut beta = refinement_coeffs(&haar.m0);
    beta.coeffs[1] += 0.1;
    let refine = check_refinement(&haar.phi_hat, &haar.phi, &haar.m0, &beta);
    ensure(!refine.pass && refine.time_residual > REFINE_PERTURBED_MIN, || {
        format!("perturbed residual {}", refine.time_residual)
    })?;

    let mut scaled = haar.phi.clone();
    scaled.values.iter_mut().for_each(|v| *v *= 2.0);
    let time = check_orthonormality_time(&scaled);
    ensure(!time.pass && time.inner_products[0].re == 4.0, || "scaled phi passed".into())?;

    let zeroed = FreqStepFunction::from_values(params, 1, 0, vec![Complex64::zero(), Complex64::one()]);
    ensure(!stepmra::scalefn::check_limit_condition(&zeroed), || "zeroed table passed the limit check".into())?;
    Ok(format!(
        "constraint violations rejected, off-Γ prefix sums {:?}, perturbed residual {:.3}",
        sums.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        refine.time_residual
    ))
}

/// Multiplies coefficient vectors mod `p` and the monic reduction polynomial.
fn poly_mul_oracle(a: &[u32], b: &[u32], poly: &[u32], p: u32) -> Vec<u32> {
    let s = poly.len();
    let mut prod = vec![0u32; 2 * s];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (s..2 * s).rev() {
        let lead = prod[d];
        if lead != 0 {
            // x^s = -(c_0 + ... + c_{s-1} x^{s-1})
            for (k, c) in poly.iter().enumerate() {
                prod[d - s + k] = (prod[d - s + k] + (p - lead) * c % p) % p;
            }
            prod[d] = 0;
        }
    }
    prod.truncate(s);
    prod
}

fn c7_algebra() -> Outcome {
    let mut fields = 0;
    for (p, s) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 1), (7, 1), (11, 1), (13, 1)] {
        let field = GaloisField::with_default_poly(p, s).unwrap();
        let poly = field.params().reduction_poly.clone();
        let elems = field.enumerate();
        let (zero, one) = (field.zero(), field.one());
        let add = |a: &GfElem, b: &GfElem| field.add(a, b).unwrap();
        let mul = |a: &GfElem, b: &GfElem| field.mul(a, b).unwrap();
        for a in &elems {
            ensure(add(a, &zero) == *a && mul(a, &one) == *a, || format!("GF({p}^{s}): identities at {a:?}"))?;
            ensure(add(a, &field.neg(a).unwrap()) == zero, || format!("GF({p}^{s}): additive inverse"))?;
            ensure(a.is_zero() || elems.iter().filter(|b| mul(a, b) == one).count() == 1, || {
                format!("GF({p}^{s}): {a:?} lacks a unique inverse")
            })?;
            for b in &elems {
                let ab = mul(a, b);
                ensure(ab.digits() == poly_mul_oracle(a.digits(), b.digits(), &poly, p), || {
                    format!("GF({p}^{s}): {a:?} * {b:?} disagrees with polynomial oracle")
                })?;
                let sum: Vec<u32> = a.digits().iter().zip(b.digits()).map(|(x, y)| (x + y) % p).collect();
                ensure(add(a, b).digits() == sum, || format!("GF({p}^{s}): addition"))?;
                ensure(add(a, b) == add(b, a) && ab == mul(b, a), || format!("GF({p}^{s}): commutativity"))?;
                for c in &elems {
                    ensure(add(&add(a, b), c) == add(a, &add(b, c)), || format!("GF({p}^{s}): + associativity"))?;
                    ensure(mul(&ab, c) == mul(a, &mul(b, c)), || format!("GF({p}^{s}): * associativity"))?;
                    ensure(mul(a, &add(b, c)) == add(&ab, &mul(a, c)), || format!("GF({p}^{s}): distributivity"))?;
                }
            }
        }
        fields += 1;
    }

    let mut evaluations = 0;
    for (p, s) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1)] {
        let field = GaloisField::with_default_poly(p, s).unwrap();
        let elems = field.enumerate();
        for k in -3i64..=3 {
            for j in -3i64..=3 {
                for v in &elems {
                    let r = CharacterWindow::rademacher(k, v.clone());
                    for u in &elems {
                        let x = basis_vector(&field, j).scale(u, &field).unwrap();
                        let value = r.eval(&x, &field).unwrap();
                        if k != j {
                            ensure(value.is_one(), || format!("GF({p}^{s}): (r_{k}^{v:?}, {u:?} g_{j}) != 1"))?;
                        } else {
                            let e: u32 = v.digits().iter().zip(u.digits()).map(|(a, b)| a * b).sum::<u32>() % p;
                            ensure(value.exponent == e, || format!("GF({p}^{s}): diagonal pairing at k={k}"))?;
                        }
                        evaluations += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{fields} fields exhaustive, {evaluations} Rademacher evaluations"))
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(&mut *f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail} [{elapsed:.2?}]");
            }
        }
    };
    report("1 haar reconstruction", &mut c1_haar);
    report("2 non-haar path tree", &mut c2_path_uniform);
    let start = Instant::now();
    let instances = fuzz_instances();
    println!("     generated {} fuzz trees in {:.2?}", instances.len(), start.elapsed());
    report("3 fixed-point fuzz", &mut || c3_fuzz(&instances));
    report("4 level invariants (exact)", &mut || c4_level_invariants(&instances));
    report("5a truncated product oracle", &mut || c5a_truncated_product(&instances));
    report("5b nested-sum oracle (exact)", &mut || c5b_nested_sums(&instances));
    report("5c fast vs direct transform", &mut c5c_transform);
    report("6 negative controls", &mut c6_negative_controls);
    report("7 field axioms and characters", &mut c7_algebra);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
