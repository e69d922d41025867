//! Fixtures shared by the benchmarks.

use stepmra::galois::FieldParams;
use stepmra::maskdyn::{assign_lambda, iterate_to_fixed_point, LambdaArray, Strategy};
use stepmra::validtree::{build_digraph, build_window_tree, generate_tree};

/// A Dirichlet λ-array on a generated tree, with its fixed-point index.
pub fn dirichlet_instance(p: u32, s: usize, n: usize, tree_height: usize, seed: u64) -> (LambdaArray<f64>, usize) {
    let params = FieldParams::with_default_poly(p, s).expect("small prime power");
    let tree = generate_tree(params.clone(), n, Some(tree_height), seed).expect("feasible height");
    let wt = build_window_tree(&tree);
    let graph = build_digraph(&wt);
    let lam = assign_lambda(&graph, &params, Strategy::Dirichlet { seed }).expect("valid strategy");
    let m = iterate_to_fixed_point(&lam, wt.height - n).expect("fixed point within bound").m;
    (lam, m)
}
