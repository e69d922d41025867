//! N-valid trees, their lift to N-windows and the mask digraph.
//!
//! Trees are oriented from leaves to the root; the root has level 0. A vertex
//! at level `>= N-1` starts a root-directed path of `N` labels, its *window*.
//! Validity asks for a zero chain at the bottom and for every window in
//! `GF(p^s)^N` to occur exactly once, so the windows form a spanning
//! in-arborescence of the de Bruijn graph rooted at the zero window.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldError, FieldParams, GaloisField};
use crate::tuple::TupleSpace;

/// Largest `p^{sN}` accepted; windows are materialized densely.
pub const MAX_WINDOWS: usize = 1 << 20;

/// Spine extensions tried by the height-targeted search before giving up.
const SEARCH_BUDGET: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("window size N must be at least 1")]
    ZeroWindow,
    #[error("p^(sN) = {0} windows exceed the supported maximum")]
    TooManyWindows(u128),
    #[error("malformed tree: {0}")]
    Structure(String),
    #[error("tree is not {n}-valid: {report}")]
    Invalid { n: usize, report: Box<ValidationReport> },
    #[error("no {n}-valid tree of height {height} exists: {reason}")]
    NoSolution { n: usize, height: usize, reason: String },
}

/// One vertex of a tree file. `parent` is `None` only for the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeVertex {
    pub id: u64,
    pub label: Vec<u32>,
    pub parent: Option<u64>,
}

/// The on-disk tree format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeFile {
    pub params: FieldParams,
    #[serde(rename = "N")]
    pub n: usize,
    pub vertices: Vec<TreeVertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Which condition of the definition failed (1, 2 or 3).
    pub condition: u8,
    pub message: String,
    /// Offending vertex ids.
    pub vertices: Vec<u64>,
    /// Offending label path (condition 3), deepest label first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub height: usize,
    pub violations: Vec<Violation>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.valid {
            return write!(f, "valid, height {}", self.height);
        }
        let msgs: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("condition {}: {}", v.condition, v.message))
            .collect();
        write!(f, "{}", msgs.join("; "))
    }
}

struct Shape {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<usize>,
}

fn analyze_structure(tree: &TreeFile) -> Result<Shape, TreeError> {
    if tree.vertices.is_empty() {
        return Err(TreeError::Structure("tree has no vertices".into()));
    }
    let mut pos = HashMap::with_capacity(tree.vertices.len());
    for (i, v) in tree.vertices.iter().enumerate() {
        if pos.insert(v.id, i).is_some() {
            return Err(TreeError::Structure(format!("duplicate vertex id {}", v.id)));
        }
    }
    let roots: Vec<u64> = tree.vertices.iter().filter(|v| v.parent.is_none()).map(|v| v.id).collect();
    if roots.len() != 1 {
        return Err(TreeError::Structure(format!("expected exactly one root, found {roots:?}")));
    }
    let mut parent = vec![None; tree.vertices.len()];
    let mut children = vec![Vec::new(); tree.vertices.len()];
    for (i, v) in tree.vertices.iter().enumerate() {
        if let Some(pid) = v.parent {
            let &j = pos
                .get(&pid)
                .ok_or_else(|| TreeError::Structure(format!("vertex {} has unknown parent {pid}", v.id)))?;
            parent[i] = Some(j);
            children[j].push(i);
        }
    }
    // Levels by breadth-first search from the root; unreached vertices sit on
    // a cycle or hang off one.
    let root = parent.iter().position(Option::is_none).unwrap();
    let mut level = vec![usize::MAX; tree.vertices.len()];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &c in &children[u] {
            level[c] = level[u] + 1;
            queue.push_back(c);
        }
    }
    if let Some(i) = level.iter().position(|&l| l == usize::MAX) {
        return Err(TreeError::Structure(format!(
            "vertex {} does not reach the root (cycle in parent map)",
            tree.vertices[i].id
        )));
    }
    Ok(Shape { parent, children, level })
}

/// Checks the three conditions of N-validity and reports every violation.
///
/// Structural defects (no unique root, cycles, unknown parents) are errors;
/// violated conditions are report entries.
pub fn validate_tree(tree: &TreeFile) -> Result<ValidationReport, TreeError> {
    let field = GaloisField::new(tree.params.clone())?;
    if tree.n == 0 {
        return Err(TreeError::ZeroWindow);
    }
    let shape = analyze_structure(tree)?;
    let n = tree.n;
    let vs = &tree.vertices;
    let height = shape.level.iter().copied().max().unwrap_or(0);
    let mut violations = Vec::new();

    let mut labels_ok = true;
    for v in vs {
        let elem = crate::galois::GfElem::from_digits(v.label.clone());
        if field.check(&elem).is_err() {
            labels_ok = false;
            violations.push(Violation {
                condition: 1,
                message: format!("label {:?} of vertex {} is not an element of the field", v.label, v.id),
                vertices: vec![v.id],
                path: None,
            });
        }
    }

    let is_zero = |label: &[u32]| label.iter().all(|&d| d == 0);
    for (i, v) in vs.iter().enumerate() {
        let lvl = shape.level[i];
        if lvl < n && !is_zero(&v.label) {
            violations.push(Violation {
                condition: 2,
                message: format!("vertex {} at level {lvl} must be zero", v.id),
                vertices: vec![v.id],
                path: None,
            });
        }
        if lvl + 1 < n && shape.children[i].len() != 1 {
            violations.push(Violation {
                condition: 2,
                message: format!(
                    "vertex {} at level {lvl} < N-1 must have exactly one child, has {}",
                    v.id,
                    shape.children[i].len()
                ),
                vertices: vec![v.id],
                path: None,
            });
        }
    }

    let mut paths: BTreeMap<Vec<Vec<u32>>, Vec<u64>> = BTreeMap::new();
    for (i, v) in vs.iter().enumerate() {
        if shape.level[i] + 1 < n {
            continue;
        }
        let mut path = Vec::with_capacity(n);
        let mut cur = i;
        for step in 0..n {
            path.push(vs[cur].label.clone());
            if step + 1 < n {
                cur = shape.parent[cur].expect("level >= N-1 guarantees N-1 ancestors");
            }
        }
        paths.entry(path).or_default().push(v.id);
    }
    for (path, ids) in &paths {
        if ids.len() > 1 {
            violations.push(Violation {
                condition: 3,
                message: format!("path {path:?} occurs {} times", ids.len()),
                vertices: ids.clone(),
                path: Some(path.clone()),
            });
        }
    }
    if labels_ok {
        let space = window_space(field.order(), n)?;
        if paths.len() < space.size() {
            let missing = (0..space.size())
                .map(|w| {
                    space.decode(w).into_iter().map(|e| field.elem(e).digits().to_vec()).collect::<Vec<_>>()
                })
                .find(|path| !paths.contains_key(path))
                .expect("fewer distinct paths than windows");
            violations.push(Violation {
                condition: 3,
                message: format!(
                    "{} of {} paths never occur, e.g. {missing:?}",
                    space.size() - paths.len(),
                    space.size()
                ),
                vertices: Vec::new(),
                path: Some(missing),
            });
        }
    }

    Ok(ValidationReport { valid: violations.is_empty(), height, violations })
}

fn window_space(q: usize, n: usize) -> Result<TupleSpace, TreeError> {
    let count = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > MAX_WINDOWS as u128 {
        return Err(TreeError::TooManyWindows(count));
    }
    Ok(TupleSpace::new(q, n))
}

/// A tree that passed [`validate_tree`].
#[derive(Debug, Clone)]
pub struct ValidTree {
    field: GaloisField,
    n: usize,
    ids: Vec<u64>,
    labels: Vec<usize>,
    parent: Vec<Option<usize>>,
    level: Vec<usize>,
    height: usize,
}

impl ValidTree {
    pub fn from_file(tree: &TreeFile) -> Result<Self, TreeError> {
        let report = validate_tree(tree)?;
        if !report.valid {
            return Err(TreeError::Invalid { n: tree.n, report: Box::new(report) });
        }
        let field = GaloisField::new(tree.params.clone())?;
        let shape = analyze_structure(tree)?;
        let labels = tree
            .vertices
            .iter()
            .map(|v| field.index(&crate::galois::GfElem::from_digits(v.label.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            field,
            n: tree.n,
            ids: tree.vertices.iter().map(|v| v.id).collect(),
            labels,
            parent: shape.parent,
            level: shape.level,
            height: report.height,
        })
    }

    pub fn to_file(&self) -> TreeFile {
        let vertices = (0..self.ids.len())
            .map(|i| TreeVertex {
                id: self.ids[i],
                label: self.field.elem(self.labels[i]).digits().to_vec(),
                parent: self.parent[i].map(|j| self.ids[j]),
            })
            .collect();
        TreeFile { params: self.field.params().clone(), n: self.n, vertices }
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Height `H` of the tree.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// The lift of a valid tree to its `p^{sN}` windows.
///
/// Windows are indexed through [`TupleSpace`] with the deepest label first,
/// i.e. `(a_N, ..., a_1)` for the path `a_N -> ... -> a_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowTree {
    pub q: usize,
    pub n: usize,
    /// Level of each window; the zero window is the root at level 0.
    pub level: Vec<usize>,
    /// Parent window inherited from the tree arcs.
    pub parent: Vec<Option<usize>>,
    /// `H~ = H - N + 1`.
    pub height: usize,
}

impl WindowTree {
    pub fn space(&self) -> TupleSpace {
        TupleSpace::new(self.q, self.n)
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }
}

pub fn build_window_tree(tree: &ValidTree) -> WindowTree {
    let q = tree.field.order();
    let n = tree.n;
    let space = TupleSpace::new(q, n);
    let mut window_of = vec![None; tree.len()];
    let mut level = vec![usize::MAX; space.size()];
    let mut parent = vec![None; space.size()];
    for v in 0..tree.len() {
        if tree.level[v] + 1 < n {
            continue;
        }
        let mut w = 0;
        let mut cur = v;
        for step in 0..n {
            w = w * q + tree.labels[cur];
            if step + 1 < n {
                cur = tree.parent[cur].unwrap();
            }
        }
        window_of[v] = Some(w);
        level[w] = tree.level[v] + 1 - n;
    }
    for v in 0..tree.len() {
        if let (Some(w), Some(pv)) = (window_of[v], tree.parent[v]) {
            parent[w] = window_of[pv];
        }
    }
    assert!(level.iter().all(|&l| l != usize::MAX), "valid tree must cover every window");
    assert_eq!(level[0], 0, "zero window must be the root");
    WindowTree { q, n, level, parent, height: tree.height + 1 - n }
}

/// The digraph on windows prescribing where the mask may be nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskDigraph {
    pub q: usize,
    pub n: usize,
    pub level: Vec<usize>,
    /// For each window `(a_N, ..., a_1)`, the admissible last entries `a_0`
    /// of targets `(a_{N-1}, ..., a_1, a_0)`, in increasing order.
    pub successors: Vec<Vec<usize>>,
    /// The `a_0` of the tree-parent window; `None` for the root.
    pub tree_parent: Vec<Option<usize>>,
    pub height: usize,
}

impl MaskDigraph {
    pub fn space(&self) -> TupleSpace {
        TupleSpace::new(self.q, self.n)
    }

    /// The window reached from `w` by appending `a0`.
    pub fn target(&self, w: usize, a0: usize) -> usize {
        (w % self.q.pow(self.n as u32 - 1)) * self.q + a0
    }
}

/// Connects every window to each window of strictly lesser level that
/// overlaps it in `N-1` entries.
pub fn build_digraph(wt: &WindowTree) -> MaskDigraph {
    let q = wt.q;
    let size = wt.len();
    let shift = q.pow(wt.n as u32 - 1);
    let mut successors = vec![Vec::new(); size];
    let mut tree_parent = vec![None; size];
    for w in 1..size {
        let base = (w % shift) * q;
        successors[w] = (0..q).filter(|&a0| wt.level[base + a0] < wt.level[w]).collect();
        let parent = wt.parent[w].expect("non-root window has a parent");
        debug_assert_eq!(parent / q, w % shift);
        let a0 = parent % q;
        assert!(successors[w].contains(&a0), "tree parent must be a digraph successor");
        tree_parent[w] = Some(a0);
    }
    MaskDigraph { q, n: wt.n, level: wt.level.clone(), successors, tree_parent, height: wt.height }
}

/// Windows `v` with `v -> w` in the de Bruijn graph: `(a, w_1, ..., w_{N-1})`.
fn predecessors(w: usize, q: usize, shift: usize) -> impl Iterator<Item = usize> {
    (0..q).map(move |a| a * shift + w / q).filter(move |&v| v != w)
}

/// Generates an N-valid tree.
///
/// Without a target height the window arborescence is a uniformly random
/// spanning in-tree (Wilson's algorithm). With a target height `H` a spine of
/// `H - N + 1` windows is found by randomized backtracking and the remaining
/// windows are hung as low as possible; the spine is rejected when that
/// leaves some window deeper than the spine.
pub fn generate_tree(
    params: FieldParams,
    n: usize,
    target_height: Option<usize>,
    seed: u64,
) -> Result<ValidTree, TreeError> {
    let field = GaloisField::new(params)?;
    if n == 0 {
        return Err(TreeError::ZeroWindow);
    }
    let q = field.order();
    let space = window_space(q, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parents = match target_height {
        None => wilson(q, n, space.size(), &mut rng),
        Some(h) => {
            let no_solution = |reason: String| TreeError::NoSolution { n, height: h, reason };
            if h + 1 < n {
                return Err(no_solution(format!("height must be at least N-1 = {}", n - 1)));
            }
            let target = h + 1 - n;
            let min = min_window_height(q, n, space.size());
            if target < min {
                return Err(no_solution(format!("window trees have height at least {min}")));
            }
            if target >= space.size() {
                return Err(no_solution(format!("only {} windows are available", space.size())));
            }
            spine_search(q, n, space.size(), target, &mut rng).ok_or_else(|| {
                no_solution("search exhausted without a feasible spine".into())
            })?
        }
    };
    let file = windows_to_tree(&field, n, &parents);
    ValidTree::from_file(&file)
}

fn wilson(q: usize, n: usize, size: usize, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let shift = q.pow(n as u32 - 1);
    let mut in_tree = vec![false; size];
    let mut next = vec![None; size];
    in_tree[0] = true;
    let mut order: Vec<usize> = (1..size).collect();
    order.shuffle(rng);
    for start in order {
        let mut u = start;
        while !in_tree[u] {
            let succ = (u % shift) * q + rng.random_range(0..q);
            next[u] = Some(succ);
            u = succ;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u].unwrap();
        }
    }
    next[0] = None;
    next
}

/// Depth of the shortest-path in-tree: the least achievable window height.
fn min_window_height(q: usize, n: usize, size: usize) -> usize {
    let shift = q.pow(n as u32 - 1);
    let mut depth = vec![usize::MAX; size];
    depth[0] = 0;
    let mut queue = VecDeque::from([0]);
    let mut max = 0;
    while let Some(u) = queue.pop_front() {
        for v in predecessors(u, q, shift) {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                max = max.max(depth[v]);
                queue.push_back(v);
            }
        }
    }
    max
}

fn spine_search(
    q: usize,
    n: usize,
    size: usize,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Option<usize>>> {
    let shift = q.pow(n as u32 - 1);
    let mut on_spine = vec![false; size];
    on_spine[0] = true;
    let mut spine = vec![0usize];
    // Each frame holds the untried predecessors of the spine's last window.
    let mut frames: Vec<Vec<usize>> = vec![shuffled_preds(0, q, shift, rng)];
    let mut budget = SEARCH_BUDGET;
    while let Some(frame) = frames.last_mut() {
        if spine.len() == target + 1 {
            if let Some(parents) = hang_rest(q, shift, size, &spine, target, rng) {
                return Some(parents);
            }
            frames.pop();
            let w = spine.pop().unwrap();
            on_spine[w] = false;
            continue;
        }
        match frame.pop() {
            Some(v) if !on_spine[v] => {
                budget = budget.checked_sub(1)?;
                on_spine[v] = true;
                spine.push(v);
                frames.push(shuffled_preds(v, q, shift, rng));
            }
            Some(_) => {}
            None => {
                frames.pop();
                if let Some(w) = spine.pop() {
                    on_spine[w] = false;
                }
            }
        }
    }
    None
}

fn shuffled_preds(w: usize, q: usize, shift: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut preds: Vec<usize> = predecessors(w, q, shift).collect();
    preds.shuffle(rng);
    preds
}

/// Attaches every off-spine window at its least possible depth.
fn hang_rest(
    q: usize,
    shift: usize,
    size: usize,
    spine: &[usize],
    target: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Option<usize>>> {
    let mut parent = vec![None; size];
    let mut placed = vec![false; size];
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); target + 2];
    for (depth, &w) in spine.iter().enumerate() {
        placed[w] = true;
        if depth > 0 {
            parent[w] = Some(spine[depth - 1]);
        }
        buckets[depth].push(w);
    }
    let mut count = spine.len();
    for depth in 0..target {
        let mut layer = std::mem::take(&mut buckets[depth]);
        layer.shuffle(rng);
        for u in layer {
            for v in shuffled_preds(u, q, shift, rng) {
                if !placed[v] {
                    placed[v] = true;
                    parent[v] = Some(u);
                    count += 1;
                    buckets[depth + 1].push(v);
                }
            }
        }
    }
    (count == size).then_some(parent)
}

/// Unfolds a window arborescence into a labelled tree: a chain of `N` zero
/// vertices carries the zero window, and every other window becomes a vertex
/// labelled by its first entry.
fn windows_to_tree(field: &GaloisField, n: usize, parents: &[Option<usize>]) -> TreeFile {
    let q = field.order();
    let shift = q.pow(n as u32 - 1);
    let zero = field.zero().digits().to_vec();
    let mut vertices: Vec<TreeVertex> = (0..n as u64)
        .map(|i| TreeVertex { id: i, label: zero.clone(), parent: i.checked_sub(1) })
        .collect();
    let mut children = vec![Vec::new(); parents.len()];
    for (w, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(w);
        }
    }
    let mut vertex_of = vec![0u64; parents.len()];
    vertex_of[0] = n as u64 - 1;
    let mut queue = VecDeque::from([0usize]);
    while let Some(w) = queue.pop_front() {
        for &c in &children[w] {
            let id = vertices.len() as u64;
            vertex_of[c] = id;
            vertices.push(TreeVertex {
                id,
                label: field.elem(c / shift).digits().to_vec(),
                parent: Some(vertex_of[w]),
            });
            queue.push_back(c);
        }
    }
    TreeFile { params: field.params().clone(), n, vertices }
}

/// A path tree `labels[0] -> labels[1] -> ... -> 0` (for N = 1) or more
/// generally a tree given by `(id, label, parent)` triples.
pub fn tree_from_triples(params: FieldParams, n: usize, triples: &[(u64, &[u32], Option<u64>)]) -> TreeFile {
    TreeFile {
        params,
        n,
        vertices: triples
            .iter()
            .map(|&(id, label, parent)| TreeVertex { id, label: label.to_vec(), parent })
            .collect(),
    }
}
