//! Finite truncations (exhaustions) of infinite graphs: hypercubic
//! lattices ℤ^d, regular trees, and explicit edge lists. All downstream
//! spectral quantities are computed on these balls.
//!
//! Vertex ordering is breadth-first from the root with a lexicographic
//! tie-break inside each layer, so the vertex set of radius r is an ordered
//! prefix of radius r+1 and every report is reproducible bit for bit.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CsrMatrix;
use crate::{CoreError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Hypercubic lattice ℤ^d, rooted at the origin.
    Lattice { dim: u32 },
    /// Infinite regular tree where every vertex has the given degree ≥ 2.
    RegularTree { degree: u32 },
    /// Explicit finite presentation `(u, v, multiplicity)` with a declared
    /// root; the exhaustion rule is balls of growing radius around it.
    /// `degree_bound`, when declared, rejects presentations exceeding it.
    EdgeList {
        edges: Vec<(u64, u64, u32)>,
        root: u64,
        #[serde(default)]
        degree_bound: Option<u32>,
    },
}

impl GraphSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GraphSpec::Lattice { dim } if *dim < 1 => {
                Err(CoreError::InvalidInput("lattice dimension must be ≥ 1".into()))
            }
            GraphSpec::RegularTree { degree } if *degree < 2 => {
                Err(CoreError::InvalidInput("tree degree must be ≥ 2".into()))
            }
            _ => Ok(()),
        }
    }

    /// sup_x deg(x) over the infinite graph.
    pub fn degree_sup(&self) -> f64 {
        match self {
            GraphSpec::Lattice { dim } => 2.0 * *dim as f64,
            GraphSpec::RegularTree { degree } => *degree as f64,
            GraphSpec::EdgeList { edges, .. } => {
                let mut deg: HashMap<u64, f64> = HashMap::new();
                for &(u, v, m) in edges {
                    *deg.entry(u).or_default() += m as f64;
                    if u != v {
                        *deg.entry(v).or_default() += m as f64;
                    }
                }
                deg.values().fold(0.0, |a, &b| a.max(b))
            }
        }
    }

    /// Closed-form ‖A_X‖ when known (cross-check only, never substituted).
    pub fn known_norm(&self) -> Option<f64> {
        match self {
            GraphSpec::Lattice { dim } => Some(2.0 * *dim as f64),
            GraphSpec::RegularTree { degree } => Some(2.0 * ((*degree as f64) - 1.0).sqrt()),
            GraphSpec::EdgeList { .. } => None,
        }
    }
}

/// One finite truncation: the ball of `radius` around the root.
#[derive(Clone, Debug)]
pub struct FiniteGraph {
    pub spec: GraphSpec,
    pub radius: usize,
    /// Human-readable vertex labels in storage order.
    pub labels: Vec<String>,
    pub adjacency: CsrMatrix,
    /// Indices of vertices adjacent (in the infinite graph) to vertices
    /// outside the truncation, sorted ascending.
    pub boundary: Vec<u32>,
    /// Largest degree observed inside the truncation.
    pub max_degree: f64,
    /// Number of infinite-graph neighbors missing from each vertex's row
    /// (zero on interior vertices).
    pub missing_neighbors: Vec<f64>,
    /// Graph distance from the root (BFS layer) per vertex.
    pub depth: Vec<u32>,
}

impl FiniteGraph {
    pub fn len(&self) -> usize {
        self.adjacency.n
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.n == 0
    }

    pub fn root_index(&self) -> usize {
        0
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.boundary.binary_search(&(idx as u32)).is_ok()
    }
}

/// A·v by sparse multiply. Entries of A are integer edge multiplicities, so
/// the arithmetic is exact per entry.
pub fn adjacency_apply(g: &FiniteGraph, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.len() != g.len() {
        return Err(CoreError::DimensionMismatch { expected: g.len(), got: v.len() });
    }
    let mut out = vec![Complex64::ZERO; g.len()];
    g.adjacency.spmv_complex(v, &mut out);
    Ok(out)
}

/// The ball of the given radius around the root, with the boundary set
/// populated and deterministic vertex ordering.
pub fn build_truncation(spec: &GraphSpec, radius: usize) -> Result<FiniteGraph> {
    spec.validate()?;
    if radius < 1 {
        return Err(CoreError::InvalidInput("truncation radius must be ≥ 1".into()));
    }
    match spec {
        GraphSpec::Lattice { dim } => build_lattice(spec, *dim as usize, radius),
        GraphSpec::RegularTree { degree } => build_tree(spec, *degree as usize, radius),
        GraphSpec::EdgeList { edges, root, degree_bound } => {
            build_edge_list(spec, edges, *root, *degree_bound, radius)
        }
    }
}

fn finish(
    spec: &GraphSpec,
    radius: usize,
    labels: Vec<String>,
    rows: Vec<Vec<(u32, f64)>>,
    missing: Vec<f64>,
    depth: Vec<u32>,
) -> Result<FiniteGraph> {
    let adjacency = CsrMatrix::from_rows(rows);
    let boundary: Vec<u32> = missing
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(i, _)| i as u32)
        .collect();
    let max_degree = adjacency.degrees().iter().fold(0.0f64, |a, &b| a.max(b));
    let g = FiniteGraph {
        spec: spec.clone(),
        radius,
        labels,
        adjacency,
        boundary,
        max_degree,
        missing_neighbors: missing,
        depth,
    };
    g.adjacency.verify_symmetric()?;
    Ok(g)
}

fn build_lattice(spec: &GraphSpec, dim: usize, radius: usize) -> Result<FiniteGraph> {
    // BFS layers of the ℓ¹ ball, each layer sorted lexicographically.
    let mut index: HashMap<Vec<i32>, u32> = HashMap::new();
    let mut ordered: Vec<Vec<i32>> = Vec::new();
    let mut layer: Vec<Vec<i32>> = vec![vec![0; dim]];
    index.insert(layer[0].clone(), 0);
    ordered.push(layer[0].clone());

    for _ in 1..=radius {
        let mut next: Vec<Vec<i32>> = Vec::new();
        for x in &layer {
            for d in 0..dim {
                for step in [-1i32, 1] {
                    let mut y = x.clone();
                    y[d] += step;
                    if !index.contains_key(&y) {
                        index.insert(y.clone(), 0); // placeholder, renumbered below
                        next.push(y);
                    }
                }
            }
        }
        next.sort_unstable();
        for y in &next {
            let id = ordered.len() as u32;
            *index.get_mut(y).unwrap() = id;
            ordered.push(y.clone());
        }
        layer = next;
    }

    let n = ordered.len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::with_capacity(2 * dim); n];
    let mut missing = vec![0.0; n];
    for (i, x) in ordered.iter().enumerate() {
        for d in 0..dim {
            for step in [-1i32, 1] {
                let mut y = x.clone();
                y[d] += step;
                match index.get(&y) {
                    Some(&j) => rows[i].push((j, 1.0)),
                    None => missing[i] += 1.0,
                }
            }
        }
        rows[i].sort_unstable_by_key(|&(c, _)| c);
    }

    let labels = ordered
        .iter()
        .map(|x| {
            x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        })
        .collect();
    let depth = ordered
        .iter()
        .map(|x| x.iter().map(|c| c.unsigned_abs()).sum::<u32>())
        .collect();
    finish(spec, radius, labels, rows, missing, depth)
}

fn build_tree(spec: &GraphSpec, degree: usize, radius: usize) -> Result<FiniteGraph> {
    // Vertices labeled by child paths from the root; BFS order is already
    // lexicographic when children are pushed in index order.
    let mut labels: Vec<String> = vec!["r".into()];
    let mut parent: Vec<Option<u32>> = vec![None];
    let mut depth: Vec<usize> = vec![0];
    let mut layer: Vec<u32> = vec![0];

    for d in 1..=radius {
        let mut next = Vec::new();
        for &v in &layer {
            let n_children = if v == 0 { degree } else { degree - 1 };
            for k in 0..n_children {
                let id = labels.len() as u32;
                labels.push(format!("{}.{}", labels[v as usize], k));
                parent.push(Some(v));
                depth.push(d);
                next.push(id);
            }
        }
        layer = next;
    }

    let n = labels.len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for v in 1..n {
        let p = parent[v].unwrap();
        rows[v].push((p, 1.0));
        rows[p as usize].push((v as u32, 1.0));
    }
    for r in &mut rows {
        r.sort_unstable_by_key(|&(c, _)| c);
    }
    let missing: Vec<f64> = (0..n)
        .map(|v| {
            if depth[v] == radius {
                // Children of leaves live outside the truncation.
                (if v == 0 { degree } else { degree - 1 }) as f64
            } else {
                0.0
            }
        })
        .collect();
    let depth_u32 = depth.iter().map(|&d| d as u32).collect();
    finish(spec, radius, labels, rows, missing, depth_u32)
}

fn build_edge_list(
    spec: &GraphSpec,
    edges: &[(u64, u64, u32)],
    root: u64,
    degree_bound: Option<u32>,
    radius: usize,
) -> Result<FiniteGraph> {
    // Undirected closure of the presentation.
    let mut adj: HashMap<u64, Vec<(u64, u32)>> = HashMap::new();
    adj.entry(root).or_default();
    for &(u, v, m) in edges {
        if m == 0 {
            return Err(CoreError::InvalidInput(format!("edge ({u},{v}) with multiplicity 0")));
        }
        adj.entry(u).or_default().push((v, m));
        if u != v {
            adj.entry(v).or_default().push((u, m));
        }
    }
    if let Some(bound) = degree_bound {
        for (v, nb) in &adj {
            let deg: u64 = nb.iter().map(|&(_, m)| m as u64).sum();
            if deg > bound as u64 {
                return Err(CoreError::InvalidInput(format!(
                    "vertex {v} has degree {deg} exceeding the declared bound {bound}"
                )));
            }
        }
    }
    if !adj.contains_key(&root) {
        return Err(CoreError::InvalidInput(format!("root vertex {root} not present")));
    }

    let mut index: HashMap<u64, u32> = HashMap::new();
    let mut ordered: Vec<u64> = vec![root];
    let mut depth: Vec<u32> = vec![0];
    index.insert(root, 0);
    let mut layer = vec![root];
    for d in 1..=radius {
        let mut next: Vec<u64> = Vec::new();
        for u in &layer {
            for &(v, _) in &adj[u] {
                if !index.contains_key(&v) {
                    index.insert(v, 0);
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        for &v in &next {
            let id = ordered.len() as u32;
            *index.get_mut(&v).unwrap() = id;
            ordered.push(v);
            depth.push(d as u32);
        }
        layer = next;
    }

    let n = ordered.len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut missing = vec![0.0; n];
    for (i, u) in ordered.iter().enumerate() {
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for &(v, m) in &adj[u] {
            match index.get(&v) {
                Some(&j) => *acc.entry(j).or_default() += m as f64,
                None => missing[i] += m as f64,
            }
        }
        let mut row: Vec<(u32, f64)> = acc.into_iter().collect();
        row.sort_unstable_by_key(|&(c, _)| c);
        rows[i] = row;
    }

    let labels = ordered.iter().map(|v| v.to_string()).collect();
    finish(spec, radius, labels, rows, missing, depth)
}
