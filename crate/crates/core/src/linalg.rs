//! Small dense linear-algebra and graph helpers shared by the planners and
//! the option compiler.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::{tarjan_scc, toposort};
use petgraph::graph::DiGraph;

/// Solves `a x = b` by LU with partial pivoting; `None` when singular.
pub fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    let x = a.lu().solve(&b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn graph_of(m: &[Vec<f64>]) -> DiGraph<(), ()> {
    let mut g = DiGraph::<(), ()>::with_capacity(m.len(), 0);
    let nodes: Vec<_> = (0..m.len()).map(|_| g.add_node(())).collect();
    for (i, row) in m.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            if *w > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    g
}

/// True when the positive-entry graph of `m` has no cycle (so `m` is nilpotent).
pub fn is_acyclic(m: &[Vec<f64>]) -> bool {
    toposort(&graph_of(m), None).is_ok()
}

/// Node order in which every successor appears before its predecessors.
/// Only meaningful for acyclic matrices.
pub fn reverse_topological_order(m: &[Vec<f64>]) -> Vec<usize> {
    let g = graph_of(m);
    let mut order: Vec<usize> = toposort(&g, None)
        .map(|v| v.into_iter().map(|n| n.index()).collect())
        .unwrap_or_else(|_| (0..m.len()).collect());
    order.reverse();
    order
}

/// Strongly connected components of a directed graph given by adjacency lists.
pub fn strongly_connected_components(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(adjacency.len(), 0);
    let nodes: Vec<_> = (0..adjacency.len()).map(|_| g.add_node(())).collect();
    for (i, succ) in adjacency.iter().enumerate() {
        for &j in succ {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Spectral radius of a nonnegative square matrix, estimated from the growth
/// of `‖Q^(2^j)‖∞`. Exact zero for nilpotent matrices.
pub fn spectral_radius(q: &DMatrix<f64>) -> f64 {
    let n = q.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut power = q.clone();
    let mut exponent = 1.0f64;
    let mut log_scale = 0.0f64;
    let mut estimate = inf_norm(&power);
    for _ in 0..40 {
        let norm = inf_norm(&power);
        if norm == 0.0 {
            return 0.0;
        }
        // rescale to keep entries representable; track the log of the factor
        power /= norm;
        log_scale += norm.ln();
        estimate = (log_scale / exponent).exp();
        power = &power * &power;
        log_scale *= 2.0;
        exponent *= 2.0;
    }
    estimate
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
