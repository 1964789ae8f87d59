//! Vertex centrality scores used to rank candidate endpoints.

use crate::graph::Graph;

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 1000;

pub fn degree(g: &Graph) -> Vec<f64> {
    (0..g.node_count()).map(|v| g.degree(v) as f64).collect()
}

/// Eigenvector centrality by power iteration.
///
/// Each connected component is solved on its own and its unit-norm vector is
/// scaled by the component's dominant eigenvalue, so a node in a small
/// component never outranks a comparable node in a denser one by accident.
/// Iterating on `A + I` keeps bipartite components from oscillating; the
/// shift is removed from the reported eigenvalue. Isolated nodes score 0.
pub fn eigenvector(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut score = vec![0.0; n];
    let mut local = vec![usize::MAX; n];
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let m = comp.len();
        let mut x = vec![1.0 / (m as f64).sqrt(); m];
        let mut next = vec![0.0; m];
        let mut lambda = 0.0;
        for _ in 0..EIGEN_MAX_ITERATIONS {
            for (i, &v) in comp.iter().enumerate() {
                next[i] = x[i] + g.neighbors(v).iter().map(|&w| x[local[w]]).sum::<f64>();
            }
            let norm = next.iter().map(|y| y * y).sum::<f64>().sqrt();
            lambda = norm;
            let mut delta: f64 = 0.0;
            for i in 0..m {
                let y = next[i] / norm;
                delta = delta.max((y - x[i]).abs());
                x[i] = y;
            }
            if delta < EIGEN_TOLERANCE {
                break;
            }
        }
        let eigenvalue = lambda - 1.0;
        for (i, &v) in comp.iter().enumerate() {
            score[v] = eigenvalue * x[i];
        }
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_hub_dominates() {
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let e = eigenvector(&g);
        assert!(e[1..].iter().all(|&s| e[0] > s));
        // Star K1,4: eigenvalue 2, hub component 1/sqrt(2).
        assert!((e[0] - 2.0 / 2f64.sqrt()).abs() < 1e-8);
        assert_eq!(degree(&g)[0], 4.0);
    }

    #[test]
    fn disconnected_components_are_scaled_by_eigenvalue() {
        // K4 (eigenvalue 3) next to a single edge (eigenvalue 1).
        let g =
            Graph::from_edges(7, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (4, 5)]).unwrap();
        let e = eigenvector(&g);
        assert!((e[0] - 1.5).abs() < 1e-8);
        assert!((e[4] - 1.0 / 2f64.sqrt()).abs() < 1e-8);
        assert_eq!(e[6], 0.0);
    }
}
