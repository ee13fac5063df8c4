use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GraphError, Result, CONNECTIVITY_TOL};
use crate::linalg::{symmetric_eigen, DenseMatrix};

/// Undirected weighted graph on nodes `0..n_nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl Graph {
    /// Validates the edge list and requires connectivity.
    pub fn new(
        n_nodes: usize,
        edges: Vec<(usize, usize)>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if n_nodes < 2 {
            return Err(GraphError::TooFewNodes(n_nodes));
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; edges.len()]);
        if weights.len() != edges.len() {
            return Err(GraphError::InvalidEdge(
                0,
                0,
                "weights length differs from edge count",
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j) in &edges {
            if i == j {
                return Err(GraphError::InvalidEdge(i, j, "self-loop"));
            }
            if i >= n_nodes || j >= n_nodes {
                return Err(GraphError::InvalidEdge(i, j, "node index out of range"));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(GraphError::InvalidEdge(i, j, "duplicate edge"));
            }
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(GraphError::InvalidWeight(w));
        }
        let g = Self {
            n_nodes,
            edges,
            weights,
        };
        let lambda2 = g.algebraic_connectivity()?;
        if lambda2 <= CONNECTIVITY_TOL {
            return Err(GraphError::Disconnected { lambda2 });
        }
        Ok(g)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `L = D − A`.
    pub fn laplacian(&self) -> DenseMatrix {
        let mut l = DenseMatrix::zeros(self.n_nodes, self.n_nodes);
        for (&(i, j), &w) in self.edges.iter().zip(&self.weights) {
            l[(i, i)] += w;
            l[(j, j)] += w;
            l[(i, j)] -= w;
            l[(j, i)] -= w;
        }
        l
    }

    fn algebraic_connectivity(&self) -> Result<f64> {
        Ok(symmetric_eigen(&self.laplacian())?.values[1])
    }

    pub fn to_doc(&self) -> GraphDoc {
        let unit = self.weights.iter().all(|&w| w == 1.0);
        GraphDoc {
            n_nodes: self.n_nodes,
            edges: self.edges.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            weights: (!unit).then(|| self.weights.clone()),
        }
    }
}

/// JSON form of a graph; node indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub n_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl TryFrom<GraphDoc> for Graph {
    type Error = GraphError;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        let mut edges = Vec::with_capacity(doc.edges.len());
        for [i, j] in doc.edges {
            if i == 0 || j == 0 {
                return Err(GraphError::InvalidEdge(i, j, "node indices are 1-based"));
            }
            edges.push((i - 1, j - 1));
        }
        Graph::new(doc.n_nodes, edges, doc.weights)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Path,
    Cycle,
    Complete,
    RandomConnected,
}

/// Builds a connected graph of the given family. `random_connected` draws
/// Erdős–Rényi graphs with `p = 2 ln N / N` until one is connected; the seed
/// is only used by that family.
pub fn build_graph(kind: GraphKind, n_nodes: usize, seed: u64) -> Result<Graph> {
    if n_nodes < 2 {
        return Err(GraphError::TooFewNodes(n_nodes));
    }
    let n = n_nodes;
    let edges: Vec<(usize, usize)> = match kind {
        GraphKind::Path => (0..n - 1).map(|i| (i, i + 1)).collect(),
        GraphKind::Cycle => {
            let mut e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            if n > 2 {
                e.push((n - 1, 0));
            }
            e
        }
        GraphKind::Complete => (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect(),
        GraphKind::RandomConnected => {
            let p = (2.0 * (n as f64).ln() / n as f64).min(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            loop {
                let e: Vec<_> = (0..n)
                    .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                    .filter(|_| rng.gen_bool(p))
                    .collect();
                match Graph::new(n, e, None) {
                    Ok(g) => return Ok(g),
                    Err(GraphError::Disconnected { .. }) => continue,
                    Err(other) => return Err(other),
                }
            }
        }
    };
    Graph::new(n, edges, None)
}

/// Orthogonal diagonalisation `QᵀLQ = blkdiag(Λ, 0)` with `Q = [Q₁ Q₂]` and
/// `Q₂ = 𝟏/√N`.
#[derive(Debug, Clone)]
pub struct LaplacianTransform {
    pub l: DenseMatrix,
    /// `[Q₁ Q₂]`, `N×N` orthogonal.
    pub q: DenseMatrix,
    pub q1: DenseMatrix,
    pub q2: DenseMatrix,
    /// Nonzero Laplacian eigenvalues, ascending.
    pub lambda: Vec<f64>,
}

impl LaplacianTransform {
    pub fn lambda_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_diag(&self.lambda)
    }
}

pub fn laplacian_transform(g: &Graph) -> Result<LaplacianTransform> {
    let l = g.laplacian();
    let n = g.n_nodes();
    let eig = symmetric_eigen(&l)?;
    if eig.values[1] <= CONNECTIVITY_TOL {
        return Err(GraphError::Disconnected {
            lambda2: eig.values[1],
        });
    }
    let lambda = eig.values[1..].to_vec();
    let inv_sqrt = 1.0 / (n as f64).sqrt();
    // Q₁ from the nonzero eigenvectors; Q₂ set exactly to 𝟏/√N.
    let q = DenseMatrix::from_fn(n, n, |i, j| {
        if j + 1 < n {
            eig.vectors[(i, j + 1)]
        } else {
            inv_sqrt
        }
    });
    let q1 = q.block(0, n, 0, n - 1);
    let q2 = q.block(0, n, n - 1, n);
    Ok(LaplacianTransform {
        l,
        q,
        q1,
        q2,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let p = build_graph(GraphKind::Path, 3, 0).unwrap();
        assert_eq!(p.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(p.to_doc().edges, vec![[1, 2], [2, 3]]);
        assert_eq!(
            build_graph(GraphKind::Complete, 4, 0)
                .unwrap()
                .edges()
                .len(),
            6
        );
        assert_eq!(
            build_graph(GraphKind::Cycle, 5, 0).unwrap().edges().len(),
            5
        );
        assert_eq!(
            build_graph(GraphKind::Cycle, 2, 0).unwrap().edges().len(),
            1
        );
        assert!(matches!(
            build_graph(GraphKind::Path, 1, 0),
            Err(GraphError::TooFewNodes(1))
        ));
    }

    #[test]
    fn random_connected_is_deterministic() {
        let a = build_graph(GraphKind::RandomConnected, 10, 7).unwrap();
        let b = build_graph(GraphKind::RandomConnected, 10, 7).unwrap();
        assert_eq!(a, b);
        let c = build_graph(GraphKind::RandomConnected, 10, 8).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn invalid_graphs() {
        assert!(matches!(
            Graph::new(3, vec![(0, 1)], None),
            Err(GraphError::Disconnected { .. })
        ));
        assert!(matches!(
            Graph::new(2, vec![(1, 1)], None),
            Err(GraphError::InvalidEdge(1, 1, _))
        ));
        assert!(Graph::new(2, vec![(0, 1), (1, 0)], None).is_err());
        assert!(Graph::new(2, vec![(0, 1)], Some(vec![-1.0])).is_err());
        let doc = GraphDoc {
            n_nodes: 2,
            edges: vec![[0, 1]],
            weights: None,
        };
        assert!(Graph::try_from(doc).is_err());
    }

    #[test]
    fn path_spectrum() {
        let t = laplacian_transform(&build_graph(GraphKind::Path, 3, 0).unwrap()).unwrap();
        assert!((t.lambda[0] - 1.0).abs() < 1e-12 && (t.lambda[1] - 3.0).abs() < 1e-12);
        let ql = t.q.transpose().matmul(&t.l).matmul(&t.q);
        let want = DenseMatrix::from_diag(&[1.0, 3.0, 0.0]);
        assert!(ql.sub(&want).max_abs() < 1e-9);
    }

    #[test]
    fn complete_spectrum() {
        for n in [3, 5, 8] {
            let t = laplacian_transform(&build_graph(GraphKind::Complete, n, 0).unwrap()).unwrap();
            assert!(t.lambda.iter().all(|&v| (v - n as f64).abs() < 1e-10));
            let qtq = t.q.transpose().matmul(&t.q);
            assert!(qtq.sub(&DenseMatrix::identity(n)).max_abs() < 1e-10);
        }
    }
}
