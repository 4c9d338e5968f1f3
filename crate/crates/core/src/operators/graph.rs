use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::SparseMatrix;

/// Undirected simple graph. Edges are stored once as `(i, j)` with `i < j`,
/// sorted and without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Normalizes an arbitrary edge list: orients each pair, drops self-loops
    /// and duplicates.
    pub fn new(nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a >= nodes || b >= nodes {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {nodes} nodes"
                )));
            }
            if a != b {
                out.push((a.min(b), a.max(b)));
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { nodes, edges: out })
    }

    /// Reads the off-diagonal pattern of a square matrix as an undirected graph.
    pub fn from_adjacency(a: &SparseMatrix) -> Result<Self> {
        let edges: Vec<(usize, usize)> = a
            .triplets()
            .filter(|&(i, j, v)| i != j && v != 0.0)
            .map(|(i, j, _)| (i, j))
            .collect();
        Self::new(a.dim(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Component label per node, labels assigned in order of the smallest node.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency_lists();
        let mut label = vec![usize::MAX; self.nodes];
        let mut next = 0;
        let mut stack = Vec::new();
        for root in 0..self.nodes {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = next;
            stack.push(root);
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

/// `L = D - A` for the unweighted graph.
pub fn graph_laplacian(g: &Graph) -> SparseMatrix {
    let mut degree = vec![0.0; g.nodes];
    let mut trips = Vec::with_capacity(2 * g.edges.len() + g.nodes);
    for &(i, j) in &g.edges {
        degree[i] += 1.0;
        degree[j] += 1.0;
        trips.push((i, j, -1.0));
        trips.push((j, i, -1.0));
    }
    trips.extend(degree.iter().enumerate().map(|(i, &d)| (i, i, d)));
    SparseMatrix::from_triplets(g.nodes, trips)
        .expect("graph edges are in range")
        .set_symmetric_unchecked(true)
}

/// Induced subgraph on the largest connected component, relabeled
/// `0..size` in increasing order of original id. Ties go to the component
/// holding the smallest node id.
pub fn largest_connected_component(g: &Graph) -> Result<Graph> {
    if g.nodes == 0 {
        return Err(Error::EmptyGraph);
    }
    let label = g.components();
    let ncomp = label.iter().max().map_or(0, |&m| m + 1);
    let mut sizes = vec![0usize; ncomp];
    for &l in &label {
        sizes[l] += 1;
    }
    // labels follow smallest node order, so the first maximum wins the tie
    let best = (0..ncomp)
        .fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best });
    let mut map = vec![usize::MAX; g.nodes];
    let mut next = 0;
    for (v, &l) in label.iter().enumerate() {
        if l == best {
            map[v] = next;
            next += 1;
        }
    }
    let edges = g
        .edges
        .iter()
        .filter(|&&(i, _)| label[i] == best)
        .map(|&(i, j)| (map[i], map[j]));
    Graph::new(next, edges)
}

/// Erdős–Rényi style graph with `edges` distinct random edges.
pub fn random_graph(nodes: usize, edges: usize, seed: u64) -> Result<Graph> {
    let max_edges = nodes.saturating_mul(nodes.saturating_sub(1)) / 2;
    if edges > max_edges {
        return Err(Error::InvalidArgument(format!(
            "{edges} edges requested but {nodes} nodes admit at most {max_edges}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = std::collections::BTreeSet::new();
    while set.len() < edges {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    }
    Graph::new(nodes, set)
}
