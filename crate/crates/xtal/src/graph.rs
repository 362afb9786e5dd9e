use crate::neighbors::neighbor_list;
use crate::{CrystalStructure, Result};

/// Directed edge of a crystal graph. `image` is the lattice image the
/// destination atom sits in relative to the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub image: [i32; 3],
    pub distance: f64,
}

/// Crystal structure as a directed graph: node features are (atomic number,
/// fractional coordinate), edges come from the periodic k-nearest-neighbor
/// search.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalGraph {
    pub nodes: Vec<(u8, [f64; 3])>,
    pub edges: Vec<GraphEdge>,
}

impl CrystalGraph {
    pub fn empty() -> Self {
        CrystalGraph { nodes: Vec::new(), edges: Vec::new() }
    }

    /// Out-edges of node `i`, in edge order.
    pub fn out_edges(&self, i: usize) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.src == i)
    }
}

/// Build the graph with the given radius cutoff and per-node neighbor cap.
/// An empty structure yields the empty graph (the sampler's initial state).
pub fn build_graph(s: &CrystalStructure, cutoff: f64, max_k: usize) -> Result<CrystalGraph> {
    if s.is_empty() {
        return Ok(CrystalGraph::empty());
    }
    let lists = neighbor_list(s, cutoff, Some(max_k))?;
    let nodes = s.atoms.iter().map(|a| (a.z, a.frac)).collect();
    let mut edges = Vec::new();
    for (src, nbrs) in lists.into_iter().enumerate() {
        for n in nbrs {
            edges.push(GraphEdge { src, dst: n.atom, image: n.image, distance: n.distance });
        }
    }
    Ok(CrystalGraph { nodes, edges })
}
