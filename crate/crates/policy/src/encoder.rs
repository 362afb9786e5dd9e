use crysflow_tensor::{Tape, Tensor, Var};
use crysflow_xtal::{CrystalGraph, Lattice};

use crate::params::{BoundPolicy, EncoderKind};

/// What the encoder sees of a sampler state.
#[derive(Debug, Clone)]
pub struct StateInput<'a> {
    pub space_group: u16,
    pub lattice: &'a Lattice,
    pub graph: &'a CrystalGraph,
}

/// Encoded state: the space-group embedding, pooled graph embedding, lattice
/// embedding, and their concatenation.
pub struct StateEmbedding {
    pub h_sg: Var,
    pub h_graph: Var,
    pub h_lattice: Var,
    pub h_state: Var,
}

/// Raw lattice features: three lengths followed by sin/cos of each angle.
pub fn lattice_feature_vector(l: &Lattice) -> [f64; 9] {
    let (sa, ca) = sincos_deg(l.alpha);
    let (sb, cb) = sincos_deg(l.beta);
    let (sg, cg) = sincos_deg(l.gamma);
    [l.a, l.b, l.c, sa, ca, sb, cb, sg, cg]
}

fn sincos_deg(deg: f64) -> (f64, f64) {
    if deg == 90.0 {
        (1.0, 0.0)
    } else if deg == 120.0 {
        (0.75f64.sqrt(), -0.5)
    } else {
        let r = deg.to_radians();
        (r.sin(), r.cos())
    }
}

impl BoundPolicy<'_> {
    pub fn encode_state(&self, tape: &mut Tape, input: &StateInput) -> StateEmbedding {
        let h_sg = self.sg_embedding(tape, input.space_group);
        let h_lattice = self.encode_lattice(tape, input.lattice);
        let h_graph = self.encode_graph(tape, input.graph);
        let h_state = tape.concat(&[h_sg, h_graph, h_lattice]);
        let width = self.config.state_width();
        let h_state = tape.reshape(h_state, vec![1, width]);
        StateEmbedding { h_sg, h_graph, h_lattice, h_state }
    }

    /// Embedding-table row of a group number (1-based).
    pub fn sg_embedding(&self, tape: &mut Tape, number: u16) -> Var {
        let table = self.var("enc.sg_embed");
        let w = self.config.sg_embed_width;
        let start = (number as usize - 1) * w;
        let idx: Vec<usize> = (start..start + w).collect();
        let row = tape.gather(table, &idx);
        tape.reshape(row, vec![1, w])
    }

    fn encode_lattice(&self, tape: &mut Tape, lattice: &Lattice) -> Var {
        let feats = lattice_feature_vector(lattice);
        let x = tape.constant(Tensor::new(vec![1, 9], feats.to_vec()));
        let z1 = tape.matmul(x, self.var("enc.lattice.w1"));
        let z1b = tape.add(z1, self.var("enc.lattice.b1"));
        let h = tape.tanh(z1b);
        let z2 = tape.matmul(h, self.var("enc.lattice.w2"));
        let z2b = tape.add(z2, self.var("enc.lattice.b2"));
        tape.tanh(z2b)
    }

    /// Mean-pooled node embedding after message passing. The empty graph (the
    /// initial sampler state) encodes to the zero vector by convention.
    fn encode_graph(&self, tape: &mut Tape, graph: &CrystalGraph) -> Var {
        let wv = self.config.node_width;
        if graph.nodes.is_empty() {
            return tape.constant(Tensor::zeros(vec![1, wv]));
        }
        let n = graph.nodes.len();
        // node input is the normalized atomic number; geometry enters only
        // through edge distances, which keeps the embedding invariant under
        // rigid translations and atom reindexing
        let raw: Vec<f64> = graph.nodes.iter().map(|(z, _)| *z as f64 / 94.0).collect();
        let x = tape.constant(Tensor::new(vec![n, 1], raw));
        let z0 = tape.matmul(x, self.var("enc.node_in.w"));
        let bias = self.var("enc.node_in.b");
        let z0b = add_rows(tape, z0, bias, n);
        let mut nodes = tape.tanh(z0b);

        match self.config.encoder {
            EncoderKind::Megnet => {
                if graph.edges.is_empty() {
                    // no interactions: pool the projected node features
                    return mean_pool(tape, nodes, n, wv);
                }
                let e = graph.edges.len();
                let mut raw_e = Vec::with_capacity(e);
                for edge in &graph.edges {
                    raw_e.push(edge.distance / self.config.graph_cutoff);
                }
                let ef = tape.constant(Tensor::new(vec![e, 1], raw_e));
                let z_e = tape.matmul(ef, self.var("enc.edge_in.w"));
                let edge_bias = self.var("enc.edge_in.b");
                let z_eb = add_rows(tape, z_e, edge_bias, e);
                let mut edges = tape.tanh(z_eb);

                // incoming-edge mean aggregation matrix [n, e]
                let mut incoming = vec![0usize; n];
                for edge in &graph.edges {
                    incoming[edge.dst] += 1;
                }
                let mut agg = vec![0.0; n * e];
                for (k, edge) in graph.edges.iter().enumerate() {
                    agg[edge.dst * e + k] = 1.0 / incoming[edge.dst].max(1) as f64;
                }
                let agg = tape.constant(Tensor::new(vec![n, e], agg));

                // gather indices for per-edge endpoint rows
                let mut src_idx = Vec::with_capacity(e * wv);
                let mut dst_idx = Vec::with_capacity(e * wv);
                for edge in &graph.edges {
                    for c in 0..wv {
                        src_idx.push(edge.src * wv + c);
                        dst_idx.push(edge.dst * wv + c);
                    }
                }

                for l in 0..self.config.message_passing_layers {
                    // edge update from endpoint embeddings and the edge state
                    // (the global attribute is fixed at zero and folds into
                    // the bias)
                    let src_rows = tape.gather(nodes, &src_idx);
                    let src_rows = tape.reshape(src_rows, vec![e, wv]);
                    let dst_rows = tape.gather(nodes, &dst_idx);
                    let dst_rows = tape.reshape(dst_rows, vec![e, wv]);
                    let t1 = tape.matmul(src_rows, self.var(&format!("enc.mp{l}.e_src.w")));
                    let t2 = tape.matmul(dst_rows, self.var(&format!("enc.mp{l}.e_dst.w")));
                    let t3 = tape.matmul(edges, self.var(&format!("enc.mp{l}.e_feat.w")));
                    let s12 = tape.add(t1, t2);
                    let s123 = tape.add(s12, t3);
                    let eb = self.var(&format!("enc.mp{l}.e.b"));
                    let sb = add_rows(tape, s123, eb, e);
                    edges = tape.tanh(sb);

                    // node update from aggregated incoming edges and self
                    let pooled = tape.matmul(agg, edges);
                    let n1 = tape.matmul(pooled, self.var(&format!("enc.mp{l}.v_agg.w")));
                    let n2 = tape.matmul(nodes, self.var(&format!("enc.mp{l}.v_self.w")));
                    let ns = tape.add(n1, n2);
                    let vb = self.var(&format!("enc.mp{l}.v.b"));
                    let nsb = add_rows(tape, ns, vb, n);
                    nodes = tape.tanh(nsb);
                }
                mean_pool(tape, nodes, n, wv)
            }
            EncoderKind::Gcn => {
                // normalized adjacency with self-loops; parallel edges from
                // periodic images accumulate weight
                let mut adj = vec![0.0; n * n];
                for i in 0..n {
                    adj[i * n + i] += 1.0;
                }
                for edge in &graph.edges {
                    adj[edge.src * n + edge.dst] += 1.0;
                }
                let mut degree = vec![0.0f64; n];
                for i in 0..n {
                    for j in 0..n {
                        degree[i] += adj[i * n + j];
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        adj[i * n + j] /= (degree[i] * degree[j]).sqrt();
                    }
                }
                let adj = tape.constant(Tensor::new(vec![n, n], adj));
                for l in 0..self.config.message_passing_layers {
                    let mixed = tape.matmul(adj, nodes);
                    let z = tape.matmul(mixed, self.var(&format!("enc.gcn{l}.w")));
                    let gb = self.var(&format!("enc.gcn{l}.b"));
                    let zb = add_rows(tape, z, gb, n);
                    nodes = tape.tanh(zb);
                }
                mean_pool(tape, nodes, n, wv)
            }
        }
    }
}

/// Add a `[1, k]` bias row to every row of a `[n, k]` matrix by expanding it
/// through a constant column of ones.
fn add_rows(tape: &mut Tape, x: Var, bias: Var, n: usize) -> Var {
    if n == 1 {
        return tape.add(x, bias);
    }
    let ones = tape.constant(Tensor::new(vec![n, 1], vec![1.0; n]));
    let expanded = tape.matmul(ones, bias);
    tape.add(x, expanded)
}

fn mean_pool(tape: &mut Tape, nodes: Var, n: usize, width: usize) -> Var {
    let ones = tape.constant(Tensor::new(vec![1, n], vec![1.0 / n as f64; n]));
    let pooled = tape.matmul(ones, nodes);
    tape.reshape(pooled, vec![1, width])
}
