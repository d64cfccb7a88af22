//! Orientation-free encoding of oriented graphs.
//!
//! A vertex becomes a center carrying `delta + 1` pendant leaves. An edge
//! `u - v` becomes a path `u - a - b - v` through two interior vertices; a
//! pendant leaf on the interior vertex next to the head encodes the
//! direction. Decoding keeps every vertex with at least `delta + 1` leaf
//! neighbors and every such path carrying at most one leaf.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{check_cap, Dir, Edge, Graph, Orientation, Vertex};
use crate::labeling::{Label, PartialLabeling};
use crate::lcl::{ParentRef, View};

use super::structural::LocalDigraph;

#[derive(Clone, Debug)]
pub struct Encoded {
    pub graph: Graph,
    /// Center of every vertex of the source graph.
    pub center: Vec<Vertex>,
    pub delta: usize,
}

#[derive(Clone, Debug)]
pub struct Decoded {
    pub graph: Graph,
    /// Vertex of the encoded graph behind every decoded vertex.
    pub original: Vec<Vertex>,
}

pub fn encode_unoriented(g: &Graph, delta: usize) -> Result<Encoded> {
    if g.degree_bound() > delta {
        return Err(Error::Precondition(format!("max degree {} exceeds delta {delta}", g.degree_bound())));
    }
    let n = g.n();
    let directed = g.edges().iter().filter(|e| e.orientation != Orientation::None).count();
    let total = n as u128 * (delta as u128 + 2) + 2 * g.edges().len() as u128 + directed as u128;
    check_cap(total)?;
    let mut edges = Vec::with_capacity(total as usize);
    let mut next = n;
    for v in 0..n {
        for _ in 0..=delta {
            edges.push(Edge::new(v, next));
            next += 1;
        }
    }
    for e in g.edges() {
        let (a, b) = (next, next + 1);
        next += 2;
        edges.push(Edge::new(e.u, a));
        edges.push(Edge::new(a, b));
        edges.push(Edge::new(b, e.v));
        let head_side = match e.orientation {
            Orientation::None => None,
            Orientation::Forward => Some(b),
            Orientation::Backward => Some(a),
        };
        if let Some(x) = head_side {
            edges.push(Edge::new(x, next));
            next += 1;
        }
    }
    let parent = g.parents().map(|ps| {
        let mut full = ps.to_vec();
        full.resize(next, None);
        full
    });
    let graph = Graph::with_parents(next, edges, parent)?;
    Ok(Encoded { graph, center: (0..n).collect(), delta })
}

/// Copies `lambda` onto the centers; every other vertex gets `filler`.
pub fn encode_labeling(enc: &Encoded, lambda: &PartialLabeling, filler: Label) -> Result<PartialLabeling> {
    if lambda.n() != enc.center.len() {
        return Err(Error::Argument("labeling size does not match the source graph".into()));
    }
    let mut a = vec![Some(filler); enc.graph.n()];
    for (v, &c) in enc.center.iter().enumerate() {
        a[c] = lambda.get(v);
    }
    PartialLabeling::new(lambda.alphabet().clone(), a)
}

/// Decoded structure over some index space: centers and oriented edges.
struct Core {
    centers: Vec<usize>,
    edges: Vec<(usize, usize, Orientation)>,
}

fn decode_core(deg: &[usize], adj: &[Vec<usize>], delta: usize) -> Core {
    let n = adj.len();
    let leaf = |x: usize| deg[x] == 1;
    let leaves: Vec<usize> = (0..n).map(|x| adj[x].iter().filter(|&&y| leaf(y)).count()).collect();
    let is_center: Vec<bool> = (0..n).map(|x| leaves[x] > delta).collect();
    let interior = |x: usize| !leaf(x) && !is_center[x] && deg[x] == 2 + leaves[x];
    let centers: Vec<usize> = (0..n).filter(|&x| is_center[x]).collect();
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for &c in &centers {
        for &a in &adj[c] {
            if !interior(a) {
                continue;
            }
            for &b in &adj[a] {
                if b == c || !interior(b) {
                    continue;
                }
                for &d in &adj[b] {
                    if d == a || d == c || !is_center[d] || c > d {
                        continue;
                    }
                    if leaves[a] + leaves[b] > 1 || !seen.insert((c, d)) {
                        continue;
                    }
                    let o = if leaves[a] == 1 {
                        Orientation::Backward
                    } else if leaves[b] == 1 {
                        Orientation::Forward
                    } else {
                        Orientation::None
                    };
                    edges.push((c, d, o));
                }
            }
        }
    }
    Core { centers, edges }
}

pub fn decode_oriented(g: &Graph, delta: usize) -> Result<Decoded> {
    let deg: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let adj: Vec<Vec<usize>> = (0..g.n()).map(|v| g.neighbors(v).collect()).collect();
    let core = decode_core(&deg, &adj, delta);
    let index: HashMap<usize, usize> = core.centers.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let edges = core
        .edges
        .iter()
        .map(|&(c, d, o)| Edge { u: index[&c], v: index[&d], orientation: o })
        .collect();
    // a parent that is not a center is dropped
    let parent = g.has_parent_attr().then(|| {
        core.centers.iter().map(|&c| g.parent(c).and_then(|p| index.get(&p).copied())).collect()
    });
    let graph = Graph::with_parents(core.centers.len(), edges, parent)?;
    Ok(Decoded { graph, original: core.centers })
}

/// Decodes a view. Returns the decoded digraph, the view index behind each
/// decoded vertex and the decoded index of the view center, or `None` when
/// the center is not a center.
pub(crate) fn decode_view(view: &View, delta: usize) -> Option<(LocalDigraph, Vec<usize>, usize)> {
    let adj: Vec<Vec<usize>> = view.adj.iter().map(|ps| ps.iter().map(|p| p.to).collect()).collect();
    let core = decode_core(&view.degree, &adj, delta);
    let me = core.centers.iter().position(|&c| c == 0)?;
    let index: HashMap<usize, usize> = core.centers.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut d = LocalDigraph {
        adj: vec![Vec::new(); core.centers.len()],
        parent: core
            .centers
            .iter()
            .map(|&c| match view.parent[c] {
                ParentRef::None => ParentRef::None,
                ParentRef::Outside => ParentRef::Outside,
                ParentRef::Local(p) => index.get(&p).map_or(ParentRef::Outside, |&j| ParentRef::Local(j)),
            })
            .collect(),
    };
    for &(c, e, o) in &core.edges {
        let (i, j) = (index[&c], index[&e]);
        let (di, dj) = match o {
            Orientation::None => (Dir::Undirected, Dir::Undirected),
            Orientation::Forward => (Dir::Out, Dir::In),
            Orientation::Backward => (Dir::In, Dir::Out),
        };
        d.adj[i].push((j, di));
        d.adj[j].push((i, dj));
    }
    Some((d, core.centers, me))
}

/// Whether `f` (source vertex to decoded vertex) is an isomorphism that
/// preserves orientations and the parent attribute.
pub fn is_isomorphism(src: &Graph, dst: &Graph, f: &[Vertex]) -> bool {
    if src.n() != dst.n() || f.len() != src.n() || src.edges().len() != dst.edges().len() {
        return false;
    }
    let mut hit = vec![false; dst.n()];
    for &x in f {
        if x >= dst.n() || std::mem::replace(&mut hit[x], true) {
            return false;
        }
    }
    let edges_ok = src.edges().iter().all(|e| match dst.edge_between(f[e.u], f[e.v]) {
        None => false,
        Some(k) => dst.edge(k).dir_from(f[e.u]) == e.dir_from(e.u),
    });
    let parents_ok = (0..src.n()).all(|v| src.parent(v).map(|p| f[p]) == dst.parent(f[v]));
    edges_ok && parents_ok
}
