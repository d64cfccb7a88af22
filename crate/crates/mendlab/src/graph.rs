//! Bounded-degree graphs with optional edge orientations and an optional
//! parent attribute, plus rooted trees built on top of them.
//!
//! Vertices are dense indices `0..n`. Adjacency is stored in compressed form
//! and the position of an edge in a vertex's incidence list is its *port*.
//! Ports follow edge insertion order, so they do not depend on vertex ids.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Default hard cap on generated instance sizes.
pub const DEFAULT_VERTEX_CAP: usize = 10_000_000;

static CAP_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Sets a process-wide cap taking precedence over `MENDLAB_MAX_N`; `None`
/// clears it.
pub fn set_vertex_cap(cap: Option<usize>) {
    CAP_OVERRIDE.store(cap.unwrap_or(0), Ordering::Relaxed);
}

/// Vertex cap for generators, overridable through `MENDLAB_MAX_N`.
pub fn vertex_cap() -> usize {
    let o = CAP_OVERRIDE.load(Ordering::Relaxed);
    if o > 0 {
        return o;
    }
    std::env::var("MENDLAB_MAX_N")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_VERTEX_CAP)
}

pub(crate) fn check_cap(requested: u128) -> Result<()> {
    let cap = vertex_cap();
    if requested > cap as u128 {
        return Err(Error::InstanceTooLarge { requested, cap });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "none")]
    None,
    /// Oriented from the first endpoint to the second.
    #[serde(rename = "uv")]
    Forward,
    #[serde(rename = "vu")]
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub orientation: Orientation,
}

impl Edge {
    pub fn new(u: Vertex, v: Vertex) -> Self {
        Edge { u, v, orientation: Orientation::None }
    }

    pub fn oriented(from: Vertex, to: Vertex) -> Self {
        Edge { u: from, v: to, orientation: Orientation::Forward }
    }

    pub fn other(&self, x: Vertex) -> Vertex {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Direction of the edge seen from endpoint `x`.
    pub fn dir_from(&self, x: Vertex) -> Dir {
        match (self.orientation, x == self.u) {
            (Orientation::None, _) => Dir::Undirected,
            (Orientation::Forward, true) | (Orientation::Backward, false) => Dir::Out,
            _ => Dir::In,
        }
    }
}

/// Edge direction relative to one endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Undirected,
    Out,
    In,
}

/// Simple graph: no self-loops, no parallel edges.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    incidence: Vec<(Vertex, usize)>,
    degree_bound: usize,
    parent: Option<Vec<Option<Vertex>>>,
    child_offsets: Vec<usize>,
    child_list: Vec<Vertex>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::with_parents(n, edges, None)
    }

    /// Builds a graph carrying a parent attribute. The attribute is an input
    /// label and is not required to agree with the edges.
    pub fn with_parents(
        n: usize,
        edges: Vec<Edge>,
        parent: Option<Vec<Option<Vertex>>>,
    ) -> Result<Self> {
        check_cap(n as u128)?;
        let mut seen = HashSet::with_capacity(edges.len());
        let mut degree = vec![0usize; n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::Argument(format!("edge ({}, {}) out of range for n = {n}", e.u, e.v)));
            }
            if e.u == e.v {
                return Err(Error::Argument(format!("self-loop at {}", e.u)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::Argument(format!("parallel edge ({}, {})", e.u, e.v)));
            }
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut incidence = vec![(0, 0); offsets[n]];
        for (i, e) in edges.iter().enumerate() {
            incidence[fill[e.u]] = (e.v, i);
            fill[e.u] += 1;
            incidence[fill[e.v]] = (e.u, i);
            fill[e.v] += 1;
        }
        let degree_bound = degree.iter().copied().max().unwrap_or(0);

        let (child_offsets, child_list) = match &parent {
            Some(p) => {
                if p.len() != n {
                    return Err(Error::Argument(format!("parent map has {} entries, expected {n}", p.len())));
                }
                let mut count = vec![0usize; n];
                for (v, q) in p.iter().enumerate() {
                    if let Some(q) = *q {
                        if q >= n || q == v {
                            return Err(Error::Argument(format!("invalid parent {q} for vertex {v}")));
                        }
                        count[q] += 1;
                    }
                }
                let mut off = Vec::with_capacity(n + 1);
                off.push(0);
                for c in &count {
                    off.push(off.last().unwrap() + c);
                }
                let mut fill = off.clone();
                let mut list = vec![0; off[n]];
                for (v, q) in p.iter().enumerate() {
                    if let Some(q) = *q {
                        list[fill[q]] = v;
                        fill[q] += 1;
                    }
                }
                (off, list)
            }
            None => (vec![0; n + 1], Vec::new()),
        };

        Ok(Graph { n, edges, offsets, incidence, degree_bound, parent, child_offsets, child_list })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Incident `(neighbor, edge index)` pairs in port order.
    pub fn ports(&self, v: Vertex) -> &[(Vertex, usize)] {
        &self.incidence[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.ports(v).iter().map(|&(u, _)| u)
    }

    /// Port index of the edge `{v, u}` at `v`.
    pub fn port_to(&self, v: Vertex, u: Vertex) -> Option<usize> {
        self.ports(v).iter().position(|&(w, _)| w == u)
    }

    pub fn edge_between(&self, v: Vertex, u: Vertex) -> Option<usize> {
        self.ports(v).iter().find(|&&(w, _)| w == u).map(|&(_, e)| e)
    }

    pub fn has_parent_attr(&self) -> bool {
        self.parent.is_some()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent.as_ref().and_then(|p| p[v])
    }

    pub fn parents(&self) -> Option<&[Option<Vertex>]> {
        self.parent.as_deref()
    }

    /// Vertices whose parent attribute is `v`, in index order.
    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.child_list[self.child_offsets[v]..self.child_offsets[v + 1]]
    }

    pub fn is_parent_child(&self, a: Vertex, b: Vertex) -> bool {
        self.parent(a) == Some(b) || self.parent(b) == Some(a)
    }

    /// Rebuilds the graph with a different edge list, keeping the parent attribute.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<Graph> {
        Graph::with_parents(self.n, edges, self.parent.clone())
    }

    pub fn with_parent_attr(&self, parent: Option<Vec<Option<Vertex>>>) -> Result<Graph> {
        Graph::with_parents(self.n, self.edges.clone(), parent)
    }
}

/// BFS distances from `sources`, ignoring orientation, up to `max` (inclusive).
/// Unreached vertices get `usize::MAX`.
pub fn bfs_distances(g: &Graph, sources: &[Vertex], max: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        if dist[x] == max {
            continue;
        }
        for y in g.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Vertices within distance `radius` of `v` with their distances, in BFS order.
pub fn ball(g: &Graph, v: Vertex, radius: usize) -> Vec<(Vertex, usize)> {
    let mut out = vec![(v, 0)];
    let mut seen = HashSet::new();
    seen.insert(v);
    let mut i = 0;
    while i < out.len() {
        let (x, d) = out[i];
        i += 1;
        if d == radius {
            continue;
        }
        for y in g.neighbors(x) {
            if seen.insert(y) {
                out.push((y, d + 1));
            }
        }
    }
    out
}

/// `{u : dist(u, v) <= radius}` as a sorted vertex list.
pub fn neighborhood(g: &Graph, v: Vertex, radius: usize) -> Result<Vec<Vertex>> {
    if v >= g.n() {
        return Err(Error::Argument(format!("vertex {v} out of range for n = {}", g.n())));
    }
    let mut vs: Vec<Vertex> = ball(g, v, radius).into_iter().map(|(x, _)| x).collect();
    vs.sort_unstable();
    Ok(vs)
}

/// Largest distance from `v` to a vertex of its component.
pub fn eccentricity(g: &Graph, v: Vertex) -> usize {
    bfs_distances(g, &[v], usize::MAX)
        .into_iter()
        .filter(|&d| d != usize::MAX)
        .max()
        .unwrap_or(0)
}

/// A graph whose parent attribute describes a spanning tree.
#[derive(Clone, Debug)]
pub struct RootedTree {
    graph: Graph,
    root: Vertex,
}

impl RootedTree {
    /// Builds a rooted tree from a parent map; tree edges are stored unoriented.
    pub fn from_parents(parent: Vec<Option<Vertex>>) -> Result<Self> {
        Self::from_parents_with(parent, Orientation::None)
    }

    /// Same as [`RootedTree::from_parents`], with tree edges stored as
    /// `parent -> child` when `orientation` is `Forward`.
    pub fn from_parents_with(parent: Vec<Option<Vertex>>, orientation: Orientation) -> Result<Self> {
        let n = parent.len();
        let edges = parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| Edge { u: p, v, orientation }))
            .collect();
        let graph = Graph::with_parents(n, edges, Some(parent))?;
        Self::new(graph)
    }

    /// Validates that the parent attribute of `graph` is a spanning tree of it.
    pub fn new(graph: Graph) -> Result<Self> {
        let n = graph.n();
        let parents = graph
            .parents()
            .ok_or_else(|| Error::Argument("rooted tree needs a parent attribute".into()))?;
        let roots: Vec<Vertex> = (0..n).filter(|&v| parents[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Argument(format!("expected exactly one root, found {}", roots.len())));
        }
        if graph.edges().len() + 1 != n {
            return Err(Error::Argument(format!("tree on {n} vertices needs {} edges", n - 1)));
        }
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                if graph.edge_between(v, *p).is_none() {
                    return Err(Error::Argument(format!("parent {p} of {v} is not adjacent")));
                }
            }
        }
        let root = roots[0];
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        seen[root] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &c in graph.children(x) {
                if !seen[c] {
                    seen[c] = true;
                    count += 1;
                    stack.push(c);
                }
            }
        }
        if count != n {
            return Err(Error::Argument("parent map is cyclic or disconnected".into()));
        }
        Ok(RootedTree { graph, root })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.graph.parent(v)
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        self.graph.children(v)
    }

    /// Depth of every vertex.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.n()];
        for v in self.bfs_order() {
            if let Some(p) = self.parent(v) {
                depth[v] = depth[p] + 1;
            }
        }
        depth
    }

    pub fn bfs_order(&self) -> Vec<Vertex> {
        let mut order = Vec::with_capacity(self.n());
        order.push(self.root);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            order.extend_from_slice(self.children(x));
        }
        order
    }
}

/// Number of vertices of the balanced `delta`-ary tree of the given height.
pub fn balanced_tree_size(delta: usize, height: usize) -> u128 {
    if delta == 1 {
        return height as u128 + 1;
    }
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..=height {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(delta as u128);
    }
    total
}

/// Balanced tree where every internal vertex has `delta` children and all
/// leaves sit at depth `height`. Vertices are numbered in BFS order.
pub fn build_balanced_tree(delta: usize, height: usize) -> Result<RootedTree> {
    if delta == 0 {
        return Err(Error::Precondition("delta must be at least 1".into()));
    }
    let size = balanced_tree_size(delta, height);
    check_cap(size)?;
    let n = size as usize;
    let parent = (0..n).map(|v| if v == 0 { None } else { Some((v - 1) / delta) }).collect();
    RootedTree::from_parents(parent)
}
