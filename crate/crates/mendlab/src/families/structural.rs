//! Local structural constraints that characterize the layered trees.
//!
//! Children of `v` are the neighbors whose parent attribute is `v`; the
//! parent is the attribute itself, which may point to a non-neighbor (then
//! 1a fails). Siblings are neighbors joined by a non parent-child edge.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dir, Edge, Graph, Orientation, Vertex};
use crate::lcl::{ParentRef, View};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Constraint {
    /// Zero or one parent, joined by an edge oriented towards `v`.
    C1a,
    /// Zero or two children, joined by edges oriented away from `v`.
    C1b,
    /// No siblings iff no parent.
    C2a,
    /// One sibling only if the parent has at most one sibling.
    C2aPrime,
    /// At most two siblings.
    C2aDoublePrime,
    /// The children are siblings of each other.
    C2b,
    /// Children of neighboring siblings are linked by exactly one edge.
    C2c,
    /// Siblings share a parent or have sibling parents.
    C2cPrime,
    /// Sibling edges are oriented iff `v` is a leaf.
    C3a,
    /// Not oriented outwards to two siblings.
    C3b,
}

impl Constraint {
    pub const ALL: [Constraint; 10] = [
        Constraint::C1a,
        Constraint::C1b,
        Constraint::C2a,
        Constraint::C2aPrime,
        Constraint::C2aDoublePrime,
        Constraint::C2b,
        Constraint::C2c,
        Constraint::C2cPrime,
        Constraint::C3a,
        Constraint::C3b,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Constraint::C1a => "1a",
            Constraint::C1b => "1b",
            Constraint::C2a => "2a",
            Constraint::C2aPrime => "2a'",
            Constraint::C2aDoublePrime => "2a''",
            Constraint::C2b => "2b",
            Constraint::C2c => "2c",
            Constraint::C2cPrime => "2c'",
            Constraint::C3a => "3a",
            Constraint::C3b => "3b",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Oriented graph with a parent attribute, indexed locally. Used both for
/// whole graphs and for views or decoded views.
#[derive(Clone, Debug, Default)]
pub struct LocalDigraph {
    pub adj: Vec<Vec<(usize, Dir)>>,
    pub parent: Vec<ParentRef>,
}

impl LocalDigraph {
    pub fn from_graph(g: &Graph) -> Self {
        let adj = (0..g.n())
            .map(|v| g.ports(v).iter().map(|&(u, e)| (u, g.edge(e).dir_from(v))).collect())
            .collect();
        let parent = (0..g.n()).map(|v| g.parent(v).map_or(ParentRef::None, ParentRef::Local)).collect();
        LocalDigraph { adj, parent }
    }

    pub fn from_view(view: &View) -> Self {
        let adj = view.adj.iter().map(|ports| ports.iter().map(|p| (p.to, p.dir)).collect()).collect();
        LocalDigraph { adj, parent: view.parent.clone() }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    fn dir(&self, a: usize, b: usize) -> Option<Dir> {
        self.adj[a].iter().find(|&&(x, _)| x == b).map(|&(_, d)| d)
    }

    fn linked(&self, a: usize, b: usize) -> bool {
        self.dir(a, b).is_some()
    }

    fn parent_child(&self, a: usize, b: usize) -> bool {
        self.parent[a] == ParentRef::Local(b) || self.parent[b] == ParentRef::Local(a)
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.adj[v].iter().map(|&(x, _)| x).filter(|&x| self.parent[x] == ParentRef::Local(v)).collect()
    }

    /// Sibling links of `v` with their direction seen from `v`.
    pub fn sibling_links(&self, v: usize) -> Vec<(usize, Dir)> {
        self.adj[v].iter().copied().filter(|&(x, _)| !self.parent_child(v, x)).collect()
    }

    pub fn siblings(&self, v: usize) -> Vec<usize> {
        self.sibling_links(v).into_iter().map(|(x, _)| x).collect()
    }

    fn has_parent(&self, v: usize) -> bool {
        self.parent[v] != ParentRef::None
    }

    /// No children and no sibling edge oriented away.
    pub fn is_sink(&self, v: usize) -> bool {
        self.children(v).is_empty() && self.sibling_links(v).iter().all(|&(_, d)| d != Dir::Out)
    }

    /// Violated constraints at `v`. Reads the radius-2 neighborhood of `v`.
    pub fn violations(&self, v: usize) -> Vec<Constraint> {
        let mut out = Vec::new();
        let kids = self.children(v);
        let links = self.sibling_links(v);
        let sibs: Vec<usize> = links.iter().map(|&(x, _)| x).collect();

        match self.parent[v] {
            ParentRef::None => {}
            ParentRef::Outside => out.push(Constraint::C1a),
            ParentRef::Local(p) => {
                if self.dir(p, v) != Some(Dir::Out) {
                    out.push(Constraint::C1a);
                }
            }
        }
        if !(kids.is_empty() || kids.len() == 2) || kids.iter().any(|&c| self.dir(v, c) != Some(Dir::Out)) {
            out.push(Constraint::C1b);
        }
        if sibs.is_empty() != !self.has_parent(v) {
            out.push(Constraint::C2a);
        }
        if sibs.len() == 1 {
            let ok = match self.parent[v] {
                ParentRef::Local(p) => self.siblings(p).len() <= 1,
                _ => false,
            };
            if !ok {
                out.push(Constraint::C2aPrime);
            }
        }
        if sibs.len() > 2 {
            out.push(Constraint::C2aDoublePrime);
        }
        let kids_linked = kids
            .iter()
            .enumerate()
            .all(|(i, &a)| kids[i + 1..].iter().all(|&b| self.linked(a, b) && !self.parent_child(a, b)));
        if !kids_linked {
            out.push(Constraint::C2b);
        }
        if kids.len() == 2 {
            for &u in &sibs {
                let ukids = self.children(u);
                let ok = ukids.len() == 2
                    && ukids.iter().map(|&a| kids.iter().filter(|&&b| self.linked(a, b)).count()).sum::<usize>() == 1;
                if !ok {
                    out.push(Constraint::C2c);
                    break;
                }
            }
        }
        for &u in &sibs {
            let ok = match (self.parent[v], self.parent[u]) {
                (ParentRef::Local(p), ParentRef::Local(q)) => {
                    p == q || (self.linked(p, q) && !self.parent_child(p, q))
                }
                _ => false,
            };
            if !ok {
                out.push(Constraint::C2cPrime);
                break;
            }
        }
        let oriented = links.iter().filter(|&&(_, d)| d != Dir::Undirected).count();
        let consistent = if kids.is_empty() { oriented == links.len() } else { oriented == 0 };
        if !consistent {
            out.push(Constraint::C3a);
        }
        if links.len() >= 2 && links.iter().filter(|&&(_, d)| d == Dir::Out).count() >= 2 {
            out.push(Constraint::C3b);
        }
        out
    }

    pub fn is_broken(&self, v: usize) -> bool {
        !self.violations(v).is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    /// Broken vertices, ascending.
    pub broken: Vec<Vertex>,
    /// Every violated constraint per broken vertex.
    pub violations: Vec<(Vertex, Constraint)>,
}

impl StructuralReport {
    pub fn is_well_formed(&self) -> bool {
        self.broken.is_empty()
    }

    pub fn tags_at(&self, v: Vertex) -> Vec<Constraint> {
        self.violations.iter().filter(|&&(x, _)| x == v).map(|&(_, c)| c).collect()
    }

    pub fn has_tag(&self, c: Constraint) -> bool {
        self.violations.iter().any(|&(_, x)| x == c)
    }
}

pub fn broken_vertices(g: &Graph) -> StructuralReport {
    let d = LocalDigraph::from_graph(g);
    let mut report = StructuralReport::default();
    for v in 0..g.n() {
        let vs = d.violations(v);
        if !vs.is_empty() {
            report.broken.push(v);
            report.violations.extend(vs.into_iter().map(|c| (v, c)));
        }
    }
    report
}

/// Single edit of the edge set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    Delete(usize),
    Add(Vertex, Vertex),
    /// Reverse an oriented edge.
    Reverse(usize),
    /// Oriented becomes unoriented and vice versa.
    ToggleOrientation(usize),
}

/// Applies a mutation; the parent attribute is kept as is.
pub fn apply_mutation(g: &Graph, m: Mutation) -> Result<Graph> {
    let mut edges = g.edges().to_vec();
    match m {
        Mutation::Delete(e) => {
            check_edge(g, e)?;
            edges.remove(e);
        }
        Mutation::Add(u, v) => {
            if g.edge_between(u, v).is_some() {
                return Err(Error::Argument(format!("edge ({u}, {v}) already exists")));
            }
            edges.push(Edge::new(u, v));
        }
        Mutation::Reverse(e) => {
            check_edge(g, e)?;
            let x = edges[e];
            edges[e].orientation = match x.orientation {
                Orientation::None => return Err(Error::Argument(format!("edge {e} is unoriented"))),
                Orientation::Forward => Orientation::Backward,
                Orientation::Backward => Orientation::Forward,
            };
        }
        Mutation::ToggleOrientation(e) => {
            check_edge(g, e)?;
            edges[e].orientation = match edges[e].orientation {
                Orientation::None => Orientation::Forward,
                _ => Orientation::None,
            };
        }
    }
    g.with_edges(edges)
}

fn check_edge(g: &Graph, e: usize) -> Result<()> {
    if e >= g.edges().len() {
        return Err(Error::Argument(format!("edge index {e} out of range")));
    }
    Ok(())
}

/// Uniformly random mutation kind, then a uniformly random target. Reversal
/// is only drawn for tree edges: reversing a bottom-layer edge next to the
/// sink yields another layered tree.
pub fn random_mutation<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Mutation {
    let m = g.edges().len();
    loop {
        match rng.gen_range(0..4) {
            0 if m > 0 => return Mutation::Delete(rng.gen_range(0..m)),
            1 if g.n() >= 2 => {
                let u = rng.gen_range(0..g.n());
                let v = rng.gen_range(0..g.n());
                if u != v && g.edge_between(u, v).is_none() {
                    return Mutation::Add(u, v);
                }
            }
            2 => {
                let tree: Vec<usize> =
                    (0..m).filter(|&e| g.is_parent_child(g.edge(e).u, g.edge(e).v)).collect();
                if let Some(&e) = tree.choose(rng) {
                    return Mutation::Reverse(e);
                }
            }
            3 if m > 0 => return Mutation::ToggleOrientation(rng.gen_range(0..m)),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::layered::layered_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layered_trees_are_well_formed() {
        for h in 0..=5 {
            for j0 in 0..(1usize << h) {
                let t = layered_tree(h, j0).unwrap();
                let r = broken_vertices(&t.graph);
                assert!(r.is_well_formed(), "h={h} j0={j0}: {:?}", r.violations);
            }
        }
    }

    #[test]
    fn three_children_break_1b() {
        let parent = vec![None, Some(0), Some(0), Some(0)];
        let edges = vec![Edge::oriented(0, 1), Edge::oriented(0, 2), Edge::oriented(0, 3), Edge::new(1, 2), Edge::new(2, 3)];
        let g = Graph::with_parents(4, edges, Some(parent)).unwrap();
        assert!(broken_vertices(&g).tags_at(0).contains(&Constraint::C1b));
    }

    #[test]
    fn deleted_cousin_link() {
        let t = layered_tree(5, 4).unwrap();
        let (a, b) = (t.vertex(3, 1), t.vertex(3, 2));
        let e = t.graph.edge_between(a, b).unwrap();
        let g = apply_mutation(&t.graph, Mutation::Delete(e)).unwrap();
        let r = broken_vertices(&g);
        assert!(r.tags_at(t.vertex(2, 0)).contains(&Constraint::C2c));
        assert!(r.tags_at(t.vertex(4, 3)).contains(&Constraint::C2cPrime));
        assert!(r.tags_at(t.vertex(4, 4)).contains(&Constraint::C2cPrime));
    }

    #[test]
    fn mutations_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for h in 1..=4 {
            let t = layered_tree(h, (1 << h) - 1).unwrap();
            for _ in 0..100 {
                let m = random_mutation(&t.graph, &mut rng);
                let g = apply_mutation(&t.graph, m).unwrap();
                assert!(!broken_vertices(&g).is_well_formed(), "h={h} {m:?}");
            }
        }
    }

    #[test]
    fn sink_is_local() {
        let t = layered_tree(3, 5).unwrap();
        let d = LocalDigraph::from_graph(&t.graph);
        let sinks: Vec<usize> = (0..t.graph.n()).filter(|&v| d.is_sink(v)).collect();
        assert_eq!(sinks, vec![t.vertex(3, 5)]);
    }
}
