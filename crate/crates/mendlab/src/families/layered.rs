//! Layered trees: a balanced binary tree with horizontal links in every
//! layer and a bottom layer oriented towards a single sink.

use crate::error::{Error, Result};
use crate::graph::{check_cap, Edge, Graph, Vertex};

#[derive(Clone, Debug)]
pub struct LayeredTree {
    pub h: usize,
    pub j0: usize,
    pub graph: Graph,
    /// `(layer, index)` of every vertex.
    pub coords: Vec<(usize, usize)>,
}

impl LayeredTree {
    pub fn vertex(&self, i: usize, j: usize) -> Vertex {
        (1usize << i) - 1 + j
    }

    pub fn root(&self) -> Vertex {
        0
    }

    pub fn sink(&self) -> Vertex {
        self.vertex(self.h, self.j0)
    }

    pub fn width(&self) -> usize {
        1 << self.h
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Vertices from the root down to the sink.
    pub fn sink_path(&self) -> Vec<Vertex> {
        let mut path = Vec::with_capacity(self.h + 1);
        let mut x = self.sink();
        loop {
            path.push(x);
            match self.graph.parent(x) {
                Some(p) => x = p,
                None => break,
            }
        }
        path.reverse();
        path
    }
}

pub fn layered_tree(h: usize, j0: usize) -> Result<LayeredTree> {
    if h >= 40 {
        return Err(Error::Precondition(format!("height {h} is too large")));
    }
    let width = 1usize << h;
    if j0 >= width {
        return Err(Error::Precondition(format!("sink position {j0} out of range 0..{width}")));
    }
    let n = (1u128 << (h + 1)) - 1;
    check_cap(n)?;
    let n = n as usize;
    let id = |i: usize, j: usize| (1usize << i) - 1 + j;
    let mut coords = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(3 * n);
    for i in 0..=h {
        for j in 0..(1usize << i) {
            coords.push((i, j));
            if i == 0 {
                parent.push(None);
            } else {
                let p = id(i - 1, j / 2);
                parent.push(Some(p));
                edges.push(Edge::oriented(p, id(i, j)));
            }
            if j + 1 < (1 << i) {
                let (a, b) = (id(i, j), id(i, j + 1));
                edges.push(if i < h {
                    Edge::new(a, b)
                } else if j < j0 {
                    Edge::oriented(a, b)
                } else {
                    Edge::oriented(b, a)
                });
            }
        }
    }
    let graph = Graph::with_parents(n, edges, Some(parent))?;
    Ok(LayeredTree { h, j0, graph, coords })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Dir, Orientation};

    #[test]
    fn shape() {
        let t = layered_tree(5, 4).unwrap();
        assert_eq!(t.n(), 63);
        assert_eq!(t.coords[t.sink()], (5, 4));
        assert_eq!(t.sink_path().len(), 6);
        let single = layered_tree(0, 0).unwrap();
        assert_eq!((single.n(), single.graph.edges().len()), (1, 0));
        assert!(layered_tree(3, 8).is_err());
    }

    #[test]
    fn bottom_points_at_sink() {
        let t = layered_tree(2, 3).unwrap();
        for j in 0..3 {
            let e = t.graph.edge_between(t.vertex(2, j), t.vertex(2, j + 1)).unwrap();
            assert_eq!(t.graph.edge(e).dir_from(t.vertex(2, j)), Dir::Out);
        }
        let t = layered_tree(2, 1).unwrap();
        let e = t.graph.edge_between(t.vertex(2, 2), t.vertex(2, 3)).unwrap();
        assert_eq!(t.graph.edge(e).dir_from(t.vertex(2, 3)), Dir::Out);
        let e = t.graph.edge_between(t.vertex(1, 0), t.vertex(1, 1)).unwrap();
        assert_eq!(t.graph.edge(e).orientation, Orientation::None);
    }
}
