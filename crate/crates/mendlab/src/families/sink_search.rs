//! Interval search for the sink of a layered tree.
//!
//! The explorer starts at the root. A query walks to a bottom-layer vertex
//! along the path that adds the fewest new vertices to the explored set
//! (0-1 BFS over all edges), then reads the two bottom-layer edges there.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dir, Vertex};

use super::layered::LayeredTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Midpoint,
    RandomPivot,
    Leftmost,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Strategy::Midpoint),
            "random_pivot" | "random-pivot" => Ok(Strategy::RandomPivot),
            "leftmost" => Ok(Strategy::Leftmost),
            _ => Err(Error::Argument(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Query {
    /// Bottom-layer index.
    pub position: usize,
    /// Newly explored vertices.
    pub cost: usize,
    /// `min(high - l, l - low) < h` at the time of the query.
    pub short: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SinkSearchResult {
    pub explored: usize,
    pub queries: Vec<Query>,
    pub sink: usize,
}

struct Explorer<'a> {
    t: &'a LayeredTree,
    seen: Vec<bool>,
    count: usize,
}

impl Explorer<'_> {
    /// Walks to `target` adding the fewest new vertices; returns how many.
    fn walk_to(&mut self, target: Vertex) -> usize {
        if self.seen[target] {
            return 0;
        }
        let g = &self.t.graph;
        let n = g.n();
        let mut dist = vec![usize::MAX; n];
        let mut prev = vec![usize::MAX; n];
        let mut dq = VecDeque::new();
        for x in (0..n).filter(|&x| self.seen[x]) {
            dist[x] = 0;
            dq.push_back(x);
        }
        while let Some(x) = dq.pop_front() {
            if x == target {
                break;
            }
            for y in g.neighbors(x) {
                let w = usize::from(!self.seen[y]);
                if dist[x] + w < dist[y] {
                    dist[y] = dist[x] + w;
                    prev[y] = x;
                    if w == 0 {
                        dq.push_front(y);
                    } else {
                        dq.push_back(y);
                    }
                }
            }
        }
        let mut added = 0;
        let mut x = target;
        while !self.seen[x] {
            self.seen[x] = true;
            added += 1;
            x = prev[x];
        }
        self.count += added;
        added
    }

    fn bottom_dir(&self, j: usize, k: usize) -> Dir {
        let g = &self.t.graph;
        let (a, b) = (self.t.vertex(self.t.h, j), self.t.vertex(self.t.h, k));
        g.edge(g.edge_between(a, b).expect("bottom edge")).dir_from(a)
    }
}

pub fn sink_search(t: &LayeredTree, strategy: Strategy, seed: u64) -> SinkSearchResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ex = Explorer { t, seen: vec![false; t.n()], count: 1 };
    ex.seen[t.root()] = true;
    let h = t.h;
    let (mut lo, mut hi) = (0usize, t.width() - 1);
    let mut queries = Vec::new();
    while lo < hi {
        let l = match strategy {
            Strategy::Midpoint => lo + (hi - lo) / 2,
            Strategy::RandomPivot => rng.gen_range(lo..=hi),
            Strategy::Leftmost => lo,
        };
        let short = (hi - l).min(l - lo) < h;
        let cost = ex.walk_to(t.vertex(h, l));
        queries.push(Query { position: l, cost, short });
        let right_out = l + 1 < t.width() && ex.bottom_dir(l, l + 1) == Dir::Out;
        let left_out = l > 0 && ex.bottom_dir(l, l - 1) == Dir::Out;
        if right_out {
            lo = l + 1;
        } else if left_out {
            hi = l - 1;
        } else {
            lo = l;
            hi = l;
        }
    }
    // the sink is known; visit it
    ex.walk_to(t.vertex(h, lo));
    SinkSearchResult { explored: ex.count, queries, sink: lo }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::layered::layered_tree;

    #[test]
    fn finds_every_sink() {
        for h in 0..=5 {
            for j0 in 0..(1usize << h) {
                let t = layered_tree(h, j0).unwrap();
                for s in [Strategy::Midpoint, Strategy::RandomPivot, Strategy::Leftmost] {
                    let r = sink_search(&t, s, 7);
                    assert_eq!(r.sink, j0);
                    assert!(r.explored > h);
                }
            }
        }
    }

    #[test]
    fn query_counts() {
        for j0 in [0, 1] {
            assert!(sink_search(&layered_tree(1, j0).unwrap(), Strategy::Midpoint, 0).queries.len() <= 2);
        }
        for j0 in [0, 1, 300, 511, 512, 1000, 1023] {
            let r = sink_search(&layered_tree(10, j0).unwrap(), Strategy::Midpoint, 0);
            assert!(r.queries.len() <= 10, "j0={j0}: {}", r.queries.len());
        }
    }

    #[test]
    fn first_query_walks_down() {
        let t = layered_tree(6, 40).unwrap();
        let r = sink_search(&t, Strategy::Midpoint, 0);
        assert_eq!(r.queries[0].cost, 6);
        assert!(!r.queries[0].short);
    }
}
