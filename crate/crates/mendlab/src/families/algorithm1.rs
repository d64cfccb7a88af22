//! Full-view mender for path to the sink.
//!
//! Phase 1 colors the hole black and climbs while that leaves the parent
//! without a red child. Once a red ancestor has the sink (or, generalized,
//! a broken vertex) below it, Phase 2 recolors a red path down to it. A hole
//! at the root is colored red and goes straight to Phase 2.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph, Vertex};
use crate::labeling::{hamming_diff, PartialLabeling};
use crate::lcl::ParentRef;
use crate::menders::MendRun;

use super::path_to_sink::{Mode, BLACK, RED};
use super::structural::LocalDigraph;

#[derive(Clone, Debug)]
pub struct Algorithm1Trace {
    pub run: MendRun,
    /// Moves from a vertex to its parent.
    pub climbs: usize,
    /// Label writes over both phases.
    pub relabels: usize,
}

struct Ctx<'a> {
    g: &'a Graph,
    d: LocalDigraph,
    target: Vec<bool>,
    relaxed: Vec<bool>,
    labels: PartialLabeling,
    explored: BTreeSet<Vertex>,
    writes: usize,
}

impl Ctx<'_> {
    fn write(&mut self, x: Vertex, l: crate::labeling::Label) {
        self.labels.set(x, Some(l));
        self.explored.insert(x);
        self.writes += 1;
    }

    fn has_target_below(&self, x: Vertex) -> bool {
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            if self.target[y] {
                return true;
            }
            stack.extend(self.d.children(y));
        }
        false
    }

    /// Red path from `top` (already red) down to the nearest vertex that is
    /// satisfied when red.
    fn phase2(&mut self, top: Vertex) -> Result<()> {
        let stop = |c: &Self, x: Vertex| c.target[x] || c.relaxed[x] || c.labels.get(x) == Some(RED);
        if self.target[top] || self.relaxed[top] {
            return Ok(());
        }
        let mut prev: HashMap<Vertex, Vertex> = HashMap::new();
        let mut queue = VecDeque::from([top]);
        let mut end = None;
        'bfs: while let Some(x) = queue.pop_front() {
            for c in self.d.children(x) {
                if prev.contains_key(&c) || c == top || self.labels.is_hole(c) {
                    continue;
                }
                prev.insert(c, x);
                if stop(self, c) {
                    end = Some(c);
                    break 'bfs;
                }
                queue.push_back(c);
            }
        }
        let Some(end) = end else {
            return Err(Error::Infeasible(format!("no sink or broken vertex below {top}")));
        };
        let mut x = end;
        while x != top {
            self.explored.insert(x);
            if self.labels.get(x) != Some(RED) {
                self.write(x, RED);
            }
            x = prev[&x];
        }
        Ok(())
    }
}

pub fn algorithm1_mend(g: &Graph, lambda: &PartialLabeling, v: Vertex, generalized: bool) -> Result<MendRun> {
    Ok(algorithm1_trace(g, lambda, v, generalized)?.run)
}

pub fn algorithm1_trace(g: &Graph, lambda: &PartialLabeling, v: Vertex, generalized: bool) -> Result<Algorithm1Trace> {
    if v >= g.n() || !lambda.is_hole(v) {
        return Err(Error::Precondition(format!("vertex {v} is not a hole")));
    }
    if !g.has_parent_attr() {
        return Err(Error::Precondition("the graph needs a parent attribute".into()));
    }
    let mode = if generalized { Mode::OrientedGeneral } else { Mode::Promise };
    let d = LocalDigraph::from_graph(g);
    let target = (0..g.n()).map(|x| d.is_sink(x) || (generalized && d.is_broken(x))).collect();
    let others: Vec<Vertex> = lambda.holes().into_iter().filter(|&h| h != v).collect();
    let relaxed = bfs_distances(g, &others, mode.radius()).iter().map(|&x| x != usize::MAX).collect();
    let mut c = Ctx { g, d, target, relaxed, labels: lambda.clone(), explored: BTreeSet::from([v]), writes: 0 };
    let mut climbs = 0;
    let mut current = v;
    if c.d.parent[v] == ParentRef::None {
        c.write(v, RED);
        c.phase2(v)?;
    } else {
        loop {
            c.write(current, BLACK);
            let ParentRef::Local(p) = c.d.parent[current] else { break };
            c.explored.insert(p);
            if !c.d.children(p).contains(&current) || c.target[p] || c.relaxed[p] {
                break;
            }
            match c.labels.get(p) {
                None | Some(BLACK) => break,
                _ => {}
            }
            let other_red = c.d.children(p).into_iter().filter(|&o| o != current).any(|o| {
                c.explored.insert(o);
                c.labels.get(o) == Some(RED)
            });
            if other_red {
                break;
            }
            climbs += 1;
            current = p;
            if c.has_target_below(p) {
                c.phase2(p)?;
                break;
            }
            if c.g.parent(p).is_none() {
                return Err(Error::Infeasible(format!("no sink or broken vertex below the root {p}")));
            }
        }
    }
    let diff = hamming_diff(lambda, &c.labels)?;
    let run = MendRun { explored: c.explored.into_iter().collect(), mend: c.labels, diff, steps: c.writes, seed: 0 };
    Ok(Algorithm1Trace { run, climbs, relabels: c.writes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::layered::layered_tree;
    use crate::families::path_to_sink::{path_to_sink_problem, random_partial_solution, unique_solution, worst_case_labeling};
    use crate::lcl::is_mend;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn root_hole_paints_the_sink_path() {
        let t = layered_tree(5, 4).unwrap();
        let lambda = worst_case_labeling(&t);
        let tr = algorithm1_trace(&t.graph, &lambda, 0, false).unwrap();
        assert_eq!(tr.run.mend, unique_solution(&t));
        assert_eq!(tr.relabels, 6);
    }

    #[test]
    fn black_parent_returns_at_once() {
        let t = layered_tree(3, 0).unwrap();
        let mut lambda = unique_solution(&t);
        let leaf = t.vertex(3, 7);
        lambda.set(leaf, None);
        let tr = algorithm1_trace(&t.graph, &lambda, leaf, false).unwrap();
        assert_eq!((tr.relabels, tr.climbs), (1, 0));
    }

    #[test]
    fn random_instances_are_mended() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for generalized in [false, true] {
            let p = path_to_sink_problem(if generalized { Mode::OrientedGeneral } else { Mode::Promise });
            for h in 1..=5 {
                for _ in 0..10 {
                    let t = layered_tree(h, rng.gen_range(0..1 << h)).unwrap();
                    let mut lambda = random_partial_solution(&p, &t.graph, &unique_solution(&t), rng.gen_range(0..3), 50, &mut rng);
                    let labeled = lambda.domain();
                    let v = labeled[rng.gen_range(0..labeled.len())];
                    lambda.set(v, None);
                    let tr = algorithm1_trace(&t.graph, &lambda, v, generalized).unwrap();
                    assert!(is_mend(&p, &t.graph, &lambda, &tr.run.mend, v).unwrap().is_mend());
                    assert!(tr.relabels <= 2 * h);
                }
            }
        }
    }
}
