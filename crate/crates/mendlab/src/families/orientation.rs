//! Edge orientations written as vertex labels. A label is a word over
//! `{o, i}` with one letter per port: `o` means the edge leaves the vertex.
//! The two endpoints of an edge must disagree (one `o`, one `i`).

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, RootedTree, Vertex};
use crate::labeling::{Alphabet, Label, PartialLabeling};
use crate::lcl::{is_mend_local, LclProblem, MendSolver, PreparedSolver, ProblemKind, View};
use crate::search::{min_mend_search, SearchOutcome, DEFAULT_NODE_BUDGET};

/// Which out-degree rule the orientation has to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationRule {
    /// Every vertex of degree at least 2 has an outgoing edge.
    Sinkless,
    /// Out-degree 0 is only allowed at vertices of degree exactly 2.
    DegreeTwoSink,
}

impl OrientationRule {
    pub fn allows(&self, degree: usize, out: usize) -> bool {
        match self {
            OrientationRule::Sinkless => degree < 2 || out >= 1,
            OrientationRule::DegreeTwoSink => out >= 1 || degree == 2,
        }
    }
}

/// Largest degree covered by the port alphabet.
pub const PORT_ALPHABET_DEGREE: usize = 3;

/// Decoded port word: length and bitmask of outgoing ports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortWord {
    pub len: usize,
    pub out: u32,
}

impl PortWord {
    pub fn is_out(&self, port: usize) -> bool {
        self.out >> port & 1 == 1
    }

    pub fn out_degree(&self) -> usize {
        self.out.count_ones() as usize
    }

    pub fn name(&self) -> String {
        (0..self.len).map(|p| if self.is_out(p) { 'o' } else { 'i' }).collect()
    }
}

fn words(max_degree: usize) -> Vec<PortWord> {
    let mut out = Vec::new();
    for len in 0..=max_degree {
        for mask in 0..(1u32 << len) {
            out.push(PortWord { len, out: mask });
        }
    }
    out
}

/// Alphabet of all port words up to `max_degree` letters.
pub fn port_alphabet(max_degree: usize) -> Alphabet {
    Alphabet::new(words(max_degree).iter().map(PortWord::name)).expect("distinct words")
}

pub fn word_label(w: PortWord) -> Label {
    // words are ordered by length, then by mask
    ((1u32 << w.len) - 1 + w.out) as Label
}

pub fn label_word(l: Label) -> PortWord {
    let l = l as u32 + 1;
    let len = 31 - l.leading_zeros();
    PortWord { len: len as usize, out: l - (1 << len) }
}

struct OrientationVerifier {
    rule: OrientationRule,
}

impl crate::lcl::Verifier for OrientationVerifier {
    fn happy(&self, view: &View) -> bool {
        let w = label_word(view.labels[0]);
        if w.len != view.degree[0] {
            return false;
        }
        for p in &view.adj[0] {
            let other = label_word(view.labels[p.to]);
            if p.back_port >= other.len || w.is_out(p.port) == other.is_out(p.back_port) {
                return false;
            }
        }
        self.rule.allows(w.len, w.out_degree())
    }
}

/// Port-word LCL for the given out-degree rule.
pub fn orientation_problem(rule: OrientationRule) -> LclProblem {
    let name = match rule {
        OrientationRule::Sinkless => "sinkless-orientation",
        OrientationRule::DegreeTwoSink => "degree-two-sink",
    };
    LclProblem::new(name, Arc::new(port_alphabet(PORT_ALPHABET_DEGREE)), 1, Arc::new(OrientationVerifier { rule }))
        .with_solver(Arc::new(FlipPathSolver { rule }))
        .with_kind(ProblemKind::Orientation(rule))
}

/// Vertices of degree at least 2 need an outgoing edge.
pub fn sinkless_orientation_problem() -> LclProblem {
    orientation_problem(OrientationRule::Sinkless)
}

/// Labeling that orients edge `e` towards `heads[e]`.
pub fn orientation_labeling(g: &Graph, heads: &[Vertex]) -> Result<PartialLabeling> {
    if g.degree_bound() > PORT_ALPHABET_DEGREE {
        return Err(Error::Argument(format!("port alphabet covers degree <= {PORT_ALPHABET_DEGREE}")));
    }
    let ab = Arc::new(port_alphabet(PORT_ALPHABET_DEGREE));
    let assignment = (0..g.n())
        .map(|v| {
            let mut out = 0u32;
            for (p, &(_, e)) in g.ports(v).iter().enumerate() {
                if heads[e] != v {
                    out |= 1 << p;
                }
            }
            Some(word_label(PortWord { len: g.degree(v), out }))
        })
        .collect();
    PartialLabeling::new(ab, assignment)
}

/// Orients every edge of a tree towards `target`.
pub fn toward_vertex(g: &Graph, target: Vertex) -> Result<PartialLabeling> {
    let dist = crate::graph::bfs_distances(g, &[target], usize::MAX);
    let heads: Vec<Vertex> = g
        .edges()
        .iter()
        .map(|e| if dist[e.u] < dist[e.v] { e.u } else { e.v })
        .collect();
    orientation_labeling(g, &heads)
}

/// Worst case for sinkless orientation: a balanced binary tree with every
/// edge pointing at the unlabeled root.
pub fn sinkless_worst_case(height: usize) -> Result<(RootedTree, PartialLabeling, Vertex)> {
    let t = crate::graph::build_balanced_tree(2, height)?;
    let mut lambda = toward_vertex(t.graph(), t.root())?;
    lambda.set(t.root(), None);
    let root = t.root();
    Ok((t, lambda, root))
}

#[derive(Clone, Debug)]
pub struct DegreeTwoSinkInstance {
    pub tree: RootedTree,
    pub problem: LclProblem,
    pub labeling: PartialLabeling,
    pub hole: Vertex,
    /// The subdivision vertex, the only vertex of degree 2.
    pub target: Vertex,
}

/// Balanced tree whose root has three children and whose other internal
/// vertices have two, with one uniformly chosen bottom edge subdivided.
/// All edges point at the unlabeled root.
pub fn degree_two_sink_instance(height: usize, seed: u64) -> Result<DegreeTwoSinkInstance> {
    if height < 2 {
        return Err(Error::Precondition("height must be at least 2".into()));
    }
    let mut parent: Vec<Option<Vertex>> = vec![None];
    let mut layer: Vec<Vertex> = vec![0];
    for depth in 1..=height {
        let fanout = if depth == 1 { 3 } else { 2 };
        let mut next = Vec::with_capacity(layer.len() * fanout);
        for &p in &layer {
            for _ in 0..fanout {
                next.push(parent.len());
                parent.push(Some(p));
            }
        }
        crate::graph::check_cap(parent.len() as u128 + 1)?;
        layer = next;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaf = layer[rng.gen_range(0..layer.len())];
    let target = parent.len();
    parent.push(parent[leaf]);
    parent[leaf] = Some(target);
    let tree = RootedTree::from_parents(parent)?;
    let mut labeling = toward_vertex(tree.graph(), tree.root())?;
    labeling.set(tree.root(), None);
    let hole = tree.root();
    Ok(DegreeTwoSinkInstance { tree, problem: orientation_problem(OrientationRule::DegreeTwoSink), labeling, hole, target })
}

/// Exact mend for orientation problems when the hole's surroundings are
/// consistent: label the hole, or reverse a shortest directed path into it
/// ending at a vertex that can spare an outgoing edge. Other situations are
/// handed to the generic search.
struct FlipPathSolver {
    rule: OrientationRule,
}

struct PreparedFlip<'a> {
    rule: OrientationRule,
    problem: LclProblem,
    g: &'a Graph,
    lambda: &'a PartialLabeling,
    hole: Vertex,
    /// Vertices within distance 1 of another hole.
    relaxed: Vec<bool>,
    simple: bool,
}

impl MendSolver for FlipPathSolver {
    fn prepare<'a>(
        &'a self,
        g: &'a Graph,
        lambda: &'a PartialLabeling,
        hole: Vertex,
    ) -> Result<Box<dyn PreparedSolver + 'a>> {
        let others: Vec<Vertex> = lambda.holes().into_iter().filter(|&h| h != hole).collect();
        let near = crate::graph::bfs_distances(g, &others, 1);
        let relaxed: Vec<bool> = near.iter().map(|&d| d != usize::MAX).collect();
        let word = |x: Vertex| lambda.get(x).map(label_word);
        let far_from_others = crate::graph::bfs_distances(g, &[hole], 2)
            .iter()
            .enumerate()
            .all(|(x, &d)| d == usize::MAX || x == hole || !lambda.is_hole(x));
        let neighbors_ok = g.neighbors(hole).all(|w| {
            let Some(ww) = word(w) else { return false };
            if ww.len != g.degree(w) || !self.rule.allows(ww.len, ww.out_degree()) {
                return false;
            }
            g.ports(w).iter().enumerate().all(|(p, &(x, _))| {
                if x == hole {
                    return true;
                }
                match word(x) {
                    None => false,
                    Some(xw) => {
                        let bp = g.port_to(x, w).unwrap();
                        bp < xw.len && xw.is_out(bp) != ww.is_out(p)
                    }
                }
            })
        });
        Ok(Box::new(PreparedFlip {
            rule: self.rule,
            problem: orientation_problem(self.rule).without_solver(),
            g,
            lambda,
            hole,
            relaxed,
            simple: far_from_others && neighbors_ok && g.degree_bound() <= PORT_ALPHABET_DEGREE,
        }))
    }
}

impl PreparedFlip<'_> {
    fn word(&self, x: Vertex) -> PortWord {
        label_word(self.lambda.get(x).expect("labeled"))
    }

    /// Whether `x` may lose one outgoing edge.
    fn can_spare(&self, x: Vertex) -> bool {
        if self.relaxed[x] {
            return true;
        }
        let w = self.word(x);
        w.out_degree() >= 1 && self.rule.allows(w.len, w.out_degree() - 1)
    }

    fn flip_path(&self, allowed: Option<&[Vertex]>) -> Option<PartialLabeling> {
        let g = self.g;
        let v = self.hole;
        let in_allowed: Box<dyn Fn(Vertex) -> bool> = match allowed {
            None => Box::new(|_| true),
            Some(a) => {
                let set: std::collections::HashSet<Vertex> = a.iter().copied().collect();
                Box::new(move |x| set.contains(&x))
            }
        };
        // bit of the hole on each port, chosen to agree with the neighbors
        let mut v_out = 0u32;
        for (p, &(w, _)) in g.ports(v).iter().enumerate() {
            let bp = g.port_to(w, v).unwrap();
            if !self.word(w).is_out(bp) {
                v_out |= 1 << p;
            }
        }
        let deg = g.degree(v);
        let mut out = self.lambda.clone();
        if self.rule.allows(deg, v_out.count_ones() as usize) {
            out.set(v, Some(word_label(PortWord { len: deg, out: v_out })));
            return Some(out);
        }
        // BFS over reversed edges: from x, step to y when the edge is y -> x
        let mut prev: std::collections::HashMap<Vertex, Vertex> = std::collections::HashMap::new();
        let mut queue = VecDeque::new();
        let mut end = None;
        for &(w, _) in g.ports(v) {
            if in_allowed(w) && !prev.contains_key(&w) {
                prev.insert(w, v);
                if self.can_spare(w) {
                    end = Some(w);
                    break;
                }
                queue.push_back(w);
            }
        }
        while end.is_none() {
            let Some(x) = queue.pop_front() else { break };
            let xw = self.word(x);
            for (p, &(y, _)) in g.ports(x).iter().enumerate() {
                if y == v || prev.contains_key(&y) || !in_allowed(y) || self.lambda.is_hole(y) {
                    continue;
                }
                if xw.is_out(p) {
                    continue;
                }
                prev.insert(y, x);
                if self.can_spare(y) {
                    end = Some(y);
                    break;
                }
                queue.push_back(y);
            }
        }
        let end = end?;
        let mut path = vec![end];
        while *path.last().unwrap() != v {
            path.push(prev[path.last().unwrap()]);
        }
        path.reverse();
        // path[0] = v; reverse each edge path[i+1] -> path[i]
        let mut words: std::collections::HashMap<Vertex, PortWord> = std::collections::HashMap::new();
        words.insert(v, PortWord { len: deg, out: v_out });
        for &x in &path[1..] {
            words.insert(x, self.word(x));
        }
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let pa = g.port_to(a, b).unwrap();
            let pb = g.port_to(b, a).unwrap();
            words.get_mut(&a).unwrap().out |= 1 << pa;
            words.get_mut(&b).unwrap().out &= !(1 << pb);
        }
        for (x, w) in words {
            out.set(x, Some(word_label(w)));
        }
        Some(out)
    }
}

impl PreparedSolver for PreparedFlip<'_> {
    fn min_mend_within(&self, allowed: Option<&[Vertex]>) -> Result<Option<PartialLabeling>> {
        if self.simple {
            let candidate = self.flip_path(allowed);
            match candidate {
                Some(m) if is_mend_local(&self.problem, self.g, self.lambda, &m, self.hole)? => return Ok(Some(m)),
                None => return Ok(None),
                Some(_) => {}
            }
        }
        match min_mend_search(&self.problem, self.g, self.lambda, self.hole, allowed, DEFAULT_NODE_BUDGET)?.0 {
            SearchOutcome::Found(m) => Ok(Some(m)),
            SearchOutcome::NoMend => Ok(None),
        }
    }
}
