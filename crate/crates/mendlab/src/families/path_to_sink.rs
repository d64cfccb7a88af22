//! Path to the sink: the root is red and every red vertex other than the
//! sink has a red child.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{min_mend_dp, DemandRules};
use crate::error::{Error, Result};
use crate::graph::{ball, bfs_distances, Graph, Vertex};
use crate::labeling::{Alphabet, Label, PartialLabeling};
use crate::lcl::{LclProblem, MendSolver, ParentRef, PreparedSolver, ProblemKind, View};
use crate::search::{min_mend_search, SearchOutcome, DEFAULT_NODE_BUDGET};

use super::encoding::{decode_oriented, decode_view, encode_unoriented};
use super::layered::LayeredTree;
use super::structural::LocalDigraph;

pub const RED: Label = 0;
pub const BLACK: Label = 1;

/// Max degree of a layered tree: parent, two children, two siblings.
pub const LAYERED_MAX_DEGREE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Rules apply everywhere; inputs are promised to be layered trees.
    Promise,
    /// Broken vertices are unconstrained.
    OrientedGeneral,
    /// The graph is read through the unoriented encoding with
    /// [`LAYERED_MAX_DEGREE`].
    UnorientedGeneral,
}

impl Mode {
    pub fn radius(&self) -> usize {
        match self {
            Mode::Promise => 1,
            Mode::OrientedGeneral => 2,
            Mode::UnorientedGeneral => 9,
        }
    }
}

pub fn path_to_sink_alphabet() -> Alphabet {
    Alphabet::new(["red", "black"]).expect("two labels")
}

fn rule_holds(d: &LocalDigraph, labels: impl Fn(usize) -> Label, x: usize) -> bool {
    let l = labels(x);
    if d.parent[x] == ParentRef::None && l != RED {
        return false;
    }
    l != RED || d.is_sink(x) || d.children(x).into_iter().any(|c| labels(c) == RED)
}

struct PathToSinkVerifier {
    mode: Mode,
}

impl crate::lcl::Verifier for PathToSinkVerifier {
    fn happy(&self, view: &View) -> bool {
        match self.mode {
            Mode::Promise => rule_holds(&LocalDigraph::from_view(view), |i| view.labels[i], 0),
            Mode::OrientedGeneral => {
                let d = LocalDigraph::from_view(view);
                d.is_broken(0) || rule_holds(&d, |i| view.labels[i], 0)
            }
            Mode::UnorientedGeneral => {
                let Some((d, back, me)) = decode_view(view, LAYERED_MAX_DEGREE) else { return true };
                d.is_broken(me) || rule_holds(&d, |i| view.labels[back[i]], me)
            }
        }
    }
}

struct Rules {
    radius: usize,
    /// Red needs a red child.
    constrained: Vec<bool>,
    /// Must be red.
    root: Vec<bool>,
    relaxed: Option<Vec<bool>>,
}

const NEED_RED: [u32; 2] = [1, 0];

impl Rules {
    fn new(g: &Graph, mode: Mode) -> Self {
        let d = LocalDigraph::from_graph(g);
        let broken: Vec<bool> = match mode {
            Mode::Promise => vec![false; g.n()],
            _ => (0..g.n()).map(|v| d.is_broken(v)).collect(),
        };
        Rules {
            radius: mode.radius(),
            constrained: (0..g.n()).map(|v| !broken[v] && !d.is_sink(v)).collect(),
            root: (0..g.n()).map(|v| !broken[v] && g.parent(v).is_none()).collect(),
            relaxed: None,
        }
    }
}

impl DemandRules for Rules {
    fn num_labels(&self) -> usize {
        2
    }

    fn radius(&self) -> usize {
        self.radius
    }

    fn demand(&self, u: Vertex, l: Label) -> Option<&[u32]> {
        (l == RED && self.constrained[u]).then_some(&NEED_RED[..])
    }

    fn root_ok(&self, u: Vertex, l: Label) -> bool {
        !self.root[u] || l == RED
    }

    fn relaxed(&self) -> Option<&[bool]> {
        self.relaxed.as_deref()
    }
}

fn parents_adjacent(g: &Graph) -> bool {
    g.has_parent_attr() && (0..g.n()).all(|v| g.parent(v).is_none_or(|p| g.edge_between(v, p).is_some()))
}

/// Unoriented instance read through its global decoding. Only centers are
/// ever unhappy, so a mend of the decoded oriented instance, with the
/// relaxation measured in the encoded graph, is a mend here.
struct DecodedView {
    rules: Rules,
    graph: Graph,
    lambda: PartialLabeling,
    hole: Vertex,
    /// Encoded vertex behind each decoded vertex.
    original: Vec<Vertex>,
    index: std::collections::HashMap<Vertex, Vertex>,
}

impl DecodedView {
    /// `None` unless `g` is exactly the encoding of its decoding and the
    /// hole is a center.
    fn new(g: &Graph, lambda: &PartialLabeling, hole: Vertex) -> Option<Self> {
        let dec = decode_oriented(g, LAYERED_MAX_DEGREE).ok()?;
        let re = encode_unoriented(&dec.graph, LAYERED_MAX_DEGREE).ok()?;
        if re.graph.n() != g.n() || re.graph.edges().len() != g.edges().len() || !parents_adjacent(&dec.graph) {
            return None;
        }
        let index: std::collections::HashMap<Vertex, Vertex> =
            dec.original.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let dhole = *index.get(&hole)?;
        let others: Vec<Vertex> = lambda.holes().into_iter().filter(|&h| h != hole).collect();
        let near = bfs_distances(g, &others, Mode::UnorientedGeneral.radius());
        let mut rules = Rules::new(&dec.graph, Mode::OrientedGeneral);
        rules.relaxed = Some(dec.original.iter().map(|&c| near[c] != usize::MAX).collect());
        let assignment = dec.original.iter().map(|&c| lambda.get(c)).collect();
        let dl = PartialLabeling::new(lambda.alphabet().clone(), assignment).ok()?;
        Some(DecodedView { rules, graph: dec.graph, lambda: dl, hole: dhole, original: dec.original, index })
    }

    fn min_mend_within(&self, lambda: &PartialLabeling, allowed: Option<&[Vertex]>) -> Result<Option<PartialLabeling>> {
        let mapped: Option<Vec<Vertex>> =
            allowed.map(|a| a.iter().filter_map(|x| self.index.get(x).copied()).collect());
        let Some((_, m)) = min_mend_dp(&self.rules, &self.graph, &self.lambda, self.hole, mapped.as_deref())? else {
            return Ok(None);
        };
        let mut out = lambda.clone();
        for (i, &c) in self.original.iter().enumerate() {
            if m.get(i) != self.lambda.get(i) {
                out.set(c, m.get(i));
            }
        }
        Ok(Some(out))
    }
}

struct PathToSinkSolver {
    mode: Mode,
}

struct Prepared<'a> {
    rules: Option<Rules>,
    decoded: Option<DecodedView>,
    problem: LclProblem,
    g: &'a Graph,
    lambda: &'a PartialLabeling,
    hole: Vertex,
}

impl MendSolver for PathToSinkSolver {
    fn prepare<'a>(
        &'a self,
        g: &'a Graph,
        lambda: &'a PartialLabeling,
        hole: Vertex,
    ) -> Result<Box<dyn PreparedSolver + 'a>> {
        // the demand DP reads children from the parent attribute; it is
        // exact when every parent is a neighbor
        let unoriented = self.mode == Mode::UnorientedGeneral;
        let rules = (!unoriented && parents_adjacent(g)).then(|| Rules::new(g, self.mode));
        let decoded = if unoriented { DecodedView::new(g, lambda, hole) } else { None };
        let problem = path_to_sink_problem(self.mode).without_solver();
        Ok(Box::new(Prepared { rules, decoded, problem, g, lambda, hole }))
    }
}

impl PreparedSolver for Prepared<'_> {
    fn min_mend_within(&self, allowed: Option<&[Vertex]>) -> Result<Option<PartialLabeling>> {
        if let Some(d) = &self.decoded {
            match d.min_mend_within(self.lambda, allowed) {
                Err(Error::Contract(_)) => {}
                r => return r,
            }
        }
        if let Some(rules) = &self.rules {
            match min_mend_dp(rules, self.g, self.lambda, self.hole, allowed) {
                Ok(r) => return Ok(r.map(|(_, m)| m)),
                Err(Error::Contract(_)) => {}
                Err(e) => return Err(e),
            }
        }
        match min_mend_search(&self.problem, self.g, self.lambda, self.hole, allowed, DEFAULT_NODE_BUDGET)?.0 {
            SearchOutcome::Found(m) => Ok(Some(m)),
            SearchOutcome::NoMend => Ok(None),
        }
    }
}

pub fn path_to_sink_problem(mode: Mode) -> LclProblem {
    let name = match mode {
        Mode::Promise => "path-to-sink",
        Mode::OrientedGeneral => "path-to-sink-oriented",
        Mode::UnorientedGeneral => "path-to-sink-unoriented",
    };
    LclProblem::new(name, Arc::new(path_to_sink_alphabet()), mode.radius(), Arc::new(PathToSinkVerifier { mode }))
        .with_solver(Arc::new(PathToSinkSolver { mode }))
        .with_kind(ProblemKind::PathToSink(mode))
}

/// Red path from the root to the sink, everything else black.
pub fn unique_solution(t: &LayeredTree) -> PartialLabeling {
    let mut l = PartialLabeling::uniform(Arc::new(path_to_sink_alphabet()), t.n(), BLACK);
    for v in t.sink_path() {
        l.set(v, Some(RED));
    }
    l
}

/// All black with an unlabeled root.
pub fn worst_case_labeling(t: &LayeredTree) -> PartialLabeling {
    let mut l = PartialLabeling::uniform(Arc::new(path_to_sink_alphabet()), t.n(), BLACK);
    l.set(t.root(), None);
    l
}

/// Valid partial labeling obtained from the unique solution by erasing
/// `holes` random labels and then applying `flips` random recolorings that
/// keep every vertex happy.
pub fn random_partial_solution<R: Rng + ?Sized>(
    p: &LclProblem,
    g: &Graph,
    solution: &PartialLabeling,
    holes: usize,
    flips: usize,
    rng: &mut R,
) -> PartialLabeling {
    let mut labels = solution.assignment().to_vec();
    let mut order: Vec<Vertex> = (0..g.n()).collect();
    order.shuffle(rng);
    for &v in order.iter().take(holes) {
        labels[v] = None;
    }
    for _ in 0..flips {
        let x = rng.gen_range(0..g.n());
        let Some(cur) = labels[x] else { continue };
        labels[x] = Some(if cur == RED { BLACK } else { RED });
        if !ball(g, x, p.radius()).into_iter().all(|(y, _)| p.happy_at(g, &labels, y)) {
            labels[x] = Some(cur);
        }
    }
    PartialLabeling::new(solution.alphabet().clone(), labels).expect("same alphabet")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::encoding::{encode_labeling, encode_unoriented};
    use crate::families::layered::layered_tree;
    use crate::labeling::hamming_diff;
    use crate::lcl::{is_mend, verify_full, verify_partial, Verdict};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unique_complete_solution() {
        let t = layered_tree(5, 4).unwrap();
        for mode in [Mode::Promise, Mode::OrientedGeneral] {
            let p = path_to_sink_problem(mode);
            assert_eq!(verify_full(&p, &t.graph, &unique_solution(&t)).unwrap(), Verdict::Accepted);
            assert!(verify_partial(&p, &t.graph, &worst_case_labeling(&t)).unwrap().accepted());
        }
    }

    #[test]
    fn exhaustive_uniqueness() {
        let p = path_to_sink_problem(Mode::Promise);
        for h in 0..=3 {
            for j0 in 0..(1usize << h) {
                let t = layered_tree(h, j0).unwrap();
                let n = t.n();
                let mut count = 0;
                for mask in 0u32..(1 << n) {
                    let a: Vec<Option<Label>> = (0..n).map(|v| Some(if mask >> v & 1 == 1 { RED } else { BLACK })).collect();
                    let l = PartialLabeling::new(Arc::new(path_to_sink_alphabet()), a).unwrap();
                    if verify_full(&p, &t.graph, &l).unwrap().accepted() {
                        assert_eq!(l, unique_solution(&t));
                        count += 1;
                    }
                }
                assert_eq!(count, 1, "h={h} j0={j0}");
            }
        }
    }

    #[test]
    fn dp_matches_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for mode in [Mode::Promise, Mode::OrientedGeneral] {
            let p = path_to_sink_problem(mode);
            let plain = p.clone().without_solver();
            for h in 1..=3 {
                for j0 in 0..(1usize << h) {
                    let t = layered_tree(h, j0).unwrap();
                    let sol = unique_solution(&t);
                    let mut lambda = random_partial_solution(&p, &t.graph, &sol, 1, 20, &mut rng);
                    let v = loop {
                        let v = rng.gen_range(0..t.n());
                        if !lambda.is_hole(v) {
                            break v;
                        }
                    };
                    lambda.set(v, None);
                    let a = p.solver().unwrap().prepare(&t.graph, &lambda, v).unwrap().min_mend_within(None).unwrap().unwrap();
                    let (b, _) = min_mend_search(&plain, &t.graph, &lambda, v, None, DEFAULT_NODE_BUDGET).unwrap();
                    let SearchOutcome::Found(b) = b else { panic!() };
                    assert!(is_mend(&p, &t.graph, &lambda, &a, v).unwrap().is_mend());
                    assert_eq!(hamming_diff(&lambda, &a).unwrap().len(), hamming_diff(&lambda, &b).unwrap().len());
                }
            }
        }
    }

    #[test]
    fn worst_case_needs_the_sink_path() {
        let t = layered_tree(5, 4).unwrap();
        let p = path_to_sink_problem(Mode::Promise);
        let lambda = worst_case_labeling(&t);
        let m = p.solver().unwrap().prepare(&t.graph, &lambda, 0).unwrap().min_mend_within(None).unwrap().unwrap();
        assert_eq!(m, unique_solution(&t));
    }

    #[test]
    fn broken_vertices_are_free() {
        // a root with three children is broken, so black is fine there
        let parent = vec![None, Some(0), Some(0), Some(0)];
        let edges = vec![
            crate::graph::Edge::oriented(0, 1),
            crate::graph::Edge::oriented(0, 2),
            crate::graph::Edge::oriented(0, 3),
        ];
        let g = Graph::with_parents(4, edges, Some(parent)).unwrap();
        let l = PartialLabeling::uniform(Arc::new(path_to_sink_alphabet()), 4, BLACK);
        let p = path_to_sink_problem(Mode::OrientedGeneral);
        assert!(p.happy_at(&g, l.assignment(), 0));
        assert!(!path_to_sink_problem(Mode::Promise).happy_at(&g, l.assignment(), 0));
    }

    #[test]
    fn unoriented_verdicts_agree() {
        let po = path_to_sink_problem(Mode::OrientedGeneral);
        let pu = path_to_sink_problem(Mode::UnorientedGeneral);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = layered_tree(2, 1).unwrap();
        let enc = encode_unoriented(&t.graph, LAYERED_MAX_DEGREE).unwrap();
        for _ in 0..10 {
            let a: Vec<Option<Label>> = (0..t.n()).map(|_| Some(rng.gen_range(0..2))).collect();
            let l = PartialLabeling::new(Arc::new(path_to_sink_alphabet()), a).unwrap();
            let el = encode_labeling(&enc, &l, BLACK).unwrap();
            for v in 0..t.n() {
                assert_eq!(po.happy_at(&t.graph, l.assignment(), v), pu.happy_at(&enc.graph, el.assignment(), enc.center[v]));
            }
        }
    }

    #[test]
    fn decoded_solver_matches_search() {
        let pu = path_to_sink_problem(Mode::UnorientedGeneral);
        let bare = pu.clone().without_solver();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for (h, j0) in [(1, 0), (1, 1), (2, 2)] {
            let t = layered_tree(h, j0).unwrap();
            let enc = encode_unoriented(&t.graph, LAYERED_MAX_DEGREE).unwrap();
            let sol = encode_labeling(&enc, &unique_solution(&t), BLACK).unwrap();
            for _ in 0..3 {
                let mut l = sol.clone();
                for _ in 0..3 {
                    let c = enc.center[rng.gen_range(0..t.n())];
                    l.set(c, Some(rng.gen_range(0..2)));
                }
                let v = enc.center[rng.gen_range(0..t.n())];
                l.set(v, None);
                if !crate::lcl::verify_partial(&pu, &enc.graph, &l).unwrap().accepted() {
                    continue;
                }
                let fast = crate::menders::min_mend(&pu, &enc.graph, &l, v).unwrap();
                let slow = crate::menders::min_mend(&bare, &enc.graph, &l, v).unwrap();
                assert_eq!(fast.0, slow.0, "h={h} j0={j0} v={v}");
                assert!(is_mend(&pu, &enc.graph, &l, &fast.1, v).unwrap().is_mend());
                checked += 1;
            }
        }
        assert!(checked >= 4, "{checked}");
    }
}
