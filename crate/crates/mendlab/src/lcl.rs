//! Locally checkable labelings: neighborhood views, verifiers, the relaxed
//! verdict for partial labelings, and the mend predicate.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Dir, Graph, Vertex};
use crate::labeling::{Alphabet, Label, PartialLabeling};

/// Parent attribute of a vertex as seen from inside a view.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParentRef {
    None,
    Local(usize),
    /// The vertex has a parent, but it lies outside the view.
    Outside,
}

/// One incident edge inside a view.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Port {
    /// Local index of the other endpoint.
    pub to: usize,
    /// Position of the edge in the owner's host incidence list.
    pub port: usize,
    /// Position of the edge in the other endpoint's host incidence list.
    pub back_port: usize,
    pub dir: Dir,
}

/// Materialized radius-`r` neighborhood of a vertex. Local index 0 is the
/// center. Vertices are listed in BFS order and edges between two vertices
/// of the view are always present, so the adjacency of every vertex at
/// distance `< radius` is complete.
#[derive(Clone, Debug)]
pub struct View {
    pub radius: usize,
    /// Whether the host graph carries a parent attribute.
    pub rooted: bool,
    pub vertices: Vec<Vertex>,
    pub dist: Vec<usize>,
    pub labels: Vec<Label>,
    /// Degree in the host graph.
    pub degree: Vec<usize>,
    pub adj: Vec<Vec<Port>>,
    pub parent: Vec<ParentRef>,
}

impl View {
    /// Builds the view of `center`, or `None` when an unlabeled vertex lies
    /// within `radius` (the relaxed verdict is then "happy").
    pub fn build(g: &Graph, labels: &[Option<Label>], center: Vertex, radius: usize) -> Option<View> {
        let mut index: HashMap<Vertex, usize> = HashMap::new();
        let mut vertices = vec![center];
        let mut dist = vec![0];
        index.insert(center, 0);
        let mut i = 0;
        while i < vertices.len() {
            let (x, d) = (vertices[i], dist[i]);
            labels[x]?;
            i += 1;
            if d == radius {
                continue;
            }
            for y in g.neighbors(x) {
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(y) {
                    e.insert(vertices.len());
                    vertices.push(y);
                    dist.push(d + 1);
                }
            }
        }
        let mut adj = Vec::with_capacity(vertices.len());
        for &x in &vertices {
            let mut ports = Vec::new();
            for (p, &(y, e)) in g.ports(x).iter().enumerate() {
                if let Some(&j) = index.get(&y) {
                    let back_port = g.port_to(y, x).expect("symmetric adjacency");
                    ports.push(Port { to: j, port: p, back_port, dir: g.edge(e).dir_from(x) });
                }
            }
            adj.push(ports);
        }
        let parent = vertices
            .iter()
            .map(|&x| match g.parent(x) {
                None => ParentRef::None,
                Some(p) => index.get(&p).map_or(ParentRef::Outside, |&j| ParentRef::Local(j)),
            })
            .collect();
        Some(View {
            radius,
            rooted: g.has_parent_attr(),
            labels: vertices.iter().map(|&x| labels[x].unwrap()).collect(),
            degree: vertices.iter().map(|&x| g.degree(x)).collect(),
            vertices,
            dist,
            adj,
            parent,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn center_label(&self) -> Label {
        self.labels[0]
    }

    /// Local indices of the children of `i` that lie inside the view.
    pub fn children(&self, i: usize) -> Vec<usize> {
        self.adj[i]
            .iter()
            .filter(|p| self.parent[p.to] == ParentRef::Local(i))
            .map(|p| p.to)
            .collect()
    }

    pub fn is_parent_child(&self, a: usize, b: usize) -> bool {
        self.parent[a] == ParentRef::Local(b) || self.parent[b] == ParentRef::Local(a)
    }

    pub fn local(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }
}

/// A local verdict. Implementations must only read the view.
pub trait Verifier: Send + Sync {
    fn happy(&self, view: &View) -> bool;
}

impl<F: Fn(&View) -> bool + Send + Sync> Verifier for F {
    fn happy(&self, view: &View) -> bool {
        self(view)
    }
}

/// Exact minimum mend engine specialised to one problem.
pub trait MendSolver: Send + Sync {
    fn prepare<'a>(
        &'a self,
        g: &'a Graph,
        lambda: &'a PartialLabeling,
        hole: Vertex,
    ) -> Result<Box<dyn PreparedSolver + 'a>>;
}

pub trait PreparedSolver {
    /// A mend with the fewest changed labels, changing only vertices listed
    /// in `allowed` (everything when `None`), or `None` if there is none.
    fn min_mend_within(&self, allowed: Option<&[Vertex]>) -> Result<Option<PartialLabeling>>;
}

/// Which construction a problem came from; used by policies that need more
/// than the verifier.
#[derive(Clone, Debug)]
pub enum ProblemKind {
    Generic,
    Propagation { spec: crate::propagation::PropagationSpec, generalized: bool },
    Orientation(crate::families::orientation::OrientationRule),
    PathToSink(crate::families::path_to_sink::Mode),
}

#[derive(Clone)]
pub struct LclProblem {
    name: String,
    alphabet: Arc<Alphabet>,
    radius: usize,
    verifier: Arc<dyn Verifier>,
    solver: Option<Arc<dyn MendSolver>>,
    kind: ProblemKind,
}

impl fmt::Debug for LclProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LclProblem")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet.labels())
            .field("radius", &self.radius)
            .field("kind", &self.kind)
            .finish()
    }
}

impl LclProblem {
    pub fn new(name: impl Into<String>, alphabet: Arc<Alphabet>, radius: usize, verifier: Arc<dyn Verifier>) -> Self {
        LclProblem { name: name.into(), alphabet, radius, verifier, solver: None, kind: ProblemKind::Generic }
    }

    pub fn with_solver(mut self, solver: Arc<dyn MendSolver>) -> Self {
        self.solver = Some(solver);
        self
    }

    pub fn with_kind(mut self, kind: ProblemKind) -> Self {
        self.kind = kind;
        self
    }

    /// Drops the specialised solver so that mend queries fall back to search.
    pub fn without_solver(mut self) -> Self {
        self.solver = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn verifier(&self) -> &dyn Verifier {
        self.verifier.as_ref()
    }

    pub fn solver(&self) -> Option<&dyn MendSolver> {
        self.solver.as_deref()
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }

    /// Relaxed verdict at `v`: happy if any unlabeled vertex lies within the
    /// radius, otherwise the base verdict.
    pub fn happy_at(&self, g: &Graph, labels: &[Option<Label>], v: Vertex) -> bool {
        match View::build(g, labels, v, self.radius) {
            None => true,
            Some(view) => self.verifier.happy(&view),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(Vertex),
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

fn check_host(p: &LclProblem, g: &Graph, lambda: &PartialLabeling) -> Result<()> {
    if lambda.n() != g.n() {
        return Err(Error::Argument(format!("labeling covers {} vertices, graph has {}", lambda.n(), g.n())));
    }
    if lambda.alphabet().labels() != p.alphabet().labels() {
        return Err(Error::Argument(format!("labeling alphabet does not match problem {}", p.name())));
    }
    Ok(())
}

const PARALLEL_THRESHOLD: usize = 4096;

fn first_unhappy(p: &LclProblem, g: &Graph, labels: &[Option<Label>], vs: &[Vertex]) -> Option<Vertex> {
    if vs.len() >= PARALLEL_THRESHOLD {
        vs.par_iter().copied().find_first(|&v| !p.happy_at(g, labels, v))
    } else {
        vs.iter().copied().find(|&v| !p.happy_at(g, labels, v))
    }
}

/// Checks a complete labeling. The witness is the smallest unhappy vertex.
pub fn verify_full(p: &LclProblem, g: &Graph, lambda: &PartialLabeling) -> Result<Verdict> {
    check_host(p, g, lambda)?;
    if let Some(v) = lambda.assignment().iter().position(Option::is_none) {
        return Err(Error::Precondition(format!("vertex {v} is unlabeled; use verify_partial")));
    }
    verify_partial(p, g, lambda)
}

/// Checks a partial labeling under the relaxed verdict.
pub fn verify_partial(p: &LclProblem, g: &Graph, lambda: &PartialLabeling) -> Result<Verdict> {
    check_host(p, g, lambda)?;
    let all: Vec<Vertex> = (0..g.n()).collect();
    Ok(match first_unhappy(p, g, lambda.assignment(), &all) {
        None => Verdict::Accepted,
        Some(v) => Verdict::Rejected(v),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MendCheck {
    pub valid: bool,
    pub progress: bool,
    pub violations: Vec<(Vertex, String)>,
}

impl MendCheck {
    pub fn is_mend(&self) -> bool {
        self.valid && self.progress
    }
}

/// Checks whether `lambda2` is a mend of `lambda` at `v`.
pub fn is_mend(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    lambda2: &PartialLabeling,
    v: Vertex,
) -> Result<MendCheck> {
    check_host(p, g, lambda)?;
    check_host(p, g, lambda2)?;
    if v >= g.n() || !lambda.is_hole(v) {
        return Err(Error::Precondition(format!("vertex {v} is not a hole")));
    }
    let mut violations = Vec::new();
    if lambda2.is_hole(v) {
        violations.push((v, "hole left unlabeled".to_string()));
    }
    for u in 0..g.n() {
        if !lambda.is_hole(u) && lambda2.is_hole(u) {
            violations.push((u, "label removed".to_string()));
        }
    }
    let progress = violations.is_empty();
    let labels = lambda2.assignment();
    let unhappy: Vec<Vertex> = if g.n() >= PARALLEL_THRESHOLD {
        (0..g.n()).into_par_iter().filter(|&u| !p.happy_at(g, labels, u)).collect()
    } else {
        (0..g.n()).filter(|&u| !p.happy_at(g, labels, u)).collect()
    };
    let valid = unhappy.is_empty();
    violations.extend(unhappy.into_iter().map(|u| (u, "unhappy".to_string())));
    Ok(MendCheck { valid, progress, violations })
}

/// Same verdict as [`is_mend`] when `lambda` is already a partial solution:
/// only vertices whose view can differ are re-checked.
pub fn is_mend_local(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    lambda2: &PartialLabeling,
    v: Vertex,
) -> Result<bool> {
    check_host(p, g, lambda2)?;
    if lambda2.is_hole(v) {
        return Ok(false);
    }
    let mut touched = vec![v];
    for u in 0..g.n() {
        let (a, b) = (lambda.get(u), lambda2.get(u));
        if a != b {
            if a.is_some() && b.is_none() {
                return Ok(false);
            }
            touched.push(u);
        }
    }
    let dist = crate::graph::bfs_distances(g, &touched, p.radius());
    let around: Vec<Vertex> = (0..g.n()).filter(|&u| dist[u] != usize::MAX).collect();
    Ok(first_unhappy(p, g, lambda2.assignment(), &around).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_balanced_tree, Edge};

    fn degree_parity() -> LclProblem {
        let ab = Arc::new(Alphabet::new(["a", "b"]).unwrap());
        // label a on even degree, b on odd degree
        let f = |v: &View| (v.center_label() == 0) == v.degree[0].is_multiple_of(2);
        LclProblem::new("parity", ab, 1, Arc::new(f))
    }

    #[test]
    fn view_is_none_near_holes() {
        let g = Graph::new(3, vec![Edge::new(0, 1), Edge::new(1, 2)]).unwrap();
        assert!(View::build(&g, &[Some(0), None, Some(0)], 0, 1).is_none());
        assert!(View::build(&g, &[Some(0), Some(0), None], 0, 1).is_some());
    }

    #[test]
    fn view_children_and_ports() {
        let t = build_balanced_tree(2, 2).unwrap();
        let labels = vec![Some(0); t.n()];
        let view = View::build(t.graph(), &labels, 1, 1).unwrap();
        assert_eq!(view.len(), 4);
        assert_eq!(view.children(0).len(), 2);
        assert_eq!(view.parent[0], ParentRef::Local(view.local(0).unwrap()));
        let far = View::build(t.graph(), &labels, 3, 1).unwrap();
        assert_eq!(far.parent[far.local(1).unwrap()], ParentRef::Outside);
    }

    #[test]
    fn full_and_partial() {
        let p = degree_parity();
        let g = Graph::new(3, vec![Edge::new(0, 1), Edge::new(1, 2)]).unwrap();
        let ab = p.alphabet().clone();
        let good = PartialLabeling::from_names(ab.clone(), &[Some("b"), Some("a"), Some("b")]).unwrap();
        assert_eq!(verify_full(&p, &g, &good).unwrap(), Verdict::Accepted);
        let bad = PartialLabeling::from_names(ab.clone(), &[Some("a"), Some("a"), Some("a")]).unwrap();
        assert_eq!(verify_full(&p, &g, &bad).unwrap(), Verdict::Rejected(0));
        let holes = PartialLabeling::empty(ab.clone(), 3);
        assert!(verify_full(&p, &g, &holes).is_err());
        assert_eq!(verify_partial(&p, &g, &holes).unwrap(), Verdict::Accepted);
    }

    #[test]
    fn mend_predicate() {
        let p = degree_parity();
        let g = Graph::new(3, vec![Edge::new(0, 1), Edge::new(1, 2)]).unwrap();
        let ab = p.alphabet().clone();
        let lambda = PartialLabeling::from_names(ab.clone(), &[Some("b"), None, Some("b")]).unwrap();
        let mended = PartialLabeling::from_names(ab.clone(), &[Some("b"), Some("a"), Some("b")]).unwrap();
        assert!(is_mend(&p, &g, &lambda, &mended, 1).unwrap().is_mend());
        assert!(is_mend_local(&p, &g, &lambda, &mended, 1).unwrap());
        let same = is_mend(&p, &g, &lambda, &lambda, 1).unwrap();
        assert!(!same.progress);
        assert!(is_mend(&p, &g, &lambda, &mended, 0).is_err());
    }
}
