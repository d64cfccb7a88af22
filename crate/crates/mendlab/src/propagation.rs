//! Propagation problems on rooted trees: a label `l` demands at least
//! `mu[l][l']` children labeled `l'`, the root must carry `l0`, and a
//! wildcard label is free of constraints.
//!
//! Besides building the LCL, this module computes the matrix-power volume
//! bounds, classifies the growth of `max M^d` from the demand multigraph, and
//! solves the minimum mend exactly with a tree DP.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::dp::{min_mend_dp, DemandRules};
use crate::error::{Error, Result};
use crate::graph::{build_balanced_tree, Graph, RootedTree, Vertex};
use crate::labeling::{Alphabet, Label, PartialLabeling};
use crate::lcl::{LclProblem, MendSolver, PreparedSolver, ProblemKind, View};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationSpec {
    pub labels: Vec<String>,
    pub l0: String,
    pub wildcard: String,
    pub mu: Vec<Vec<u32>>,
    pub delta: usize,
}

impl PropagationSpec {
    pub fn new(labels: &[&str], l0: &str, wildcard: &str, mu: Vec<Vec<u32>>, delta: usize) -> Result<Self> {
        let spec = PropagationSpec {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            l0: l0.to_string(),
            wildcard: wildcard.to_string(),
            mu,
            delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.labels.len();
        if k == 0 {
            return Err(Error::Spec("at least one non-wildcard label is required".into()));
        }
        Alphabet::new(self.labels.iter().cloned())?;
        if self.labels.contains(&self.wildcard) {
            return Err(Error::Spec(format!("wildcard {:?} is also a regular label", self.wildcard)));
        }
        if !self.labels.contains(&self.l0) {
            return Err(Error::Spec(format!("initial label {:?} is not a regular label", self.l0)));
        }
        if self.delta == 0 {
            return Err(Error::Spec("delta must be positive".into()));
        }
        if self.mu.len() != k || self.mu.iter().any(|r| r.len() != k) {
            return Err(Error::Spec(format!("demand matrix must be {k}x{k}")));
        }
        for (l, row) in self.mu.iter().enumerate() {
            let s: u64 = row.iter().map(|&x| x as u64).sum();
            if s > self.delta as u64 {
                return Err(Error::Spec(format!(
                    "label {:?} demands {s} children but delta is {}",
                    self.labels[l], self.delta
                )));
            }
        }
        Ok(())
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|s| s == name)
    }

    pub fn l0_index(&self) -> usize {
        self.label_index(&self.l0).expect("validated spec")
    }

    /// Problem alphabet: the regular labels followed by the wildcard.
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.labels.iter().cloned().chain(std::iter::once(self.wildcard.clone())))
            .expect("validated spec")
    }

    pub fn wildcard_label(&self) -> Label {
        self.labels.len() as Label
    }

    /// Labels reachable from `l0` in the demand multigraph, `l0` included.
    pub fn reachable(&self) -> Vec<bool> {
        let k = self.num_labels();
        let mut seen = vec![false; k];
        let mut stack = vec![self.l0_index()];
        seen[self.l0_index()] = true;
        while let Some(l) = stack.pop() {
            for (m, &mu) in self.mu[l].iter().enumerate() {
                if mu > 0 && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen
    }
}

struct PropagationVerifier {
    mu: Vec<Vec<u32>>,
    l0: Label,
    wildcard: Label,
    delta: usize,
    generalized: bool,
}

impl PropagationVerifier {
    fn constrained(&self, children: usize) -> bool {
        if self.generalized {
            children == self.delta
        } else {
            children >= 1
        }
    }
}

impl crate::lcl::Verifier for PropagationVerifier {
    fn happy(&self, view: &View) -> bool {
        let l = view.center_label();
        if view.rooted && view.parent[0] == crate::lcl::ParentRef::None && l != self.l0 {
            return false;
        }
        if l == self.wildcard {
            return true;
        }
        let children = view.children(0);
        if !self.constrained(children.len()) {
            return true;
        }
        let mut count = vec![0u32; self.mu.len() + 1];
        for c in children {
            count[view.labels[c] as usize] += 1;
        }
        self.mu[l as usize].iter().zip(&count).all(|(need, have)| have >= need)
    }
}

struct Rules<'a> {
    g: &'a Graph,
    demand: Vec<Vec<u32>>,
    l0: Label,
    wildcard: Label,
    delta: usize,
    generalized: bool,
}

impl<'a> Rules<'a> {
    fn new(spec: &PropagationSpec, g: &'a Graph, generalized: bool) -> Self {
        let demand = spec
            .mu
            .iter()
            .map(|row| row.iter().copied().chain(std::iter::once(0)).collect())
            .collect();
        Rules {
            g,
            demand,
            l0: spec.l0_index() as Label,
            wildcard: spec.wildcard_label(),
            delta: spec.delta,
            generalized,
        }
    }
}

impl DemandRules for Rules<'_> {
    fn num_labels(&self) -> usize {
        self.wildcard as usize + 1
    }

    fn radius(&self) -> usize {
        1
    }

    fn demand(&self, u: Vertex, l: Label) -> Option<&[u32]> {
        if l == self.wildcard {
            return None;
        }
        let c = self.g.children(u).len();
        let constrained = if self.generalized { c == self.delta } else { c >= 1 };
        constrained.then(|| self.demand[l as usize].as_slice())
    }

    fn root_ok(&self, u: Vertex, l: Label) -> bool {
        self.g.parent(u).is_some() || l == self.l0
    }
}

struct PropagationSolver {
    spec: PropagationSpec,
    generalized: bool,
}

struct PreparedPropagation<'a> {
    rules: Rules<'a>,
    g: &'a Graph,
    lambda: &'a PartialLabeling,
    hole: Vertex,
}

impl MendSolver for PropagationSolver {
    fn prepare<'a>(
        &'a self,
        g: &'a Graph,
        lambda: &'a PartialLabeling,
        hole: Vertex,
    ) -> Result<Box<dyn PreparedSolver + 'a>> {
        Ok(Box::new(PreparedPropagation { rules: Rules::new(&self.spec, g, self.generalized), g, lambda, hole }))
    }
}

impl PreparedSolver for PreparedPropagation<'_> {
    fn min_mend_within(&self, allowed: Option<&[Vertex]>) -> Result<Option<PartialLabeling>> {
        Ok(min_mend_dp(&self.rules, self.g, self.lambda, self.hole, allowed)?.map(|(_, l)| l))
    }
}

/// Builds the radius-1 LCL of a propagation spec. With `generalized`, only
/// vertices with exactly `delta` children are constrained; otherwise every
/// vertex with at least one child is.
pub fn build_problem(spec: &PropagationSpec, generalized: bool) -> Result<LclProblem> {
    spec.validate()?;
    let verifier = PropagationVerifier {
        mu: spec.mu.clone(),
        l0: spec.l0_index() as Label,
        wildcard: spec.wildcard_label(),
        delta: spec.delta,
        generalized,
    };
    let name = if generalized { "propagation-generalized" } else { "propagation" };
    Ok(LclProblem::new(name, Arc::new(spec.alphabet()), 1, Arc::new(verifier))
        .with_solver(Arc::new(PropagationSolver { spec: spec.clone(), generalized }))
        .with_kind(ProblemKind::Propagation { spec: spec.clone(), generalized }))
}

/// Row sums `||L_l M^d||` for every label and every `d <= d_max`.
fn row_sums(spec: &PropagationSpec, d_max: usize) -> Vec<Vec<BigUint>> {
    let k = spec.num_labels();
    (0..k)
        .map(|l| {
            let mut vec: Vec<BigUint> = (0..k).map(|m| if m == l { BigUint::one() } else { BigUint::zero() }).collect();
            let mut sums = Vec::with_capacity(d_max + 1);
            for d in 0..=d_max {
                sums.push(vec.iter().sum());
                if d < d_max {
                    let mut next = vec![BigUint::zero(); k];
                    for (a, x) in vec.iter().enumerate() {
                        if x.is_zero() {
                            continue;
                        }
                        for (b, slot) in next.iter_mut().enumerate() {
                            let w = spec.mu[a][b];
                            if w > 0 {
                                *slot += x * w;
                            }
                        }
                    }
                    vec = next;
                }
            }
            sums
        })
        .collect()
}

/// `sum_l' M^d[l, l']` as an exact integer.
pub fn matrix_row_sum(spec: &PropagationSpec, l: &str, d: usize) -> Result<BigUint> {
    let li = spec.label_index(l).ok_or_else(|| Error::Argument(format!("unknown label {l:?}")))?;
    let mut sums = row_sums(spec, d);
    Ok(sums.swap_remove(li).pop().unwrap())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeBounds {
    pub d_max: usize,
    pub lower: BigUint,
    pub upper: BigUint,
}

/// Cumulative row sums up to `d_max`: from `l0` (lower) and the largest over
/// all labels (upper).
pub fn volume_bounds(spec: &PropagationSpec, d_max: usize) -> VolumeBounds {
    let sums = row_sums(spec, d_max);
    let cumulative: Vec<BigUint> = sums.iter().map(|s| s.iter().sum()).collect();
    let lower = cumulative[spec.l0_index()].clone();
    let upper = cumulative.iter().max().unwrap().clone();
    VolumeBounds { d_max, lower, upper }
}

/// Natural logarithm of a big integer, accurate for any size.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq)]
pub enum GrowthClass {
    EventuallyZero,
    Constant,
    /// `max M^d` grows like `d^degree`.
    Polynomial { degree: usize },
    /// `M^d[l,l] >= cycles^(d / period)` at a label on several cycles.
    Exponential { witness: String, cycles: u64, period: u64, beta: f64 },
}

impl GrowthClass {
    /// Growth degree of the cumulative volume `sum_{d <= D} max M^d`, when
    /// polynomial in `D`.
    pub fn cumulative_degree(&self) -> Option<usize> {
        match self {
            GrowthClass::EventuallyZero => Some(0),
            GrowthClass::Constant => Some(1),
            GrowthClass::Polynomial { degree } => Some(degree + 1),
            GrowthClass::Exponential { .. } => None,
        }
    }
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthClass::EventuallyZero => write!(f, "EventuallyZero"),
            GrowthClass::Constant => write!(f, "Constant"),
            GrowthClass::Polynomial { degree } => write!(f, "Polynomial degree={degree}"),
            GrowthClass::Exponential { beta, .. } => write!(f, "Exponential beta={beta}"),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

const MAX_CYCLE_ENUMERATION: u64 = 1_000_000;

/// Simple cycles through `start` inside `members`: (total multiplicity, lcm
/// of their lengths).
fn cycles_through(spec: &PropagationSpec, start: usize, members: &[bool]) -> (u64, u64) {
    struct Walk<'a> {
        spec: &'a PropagationSpec,
        start: usize,
        members: &'a [bool],
        on: Vec<bool>,
        count: u64,
        lcm: u64,
        budget: u64,
    }
    impl Walk<'_> {
        fn go(&mut self, x: usize, mult: u64, len: u64) {
            if self.budget == 0 {
                return;
            }
            self.budget -= 1;
            for y in 0..self.spec.num_labels() {
                let w = self.spec.mu[x][y] as u64;
                if w == 0 || !self.members[y] {
                    continue;
                }
                if y == self.start {
                    self.count = self.count.saturating_add(mult.saturating_mul(w));
                    let l = len + 1;
                    self.lcm = self.lcm / gcd(self.lcm, l) * l;
                } else if !self.on[y] {
                    self.on[y] = true;
                    self.go(y, mult.saturating_mul(w), len + 1);
                    self.on[y] = false;
                }
            }
        }
    }
    let mut w = Walk {
        spec,
        start,
        members,
        on: vec![false; spec.num_labels()],
        count: 0,
        lcm: 1,
        budget: MAX_CYCLE_ENUMERATION,
    };
    w.on[start] = true;
    w.go(start, 1, 0);
    (w.count, w.lcm)
}

/// Classifies the growth of `max_l' M^d[l0, l']` from the demand multigraph
/// restricted to labels reachable from `l0`.
pub fn classify_growth(spec: &PropagationSpec) -> GrowthClass {
    let k = spec.num_labels();
    let reach = spec.reachable();
    let mut dg = DiGraph::<usize, u32>::new();
    let nodes: Vec<_> = (0..k).map(|l| dg.add_node(l)).collect();
    for a in 0..k {
        for b in 0..k {
            if reach[a] && reach[b] && spec.mu[a][b] > 0 {
                dg.add_edge(nodes[a], nodes[b], spec.mu[a][b]);
            }
        }
    }
    let sccs = tarjan_scc(&dg);
    let mut comp = vec![usize::MAX; k];
    for (ci, scc) in sccs.iter().enumerate() {
        for &nx in scc {
            comp[dg[nx]] = ci;
        }
    }
    let mut cyclic = vec![false; sccs.len()];
    let mut best: Option<(f64, usize, u64, u64)> = None;
    for (ci, scc) in sccs.iter().enumerate() {
        let members: Vec<usize> = scc.iter().map(|&nx| dg[nx]).collect();
        if !reach[members[0]] {
            continue;
        }
        let inside = |a: usize, b: usize| comp[a] == ci && comp[b] == ci;
        let internal: u64 = members
            .iter()
            .flat_map(|&a| members.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| inside(a, b))
            .map(|(a, b)| spec.mu[a][b] as u64)
            .sum();
        if internal == 0 {
            continue;
        }
        cyclic[ci] = true;
        let simple = members.iter().all(|&a| {
            let out: u64 = members.iter().map(|&b| spec.mu[a][b] as u64).sum();
            let inn: u64 = members.iter().map(|&b| spec.mu[b][a] as u64).sum();
            out == 1 && inn == 1
        });
        if simple {
            continue;
        }
        let mask: Vec<bool> = (0..k).map(|l| comp[l] == ci).collect();
        for &a in &members {
            let (c, period) = cycles_through(spec, a, &mask);
            if c >= 2 {
                let beta = (c as f64).powf(1.0 / period as f64) - 1.0;
                if best.is_none_or(|(b, ..)| beta > b) {
                    best = Some((beta, a, c, period));
                }
            }
        }
    }
    if let Some((beta, a, cycles, period)) = best {
        return GrowthClass::Exponential { witness: spec.labels[a].clone(), cycles, period, beta };
    }
    // longest chain of cyclic components along condensation paths from l0
    let mut memo: Vec<Option<usize>> = vec![None; sccs.len()];
    fn chain(
        ci: usize,
        sccs: &[Vec<petgraph::graph::NodeIndex>],
        dg: &DiGraph<usize, u32>,
        comp: &[usize],
        cyclic: &[bool],
        memo: &mut Vec<Option<usize>>,
    ) -> usize {
        if let Some(v) = memo[ci] {
            return v;
        }
        let mut best = 0;
        for &nx in &sccs[ci] {
            for succ in dg.neighbors(nx) {
                let cj = comp[dg[succ]];
                if cj != ci {
                    best = best.max(chain(cj, sccs, dg, comp, cyclic, memo));
                }
            }
        }
        let v = best + cyclic[ci] as usize;
        memo[ci] = Some(v);
        v
    }
    let c = chain(comp[spec.l0_index()], &sccs, &dg, &comp, &cyclic, &mut memo);
    match c {
        0 => GrowthClass::EventuallyZero,
        1 => GrowthClass::Constant,
        c => GrowthClass::Polynomial { degree: c - 1 },
    }
}

/// Balanced `delta`-ary tree of the given height with an unlabeled root and
/// every other vertex carrying the wildcard.
pub fn worst_case_instance(spec: &PropagationSpec, height: usize) -> Result<(RootedTree, PartialLabeling, Vertex)> {
    spec.validate()?;
    let t = build_balanced_tree(spec.delta, height)?;
    let ab = Arc::new(spec.alphabet());
    let mut lambda = PartialLabeling::uniform(ab, t.n(), spec.wildcard_label());
    lambda.set(t.root(), None);
    let root = t.root();
    Ok((t, lambda, root))
}

/// Exact minimum mend of the generalized problem at hole `v`.
pub fn exact_min_volume_tree_dp(
    spec: &PropagationSpec,
    t: &RootedTree,
    lambda: &PartialLabeling,
    v: Vertex,
) -> Result<(usize, PartialLabeling)> {
    spec.validate()?;
    if lambda.alphabet().labels() != spec.alphabet().labels() {
        return Err(Error::Argument("labeling alphabet does not match the spec".into()));
    }
    let rules = Rules::new(spec, t.graph(), true);
    min_mend_dp(&rules, t.graph(), lambda, v, None)?
        .ok_or_else(|| Error::Infeasible(format!("no mend exists at vertex {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcl::{is_mend, verify_full, verify_partial, Verdict};

    fn single(mu: u32, delta: usize) -> PropagationSpec {
        PropagationSpec::new(&["red"], "red", "white", vec![vec![mu]], delta).unwrap()
    }

    fn mk(k: usize) -> PropagationSpec {
        let names: Vec<String> = (1..=k).map(|i| format!("l{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mu = (0..k).map(|i| (0..k).map(|j| (j == i || j == i + 1) as u32).collect()).collect();
        PropagationSpec::new(&refs, "l1", "free", mu, 2).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(PropagationSpec::new(&["red"], "red", "red", vec![vec![1]], 3).is_err());
        assert!(PropagationSpec::new(&["red"], "red", "w", vec![vec![4]], 3).is_err());
        assert!(PropagationSpec::new(&["red"], "blue", "w", vec![vec![1]], 3).is_err());
        assert!(PropagationSpec::new(&["a", "b"], "a", "w", vec![vec![1]], 3).is_err());
    }

    #[test]
    fn row_sums_match_examples() {
        assert_eq!(matrix_row_sum(&single(2, 3), "red", 3).unwrap(), BigUint::from(8u32));
        assert_eq!(matrix_row_sum(&mk(2), "l1", 0).unwrap(), BigUint::from(1u32));
        assert_eq!(matrix_row_sum(&mk(2), "l1", 5).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn bounds_examples() {
        let b = volume_bounds(&single(2, 3), 4);
        assert_eq!((b.lower, b.upper), (BigUint::from(31u32), BigUint::from(31u32)));
        let b = volume_bounds(&single(1, 3), 4);
        assert_eq!(b.lower, BigUint::from(5u32));
        let b = volume_bounds(&mk(2), 3);
        assert_eq!((b.lower, b.upper), (BigUint::from(10u32), BigUint::from(10u32)));
    }

    #[test]
    fn classes() {
        assert_eq!(classify_growth(&single(0, 3)), GrowthClass::EventuallyZero);
        assert_eq!(classify_growth(&single(1, 3)), GrowthClass::Constant);
        assert_eq!(classify_growth(&single(2, 3)).to_string(), "Exponential beta=1");
        assert_eq!(classify_growth(&single(3, 3)).to_string(), "Exponential beta=2");
        assert_eq!(classify_growth(&mk(3)), GrowthClass::Polynomial { degree: 2 });
        assert_eq!(classify_growth(&mk(3)).cumulative_degree(), Some(3));
        // figure eight: two 2-cycles through a
        let fig = PropagationSpec::new(&["a", "b", "c"], "a", "w", vec![vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]], 2)
            .unwrap();
        match classify_growth(&fig) {
            GrowthClass::Exponential { witness, cycles, period, .. } => {
                assert_eq!((witness.as_str(), cycles, period), ("a", 2, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unreachable_cycles_are_ignored() {
        let s = PropagationSpec::new(&["a", "b"], "a", "w", vec![vec![0, 0], vec![0, 2]], 2).unwrap();
        assert_eq!(classify_growth(&s), GrowthClass::EventuallyZero);
    }

    #[test]
    fn worst_case_and_dp() {
        let r2 = single(2, 3);
        let (t, lambda, v) = worst_case_instance(&r2, 4).unwrap();
        assert_eq!(t.n(), 121);
        assert_eq!(lambda.holes(), vec![0]);
        let p = build_problem(&r2, true).unwrap();
        assert_eq!(verify_partial(&p, t.graph(), &lambda).unwrap(), Verdict::Accepted);
        let (vol, witness) = exact_min_volume_tree_dp(&r2, &t, &lambda, v).unwrap();
        assert_eq!(vol, 31);
        assert!(is_mend(&p, t.graph(), &lambda, &witness, v).unwrap().is_mend());
        assert_eq!(verify_full(&p, t.graph(), &witness).unwrap(), Verdict::Accepted);

        let (t, lambda, v) = worst_case_instance(&single(3, 3), 2).unwrap();
        assert_eq!(exact_min_volume_tree_dp(&single(3, 3), &t, &lambda, v).unwrap().0, 13);
        let (t, lambda, v) = worst_case_instance(&single(1, 3), 4).unwrap();
        assert_eq!(exact_min_volume_tree_dp(&single(1, 3), &t, &lambda, v).unwrap().0, 5);
        let (t, lambda, _) = worst_case_instance(&r2, 0).unwrap();
        assert_eq!((t.n(), lambda.holes().len()), (1, 1));
    }

    #[test]
    fn all_white_rejected_at_root() {
        let r2 = single(2, 3);
        let p = build_problem(&r2, false).unwrap();
        let t = build_balanced_tree(3, 2).unwrap();
        let white = PartialLabeling::uniform(p.alphabet().clone(), t.n(), r2.wildcard_label());
        assert_eq!(verify_full(&p, t.graph(), &white).unwrap(), Verdict::Rejected(0));
    }

    #[test]
    fn ln_of_huge_values() {
        let x = BigUint::one() << 3000u32;
        assert!((ln_biguint(&x) - 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_biguint(&BigUint::from(31u32)) - 31f64.ln()).abs() < 1e-12);
    }
}
