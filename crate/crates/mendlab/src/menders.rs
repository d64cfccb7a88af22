//! Menders: exploration processes that grow an explored set `W` from the
//! hole until `W` contains a mend, and the volume measures built on them.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ball, eccentricity, neighborhood, Graph, Vertex};
use crate::labeling::{hamming_diff, Label, PartialLabeling};
use crate::lcl::{LclProblem, PreparedSolver, ProblemKind};
use crate::propagation::PropagationSpec;
use crate::search::{min_mend_search, SearchOutcome, DEFAULT_NODE_BUDGET};

/// Outcome of one exploration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MendRun {
    /// Final explored set, ascending.
    pub explored: Vec<Vertex>,
    pub mend: PartialLabeling,
    /// Vertices whose label differs from the input, ascending.
    pub diff: Vec<Vertex>,
    pub steps: usize,
    pub seed: u64,
}

/// Answers "does `W` contain a mend" for one instance, reusing whatever the
/// problem's solver precomputes.
pub struct MendOracle<'a> {
    p: &'a LclProblem,
    g: &'a Graph,
    lambda: &'a PartialLabeling,
    v: Vertex,
    prepared: Option<Box<dyn PreparedSolver + 'a>>,
    budget: u64,
}

impl<'a> MendOracle<'a> {
    pub fn new(p: &'a LclProblem, g: &'a Graph, lambda: &'a PartialLabeling, v: Vertex) -> Result<Self> {
        if v >= g.n() || !lambda.is_hole(v) {
            return Err(Error::Precondition(format!("vertex {v} is not a hole")));
        }
        let prepared = match p.solver() {
            Some(s) => Some(s.prepare(g, lambda, v)?),
            None => None,
        };
        Ok(MendOracle { p, g, lambda, v, prepared, budget: DEFAULT_NODE_BUDGET })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// A mend changing only vertices of `w`, if one exists.
    pub fn within(&self, w: Option<&[Vertex]>) -> Result<Option<PartialLabeling>> {
        if let Some(w) = w {
            if !w.contains(&self.v) {
                return Err(Error::Precondition(format!("hole {} is not in W", self.v)));
            }
        }
        match &self.prepared {
            Some(s) => s.min_mend_within(w),
            None => match min_mend_search(self.p, self.g, self.lambda, self.v, w, self.budget)?.0 {
                SearchOutcome::Found(m) => Ok(Some(m)),
                SearchOutcome::NoMend => Ok(None),
            },
        }
    }
}

/// Whether some mend of `lambda` at `v` changes only vertices of `w`; the
/// witness when it does.
pub fn contains_mend(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    w: &[Vertex],
) -> Result<Option<PartialLabeling>> {
    MendOracle::new(p, g, lambda, v)?.within(Some(w))
}

/// Minimum mend through the generic search, ignoring any problem-specific
/// solver. Returns the volume and a witness.
pub fn oracle_min_mend(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    budget: u64,
) -> Result<(usize, PartialLabeling)> {
    match min_mend_search(p, g, lambda, v, None, budget)?.0 {
        SearchOutcome::Found(m) => Ok((hamming_diff(lambda, &m)?.len(), m)),
        SearchOutcome::NoMend => Err(Error::Infeasible(format!("no mend exists at {v}"))),
    }
}

/// Minimum mend through the problem's solver when it has one.
pub fn min_mend(p: &LclProblem, g: &Graph, lambda: &PartialLabeling, v: Vertex) -> Result<(usize, PartialLabeling)> {
    match MendOracle::new(p, g, lambda, v)?.within(None)? {
        Some(m) => Ok((hamming_diff(lambda, &m)?.len(), m)),
        None => Err(Error::Infeasible(format!("no mend exists at {v}"))),
    }
}

/// What a policy may look at: the explored set `W`, its neighborhood
/// `N_1(W)` and the input labels there.
pub struct Exploration<'a> {
    g: &'a Graph,
    lambda: &'a PartialLabeling,
    hole: Vertex,
    in_w: Vec<bool>,
    order: Vec<Vertex>,
    frontier: Vec<Vertex>,
    // Position in `frontier`, or usize::MAX.
    slot: Vec<usize>,
}

impl<'a> Exploration<'a> {
    fn new(g: &'a Graph, lambda: &'a PartialLabeling, hole: Vertex) -> Self {
        let mut ex =
            Exploration {
            g,
            lambda,
            hole,
            in_w: vec![false; g.n()],
            order: Vec::new(),
            frontier: Vec::new(),
            slot: vec![usize::MAX; g.n()],
        };
        ex.insert(hole);
        ex
    }

    fn insert(&mut self, x: Vertex) {
        self.in_w[x] = true;
        self.order.push(x);
        let i = self.slot[x];
        if i != usize::MAX {
            self.frontier.swap_remove(i);
            if let Some(&moved) = self.frontier.get(i) {
                self.slot[moved] = i;
            }
            self.slot[x] = usize::MAX;
        }
        for y in self.g.neighbors(x) {
            if !self.in_w[y] && self.slot[y] == usize::MAX {
                self.slot[y] = self.frontier.len();
                self.frontier.push(y);
            }
        }
    }

    fn add(&mut self, x: Vertex) -> Result<()> {
        if x >= self.g.n() || self.slot[x] == usize::MAX {
            return Err(Error::PolicyViolation(format!("vertex {x} is not a neighbor of the explored set")));
        }
        self.insert(x);
        Ok(())
    }

    fn visible(&self, x: Vertex) -> bool {
        self.in_w[x] || self.slot[x] != usize::MAX
    }

    pub fn hole(&self) -> Vertex {
        self.hole
    }

    /// Explored vertices in the order they were added.
    pub fn explored(&self) -> &[Vertex] {
        &self.order
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.in_w[x]
    }

    /// `N_1(W) \ W`, ascending.
    pub fn frontier(&self) -> impl Iterator<Item = Vertex> {
        let mut f = self.frontier.clone();
        f.sort_unstable();
        f.into_iter()
    }

    /// Uniform frontier vertex in O(1).
    pub fn random_frontier(&self, rng: &mut impl Rng) -> Option<Vertex> {
        self.frontier.choose(rng).copied()
    }

    pub fn in_frontier(&self, x: Vertex) -> bool {
        self.slot[x] != usize::MAX
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    /// Input label of a visible vertex.
    pub fn label(&self, x: Vertex) -> Option<Label> {
        assert!(self.visible(x), "vertex {x} is not visible");
        self.lambda.get(x)
    }

    /// Neighbors of an explored vertex.
    pub fn neighbors(&self, x: Vertex) -> Vec<Vertex> {
        assert!(self.in_w[x], "vertex {x} is not explored");
        self.g.neighbors(x).collect()
    }

    /// Parent attribute of an explored vertex.
    pub fn parent(&self, x: Vertex) -> Option<Vertex> {
        assert!(self.in_w[x], "vertex {x} is not explored");
        self.g.parent(x)
    }

    /// Children of an explored vertex; they are its neighbors in a tree.
    pub fn children(&self, x: Vertex) -> Vec<Vertex> {
        assert!(self.in_w[x], "vertex {x} is not explored");
        self.g.children(x).iter().copied().filter(|&c| self.visible(c)).collect()
    }
}

/// Chooses the next vertices to explore from the current view. Every
/// returned vertex must be in `N_1(W)` at the moment it is added.
pub trait ExplorationPolicy {
    fn next_step(&mut self, ex: &Exploration<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<Vertex>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// The whole frontier at once.
    Ball,
    /// Depth-first walk taking the lowest port first.
    Dfs,
    /// One uniformly random frontier vertex.
    RandomFrontier,
    /// Randomized depth-first walk.
    RandomDfs,
    /// Demanded labels spread over uniformly random children.
    RandomChild,
    /// Demanded labels on the first children, deterministic.
    FirstChild,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Ball,
        PolicyKind::Dfs,
        PolicyKind::RandomFrontier,
        PolicyKind::RandomDfs,
        PolicyKind::RandomChild,
        PolicyKind::FirstChild,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Ball => "ball",
            PolicyKind::Dfs => "dfs",
            PolicyKind::RandomFrontier => "random-frontier",
            PolicyKind::RandomDfs => "random-dfs",
            PolicyKind::RandomChild => "random-child",
            PolicyKind::FirstChild => "first-child",
        }
    }

    /// Whether the policy can run on `p`.
    pub fn applies_to(&self, p: &LclProblem) -> bool {
        match self {
            PolicyKind::RandomChild | PolicyKind::FirstChild => matches!(p.kind(), ProblemKind::Propagation { .. }),
            _ => true,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, PolicyKind::Ball | PolicyKind::Dfs | PolicyKind::FirstChild)
    }

    pub fn build(&self, p: &LclProblem) -> Result<Box<dyn ExplorationPolicy + Send>> {
        Ok(match self {
            PolicyKind::Ball => Box::new(BallPolicy),
            PolicyKind::RandomFrontier => Box::new(RandomFrontierPolicy),
            PolicyKind::Dfs => Box::new(DfsPolicy { stack: Vec::new(), random: false }),
            PolicyKind::RandomDfs => Box::new(DfsPolicy { stack: Vec::new(), random: true }),
            PolicyKind::RandomChild => Box::new(ChildPolicy::for_problem(p, true)?),
            PolicyKind::FirstChild => Box::new(ChildPolicy::for_problem(p, false)?),
        })
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(PolicyKind::Ball),
            "dfs" => Ok(PolicyKind::Dfs),
            "random-frontier" | "random_frontier" => Ok(PolicyKind::RandomFrontier),
            "random-dfs" | "random_dfs" => Ok(PolicyKind::RandomDfs),
            "random-child" | "random_child" => Ok(PolicyKind::RandomChild),
            "first-child" | "first_child" => Ok(PolicyKind::FirstChild),
            _ => Err(Error::Argument(format!("unknown policy {s:?}"))),
        }
    }
}

struct BallPolicy;

impl ExplorationPolicy for BallPolicy {
    fn next_step(&mut self, ex: &Exploration<'_>, _: &mut ChaCha8Rng) -> Result<Vec<Vertex>> {
        Ok(ex.frontier().collect())
    }
}

struct RandomFrontierPolicy;

impl ExplorationPolicy for RandomFrontierPolicy {
    fn next_step(&mut self, ex: &Exploration<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<Vertex>> {
        Ok(ex.random_frontier(rng).into_iter().collect())
    }
}

struct DfsPolicy {
    stack: Vec<Vertex>,
    random: bool,
}

impl ExplorationPolicy for DfsPolicy {
    fn next_step(&mut self, ex: &Exploration<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<Vertex>> {
        if self.stack.is_empty() {
            self.stack.push(ex.hole());
        }
        while let Some(&top) = self.stack.last() {
            let fresh: Vec<Vertex> = ex.neighbors(top).into_iter().filter(|&y| !ex.contains(y)).collect();
            let pick = if self.random { fresh.choose(rng) } else { fresh.first() };
            if let Some(&y) = pick {
                self.stack.push(y);
                return Ok(vec![y]);
            }
            self.stack.pop();
        }
        Ok(Vec::new())
    }
}

/// Relabels like the propagation mender: a vertex assigned label `l` with a
/// full set of children hands the demanded labels to distinct children.
struct ChildPolicy {
    demand: Vec<Vec<u32>>,
    l0: Label,
    delta: usize,
    generalized: bool,
    random: bool,
    /// Planned labels of explored vertices.
    plan: HashMap<Vertex, Label>,
    /// Explored vertices whose children are not assigned yet.
    pending: Vec<Vertex>,
    queue: Vec<Vertex>,
    started: bool,
}

impl ChildPolicy {
    fn for_problem(p: &LclProblem, random: bool) -> Result<Self> {
        let ProblemKind::Propagation { spec, generalized } = p.kind() else {
            return Err(Error::Contract("child policies need a propagation problem".into()));
        };
        Ok(Self::new(spec, *generalized, random))
    }

    fn new(spec: &PropagationSpec, generalized: bool, random: bool) -> Self {
        ChildPolicy {
            demand: spec.mu.clone(),
            l0: spec.l0_index() as Label,
            delta: spec.delta,
            generalized,
            random,
            plan: HashMap::new(),
            pending: Vec::new(),
            queue: Vec::new(),
            started: false,
        }
    }

    fn wildcard(&self) -> Label {
        self.demand.len() as Label
    }

    fn constrained(&self, kids: usize) -> bool {
        if self.generalized {
            kids == self.delta
        } else {
            kids >= 1
        }
    }

    /// Label for the hole: `l0` at the root; otherwise one the parent still
    /// needs, or the wildcard.
    fn hole_label(&self, ex: &Exploration<'_>) -> Label {
        let v = ex.hole();
        let Some(p) = ex.parent(v).filter(|&p| ex.contains(p) || ex.in_frontier(p)) else {
            return self.l0;
        };
        let Some(lp) = ex.label(p) else { return self.wildcard() };
        if lp == self.wildcard() || (lp as usize) >= self.demand.len() {
            return self.wildcard();
        }
        let siblings: Vec<Option<Label>> =
            ex.g.children(p).iter().filter(|&&c| c != v).map(|&c| ex.lambda.get(c)).collect();
        if !self.constrained(siblings.len() + 1) {
            return self.wildcard();
        }
        for (l, &need) in self.demand[lp as usize].iter().enumerate() {
            let have = siblings.iter().filter(|&&s| s == Some(l as Label)).count() as u32;
            if have < need {
                return l as Label;
            }
        }
        self.wildcard()
    }

    /// Children of `x` that must be relabeled, with their new labels.
    fn assign(&self, ex: &Exploration<'_>, x: Vertex, rng: &mut ChaCha8Rng) -> Vec<(Vertex, Label)> {
        let l = self.plan[&x];
        let kids = ex.children(x);
        if l == self.wildcard() || !self.constrained(kids.len()) {
            return Vec::new();
        }
        let mut need: Vec<u32> = self.demand[l as usize].clone();
        let mut free = Vec::new();
        for &c in &kids {
            match ex.label(c) {
                Some(cl) if (cl as usize) < need.len() && need[cl as usize] > 0 => need[cl as usize] -= 1,
                _ => free.push(c),
            }
        }
        if self.random {
            free.shuffle(rng);
        }
        let mut out = Vec::new();
        let mut it = free.into_iter();
        for (cl, &k) in need.iter().enumerate() {
            for _ in 0..k {
                if let Some(c) = it.next() {
                    out.push((c, cl as Label));
                }
            }
        }
        out
    }
}

impl ExplorationPolicy for ChildPolicy {
    fn next_step(&mut self, ex: &Exploration<'_>, rng: &mut ChaCha8Rng) -> Result<Vec<Vertex>> {
        if !self.started {
            self.started = true;
            let l = self.hole_label(ex);
            self.plan.insert(ex.hole(), l);
            self.pending.push(ex.hole());
        }
        loop {
            if let Some(x) = self.queue.pop() {
                return Ok(vec![x]);
            }
            let Some(x) = self.pending.pop() else { return Ok(Vec::new()) };
            let mut picks = self.assign(ex, x, rng);
            // explored in a fixed order: reversed so that `pop` keeps it
            picks.reverse();
            for &(c, cl) in &picks {
                self.plan.insert(c, cl);
                self.queue.push(c);
            }
            let mut kids: Vec<Vertex> = picks.iter().map(|&(c, _)| c).collect();
            kids.reverse();
            self.pending.extend(kids.into_iter().rev());
        }
    }
}

/// Policy for the propagation mender of `spec` (generalized rules).
pub fn random_child_mender(spec: &PropagationSpec) -> impl ExplorationPolicy + Send {
    ChildPolicy::new(spec, true, true)
}

/// Outcome of a run that may be aborted once `W` exceeds a cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Attempt {
    Halted(MendRun),
    Aborted { explored: usize },
}

/// Simulates the policy; `prefix[t]` is `|W|` after step `t`.
struct Trace<'a> {
    ex: Exploration<'a>,
    prefix: Vec<usize>,
    done: bool,
}

impl Trace<'_> {
    fn advance(
        &mut self,
        policy: &mut (dyn ExplorationPolicy + '_),
        rng: &mut ChaCha8Rng,
        cap: usize,
    ) -> Result<bool> {
        if self.done {
            return Ok(false);
        }
        let step = policy.next_step(&self.ex, rng)?;
        if step.is_empty() {
            self.done = true;
            return Ok(false);
        }
        for x in step {
            if self.ex.contains(x) {
                continue;
            }
            self.ex.add(x)?;
            if self.ex.order.len() > cap {
                break;
            }
        }
        self.prefix.push(self.ex.order.len());
        Ok(true)
    }
}

/// Runs `policy` from `W = {v}` until `W` contains a mend. Exploration
/// beyond `cap` vertices aborts the run.
pub fn run_policy_capped(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    policy: &mut (dyn ExplorationPolicy + '_),
    seed: u64,
    cap: usize,
) -> Result<Attempt> {
    let oracle = MendOracle::new(p, g, lambda, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tr = Trace { ex: Exploration::new(g, lambda, v), prefix: vec![1], done: false };
    let check = |tr: &Trace<'_>, t: usize| -> Result<Option<PartialLabeling>> {
        let mut w = tr.ex.order[..tr.prefix[t]].to_vec();
        w.sort_unstable();
        oracle.within(Some(&w))
    };
    let finish = |tr: &Trace<'_>, t: usize, mend: PartialLabeling| -> Result<Attempt> {
        let mut explored = tr.ex.order[..tr.prefix[t]].to_vec();
        explored.sort_unstable();
        let diff = hamming_diff(lambda, &mend)?;
        Ok(Attempt::Halted(MendRun { explored, mend, diff, steps: t, seed }))
    };
    if let Some(m) = check(&tr, 0)? {
        return finish(&tr, 0, m);
    }
    // gallop: termination is monotone in t because W only grows and the
    // policy never sees the oracle
    let mut lo = 0usize;
    let mut probe = 1usize;
    let hi = loop {
        while tr.prefix.len() <= probe && tr.advance(policy, &mut rng, cap)? {
            if *tr.prefix.last().unwrap() > cap {
                break;
            }
        }
        let last = tr.prefix.len() - 1;
        let t = probe.min(last);
        if tr.prefix[t] > cap {
            // the capped prefix is never a final state
            if let Some(m) = check(&tr, t - 1).ok().flatten() {
                let _ = m;
                break t - 1;
            }
            return Ok(Attempt::Aborted { explored: cap + 1 });
        }
        if let Some(_m) = check(&tr, t)? {
            break t;
        }
        lo = t;
        if t == last && tr.done {
            return Err(Error::Infeasible(format!("explored the whole component of {v} without a mend")));
        }
        probe *= 2;
    };
    // first t in (lo, hi] with a mend; hi is known to work
    let (mut a, mut b) = (lo, hi);
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if check(&tr, mid)?.is_some() {
            b = mid;
        } else {
            a = mid;
        }
    }
    let m = check(&tr, b)?.expect("checked above");
    finish(&tr, b, m)
}

pub fn run_policy(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    policy: &mut (dyn ExplorationPolicy + '_),
    seed: u64,
) -> Result<MendRun> {
    match run_policy_capped(p, g, lambda, v, policy, seed, usize::MAX - 1)? {
        Attempt::Halted(r) => Ok(r),
        Attempt::Aborted { .. } => unreachable!("uncapped run aborted"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl VolumeEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        VolumeEstimate { mean, stderr, trials: n }
    }
}

/// Monte Carlo estimate of `E|W_F|`; trial `i` uses seed `seed + i`.
pub fn estimate_expected_volume(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    policy: PolicyKind,
    trials: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let sizes: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut pol = policy.build(p)?;
            Ok(run_policy(p, g, lambda, v, pol.as_mut(), seed.wrapping_add(i))?.explored.len() as f64)
        })
        .collect::<Result<_>>()?;
    Ok(VolumeEstimate::from_samples(&sizes))
}

/// Ball mender: adds all of `N_1(W)` per step, so `W_F = N_rho(v)`.
pub fn deterministic_ball_mender(p: &LclProblem, g: &Graph, lambda: &PartialLabeling, v: Vertex) -> Result<MendRun> {
    run_policy(p, g, lambda, v, &mut BallPolicy, 0)
}

/// Smallest `rho` such that `N_rho(v)` contains a mend.
pub fn mending_radius(p: &LclProblem, g: &Graph, lambda: &PartialLabeling, v: Vertex) -> Result<usize> {
    let oracle = MendOracle::new(p, g, lambda, v)?;
    let ecc = eccentricity(g, v);
    for rho in 0..=ecc {
        if oracle.within(Some(&neighborhood(g, v, rho)?))?.is_some() {
            return Ok(rho);
        }
    }
    Err(Error::Infeasible(format!("no mend exists at {v}")))
}

/// Result of the size-oblivious wrapper.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublingRun {
    pub run: MendRun,
    /// Size guesses in the order they were tried.
    pub guesses: Vec<usize>,
    /// Vertices explored over all attempts, aborted ones included.
    pub total_explored: usize,
}

/// Smallest `x` with `f(x) >= y`.
fn inverse(f: &dyn Fn(usize) -> usize, y: usize, from: usize) -> usize {
    let mut x = from;
    while f(x) < y {
        x += 1;
    }
    x
}

/// Runs a size-aware mender without knowing the size: try `m = 1`, abort
/// once exploration exceeds `f(m)`, and retry with `m = f^-1(2 f(m))`.
pub fn guess_and_double(
    mut run_with_size_hint: impl FnMut(usize, usize) -> Result<Attempt>,
    f: impl Fn(usize) -> usize,
    max_guess: usize,
) -> Result<DoublingRun> {
    let mut m = 1usize;
    let mut guesses = Vec::new();
    let mut total = 0usize;
    loop {
        guesses.push(m);
        let cap = f(m);
        match run_with_size_hint(m, cap)? {
            Attempt::Halted(run) => {
                total += run.explored.len();
                return Ok(DoublingRun { run, guesses, total_explored: total });
            }
            Attempt::Aborted { explored } => total += explored,
        }
        if m >= max_guess {
            return Err(Error::Infeasible(format!("no halting run up to size guess {max_guess}")));
        }
        let target = cap.saturating_mul(2).max(cap + 1);
        m = inverse(&f, target, m + 1);
    }
}

/// Guess-and-double around a policy whose runs ignore the size hint.
pub fn guess_and_double_policy(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    policy: PolicyKind,
    seed: u64,
    f: impl Fn(usize) -> usize,
) -> Result<DoublingRun> {
    guess_and_double(
        |_, cap| {
            let mut pol = policy.build(p)?;
            run_policy_capped(p, g, lambda, v, pol.as_mut(), seed, cap)
        },
        f,
        g.n().max(1) * 2,
    )
}

/// All vertices within `radius` of the explored set; the region a mender
/// with this explored set has read.
pub fn seen_region(g: &Graph, w: &[Vertex], radius: usize) -> Vec<Vertex> {
    let mut s: BTreeSet<Vertex> = BTreeSet::new();
    for &x in w {
        s.extend(ball(g, x, radius).into_iter().map(|(y, _)| y));
    }
    s.into_iter().collect()
}

/// Uniform random hole position, for sampling instances.
pub fn random_vertex(g: &Graph, rng: &mut impl Rng) -> Vertex {
    rng.gen_range(0..g.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::r_i_problem;
    use crate::propagation::{build_problem, worst_case_instance};

    fn r2(height: usize) -> (LclProblem, crate::graph::RootedTree, PartialLabeling, Vertex) {
        let spec = r_i_problem(2).unwrap();
        let p = build_problem(&spec, true).unwrap();
        let (t, l, v) = worst_case_instance(&spec, height).unwrap();
        (p, t, l, v)
    }

    #[test]
    fn contains_mend_examples() {
        let (p, t, l, v) = r2(4);
        assert!(contains_mend(&p, t.graph(), &l, v, &[v]).unwrap().is_none());
        let all: Vec<Vertex> = (0..t.n()).collect();
        assert!(contains_mend(&p, t.graph(), &l, v, &all).unwrap().is_some());
    }

    #[test]
    fn ball_and_radius() {
        let (p, t, l, v) = r2(4);
        let run = deterministic_ball_mender(&p, t.graph(), &l, v).unwrap();
        assert_eq!(run.explored.len(), 121);
        assert_eq!(run.diff.len(), 31);
        assert_eq!(mending_radius(&p, t.graph(), &l, v).unwrap(), 4);
    }

    #[test]
    fn random_child_volume_is_fixed_on_balanced_trees() {
        let (p, t, l, v) = r2(4);
        for seed in 0..5 {
            let run = run_policy(&p, t.graph(), &l, v, &mut random_child_mender(&r_i_problem(2).unwrap()), seed).unwrap();
            assert_eq!(run.explored.len(), 31);
        }
        let est = estimate_expected_volume(&p, t.graph(), &l, v, PolicyKind::RandomChild, 16, 0).unwrap();
        assert_eq!((est.mean, est.stderr), (31.0, 0.0));
    }

    #[test]
    fn immediate_mend() {
        let (p, t, mut l, _) = r2(2);
        // a hole at a leaf under a white parent: any label works
        let leaf = t.n() - 1;
        l.set(0, Some(l.alphabet().index("white").unwrap()));
        l.set(leaf, None);
        let run = deterministic_ball_mender(&p, t.graph(), &l, leaf).unwrap();
        assert_eq!((run.explored.clone(), run.steps), (vec![leaf], 0));
        assert_eq!(mending_radius(&p, t.graph(), &l, leaf).unwrap(), 0);
    }

    #[test]
    fn doubling_trace() {
        // f(m) = m with a run that needs 10 vertices
        let attempts = std::cell::RefCell::new(Vec::new());
        let (p, t, l, v) = r2(1);
        let base = deterministic_ball_mender(&p, t.graph(), &l, v).unwrap();
        let r = guess_and_double(
            |m, cap| {
                attempts.borrow_mut().push(m);
                if cap >= 10 {
                    Ok(Attempt::Halted(base.clone()))
                } else {
                    Ok(Attempt::Aborted { explored: cap + 1 })
                }
            },
            |m| m,
            1 << 20,
        )
        .unwrap();
        assert_eq!(r.guesses, vec![1, 2, 4, 8, 16]);
        assert!(r.total_explored <= 40);
    }

    #[test]
    fn wrapped_ball_mender() {
        let (p, t, l, v) = r2(4);
        let r = guess_and_double_policy(&p, t.graph(), &l, v, PolicyKind::Ball, 0, |m| m).unwrap();
        assert_eq!(r.run.explored.len(), 121);
        assert!(r.total_explored <= 4 * 121);
    }

    #[test]
    fn non_neighbor_is_a_violation() {
        struct Jump;
        impl ExplorationPolicy for Jump {
            fn next_step(&mut self, ex: &Exploration<'_>, _: &mut ChaCha8Rng) -> Result<Vec<Vertex>> {
                Ok(vec![ex.hole() + 40])
            }
        }
        let (p, t, l, v) = r2(4);
        let e = run_policy(&p, t.graph(), &l, v, &mut Jump, 0).unwrap_err();
        assert!(matches!(e, Error::PolicyViolation(_)));
    }
}
