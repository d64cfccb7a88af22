//! Problem-agnostic exact mend search.
//!
//! Depth-first branch and bound on the number of changed labels. A node
//! picks the smallest unhappy vertex `u`; any mend must change some vertex
//! of `N_r(u)` that has not been decided yet, so the node branches over
//! those vertices and their labels. After all labels of a candidate have
//! been tried it is frozen for the remaining siblings, so each change set is
//! produced once.
//!
//! Unhappy vertices whose changeable surroundings are more than `2r` apart
//! cannot interact: a change only affects verdicts within distance `r`, and
//! a repair of such a verdict lies within `r` again. Such groups are solved
//! separately and their costs added.
//!
//! The lower bound packs unhappy vertices whose undecided neighborhoods are
//! disjoint and sums a brute-force bound for each of them. The top level
//! deepens the cost limit geometrically.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::{ball, Graph, Vertex};
use crate::labeling::{Label, PartialLabeling};
use crate::lcl::LclProblem;

/// Default node budget for one search.
pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

const LOCAL_SUBSET_LIMIT: usize = 2;
const LOCAL_EVAL_LIMIT: usize = 4_000;
/// Past this many visited vertices a group is not split further.
const SPLIT_VISIT_LIMIT: usize = 1_024;
const INF: u32 = u32::MAX / 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(PartialLabeling),
    NoMend,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub iterations: u32,
}

type Changes = Vec<(Vertex, Label)>;

struct State<'a> {
    p: &'a LclProblem,
    g: &'a Graph,
    labels: Vec<Option<Label>>,
    changed: Vec<bool>,
    frozen: Vec<u32>,
    allowed: Vec<bool>,
    unhappy: BTreeSet<Vertex>,
    k: Label,
    nodes: u64,
    budget: u64,
    limit_seen: u32,
}

impl<'a> State<'a> {
    fn changeable(&self, w: Vertex) -> bool {
        self.allowed[w] && !self.changed[w] && self.frozen[w] == 0 && self.labels[w].is_some()
    }

    fn refresh(&mut self, w: Vertex) {
        for (x, _) in ball(self.g, w, self.p.radius()) {
            if self.p.happy_at(self.g, &self.labels, x) {
                self.unhappy.remove(&x);
            } else {
                self.unhappy.insert(x);
            }
        }
    }

    fn set(&mut self, w: Vertex, l: Option<Label>, changed: bool) {
        self.labels[w] = l;
        self.changed[w] = changed;
        self.refresh(w);
    }

    fn candidates(&self, u: Vertex) -> Vec<Vertex> {
        let mut c: Vec<Vertex> = ball(self.g, u, self.p.radius())
            .into_iter()
            .map(|(x, _)| x)
            .filter(|&x| self.changeable(x))
            .collect();
        c.sort_unstable();
        c
    }

    /// Lower bound on the changes inside `cands` needed to make `u` happy,
    /// or `None` if no assignment of them works.
    fn local_min(&mut self, u: Vertex, cands: &[Vertex]) -> Option<u32> {
        if cands.is_empty() {
            return None;
        }
        let mut evals = 0usize;
        let limit = LOCAL_SUBSET_LIMIT.min(cands.len());
        for size in 1..=limit {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                match self.try_subset(u, cands, &idx, &mut evals) {
                    Some(true) => return Some(size as u32),
                    Some(false) => {}
                    None => return Some(size as u32),
                }
                if !next_combination(&mut idx, cands.len()) {
                    break;
                }
            }
        }
        if limit == cands.len() && cands.len() <= LOCAL_SUBSET_LIMIT {
            // every subset of the candidates was tried
            return None;
        }
        Some(limit as u32 + 1)
    }

    /// Tries all relabelings of the chosen subset; `None` when the
    /// evaluation cap is hit.
    fn try_subset(&mut self, u: Vertex, cands: &[Vertex], idx: &[usize], evals: &mut usize) -> Option<bool> {
        let saved: Vec<Option<Label>> = idx.iter().map(|&i| self.labels[cands[i]]).collect();
        let alts: Vec<Vec<Label>> =
            saved.iter().map(|s| (0..self.k).filter(|l| Some(*l) != *s).collect()).collect();
        if alts.iter().any(Vec::is_empty) {
            return Some(false);
        }
        let mut pick = vec![0usize; idx.len()];
        let mut result = Some(false);
        'outer: loop {
            for (j, &i) in idx.iter().enumerate() {
                self.labels[cands[i]] = Some(alts[j][pick[j]]);
            }
            *evals += 1;
            if self.p.happy_at(self.g, &self.labels, u) {
                result = Some(true);
                break;
            }
            if *evals >= LOCAL_EVAL_LIMIT {
                result = None;
                break;
            }
            let mut j = 0;
            loop {
                if j == pick.len() {
                    break 'outer;
                }
                pick[j] += 1;
                if pick[j] < alts[j].len() {
                    break;
                }
                pick[j] = 0;
                j += 1;
            }
        }
        for (j, &i) in idx.iter().enumerate() {
            self.labels[cands[i]] = saved[j];
        }
        result
    }

    fn lower_bound(&mut self, active: &[Vertex]) -> u32 {
        let mut used: Vec<Vertex> = Vec::new();
        let mut total = 0u32;
        for &u in active {
            let cands = self.candidates(u);
            if cands.is_empty() {
                return INF;
            }
            if cands.iter().any(|c| used.contains(c)) {
                continue;
            }
            match self.local_min(u, &cands) {
                None => return INF,
                Some(m) => total += m,
            }
            used.extend(cands);
        }
        total
    }

    /// Splits `active` into groups that cannot interact.
    fn split(&self, active: &[Vertex]) -> Vec<Vec<Vertex>> {
        if active.len() <= 1 {
            return vec![active.to_vec()];
        }
        let jump = 2 * self.p.radius();
        let mut comp: HashMap<Vertex, usize> = HashMap::new();
        let mut groups: Vec<Vec<Vertex>> = Vec::new();
        let mut visited = 0usize;
        for &u in active {
            let cands = self.candidates(u);
            if let Some(&id) = cands.iter().find_map(|c| comp.get(c)) {
                groups[id].push(u);
                continue;
            }
            let id = groups.len();
            groups.push(vec![u]);
            let mut stack = cands;
            for &c in &stack {
                comp.insert(c, id);
            }
            while let Some(x) = stack.pop() {
                visited += 1;
                if visited > SPLIT_VISIT_LIMIT {
                    return vec![active.to_vec()];
                }
                for (y, _) in ball(self.g, x, jump) {
                    if self.changeable(y) {
                        if let std::collections::hash_map::Entry::Vacant(e) = comp.entry(y) {
                            e.insert(id);
                            stack.push(y);
                        }
                    }
                }
            }
        }
        groups
    }

    fn tick(&mut self, limit: u32) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { lower_bound: self.limit_seen.max(limit) as usize });
        }
        Ok(())
    }

    /// Minimum number of further changes, at most `limit`, that make every
    /// vertex of `active` (and whatever the changes disturb) happy. The
    /// state is restored before returning.
    fn solve(&mut self, active: Vec<Vertex>, limit: u32) -> Result<Option<(u32, Changes)>> {
        self.tick(limit)?;
        let active: Vec<Vertex> = active.into_iter().filter(|u| self.unhappy.contains(u)).collect();
        if active.is_empty() {
            return Ok(Some((0, Vec::new())));
        }
        let groups = self.split(&active);
        if groups.len() > 1 {
            let lbs: Vec<u32> = groups.iter().map(|gr| self.lower_bound(gr)).collect();
            let mut rest: u32 = lbs.iter().fold(0u32, |a, &b| a.saturating_add(b));
            if rest > limit {
                return Ok(None);
            }
            let mut used = 0u32;
            let mut all = Vec::new();
            for (gr, lb) in groups.into_iter().zip(lbs) {
                rest -= lb;
                let Some((c, ch)) = self.solve_group(gr, limit - used - rest)? else {
                    return Ok(None);
                };
                used += c;
                all.extend(ch);
            }
            return Ok(Some((used, all)));
        }
        self.solve_group(active, limit)
    }

    fn solve_group(&mut self, active: Vec<Vertex>, limit: u32) -> Result<Option<(u32, Changes)>> {
        let lb = self.lower_bound(&active);
        if lb > limit {
            self.limit_seen = self.limit_seen.max(limit);
            return Ok(None);
        }
        let u = active[0];
        let cands = self.candidates(u);
        let radius = self.p.radius();
        // best cost found so far, exclusive bound while none is known
        let mut best: Option<(u32, Changes)> = None;
        let mut frozen_here = Vec::new();
        'cands: for w in cands {
            let cur = self.labels[w];
            for l in 0..self.k {
                if Some(l) == cur {
                    continue;
                }
                let bound = best.as_ref().map_or(limit + 1, |b| b.0);
                if bound < 2 {
                    break 'cands;
                }
                self.set(w, Some(l), true);
                let mut next = active.clone();
                next.extend(ball(self.g, w, radius).into_iter().map(|(x, _)| x));
                next.sort_unstable();
                next.dedup();
                let r = self.solve(next, bound - 2);
                self.set(w, cur, false);
                if let Some((c, mut ch)) = r? {
                    ch.push((w, l));
                    best = Some((c + 1, ch));
                    if c + 1 == lb {
                        break 'cands;
                    }
                }
            }
            self.frozen[w] += 1;
            frozen_here.push(w);
        }
        for w in frozen_here {
            self.frozen[w] -= 1;
        }
        Ok(best)
    }
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact minimum mend of `lambda` at `v` changing only `allowed` vertices.
pub fn min_mend_search(
    p: &LclProblem,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    allowed: Option<&[Vertex]>,
    budget: u64,
) -> Result<(SearchOutcome, SearchStats)> {
    if v >= g.n() || !lambda.is_hole(v) {
        return Err(Error::Precondition(format!("vertex {v} is not a hole")));
    }
    let n = g.n();
    let mut allowed_mask = vec![allowed.is_none(); n];
    if let Some(a) = allowed {
        for &w in a {
            if w < n {
                allowed_mask[w] = true;
            }
        }
    }
    if !allowed_mask[v] {
        return Err(Error::Precondition(format!("hole {v} is not in the allowed set")));
    }
    let mut st = State {
        p,
        g,
        labels: lambda.assignment().to_vec(),
        changed: vec![false; n],
        frozen: vec![0; n],
        allowed: allowed_mask,
        unhappy: BTreeSet::new(),
        k: p.alphabet().len() as Label,
        nodes: 0,
        budget,
        limit_seen: 0,
    };
    for x in 0..n {
        if !p.happy_at(g, &st.labels, x) {
            st.unhappy.insert(x);
        }
    }
    let capacity = (0..n).filter(|&w| w != v && st.changeable(w)).count() as u32;
    let mut stats = SearchStats::default();
    let mut limit = 1u32.min(capacity);
    loop {
        stats.iterations += 1;
        let mut best: Option<(u32, Changes, Label)> = None;
        for l in 0..st.k {
            let bound = best.as_ref().map_or(limit, |b| b.0.saturating_sub(1));
            st.set(v, Some(l), true);
            let active: Vec<Vertex> = st.unhappy.iter().copied().collect();
            let r = st.solve(active, bound);
            st.set(v, None, false);
            stats.nodes = st.nodes;
            if let Some((c, ch)) = r? {
                best = Some((c, ch, l));
            }
        }
        if let Some((_, ch, l)) = best {
            let mut out = lambda.assignment().to_vec();
            out[v] = Some(l);
            for (w, x) in ch {
                out[w] = Some(x);
            }
            let out = PartialLabeling::new(lambda.alphabet().clone(), out)?;
            return Ok((SearchOutcome::Found(out), stats));
        }
        if limit >= capacity {
            return Ok((SearchOutcome::NoMend, stats));
        }
        st.limit_seen = limit;
        limit = limit.saturating_mul(2).min(capacity);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::labeling::Alphabet;
    use crate::lcl::{is_mend, View};
    use std::sync::Arc;

    /// Proper 2-coloring of a path.
    fn coloring() -> LclProblem {
        let ab = Arc::new(Alphabet::new(["x", "y"]).unwrap());
        let f = |v: &View| v.adj[0].iter().all(|p| v.labels[p.to] != v.labels[0]);
        LclProblem::new("2col", ab, 1, Arc::new(f))
    }

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| Edge::new(i, i + 1)).collect()).unwrap()
    }

    #[test]
    fn combinations() {
        let mut idx = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut idx, 4) {
            count += 1;
        }
        assert_eq!(count, 6);
    }

    #[test]
    fn single_fixable_hole() {
        let p = coloring();
        let g = path(5);
        let lambda = PartialLabeling::from_names(p.alphabet().clone(), &[Some("x"), Some("y"), None, Some("y"), Some("x")]).unwrap();
        let (out, _) = min_mend_search(&p, &g, &lambda, 2, None, 10_000).unwrap();
        let SearchOutcome::Found(m) = out else { panic!() };
        assert_eq!(m.name_at(2), Some("x"));
        assert!(is_mend(&p, &g, &lambda, &m, 2).unwrap().is_mend());
    }

    #[test]
    fn parity_conflict_needs_a_shift() {
        // x y ? x y : the hole cannot be colored without recoloring one side
        let p = coloring();
        let g = path(5);
        let lambda = PartialLabeling::from_names(p.alphabet().clone(), &[Some("x"), Some("y"), None, Some("x"), Some("y")]).unwrap();
        let (out, _) = min_mend_search(&p, &g, &lambda, 2, None, 100_000).unwrap();
        let SearchOutcome::Found(m) = out else { panic!() };
        let diff = crate::labeling::hamming_diff(&lambda, &m).unwrap();
        assert_eq!(diff.len(), 3);
        let (none, _) = min_mend_search(&p, &g, &lambda, 2, Some(&[1, 2, 3]), 100_000).unwrap();
        assert_eq!(none, SearchOutcome::NoMend);
    }
}
