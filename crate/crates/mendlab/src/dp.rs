//! Minimum-change mend for problems whose constraints only look at a vertex,
//! its label and the labels of its children ("at least `d[l']` children
//! labeled `l'`"), plus a root rule. Shared by the propagation problems and
//! the path-to-sink problems.
//!
//! Only a small region has to be optimised: the changeable vertices, their
//! parents and the ball around the hole whose relaxation disappears. Every
//! other vertex keeps its label and sees the same children as before.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{ball, Graph, Vertex};
use crate::labeling::{Label, PartialLabeling};

const INF: u32 = u32::MAX / 4;

pub(crate) trait DemandRules: Sync {
    fn num_labels(&self) -> usize;
    /// Radius of the relaxation around unlabeled vertices.
    fn radius(&self) -> usize;
    /// Required number of children per label, or `None` if `u` labeled `l`
    /// is unconstrained.
    fn demand(&self, u: Vertex, l: Label) -> Option<&[u32]>;
    fn root_ok(&self, u: Vertex, l: Label) -> bool;
    /// Precomputed relaxed vertices, replacing the ball around other holes.
    fn relaxed(&self) -> Option<&[bool]> {
        None
    }
}

struct Region {
    verts: Vec<Vertex>,
    /// Children inside the region.
    kids: Vec<Vec<usize>>,
    /// Labels of children outside the region.
    fixed_kids: Vec<Vec<Option<Label>>>,
    changeable: Vec<bool>,
    relaxed: Vec<bool>,
    order: Vec<usize>,
    roots: Vec<usize>,
}

fn build_region(
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    radius: usize,
    allowed: Option<&[Vertex]>,
    relaxed_at: Option<&[bool]>,
) -> Result<Region> {
    let mut verts: Vec<Vertex> = Vec::new();
    let mut index: HashMap<Vertex, usize> = HashMap::new();
    let mut changeable = Vec::new();
    let mut push = |x: Vertex, ch: bool, verts: &mut Vec<Vertex>, changeable: &mut Vec<bool>| match index.get(&x) {
        Some(&i) => changeable[i] |= ch,
        None => {
            index.insert(x, verts.len());
            verts.push(x);
            changeable.push(ch);
        }
    };
    let x_set: Vec<Vertex> = match allowed {
        None => (0..g.n()).filter(|&x| x == v || !lambda.is_hole(x)).collect(),
        Some(a) => a.iter().copied().filter(|&x| x < g.n() && (x == v || !lambda.is_hole(x))).collect(),
    };
    for &x in &x_set {
        push(x, true, &mut verts, &mut changeable);
    }
    for &x in &x_set {
        if let Some(p) = g.parent(x) {
            push(p, false, &mut verts, &mut changeable);
        }
    }
    for (x, _) in ball(g, v, radius) {
        push(x, false, &mut verts, &mut changeable);
    }
    let m = verts.len();
    let mut kids = vec![Vec::new(); m];
    let mut fixed_kids = vec![Vec::new(); m];
    for (i, &x) in verts.iter().enumerate() {
        for &c in g.children(x) {
            match index.get(&c) {
                Some(&j) => kids[i].push(j),
                None => fixed_kids[i].push(lambda.get(c)),
            }
        }
    }
    let relaxed = match relaxed_at {
        Some(r) => verts.iter().map(|&x| r[x]).collect(),
        None => {
            let mut near_holes: HashSet<Vertex> = HashSet::new();
            for h in (0..g.n()).filter(|&h| h != v && lambda.is_hole(h)) {
                near_holes.extend(ball(g, h, radius).into_iter().map(|(y, _)| y));
            }
            verts.iter().map(|x| near_holes.contains(x)).collect()
        }
    };
    let mut roots = Vec::new();
    for (i, &x) in verts.iter().enumerate() {
        match g.parent(x) {
            Some(p) if index.contains_key(&p) => {}
            _ => roots.push(i),
        }
    }
    // post-order via explicit stack
    let mut order = Vec::with_capacity(m);
    let mut seen = vec![false; m];
    for &r in &roots {
        let mut stack = vec![(r, false)];
        while let Some((i, done)) = stack.pop() {
            if done {
                order.push(i);
                continue;
            }
            if seen[i] {
                return Err(Error::Contract("parent attribute contains a cycle".into()));
            }
            seen[i] = true;
            stack.push((i, true));
            for &j in &kids[i] {
                stack.push((j, false));
            }
        }
    }
    if order.len() != m {
        return Err(Error::Contract("parent attribute contains a cycle".into()));
    }
    Ok(Region { verts, kids, fixed_kids, changeable, relaxed, order, roots })
}

/// Residual-demand assignment of flexible children. Returns the minimum cost
/// and, when `choices` is given, the label picked for every child.
fn assign_children(
    need: &[u32],
    kid_costs: &[&[u32]],
    k: usize,
    choices: Option<&mut Vec<usize>>,
) -> u32 {
    let radix: Vec<usize> = need.iter().map(|&d| d as usize + 1).collect();
    let states: usize = radix.iter().product();
    let encode = |s: &[u32]| -> usize {
        let mut idx = 0;
        for (i, &x) in s.iter().enumerate().rev() {
            idx = idx * radix[i] + x as usize;
        }
        idx
    };
    let decode = |mut idx: usize| -> Vec<u32> {
        radix
            .iter()
            .map(|&r| {
                let x = idx % r;
                idx /= r;
                x as u32
            })
            .collect()
    };
    let start = encode(need);
    let mut table = vec![INF; states];
    table[start] = 0;
    let mut history: Vec<Vec<(usize, usize)>> = Vec::new();
    for costs in kid_costs {
        let free = (0..=k).min_by_key(|&l| (costs[l], l)).unwrap();
        let mut next = vec![INF; states];
        let mut back = vec![(usize::MAX, usize::MAX); states];
        for s in 0..states {
            let base = table[s];
            if base >= INF {
                continue;
            }
            let c = base.saturating_add(costs[free]);
            if c < next[s] {
                next[s] = c;
                back[s] = (s, free);
            }
            let res = decode(s);
            for l in 0..k {
                if l < res.len() && res[l] > 0 && costs[l] < INF {
                    let mut r2 = res.clone();
                    r2[l] -= 1;
                    let t = encode(&r2);
                    let c = base + costs[l];
                    if c < next[t] {
                        next[t] = c;
                        back[t] = (s, l);
                    }
                }
            }
        }
        table = next;
        if choices.is_some() {
            history.push(back);
        }
    }
    let best = table[0];
    if let Some(ch) = choices {
        ch.clear();
        if best < INF {
            let mut s = 0;
            let mut picks = Vec::with_capacity(kid_costs.len());
            for back in history.iter().rev() {
                let (prev, l) = back[s];
                picks.push(l);
                s = prev;
            }
            picks.reverse();
            *ch = picks;
        }
    }
    best
}

struct Solved {
    region: Region,
    cost: Vec<u32>,
    k: usize,
}

impl Solved {
    fn table(&self, i: usize) -> &[u32] {
        &self.cost[i * (self.k + 1)..(i + 1) * (self.k + 1)]
    }
}

/// Residual demand after the fixed children are counted, or `None` when the
/// vertex is unconstrained in this configuration.
fn residual(rules: &dyn DemandRules, r: &Region, i: usize, l: Label) -> Option<Vec<u32>> {
    if r.relaxed[i] {
        return None;
    }
    let d = rules.demand(r.verts[i], l)?;
    let mut need = d.to_vec();
    for fl in r.fixed_kids[i].iter().flatten() {
        let fl = *fl as usize;
        if fl < need.len() && need[fl] > 0 {
            need[fl] -= 1;
        }
    }
    Some(need)
}

fn solve(rules: &dyn DemandRules, lambda: &PartialLabeling, v: Vertex, region: Region) -> Solved {
    let k = rules.num_labels();
    let w = k + 1;
    let m = region.verts.len();
    let mut cost = vec![INF; m * w];
    for &i in &region.order {
        let x = region.verts[i];
        let kid_tables: Vec<&[u32]> = region.kids[i].iter().map(|&j| &cost[j * w..(j + 1) * w]).collect();
        let free_sum: u32 = kid_tables
            .iter()
            .map(|t| *t.iter().min().unwrap())
            .fold(0u32, |a, b| a.saturating_add(b).min(INF));
        let mut row = vec![INF; w];
        for (li, slot) in row.iter_mut().enumerate() {
            let label = if li == k { None } else { Some(li as Label) };
            let change = if region.changeable[i] {
                if x == v && label.is_none() {
                    continue;
                }
                if label.is_none() && !lambda.is_hole(x) {
                    continue;
                }
                (label != lambda.get(x)) as u32
            } else {
                if label != lambda.get(x) {
                    continue;
                }
                0
            };
            let Some(l) = label else {
                *slot = change.saturating_add(free_sum).min(INF);
                continue;
            };
            if !region.relaxed[i] && !rules.root_ok(x, l) {
                continue;
            }
            let sub = match residual(rules, &region, i, l) {
                None => free_sum,
                Some(need) => assign_children(&need, &kid_tables, k, None),
            };
            *slot = change.saturating_add(sub).min(INF);
        }
        cost[i * w..(i + 1) * w].copy_from_slice(&row);
    }
    Solved { region, cost, k }
}

/// Minimum number of changed labels over mends at `v` that change only
/// `allowed` vertices, with a witness. `None` if no such mend exists.
pub(crate) fn min_mend_dp(
    rules: &dyn DemandRules,
    g: &Graph,
    lambda: &PartialLabeling,
    v: Vertex,
    allowed: Option<&[Vertex]>,
) -> Result<Option<(usize, PartialLabeling)>> {
    if v >= g.n() || !lambda.is_hole(v) {
        return Err(Error::Precondition(format!("vertex {v} is not a hole")));
    }
    if !g.has_parent_attr() {
        return Err(Error::Contract("child-demand problems need a parent attribute".into()));
    }
    if let Some(a) = allowed {
        if !a.contains(&v) {
            return Err(Error::Precondition(format!("hole {v} is not in the allowed set")));
        }
    }
    let region = build_region(g, lambda, v, rules.radius(), allowed, rules.relaxed())?;
    let solved = solve(rules, lambda, v, region);
    let k = solved.k;
    let r = &solved.region;
    let mut total = 0u32;
    let mut chosen = vec![usize::MAX; r.verts.len()];
    for &root in &r.roots {
        let t = solved.table(root);
        let (best, c) = (0..=k).map(|l| (l, t[l])).min_by_key(|&(l, c)| (c, l)).unwrap();
        if c >= INF {
            return Ok(None);
        }
        total += c;
        chosen[root] = best;
    }
    // top-down reconstruction
    let mut out = lambda.clone();
    let mut stack: Vec<usize> = r.roots.clone();
    let mut picks = Vec::new();
    while let Some(i) = stack.pop() {
        let li = chosen[i];
        let label = if li == k { None } else { Some(li as Label) };
        out.set(r.verts[i], label);
        let kid_tables: Vec<&[u32]> = r.kids[i].iter().map(|&j| solved.table(j)).collect();
        let need = label.and_then(|l| residual(rules, r, i, l));
        match need {
            Some(need) => {
                assign_children(&need, &kid_tables, k, Some(&mut picks));
                for (n, &j) in r.kids[i].iter().enumerate() {
                    chosen[j] = picks[n];
                }
            }
            None => {
                for (n, &j) in r.kids[i].iter().enumerate() {
                    let t = kid_tables[n];
                    chosen[j] = (0..=k).min_by_key(|&l| (t[l], l)).unwrap();
                }
            }
        }
        stack.extend_from_slice(&r.kids[i]);
    }
    Ok(Some((total as usize, out)))
}
