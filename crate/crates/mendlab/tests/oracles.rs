//! Exhaustive enumeration over complete labelings on tiny instances, checked
//! against the solvers, the generic search and closed forms.

use mendlab::families::layered::layered_tree;
use mendlab::families::orientation::{
    degree_two_sink_instance, sinkless_orientation_problem, sinkless_worst_case, word_label, PortWord,
};
use mendlab::families::path_to_sink::{path_to_sink_problem, worst_case_labeling, Mode};
use mendlab::families::{polylog_spec, polynomial_spec, r_i_problem};
use mendlab::lcl::verify_full;
use mendlab::menders::{min_mend, oracle_min_mend};
use mendlab::propagation::{build_problem, exact_min_volume_tree_dp, volume_bounds, worst_case_instance};
use mendlab::{Graph, Label, LclProblem, PartialLabeling, Vertex};

const BUDGET: u64 = 5_000_000;

/// Fewest changed positions over every complete labeling drawn from
/// `candidates` that the verifier accepts.
fn brute_force(p: &LclProblem, g: &Graph, lambda: &PartialLabeling, candidates: &[Vec<Label>]) -> Option<usize> {
    let n = g.n();
    let mut idx = vec![0usize; n];
    let mut best = None;
    loop {
        let assignment: Vec<Option<Label>> = (0..n).map(|v| Some(candidates[v][idx[v]])).collect();
        let cand = PartialLabeling::new(lambda.alphabet().clone(), assignment).unwrap();
        if verify_full(p, g, &cand).unwrap().accepted() {
            let d = (0..n).filter(|&v| lambda.get(v) != cand.get(v)).count();
            best = Some(best.map_or(d, |b: usize| b.min(d)));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            idx[i] += 1;
            if idx[i] < candidates[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn all_labels(p: &LclProblem, n: usize) -> Vec<Vec<Label>> {
    vec![p.alphabet().iter().collect(); n]
}

fn port_words(g: &Graph) -> Vec<Vec<Label>> {
    (0..g.n())
        .map(|v| {
            let len = g.degree(v);
            (0..1u32 << len).map(|out| word_label(PortWord { len, out })).collect()
        })
        .collect()
}

/// Brute force, solver and search must agree; returns the common value.
fn agree(p: &LclProblem, g: &Graph, lambda: &PartialLabeling, v: Vertex, candidates: &[Vec<Label>]) -> usize {
    let brute = brute_force(p, g, lambda, candidates).expect("a mend exists");
    assert_eq!(min_mend(p, g, lambda, v).unwrap().0, brute);
    assert_eq!(oracle_min_mend(p, g, lambda, v, BUDGET).unwrap().0, brute);
    brute
}

#[test]
fn propagation_small_trees() {
    for (spec, height, want) in [
        (r_i_problem(1).unwrap(), 2, 3),
        (r_i_problem(2).unwrap(), 2, 7),
        (r_i_problem(3).unwrap(), 2, 13),
        (polylog_spec(2).unwrap(), 2, 6),
        (polynomial_spec(1, 2).unwrap(), 1, 3),
    ] {
        let p = build_problem(&spec, true).unwrap();
        let (t, l, v) = worst_case_instance(&spec, height).unwrap();
        let got = agree(&p, t.graph(), &l, v, &all_labels(&p, t.n()));
        assert_eq!(got, want);
        assert_eq!(exact_min_volume_tree_dp(&spec, &t, &l, v).unwrap().0, want);
        let b = volume_bounds(&spec, height);
        assert_eq!((b.lower, b.upper), (want.into(), want.into()));
    }
}

#[test]
fn propagation_closed_forms() {
    for h in 0..=6usize {
        let cases = [
            (r_i_problem(1).unwrap(), h + 1),
            (r_i_problem(2).unwrap(), (1 << (h + 1)) - 1),
            (r_i_problem(3).unwrap(), (3usize.pow(h as u32 + 1) - 1) / 2),
            (polylog_spec(2).unwrap(), (h + 1) * (h + 2) / 2),
        ];
        for (spec, want) in cases {
            let (t, l, v) = worst_case_instance(&spec, h).unwrap();
            assert_eq!(exact_min_volume_tree_dp(&spec, &t, &l, v).unwrap().0, want, "h={h} mu={:?}", spec.mu);
        }
    }
}

#[test]
fn path_to_sink_small_trees() {
    for mode in [Mode::Promise, Mode::OrientedGeneral] {
        let p = path_to_sink_problem(mode);
        for h in 1..=3 {
            for j0 in 0..(1usize << h) {
                let t = layered_tree(h, j0).unwrap();
                let l = worst_case_labeling(&t);
                assert_eq!(agree(&p, &t.graph, &l, t.root(), &all_labels(&p, t.n())), h + 1, "h={h} j0={j0}");
            }
        }
    }
}

#[test]
fn orientation_small_trees() {
    let (t, l, v) = sinkless_worst_case(2).unwrap();
    let p = sinkless_orientation_problem();
    assert_eq!(agree(&p, t.graph(), &l, v, &port_words(t.graph())), 3);

    for seed in 0..3 {
        let d = degree_two_sink_instance(2, seed).unwrap();
        let g = d.tree.graph();
        assert_eq!(agree(&d.problem, g, &d.labeling, d.hole, &port_words(g)), 3, "seed {seed}");
    }
}
