//! A hidden degree-2 vertex: a short mend always exists, but a mender has
//! to find it first.
//!
//!     cargo run --release --example degree_two_sink

use mendlab::families::orientation::degree_two_sink_instance;
use mendlab::menders::{min_mend, run_policy, PolicyKind};

fn main() -> mendlab::Result<()> {
    let kinds = [PolicyKind::Ball, PolicyKind::Dfs, PolicyKind::RandomFrontier, PolicyKind::RandomDfs];
    for h in [6, 8, 10] {
        let samples = 16;
        let mut oracle = 0;
        let mut means = [0.0; 4];
        let mut n = 0;
        for seed in 0..samples {
            let d = degree_two_sink_instance(h, seed)?;
            let g = d.tree.graph();
            n = g.n();
            oracle = oracle.max(min_mend(&d.problem, g, &d.labeling, d.hole)?.0);
            for (i, k) in kinds.iter().enumerate() {
                let mut pol = k.build(&d.problem)?;
                means[i] += run_policy(&d.problem, g, &d.labeling, d.hole, pol.as_mut(), seed)?.explored.len() as f64
                    / samples as f64;
            }
        }
        print!("height {h:>2}: n={n:<5} largest min mend {oracle:<3}");
        for (k, m) in kinds.iter().zip(means) {
            print!("  {} {:.2}n", k.name(), m / n as f64);
        }
        println!();
    }
    Ok(())
}
