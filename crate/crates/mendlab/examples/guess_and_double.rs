//! Running a size-aware mender without knowing n: guesses double until an
//! attempt halts, and the total work stays within a constant factor.
//!
//!     cargo run --example guess_and_double

use mendlab::families::r_i_problem;
use mendlab::harness::Family;
use mendlab::menders::{deterministic_ball_mender, guess_and_double_policy, PolicyKind};

fn main() -> mendlab::Result<()> {
    for family in [Family::propagation(r_i_problem(2)?), Family::SinklessOrientation, Family::DegreeTwoSink] {
        let inst = family.instance(5, 1)?;
        let (p, g, l, v) = (&inst.problem, &inst.graph, &inst.labeling, inst.hole);
        let plain = deterministic_ball_mender(p, g, l, v)?;
        let wrapped = guess_and_double_policy(p, g, l, v, PolicyKind::Ball, 0, |m| m)?;
        println!(
            "{:<20} n={:<4} ball explores {:<4} wrapped explores {:<4} over guesses {:?}",
            p.name(),
            g.n(),
            plain.explored.len(),
            wrapped.total_explored,
            wrapped.guesses
        );
    }
    Ok(())
}
