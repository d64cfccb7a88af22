//! Plugging in an exploration policy: always grow toward the frontier
//! vertex with the highest index.
//!
//!     cargo run --example custom_policy

use rand_chacha::ChaCha8Rng;

use mendlab::families::orientation::sinkless_worst_case;
use mendlab::families::orientation::sinkless_orientation_problem;
use mendlab::lcl::is_mend;
use mendlab::menders::{run_policy, Exploration, ExplorationPolicy};
use mendlab::Vertex;

struct Deepest;

impl ExplorationPolicy for Deepest {
    fn next_step(&mut self, ex: &Exploration<'_>, _: &mut ChaCha8Rng) -> mendlab::Result<Vec<Vertex>> {
        Ok(ex.frontier().max().into_iter().collect())
    }
}

fn main() -> mendlab::Result<()> {
    let p = sinkless_orientation_problem();
    for h in [4, 8, 12] {
        let (t, l, hole) = sinkless_worst_case(h)?;
        let run = run_policy(&p, t.graph(), &l, hole, &mut Deepest, 0)?;
        assert!(is_mend(&p, t.graph(), &l, &run.mend, hole)?.is_mend());
        println!("height {h:>2}: n={:<6} explored {:<3} flipped {}", t.n(), run.explored.len(), run.diff.len());
    }
    Ok(())
}
