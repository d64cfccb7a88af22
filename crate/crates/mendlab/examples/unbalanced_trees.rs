//! R2 on unbalanced ternary trees: the random-child mender stays below the
//! balanced-tree volume, while deterministic menders are forced to explore
//! a constant fraction of the adversarial tree.
//!
//!     cargo run --release --example unbalanced_trees

use mendlab::families::r_i_problem;
use mendlab::harness::Family;
use mendlab::menders::{estimate_expected_volume, PolicyKind};

fn main() -> mendlab::Result<()> {
    let spec = r_i_problem(2)?;
    let alpha = 2f64.ln() / 3f64.ln();

    println!("random trees (p_full = 0.7): mean random-child volume vs balanced volume");
    let random = Family::Unbalanced { spec: spec.clone(), p_full: 0.7 };
    for h in 3..=7 {
        // skip trees that died out early
        let inst = (0..)
            .map(|seed| random.instance(h, seed))
            .find(|i| i.as_ref().map_or(true, |i| i.n() >= 1 << (h + 1)))
            .unwrap()?;
        let e = estimate_expected_volume(&inst.problem, &inst.graph, &inst.labeling, inst.hole, PolicyKind::RandomChild, 400, 1)?;
        let balanced = (2.0 * inst.n() as f64 + 1.0).powf(alpha) - 1.0;
        println!("  height {h}: n={:<5} {:>7.2} +- {:.2}  <=  {balanced:.2}", inst.n(), e.mean, e.stderr);
    }

    println!("adversarial trees: explored fraction of n");
    let adversarial = Family::Adversarial { spec };
    for depth in [4, 6, 8, 10] {
        let inst = adversarial.instance(depth, 0)?;
        let n = inst.n() as f64;
        let ball = inst.explored(PolicyKind::Ball, 0)? as f64 / n;
        let first = inst.explored(PolicyKind::FirstChild, 0)? as f64 / n;
        let (emvol, _) = inst.measure(mendlab::harness::Measure::Emvol, PolicyKind::RandomChild, 400, 3)?;
        println!("  depth {depth:>2}: n={n:<5} ball {ball:.2}  first-child {first:.2}  random-child {:.3}", emvol / n);
    }
    Ok(())
}
