//! The four mending measures on one instance, and what each exploration
//! policy pays.
//!
//!     cargo run --example mending_measures

use mendlab::families::r_i_problem;
use mendlab::harness::{Family, Measure};
use mendlab::menders::{run_policy, PolicyKind};

fn main() -> mendlab::Result<()> {
    let inst = Family::propagation(r_i_problem(2)?).instance(5, 0)?;
    println!("{} with n={}, hole at {}", inst.problem.name(), inst.n(), inst.hole);
    for m in [Measure::Mrad, Measure::ExistsMvol, Measure::Emvol, Measure::Dmvol, Measure::BallMrad] {
        let (value, stderr) = inst.measure(m, PolicyKind::RandomChild, 200, 1)?;
        println!("  {:<12} {value:>8.2} +- {stderr:.2}", m.name());
    }
    for kind in PolicyKind::ALL {
        if !kind.applies_to(&inst.problem) {
            continue;
        }
        let mut policy = kind.build(&inst.problem)?;
        let run = run_policy(&inst.problem, &inst.graph, &inst.labeling, inst.hole, policy.as_mut(), 7)?;
        println!("  {:<16} explored {:>4}, relabeled {:>4}, {} steps", kind.name(), run.explored.len(), run.diff.len(), run.steps);
    }
    Ok(())
}
