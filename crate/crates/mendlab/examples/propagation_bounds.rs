//! Growth class, volume bounds and exact worst-case mending volume of a few
//! propagation problems.
//!
//!     cargo run --example propagation_bounds

use mendlab::families::{polylog_spec, polynomial_spec, r_i_problem};
use mendlab::propagation::{classify_growth, exact_min_volume_tree_dp, volume_bounds, worst_case_instance};

fn main() -> mendlab::Result<()> {
    let specs = [
        ("R1", r_i_problem(1)?),
        ("R2", r_i_problem(2)?),
        ("R3", r_i_problem(3)?),
        ("M2", polylog_spec(2)?),
        ("poly(1,2)", polynomial_spec(1, 2)?),
    ];
    for (name, spec) in &specs {
        println!("{name}: {}", classify_growth(spec));
        for h in [2, 4, 6] {
            let (t, l, root) = worst_case_instance(spec, h)?;
            let (vol, _) = exact_min_volume_tree_dp(spec, &t, &l, root)?;
            let b = volume_bounds(spec, h);
            println!("  height {h}: n={:<6} min mend={vol:<5} bounds=[{}, {}]", t.n(), b.lower, b.upper);
        }
    }
    Ok(())
}
