//! A scaling experiment end to end: table, CSV, power-law fit, separation
//! report and DMVol gap check.
//!
//!     cargo run --release --example scaling_experiment

use mendlab::families::r_i_problem;
use mendlab::harness::{
    dmvol_gap_check, fit_table, scaling_experiment, separation_report, ExperimentConfig, Family, FitModel, Measure,
    MeasurePair,
};

fn main() -> mendlab::Result<()> {
    let family = Family::propagation(r_i_problem(2)?);
    let cfg = ExperimentConfig {
        name: "r2".into(),
        family: family.clone(),
        measures: vec![Measure::ExistsMvol, Measure::Emvol],
        sizes: (2..=8).collect(),
        seeds: vec![0],
        trials: 50,
        policy: None,
    };
    let table = scaling_experiment(&cfg)?;
    table.write_csv(std::io::stdout())?;
    for m in [Measure::ExistsMvol, Measure::Emvol] {
        println!("{}: {}", m.name(), fit_table(&table, "r2", m, FitModel::Power)?);
    }

    let sep = separation_report(MeasurePair::EmvolDmvol, &Family::Adversarial { spec: r_i_problem(2)? }, &[3, 5, 7, 9], &[0], 100)?;
    println!("emvol vs dmvol on adversarial trees: {:?}", sep.verdict);
    for r in &sep.rows {
        println!("  n={:<6} {:>8.1} {:>8.1} ratio {:.3}", r.n, r.small, r.large, r.ratio);
    }
    for (name, fam) in [("adversarial R2", Family::Adversarial { spec: r_i_problem(2)? }), ("always happy", Family::AlwaysHappy)] {
        let gap = dmvol_gap_check(&fam, &[3, 5, 7, 9])?;
        println!("DMVol gap for {name}: {:?}", gap.verdict);
    }
    Ok(())
}
