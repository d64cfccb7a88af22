//! Interval search for the sink of a layered tree: explored vertices per
//! strategy against ln n.
//!
//!     cargo run --release --example sink_search

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mendlab::families::layered::layered_tree;
use mendlab::families::sink_search::{sink_search, Strategy};
use mendlab::harness::{fit_exponent, FitModel};

fn main() -> mendlab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for strategy in [Strategy::Midpoint, Strategy::RandomPivot, Strategy::Leftmost] {
        println!("{strategy:?}");
        let mut points = Vec::new();
        for h in [6, 8, 10, 12, 14] {
            let samples = 32;
            let mut total = 0.0;
            let mut n = 0.0;
            for s in 0..samples {
                let t = layered_tree(h, rng.gen_range(0..1usize << h))?;
                n = t.n() as f64;
                total += sink_search(&t, strategy, s).explored as f64;
            }
            let mean = total / samples as f64;
            points.push((n, mean));
            println!("  h={h:>2} n={n:<6} mean explored {mean:>8.1}  / ln n = {:.2}", mean / n.ln());
        }
        if let Ok(fit) = fit_exponent(&points, FitModel::Polylog) {
            println!("  polylog fit: k={:.2}", fit.exponent);
        }
    }
    Ok(())
}
