//! Layered trees: structural checks, the full-view mender, and mending
//! through the unoriented encoding.
//!
//!     cargo run --release --example path_to_sink

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mendlab::families::algorithm1::algorithm1_trace;
use mendlab::families::encoding::{encode_labeling, encode_unoriented};
use mendlab::families::layered::layered_tree;
use mendlab::families::path_to_sink::{path_to_sink_problem, worst_case_labeling, Mode, BLACK, LAYERED_MAX_DEGREE};
use mendlab::families::structural::{apply_mutation, broken_vertices, random_mutation};
use mendlab::lcl::is_mend;
use mendlab::menders::min_mend;

fn main() -> mendlab::Result<()> {
    let t = layered_tree(4, 11)?;
    println!("t(4, 11): n={}, sink={}, well formed: {}", t.n(), t.sink(), broken_vertices(&t.graph).is_well_formed());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_mutation(&t.graph, &mut rng);
    let report = broken_vertices(&apply_mutation(&t.graph, m)?);
    println!("after {m:?}: broken {:?}", report.broken);

    let l = worst_case_labeling(&t);
    let tr = algorithm1_trace(&t.graph, &l, t.root(), false)?;
    let p = path_to_sink_problem(Mode::Promise);
    println!(
        "full-view mender: {} relabels, {} climbs, valid: {}",
        tr.relabels,
        tr.climbs,
        is_mend(&p, &t.graph, &l, &tr.run.mend, t.root())?.is_mend()
    );

    let enc = encode_unoriented(&t.graph, LAYERED_MAX_DEGREE)?;
    let el = encode_labeling(&enc, &l, BLACK)?;
    let hole = enc.center[t.root()];
    let up = path_to_sink_problem(Mode::UnorientedGeneral);
    let (vol, _) = min_mend(&up, &enc.graph, &el, hole)?;
    println!("unoriented encoding: n={}, minimum mend relabels {vol}", enc.graph.n());
    Ok(())
}
