//! Command-line front end. Exit codes: 0 success, 1 rejected or negative
//! verdict, 2 usage or input error, 3 budget or size cap exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::algorithm1::algorithm1_trace;
use crate::families::encoding::{decode_oriented, encode_labeling, encode_unoriented};
use crate::families::layered::layered_tree;
use crate::families::orientation::degree_two_sink_instance;
use crate::families::path_to_sink::{worst_case_labeling, Mode, LAYERED_MAX_DEGREE};
use crate::families::sink_search::{sink_search, Strategy};
use crate::families::{polylog_spec, polynomial_spec, r_i_problem};
use crate::graph::{set_vertex_cap, Graph, Vertex};
use crate::harness::{
    dmvol_gap_check, fit_table, scaling_experiment, separation_report, ExperimentConfig, ExperimentTable, FitModel,
    MeasurePair,
};
use crate::io::{read_json, write_json, GraphFile, LabelingFile, MendRunFile, NamedProblem, ProblemFile};
use crate::labeling::{hamming_diff, PartialLabeling};
use crate::lcl::{verify_full, verify_partial, LclProblem, ProblemKind, Verdict};
use crate::menders::{oracle_min_mend, run_policy, MendRun, PolicyKind};
use crate::propagation::{classify_growth, exact_min_volume_tree_dp, volume_bounds, worst_case_instance, PropagationSpec};
use crate::search::DEFAULT_NODE_BUDGET;

#[derive(Parser, Debug)]
#[command(name = "mendlab", version = concat!(env!("CARGO_PKG_VERSION"), " (", env!("CARGO_PKG_NAME"), ")"))]
#[command(about = "Mending volume of locally checkable labelings")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for experiments.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Vertex cap for generated instances (overrides MENDLAB_MAX_N).
    #[arg(long, global = true)]
    max_n: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check a labeling against a problem.
    Verify {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Use the relaxed verdict for unlabeled vertices.
        #[arg(long)]
        partial: bool,
    },
    /// Growth class of a propagation spec.
    Classify {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Cumulative volume bounds up to distance `dmax`.
    Bounds {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        dmax: usize,
    },
    /// Generate an instance: graph.json, labeling.json and problem.json.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        /// Comma-separated key=value pairs, e.g. `i=2,height=4`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Mend a hole with a policy; prints the run(s) as JSON.
    Mend {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        hole: Vertex,
        /// ball, dfs, random-frontier, random-dfs, random-child, first-child, alg1 or oracle.
        #[arg(long, default_value = "ball")]
        policy: String,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Node budget of the search oracle.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Minimum mend of the worst case of a spec by tree DP.
    OracleDp {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        height: usize,
        /// Also run the search oracle and compare.
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Full-view path-to-sink mender.
    Alg1 {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        #[arg(long)]
        hole: Vertex,
        /// Broken vertices count as sinks.
        #[arg(long)]
        generalized: bool,
    },
    /// Interval search for the sink of a layered tree.
    Sinksearch {
        #[arg(long)]
        height: usize,
        /// Sink position; uniformly random per sample when absent.
        #[arg(long)]
        j0: Option<usize>,
        #[arg(long, default_value = "midpoint")]
        strategy: String,
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Replace oriented edges by gadgets in an unoriented graph.
    Encode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        labeling: Option<PathBuf>,
        /// Label written on gadget vertices.
        #[arg(long, default_value = "black")]
        filler: String,
        #[arg(long, default_value_t = LAYERED_MAX_DEGREE)]
        delta: usize,
        #[arg(long)]
        out_graph: PathBuf,
        #[arg(long)]
        out_labeling: Option<PathBuf>,
    },
    /// Recover the oriented graph from an encoding.
    Decode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = LAYERED_MAX_DEGREE)]
        delta: usize,
        #[arg(long)]
        out_graph: PathBuf,
    },
    /// Run a scaling experiment and write a CSV table.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit every series of a CSV table.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "power")]
        model: String,
        /// Exit 1 unless every fitted exponent is within tolerance of this.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Separation report for a measure pair, or the DMVol gap check.
    Report {
        /// mrad-exists-mvol, exists-mvol-emvol, emvol-dmvol or dmvol-ball-mrad.
        #[arg(long, required_unless_present = "gap")]
        pair: Option<String>,
        /// Run the DMVol gap check instead.
        #[arg(long)]
        gap: bool,
        /// Experiment config supplying family, sizes, seeds and trials.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct InstanceArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    labeling: PathBuf,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum GenFamily {
    Ri,
    Poly,
    Polylog,
    Layered,
    Deg2sink,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => 1,
        Error::BudgetExceeded { .. } | Error::InstanceTooLarge { .. } => 3,
        _ => 2,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Some(cap) = cli.max_n {
        set_vertex_cap(Some(cap));
    }
    if let Some(j) = cli.jobs {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load_instance(a: &InstanceArgs) -> Result<(LclProblem, Graph, PartialLabeling)> {
    let pf: ProblemFile = read_json(&a.problem)?;
    let g = read_json::<GraphFile>(&a.graph)?.to_graph()?;
    let l = read_json::<LabelingFile>(&a.labeling)?.to_labeling()?;
    Ok((pf.build()?, g, l))
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn parse_params(s: &str) -> Result<Vec<(String, String)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Argument(format!("bad parameter {p:?}, expected key=value")))
        })
        .collect()
}

fn param<T: std::str::FromStr>(ps: &[(String, String)], key: &str, default: Option<T>) -> Result<T> {
    match ps.iter().find(|(k, _)| k == key) {
        Some((_, v)) => v.parse().map_err(|_| Error::Argument(format!("bad value {v:?} for {key}"))),
        None => default.ok_or_else(|| Error::Argument(format!("missing parameter {key}"))),
    }
}

fn write_instance(dir: &Path, problem: &ProblemFile, g: &Graph, l: &PartialLabeling) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(dir.join("problem.json"), problem)?;
    write_json(dir.join("graph.json"), &GraphFile::from_graph(g))?;
    write_json(dir.join("labeling.json"), &LabelingFile::from_labeling(l))?;
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.cmd {
        Cmd::Verify { inst, partial } => {
            let (p, g, l) = load_instance(inst)?;
            let verdict = if *partial { verify_partial(&p, &g, &l)? } else { verify_full(&p, &g, &l)? };
            match verdict {
                Verdict::Accepted => {
                    writeln!(out, "accepted")?;
                    Ok(0)
                }
                Verdict::Rejected(v) => {
                    writeln!(out, "rejected at vertex {v}")?;
                    Ok(1)
                }
            }
        }
        Cmd::Classify { spec } => {
            let spec: PropagationSpec = read_json(spec)?;
            spec.validate()?;
            writeln!(out, "{}", classify_growth(&spec))?;
            Ok(0)
        }
        Cmd::Bounds { spec, dmax } => {
            let spec: PropagationSpec = read_json(spec)?;
            spec.validate()?;
            let b = volume_bounds(&spec, *dmax);
            writeln!(out, "lower={} upper={}", b.lower, b.upper)?;
            Ok(0)
        }
        Cmd::Gen { family, params, out_dir } => gen(*family, params, out_dir, cli.seed, out),
        Cmd::Mend { inst, hole, policy, trials, budget } => {
            let (p, g, l) = load_instance(inst)?;
            let runs = mend(&p, &g, &l, *hole, policy, *trials, *budget, cli.seed)?;
            let files: Vec<MendRunFile> = runs.iter().map(MendRunFile::from_run).collect();
            if files.len() == 1 {
                print_json(out, &files[0])?;
            } else {
                print_json(out, &files)?;
            }
            Ok(0)
        }
        Cmd::OracleDp { spec, height, search, budget } => {
            let spec: PropagationSpec = read_json(spec)?;
            let (t, l, v) = worst_case_instance(&spec, *height)?;
            let (vol, _) = exact_min_volume_tree_dp(&spec, &t, &l, v)?;
            writeln!(out, "volume={vol}")?;
            if *search {
                let p = crate::propagation::build_problem(&spec, true)?;
                let (s, _) = oracle_min_mend(&p, t.graph(), &l, v, *budget)?;
                writeln!(out, "search={s}")?;
                if s != vol {
                    return Ok(1);
                }
            }
            Ok(0)
        }
        Cmd::Alg1 { graph, labeling, hole, generalized } => {
            let g = read_json::<GraphFile>(graph)?.to_graph()?;
            let l = read_json::<LabelingFile>(labeling)?.to_labeling()?;
            let tr = algorithm1_trace(&g, &l, *hole, *generalized)?;
            #[derive(Serialize)]
            struct Out {
                run: MendRunFile,
                climbs: usize,
                relabels: usize,
            }
            print_json(out, &Out { run: MendRunFile::from_run(&tr.run), climbs: tr.climbs, relabels: tr.relabels })?;
            Ok(0)
        }
        Cmd::Sinksearch { height, j0, strategy, samples } => {
            let strategy: Strategy = strategy.parse()?;
            let width = 1usize
                .checked_shl(*height as u32)
                .filter(|_| *height < 40)
                .ok_or_else(|| Error::Argument(format!("height {height} is too large")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut results = Vec::new();
            for i in 0..(*samples).max(1) {
                let j = j0.unwrap_or_else(|| rng.gen_range(0..width));
                let t = layered_tree(*height, j)?;
                results.push(sink_search(&t, strategy, cli.seed.wrapping_add(i as u64)));
            }
            if results.len() == 1 {
                print_json(out, &results[0])?;
            } else {
                let mean = results.iter().map(|r| r.explored as f64).sum::<f64>() / results.len() as f64;
                writeln!(out, "samples={} mean_explored={mean:.3}", results.len())?;
            }
            Ok(0)
        }
        Cmd::Encode { graph, labeling, filler, delta, out_graph, out_labeling } => {
            let g = read_json::<GraphFile>(graph)?.to_graph()?;
            let enc = encode_unoriented(&g, *delta)?;
            write_json(out_graph, &GraphFile::from_graph(&enc.graph))?;
            if let Some(lp) = labeling {
                let l = read_json::<LabelingFile>(lp)?.to_labeling()?;
                let f = l
                    .alphabet()
                    .index(filler)
                    .ok_or_else(|| Error::Argument(format!("filler {filler:?} is not in the alphabet")))?;
                let el = encode_labeling(&enc, &l, f)?;
                let dest = out_labeling.clone().ok_or_else(|| Error::Argument("--out-labeling is required".into()))?;
                write_json(dest, &LabelingFile::from_labeling(&el))?;
            }
            writeln!(out, "n={} encoded_n={}", g.n(), enc.graph.n())?;
            Ok(0)
        }
        Cmd::Decode { graph, delta, out_graph } => {
            let g = read_json::<GraphFile>(graph)?.to_graph()?;
            let dec = decode_oriented(&g, *delta)?;
            write_json(out_graph, &GraphFile::from_graph(&dec.graph))?;
            writeln!(out, "n={} decoded_n={}", g.n(), dec.graph.n())?;
            Ok(0)
        }
        Cmd::Experiment { config, out: path } => {
            let cfg: ExperimentConfig = read_json(config)?;
            let table = scaling_experiment(&cfg)?;
            table.write_csv(std::fs::File::create(path)?)?;
            writeln!(out, "rows={}", table.rows.len())?;
            Ok(0)
        }
        Cmd::Fit { input, model, target } => {
            let model: FitModel = model.parse()?;
            let table = ExperimentTable::read_csv(std::fs::File::open(input)?)?;
            let mut code = 0;
            let mut fitted = 0;
            for (family, measure) in table.series_keys() {
                match fit_table(&table, &family, measure, model) {
                    Ok(f) => {
                        fitted += 1;
                        let verdict = match target {
                            Some(t) if f.within(*t) => " within",
                            Some(_) => {
                                code = 1;
                                " outside"
                            }
                            None => "",
                        };
                        writeln!(out, "{family} {measure} {f}{verdict}")?;
                    }
                    Err(e @ (Error::ModelInapplicable(_) | Error::Precondition(_))) => {
                        writeln!(out, "{family} {measure} inapplicable: {e}")?;
                    }
                    Err(e) => return Err(e),
                }
            }
            if fitted == 0 {
                return Err(Error::ModelInapplicable("no series could be fitted".into()));
            }
            Ok(code)
        }
        Cmd::Report { pair, gap, config } => {
            let cfg: ExperimentConfig = read_json(config)?;
            if *gap {
                let r = dmvol_gap_check(&cfg.family, &cfg.sizes)?;
                print_json(out, &r)?;
            } else {
                let pair: MeasurePair = pair.as_deref().unwrap_or_default().parse()?;
                let r = separation_report(pair, &cfg.family, &cfg.sizes, &cfg.seeds, cfg.trials)?;
                print_json(out, &r)?;
            }
            Ok(0)
        }
    }
}

fn gen(family: GenFamily, params: &str, dir: &Path, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let ps = parse_params(params)?;
    let height: usize = param(&ps, "height", Some(4))?;
    let propagation = |spec: PropagationSpec, out: &mut dyn Write| -> Result<i32> {
        let (t, l, v) = worst_case_instance(&spec, height)?;
        write_instance(dir, &ProblemFile::propagation(spec), t.graph(), &l)?;
        writeln!(out, "n={} hole={v}", t.n())?;
        Ok(0)
    };
    match family {
        GenFamily::Ri => propagation(r_i_problem(param(&ps, "i", Some(2))?)?, out),
        GenFamily::Poly => propagation(polynomial_spec(param(&ps, "p", None)?, param(&ps, "q", None)?)?, out),
        GenFamily::Polylog => propagation(polylog_spec(param(&ps, "k", Some(2))?)?, out),
        GenFamily::Layered => {
            if height >= 40 {
                return Err(Error::Argument(format!("height {height} is too large")));
            }
            let j0: usize = param(&ps, "j0", Some((seed % (1u64 << height)) as usize))?;
            let mode: Mode = match ps.iter().find(|(k, _)| k == "mode") {
                Some((_, m)) => serde_json::from_value(serde_json::Value::String(m.clone()))
                    .map_err(|_| Error::Argument(format!("unknown mode {m:?}")))?,
                None => Mode::Promise,
            };
            let t = layered_tree(height, j0)?;
            let l = worst_case_labeling(&t);
            let problem = ProblemFile::Named { problem: NamedProblem::PathToSink, mode: Some(mode) };
            let (g, l, hole) = if mode == Mode::UnorientedGeneral {
                let enc = encode_unoriented(&t.graph, LAYERED_MAX_DEGREE)?;
                let el = encode_labeling(&enc, &l, crate::families::path_to_sink::BLACK)?;
                let hole = enc.center[t.root()];
                (enc.graph, el, hole)
            } else {
                (t.graph.clone(), l, t.root())
            };
            write_instance(dir, &problem, &g, &l)?;
            writeln!(out, "n={} hole={hole} sink={}", g.n(), t.sink())?;
            Ok(0)
        }
        GenFamily::Deg2sink => {
            let d = degree_two_sink_instance(height, param(&ps, "seed", Some(seed))?)?;
            let problem = ProblemFile::Named { problem: NamedProblem::DegreeTwoSink, mode: None };
            write_instance(dir, &problem, d.tree.graph(), &d.labeling)?;
            writeln!(out, "n={} hole={} target={}", d.tree.n(), d.hole, d.target)?;
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn mend(
    p: &LclProblem,
    g: &Graph,
    l: &PartialLabeling,
    hole: Vertex,
    policy: &str,
    trials: usize,
    budget: u64,
    seed: u64,
) -> Result<Vec<MendRun>> {
    match policy {
        "oracle" => {
            let (_, m) = oracle_min_mend(p, g, l, hole, budget)?;
            let diff = hamming_diff(l, &m)?;
            Ok(vec![MendRun { explored: diff.clone(), mend: m, diff, steps: 0, seed }])
        }
        "alg1" => {
            let ProblemKind::PathToSink(mode) = p.kind() else {
                return Err(Error::Argument("alg1 needs a path-to-sink problem".into()));
            };
            if *mode == Mode::UnorientedGeneral {
                return Err(Error::Argument("alg1 runs on oriented graphs".into()));
            }
            Ok(vec![crate::families::algorithm1::algorithm1_mend(g, l, hole, *mode == Mode::OrientedGeneral)?])
        }
        name => {
            let kind: PolicyKind = name.parse()?;
            let n = if kind.is_deterministic() { 1 } else { trials.max(1) };
            (0..n as u64)
                .map(|i| {
                    let mut pol = kind.build(p)?;
                    run_policy(p, g, l, hole, pol.as_mut(), seed.wrapping_add(i))
                })
                .collect()
        }
    }
}
