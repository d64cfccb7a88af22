//! JSON file formats for graphs, labelings, problems and mend runs.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::always_happy_problem;
use crate::families::orientation::{orientation_problem, OrientationRule};
use crate::families::path_to_sink::{path_to_sink_problem, Mode};
use crate::graph::{bfs_distances, Edge, Graph, Orientation, Vertex};
use crate::labeling::{Alphabet, PartialLabeling};
use crate::lcl::LclProblem;
use crate::menders::MendRun;
use crate::propagation::{build_problem, PropagationSpec};

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path.as_ref(), text)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex, Orientation)>,
    #[serde(default)]
    pub root: Option<Vertex>,
    #[serde(default)]
    pub parent: Option<Vec<Option<Vertex>>>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        let parent = g.parents().map(<[_]>::to_vec);
        let root = parent.as_ref().and_then(|p| {
            let mut roots = p.iter().enumerate().filter(|(_, q)| q.is_none()).map(|(v, _)| v);
            match (roots.next(), roots.next()) {
                (Some(r), None) => Some(r),
                _ => None,
            }
        });
        GraphFile { n: g.n(), edges: g.edges().iter().map(|e| (e.u, e.v, e.orientation)).collect(), root, parent }
    }

    /// Builds the graph. With a root but no parent list, parents point
    /// toward the root along shortest paths.
    pub fn to_graph(&self) -> Result<Graph> {
        let edges: Vec<Edge> = self.edges.iter().map(|&(u, v, orientation)| Edge { u, v, orientation }).collect();
        let parent = match (&self.parent, self.root) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(r)) => {
                if r >= self.n {
                    return Err(Error::Argument(format!("root {r} out of range")));
                }
                let g = Graph::new(self.n, edges.clone())?;
                let dist = bfs_distances(&g, &[r], usize::MAX);
                let p = (0..self.n)
                    .map(|v| {
                        if v == r || dist[v] == usize::MAX {
                            None
                        } else {
                            g.neighbors(v).find(|&u| dist[u] + 1 == dist[v])
                        }
                    })
                    .collect();
                Some(p)
            }
            (None, None) => None,
        };
        Graph::with_parents(self.n, edges, parent)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingFile {
    pub alphabet: Vec<String>,
    pub assignment: Vec<Option<String>>,
}

impl LabelingFile {
    pub fn from_labeling(l: &PartialLabeling) -> Self {
        LabelingFile {
            alphabet: l.alphabet().labels().to_vec(),
            assignment: (0..l.n()).map(|v| l.name_at(v).map(str::to_string)).collect(),
        }
    }

    pub fn to_labeling(&self) -> Result<PartialLabeling> {
        let ab = Arc::new(Alphabet::new(self.alphabet.iter().cloned())?);
        let names: Vec<Option<&str>> = self.assignment.iter().map(|s| s.as_deref()).collect();
        PartialLabeling::from_names(ab, &names)
    }
}

/// Problem file: a propagation spec, or a named problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemFile {
    Propagation {
        #[serde(flatten)]
        spec: PropagationSpec,
        /// Only vertices with exactly `delta` children are constrained.
        #[serde(default = "yes", skip_serializing_if = "is_true")]
        generalized: bool,
    },
    Named {
        problem: NamedProblem,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<Mode>,
    },
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedProblem {
    SinklessOrientation,
    DegreeTwoSink,
    PathToSink,
    AlwaysHappy,
}

impl ProblemFile {
    pub fn propagation(spec: PropagationSpec) -> Self {
        ProblemFile::Propagation { spec, generalized: true }
    }

    pub fn build(&self) -> Result<LclProblem> {
        match self {
            ProblemFile::Propagation { spec, generalized } => build_problem(spec, *generalized),
            ProblemFile::Named { problem, mode } => Ok(match problem {
                NamedProblem::SinklessOrientation => orientation_problem(OrientationRule::Sinkless),
                NamedProblem::DegreeTwoSink => orientation_problem(OrientationRule::DegreeTwoSink),
                NamedProblem::PathToSink => path_to_sink_problem(mode.unwrap_or(Mode::Promise)),
                NamedProblem::AlwaysHappy => always_happy_problem(),
            }),
        }
    }

    pub fn spec(&self) -> Option<&PropagationSpec> {
        match self {
            ProblemFile::Propagation { spec, .. } => Some(spec),
            ProblemFile::Named { .. } => None,
        }
    }
}

/// Serialized mend run; labels by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MendRunFile {
    pub explored: Vec<Vertex>,
    pub mend: LabelingFile,
    pub diff: Vec<Vertex>,
    pub steps: usize,
    pub seed: u64,
}

impl MendRunFile {
    pub fn from_run(r: &MendRun) -> Self {
        MendRunFile {
            explored: r.explored.clone(),
            mend: LabelingFile::from_labeling(&r.mend),
            diff: r.diff.clone(),
            steps: r.steps,
            seed: r.seed,
        }
    }

    pub fn to_run(&self) -> Result<MendRun> {
        Ok(MendRun {
            explored: self.explored.clone(),
            mend: self.mend.to_labeling()?,
            diff: self.diff.clone(),
            steps: self.steps,
            seed: self.seed,
        })
    }
}
