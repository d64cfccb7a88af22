//! Alphabets and partial labelings. `None` plays the role of the unlabeled
//! symbol; a vertex carrying it is a hole.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::Vertex;

/// Index into an [`Alphabet`].
pub type Label = u16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Spec("alphabet must contain at least one label".into()));
        }
        if labels.len() > Label::MAX as usize {
            return Err(Error::Spec(format!("alphabet too large ({} labels)", labels.len())));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::Spec(format!("duplicate label {a:?}")));
            }
        }
        Ok(Alphabet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn name(&self, l: Label) -> &str {
        &self.labels[l as usize]
    }

    pub fn index(&self, name: &str) -> Option<Label> {
        self.labels.iter().position(|s| s == name).map(|i| i as Label)
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> {
        0..self.labels.len() as Label
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialLabeling {
    alphabet: Arc<Alphabet>,
    assignment: Vec<Option<Label>>,
}

impl PartialLabeling {
    pub fn new(alphabet: Arc<Alphabet>, assignment: Vec<Option<Label>>) -> Result<Self> {
        let k = alphabet.len();
        if let Some(v) = assignment.iter().position(|l| matches!(l, Some(l) if *l as usize >= k)) {
            return Err(Error::Argument(format!("label at vertex {v} is outside the alphabet")));
        }
        Ok(PartialLabeling { alphabet, assignment })
    }

    pub fn empty(alphabet: Arc<Alphabet>, n: usize) -> Self {
        PartialLabeling { alphabet, assignment: vec![None; n] }
    }

    pub fn uniform(alphabet: Arc<Alphabet>, n: usize, label: Label) -> Self {
        assert!((label as usize) < alphabet.len());
        PartialLabeling { alphabet, assignment: vec![Some(label); n] }
    }

    /// Builds a labeling from label names; `None` entries stay holes.
    pub fn from_names(alphabet: Arc<Alphabet>, names: &[Option<&str>]) -> Result<Self> {
        let assignment = names
            .iter()
            .map(|s| match s {
                None => Ok(None),
                Some(s) => alphabet
                    .index(s)
                    .map(Some)
                    .ok_or_else(|| Error::Argument(format!("unknown label {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PartialLabeling { alphabet, assignment })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn get(&self, v: Vertex) -> Option<Label> {
        self.assignment[v]
    }

    pub fn set(&mut self, v: Vertex, l: Option<Label>) {
        if let Some(x) = l {
            assert!((x as usize) < self.alphabet.len(), "label outside alphabet");
        }
        self.assignment[v] = l;
    }

    pub fn assignment(&self) -> &[Option<Label>] {
        &self.assignment
    }

    pub fn is_hole(&self, v: Vertex) -> bool {
        self.assignment[v].is_none()
    }

    pub fn holes(&self) -> Vec<Vertex> {
        (0..self.n()).filter(|&v| self.is_hole(v)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    /// Vertices carrying a label.
    pub fn domain(&self) -> Vec<Vertex> {
        (0..self.n()).filter(|&v| !self.is_hole(v)).collect()
    }

    pub fn name_at(&self, v: Vertex) -> Option<&str> {
        self.assignment[v].map(|l| self.alphabet.name(l))
    }
}

/// Keeps the labels on `keep` and clears everything else.
pub fn restrict_labeling(lambda: &PartialLabeling, keep: &[Vertex]) -> PartialLabeling {
    let mut out = PartialLabeling::empty(lambda.alphabet.clone(), lambda.n());
    for &v in keep {
        if v < lambda.n() {
            out.assignment[v] = lambda.assignment[v];
        }
    }
    out
}

/// Vertices on which the two labelings disagree, in index order.
pub fn hamming_diff(a: &PartialLabeling, b: &PartialLabeling) -> Result<Vec<Vertex>> {
    if a.n() != b.n() {
        return Err(Error::Argument(format!("labelings cover {} and {} vertices", a.n(), b.n())));
    }
    if a.alphabet != b.alphabet && *a.alphabet != *b.alphabet {
        return Err(Error::Argument("labelings use different alphabets".into()));
    }
    Ok((0..a.n()).filter(|&v| a.assignment[v] != b.assignment[v]).collect())
}
