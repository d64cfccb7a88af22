//! Concrete problems and graph families.

pub mod algorithm1;
pub mod encoding;
pub mod layered;
pub mod orientation;
pub mod path_to_sink;
pub mod sink_search;
pub mod structural;
pub mod trees;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::labeling::Alphabet;
use crate::lcl::{LclProblem, View};
use crate::propagation::PropagationSpec;

/// `R_i`: a red vertex needs at least `i` red children among three; the
/// root is red.
pub fn r_i_problem(i: u32) -> Result<PropagationSpec> {
    if !(1..=3).contains(&i) {
        return Err(Error::Precondition(format!("i must be 1, 2 or 3 (got {i})")));
    }
    PropagationSpec::new(&["red"], "red", "white", vec![vec![i]], 3)
}

/// Single label demanding `2^p` copies of itself among `2^q` children.
pub fn polynomial_spec(p: u32, q: u32) -> Result<PropagationSpec> {
    if p < 1 || q <= p {
        return Err(Error::Precondition(format!("need q > p >= 1 (got p={p}, q={q})")));
    }
    if q > 20 {
        return Err(Error::Precondition(format!("2^{q} children is too many")));
    }
    PropagationSpec::new(&["red"], "red", "white", vec![vec![1 << p]], 1usize << q)
}

/// `k` labels on binary trees; `l_i` demands one `l_i` child and one
/// `l_{i+1}` child.
pub fn polylog_spec(k: usize) -> Result<PropagationSpec> {
    if k < 1 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let names: Vec<String> = (1..=k).map(|i| format!("l{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mu = (0..k).map(|i| (0..k).map(|j| (j == i || j == i + 1) as u32).collect()).collect();
    PropagationSpec::new(&refs, "l1", "free", mu, 2)
}

/// One label, every vertex always happy.
pub fn always_happy_problem() -> LclProblem {
    let ab = Arc::new(Alphabet::new(["ok"]).expect("one label"));
    LclProblem::new("always-happy", ab, 1, Arc::new(|_: &View| true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::{classify_growth, volume_bounds, GrowthClass};
    use num_bigint::BigUint;

    #[test]
    fn r_i_classes() {
        assert_eq!(classify_growth(&r_i_problem(1).unwrap()), GrowthClass::Constant);
        assert_eq!(classify_growth(&r_i_problem(2).unwrap()).to_string(), "Exponential beta=1");
        assert_eq!(classify_growth(&r_i_problem(3).unwrap()).to_string(), "Exponential beta=2");
        assert!(r_i_problem(4).is_err());
    }

    #[test]
    fn polynomial_and_polylog() {
        assert!(polynomial_spec(2, 2).is_err());
        let s = polynomial_spec(1, 2).unwrap();
        assert_eq!((s.mu[0][0], s.delta), (2, 4));
        assert_eq!(classify_growth(&polylog_spec(1).unwrap()), GrowthClass::Constant);
        assert_eq!(classify_growth(&polylog_spec(3).unwrap()), GrowthClass::Polynomial { degree: 2 });
        for h in 0..10usize {
            let b = volume_bounds(&polylog_spec(2).unwrap(), h);
            assert_eq!(b.lower, BigUint::from((h + 1) * (h + 2) / 2));
        }
    }
}
