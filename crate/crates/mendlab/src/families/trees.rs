//! Unbalanced rooted trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{check_cap, RootedTree, Vertex};

/// Random tree of depth at most `height`: every vertex above the last
/// layer gets `delta` children with probability `p_full`, otherwise a
/// uniform number in `0..delta`.
pub fn random_unbalanced_tree(delta: usize, height: usize, p_full: f64, seed: u64) -> Result<RootedTree> {
    if delta == 0 || !(0.0..=1.0).contains(&p_full) {
        return Err(Error::Precondition(format!("need delta >= 1 and p_full in [0, 1] (got {delta}, {p_full})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parent: Vec<Option<Vertex>> = vec![None];
    let mut layer = vec![0];
    for _ in 0..height {
        let mut next = Vec::new();
        for &v in &layer {
            let k = if rng.gen_bool(p_full) { delta } else { rng.gen_range(0..delta) };
            for _ in 0..k {
                next.push(parent.len());
                parent.push(Some(v));
            }
        }
        check_cap(parent.len() as u128)?;
        layer = next;
    }
    RootedTree::from_parents(parent)
}

/// Ternary tree where every vertex above depth `depth` has two children
/// that continue and one leaf child. Every constrained vertex must keep a
/// red chain down to the last layer, so mends reach depth `depth`.
pub fn adversarial_unbalanced_tree(depth: usize) -> Result<RootedTree> {
    check_cap(3u128 << depth.min(100))?;
    let mut parent: Vec<Option<Vertex>> = vec![None];
    let mut layer = vec![0];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * layer.len());
        for &v in &layer {
            for cont in [true, true, false] {
                if cont {
                    next.push(parent.len());
                }
                parent.push(Some(v));
            }
        }
        layer = next;
    }
    RootedTree::from_parents(parent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_seeded() {
        let a = random_unbalanced_tree(3, 5, 0.75, 9).unwrap();
        let b = random_unbalanced_tree(3, 5, 0.75, 9).unwrap();
        assert_eq!(a.n(), b.n());
        assert!(a.depths().iter().all(|&d| d <= 5));
        assert_eq!(random_unbalanced_tree(3, 3, 1.0, 0).unwrap().n(), 40);
    }

    #[test]
    fn adversarial_shape() {
        let t = adversarial_unbalanced_tree(3).unwrap();
        // 1 + 3 + 6 + 12
        assert_eq!(t.n(), 22);
        assert_eq!(t.children(0).len(), 3);
        assert_eq!(*t.depths().iter().max().unwrap(), 3);
    }
}
