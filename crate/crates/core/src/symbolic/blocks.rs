use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{AutomaticStructure, ComponentInfo, VertexId};

/// Higher-block recoding of a component: states are admissible k-vertex paths
/// inside the component, and a transition u → v exists when they overlap in
/// k−1 vertices. Depth-k cylinder potentials then become 1-step edge weights:
/// the transition u → v corresponds to the (k+1)-path u ++ [last of v].
#[derive(Debug, Clone)]
pub struct BlockSft {
    depth: usize,
    states: Vec<Vec<VertexId>>,
    /// transitions[i] = sorted successor state indices.
    transitions: Vec<Vec<usize>>,
}

impl BlockSft {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &[VertexId] {
        &self.states[i]
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.transitions[i]
    }

    /// The cylinder labelling the transition i → j.
    pub fn transition_cylinder(&self, i: usize, j: usize) -> Vec<VertexId> {
        let mut cyl = self.states[i].clone();
        cyl.push(*self.states[j].last().unwrap());
        cyl
    }

    /// Number of length-n paths (n edges) in the block graph.
    pub fn path_count(&self, n: usize) -> u64 {
        let mut counts = vec![1u64; self.states.len()];
        for _ in 0..n {
            let mut next = vec![0u64; self.states.len()];
            for (i, succs) in self.transitions.iter().enumerate() {
                for &j in succs {
                    next[i] += counts[j];
                }
            }
            counts = next;
        }
        counts.iter().sum()
    }
}

/// Builds the k-block refinement of a component.
pub fn refine_to_blocks(
    a: &AutomaticStructure,
    component: &ComponentInfo,
    k: usize,
) -> Result<BlockSft> {
    if component.vertices.is_empty() || !component.has_cycle {
        return Err(Error::EmptyComponent);
    }
    if k == 0 {
        return Err(Error::Degenerate("block depth must be at least 1".into()));
    }
    let inside = |v: VertexId| component.vertices.binary_search(&v).is_ok();

    // Enumerate k-vertex paths inside the component in lexicographic order.
    let mut states: Vec<Vec<VertexId>> = Vec::new();
    let mut stack: Vec<Vec<VertexId>> = component.vertices.iter().rev().map(|&v| vec![v]).collect();
    while let Some(path) = stack.pop() {
        if path.len() == k {
            states.push(path);
            continue;
        }
        let v = *path.last().unwrap();
        for &(w, _) in a.out_edges(v).iter().rev() {
            if inside(w) {
                let mut p = path.clone();
                p.push(w);
                stack.push(p);
            }
        }
    }
    states.sort();
    states.dedup();

    let index: BTreeMap<&[VertexId], usize> =
        states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut transitions = vec![Vec::new(); states.len()];
    for (i, s) in states.iter().enumerate() {
        let v = *s.last().unwrap();
        for &(w, _) in a.out_edges(v) {
            if !inside(w) {
                continue;
            }
            let mut succ = s[1..].to_vec();
            succ.push(w);
            if let Some(&j) = index.get(succ.as_slice()) {
                transitions[i].push(j);
            }
        }
        transitions[i].sort_unstable();
    }
    Ok(BlockSft { depth: k, states, transitions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{scc_decomposition, AutomaticStructure};

    fn f2_component() -> (AutomaticStructure, ComponentInfo) {
        let a = AutomaticStructure::free_group(2).unwrap();
        let comp = scc_decomposition(&a).into_iter().find(|c| c.is_word_maximal).unwrap();
        (a, comp)
    }

    #[test]
    fn depth_one_is_the_component_itself() {
        let (a, comp) = f2_component();
        let b = refine_to_blocks(&a, &comp, 1).unwrap();
        assert_eq!(b.state_count(), 4);
        for i in 0..4 {
            assert_eq!(b.successors(i).len(), 3);
        }
    }

    #[test]
    fn depth_two_has_twelve_states() {
        let (a, comp) = f2_component();
        let b = refine_to_blocks(&a, &comp, 2).unwrap();
        // Ordered non-cancelling letter pairs.
        assert_eq!(b.state_count(), 12);
        for i in 0..b.state_count() {
            assert_eq!(b.successors(i).len(), 3);
        }
    }

    #[test]
    fn path_counts_preserved_under_refinement() {
        let (a, comp) = f2_component();
        let base = refine_to_blocks(&a, &comp, 1).unwrap();
        for k in 2..=4usize {
            let b = refine_to_blocks(&a, &comp, k).unwrap();
            for n in 1..=8usize {
                assert_eq!(b.path_count(n), base.path_count(n + k - 1), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn empty_component_rejected() {
        let (a, _) = f2_component();
        let comps = scc_decomposition(&a);
        let star = &comps[0];
        assert!(refine_to_blocks(&a, star, 2).is_err());
    }
}
