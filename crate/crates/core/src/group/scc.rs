use std::collections::VecDeque;

use super::automaton::{AutomaticStructure, VertexId};
use crate::spectral::{perron, SparseMatrix};

/// A strongly connected component of the coding graph with its cycle
/// structure and adjacency Perron value.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ComponentInfo {
    pub id: usize,
    /// Sorted vertex ids.
    pub vertices: Vec<VertexId>,
    /// gcd of all cycle lengths; 1 for cycle-free singletons by convention.
    pub period: usize,
    pub has_cycle: bool,
    pub spectral_radius: f64,
    pub is_word_maximal: bool,
}

/// Decomposes the coding graph into strongly connected components, ordered by
/// smallest contained vertex id. Augmentation edges never participate (the
/// augmentation vertex has no outgoing edges, so it forms a cycle-free
/// singleton).
pub fn scc_decomposition(a: &AutomaticStructure) -> Vec<ComponentInfo> {
    let n = a.vertex_count();
    let comp_of = tarjan(a, n);
    let count = comp_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); count];
    for (v, &c) in comp_of.iter().enumerate() {
        members[c].push(v);
    }
    for m in &mut members {
        m.sort_unstable();
    }
    members.sort_by_key(|m| m[0]);

    let mut infos = Vec::with_capacity(count);
    for (id, vertices) in members.into_iter().enumerate() {
        let index_of = |v: VertexId| vertices.binary_search(&v).ok();
        let mut adj = SparseMatrix::new(vertices.len());
        let mut has_internal_edge = false;
        for (local, &v) in vertices.iter().enumerate() {
            // Multiplicity of parallel edges matters for path counting.
            let mut counts = std::collections::BTreeMap::new();
            for &(w, _) in a.out_edges(v) {
                if let Some(t) = index_of(w) {
                    *counts.entry(t).or_insert(0u32) += 1;
                    has_internal_edge = true;
                }
            }
            for (t, c) in counts {
                adj.push(local, t, c as f64);
            }
        }
        adj.sort_rows();
        let has_cycle = has_internal_edge;
        let spectral_radius = if has_cycle {
            perron(&adj, 1e-13, 50_000).map(|p| p.value).unwrap_or(0.0)
        } else {
            0.0
        };
        let period = if has_cycle { component_period(&adj) } else { 1 };
        infos.push(ComponentInfo {
            id,
            vertices,
            period,
            has_cycle,
            spectral_radius,
            is_word_maximal: false,
        });
    }

    let max_sr = infos.iter().map(|c| c.spectral_radius).fold(0.0f64, f64::max);
    if max_sr > 0.0 {
        for c in &mut infos {
            c.is_word_maximal = c.spectral_radius >= max_sr * (1.0 - 1e-9);
        }
    }
    infos
}

/// gcd of level discrepancies over a BFS forest of the component: every edge
/// u→v contributes level(u) + 1 − level(v), and the gcd of these over all
/// edges equals the gcd of all cycle lengths.
fn component_period(adj: &SparseMatrix) -> usize {
    let n = adj.dim;
    let mut level = vec![i64::MIN; n];
    level[0] = 0;
    let mut q = VecDeque::from([0usize]);
    let mut g: i64 = 0;
    while let Some(u) = q.pop_front() {
        for &(v, _) in &adj.rows[u] {
            if level[v] == i64::MIN {
                level[v] = level[u] + 1;
                q.push_back(v);
            } else {
                g = gcd(g, (level[u] + 1 - level[v]).abs());
            }
        }
    }
    if g == 0 {
        1
    } else {
        g as usize
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Iterative Tarjan; returns the component index per vertex.
fn tarjan(a: &AutomaticStructure, n: usize) -> Vec<usize> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp_of = vec![usize::MAX; n];
    let mut next_index = 0usize;
    let mut comp_count = 0usize;

    // Explicit DFS stack: (vertex, next-edge cursor).
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut cursor)) = call.last_mut() {
            if *cursor == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            let edges = a.out_edges(v);
            if *cursor < edges.len() {
                let w = edges[*cursor].0;
                *cursor += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp_of[w] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
                call.pop();
                if let Some(&mut (u, _)) = call.last_mut() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    comp_of
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::automaton::{AutomaticStructure, AUGMENTATION, INITIAL};

    #[test]
    fn free_coding_components() {
        let a = AutomaticStructure::free_group(2).unwrap();
        let comps = scc_decomposition(&a);
        // `*`, `0`, and the 4 letter vertices.
        assert_eq!(comps.len(), 3);
        assert_eq!(comps[0].vertices, vec![INITIAL]);
        assert!(!comps[0].has_cycle);
        assert!(!comps[0].is_word_maximal);
        assert_eq!(comps[1].vertices, vec![AUGMENTATION]);
        assert!(!comps[1].is_word_maximal);
        let big = &comps[2];
        assert_eq!(big.vertices, vec![2, 3, 4, 5]);
        assert_eq!(big.period, 1);
        assert!((big.spectral_radius - 3.0).abs() < 1e-8);
        assert!(big.is_word_maximal);
    }

    #[test]
    fn two_cycle_has_period_two() {
        let text = "vertices 3\ninitial 0\nedge 0 1 a\nedge 1 2 b\nedge 2 1 a\n";
        let a = AutomaticStructure::parse_text(text).unwrap();
        let comps = scc_decomposition(&a);
        let cyc = comps.iter().find(|c| c.has_cycle).unwrap();
        assert_eq!(cyc.period, 2);
        assert!((cyc.spectral_radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partition_property() {
        let a = AutomaticStructure::free_group(3).unwrap();
        let comps = scc_decomposition(&a);
        let mut all: Vec<_> = comps.iter().flat_map(|c| c.vertices.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..a.vertex_count()).collect::<Vec<_>>());
    }

    #[test]
    fn power_iteration_matches_path_count_growth() {
        let a = AutomaticStructure::free_group(2).unwrap();
        let comps = scc_decomposition(&a);
        let big = comps.iter().find(|c| c.is_word_maximal).unwrap();
        // Growth of path counts inside the component: counts multiply by
        // exactly 3 per step, so the ratio estimator is exact here.
        let mut counts = vec![1.0f64; 4];
        let mut next = vec![0.0f64; 4];
        let mut ratio = 0.0;
        for _ in 0..200 {
            for (i, &v) in big.vertices.iter().enumerate() {
                let mut acc = 0.0;
                for &(w, _) in a.out_edges(v) {
                    if let Ok(j) = big.vertices.binary_search(&w) {
                        acc += counts[j];
                    }
                }
                next[i] = acc;
            }
            let tot_next: f64 = next.iter().sum();
            let tot: f64 = counts.iter().sum();
            ratio = tot_next / tot;
            let scale = 1.0 / tot_next;
            for (c, n) in counts.iter_mut().zip(&next) {
                *c = n * scale;
            }
        }
        assert!((ratio - big.spectral_radius).abs() / big.spectral_radius < 1e-6);
    }
}
