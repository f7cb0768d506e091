use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;

use crate::generators::Ctmc;

/// Closed communicating classes of the support graph, each sorted, listed
/// in order of their smallest state.
pub fn closed_classes(chain: &Ctmc) -> Vec<Vec<usize>> {
    let n = chain.len();
    let mut g = DiGraph::<(), ()>::with_capacity(n, chain.q().nnz());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for (j, _) in chain.jumps(i) {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    let mut comp = vec![0usize; n];
    let sccs = kosaraju_scc(&g);
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    let mut out: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members
                .iter()
                .all(|v| chain.jumps(v.index()).all(|(j, _)| comp[j] == *c))
        })
        .map(|(_, members)| {
            let mut v: Vec<usize> = members.iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    out.sort();
    out
}

/// States from which `target` can be reached, `target` included.
pub fn reaches(chain: &Ctmc, target: usize) -> Vec<bool> {
    let n = chain.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in chain.jumps(i) {
            preds[j].push(i);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![target];
    seen[target] = true;
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !seen[i] {
                seen[i] = true;
                stack.push(i);
            }
        }
    }
    seen
}

/// Nearest-neighbour structure of a chain restricted to a contiguous
/// interval of indices, if it has one.
#[derive(Debug, Clone)]
pub struct BirthDeathView {
    pub lo: usize,
    pub birth: Vec<f64>,
    pub death: Vec<f64>,
}

impl BirthDeathView {
    /// Returns `Some` if `class` is an index interval and every jump inside
    /// it moves by one.
    pub fn of_class(chain: &Ctmc, class: &[usize]) -> Option<Self> {
        let lo = *class.first()?;
        let hi = *class.last()?;
        if hi - lo + 1 != class.len() {
            return None;
        }
        let len = class.len();
        let mut birth = vec![0.0; len];
        let mut death = vec![0.0; len];
        for (off, i) in (lo..=hi).enumerate() {
            for (j, r) in chain.jumps(i) {
                if j == i + 1 && j <= hi {
                    birth[off] = r;
                } else if j + 1 == i && j >= lo {
                    death[off] = r;
                } else {
                    return None;
                }
            }
        }
        Some(Self { lo, birth, death })
    }
}
