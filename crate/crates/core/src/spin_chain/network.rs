//! Selection-rule transition networks.

use super::{EigenSystem, OperatorMatrix};

/// Undirected transition graph over eigenstates (0-based labels).
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    /// Edges `(α, β)` with `α < β`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Connected components, each sorted, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
}

impl Network {
    pub fn from_edges(n_states: usize, mut edges: Vec<(usize, usize)>) -> Self {
        edges.iter_mut().for_each(|e| {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        });
        edges.sort_unstable();
        edges.dedup();
        let components = connected_components(n_states, &edges);
        Network { edges, components }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&e).is_ok()
    }

    /// Component containing state `a`.
    pub fn component_of(&self, a: usize) -> &[usize] {
        self.components
            .iter()
            .find(|c| c.contains(&a))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Components rendered with 1-based labels, e.g. `{1,3,4} {2}`.
    pub fn describe(&self) -> String {
        self.components
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Connected components by union–find.
pub fn connected_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for x in 0..n {
        let r = find(&mut parent, x);
        match root_slot[r] {
            Some(g) => groups[g].push(x),
            None => {
                root_slot[r] = Some(groups.len());
                groups.push(vec![x]);
            }
        }
    }
    groups
}

/// Network with an edge `(α, β)` whenever `Σ_op |op_{αβ}|²` exceeds
/// `threshold`. Pass `[X_1, …, X_N]` for independent dissipation or `[J_z]`
/// for collective dissipation; operators must be in the eigenbasis.
pub fn transition_network(es: &EigenSystem, ops: &[OperatorMatrix], threshold: f64) -> Network {
    let dim = es.dim();
    let mut edges = Vec::new();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let weight: f64 = ops.iter().map(|op| op.matrix[(a, b)].norm_sqr()).sum();
            if weight > threshold {
                edges.push((a, b));
            }
        }
    }
    Network::from_edges(dim, edges)
}
