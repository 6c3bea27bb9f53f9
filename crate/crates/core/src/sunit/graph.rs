use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::lattice::{build_lattice, gamma_member, GroupSpec};
use super::SunitError;
use crate::rational::Rational;
use crate::set::FiniteSet;

/// Undirected graph on the elements of a set. Vertices are indices into
/// `vertices`; adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffGraph {
    vertices: FiniteSet,
    adjacency: Vec<Vec<usize>>,
    edges: usize,
}

impl DiffGraph {
    /// Edge `{a, b}` for every pair with `connect(a - b)`. The predicate must
    /// be symmetric under negation.
    pub fn from_difference_predicate<F>(vertices: FiniteSet, mut connect: F) -> Result<Self, SunitError>
    where
        F: FnMut(&Rational) -> Result<bool, SunitError>,
    {
        let n = vertices.len();
        let xs = vertices.elements();
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = 0;
        for i in 0..n {
            for j in i + 1..n {
                if connect(&(&xs[j] - &xs[i]))? {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                    edges += 1;
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(DiffGraph { vertices, adjacency, edges })
    }

    /// The complete graph on `vertices`.
    pub fn complete(vertices: FiniteSet) -> Self {
        Self::from_difference_predicate(vertices, |_| Ok(true)).expect("infallible predicate")
    }

    pub fn vertices(&self) -> &FiniteSet {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Ordered pairs `(a1, a2)` with an edge, i.e. twice the edge count.
    pub fn ordered_pair_count(&self) -> usize {
        2 * self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.adjacency.iter().map(Vec::len).min()
    }

    /// degree -> number of vertices with that degree
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for adj in &self.adjacency {
            *h.entry(adj.len()).or_insert(0) += 1;
        }
        h
    }

    /// Induced subgraph on the vertices where `keep` is true.
    fn induced(&self, keep: &[bool]) -> DiffGraph {
        let mut new_index = vec![usize::MAX; keep.len()];
        let mut kept = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_index[i] = kept.len();
                kept.push(i);
            }
        }
        let vertices = FiniteSet::from_elements(kept.iter().map(|&i| self.vertices.elements()[i].clone()));
        let adjacency: Vec<Vec<usize>> = kept
            .iter()
            .map(|&i| self.adjacency[i].iter().filter(|&&j| keep[j]).map(|&j| new_index[j]).collect())
            .collect();
        let edges = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        DiffGraph { vertices, adjacency, edges }
    }
}

/// Graph on `A` with `a1 ~ a2` iff `a1 - a2 ∈ Γ`.
pub fn build_diff_graph(a: &FiniteSet, spec: &GroupSpec) -> Result<DiffGraph, SunitError> {
    let lat = build_lattice(spec)?;
    let mut memo: HashMap<Rational, bool> = HashMap::new();
    DiffGraph::from_difference_predicate(a.clone(), |d| {
        let key = d.abs();
        if let Some(&hit) = memo.get(&key) {
            return Ok(hit);
        }
        let member = gamma_member(&key, &lat)?;
        memo.insert(key, member);
        Ok(member)
    })
}

/// Repeatedly deletes a vertex of degree below `t` until none is left.
pub fn prune_min_degree(g: &DiffGraph, t: usize) -> DiffGraph {
    let n = g.vertex_count();
    let mut keep = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] < t).collect();
    while let Some(v) = stack.pop() {
        if !keep[v] {
            continue;
        }
        keep[v] = false;
        for &w in g.neighbors(v) {
            if keep[w] {
                degree[w] -= 1;
                if degree[w] < t {
                    stack.push(w);
                }
            }
        }
    }
    g.induced(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64]) -> FiniteSet {
        FiniteSet::from_ints(v.iter().copied())
    }

    fn two() -> GroupSpec {
        GroupSpec::new(vec![Rational::from(2)]).unwrap()
    }

    /// Graph from an explicit edge list over vertices 0..n.
    fn from_edges(n: i64, edges: &[(i64, i64)]) -> DiffGraph {
        // encode vertices as distinct powers of 10 so each difference identifies its pair
        let verts = FiniteSet::from_ints((0..n).map(|i| 10i64.pow(i as u32)));
        let diffs: Vec<Rational> = edges
            .iter()
            .map(|&(a, b)| Rational::from(10i64.pow(a as u32) - 10i64.pow(b as u32)).abs())
            .collect();
        DiffGraph::from_difference_predicate(verts, |d| Ok(diffs.contains(&d.abs()))).unwrap()
    }

    #[test]
    fn diff_graph_examples() {
        let g = build_diff_graph(&s(&[1, 2, 3]), &two()).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.ordered_pair_count(), 6);
        let g = build_diff_graph(&s(&[1, 4]), &two()).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = build_diff_graph(&FiniteSet::empty(), &two()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (0, 0));
    }

    #[test]
    fn interval_closed_form() {
        for n in 1..=40i64 {
            let g = build_diff_graph(&FiniteSet::from_ints(1..=n), &two()).unwrap();
            let expected: i64 = 2 * (0..).map(|j| 1i64 << j).take_while(|&p| p < n).map(|p| n - p).sum::<i64>();
            assert_eq!(g.ordered_pair_count() as i64, expected, "n={n}");
        }
    }

    #[test]
    fn prune_examples() {
        let path = from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(path.edge_count(), 2);
        let pruned = prune_min_degree(&path, 2);
        assert_eq!(pruned.vertex_count(), 0);
        assert_eq!(prune_min_degree(&path, 0), path);
        let k4 = DiffGraph::complete(s(&[1, 2, 3, 4]));
        assert_eq!(prune_min_degree(&k4, 3), k4);
        assert_eq!(prune_min_degree(&k4, 4).vertex_count(), 0);
    }

    #[test]
    fn prune_accounting_on_gamma_graphs() {
        for n in [10i64, 25, 64] {
            let g = build_diff_graph(&FiniteSet::from_ints(1..=n), &two()).unwrap();
            for t in 0..12 {
                let p = prune_min_degree(&g, t);
                assert!(p.min_degree().is_none_or(|d| d >= t));
                assert!(g.edge_count() - p.edge_count() <= t * g.vertex_count());
                // subgraph: every surviving edge is an edge of g
                for v in 0..p.vertex_count() {
                    let gv = g.vertices().position(&p.vertices().elements()[v]).unwrap();
                    for &w in p.neighbors(v) {
                        let gw = g.vertices().position(&p.vertices().elements()[w]).unwrap();
                        assert!(g.has_edge(gv, gw));
                    }
                }
            }
        }
    }

    #[test]
    fn degree_histogram_counts_vertices() {
        let g = build_diff_graph(&FiniteSet::from_ints(1..=10), &two()).unwrap();
        let h = g.degree_histogram();
        assert_eq!(h.values().sum::<usize>(), 10);
        assert_eq!(h.iter().map(|(d, c)| d * c).sum::<usize>(), 2 * g.edge_count());
    }
}
