//! Finite connected graphs, balls in the graph metric, and boundaries of subgraphs.
//!
//! Vertices are addressed by dense indices `0..len()`. Each graph also carries an opaque
//! external id per vertex (used by the JSON fixture format) and a declared dimension
//! `dim_hint` for ball-growth bookkeeping.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of vertices a generated box graph may have.
pub const MAX_VERTICES: usize = 1 << 20;

const UNREACHABLE: u32 = u32::MAX;

/// A finite, connected, simple undirected graph.
#[derive(Debug)]
pub struct FiniteGraph {
    ids: Vec<u64>,
    adjacency: Vec<Vec<usize>>,
    dim_hint: u32,
    side: Option<usize>,
    distances: Vec<OnceLock<Vec<u32>>>,
}

impl Clone for FiniteGraph {
    fn clone(&self) -> Self {
        FiniteGraph {
            ids: self.ids.clone(),
            adjacency: self.adjacency.clone(),
            dim_hint: self.dim_hint,
            side: self.side,
            distances: (0..self.ids.len()).map(|_| OnceLock::new()).collect(),
        }
    }
}

/// JSON fixture layout: `{"vertices": [ids], "edges": [[i, j]], "dim_hint": d}`.
///
/// Edge endpoints are positions in `vertices`, not ids.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: Vec<u64>,
    pub edges: Vec<[usize; 2]>,
    pub dim_hint: u32,
}

impl FiniteGraph {
    /// Build a graph from an undirected edge list on vertices `0..n`.
    ///
    /// Duplicate edges are merged. Self-loops, out-of-range endpoints and disconnected
    /// vertex sets are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], dim_hint: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph needs at least one vertex".into()));
        }
        if dim_hint == 0 {
            return Err(Error::InvalidSize("dim_hint must be positive".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n {
                return Err(Error::UnknownVertex(a));
            }
            if b >= n {
                return Err(Error::UnknownVertex(b));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
            nb.dedup();
        }
        let graph = Self::from_parts((0..n as u64).collect(), adjacency, dim_hint, None);
        if !graph.is_connected_subset(&(0..n).collect::<Vec<_>>()) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    fn from_parts(ids: Vec<u64>, adjacency: Vec<Vec<usize>>, dim_hint: u32, side: Option<usize>) -> Self {
        let n = adjacency.len();
        FiniteGraph {
            ids,
            adjacency,
            dim_hint,
            side,
            distances: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let n = json.vertices.len();
        let mut seen = HashMap::with_capacity(n);
        for (i, id) in json.vertices.iter().enumerate() {
            if seen.insert(*id, i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {id}")));
            }
        }
        let edges: Vec<(usize, usize)> = json.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = Self::from_edges(n, &edges, json.dim_hint)?;
        g.ids = json.vertices.clone();
        Ok(g)
    }

    pub fn to_json(&self) -> GraphJson {
        let mut edges = Vec::new();
        for (a, nb) in self.adjacency.iter().enumerate() {
            for &b in nb {
                if a < b {
                    edges.push([a, b]);
                }
            }
        }
        GraphJson { vertices: self.ids.clone(), edges, dim_hint: self.dim_hint }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn dim_hint(&self) -> u32 {
        self.dim_hint
    }

    pub fn id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Coordination number n(x).
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|nb| nb.binary_search(&b).is_ok())
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.len()
    }

    fn check(&self, v: usize) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Side length for box graphs, `None` for general graphs.
    pub fn box_side(&self) -> Option<usize> {
        self.side
    }

    /// Index of the box vertex with the given coordinates (first coordinate fastest).
    pub fn box_index(&self, coords: &[usize]) -> Option<usize> {
        let side = self.side?;
        if coords.len() != self.dim_hint as usize || coords.iter().any(|&c| c >= side) {
            return None;
        }
        Some(coords.iter().rev().fold(0, |acc, &c| acc * side + c))
    }

    /// Coordinates of a box vertex.
    pub fn box_coords(&self, v: usize) -> Option<Vec<usize>> {
        let side = self.side?;
        let mut rest = v;
        let mut out = Vec::with_capacity(self.dim_hint as usize);
        for _ in 0..self.dim_hint {
            out.push(rest % side);
            rest /= side;
        }
        Some(out)
    }

    /// Row of BFS distances from `center`, computed once and cached.
    pub fn distances_from(&self, center: usize) -> Result<&[u32]> {
        self.check(center)?;
        Ok(self.distances[center].get_or_init(|| self.bfs(center)))
    }

    fn bfs(&self, center: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.len()];
        let mut queue = VecDeque::new();
        dist[center] = 0;
        queue.push_back(center);
        while let Some(v) = queue.pop_front() {
            let next = dist[v] + 1;
            for &w in &self.adjacency[v] {
                if dist[w] == UNREACHABLE {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, x: usize, y: usize) -> Result<u32> {
        self.check(y)?;
        Ok(self.distances_from(x)?[y])
    }

    /// Ball {y : d(center, y) <= r}, ascending vertex order.
    pub fn ball(&self, center: usize, r: u32) -> Result<Vec<usize>> {
        let dist = self.distances_from(center)?;
        Ok((0..self.len()).filter(|&y| dist[y] <= r).collect())
    }

    /// Sphere {y : d(center, y) = r}.
    pub fn sphere(&self, center: usize, r: u32) -> Result<Vec<usize>> {
        let dist = self.distances_from(center)?;
        Ok((0..self.len()).filter(|&y| dist[y] == r).collect())
    }

    /// Largest distance from `center` to any vertex.
    pub fn eccentricity(&self, center: usize) -> Result<u32> {
        Ok(self.distances_from(center)?.iter().copied().max().unwrap_or(0))
    }

    /// True when the vertices in `members` induce a connected subgraph.
    pub fn is_connected_subset(&self, members: &[usize]) -> bool {
        if members.is_empty() {
            return false;
        }
        let mut inside = vec![false; self.len()];
        for &m in members {
            if m >= self.len() {
                return false;
            }
            inside[m] = true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![members[0]];
        seen[members[0]] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        let distinct = inside.iter().filter(|&&b| b).count();
        count == distinct
    }

    /// The induced subgraph on `view`, as a standalone graph with its intrinsic metric.
    ///
    /// Vertex `i` of the result corresponds to `view.members()[i]`; ids are inherited.
    pub fn induced(&self, view: &SubgraphView) -> FiniteGraph {
        let adjacency = view
            .members()
            .iter()
            .map(|&v| self.adjacency[v].iter().filter_map(|&w| view.position(w)).collect())
            .collect();
        let ids = view.members().iter().map(|&v| self.ids[v]).collect();
        Self::from_parts(ids, adjacency, self.dim_hint, None)
    }
}

/// Path graph on `{0, .., n-1}`.
pub fn build_interval_graph(n: usize) -> Result<FiniteGraph> {
    if n == 0 {
        return Err(Error::InvalidSize("interval needs n >= 1".into()));
    }
    build_box_graph(1, n)
}

/// Box `{0, .., side-1}^d` with nearest-neighbour edges.
pub fn build_box_graph(d: u32, side: usize) -> Result<FiniteGraph> {
    if d == 0 || side == 0 {
        return Err(Error::InvalidSize(format!("box needs d >= 1 and side >= 1, got d={d}, side={side}")));
    }
    let n = u32::try_from(side)
        .ok()
        .and_then(|s| (s as usize).checked_pow(d))
        .filter(|&n| n <= MAX_VERTICES)
        .ok_or_else(|| Error::InvalidSize(format!("side^d = {side}^{d} exceeds {MAX_VERTICES} vertices")))?;
    let mut adjacency = vec![Vec::new(); n];
    let mut stride = 1;
    for _ in 0..d {
        for v in 0..n {
            if (v / stride) % side + 1 < side {
                adjacency[v].push(v + stride);
                adjacency[v + stride].push(v);
            }
        }
        stride *= side;
    }
    for nb in &mut adjacency {
        nb.sort_unstable();
    }
    Ok(FiniteGraph::from_parts((0..n as u64).collect(), adjacency, d, Some(side)))
}

/// Free function form of [`FiniteGraph::ball`].
pub fn ball(g: &FiniteGraph, center: usize, r: u32) -> Result<Vec<usize>> {
    g.ball(center, r)
}

/// A connected vertex subset Λ of an ambient graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphView {
    members: Vec<usize>,
    positions: HashMap<usize, usize>,
    ambient_len: usize,
}

impl SubgraphView {
    pub fn new(ambient: &FiniteGraph, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&m| m >= ambient.len()) {
            return Err(Error::UnknownVertex(bad));
        }
        if !ambient.is_connected_subset(&members) {
            return Err(Error::InvalidDomain("subgraph is empty or not connected".into()));
        }
        let positions = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Ok(SubgraphView { members, positions, ambient_len: ambient.len() })
    }

    /// The ball B_r(center) of the ambient graph as a view.
    pub fn ball(ambient: &FiniteGraph, center: usize, r: u32) -> Result<Self> {
        Self::new(ambient, ambient.ball(center, r)?)
    }

    pub fn whole(ambient: &FiniteGraph) -> Self {
        let members: Vec<usize> = (0..ambient.len()).collect();
        let positions = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        SubgraphView { members, positions, ambient_len: ambient.len() }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.positions.contains_key(&v)
    }

    /// Row index of ambient vertex `v`, if it belongs to the view.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.positions.get(&v).copied()
    }

    pub fn is_proper(&self) -> bool {
        self.members.len() < self.ambient_len
    }

    /// Λ^c, ascending.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.ambient_len).filter(|v| !self.contains(*v)).collect()
    }
}

/// Internal, external and edge boundary of a subgraph relative to its ambient graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBoundary {
    pub inner: Vec<usize>,
    pub outer: Vec<usize>,
    /// `(u, u')` with `u` inside, `u'` outside, `d(u, u') = 1`; lexicographic order.
    pub edges: Vec<(usize, usize)>,
}

pub fn boundary(ambient: &FiniteGraph, view: &SubgraphView) -> Result<EdgeBoundary> {
    if !view.is_proper() {
        return Err(Error::EmptyBoundary);
    }
    let mut edges = Vec::new();
    for &u in view.members() {
        for &w in ambient.neighbors(u) {
            if !view.contains(w) {
                edges.push((u, w));
            }
        }
    }
    edges.sort_unstable();
    let mut inner: Vec<usize> = edges.iter().map(|e| e.0).collect();
    inner.dedup();
    let mut outer: Vec<usize> = edges.iter().map(|e| e.1).collect();
    outer.sort_unstable();
    outer.dedup();
    Ok(EdgeBoundary { inner, outer, edges })
}

/// Empirical constant C_d with |B_L(x)| <= C_d L^d over all probed centers and radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub c_d: f64,
    pub probe_range: u32,
    pub dim: u32,
}

impl GrowthCertificate {
    /// The volume bound C_d L^d.
    pub fn volume_bound(&self, l: u32) -> f64 {
        self.c_d * f64::from(l).powi(self.dim as i32)
    }

    /// The edge-boundary bound C_d^2 L^d.
    pub fn boundary_bound(&self, l: u32) -> f64 {
        self.c_d * self.c_d * f64::from(l).powi(self.dim as i32)
    }
}

pub fn ball_growth_constant(g: &FiniteGraph, l_max: u32) -> Result<GrowthCertificate> {
    if l_max == 0 {
        return Err(Error::InvalidSize("L_max must be >= 1".into()));
    }
    let d = g.dim_hint() as i32;
    let mut c_d: f64 = 0.0;
    let mut counts = vec![0usize; l_max as usize + 1];
    for x in 0..g.len() {
        counts.iter_mut().for_each(|c| *c = 0);
        for &dist in g.distances_from(x)? {
            if dist <= l_max {
                counts[dist as usize] += 1;
            }
        }
        let mut cumulative = counts[0];
        for l in 1..=l_max {
            cumulative += counts[l as usize];
            c_d = c_d.max(cumulative as f64 / f64::from(l).powi(d));
        }
    }
    Ok(GrowthCertificate { c_d, probe_range: l_max, dim: g.dim_hint() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_grid3() -> FiniteGraph {
        build_box_graph(2, 3).unwrap()
    }

    #[test]
    fn interval_basics() {
        let g1 = build_interval_graph(1).unwrap();
        assert_eq!(g1.len(), 1);
        assert_eq!(g1.edge_count(), 0);

        let g3 = build_interval_graph(3).unwrap();
        assert!(g3.has_edge(0, 1) && g3.has_edge(1, 2) && !g3.has_edge(0, 2));
        assert_eq!(g3.edge_count(), 2);
        assert_eq!(g3.distance(0, 2).unwrap(), 2);

        let g7 = build_interval_graph(7).unwrap();
        assert_eq!(g7.distance(0, 6).unwrap(), 6);
        assert_eq!(g7.dim_hint(), 1);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(matches!(build_interval_graph(0), Err(Error::InvalidSize(_))));
        assert!(matches!(build_box_graph(0, 3), Err(Error::InvalidSize(_))));
        assert!(matches!(build_box_graph(3, usize::MAX), Err(Error::InvalidSize(_))));
        assert!(matches!(build_box_graph(40, 2), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn box_graphs() {
        let sq = build_box_graph(2, 2).unwrap();
        assert_eq!(sq.len(), 4);
        assert_eq!(sq.edge_count(), 4);

        let line = build_box_graph(1, 5).unwrap();
        let interval = build_interval_graph(5).unwrap();
        assert_eq!(line.to_json(), interval.to_json());

        let g = square_grid3();
        let center = g.box_index(&[1, 1]).unwrap();
        assert_eq!(center, 4);
        assert_eq!(g.box_coords(7).unwrap(), vec![1, 2]);
        assert_eq!(g.ball(center, 1).unwrap().len(), 5);
    }

    #[test]
    fn balls_on_interval() {
        let g = build_interval_graph(7).unwrap();
        assert_eq!(g.ball(3, 0).unwrap(), vec![3]);
        assert_eq!(g.ball(3, 2).unwrap(), vec![1, 2, 3, 4, 5]);
        assert!(matches!(g.ball(9, 1), Err(Error::UnknownVertex(9))));
    }

    #[test]
    fn boundary_examples() {
        let g = build_interval_graph(5).unwrap();
        let left = SubgraphView::new(&g, vec![0, 1, 2]).unwrap();
        let b = boundary(&g, &left).unwrap();
        assert_eq!(b.inner, vec![2]);
        assert_eq!(b.outer, vec![3]);
        assert_eq!(b.edges, vec![(2, 3)]);

        let mid = SubgraphView::new(&g, vec![1, 2, 3]).unwrap();
        let b = boundary(&g, &mid).unwrap();
        assert_eq!(b.inner, vec![1, 3]);
        assert_eq!(b.outer, vec![0, 4]);
        assert_eq!(b.edges.len(), 2);

        let all = SubgraphView::whole(&g);
        assert!(matches!(boundary(&g, &all), Err(Error::EmptyBoundary)));

        let grid = square_grid3();
        let cross = SubgraphView::ball(&grid, 4, 1).unwrap();
        assert_eq!(boundary(&grid, &cross).unwrap().edges.len(), 8);
    }

    #[test]
    fn disconnected_view_rejected() {
        let g = build_interval_graph(5).unwrap();
        assert!(matches!(SubgraphView::new(&g, vec![0, 2]), Err(Error::InvalidDomain(_))));
        assert!(matches!(SubgraphView::new(&g, vec![]), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn growth_constants() {
        let g = build_interval_graph(100).unwrap();
        let cert = ball_growth_constant(&g, 10).unwrap();
        assert_eq!(cert.c_d, 3.0);

        let single = build_interval_graph(1).unwrap();
        assert_eq!(ball_growth_constant(&single, 4).unwrap().c_d, 1.0);

        // Interior l1 balls in 2D hold 2L^2 + 2L + 1 points; the ratio peaks at L = 1.
        let g2 = build_box_graph(2, 21).unwrap();
        let cert2 = ball_growth_constant(&g2, 5).unwrap();
        let expected = (1..=5).map(|l| (2 * l * l + 2 * l + 1) as f64 / (l * l) as f64).fold(0.0, f64::max);
        assert_eq!(cert2.c_d, expected);
        assert_eq!(cert2.c_d, 5.0);
    }

    #[test]
    fn json_roundtrip_preserves_ids() {
        let json = GraphJson { vertices: vec![10, 20, 30], edges: vec![[0, 1], [1, 2]], dim_hint: 1 };
        let g = FiniteGraph::from_json(&json).unwrap();
        assert_eq!(g.id(2), 30);
        assert_eq!(g.to_json(), json);
        let bad = GraphJson { vertices: vec![1, 2, 3], edges: vec![[0, 1]], dim_hint: 1 };
        assert!(FiniteGraph::from_json(&bad).is_err());
        let looped = GraphJson { vertices: vec![1, 2], edges: vec![[0, 0], [0, 1]], dim_hint: 1 };
        assert!(FiniteGraph::from_json(&looped).is_err());
    }

    #[test]
    fn induced_subgraph_uses_intrinsic_metric() {
        // A 3x3 grid minus its center: the ring's intrinsic metric differs from the ambient one.
        let grid = square_grid3();
        let ring = SubgraphView::new(&grid, vec![0, 1, 2, 3, 5, 6, 7, 8]).unwrap();
        let sub = grid.induced(&ring);
        let p1 = ring.position(1).unwrap();
        let p7 = ring.position(7).unwrap();
        assert_eq!(grid.distance(1, 7).unwrap(), 2);
        assert_eq!(sub.distance(p1, p7).unwrap(), 4);
    }
}
