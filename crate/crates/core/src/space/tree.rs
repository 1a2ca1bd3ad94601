//! Metric trees: finitely many vertices joined by finite edges, plus optional
//! rays (edges with one endpoint and infinite length).
//!
//! A point is `(edge, offset)`, the offset measured from the edge's `from`
//! vertex. Points at vertices are canonical: they sit on the smallest-index
//! incident edge, so equal points compare equal.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    /// `None` for a ray.
    pub to: Option<usize>,
    pub length: f64,
}

impl Edge {
    pub fn is_ray(&self) -> bool {
        self.to.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricTree {
    vertices: usize,
    edges: Vec<Edge>,
    /// All-pairs vertex distances.
    dist: Vec<Vec<f64>>,
    /// `hop[u][v]`: first edge and next vertex on the path from `u` to `v`.
    hop: Vec<Vec<Option<(usize, usize)>>>,
    /// Smallest incident edge of each vertex.
    anchor: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TreePoint {
    pub edge: usize,
    pub offset: f64,
}

impl MetricTree {
    /// Validates that the finite edges form a tree on `vertices` vertices with
    /// positive lengths; rays attach to existing vertices.
    pub fn new(vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertices == 0 {
            return domain("a tree needs at least one vertex");
        }
        let finite: Vec<&Edge> = edges.iter().filter(|e| !e.is_ray()).collect();
        if finite.len() + 1 != vertices {
            return domain(format!(
                "{} finite edges cannot form a tree on {vertices} vertices",
                finite.len()
            ));
        }
        let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); vertices];
        for (i, e) in edges.iter().enumerate() {
            if e.from >= vertices {
                return domain(format!("edge {i} starts at unknown vertex {}", e.from));
            }
            match e.to {
                Some(t) => {
                    if t >= vertices || t == e.from {
                        return domain(format!("edge {i} has invalid endpoint {t}"));
                    }
                    if !(e.length.is_finite() && e.length > 0.0) {
                        return domain(format!("edge {i} needs a positive finite length"));
                    }
                    adj[e.from].push((t, i, e.length));
                    adj[t].push((e.from, i, e.length));
                }
                None => {
                    if e.length != f64::INFINITY {
                        return domain(format!("ray {i} must have infinite length"));
                    }
                }
            }
        }
        if vertices > 1 && edges.is_empty() {
            return domain("tree has no edges");
        }
        if edges.is_empty() {
            return domain("a tree needs at least one edge or ray");
        }
        let mut dist = vec![vec![f64::INFINITY; vertices]; vertices];
        let mut hop = vec![vec![None; vertices]; vertices];
        for s in 0..vertices {
            dist[s][s] = 0.0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, e, l) in &adj[u] {
                    if dist[s][v].is_infinite() {
                        dist[s][v] = dist[s][u] + l;
                        hop[s][v] = Some(if u == s { (e, v) } else { hop[s][u].expect("reached") });
                        queue.push_back(v);
                    }
                }
            }
            if dist[s].iter().any(|d| d.is_infinite()) {
                return domain("tree edges do not connect all vertices");
            }
        }
        let mut anchor = vec![usize::MAX; vertices];
        for (i, e) in edges.iter().enumerate() {
            for v in [Some(e.from), e.to].into_iter().flatten() {
                anchor[v] = anchor[v].min(i);
            }
        }
        if anchor.iter().any(|&a| a == usize::MAX) {
            return domain("isolated vertex");
        }
        Ok(Self {
            vertices,
            edges,
            dist,
            hop,
            anchor,
        })
    }

    /// Star with `legs` edges of equal length; center 0, leaf `i` is vertex `i`,
    /// edge `i - 1` joins them.
    pub fn star(legs: usize, leg_length: f64) -> Result<Self> {
        let edges = (1..=legs)
            .map(|i| Edge {
                from: 0,
                to: Some(i),
                length: leg_length,
            })
            .collect();
        Self::new(legs + 1, edges)
    }

    /// Path `0 - 1 - ... - n` with the given edge lengths.
    pub fn path(lengths: &[f64]) -> Result<Self> {
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| Edge {
                from: i,
                to: Some(i + 1),
                length: l,
            })
            .collect();
        Self::new(lengths.len() + 1, edges)
    }

    /// Rooted binary tree of the given depth. The vertex for the binary string
    /// `w` of length `ℓ` (root first) has index `2^ℓ - 1 + value(w)`; edge
    /// `i` joins vertex `i + 1` to its parent.
    pub fn rooted_binary(depth: usize, edge_length: f64) -> Result<Self> {
        if depth == 0 || depth > 20 {
            return domain("rooted binary tree depth must be in 1..=20");
        }
        let n = (1usize << (depth + 1)) - 1;
        let edges = (1..n)
            .map(|k| Edge {
                from: (k - 1) / 2,
                to: Some(k),
                length: edge_length,
            })
            .collect();
        Self::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        self.dist[u][v]
    }

    pub fn vertex(&self, v: usize) -> Result<TreePoint> {
        if v >= self.vertices {
            return domain(format!("vertex {v} out of range"));
        }
        let e = &self.edges[self.anchor[v]];
        Ok(TreePoint {
            edge: self.anchor[v],
            offset: if e.from == v { 0.0 } else { e.length },
        })
    }

    /// The vertex a point sits on, if any.
    pub fn vertex_of(&self, p: &TreePoint) -> Option<usize> {
        let e = &self.edges[p.edge];
        if p.offset == 0.0 {
            Some(e.from)
        } else if p.offset == e.length {
            e.to
        } else {
            None
        }
    }

    pub fn check(&self, p: &TreePoint) -> Result<()> {
        let e = self.edges.get(p.edge).ok_or_else(|| {
            Error::Domain(format!("edge {} out of range", p.edge))
        })?;
        if !(p.offset >= 0.0 && p.offset <= e.length && p.offset.is_finite()) {
            return domain(format!(
                "offset {} outside edge {} of length {}",
                p.offset, p.edge, e.length
            ));
        }
        Ok(())
    }

    /// Clamps the offset into its edge and moves vertex points to their anchor.
    pub fn canonical(&self, edge: usize, offset: f64) -> TreePoint {
        let e = &self.edges[edge];
        let offset = offset.clamp(0.0, e.length);
        if offset == 0.0 {
            return self.vertex(e.from).expect("valid vertex");
        }
        if offset == e.length {
            if let Some(t) = e.to {
                return self.vertex(t).expect("valid vertex");
            }
        }
        TreePoint { edge, offset }
    }

    /// `(vertex, distance from p)` for the endpoints of p's edge.
    fn exits(&self, p: &TreePoint) -> [(usize, f64); 2] {
        let e = &self.edges[p.edge];
        let back = (e.from, p.offset);
        match e.to {
            Some(t) => [back, (t, e.length - p.offset)],
            None => [back, back],
        }
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        if p.edge == q.edge {
            return (p.offset - q.offset).abs();
        }
        let mut best = f64::INFINITY;
        for (u, du) in self.exits(p) {
            for (v, dv) in self.exits(q) {
                best = best.min(du + self.dist[u][v] + dv);
            }
        }
        best
    }

    /// Distance from `p` to vertex `v`.
    pub fn distance_to_vertex(&self, p: &TreePoint, v: usize) -> f64 {
        self.exits(p)
            .iter()
            .map(|&(u, du)| du + self.dist[u][v])
            .fold(f64::INFINITY, f64::min)
    }

    /// Point at arclength `s` from `p` towards `q`, `0 ≤ s ≤ d(p, q)`.
    pub fn point_towards(&self, p: &TreePoint, q: &TreePoint, s: f64) -> TreePoint {
        if p.edge == q.edge {
            let dir = if q.offset >= p.offset { 1.0 } else { -1.0 };
            let s = s.min((q.offset - p.offset).abs());
            return self.canonical(p.edge, p.offset + dir * s);
        }
        let mut best = (f64::INFINITY, 0, 0.0, 0, 0.0);
        for (u, du) in self.exits(p) {
            for (v, dv) in self.exits(q) {
                let total = du + self.dist[u][v] + dv;
                if total < best.0 {
                    best = (total, u, du, v, dv);
                }
            }
        }
        let (_, u, du, v, dv) = best;
        let pe = &self.edges[p.edge];
        if s <= du {
            let dir = if u == pe.from { -1.0 } else { 1.0 };
            return self.canonical(p.edge, p.offset + dir * s);
        }
        let mut rest = s - du;
        let mut w = u;
        while w != v {
            let (e, next) = self.hop[w][v].expect("connected");
            let edge = &self.edges[e];
            if rest <= edge.length {
                let offset = if edge.from == w { rest } else { edge.length - rest };
                return self.canonical(e, offset);
            }
            rest -= edge.length;
            w = next;
        }
        let qe = &self.edges[q.edge];
        let rest = rest.min(dv);
        let offset = if v == qe.from { rest } else { qe.length - rest };
        self.canonical(q.edge, offset)
    }

    /// Signed position of `x` along `edge` as seen from `from`: the offset if
    /// `x` is on the edge, otherwise `-d(x, from)` or `len + d(x, to)`.
    /// Along the edge `d(x, (edge, s)) = |s - c|`.
    pub fn edge_coordinate(&self, edge: usize, x: &TreePoint) -> f64 {
        let e = &self.edges[edge];
        if x.edge == edge {
            return x.offset;
        }
        let du = self.distance_to_vertex(x, e.from);
        match e.to {
            None => -du,
            Some(t) => {
                let dv = self.distance_to_vertex(x, t);
                if du <= dv {
                    -du
                } else {
                    e.length + dv
                }
            }
        }
    }

    /// Upper limit for searches along an edge; rays are cut at `ray_cap`.
    pub fn search_length(&self, edge: usize, ray_cap: f64) -> f64 {
        let l = self.edges[edge].length;
        if l.is_finite() {
            l
        } else {
            ray_cap
        }
    }

    /// Argmin over the tree of `Σ α_i d(x_i, y)²`; exact per edge.
    pub fn barycenter(&self, points: &[TreePoint], weights: &[f64]) -> TreePoint {
        self.per_edge_best(points, |cs| {
            let s: f64 = cs.iter().zip(weights).map(|(c, a)| a * c).sum();
            s
        }, |cs, s| cs.iter().zip(weights).map(|(c, a)| a * (s - c) * (s - c)).sum())
    }

    /// Argmin over the tree of `max_i d(x_i, y)` and the minimax value; exact per edge.
    pub fn circumcenter(&self, points: &[TreePoint]) -> (TreePoint, f64) {
        let c = self.per_edge_best(
            points,
            |cs| {
                let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                0.5 * (lo + hi)
            },
            |cs, s| cs.iter().map(|c| (s - c).abs()).fold(0.0, f64::max),
        );
        let r = points.iter().map(|x| self.distance(&c, x)).fold(0.0, f64::max);
        (c, r)
    }

    /// Minimizes a convex function of the edge coordinates: `argmin` proposes
    /// the unconstrained minimizer along an edge, which is then clamped.
    fn per_edge_best(
        &self,
        points: &[TreePoint],
        argmin: impl Fn(&[f64]) -> f64,
        value: impl Fn(&[f64], f64) -> f64,
    ) -> TreePoint {
        let mut best: Option<(f64, TreePoint)> = None;
        let mut cs = vec![0.0; points.len()];
        for edge in 0..self.edges.len() {
            for (c, x) in cs.iter_mut().zip(points) {
                *c = self.edge_coordinate(edge, x);
            }
            let s = argmin(&cs).clamp(0.0, self.edges[edge].length);
            let v = value(&cs, s);
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, self.canonical(edge, s)));
            }
        }
        best.expect("tree has edges").1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod() -> MetricTree {
        MetricTree::star(3, 1.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(MetricTree::new(3, vec![Edge { from: 0, to: Some(1), length: 1.0 }]).is_err());
        assert!(MetricTree::new(2, vec![Edge { from: 0, to: Some(1), length: 0.0 }]).is_err());
        assert!(MetricTree::new(
            3,
            vec![
                Edge { from: 0, to: Some(1), length: 1.0 },
                Edge { from: 1, to: Some(0), length: 1.0 }
            ]
        )
        .is_err());
        let ray = MetricTree::new(1, vec![Edge { from: 0, to: None, length: f64::INFINITY }]).unwrap();
        let p = TreePoint { edge: 0, offset: 5.0 };
        assert_eq!(ray.distance(&p, &ray.vertex(0).unwrap()), 5.0);
    }

    #[test]
    fn distances_and_geodesics() {
        let t = tripod();
        let leaf = |i| t.vertex(i).unwrap();
        assert_eq!(t.distance(&leaf(1), &leaf(2)), 2.0);
        let mid = t.point_towards(&leaf(1), &leaf(2), 1.0);
        assert_eq!(mid, leaf(0));
        let q = t.point_towards(&leaf(1), &leaf(3), 1.5);
        assert_eq!(q, TreePoint { edge: 2, offset: 0.5 });
        assert!((t.distance(&q, &leaf(3)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vertex_points_are_canonical() {
        let t = MetricTree::path(&[1.0, 2.0]).unwrap();
        assert_eq!(t.canonical(1, 0.0), t.canonical(0, 1.0));
        assert_eq!(t.vertex_of(&t.canonical(1, 2.0)), Some(2));
    }

    #[test]
    fn tripod_centers() {
        let t = tripod();
        let leaves: Vec<_> = (1..=3).map(|i| t.vertex(i).unwrap()).collect();
        let b = t.barycenter(&leaves, &[1.0 / 3.0; 3]);
        assert_eq!(b, t.vertex(0).unwrap());
        let (c, r) = t.circumcenter(&leaves);
        assert_eq!(c, t.vertex(0).unwrap());
        assert_eq!(r, 1.0);
    }

    #[test]
    fn binary_tree_layout() {
        let t = MetricTree::rooted_binary(2, 1.0).unwrap();
        assert_eq!(t.vertex_count(), 7);
        // vertex "10" has index 2^2 - 1 + 2 = 5, child of "1" = index 2
        assert_eq!(t.vertex_distance(5, 2), 1.0);
        assert_eq!(t.vertex_distance(5, 3), 4.0);
    }
}
