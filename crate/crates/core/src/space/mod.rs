//! Model complete CAT(0) spaces: Euclidean spaces, metric trees, the
//! hyperbolic plane, finite ℓ²-products and rescaled views of any of these.
//!
//! Spaces and points are immutable values. A rescaled view shares its points
//! with the base space.

pub mod barycenter;
pub mod busemann;
pub mod circumcenter;
pub mod conformance;
pub mod degeneracy;
pub mod hyperbolic;
pub(crate) mod minimax;
pub mod tree;

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
pub use barycenter::WeightedPointSet;
pub use busemann::BusemannDirection;
pub use degeneracy::DegeneracyConfig;
pub use tree::{Edge, MetricTree, TreePoint};

#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Euclidean { dim: usize },
    Tree(Arc<MetricTree>),
    HyperbolicPlane,
    Product(Vec<Space>),
    Rescaled { base: Box<Space>, lambda: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Euclidean(Vec<f64>),
    Tree(TreePoint),
    Hyperbolic(Complex64),
    Product(Vec<Point>),
}

impl Point {
    pub fn hyperbolic(x: f64, y: f64) -> Self {
        Point::Hyperbolic(Complex64::new(x, y))
    }

    pub fn as_euclidean(&self) -> Option<&[f64]> {
        match self {
            Point::Euclidean(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_hyperbolic(&self) -> Option<Complex64> {
        match self {
            Point::Hyperbolic(z) => Some(*z),
            _ => None,
        }
    }
}

fn mismatch<T>(space: &Space, p: &Point) -> Result<T> {
    domain(format!("point {p:?} does not belong to {}", space.name()))
}

impl Space {
    pub fn euclidean(dim: usize) -> Self {
        Space::Euclidean { dim }
    }

    pub fn tree(tree: MetricTree) -> Self {
        Space::Tree(Arc::new(tree))
    }

    pub fn name(&self) -> String {
        match self {
            Space::Euclidean { dim } => format!("R^{dim}"),
            Space::Tree(t) => format!("tree({} vertices, {} edges)", t.vertex_count(), t.edges().len()),
            Space::HyperbolicPlane => "H^2".into(),
            Space::Product(fs) => fs.iter().map(|f| f.name()).collect::<Vec<_>>().join(" x "),
            Space::Rescaled { base, lambda } => format!("{lambda}·({})", base.name()),
        }
    }

    /// `(Y, λ d)`; nested rescalings collapse.
    pub fn rescale(&self, lambda: f64) -> Result<Space> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return domain(format!("rescaling factor must be positive, got {lambda}"));
        }
        Ok(match self {
            Space::Rescaled { base, lambda: l } => Space::Rescaled {
                base: base.clone(),
                lambda: l * lambda,
            },
            _ => Space::Rescaled {
                base: Box::new(self.clone()),
                lambda,
            },
        })
    }

    /// Base space and accumulated scale.
    pub fn unscaled(&self) -> (&Space, f64) {
        match self {
            Space::Rescaled { base, lambda } => (base, *lambda),
            _ => (self, 1.0),
        }
    }

    pub fn tree_ref(&self) -> Option<&MetricTree> {
        match self.unscaled().0 {
            Space::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean { dim }, Point::Euclidean(v)) => {
                if v.len() != *dim {
                    return domain(format!("expected {dim} coordinates, got {}", v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return domain("non-finite coordinate");
                }
                Ok(())
            }
            (Space::Tree(t), Point::Tree(q)) => t.check(q),
            (Space::HyperbolicPlane, Point::Hyperbolic(z)) => {
                if z.im > 0.0 && z.im.is_finite() && z.re.is_finite() {
                    Ok(())
                } else {
                    domain(format!("{z} is not in the upper half-plane"))
                }
            }
            (Space::Product(fs), Point::Product(ps)) if fs.len() == ps.len() => {
                fs.iter().zip(ps).try_for_each(|(f, p)| f.check(p))
            }
            (Space::Rescaled { base, .. }, p) => base.check(p),
            _ => mismatch(self, p),
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.dist(x, y))
    }

    /// Distance without validation; points must belong to the space.
    pub(crate) fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (Space::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => a
                .iter()
                .zip(b)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt(),
            (Space::Tree(t), Point::Tree(p), Point::Tree(q)) => t.distance(p, q),
            (Space::HyperbolicPlane, Point::Hyperbolic(z), Point::Hyperbolic(w)) => {
                hyperbolic::distance(*z, *w)
            }
            (Space::Product(fs), Point::Product(ps), Point::Product(qs)) => fs
                .iter()
                .zip(ps.iter().zip(qs))
                .map(|(f, (p, q))| {
                    let d = f.dist(p, q);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            (Space::Rescaled { base, lambda }, _, _) => lambda * base.dist(x, y),
            _ => f64::NAN,
        }
    }

    /// `d(x, y)²`, without the square root on Euclidean factors.
    pub(crate) fn dist_sq(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (Space::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
            }
            (Space::Product(fs), Point::Product(ps), Point::Product(qs)) => fs
                .iter()
                .zip(ps.iter().zip(qs))
                .map(|(f, (p, q))| f.dist_sq(p, q))
                .sum(),
            (Space::Rescaled { base, lambda }, _, _) => lambda * lambda * base.dist_sq(x, y),
            _ => {
                let d = self.dist(x, y);
                d * d
            }
        }
    }

    /// Constant-speed geodesic from `x` to `y` at time `t ∈ [0, 1]`.
    pub fn geodesic_point(&self, x: &Point, y: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("geodesic parameter {t} outside [0, 1]"));
        }
        self.check(x)?;
        self.check(y)?;
        Ok(self.geo(x, y, t))
    }

    pub(crate) fn geo(&self, x: &Point, y: &Point, t: f64) -> Point {
        if t == 0.0 {
            return x.clone();
        }
        if t == 1.0 {
            return y.clone();
        }
        match (self, x, y) {
            (Space::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                Point::Euclidean(a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect())
            }
            (Space::Tree(tr), Point::Tree(p), Point::Tree(q)) => {
                Point::Tree(tr.point_towards(p, q, t * tr.distance(p, q)))
            }
            (Space::HyperbolicPlane, Point::Hyperbolic(z), Point::Hyperbolic(w)) => {
                let v = hyperbolic::log(*z, *w);
                Point::Hyperbolic(hyperbolic::exp(*z, [t * v[0], t * v[1]]))
            }
            (Space::Product(fs), Point::Product(ps), Point::Product(qs)) => Point::Product(
                fs.iter()
                    .zip(ps.iter().zip(qs))
                    .map(|(f, (p, q))| f.geo(p, q, t))
                    .collect(),
            ),
            (Space::Rescaled { base, .. }, _, _) => base.geo(x, y, t),
            _ => x.clone(),
        }
    }

    /// Dimension of the exponential chart, if the space is a manifold.
    pub fn chart_dim(&self) -> Option<usize> {
        match self {
            Space::Euclidean { dim } => Some(*dim),
            Space::HyperbolicPlane => Some(2),
            Space::Product(fs) => fs.iter().map(|f| f.chart_dim()).sum(),
            Space::Rescaled { base, .. } => base.chart_dim(),
            Space::Tree(_) => None,
        }
    }

    /// `exp_x(v)` with `v` in an orthonormal frame at `x`.
    pub(crate) fn exp(&self, x: &Point, v: &[f64]) -> Result<Point> {
        Ok(match (self, x) {
            (Space::Euclidean { .. }, Point::Euclidean(a)) => {
                Point::Euclidean(a.iter().zip(v).map(|(p, d)| p + d).collect())
            }
            (Space::HyperbolicPlane, Point::Hyperbolic(z)) => {
                Point::Hyperbolic(hyperbolic::exp(*z, [v[0], v[1]]))
            }
            (Space::Product(fs), Point::Product(ps)) => {
                let mut out = Vec::with_capacity(fs.len());
                let mut at = 0;
                for (f, p) in fs.iter().zip(ps) {
                    let k = f.chart_dim().ok_or_else(no_chart)?;
                    out.push(f.exp(p, &v[at..at + k])?);
                    at += k;
                }
                Point::Product(out)
            }
            (Space::Rescaled { base, lambda }, _) => {
                let w: Vec<f64> = v.iter().map(|c| c / lambda).collect();
                base.exp(x, &w)?
            }
            _ => return Err(no_chart()),
        })
    }

    /// `log_x(y)`, a vector of norm `d(x, y)` in an orthonormal frame at `x`.
    pub(crate) fn log(&self, x: &Point, y: &Point) -> Result<Vec<f64>> {
        Ok(match (self, x, y) {
            (Space::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                a.iter().zip(b).map(|(p, q)| q - p).collect()
            }
            (Space::HyperbolicPlane, Point::Hyperbolic(z), Point::Hyperbolic(w)) => {
                hyperbolic::log(*z, *w).to_vec()
            }
            (Space::Product(fs), Point::Product(ps), Point::Product(qs)) => {
                let mut out = Vec::new();
                for (f, (p, q)) in fs.iter().zip(ps.iter().zip(qs)) {
                    out.extend(f.log(p, q)?);
                }
                out
            }
            (Space::Rescaled { base, lambda }, _, _) => {
                base.log(x, y)?.into_iter().map(|c| c * lambda).collect()
            }
            _ => return Err(no_chart()),
        })
    }

    /// A random point; `scale` bounds Euclidean coordinates, ray offsets and
    /// the hyperbolic log-height.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Point {
        match self {
            Space::Euclidean { dim } => {
                Point::Euclidean((0..*dim).map(|_| rng.gen_range(-scale..=scale)).collect())
            }
            Space::Tree(t) => {
                let e = rng.gen_range(0..t.edges().len());
                let len = t.search_length(e, scale);
                Point::Tree(t.canonical(e, rng.gen_range(0.0..=len)))
            }
            Space::HyperbolicPlane => Point::hyperbolic(
                rng.gen_range(-scale..=scale),
                rng.gen_range(-scale..=scale).exp(),
            ),
            Space::Product(fs) => Point::Product(fs.iter().map(|f| f.sample_point(rng, scale)).collect()),
            Space::Rescaled { base, .. } => base.sample_point(rng, scale),
        }
    }

    /// Barycenter; see [`barycenter::barycenter`].
    pub fn barycenter(&self, ws: &WeightedPointSet, tol: f64) -> Result<Point> {
        barycenter::barycenter(self, ws, tol)
    }

    /// Circumcenter and radius; see [`circumcenter::circumcenter`].
    pub fn circumcenter(&self, points: &[Point], tol: f64) -> Result<(Point, f64)> {
        circumcenter::circumcenter(self, points, tol)
    }

    pub fn busemann_value(&self, xi: &BusemannDirection, x: &Point, y: &Point) -> Result<f64> {
        busemann::busemann_value(self, xi, x, y)
    }

    pub fn simplex_is_degenerate(&self, points: &[Point], cfg: &DegeneracyConfig) -> Result<bool> {
        degeneracy::simplex_is_degenerate(self, points, cfg)
    }

    /// Space from its JSON descriptor.
    pub fn from_descriptor(desc: &SpaceDescriptor) -> Result<Space> {
        let schema = |e: Error| match e {
            Error::Domain(m) => Error::Schema(m),
            other => other,
        };
        Ok(match desc {
            SpaceDescriptor::Euclidean { dim } => {
                if *dim == 0 {
                    return Err(Error::Schema("Euclidean dimension must be positive".into()));
                }
                Space::Euclidean { dim: *dim }
            }
            SpaceDescriptor::Tree { vertices, edges } => {
                let edges = edges
                    .iter()
                    .map(|e| Edge {
                        from: e.from,
                        to: e.to,
                        length: if e.to.is_none() {
                            f64::INFINITY
                        } else {
                            e.length.unwrap_or(1.0)
                        },
                    })
                    .collect();
                Space::tree(MetricTree::new(*vertices, edges).map_err(schema)?)
            }
            SpaceDescriptor::Star { legs, leg_length } => {
                Space::tree(MetricTree::star(*legs, *leg_length).map_err(schema)?)
            }
            SpaceDescriptor::RootedBinaryTree { depth, edge_length } => {
                Space::tree(MetricTree::rooted_binary(*depth, *edge_length).map_err(schema)?)
            }
            SpaceDescriptor::HyperbolicPlane => Space::HyperbolicPlane,
            SpaceDescriptor::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Schema("product needs at least one factor".into()));
                }
                Space::Product(factors.iter().map(Space::from_descriptor).collect::<Result<_>>()?)
            }
            SpaceDescriptor::Rescaled { base, lambda } => {
                Space::from_descriptor(base)?.rescale(*lambda).map_err(schema)?
            }
        })
    }

    /// Point from JSON: an array for Euclidean space, `[x, y]` for the
    /// hyperbolic plane, `{"edge", "offset"}` or `{"vertex"}` for trees, and an
    /// array of factor points for products.
    pub fn point_from_json(&self, v: &serde_json::Value) -> Result<Point> {
        use serde_json::Value;
        let num = |x: &Value| {
            x.as_f64()
                .ok_or_else(|| Error::Schema(format!("expected a number, got {x}")))
        };
        let p = match (self, v) {
            (Space::Rescaled { base, .. }, _) => return base.point_from_json(v),
            (Space::Euclidean { .. }, Value::Array(xs)) => {
                Point::Euclidean(xs.iter().map(num).collect::<Result<_>>()?)
            }
            (Space::HyperbolicPlane, Value::Array(xs)) if xs.len() == 2 => {
                Point::hyperbolic(num(&xs[0])?, num(&xs[1])?)
            }
            (Space::Tree(t), Value::Object(map)) => {
                if let Some(vx) = map.get("vertex") {
                    let vx = vx
                        .as_u64()
                        .ok_or_else(|| Error::Schema("vertex must be an index".into()))?;
                    Point::Tree(t.vertex(vx as usize).map_err(|e| Error::Schema(e.to_string()))?)
                } else {
                    let edge = map
                        .get("edge")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| Error::Schema("tree point needs \"edge\"".into()))?
                        as usize;
                    let offset = num(map.get("offset").unwrap_or(&Value::from(0.0)))?;
                    if edge >= t.edges().len() {
                        return Err(Error::Schema(format!("edge {edge} out of range")));
                    }
                    let p = TreePoint { edge, offset };
                    t.check(&p).map_err(|e| Error::Schema(e.to_string()))?;
                    Point::Tree(t.canonical(edge, offset))
                }
            }
            (Space::Product(fs), Value::Array(xs)) if xs.len() == fs.len() => Point::Product(
                fs.iter()
                    .zip(xs)
                    .map(|(f, x)| f.point_from_json(x))
                    .collect::<Result<_>>()?,
            ),
            _ => {
                return Err(Error::Schema(format!(
                    "cannot read a point of {} from {v}",
                    self.name()
                )))
            }
        };
        self.check(&p).map_err(|e| Error::Schema(e.to_string()))?;
        Ok(p)
    }

    pub fn point_to_json(&self, p: &Point) -> serde_json::Value {
        match p {
            Point::Euclidean(v) => serde_json::json!(v),
            Point::Hyperbolic(z) => serde_json::json!([z.re, z.im]),
            Point::Tree(q) => match self.tree_ref().and_then(|t| t.vertex_of(q)) {
                Some(v) => serde_json::json!({"edge": q.edge, "offset": q.offset, "vertex": v}),
                None => serde_json::json!({"edge": q.edge, "offset": q.offset}),
            },
            Point::Product(ps) => {
                let fs: Vec<&Space> = match self.unscaled().0 {
                    Space::Product(fs) => fs.iter().collect(),
                    _ => vec![self; ps.len()],
                };
                serde_json::Value::Array(
                    fs.iter().zip(ps).map(|(f, q)| f.point_to_json(q)).collect(),
                )
            }
        }
    }
}

fn no_chart() -> Error {
    Error::Unsupported("exponential charts exist only for Riemannian factors".into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEdgeDescriptor {
    pub from: usize,
    /// Omitted or null for a ray.
    #[serde(default)]
    pub to: Option<usize>,
    #[serde(default)]
    pub length: Option<f64>,
}

/// JSON space descriptor, tagged by `"kind"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDescriptor {
    Euclidean {
        dim: usize,
    },
    Tree {
        vertices: usize,
        edges: Vec<TreeEdgeDescriptor>,
    },
    Star {
        legs: usize,
        #[serde(default = "one")]
        leg_length: f64,
    },
    RootedBinaryTree {
        depth: usize,
        #[serde(default = "one")]
        edge_length: f64,
    },
    HyperbolicPlane,
    Product {
        factors: Vec<SpaceDescriptor>,
    },
    Rescaled {
        base: Box<SpaceDescriptor>,
        lambda: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_distances() {
        let h = Space::HyperbolicPlane;
        let d = h
            .distance(&Point::hyperbolic(0.0, 1.0), &Point::hyperbolic(1.0, 1.0))
            .unwrap();
        assert!((d - 0.962_423_650_119_206_9).abs() < 1e-12);
        let t = Space::tree(MetricTree::path(&[2.0]).unwrap());
        let tr = t.tree_ref().unwrap();
        let a = Point::Tree(tr.vertex(0).unwrap());
        let b = Point::Tree(tr.vertex(1).unwrap());
        assert_eq!(t.distance(&a, &b).unwrap(), 2.0);
        let rr = Space::Product(vec![Space::euclidean(1), Space::euclidean(1)]);
        let p = Point::Product(vec![Point::Euclidean(vec![0.0]), Point::Euclidean(vec![0.0])]);
        let q = Point::Product(vec![Point::Euclidean(vec![3.0]), Point::Euclidean(vec![4.0])]);
        assert_eq!(rr.distance(&p, &q).unwrap(), 5.0);
    }

    #[test]
    fn mixed_points_rejected() {
        let e = Space::euclidean(2);
        assert!(e.distance(&Point::Euclidean(vec![0.0, 0.0]), &Point::hyperbolic(0.0, 1.0)).is_err());
        assert!(e.distance(&Point::Euclidean(vec![0.0]), &Point::Euclidean(vec![0.0, 1.0])).is_err());
        assert!(Space::HyperbolicPlane.check(&Point::hyperbolic(0.0, -1.0)).is_err());
    }

    #[test]
    fn geodesic_endpoints_and_midpoints() {
        let e = Space::euclidean(2);
        let x = Point::Euclidean(vec![0.0, 0.0]);
        let y = Point::Euclidean(vec![2.0, 4.0]);
        assert_eq!(e.geodesic_point(&x, &y, 0.0).unwrap(), x);
        assert_eq!(e.geodesic_point(&x, &y, 1.0).unwrap(), y);
        assert_eq!(e.geodesic_point(&x, &y, 0.5).unwrap(), Point::Euclidean(vec![1.0, 2.0]));
        assert!(e.geodesic_point(&x, &y, 1.5).is_err());
        let h = Space::HyperbolicPlane;
        let m = h
            .geodesic_point(&Point::hyperbolic(0.0, 1.0), &Point::hyperbolic(0.0, 4.0), 0.5)
            .unwrap();
        assert!((m.as_hyperbolic().unwrap() - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn rescaling() {
        let h = Space::HyperbolicPlane;
        let r = h.rescale(2.0).unwrap();
        let x = Point::hyperbolic(0.0, 1.0);
        let y = Point::hyperbolic(1.0, 2.0);
        assert_eq!(r.distance(&x, &y).unwrap(), 2.0 * h.distance(&x, &y).unwrap());
        assert_eq!(h.rescale(1.0).unwrap().distance(&x, &y).unwrap(), h.distance(&x, &y).unwrap());
        assert!(h.rescale(0.0).is_err());
        let rr = r.rescale(0.25).unwrap();
        assert_eq!(rr.unscaled().1, 0.5);
        let v = r.log(&x, &y).unwrap();
        let back = r.exp(&x, &v).unwrap();
        assert!((back.as_hyperbolic().unwrap() - y.as_hyperbolic().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn descriptors() {
        let desc: SpaceDescriptor = serde_json::from_value(serde_json::json!({
            "kind": "product",
            "factors": [{"kind": "hyperbolic_plane"}, {"kind": "star", "legs": 3}]
        }))
        .unwrap();
        let s = Space::from_descriptor(&desc).unwrap();
        let p = s
            .point_from_json(&serde_json::json!([[0.5, 2.0], {"vertex": 2}]))
            .unwrap();
        let back = s.point_from_json(&s.point_to_json(&p)).unwrap();
        assert_eq!(p, back);
        let bad: std::result::Result<SpaceDescriptor, _> =
            serde_json::from_value(serde_json::json!({"kind": "euclidean", "dim": 2, "x": 1}));
        assert!(bad.is_err());
        assert!(s.point_from_json(&serde_json::json!([[0.5, -2.0], {"vertex": 2}])).is_err());
    }
}
