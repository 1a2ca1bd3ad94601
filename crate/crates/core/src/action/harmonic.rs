//! The μ-Laplacian `Δ_μ u(g) = u(g) − Σ_h u(gh) μ(h)` and pullbacks of
//! convex functions along equivariant maps.

use serde::{Deserialize, Serialize};

use super::{EquivariantMap, IsometricAction};
use crate::error::{domain, Result};
use crate::group::{Element, Group};
use crate::measure::Measure;
use crate::space::{BusemannDirection, Point, Space};

/// `Δ_μ u(g)`, summed as `Σ_h μ(h) (u(g) − u(gh))` so that nearby values
/// cancel before weighting.
pub fn mu_laplacian<F>(group: &Group, u: F, mu: &Measure, g: &Element) -> Result<f64>
where
    F: Fn(&Element) -> Result<f64>,
{
    if mu.group() != group {
        return domain("measure lives on a different group");
    }
    let ug = u(g)?;
    let mut acc = 0.0;
    for (h, w) in mu.iter_f64() {
        let gh = group.multiply(g, h)?;
        acc += w * (ug - u(&gh)?);
    }
    Ok(acc)
}

/// A geodesically convex function on the space of an action.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexFunction {
    /// `x ↦ b_ξ(x, o)` for a fixed reference point `o`; pullbacks only see differences.
    Busemann(BusemannDirection),
    DistanceTo(Point),
    SquaredDistanceTo(Point),
}

/// JSON form of a [`ConvexFunction`]; points are in the space's JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexFunctionDescriptor {
    Busemann { direction: BusemannDirection },
    DistanceTo { point: serde_json::Value },
    SquaredDistanceTo { point: serde_json::Value },
}

impl ConvexFunction {
    pub fn from_descriptor(desc: &ConvexFunctionDescriptor, space: &Space) -> Result<Self> {
        Ok(match desc {
            ConvexFunctionDescriptor::Busemann { direction } => {
                direction.check(space)?;
                ConvexFunction::Busemann(direction.clone())
            }
            ConvexFunctionDescriptor::DistanceTo { point } => ConvexFunction::DistanceTo(space.point_from_json(point)?),
            ConvexFunctionDescriptor::SquaredDistanceTo { point } => {
                ConvexFunction::SquaredDistanceTo(space.point_from_json(point)?)
            }
        })
    }

    pub fn to_descriptor(&self, space: &Space) -> ConvexFunctionDescriptor {
        match self {
            ConvexFunction::Busemann(direction) => ConvexFunctionDescriptor::Busemann {
                direction: direction.clone(),
            },
            ConvexFunction::DistanceTo(p) => ConvexFunctionDescriptor::DistanceTo {
                point: space.point_to_json(p),
            },
            ConvexFunction::SquaredDistanceTo(p) => ConvexFunctionDescriptor::SquaredDistanceTo {
                point: space.point_to_json(p),
            },
        }
    }

    /// `F(x) − F(y)`.
    pub fn difference(&self, space: &Space, x: &Point, y: &Point) -> Result<f64> {
        match self {
            ConvexFunction::Busemann(direction) => space.busemann_value(direction, x, y),
            ConvexFunction::DistanceTo(point) => Ok(space.distance(x, point)? - space.distance(y, point)?),
            ConvexFunction::SquaredDistanceTo(point) => {
                let a = space.distance(x, point)?;
                let b = space.distance(y, point)?;
                Ok(a * a - b * b)
            }
        }
    }
}

/// `φ(g) = F(f(g)) − F(f(e))`, so `φ(e) = 0`.
pub fn pullback<'a>(
    action: &'a IsometricAction,
    f: &'a EquivariantMap,
    func: &'a ConvexFunction,
) -> impl Fn(&Element) -> Result<f64> + 'a {
    move |g| {
        let fg = f.at(action, g)?;
        func.difference(action.space(), &fg, &f.basepoint)
    }
}

/// `φ(g) = b_ξ(f(g), f(e))`.
pub fn pullback_horofunction<'a>(
    action: &'a IsometricAction,
    f: &'a EquivariantMap,
    xi: &'a BusemannDirection,
) -> impl Fn(&Element) -> Result<f64> + 'a {
    move |g| {
        let fg = f.at(action, g)?;
        action.space().busemann_value(xi, &fg, &f.basepoint)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaplacianReport {
    pub samples: usize,
    pub max_laplacian: f64,
    pub max_abs_laplacian: f64,
    pub tol: f64,
    pub pass: bool,
}

fn laplacian_report(
    action: &IsometricAction,
    f: &EquivariantMap,
    func: &ConvexFunction,
    mu: &Measure,
    samples: &[Element],
    tol: f64,
    harmonic: bool,
) -> Result<LaplacianReport> {
    if samples.is_empty() {
        return domain("need at least one sample element");
    }
    action.space().check(&f.basepoint)?;
    let phi = pullback(action, f, func);
    let (mut max, mut max_abs) = (f64::NEG_INFINITY, 0.0f64);
    for g in samples {
        let v = mu_laplacian(action.group(), &phi, mu, g)?;
        max = max.max(v);
        max_abs = max_abs.max(v.abs());
    }
    let pass = if harmonic { max_abs <= tol } else { max <= tol };
    Ok(LaplacianReport {
        samples: samples.len(),
        max_laplacian: max,
        max_abs_laplacian: max_abs,
        tol,
        pass,
    })
}

/// Passes when `|Δ_μ φ| ≤ tol` on every sample.
pub fn check_mu_harmonic(
    action: &IsometricAction,
    f: &EquivariantMap,
    func: &ConvexFunction,
    mu: &Measure,
    samples: &[Element],
    tol: f64,
) -> Result<LaplacianReport> {
    laplacian_report(action, f, func, mu, samples, tol, true)
}

/// Passes when `Δ_μ φ ≤ tol` on every sample.
pub fn check_mu_subharmonic(
    action: &IsometricAction,
    f: &EquivariantMap,
    func: &ConvexFunction,
    mu: &Measure,
    samples: &[Element],
    tol: f64,
) -> Result<LaplacianReport> {
    laplacian_report(action, f, func, mu, samples, tol, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::examples;

    fn z(k: i64) -> Element {
        Element::Lattice(vec![k])
    }

    #[test]
    fn laplacian_of_polynomials_on_z() {
        let g = Group::Lattice { rank: 1 };
        let mu = Measure::uniform(&g, &[z(1), z(-1)], true).unwrap();
        let coord = |e: &Element| match e {
            Element::Lattice(v) => Ok(v[0] as f64),
            _ => unreachable!(),
        };
        for k in [-5, 0, 7] {
            assert_eq!(mu_laplacian(&g, |_| Ok(3.0), &mu, &z(k)).unwrap(), 0.0);
            assert_eq!(mu_laplacian(&g, coord, &mu, &z(k)).unwrap(), 0.0);
            let sq = |e: &Element| coord(e).map(|x| x * x);
            assert_eq!(mu_laplacian(&g, sq, &mu, &z(k)).unwrap(), -1.0);
        }
    }

    #[test]
    fn translation_pullback_is_linear() {
        let ex = examples::translation_line(0.5);
        let f = EquivariantMap::new(ex.start.clone());
        let xi = BusemannDirection::Euclidean { direction: vec![1.0] };
        let phi = pullback_horofunction(&ex.action, &f, &xi);
        assert_eq!(phi(&z(0)).unwrap(), 0.0);
        assert_eq!(phi(&z(6)).unwrap(), -3.0);
        let func = ConvexFunction::Busemann(xi.clone());
        let r = check_mu_harmonic(&ex.action, &f, &func, &ex.measure, &[z(-3), z(0), z(40)], 1e-12).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn convex_function_descriptor_round_trip() {
        let h = Space::HyperbolicPlane;
        let json = r#"{"kind": "distance_to", "point": [0.5, 2.0]}"#;
        let d: ConvexFunctionDescriptor = serde_json::from_str(json).unwrap();
        let f = ConvexFunction::from_descriptor(&d, &h).unwrap();
        assert_eq!(f, ConvexFunction::DistanceTo(Point::hyperbolic(0.5, 2.0)));
        assert_eq!(f.to_descriptor(&h), d);
    }
}
