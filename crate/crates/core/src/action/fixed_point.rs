//! Fixed-point pipeline: energy descent, then the circumcenter of a finite
//! orbit of the best iterate.

use serde::Serialize;

use super::energy::{minimize_energy, EnergyOptions, EnergyRun, EnergyStatus, EscapeDiagnosis};
use super::IsometricAction;
use crate::error::{domain, Result};
use crate::group::{ball, Element, GeneratingSet, Group, Limits};
use crate::measure::Measure;
use crate::space::Point;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointOptions {
    /// A point counts as fixed when `δ < tol`.
    pub tol: f64,
    pub energy: EnergyOptions,
    /// Word radius of the orbit sample for infinite groups.
    pub orbit_radius: usize,
    /// Orbit samples wider than this are treated as unbounded.
    pub orbit_diameter_cap: f64,
    pub circumcenter_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            energy: EnergyOptions::default(),
            orbit_radius: 4,
            orbit_diameter_cap: 1e6,
            circumcenter_tol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    Energy,
    Circumcenter,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointFailure {
    /// Smallest displacement over every evaluated point.
    pub delta_infimum: f64,
    /// Smallest energy along the descent.
    pub energy_infimum: f64,
    pub status: EnergyStatus,
    pub escape: Option<EscapeDiagnosis>,
    pub orbit_diameter: f64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum FixedPointResult {
    Found {
        point: Point,
        displacement: f64,
        method: FixedPointMethod,
        run: EnergyRun,
        notes: Vec<String>,
    },
    Failure {
        failure: FixedPointFailure,
        run: EnergyRun,
    },
}

/// Elements whose orbit is sampled: all of a finite group, otherwise a word ball.
fn orbit_elements(group: &Group, gens: &GeneratingSet, radius: usize) -> Result<Vec<Element>> {
    Ok(match group {
        Group::Cyclic { order } if *order <= 10_000 => (0..*order).map(Element::Cyclic).collect(),
        Group::Dihedral { order } if *order <= 5_000 => (0..*order)
            .flat_map(|rot| [false, true].map(|flip| Element::Dihedral { flip, rot }))
            .collect(),
        _ => ball(group, gens, radius, &Limits::default(), None)?.elements.into_keys().collect(),
    })
}

/// Energy descent from `start`; if it does not end at a fixed point, the
/// circumcenter of the orbit sample of the final iterate is tried. The
/// circumcenter is always tried and wins whenever its displacement is no
/// larger, which makes the answer exact on trees.
pub fn fixed_point_search(
    action: &IsometricAction,
    mu: &Measure,
    gens: &GeneratingSet,
    start: &Point,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult> {
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let space = action.space();
    let eopts = EnergyOptions {
        record_trace: true,
        ..opts.energy.clone()
    };
    let run = minimize_energy(action, mu, start, gens, &eopts)?;
    let mut notes = Vec::new();
    let mut delta_inf = f64::INFINITY;
    for p in &run.trace {
        delta_inf = delta_inf.min(action.displacement(p, gens)?);
    }
    let energy_inf = run.energies.iter().copied().fold(f64::INFINITY, f64::min);

    let x = &run.map.basepoint;
    let mut best: Option<(Point, f64, FixedPointMethod)> = None;
    if run.status == EnergyStatus::Converged && run.report.energy < opts.tol * opts.tol {
        best = Some((x.clone(), run.report.displacement, FixedPointMethod::Energy));
    }

    let elements = orbit_elements(action.group(), gens, opts.orbit_radius)?;
    let iso: Vec<_> = elements.iter().map(|g| action.isometry(g)).collect::<Result<_>>()?;
    let orbit: Vec<Point> = iso.iter().map(|g| g.apply(space, x)).collect();
    let diameter = orbit
        .iter()
        .map(|p| space.dist(x, p))
        .fold(0.0, f64::max)
        * 2.0;
    if diameter <= opts.orbit_diameter_cap {
        match space.circumcenter(&orbit, opts.circumcenter_tol) {
            Ok((c, _)) => {
                let d = action.displacement(&c, gens)?;
                delta_inf = delta_inf.min(d);
                let better = best.as_ref().is_none_or(|(_, bd, _)| d <= *bd);
                if d < opts.tol && better {
                    best = Some((c, d, FixedPointMethod::Circumcenter));
                }
            }
            Err(e) => notes.push(format!("orbit circumcenter failed: {e}")),
        }
    } else {
        notes.push(format!("orbit sample diameter bound {diameter} exceeds the cap"));
    }

    Ok(match best {
        Some((point, displacement, method)) => FixedPointResult::Found {
            point,
            displacement,
            method,
            run,
            notes,
        },
        None => FixedPointResult::Failure {
            failure: FixedPointFailure {
                delta_infimum: delta_inf,
                energy_infimum: energy_inf,
                status: run.status,
                escape: run.escape.clone(),
                orbit_diameter: diameter,
                notes,
            },
            run,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::examples;

    #[test]
    fn star_center_is_exact() {
        let ex = examples::star_rotation(4);
        let r = fixed_point_search(&ex.action, &ex.measure, &ex.generators, &ex.start, &FixedPointOptions::default())
            .unwrap();
        let FixedPointResult::Found { point, displacement, .. } = r else {
            panic!("no fixed point")
        };
        assert_eq!(displacement, 0.0);
        let t = ex.action.space().tree_ref().unwrap();
        assert_eq!(point, Point::Tree(t.vertex(0).unwrap()));
    }

    #[test]
    fn translation_fails_with_exact_displacement() {
        let ex = examples::translation_line(0.75);
        let r = fixed_point_search(&ex.action, &ex.measure, &ex.generators, &ex.start, &FixedPointOptions::default())
            .unwrap();
        let FixedPointResult::Failure { failure, .. } = r else {
            panic!("translation has no fixed point")
        };
        assert_eq!(failure.delta_infimum, 0.75);
    }

    #[test]
    fn dihedral_plane_origin() {
        let ex = examples::dihedral_plane(5);
        let r = fixed_point_search(&ex.action, &ex.measure, &ex.generators, &ex.start, &FixedPointOptions::default())
            .unwrap();
        let FixedPointResult::Found { point, .. } = r else {
            panic!("no fixed point")
        };
        let p = point.as_euclidean().unwrap().to_vec();
        assert!(p[0].hypot(p[1]) < 1e-6);
    }
}
