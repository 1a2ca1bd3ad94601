//! Energy of equivariant maps and the damped orbit-barycenter iteration.

use serde::Serialize;

use super::{EquivariantMap, IsometricAction};
use crate::error::{domain, Result};
use crate::group::GeneratingSet;
use crate::measure::Measure;
use crate::space::{Point, Space, WeightedPointSet};

/// `E(f) = Σ_g μ(g) d(f(e), f(g))²` at one basepoint, with the lower bound
/// `δ(f(e))² · min_{s ∈ S} μ(s)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    #[serde(skip)]
    pub basepoint: Point,
    pub displacement: f64,
    pub lower_bound: f64,
    /// Set when the measure is a truncated series.
    pub truncation: Option<String>,
}

impl EnergyReport {
    pub fn with_truncation(self, note: impl Into<String>) -> Self {
        Self {
            truncation: Some(note.into()),
            ..self
        }
    }
}

fn orbit(action: &IsometricAction, mu: &Measure, x: &Point) -> Result<(Vec<Point>, Vec<f64>)> {
    let mut pts = Vec::with_capacity(mu.support_size());
    let mut ws = Vec::with_capacity(mu.support_size());
    for (g, w) in mu.iter_f64() {
        pts.push(action.isometry(g)?.apply(action.space(), x));
        ws.push(w);
    }
    Ok((pts, ws))
}

fn energy_value(space: &Space, x: &Point, pts: &[Point], ws: &[f64]) -> f64 {
    pts.iter()
        .zip(ws)
        .map(|(p, w)| w * space.dist_sq(x, p))
        .sum()
}

fn check_measure(action: &IsometricAction, mu: &Measure) -> Result<()> {
    if mu.group() != action.group() {
        return domain(format!(
            "measure lives on {} but the action is of {}",
            mu.group().name(),
            action.group().name()
        ));
    }
    Ok(())
}

pub fn energy(action: &IsometricAction, mu: &Measure, basepoint: &Point, gens: &GeneratingSet) -> Result<EnergyReport> {
    check_measure(action, mu)?;
    action.space().check(basepoint)?;
    let (pts, ws) = orbit(action, mu, basepoint)?;
    let e = energy_value(action.space(), basepoint, &pts, &ws);
    let delta = action.displacement(basepoint, gens)?;
    let min_mu = gens
        .elements()
        .iter()
        .map(|s| mu.weight_f64(s))
        .fold(f64::INFINITY, f64::min);
    Ok(EnergyReport {
        energy: e,
        basepoint: basepoint.clone(),
        displacement: delta,
        lower_bound: delta * delta * min_mu,
        truncation: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyOptions {
    /// Converged once the barycenter step is shorter than this (base units).
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping `θ ∈ (0, 1]`, halved whenever the energy would rise.
    pub theta: f64,
    /// Escape radius around the start in base units; `None` means
    /// `10³ × δ(start)`.
    pub escape_radius: Option<f64>,
    pub barycenter_tol: f64,
    pub record_trace: bool,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 1000,
            theta: 0.5,
            escape_radius: None,
            barycenter_tol: 1e-12,
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyStatus {
    Converged,
    Escaped,
    IterationCapped,
}

/// Evidence behind an `Escaped` status. Distances are from the start, in base units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EscapeDiagnosis {
    pub left_ball: bool,
    pub escape_radius: f64,
    pub distance_from_start: f64,
    /// Distance gained over the second half of the run.
    pub growth_last_half: f64,
    /// Distance gained over the preceding quarter.
    pub growth_previous_quarter: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyRun {
    #[serde(skip)]
    pub map: EquivariantMap,
    pub report: EnergyReport,
    pub status: EnergyStatus,
    pub iterations: usize,
    /// Energy at the start and after every accepted step.
    pub energies: Vec<f64>,
    /// Accepted iterates, starting with the start point, when requested.
    #[serde(skip)]
    pub trace: Vec<Point>,
    pub escape: Option<EscapeDiagnosis>,
}

/// Damped orbit-barycenter iteration `x ← [x, bar{(ρ(g)x, μ(g))}]_θ`.
///
/// The energy sequence is nonincreasing: a step that would raise it is
/// retried with `θ/2`. All stopping tests use base-space distances, so runs
/// on a rescaled space visit the same points.
///
/// Escape is declared when the iterate leaves the escape ball while the
/// energy still drops by more than `tol` per step, or when at the iteration
/// cap the distance from the start gained over the last half of the run is
/// at least half of that gained over the preceding quarter (iterates that
/// converge geometrically gain almost nothing late).
pub fn minimize_energy(
    action: &IsometricAction,
    mu: &Measure,
    start: &Point,
    gens: &GeneratingSet,
    opts: &EnergyOptions,
) -> Result<EnergyRun> {
    check_measure(action, mu)?;
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return domain("damping must lie in (0, 1]");
    }
    let space = action.space();
    space.check(start)?;
    let (base, lambda) = space.unscaled();
    let radius = match opts.escape_radius {
        Some(r) => r,
        None => 1e3 * action.displacement(start, gens)? / lambda,
    };
    let mut x = start.clone();
    let (mut pts, mut ws) = orbit(action, mu, &x)?;
    let mut e = energy_value(space, &x, &pts, &ws);
    let mut energies = vec![e];
    let mut dists = vec![0.0];
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(x.clone());
    }
    let mut theta = opts.theta;
    let mut status = EnergyStatus::IterationCapped;
    let mut escape = None;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let b = space.barycenter(&WeightedPointSet::new(pts.clone(), ws.clone())?, opts.barycenter_tol)?;
        if base.dist(&x, &b) < opts.tol {
            status = EnergyStatus::Converged;
            break;
        }
        let mut next = None;
        while theta >= 1e-12 {
            let cand = space.geo(&x, &b, theta);
            let (cp, cw) = orbit(action, mu, &cand)?;
            let ec = energy_value(space, &cand, &cp, &cw);
            if ec <= e * (1.0 + 1e-12) {
                next = Some((cand, cp, cw, ec));
                break;
            }
            theta *= 0.5;
        }
        let Some((cand, cp, cw, ec)) = next else {
            // no damped step lowers the energy: stationary to working precision
            status = EnergyStatus::Converged;
            break;
        };
        let drop = e - ec;
        x = cand;
        pts = cp;
        ws = cw;
        e = ec;
        energies.push(e);
        let d = base.dist(start, &x);
        dists.push(d);
        if opts.record_trace {
            trace.push(x.clone());
        }
        if d > radius && drop / (lambda * lambda) > opts.tol {
            status = EnergyStatus::Escaped;
            escape = Some(diagnosis(&dists, true, radius));
            break;
        }
    }
    if status == EnergyStatus::IterationCapped {
        let k = dists.len() - 1;
        if k >= 8 {
            let diag = diagnosis(&dists, false, radius);
            let decreasing = energies[k] < energies[k / 2];
            if decreasing && diag.growth_last_half > opts.tol && diag.growth_last_half >= 0.5 * diag.growth_previous_quarter {
                status = EnergyStatus::Escaped;
                escape = Some(diag);
            }
        }
    }
    let report = energy(action, mu, &x, gens)?;
    Ok(EnergyRun {
        map: EquivariantMap::new(x),
        report,
        status,
        iterations,
        energies,
        trace,
        escape,
    })
}

fn diagnosis(dists: &[f64], left_ball: bool, radius: f64) -> EscapeDiagnosis {
    let k = dists.len() - 1;
    EscapeDiagnosis {
        left_ball,
        escape_radius: radius,
        distance_from_start: dists[k],
        growth_last_half: dists[k] - dists[k / 2],
        growth_previous_quarter: dists[k / 2] - dists[k / 4],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::examples;

    #[test]
    fn translation_energy_is_t_squared() {
        let ex = examples::translation_line(0.75);
        let r = energy(&ex.action, &ex.measure, &Point::Euclidean(vec![0.3]), &ex.generators).unwrap();
        assert!((r.energy - 0.5625).abs() < 1e-15);
        assert!(r.energy >= r.lower_bound - 1e-12);
        let run = minimize_energy(&ex.action, &ex.measure, &ex.start, &ex.generators, &EnergyOptions::default()).unwrap();
        assert_eq!(run.status, EnergyStatus::Converged);
        assert_eq!(run.report.energy, 0.5625);
    }

    #[test]
    fn rotation_converges_to_origin() {
        let ex = examples::rotation_plane(4);
        let r = energy(&ex.action, &ex.measure, &Point::Euclidean(vec![1.0, 0.0]), &ex.generators).unwrap();
        assert_eq!(r.energy, 2.0);
        let run = minimize_energy(&ex.action, &ex.measure, &ex.start, &ex.generators, &EnergyOptions::default()).unwrap();
        assert_eq!(run.status, EnergyStatus::Converged);
        assert!(run.iterations <= 200);
        let p = run.map.basepoint.as_euclidean().unwrap().to_vec();
        assert!(p[0].hypot(p[1]) < 1e-6);
        assert!(run.energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
    }

    #[test]
    fn parabolic_escapes() {
        let ex = examples::parabolic();
        let run = minimize_energy(&ex.action, &ex.measure, &ex.start, &ex.generators, &EnergyOptions::default()).unwrap();
        assert_eq!(run.status, EnergyStatus::Escaped);
        let y = run.map.basepoint.as_hyperbolic().unwrap().im;
        assert!(y > 10.0, "{y}");
        assert!(run.report.energy < 0.01);
        assert!(run.energies.windows(2).all(|w| w[1] <= w[0]));
    }
}
