//! Gibbs interaction models: local energies, accumulated Hamiltonians with
//! additivity, domination levels and the locality check.
//!
//! Energies are extended reals; a hard exclusion is the explicit
//! `f64::INFINITY`, which propagates to a zero Boltzmann weight.

use crate::error::{Error, Result};
use crate::order::OrderCodec;
use crate::rng::RngStream;
use crate::space::{
    balls_intersect, connected, gilbert_components, Configuration, Point, Probe, Window,
};
use rand::Rng;
use std::f64::consts::PI;

/// Interface of a Hamiltonian model: the local energy of inserting one point
/// into a context, a uniform lower bound on it, and the locality flag.
pub trait HamiltonianModel {
    fn name(&self) -> &'static str;

    /// `H_X(X | context)`. `wbits` fixes the geometry grid.
    fn local_energy(&self, x: &Point, context: &Configuration, wbits: u32) -> f64;

    /// Uniform lower bound `h_min <= local_energy`; `-inf` when none exists.
    fn energy_lower_bound(&self) -> f64;

    /// Whether the interaction only sees context connected to the new point.
    fn is_local(&self) -> bool;

    /// Interaction range in units of ball-surface gap, when finite: the model
    /// ignores context balls farther than this from the new ball. `None` for
    /// connectivity-mediated interactions.
    fn surface_range(&self) -> Option<f64>;
}

/// The shipped models.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    /// No interaction; the Poisson baseline.
    Ideal,
    /// Overlapping balls are forbidden.
    HardSphere,
    /// Energy `beta` per overlapping pair, `beta >= 0`.
    Strauss { beta: f64 },
    /// Continuum random cluster interaction `-log(q) (1 - k)` where `k`
    /// counts the components the new ball touches.
    Crcm { q: f64 },
    /// Planar area interaction (Quermass with the Euler term switched off):
    /// `theta1 * Area(X, w) [+ theta2 * Per(X, w)]`. The lower bound is a
    /// validated input; the area/perimeter variations are Monte-Carlo with a
    /// point-derived deterministic stream, exact for at most one overlap.
    AreaInteraction {
        theta1: f64,
        theta2: Option<f64>,
        h_min: f64,
        budget: usize,
    },
}

impl Model {
    pub fn strauss(beta: f64) -> Result<Model> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidParam(format!("strauss beta {beta} < 0")));
        }
        Ok(Model::Strauss { beta })
    }

    pub fn crcm(q: f64) -> Result<Model> {
        if !(q > 0.0) {
            return Err(Error::InvalidParam(format!("crcm q {q} <= 0")));
        }
        Ok(Model::Crcm { q })
    }

    pub fn area_interaction(
        theta1: f64,
        theta2: Option<f64>,
        h_min: f64,
        budget: usize,
    ) -> Result<Model> {
        if !h_min.is_finite() {
            return Err(Error::InvalidParam("area-interaction h_min".into()));
        }
        if budget == 0 {
            return Err(Error::InvalidParam("area-interaction budget 0".into()));
        }
        Ok(Model::AreaInteraction {
            theta1,
            theta2,
            h_min,
            budget,
        })
    }
}

impl HamiltonianModel for Model {
    fn name(&self) -> &'static str {
        match self {
            Model::Ideal => "ideal",
            Model::HardSphere => "hard-sphere",
            Model::Strauss { .. } => "strauss",
            Model::Crcm { .. } => "crcm",
            Model::AreaInteraction { .. } => "area-interaction",
        }
    }

    fn local_energy(&self, x: &Point, context: &Configuration, wbits: u32) -> f64 {
        match self {
            Model::Ideal => 0.0,
            Model::HardSphere => {
                if context.iter().any(|y| balls_intersect(x, y, wbits)) {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Model::Strauss { beta } => {
                let overlaps = context
                    .iter()
                    .filter(|y| balls_intersect(x, y, wbits))
                    .count();
                beta * overlaps as f64
            }
            Model::Crcm { q } => {
                let k = k_components(x, context, wbits) as f64;
                -q.ln() * (1.0 - k)
            }
            Model::AreaInteraction {
                theta1,
                theta2,
                budget,
                ..
            } => {
                let mut rng = point_stream(x).rng();
                let (area, _) = area_variation(x, context, *budget, &mut rng)
                    .expect("2-d context");
                let mut h = theta1 * area;
                if let Some(t2) = theta2 {
                    let mut rng = point_stream(x).child(1).rng();
                    let (per, _) = perimeter_variation(x, context, *budget, &mut rng)
                        .expect("2-d context");
                    h += t2 * per;
                }
                h
            }
        }
    }

    fn energy_lower_bound(&self) -> f64 {
        match self {
            Model::Ideal | Model::HardSphere | Model::Strauss { .. } => 0.0,
            Model::Crcm { q } => {
                if *q >= 1.0 {
                    -q.ln()
                } else {
                    // k is unbounded over contexts, so no uniform bound
                    f64::NEG_INFINITY
                }
            }
            Model::AreaInteraction { h_min, .. } => *h_min,
        }
    }

    fn is_local(&self) -> bool {
        true
    }

    fn surface_range(&self) -> Option<f64> {
        match self {
            Model::Ideal | Model::HardSphere | Model::Strauss { .. } => Some(0.0),
            Model::AreaInteraction { .. } => Some(0.0),
            Model::Crcm { .. } => None,
        }
    }
}

/// Stream derived from the coordinates of a point, so Monte-Carlo energies
/// are pure functions of their arguments.
fn point_stream(x: &Point) -> RngStream {
    let mut s = RngStream::from_seed(0x6172_6561);
    for &c in x.pos() {
        s = s.child(c.to_bits());
    }
    s.child(x.radius().to_bits())
}

/// Number of distinct Gilbert-graph components of `omega` whose union the
/// ball of `x` intersects.
pub fn k_components(x: &Point, omega: &Configuration, wbits: u32) -> usize {
    let pts = omega.points();
    let mut dsu = gilbert_components(pts, wbits);
    let mut roots: Vec<usize> = pts
        .iter()
        .enumerate()
        .filter(|(_, y)| balls_intersect(x, y, wbits))
        .map(|(i, _)| dsu.find(i))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Accumulated Hamiltonian `H(omega | gamma)`: local energies added in key
/// order. `H(empty | gamma) = 0` for every boundary.
pub fn hamiltonian(
    model: &Model,
    window: &Window,
    omega: &Configuration,
    gamma: &Configuration,
) -> Result<f64> {
    if !omega.disjoint_as_sets(gamma) {
        return Err(Error::InvalidParam(
            "omega and gamma overlap as sets".into(),
        ));
    }
    let codec = OrderCodec::for_window(window)?;
    let mut order: Vec<&Point> = omega.iter().collect();
    order.sort_by(|a, b| {
        codec
            .encode(a)
            .map(|k| k.0)
            .unwrap_or(u128::MAX)
            .cmp(&codec.encode(b).map(|k| k.0).unwrap_or(u128::MAX))
    });
    let mut context = gamma.clone();
    let mut total = 0.0;
    for x in order {
        total += model.local_energy(x, &context, window.wbits());
        if total == f64::INFINITY {
            return Ok(total);
        }
        context.push(x.clone());
    }
    Ok(total)
}

/// Uniform Papangelou bound: the dominating intensity `alpha` for activity
/// `lambda`, erroring when the model admits no uniform bound.
pub fn dom_level(model: &Model, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!("lambda {lambda} <= 0")));
    }
    let h_min = model.energy_lower_bound();
    if h_min == f64::NEG_INFINITY {
        return Err(Error::DomViolation(format!(
            "{} has no uniform energy lower bound",
            model.name()
        )));
    }
    Ok(lambda * (-h_min).exp())
}

/// Locality probe: with `gamma` not connected to `omega`, the boundary must
/// not change the energy. All shipped models satisfy this identically.
pub fn check_loc(
    model: &Model,
    window: &Window,
    omega: &Configuration,
    gamma: &Configuration,
) -> Result<bool> {
    let with = hamiltonian(model, window, omega, gamma)?;
    let without = hamiltonian(model, window, omega, &Configuration::empty())?;
    Ok(with == without || (with.is_infinite() && without.is_infinite()))
}

/// Monte-Carlo estimate (value, standard error) of the free area the ball of
/// `x` adds on top of `B(omega)`; exact closed forms when at most one disk
/// overlaps. Two-dimensional only.
pub fn area_variation<R: Rng + ?Sized>(
    x: &Point,
    omega: &Configuration,
    budget: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if x.dim() != 2 {
        return Err(Error::InvalidParam("area variation needs d = 2".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidParam("budget 0".into()));
    }
    let r = x.radius();
    let disk_area = PI * r * r;
    let overlapping: Vec<&Point> = omega
        .iter()
        .filter(|y| {
            let d = dist2(x, y);
            d < (r + y.radius()) * (r + y.radius())
        })
        .collect();
    match overlapping.len() {
        0 => return Ok((disk_area, 0.0)),
        1 => {
            let y = overlapping[0];
            return Ok((disk_area - lens_area(r, y.radius(), dist2(x, y).sqrt()), 0.0));
        }
        _ => {}
    }
    // rejection inside the disk of x
    let mut free = 0usize;
    for _ in 0..budget {
        let p = sample_in_disk(x, rng);
        let covered = overlapping.iter().any(|y| {
            let dx = p[0] - y.pos()[0];
            let dy = p[1] - y.pos()[1];
            dx * dx + dy * dy <= y.radius() * y.radius()
        });
        if !covered {
            free += 1;
        }
    }
    let frac = free as f64 / budget as f64;
    let se = (frac * (1.0 - frac) / budget as f64).sqrt();
    Ok((disk_area * frac, disk_area * se))
}

/// Monte-Carlo estimate of the perimeter change when the ball of `x` joins
/// `B(omega)`: its own uncovered arc minus the arcs of neighbours it covers.
pub fn perimeter_variation<R: Rng + ?Sized>(
    x: &Point,
    omega: &Configuration,
    budget: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if x.dim() != 2 {
        return Err(Error::InvalidParam("perimeter variation needs d = 2".into()));
    }
    let inside = |p: [f64; 2], y: &Point| {
        let dx = p[0] - y.pos()[0];
        let dy = p[1] - y.pos()[1];
        dx * dx + dy * dy <= y.radius() * y.radius()
    };
    let circle_point = |c: &Point, t: f64| {
        [
            c.pos()[0] + c.radius() * t.cos(),
            c.pos()[1] + c.radius() * t.sin(),
        ]
    };
    let mut value = 0.0;
    let mut var = 0.0;
    // arc of x's circle outside the union
    let mut hits = 0usize;
    for _ in 0..budget {
        let p = circle_point(x, rng.random_range(0.0..(2.0 * PI)));
        if !omega.iter().any(|y| inside(p, y)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / budget as f64;
    let len = 2.0 * PI * x.radius();
    value += len * frac;
    var += (len * len) * frac * (1.0 - frac) / budget as f64;
    // arcs of neighbours that x newly covers
    for (i, y) in omega.iter().enumerate() {
        let d2 = dist2(x, y);
        if d2 > (x.radius() + y.radius()) * (x.radius() + y.radius()) {
            continue;
        }
        let mut covered = 0usize;
        for _ in 0..budget {
            let p = circle_point(y, rng.random_range(0.0..(2.0 * PI)));
            let was_boundary = !omega
                .iter()
                .enumerate()
                .any(|(j, z)| j != i && inside(p, z));
            if was_boundary && inside(p, x) {
                covered += 1;
            }
        }
        let frac = covered as f64 / budget as f64;
        let len = 2.0 * PI * y.radius();
        value -= len * frac;
        var += (len * len) * frac * (1.0 - frac) / budget as f64;
    }
    Ok((value, var.sqrt()))
}

fn dist2(x: &Point, y: &Point) -> f64 {
    x.pos()
        .iter()
        .zip(y.pos())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn sample_in_disk<R: Rng + ?Sized>(x: &Point, rng: &mut R) -> [f64; 2] {
    loop {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        if u * u + v * v <= 1.0 {
            return [
                x.pos()[0] + u * x.radius(),
                x.pos()[1] + v * x.radius(),
            ];
        }
    }
}

/// Intersection area of two disks with radii `r1`, `r2` at center distance `d`.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    let rmin = r1.min(r2);
    let rmax = r1.max(r2);
    if d + rmin <= rmax {
        return PI * rmin * rmin;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let t = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1.acos() + r2 * r2 * a2.acos() - 0.5 * t.max(0.0).sqrt()
}

/// Whether `gamma` is connected to `omega` in the joint Gilbert graph; the
/// precondition side of the locality check.
pub fn boundary_connected(omega: &Configuration, gamma: &Configuration, wbits: u32) -> bool {
    if omega.is_empty() || gamma.is_empty() {
        return false;
    }
    let joint = omega.union(gamma);
    connected(
        &joint,
        &Probe::Config(omega.clone()),
        &Probe::Config(gamma.clone()),
        wbits,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    const W: u32 = 32;

    fn pt(pos: &[f64], r: f64) -> Point {
        Point::new(pos, r).unwrap()
    }

    fn win_1d() -> Window {
        Window::new(&[0.0], &[1.0], 0.25, W).unwrap()
    }

    #[test]
    fn local_energy_on_empty_context() {
        let empty = Configuration::empty();
        let x = pt(&[0.5], 0.125);
        assert_eq!(Model::HardSphere.local_energy(&x, &empty, W), 0.0);
        let crcm = Model::crcm(2.0).unwrap();
        assert_relative_eq!(crcm.local_energy(&x, &empty, W), -(2.0f64.ln()));
    }

    #[test]
    fn crcm_bridge_pays_log_q() {
        // X merging two components: k = 2, energy +log 2
        let crcm = Model::crcm(2.0).unwrap();
        let omega =
            Configuration::new(vec![pt(&[0.0], 0.1), pt(&[1.0], 0.1)]).unwrap();
        let x = pt(&[0.5], 0.5);
        assert_eq!(k_components(&x, &omega, W), 2);
        assert_relative_eq!(
            crcm.local_energy(&x, &omega, W),
            2.0f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn strauss_counts_overlaps() {
        let strauss = Model::strauss(1.0).unwrap();
        let omega = Configuration::new(vec![
            pt(&[0.1], 0.25),
            pt(&[0.4], 0.25),
            pt(&[0.6], 0.25),
            pt(&[5.0], 0.25),
        ])
        .unwrap();
        let x = pt(&[0.35], 0.25);
        assert_relative_eq!(strauss.local_energy(&x, &omega, W), 3.0);
        assert!(Model::strauss(-0.25).is_err());
    }

    #[test]
    fn k_component_examples() {
        let x = pt(&[0.0, 0.0], 0.5);
        assert_eq!(k_components(&x, &Configuration::empty(), W), 0);
        let one = Configuration::new(vec![pt(&[0.5, 0.0], 0.25)]).unwrap();
        assert_eq!(k_components(&x, &one, W), 1);
        // two separate 2-ball chains bridged by x
        let chains = Configuration::new(vec![
            pt(&[-0.5, 0.0], 0.25),
            pt(&[-0.875, 0.0], 0.25),
            pt(&[0.5, 0.0], 0.25),
            pt(&[0.875, 0.0], 0.25),
        ])
        .unwrap();
        assert_eq!(k_components(&x, &chains, W), 2);
    }

    #[test]
    fn hamiltonian_of_empty_is_zero() {
        let gamma = Configuration::new(vec![pt(&[2.0], 0.25)]).unwrap();
        for model in [Model::Ideal, Model::HardSphere, Model::crcm(2.0).unwrap()] {
            assert_eq!(
                hamiltonian(&model, &win_1d(), &Configuration::empty(), &gamma).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn hard_sphere_overlap_is_infinite() {
        let omega =
            Configuration::new(vec![pt(&[0.4], 0.25), pt(&[0.5], 0.25)]).unwrap();
        let h = hamiltonian(&Model::HardSphere, &win_1d(), &omega, &Configuration::empty())
            .unwrap();
        assert_eq!(h, f64::INFINITY);
    }

    #[test]
    fn crcm_energy_matches_component_count() {
        // two disjoint balls: H = -2 log q; in general exp(-H) = q^components
        let q = 2.0;
        let crcm = Model::crcm(q).unwrap();
        let omega =
            Configuration::new(vec![pt(&[0.125], 0.0625), pt(&[0.75], 0.0625)]).unwrap();
        let h = hamiltonian(&crcm, &win_1d(), &omega, &Configuration::empty()).unwrap();
        assert_relative_eq!(h, -2.0 * q.ln(), epsilon = 1e-12);

        let mut rng = RngStream::from_seed(9).rng();
        for trial in 0..200 {
            let n = (trial % 7) + 1;
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    Point::quantized(
                        &[rng.random_range(0.0..1.0)],
                        rng.random_range(0.0..0.25),
                        W,
                    )
                    .unwrap()
                })
                .collect();
            let Ok(omega) = Configuration::new(pts) else {
                continue;
            };
            let h = hamiltonian(&crcm, &win_1d(), &omega, &Configuration::empty()).unwrap();
            let comps = crate::space::component_count(omega.points(), W);
            assert_relative_eq!((-h).exp(), q.powi(comps as i32), epsilon = 1e-9);
        }
    }

    #[test]
    fn hamiltonian_rejects_overlapping_sets() {
        let p = pt(&[0.5], 0.125);
        let omega = Configuration::new(vec![p.clone()]).unwrap();
        let gamma = Configuration::new(vec![p]).unwrap();
        assert!(hamiltonian(&Model::Ideal, &win_1d(), &omega, &gamma).is_err());
    }

    #[test]
    fn additivity_over_random_splits() {
        let window = win_1d();
        let mut rng = RngStream::from_seed(10).rng();
        let models = [
            Model::HardSphere,
            Model::strauss(0.7).unwrap(),
            Model::crcm(1.7).unwrap(),
        ];
        for model in &models {
            for _ in 0..100 {
                let n = rng.random_range(1..7usize);
                let pts: Vec<Point> = (0..n)
                    .map(|_| {
                        Point::quantized(
                            &[rng.random_range(0.0..1.0)],
                            rng.random_range(0.0..0.25),
                            W,
                        )
                        .unwrap()
                    })
                    .collect();
                let Ok(omega) = Configuration::new(pts.clone()) else {
                    continue;
                };
                let gamma = Configuration::new(vec![
                    Point::quantized(&[1.0 + rng.random_range(0.0..0.2)], 0.125, W)
                        .unwrap(),
                ])
                .unwrap();
                let (mut w1, mut w2) = (Vec::new(), Vec::new());
                for p in pts {
                    if rng.random::<bool>() {
                        w1.push(p)
                    } else {
                        w2.push(p)
                    }
                }
                let w1 = Configuration::new(w1).unwrap();
                let w2 = Configuration::new(w2).unwrap();
                let whole = hamiltonian(model, &window, &omega, &gamma).unwrap();
                let split = hamiltonian(model, &window, &w1, &gamma.union(&w2)).unwrap()
                    + hamiltonian(model, &window, &w2, &gamma).unwrap();
                if whole.is_finite() || split.is_finite() {
                    assert_relative_eq!(whole, split, epsilon = 1e-9);
                } // both infinite: consistent exclusion
            }
        }
    }

    #[test]
    fn dom_level_examples() {
        assert_relative_eq!(dom_level(&Model::crcm(2.0).unwrap(), 0.3).unwrap(), 0.6);
        assert_relative_eq!(dom_level(&Model::HardSphere, 1.0).unwrap(), 1.0);
        assert_relative_eq!(dom_level(&Model::strauss(0.5).unwrap(), 0.8).unwrap(), 0.8);
        // sub-unit q has no uniform bound
        assert!(dom_level(&Model::crcm(0.5).unwrap(), 1.0).is_err());
    }

    #[test]
    fn dom_bound_holds_on_random_probes() {
        let mut rng = RngStream::from_seed(11).rng();
        let models = [
            Model::HardSphere,
            Model::strauss(0.5).unwrap(),
            Model::crcm(2.0).unwrap(),
        ];
        for model in &models {
            let h_min = model.energy_lower_bound();
            for _ in 0..20_000 {
                let n = rng.random_range(0..6usize);
                let pts: Vec<Point> = (0..n)
                    .map(|_| {
                        Point::quantized(
                            &[rng.random_range(0.0..1.0)],
                            rng.random_range(0.0..0.25),
                            W,
                        )
                        .unwrap()
                    })
                    .collect();
                let Ok(omega) = Configuration::new(pts) else {
                    continue;
                };
                let x = Point::quantized(
                    &[rng.random_range(0.0..1.0)],
                    rng.random_range(0.0..0.25),
                    W,
                )
                .unwrap();
                if omega.contains(&x) {
                    continue;
                }
                assert!(model.local_energy(&x, &omega, W) >= h_min - 1e-12);
            }
        }
    }

    #[test]
    fn loc_holds_for_disconnected_boundaries() {
        let window = win_1d();
        let omega =
            Configuration::new(vec![pt(&[0.25], 0.125), pt(&[0.3125], 0.125)]).unwrap();
        // gamma far beyond reach
        let gamma = Configuration::new(vec![pt(&[3.0], 0.25)]).unwrap();
        assert!(!boundary_connected(&omega, &gamma, W));
        for model in [
            Model::HardSphere,
            Model::strauss(0.5).unwrap(),
            Model::crcm(2.0).unwrap(),
        ] {
            assert!(check_loc(&model, &window, &omega, &gamma).unwrap());
        }
    }

    #[test]
    fn area_variation_oracles() {
        let mut rng = RngStream::from_seed(12).rng();
        let x = pt(&[0.0, 0.0], 1.0);
        // empty context: exact disk area
        let (a, se) = area_variation(&x, &Configuration::empty(), 10, &mut rng).unwrap();
        assert_relative_eq!(a, PI, epsilon = 1e-12);
        assert_eq!(se, 0.0);
        // fully covered by a bigger ball
        let cover = Configuration::new(vec![pt(&[0.0, 0.0], 2.0)]).unwrap();
        let (a, _) = area_variation(&x, &cover, 10, &mut rng).unwrap();
        assert_relative_eq!(a, 0.0, epsilon = 1e-12);
        // two unit disks at distance 1: MC vs the two-circle closed form
        let exact = PI - lens_area(1.0, 1.0, 1.0);
        let two = Configuration::new(vec![pt(&[1.0, 0.0], 1.0), pt(&[50.0, 0.0], 1.0)])
            .unwrap();
        let (mc, _) = area_variation(&x, &two, 1_000_000, &mut rng).unwrap();
        assert!(
            (mc - exact).abs() / exact < 1e-2,
            "mc {mc} vs exact {exact}"
        );
    }

    #[test]
    fn order_invariance_of_hamiltonian() {
        // additivity makes the accumulation order irrelevant; permuting the
        // window (hence the visit order via different boxes) must not matter
        let mut rng = RngStream::from_seed(13).rng();
        let crcm = Model::crcm(2.0).unwrap();
        for _ in 0..50 {
            let pts: Vec<Point> = (0..5)
                .map(|_| {
                    Point::quantized(
                        &[rng.random_range(0.0..1.0)],
                        rng.random_range(0.0..0.25),
                        W,
                    )
                    .unwrap()
                })
                .collect();
            let Ok(omega) = Configuration::new(pts.clone()) else {
                continue;
            };
            let h1 = hamiltonian(&crcm, &win_1d(), &omega, &Configuration::empty()).unwrap();
            // reversed insertion order via manual accumulation
            let mut ctx = Configuration::empty();
            let mut h2 = 0.0;
            for p in pts.iter().rev() {
                h2 += crcm.local_energy(p, &ctx, W);
                ctx.push(p.clone());
            }
            assert_relative_eq!(h1, h2, epsilon = 1e-9);
        }
    }
}
