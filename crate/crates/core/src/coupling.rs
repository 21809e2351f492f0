//! The recursive disagreement coupling: two Gibbs instances with different
//! boundary conditions thinned from one dominating Poisson process, layer by
//! layer over shrinking influence zones, so that every point where the two
//! instances disagree is connected to the boundaries through the dominating
//! process.

use crate::error::{Error, Result};
use crate::order::OrderInterval;
use crate::partition::{GibbsSpec, ZMethod};
use crate::rng::{RngStream, Role};
use crate::space::{balls_intersect, connected, Configuration, Point, Probe, Region};
use crate::thinning::{ThinDiagnostics, ThinningKernel};

/// Knobs of the coupling construction.
#[derive(Clone, Debug)]
pub struct CouplingContext {
    pub spec: GibbsSpec,
    pub z_method: ZMethod,
    pub bias_budget: f64,
    pub depth_cap: usize,
    /// Reuse the first thinning's randomness for the second; with equal
    /// boundaries this forces the two instances to coincide path by path.
    pub shared_streams: bool,
}

impl CouplingContext {
    pub fn new(spec: GibbsSpec, z_method: ZMethod) -> Self {
        CouplingContext {
            spec,
            z_method,
            bias_budget: 1e-2,
            depth_cap: 10_000,
            shared_streams: false,
        }
    }

    pub fn with_shared_streams(mut self, shared: bool) -> Self {
        self.shared_streams = shared;
        self
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Self {
        self.depth_cap = cap;
        self
    }
}

/// Per-layer trace of the recursion.
#[derive(Clone, Debug)]
pub struct LayerTrace {
    /// Points of the union boundary that drove this layer's influence zone.
    pub boundary_size: usize,
    /// Dominating points retained inside the zone.
    pub zone_points: usize,
    pub kept_first: usize,
    pub kept_second: usize,
}

/// Output of the disagreement coupling: the two Gibbs instances, the
/// dominating Poisson realization, the boundaries, and the layer trace.
#[derive(Clone, Debug)]
pub struct CouplingSample {
    pub xi1: Configuration,
    pub xi2: Configuration,
    pub xi3: Configuration,
    pub gamma1: Configuration,
    pub gamma2: Configuration,
    pub layers: Vec<LayerTrace>,
    /// Points added by the final agreement branch (identical in both).
    pub agreement_points: usize,
    pub diagnostics: ThinDiagnostics,
}

impl CouplingSample {
    /// Zone-layer count; the quantity with the geometric tail bound.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn disagreement(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for p in self.xi1.iter() {
            if !self.xi2.contains(p) {
                out.push(p.clone());
            }
        }
        for p in self.xi2.iter() {
            if !self.xi1.contains(p) {
                out.push(p.clone());
            }
        }
        out
    }
}

/// One joint thinning of a single dominating draw to both boundary
/// conditions on an order-interval domain.
pub fn thin_pair_sample(
    ctx: &CouplingContext,
    domain: OrderInterval,
    gamma1: &Configuration,
    gamma2: &Configuration,
    stream: RngStream,
) -> Result<(Configuration, Configuration, Configuration, ThinDiagnostics)> {
    let kernel1 = ThinningKernel::new(
        ctx.spec.clone(),
        domain.clone(),
        gamma1.clone(),
        ctx.z_method.clone(),
    )?
    .with_bias_budget(ctx.bias_budget);
    let kernel2 = ThinningKernel::new(
        ctx.spec.clone(),
        domain,
        gamma2.clone(),
        ctx.z_method.clone(),
    )?
    .with_bias_budget(ctx.bias_budget);
    let mut poisson_rng = stream.role(Role::Poisson).rng();
    let omega3 = kernel1.sample_dominating(&mut poisson_rng)?;
    let mut thin1 = stream.role(Role::ThinFirst).rng();
    let mut est1 = stream.role(Role::Estimator).child(1).rng();
    let (omega1, mut diag) = kernel1.thin_given(&omega3, &mut thin1, &mut est1)?;
    let (mut thin2, mut est2) = if ctx.shared_streams {
        (
            stream.role(Role::ThinFirst).rng(),
            stream.role(Role::Estimator).child(1).rng(),
        )
    } else {
        (
            stream.role(Role::ThinSecond).rng(),
            stream.role(Role::Estimator).child(2).rng(),
        )
    };
    let (omega2, diag2) = kernel2.thin_given(&omega3, &mut thin2, &mut est2)?;
    diag.absorb(&diag2);
    Ok((omega1, omega2, omega3, diag))
}

fn touches_any(p: &Point, boundary: &Configuration, wbits: u32) -> bool {
    boundary.iter().any(|y| balls_intersect(p, y, wbits))
}

/// Run the layered disagreement coupling for boundaries `gamma1`, `gamma2`
/// outside the window. Each layer jointly thins the remaining domain, keeps
/// only the influence-zone part, grows the boundaries by the kept points and
/// recurses; once the boundary stops growing the influence zone is exactly
/// empty and a single thinning with empty boundary finishes both instances
/// identically.
pub fn disagreement_sample(
    ctx: &CouplingContext,
    gamma1: &Configuration,
    gamma2: &Configuration,
    stream: RngStream,
) -> Result<CouplingSample> {
    let window = ctx.spec.window.clone();
    let wbits = window.wbits();
    let mut xi1 = Configuration::empty();
    let mut xi2 = Configuration::empty();
    let mut xi3 = Configuration::empty();
    let mut bdry1 = gamma1.clone();
    let mut bdry2 = gamma2.clone();
    let mut layers: Vec<LayerTrace> = Vec::new();
    let mut diagnostics = ThinDiagnostics::default();
    // union boundary whose reach has already been removed from the domain
    let mut removed: Option<Configuration> = None;

    loop {
        let union_boundary = bdry1.union(&bdry2);
        let zone_empty = match &removed {
            None => Region::influence_zone(window.clone(), union_boundary.clone())
                .certainly_empty(),
            // the boundary only grows by kept zone points; no growth means
            // the previous zone's removal emptied the influence zone exactly
            Some(prev) => union_boundary.len() == prev.len(),
        };
        let domain_region = match &removed {
            None => Region::full(window.clone()),
            Some(prev) => Region::full(window.clone()).minus_reach(prev.clone()),
        };
        let domain = OrderInterval::full().with_region(domain_region);

        if zone_empty {
            let kernel = ThinningKernel::new(
                ctx.spec.clone(),
                domain,
                Configuration::empty(),
                ctx.z_method.clone(),
            )?
            .with_bias_budget(ctx.bias_budget);
            let layer_stream = stream.layer(layers.len() as u64);
            let (kept, poisson, diag) = kernel.thin_sample(layer_stream)?;
            diagnostics.absorb(&diag);
            let agreement_points = kept.len();
            for p in kept.iter() {
                xi1.push(p.clone());
                xi2.push(p.clone());
            }
            for p in poisson.iter() {
                xi3.push(p.clone());
            }
            return Ok(CouplingSample {
                xi1,
                xi2,
                xi3,
                gamma1: gamma1.clone(),
                gamma2: gamma2.clone(),
                layers,
                agreement_points,
                diagnostics,
            });
        }

        if layers.len() >= ctx.depth_cap {
            return Err(Error::DepthCapExceeded {
                cap: ctx.depth_cap,
                layers: layers.len(),
            });
        }

        let layer_stream = stream.layer(layers.len() as u64);
        let (w1, w2, w3, diag) = thin_pair_sample(ctx, domain, &bdry1, &bdry2, layer_stream)?;
        diagnostics.absorb(&diag);
        // retain only the influence-zone part of this layer
        let in_zone = |p: &Point| touches_any(p, &union_boundary, wbits);
        let mut trace = LayerTrace {
            boundary_size: union_boundary.len(),
            zone_points: 0,
            kept_first: 0,
            kept_second: 0,
        };
        for p in w3.iter().filter(|p| in_zone(p)) {
            xi3.push(p.clone());
            trace.zone_points += 1;
        }
        for p in w1.iter().filter(|p| in_zone(p)) {
            xi1.push(p.clone());
            bdry1.push(p.clone());
            trace.kept_first += 1;
        }
        for p in w2.iter().filter(|p| in_zone(p)) {
            xi2.push(p.clone());
            bdry2.push(p.clone());
            trace.kept_second += 1;
        }
        layers.push(trace);
        removed = Some(union_boundary);
    }
}

/// Structural verification of one coupling sample: the subset property and
/// boundary connectivity of every disagreement point, both checked exactly.
#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub subset_ok: bool,
    pub connectivity_ok: bool,
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.subset_ok && self.connectivity_ok
    }
}

pub fn verify_disagreement(sample: &CouplingSample, wbits: u32) -> VerifyReport {
    let mut report = VerifyReport {
        subset_ok: true,
        connectivity_ok: true,
        violations: Vec::new(),
    };
    for (tag, xi) in [("xi1", &sample.xi1), ("xi2", &sample.xi2)] {
        for p in xi.iter() {
            if !sample.xi3.contains(p) {
                report.subset_ok = false;
                report
                    .violations
                    .push(format!("{tag} point {:?} outside xi3", p.pos()));
            }
        }
    }
    let boundary = sample.gamma1.union(&sample.gamma2);
    let target = Probe::Config(boundary);
    for p in sample.disagreement() {
        let ok = connected(&sample.xi3, &Probe::Ball(p.clone()), &target, wbits);
        if !ok {
            report.connectivity_ok = false;
            report.violations.push(format!(
                "disagreement point {:?} not connected to the boundary",
                p.pos()
            ));
        }
    }
    report
}
