//! Monte-Carlo evaluation of the partition-function series: for each
//! configuration size `n`, the `n`-fold integral of the Boltzmann factor is
//! averaged over independent draws from the reference measure on the domain,
//! and the series is truncated where the domination bound makes the tail
//! negligible.

use crate::error::{Error, Result};
use crate::models::{HamiltonianModel, Model};
use crate::order::{Measure, OrderInterval};
use crate::space::{Configuration, Point};
use rand::Rng;

use super::GibbsSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesOptions {
    /// Monte-Carlo draws per series term.
    pub budget_per_term: usize,
    /// Target bound on the truncated tail, relative to the n = 0 term.
    pub tail_tol: f64,
    /// Hard cap on the truncation order.
    pub n_cap: usize,
    /// Membership samples for region-restricted domain masses.
    pub region_mc: usize,
    /// Rejection tries per point inside restricted regions.
    pub max_tries: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            budget_per_term: 256,
            tail_tol: 1e-6,
            n_cap: 24,
            region_mc: 4096,
            max_tries: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesEstimate {
    /// Unnormalized series value (the n = 0 term is 1).
    pub raw: f64,
    pub std_error: f64,
    /// Upper bound on the missing tail, in raw units.
    pub trunc_bound: f64,
    pub mass: Measure,
    pub n_max: usize,
}

/// Energy of a configuration given a boundary, accumulated point by point
/// (additivity makes the order irrelevant).
pub fn energy_of(model: &Model, points: &[Point], gamma: &Configuration, wbits: u32) -> f64 {
    let mut ctx = gamma.clone();
    let mut h = 0.0;
    for p in points {
        h += model.local_energy(p, &ctx, wbits);
        if h == f64::INFINITY {
            return h;
        }
        ctx.push(p.clone());
    }
    h
}

/// Poisson tail mass `sum_{n > n_max} m^n / n!` (unnormalized by e^-m).
fn raw_tail(m: f64, n_max: usize) -> f64 {
    let mut term = 1.0;
    for n in 1..=n_max {
        term *= m / n as f64;
    }
    // sum the next 200 terms; geometric decay beyond
    let mut tail = 0.0;
    let mut t = term;
    for n in (n_max + 1)..=(n_max + 200) {
        t *= m / n as f64;
        tail += t;
    }
    tail
}

pub fn z_series_mc<R: Rng + ?Sized>(
    spec: &GibbsSpec,
    iv: &OrderInterval,
    gamma: &Configuration,
    opts: &SeriesOptions,
    rng: &mut R,
) -> Result<SeriesEstimate> {
    let mass = spec
        .codec
        .interval_measure(iv, &spec.law, opts.region_mc, rng);
    if mass.value <= 0.0 {
        return Ok(SeriesEstimate {
            raw: 1.0,
            std_error: 0.0,
            trunc_bound: 0.0,
            mass,
            n_max: 0,
        });
    }
    // domination bounds the integrand by (alpha/lambda)^n, so the raw tail
    // is controlled by the alpha-mass Poisson tail
    let alpha_mass = spec.alpha * (mass.value + 3.0 * mass.std_error);
    let mut n_max = 1;
    while n_max < opts.n_cap && raw_tail(alpha_mass, n_max) > opts.tail_tol {
        n_max += 1;
    }
    let trunc_bound = raw_tail(alpha_mass, n_max);

    let sampler = spec.codec.interval_sampler(iv, &spec.law);
    let wbits = spec.window.wbits();
    let mut raw = 1.0;
    let mut var_total = 0.0;
    let mut mass_sensitivity = 0.0;
    let mut log_weight = 0.0;
    for n in 1..=n_max {
        log_weight += (spec.lambda * mass.value).ln() - (n as f64).ln();
        let weight = log_weight.exp();
        if weight < 1e-18 {
            break;
        }
        let budget = opts.budget_per_term;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut pts: Vec<Point> = Vec::with_capacity(n);
        for _ in 0..budget {
            pts.clear();
            for _ in 0..n {
                let mut p = sampler
                    .sample(rng, opts.max_tries)
                    .ok_or_else(|| Error::UnreliableEstimate("region starved".into()))?;
                // the reference process is simple: resample grid collisions
                let mut guard = 0;
                while pts.contains(&p) || gamma.contains(&p) {
                    p = sampler
                        .sample(rng, opts.max_tries)
                        .ok_or_else(|| Error::UnreliableEstimate("region starved".into()))?;
                    guard += 1;
                    if guard > 64 {
                        return Err(Error::UnreliableEstimate(
                            "cannot draw distinct quadrature points".into(),
                        ));
                    }
                }
                pts.push(p);
            }
            let b = (-energy_of(&spec.model, &pts, gamma, wbits)).exp();
            sum += b;
            sumsq += b * b;
        }
        let mean = sum / budget as f64;
        let var = (sumsq / budget as f64 - mean * mean).max(0.0) / budget as f64;
        raw += weight * mean;
        var_total += weight * weight * var;
        mass_sensitivity += n as f64 * weight * mean / mass.value;
    }
    let std_error =
        (var_total + (mass_sensitivity * mass.std_error).powi(2)).sqrt();
    Ok(SeriesEstimate {
        raw,
        std_error,
        trunc_bound,
        mass,
        n_max,
    })
}
