//! Sequential dependent thinning from the dominating Poisson process to the
//! Gibbs specification. Points of a dominating draw are visited in key order;
//! each is kept with a probability built from the Boltzmann factor of the
//! insertion and a ratio of partition functions over the unexplored tail of
//! the domain. The marginal law of the kept points is the specification.

use crate::error::{Error, Result};
use crate::models::HamiltonianModel;
use crate::order::{OrderInterval, OrderKey, Successor};
use crate::partition::{poisson_on_interval, z_raw, GibbsSpec, ZMethod, ZValue};
use crate::rng::{RngStream, Role};
use crate::space::{Configuration, Point};
use rand::Rng;
use std::cell::RefCell;
use std::collections::HashMap;

/// A probability with a propagated error bound from the estimators behind it.
#[derive(Clone, Copy, Debug)]
pub struct ProbEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// Diagnostics of one thinning pass.
#[derive(Clone, Debug, Default)]
pub struct ThinDiagnostics {
    /// Sum of per-decision probability error bounds.
    pub bias_used: f64,
    /// Number of decisions clamped back into [0, 1].
    pub clamped: usize,
    /// The accumulated bias exceeded the configured budget (flag, not abort).
    pub budget_exceeded: bool,
}

impl ThinDiagnostics {
    pub fn absorb(&mut self, other: &ThinDiagnostics) {
        self.bias_used += other.bias_used;
        self.clamped += other.clamped;
        self.budget_exceeded |= other.budget_exceeded;
    }
}

/// One thinning problem: specification, order-interval domain, boundary.
#[derive(Debug)]
pub struct ThinningKernel {
    pub spec: GibbsSpec,
    pub domain: OrderInterval,
    pub gamma: Configuration,
    pub z_method: ZMethod,
    /// Per-sample bias budget; exceeding it flags the sample.
    pub bias_budget: f64,
    /// Hard tolerance for out-of-range probabilities beyond propagated error.
    pub clamp_tol: f64,
    cache: RefCell<HashMap<CacheKey, f64>>,
}

type CacheKey = (u128, u128, Vec<(u64, u64)>);

const END_SENTINEL: u128 = u128::MAX;

fn boundary_fingerprint(cfg: &Configuration, extra: Option<&Point>) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> = cfg
        .iter()
        .chain(extra)
        .map(|p| {
            let mut h = 0u64;
            for &c in p.pos() {
                h = h.rotate_left(21) ^ c.to_bits();
            }
            (h, p.radius().to_bits())
        })
        .collect();
    v.sort_unstable();
    v
}

impl ThinningKernel {
    pub fn new(
        spec: GibbsSpec,
        domain: OrderInterval,
        gamma: Configuration,
        z_method: ZMethod,
    ) -> Result<Self> {
        // the boundary must live outside the domain
        for p in gamma.iter() {
            if let Ok(key) = spec.codec.encode(p) {
                let in_interval = key >= domain.lo
                    && domain.hi.map_or(true, |h| key < h)
                    && domain.region.as_ref().map_or(true, |r| r.member(p));
                if in_interval {
                    return Err(Error::InvalidParam(
                        "boundary point inside the thinning domain".into(),
                    ));
                }
            }
        }
        Ok(ThinningKernel {
            spec,
            domain,
            gamma,
            z_method,
            bias_budget: 1e-2,
            clamp_tol: 1e-6,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn with_bias_budget(mut self, budget: f64) -> Self {
        self.bias_budget = budget;
        self
    }

    fn z_tail<R: Rng + ?Sized>(
        &self,
        from: u128,
        boundary: &Configuration,
        extra: Option<&Point>,
        rng: &mut R,
    ) -> Result<ZValue> {
        let cacheable = matches!(self.z_method, ZMethod::Exact1d);
        let key = if cacheable {
            let k = (
                from,
                self.domain.hi.map_or(END_SENTINEL, |h| h.0),
                boundary_fingerprint(boundary, extra),
            );
            if let Some(&raw) = self.cache.borrow().get(&k) {
                return Ok(ZValue {
                    raw,
                    std_error: 0.0,
                    trunc_bound: raw * 1e-13,
                });
            }
            Some(k)
        } else {
            None
        };
        let iv = self.domain.tail_from(OrderKey(from));
        let full_boundary = match extra {
            Some(p) => boundary.with(p.clone()),
            None => boundary.clone(),
        };
        let value = z_raw(&self.spec, &self.z_method, &iv, &full_boundary, rng)?;
        if let Some(k) = key {
            self.cache.borrow_mut().insert(k, value.raw);
        }
        Ok(value)
    }

    /// Q*-mass of the key cell of `x`.
    fn cell_mass(&self, x: &Point) -> f64 {
        let w = self.spec.wbits();
        let cell = 1.0 / (1u64 << w) as f64;
        let spatial = cell.powi(x.dim() as i32);
        spatial * self.spec.law.interval_mass(x.radius(), x.radius() + cell)
    }

    /// The dependent single-point keep probability for `x`, given the kept
    /// points before it: the Papangelou factor times the partition-function
    /// ratio of the unexplored tail.
    pub fn single_point_prob<R: Rng + ?Sized>(
        &self,
        x: &Point,
        kept: &Configuration,
        rng: &mut R,
    ) -> Result<ProbEstimate> {
        let key = self.spec.codec.encode(x)?;
        let ratio = self.spec.lambda / self.spec.alpha;
        let boundary = self.gamma.union(kept);
        let h = self
            .spec
            .model
            .local_energy(x, &boundary, self.spec.wbits());
        if h == f64::INFINITY {
            return Ok(ProbEstimate {
                value: 0.0,
                error_bound: 0.0,
            });
        }
        let den = self.z_tail(key.0, &boundary, None, rng)?;
        if den.raw <= den.std_error + den.trunc_bound {
            return Err(Error::UnreliableEstimate(format!(
                "tail partition estimate {} within its error {}",
                den.raw,
                den.std_error + den.trunc_bound
            )));
        }
        let num = self.z_tail(key.0 + 1, &boundary, Some(x), rng)?;
        let raw = ratio
            * (-h).exp()
            * (self.spec.lambda * self.cell_mass(x)).exp()
            * (num.raw / den.raw);
        let rel_err = (num.std_error + num.trunc_bound) / num.raw.max(1e-300)
            + (den.std_error + den.trunc_bound) / den.raw;
        let error_bound = raw * rel_err;
        // out-of-range estimates within noise clamp back into [0, 1]; only a
        // departure far beyond the propagated one-sigma bound signals a bug
        let slack = self.clamp_tol + 6.0 * error_bound;
        if raw < -slack || raw > 1.0 + slack {
            return Err(Error::ClampViolation {
                value: raw,
                tol: slack,
            });
        }
        Ok(ProbEstimate {
            value: raw.clamp(0.0, 1.0),
            error_bound,
        })
    }

    /// Log of the joint thinning probability of observing `kept` from the
    /// dominating configuration `full`.
    pub fn joint_thin_logdensity<R: Rng + ?Sized>(
        &self,
        kept: &Configuration,
        full: &Configuration,
        rng: &mut R,
    ) -> Result<f64> {
        if !kept.iter().all(|p| full.contains(p)) {
            return Ok(f64::NEG_INFINITY);
        }
        let mut order: Vec<&Point> = full.iter().collect();
        let codec = &self.spec.codec;
        order.sort_by_key(|p| codec.encode(p).map(|k| k.0).unwrap_or(u128::MAX));
        let mut prefix = Configuration::empty();
        let mut log_density = 0.0;
        for p in order {
            let prob = self.single_point_prob(p, &prefix, rng)?;
            if kept.contains(p) {
                if prob.value == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                log_density += prob.value.ln();
                prefix.push(p.clone());
            } else {
                if prob.value == 1.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                log_density += (1.0 - prob.value).ln();
            }
        }
        Ok(log_density)
    }

    /// One draw of the dominating Poisson process on the domain.
    pub fn sample_dominating<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Configuration> {
        let sampler = self.spec.codec.interval_sampler(&self.domain, &self.spec.law);
        let mean = self.spec.alpha * sampler.total();
        poisson_on_interval(&sampler, mean, &self.domain, rng)
    }

    /// Thin a given dominating configuration: visit its points in key order,
    /// keeping each with the dependent probability given the kept prefix.
    pub fn thin_given<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &self,
        poisson: &Configuration,
        thin_rng: &mut R1,
        est_rng: &mut R2,
    ) -> Result<(Configuration, ThinDiagnostics)> {
        let codec = &self.spec.codec;
        let mut order: Vec<&Point> = poisson.iter().collect();
        order.sort_by_key(|p| codec.encode(p).map(|k| k.0).unwrap_or(u128::MAX));
        let mut kept = Configuration::empty();
        let mut diag = ThinDiagnostics::default();
        for p in order {
            let prob = self.single_point_prob(p, &kept, est_rng)?;
            diag.bias_used += prob.error_bound;
            if thin_rng.random::<f64>() < prob.value {
                kept.push(p.clone());
            }
        }
        diag.budget_exceeded = diag.bias_used > self.bias_budget;
        Ok((kept, diag))
    }

    /// Full thinning draw: `(kept, dominating)` with `kept` a realization of
    /// the specification and `dominating` the Poisson process above it.
    pub fn thin_sample(
        &self,
        stream: RngStream,
    ) -> Result<(Configuration, Configuration, ThinDiagnostics)> {
        let mut poisson_rng = stream.role(Role::Poisson).rng();
        let mut thin_rng = stream.role(Role::ThinFirst).rng();
        let mut est_rng = stream.role(Role::Estimator).rng();
        let poisson = self.sample_dominating(&mut poisson_rng)?;
        let (kept, diag) = self.thin_given(&poisson, &mut thin_rng, &mut est_rng)?;
        Ok((kept, poisson, diag))
    }

    /// Void probability of the tail `[x, end)` under the specification with
    /// this kernel's boundary: the reciprocal of the unnormalized series.
    pub fn void_probability<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R) -> Result<f64> {
        let key = self.spec.codec.encode(x)?;
        let z = self.z_tail(key.0, &self.gamma, None, rng)?;
        Ok(1.0 / z.raw)
    }
}

/// Finite-difference form of the keep probability: the derivative of the log
/// free energy of the unexplored tail, taken at a prescribed mass step
/// through the order successor. Test harness for the closed form.
pub fn fd_single_point_prob<R: Rng + ?Sized>(
    kernel: &ThinningKernel,
    x: &Point,
    kept: &Configuration,
    eps: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let spec = &kernel.spec;
    let key = spec.codec.encode(x)?;
    let boundary = kernel.gamma.union(kept);
    let z_here = kernel.z_tail(key.0, &boundary, None, rng)?;
    let successor = spec.codec.successor_at_mass(x, eps, &spec.law)?;
    let (z_there, eps_actual) = match successor {
        Successor::Point(p) => {
            let k2 = spec.codec.encode(&p)?;
            let mut scratch = RngStream::from_seed(0).rng();
            let eps_actual = spec
                .codec
                .interval_measure(
                    &OrderInterval::between(key, k2),
                    &spec.law,
                    0,
                    &mut scratch,
                )
                .value;
            (kernel.z_tail(k2.0, &boundary, None, rng)?, eps_actual)
        }
        Successor::End => {
            return Err(Error::InsufficientMass {
                requested: eps,
                available: 0.0,
            })
        }
    };
    let fd = -(z_there.raw.ln() - z_here.raw.ln()) / (spec.alpha * eps_actual);
    Ok((fd, eps_actual))
}
