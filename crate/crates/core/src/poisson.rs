//! Poisson point process sampling on the ball domain and the radius-law
//! abstraction shared by every sampler and measure computation.

use crate::error::{Error, Result};
use crate::space::{from_raw, quantize_floor, to_raw, Configuration, Point, Window};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::collections::HashSet;

/// Law of the ball radius. All laws here are supported on `[0, r_max]` of
/// the window they are used with; unbounded laws must be truncated first
/// (see [`RadiusLaw::truncated_exp`]), with the discarded tail reported.
#[derive(Clone, Debug, PartialEq)]
pub enum RadiusLaw {
    /// Unit mass at a single radius.
    Delta(f64),
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Piecewise-linear CDF through `(r, F(r))` knots; `tail_mass` records
    /// probability discarded by truncating an unbounded source law.
    Tabulated {
        rs: Vec<f64>,
        fs: Vec<f64>,
        tail_mass: f64,
    },
}

impl RadiusLaw {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi) {
            return Err(Error::InvalidParam(format!(
                "uniform radius bounds [{lo}, {hi}]"
            )));
        }
        Ok(RadiusLaw::Uniform { lo, hi })
    }

    pub fn tabulated(rs: Vec<f64>, fs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if rs.len() != fs.len() || rs.len() < 2 {
            return Err(Error::InvalidParam("need >= 2 CDF knots".into()));
        }
        if !rs.windows(2).all(|w| w[0] < w[1]) || rs[0] < 0.0 {
            return Err(Error::InvalidParam("knot radii must increase from >= 0".into()));
        }
        if !fs.windows(2).all(|w| w[0] <= w[1]) || fs[0] != 0.0 {
            return Err(Error::InvalidParam("CDF must start at 0 and be monotone".into()));
        }
        let total = *fs.last().unwrap();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::UnnormalizedLaw(total));
        }
        Ok(RadiusLaw::Tabulated { rs, fs, tail_mass })
    }

    /// Exponential(rate) truncated at `r_max` and renormalized, tabulated on
    /// `n_knots` exact CDF values. The discarded tail mass is recorded.
    pub fn truncated_exp(rate: f64, r_max: f64, n_knots: usize) -> Result<Self> {
        if !(rate > 0.0 && r_max > 0.0 && n_knots >= 2) {
            return Err(Error::InvalidParam("truncated_exp parameters".into()));
        }
        let tail = (-rate * r_max).exp();
        let norm = 1.0 - tail;
        let mut rs = Vec::with_capacity(n_knots);
        let mut fs = Vec::with_capacity(n_knots);
        for i in 0..n_knots {
            let r = r_max * i as f64 / (n_knots - 1) as f64;
            rs.push(r);
            fs.push(((1.0 - (-rate * r).exp()) / norm).min(1.0));
        }
        *fs.last_mut().unwrap() = 1.0;
        RadiusLaw::tabulated(rs, fs, tail)
    }

    /// Snap atoms of the law onto the `wbits` grid (floor), so sampled radii
    /// round-trip exactly through order keys.
    pub fn snapped(&self, wbits: u32) -> RadiusLaw {
        match self {
            RadiusLaw::Delta(r) => RadiusLaw::Delta(quantize_floor(*r, wbits)),
            other => other.clone(),
        }
    }

    /// Largest radius carrying mass.
    pub fn sup_radius(&self) -> f64 {
        match self {
            RadiusLaw::Delta(r) => *r,
            RadiusLaw::Uniform { hi, .. } => *hi,
            RadiusLaw::Tabulated { rs, .. } => *rs.last().unwrap(),
        }
    }

    /// Probability mass discarded by truncation, zero for native laws.
    pub fn tail_mass(&self) -> f64 {
        match self {
            RadiusLaw::Tabulated { tail_mass, .. } => *tail_mass,
            _ => 0.0,
        }
    }

    /// Check the law is carried by `[0, r_max]`.
    pub fn validate(&self, r_max: f64) -> Result<()> {
        if self.sup_radius() > r_max {
            return Err(Error::InvalidParam(format!(
                "radius law reaches {} beyond r_max {}",
                self.sup_radius(),
                r_max
            )));
        }
        let total = self.interval_mass(0.0, r_max + 1.0);
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::UnnormalizedLaw(total));
        }
        Ok(())
    }

    fn cdf(&self, x: f64) -> f64 {
        match self {
            RadiusLaw::Delta(r) => {
                if x > *r {
                    1.0
                } else {
                    0.0
                }
            }
            RadiusLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            RadiusLaw::Tabulated { rs, fs, .. } => {
                if x <= rs[0] {
                    return fs[0] * (x >= rs[0]) as u8 as f64;
                }
                if x >= *rs.last().unwrap() {
                    return *fs.last().unwrap();
                }
                let j = rs.partition_point(|&r| r <= x) - 1;
                let t = (x - rs[j]) / (rs[j + 1] - rs[j]);
                fs[j] + t * (fs[j + 1] - fs[j])
            }
        }
    }

    /// Q-mass of the half-open interval `[a, b)`.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            RadiusLaw::Delta(r) => ((a <= *r) && (*r < b)) as u8 as f64,
            _ => (self.cdf(b) - self.cdf(a)).max(0.0),
        }
    }

    /// Draw a radius (unquantized).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            RadiusLaw::Delta(r) => *r,
            RadiusLaw::Uniform { lo, hi } => rng.random_range(*lo..*hi),
            RadiusLaw::Tabulated { rs, fs, .. } => {
                let u: f64 = rng.random();
                inverse_cdf(rs, fs, u)
            }
        }
    }

    /// Draw a radius conditioned on `[a, b)`; `None` if the interval carries
    /// no mass.
    pub fn sample_in<R: Rng + ?Sized>(&self, a: f64, b: f64, rng: &mut R) -> Option<f64> {
        let mass = self.interval_mass(a, b);
        if mass <= 0.0 {
            return None;
        }
        match self {
            RadiusLaw::Delta(r) => Some(*r),
            RadiusLaw::Uniform { lo, hi } => {
                let (a, b) = (a.max(*lo), b.min(*hi));
                Some(rng.random_range(a..b))
            }
            RadiusLaw::Tabulated { rs, fs, .. } => {
                let fa = self.cdf(a);
                let u = fa + rng.random::<f64>() * mass;
                Some(inverse_cdf(rs, fs, u).clamp(a, b))
            }
        }
    }

    /// The d-th moment of the radius, `∫ r^d Q(dr)`; the integrability gate
    /// for the percolation threshold.
    pub fn rho_moment(&self, d: usize) -> Result<f64> {
        if d == 0 {
            return Ok(1.0);
        }
        let value = match self {
            RadiusLaw::Delta(r) => r.powi(d as i32),
            RadiusLaw::Uniform { lo, hi } => {
                let p = d as f64 + 1.0;
                (hi.powf(p) - lo.powf(p)) / (p * (hi - lo))
            }
            RadiusLaw::Tabulated { rs, fs, .. } => {
                let p = d as f64 + 1.0;
                let mut acc = 0.0;
                for j in 0..rs.len() - 1 {
                    let density = (fs[j + 1] - fs[j]) / (rs[j + 1] - rs[j]);
                    acc += density * (rs[j + 1].powf(p) - rs[j].powf(p)) / p;
                }
                acc
            }
        };
        if !value.is_finite() {
            return Err(Error::DivergentMoment(format!("rho_moment d={d}")));
        }
        Ok(value)
    }
}

fn inverse_cdf(rs: &[f64], fs: &[f64], u: f64) -> f64 {
    let u = u.clamp(0.0, *fs.last().unwrap());
    let j = fs.partition_point(|&f| f < u).min(fs.len() - 1).max(1) - 1;
    let span = fs[j + 1] - fs[j];
    if span <= 0.0 {
        return rs[j];
    }
    let t = (u - fs[j]) / span;
    rs[j] + t * (rs[j + 1] - rs[j])
}

const MAX_COLLISION_RETRIES: usize = 64;

/// Sample the Poisson process with intensity `alpha * (Lebesgue x Q)` on the
/// window domain. Coordinates are quantized to grid cells; the rare key
/// collision is resolved by resampling the colliding point, which keeps the
/// output simple.
pub fn sample_poisson<R: Rng + ?Sized>(
    window: &Window,
    alpha: f64,
    law: &RadiusLaw,
    rng: &mut R,
) -> Result<Configuration> {
    if alpha < 0.0 {
        return Err(Error::InvalidParam(format!("alpha {alpha} < 0")));
    }
    let mean = alpha * window.volume();
    if mean == 0.0 {
        return Ok(Configuration::empty());
    }
    let law = law.snapped(window.wbits());
    law.validate(window.r_max())?;
    let n = Poisson::new(mean)
        .map_err(|e| Error::InvalidParam(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let wbits = window.wbits();
    let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut tries = 0;
        loop {
            let point = sample_domain_point(window, &law, rng);
            let mut cells: Vec<i64> =
                point.pos().iter().map(|&c| to_raw(c, wbits)).collect();
            cells.push(to_raw(point.radius(), wbits));
            if seen.insert(cells) {
                points.push(point);
                break;
            }
            tries += 1;
            if tries > MAX_COLLISION_RETRIES {
                return Err(Error::SearchFailed(
                    "could not place a distinct point; window too coarse".into(),
                ));
            }
        }
    }
    Configuration::new(points)
}

/// One point of the unit-intensity reference measure on the window domain:
/// uniform cell per spatial axis, radius from Q floored to its cell.
pub fn sample_domain_point<R: Rng + ?Sized>(
    window: &Window,
    law: &RadiusLaw,
    rng: &mut R,
) -> Point {
    let wbits = window.wbits();
    let pos: Vec<f64> = window
        .lo()
        .iter()
        .zip(window.hi())
        .map(|(&a, &b)| {
            let cells = to_raw(b, wbits) - to_raw(a, wbits);
            from_raw(to_raw(a, wbits) + rng.random_range(0..cells), wbits)
        })
        .collect();
    let radius = quantize_floor(law.sample(rng), wbits);
    Point::new(&pos, radius).expect("in-window point")
}
