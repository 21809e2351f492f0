//! Boolean-model percolation diagnostics: connection probabilities over
//! shared draws, finite-size threshold estimation, exponential-decay fits and
//! the radius-control event.

use crate::error::{Error, Result};
use crate::poisson::{sample_poisson, RadiusLaw};
use crate::space::{connected, Configuration, Probe, Window};
use crate::stats;
use rand::Rng;

#[derive(Clone, Copy, Debug)]
pub struct ConnectionEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub reps: u64,
}

/// Monte-Carlo connection probability between two probes through the
/// Boolean model at intensity `alpha`.
pub fn connection_probability<R: Rng + ?Sized>(
    window: &Window,
    alpha: f64,
    law: &RadiusLaw,
    source: &Probe,
    target: &Probe,
    reps: u64,
    rng: &mut R,
) -> Result<ConnectionEstimate> {
    if reps == 0 {
        return Err(Error::InvalidParam("reps = 0".into()));
    }
    let mut hits = 0u64;
    for _ in 0..reps {
        let omega = sample_poisson(window, alpha, law, rng)?;
        if connected(&omega, source, target, window.wbits()) {
            hits += 1;
        }
    }
    Ok(ConnectionEstimate {
        probability: hits as f64 / reps as f64,
        std_error: stats::binomial_se(hits, reps),
        reps,
    })
}

/// One cell of a shared-draw sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepCell {
    pub alpha: f64,
    pub distance: f64,
    pub hits: u64,
    pub reps: u64,
}

impl SweepCell {
    pub fn probability(&self) -> f64 {
        self.hits as f64 / self.reps as f64
    }

    pub fn std_error(&self) -> f64 {
        stats::binomial_se(self.hits, self.reps)
    }
}

/// Origin-to-ring connection probabilities over a grid of intensities and
/// distances, using one dominating draw per replicate: each point carries a
/// uniform mark and belongs to the `alpha` sample when `mark < alpha /
/// alpha_max`. Nested samples make the estimates exactly monotone in `alpha`
/// and in `-distance` replicate by replicate.
pub fn connection_sweep<R: Rng + ?Sized>(
    window: &Window,
    alphas: &[f64],
    law: &RadiusLaw,
    distances: &[f64],
    reps: u64,
    rng: &mut R,
) -> Result<Vec<SweepCell>> {
    if alphas.is_empty() || distances.is_empty() || reps == 0 {
        return Err(Error::InvalidParam("empty sweep grid".into()));
    }
    let alpha_max = alphas.iter().cloned().fold(f64::MIN, f64::max);
    if alpha_max < 0.0 {
        return Err(Error::InvalidParam("negative intensity".into()));
    }
    let dim = window.dim();
    let origin = Probe::Ball(crate::space::Point::new(&vec![0.0; dim], 0.0)?);
    let mut cells: Vec<SweepCell> = alphas
        .iter()
        .flat_map(|&a| {
            distances.iter().map(move |&d| SweepCell {
                alpha: a,
                distance: d,
                hits: 0,
                reps,
            })
        })
        .collect();
    for _ in 0..reps {
        let full = if alpha_max > 0.0 {
            sample_poisson(window, alpha_max, law, rng)?
        } else {
            Configuration::empty()
        };
        let marks: Vec<f64> = full.iter().map(|_| rng.random::<f64>()).collect();
        for (ai, &alpha) in alphas.iter().enumerate() {
            let keep = alpha / alpha_max;
            let omega: Configuration = full
                .iter()
                .zip(&marks)
                .filter(|(_, &m)| m < keep)
                .map(|(p, _)| p.clone())
                .collect();
            for (di, &dist) in distances.iter().enumerate() {
                let ring = Probe::origin_ring(dim, dist);
                if connected(&omega, &origin, &ring, window.wbits()) {
                    cells[ai * distances.len() + di].hits += 1;
                }
            }
        }
    }
    Ok(cells)
}

#[derive(Clone, Copy, Debug)]
pub struct ThresholdEstimate {
    pub alpha_c: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Finite-size estimate of the percolation threshold: origin-to-ring
/// crossing curves at two nested window sizes intersect near the threshold;
/// the crossing is located by bisection and the confidence interval comes
/// from independent repetitions.
#[allow(clippy::too_many_arguments)]
pub fn estimate_threshold<R: Rng + ?Sized>(
    dim: usize,
    law: &RadiusLaw,
    sizes: &(f64, f64),
    alpha_bracket: &(f64, f64),
    reps_per_eval: u64,
    bisect_iters: usize,
    bootstrap: usize,
    wbits: u32,
    rng: &mut R,
) -> Result<ThresholdEstimate> {
    if dim < 2 {
        return Err(Error::InvalidParam(
            "no finite threshold is asserted in dimension one".into(),
        ));
    }
    law.rho_moment(dim)?;
    let r_sup = law.sup_radius().max(1.0 / (1u64 << wbits) as f64);
    let make_window = |size: f64| -> Result<Window> {
        let half = size * 1.25;
        Window::new(&vec![-half; dim], &vec![half; dim], r_sup, wbits)
    };
    let (w_small, w_large) = (make_window(sizes.0)?, make_window(sizes.1)?);
    let origin = Probe::Ball(crate::space::Point::new(&vec![0.0; dim], 0.0)?);
    // crossing statistic: the large-scale connection probability relative to
    // the small-scale one. It vanishes in the sub-critical phase (exponential
    // decay in the distance) and approaches one in the super-critical phase;
    // the level-1/2 crossing localizes the threshold.
    let ratio = |alpha: f64, rng: &mut R| -> Result<f64> {
        let mut hit = [0u64, 0];
        for (i, (w, size)) in [(&w_small, sizes.0), (&w_large, sizes.1)].iter().enumerate()
        {
            let ring = Probe::origin_ring(dim, *size);
            for _ in 0..reps_per_eval {
                let omega = sample_poisson(w, alpha, law, rng)?;
                if connected(&omega, &origin, &ring, wbits) {
                    hit[i] += 1;
                }
            }
        }
        if hit[0] == 0 {
            return Ok(0.0);
        }
        Ok(hit[1] as f64 / hit[0] as f64)
    };
    let mut estimates = Vec::with_capacity(bootstrap);
    for _ in 0..bootstrap {
        let (mut lo, mut hi) = *alpha_bracket;
        let r_lo = ratio(lo, rng)?;
        let r_hi = ratio(hi, rng)?;
        if r_lo >= 0.5 || r_hi <= 0.5 {
            return Err(Error::SearchFailed(format!(
                "crossing curves do not separate in the bracket: \
                 ratio({lo}) = {r_lo}, ratio({hi}) = {r_hi}; enlarge the windows"
            )));
        }
        for _ in 0..bisect_iters {
            let mid = 0.5 * (lo + hi);
            if ratio(mid, rng)? < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        estimates.push(0.5 * (lo + hi));
    }
    let (mean, se) = stats::mean_se(&estimates);
    let spread = 2.0 * se + 0.5 * (alpha_bracket.1 - alpha_bracket.0) / (1 << bisect_iters) as f64;
    Ok(ThresholdEstimate {
        alpha_c: mean,
        ci_lo: mean - spread,
        ci_hi: mean + spread,
    })
}

/// Exponential decay fit of connection probabilities against distance.
#[derive(Clone, Debug)]
pub struct DecayFit {
    /// Decay rate per unit distance.
    pub kappa: f64,
    /// Prefactor of the exponential bound.
    pub prefactor: f64,
    pub r_squared: f64,
    /// The fitted (distance, probability, std_error) rows.
    pub table: Vec<(f64, f64, f64)>,
}

/// Weighted least squares of `log p` against distance.
pub fn fit_decay(table: &[(f64, f64, f64)]) -> Result<DecayFit> {
    if table.len() < 4 {
        return Err(Error::InvalidParam("need at least 4 distances".into()));
    }
    if !table.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(Error::InvalidParam("distances must increase".into()));
    }
    if table.iter().any(|&(_, p, _)| !(0.0 < p && p < 1.0)) {
        return Err(Error::InvalidParam(
            "probabilities must lie strictly inside (0, 1)".into(),
        ));
    }
    let xs: Vec<f64> = table.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = table.iter().map(|r| r.1.ln()).collect();
    let weights: Vec<f64> = table
        .iter()
        .map(|&(_, p, se)| {
            let sigma_log = (se / p).max(1e-12);
            1.0 / (sigma_log * sigma_log)
        })
        .collect();
    let (intercept, slope, r2) = stats::weighted_linear_fit(&xs, &ys, &weights);
    Ok(DecayFit {
        kappa: -slope,
        prefactor: intercept.exp(),
        r_squared: r2,
        table: table.to_vec(),
    })
}

/// The radius-control event: every ball's radius is at most half its
/// distance to the origin plus `k`.
pub fn upsilon_holds(omega: &Configuration, k: f64) -> bool {
    upsilon_threshold(omega) <= k
}

/// The smallest `k` for which the radius-control event holds.
pub fn upsilon_threshold(omega: &Configuration) -> f64 {
    omega
        .iter()
        .map(|p| {
            let norm = p.pos().iter().map(|c| c * c).sum::<f64>().sqrt();
            p.radius() - 0.5 * norm
        })
        .fold(0.0, f64::max)
}

/// Smallest `k` with empirical `P(radius-control at level k) >= 1 - eps`,
/// searched over shared samples (which makes the estimate monotone in `k`).
pub fn find_k<R: Rng + ?Sized>(
    window: &Window,
    alpha: f64,
    law: &RadiusLaw,
    eps: f64,
    reps: u64,
    k_max: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(0.0 < eps) {
        return Err(Error::InvalidParam("eps must be positive".into()));
    }
    law.rho_moment(window.dim())?;
    if eps >= 1.0 {
        return Ok(0.0);
    }
    let mut needed: Vec<f64> = (0..reps)
        .map(|_| sample_poisson(window, alpha, law, rng).map(|w| upsilon_threshold(&w)))
        .collect::<Result<_>>()?;
    needed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((1.0 - eps) * reps as f64).ceil() as usize;
    let k_hat = needed[idx.min(needed.len() - 1)];
    if k_hat > k_max {
        return Err(Error::SearchFailed(format!(
            "no k <= {k_max} reaches coverage 1 - {eps}: needed {k_hat}"
        )));
    }
    Ok(k_hat)
}
