//! Boundary-influence experiments: the disagreement-percolation inequality
//! on coupled samples, the uniqueness scan over growing windows with extreme
//! boundary conditions, and decay of correlations between distant cells.

use crate::coupling::{disagreement_sample, CouplingContext};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::order::OrderInterval;
use crate::partition::{gibbs_rejection_sample, GibbsSpec};
use crate::percolation::{fit_decay, DecayFit};
use crate::poisson::RadiusLaw;
use crate::rng::RngStream;
use crate::space::{connected, Configuration, Point, Probe, Window};
use crate::stats;
use rand::Rng;

/// Decidable events on the configuration inside a spatial box.
#[derive(Clone, Debug, PartialEq)]
pub enum EventSpec {
    /// At least `k` points in the box.
    CountAtLeast(usize),
    /// No point in the box.
    Vacant,
    /// Always true (the influence gap is identically zero).
    Always,
}

impl EventSpec {
    pub fn eval(&self, count: usize) -> bool {
        match self {
            EventSpec::CountAtLeast(k) => count >= *k,
            EventSpec::Vacant => count == 0,
            EventSpec::Always => true,
        }
    }

    pub fn label(&self) -> String {
        match self {
            EventSpec::CountAtLeast(k) => format!("count>={k}"),
            EventSpec::Vacant => "vacant".into(),
            EventSpec::Always => "always".into(),
        }
    }
}

fn count_in_box(cfg: &Configuration, lo: &[f64], hi: &[f64]) -> usize {
    cfg.iter()
        .filter(|p| {
            p.pos()
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&x, (&a, &b))| x >= a && x < b)
        })
        .count()
}

/// One row of the influence experiment: the observable difference between
/// the two coupled Gibbs instances on an inner box, against the percolation
/// bound read off the same dominating draws.
#[derive(Clone, Debug)]
pub struct InfluenceReport {
    pub event: String,
    /// Distance from the inner box to the window boundary.
    pub distance: f64,
    pub direct_gap: f64,
    pub direct_se: f64,
    pub percolation_bound: f64,
    pub bound_se: f64,
    pub reps: u64,
}

/// Estimate the boundary-influence gap and its percolation bound from one
/// batch of disagreement couplings (variance-coupled: both columns use the
/// same samples).
pub fn boundary_influence(
    ctx: &CouplingContext,
    inner_lo: &[f64],
    inner_hi: &[f64],
    gamma1: &Configuration,
    gamma2: &Configuration,
    event: &EventSpec,
    reps: u64,
    stream: RngStream,
) -> Result<InfluenceReport> {
    let wbits = ctx.spec.wbits();
    let inner_probe = Probe::Box {
        lo: inner_lo.to_vec(),
        hi: inner_hi.to_vec(),
    };
    let boundary = gamma1.union(gamma2);
    let target = Probe::Config(boundary);
    let mut diff_sum = 0.0;
    let mut diff_sq = 0.0;
    let mut bound_hits = 0u64;
    for i in 0..reps {
        let s = disagreement_sample(ctx, gamma1, gamma2, stream.replicate(i))?;
        let e1 = event.eval(count_in_box(&s.xi1, inner_lo, inner_hi)) as i32;
        let e2 = event.eval(count_in_box(&s.xi2, inner_lo, inner_hi)) as i32;
        let d = (e1 - e2) as f64;
        diff_sum += d;
        diff_sq += d * d;
        if connected(&s.xi3, &inner_probe, &target, wbits) {
            bound_hits += 1;
        }
    }
    let n = reps as f64;
    let mean_d = diff_sum / n;
    let var_d = (diff_sq / n - mean_d * mean_d).max(0.0) / n;
    let distance = inner_lo
        .iter()
        .zip(inner_hi)
        .zip(ctx.spec.window.lo().iter().zip(ctx.spec.window.hi()))
        .map(|((&il, &ih), (&wl, &wh))| (il - wl).min(wh - ih))
        .fold(f64::MAX, f64::min);
    Ok(InfluenceReport {
        event: event.label(),
        distance,
        direct_gap: mean_d.abs(),
        direct_se: var_d.sqrt(),
        percolation_bound: bound_hits as f64 / n,
        bound_se: stats::binomial_se(bound_hits, reps),
        reps,
    })
}

/// A dense wall of touching balls hugging both faces of a one-dimensional
/// window: the adversarial boundary of the uniqueness scan.
pub fn dense_boundary_1d(window: &Window, radius: f64, rods_per_side: usize) -> Configuration {
    let w = window.wbits();
    let gap = 1.0 / (1u64 << w.min(8)) as f64;
    let mut points = Vec::new();
    for side in [0usize, 1] {
        for j in 0..rods_per_side {
            let offset = radius + gap + 2.0 * radius * j as f64;
            let x = if side == 0 {
                window.lo()[0] - offset
            } else {
                window.hi()[0] + offset
            };
            points.push(Point::quantized(&[x], radius, w).expect("wall rod"));
        }
    }
    Configuration::new(points).expect("distinct wall rods")
}

#[derive(Clone, Copy, Debug)]
pub struct ScanRow {
    pub n: f64,
    pub gap: f64,
    pub se: f64,
}

/// Worst-case influence of extreme boundary conditions (empty against a
/// dense wall) on a fixed central event, as the window half-width grows.
/// Sampling is by the exact rejection sampler, so the rows are oracle-grade.
#[allow(clippy::too_many_arguments)]
pub fn uniqueness_scan<R: Rng + ?Sized>(
    model: &Model,
    law: &RadiusLaw,
    lambda: f64,
    alpha: Option<f64>,
    r_max: f64,
    wbits: u32,
    event: &EventSpec,
    inner_half: f64,
    ns: &[f64],
    reps: u64,
    rng: &mut R,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if n < inner_half {
            return Err(Error::InvalidParam(format!(
                "window half-width {n} smaller than the inner box {inner_half}"
            )));
        }
        let window = Window::new(&[-n], &[n], r_max, wbits)?;
        let spec = GibbsSpec::new(model.clone(), window.clone(), law.clone(), lambda, alpha)?;
        let radius = spec.atom_radius().unwrap_or(r_max);
        let wall = dense_boundary_1d(&window, radius, 5);
        let empty = Configuration::empty();
        let mut probs = Vec::with_capacity(2);
        for boundary in [&empty, &wall] {
            let mut hits = 0u64;
            for _ in 0..reps {
                let omega =
                    gibbs_rejection_sample(&spec, &OrderInterval::full(), boundary, rng)?;
                if event.eval(count_in_box(&omega, &[-inner_half], &[inner_half])) {
                    hits += 1;
                }
            }
            probs.push((hits as f64 / reps as f64, stats::binomial_se(hits, reps)));
        }
        rows.push(ScanRow {
            n,
            gap: (probs[0].0 - probs[1].0).abs(),
            se: (probs[0].1.powi(2) + probs[1].1.powi(2)).sqrt(),
        });
    }
    Ok(rows)
}

/// Covariance diagnostics between the configurations of two cells at growing
/// separation: indicator covariance and the count-covariance density (the
/// truncated pair-correlation surrogate), with an exponential fit.
#[derive(Clone, Debug)]
pub struct CorrelationDecay {
    pub rows: Vec<CorrelationRow>,
    pub fit: Option<DecayFit>,
}

#[derive(Clone, Copy, Debug)]
pub struct CorrelationRow {
    pub separation: f64,
    pub indicator_cov: f64,
    pub indicator_se: f64,
    /// cov(count1, count2) / (|cell1| |cell2|)
    pub count_cov_density: f64,
    pub count_se: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn correlation_decay<R: Rng + ?Sized>(
    spec: &GibbsSpec,
    cell_len: f64,
    separations: &[f64],
    reps: u64,
    rng: &mut R,
) -> Result<CorrelationDecay> {
    let dim = spec.window.dim();
    if dim != 1 {
        return Err(Error::InvalidParam(
            "correlation cells are one-dimensional here".into(),
        ));
    }
    let mut rows = Vec::with_capacity(separations.len());
    const BATCHES: usize = 20;
    for &sep in separations {
        // cells [-sep/2 - c, -sep/2) and [sep/2, sep/2 + c)
        let lo1 = [-0.5 * sep - cell_len];
        let hi1 = [-0.5 * sep];
        let lo2 = [0.5 * sep];
        let hi2 = [0.5 * sep + cell_len];
        let per_batch = (reps as usize / BATCHES).max(2);
        let mut ind_cov = Vec::with_capacity(BATCHES);
        let mut cnt_cov = Vec::with_capacity(BATCHES);
        for _ in 0..BATCHES {
            let mut sums = [0.0f64; 5]; // e1, e2, e12, n1n2, n1, n2
            let mut n1s = 0.0;
            let mut n2s = 0.0;
            for _ in 0..per_batch {
                let omega = gibbs_rejection_sample(
                    spec,
                    &OrderInterval::full(),
                    &Configuration::empty(),
                    rng,
                )?;
                let n1 = count_in_box(&omega, &lo1, &hi1) as f64;
                let n2 = count_in_box(&omega, &lo2, &hi2) as f64;
                let e1 = (n1 >= 1.0) as u8 as f64;
                let e2 = (n2 >= 1.0) as u8 as f64;
                sums[0] += e1;
                sums[1] += e2;
                sums[2] += e1 * e2;
                sums[3] += n1 * n2;
                n1s += n1;
                n2s += n2;
            }
            let m = per_batch as f64;
            ind_cov.push(sums[2] / m - (sums[0] / m) * (sums[1] / m));
            cnt_cov.push(
                (sums[3] / m - (n1s / m) * (n2s / m)) / (cell_len * cell_len),
            );
        }
        let (ic, ic_se) = stats::mean_se(&ind_cov);
        let (cc, cc_se) = stats::mean_se(&cnt_cov);
        rows.push(CorrelationRow {
            separation: sep,
            indicator_cov: ic,
            indicator_se: ic_se,
            count_cov_density: cc,
            count_se: cc_se,
        });
    }
    // fit |count covariance| where it stands above noise
    let table: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.count_cov_density.abs() > r.count_se && r.count_cov_density.abs() < 1.0)
        .map(|r| (r.separation, r.count_cov_density.abs(), r.count_se))
        .collect();
    let fit = if table.len() >= 4 {
        fit_decay(&table).ok()
    } else {
        None
    };
    Ok(CorrelationDecay { rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::ZMethod;

    fn crcm_ctx(half: f64, lambda: f64) -> CouplingContext {
        let window = Window::new(&[-half], &[half], 0.25, 32).unwrap();
        let spec = GibbsSpec::new(
            Model::crcm(2.0).unwrap(),
            window,
            RadiusLaw::Delta(0.125),
            lambda,
            None,
        )
        .unwrap();
        CouplingContext::new(spec, ZMethod::Exact1d)
    }

    #[test]
    fn equal_boundaries_with_shared_streams_have_zero_gap() {
        let ctx = crcm_ctx(0.75, 0.3).with_shared_streams(true);
        let wall = dense_boundary_1d(&ctx.spec.window, 0.125, 3);
        let report = boundary_influence(
            &ctx,
            &[-0.25],
            &[0.25],
            &wall,
            &wall,
            &EventSpec::CountAtLeast(1),
            300,
            RngStream::from_seed(90),
        )
        .unwrap();
        assert_eq!(report.direct_gap, 0.0);
    }

    #[test]
    fn trivial_event_has_zero_gap() {
        let ctx = crcm_ctx(0.75, 0.3);
        let wall = dense_boundary_1d(&ctx.spec.window, 0.125, 3);
        let report = boundary_influence(
            &ctx,
            &[-0.25],
            &[0.25],
            &wall,
            &Configuration::empty(),
            &EventSpec::Always,
            300,
            RngStream::from_seed(91),
        )
        .unwrap();
        assert_eq!(report.direct_gap, 0.0);
    }

    #[test]
    fn influence_gap_obeys_percolation_bound() {
        let ctx = crcm_ctx(1.0, 0.3);
        let wall = dense_boundary_1d(&ctx.spec.window, 0.125, 4);
        let report = boundary_influence(
            &ctx,
            &[-0.25],
            &[0.25],
            &wall,
            &Configuration::empty(),
            &EventSpec::CountAtLeast(1),
            2000,
            RngStream::from_seed(92),
        )
        .unwrap();
        let slack = 3.0 * (report.direct_se + report.bound_se);
        assert!(
            report.direct_gap <= report.percolation_bound + slack,
            "gap {} vs bound {} (slack {slack})",
            report.direct_gap,
            report.percolation_bound
        );
    }

    #[test]
    fn uniqueness_scan_examples() {
        let mut rng = RngStream::from_seed(93).rng();
        // lambda -> 0: the process is empty regardless of the boundary
        let rows = uniqueness_scan(
            &Model::crcm(2.0).unwrap(),
            &RadiusLaw::Delta(0.125),
            1e-9,
            None,
            0.25,
            32,
            &EventSpec::CountAtLeast(1),
            0.25,
            &[0.5, 1.0],
            300,
            &mut rng,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.gap == 0.0));
    }

    #[test]
    fn uniqueness_gap_shrinks_with_window() {
        let mut rng = RngStream::from_seed(94).rng();
        let rows = uniqueness_scan(
            &Model::crcm(2.0).unwrap(),
            &RadiusLaw::Delta(0.125),
            0.3,
            None,
            0.25,
            32,
            &EventSpec::CountAtLeast(1),
            0.25,
            &[0.5, 1.0, 1.5, 2.0],
            4000,
            &mut rng,
        )
        .unwrap();
        let last = rows.last().unwrap();
        assert!(
            last.gap <= 2.0 * last.se,
            "gap {} vs 2se {}",
            last.gap,
            2.0 * last.se
        );
        // and the first window feels the wall
        assert!(rows[0].gap > rows.last().unwrap().gap);
    }

    #[test]
    fn poisson_cells_are_uncorrelated() {
        let window = Window::new(&[-2.0], &[2.0], 0.25, 32).unwrap();
        let spec = GibbsSpec::new(
            Model::Ideal,
            window,
            RadiusLaw::Delta(0.125),
            1.0,
            None,
        )
        .unwrap();
        let mut rng = RngStream::from_seed(95).rng();
        let decay = correlation_decay(&spec, 0.5, &[1.0, 2.0], 6000, &mut rng).unwrap();
        for row in &decay.rows {
            assert!(
                row.indicator_cov.abs() <= 3.0 * row.indicator_se.max(1e-4),
                "cov {} at separation {}",
                row.indicator_cov,
                row.separation
            );
        }
    }

    #[test]
    fn zero_separation_covariance_is_variance() {
        let window = Window::new(&[-2.0], &[2.0], 0.25, 32).unwrap();
        let spec = GibbsSpec::new(
            Model::HardSphere,
            window,
            RadiusLaw::Delta(0.125),
            0.8,
            None,
        )
        .unwrap();
        let mut rng = RngStream::from_seed(96).rng();
        // back-to-back cells of zero separation share a corner; variance of a
        // count is nonnegative, so the diagonal row must be nonnegative
        let mut hits = 0u64;
        let reps = 500;
        for _ in 0..reps {
            let omega = gibbs_rejection_sample(
                &spec,
                &OrderInterval::full(),
                &Configuration::empty(),
                &mut rng,
            )
            .unwrap();
            let n = count_in_box(&omega, &[-0.25], &[0.25]);
            hits += (n * n) as u64;
        }
        assert!(hits > 0);
    }

    #[test]
    fn hard_rod_correlations_decay_exponentially() {
        // dense rods so the covariance envelope stands above the Monte-Carlo
        // noise at every separation; small cells avoid averaging over the
        // oscillation of the pair correlation
        let window = Window::new(&[-1.0], &[1.0], 0.25, 32).unwrap();
        let spec = GibbsSpec::new(
            Model::HardSphere,
            window,
            RadiusLaw::Delta(0.2),
            3.0,
            None,
        )
        .unwrap();
        let mut rng = RngStream::from_seed(97).rng();
        let decay = correlation_decay(
            &spec,
            0.1,
            &[0.4, 0.55, 0.7, 0.85],
            60_000,
            &mut rng,
        )
        .unwrap();
        let fit = decay.fit.expect("enough signal to fit");
        assert!(fit.r_squared > 0.8, "R^2 = {}", fit.r_squared);
        assert!(fit.kappa > 0.0);
    }
}
