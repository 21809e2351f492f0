//! Partition-function oracles and the exact rejection sampler for the Gibbs
//! specification: the ground truth the thinning and coupling constructions
//! are validated against.

pub mod exact;
pub mod pw;
mod series;

pub use series::{energy_of, z_series_mc, SeriesEstimate, SeriesOptions};

use crate::error::{Error, Result};
use crate::models::{dom_level, hamiltonian, Model};
use crate::order::{ivset, spatial_sections_1d, Measure, OrderCodec, OrderInterval};
use crate::poisson::RadiusLaw;
use crate::space::{component_count, Configuration, Point, Window};
use crate::stats;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// One Gibbs specification: model, window geometry, radius law, activity and
/// the dominating intensity. Everything downstream (partition estimates,
/// thinning, coupling) works against this bundle.
#[derive(Clone, Debug)]
pub struct GibbsSpec {
    pub model: Model,
    pub window: Window,
    pub codec: OrderCodec,
    pub law: RadiusLaw,
    pub lambda: f64,
    pub alpha: f64,
}

impl GibbsSpec {
    /// Validate and bundle. `alpha = None` uses the domination level of the
    /// model; an explicit `alpha` below that level is rejected.
    pub fn new(
        model: Model,
        window: Window,
        law: RadiusLaw,
        lambda: f64,
        alpha: Option<f64>,
    ) -> Result<Self> {
        let codec = OrderCodec::for_window(&window)?;
        let law = law.snapped(window.wbits());
        law.validate(window.r_max())?;
        let dom = dom_level(&model, lambda)?;
        let alpha = alpha.unwrap_or(dom);
        if alpha < dom * (1.0 - 1e-12) {
            return Err(Error::DomViolation(format!(
                "alpha {alpha} below domination level {dom}"
            )));
        }
        Ok(GibbsSpec {
            model,
            window,
            codec,
            law,
            lambda,
            alpha,
        })
    }

    pub fn wbits(&self) -> u32 {
        self.window.wbits()
    }

    /// The fixed ball radius when the law is an atom, for the 1-d oracles.
    pub fn atom_radius(&self) -> Option<f64> {
        match self.law {
            RadiusLaw::Delta(r) => Some(r),
            _ => None,
        }
    }
}

/// How to evaluate partition functions.
#[derive(Clone, Debug, PartialEq)]
pub enum ZMethod {
    /// Monte-Carlo series quadrature; works for every model and domain.
    SeriesMc(SeriesOptions),
    /// Closed-form/DP series for one-dimensional fixed-radius models.
    Exact1d,
}

/// Unnormalized partition series with error components.
#[derive(Clone, Copy, Debug)]
pub struct ZValue {
    pub raw: f64,
    pub std_error: f64,
    pub trunc_bound: f64,
}

impl ZValue {
    fn exact(raw: f64) -> Self {
        ZValue {
            raw,
            std_error: 0.0,
            trunc_bound: raw * 1e-13,
        }
    }
}

/// Normalized partition-function estimate.
#[derive(Clone, Copy, Debug)]
pub struct ZEstimate {
    /// `Z = e^{-lambda mass} * raw`.
    pub value: f64,
    pub raw: f64,
    pub mass: Measure,
    pub truncation_error: f64,
    pub mc_error: f64,
    pub n_max: usize,
}

/// Evaluate the unnormalized series `z(iv, gamma)`.
pub fn z_raw<R: Rng + ?Sized>(
    spec: &GibbsSpec,
    method: &ZMethod,
    iv: &OrderInterval,
    gamma: &Configuration,
    rng: &mut R,
) -> Result<ZValue> {
    match method {
        ZMethod::SeriesMc(opts) => {
            let est = z_series_mc(spec, iv, gamma, opts, rng)?;
            Ok(ZValue {
                raw: est.raw,
                std_error: est.std_error,
                trunc_bound: est.trunc_bound,
            })
        }
        ZMethod::Exact1d => z_exact_1d(spec, iv, gamma),
    }
}

/// Exact series for 1-d fixed-radius models on interval-union sections.
fn z_exact_1d(spec: &GibbsSpec, iv: &OrderInterval, gamma: &Configuration) -> Result<ZValue> {
    if spec.codec.components() != 2 {
        return Err(Error::InvalidParam(
            "exact oracle needs a one-dimensional window".into(),
        ));
    }
    let radius = spec.atom_radius().ok_or_else(|| {
        Error::InvalidParam("exact oracle needs an atomic radius law".into())
    })?;
    let sections = spatial_sections_1d(&spec.codec, iv, radius)?;
    let raw = match &spec.model {
        Model::Ideal => exact::z_ideal(spec.lambda, ivset::total_len(&sections)),
        Model::HardSphere => {
            let obstacles: Vec<(f64, f64)> = gamma
                .iter()
                .map(|p| (p.pos()[0], p.radius()))
                .collect();
            exact::z_hard_rods(spec.lambda, &sections, radius, &obstacles)
        }
        Model::Crcm { q } => {
            let mut fixed = Vec::with_capacity(gamma.len());
            for p in gamma.iter() {
                if p.radius() != radius {
                    return Err(Error::InvalidParam(
                        "crcm oracle needs equal radii on conditioned rods".into(),
                    ));
                }
                fixed.push(p.pos()[0]);
            }
            exact::z_crcm_equal_radii(spec.lambda, *q, &sections, radius, &fixed)?
        }
        Model::Strauss { beta } => {
            let (len, overlaps) = strauss_complete_geometry(&sections, radius, gamma)?;
            exact::z_strauss_complete(spec.lambda, len, *beta, overlaps)
        }
        Model::AreaInteraction { .. } => {
            return Err(Error::InvalidParam(
                "no exact oracle for the area interaction".into(),
            ))
        }
    };
    Ok(ZValue::exact(raw))
}

/// Validate the completely-overlapping Strauss regime: every pair of section
/// points interacts, and each conditioned ball reaches all sections or none.
fn strauss_complete_geometry(
    sections: &[(f64, f64)],
    radius: f64,
    gamma: &Configuration,
) -> Result<(f64, usize)> {
    if sections.is_empty() {
        return Ok((0.0, 0));
    }
    let hull = (sections[0].0, sections.last().unwrap().1);
    if hull.1 - hull.0 > 2.0 * radius {
        return Err(Error::InvalidParam(
            "strauss oracle needs all pairs within interaction reach".into(),
        ));
    }
    let mut overlaps = 0;
    for y in gamma.iter() {
        let reach = y.radius() + radius;
        let (a, b) = (y.pos()[0] - reach, y.pos()[0] + reach);
        if a <= hull.0 && hull.1 <= b {
            overlaps += 1;
        } else if b <= hull.0 || a >= hull.1 {
            // out of reach of every section point
        } else {
            return Err(Error::InvalidParam(
                "strauss oracle needs all-or-nothing boundary reach".into(),
            ));
        }
    }
    Ok((ivset::total_len(sections), overlaps))
}

/// The partition function with both error components, normalized as the
/// expectation of the Boltzmann factor under the reference Poisson process.
pub fn z_bruteforce<R: Rng + ?Sized>(
    spec: &GibbsSpec,
    method: &ZMethod,
    iv: &OrderInterval,
    gamma: &Configuration,
    rng: &mut R,
) -> Result<ZEstimate> {
    match method {
        ZMethod::SeriesMc(opts) => {
            let est = z_series_mc(spec, iv, gamma, opts, rng)?;
            let norm = (-spec.lambda * est.mass.value).exp();
            Ok(ZEstimate {
                value: norm * est.raw,
                raw: est.raw,
                mass: est.mass,
                truncation_error: norm * est.trunc_bound,
                mc_error: norm * est.std_error
                    + est.raw * norm * spec.lambda * est.mass.std_error,
                n_max: est.n_max,
            })
        }
        ZMethod::Exact1d => {
            let radius = spec.atom_radius().ok_or_else(|| {
                Error::InvalidParam("exact oracle needs an atomic radius law".into())
            })?;
            let sections = spatial_sections_1d(&spec.codec, iv, radius)?;
            let mut mass = ivset::total_len(&sections);
            if iv.region.is_none() {
                // sections already encode only the key interval; the measure
                // agrees with the generic block computation
                mass = spec
                    .codec
                    .interval_measure(iv, &spec.law, 0, rng)
                    .value;
            }
            let v = z_exact_1d(spec, iv, gamma)?;
            let norm = (-spec.lambda * mass).exp();
            Ok(ZEstimate {
                value: norm * v.raw,
                raw: v.raw,
                mass: Measure::exact(mass),
                truncation_error: norm * v.trunc_bound,
                mc_error: 0.0,
                n_max: 0,
            })
        }
    }
}

/// Acceptance probability of a proposal under the specification: the density
/// of the Gibbs law against the dominating Poisson process. Always in [0, 1]
/// when the domination bound holds; a larger value is reported as an error.
pub fn acceptance_probability(
    spec: &GibbsSpec,
    omega: &Configuration,
    gamma: &Configuration,
) -> Result<f64> {
    let h = hamiltonian(&spec.model, &spec.window, omega, gamma)?;
    let p = (spec.lambda / spec.alpha).powi(omega.len() as i32) * (-h).exp();
    if p > 1.0 + 1e-9 {
        return Err(Error::DomViolation(format!(
            "acceptance ratio {p} > 1; domination bound is wrong"
        )));
    }
    Ok(p.min(1.0))
}

const MAX_REJECTION_ATTEMPTS: usize = 1_000_000;

/// Exact sampler for the Gibbs specification on an order-interval domain:
/// propose from the dominating Poisson process, accept with the density.
/// This is the independent oracle the thinning construction is tested
/// against.
pub fn gibbs_rejection_sample<R: Rng + ?Sized>(
    spec: &GibbsSpec,
    iv: &OrderInterval,
    gamma: &Configuration,
    rng: &mut R,
) -> Result<Configuration> {
    let sampler = spec.codec.interval_sampler(iv, &spec.law);
    let mean = spec.alpha * sampler.total();
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let omega = poisson_on_interval(&sampler, mean, iv, rng)?;
        let p = acceptance_probability(spec, &omega, gamma)?;
        if p == 1.0 || rng.random::<f64>() < p {
            return Ok(omega);
        }
    }
    Err(Error::SearchFailed(
        "rejection sampler exhausted its attempt budget".into(),
    ))
}

/// Poisson draw on an interval domain: counts from the unrestricted mass,
/// points filtered by the region (restriction of a Poisson process to a
/// subset is a Poisson process on the subset).
pub fn poisson_on_interval<R: Rng + ?Sized>(
    sampler: &crate::order::IntervalSampler,
    mean: f64,
    iv: &OrderInterval,
    rng: &mut R,
) -> Result<Configuration> {
    if mean <= 0.0 || sampler.is_empty() {
        return Ok(Configuration::empty());
    }
    let n = Poisson::new(mean)
        .map_err(|e| Error::InvalidParam(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut points: Vec<Point> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut guard = 0;
        loop {
            let p = sampler.sample_unrestricted(rng);
            if !points.contains(&p) {
                if iv.region.as_ref().map_or(true, |r| r.member(&p)) {
                    points.push(p);
                }
                break;
            }
            guard += 1;
            if guard > 64 {
                return Err(Error::SearchFailed("grid too coarse for simple draw".into()));
            }
        }
    }
    Configuration::new(points)
}

/// Report of the specification-consistency test: the conditional law inside
/// a sub-domain, extracted from whole-domain samples, against direct
/// sampling with the observed outside part as boundary.
#[derive(Clone, Copy, Debug)]
pub struct DlrReport {
    pub p_count: f64,
    pub p_components: f64,
    pub reps: usize,
}

pub fn dlr_check<R: Rng + ?Sized>(
    spec: &GibbsSpec,
    sub_lo: &[f64],
    sub_hi: &[f64],
    reps: usize,
    rng: &mut R,
) -> Result<DlrReport> {
    let sub_window = Window::new(sub_lo, sub_hi, spec.window.r_max(), spec.wbits())?;
    let sub_spec = GibbsSpec::new(
        spec.model.clone(),
        sub_window,
        spec.law.clone(),
        spec.lambda,
        Some(spec.alpha),
    )?;
    let full = OrderInterval::full();
    let wbits = spec.wbits();
    let inside_box = |p: &Point| {
        p.pos()
            .iter()
            .zip(sub_lo.iter().zip(sub_hi))
            .all(|(&x, (&a, &b))| x >= a && x < b)
    };
    let mut whole_counts = Vec::with_capacity(reps);
    let mut whole_comps = Vec::with_capacity(reps);
    let mut direct_counts = Vec::with_capacity(reps);
    let mut direct_comps = Vec::with_capacity(reps);
    for _ in 0..reps {
        let omega = gibbs_rejection_sample(spec, &full, &Configuration::empty(), rng)?;
        let (inside, outside): (Vec<Point>, Vec<Point>) =
            omega.iter().cloned().partition(inside_box);
        whole_counts.push(inside.len());
        whole_comps.push(component_count(&inside, wbits));
        let boundary = Configuration::new(outside)?;
        let direct =
            gibbs_rejection_sample(&sub_spec, &OrderInterval::full(), &boundary, rng)?;
        direct_counts.push(direct.len());
        direct_comps.push(component_count(direct.points(), wbits));
    }
    let (_, _, p_count) = stats::chi2_two_sample(
        &stats::count_histogram(&whole_counts),
        &stats::count_histogram(&direct_counts),
    );
    let (_, _, p_components) = stats::chi2_two_sample(
        &stats::count_histogram(&whole_comps),
        &stats::count_histogram(&direct_comps),
    );
    Ok(DlrReport {
        p_count,
        p_components,
        reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    fn rods_spec() -> GibbsSpec {
        let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
        GibbsSpec::new(
            Model::HardSphere,
            window,
            RadiusLaw::Delta(0.2),
            0.5,
            None,
        )
        .unwrap()
    }

    fn ideal_spec() -> GibbsSpec {
        let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
        GibbsSpec::new(Model::Ideal, window, RadiusLaw::Delta(0.125), 0.7, None).unwrap()
    }

    #[test]
    fn ideal_partition_function_is_one() {
        let spec = ideal_spec();
        let mut rng = RngStream::from_seed(20).rng();
        let exact = z_bruteforce(
            &spec,
            &ZMethod::Exact1d,
            &OrderInterval::full(),
            &Configuration::empty(),
            &mut rng,
        )
        .unwrap();
        assert_relative_eq!(exact.value, 1.0, epsilon = 1e-12);

        let series = z_bruteforce(
            &spec,
            &ZMethod::SeriesMc(SeriesOptions::default()),
            &OrderInterval::full(),
            &Configuration::empty(),
            &mut rng,
        )
        .unwrap();
        assert!(
            (series.value - 1.0).abs() <= series.truncation_error + 3.0 * series.mc_error + 1e-9,
            "Z = {} (trunc {}, mc {})",
            series.value,
            series.truncation_error,
            series.mc_error
        );
    }

    #[test]
    fn partition_function_dominates_void_term() {
        // Z >= e^{-lambda mass}: the empty-configuration weight alone
        let spec = rods_spec();
        let mut rng = RngStream::from_seed(21).rng();
        let z = z_bruteforce(
            &spec,
            &ZMethod::Exact1d,
            &OrderInterval::full(),
            &Configuration::empty(),
            &mut rng,
        )
        .unwrap();
        assert!(z.value >= (-spec.lambda * z.mass.value).exp());
    }

    #[test]
    fn series_and_exact_agree_on_hard_rods() {
        let spec = rods_spec();
        let mut rng = RngStream::from_seed(22).rng();
        let gamma =
            Configuration::new(vec![Point::quantized(&[1.05], 0.2, 32).unwrap()]).unwrap();
        let exact = z_bruteforce(
            &spec,
            &ZMethod::Exact1d,
            &OrderInterval::full(),
            &gamma,
            &mut rng,
        )
        .unwrap();
        let mut opts = SeriesOptions::default();
        opts.budget_per_term = 6000;
        let series = z_bruteforce(
            &spec,
            &ZMethod::SeriesMc(opts),
            &OrderInterval::full(),
            &gamma,
            &mut rng,
        )
        .unwrap();
        let err = 3.0 * (series.mc_error + series.truncation_error) + 1e-9;
        assert!(
            (series.value - exact.value).abs() <= err,
            "series {} vs exact {} (err budget {err})",
            series.value,
            exact.value
        );
    }

    #[test]
    fn acceptance_rate_estimates_partition_function() {
        // acceptance rate of the rejection sampler = Z e^{(lambda-alpha) mass}
        let spec = rods_spec();
        let mut rng = RngStream::from_seed(23).rng();
        let iv = OrderInterval::full();
        let sampler = spec.codec.interval_sampler(&iv, &spec.law);
        let mean = spec.alpha * sampler.total();
        let reps = 40_000;
        let mut accepted = 0u64;
        for _ in 0..reps {
            let omega = poisson_on_interval(&sampler, mean, &iv, &mut rng).unwrap();
            let p = acceptance_probability(&spec, &omega, &Configuration::empty()).unwrap();
            if rng.random::<f64>() < p {
                accepted += 1;
            }
        }
        let rate = accepted as f64 / reps as f64;
        let se = crate::stats::binomial_se(accepted, reps);
        let z = z_bruteforce(&spec, &ZMethod::Exact1d, &iv, &Configuration::empty(), &mut rng)
            .unwrap();
        let expect = z.value * ((spec.lambda - spec.alpha) * z.mass.value).exp();
        assert!(
            (rate - expect).abs() <= 4.0 * se,
            "rate {rate} vs {expect} (se {se})"
        );
    }

    #[test]
    fn hard_sphere_overlap_proposal_is_rejected() {
        let spec = rods_spec();
        let omega = Configuration::new(vec![
            Point::quantized(&[0.3], 0.2, 32).unwrap(),
            Point::quantized(&[0.5], 0.2, 32).unwrap(),
        ])
        .unwrap();
        let p = acceptance_probability(&spec, &omega, &Configuration::empty()).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn ideal_rejection_accepts_everything() {
        // H = 0 and lambda = alpha: the sampler is the Poisson process
        let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
        let spec =
            GibbsSpec::new(Model::Ideal, window, RadiusLaw::Delta(0.125), 0.9, None).unwrap();
        let omega = Configuration::new(vec![Point::quantized(&[0.4], 0.125, 32).unwrap()])
            .unwrap();
        assert_eq!(
            acceptance_probability(&spec, &omega, &Configuration::empty()).unwrap(),
            1.0
        );
    }

    #[test]
    fn domain_monotonicity_for_nonnegative_energies() {
        // shrinking the domain raises Z when e^{-H} <= 1 pointwise
        let spec = rods_spec();
        let mut rng = RngStream::from_seed(24).rng();
        let mid = spec
            .codec
            .encode(&Point::new(&[0.5], 0.0).unwrap())
            .unwrap();
        let z_full = z_bruteforce(
            &spec,
            &ZMethod::Exact1d,
            &OrderInterval::full(),
            &Configuration::empty(),
            &mut rng,
        )
        .unwrap();
        let z_half = z_bruteforce(
            &spec,
            &ZMethod::Exact1d,
            &OrderInterval::tail(mid),
            &Configuration::empty(),
            &mut rng,
        )
        .unwrap();
        assert!(z_half.value >= z_full.value);
    }

    #[test]
    fn dlr_consistency_hard_rods() {
        let spec = rods_spec();
        let mut rng = RngStream::from_seed(25).rng();
        let report = dlr_check(&spec, &[0.0], &[0.5], 6000, &mut rng).unwrap();
        assert!(report.p_count > 0.01, "count p = {}", report.p_count);
        assert!(
            report.p_components > 0.01,
            "components p = {}",
            report.p_components
        );
    }

    #[test]
    fn dlr_consistency_crcm() {
        let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
        let spec = GibbsSpec::new(
            Model::crcm(2.0).unwrap(),
            window,
            RadiusLaw::Delta(0.125),
            0.3,
            None,
        )
        .unwrap();
        let mut rng = RngStream::from_seed(26).rng();
        let report = dlr_check(&spec, &[0.0], &[0.5], 6000, &mut rng).unwrap();
        assert!(report.p_count > 0.01, "count p = {}", report.p_count);
        assert!(
            report.p_components > 0.01,
            "components p = {}",
            report.p_components
        );
    }
}
