//! Acceptance suite: every release criterion as one test, each printing a
//! PASS line with its statistics. Run with
//! `cargo test -p gibbsim-cli --test acceptance -- --nocapture`.

use gibbsim_core::coupling::{
    disagreement_sample, verify_disagreement, CouplingContext, CouplingSample,
};
use gibbsim_core::diagnostics::{
    boundary_influence, dense_boundary_1d, uniqueness_scan, EventSpec,
};
use gibbsim_core::models::Model;
use gibbsim_core::order::{OrderCodec, OrderInterval};
use gibbsim_core::partition::{
    gibbs_rejection_sample, GibbsSpec, SeriesOptions, ZMethod,
};
use gibbsim_core::percolation::{
    connection_probability, connection_sweep, fit_decay, upsilon_holds,
};
use gibbsim_core::poisson::{sample_poisson, RadiusLaw};
use gibbsim_core::rng::RngStream;
use gibbsim_core::space::{Configuration, Point, Probe, Window};
use gibbsim_core::stats;
use gibbsim_core::thinning::{fd_single_point_prob, ThinningKernel};
use rayon::prelude::*;

fn rod(x: f64, r: f64) -> Point {
    Point::quantized(&[x], r, 32).unwrap()
}

fn hard_rod_spec() -> GibbsSpec {
    let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    GibbsSpec::new(
        Model::HardSphere,
        window,
        RadiusLaw::Delta(0.2),
        0.5,
        Some(0.5),
    )
    .unwrap()
}

fn crcm_square_spec() -> GibbsSpec {
    let window = Window::new(&[0.0, 0.0], &[1.0, 1.0], 0.125, 32).unwrap();
    GibbsSpec::new(
        Model::crcm(2.0).unwrap(),
        window,
        RadiusLaw::Delta(0.1),
        0.3,
        Some(0.6),
    )
    .unwrap()
}

fn crcm_series_options() -> SeriesOptions {
    SeriesOptions {
        budget_per_term: 160,
        tail_tol: 1e-5,
        n_cap: 16,
        region_mc: 4096,
        max_tries: 100_000,
    }
}

fn thin_counts(spec: &GibbsSpec, method: ZMethod, reps: u64, seed: u64) -> Vec<usize> {
    let root = RngStream::from_seed(seed);
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let kernel = ThinningKernel::new(
                spec.clone(),
                OrderInterval::full(),
                Configuration::empty(),
                method.clone(),
            )
            .unwrap();
            kernel.thin_sample(root.replicate(i)).unwrap().0.len()
        })
        .collect()
}

fn rejection_counts(spec: &GibbsSpec, reps: u64, seed: u64) -> Vec<usize> {
    let root = RngStream::from_seed(seed);
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.replicate(i).rng();
            gibbs_rejection_sample(
                spec,
                &OrderInterval::full(),
                &Configuration::empty(),
                &mut rng,
            )
            .unwrap()
            .len()
        })
        .collect()
}

/// Criterion 1: thinning marginals match the exact rejection oracle for
/// 1-d hard rods and the planar continuum random cluster model.
#[test]
fn criterion_01_thinning_marginal_oracle_equivalence() {
    let reps = 100_000u64;

    let rods = hard_rod_spec();
    let thin = thin_counts(&rods, ZMethod::Exact1d, reps, 1001);
    let oracle = rejection_counts(&rods, reps, 1002);
    let (_, _, p_rods) = stats::chi2_two_sample(
        &stats::count_histogram(&thin),
        &stats::count_histogram(&oracle),
    );
    assert!(p_rods > 0.01, "hard rods: p = {p_rods}");

    let crcm = crcm_square_spec();
    let thin = thin_counts(
        &crcm,
        ZMethod::SeriesMc(crcm_series_options()),
        reps,
        1003,
    );
    let oracle = rejection_counts(&crcm, reps, 1004);
    let (_, _, p_crcm) = stats::chi2_two_sample(
        &stats::count_histogram(&thin),
        &stats::count_histogram(&oracle),
    );
    assert!(p_crcm > 0.01, "crcm: p = {p_crcm}");

    println!(
        "ACCEPTANCE 01 thinning-marginal-oracle: PASS (hard rods p = {p_rods:.3}, crcm p = {p_crcm:.3})"
    );
}

/// Criterion 2: the closed-form keep probability equals the finite
/// difference of the tail free energy at mass step 1e-3 Q*(domain), to
/// relative error 1e-2, over 20+ (point, kept, boundary) triples per model
/// with an exact partition oracle.
#[test]
fn criterion_02_derivative_identity() {
    struct Case {
        name: &'static str,
        spec: GibbsSpec,
        gamma: Configuration,
        radius: f64,
    }
    let rods_window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    let strauss_window = Window::new(&[0.0], &[1.0], 0.5, 32).unwrap();
    let cases = vec![
        Case {
            name: "hard-sphere",
            spec: hard_rod_spec(),
            gamma: Configuration::new(vec![rod(1.125, 0.2)]).unwrap(),
            radius: 0.2,
        },
        Case {
            name: "crcm",
            spec: GibbsSpec::new(
                Model::crcm(2.0).unwrap(),
                rods_window,
                RadiusLaw::Delta(0.125),
                0.3,
                None,
            )
            .unwrap(),
            gamma: Configuration::new(vec![rod(1.0625, 0.125)]).unwrap(),
            radius: 0.125,
        },
        Case {
            name: "strauss",
            spec: GibbsSpec::new(
                Model::strauss(0.5).unwrap(),
                strauss_window,
                RadiusLaw::Delta(0.5),
                0.5,
                None,
            )
            .unwrap(),
            gamma: Configuration::new(vec![rod(1.5, 1.0)]).unwrap(),
            radius: 0.5,
        },
    ];
    let mut worst = 0.0f64;
    let mut worst_budget = 0.0f64;
    for case in &cases {
        let eps = 1e-3 * case.spec.window.volume();
        let mut rng = RngStream::from_seed(2001).rng();
        let mut triples = 0;
        // vary the evaluation point, the kept prefix and the boundary load
        for xi in 0..7 {
            let x_pos = 0.12 + 0.11 * xi as f64;
            let x = rod(x_pos, case.radius);
            let key_x = case.spec.codec.encode(&x).unwrap();
            for kept_choice in 0..3 {
                let kept: Configuration = match kept_choice {
                    0 => Configuration::empty(),
                    1 => [rod(x_pos * 0.5, case.radius)]
                        .into_iter()
                        .filter(|p| case.spec.codec.encode(p).unwrap() < key_x)
                        .collect(),
                    _ => [
                        rod(x_pos * 0.4, case.radius),
                        rod(x_pos * 0.8, case.radius),
                    ]
                    .into_iter()
                    .filter(|p| case.spec.codec.encode(p).unwrap() < key_x)
                    .collect(),
                };
                let kernel = ThinningKernel::new(
                    case.spec.clone(),
                    OrderInterval::full(),
                    case.gamma.clone(),
                    ZMethod::Exact1d,
                )
                .unwrap();
                let closed = kernel.single_point_prob(&x, &kept, &mut rng).unwrap();
                let (fd, _) =
                    fd_single_point_prob(&kernel, &x, &kept, eps, &mut rng).unwrap();
                if closed.value == 0.0 {
                    assert!(
                        fd.abs() < 1e-9,
                        "{}: fd {fd} for an excluded point",
                        case.name
                    );
                } else {
                    let rel = (fd - closed.value).abs() / closed.value;
                    assert!(
                        rel < 1e-2,
                        "{}: x = {x_pos}, kept {} points: fd {fd} vs {}, rel {rel}",
                        case.name,
                        kept.len(),
                        closed.value
                    );
                    worst = worst.max(rel);
                }
                worst_budget = worst_budget.max(closed.error_bound);
                triples += 1;
            }
        }
        assert!(triples >= 20, "{}: only {triples} triples", case.name);
    }
    println!(
        "ACCEPTANCE 02 derivative-identity: PASS (worst relative error {worst:.2e}, \
         worst oracle error budget {worst_budget:.2e})"
    );
}

/// Criterion 3: the void probability of the unexplored tail matches
/// exp(-lambda Q*) / Z at five grid points, within three standard errors.
#[test]
fn criterion_03_void_probability_identity() {
    let spec = hard_rod_spec();
    let kernel = ThinningKernel::new(
        spec.clone(),
        OrderInterval::full(),
        Configuration::empty(),
        ZMethod::Exact1d,
    )
    .unwrap();
    let reps = 100_000u64;
    let root = RngStream::from_seed(3001);
    let kept_sets: Vec<Configuration> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let k = ThinningKernel::new(
                spec.clone(),
                OrderInterval::full(),
                Configuration::empty(),
                ZMethod::Exact1d,
            )
            .unwrap();
            k.thin_sample(root.replicate(i)).unwrap().0
        })
        .collect();
    let mut printed = Vec::new();
    for grid in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let x = Point::new(&[gibbsim_core::space::quantize_floor(grid, 32)], 0.0).unwrap();
        let from = spec.codec.encode(&x).unwrap();
        let mut rng = RngStream::from_seed(3002).rng();
        let formula = kernel.void_probability(&x, &mut rng).unwrap();
        let (mut cond, mut hits) = (0u64, 0u64);
        for kept in &kept_sets {
            let any_before = kept
                .iter()
                .any(|p| spec.codec.encode(p).unwrap() < from);
            if !any_before {
                cond += 1;
                if kept.is_empty() {
                    hits += 1;
                }
            }
        }
        let freq = hits as f64 / cond as f64;
        let se = stats::binomial_se(hits, cond);
        assert!(
            (freq - formula).abs() <= 3.0 * se.max(1e-5),
            "x = {grid}: empirical {freq} vs formula {formula} (se {se})"
        );
        printed.push(format!("{grid}:{:.1}se", (freq - formula).abs() / se.max(1e-12)));
    }
    println!(
        "ACCEPTANCE 03 void-probability-identity: PASS (deviations {})",
        printed.join(", ")
    );
}

fn coupling_batch(
    ctx: &CouplingContext,
    gamma1: &Configuration,
    gamma2: &Configuration,
    reps: u64,
    seed: u64,
) -> Vec<CouplingSample> {
    (0..reps)
        .into_par_iter()
        .map(|i| {
            disagreement_sample(ctx, gamma1, gamma2, RngStream::from_seed(seed).replicate(i))
                .unwrap()
        })
        .collect()
}

fn coupling_cases() -> Vec<(&'static str, CouplingContext)> {
    let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    let mut cases = Vec::new();
    for (name, model, lambda) in [
        ("hard-sphere", Model::HardSphere, 0.5),
        ("strauss", Model::strauss(0.5).unwrap(), 0.5),
        ("crcm", Model::crcm(2.0).unwrap(), 0.3),
    ] {
        let spec = GibbsSpec::new(
            model,
            window.clone(),
            RadiusLaw::Delta(0.125),
            lambda,
            None,
        )
        .unwrap();
        let method = if name == "strauss" {
            ZMethod::SeriesMc(SeriesOptions {
                budget_per_term: 64,
                tail_tol: 1e-4,
                n_cap: 12,
                ..Default::default()
            })
        } else {
            ZMethod::Exact1d
        };
        cases.push((name, CouplingContext::new(spec, method)));
    }
    cases
}

/// Criterion 4: 1e4 disagreement couplings per model with zero violations
/// of the subset and boundary-connectivity properties, checked exactly.
#[test]
fn criterion_04_coupling_structural_invariants() {
    let reps = 10_000u64;
    let g1 = Configuration::new(vec![rod(1.0625, 0.125)]).unwrap();
    let g2 = Configuration::new(vec![rod(-0.0625, 0.125)]).unwrap();
    let mut counts = Vec::new();
    for (name, ctx) in coupling_cases() {
        let violations: usize = (0..reps)
            .into_par_iter()
            .map(|i| {
                let s = disagreement_sample(
                    &ctx,
                    &g1,
                    &g2,
                    RngStream::from_seed(4000).replicate(i),
                )
                .unwrap();
                let report = verify_disagreement(&s, ctx.spec.wbits());
                report.violations.len()
            })
            .sum();
        assert_eq!(violations, 0, "{name}: structural violations");
        counts.push(format!("{name}:0/{reps}"));
    }
    println!(
        "ACCEPTANCE 04 coupling-structure: PASS (violations {})",
        counts.join(", ")
    );
}

fn nearest_neighbor_distances(samples: &[Configuration]) -> Vec<f64> {
    samples
        .iter()
        .filter(|c| c.len() >= 2)
        .map(|c| {
            let pts = c.points();
            let mut best = f64::MAX;
            for i in 0..pts.len() {
                for j in 0..i {
                    let d = (pts[i].pos()[0] - pts[j].pos()[0]).abs();
                    best = best.min(d);
                }
            }
            best
        })
        .collect()
}

/// Criterion 5: the coupling marginals. Each Gibbs coordinate matches the
/// rejection oracle with its own boundary (counts and nearest-neighbor
/// distance); the dominating coordinate is Poisson.
#[test]
fn criterion_05_coupling_marginals() {
    let reps = 10_000u64;
    let g1 = Configuration::new(vec![rod(1.0625, 0.125)]).unwrap();
    let g2 = Configuration::new(vec![rod(-0.0625, 0.125)]).unwrap();
    let mut stats_out = Vec::new();
    for (name, ctx) in coupling_cases() {
        if name == "strauss" {
            continue; // marginal tests run on the exact-oracle models
        }
        let batch = coupling_batch(&ctx, &g1, &g2, reps, 5000);
        for (tag, pick, gamma) in [
            ("xi1", 0usize, &g1),
            ("xi2", 1usize, &g2),
        ] {
            let sides: Vec<Configuration> = batch
                .iter()
                .map(|s| if pick == 0 { s.xi1.clone() } else { s.xi2.clone() })
                .collect();
            let root = RngStream::from_seed(5100 + pick as u64);
            let oracle: Vec<Configuration> = (0..reps)
                .into_par_iter()
                .map(|i| {
                    let mut rng = root.replicate(i).rng();
                    gibbs_rejection_sample(&ctx.spec, &OrderInterval::full(), gamma, &mut rng)
                        .unwrap()
                })
                .collect();
            let counts: Vec<usize> = sides.iter().map(|c| c.len()).collect();
            let oracle_counts: Vec<usize> = oracle.iter().map(|c| c.len()).collect();
            let (_, _, p_count) = stats::chi2_two_sample(
                &stats::count_histogram(&counts),
                &stats::count_histogram(&oracle_counts),
            );
            assert!(p_count > 0.01, "{name} {tag} counts: p = {p_count}");
            let nn = nearest_neighbor_distances(&sides);
            let nn_oracle = nearest_neighbor_distances(&oracle);
            if nn.len() >= 50 && nn_oracle.len() >= 50 {
                let (_, p_nn) = stats::ks_two_sample(&nn, &nn_oracle);
                assert!(p_nn > 0.01, "{name} {tag} nearest-neighbor: p = {p_nn}");
                stats_out.push(format!("{name}.{tag} p={p_count:.2}/{p_nn:.2}"));
            } else {
                stats_out.push(format!("{name}.{tag} p={p_count:.2}"));
            }
        }
        // dominating marginal: Poisson counts
        let xi3_counts: Vec<usize> = batch.iter().map(|s| s.xi3.len()).collect();
        let hist = stats::count_histogram(&xi3_counts);
        let pmf = stats::poisson_pmf(ctx.spec.alpha * ctx.spec.window.volume(), hist.len() + 10);
        let (_, _, p3) = stats::chi2_gof(&hist, &pmf);
        assert!(p3 > 0.01, "{name} xi3 counts: p = {p3}");
        stats_out.push(format!("{name}.xi3 p={p3:.2}"));
    }
    println!(
        "ACCEPTANCE 05 coupling-marginals: PASS ({})",
        stats_out.join(", ")
    );
}

/// Criterion 6: the recursion terminates on every run, with the depth tail
/// decaying at least geometrically at the layer-survival bound.
#[test]
fn criterion_06_recursion_termination() {
    let reps = 10_000u64;
    let g1 = Configuration::new(vec![rod(1.0625, 0.125)]).unwrap();
    let g2 = Configuration::new(vec![rod(-0.0625, 0.125)]).unwrap();
    let mut summary = Vec::new();
    for (name, ctx) in coupling_cases() {
        if name == "strauss" {
            continue;
        }
        let batch = coupling_batch(&ctx, &g1, &g2, reps, 6000);
        let depths: Vec<usize> = batch.iter().map(|s| s.depth()).collect();
        let alpha_mass = ctx.spec.alpha * ctx.spec.window.volume();
        let ratio = 1.0 - (-alpha_mass).exp();
        let mut max_checked = 0;
        for t in 1..10 {
            let here = depths.iter().filter(|&&d| d >= t).count() as f64;
            let next = depths.iter().filter(|&&d| d >= t + 1).count() as f64;
            if here < 60.0 {
                break;
            }
            let cont = next / here;
            let se = (cont * (1.0 - cont) / here).sqrt();
            assert!(
                cont <= ratio + 3.0 * se.max(0.01),
                "{name}: continuation {cont} at depth {t} above bound {ratio}"
            );
            max_checked = t;
        }
        summary.push(format!(
            "{name} max depth {} (bound {ratio:.3}, checked to {max_checked})",
            depths.iter().max().unwrap()
        ));
    }
    println!(
        "ACCEPTANCE 06 recursion-termination: PASS ({})",
        summary.join("; ")
    );
}

/// Criterion 7: exact encode/decode round trips at every grid width and
/// dimension, and the exhaustive hyperblock-interval bijection.
#[test]
fn criterion_07_order_module() {
    use rand::Rng;
    let mut checked = 0u64;
    for &wbits in &[4u32, 8, 16, 32] {
        for d in 1..=3usize {
            let window = Window::new(&vec![0.0; d], &vec![1.0; d], 0.5, wbits).unwrap();
            let codec = OrderCodec::for_window(&window).unwrap();
            let mut rng = RngStream::from_seed(7000 + wbits as u64 + d as u64).rng();
            for _ in 0..10_000 {
                let pos: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                let p = Point::quantized(&pos, rng.random_range(0.0..=0.5), wbits).unwrap();
                let back = codec.decode(codec.encode(&p).unwrap()).unwrap();
                assert_eq!(p, back, "W = {wbits}, d = {d}");
                checked += 1;
            }
        }
    }
    // exhaustive hyperblock bijection at 4 fractional bits
    for m in [2usize, 3] {
        let codec = OrderCodec::with_bits(m, 4, 4).unwrap();
        for level in 0..=4u32 {
            let side = 1u64 << (4 - level);
            let blocks = 1u64 << level;
            for corner_index in 0..blocks.pow(m as u32) {
                let mut idx = corner_index;
                let corner: Vec<u64> = (0..m)
                    .map(|_| {
                        let c = (idx % blocks) * side;
                        idx /= blocks;
                        c
                    })
                    .collect();
                let cells = side.pow(m as u32);
                let mut lo = u128::MAX;
                let mut hi = 0u128;
                let mut offsets = vec![0u64; m];
                for _ in 0..cells {
                    let raws: Vec<u64> =
                        corner.iter().zip(&offsets).map(|(c, o)| c + o).collect();
                    let k = codec.encode_raws(&raws).unwrap().0;
                    lo = lo.min(k);
                    hi = hi.max(k);
                    for axis in offsets.iter_mut() {
                        *axis += 1;
                        if *axis < side {
                            break;
                        }
                        *axis = 0;
                    }
                }
                assert_eq!(hi - lo + 1, cells as u128, "m = {m}, level = {level}");
            }
        }
    }
    println!("ACCEPTANCE 07 order-module: PASS ({checked} round trips, exhaustive blocks)");
}

/// Criterion 8: Boolean-model diagnostics: exact zero at zero intensity,
/// exact shared-draw monotonicity, an exponential sub-critical decay fit
/// with R^2 > 0.9, and deterministic radius control for fixed radii.
#[test]
fn criterion_08_percolation() {
    let window = Window::new(&[-10.0, -10.0], &[10.0, 10.0], 0.5, 16).unwrap();
    let law = RadiusLaw::Delta(0.5);
    let mut rng = RngStream::from_seed(8001).rng();

    let origin = Probe::Ball(Point::new(&[0.0, 0.0], 0.0).unwrap());
    let ring = Probe::origin_ring(2, 4.0);
    let zero =
        connection_probability(&window, 0.0, &law, &origin, &ring, 500, &mut rng).unwrap();
    assert_eq!(zero.probability, 0.0);

    let alphas = [0.3, 0.45, 0.6];
    let dists = [1.0, 2.0, 3.0, 4.0, 5.0];
    let cells = connection_sweep(&window, &alphas, &law, &dists, 2500, &mut rng).unwrap();
    for ai in 0..alphas.len() {
        for di in 0..dists.len() {
            let cell = &cells[ai * dists.len() + di];
            if ai > 0 {
                assert!(
                    cell.hits >= cells[(ai - 1) * dists.len() + di].hits,
                    "not monotone in intensity"
                );
            }
            if di > 0 {
                assert!(
                    cell.hits <= cells[ai * dists.len() + di - 1].hits,
                    "not monotone in distance"
                );
            }
        }
    }
    let table: Vec<(f64, f64, f64)> = cells
        .iter()
        .filter(|c| c.alpha == 0.6)
        .map(|c| (c.distance, c.probability(), c.std_error()))
        .collect();
    let fit = fit_decay(&table).unwrap();
    assert!(fit.r_squared > 0.9, "R^2 = {}", fit.r_squared);

    for _ in 0..200 {
        let omega = sample_poisson(&window, 1.0, &law, &mut rng).unwrap();
        assert!(upsilon_holds(&omega, 0.5));
    }
    println!(
        "ACCEPTANCE 08 percolation: PASS (kappa = {:.3}, R^2 = {:.3})",
        fit.kappa, fit.r_squared
    );
}

/// Criterion 9: the disagreement-percolation inequality on a 3x3 grid of
/// (activity, distance) cells, and the uniqueness scan falling under two
/// standard errors at the largest window.
#[test]
fn criterion_09_disagreement_percolation_inequality() {
    let reps = 2500u64;
    let mut rows = Vec::new();
    for (li, &lambda) in [0.15, 0.3, 0.45].iter().enumerate() {
        for (hi_i, &half) in [0.375, 0.5, 0.625].iter().enumerate() {
            let window = Window::new(&[-half], &[half], 0.25, 32).unwrap();
            let spec = GibbsSpec::new(
                Model::crcm(2.0).unwrap(),
                window.clone(),
                RadiusLaw::Delta(0.125),
                lambda,
                None,
            )
            .unwrap();
            let ctx = CouplingContext::new(spec, ZMethod::Exact1d);
            let wall = dense_boundary_1d(&window, 0.125, 4);
            let report = boundary_influence(
                &ctx,
                &[-0.25],
                &[0.25],
                &wall,
                &Configuration::empty(),
                &EventSpec::CountAtLeast(1),
                reps,
                RngStream::from_seed(9000 + (li * 3 + hi_i) as u64),
            )
            .unwrap();
            let slack = 3.0 * (report.direct_se + report.bound_se);
            assert!(
                report.direct_gap <= report.percolation_bound + slack,
                "lambda = {lambda}, distance = {}: gap {} above bound {} + {slack}",
                report.distance,
                report.direct_gap,
                report.percolation_bound
            );
            rows.push(format!(
                "(l={lambda},d={:.2}): {:.3}<={:.3}",
                report.distance, report.direct_gap, report.percolation_bound
            ));
        }
    }

    let mut rng = RngStream::from_seed(9100).rng();
    let scan = uniqueness_scan(
        &Model::crcm(2.0).unwrap(),
        &RadiusLaw::Delta(0.125),
        0.3,
        None,
        0.25,
        32,
        &EventSpec::CountAtLeast(1),
        0.25,
        &[0.5, 1.0, 1.5, 2.0],
        6000,
        &mut rng,
    )
    .unwrap();
    let last = scan.last().unwrap();
    assert!(
        last.gap <= 2.0 * last.se,
        "uniqueness gap {} above 2 se {} at n = {}",
        last.gap,
        2.0 * last.se,
        last.n
    );
    println!(
        "ACCEPTANCE 09 disagreement-inequality: PASS ({}; scan gap {:.4} <= 2se {:.4})",
        rows.join(", "),
        last.gap,
        2.0 * last.se
    );
}

/// Criterion 10: every command is byte-identical across runs with the same
/// configuration and seed, including under parallel execution.
#[test]
fn criterion_10_cli_determinism() {
    use std::io::Write;
    use std::process::Command;
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_gibbsim"))
            .args(args)
            .output()
            .expect("binary runs");
        assert!(
            out.status.code() == Some(0) || out.status.code() == Some(1),
            "command {args:?} crashed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let mut serial = tempfile::NamedTempFile::new().unwrap();
    serial
        .write_all(
            b"[run]\nparallel = 1\nreps = 16\nseed = 42\n\
              [percolate]\nalphas = [0.4]\ndistances = [0.0625, 0.125]\nfit_decay = false\n\
              [decay]\nseparations = [0.25, 0.5]\ncell_len = 0.125\n\
              [verify]\nreps = 60\n",
        )
        .unwrap();
    serial.flush().unwrap();
    let mut parallel = tempfile::NamedTempFile::new().unwrap();
    parallel
        .write_all(
            b"[run]\nparallel = 4\nreps = 16\nseed = 42\n\
              [percolate]\nalphas = [0.4]\ndistances = [0.0625, 0.125]\nfit_decay = false\n\
              [decay]\nseparations = [0.25, 0.5]\ncell_len = 0.125\n\
              [verify]\nreps = 60\n",
        )
        .unwrap();
    parallel.flush().unwrap();
    let spath = serial.path().to_str().unwrap();
    let ppath = parallel.path().to_str().unwrap();
    for cmd in ["sample", "thin", "couple", "percolate", "decay", "verify"] {
        let a = run(&[cmd, "--config", spath]);
        let b = run(&[cmd, "--config", spath]);
        assert_eq!(a, b, "{cmd}: two runs differ");
        let c = run(&[cmd, "--config", ppath]);
        let d = run(&[cmd, "--config", ppath]);
        assert_eq!(c, d, "{cmd}: parallel runs differ");
        assert_eq!(a, c, "{cmd}: parallel differs from serial");
    }
    println!("ACCEPTANCE 10 cli-determinism: PASS (6 commands, serial = parallel)");
}
