//! Named invariant checks behind the `verify` command: desk-scale versions
//! of every module's structural and statistical guarantees, reported
//! machine-readably so a run can gate on them.

use crate::coupling::{
    disagreement_sample, verify_disagreement, CouplingContext, CouplingSample,
};
use crate::models::{dom_level, hamiltonian, HamiltonianModel, Model};
use crate::order::{OrderCodec, OrderInterval, OrderKey};
use crate::partition::{
    gibbs_rejection_sample, z_bruteforce, GibbsSpec, SeriesOptions, ZMethod,
};
use crate::percolation::{connection_sweep, upsilon_holds};
use crate::poisson::{sample_poisson, RadiusLaw};
use crate::rng::RngStream;
use crate::space::{
    balls_intersect, connected, Configuration, Point, Probe, Window,
};
use crate::stats;
use crate::thinning::{ThinDiagnostics, ThinningKernel};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replicate scale of the statistical checks.
    pub reps: u64,
    /// Inject a corrupted coupling sample; the structure check must fail.
    pub plant_violation: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 7,
            reps: 2000,
            plant_violation: false,
        }
    }
}

type Check = (&'static str, fn(&VerifyOptions) -> Result<String, String>);

fn ok(detail: impl Into<String>) -> Result<String, String> {
    Ok(detail.into())
}

fn rods_spec(lambda: f64) -> GibbsSpec {
    let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    GibbsSpec::new(
        Model::HardSphere,
        window,
        RadiusLaw::Delta(0.2),
        lambda,
        None,
    )
    .unwrap()
}

fn check_order_roundtrip(opts: &VerifyOptions) -> Result<String, String> {
    let mut total = 0u64;
    for &w in &[4u32, 8, 16, 32] {
        for d in 1..=3usize {
            let window = Window::new(&vec![0.0; d], &vec![1.0; d], 0.5, w)
                .map_err(|e| e.to_string())?;
            let codec = OrderCodec::for_window(&window).map_err(|e| e.to_string())?;
            let mut rng = RngStream::from_seed(opts.seed ^ (w as u64) << 8 ^ d as u64).rng();
            for _ in 0..(opts.reps / 4).max(100) {
                let pos: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                let p = Point::quantized(&pos, rng.random_range(0.0..=0.5), w)
                    .map_err(|e| e.to_string())?;
                let back = codec
                    .decode(codec.encode(&p).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                if back != p {
                    return Err(format!("round trip broke at W={w}, d={d}"));
                }
                total += 1;
            }
        }
    }
    ok(format!("{total} points round-tripped exactly"))
}

fn check_order_hyperblocks(_: &VerifyOptions) -> Result<String, String> {
    for m in [2usize, 3] {
        let codec = OrderCodec::with_bits(m, 4, 4).map_err(|e| e.to_string())?;
        for n in 0..=4u32 {
            let side = 1u64 << (4 - n);
            let blocks = 1u64 << n;
            for corner_index in 0..blocks.pow(m as u32) {
                let mut idx = corner_index;
                let corner: Vec<u64> = (0..m)
                    .map(|_| {
                        let c = (idx % blocks) * side;
                        idx /= blocks;
                        c
                    })
                    .collect();
                let mut lo = u128::MAX;
                let mut hi = 0u128;
                let cells = side.pow(m as u32);
                let mut offsets = vec![0u64; m];
                for _ in 0..cells {
                    let raws: Vec<u64> =
                        corner.iter().zip(&offsets).map(|(c, o)| c + o).collect();
                    let k = codec.encode_raws(&raws).map_err(|e| e.to_string())?.0;
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
                if hi - lo + 1 != cells as u128 {
                    return Err(format!(
                        "block at {corner:?} side {side} maps to a gapped interval"
                    ));
                }
            }
        }
    }
    ok("every dyadic block maps to one contiguous key interval")
}

fn check_order_measure_additive(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[0.0, 0.0], &[1.0, 1.0], 0.5, 16).unwrap();
    let codec = OrderCodec::for_window(&window).unwrap();
    let law = RadiusLaw::uniform(0.0, 0.5).unwrap();
    let mut rng = RngStream::from_seed(opts.seed + 1).rng();
    for _ in 0..50 {
        let mut keys: Vec<u128> = (0..3)
            .map(|_| (rng.random::<u64>() as u128) << 16 ^ rng.random::<u64>() as u128)
            .map(|k| k % (1u128 << codec.total_bits()))
            .collect();
        keys.sort_unstable();
        let m = |a: u128, b: u128, rng: &mut rand_chacha::ChaCha12Rng| {
            codec
                .interval_measure(
                    &OrderInterval::between(OrderKey(a), OrderKey(b)),
                    &law,
                    0,
                    rng,
                )
                .value
        };
        let ab = m(keys[0], keys[1], &mut rng);
        let bc = m(keys[1], keys[2], &mut rng);
        let ac = m(keys[0], keys[2], &mut rng);
        if (ab + bc - ac).abs() > 1e-11 * (1.0 + ac) {
            return Err(format!("additivity broke: {ab} + {bc} != {ac}"));
        }
    }
    ok("interval measure is additive over adjacent intervals")
}

fn bfs_connected(omega: &[Point], a: &Point, b: &Point, wbits: u32) -> bool {
    // breadth-first search over the Gilbert graph of omega u {a, b}
    let mut nodes: Vec<&Point> = omega.iter().collect();
    nodes.push(a);
    nodes.push(b);
    let n = nodes.len();
    let (start, goal) = (n - 2, n - 1);
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        if i == goal {
            return true;
        }
        for j in 0..n {
            if !seen[j] && balls_intersect(nodes[i], nodes[j], wbits) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    false
}

fn check_space_connectivity(opts: &VerifyOptions) -> Result<String, String> {
    let mut rng = RngStream::from_seed(opts.seed + 2).rng();
    let trials = opts.reps.max(500);
    for _ in 0..trials {
        let n = rng.random_range(0..=10usize);
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::quantized(
                    &[rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)],
                    rng.random_range(0.0..0.5),
                    32,
                )
                .unwrap()
            })
            .collect();
        let Ok(omega) = Configuration::new(pts.clone()) else {
            continue;
        };
        let a = Point::quantized(
            &[rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)],
            rng.random_range(0.0..0.5),
            32,
        )
        .unwrap();
        let b = Point::quantized(
            &[rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)],
            rng.random_range(0.0..0.5),
            32,
        )
        .unwrap();
        let fast = connected(&omega, &Probe::Ball(a.clone()), &Probe::Ball(b.clone()), 32);
        let slow = bfs_connected(&pts, &a, &b, 32);
        if fast != slow {
            return Err(format!("connectivity disagrees with BFS at n={n}"));
        }
    }
    ok(format!("{trials} random configurations agree with the BFS oracle"))
}

fn check_models_additivity(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    let mut rng = RngStream::from_seed(opts.seed + 3).rng();
    let models = [
        Model::HardSphere,
        Model::strauss(0.7).unwrap(),
        Model::crcm(1.7).unwrap(),
    ];
    for model in &models {
        for _ in 0..(opts.reps / 10).max(50) {
            let n = rng.random_range(1..7usize);
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    Point::quantized(
                        &[rng.random_range(0.0..1.0)],
                        rng.random_range(0.0..0.25),
                        32,
                    )
                    .unwrap()
                })
                .collect();
            let Ok(omega) = Configuration::new(pts.clone()) else {
                continue;
            };
            let gamma = Configuration::new(vec![Point::quantized(&[1.125], 0.125, 32)
                .unwrap()])
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
            let consistent = (whole.is_infinite() && split.is_infinite())
                || (whole - split).abs() <= 1e-9;
            if !consistent {
                return Err(format!("{}: {whole} vs {split}", model.name()));
            }
        }
    }
    ok("energies split additively over random partitions")
}

fn check_models_dom_bound(opts: &VerifyOptions) -> Result<String, String> {
    let mut rng = RngStream::from_seed(opts.seed + 4).rng();
    let models = [
        Model::HardSphere,
        Model::strauss(0.5).unwrap(),
        Model::crcm(2.0).unwrap(),
    ];
    for model in &models {
        let h_min = model.energy_lower_bound();
        dom_level(model, 0.5).map_err(|e| e.to_string())?;
        for _ in 0..opts.reps.max(1000) {
            let n = rng.random_range(0..6usize);
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    Point::quantized(
                        &[rng.random_range(0.0..1.0)],
                        rng.random_range(0.0..0.25),
                        32,
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
                32,
            )
            .unwrap();
            if omega.contains(&x) {
                continue;
            }
            if model.local_energy(&x, &omega, 32) < h_min - 1e-12 {
                return Err(format!("{} fell below h_min", model.name()));
            }
        }
    }
    ok("local energies never fall below the declared bound")
}

fn check_poisson_counts(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[0.0, 0.0], &[1.0, 1.0], 0.25, 32).unwrap();
    let law = RadiusLaw::Delta(0.125);
    let mut rng = RngStream::from_seed(opts.seed + 5).rng();
    let reps = (opts.reps * 5).max(5000);
    let counts: Vec<usize> = (0..reps)
        .map(|_| sample_poisson(&window, 2.0, &law, &mut rng).unwrap().len())
        .collect();
    let hist = stats::count_histogram(&counts);
    let pmf = stats::poisson_pmf(2.0, hist.len() + 10);
    let (_, _, p) = stats::chi2_gof(&hist, &pmf);
    if p <= 0.01 {
        return Err(format!("count distribution rejected: p = {p:.4}"));
    }
    ok(format!("count distribution consistent (p = {p:.3})"))
}

fn check_partition_dual_oracle(opts: &VerifyOptions) -> Result<String, String> {
    let spec = rods_spec(0.5);
    let mut rng = RngStream::from_seed(opts.seed + 6).rng();
    let gamma =
        Configuration::new(vec![Point::quantized(&[1.05], 0.2, 32).unwrap()]).unwrap();
    let exact = z_bruteforce(
        &spec,
        &ZMethod::Exact1d,
        &OrderInterval::full(),
        &gamma,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let opts_mc = SeriesOptions {
        budget_per_term: 4000,
        ..Default::default()
    };
    let series = z_bruteforce(
        &spec,
        &ZMethod::SeriesMc(opts_mc),
        &OrderInterval::full(),
        &gamma,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let err = 3.0 * (series.mc_error + series.truncation_error) + 1e-9;
    if (series.value - exact.value).abs() > err {
        return Err(format!(
            "series {} vs exact {} beyond {err}",
            series.value, exact.value
        ));
    }
    ok(format!(
        "series {:.6} agrees with exact {:.6}",
        series.value, exact.value
    ))
}

fn check_thinning_subset_and_ideal(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    let ideal = GibbsSpec::new(
        Model::Ideal,
        window.clone(),
        RadiusLaw::Delta(0.2),
        0.5,
        Some(0.5),
    )
    .unwrap();
    let kernel = ThinningKernel::new(
        ideal,
        OrderInterval::full(),
        Configuration::empty(),
        ZMethod::Exact1d,
    )
    .unwrap();
    let root = RngStream::from_seed(opts.seed + 7);
    for i in 0..(opts.reps / 10).max(50) {
        let (kept, poisson, _) = kernel.thin_sample(root.replicate(i)).unwrap();
        if kept != poisson {
            return Err("ideal thinning at equal intensities dropped a point".into());
        }
    }
    let rods = rods_spec(0.5);
    let kernel = ThinningKernel::new(
        rods,
        OrderInterval::full(),
        Configuration::empty(),
        ZMethod::Exact1d,
    )
    .unwrap();
    for i in 0..(opts.reps / 10).max(50) {
        let (kept, poisson, _) = kernel.thin_sample(root.replicate(1_000_000 + i)).unwrap();
        if !kept.iter().all(|p| poisson.contains(p)) {
            return Err("kept point missing from the dominating draw".into());
        }
    }
    ok("kept configurations stay inside the dominating draw")
}

fn check_thinning_marginal(opts: &VerifyOptions) -> Result<String, String> {
    let spec = rods_spec(0.5);
    let kernel = ThinningKernel::new(
        spec.clone(),
        OrderInterval::full(),
        Configuration::empty(),
        ZMethod::Exact1d,
    )
    .unwrap();
    let reps = (opts.reps * 3).max(3000);
    let root = RngStream::from_seed(opts.seed + 8);
    let thin: Vec<usize> = (0..reps)
        .map(|i| kernel.thin_sample(root.replicate(i)).unwrap().0.len())
        .collect();
    let mut rng = RngStream::from_seed(opts.seed + 9).rng();
    let oracle: Vec<usize> = (0..reps)
        .map(|_| {
            gibbs_rejection_sample(
                &spec,
                &OrderInterval::full(),
                &Configuration::empty(),
                &mut rng,
            )
            .unwrap()
            .len()
        })
        .collect();
    let (_, _, p) = stats::chi2_two_sample(
        &stats::count_histogram(&thin),
        &stats::count_histogram(&oracle),
    );
    if p <= 0.01 {
        return Err(format!("thinned counts differ from the oracle: p = {p:.4}"));
    }
    ok(format!("thinned counts match the rejection oracle (p = {p:.3})"))
}

fn planted_bad_sample() -> CouplingSample {
    let isolated = Point::quantized(&[0.25], 0.0625, 32).unwrap();
    CouplingSample {
        xi1: Configuration::new(vec![isolated.clone()]).unwrap(),
        xi2: Configuration::empty(),
        xi3: Configuration::new(vec![isolated]).unwrap(),
        gamma1: Configuration::new(vec![Point::quantized(&[1.0625], 0.125, 32).unwrap()])
            .unwrap(),
        gamma2: Configuration::empty(),
        layers: vec![],
        agreement_points: 0,
        diagnostics: ThinDiagnostics::default(),
    }
}

fn check_coupling_structure(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    let spec = GibbsSpec::new(
        Model::crcm(2.0).unwrap(),
        window,
        RadiusLaw::Delta(0.125),
        0.3,
        None,
    )
    .unwrap();
    let ctx = CouplingContext::new(spec, ZMethod::Exact1d);
    let g1 = Configuration::new(vec![Point::quantized(&[1.0625], 0.125, 32).unwrap()])
        .unwrap();
    let g2 = Configuration::new(vec![Point::quantized(&[-0.0625], 0.125, 32).unwrap()])
        .unwrap();
    let reps = (opts.reps / 2).max(200);
    let mut checked = 0u64;
    for seed in 0..reps {
        let s = disagreement_sample(&ctx, &g1, &g2, RngStream::from_seed(seed))
            .map_err(|e| e.to_string())?;
        let report = verify_disagreement(&s, 32);
        if !report.ok() {
            return Err(format!("violations: {:?}", report.violations));
        }
        checked += 1;
    }
    if opts.plant_violation {
        let report = verify_disagreement(&planted_bad_sample(), 32);
        if !report.ok() {
            return Err(format!(
                "planted violation detected as intended: {:?}",
                report.violations
            ));
        }
        return Err("planted violation was not detected".into());
    }
    ok(format!("{checked} couplings satisfied subset and connectivity"))
}

fn check_coupling_depth(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[0.0], &[1.0], 0.25, 32).unwrap();
    let spec = GibbsSpec::new(
        Model::crcm(2.0).unwrap(),
        window,
        RadiusLaw::Delta(0.125),
        0.3,
        None,
    )
    .unwrap();
    let alpha_mass = spec.alpha * spec.window.volume();
    let ctx = CouplingContext::new(spec, ZMethod::Exact1d);
    let g1 = Configuration::new(vec![Point::quantized(&[1.0625], 0.125, 32).unwrap()])
        .unwrap();
    let g2 = Configuration::new(vec![Point::quantized(&[-0.0625], 0.125, 32).unwrap()])
        .unwrap();
    let reps = opts.reps.max(500);
    let mut depths = Vec::new();
    for seed in 0..reps {
        let s = disagreement_sample(&ctx, &g1, &g2, RngStream::from_seed(77_000 + seed))
            .map_err(|e| e.to_string())?;
        depths.push(s.depth());
    }
    let ratio = 1.0 - (-alpha_mass).exp();
    for t in 1..6 {
        let here = depths.iter().filter(|&&d| d >= t).count() as f64;
        let next = depths.iter().filter(|&&d| d >= t + 1).count() as f64;
        if here < 40.0 {
            break;
        }
        let cont = next / here;
        let se = (cont * (1.0 - cont) / here).sqrt();
        if cont > ratio + 3.0 * se.max(0.02) {
            return Err(format!(
                "continuation {cont:.3} at depth {t} above the bound {ratio:.3}"
            ));
        }
    }
    let max = depths.iter().max().copied().unwrap_or(0);
    ok(format!("all runs terminated; max depth {max}"))
}

fn check_percolation_monotone(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[-4.0, -4.0], &[4.0, 4.0], 0.5, 16).unwrap();
    let law = RadiusLaw::Delta(0.5);
    let mut rng = RngStream::from_seed(opts.seed + 10).rng();
    let alphas = [0.3, 0.6, 0.9];
    let dists = [1.0, 2.0, 3.0];
    let reps = (opts.reps / 5).max(100);
    let cells = connection_sweep(&window, &alphas, &law, &dists, reps, &mut rng)
        .map_err(|e| e.to_string())?;
    for ai in 0..alphas.len() {
        for di in 0..dists.len() {
            let cell = &cells[ai * dists.len() + di];
            if ai > 0 && cell.hits < cells[(ai - 1) * dists.len() + di].hits {
                return Err("connection count dropped as intensity grew".into());
            }
            if di > 0 && cell.hits > cells[ai * dists.len() + di - 1].hits {
                return Err("connection count rose with distance".into());
            }
        }
    }
    ok("shared-draw connection counts are monotone in intensity and distance")
}

fn check_upsilon(opts: &VerifyOptions) -> Result<String, String> {
    let window = Window::new(&[-4.0, -4.0], &[4.0, 4.0], 0.5, 16).unwrap();
    let law = RadiusLaw::Delta(0.5);
    let mut rng = RngStream::from_seed(opts.seed + 11).rng();
    for _ in 0..(opts.reps / 10).max(50) {
        let omega = sample_poisson(&window, 1.0, &law, &mut rng).unwrap();
        if !upsilon_holds(&omega, 0.5) {
            return Err("radius control failed at k = R for a fixed-radius law".into());
        }
    }
    ok("radius control holds deterministically at k = R")
}

const CHECKS: &[Check] = &[
    ("order.roundtrip", check_order_roundtrip),
    ("order.hyperblocks", check_order_hyperblocks),
    ("order.measure-additivity", check_order_measure_additive),
    ("space.connectivity-bfs", check_space_connectivity),
    ("models.additivity", check_models_additivity),
    ("models.domination-bound", check_models_dom_bound),
    ("poisson.count-distribution", check_poisson_counts),
    ("partition.dual-oracle", check_partition_dual_oracle),
    ("thinning.subset-and-ideal", check_thinning_subset_and_ideal),
    ("thinning.marginal-oracle", check_thinning_marginal),
    ("coupling.structure", check_coupling_structure),
    ("coupling.depth-bound", check_coupling_depth),
    ("percolation.monotonicity", check_percolation_monotone),
    ("percolation.radius-control", check_upsilon),
];

/// Run every registered invariant check.
pub fn run_all(opts: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| match f(opts) {
            Ok(detail) => CheckResult {
                name: (*name).into(),
                passed: true,
                detail,
            },
            Err(detail) => CheckResult {
                name: (*name).into(),
                passed: false,
                detail,
            },
        })
        .collect()
}
