//! Small statistical toolbox shared by the test harnesses and experiments:
//! chi-square tests, a two-sample Kolmogorov-Smirnov test, binomial standard
//! errors and weighted least squares.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of an empirical proportion `k/n`.
pub fn binomial_se(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

fn chi2_pvalue(stat: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof).expect("positive dof");
    1.0 - dist.cdf(stat)
}

/// Histogram of nonnegative integer observations.
pub fn count_histogram(counts: &[usize]) -> Vec<u64> {
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut hist = vec![0u64; max + 1];
    for &c in counts {
        hist[c] += 1;
    }
    hist
}

/// Pearson chi-square test of two count histograms against homogeneity.
///
/// Bins with small pooled expectation are merged into their left neighbor so
/// the asymptotic distribution is trustworthy. Returns (statistic, dof, p).
pub fn chi2_two_sample(hist_a: &[u64], hist_b: &[u64]) -> (f64, f64, f64) {
    let len = hist_a.len().max(hist_b.len());
    let get = |h: &[u64], i: usize| -> f64 { h.get(i).copied().unwrap_or(0) as f64 };
    let n_a: f64 = hist_a.iter().map(|&x| x as f64).sum();
    let n_b: f64 = hist_b.iter().map(|&x| x as f64).sum();
    let total = n_a + n_b;
    assert!(n_a > 0.0 && n_b > 0.0, "empty sample");

    // Merge adjacent raw bins until each pooled bin has expectation >= 5.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for i in 0..len {
        acc.0 += get(hist_a, i);
        acc.1 += get(hist_b, i);
        let pooled = acc.0 + acc.1;
        if pooled * n_a.min(n_b) / total >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            bins.push(acc);
        }
    }
    if bins.len() < 2 {
        return (0.0, 0.0, 1.0);
    }

    let mut stat = 0.0;
    for &(a, b) in &bins {
        let pooled = (a + b) / total;
        let ea = pooled * n_a;
        let eb = pooled * n_b;
        stat += (a - ea) * (a - ea) / ea + (b - eb) * (b - eb) / eb;
    }
    let dof = (bins.len() - 1) as f64;
    (stat, dof, chi2_pvalue(stat, dof))
}

/// Chi-square goodness-of-fit of an observed histogram against given
/// probabilities (tail mass beyond the listed bins is folded into the last).
pub fn chi2_gof(hist: &[u64], probs: &[f64]) -> (f64, f64, f64) {
    let n: f64 = hist.iter().map(|&x| x as f64).sum();
    let len = hist.len().max(probs.len());
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for i in 0..len {
        acc.0 += hist.get(i).copied().unwrap_or(0) as f64;
        acc.1 += probs.get(i).copied().unwrap_or(0.0);
        if acc.1 * n >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += acc.0;
        last.1 += acc.1;
    }
    // Remaining probability mass belongs to the last (open) bin.
    let covered: f64 = bins.iter().map(|b| b.1).sum();
    if let Some(last) = bins.last_mut() {
        last.1 += 1.0 - covered;
    }
    let mut stat = 0.0;
    for &(obs, p) in &bins {
        let e = p * n;
        if e > 0.0 {
            stat += (obs - e) * (obs - e) / e;
        }
    }
    let dof = (bins.len() - 1) as f64;
    (stat, dof, chi2_pvalue(stat, dof))
}

/// Asymptotic two-sample Kolmogorov-Smirnov test. Returns (D, p).
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|u, v| u.partial_cmp(v).unwrap());
    b.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let t = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    // Kolmogorov tail series.
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1.0f64).powi(k as i32 + 1) * (-2.0 * k * k * t * t).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}

/// Weighted least squares of `y = a + b x`. Returns (a, b, r_squared).
pub fn weighted_linear_fit(xs: &[f64], ys: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert_eq!(xs.len(), weights.len());
    let sw: f64 = weights.iter().sum();
    let mx = xs.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(weights).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
        let f = a + b * x;
        ss_res += w * (y - f) * (y - f);
        ss_tot += w * (y - my) * (y - my);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, b, r2)
}

/// Poisson probability mass function values for 0..=kmax.
pub fn poisson_pmf(mean: f64, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut term = (-mean).exp();
    out.push(term);
    for k in 1..=kmax {
        term *= mean / k as f64;
        out.push(term);
    }
    out
}

/// Upper tail P(Poisson(mean) > kmax).
pub fn poisson_tail(mean: f64, kmax: usize) -> f64 {
    1.0 - poisson_pmf(mean, kmax).iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let w = [1.0; 4];
        let (a, b, r2) = weighted_linear_fit(&xs, &ys, &w);
        assert_relative_eq!(a, 2.0, epsilon = 1e-12);
        assert_relative_eq!(b, -0.5, epsilon = 1e-12);
        assert_relative_eq!(r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chi2_identical_histograms_pass() {
        let h = vec![50u64, 120, 80, 30, 10];
        let (_, _, p) = chi2_two_sample(&h, &h);
        assert!(p > 0.99);
    }

    #[test]
    fn chi2_detects_shift() {
        let a = vec![500u64, 300, 120, 50, 20];
        let b = vec![200u64, 350, 250, 120, 70];
        let (_, _, p) = chi2_two_sample(&a, &b);
        assert!(p < 1e-6);
    }

    #[test]
    fn ks_same_distribution() {
        let xs: Vec<f64> = (0..500).map(|i| (i as f64 * 0.7919) % 1.0).collect();
        let ys: Vec<f64> = (0..400).map(|i| (i as f64 * 0.3371) % 1.0).collect();
        let (_, p) = ks_two_sample(&xs, &ys);
        assert!(p > 0.01);
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        let pmf = poisson_pmf(2.5, 60);
        assert_relative_eq!(pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
