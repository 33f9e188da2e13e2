//! Kolmogorov-Smirnov machinery and small-sample summaries shared by every
//! validation suite.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// n for one-sample, n*m/(n+m) for two-sample.
    pub n_effective: f64,
}

/// Survival function of the Kolmogorov distribution evaluated at
/// sqrt(lambda_sq): P(D > d) ~ 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 n d^2),
/// taking `lambda_sq = n d^2` directly.
pub fn kolmogorov_survival(lambda_sq: f64) -> f64 {
    if lambda_sq <= 1e-3 {
        return 1.0;
    }
    let mut acc = 0.0;
    for k in 1..=200u32 {
        let term = (-2.0 * (k * k) as f64 * lambda_sq).exp();
        if k % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * acc).clamp(0.0, 1.0)
}

fn check_sorted(xs: &[f64], who: &'static str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::domain(who, "empty sample"));
    }
    if xs.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain(who, "samples must be sorted ascending"));
    }
    Ok(())
}

/// One-sample KS statistic of sorted `samples` against `cdf`, with the
/// asymptotic p-value. The sup is taken over both one-sided deviations at
/// every jump, which handles tied samples correctly.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    check_sorted(samples, "ks_statistic")?;
    let n = samples.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    Ok(KsResult { statistic: d, p_value: kolmogorov_survival(nf * d * d), n_effective: nf })
}

/// Two-sample KS on sorted inputs; ties are walked through on both sides
/// before the deviation is recorded.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    check_sorted(a, "ks_two_sample")?;
    check_sorted(b, "ks_two_sample")?;
    let (n, m) = (a.len(), b.len());
    let (nf, mf) = (n as f64, m as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n || j < m {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / nf - j as f64 / mf).abs());
    }
    let n_eff = nf * mf / (nf + mf);
    Ok(KsResult { statistic: d, p_value: kolmogorov_survival(n_eff * d * d), n_effective: n_eff })
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / ((n - 1) as f64 * n as f64)).sqrt())
}

/// Sample variance together with the standard error of the variance
/// estimator (fourth-moment formula).
pub fn variance_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    let var = m2 * n / (n - 1.0);
    let se = ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
    (var, se)
}

/// Pearson correlation coefficient.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{open01, RngStream};

    #[test]
    fn rejects_empty_and_unsorted() {
        assert!(ks_statistic(&[], |x| x).is_err());
        assert!(ks_statistic(&[0.3, 0.1], |x| x).is_err());
        assert!(ks_two_sample(&[0.1], &[]).is_err());
    }

    #[test]
    fn exact_quantiles_reach_floor() {
        // samples at the midpoint quantiles of U(0,1) give D = 1/(2m)
        let m = 1000;
        let xs: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let ks = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ks.statistic <= 0.5 / m as f64 + 1e-12, "D = {}", ks.statistic);
    }

    #[test]
    fn null_calibration_rejection_rate() {
        // uniform samples against the uniform CDF: at significance 1e-3,
        // rejections should be rare (Poisson mean ~0.3 over 300 seeds)
        let mut rejections = 0;
        for seed in 0..300u64 {
            let mut rng = RngStream::new(seed, 0);
            let mut xs: Vec<f64> = (0..10_000).map(|_| open01(&mut rng)).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ks = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
            if ks.p_value <= 1e-3 {
                rejections += 1;
            }
        }
        assert!(rejections <= 4, "null rejected {rejections}/300 times at 1e-3");
    }

    #[test]
    fn glivenko_cantelli_scale() {
        let mut rng = RngStream::new(5, 0);
        let mut xs: Vec<f64> = (0..10_000).map(|_| open01(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        // order 1/sqrt(M) = 0.01
        assert!(ks.statistic < 0.03, "D = {}", ks.statistic);
        assert!(ks.statistic > 0.001, "D = {}", ks.statistic);
    }

    #[test]
    fn two_sample_detects_shift() {
        let mut rng = RngStream::new(6, 0);
        let mut a: Vec<f64> = (0..20_000).map(|_| open01(&mut rng)).collect();
        let mut b: Vec<f64> = (0..20_000).map(|_| open01(&mut rng) + 0.05).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let ks = ks_two_sample(&a, &b).unwrap();
        assert!(ks.p_value < 1e-6, "shift not detected: p = {}", ks.p_value);

        let mut c: Vec<f64> = (0..20_000).map(|_| open01(&mut rng)).collect();
        c.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let ks_null = ks_two_sample(&a, &c).unwrap();
        assert!(ks_null.p_value > 1e-3, "false alarm: p = {}", ks_null.p_value);
    }

    #[test]
    fn ties_are_handled() {
        let a = vec![0.0, 0.0, 0.0, 1.0, 1.0];
        let b = vec![0.0, 0.0, 1.0, 1.0, 1.0];
        let ks = ks_two_sample(&a, &b).unwrap();
        // F_a(0) = 3/5, F_b(0) = 2/5
        assert!((ks.statistic - 0.2).abs() < 1e-15);
    }

    #[test]
    fn survival_function_shape() {
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(0.1) > kolmogorov_survival(0.5));
        assert!(kolmogorov_survival(0.5) > kolmogorov_survival(2.0));
        assert!(kolmogorov_survival(50.0) < 1e-40);
        // lambda = 0.828: median of the Kolmogorov distribution near 0.5
        let p = kolmogorov_survival(0.828 * 0.828);
        assert!((p - 0.5).abs() < 0.02, "p = {p}");
    }

    #[test]
    fn mean_se_and_variance() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let (m, se) = mean_se(&xs);
        assert!((m - 2.5).abs() < 1e-15);
        // sample sd = sqrt(5/3), se = sd/2
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        let (v, _) = variance_with_se(&xs);
        assert!((v - 5.0 / 3.0).abs() < 1e-14);
    }
}
