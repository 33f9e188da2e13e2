//! Exact analytic oracles for the sampled laws (joint radial/angular
//! moments, per-factor transforms, cumulants), convergence-rate diagnostics,
//! and the expectation/identity checks shared by the validation suites.
//!
//! Every oracle returns log-scale values; callers exponentiate only when the
//! magnitude is known to be safe.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::dist::{sample_gamma, w_density, WjParams};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::report::CheckReport;
use crate::rng::RngStream;
use crate::samplers::{parallel_streams, sample_joint, unitary_log_factor_re, Group, SampleBatch};
use crate::specfun::{ln_gamma, ln_gamma_cross_ratio, normal_cdf, polygamma};
pub use crate::stats::{ks_statistic, ks_two_sample, KsResult};
use crate::stats::mean_se;

const EULER_GAMMA: f64 = 0.5772156649015328606065;

struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn new() -> Self {
        Kahan { sum: 0.0, c: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// A joint moment E[|Z|^t e^{is arg Z}] request.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentQuery {
    pub n: u32,
    pub t: f64,
    pub s: f64,
    pub group: Group,
}

fn check_unitary_domain(routine: &'static str, t: f64, s: f64) -> Result<()> {
    if !(t + s > -1.0 && t - s > -1.0) {
        return Err(Error::domain(
            routine,
            format!("(t, s) = ({t}, {s}) violates the moment domain Re(t±s) > -1"),
        ));
    }
    Ok(())
}

/// Log of the k-th factor of the unitary joint moment:
/// lnΓ(j) + lnΓ(j+t) − lnΓ(j+(t+s)/2) − lnΓ(j+(t−s)/2), computed
/// cancellation-free.
pub fn moment_factor(j: u32, t: f64, s: f64) -> Result<f64> {
    if j < 1 {
        return Err(Error::domain("moment_factor", "requires j >= 1"));
    }
    check_unitary_domain("moment_factor", t, s)?;
    ln_gamma_cross_ratio(j as f64, 0.5 * (t + s), 0.5 * (t - s))
}

/// Log of E[|Z_n|^t e^{is arg Z_n}] over the unitary group: the sum of the
/// per-factor logs. Valid on Re(t±s) > -1.
pub fn moment_unitary(q: &MomentQuery) -> Result<f64> {
    if q.group != Group::Unitary {
        return Err(Error::domain("moment_unitary", "query group is so2n; use moment_so2n"));
    }
    if q.n < 1 {
        return Err(Error::domain("moment_unitary", "requires n >= 1"));
    }
    check_unitary_domain("moment_unitary", q.t, q.s)?;
    let mut acc = Kahan::new();
    for k in 1..=q.n {
        acc.add(ln_gamma_cross_ratio(k as f64, 0.5 * (q.t + q.s), 0.5 * (q.t - q.s))?);
    }
    Ok(acc.sum)
}

/// Log of the characteristic function E[e^{isW_j}] = Γ(j)²/(Γ(j+s/2)Γ(j−s/2)).
pub fn fourier_w(j: u32, s: f64) -> Result<f64> {
    if j < 1 {
        return Err(Error::domain("fourier_w", "requires j >= 1"));
    }
    if !(s.abs() < 2.0 * j as f64) {
        return Err(Error::domain("fourier_w", format!("s = {s} violates |s| < 2j = {}", 2 * j)));
    }
    ln_gamma_cross_ratio(j as f64, 0.5 * s, -0.5 * s)
}

/// Log of the moment generating function E[e^{tT_j}] = Γ(j)Γ(j+t)/Γ(j+t/2)².
pub fn mellin_t(j: u32, t: f64) -> Result<f64> {
    if j < 1 {
        return Err(Error::domain("mellin_t", "requires j >= 1"));
    }
    if !(t > -(j as f64)) {
        return Err(Error::domain("mellin_t", format!("t = {t} violates t > -j = -{j}")));
    }
    ln_gamma_cross_ratio(j as f64, 0.5 * t, 0.5 * t)
}

/// Log of E[Z^t] over SO(2n):
/// 2nt log 2 + Σ_{k=1}^{n} [lnΓ(n+k−1) + lnΓ(t+k−1/2) − lnΓ(k−1/2) − lnΓ(t+k+n−1)].
pub fn moment_so2n(n: u32, t: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("moment_so2n", "requires n >= 1"));
    }
    if !(t > -0.5) {
        return Err(Error::domain("moment_so2n", format!("t = {t} violates t > -1/2")));
    }
    let nf = n as f64;
    let mut acc = Kahan::new();
    for k in 1..=n {
        // the k-th summand equals -cross_ratio(k-1/2, t, n-1/2)
        acc.add(-ln_gamma_cross_ratio(k as f64 - 0.5, t, nf - 0.5)?);
    }
    Ok(2.0 * nf * t * std::f64::consts::LN_2 + acc.sum)
}

/// Log of the t-th moment of one SO(2n) product factor 1 + eps sqrt(beta),
/// k in 2..=2n. Equals t log 2 − cross_ratio((k−1)/2, t, (k−1)/2), i.e. the
/// factor is equal in law to twice a symmetric beta variable.
pub fn so2n_factor_log_moment(k: u32, t: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain("so2n_factor_log_moment", "requires k >= 2"));
    }
    let a = (k as f64 - 1.0) / 2.0;
    if !(t > -a) {
        return Err(Error::domain(
            "so2n_factor_log_moment",
            format!("t = {t} violates t > -(k-1)/2 = -{a}"),
        ));
    }
    Ok(t * std::f64::consts::LN_2 - ln_gamma_cross_ratio(a, t, a)?)
}

/// Group-dispatching convenience for the CLI: so2n queries require s = 0.
pub fn moment_log(q: &MomentQuery) -> Result<f64> {
    match q.group {
        Group::Unitary => moment_unitary(q),
        Group::SpecialOrthogonalEven => {
            if q.s != 0.0 {
                return Err(Error::domain(
                    "moment_log",
                    "so2n moments are real; s must be 0 (Z is real nonnegative)",
                ));
            }
            moment_so2n(q.n, q.t)
        }
    }
}

/// Which coordinate of log Z a cumulant or Lyapunov quantity refers to:
/// the log-modulus summands T_j or the argument summands W_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "log-modulus")]
    LogModulus,
    #[serde(rename = "argument")]
    Argument,
}

/// k-th cumulant of T_j (log-modulus) or W_j (argument), 1 <= k <= 6.
/// T_j: (2^{k−1}−1)/2^{k−1} ψ^{(k−1)}(j). W_j: 0 for odd k,
/// (−1)^{k/2+1}/2^{k−1} ψ^{(k−1)}(j) for even k.
pub fn cumulant(j: u32, k: u32, which: Component) -> Result<f64> {
    if j < 1 {
        return Err(Error::domain("cumulant", "requires j >= 1"));
    }
    if !(1..=6).contains(&k) {
        return Err(Error::domain("cumulant", format!("order k = {k} outside 1..=6")));
    }
    let pg = polygamma((k - 1) as usize, j as f64)?;
    let pow = (1u64 << (k - 1)) as f64;
    Ok(match which {
        Component::LogModulus => (pow - 1.0) / pow * pg,
        Component::Argument => {
            if k % 2 == 1 {
                0.0
            } else {
                let sign = if (k / 2) % 2 == 0 { -1.0 } else { 1.0 };
                sign / pow * pg
            }
        }
    })
}

/// Cumulants of both components for j <= n, k <= max_order, with the
/// partial sums over j per order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CumulantTable {
    pub n: u32,
    pub max_order: u32,
    /// row j-1, column k-1: k-th cumulant of T_j
    pub log_modulus: Vec<Vec<f64>>,
    /// row j-1, column k-1: k-th cumulant of W_j
    pub argument: Vec<Vec<f64>>,
    pub log_modulus_totals: Vec<f64>,
    pub argument_totals: Vec<f64>,
}

pub fn cumulant_table(n: u32, max_order: u32) -> Result<CumulantTable> {
    if n < 1 {
        return Err(Error::domain("cumulant_table", "requires n >= 1"));
    }
    if !(1..=6).contains(&max_order) {
        return Err(Error::domain("cumulant_table", "max_order outside 1..=6"));
    }
    let orders = max_order as usize;
    let mut log_modulus = Vec::with_capacity(n as usize);
    let mut argument = Vec::with_capacity(n as usize);
    let mut lm_tot = vec![Kahan::new(), Kahan::new(), Kahan::new(), Kahan::new(), Kahan::new(), Kahan::new()];
    let mut ar_tot = vec![Kahan::new(), Kahan::new(), Kahan::new(), Kahan::new(), Kahan::new(), Kahan::new()];
    for j in 1..=n {
        let mut lm = Vec::with_capacity(orders);
        let mut ar = Vec::with_capacity(orders);
        for k in 1..=max_order {
            let q = cumulant(j, k, Component::LogModulus)?;
            let r = cumulant(j, k, Component::Argument)?;
            lm_tot[(k - 1) as usize].add(q);
            ar_tot[(k - 1) as usize].add(r);
            lm.push(q);
            ar.push(r);
        }
        log_modulus.push(lm);
        argument.push(ar);
    }
    Ok(CumulantTable {
        n,
        max_order,
        log_modulus,
        argument,
        log_modulus_totals: lm_tot.into_iter().take(orders).map(|k| k.sum).collect(),
        argument_totals: ar_tot.into_iter().take(orders).map(|k| k.sum).collect(),
    })
}

/// s_n² = σ_n² = ½ Σ_{j=1}^{n} ψ'(j), through the closed form
/// ½(ψ(n+1) + γ + n ψ'(n+1)).
pub fn variance_sum(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("variance_sum", "requires n >= 1"));
    }
    let x = n as f64 + 1.0;
    Ok(0.5 * (polygamma(0, x)? + EULER_GAMMA + n as f64 * polygamma(1, x)?))
}

/// E[|W_j|^3] (argument) or E[|T_j|^3] (log-modulus) by adaptive quadrature,
/// absolute tolerance 1e-8.
pub fn abs_third_moment(j: u32, which: Component) -> Result<f64> {
    match which {
        Component::Argument => {
            let params = WjParams::new(j)?;
            let ctx = format!("E|W_{j}|^3");
            let f = |v: f64| v * v * v * w_density(&params, v);
            let half = integrate(&f, 0.0, std::f64::consts::FRAC_PI_2, 0.5e-8, &ctx)?;
            Ok(2.0 * half)
        }
        Component::LogModulus => abs_third_moment_t(j),
    }
}

fn abs_third_moment_t(j: u32) -> Result<f64> {
    if j < 1 {
        return Err(Error::domain("abs_third_moment", "requires j >= 1"));
    }
    let ctx = format!("E|T_{j}|^3");
    if j == 1 {
        // T_1 = log(2 cos W_1), W_1 uniform: split at the sign change
        // v = pi/3 and substitute v = pi/2 - s^2 beyond it to tame the
        // logarithmic endpoint.
        let pos = |v: f64| {
            let l = (2.0 * v.cos()).ln();
            l * l * l
        };
        let p1 = integrate(&pos, 0.0, std::f64::consts::FRAC_PI_3, 0.4e-8, &ctx)?;
        let neg = |s: f64| {
            let l = -(2.0 * (s * s).sin()).ln();
            2.0 * s * l * l * l
        };
        let p2 = integrate(&neg, 0.0, std::f64::consts::FRAC_PI_6.sqrt(), 0.4e-8, &ctx)?;
        return Ok(2.0 / std::f64::consts::PI * (p1 + p2));
    }
    let jf = j as f64;
    let ln_b = ln_gamma(jf)? + ln_gamma(jf - 1.0)? - ln_gamma(2.0 * jf - 1.0)?;
    let params = WjParams::new(j)?;
    // the inner integral runs inside the outer integrand closure; failures
    // are latched here and rethrown after the outer pass
    let inner_failed: Cell<bool> = Cell::new(false);
    let inner = |c: f64, tol: f64| -> f64 {
        let f = |b: f64| {
            let lb = b.ln();
            let t = lb + c;
            let log_density = (jf - 1.0) * lb + (jf - 2.0) * (-b).ln_1p() - ln_b;
            t.abs().powi(3) * log_density.exp()
        };
        // |log(b) + c|^3 kinks at b = e^{-c}; split there when interior
        let bstar = (-c).exp();
        let r = if bstar < 1.0 {
            integrate(&f, 0.0, bstar, 0.5 * tol, &ctx)
                .and_then(|lo| integrate(&f, bstar, 1.0, 0.5 * tol, &ctx).map(|hi| lo + hi))
        } else {
            integrate(&f, 0.0, 1.0, tol, &ctx)
        };
        match r {
            Ok(v) => v,
            Err(_) => {
                inner_failed.set(true);
                0.0
            }
        }
    };
    let outer = |v: f64| {
        let fw = w_density(&params, v);
        if fw == 0.0 {
            return 0.0;
        }
        let tol = 1e-11 / fw.max(1.0);
        fw * inner((2.0 * v.cos()).ln(), tol)
    };
    let half = integrate(&outer, 0.0, std::f64::consts::FRAC_PI_2, 2.5e-9, &ctx)?;
    if inner_failed.get() {
        return Err(Error::Quadrature {
            context: ctx,
            message: "inner beta integral did not converge".into(),
        });
    }
    Ok(2.0 * half)
}

/// Lyapunov ratio Σ_{j<=n} E[|X_j|^3] / s_n^3 for X = T (log-modulus) or
/// X = W (argument). Quadrature failures name the offending j.
pub fn lyapunov(n: u32, which: Component) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("lyapunov", "requires n >= 1"));
    }
    let mut num = Kahan::new();
    for j in 1..=n {
        num.add(abs_third_moment(j, which)?);
    }
    Ok(num.sum / variance_sum(n)?.powf(1.5))
}

/// Mean of |Z|^t e^{is arg Z} over a batch, by components, with standard
/// errors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub re: f64,
    pub im: f64,
    pub re_se: f64,
    pub im_se: f64,
    pub n_samples: u64,
}

pub fn empirical_moment(batch: &SampleBatch, t: f64, s: f64) -> Result<MomentEstimate> {
    if batch.is_empty() {
        return Err(Error::domain("empirical_moment", "empty batch"));
    }
    let m = batch.len();
    let mut re = Vec::with_capacity(m);
    let mut im = Vec::with_capacity(m);
    for (&rl, &il) in batch.re_log.iter().zip(&batch.im_log) {
        let e = t * rl;
        if e > 700.0 {
            return Err(Error::overflow(
                "empirical_moment",
                format!(
                    "t*re_log = {e:.1} would overflow f64; compare in the log domain instead"
                ),
            ));
        }
        let w = e.exp();
        let (si, co) = (s * il).sin_cos();
        re.push(w * co);
        im.push(w * si);
    }
    let (re_mean, re_se) = mean_se(&re);
    let (im_mean, im_se) = mean_se(&im);
    Ok(MomentEstimate { re: re_mean, im: im_mean, re_se, im_se, n_samples: m as u64 })
}

/// Result of the gamma-product identity check: the product of independent
/// gamma(j) variables, j <= n, is equal in law to |Z_n| times the product of
/// sqrt(gamma_j gamma'_j), all factors independent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarnesReport {
    pub n: u32,
    pub t: f64,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

/// (a) analytic: the t-th log-moments of both sides agree to 1e-10;
/// (b) Monte Carlo: two-sample KS between the log of both sides over
/// `m_samples` draws, with |Z_n| drawn through sample_joint.
pub fn barnes_identity_check(
    n: u32,
    t: f64,
    m_samples: usize,
    rng: &mut RngStream,
    significance: f64,
) -> Result<BarnesReport> {
    if n < 1 {
        return Err(Error::domain("barnes_identity_check", "requires n >= 1"));
    }
    if !(t > -1.0) {
        return Err(Error::domain("barnes_identity_check", format!("t = {t} violates t > -1")));
    }
    if m_samples < 10 {
        return Err(Error::domain("barnes_identity_check", "requires m_samples >= 10"));
    }
    let mut checks = Vec::new();

    let mut lhs = Kahan::new();
    let mut half_moments = Kahan::new();
    for j in 1..=n {
        let jf = j as f64;
        lhs.add(ln_gamma(jf + t)? - ln_gamma(jf)?);
        half_moments.add(2.0 * (ln_gamma(jf + 0.5 * t)? - ln_gamma(jf)?));
    }
    let q = MomentQuery { n, t, s: 0.0, group: Group::Unitary };
    let rhs = moment_unitary(&q)? + half_moments.sum;
    checks.push(CheckReport::analytic(
        format!("gamma-product identity, log moments at (n, t) = ({n}, {t})"),
        lhs.sum,
        rhs,
        1e-10,
    ));

    let mut a = Vec::with_capacity(m_samples);
    for _ in 0..m_samples {
        let mut acc = 0.0;
        for j in 1..=n {
            acc += sample_gamma(j as f64, rng)?.ln();
        }
        a.push(acc);
    }
    let mut b = Vec::with_capacity(m_samples);
    for _ in 0..m_samples {
        let mut acc = sample_joint(n, rng).re_log;
        for j in 1..=n {
            let jf = j as f64;
            acc += 0.5 * (sample_gamma(jf, rng)?.ln() + sample_gamma(jf, rng)?.ln());
        }
        b.push(acc);
    }
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ks = ks_two_sample(&a, &b)?;
    checks.push(CheckReport::ks_test(
        format!("gamma-product identity, two-sample KS at (n, t) = ({n}, {t})"),
        ks.statistic,
        ks.p_value,
        m_samples as u64,
        significance,
    ));

    let passed = checks.iter().all(|c| c.pass);
    Ok(BarnesReport { n, t, checks, passed })
}

/// Convergence-rate diagnostics: per dimension, the Lyapunov ratios of both
/// components and the sup-CDF distance of the normalized log-modulus from
/// the standard normal, against the fitted shape curve c/(log N)^{3/2}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub n_values: Vec<u32>,
    /// L_N, third-absolute-moment ratio of the T_j sums
    pub lyapunov_log_modulus: Vec<f64>,
    /// L'_N, same for the W_j sums
    pub lyapunov_argument: Vec<f64>,
    /// sup-CDF deviation of re_log/sqrt(log(N)/2) from the standard normal
    pub ks_distances: Vec<f64>,
    /// c = ks_distances[0] * (log n_values[0])^{3/2}
    pub bound_constant: f64,
    /// c / (log N)^{3/2} per entry of n_values
    pub bound_curve: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

/// Build a RateReport over `n_values` (strictly increasing, all >= 2) with
/// `m` draws per dimension. Batch i uses seed + i so the per-dimension
/// samples are independent.
pub fn rate_report(n_values: &[u32], m: usize, seed: u64, workers: usize) -> Result<RateReport> {
    if n_values.is_empty() {
        return Err(Error::domain("rate_report", "empty n_values"));
    }
    if n_values[0] < 2 {
        return Err(Error::domain("rate_report", "requires n >= 2 (log-scale normalization)"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("rate_report", "n_values must be strictly increasing"));
    }
    if m < 10 {
        return Err(Error::domain("rate_report", "requires m >= 10"));
    }

    let mut ks_distances = Vec::with_capacity(n_values.len());
    for (i, &n) in n_values.iter().enumerate() {
        let norm = (0.5 * (n as f64).ln()).sqrt();
        let parts = parallel_streams(m, seed.wrapping_add(i as u64), workers, |rng, range| {
            let mut out = Vec::with_capacity(range.len());
            for _ in range {
                let mut re = 0.0;
                for k in 1..=n {
                    re += unitary_log_factor_re(k, rng);
                }
                out.push(re / norm);
            }
            out
        });
        let mut z: Vec<f64> = parts.into_iter().flatten().collect();
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ks_distances.push(ks_statistic(&z, normal_cdf)?.statistic);
    }

    let mut lyapunov_log_modulus = Vec::with_capacity(n_values.len());
    let mut lyapunov_argument = Vec::with_capacity(n_values.len());
    let mut sum_t = Kahan::new();
    let mut sum_w = Kahan::new();
    let mut next = 0usize;
    for j in 1..=*n_values.last().unwrap() {
        sum_t.add(abs_third_moment(j, Component::LogModulus)?);
        sum_w.add(abs_third_moment(j, Component::Argument)?);
        if j == n_values[next] {
            let s3 = variance_sum(j)?.powf(1.5);
            lyapunov_log_modulus.push(sum_t.sum / s3);
            lyapunov_argument.push(sum_w.sum / s3);
            next += 1;
            if next == n_values.len() {
                break;
            }
        }
    }

    let bound_constant = ks_distances[0] * (n_values[0] as f64).ln().powf(1.5);
    let bound_curve =
        n_values.iter().map(|&n| bound_constant / (n as f64).ln().powf(1.5)).collect();
    Ok(RateReport {
        n_values: n_values.to_vec(),
        lyapunov_log_modulus,
        lyapunov_argument,
        ks_distances,
        bound_constant,
        bound_curve,
        samples: m as u64,
        seed,
    })
}
