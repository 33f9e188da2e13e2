//! Product-form samplers for log characteristic polynomials.
//!
//! The unitary sampler multiplies independent factors 1 + e^{i theta_k}
//! sqrt(beta_{1,k-1}) (theta uniform, beta independent), accumulating the
//! principal log of each factor; its real and imaginary parts match the full
//! matrix model draw-for-draw in law at cost O(N) per draw. The joint sampler
//! draws the equivalent independent-sum representation (sum of T_j, sum of
//! W_j). The SO(2n) sampler multiplies 2 prod_{k=2}^{2n} (1 + eps_k
//! sqrt(beta_{1/2,(k-1)/2})) with fair signs eps_k.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::dist::sample_beta;
use crate::error::{Error, Result};
use crate::rng::{open01, RngStream};

/// Matrix group the draw refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "unitary")]
    Unitary,
    #[serde(rename = "so2n")]
    SpecialOrthogonalEven,
}

/// Which sampling route produced a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerId {
    #[serde(rename = "product")]
    UnitaryProduct,
    #[serde(rename = "joint")]
    UnitaryJoint,
    #[serde(rename = "so2n-product")]
    So2nProduct,
    #[serde(rename = "matrix-qr")]
    MatrixQr,
    #[serde(rename = "matrix-recursive")]
    MatrixRecursive,
    #[serde(rename = "matrix-so2n")]
    MatrixSo2n,
}

/// One draw of log Z: `re_log` = log |Z|, `im_log` = accumulated principal
/// argument. For the unitary group `im_log` lies in (-n pi/2, n pi/2]; for
/// SO(2n) the characteristic polynomial is real nonnegative and `im_log` is
/// exactly 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogCharPoly {
    pub re_log: f64,
    pub im_log: f64,
    pub n: u32,
    pub group: Group,
}

/// Running sums of the unitary log factors recorded at fixed dimensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub checkpoints: Vec<u64>,
    pub re_log: Vec<f64>,
    pub im_log: Vec<f64>,
}

/// A set of draws plus provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleBatch {
    pub group: Group,
    pub n: u32,
    pub sampler: SamplerId,
    pub seed: u64,
    pub workers: usize,
    pub re_log: Vec<f64>,
    pub im_log: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.re_log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re_log.is_empty()
    }
}

static DEGENERATE_RESAMPLES: AtomicU64 = AtomicU64::new(0);

/// Number of factor draws discarded because the factor collapsed to zero
/// (log would be -inf). Each such draw is resampled and counted here.
pub fn degenerate_resample_count() -> u64 {
    DEGENERATE_RESAMPLES.load(Ordering::Relaxed)
}

/// One unitary log factor: principal log of 1 + e^{i theta} sqrt(beta_{1,k-1}).
/// Draw order: beta (absent for k = 1, where beta_{1,0} is the Dirac mass at
/// 1), then theta. Returns (re, im) with im in (-pi/2, pi/2].
#[inline]
pub fn unitary_log_factor(k: u32, rng: &mut impl RngCore) -> (f64, f64) {
    debug_assert!(k >= 1);
    loop {
        let beta = sample_beta(1.0, (k - 1) as f64, rng).expect("valid parameters");
        let theta = std::f64::consts::TAU * open01(rng);
        let r = beta.sqrt();
        let (s, c) = theta.sin_cos();
        let re = 0.5 * (1.0 + beta + 2.0 * r * c).ln();
        if re.is_finite() {
            return (re, (r * s).atan2(1.0 + r * c));
        }
        DEGENERATE_RESAMPLES.fetch_add(1, Ordering::Relaxed);
    }
}

/// Real part only of one unitary log factor, same law as the `.0` component
/// of `unitary_log_factor`. Skips the argument arithmetic; used by the rate
/// diagnostics, which consume large batches of log-modulus draws only.
#[inline]
pub fn unitary_log_factor_re(k: u32, rng: &mut impl RngCore) -> f64 {
    debug_assert!(k >= 1);
    loop {
        let beta = sample_beta(1.0, (k - 1) as f64, rng).expect("valid parameters");
        let theta = std::f64::consts::TAU * open01(rng);
        let re = 0.5 * (1.0 + beta + 2.0 * beta.sqrt() * theta.cos()).ln();
        if re.is_finite() {
            return re;
        }
        DEGENERATE_RESAMPLES.fetch_add(1, Ordering::Relaxed);
    }
}

/// One SO(2n) log factor, k in 2..=2n: log(1 + eps sqrt(beta_{1/2,(k-1)/2})).
/// Draw order: beta, then the sign bit.
#[inline]
pub fn so2n_log_factor(k: u32, rng: &mut impl RngCore) -> f64 {
    debug_assert!(k >= 2);
    loop {
        let beta = sample_beta(0.5, (k - 1) as f64 / 2.0, rng).expect("valid parameters");
        let eps = if rng.next_u64() & 1 == 1 { -1.0 } else { 1.0 };
        let v = (eps * beta.sqrt()).ln_1p();
        if v.is_finite() {
            return v;
        }
        DEGENERATE_RESAMPLES.fetch_add(1, Ordering::Relaxed);
    }
}

/// One joint factor (T_j, W_j): |W_j| = arccos sqrt(beta_{j-1/2,1/2}) with a
/// fair sign, T_j = log(beta_{j,j-1} * 2 cos W_j), the two coupled through
/// the shared beta draw. Draw order: beta_{j-1/2,1/2}, sign, beta_{j,j-1}
/// (absent for j = 1 where it is the Dirac mass at 1).
#[inline]
pub fn joint_log_factor(j: u32, rng: &mut impl RngCore) -> (f64, f64) {
    debug_assert!(j >= 1);
    let jf = j as f64;
    let b1 = sample_beta(jf - 0.5, 0.5, rng).expect("valid parameters");
    let w = {
        let w = b1.sqrt().min(1.0).acos();
        if rng.next_u64() & 1 == 1 {
            -w
        } else {
            w
        }
    };
    let b2 = if j == 1 { 1.0 } else { sample_beta(jf, jf - 1.0, rng).expect("valid parameters") };
    let t = std::f64::consts::LN_2 + 0.5 * b1.ln() + b2.ln();
    (t, w)
}

/// log det(I - V) for Haar V in U(n), via the product of independent factors.
pub fn sample_unitary_log_charpoly(n: u32, rng: &mut impl RngCore) -> LogCharPoly {
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 1..=n {
        let (fr, fi) = unitary_log_factor(k, rng);
        re += fr;
        im += fi;
    }
    LogCharPoly { re_log: re, im_log: im, n, group: Group::Unitary }
}

/// The independent-sum representation (sum T_j, sum W_j), equal in law to
/// (log |Z|, arg Z) of the unitary product sampler.
pub fn sample_joint(n: u32, rng: &mut impl RngCore) -> LogCharPoly {
    let mut re = 0.0;
    let mut im = 0.0;
    for j in 1..=n {
        let (t, w) = joint_log_factor(j, rng);
        re += t;
        im += w;
    }
    LogCharPoly { re_log: re, im_log: im, n, group: Group::Unitary }
}

/// log det(I - g) for Haar g in SO(2n): re_log = log 2 + sum of factor logs,
/// im_log identically zero.
pub fn sample_so2n_log_charpoly(n: u32, rng: &mut impl RngCore) -> LogCharPoly {
    let mut re = std::f64::consts::LN_2;
    for k in 2..=(2 * n) {
        re += so2n_log_factor(k, rng);
    }
    LogCharPoly { re_log: re, im_log: 0.0, n, group: Group::SpecialOrthogonalEven }
}

/// Unitary running sums recorded at each checkpoint dimension (strictly
/// increasing, all >= 1). Cost is one pass to the largest checkpoint.
pub fn sample_trajectory(checkpoints: &[u64], rng: &mut impl RngCore) -> Result<Trajectory> {
    if checkpoints.is_empty() {
        return Err(Error::domain("sample_trajectory", "empty checkpoint list"));
    }
    if checkpoints[0] < 1 {
        return Err(Error::domain("sample_trajectory", "checkpoints must be >= 1"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("sample_trajectory", "checkpoints must be strictly increasing"));
    }
    let last = *checkpoints.last().unwrap();
    if last > u32::MAX as u64 {
        return Err(Error::domain("sample_trajectory", "checkpoint exceeds supported dimension"));
    }
    let mut re = 0.0;
    let mut im = 0.0;
    let mut out_re = Vec::with_capacity(checkpoints.len());
    let mut out_im = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for k in 1..=last {
        let (fr, fi) = unitary_log_factor(k as u32, rng);
        re += fr;
        im += fi;
        if k == checkpoints[next] {
            out_re.push(re);
            out_im.push(im);
            next += 1;
            if next == checkpoints.len() {
                break;
            }
        }
    }
    Ok(Trajectory { checkpoints: checkpoints.to_vec(), re_log: out_re, im_log: out_im })
}

/// Contiguous-substream parallel driver: splits `m` tasks over `workers`
/// streams (stream ids 0..workers), runs `task` on each worker's index range
/// with its own RngStream, and returns the per-worker outputs in stream-id
/// order, independent of scheduling.
pub fn parallel_streams<T, F>(m: usize, seed: u64, workers: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream, std::ops::Range<usize>) -> T + Sync,
{
    let workers = workers.max(1);
    let base = m / workers;
    let rem = m % workers;
    let mut ranges = Vec::with_capacity(workers);
    let mut lo = 0usize;
    for w in 0..workers {
        let len = base + usize::from(w < rem);
        ranges.push((w as u64, lo..lo + len));
        lo += len;
    }
    use rayon::prelude::*;
    ranges
        .into_par_iter()
        .map(|(stream, range)| {
            let mut rng = RngStream::new(seed, stream);
            task(&mut rng, range)
        })
        .collect()
}

/// Draw `m` samples with one of the product-form samplers, split across
/// deterministic worker substreams.
pub fn sample_batch(
    sampler: SamplerId,
    n: u32,
    m: usize,
    seed: u64,
    workers: usize,
) -> Result<SampleBatch> {
    let (group, f): (Group, fn(u32, &mut RngStream) -> LogCharPoly) = match sampler {
        SamplerId::UnitaryProduct => (Group::Unitary, |n, r| sample_unitary_log_charpoly(n, r)),
        SamplerId::UnitaryJoint => (Group::Unitary, |n, r| sample_joint(n, r)),
        SamplerId::So2nProduct => {
            (Group::SpecialOrthogonalEven, |n, r| sample_so2n_log_charpoly(n, r))
        }
        other => {
            return Err(Error::domain(
                "sample_batch",
                format!("{other:?} is a matrix-oracle sampler; use the matrix module driver"),
            ))
        }
    };
    if n == 0 {
        return Err(Error::domain("sample_batch", "requires n >= 1"));
    }
    let parts = parallel_streams(m, seed, workers, |rng, range| {
        let mut re = Vec::with_capacity(range.len());
        let mut im = Vec::with_capacity(range.len());
        for _ in range {
            let d = f(n, rng);
            re.push(d.re_log);
            im.push(d.im_log);
        }
        (re, im)
    });
    let mut re_log = Vec::with_capacity(m);
    let mut im_log = Vec::with_capacity(m);
    for (re, im) in parts {
        re_log.extend(re);
        im_log.extend(im);
    }
    Ok(SampleBatch { group, n, sampler, seed, workers: workers.max(1), re_log, im_log })
}
