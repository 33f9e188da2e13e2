//! Gamma and beta samplers plus the angular factor W_j.
//!
//! W_j is the angle variable with density K_j cos^{2(j-1)} v on (-pi/2, pi/2);
//! it is sampled through the arccos of a beta square root, with a plain
//! rejection sampler kept alongside as an independent cross-check of the
//! density normalization.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::open01;
use crate::specfun::ln_gamma;

/// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shapes below 1 are boosted
/// through Gamma(shape + 1) and a power of a uniform.
pub fn sample_gamma(shape: f64, rng: &mut impl RngCore) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::domain("sample_gamma", format!("requires shape > 0, got {shape}")));
    }
    if shape < 1.0 {
        let boosted = marsaglia_tsang(shape + 1.0, rng);
        let u = open01(rng);
        return Ok(boosted * u.powf(1.0 / shape));
    }
    Ok(marsaglia_tsang(shape, rng))
}

fn marsaglia_tsang(shape: f64, rng: &mut impl RngCore) -> f64 {
    debug_assert!(shape >= 1.0);
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = open01(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Beta(a, b) for `a > 0`, `b >= 0`. `b = 0` is the Dirac mass at 1 and
/// returns exactly 1.0. One-parameter edges use the exact inverse CDF;
/// the general case is the gamma ratio.
pub fn sample_beta(a: f64, b: f64, rng: &mut impl RngCore) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain("sample_beta", format!("requires a > 0, got {a}")));
    }
    if !(b >= 0.0) {
        return Err(Error::domain("sample_beta", format!("requires b >= 0, got {b}")));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    if a == 1.0 {
        // F(x) = 1 - (1-x)^b
        return Ok(1.0 - open01(rng).powf(1.0 / b));
    }
    if b == 1.0 {
        // F(x) = x^a
        return Ok(open01(rng).powf(1.0 / a));
    }
    let x = sample_gamma(a, rng)?;
    let y = sample_gamma(b, rng)?;
    Ok(x / (x + y))
}

/// Parameters of the angle variable W_j: density K_j cos^{2(j-1)} v on
/// (-pi/2, pi/2), with K_j = 2^{2(j-1)} ((j-1)!)^2 / (pi (2j-2)!).
#[derive(Debug, Clone, Copy)]
pub struct WjParams {
    pub j: u32,
    pub k_j: f64,
    log_k: f64,
}

impl WjParams {
    pub fn new(j: u32) -> Result<Self> {
        if j == 0 {
            return Err(Error::domain("WjParams", "requires j >= 1"));
        }
        let jf = j as f64;
        let log_k = 2.0 * (jf - 1.0) * std::f64::consts::LN_2 + 2.0 * ln_gamma(jf)?
            - std::f64::consts::PI.ln()
            - ln_gamma(2.0 * jf - 1.0)?;
        Ok(WjParams { j, k_j: log_k.exp(), log_k })
    }

    pub fn log_k(&self) -> f64 {
        self.log_k
    }
}

/// Density of W_j at v.
pub fn w_density(params: &WjParams, v: f64) -> f64 {
    if v.abs() >= std::f64::consts::FRAC_PI_2 {
        return 0.0;
    }
    if params.j == 1 {
        return params.k_j;
    }
    (params.log_k + 2.0 * (params.j as f64 - 1.0) * v.cos().ln()).exp()
}

/// Draw W_j as a signed arccos of a beta square root:
/// |W_j| = arccos sqrt(Beta(j - 1/2, 1/2)), sign fair and independent.
pub fn sample_w(params: &WjParams, rng: &mut impl RngCore) -> f64 {
    let b = sample_beta(params.j as f64 - 0.5, 0.5, rng)
        .expect("beta parameters are valid for j >= 1");
    let w = b.sqrt().min(1.0).acos();
    if rng.next_u64() & 1 == 1 {
        -w
    } else {
        w
    }
}

/// Rejection sampler for W_j straight from the density; independent of the
/// beta route, used to cross-check it.
pub fn sample_w_rejection(params: &WjParams, rng: &mut impl RngCore) -> f64 {
    let e = 2.0 * (params.j as f64 - 1.0);
    loop {
        let v = (open01(rng) - 0.5) * std::f64::consts::PI;
        if e == 0.0 {
            return v;
        }
        let u = open01(rng);
        if u.ln() < e * v.cos().ln() {
            return v;
        }
    }
}
