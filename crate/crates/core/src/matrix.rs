//! Brute-force matrix oracle: explicit Haar-distributed matrices and direct
//! characteristic-polynomial evaluation, used as ground truth for the O(N)
//! product samplers. Cost is O(N^3) per draw, capped at modest sizes.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::samplers::{parallel_streams, Group, LogCharPoly, SampleBatch, SamplerId};
use crate::stats::{ks_two_sample, mean_se};

type C64 = Complex<f64>;

pub const MAX_UNITARY_DIM: u32 = 64;
pub const MAX_SO_HALF_DIM: u32 = 32;

const UNITARITY_TOL: f64 = 1e-12;
const DET_TOL: f64 = 1e-10;

/// A validated unitary matrix: max-entry norm of M*M - I at most 1e-12.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    pub fn try_new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::linalg("UnitaryMatrix", "requires a nonempty square matrix"));
        }
        let n = m.nrows();
        let gram = m.adjoint() * &m;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((gram[(i, j)] - want).norm());
            }
        }
        if worst > UNITARITY_TOL {
            return Err(Error::linalg(
                "UnitaryMatrix",
                format!("unitarity defect {worst:.3e} exceeds {UNITARITY_TOL:.0e}"),
            ));
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    /// Multiply by a unit-modulus scalar (stays unitary; used by the rotation
    /// invariance checks).
    pub fn rotated(&self, phi: f64) -> UnitaryMatrix {
        let z = C64::new(phi.cos(), phi.sin());
        UnitaryMatrix(self.0.map(|w| w * z))
    }
}

/// A validated special orthogonal matrix: max-entry norm of M^T M - I at most
/// 1e-12 and det M = +1 within 1e-10.
#[derive(Debug, Clone)]
pub struct OrthogonalMatrix(DMatrix<f64>);

impl OrthogonalMatrix {
    pub fn try_new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::linalg("OrthogonalMatrix", "requires a nonempty square matrix"));
        }
        let n = m.nrows();
        let gram = m.transpose() * &m;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - want).abs());
            }
        }
        if worst > UNITARITY_TOL {
            return Err(Error::linalg(
                "OrthogonalMatrix",
                format!("orthogonality defect {worst:.3e} exceeds {UNITARITY_TOL:.0e}"),
            ));
        }
        let det = m.clone().lu().determinant();
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::linalg(
                "OrthogonalMatrix",
                format!("determinant {det} is not +1 within {DET_TOL:.0e}"),
            ));
        }
        Ok(OrthogonalMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn complex_ginibre(n: usize, rng: &mut impl RngCore) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn check_unitary_dim(n: u32, who: &'static str) -> Result<usize> {
    if n < 1 || n > MAX_UNITARY_DIM {
        return Err(Error::domain(who, format!("n = {n} outside 1..={MAX_UNITARY_DIM}")));
    }
    Ok(n as usize)
}

/// Haar unitary via QR of a complex Ginibre matrix, with the R-diagonal
/// phases pushed into Q so the factorization is measure-correct.
pub fn sample_haar_unitary_qr(n: u32, rng: &mut impl RngCore) -> Result<UnitaryMatrix> {
    let n = check_unitary_dim(n, "sample_haar_unitary_qr")?;
    loop {
        let qr = complex_ginibre(n, rng).qr();
        let r = qr.r();
        let mut q = qr.q();
        if (0..n).any(|j| r[(j, j)].norm() == 0.0) {
            continue; // measure-zero degenerate Ginibre draw
        }
        for j in 0..n {
            let d = r[(j, j)];
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        return UnitaryMatrix::try_new(q);
    }
}

/// Haar unitary built recursively: a 1x1 uniform phase, then at each size a
/// uniformly distributed first column completed to a unitary and composed
/// with the previous matrix on the complement.
pub fn sample_haar_unitary_recursive(n: u32, rng: &mut impl RngCore) -> Result<UnitaryMatrix> {
    let n = check_unitary_dim(n, "sample_haar_unitary_recursive")?;
    let theta = std::f64::consts::TAU * crate::rng::open01(rng);
    let mut v = DMatrix::from_element(1, 1, C64::new(theta.cos(), theta.sin()));
    for dim in 2..=n {
        let col = random_unit_vector(dim, rng);
        let m = complete_to_unitary(col)?;
        // block-embed the previous unitary: diag(1, V)
        let mut block = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        block[(0, 0)] = C64::new(1.0, 0.0);
        block.view_mut((1, 1), (dim - 1, dim - 1)).copy_from(&v);
        v = m * block;
    }
    UnitaryMatrix::try_new(v)
}

fn random_unit_vector(n: usize, rng: &mut impl RngCore) -> DVector<C64> {
    loop {
        let g = DVector::from_fn(n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let norm = g.norm();
        if norm > 1e-100 {
            return g / C64::new(norm, 0.0);
        }
    }
}

/// Complete `first` (unit norm) to a unitary matrix by modified Gram-Schmidt
/// over the standard basis, skipping any candidate whose residual is below
/// the pivot threshold. Two orthogonalization passes keep the defect near
/// machine precision.
fn complete_to_unitary(first: DVector<C64>) -> Result<DMatrix<C64>> {
    const PIVOT_TOL: f64 = 1e-8;
    let n = first.nrows();
    let mut cols: Vec<DVector<C64>> = vec![first];
    let mut candidate = 0usize;
    while cols.len() < n {
        if candidate >= n {
            return Err(Error::linalg(
                "complete_to_unitary",
                "ran out of basis candidates during completion",
            ));
        }
        let mut v = DVector::from_fn(n, |i, _| {
            if i == candidate {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        candidate += 1;
        for _pass in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm < PIVOT_TOL {
            continue;
        }
        cols.push(v / C64::new(norm, 0.0));
    }
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (j, c) in cols.iter().enumerate() {
        m.column_mut(j).copy_from(c);
    }
    Ok(m)
}

/// Haar matrix on SO(2n): QR of a real Ginibre with positive R diagonal gives
/// O(2n); a draw in the det = -1 component is reflected into SO(2n) by
/// negating its last column.
pub fn sample_haar_so2n(n: u32, rng: &mut impl RngCore) -> Result<OrthogonalMatrix> {
    if n < 1 || n > MAX_SO_HALF_DIM {
        return Err(Error::domain(
            "sample_haar_so2n",
            format!("n = {n} outside 1..={MAX_SO_HALF_DIM}"),
        ));
    }
    let dim = 2 * n as usize;
    loop {
        let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        if (0..dim).any(|j| r[(j, j)] == 0.0) {
            continue;
        }
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                for i in 0..dim {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if q.clone().lu().determinant() < 0.0 {
            let last = dim - 1;
            for i in 0..dim {
                q[(i, last)] = -q[(i, last)];
            }
        }
        return OrthogonalMatrix::try_new(q);
    }
}

/// Eigenvalues of a unitary matrix via its Schur form.
pub fn unitary_eigenvalues(v: &UnitaryMatrix) -> Result<Vec<C64>> {
    let schur = v
        .as_matrix()
        .clone()
        .try_schur(1e-13, 100_000)
        .ok_or_else(|| Error::linalg("unitary_eigenvalues", "Schur iteration did not converge"))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// log det(I - x V) from the eigenvalues of V, accumulating the principal
/// log of each factor 1 - x e^{i theta}. Requires 0 <= x <= 1.
pub fn log_charpoly_direct(v: &UnitaryMatrix, x: f64) -> Result<LogCharPoly> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("log_charpoly_direct", format!("x = {x} outside [0, 1]")));
    }
    let eig = unitary_eigenvalues(v)?;
    let mut re = 0.0;
    let mut im = 0.0;
    for lam in eig {
        let w = C64::new(1.0, 0.0) - lam * x;
        re += w.norm().ln();
        im += w.im.atan2(w.re);
    }
    Ok(LogCharPoly { re_log: re, im_log: im, n: v.dim() as u32, group: Group::Unitary })
}

/// log det(I - g) for special orthogonal g, through a real LU determinant;
/// the determinant is nonnegative for SO(2n), and the measure-zero draws
/// where it rounds to <= 0 surface as an error for the caller to resample.
pub fn log_det_i_minus(g: &OrthogonalMatrix) -> Result<f64> {
    let n = g.dim();
    let b = DMatrix::identity(n, n) - g.as_matrix();
    let det = b.lu().determinant();
    if det <= 0.0 {
        return Err(Error::linalg(
            "log_det_i_minus",
            format!("det(I - g) = {det:e} not positive (eigenvalue 1 within roundoff)"),
        ));
    }
    Ok(det.ln())
}

/// Draw `m` log-charpoly samples from one of the matrix oracles, split across
/// deterministic worker substreams. `x` is the evaluation point for the
/// unitary oracles (use 1.0 for the on-circle law); ignored for SO(2n).
pub fn sample_matrix_batch(
    sampler: SamplerId,
    n: u32,
    x: f64,
    m: usize,
    seed: u64,
    workers: usize,
) -> Result<SampleBatch> {
    let group = match sampler {
        SamplerId::MatrixQr | SamplerId::MatrixRecursive => Group::Unitary,
        SamplerId::MatrixSo2n => Group::SpecialOrthogonalEven,
        other => {
            return Err(Error::domain(
                "sample_matrix_batch",
                format!("{other:?} is a product sampler; use samplers::sample_batch"),
            ))
        }
    };
    // validate dimensions up front so the parallel section cannot error
    match sampler {
        SamplerId::MatrixSo2n => {
            if n < 1 || n > MAX_SO_HALF_DIM {
                return Err(Error::domain(
                    "sample_matrix_batch",
                    format!("n = {n} outside 1..={MAX_SO_HALF_DIM}"),
                ));
            }
        }
        _ => {
            check_unitary_dim(n, "sample_matrix_batch")?;
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::domain(
                    "sample_matrix_batch",
                    format!("x = {x} outside [0, 1]"),
                ));
            }
        }
    }
    let parts = parallel_streams(m, seed, workers, |rng, range| {
        let mut re = Vec::with_capacity(range.len());
        let mut im = Vec::with_capacity(range.len());
        for _ in range {
            let d = loop {
                let attempt = match sampler {
                    SamplerId::MatrixQr => sample_haar_unitary_qr(n, rng)
                        .and_then(|v| log_charpoly_direct(&v, x)),
                    SamplerId::MatrixRecursive => sample_haar_unitary_recursive(n, rng)
                        .and_then(|v| log_charpoly_direct(&v, x)),
                    SamplerId::MatrixSo2n => sample_haar_so2n(n, rng).and_then(|g| {
                        log_det_i_minus(&g).map(|re| LogCharPoly {
                            re_log: re,
                            im_log: 0.0,
                            n,
                            group: Group::SpecialOrthogonalEven,
                        })
                    }),
                    _ => unreachable!(),
                };
                match attempt {
                    Ok(d) if d.re_log.is_finite() => break d,
                    // eigenvalue-at-1 roundoff or a degenerate Ginibre draw:
                    // resample; these carry zero probability mass
                    _ => continue,
                }
            };
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

fn complex_batch_stats(zs: &[(f64, f64)]) -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("re", zs.iter().map(|z| z.0).collect()),
        ("im", zs.iter().map(|z| z.1).collect()),
        ("re^2", zs.iter().map(|z| z.0 * z.0).collect()),
        ("im^2", zs.iter().map(|z| z.1 * z.1).collect()),
        ("|z|^2", zs.iter().map(|z| z.0 * z.0 + z.1 * z.1).collect()),
    ]
}

fn equal_in_law_checks(
    label: &str,
    lhs: &[(f64, f64)],
    rhs: &[(f64, f64)],
    z_threshold: f64,
    significance: f64,
) -> Result<Vec<CheckReport>> {
    let m = lhs.len() as u64;
    let mut checks = Vec::new();
    for ((name, a), (_, b)) in complex_batch_stats(lhs).into_iter().zip(complex_batch_stats(rhs))
    {
        let (ma, sa) = mean_se(&a);
        let (mb, sb) = mean_se(&b);
        let se = (sa * sa + sb * sb).sqrt();
        checks.push(CheckReport::z_test(
            format!("{label}: E[{name}] lhs vs rhs"),
            mb,
            ma,
            se,
            m,
            z_threshold,
        ));
    }
    for (name, pick) in [("re", 0usize), ("im", 1usize)] {
        let mut a: Vec<f64> = lhs.iter().map(|z| if pick == 0 { z.0 } else { z.1 }).collect();
        let mut b: Vec<f64> = rhs.iter().map(|z| if pick == 0 { z.0 } else { z.1 }).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let ks = ks_two_sample(&a, &b)?;
        checks.push(CheckReport::ks_test(
            format!("{label}: two-sample KS on {name}"),
            ks.statistic,
            ks.p_value,
            m,
            significance,
        ));
    }
    Ok(checks)
}

/// Monte Carlo verification that det(I - x V_n) is equal in law to the
/// one-column expansion built from an (n-1)-dimensional Haar matrix and an
/// independent uniform first column: (1 - x M11) D + x(1-x)/(1 - conj(M11))
/// * Mt* (V* - x I)^{-1} Mt * D, with D = det(I - x V).
/// Reports first/second moment z-tests and two-sample KS on both parts.
pub fn verify_offcircle_identity(
    n: u32,
    x: f64,
    m: usize,
    seed: u64,
    workers: usize,
    z_threshold: f64,
    significance: f64,
) -> Result<Vec<CheckReport>> {
    if !(2..=8).contains(&n) {
        return Err(Error::domain("verify_offcircle_identity", format!("n = {n} outside 2..=8")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain("verify_offcircle_identity", format!("x = {x} outside (0, 1)")));
    }
    let nu = n as usize;
    let lhs: Vec<(f64, f64)> = parallel_streams(m, seed, workers, |rng, range| {
        let mut out = Vec::with_capacity(range.len());
        for _ in range {
            let v = sample_haar_unitary_qr(n, rng).expect("dimension validated");
            let d = det_i_minus_x(v.as_matrix(), x);
            out.push((d.re, d.im));
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    let rhs: Vec<(f64, f64)> = parallel_streams(m, seed + 1, workers, |rng, range| {
        let mut out = Vec::with_capacity(range.len());
        for _ in range {
            let v = sample_haar_unitary_qr(n - 1, rng).expect("dimension validated");
            let col = random_unit_vector(nu, rng);
            let m11 = col[0];
            let mt = col.rows(1, nu - 1).into_owned();
            let d = det_i_minus_x(v.as_matrix(), x);
            let b = v.as_matrix().adjoint()
                - DMatrix::<C64>::identity(nu - 1, nu - 1) * C64::new(x, 0.0);
            let y = b.lu().solve(&mt).expect("V* - xI is invertible for x < 1");
            let quad: C64 = mt.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
            let z = (C64::new(1.0, 0.0) - m11 * x) * d
                + quad * d * x * (1.0 - x) / (C64::new(1.0, 0.0) - m11.conj());
            out.push((z.re, z.im));
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    equal_in_law_checks(
        &format!("off-circle identity n={n} x={x}"),
        &lhs,
        &rhs,
        z_threshold,
        significance,
    )
}

/// Monte Carlo verification of the eigenangle form of the same expansion:
/// the resolvent contraction is written as a weighted sum over the
/// eigenangles of the smaller matrix, with weights |Mt_j|^2.
pub fn verify_eigenangle_identity(
    n: u32,
    x: f64,
    m: usize,
    seed: u64,
    workers: usize,
    z_threshold: f64,
    significance: f64,
) -> Result<Vec<CheckReport>> {
    if !(2..=6).contains(&n) {
        return Err(Error::domain("verify_eigenangle_identity", format!("n = {n} outside 2..=6")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain("verify_eigenangle_identity", format!("x = {x} outside (0, 1)")));
    }
    let nu = n as usize;
    let lhs: Vec<(f64, f64)> = parallel_streams(m, seed, workers, |rng, range| {
        let mut out = Vec::with_capacity(range.len());
        for _ in range {
            let v = sample_haar_unitary_qr(n, rng).expect("dimension validated");
            let d = det_i_minus_x(v.as_matrix(), x);
            out.push((d.re, d.im));
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    let rhs: Vec<(f64, f64)> = parallel_streams(m, seed + 1, workers, |rng, range| {
        let mut out = Vec::with_capacity(range.len());
        for _ in range {
            let v = sample_haar_unitary_qr(n - 1, rng).expect("dimension validated");
            let eig = unitary_eigenvalues(&v).expect("Schur converges on unitary input");
            let col = random_unit_vector(nu, rng);
            let m11 = col[0];
            let prod_all: C64 = eig
                .iter()
                .map(|e| C64::new(1.0, 0.0) - *e * x)
                .product();
            let mut s = C64::new(0.0, 0.0);
            for (j, e) in eig.iter().enumerate() {
                let w = col[j + 1].norm_sqr();
                s += *e * w * prod_all / (C64::new(1.0, 0.0) - *e * x);
            }
            let z = (C64::new(1.0, 0.0) - m11 * x) * prod_all
                + s * x * (1.0 - x) / (C64::new(1.0, 0.0) - m11.conj());
            out.push((z.re, z.im));
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    equal_in_law_checks(
        &format!("eigenangle identity n={n} x={x}"),
        &lhs,
        &rhs,
        z_threshold,
        significance,
    )
}

fn det_i_minus_x(v: &DMatrix<C64>, x: f64) -> C64 {
    let n = v.nrows();
    let b = DMatrix::<C64>::identity(n, n) - v * C64::new(x, 0.0);
    b.lu().determinant()
}
