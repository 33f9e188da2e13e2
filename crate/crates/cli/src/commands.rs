//! Command implementations. Each emits flat records through the writer;
//! summaries and warnings go to stderr so stdout stays machine-readable.

use std::time::Instant;

use charpoly::analytics::{empirical_moment, moment_log, variance_sum, MomentQuery};
use charpoly::matrix::sample_matrix_batch;
use charpoly::samplers::{parallel_streams, sample_batch, sample_trajectory, SamplerId, Trajectory};
use charpoly::suites::{run_suite, SuiteConfig};

use crate::output::{base_rec, opt_f64, Format, Rec, Val, Writer};
use crate::settings::Settings;
use crate::{CliError, GroupArg, SamplerArg, SuiteArg};

fn put(w: &mut Writer, rec: Rec) -> Result<(), CliError> {
    w.emit(&rec).map_err(|source| CliError::Io { path: w.path_label(), source })
}

fn header(
    w: &mut Writer,
    s: &Settings,
    command: &str,
    extras: &[(&'static str, Val)],
) -> Result<(), CliError> {
    if s.no_header {
        return Ok(());
    }
    w.emit_header(command, s.seed, s.workers, extras)
        .map_err(|source| CliError::Io { path: w.path_label(), source })
}

/// Worker substream that produced global draw `i` of `m`: draws are split
/// into contiguous chunks, one per worker, the first m % workers chunks one
/// draw longer. Mirrors the batch samplers' work split.
fn stream_of(i: u64, m: u64, workers: u64) -> u64 {
    let workers = workers.max(1);
    let base = m / workers;
    let rem = m % workers;
    let fat = (base + 1) * rem;
    if i < fat {
        i / (base + 1)
    } else {
        rem + (i - fat) / base.max(1)
    }
}

pub fn sample(
    group: GroupArg,
    n: u32,
    samples: Option<u64>,
    sampler: Option<SamplerArg>,
    x: Option<f64>,
    s: &Settings,
    w: &mut Writer,
) -> Result<bool, CliError> {
    let sampler = sampler.unwrap_or(match group {
        GroupArg::Unitary => SamplerArg::Product,
        GroupArg::So2n => SamplerArg::So2nProduct,
    });
    if sampler.group() != group {
        return Err(CliError::Usage(format!(
            "sampler {} draws from the {} group; got --group {}",
            sampler.name(),
            sampler.group().name(),
            group.name()
        )));
    }
    if x.is_some() && !sampler.is_matrix() {
        return Err(CliError::Usage(format!(
            "--x applies to matrix samplers only; {} evaluates at x = 1",
            sampler.name()
        )));
    }
    let m = samples.or(s.samples).unwrap_or(1000).max(1);

    header(
        w,
        s,
        "sample",
        &[
            ("group", Val::Str(group.name().into())),
            ("sampler", Val::Str(sampler.name().into())),
            ("n", Val::U64(n as u64)),
            ("samples", Val::U64(m)),
            ("x", x.map(Val::F64).unwrap_or(Val::Null)),
        ],
    )?;

    let batch = if sampler.is_matrix() {
        sample_matrix_batch(sampler.to_id(), n, x.unwrap_or(1.0), m as usize, s.seed, s.workers)?
    } else {
        sample_batch(sampler.to_id(), n, m as usize, s.seed, s.workers)?
    };

    for (i, (&re, &im)) in batch.re_log.iter().zip(&batch.im_log).enumerate() {
        let mut rec = base_rec("draw", s.seed, stream_of(i as u64, m, s.workers as u64));
        rec.push(("index", Val::U64(i as u64)));
        rec.push(("n", Val::U64(n as u64)));
        rec.push(("group", Val::Str(group.name().into())));
        rec.push(("sampler", Val::Str(sampler.name().into())));
        rec.push(("re_log", Val::F64(re)));
        rec.push(("im_log", Val::F64(im)));
        put(w, Rec(rec))?;
    }
    Ok(true)
}

pub fn moments(
    group: GroupArg,
    ns: &[u32],
    t: f64,
    s_freq: f64,
    empirical: Option<u64>,
    st: &Settings,
    w: &mut Writer,
) -> Result<bool, CliError> {
    header(
        w,
        st,
        "moments",
        &[
            ("group", Val::Str(group.name().into())),
            ("t", Val::F64(t)),
            ("s", Val::F64(s_freq)),
            ("empirical", empirical.map(Val::U64).unwrap_or(Val::Null)),
        ],
    )?;

    for &n in ns {
        let q = MomentQuery { n, t, s: s_freq, group: group.to_group() };
        let log_m = moment_log(&q)?;
        let mut rec = base_rec("moment", st.seed, 0);
        rec.push(("group", Val::Str(group.name().into())));
        rec.push(("n", Val::U64(n as u64)));
        rec.push(("t", Val::F64(t)));
        rec.push(("s", Val::F64(s_freq)));
        rec.push(("log_moment", Val::F64(log_m)));
        // exp(log_moment); null once it leaves f64 range
        rec.push(("moment", Val::F64(log_m.exp())));

        if let Some(m) = empirical {
            let m = m.max(2);
            let sampler = match group {
                GroupArg::Unitary => SamplerId::UnitaryProduct,
                GroupArg::So2n => SamplerId::So2nProduct,
            };
            let batch = sample_batch(sampler, n, m as usize, st.seed, st.workers)?;
            let est = empirical_moment(&batch, t, s_freq)?;
            // the exact moment is real: the law of Z is invariant under conjugation
            let exact = log_m.exp();
            let z_re = if est.re_se > 0.0 {
                (est.re - exact) / est.re_se
            } else if est.re == exact {
                0.0
            } else {
                f64::INFINITY
            };
            let z_im = if est.im_se > 0.0 {
                est.im / est.im_se
            } else if est.im == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            rec.push(("samples", Val::U64(m)));
            rec.push(("estimate_re", Val::F64(est.re)));
            rec.push(("estimate_im", Val::F64(est.im)));
            rec.push(("se_re", Val::F64(est.re_se)));
            rec.push(("se_im", Val::F64(est.im_se)));
            rec.push(("z_re", Val::F64(z_re)));
            rec.push(("z_im", Val::F64(z_im)));
        }
        put(w, Rec(rec))?;
    }
    Ok(true)
}

pub fn validate(
    suite: SuiteArg,
    samples: Option<u64>,
    significance: Option<f64>,
    z_threshold: Option<f64>,
    st: &Settings,
    w: &mut Writer,
) -> Result<bool, CliError> {
    let cfg = SuiteConfig {
        samples: samples.or(st.samples),
        seed: st.seed,
        workers: st.workers,
        significance: significance.unwrap_or(st.significance),
        z_threshold: z_threshold.unwrap_or(st.z_threshold),
    };

    header(
        w,
        st,
        "validate",
        &[
            ("suite", Val::Str(suite.name().into())),
            ("samples", cfg.samples.map(Val::U64).unwrap_or(Val::Null)),
            ("significance", Val::F64(cfg.significance)),
            ("z_threshold", Val::F64(cfg.z_threshold)),
        ],
    )?;

    let mut all_pass = true;
    for id in suite.ids() {
        let rep = run_suite(id, &cfg)?;
        for c in &rep.checks {
            let mut rec = base_rec("check", st.seed, 0);
            rec.push(("suite", Val::Str(rep.suite.clone())));
            rec.push(("quantity", Val::Str(c.quantity.clone())));
            rec.push(("exact_value", opt_f64(c.exact_value)));
            rec.push(("estimate", opt_f64(c.estimate)));
            rec.push(("std_error", opt_f64(c.std_error)));
            rec.push(("p_value", opt_f64(c.p_value)));
            rec.push(("n_samples", Val::U64(c.n_samples)));
            rec.push(("threshold", Val::F64(c.threshold)));
            rec.push(("pass", Val::Bool(c.pass)));
            put(w, Rec(rec))?;
        }
        // suite summaries have a different field layout, so they stay out of
        // CSV output; stderr carries the human-readable roll-up either way
        if w.format() == Format::Jsonl {
            let mut rec = base_rec("suite", st.seed, 0);
            rec.push(("suite", Val::Str(rep.suite.clone())));
            rec.push(("checks", Val::U64(rep.checks.len() as u64)));
            rec.push(("n_failed", Val::U64(rep.n_failed as u64)));
            rec.push(("passed", Val::Bool(rep.passed)));
            rec.push(("warnings", Val::Str(rep.warnings.join("; "))));
            put(w, Rec(rec))?;
        }
        eprintln!(
            "suite {}: {} checks, {} failed",
            rep.suite,
            rep.checks.len(),
            rep.n_failed
        );
        for warn in &rep.warnings {
            eprintln!("warning [{}]: {warn}", rep.suite);
        }
        all_pass &= rep.passed;
    }
    Ok(all_pass)
}

pub fn lil(
    n_max: u64,
    checkpoints: Option<Vec<u64>>,
    trajectories: u64,
    st: &Settings,
    w: &mut Writer,
) -> Result<bool, CliError> {
    if n_max < 100 {
        return Err(CliError::Usage("--n-max must be at least 100".into()));
    }
    if n_max > u32::MAX as u64 {
        return Err(CliError::Usage(format!("--n-max must be at most {}", u32::MAX)));
    }
    let trajectories = trajectories.max(1);
    let cps = match checkpoints {
        Some(mut c) => {
            if c.is_empty() {
                return Err(CliError::Usage("--checkpoints must not be empty".into()));
            }
            if c[0] < 1 || !c.windows(2).all(|p| p[0] < p[1]) {
                return Err(CliError::Usage(
                    "--checkpoints must be strictly increasing and at least 1".into(),
                ));
            }
            if *c.last().unwrap() > n_max {
                return Err(CliError::Usage("--checkpoints must not exceed --n-max".into()));
            }
            if *c.last().unwrap() < n_max {
                c.push(n_max);
            }
            c
        }
        None => {
            let mut c = Vec::new();
            let mut p = 10u64;
            while p < n_max {
                c.push(p);
                p = p.saturating_mul(10);
            }
            c.push(n_max);
            c
        }
    };

    header(
        w,
        st,
        "lil",
        &[
            ("n_max", Val::U64(n_max)),
            ("trajectories", Val::U64(trajectories)),
            (
                "checkpoints",
                Val::Str(cps.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
            ),
        ],
    )?;

    let chunks: Vec<charpoly::Result<Vec<Trajectory>>> =
        parallel_streams(trajectories as usize, st.seed, st.workers, |rng, range| {
            range.map(|_| sample_trajectory(&cps, rng)).collect()
        });
    let mut trajs: Vec<Trajectory> = Vec::with_capacity(trajectories as usize);
    for chunk in chunks {
        trajs.extend(chunk?);
    }

    for (ti, traj) in trajs.iter().enumerate() {
        let sid = stream_of(ti as u64, trajectories, st.workers as u64);
        for (ci, &cp) in traj.checkpoints.iter().enumerate() {
            let re = traj.re_log[ci];
            let im = traj.im_log[ci];
            let mut notes: Vec<&str> = Vec::new();

            // re / sqrt(log n * log log log n); the inner log is positive
            // only from n = 16 up
            let iterated = if cp >= 16 {
                let nf = cp as f64;
                Val::F64(re / (nf.ln() * nf.ln().ln().ln()).sqrt())
            } else {
                notes.push("iterated-log normalization needs n >= 16 so log log log n > 0");
                Val::Null
            };

            // re / sqrt(2 B log log B) with B the exact variance of re;
            // defined once B > e, which happens from n = 48 up
            let b = variance_sum(cp as u32)?;
            let variance_norm = if b > std::f64::consts::E {
                Val::F64(re / (2.0 * b * b.ln().ln()).sqrt())
            } else {
                notes.push("variance normalization needs variance_sum(n) > e");
                Val::Null
            };

            let mut rec = base_rec("trajectory", st.seed, sid);
            rec.push(("trajectory", Val::U64(ti as u64)));
            rec.push(("n", Val::U64(cp)));
            rec.push(("re_log", Val::F64(re)));
            rec.push(("im_log", Val::F64(im)));
            rec.push(("iterated_log_stat", iterated));
            rec.push(("variance_iterated_log_stat", variance_norm));
            rec.push((
                "note",
                if notes.is_empty() { Val::Null } else { Val::Str(notes.join("; ")) },
            ));
            put(w, Rec(rec))?;
        }
    }
    Ok(true)
}

pub fn bench(
    ns: &[u32],
    samples: Option<u64>,
    st: &Settings,
    w: &mut Writer,
) -> Result<bool, CliError> {
    let m = samples.or(st.samples).unwrap_or(200).max(1) as usize;

    header(w, st, "bench", &[("samples", Val::U64(m as u64))])?;

    for &n in ns {
        if n == 0 {
            return Err(CliError::Usage("--n entries must be at least 1".into()));
        }
        sample_batch(SamplerId::UnitaryProduct, n, m.min(8), st.seed, st.workers)?;
        let t0 = Instant::now();
        sample_batch(SamplerId::UnitaryProduct, n, m, st.seed, st.workers)?;
        let product_ns = t0.elapsed().as_secs_f64() * 1e9 / m as f64;

        let (matrix_samples, matrix_ns, speedup) = if n <= 64 {
            let mm = m.min(100).max(4);
            sample_matrix_batch(SamplerId::MatrixQr, n, 1.0, 2, st.seed, st.workers)?;
            let t1 = Instant::now();
            sample_matrix_batch(SamplerId::MatrixQr, n, 1.0, mm, st.seed, st.workers)?;
            let mat_ns = t1.elapsed().as_secs_f64() * 1e9 / mm as f64;
            (Val::U64(mm as u64), Val::F64(mat_ns), Val::F64(mat_ns / product_ns))
        } else {
            (Val::Null, Val::Null, Val::Null)
        };

        let mut rec = base_rec("bench", st.seed, 0);
        rec.push(("n", Val::U64(n as u64)));
        rec.push(("samples", Val::U64(m as u64)));
        rec.push(("product_ns_per_draw", Val::F64(product_ns)));
        rec.push(("matrix_samples", matrix_samples));
        rec.push(("matrix_ns_per_draw", matrix_ns));
        rec.push(("matrix_over_product", speedup));
        put(w, Rec(rec))?;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::stream_of;

    #[test]
    fn stream_split_matches_contiguous_chunks() {
        // m=10, workers=4: chunks 3,3,2,2
        let want = [0, 0, 0, 1, 1, 1, 2, 2, 3, 3];
        for (i, &s) in want.iter().enumerate() {
            assert_eq!(stream_of(i as u64, 10, 4), s);
        }
        // degenerate: more workers than draws
        assert_eq!(stream_of(0, 2, 5), 0);
        assert_eq!(stream_of(1, 2, 5), 1);
        // single worker
        assert_eq!(stream_of(7, 8, 1), 0);
    }
}
