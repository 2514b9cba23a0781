use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::identity_approx::Activation;
use crate::network::{LossKind, Network, Target};
use crate::structmat::{DenseMatrix, HankelMatrix, MatrixKind, Orientation, ToeplitzMatrix, TriangularMatrix};

pub const BENCH_HEADER: &str = "kind,n,median_ns,p10_ns,p90_ns";
pub const MIN_REPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchKind {
    Dense,
    ToeplitzNaive,
    ToeplitzFft,
    HankelNaive,
    HankelFft,
    Lower,
    Upper,
    /// Forward, backward and SGD update of one n×n dense layer.
    StepDense,
    /// Same as `StepDense` with a Toeplitz layer on the FFT path.
    StepToeplitz,
}

impl BenchKind {
    pub const ALL: [BenchKind; 9] = [
        BenchKind::Dense,
        BenchKind::ToeplitzNaive,
        BenchKind::ToeplitzFft,
        BenchKind::HankelNaive,
        BenchKind::HankelFft,
        BenchKind::Lower,
        BenchKind::Upper,
        BenchKind::StepDense,
        BenchKind::StepToeplitz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchKind::Dense => "dense",
            BenchKind::ToeplitzNaive => "toeplitz-naive",
            BenchKind::ToeplitzFft => "toeplitz-fft",
            BenchKind::HankelNaive => "hankel-naive",
            BenchKind::HankelFft => "hankel-fft",
            BenchKind::Lower => "lower",
            BenchKind::Upper => "upper",
            BenchKind::StepDense => "step-dense",
            BenchKind::StepToeplitz => "step-toeplitz",
        }
    }

    pub fn parse(s: &str) -> Option<BenchKind> {
        BenchKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub kind: BenchKind,
    pub n: usize,
    pub reps: usize,
    pub median_ns: f64,
    pub p10_ns: f64,
    pub p90_ns: f64,
}

/// Per-call times over `reps` repetitions. Each repetition runs enough calls
/// to span at least ~50 µs so short kernels are not dominated by timer noise.
fn time_op(reps: usize, mut op: impl FnMut()) -> Vec<f64> {
    op();
    let start = Instant::now();
    op();
    let once = start.elapsed().as_nanos().max(1) as f64;
    let inner = ((50_000.0 / once).ceil() as usize).clamp(1, 10_000);
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            for _ in 0..inner {
                op();
            }
            t.elapsed().as_nanos() as f64 / inner as f64
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn bench_one(kind: BenchKind, n: usize, reps: usize, rng: &mut ChaCha8Rng) -> Result<BenchRecord> {
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut vec_of = |len: usize| (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let times = match kind {
        BenchKind::Dense => {
            let m = DenseMatrix::from_vec(n, n, vec_of(n * n))?;
            time_op(reps, || {
                black_box(m.matvec(black_box(&x)).expect("shape"));
            })
        }
        BenchKind::ToeplitzNaive | BenchKind::ToeplitzFft => {
            let t = ToeplitzMatrix::new(n, n, vec_of(2 * n - 1))?;
            let fast = kind == BenchKind::ToeplitzFft;
            time_op(reps, || {
                let y = if fast { t.matvec_fft(black_box(&x)) } else { t.matvec_naive(black_box(&x)) };
                black_box(y.expect("shape"));
            })
        }
        BenchKind::HankelNaive | BenchKind::HankelFft => {
            let h = HankelMatrix::new(n, n, vec_of(2 * n - 1))?;
            let fast = kind == BenchKind::HankelFft;
            time_op(reps, || {
                let y = if fast { h.matvec_fft(black_box(&x)) } else { h.matvec_naive(black_box(&x)) };
                black_box(y.expect("shape"));
            })
        }
        BenchKind::Lower | BenchKind::Upper => {
            let o = if kind == BenchKind::Lower { Orientation::Lower } else { Orientation::Upper };
            let t = TriangularMatrix::new(n, n, o, vec_of(n * (n + 1) / 2))?;
            time_op(reps, || {
                black_box(t.matvec_naive(black_box(&x)).expect("shape"));
            })
        }
        BenchKind::StepDense | BenchKind::StepToeplitz => {
            let mk = if kind == BenchKind::StepDense { MatrixKind::Dense } else { MatrixKind::Toeplitz };
            let mut net = Network::random(&[n, n], &[mk], Activation::Identity, 1)?;
            let target = Target::Values(vec_of(n));
            time_op(reps, || {
                let (_, g) = net
                    .batch_gradient(&[x.as_slice()], &[&target], LossKind::Mse, true, false)
                    .expect("shape");
                net.sgd_step_in_place(&g, 1e-6).expect("shape");
            })
        }
    };
    Ok(BenchRecord {
        kind,
        n,
        reps,
        median_ns: quantile(&times, 0.5),
        p10_ns: quantile(&times, 0.1),
        p90_ns: quantile(&times, 0.9),
    })
}

/// One record per (size, kind) pair, sizes outermost.
pub fn bench(sizes: &[usize], kinds: &[BenchKind], reps: usize, seed: u64) -> Result<Vec<BenchRecord>> {
    if reps < MIN_REPS {
        return Err(Error::Config(format!("need at least {MIN_REPS} repetitions, got {reps}")));
    }
    if let Some(bad) = sizes.iter().find(|&&n| n < 16) {
        return Err(Error::Config(format!("sizes must be at least 16, got {bad}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sizes.len() * kinds.len());
    for &n in sizes {
        for &kind in kinds {
            out.push(bench_one(kind, n, reps, &mut rng)?);
        }
    }
    Ok(out)
}

pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = format!("{BENCH_HEADER}\n");
    for r in records {
        let _ = writeln!(out, "{},{},{:.0},{:.0},{:.0}", r.kind.name(), r.n, r.median_ns, r.p10_ns, r.p90_ns);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_record_per_pair() {
        let kinds = [BenchKind::Dense, BenchKind::ToeplitzFft, BenchKind::StepToeplitz];
        let recs = bench(&[16, 32], &kinds, MIN_REPS, 1).unwrap();
        assert_eq!(recs.len(), 6);
        assert!(recs.iter().all(|r| r.median_ns > 0.0 && r.p10_ns <= r.median_ns && r.median_ns <= r.p90_ns));
        let csv = bench_csv(&recs);
        assert!(csv.starts_with("kind,n,median_ns,p10_ns,p90_ns\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn rejects_small_inputs() {
        assert!(bench(&[8], &[BenchKind::Dense], MIN_REPS, 0).is_err());
        assert!(bench(&[16], &[BenchKind::Dense], 5, 0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in BenchKind::ALL {
            assert_eq!(BenchKind::parse(k.name()), Some(k));
        }
    }
}
