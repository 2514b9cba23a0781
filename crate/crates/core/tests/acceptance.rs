//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use structnet::compressor::{
    compress, conv_to_toeplitz, restructure_shallow, sup_gap, toeplitz_layer_to_conv, CompressMode, CompressOptions,
    ShallowMode,
};
use structnet::decompose::{lu_approx, toeplitz_factorize, FitOptions};
use structnet::harness::bench::{bench, BenchKind};
use structnet::harness::data::{load_mnist_dir, synth_dataset, SynthKind};
use structnet::harness::train::{train, TrainConfig};
use structnet::identity_approx::{choose_h, Activation, SampleDomain};
use structnet::network::{loss_eval, Layer, LossKind, Network, Target};
use structnet::structmat::{
    embed_rows_hankel, embed_rows_toeplitz, DenseMatrix, HankelMatrix, MatrixKind, StructuredMatrix, ToeplitzMatrix,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn uniform(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn c1_fft_matches_naive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let (m, n) = (rng.gen_range(3..=257), rng.gen_range(3..=257));
        let params = uniform(&mut rng, m + n - 1);
        let x = uniform(&mut rng, n);
        let a: StructuredMatrix = if k % 2 == 0 {
            ToeplitzMatrix::new(m, n, params).unwrap().into()
        } else {
            HankelMatrix::new(m, n, params).unwrap().into()
        };
        let (slow, fast) = (a.matvec_naive(&x).unwrap(), a.matvec_fft(&x).unwrap());
        worst = worst.max(diff_norm(&slow, &fast) / norm(&slow));
    }
    outcome(worst <= 1e-10, format!("200 matrices, worst relative error {worst:.2e} (tol 1e-10)"))
}

/// Loss of `net` on one sample, for finite differences.
fn sample_loss(net: &Network, x: &[f64], t: &Target, loss: LossKind) -> f64 {
    loss_eval(loss, &net.eval(x, false).unwrap(), t).unwrap().0
}

fn perturbed(net: &Network, layer: usize, index: usize, bias: bool, delta: f64) -> Network {
    let layers = net
        .layers()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut params = l.weight().params().to_vec();
            let mut b = l.bias().to_vec();
            if i == layer {
                if bias {
                    b[index] += delta;
                } else {
                    params[index] += delta;
                }
            }
            let w = StructuredMatrix::from_params(l.weight().kind(), l.output_dim(), l.input_dim(), params).unwrap();
            Layer::new(w, b, l.activation()).unwrap()
        })
        .collect();
    Network::new(layers).unwrap()
}

fn c2_gradients_match_finite_differences() -> Outcome {
    let kinds = [MatrixKind::Dense, MatrixKind::Toeplitz, MatrixKind::Hankel, MatrixKind::Lower, MatrixKind::Upper];
    let acts = [Activation::Tanh, Activation::Sigmoid, Activation::leaky_relu()];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut checked) = (0.0f64, 0usize);
    let mut seen = std::collections::HashSet::new();
    for net_index in 0..50 {
        let depth = rng.gen_range(1..=3);
        let dims: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=8)).collect();
        let layer_kinds: Vec<MatrixKind> = (0..depth).map(|l| kinds[(net_index + l) % kinds.len()]).collect();
        seen.extend(layer_kinds.iter().copied());
        let act = acts[net_index % acts.len()];
        let net = Network::random(&dims, &layer_kinds, act, net_index as u64).unwrap();
        let x = uniform(&mut rng, dims[0]);
        let (loss, target) = if net_index % 2 == 0 {
            (LossKind::Mse, Target::Values(uniform(&mut rng, dims[depth])))
        } else {
            (LossKind::CrossEntropy, Target::Class(rng.gen_range(0..dims[depth])))
        };
        let (out, tape) = net.forward(&x, false).unwrap();
        let (_, g) = loss_eval(loss, &out, &target).unwrap();
        let grads = net.backward(&tape, &g, false).unwrap();
        let h = 1e-5;
        for (li, layer) in net.layers().iter().enumerate() {
            for (bias, count) in [(false, layer.weight_param_count()), (true, layer.bias().len())] {
                for p in 0..count {
                    let up = sample_loss(&perturbed(&net, li, p, bias, h), &x, &target, loss);
                    let dn = sample_loss(&perturbed(&net, li, p, bias, -h), &x, &target, loss);
                    let fd = (up - dn) / (2.0 * h);
                    let an = if bias { grads.biases[li][p] } else { grads.weights[li][p] };
                    let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-6);
                    worst = worst.max(rel);
                    checked += 1;
                }
            }
        }
    }
    let all_kinds = seen.len() == kinds.len();
    outcome(
        worst <= 1e-4 && all_kinds,
        format!("50 nets, {checked} parameters, worst relative error {worst:.2e} (tol 1e-4), all variants covered: {all_kinds}"),
    )
}

fn c3_shallow_restructuring_is_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (k, n) = (5, 3);
    let b = DenseMatrix::from_vec(k, n, uniform(&mut rng, k * n)).unwrap();
    let (d, c) = (uniform(&mut rng, k), uniform(&mut rng, k));
    let act = Activation::Tanh;
    let original = |x: &[f64]| -> f64 {
        let y = b.matvec(x).unwrap();
        y.iter().zip(&c).zip(&d).map(|((yi, ci), di)| di * act.eval(yi + ci)).sum()
    };
    let points: Vec<Vec<f64>> = (0..100).map(|_| uniform(&mut rng, n).iter().map(|v| 3.0 * v).collect()).collect();
    let mut worst = 0.0f64;
    for mode in [ShallowMode::Toeplitz, ShallowMode::Hankel, ShallowMode::Lower] {
        let s = restructure_shallow(&d, &b, &c, mode).unwrap();
        for x in &points {
            let y = s.weight.matvec_naive(x).unwrap();
            let v: f64 = y.iter().zip(&s.bias).zip(&s.outer).map(|((yi, bi), ai)| ai * act.eval(yi + bi)).sum();
            worst = worst.max((v - original(x)).abs());
        }
    }
    let a = DenseMatrix::from_rows(&[vec![11.0, 12.0], vec![21.0, 22.0]]).unwrap();
    let (t, _) = embed_rows_toeplitz(&a);
    let (h, _) = embed_rows_hankel(&a);
    let want_t = DenseMatrix::from_rows(&[vec![11.0, 12.0], vec![22.0, 11.0], vec![21.0, 22.0]]).unwrap();
    let want_h = DenseMatrix::from_rows(&[vec![11.0, 12.0], vec![12.0, 21.0], vec![21.0, 22.0]]).unwrap();
    let verbatim = t.to_dense() == want_t && h.to_dense() == want_h;
    outcome(
        worst <= 1e-12 && verbatim,
        format!("100 points x 3 modes, worst gap {worst:.2e} (tol 1e-12); 2x2 example verbatim: {verbatim}"),
    )
}

fn c4_choose_h_contract() -> Outcome {
    let start = Instant::now();
    let grid = SampleDomain::grid(3, 22, -1.0, 1.0).unwrap();
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for act in Activation::all() {
        for eps in [1e-2, 1e-3, 1e-4] {
            match choose_h(act, &grid, eps) {
                Ok(h) => {
                    // independent re-measurement straight from the definition
                    let a = act.smooth_point();
                    let sup = grid
                        .points()
                        .iter()
                        .map(|x| {
                            let r: Vec<f64> =
                                x.iter().map(|v| (act.eval(h * v + a) - act.eval(a)) / (h * act.deriv(a))).collect();
                            diff_norm(&r, x)
                        })
                        .fold(0.0, f64::max);
                    worst_ratio = worst_ratio.max(sup / eps);
                    ok &= sup <= eps;
                }
                Err(_) => ok = false,
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && elapsed < Duration::from_secs(30),
        format!(
            "{} grid points, 5 activations x 3 eps, worst sup/eps {worst_ratio:.3}, {:.1} s (limit 30 s)",
            grid.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn c5_compression_end_to_end() -> Outcome {
    let data = synth_dataset(SynthKind::Regression, 2000, 7).unwrap();
    let config = TrainConfig {
        dims: vec![2, 8, 8, 1],
        kinds: vec![MatrixKind::Dense; 3],
        activation: Activation::Tanh,
        loss: LossKind::Mse,
        lr: 0.05,
        batch_size: 20,
        epochs: 100,
        seed: 3,
        lr_decay: None,
        fast: false,
        parallel: false,
    };
    let (net, log) = train(&config, &data).unwrap();
    let tuning = SampleDomain::grid(2, 45, -1.0, 1.0).unwrap();
    let held_out = SampleDomain::uniform(2, 10_000, -1.0, 1.0, 555).unwrap();
    let mut details = vec![format!("trained test mse {:.4}", log.last().unwrap().test_score)];
    let mut ok = true;
    for mode in [CompressMode::Lu, CompressMode::Toeplitz, CompressMode::Hankel] {
        let start = Instant::now();
        match compress(&net, &tuning, 0.1, mode, &CompressOptions::default()) {
            Ok(report) => {
                let gap = sup_gap(&net, &report.network, held_out.points()).unwrap();
                let kinds: Vec<MatrixKind> = report.network.layers().iter().map(|l| l.weight().kind()).collect();
                let structured = match mode {
                    CompressMode::Lu => {
                        kinds.first() == Some(&MatrixKind::Upper)
                            && kinds.iter().all(|k| matches!(k, MatrixKind::Upper | MatrixKind::Lower))
                            && kinds.windows(2).all(|w| w[0] != w[1])
                    }
                    CompressMode::Toeplitz => kinds.iter().all(|k| *k == MatrixKind::Toeplitz),
                    CompressMode::Hankel => kinds.iter().all(|k| *k == MatrixKind::Hankel),
                };
                let elapsed = start.elapsed();
                ok &= gap <= 0.1 && structured && elapsed < Duration::from_secs(300);
                details.push(format!(
                    "{mode} gap {gap:.2e} ({} layers, structure ok: {structured}, {:.1} s)",
                    kinds.len(),
                    elapsed.as_secs_f64()
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{mode} failed: {e}"));
            }
        }
    }
    outcome(ok, details.join("; "))
}

fn c6_conv_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut exact) = (0.0f64, true);
    for _ in 0..50 {
        let (m, n) = (rng.gen_range(1..=16), rng.gen_range(1..=16));
        let t = ToeplitzMatrix::new(m, n, uniform(&mut rng, m + n - 1)).unwrap();
        let spec = toeplitz_layer_to_conv(&t);
        exact &= conv_to_toeplitz(&spec).unwrap() == t;
        let x = uniform(&mut rng, n);
        let (a, b) = (spec.apply(&x).unwrap(), t.matvec_naive(&x).unwrap());
        worst = worst.max(a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
    }
    outcome(exact && worst <= 1e-13, format!("50 matrices, parameter-exact: {exact}, worst gap {worst:.2e} (tol 1e-13)"))
}

fn c7_fft_cost_advantage() -> Outcome {
    let sizes = [512, 1024, 2048, 4096];
    let records = bench(&sizes, &[BenchKind::Dense, BenchKind::ToeplitzFft], 30, 7).unwrap();
    let ratios: Vec<f64> = records.chunks(2).map(|pair| pair[0].median_ns / pair[1].median_ns).collect();
    let growing = ratios.windows(2).all(|w| w[1] > w[0]);
    let faster = ratios[3] > 1.0;
    let shown: Vec<String> = sizes.iter().zip(&ratios).map(|(n, r)| format!("{n}:{r:.1}x")).collect();
    outcome(
        growing && faster,
        format!("dense/fft median ratio {}; growing: {growing}; fft faster at 4096: {faster}", shown.join(" ")),
    )
}

fn c8_mnist_desk_scale() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset");
    let data = match load_mnist_dir(&dir) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("cannot load {}: {e}", dir.display())),
    };
    let start = Instant::now();
    let run = |kinds: Vec<MatrixKind>| {
        let config = TrainConfig {
            dims: vec![784, 128, 128, 10],
            kinds,
            activation: Activation::Relu,
            loss: LossKind::CrossEntropy,
            lr: 0.01,
            batch_size: 20,
            epochs: 10,
            seed: 1,
            lr_decay: None,
            fast: true,
            parallel: false,
        };
        train(&config, &data).unwrap().1.last().unwrap().test_score * 100.0
    };
    let dense = run(vec![MatrixKind::Dense; 3]);
    let toeplitz = run(vec![MatrixKind::Toeplitz; 3]);
    let lu = run(vec![MatrixKind::Upper, MatrixKind::Lower, MatrixKind::Upper]);
    let elapsed = start.elapsed();
    let checks = [
        (toeplitz >= 88.0, "toeplitz >= 88%"),
        (dense - toeplitz <= 5.0, "toeplitz within 5 pts"),
        (dense - lu <= 3.0, "lu within 3 pts"),
        (elapsed < Duration::from_secs(900), "under 15 min"),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(ok, _)| !ok).map(|(_, name)| *name).collect();
    outcome(
        failed.is_empty(),
        format!(
            "{} train / {} test; dense {dense:.2}%, toeplitz {toeplitz:.2}%, lu {lu:.2}%, {:.0} s; unmet: {}",
            data.train.len(),
            data.test.len(),
            elapsed.as_secs_f64(),
            if failed.is_empty() { "none".into() } else { failed.join(", ") }
        ),
    )
}

fn c9_parameter_counts() -> Outcome {
    // closed forms, written out independently of the library
    let upper = |m: usize, n: usize| if m >= n { (n + 1) * n / 2 } else { (2 * n - m + 1) * m / 2 };
    let lower = |m: usize, n: usize| if m >= n { (2 * m - n + 1) * n / 2 } else { (m + 1) * m / 2 };
    let shapes = [(1, 1), (1, 7), (7, 1), (5, 5), (9, 4), (4, 9), (12, 12), (3, 10), (10, 3), (128, 784), (784, 128)];
    let mut mismatches = Vec::new();
    for (m, n) in shapes {
        // brute-force count of the stored pattern as a second oracle
        let count = |keep: &dyn Fn(usize, usize) -> bool| (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| keep(i, j)).count();
        let expected = [
            (MatrixKind::Toeplitz, m + n - 1),
            (MatrixKind::Hankel, m + n - 1),
            (MatrixKind::Upper, upper(m, n)),
            (MatrixKind::Lower, lower(m, n)),
            (MatrixKind::Dense, m * n),
        ];
        let patterns = [upper(m, n) == count(&|i, j| j >= i), lower(m, n) == count(&|i, j| j <= i)];
        if patterns.contains(&false) {
            mismatches.push(format!("closed form vs pattern at {m}x{n}"));
        }
        for (kind, want) in expected {
            let net = Network::random(&[n, m], &[kind], Activation::Tanh, 0).unwrap();
            let reported = net.layers()[0].weight_param_count();
            if reported != want || kind.param_count(m, n) != want {
                mismatches.push(format!("{kind} {m}x{n}: {reported} vs {want}"));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{} shapes x 5 kinds; mismatches: {}", shapes.len(), if mismatches.is_empty() { "none".into() } else { mismatches.join(", ") }),
    )
}

fn c10_factorization_quality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let opts = FitOptions { target_rel_error: 1e-10, ..FitOptions::default() };
    let mut planted_worst = 0.0f64;
    for k in 0..10 {
        let n = 3 + k % 4;
        let t1 = ToeplitzMatrix::new(n, n, uniform(&mut rng, 2 * n - 1)).unwrap().to_dense();
        let t2 = ToeplitzMatrix::new(n, n, uniform(&mut rng, 2 * n - 1)).unwrap().to_dense();
        let b = t1.matmul(&t2).unwrap();
        let chain = toeplitz_factorize(&b, 2, &FitOptions { seed: k as u64, ..opts.clone() }).unwrap();
        planted_worst = planted_worst.max(chain.reconstruction_error());
    }
    let mut random_worst = 0.0f64;
    for k in 0..5 {
        let b = DenseMatrix::from_vec(4, 4, uniform(&mut rng, 16)).unwrap();
        let chain = toeplitz_factorize(&b, 13, &FitOptions { seed: k as u64, target_rel_error: 1e-6, ..FitOptions::default() }).unwrap();
        random_worst = random_worst.max(chain.reconstruction_error());
    }
    let mut lu_worst = 0.0f64;
    for _ in 0..10 {
        let b = DenseMatrix::from_vec(8, 8, uniform(&mut rng, 64)).unwrap();
        lu_worst = lu_worst.max(lu_approx(&b, 1e-8).map_or(f64::INFINITY, |f| f.relative_error));
    }
    let singular = DenseMatrix::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.0], vec![3.0, 1.0, 1.0]]).unwrap();
    let (minor_ok, minor) = match lu_approx(&singular, 1e-8) {
        Ok(f) => (f.delta > 0.0 && f.relative_error <= 1e-8, format!("delta {:.1e}, error {:.1e}", f.delta, f.relative_error)),
        Err(e) => (false, e.to_string()),
    };
    outcome(
        planted_worst <= 1e-4 && random_worst <= 1e-2 && lu_worst <= 1e-8 && minor_ok,
        format!(
            "planted r=2 worst {planted_worst:.1e} (tol 1e-4); random 4x4 r=13 worst {random_worst:.1e} (tol 1e-2); \
             lu 8x8 worst {lu_worst:.1e} (tol 1e-8); zero leading minor: {minor}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("FFT matvec equals naive matvec", c1_fft_matches_naive),
        ("gradients match finite differences", c2_gradients_match_finite_differences),
        ("shallow restructuring is exact", c3_shallow_restructuring_is_exact),
        ("choose_h meets its sup bound", c4_choose_h_contract),
        ("compressed nets stay within eps", c5_compression_end_to_end),
        ("Toeplitz/conv round trip", c6_conv_round_trip),
        ("FFT matvec cost advantage", c7_fft_cost_advantage),
        ("MNIST subset accuracy", c8_mnist_desk_scale),
        ("parameter counts", c9_parameter_counts),
        ("factorization quality", c10_factorization_quality),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        failures += usize::from(!result.pass);
        println!(
            "criterion {:>2} {}: {} [{}] ({:.1} s)",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            name,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
