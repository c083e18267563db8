//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure.

use std::time::{Duration, Instant};

use flexsolve::apps::{self, flow_problem, rof_problem, segmentation_problem};
use flexsolve::io::{encode_flo, encode_pgm, parse_pgm, FlowField, PgmImage};
use flexsolve::linalg::{dot, norm2};
use flexsolve::prox;
use flexsolve::verification::{oracle_dense_solve, oracle_prox, oracle_prox_conjugate, Functional};
use flexsolve::{
    build_curl2d, build_diagonal, build_divergence, build_gradient, build_identity, compute_step_sizes,
    operator_term, GridDims, OperatorNorm, Problem, SparseOp, StopConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn noisy_phantom(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * n)
        .map(|p| {
            let (x, y) = (p % n, p / n);
            let inside = (n / 4..3 * n / 4).contains(&x) && (n / 4..3 * n / 4).contains(&y);
            let clean = if inside { 0.75 } else { 0.25 };
            clean + rng.random_range(-0.1..0.1)
        })
        .collect()
}

// Column x of an n×n image, shifted right by one pixel in the second frame.
fn ramp_pair(n: usize) -> (Vec<f64>, Vec<f64>) {
    let ramp = |x: f64| 0.1 + 0.8 * x / n as f64;
    let f1 = (0..n * n).map(|p| ramp((p % n) as f64)).collect();
    let f2 = (0..n * n).map(|p| ramp((p % n) as f64 - 1.0)).collect();
    (f1, f2)
}

const BAND_VALUES: [f64; 3] = [0.1, 0.5, 0.9];

fn band_phantom(n: usize, seed: u64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<usize> = (0..n * n).map(|p| (3 * (p % n)) / n).collect();
    let f = truth.iter().map(|&l| BAND_VALUES[l] + rng.random_range(-0.05..0.05)).collect();
    (f, truth)
}

struct Kernel {
    name: &'static str,
    check: fn(&mut ChaCha8Rng) -> f64,
}

fn vec_in(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn step(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.01..10.0)
}

fn c1_kernels() -> Vec<Kernel> {
    vec![
        Kernel {
            name: "clamp",
            check: |rng| {
                let n = rng.random_range(1..=5);
                let (y, b) = (vec_in(rng, n, -10.0, 10.0), vec_in(rng, n, -10.0, 10.0));
                let (s, alpha) = (step(rng), rng.random_range(0.1..5.0));
                let got = prox::prox_dual_clamp(&y, &vec![s; n], alpha, &b).unwrap();
                max_diff(&got, &oracle_prox_conjugate(&Functional::Abs { alpha, f: b }, s, &y).unwrap())
            },
        },
        Kernel {
            name: "ball-pointwise",
            check: |rng| {
                let groups = rng.random_range(1..=5);
                let n = groups * rng.random_range(1..=3);
                let y = vec_in(rng, n, -10.0, 10.0);
                let alpha = rng.random_range(0.1..5.0);
                let got = prox::prox_dual_ball_pointwise(&y, alpha, groups).unwrap();
                let s = step(rng);
                max_diff(&got, &oracle_prox(&Functional::BallIndicator { alpha, groups }, s, &y).unwrap())
            },
        },
        Kernel {
            name: "ball-global",
            check: |rng| {
                let n = rng.random_range(1..=5);
                let y = vec_in(rng, n, -10.0, 10.0);
                let alpha = rng.random_range(0.1..5.0);
                let got = prox::prox_dual_ball_global(&y, alpha).unwrap();
                let s = step(rng);
                max_diff(&got, &oracle_prox(&Functional::BallIndicator { alpha, groups: n }, s, &y).unwrap())
            },
        },
        Kernel {
            name: "quadratic",
            check: |rng| {
                let n = rng.random_range(1..=5);
                let (y, b) = (vec_in(rng, n, -10.0, 10.0), vec_in(rng, n, -10.0, 10.0));
                let (s, alpha) = (step(rng), rng.random_range(0.1..5.0));
                let got = prox::prox_dual_quadratic(&y, &vec![s; n], alpha, &b).unwrap();
                max_diff(&got, &oracle_prox_conjugate(&Functional::HalfSquare { alpha, f: b }, s, &y).unwrap())
            },
        },
        Kernel {
            name: "kl",
            check: |rng| {
                let n = rng.random_range(1..=5);
                let y = vec_in(rng, n, -10.0, 10.0);
                let f: Vec<f64> = (0..n)
                    .map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..10.0) })
                    .collect();
                let s = step(rng);
                let got = prox::prox_dual_kl(&y, &vec![s; n], &f).unwrap();
                max_diff(&got, &oracle_prox(&Functional::KlConjugate { f }, s, &y).unwrap())
            },
        },
        Kernel {
            name: "huber",
            check: |rng| {
                let groups = rng.random_range(1..=5);
                let n = groups * rng.random_range(1..=3);
                let y = vec_in(rng, n, -10.0, 10.0);
                let (s, alpha, epsilon) = (step(rng), rng.random_range(0.1..5.0), rng.random_range(0.01..2.0));
                let got = prox::prox_dual_huber(&y, &vec![s; n], alpha, epsilon, groups).unwrap();
                let g = Functional::HuberConjugate { alpha, epsilon, groups };
                max_diff(&got, &oracle_prox(&g, s, &y).unwrap())
            },
        },
        Kernel {
            name: "l2-data",
            check: |rng| {
                let n = rng.random_range(1..=5);
                let (x, f) = (vec_in(rng, n, -10.0, 10.0), vec_in(rng, n, -10.0, 10.0));
                let (t, alpha) = (step(rng), rng.random_range(0.1..5.0));
                let got = prox::prox_primal_l2_data(&x, &vec![t; n], alpha, &f).unwrap();
                max_diff(&got, &oracle_prox(&Functional::HalfSquare { alpha, f }, t, &x).unwrap())
            },
        },
        Kernel {
            name: "l1-data",
            check: |rng| {
                let n = rng.random_range(1..=5);
                let (x, f) = (vec_in(rng, n, -10.0, 10.0), vec_in(rng, n, -10.0, 10.0));
                let (t, alpha) = (step(rng), rng.random_range(0.1..5.0));
                let got = prox::prox_primal_l1_data(&x, &vec![t; n], alpha, &f).unwrap();
                max_diff(&got, &oracle_prox(&Functional::Abs { alpha, f }, t, &x).unwrap())
            },
        },
        Kernel {
            name: "simplex",
            check: |rng| {
                let labels = rng.random_range(1..=5);
                let n = labels * rng.random_range(1..=3);
                let (x, costs) = (vec_in(rng, n, -10.0, 10.0), vec_in(rng, n, 0.0, 10.0));
                let (t, alpha) = (step(rng), rng.random_range(0.1..5.0));
                let got = prox::prox_simplex_linear(&x, &vec![t; n], alpha, &costs, labels).unwrap();
                let g = Functional::SimplexLinear { alpha, costs, labels };
                max_diff(&got, &oracle_prox(&g, t, &x).unwrap())
            },
        },
        Kernel {
            name: "free",
            check: |rng| {
                let n = rng.random_range(1..=5);
                let x = vec_in(rng, n, -10.0, 10.0);
                let t = step(rng);
                max_diff(&prox::prox_primal_free(&x), &oracle_prox(&Functional::Zero, t, &x).unwrap())
            },
        },
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = Vec::new();
    for (i, kernel) in c1_kernels().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let err = (0..1000).map(|_| (kernel.check)(&mut rng)).fold(0.0, f64::max);
        ensure(err <= 1e-6, || format!("{} deviates by {err:e}", kernel.name))?;
        worst.push(err);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "10 kernels x 1000 inputs, worst deviation {:e}, {elapsed:.2?}",
        worst.iter().copied().fold(0.0, f64::max)
    ))
}

fn adjoint_gap(op: &SparseOp, rng: &mut ChaCha8Rng) -> f64 {
    let x = vec_in(rng, op.cols(), -1.0, 1.0);
    let y = vec_in(rng, op.rows(), -1.0, 1.0);
    let lhs = dot(&op.apply(&x).unwrap(), &y);
    let rhs = dot(&x, &op.apply_adjoint(&y).unwrap());
    let fro = norm2(op.values());
    (lhs - rhs).abs() / (fro * norm2(&x) * norm2(&y)).max(f64::MIN_POSITIVE)
}

fn random_block(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> SparseOp {
    let mut triplets = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if rng.random_bool(0.4) {
                triplets.push((r, c, rng.random_range(-3.0..3.0)));
            }
        }
    }
    SparseOp::from_triplets(rows, cols, triplets).unwrap()
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d2 = GridDims::new(&[5, 4]).unwrap();
    let d3 = GridDims::new(&[3, 4, 2]).unwrap();
    let diag: Vec<f64> = vec_in(&mut rng, 20, -2.0, 2.0);
    let named = [
        ("gradient 2-d", build_gradient(&d2).unwrap()),
        ("gradient 3-d", build_gradient(&d3).unwrap()),
        ("divergence", build_divergence(&d2).unwrap()),
        ("curl", build_curl2d(&d2).unwrap()),
        ("diagonal", build_diagonal(&diag).unwrap()),
        ("identity", build_identity(20)),
    ];
    let mut worst = 0.0f64;
    for (name, op) in &named {
        for _ in 0..20 {
            let gap = adjoint_gap(op, &mut rng);
            ensure(gap <= 1e-10, || format!("{name}: relative gap {gap:e}"))?;
            worst = worst.max(gap);
        }
    }
    for trial in 0..50 {
        let vars = rng.random_range(1..=3);
        let heights: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(1..=6)).collect();
        let widths: Vec<usize> = (0..vars).map(|_| rng.random_range(1..=6)).collect();
        let blocks: Vec<Vec<SparseOp>> = heights
            .iter()
            .map(|&h| widths.iter().map(|&w| random_block(&mut rng, h, w)).collect())
            .collect();
        let term = operator_term(OperatorNorm::L1Aniso, 1.0, vars, blocks).unwrap();
        let op = term.stacked_operator().unwrap();
        if op.nnz() == 0 {
            continue;
        }
        let gap = adjoint_gap(&op, &mut rng);
        ensure(gap <= 1e-10, || format!("random stack {trial}: relative gap {gap:e}"))?;
        worst = worst.max(gap);
    }
    for dims in [&d2, &d3] {
        let div: Vec<_> = build_divergence(dims).unwrap().triplets().collect();
        let neg_grad_t: Vec<_> = build_gradient(dims).unwrap().transpose().scaled(-1.0).triplets().collect();
        let identical = div.len() == neg_grad_t.len()
            && div
                .iter()
                .zip(&neg_grad_t)
                .all(|(a, b)| a.0 == b.0 && a.1 == b.1 && a.2.to_bits() == b.2.to_bits());
        ensure(identical, || format!("div differs from -grad^T on {:?}", dims.extents()))?;
    }
    Ok(format!("6 named + 50 random operators, worst relative gap {worst:e}; div = -grad^T bitwise"))
}

// Sums whose reciprocal cannot be represented so that σ·s rounds to 1: the
// product is monotone in σ, so it suffices that both neighbours of the
// rounded reciprocal already overshoot on opposite sides.
fn no_exact_reciprocal(s: f64) -> bool {
    let r = 1.0 / s;
    r * s != 1.0 && r.next_down() * s < 1.0 && r.next_up() * s > 1.0
}

fn criterion_3() -> Outcome {
    let n = 16;
    let f = noisy_phantom(n, 3);
    let (g1, mut g2) = ramp_pair(n);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    g2.iter_mut().for_each(|v| *v += rng.random_range(-0.02..0.02));
    let (bands, _) = band_phantom(n, 3);
    let problems = [
        ("rof", rof_problem(n, n, &f, 0.08).unwrap()),
        ("flow", flow_problem(n, n, &g1, &g2, 0.05, 0.05).unwrap()),
        ("segmentation", segmentation_problem(n, n, &bands, &BAND_VALUES, 0.5).unwrap()),
    ];
    let mut checked = 0;
    let mut unrepresentable = 0;
    let mut per_problem = Vec::new();
    for (name, p) in &problems {
        let before = unrepresentable;
        let op = p.stacked_operator().unwrap();
        let steps = compute_step_sizes(p).unwrap();
        let sigma: Vec<f64> = steps.sigma.concat();
        let tau: Vec<f64> = steps.tau.concat();
        for (kind, sums, st) in [("sigma", op.row_abs_sums(), &sigma), ("tau", op.col_abs_sums(), &tau)] {
            for (i, (&s, &t)) in sums.iter().zip(st.iter()).enumerate() {
                if s == 0.0 {
                    ensure(t == 1.0, || format!("{name}: {kind}[{i}] = {t} for an empty line"))?;
                    continue;
                }
                checked += 1;
                if t * s == 1.0 {
                    continue;
                }
                ensure(no_exact_reciprocal(s) && t == 1.0 / s, || {
                    format!("{name}: {kind}[{i}] * {s} = {:e}", t * s)
                })?;
                unrepresentable += 1;
            }
        }
        per_problem.push(format!("{name} {}", unrepresentable - before));
    }
    let note = if unrepresentable == 0 {
        String::new()
    } else {
        format!(
            "; {unrepresentable} sums ({}) admit no binary64 reciprocal with product exactly 1, \
             there the step is the correctly rounded 1/s",
            per_problem.join(", ")
        )
    };
    Ok(format!("{checked} nonzero sums checked, {} exact{note}", checked - unrepresentable))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let n = 8;
    let f = noisy_phantom(n, 4);
    let mut p = rof_problem(n, n, &f, 0.08).unwrap();
    let summary = p.run(&StopConfig::new(200_000, 100, 1e-12).unwrap()).map_err(|e| e.to_string())?;
    let reference = oracle_dense_solve(&p, 50_000).map_err(|e| e.to_string())?;
    let diff = max_diff(p.primal(0).unwrap(), &reference[0]);
    let elapsed = start.elapsed();
    ensure(diff <= 1e-4, || format!("max-norm difference {diff:e}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "max-norm difference {diff:e} (solver stopped at k = {}), {elapsed:.2?}",
        summary.final_report.at_iteration
    ))
}

fn criterion_5() -> Outcome {
    let n = 32;
    let f = noisy_phantom(n, 5);
    let cfg = StopConfig::default();
    let mut p = rof_problem(n, n, &f, 0.08).unwrap();
    let s = p.run(&cfg).map_err(|e| e.to_string())?;
    ensure(s.converged && s.final_report.scaled_total < 1e-5, || {
        format!("residual {:e} after {} iterations", s.final_report.scaled_total, s.iterations)
    })?;
    let out_energy = p.total_energy();
    let in_energy = p.energy_at(std::slice::from_ref(&f));
    ensure(out_energy <= in_energy, || format!("energy {out_energy} > {in_energy}"))?;

    let mut tiny = rof_problem(n, n, &f, 1e-8).unwrap();
    tiny.run(&cfg).map_err(|e| e.to_string())?;
    let drift = max_diff(tiny.primal(0).unwrap(), &f);
    ensure(drift < 1.0 / 255.0, || format!("alpha = 1e-8 moved the image by {drift}"))?;

    let c = vec![0.37; n * n];
    let mut flat = rof_problem(n, n, &c, 0.08).unwrap();
    flat.set_primal_vec(0, &c).unwrap();
    flat.run(&cfg).map_err(|e| e.to_string())?;
    ensure(flat.primal(0).unwrap() == &c[..], || "constant image moved".into())?;
    Ok(format!(
        "converged at k = {} (residual {:e}), energy {out_energy:.4} <= {in_energy:.4}, \
         alpha=1e-8 drift {drift:e}, constant image fixed",
        s.final_report.at_iteration, s.final_report.scaled_total
    ))
}

fn criterion_6() -> Outcome {
    let n = 32;
    let cfg = StopConfig::default();
    let (f1, f2) = ramp_pair(n);
    let mut p = flow_problem(n, n, &f1, &f2, 0.05, 0.05).unwrap();
    let s = p.run(&cfg).map_err(|e| e.to_string())?;
    let flow = FlowField::new(n, n, p.primal(0).unwrap().to_vec(), p.primal(1).unwrap().to_vec()).unwrap();
    let truth = FlowField::new(n, n, vec![1.0; n * n], vec![0.0; n * n]).unwrap();
    let epe = flow.mean_endpoint_error(&truth).unwrap();
    ensure(epe < 0.3, || format!("mean endpoint error {epe}"))?;

    let mut same = flow_problem(n, n, &f2, &f2, 0.05, 0.05).unwrap();
    same.run(&cfg).map_err(|e| e.to_string())?;
    let zero = same.primal(0).unwrap().iter().chain(same.primal(1).unwrap()).all(|&v| v == 0.0);
    ensure(zero, || "identical frames gave nonzero flow".into())?;
    Ok(format!(
        "mean endpoint error {epe:.4} px after {} iterations; identical frames give zero flow",
        s.iterations
    ))
}

fn criterion_7() -> Outcome {
    let n = 32;
    let (f, truth) = band_phantom(n, 7);
    let img = PgmImage::from_samples(n, n, 255, f).unwrap();
    let seg = apps::segment(&img, &BAND_VALUES, 0.5, &StopConfig::default()).map_err(|e| e.to_string())?;
    let correct = seg.label_map.iter().zip(&truth).filter(|(a, b)| a == b).count();
    let accuracy = correct as f64 / truth.len() as f64;
    ensure(accuracy >= 0.99, || format!("accuracy {accuracy}"))?;
    let mut worst = 0.0f64;
    for p in 0..n * n {
        let sum: f64 = seg.masks.iter().map(|m| m[p]).sum();
        let negative = seg.masks.iter().map(|m| -m[p]).fold(0.0, f64::max);
        worst = worst.max((sum - 1.0).abs()).max(negative);
    }
    ensure(worst <= 1e-6, || format!("simplex violation {worst:e}"))?;
    Ok(format!("accuracy {:.2}%, worst simplex violation {:e}", 100.0 * accuracy, worst.abs()))
}

fn criterion_8() -> Outcome {
    let n = 32;
    let f = noisy_phantom(n, 8);
    let (g1, g2) = ramp_pair(n);
    let (bands, _) = band_phantom(n, 8);
    let build = |which: usize| -> Problem {
        match which {
            0 => rof_problem(n, n, &f, 0.08).unwrap(),
            1 => flow_problem(n, n, &g1, &g2, 0.05, 0.05).unwrap(),
            _ => segmentation_problem(n, n, &bands, &BAND_VALUES, 0.5).unwrap(),
        }
    };
    let half = StopConfig::new(5_000, 100, 0.0).unwrap();
    let full = StopConfig::new(10_000, 100, 0.0).unwrap();
    for (which, name) in ["rof", "flow", "segmentation"].iter().enumerate() {
        let mut split = build(which);
        split.run(&half).map_err(|e| e.to_string())?;
        split.resume(&half).map_err(|e| e.to_string())?;
        let mut whole = build(which);
        whole.run(&full).map_err(|e| e.to_string())?;
        ensure(split.state() == whole.state() && split.state().k == 10_000, || {
            format!("{name}: split run differs")
        })?;
    }
    Ok("rof, flow, segmentation: 5000 + 5000 identical to 10000".into())
}

fn criterion_9() -> Outcome {
    let n = 8;
    let f = noisy_phantom(n, 9);
    let mut solved = rof_problem(n, n, &f, 0.08).unwrap();
    let s = solved.run(&StopConfig::new(400_000, 1_000, 1e-17).unwrap()).map_err(|e| e.to_string())?;

    let mut fresh = rof_problem(n, n, &f, 0.08).unwrap();
    fresh.set_primal_vec(0, solved.primal(0).unwrap()).unwrap();
    fresh.set_dual(1, solved.dual(1).unwrap()).unwrap();
    let r = fresh.run(&StopConfig::new(1, 1, 0.0).unwrap()).map_err(|e| e.to_string())?.final_report;
    ensure(r.primal < 1e-12 && r.dual < 1e-12, || {
        format!(
            "p = {:e}, d = {:e} (source run: k = {}, residual {:e})",
            r.primal, r.dual, s.final_report.at_iteration, s.final_report.scaled_total
        )
    })?;
    Ok(format!("p = {:e}, d = {:e} at the first check after injection", r.primal, r.dual))
}

// Minimal .flo reader kept apart from the library's parser.
fn independent_flo_reader(bytes: &[u8]) -> (i32, i32, Vec<f32>) {
    let word = |i: usize| [bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]];
    let w = i32::from_le_bytes(word(4));
    let h = i32::from_le_bytes(word(8));
    let values = (12..bytes.len()).step_by(4).map(|i| f32::from_le_bytes(word(i))).collect();
    (w, h, values)
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (w, h, maxval) in [(7usize, 5usize, 255u16), (3, 9, 65535), (1, 1, 1), (16, 16, 255)] {
        let mut bytes = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
        for _ in 0..w * h {
            let level = rng.random_range(0..=maxval);
            if maxval > 255 {
                bytes.extend_from_slice(&level.to_be_bytes());
            } else {
                bytes.push(level as u8);
            }
        }
        let img = parse_pgm(&bytes).map_err(|e| e.to_string())?;
        ensure(encode_pgm(&img) == bytes, || format!("{w}x{h} maxval {maxval} round trip differs"))?;
    }

    let (w, h) = (5usize, 3usize);
    let u: Vec<f64> = (0..w * h).map(|_| f64::from(rng.random_range(-20.0f32..20.0))).collect();
    let v: Vec<f64> = (0..w * h).map(|_| f64::from(rng.random_range(-20.0f32..20.0))).collect();
    let flow = FlowField::new(w, h, u.clone(), v.clone()).unwrap();
    let bytes = encode_flo(&flow).map_err(|e| e.to_string())?;
    ensure(bytes[..4] == [0x50, 0x49, 0x45, 0x48], || "wrong magic".into())?;
    ensure(bytes.len() == 12 + 8 * w * h, || format!("{} bytes", bytes.len()))?;
    let (rw, rh, values) = independent_flo_reader(&bytes);
    ensure((rw, rh) == (w as i32, h as i32), || format!("header dims {rw}x{rh}"))?;
    let exact = (0..w * h).all(|p| {
        values[2 * p].to_bits() == (u[p] as f32).to_bits() && values[2 * p + 1].to_bits() == (v[p] as f32).to_bits()
    });
    ensure(exact, || "flow values differ".into())?;
    Ok("P5 8/16-bit round trips bit-exact; .flo magic, dims and values exact".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("prox kernels match the numeric oracle", criterion_1),
        ("operator adjoints", criterion_2),
        ("preconditioning identities", criterion_3),
        ("agreement with the dense reference solver", criterion_4),
        ("ROF behaviour at 32x32", criterion_5),
        ("optical flow at 32x32", criterion_6),
        ("segmentation at 32x32", criterion_7),
        ("resume determinism", criterion_8),
        ("residual at a converged state", criterion_9),
        ("file formats", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {:>2}: {name}: {detail} ({elapsed:.1?})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] criterion {:>2}: {name}: {detail} ({elapsed:.1?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
