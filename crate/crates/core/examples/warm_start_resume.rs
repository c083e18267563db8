//! Continuing a solve after changing a weight, and monitoring residuals.
//!
//! Run with `cargo run --release --example warm_start_resume`.

use flexsolve::apps::rof_problem;
use flexsolve::StopConfig;

fn main() -> flexsolve::Result<()> {
    let n = 32;
    let f: Vec<f64> = (0..n * n)
        .map(|p| if (p % n + p / n) % 11 < 5 { 0.3 } else { 0.7 } + 0.05 * ((p * 31 % 17) as f64 / 17.0 - 0.5))
        .collect();
    let mut problem = rof_problem(n, n, &f, 0.02)?;
    let cfg = StopConfig::new(20_000, 200, 1e-7)?;

    let first = problem.run_with_progress(&cfg, |k, r| println!("  k = {k:>5}  residual {:.2e}", r.scaled_total))?;
    println!("alpha 0.02: {} iterations", first.iterations);

    // same dual layout, so the retained iterates stay valid
    problem.set_term_weight(1, 0.08)?;
    let warm = problem.resume(&cfg)?;
    println!("alpha 0.08 warm: {} more iterations", warm.iterations);

    let mut cold = rof_problem(n, n, &f, 0.08)?;
    let fresh = cold.run(&cfg)?;
    println!("alpha 0.08 cold: {} iterations", fresh.iterations);

    let gap = problem.primal(0)?.iter().zip(cold.primal(0)?).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max difference between warm and cold solutions: {gap:.2e}");
    Ok(())
}
