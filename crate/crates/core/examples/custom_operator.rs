//! Terms built from user-supplied operator blocks.
//!
//! Two images `u` and `w` are fitted to separate observations while
//! `α‖∇(u − w)‖` asks their difference to be piecewise constant. The
//! blocks of that term are `[[∂x, −∂x], [∂y, −∂y]]`.
//!
//! Run with `cargo run --release --example custom_operator`.

use flexsolve::{
    build_partials, data_term, operator_term, DataNorm, GridDims, OperatorNorm, Problem, SparseOp, StopConfig,
};

fn main() -> flexsolve::Result<()> {
    let n = 16;
    let dims = GridDims::new(&[n, n])?;
    let f: Vec<f64> = (0..n * n).map(|p| (p % n) as f64 / n as f64).collect();
    let g: Vec<f64> = (0..n * n)
        .map(|p| f[p] - if (p / n) < n / 2 { 0.3 } else { 0.1 } + 0.05 * ((p * 7) % 5) as f64 / 5.0)
        .collect();

    let partials = build_partials(&dims)?;
    let blocks: Vec<Vec<SparseOp>> = partials.iter().map(|d| vec![d.clone(), d.scaled(-1.0)]).collect();

    let mut problem = Problem::new();
    let u = problem.add_primal_var(dims.clone());
    let w = problem.add_primal_var(dims.clone());
    problem.add_term(data_term(DataNorm::L2, 1.0, f, None)?, &[u])?;
    problem.add_term(data_term(DataNorm::L2, 1.0, g, None)?, &[w])?;
    let coupling = problem.add_term(operator_term(OperatorNorm::L1Iso, 0.5, 2, blocks)?, &[u, w])?;

    let summary = problem.run(&StopConfig::default())?;
    println!("converged: {} after {} iterations", summary.converged, summary.iterations);
    println!("coupling term owns {} dual entries", problem.dual(coupling).map_or(0, |d| d.len()));

    let diff: Vec<f64> = problem.primal(u)?.iter().zip(problem.primal(w)?).map(|(a, b)| a - b).collect();
    for row in [0, n / 2 - 1, n / 2, n - 1] {
        let r = &diff[row * n..(row + 1) * n];
        println!("row {row:>2}: u - w in [{:.3}, {:.3}]", r.iter().copied().fold(f64::MAX, f64::min), r.iter().copied().fold(f64::MIN, f64::max));
    }
    Ok(())
}
